//! Inhomogeneous site percolation with `p_x = 1 - a²(β,H,|h_x|)`, quenched
//! and averaged over the field.

use std::collections::VecDeque;

use rand::RngCore;
use serde::Serialize;

use crate::coupling::domination_p;
use crate::error::{Error, Result};
use crate::fields::{sample_field, FieldDistribution, FieldRealization};
use crate::lattice::{Region, Site};
use crate::rng::{chain_rng, hash_words, unit_f64};
use crate::stats::{Estimate, Welford};

/// Connectivity events through open sites of the region.
#[derive(Clone, Debug, PartialEq)]
pub enum SiteEvent {
    Open(Site),
    /// Both sites open and joined by open sites.
    Connected(Site, Site),
    /// The site is open and joined by open sites to `∂_in Λ`.
    ReachesBoundary(Site),
}

struct EventIndex {
    from: usize,
    targets: Vec<bool>,
}

impl SiteEvent {
    fn index(&self, region: &Region) -> Result<EventIndex> {
        let at = |s: &Site| {
            region
                .index_of(s)
                .ok_or_else(|| Error::DomainMismatch(format!("{s} is not in the region")))
        };
        let mut targets = vec![false; region.len()];
        let from = match self {
            SiteEvent::Open(x) => {
                let i = at(x)?;
                targets[i] = true;
                i
            }
            SiteEvent::Connected(x, y) => {
                targets[at(y)?] = true;
                at(x)?
            }
            SiteEvent::ReachesBoundary(x) => {
                for s in region.interior_boundary() {
                    targets[at(&s)?] = true;
                }
                at(x)?
            }
        };
        Ok(EventIndex { from, targets })
    }
}

fn occurs(
    ev: &EventIndex,
    inner: &[Vec<usize>],
    open: &[bool],
    seen: &mut [bool],
    queue: &mut VecDeque<usize>,
) -> bool {
    if !open[ev.from] {
        return false;
    }
    seen.iter_mut().for_each(|s| *s = false);
    queue.clear();
    seen[ev.from] = true;
    queue.push_back(ev.from);
    while let Some(i) = queue.pop_front() {
        if ev.targets[i] {
            return true;
        }
        for &j in &inner[i] {
            if open[j] && !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    false
}

/// Site probabilities `1 - a²(β,H,|h_x|)` in region order.
pub fn site_probabilities(beta: f64, strength: f64, h: &FieldRealization) -> Vec<f64> {
    let d = h.region().dim();
    h.values()
        .iter()
        .map(|v| domination_p(beta, strength, v.abs(), d))
        .collect()
}

/// Exact probability of `event` under the product measure `p`, by
/// enumeration over at most `cap` sites.
pub fn site_event_exact(region: &Region, p: &[f64], event: &SiteEvent, cap: usize) -> Result<f64> {
    let n = region.len();
    if n > cap || n >= 63 {
        return Err(Error::CapExceeded {
            what: "site configurations",
            needed: n,
            cap,
        });
    }
    let ev = event.index(region)?;
    let (inner, _) = region.neighbor_table();
    let mut open = vec![false; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    let mut total = 0.0;
    for mask in 0u64..1 << n {
        let mut w = 1.0;
        for i in 0..n {
            open[i] = mask >> i & 1 == 1;
            w *= if open[i] { p[i] } else { 1.0 - p[i] };
        }
        if w > 0.0 && occurs(&ev, &inner, &open, &mut seen, &mut queue) {
            total += w;
        }
    }
    Ok(total)
}

/// Monte Carlo probability of `event` for one field realization.
pub fn quenched_site_estimate(
    beta: f64,
    strength: f64,
    h: &FieldRealization,
    event: &SiteEvent,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    let region = h.region();
    let ev = event.index(region)?;
    let p = site_probabilities(beta, strength, h);
    let (inner, _) = region.neighbor_table();
    let n = region.len();
    let mut rng = chain_rng(hash_words(seed, &[0x9e7]));
    let (mut open, mut seen, mut queue) = (vec![false; n], vec![false; n], VecDeque::new());
    let mut acc = Welford::new();
    for _ in 0..samples {
        for (o, &px) in open.iter_mut().zip(&p) {
            *o = unit_f64(rng.next_u64()) < px;
        }
        acc.push(occurs(&ev, &inner, &open, &mut seen, &mut queue) as u8 as f64);
    }
    Ok(acc.estimate())
}

#[derive(Clone, Debug, Serialize)]
pub struct AveragedSiteEstimate {
    /// Probability of the event under the field-averaged measure.
    pub estimate: Estimate,
    /// Density of open sites, the one-site open probability averaged over
    /// sites and fields.
    pub one_site: Estimate,
    /// `P(|H_x| < δ) + 1 - a²(β,H,δ)` for the supplied `δ`.
    pub bound: Option<f64>,
}

/// Joint Monte Carlo over field realizations and site configurations: one
/// fresh field and one site draw per replica.
#[allow(clippy::too_many_arguments)]
pub fn averaged_site_estimate(
    beta: f64,
    strength: f64,
    nu: &FieldDistribution,
    region: &Region,
    event: &SiteEvent,
    replicas: usize,
    delta: Option<f64>,
    seed: u64,
) -> Result<AveragedSiteEstimate> {
    if replicas < 2 {
        return Err(Error::InvalidParameter("need at least 2 replicas".into()));
    }
    let ev = event.index(region)?;
    let (inner, _) = region.neighbor_table();
    let n = region.len();
    let mut rng = chain_rng(hash_words(seed, &[0xa7e]));
    let (mut open, mut seen, mut queue) = (vec![false; n], vec![false; n], VecDeque::new());
    let (mut hits, mut density) = (Welford::new(), Welford::new());
    for r in 0..replicas {
        let h = sample_field(nu, region, hash_words(seed, &[r as u64]));
        let p = site_probabilities(beta, strength, &h);
        for (o, &px) in open.iter_mut().zip(&p) {
            *o = unit_f64(rng.next_u64()) < px;
        }
        density.push(open.iter().filter(|&&o| o).count() as f64 / n as f64);
        hits.push(occurs(&ev, &inner, &open, &mut seen, &mut queue) as u8 as f64);
    }
    let bound =
        delta.map(|dl| nu.prob_abs_below(dl) + domination_p(beta, strength, dl, region.dim()));
    Ok(AveragedSiteEstimate {
        estimate: hits.estimate(),
        one_site: density.estimate(),
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::cube;
    use crate::perc::{h3_bound_below, CriticalConstants};

    #[test]
    fn zero_field_matches_product_measure() {
        let r = cube(1, 2).unwrap();
        let ev = SiteEvent::ReachesBoundary(Site::origin(2));
        // at β = 0 and H = 0 every site is open with 3/4; the origin needs
        // itself and one neighbour
        let exact = 0.75 * (1.0 - 0.25f64.powi(4));
        let p = vec![0.75; 9];
        assert!((site_event_exact(&r, &p, &ev, 20).unwrap() - exact).abs() < 1e-12);
        let est = averaged_site_estimate(
            0.0,
            0.0,
            &FieldDistribution::Gaussian,
            &r,
            &ev,
            40_000,
            None,
            2,
        )
        .unwrap();
        assert!((est.estimate.value - exact).abs() < 3.0 * est.estimate.stderr);
        assert!((est.one_site.value - 0.75).abs() < 3.0 * est.one_site.stderr);
    }

    #[test]
    fn bimodal_average_is_the_quenched_value() {
        let r = cube(2, 2).unwrap();
        let ev = SiteEvent::Connected(Site::new(vec![-2, 0]), Site::new(vec![2, 0]));
        let (beta, strength) = (0.1, 0.2);
        let avg = averaged_site_estimate(
            beta,
            strength,
            &FieldDistribution::Bimodal,
            &r,
            &ev,
            30_000,
            None,
            4,
        )
        .unwrap();
        let h = sample_field(&FieldDistribution::Bimodal, &r, 99);
        let q = quenched_site_estimate(beta, strength, &h, &ev, 30_000, 5).unwrap();
        let se = (avg.estimate.stderr.powi(2) + q.stderr.powi(2)).sqrt();
        assert!((avg.estimate.value - q.value).abs() < 3.0 * se);
    }

    #[test]
    fn gaussian_above_threshold_is_sparse() {
        let pc = CriticalConstants::standard().site(2).unwrap();
        let b = h3_bound_below(0.1, 2, &FieldDistribution::Gaussian, pc / 2.0).unwrap();
        let r = cube(3, 2).unwrap();
        let ev = SiteEvent::Open(Site::origin(2));
        let est = averaged_site_estimate(
            0.1,
            b.strength * 1.01,
            &FieldDistribution::Gaussian,
            &r,
            &ev,
            20_000,
            Some(b.delta),
            6,
        )
        .unwrap();
        assert!(est.one_site.value < pc / 2.0 + 3.0 * est.one_site.stderr);
        assert!(est.bound.unwrap() < pc / 2.0);
    }
}
