//! Exploration couplings between measures with different boundary
//! conditions, run as explicit reveal loops with shared uniforms, together
//! with the worst-case sign bound and the dominating site percolation.
//!
//! Every uniform is keyed by the element it drives (edge or site), so the
//! coupled measures read identical randomness whatever order they reach it.

use std::io::Write;
use std::sync::Arc;

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Region, Site};
use crate::rng::{chain_rng, hash_words};

mod grand;
mod ising;
mod site;

pub use grand::{grand_rc_coupling, GrandCoupler, GrandOutcome, StopRule};
pub use ising::{
    boundary_event_violation, es_conditional_spins, ising_bc_coupling, IsingBcCoupler,
    IsingBcOutcome,
};
pub use site::{
    site_connectivity_bound, site_exploration_coupling, ConditionalMode, SiteCoupler, SiteOutcome,
};

/// One revealed element.
#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    /// Index into the trace labels.
    pub element: usize,
    pub key: u64,
    pub uniform: f64,
    /// Conditional probability of "open" (or `+1`) under each measure.
    pub probs: Vec<f64>,
    /// Revealed values under each measure.
    pub values: Vec<i8>,
    pub before_tau: bool,
}

/// Ordered reveal log of one coupling run.
#[derive(Clone, Debug)]
pub struct CouplingTrace {
    pub kind: &'static str,
    pub seed: u64,
    pub labels: Arc<Vec<String>>,
    pub steps: Vec<TraceStep>,
    /// Number of steps taken before the stopping time.
    pub tau: usize,
    /// Elements of the explored set at `τ` (open edges `E_τ` or sites `V_τ`).
    pub explored: Vec<usize>,
    pub approximate: bool,
}

impl CouplingTrace {
    pub fn new(kind: &'static str, seed: u64, labels: Arc<Vec<String>>) -> Self {
        Self {
            kind,
            seed,
            labels,
            steps: Vec::new(),
            tau: 0,
            explored: Vec::new(),
            approximate: false,
        }
    }

    /// Line JSON: one record per step, then a summary record.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Step<'a> {
            schema_version: u32,
            t: usize,
            element: &'a str,
            key: String,
            uniform: f64,
            probs: &'a [f64],
            values: &'a [i8],
            before_tau: bool,
        }
        #[derive(Serialize)]
        struct Summary<'a> {
            schema_version: u32,
            kind: &'a str,
            seed: u64,
            steps: usize,
            tau: usize,
            explored: Vec<&'a str>,
            approximate: bool,
        }
        for (t, s) in self.steps.iter().enumerate() {
            let rec = Step {
                schema_version: 1,
                t,
                element: &self.labels[s.element],
                key: format!("{:016x}", s.key),
                uniform: s.uniform,
                probs: &s.probs,
                values: &s.values,
                before_tau: s.before_tau,
            };
            serde_json::to_writer(&mut w, &rec)?;
            writeln!(w)?;
        }
        let summary = Summary {
            schema_version: 1,
            kind: self.kind,
            seed: self.seed,
            steps: self.steps.len(),
            tau: self.tau,
            explored: self
                .explored
                .iter()
                .map(|&e| self.labels[e].as_str())
                .collect(),
            approximate: self.approximate,
        };
        serde_json::to_writer(&mut w, &summary)?;
        writeln!(w)?;
        Ok(())
    }
}

/// `a(β,H,|h|) = e^{-2dβ+H|h|} / (e^{-2dβ+H|h|} + e^{2dβ-H|h|})`, the least
/// conditional probability that a site takes the sign of its field.
pub fn sign_bound_a(beta: f64, strength: f64, abs_h: f64, d: usize) -> f64 {
    let x = -2.0 * d as f64 * beta + strength * abs_h;
    // e^x / (e^x + e^-x) = 1 / (1 + e^{-2x})
    1.0 / (1.0 + (-2.0 * x).exp())
}

/// `p_x = 1 - a²`.
pub fn domination_p(beta: f64, strength: f64, abs_h: f64, d: usize) -> f64 {
    let a = sign_bound_a(beta, strength, abs_h, d);
    1.0 - a * a
}

/// Independent site percolation on the region with probabilities `p`
/// (region order); exterior sites keep the given boundary values.
pub fn dominating_site_sample(
    region: &Region,
    p: &[f64],
    boundary: &[(Site, bool)],
    seed: u64,
) -> Result<(Vec<bool>, Vec<(Site, bool)>)> {
    if p.len() != region.len() {
        return Err(Error::DomainMismatch(format!(
            "{} probabilities for {} sites",
            p.len(),
            region.len()
        )));
    }
    if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::InvalidParameter(format!("site probability {bad}")));
    }
    let mut rng = chain_rng(hash_words(seed, &[0x5e7e]));
    let inside = p
        .iter()
        .map(|&px| crate::rng::unit_f64(rng.next_u64()) < px)
        .collect();
    Ok((inside, boundary.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::{exact_measure, SpinBoundary, DEFAULT_SPIN_CAP};
    use crate::lattice::cube;

    #[test]
    fn sign_bound_values() {
        assert_eq!(sign_bound_a(0.0, 0.0, 1.0, 2), 0.5);
        let a = sign_bound_a(0.0, 1.0, 1.0, 3);
        assert!((a - 1.0 / (1.0 + (-2.0f64).exp())).abs() < 1e-15);
        assert!((a - 0.880797).abs() < 1e-6);
        assert_eq!(domination_p(0.0, 0.0, 1.0, 2), 0.75);
        assert!((domination_p(0.0, 1.0, 1.0, 2) - 0.22420).abs() < 1e-5);
        let mut last = 1.0;
        for k in 0..40 {
            let p = domination_p(0.3, k as f64 * 0.5, 0.7, 2);
            assert!(p <= last);
            last = p;
        }
        assert!(last < 1e-10);
    }

    #[test]
    fn single_site_worst_case_is_exact() {
        for &(beta, strength, h) in &[(0.3, 0.5, 1.0), (0.1, 0.2, -2.0), (0.7, 1.5, 0.4)] {
            let r = cube(0, 2).unwrap();
            let sign: f64 = if h > 0.0 { 1.0 } else { -1.0 };
            let eta = if h > 0.0 {
                SpinBoundary::Minus
            } else {
                SpinBoundary::Plus
            };
            let ex = exact_measure(&r, &eta, beta, &[strength * h], DEFAULT_SPIN_CAP).unwrap();
            let p_sign = if sign > 0.0 {
                ex.probs()[1]
            } else {
                ex.probs()[0]
            };
            assert!((p_sign - sign_bound_a(beta, strength, h.abs(), 2)).abs() < 1e-14);
        }
    }

    #[test]
    fn dominating_extremes() {
        let r = cube(1, 2).unwrap();
        let (t, _) = dominating_site_sample(&r, &[0.0; 9], &[], 1).unwrap();
        assert!(t.iter().all(|&x| !x));
        let (t, _) = dominating_site_sample(&r, &[1.0; 9], &[], 1).unwrap();
        assert!(t.iter().all(|&x| x));
        assert!(dominating_site_sample(&r, &[1.5; 9], &[], 1).is_err());
    }
}
