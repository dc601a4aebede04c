//! Numerical location of the Kertész line: classify the finite-size trend of
//! `θ_n` at each field strength and narrow a bracket `[H_lo, H_hi]`.
//!
//! Every output here is numerical evidence about a finite-size trend, not a
//! statement about the infinite-volume `θ`.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::cluster::{theta_n_estimate, ThetaEstimate};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::stats::Estimate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    Below,
    Above,
    Inconclusive,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Below => "below",
            Classification::Above => "above",
            Classification::Inconclusive => "inconclusive",
        })
    }
}

/// Thresholds of the decay-versus-plateau rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassifyRule {
    /// Width of the confidence intervals in standard errors.
    pub z: f64,
    /// A step with `θ_next/θ_prev` below this (and separated intervals) decays.
    pub decay_ratio: f64,
    /// Every `θ_n` above this and the last ratios at least `flat_ratio` is a plateau.
    pub floor: f64,
    pub flat_ratio: f64,
}

impl Default for ClassifyRule {
    fn default() -> Self {
        Self {
            z: 2.0,
            decay_ratio: 0.6,
            floor: 0.1,
            flat_ratio: 0.8,
        }
    }
}

/// Upper confidence limit; an estimate with no hits at all gets `3/N`.
fn upper(e: &Estimate, z: f64) -> f64 {
    if e.value == 0.0 {
        3.0 / e.n.max(1) as f64
    } else {
        e.upper(z)
    }
}

/// Distinguishable from zero: the lower limit clears the `3/N` floor.
fn resolved(e: &Estimate, z: f64) -> bool {
    e.value > 0.0 && e.lower(z) > 3.0 / e.n.max(1) as f64
}

/// Once both ends sit at the resolution floor no interval can separate
/// them, so a step between unresolved values counts unless it rises.
fn decays(prev: &Estimate, next: &Estimate, rule: &ClassifyRule) -> bool {
    if !resolved(prev, rule.z) {
        return !resolved(next, rule.z) && next.value <= prev.value;
    }
    next.value / prev.value < rule.decay_ratio && upper(next, rule.z) < prev.lower(rule.z)
}

/// Classifies `θ_n` along an increasing schedule (at least three sizes).
///
/// "Below" when the last two steps both decay; "above" when every estimate
/// exceeds the floor and the last two ratios are at least `flat_ratio`.
pub fn classify(estimates: &[Estimate], rule: &ClassifyRule) -> Result<Classification> {
    let k = estimates.len();
    if k < 3 {
        return Err(Error::InvalidParameter(
            "classification needs at least three sizes".into(),
        ));
    }
    if decays(&estimates[k - 3], &estimates[k - 2], rule)
        && decays(&estimates[k - 2], &estimates[k - 1], rule)
    {
        return Ok(Classification::Below);
    }
    let flat = |a: &Estimate, b: &Estimate| a.value > 0.0 && b.value / a.value >= rule.flat_ratio;
    if estimates.iter().all(|e| e.value > rule.floor)
        && flat(&estimates[k - 3], &estimates[k - 2])
        && flat(&estimates[k - 2], &estimates[k - 1])
    {
        return Ok(Classification::Above);
    }
    Ok(Classification::Inconclusive)
}

#[derive(Clone, Debug, Serialize)]
pub struct KerteszConfig {
    pub beta: f64,
    pub d: usize,
    pub q: u32,
    /// Increasing box sizes `n`.
    pub schedule: Vec<usize>,
    /// Field strengths classified before any bisection.
    pub grid: Vec<f64>,
    /// Target bracket width.
    pub width: f64,
    /// Extra field strengths the bisection may add.
    pub max_probes: usize,
    pub replicas: usize,
    pub sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub rule: ClassifyRule,
}

impl KerteszConfig {
    pub fn new(beta: f64) -> Self {
        Self {
            beta,
            d: 2,
            q: 2,
            schedule: vec![8, 16, 32, 64],
            grid: vec![0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0],
            width: 0.05,
            max_probes: 12,
            replicas: 10_000,
            sweeps: 1,
            burn_in: 10,
            seed: 1,
            rule: ClassifyRule::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanCell {
    pub strength: f64,
    pub estimates: Vec<ThetaEstimate>,
    pub classification: Classification,
}

#[derive(Clone, Debug, Serialize)]
pub struct KerteszResult {
    pub beta: f64,
    /// Cells sorted by field strength.
    pub cells: Vec<ScanCell>,
    /// Largest strength classified "below" under the smallest "above".
    pub h_lo: Option<f64>,
    /// Smallest strength classified "above".
    pub h_hi: Option<f64>,
    /// Set when the probe budget ran out before the target width.
    pub inconclusive: bool,
    /// No "above" cell sits below a "below" cell.
    pub monotone: bool,
    pub probes: usize,
}

/// `θ_n` estimates over the schedule at one field strength.
pub fn scan_cell(cfg: &KerteszConfig, strength: f64) -> Result<ScanCell> {
    let estimates = cfg
        .schedule
        .par_iter()
        .map(|&n| {
            let id = format!(
                "kertesz/beta={}/H={}/q={}/d={}/n={}",
                cfg.beta, strength, cfg.q, cfg.d, n
            );
            theta_n_estimate(
                cfg.beta,
                strength,
                n,
                cfg.d,
                cfg.q,
                cfg.replicas,
                cfg.sweeps,
                cfg.burn_in,
                derive_seed(cfg.seed, &id),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<Estimate> = estimates.iter().map(|e| e.estimate).collect();
    Ok(ScanCell {
        strength,
        classification: classify(&values, &cfg.rule)?,
        estimates,
    })
}

fn bracket(cells: &[ScanCell]) -> (Option<f64>, Option<f64>) {
    let hi = cells
        .iter()
        .filter(|c| c.classification == Classification::Above)
        .map(|c| c.strength)
        .reduce(f64::min);
    let lo = cells
        .iter()
        .filter(|c| c.classification == Classification::Below && hi.is_none_or(|h| c.strength < h))
        .map(|c| c.strength)
        .reduce(f64::max);
    (lo, hi)
}

/// Next strength to classify, if the bracket is still too wide.
fn next_probe(cells: &[ScanCell], width: f64) -> Option<f64> {
    let (lo, hi) = bracket(cells);
    let (lo, hi) = (lo?, hi?);
    let open: Vec<f64> = cells
        .iter()
        .filter(|c| {
            c.classification == Classification::Inconclusive && c.strength > lo && c.strength < hi
        })
        .map(|c| c.strength)
        .collect();
    if open.is_empty() {
        return (hi - lo > width).then(|| 0.5 * (lo + hi));
    }
    let first = open.iter().copied().fold(f64::INFINITY, f64::min);
    let last = open.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if first - lo > width {
        Some(0.5 * (lo + first))
    } else if hi - last > width {
        Some(0.5 * (last + hi))
    } else {
        None
    }
}

/// Classifies the grid, then bisects towards a bracket of the target width.
pub fn kertesz_scan(cfg: &KerteszConfig) -> Result<KerteszResult> {
    if cfg.beta < 0.0 || cfg.grid.is_empty() || cfg.grid.iter().any(|h| *h < 0.0) {
        return Err(Error::InvalidParameter(
            "need beta >= 0 and a nonempty grid of H >= 0".into(),
        ));
    }
    if cfg.schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "schedule must be increasing".into(),
        ));
    }
    let mut grid = cfg.grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut cells = grid
        .iter()
        .map(|&h| scan_cell(cfg, h))
        .collect::<Result<Vec<_>>>()?;
    let mut probes = 0;
    while let Some(h) = next_probe(&cells, cfg.width) {
        if probes == cfg.max_probes {
            break;
        }
        cells.push(scan_cell(cfg, h)?);
        cells.sort_by(|a, b| a.strength.total_cmp(&b.strength));
        probes += 1;
    }
    let (h_lo, h_hi) = bracket(&cells);
    let inconclusive = next_probe(&cells, cfg.width).is_some();
    let highest_below = cells
        .iter()
        .filter(|c| c.classification == Classification::Below)
        .map(|c| c.strength)
        .reduce(f64::max);
    let monotone = !cells.iter().any(|c| {
        c.classification == Classification::Above && highest_below.is_some_and(|b| c.strength < b)
    });
    Ok(KerteszResult {
        beta: cfg.beta,
        cells,
        h_lo,
        h_hi,
        inconclusive,
        monotone,
        probes,
    })
}

/// Writes `beta,H,n,theta_hat,stderr,classification`.
pub fn write_kertesz_csv<W: Write>(mut w: W, results: &[KerteszResult]) -> Result<()> {
    writeln!(w, "# schema_version=1")?;
    writeln!(w, "beta,H,n,theta_hat,stderr,classification")?;
    for r in results {
        for c in &r.cells {
            for e in &c.estimates {
                writeln!(
                    w,
                    "{},{},{},{:.10e},{:.10e},{}",
                    r.beta, c.strength, e.n, e.estimate.value, e.estimate.stderr, c.classification
                )?;
            }
        }
    }
    Ok(())
}
