//! Field strengths above which the dominating site percolation is
//! subcritical.
//!
//! With `a(β,H,|h|)` the worst-case sign probability, the bimodal threshold
//! is the least `H` with `1 - a(β,H,1)² < p_c^s(d)`. For a general field law
//! a cut `δ` is chosen and sites with `|h| < δ` are counted as open:
//! `P(|H_x| < δ) + 1 - a(β,H,δ)² < p_c^s(d)`.

use serde::Serialize;

use super::constants::CriticalConstants;
use crate::coupling::domination_p;
use crate::error::{Error, Result};
use crate::fields::FieldDistribution;

/// Least `H` with `1 - a(β,H,c)² < target`, from
/// `a = 1/(1+e^{-2x})`, `x = cH - 2dβ`.
fn invert(beta: f64, d: usize, c: f64, target: f64) -> f64 {
    // a² > 1 - target
    let a = (1.0 - target).sqrt();
    let x = 0.5 * (a / (1.0 - a)).ln();
    (x + 2.0 * d as f64 * beta) / c
}

/// Bimodal threshold against an explicit target density.
pub fn h2_bound_below(beta: f64, d: usize, target: f64) -> Result<f64> {
    if beta < 0.0 || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta {beta}")));
    }
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidParameter(format!("target density {target}")));
    }
    if target >= 1.0 {
        return Ok(0.0);
    }
    Ok(invert(beta, d, 1.0, target).max(0.0))
}

/// `H_2(β)` against `p_c^s(d)` from `consts`.
pub fn h2_bound_with(consts: &CriticalConstants, beta: f64, d: usize) -> Result<f64> {
    h2_bound_below(beta, d, consts.site(d)?)
}

/// `H_2(β)` with the standard constants.
pub fn h2_bound(beta: f64, d: usize) -> Result<f64> {
    h2_bound_with(&CriticalConstants::standard(), beta, d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct H3Bound {
    pub strength: f64,
    pub delta: f64,
}

/// Cut values tried for `δ`: a geometric grid on `[1e-4, 20]` together with
/// `δ = 1`, where the bimodal law has its atom.
pub fn delta_grid() -> Vec<f64> {
    let k = 2000;
    let (lo, hi) = (1e-4f64.ln(), 20f64.ln());
    let mut g: Vec<f64> = (0..=k)
        .map(|i| (lo + (hi - lo) * i as f64 / k as f64).exp())
        .collect();
    g.push(1.0);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Least `H` over the δ grid with `P(|H_x| < δ) + 1 - a(β,H,δ)² < target`,
/// refined on a finer grid around the best coarse point.
pub fn h3_bound_below(beta: f64, d: usize, nu: &FieldDistribution, target: f64) -> Result<H3Bound> {
    if beta < 0.0 || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta {beta}")));
    }
    let atom = nu.atom_at_zero();
    if atom >= target {
        return Err(Error::Infeasible(format!(
            "field law has mass {atom} at zero, not below the site threshold {target}"
        )));
    }
    let at = |delta: f64| {
        let room = target - nu.prob_abs_below(delta);
        (room > 0.0).then(|| invert(beta, d, delta, room).max(0.0))
    };
    let grid = delta_grid();
    let mut best: Option<(usize, f64)> = None;
    for (i, &delta) in grid.iter().enumerate() {
        if let Some(h) = at(delta) {
            if best.is_none_or(|(_, b)| h < b) {
                best = Some((i, h));
            }
        }
    }
    let Some((i, h)) = best else {
        return Err(Error::Infeasible(
            "no cut δ on the grid satisfies the inequality".into(),
        ));
    };
    let mut out = H3Bound {
        strength: h,
        delta: grid[i],
    };
    let (lo, hi) = (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)]);
    for k in 0..=200 {
        let delta = lo + (hi - lo) * k as f64 / 200.0;
        if let Some(h) = at(delta) {
            if h < out.strength {
                out = H3Bound { strength: h, delta };
            }
        }
    }
    Ok(out)
}

pub fn h3_bound_with(
    consts: &CriticalConstants,
    beta: f64,
    d: usize,
    nu: &FieldDistribution,
) -> Result<H3Bound> {
    h3_bound_below(beta, d, nu, consts.site(d)?)
}

/// `H_3(β)` and its cut `δ*` with the standard constants.
pub fn h3_bound(beta: f64, d: usize, nu: &FieldDistribution) -> Result<H3Bound> {
    h3_bound_with(&CriticalConstants::standard(), beta, d, nu)
}

/// Left-hand side of the general inequality.
pub fn h3_lhs(beta: f64, strength: f64, d: usize, nu: &FieldDistribution, delta: f64) -> f64 {
    nu.prob_abs_below(delta) + domination_p(beta, strength, delta, d)
}

/// One row of the threshold table.
#[derive(Clone, Debug, Serialize)]
pub struct ThresholdRow {
    pub beta: f64,
    pub h2: f64,
    pub h3: Option<H3Bound>,
    pub d: usize,
}

pub fn threshold_table(
    consts: &CriticalConstants,
    betas: &[f64],
    d: usize,
    nu: &FieldDistribution,
) -> Result<Vec<ThresholdRow>> {
    betas
        .iter()
        .map(|&beta| {
            let h3 = match h3_bound_with(consts, beta, d, nu) {
                Ok(b) => Some(b),
                Err(Error::Infeasible(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(ThresholdRow {
                beta,
                h2: h2_bound_with(consts, beta, d)?,
                h3,
                d,
            })
        })
        .collect()
}

/// Writes `beta,H2,H3,delta_star,d`; an infeasible `H_3` is left empty.
pub fn write_threshold_csv<W: std::io::Write>(mut w: W, rows: &[ThresholdRow]) -> Result<()> {
    writeln!(w, "# schema_version=1")?;
    writeln!(w, "beta,H2,H3,delta_star,d")?;
    for r in rows {
        let (h3, ds) = match r.h3 {
            Some(b) => (format!("{:.10}", b.strength), format!("{:.10}", b.delta)),
            None => (String::new(), String::new()),
        };
        writeln!(w, "{},{:.10},{},{},{}", r.beta, r.h2, h3, ds, r.d)?;
    }
    Ok(())
}
