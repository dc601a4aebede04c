//! Exponential decay fits: weighted least squares of `ln p` against `r`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayPoint {
    pub r: f64,
    pub p: f64,
    pub stderr: f64,
}

impl DecayPoint {
    pub fn new(r: f64, p: f64, stderr: f64) -> Self {
        Self { r, p, stderr }
    }
}

/// `p(r) ≈ exp(log_prefactor - rate·r)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub log_prefactor: f64,
    pub r_squared: f64,
    /// Smallest and largest distance used.
    pub window: (f64, f64),
    pub used: Vec<DecayPoint>,
    /// Points dropped because `p ≤ 2·stderr`.
    pub excluded: Vec<DecayPoint>,
}

/// Fits `ln p = c - rate·r` with weights `(p / stderr)²`, the inverse
/// variance of `ln p` to first order. Points with `p ≤ 2·stderr` are
/// dropped and listed in the result; if every error is zero the fit is
/// unweighted, and a zero error among nonzero ones gets the largest weight
/// present.
pub fn decay_fit(points: &[DecayPoint]) -> Result<DecayFit> {
    let (used, excluded): (Vec<DecayPoint>, Vec<DecayPoint>) = points
        .iter()
        .partition(|q| q.p > 0.0 && q.p > 2.0 * q.stderr && q.r.is_finite());
    if used.len() < 3 {
        return Err(Error::TooFewPoints { usable: used.len() });
    }
    let raw: Vec<Option<f64>> = used
        .iter()
        .map(|q| (q.stderr > 0.0).then(|| (q.p / q.stderr).powi(2)))
        .collect();
    let wmax = raw.iter().flatten().copied().fold(0.0, f64::max);
    let w: Vec<f64> = raw
        .iter()
        .map(|x| match x {
            Some(v) => *v,
            None if wmax > 0.0 => wmax,
            None => 1.0,
        })
        .collect();
    let x: Vec<f64> = used.iter().map(|q| q.r).collect();
    let y: Vec<f64> = used.iter().map(|q| q.p.ln()).collect();
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w.iter().zip(&y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&x).map(|(w, x)| w * (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidParameter(
            "fit needs at least two distinct distances".into(),
        ));
    }
    let sxy: f64 = (0..x.len()).map(|i| w[i] * (x[i] - mx) * (y[i] - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = (0..x.len())
        .map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2))
        .sum();
    let ss_tot: f64 = (0..x.len()).map(|i| w[i] * (y[i] - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let window = (
        x.iter().copied().fold(f64::INFINITY, f64::min),
        x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    Ok(DecayFit {
        rate: -slope,
        log_prefactor: intercept,
        r_squared,
        window,
        used,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::Chain1d;
    use proptest::prelude::*;

    fn pts(f: impl Fn(f64) -> f64, rs: &[f64]) -> Vec<DecayPoint> {
        rs.iter().map(|&r| DecayPoint::new(r, f(r), 0.0)).collect()
    }

    #[test]
    fn synthetic_inputs() {
        let fit = decay_fit(&pts(|r| (-0.5 * r).exp(), &[2.0, 4.0, 8.0, 16.0])).unwrap();
        assert!((fit.rate - 0.5).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let flat = decay_fit(&pts(|_| 0.3, &[2.0, 4.0, 8.0, 16.0])).unwrap();
        assert!(flat.rate.abs() < 1e-9);
    }

    #[test]
    fn noisy_points_are_excluded() {
        let mut p = pts(|r| (-0.3 * r).exp(), &[1.0, 2.0, 3.0]);
        p.push(DecayPoint::new(40.0, 1e-4, 1e-3));
        let fit = decay_fit(&p).unwrap();
        assert_eq!(fit.excluded.len(), 1);
        assert_eq!(fit.window, (1.0, 3.0));
        p.truncate(2);
        p.push(DecayPoint::new(5.0, 0.0, 0.0));
        assert!(matches!(
            decay_fit(&p),
            Err(Error::TooFewPoints { usable: 2 })
        ));
        let zeros: Vec<_> = (1..6)
            .map(|r| DecayPoint::new(r as f64, 0.0, 0.0))
            .collect();
        assert!(matches!(
            decay_fit(&zeros),
            Err(Error::TooFewPoints { usable: 0 })
        ));
    }

    #[test]
    fn one_dimensional_ising_rate() {
        // zero-field chain: <σ_0 σ_r> = tanh(β)^r far from the ends
        let beta = 0.3;
        let chain = Chain1d::new(beta, &[0.0; 200], 0.0, 0.0).unwrap();
        let p: Vec<DecayPoint> = [2usize, 4, 6, 8, 10]
            .iter()
            .map(|&r| DecayPoint::new(r as f64, chain.truncated(95, 95 + r), 0.0))
            .collect();
        let fit = decay_fit(&p).unwrap();
        let exact = -beta.tanh().ln();
        assert!(
            (fit.rate - exact).abs() < 0.05 * exact,
            "{} vs {exact}",
            fit.rate
        );
    }

    proptest! {
        #[test]
        fn recovers_exact_rates(rate in 0.01f64..3.0, c in -3.0f64..1.0) {
            let fit = decay_fit(&pts(|r| (c - rate * r).exp(), &[1.0, 3.0, 4.0, 9.0])).unwrap();
            prop_assert!(((fit.rate - rate) / rate).abs() < 1e-6);
            prop_assert!((fit.log_prefactor - c).abs() < 1e-6);
        }
    }
}
