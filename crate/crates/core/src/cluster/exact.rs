//! Exact random cluster measures by enumeration of all bond configurations.

use rayon::prelude::*;

use super::{config_from_mask, RcModel};
use crate::error::{Error, Result};

pub const DEFAULT_EDGE_CAP: usize = 24;

/// Normalized law on `{0,1}^m`; configuration `mask` has edge `i` open iff
/// bit `i` is set, edges indexed as in the model.
#[derive(Clone, Debug)]
pub struct BondDistribution {
    m: usize,
    probs: Vec<f64>,
    log_partition: f64,
}

impl BondDistribution {
    pub fn from_log_weights(m: usize, logw: &[f64]) -> Result<Self> {
        let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Err(Error::Unreachable(
                "every configuration has weight zero".into(),
            ));
        }
        let mut probs: Vec<f64> = logw.iter().map(|&w| (w - top).exp()).collect();
        let z: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= z);
        Ok(Self {
            m,
            probs,
            log_partition: top + z.ln(),
        })
    }

    pub fn n_edges(&self) -> usize {
        self.m
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, mask: u64) -> f64 {
        self.probs[mask as usize]
    }

    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// Probability of an event given as a predicate on masks.
    pub fn prob_of(&self, mut event: impl FnMut(u64) -> bool) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(mask, _)| event(*mask as u64))
            .map(|(_, p)| p)
            .sum()
    }

    pub fn edge_marginal(&self, e: usize) -> f64 {
        self.prob_of(|mask| mask >> e & 1 == 1)
    }

    /// Law of the edges `idx`; pattern bit `k` is edge `idx[k]`.
    pub fn marginal_on(&self, idx: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; 1 << idx.len()];
        for (mask, p) in self.probs.iter().enumerate() {
            let mut pat = 0;
            for (k, &e) in idx.iter().enumerate() {
                pat |= (mask >> e & 1) << k;
            }
            out[pat] += p;
        }
        out
    }

    /// Conditional law given an event of positive probability.
    pub fn conditioned(&self, mut event: impl FnMut(u64) -> bool) -> Result<BondDistribution> {
        let logw: Vec<f64> = self
            .probs
            .iter()
            .enumerate()
            .map(|(mask, &p)| {
                if event(mask as u64) {
                    p.ln()
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        BondDistribution::from_log_weights(self.m, &logw)
    }
}

/// Total variation distance between two laws on the same finite set.
pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Enumerates all `2^m` bond configurations of the model.
pub fn exact_rc_measure(model: &RcModel, cap: usize) -> Result<BondDistribution> {
    let m = model.n_edges();
    if m > cap {
        return Err(Error::CapExceeded {
            what: "bond configurations",
            needed: m,
            cap,
        });
    }
    let logw: Vec<f64> = (0..1u64 << m)
        .into_par_iter()
        .map(|mask| {
            model
                .log_weight(&config_from_mask(mask, m))
                .expect("domain checked")
        })
        .collect();
    BondDistribution::from_log_weights(m, &logw)
}
