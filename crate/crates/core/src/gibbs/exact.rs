use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lattice::{Region, Site};

use super::{IsingSystem, SpinBoundary};

/// Default site cap for exact spin enumeration.
pub const DEFAULT_SPIN_CAP: usize = 20;

/// Hard limit on enumerated configurations regardless of the site cap.
const MAX_CONFIGS: u64 = 1 << 24;

/// A fully enumerated spin measure.
///
/// Ising codes: bit `i` set means `σ_i = +1`. Potts codes: base-`q` digit `i`
/// equal to `k` means `σ_i = k + 1`.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    n: usize,
    q: u32,
    probs: Vec<f64>,
    log_partition: f64,
}

impl ExactDistribution {
    /// Normalizes log-weights (entries may be `-inf`).
    pub fn from_log_weights(n: usize, q: u32, logw: Vec<f64>) -> Result<Self> {
        let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::Unreachable("enumerated".into()));
        }
        let mut probs: Vec<f64> = logw.iter().map(|w| (w - max).exp()).collect();
        let z: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= z);
        Ok(Self {
            n,
            q,
            probs,
            log_partition: max + z.ln(),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, code: usize) -> f64 {
        self.probs[code]
    }

    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    #[inline]
    pub fn spin(code: usize, i: usize) -> i8 {
        if code >> i & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn spins(&self, code: usize) -> Vec<i8> {
        (0..self.n).map(|i| Self::spin(code, i)).collect()
    }

    pub fn encode(sigma: &[i8]) -> usize {
        sigma
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .fold(0, |c, (i, _)| c | 1 << i)
    }

    pub fn states(&self, code: usize) -> Vec<u32> {
        let mut c = code;
        (0..self.n)
            .map(|_| {
                let d = (c % self.q as usize) as u32;
                c /= self.q as usize;
                d + 1
            })
            .collect()
    }

    pub fn expectation(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.probs.iter().enumerate().map(|(c, p)| p * f(c)).sum()
    }

    pub fn prob_of(&self, event: impl Fn(usize) -> bool) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(c, _)| event(*c))
            .map(|(_, p)| p)
            .sum()
    }

    /// `⟨σ_i⟩` (Ising codes).
    pub fn magnetization(&self, i: usize) -> f64 {
        self.expectation(|c| Self::spin(c, i) as f64)
    }

    pub fn two_point(&self, i: usize, j: usize) -> f64 {
        self.expectation(|c| (Self::spin(c, i) * Self::spin(c, j)) as f64)
    }

    pub fn truncated(&self, i: usize, j: usize) -> f64 {
        self.two_point(i, j) - self.magnetization(i) * self.magnetization(j)
    }

    /// Law of `σ_Δ` for `Δ` given by site indices; pattern bit `k` is `σ_{Δ_k} = +1`.
    pub fn marginal(&self, idx: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; 1 << idx.len()];
        for (c, p) in self.probs.iter().enumerate() {
            let pat = idx
                .iter()
                .enumerate()
                .fold(0, |a, (k, &i)| a | ((c >> i & 1) << k));
            out[pat] += p;
        }
        out
    }

    /// Total variation distance to another distribution on the same support.
    pub fn tv(&self, other: &ExactDistribution) -> f64 {
        tv(&self.probs, &other.probs)
    }
}

pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn check_cap(n: usize, q: u32, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::CapExceeded {
            what: "spin enumeration sites",
            needed: n,
            cap,
        });
    }
    let configs = (q as f64).powi(n as i32);
    if configs > MAX_CONFIGS as f64 {
        return Err(Error::CapExceeded {
            what: "spin configurations",
            needed: configs as usize,
            cap: MAX_CONFIGS as usize,
        });
    }
    Ok(())
}

/// Exact Ising measure by enumeration of all `2^|Λ|` configurations.
pub fn exact_measure(
    region: &Region,
    boundary: &SpinBoundary,
    beta: f64,
    field: &[f64],
    cap: usize,
) -> Result<ExactDistribution> {
    let n = region.len();
    check_cap(n, 2, cap)?;
    let sys = IsingSystem::new(region, boundary, beta, field)?;
    let mut sigma = vec![-1i8; n];
    let logw = (0..1usize << n)
        .map(|code| {
            for (i, s) in sigma.iter_mut().enumerate() {
                *s = ExactDistribution::spin(code, i);
            }
            sys.log_weight(&sigma)
        })
        .collect();
    ExactDistribution::from_log_weights(n, 2, logw)
}

/// Potts boundary: states in `1..=q`, 0 meaning no interaction.
#[derive(Clone, Debug, PartialEq)]
pub enum PottsBoundary {
    Uniform(u32),
    Free,
    Values(HashMap<Site, u32>),
}

impl PottsBoundary {
    pub fn value(&self, s: &Site) -> Result<u32> {
        match self {
            PottsBoundary::Uniform(k) => Ok(*k),
            PottsBoundary::Free => Ok(0),
            PottsBoundary::Values(m) => m
                .get(s)
                .copied()
                .ok_or_else(|| Error::DomainMismatch(format!("boundary has no value at {s}"))),
        }
    }
}

struct PottsSystem {
    /// internal pairs `(i, j)` with `i < j`
    pairs: Vec<(usize, usize)>,
    /// boundary states seen by each site
    ext: Vec<Vec<u32>>,
}

impl PottsSystem {
    fn new(region: &Region, boundary: &PottsBoundary) -> Result<Self> {
        let (inner, outer) = region.neighbor_table();
        let mut pairs = Vec::new();
        for (i, a) in inner.iter().enumerate() {
            pairs.extend(a.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        let ext = outer
            .iter()
            .map(|b| {
                b.iter()
                    .map(|s| boundary.value(s))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { pairs, ext })
    }

    fn log_weight(&self, sigma: &[u32], beta: f64, h: f64) -> f64 {
        let mut same = 0usize;
        for &(i, j) in &self.pairs {
            same += (sigma[i] == sigma[j]) as usize;
        }
        let mut bsame = 0usize;
        let mut ones = 0usize;
        for (i, &s) in sigma.iter().enumerate() {
            bsame += self.ext[i].iter().filter(|&&e| e == s).count();
            ones += (s == 1) as usize;
        }
        2.0 * beta * (same + bsame) as f64 + 2.0 * h * ones as f64
    }
}

/// `2β Σ δ_{σ_u,σ_v} + 2β Σ δ_{σ_u,η_v} + 2H Σ δ_{σ_u,1}`.
pub fn potts_log_weight(
    region: &Region,
    sigma: &[u32],
    boundary: &PottsBoundary,
    beta: f64,
    h: f64,
) -> Result<f64> {
    if sigma.len() != region.len() {
        return Err(Error::DomainMismatch("configuration size".into()));
    }
    Ok(PottsSystem::new(region, boundary)?.log_weight(sigma, beta, h))
}

pub fn potts_exact_measure(
    region: &Region,
    boundary: &PottsBoundary,
    beta: f64,
    h: f64,
    q: u32,
    cap: usize,
) -> Result<ExactDistribution> {
    if q < 2 {
        return Err(Error::InvalidParameter("Potts needs q >= 2".into()));
    }
    let n = region.len();
    check_cap(n, q, cap)?;
    let sys = PottsSystem::new(region, boundary)?;
    let total = (q as usize).pow(n as u32);
    let mut sigma = vec![1u32; n];
    let logw = (0..total)
        .map(|code| {
            let mut c = code;
            for s in sigma.iter_mut() {
                *s = (c % q as usize) as u32 + 1;
                c /= q as usize;
            }
            sys.log_weight(&sigma, beta, h)
        })
        .collect();
    ExactDistribution::from_log_weights(n, q, logw)
}

/// Exact TV between the `Δ`-marginals under two boundary conditions.
pub fn tv_marginal_exact(
    region: &Region,
    delta: &[Site],
    eta: &SpinBoundary,
    eta2: &SpinBoundary,
    beta: f64,
    field: &[f64],
    cap: usize,
) -> Result<f64> {
    let idx = delta
        .iter()
        .map(|s| {
            region
                .index_of(s)
                .ok_or_else(|| Error::DomainMismatch(format!("{s} not in the region")))
        })
        .collect::<Result<Vec<_>>>()?;
    if eta == eta2 {
        return Ok(0.0);
    }
    let a = exact_measure(region, eta, beta, field, cap)?.marginal(&idx);
    let b = exact_measure(region, eta2, beta, field, cap)?.marginal(&idx);
    Ok(tv(&a, &b))
}
