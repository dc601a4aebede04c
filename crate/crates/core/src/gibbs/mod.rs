//! Spin measures: the quenched Ising measure with boundary condition and
//! site-dependent field, the Potts measure with constant field on state 1,
//! exact enumeration on tiny boxes and heat-bath dynamics on large ones.
//!
//! Spin configurations are `Vec<i8>` aligned with the region's site order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Region, Site};

mod dynamics;
mod exact;
mod influence;
mod transfer;

pub use dynamics::{
    empirical, sample_observables, tv_marginal_sampled, write_observables_csv, CoupledHeatBath,
    HeatBath, ObservableRow, SampledObservables, SweepOrder,
};
pub use exact::{
    exact_measure, potts_exact_measure, potts_log_weight, tv_marginal_exact, ExactDistribution,
    PottsBoundary, DEFAULT_SPIN_CAP,
};
pub use influence::{
    boundary_influence, clamp_influence, nested_radii, InfluencePlan, InfluenceReport,
    InfluenceResult, LevelBudget,
};
pub use transfer::Chain1d;

pub type SpinConfig = Vec<i8>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    /// Field strength `H`.
    pub field: f64,
    pub q: u32,
    pub d: usize,
}

impl ModelParams {
    pub fn ising(beta: f64, field: f64, d: usize) -> Self {
        Self {
            beta,
            field,
            q: 2,
            d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidParameter(format!("beta = {}", self.beta)));
        }
        if !(self.field.is_finite() && self.field >= 0.0) {
            return Err(Error::InvalidParameter(format!("H = {}", self.field)));
        }
        if self.q < 1 {
            return Err(Error::InvalidParameter("q must be >= 1".into()));
        }
        if self.d == 0 {
            return Err(Error::InvalidParameter("d must be >= 1".into()));
        }
        Ok(())
    }
}

/// Ising boundary condition on `∂_ex Λ`.
///
/// `Free` contributes nothing; explicit values may also be 0 for the same
/// effect on individual sites.
#[derive(Clone, Debug, PartialEq)]
pub enum SpinBoundary {
    Plus,
    Minus,
    Free,
    Values(HashMap<Site, i8>),
}

impl SpinBoundary {
    pub fn value(&self, s: &Site) -> Result<i8> {
        match self {
            SpinBoundary::Plus => Ok(1),
            SpinBoundary::Minus => Ok(-1),
            SpinBoundary::Free => Ok(0),
            SpinBoundary::Values(m) => m
                .get(s)
                .copied()
                .ok_or_else(|| Error::DomainMismatch(format!("boundary has no value at {s}"))),
        }
    }

    /// Explicit boundary built site by site over `∂_ex Λ`.
    pub fn from_fn(region: &Region, mut f: impl FnMut(&Site) -> i8) -> Self {
        SpinBoundary::Values(
            region
                .exterior_boundary()
                .iter()
                .map(|s| (s.clone(), f(s)))
                .collect(),
        )
    }

    /// Global spin flip.
    pub fn flipped(&self) -> Self {
        match self {
            SpinBoundary::Plus => SpinBoundary::Minus,
            SpinBoundary::Minus => SpinBoundary::Plus,
            SpinBoundary::Free => SpinBoundary::Free,
            SpinBoundary::Values(m) => {
                SpinBoundary::Values(m.iter().map(|(k, v)| (k.clone(), -v)).collect())
            }
        }
    }

    /// Values on the exterior boundary, in its sorted order.
    pub fn materialize(&self, region: &Region) -> Result<Vec<(Site, i8)>> {
        region
            .exterior_boundary()
            .into_iter()
            .map(|s| {
                let v = self.value(&s)?;
                Ok((s, v))
            })
            .collect()
    }
}

/// Ising system on a region: neighbor lists, boundary sums and field.
#[derive(Clone, Debug)]
pub struct IsingSystem {
    n: usize,
    offsets: Vec<u32>,
    nbrs: Vec<u32>,
    /// `Σ η_v` over exterior neighbors of each site.
    bsum: Vec<f64>,
    beta: f64,
    field: Vec<f64>,
}

impl IsingSystem {
    pub fn new(region: &Region, boundary: &SpinBoundary, beta: f64, field: &[f64]) -> Result<Self> {
        if field.len() != region.len() {
            return Err(Error::DomainMismatch(format!(
                "field has {} values for {} sites",
                field.len(),
                region.len()
            )));
        }
        let (inner, outer) = region.neighbor_table();
        let mut offsets = Vec::with_capacity(region.len() + 1);
        let mut nbrs = Vec::new();
        let mut bsum = Vec::with_capacity(region.len());
        offsets.push(0);
        for (a, b) in inner.iter().zip(&outer) {
            nbrs.extend(a.iter().map(|&j| j as u32));
            offsets.push(nbrs.len() as u32);
            let mut s = 0.0;
            for site in b {
                s += boundary.value(site)? as f64;
            }
            bsum.push(s);
        }
        Ok(Self {
            n: region.len(),
            offsets,
            nbrs,
            bsum,
            beta,
            field: field.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn field(&self) -> &[f64] {
        &self.field
    }

    pub fn boundary_sum(&self, i: usize) -> f64 {
        self.bsum[i]
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.nbrs[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    /// `β m_x + 𝓗_x` with `m_x = Σ_{y∼x} (ση)_y`.
    #[inline]
    pub fn local_field(&self, sigma: &[i8], i: usize) -> f64 {
        let m: i32 = self
            .neighbors(i)
            .iter()
            .map(|&j| sigma[j as usize] as i32)
            .sum();
        self.beta * (m as f64 + self.bsum[i]) + self.field[i]
    }

    /// Conditional probability of `σ_x = +1` given all other spins.
    #[inline]
    pub fn p_plus(&self, sigma: &[i8], i: usize) -> f64 {
        logistic(2.0 * self.local_field(sigma, i))
    }

    /// Heat-bath update: `σ_x = +1` iff `u < P(+ | rest)`.
    pub fn heat_bath_step(&self, sigma: &mut [i8], i: usize, u: f64) -> i8 {
        sigma[i] = if u < self.p_plus(sigma, i) { 1 } else { -1 };
        sigma[i]
    }

    /// Unnormalized log-weight.
    pub fn log_weight(&self, sigma: &[i8]) -> f64 {
        let mut pair = 0.0;
        let mut rest = 0.0;
        for i in 0..self.n {
            let si = sigma[i] as f64;
            for &j in self.neighbors(i) {
                if (j as usize) > i {
                    pair += si * sigma[j as usize] as f64;
                }
            }
            rest += self.beta * si * self.bsum[i] + self.field[i] * si;
        }
        self.beta * pair + rest
    }
}

#[inline]
pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `β Σ σ_uσ_v + β Σ σ_u η_v + Σ 𝓗_u σ_u`.
pub fn ising_log_weight(
    region: &Region,
    sigma: &[i8],
    boundary: &SpinBoundary,
    beta: f64,
    field: &[f64],
) -> Result<f64> {
    if sigma.len() != region.len() {
        return Err(Error::DomainMismatch(format!(
            "configuration has {} spins for {} sites",
            sigma.len(),
            region.len()
        )));
    }
    Ok(IsingSystem::new(region, boundary, beta, field)?.log_weight(sigma))
}
