//! Edwards–Sokal alternation: bonds given spins, spins given bonds.

use rand::RngCore;

use super::{RcMode, RcModel, UnionFind};
use crate::error::{Error, Result};
use crate::rng::{chain_rng, threshold, ChainRng};

/// Joint spin/bond chain for a `q = 2` model.
///
/// Ghosts and boundary blocks holding a ghost have pinned spins (`g+` and
/// the single ghost `+1`, `g-` `-1`). Exterior sites the boundary leaves
/// unattached carry a spin of their own that is resampled with its cluster;
/// with one edge into the region such a site does not change the law of the
/// region spins.
#[derive(Clone, Debug)]
pub struct EsChain {
    model: RcModel,
    n: usize,
    pinned: Vec<i8>,
    spins: Vec<i8>,
    bonds: Vec<bool>,
    thresholds: Vec<u64>,
    uf: UnionFind,
    root_spin: Vec<i8>,
    rng: ChainRng,
}

impl EsChain {
    /// Starts from all spins `+1` on free vertices.
    pub fn new(model: &RcModel, seed: u64) -> Result<Self> {
        if model.q() != 2 {
            return Err(Error::Unsupported(
                "the alternation supports q = 2 only".into(),
            ));
        }
        let nv = model.n_vertices();
        let mut uf = UnionFind::new(nv);
        for l in model.links() {
            uf.union(l.a as usize, l.b as usize);
        }
        let ghost_ids: Vec<usize> = model.ghosts().iter().map(|g| model.ghost_id(*g)).collect();
        if model.mode() == RcMode::Abs {
            uf.union(ghost_ids[0], ghost_ids[1]);
        }
        let mut root_pin = vec![0i8; nv];
        for (k, &g) in ghost_ids.iter().enumerate() {
            let s = if model.mode() == RcMode::Signed && k == 1 {
                -1
            } else {
                1
            };
            let r = uf.find(g);
            if root_pin[r] == -s {
                return Err(Error::Unreachable("boundary joins g+ and g-".into()));
            }
            root_pin[r] = s;
        }
        let pinned: Vec<i8> = (0..nv).map(|v| root_pin[uf.find(v)]).collect();
        let spins = pinned.iter().map(|&p| if p == 0 { 1 } else { p }).collect();
        Ok(Self {
            model: model.clone(),
            n: model.region().len(),
            pinned,
            spins,
            bonds: vec![false; model.n_edges()],
            thresholds: model.edge_params().iter().map(|&p| threshold(p)).collect(),
            uf,
            root_spin: vec![0; nv],
            rng: chain_rng(seed),
        })
    }

    pub fn model(&self) -> &RcModel {
        &self.model
    }

    /// Region spins, in region order.
    pub fn spins(&self) -> &[i8] {
        &self.spins[..self.n]
    }

    pub fn bonds(&self) -> &[bool] {
        &self.bonds
    }

    /// Replaces the region spins.
    pub fn set_spins(&mut self, sigma: &[i8]) -> Result<()> {
        if sigma.len() != self.n {
            return Err(Error::DomainMismatch(format!(
                "{} spins for {} sites",
                sigma.len(),
                self.n
            )));
        }
        self.spins[..self.n].copy_from_slice(sigma);
        Ok(())
    }

    /// Bonds given spins: an edge with agreeing endpoints opens with its
    /// parameter, any other edge closes.
    pub fn resample_bonds(&mut self) {
        for e in 0..self.bonds.len() {
            let (a, b) = self.model.endpoints(e);
            self.bonds[e] =
                self.spins[a] == self.spins[b] && self.rng.next_u64() < self.thresholds[e];
        }
    }

    /// Spins given bonds: pinned clusters keep their pin, every other
    /// cluster takes a fair coin.
    pub fn resample_spins(&mut self) {
        self.uf.reset();
        for l in self.model.links() {
            self.uf.union(l.a as usize, l.b as usize);
        }
        if self.model.mode() == RcMode::Abs {
            let g: Vec<usize> = self
                .model
                .ghosts()
                .iter()
                .map(|g| self.model.ghost_id(*g))
                .collect();
            self.uf.union(g[0], g[1]);
        }
        for e in 0..self.bonds.len() {
            if self.bonds[e] {
                let (a, b) = self.model.endpoints(e);
                self.uf.union(a, b);
            }
        }
        self.root_spin.iter_mut().for_each(|s| *s = 0);
        for v in 0..self.pinned.len() {
            if self.pinned[v] != 0 {
                let r = self.uf.find(v);
                self.root_spin[r] = self.pinned[v];
            }
        }
        for v in 0..self.spins.len() {
            let r = self.uf.find(v);
            if self.root_spin[r] == 0 {
                self.root_spin[r] = if self.rng.next_u64() >> 63 == 1 {
                    1
                } else {
                    -1
                };
            }
            self.spins[v] = self.root_spin[r];
        }
    }

    /// One alternation: bonds, then spins.
    pub fn step(&mut self) {
        self.resample_bonds();
        self.resample_spins();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::BondBoundary;
    use crate::fields::{sample_field, FieldDistribution};
    use crate::gibbs::{
        empirical, exact_measure, ExactDistribution, SpinBoundary, DEFAULT_SPIN_CAP,
    };
    use crate::lattice::{cube, Region, Site};

    #[test]
    fn infinite_temperature_is_coin_flips() {
        let r = cube(1, 2).unwrap();
        let m = RcModel::constant(&r, 0.0, 0.0, 2, &BondBoundary::Wired).unwrap();
        let mut chain = EsChain::new(&m, 3).unwrap();
        let mut plus = 0usize;
        let steps = 4000;
        for _ in 0..steps {
            chain.step();
            assert!(chain.bonds().iter().all(|&b| !b));
            plus += chain.spins().iter().filter(|&&s| s == 1).count();
        }
        let frac = plus as f64 / (steps * 9) as f64;
        assert!((frac - 0.5).abs() < 0.01);
    }

    #[test]
    fn two_by_two_matches_exact() {
        let r = Region::rect(&[0, 0], &[1, 1]).unwrap();
        let h = sample_field(&FieldDistribution::Bimodal, &r, 17);
        let eta = SpinBoundary::from_fn(&r, |x: &Site| if x.coords()[1] < 0 { -1 } else { 1 });
        let (beta, strength) = (0.3, 0.2);
        let m = RcModel::two_ghost(
            &r,
            RcMode::Signed,
            beta,
            strength,
            &h,
            2,
            &BondBoundary::Spins(eta.clone()),
        )
        .unwrap();
        let field: Vec<f64> = h.values().iter().map(|v| v * strength).collect();
        let exact = exact_measure(&r, &eta, beta, &field, DEFAULT_SPIN_CAP).unwrap();
        let mut chain = EsChain::new(&m, 99).unwrap();
        for _ in 0..100 {
            chain.step();
        }
        // 10^5 recorded states, thinned to cut the autocorrelation
        let samples = 100_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..samples {
            for _ in 0..5 {
                chain.step();
            }
            *counts
                .entry(ExactDistribution::encode(chain.spins()))
                .or_insert(0) += 1;
        }
        let emp = empirical(&counts, 16);
        for (c, (a, b)) in emp.iter().zip(exact.probs()).enumerate() {
            assert!((a - b).abs() < 5e-3, "config {c}: {a} vs {b}");
        }
    }
}
