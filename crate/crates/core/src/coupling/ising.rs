//! Coupling of two RFIM measures with boundary spins `η`, `η'` through
//! the grand bond coupling and shared cluster coins.

use std::collections::HashMap;

use super::grand::{GrandCoupler, GrandOutcome};
use crate::cluster::{BondBoundary, RcMode, RcModel, UnionFind};
use crate::error::{Error, Result};
use crate::fields::FieldRealization;
use crate::gibbs::SpinBoundary;
use crate::lattice::{vertex_order, Ghost, Region};
use crate::rng::{hash_words, UniformStream};

const COIN_TAG: u64 = 0xc017;

/// Checks that `omega` has no open path in `Λ̄ ∪ {g+, g-}` between two
/// vertices of `∂_ex Λ ∪ {g+, g-}` carrying opposite signs (`g+` counts as
/// `+`, `g-` as `-`). Only the bonds of `omega` are used, not the links the
/// model builds from its boundary. Returns the first violating pair.
pub fn boundary_event_violation(
    model: &RcModel,
    omega: &[bool],
    eta: &SpinBoundary,
) -> Result<Option<(String, String)>> {
    if model.mode() == RcMode::Constant {
        return Err(Error::Unsupported(
            "the boundary event needs the two-ghost graph".into(),
        ));
    }
    let mut uf = UnionFind::new(model.n_vertices());
    for (e, &open) in omega.iter().enumerate() {
        if open {
            let (a, b) = model.endpoints(e);
            uf.union(a, b);
        }
    }
    let mut labelled: Vec<(usize, i8, String)> = Vec::new();
    for s in model.outer_sites() {
        let v = eta.value(s)?;
        if v != 0 {
            labelled.push((model.site_id(s).expect("outer site"), v, s.to_string()));
        }
    }
    for g in [Ghost::Plus, Ghost::Minus] {
        labelled.push((model.ghost_id(g), g.spin(), g.to_string()));
    }
    let mut seen: HashMap<usize, (i8, String)> = HashMap::new();
    for (v, sign, name) in labelled {
        let r = uf.find(v);
        match seen.get(&r) {
            Some((s, other)) if *s != sign => return Ok(Some((other.clone(), name))),
            Some(_) => {}
            None => {
                seen.insert(r, (sign, name));
            }
        }
    }
    Ok(None)
}

/// Region spins from a bond configuration of a two-ghost model: clusters
/// holding a ghost or a boundary block take the pinned sign, any other
/// cluster takes a fair coin keyed by its first site in vertex order.
pub fn es_conditional_spins(
    model: &RcModel,
    omega: &[bool],
    coins: &UniformStream,
) -> Result<Vec<i8>> {
    if model.q() != 2 {
        return Err(Error::Unsupported("spin assignment needs q = 2".into()));
    }
    let nv = model.n_vertices();
    let mut uf = UnionFind::new(nv);
    for l in model.links() {
        uf.union(l.a as usize, l.b as usize);
    }
    for (e, &open) in omega.iter().enumerate() {
        if open {
            let (a, b) = model.endpoints(e);
            uf.union(a, b);
        }
    }
    let mut pin = vec![0i8; nv];
    for &g in model.ghosts() {
        let sign = match (model.mode(), g) {
            (RcMode::Signed, Ghost::Minus) => -1,
            _ => 1,
        };
        let r = uf.find(model.ghost_id(g));
        if pin[r] == -sign {
            return Err(Error::BoundaryViolation(
                Ghost::Plus.to_string(),
                Ghost::Minus.to_string(),
            ));
        }
        pin[r] = sign;
    }
    let region = model.region();
    let mut spins = vec![0i8; region.len()];
    for s in vertex_order(region) {
        let i = region.index_of(&s).expect("region site");
        let r = uf.find(i);
        if pin[r] == 0 {
            pin[r] = if coins.uniform(s.key()) < 0.5 { 1 } else { -1 };
        }
        spins[i] = pin[r];
    }
    Ok(spins)
}

/// Coupled spin configurations and the underlying bond run.
#[derive(Clone, Debug)]
pub struct IsingBcOutcome {
    pub sigma_eta: Vec<i8>,
    pub sigma_eta2: Vec<i8>,
    /// Region sites joined to `∂_ex Λ` by open lattice edges of the wired
    /// configuration.
    pub c_plus: Vec<bool>,
    pub bonds: GrandOutcome,
}

impl IsingBcOutcome {
    /// Whether the two spin configurations differ somewhere on `idx`.
    pub fn differs_on(&self, idx: &[usize]) -> bool {
        idx.iter().any(|&i| self.sigma_eta[i] != self.sigma_eta2[i])
    }
}

pub struct IsingBcCoupler {
    grand: GrandCoupler,
    etas: [SpinBoundary; 2],
}

impl IsingBcCoupler {
    pub fn new(
        region: &Region,
        beta: f64,
        strength: f64,
        h: &FieldRealization,
        eta: &SpinBoundary,
        eta2: &SpinBoundary,
    ) -> Result<Self> {
        for e in [eta, eta2] {
            if e.materialize(region)?.iter().any(|(_, v)| *v == 0) {
                return Err(Error::InvalidParameter(
                    "boundary spins must be +1 or -1".into(),
                ));
            }
        }
        let grand = GrandCoupler::new(
            region,
            beta,
            strength,
            h,
            &BondBoundary::Spins(eta.clone()),
            &BondBoundary::Spins(eta2.clone()),
        )?;
        Ok(Self {
            grand,
            etas: [eta.clone(), eta2.clone()],
        })
    }

    pub fn region(&self) -> &Region {
        self.grand.models()[0].region()
    }

    pub fn grand(&self) -> &GrandCoupler {
        &self.grand
    }

    /// One run. Fails with [`Error::Assertion`] if a bond configuration
    /// leaves its boundary event or the spins differ off `C+`.
    pub fn run(&mut self, seed: u64) -> Result<IsingBcOutcome> {
        let bonds = self.grand.run(seed)?;
        let models = self.grand.models();
        for (k, omega) in [&bonds.omega_rho, &bonds.omega_rho2]
            .into_iter()
            .enumerate()
        {
            if let Some((a, b)) = boundary_event_violation(&models[k], omega, &self.etas[k])? {
                return Err(Error::Assertion(format!(
                    "seed {seed}: {a} and {b} joined in measure {k}"
                )));
            }
        }
        let coins = UniformStream::new(hash_words(seed, &[COIN_TAG]));
        let sigma_eta = es_conditional_spins(&models[0], &bonds.omega_rho, &coins)?;
        let sigma_eta2 = es_conditional_spins(&models[1], &bonds.omega_rho2, &coins)?;
        let c_plus = self.grand.boundary_cluster(&bonds.omega_w);
        if let Some(i) = (0..sigma_eta.len()).find(|&i| !c_plus[i] && sigma_eta[i] != sigma_eta2[i])
        {
            return Err(Error::Assertion(format!(
                "seed {seed}: spins differ at {} outside C+",
                self.region().site(i)
            )));
        }
        Ok(IsingBcOutcome {
            sigma_eta,
            sigma_eta2,
            c_plus,
            bonds,
        })
    }
}

/// Single run with a freshly built coupler.
pub fn ising_bc_coupling(
    region: &Region,
    beta: f64,
    strength: f64,
    h: &FieldRealization,
    eta: &SpinBoundary,
    eta2: &SpinBoundary,
    seed: u64,
) -> Result<IsingBcOutcome> {
    IsingBcCoupler::new(region, beta, strength, h, eta, eta2)?.run(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{effective_field, sample_field, FieldDistribution};
    use crate::gibbs::{exact_measure, ExactDistribution, DEFAULT_SPIN_CAP};
    use crate::lattice::{cube, Site};

    #[test]
    fn event_detects_opposite_ghosts() {
        let r = Region::from_sites(2, vec![Site::new(vec![0, 0])]).unwrap();
        let h = FieldRealization::from_values(&r, vec![1.0], "bimodal", 0).unwrap();
        let m =
            RcModel::two_ghost(&r, RcMode::Signed, 0.3, 0.5, &h, 2, &BondBoundary::Free).unwrap();
        let eta = SpinBoundary::from_fn(&r, |x| if x.coords()[0] < 0 { -1 } else { 1 });
        let mut omega = vec![false; m.n_edges()];
        assert_eq!(boundary_event_violation(&m, &omega, &eta).unwrap(), None);
        let west = m.edge_index(
            &crate::lattice::Edge::internal(Site::new(vec![-1, 0]), Site::new(vec![0, 0])).unwrap(),
        );
        omega[west.unwrap()] = true;
        assert_eq!(boundary_event_violation(&m, &omega, &eta).unwrap(), None);
        let g = m
            .edge_index(&crate::lattice::Edge::external(
                Site::new(vec![0, 0]),
                Ghost::Plus,
            ))
            .unwrap();
        omega[g] = true;
        let v = boundary_event_violation(&m, &omega, &eta).unwrap().unwrap();
        assert_eq!(v.0, "(-1,0)");
    }

    #[test]
    fn coupled_spins_have_the_right_laws() {
        let r = Region::rect(&[0, 0], &[1, 1]).unwrap();
        let h = sample_field(&FieldDistribution::Bimodal, &r, 8);
        let (beta, strength) = (0.35, 0.3);
        let eta = SpinBoundary::Plus;
        let eta2 = SpinBoundary::from_fn(&r, |x| if x.coords()[0] < 0 { -1 } else { 1 });
        let field = effective_field(&h, strength);
        let e1 = exact_measure(&r, &eta, beta, &field, DEFAULT_SPIN_CAP).unwrap();
        let e2 = exact_measure(&r, &eta2, beta, &field, DEFAULT_SPIN_CAP).unwrap();
        let mut c = IsingBcCoupler::new(&r, beta, strength, &h, &eta, &eta2).unwrap();
        let runs = 60_000;
        let (mut a, mut b) = (vec![0.0; 16], vec![0.0; 16]);
        for seed in 0..runs {
            let out = c.run(seed).unwrap();
            a[ExactDistribution::encode(&out.sigma_eta)] += 1.0 / runs as f64;
            b[ExactDistribution::encode(&out.sigma_eta2)] += 1.0 / runs as f64;
        }
        assert!(crate::cluster::tv(&a, e1.probs()) < 0.02);
        assert!(crate::cluster::tv(&b, e2.probs()) < 0.02);
    }

    #[test]
    fn agreement_off_the_boundary_cluster() {
        let r = cube(1, 2).unwrap();
        let h = sample_field(&FieldDistribution::Gaussian, &r, 2);
        let mut c =
            IsingBcCoupler::new(&r, 0.25, 0.5, &h, &SpinBoundary::Plus, &SpinBoundary::Minus)
                .unwrap();
        let mut differed = 0;
        for seed in 0..300 {
            let out = c.run(seed).unwrap();
            differed += out.differs_on(&[r.index_of(&Site::origin(2)).unwrap()]) as usize;
        }
        assert!(differed > 0);
    }
}
