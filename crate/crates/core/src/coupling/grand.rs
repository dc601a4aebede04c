//! Grand coupling of two signed random cluster measures with boundaries
//! `ρ`, `ρ'` and the wired `|h|` measure, by exploring the boundary open
//! cluster of the wired configuration.

use std::sync::Arc;

use super::{CouplingTrace, TraceStep};
use crate::cluster::{
    BondBoundary, BondConfig, RcMode, RcModel, SpinSumEngine, DEFAULT_ENGINE_CAP,
};
use crate::error::{Error, Result};
use crate::fields::FieldRealization;
use crate::lattice::{Edge, Region, Site};
use crate::rng::UniformStream;

/// When the exploration phase ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopRule {
    /// Stop once no unexplored closure edge touches `E_t ∪ 𝓑(Λ^C)`; ghost
    /// edges of explored sites may then be left for the second phase.
    ClosureOnly,
    /// Stop once no unexplored edge of any kind touches `E_t ∪ 𝓑(Λ^C)`.
    /// The second phase then only sees edges cut off from the boundary
    /// cluster, which is what makes the two signed measures agree there.
    AllAdjacent,
}

/// The three coupled configurations and the reveal log.
#[derive(Clone, Debug)]
pub struct GrandOutcome {
    pub omega_rho: BondConfig,
    pub omega_rho2: BondConfig,
    pub omega_w: BondConfig,
    pub trace: CouplingTrace,
}

/// Reusable coupler: models and conditional engines are built once and
/// reset for every run.
pub struct GrandCoupler {
    models: [RcModel; 3],
    engines: [SpinSumEngine; 3],
    labels: Arc<Vec<String>>,
    keys: Vec<u64>,
    closure: Vec<bool>,
    lattice_ends: Vec<(usize, Option<usize>)>,
    n_region: usize,
    n_lattice: usize,
    stop: StopRule,
}

impl GrandCoupler {
    pub fn new(
        region: &Region,
        beta: f64,
        strength: f64,
        h: &FieldRealization,
        rho: &BondBoundary,
        rho2: &BondBoundary,
    ) -> Result<Self> {
        let m_rho = RcModel::two_ghost(region, RcMode::Signed, beta, strength, h, 2, rho)?;
        let m_rho2 = RcModel::two_ghost(region, RcMode::Signed, beta, strength, h, 2, rho2)?;
        let m_w = RcModel::two_ghost(
            region,
            RcMode::Abs,
            beta,
            strength,
            h,
            2,
            &BondBoundary::Wired,
        )?;
        Self::from_models([m_rho, m_rho2, m_w])
    }

    /// Any three models on the same edge list; the third plays the role of
    /// the dominating wired measure.
    pub fn from_models(models: [RcModel; 3]) -> Result<Self> {
        if models[1].edges() != models[0].edges() || models[2].edges() != models[0].edges() {
            return Err(Error::DomainMismatch(
                "coupled models have different edge sets".into(),
            ));
        }
        let names = ["rho", "rho'", "wired"];
        let engines = [
            SpinSumEngine::new(&models[0], names[0], DEFAULT_ENGINE_CAP)?,
            SpinSumEngine::new(&models[1], names[1], DEFAULT_ENGINE_CAP)?,
            SpinSumEngine::new(&models[2], names[2], DEFAULT_ENGINE_CAP)?,
        ];
        let m = &models[0];
        let n_region = m.region().len();
        let n_lattice = n_region + m.outer_sites().len();
        let lattice_ends = (0..m.n_edges())
            .map(|e| {
                let (a, b) = m.endpoints(e);
                (a, (b < n_lattice).then_some(b))
            })
            .collect();
        Ok(Self {
            labels: Arc::new(m.edges().iter().map(|e| e.to_string()).collect()),
            keys: m.edges().iter().map(Edge::key).collect(),
            closure: m.edges().iter().map(Edge::is_internal).collect(),
            lattice_ends,
            n_region,
            n_lattice,
            models,
            engines,
            stop: StopRule::AllAdjacent,
        })
    }

    pub fn with_stop_rule(mut self, stop: StopRule) -> Self {
        self.stop = stop;
        self
    }

    pub fn models(&self) -> &[RcModel; 3] {
        &self.models
    }

    pub fn labels(&self) -> &Arc<Vec<String>> {
        &self.labels
    }

    /// One coupled run. Fails with [`Error::Assertion`] if monotonicity
    /// before `τ` or agreement after `τ` is violated.
    pub fn run(&mut self, seed: u64) -> Result<GrandOutcome> {
        let m = self.keys.len();
        let stream = UniformStream::new(seed);
        for eng in self.engines.iter_mut() {
            eng.reset();
        }
        let mut revealed = vec![false; m];
        let mut omega = [vec![false; m], vec![false; m], vec![false; m]];
        // lattice vertices touching E_t ∪ 𝓑(Λ^C): exterior sites from the start
        let mut touched = vec![false; self.n_lattice];
        touched[self.n_region..].iter_mut().for_each(|t| *t = true);
        let mut trace = CouplingTrace::new("grand_rc", seed, self.labels.clone());
        let ends = self.lattice_ends.clone();
        let closure = self.closure.clone();
        let stop = self.stop;
        let adjacent = |e: usize, touched: &[bool]| {
            let (a, b) = ends[e];
            touched[a] || b.is_some_and(|b| touched[b])
        };
        loop {
            let stop_scope = |e: usize| match stop {
                StopRule::ClosureOnly => closure[e],
                StopRule::AllAdjacent => true,
            };
            if !(0..m).any(|e| !revealed[e] && stop_scope(e) && adjacent(e, &touched)) {
                break;
            }
            let e = (0..m)
                .find(|&e| !revealed[e] && adjacent(e, &touched))
                .expect("an adjacent edge exists");
            let step = self.reveal(e, &stream, &mut omega, true)?;
            revealed[e] = true;
            for k in 0..2 {
                if step.values[k] > step.values[2] {
                    return Err(Error::Assertion(format!(
                        "seed {seed}: monotonicity fails on {} (measure {k} open, wired closed)",
                        self.labels[e]
                    )));
                }
            }
            if self.closure[e] && step.values[2] == 1 {
                let (a, b) = self.lattice_ends[e];
                touched[a] = true;
                if let Some(b) = b {
                    touched[b] = true;
                }
                trace.explored.push(e);
            }
            trace.steps.push(step);
        }
        trace.tau = trace.steps.len();
        for e in 0..m {
            if revealed[e] {
                continue;
            }
            let step = self.reveal(e, &stream, &mut omega, false)?;
            if step.values[0] != step.values[1] {
                return Err(Error::Assertion(format!(
                    "seed {seed}: post-tau disagreement on {}",
                    self.labels[e]
                )));
            }
            trace.steps.push(step);
        }
        let [omega_rho, omega_rho2, omega_w] = omega;
        Ok(GrandOutcome {
            omega_rho,
            omega_rho2,
            omega_w,
            trace,
        })
    }

    fn reveal(
        &mut self,
        e: usize,
        stream: &UniformStream,
        omega: &mut [Vec<bool>; 3],
        before: bool,
    ) -> Result<TraceStep> {
        let u = stream.uniform(self.keys[e]);
        let mut probs = Vec::with_capacity(3);
        let mut values = Vec::with_capacity(3);
        for k in 0..3 {
            let p = self.engines[k].prob_open(e)?;
            let open = u <= p && p > 0.0;
            self.engines[k].reveal(e, open)?;
            omega[k][e] = open;
            probs.push(p);
            values.push(open as i8);
        }
        Ok(TraceStep {
            element: e,
            key: self.keys[e],
            uniform: u,
            probs,
            values,
            before_tau: before,
        })
    }

    /// Disagreement percolation: if the two signed configurations differ on
    /// an edge with an endpoint in `delta`, then `∂_in Δ` is joined to
    /// `∂_ex Λ` by open lattice edges of the wired configuration.
    pub fn check_disagreement(&self, out: &GrandOutcome, delta: &[Site]) -> Result<bool> {
        let m = &self.models[0];
        let ids: Vec<usize> = delta
            .iter()
            .map(|s| {
                m.region()
                    .index_of(s)
                    .ok_or_else(|| Error::DomainMismatch(format!("{s} is not in the region")))
            })
            .collect::<Result<_>>()?;
        let mut in_delta = vec![false; self.n_region];
        ids.iter().for_each(|&i| in_delta[i] = true);
        let differs = (0..self.keys.len()).any(|e| {
            let (a, b) = self.lattice_ends[e];
            let touches = in_delta[a] || b.is_some_and(|b| b < self.n_region && in_delta[b]);
            touches && out.omega_rho[e] != out.omega_rho2[e]
        });
        if !differs {
            return Ok(false);
        }
        let sub = Region::from_sites(m.region().dim(), delta.iter().cloned())?;
        let inner: Vec<usize> = sub
            .interior_boundary()
            .iter()
            .map(|s| m.region().index_of(s).expect("inside"))
            .collect();
        if !self.lattice_reaches_boundary(&out.omega_w, &inner) {
            return Err(Error::Assertion(format!(
                "seed {}: configurations differ near Δ but ∂_in Δ is cut from ∂_ex Λ in the wired configuration",
                out.trace.seed
            )));
        }
        Ok(true)
    }

    /// Region sites joined to `∂_ex Λ` by open lattice edges of `omega`.
    pub fn boundary_cluster(&self, omega: &[bool]) -> Vec<bool> {
        let mut uf = crate::cluster::UnionFind::new(self.n_lattice + 1);
        let sink = self.n_lattice;
        for v in self.n_region..self.n_lattice {
            uf.union(v, sink);
        }
        for (e, &open) in omega.iter().enumerate() {
            if let (true, (a, Some(b))) = (open, self.lattice_ends[e]) {
                uf.union(a, b);
            }
        }
        (0..self.n_region).map(|i| uf.same(i, sink)).collect()
    }

    fn lattice_reaches_boundary(&self, omega: &[bool], from: &[usize]) -> bool {
        let c = self.boundary_cluster(omega);
        from.iter().any(|&i| c[i])
    }
}

/// Single run with freshly built engines.
#[allow(clippy::too_many_arguments)]
pub fn grand_rc_coupling(
    region: &Region,
    beta: f64,
    strength: f64,
    h: &FieldRealization,
    rho: &BondBoundary,
    rho2: &BondBoundary,
    seed: u64,
) -> Result<GrandOutcome> {
    GrandCoupler::new(region, beta, strength, h, rho, rho2)?.run(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{exact_rc_measure, mask_from_config, tv, DEFAULT_EDGE_CAP};
    use crate::fields::{sample_field, FieldDistribution};
    use crate::gibbs::SpinBoundary;
    use crate::lattice::{cube, Ghost};

    fn s(c: &[i32]) -> Site {
        Site::new(c.to_vec())
    }

    #[test]
    fn equal_boundaries_agree() {
        let r = cube(1, 2).unwrap();
        let h = sample_field(&FieldDistribution::Bimodal, &r, 4);
        let eta = SpinBoundary::from_fn(&r, |x| if x.coords()[0] > 0 { 1 } else { -1 });
        let b = BondBoundary::Spins(eta);
        let mut c = GrandCoupler::new(&r, 0.4, 0.3, &h, &b, &b).unwrap();
        for seed in 0..200 {
            let out = c.run(seed).unwrap();
            assert_eq!(out.omega_rho, out.omega_rho2);
        }
    }

    #[test]
    fn trace_replays_identically() {
        let r = cube(1, 2).unwrap();
        let h = sample_field(&FieldDistribution::Bimodal, &r, 5);
        let b = BondBoundary::Spins(SpinBoundary::Plus);
        let mut c = GrandCoupler::new(&r, 0.4, 0.3, &h, &b, &BondBoundary::Free).unwrap();
        let mut a = Vec::new();
        let mut bb = Vec::new();
        c.run(77).unwrap().trace.write_jsonl(&mut a).unwrap();
        c.run(77).unwrap().trace.write_jsonl(&mut bb).unwrap();
        assert_eq!(a, bb);
        assert_eq!(
            String::from_utf8(a).unwrap().lines().count(),
            c.models()[0].n_edges() + 1
        );
    }

    #[test]
    fn marginals_match_enumeration() {
        // two sites in d = 1: 3 closure edges and 2 ghost edges
        let r = Region::from_sites(1, vec![s(&[0]), s(&[1])]).unwrap();
        let h = FieldRealization::from_values(&r, vec![1.0, -1.0], "bimodal", 0).unwrap();
        let rho = BondBoundary::Custom(vec![
            Edge::External(s(&[-1]), Ghost::Minus),
            Edge::External(s(&[2]), Ghost::Minus),
        ]);
        let rho2 = BondBoundary::Spins(SpinBoundary::Plus);
        let mut c = GrandCoupler::new(&r, 0.5, 0.4, &h, &rho, &rho2).unwrap();
        let m = c.models()[0].n_edges();
        let exact: Vec<_> = c
            .models()
            .iter()
            .map(|x| exact_rc_measure(x, DEFAULT_EDGE_CAP).unwrap())
            .collect();
        let runs = 100_000;
        let mut counts = vec![vec![0.0; 1 << m]; 3];
        for seed in 0..runs {
            let out = c.run(seed).unwrap();
            for (k, w) in [&out.omega_rho, &out.omega_rho2, &out.omega_w]
                .iter()
                .enumerate()
            {
                counts[k][mask_from_config(w) as usize] += 1.0 / runs as f64;
            }
        }
        for k in 0..3 {
            let d = tv(&counts[k], exact[k].probs());
            assert!(d < 0.02, "measure {k}: tv {d}");
        }
    }

    #[test]
    fn unattached_exterior_site_breaks_domination() {
        // With the cluster count restricted to clusters meeting Λ, an exterior
        // site left alone by ρ makes its edge an independent Bernoulli(p1)
        // edge, while the wired measure penalises it.
        let r = Region::from_sites(1, vec![s(&[0]), s(&[1])]).unwrap();
        let h = FieldRealization::from_values(&r, vec![1.0, -1.0], "bimodal", 0).unwrap();
        let free =
            RcModel::two_ghost(&r, RcMode::Signed, 0.5, 0.4, &h, 2, &BondBoundary::Free).unwrap();
        let wired =
            RcModel::two_ghost(&r, RcMode::Abs, 0.5, 0.4, &h, 2, &BondBoundary::Wired).unwrap();
        let e = free
            .edge_index(&Edge::internal(s(&[1]), s(&[2])).unwrap())
            .unwrap();
        let pf = exact_rc_measure(&free, DEFAULT_EDGE_CAP)
            .unwrap()
            .edge_marginal(e);
        let pw = exact_rc_measure(&wired, DEFAULT_EDGE_CAP)
            .unwrap()
            .edge_marginal(e);
        assert!((pf - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!(pf > pw + 0.04, "{pf} vs {pw}");
        let mut c =
            GrandCoupler::new(&r, 0.5, 0.4, &h, &BondBoundary::Free, &BondBoundary::Free).unwrap();
        let failed = (0..2000)
            .filter(|&seed| matches!(c.run(seed), Err(Error::Assertion(_))))
            .count();
        assert!(failed > 0);
    }

    #[test]
    fn closure_only_stop_leaves_ghost_edges_to_disagree() {
        let r = cube(1, 2).unwrap();
        let h = sample_field(&FieldDistribution::Bimodal, &r, 0);
        let eta2 = SpinBoundary::from_fn(&r, |x| if x.coords()[0] < 0 { -1 } else { 1 });
        let (rho, rho2) = (
            BondBoundary::Spins(SpinBoundary::Plus),
            BondBoundary::Spins(eta2),
        );
        let mut verbatim = GrandCoupler::new(&r, 0.3, 0.3, &h, &rho, &rho2)
            .unwrap()
            .with_stop_rule(StopRule::ClosureOnly);
        let err = (0..100)
            .find_map(|seed| verbatim.run(seed).err())
            .expect("a failing run");
        assert!(err.to_string().contains("post-tau disagreement"), "{err}");
        let mut full = GrandCoupler::new(&r, 0.3, 0.3, &h, &rho, &rho2).unwrap();
        for seed in 0..500 {
            let out = full.run(seed).unwrap();
            full.check_disagreement(&out, &[Site::origin(2)]).unwrap();
        }
    }
}
