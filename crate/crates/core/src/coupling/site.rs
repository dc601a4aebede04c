//! Site exploration coupling of two RFIM measures with boundary spins
//! `η`, `η'`, driven by one uniform per site.
//!
//! The exploration follows the disagreement set `V_t` outward from the
//! boundary sites where `η ≠ η'`. At the stopping time every site adjacent
//! to `V_τ` has been revealed and agrees, so it separates the rest of the
//! box from the disagreement and both measures see the same conditionals.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use rand::RngCore;

use super::{domination_p, CouplingTrace, TraceStep};
use crate::error::{Error, Result};
use crate::fields::{effective_field, FieldRealization};
use crate::gibbs::{
    exact_measure, ExactDistribution, HeatBath, IsingSystem, SpinBoundary, SweepOrder,
};
use crate::lattice::{vertex_order, Region, Site};
use crate::rng::{chain_rng, hash_words, UniformStream};
use crate::stats::{Estimate, Welford};

/// How the conditional probabilities `P(σ_x = +1 | σ_W)` are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConditionalMode {
    /// Summed from the full `2^|Λ|` table.
    Exact { cap: usize },
    /// Rao-Blackwellized heat-bath average on the unexplored component of
    /// `x`, both measures using the same random stream.
    HeatBath { burn_in: usize, samples: usize },
}

#[derive(Clone, Debug)]
pub struct SiteOutcome {
    pub sigma_eta: Vec<i8>,
    pub sigma_eta2: Vec<i8>,
    /// Region sites in `V_τ`.
    pub v_tau: Vec<bool>,
    pub trace: CouplingTrace,
}

impl SiteOutcome {
    pub fn differs_on(&self, idx: &[usize]) -> bool {
        idx.iter().any(|&i| self.sigma_eta[i] != self.sigma_eta2[i])
    }

    /// `V_τ ∩ Λ ≠ ∅`.
    pub fn explored_inside(&self) -> bool {
        self.v_tau.iter().any(|&v| v)
    }
}

enum Conditional {
    Exact([ExactDistribution; 2]),
    HeatBath { burn_in: usize, samples: usize },
}

pub struct SiteCoupler {
    region: Region,
    beta: f64,
    field: Vec<f64>,
    etas: [HashMap<Site, i8>; 2],
    order: Vec<usize>,
    inner: Vec<Vec<usize>>,
    outer: Vec<Vec<Site>>,
    labels: Arc<Vec<String>>,
    cond: Conditional,
}

impl SiteCoupler {
    /// With `strict`, a zero field value anywhere in the region is an error:
    /// the domination bound only holds where the field has a sign.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        region: &Region,
        beta: f64,
        strength: f64,
        h: &FieldRealization,
        eta: &SpinBoundary,
        eta2: &SpinBoundary,
        mode: ConditionalMode,
        strict: bool,
    ) -> Result<Self> {
        if h.region() != region {
            return Err(Error::DomainMismatch("field and region differ".into()));
        }
        if strict {
            if let Some(i) = h.values().iter().position(|&v| v == 0.0) {
                return Err(Error::ZeroField(region.site(i).to_string()));
            }
        }
        let mut etas = [HashMap::new(), HashMap::new()];
        for (k, e) in [eta, eta2].into_iter().enumerate() {
            for (s, v) in e.materialize(region)? {
                if v == 0 {
                    return Err(Error::InvalidParameter(format!("boundary spin 0 at {s}")));
                }
                etas[k].insert(s, v);
            }
        }
        let field = effective_field(h, strength);
        let cond = match mode {
            ConditionalMode::Exact { cap } => Conditional::Exact([
                exact_measure(region, eta, beta, &field, cap)?,
                exact_measure(region, eta2, beta, &field, cap)?,
            ]),
            ConditionalMode::HeatBath { burn_in, samples } => {
                if samples == 0 {
                    return Err(Error::InvalidParameter(
                        "heat-bath estimate needs samples".into(),
                    ));
                }
                Conditional::HeatBath { burn_in, samples }
            }
        };
        let (inner, outer) = region.neighbor_table();
        Ok(Self {
            order: vertex_order(region)
                .iter()
                .map(|s| region.index_of(s).expect("region site"))
                .collect(),
            labels: Arc::new(region.sites().iter().map(|s| s.to_string()).collect()),
            region: region.clone(),
            beta,
            field,
            etas,
            inner,
            outer,
            cond,
        })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// One run. Fails with [`Error::Assertion`] if a site adjacent to `V_τ`
    /// or a site revealed after `τ` differs.
    pub fn run(&self, seed: u64) -> Result<SiteOutcome> {
        let n = self.region.len();
        let stream = UniformStream::new(seed);
        let mut known = vec![false; n];
        let mut sigma = [vec![0i8; n], vec![0i8; n]];
        let mut in_v = vec![false; n];
        let boundary_open = |s: &Site| self.etas[0][s] != self.etas[1][s];
        let adjacent = |i: usize, in_v: &[bool]| {
            self.inner[i].iter().any(|&j| in_v[j]) || self.outer[i].iter().any(boundary_open)
        };
        let mut trace = CouplingTrace::new("site_exploration", seed, self.labels.clone());
        trace.approximate = matches!(self.cond, Conditional::HeatBath { .. });
        while let Some(x) = self
            .order
            .iter()
            .copied()
            .find(|&x| !known[x] && adjacent(x, &in_v))
        {
            let step = self.reveal(x, &stream, &mut known, &mut sigma, true)?;
            in_v[x] = step.values[0] != step.values[1];
            if in_v[x] {
                trace.explored.push(x);
            }
            trace.steps.push(step);
        }
        trace.tau = trace.steps.len();
        for x in 0..n {
            if in_v[x] {
                continue;
            }
            let boundary_of_v = self.inner[x].iter().any(|&j| in_v[j]);
            if boundary_of_v && sigma[0][x] != sigma[1][x] {
                return Err(Error::Assertion(format!(
                    "seed {seed}: {} borders V_tau but differs",
                    self.region.site(x)
                )));
            }
        }
        for &x in &self.order {
            if known[x] {
                continue;
            }
            let step = self.reveal(x, &stream, &mut known, &mut sigma, false)?;
            if step.values[0] != step.values[1] {
                return Err(Error::Assertion(format!(
                    "seed {seed}: post-tau disagreement at {}",
                    self.region.site(x)
                )));
            }
            trace.steps.push(step);
        }
        let [sigma_eta, sigma_eta2] = sigma;
        Ok(SiteOutcome {
            sigma_eta,
            sigma_eta2,
            v_tau: in_v,
            trace,
        })
    }

    fn reveal(
        &self,
        x: usize,
        stream: &UniformStream,
        known: &mut [bool],
        sigma: &mut [Vec<i8>; 2],
        before: bool,
    ) -> Result<TraceStep> {
        let key = self.region.site(x).key();
        let u = stream.uniform(key);
        let mut probs = Vec::with_capacity(2);
        let mut values = Vec::with_capacity(2);
        for k in 0..2 {
            let p = self.p_plus(k, x, known, &sigma[k], hash_words(stream.seed(), &[key]))?;
            let v = if u <= p { 1 } else { -1 };
            probs.push(p);
            values.push(v);
        }
        for k in 0..2 {
            sigma[k][x] = values[k];
        }
        known[x] = true;
        Ok(TraceStep {
            element: x,
            key,
            uniform: u,
            probs,
            values,
            before_tau: before,
        })
    }

    fn p_plus(&self, k: usize, x: usize, known: &[bool], sigma: &[i8], seed: u64) -> Result<f64> {
        match &self.cond {
            Conditional::Exact(tables) => {
                let (mut mask, mut vals) = (0usize, 0usize);
                for i in (0..known.len()).filter(|&i| known[i]) {
                    mask |= 1 << i;
                    if sigma[i] == 1 {
                        vals |= 1 << i;
                    }
                }
                let (mut tot, mut plus) = (0.0, 0.0);
                for (code, &p) in tables[k].probs().iter().enumerate() {
                    if code & mask == vals {
                        tot += p;
                        if code >> x & 1 == 1 {
                            plus += p;
                        }
                    }
                }
                if tot <= 0.0 {
                    return Err(Error::Unreachable(format!("eta{}", k + 1)));
                }
                Ok(plus / tot)
            }
            Conditional::HeatBath { burn_in, samples } => {
                self.heat_bath_p_plus(k, x, known, sigma, *burn_in, *samples, seed)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn heat_bath_p_plus(
        &self,
        k: usize,
        x: usize,
        known: &[bool],
        sigma: &[i8],
        burn_in: usize,
        samples: usize,
        seed: u64,
    ) -> Result<f64> {
        // unexplored component of x
        let mut comp = vec![x];
        let mut seen = vec![false; known.len()];
        seen[x] = true;
        let mut queue = VecDeque::from([x]);
        while let Some(i) = queue.pop_front() {
            for &j in &self.inner[i] {
                if !known[j] && !seen[j] {
                    seen[j] = true;
                    comp.push(j);
                    queue.push_back(j);
                }
            }
        }
        comp.sort_unstable();
        let sub = Region::from_sites(
            self.region.dim(),
            comp.iter().map(|&i| self.region.site(i).clone()),
        )?;
        let boundary = SpinBoundary::from_fn(&sub, |s| match self.region.index_of(s) {
            Some(i) => sigma[i],
            None => self.etas[k][s],
        });
        let field: Vec<f64> = sub
            .sites()
            .iter()
            .map(|s| self.field[self.region.index_of(s).expect("region site")])
            .collect();
        let sys = IsingSystem::new(&sub, &boundary, self.beta, &field)?;
        let xi = sub.index_of(self.region.site(x)).expect("x in component");
        let mut chain = HeatBath::new(sys, vec![1; sub.len()], seed, SweepOrder::Raster)?;
        for _ in 0..burn_in {
            chain.sweep();
        }
        let mut acc = Welford::new();
        for _ in 0..samples {
            chain.sweep();
            acc.push(0.5 * (1.0 + chain.conditional_mean(xi)));
        }
        Ok(acc.mean())
    }
}

/// Single run with a freshly built coupler.
#[allow(clippy::too_many_arguments)]
pub fn site_exploration_coupling(
    region: &Region,
    beta: f64,
    strength: f64,
    h: &FieldRealization,
    eta: &SpinBoundary,
    eta2: &SpinBoundary,
    mode: ConditionalMode,
    seed: u64,
) -> Result<SiteOutcome> {
    SiteCoupler::new(region, beta, strength, h, eta, eta2, mode, true)?.run(seed)
}

/// `P(∂_ex Δ ↔ ∂_ex Λ)` in the independent site percolation with
/// `p_x = 1 - a²(β, H, |h_x|)` on `Λ` and boundary sites open iff
/// `η ≠ η'`: some open site of `∂_ex Δ ∩ Λ̄` is joined by open sites to an
/// open site of `∂_ex Λ`.
///
/// Exact by enumeration for at most `exact_up_to` region sites, otherwise a
/// Monte Carlo estimate from `samples` draws.
#[allow(clippy::too_many_arguments)]
pub fn site_connectivity_bound(
    region: &Region,
    delta: &[Site],
    beta: f64,
    strength: f64,
    h: &FieldRealization,
    eta: &SpinBoundary,
    eta2: &SpinBoundary,
    exact_up_to: usize,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    let n = region.len();
    let d = region.dim();
    let p: Vec<f64> = h
        .values()
        .iter()
        .map(|v| domination_p(beta, strength, v.abs(), d))
        .collect();
    let e1 = eta.materialize(region)?;
    let e2 = eta2.materialize(region)?;
    let bopen: HashMap<Site, bool> = e1
        .iter()
        .zip(&e2)
        .map(|((s, a), (_, b))| (s.clone(), a != b))
        .collect();
    let sub = Region::from_sites(d, delta.iter().cloned())?;
    let mut targets_in = vec![false; n];
    let mut target_outer = false;
    for s in sub.exterior_boundary() {
        match region.index_of(&s) {
            Some(i) => targets_in[i] = true,
            None => target_outer |= bopen.get(&s).copied().unwrap_or(false),
        }
    }
    if target_outer {
        return Ok(Estimate::exact(1.0));
    }
    let (inner, outer) = region.neighbor_table();
    let seeds: Vec<bool> = (0..n).map(|i| outer[i].iter().any(|s| bopen[s])).collect();
    // open sites reachable from the open boundary
    let reaches = |open: &dyn Fn(usize) -> bool| -> bool {
        let mut seen = vec![false; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| seeds[i] && open(i)).collect();
        queue.iter().for_each(|&i| seen[i] = true);
        while let Some(i) = queue.pop_front() {
            if targets_in[i] {
                return true;
            }
            for &j in &inner[i] {
                if !seen[j] && open(j) {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        false
    };
    if n <= exact_up_to {
        if n >= usize::BITS as usize - 1 {
            return Err(Error::CapExceeded {
                what: "site configurations",
                needed: n,
                cap: exact_up_to,
            });
        }
        let mut total = 0.0;
        for mask in 0usize..1 << n {
            let w: f64 = (0..n)
                .map(|i| if mask >> i & 1 == 1 { p[i] } else { 1.0 - p[i] })
                .product();
            if w > 0.0 && reaches(&|i| mask >> i & 1 == 1) {
                total += w;
            }
        }
        return Ok(Estimate::exact(total));
    }
    if samples == 0 {
        return Err(Error::InvalidParameter(
            "no samples for the connectivity estimate".into(),
        ));
    }
    let mut rng = chain_rng(hash_words(seed, &[0xb0d]));
    let mut acc = Welford::new();
    let mut open = vec![false; n];
    for _ in 0..samples {
        for (o, &px) in open.iter_mut().zip(&p) {
            *o = crate::rng::unit_f64(rng.next_u64()) < px;
        }
        acc.push(reaches(&|i| open[i]) as u8 as f64);
    }
    Ok(acc.estimate())
}
