//! Exact invariant checks on a suite of tiny graphs.
//!
//! Every check compares two exactly enumerated quantities and reports the
//! slack `bound - value`; a check passes when the slack is at least
//! `-1e-12`.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::cluster::{
    config_from_mask, domination_gap, exact_rc_measure, tv, BondBoundary, Node, RcMode, RcModel,
    Restriction,
};
use crate::coupling::{boundary_event_violation, site_connectivity_bound};
use crate::error::{Error, Result};
use crate::fields::{effective_field, sample_field, FieldDistribution, FieldRealization};
use crate::gibbs::{exact_measure, ExactDistribution, SpinBoundary};
use crate::lattice::{Edge, Ghost, Region, Site};
use crate::rng::{chain_rng, derive_seed};

pub const TOLERANCE: f64 = 1e-12;

/// Largest edge count for which every increasing event is checked.
pub const DOMINATION_EDGES: usize = 12;

/// One measured inequality `value <= bound`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub check: String,
    pub instance: String,
    pub draw: usize,
    pub value: f64,
    pub bound: f64,
    pub slack: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(check: &str, instance: &str, draw: usize, value: f64, bound: f64) -> Self {
        let slack = bound - value;
        Self {
            check: check.to_string(),
            instance: instance.to_string(),
            draw,
            value,
            bound,
            slack,
            passed: slack >= -TOLERANCE,
        }
    }

    /// An equality, reported as `|difference| <= 0`.
    pub fn equal(check: &str, instance: &str, draw: usize, diff: f64) -> Self {
        Self::new(check, instance, draw, diff.abs(), 0.0)
    }
}

/// A named tiny graph.
#[derive(Clone, Debug)]
pub struct Instance {
    pub label: String,
    pub region: Region,
}

impl Instance {
    /// `n` is a chain `{0..n-1}` in `d = 1`, `AxB` a rectangle in `d = 2`.
    pub fn parse(label: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad instance {label:?}"));
        let region = match label.split_once('x') {
            Some((a, b)) => {
                let a: i32 = a.parse().map_err(|_| bad())?;
                let b: i32 = b.parse().map_err(|_| bad())?;
                if a < 1 || b < 1 {
                    return Err(bad());
                }
                Region::rect(&[0, 0], &[a - 1, b - 1])?
            }
            None => {
                let n: i32 = label.parse().map_err(|_| bad())?;
                if n < 1 {
                    return Err(bad());
                }
                Region::from_sites(1, (0..n).map(|k| Site::new(vec![k])))?
            }
        };
        Ok(Self {
            label: label.to_string(),
            region,
        })
    }

    /// Closure edges plus one ghost edge per site.
    pub fn n_edges(&self) -> usize {
        let n = self.region.len();
        let (inner, _) = self.region.neighbor_table();
        let internal: usize = inner.iter().map(Vec::len).sum::<usize>() / 2;
        2 * self.region.dim() * n - internal + n
    }

    /// Binary variables of the joint spin-bond enumeration.
    pub fn joint_bits(&self) -> usize {
        self.region.len() + self.n_edges()
    }

    /// Middle site of the region, the `Δ` of the mixing checks.
    pub fn center(&self) -> Site {
        self.region.site(self.region.len() / 2).clone()
    }
}

/// Parameters of one random draw.
#[derive(Clone, Debug)]
pub struct Draw {
    pub beta: f64,
    pub strength: f64,
    pub h: FieldRealization,
    /// Two random boundaries with values in `{-1, +1}`.
    pub etas: [SpinBoundary; 2],
}

impl Draw {
    /// `β ∈ [0.05, 1]`, `H ∈ [0.05, 1.5]`, Gaussian field.
    pub fn sample(inst: &Instance, k: usize, master: u64) -> Self {
        let mut rng = chain_rng(derive_seed(
            master,
            &format!("oracle/{}/draw={k}", inst.label),
        ));
        let beta = rng.gen_range(0.05..1.0);
        let strength = rng.gen_range(0.05..1.5);
        let h = sample_field(&FieldDistribution::Gaussian, &inst.region, rng.gen());
        let mut eta =
            || SpinBoundary::from_fn(&inst.region, |_| if rng.gen::<bool>() { 1 } else { -1 });
        let etas = [eta(), eta()];
        Self {
            beta,
            strength,
            h,
            etas,
        }
    }
}

/// Spin or bond value fixed by the boundary, or a free spin.
#[derive(Clone, Copy)]
enum Val {
    Spin(usize),
    Fixed(i8),
}

/// Spin and bond marginals of the joint measure, built by summing the
/// product weight over every `(σ, ω)` pair allowed by the boundary event.
/// The edge probabilities are recomputed here from `β`, `H` and `h`.
/// `corrupt` scales the open weight of lattice edges as a negative control.
fn joint_marginals(
    model: &RcModel,
    eta: &SpinBoundary,
    h: &FieldRealization,
    corrupt: bool,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let region = model.region();
    let n = region.len();
    let m = model.n_edges();
    let (beta, strength) = (model.beta(), model.strength());
    let mut ghosts: HashMap<usize, Ghost> = HashMap::new();
    for &g in model.ghosts() {
        ghosts.insert(model.ghost_id(g), g);
    }
    let val = |id: usize| -> Result<Val> {
        if let Some(g) = ghosts.get(&id) {
            return Ok(Val::Fixed(g.spin()));
        }
        let s = model
            .vertex_site(id)
            .ok_or_else(|| Error::DomainMismatch(format!("vertex {id}")))?;
        Ok(match region.index_of(s) {
            Some(i) => Val::Spin(i),
            None => Val::Fixed(eta.value(s)?),
        })
    };
    let mut ends = Vec::with_capacity(m);
    let mut p = Vec::with_capacity(m);
    for (e, edge) in model.edges().iter().enumerate() {
        let (a, b) = model.endpoints(e);
        ends.push((val(a)?, val(b)?));
        p.push(match edge {
            Edge::Internal(..) => {
                let q = 1.0 - (-2.0 * beta).exp();
                if corrupt {
                    (q * 1.001).min(1.0)
                } else {
                    q
                }
            }
            Edge::External(s, _) => 1.0 - (-2.0 * strength * h.value(s).unwrap_or(0.0).abs()).exp(),
        });
    }
    let weight: Vec<f64> = (0..1u64 << m)
        .map(|mask| {
            (0..m)
                .map(|e| if mask >> e & 1 == 1 { p[e] } else { 1.0 - p[e] })
                .product()
        })
        .collect();
    let mut spins = vec![0.0; 1 << n];
    let mut bonds = vec![0.0; 1 << m];
    let mut sigma = vec![0i8; n];
    for (code, spin_mass) in spins.iter_mut().enumerate() {
        for (i, s) in sigma.iter_mut().enumerate() {
            *s = ExactDistribution::spin(code, i);
        }
        let spin = |v: Val| match v {
            Val::Spin(i) => sigma[i],
            Val::Fixed(x) => x,
        };
        let mut allowed = 0u64;
        for (e, &(a, b)) in ends.iter().enumerate() {
            if spin(a) == spin(b) {
                allowed |= 1 << e;
            }
        }
        for (mask, &w) in weight.iter().enumerate() {
            if mask as u64 & !allowed == 0 {
                *spin_mass += w;
                bonds[mask] += w;
            }
        }
    }
    let z: f64 = spins.iter().sum();
    spins.iter_mut().for_each(|x| *x /= z);
    bonds.iter_mut().for_each(|x| *x /= z);
    Ok((spins, bonds))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Joint measure against the spin measure, the signed random cluster
/// measure with the spin boundary, and the wired absolute-field measure
/// conditioned on the boundary event.
pub fn es_consistency(
    inst: &Instance,
    draw: &Draw,
    k: usize,
    corrupt: bool,
    cap: usize,
) -> Result<Vec<Check>> {
    let r = &inst.region;
    let mut out = Vec::new();
    for (j, eta) in draw.etas.iter().enumerate() {
        let bc = BondBoundary::Spins(eta.clone());
        let signed =
            RcModel::two_ghost(r, RcMode::Signed, draw.beta, draw.strength, &draw.h, 2, &bc)?;
        let abs = RcModel::two_ghost(r, RcMode::Abs, draw.beta, draw.strength, &draw.h, 2, &bc)?;
        if signed.edges() != abs.edges() {
            return Err(Error::DomainMismatch(
                "signed and absolute graphs differ".into(),
            ));
        }
        let m = signed.n_edges();
        let (spins, bonds) = joint_marginals(&signed, eta, &draw.h, corrupt)?;
        let field = effective_field(&draw.h, draw.strength);
        let ising = exact_measure(r, eta, draw.beta, &field, cap)?;
        let rc = exact_rc_measure(&signed, cap)?;
        let cond = exact_rc_measure(&abs, cap)?.conditioned(|mask| {
            boundary_event_violation(&abs, &config_from_mask(mask, m), eta)
                .expect("two-ghost model")
                .is_none()
        })?;
        let tag = format!("{}/eta{j}", inst.label);
        out.push(Check::equal(
            "es-spin-marginal",
            &tag,
            k,
            max_diff(&spins, ising.probs()),
        ));
        out.push(Check::equal(
            "es-bond-marginal",
            &tag,
            k,
            max_diff(&bonds, rc.probs()),
        ));
        out.push(Check::equal(
            "es-bond-conditioned",
            &tag,
            k,
            max_diff(&bonds, cond.probs()),
        ));
    }
    Ok(out)
}

/// Boundaries for the bond checks: free, all plus, the two random spin
/// boundaries and a random partial attachment to the ghosts.
fn bond_boundaries(
    inst: &Instance,
    draw: &Draw,
    k: usize,
    master: u64,
) -> Vec<(String, BondBoundary)> {
    let mut rng = chain_rng(derive_seed(
        master,
        &format!("oracle/{}/rho={k}", inst.label),
    ));
    let custom = inst
        .region
        .exterior_boundary()
        .into_iter()
        .filter_map(|s| match rng.gen_range(0..3) {
            0 => Some(Edge::external(s, Ghost::Plus)),
            1 => Some(Edge::external(s, Ghost::Minus)),
            _ => None,
        })
        .collect();
    vec![
        ("free".into(), BondBoundary::Free),
        ("plus".into(), BondBoundary::Spins(SpinBoundary::Plus)),
        ("eta0".into(), BondBoundary::Spins(draw.etas[0].clone())),
        ("eta1".into(), BondBoundary::Spins(draw.etas[1].clone())),
        ("custom".into(), BondBoundary::Custom(custom)),
    ]
}

/// Signed measure below the absolute-field measure with the same boundary,
/// and the spin-boundary measure below the wired absolute-field measure, on
/// every increasing event.
pub fn domination(
    inst: &Instance,
    draw: &Draw,
    k: usize,
    master: u64,
    cap: usize,
) -> Result<Vec<Check>> {
    let r = &inst.region;
    let (b, h) = (draw.beta, draw.strength);
    let mut out = Vec::new();
    for (name, bc) in bond_boundaries(inst, draw, k, master) {
        let signed = RcModel::two_ghost(r, RcMode::Signed, b, h, &draw.h, 2, &bc)?;
        let abs = RcModel::two_ghost(r, RcMode::Abs, b, h, &draw.h, 2, &bc)?;
        let m = signed.n_edges();
        let mu = exact_rc_measure(&signed, cap)?;
        let nu = exact_rc_measure(&abs, cap)?;
        let gap = domination_gap(mu.probs(), nu.probs(), m)?;
        out.push(Check::new(
            "signed-below-abs",
            &format!("{}/{name}", inst.label),
            k,
            gap,
            0.0,
        ));
    }
    let wired = RcModel::two_ghost(r, RcMode::Abs, b, h, &draw.h, 2, &BondBoundary::Wired)?;
    let nu = exact_rc_measure(&wired, cap)?;
    let spins = [
        ("plus", SpinBoundary::Plus),
        ("minus", SpinBoundary::Minus),
        ("eta0", draw.etas[0].clone()),
        ("eta1", draw.etas[1].clone()),
    ];
    for (name, eta) in spins {
        let signed = RcModel::two_ghost(
            r,
            RcMode::Signed,
            b,
            h,
            &draw.h,
            2,
            &BondBoundary::Spins(eta),
        )?;
        let mu = exact_rc_measure(&signed, cap)?;
        let gap = domination_gap(mu.probs(), nu.probs(), signed.n_edges())?;
        out.push(Check::new(
            "spin-boundary-below-wired",
            &format!("{}/{name}", inst.label),
            k,
            gap,
            0.0,
        ));
    }
    Ok(out)
}

/// `P^{|h|}_w(∂_in Δ ↔ ∂_ex Λ)` through lattice edges, `Δ` the center site.
fn wired_connectivity(inst: &Instance, draw: &Draw, cap: usize) -> Result<f64> {
    let r = &inst.region;
    let wired = RcModel::two_ghost(
        r,
        RcMode::Abs,
        draw.beta,
        draw.strength,
        &draw.h,
        2,
        &BondBoundary::Wired,
    )?;
    let m = wired.n_edges();
    let a = [Node::Site(inst.center())];
    let b: Vec<Node> = wired
        .outer_sites()
        .iter()
        .cloned()
        .map(Node::Site)
        .collect();
    let dist = exact_rc_measure(&wired, cap)?;
    let mut err = None;
    let p = dist.prob_of(|mask| {
        wired
            .connected_sets(&config_from_mask(mask, m), &a, &b, Restriction::Lattice)
            .unwrap_or_else(|e| {
                err.get_or_insert(e);
                false
            })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(p),
    }
}

/// All spin boundaries when there are at most `2^8`, otherwise plus, minus
/// and 62 random ones.
fn spin_boundaries(inst: &Instance, k: usize, master: u64) -> Vec<SpinBoundary> {
    let outer = inst.region.exterior_boundary();
    if outer.len() <= 8 {
        return (0..1u32 << outer.len())
            .map(|bits| {
                let values = outer
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (s.clone(), if bits >> i & 1 == 1 { 1 } else { -1 }))
                    .collect();
                SpinBoundary::Values(values)
            })
            .collect();
    }
    let mut rng = chain_rng(derive_seed(
        master,
        &format!("oracle/{}/etas={k}", inst.label),
    ));
    let mut v = vec![SpinBoundary::Plus, SpinBoundary::Minus];
    v.extend(
        (0..62).map(|_| {
            SpinBoundary::from_fn(&inst.region, |_| if rng.gen::<bool>() { 1 } else { -1 })
        }),
    );
    v
}

/// Total variation bounds at the center site: bond marginals under two
/// ghost-attached boundaries and spin marginals under two spin boundaries
/// against the wired connectivity, and spin marginals against the site
/// percolation connectivity for the same pair.
pub fn tv_bounds(
    inst: &Instance,
    draw: &Draw,
    k: usize,
    master: u64,
    cap: usize,
) -> Result<Vec<Check>> {
    let r = &inst.region;
    let (b, h) = (draw.beta, draw.strength);
    let x = inst.center();
    let bound = wired_connectivity(inst, draw, cap)?;
    let mut out = Vec::new();

    // bond marginals on the closure edges of Δ and its ghost edge
    let rhos = [
        SpinBoundary::Plus,
        SpinBoundary::Minus,
        draw.etas[0].clone(),
        draw.etas[1].clone(),
    ];
    let mut laws = Vec::new();
    for eta in &rhos {
        let model = RcModel::two_ghost(
            r,
            RcMode::Signed,
            b,
            h,
            &draw.h,
            2,
            &BondBoundary::Spins(eta.clone()),
        )?;
        let idx: Vec<usize> = model
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.lattice_endpoints().contains(&&x))
            .map(|(i, _)| i)
            .collect();
        laws.push(exact_rc_measure(&model, cap)?.marginal_on(&idx));
    }
    let mut worst = 0.0f64;
    for i in 0..laws.len() {
        for j in i + 1..laws.len() {
            worst = worst.max(tv(&laws[i], &laws[j]));
        }
    }
    out.push(Check::new(
        "bond-tv-below-wired-connectivity",
        &inst.label,
        k,
        worst,
        bound,
    ));

    let field = effective_field(&draw.h, h);
    let xi = r.index_of(&x).expect("center is in the region");
    let etas = spin_boundaries(inst, k, master);
    let plus: Vec<f64> = etas
        .iter()
        .map(|eta| Ok(exact_measure(r, eta, b, &field, cap)?.marginal(&[xi])[1]))
        .collect::<Result<_>>()?;
    let hi = plus.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = plus.iter().cloned().fold(f64::INFINITY, f64::min);
    out.push(Check::new(
        "spin-tv-below-wired-connectivity",
        &inst.label,
        k,
        hi - lo,
        bound,
    ));

    // pair-specific site percolation bound; pairs limited to keep it cheap
    let pairs: Vec<(usize, usize)> = if etas.len() <= 16 {
        (0..etas.len())
            .flat_map(|i| (i + 1..etas.len()).map(move |j| (i, j)))
            .collect()
    } else {
        let mut rng = chain_rng(derive_seed(
            master,
            &format!("oracle/{}/pairs={k}", inst.label),
        ));
        (0..32)
            .map(|_| (rng.gen_range(0..etas.len()), rng.gen_range(0..etas.len())))
            .collect()
    };
    let mut worst: Option<(f64, f64)> = None;
    for (i, j) in pairs {
        let t = (plus[i] - plus[j]).abs();
        let bnd = site_connectivity_bound(
            r,
            &[x.clone()],
            b,
            h,
            &draw.h,
            &etas[i],
            &etas[j],
            cap,
            0,
            0,
        )?
        .value;
        if worst.is_none_or(|(wt, wb)| bnd - t < wb - wt) {
            worst = Some((t, bnd));
        }
    }
    if let Some((t, bnd)) = worst {
        out.push(Check::new(
            "spin-tv-below-site-connectivity",
            &inst.label,
            k,
            t,
            bnd,
        ));
    }
    Ok(out)
}

/// Covariance of the first and last site written through joint and
/// single-site probabilities, and each term bounded by the worst-case
/// boundary influence on a one-site box around the first site.
pub fn covariance_identity(
    inst: &Instance,
    draw: &Draw,
    k: usize,
    cap: usize,
) -> Result<Vec<Check>> {
    let r = &inst.region;
    let n = r.len();
    if n < 2 {
        return Ok(vec![]);
    }
    let field = effective_field(&draw.h, draw.strength);
    let dist = exact_measure(r, &draw.etas[0], draw.beta, &field, cap)?;
    let (xi, yi) = (0, n - 1);
    let joint = dist.marginal(&[xi, yi]);
    let px = [joint[0] + joint[2], joint[1] + joint[3]];
    let py = [joint[0] + joint[1], joint[2] + joint[3]];
    let cov = dist.truncated(xi, yi);
    let rhs = joint[3] + joint[0] - joint[1] - joint[2] - (px[1] - px[0]) * (py[1] - py[0]);
    let mut out = vec![Check::equal(
        "covariance-identity",
        &inst.label,
        k,
        cov - rhs,
    )];

    // worst-case boundary influence on the one-site box {x}
    let x = r.site(xi).clone();
    let single = Region::from_sites(r.dim(), [x.clone()])?;
    let fx = [field[xi]];
    let outer = single.exterior_boundary();
    let mut plus_probs = Vec::new();
    for bits in 0..1u32 << outer.len() {
        let values = outer
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), if bits >> i & 1 == 1 { 1 } else { -1 }))
            .collect();
        plus_probs.push(
            exact_measure(&single, &SpinBoundary::Values(values), draw.beta, &fx, cap)?.prob(1),
        );
    }
    let sup = plus_probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - plus_probs.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut worst_term = 0.0f64;
    let mut worst_cond = 0.0f64;
    for s1 in 0..2 {
        for s2 in 0..2 {
            let pj = joint[s1 | s2 << 1];
            worst_term = worst_term.max((pj - px[s1] * py[s2]).abs());
            worst_cond = worst_cond.max((pj / py[s2] - px[s1]).abs());
        }
    }
    out.push(Check::new(
        "covariance-term-below-conditional",
        &inst.label,
        k,
        worst_term,
        worst_cond,
    ));
    out.push(Check::new(
        "conditional-below-boundary-influence",
        &inst.label,
        k,
        worst_cond,
        sup,
    ));
    Ok(out)
}

/// Which families [`run_suite`] runs.
#[derive(Clone, Copy, Debug)]
pub struct SuiteParts {
    pub es: bool,
    pub domination: bool,
    pub tv: bool,
    pub covariance: bool,
}

impl SuiteParts {
    pub const ALL: SuiteParts = SuiteParts {
        es: true,
        domination: true,
        tv: true,
        covariance: true,
    };
}

/// Parses the instances and checks every size against `cap` before any
/// measure is computed.
pub fn validate_suite(labels: &[String], cap: usize) -> Result<Vec<Instance>> {
    let insts = labels
        .iter()
        .map(|l| Instance::parse(l))
        .collect::<Result<Vec<_>>>()?;
    for inst in &insts {
        if inst.joint_bits() > cap {
            return Err(Error::Config(format!(
                "instance {} needs {} enumerated variables, cap is {cap}",
                inst.label,
                inst.joint_bits()
            )));
        }
    }
    Ok(insts)
}

/// Runs the selected families on every instance and draw. Domination is
/// skipped on graphs with more than [`DOMINATION_EDGES`] edges; the skipped
/// labels are returned.
pub fn run_suite(
    insts: &[Instance],
    draws: usize,
    master: u64,
    cap: usize,
    parts: SuiteParts,
    corrupt: bool,
) -> Result<(Vec<Check>, Vec<String>)> {
    use rayon::prelude::*;
    let jobs: Vec<(usize, usize)> = (0..insts.len())
        .flat_map(|i| (0..draws).map(move |k| (i, k)))
        .collect();
    let results: Vec<Result<Vec<Check>>> = jobs
        .par_iter()
        .map(|&(i, k)| {
            let inst = &insts[i];
            let draw = Draw::sample(inst, k, master);
            let mut out = Vec::new();
            if parts.es {
                out.extend(es_consistency(inst, &draw, k, corrupt, cap)?);
            }
            if parts.domination && inst.n_edges() <= DOMINATION_EDGES {
                out.extend(domination(inst, &draw, k, master, cap)?);
            }
            if parts.tv {
                out.extend(tv_bounds(inst, &draw, k, master, cap)?);
            }
            if parts.covariance {
                out.extend(covariance_identity(inst, &draw, k, cap)?);
            }
            Ok(out)
        })
        .collect();
    let mut checks = Vec::new();
    for r in results {
        checks.extend(r?);
    }
    let skipped = if parts.domination {
        insts
            .iter()
            .filter(|i| i.n_edges() > DOMINATION_EDGES)
            .map(|i| i.label.clone())
            .collect()
    } else {
        vec![]
    };
    Ok((checks, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_sizes() {
        let c = Instance::parse("6").unwrap();
        assert_eq!(c.n_edges(), 13);
        assert_eq!(c.joint_bits(), 19);
        let r = Instance::parse("2x1").unwrap();
        assert_eq!(r.region.len(), 2);
        assert_eq!(r.n_edges(), 9);
        assert_eq!(Instance::parse("1x1").unwrap().n_edges(), 5);
        assert!(Instance::parse("0").is_err());
        assert!(Instance::parse("2y1").is_err());
    }

    #[test]
    fn edge_count_matches_the_model() {
        for l in ["1", "4", "1x1", "3x1", "2x2"] {
            let inst = Instance::parse(l).unwrap();
            let draw = Draw::sample(&inst, 0, 3);
            let m = RcModel::two_ghost(
                &inst.region,
                RcMode::Signed,
                0.3,
                0.4,
                &draw.h,
                2,
                &BondBoundary::Free,
            )
            .unwrap();
            assert_eq!(m.n_edges(), inst.n_edges(), "{l}");
        }
    }

    #[test]
    fn small_suite_passes_and_corruption_is_caught() {
        let insts = validate_suite(&["3".into(), "2x1".into()], 20).unwrap();
        let (checks, skipped) = run_suite(&insts, 2, 9, 20, SuiteParts::ALL, false).unwrap();
        assert!(skipped.is_empty());
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
        let (bad, _) = run_suite(
            &insts,
            1,
            9,
            20,
            SuiteParts {
                es: true,
                domination: false,
                tv: false,
                covariance: false,
            },
            true,
        )
        .unwrap();
        assert!(bad
            .iter()
            .any(|c| !c.passed && c.check == "es-spin-marginal"));
    }

    #[test]
    fn cap_is_checked_up_front() {
        assert!(matches!(
            validate_suite(&["3x3".into()], 20),
            Err(Error::Config(_))
        ));
    }
}
