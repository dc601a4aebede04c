//! Random cluster measures on a finite region with one ghost (constant field)
//! or two ghosts `g+`, `g-` (signed field), with or without the indicator
//! that keeps the ghosts apart.
//!
//! A [`RcModel`] fixes the graph: region sites, the exterior boundary sites
//! touched by closure edges, the ghosts, the edge list in exploration order
//! and the boundary condition `ρ`. The boundary is stored as links between
//! exterior sites and ghosts that `ρ` connects outside the closure; edges of
//! `ρ` farther away only matter through those links.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fields::FieldRealization;
use crate::gibbs::SpinBoundary;
use crate::lattice::{edge_sets, Edge, Ghost, GhostScheme, Region, Site};

mod engine;
mod es;
mod exact;
mod order;
mod theta;
mod union_find;

pub use engine::{SpinSumEngine, DEFAULT_ENGINE_CAP};
pub use es::EsChain;
pub use exact::{exact_rc_measure, tv, BondDistribution, DEFAULT_EDGE_CAP};
pub use order::{domination_gap, upset_closure};
pub use theta::{theta_n_estimate, write_theta_csv, ThetaEstimate, ThetaRow, ThetaSampler};
pub use union_find::UnionFind;

/// Bond values aligned with [`RcModel::edges`].
pub type BondConfig = Vec<bool>;

/// Which random cluster measure a model describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RcMode {
    /// One ghost, every site attached with parameter `1 - e^{-2H}`.
    Constant,
    /// Two ghosts by field sign, configurations joining them excluded.
    Signed,
    /// Two ghosts by field sign, no indicator, ghosts counted as one vertex.
    Abs,
}

impl RcMode {
    pub fn scheme(self) -> GhostScheme {
        match self {
            RcMode::Constant => GhostScheme::Single,
            RcMode::Signed | RcMode::Abs => GhostScheme::Split,
        }
    }
}

/// Boundary condition `ρ` on the edges outside the closure.
#[derive(Clone, Debug, PartialEq)]
pub enum BondBoundary {
    /// `ρ ≡ 0`.
    Free,
    /// `ρ ≡ 1`: every exterior site joined to every other and to the ghost.
    Wired,
    /// Spin boundary read as bonds: sites with `η = +1` joined to `g+`,
    /// `η = -1` to `g-`, value 0 left alone. Two-ghost modes only.
    Spins(SpinBoundary),
    /// Explicit open edges of `𝓑(Λ^C)` and external edges of `Λ^C`.
    Custom(Vec<Edge>),
}

/// A vertex of the model graph, addressed by name.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Site(Site),
    Ghost(Ghost),
}

/// Vertex restriction for connectivity queries.
#[derive(Clone, Copy)]
pub enum Restriction<'a> {
    /// Every vertex and every boundary link.
    None,
    /// Lattice vertices only: ghosts and ghost links are excluded, boundary
    /// links through `Λ^C` are kept.
    Lattice,
    /// Lattice sites accepted by the predicate; boundary links are not used.
    Sites(&'a dyn Fn(&Site) -> bool),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Link {
    pub a: u32,
    pub b: u32,
    /// True when the outside path uses lattice edges only.
    pub lattice: bool,
}

/// Graph, edge parameters and boundary of a random cluster measure.
#[derive(Clone, Debug)]
pub struct RcModel {
    mode: RcMode,
    q: u32,
    beta: f64,
    strength: f64,
    region: Region,
    outer: Vec<Site>,
    ghosts: Vec<Ghost>,
    edges: Vec<Edge>,
    ends: Vec<(u32, u32)>,
    coupling: Vec<f64>,
    p: Vec<f64>,
    links: Vec<Link>,
}

impl RcModel {
    /// Single-ghost measure with constant field strength `H`.
    pub fn constant(
        region: &Region,
        beta: f64,
        strength: f64,
        q: u32,
        boundary: &BondBoundary,
    ) -> Result<Self> {
        Self::build(region, RcMode::Constant, beta, strength, None, q, boundary)
    }

    /// Two-ghost measure (`Signed` or `Abs`) for the realization `h`.
    pub fn two_ghost(
        region: &Region,
        mode: RcMode,
        beta: f64,
        strength: f64,
        h: &FieldRealization,
        q: u32,
        boundary: &BondBoundary,
    ) -> Result<Self> {
        if mode == RcMode::Constant {
            return Err(Error::InvalidParameter(
                "two_ghost needs Signed or Abs mode".into(),
            ));
        }
        Self::build(region, mode, beta, strength, Some(h), q, boundary)
    }

    fn build(
        region: &Region,
        mode: RcMode,
        beta: f64,
        strength: f64,
        h: Option<&FieldRealization>,
        q: u32,
        boundary: &BondBoundary,
    ) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidParameter(format!("beta = {beta}")));
        }
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(Error::InvalidParameter(format!("H = {strength}")));
        }
        if q < 1 {
            return Err(Error::InvalidParameter("q must be >= 1".into()));
        }
        if region.is_empty() {
            return Err(Error::InvalidParameter("empty region".into()));
        }
        let values = match (mode, h) {
            (RcMode::Constant, _) => None,
            (_, None) => return Err(Error::MissingField),
            (_, Some(h)) => {
                if h.region() != region {
                    return Err(Error::DomainMismatch(
                        "field realization is on another region".into(),
                    ));
                }
                Some(h.values())
            }
        };
        let sets = edge_sets(region, values, mode.scheme())?;
        let edges = sets.ordered(region);
        let outer = region.exterior_boundary();
        let ghosts = match mode {
            RcMode::Constant => vec![Ghost::Single],
            _ => vec![Ghost::Plus, Ghost::Minus],
        };
        let mut model = RcModel {
            mode,
            q,
            beta,
            strength,
            region: region.clone(),
            outer,
            ghosts,
            edges: Vec::new(),
            ends: Vec::new(),
            coupling: Vec::new(),
            p: Vec::new(),
            links: Vec::new(),
        };
        for e in &edges {
            let (a, b, c) = match e {
                Edge::Internal(x, y) => (model.site_id(x), model.site_id(y), beta),
                Edge::External(x, g) => {
                    let hx = match values {
                        Some(v) => v[region.index_of(x).expect("edge of region")].abs(),
                        None => 1.0,
                    };
                    (model.site_id(x), Some(model.ghost_id(*g)), strength * hx)
                }
            };
            let (mut a, mut b) = (a.expect("closure endpoint"), b.expect("closure endpoint"));
            if a >= region.len() {
                std::mem::swap(&mut a, &mut b);
            }
            model.ends.push((a as u32, b as u32));
            model.coupling.push(c);
            model.p.push(-(-2.0 * c).exp_m1());
        }
        model.edges = edges;
        model.links = model.boundary_links(boundary)?;
        Ok(model)
    }

    fn boundary_links(&self, boundary: &BondBoundary) -> Result<Vec<Link>> {
        let n = self.region.len();
        let mut links = Vec::new();
        match boundary {
            BondBoundary::Free => {}
            BondBoundary::Wired => {
                if self.mode == RcMode::Signed {
                    return Err(Error::InvalidParameter(
                        "wired boundary joins g+ and g- under the signed measure".into(),
                    ));
                }
                let comp = self.region.complement_components(&self.outer);
                let mut first: HashMap<usize, usize> = HashMap::new();
                let g = self.ghost_id(self.ghosts[0]);
                for (k, c) in comp.iter().enumerate() {
                    let id = n + k;
                    if let Some(&f) = first.get(c) {
                        links.push(Link {
                            a: f as u32,
                            b: id as u32,
                            lattice: true,
                        });
                    } else {
                        first.insert(*c, id);
                    }
                    links.push(Link {
                        a: id as u32,
                        b: g as u32,
                        lattice: false,
                    });
                }
            }
            BondBoundary::Spins(eta) => {
                if self.mode == RcMode::Constant {
                    return Err(Error::Unsupported("spin boundary needs two ghosts".into()));
                }
                for (k, s) in self.outer.iter().enumerate() {
                    let g = match eta.value(s)? {
                        1 => Ghost::Plus,
                        -1 => Ghost::Minus,
                        _ => continue,
                    };
                    links.push(Link {
                        a: (n + k) as u32,
                        b: self.ghost_id(g) as u32,
                        lattice: false,
                    });
                }
            }
            BondBoundary::Custom(open) => links = self.custom_links(open)?,
        }
        Ok(links)
    }

    fn custom_links(&self, open: &[Edge]) -> Result<Vec<Link>> {
        // local ids for every vertex the listed edges touch
        let mut ids: HashMap<Node, usize> = HashMap::new();
        let id_of = |v: Node, ids: &mut HashMap<Node, usize>| -> usize {
            let next = ids.len();
            *ids.entry(v).or_insert(next)
        };
        let relevant: Vec<Node> = self
            .outer
            .iter()
            .map(|s| Node::Site(s.clone()))
            .chain(self.ghosts.iter().map(|g| Node::Ghost(*g)))
            .collect();
        for v in &relevant {
            id_of(v.clone(), &mut ids);
        }
        let mut pairs = Vec::new();
        for e in open {
            if e.lattice_endpoints()
                .iter()
                .any(|x| self.region.contains(x) || x.dim() != self.region.dim())
            {
                return Err(Error::DomainMismatch(format!(
                    "boundary edge {e} is not outside the region"
                )));
            }
            let (a, b, lattice) = match e {
                Edge::Internal(x, y) => (Node::Site(x.clone()), Node::Site(y.clone()), true),
                Edge::External(x, g) => {
                    if !self.ghosts.contains(g) {
                        return Err(Error::DomainMismatch(format!(
                            "ghost {g} does not exist in this mode"
                        )));
                    }
                    (Node::Site(x.clone()), Node::Ghost(*g), false)
                }
            };
            pairs.push((id_of(a, &mut ids), id_of(b, &mut ids), lattice));
        }
        let mut lat = UnionFind::new(ids.len());
        let mut full = UnionFind::new(ids.len());
        for &(a, b, l) in &pairs {
            full.union(a, b);
            if l {
                lat.union(a, b);
            }
        }
        let mut links = Vec::new();
        let mut rep_lat: HashMap<usize, usize> = HashMap::new();
        let mut rep_full: HashMap<usize, (usize, usize)> = HashMap::new();
        for v in &relevant {
            let (local, model_id) = (ids[v], self.node_id(v).expect("relevant vertex"));
            let r = lat.find(local);
            match rep_lat.get(&r) {
                Some(&m) => links.push(Link {
                    a: m as u32,
                    b: model_id as u32,
                    lattice: true,
                }),
                None => {
                    rep_lat.insert(r, model_id);
                }
            }
            let r = full.find(local);
            match rep_full.get(&r) {
                Some(&(l0, m)) if !lat.same(l0, local) => links.push(Link {
                    a: m as u32,
                    b: model_id as u32,
                    lattice: false,
                }),
                Some(_) => {}
                None => {
                    rep_full.insert(r, (local, model_id));
                }
            }
        }
        Ok(links)
    }

    pub fn mode(&self) -> RcMode {
        self.mode
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Exterior boundary sites, in the order of their vertex ids.
    pub fn outer_sites(&self) -> &[Site] {
        &self.outer
    }

    pub fn ghosts(&self) -> &[Ghost] {
        &self.ghosts
    }

    pub fn n_vertices(&self) -> usize {
        self.region.len() + self.outer.len() + self.ghosts.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Free edges, in exploration order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_index(&self, e: &Edge) -> Option<usize> {
        self.edges.iter().position(|x| x == e)
    }

    /// Vertex ids of the endpoints of edge `i`; the first lies in the region.
    pub fn endpoints(&self, i: usize) -> (usize, usize) {
        let (a, b) = self.ends[i];
        (a as usize, b as usize)
    }

    pub fn edge_p(&self, i: usize) -> f64 {
        self.p[i]
    }

    pub fn edge_params(&self) -> &[f64] {
        &self.p
    }

    pub(crate) fn links(&self) -> &[Link] {
        &self.links
    }

    /// Vertex id of a region or exterior boundary site.
    pub fn site_id(&self, s: &Site) -> Option<usize> {
        if let Some(i) = self.region.index_of(s) {
            return Some(i);
        }
        self.outer
            .binary_search(s)
            .ok()
            .map(|k| self.region.len() + k)
    }

    pub fn ghost_id(&self, g: Ghost) -> usize {
        let base = self.region.len() + self.outer.len();
        match (self.mode, g) {
            (RcMode::Constant, _) => base,
            (_, Ghost::Minus) => base + 1,
            _ => base,
        }
    }

    pub fn node_id(&self, v: &Node) -> Option<usize> {
        match v {
            Node::Site(s) => self.site_id(s),
            Node::Ghost(g) => self.ghosts.contains(g).then(|| self.ghost_id(*g)),
        }
    }

    pub fn is_ghost_id(&self, id: usize) -> bool {
        id >= self.region.len() + self.outer.len()
    }

    pub fn is_region_id(&self, id: usize) -> bool {
        id < self.region.len()
    }

    /// Site of a lattice vertex id.
    pub fn vertex_site(&self, id: usize) -> Option<&Site> {
        let n = self.region.len();
        if id < n {
            Some(self.region.site(id))
        } else {
            self.outer.get(id - n)
        }
    }

    fn check(&self, omega: &[bool]) -> Result<()> {
        if omega.len() != self.edges.len() {
            return Err(Error::DomainMismatch(format!(
                "bond configuration has {} values for {} edges",
                omega.len(),
                self.edges.len()
            )));
        }
        Ok(())
    }

    /// Partition of all vertices under open edges and boundary links.
    pub fn partition(&self, omega: &[bool], wire_ghosts: bool) -> Result<ClusterPartition> {
        self.check(omega)?;
        let mut uf = UnionFind::new(self.n_vertices());
        for l in &self.links {
            uf.union(l.a as usize, l.b as usize);
        }
        for (i, &open) in omega.iter().enumerate() {
            if open {
                let (a, b) = self.ends[i];
                uf.union(a as usize, b as usize);
            }
        }
        let ghost_ids: Vec<usize> = self.ghosts.iter().map(|g| self.ghost_id(*g)).collect();
        if wire_ghosts || self.mode == RcMode::Abs {
            for w in ghost_ids.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        Ok(ClusterPartition::new(uf, self.region.len(), ghost_ids))
    }

    /// Number of clusters meeting the region and containing no ghost.
    pub fn count_clusters(&self, omega: &[bool]) -> Result<usize> {
        Ok(self.partition(omega, false)?.k())
    }

    /// True when `g+` and `g-` lie in one cluster (never in single-ghost mode).
    pub fn ghosts_joined(&self, omega: &[bool]) -> Result<bool> {
        if self.ghosts.len() < 2 {
            return Ok(false);
        }
        let mut part = self.partition(omega, false)?;
        Ok(part.ghosts_joined())
    }

    /// Unnormalized log-weight; `-∞` for configurations of probability zero.
    pub fn log_weight(&self, omega: &[bool]) -> Result<f64> {
        let mut part = self.partition(omega, false)?;
        if self.mode == RcMode::Signed && part.ghosts_joined() {
            return Ok(f64::NEG_INFINITY);
        }
        let mut w = part.k() as f64 * (self.q as f64).ln();
        for (i, &open) in omega.iter().enumerate() {
            w += if open {
                self.p[i].ln()
            } else {
                -2.0 * self.coupling[i]
            };
        }
        Ok(w)
    }

    /// Connectivity between two vertex sets under `omega`.
    pub fn connected_sets(
        &self,
        omega: &[bool],
        a: &[Node],
        b: &[Node],
        restriction: Restriction,
    ) -> Result<bool> {
        self.check(omega)?;
        let ids = |set: &[Node]| -> Result<Vec<usize>> {
            set.iter()
                .map(|v| {
                    self.node_id(v).ok_or_else(|| {
                        Error::DomainMismatch(format!("{v:?} is not a vertex of the graph"))
                    })
                })
                .collect()
        };
        let (ia, ib) = (ids(a)?, ids(b)?);
        let allowed = |id: usize| -> bool {
            match restriction {
                Restriction::None => true,
                Restriction::Lattice => !self.is_ghost_id(id),
                Restriction::Sites(f) => self.vertex_site(id).is_some_and(f),
            }
        };
        let mut uf = UnionFind::new(self.n_vertices());
        for l in &self.links {
            let ok = match restriction {
                Restriction::None => true,
                Restriction::Lattice => l.lattice,
                Restriction::Sites(_) => false,
            };
            if ok && allowed(l.a as usize) && allowed(l.b as usize) {
                uf.union(l.a as usize, l.b as usize);
            }
        }
        for (i, &open) in omega.iter().enumerate() {
            let (x, y) = (self.ends[i].0 as usize, self.ends[i].1 as usize);
            if open && allowed(x) && allowed(y) {
                uf.union(x, y);
            }
        }
        if matches!(restriction, Restriction::None) && self.mode == RcMode::Abs {
            let g: Vec<usize> = self.ghosts.iter().map(|g| self.ghost_id(*g)).collect();
            uf.union(g[0], g[1]);
        }
        for &x in ia.iter().filter(|&&x| allowed(x)) {
            for &y in ib.iter().filter(|&&y| allowed(y)) {
                if uf.same(x, y) {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    pub fn connected(
        &self,
        omega: &[bool],
        u: &Node,
        v: &Node,
        restriction: Restriction,
    ) -> Result<bool> {
        self.connected_sets(
            omega,
            std::slice::from_ref(u),
            std::slice::from_ref(v),
            restriction,
        )
    }
}

/// Union-find partition of a model's vertices with per-cluster flags.
#[derive(Clone, Debug)]
pub struct ClusterPartition {
    uf: UnionFind,
    n_region: usize,
    ghost_ids: Vec<usize>,
}

impl ClusterPartition {
    fn new(uf: UnionFind, n_region: usize, ghost_ids: Vec<usize>) -> Self {
        Self {
            uf,
            n_region,
            ghost_ids,
        }
    }

    pub fn root(&mut self, v: usize) -> usize {
        self.uf.find(v)
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.uf.same(a, b)
    }

    pub fn contains_ghost(&mut self, v: usize) -> bool {
        let r = self.uf.find(v);
        let g = self.ghost_ids.clone();
        g.into_iter().any(|x| self.uf.find(x) == r)
    }

    pub fn ghosts_joined(&mut self) -> bool {
        self.ghost_ids.len() == 2 && self.uf.same(self.ghost_ids[0], self.ghost_ids[1])
    }

    /// Clusters meeting the region with no ghost.
    pub fn k(&mut self) -> usize {
        let ghost_roots: Vec<usize> = self
            .ghost_ids
            .clone()
            .into_iter()
            .map(|g| self.uf.find(g))
            .collect();
        let mut roots: Vec<usize> = (0..self.n_region)
            .map(|i| self.uf.find(i))
            .filter(|r| !ghost_roots.contains(r))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }
}

/// Cluster count of `omega`; `wire_ghosts` merges `g+` and `g-` first.
pub fn count_clusters(model: &RcModel, omega: &[bool], wire_ghosts: bool) -> Result<usize> {
    Ok(model.partition(omega, wire_ghosts)?.k())
}

/// Log-weight of the single-ghost measure.
pub fn rc_log_weight_constant(model: &RcModel, omega: &[bool]) -> Result<f64> {
    if model.mode() != RcMode::Constant {
        return Err(Error::InvalidParameter(
            "single-ghost model required".into(),
        ));
    }
    model.log_weight(omega)
}

/// Log-weight of the two-ghost measure, with indicator (`Signed`) or without (`Abs`).
pub fn rc_log_weight_general(model: &RcModel, omega: &[bool]) -> Result<f64> {
    if model.mode() == RcMode::Constant {
        return Err(Error::InvalidParameter("two-ghost model required".into()));
    }
    model.log_weight(omega)
}

/// Bond configuration from the low bits of `mask`.
pub fn config_from_mask(mask: u64, m: usize) -> BondConfig {
    (0..m).map(|i| mask >> i & 1 == 1).collect()
}

pub fn mask_from_config(omega: &[bool]) -> u64 {
    omega
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &b)| acc | (b as u64) << i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::cube;

    fn s(c: &[i32]) -> Site {
        Site::new(c.to_vec())
    }

    fn bimodal(region: &Region, signs: &[f64]) -> FieldRealization {
        FieldRealization::from_values(region, signs.to_vec(), "bimodal", 0).unwrap()
    }

    #[test]
    fn trivial_cluster_counts() {
        let r = cube(1, 2).unwrap();
        let m = RcModel::constant(&r, 0.3, 0.2, 2, &BondBoundary::Free).unwrap();
        let closed = vec![false; m.n_edges()];
        assert_eq!(count_clusters(&m, &closed, false).unwrap(), 9);
        let inner: Vec<bool> = m
            .edges()
            .iter()
            .map(|e| matches!(e, Edge::Internal(a, b) if r.contains(a) && r.contains(b)))
            .collect();
        assert_eq!(count_clusters(&m, &inner, false).unwrap(), 1);
        assert!(count_clusters(&m, &[true], false).is_err());
    }

    #[test]
    fn two_components_one_attached() {
        // left column and the rest as two components; (1,1) carries g+
        let r = cube(1, 2).unwrap();
        let signs = [1.0, -1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, 1.0];
        let h = bimodal(&r, &signs);
        let m =
            RcModel::two_ghost(&r, RcMode::Signed, 0.3, 0.2, &h, 2, &BondBoundary::Free).unwrap();
        let col = |e: &Edge| match e {
            Edge::Internal(a, b) => {
                r.contains(a) && r.contains(b) && a.coords()[0] == -1 && b.coords()[0] == -1
            }
            _ => false,
        };
        let rest = |e: &Edge| match e {
            Edge::Internal(a, b) => {
                r.contains(a) && r.contains(b) && a.coords()[0] >= 0 && b.coords()[0] >= 0
            }
            _ => false,
        };
        let omega: Vec<bool> = m
            .edges()
            .iter()
            .map(|e| col(e) || rest(e) || *e == Edge::External(s(&[1, 1]), Ghost::Plus))
            .collect();
        assert_eq!(count_clusters(&m, &omega, false).unwrap(), 1);
        assert_eq!(count_clusters(&m, &omega, true).unwrap(), 1);
    }

    #[test]
    fn indicator_kills_ghost_path() {
        let r = Region::from_sites(1, vec![s(&[0]), s(&[1])]).unwrap();
        let h = bimodal(&r, &[1.0, -1.0]);
        let signed =
            RcModel::two_ghost(&r, RcMode::Signed, 0.4, 0.5, &h, 2, &BondBoundary::Free).unwrap();
        let abs =
            RcModel::two_ghost(&r, RcMode::Abs, 0.4, 0.5, &h, 2, &BondBoundary::Free).unwrap();
        let omega: Vec<bool> = signed
            .edges()
            .iter()
            .map(|e| {
                *e == Edge::Internal(s(&[0]), s(&[1]))
                    || *e == Edge::External(s(&[0]), Ghost::Plus)
                    || *e == Edge::External(s(&[1]), Ghost::Minus)
            })
            .collect();
        assert_eq!(
            rc_log_weight_general(&signed, &omega).unwrap(),
            f64::NEG_INFINITY
        );
        // by hand: K = 0, three open edges, two closed boundary edges
        let (p1, p2) = (1.0 - (-0.8f64).exp(), 1.0 - (-1.0f64).exp());
        let hand = p1.ln() + 2.0 * p2.ln() + 2.0 * -0.8;
        assert!((rc_log_weight_general(&abs, &omega).unwrap() - hand).abs() < 1e-14);
    }

    #[test]
    fn all_negative_field_is_single_ghost_form() {
        let r = Region::from_sites(1, vec![s(&[0]), s(&[1]), s(&[2])]).unwrap();
        let h = bimodal(&r, &[-1.0, -1.0, -1.0]);
        let m =
            RcModel::two_ghost(&r, RcMode::Signed, 0.3, 0.7, &h, 2, &BondBoundary::Free).unwrap();
        let c = RcModel::constant(&r, 0.3, 0.7, 2, &BondBoundary::Free).unwrap();
        assert_eq!(m.n_edges(), c.n_edges());
        for mask in 0..1u64 << m.n_edges() {
            let w = config_from_mask(mask, m.n_edges());
            assert!((m.log_weight(&w).unwrap() - c.log_weight(&w).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_site_wired_table() {
        let r = Region::from_sites(1, vec![s(&[0])]).unwrap();
        let (beta, h) = (0.35, 0.2);
        let m = RcModel::constant(&r, beta, h, 2, &BondBoundary::Wired).unwrap();
        assert_eq!(m.n_edges(), 3);
        let (p1, p2) = (1.0 - (-2.0 * beta).exp(), 1.0 - (-2.0 * h).exp());
        for mask in 0..8u64 {
            let w = config_from_mask(mask, 3);
            let mut hand = if mask == 0 { 2f64.ln() } else { 0.0 };
            for (i, e) in m.edges().iter().enumerate() {
                let (p, c) = if e.is_internal() { (p1, beta) } else { (p2, h) };
                hand += if w[i] { p.ln() } else { -2.0 * c };
            }
            assert!((rc_log_weight_constant(&m, &w).unwrap() - hand).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_couplings_leave_only_all_closed() {
        let r = cube(1, 2).unwrap();
        let m = RcModel::constant(&r, 0.0, 0.0, 2, &BondBoundary::Free).unwrap();
        let mut w = vec![false; m.n_edges()];
        assert!(m.log_weight(&w).unwrap().is_finite());
        w[3] = true;
        assert_eq!(m.log_weight(&w).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn connectivity_queries() {
        let r = cube(1, 2).unwrap();
        let m = RcModel::constant(&r, 0.3, 0.2, 2, &BondBoundary::Free).unwrap();
        let origin = Node::Site(Site::origin(2));
        let ring: Vec<Node> = r.interior_boundary().into_iter().map(Node::Site).collect();
        let all = vec![true; m.n_edges()];
        assert!(m
            .connected_sets(
                &all,
                std::slice::from_ref(&origin),
                &ring,
                Restriction::Lattice
            )
            .unwrap());
        let ghosts_only: Vec<bool> = m.edges().iter().map(|e| !e.is_internal()).collect();
        assert!(!m
            .connected_sets(
                &ghosts_only,
                std::slice::from_ref(&origin),
                &ring,
                Restriction::Lattice
            )
            .unwrap());
        assert!(m
            .connected_sets(
                &ghosts_only,
                std::slice::from_ref(&origin),
                &ring,
                Restriction::None
            )
            .unwrap());
        let only_center = |x: &Site| x == &Site::origin(2);
        assert!(!m
            .connected_sets(
                &all,
                std::slice::from_ref(&origin),
                &ring,
                Restriction::Sites(&only_center)
            )
            .unwrap());
    }

    #[test]
    fn wired_rejected_for_signed() {
        let r = cube(0, 2).unwrap();
        let h = bimodal(&r, &[1.0]);
        assert!(
            RcModel::two_ghost(&r, RcMode::Signed, 0.3, 0.2, &h, 2, &BondBoundary::Wired).is_err()
        );
        assert!(RcModel::two_ghost(&r, RcMode::Abs, 0.3, 0.2, &h, 2, &BondBoundary::Wired).is_ok());
    }

    #[test]
    fn custom_boundary_links() {
        // exterior sites (-1,0) and (1,0) of the origin joined around through (1,1)... on Λ^C
        let r = cube(0, 2).unwrap();
        let path = vec![
            Edge::internal(s(&[-1, 0]), s(&[-1, 1])).unwrap(),
            Edge::internal(s(&[-1, 1]), s(&[0, 1])).unwrap(),
            Edge::External(s(&[1, 0]), Ghost::Single),
        ];
        let m = RcModel::constant(&r, 0.3, 0.2, 2, &BondBoundary::Custom(path)).unwrap();
        let w = vec![false; m.n_edges()];
        let a = Node::Site(s(&[-1, 0]));
        let b = Node::Site(s(&[0, 1]));
        assert!(m.connected(&w, &a, &b, Restriction::Lattice).unwrap());
        let c = Node::Site(s(&[1, 0]));
        assert!(m
            .connected(&w, &c, &Node::Ghost(Ghost::Single), Restriction::None)
            .unwrap());
        assert!(!m.connected(&w, &a, &c, Restriction::None).unwrap());
        let bad = vec![Edge::External(s(&[0, 0]), Ghost::Single)];
        assert!(RcModel::constant(&r, 0.3, 0.2, 2, &BondBoundary::Custom(bad)).is_err());
    }
}
