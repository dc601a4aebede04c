//! Finite-box geometry of `Z^d`: sites, regions, boundaries, edge sets and the
//! distance-to-complement orderings used by the exploration couplings.
//!
//! Distances are Euclidean and are always handled as exact squared integers.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{coords_key, hash_words};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site(Vec<i32>);

impl Site {
    pub fn new(coords: impl Into<Vec<i32>>) -> Self {
        Site(coords.into())
    }

    pub fn origin(dim: usize) -> Self {
        Site(vec![0; dim])
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn offset(&self, axis: usize, delta: i32) -> Site {
        let mut c = self.0.clone();
        c[axis] += delta;
        Site(c)
    }

    pub fn translate(&self, by: &Site) -> Site {
        Site(self.0.iter().zip(&by.0).map(|(a, b)| a + b).collect())
    }

    /// The `2d` nearest neighbors, axis by axis, `-1` before `+1`.
    pub fn neighbors(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.dim()).flat_map(move |k| [self.offset(k, -1), self.offset(k, 1)])
    }

    pub fn dist2(&self, other: &Site) -> i64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| {
                let d = (*a - *b) as i64;
                d * d
            })
            .sum()
    }

    pub fn is_neighbor(&self, other: &Site) -> bool {
        self.dim() == other.dim() && self.dist2(other) == 1
    }

    pub fn key(&self) -> u64 {
        coords_key(&self.0)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Which ghost vertex an external edge attaches to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ghost {
    Single,
    Plus,
    Minus,
}

impl Ghost {
    pub fn spin(self) -> i8 {
        match self {
            Ghost::Single | Ghost::Plus => 1,
            Ghost::Minus => -1,
        }
    }
}

impl fmt::Display for Ghost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ghost::Single => write!(f, "g"),
            Ghost::Plus => write!(f, "g+"),
            Ghost::Minus => write!(f, "g-"),
        }
    }
}

/// One ghost `g` (constant field) or the pair `g+`, `g-` (signed field).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GhostScheme {
    Single,
    Split,
}

/// A nearest-neighbor edge of `Z^d` or an edge from a site to a ghost.
///
/// The derived order puts internal edges before external ones and is
/// lexicographic on endpoint coordinates otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Edge {
    Internal(Site, Site),
    External(Site, Ghost),
}

impl Edge {
    /// Internal edge with normalized endpoint order.
    pub fn internal(a: Site, b: Site) -> Result<Edge> {
        if !a.is_neighbor(&b) {
            return Err(Error::InvalidParameter(format!(
                "{a} and {b} are not nearest neighbors"
            )));
        }
        Ok(if a <= b {
            Edge::Internal(a, b)
        } else {
            Edge::Internal(b, a)
        })
    }

    pub fn external(site: Site, ghost: Ghost) -> Edge {
        Edge::External(site, ghost)
    }

    pub fn is_internal(&self) -> bool {
        matches!(self, Edge::Internal(..))
    }

    pub fn lattice_endpoints(&self) -> Vec<&Site> {
        match self {
            Edge::Internal(a, b) => vec![a, b],
            Edge::External(a, _) => vec![a],
        }
    }

    pub fn ghost(&self) -> Option<Ghost> {
        match self {
            Edge::External(_, g) => Some(*g),
            Edge::Internal(..) => None,
        }
    }

    pub fn key(&self) -> u64 {
        match self {
            Edge::Internal(a, b) => hash_words(1, &[a.key(), b.key()]),
            Edge::External(a, g) => hash_words(2, &[a.key(), *g as u64]),
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Edge::Internal(a, b) => write!(f, "{{{a},{b}}}"),
            Edge::External(a, g) => write!(f, "{{{a},{g}}}"),
        }
    }
}

/// A finite subset of `Z^d`.
///
/// Sites are kept sorted lexicographically; the position of a site in that
/// order is its index everywhere else in the crate (spin vectors, field
/// vectors, vertex ids).
#[derive(Clone, Debug)]
pub struct Region {
    dim: usize,
    sites: Vec<Site>,
    index: HashMap<Site, usize>,
    lo: Vec<i32>,
    hi: Vec<i32>,
    is_box: bool,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.sites == other.sites
    }
}

/// `[-L, L]^d`.
pub fn cube(half_width: i64, dim: usize) -> Result<Region> {
    Region::cube(half_width, dim)
}

impl Region {
    pub fn cube(half_width: i64, dim: usize) -> Result<Region> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if half_width < 0 {
            return Err(Error::InvalidParameter(
                "box half-width must be >= 0".into(),
            ));
        }
        let l = half_width as i32;
        Region::rect(&vec![-l; dim], &vec![l; dim])
    }

    /// Axis-aligned box `lo[k] <= x_k <= hi[k]`.
    pub fn rect(lo: &[i32], hi: &[i32]) -> Result<Region> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidParameter(
                "bounds must have equal nonzero length".into(),
            ));
        }
        if lo.iter().zip(hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidParameter("empty box".into()));
        }
        let dim = lo.len();
        let mut sites = Vec::new();
        let mut cur = lo.to_vec();
        loop {
            sites.push(Site(cur.clone()));
            // odometer, last axis fastest keeps lexicographic order
            let mut k = dim;
            loop {
                if k == 0 {
                    let mut r = Region::from_sorted(dim, sites);
                    r.is_box = true;
                    return Ok(r);
                }
                k -= 1;
                if cur[k] < hi[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = lo[k];
            }
        }
    }

    /// Arbitrary finite site set. Duplicates are merged.
    pub fn from_sites(dim: usize, sites: impl IntoIterator<Item = Site>) -> Result<Region> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let mut v: Vec<Site> = sites.into_iter().collect();
        if let Some(bad) = v.iter().find(|s| s.dim() != dim) {
            return Err(Error::DomainMismatch(format!(
                "site {bad} is not {dim}-dimensional"
            )));
        }
        v.sort();
        v.dedup();
        let mut r = Region::from_sorted(dim, v);
        r.is_box = !r.sites.is_empty() && r.sites.len() == r.bbox_volume();
        Ok(r)
    }

    fn from_sorted(dim: usize, sites: Vec<Site>) -> Region {
        let index = sites
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let mut lo = vec![i32::MAX; dim];
        let mut hi = vec![i32::MIN; dim];
        for s in &sites {
            for k in 0..dim {
                lo[k] = lo[k].min(s.0[k]);
                hi[k] = hi[k].max(s.0[k]);
            }
        }
        Region {
            dim,
            sites,
            index,
            lo,
            hi,
            is_box: false,
        }
    }

    fn bbox_volume(&self) -> usize {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a + 1) as usize)
            .product()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, i: usize) -> &Site {
        &self.sites[i]
    }

    pub fn index_of(&self, s: &Site) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn contains(&self, s: &Site) -> bool {
        self.index.contains_key(s)
    }

    pub fn is_box(&self) -> bool {
        self.is_box
    }

    pub fn bounds(&self) -> (&[i32], &[i32]) {
        (&self.lo, &self.hi)
    }

    /// `Some(L)` when the region is exactly `[-L, L]^d`.
    pub fn half_width(&self) -> Option<i32> {
        if !self.is_box {
            return None;
        }
        let l = self.hi[0];
        (self.lo.iter().all(|&a| a == -l) && self.hi.iter().all(|&b| b == l)).then_some(l)
    }

    pub fn translate(&self, by: &Site) -> Region {
        let mut r = Region::from_sorted(
            self.dim,
            self.sites.iter().map(|s| s.translate(by)).collect(),
        );
        r.is_box = self.is_box;
        r
    }

    /// Sites outside the region with a nearest neighbor inside, sorted.
    pub fn exterior_boundary(&self) -> Vec<Site> {
        let mut out: HashSet<Site> = HashSet::new();
        for s in &self.sites {
            for n in s.neighbors() {
                if !self.contains(&n) {
                    out.insert(n);
                }
            }
        }
        let mut v: Vec<Site> = out.into_iter().collect();
        v.sort();
        v
    }

    /// Sites inside the region with a nearest neighbor outside, sorted.
    pub fn interior_boundary(&self) -> Vec<Site> {
        self.sites
            .iter()
            .filter(|s| s.neighbors().any(|n| !self.contains(&n)))
            .cloned()
            .collect()
    }

    /// The region together with its exterior boundary.
    pub fn closure(&self) -> Region {
        let mut all = self.sites.clone();
        all.extend(self.exterior_boundary());
        Region::from_sites(self.dim, all).expect("same dimension")
    }

    /// Squared Euclidean distance from `s` to the complement; zero outside.
    pub fn dist2_to_complement(&self, s: &Site) -> i64 {
        if !self.contains(s) {
            return 0;
        }
        if self.is_box {
            return (0..self.dim)
                .map(|k| {
                    let d = (s.0[k] - self.lo[k] + 1).min(self.hi[k] - s.0[k] + 1) as i64;
                    d * d
                })
                .min()
                .unwrap_or(0);
        }
        // The shell of the bounding box grown by one lies entirely outside, and
        // projecting any farther outside point onto the grown box brings it
        // closer, so searching the grown box is exhaustive.
        let lo: Vec<i32> = self.lo.iter().map(|a| a - 1).collect();
        let hi: Vec<i32> = self.hi.iter().map(|b| b + 1).collect();
        let mut best = i64::MAX;
        let mut cur = lo.clone();
        loop {
            let c = Site(cur.clone());
            if !self.contains(&c) {
                best = best.min(c.dist2(s));
            }
            let mut k = self.dim;
            loop {
                if k == 0 {
                    return best;
                }
                k -= 1;
                if cur[k] < hi[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = lo[k];
            }
        }
    }

    /// Labels the given outside sites by connected component of the
    /// complement (nearest-neighbor connectivity). Sites in the unbounded
    /// component all share one label.
    pub fn complement_components(&self, outside: &[Site]) -> Vec<usize> {
        let lo: Vec<i32> = self.lo.iter().map(|a| a - 1).collect();
        let hi: Vec<i32> = self.hi.iter().map(|b| b + 1).collect();
        let inside_grown = |s: &Site| {
            s.0.iter()
                .enumerate()
                .all(|(k, &c)| c >= lo[k] && c <= hi[k])
        };
        let mut label: HashMap<Site, usize> = HashMap::new();
        let mut next = 0;
        let mut outer_label: Option<usize> = None;
        let mut out = Vec::with_capacity(outside.len());
        for start in outside {
            if !inside_grown(start) {
                let l = *outer_label.get_or_insert_with(|| {
                    next += 1;
                    next - 1
                });
                out.push(l);
                continue;
            }
            if let Some(&l) = label.get(start) {
                out.push(l);
                continue;
            }
            let mut l = next;
            next += 1;
            let mut seen = vec![start.clone()];
            let mut queue = VecDeque::from([start.clone()]);
            label.insert(start.clone(), l);
            let mut touches_shell = false;
            while let Some(s) = queue.pop_front() {
                for n in s.neighbors() {
                    if self.contains(&n) || label.contains_key(&n) {
                        continue;
                    }
                    if !inside_grown(&n) {
                        touches_shell = true;
                        continue;
                    }
                    label.insert(n.clone(), l);
                    seen.push(n.clone());
                    queue.push_back(n);
                }
            }
            // d = 1 has two unbounded half-lines; they stay distinct because
            // their grown-box pieces are disconnected.
            if touches_shell && self.dim > 1 {
                let ol = *outer_label.get_or_insert(l);
                if ol != l {
                    for s in &seen {
                        label.insert(s.clone(), ol);
                    }
                    l = ol;
                }
            }
            out.push(l);
        }
        out
    }

    /// For each site: indices of neighbors inside the region, and the
    /// exterior-boundary neighbors.
    pub fn neighbor_table(&self) -> (Vec<Vec<usize>>, Vec<Vec<Site>>) {
        let mut inner = Vec::with_capacity(self.len());
        let mut outer = Vec::with_capacity(self.len());
        for s in &self.sites {
            let mut a = Vec::new();
            let mut b = Vec::new();
            for n in s.neighbors() {
                match self.index_of(&n) {
                    Some(j) => a.push(j),
                    None => b.push(n),
                }
            }
            inner.push(a);
            outer.push(b);
        }
        (inner, outer)
    }
}

/// Internal edges, their closure and the external (ghost) edges of a region.
#[derive(Clone, Debug)]
pub struct EdgeSets {
    /// Edges with both endpoints in the region.
    pub internal: Vec<Edge>,
    /// Edges with at least one endpoint in the region.
    pub closure: Vec<Edge>,
    /// Ghost edges of region sites.
    pub external: Vec<Edge>,
}

impl EdgeSets {
    pub fn plus_edges(&self) -> impl Iterator<Item = &Edge> {
        self.external
            .iter()
            .filter(|e| e.ghost() == Some(Ghost::Plus))
    }

    pub fn minus_edges(&self) -> impl Iterator<Item = &Edge> {
        self.external
            .iter()
            .filter(|e| e.ghost() == Some(Ghost::Minus))
    }

    /// Closure and external edges in the exploration order.
    pub fn ordered(&self, region: &Region) -> Vec<Edge> {
        let mut all: Vec<Edge> = self.closure.iter().chain(&self.external).cloned().collect();
        sort_edges(region, &mut all);
        all
    }
}

/// Builds the edge sets. In split mode `field` (aligned with region order)
/// decides the ghost: `h > 0` attaches to `g+`, `h < 0` to `g-`, `h = 0` to none.
pub fn edge_sets(region: &Region, field: Option<&[f64]>, scheme: GhostScheme) -> Result<EdgeSets> {
    let mut internal = Vec::new();
    let mut closure = Vec::new();
    for s in region.sites() {
        for n in s.neighbors() {
            if region.contains(&n) {
                if s < &n {
                    internal.push(Edge::Internal(s.clone(), n.clone()));
                    closure.push(Edge::Internal(s.clone(), n));
                }
            } else {
                closure.push(Edge::internal(s.clone(), n)?);
            }
        }
    }
    let external = match scheme {
        GhostScheme::Single => region
            .sites()
            .iter()
            .map(|s| Edge::External(s.clone(), Ghost::Single))
            .collect(),
        GhostScheme::Split => {
            let h = field.ok_or(Error::MissingField)?;
            if h.len() != region.len() {
                return Err(Error::DomainMismatch(format!(
                    "field has {} values for {} sites",
                    h.len(),
                    region.len()
                )));
            }
            region
                .sites()
                .iter()
                .zip(h)
                .filter_map(|(s, &v)| {
                    if v > 0.0 {
                        Some(Edge::External(s.clone(), Ghost::Plus))
                    } else if v < 0.0 {
                        Some(Edge::External(s.clone(), Ghost::Minus))
                    } else {
                        None
                    }
                })
                .collect()
        }
    };
    internal.sort();
    closure.sort();
    Ok(EdgeSets {
        internal,
        closure,
        external,
    })
}

/// Squared distance from an edge's lattice part to the complement.
pub fn edge_dist2(region: &Region, e: &Edge) -> i64 {
    e.lattice_endpoints()
        .into_iter()
        .map(|s| region.dist2_to_complement(s))
        .min()
        .unwrap_or(0)
}

fn sort_edges(region: &Region, edges: &mut [Edge]) {
    let mut cache: HashMap<Site, i64> = HashMap::new();
    let mut d2 = |s: &Site| {
        *cache
            .entry(s.clone())
            .or_insert_with(|| region.dist2_to_complement(s))
    };
    let mut keyed: Vec<(i64, Edge)> = edges
        .iter()
        .map(|e| {
            let k = e
                .lattice_endpoints()
                .into_iter()
                .map(&mut d2)
                .min()
                .unwrap_or(0);
            (k, e.clone())
        })
        .collect();
    keyed.sort();
    for (slot, (_, e)) in edges.iter_mut().zip(keyed) {
        *slot = e;
    }
}

/// Total order on `edges`: by distance to the complement, then internal
/// before external, then lexicographic on endpoints.
pub fn edge_order(region: &Region, edges: &[Edge]) -> Vec<Edge> {
    let mut v = edges.to_vec();
    sort_edges(region, &mut v);
    v
}

/// Region sites by distance to the complement, ties lexicographic.
pub fn vertex_order(region: &Region) -> Vec<Site> {
    let mut keyed: Vec<(i64, Site)> = region
        .sites()
        .iter()
        .map(|s| (region.dist2_to_complement(s), s.clone()))
        .collect();
    keyed.sort();
    keyed.into_iter().map(|(_, s)| s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(c: &[i32]) -> Site {
        Site::new(c.to_vec())
    }

    #[test]
    fn cube_sizes() {
        assert_eq!(cube(0, 2).unwrap().sites(), &[s(&[0, 0])]);
        assert_eq!(cube(1, 2).unwrap().len(), 9);
        assert_eq!(cube(2, 3).unwrap().len(), 125);
        assert!(cube(-1, 2).is_err());
        assert!(cube(1, 0).is_err());
    }

    #[test]
    fn single_site_boundaries() {
        let r = cube(0, 2).unwrap();
        let ext = r.exterior_boundary();
        let mut want = vec![s(&[1, 0]), s(&[-1, 0]), s(&[0, 1]), s(&[0, -1])];
        want.sort();
        assert_eq!(ext, want);
        assert_eq!(r.interior_boundary(), vec![s(&[0, 0])]);
    }

    #[test]
    fn box_boundaries() {
        let r1 = cube(1, 2).unwrap();
        assert_eq!(r1.exterior_boundary().len(), 12);
        let inner = r1.interior_boundary();
        assert_eq!(inner.len(), 8);
        assert!(!inner.contains(&s(&[0, 0])));
        assert_eq!(cube(2, 2).unwrap().interior_boundary().len(), 16);
    }

    #[test]
    fn empty_region_has_empty_boundary() {
        let r = Region::from_sites(2, Vec::new()).unwrap();
        assert!(r.exterior_boundary().is_empty());
        assert!(r.interior_boundary().is_empty());
    }

    #[test]
    fn edge_set_counts() {
        let r = cube(1, 2).unwrap();
        let es = edge_sets(&r, None, GhostScheme::Single).unwrap();
        assert_eq!(es.internal.len(), 12);
        assert_eq!(es.closure.len(), 24);
        assert_eq!(es.external.len(), 9);
        assert!(es.internal.iter().all(|e| es.closure.contains(e)));
    }

    #[test]
    fn split_edges_follow_field_sign() {
        let r = cube(0, 1).unwrap();
        let es = edge_sets(&r, Some(&[-0.7]), GhostScheme::Split).unwrap();
        assert_eq!(es.minus_edges().count(), 1);
        assert_eq!(es.plus_edges().count(), 0);
        let r2 = cube(0, 2).unwrap();
        let es = edge_sets(&r2, Some(&[0.0]), GhostScheme::Split).unwrap();
        assert!(es.external.is_empty());
        assert!(matches!(
            edge_sets(&r2, None, GhostScheme::Split),
            Err(Error::MissingField)
        ));
    }

    #[test]
    fn distances_match_search_on_boxes() {
        let r = cube(2, 2).unwrap();
        let generic = Region::from_sites(2, r.sites().to_vec()).unwrap();
        // from_sites recognises full boxes, so force the generic path
        let mut g = generic.clone();
        g.is_box = false;
        for site in r.sites() {
            assert_eq!(
                r.dist2_to_complement(site),
                g.dist2_to_complement(site),
                "{site}"
            );
        }
    }

    #[test]
    fn vertex_order_ring_first() {
        let r = cube(1, 2).unwrap();
        let order = vertex_order(&r);
        assert_eq!(order.last().unwrap(), &s(&[0, 0]));
        let r2 = cube(2, 2).unwrap();
        let order = vertex_order(&r2);
        let ring = r2.interior_boundary();
        assert!(order[..16].iter().all(|x| ring.contains(x)));
        assert_eq!(vertex_order(&cube(0, 3).unwrap()), vec![Site::origin(3)]);
    }

    #[test]
    fn edge_order_boundary_first() {
        let r = cube(1, 2).unwrap();
        let es = edge_sets(&r, None, GhostScheme::Single).unwrap();
        let order = es.ordered(&r);
        let ring: HashSet<Site> = r.interior_boundary().into_iter().collect();
        let last_touching = order
            .iter()
            .rposition(|e| {
                e.lattice_endpoints()
                    .iter()
                    .any(|x| ring.contains(*x) || !r.contains(x))
                    && edge_dist2(&r, e) == 1
            })
            .unwrap();
        let first_deep = order.iter().position(|e| edge_dist2(&r, e) > 1).unwrap();
        assert!(last_touching < first_deep);
        // ties: internal before external, then lexicographic
        let ties: Vec<&Edge> = order.iter().filter(|e| edge_dist2(&r, e) == 0).collect();
        assert!(ties.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(order, es.ordered(&r));
    }

    #[test]
    fn singleton_edge_order_is_lexicographic() {
        let r = cube(0, 2).unwrap();
        let es = edge_sets(&r, None, GhostScheme::Single).unwrap();
        let order = es.ordered(&r);
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
        assert!(order.last().unwrap().ghost().is_some());
    }

    #[test]
    fn complement_components_in_one_dimension() {
        let r = cube(1, 1).unwrap();
        let ext = r.exterior_boundary();
        let c = r.complement_components(&ext);
        assert_ne!(c[0], c[1]);
        let r2 = cube(1, 2).unwrap();
        let ext2 = r2.exterior_boundary();
        let c2 = r2.complement_components(&ext2);
        assert!(c2.iter().all(|&l| l == c2[0]));
    }

    #[test]
    fn hole_is_its_own_component() {
        let ring: Vec<Site> = cube(1, 2)
            .unwrap()
            .sites()
            .iter()
            .filter(|x| **x != Site::origin(2))
            .cloned()
            .collect();
        let r = Region::from_sites(2, ring).unwrap();
        let ext = r.exterior_boundary();
        assert!(ext.contains(&Site::origin(2)));
        let c = r.complement_components(&ext);
        let hole = ext.iter().position(|x| *x == Site::origin(2)).unwrap();
        let other = (0..ext.len()).find(|&i| i != hole).unwrap();
        assert_ne!(c[hole], c[other]);
        assert_eq!(r.dist2_to_complement(&s(&[1, 0])), 1);
    }
}
