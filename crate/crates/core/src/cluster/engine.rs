//! Exact conditional edge probabilities for random cluster measures whose
//! bond count is beyond brute enumeration but whose region is small.
//!
//! The bond weight is summed against spins instead of bonds: for every spin
//! configuration `σ` of the region (`q^n` of them) the edge factors
//! `(1-p) + p·δ` factorize, ghosts and ghost-bearing boundary blocks carry
//! fixed spins, and a boundary block without a ghost is summed over its own
//! spin with a correction that removes the extra factor `q` it receives when
//! all its edges are closed (such a block is not a cluster meeting the region).
//! Revealing an edge replaces its factor by `p·δ` (open) or `1-p` (closed),
//! which keeps the identity exact under any history of revealed edges.

use super::{RcMode, RcModel, UnionFind};
use crate::error::{Error, Result};

/// Default cap on `q^n` spin configurations.
pub const DEFAULT_ENGINE_CAP: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Unknown,
    Open,
    Closed,
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    /// Both endpoints in the region.
    Pair(usize, usize),
    /// Region site against a vertex of fixed spin.
    Fixed(usize, u8),
    /// Region site against a free boundary block.
    Block(usize, usize),
}

#[derive(Clone, Debug)]
pub struct SpinSumEngine {
    q: usize,
    n: usize,
    name: String,
    digits: Vec<u8>,
    kind: Vec<Kind>,
    p: Vec<f64>,
    block_edges: Vec<Vec<usize>>,
    state: Vec<State>,
    /// Product over non-block edges, per spin configuration.
    base: Vec<f64>,
    /// Block factors, `block_val[b][σ]`.
    block_val: Vec<Vec<f64>>,
    /// `base · Π block_val`.
    total: Vec<f64>,
    initial: Option<Box<(Vec<f64>, Vec<Vec<f64>>, Vec<f64>)>>,
}

impl SpinSumEngine {
    pub fn new(model: &RcModel, name: &str, cap: usize) -> Result<Self> {
        let q = model.q() as usize;
        if model.mode() != RcMode::Constant && q != 2 {
            return Err(Error::Unsupported("two-ghost measures need q = 2".into()));
        }
        let n = model.region().len();
        let nconf = (q as f64).powi(n as i32);
        if nconf > cap as f64 {
            return Err(Error::CapExceeded {
                what: "spin configurations",
                needed: nconf as usize,
                cap,
            });
        }
        let nconf = nconf as usize;
        let mut digits = vec![0u8; nconf * n];
        for c in 0..nconf {
            let mut x = c;
            for i in 0..n {
                digits[c * n + i] = (x % q) as u8;
                x /= q;
            }
        }
        // blocks of boundary vertices and ghosts joined by the boundary links
        let nv = model.n_vertices();
        let mut uf = UnionFind::new(nv);
        for l in model.links() {
            uf.union(l.a as usize, l.b as usize);
        }
        let ghost_ids: Vec<usize> = model.ghosts().iter().map(|g| model.ghost_id(*g)).collect();
        if model.mode() == RcMode::Abs {
            uf.union(ghost_ids[0], ghost_ids[1]);
        }
        let mut fixed: Vec<Option<u8>> = vec![None; nv];
        for (k, &g) in ghost_ids.iter().enumerate() {
            let spin = if model.mode() == RcMode::Signed {
                k as u8
            } else {
                0
            };
            let r = uf.find(g);
            match fixed[r] {
                Some(s) if s != spin => {
                    return Err(Error::Unreachable(format!(
                        "{name}: boundary joins g+ and g-"
                    )));
                }
                _ => fixed[r] = Some(spin),
            }
        }
        let mut block_of = vec![usize::MAX; nv];
        let mut block_edges: Vec<Vec<usize>> = Vec::new();
        let mut kind = Vec::with_capacity(model.n_edges());
        for e in 0..model.n_edges() {
            let (a, b) = model.endpoints(e);
            let k = if model.is_region_id(b) {
                Kind::Pair(a, b)
            } else {
                let r = uf.find(b);
                match fixed[r] {
                    Some(s) => Kind::Fixed(a, s),
                    None => {
                        if block_of[r] == usize::MAX {
                            block_of[r] = block_edges.len();
                            block_edges.push(Vec::new());
                        }
                        block_edges[block_of[r]].push(e);
                        Kind::Block(a, block_of[r])
                    }
                }
            };
            kind.push(k);
        }
        let nb = block_edges.len();
        let mut eng = SpinSumEngine {
            q,
            n,
            name: name.to_string(),
            digits,
            kind,
            p: model.edge_params().to_vec(),
            block_edges,
            state: vec![State::Unknown; model.n_edges()],
            base: vec![1.0; nconf],
            block_val: vec![vec![1.0; nconf]; nb],
            total: vec![1.0; nconf],
            initial: None,
        };
        for c in 0..nconf {
            eng.recompute(c);
        }
        eng.initial = Some(Box::new((
            eng.base.clone(),
            eng.block_val.clone(),
            eng.total.clone(),
        )));
        Ok(eng)
    }

    pub fn n_edges(&self) -> usize {
        self.p.len()
    }

    /// Forgets every revealed edge.
    pub fn reset(&mut self) {
        let init = self.initial.as_ref().expect("initialized");
        self.base.copy_from_slice(&init.0);
        for (dst, src) in self.block_val.iter_mut().zip(&init.1) {
            dst.copy_from_slice(src);
        }
        self.total.copy_from_slice(&init.2);
        self.state.iter_mut().for_each(|s| *s = State::Unknown);
    }

    #[inline]
    fn spin(&self, c: usize, i: usize) -> u8 {
        self.digits[c * self.n + i]
    }

    #[inline]
    fn factor(&self, e: usize, st: State, agree: bool) -> f64 {
        let p = self.p[e];
        match st {
            State::Unknown => {
                if agree {
                    1.0
                } else {
                    1.0 - p
                }
            }
            State::Open => {
                if agree {
                    p
                } else {
                    0.0
                }
            }
            State::Closed => 1.0 - p,
        }
    }

    #[inline]
    fn edge_factor(&self, e: usize, c: usize, st: State) -> f64 {
        match self.kind[e] {
            Kind::Pair(a, b) => self.factor(e, st, self.spin(c, a) == self.spin(c, b)),
            Kind::Fixed(a, s) => self.factor(e, st, self.spin(c, a) == s),
            Kind::Block(..) => unreachable!("block edges are summed per block"),
        }
    }

    /// `Σ_s Π_{e∈b} g_e(σ, s) - (q-1)·1{no edge of b open}·Π (1-p_e)`,
    /// with `override_edge` forced to the given state.
    fn block_factor(&self, b: usize, c: usize, override_edge: Option<(usize, State)>) -> f64 {
        let st = |e: usize| match override_edge {
            Some((x, s)) if x == e => s,
            _ => self.state[e],
        };
        let edges = &self.block_edges[b];
        let mut sum = 0.0;
        for s in 0..self.q as u8 {
            let mut prod = 1.0;
            for &e in edges {
                let Kind::Block(a, _) = self.kind[e] else {
                    unreachable!()
                };
                prod *= self.factor(e, st(e), self.spin(c, a) == s);
            }
            sum += prod;
        }
        if edges.iter().all(|&e| st(e) != State::Open) {
            let closed: f64 = edges.iter().map(|&e| 1.0 - self.p[e]).product();
            sum -= (self.q - 1) as f64 * closed;
        }
        sum.max(0.0)
    }

    fn recompute(&mut self, c: usize) {
        let mut base = 1.0;
        for e in 0..self.p.len() {
            if !matches!(self.kind[e], Kind::Block(..)) {
                base *= self.edge_factor(e, c, self.state[e]);
            }
        }
        self.base[c] = base;
        let mut total = base;
        for b in 0..self.block_edges.len() {
            let v = self.block_factor(b, c, None);
            self.block_val[b][c] = v;
            total *= v;
        }
        self.total[c] = total;
    }

    /// Current constrained partition function, up to the global constant
    /// shared by all histories.
    pub fn weight(&self) -> f64 {
        self.total.iter().sum()
    }

    /// `P(ω_e = 1 | revealed edges)`.
    pub fn prob_open(&self, e: usize) -> Result<f64> {
        match self.state[e] {
            State::Open => return Ok(1.0),
            State::Closed => return Ok(0.0),
            State::Unknown => {}
        }
        let den = self.weight();
        if den.is_nan() || den <= 0.0 {
            return Err(Error::Unreachable(self.name.clone()));
        }
        let nconf = self.total.len();
        let mut num = 0.0;
        match self.kind[e] {
            Kind::Block(_, b) => {
                for c in 0..nconf {
                    let old = self.block_val[b][c];
                    let rest = if old > 0.0 {
                        self.total[c] / old
                    } else {
                        self.base[c]
                            * (0..self.block_edges.len())
                                .filter(|&x| x != b)
                                .map(|x| self.block_val[x][c])
                                .product::<f64>()
                    };
                    if rest != 0.0 {
                        num += rest * self.block_factor(b, c, Some((e, State::Open)));
                    }
                }
            }
            _ => {
                for c in 0..nconf {
                    let t = self.total[c];
                    if t == 0.0 {
                        continue;
                    }
                    let open = self.edge_factor(e, c, State::Open);
                    if open != 0.0 {
                        num += t * open / self.edge_factor(e, c, State::Unknown);
                    }
                }
            }
        }
        Ok((num / den).clamp(0.0, 1.0))
    }

    /// Fixes edge `e`; fails if the resulting history has probability zero.
    pub fn reveal(&mut self, e: usize, open: bool) -> Result<()> {
        if self.state[e] != State::Unknown {
            return Err(Error::InvalidParameter(format!("edge {e} revealed twice")));
        }
        let new = if open { State::Open } else { State::Closed };
        let nconf = self.total.len();
        match self.kind[e] {
            Kind::Block(_, b) => {
                self.state[e] = new;
                for c in 0..nconf {
                    let old = self.block_val[b][c];
                    let v = self.block_factor(b, c, None);
                    self.block_val[b][c] = v;
                    if old > 0.0 {
                        self.total[c] = self.total[c] / old * v;
                    } else {
                        self.recompute(c);
                    }
                }
            }
            _ => {
                for c in 0..nconf {
                    let old = self.edge_factor(e, c, State::Unknown);
                    let v = self.edge_factor(e, c, new);
                    if old > 0.0 {
                        self.base[c] = self.base[c] / old * v;
                        self.total[c] = self.total[c] / old * v;
                    } else {
                        self.state[e] = new;
                        self.recompute(c);
                        self.state[e] = State::Unknown;
                    }
                }
                self.state[e] = new;
            }
        }
        if self.weight() <= 0.0 {
            return Err(Error::Unreachable(self.name.clone()));
        }
        Ok(())
    }
}
