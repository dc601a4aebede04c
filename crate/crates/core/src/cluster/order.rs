//! Increasing events on `{0,1}^m` and exact domination checks.
//!
//! `sup_A (μ(A) - ν(A))` over all increasing events `A` is a maximum-weight
//! closure problem on the Boolean lattice, solved exactly by a minimum cut.
//! This covers every increasing event at once instead of listing them.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Largest excess `μ(A) - ν(A)` over increasing events `A` (at least 0, the
/// empty event). `μ ≤ ν` stochastically iff the result is 0 up to rounding.
/// Laws are indexed by bit masks over `m` coordinates.
pub fn domination_gap(mu: &[f64], nu: &[f64], m: usize) -> Result<f64> {
    let size = 1usize << m;
    if mu.len() != size || nu.len() != size {
        return Err(Error::DomainMismatch(format!(
            "laws need {size} entries, got {} and {}",
            mu.len(),
            nu.len()
        )));
    }
    if m > 16 {
        return Err(Error::CapExceeded {
            what: "domination check coordinates",
            needed: m,
            cap: 16,
        });
    }
    let (src, sink) = (size, size + 1);
    let mut g = FlowGraph::new(size + 2);
    let mut positive = 0.0;
    for v in 0..size {
        let w = mu[v] - nu[v];
        if w > 0.0 {
            g.add(src, v, w);
            positive += w;
        } else if w < 0.0 {
            g.add(v, sink, -w);
        }
        for i in 0..m {
            if v >> i & 1 == 0 {
                // choosing v forces every configuration above it
                g.add(v, v | 1 << i, f64::INFINITY);
            }
        }
    }
    let cut = g.max_flow(src, sink);
    Ok((positive - cut).max(0.0))
}

/// Indicator of the up-closure of `generators` on `{0,1}^m`.
pub fn upset_closure(generators: &[u64], m: usize) -> Vec<bool> {
    let size = 1usize << m;
    let mut up = vec![false; size];
    for &g in generators {
        up[g as usize] = true;
    }
    for i in 0..m {
        for v in 0..size {
            if v >> i & 1 == 1 && up[v ^ 1 << i] {
                up[v] = true;
            }
        }
    }
    up
}

struct Arc {
    to: usize,
    cap: f64,
}

struct FlowGraph {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    next: Vec<usize>,
}

const EPS: f64 = 1e-300;

impl FlowGraph {
    fn new(n: usize) -> Self {
        Self {
            arcs: Vec::new(),
            adj: vec![Vec::new(); n],
            level: vec![0; n],
            next: vec![0; n],
        }
    }

    fn add(&mut self, a: usize, b: usize, cap: f64) {
        self.adj[a].push(self.arcs.len());
        self.arcs.push(Arc { to: b, cap });
        self.adj[b].push(self.arcs.len());
        self.arcs.push(Arc { to: a, cap: 0.0 });
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &id in &self.adj[v] {
                let a = &self.arcs[id];
                if a.cap > EPS && self.level[a.to] < 0 {
                    self.level[a.to] = self.level[v] + 1;
                    queue.push_back(a.to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, v: usize, t: usize, pushed: f64) -> f64 {
        if v == t {
            return pushed;
        }
        while self.next[v] < self.adj[v].len() {
            let id = self.adj[v][self.next[v]];
            let (to, cap) = (self.arcs[id].to, self.arcs[id].cap);
            if cap > EPS && self.level[to] == self.level[v] + 1 {
                let got = self.dfs(to, t, pushed.min(cap));
                if got > 0.0 {
                    self.arcs[id].cap -= got;
                    self.arcs[id ^ 1].cap += got;
                    return got;
                }
            }
            self.next[v] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        while self.bfs(s, t) {
            self.next.iter_mut().for_each(|n| *n = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= 0.0 {
                    break;
                }
                flow += f;
            }
        }
        flow
    }
}
