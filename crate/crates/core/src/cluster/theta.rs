//! Finite-volume percolation probabilities `θ_n = P_{Λ_n,w}(0 ↔ ∂_in Λ_n)`
//! under the wired single-ghost measure, by Swendsen–Wang alternation.
//!
//! With wired boundary the exterior sites and the ghost form one block of
//! spin `+1`, so a `+` site is anchored to it with probability
//! `1 - (1-p_1)^k (1-p_2)` where `k` counts its exterior neighbors. The
//! connectivity event uses internal edges of `Λ_n` only.

use std::io::Write;

use rand::RngCore;
use serde::Serialize;

use super::UnionFind;
use crate::error::{Error, Result};
use crate::rng::{chain_rng, hash_words, threshold, ChainRng};
use crate::stats::{Estimate, Welford};

/// Swendsen–Wang chain on `Λ_n = [-n, n]^d` with wired boundary and constant
/// field; `q = 1` gives independent bond percolation.
#[derive(Clone, Debug)]
pub struct ThetaSampler {
    q: u32,
    len: usize,
    origin: usize,
    /// Forward internal neighbors, CSR.
    offsets: Vec<u32>,
    fwd: Vec<u32>,
    n_exterior: Vec<u8>,
    inner_boundary: Vec<bool>,
    t_bond: u64,
    t_anchor: Vec<u64>,
    spins: Vec<i8>,
    anchored: Vec<bool>,
    root_flags: Vec<u8>,
    uf: UnionFind,
    rng: ChainRng,
}

const ANCHOR: u8 = 1;
const TOUCHES: u8 = 2;
const ASSIGNED: u8 = 4;
const PLUS: u8 = 8;

impl ThetaSampler {
    pub fn new(beta: f64, strength: f64, n: usize, d: usize, q: u32, seed: u64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0 && strength.is_finite() && strength >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta = {beta}, H = {strength}"
            )));
        }
        if q != 1 && q != 2 {
            return Err(Error::Unsupported(format!(
                "sampling needs q in {{1, 2}}, got {q}"
            )));
        }
        if d == 0 {
            return Err(Error::InvalidParameter("d must be >= 1".into()));
        }
        let side = 2 * n + 1;
        let len = side
            .checked_pow(d as u32)
            .filter(|&l| l < u32::MAX as usize)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("box side {side} too large in d = {d}"))
            })?;
        let mut offsets = Vec::with_capacity(len + 1);
        let mut fwd = Vec::with_capacity(len * d);
        let mut n_exterior = Vec::with_capacity(len);
        let mut inner_boundary = Vec::with_capacity(len);
        offsets.push(0);
        let mut coords = vec![0usize; d];
        for i in 0..len {
            let mut x = i;
            for c in coords.iter_mut() {
                *c = x % side;
                x /= side;
            }
            let mut stride = 1;
            let mut ext = 0u8;
            for &c in &coords {
                if c + 1 < side {
                    fwd.push((i + stride) as u32);
                } else {
                    ext += 1;
                }
                if c == 0 {
                    ext += 1;
                }
                stride *= side;
            }
            offsets.push(fwd.len() as u32);
            n_exterior.push(ext);
            inner_boundary.push(ext > 0);
        }
        let origin = (0..d).fold(0, |acc, _| acc * side + n);
        let p1 = -(-2.0 * beta).exp_m1();
        let p2 = -(-2.0 * strength).exp_m1();
        let t_anchor = (0..=2 * d)
            .map(|k| threshold(1.0 - (1.0 - p1).powi(k as i32) * (1.0 - p2)))
            .collect();
        Ok(Self {
            q,
            len,
            origin,
            offsets,
            fwd,
            n_exterior,
            inner_boundary,
            t_bond: threshold(p1),
            t_anchor,
            spins: vec![1; len],
            anchored: vec![false; len],
            root_flags: vec![0; len],
            uf: UnionFind::new(len),
            rng: chain_rng(seed),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// One sweep: bonds from spins, then spins from bonds. Returns whether the
    /// bond configuration drawn in this sweep connects the origin to `∂_in Λ_n`.
    pub fn sweep(&mut self) -> bool {
        self.uf.reset();
        for i in 0..self.len {
            let si = self.spins[i];
            self.anchored[i] =
                si == 1 && self.rng.next_u64() < self.t_anchor[self.n_exterior[i] as usize];
            for k in self.offsets[i]..self.offsets[i + 1] {
                let j = self.fwd[k as usize] as usize;
                if self.spins[j] == si && self.rng.next_u64() < self.t_bond {
                    self.uf.union(i, j);
                }
            }
        }
        self.root_flags.iter_mut().for_each(|f| *f = 0);
        for i in 0..self.len {
            let r = self.uf.find(i);
            if self.anchored[i] {
                self.root_flags[r] |= ANCHOR;
            }
            if self.inner_boundary[i] {
                self.root_flags[r] |= TOUCHES;
            }
        }
        let hit = self.root_flags[self.uf.find(self.origin)] & TOUCHES != 0;
        if self.q == 2 {
            for i in 0..self.len {
                let r = self.uf.find(i);
                let f = self.root_flags[r];
                if f & ASSIGNED == 0 {
                    let plus = f & ANCHOR != 0 || self.rng.next_u64() >> 63 == 1;
                    self.root_flags[r] |= ASSIGNED | if plus { PLUS } else { 0 };
                }
                self.spins[i] = if self.root_flags[r] & PLUS != 0 {
                    1
                } else {
                    -1
                };
            }
        }
        hit
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaEstimate {
    pub beta: f64,
    pub strength: f64,
    pub q: u32,
    pub n: usize,
    pub d: usize,
    pub estimate: Estimate,
    pub replicas: usize,
    pub sweeps: usize,
    pub seed: u64,
}

/// `θ_n` from `replicas` independent chains, each started from all `+`,
/// run `burn_in` sweeps and then measured on `sweeps` further sweeps. The
/// error is the standard error over replica means.
#[allow(clippy::too_many_arguments)]
pub fn theta_n_estimate(
    beta: f64,
    strength: f64,
    n: usize,
    d: usize,
    q: u32,
    replicas: usize,
    sweeps: usize,
    burn_in: usize,
    seed: u64,
) -> Result<ThetaEstimate> {
    if replicas < 2 || sweeps == 0 {
        return Err(Error::InvalidParameter(
            "need at least 2 replicas and 1 sweep".into(),
        ));
    }
    let mut w = Welford::new();
    let mut sampler = ThetaSampler::new(beta, strength, n, d, q, seed)?;
    for r in 0..replicas {
        sampler.spins.iter_mut().for_each(|s| *s = 1);
        sampler.rng = chain_rng(hash_words(seed, &[r as u64]));
        for _ in 0..burn_in {
            sampler.sweep();
        }
        let hits = (0..sweeps).filter(|_| sampler.sweep()).count();
        w.push(hits as f64 / sweeps as f64);
    }
    Ok(ThetaEstimate {
        beta,
        strength,
        q,
        n,
        d,
        estimate: Estimate {
            value: w.mean(),
            stderr: (w.variance() / replicas as f64).sqrt(),
            n: replicas,
        },
        replicas,
        sweeps,
        seed,
    })
}

/// One line of the `θ_n` sweep table.
pub type ThetaRow = ThetaEstimate;

/// Writes `beta,H,q,n,estimate,stderr,replicas,sweeps,seed`.
pub fn write_theta_csv<W: Write>(mut w: W, rows: &[ThetaRow]) -> Result<()> {
    writeln!(w, "# schema_version=1")?;
    writeln!(w, "beta,H,q,n,estimate,stderr,replicas,sweeps,seed")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{:.10e},{:.10e},{},{},{}",
            r.beta,
            r.strength,
            r.q,
            r.n,
            r.estimate.value,
            r.estimate.stderr,
            r.replicas,
            r.sweeps,
            r.seed
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_cases() {
        let e = theta_n_estimate(0.0, 0.7, 3, 2, 2, 20, 5, 2, 1).unwrap();
        assert_eq!(e.estimate.value, 0.0);
        let e = theta_n_estimate(0.4, 0.1, 0, 2, 2, 20, 5, 2, 1).unwrap();
        assert_eq!(e.estimate.value, 1.0);
    }

    #[test]
    fn q_one_matches_one_dimensional_percolation() {
        // in d=1, 0 reaches ±n iff all n edges on one side are open
        let (beta, n) = (0.5, 3);
        let p = 1.0 - (-2.0 * beta as f64).exp();
        let side = p.powi(n as i32);
        let exact = 1.0 - (1.0 - side) * (1.0 - side);
        let e = theta_n_estimate(beta, 0.0, n, 1, 1, 200, 200, 0, 5).unwrap();
        assert!((e.estimate.value - exact).abs() < 3.0 * e.estimate.stderr + 1e-3);
    }

    /// Exact `θ_2` in d = 2, q = 2 by summing over spins: the event depends on
    /// the 24 edges inside `Λ_1` or from `Λ_1` to the ring `Λ_2 \ Λ_1`. For an
    /// exact configuration `O` of those edges,
    /// `P(O) ∝ Π_{O} p Π_{S\O} (1-p) · Σ_{σ : O ⊆ Agree(σ)} R(σ)`,
    /// where `R` collects the factors `(1-p) + p δ` of all other edges.
    fn exact_theta2(beta: f64, strength: f64) -> f64 {
        let p1 = 1.0 - (-2.0 * beta).exp();
        let p2 = 1.0 - (-2.0 * strength).exp();
        let f = |p: f64, agree: bool| if agree { 1.0 } else { 1.0 - p };
        let coord = |i: usize| (i % 5, i / 5);
        let idx = |x: usize, y: usize| y * 5 + x;
        let inner_sites: Vec<usize> = (0..25)
            .filter(|&i| {
                let (x, y) = coord(i);
                (1..=3).contains(&x) && (1..=3).contains(&y)
            })
            .collect();
        let ring_sites: Vec<usize> = (0..25).filter(|i| !inner_sites.contains(i)).collect();
        let pos = |v: &[usize], i: usize| v.iter().position(|&x| x == i).unwrap();
        // internal edges of the 5x5 box
        let mut edges = Vec::new();
        for y in 0..5 {
            for x in 0..5 {
                if x + 1 < 5 {
                    edges.push((idx(x, y), idx(x + 1, y)));
                }
                if y + 1 < 5 {
                    edges.push((idx(x, y), idx(x, y + 1)));
                }
            }
        }
        let inner_flag: Vec<bool> = (0..25).map(|i| inner_sites.contains(&i)).collect();
        let is_inner = |i: usize| inner_flag[i];
        let s_edges: Vec<(usize, usize)> = edges
            .iter()
            .cloned()
            .filter(|&(a, b)| is_inner(a) || is_inner(b))
            .collect();
        assert_eq!(s_edges.len(), 24);
        let ring_edges: Vec<(usize, usize)> = edges
            .iter()
            .cloned()
            .filter(|&(a, b)| !is_inner(a) && !is_inner(b))
            .collect();
        let n_ext = |i: usize| {
            let (x, y) = coord(i);
            (x == 0) as i32 + (x == 4) as i32 + (y == 0) as i32 + (y == 4) as i32
        };
        // ring factor over ring configurations (bit = 1 means +)
        let ring_factor: Vec<f64> = (0..1usize << 16)
            .map(|rc| {
                let sp = |i: usize| rc >> pos(&ring_sites, i) & 1 == 1;
                let mut w = 1.0;
                for &(a, b) in &ring_edges {
                    w *= f(p1, sp(a) == sp(b));
                }
                for &i in &ring_sites {
                    w *= f(p1, sp(i)).powi(n_ext(i)) * f(p2, sp(i));
                }
                w
            })
            .collect();
        let inner_factor: Vec<f64> = (0..512usize)
            .map(|ic| {
                inner_sites
                    .iter()
                    .enumerate()
                    .map(|(k, _)| f(p2, ic >> k & 1 == 1))
                    .product()
            })
            .collect();
        // agreement bits of the 24 event edges, split by source
        let mut inner_agree = vec![0u32; 512];
        let mut inner_exp = vec![0u32; 512];
        let mut ring_exp = vec![0u32; 1 << 16];
        for ic in 0..512usize {
            for (k, &(a, b)) in s_edges.iter().enumerate() {
                if is_inner(a) && is_inner(b) {
                    let (sa, sb) = (
                        ic >> pos(&inner_sites, a) & 1,
                        ic >> pos(&inner_sites, b) & 1,
                    );
                    inner_agree[ic] |= ((sa == sb) as u32) << k;
                } else {
                    let i = if is_inner(a) { a } else { b };
                    inner_exp[ic] |= ((ic >> pos(&inner_sites, i) & 1) as u32) << k;
                }
            }
        }
        let cross_mask: u32 = s_edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| !(is_inner(a) && is_inner(b)))
            .fold(0, |m, (k, _)| m | 1 << k);
        for (rc, slot) in ring_exp.iter_mut().enumerate() {
            for (k, &(a, b)) in s_edges.iter().enumerate() {
                if cross_mask >> k & 1 == 1 {
                    let r = if is_inner(a) { b } else { a };
                    *slot |= ((rc >> pos(&ring_sites, r) & 1) as u32) << k;
                }
            }
        }
        let mut table = vec![0.0f64; 1 << 24];
        for ic in 0..512 {
            for rc in 0..1usize << 16 {
                let agree = inner_agree[ic] | (!(inner_exp[ic] ^ ring_exp[rc]) & cross_mask);
                table[agree as usize] += inner_factor[ic] * ring_factor[rc];
            }
        }
        let z: f64 = table
            .iter()
            .enumerate()
            .map(|(a, &w)| {
                w * (0..24)
                    .filter(|k| a >> k & 1 == 0)
                    .map(|_| 1.0 - p1)
                    .product::<f64>()
            })
            .sum();
        // superset sums
        for k in 0..24 {
            for a in 0..1usize << 24 {
                if a >> k & 1 == 0 {
                    table[a] += table[a | 1 << k];
                }
            }
        }
        let centre = idx(2, 2);
        let mut theta = 0.0;
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); 25];
        for (k, &(a, b)) in s_edges.iter().enumerate() {
            adj[a].push((b, k));
            adj[b].push((a, k));
        }
        let pow_open: Vec<f64> = (0..=24)
            .map(|k| p1.powi(k) * (1.0 - p1).powi(24 - k))
            .collect();
        for o in 0..1usize << 24 {
            // does the centre reach the ring through open edges of o?
            let mut seen = 1u32 << centre;
            let mut stack = [0usize; 25];
            let mut top = 1;
            stack[0] = centre;
            let mut hit = false;
            'search: while top > 0 {
                top -= 1;
                let v = stack[top];
                for &(w, k) in &adj[v] {
                    if o >> k & 1 == 1 && seen >> w & 1 == 0 {
                        if !is_inner(w) {
                            hit = true;
                            break 'search;
                        }
                        seen |= 1 << w;
                        stack[top] = w;
                        top += 1;
                    }
                }
            }
            if hit {
                theta += pow_open[o.count_ones() as usize] * table[o];
            }
        }
        theta / z
    }

    #[test]
    fn theta2_against_exact_sum() {
        let (beta, strength) = (0.35, 0.1);
        let exact = exact_theta2(beta, strength);
        let e = theta_n_estimate(beta, strength, 2, 2, 2, 400, 100, 20, 42).unwrap();
        let z = (e.estimate.value - exact).abs() / e.estimate.stderr;
        assert!(
            z < 3.0,
            "estimate {} ± {} vs exact {exact}",
            e.estimate.value,
            e.estimate.stderr
        );
    }

    #[test]
    fn csv_header() {
        let e = theta_n_estimate(0.0, 0.0, 1, 2, 2, 2, 1, 0, 0).unwrap();
        let mut buf = Vec::new();
        write_theta_csv(&mut buf, &[e]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(
            s.starts_with("# schema_version=1\nbeta,H,q,n,estimate,stderr,replicas,sweeps,seed\n")
        );
    }
}
