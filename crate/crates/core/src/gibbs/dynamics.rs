use std::collections::HashMap;
use std::io::Write;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::lattice::{Region, Site};
use crate::rng::{chain_rng, threshold, ChainRng};
use crate::stats::{jackknife, Estimate};

use super::{logistic, IsingSystem, SpinBoundary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SweepOrder {
    /// Sites in region order.
    #[default]
    Raster,
    /// `n` uniformly chosen sites per sweep.
    RandomSequential,
}

/// Integer thresholds for `P(σ_x = + | m_x)`, one row per site.
#[derive(Clone, Debug)]
struct Table {
    stride: usize,
    shift: i32,
    t: Vec<u64>,
}

impl Table {
    fn new(sys: &IsingSystem) -> Self {
        let maxdeg = (0..sys.len())
            .map(|i| sys.neighbors(i).len())
            .max()
            .unwrap_or(0);
        let stride = 2 * maxdeg + 1;
        let mut t = vec![0; stride * sys.len()];
        for i in 0..sys.len() {
            for k in 0..stride {
                let m = k as f64 - maxdeg as f64;
                let lf = sys.beta() * (m + sys.boundary_sum(i)) + sys.field()[i];
                t[i * stride + k] = threshold(logistic(2.0 * lf));
            }
        }
        Self {
            stride,
            shift: maxdeg as i32,
            t,
        }
    }

    #[inline]
    fn get(&self, i: usize, m: i32) -> u64 {
        self.t[i * self.stride + (m + self.shift) as usize]
    }
}

#[inline]
fn neighbor_sum(sys: &IsingSystem, s: &[i8], i: usize) -> i32 {
    sys.neighbors(i).iter().map(|&j| s[j as usize] as i32).sum()
}

/// Single-site heat-bath chain.
#[derive(Clone, Debug)]
pub struct HeatBath {
    sys: IsingSystem,
    table: Table,
    spins: Vec<i8>,
    rng: ChainRng,
    order: SweepOrder,
}

impl HeatBath {
    pub fn new(sys: IsingSystem, init: Vec<i8>, seed: u64, order: SweepOrder) -> Result<Self> {
        if init.len() != sys.len() {
            return Err(Error::DomainMismatch("initial configuration size".into()));
        }
        let table = Table::new(&sys);
        Ok(Self {
            sys,
            table,
            spins: init,
            rng: chain_rng(seed),
            order,
        })
    }

    pub fn system(&self) -> &IsingSystem {
        &self.sys
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    #[inline]
    fn update(&mut self, i: usize) {
        let m = neighbor_sum(&self.sys, &self.spins, i);
        let bits = self.rng.next_u64();
        self.spins[i] = if bits < self.table.get(i, m) { 1 } else { -1 };
    }

    pub fn sweep(&mut self) {
        let n = self.sys.len();
        match self.order {
            SweepOrder::Raster => (0..n).for_each(|i| self.update(i)),
            SweepOrder::RandomSequential => {
                for _ in 0..n {
                    let i = self.rng.gen_range(0..n);
                    self.update(i);
                }
            }
        }
    }

    /// Rao-Blackwellized `⟨σ_x⟩` contribution: `tanh(β m_x + 𝓗_x)`.
    pub fn conditional_mean(&self, i: usize) -> f64 {
        self.sys.local_field(&self.spins, i).tanh()
    }
}

/// Two heat-bath chains on the same graph driven by the same uniforms.
///
/// With ordered boundary data and ordered initial states the pair stays
/// ordered forever (the update is monotone in the neighbors).
#[derive(Clone, Debug)]
pub struct CoupledHeatBath {
    a: IsingSystem,
    b: IsingSystem,
    ta: Table,
    tb: Table,
    sa: Vec<i8>,
    sb: Vec<i8>,
    rng: ChainRng,
}

impl CoupledHeatBath {
    pub fn new(
        a: IsingSystem,
        b: IsingSystem,
        init_a: Vec<i8>,
        init_b: Vec<i8>,
        seed: u64,
    ) -> Result<Self> {
        if a.len() != b.len() || init_a.len() != a.len() || init_b.len() != b.len() {
            return Err(Error::DomainMismatch(
                "coupled chains need equal sizes".into(),
            ));
        }
        if (0..a.len()).any(|i| a.neighbors(i) != b.neighbors(i)) {
            return Err(Error::DomainMismatch(
                "coupled chains need the same graph".into(),
            ));
        }
        let (ta, tb) = (Table::new(&a), Table::new(&b));
        Ok(Self {
            a,
            b,
            ta,
            tb,
            sa: init_a,
            sb: init_b,
            rng: chain_rng(seed),
        })
    }

    pub fn sweep(&mut self) {
        for i in 0..self.a.len() {
            let bits = self.rng.next_u64();
            let ma = neighbor_sum(&self.a, &self.sa, i);
            let mb = neighbor_sum(&self.b, &self.sb, i);
            self.sa[i] = if bits < self.ta.get(i, ma) { 1 } else { -1 };
            self.sb[i] = if bits < self.tb.get(i, mb) { 1 } else { -1 };
        }
    }

    pub fn spins_a(&self) -> &[i8] {
        &self.sa
    }

    pub fn spins_b(&self) -> &[i8] {
        &self.sb
    }

    pub fn disagreements(&self) -> usize {
        self.sa.iter().zip(&self.sb).filter(|(x, y)| x != y).count()
    }

    /// `tanh(local field under a) - tanh(local field under b)` at site `i`.
    pub fn conditional_mean_diff(&self, i: usize) -> f64 {
        let ma = neighbor_sum(&self.a, &self.sa, i);
        let mb = neighbor_sum(&self.b, &self.sb, i);
        if ma == mb && self.a.boundary_sum(i) == self.b.boundary_sum(i) {
            return 0.0;
        }
        self.a.local_field(&self.sa, i).tanh() - self.b.local_field(&self.sb, i).tanh()
    }
}

/// Monte Carlo estimates of `⟨σ_x⟩`, `⟨σ_xσ_y⟩` and the truncated two-point
/// function from a sample stream.
#[derive(Clone, Copy, Debug)]
pub struct SampledObservables {
    pub magnetization: Estimate,
    pub two_point: Estimate,
    pub truncated: Estimate,
}

/// Batch jackknife over the samples (which may be autocorrelated; use
/// batches much longer than the autocorrelation time).
pub fn sample_observables(
    samples: &[Vec<i8>],
    x: usize,
    y: usize,
    batches: usize,
) -> Result<SampledObservables> {
    let n = samples.len();
    let batches = batches.clamp(2, n.max(2));
    if n < batches {
        return Err(Error::InvalidParameter(format!(
            "{n} samples for {batches} batches"
        )));
    }
    let size = n / batches;
    let groups: Vec<Vec<f64>> = (0..batches)
        .map(|b| {
            let chunk = &samples[b * size..(b + 1) * size];
            let mut g = [0.0; 3];
            for s in chunk {
                g[0] += s[x] as f64;
                g[1] += s[y] as f64;
                g[2] += (s[x] * s[y]) as f64;
            }
            g.iter().map(|v| v / size as f64).collect()
        })
        .collect();
    let used = size * batches;
    Ok(SampledObservables {
        magnetization: jackknife(&groups, used, |m| m[0]),
        two_point: jackknife(&groups, used, |m| m[2]),
        truncated: jackknife(&groups, used, |m| m[2] - m[0] * m[1]),
    })
}

/// Plug-in TV between sampled `Δ`-marginals of two independent chains.
#[allow(clippy::too_many_arguments)]
pub fn tv_marginal_sampled(
    region: &Region,
    delta: &[Site],
    eta: &SpinBoundary,
    eta2: &SpinBoundary,
    beta: f64,
    field: &[f64],
    burn_in: usize,
    sweeps: usize,
    seed: u64,
) -> Result<Estimate> {
    let idx = delta
        .iter()
        .map(|s| {
            region
                .index_of(s)
                .ok_or_else(|| Error::DomainMismatch(format!("{s} not in the region")))
        })
        .collect::<Result<Vec<_>>>()?;
    if idx.len() > 16 {
        return Err(Error::CapExceeded {
            what: "sampled marginal sites",
            needed: idx.len(),
            cap: 16,
        });
    }
    const BATCHES: usize = 20;
    let batch_len = (sweeps / BATCHES).max(1);
    let npat = 1usize << idx.len();
    let mut groups = vec![vec![0.0; 2 * npat]; BATCHES];
    for (side, bc) in [eta, eta2].into_iter().enumerate() {
        let sys = IsingSystem::new(region, bc, beta, field)?;
        let mut chain = HeatBath::new(
            sys,
            vec![1; region.len()],
            seed ^ side as u64,
            SweepOrder::Raster,
        )?;
        for _ in 0..burn_in {
            chain.sweep();
        }
        for g in groups.iter_mut() {
            for _ in 0..batch_len {
                chain.sweep();
                let s = chain.spins();
                let pat = idx
                    .iter()
                    .enumerate()
                    .fold(0, |a, (k, &i)| a | (((s[i] > 0) as usize) << k));
                g[side * npat + pat] += 1.0 / batch_len as f64;
            }
        }
    }
    Ok(jackknife(&groups, batch_len * BATCHES, |m| {
        0.5 * (0..npat).map(|p| (m[p] - m[npat + p]).abs()).sum::<f64>()
    }))
}

#[derive(Clone, Debug)]
pub struct ObservableRow {
    pub x: Site,
    pub y: Site,
    pub estimate: Estimate,
}

fn site_field(s: &Site) -> String {
    s.coords()
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Observable dump: `x,y,estimate,stderr,n_samples`, sites as `a;b`.
pub fn write_observables_csv<W: Write>(mut w: W, rows: &[ObservableRow]) -> Result<()> {
    writeln!(w, "# schema_version=1")?;
    writeln!(w, "x,y,estimate,stderr,n_samples")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{:.12e},{:.6e},{}",
            site_field(&r.x),
            site_field(&r.y),
            r.estimate.value,
            r.estimate.stderr,
            r.estimate.n
        )?;
    }
    Ok(())
}

/// Empirical law of full configurations (codes as in `ExactDistribution`).
pub fn empirical(counts: &HashMap<usize, usize>, size: usize) -> Vec<f64> {
    let total: usize = counts.values().sum();
    let mut out = vec![0.0; size];
    for (&c, &k) in counts {
        out[c] = k as f64 / total as f64;
    }
    out
}
