//! Small statistics helpers: running moments, batch means, jackknife.

use serde::Serialize;

/// A point estimate with its standard error and the number of samples behind it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: 0.0,
            n: 0,
        }
    }

    pub fn lower(&self, z: f64) -> f64 {
        self.value - z * self.stderr
    }

    pub fn upper(&self, z: f64) -> f64 {
        self.value + z * self.stderr
    }
}

/// Welford running mean and variance.
#[derive(Clone, Copy, Debug, Default)]
pub struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean assuming independent samples.
    pub fn estimate(&self) -> Estimate {
        let se = if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        };
        Estimate {
            value: self.mean,
            stderr: se,
            n: self.n,
        }
    }
}

/// Mean of correlated samples with a batch-means standard error.
pub fn batch_means(samples: &[f64], batches: usize) -> Estimate {
    let n = samples.len();
    let mean = if n == 0 {
        0.0
    } else {
        samples.iter().sum::<f64>() / n as f64
    };
    let batches = batches.max(2).min(n.max(1));
    if n < 2 || batches < 2 {
        return Estimate {
            value: mean,
            stderr: 0.0,
            n,
        };
    }
    let size = n / batches;
    let mut w = Welford::new();
    for b in 0..batches {
        let chunk = &samples[b * size..(b + 1) * size];
        w.push(chunk.iter().sum::<f64>() / size as f64);
    }
    Estimate {
        value: mean,
        stderr: (w.variance() / batches as f64).sqrt(),
        n,
    }
}

/// Delete-one-group jackknife for a statistic of several per-batch means.
///
/// `groups[b][k]` is the mean of observable `k` over batch `b`; `stat` maps a
/// vector of observable means to the quantity of interest.
pub fn jackknife<F>(groups: &[Vec<f64>], n_samples: usize, stat: F) -> Estimate
where
    F: Fn(&[f64]) -> f64,
{
    let b = groups.len();
    let k = groups.first().map_or(0, |g| g.len());
    let mut total = vec![0.0; k];
    for g in groups {
        for (t, v) in total.iter_mut().zip(g) {
            *t += v;
        }
    }
    let full: Vec<f64> = total.iter().map(|t| t / b as f64).collect();
    let value = stat(&full);
    if b < 2 {
        return Estimate {
            value,
            stderr: 0.0,
            n: n_samples,
        };
    }
    let mut leave = vec![0.0; b];
    for (i, g) in groups.iter().enumerate() {
        let partial: Vec<f64> = total
            .iter()
            .zip(g)
            .map(|(t, v)| (t - v) / (b - 1) as f64)
            .collect();
        leave[i] = stat(&partial);
    }
    let lm = leave.iter().sum::<f64>() / b as f64;
    let var = leave.iter().map(|x| (x - lm).powi(2)).sum::<f64>() * (b - 1) as f64 / b as f64;
    Estimate {
        value,
        stderr: var.sqrt(),
        n: n_samples,
    }
}
