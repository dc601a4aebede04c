//! Exact one-dimensional chain by transfer matrices.

use crate::error::{Error, Result};

const SV: [f64; 2] = [1.0, -1.0];

/// Ising chain `0..n` with field `𝓗_k` and boundary spins `left`, `right`
/// (0 for free) on the two exterior sites.
#[derive(Clone, Debug)]
pub struct Chain1d {
    beta: f64,
    field: Vec<f64>,
    alpha: Vec<[f64; 2]>,
    gamma: Vec<[f64; 2]>,
    scale: Vec<f64>,
}

impl Chain1d {
    pub fn new(beta: f64, field: &[f64], left: f64, right: f64) -> Result<Self> {
        let n = field.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty chain".into()));
        }
        let mut alpha = vec![[0.0; 2]; n];
        let mut scale = vec![1.0; n];
        for s in 0..2 {
            alpha[0][s] = (beta * left * SV[s] + field[0] * SV[s]).exp();
        }
        scale[0] = alpha[0][0] + alpha[0][1];
        alpha[0] = [alpha[0][0] / scale[0], alpha[0][1] / scale[0]];
        for k in 1..n {
            let mut a = [0.0; 2];
            for s in 0..2 {
                for t in 0..2 {
                    a[s] += alpha[k - 1][t] * (beta * SV[t] * SV[s]).exp();
                }
                a[s] *= (field[k] * SV[s]).exp();
            }
            scale[k] = a[0] + a[1];
            alpha[k] = [a[0] / scale[k], a[1] / scale[k]];
        }
        let mut gamma = vec![[0.0; 2]; n];
        gamma[n - 1] = [(beta * right).exp(), (-beta * right).exp()];
        for k in (0..n - 1).rev() {
            let mut g = [0.0; 2];
            for s in 0..2 {
                for t in 0..2 {
                    g[s] += (beta * SV[s] * SV[t]).exp()
                        * (field[k + 1] * SV[t]).exp()
                        * gamma[k + 1][t];
                }
            }
            let c = g[0] + g[1];
            gamma[k] = [g[0] / c, g[1] / c];
        }
        Ok(Self {
            beta,
            field: field.to_vec(),
            alpha,
            gamma,
            scale,
        })
    }

    pub fn len(&self) -> usize {
        self.field.len()
    }

    pub fn is_empty(&self) -> bool {
        self.field.is_empty()
    }

    pub fn magnetization(&self, i: usize) -> f64 {
        let (a, g) = (self.alpha[i], self.gamma[i]);
        (a[0] * g[0] - a[1] * g[1]) / (a[0] * g[0] + a[1] * g[1])
    }

    pub fn two_point(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if i == j {
            return 1.0;
        }
        let mut v = [self.alpha[i][0], -self.alpha[i][1]];
        for k in i + 1..=j {
            let mut w = [0.0; 2];
            for s in 0..2 {
                for t in 0..2 {
                    w[s] += v[t] * (self.beta * SV[t] * SV[s]).exp();
                }
                w[s] *= (self.field[k] * SV[s]).exp() / self.scale[k];
            }
            v = w;
        }
        let g = self.gamma[j];
        let a = self.alpha[j];
        (v[0] * g[0] - v[1] * g[1]) / (a[0] * g[0] + a[1] * g[1])
    }

    pub fn truncated(&self, i: usize, j: usize) -> f64 {
        self.two_point(i, j) - self.magnetization(i) * self.magnetization(j)
    }
}
