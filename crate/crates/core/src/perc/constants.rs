//! Percolation thresholds of `Z^d` and their crossing-probability check.

use std::collections::{BTreeMap, VecDeque};

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{chain_rng, hash_words, threshold};
use crate::stats::{Estimate, Welford};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PercKind {
    Bond,
    Site,
}

impl PercKind {
    pub fn name(self) -> &'static str {
        match self {
            PercKind::Bond => "bond",
            PercKind::Site => "site",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalConstant {
    pub value: f64,
    pub provenance: String,
}

/// `p_c^b(d)` and `p_c^s(d)`, each with where the number comes from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalConstants {
    table: BTreeMap<(PercKind, usize), CriticalConstant>,
}

impl Default for CriticalConstants {
    fn default() -> Self {
        Self::standard()
    }
}

impl CriticalConstants {
    /// d = 1 and bond d = 2 are exact; the rest are numerical literature values.
    pub fn standard() -> Self {
        let mut c = Self {
            table: BTreeMap::new(),
        };
        c.set(PercKind::Bond, 1, 1.0, "exact: p_c = 1 in one dimension");
        c.set(PercKind::Site, 1, 1.0, "exact: p_c = 1 in one dimension");
        c.set(
            PercKind::Bond,
            2,
            0.5,
            "exact: square-lattice self-duality (Kesten 1980)",
        );
        c.set(
            PercKind::Site,
            2,
            0.592746,
            "literature: Newman and Ziff 2000, 0.59274621(13)",
        );
        c.set(
            PercKind::Bond,
            3,
            0.2488126,
            "literature: Lorenz and Ziff 1998, 0.2488126(5)",
        );
        c.set(
            PercKind::Site,
            3,
            0.3116077,
            "literature: Deng and Blote 2005, 0.3116077(2)",
        );
        c
    }

    fn set(&mut self, kind: PercKind, d: usize, value: f64, provenance: &str) {
        self.table.insert(
            (kind, d),
            CriticalConstant {
                value,
                provenance: provenance.to_string(),
            },
        );
    }

    /// Replaces one entry; the provenance records the override.
    pub fn with_override(mut self, kind: PercKind, d: usize, value: f64) -> Result<Self> {
        if !(value > 0.0 && value <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "critical probability {value}"
            )));
        }
        self.set(kind, d, value, "override");
        Ok(self)
    }

    pub fn get(&self, kind: PercKind, d: usize) -> Result<&CriticalConstant> {
        self.table
            .get(&(kind, d))
            .ok_or_else(|| Error::MissingConstant(format!("{} threshold for d = {d}", kind.name())))
    }

    pub fn bond(&self, d: usize) -> Result<f64> {
        Ok(self.get(PercKind::Bond, d)?.value)
    }

    pub fn site(&self, d: usize) -> Result<f64> {
        Ok(self.get(PercKind::Site, d)?.value)
    }

    pub fn entries(&self) -> impl Iterator<Item = (PercKind, usize, &CriticalConstant)> {
        self.table.iter().map(|(&(k, d), c)| (k, d, c))
    }

    /// `β_P(d) = -ln(1 - p_c^b(d)) / 2`; infinite when `p_c^b = 1`.
    pub fn beta_p(&self, d: usize) -> Result<f64> {
        let p = self.bond(d)?;
        if p >= 1.0 {
            return Ok(f64::INFINITY);
        }
        Ok(-(1.0 - p).ln() / 2.0)
    }
}

/// `β_P(d)` with the standard constants.
pub fn beta_p(d: usize) -> Result<f64> {
    CriticalConstants::standard().beta_p(d)
}

/// Probability that independent percolation on `{0..L-1}^d` with parameter
/// `p` has an open path between the faces `x_0 = 0` and `x_0 = L-1`.
pub fn crossing_probability(
    kind: PercKind,
    d: usize,
    p: f64,
    l: usize,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    if d == 0 || l < 2 || samples < 2 {
        return Err(Error::InvalidParameter(
            "need d >= 1, L >= 2 and at least 2 samples".into(),
        ));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("probability {p}")));
    }
    let n = l
        .checked_pow(d as u32)
        .ok_or_else(|| Error::InvalidParameter("box too large".into()))?;
    let strides: Vec<usize> = (0..d).map(|k| l.pow(k as u32)).collect();
    let t = threshold(p);
    let mut rng = chain_rng(hash_words(
        seed,
        &[kind as u64, d as u64, l as u64, p.to_bits()],
    ));
    let mut site_open = vec![true; n];
    // bond k of site i joins i and i + strides[k]
    let mut bond_open = vec![true; n * d];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    let mut acc = Welford::new();
    let coord = |i: usize, k: usize| (i / strides[k]) % l;
    for _ in 0..samples {
        match kind {
            PercKind::Site => site_open.iter_mut().for_each(|o| *o = rng.next_u64() < t),
            PercKind::Bond => bond_open.iter_mut().for_each(|o| *o = rng.next_u64() < t),
        }
        seen.iter_mut().for_each(|s| *s = false);
        queue.clear();
        for i in (0..n).filter(|&i| coord(i, 0) == 0 && site_open[i]) {
            seen[i] = true;
            queue.push_back(i);
        }
        let mut crossed = false;
        while let Some(i) = queue.pop_front() {
            if coord(i, 0) == l - 1 {
                crossed = true;
                break;
            }
            for k in 0..d {
                let c = coord(i, k);
                if c + 1 < l {
                    let j = i + strides[k];
                    if !seen[j] && site_open[j] && bond_open[i * d + k] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
                if c > 0 {
                    let j = i - strides[k];
                    if !seen[j] && site_open[j] && bond_open[j * d + k] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        acc.push(crossed as u8 as f64);
    }
    Ok(acc.estimate())
}

/// Crossing probabilities at `p_c ± eps` on two box sizes. Below the
/// threshold the crossing probability falls as the box grows, above it rises.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantCheck {
    pub kind: PercKind,
    pub d: usize,
    pub value: f64,
    pub eps: f64,
    pub sizes: (usize, usize),
    /// `[below small, below large, above small, above large]`.
    pub crossings: [Estimate; 4],
    pub bracketed: bool,
}

pub fn verify_constant(
    consts: &CriticalConstants,
    kind: PercKind,
    d: usize,
    eps: f64,
    sizes: (usize, usize),
    samples: usize,
    seed: u64,
) -> Result<ConstantCheck> {
    let value = consts.get(kind, d)?.value;
    if value >= 1.0 {
        return Err(Error::Unsupported("no crossing check for p_c = 1".into()));
    }
    let (lo, hi) = ((value - eps).max(0.0), (value + eps).min(1.0));
    let run = |p: f64, l: usize, k: u64| {
        crossing_probability(kind, d, p, l, samples, hash_words(seed, &[k]))
    };
    let crossings = [
        run(lo, sizes.0, 0)?,
        run(lo, sizes.1, 1)?,
        run(hi, sizes.0, 2)?,
        run(hi, sizes.1, 3)?,
    ];
    let falls = crossings[1].upper(2.0) < crossings[0].lower(2.0);
    let rises = crossings[3].lower(2.0) > crossings[2].upper(2.0);
    Ok(ConstantCheck {
        kind,
        d,
        value,
        eps,
        sizes,
        crossings,
        bracketed: falls && rises,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_p_values() {
        assert!((beta_p(2).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!(beta_p(1).unwrap().is_infinite());
        let c = CriticalConstants::standard()
            .with_override(PercKind::Bond, 3, 0.2488)
            .unwrap();
        // 1 - e^{-2β} = 0.2488
        let oracle = -(0.7512f64).ln() / 2.0;
        assert!((c.beta_p(3).unwrap() - oracle).abs() < 1e-15);
        assert!((c.beta_p(3).unwrap() - 0.14304).abs() < 1e-5);
        assert!(matches!(c.beta_p(4), Err(Error::MissingConstant(_))));
        assert_eq!(c.get(PercKind::Bond, 3).unwrap().provenance, "override");
    }

    #[test]
    fn crossing_extremes() {
        for kind in [PercKind::Bond, PercKind::Site] {
            assert_eq!(
                crossing_probability(kind, 2, 0.0, 8, 10, 1).unwrap().value,
                0.0
            );
            assert_eq!(
                crossing_probability(kind, 2, 1.0, 8, 10, 1).unwrap().value,
                1.0
            );
        }
        // d = 1 site crossing of length L needs all L sites open
        let e = crossing_probability(PercKind::Site, 1, 0.9, 5, 40_000, 3).unwrap();
        assert!((e.value - 0.9f64.powi(5)).abs() < 4.0 * e.stderr);
    }

    #[test]
    fn square_bond_threshold_is_bracketed() {
        let c = verify_constant(
            &CriticalConstants::standard(),
            PercKind::Bond,
            2,
            0.08,
            (8, 32),
            2000,
            5,
        )
        .unwrap();
        assert!(c.bracketed, "{c:?}");
    }
}
