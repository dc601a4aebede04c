//! Quenched random field realizations.
//!
//! Each site draws its value from its own stream keyed by `(seed, coords)`, so
//! the realization on a sub-box is the restriction of the realization on any
//! larger box with the same seed.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::lattice::{Region, Site};
use crate::rng::{chain_rng, hash_words, unit_f64};

type InverseCdf = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type AbsCdf = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied field law: an inverse CDF, the function `δ -> P(|H| < δ)`,
/// and the declared atom `ν({0})`.
#[derive(Clone)]
pub struct GeneralField {
    pub name: String,
    inverse_cdf: InverseCdf,
    prob_abs_below: AbsCdf,
    atom_at_zero: f64,
}

impl GeneralField {
    pub fn new(
        name: impl Into<String>,
        inverse_cdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        prob_abs_below: impl Fn(f64) -> f64 + Send + Sync + 'static,
        atom_at_zero: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&atom_at_zero) {
            return Err(Error::InvalidParameter(format!(
                "atom mass {atom_at_zero} not in [0,1]"
            )));
        }
        Ok(Self {
            name: name.into(),
            inverse_cdf: Arc::new(inverse_cdf),
            prob_abs_below: Arc::new(prob_abs_below),
            atom_at_zero,
        })
    }

    /// Point mass at `v`.
    pub fn point_mass(v: f64) -> Self {
        Self {
            name: format!("point{v}"),
            inverse_cdf: Arc::new(move |_| v),
            prob_abs_below: Arc::new(move |d| if v.abs() < d { 1.0 } else { 0.0 }),
            atom_at_zero: if v == 0.0 { 1.0 } else { 0.0 },
        }
    }
}

impl fmt::Debug for GeneralField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralField")
            .field("name", &self.name)
            .field("atom_at_zero", &self.atom_at_zero)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum FieldDistribution {
    Bimodal,
    Gaussian,
    General(GeneralField),
}

impl FieldDistribution {
    pub fn name(&self) -> &str {
        match self {
            FieldDistribution::Bimodal => "bimodal",
            FieldDistribution::Gaussian => "gaussian",
            FieldDistribution::General(g) => &g.name,
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "bimodal" => Ok(FieldDistribution::Bimodal),
            "gaussian" => Ok(FieldDistribution::Gaussian),
            other => Err(Error::InvalidParameter(format!(
                "unknown field distribution {other:?}; general laws must be built in code"
            ))),
        }
    }

    /// `ν({0})`.
    pub fn atom_at_zero(&self) -> f64 {
        match self {
            FieldDistribution::Bimodal | FieldDistribution::Gaussian => 0.0,
            FieldDistribution::General(g) => g.atom_at_zero,
        }
    }

    /// `P(|H_x| < δ)`.
    pub fn prob_abs_below(&self, delta: f64) -> f64 {
        if delta <= 0.0 {
            return 0.0;
        }
        match self {
            FieldDistribution::Bimodal => {
                if delta > 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            FieldDistribution::Gaussian => libm::erf(delta / std::f64::consts::SQRT_2),
            FieldDistribution::General(g) => (g.prob_abs_below)(delta),
        }
    }

    /// Draws the value at one site from its keyed stream.
    pub fn sample_site(&self, seed: u64, site: &Site) -> f64 {
        let mut rng = chain_rng(hash_words(seed, &[site.key()]));
        match self {
            FieldDistribution::Bimodal => {
                if rng.gen::<u64>() >> 63 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            FieldDistribution::Gaussian => rng.sample(StandardNormal),
            FieldDistribution::General(g) => (g.inverse_cdf)(unit_f64(rng.gen())),
        }
    }
}

/// Field values `h_x` on a region, aligned with the region's site order.
#[derive(Clone, Debug)]
pub struct FieldRealization {
    region: Region,
    values: Vec<f64>,
    dist: String,
    seed: u64,
}

pub fn sample_field(dist: &FieldDistribution, region: &Region, seed: u64) -> FieldRealization {
    let values = region
        .sites()
        .iter()
        .map(|s| dist.sample_site(seed, s))
        .collect();
    FieldRealization {
        region: region.clone(),
        values,
        dist: dist.name().to_string(),
        seed,
    }
}

impl FieldRealization {
    pub fn from_values(region: &Region, values: Vec<f64>, dist: &str, seed: u64) -> Result<Self> {
        if values.len() != region.len() {
            return Err(Error::DomainMismatch(format!(
                "{} values for {} sites",
                values.len(),
                region.len()
            )));
        }
        Ok(Self {
            region: region.clone(),
            values,
            dist: dist.to_string(),
            seed,
        })
    }

    /// `h ≡ c`, used for the constant-field models.
    pub fn constant(region: &Region, c: f64) -> Self {
        Self {
            region: region.clone(),
            values: vec![c; region.len()],
            dist: format!("const{c}"),
            seed: 0,
        }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dist_name(&self) -> &str {
        &self.dist
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn value(&self, s: &Site) -> Option<f64> {
        self.region.index_of(s).map(|i| self.values[i])
    }

    /// `|h|`.
    pub fn abs(&self) -> FieldRealization {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.abs());
        out
    }

    /// Restriction to a sub-region.
    pub fn restrict(&self, sub: &Region) -> Result<FieldRealization> {
        let values = sub
            .sites()
            .iter()
            .map(|s| {
                self.value(s).ok_or_else(|| {
                    Error::DomainMismatch(format!("site {s} outside the field's box"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FieldRealization::from_values(sub, values, &self.dist, self.seed)
    }

    /// Writes the textual field format.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let boxs = match self.region.half_width() {
            Some(l) => l.to_string(),
            None => "-".to_string(),
        };
        writeln!(
            w,
            "dim {}, box {}, dist {}, seed {}",
            self.region.dim(),
            boxs,
            self.dist,
            self.seed
        )?;
        let integral = self
            .values
            .iter()
            .all(|v| v.fract() == 0.0 && v.abs() < 1e15);
        for (s, v) in self.region.sites().iter().zip(&self.values) {
            for c in s.coords() {
                write!(w, "{c} ")?;
            }
            if integral {
                writeln!(w, "{}", *v as i64)?;
            } else {
                writeln!(w, "{v:.16e}")?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<FieldRealization> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty field file".into(),
        })?;
        let header = header?;
        let mut dim = None;
        let mut dist = None;
        let mut seed = None;
        for part in header.split(',') {
            let mut kv = part.split_whitespace();
            let (k, v) = match (kv.next(), kv.next()) {
                (Some(k), Some(v)) => (k, v),
                _ => {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("bad header field {part:?}"),
                    })
                }
            };
            let bad = |m: &str| Error::Parse {
                line: 1,
                msg: m.to_string(),
            };
            match k {
                "dim" => dim = Some(v.parse::<usize>().map_err(|_| bad("bad dim"))?),
                "box" => {}
                "dist" => dist = Some(v.to_string()),
                "seed" => seed = Some(v.parse::<u64>().map_err(|_| bad("bad seed"))?),
                _ => return Err(bad(&format!("unknown header key {k}"))),
            }
        }
        let (dim, dist, seed) = match (dim, dist, seed) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "header needs dim, dist and seed".into(),
                })
            }
        };
        let mut pairs = Vec::new();
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != dim + 1 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {} fields", dim + 1),
                });
            }
            let coords = toks[..dim]
                .iter()
                .map(|t| t.parse::<i32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                })?;
            let v: f64 =
                toks[dim]
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| Error::Parse {
                        line: i + 1,
                        msg: e.to_string(),
                    })?;
            pairs.push((Site::new(coords), v));
        }
        let region = Region::from_sites(dim, pairs.iter().map(|(s, _)| s.clone()))?;
        if region.len() != pairs.len() {
            return Err(Error::Parse {
                line: 0,
                msg: "duplicate sites".into(),
            });
        }
        let mut values = vec![0.0; region.len()];
        for (s, v) in pairs {
            values[region.index_of(&s).expect("inserted")] = v;
        }
        FieldRealization::from_values(&region, values, &dist, seed)
    }
}

/// `𝓗_x = H·h_x`.
pub fn effective_field(h: &FieldRealization, strength: f64) -> Vec<f64> {
    h.values.iter().map(|v| strength * v).collect()
}
