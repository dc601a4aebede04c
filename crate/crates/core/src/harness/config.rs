//! Flat `key = value` experiment configuration.
//!
//! One setting per line, `#` starts a comment, lists are comma separated.
//! Keys that an experiment does not use are accepted and recorded, so a
//! config file fully describes its run. Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::fnv1a;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    OracleVerify,
    CouplingVerify,
    KerteszScan,
    DecayFit,
    ThresholdTable,
    MixingTv,
    VerifyConstants,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::OracleVerify,
        Experiment::CouplingVerify,
        Experiment::KerteszScan,
        Experiment::DecayFit,
        Experiment::ThresholdTable,
        Experiment::MixingTv,
        Experiment::VerifyConstants,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::OracleVerify => "oracle-verify",
            Experiment::CouplingVerify => "coupling-verify",
            Experiment::KerteszScan => "kertesz-scan",
            Experiment::DecayFit => "decay-fit",
            Experiment::ThresholdTable => "threshold-table",
            Experiment::MixingTv => "mixing-tv",
            Experiment::VerifyConstants => "verify-constants",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

/// Everything a run depends on. Defaults depend on the experiment; see
/// [`ExperimentConfig::defaults`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub beta: f64,
    /// Field strength `H`.
    pub strength: f64,
    pub q: u32,
    pub d: usize,
    /// Box sizes: half-widths for `coupling-verify` and `mixing-tv`, the
    /// `θ_n` schedule for `kertesz-scan`, the side length for `decay-fit`,
    /// crossing box sides for `verify-constants`.
    pub sizes: Vec<usize>,
    /// Field law: `bimodal`, `gaussian`, or `point:<v>`.
    pub field: String,
    /// Spin boundary of `decay-fit`: `plus`, `minus` or `free`.
    pub boundary: String,
    pub replicas: usize,
    pub sweeps: usize,
    pub burn_in: usize,
    /// Monte Carlo samples (outer level for the multilevel estimators).
    pub samples: usize,
    /// Per-level budget of the nested boxes.
    pub inner_samples: usize,
    pub inner_burn_in: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Largest number of binary variables enumerated in one exact computation.
    pub cap: usize,
    pub threads: usize,
    /// Seeded runs per coupling.
    pub runs: usize,
    /// Random parameter draws per tiny-suite instance.
    pub draws: usize,
    /// Tiny suite: `n` is a chain of `n` sites, `AxB` an `A` by `B` rectangle.
    pub instances: Vec<String>,
    /// Test hook: perturbs the joint weight used by the consistency check.
    pub corrupt_weight: bool,
    pub distances: Vec<usize>,
    pub betas: Vec<f64>,
    /// Field strengths of the initial Kertész grid.
    pub grid: Vec<f64>,
    pub width: f64,
    pub max_probes: usize,
    pub eps: f64,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            beta: 0.25,
            strength: 0.3,
            q: 2,
            d: 2,
            sizes: vec![],
            field: "bimodal".into(),
            boundary: "free".into(),
            replicas: 10_000,
            sweeps: 1,
            burn_in: 10,
            samples: 20_000,
            inner_samples: 40,
            inner_burn_in: 20,
            seed: 1,
            out: PathBuf::from("out"),
            cap: 20,
            threads: 0,
            runs: 100_000,
            draws: 5,
            instances: ["1", "2", "3", "4", "5", "6", "1x1", "2x1", "3x1"]
                .map(String::from)
                .to_vec(),
            corrupt_weight: false,
            distances: vec![4, 8, 16, 32],
            betas: (0..=10).map(|k| k as f64 / 10.0).collect(),
            grid: vec![0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0],
            width: 0.05,
            max_probes: 12,
            eps: 0.05,
        };
        match experiment {
            Experiment::CouplingVerify => {
                c.sizes = vec![1];
                c.field = "gaussian".into();
            }
            Experiment::KerteszScan => {
                c.beta = 0.4;
                c.sizes = vec![8, 16, 32, 64];
            }
            Experiment::DecayFit => c.sizes = vec![96],
            Experiment::MixingTv => {
                c.sizes = vec![4, 8, 12, 16];
                c.samples = 20_000;
                c.burn_in = 100;
            }
            Experiment::VerifyConstants => {
                c.sizes = vec![8, 32];
                c.samples = 2000;
                c.eps = 0.08;
            }
            Experiment::OracleVerify | Experiment::ThresholdTable => {}
        }
        c
    }

    /// Parses config text; `experiment` must come first or be implied by
    /// `default_kind`.
    pub fn parse(text: &str, default_kind: Option<Experiment>) -> Result<Self> {
        let mut pairs = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: k + 1,
                msg: "expected key = value".into(),
            })?;
            pairs.push((k + 1, key.trim().to_string(), value.trim().to_string()));
        }
        let kind = match pairs.iter().find(|(_, k, _)| k == "experiment") {
            Some((_, _, v)) => {
                let e: Experiment = v.parse()?;
                if let Some(d) = default_kind {
                    if d != e {
                        return Err(Error::Config(format!("config is for {e}, command is {d}")));
                    }
                }
                e
            }
            None => default_kind.ok_or_else(|| Error::Config("no experiment given".into()))?,
        };
        let mut c = Self::defaults(kind);
        for (line, key, value) in pairs {
            c.set(&key, &value).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
        }
        Ok(c)
    }

    pub fn load(path: &Path, default_kind: Option<Experiment>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, default_kind)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
        }
        fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| num(key, s))
                .collect()
        }
        match key {
            "experiment" => {
                if value.parse::<Experiment>()? != self.experiment {
                    return Err(Error::Config("experiment cannot change".into()));
                }
            }
            "beta" => self.beta = num(key, value)?,
            "strength" | "H" => self.strength = num(key, value)?,
            "q" => self.q = num(key, value)?,
            "d" => self.d = num(key, value)?,
            "sizes" => self.sizes = list(key, value)?,
            "field" => self.field = value.to_string(),
            "boundary" => self.boundary = value.to_string(),
            "replicas" => self.replicas = num(key, value)?,
            "sweeps" => self.sweeps = num(key, value)?,
            "burn_in" => self.burn_in = num(key, value)?,
            "samples" => self.samples = num(key, value)?,
            "inner_samples" => self.inner_samples = num(key, value)?,
            "inner_burn_in" => self.inner_burn_in = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "cap" => self.cap = num(key, value)?,
            "threads" => self.threads = num(key, value)?,
            "runs" => self.runs = num(key, value)?,
            "draws" => self.draws = num(key, value)?,
            "instances" => self.instances = list(key, value)?,
            "corrupt_weight" => self.corrupt_weight = num(key, value)?,
            "distances" => self.distances = list(key, value)?,
            "betas" => self.betas = list(key, value)?,
            "grid" => self.grid = list(key, value)?,
            "width" => self.width = num(key, value)?,
            "max_probes" => self.max_probes = num(key, value)?,
            "eps" => self.eps = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Canonical text: every key, fixed order, round-trip float formatting.
    pub fn to_text(&self) -> String {
        fn join<T: fmt::Display>(v: &[T]) -> String {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        put("experiment", self.experiment.to_string());
        put("beta", format!("{:?}", self.beta));
        put("strength", format!("{:?}", self.strength));
        put("q", self.q.to_string());
        put("d", self.d.to_string());
        put("sizes", join(&self.sizes));
        put("field", self.field.clone());
        put("boundary", self.boundary.clone());
        put("replicas", self.replicas.to_string());
        put("sweeps", self.sweeps.to_string());
        put("burn_in", self.burn_in.to_string());
        put("samples", self.samples.to_string());
        put("inner_samples", self.inner_samples.to_string());
        put("inner_burn_in", self.inner_burn_in.to_string());
        put("seed", self.seed.to_string());
        put("out", self.out.display().to_string());
        put("cap", self.cap.to_string());
        put("threads", self.threads.to_string());
        put("runs", self.runs.to_string());
        put("draws", self.draws.to_string());
        put("instances", self.instances.join(","));
        put("corrupt_weight", self.corrupt_weight.to_string());
        put("distances", join(&self.distances));
        put(
            "betas",
            self.betas
                .iter()
                .map(|b| format!("{b:?}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        put(
            "grid",
            self.grid
                .iter()
                .map(|b| format!("{b:?}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        put("width", format!("{:?}", self.width));
        put("max_probes", self.max_probes.to_string());
        put("eps", format!("{:?}", self.eps));
        s
    }

    /// FNV-1a of the canonical text, minus the output directory and thread
    /// count, which do not affect results.
    pub fn hash(&self) -> u64 {
        let text: String = self
            .to_text()
            .lines()
            .filter(|l| !l.starts_with("out =") && !l.starts_with("threads ="))
            .flat_map(|l| [l, "\n"])
            .collect();
        fnv1a(text.as_bytes())
    }
}
