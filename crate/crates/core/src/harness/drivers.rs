//! The experiment commands.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::cluster::{SpinSumEngine, DEFAULT_ENGINE_CAP};
use crate::coupling::{ConditionalMode, GrandCoupler, IsingBcCoupler, SiteCoupler};
use crate::error::{Error, Result};
use crate::fields::{
    effective_field, sample_field, FieldDistribution, FieldRealization, GeneralField,
};
use crate::gibbs::{
    boundary_influence, clamp_influence, exact_measure, nested_radii, Chain1d, InfluencePlan,
    LevelBudget, SpinBoundary,
};
use crate::lattice::{cube, Region, Site};
use crate::perc::{
    decay_fit, kertesz_scan, threshold_table, verify_constant, write_kertesz_csv,
    write_threshold_csv, CriticalConstants, DecayFit, DecayPoint, KerteszConfig, PercKind,
};
use crate::rng::{chain_rng, derive_seed, hash_words};
use crate::stats::Estimate;

use super::oracle::{run_suite, validate_suite, Check, SuiteParts};
use super::{write_checks_csv, write_file, Experiment, ExperimentConfig, Report, SCHEMA_VERSION};

/// `bimodal`, `gaussian` or `point:<v>`.
pub fn field_distribution(name: &str) -> Result<FieldDistribution> {
    if let Some(v) = name.strip_prefix("point:") {
        let v: f64 = v
            .parse()
            .map_err(|_| Error::Config(format!("bad point mass {v:?}")))?;
        return Ok(FieldDistribution::General(GeneralField::point_mass(v)));
    }
    FieldDistribution::from_name(name).map_err(|e| Error::Config(e.to_string()))
}

/// `plus`, `minus` or `free`.
pub fn spin_boundary(name: &str) -> Result<SpinBoundary> {
    match name {
        "plus" => Ok(SpinBoundary::Plus),
        "minus" => Ok(SpinBoundary::Minus),
        "free" => Ok(SpinBoundary::Free),
        other => Err(Error::Config(format!("unknown boundary {other:?}"))),
    }
}

fn fmt_site(s: &Site) -> String {
    s.coords()
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Per-check summary: count, failures and the smallest slack.
fn summarize(checks: &[Check]) -> serde_json::Value {
    let mut names: Vec<&str> = checks.iter().map(|c| c.check.as_str()).collect();
    names.dedup();
    names.sort();
    names.dedup();
    let rows: Vec<_> = names
        .iter()
        .map(|n| {
            let sel: Vec<&Check> = checks.iter().filter(|c| c.check == *n).collect();
            let min = sel.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min);
            json!({
                "check": n,
                "count": sel.len(),
                "failed": sel.iter().filter(|c| !c.passed).count(),
                "min_slack": min,
            })
        })
        .collect();
    json!(rows)
}

pub fn cmd_oracle_verify(cfg: &ExperimentConfig) -> Result<Report> {
    let insts = validate_suite(&cfg.instances, cfg.cap)?;
    let (checks, skipped) = run_suite(
        &insts,
        cfg.draws,
        cfg.seed,
        cfg.cap,
        SuiteParts::ALL,
        cfg.corrupt_weight,
    )?;
    let mut report = Report::new(Experiment::OracleVerify);
    if !skipped.is_empty() {
        report.notes.push(format!(
            "domination over all increasing events skipped on {} (too many edges)",
            skipped.join(",")
        ));
    }
    report
        .files
        .push(write_file(&cfg.out, "oracle_verify.csv", |w| {
            write_checks_csv(w, &checks)
        })?);
    report.cells = summarize(&checks);
    report.checks = checks;
    Ok(report)
}

/// Run counts and first failure of one coupling.
#[derive(Clone, Debug, Default)]
struct Tally {
    runs: u64,
    failures: u64,
    first: Option<(usize, String)>,
    /// Per-coordinate counts of open edges or `+` spins.
    counts: Vec<u64>,
}

impl Tally {
    fn new(width: usize) -> Self {
        Self {
            counts: vec![0; width],
            ..Self::default()
        }
    }

    fn fail(&mut self, k: usize, msg: String) {
        self.failures += 1;
        if self.first.as_ref().is_none_or(|(j, _)| k < *j) {
            self.first = Some((k, msg));
        }
    }

    fn add(&mut self, offset: usize, bits: impl Iterator<Item = bool>) {
        for (i, b) in bits.enumerate() {
            self.counts[offset + i] += b as u64;
        }
    }

    fn merge(mut self, o: Tally) -> Tally {
        self.runs += o.runs;
        self.failures += o.failures;
        if let Some((k, m)) = o.first {
            if self.first.as_ref().is_none_or(|(j, _)| k < *j) {
                self.first = Some((k, m));
            }
        }
        for (a, b) in self.counts.iter_mut().zip(o.counts) {
            *a += b;
        }
        self
    }

    fn max_deviation(&self, exact: &[f64]) -> f64 {
        let n = self.runs.max(1) as f64;
        self.counts
            .iter()
            .zip(exact)
            .map(|(&c, &p)| (c as f64 / n - p).abs())
            .fold(0.0, f64::max)
    }
}

/// Runs `runs` seeded runs in parallel; each job builds its own coupler.
fn tally_runs<C: Send>(
    runs: usize,
    width: usize,
    make: impl Fn() -> C + Sync + Send,
    step: impl Fn(&mut C, usize, &mut Tally) + Sync + Send,
) -> Tally {
    (0..runs)
        .into_par_iter()
        .fold(
            || (make(), Tally::new(width)),
            |(mut c, mut t), k| {
                t.runs += 1;
                step(&mut c, k, &mut t);
                (c, t)
            },
        )
        .map(|(_, t)| t)
        .reduce(|| Tally::new(width), Tally::merge)
}

struct CouplingSetup {
    region: Region,
    h: FieldRealization,
    eta: SpinBoundary,
    eta2: SpinBoundary,
    delta: Vec<Site>,
}

fn coupling_setup(cfg: &ExperimentConfig) -> Result<CouplingSetup> {
    let l = *cfg
        .sizes
        .first()
        .ok_or_else(|| Error::Config("sizes must give the box half-width".into()))?;
    let region = cube(l as i64, cfg.d)?;
    let nu = field_distribution(&cfg.field)?;
    let h = sample_field(&nu, &region, derive_seed(cfg.seed, "coupling/field"));
    let mut rng = chain_rng(derive_seed(cfg.seed, "coupling/eta"));
    let eta2 = SpinBoundary::from_fn(&region, |_| if rng.gen::<bool>() { 1 } else { -1 });
    Ok(CouplingSetup {
        delta: vec![Site::origin(cfg.d)],
        region,
        h,
        eta: SpinBoundary::Plus,
        eta2,
    })
}

fn run_seed(master: u64, kind: &str, k: usize) -> u64 {
    hash_words(
        derive_seed(master, &format!("coupling/{kind}")),
        &[k as u64],
    )
}

fn bool_bits(v: &[bool]) -> impl Iterator<Item = bool> + '_ {
    v.iter().copied()
}

fn plus_bits(v: &[i8]) -> impl Iterator<Item = bool> + '_ {
    v.iter().map(|&s| s > 0)
}

/// Seeded runs of the three couplings on `Λ_L` with boundaries `+` and a
/// random `η′`. Every run asserts its pathwise invariants; the empirical
/// one-coordinate marginals are compared with exact ones and the first
/// run's traces are replayed.
pub fn cmd_coupling_verify(cfg: &ExperimentConfig) -> Result<Report> {
    let s = coupling_setup(cfg)?;
    let (beta, hh) = (cfg.beta, cfg.strength);
    let n = s.region.len();
    let mut report = Report::new(Experiment::CouplingVerify);
    let label = format!("L={}", cfg.sizes[0]);
    let rho = crate::cluster::BondBoundary::Spins(s.eta.clone());
    let rho2 = crate::cluster::BondBoundary::Spins(s.eta2.clone());
    let make_grand = || GrandCoupler::new(&s.region, beta, hh, &s.h, &rho, &rho2);
    let probe = make_grand()?;
    let m = probe.models()[0].n_edges();
    let mut exact_bonds = Vec::with_capacity(3 * m);
    for (model, name) in probe.models().iter().zip(["rho", "rho2", "wired"]) {
        let eng = SpinSumEngine::new(model, name, DEFAULT_ENGINE_CAP)?;
        for e in 0..m {
            exact_bonds.push(eng.prob_open(e)?);
        }
    }
    let field = effective_field(&s.h, hh);
    let mut exact_spins = Vec::with_capacity(2 * n);
    for eta in [&s.eta, &s.eta2] {
        let dist = exact_measure(&s.region, eta, beta, &field, cfg.cap.max(n))?;
        exact_spins.extend((0..n).map(|i| 0.5 * (1.0 + dist.magnetization(i))));
    }

    let grand = tally_runs(
        cfg.runs,
        3 * m,
        || make_grand().expect("built once above"),
        |c, k, t| match c.run(run_seed(cfg.seed, "grand", k)) {
            Ok(out) => {
                if let Err(e) = c.check_disagreement(&out, &s.delta) {
                    t.fail(k, e.to_string());
                }
                t.add(0, bool_bits(&out.omega_rho));
                t.add(m, bool_bits(&out.omega_rho2));
                t.add(2 * m, bool_bits(&out.omega_w));
            }
            Err(e) => t.fail(k, e.to_string()),
        },
    );
    let ising = tally_runs(
        cfg.runs,
        2 * n,
        || {
            IsingBcCoupler::new(&s.region, beta, hh, &s.h, &s.eta, &s.eta2)
                .expect("same parameters as the grand coupler")
        },
        |c, k, t| match c.run(run_seed(cfg.seed, "ising", k)) {
            Ok(out) => {
                t.add(0, plus_bits(&out.sigma_eta));
                t.add(n, plus_bits(&out.sigma_eta2));
            }
            Err(e) => t.fail(k, e.to_string()),
        },
    );
    let site_coupler = SiteCoupler::new(
        &s.region,
        beta,
        hh,
        &s.h,
        &s.eta,
        &s.eta2,
        ConditionalMode::Exact { cap: cfg.cap },
        true,
    )?;
    let site = tally_runs(
        cfg.runs,
        2 * n,
        || (),
        |_, k, t| match site_coupler.run(run_seed(cfg.seed, "site", k)) {
            Ok(out) => {
                t.add(0, plus_bits(&out.sigma_eta));
                t.add(n, plus_bits(&out.sigma_eta2));
            }
            Err(e) => t.fail(k, e.to_string()),
        },
    );

    let mut cells = Vec::new();
    for (name, t, exact) in [
        ("grand", &grand, &exact_bonds),
        ("ising", &ising, &exact_spins),
        ("site", &site, &exact_spins),
    ] {
        report.checks.push(Check::new(
            &format!("{name}-assertions"),
            &label,
            0,
            t.failures as f64,
            0.0,
        ));
        let dev = t.max_deviation(exact);
        report.checks.push(Check::new(
            &format!("{name}-marginal-tv"),
            &label,
            0,
            dev,
            0.02,
        ));
        if let Some((k, msg)) = &t.first {
            report.notes.push(format!("{name}: run {k} failed: {msg}"));
        }
        cells.push(json!({
            "coupling": name,
            "runs": t.runs,
            "failures": t.failures,
            "max_marginal_tv": dev,
        }));
    }

    // replay the first logged seed
    let mut traces = Vec::new();
    let mut g = make_grand()?;
    let seed0 = run_seed(cfg.seed, "grand", 0);
    let a = g.run(seed0)?;
    let b = g.run(seed0)?;
    let mut ta = Vec::new();
    let mut tb = Vec::new();
    a.trace.write_jsonl(&mut ta)?;
    b.trace.write_jsonl(&mut tb)?;
    report.checks.push(Check::new(
        "grand-trace-replay",
        &label,
        0,
        (ta != tb) as u8 as f64,
        0.0,
    ));
    traces.extend_from_slice(&ta);
    let seed0 = run_seed(cfg.seed, "site", 0);
    let mut sa = Vec::new();
    let mut sb = Vec::new();
    site_coupler.run(seed0)?.trace.write_jsonl(&mut sa)?;
    site_coupler.run(seed0)?.trace.write_jsonl(&mut sb)?;
    report.checks.push(Check::new(
        "site-trace-replay",
        &label,
        0,
        (sa != sb) as u8 as f64,
        0.0,
    ));
    traces.extend_from_slice(&sa);
    report
        .files
        .push(write_file(&cfg.out, "coupling_trace.jsonl", |w| {
            Ok(w.write_all(&traces)?)
        })?);
    report
        .files
        .push(write_file(&cfg.out, "coupling_verify.csv", |w| {
            write_checks_csv(w, &report.checks)
        })?);
    report.cells = json!(cells);
    Ok(report)
}

pub fn cmd_kertesz_scan(cfg: &ExperimentConfig) -> Result<Report> {
    let mut k = KerteszConfig::new(cfg.beta);
    k.d = cfg.d;
    k.q = cfg.q;
    k.schedule = cfg.sizes.clone();
    k.grid = cfg.grid.clone();
    k.width = cfg.width;
    k.max_probes = cfg.max_probes;
    k.replicas = cfg.replicas;
    k.sweeps = cfg.sweeps;
    k.burn_in = cfg.burn_in;
    k.seed = cfg.seed;
    let res = kertesz_scan(&k)?;
    let mut report = Report::new(Experiment::KerteszScan);
    if res.inconclusive {
        report.notes.push("some cells were inconclusive".into());
    }
    if !res.monotone {
        report
            .notes
            .push("classifications are not monotone in H".into());
    }
    report
        .files
        .push(write_file(&cfg.out, "kertesz_scan.csv", |w| {
            write_kertesz_csv(w, std::slice::from_ref(&res))
        })?);
    report.cells = json!({
        "beta": res.beta,
        "h_lo": res.h_lo,
        "h_hi": res.h_hi,
        "inconclusive": res.inconclusive,
        "monotone": res.monotone,
        "probes": res.probes,
        "cells": res.cells.iter().map(|c| json!({"H": c.strength, "classification": c.classification.to_string()})).collect::<Vec<_>>(),
    });
    Ok(report)
}

/// A fit or the reason there is none.
#[derive(Clone, Debug, Serialize)]
pub struct FitOutcome {
    pub status: String,
    pub fit: Option<DecayFit>,
}

fn fit_points(points: &[DecayPoint]) -> Result<FitOutcome> {
    if points.iter().all(|p| p.p == 0.0) {
        return Ok(FitOutcome {
            status: "all-zero".into(),
            fit: None,
        });
    }
    match decay_fit(points) {
        Ok(f) => Ok(FitOutcome {
            status: "ok".into(),
            fit: Some(f),
        }),
        Err(Error::TooFewPoints { usable }) => Ok(FitOutcome {
            status: format!("too-few-points ({usable} usable)"),
            fit: None,
        }),
        Err(e) => Err(e),
    }
}

fn write_fit_csv<W: Write>(mut w: W, fit: &FitOutcome) -> Result<()> {
    writeln!(w, "# schema_version={SCHEMA_VERSION}")?;
    writeln!(
        w,
        "status,rate,log_prefactor,r_squared,r_min,r_max,used,excluded"
    )?;
    match &fit.fit {
        Some(f) => writeln!(
            w,
            "{},{:.10e},{:.10e},{:.10},{},{},{},{}",
            fit.status,
            f.rate,
            f.log_prefactor,
            f.r_squared,
            f.window.0,
            f.window.1,
            f.used.len(),
            f.excluded.len()
        )?,
        None => writeln!(w, "{},,,,,,,", fit.status)?,
    }
    Ok(())
}

fn plan(cfg: &ExperimentConfig) -> InfluencePlan {
    InfluencePlan {
        outer: LevelBudget {
            burn_in: cfg.burn_in,
            samples: cfg.samples,
            thin: cfg.sweeps,
        },
        inner: LevelBudget {
            burn_in: cfg.inner_burn_in,
            samples: cfg.inner_samples,
            thin: 1,
        },
        batches: 20,
    }
}

/// Truncated two-point function between the center `y` of a box of side
/// `sizes[0]` and `y + r e_1` for each distance, then an exponential fit.
/// In `d = 1` the values are exact (transfer matrix), in `d = 2` they come
/// from the clamped-spin estimator with nested boxes.
pub fn cmd_decay_fit(cfg: &ExperimentConfig) -> Result<Report> {
    let side = *cfg
        .sizes
        .first()
        .ok_or_else(|| Error::Config("sizes must give the box side".into()))? as i32;
    let reach = cfg.distances.iter().copied().max().unwrap_or(0) as i32;
    if side < 2 || side / 2 + reach >= side {
        return Err(Error::Config(format!(
            "box side {side} too small for distance {reach}"
        )));
    }
    let lo = vec![0; cfg.d];
    let hi = vec![side - 1; cfg.d];
    let region = Region::rect(&lo, &hi)?;
    let nu = field_distribution(&cfg.field)?;
    let h = sample_field(&nu, &region, derive_seed(cfg.seed, "decay/field"));
    let field = effective_field(&h, cfg.strength);
    let boundary = spin_boundary(&cfg.boundary)?;
    let center = vec![side / 2; cfg.d];
    let y = Site::new(center.clone());
    let at = |r: usize| {
        let mut c = center.clone();
        c[0] += r as i32;
        Site::new(c)
    };
    let mut rows = Vec::new();
    let points: Vec<DecayPoint> = match cfg.d {
        1 => {
            let b = boundary.value(&Site::new(vec![-1]))? as f64;
            let chain = Chain1d::new(cfg.beta, &field, b, b)?;
            let yi = side as usize / 2;
            cfg.distances
                .iter()
                .map(|&r| {
                    let v = chain.truncated(yi, yi + r);
                    rows.push((at(r), Estimate::exact(v), 0usize));
                    DecayPoint::new(r as f64, v, 0.0)
                })
                .collect()
        }
        2 => {
            let targets: Vec<(Site, Vec<i32>)> = cfg
                .distances
                .iter()
                .map(|&r| (at(r), nested_radii(r as i32)))
                .collect();
            let rep = clamp_influence(
                &region,
                &boundary,
                cfg.beta,
                &field,
                &y,
                &targets,
                &plan(cfg),
                derive_seed(cfg.seed, "decay/influence"),
            )?;
            cfg.distances
                .iter()
                .zip(&rep.targets)
                .map(|(&r, t)| {
                    rows.push((t.x.clone(), t.covariance, t.triggered));
                    DecayPoint::new(r as f64, t.covariance.value, t.covariance.stderr)
                })
                .collect()
        }
        d => return Err(Error::Unsupported(format!("decay-fit in d = {d}"))),
    };
    let fit = fit_points(&points)?;
    let mut report = Report::new(Experiment::DecayFit);
    report
        .files
        .push(write_file(&cfg.out, "decay_points.csv", |w| {
            writeln!(w, "# schema_version={SCHEMA_VERSION}")?;
            writeln!(w, "r,x,y,truncated,stderr,triggered")?;
            for ((x, e, trig), p) in rows.iter().zip(&points) {
                writeln!(
                    w,
                    "{},{},{},{:.12e},{:.6e},{}",
                    p.r,
                    fmt_site(x),
                    fmt_site(&y),
                    e.value,
                    e.stderr,
                    trig
                )?;
            }
            Ok(())
        })?);
    report
        .files
        .push(write_file(&cfg.out, "decay_fit.csv", |w| {
            write_fit_csv(w, &fit)
        })?);
    if cfg.d == 1 && cfg.strength == 0.0 && cfg.beta > 0.0 {
        let exact = -cfg.beta.tanh().ln();
        if let Some(f) = &fit.fit {
            let rel = (f.rate - exact).abs() / exact;
            report
                .checks
                .push(Check::new("rate-vs-exact", "d=1", 0, rel, 0.05));
        }
    }
    report.cells = json!({"points": points, "fit": fit});
    Ok(report)
}

pub fn cmd_threshold_table(cfg: &ExperimentConfig) -> Result<Report> {
    let nu = field_distribution(&cfg.field)?;
    let rows = threshold_table(&CriticalConstants::standard(), &cfg.betas, cfg.d, &nu)?;
    let mut report = Report::new(Experiment::ThresholdTable);
    report
        .files
        .push(write_file(&cfg.out, "threshold_table.csv", |w| {
            write_threshold_csv(w, &rows)
        })?);
    report.cells = json!(rows);
    Ok(report)
}

/// One box size of the mixing experiment.
#[derive(Clone, Debug, Serialize)]
pub struct MixingRow {
    pub l: usize,
    pub tv: Estimate,
    pub radii: Vec<i32>,
}

/// `TV` of the center-site marginal under `+` and `−` boundaries on `Λ_L`,
/// which is `(⟨σ_0⟩_+ − ⟨σ_0⟩_−) / 2`. By monotonicity this pair is the
/// worst case over boundary conditions. One field realization, keyed by
/// site, is shared by all sizes.
pub fn cmd_mixing_tv(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.sizes.is_empty() {
        return Err(Error::Config("sizes must list the half-widths".into()));
    }
    let nu = field_distribution(&cfg.field)?;
    let field_seed = derive_seed(cfg.seed, "mixing/field");
    let x = Site::origin(cfg.d);
    let rows = cfg
        .sizes
        .par_iter()
        .map(|&l| {
            let region = cube(l as i64, cfg.d)?;
            let h = sample_field(&nu, &region, field_seed);
            let field = effective_field(&h, cfg.strength);
            let radii = nested_radii(l as i32);
            let seed = derive_seed(cfg.seed, &format!("mixing/L={l}"));
            let d = boundary_influence(
                &region,
                &SpinBoundary::Plus,
                &SpinBoundary::Minus,
                cfg.beta,
                &field,
                &x,
                &radii,
                &plan(cfg),
                seed,
            )?;
            Ok(MixingRow {
                l,
                tv: Estimate {
                    value: 0.5 * d.value,
                    stderr: 0.5 * d.stderr,
                    n: d.n,
                },
                radii,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<DecayPoint> = rows
        .iter()
        .map(|r| DecayPoint::new(r.l as f64, r.tv.value, r.tv.stderr))
        .collect();
    let fit = fit_points(&points)?;
    let mut report = Report::new(Experiment::MixingTv);
    let rise = rows
        .windows(2)
        .map(|w| w[1].tv.value - w[0].tv.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut decreasing = Check::new("tv-strictly-decreasing", "sizes", 0, rise, 0.0);
    decreasing.passed = rise < 0.0;
    report.checks.push(decreasing);
    if rows.len() >= 2 {
        let (a, b) = (&rows[0].tv, &rows[rows.len() - 1].tv);
        let gap = (a.value - a.stderr) - (b.value + b.stderr);
        let mut sep = Check::new("first-last-separated", "sizes", 0, -gap, 0.0);
        sep.passed = gap > 0.0;
        report.checks.push(sep);
    }
    report
        .files
        .push(write_file(&cfg.out, "mixing_tv.csv", |w| {
            writeln!(w, "# schema_version={SCHEMA_VERSION}")?;
            writeln!(w, "L,tv,stderr,samples,levels")?;
            for r in &rows {
                writeln!(
                    w,
                    "{},{:.12e},{:.6e},{},{}",
                    r.l,
                    r.tv.value,
                    r.tv.stderr,
                    r.tv.n,
                    r.radii.len()
                )?;
            }
            Ok(())
        })?);
    report
        .files
        .push(write_file(&cfg.out, "mixing_fit.csv", |w| {
            write_fit_csv(w, &fit)
        })?);
    report.cells = json!({"rows": rows, "fit": fit});
    Ok(report)
}

/// Crossing probabilities at `p_c ± eps` for bond and site percolation in
/// dimension `d`, on the two box sides in `sizes`.
pub fn cmd_verify_constants(cfg: &ExperimentConfig) -> Result<Report> {
    let sizes = match cfg.sizes[..] {
        [a, b] if a < b => (a, b),
        _ => {
            return Err(Error::Config(
                "sizes must be two increasing box sides".into(),
            ))
        }
    };
    let consts = CriticalConstants::standard();
    let mut report = Report::new(Experiment::VerifyConstants);
    let checks = [PercKind::Bond, PercKind::Site]
        .par_iter()
        .map(|&kind| {
            let seed = derive_seed(cfg.seed, &format!("constants/{}/d={}", kind.name(), cfg.d));
            verify_constant(&consts, kind, cfg.d, cfg.eps, sizes, cfg.samples, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    for c in &checks {
        let mut ch = Check::new(
            "crossing-brackets-threshold",
            &format!("{}/d={}", c.kind.name(), c.d),
            0,
            0.0,
            0.0,
        );
        ch.value = c.value;
        ch.passed = c.bracketed;
        report.checks.push(ch);
    }
    report.files.push(write_file(&cfg.out, "verify_constants.csv", |w| {
        writeln!(w, "# schema_version={SCHEMA_VERSION}")?;
        writeln!(w, "kind,d,p_c,eps,L_small,L_large,below_small,below_large,above_small,above_large,bracketed,provenance")?;
        for c in &checks {
            let x = &c.crossings;
            writeln!(
                w,
                "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},\"{}\"",
                c.kind.name(),
                c.d,
                c.value,
                c.eps,
                c.sizes.0,
                c.sizes.1,
                x[0].value,
                x[1].value,
                x[2].value,
                x[3].value,
                c.bracketed,
                consts.get(c.kind, c.d)?.provenance
            )?;
        }
        Ok(())
    })?);
    report.cells = json!(checks);
    Ok(report)
}
