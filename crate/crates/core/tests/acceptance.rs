//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.
//!
//! The Monte Carlo criteria use the full budgets and take about twenty
//! minutes together on one core.

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rfim::cluster::{BondBoundary, EsChain, RcMode, RcModel};
use rfim::fields::{effective_field, sample_field, FieldDistribution};
use rfim::gibbs::{
    empirical, exact_measure, ExactDistribution, HeatBath, IsingSystem, SpinBoundary, SweepOrder,
};
use rfim::harness::oracle::{run_suite, validate_suite, Check, Instance, SuiteParts};
use rfim::harness::{self, Experiment, ExperimentConfig};
use rfim::lattice::{cube, Region, Site};
use rfim::perc::{
    beta_p, h2_bound, h3_bound, kertesz_scan, scan_cell, Classification, CriticalConstants,
    KerteszConfig,
};

fn verdict(n: usize, name: &str, ok: bool, detail: &str, start: Instant) -> bool {
    // straight to the handle so the line shows without --nocapture
    let line = format!(
        "acceptance {n:>2} {name}: {} ({detail}; {:.1} s)\n",
        if ok { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    ok
}

fn scratch(name: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("rfim-acceptance-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&p);
    p
}

fn suite(parts: SuiteParts, draws: usize) -> (Vec<Check>, Vec<String>) {
    let cfg = ExperimentConfig::defaults(Experiment::OracleVerify);
    let insts = validate_suite(&cfg.instances, cfg.cap).unwrap();
    run_suite(&insts, draws, cfg.seed, cfg.cap, parts, false).unwrap()
}

fn worst(checks: &[Check]) -> f64 {
    checks.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min)
}

const NONE: SuiteParts = SuiteParts {
    es: false,
    domination: false,
    tv: false,
    covariance: false,
};

#[test]
fn a01_es_consistency() {
    let t = Instant::now();
    let cfg = ExperimentConfig::defaults(Experiment::OracleVerify);
    let sizes_ok = cfg.instances.iter().all(|l| {
        let i = Instance::parse(l).unwrap();
        i.region.dim() <= 2 && i.region.len() <= 9 && i.n_edges() <= 14
    });
    let (checks, _) = suite(SuiteParts { es: true, ..NONE }, 5);
    let bad = checks.iter().filter(|c| !c.passed).count();
    let secs = t.elapsed().as_secs_f64();
    let ok = sizes_ok && bad == 0 && !checks.is_empty() && secs <= 60.0;
    let detail = format!(
        "{} identities, {bad} above 1e-12, suite within bounds: {sizes_ok}",
        checks.len()
    );
    assert!(verdict(1, "ES marginalization identities", ok, &detail, t));
}

#[test]
fn a02_dominations() {
    let t = Instant::now();
    let (checks, skipped) = suite(
        SuiteParts {
            domination: true,
            ..NONE
        },
        5,
    );
    let bad = checks.iter().filter(|c| !c.passed).count();
    let ok = bad == 0 && !checks.is_empty() && t.elapsed().as_secs_f64() <= 600.0;
    let detail = format!(
        "{} comparisons, worst slack {:.3e}, skipped (more than 12 edges): {}",
        checks.len(),
        worst(&checks),
        skipped.join(",")
    );
    assert!(verdict(2, "stochastic dominations", ok, &detail, t));
}

#[test]
fn a03_coupling_tv_bounds() {
    let t = Instant::now();
    let (checks, _) = suite(SuiteParts { tv: true, ..NONE }, 20);
    let bad = checks.iter().filter(|c| !c.passed).count();
    let ok = bad == 0 && !checks.is_empty() && t.elapsed().as_secs_f64() <= 600.0;
    let detail = format!(
        "{} bounds over 20 draws, worst slack {:.3e}",
        checks.len(),
        worst(&checks)
    );
    assert!(verdict(3, "TV below connectivity bounds", ok, &detail, t));
}

#[test]
fn a04_pathwise_couplings() {
    let t = Instant::now();
    let mut cfg = ExperimentConfig::defaults(Experiment::CouplingVerify);
    cfg.out = scratch("coupling");
    assert_eq!((cfg.runs, cfg.sizes[0], cfg.d), (100_000, 1, 2));
    let report = harness::run(&cfg).unwrap();
    let failed: Vec<String> = report
        .failures()
        .map(|c| format!("{}={:.3e}", c.check, c.value))
        .collect();
    let ok = failed.is_empty() && t.elapsed().as_secs_f64() <= 600.0;
    let detail = format!(
        "3 x {} runs, {} checks, failed: [{}]",
        cfg.runs,
        report.checks.len(),
        failed.join(" ")
    );
    assert!(verdict(4, "pathwise coupling assertions", ok, &detail, t));
}

fn joint_tv(counts: &HashMap<usize, usize>, exact: &ExactDistribution) -> f64 {
    let emp = empirical(counts, exact.probs().len());
    0.5 * emp
        .iter()
        .zip(exact.probs())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
}

#[test]
fn a05_samplers() {
    let t = Instant::now();
    let samples = 100_000;
    let r = Region::rect(&[0, 0], &[1, 1]).unwrap();
    let h = sample_field(&FieldDistribution::Gaussian, &r, 21);
    let (beta, strength) = (0.35, 0.4);
    let f = effective_field(&h, strength);
    let eta = SpinBoundary::from_fn(&r, |x: &Site| if x.coords()[0] < 0 { -1 } else { 1 });
    let exact = exact_measure(&r, &eta, beta, &f, 20).unwrap();

    let sys = IsingSystem::new(&r, &eta, beta, &f).unwrap();
    let mut hb = HeatBath::new(sys, vec![1; 4], 5, SweepOrder::Raster).unwrap();
    let mut counts = HashMap::new();
    for _ in 0..100 {
        hb.sweep();
    }
    for _ in 0..samples {
        hb.sweep();
        *counts
            .entry(ExactDistribution::encode(hb.spins()))
            .or_insert(0) += 1;
    }
    let tv_hb = joint_tv(&counts, &exact);

    let m = RcModel::two_ghost(
        &r,
        RcMode::Signed,
        beta,
        strength,
        &h,
        2,
        &BondBoundary::Spins(eta.clone()),
    )
    .unwrap();
    let mut es = EsChain::new(&m, 6).unwrap();
    for _ in 0..100 {
        es.step();
    }
    counts.clear();
    for _ in 0..samples {
        es.step();
        *counts
            .entry(ExactDistribution::encode(es.spins()))
            .or_insert(0) += 1;
    }
    let tv_es = joint_tv(&counts, &exact);

    // one site, all neighbours against its field: P(σ = sign h) is the worst case
    let mut zmax: f64 = 0.0;
    let one = cube(0, 2).unwrap();
    for (k, &(beta, strength, hx)) in [
        (0.3, 0.5, 1.0),
        (0.1, 1.2, -0.7),
        (0.6, 2.0, 1.5),
        (0.0, 0.3, -2.0),
    ]
    .iter()
    .enumerate()
    {
        let against = if hx > 0.0 {
            SpinBoundary::Minus
        } else {
            SpinBoundary::Plus
        };
        let sys = IsingSystem::new(&one, &against, beta, &[strength * hx]).unwrap();
        let mut hb = HeatBath::new(sys, vec![1], 100 + k as u64, SweepOrder::Raster).unwrap();
        let mut hits = 0usize;
        for _ in 0..samples {
            hb.sweep();
            hits += (hb.spins()[0] as f64 * hx > 0.0) as usize;
        }
        let x = -4.0 * beta + strength * f64::abs(hx);
        let a = x.exp() / (x.exp() + (-x).exp());
        let se = (a * (1.0 - a) / samples as f64).sqrt();
        zmax = zmax.max((hits as f64 / samples as f64 - a).abs() / se);
    }
    let ok = tv_hb <= 0.02 && tv_es <= 0.02 && zmax <= 3.0 && t.elapsed().as_secs_f64() <= 300.0;
    let detail =
        format!("TV heat-bath {tv_hb:.4}, TV ES {tv_es:.4}, single-site worst |z| {zmax:.2}");
    assert!(verdict(5, "sampler correctness", ok, &detail, t));
}

/// Worst-case sign probability written out from exponentials.
fn a_of(beta: f64, strength: f64, abs_h: f64) -> f64 {
    let up = (-4.0 * beta + strength * abs_h).exp();
    let down = (4.0 * beta - strength * abs_h).exp();
    up / (up + down)
}

/// Site percolation threshold of the square lattice (Newman and Ziff 2000).
const PC_SITE_2D: f64 = 0.59274621;

#[test]
fn a06_thresholds() {
    let t = Instant::now();
    let pc = CriticalConstants::standard().site(2).unwrap();
    let constant_ok = (pc - PC_SITE_2D).abs() < 1e-6;
    let mut lo = 0.0;
    let mut hi = 10.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - a_of(0.0, mid, 1.0).powi(2) < pc {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let h0 = h2_bound(0.0, 2).unwrap();
    let oracle_ok = (h0 - 0.2837).abs() <= 5e-4 && (h0 - hi).abs() <= 5e-4;
    let mut eq_gap: f64 = 0.0;
    for k in 0..=100 {
        let beta = k as f64 / 100.0;
        let hb = h2_bound(beta, 2).unwrap();
        eq_gap = eq_gap.max((1.0 - a_of(beta, hb, 1.0).powi(2) - pc).abs());
    }
    let mut reduction_ok = true;
    for k in 0..=10 {
        let beta = k as f64 / 10.0;
        let b = h3_bound(beta, 2, &FieldDistribution::Bimodal).unwrap();
        reduction_ok &= b.strength == h2_bound(beta, 2).unwrap();
    }
    let ok = constant_ok
        && oracle_ok
        && eq_gap <= 1e-10
        && reduction_ok
        && t.elapsed().as_secs_f64() <= 1.0;
    let detail = format!("H2(0) = {h0:.6} vs bisection {hi:.6}, equality gap {eq_gap:.2e}, bimodal reduction exact: {reduction_ok}");
    assert!(verdict(6, "threshold computations", ok, &detail, t));
}

#[test]
fn a07_beta_p() {
    let t = Instant::now();
    let b = beta_p(2).unwrap();
    let err = (b - std::f64::consts::LN_2 / 2.0).abs();
    let relation = (1.0 - (-2.0 * b).exp() - 0.5).abs();
    let ok = err <= 1e-12 && relation <= 1e-12 && t.elapsed().as_secs_f64() <= 1.0;
    let detail = format!("beta_P(2) = {b:.15}, |beta_P - ln2/2| = {err:.1e}");
    assert!(verdict(7, "beta_P(2) = ln 2 / 2", ok, &detail, t));
}

#[test]
fn a08_kertesz_regimes() {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    let low = KerteszConfig::new(0.2);
    for strength in [0.5, 2.0] {
        let c = scan_cell(&low, strength).unwrap();
        ok &= c.classification == Classification::Below;
        parts.push(format!("beta=0.2 H={strength}: {}", c.classification));
    }
    let c = scan_cell(&KerteszConfig::new(0.6), 0.0).unwrap();
    ok &= c.classification == Classification::Above;
    parts.push(format!("beta=0.6 H=0: {}", c.classification));
    let mut mid = KerteszConfig::new(0.4);
    mid.grid = vec![0.0, 0.01, 0.05, 0.1];
    let res = kertesz_scan(&mid).unwrap();
    ok &= res.h_lo.is_some_and(|h| h > 0.0) && res.h_hi.is_some();
    parts.push(format!("beta=0.4 bracket ({:?}, {:?})", res.h_lo, res.h_hi));
    ok &= low.replicas >= 10_000 && low.schedule == [8, 16, 32, 64];
    ok &= t.elapsed().as_secs_f64() <= 7200.0;
    assert!(verdict(
        8,
        "Kertesz regime consistency",
        ok,
        &parts.join(", "),
        t
    ));
}

#[test]
fn a09_decay() {
    let t = Instant::now();
    let mut cfg = ExperimentConfig::defaults(Experiment::DecayFit);
    cfg.out = scratch("decay2");
    assert_eq!(
        (cfg.beta, cfg.strength, cfg.sizes[0], cfg.field.as_str()),
        (0.25, 0.3, 96, "bimodal")
    );
    let report = harness::run(&cfg).unwrap();
    let fit = &report.cells["fit"]["fit"];
    let rate = fit["rate"].as_f64().unwrap_or(f64::NAN);
    let r2 = fit["r_squared"].as_f64().unwrap_or(f64::NAN);
    let mut ok = rate > 0.0 && r2 >= 0.9;
    let mut detail = format!("d=2 rate {rate:.4} r^2 {r2:.4}");
    for beta in [0.25, 0.5, 1.0] {
        let mut c1 = ExperimentConfig::defaults(Experiment::DecayFit);
        c1.d = 1;
        c1.beta = beta;
        c1.strength = 0.0;
        c1.sizes = vec![200];
        c1.out = scratch("decay1");
        let report = harness::run(&c1).unwrap();
        let rate1 = report.cells["fit"]["fit"]["rate"]
            .as_f64()
            .unwrap_or(f64::NAN);
        let exact = -beta.tanh().ln();
        let rel = (rate1 - exact).abs() / exact;
        ok &= rel <= 0.05;
        detail += &format!(", d=1 beta={beta} rate {rate1:.4} vs {exact:.4}");
    }
    ok &= t.elapsed().as_secs_f64() <= 3600.0;
    assert!(verdict(9, "decay phenomenology", ok, &detail, t));
}

#[test]
fn a10_mixing_tv() {
    let t = Instant::now();
    let mut cfg = ExperimentConfig::defaults(Experiment::MixingTv);
    cfg.out = scratch("mixing");
    assert_eq!(
        (cfg.beta, cfg.strength, cfg.sizes.as_slice()),
        (0.25, 0.3, &[4, 8, 12, 16][..])
    );
    let report = harness::run(&cfg).unwrap();
    let rows: Vec<String> = report.cells["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            format!(
                "L={} {:.3e}±{:.1e}",
                r["l"],
                r["tv"]["value"].as_f64().unwrap(),
                r["tv"]["stderr"].as_f64().unwrap()
            )
        })
        .collect();
    let ok = report.passed() && report.checks.len() == 2 && t.elapsed().as_secs_f64() <= 3600.0;
    assert!(verdict(10, "mixing TV trend", ok, &rows.join(", "), t));
}

fn small_suite(out: PathBuf) -> Vec<ExperimentConfig> {
    let tweaks: &[(Experiment, &[(&str, &str)])] = &[
        (Experiment::OracleVerify, &[("draws", "2")]),
        (Experiment::CouplingVerify, &[("runs", "300")]),
        (
            Experiment::KerteszScan,
            &[
                ("replicas", "60"),
                ("sizes", "4,8,12"),
                ("grid", "0,0.5"),
                ("max_probes", "1"),
            ],
        ),
        (
            Experiment::DecayFit,
            &[
                ("sizes", "24"),
                ("distances", "2,4,8"),
                ("samples", "400"),
                ("inner_samples", "10"),
            ],
        ),
        (Experiment::ThresholdTable, &[]),
        (
            Experiment::MixingTv,
            &[
                ("sizes", "2,4"),
                ("samples", "300"),
                ("inner_samples", "10"),
            ],
        ),
        (
            Experiment::VerifyConstants,
            &[("sizes", "4,8"), ("samples", "100")],
        ),
    ];
    tweaks
        .iter()
        .map(|(e, kv)| {
            let mut c = ExperimentConfig::defaults(*e);
            for (k, v) in kv.iter() {
                c.set(k, v).unwrap();
            }
            c.seed = 2024;
            c.out = out.clone();
            c
        })
        .collect()
}

fn csv_files(dir: &PathBuf) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv" || x == "jsonl"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn a11_determinism() {
    let t = Instant::now();
    let dirs = [scratch("det-a"), scratch("det-b")];
    for d in &dirs {
        for cfg in small_suite(d.clone()) {
            harness::run(&cfg).unwrap();
        }
    }
    let (a, b) = (csv_files(&dirs[0]), csv_files(&dirs[1]));
    let differing: Vec<&str> = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    let ok = a.len() >= 7 && a.len() == b.len() && differing.is_empty();
    let detail = format!(
        "{} output files compared, differing: [{}]",
        a.len(),
        differing.join(",")
    );
    assert!(verdict(11, "byte-identical outputs", ok, &detail, t));
}
