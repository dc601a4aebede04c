//! Multilevel estimator for the influence of a clamped spin.
//!
//! For sites `x ≠ y` let `Δ = ⟨σ_x | σ_y = +⟩ − ⟨σ_x | σ_y = −⟩`. Then
//! `⟨σ_xσ_y⟩ − ⟨σ_x⟩⟨σ_y⟩ = 2 P(σ_y=+) P(σ_y=−) Δ`.
//!
//! `Δ` is estimated with two heat-bath chains sharing uniforms, one with `y`
//! clamped to `+` and one to `−`. The pair stays ordered, so the two
//! configurations differ only where the clamp's influence has spread. When
//! `x` is far from `y` that spread is rare, and the estimate is split over
//! nested boxes `D_1 ⊃ D_2 ⊃ ...` around `x`: by the spatial Markov property
//! `⟨σ_x⟩` given everything outside `D_k` only depends on the boundary of
//! `D_k`, so each time the outer pair disagrees on `∂_ex D_k` a fresh coupled
//! pair is run inside `D_k` with the two boundaries, and its estimate replaces
//! the (otherwise zero) contribution. The result is unbiased up to burn-in.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lattice::{Region, Site};
use crate::rng::hash_words;
use crate::stats::{batch_means, Estimate};

use super::{CoupledHeatBath, HeatBath, IsingSystem, SpinBoundary, SweepOrder};

/// Sweep budget of one level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelBudget {
    pub burn_in: usize,
    pub samples: usize,
    pub thin: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfluencePlan {
    pub outer: LevelBudget,
    pub inner: LevelBudget,
    pub batches: usize,
}

#[derive(Clone, Debug)]
pub struct InfluenceResult {
    pub x: Site,
    pub delta: Estimate,
    pub covariance: Estimate,
    /// Outer samples that reached the first nested box.
    pub triggered: usize,
}

#[derive(Clone, Debug)]
pub struct InfluenceReport {
    pub p_plus: Estimate,
    pub targets: Vec<InfluenceResult>,
}

struct Ctx<'a> {
    top: &'a Region,
    field: &'a [f64],
    beta: f64,
    inner: LevelBudget,
}

impl Ctx<'_> {
    fn field_on(&self, r: &Region) -> Vec<f64> {
        r.sites()
            .iter()
            .map(|s| self.field[self.top.index_of(s).expect("sub-region of the top region")])
            .collect()
    }
}

enum Src {
    Inner(usize),
    Fixed(i8, i8),
}

/// A nested box and where its boundary values come from in the parent.
struct Child {
    region: Region,
    ext: Vec<(Site, Src)>,
}

impl Child {
    fn new(
        parent: &Region,
        pa: &HashMap<Site, i8>,
        pb: &HashMap<Site, i8>,
        x: &Site,
        radius: i32,
    ) -> Result<Child> {
        let lo: Vec<i32> = x.coords().iter().map(|c| c - radius).collect();
        let hi: Vec<i32> = x.coords().iter().map(|c| c + radius).collect();
        let sites = Region::rect(&lo, &hi)?
            .sites()
            .iter()
            .filter(|s| parent.contains(s))
            .cloned()
            .collect::<Vec<_>>();
        let region = Region::from_sites(parent.dim(), sites)?;
        let ext = region
            .exterior_boundary()
            .into_iter()
            .map(|s| {
                let src = match parent.index_of(&s) {
                    Some(i) => Src::Inner(i),
                    None => Src::Fixed(pa[&s], pb[&s]),
                };
                (s, src)
            })
            .collect();
        Ok(Child { region, ext })
    }

    fn disagrees(&self, sa: &[i8], sb: &[i8]) -> bool {
        self.ext.iter().any(|(_, src)| match *src {
            Src::Inner(i) => sa[i] != sb[i],
            Src::Fixed(a, b) => a != b,
        })
    }

    fn boundaries(&self, sa: &[i8], sb: &[i8]) -> (HashMap<Site, i8>, HashMap<Site, i8>) {
        let mut a = HashMap::with_capacity(self.ext.len());
        let mut b = HashMap::with_capacity(self.ext.len());
        for (s, src) in &self.ext {
            let (va, vb) = match *src {
                Src::Inner(i) => (sa[i], sb[i]),
                Src::Fixed(x, y) => (x, y),
            };
            a.insert(s.clone(), va);
            b.insert(s.clone(), vb);
        }
        (a, b)
    }
}

fn coupled(
    ctx: &Ctx,
    region: &Region,
    ea: HashMap<Site, i8>,
    eb: HashMap<Site, i8>,
    seed: u64,
) -> Result<CoupledHeatBath> {
    let f = ctx.field_on(region);
    let sa = IsingSystem::new(region, &SpinBoundary::Values(ea), ctx.beta, &f)?;
    let sb = IsingSystem::new(region, &SpinBoundary::Values(eb), ctx.beta, &f)?;
    CoupledHeatBath::new(sa, sb, vec![1; region.len()], vec![-1; region.len()], seed)
}

/// Mean of `⟨σ_x⟩_a − ⟨σ_x⟩_b` inside a nested box.
fn run_level(
    ctx: &Ctx,
    region: &Region,
    ea: HashMap<Site, i8>,
    eb: HashMap<Site, i8>,
    x: &Site,
    radii: &[i32],
    seed: u64,
) -> Result<f64> {
    let child = match radii.first() {
        Some(&r) => Some(Child::new(region, &ea, &eb, x, r)?),
        None => None,
    };
    let xi = region.index_of(x).expect("target inside every level");
    let mut chain = coupled(ctx, region, ea, eb, seed)?;
    let b = ctx.inner;
    for _ in 0..b.burn_in {
        chain.sweep();
    }
    let mut total = 0.0;
    for k in 0..b.samples {
        for _ in 0..b.thin.max(1) {
            chain.sweep();
        }
        total += match &child {
            None => chain.conditional_mean_diff(xi),
            Some(c) => {
                if c.disagrees(chain.spins_a(), chain.spins_b()) {
                    let (a, bb) = c.boundaries(chain.spins_a(), chain.spins_b());
                    run_level(
                        ctx,
                        &c.region,
                        a,
                        bb,
                        x,
                        &radii[1..],
                        hash_words(seed, &[k as u64]),
                    )?
                } else {
                    0.0
                }
            }
        };
    }
    Ok(total / b.samples.max(1) as f64)
}

/// Half-widths of nested boxes around a target at distance `reach` from the
/// source of the disagreement: steps of 4 down to 4, then 2. Empty for
/// `reach <= 4`.
pub fn nested_radii(reach: i32) -> Vec<i32> {
    if reach <= 4 {
        return vec![];
    }
    let mut v: Vec<i32> = (1..)
        .map(|k| reach - 4 * k)
        .take_while(|&r| r >= 4)
        .collect();
    v.push(2);
    v
}

/// Estimates `⟨σ_x⟩_a − ⟨σ_x⟩_b` for two boundary conditions of the same
/// region, with the nested boxes `radii` around `x` as in
/// [`clamp_influence`].
#[allow(clippy::too_many_arguments)]
pub fn boundary_influence(
    region: &Region,
    eta_a: &SpinBoundary,
    eta_b: &SpinBoundary,
    beta: f64,
    field: &[f64],
    x: &Site,
    radii: &[i32],
    plan: &InfluencePlan,
    seed: u64,
) -> Result<Estimate> {
    let xi = region
        .index_of(x)
        .ok_or_else(|| Error::DomainMismatch(format!("{x} not in the region")))?;
    if radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|&r| r < 0) {
        return Err(Error::InvalidParameter(
            "radii must be positive and decreasing".into(),
        ));
    }
    let ctx = Ctx {
        top: region,
        field,
        beta,
        inner: plan.inner,
    };
    let ea: HashMap<Site, i8> = eta_a.materialize(region)?.into_iter().collect();
    let eb: HashMap<Site, i8> = eta_b.materialize(region)?.into_iter().collect();
    let child = match radii.first() {
        Some(&r) => Some(Child::new(region, &ea, &eb, x, r)?),
        None => None,
    };
    let mut chain = coupled(&ctx, region, ea, eb, hash_words(seed, &[1]))?;
    let b = plan.outer;
    for _ in 0..b.burn_in {
        chain.sweep();
    }
    let mut values = Vec::with_capacity(b.samples);
    for k in 0..b.samples {
        for _ in 0..b.thin.max(1) {
            chain.sweep();
        }
        values.push(match &child {
            None => chain.conditional_mean_diff(xi),
            Some(c) if c.disagrees(chain.spins_a(), chain.spins_b()) => {
                let (a, bb) = c.boundaries(chain.spins_a(), chain.spins_b());
                run_level(
                    &ctx,
                    &c.region,
                    a,
                    bb,
                    x,
                    &radii[1..],
                    hash_words(seed, &[3, k as u64]),
                )?
            }
            Some(_) => 0.0,
        });
    }
    Ok(batch_means(&values, plan.batches))
}

/// Estimates `Δ` and the truncated two-point function between `y` and each
/// target. `targets[k].1` lists the nested box half-widths around the target,
/// outermost first; an empty list estimates `Δ` directly.
pub fn clamp_influence(
    region: &Region,
    boundary: &SpinBoundary,
    beta: f64,
    field: &[f64],
    y: &Site,
    targets: &[(Site, Vec<i32>)],
    plan: &InfluencePlan,
    seed: u64,
) -> Result<InfluenceReport> {
    if !region.contains(y) {
        return Err(Error::DomainMismatch(format!("{y} not in the region")));
    }
    for (x, radii) in targets {
        if x == y || !region.contains(x) {
            return Err(Error::InvalidParameter(format!("bad target {x}")));
        }
        if radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|&r| r < 0) {
            return Err(Error::InvalidParameter(
                "radii must be positive and decreasing".into(),
            ));
        }
        if let Some(&r0) = radii.first() {
            let reach = x
                .coords()
                .iter()
                .zip(y.coords())
                .map(|(a, b)| (a - b).abs())
                .max()
                .unwrap_or(0);
            if r0 >= reach {
                return Err(Error::InvalidParameter(format!(
                    "box of half-width {r0} around {x} contains {y}"
                )));
            }
        }
    }
    let ctx = Ctx {
        top: region,
        field,
        beta,
        inner: plan.inner,
    };
    let omega = Region::from_sites(
        region.dim(),
        region.sites().iter().filter(|s| *s != y).cloned(),
    )?;
    let mut ea = HashMap::new();
    let mut eb = HashMap::new();
    for s in omega.exterior_boundary() {
        let (a, b) = if &s == y {
            (1, -1)
        } else {
            let v = boundary.value(&s)?;
            (v, v)
        };
        ea.insert(s.clone(), a);
        eb.insert(s, b);
    }
    let children = targets
        .iter()
        .map(|(x, radii)| match radii.first() {
            Some(&r) => Child::new(&omega, &ea, &eb, x, r).map(Some),
            None => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;
    let xis: Vec<usize> = targets
        .iter()
        .map(|(x, _)| omega.index_of(x).expect("checked"))
        .collect();
    let mut chain = coupled(&ctx, &omega, ea, eb, hash_words(seed, &[1]))?;
    let free = IsingSystem::new(region, boundary, beta, field)?;
    let yi = region.index_of(y).expect("checked");
    let mut single = HeatBath::new(
        free,
        vec![1; region.len()],
        hash_words(seed, &[2]),
        SweepOrder::Raster,
    )?;

    let b = plan.outer;
    for _ in 0..b.burn_in {
        chain.sweep();
        single.sweep();
    }
    let mut values = vec![Vec::with_capacity(b.samples); targets.len()];
    let mut triggered = vec![0usize; targets.len()];
    let mut py = Vec::with_capacity(b.samples);
    for k in 0..b.samples {
        for _ in 0..b.thin.max(1) {
            chain.sweep();
            single.sweep();
        }
        py.push(0.5 * (1.0 + single.conditional_mean(yi)));
        for (t, (x, radii)) in targets.iter().enumerate() {
            let v = match &children[t] {
                None => chain.conditional_mean_diff(xis[t]),
                Some(c) => {
                    if c.disagrees(chain.spins_a(), chain.spins_b()) {
                        triggered[t] += 1;
                        let (a, bb) = c.boundaries(chain.spins_a(), chain.spins_b());
                        run_level(
                            &ctx,
                            &c.region,
                            a,
                            bb,
                            x,
                            &radii[1..],
                            hash_words(seed, &[3, t as u64, k as u64]),
                        )?
                    } else {
                        0.0
                    }
                }
            };
            values[t].push(v);
        }
    }
    let p_plus = batch_means(&py, plan.batches);
    let pp = p_plus.value;
    let factor = 2.0 * pp * (1.0 - pp);
    let dfactor = 2.0 * (1.0 - 2.0 * pp) * p_plus.stderr;
    let results = targets
        .iter()
        .zip(values)
        .zip(triggered)
        .map(|(((x, _), v), trig)| {
            let delta = batch_means(&v, plan.batches);
            let covariance = Estimate {
                value: factor * delta.value,
                stderr: ((factor * delta.stderr).powi(2) + (delta.value * dfactor).powi(2)).sqrt(),
                n: delta.n,
            };
            InfluenceResult {
                x: x.clone(),
                delta,
                covariance,
                triggered: trig,
            }
        })
        .collect();
    Ok(InfluenceReport {
        p_plus,
        targets: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::{exact_measure, Chain1d};
    use crate::lattice::cube;

    fn plan(samples: usize) -> InfluencePlan {
        InfluencePlan {
            outer: LevelBudget {
                burn_in: 200,
                samples,
                thin: 1,
            },
            inner: LevelBudget {
                burn_in: 30,
                samples: 60,
                thin: 1,
            },
            batches: 20,
        }
    }

    #[test]
    fn matches_exact_covariance_on_small_box() {
        let r = Region::rect(&[0, 0], &[3, 2]).unwrap();
        let f: Vec<f64> = (0..r.len())
            .map(|i| 0.3 * if i % 3 == 0 { 1.0 } else { -1.0 })
            .collect();
        let beta = 0.35;
        let exact = exact_measure(&r, &SpinBoundary::Free, beta, &f, 20).unwrap();
        let y = Site::new(vec![0, 1]);
        let x = Site::new(vec![3, 1]);
        let (yi, xi) = (r.index_of(&y).unwrap(), r.index_of(&x).unwrap());
        let want = exact.truncated(xi, yi);
        let rep = clamp_influence(
            &r,
            &SpinBoundary::Free,
            beta,
            &f,
            &y,
            &[(x.clone(), vec![]), (x, vec![1])],
            &plan(40_000),
            5,
        )
        .unwrap();
        for t in &rep.targets {
            let c = t.covariance;
            assert!(
                (c.value - want).abs() < 4.0 * c.stderr + 1e-4,
                "{} vs {want} ± {}",
                c.value,
                c.stderr
            );
        }
    }

    #[test]
    fn one_dimensional_levels_recover_tanh_power() {
        let n = 41;
        let r = Region::from_sites(1, (0..n).map(|k| Site::new(vec![k]))).unwrap();
        let beta = 0.5;
        let f = vec![0.0; n as usize];
        let chain = Chain1d::new(beta, &f, 0.0, 0.0).unwrap();
        let y = Site::new(vec![20]);
        let x = Site::new(vec![28]);
        let want = chain.truncated(20, 28);
        let rep = clamp_influence(
            &r,
            &SpinBoundary::Free,
            beta,
            &f,
            &y,
            &[(x, vec![5, 2])],
            &plan(20_000),
            8,
        )
        .unwrap();
        let c = rep.targets[0].covariance;
        assert!(
            (c.value - want).abs() < 4.0 * c.stderr,
            "{} vs {want} ± {}",
            c.value,
            c.stderr
        );
    }

    #[test]
    fn boundary_influence_matches_exact_difference() {
        let r = Region::rect(&[0, 0], &[4, 3]).unwrap();
        let f: Vec<f64> = (0..r.len())
            .map(|i| if i % 2 == 0 { 0.2 } else { -0.2 })
            .collect();
        let beta = 0.3;
        let x = Site::new(vec![2, 2]);
        let xi = r.index_of(&x).unwrap();
        let want = exact_measure(&r, &SpinBoundary::Plus, beta, &f, 30)
            .unwrap()
            .magnetization(xi)
            - exact_measure(&r, &SpinBoundary::Minus, beta, &f, 30)
                .unwrap()
                .magnetization(xi);
        for radii in [vec![], vec![1]] {
            let e = boundary_influence(
                &r,
                &SpinBoundary::Plus,
                &SpinBoundary::Minus,
                beta,
                &f,
                &x,
                &radii,
                &plan(40_000),
                4,
            )
            .unwrap();
            assert!(
                (e.value - want).abs() < 4.0 * e.stderr + 1e-4,
                "{radii:?}: {} vs {want} ± {}",
                e.value,
                e.stderr
            );
        }
        let same = boundary_influence(
            &r,
            &SpinBoundary::Plus,
            &SpinBoundary::Plus,
            beta,
            &f,
            &x,
            &[1],
            &plan(500),
            4,
        )
        .unwrap();
        assert_eq!(same.value, 0.0);
    }

    #[test]
    fn radii_schedule() {
        assert!(nested_radii(4).is_empty());
        assert_eq!(nested_radii(8), vec![4, 2]);
        assert_eq!(nested_radii(10), vec![6, 2]);
        assert_eq!(nested_radii(16), vec![12, 8, 4, 2]);
    }

    #[test]
    fn rejects_nested_box_containing_clamp() {
        let r = cube(4, 2).unwrap();
        let f = vec![0.0; r.len()];
        let y = Site::origin(2);
        let x = Site::new(vec![3, 0]);
        assert!(clamp_influence(
            &r,
            &SpinBoundary::Free,
            0.2,
            &f,
            &y,
            &[(x, vec![3])],
            &plan(10),
            1
        )
        .is_err());
    }
}
