//! Self-checks reproducing the worked examples and the statistical
//! properties of the estimators. The command-line `verify` verb runs these.

use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::casebase::{run_elicitation, Case, CaseBase};
use crate::complete::{self, MetricKind};
use crate::error::{Error, Result};
use crate::estimate::{chebyshev_sample_size, EstimationConfig, Mode};
use crate::linext::{
    average_heights, count_extensions, enumerate_extensions, sample_many, tv_to_uniform,
    ExtensionLimits, HeightMode, SamplerConfig,
};
use crate::orders::{is_extension, parse_partial_order, parse_weak_order, OrderBuilder, PartialPreferenceOrder, WeakOrder};
use crate::partial_metrics::{avg_distance, generalized_euclidean, generalized_footrule};
use crate::space::OutcomeSpace;
use crate::utility::{probabilistic_distance_utilities, utility_euclidean, utility_footrule, UtilityVector};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {} (expected {}, got {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.expected,
            self.actual
        )
    }
}

pub const SUITES: [&str; 10] = [
    "example1",
    "example2",
    "example3",
    "props",
    "linext",
    "sampler",
    "estimator",
    "generalized",
    "elicitation",
    "sizing",
];

pub fn run_suite(name: &str) -> Result<Vec<Check>> {
    let mut s = Suite::new(match SUITES.iter().find(|&&s| s == name) {
        Some(s) => s,
        None => return Err(Error::InvalidParameter(format!("unknown suite {name:?}"))),
    });
    match name {
        "example1" => example1(&mut s)?,
        "example2" => example2(&mut s)?,
        "example3" => example3(&mut s)?,
        "props" => props(&mut s)?,
        "linext" => linext(&mut s)?,
        "sampler" => sampler(&mut s)?,
        "estimator" => estimator(&mut s)?,
        "generalized" => generalized(&mut s)?,
        "elicitation" => elicitation(&mut s)?,
        _ => sizing(&mut s)?,
    }
    Ok(s.checks)
}

struct Suite {
    name: &'static str,
    checks: Vec<Check>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checks: Vec::new(),
        }
    }

    fn push(&mut self, name: impl Into<String>, expected: impl fmt::Display, actual: impl fmt::Display, passed: bool) {
        self.checks.push(Check {
            suite: self.name,
            name: name.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
            passed,
        });
    }

    fn close(&mut self, name: impl Into<String>, expected: f64, actual: f64, tol: f64) {
        let ok = (expected - actual).abs() <= tol;
        self.push(name, format!("{expected:.6} ± {tol:e}"), format!("{actual:.6}"), ok);
    }

    fn count(&mut self, name: impl Into<String>, passed: usize, total: usize, needed: usize) {
        self.push(name, format!(">= {needed}/{total}"), format!("{passed}/{total}"), passed >= needed);
    }

    fn timed(&mut self, name: &str, start: Instant, limit_secs: f64) {
        let t = start.elapsed().as_secs_f64();
        self.push(format!("{name} runtime"), format!("< {limit_secs} s"), format!("{t:.2} s"), t < limit_secs);
    }
}

fn example1(s: &mut Suite) -> Result<()> {
    let start = Instant::now();
    let space = OutcomeSpace::new(["B", "M", "P"])?;
    let x = parse_weak_order(&space, "B < M < P")?;
    let y = parse_weak_order(&space, "M < P < B")?;
    let z = parse_weak_order(&space, "P < M < B")?;
    s.close("footrule(X,Y)", 2.0, complete::footrule(&x, &y)?, 1e-12);
    s.close("euclidean(X,Y)", 6f64.sqrt(), complete::euclidean(&x, &y)?, 1e-12);
    s.close("probabilistic(X,Y)", 2.0 / 3.0, complete::probabilistic(&x, &y)?, 1e-12);
    s.close("normalized footrule(X,Y)", 1.0, complete::normalized(MetricKind::Footrule, &x, &y)?, 1e-12);
    s.close("normalized euclidean(X,Y)", 0.8660, complete::normalized(MetricKind::Euclidean, &x, &y)?, 1e-4);
    s.close("normalized probabilistic(X,Y)", 0.6667, complete::normalized(MetricKind::Probabilistic, &x, &y)?, 1e-4);
    for kind in MetricKind::ALL {
        s.close(format!("normalized {kind}(X,Z)"), 1.0, complete::normalized(kind, &x, &z)?, 1e-12);
    }
    s.timed("example1", start, 1.0);
    Ok(())
}

fn example2(s: &mut Suite) -> Result<()> {
    let start = Instant::now();
    let space = OutcomeSpace::new(["a", "b", "c"])?;
    let ux = UtilityVector::new(space.clone(), vec![0.0, 1.0, 2.0])?;
    let uy = UtilityVector::new(space, vec![1.0, 3.0, 4.0])?;
    s.close("euclidean(uX,uY)", 1.0 / 6.0, utility_euclidean(&ux, &uy)?, 1e-12);
    s.close("footrule(uX,uY)", 1.0 / 12.0, utility_footrule(&ux, &uy)?, 1e-12);
    s.timed("example2", start, 1.0);
    Ok(())
}

fn example3(s: &mut Suite) -> Result<()> {
    let start = Instant::now();
    let space = OutcomeSpace::new(["a", "b", "c"])?;
    let u = |v: [f64; 3]| UtilityVector::new(space.clone(), v.to_vec());
    let cfg = EstimationConfig::default().with_samples(1_000_000).with_seed(7);
    let xy = probabilistic_distance_utilities(&u([0.0, 1.0, 2.0])?, &u([0.0, 2.0, 3.0])?, &cfg)?;
    let xz = probabilistic_distance_utilities(&u([0.0, 1.0, 2.0])?, &u([0.0, 2.0, 1.0])?, &cfg)?;
    s.close("probabilistic((0,1,2),(0,2,3))", 1.0 / 9.0, xy.value, 0.005);
    s.close("probabilistic((0,1,2),(0,2,1))", 1.0 / 3.0, xz.value, 0.005);
    s.timed("example3", start, 30.0);
    Ok(())
}

fn random_weak_order<R: Rng>(rng: &mut R, n: usize) -> Result<WeakOrder> {
    let space = OutcomeSpace::numbered(n)?;
    let keys: Vec<f64> = (0..n).map(|_| rng.random_range(0..n) as f64).collect();
    WeakOrder::from_keys(space, &keys)
}

fn props(s: &mut Suite) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let tol = 1e-12;
    let (mut reflexive, mut symmetric, mut triangle) = (0, 0, 0);
    let triples = 10_000;
    for _ in 0..triples {
        let n = rng.random_range(2..=8);
        let a = random_weak_order(&mut rng, n)?;
        let b = random_weak_order(&mut rng, n)?;
        let c = random_weak_order(&mut rng, n)?;
        let d = |x: &WeakOrder, y: &WeakOrder| complete::probabilistic(x, y);
        reflexive += usize::from(d(&a, &a)? == 0.0 && (d(&a, &b)? == 0.0) == (a == b));
        symmetric += usize::from(d(&a, &b)? == d(&b, &a)?);
        triangle += usize::from(d(&a, &c)? <= d(&a, &b)? + d(&b, &c)? + tol);
    }
    s.count("weak-order reflexivity", reflexive, triples, triples);
    s.count("weak-order symmetry", symmetric, triples, triples);
    s.count("weak-order triangle inequality", triangle, triples, triples);

    let cfg = EstimationConfig::default().with_samples(20_000);
    let (mut ok_sym, mut ok_tri, mut ok_refl) = (0, 0, 0);
    let utility_triples = 100usize;
    for t in 0..utility_triples as u64 {
        let n = rng.random_range(2..=5);
        let space = OutcomeSpace::numbered(n)?;
        let mut draw = || UtilityVector::new(space.clone(), (0..n).map(|_| rng.random::<f64>()).collect());
        let (u, v, w) = (draw()?, draw()?, draw()?);
        let cfg = cfg.clone().with_seed(t);
        let d = |x: &UtilityVector, y: &UtilityVector| probabilistic_distance_utilities(x, y, &cfg);
        let (uv, vw, uw) = (d(&u, &v)?, d(&v, &w)?, d(&u, &w)?);
        let se = (uv.standard_error().powi(2) + vw.standard_error().powi(2) + uw.standard_error().powi(2)).sqrt();
        ok_tri += usize::from(uw.value <= uv.value + vw.value + 3.0 * se);
        ok_sym += usize::from(d(&v, &u)?.value == uv.value);
        ok_refl += usize::from(d(&u, &u)?.value == 0.0);
    }
    s.count("utility reflexivity", ok_refl, utility_triples, utility_triples);
    s.count("utility symmetry", ok_sym, utility_triples, utility_triples);
    s.count("utility triangle inequality within 3 standard errors", ok_tri, utility_triples, utility_triples);

    let mut zero = 0;
    let cases = 100usize;
    for t in 0..cases as u64 {
        let n = rng.random_range(2..=6);
        let space = OutcomeSpace::numbered(n)?;
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let alpha = rng.random_range(0.01..100.0);
        let beta = rng.random_range(-100.0..100.0);
        let u = UtilityVector::new(space.clone(), values.clone())?;
        let v = UtilityVector::new(space, values.iter().map(|x| alpha * x + beta).collect())?;
        let e = probabilistic_distance_utilities(&u, &v, &EstimationConfig::default().with_samples(2000).with_seed(t))?;
        zero += usize::from(e.value == 0.0);
    }
    s.count("affine copies at distance 0", zero, cases, cases);
    Ok(())
}

/// A random partial order on `n` outcomes: forward edges of a random
/// permutation with probability `p`, a few merged neighbours.
pub(crate) fn random_partial<R: Rng>(rng: &mut R, n: usize, p: f64, ties: usize) -> Result<PartialPreferenceOrder> {
    let space = OutcomeSpace::numbered(n)?;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut b = OrderBuilder::new(space);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                b.add_strict(perm[i], perm[j])?;
            }
        }
    }
    for _ in 0..ties {
        if n >= 2 {
            let i = rng.random_range(0..n - 1);
            // may clash with a strict edge; then the builder is unchanged
            let _ = b.add_indifferent(perm[i], perm[i + 1]);
        }
    }
    Ok(b.finish())
}

fn factorial(m: usize) -> u128 {
    (1..=m as u128).product()
}

fn linext(s: &mut Suite) -> Result<()> {
    let limits = ExtensionLimits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut agree = 0;
    let total = 200;
    for _ in 0..total {
        let n = rng.random_range(1..=8);
        let p = rng.random_range(0.0..0.6);
        let ties = rng.random_range(0..2);
        let poset = random_partial(&mut rng, n, p, ties)?;
        let enumerated = enumerate_extensions(&poset, &limits)?;
        agree += usize::from(count_extensions(&poset, &limits)? == enumerated.len() as u128);
    }
    s.count("count equals enumeration", agree, total, total);
    for m in 1..=8 {
        let anti = PartialPreferenceOrder::vacuous(OutcomeSpace::numbered(m)?);
        s.push(format!("antichain of {m}"), factorial(m), count_extensions(&anti, &limits)?, count_extensions(&anti, &limits)? == factorial(m));
        let order: Vec<usize> = (0..m).collect();
        let chain = WeakOrder::strict(OutcomeSpace::numbered(m)?, &order)?.to_partial();
        let c = count_extensions(&chain, &limits)?;
        s.push(format!("chain of {m}"), 1, c, c == 1);
    }
    Ok(())
}

/// Posets for the uniformity checks: the 3-antichain, the V-poset and three
/// random posets with 5 to 7 classes and at most 40 extensions.
pub(crate) fn sampler_posets() -> Result<Vec<(String, PartialPreferenceOrder)>> {
    let abc = OutcomeSpace::new(["a", "b", "c"])?;
    let mut out = vec![
        ("antichain".to_string(), parse_partial_order(&abc, "")?),
        ("V".to_string(), parse_partial_order(&abc, "a < c; b < c")?),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let limits = ExtensionLimits::default();
    for m in 5..=7 {
        loop {
            let poset = random_partial(&mut rng, m, 0.45, 0)?;
            let c = count_extensions(&poset, &limits)?;
            if poset.class_count() == m && (8..=40).contains(&c) {
                out.push((format!("random m={m} ({c} extensions)"), poset));
                break;
            }
        }
    }
    Ok(out)
}

fn sampler(s: &mut Suite) -> Result<()> {
    let start = Instant::now();
    let limits = ExtensionLimits::default();
    let draws = 50_000;
    for (i, (name, poset)) in sampler_posets()?.into_iter().enumerate() {
        let cfg = SamplerConfig {
            epsilon: 0.01,
            seed: 600 + i as u64,
            ..SamplerConfig::default()
        };
        let sample = sample_many(&poset, draws, &cfg)?;
        let tv = tv_to_uniform(&poset, &sample, &limits)?;
        s.push(format!("{name}: TV to uniform"), "<= 0.02", format!("{tv:.4}"), tv <= 0.02);
        let valid = sample
            .iter()
            .filter(|e| is_extension(&e.to_weak_order(&poset), &poset).unwrap_or(false))
            .count();
        s.count(format!("{name}: draws are extensions"), valid, draws, draws);
    }
    s.timed("sampler", start, 120.0);
    Ok(())
}

/// Random pairs over a shared space of 2 to 6 outcomes.
pub(crate) fn estimator_pairs(count: usize) -> Result<Vec<(PartialPreferenceOrder, PartialPreferenceOrder)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=6);
            let mut draw = || {
                let (p, ties) = (rng.random_range(0.0..0.5), rng.random_range(0..2));
                random_partial(&mut rng, n, p, ties)
            };
            let p1 = draw()?;
            let p2 = draw()?;
            Ok((p1, p2))
        })
        .collect()
}

fn estimator(s: &mut Suite) -> Result<()> {
    let start = Instant::now();
    let pairs = estimator_pairs(50)?;
    let exact_cfg = EstimationConfig::default().with_mode(Mode::Exact);
    let mut within = 0;
    let mut total = 0;
    for (i, (p1, p2)) in pairs.iter().enumerate() {
        let kind = MetricKind::ALL[i % 3];
        let exact = avg_distance(p1, p2, kind, &exact_cfg)?.value;
        for seed in 0..2u64 {
            let cfg = EstimationConfig::default()
                .with_mode(Mode::Sampled)
                .with_samples(10_000)
                .with_seed(1000 * i as u64 + seed);
            let mc = avg_distance(p1, p2, kind, &cfg)?;
            total += 1;
            within += usize::from((mc.value - exact).abs() <= 3.0 * mc.standard_error() + 1e-12);
        }
    }
    s.count("Monte Carlo within 3 standard errors", within, total, (total * 99).div_ceil(100));

    let abc = OutcomeSpace::new(["a", "b", "c"])?;
    let v = parse_partial_order(&abc, "a < c; b < c")?;
    let chain = parse_partial_order(&abc, "a < b < c")?;
    let exact = avg_distance(&v, &chain, MetricKind::Probabilistic, &exact_cfg)?.value;
    let seeds = 1000;
    let mut covered = 0;
    for seed in 0..seeds {
        let cfg = EstimationConfig::default()
            .with_mode(Mode::Sampled)
            .with_samples(1000)
            .with_seed(seed);
        covered += usize::from(avg_distance(&v, &chain, MetricKind::Probabilistic, &cfg)?.contains(exact));
    }
    let c = EstimationConfig::default().confidence_c;
    s.count("Chebyshev interval coverage at c = 20", covered, seeds as usize, ((1.0 - 1.0 / c) * seeds as f64).ceil() as usize);
    s.timed("estimator", start, 300.0);
    Ok(())
}

/// Every partial preference order on `n` labelled outcomes.
pub fn all_partial_orders(n: usize) -> Result<Vec<PartialPreferenceOrder>> {
    let space = OutcomeSpace::numbered(n)?;
    let mut out = Vec::new();
    // set partitions as restricted growth strings
    let mut rgs = vec![0usize; n];
    loop {
        let m = rgs.iter().max().map_or(0, |x| x + 1);
        let reps: Vec<usize> = (0..m).map(|c| rgs.iter().position(|&x| x == c).unwrap()).collect();
        let ind: Vec<(usize, usize)> = (0..n).filter(|&o| reps[rgs[o]] != o).map(|o| (reps[rgs[o]], o)).collect();
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|x| (0..m).filter(move |&y| y != x).map(move |y| (x, y))).collect();
        for mask in 0u32..(1 << pairs.len()) {
            let rel = |x: usize, y: usize| x != y && mask >> pairs.iter().position(|&p| p == (x, y)).unwrap() & 1 == 1;
            let antisymmetric = (0..m).all(|x| (0..m).all(|y| !(rel(x, y) && rel(y, x))));
            let transitive = (0..m).all(|x| (0..m).all(|y| (0..m).all(|z| !(rel(x, y) && rel(y, z)) || rel(x, z))));
            if antisymmetric && transitive {
                let strict: Vec<(usize, usize)> = pairs.iter().filter(|&&(x, y)| rel(x, y)).map(|&(x, y)| (reps[x], reps[y])).collect();
                out.push(PartialPreferenceOrder::build(space.clone(), &ind, &strict)?);
            }
        }
        // next restricted growth string
        let mut i = n;
        loop {
            if i <= 1 {
                return Ok(out);
            }
            i -= 1;
            let prefix_max = rgs[..i].iter().max().copied().unwrap_or(0);
            if rgs[i] <= prefix_max {
                rgs[i] += 1;
                for x in &mut rgs[i + 1..] {
                    *x = 0;
                }
                break;
            }
        }
    }
}

fn generalized(s: &mut Suite) -> Result<()> {
    let orders = all_partial_orders(4)?;
    s.push("partial orders on 4 outcomes", 355, orders.len(), orders.len() == 355);
    let limits = ExtensionLimits::default();
    let heights: Vec<Vec<f64>> = orders
        .iter()
        .map(|o| Ok(average_heights(o, HeightMode::Exact, &SamplerConfig::default(), &limits)?.values().to_vec()))
        .collect::<Result<_>>()?;
    let k = orders.len();
    for (name, f) in [
        ("generalized footrule", complete::half_l1 as fn(&[f64], &[f64]) -> f64),
        ("generalized euclidean", complete::l2),
    ] {
        let d: Vec<f64> = (0..k * k).map(|i| f(&heights[i / k], &heights[i % k])).collect();
        let mut bad = Vec::new();
        for x in 0..k {
            if d[x * k + x] != 0.0 {
                bad.push("reflexivity");
            }
            for y in 0..k {
                if d[x * k + y] != d[y * k + x] {
                    bad.push("symmetry");
                }
                if (d[x * k + y] == 0.0) != (heights[x] == heights[y]) {
                    bad.push("zero iff equal heights");
                }
                for z in 0..k {
                    if d[x * k + z] > d[x * k + y] + d[y * k + z] + 1e-12 {
                        bad.push("triangle inequality");
                    }
                }
            }
        }
        s.push(format!("{name} metric axioms over all triples"), "no violations", format!("{} violations", bad.len()), bad.is_empty());
    }
    let abc = OutcomeSpace::new(["a", "b", "c"])?;
    let anti = parse_partial_order(&abc, "")?;
    let chain = parse_partial_order(&abc, "a < b < c")?;
    let cfg = EstimationConfig::default().with_mode(Mode::Exact);
    let f = generalized_footrule(&anti, &chain, &cfg)?.value;
    let e = generalized_euclidean(&anti, &chain, &cfg)?.value;
    s.push("generalized footrule antichain vs chain", 1, f, f == 1.0);
    s.push("generalized euclidean antichain vs chain", 2f64.sqrt(), e, e == 2f64.sqrt());
    Ok(())
}

/// A case base of 9 random strict orders over 12 outcomes plus a utility
/// function strategically equivalent to the target, which is one of the
/// orders. Returns the base, the target and the names of its class.
pub fn elicitation_fixture(seed: u64) -> Result<(CaseBase, WeakOrder, Vec<String>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = OutcomeSpace::numbered(12)?;
    let mut cb = CaseBase::new(space.clone());
    let target_at = rng.random_range(0..9);
    let twin_at = rng.random_range(0..=9);
    let mut orders = Vec::new();
    for _ in 0..9 {
        let mut p: Vec<usize> = (0..12).collect();
        p.shuffle(&mut rng);
        orders.push(WeakOrder::strict(space.clone(), &p)?);
    }
    let target = orders[target_at].clone();
    let scale = rng.random_range(0.5..5.0);
    let shift = rng.random_range(-10.0..10.0);
    let twin = UtilityVector::new(space, target.heights().values().iter().map(|h| scale * h + shift).collect())?;
    let mut cases: Vec<(String, Case)> = orders
        .into_iter()
        .enumerate()
        .map(|(i, o)| (format!("case{i}"), Case::Order(o)))
        .collect();
    cases.insert(twin_at, ("twin".to_string(), Case::Utility(twin)));
    for (name, case) in cases {
        cb.insert(name, case)?;
    }
    Ok((cb, target, vec![format!("case{target_at}"), "twin".to_string()]))
}

/// Estimation settings for the elicitation runs: sampled estimates from
/// 200 draws with a short chain.
pub fn elicitation_config(seed: u64) -> EstimationConfig {
    let mut cfg = EstimationConfig::default()
        .with_mode(Mode::Sampled)
        .with_samples(200)
        .with_seed(seed);
    cfg.sampler.step_constant = 1.0;
    cfg
}

fn elicitation(s: &mut Suite) -> Result<()> {
    let start = Instant::now();
    let runs = 20;
    let (mut monotone, mut reached) = (0, 0);
    for f in 0..runs {
        let (cb, target, mut class) = elicitation_fixture(900 + f)?;
        let log = run_elicitation(&target, &cb, 40, MetricKind::Probabilistic, &elicitation_config(f))?;
        let sizes = log.closest_sizes();
        monotone += usize::from(sizes.windows(2).all(|w| w[1] <= w[0]));
        let mut got = log.final_closest.clone();
        got.sort();
        class.sort();
        reached += usize::from(got == class && log.steps.len() <= 40);
    }
    s.count("closest-set size non-increasing", monotone, runs as usize, runs as usize);
    s.count("ends at the target's class within 40 queries", reached, runs as usize, runs as usize);
    s.timed("elicitation", start, 120.0);
    Ok(())
}

fn sizing(s: &mut Suite) -> Result<()> {
    for (c, tau, eps, k) in [(100.0, 1.0, 0.1, 40000), (2.0, 1.0, 1.0, 8), (10.0, 0.5, 0.05, 8000)] {
        let got = chebyshev_sample_size(c, tau, eps)?;
        s.push(format!("sample size for c={c}, tau={tau}, epsilon={eps}"), k, got, got == k);
    }
    Ok(())
}
