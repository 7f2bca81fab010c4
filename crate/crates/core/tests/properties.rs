use std::sync::Arc;

use proptest::prelude::*;

use prefdist::casebase::{merge_default, Case, CaseBase};
use prefdist::complete::{self, MetricKind, DISTANCE_TOLERANCE};
use prefdist::estimate::{EstimationConfig, Mode, SampleCount};
use prefdist::linext::{count_extensions, enumerate_extensions, ExtensionLimits, SamplerConfig};
use prefdist::orders::{parse_partial_order, parse_weak_order};
use prefdist::partial_metrics::{avg_distance, extreme_interval, generalized_footrule};
use prefdist::utility::{canonical_representative, UtilityVector};
use prefdist::{OrderBuilder, OutcomeSpace, PartialPreferenceOrder, Relation, WeakOrder};

fn space(n: usize) -> Arc<OutcomeSpace> {
    OutcomeSpace::numbered(n).unwrap()
}

fn weak(keys: &[u8]) -> WeakOrder {
    let k: Vec<f64> = keys.iter().map(|&x| x as f64).collect();
    WeakOrder::from_keys(space(keys.len()), &k).unwrap()
}

fn weak_orders(n: usize, count: usize) -> impl Strategy<Value = Vec<WeakOrder>> {
    prop::collection::vec(prop::collection::vec(0u8..n as u8, n), count)
        .prop_map(|all| all.iter().map(|k| weak(k)).collect())
}

fn strict_orders(n: usize, count: usize) -> impl Strategy<Value = Vec<WeakOrder>> {
    prop::collection::vec(Just((0..n).collect::<Vec<usize>>()).prop_shuffle(), count).prop_map(move |all| {
        all.iter().map(|p| WeakOrder::strict(space(n), p).unwrap()).collect()
    })
}

/// Operations `(a, b, tie)` applied through a builder; rejected ones drop out.
fn build(n: usize, ops: &[(usize, usize, bool)]) -> PartialPreferenceOrder {
    let mut b = OrderBuilder::new(space(n));
    for &(a, c, tie) in ops {
        let (a, c) = (a % n, c % n);
        if a == c {
            continue;
        }
        let _ = if tie { b.add_indifferent(a, c) } else { b.add_strict(a, c) };
    }
    b.finish()
}

fn partial(max_n: usize) -> impl Strategy<Value = PartialPreferenceOrder> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, prop::bool::weighted(0.15)), 0..2 * n)
            .prop_map(move |ops| build(n, &ops))
    })
}

fn partial_pair(max_n: usize) -> impl Strategy<Value = (PartialPreferenceOrder, PartialPreferenceOrder)> {
    (2..=max_n).prop_flat_map(|n| {
        let ops = prop::collection::vec((0..n, 0..n, prop::bool::weighted(0.15)), 0..2 * n);
        (ops.clone(), ops).prop_map(move |(a, b)| (build(n, &a), build(n, &b)))
    })
}

fn exact_config() -> EstimationConfig {
    EstimationConfig::default().with_mode(Mode::Exact)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn probabilistic_is_a_metric(os in (2usize..=7).prop_flat_map(|n| weak_orders(n, 3))) {
        let d = |a, b| complete::probabilistic(a, b).unwrap();
        let (x, y, z) = (&os[0], &os[1], &os[2]);
        prop_assert!(d(x, y) >= 0.0);
        prop_assert_eq!(d(x, y) == 0.0, x == y);
        prop_assert_eq!(d(x, y), d(y, x));
        prop_assert!(d(x, z) <= d(x, y) + d(y, z) + DISTANCE_TOLERANCE);
        prop_assert!(d(x, y) <= 1.0);
    }

    #[test]
    fn rank_metrics_on_strict_orders(os in (2usize..=7).prop_flat_map(|n| strict_orders(n, 3))) {
        for kind in [MetricKind::Footrule, MetricKind::Euclidean] {
            let d = |a, b| complete::distance(kind, a, b).unwrap();
            let (x, y, z) = (&os[0], &os[1], &os[2]);
            prop_assert_eq!(d(x, y) == 0.0, x == y);
            prop_assert!((d(x, y) - d(y, x)).abs() <= DISTANCE_TOLERANCE);
            prop_assert!(d(x, z) <= d(x, y) + d(y, z) + 1e-9);
            prop_assert!(d(x, y) <= kind.upper_bound(x.len()) + 1e-9);
        }
    }

    #[test]
    fn closure_is_transitive(p in partial(8)) {
        let n = p.space().len();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let (ab, bc) = (p.relation(a, b), p.relation(b, c));
                    if ab == Relation::Precedes && bc == Relation::Precedes {
                        prop_assert_eq!(p.relation(a, c), Relation::Precedes);
                    }
                    if ab == Relation::Indifferent && bc == Relation::Indifferent {
                        prop_assert_eq!(p.relation(a, c), Relation::Indifferent);
                    }
                    if ab == Relation::Indifferent && bc == Relation::Precedes {
                        prop_assert_eq!(p.relation(a, c), Relation::Precedes);
                    }
                }
                prop_assert_eq!(p.relation(a, b), p.relation(b, a).reverse());
            }
        }
    }

    #[test]
    fn rejected_inserts_leave_the_builder_alone(
        p in partial(7),
        a in 0usize..7,
        b in 0usize..7,
        tie in any::<bool>(),
    ) {
        let n = p.space().len();
        let (a, b) = (a % n, b % n);
        let mut builder = OrderBuilder::from_order(&p);
        let r = if tie { builder.add_indifferent(a, b) } else { builder.add_strict(a, b) };
        if r.is_err() {
            prop_assert_eq!(builder.finish(), p);
        }
    }

    #[test]
    fn restriction_commutes(p in partial(8), mask in any::<u8>(), inner in any::<u8>()) {
        let n = p.space().len();
        let outer: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        prop_assume!(!outer.is_empty());
        let r = p.restrict(&outer).unwrap();
        for (i, &a) in outer.iter().enumerate() {
            for (j, &b) in outer.iter().enumerate() {
                prop_assert_eq!(r.relation(i, j), p.relation(a, b));
            }
        }
        let keep: Vec<usize> = (0..outer.len()).filter(|i| inner >> i & 1 == 1).collect();
        prop_assume!(!keep.is_empty());
        let direct: Vec<usize> = keep.iter().map(|&i| outer[i]).collect();
        let twice = r.restrict(&keep).unwrap();
        let once = p.restrict(&direct).unwrap();
        prop_assert_eq!(twice.to_string(), once.to_string());
        prop_assert_eq!(twice.space().labels(), once.space().labels());
    }

    #[test]
    fn canonical_representative_is_affine_invariant(
        values in prop::collection::vec(-100.0f64..100.0, 2..8),
        alpha in 0.01f64..50.0,
        beta in -100.0f64..100.0,
    ) {
        let s = space(values.len());
        let u = UtilityVector::new(s.clone(), values.clone()).unwrap();
        let r = canonical_representative(&u);
        let rr = canonical_representative(&r);
        prop_assert_eq!(rr.values(), r.values());
        let v = UtilityVector::new(s, values.iter().map(|x| alpha * x + beta).collect()).unwrap();
        let rv = canonical_representative(&v);
        for (x, y) in r.values().iter().zip(rv.values()) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn merge_keeps_elicited_and_stays_acyclic(
        (p, keys) in (2usize..=8).prop_flat_map(|n| (
            prop::collection::vec((0..n, 0..n, prop::bool::weighted(0.15)), 0..2 * n)
                .prop_map(move |ops| build(n, &ops)),
            prop::collection::vec(0u8..n as u8, n),
        ))
    ) {
        let retrieved = weak(&keys);
        let merged = merge_default(&retrieved, &p).unwrap();
        let n = p.space().len();
        for a in 0..n {
            for b in 0..n {
                let r = p.relation(a, b);
                if r != Relation::Incomparable {
                    prop_assert_eq!(merged.relation(a, b), r);
                }
            }
        }
        // a cyclic order would have no linear extension
        prop_assert!(count_extensions(&merged, &ExtensionLimits::default()).unwrap() >= 1);
    }

    #[test]
    fn orders_round_trip_through_text(p in partial(8), keys in prop::collection::vec(0u8..5, 2..8)) {
        let parsed = parse_partial_order(p.space(), &p.to_string()).unwrap();
        prop_assert_eq!(parsed, p);
        let w = weak(&keys);
        prop_assert_eq!(parse_weak_order(w.space(), &w.to_string()).unwrap(), w);
    }

    #[test]
    fn case_bases_round_trip(
        cases in prop::collection::vec(
            (any::<bool>(), prop::collection::vec(0u8..4, 5), prop::collection::vec(-10i32..10, 5)),
            1..6,
        )
    ) {
        let s = space(5);
        let mut cb = CaseBase::new(s.clone());
        for (i, (is_order, keys, values)) in cases.iter().enumerate() {
            let case = if *is_order {
                Case::Order(weak(keys))
            } else {
                let v = values.iter().map(|&x| x as f64 / 4.0).collect();
                Case::Utility(UtilityVector::new(s.clone(), v).unwrap())
            };
            cb.insert(format!("c{i}"), case).unwrap();
        }
        let text = cb.to_text();
        let back = CaseBase::parse(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back.names(), cb.names());
        for (a, b) in back.cases().iter().zip(cb.cases()) {
            prop_assert_eq!(a.order(), b.order());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn counting_matches_enumeration(p in partial(7)) {
        let lim = ExtensionLimits::default();
        let exts = enumerate_extensions(&p, &lim).unwrap();
        prop_assert_eq!(count_extensions(&p, &lim).unwrap(), exts.len() as u128);
    }

    #[test]
    fn average_distance_is_symmetric((p, q) in partial_pair(5)) {
        for kind in MetricKind::ALL {
            let a = avg_distance(&p, &q, kind, &exact_config()).unwrap();
            let b = avg_distance(&q, &p, kind, &exact_config()).unwrap();
            prop_assert!((a.value - b.value).abs() <= 1e-12);
        }
        let seeded = EstimationConfig {
            mode: Mode::Sampled,
            samples: SampleCount::Fixed(50),
            seed: 11,
            sampler: SamplerConfig { step_constant: 1.0, ..SamplerConfig::default() },
            ..EstimationConfig::default()
        };
        let a = avg_distance(&p, &q, MetricKind::Probabilistic, &seeded).unwrap();
        let b = avg_distance(&q, &p, MetricKind::Probabilistic, &seeded).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-12);
    }

    #[test]
    fn generalized_footrule_below_average((p, q) in partial_pair(5)) {
        // the distance of mean heights never exceeds the mean distance
        let g = generalized_footrule(&p, &q, &exact_config()).unwrap().value;
        let a = avg_distance(&p, &q, MetricKind::Footrule, &exact_config()).unwrap().value;
        prop_assert!(g <= a + 1e-9);
    }

    #[test]
    fn sampled_extremes_lie_inside_exact((p, q) in partial_pair(6), seed in any::<u64>()) {
        for kind in MetricKind::ALL {
            let exact = extreme_interval(&p, &q, kind, &exact_config()).unwrap();
            let cfg = EstimationConfig {
                mode: Mode::Sampled,
                samples: SampleCount::Fixed(64),
                seed,
                sampler: SamplerConfig { step_constant: 1.0, ..SamplerConfig::default() },
                ..EstimationConfig::default()
            };
            let sampled = extreme_interval(&p, &q, kind, &cfg).unwrap();
            prop_assert!(exact.contains_interval(&sampled), "{:?} vs {:?}", exact, sampled);
            prop_assert!(!sampled.exact);
        }
    }
}
