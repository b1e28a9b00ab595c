use std::sync::OnceLock;

use kcut_core::cutsim::{simulate_edge_records, simulate_records, CompleteTree};
use kcut_core::exactmean::{expected_records, record_prob, MeanQuery};
use kcut_core::harness::{circular_distance, gamma_of, ks_statistic, subsequence_select_with};
use kcut_core::limitdist::{levy_density, levy_tail, LimitCdf, LimitLaw, LimitParams};
use kcut_core::series::constants;
use kcut_core::specfun::{gamma, q, q_inv, regularized_p};
use proptest::prelude::*;

const SHAPES: [(usize, usize); 4] = [(1, 1), (1, 2), (2, 2), (1, 3)];

fn law_12() -> &'static LimitLaw {
    static L: OnceLock<LimitLaw> = OnceLock::new();
    L.get_or_init(|| LimitLaw::new(&LimitParams::new(1, 2, 0.3).unwrap()).unwrap())
}

fn cdf_12() -> &'static LimitCdf {
    static C: OnceLock<LimitCdf> = OnceLock::new();
    C.get_or_init(|| LimitCdf::new(&LimitParams::new(1, 2, 0.3).unwrap(), &constants(2, 1).unwrap()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn q_inv_round_trips(a in 0.05f64..12.0, ly in -14.0f64..-1e-6) {
        let y = 10f64.powf(ly);
        let x = q_inv(a, y).unwrap();
        let back = q(a, x).unwrap();
        prop_assert!((back - y).abs() <= 1e-10 * y.max(1e-3), "a={a} y={y} x={x} back={back}");
    }

    #[test]
    fn p_plus_q_is_one(a in 0.05f64..30.0, x in 0.0f64..80.0) {
        let s = regularized_p(a, x).unwrap() + q(a, x).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-13);
    }

    #[test]
    fn q_decreasing_in_x(a in 0.05f64..20.0, x in 0.0f64..60.0, dx in 1e-3f64..5.0) {
        prop_assert!(q(a, x + dx).unwrap() <= q(a, x).unwrap());
    }

    #[test]
    fn gamma_recurrence(a in 0.05f64..40.0) {
        let lhs = gamma(a + 1.0).unwrap();
        let rhs = a * gamma(a).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs());
    }

    #[test]
    fn subtree_sizes_add_up(n in 1u64..5000) {
        let t = CompleteTree::new(n).unwrap();
        let mut pop = 0;
        for h in 0..=t.max_height() {
            pop += t.level_population(h);
        }
        prop_assert_eq!(pop, n);
        for i in 1..=n.min(300) {
            let kids: u64 = [2 * i, 2 * i + 1].iter().filter(|&&c| c <= n).map(|&c| t.subtree_size(c)).sum();
            prop_assert_eq!(t.subtree_size(i), 1 + kids);
        }
    }

    #[test]
    fn record_counts_are_nested(n in 1u64..400, k in 1usize..5, seed in any::<u64>()) {
        let t = CompleteTree::new(n).unwrap();
        let s = simulate_records(&t, k, seed).unwrap();
        prop_assert_eq!(s.per_r.iter().sum::<u64>(), s.total);
        // an r-record is also an (r−1)-record
        prop_assert!(s.per_r.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.per_r[k - 1] >= 1);
        prop_assert!(s.total >= k as u64 && s.total <= k as u64 * n);
        let e = simulate_edge_records(&t, k, seed).unwrap();
        prop_assert!(e.total <= k as u64 * (n - 1));
    }

    #[test]
    fn r_equal_k_record_probability(k in 1usize..5, d in 0u64..3000) {
        // all clocks are i.i.d. Gamma(k), so this is 1/(d+1) by symmetry
        let p = record_prob(k, k, d, None).unwrap();
        prop_assert!((p - 1.0 / (d as f64 + 1.0)).abs() < 1e-10 / (d as f64 + 1.0) + 1e-13);
    }

    #[test]
    fn record_probability_monotone(r in 1usize..4, extra in 0usize..2, d in 0u64..500) {
        let k = r + extra;
        let a = record_prob(r, k, d, None).unwrap();
        let b = record_prob(r, k, d + 1, None).unwrap();
        prop_assert!(b <= a + 1e-13);
        let c = record_prob(r, k, d, Some(1.0)).unwrap();
        prop_assert!(c <= a + 1e-13);
    }

    #[test]
    fn levy_density_is_periodic(idx in 0usize..4, g in 0.0f64..1.0, x in 0.01f64..50.0) {
        let (r, k) = SHAPES[idx];
        let p = LimitParams::new(r, k, g).unwrap();
        let d1 = levy_density(x, &p).unwrap();
        let d2 = levy_density(2.0 * x, &p).unwrap();
        prop_assert!((d2 - d1 / 4.0).abs() <= 1e-9 * d1);
        let t1 = levy_tail(x, &p).unwrap();
        let t2 = levy_tail(2.0 * x, &p).unwrap();
        prop_assert!((t2 - t1 / 2.0).abs() <= 1e-9 * t1);
    }

    #[test]
    fn char_fn_is_hermitian_and_bounded(t in -30.0f64..30.0) {
        let law = law_12();
        let a = law.char_fn(t);
        let b = law.char_fn(-t);
        prop_assert!(a.norm() <= 1.0 + 1e-12);
        prop_assert!((a - b.conj()).norm() < 1e-12);
    }

    #[test]
    fn limit_cdf_monotone(y in -150.0f64..30.0, dy in 0.05f64..5.0) {
        let c = cdf_12();
        prop_assert!(c.cdf(y + dy) >= c.cdf(y) - 2e-6);
    }

    #[test]
    fn selection_postconditions(g in 0.0f64..1.0, lo in 16u64..5000, span in 2u64..1_000_000, count in 0usize..12, delta in 0.005f64..0.1) {
        let hi = lo * span;
        let s = subsequence_select_with(g, lo, hi, count, delta).unwrap();
        prop_assert!(s.len() <= count);
        prop_assert!(s.windows(2).all(|w| w[0] < w[1]));
        for n in s {
            prop_assert!(n >= lo && n <= hi);
            prop_assert!(circular_distance(gamma_of(n as f64), g) <= delta);
        }
    }

    #[test]
    fn ks_in_unit_interval(xs in prop::collection::vec(-10.0f64..10.0, 1..50)) {
        let d = ks_statistic(&xs, |x| 1.0 / (1.0 + (-x).exp())).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!(d >= 0.5 / xs.len() as f64 - 1e-15);
    }
}

#[test]
fn expectation_monotone_in_root_time() {
    let mut last = 0.0;
    for y in [0.2, 0.7, 1.5, 3.0, 9.0] {
        let v = expected_records(&MeanQuery { y: Some(y), ..MeanQuery::unconditional(127, 3, 2) }).unwrap();
        assert!(v >= last);
        last = v;
    }
}
