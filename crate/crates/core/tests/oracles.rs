mod common;

use common::mean_se;
use kcut_core::cutsim::{brute_force_distribution, simulate_batch, CompleteTree, Simulator, Variant};
use kcut_core::exactmean::{expected_records, record_prob, MeanQuery};
use kcut_core::limitdist::{f_constant, LimitCdf, LimitParams};
use kcut_core::rng::{domain, substream};
use kcut_core::series::constants;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

#[test]
fn record_probability_against_direct_sampling() {
    // draw the clocks themselves: T_r ~ Gamma(r), ancestors ~ Gamma(k)
    for (r, k, d, y) in [(1usize, 2usize, 3u64, None), (1, 3, 6, None), (2, 3, 2, Some(1.5)), (1, 2, 10, Some(0.4))] {
        let mut rng = substream(11, domain::MONTE_CARLO, (r * 100 + k * 10) as u64 + d);
        let gr = Gamma::new(r as f64, 1.0).unwrap();
        let gk = Gamma::new(k as f64, 1.0).unwrap();
        let trials = 400_000;
        let mut hits = 0u64;
        for _ in 0..trials {
            let t = gr.sample(&mut rng);
            let ok = y.is_none_or(|y| t < y) && (0..d).all(|_| gk.sample(&mut rng) > t);
            hits += ok as u64;
        }
        let p_hat = hits as f64 / trials as f64;
        let p = record_prob(r, k, d, y).unwrap();
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((p_hat - p).abs() < 4.0 * se, "r={r} k={k} d={d}: {p_hat} vs {p}");
    }
}

#[test]
fn k1_expectation_is_a_harmonic_sum() {
    // node at height h is a record with probability 1/(h+1)
    for n in [7u64, 100, 1000, 65_535] {
        let t = CompleteTree::new(n).unwrap();
        let exact: f64 = (0..=t.max_height()).map(|h| t.level_population(h) as f64 / (h as f64 + 1.0)).sum();
        let got = expected_records(&MeanQuery::unconditional(n, 1, 1)).unwrap();
        assert!((got - exact).abs() < 1e-10 * exact, "n={n}");
    }
}

#[test]
fn empirical_law_matches_enumeration_small() {
    for (n, k) in [(3u64, 1usize), (4, 2), (2, 3)] {
        let pmf = brute_force_distribution(n, k).unwrap();
        let tree = CompleteTree::new(n).unwrap();
        let samples = 60_000u64;
        for sim in [Simulator::Records, Simulator::Process] {
            let batch = simulate_batch(&tree, k, Variant::Node, sim, samples, 5).unwrap();
            for (&x, p) in &pmf.atoms {
                let p = p.to_f64().unwrap();
                let hits = batch.iter().filter(|s| s.total == x).count() as f64 / samples as f64;
                let se = (p * (1.0 - p) / samples as f64).sqrt();
                assert!((hits - p).abs() < 4.5 * se, "n={n} k={k} {sim:?} x={x}");
            }
        }
        let mean: BigRational = pmf.mean();
        let batch = simulate_batch(&tree, k, Variant::Node, Simulator::Records, samples, 6).unwrap();
        let xs: Vec<f64> = batch.iter().map(|s| s.total as f64).collect();
        let (m, se) = mean_se(&xs);
        assert!((m - mean.to_f64().unwrap()).abs() < 4.5 * se);
    }
}

#[test]
fn edge_variant_means() {
    let tree = CompleteTree::new(31).unwrap();
    let batch = simulate_batch(&tree, 2, Variant::Edge, Simulator::Records, 40_000, 8).unwrap();
    for r in 1..=2 {
        let xs: Vec<f64> = batch.iter().map(|s| s.per_r[r - 1] as f64).collect();
        let (m, se) = mean_se(&xs);
        let exact = expected_records(&MeanQuery { variant: Variant::Edge, ..MeanQuery::unconditional(31, 2, r) }).unwrap();
        assert!((m - exact).abs() < 4.5 * se, "r={r}: {m} vs {exact}");
    }
}

#[test]
fn gamma_zero_and_one_give_one_law() {
    for (r, k) in [(1usize, 1usize), (1, 2)] {
        let t = constants(k, r).unwrap();
        let a = LimitCdf::new(&LimitParams::new(r, k, 0.0).unwrap(), &t).unwrap();
        let b = LimitCdf::new(&LimitParams::new(r, k, 1.0).unwrap(), &t).unwrap();
        for y in [-30.0, -3.0, 0.0, 1.0, 2.5] {
            assert!((a.cdf(y) - b.cdf(y)).abs() < 1e-6, "({r},{k}) y={y}");
        }
        let f0 = f_constant(&LimitParams::new(r, k, 0.0).unwrap()).unwrap();
        let f1 = f_constant(&LimitParams::new(r, k, 1.0).unwrap()).unwrap();
        assert!((f0 - f1).abs() < 1e-9);
    }
}

#[test]
fn substreams_do_not_overlap() {
    let mut a = substream(1, domain::RECORDS, 0);
    let mut b = substream(1, domain::RECORDS, 1);
    let xa: Vec<u64> = (0..8).map(|_| a.random()).collect();
    let xb: Vec<u64> = (0..8).map(|_| b.random()).collect();
    assert_ne!(xa, xb);
}
