mod common;

use common::{frac, int, naive_core, naive_h0};
use kcut_core::series::{c5_table, c6_table, constants, expand_core, expand_h0, index_domain, mu, BiSeries};
use std::collections::BTreeMap;
use num_rational::BigRational;

fn assert_same(got: &BiSeries, want: &BTreeMap<(usize, usize), BigRational>, what: &str) {
    assert_eq!(got.j_cap(), want.keys().map(|k| k.0).max().unwrap(), "{what}: m degree");
    for (&(j, b), c) in want {
        assert_eq!(&got.get(j, b), c, "{what}: coefficient of m^{j} x^{b}");
    }
}

#[test]
fn core_expansion_matches_naive_products() {
    for k in 1..=4 {
        assert_same(&expand_core(k).unwrap(), &naive_core(k), &format!("core k={k}"));
    }
}

#[test]
fn h0_expansion_matches_naive_products() {
    for k in 1..=4 {
        assert_same(&expand_h0(k).unwrap(), &naive_h0(k), &format!("h0 k={k}"));
    }
}

#[test]
fn published_k2_core_coefficients() {
    let c5 = c5_table(2).unwrap();
    assert_eq!(c5[&(1, 3)], frac(1, 3));
    assert_eq!(c5[&(1, 4)], frac(-1, 4));
    assert_eq!(c5[&(2, 6)], frac(1, 18));
}

#[test]
fn k2_h0_coefficients_from_oracle() {
    // frozen from the naive oracle
    let naive = naive_h0(2);
    let c6 = c6_table(2).unwrap();
    for (key, v) in [((1, 3), frac(1, 3)), ((1, 4), frac(-7, 12)), ((2, 6), frac(1, 18))] {
        assert_eq!(naive[&key], v);
        assert_eq!(c6[&key], v);
    }
}

#[test]
fn tables_live_on_the_index_domain() {
    for k in 1..=5 {
        let c5 = c5_table(k).unwrap();
        let keys: Vec<_> = c5.keys().copied().collect();
        assert_eq!(keys, index_domain(k));
        assert_eq!(keys.len(), k * (k + 1) / 2);
    }
    assert_eq!(c5_table(1).unwrap()[&(1, 2)], int(0));
}

#[test]
fn k2_prefactors() {
    let t = constants(2, 1).unwrap();
    let pi = std::f64::consts::PI;
    assert!((1.0 / t.c2 - (8.0 / pi).sqrt()).abs() < 1e-12);
    assert!((t.c3 - 2.0 / pi.sqrt()).abs() < 1e-12);
    // the lg^{1/2} term: C1(1,1) from the exact tables
    assert!((t.c1(1) + 2.0 / 3.0 * (2.0 / pi).sqrt()).abs() < 1e-12);
    assert!((t.c1(2) + 5.0 / 6.0).abs() < 1e-12);
    let t2 = constants(2, 2).unwrap();
    assert!(t2.c1(1).abs() < 1e-12);
    assert!((t2.c1(2) + 1.0).abs() < 1e-12);
}

#[test]
fn mu_k1_form() {
    for n in [16.0f64, 1024.0, 1e9] {
        let lg = n.log2();
        assert!((mu(1, 1, n).unwrap() - (lg + lg.log2() - 1.0)).abs() < 1e-12);
    }
}
