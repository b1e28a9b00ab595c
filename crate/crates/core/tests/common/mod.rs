//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn frac(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn fact(n: usize) -> BigRational {
    (1..=n).fold(BigRational::one(), |a, i| a * int(i as i64))
}

fn mul(a: &[BigRational], b: &[BigRational], cap: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); cap + 1];
    for (i, x) in a.iter().enumerate().take(cap + 1) {
        for (j, y) in b.iter().enumerate().take(cap + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn div(a: &[BigRational], d: &[BigRational], cap: usize) -> Vec<BigRational> {
    let mut q: Vec<BigRational> = Vec::with_capacity(cap + 1);
    for n in 0..=cap {
        let mut acc = a.get(n).cloned().unwrap_or_else(BigRational::zero);
        for i in 1..=n {
            if let Some(di) = d.get(i) {
                acc -= di * &q[n - i];
            }
        }
        q.push(acc / &d[0]);
    }
    q
}

/// e^{-x} Σ_{i<k} x^i/i! term by term.
fn q_series(k: usize, cap: usize) -> Vec<BigRational> {
    let e: Vec<BigRational> = (0..=cap).map(|i| int(if i % 2 == 0 { 1 } else { -1 }) / fact(i)).collect();
    let poly: Vec<BigRational> = (0..k).map(fact).map(|f| BigRational::one() / f).collect();
    mul(&e, &poly, cap)
}

/// e^{x^k/k!} Q(k, x).
fn core_factor(k: usize, cap: usize) -> Vec<BigRational> {
    let mut ek = vec![BigRational::zero(); cap + 1];
    let kf = fact(k);
    let mut j = 0;
    while k * j <= cap {
        let mut c = BigRational::one() / fact(j);
        for _ in 0..j {
            c /= &kf;
        }
        ek[k * j] = c;
        j += 1;
    }
    mul(&ek, &q_series(k, cap), cap)
}

/// Coefficients of m^j x^b of `prefix(x) · core(x)^m`, recovered from the
/// integer values m = 0..=deg by Newton interpolation.
fn interpolate(prefix: &[BigRational], core: &[BigRational], cap: usize, deg: usize) -> BTreeMap<(usize, usize), BigRational> {
    // values[m][b]
    let mut values = Vec::new();
    let mut power = prefix.to_vec();
    power.resize(cap + 1, BigRational::zero());
    for _ in 0..=deg {
        values.push(power.clone());
        power = mul(&power, core, cap);
    }
    let mut out = BTreeMap::new();
    for b in 0..=cap {
        let mut diffs: Vec<BigRational> = values.iter().map(|v| v[b].clone()).collect();
        // forward differences Δ^j at 0
        let mut newton = Vec::new();
        for _ in 0..=deg {
            newton.push(diffs[0].clone());
            diffs = diffs.windows(2).map(|w| &w[1] - &w[0]).collect();
            if diffs.is_empty() {
                break;
            }
        }
        // Σ_j Δ^j C(m, j) in the monomial basis
        let mut mono = vec![BigRational::zero(); deg + 1];
        let mut falling = vec![BigRational::one()];
        for (j, dj) in newton.iter().enumerate() {
            let scale = dj / fact(j);
            for (d, c) in falling.iter().enumerate() {
                mono[d] += &scale * c;
            }
            let mut next = vec![BigRational::zero(); falling.len() + 1];
            for (d, c) in falling.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= c * int(j as i64);
            }
            falling = next;
        }
        for (j, c) in mono.into_iter().enumerate() {
            out.insert((j, b), c);
        }
    }
    out
}

pub fn naive_cap(k: usize) -> usize {
    k * k + 2 * k
}

/// (e^{x^k/k!} Q(k,x))^m expanded naively.
pub fn naive_core(k: usize) -> BTreeMap<(usize, usize), BigRational> {
    let cap = naive_cap(k);
    interpolate(&[BigRational::one()], &core_factor(k, cap), cap, cap / (k + 1))
}

/// e^{-x}/(2Q(k,x) − 1) · (e^{x^k/k!} Q(k,x))^m expanded naively.
pub fn naive_h0(k: usize) -> BTreeMap<(usize, usize), BigRational> {
    let cap = naive_cap(k);
    let q = q_series(k, cap);
    let denom: Vec<BigRational> = q.iter().enumerate().map(|(i, c)| if i == 0 { c * int(2) - BigRational::one() } else { c * int(2) }).collect();
    let e: Vec<BigRational> = (0..=cap).map(|i| int(if i % 2 == 0 { 1 } else { -1 }) / fact(i)).collect();
    let h0 = div(&e, &denom, cap);
    interpolate(&h0, &core_factor(k, cap), cap, cap / (k + 1))
}

/// Mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}
