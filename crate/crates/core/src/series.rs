//! Exact truncated series in `(m, x)` and the expansion constants derived
//! from them.
//!
//! For an integer `k ≥ 1` the core factor `(e^{x^k/k!} Q(k, x))^m` is
//! expanded with `m` kept symbolic, so every coefficient of `m^j x^b` is an
//! exact rational. The tables `C5` (core factor) and `C6` (core factor times
//! `h₀(x) = e^{-x} / (2Q(k, x) − 1)`) are read off the index domain
//! `1 ≤ j ≤ k`, `jk + j ≤ b ≤ jk + k`. The real constants `C1, C2, C3, C7,
//! C8` and the centering sequence `μ_{r,n}` follow in closed form.

use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{KcutError, Result};
use crate::specfun::gamma_unchecked;

/// Largest `k` accepted by the expansion routines.
pub const MAX_K: usize = 8;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Truncated univariate power series with exact rational coefficients.
/// Index `i` holds the coefficient of `x^i`.
pub(crate) mod pseries {
    use super::*;

    pub fn truncate(mut p: Vec<BigRational>, cap: usize) -> Vec<BigRational> {
        p.resize(cap + 1, BigRational::zero());
        p
    }

    pub fn mul(a: &[BigRational], b: &[BigRational], cap: usize) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); cap + 1];
        for (i, ai) in a.iter().enumerate().take(cap + 1) {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate().take(cap + 1 - i) {
                if !bj.is_zero() {
                    out[i + j] += ai * bj;
                }
            }
        }
        out
    }

    /// exp(f) for a series with f(0) = 0, via g' = f' g.
    pub fn exp(f: &[BigRational], cap: usize) -> Vec<BigRational> {
        assert!(f.first().is_none_or(|c| c.is_zero()));
        let f = truncate(f.to_vec(), cap);
        let mut g = vec![BigRational::zero(); cap + 1];
        g[0] = BigRational::one();
        for n in 1..=cap {
            let mut acc = BigRational::zero();
            for i in 1..=n {
                if !f[i].is_zero() {
                    acc += rat(i as i64) * &f[i] * &g[n - i];
                }
            }
            g[n] = acc / rat(n as i64);
        }
        g
    }

    /// 1 / f for a series with f(0) ≠ 0.
    pub fn recip(f: &[BigRational], cap: usize) -> Vec<BigRational> {
        let f = truncate(f.to_vec(), cap);
        assert!(!f[0].is_zero());
        let mut g = vec![BigRational::zero(); cap + 1];
        g[0] = f[0].recip();
        for n in 1..=cap {
            let mut acc = BigRational::zero();
            for i in 1..=n {
                if !f[i].is_zero() {
                    acc += &f[i] * &g[n - i];
                }
            }
            g[n] = -acc * &g[0];
        }
        g
    }

    /// Σ_{i<k} x^i / i!, the polynomial part of Q(k, x) = e^{-x} Σ_{i<k} x^i/i!.
    pub fn truncated_exp_poly(k: usize, cap: usize) -> Vec<BigRational> {
        let mut p = vec![BigRational::zero(); cap + 1];
        for (i, c) in p.iter_mut().enumerate().take(k.min(cap + 1)) {
            *c = BigRational::new(BigInt::one(), factorial(i));
        }
        p
    }
}

/// Truncated bivariate series Σ c(j, b) m^j x^b with exact rational
/// coefficients; terms with `j > j_cap` or `b > b_cap` are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiSeries {
    j_cap: usize,
    b_cap: usize,
    coef: Vec<Vec<BigRational>>,
}

impl BiSeries {
    pub fn zero(j_cap: usize, b_cap: usize) -> Self {
        Self {
            j_cap,
            b_cap,
            coef: vec![vec![BigRational::zero(); b_cap + 1]; j_cap + 1],
        }
    }

    pub fn one(j_cap: usize, b_cap: usize) -> Self {
        let mut s = Self::zero(j_cap, b_cap);
        s.coef[0][0] = BigRational::one();
        s
    }

    /// Embed a series in x alone (constant in m).
    pub fn from_x_series(p: &[BigRational], j_cap: usize, b_cap: usize) -> Self {
        let mut s = Self::zero(j_cap, b_cap);
        for (b, c) in p.iter().enumerate().take(b_cap + 1) {
            s.coef[0][b] = c.clone();
        }
        s
    }

    /// Outer product of a polynomial in m and a series in x.
    pub fn from_product(m_poly: &[BigRational], x_series: &[BigRational], j_cap: usize, b_cap: usize) -> Self {
        let mut s = Self::zero(j_cap, b_cap);
        for (j, mj) in m_poly.iter().enumerate().take(j_cap + 1) {
            if mj.is_zero() {
                continue;
            }
            for (b, xb) in x_series.iter().enumerate().take(b_cap + 1) {
                if !xb.is_zero() {
                    s.coef[j][b] = mj * xb;
                }
            }
        }
        s
    }

    pub fn j_cap(&self) -> usize {
        self.j_cap
    }

    pub fn b_cap(&self) -> usize {
        self.b_cap
    }

    /// Coefficient of m^j x^b; zero outside the caps.
    pub fn get(&self, j: usize, b: usize) -> BigRational {
        if j > self.j_cap || b > self.b_cap {
            BigRational::zero()
        } else {
            self.coef[j][b].clone()
        }
    }

    pub fn set(&mut self, j: usize, b: usize, value: BigRational) {
        assert!(j <= self.j_cap && b <= self.b_cap, "coefficient ({j}, {b}) beyond caps");
        self.coef[j][b] = value;
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = self.clone();
        for row in &mut out.coef {
            for v in row.iter_mut() {
                *v *= c;
            }
        }
        out
    }

    /// Nonzero terms as a sorted map.
    pub fn terms(&self) -> BTreeMap<(usize, usize), BigRational> {
        let mut out = BTreeMap::new();
        for (j, row) in self.coef.iter().enumerate() {
            for (b, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    out.insert((j, b), c.clone());
                }
            }
        }
        out
    }

    fn caps_of(&self, other: &Self) -> (usize, usize) {
        (self.j_cap.min(other.j_cap), self.b_cap.min(other.b_cap))
    }
}

impl Add for &BiSeries {
    type Output = BiSeries;
    fn add(self, rhs: &BiSeries) -> BiSeries {
        let (jc, bc) = self.caps_of(rhs);
        let mut out = BiSeries::zero(jc, bc);
        for j in 0..=jc {
            for b in 0..=bc {
                out.coef[j][b] = &self.coef[j][b] + &rhs.coef[j][b];
            }
        }
        out
    }
}

impl Mul for &BiSeries {
    type Output = BiSeries;
    fn mul(self, rhs: &BiSeries) -> BiSeries {
        let (jc, bc) = self.caps_of(rhs);
        let mut out = BiSeries::zero(jc, bc);
        for j1 in 0..=jc {
            for b1 in 0..=bc {
                let c1 = &self.coef[j1][b1];
                if c1.is_zero() {
                    continue;
                }
                for j2 in 0..=(jc - j1) {
                    for b2 in 0..=(bc - b1) {
                        let c2 = &rhs.coef[j2][b2];
                        if !c2.is_zero() {
                            out.coef[j1 + j2][b1 + b2] += c1 * c2;
                        }
                    }
                }
            }
        }
        out
    }
}

/// Coefficients (in m) of the binomial polynomial C(m, i) = m(m−1)…(m−i+1)/i!.
pub fn binomial_poly(i: usize) -> Vec<BigRational> {
    let mut p = vec![BigRational::one()];
    for l in 0..i {
        // multiply by (m − l)
        let mut next = vec![BigRational::zero(); p.len() + 1];
        for (d, c) in p.iter().enumerate() {
            next[d + 1] += c;
            next[d] -= c * rat(l as i64);
        }
        p = next;
    }
    let fact = BigRational::from_integer(factorial(i));
    p.into_iter().map(|c| c / &fact).collect()
}

/// (1 + p(x))^m with m symbolic, for a series `p` with p(0) = 0.
pub fn binomial_power(p: &[BigRational], j_cap: usize, b_cap: usize) -> BiSeries {
    let p = pseries::truncate(p.to_vec(), b_cap);
    assert!(p[0].is_zero(), "binomial_power needs p(0) = 0");
    let valuation = p.iter().position(|c| !c.is_zero());
    let mut out = BiSeries::one(j_cap, b_cap);
    let Some(v) = valuation else {
        return out;
    };
    let mut power = p.clone();
    for i in 1..=(b_cap / v) {
        let term = BiSeries::from_product(&binomial_poly(i), &power, j_cap, b_cap);
        out = &out + &term;
        power = pseries::mul(&power, &p, b_cap);
    }
    out
}

/// Truncation order in x used for both expansions.
pub fn x_cap(k: usize) -> usize {
    k * k + 2 * k
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(KcutError::domain("k must be at least 1"))
    } else if k > MAX_K {
        Err(KcutError::config(format!("k = {k} exceeds the expansion cap {MAX_K}")))
    } else {
        Ok(())
    }
}

/// e^{x^k/k!} Q(k, x) − 1 as an exact series in x.
fn core_deviation(k: usize, cap: usize) -> Vec<BigRational> {
    let mut exponent = vec![BigRational::zero(); cap + 1];
    exponent[1] = -BigRational::one();
    if k <= cap {
        exponent[k] += BigRational::new(BigInt::one(), factorial(k));
    }
    let e = pseries::exp(&exponent, cap);
    let mut p = pseries::mul(&e, &pseries::truncated_exp_poly(k, cap), cap);
    p[0] -= BigRational::one();
    p
}

/// h₀(x) = e^{-x} / (2Q(k, x) − 1) as an exact series in x.
pub fn h0_series(k: usize, cap: usize) -> Vec<BigRational> {
    let mut minus_x = vec![BigRational::zero(); cap + 1];
    minus_x[1] = -BigRational::one();
    let e = pseries::exp(&minus_x, cap);
    let q = pseries::mul(&e, &pseries::truncated_exp_poly(k, cap), cap);
    let denom: Vec<BigRational> = q
        .iter()
        .enumerate()
        .map(|(i, c)| if i == 0 { c * rat(2) - BigRational::one() } else { c * rat(2) })
        .collect();
    pseries::mul(&e, &pseries::recip(&denom, cap), cap)
}

/// Full expansion of (e^{x^k/k!} Q(k, x))^m in (m, x), truncated at
/// `x^{k²+2k}`.
pub fn expand_core(k: usize) -> Result<BiSeries> {
    check_k(k)?;
    let cap = x_cap(k);
    let p = core_deviation(k, cap);
    Ok(binomial_power(&p, cap / (k + 1), cap))
}

/// Full expansion of h₀(x) (e^{x^k/k!} Q(k, x))^m in (m, x).
pub fn expand_h0(k: usize) -> Result<BiSeries> {
    check_k(k)?;
    let cap = x_cap(k);
    let core = expand_core(k)?;
    let h0 = BiSeries::from_x_series(&h0_series(k, cap), core.j_cap(), cap);
    Ok(&h0 * &core)
}

/// The index set {(j, b) : 1 ≤ j ≤ k, jk + j ≤ b ≤ jk + k}.
pub fn index_domain(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 1..=k {
        for b in (j * k + j)..=(j * k + k) {
            out.push((j, b));
        }
    }
    out
}

/// Restrict an expansion to the published index domain. Zero coefficients
/// are kept so the key set is always exactly the domain.
pub fn domain_table(series: &BiSeries, k: usize) -> BTreeMap<(usize, usize), BigRational> {
    index_domain(k)
        .into_iter()
        .map(|(j, b)| ((j, b), series.get(j, b)))
        .collect()
}

/// The `C5(j, b)` table for `k`.
pub fn c5_table(k: usize) -> Result<BTreeMap<(usize, usize), BigRational>> {
    Ok(domain_table(&expand_core(k)?, k))
}

/// The `C6(j, b)` table for `k`.
pub fn c6_table(k: usize) -> Result<BTreeMap<(usize, usize), BigRational>> {
    Ok(domain_table(&expand_h0(k)?, k))
}

pub(crate) fn rational_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // fall back through the decimal expansion for extreme sizes
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Expansion constants for a given `(k, r)`.
#[derive(Debug, Clone)]
pub struct ConstantTable {
    pub k: usize,
    pub r: usize,
    /// Validity exponent of the small-x expansion, (1/k + 1/(k+1))/2.
    pub k0: f64,
    pub c5: BTreeMap<(usize, usize), BigRational>,
    pub c6: BTreeMap<(usize, usize), BigRational>,
    /// `c1[i-1] = C1(r, i)` for i ∈ [1, k].
    pub c1: Vec<f64>,
    pub c2: f64,
    pub c3: f64,
    /// `c7[i-1] = C7(r, i)`.
    pub c7: Vec<f64>,
    /// `C8(r, j, b)` over the index domain.
    pub c8: BTreeMap<(usize, usize), f64>,
}

/// Evaluate the constant table for `1 ≤ r ≤ k`.
pub fn constants(k: usize, r: usize) -> Result<ConstantTable> {
    check_k(k)?;
    if r == 0 || r > k {
        return Err(KcutError::domain(format!("r = {r} must lie in [1, {k}]")));
    }
    let c5 = c5_table(k)?;
    let c6 = c6_table(k)?;
    let (kf, rf) = (k as f64, r as f64);
    let kfact = gamma_unchecked(kf + 1.0);
    let a = rf / kf;
    let gamma_a = gamma_unchecked(a);

    let c2 = kfact.powf(a) * gamma_a / (kf * kf * gamma_unchecked(rf));
    let c3 = 1.0 / gamma_unchecked(1.0 + a);
    let c7: Vec<f64> = (1..=k)
        .map(|i| {
            let i_f = i as f64;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * kf * kfact.powf(i_f / kf) * gamma_unchecked((i_f + rf) / kf)
                / (rf * gamma_unchecked(i_f + 1.0) * gamma_a)
        })
        .collect();
    let c8: BTreeMap<(usize, usize), f64> = c6
        .iter()
        .map(|(&(j, b), c)| {
            let bf = b as f64;
            let v = kf * kfact.powf(bf / kf) * rational_to_f64(c) * gamma_unchecked((bf + rf) / kf) / (rf * gamma_a);
            ((j, b), v)
        })
        .collect();
    let c1 = (1..=k)
        .map(|i| c7[i - 1] + (1..=i).map(|j| c8[&(j, j * k + i)]).sum::<f64>())
        .collect();
    Ok(ConstantTable {
        k,
        r,
        k0: 0.5 * (1.0 / kf + 1.0 / (kf + 1.0)),
        c5,
        c6,
        c1,
        c2,
        c3,
        c7,
        c8,
    })
}

impl ConstantTable {
    /// C1(r, i) for i ∈ [1, k].
    pub fn c1(&self, i: usize) -> f64 {
        self.c1[i - 1]
    }

    /// The centering sequence μ_{r,n} at size `n ≥ 2`.
    pub fn mu(&self, n: f64) -> Result<f64> {
        if !(n >= 2.0) {
            return Err(KcutError::domain(format!("mu requires n ≥ 2, got {n}")));
        }
        let lg = n.log2();
        let kf = self.k as f64;
        let mut mu = kf / self.r as f64 * lg + lg.log2();
        for i in 1..=self.k {
            mu += self.c1(i) * lg.powf(1.0 - i as f64 / kf);
        }
        Ok(mu)
    }

    /// Multiplier lg(n)^{r/k+1} / (n C2(r)) mapping X_{n,r} to its rescaled scale.
    pub fn rescale_factor(&self, n: f64) -> f64 {
        let lg = n.log2();
        lg.powf(self.r as f64 / self.k as f64 + 1.0) / (n * self.c2)
    }
}

/// μ_{r,n} computed from a fresh constant table.
pub fn mu(r: usize, k: usize, n: f64) -> Result<f64> {
    constants(k, r)?.mu(n)
}

fn real17(x: f64) -> Box<serde_json::value::RawValue> {
    let s = if x.is_finite() { format!("{x:.16e}") } else { "null".to_string() };
    serde_json::value::RawValue::from_string(s).expect("formatted float is valid JSON")
}

#[derive(Serialize)]
struct RationalEntry {
    j: usize,
    b: usize,
    value: String,
}

#[derive(Serialize)]
struct RealEntry {
    j: usize,
    b: usize,
    value: Box<serde_json::value::RawValue>,
}

impl Serialize for ConstantTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rationals = |t: &BTreeMap<(usize, usize), BigRational>| -> Vec<RationalEntry> {
            t.iter()
                .map(|(&(j, b), v)| RationalEntry { j, b, value: rational_string(v) })
                .collect()
        };
        let mut st = s.serialize_struct("ConstantTable", 10)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("r", &self.r)?;
        st.serialize_field("k0", &real17(self.k0))?;
        st.serialize_field("C1", &self.c1.iter().map(|&x| real17(x)).collect::<Vec<_>>())?;
        st.serialize_field("C2", &real17(self.c2))?;
        st.serialize_field("C3", &real17(self.c3))?;
        st.serialize_field("C5", &rationals(&self.c5))?;
        st.serialize_field("C6", &rationals(&self.c6))?;
        st.serialize_field("C7", &self.c7.iter().map(|&x| real17(x)).collect::<Vec<_>>())?;
        let c8: Vec<RealEntry> = self
            .c8
            .iter()
            .map(|(&(j, b), &v)| RealEntry { j, b, value: real17(v) })
            .collect();
        st.serialize_field("C8", &c8)?;
        st.end()
    }
}

/// True when every coefficient of `s` vanishes at index `(j, b)` with
/// `j > 0` (the series does not depend on m).
pub fn is_m_free(s: &BiSeries) -> bool {
    s.terms().keys().all(|&(j, _)| j == 0)
}

/// Largest absolute coefficient, as a rough size diagnostic.
pub fn max_abs_coefficient(s: &BiSeries) -> BigRational {
    s.terms().values().map(|c| c.abs()).max().unwrap_or_else(BigRational::zero)
}
