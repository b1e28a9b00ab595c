//! The limit law `1 − C3(r) W` of the rescaled record counts.
//!
//! `W` is infinitely divisible with Lévy measure `ν` whose density obeys
//! `d(2x) = d(x)/4`. Everything here is built from one period of the
//! density on `[b, 2b)`, `b = Γ(r/k) 2^{-γ}`, where the fractional-part
//! exponent runs from 0 to 1.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cheb::ChebPanel;
use crate::cutsim::CompleteTree;
use crate::error::{KcutError, Result};
use crate::quad::{integrate, GaussLegendre};
use crate::rng::{domain, substream};
use crate::series::ConstantTable;
use crate::specfun::{gamma_unchecked, q_inv, upper_gamma};

/// Relative size of the omitted s-series tail.
const SERIES_TOL: f64 = 1e-17;
const CHEB_DEGREE: usize = 24;
const MOMENTS: usize = 40;

/// Parameters of the limit law and its numerical evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitParams {
    pub r: usize,
    pub k: usize,
    /// Subsequence parameter in [0, 1]; 0 and 1 give the same law.
    pub gamma: f64,
    /// Hard cap on the number of s-series terms.
    pub s_max: usize,
    pub quad_tol: f64,
    /// Fixed inversion cutoff; `None` selects it adaptively.
    pub t_max: Option<f64>,
}

impl LimitParams {
    pub fn new(r: usize, k: usize, gamma: f64) -> Result<Self> {
        let p = Self { r, k, gamma, s_max: 128, quad_tol: 1e-12, t_max: None };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.r == 0 || self.r > self.k {
            return Err(KcutError::domain(format!("need 1 ≤ r ≤ k, got r = {}, k = {}", self.r, self.k)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(KcutError::domain(format!("gamma must lie in [0, 1], got {}", self.gamma)));
        }
        if self.s_max == 0 {
            return Err(KcutError::config("s_max must be positive"));
        }
        if !(self.quad_tol > 0.0) {
            return Err(KcutError::config("quad_tol must be positive"));
        }
        Ok(())
    }

    fn a(&self) -> f64 {
        self.r as f64 / self.k as f64
    }
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// Σ_s 4^{u−s} e^{x_s} x_s^{1−a}, x_s = Q⁻¹(a, 2^{u−s}). Each term is at
/// most 2^{u−s}/Γ(a), which bounds the omitted tail.
fn density_series(a: f64, gamma_a: f64, u: f64, s_max: usize) -> Result<f64> {
    let ln2 = std::f64::consts::LN_2;
    let mut sum = 0.0;
    for s in 1..=s_max {
        let e = u - s as f64;
        let x = q_inv(a, e.exp2())?;
        let term = (2.0 * e * ln2 + x).exp() * x.powf(1.0 - a);
        sum += term;
        if e.exp2() / gamma_a <= SERIES_TOL * sum {
            break;
        }
    }
    Ok(sum)
}

/// Lévy density of ν_{r,k,γ} at `x > 0`.
pub fn levy_density(x: f64, p: &LimitParams) -> Result<f64> {
    p.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(KcutError::domain(format!("density needs finite x > 0, got {x}")));
    }
    let a = p.a();
    let ga = gamma_unchecked(a);
    let u = frac(p.gamma + (x / ga).log2());
    Ok(ga * ga / (x * x) * density_series(a, ga, u, p.s_max)?)
}

/// Tail ν_{r,k,γ}((x, ∞)).
pub fn levy_tail(x: f64, p: &LimitParams) -> Result<f64> {
    p.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(KcutError::domain(format!("tail needs finite x > 0, got {x}")));
    }
    let a = p.a();
    let ga = gamma_unchecked(a);
    let u = frac(p.gamma + (x / ga).log2());
    let ln2 = std::f64::consts::LN_2;
    let mut sum = 0.0;
    for s in 1..=p.s_max {
        let w = (u - s as f64).exp2();
        sum += w * q_inv(a, w)?;
        // Q⁻¹(a, w) ≤ ln(1/w) bounds the rest by 2^{u−s} ln2 (s + 2)
        if w * ln2 * (s as f64 + 2.0) <= SERIES_TOL * sum {
            break;
        }
    }
    Ok(ga * sum / x)
}

/// Drift constant f_{r,k,γ}.
pub fn f_constant(p: &LimitParams) -> Result<f64> {
    p.validate()?;
    let a = p.a();
    let ga = gamma_unchecked(a);
    let v = frac(p.gamma - ga.log2());
    let ln2 = std::f64::consts::LN_2;
    let mut series = 0.0;
    let mut converged = false;
    for t in 1..=p.s_max {
        let w = (v - t as f64).exp2();
        let x = q_inv(a, w)?;
        // the two published sums are combined term by term; each pair is
        // bounded by w Γ(a) (x + 1) with x ≤ ln(1/w)
        series += (-x).exp() * x.powf(a) - w * ga * x;
        let tail = ga * w * (ln2 * (t as f64 + 2.0) + 1.0);
        if tail <= 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged && p.s_max >= 64 {
        return Err(KcutError::numeric("drift series did not converge", f64::NAN));
    }
    Ok(series + gamma_unchecked(1.0 + a) * (v.exp2() - v - ga.log2() - 1.0))
}

/// One period of the Lévy density, stored as Chebyshev panels on
/// `[b, 2b)`, together with the derived moments and the drift.
#[derive(Debug, Clone)]
pub struct LimitLaw {
    params: LimitParams,
    b: f64,
    panels: Vec<ChebPanel>,
    /// `moments[p] = ∫_b^{2b} y^p d(y) dy`.
    moments: Vec<f64>,
    /// Bound on |ω G(ω)| for the period's Fourier transform G.
    variation: f64,
    drift: f64,
}

impl LimitLaw {
    pub fn new(p: &LimitParams) -> Result<Self> {
        p.validate()?;
        let a = p.a();
        let ga = gamma_unchecked(a);
        let b = ga * (-frac(p.gamma)).exp2();
        // near u → 1 the density behaves like (2b − y)^{(k−r)/r}, smooth
        // exactly when r divides k; otherwise grade the panels toward 2b
        let mut cuts: Vec<f64> = (0..=4).map(|i| b + b * i as f64 / 8.0).collect();
        if p.k.is_multiple_of(p.r) {
            cuts.extend([1.625 * b, 1.75 * b, 1.875 * b, 2.0 * b]);
        } else {
            for g in 2..=44 {
                cuts.push(2.0 * b - b * 0.5f64.powi(g));
            }
            cuts.push(2.0 * b);
        }
        let mut panels = Vec::with_capacity(cuts.len());
        for w in cuts.windows(2) {
            let mut err = None;
            let panel = ChebPanel::fit(
                |y| {
                    let u = (y / b).log2().clamp(0.0, 1.0 - f64::EPSILON);
                    match density_series(a, ga, u, p.s_max) {
                        Ok(s) => ga * ga / (y * y) * s,
                        Err(e) => {
                            err = Some(e);
                            f64::NAN
                        }
                    }
                },
                w[0],
                w[1],
                CHEB_DEGREE,
            );
            if let Some(e) = err {
                return Err(e);
            }
            panels.push(panel);
        }
        let moments = (0..MOMENTS)
            .map(|k| panels.iter().map(|pl| pl.integrate_with(|y| y.powi(k as i32), f64::INFINITY)).sum())
            .collect();
        // |ω G(ω)| ≤ |d(b)| + |d(2b)| + total variation, by one integration by parts
        let samples: Vec<f64> = panels
            .iter()
            .flat_map(|pl| (0..=64).map(move |i| pl.eval(pl.lo + (pl.hi - pl.lo) * i as f64 / 64.0)))
            .collect();
        let tv: f64 = samples.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        let variation = 2.0 * (samples[0].abs() + samples[samples.len() - 1].abs() + tv);
        let drift = f_constant(p)?;
        Ok(Self { params: *p, b, panels, moments, variation, drift })
    }

    pub fn params(&self) -> &LimitParams {
        &self.params
    }

    /// Left end of the base period.
    pub fn period_start(&self) -> f64 {
        self.b
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// ∫_1^2 x dν, which equals the first moment of any one period.
    pub fn period_first_moment(&self) -> f64 {
        self.moments[1]
    }

    /// ν mass of one period.
    pub fn period_mass(&self) -> f64 {
        self.moments[0]
    }

    /// Density via the stored interpolant.
    pub fn density(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        let j = (x / self.b).log2().floor();
        let y = (x * (-j).exp2()).clamp(self.b, 2.0 * self.b);
        (-2.0 * j).exp2() * self.period_density(y)
    }

    fn period_density(&self, y: f64) -> f64 {
        let i = self.panels.partition_point(|pl| pl.hi < y).min(self.panels.len() - 1);
        self.panels[i].eval(y)
    }

    fn period_fourier(&self, omega: f64) -> Complex64 {
        self.panels.iter().map(|pl| pl.fourier(omega)).sum()
    }

    fn partial_first_moment(&self, upto: f64) -> f64 {
        self.panels.iter().map(|pl| pl.integrate_with(|y| y, upto)).sum()
    }

    /// ∫ (e^{itx} − 1 − itx 1[x<1]) dν(x), summed period by period.
    pub fn levy_exponent(&self, t: f64) -> Complex64 {
        if t == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let b = self.b;
        let at = t.abs();
        let i = Complex64::i();
        // periods 2^j [b, 2b) with j < j_lo lie below 1 and have |ω y| ≤ 1/8
        let j_lo = (-(2.0 * b).log2()).min((0.125 / (at * 2.0 * b)).log2()).floor() as i32;
        let mut total = Complex64::new(0.0, 0.0);
        // Σ_{j<j_lo} 2^{-j} Σ_{p≥2} (i t 2^j)^p M_p / p!, summed over j first
        let z = at * (j_lo as f64 - 1.0).exp2();
        let mut zpow = 1.0;
        let mut fact = 1.0;
        let mut ip = i;
        for p in 2..MOMENTS {
            zpow *= z;
            fact *= p as f64;
            ip *= i;
            let term = ip * (at * zpow * self.moments[p] / fact / (1.0 - (1.0 - p as f64).exp2()));
            total += term;
            if term.norm() < 1e-20 * (1.0 + total.norm()) {
                break;
            }
        }
        let mut j = j_lo;
        loop {
            let scale = (j as f64).exp2();
            let omega = at * scale;
            let lo = scale * b;
            let hi = 2.0 * lo;
            if lo >= 1.0 && self.variation / omega / scale < 1e-18 {
                // remaining periods: G terms negligible, the −M0 parts are geometric
                total -= self.moments[0] * 2.0 / scale;
                break;
            }
            let g = self.period_fourier(omega);
            let mut term = g - self.moments[0];
            if hi <= 1.0 {
                term -= i * omega * self.moments[1];
            } else if lo < 1.0 {
                term -= i * omega * self.partial_first_moment(1.0 / scale);
            }
            total += term / scale;
            j += 1;
            if j > 4000 {
                break;
            }
        }
        if t < 0.0 {
            total.conj()
        } else {
            total
        }
    }

    /// E exp(itW).
    pub fn char_fn(&self, t: f64) -> Complex64 {
        (Complex64::new(0.0, self.drift * t) + self.levy_exponent(t)).exp()
    }
}

/// Characteristic function of W_{r,k,γ} at `t`.
pub fn char_fn(t: f64, p: &LimitParams) -> Result<Complex64> {
    if !t.is_finite() {
        return Err(KcutError::domain("t must be finite"));
    }
    Ok(LimitLaw::new(p)?.char_fn(t))
}

/// CDF of `1 − C3(r) W` by Gil-Pelaez inversion, with the characteristic
/// function tabulated once on the quadrature nodes.
#[derive(Debug, Clone)]
pub struct LimitCdf {
    law: LimitLaw,
    c3: f64,
    nodes: Vec<(f64, f64, Complex64)>,
    t_max: f64,
    error_bound: f64,
}

const T_MIN: f64 = 1e-13;
const PANEL: f64 = 0.25;

fn inversion_nodes(t_from: f64, t_to: f64) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::cached(16);
    let mut edges = Vec::new();
    if t_from <= T_MIN {
        let mut t = T_MIN;
        while t < PANEL {
            edges.push(t);
            t *= 2.0;
        }
        edges.push(PANEL);
    }
    let mut t = t_from.max(PANEL);
    while t < t_to - 1e-12 {
        if edges.last() != Some(&t) {
            edges.push(t);
        }
        t += PANEL;
    }
    edges.push(t_to);
    let mut out = Vec::new();
    for w in edges.windows(2) {
        let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for (s, wt) in gl.nodes.iter().zip(&gl.weights) {
            out.push((c + h * s, wt * h));
        }
    }
    out
}

impl LimitCdf {
    pub fn new(p: &LimitParams, table: &ConstantTable) -> Result<Self> {
        if table.k != p.k || table.r != p.r {
            return Err(KcutError::domain("constant table does not match (r, k)"));
        }
        let law = LimitLaw::new(p)?;
        let c3 = table.c3;
        let phi_y = |t: f64| Complex64::from_polar(1.0, t) * law.char_fn(c3 * t).conj();
        let tabulate = |from: f64, to: f64| -> Vec<(f64, f64, Complex64)> {
            inversion_nodes(from, to).into_par_iter().map(|(t, w)| (t, w, phi_y(t))).collect()
        };
        let check: Vec<f64> = (-40..=40).map(|i| 0.5 * i as f64).collect();
        let eval = |nodes: &[(f64, f64, Complex64)], y: f64| gil_pelaez(nodes, y);

        if let Some(t_max) = p.t_max {
            let nodes = tabulate(0.0, t_max);
            let err = phi_y(t_max).norm() / t_max.max(1.0);
            if err > 1e-4 {
                return Err(KcutError::numeric(format!("t_max = {t_max} leaves |φ| = {err:e}"), err));
            }
            return Ok(Self { law, c3, nodes, t_max, error_bound: err });
        }
        let mut t_max = 8.0;
        while phi_y(t_max).norm() > 1e-13 {
            t_max *= 2.0;
            if t_max > 4096.0 {
                return Err(KcutError::numeric("characteristic function decays too slowly to invert", phi_y(t_max).norm()));
            }
        }
        let mut nodes = tabulate(0.0, t_max);
        loop {
            let more = tabulate(t_max, 2.0 * t_max);
            let mut wider = nodes.clone();
            wider.extend(more);
            let diff = check.iter().map(|&y| (eval(&nodes, y) - eval(&wider, y)).abs()).fold(0.0, f64::max);
            nodes = wider;
            t_max *= 2.0;
            if diff <= 1e-5 {
                let error_bound = diff + phi_y(t_max).norm();
                if error_bound > 1e-4 {
                    return Err(KcutError::numeric("CDF inversion error above 1e-4", error_bound));
                }
                return Ok(Self { law, c3, nodes, t_max, error_bound });
            }
            if t_max > 4096.0 {
                return Err(KcutError::numeric("CDF inversion did not settle", diff));
            }
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        gil_pelaez(&self.nodes, y).clamp(0.0, 1.0)
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    pub fn law(&self) -> &LimitLaw {
        &self.law
    }

    pub fn c3(&self) -> f64 {
        self.c3
    }
}

fn gil_pelaez(nodes: &[(f64, f64, Complex64)], y: f64) -> f64 {
    let s: f64 = nodes
        .iter()
        .map(|&(t, w, phi)| w * (Complex64::from_polar(1.0, -t * y) * phi).im / t)
        .sum();
    0.5 - s / std::f64::consts::PI
}

/// P(1 − C3 W ≤ w).
pub fn limit_cdf(w: f64, p: &LimitParams, table: &ConstantTable) -> Result<f64> {
    Ok(LimitCdf::new(p, table)?.cdf(w))
}

/// Size-dependent quantities of the triangular array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub n: u64,
    pub m: u32,
    pub ell: i64,
    pub big_l: i64,
    pub alpha: f64,
    pub beta: f64,
}

impl ScaleParams {
    pub fn new(n: u64, k: usize) -> Result<Self> {
        if n < 16 {
            return Err(KcutError::domain(format!("the triangular array needs n ≥ 16, got {n}")));
        }
        if k == 0 {
            return Err(KcutError::domain("k must be at least 1"));
        }
        let lg = (n as f64).log2();
        let lglg = lg.log2();
        let m = 63 - n.leading_zeros();
        let big_l = ((2.0 - 0.5 / k as f64) * lglg).floor() as i64;
        Ok(Self {
            n,
            m,
            ell: lglg.floor() as i64,
            big_l: big_l.min(m as i64),
            alpha: frac(lg),
            beta: frac(lglg),
        })
    }

    /// frac(lg n − lg lg n), the γ this size belongs to.
    pub fn gamma(&self) -> f64 {
        frac(self.alpha - self.beta)
    }
}

/// Sampler for `2^{1−α} + α − β − ℓ + L + 1 − C3 Σ_{h(v) ≤ L} ξ_{r,v}`.
#[derive(Debug, Clone)]
pub struct XiSampler {
    k: usize,
    a: f64,
    m: f64,
    kfact: f64,
    shift: f64,
    c3: f64,
    /// (m n_v / n, multiplicity) for the nodes of height ≤ L.
    groups: Vec<(f64, u64)>,
}

impl XiSampler {
    pub fn new(scale: &ScaleParams, p: &LimitParams, table: &ConstantTable) -> Result<Self> {
        p.validate()?;
        if table.k != p.k || table.r != p.r {
            return Err(KcutError::domain("constant table does not match (r, k)"));
        }
        let tree = CompleteTree::new(scale.n)?;
        let n = scale.n as f64;
        let m = scale.m as f64;
        let mut groups: Vec<(f64, u64)> = Vec::new();
        for h in 0..=scale.big_l.max(0) as u32 {
            let first = 1u64 << h;
            let last = (2 * first - 1).min(scale.n);
            // subtree sizes along one level are nonincreasing left to right
            let mut v = first;
            while v <= last {
                let size = tree.subtree_size(v);
                let (mut lo, mut hi) = (v, last);
                while lo < hi {
                    let mid = lo + (hi - lo).div_ceil(2);
                    if tree.subtree_size(mid) == size {
                        lo = mid;
                    } else {
                        hi = mid - 1;
                    }
                }
                groups.push((m * size as f64 / n, lo - v + 1));
                v = lo + 1;
            }
        }
        let shift = (1.0 - scale.alpha).exp2() + scale.alpha - scale.beta - scale.ell as f64 + scale.big_l as f64 + 1.0;
        Ok(Self {
            k: p.k,
            a: p.a(),
            m,
            kfact: gamma_unchecked(p.k as f64 + 1.0),
            shift,
            c3: table.c3,
            groups,
        })
    }

    /// One draw with an explicit generator.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut sum = 0.0;
        for &(weight, count) in &self.groups {
            for _ in 0..count {
                let mut t = 0.0;
                for _ in 0..self.k {
                    t += rng.sample::<f64, _>(Exp1);
                }
                let z = self.m * t.powi(self.k as i32) / self.kfact;
                if z < 60.0 {
                    sum += weight * upper_gamma(self.a, z).unwrap_or(0.0);
                }
            }
        }
        self.shift - self.c3 * sum
    }

    /// Draw number `index` of `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> f64 {
        self.sample_with(&mut substream(seed, domain::XI, index))
    }

    /// Draws `0..count` of `seed`, in parallel.
    pub fn batch(&self, seed: u64, count: u64) -> Vec<f64> {
        (0..count).into_par_iter().map(|i| self.sample(seed, i)).collect()
    }

    pub fn nodes(&self) -> u64 {
        self.groups.iter().map(|g| g.1).sum()
    }
}

/// Draw 0 of the triangular-array sampler for `seed`.
pub fn xi_sampler(scale: &ScaleParams, p: &LimitParams, table: &ConstantTable, seed: u64) -> Result<f64> {
    Ok(XiSampler::new(scale, p, table)?.sample(seed, 0))
}

/// ∫_lo^hi x^2 dν, for integrability checks near 0.
pub fn second_moment(lo: f64, hi: f64, p: &LimitParams) -> Result<f64> {
    let tol = p.quad_tol;
    let mut total = 0.0;
    let mut err = 0.0;
    // split on the period boundaries where the density's derivative jumps
    let ga = gamma_unchecked(p.a());
    let b = ga * (-frac(p.gamma)).exp2();
    let mut edges = vec![lo];
    let mut e = b * ((lo / b).log2().ceil()).exp2();
    while e < hi {
        if e > lo {
            edges.push(e);
        }
        e *= 2.0;
    }
    edges.push(hi);
    for w in edges.windows(2) {
        let part = integrate(|x| x * x * levy_density(x, p).unwrap_or(f64::NAN), w[0], w[1], tol, tol, 2000)?;
        total += part.value;
        err += part.error;
    }
    if !total.is_finite() {
        return Err(KcutError::numeric("second moment integrand failed", err));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_density_closed_form() {
        for &g in &[0.0, 0.3, 0.99] {
            let p = LimitParams::new(1, 1, g).unwrap();
            for &x in &[0.01f64, 0.3, 1.0, 1.7, 55.0] {
                let expected = frac(x.log2() + g).exp2() / (x * x);
                let got = levy_density(x, &p).unwrap();
                assert!((got - expected).abs() <= 1e-12 * expected, "x={x} g={g}");
            }
        }
        assert!((levy_density(1.0, &LimitParams::new(1, 1, 0.0).unwrap()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = LimitParams::new(1, 2, 0.5).unwrap();
        assert!(levy_density(0.0, &p).is_err());
        assert!(levy_tail(-1.0, &p).is_err());
        assert!(LimitParams::new(3, 2, 0.5).is_err());
        assert!(LimitParams::new(1, 2, 1.5).is_err());
        assert!(ScaleParams::new(15, 1).is_err());
    }

    #[test]
    fn drift_reduces_for_r_equal_k() {
        for k in 1..=3 {
            for &g in &[0.0, 0.25, 0.5, 0.75] {
                let f = f_constant(&LimitParams::new(k, k, g).unwrap()).unwrap();
                assert!((f - (g.exp2() - g - 1.0)).abs() < 1e-12, "k={k} g={g} f={f}");
            }
        }
    }

    #[test]
    fn k1_period_moment_is_one() {
        let law = LimitLaw::new(&LimitParams::new(1, 1, 0.3).unwrap()).unwrap();
        assert!((law.period_first_moment() - 1.0).abs() < 1e-13);
        let ln2 = std::f64::consts::LN_2;
        assert!((law.period_mass() - ln2 / law.period_start()).abs() < 1e-13);
    }

    #[test]
    fn char_fn_basics() {
        let law = LimitLaw::new(&LimitParams::new(1, 2, 0.3).unwrap()).unwrap();
        assert_eq!(law.char_fn(0.0), Complex64::new(1.0, 0.0));
        for &t in &[1e-9, 0.01, 0.7, 3.0, 17.0] {
            let a = law.char_fn(t);
            let b = law.char_fn(-t);
            assert!((a - b.conj()).norm() < 1e-14);
            assert!(a.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn scale_params_at_2_40() {
        let s = ScaleParams::new(1 << 40, 2).unwrap();
        assert_eq!(s.m, 40);
        assert_eq!(s.ell, 5);
        assert_eq!(s.big_l, 9);
        assert_eq!(s.alpha, 0.0);
        assert!((s.gamma() - frac(40.0 - 40f64.log2())).abs() < 1e-15);
    }

    #[test]
    fn xi_groups_cover_levels() {
        let p = LimitParams::new(1, 1, 0.0).unwrap();
        let t = crate::series::constants(1, 1).unwrap();
        let s = ScaleParams::new(1000, 1).unwrap();
        let x = XiSampler::new(&s, &p, &t).unwrap();
        assert_eq!(x.nodes(), (1u64 << (s.big_l + 1)) - 1);
        assert_eq!(x.sample(3, 7), x.sample(3, 7));
    }
}
