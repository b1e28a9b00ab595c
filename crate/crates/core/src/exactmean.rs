//! Record probabilities and expected record counts by quadrature.
//!
//! A node with `d` relevant ancestors is an r-record with probability
//! `∫₀^y x^{r-1} e^{-x} / Γ(r) · Q(k, x)^d dx`, where `y` is the root's
//! removal time (`∞` for the unconditional law). Summing over the complete
//! tree's level populations gives the expected count.

use serde::{Deserialize, Serialize};

use crate::cutsim::{CompleteTree, Variant};
use crate::error::{KcutError, Result};
use crate::quad::integrate;
use crate::series::ConstantTable;
use crate::specfun::{ln_gamma_unchecked, ln_q_unchecked, q_inv};

/// Integrand cutoff: beyond `X_max` the integrand is below this.
const TAIL: f64 = 1e-17;
const ABS_TOL: f64 = 1e-13;
const MAX_SEGMENTS: usize = 4000;

/// Parameters of an expected-count query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanQuery {
    pub n: u64,
    pub k: usize,
    pub r: usize,
    /// Root removal time; `None` means unconditional.
    pub y: Option<f64>,
    pub variant: Variant,
}

impl MeanQuery {
    pub fn unconditional(n: u64, k: usize, r: usize) -> Self {
        Self { n, k, r, y: None, variant: Variant::Node }
    }

    fn validate(&self) -> Result<()> {
        check_rk(self.r, self.k)?;
        CompleteTree::new(self.n)?;
        if let Some(y) = self.y {
            if !(y > 0.0) {
                return Err(KcutError::domain(format!("y must be positive, got {y}")));
            }
        }
        Ok(())
    }
}

fn check_rk(r: usize, k: usize) -> Result<()> {
    if k == 0 || r == 0 || r > k {
        return Err(KcutError::domain(format!("need 1 ≤ r ≤ k, got r = {r}, k = {k}")));
    }
    Ok(())
}

/// Point past which both the Gamma(r) density and Q(k,x)^d are negligible.
fn x_max(r: usize, k: usize, d: u64) -> Result<f64> {
    let density_end = q_inv(r as f64, TAIL)?;
    if d == 0 {
        return Ok(density_end);
    }
    let per_factor = (TAIL.ln() / d as f64).exp();
    Ok(density_end.min(q_inv(k as f64, per_factor)?))
}

/// P(T_{r,v} < min of `ancestors` independent Gamma(k,1) times, and < y).
pub fn record_prob(r: usize, k: usize, ancestors: u64, y: Option<f64>) -> Result<f64> {
    check_rk(r, k)?;
    if let Some(y) = y {
        if !(y > 0.0) {
            return Err(KcutError::domain(format!("y must be positive, got {y}")));
        }
    }
    let upper = x_max(r, k, ancestors)?.min(y.unwrap_or(f64::INFINITY));
    let (rf, kf, d) = (r as f64, k as f64, ancestors as f64);
    let log_norm = ln_gamma_unchecked(rf);
    let integrand = |x: f64| {
        if x <= 0.0 {
            return if r == 1 { 1.0 } else { 0.0 };
        }
        let mut log = (rf - 1.0) * x.ln() - x - log_norm;
        if ancestors > 0 {
            log += d * ln_q_unchecked(kf, x);
        }
        log.exp()
    };
    // the mass sits near the scale where d·ln Q(k,x) ~ 1, so split there too
    let mut breaks = vec![0.0];
    if ancestors > 0 {
        let knee = q_inv(kf, (-1.0 / d).exp())?;
        breaks.extend((-20..4).map(|j| knee * 4f64.powi(j)).filter(|&b| b < upper));
    }
    breaks.push(upper);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut total = 0.0;
    let mut err = 0.0;
    for w in breaks.windows(2) {
        let part = integrate(integrand, w[0], w[1], ABS_TOL, 1e-13, MAX_SEGMENTS)?;
        total += part.value;
        err += part.error;
    }
    if err > 1e-11 {
        return Err(KcutError::numeric("record probability quadrature missed its tolerance", err));
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Expected number of r-records for the query.
///
/// * node, unconditional: the root always counts; a node at height `h` has
///   `h` ancestors.
/// * node, conditional on the root's removal time `y`: the root is excluded
///   and a node at height `h` has `h − 1` non-root ancestors.
/// * edge: like the conditional form with `y = ∞`.
pub fn expected_records(query: &MeanQuery) -> Result<f64> {
    query.validate()?;
    let tree = CompleteTree::new(query.n)?;
    let m = tree.max_height();
    let (include_root, y) = match (query.variant, query.y) {
        (Variant::Node, None) => (true, None),
        (Variant::Node, Some(y)) => (false, Some(y)),
        (Variant::Edge, y) => (false, y),
    };
    let mut sum = if include_root { 1.0 } else { 0.0 };
    for h in 1..=m {
        let pop = tree.level_population(h) as f64;
        let ancestors = if include_root { h as u64 } else { h as u64 - 1 };
        sum += pop * record_prob(query.r, query.k, ancestors, y)?;
    }
    Ok(sum)
}

/// The leading terms of the large-n expansion of E X_{n,r}:
/// `C2 n lg^{-r/k-1}(μ_{r,n} − lg lg n) + C2 2^{m+1} lg^{-r/k-1}`.
pub fn asymptotic_mean(n: u64, table: &ConstantTable) -> Result<f64> {
    asymptotic_mean_f64(n as f64, table)
}

/// [`asymptotic_mean`] for sizes beyond `u64`.
pub fn asymptotic_mean_f64(n: f64, table: &ConstantTable) -> Result<f64> {
    if !(n >= 4.0) {
        return Err(KcutError::domain(format!("asymptotic mean needs n ≥ 4, got {n}")));
    }
    let lg = n.log2();
    let m = lg.floor();
    let scale = table.c2 * lg.powf(-(table.r as f64) / table.k as f64 - 1.0);
    Ok(scale * n * (table.mu(n)? - lg.log2()) + scale * (m + 1.0).exp2())
}

/// Exact expectation for huge trees, with `n` given through `lg n`'s
/// integer part `m` and the last-level population `last`.
pub fn expected_records_levels(m: u32, last: f64, k: usize, r: usize) -> Result<f64> {
    check_rk(r, k)?;
    let mut sum = 1.0;
    for h in 1..=m {
        let pop = if h < m { (h as f64).exp2() } else { last };
        sum += pop * record_prob(r, k, h as u64, None)?;
    }
    Ok(sum)
}
