//! Chebyshev interpolants on panels and their oscillatory integrals.

use num_complex::Complex64;

use crate::quad::GaussLegendre;

/// Polynomial interpolant `Σ a_n T_n(s)` of a function on `[lo, hi]`,
/// with `s` the affine image of `[lo, hi]` on `[-1, 1]`.
#[derive(Debug, Clone)]
pub(crate) struct ChebPanel {
    pub lo: f64,
    pub hi: f64,
    coef: Vec<f64>,
    /// `s`-derivatives of all orders at s = -1 and s = +1.
    left_derivs: Vec<f64>,
    right_derivs: Vec<f64>,
}

impl ChebPanel {
    pub fn fit<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, degree: usize) -> Self {
        let npts = degree + 1;
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let theta: Vec<f64> = (0..npts)
            .map(|l| std::f64::consts::PI * (l as f64 + 0.5) / npts as f64)
            .collect();
        let vals: Vec<f64> = theta.iter().map(|t| f(c + h * t.cos())).collect();
        let mut coef = vec![0.0; npts];
        for (n, a) in coef.iter_mut().enumerate() {
            let s: f64 = vals.iter().zip(&theta).map(|(v, t)| v * (n as f64 * t).cos()).sum();
            *a = 2.0 * s / npts as f64;
        }
        coef[0] *= 0.5;

        let mut left_derivs = Vec::with_capacity(npts);
        let mut right_derivs = Vec::with_capacity(npts);
        let mut d = coef.clone();
        for _ in 0..npts {
            right_derivs.push(d.iter().sum());
            left_derivs.push(d.iter().enumerate().map(|(n, a)| if n % 2 == 0 { *a } else { -a }).sum());
            d = derivative(&d);
        }
        Self { lo, hi, coef, left_derivs, right_derivs }
    }

    fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn eval(&self, y: f64) -> f64 {
        let s = (2.0 * y - self.lo - self.hi) / (self.hi - self.lo);
        clenshaw(&self.coef, s)
    }

    /// ∫_lo^hi g(y) p(y) dy by Gauss-Legendre on the interpolant.
    pub fn integrate_with<G: Fn(f64) -> f64>(&self, g: G, upto: f64) -> f64 {
        let hi = upto.min(self.hi);
        if hi <= self.lo {
            return 0.0;
        }
        GaussLegendre::cached(48).integrate(|y| g(y) * self.eval(y), self.lo, hi)
    }

    /// ∫_lo^hi e^{iωy} p(y) dy.
    ///
    /// Once the panel holds many oscillations the integration-by-parts
    /// series Σ_q (-1)^q [p^{(q)} e^{iωy}] / (iω)^{q+1} is used. It terminates
    /// at the polynomial degree, so it is exact for the interpolant.
    pub fn fourier(&self, omega: f64) -> Complex64 {
        let hh = self.half_width();
        let degree = self.coef.len() - 1;
        let kappa = omega * hh;
        if kappa.abs() <= 2.0 * degree as f64 {
            let c = 0.5 * (self.lo + self.hi);
            let gl = GaussLegendre::cached(64);
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, w) in gl.nodes.iter().zip(&gl.weights) {
                let phase = Complex64::from_polar(1.0, omega * (c + hh * s));
                acc += phase * (w * clenshaw(&self.coef, *s));
            }
            return acc * hh;
        }
        let e_hi = Complex64::from_polar(1.0, omega * self.hi);
        let e_lo = Complex64::from_polar(1.0, omega * self.lo);
        // term q carries (1/hh)^q from the chain rule and (iω)^{-(q+1)}
        let inv_ik = Complex64::new(0.0, -1.0 / kappa);
        let mut factor = Complex64::new(0.0, -1.0 / omega);
        let mut acc = Complex64::new(0.0, 0.0);
        for q in 0..=degree {
            let jump = e_hi * self.right_derivs[q] - e_lo * self.left_derivs[q];
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            acc += factor * jump * sign;
            factor *= inv_ik;
        }
        acc
    }

}

fn clenshaw(coef: &[f64], s: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for a in coef.iter().skip(1).rev() {
        let b0 = a + 2.0 * s * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coef[0] + s * b1 - b2
}

/// Coefficients of the derivative of Σ a_n T_n.
fn derivative(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    for k in (0..n - 1).rev() {
        let next2 = if k + 2 < n { d[k + 2] } else { 0.0 };
        d[k] = next2 + 2.0 * (k + 1) as f64 * a[k + 1];
    }
    d[0] *= 0.5;
    d
}
