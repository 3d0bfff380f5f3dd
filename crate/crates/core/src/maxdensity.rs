//! The `r = ∞` branch: location of the maximum of the sixth-order Edgeworth
//! density, the expansion `‖p_n‖_∞ = φ(0)(1 + A/n + B/n²) + o(n^{-2})`, and
//! `N_∞(Z_n) = 2π(1 - Ã/n + B̃/n²) + o(n^{-2})`.
//!
//! All coefficients are formed in exact rational arithmetic.

use crate::cumulants::CumulantVector;
use crate::edgeworth::{q_polynomial, INV_SQRT_2PI};
use crate::error::{Error, Result};
use crate::exactpoly::{rational_to_f64, Coefficient, Poly, Rational};
use crate::expansion::Verdict;

fn q(n: i64, d: i64) -> Rational {
    Rational::ratio(n, d)
}

fn exact_gammas<T: Coefficient>(c: &CumulantVector<T>, order: usize) -> Result<Vec<Rational>> {
    c.require_order(order)?;
    Ok((0..=order).map(|k| if k < 3 { Rational::ratio(0, 1) } else { c.gamma(k).to_rational() }).collect())
}

/// Coefficients of `x_6(n) = a_1 n^{-1/2} + a_2 n^{-3/2} + O(n^{-5/2})`:
/// `a_1 = -γ_3/2`, `a_2 = γ_3³/4 - 5γ_3γ_4/12 + γ_5/8`.
pub fn extremum_series<T: Coefficient>(c: &CumulantVector<T>) -> Result<(Rational, Rational)> {
    let g = exact_gammas(c, 5)?;
    Ok(extremum_from(&g))
}

fn extremum_from(g: &[Rational]) -> (Rational, Rational) {
    let a1 = -&g[3] * q(1, 2);
    let a2 = g[3].powi(3) * q(1, 4) - &g[3] * &g[4] * q(5, 12) + &g[5] * q(1, 8);
    (a1, a2)
}

/// Sup-norm and `N_∞` expansion coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SupNormExpansion<T> {
    pub a1: T,
    pub a2: T,
    pub b1: T,
    pub b2: T,
    pub b3: T,
    pub b4: T,
    /// `‖p_n‖_∞ / φ(0) = 1 + A/n + B/n² + o(n^{-2})`.
    pub a: T,
    pub b: T,
    /// `N_∞(Z_n) / 2π = 1 - Ã/n + B̃/n² + o(n^{-2})`.
    pub a_tilde: T,
    pub b_tilde: T,
}

impl SupNormExpansion<Rational> {
    pub fn to_f64(&self) -> SupNormExpansion<f64> {
        let f = rational_to_f64;
        SupNormExpansion {
            a1: f(&self.a1),
            a2: f(&self.a2),
            b1: f(&self.b1),
            b2: f(&self.b2),
            b3: f(&self.b3),
            b4: f(&self.b4),
            a: f(&self.a),
            b: f(&self.b),
            a_tilde: f(&self.a_tilde),
            b_tilde: f(&self.b_tilde),
        }
    }
}

impl SupNormExpansion<f64> {
    /// `φ(0)(1 + A/n + B/n²)`.
    pub fn predicted_sup_norm(&self, n: f64) -> f64 {
        INV_SQRT_2PI * (1.0 + self.a / n + self.b / (n * n))
    }

    /// `2π(1 - Ã/n + B̃/n²)`.
    pub fn predicted_entropy_power(&self, n: f64) -> f64 {
        2.0 * std::f64::consts::PI * (1.0 - self.a_tilde / n + self.b_tilde / (n * n))
    }
}

pub fn supnorm_coefficients<T: Coefficient>(c: &CumulantVector<T>) -> Result<SupNormExpansion<Rational>> {
    let g = exact_gammas(c, 6)?;
    let (g3, g4, g5, g6) = (&g[3], &g[4], &g[5], &g[6]);
    let (a1, a2) = extremum_from(&g);
    let a1sq = &a1 * &a1;

    let b1 = g3 * q(1, 6) * (a1.powi(3) - &a2 * q(3, 1));
    let b2 = (g3 * g3 * q(45, 72) - g4 * q(6, 24)) * &a1sq;
    let b3 = (g3.powi(3) * q(945, 1296) - g3 * g4 * q(105, 144) + g5 * q(15, 120)) * &a1;
    let b4 = g3.powi(4) * q(10395, 24 * 1296) - g3 * g3 * g4 * q(945, 2 * 36 * 24)
        + g3 * g5 * q(105, 720)
        + g4 * g4 * q(105, 1152)
        - g6 * q(15, 720);

    let a = (g4 - g3 * g3 * q(2, 3)) * q(1, 8);
    let first_order = g3 * g3 * q(1, 4) + g4 * q(1, 8) - g3 * g3 * q(15, 72);
    let b = &b1 + &b2 + &b3 + &b4 + a1sq.powi(2) * q(1, 8) - &a1 * &a2 - first_order * &a1sq * q(1, 2);

    let a_tilde = &a * q(2, 1);
    let b_tilde = &a * &a * q(3, 1) - &b * q(2, 1);
    Ok(SupNormExpansion { a1, a2, b1, b2, b3, b4, a, b, a_tilde, b_tilde })
}

/// `(Ã, B̃)` with `Ã = (γ_4 - (2/3)γ_3²)/4` and `B̃ = 3A² - 2B`.
pub fn ninf_expansion<T: Coefficient>(c: &CumulantVector<T>) -> Result<(Rational, Rational)> {
    let e = supnorm_coefficients(c)?;
    Ok((e.a_tilde, e.b_tilde))
}

/// `N_∞(Z_n)` is eventually increasing iff `γ_4 > (2/3)γ_3²`.
pub fn monotonicity_prediction_inf<T: Coefficient>(c: &CumulantVector<T>) -> Result<Verdict> {
    let g = exact_gammas(c, 4)?;
    let d = &g[4] * q(3, 1) - &g[3] * &g[3] * q(2, 1);
    let zero = Rational::ratio(0, 1);
    Ok(if d > zero {
        Verdict::EventuallyIncreasing
    } else if d < zero {
        Verdict::EventuallyDecreasing
    } else {
        Verdict::Indeterminate
    })
}

/// Root of `φ_6'` nearest the origin for a given `n`, by bisection-guarded
/// Newton on `[-1, 1]` started at `a_1/√n`.
pub fn solve_extremum<T: Coefficient>(c: &CumulantVector<T>, n: usize) -> Result<f64> {
    let exact = c.to_rational();
    exact.require_order(6)?;
    if n == 0 {
        return Err(Error::ExtremumNotLocalized("n must be positive".into()));
    }
    let u = 1.0 / (n as f64).sqrt();
    let x = Poly::<Rational>::x();
    let mut q_float = Vec::with_capacity(4);
    // φ_6'/φ = -x + Σ u^k (Q_k' - x Q_k)
    let mut g = Poly::<f64>::from_coeffs(vec![0.0, -1.0]);
    for k in 1..=4 {
        let qk = q_polynomial(k, &exact)?;
        let pk = &qk.derivative() - &(&x * &qk);
        g = &g + &pk.to_f64_poly().scale(&u.powi(k as i32));
        q_float.push(qk.to_f64_poly());
    }
    let dg = g.derivative();

    let (mut lo, mut hi) = (-1.0, 1.0);
    let (g_lo, g_hi) = (g.eval(lo), g.eval(hi));
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::ExtremumNotLocalized(format!("no sign change of the derivative on [-1, 1] for n = {n}")));
    }
    let lo_negative = g_lo < 0.0;
    let (a1, _) = extremum_series(&exact)?;
    let mut xk = (rational_to_f64(&a1) * u).clamp(-0.999, 0.999);
    for _ in 0..200 {
        let gx = g.eval(xk);
        if gx == 0.0 {
            break;
        }
        if (gx < 0.0) == lo_negative {
            lo = xk;
        } else {
            hi = xk;
        }
        let slope = dg.eval(xk);
        let mut next = xk - gx / slope;
        if !(next > lo && next < hi) || !slope.is_finite() || slope == 0.0 {
            next = 0.5 * (lo + hi);
        }
        let step = (next - xk).abs();
        xk = next;
        if step < 1e-13 || hi - lo < 1e-13 {
            break;
        }
    }

    let value = 1.0 + q_float.iter().enumerate().map(|(k, p)| p.eval(xk) * u.powi(k as i32 + 1)).sum::<f64>();
    if !(value > 0.0) {
        return Err(Error::ExtremumNotLocalized(format!("φ_6 is not positive at its critical point for n = {n}")));
    }
    Ok(xk)
}

/// `sup_{|x| ≤ √log n} φ_6(x)` on a uniform grid.
pub fn edgeworth_sup_on_grid<T: Coefficient>(c: &CumulantVector<T>, n: usize, step: f64) -> Result<f64> {
    let model = crate::edgeworth::EdgeworthModel::new(6, &c.to_rational())?;
    let half = (n as f64).ln().sqrt().max(1.0);
    let steps = (2.0 * half / step).ceil() as usize;
    Ok((0..=steps)
        .map(|k| model.density(n as f64, -half + k as f64 * step))
        .fold(f64::NEG_INFINITY, f64::max))
}
