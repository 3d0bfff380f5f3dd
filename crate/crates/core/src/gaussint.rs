//! Closed-form integrals `∫ P(x) φ(x)^r dx` for polynomials `P` and real `r > 0`.
//!
//! `φ^r = c(r) · N(0, 1/r)` with `c(r) = (2π)^{-(r-1)/2} r^{-1/2}`, so every
//! monomial integral is `c(r) (2j-1)!! s^j` with `s = 1/r`. A polynomial
//! therefore integrates to `c(r) D(s)` where `D` has exact rational
//! coefficients; `D` is evaluated either in powers of `s` or of
//! `u = 1 - s = (r-1)/r`, whichever has the smaller absolute term sum.
//! Near `r = 1` this avoids the cancellation that a monomial sum suffers
//! (e.g. `∫ H_12 φ^r ∝ (r-1)^6`).

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exactpoly::{double_factorial_odd, rational_to_f64, Coefficient, Poly, Rational};

/// Finite Renyi index used as a Gaussian power weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussPowerWeight {
    r: f64,
}

impl GaussPowerWeight {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidIndex(r));
        }
        Ok(GaussPowerWeight { r })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `∫ φ^r = (2π)^{-(r-1)/2} r^{-1/2}`, evaluated in log space.
    pub fn mass(&self) -> f64 {
        gauss_power_mass_unchecked(self.r)
    }
}

fn gauss_power_mass_unchecked(r: f64) -> f64 {
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    (-(r - 1.0) / 2.0 * ln_2pi - 0.5 * r.ln()).exp()
}

/// `∫ φ(x)^r dx`.
pub fn gauss_power_mass(r: f64) -> Result<f64> {
    Ok(GaussPowerWeight::new(r)?.mass())
}

/// `∫ x^k φ(x)^r dx`: zero for odd `k`, `c(r) (2j-1)!! / r^j` for `k = 2j`.
pub fn gauss_power_moment(k: usize, r: f64) -> Result<f64> {
    let w = GaussPowerWeight::new(r)?;
    if k % 2 == 1 {
        return Ok(0.0);
    }
    let j = (k / 2) as u32;
    let df = rational_to_f64(&Rational::from_integer(double_factorial_odd(j)));
    Ok(w.mass() * df * (-(j as f64) * r.ln()).exp())
}

/// `∫ p(x) φ(x)^r dx`.
pub fn gauss_power_integral<T: Coefficient>(p: &Poly<T>, r: f64) -> Result<f64> {
    let w = GaussPowerWeight::new(r)?;
    Ok(w.mass() * reduced_moment_sum(&p.to_rational_poly(), r))
}

/// `D(1/r)` where `∫ p φ^r = c(r) D(1/r)`.
fn reduced_moment_sum(p: &Poly<Rational>, r: f64) -> f64 {
    // D(s) = Σ_j p_{2j} (2j-1)!! s^j
    let d: Vec<Rational> = p
        .coeffs()
        .iter()
        .step_by(2)
        .enumerate()
        .map(|(j, c)| c * Rational::from_integer(double_factorial_odd(j as u32)))
        .collect();
    if d.is_empty() {
        return 0.0;
    }
    let e = taylor_shift_at_one(&d);
    let s = 1.0 / r;
    let u = (r - 1.0) / r;
    let ds: Vec<f64> = d.iter().map(rational_to_f64).collect();
    let es: Vec<f64> = e.iter().map(rational_to_f64).collect();
    let spread = |cs: &[f64], v: f64| cs.iter().rev().fold(0.0, |acc, c| acc * v.abs() + c.abs());
    if spread(&es, u) <= spread(&ds, s) {
        horner(&es, u)
    } else {
        horner(&ds, s)
    }
}

/// Coefficients of `D(1 - u)` in powers of `u`.
fn taylor_shift_at_one(d: &[Rational]) -> Vec<Rational> {
    // Synthetic division shifts D(s) to D(1 + t); then flip t = -u.
    let mut c = d.to_vec();
    let n = c.len();
    for i in 0..n {
        for k in (i..n - 1).rev() {
            let next = c[k + 1].clone();
            c[k] += next;
        }
    }
    for (i, ci) in c.iter_mut().enumerate() {
        if i % 2 == 1 && !ci.is_zero() {
            *ci = -ci.clone();
        }
    }
    c
}

fn horner(cs: &[f64], v: f64) -> f64 {
    cs.iter().rev().fold(0.0, |acc, c| acc * v + c)
}

/// `I(k, r) = ∫ H_k φ^r`: zero for odd `k`, and for `k = 2i`
/// `(2i-1)!! (1-r)^i / (r^{(2i+1)/2} (2π)^{(r-1)/2})`.
pub fn hermite_integral(k: usize, r: f64) -> Result<f64> {
    let w = GaussPowerWeight::new(r)?;
    if k % 2 == 1 {
        return Ok(0.0);
    }
    let i = (k / 2) as i32;
    let df = rational_to_f64(&Rational::from_integer(double_factorial_odd(i as u32)));
    Ok(w.mass() * df * ((1.0 - r) / r).powi(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::{hermite, RationalPoly};

    fn rp(cs: &[i64]) -> RationalPoly {
        Poly::from_coeffs(cs.iter().map(|&c| Rational::from_i64(c)).collect())
    }

    #[test]
    fn moments() {
        assert!((gauss_power_moment(0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        for r in [0.5, 1.0, 2.0, 7.5] {
            assert_eq!(gauss_power_moment(1, r).unwrap(), 0.0);
            assert_eq!(gauss_power_moment(7, r).unwrap(), 0.0);
        }
        let expected = (2.0 * std::f64::consts::PI).powf(-0.5) * 2f64.powf(-0.5) * 0.5;
        assert!((gauss_power_moment(2, 2.0).unwrap() - expected).abs() < 1e-16);
        assert!((expected - 0.141_047_4).abs() < 1e-7);
    }

    #[test]
    fn rejects_non_positive_index() {
        assert_eq!(gauss_power_moment(2, 0.0), Err(Error::InvalidIndex(0.0)));
        assert!(gauss_power_integral(&rp(&[1]), -1.0).is_err());
        assert!(hermite_integral(2, f64::NAN).is_err());
    }

    #[test]
    fn large_index_does_not_overflow() {
        let m = gauss_power_mass(400.0).unwrap();
        assert!(m > 0.0 && m.is_finite());
        let expected = (-(399.0 / 2.0) * (2.0 * std::f64::consts::PI).ln() - 0.5 * 400f64.ln()).exp();
        assert!((m / expected - 1.0).abs() < 1e-13);
        let h = hermite_integral(12, 400.0).unwrap();
        assert!(h.is_finite() && h > 0.0);
    }

    #[test]
    fn unit_mass_and_orthogonality_at_r_one() {
        assert!((gauss_power_integral(&rp(&[1]), 1.0).unwrap() - 1.0).abs() < 1e-15);
        for k in 1..=16 {
            assert_eq!(gauss_power_integral(&hermite::<Rational>(k), 1.0).unwrap(), 0.0, "k={k}");
        }
    }

    #[test]
    fn odd_hermite_integrals_vanish() {
        assert_eq!(hermite_integral(3, 2.2).unwrap(), 0.0);
    }

    #[test]
    fn taylor_shift_roundtrip() {
        // D(s) = (1 - s)^3 → e = [0, 0, 0, 1]
        let d: Vec<Rational> = [1, -3, 3, -1].iter().map(|&v| Rational::from_i64(v)).collect();
        let e = taylor_shift_at_one(&d);
        let expected: Vec<Rational> = [0, 0, 0, 1].iter().map(|&v| Rational::from_i64(v)).collect();
        assert_eq!(e, expected);
    }

    #[test]
    fn near_one_stays_accurate() {
        for k in 1..=9usize {
            let r = 1.0 + 1e-4;
            let a = gauss_power_integral(&hermite::<Rational>(2 * k), r).unwrap();
            let b = hermite_integral(2 * k, r).unwrap();
            assert!(((a - b) / b).abs() < 1e-12, "k={k} {a} {b}");
        }
    }
}
