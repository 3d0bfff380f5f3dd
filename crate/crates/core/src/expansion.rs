//! Large-`n` expansions of `∫ p_n^r`, the Renyi entropy `h_r(Z_n)` and the
//! entropy power `N_r(Z_n)`, together with the sign analysis that decides
//! eventual monotonicity of `N_r(Z_n)`.

use std::f64::consts::PI;
use std::fmt;

use crate::cumulants::{enumerate_compositions, CumulantVector};
use crate::edgeworth::q_polynomial;
use crate::error::{Error, Result};
use crate::exactpoly::{double_factorial_odd, factorial, hermite, rational_to_f64, Coefficient, Poly, Rational};
use crate::gaussint::{gauss_power_integral, gauss_power_mass, hermite_integral};
use crate::maxdensity;

/// Power series `Σ c_k u^k` in `u = n^{-1/2}`, truncated after `u^M` and
/// tagged with the exponent `ρ` of its `o(n^{-ρ})` remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
    remainder_exponent: f64,
}

impl TruncatedSeries {
    pub fn new(coeffs: Vec<f64>, remainder_exponent: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Unsupported("a truncated series needs at least one coefficient".into()));
        }
        Ok(TruncatedSeries { coeffs, remainder_exponent })
    }

    pub fn constant(c: f64, order: usize, remainder_exponent: f64) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        TruncatedSeries { coeffs, remainder_exponent }
    }

    /// `c_0 + Σ_j a_j n^{-j}`, i.e. only even powers of `u`.
    pub fn in_inverse_n(c0: f64, a: &[f64], remainder_exponent: f64) -> Self {
        let mut coeffs = vec![0.0; 2 * a.len() + 1];
        coeffs[0] = c0;
        for (j, v) in a.iter().enumerate() {
            coeffs[2 * (j + 1)] = *v;
        }
        TruncatedSeries { coeffs, remainder_exponent }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn remainder_exponent(&self) -> f64 {
        self.remainder_exponent
    }

    /// Coefficients of `n^{-1}, n^{-2}, ...` (the even powers of `u`).
    pub fn inverse_n_coefficients(&self) -> Vec<f64> {
        self.coeffs.iter().skip(2).step_by(2).copied().collect()
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    fn joint(&self, other: &Self) -> (usize, f64) {
        (self.order().min(other.order()), self.remainder_exponent.min(other.remainder_exponent))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (m, rho) = self.joint(other);
        let coeffs = (0..=m).map(|k| self.coeffs[k] + other.coeffs[k]).collect();
        TruncatedSeries { coeffs, remainder_exponent: rho }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (m, rho) = self.joint(other);
        let coeffs = (0..=m)
            .map(|k| (0..=k).map(|i| self.coeffs[i] * other.coeffs[k - i]).sum())
            .collect();
        TruncatedSeries { coeffs, remainder_exponent: rho }
    }

    pub fn scale(&self, s: f64) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            remainder_exponent: self.remainder_exponent,
        }
    }

    fn require_positive_head(&self) -> Result<f64> {
        let c0 = self.coeffs[0];
        if !(c0 > 0.0) {
            return Err(Error::Unsupported(format!("series head must be positive, got {c0}")));
        }
        Ok(c0)
    }

    pub fn log(&self) -> Result<Self> {
        let c0 = self.require_positive_head()?;
        let f = &self.coeffs;
        let mut g = vec![0.0; f.len()];
        g[0] = c0.ln();
        for k in 1..f.len() {
            let acc: f64 = (1..k).map(|i| i as f64 * g[i] * f[k - i]).sum();
            g[k] = (k as f64 * f[k] - acc) / (k as f64 * c0);
        }
        Ok(TruncatedSeries { coeffs: g, remainder_exponent: self.remainder_exponent })
    }

    pub fn exp(&self) -> Self {
        let f = &self.coeffs;
        let mut g = vec![0.0; f.len()];
        g[0] = f[0].exp();
        for k in 1..f.len() {
            g[k] = (1..=k).map(|i| i as f64 * f[i] * g[k - i]).sum::<f64>() / k as f64;
        }
        TruncatedSeries { coeffs: g, remainder_exponent: self.remainder_exponent }
    }

    pub fn pow(&self, q: f64) -> Result<Self> {
        let c0 = self.require_positive_head()?;
        let f = &self.coeffs;
        let mut g = vec![0.0; f.len()];
        g[0] = c0.powf(q);
        for k in 1..f.len() {
            let acc: f64 = (1..=k).map(|i| ((q + 1.0) * i as f64 - k as f64) * f[i] * g[k - i]).sum();
            g[k] = acc / (k as f64 * c0);
        }
        Ok(TruncatedSeries { coeffs: g, remainder_exponent: self.remainder_exponent })
    }
}

pub fn series_log(s: &TruncatedSeries) -> Result<TruncatedSeries> {
    s.log()
}

pub fn series_exp(s: &TruncatedSeries) -> TruncatedSeries {
    s.exp()
}

pub fn series_pow(s: &TruncatedSeries, q: f64) -> Result<TruncatedSeries> {
    s.pow(q)
}

/// Order of a Renyi entropy: Shannon (`r = 1`), finite `r`, or `r = ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RenyiIndex {
    Shannon,
    Finite(f64),
    Infinite,
}

impl RenyiIndex {
    /// Maps `1` to `Shannon` and `+∞` to `Infinite`.
    pub fn new(r: f64) -> Result<Self> {
        if r == 1.0 {
            Ok(RenyiIndex::Shannon)
        } else if r == f64::INFINITY {
            Ok(RenyiIndex::Infinite)
        } else if r.is_finite() && r > 0.0 {
            Ok(RenyiIndex::Finite(r))
        } else {
            Err(Error::InvalidIndex(r))
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            RenyiIndex::Shannon => 1.0,
            RenyiIndex::Finite(r) => *r,
            RenyiIndex::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for RenyiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RenyiIndex::Shannon => write!(f, "1"),
            RenyiIndex::Finite(r) => write!(f, "{r}"),
            RenyiIndex::Infinite => write!(f, "inf"),
        }
    }
}

/// Predicted eventual behaviour of `N_r(Z_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    EventuallyIncreasing,
    EventuallyDecreasing,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::EventuallyIncreasing => "eventually_increasing",
            Verdict::EventuallyDecreasing => "eventually_decreasing",
            Verdict::Indeterminate => "indeterminate",
        }
    }

    fn from_sign_of_b(b: f64) -> Self {
        if b < 0.0 {
            Verdict::EventuallyIncreasing
        } else if b > 0.0 {
            Verdict::EventuallyDecreasing
        } else {
            Verdict::Indeterminate
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn require_r_above_one(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 1.0) {
        return Err(Error::InvalidIndex(r));
    }
    Ok(())
}

/// Falling factorial `r (r-1) ... (r-k+1)`.
pub fn falling_factorial(r: f64, k: u32) -> f64 {
    (0..k).map(|i| r - i as f64).product()
}

/// Coefficient `a_j` of `n^{-j}` in `∫ p_n^r / ∫ φ^r = 1 + Σ a_j n^{-j} + ...`.
///
/// Sums `(r)_K / Π k_i! · ∫ Π Q_i^{k_i} φ^r` over all `(k_1, ..., k_{2j})`
/// with `Σ i k_i = 2j`, where `K = Σ k_i`.
pub fn aj_coefficient<T: Coefficient>(j: usize, r: f64, c: &CumulantVector<T>) -> Result<f64> {
    require_r_above_one(r)?;
    if j == 0 {
        return Ok(1.0);
    }
    c.require_order(2 * j + 2)?;
    let exact = c.to_rational();
    let q: Vec<Poly<Rational>> = (1..=2 * j).map(|k| q_polynomial(k, &exact)).collect::<Result<_>>()?;
    let mut total = 0.0;
    for comp in enumerate_compositions(2 * j) {
        let mut prod = Poly::<Rational>::one();
        for (i, &k) in comp.parts().iter().enumerate() {
            if k > 0 {
                prod = &prod * &q[i].pow(k);
            }
        }
        if prod.is_zero() {
            continue;
        }
        let weight =
            falling_factorial(r, comp.count()) / rational_to_f64(&Rational::from_integer(comp.factorial_product()));
        total += weight * gauss_power_integral(&prod, r)?;
    }
    Ok(total / gauss_power_mass(r)?)
}

/// `A_1(r) = (r-1) (2π)^{-(r-1)/2} r^{-3/2} [(2-r)/12 γ_3² + (r-1)/8 γ_4]`,
/// the `n^{-1}` coefficient of `∫ p_n^r`.
pub fn a1_closed_form<T: Coefficient>(r: f64, c: &CumulantVector<T>) -> Result<f64> {
    require_r_above_one(r)?;
    c.require_order(4)?;
    let (g3, g4) = (c.gamma(3).to_f64(), c.gamma(4).to_f64());
    let bracket = (2.0 - r) / 12.0 * g3 * g3 + (r - 1.0) / 8.0 * g4;
    let prefactor = (r - 1.0) * (-(r - 1.0) / 2.0 * (2.0 * PI).ln()).exp() * r.powf(-1.5);
    Ok(prefactor * bracket)
}

/// `A_2(r)` assembled from the four groups of `Q` products.
pub fn a2_via_integrals<T: Coefficient>(r: f64, c: &CumulantVector<T>) -> Result<f64> {
    require_r_above_one(r)?;
    c.require_order(6)?;
    let exact = c.to_rational();
    let q = |k| q_polynomial(k, &exact);
    let (q1, q2, q3, q4) = (q(1)?, q(2)?, q(3)?, q(4)?);
    let two = Rational::from_i64(2);
    let pair = &(&q2 * &q2) + &(&q1 * &q3).scale(&two);
    let triple = &(&q1 * &q1) * &q2;
    let quad = q1.pow(4);
    Ok(r * gauss_power_integral(&q4, r)?
        + falling_factorial(r, 2) / 2.0 * gauss_power_integral(&pair, r)?
        + falling_factorial(r, 3) / 2.0 * gauss_power_integral(&triple, r)?
        + falling_factorial(r, 4) / 24.0 * gauss_power_integral(&quad, r)?)
}

/// `A_2(r)` for `γ_3 = 0`:
/// `r γ_6/6! I_6 + r γ_4²/(2·4!²) I_8 + r(r-1) γ_4²/(2·4!²) ∫ H_4² φ^r`.
pub fn a2_symmetric_closed_form<T: Coefficient>(r: f64, c: &CumulantVector<T>) -> Result<f64> {
    require_r_above_one(r)?;
    c.require_order(6)?;
    let (g4, g6) = (c.gamma(4).to_f64(), c.gamma(6).to_f64());
    let h4 = hermite::<Rational>(4);
    let h4_sq = gauss_power_integral(&(&h4 * &h4), r)?;
    let k = g4 * g4 / (2.0 * 576.0);
    Ok(r * g6 / 720.0 * hermite_integral(6, r)? + r * k * hermite_integral(8, r)? + r * (r - 1.0) * k * h4_sq)
}

/// `E P(Z)` for a standard normal `Z`.
fn gaussian_expectation(p: &Poly<Rational>) -> Rational {
    p.coeffs()
        .iter()
        .enumerate()
        .filter(|(k, _)| k % 2 == 0)
        .fold(Rational::from_i64(0), |acc, (k, c)| {
            acc + c * Rational::from_integer(double_factorial_odd(k as u32 / 2))
        })
}

/// Coefficient of `n^{-j}` in `h(Z_n) - h(Z)` for the Shannon entropy.
///
/// Equals `-d/dr a_j(r)` at `r = 1`, where `(r)_K` has derivative
/// `(-1)^K (K-2)!` for `K ≥ 2` and the single-factor term contributes
/// `∫ Q_{2j} φ log φ = -½ E[Z² Q_{2j}(Z)]`.
pub fn shannon_coefficient<T: Coefficient>(j: usize, c: &CumulantVector<T>) -> Result<Rational> {
    if j == 0 {
        return Ok(Rational::from_i64(0));
    }
    c.require_order(2 * j + 2)?;
    let exact = c.to_rational();
    let q: Vec<Poly<Rational>> = (1..=2 * j).map(|k| q_polynomial(k, &exact)).collect::<Result<_>>()?;
    let x2 = Poly::monomial(Rational::from_i64(1), 2);
    let mut total = Rational::from_i64(0);
    for comp in enumerate_compositions(2 * j) {
        let big_k = comp.count();
        let mut prod = Poly::<Rational>::one();
        for (i, &k) in comp.parts().iter().enumerate() {
            if k > 0 {
                prod = &prod * &q[i].pow(k);
            }
        }
        if big_k == 1 {
            total -= gaussian_expectation(&(&x2 * &prod)) * Rational::ratio(1, 2);
        } else {
            let sign = if big_k % 2 == 0 { 1 } else { -1 };
            let weight = Rational::from_integer(factorial(big_k - 2) * sign) / Rational::from_integer(comp.factorial_product());
            total += weight * gaussian_expectation(&prod);
        }
    }
    Ok(-total)
}

/// Shannon coefficients `b_1..b_J` with `J = ⌊(m-2)/2⌋`.
pub fn shannon_expansion<T: Coefficient>(m: usize, c: &CumulantVector<T>) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::InsufficientMoments { needed: 2, got: m });
    }
    (1..=(m - 2) / 2).map(|j| shannon_coefficient(j, c).map(|b| rational_to_f64(&b))).collect()
}

/// `b(r) = -(1/r)[(2-r)/12 γ_3² + (r-1)/8 γ_4]`, with the limits
/// `b(1) = -γ_3²/12` and `b(∞) = γ_3²/12 - γ_4/8`.
pub fn b_coefficient<T: Coefficient>(index: RenyiIndex, c: &CumulantVector<T>) -> Result<f64> {
    c.require_order(4)?;
    let (g3, g4) = (c.gamma(3).to_f64(), c.gamma(4).to_f64());
    Ok(match index {
        RenyiIndex::Shannon => -g3 * g3 / 12.0,
        RenyiIndex::Infinite => g3 * g3 / 12.0 - g4 / 8.0,
        RenyiIndex::Finite(r) => {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidIndex(r));
            }
            -((2.0 - r) / 12.0 * g3 * g3 + (r - 1.0) / 8.0 * g4) / r
        }
    })
}

/// `B_1(r) = -b(r)`.
pub fn delta_b1<T: Coefficient>(index: RenyiIndex, c: &CumulantVector<T>) -> Result<f64> {
    Ok(-b_coefficient(index, c)?)
}

/// Sign-change point `r_0 = (4γ_3² - 3γ_4)/(2γ_3² - 3γ_4)` of `b(r)`,
/// defined when `γ_3 ≠ 0` and `γ_4 < (2/3)γ_3²`.
pub fn r0<T: Coefficient>(c: &CumulantVector<T>) -> Result<Option<f64>> {
    c.require_order(4)?;
    let g3 = c.gamma(3).to_rational();
    let g4 = c.gamma(4).to_rational();
    let g3sq = &g3 * &g3;
    let three = Rational::from_i64(3);
    let den = &g3sq * Rational::from_i64(2) - &g4 * &three;
    if g3 == Rational::from_i64(0) || den <= Rational::from_i64(0) {
        return Ok(None);
    }
    let num = &g3sq * Rational::from_i64(4) - &g4 * &three;
    Ok(Some(rational_to_f64(&(num / den))))
}

/// Leading entropy coefficient when `γ_3 = ... = γ_{2k-1} = 0`:
/// `γ_{2k}/(2^k k!) · (1/r - 1)^{k-1}`.
pub fn prop82_coefficient(k: u32, r: f64, gamma_2k: f64) -> Result<f64> {
    require_r_above_one(r)?;
    if k < 2 {
        return Err(Error::Unsupported(format!("k must be at least 2, got {k}")));
    }
    let denom = 2f64.powi(k as i32) * (1..=k).map(|i| i as f64).product::<f64>();
    Ok(gamma_2k / denom * (1.0 / r - 1.0).powi(k as i32 - 1))
}

/// Predicted eventual monotonicity of `N_r(Z_n)`: increasing when
/// `b(r) < 0`, decreasing when `b(r) > 0`.
pub fn monotonicity_prediction<T: Coefficient>(index: RenyiIndex, c: &CumulantVector<T>) -> Result<Verdict> {
    if index == RenyiIndex::Infinite {
        return maxdensity::monotonicity_prediction_inf(c);
    }
    Ok(Verdict::from_sign_of_b(b_coefficient(index, c)?))
}

/// `h_r(Z) = ½ log 2π + log r / (2(r-1))` for the standard normal law.
pub fn gaussian_renyi_entropy(r: f64) -> Result<f64> {
    require_r_above_one(r)?;
    Ok(0.5 * (2.0 * PI).ln() + r.ln() / (2.0 * (r - 1.0)))
}

/// `N_r(Z) = 2π r^{1/(r-1)}`.
pub fn gaussian_entropy_power(r: f64) -> Result<f64> {
    Ok((2.0 * gaussian_renyi_entropy(r)?).exp())
}

/// Coefficients of
/// `∫ p_n^r / ∫ φ^r = 1 + Σ a_j n^{-j}`,
/// `h_r(Z_n) = h_r(Z) + Σ b_j n^{-j}` and
/// `N_r(Z_n) = N_r(Z) (1 + Σ c_j n^{-j})`, for `j ≤ ⌊(m-2)/2⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub r: f64,
    pub m: usize,
    pub cumulants: CumulantVector<f64>,
    /// The series carry an `o(n^{-ρ})` remainder with `ρ = (m-2)/2`.
    pub remainder_exponent: f64,
}

impl ExpansionCoefficients {
    pub fn terms(&self) -> usize {
        self.a.len()
    }

    pub fn predicted_entropy(&self, n: f64) -> f64 {
        let base = gaussian_renyi_entropy(self.r).unwrap_or(f64::NAN);
        base + inverse_power_sum(&self.b, n)
    }

    pub fn predicted_entropy_power(&self, n: f64) -> f64 {
        let base = gaussian_entropy_power(self.r).unwrap_or(f64::NAN);
        base * (1.0 + inverse_power_sum(&self.c, n))
    }
}

fn inverse_power_sum(coeffs: &[f64], n: f64) -> f64 {
    coeffs.iter().enumerate().map(|(j, v)| v * n.powi(-(j as i32 + 1))).sum()
}

/// Expansion of the Renyi entropy of `Z_n` when `m` moments are finite.
pub fn entropy_expansion<T: Coefficient>(m: usize, r: f64, c: &CumulantVector<T>) -> Result<ExpansionCoefficients> {
    require_r_above_one(r)?;
    if m < 2 {
        return Err(Error::InsufficientMoments { needed: 2, got: m });
    }
    let terms = (m - 2) / 2;
    c.require_order(2 * terms + 2)?;
    let a: Vec<f64> = (1..=terms).map(|j| aj_coefficient(j, r, c)).collect::<Result<_>>()?;
    let rho = (m as f64 - 2.0) / 2.0;
    let s = TruncatedSeries::in_inverse_n(1.0, &a, rho);
    let b = s.log()?.scale(-1.0 / (r - 1.0)).inverse_n_coefficients();
    let cc = s.pow(-2.0 / (r - 1.0))?.inverse_n_coefficients();
    Ok(ExpansionCoefficients {
        a,
        b,
        c: cc,
        r,
        m,
        cumulants: c.to_f64(),
        remainder_exponent: rho,
    })
}

/// Two-point Richardson estimate `2 g(2n) - g(n)` for a sequence with an
/// `O(1/n)` leading error.
pub fn richardson(g_n: f64, g_2n: f64) -> f64 {
    2.0 * g_2n - g_n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::standard_cumulants_exact;
    use crate::numerics::DistributionSpec;
    use proptest::prelude::*;

    fn cum(higher: &[f64]) -> CumulantVector<f64> {
        CumulantVector::from_higher(higher.to_vec())
    }

    #[test]
    fn shannon_first_coefficient_is_exact() {
        let c = CumulantVector::from_higher(vec![Rational::ratio(3, 2), Rational::ratio(-1, 3)]);
        assert_eq!(shannon_coefficient(1, &c).unwrap(), Rational::ratio(-9, 48));
    }

    #[test]
    fn shannon_series_is_the_renyi_limit() {
        let c = cum(&[0.7, -0.4, 0.9, 1.3, -0.5, 2.0]);
        let shannon = shannon_expansion(8, &c).unwrap();
        assert_eq!(shannon.len(), 3);
        for eps in [1e-5, 2e-5] {
            let renyi = entropy_expansion(8, 1.0 + eps, &c).unwrap();
            for (s, r) in shannon.iter().zip(&renyi.b) {
                assert!((s - r).abs() < 50.0 * eps * s.abs().max(1.0), "{s} vs {r}");
            }
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn series_examples() {
        let a1 = 0.37;
        let s = TruncatedSeries::new(vec![1.0, 0.0, a1, 0.0, 0.0], 2.0).unwrap();
        let l = s.log().unwrap();
        assert!((l.coeff(2) - a1).abs() < 1e-15 && (l.coeff(4) + a1 * a1 / 2.0).abs() < 1e-15);
        let p = s.pow(-2.0).unwrap();
        assert!((p.coeff(2) + 2.0 * a1).abs() < 1e-15 && (p.coeff(4) - 3.0 * a1 * a1).abs() < 1e-15);
        let c = TruncatedSeries::constant(2.5, 3, 1.0);
        assert!((c.log().unwrap().coeff(0) - 2.5f64.ln()).abs() < 1e-15);
        let x = TruncatedSeries::new(vec![1.0, 0.4, -0.2], 1.0).unwrap();
        assert_eq!(x.pow(1.0).unwrap(), x);
        assert!(TruncatedSeries::constant(0.0, 2, 1.0).log().is_err());
        assert!(TruncatedSeries::constant(-1.0, 2, 1.0).pow(0.5).is_err());
    }

    #[test]
    fn remainder_tags_take_the_minimum() {
        let a = TruncatedSeries::constant(1.0, 4, 2.0);
        let b = TruncatedSeries::constant(1.0, 2, 0.5);
        let s = a.mul(&b);
        assert_eq!(s.order(), 2);
        assert_eq!(s.remainder_exponent(), 0.5);
        assert_eq!(a.add(&b).remainder_exponent(), 0.5);
    }

    proptest! {
        #[test]
        fn exp_inverts_log(c0 in 0.2f64..5.0, rest in proptest::collection::vec(-1.0f64..1.0, 1..7)) {
            let mut coeffs = vec![c0];
            coeffs.extend(rest);
            let s = TruncatedSeries::new(coeffs, 1.0).unwrap();
            let back = s.log().unwrap().exp();
            for k in 0..=s.order() {
                prop_assert!((back.coeff(k) - s.coeff(k)).abs() < 1e-9 * (1.0 + s.coeff(k).abs()));
            }
        }

        #[test]
        fn powers_multiply(c0 in 0.2f64..5.0, rest in proptest::collection::vec(-1.0f64..1.0, 1..7),
                           q1 in -3.0f64..3.0, q2 in -3.0f64..3.0) {
            let mut coeffs = vec![c0];
            coeffs.extend(rest);
            let s = TruncatedSeries::new(coeffs, 1.0).unwrap();
            let lhs = s.pow(q1 + q2).unwrap();
            let rhs = s.pow(q1).unwrap().mul(&s.pow(q2).unwrap());
            for k in 0..=s.order() {
                prop_assert!((lhs.coeff(k) - rhs.coeff(k)).abs() < 1e-8 * (1.0 + lhs.coeff(k).abs()));
            }
        }
    }

    #[test]
    fn aj_vanishes_for_gaussian_cumulants() {
        for j in 1..=3 {
            let c = CumulantVector::<f64>::gaussian(2 * j + 2);
            assert_eq!(aj_coefficient(j, 2.0, &c).unwrap(), 0.0);
        }
        assert!(aj_coefficient(2, 2.0, &cum(&[0.0, 0.0, 0.0])).is_err());
        assert!(aj_coefficient(1, 1.0, &cum(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn a1_closed_form_examples() {
        let uni = standard_cumulants_exact(&DistributionSpec::Uniform, 4).unwrap().unwrap();
        let a = a1_closed_form(2.0, &uni).unwrap();
        let expected = -3.0 / (20.0 * 2f64.powf(1.5) * (2.0 * PI).sqrt());
        assert!(rel(a, expected) < 1e-14);
        // γ_3 = 0 form
        let c = cum(&[0.0, 0.7]);
        for r in [1.3, 2.0, 4.5] {
            let e = (-(r - 1.0) / 2.0 * (2.0 * PI).ln()).exp() * r.powf(-1.5) * (r - 1.0) * (r - 1.0) / 8.0 * 0.7;
            assert!(rel(a1_closed_form(r, &c).unwrap(), e) < 1e-14);
        }
        // A_1/(r-1) → γ_3²/12
        let c = cum(&[1.1, -0.4]);
        let r = 1.0 + 1e-6;
        assert!((a1_closed_form(r, &c).unwrap() / (r - 1.0) - 1.21 / 12.0).abs() < 1e-4);
        assert!(a1_closed_form(1.0, &c).is_err());
    }

    #[test]
    fn a1_matches_the_r_five_halves_form() {
        // (2π)^{(r-1)/2} r^{5/2}/(r-1) A_1 = r[(2-r)/12 γ_3² + (r-1)/8 γ_4]
        let c = cum(&[0.9, 1.7]);
        for r in [1.5, 2.0, 3.0] {
            let lhs = (2.0 * PI).powf((r - 1.0) / 2.0) * r.powf(2.5) / (r - 1.0) * a1_closed_form(r, &c).unwrap();
            let rhs = r * ((2.0 - r) / 12.0 * 0.81 + (r - 1.0) / 8.0 * 1.7);
            assert!(rel(lhs, rhs) < 1e-13);
        }
    }

    #[test]
    fn a2_symmetric_agrees() {
        let c = cum(&[0.0, 1.3, 0.0, -2.2]);
        for r in [1.5, 2.0, 3.0] {
            let a = a2_via_integrals(r, &c).unwrap();
            let b = a2_symmetric_closed_form(r, &c).unwrap();
            assert!(rel(a, b) < 1e-12, "r={r} {a} {b}");
        }
        assert_eq!(a2_via_integrals(2.0, &CumulantVector::<f64>::gaussian(6)).unwrap(), 0.0);
    }

    #[test]
    fn b_coefficient_examples() {
        let uni = standard_cumulants_exact(&DistributionSpec::Uniform, 4).unwrap().unwrap();
        assert!((b_coefficient(RenyiIndex::Finite(2.0), &uni).unwrap() - 3.0 / 40.0).abs() < 1e-16);
        assert!((delta_b1(RenyiIndex::Finite(2.0), &uni).unwrap() + 3.0 / 40.0).abs() < 1e-16);
        let alpha: f64 = 3.0;
        let g = cum(&[2.0 / alpha.sqrt(), 6.0 / alpha]);
        assert!((b_coefficient(RenyiIndex::Infinite, &g).unwrap() + 5.0 / (12.0 * alpha)).abs() < 1e-15);
        for r in [1.5, 2.0, 10.0] {
            assert_eq!(b_coefficient(RenyiIndex::Finite(r), &CumulantVector::<f64>::gaussian(4)).unwrap(), 0.0);
        }
        let c = cum(&[0.8, -0.3]);
        let near_one = b_coefficient(RenyiIndex::Finite(1.0 + 1e-9), &c).unwrap();
        assert!((near_one - b_coefficient(RenyiIndex::Shannon, &c).unwrap()).abs() < 1e-8);
        let far = b_coefficient(RenyiIndex::Finite(1e9), &c).unwrap();
        assert!((far - b_coefficient(RenyiIndex::Infinite, &c).unwrap()).abs() < 1e-8);
        assert!((delta_b1(RenyiIndex::Finite(1.0 + 1e-9), &c).unwrap() - 0.64 / 12.0).abs() < 1e-8);
    }

    #[test]
    fn prop82_examples() {
        assert!((prop82_coefficient(3, 2.0, 1.0).unwrap() - 1.0 / 192.0).abs() < 1e-16);
        assert_eq!(prop82_coefficient(4, 2.0, 0.0).unwrap(), 0.0);
        let c = cum(&[0.0, 0.9]);
        for r in [1.5, 2.0, 7.0] {
            let b = b_coefficient(RenyiIndex::Finite(r), &c).unwrap();
            assert!((prop82_coefficient(2, r, 0.9).unwrap() - b).abs() < 1e-15);
        }
    }

    #[test]
    fn entropy_expansion_structure() {
        let c = cum(&[0.6, -0.4, 0.3, 0.9, 0.1, -0.2]);
        for r in [1.5, 2.0, 3.0] {
            let e5 = entropy_expansion(5, r, &c).unwrap();
            assert_eq!(e5.terms(), 1);
            assert!(rel(e5.b[0], b_coefficient(RenyiIndex::Finite(r), &c).unwrap()) < 1e-10);
            assert!(rel(e5.c[0], 2.0 * e5.b[0]) < 1e-12);
            assert!(entropy_expansion(3, r, &c).unwrap().b.is_empty());
            let e8 = entropy_expansion(8, r, &c).unwrap();
            assert_eq!(e8.terms(), 3);
            // N_r series is exp(2 Σ b_j n^{-j})
            let via_b = TruncatedSeries::in_inverse_n(0.0, &e8.b, 3.0).scale(2.0).exp();
            for (j, cj) in e8.c.iter().enumerate() {
                assert!((via_b.coeff(2 * j + 2) - cj).abs() < 1e-12);
            }
        }
        let g = CumulantVector::<f64>::gaussian(7);
        assert!(entropy_expansion(7, 2.0, &g).unwrap().b.iter().all(|v| *v == 0.0));
        assert!(entropy_expansion(5, 1.0, &c).is_err());
        let sym = cum(&[0.0, 1.4]);
        let e = entropy_expansion(4, 2.5, &sym).unwrap();
        assert!((e.b[0] - prop82_coefficient(2, 2.5, 1.4).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn verdict_examples() {
        let uni = standard_cumulants_exact(&DistributionSpec::Uniform, 4).unwrap().unwrap();
        for r in [1.1, 2.0, 5.0, 100.0] {
            assert_eq!(monotonicity_prediction(RenyiIndex::Finite(r), &uni).unwrap(), Verdict::EventuallyDecreasing);
        }
        let gam = standard_cumulants_exact(&DistributionSpec::standardized_gamma(4.0).unwrap(), 4).unwrap().unwrap();
        for idx in [RenyiIndex::Shannon, RenyiIndex::Finite(2.0), RenyiIndex::Finite(50.0), RenyiIndex::Infinite] {
            assert_eq!(monotonicity_prediction(idx, &gam).unwrap(), Verdict::EventuallyIncreasing);
        }
        let g = CumulantVector::<f64>::gaussian(4);
        assert_eq!(monotonicity_prediction(RenyiIndex::Finite(2.0), &g).unwrap(), Verdict::Indeterminate);
    }

    #[test]
    fn r0_is_the_sign_change() {
        let c = cum(&[1.0, 0.2]);
        let root = r0(&c).unwrap().unwrap();
        let f = |r: f64| delta_b1(RenyiIndex::Finite(r), &c).unwrap();
        let (mut lo, mut hi) = (1.0 + 1e-12, 1e6);
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((0.5 * (lo + hi) - root).abs() < 1e-9);
        assert!(r0(&cum(&[2.0, 6.0])).unwrap().is_none());
        assert!(r0(&cum(&[0.0, -1.0])).unwrap().is_none());
    }

    #[test]
    fn richardson_removes_first_order_error() {
        let g = |n: f64| 0.3 + 1.7 / n;
        assert!((richardson(g(10.0), g(20.0)) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn renyi_index_parsing() {
        assert_eq!(RenyiIndex::new(1.0).unwrap(), RenyiIndex::Shannon);
        assert_eq!(RenyiIndex::new(f64::INFINITY).unwrap(), RenyiIndex::Infinite);
        assert!(RenyiIndex::new(-2.0).is_err());
        assert_eq!(RenyiIndex::Infinite.to_string(), "inf");
    }
}
