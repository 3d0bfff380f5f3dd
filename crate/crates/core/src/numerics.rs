//! Densities of normalized sums `Z_n = (X_1 + ... + X_n)/√n` obtained by
//! powering the characteristic function and inverting it with an FFT, plus
//! the functionals (Renyi and Shannon entropy, sup-norm, relative entropy
//! to the normal law) evaluated on the resulting grids.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;
use rustfft::FftPlanner;
use statrs::function::gamma::ln_gamma;

use crate::cumulants::{moments_from_cumulants, CumulantVector, MAX_ORDER};
use crate::edgeworth::normal_density;
use crate::error::{Error, Result};
use crate::exactpoly::{double_factorial_odd, factorial, Coefficient, Rational};

const STANDARDIZATION_TOL: f64 = 1e-10;
const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Finite Gaussian mixture `Σ w_i N(μ_i, σ_i²)` with mean 0 and variance 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    means: Vec<f64>,
    sigmas: Vec<f64>,
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, means: Vec<f64>, sigmas: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() || weights.len() != sigmas.len() {
            return Err(Error::InvalidDistribution(
                "mixture weights, means and sigmas must be non-empty and of equal length".into(),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0))
            || sigmas.iter().any(|s| !(s.is_finite() && *s > 0.0))
            || means.iter().any(|m| !m.is_finite())
        {
            return Err(Error::InvalidDistribution(
                "mixture weights and sigmas must be positive and finite".into(),
            ));
        }
        let mass: f64 = weights.iter().sum();
        let mean: f64 = weights.iter().zip(&means).map(|(w, m)| w * m).sum();
        let second: f64 = weights
            .iter()
            .zip(means.iter().zip(&sigmas))
            .map(|(w, (m, s))| w * (m * m + s * s))
            .sum();
        if (mass - 1.0).abs() > STANDARDIZATION_TOL {
            return Err(Error::InvalidDistribution(format!("mixture weights sum to {mass}")));
        }
        check_standardized(mean, second)?;
        Ok(GaussianMixture { weights, means, sigmas })
    }

    pub fn standard_normal() -> Self {
        GaussianMixture { weights: vec![1.0], means: vec![0.0], sigmas: vec![1.0] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    fn components(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.weights
            .iter()
            .zip(&self.means)
            .zip(&self.sigmas)
            .map(|((&w, &m), &s)| (w, m, s))
    }
}

/// Piecewise-linear density through equally spaced samples, zero outside
/// `[x0, x0 + (len-1) h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    x0: f64,
    h: f64,
    values: Vec<f64>,
}

impl TabulatedDensity {
    /// Accepts samples whose interpolant already has unit mass, mean 0 and
    /// variance 1.
    pub fn new(x0: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        let t = Self::raw(x0, h, values)?;
        let [mass, mean, second] = t.raw_moments();
        if (mass - 1.0).abs() > STANDARDIZATION_TOL {
            return Err(Error::InvalidDistribution(format!("tabulated density has mass {mass}")));
        }
        check_standardized(mean, second)?;
        Ok(t)
    }

    /// Normalizes, centers and rescales arbitrary non-negative samples.
    pub fn standardize(x0: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        let t = Self::raw(x0, h, values)?;
        let [mass, m1, m2] = t.raw_moments();
        if mass <= 0.0 {
            return Err(Error::InvalidDistribution("tabulated density has no mass".into()));
        }
        let mean = m1 / mass;
        let sd = (m2 / mass - mean * mean).sqrt();
        let values = t.values.iter().map(|v| v * sd / mass).collect();
        Self::new((x0 - mean) / sd, h / sd, values)
    }

    fn raw(x0: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        if !(h.is_finite() && h > 0.0 && x0.is_finite()) || values.len() < 2 {
            return Err(Error::InvalidDistribution("tabulated density needs h > 0 and two samples".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidDistribution("tabulated density must be non-negative".into()));
        }
        Ok(TabulatedDensity { x0, h, values })
    }

    fn node(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.h
    }

    /// `∫ x^k p` of the interpolant: each hat on `[c-h, c+h]` contributes
    /// `h v E(c + hY)^k` with `Y` triangular on `[-1, 1]`.
    fn interpolant_moment(&self, k: usize) -> f64 {
        // E Y^{2j} = 2/((2j+1)(2j+2))
        let tri: Vec<f64> = (0..=k)
            .map(|i| if i % 2 == 1 { 0.0 } else { 2.0 / ((i + 1) as f64 * (i + 2) as f64) })
            .collect();
        let binom = binomial_row(k);
        // end hats are cut in half by the table boundary
        let mut total = 0.0;
        for (idx, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let c = self.node(idx);
            let full: f64 = (0..=k)
                .map(|i| binom[i] * c.powi((k - i) as i32) * self.h.powi(i as i32) * tri[i])
                .sum();
            let mut contrib = full;
            let last = self.values.len() - 1;
            if idx == 0 || idx == last {
                let sign = if idx == 0 { -1.0 } else { 1.0 };
                let half: f64 = (0..=k)
                    .map(|i| {
                        // ∫_0^1 y^i (1-y) dy = 1/((i+1)(i+2))
                        let m = 1.0 / ((i + 1) as f64 * (i + 2) as f64);
                        binom[i] * c.powi((k - i) as i32) * (sign * self.h).powi(i as i32) * m
                    })
                    .sum();
                contrib = full - half;
            }
            total += self.h * v * contrib;
        }
        total
    }

    fn raw_moments(&self) -> [f64; 3] {
        [self.interpolant_moment(0), self.interpolant_moment(1), self.interpolant_moment(2)]
    }

    pub fn density(&self, x: f64) -> f64 {
        let pos = (x - self.x0) / self.h;
        if !(pos >= 0.0) || pos > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let k = (pos.floor() as usize).min(self.values.len() - 2);
        let w = pos - k as f64;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }

    /// Fourier transform of the interpolant: sampled transform times the
    /// hat kernel `h sinc²(th/2)`, minus the half-hats that fall outside.
    pub fn characteristic(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::zero();
        for (k, &v) in self.values.iter().enumerate() {
            if v != 0.0 {
                acc += Complex64::from_polar(v, t * self.node(k));
            }
        }
        let u = 0.5 * t * self.h;
        let sinc = if u.abs() < 1e-8 { 1.0 - u * u / 6.0 } else { u.sin() / u };
        let mut f = acc * (self.h * sinc * sinc);
        let last = self.values.len() - 1;
        for (idx, sign) in [(0usize, -1.0), (last, 1.0)] {
            let v = self.values[idx];
            if v != 0.0 {
                f -= Complex64::from_polar(v, t * self.node(idx)) * self.h * half_hat_transform(sign * t * self.h);
            }
        }
        f
    }
}

/// `∫_0^1 (1-y) e^{iωy} dy`.
fn half_hat_transform(w: f64) -> Complex64 {
    if w.abs() < 1e-4 {
        let i = Complex64::i();
        return Complex64::new(0.5, 0.0) + i * w / 6.0 - Complex64::new(w * w / 24.0, 0.0);
    }
    let i = Complex64::i();
    let e = Complex64::from_polar(1.0, w);
    // (e^{iω} - 1 - iω) / (iω)^2
    (e - 1.0 - i * w) / (i * w * i * w)
}

fn binomial_row(k: usize) -> Vec<f64> {
    let mut row = vec![1.0; k + 1];
    for i in 1..k {
        row[i] = row[i - 1] * (k - i + 1) as f64 / i as f64;
    }
    row
}

fn check_standardized(mean: f64, second: f64) -> Result<()> {
    if mean.abs() > STANDARDIZATION_TOL || (second - 1.0).abs() > STANDARDIZATION_TOL {
        return Err(Error::NotStandardized(format!("mean {mean}, second moment {second}")));
    }
    Ok(())
}

/// Base law of the summands; always mean 0 and variance 1.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    /// Uniform on `(-√3, √3)`.
    Uniform,
    /// `(ξ - α)/√α` with `ξ ~ Gamma(α, 1)`.
    StandardizedGamma { alpha: f64 },
    /// Laplace law with density `e^{-√2|x|}/√2`.
    TwoSidedExponential,
    GaussianMixture(GaussianMixture),
    GridDensity(TabulatedDensity),
}

/// Polynomial tail bound `|f(t)| ≤ C |t|^{-d}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBound {
    pub constant: f64,
    pub exponent: f64,
}

impl DistributionSpec {
    pub fn standardized_gamma(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidDistribution(format!("Gamma shape must be positive, got {alpha}")));
        }
        Ok(DistributionSpec::StandardizedGamma { alpha })
    }

    pub fn gaussian_mixture(weights: Vec<f64>, means: Vec<f64>, sigmas: Vec<f64>) -> Result<Self> {
        Ok(DistributionSpec::GaussianMixture(GaussianMixture::new(weights, means, sigmas)?))
    }

    pub fn standard_normal() -> Self {
        DistributionSpec::GaussianMixture(GaussianMixture::standard_normal())
    }

    pub fn name(&self) -> String {
        match self {
            DistributionSpec::Uniform => "uniform".into(),
            DistributionSpec::StandardizedGamma { alpha } => format!("gamma(alpha={alpha})"),
            DistributionSpec::TwoSidedExponential => "two_sided_exponential".into(),
            DistributionSpec::GaussianMixture(m) if m.weights.len() == 1 => "gaussian".into(),
            DistributionSpec::GaussianMixture(m) => format!("gaussian_mixture({})", m.weights.len()),
            DistributionSpec::GridDensity(t) => format!("grid_density({})", t.values.len()),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match self {
            DistributionSpec::Uniform => {
                if x.abs() < SQRT_3 {
                    0.5 / SQRT_3
                } else {
                    0.0
                }
            }
            DistributionSpec::StandardizedGamma { alpha } => {
                let a = *alpha;
                let y = a + a.sqrt() * x;
                if y <= 0.0 {
                    return 0.0;
                }
                (0.5 * a.ln() + (a - 1.0) * y.ln() - y - ln_gamma(a)).exp()
            }
            DistributionSpec::TwoSidedExponential => {
                std::f64::consts::FRAC_1_SQRT_2 * (-std::f64::consts::SQRT_2 * x.abs()).exp()
            }
            DistributionSpec::GaussianMixture(m) => m
                .components()
                .map(|(w, mu, s)| w * normal_density((x - mu) / s) / s)
                .sum(),
            DistributionSpec::GridDensity(t) => t.density(x),
        }
    }

    /// `f(t) = E e^{itX}`.
    pub fn characteristic(&self, t: f64) -> Complex64 {
        match self {
            DistributionSpec::Uniform => {
                let u = SQRT_3 * t;
                let v = if u.abs() < 1e-8 { 1.0 - u * u / 6.0 } else { u.sin() / u };
                Complex64::new(v, 0.0)
            }
            DistributionSpec::StandardizedGamma { alpha } => {
                let s = alpha.sqrt();
                // -itα^{1/2} - α Log(1 - it/√α); the real part of the argument stays 1
                let log = Complex64::new(1.0, -t / s).ln();
                (Complex64::new(0.0, -t * s) - log * *alpha).exp()
            }
            DistributionSpec::TwoSidedExponential => Complex64::new(1.0 / (1.0 + 0.5 * t * t), 0.0),
            DistributionSpec::GaussianMixture(m) => m
                .components()
                .map(|(w, mu, s)| Complex64::from_polar(w * (-0.5 * s * s * t * t).exp(), mu * t))
                .sum(),
            DistributionSpec::GridDensity(tab) => tab.characteristic(t),
        }
    }

    /// Smallest `n` for which `|f|^n` is integrable.
    pub fn min_sum_order(&self) -> usize {
        match self {
            DistributionSpec::Uniform => 2,
            DistributionSpec::StandardizedGamma { alpha } => (1.0 / alpha).floor() as usize + 1,
            _ => 1,
        }
    }

    /// Tail bound of `|f|`; `None` when the decay is faster than any power.
    pub fn decay_bound(&self) -> Option<DecayBound> {
        match self {
            DistributionSpec::Uniform => Some(DecayBound { constant: 1.0 / SQRT_3, exponent: 1.0 }),
            DistributionSpec::StandardizedGamma { alpha } => {
                Some(DecayBound { constant: alpha.powf(alpha / 2.0), exponent: *alpha })
            }
            DistributionSpec::TwoSidedExponential => Some(DecayBound { constant: 2.0, exponent: 2.0 }),
            DistributionSpec::GaussianMixture(_) => None,
            DistributionSpec::GridDensity(t) => Some(DecayBound { constant: 4.0 / (t.h * t.h), exponent: 2.0 }),
        }
    }

    /// Moments `α_1..α_order`.
    pub fn moments(&self, order: usize) -> Result<Vec<f64>> {
        check_moment_order(order)?;
        if let Some(exact) = self.exact_moments(order)? {
            return Ok(exact.iter().map(|q| q.to_f64()).collect());
        }
        let out = match self {
            DistributionSpec::StandardizedGamma { alpha } => {
                let gamma: Vec<f64> = (1..=order).map(|k| gamma_cumulant_f64(*alpha, k)).collect();
                let c = CumulantVector::new(gamma)?;
                moments_from_cumulants(&c).as_slice().to_vec()
            }
            DistributionSpec::GaussianMixture(m) => (1..=order)
                .map(|k| {
                    m.components()
                        .map(|(w, mu, s)| w * shifted_normal_moment(k, mu, s))
                        .sum()
                })
                .collect(),
            DistributionSpec::GridDensity(t) => (1..=order).map(|k| t.interpolant_moment(k)).collect(),
            DistributionSpec::Uniform | DistributionSpec::TwoSidedExponential => unreachable!(),
        };
        Ok(out)
    }

    /// Moments in exact arithmetic when they are rational.
    pub fn exact_moments(&self, order: usize) -> Result<Option<Vec<Rational>>> {
        check_moment_order(order)?;
        let out = match self {
            DistributionSpec::Uniform => Some(
                (1..=order)
                    .map(|k| {
                        if k % 2 == 1 {
                            Rational::zero()
                        } else {
                            let j = (k / 2) as u32;
                            Rational::new(BigInt::from(3).pow(j), BigInt::from(k + 1))
                        }
                    })
                    .collect(),
            ),
            DistributionSpec::TwoSidedExponential => Some(
                (1..=order)
                    .map(|k| {
                        if k % 2 == 1 {
                            Rational::zero()
                        } else {
                            Rational::new(factorial(k as u32), BigInt::from(2).pow((k / 2) as u32))
                        }
                    })
                    .collect(),
            ),
            DistributionSpec::StandardizedGamma { alpha } => match rational_sqrt(*alpha) {
                Some(root) => {
                    let a = &root * &root;
                    let gamma: Vec<Rational> = (1..=order)
                        .map(|k| {
                            if k == 1 {
                                return Rational::zero();
                            }
                            // (k-1)! α / (√α)^k
                            Rational::from_integer(factorial(k as u32 - 1)) * &a / root.powi(k as u32)
                        })
                        .collect();
                    let c = CumulantVector::new(gamma)?;
                    Some(moments_from_cumulants(&c).as_slice().to_vec())
                }
                None => None,
            },
            DistributionSpec::GaussianMixture(m) => exact_mixture_moments(m, order),
            _ => None,
        };
        Ok(out)
    }
}

/// Mixture moments from the binary values of the parameters, kept only when
/// they are exactly standardized.
fn exact_mixture_moments(m: &GaussianMixture, order: usize) -> Option<Vec<Rational>> {
    let params: Option<Vec<(Rational, Rational, Rational)>> = m
        .components()
        .map(|(w, mu, s)| Some((Rational::from_float(w)?, Rational::from_float(mu)?, Rational::from_float(s)?)))
        .collect();
    let params = params?;
    let moments: Vec<Rational> = (1..=order)
        .map(|k| {
            params.iter().fold(Rational::zero(), |acc, (w, mu, s)| {
                let mut term = Rational::zero();
                for i in (0..=k).step_by(2) {
                    let binom = Rational::from_integer(factorial(k as u32) / (factorial(i as u32) * factorial((k - i) as u32)));
                    let df = Rational::from_integer(double_factorial_odd(i as u32 / 2));
                    term += binom * mu.powi((k - i) as u32) * s.powi(i as u32) * df;
                }
                acc + w * term
            })
        })
        .collect();
    (moments[0].is_zero() && moments[1] == Rational::from_i64(1)).then_some(moments)
}

fn check_moment_order(order: usize) -> Result<()> {
    if !(2..=MAX_ORDER).contains(&order) {
        return Err(Error::Unsupported(format!("moment order must lie in 2..={MAX_ORDER}, got {order}")));
    }
    Ok(())
}

fn gamma_cumulant_f64(alpha: f64, k: usize) -> f64 {
    if k == 1 {
        return 0.0;
    }
    let fact: f64 = (1..k).map(|i| i as f64).product();
    fact * alpha.powf(1.0 - k as f64 / 2.0)
}

/// `E(μ + σZ)^k`.
fn shifted_normal_moment(k: usize, mu: f64, s: f64) -> f64 {
    let binom = binomial_row(k);
    (0..=k)
        .step_by(2)
        .map(|i| {
            let df: f64 = (1..i).step_by(2).map(|v| v as f64).product();
            binom[i] * mu.powi((k - i) as i32) * s.powi(i as i32) * df
        })
        .sum()
}

/// Exact square root of `x` if `x` is the square of a rational.
fn rational_sqrt(x: f64) -> Option<Rational> {
    let q = Rational::from_float(x)?;
    let (num, den) = (q.numer().clone(), q.denom().clone());
    let rn = num.sqrt();
    let rd = den.sqrt();
    if &rn * &rn == num && &rd * &rd == den {
        Some(Rational::new(rn, rd))
    } else {
        None
    }
}

/// Value of `f(t/√n)^n`, with a flag set when the argument could not be
/// continued through a zero of `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoweredCf {
    pub value: Complex64,
    pub fallback: bool,
}

/// `f(t/√n)^n` at a single point. For integer `n` the value
/// `|f|^n e^{inθ}` does not depend on the branch of `θ`.
pub fn characteristic_power(spec: &DistributionSpec, n: usize, t: f64) -> Result<PoweredCf> {
    if n == 0 {
        return Err(Error::Unsupported("sum order must be at least 1".into()));
    }
    let f = spec.characteristic(t / (n as f64).sqrt());
    let modulus = f.norm();
    if modulus == 0.0 {
        return Ok(PoweredCf { value: f.powi(n as i32), fallback: true });
    }
    Ok(PoweredCf { value: Complex64::from_polar(modulus.powi(n as i32), n as f64 * f.arg()), fallback: false })
}

/// `f(t/√n)^n` along a non-decreasing sweep of `t ≥ 0`, with the argument
/// of `f` unwrapped continuously from `θ(0) = 0`.
pub fn characteristic_power_sweep(spec: &DistributionSpec, n: usize, ts: &[f64]) -> Result<Vec<PoweredCf>> {
    if n == 0 {
        return Err(Error::Unsupported("sum order must be at least 1".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut theta = 0.0;
    let mut last_arg = 0.0;
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        let f = spec.characteristic(t * scale);
        let modulus = f.norm();
        if modulus == 0.0 {
            out.push(PoweredCf { value: f.powi(n as i32), fallback: true });
            continue;
        }
        let arg = f.arg();
        let mut d = arg - last_arg;
        d -= 2.0 * PI * (d / (2.0 * PI)).round();
        theta += d;
        last_arg = arg;
        let value = Complex64::from_polar(modulus.powi(n as i32), n as f64 * theta);
        out.push(PoweredCf { value, fallback: false });
    }
    Ok(out)
}

/// Inversion grid settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    /// Number of samples; a power of two.
    pub points: usize,
    /// The grid spans `[-half_width, half_width)`.
    pub half_width: f64,
    /// Negative samples above `-negative_tolerance` are clipped to zero.
    pub negative_tolerance: f64,
    pub max_mass_defect: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams { points: 1 << 17, half_width: 16.0, negative_tolerance: 1e-8, max_mass_defect: 1e-6 }
    }
}

impl GridParams {
    pub fn validate(&self) -> Result<()> {
        if self.points < 64 || !self.points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("points must be a power of two ≥ 64, got {}", self.points)));
        }
        if !(self.half_width.is_finite() && self.half_width >= 6.0) {
            return Err(Error::InvalidGrid(format!(
                "half width {} does not cover 12 standard deviations",
                self.half_width
            )));
        }
        if !(self.negative_tolerance >= 0.0 && self.max_mass_defect > 0.0) {
            return Err(Error::InvalidGrid("tolerances must be non-negative".into()));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Largest frequency represented by the grid.
    pub fn max_frequency(&self) -> f64 {
        PI / self.step()
    }
}

/// Samples `p(x0 + k h)` of a density.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    x0: f64,
    h: f64,
    values: Vec<f64>,
    n: usize,
    mass_defect: f64,
    min_value: f64,
}

impl DensityGrid {
    /// Wraps given samples; `mass_defect` is measured, negatives are kept.
    pub fn new(x0: f64, h: f64, values: Vec<f64>, n: usize) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) || values.len() < 3 {
            return Err(Error::InvalidGrid("need h > 0 and at least three samples".into()));
        }
        let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mass_defect = (1.0 - simpson(&values, h)).abs();
        Ok(DensityGrid { x0, h, values, n, mass_defect, min_value })
    }

    /// Samples the base density directly (`n = 1`), without inversion.
    pub fn sample(spec: &DistributionSpec, params: &GridParams) -> Result<Self> {
        params.validate()?;
        let h = params.step();
        let x0 = -params.half_width;
        let values = (0..params.points).map(|k| spec.density(x0 + k as f64 * h)).collect();
        DensityGrid::new(x0, h, values, 1)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mass_defect(&self) -> f64 {
        self.mass_defect
    }

    /// Most negative sample before clipping.
    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.h
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(k, &p)| (self.x(k), p))
    }

    /// CSV with header `x,p_n`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,p_n")?;
        for (x, p) in self.points() {
            writeln!(w, "{x:.16e},{p:.16e}")?;
        }
        Ok(())
    }
}

/// `(1/π) C^n n^{nd/2} T^{1-nd} / (nd - 1)`: bound on the inversion error
/// caused by discarding frequencies above `T`.
pub fn truncation_error_bound(spec: &DistributionSpec, n: usize, t_max: f64) -> f64 {
    let Some(DecayBound { constant, exponent }) = spec.decay_bound() else {
        return 0.0;
    };
    let nd = n as f64 * exponent;
    if nd <= 1.0 {
        return f64::INFINITY;
    }
    let n = n as f64;
    let log = n * constant.ln() + 0.5 * nd * n.ln() + (1.0 - nd) * t_max.ln() - (nd - 1.0).ln() - PI.ln();
    log.exp()
}

/// Density of `Z_n` on the grid described by `params`.
///
/// Negative samples are tolerated down to the larger of
/// `params.negative_tolerance` and [`truncation_error_bound`].
pub fn density_of_normalized_sum(spec: &DistributionSpec, n: usize, params: &GridParams) -> Result<DensityGrid> {
    params.validate()?;
    let n_min = spec.min_sum_order();
    if n < n_min {
        return Err(Error::BelowMinimumOrder { n, n_min });
    }
    let points = params.points;
    let h = params.step();
    let x0 = -params.half_width;
    let dt = PI / params.half_width;
    let half = points / 2;

    let ts: Vec<f64> = (0..=half).map(|j| j as f64 * dt).collect();
    let fs = characteristic_power_sweep(spec, n, &ts)?;
    let shift = |t: f64| Complex64::from_polar(1.0, -t * x0);

    let mut buf = vec![Complex64::zero(); points];
    for j in 0..half {
        buf[j] = fs[j].value * shift(ts[j]);
    }
    for j in 1..half {
        buf[points - j] = fs[j].value.conj() * shift(-ts[j]);
    }
    // Nyquist column shared by ±T
    buf[half] = Complex64::new((fs[half].value * shift(ts[half])).re, 0.0);

    let fft = FftPlanner::new().plan_fft_forward(points);
    fft.process(&mut buf);

    let scale = dt / (2.0 * PI);
    let mut values: Vec<f64> = buf.iter().map(|z| z.re * scale).collect();
    let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tolerance = params
        .negative_tolerance
        .max(truncation_error_bound(spec, n, params.max_frequency()));
    if min_value < -tolerance {
        let k = values.iter().position(|&v| v == min_value).unwrap_or(0);
        return Err(Error::NegativeDensity { x: x0 + k as f64 * h, value: min_value, tolerance });
    }
    for v in values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let mass_defect = (1.0 - simpson(&values, h)).abs();
    if mass_defect >= params.max_mass_defect {
        return Err(Error::GridUnderResolved(mass_defect));
    }
    Ok(DensityGrid { x0, h, values, n, mass_defect, min_value })
}

/// Composite Simpson rule; an even sample count closes with a trapezoid.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let len = values.len();
    if len < 2 {
        return 0.0;
    }
    if len == 2 {
        return 0.5 * h * (values[0] + values[1]);
    }
    let (body, tail) = if len % 2 == 1 { (len, 0.0) } else { (len - 1, 0.5 * h * (values[len - 2] + values[len - 1])) };
    let mut s = values[0] + values[body - 1];
    for (k, v) in values[1..body - 1].iter().enumerate() {
        s += if k % 2 == 0 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0 + tail
}

fn simpson_map(g: &DensityGrid, f: impl Fn(f64, f64) -> f64) -> f64 {
    let vals: Vec<f64> = g.points().map(|(x, p)| f(x, p)).collect();
    simpson(&vals, g.h)
}

/// `∫ p^r`.
pub fn lr_integral(g: &DensityGrid, r: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::InvalidIndex(r));
    }
    Ok(simpson_map(g, |_, p| if p > 0.0 { p.powf(r) } else { 0.0 }))
}

/// `h_r = -log(∫ p^r)/(r - 1)` for `r > 1`.
pub fn renyi_entropy(g: &DensityGrid, r: f64) -> Result<f64> {
    if !(r.is_finite() && r > 1.0) {
        return Err(Error::InvalidIndex(r));
    }
    let i = lr_integral(g, r)?;
    if !(i > 0.0) {
        return Err(Error::NonPositiveIntegral(i));
    }
    Ok(-i.ln() / (r - 1.0))
}

/// `N_r = e^{2 h_r}`.
pub fn entropy_power(g: &DensityGrid, r: f64) -> Result<f64> {
    Ok((2.0 * renyi_entropy(g, r)?).exp())
}

/// `N_∞ = ‖p‖_∞^{-2}`.
pub fn entropy_power_inf(g: &DensityGrid) -> Result<f64> {
    let s = sup_norm(g);
    if !(s > 0.0) {
        return Err(Error::NonPositiveIntegral(s));
    }
    Ok(s.powi(-2))
}

/// `-∫ p log p`.
pub fn shannon_entropy(g: &DensityGrid) -> f64 {
    -simpson_map(g, |_, p| if p > 0.0 { p * p.ln() } else { 0.0 })
}

/// `∫ p log(p/φ)`.
pub fn kl_to_gaussian(g: &DensityGrid) -> f64 {
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    simpson_map(g, |x, p| if p > 0.0 { p * (p.ln() + half_ln_2pi + 0.5 * x * x) } else { 0.0 })
}

/// Grid maximum refined by a parabola through the argmax and its neighbours.
pub fn sup_norm(g: &DensityGrid) -> f64 {
    let (k, &top) = g
        .values
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
    if k == 0 || k + 1 == g.values.len() {
        return top;
    }
    let (a, b) = (g.values[k - 1], g.values[k + 1]);
    let curv = a - 2.0 * top + b;
    if curv >= 0.0 || a >= top || b >= top {
        return top;
    }
    top - (b - a) * (b - a) / (8.0 * curv)
}

// 8-point Gauss-Legendre rule on [-1, 1]
const GL_NODES: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

fn gauss_legendre(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let w = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * w;
        let half = 0.5 * w;
        let mut s = 0.0;
        for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            s += wt * (f(mid - half * x) + f(mid + half * x));
        }
        total += s * half;
    }
    total
}

/// Outcome of [`smoothing_diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingReport {
    /// `∫_{|t| ≤ T} |f|^ν` at the last `T`.
    pub integral: f64,
    pub t_max: f64,
    pub converged: bool,
}

pub const SMOOTHING_T_CAP: f64 = 67_108_864.0;

/// `∫_{|t| ≤ T} |f(t)|^ν dt` over doubling `T`. Converged once the increment
/// from `T` to `2T` drops below `1e-8`; gives up when increments stop
/// shrinking or `T` reaches [`SMOOTHING_T_CAP`].
pub fn smoothing_diagnostic(spec: &DistributionSpec, nu: u32) -> Result<SmoothingReport> {
    smoothing_diagnostic_capped(spec, nu, SMOOTHING_T_CAP)
}

pub fn smoothing_diagnostic_capped(spec: &DistributionSpec, nu: u32, t_cap: f64) -> Result<SmoothingReport> {
    if nu == 0 {
        return Err(Error::Unsupported("smoothing exponent must be at least 1".into()));
    }
    let integrand = |t: f64| spec.characteristic(t).norm().powi(nu as i32);
    let mut t = 1.0;
    let mut integral = 2.0 * gauss_legendre(&integrand, 0.0, t, 8);
    let mut previous: Option<f64> = None;
    let mut stalls = 0;
    while t < t_cap {
        let panels = (t.ceil() as usize).max(8);
        let inc = 2.0 * gauss_legendre(&integrand, t, 2.0 * t, panels);
        integral += inc;
        t *= 2.0;
        if inc.abs() < 1e-8 {
            return Ok(SmoothingReport { integral, t_max: t, converged: true });
        }
        if let Some(prev) = previous {
            stalls = if inc >= 0.9 * prev { stalls + 1 } else { 0 };
            if stalls >= 3 && t >= 64.0 {
                break;
            }
        }
        previous = Some(inc);
    }
    Ok(SmoothingReport { integral, t_max: t, converged: false })
}

/// `(1/2π) ∫_{|t| ≤ t_max} |f_n(t)|² dt`, the frequency-side `∫ p_n²`.
pub fn parseval_l2(spec: &DistributionSpec, n: usize, t_max: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Unsupported("sum order must be at least 1".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let integrand = |t: f64| spec.characteristic(t * scale).norm().powi(2 * n as i32);
    let panels = (4.0 * t_max).ceil() as usize;
    Ok(gauss_legendre(&integrand, 0.0, t_max, panels) / PI)
}
