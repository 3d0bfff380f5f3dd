//! Edgeworth corrections of the normal law: the polynomials `Q_k` and `R_k`,
//! the corrected density `φ_m` and distribution function `Φ_m`.

use statrs::function::erf::erfc;

use crate::cumulants::{enumerate_compositions, CumulantVector};
use crate::error::{Error, Result};
use crate::exactpoly::{factorial, hermite_table, Coefficient, Poly};

pub(crate) const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_density(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Shared composition sum of `Q_k` (`shift = 0`) and `R_k` (`shift = 1`):
/// `Σ Π (γ_{i+2}/(i+2)!)^{r_i}/r_i! · H_{k+2j-shift}`.
fn correction_polynomial<T: Coefficient>(k: usize, c: &CumulantVector<T>, shift: usize) -> Result<Poly<T>> {
    if k == 0 {
        return Err(Error::InsufficientOrder { needed: 3, got: c.order() });
    }
    c.require_order(k + 2)?;
    let hermites = hermite_table::<T>(3 * k);
    let mut out = Poly::zero();
    for comp in enumerate_compositions(k) {
        let mut coef = T::one();
        for (i, &r) in comp.parts().iter().enumerate() {
            if r == 0 {
                continue;
            }
            let idx = i + 3;
            let scaled = c.gamma(idx).div(&T::from_bigint(&factorial(idx as u32)));
            coef = coef * scaled.powi(r);
        }
        if coef.is_zero() {
            continue;
        }
        coef = coef.div(&T::from_bigint(&comp.factorial_product()));
        let j = comp.count() as usize;
        out = &out + &hermites[k + 2 * j - shift].scale(&coef);
    }
    Ok(out)
}

/// Density correction polynomial `Q_k`.
pub fn q_polynomial<T: Coefficient>(k: usize, c: &CumulantVector<T>) -> Result<Poly<T>> {
    correction_polynomial(k, c, 0)
}

/// Distribution-function correction polynomial `R_k` (`Q_k` with every
/// `H_{k+2j}` lowered to `H_{k+2j-1}`).
pub fn r_polynomial<T: Coefficient>(k: usize, c: &CumulantVector<T>) -> Result<Poly<T>> {
    correction_polynomial(k, c, 1)
}

/// First nonvanishing correction of an Edgeworth model.
#[derive(Debug, Clone, PartialEq)]
pub enum LeadingTerm {
    /// All of `γ_3..γ_m` vanish.
    Gaussian,
    /// `γ_3 = ... = γ_{k+1} = 0` and `γ_{k+2} ≠ 0`.
    Term { k: usize, gamma_lead: f64 },
}

/// Edgeworth correction of order `m` built from cumulants `γ_1..γ_m`.
#[derive(Debug, Clone)]
pub struct EdgeworthModel<T: Coefficient> {
    order: usize,
    cumulants: CumulantVector<T>,
    q_polys: Vec<Poly<T>>,
    r_polys: Vec<Poly<T>>,
    q_float: Vec<Poly<f64>>,
    r_float: Vec<Poly<f64>>,
}

impl<T: Coefficient> EdgeworthModel<T> {
    pub fn new(order: usize, cumulants: &CumulantVector<T>) -> Result<Self> {
        if order < 2 {
            return Err(Error::InsufficientOrder { needed: 2, got: order });
        }
        cumulants.require_order(order)?;
        let cumulants = cumulants.truncated(order);
        let q_polys = (1..=order - 2)
            .map(|k| q_polynomial(k, &cumulants))
            .collect::<Result<Vec<_>>>()?;
        let r_polys = (1..=order - 2)
            .map(|k| r_polynomial(k, &cumulants))
            .collect::<Result<Vec<_>>>()?;
        let q_float = q_polys.iter().map(Poly::to_f64_poly).collect();
        let r_float = r_polys.iter().map(Poly::to_f64_poly).collect();
        Ok(EdgeworthModel { order, cumulants, q_polys, r_polys, q_float, r_float })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cumulants(&self) -> &CumulantVector<T> {
        &self.cumulants
    }

    /// `[Q_1, ..., Q_{m-2}]`.
    pub fn q_polys(&self) -> &[Poly<T>] {
        &self.q_polys
    }

    /// `[R_1, ..., R_{m-2}]`.
    pub fn r_polys(&self) -> &[Poly<T>] {
        &self.r_polys
    }

    /// `Σ_k Q_k(x) n^{-k/2}`.
    pub fn correction(&self, n: f64, x: f64) -> f64 {
        weighted_sum(&self.q_float, n, x)
    }

    /// `φ_m(x) = φ(x) (1 + Σ Q_k(x) n^{-k/2})`. Signed, never clipped.
    pub fn density(&self, n: f64, x: f64) -> f64 {
        normal_density(x) * (1.0 + self.correction(n, x))
    }

    /// `Φ_m(x) = Φ(x) - φ(x) Σ R_k(x) n^{-k/2}`.
    pub fn cdf(&self, n: f64, x: f64) -> f64 {
        if x.is_infinite() {
            return if x > 0.0 { 1.0 } else { 0.0 };
        }
        normal_cdf(x) - normal_density(x) * weighted_sum(&self.r_float, n, x)
    }

    /// Isolates the first nonvanishing correction term.
    pub fn leading_term(&self) -> LeadingTerm {
        (3..=self.order)
            .find(|&i| !self.cumulants.gamma(i).is_zero())
            .map_or(LeadingTerm::Gaussian, |i| LeadingTerm::Term {
                k: i - 2,
                gamma_lead: self.cumulants.gamma(i).to_f64(),
            })
    }
}

fn weighted_sum(polys: &[Poly<f64>], n: f64, x: f64) -> f64 {
    let u = n.sqrt().recip();
    let mut scale = 1.0;
    let mut acc = 0.0;
    for p in polys {
        scale *= u;
        acc += p.eval(x) * scale;
    }
    acc
}

/// Free-function form of [`EdgeworthModel::density`].
pub fn edgeworth_density<T: Coefficient>(model: &EdgeworthModel<T>, n: usize, x: f64) -> f64 {
    model.density(n as f64, x)
}

/// Free-function form of [`EdgeworthModel::cdf`].
pub fn edgeworth_cdf<T: Coefficient>(model: &EdgeworthModel<T>, n: usize, x: f64) -> f64 {
    model.cdf(n as f64, x)
}

/// Half-width `T_n = sqrt((s - 2) log n)` of the window on which the
/// correction stays positive for large `n`. Diagnostic only.
pub fn positivity_radius(s: f64, n: usize) -> f64 {
    ((s - 2.0).max(0.0) * (n as f64).ln()).sqrt()
}
