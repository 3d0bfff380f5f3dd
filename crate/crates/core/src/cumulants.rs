//! Moment and cumulant sequences of a standardized law, converted through the
//! partition (composition) formula.

use crate::error::{Error, Result};
use crate::exactpoly::{factorial, Coefficient, Rational};
use crate::numerics::DistributionSpec;

/// Highest order tracked for the built-in laws.
pub const MAX_ORDER: usize = 8;

/// A tuple `(r_1, ..., r_k)` of non-negative integers with
/// `r_1 + 2 r_2 + ... + k r_k = k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Composition {
    parts: Vec<u32>,
}

impl Composition {
    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// `r_1 + ... + r_k`.
    pub fn count(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// `r_1 + 2 r_2 + ... + k r_k`.
    pub fn weight(&self) -> u32 {
        self.parts
            .iter()
            .enumerate()
            .map(|(i, r)| (i as u32 + 1) * r)
            .sum()
    }

    /// `r_1! r_2! ... r_k!`.
    pub fn factorial_product(&self) -> num_bigint::BigInt {
        self.parts.iter().map(|&r| factorial(r)).product()
    }
}

/// All solutions of `r_1 + 2 r_2 + ... + k r_k = k`, in ascending
/// lexicographic order on `(r_1, ..., r_k)`.
pub fn enumerate_compositions(k: usize) -> Vec<Composition> {
    fn fill(pos: usize, k: usize, remaining: usize, cur: &mut Vec<u32>, out: &mut Vec<Composition>) {
        let part = pos + 1;
        if pos + 1 == k {
            if remaining.is_multiple_of(part) {
                cur.push((remaining / part) as u32);
                out.push(Composition { parts: cur.clone() });
                cur.pop();
            }
            return;
        }
        for r in 0..=remaining / part {
            cur.push(r as u32);
            fill(pos + 1, k, remaining - r * part, cur, out);
            cur.pop();
        }
    }

    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    fill(0, k, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Moments `α_1, ..., α_m` (with `α_k = E X^k`) of a standardized law.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector<T> {
    alpha: Vec<T>,
}

impl<T: Coefficient> MomentVector<T> {
    /// Validates `m ≥ 2`, `α_1 = 0` and `α_2 = 1`.
    pub fn new(alpha: Vec<T>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::InsufficientMoments { needed: 2, got: alpha.len() });
        }
        if !alpha[0].close_to(&T::zero()) || !alpha[1].close_to(&T::one()) {
            return Err(Error::NotStandardized(format!(
                "alpha_1 = {:?}, alpha_2 = {:?}",
                alpha[0], alpha[1]
            )));
        }
        Ok(MomentVector { alpha })
    }

    pub fn order(&self) -> usize {
        self.alpha.len()
    }

    /// `α_k` for `1 ≤ k ≤ order`.
    pub fn alpha(&self, k: usize) -> &T {
        &self.alpha[k - 1]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.alpha
    }
}

/// Cumulants `γ_1, ..., γ_m` of a standardized law (`γ_1 = 0`, `γ_2 = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantVector<T> {
    gamma: Vec<T>,
}

impl<T: Coefficient> CumulantVector<T> {
    /// Validates `m ≥ 2`, `γ_1 = 0` and `γ_2 = 1`.
    pub fn new(gamma: Vec<T>) -> Result<Self> {
        if gamma.len() < 2 {
            return Err(Error::InsufficientOrder { needed: 2, got: gamma.len() });
        }
        if !gamma[0].close_to(&T::zero()) || !gamma[1].close_to(&T::one()) {
            return Err(Error::NotStandardized(format!(
                "gamma_1 = {:?}, gamma_2 = {:?}",
                gamma[0], gamma[1]
            )));
        }
        Ok(CumulantVector { gamma })
    }

    /// Builds `(0, 1, γ_3, γ_4, ...)` from the higher cumulants.
    pub fn from_higher(higher: Vec<T>) -> Self {
        let mut gamma = vec![T::zero(), T::one()];
        gamma.extend(higher);
        CumulantVector { gamma }
    }

    /// Cumulants of the standard normal law up to `order`.
    pub fn gaussian(order: usize) -> Self {
        Self::from_higher(vec![T::zero(); order.saturating_sub(2)])
    }

    pub fn order(&self) -> usize {
        self.gamma.len()
    }

    /// `γ_k` for `1 ≤ k ≤ order`.
    pub fn gamma(&self, k: usize) -> &T {
        &self.gamma[k - 1]
    }

    /// `γ_k`, or zero past the stored order.
    pub fn gamma_or_zero(&self, k: usize) -> T {
        self.gamma.get(k - 1).cloned().unwrap_or_else(T::zero)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.gamma
    }

    pub fn require_order(&self, needed: usize) -> Result<()> {
        if self.order() < needed {
            Err(Error::InsufficientOrder { needed, got: self.order() })
        } else {
            Ok(())
        }
    }

    /// Keeps `γ_1..γ_order`.
    pub fn truncated(&self, order: usize) -> Self {
        CumulantVector {
            gamma: self.gamma.iter().take(order.max(2)).cloned().collect(),
        }
    }

    pub fn to_f64(&self) -> CumulantVector<f64> {
        CumulantVector { gamma: self.gamma.iter().map(|g| g.to_f64()).collect() }
    }

    /// Exact rational copy (floats convert exactly).
    pub fn to_rational(&self) -> CumulantVector<Rational> {
        CumulantVector { gamma: self.gamma.iter().map(|g| g.to_rational()).collect() }
    }

    /// True when `γ_3 = ... = γ_order = 0`.
    pub fn is_gaussian(&self) -> bool {
        self.gamma.iter().skip(2).all(|g| g.is_zero())
    }
}

/// `Π (x_i / i!)^{r_i} / r_i!` over one composition, with `x_i = values[i - 1]`.
fn composition_term<T: Coefficient>(comp: &Composition, values: &[T]) -> T {
    let mut term = T::one();
    for (i, &r) in comp.parts().iter().enumerate() {
        if r == 0 {
            continue;
        }
        let scaled = values[i].div(&T::from_bigint(&factorial(i as u32 + 1)));
        term = term * scaled.powi(r);
    }
    term.div(&T::from_bigint(&comp.factorial_product()))
}

/// `γ_k = k! Σ (-1)^{j-1} (j-1)! Π (α_i/i!)^{r_i}/r_i!`, `j = r_1 + ... + r_k`.
pub fn cumulants_from_moments<T: Coefficient>(m: &MomentVector<T>) -> CumulantVector<T> {
    let alpha = m.as_slice();
    let gamma = (1..=alpha.len())
        .map(|k| {
            let sum = enumerate_compositions(k).iter().fold(T::zero(), |acc, comp| {
                let j = comp.count();
                let mut coef = T::from_bigint(&factorial(j - 1));
                if j % 2 == 0 {
                    coef = -coef;
                }
                acc + coef * composition_term(comp, alpha)
            });
            sum * T::from_bigint(&factorial(k as u32))
        })
        .collect();
    CumulantVector { gamma }
}

/// Inverse map: `α_k = k! Σ Π (γ_i/i!)^{r_i}/r_i!` (complete Bell polynomial).
pub fn moments_from_cumulants<T: Coefficient>(c: &CumulantVector<T>) -> MomentVector<T> {
    let gamma = c.as_slice();
    let alpha = (1..=gamma.len())
        .map(|k| {
            let sum = enumerate_compositions(k)
                .iter()
                .fold(T::zero(), |acc, comp| acc + composition_term(comp, gamma));
            sum * T::from_bigint(&factorial(k as u32))
        })
        .collect();
    MomentVector { alpha }
}

/// Cumulants `γ_1..γ_order` of one of the built-in laws, in floating point.
pub fn standard_cumulants(spec: &DistributionSpec, order: usize) -> Result<CumulantVector<f64>> {
    if let Some(exact) = standard_cumulants_exact(spec, order)? {
        return Ok(exact.to_f64());
    }
    let moments = MomentVector::new(spec.moments(order)?)?;
    Ok(cumulants_from_moments(&moments))
}

/// Exact cumulants when the law has rational moments (uniform, two-sided
/// exponential, Gamma with a rational square-root shape), else `None`.
pub fn standard_cumulants_exact(
    spec: &DistributionSpec,
    order: usize,
) -> Result<Option<CumulantVector<Rational>>> {
    check_order(order)?;
    match spec.exact_moments(order)? {
        Some(alpha) => Ok(Some(cumulants_from_moments(&MomentVector::new(alpha)?))),
        None => Ok(None),
    }
}

fn check_order(order: usize) -> Result<()> {
    if order < 2 {
        return Err(Error::InsufficientMoments { needed: 2, got: order });
    }
    if order > MAX_ORDER {
        return Err(Error::Unsupported(format!(
            "cumulant order {order} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}
