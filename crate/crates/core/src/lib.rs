//! Edgeworth expansions of normalized i.i.d. sums and the resulting
//! asymptotics of Renyi entropies and entropy powers.
//!
//! Symbolic work (Hermite and correction polynomials, cumulant algebra,
//! expansion coefficients) runs in exact rationals; the [`numerics`] module
//! measures the same quantities on densities obtained by Fourier inversion.

pub mod cumulants;
pub mod edgeworth;
pub mod error;
pub mod exactpoly;
pub mod expansion;
pub mod gaussint;
pub mod maxdensity;
pub mod numerics;

pub use cumulants::{
    cumulants_from_moments, moments_from_cumulants, standard_cumulants, standard_cumulants_exact, CumulantVector,
    MomentVector,
};
pub use edgeworth::{edgeworth_cdf, edgeworth_density, q_polynomial, r_polynomial, EdgeworthModel};
pub use error::{Error, Result};
pub use exactpoly::{hermite, Coefficient, Poly, Rational, RationalPoly};
pub use expansion::{
    a1_closed_form, a2_via_integrals, aj_coefficient, b_coefficient, entropy_expansion, monotonicity_prediction,
    shannon_coefficient, shannon_expansion,
    ExpansionCoefficients, RenyiIndex, TruncatedSeries, Verdict,
};
pub use gaussint::{gauss_power_integral, gauss_power_mass, hermite_integral};
pub use numerics::{density_of_normalized_sum, DensityGrid, DistributionSpec, GridParams};
pub use maxdensity::{extremum_series, ninf_expansion, solve_extremum, supnorm_coefficients, SupNormExpansion};
