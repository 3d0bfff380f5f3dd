use std::f64::consts::{E, PI};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use edgeworth_renyi::expansion::{gaussian_renyi_entropy, r0};
use edgeworth_renyi::numerics::{entropy_power, entropy_power_inf, renyi_entropy, shannon_entropy, sup_norm};
use edgeworth_renyi::{
    a1_closed_form, a2_via_integrals, b_coefficient, density_of_normalized_sum, entropy_expansion, extremum_series,
    monotonicity_prediction, shannon_expansion, standard_cumulants, standard_cumulants_exact, supnorm_coefficients, CumulantVector,
    DensityGrid, DistributionSpec, EdgeworthModel, Rational, RenyiIndex, Verdict,
};
use rayon::prelude::*;

use crate::config::Experiment;
use crate::HarnessError;

const CUMULANT_ORDER: usize = 8;
/// Relative size below which a forward difference counts as quadrature noise.
const NOISE_FLOOR: f64 = 1e-11;

fn numerical(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Numerical(e.to_string())
}

pub fn fmt_float(v: f64) -> String {
    // adding 0.0 folds -0.0 into 0.0
    format!("{:.16e}", v + 0.0)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

/// Cumulants of the base law, exact where the moments are rational.
pub fn base_cumulants(spec: &DistributionSpec) -> Result<CumulantVector<Rational>, HarnessError> {
    if let Some(exact) = standard_cumulants_exact(spec, CUMULANT_ORDER).map_err(numerical)? {
        return Ok(exact);
    }
    Ok(standard_cumulants(spec, CUMULANT_ORDER).map_err(numerical)?.to_rational())
}

/// Density of `Z_n`; the base density is sampled directly for `n = 1`.
pub fn density_grid(exp: &Experiment, n: usize) -> Result<DensityGrid, HarnessError> {
    let grid = if n == 1 {
        DensityGrid::sample(&exp.spec, &exp.grid)
    } else {
        density_of_normalized_sum(&exp.spec, n, &exp.grid)
    };
    grid.map_err(|e| HarnessError::Numerical(format!("n = {n}: {e}")))
}

fn dump(grid: &DensityGrid, spec: &DistributionSpec, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    let name: String = spec.name().chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    let path = dir.join(format!("density_{name}_n{}.csv", grid.n()));
    let mut w = BufWriter::new(File::create(path)?);
    grid.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn grids(exp: &Experiment, dump_dir: Option<&Path>) -> Result<Vec<DensityGrid>, HarnessError> {
    exp.n_values
        .par_iter()
        .map(|&n| {
            let g = density_grid(exp, n)?;
            if let Some(dir) = dump_dir {
                dump(&g, &exp.spec, dir)?;
            }
            Ok(g)
        })
        .collect()
}

/// `h_r(Z)` for the standard normal law.
pub fn gaussian_entropy(index: RenyiIndex) -> f64 {
    match index {
        RenyiIndex::Shannon => 0.5 * (2.0 * PI * E).ln(),
        RenyiIndex::Infinite => 0.5 * (2.0 * PI).ln(),
        RenyiIndex::Finite(r) => gaussian_renyi_entropy(r).unwrap_or(f64::NAN),
    }
}

/// Measured `(h_r, N_r)` of a grid density.
pub fn measured_entropy(g: &DensityGrid, index: RenyiIndex) -> Result<(f64, f64), HarnessError> {
    let err = |e| HarnessError::Numerical(format!("n = {}: {e}", g.n()));
    match index {
        RenyiIndex::Shannon => {
            let h = shannon_entropy(g);
            Ok((h, (2.0 * h).exp()))
        }
        RenyiIndex::Infinite => Ok((-sup_norm(g).ln(), entropy_power_inf(g).map_err(err)?)),
        RenyiIndex::Finite(r) => Ok((renyi_entropy(g, r).map_err(err)?, entropy_power(g, r).map_err(err)?)),
    }
}

fn index_label(index: RenyiIndex) -> String {
    match index {
        RenyiIndex::Finite(r) => format!("{r}"),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffRow {
    pub index: RenyiIndex,
    pub b: f64,
    pub b1: f64,
    pub a1_integral: Option<f64>,
    pub a2_integral: Option<f64>,
    pub extremum_a1: f64,
    pub extremum_a2: f64,
    pub a_tilde: f64,
    pub b_tilde: f64,
    pub r0: Option<f64>,
    pub verdict: Verdict,
}

pub fn run_coeffs(exp: &Experiment) -> Result<Vec<CoeffRow>, HarnessError> {
    let c = base_cumulants(&exp.spec)?;
    let (ea1, ea2) = extremum_series(&c).map_err(numerical)?;
    let sup = supnorm_coefficients(&c).map_err(numerical)?.to_f64();
    let r0 = r0(&c).map_err(numerical)?;
    exp.indices
        .iter()
        .map(|&index| {
            let b = b_coefficient(index, &c).map_err(numerical)?;
            let (a1_integral, a2_integral) = match index {
                RenyiIndex::Finite(r) => (
                    Some(a1_closed_form(r, &c).map_err(numerical)?),
                    Some(a2_via_integrals(r, &c).map_err(numerical)?),
                ),
                _ => (None, None),
            };
            Ok(CoeffRow {
                index,
                b,
                b1: -b,
                a1_integral,
                a2_integral,
                extremum_a1: edgeworth_renyi::exactpoly::rational_to_f64(&ea1),
                extremum_a2: edgeworth_renyi::exactpoly::rational_to_f64(&ea2),
                a_tilde: sup.a_tilde,
                b_tilde: sup.b_tilde,
                r0,
                verdict: monotonicity_prediction(index, &c).map_err(numerical)?,
            })
        })
        .collect()
}

pub fn write_coeffs<W: Write>(rows: &[CoeffRow], w: W) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["r", "b", "B1", "A1", "A2", "a1", "a2", "A_tilde", "B_tilde", "r0", "verdict"])?;
    for row in rows {
        out.write_record([
            index_label(row.index),
            fmt_float(row.b),
            fmt_float(row.b1),
            fmt_opt(row.a1_integral),
            fmt_opt(row.a2_integral),
            fmt_float(row.extremum_a1),
            fmt_float(row.extremum_a2),
            fmt_float(row.a_tilde),
            fmt_float(row.b_tilde),
            row.r0.map(fmt_float).unwrap_or_else(|| "none".into()),
            row.verdict.as_str().into(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub index: RenyiIndex,
    pub h_numeric: f64,
    pub h_predicted: f64,
    pub residual: f64,
    pub scaled_residual: f64,
    pub n_numeric: f64,
    pub n_predicted: f64,
}

/// Series predictions `(h_r, N_r)` for each index at every `n`.
struct Predictor {
    m: usize,
    shannon: Vec<f64>,
    sup: edgeworth_renyi::SupNormExpansion<f64>,
    finite: Vec<Option<edgeworth_renyi::ExpansionCoefficients>>,
}

impl Predictor {
    fn new(exp: &Experiment, c: &CumulantVector<Rational>) -> Result<Self, HarnessError> {
        let m = exp.moment_count();
        let finite = exp
            .indices
            .iter()
            .map(|index| match index {
                RenyiIndex::Finite(r) => entropy_expansion(m, *r, c).map(Some).map_err(numerical),
                _ => Ok(None),
            })
            .collect::<Result<_, _>>()?;
        Ok(Predictor {
            m,
            shannon: shannon_expansion(m, c).map_err(numerical)?,
            sup: supnorm_coefficients(c).map_err(numerical)?.to_f64(),
            finite,
        })
    }

    fn predict(&self, slot: usize, index: RenyiIndex, n: f64) -> (f64, f64) {
        match index {
            RenyiIndex::Finite(_) => {
                let e = self.finite[slot].as_ref().expect("finite index has an expansion");
                (e.predicted_entropy(n), e.predicted_entropy_power(n))
            }
            RenyiIndex::Shannon => {
                let correction: f64 = self.shannon.iter().enumerate().map(|(j, b)| b * n.powi(-(j as i32 + 1))).sum();
                let h = gaussian_entropy(index) + correction;
                (h, (2.0 * h).exp())
            }
            RenyiIndex::Infinite => {
                let mut s = self.sup.clone();
                if self.m < 6 {
                    s.b = 0.0;
                    s.b_tilde = 0.0;
                }
                if self.m < 4 {
                    s.a = 0.0;
                    s.a_tilde = 0.0;
                }
                (-s.predicted_sup_norm(n).ln(), s.predicted_entropy_power(n))
            }
        }
    }
}

pub fn run_verify(exp: &Experiment, dump_dir: Option<&Path>) -> Result<Vec<ConvergenceRow>, HarnessError> {
    let c = base_cumulants(&exp.spec)?;
    let predictor = Predictor::new(exp, &c)?;
    let scale_exp = (exp.moment_order - 2.0) / 2.0;
    let per_n: Vec<Vec<ConvergenceRow>> = exp
        .n_values
        .par_iter()
        .map(|&n| {
            let g = density_grid(exp, n)?;
            if let Some(dir) = dump_dir {
                dump(&g, &exp.spec, dir)?;
            }
            exp.indices
                .iter()
                .enumerate()
                .map(|(slot, &index)| {
                    let (h_numeric, n_numeric) = measured_entropy(&g, index)?;
                    let (h_predicted, n_predicted) = predictor.predict(slot, index, n as f64);
                    let residual = h_numeric - h_predicted;
                    Ok(ConvergenceRow {
                        n,
                        index,
                        h_numeric,
                        h_predicted,
                        residual,
                        scaled_residual: residual * (n as f64).powf(scale_exp),
                        n_numeric,
                        n_predicted,
                    })
                })
                .collect()
        })
        .collect::<Result<_, HarnessError>>()?;
    Ok(per_n.into_iter().flatten().collect())
}

pub fn write_verify<W: Write>(rows: &[ConvergenceRow], w: W) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "n",
        "r",
        "h_r_numeric",
        "h_r_predicted",
        "residual",
        "scaled_residual",
        "N_r_numeric",
        "N_r_predicted",
    ])?;
    for row in rows {
        out.write_record([
            row.n.to_string(),
            index_label(row.index),
            fmt_float(row.h_numeric),
            fmt_float(row.h_predicted),
            fmt_float(row.residual),
            fmt_float(row.scaled_residual),
            fmt_float(row.n_numeric),
            fmt_float(row.n_predicted),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Two-point extrapolation `2·(2n)Δ(2n) - n·Δ(n)` of `n·(h_r(Z_n) - h_r(Z))`.
#[derive(Debug, Clone, PartialEq)]
pub struct RichardsonLine {
    pub index: RenyiIndex,
    pub n: usize,
    pub estimate: f64,
    pub target: f64,
}

impl RichardsonLine {
    pub fn relative_error(&self) -> f64 {
        if self.target == 0.0 {
            self.estimate.abs()
        } else {
            ((self.estimate - self.target) / self.target).abs()
        }
    }
}

impl std::fmt::Display for RichardsonLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "r={} n={}..{}: extrapolated n*(h_r(Z_n)-h_r(Z)) = {:.8e}, b = {:.8e}, relative error {:.3e}",
            index_label(self.index),
            self.n,
            2 * self.n,
            self.estimate,
            self.target,
            self.relative_error()
        )
    }
}

pub fn richardson_summary(exp: &Experiment, rows: &[ConvergenceRow]) -> Result<Vec<RichardsonLine>, HarnessError> {
    let c = base_cumulants(&exp.spec)?;
    let mut lines = Vec::new();
    for &index in &exp.indices {
        let target = b_coefficient(index, &c).map_err(numerical)?;
        let base = gaussian_entropy(index);
        let scaled = |n: usize| {
            rows.iter()
                .find(|row| row.n == n && row.index == index)
                .map(|row| n as f64 * (row.h_numeric - base))
        };
        for &n in &exp.n_values {
            if let (Some(g1), Some(g2)) = (scaled(n), scaled(2 * n)) {
                lines.push(RichardsonLine { index, n, estimate: 2.0 * g2 - g1, target });
            }
        }
    }
    Ok(lines)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityRow {
    pub index: RenyiIndex,
    pub n: usize,
    pub entropy_power: f64,
    /// `N_r` at the next listed `n` minus `N_r` at this one.
    pub forward_difference: Option<f64>,
    pub sign: Option<char>,
    pub predicted: Verdict,
    /// Start of the trailing run of equal difference signs.
    pub empirical_n0: Option<usize>,
    /// Whether that trailing sign is the one the verdict predicts.
    pub verdict_match: bool,
}

fn expected_sign(v: Verdict) -> char {
    match v {
        Verdict::EventuallyIncreasing => '+',
        Verdict::EventuallyDecreasing => '-',
        Verdict::Indeterminate => '0',
    }
}

pub fn run_monotonicity(exp: &Experiment, dump_dir: Option<&Path>) -> Result<Vec<MonotonicityRow>, HarnessError> {
    let c = base_cumulants(&exp.spec)?;
    let gs = grids(exp, dump_dir)?;
    let mut rows = Vec::new();
    for &index in &exp.indices {
        let predicted = monotonicity_prediction(index, &c).map_err(numerical)?;
        let powers: Vec<f64> = gs
            .iter()
            .map(|g| measured_entropy(g, index).map(|(_, p)| p))
            .collect::<Result<_, _>>()?;
        let signs: Vec<Option<char>> = (0..powers.len())
            .map(|i| {
                powers.get(i + 1).map(|next| {
                    let d = next - powers[i];
                    if d.abs() <= NOISE_FLOOR * powers[i].abs() {
                        '0'
                    } else if d > 0.0 {
                        '+'
                    } else {
                        '-'
                    }
                })
            })
            .collect();
        let diffs = powers.len().saturating_sub(1);
        let tail = if diffs > 0 { signs[diffs - 1] } else { None };
        let mut start = diffs;
        while start > 0 && signs[start - 1] == tail {
            start -= 1;
        }
        let empirical_n0 = tail.map(|_| exp.n_values[start]);
        let verdict_match = tail == Some(expected_sign(predicted));
        for (i, &n) in exp.n_values.iter().enumerate() {
            rows.push(MonotonicityRow {
                index,
                n,
                entropy_power: powers[i],
                forward_difference: powers.get(i + 1).map(|next| next - powers[i]),
                sign: signs[i],
                predicted,
                empirical_n0,
                verdict_match,
            });
        }
    }
    Ok(rows)
}

pub fn write_monotonicity<W: Write>(rows: &[MonotonicityRow], w: W) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "r",
        "n",
        "entropy_power",
        "forward_difference",
        "sign",
        "predicted_verdict",
        "empirical_n0",
        "verdict_match",
    ])?;
    for row in rows {
        out.write_record([
            index_label(row.index),
            row.n.to_string(),
            fmt_float(row.entropy_power),
            fmt_opt(row.forward_difference),
            row.sign.map(String::from).unwrap_or_default(),
            row.predicted.as_str().into(),
            row.empirical_n0.map(|n| n.to_string()).unwrap_or_else(|| "none".into()),
            row.verdict_match.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalLimitRow {
    pub m: usize,
    pub n: usize,
    pub weighted_sup_error: f64,
    pub fitted_slope: Option<f64>,
}

/// `sup_x (1 + |x|^m) |p_n(x) - φ_m(x)|` over the grid points.
pub fn weighted_sup_error(g: &DensityGrid, model: &EdgeworthModel<Rational>, m: usize) -> f64 {
    let n = g.n() as f64;
    g.points()
        .map(|(x, p)| (1.0 + x.abs().powi(m as i32)) * (p - model.density(n, x)).abs())
        .fold(0.0, f64::max)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn run_locallimit(exp: &Experiment, dump_dir: Option<&Path>) -> Result<Vec<LocalLimitRow>, HarnessError> {
    let m = exp.edgeworth_order;
    let c = base_cumulants(&exp.spec)?;
    let model = EdgeworthModel::new(m, &c).map_err(numerical)?;
    let errors: Vec<f64> = exp
        .n_values
        .par_iter()
        .map(|&n| {
            let g = density_grid(exp, n)?;
            if let Some(dir) = dump_dir {
                dump(&g, &exp.spec, dir)?;
            }
            Ok(weighted_sup_error(&g, &model, m))
        })
        .collect::<Result<_, HarnessError>>()?;
    let ns: Vec<f64> = exp.n_values.iter().map(|&n| n as f64).collect();
    let slope = log_log_slope(&ns, &errors);
    Ok(exp
        .n_values
        .iter()
        .zip(errors)
        .map(|(&n, e)| LocalLimitRow { m, n, weighted_sup_error: e, fitted_slope: slope })
        .collect())
}

pub fn write_locallimit<W: Write>(rows: &[LocalLimitRow], w: W) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["m", "n", "weighted_sup_error", "fitted_slope"])?;
    for row in rows {
        out.write_record([
            row.m.to_string(),
            row.n.to_string(),
            fmt_float(row.weighted_sup_error),
            fmt_opt(row.fitted_slope),
        ])?;
    }
    out.flush()?;
    Ok(())
}
