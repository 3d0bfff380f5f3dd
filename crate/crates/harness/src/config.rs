use std::fs;
use std::path::{Path, PathBuf};

use edgeworth_renyi::numerics::TabulatedDensity;
use edgeworth_renyi::{DistributionSpec, GridParams, RenyiIndex};
use serde::Deserialize;

use crate::HarnessError;

/// Largest `n` the harness accepts.
pub const MAX_N: usize = 1024;

/// Documentation of every configuration key, shown by `--help`.
pub const CONFIG_HELP: &str = "\
CONFIG FILE (flat JSON object, unknown keys are rejected):
  distribution       \"uniform\" | \"gamma\" | \"two_sided_exponential\" | \"gaussian\"
                     | \"gaussian_mixture\" | \"grid_density\"            (required)
  alpha              Gamma shape, required for \"gamma\"
  mixture_weights    mixture weights, required for \"gaussian_mixture\"
  mixture_means      mixture means (weighted mean must be 0)
  mixture_sigmas     mixture standard deviations (total variance must be 1)
  grid_density_path  CSV with columns x,p on an equally spaced grid, required
                     for \"grid_density\"; the samples are standardized
  r_values           Renyi orders: numbers > 1, 1 (Shannon) or \"inf\"   (default [2])
  n_values           strictly increasing summand counts, 1..=1024       (required)
  moment_order       number of finite moments s, 2 <= s <= 8            (default 6)
  edgeworth_order    order m of the Edgeworth density for locallimit,
                     2 <= m <= 6                                         (default 4)
  grid_points        inversion grid size, a power of two               (default 131072)
  grid_half_width    grid covers [-w, w), w >= 6                        (default 16)
  output             CSV path used when --out is not given             (default stdout)

EXIT CODES: 0 success, 2 configuration error, 3 numerical failure";

/// Renyi order as written in the config: a number or the string `\"inf\"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RValue {
    Number(f64),
    Text(String),
}

/// Raw configuration document.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub distribution: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub mixture_weights: Option<Vec<f64>>,
    #[serde(default)]
    pub mixture_means: Option<Vec<f64>>,
    #[serde(default)]
    pub mixture_sigmas: Option<Vec<f64>>,
    #[serde(default)]
    pub grid_density_path: Option<PathBuf>,
    #[serde(default)]
    pub r_values: Option<Vec<RValue>>,
    pub n_values: Vec<usize>,
    #[serde(default)]
    pub moment_order: Option<f64>,
    #[serde(default)]
    pub edgeworth_order: Option<usize>,
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default)]
    pub grid_half_width: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Validated experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: DistributionSpec,
    pub indices: Vec<RenyiIndex>,
    pub n_values: Vec<usize>,
    pub moment_order: f64,
    pub edgeworth_order: usize,
    pub grid: GridParams,
    pub output: Option<PathBuf>,
}

impl Experiment {
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_json(&text, base)
    }

    /// Parses a config; relative `grid_density_path` values resolve against `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<Self, HarnessError> {
        let raw: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("invalid config: {e}")))?;
        raw.validate(base)
    }

    /// Integer moment order used to size the expansions.
    pub fn moment_count(&self) -> usize {
        self.moment_order.floor() as usize
    }
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn validate(self, base: &Path) -> Result<Experiment, HarnessError> {
        let spec = self.spec(base)?;

        if self.n_values.is_empty() {
            return Err(config_err("n_values must not be empty"));
        }
        if self.n_values.iter().any(|&n| n == 0 || n > MAX_N) {
            return Err(config_err(format!("n_values must lie in 1..={MAX_N}")));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err("n_values must be strictly increasing"));
        }

        let n_min = spec.min_sum_order();
        for &n in &self.n_values {
            let unbounded_base = matches!(spec, DistributionSpec::StandardizedGamma { alpha } if alpha < 1.0);
            if (n > 1 && n < n_min) || (n == 1 && unbounded_base) {
                return Err(config_err(format!(
                    "n = {n} is below the smallest sum order {n_min} with a bounded density for {}",
                    spec.name()
                )));
            }
        }

        let raw_r = self.r_values.clone().unwrap_or_else(|| vec![RValue::Number(2.0)]);
        if raw_r.is_empty() {
            return Err(config_err("r_values must not be empty"));
        }
        let indices = raw_r.iter().map(parse_r).collect::<Result<Vec<_>, _>>()?;

        let moment_order = self.moment_order.unwrap_or(6.0);
        if !(2.0..=8.0).contains(&moment_order) {
            return Err(config_err(format!("moment_order must lie in [2, 8], got {moment_order}")));
        }
        let edgeworth_order = self.edgeworth_order.unwrap_or(4);
        if !(2..=6).contains(&edgeworth_order) {
            return Err(config_err(format!("edgeworth_order must lie in 2..=6, got {edgeworth_order}")));
        }

        let defaults = GridParams::default();
        let grid = GridParams {
            points: self.grid_points.unwrap_or(defaults.points),
            half_width: self.grid_half_width.unwrap_or(defaults.half_width),
            ..defaults
        };
        grid.validate().map_err(|e| config_err(e.to_string()))?;

        Ok(Experiment {
            spec,
            indices,
            n_values: self.n_values,
            moment_order,
            edgeworth_order,
            grid,
            output: self.output,
        })
    }

    fn spec(&self, base: &Path) -> Result<DistributionSpec, HarnessError> {
        let name = self.distribution.as_str();
        let mixture = self.mixture_weights.is_some() || self.mixture_means.is_some() || self.mixture_sigmas.is_some();
        if self.alpha.is_some() && name != "gamma" {
            return Err(config_err(format!("alpha is not used by distribution {name:?}")));
        }
        if mixture && name != "gaussian_mixture" {
            return Err(config_err(format!("mixture_* keys are not used by distribution {name:?}")));
        }
        if self.grid_density_path.is_some() && name != "grid_density" {
            return Err(config_err(format!("grid_density_path is not used by distribution {name:?}")));
        }
        let spec = match name {
            "uniform" => DistributionSpec::Uniform,
            "two_sided_exponential" => DistributionSpec::TwoSidedExponential,
            "gaussian" => DistributionSpec::standard_normal(),
            "gamma" => {
                let alpha = self.alpha.ok_or_else(|| config_err("gamma requires alpha"))?;
                DistributionSpec::standardized_gamma(alpha).map_err(|e| config_err(e.to_string()))?
            }
            "gaussian_mixture" => {
                let (Some(w), Some(m), Some(s)) = (&self.mixture_weights, &self.mixture_means, &self.mixture_sigmas)
                else {
                    return Err(config_err("gaussian_mixture requires mixture_weights, mixture_means and mixture_sigmas"));
                };
                DistributionSpec::gaussian_mixture(w.clone(), m.clone(), s.clone())
                    .map_err(|e| config_err(e.to_string()))?
            }
            "grid_density" => {
                let rel = self.grid_density_path.as_ref().ok_or_else(|| config_err("grid_density requires grid_density_path"))?;
                let path = if rel.is_absolute() { rel.clone() } else { base.join(rel) };
                DistributionSpec::GridDensity(read_tabulated(&path)?)
            }
            other => return Err(config_err(format!("unknown distribution {other:?}"))),
        };
        Ok(spec)
    }
}

fn parse_r(v: &RValue) -> Result<RenyiIndex, HarnessError> {
    match v {
        RValue::Text(t) if t == "inf" => Ok(RenyiIndex::Infinite),
        RValue::Text(t) => Err(config_err(format!("r value {t:?} is neither a number nor \"inf\""))),
        RValue::Number(r) if *r == 1.0 => Ok(RenyiIndex::Shannon),
        RValue::Number(r) if r.is_finite() && *r > 1.0 => Ok(RenyiIndex::Finite(*r)),
        RValue::Number(r) => Err(config_err(format!("r values must be 1, > 1 or \"inf\", got {r}"))),
    }
}

fn read_tabulated(path: &Path) -> Result<TabulatedDensity, HarnessError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let mut xs = Vec::new();
    let mut ps = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let field = |i: usize| -> Result<f64, HarnessError> {
            record
                .get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| config_err(format!("{}: malformed row {:?}", path.display(), record)))
        };
        xs.push(field(0)?);
        ps.push(field(1)?);
    }
    if xs.len() < 2 {
        return Err(config_err(format!("{}: need at least two rows", path.display())));
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    if xs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0)) {
        return Err(config_err(format!("{}: x values must be equally spaced", path.display())));
    }
    TabulatedDensity::standardize(xs[0], h, ps).map_err(|e| config_err(e.to_string()))
}
