//! Experiment configuration: a flat TOML file that parses losslessly and
//! rejects unknown keys, so a misspelled option can never silently fall back
//! to a default.

use serde::{Deserialize, Serialize};

use maxlorentz::measure::{GridDomain, GridFunction, GridSet, WeightSpec};
use maxlorentz::weight::WeightW;

/// Configuration error split by phase: syntax (with location) versus
/// validation (with the offending key).
#[derive(Debug)]
pub enum ConfigError {
    Parse(String),
    Validation { key: &'static str, message: String },
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Parse(msg) => write!(f, "config parse error: {msg}"),
            ConfigError::Validation { key, message } => {
                write!(f, "config validation error at `{key}`: {message}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { key, message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainConfig,
    pub u: WeightUConfig,
    pub w: WeightWConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assert: Option<AssertConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub dimension: usize,
    pub half_width: f64,
    pub cells: usize,
    /// Refinement levels for multi-level experiments (`equivalence`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase", tag = "kind")]
pub enum WeightUConfig {
    One,
    Power { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum WeightWConfig {
    One,
    Power {
        alpha: f64,
    },
    PiecewiseTail {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        tail_alpha: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Number of equispaced exponents in `(0, p)` for the family search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_points: Option<usize>,
    /// Explicit exponents; overrides `q_points`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tgrid: Option<Vec<f64>>,
    /// Threshold constant for the inclusion check; when absent the run uses
    /// half of the measured pointwise constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opnorm_kind: Option<String>,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            lambdas: None,
            r: None,
            q_points: None,
            qs: None,
            trials: None,
            seed: None,
            tgrid: None,
            c: None,
            opnorm_kind: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase", tag = "kind")]
pub enum FunctionConfig {
    /// Indicator of a union of grid-aligned cubes.
    Indicator { cubes: Vec<Vec<f64>> },
    /// Sum of indicator layers: `value * chi(union of cubes)` each.
    Simple { layers: Vec<LayerConfig> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub value: f64,
    pub cubes: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssertConfig {
    /// Metric the bounds apply to; defaults to the operation's headline
    /// metric.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    /// Expected verdict for the equivalence experiment
    /// (`both-stable`, `both-growing`, `boundary`, `split-anomaly`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
}

/// Parse and validate a config from its textual form.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig =
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    validate(&cfg)?;
    Ok(cfg)
}

/// Canonical textual form; `parse_config(print_config(c)) == c`.
pub fn print_config(cfg: &ExperimentConfig) -> String {
    toml::to_string_pretty(cfg).expect("config serializes")
}

fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let d = &cfg.domain;
    if d.dimension != 1 && d.dimension != 2 {
        return Err(invalid("domain.dimension", "must be 1 or 2"));
    }
    if !(d.half_width > 0.0) || !d.half_width.is_finite() {
        return Err(invalid("domain.half_width", "must be positive and finite"));
    }
    if d.cells == 0 {
        return Err(invalid("domain.cells", "must be at least 1"));
    }
    if let Some(levels) = &d.levels {
        if levels.is_empty() {
            return Err(invalid("domain.levels", "must be nonempty when present"));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("domain.levels", "must increase strictly"));
        }
    }
    if let WeightUConfig::Power { alpha } = cfg.u {
        if !alpha.is_finite() {
            return Err(invalid("u.alpha", "must be finite"));
        }
    }
    match &cfg.w {
        WeightWConfig::One => {}
        WeightWConfig::Power { alpha } => {
            if !(*alpha > -1.0) {
                return Err(invalid("w.alpha", "must exceed -1"));
            }
        }
        WeightWConfig::PiecewiseTail { breakpoints, values, tail_alpha } => {
            WeightW::piecewise_tail(breakpoints.clone(), values.clone(), *tail_alpha)
                .map_err(|e| invalid("w", e.to_string()))?;
        }
    }
    let p = &cfg.params;
    if !(p.p > 0.0) || !p.p.is_finite() {
        return Err(invalid("p", "must be positive and finite"));
    }
    if let Some(lambdas) = &p.lambdas {
        if lambdas.iter().any(|l| !((0.0..1.0).contains(l) && *l > 0.0)) {
            return Err(invalid("lambdas", "every lambda must lie in (0, 1)"));
        }
    }
    if let Some(r) = p.r {
        if !(r > 0.0) {
            return Err(invalid("r", "must be positive"));
        }
    }
    if let Some(qs) = &p.qs {
        if qs.iter().any(|q| !(*q > 0.0)) {
            return Err(invalid("qs", "every q must be positive"));
        }
    }
    if p.q_points == Some(0) {
        return Err(invalid("q_points", "must be at least 1"));
    }
    if p.trials == Some(0) {
        return Err(invalid("trials", "must be at least 1"));
    }
    if let Some(ts) = &p.tgrid {
        if ts.iter().any(|t| !(*t > 0.0)) {
            return Err(invalid("tgrid", "every t must be positive"));
        }
    }
    if let Some(kind) = &p.opnorm_kind {
        if kind != "weak" && kind != "strong" {
            return Err(invalid("opnorm_kind", "must be `weak` or `strong`"));
        }
    }
    if let Some(f) = &cfg.function {
        let cube_lists: Vec<&Vec<Vec<f64>>> = match f {
            FunctionConfig::Indicator { cubes } => vec![cubes],
            FunctionConfig::Simple { layers } => layers.iter().map(|l| &l.cubes).collect(),
        };
        for cubes in cube_lists {
            if cubes.is_empty() {
                return Err(invalid("function.cubes", "need at least one cube"));
            }
            for cube in cubes {
                if cube.len() != cfg.domain.dimension + 1 {
                    return Err(invalid(
                        "function.cubes",
                        "each cube is [corner coords.., side]",
                    ));
                }
                if !(cube[cfg.domain.dimension] > 0.0) {
                    return Err(invalid("function.cubes", "cube side must be positive"));
                }
            }
        }
        if let FunctionConfig::Simple { layers } = f {
            if layers.iter().any(|l| !(l.value > 0.0) || !l.value.is_finite()) {
                return Err(invalid("function.layers", "layer values must be positive"));
            }
        }
    }
    Ok(())
}

// --- materialization -------------------------------------------------------

impl DomainConfig {
    pub fn grid(&self, cells: usize) -> Result<GridDomain<f64>, ConfigError> {
        GridDomain::new(self.dimension, self.half_width, cells)
            .map_err(|e| invalid("domain", e.to_string()))
    }
}

impl WeightUConfig {
    pub fn spec(&self) -> WeightSpec<f64> {
        match *self {
            WeightUConfig::One => WeightSpec::One,
            WeightUConfig::Power { alpha } => WeightSpec::PowerAbs { alpha },
        }
    }
}

impl WeightWConfig {
    pub fn weight(&self) -> WeightW<f64> {
        match self {
            WeightWConfig::One => WeightW::one(),
            WeightWConfig::Power { alpha } => WeightW::power(*alpha).expect("validated"),
            WeightWConfig::PiecewiseTail { breakpoints, values, tail_alpha } => {
                WeightW::piecewise_tail(breakpoints.clone(), values.clone(), *tail_alpha)
                    .expect("validated")
            }
        }
    }
}

/// Snap a coordinate cube `[corner.., side]` to grid cells; rejects cubes
/// that are not grid-aligned at this resolution.
fn snap_cube(
    domain: &GridDomain<f64>,
    cube: &[f64],
) -> Result<maxlorentz::maximal::CubeSpec, ConfigError> {
    let h = domain.cell_size();
    let half = domain.half_width();
    let snap = |coord: f64, what: &'static str| -> Result<i64, ConfigError> {
        let cells = (coord + half) / h;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * cells.abs().max(1.0) {
            return Err(invalid(
                "function.cubes",
                format!("{what} {coord} is not grid-aligned at h={h}"),
            ));
        }
        Ok(rounded as i64)
    };
    let side_cells = {
        let side = cube[cube.len() - 1] / h;
        let rounded = side.round();
        if (side - rounded).abs() > 1e-9 * side.max(1.0) || rounded < 1.0 {
            return Err(invalid(
                "function.cubes",
                format!("side {} is not a positive multiple of h={h}", cube[cube.len() - 1]),
            ));
        }
        rounded as usize
    };
    let corner = match cube.len() {
        2 => [snap(cube[0], "corner")?, 0],
        _ => [snap(cube[0], "corner.x")?, snap(cube[1], "corner.y")?],
    };
    Ok(maxlorentz::maximal::CubeSpec { corner, side_cells })
}

fn cubes_to_set(
    domain: &GridDomain<f64>,
    cubes: &[Vec<f64>],
) -> Result<GridSet<f64>, ConfigError> {
    let mut acc = GridSet::empty(*domain);
    for cube in cubes {
        let spec = snap_cube(domain, cube)?;
        acc = acc.union(&spec.to_set(*domain)).expect("same domain");
    }
    Ok(acc)
}

impl FunctionConfig {
    pub fn materialize(&self, domain: &GridDomain<f64>) -> Result<GridFunction<f64>, ConfigError> {
        match self {
            FunctionConfig::Indicator { cubes } => {
                Ok(GridFunction::indicator(&cubes_to_set(domain, cubes)?))
            }
            FunctionConfig::Simple { layers } => {
                let mut f = GridFunction::zero(*domain);
                for layer in layers {
                    let set = cubes_to_set(domain, &layer.cubes)?;
                    let bump = GridFunction::indicator(&set)
                        .scale(layer.value)
                        .expect("validated value");
                    f = f.add(&bump).expect("same domain");
                }
                Ok(f)
            }
        }
    }

    /// The set for operations that need an indicator argument.
    pub fn indicator_set(&self, domain: &GridDomain<f64>) -> Result<GridSet<f64>, ConfigError> {
        match self {
            FunctionConfig::Indicator { cubes } => cubes_to_set(domain, cubes),
            FunctionConfig::Simple { .. } => Err(invalid(
                "function.kind",
                "this operation needs an indicator function",
            )),
        }
    }
}
