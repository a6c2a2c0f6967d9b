//! Run configuration: one TOML file with dotted keys (`model.lambda`,
//! `grid.v.min`, ...), strict schema, optional environment overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use qedft_maps::maps::{linspace, InversionOptions, MapGrid, SweepMode};
use qedft_maps::model::ModelParams;
use qedft_maps::observables::EntropyConvention;
use qedft_maps::solver::SolverOptions;
use serde::{Deserialize, Serialize};

/// Prefix of environment overrides. `QEDFT_MAPS_MODEL__LAMBDA=2` sets
/// `model.lambda`; `__` separates key segments.
pub const ENV_PREFIX: &str = "QEDFT_MAPS_";

/// A configuration problem; the CLI exits with status 1 on these.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(key: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError(format!("invalid value for `{key}`: {reason}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub const fn new(min: f64, max: f64, n: usize) -> Self {
        Self { min, max, n }
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.n)
    }

    fn validate(&self, key: &str) -> Result<(), ConfigError> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(bad(key, "bounds must be finite"));
        }
        if self.n == 0 {
            return Err(bad(&format!("{key}.n"), "need at least one point"));
        }
        if self.n > 1 && self.min >= self.max {
            return Err(bad(key, format!("min ({}) must be below max ({})", self.min, self.max)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub v: Axis,
    /// Defaults to `[−50, 50]` for `λ ≤ 0.1` and `[−5, 5]` otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<Axis>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            v: Axis::new(-5.0, 5.0, 101),
            j: None,
        }
    }
}

impl GridConfig {
    pub fn j_axis(&self, lambda: f64) -> Axis {
        self.j.unwrap_or(if lambda <= 0.1 {
            Axis::new(-50.0, 50.0, 101)
        } else {
            Axis::new(-5.0, 5.0, 101)
        })
    }

    pub fn build(&self, lambda: f64) -> Result<MapGrid, ConfigError> {
        MapGrid::new(self.v.values(), self.j_axis(lambda).values()).map_err(|e| bad("grid", e))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservablesConfig {
    /// Emit the correlation entropy with the opposite (non-positive) sign.
    pub paper_sign_entropy: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub mode: SweepMode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { mode: SweepMode::Exact }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareConfig {
    pub plateau_level: f64,
    pub plateau_half_width: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            plateau_level: 0.0,
            plateau_half_width: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct XcConfig {
    /// Defaults to 41 points over `±0.95` of the largest dipole.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Axis>,
    pub q: Axis,
    /// Displacement of the one-dimensional cut file.
    pub cut_q: f64,
}

impl Default for XcConfig {
    fn default() -> Self {
        Self {
            d: None,
            q: Axis::new(-1.0, 1.0, 5),
            cut_q: 0.0,
        }
    }
}

impl XcConfig {
    pub fn d_axis(&self, p: &ModelParams) -> Axis {
        let m = 0.95 * p.max_dipole();
        self.d.unwrap_or(Axis::new(-m, m, 41))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InvertConfig {
    /// Target dipoles; paired element-wise with `q`.
    pub d: Vec<f64>,
    pub q: Vec<f64>,
}

impl InvertConfig {
    pub fn require_targets(&self) -> Result<(), ConfigError> {
        if self.d.is_empty() {
            return Err(bad("invert.d", "`invert` needs at least one (d, q) target"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolarizabilityConfig {
    pub v: Axis,
    /// Peaks lower than this fraction of the largest `|α|` are dropped.
    pub peak_threshold: f64,
    pub mode: SweepMode,
}

impl Default for PolarizabilityConfig {
    fn default() -> Self {
        Self {
            v: Axis::new(-5.0, 5.0, 201),
            peak_threshold: 0.2,
            mode: SweepMode::Exact,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub emit_plots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub observables: ObservablesConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub mf_compare: CompareConfig,
    #[serde(default)]
    pub inversion: InversionOptions,
    #[serde(default)]
    pub invert: InvertConfig,
    #[serde(default)]
    pub xc: XcConfig,
    #[serde(default)]
    pub polarizability: PolarizabilityConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn entropy(&self) -> EntropyConvention {
        EntropyConvention {
            paper_sign: self.observables.paper_sign_entropy,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model.validate().map_err(|e| ConfigError(format!("invalid model: {e}")))?;
        self.solver.validate().map_err(|e| ConfigError(format!("invalid solver options: {e}")))?;
        self.inversion
            .validate()
            .map_err(|e| ConfigError(format!("invalid inversion options: {e}")))?;
        self.grid.v.validate("grid.v")?;
        self.grid.j_axis(self.model.lambda).validate("grid.j")?;
        if let Some(d) = &self.xc.d {
            d.validate("xc.d")?;
        }
        self.xc.q.validate("xc.q")?;
        if !self.xc.cut_q.is_finite() {
            return Err(bad("xc.cut_q", "must be finite"));
        }
        self.polarizability.v.validate("polarizability.v")?;
        if self.polarizability.v.n < 3 {
            return Err(bad("polarizability.v.n", "need at least 3 points"));
        }
        if !(0.0..=1.0).contains(&self.polarizability.peak_threshold) {
            return Err(bad("polarizability.peak_threshold", "must lie in [0, 1]"));
        }
        if !(self.mf_compare.plateau_half_width > 0.0) {
            return Err(bad("mf_compare.plateau_half_width", "must be positive"));
        }
        if self.invert.d.len() != self.invert.q.len() {
            return Err(bad(
                "invert",
                format!("`d` has {} targets but `q` has {}", self.invert.d.len(), self.invert.q.len()),
            ));
        }
        Ok(())
    }
}

fn override_value(raw: &str) -> toml::Value {
    match format!("x = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("x").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies `(key path, raw value)` overrides to a parsed document.
fn apply_overrides(doc: &mut toml::Table, overrides: &[(Vec<String>, String)]) -> Result<(), ConfigError> {
    for (path, raw) in overrides {
        let dotted = path.join(".");
        let (last, parents) = path.split_last().ok_or_else(|| ConfigError("empty override key".into()))?;
        let mut table = &mut *doc;
        for seg in parents {
            let entry = table
                .entry(seg.clone())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            table = entry
                .as_table_mut()
                .ok_or_else(|| ConfigError(format!("override `{dotted}`: `{seg}` is not a table")))?;
        }
        table.insert(last.clone(), override_value(raw));
    }
    Ok(())
}

/// `QEDFT_MAPS_*` variables as key paths, sorted for reproducibility.
pub fn env_overrides() -> Vec<(Vec<String>, String)> {
    let mut out: Vec<(Vec<String>, String)> = std::env::vars()
        .filter_map(|(k, v)| {
            let rest = k.strip_prefix(ENV_PREFIX)?;
            let path: Vec<String> = rest.split("__").map(|s| s.to_ascii_lowercase()).collect();
            Some((path, v))
        })
        .collect();
    out.sort();
    out
}

/// Parses and validates a configuration document.
pub fn parse(text: &str, overrides: &[(Vec<String>, String)]) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = if overrides.is_empty() {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?
    } else {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError(e.to_string()))?;
        apply_overrides(&mut doc, overrides)?;
        let merged = toml::to_string(&doc).map_err(|e| ConfigError(e.to_string()))?;
        toml::from_str(&merged).map_err(|e| ConfigError(format!("after environment overrides: {e}")))?
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load(path: &Path, overrides: &[(Vec<String>, String)]) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    parse(&text, overrides).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[model]\nn_sites = 2\nn_up = 1\nn_down = 0\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse(MINIMAL, &[]).unwrap();
        assert_eq!(c.grid.v.n, 101);
        assert_eq!(c.grid.j_axis(0.0).max, 50.0);
        assert_eq!(c.polarizability.v.n, 201);
        assert!(c.solver.auto_cutoff);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse(&format!("{MINIMAL}lamda = 1.0\n"), &[]).unwrap_err();
        assert!(err.0.contains("lamda"), "{err}");
        assert!(err.0.contains("line"), "{err}");
        let err = parse(&format!("{MINIMAL}[grid.v]\nmin = 0\nmax = 1\nn = 3\nstep = 2\n"), &[]).unwrap_err();
        assert!(err.0.contains("step"), "{err}");
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let ov = vec![
            (vec!["model".to_string(), "lambda".to_string()], "2.5".to_string()),
            (vec!["sweep".to_string(), "mode".to_string()], "mean-field".to_string()),
        ];
        let c = parse(MINIMAL, &ov).unwrap();
        assert_eq!(c.model.lambda, 2.5);
        assert_eq!(c.sweep.mode, SweepMode::MeanField);
    }

    #[test]
    fn unknown_override_is_rejected() {
        let ov = vec![(vec!["model".to_string(), "lamda".to_string()], "1".to_string())];
        assert!(parse(MINIMAL, &ov).unwrap_err().0.contains("lamda"));
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let err = parse(&format!("{MINIMAL}[grid.v]\nmin = 1\nmax = 0\nn = 3\n"), &[]).unwrap_err();
        assert!(err.0.contains("grid.v"), "{err}");
        let err = parse(&format!("{MINIMAL}[invert]\nd = [0.1]\n"), &[]).unwrap_err();
        assert!(err.0.contains("invert"), "{err}");
    }
}
