//! Resolved run configuration: defaults, `key = value` or JSON config files,
//! and command-line overrides (in increasing priority).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::EvolutionSpec;
use crate::extrapolation::ExtrapolationConfig;
use crate::petviashvili::{ProblemSpec, StoppingRule, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::spectral::{DispersionSymbol, Grid};

/// Environment variable that overrides the output directory of a config file.
pub const OUTPUT_DIR_ENV: &str = "FKDV_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub equation: EquationConfig,
    pub domain: DomainConfig,
    pub solver: SolverConfig,
    pub evolution: EvolutionConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationConfig {
    pub p: u32,
    pub symbol: DispersionSymbol,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    /// Half-length of the periodic interval `(−l, l)`.
    pub l: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub c: f64,
    /// Stabilizing exponent; `None` selects `(p+1)/p`.
    pub eps: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    /// Extrapolation width; 0 runs the plain iteration.
    pub mw: usize,
    pub safeguard: bool,
    pub stopping: StoppingRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            equation: EquationConfig {
                p: 1,
                symbol: DispersionSymbol::fractional(2.0),
            },
            domain: DomainConfig { l: 256.0, n: 4096 },
            solver: SolverConfig {
                c: 1.0,
                eps: None,
                tol: DEFAULT_TOL,
                max_iter: DEFAULT_MAX_ITER,
                mw: 6,
                safeguard: true,
                stopping: StoppingRule::default(),
            },
            evolution: EvolutionConfig {
                dt: 0.01,
                t_final: 10.0,
                snapshot_stride: 10,
            },
            output: OutputConfig { directory: None },
        }
    }
}

impl RunConfig {
    /// Reads a config file. A file whose first non-blank character is `{` is
    /// parsed as JSON (the `run.json` echo); anything else as `key = value`
    /// lines layered over the defaults.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            let config: RunConfig = serde_json::from_str(text)?;
            return Ok(config);
        }
        let mut config = RunConfig::default();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: index + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            config
                .set(key.trim(), value.trim())
                .map_err(|message| Error::Parse {
                    line: index + 1,
                    message,
                })?;
        }
        Ok(config)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("invalid value `{value}` for `{key}`"))
        }
        match key {
            "p" => self.equation.p = num(key, value)?,
            "alpha" => self.equation.symbol = DispersionSymbol::fractional(num(key, value)?),
            "gamma" => self.equation.symbol = DispersionSymbol::whitham(num(key, value)?),
            "l" => self.domain.l = num(key, value)?,
            "N" => self.domain.n = num(key, value)?,
            "c" => self.solver.c = num(key, value)?,
            "eps" => self.solver.eps = Some(num(key, value)?),
            "tol" => self.solver.tol = num(key, value)?,
            "max_iter" => self.solver.max_iter = num(key, value)?,
            "mw" => self.solver.mw = num(key, value)?,
            "safeguard" => self.solver.safeguard = num(key, value)?,
            "stopping" => self.solver.stopping = parse_stopping(value)?,
            "dt" => self.evolution.dt = num(key, value)?,
            "t_final" | "tfinal" => self.evolution.t_final = num(key, value)?,
            "snapshot_stride" => self.evolution.snapshot_stride = num(key, value)?,
            "out" | "directory" => self.output.directory = Some(PathBuf::from(value)),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Checks the domain and re-validates the solver and integrator settings.
    pub fn validate(&self) -> Result<()> {
        let n = self.domain.n;
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Contract(format!(
                "N must be a power of two, got {n}"
            )));
        }
        if !(self.domain.l.is_finite() && self.domain.l > 0.0) {
            return Err(Error::Contract(format!(
                "half-length l must be positive, got {}",
                self.domain.l
            )));
        }
        let grid = self.grid()?;
        self.problem_spec(&grid)?;
        if let Some(x) = self.extrapolation() {
            x.validate()?;
        }
        self.evolution_spec(&grid)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.domain.l, self.domain.n)
    }

    pub fn problem_spec(&self, grid: &Grid) -> Result<ProblemSpec> {
        let mut spec = ProblemSpec::new(
            grid.clone(),
            self.equation.symbol,
            self.equation.p,
            self.solver.c,
        )?
        .with_tol(self.solver.tol)
        .with_max_iter(self.solver.max_iter)
        .with_stopping(self.solver.stopping);
        if let Some(eps) = self.solver.eps {
            spec = spec.with_epsilon(eps);
        }
        spec.validate()?;
        Ok(spec)
    }

    /// `None` when `mw = 0`.
    pub fn extrapolation(&self) -> Option<ExtrapolationConfig> {
        (self.solver.mw > 0).then_some(ExtrapolationConfig {
            mw: self.solver.mw,
            safeguard: self.solver.safeguard,
        })
    }

    pub fn evolution_spec(&self, grid: &Grid) -> Result<EvolutionSpec> {
        Ok(EvolutionSpec::new(
            grid.clone(),
            self.equation.symbol,
            self.equation.p,
            self.evolution.dt,
            self.evolution.t_final,
        )?
        .with_snapshot_stride(self.evolution.snapshot_stride))
    }

    /// `explicit`, else the environment override, else the config value, else `.`.
    pub fn output_directory(&self, explicit: Option<&Path>) -> PathBuf {
        if let Some(dir) = explicit {
            return dir.to_path_buf();
        }
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
            return PathBuf::from(dir);
        }
        self.output
            .directory
            .clone()
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

pub(crate) fn parse_stopping(value: &str) -> std::result::Result<StoppingRule, String> {
    match value {
        "residual" => Ok(StoppingRule::Residual),
        "any_control" | "any" => Ok(StoppingRule::AnyControl),
        _ => Err(format!(
            "unknown stopping rule `{value}` (expected residual or any_control)"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_value_file_overrides_defaults() {
        let config = RunConfig::parse(
            "# desk run\nalpha = 0.7\np = 2\nN = 1024 # small\nmw = 0\nstopping = any_control\n",
        )
        .unwrap();
        assert_eq!(config.equation.symbol, DispersionSymbol::fractional(0.7));
        assert_eq!(config.equation.p, 2);
        assert_eq!(config.domain.n, 1024);
        assert_eq!(config.domain.l, 256.0);
        assert!(config.extrapolation().is_none());
        assert_eq!(config.solver.stopping, StoppingRule::AnyControl);
        config.validate().unwrap();
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match RunConfig::parse("p = 1\n\nbogus = 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match RunConfig::parse("p = 1\nl 12\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match RunConfig::parse("tol = small\n") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 1);
                assert!(message.contains("tol"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_echo_round_trips() {
        let mut config = RunConfig::default();
        config.equation.symbol = DispersionSymbol::whitham(1.0);
        config.solver.eps = Some(1.5);
        config.output.directory = Some(PathBuf::from("runs/a"));
        let text = serde_json::to_string_pretty(&config).unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), config);
    }

    #[test]
    fn validation_rejects_bad_domains() {
        let mut config = RunConfig::default();
        config.domain.n = 3000;
        assert!(config
            .validate()
            .unwrap_err()
            .to_string()
            .contains("power of two"));
        let mut config = RunConfig::default();
        config.solver.c = -1.0;
        assert!(config.validate().unwrap_err().to_string().contains("c > 0"));
    }
}
