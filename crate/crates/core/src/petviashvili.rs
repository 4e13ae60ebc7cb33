//! Petviashvili iteration for the solitary-wave profile equation
//!
//! ```text
//! β(D) φ + c φ − φ^{p+1}/(p+1) = 0
//! ```
//!
//! on a periodic grid. Written as `L φ = N(φ)` with `L = β(D) + c`, each step
//! sets `φ̂_{n+1}(k) = m(φ_n)^ε N̂(φ_n)(k) / (c + β(ξ_k))` where the
//! stabilizing factor `m(φ) = (Lφ, φ) / (N(φ), φ)` removes the unstable
//! scaling direction of the plain fixed-point map.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::{Error, Result};
use crate::spectral::{DispersionSymbol, Field, Grid};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1000;

/// One instance of the profile equation together with solver controls.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    /// Nonlinearity power.
    pub p: u32,
    /// Wave speed.
    pub c: f64,
    pub symbol: DispersionSymbol,
    /// Stabilizing exponent `ε`.
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub stopping: StoppingRule,
    pub grid: Grid,
}

impl ProblemSpec {
    /// Spec with `ε = (p+1)/p`, `tol = 1e-10` and `max_iter = 1000`.
    pub fn new(grid: Grid, symbol: DispersionSymbol, p: u32, c: f64) -> Result<Self> {
        let spec = ProblemSpec {
            p,
            c,
            symbol,
            epsilon: optimal_epsilon(p.max(1)),
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            stopping: StoppingRule::default(),
            grid,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_stopping(mut self, stopping: StoppingRule) -> Self {
        self.stopping = stopping;
        self
    }

    /// Same problem at a different speed.
    pub fn with_speed(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 1 {
            return Err(Error::Contract(
                "nonlinearity power p must be at least 1".into(),
            ));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Contract(format!(
                "wave speed must satisfy c > 0, got c = {}",
                self.c
            )));
        }
        if !self.epsilon.is_finite() {
            return Err(Error::Contract(format!(
                "stabilizing exponent must be finite, got {}",
                self.epsilon
            )));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Contract(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Contract("max_iter must be positive".into()));
        }
        self.symbol.validate()
    }

    /// Diagonal of `L` in Fourier space, `c + β(ξ_k)`.
    pub(crate) fn linear_symbol(&self) -> Vec<f64> {
        self.grid
            .wavenumbers()
            .iter()
            .map(|&xi| self.c + self.symbol.value(xi))
            .collect()
    }
}

/// `ε* = (p+1)/p`, the exponent that annihilates the scaling mode.
pub fn optimal_epsilon(p: u32) -> f64 {
    (p as f64 + 1.0) / p as f64
}

/// How the three controls `|1 − m_n|`, `‖φ_n − φ_{n−1}‖` and
/// `‖L φ_n − N(φ_n)‖` end the iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingRule {
    /// Stop once the residual is at most `tol`.
    ///
    /// `|1 − m_n|` is insensitive to errors orthogonal to `L φ` and
    /// typically reaches `tol` while the residual is still far above it.
    #[default]
    Residual,
    /// Stop as soon as any of the three controls is at most `tol`.
    AnyControl,
}

/// Which control ended the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `|1 − m_n| ≤ tol`.
    StabilizingFactor,
    /// `‖φ_n − φ_{n−1}‖ ≤ tol`.
    ConsecutiveDiff,
    /// `‖L φ_n − N(φ_n)‖ ≤ tol`.
    Residual,
    MaxIter,
}

/// Histories of the three stopping controls.
///
/// `iterations` counts base Petviashvili steps. Histories hold one entry per
/// control evaluation: one per step for the plain iteration, one per cycle
/// when extrapolation is used (`cycles` entries).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iterations: usize,
    pub cycles: usize,
    pub m_history: Vec<f64>,
    pub diff_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub converged_by: StopReason,
}

impl IterationReport {
    pub(crate) fn new() -> Self {
        IterationReport {
            iterations: 0,
            cycles: 0,
            m_history: Vec::new(),
            diff_history: Vec::new(),
            residual_history: Vec::new(),
            converged_by: StopReason::MaxIter,
        }
    }

    pub fn converged(&self) -> bool {
        self.converged_by != StopReason::MaxIter
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residual_history.last().copied()
    }

    /// Appends one evaluation of the controls and returns the reason to stop, if any.
    pub(crate) fn record(
        &mut self,
        m: f64,
        diff: f64,
        residual: f64,
        tol: f64,
        rule: StoppingRule,
    ) -> Option<StopReason> {
        self.m_history.push(m);
        self.diff_history.push(diff);
        self.residual_history.push(residual);
        self.cycles += 1;
        if rule == StoppingRule::Residual {
            return (residual <= tol).then_some(StopReason::Residual);
        }
        if (1.0 - m).abs() <= tol {
            Some(StopReason::StabilizingFactor)
        } else if diff <= tol {
            Some(StopReason::ConsecutiveDiff)
        } else if residual <= tol {
            Some(StopReason::Residual)
        } else {
            None
        }
    }
}

/// A computed profile with its iteration history.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    pub profile: Field,
    pub spec: ProblemSpec,
    pub report: IterationReport,
    /// Peak height of the trigonometric interpolant.
    pub amplitude: f64,
    pub min_value: f64,
}

impl ProfileSolution {
    pub(crate) fn new(profile: Field, spec: ProblemSpec, report: IterationReport) -> Self {
        let amplitude = analysis::amplitude(&profile)
            .map(|peak| peak.amplitude)
            .unwrap_or_else(|_| profile.max());
        let min_value = profile.min();
        ProfileSolution {
            profile,
            spec,
            report,
            amplitude,
            min_value,
        }
    }

    pub fn converged(&self) -> bool {
        self.report.converged()
    }
}

/// `φ^{p+1}/(p+1)` pointwise.
pub fn nonlinearity(field: &Field, p: u32) -> Result<Field> {
    let exponent = p as i32 + 1;
    let scale = 1.0 / (p as f64 + 1.0);
    let values = field
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let out = v.powi(exponent) * scale;
            if out.is_finite() {
                Ok(out)
            } else {
                Err(Error::NonFinite {
                    context: "nonlinearity",
                    index: j,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Field::new(field.grid(), values)
}

/// Everything one Petviashvili step needs about the current iterate.
pub(crate) struct Evaluation {
    pub field: Field,
    pub m: f64,
    pub residual: f64,
    nonlinear_coefficients: Vec<Complex64>,
}

/// Precomputed Fourier-space data for a [`ProblemSpec`].
pub(crate) struct PetviashviliOperator<'a> {
    spec: &'a ProblemSpec,
    linear: Vec<f64>,
}

impl<'a> PetviashviliOperator<'a> {
    pub fn new(spec: &'a ProblemSpec) -> Result<Self> {
        spec.validate()?;
        Ok(PetviashviliOperator {
            spec,
            linear: spec.linear_symbol(),
        })
    }

    fn check_grid(&self, field: &Field) -> Result<()> {
        if field.grid().same_as(&self.spec.grid) {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "field grid {:?} does not match problem grid {:?}",
                field.grid(),
                self.spec.grid
            )))
        }
    }

    /// Residual norm and stabilizing factor of `field`.
    ///
    /// A degenerate stabilizing factor is reported as NaN here; [`Self::step`]
    /// turns it into an error.
    pub fn evaluate(&self, field: Field) -> Result<Evaluation> {
        self.check_grid(&field)?;
        let n = field.len() as f64;
        let coefficients = field.coefficients();
        let nonlinear = nonlinearity(&field, self.spec.p)?;
        let nonlinear_coefficients = nonlinear.coefficients();

        let mut numerator = 0.0;
        let mut denominator = Complex64::new(0.0, 0.0);
        let mut residual_sq = 0.0;
        for ((phi, nl), &lin) in coefficients
            .iter()
            .zip(&nonlinear_coefficients)
            .zip(&self.linear)
        {
            numerator += lin * phi.norm_sqr();
            denominator += nl * phi.conj();
            residual_sq += (phi * lin - nl).norm_sqr();
        }
        // Parseval: Σ_j |v_j|² = N Σ_k |v̂_k|²
        let residual = (n * residual_sq).sqrt();
        debug_assert!(
            denominator.im.abs() <= 1e-10 * denominator.norm().max(f64::MIN_POSITIVE),
            "stabilizing factor denominator has imaginary part {}",
            denominator.im
        );
        let m = stabilizing_ratio(numerator, denominator.re);
        Ok(Evaluation {
            field,
            m: m.unwrap_or(f64::NAN),
            residual,
            nonlinear_coefficients,
        })
    }

    /// `φ_{n+1}` from an evaluated iterate.
    pub fn step(&self, eval: &Evaluation) -> Result<Field> {
        let m = eval.m;
        if !(m.is_finite() && m > 0.0) {
            return Err(degenerate(&eval.field, m));
        }
        let factor = m.powf(self.spec.epsilon);
        let next: Vec<Complex64> = eval
            .nonlinear_coefficients
            .iter()
            .zip(&self.linear)
            .map(|(nl, &lin)| nl * (factor / lin))
            .collect();
        let grid = &self.spec.grid;
        let values: Vec<f64> = grid
            .inverse_transform_complex(&next)?
            .into_iter()
            .map(|z| z.re)
            .collect();
        Field::new(grid, values)
    }
}

fn stabilizing_ratio(numerator: f64, denominator: f64) -> Option<f64> {
    if numerator == 0.0 || !(denominator.abs() >= 1e-14 * numerator.abs()) {
        None
    } else {
        Some(numerator / denominator)
    }
}

fn degenerate(field: &Field, m: f64) -> Error {
    if field.max_abs() == 0.0 {
        Error::DegenerateIterate("iterate is identically zero; stabilizing factor undefined".into())
    } else if m.is_nan() {
        Error::DegenerateIterate("(N(φ), φ) vanishes; stabilizing factor undefined".into())
    } else {
        Error::DegenerateIterate(format!(
            "stabilizing factor m = {m:.6e} is not positive; m^ε undefined"
        ))
    }
}

/// `m(φ) = Σ (c + β(ξ_k)) |φ̂(k)|² / Σ Re[N̂(φ)(k) conj(φ̂(k))]`.
pub fn stabilizing_factor(field: &Field, spec: &ProblemSpec) -> Result<f64> {
    let op = PetviashviliOperator::new(spec)?;
    let eval = op.evaluate(field.clone())?;
    if eval.m.is_finite() {
        Ok(eval.m)
    } else {
        Err(degenerate(field, eval.m))
    }
}

/// One Petviashvili step.
pub fn petviashvili_step(field: &Field, spec: &ProblemSpec) -> Result<Field> {
    let op = PetviashviliOperator::new(spec)?;
    let eval = op.evaluate(field.clone())?;
    op.step(&eval)
}

/// Euclidean norm of `L φ − N(φ)` at the nodes.
pub fn residual(field: &Field, spec: &ProblemSpec) -> Result<f64> {
    let op = PetviashviliOperator::new(spec)?;
    Ok(op.evaluate(field.clone())?.residual)
}

/// `A sech²(κ x)` with `A = (c (p+1)(p+2)/2)^{1/p}` and `κ = √c / 2`.
pub fn initial_guess(spec: &ProblemSpec) -> Field {
    let p = spec.p as f64;
    let amplitude = (spec.c * (p + 1.0) * (p + 2.0) / 2.0).powf(1.0 / p);
    let kappa = spec.c.sqrt() / 2.0;
    let values = spec
        .grid
        .nodes()
        .iter()
        .map(|&x| {
            let s = 1.0 / (kappa * x).cosh();
            amplitude * s * s
        })
        .collect();
    Field::from_raw(&spec.grid, values)
}

/// Runs the plain Petviashvili iteration until one of the three controls
/// drops to `tol` or `max_iter` steps have been taken.
///
/// Non-convergence is reported through [`StopReason::MaxIter`].
pub fn solve(spec: &ProblemSpec, guess: Option<&Field>) -> Result<ProfileSolution> {
    let op = PetviashviliOperator::new(spec)?;
    let start = match guess {
        Some(g) => g.clone(),
        None => initial_guess(spec),
    };
    if start.max_abs() == 0.0 {
        return Err(Error::Contract("initial guess is identically zero".into()));
    }
    let mut report = IterationReport::new();
    let mut current = op.evaluate(start)?;
    for _ in 0..spec.max_iter {
        let next = op.step(&current)?;
        report.iterations += 1;
        let diff = next.distance(&current.field);
        current = op.evaluate(next)?;
        if let Some(reason) =
            report.record(current.m, diff, current.residual, spec.tol, spec.stopping)
        {
            report.converged_by = reason;
            break;
        }
    }
    Ok(ProfileSolution::new(current.field, spec.clone(), report))
}
