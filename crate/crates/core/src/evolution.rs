//! Time integration of the periodic problem
//!
//! ```text
//! u_t + (u^{p+1}/(p+1))_x − (β(D) u)_x = 0
//! ```
//!
//! by a Fourier pseudospectral discretization and the fourth-order
//! triple-jump composition of the implicit midpoint rule. Each midpoint
//! stage is solved by fixed-point iteration with the dispersive part inverted
//! exactly in Fourier space.

use num_complex::Complex64;

use crate::analysis;
use crate::error::{Error, Result};
use crate::petviashvili::nonlinearity;
use crate::spectral::{apply_operator, DispersionSymbol, Field, Grid};

/// Cap on fixed-point iterations per implicit stage.
pub const MAX_INNER_ITERATIONS: usize = 100;

pub const DEFAULT_INNER_TOL: f64 = 1e-12;

/// Substep fractions of the triple-jump composition.
pub fn composition_weights() -> [f64; 3] {
    let g1 = 1.0 / (2.0 - 2f64.powf(1.0 / 3.0));
    [g1, 1.0 - 2.0 * g1, g1]
}

#[derive(Debug, Clone)]
pub struct EvolutionSpec {
    pub grid: Grid,
    pub p: u32,
    pub symbol: DispersionSymbol,
    pub dt: f64,
    pub t_final: f64,
    /// Stage solves stop once the increment is below `inner_tol · max(1, ‖u‖)`, `u` the stage input.
    pub inner_tol: f64,
    pub snapshot_stride: usize,
    /// Drop the `u^{p+1}` flux, leaving the linear dispersive problem.
    pub nonlinear: bool,
    /// Apply the 2/3 rule to the nonlinear flux.
    pub dealias: bool,
}

impl EvolutionSpec {
    pub fn new(
        grid: Grid,
        symbol: DispersionSymbol,
        p: u32,
        dt: f64,
        t_final: f64,
    ) -> Result<Self> {
        let spec = EvolutionSpec {
            grid,
            p,
            symbol,
            dt,
            t_final,
            inner_tol: DEFAULT_INNER_TOL,
            snapshot_stride: 1,
            nonlinear: true,
            dealias: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_snapshot_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn with_inner_tol(mut self, tol: f64) -> Self {
        self.inner_tol = tol;
        self
    }

    pub fn linear(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn with_dealiasing(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 1 {
            return Err(Error::Contract(
                "nonlinearity power p must be at least 1".into(),
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Contract(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final.is_finite() && self.t_final >= self.dt) {
            return Err(Error::Contract(format!(
                "t_final = {} must be at least dt = {}",
                self.t_final, self.dt
            )));
        }
        if !(self.inner_tol > 0.0) {
            return Err(Error::Contract("inner_tol must be positive".into()));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Contract("snapshot_stride must be positive".into()));
        }
        self.symbol.validate()
    }

    /// Number of composed steps, `round(t_final / dt)`.
    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt).round() as usize).max(1)
    }
}

/// Fourier-space pieces of the semi-discrete equation `u_t = L u + G(u)`.
struct Semidiscrete<'a> {
    spec: &'a EvolutionSpec,
    /// `iξ_k` with the Nyquist mode removed.
    derivative: Vec<Complex64>,
    /// `iξ_k β(ξ_k)`.
    dispersive: Vec<Complex64>,
    /// 2/3-rule mask for the flux (all ones when dealiasing is off).
    mask: Vec<f64>,
}

impl<'a> Semidiscrete<'a> {
    fn new(spec: &'a EvolutionSpec) -> Result<Self> {
        spec.validate()?;
        let grid = &spec.grid;
        let n = grid.size();
        let derivative: Vec<Complex64> = grid
            .wavenumbers()
            .iter()
            .enumerate()
            .map(|(k, &xi)| {
                if k == n / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, xi)
                }
            })
            .collect();
        let dispersive = derivative
            .iter()
            .zip(grid.wavenumbers())
            .map(|(d, &xi)| d * spec.symbol.value(xi))
            .collect();
        let mask = (0..n)
            .map(|k| {
                let signed = if k <= n / 2 { k } else { n - k };
                if spec.dealias && 3 * signed > n {
                    0.0
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Semidiscrete {
            spec,
            derivative,
            dispersive,
            mask,
        })
    }

    fn check(&self, u: &Field) -> Result<()> {
        if u.grid().same_as(&self.spec.grid) {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "field grid {:?} does not match evolution grid {:?}",
                u.grid(),
                self.spec.grid
            )))
        }
    }

    /// Coefficients of `−∂_x N(u)`.
    fn flux(&self, u: &Field) -> Result<Vec<Complex64>> {
        if !self.spec.nonlinear {
            return Ok(vec![Complex64::new(0.0, 0.0); u.len()]);
        }
        let nl = nonlinearity(u, self.spec.p)?.coefficients();
        Ok(nl
            .iter()
            .zip(&self.derivative)
            .zip(&self.mask)
            .map(|((z, d), m)| -(d * z) * *m)
            .collect())
    }

    fn rhs(&self, u: &Field) -> Result<Field> {
        self.check(u)?;
        let coefficients = u.coefficients();
        let flux = self.flux(u)?;
        let out: Vec<Complex64> = coefficients
            .iter()
            .zip(&self.dispersive)
            .zip(&flux)
            .map(|((z, l), f)| l * z + f)
            .collect();
        to_field(&self.spec.grid, &out, "evolution right-hand side")
    }

    /// Implicit midpoint step of size `tau`.
    fn midpoint(&self, u: &Field, tau: f64) -> Result<Field> {
        self.check(u)?;
        let grid = &self.spec.grid;
        let u_hat = u.coefficients();
        let half = 0.5 * tau;
        let inverse: Vec<Complex64> = self
            .dispersive
            .iter()
            .map(|l| Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - l * half))
            .collect();

        let scale = u.norm().max(1.0);
        let mut w = u.clone();
        let mut increment = f64::INFINITY;
        for _ in 0..MAX_INNER_ITERATIONS {
            let flux = self.flux(&w)?;
            let next_hat: Vec<Complex64> = u_hat
                .iter()
                .zip(&flux)
                .zip(&inverse)
                .map(|((z, f), inv)| (z + f * half) * inv)
                .collect();
            let next = to_field(grid, &next_hat, "implicit midpoint stage")?;
            increment = next.distance(&w);
            w = next;
            if increment <= self.spec.inner_tol * scale {
                let values = w
                    .values()
                    .iter()
                    .zip(u.values())
                    .map(|(wi, ui)| 2.0 * wi - ui)
                    .collect();
                return Field::new(grid, values);
            }
        }
        Err(Error::InnerSolve {
            iterations: MAX_INNER_ITERATIONS,
            increment,
        })
    }

    fn composed(&self, u: &Field, dt: f64) -> Result<Field> {
        composition_weights()
            .iter()
            .try_fold(u.clone(), |v, g| self.midpoint(&v, g * dt))
    }
}

fn to_field(grid: &Grid, coefficients: &[Complex64], context: &'static str) -> Result<Field> {
    let values = grid
        .inverse_transform_complex(coefficients)?
        .into_iter()
        .enumerate()
        .map(|(j, z)| {
            if z.re.is_finite() {
                Ok(z.re)
            } else {
                Err(Error::NonFinite { context, index: j })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Field::new(grid, values)
}

/// `−∂_x(u^{p+1}/(p+1)) + ∂_x(β(D) u)`, all derivatives pseudospectral.
pub fn rhs(u: &Field, spec: &EvolutionSpec) -> Result<Field> {
    Semidiscrete::new(spec)?.rhs(u)
}

/// Solves `u⁺ = u + τ F((u + u⁺)/2)`.
pub fn step_implicit_midpoint(u: &Field, tau: f64, spec: &EvolutionSpec) -> Result<Field> {
    if tau == 0.0 || !tau.is_finite() {
        return Err(Error::Contract(format!(
            "midpoint step needs finite τ ≠ 0, got {tau}"
        )));
    }
    Semidiscrete::new(spec)?.midpoint(u, tau)
}

/// One fourth-order composed step of size `spec.dt`.
pub fn step_composed(u: &Field, spec: &EvolutionSpec) -> Result<Field> {
    Semidiscrete::new(spec)?.composed(u, spec.dt)
}

/// Composed step with an explicit (possibly negative) step size.
pub fn step_composed_by(u: &Field, dt: f64, spec: &EvolutionSpec) -> Result<Field> {
    Semidiscrete::new(spec)?.composed(u, dt)
}

/// Conserved quantities of the periodic problem, by the trapezoidal rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedDiagnostics {
    /// `∫ u`.
    pub c: f64,
    /// `∫ u²`.
    pub m: f64,
    /// `∫ ½ (β(D)^{1/2} u)² − u^{p+2}/((p+1)(p+2))`.
    pub e: f64,
}

pub fn diagnostics(u: &Field, spec: &EvolutionSpec) -> Result<ConservedDiagnostics> {
    let h = u.grid().spacing();
    let p = spec.p as f64;
    let half = apply_operator(u, &spec.symbol, 0.5)?;
    let c = h * u.values().iter().sum::<f64>();
    let m = h * u.values().iter().map(|v| v * v).sum::<f64>();
    let potential: f64 = u
        .values()
        .iter()
        .map(|v| v.powi(spec.p as i32 + 2))
        .sum::<f64>()
        / ((p + 1.0) * (p + 2.0));
    let kinetic: f64 = 0.5 * half.values().iter().map(|v| v * v).sum::<f64>();
    Ok(ConservedDiagnostics {
        c,
        m,
        e: h * (kinetic - potential),
    })
}

/// Snapshots and wave metrics recorded along an evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    pub diagnostics: Vec<ConservedDiagnostics>,
    pub amplitude_series: Vec<f64>,
    /// NaN where the peak is not unique.
    pub peak_position_series: Vec<f64>,
    pub half_length: f64,
}

impl Trajectory {
    fn new(half_length: f64) -> Self {
        Trajectory {
            times: Vec::new(),
            snapshots: Vec::new(),
            diagnostics: Vec::new(),
            amplitude_series: Vec::new(),
            peak_position_series: Vec::new(),
            half_length,
        }
    }

    fn push(&mut self, t: f64, u: Field, spec: &EvolutionSpec) -> Result<()> {
        let (amp, pos) = match analysis::amplitude(&u) {
            Ok(peak) => (peak.amplitude, peak.location),
            Err(Error::NonUniqueMaximum(_)) => (u.max(), f64::NAN),
            Err(e) => return Err(e),
        };
        self.diagnostics.push(diagnostics(&u, spec)?);
        self.times.push(t);
        self.snapshots.push(u);
        self.amplitude_series.push(amp);
        self.peak_position_series.push(pos);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_t |A(t) − A(0)| / A(0)`.
    pub fn relative_amplitude_drift(&self) -> f64 {
        let a0 = self.amplitude_series[0];
        self.amplitude_series
            .iter()
            .fold(0.0_f64, |m, a| m.max((a - a0).abs()))
            / a0.abs()
    }

    /// `max_t |M(t) − M(0)| / M(0)`.
    pub fn relative_mass_drift(&self) -> f64 {
        relative_drift(self.diagnostics.iter().map(|d| d.m))
    }

    /// `max_t |E(t) − E(0)| / |E(0)|`.
    pub fn relative_energy_drift(&self) -> f64 {
        relative_drift(self.diagnostics.iter().map(|d| d.e))
    }

    pub fn final_state(&self) -> &Field {
        self.snapshots
            .last()
            .expect("trajectory holds the initial state")
    }
}

fn relative_drift(mut values: impl Iterator<Item = f64>) -> f64 {
    let Some(first) = values.next() else {
        return 0.0;
    };
    let drift = values.fold(0.0_f64, |m, v| m.max((v - first).abs()));
    if first == 0.0 {
        drift
    } else {
        drift / first.abs()
    }
}

/// Integrates from `initial` to `t_final` in `round(t_final/dt)` composed
/// steps, recording a snapshot every `snapshot_stride` steps (and at t = 0).
pub fn evolve(initial: &Field, spec: &EvolutionSpec) -> Result<Trajectory> {
    let system = Semidiscrete::new(spec)?;
    system.check(initial)?;
    let mut trajectory = Trajectory::new(spec.grid.half_length());
    trajectory.push(0.0, initial.clone(), spec)?;
    let mut u = initial.clone();
    for k in 1..=spec.steps() {
        u = system.composed(&u, spec.dt)?;
        if k % spec.snapshot_stride == 0 {
            trajectory.push(k as f64 * spec.dt, u.clone(), spec)?;
        }
    }
    Ok(trajectory)
}

/// Peak positions unwrapped across the periodic boundary.
pub fn unwrapped_positions(trajectory: &Trajectory) -> Result<Vec<f64>> {
    let period = 2.0 * trajectory.half_length;
    let mut out: Vec<f64> = Vec::with_capacity(trajectory.len());
    for (i, &x) in trajectory.peak_position_series.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonUniqueMaximum(format!(
                "peak position undefined in snapshot {i} (t = {})",
                trajectory.times[i]
            )));
        }
        match out.last() {
            None => out.push(x),
            Some(&prev) => {
                let mut d = x - analysis::wrap(prev, trajectory.half_length);
                d -= period * (d / period).round();
                out.push(prev + d);
            }
        }
    }
    Ok(out)
}

/// Least-squares slope of the unwrapped peak position against time.
pub fn measure_speed(trajectory: &Trajectory) -> Result<f64> {
    if trajectory.len() < 2 {
        return Err(Error::Contract(
            "speed measurement needs at least two snapshots".into(),
        ));
    }
    let positions = unwrapped_positions(trajectory)?;
    let n = positions.len() as f64;
    let mt = trajectory.times.iter().sum::<f64>() / n;
    let mx = positions.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, x) in trajectory.times.iter().zip(&positions) {
        sxy += (t - mt) * (x - mx);
        sxx += (t - mt) * (t - mt);
    }
    Ok(sxy / sxx)
}

/// Self-convergence measurement of the composed integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderEstimate {
    pub dt: f64,
    /// Terminal error at `dt` against the `dt/64` reference.
    pub error_coarse: f64,
    /// Terminal error at `dt/2` against the same reference.
    pub error_fine: f64,
    /// `log2(error_coarse / error_fine)`.
    pub order: f64,
}

fn integrate(initial: &Field, spec: &EvolutionSpec, dt: f64) -> Result<Field> {
    let system = Semidiscrete::new(spec)?;
    system.check(initial)?;
    let steps = (spec.t_final / dt).round() as usize;
    (0..steps).try_fold(initial.clone(), |u, _| system.composed(&u, dt))
}

/// Runs to `spec.t_final` with `dt`, `dt/2` and `dt/64`; `t_final/dt` should
/// be an integer.
pub fn self_convergence_order(initial: &Field, spec: &EvolutionSpec) -> Result<OrderEstimate> {
    let dt = spec.dt;
    let reference = integrate(initial, spec, dt / 64.0)?;
    let error_coarse = integrate(initial, spec, dt)?.distance(&reference);
    let error_fine = integrate(initial, spec, dt / 2.0)?.distance(&reference);
    Ok(OrderEstimate {
        dt,
        error_coarse,
        error_fine,
        order: (error_coarse / error_fine).log2(),
    })
}
