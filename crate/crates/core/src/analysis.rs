//! Wave metrology and parameter studies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrapolation::{accelerated_solve, ExtrapolationConfig};
use crate::petviashvili::ProblemSpec;
use crate::spectral::{spectral_derivative, DispersionSymbol, Field, Grid};

/// SSE threshold a fit must meet to be accepted.
pub const DEFAULT_SSE_THRESHOLD: f64 = 1e-6;

/// Continuous peak of a sampled profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub amplitude: f64,
    pub location: f64,
}

/// Real trigonometric interpolant of a field, evaluated by direct summation.
struct TrigInterpolant {
    half_length: f64,
    mean: f64,
    // (ξ_k, 2 Re c_k, −2 Im c_k) for 0 < k < N/2
    modes: Vec<(f64, f64, f64)>,
    nyquist: (f64, f64),
}

impl TrigInterpolant {
    fn new(field: &Field) -> Self {
        let grid = field.grid();
        let n = grid.size();
        let c = field.coefficients();
        let xi = grid.wavenumbers();
        let modes = (1..n / 2)
            .map(|k| (xi[k], 2.0 * c[k].re, -2.0 * c[k].im))
            .collect();
        TrigInterpolant {
            half_length: grid.half_length(),
            mean: c[0].re,
            modes,
            nyquist: (xi[n / 2], c[n / 2].re),
        }
    }

    /// Value and first two derivatives at `x`.
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let theta = x + self.half_length;
        let (mut v, mut d1, mut d2) = (self.mean, 0.0, 0.0);
        for &(xi, a, b) in &self.modes {
            let (s, c) = (xi * theta).sin_cos();
            // a cos + b sin
            v += a * c + b * s;
            d1 += xi * (b * c - a * s);
            d2 -= xi * xi * (a * c + b * s);
        }
        let (xi, a) = self.nyquist;
        let (s, c) = (xi * theta).sin_cos();
        v += a * c;
        d1 -= a * xi * s;
        d2 -= a * xi * xi * c;
        (v, d1, d2)
    }
}

/// Height and position of the maximum of the trigonometric interpolant.
///
/// Starts at the largest node and refines by Newton iteration on the
/// interpolant's derivative. If Newton leaves the cell around that node the
/// grid maximum is returned. A maximum attained again away from the
/// neighbours of the largest node is reported as non-unique.
pub fn amplitude(profile: &Field) -> Result<Peak> {
    let values = profile.values();
    let n = values.len();
    let nodes = profile.grid().nodes();
    let (jmax, &vmax) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Contract("empty field".into()))?;
    let tie = 1e-12 * vmax.abs().max(f64::MIN_POSITIVE);
    let neighbour = |j: usize| {
        let d = (j + n - jmax) % n;
        d <= 1 || d == n - 1
    };
    if let Some(j) = (0..n).find(|&j| !neighbour(j) && values[j] >= vmax - tie) {
        return Err(Error::NonUniqueMaximum(format!(
            "maximum {vmax} attained at x = {} and x = {}",
            nodes[jmax], nodes[j]
        )));
    }

    let h = profile.grid().spacing();
    let grid_peak = Peak {
        amplitude: vmax,
        location: nodes[jmax],
    };
    let interp = TrigInterpolant::new(profile);
    let x0 = nodes[jmax];
    let mut x = x0;
    for _ in 0..50 {
        let (_, d1, d2) = interp.eval(x);
        if !(d2 < 0.0) {
            return Ok(grid_peak);
        }
        let dx = d1 / d2;
        x -= dx;
        if (x - x0).abs() > h {
            return Ok(grid_peak);
        }
        if dx.abs() <= 1e-15 * h.max(x.abs()) {
            break;
        }
    }
    let (value, _, _) = interp.eval(x);
    if value < vmax {
        return Ok(grid_peak);
    }
    Ok(Peak {
        amplitude: value,
        location: wrap(x, profile.grid().half_length()),
    })
}

/// Maps `x` into `[−l, l)`.
pub(crate) fn wrap(x: f64, l: f64) -> f64 {
    (x + l).rem_euclid(2.0 * l) - l
}

/// `(φ_j, φ'_j)` pairs with the derivative computed pseudospectrally.
pub fn phase_portrait(profile: &Field) -> Result<Vec<(f64, f64)>> {
    let d = spectral_derivative(profile)?;
    Ok(profile
        .values()
        .iter()
        .copied()
        .zip(d.values().iter().copied())
        .collect())
}

/// Least-squares slope of `ln φ` against `ln x` over the nodes in `[x_lo, x_hi]`.
///
/// For an algebraically decaying profile `φ ~ x^{-q}` this estimates `−q`.
pub fn decay_exponent(profile: &Field, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    let l = profile.grid().half_length();
    if !(lo > 0.0 && lo < hi && hi < l) {
        return Err(Error::Domain(format!(
            "decay window ({lo}, {hi}) must satisfy 0 < lo < hi < l = {l}"
        )));
    }
    let mut points = Vec::new();
    for (&x, &v) in profile.grid().nodes().iter().zip(profile.values()) {
        if x >= lo && x <= hi {
            if v <= 0.0 {
                return Err(Error::Domain(format!(
                    "profile value {v} at x = {x} is not positive"
                )));
            }
            points.push((x.ln(), v.ln()));
        }
    }
    if points.len() < 2 {
        return Err(Error::Domain(format!(
            "window ({lo}, {hi}) contains fewer than two nodes"
        )));
    }
    Ok(linear_fit(&points).1)
}

/// Ordinary least squares `y ≈ intercept + slope x`; returns `(intercept, slope)`.
fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Power-law fit `f(x) = a x^b` with goodness-of-fit statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    /// Sum of squared errors.
    pub sse: f64,
    pub r_squared: f64,
    /// `sqrt(sse / (n − 2))`.
    pub rmse: f64,
    pub n_points: usize,
}

impl FitResult {
    fn from_params(points: &[(f64, f64)], a: f64, b: f64) -> Self {
        let n = points.len();
        let sse = sse(points, a, b);
        let mean = points.iter().map(|p| p.1).sum::<f64>() / n as f64;
        let sst: f64 = points.iter().map(|p| (p.1 - mean).powi(2)).sum();
        let r_squared = if sst > 0.0 {
            1.0 - sse / sst
        } else if sse == 0.0 {
            1.0
        } else {
            0.0
        };
        FitResult {
            a,
            b,
            sse,
            r_squared,
            rmse: (sse / (n as f64 - 2.0)).sqrt(),
            n_points: n,
        }
    }

    /// Whether the fit meets an SSE threshold.
    pub fn accepted(&self, sse_threshold: f64) -> bool {
        self.sse <= sse_threshold
    }
}

fn sse(points: &[(f64, f64)], a: f64, b: f64) -> f64 {
    points
        .iter()
        .map(|&(x, y)| (y - a * x.powf(b)).powi(2))
        .sum()
}

/// Fits `y = a x^b`: log-log linear regression for the start, then
/// Gauss–Newton on the untransformed sum of squares.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::Contract(format!(
            "power-law fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points
        .iter()
        .find(|&&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::Domain(format!(
            "power-law data must be positive, got ({x}, {y})"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let lx_mean = logs.iter().map(|p| p.0).sum::<f64>() / logs.len() as f64;
    if logs
        .iter()
        .all(|p| (p.0 - lx_mean).abs() <= 1e-15 * lx_mean.abs().max(1.0))
    {
        return Err(Error::DegenerateFit("all abscissae are equal".into()));
    }
    let (ln_a, mut b) = linear_fit(&logs);
    let mut a = ln_a.exp();
    let mut current = sse(points, a, b);

    for _ in 0..100 {
        if current == 0.0 {
            break;
        }
        // J^T J and J^T r for residuals r_i = y_i − a x_i^b
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(x, y) in points {
            let xb = x.powf(b);
            let da = xb;
            let db = a * xb * x.ln();
            let r = y - a * xb;
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        let det = jaa * jbb - jab * jab;
        if !(det.abs() > 1e-14 * jaa * jbb) {
            return Err(Error::DegenerateFit("singular normal equations".into()));
        }
        let step_a = (jbb * ga - jab * gb) / det;
        let step_b = (jaa * gb - jab * ga) / det;
        // halve the step until the sum of squares does not grow
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let (na, nb) = (a + t * step_a, b + t * step_b);
            let s = sse(points, na, nb);
            if s <= current {
                accepted = Some((na, nb, s));
                break;
            }
            t *= 0.5;
        }
        let Some((na, nb, s)) = accepted else { break };
        let change = (current - s).abs();
        a = na;
        b = nb;
        let previous = current;
        current = s;
        if change <= 1e-12 * previous {
            break;
        }
    }
    Ok(FitResult::from_params(points, a, b))
}

/// Grid of (α, c) values for a speed–amplitude study at fixed `p`.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub p: u32,
    pub alphas: Vec<f64>,
    pub speeds: Vec<f64>,
    /// Grid, tolerance, `max_iter` and `ε` for every solve; `p`, `c` and the
    /// symbol are overwritten per row. A template `ε` equal to the optimal
    /// value of its own `p` is replaced by the optimal value for `self.p`.
    pub template: ProblemSpec,
    pub extrapolation: ExtrapolationConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p < 1 {
            return Err(Error::Contract(
                "nonlinearity power p must be at least 1".into(),
            ));
        }
        if let Some(c) = self.speeds.iter().find(|&&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::Contract(format!(
                "wave speed must satisfy c > 0, got c = {c}"
            )));
        }
        let limit = self.p as f64 / (self.p as f64 + 2.0);
        if let Some(a) = self
            .alphas
            .iter()
            .find(|&&a| !(a.is_finite() && a >= limit - 1e-9))
        {
            return Err(Error::Contract(format!(
                "alpha = {a} is below the existence limit p/(p+2) = {limit}"
            )));
        }
        Ok(())
    }
}

/// One row of a speed–amplitude table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub p: u32,
    pub c: f64,
    pub amplitude: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
}

/// Solves every (α, c) of the sweep and records amplitudes.
///
/// Speeds for each α are visited in increasing order, each solve starting
/// from the previous converged profile. Different α values run in parallel
/// on the current rayon pool. Rows come back sorted by (α, c); a failed solve
/// yields a row with `converged = false` and NaN amplitude.
pub fn speed_amplitude_sweep(sweep: &SweepSpec) -> Result<Vec<SweepRow>> {
    sweep.validate()?;
    let mut speeds = sweep.speeds.clone();
    speeds.sort_by(f64::total_cmp);
    let mut alphas = sweep.alphas.clone();
    alphas.sort_by(f64::total_cmp);

    let epsilon = if sweep.template.epsilon
        == crate::petviashvili::optimal_epsilon(sweep.template.p.max(1))
    {
        crate::petviashvili::optimal_epsilon(sweep.p)
    } else {
        sweep.template.epsilon
    };

    let groups: Vec<Vec<SweepRow>> = alphas
        .par_iter()
        .map(|&alpha| {
            let mut rows = Vec::with_capacity(speeds.len());
            let mut warm: Option<Field> = None;
            for &c in &speeds {
                let mut spec = sweep.template.clone();
                spec.p = sweep.p;
                spec.c = c;
                spec.epsilon = epsilon;
                spec.symbol = DispersionSymbol::fractional(alpha);
                let row = match accelerated_solve(&spec, &sweep.extrapolation, warm.as_ref()) {
                    Ok(sol) => {
                        let converged = sol.converged();
                        let row = SweepRow {
                            alpha,
                            p: sweep.p,
                            c,
                            amplitude: sol.amplitude,
                            iterations: sol.report.iterations,
                            converged,
                            residual: sol.report.final_residual().unwrap_or(f64::NAN),
                        };
                        warm = converged.then_some(sol.profile);
                        row
                    }
                    Err(_) => {
                        warm = None;
                        SweepRow {
                            alpha,
                            p: sweep.p,
                            c,
                            amplitude: f64::NAN,
                            iterations: 0,
                            converged: false,
                            residual: f64::NAN,
                        }
                    }
                };
                rows.push(row);
            }
            rows
        })
        .collect();
    Ok(groups.into_iter().flatten().collect())
}

/// Fits `amplitude = a c^b` to the converged rows of one (α, p) group.
pub fn fit_sweep_group(rows: &[SweepRow]) -> Result<FitResult> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.converged)
        .map(|r| (r.c, r.amplitude))
        .collect();
    fit_power_law(&points)
}

/// Exact gKdV amplitude `(c (p+1)(p+2)/2)^{1/p}` (α = 2).
pub fn gkdv_amplitude(p: u32, c: f64) -> f64 {
    let p = p as f64;
    (c * (p + 1.0) * (p + 2.0) / 2.0).powf(1.0 / p)
}

/// Exact `2l`-periodic Benjamin–Ono solitary wave (α = 1, p = 1)
/// `2k sinh γ / (cosh γ − cos kx)` with `k = π/l`, `coth γ = c/k`.
/// Tends to `4c/(1 + c²x²)` as `l → ∞`; requires `c > k`.
pub fn periodic_bo_soliton(grid: &Grid, c: f64) -> Result<Field> {
    let k = std::f64::consts::PI / grid.half_length();
    if !(c > k) {
        return Err(Error::Domain(format!(
            "periodic Benjamin–Ono wave needs c > π/l = {k}, got c = {c}"
        )));
    }
    let gamma = (k / c).atanh();
    let (s, ch) = (gamma.sinh(), gamma.cosh());
    Field::from_fn(grid, |x| 2.0 * k * s / (ch - (k * x).cos()))
}

/// Default decay-estimation window `(l/8, l/4)`.
pub fn default_decay_window(half_length: f64) -> (f64, f64) {
    (half_length / 8.0, half_length / 4.0)
}
