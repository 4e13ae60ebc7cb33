//! Periodic collocation grids, discrete Fourier transforms and Fourier
//! multipliers defined by even real symbols.
//!
//! The grid covers `(-l, l)` with `N` nodes `x_j = -l + j h`, `h = 2l/N`.
//! Coefficients follow the convention `φ̂(k) = (1/N) Σ_j φ_j e^{-2πi jk/N}`,
//! so mode 0 holds the mean of the samples. Wavenumbers are signed:
//! `ξ_k = (π/l) k` for `k ≤ N/2` and `(π/l)(k - N)` above.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this `|ξ|` the Whitham factor `tanh(ξ)/ξ` is evaluated by its Taylor series.
const WHITHAM_SERIES_THRESHOLD: f64 = 1e-4;

struct GridData {
    half_length: f64,
    size: usize,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid on `(-l, l)` with cached FFT plans.
///
/// Cloning is cheap; clones share nodes, wavenumbers and plans.
#[derive(Clone)]
pub struct Grid(Arc<GridData>);

impl Grid {
    /// Builds the grid on `(-half_length, half_length)` with `size` nodes.
    ///
    /// `size` must be even and at least 2; powers of two transform fastest.
    pub fn new(half_length: f64, size: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::Contract(format!(
                "grid half-length must be positive and finite, got {half_length}"
            )));
        }
        if size < 2 || !size.is_multiple_of(2) {
            return Err(Error::Contract(format!(
                "grid size must be even and at least 2, got {size}"
            )));
        }
        let h = 2.0 * half_length / size as f64;
        let nodes = (0..size).map(|j| -half_length + j as f64 * h).collect();
        let scale = std::f64::consts::PI / half_length;
        let wavenumbers = (0..size)
            .map(|k| {
                let signed = if k <= size / 2 {
                    k as f64
                } else {
                    k as f64 - size as f64
                };
                scale * signed
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        Ok(Grid(Arc::new(GridData {
            half_length,
            size,
            nodes,
            wavenumbers,
            forward,
            inverse,
        })))
    }

    pub fn half_length(&self) -> f64 {
        self.0.half_length
    }

    pub fn size(&self) -> usize {
        self.0.size
    }

    /// Node spacing `h = 2l/N`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.0.half_length / self.0.size as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.0.nodes
    }

    /// Signed wavenumbers `ξ_k`, in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.0.wavenumbers
    }

    /// Whether two grids describe the same discretization.
    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.size == other.0.size && self.0.half_length == other.0.half_length)
    }

    /// Normalized forward transform: coefficient 0 is the sample mean.
    pub fn forward_transform(&self, values: &[f64]) -> Result<Vec<Complex64>> {
        self.check_len(values.len())?;
        let mut buffer: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.0.forward.process(&mut buffer);
        let inv_n = 1.0 / self.0.size as f64;
        buffer.iter_mut().for_each(|z| *z *= inv_n);
        Ok(buffer)
    }

    /// Inverse of [`Grid::forward_transform`], returning complex samples.
    pub fn inverse_transform_complex(&self, coefficients: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(coefficients.len())?;
        let mut buffer = coefficients.to_vec();
        self.0.inverse.process(&mut buffer);
        Ok(buffer)
    }

    /// Inverse transform keeping the real part of the samples.
    pub fn inverse_transform(&self, coefficients: &[Complex64]) -> Result<Field> {
        let samples = self.inverse_transform_complex(coefficients)?;
        Field::new(self, samples.into_iter().map(|z| z.re).collect())
    }

    /// Applies `multiplier(k, ξ_k)` to the coefficients of `values` and
    /// transforms back, checking the output for non-finite entries.
    pub(crate) fn apply_multiplier<F>(
        &self,
        values: &[f64],
        context: &'static str,
        multiplier: F,
    ) -> Result<Vec<f64>>
    where
        F: Fn(usize, f64) -> Complex64,
    {
        let mut coefficients = self.forward_transform(values)?;
        for (k, (z, &xi)) in coefficients
            .iter_mut()
            .zip(self.wavenumbers().iter())
            .enumerate()
        {
            let m = multiplier(k, xi);
            if !(m.re.is_finite() && m.im.is_finite()) {
                return Err(Error::NonFinite { context, index: k });
            }
            *z *= m;
        }
        let samples = self.inverse_transform_complex(&coefficients)?;
        samples
            .into_iter()
            .enumerate()
            .map(|(j, z)| {
                if z.re.is_finite() {
                    Ok(z.re)
                } else {
                    Err(Error::NonFinite { context, index: j })
                }
            })
            .collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.0.size {
            return Err(Error::Contract(format!(
                "length {len} does not match grid size {}",
                self.0.size
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("half_length", &self.0.half_length)
            .field("size", &self.0.size)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

/// Even, real Fourier symbol `β(ξ)` defining a dispersive operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DispersionSymbol {
    /// `|ξ|^α`, the fractional derivative `D^α`.
    Fractional { alpha: f64 },
    /// `(1 + γ ξ²)^{1/2} (tanh ξ / ξ)^{1/2}`, Whitham dispersion with surface tension `γ`.
    WhithamExtended { gamma: f64 },
}

impl DispersionSymbol {
    pub fn fractional(alpha: f64) -> Self {
        DispersionSymbol::Fractional { alpha }
    }

    pub fn whitham(gamma: f64) -> Self {
        DispersionSymbol::WhithamExtended { gamma }
    }

    /// Checks the symbol parameters.
    pub fn validate(&self) -> Result<()> {
        match *self {
            DispersionSymbol::Fractional { alpha } if !(alpha.is_finite() && alpha > 0.0) => Err(
                Error::Contract(format!("fractional exponent must be positive, got {alpha}")),
            ),
            DispersionSymbol::WhithamExtended { gamma } if !(gamma.is_finite() && gamma >= 0.0) => {
                Err(Error::Contract(format!(
                    "surface tension must be nonnegative, got {gamma}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// `β(ξ)`; rejects non-finite `ξ`.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        if !xi.is_finite() {
            return Err(Error::Domain(format!(
                "symbol evaluated at non-finite ξ = {xi}"
            )));
        }
        Ok(self.value(xi))
    }

    /// `β(ξ)` for finite `ξ`.
    pub(crate) fn value(&self, xi: f64) -> f64 {
        let a = xi.abs();
        match *self {
            DispersionSymbol::Fractional { alpha } => {
                if a == 0.0 {
                    0.0
                } else {
                    a.powf(alpha)
                }
            }
            DispersionSymbol::WhithamExtended { gamma } => {
                let ratio = if a < WHITHAM_SERIES_THRESHOLD {
                    let a2 = a * a;
                    1.0 - a2 / 3.0 + 2.0 * a2 * a2 / 15.0
                } else {
                    a.tanh() / a
                };
                ((1.0 + gamma * a * a) * ratio).sqrt()
            }
        }
    }

    /// `β(ξ)^power`, with `0^power = 0` for positive powers.
    pub(crate) fn value_pow(&self, xi: f64, power: f64) -> f64 {
        let b = self.value(xi);
        if power == 1.0 {
            b
        } else if b == 0.0 && power > 0.0 {
            0.0
        } else {
            b.powf(power)
        }
    }

    /// Short label used in reports.
    pub fn describe(&self) -> String {
        match *self {
            DispersionSymbol::Fractional { alpha } => format!("fractional(alpha={alpha})"),
            DispersionSymbol::WhithamExtended { gamma } => format!("whitham(gamma={gamma})"),
        }
    }
}

/// Samples of a real function at the nodes of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    /// Wraps `values`; the length must match the grid and all entries must be finite.
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "field samples",
                index: j,
            });
        }
        Ok(Field {
            grid: grid.clone(),
            values,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Field {
            grid: grid.clone(),
            values: vec![0.0; grid.size()],
        }
    }

    /// Samples `f` at the nodes.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: &Grid, f: F) -> Result<Self> {
        Field::new(grid, grid.nodes().iter().map(|&x| f(x)).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Euclidean norm of the samples (no quadrature weight).
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute sample.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Euclidean distance to another field on the same grid.
    pub fn distance(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Field {
        self.map(|v| v * factor)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Forward transform of the samples.
    pub fn coefficients(&self) -> Vec<Complex64> {
        self.grid
            .forward_transform(&self.values)
            .expect("field length matches its grid")
    }

    pub(crate) fn from_raw(grid: &Grid, values: Vec<f64>) -> Field {
        debug_assert_eq!(values.len(), grid.size());
        Field {
            grid: grid.clone(),
            values,
        }
    }

    pub(crate) fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "fields live on different grids ({:?} vs {:?})",
                self.grid, other.grid
            )))
        }
    }
}

impl Add for &Field {
    type Output = Field;

    fn add(self, rhs: &Field) -> Field {
        assert!(self.grid.same_as(&rhs.grid), "grid mismatch");
        Field::from_raw(
            &self.grid,
            self.values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Sub for &Field {
    type Output = Field;

    fn sub(self, rhs: &Field) -> Field {
        assert!(self.grid.same_as(&rhs.grid), "grid mismatch");
        Field::from_raw(
            &self.grid,
            self.values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Mul<&Field> for f64 {
    type Output = Field;

    fn mul(self, rhs: &Field) -> Field {
        rhs.scaled(self)
    }
}

/// Evaluates `β(ξ)`.
pub fn eval_symbol(symbol: &DispersionSymbol, xi: f64) -> Result<f64> {
    symbol.eval(xi)
}

/// Applies the multiplier `β(ξ_k)^power` to a real field.
///
/// `power = 0.5` with `Fractional(α)` gives `D^{α/2}`.
pub fn apply_operator(field: &Field, symbol: &DispersionSymbol, power: f64) -> Result<Field> {
    let grid = field.grid();
    let values = grid.apply_multiplier(field.values(), "dispersive operator", |_, xi| {
        Complex64::new(symbol.value_pow(xi, power), 0.0)
    })?;
    Ok(Field::from_raw(grid, values))
}

/// Pseudospectral `d/dx` with the Nyquist coefficient removed.
pub fn spectral_derivative(field: &Field) -> Result<Field> {
    let grid = field.grid();
    let nyquist = grid.size() / 2;
    let values = grid.apply_multiplier(field.values(), "spectral derivative", |k, xi| {
        if k == nyquist {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, xi)
        }
    })?;
    Ok(Field::from_raw(grid, values))
}

/// Forward transform of a field (mode 0 equals the mean).
pub fn forward_transform(field: &Field) -> Vec<Complex64> {
    field.coefficients()
}

/// Real field whose forward transform is `coefficients`.
pub fn inverse_transform(grid: &Grid, coefficients: &[Complex64]) -> Result<Field> {
    grid.inverse_transform(coefficients)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(8.0, 64).unwrap()
    }

    fn rel_max_err(a: &[f64], b: &[f64]) -> f64 {
        let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
        a.iter()
            .zip(b)
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
            / scale
    }

    #[test]
    fn grid_layout() {
        let g = grid();
        assert_eq!(g.nodes()[0], -8.0);
        assert!((g.spacing() - 0.25).abs() < 1e-15);
        assert_eq!(g.nodes()[32], 0.0);
        let w = g.wavenumbers();
        for k in 1..32 {
            assert_eq!(w[k], -w[64 - k]);
        }
        assert!((w[32] - std::f64::consts::PI / 8.0 * 32.0).abs() < 1e-12);
        assert!(w[33] < 0.0);
    }

    #[test]
    fn grid_rejects_odd_or_bad_sizes() {
        assert!(matches!(Grid::new(1.0, 7), Err(Error::Contract(_))));
        assert!(matches!(Grid::new(0.0, 8), Err(Error::Contract(_))));
        assert!(matches!(Grid::new(f64::NAN, 8), Err(Error::Contract(_))));
    }

    #[test]
    fn symbol_values() {
        assert_eq!(
            eval_symbol(&DispersionSymbol::fractional(2.0), 3.0).unwrap(),
            9.0
        );
        assert_eq!(
            eval_symbol(&DispersionSymbol::fractional(0.7), 0.0).unwrap(),
            0.0
        );
        assert_eq!(
            eval_symbol(&DispersionSymbol::whitham(0.0), 0.0).unwrap(),
            1.0
        );
        // sqrt(5) * sqrt(tanh(2)/2) from 30-digit arithmetic
        let got = eval_symbol(&DispersionSymbol::whitham(1.0), 2.0).unwrap();
        assert!((got - 1.552_439_676_827_909).abs() < 1e-14);
        assert!(matches!(
            eval_symbol(&DispersionSymbol::fractional(1.0), f64::INFINITY),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn whitham_series_matches_direct_formula_near_threshold() {
        let s = DispersionSymbol::whitham(0.3);
        for xi in [0.99e-4_f64, 1.01e-4, 5e-5, 1e-8] {
            let direct = ((1.0 + 0.3 * xi * xi) * xi.tanh() / xi).sqrt();
            assert!((s.value(xi) - direct).abs() < 1e-13, "xi={xi}");
        }
    }

    #[test]
    fn transform_conventions() {
        let g = grid();
        let c = forward_transform(&Field::from_fn(&g, |_| 5.0).unwrap());
        assert!((c[0].re - 5.0).abs() < 1e-14);
        assert!(c[1..].iter().all(|z| z.norm() < 1e-14));

        let xi2 = g.wavenumbers()[2];
        let c = forward_transform(&Field::from_fn(&g, |x| (xi2 * x).cos()).unwrap());
        for (k, z) in c.iter().enumerate() {
            let expected = if k == 2 || k == 62 { 0.5 } else { 0.0 };
            assert!((z.norm() - expected).abs() < 1e-13, "k={k}");
        }
        assert!(matches!(
            g.forward_transform(&[1.0, 2.0]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn operator_eigenfunctions() {
        let g = grid();
        let xi = g.wavenumbers()[5];
        let f = Field::from_fn(&g, |x| (xi * x).cos()).unwrap();
        for &alpha in &[0.5, 1.0, 2.0, 3.3] {
            let out = apply_operator(&f, &DispersionSymbol::fractional(alpha), 1.0).unwrap();
            let expected: Vec<f64> = f.values().iter().map(|v| xi.powf(alpha) * v).collect();
            assert!(rel_max_err(out.values(), &expected) < 1e-12);
        }
        let out = apply_operator(&f, &DispersionSymbol::fractional(2.0), 0.5).unwrap();
        let expected: Vec<f64> = f.values().iter().map(|v| xi * v).collect();
        assert!(rel_max_err(out.values(), &expected) < 1e-12);

        let constant = Field::from_fn(&g, |_| 2.5).unwrap();
        let out = apply_operator(&constant, &DispersionSymbol::fractional(0.8), 1.0).unwrap();
        assert!(out.max_abs() < 1e-13);
    }

    #[test]
    fn operator_overflow_reports_mode() {
        let g = Grid::new(1.0, 64).unwrap();
        let f = Field::from_fn(&g, |x| (-x * x).exp()).unwrap();
        let err = apply_operator(&f, &DispersionSymbol::fractional(400.0), 1.0).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn derivative_of_trig_and_constant() {
        let g = grid();
        let xi = g.wavenumbers()[1];
        let f = Field::from_fn(&g, |x| (xi * x).sin()).unwrap();
        let d = spectral_derivative(&f).unwrap();
        let expected: Vec<f64> = g.nodes().iter().map(|&x| xi * (xi * x).cos()).collect();
        assert!(rel_max_err(d.values(), &expected) < 1e-12);
        let d = spectral_derivative(&Field::from_fn(&g, |_| 3.0).unwrap()).unwrap();
        assert!(d.max_abs() < 1e-13);
    }

    #[test]
    fn derivative_kills_nyquist_mode() {
        let g = Grid::new(1.0, 16).unwrap();
        // cos(ξ_{N/2} x) alternates sign on the nodes
        let f = Field::new(
            &g,
            (0..16)
                .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 })
                .collect(),
        )
        .unwrap();
        assert!(spectral_derivative(&f).unwrap().max_abs() < 1e-13);
    }

    /// Sixth-order centered differences on the periodic grid.
    fn fd6(values: &[f64], h: f64) -> Vec<f64> {
        let n = values.len();
        let at = |j: isize| values[j.rem_euclid(n as isize) as usize];
        (0..n as isize)
            .map(|j| {
                (45.0 * (at(j + 1) - at(j - 1)) - 9.0 * (at(j + 2) - at(j - 2))
                    + (at(j + 3) - at(j - 3)))
                    / (60.0 * h)
            })
            .collect()
    }

    #[test]
    fn derivative_matches_finite_difference_oracle() {
        let g = Grid::new(32.0, 2048).unwrap();
        let f = Field::from_fn(&g, |x| 3.0 / (x / 2.0).cosh().powi(2)).unwrap();
        let d = spectral_derivative(&f).unwrap();
        let oracle = fd6(f.values(), g.spacing());
        let dev = d
            .values()
            .iter()
            .zip(&oracle)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(dev < 1e-6, "max deviation {dev}");
    }

    #[test]
    fn roundtrip_identity() {
        let g = Grid::new(3.0, 128).unwrap();
        let f = Field::from_fn(&g, |x| (1.3 * x).sin() + 0.2 * (x * x).cos() + 0.1 * x).unwrap();
        let back = inverse_transform(&g, &forward_transform(&f)).unwrap();
        assert!(back.distance(&f) <= 1e-13 * f.norm());
    }

    #[test]
    fn field_rejects_bad_samples() {
        let g = Grid::new(1.0, 4).unwrap();
        assert!(matches!(
            Field::new(&g, vec![0.0; 3]),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            Field::new(&g, vec![0.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite { index: 1, .. })
        ));
    }
}
