//! Minimal polynomial extrapolation (MPE) and its cycled use around the
//! Petviashvili iteration.
//!
//! Given iterates `ψ_0, …, ψ_{mw+1}` with differences `u_j = ψ_{j+1} − ψ_j`,
//! MPE finds `c_0, …, c_{mw−1}` minimizing `‖Σ_{j<mw} c_j u_j + u_mw‖`,
//! sets `c_mw = 1` and returns `Σ_{j≤mw} γ_j ψ_j` with `γ_j = c_j / Σ_i c_i`.
//! The least-squares problem is solved by Householder QR with column
//! pivoting; columns beyond the numerical rank get zero coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::petviashvili::{
    initial_guess, IterationReport, PetviashviliOperator, ProblemSpec, ProfileSolution,
};
use crate::spectral::Field;

/// Relative size of a pivot below which a column is treated as dependent.
const RANK_TOL: f64 = 1e-12;

/// Controls for cycled extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtrapolationConfig {
    /// Width of extrapolation: each cycle takes `mw + 1` base steps.
    pub mw: usize,
    /// Reject extrapolants whose residual exceeds that of the last base iterate.
    pub safeguard: bool,
}

impl Default for ExtrapolationConfig {
    fn default() -> Self {
        ExtrapolationConfig {
            mw: 6,
            safeguard: true,
        }
    }
}

impl ExtrapolationConfig {
    pub fn new(mw: usize) -> Self {
        ExtrapolationConfig {
            mw,
            ..Default::default()
        }
    }

    pub fn without_safeguard(mut self) -> Self {
        self.safeguard = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mw == 0 {
            return Err(Error::Contract(
                "extrapolation width mw must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// MPE weights `γ_0..γ_mw` for `mw + 2` iterates given as plain vectors.
pub fn mpe_weights(iterates: &[&[f64]]) -> Result<Vec<f64>> {
    if iterates.len() < 3 {
        return Err(Error::Contract(format!(
            "MPE needs at least 3 iterates (mw >= 1), got {}",
            iterates.len()
        )));
    }
    let dim = iterates[0].len();
    if iterates.iter().any(|v| v.len() != dim) {
        return Err(Error::Contract(
            "MPE iterates have different lengths".into(),
        ));
    }
    let mw = iterates.len() - 2;
    let differences: Vec<Vec<f64>> = iterates
        .windows(2)
        .map(|w| w[1].iter().zip(w[0]).map(|(a, b)| a - b).collect())
        .collect();
    let rhs: Vec<f64> = differences[mw].iter().map(|v| -v).collect();
    let mut coefficients = least_squares(&differences[..mw], &rhs);
    coefficients.push(1.0);
    let total: f64 = coefficients.iter().sum();
    let scale = coefficients.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if !(total.abs() > 1e-14 * scale) {
        return Err(Error::DegenerateCycle);
    }
    Ok(coefficients.into_iter().map(|c| c / total).collect())
}

/// MPE extrapolant of `mw + 2` vectors.
pub fn mpe_extrapolate_vectors(iterates: &[&[f64]]) -> Result<Vec<f64>> {
    let weights = mpe_weights(iterates)?;
    let dim = iterates[0].len();
    let mut out = vec![0.0; dim];
    for (w, psi) in weights.iter().zip(iterates) {
        for (o, v) in out.iter_mut().zip(psi.iter()) {
            *o += w * v;
        }
    }
    Ok(out)
}

/// MPE extrapolant of the fields `ψ_0..ψ_{mw+1}`.
pub fn mpe_extrapolate(iterates: &[Field]) -> Result<Field> {
    let first = iterates
        .first()
        .ok_or_else(|| Error::Contract("MPE needs at least 3 iterates, got 0".into()))?;
    for f in &iterates[1..] {
        first.check_same_grid(f)?;
    }
    let slices: Vec<&[f64]> = iterates.iter().map(|f| f.values()).collect();
    Field::new(first.grid(), mpe_extrapolate_vectors(&slices)?)
}

/// Minimizes `‖Σ_j x_j columns[j] − rhs‖` by pivoted Householder QR.
///
/// Columns found dependent (pivot below `RANK_TOL` of the largest) receive
/// zero coefficients.
fn least_squares(columns: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let ncols = columns.len();
    let nrows = rhs.len();
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut b = rhs.to_vec();
    let mut perm: Vec<usize> = (0..ncols).collect();
    let mut norms: Vec<f64> = a.iter().map(|c| dot(c, c)).collect();
    let steps = ncols.min(nrows);
    let mut rank = 0;
    let mut r_first = 0.0;

    for k in 0..steps {
        // pivot on the largest remaining column norm (recomputed exactly)
        for j in k..ncols {
            norms[j] = a[j][k..].iter().map(|v| v * v).sum();
        }
        let pivot = (k..ncols)
            .max_by(|&i, &j| norms[i].total_cmp(&norms[j]))
            .expect("nonempty pivot range");
        a.swap(k, pivot);
        norms.swap(k, pivot);
        perm.swap(k, pivot);

        let alpha_norm = norms[k].sqrt();
        if k == 0 {
            r_first = alpha_norm;
        }
        if alpha_norm == 0.0 || alpha_norm <= RANK_TOL * r_first {
            break;
        }
        // Householder vector v = x + sign(x_k)‖x‖ e_k
        let sign = if a[k][k] >= 0.0 { 1.0 } else { -1.0 };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] += sign * alpha_norm;
        let vnorm_sq = dot(&v, &v);
        if vnorm_sq == 0.0 {
            break;
        }
        let reflect = |col: &mut [f64]| {
            let s = 2.0 * dot(&v, col) / vnorm_sq;
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= s * vi;
            }
        };
        for col in a.iter_mut().skip(k) {
            reflect(&mut col[k..]);
        }
        reflect(&mut b[k..]);
        rank = k + 1;
    }

    // back substitution on the leading rank×rank block of R
    let mut x_perm = vec![0.0; ncols];
    for i in (0..rank).rev() {
        let mut s = b[i];
        for j in i + 1..rank {
            s -= a[j][i] * x_perm[j];
        }
        x_perm[i] = s / a[i][i];
    }
    let mut x = vec![0.0; ncols];
    for (k, &col) in perm.iter().enumerate() {
        x[col] = x_perm[k];
    }
    x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Petviashvili iteration accelerated by cycled MPE.
///
/// Each cycle starts from the accepted iterate `ψ_0`, takes `mw + 1` base
/// steps and extrapolates. With the safeguard on, the extrapolant is kept
/// only if its residual does not exceed that of `ψ_{mw+1}`; an extrapolant
/// with an undefined stabilizing factor, or a degenerate cycle, always falls
/// back to `ψ_{mw+1}`. The stopping controls are evaluated once per cycle on
/// the accepted iterate; `report.iterations` counts base steps and never
/// exceeds `max_iter`.
pub fn accelerated_solve(
    spec: &ProblemSpec,
    config: &ExtrapolationConfig,
    guess: Option<&Field>,
) -> Result<ProfileSolution> {
    config.validate()?;
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
    while report.iterations < spec.max_iter {
        let steps = (config.mw + 1).min(spec.max_iter - report.iterations);
        let mut cycle = Vec::with_capacity(steps + 1);
        cycle.push(current.field.clone());
        let mut last = op.step(&current)?;
        report.iterations += 1;
        cycle.push(last.clone());
        for _ in 1..steps {
            let eval = op.evaluate(last)?;
            last = op.step(&eval)?;
            report.iterations += 1;
            cycle.push(last.clone());
        }
        let plain = op.evaluate(last)?;

        // a cycle cut short by max_iter is not extrapolated
        let extrapolated = if steps == config.mw + 1 {
            mpe_extrapolate(&cycle)
        } else {
            Err(Error::DegenerateCycle)
        };
        let accepted = match extrapolated {
            Ok(candidate) => {
                let candidate = op.evaluate(candidate)?;
                let usable = candidate.m.is_finite() && candidate.m > 0.0;
                if usable && (!config.safeguard || candidate.residual <= plain.residual) {
                    candidate
                } else {
                    plain
                }
            }
            Err(Error::DegenerateCycle) => plain,
            Err(e) => return Err(e),
        };

        let diff = accepted.field.distance(&current.field);
        current = accepted;
        if let Some(reason) =
            report.record(current.m, diff, current.residual, spec.tol, spec.stopping)
        {
            report.converged_by = reason;
            break;
        }
    }
    Ok(ProfileSolution::new(current.field, spec.clone(), report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iteration_budget_is_a_hard_cap() {
        let grid = crate::spectral::Grid::new(64.0, 512).unwrap();
        let spec = ProblemSpec::new(
            grid,
            crate::spectral::DispersionSymbol::fractional(1.5),
            1,
            1.0,
        )
        .unwrap()
        .with_max_iter(10);
        let sol = accelerated_solve(&spec, &ExtrapolationConfig::default(), None).unwrap();
        assert_eq!(sol.report.iterations, 10);
        assert_eq!(sol.report.cycles, 2);
        assert!(!sol.converged());
    }

    #[test]
    fn constant_sequence_is_returned() {
        let v = [1.5, -2.0, 3.0];
        let seq: Vec<&[f64]> = vec![&v; 5];
        let s = mpe_extrapolate_vectors(&seq).unwrap();
        assert_eq!(s, v.to_vec());
    }

    #[test]
    fn aitken_on_scalar_geometric_sequence() {
        let (s, r, d): (f64, f64, f64) = (2.0, 0.7, -1.3);
        let seq: Vec<Vec<f64>> = (0..3).map(|j| vec![s + r.powi(j) * d]).collect();
        let refs: Vec<&[f64]> = seq.iter().map(|v| v.as_slice()).collect();
        let out = mpe_extrapolate_vectors(&refs).unwrap();
        assert!((out[0] - s).abs() < 1e-14);
    }

    #[test]
    fn exact_on_two_dimensional_affine_iteration() {
        // x_{n+1} = diag(0.5, -0.3) x_n + b; fixed point by direct solve of (I − A) x = b
        let b = [1.0, 2.0];
        let fixed = [b[0] / (1.0 - 0.5), b[1] / (1.0 + 0.3)];
        let mut x = vec![7.0, -4.0];
        let mut seq = vec![x.clone()];
        for _ in 0..3 {
            x = vec![0.5 * x[0] + b[0], -0.3 * x[1] + b[1]];
            seq.push(x.clone());
        }
        let refs: Vec<&[f64]> = seq.iter().map(|v| v.as_slice()).collect();
        let out = mpe_extrapolate_vectors(&refs).unwrap();
        assert!((out[0] - fixed[0]).abs() < 1e-12);
        assert!((out[1] - fixed[1]).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_differences_use_truncated_solve() {
        // scalar geometric sequence with mw = 3: minimal polynomial degree 1
        let (s, r, d): (f64, f64, f64) = (-1.0, 0.4, 2.0);
        let seq: Vec<Vec<f64>> = (0..5).map(|j| vec![s + r.powi(j) * d]).collect();
        let refs: Vec<&[f64]> = seq.iter().map(|v| v.as_slice()).collect();
        let out = mpe_extrapolate_vectors(&refs).unwrap();
        assert!((out[0] - s).abs() < 1e-12);
    }

    #[test]
    fn too_few_or_ragged_iterates() {
        let a = [1.0];
        assert!(matches!(mpe_weights(&[&a, &a]), Err(Error::Contract(_))));
        let b = [1.0, 2.0];
        assert!(matches!(
            mpe_weights(&[&a, &b, &a]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn degenerate_normalization() {
        // ψ: 0, 1, 2 (constant step): c_0 u_0 = −u_1 gives c_0 = −1, Σc = 0
        let seq = [[0.0], [1.0], [2.0]];
        let refs: Vec<&[f64]> = seq.iter().map(|v| v.as_slice()).collect();
        assert!(matches!(mpe_weights(&refs), Err(Error::DegenerateCycle)));
    }

    #[test]
    fn least_squares_matches_normal_equations() {
        let cols = vec![vec![1.0, 1.0, 1.0, 1.0], vec![0.0, 1.0, 2.0, 3.0]];
        let rhs = [1.0, 2.9, 5.1, 7.0];
        let x = least_squares(&cols, &rhs);
        // normal equations: [4 6; 6 14] x = [16, 34.1]
        let det = 4.0 * 14.0 - 36.0;
        let x0 = (14.0 * 16.0 - 6.0 * 34.1) / det;
        let x1 = (4.0 * 34.1 - 6.0 * 16.0) / det;
        assert!((x[0] - x0).abs() < 1e-12 && (x[1] - x1).abs() < 1e-12);
    }
}
