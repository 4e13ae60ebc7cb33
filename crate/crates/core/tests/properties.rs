use fkdv::analysis::fit_power_law;
use fkdv::extrapolation::mpe_extrapolate_vectors;
use fkdv::petviashvili::{petviashvili_step, ProblemSpec};
use fkdv::spectral::{apply_operator, eval_symbol, DispersionSymbol, Field, Grid};
use proptest::prelude::*;

fn symbol() -> impl Strategy<Value = DispersionSymbol> {
    prop_oneof![
        (0.2f64..2.5).prop_map(DispersionSymbol::fractional),
        (0.0f64..2.0).prop_map(DispersionSymbol::whitham),
    ]
}

/// Smooth periodic field from a few random low modes.
fn smooth_field(grid: &Grid, modes: &[(f64, f64)]) -> Field {
    let k = std::f64::consts::PI / grid.half_length();
    Field::from_fn(grid, |x| {
        modes
            .iter()
            .enumerate()
            .map(|(j, (a, b))| {
                let w = (j + 1) as f64 * k;
                a * (w * x).cos() + b * (w * x).sin()
            })
            .sum()
    })
    .unwrap()
}

fn modes() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbols_are_even_and_nonnegative(s in symbol(), xi in -200.0f64..200.0) {
        let a = eval_symbol(&s, xi).unwrap();
        prop_assert_eq!(a, eval_symbol(&s, -xi).unwrap());
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn operator_is_linear(s in symbol(), f in modes(), g in modes(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let grid = Grid::new(10.0, 64).unwrap();
        let (f, g) = (smooth_field(&grid, &f), smooth_field(&grid, &g));
        let combined = &(a * &f) + &(b * &g);
        let lhs = apply_operator(&combined, &s, 1.0).unwrap();
        let rhs = &(a * &apply_operator(&f, &s, 1.0).unwrap()) + &(b * &apply_operator(&g, &s, 1.0).unwrap());
        prop_assert!(lhs.distance(&rhs) <= 1e-11 * (1.0 + lhs.norm()));
    }

    #[test]
    fn operator_powers_compose(s in symbol(), f in modes(), t in 0.1f64..1.0, u in 0.1f64..1.0) {
        let grid = Grid::new(10.0, 64).unwrap();
        let f = smooth_field(&grid, &f);
        let twice = apply_operator(&apply_operator(&f, &s, t).unwrap(), &s, u).unwrap();
        let once = apply_operator(&f, &s, t + u).unwrap();
        prop_assert!(twice.distance(&once) <= 1e-11 * (1.0 + once.norm()));
    }

    #[test]
    fn operator_preserves_evenness(s in symbol(), f in modes()) {
        let grid = Grid::new(10.0, 64).unwrap();
        let f = smooth_field(&grid, &f);
        let reflected = Field::from_fn(&grid, |x| {
            let n = grid.size();
            let j = ((x + grid.half_length()) / grid.spacing()).round() as usize;
            f.values()[(n - j) % n]
        }).unwrap();
        let even = 0.5 * &(&f + &reflected);
        let out = apply_operator(&even, &s, 1.0).unwrap().into_values();
        let n = out.len();
        for j in 1..n {
            prop_assert!((out[j] - out[n - j]).abs() <= 1e-11 * (1.0 + out[j].abs()));
        }
    }

    #[test]
    fn petviashvili_step_is_scale_invariant(
        alpha in 0.5f64..2.0,
        p in 1u32..4,
        f in modes(),
        lambda in 0.1f64..10.0,
    ) {
        let grid = Grid::new(10.0, 64).unwrap();
        let bump = smooth_field(&grid, &f).map(|v| v + 3.0);
        let spec = ProblemSpec::new(grid, DispersionSymbol::fractional(alpha), p, 1.0).unwrap();
        let a = petviashvili_step(&bump, &spec).unwrap();
        let b = petviashvili_step(&bump.scaled(lambda), &spec).unwrap();
        prop_assert!(a.distance(&b) <= 1e-9 * a.norm());
    }

    #[test]
    fn mpe_is_exact_on_diagonal_affine_iterations(
        diag in prop::collection::vec(-0.9f64..0.9, 1..6),
        shift in prop::collection::vec(-2.0f64..2.0, 6),
        start in prop::collection::vec(-5.0f64..5.0, 6),
    ) {
        let n = diag.len();
        let fixed: Vec<f64> = (0..n).map(|i| shift[i] / (1.0 - diag[i])).collect();
        let mut x: Vec<f64> = start[..n].to_vec();
        let mut seq = vec![x.clone()];
        for _ in 0..=n {
            x = (0..n).map(|i| diag[i] * x[i] + shift[i]).collect();
            seq.push(x.clone());
        }
        let refs: Vec<&[f64]> = seq.iter().map(|v| v.as_slice()).collect();
        let s = mpe_extrapolate_vectors(&refs).unwrap();
        let err: f64 = s.iter().zip(&fixed).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = fixed.iter().map(|a| a * a).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-8 * (1.0 + scale), "err {err}");
    }

    #[test]
    fn mpe_commutes_with_affine_maps(
        seq in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 4), 5),
        a in prop_oneof![-4.0f64..-0.25, 0.25f64..4.0],
        v in prop::collection::vec(-3.0f64..3.0, 4),
    ) {
        let refs: Vec<&[f64]> = seq.iter().map(|x| x.as_slice()).collect();
        let Ok(base) = mpe_extrapolate_vectors(&refs) else { return Ok(()) };
        let mapped: Vec<Vec<f64>> = seq
            .iter()
            .map(|x| x.iter().zip(&v).map(|(xi, vi)| a * xi + vi).collect())
            .collect();
        let mrefs: Vec<&[f64]> = mapped.iter().map(|x| x.as_slice()).collect();
        let out = mpe_extrapolate_vectors(&mrefs).unwrap();
        let scale = 1.0 + base.iter().fold(0.0f64, |m, b| m.max(b.abs())) * a.abs();
        for ((o, b), vi) in out.iter().zip(&base).zip(&v) {
            prop_assert!((o - (a * b + vi)).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn power_law_fit_recovers_exact_data(
        a in 0.1f64..10.0,
        b in -2.0f64..3.0,
        xs in prop::collection::btree_set(1u32..400, 3..12),
    ) {
        let points: Vec<(f64, f64)> = xs.iter().map(|&k| {
            let x = k as f64 / 100.0;
            (x, a * x.powf(b))
        }).collect();
        let fit = fit_power_law(&points).unwrap();
        prop_assert!((fit.a - a).abs() <= 1e-8 * a);
        prop_assert!((fit.b - b).abs() <= 1e-8);
        prop_assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn profile_files_round_trip(f in modes(), l in 1.0f64..500.0, log_n in 2u32..9) {
        let grid = Grid::new(l, 1 << log_n).unwrap();
        let field = smooth_field(&grid, &f);
        let text = fkdv::cli::profile_csv(&field, &[]);
        prop_assert_eq!(fkdv::cli::parse_profile(&text).unwrap(), field);
    }
}
