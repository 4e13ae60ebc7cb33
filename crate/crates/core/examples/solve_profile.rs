//! Computes gKdV solitary waves (α = 2) and compares them with the closed form
//! `A sech^{2/p}(p √c x / 2)`, `A = (c (p+1)(p+2)/2)^{1/p}`.
//!
//! ```text
//! cargo run --release --example solve_profile -- [alpha] [p] [c]
//! ```
//! With arguments, solves that single case and prints the profile as CSV.

use fkdv::analysis::gkdv_amplitude;
use fkdv::extrapolation::{accelerated_solve, ExtrapolationConfig};
use fkdv::petviashvili::ProblemSpec;
use fkdv::spectral::{DispersionSymbol, Field, Grid};

fn main() -> fkdv::Result<()> {
    let grid = Grid::new(256.0, 4096)?;
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();

    if let [alpha, p, c] = args[..] {
        let spec = ProblemSpec::new(grid, DispersionSymbol::fractional(alpha), p as u32, c)?;
        let sol = accelerated_solve(&spec, &ExtrapolationConfig::default(), None)?;
        eprintln!(
            "amplitude {:.12}, {} iterations, {:?}",
            sol.amplitude, sol.report.iterations, sol.report.converged_by
        );
        print!("{}", fkdv::cli::profile_csv(&sol.profile, &[]));
        return Ok(());
    }

    println!(" p    c     amplitude        exact            sup error   iterations");
    for p in 1..=3u32 {
        for c in [0.5, 1.0, 2.0] {
            let spec = ProblemSpec::new(grid.clone(), DispersionSymbol::fractional(2.0), p, c)?;
            let sol = accelerated_solve(&spec, &ExtrapolationConfig::default(), None)?;
            let a = gkdv_amplitude(p, c);
            let k = p as f64 * c.sqrt() / 2.0;
            let exact = Field::from_fn(&grid, |x| a * (k * x).cosh().powf(-2.0 / p as f64))?;
            println!(
                "{p:2} {c:4.1}  {:.12}  {a:.12}  {:.2e}    {}",
                sol.amplitude,
                (&sol.profile - &exact).max_abs(),
                sol.report.iterations
            );
        }
    }
    Ok(())
}
