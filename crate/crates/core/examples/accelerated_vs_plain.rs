//! Base-iteration counts of the plain Petviashvili iteration and of MPE
//! cycling with several widths, for the fKdV profile at α = 0.6.

use fkdv::extrapolation::{accelerated_solve, ExtrapolationConfig};
use fkdv::petviashvili::{solve, ProblemSpec};
use fkdv::spectral::{DispersionSymbol, Grid};

fn main() -> fkdv::Result<()> {
    let grid = Grid::new(256.0, 4096)?;
    let spec = ProblemSpec::new(grid, DispersionSymbol::fractional(0.6), 1, 1.0)?;

    let plain = solve(&spec, None)?;
    println!(
        "plain   {:4} iterations, residual {:.2e}",
        plain.report.iterations,
        plain.report.final_residual().unwrap()
    );
    for mw in [1, 2, 3, 4, 6, 8] {
        let sol = accelerated_solve(&spec, &ExtrapolationConfig::new(mw), None)?;
        println!(
            "mw = {mw}  {:4} iterations in {:3} cycles, residual {:.2e}",
            sol.report.iterations,
            sol.report.cycles,
            sol.report.final_residual().unwrap()
        );
    }

    // residual per cycle, mw = 6
    let sol = accelerated_solve(&spec, &ExtrapolationConfig::default(), None)?;
    println!("\ncycle  |1 - m|     residual");
    for (i, (m, r)) in sol
        .report
        .m_history
        .iter()
        .zip(&sol.report.residual_history)
        .enumerate()
    {
        println!("{:5}  {:.3e}  {:.3e}", i + 1, (1.0 - m).abs(), r);
    }
    Ok(())
}
