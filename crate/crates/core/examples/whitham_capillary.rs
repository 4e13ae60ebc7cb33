//! Solitary waves of the Whitham equation with surface tension γ = 1,
//! symbol `sqrt((1 + γξ²) tanh ξ / ξ)`, for a few speeds.

use fkdv::extrapolation::{accelerated_solve, ExtrapolationConfig};
use fkdv::petviashvili::ProblemSpec;
use fkdv::spectral::{DispersionSymbol, Grid};

fn main() -> fkdv::Result<()> {
    let grid = Grid::new(128.0, 4096)?;
    let symbol = DispersionSymbol::whitham(1.0);
    println!("symbol {}", symbol.describe());
    println!("   c    amplitude     min value     residual   iterations");
    for c in [0.25, 0.5, 1.0, 2.0] {
        let spec = ProblemSpec::new(grid.clone(), symbol, 1, c)?;
        let sol = accelerated_solve(&spec, &ExtrapolationConfig::default(), None)?;
        println!(
            "{c:5.2}  {:12.8}  {:12.4e}  {:.2e}  {:10}",
            sol.amplitude,
            sol.min_value,
            sol.report.final_residual().unwrap(),
            sol.report.iterations
        );
    }
    Ok(())
}
