//! Profiles at the existence limit `α = p/(p+2)`, where the waves are most
//! peaked. Prints amplitude, residual and the spectral tail of each profile.

use fkdv::extrapolation::{accelerated_solve, ExtrapolationConfig};
use fkdv::petviashvili::ProblemSpec;
use fkdv::spectral::{DispersionSymbol, Grid};

fn main() -> fkdv::Result<()> {
    let grid = Grid::new(256.0, 4096)?;
    println!(" p  alpha     amplitude    residual   iterations  |coef| at N/4");
    for p in 1..=4u32 {
        let alpha = p as f64 / (p as f64 + 2.0);
        let spec = ProblemSpec::new(grid.clone(), DispersionSymbol::fractional(alpha), p, 1.0)?;
        let sol = accelerated_solve(&spec, &ExtrapolationConfig::default(), None)?;
        let coefficients = sol.profile.coefficients();
        println!(
            "{p:2}  {alpha:.4}  {:12.8}  {:.2e}  {:10}  {:.2e}",
            sol.amplitude,
            sol.report.final_residual().unwrap(),
            sol.report.iterations,
            coefficients[grid.size() / 4].norm()
        );
    }
    Ok(())
}
