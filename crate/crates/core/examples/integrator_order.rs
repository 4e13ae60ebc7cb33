//! Self-convergence of the composed implicit-midpoint integrator: errors
//! against a dt/64 reference for a sequence of step sizes.

use fkdv::evolution::{self_convergence_order, EvolutionSpec};
use fkdv::spectral::{DispersionSymbol, Field, Grid};

fn main() -> fkdv::Result<()> {
    let grid = Grid::new(32.0, 256)?;
    let u0 = Field::from_fn(&grid, |x| 0.5 * (-x * x / 16.0).exp())?;
    println!("alpha  dt      error(dt)   error(dt/2)  order");
    for alpha in [0.7, 1.0, 2.0] {
        for dt in [0.2, 0.1, 0.05] {
            let spec = EvolutionSpec::new(
                grid.clone(),
                DispersionSymbol::fractional(alpha),
                1,
                dt,
                0.8,
            )?;
            let est = self_convergence_order(&u0, &spec)?;
            println!(
                "{alpha:5}  {dt:5.3}  {:.3e}   {:.3e}    {:.3}",
                est.error_coarse, est.error_fine, est.order
            );
        }
    }
    Ok(())
}
