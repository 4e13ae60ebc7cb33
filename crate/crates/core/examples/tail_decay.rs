//! Algebraic tails: fits `|φ(x)| ~ x^k` over `(l/8, l/4)` and compares with
//! the whole-line rate `k = −(1 + α)`.

use fkdv::analysis::{decay_exponent, default_decay_window};
use fkdv::extrapolation::{accelerated_solve, ExtrapolationConfig};
use fkdv::petviashvili::ProblemSpec;
use fkdv::spectral::{DispersionSymbol, Grid};

fn main() -> fkdv::Result<()> {
    let l = 1024.0;
    let grid = Grid::new(l, 1 << 14)?;
    println!("alpha  exponent   -(1+alpha)");
    for alpha in [0.5, 0.7, 1.0, 1.5] {
        let spec = ProblemSpec::new(grid.clone(), DispersionSymbol::fractional(alpha), 1, 1.0)?;
        let sol = accelerated_solve(&spec, &ExtrapolationConfig::default(), None)?;
        let k = decay_exponent(&sol.profile, default_decay_window(l))?;
        println!("{alpha:5}  {k:9.4}  {:9.4}", -(1.0 + alpha));
    }
    Ok(())
}
