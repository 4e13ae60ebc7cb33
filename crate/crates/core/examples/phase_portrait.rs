//! Phase portraits `(φ, φ')` of profiles for decreasing α, written as CSV
//! blocks on stdout. Smaller α gives a sharper crest.

use fkdv::analysis::phase_portrait;
use fkdv::extrapolation::{accelerated_solve, ExtrapolationConfig};
use fkdv::petviashvili::ProblemSpec;
use fkdv::spectral::{DispersionSymbol, Grid};

fn main() -> fkdv::Result<()> {
    let grid = Grid::new(64.0, 2048)?;
    println!("alpha,phi,dphi");
    for alpha in [2.0, 1.0, 0.6, 0.4] {
        let spec = ProblemSpec::new(grid.clone(), DispersionSymbol::fractional(alpha), 1, 1.0)?;
        let sol = accelerated_solve(&spec, &ExtrapolationConfig::default(), None)?;
        let portrait = phase_portrait(&sol.profile)?;
        let steepest = portrait.iter().fold(0.0f64, |m, &(_, d)| m.max(d.abs()));
        eprintln!(
            "alpha = {alpha}: amplitude {:.6}, max |phi'| {steepest:.6}",
            sol.amplitude
        );
        for (phi, dphi) in portrait.iter().filter(|(phi, _)| *phi > 1e-3) {
            println!("{alpha},{phi:.10},{dphi:.10}");
        }
    }
    Ok(())
}
