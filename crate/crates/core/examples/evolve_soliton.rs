//! Evolves a computed α = 0.7 solitary wave to t = 10 and reports how well
//! it keeps its shape, speed and invariants.

use fkdv::evolution::{evolve, measure_speed, EvolutionSpec};
use fkdv::extrapolation::{accelerated_solve, ExtrapolationConfig};
use fkdv::petviashvili::ProblemSpec;
use fkdv::spectral::{DispersionSymbol, Grid};

fn main() -> fkdv::Result<()> {
    let grid = Grid::new(128.0, 4096)?;
    let symbol = DispersionSymbol::fractional(0.7);
    let spec = ProblemSpec::new(grid.clone(), symbol, 1, 1.0)?.with_tol(1e-12);
    let profile = accelerated_solve(&spec, &ExtrapolationConfig::default(), None)?.profile;

    let evo = EvolutionSpec::new(grid, symbol, 1, 0.01, 10.0)?.with_snapshot_stride(100);
    let traj = evolve(&profile, &evo)?;

    println!("   t    amplitude        peak        M                  E");
    for i in 0..traj.len() {
        let d = traj.diagnostics[i];
        println!(
            "{:5.1}  {:.12}  {:9.6}  {:.15}  {:.15}",
            traj.times[i], traj.amplitude_series[i], traj.peak_position_series[i], d.m, d.e
        );
    }
    println!("\namplitude drift {:.2e}", traj.relative_amplitude_drift());
    println!("speed           {:.10}", measure_speed(&traj)?);
    println!("mass drift      {:.2e}", traj.relative_mass_drift());
    println!("energy drift    {:.2e}", traj.relative_energy_drift());
    Ok(())
}
