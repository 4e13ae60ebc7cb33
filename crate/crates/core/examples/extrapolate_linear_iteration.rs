//! Minimal polynomial extrapolation on a plain vector sequence: a slowly
//! converging linear iteration `x ← A x + b` whose matrix has three distinct
//! eigenvalues is solved exactly by one cycle of width 3.

use fkdv::extrapolation::mpe_extrapolate_vectors;

fn main() -> fkdv::Result<()> {
    let eigen = [0.95, 0.95, -0.8, 0.5, 0.5, 0.5];
    let b = [1.0, -2.0, 0.5, 3.0, 0.0, 1.5];
    let fixed: Vec<f64> = b.iter().zip(&eigen).map(|(bi, l)| bi / (1.0 - l)).collect();

    let mut x = vec![0.0; 6];
    let mut seq = vec![x.clone()];
    for _ in 0..4 {
        x = x
            .iter()
            .zip(&eigen)
            .zip(&b)
            .map(|((xi, l), bi)| l * xi + bi)
            .collect();
        seq.push(x.clone());
    }
    let dist = |v: &[f64]| -> f64 {
        v.iter()
            .zip(&fixed)
            .map(|(a, c)| (a - c).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let refs: Vec<&[f64]> = seq.iter().map(|v| v.as_slice()).collect();
    let s = mpe_extrapolate_vectors(&refs)?;
    println!("error of last iterate   {:.3e}", dist(seq.last().unwrap()));
    println!("error of extrapolant    {:.3e}", dist(&s));
    Ok(())
}
