use nalgebra::{DMatrix, SymmetricEigen};

use super::Trajectory;
use crate::error::{MuhsError, Result};
use crate::hierarchy::check_positive;
use crate::spectral::{apply_a, derivative, PeriodicGrid, RealField};

/// Dense spectral matrix of `-d^2/dx^2`, Nyquist mode included.
fn neg_laplacian(grid: PeriodicGrid) -> DMatrix<f64> {
    let n = grid.n();
    let mut d = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = derivative(&RealField::from_samples(grid, e).expect("sized"), 2);
        for i in 0..n {
            d[(i, j)] = -col.samples()[i];
        }
    }
    (&d + d.transpose()) * 0.5
}

fn spectrum_with(lap: &DMatrix<f64>, m: &RealField, count: usize) -> Result<Vec<f64>> {
    let n = m.n();
    if count == 0 || count > n / 4 {
        return Err(MuhsError::Precondition(format!(
            "eigenvalue count must lie in 1..={}, got {count}",
            n / 4
        )));
    }
    check_positive(m)?;
    let w: Vec<f64> = m.samples().iter().map(|v| 1.0 / v.sqrt()).collect();
    let s = DMatrix::from_fn(n, n, |i, j| w[i] * lap[(i, j)] * w[j]);
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev.truncate(count);
    Ok(ev)
}

/// The `count` smallest values `sigma = -lambda` with `-psi_xx = sigma m psi` periodic.
pub fn hill_spectrum(m: &RealField, count: usize) -> Result<Vec<f64>> {
    spectrum_with(&neg_laplacian(m.grid()), m, count)
}

/// Largest relative change of the first `count` nonzero Hill eigenvalues of
/// `m = Au(t)` across the stored snapshots.
pub fn isospectrality_drift(traj: &Trajectory, count: usize) -> Result<f64> {
    let grid = traj.initial().grid();
    let lap = neg_laplacian(grid);
    let first = spectrum_with(&lap, &apply_a(traj.initial()), count + 1)?;
    let mut worst: f64 = 0.0;
    for snap in &traj.snapshots[1..] {
        let ev = spectrum_with(&lap, &apply_a(&snap.u), count + 1)?;
        for (a, b) in first[1..].iter().zip(&ev[1..]) {
            worst = worst.max(((b - a) / a).abs());
        }
    }
    Ok(worst)
}
