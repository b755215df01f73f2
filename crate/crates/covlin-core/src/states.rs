//! Initial-state constructors (Gaussian packets, cat states) and the
//! observable set every verification suite consumes.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{invalid, Result};
use crate::lattice::{DensityMatrix, Grid, Representation};

/// Scalar observables of a state, plus sampled position-representation
/// matrix elements.
#[derive(Debug, Clone)]
pub struct ObservableSet {
    pub trace: C64,
    pub purity: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub second_moment_p: f64,
    pub kinetic_energy: f64,
    /// Samples `(x, x', ρ(x, x'))` at exact lattice points.
    pub coherence_samples: Vec<(f64, f64, C64)>,
}

fn normalized_pure_state(grid: &Grid, psi: Array1<C64>) -> Result<DensityMatrix> {
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(invalid("state amplitude vanished on the grid"));
    }
    let psi = psi.mapv(|z| z / norm);
    let n = grid.n_points();
    let entries = Array2::from_shape_fn((n, n), |(j, k)| psi[j] * psi[k].conj());
    DensityMatrix::new(entries, Representation::Position)
}

fn gaussian_amplitude(grid: &Grid, x0: f64, p0: f64, sigma: f64) -> Array1<C64> {
    Array1::from_shape_fn(grid.n_points(), |j| {
        let x = grid.x_values()[j];
        let arg = -(x - x0).powi(2) / (4.0 * sigma * sigma);
        C64::new(arg.exp(), 0.0) * C64::new(0.0, p0 * x).exp()
    })
}

/// Pure Gaussian packet `ψ(x) ∝ exp(−(x−x0)²/4σ² + i p0 x)`.
///
/// The packet center must sit at least 4σ inside the boundary and the
/// width must be resolved by at least two lattice spacings.
pub fn gaussian_packet(grid: &Grid, x0: f64, p0: f64, sigma: f64) -> Result<DensityMatrix> {
    check_packet_geometry(grid, x0, sigma)?;
    normalized_pure_state(grid, gaussian_amplitude(grid, x0, p0, sigma))
}

fn check_packet_geometry(grid: &Grid, x0: f64, sigma: f64) -> Result<()> {
    if !(sigma >= 2.0 * grid.dx()) {
        return Err(invalid(format!(
            "sigma = {sigma} under-resolved: need sigma >= 2 dx = {}",
            2.0 * grid.dx()
        )));
    }
    let half = grid.length() / 2.0;
    if x0 - 4.0 * sigma < -half || x0 + 4.0 * sigma > half {
        return Err(invalid(format!(
            "packet at x0 = {x0} with sigma = {sigma} is within 4 sigma of the boundary"
        )));
    }
    Ok(())
}

/// Equal symmetric superposition of two packets at `±separation/2`.
///
/// Requires `separation ≥ 6σ` so the off-diagonal coherence lobe is a
/// clean probe of long-distance decay.
pub fn cat_state(grid: &Grid, separation: f64, sigma: f64) -> Result<DensityMatrix> {
    if !(separation >= 6.0 * sigma) {
        return Err(invalid(format!(
            "separation = {separation} must be at least 6 sigma = {}",
            6.0 * sigma
        )));
    }
    let half = separation / 2.0;
    check_packet_geometry(grid, half, sigma)?;
    check_packet_geometry(grid, -half, sigma)?;
    let psi = gaussian_amplitude(grid, half, 0.0, sigma)
        + gaussian_amplitude(grid, -half, 0.0, sigma);
    normalized_pure_state(grid, psi)
}

/// Nearest lattice index to position `x`.
pub fn nearest_index(grid: &Grid, x: f64) -> usize {
    let j = ((x + grid.length() / 2.0) / grid.dx()).round() as i64;
    j.rem_euclid(grid.n_points() as i64) as usize
}

/// Evaluate every observable; momentum moments go through the momentum
/// representation of the state.
pub fn measure(
    rho: &DensityMatrix,
    grid: &Grid,
    mass: f64,
    coherence_points: &[(usize, usize)],
) -> Result<ObservableSet> {
    grid.check_dim(rho)?;
    let pos = grid.to_position_representation(rho)?;
    let mom = grid.to_momentum_representation(rho)?;
    let trace = pos.trace();
    let purity = pos.purity();

    let mut mean_x = 0.0;
    let mut mean_x2 = 0.0;
    for j in 0..grid.n_points() {
        let w = pos.entries()[[j, j]].re;
        let x = grid.x_values()[j];
        mean_x += w * x;
        mean_x2 += w * x * x;
    }
    let mut mean_p = 0.0;
    let mut second_moment_p = 0.0;
    for k in 0..grid.n_points() {
        let w = mom.entries()[[k, k]].re;
        let p = grid.p_values()[k];
        mean_p += w * p;
        second_moment_p += w * p * p;
    }
    let coherence_samples = coherence_points
        .iter()
        .map(|&(j, k)| {
            (
                grid.x_values()[j],
                grid.x_values()[k],
                pos.entries()[[j, k]],
            )
        })
        .collect();
    Ok(ObservableSet {
        trace,
        purity,
        mean_x,
        mean_p,
        var_x: mean_x2 - mean_x * mean_x,
        second_moment_p,
        kinetic_energy: second_moment_p / (2.0 * mass),
        coherence_samples,
    })
}
