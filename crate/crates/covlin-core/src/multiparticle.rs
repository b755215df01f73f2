//! Two-particle tensor-grid machinery: product states, per-particle
//! dissipators, the center-of-mass partial trace on the half-step lattice,
//! and the amplification residuals for the localization and QBM families.
//!
//! The center-of-mass coordinate X = (x1+x2)/2 lives on a 2N-point lattice
//! of spacing dx/2 and the same period L, so the traced state is indexed by
//! u = j1 + j2 directly. Because the relative index difference is
//! constrained to be equal on both sides, traced matrices vanish whenever
//! u and v have opposite parity; the surviving parity blocks are states on
//! ordinary N-point lattices of spacing dx.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::generators::{
    grw_generator, mass_scaled_params, momentum_transfer_generator, qbm_generator, GRWParams,
    GeneratorSpec, MomentumTransferDistribution, Variant,
};
use crate::lattice::{DensityMatrix, Grid, Representation};

/// Per-particle grids larger than this need [`product_state_large`];
/// the two-particle matrix is `n⁴` complex entries.
pub const MAX_POINTS_PER_PARTICLE: usize = 64;

/// Which tensor factor a per-particle dissipator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Particle {
    First,
    Second,
    Both,
}

/// Two distinguishable particles on a shared grid.
#[derive(Debug, Clone)]
pub struct TwoParticleState {
    grid: Grid,
    /// N²×N² entries indexed by `(j1·N + j2, k1·N + k2)`.
    entries: Array2<C64>,
    m1: f64,
    m2: f64,
}

impl TwoParticleState {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }
    pub fn masses(&self) -> (f64, f64) {
        (self.m1, self.m2)
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Standard partial trace onto one particle.
    pub fn reduced_state(&self, which: Particle) -> Result<DensityMatrix> {
        let n = self.grid.n_points();
        let mut out = Array2::<C64>::zeros((n, n));
        match which {
            Particle::First => {
                for j in 0..n {
                    for k in 0..n {
                        let mut acc = C64::new(0.0, 0.0);
                        for r in 0..n {
                            acc += self.entries[[j * n + r, k * n + r]];
                        }
                        out[[j, k]] = acc;
                    }
                }
            }
            Particle::Second => {
                for j in 0..n {
                    for k in 0..n {
                        let mut acc = C64::new(0.0, 0.0);
                        for r in 0..n {
                            acc += self.entries[[r * n + j, r * n + k]];
                        }
                        out[[j, k]] = acc;
                    }
                }
            }
            Particle::Both => {
                return Err(invalid("reduced_state needs a single particle"));
            }
        }
        DensityMatrix::new(out, Representation::Position)
    }
}

/// Tensor product of two single-particle states with the given masses.
pub fn product_state(
    grid: &Grid,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    m1: f64,
    m2: f64,
) -> Result<TwoParticleState> {
    if grid.n_points() > MAX_POINTS_PER_PARTICLE {
        return Err(Error::UnsupportedConfiguration(format!(
            "{} points per particle exceeds the default cap of {MAX_POINTS_PER_PARTICLE}; \
             use product_state_large to override",
            grid.n_points()
        )));
    }
    product_state_large(grid, rho1, rho2, m1, m2)
}

/// [`product_state`] without the memory cap.
pub fn product_state_large(
    grid: &Grid,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    m1: f64,
    m2: f64,
) -> Result<TwoParticleState> {
    grid.check_dim(rho1)?;
    grid.check_dim(rho2)?;
    if !(m1 > 0.0) || !(m2 > 0.0) {
        return Err(invalid("particle masses must be positive"));
    }
    let a = grid.to_position_representation(rho1)?;
    let b = grid.to_position_representation(rho2)?;
    // positivity and trace are inherited from the validated factors
    let n = grid.n_points();
    let mut entries = Array2::<C64>::zeros((n * n, n * n));
    for j1 in 0..n {
        for j2 in 0..n {
            for k1 in 0..n {
                for k2 in 0..n {
                    entries[[j1 * n + j2, k1 * n + k2]] =
                        a.entries()[[j1, k1]] * b.entries()[[j2, k2]];
                }
            }
        }
    }
    Ok(TwoParticleState {
        grid: grid.clone(),
        entries,
        m1,
        m2,
    })
}

/// Sum of single-particle dissipators on the chosen tensor factors.
///
/// Supported variants: the c-number families (element-wise multiplier acts
/// per factor) and the dissipative QBM generator (applied slice-wise along
/// each factor).
pub fn apply_per_particle(
    spec: &GeneratorSpec,
    state: &TwoParticleState,
    which: Particle,
) -> Result<Array2<C64>> {
    if spec.grid() != state.grid() {
        return Err(Error::GridMismatch {
            expected: state.grid().n_points(),
            got: spec.grid().n_points(),
        });
    }
    let n = state.grid().n_points();
    let nn = n * n;
    let on_first = matches!(which, Particle::First | Particle::Both);
    let on_second = matches!(which, Particle::Second | Particle::Both);

    if let Some(mult) = spec.cnumber_multiplier() {
        let mut out = Array2::<C64>::zeros((nn, nn));
        for j1 in 0..n {
            for j2 in 0..n {
                for k1 in 0..n {
                    for k2 in 0..n {
                        let mut c = C64::new(0.0, 0.0);
                        if on_first {
                            c += mult[[j1, k1]];
                        }
                        if on_second {
                            c += mult[[j2, k2]];
                        }
                        out[[j1 * n + j2, k1 * n + k2]] =
                            c * state.entries[[j1 * n + j2, k1 * n + k2]];
                    }
                }
            }
        }
        return Ok(out);
    }
    if spec.variant() != Variant::DissipativeQbm {
        return Err(Error::UnsupportedConfiguration(format!(
            "per-particle application is not defined for the {} variant",
            spec.variant()
        )));
    }

    let mut out = Array2::<C64>::zeros((nn, nn));
    let mut slice = Array2::<C64>::zeros((n, n));
    if on_first {
        // act on (j1, k1) for each fixed (j2, k2)
        for j2 in 0..n {
            for k2 in 0..n {
                for j1 in 0..n {
                    for k1 in 0..n {
                        slice[[j1, k1]] = state.entries[[j1 * n + j2, k1 * n + k2]];
                    }
                }
                let d = spec.apply_linear(&slice);
                for j1 in 0..n {
                    for k1 in 0..n {
                        out[[j1 * n + j2, k1 * n + k2]] += d[[j1, k1]];
                    }
                }
            }
        }
    }
    if on_second {
        for j1 in 0..n {
            for k1 in 0..n {
                for j2 in 0..n {
                    for k2 in 0..n {
                        slice[[j2, k2]] = state.entries[[j1 * n + j2, k1 * n + k2]];
                    }
                }
                let d = spec.apply_linear(&slice);
                for j2 in 0..n {
                    for k2 in 0..n {
                        out[[j1 * n + j2, k1 * n + k2]] += d[[j2, k2]];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Grid of the center-of-mass coordinate: 2N points at half the spacing,
/// same period.
pub fn cm_grid(grid: &Grid) -> Result<Grid> {
    Grid::new(2 * grid.n_points(), grid.length())
}

/// Partial trace over the relative coordinate of a two-particle matrix
/// (state or derivative): entries with `j1 − j2 = k1 − k2 = r` are summed
/// over `r`, landing on the center-of-mass lattice index `u = j1 + j2`.
///
/// Only the equal-mass case keeps X on-lattice; unequal masses are
/// rejected.
pub fn partial_trace_relative(
    grid: &Grid,
    entries: &Array2<C64>,
    m1: f64,
    m2: f64,
) -> Result<Array2<C64>> {
    if m1 != m2 {
        return Err(Error::UnsupportedConfiguration(
            "relative partial trace requires equal masses".into(),
        ));
    }
    let n = grid.n_points();
    if entries.dim() != (n * n, n * n) {
        return Err(invalid("entry dimensions do not match the grid"));
    }
    let mut out = Array2::<C64>::zeros((2 * n, 2 * n));
    for j1 in 0..n {
        for j2 in 0..n {
            let u = j1 + j2;
            let r = j1 as i64 - j2 as i64;
            for k1 in 0..n {
                let k2i = k1 as i64 - r;
                if k2i < 0 || k2i >= n as i64 {
                    continue;
                }
                let k2 = k2i as usize;
                out[[u, k1 + k2]] += entries[[j1 * n + j2, k1 * n + k2]];
            }
        }
    }
    Ok(out)
}

/// Partial trace of a valid state, returned as a validated density matrix
/// on the center-of-mass grid.
pub fn partial_trace_relative_state(state: &TwoParticleState) -> Result<DensityMatrix> {
    let raw = partial_trace_relative(&state.grid, &state.entries, state.m1, state.m2)?;
    DensityMatrix::new(raw, Representation::Position)
}

/// Apply a single-particle generator to each parity block of a traced
/// center-of-mass matrix.
///
/// Traced matrices are checkerboard (zero across parities); each parity
/// block is an N-point lattice of spacing dx, so the N-point spectral
/// machinery applies verbatim (the odd block's half-step offset only
/// contributes phases that cancel in every element-wise momentum kernel).
pub fn apply_blockwise(spec: &GeneratorSpec, cm_entries: &Array2<C64>) -> Result<Array2<C64>> {
    let n = spec.grid().n_points();
    if cm_entries.dim() != (2 * n, 2 * n) {
        return Err(invalid(
            "blockwise application expects a center-of-mass matrix of twice the grid size",
        ));
    }
    let mut out = Array2::<C64>::zeros((2 * n, 2 * n));
    let mut block = Array2::<C64>::zeros((n, n));
    for parity in 0..2 {
        for a in 0..n {
            for b in 0..n {
                block[[a, b]] = cm_entries[[2 * a + parity, 2 * b + parity]];
            }
        }
        let d = spec.apply_linear(&block);
        for a in 0..n {
            for b in 0..n {
                out[[2 * a + parity, 2 * b + parity]] = d[[a, b]];
            }
        }
    }
    Ok(out)
}

/// Mean total momentum of a traced center-of-mass matrix, evaluated per
/// parity block (the fine-lattice momentum representation of a
/// checkerboard matrix aliases; the blocks do not).
pub fn cm_mean_momentum(grid: &Grid, cm_entries: &Array2<C64>) -> Result<f64> {
    let n = grid.n_points();
    if cm_entries.dim() != (2 * n, 2 * n) {
        return Err(invalid("expected a center-of-mass matrix of twice the grid size"));
    }
    let mut mean = 0.0;
    let mut block = Array2::<C64>::zeros((n, n));
    for parity in 0..2 {
        for a in 0..n {
            for b in 0..n {
                block[[a, b]] = cm_entries[[2 * a + parity, 2 * b + parity]];
            }
        }
        let tilde = grid.conjugate_to_momentum(&block);
        for (k, &p) in grid.p_values().iter().enumerate() {
            mean += p * tilde[[k, k]].re;
        }
    }
    Ok(mean)
}

/// Max-norm of `Tr_rel(𝓛_per-particle[ρ]) − 𝓛_CM[Tr_rel ρ]` for a pair of
/// c-number generators (per-particle and center-of-mass side supplied by
/// the caller).
pub fn cnumber_amplification_residual(
    single: &GeneratorSpec,
    cm: &GeneratorSpec,
    probe: &TwoParticleState,
) -> Result<f64> {
    if cm.grid().n_points() != 2 * probe.grid().n_points() {
        return Err(invalid("center-of-mass generator must live on the doubled grid"));
    }
    let deriv = apply_per_particle(single, probe, Particle::Both)?;
    let lhs = partial_trace_relative(&probe.grid, &deriv, probe.m1, probe.m2)?;
    let traced = partial_trace_relative(&probe.grid, &probe.entries, probe.m1, probe.m2)?;
    let rhs = cm
        .cnumber_multiplier()
        .ok_or_else(|| {
            Error::UnsupportedConfiguration("center-of-mass generator must be c-number".into())
        })?
        * &traced;
    Ok((&lhs - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Localization amplification at N = 2: the traced per-particle action
/// equals the same generator at rate 2λ on the center-of-mass lattice.
pub fn grw_amplification_residual(
    lambda: f64,
    alpha: f64,
    probe: &TwoParticleState,
) -> Result<f64> {
    let single = grw_generator(&probe.grid, GRWParams { lambda, alpha })?;
    let cmg = cm_grid(&probe.grid)?;
    let cm = grw_generator(&cmg, GRWParams { lambda: 2.0 * lambda, alpha })?;
    cnumber_amplification_residual(&single, &cm, probe)
}

/// Same residual for an arbitrary momentum-transfer distribution; the
/// center-of-mass side carries rate 2λ and the identical distribution
/// (both lattices share dq).
pub fn transfer_amplification_residual(
    lambda: f64,
    dist: &MomentumTransferDistribution,
    probe: &TwoParticleState,
) -> Result<f64> {
    let single = momentum_transfer_generator(&probe.grid, lambda, dist)?;
    let cmg = cm_grid(&probe.grid)?;
    let cm = momentum_transfer_generator(&cmg, 2.0 * lambda, dist)?;
    cnumber_amplification_residual(&single, &cm, probe)
}

/// QBM amplification at N = 2 with mass-scaled parameters: per-particle
/// parameters from mass m, center-of-mass parameters from mass 2m.
pub fn qbm_amplification_residual(
    m0: f64,
    lambda0: f64,
    alpha0: f64,
    probe: &TwoParticleState,
) -> Result<f64> {
    if probe.m1 != probe.m2 {
        return Err(Error::UnsupportedConfiguration(
            "QBM amplification requires equal masses".into(),
        ));
    }
    let m = probe.m1;
    let single = qbm_generator(&probe.grid, mass_scaled_params(m, m0, lambda0, alpha0)?)?;
    let cm = qbm_generator(&probe.grid, mass_scaled_params(2.0 * m, m0, lambda0, alpha0)?)?;
    let deriv = apply_per_particle(&single, probe, Particle::Both)?;
    let lhs = partial_trace_relative(&probe.grid, &deriv, probe.m1, probe.m2)?;
    let traced = partial_trace_relative(&probe.grid, &probe.entries, probe.m1, probe.m2)?;
    let rhs = apply_blockwise(&cm, &traced)?;
    Ok((&lhs - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max))
}
