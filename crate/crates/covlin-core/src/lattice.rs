//! Periodic 1-D position/momentum lattice and the exact unitary actions
//! (cyclic translations, commensurate momentum boosts, spectral Fourier
//! conjugation) everything else is built on.
//!
//! Internal units are dimensionless with ħ = 1; the two lattices satisfy
//! `dx * dq * n = 2π` exactly, so translations and boosts are exact lattice
//! unitaries rather than approximations.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};

/// Hermiticity tolerance enforced at `DensityMatrix` construction.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace tolerance enforced at `DensityMatrix` construction.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalue floor enforced at `DensityMatrix` construction.
pub const POSITIVITY_TOL: f64 = -1e-10;

/// Which basis the entries of a [`DensityMatrix`] are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Position,
    Momentum,
}

/// Periodic position lattice with its conjugate momentum lattice.
///
/// `x_j = -L/2 + j dx`, `p_k = (k - n/2) dq` with `dq = 2π/L`, so the
/// unitary DFT `F[k,j] = e^{-i p_k x_j}/√n` maps between the two.
#[derive(Clone)]
pub struct Grid {
    n_points: usize,
    length: f64,
    dx: f64,
    dq: f64,
    x_values: Vec<f64>,
    p_values: Vec<f64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid")
            .field("n_points", &self.n_points)
            .field("length", &self.length)
            .field("dx", &self.dx)
            .field("dq", &self.dq)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n_points == other.n_points && self.length == other.length
    }
}

/// Build a grid; `n_points` must be even and at least 8, `length` positive.
pub fn make_grid(n_points: usize, length: f64) -> Result<Grid> {
    Grid::new(n_points, length)
}

impl Grid {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < 8 || n_points % 2 != 0 {
            return Err(invalid(format!(
                "n_points must be even and >= 8, got {n_points}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(invalid(format!("length must be positive, got {length}")));
        }
        let n = n_points;
        let dx = length / n as f64;
        let dq = 2.0 * PI / length;
        let x_values: Vec<f64> = (0..n).map(|j| -length / 2.0 + j as f64 * dx).collect();
        let p_values: Vec<f64> = (0..n)
            .map(|k| (k as f64 - n as f64 / 2.0) * dq)
            .collect();
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(n);
        let fft_inv = planner.plan_fft_inverse(n);
        Ok(Grid {
            n_points,
            length,
            dx,
            dq,
            x_values,
            p_values,
            fft_fwd,
            fft_inv,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dq(&self) -> f64 {
        self.dq
    }
    pub fn x_values(&self) -> &[f64] {
        &self.x_values
    }
    pub fn p_values(&self) -> &[f64] {
        &self.p_values
    }

    /// Minimal-image displacement `x_j - x_k` folded into `[-L/2, L/2)`.
    ///
    /// Every translation-covariant kernel uses this: it is a function of
    /// `(j - k) mod n`, which is what makes covariance under cyclic shifts
    /// an exact lattice identity.
    pub fn min_image(&self, j: usize, k: usize) -> f64 {
        self.min_image_steps(j as i64 - k as i64) as f64 * self.dx
    }

    /// Minimal-image index difference folded into `[-n/2, n/2)`.
    pub fn min_image_steps(&self, diff: i64) -> i64 {
        let n = self.n_points as i64;
        (diff.rem_euclid(n) + n / 2).rem_euclid(n) - n / 2
    }

    /// Round `q` to boost steps, rejecting non-commensurate transfers.
    pub fn commensurate_steps(&self, q: f64) -> Result<i64> {
        let steps = (q / self.dq).round();
        if (q - steps * self.dq).abs() > 1e-9 * self.dq.max(q.abs()) {
            return Err(invalid(format!(
                "momentum transfer {q} is not a multiple of dq = {}",
                self.dq
            )));
        }
        Ok(steps as i64)
    }

    /// Dense spectral momentum operator `F† diag(p) F` in the position basis.
    pub fn momentum_matrix(&self) -> Array2<C64> {
        let n = self.n_points;
        let f = self.fourier_matrix();
        let mut pf = Array2::<C64>::zeros((n, n));
        for k in 0..n {
            let pk = C64::new(self.p_values[k], 0.0);
            for j in 0..n {
                pf[[k, j]] = pk * f[[k, j]];
            }
        }
        let fd = f.mapv(|z| z.conj()).reversed_axes();
        fd.dot(&pf)
    }

    /// Unitary DFT matrix `F[k,j] = e^{-i p_k x_j}/√n`.
    pub fn fourier_matrix(&self) -> Array2<C64> {
        let n = self.n_points;
        let norm = 1.0 / (n as f64).sqrt();
        Array2::from_shape_fn((n, n), |(k, j)| {
            (C64::new(0.0, -self.p_values[k] * self.x_values[j])).exp() * norm
        })
    }

    /// `F m F†` via FFT: the momentum-representation image of `m`.
    pub(crate) fn conjugate_to_momentum(&self, m: &Array2<C64>) -> Array2<C64> {
        self.fourier_conjugate(m, true)
    }

    /// `F† m F`: back to the position representation.
    pub(crate) fn conjugate_to_position(&self, m: &Array2<C64>) -> Array2<C64> {
        self.fourier_conjugate(m, false)
    }

    // F = c D W D with D = diag((-1)^j), W the standard unitary DFT and |c| = 1,
    // so F m F† = D W (D m D) W† D and the global phase cancels.
    fn fourier_conjugate(&self, m: &Array2<C64>, to_momentum: bool) -> Array2<C64> {
        let n = self.n_points;
        assert_eq!(m.dim(), (n, n));
        let mut out = Array2::<C64>::zeros((n, n));
        for j in 0..n {
            for k in 0..n {
                let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
                out[[j, k]] = m[[j, k]] * sign;
            }
        }
        let (first, second): (&Arc<dyn Fft<f64>>, &Arc<dyn Fft<f64>>) = if to_momentum {
            (&self.fft_fwd, &self.fft_inv)
        } else {
            (&self.fft_inv, &self.fft_fwd)
        };
        // columns: out <- W out (or W† out)
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            for j in 0..n {
                buf[j] = out[[j, k]];
            }
            first.process(&mut buf);
            for j in 0..n {
                out[[j, k]] = buf[j];
            }
        }
        // rows: out <- out W† (or out W)
        for mut row in out.rows_mut() {
            let slice = row.as_slice_mut().expect("standard layout");
            second.process(slice);
        }
        let scale = 1.0 / n as f64;
        for j in 0..n {
            for k in 0..n {
                let sign = if (j + k) % 2 == 0 { scale } else { -scale };
                out[[j, k]] *= sign;
            }
        }
        out
    }

    /// Cyclic lattice translation `ρ -> T_a ρ T_a†` with `a = steps · dx`.
    pub fn position_shift(&self, rho: &DensityMatrix, steps: i64) -> Result<DensityMatrix> {
        self.check_dim(rho)?;
        if rho.representation() != Representation::Position {
            return Err(invalid("position_shift expects the position representation"));
        }
        let shifted = shift_matrix(rho.entries(), steps);
        Ok(DensityMatrix::from_parts_unchecked(
            shifted,
            Representation::Position,
        ))
    }

    /// Exact momentum boost `ρ -> e^{iqx̂} ρ e^{-iqx̂}` for grid-commensurate `q`.
    pub fn momentum_boost(&self, rho: &DensityMatrix, q: f64) -> Result<DensityMatrix> {
        self.check_dim(rho)?;
        if rho.representation() != Representation::Position {
            return Err(invalid("momentum_boost expects the position representation"));
        }
        let steps = self.commensurate_steps(q)?;
        let boosted = self.boost_matrix(rho.entries(), steps);
        Ok(DensityMatrix::from_parts_unchecked(
            boosted,
            Representation::Position,
        ))
    }

    /// Phase conjugation on raw entries; `q = steps · dq`.
    pub(crate) fn boost_matrix(&self, m: &Array2<C64>, steps: i64) -> Array2<C64> {
        let n = self.n_points;
        let q = steps as f64 * self.dq;
        let phases: Vec<C64> = (0..n)
            .map(|j| C64::new(0.0, q * self.x_values[j]).exp())
            .collect();
        Array2::from_shape_fn((n, n), |(j, k)| m[[j, k]] * phases[j] * phases[k].conj())
    }

    pub fn to_momentum_representation(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_dim(rho)?;
        match rho.representation() {
            Representation::Momentum => Ok(rho.clone()),
            Representation::Position => Ok(DensityMatrix::from_parts_unchecked(
                self.conjugate_to_momentum(rho.entries()),
                Representation::Momentum,
            )),
        }
    }

    pub fn to_position_representation(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_dim(rho)?;
        match rho.representation() {
            Representation::Position => Ok(rho.clone()),
            Representation::Momentum => Ok(DensityMatrix::from_parts_unchecked(
                self.conjugate_to_position(rho.entries()),
                Representation::Position,
            )),
        }
    }

    pub(crate) fn check_dim(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.n_points {
            return Err(Error::GridMismatch {
                expected: self.n_points,
                got: rho.dim(),
            });
        }
        Ok(())
    }
}

/// Cyclic index shift of a raw matrix: `out[(j+s)%n, (k+s)%n] = m[j,k]`.
pub(crate) fn shift_matrix(m: &Array2<C64>, steps: i64) -> Array2<C64> {
    let n = m.nrows() as i64;
    let s = steps.rem_euclid(n);
    let mut out = Array2::<C64>::zeros((n as usize, n as usize));
    for j in 0..n {
        let jj = ((j + s) % n) as usize;
        for k in 0..n {
            let kk = ((k + s) % n) as usize;
            out[[jj, kk]] = m[[j as usize, k as usize]];
        }
    }
    out
}

/// The statistical operator ρ on the lattice: complex Hermitian, unit trace,
/// positive semidefinite within construction tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Array2<C64>,
    representation: Representation,
}

impl DensityMatrix {
    /// Validating constructor.
    pub fn new(entries: Array2<C64>, representation: Representation) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(invalid("density matrix must be square"));
        }
        let dm = DensityMatrix {
            entries,
            representation,
        };
        let herm = dm.hermiticity_defect();
        if herm > HERMITICITY_TOL {
            return Err(invalid(format!(
                "not Hermitian: max |ρ - ρ†| = {herm:.3e}"
            )));
        }
        let tr = dm.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(invalid(format!("trace is {tr}, expected 1")));
        }
        let min = dm.min_eigenvalue();
        if min < POSITIVITY_TOL {
            return Err(invalid(format!(
                "not positive semidefinite: min eigenvalue {min:.3e}"
            )));
        }
        Ok(dm)
    }

    /// For outputs of exact unitary maps whose inputs were already validated.
    pub(crate) fn from_parts_unchecked(entries: Array2<C64>, representation: Representation) -> Self {
        DensityMatrix {
            entries,
            representation,
        }
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }
    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }
    pub fn representation(&self) -> Representation {
        self.representation
    }
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    /// `Tr ρ²`, evaluated as `Σ |ρ_jk|²` (valid for Hermitian ρ).
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.entries)
    }

    /// Maximally mixed state `I/n`.
    pub fn maximally_mixed(n: usize) -> Self {
        let w = C64::new(1.0 / n as f64, 0.0);
        DensityMatrix {
            entries: Array2::from_diag(&Array1::from_elem(n, w)),
            representation: Representation::Position,
        }
    }
}

pub(crate) fn hermiticity_defect(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut max = 0.0f64;
    for j in 0..n {
        for k in j..n {
            let d = (m[[j, k]] - m[[k, j]].conj()).norm();
            if d > max {
                max = d;
            }
        }
    }
    max
}

pub(crate) fn min_eigenvalue(m: &Array2<C64>) -> f64 {
    let (vals, _) = m
        .eigh(UPLO::Lower)
        .expect("eigh on Hermitian matrix cannot fail");
    vals.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Replace `m` by its Hermitian part `(m + m†)/2`.
pub(crate) fn hermitize(m: &mut Array2<C64>) {
    let n = m.nrows();
    for j in 0..n {
        m[[j, j]] = C64::new(m[[j, j]].re, 0.0);
        for k in (j + 1)..n {
            let avg = 0.5 * (m[[j, k]] + m[[k, j]].conj());
            m[[j, k]] = avg;
            m[[k, j]] = avg.conj();
        }
    }
}
