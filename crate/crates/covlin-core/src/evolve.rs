//! Fixed-step 4th-order integration of dρ/dt = −i[H,ρ] + 𝓛[ρ] with
//! built-in health diagnostics, plus the closed-form oracles the
//! verification suites compare trajectories against.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::generators::{GeneratorSpec, QBMParams};
use crate::lattice::{hermitize, hermiticity_defect, min_eigenvalue, DensityMatrix, Grid, Representation};
use crate::states::{measure, ObservableSet};

/// Integration settings; the free Hamiltonian is p̂²/2M, spectral in the
/// momentum representation.
#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    pub mass: f64,
    pub include_free_hamiltonian: bool,
    pub record_every: usize,
    /// Off by default and never used in verification runs: trace drift is
    /// itself a diagnostic.
    pub renormalize_trace: bool,
    /// Lattice index pairs whose matrix elements are recorded each sample.
    pub coherence_points: Vec<(usize, usize)>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: 1e-3,
            t_final: 1.0,
            mass: 1.0,
            include_free_hamiltonian: false,
            record_every: 10,
            renormalize_trace: false,
            coherence_points: Vec::new(),
        }
    }
}

/// Observable time series plus per-sample health diagnostics.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub observables: Vec<ObservableSet>,
    pub trace_drift: Vec<f64>,
    pub hermiticity_drift: Vec<f64>,
    pub min_eigenvalues: Vec<f64>,
    pub final_state: DensityMatrix,
}

impl TrajectoryRecord {
    pub fn max_trace_drift(&self) -> f64 {
        self.trace_drift.iter().cloned().fold(0.0, f64::max)
    }
    pub fn max_hermiticity_drift(&self) -> f64 {
        self.hermiticity_drift.iter().cloned().fold(0.0, f64::max)
    }
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
    /// All diagnostics within the standard run-health tolerances.
    pub fn healthy(&self) -> bool {
        self.max_trace_drift() <= 1e-9
            && self.max_hermiticity_drift() <= 1e-10
            && self.min_eigenvalue() >= -1e-8
    }
}

/// Exact pure-dissipator decay of the (x, x+s) matrix element:
/// `exp(−λ(1 − e^{−αs²/4}) t)`.
pub fn analytic_offdiagonal_factor(lambda: f64, alpha: f64, s: f64, t: f64) -> f64 {
    (-lambda * (1.0 - (-alpha * s * s / 4.0).exp()) * t).exp()
}

/// Moment-closure solution of d⟨p²⟩/dt = λ̄ − 4λ̄ᾱ⟨p²⟩ (ħ = 1):
/// `1/(4ᾱ) + (p2₀ − 1/(4ᾱ)) e^{−4λ̄ᾱt}`.
pub fn qbm_second_moment_prediction(p: QBMParams, p2_0: f64, t: f64) -> f64 {
    let stat = 1.0 / (4.0 * p.alpha_bar);
    stat + (p2_0 - stat) * (-4.0 * p.lambda_bar * p.alpha_bar * t).exp()
}

/// Evolve `ρ0` under the dissipator (if any) and optional free Hamiltonian
/// with a classical explicit 4th-order one-step method.
pub fn evolve(
    grid: &Grid,
    rho0: &DensityMatrix,
    spec: Option<&GeneratorSpec>,
    cfg: &EvolutionConfig,
) -> Result<TrajectoryRecord> {
    grid.check_dim(rho0)?;
    if let Some(s) = spec {
        if s.grid() != grid {
            return Err(Error::GridMismatch {
                expected: grid.n_points(),
                got: s.grid().n_points(),
            });
        }
    }
    if !(cfg.dt > 0.0) || !(cfg.t_final > 0.0) || cfg.dt > cfg.t_final {
        return Err(invalid(format!(
            "need 0 < dt <= t_final, got dt = {}, t_final = {}",
            cfg.dt, cfg.t_final
        )));
    }
    if !(cfg.mass > 0.0) {
        return Err(invalid(format!("mass must be positive, got {}", cfg.mass)));
    }
    if cfg.record_every == 0 {
        return Err(invalid("record_every must be >= 1"));
    }
    for &(j, k) in &cfg.coherence_points {
        if j >= grid.n_points() || k >= grid.n_points() {
            return Err(invalid(format!(
                "coherence point ({j}, {k}) outside the {}-point grid",
                grid.n_points()
            )));
        }
    }
    let p_max = grid
        .p_values()
        .iter()
        .fold(0.0f64, |m, p| m.max(p.abs()));
    let h_radius = if cfg.include_free_hamiltonian {
        p_max * p_max / (2.0 * cfg.mass)
    } else {
        0.0
    };
    let rate = spec.map(|s| s.rate_bound()).unwrap_or(0.0);
    let stiffness = cfg.dt * (rate + h_radius);
    if stiffness > 0.1 {
        return Err(invalid(format!(
            "stability bound violated: dt·(rate + H radius) = {stiffness:.3} > 0.1"
        )));
    }

    let n = grid.n_points();
    let kinetic: Vec<f64> = grid
        .p_values()
        .iter()
        .map(|&p| p * p / (2.0 * cfg.mass))
        .collect();
    let derivative = |m: &Array2<C64>| -> Array2<C64> {
        let mut acc = match spec {
            Some(s) => s.apply_raw(m),
            None => Array2::<C64>::zeros((n, n)),
        };
        if cfg.include_free_hamiltonian {
            let rt = grid.conjugate_to_momentum(m);
            let mut h = Array2::<C64>::zeros((n, n));
            for a in 0..n {
                for b in 0..n {
                    // −i[H, ρ] is element-wise in the momentum representation
                    h[[a, b]] = rt[[a, b]] * C64::new(0.0, -(kinetic[a] - kinetic[b]));
                }
            }
            acc += &grid.conjugate_to_position(&h);
            hermitize(&mut acc);
        }
        acc
    };

    let pos0 = grid.to_position_representation(rho0)?;
    let mut m = pos0.entries().clone();
    let n_steps = (cfg.t_final / cfg.dt).round().max(1.0) as usize;

    let mut times = Vec::new();
    let mut observables = Vec::new();
    let mut trace_drift = Vec::new();
    let mut hermiticity_drift = Vec::new();
    let mut min_eigenvalues = Vec::new();

    let mut record = |m: &Array2<C64>, t: f64| -> Result<()> {
        let state = DensityMatrix::from_parts_unchecked(m.clone(), Representation::Position);
        let obs = measure(&state, grid, cfg.mass, &cfg.coherence_points)?;
        times.push(t);
        trace_drift.push((obs.trace - C64::new(1.0, 0.0)).norm());
        hermiticity_drift.push(hermiticity_defect(m));
        min_eigenvalues.push(min_eigenvalue(m));
        observables.push(obs);
        Ok(())
    };
    record(&m, 0.0)?;

    for step in 1..=n_steps {
        let k1 = derivative(&m);
        let k2 = derivative(&(&m + &k1.mapv(|z| z * (cfg.dt / 2.0))));
        let k3 = derivative(&(&m + &k2.mapv(|z| z * (cfg.dt / 2.0))));
        let k4 = derivative(&(&m + &k3.mapv(|z| z * cfg.dt)));
        let sixth = cfg.dt / 6.0;
        for ((a, (b, c)), (d, e)) in m
            .iter_mut()
            .zip(k1.iter().zip(k2.iter()))
            .zip(k3.iter().zip(k4.iter()))
        {
            *a += sixth * (b + 2.0 * c + 2.0 * d + e);
        }
        let tr: C64 = m.diag().sum();
        if !tr.re.is_finite() || !tr.im.is_finite() {
            return Err(Error::NumericalFailure {
                step,
                message: "non-finite trace encountered".into(),
            });
        }
        if cfg.renormalize_trace {
            m.mapv_inplace(|z| z / tr.re);
        }
        if step % cfg.record_every == 0 || step == n_steps {
            record(&m, step as f64 * cfg.dt)?;
        }
    }

    let final_state = DensityMatrix::from_parts_unchecked(m, Representation::Position);
    Ok(TrajectoryRecord {
        times,
        observables,
        trace_drift,
        hermiticity_drift,
        min_eigenvalues,
        final_state,
    })
}

/// Least-squares slope of `y` against `t`.
pub fn linear_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = ts.iter().zip(ys).map(|(&t, &y)| (t - mt) * (y - my)).sum();
    let den: f64 = ts.iter().map(|&t| (t - mt) * (t - mt)).sum();
    num / den
}
