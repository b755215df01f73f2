//! Scenario execution: builds library objects from a [`Config`], runs the
//! simulation or verification, and persists artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use covlin_core::*;

use crate::config::*;
use crate::error::{CliError, Result};
use crate::snapshot::emit_snapshot;

/// Environment variable overriding every other output-directory source.
pub const OUT_DIR_ENV: &str = "COVLIN_OUT_DIR";

/// Output directory priority: env var, then `--out`, then `[output]`.
pub fn resolve_out_dir(cli_out: Option<&Path>, cfg: &Config) -> PathBuf {
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    if let Some(out) = cli_out {
        return out.to_path_buf();
    }
    cfg.output
        .directory
        .as_deref()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn build_grid(cfg: &Config) -> Result<Grid> {
    let g = require_section(&cfg.grid, "grid")?;
    Ok(Grid::new(g.n_points, g.length)?)
}

fn build_generator(grid: &Grid, cfg: &Config) -> Result<GeneratorSpec> {
    let g = require_section(&cfg.generator, "generator")?;
    let spec = match g.variant {
        GeneratorVariant::Grw => grw_generator(
            grid,
            GRWParams {
                lambda: require(g.lambda, "generator", "lambda")?,
                alpha: require(g.alpha, "generator", "alpha")?,
            },
        )?,
        GeneratorVariant::MomentumTransfer => {
            let lambda = require(g.lambda, "generator", "lambda")?;
            let dist = match &g.kernel {
                Some(kernel) => MomentumTransferDistribution::new(grid, kernel)?,
                None => MomentumTransferDistribution::gaussian(
                    grid,
                    require(g.alpha, "generator", "alpha")?,
                    require(g.k_max, "generator", "k_max")?,
                )?,
            };
            momentum_transfer_generator(grid, lambda, &dist)?
        }
        GeneratorVariant::CollisionalZeroEnergy => {
            let kernel = g
                .kernel
                .as_ref()
                .ok_or_else(|| CliError::Config("[generator] missing field 'kernel'".into()))?;
            collisional_zero_energy_generator(grid, kernel)?
        }
        GeneratorVariant::LinearBoltzmann => {
            let kernel = g
                .kernel
                .as_ref()
                .ok_or_else(|| CliError::Config("[generator] missing field 'kernel'".into()))?;
            linear_boltzmann_generator(
                grid,
                kernel,
                require(g.mass_m, "generator", "mass_m")?,
                require(g.gas_mass, "generator", "gas_mass")?,
                require(g.beta, "generator", "beta")?,
                g.zero_energy,
            )?
        }
        GeneratorVariant::DissipativeQbm => qbm_generator(
            grid,
            QBMParams {
                lambda_bar: require(g.lambda_bar, "generator", "lambda_bar")?,
                alpha_bar: require(g.alpha_bar, "generator", "alpha_bar")?,
            },
        )?,
        GeneratorVariant::BrokenFixture => broken_rate_generator(
            grid,
            GRWParams {
                lambda: require(g.lambda, "generator", "lambda")?,
                alpha: require(g.alpha, "generator", "alpha")?,
            },
        )?,
    };
    Ok(spec)
}

fn build_state(grid: &Grid, cfg: &Config) -> Result<DensityMatrix> {
    let s = require_section(&cfg.state, "state")?;
    match s.kind {
        StateKind::Gaussian => Ok(gaussian_packet(grid, s.x0, s.p0, s.sigma)?),
        StateKind::Cat => Ok(cat_state(
            grid,
            require(s.separation, "state", "separation")?,
            s.sigma,
        )?),
    }
}

fn build_evolution(cfg: &Config, kind: ScenarioKind, grid: &Grid) -> Result<EvolutionConfig> {
    let e = require_section(&cfg.evolution, "evolution")?;
    let hamiltonian_default = matches!(kind, ScenarioKind::FreeGrw);
    let mut coherence_points = e.coherence_points.clone().unwrap_or_default();
    if coherence_points.is_empty() {
        // cat scenarios default to the packet-center cross element
        if let Some(s) = &cfg.state {
            if s.kind == StateKind::Cat {
                let sep = require(s.separation, "state", "separation")?;
                coherence_points.push((
                    nearest_index(grid, -sep / 2.0),
                    nearest_index(grid, sep / 2.0),
                ));
            }
        }
    }
    Ok(EvolutionConfig {
        dt: e.dt,
        t_final: e.t_final,
        mass: e.mass,
        include_free_hamiltonian: e.include_free_hamiltonian.unwrap_or(hamiltonian_default),
        record_every: e.record_every,
        renormalize_trace: false,
        coherence_points,
    })
}

/// Deterministic pseudo-random density matrix B B† / Tr(B B†).
fn random_state(grid: &Grid, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n_points();
    let b = Array2::from_shape_fn((n, n), |_| {
        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let bd = b.mapv(|z| z.conj()).reversed_axes();
    let mut m = b.dot(&bd);
    let tr: C64 = m.diag().sum();
    m.mapv_inplace(|z| z / tr.re);
    DensityMatrix::new(m, Representation::Position).expect("random state is valid")
}

/// Shortest round-trip float formatting: deterministic and lossless.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn write_csv(path: &Path, rec: &TrajectoryRecord, with_ratio: bool) -> Result<()> {
    let n_coh = rec
        .observables
        .first()
        .map(|o| o.coherence_samples.len())
        .unwrap_or(0);
    let mut out = String::new();
    out.push_str("t,trace_re,trace_im,purity,mean_x,mean_p,var_x,p2,energy");
    for i in 0..n_coh {
        let _ = write!(out, ",coh_{i}_re,coh_{i}_im");
    }
    if with_ratio {
        out.push_str(",coherence_ratio");
    }
    out.push('\n');
    let c0 = rec
        .observables
        .first()
        .and_then(|o| o.coherence_samples.first())
        .map(|&(_, _, z)| z.norm())
        .unwrap_or(1.0);
    for (i, obs) in rec.observables.iter().enumerate() {
        let cols = [
            rec.times[i],
            obs.trace.re,
            obs.trace.im,
            obs.purity,
            obs.mean_x,
            obs.mean_p,
            obs.var_x,
            obs.second_moment_p,
            obs.kinetic_energy,
        ];
        let mut row: Vec<String> = cols.iter().map(|&v| fmt_f64(v)).collect();
        for &(_, _, z) in &obs.coherence_samples {
            row.push(fmt_f64(z.re));
            row.push(fmt_f64(z.im));
        }
        if with_ratio {
            let ratio = obs
                .coherence_samples
                .first()
                .map(|&(_, _, z)| z.norm() / c0)
                .unwrap_or(f64::NAN);
            row.push(fmt_f64(ratio));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    library_version: &'a str,
    scenario: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_seconds: Option<f64>,
    config: &'a Config,
}

fn write_manifest(out: &Path, cfg: &Config, wall: Option<f64>) -> Result<()> {
    let manifest = Manifest {
        library_version: env!("CARGO_PKG_VERSION"),
        scenario: cfg.scenario.kind.name(),
        wall_time_seconds: wall,
        config: cfg,
    };
    let text = toml::to_string(&manifest)
        .map_err(|e| CliError::Io(format!("manifest serialization: {e}")))?;
    std::fs::write(out.join("manifest.toml"), text)?;
    Ok(())
}

/// One measured invariant: name, residual, tolerance.
pub struct CheckLine {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
}

impl CheckLine {
    pub fn passed(&self) -> bool {
        self.measured <= self.tolerance
    }
}

fn write_results(out: &Path, suite: &str, lines: &[CheckLine]) -> Result<()> {
    let mut text = String::new();
    for l in lines {
        let _ = writeln!(
            text,
            "{} {}: measured {:e} tolerance {:e}",
            if l.passed() { "PASS" } else { "FAIL" },
            l.name,
            l.measured,
            l.tolerance
        );
    }
    std::fs::write(out.join(format!("results_{suite}.txt")), text)?;
    Ok(())
}

fn finish_verification(out: &Path, suite: &str, lines: Vec<CheckLine>) -> Result<()> {
    write_results(out, suite, &lines)?;
    match lines.iter().find(|l| !l.passed()) {
        Some(bad) => Err(CliError::Verification(format!(
            "{}: measured {:e} exceeds tolerance {:e}",
            bad.name, bad.measured, bad.tolerance
        ))),
        None => Ok(()),
    }
}

fn check_variant(cfg: &Config, kind: ScenarioKind, allowed: &[GeneratorVariant]) -> Result<()> {
    let g = require_section(&cfg.generator, "generator")?;
    if !allowed.contains(&g.variant) {
        return Err(CliError::Config(format!(
            "scenario '{}' does not accept generator variant '{:?}'",
            kind.name(),
            g.variant
        )));
    }
    Ok(())
}

fn simulate_evolution(cfg: &Config, out: &Path, kind: ScenarioKind) -> Result<()> {
    let started = Instant::now();
    let grid = build_grid(cfg)?;
    let spec = build_generator(&grid, cfg)?;
    let rho0 = build_state(&grid, cfg)?;
    let evo = build_evolution(cfg, kind, &grid)?;
    let rec = evolve(&grid, &rho0, Some(&spec), &evo)?;
    let with_ratio =
        kind == ScenarioKind::PureDissipator && !evo.coherence_points.is_empty();
    write_csv(&out.join("observables.csv"), &rec, with_ratio)?;
    if cfg.output.snapshot_final {
        emit_snapshot(&rec.final_state, &out.join("final_state.snap"))?;
    }
    let wall = (!cfg.scenario.reproducible).then(|| started.elapsed().as_secs_f64());
    write_manifest(out, cfg, wall)?;
    Ok(())
}

/// The five standard generator families with default parameters.
fn default_panel(grid: &Grid) -> Result<Vec<GeneratorSpec>> {
    let kernel: Vec<(i64, f64)> = vec![(1, 0.4), (-1, 0.4), (3, 0.1), (-3, 0.1)];
    let k_max = (8.0 * (2.0f64 / 2.0).sqrt() / grid.dq()).ceil() as i64;
    let dist = MomentumTransferDistribution::gaussian(grid, 2.0, k_max)?;
    Ok(vec![
        grw_generator(grid, GRWParams { lambda: 1.0, alpha: 4.0 })?,
        momentum_transfer_generator(grid, 0.7, &dist)?,
        collisional_zero_energy_generator(grid, &kernel)?,
        linear_boltzmann_generator(grid, &kernel, 1.0, 2.0, 1.0, false)?,
        qbm_generator(grid, QBMParams { lambda_bar: 1.0, alpha_bar: 0.5 })?,
    ])
}

pub fn verify_covariance(cfg: &Config, out: &Path) -> Result<()> {
    let grid = build_grid(cfg)?;
    let specs = match &cfg.generator {
        Some(_) => vec![build_generator(&grid, cfg)?],
        None => default_panel(&grid)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.scenario.seed);
    let mut lines = Vec::new();
    for spec in &specs {
        let mut worst = 0.0f64;
        for s in 0..cfg.scenario.samples as u64 {
            let rho = random_state(&grid, cfg.scenario.seed.wrapping_add(s));
            let steps = rng.random_range(1..grid.n_points() as i64);
            worst = worst.max(check_translation_covariance(spec, &rho, steps)?);
        }
        lines.push(CheckLine {
            name: format!("covariance {}", spec.variant()),
            measured: worst,
            tolerance: 1e-11,
        });
    }
    finish_verification(out, "covariance", lines)
}

pub fn verify_decay(cfg: &Config, out: &Path) -> Result<()> {
    let grid = build_grid(cfg)?;
    check_variant(cfg, ScenarioKind::PureDissipator, &[GeneratorVariant::Grw])?;
    let g = require_section(&cfg.generator, "generator")?;
    let lambda = require(g.lambda, "generator", "lambda")?;
    let alpha = require(g.alpha, "generator", "alpha")?;
    let s = require_section(&cfg.state, "state")?;
    if s.kind != StateKind::Cat {
        return Err(CliError::Config(
            "decay suite requires a cat state ([state] kind = \"cat\")".into(),
        ));
    }
    let sep = require(s.separation, "state", "separation")?;
    let rho0 = build_state(&grid, cfg)?;
    let spec = grw_generator(&grid, GRWParams { lambda, alpha })?;
    let evo = build_evolution(cfg, ScenarioKind::PureDissipator, &grid)?;
    let rec = evolve(&grid, &rho0, Some(&spec), &evo)?;
    let (j, k) = evo.coherence_points[0];
    let dist = grid.min_image(j, k);
    let c0 = rec.observables[0].coherence_samples[0].2.norm();
    let mut worst = 0.0f64;
    for (i, obs) in rec.observables.iter().enumerate() {
        let ratio = obs.coherence_samples[0].2.norm() / c0;
        let oracle = analytic_offdiagonal_factor(lambda, alpha, dist, rec.times[i]);
        worst = worst.max((ratio - oracle).abs() / oracle);
    }
    let lines = vec![
        CheckLine {
            name: format!("off-diagonal decay vs closed form (separation {sep})"),
            measured: worst,
            tolerance: 1e-8,
        },
        CheckLine {
            name: "trace drift".into(),
            measured: rec.max_trace_drift(),
            tolerance: 1e-9,
        },
        CheckLine {
            name: "hermiticity drift".into(),
            measured: rec.max_hermiticity_drift(),
            tolerance: 1e-10,
        },
        CheckLine {
            name: "negative eigenvalue excursion".into(),
            measured: (-rec.min_eigenvalue()).max(0.0),
            tolerance: 1e-8,
        },
    ];
    finish_verification(out, "decay", lines)
}

pub fn verify_amplification(cfg: &Config, out: &Path) -> Result<()> {
    let grid = build_grid(cfg)?;
    let g = cfg.generator.as_ref();
    let lambda = g.and_then(|g| g.lambda).unwrap_or(1.0);
    let alpha = g.and_then(|g| g.alpha).unwrap_or(4.0);
    let lambda_bar = g.and_then(|g| g.lambda_bar).unwrap_or(1.0);
    let alpha_bar = g.and_then(|g| g.alpha_bar).unwrap_or(0.5);
    let m0 = g.and_then(|g| g.m0).unwrap_or(1.0);
    let mass = cfg.evolution.as_ref().map(|e| e.mass).unwrap_or(1.0);

    let (a, b) = match &cfg.state {
        Some(s) if s.kind == StateKind::Gaussian => (
            gaussian_packet(&grid, s.x0, s.p0, s.sigma)?,
            gaussian_packet(&grid, -s.x0, -s.p0, s.sigma)?,
        ),
        _ => (
            gaussian_packet(&grid, -1.0, 0.3, 1.0)?,
            gaussian_packet(&grid, 0.5, -0.4, 1.0)?,
        ),
    };
    let probe = product_state(&grid, &a, &b, mass, mass)?;

    let two_point = MomentumTransferDistribution::two_point(&grid, 3)?;
    let lines = vec![
        CheckLine {
            name: "localization amplification (closed form)".into(),
            measured: grw_amplification_residual(lambda, alpha, &probe)?,
            tolerance: 1e-11,
        },
        CheckLine {
            name: "localization amplification (two-point distribution)".into(),
            measured: transfer_amplification_residual(lambda, &two_point, &probe)?,
            tolerance: 1e-11,
        },
        CheckLine {
            name: "QBM amplification (mass-scaled)".into(),
            measured: qbm_amplification_residual(m0, lambda_bar, alpha_bar, &probe)?,
            tolerance: 1e-6,
        },
    ];
    finish_verification(out, "amplification", lines)
}

fn gas_params(cfg: &Config) -> Result<GasParams> {
    let g = require_section(&cfg.gas, "gas")?;
    Ok(GasParams {
        n: g.n,
        m: g.m,
        beta: g.beta,
        k_coupling: g.k_coupling,
        m_test: g.m_test,
    })
}

pub fn verify_equivalence(cfg: &Config, out: &Path) -> Result<()> {
    let gas = gas_params(cfg)?;
    gas.validate()?;
    let q_samples = default_q_samples(&gas);
    let lines = vec![
        CheckLine {
            name: "collisional weight vs localization form".into(),
            measured: equivalence_check(&gas, &q_samples)?,
            tolerance: 1e-10,
        },
        CheckLine {
            name: "power-law Fourier coefficient vs -4/3".into(),
            measured: (power_law_fourier_coefficient() + 4.0 / 3.0).abs(),
            tolerance: 1e-12,
        },
    ];
    finish_verification(out, "equivalence", lines)
}

pub fn params_report_text(cfg: &Config) -> Result<String> {
    let gas = gas_params(cfg)?;
    let eq = collisional_params(&gas)?;
    let mut text = String::new();
    let _ = writeln!(text, "thermal wavelength lambda_th = {:e} m", eq.lambda_th);
    let _ = writeln!(text, "localization width alpha_coll = {:e} m^-2", eq.alpha_coll);
    let _ = writeln!(text, "localization rate lambda_coll = {:e} s^-1", eq.lambda_coll);
    if let Some(g) = &cfg.generator {
        if let (Some(lambda), Some(alpha)) = (g.lambda, g.alpha) {
            let report = strength_report(&GRWParams { lambda, alpha }, &gas)?;
            let _ = writeln!(
                text,
                "reference product alpha*lambda = {:e}",
                report.grw_product
            );
            let _ = writeln!(
                text,
                "collisional product alpha_coll*lambda_coll = {:e}",
                report.coll_product
            );
            let _ = writeln!(
                text,
                "strength ratio (collisional / reference) = {:e}",
                report.ratio
            );
        }
    }
    Ok(text)
}

pub fn run_params(cfg: &Config, out: &Path) -> Result<String> {
    let text = params_report_text(cfg)?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("params_report.txt"), &text)?;
    write_manifest(out, cfg, None)?;
    Ok(text)
}

/// Execute the configured scenario, writing artifacts into `out`.
pub fn run_simulate(cfg: &Config, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    match cfg.scenario.kind {
        ScenarioKind::FreeGrw => {
            check_variant(cfg, ScenarioKind::FreeGrw, &[GeneratorVariant::Grw])?;
            simulate_evolution(cfg, out, ScenarioKind::FreeGrw)
        }
        ScenarioKind::PureDissipator => {
            check_variant(
                cfg,
                ScenarioKind::PureDissipator,
                &[
                    GeneratorVariant::Grw,
                    GeneratorVariant::MomentumTransfer,
                    GeneratorVariant::CollisionalZeroEnergy,
                ],
            )?;
            simulate_evolution(cfg, out, ScenarioKind::PureDissipator)
        }
        ScenarioKind::DissipativeQbm => {
            check_variant(
                cfg,
                ScenarioKind::DissipativeQbm,
                &[GeneratorVariant::DissipativeQbm],
            )?;
            simulate_evolution(cfg, out, ScenarioKind::DissipativeQbm)
        }
        ScenarioKind::LinearBoltzmann => {
            check_variant(
                cfg,
                ScenarioKind::LinearBoltzmann,
                &[GeneratorVariant::LinearBoltzmann],
            )?;
            simulate_evolution(cfg, out, ScenarioKind::LinearBoltzmann)
        }
        ScenarioKind::TwoParticleAmplification => {
            let r = verify_amplification(cfg, out);
            write_manifest(out, cfg, None)?;
            r
        }
        ScenarioKind::CovarianceCheck => {
            let r = verify_covariance(cfg, out);
            write_manifest(out, cfg, None)?;
            r
        }
        ScenarioKind::EquivalenceCheck => {
            let r = verify_equivalence(cfg, out);
            write_manifest(out, cfg, None)?;
            r
        }
        ScenarioKind::ParamsReport => {
            run_params(cfg, out)?;
            Ok(())
        }
    }
}

/// Execute a named verification suite.
pub fn run_verify(suite: &str, cfg: &Config, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    match suite {
        "covariance" => verify_covariance(cfg, out),
        "decay" => verify_decay(cfg, out),
        "amplification" => verify_amplification(cfg, out),
        "equivalence" => verify_equivalence(cfg, out),
        "all" => {
            verify_covariance(cfg, out)?;
            verify_decay(cfg, out)?;
            verify_amplification(cfg, out)?;
            verify_equivalence(cfg, out)
        }
        other => Err(CliError::Config(format!(
            "unknown suite '{other}'; expected covariance, decay, amplification, \
             equivalence, or all"
        ))),
    }
}
