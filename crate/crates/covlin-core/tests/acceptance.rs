//! Acceptance suite: one test per quantitative claim the library makes.
//!
//! Each test prints a single summary line with the measured figure and the
//! tolerance it was held to, so `--nocapture` yields a per-criterion report.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use covlin_core::*;

/// Random valid density matrix B B† / Tr(B B†), deterministically seeded.
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
    DensityMatrix::new(m, Representation::Position).unwrap()
}

fn five_variants(grid: &Grid) -> Vec<GeneratorSpec> {
    let kernel: Vec<(i64, f64)> = vec![(1, 0.4), (-1, 0.4), (3, 0.1), (-3, 0.1)];
    let dist = MomentumTransferDistribution::gaussian(grid, 2.0, 48).unwrap();
    vec![
        grw_generator(grid, GRWParams { lambda: 1.0, alpha: 4.0 }).unwrap(),
        momentum_transfer_generator(grid, 0.7, &dist).unwrap(),
        collisional_zero_energy_generator(grid, &kernel).unwrap(),
        linear_boltzmann_generator(grid, &kernel, 1.0, 2.0, 1.0, false).unwrap(),
        qbm_generator(grid, QBMParams { lambda_bar: 1.0, alpha_bar: 0.5 }).unwrap(),
    ]
}

/// Criterion 1 — translation covariance holds as a lattice identity for
/// every generator family, over 50 random states and random shifts.
#[test]
fn criterion_01_translation_covariance() {
    let grid = Grid::new(64, 32.0).unwrap();
    let specs = five_variants(&grid);
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let rho = random_state(&grid, seed);
        let steps = rng.random_range(1..64i64);
        for spec in &specs {
            let r = check_translation_covariance(spec, &rho, steps).unwrap();
            assert!(
                r <= 1e-11,
                "{} covariance residual {r:.3e} (seed {seed}, shift {steps})",
                spec.variant()
            );
            worst = worst.max(r);
        }
    }
    println!(
        "criterion 1 PASS: covariance residual {worst:.3e} \
         over 5 variants x 50 random states (tol 1e-11)"
    );
}

/// Criterion 2 — pure-dissipator cat-state coherence decays as
/// exp(−λ(1−e^{−αd²/4})t); halving dt improves the error ≥ 8x.
#[test]
fn criterion_02_offdiagonal_decay() {
    let grid = Grid::new(64, 32.0).unwrap();
    let (lambda, alpha, sep, sigma) = (1.0, 4.0, 8.0, 1.0);
    let rho0 = cat_state(&grid, sep, sigma).unwrap();
    let spec = grw_generator(&grid, GRWParams { lambda, alpha }).unwrap();
    let j = nearest_index(&grid, -sep / 2.0);
    let k = nearest_index(&grid, sep / 2.0);
    let s = grid.min_image(j, k);

    let run = |dt: f64| -> (f64, TrajectoryRecord) {
        let cfg = EvolutionConfig {
            dt,
            t_final: 2.0,
            record_every: ((0.1 / dt).round() as usize).max(1),
            coherence_points: vec![(j, k)],
            ..Default::default()
        };
        let rec = evolve(&grid, &rho0, Some(&spec), &cfg).unwrap();
        let c0 = rec.observables[0].coherence_samples[0].2.norm();
        let mut max_rel = 0.0f64;
        for (i, obs) in rec.observables.iter().enumerate() {
            let ratio = obs.coherence_samples[0].2.norm() / c0;
            let oracle = analytic_offdiagonal_factor(lambda, alpha, s, rec.times[i]);
            max_rel = max_rel.max((ratio - oracle).abs() / oracle);
        }
        (max_rel, rec)
    };

    let (err_fine, rec) = run(1e-3);
    assert!(err_fine <= 1e-8, "relative decay error {err_fine:.3e}");
    assert!(rec.healthy());

    // convergence order: at coarse steps the truncation error dominates
    // roundoff, so halving dt must gain at least 8x (4th-order: 16x)
    let (err_coarse, _) = run(0.05);
    let (err_half, _) = run(0.025);
    let gain = err_coarse / err_half;
    assert!(gain >= 8.0, "dt-halving gain {gain:.2} < 8");
    println!(
        "criterion 2 PASS: decay error {err_fine:.3e} at dt=1e-3 (tol 1e-8); \
         halving gain {gain:.1}x (>= 8x)"
    );
}

/// Criterion 3 — localization heating: d⟨p²⟩/dt = λα/2 with the free
/// Hamiltonian on, within 0.5% over t ∈ [0, 1/λ].
#[test]
fn criterion_03_heating_rate() {
    let grid = Grid::new(128, 32.0).unwrap();
    let (lambda, alpha) = (1.0, 2.0);
    let rho0 = gaussian_packet(&grid, 0.0, 0.0, 1.0).unwrap();
    let spec = grw_generator(&grid, GRWParams { lambda, alpha }).unwrap();
    let cfg = EvolutionConfig {
        dt: 1e-3,
        t_final: 1.0 / lambda,
        include_free_hamiltonian: true,
        mass: 1.0,
        record_every: 20,
        ..Default::default()
    };
    let rec = evolve(&grid, &rho0, Some(&spec), &cfg).unwrap();
    let p2: Vec<f64> = rec.observables.iter().map(|o| o.second_moment_p).collect();
    let slope = linear_slope(&rec.times, &p2);
    let oracle = lambda * alpha / 2.0;
    let rel = (slope - oracle).abs() / oracle;
    assert!(rel <= 5e-3, "heating slope {slope} vs {oracle} (rel {rel:.3e})");
    assert!(rec.healthy());
    println!(
        "criterion 3 PASS: heating slope {slope:.6} vs λα/2 = {oracle}, \
         rel err {rel:.3e} (tol 5e-3)"
    );
}

/// Criterion 4 — dissipative QBM second-moment relaxation matches
/// 1/(4ᾱ) + (⟨p²⟩₀ − 1/(4ᾱ))e^{−4λ̄ᾱt} to 1e-4 relative; the asymptote is
/// reached within 1% by t = 2·ln(100)/(4λ̄ᾱ).
#[test]
fn criterion_04_qbm_relaxation() {
    let grid = Grid::new(48, 24.0).unwrap();
    let p = QBMParams { lambda_bar: 1.0, alpha_bar: 0.5 };
    let rho0 = gaussian_packet(&grid, 0.0, 0.0, 1.0).unwrap();
    let spec = qbm_generator(&grid, p).unwrap();
    let t_asym = 2.0 * (100.0f64).ln() / (4.0 * p.lambda_bar * p.alpha_bar);
    let cfg = EvolutionConfig {
        dt: 2e-4,
        t_final: t_asym,
        record_every: 1000,
        ..Default::default()
    };
    let rec = evolve(&grid, &rho0, Some(&spec), &cfg).unwrap();
    let p2_0 = rec.observables[0].second_moment_p;
    let mut max_rel = 0.0f64;
    for (i, obs) in rec.observables.iter().enumerate() {
        let oracle = qbm_second_moment_prediction(p, p2_0, rec.times[i]);
        max_rel = max_rel.max((obs.second_moment_p - oracle).abs() / oracle);
    }
    assert!(max_rel <= 1e-4, "relaxation error {max_rel:.3e}");
    let asymptote = 1.0 / (4.0 * p.alpha_bar);
    let final_p2 = rec.observables.last().unwrap().second_moment_p;
    let tail = (final_p2 - asymptote).abs() / asymptote;
    assert!(tail <= 1e-2, "asymptote gap {tail:.3e} at t = {t_asym:.3}");
    assert!(rec.healthy());
    println!(
        "criterion 4 PASS: ⟨p²⟩ relaxation error {max_rel:.3e} (tol 1e-4); \
         asymptote gap {tail:.3e} at t = 2ln(100)/(4λ̄ᾱ)"
    );
}

/// Criterion 5 — two-particle localization amplification: the traced
/// center-of-mass motion obeys the same generator at rate 2λ, for a
/// Gaussian and for a non-Gaussian (two-point) transfer distribution.
#[test]
fn criterion_05_localization_amplification() {
    let grid = Grid::new(32, 16.0).unwrap();
    let a = gaussian_packet(&grid, -2.0, 0.5, 1.0).unwrap();
    let b = gaussian_packet(&grid, 1.5, -0.8, 1.2).unwrap();
    let probe = product_state(&grid, &a, &b, 1.0, 1.0).unwrap();

    let r_grw = grw_amplification_residual(1.0, 4.0, &probe).unwrap();
    assert!(r_grw <= 1e-11, "closed-form residual {r_grw:.3e}");

    let gauss = MomentumTransferDistribution::gaussian(&grid, 2.0, 24).unwrap();
    let r_gauss = transfer_amplification_residual(0.7, &gauss, &probe).unwrap();
    assert!(r_gauss <= 1e-11, "gaussian-distribution residual {r_gauss:.3e}");

    let two_point = MomentumTransferDistribution::two_point(&grid, 3).unwrap();
    let r_two = transfer_amplification_residual(0.7, &two_point, &probe).unwrap();
    assert!(r_two <= 1e-11, "two-point residual {r_two:.3e}");

    println!(
        "criterion 5 PASS: amplification residuals {r_grw:.3e} (closed form), \
         {r_gauss:.3e} (gaussian), {r_two:.3e} (two-point) (tol 1e-11)"
    );
}

/// Criterion 6 — QBM amplification with mass-scaled parameters: the traced
/// center-of-mass generator is the single-particle family at mass 2m.
#[test]
fn criterion_06_qbm_amplification() {
    let grid = Grid::new(32, 16.0).unwrap();
    let a = gaussian_packet(&grid, -1.0, 0.3, 1.0).unwrap();
    let b = gaussian_packet(&grid, 0.5, -0.4, 1.0).unwrap();
    let probe = product_state(&grid, &a, &b, 1.5, 1.5).unwrap();
    let r = qbm_amplification_residual(1.0, 1.0, 0.5, &probe).unwrap();
    assert!(r <= 1e-6, "QBM amplification residual {r:.3e}");
    println!("criterion 6 PASS: QBM amplification residual {r:.3e} (tol 1e-6)");
}

/// Criterion 7 — the collisional weight at zero energy transfer, with the
/// power-law coupling, reduces exactly to the Gaussian localization form
/// over six decades of momentum transfer; the Fourier coefficient of the
/// r⁻⁴ coupling is −4/3.
#[test]
fn criterion_07_collisional_equivalence() {
    let gas = GasParams {
        n: 1e20,
        m: 6.6e-27,
        beta: 1.0 / (K_B * 300.0),
        k_coupling: 1e-62,
        m_test: 1e-24,
    };
    let q_samples = default_q_samples(&gas);
    assert_eq!(q_samples.len(), 100);
    let span = q_samples.last().unwrap() / q_samples.first().unwrap();
    assert!(span >= 1e6 * 0.99, "sample span {span:.3e} under six decades");
    let dev = equivalence_check(&gas, &q_samples).unwrap();
    assert!(dev <= 1e-10, "equivalence deviation {dev:.3e}");
    let coef = power_law_fourier_coefficient();
    let coef_err = (coef - (-4.0 / 3.0)).abs();
    assert!(coef_err <= 1e-12, "Fourier coefficient error {coef_err:.3e}");
    println!(
        "criterion 7 PASS: equivalence deviation {dev:.3e} over 100 samples / \
         six decades (tol 1e-10); coefficient error {coef_err:.3e} (tol 1e-12)"
    );
}

/// Criterion 8 — linear Boltzmann sanity: trace-free action, correct
/// relaxation direction for hot and cold states, and ⟨p²⟩ → M/β within 10%
/// by t = 10/λ_eff. The mass ratio m = 2M makes the discrete stationary
/// second moment coincide with M/β exactly.
#[test]
fn criterion_08_linear_boltzmann() {
    let grid = Grid::new(128, 32.0).unwrap();
    let (mass_m, gas_m, beta) = (1.0, 2.0, 1.0);
    let target = mass_m / beta;
    let kernel: Vec<(i64, f64)> = (1..=16i64)
        .flat_map(|k| {
            let q = k as f64 * 2.0 * std::f64::consts::PI / 32.0;
            [(k, 0.5 * q), (-k, 0.5 * q)]
        })
        .collect();
    let lb = linear_boltzmann_generator(&grid, &kernel, mass_m, gas_m, beta, false).unwrap();

    // trace preservation per application
    let mut max_tr = 0.0f64;
    for seed in [11u64, 12, 13] {
        let rho = random_state(&grid, seed);
        let deriv = lb.apply(&rho).unwrap();
        let tr: C64 = deriv.diag().sum();
        max_tr = max_tr.max(tr.norm());
    }
    assert!(max_tr <= 1e-11, "trace of derivative {max_tr:.3e}");

    // relaxation direction
    let hot = gaussian_packet(&grid, 0.0, 2.0, 1.0).unwrap(); // ⟨p²⟩ = 4.25
    let cold = gaussian_packet(&grid, 0.0, 0.0, 2.0).unwrap(); // ⟨p²⟩ = 1/16
    let rate_hot = second_moment_rate(&lb, &hot).unwrap();
    let rate_cold = second_moment_rate(&lb, &cold).unwrap();
    assert!(rate_hot < 0.0, "hot state must cool, rate {rate_hot}");
    assert!(rate_cold > 0.0, "cold state must heat, rate {rate_cold}");

    // thermalization: effective rate from the linearized cold-state slope
    let p2_cold = measure(&cold, &grid, mass_m, &[]).unwrap().second_moment_p;
    let lambda_eff = rate_cold / (target - p2_cold);
    let t_final = 10.0 / lambda_eff;
    let dt = (0.09 / lb.rate_bound()).min(t_final / 50.0);
    let cfg = EvolutionConfig {
        dt,
        t_final,
        mass: mass_m,
        record_every: usize::MAX / 2,
        ..Default::default()
    };
    let rec = evolve(&grid, &cold, Some(&lb), &cfg).unwrap();
    let p2_final = rec.observables.last().unwrap().second_moment_p;
    let gap = (p2_final - target).abs() / target;
    assert!(gap <= 0.1, "⟨p²⟩ = {p2_final:.4} vs M/β = {target} (gap {gap:.3e})");
    assert!(rec.healthy());
    println!(
        "criterion 8 PASS: derivative trace {max_tr:.3e} (tol 1e-11); \
         hot rate {rate_hot:.3} < 0 < cold rate {rate_cold:.3}; \
         ⟨p²⟩ = {p2_final:.4} vs M/β = {target} by t = 10/λ_eff (gap {gap:.3e}, tol 0.1)"
    );
}

/// Criterion 9 — run-health diagnostics hold across every generator
/// family: trace drift ≤ 1e-9, Hermiticity drift ≤ 1e-10, minimum
/// eigenvalue ≥ −1e-8 at all recorded steps.
#[test]
fn criterion_09_state_health() {
    let grid = Grid::new(64, 32.0).unwrap();
    let rho0 = gaussian_packet(&grid, 0.0, 0.5, 1.0).unwrap();
    let mut worst_trace = 0.0f64;
    let mut worst_herm = 0.0f64;
    let mut worst_eig = f64::INFINITY;
    for spec in five_variants(&grid) {
        let dt = (0.05 / spec.rate_bound()).min(1e-3);
        let cfg = EvolutionConfig {
            dt,
            t_final: 500.0 * dt,
            include_free_hamiltonian: !matches!(spec.variant(), Variant::DissipativeQbm),
            mass: 1.0,
            record_every: 50,
            ..Default::default()
        };
        let rec = evolve(&grid, &rho0, Some(&spec), &cfg).unwrap();
        assert!(
            rec.max_trace_drift() <= 1e-9,
            "{}: trace drift {:.3e}",
            spec.variant(),
            rec.max_trace_drift()
        );
        assert!(
            rec.max_hermiticity_drift() <= 1e-10,
            "{}: hermiticity drift {:.3e}",
            spec.variant(),
            rec.max_hermiticity_drift()
        );
        assert!(
            rec.min_eigenvalue() >= -1e-8,
            "{}: min eigenvalue {:.3e}",
            spec.variant(),
            rec.min_eigenvalue()
        );
        worst_trace = worst_trace.max(rec.max_trace_drift());
        worst_herm = worst_herm.max(rec.max_hermiticity_drift());
        worst_eig = worst_eig.min(rec.min_eigenvalue());
    }
    println!(
        "criterion 9 PASS: trace drift {worst_trace:.3e} (tol 1e-9), \
         hermiticity drift {worst_herm:.3e} (tol 1e-10), \
         min eigenvalue {worst_eig:.3e} (tol -1e-8) across all 5 variants"
    );
}
