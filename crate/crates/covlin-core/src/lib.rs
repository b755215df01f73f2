//! Numerical library for translation-covariant Markovian master equations
//! on a periodic 1-D lattice: localization (GRW-type), momentum-transfer
//! and collisional dissipators, the quantum linear Boltzmann generator,
//! and dissipative quantum Brownian motion, together with a fixed-step
//! integrator, two-particle amplification machinery, and the SI-unit
//! collisional parameter map.

pub mod error;
pub mod evolve;
pub mod generators;
pub mod lattice;
pub mod multiparticle;
pub mod params;
pub mod states;

pub use error::{Error, Result};
pub use evolve::{
    analytic_offdiagonal_factor, evolve, linear_slope, qbm_second_moment_prediction,
    EvolutionConfig, TrajectoryRecord,
};
pub use generators::{
    broken_rate_generator, characteristic_function, check_translation_covariance,
    collisional_zero_energy_generator, dynamic_structure_factor, gaussian_collision_kernel,
    grw_generator, linear_boltzmann_generator, mass_scaled_params, momentum_transfer_generator,
    qbm_generator, second_moment_rate, GRWParams, GeneratorSpec, MomentumTransferDistribution,
    QBMParams, Variant,
};
pub use lattice::{make_grid, DensityMatrix, Grid, Representation};
pub use multiparticle::{
    apply_blockwise, apply_per_particle, cm_grid, cm_mean_momentum,
    cnumber_amplification_residual, grw_amplification_residual, partial_trace_relative,
    partial_trace_relative_state, product_state, product_state_large,
    qbm_amplification_residual, transfer_amplification_residual, Particle, TwoParticleState,
    MAX_POINTS_PER_PARTICLE,
};
pub use params::{
    collisional_params, collisional_weight, default_q_samples, equivalence_check,
    gaussian_weight, power_law_fourier_coefficient, power_law_fourier_transform,
    strength_report, thermal_wavelength, thermal_wavelength_with_hbar, EquivalentGRW, GasParams,
    StrengthReport, HBAR, K_B,
};
pub use states::{cat_state, gaussian_packet, measure, nearest_index, ObservableSet};
