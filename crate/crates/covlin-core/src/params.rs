//! SI-unit closed-form arithmetic for the collisional-decoherence
//! parameter map: thermal wavelength, the x^{−7/2} power-law Fourier
//! transform, the equivalent localization parameters (α_coll, λ_coll),
//! the collisional-weight equivalence check, and strength reports.
//!
//! This module is full 3-D with SI units throughout and never touches the
//! 1-D grid.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{invalid, Result};
use crate::generators::GRWParams;

/// Reduced Planck constant (CODATA 2018), J·s.
pub const HBAR: f64 = 1.054571817e-34;
/// Boltzmann constant (CODATA 2018, exact), J/K.
pub const K_B: f64 = 1.380649e-23;

/// Bath description: gas density n (m⁻³), gas-particle mass m (kg),
/// inverse temperature β (J⁻¹), potential coupling K for t(x) = K/x^{7/2}
/// (J·m^{7/2}), and test-particle mass M (kg).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParams {
    pub n: f64,
    pub m: f64,
    pub beta: f64,
    pub k_coupling: f64,
    pub m_test: f64,
}

impl GasParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n", self.n),
            ("m", self.m),
            ("beta", self.beta),
            ("M", self.m_test),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.k_coupling.is_finite() {
            return Err(invalid("K must be finite"));
        }
        Ok(())
    }
}

/// Localization parameters equivalent to the gas: α_coll (m⁻²),
/// λ_coll (s⁻¹), and the thermal wavelength λ_th (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalentGRW {
    pub alpha_coll: f64,
    pub lambda_coll: f64,
    pub lambda_th: f64,
}

/// Thermal de Broglie wavelength λ_th = √(2πβħ²/m) with an explicit ħ
/// (natural-unit checks use ħ = 1).
pub fn thermal_wavelength_with_hbar(m: f64, beta: f64, hbar: f64) -> Result<f64> {
    if !(m > 0.0) || !(beta > 0.0) || !(hbar > 0.0) {
        return Err(invalid("thermal wavelength needs positive m, beta, hbar"));
    }
    Ok((2.0 * PI * beta * hbar * hbar / m).sqrt())
}

/// Thermal de Broglie wavelength in SI units.
pub fn thermal_wavelength(m: f64, beta: f64) -> Result<f64> {
    thermal_wavelength_with_hbar(m, beta, HBAR)
}

/// Dimensionless coefficient of the x^{−7/2} Fourier transform:
/// 2^{μ+3/2}·Γ(μ/2 + 3/2)/Γ(−μ/2) at μ = −7/2, equal to −4/3.
pub fn power_law_fourier_coefficient() -> f64 {
    let mu = -3.5f64;
    2.0f64.powf(mu + 1.5) * gamma(mu / 2.0 + 1.5) / gamma(-mu / 2.0)
}

/// Fourier transform of t(x) = K/x^{7/2}:
/// t̃(q) = −(4/3)·K(2π)^{3/2}/(2πħ)³·(q/ħ)^{1/2}.
pub fn power_law_fourier_transform(k_coupling: f64, q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(invalid("q must be positive"));
    }
    Ok(power_law_fourier_coefficient() * k_coupling * (2.0 * PI).powf(1.5)
        / (2.0 * PI * HBAR).powi(3)
        * (q / HBAR).sqrt())
}

/// Gas parameters → equivalent localization parameters:
/// α_coll = 16π/λ_th², λ_coll = n·m·α_coll·(8/9)(2π/ħ)³·|K|²/π.
pub fn collisional_params(g: &GasParams) -> Result<EquivalentGRW> {
    g.validate()?;
    let lambda_th = thermal_wavelength(g.m, g.beta)?;
    let alpha_coll = 16.0 * PI / (lambda_th * lambda_th);
    let lambda_coll = g.n * g.m * alpha_coll * (8.0 / 9.0) * (2.0 * PI / HBAR).powi(3)
        * g.k_coupling
        * g.k_coupling
        / PI;
    Ok(EquivalentGRW {
        alpha_coll,
        lambda_coll,
        lambda_th,
    })
}

/// The zero-energy collisional weight at momentum transfer q:
/// w(q) = (2π/ħ)(2πħ)³ n √(βm/2π)·(|t̃(q)|²/q)·e^{−βq²/8m}.
pub fn collisional_weight(g: &GasParams, q: f64) -> Result<f64> {
    g.validate()?;
    let t = power_law_fourier_transform(g.k_coupling, q)?;
    Ok((2.0 * PI / HBAR)
        * (2.0 * PI * HBAR).powi(3)
        * g.n
        * (g.beta * g.m / (2.0 * PI)).sqrt()
        * (t * t / q)
        * (-(g.beta / (8.0 * g.m)) * q * q).exp())
}

/// The Gaussian weight the collisional generator must reduce to:
/// λ_coll·(α_coll πħ²)^{−3/2}·e^{−q²/(α_coll ħ²)}.
pub fn gaussian_weight(g: &GasParams, q: f64) -> Result<f64> {
    let eq = collisional_params(g)?;
    Ok(eq.lambda_coll * (eq.alpha_coll * PI * HBAR * HBAR).powf(-1.5)
        * (-q * q / (eq.alpha_coll * HBAR * HBAR)).exp())
}

/// 100 log-spaced momentum transfers spanning six decades, topping out
/// where the Gaussian exponent is still well-resolved in f64.
pub fn default_q_samples(g: &GasParams) -> Vec<f64> {
    let q_top = 5.0 * (8.0 * g.m / g.beta).sqrt();
    let decades = 6.0;
    (0..100)
        .map(|i| q_top * 10f64.powf(-decades + decades * i as f64 / 99.0))
        .collect()
    }

/// Max relative deviation between the collisional weight and its Gaussian
/// closed form over the given momentum transfers.
pub fn equivalence_check(g: &GasParams, q_samples: &[f64]) -> Result<f64> {
    if q_samples.is_empty() {
        return Err(invalid("need at least one q sample"));
    }
    let mut max_dev = 0.0f64;
    for &q in q_samples {
        if !(q > 0.0) {
            return Err(invalid("q samples must be positive"));
        }
        let w = collisional_weight(g, q)?;
        let gw = gaussian_weight(g, q)?;
        if gw == 0.0 {
            return Err(invalid(format!(
                "Gaussian weight underflowed at q = {q}; shrink the sample range"
            )));
        }
        max_dev = max_dev.max((w - gw).abs() / gw);
    }
    Ok(max_dev)
}

/// Side-by-side strength comparison of a localization model and the
/// gas-equivalent one. Reported, never asserted: realistic magnitudes
/// rest on externally supplied estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrengthReport {
    pub grw_alpha: f64,
    pub grw_lambda: f64,
    pub coll_alpha: f64,
    pub coll_lambda: f64,
    /// Products α·λ on each side and their ratio (collisional / GRW).
    pub grw_product: f64,
    pub coll_product: f64,
    pub ratio: f64,
    pub lambda_th: f64,
}

/// Compare α·λ products of a user-supplied localization model (SI units)
/// against the gas-equivalent parameters.
pub fn strength_report(grw: &GRWParams, g: &GasParams) -> Result<StrengthReport> {
    grw.validate()?;
    let eq = collisional_params(g)?;
    let grw_product = grw.alpha * grw.lambda;
    let coll_product = eq.alpha_coll * eq.lambda_coll;
    Ok(StrengthReport {
        grw_alpha: grw.alpha,
        grw_lambda: grw.lambda,
        coll_alpha: eq.alpha_coll,
        coll_lambda: eq.lambda_coll,
        grw_product,
        coll_product,
        ratio: coll_product / grw_product,
        lambda_th: eq.lambda_th,
    })
}
