//! Dissipator families: GRW localization, general momentum-transfer
//! mixtures, collisional generators with and without energy transfer, and
//! the dissipative quantum-Brownian-motion generator.
//!
//! All position-dependent kernels are built from minimal-image lattice
//! displacements, which makes every generator exactly covariant under
//! cyclic lattice translations.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::lattice::{hermitize, shift_matrix, DensityMatrix, Grid};

/// GRW localization parameters: event rate λ and inverse localization
/// width squared α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GRWParams {
    pub lambda: f64,
    pub alpha: f64,
}

impl GRWParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(invalid(format!("alpha must be > 0, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Quantum-Brownian-motion parameters λ̄ (rate) and ᾱ (mixing length²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QBMParams {
    pub lambda_bar: f64,
    pub alpha_bar: f64,
}

impl QBMParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_bar >= 0.0) || !self.lambda_bar.is_finite() {
            return Err(invalid(format!(
                "lambda_bar must be >= 0, got {}",
                self.lambda_bar
            )));
        }
        if !(self.alpha_bar > 0.0) || !self.alpha_bar.is_finite() {
            return Err(invalid(format!(
                "alpha_bar must be > 0, got {}",
                self.alpha_bar
            )));
        }
        Ok(())
    }
}

/// Mass scaling λ̄ = (m/m₀)λ̄₀, ᾱ = (m₀/m)ᾱ₀; the product λ̄ᾱ is invariant.
pub fn mass_scaled_params(m: f64, m0: f64, lambda0: f64, alpha0: f64) -> Result<QBMParams> {
    for (name, v) in [("m", m), ("m0", m0), ("lambda0", lambda0), ("alpha0", alpha0)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(invalid(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(QBMParams {
        lambda_bar: (m / m0) * lambda0,
        alpha_bar: (m0 / m) * alpha0,
    })
}

/// Normalized probability weights over the boost-commensurate momentum
/// transfer lattice `{q = k·dq}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumTransferDistribution {
    steps: Vec<i64>,
    weights: Vec<f64>,
    dq: f64,
}

impl MomentumTransferDistribution {
    /// Normalize nonnegative weights over transfer steps.
    pub fn new(grid: &Grid, entries: &[(i64, f64)]) -> Result<Self> {
        let mut steps = Vec::with_capacity(entries.len());
        let mut weights = Vec::with_capacity(entries.len());
        let mut total = 0.0;
        for &(k, w) in entries {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(invalid(format!("weight at step {k} is {w}, must be >= 0")));
            }
            steps.push(k);
            weights.push(w);
            total += w;
        }
        if total <= 0.0 {
            return Err(invalid("distribution has zero total mass"));
        }
        for w in &mut weights {
            *w /= total;
        }
        Ok(MomentumTransferDistribution {
            steps,
            weights,
            dq: grid.dq(),
        })
    }

    /// Weights ∝ exp(−q²/α), normalized on `|k| ≤ k_max`.
    ///
    /// The transfer variance is α/2, so coverage requires
    /// `k_max·dq ≥ 8·√(α/2)`.
    pub fn gaussian(grid: &Grid, alpha: f64, k_max: i64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(invalid(format!("alpha must be > 0, got {alpha}")));
        }
        let sigma_q = (alpha / 2.0).sqrt();
        if (k_max as f64) * grid.dq() < 8.0 * sigma_q {
            return Err(invalid(format!(
                "k_max = {k_max} covers only {:.2} standard deviations; need 8",
                k_max as f64 * grid.dq() / sigma_q
            )));
        }
        let entries: Vec<(i64, f64)> = (-k_max..=k_max)
            .map(|k| {
                let q = k as f64 * grid.dq();
                (k, (-q * q / alpha).exp())
            })
            .collect();
        Self::new(grid, &entries)
    }

    /// Symmetric two-point distribution: mass ½ at each of `±k0·dq`.
    pub fn two_point(grid: &Grid, k0: i64) -> Result<Self> {
        if k0 == 0 {
            return Err(invalid("two-point distribution needs k0 != 0"));
        }
        Self::new(grid, &[(-k0, 0.5), (k0, 0.5)])
    }

    pub fn steps(&self) -> &[i64] {
        &self.steps
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn q_values(&self) -> Vec<f64> {
        self.steps.iter().map(|&k| k as f64 * self.dq).collect()
    }

    /// Σ w(q) q² — the 1-D momentum-diffusion (heating) coefficient per event.
    pub fn second_moment(&self) -> f64 {
        self.steps
            .iter()
            .zip(&self.weights)
            .map(|(&k, &w)| {
                let q = k as f64 * self.dq;
                w * q * q
            })
            .sum()
    }
}

/// Characteristic function Φ(s) = Σ_q w(q) e^{iqs}; Φ(0)=1 and |Φ| ≤ 1.
pub fn characteristic_function(dist: &MomentumTransferDistribution, s: f64) -> C64 {
    dist.steps
        .iter()
        .zip(&dist.weights)
        .map(|(&k, &w)| C64::new(0.0, k as f64 * dist.dq * s).exp() * w)
        .sum()
}

/// Dynamic structure factor of a free Maxwell-Boltzmann gas,
/// `S(q,E) = √(βm/2π)·(1/|q|)·exp(−(β/8m)(2mE+q²)²/q²)`.
pub fn dynamic_structure_factor(q: f64, energy: f64, m: f64, beta: f64) -> Result<f64> {
    if q == 0.0 {
        return Err(invalid("dynamic structure factor is singular at q = 0"));
    }
    if !(m > 0.0) || !(beta > 0.0) {
        return Err(invalid("gas mass and inverse temperature must be positive"));
    }
    let pref = (beta * m / (2.0 * std::f64::consts::PI)).sqrt() / q.abs();
    let num = 2.0 * m * energy + q * q;
    Ok(pref * (-(beta / (8.0 * m)) * num * num / (q * q)).exp())
}

#[derive(Debug, Clone)]
struct LbTerm {
    steps: i64,
    weight: f64,
    /// √S(q, E(q, p_a)) over the momentum lattice.
    sqrt_s: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Kind {
    /// Element-wise multiplier in the position representation, with the
    /// equivalent boost mixture retained as a cross-check path.
    CNumber {
        multiplier: Array2<C64>,
        boost_terms: Vec<(i64, f64)>,
        use_boost_sum: bool,
    },
    LinearBoltzmann { terms: Vec<LbTerm> },
    Qbm { params: QBMParams },
    /// Negative-control fixture: an x-dependent rate that breaks
    /// translation covariance on purpose.
    BrokenXRate { multiplier: Array2<C64> },
}

/// One dissipator bound to its grid.
#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    grid: Grid,
    kind: Kind,
    variant: Variant,
}

/// Which family a [`GeneratorSpec`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Grw,
    MomentumTransfer,
    CollisionalZeroEnergy,
    LinearBoltzmann,
    DissipativeQbm,
    BrokenFixture,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Variant::Grw => "grw",
            Variant::MomentumTransfer => "momentum_transfer",
            Variant::CollisionalZeroEnergy => "collisional_zero_energy",
            Variant::LinearBoltzmann => "linear_boltzmann",
            Variant::DissipativeQbm => "dissipative_qbm",
            Variant::BrokenFixture => "broken_fixture",
        };
        f.write_str(s)
    }
}

/// Multiplier from weighted boost phases: Σ_q w(q)(e^{iq·s_jk} − 1).
fn multiplier_from_terms(grid: &Grid, terms: &[(i64, f64)]) -> Array2<C64> {
    let n = grid.n_points();
    // function of (j − k) mod n only: precompute one ring
    let mut ring = vec![C64::new(0.0, 0.0); n];
    for (d, slot) in ring.iter_mut().enumerate() {
        let s = grid.min_image_steps(d as i64) as f64 * grid.dx();
        let mut acc = C64::new(0.0, 0.0);
        for &(k, w) in terms {
            acc += (C64::new(0.0, k as f64 * grid.dq() * s).exp() - 1.0) * w;
        }
        *slot = acc;
    }
    Array2::from_shape_fn((n, n), |(j, k)| ring[(j + n - k) % n])
}

/// GRW localization generator: element-wise multiplication of the
/// position-representation entries by −λ(1 − e^{−α s²/4}).
pub fn grw_generator(grid: &Grid, p: GRWParams) -> Result<GeneratorSpec> {
    p.validate()?;
    let n = grid.n_points();
    let mut ring = vec![C64::new(0.0, 0.0); n];
    for (d, slot) in ring.iter_mut().enumerate() {
        let s = grid.min_image_steps(d as i64) as f64 * grid.dx();
        *slot = C64::new(-p.lambda * (1.0 - (-p.alpha * s * s / 4.0).exp()), 0.0);
    }
    let multiplier = Array2::from_shape_fn((n, n), |(j, k)| ring[(j + n - k) % n]);
    // discrete boost mixture kept for the cross-check path
    let sigma_q = (p.alpha / 2.0).sqrt();
    let k_max = (8.0 * sigma_q / grid.dq()).ceil() as i64;
    let dist = MomentumTransferDistribution::gaussian(grid, p.alpha, k_max)?;
    let boost_terms = dist
        .steps()
        .iter()
        .zip(dist.weights())
        .map(|(&k, &w)| (k, p.lambda * w))
        .collect();
    Ok(GeneratorSpec {
        grid: grid.clone(),
        kind: Kind::CNumber {
            multiplier,
            boost_terms,
            use_boost_sum: false,
        },
        variant: Variant::Grw,
    })
}

/// Generic momentum-transfer mixture at total rate λ:
/// 𝓛[ρ] = λ Σ_q w(q)(U_q ρ U_q† − ρ).
pub fn momentum_transfer_generator(
    grid: &Grid,
    lambda: f64,
    dist: &MomentumTransferDistribution,
) -> Result<GeneratorSpec> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be >= 0, got {lambda}")));
    }
    let terms: Vec<(i64, f64)> = dist
        .steps()
        .iter()
        .zip(dist.weights())
        .map(|(&k, &w)| (k, lambda * w))
        .collect();
    Ok(GeneratorSpec {
        grid: grid.clone(),
        kind: Kind::CNumber {
            multiplier: multiplier_from_terms(grid, &terms),
            boost_terms: terms,
            use_boost_sum: false,
        },
        variant: Variant::MomentumTransfer,
    })
}

/// Collisional generator at zero energy transfer: unnormalized kernel
/// `w(q) ≥ 0`, action Σ_q w(q)(U_q ρ U_q† − ρ).
pub fn collisional_zero_energy_generator(
    grid: &Grid,
    kernel: &[(i64, f64)],
) -> Result<GeneratorSpec> {
    for &(k, w) in kernel {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(invalid(format!("kernel weight at step {k} is {w}")));
        }
    }
    Ok(GeneratorSpec {
        grid: grid.clone(),
        kind: Kind::CNumber {
            multiplier: multiplier_from_terms(grid, kernel),
            boost_terms: kernel.to_vec(),
            use_boost_sum: false,
        },
        variant: Variant::CollisionalZeroEnergy,
    })
}

/// Gaussian collision kernel `λ·w_G(q; α)` on `|k| ≤ k_max`, normalized so
/// the total rate is λ.
pub fn gaussian_collision_kernel(
    grid: &Grid,
    lambda: f64,
    alpha: f64,
    k_max: i64,
) -> Result<Vec<(i64, f64)>> {
    let dist = MomentumTransferDistribution::gaussian(grid, alpha, k_max)?;
    Ok(dist
        .steps()
        .iter()
        .zip(dist.weights())
        .map(|(&k, &w)| (k, lambda * w))
        .collect())
}

/// Linear Boltzmann generator with operator-valued amplitudes
/// `L_q = U_q D_q`, `D_q = diag √S(q, E(q,p))`, `E(q,p) = q²/2M + pq/2M`.
///
/// With `zero_energy` the structure factor is frozen at `E = 0`, which
/// reduces the action exactly to the zero-energy collisional generator
/// with kernel `w(q)·S(q,0)`.
pub fn linear_boltzmann_generator(
    grid: &Grid,
    kernel: &[(i64, f64)],
    mass_m: f64,
    gas_m: f64,
    beta: f64,
    zero_energy: bool,
) -> Result<GeneratorSpec> {
    if !(mass_m > 0.0) || !(gas_m > 0.0) || !(beta > 0.0) {
        return Err(invalid("masses and beta must be positive"));
    }
    let mut terms = Vec::with_capacity(kernel.len());
    for &(k, w) in kernel {
        if k == 0 {
            return Err(invalid("linear Boltzmann kernel must not weight q = 0"));
        }
        if !(w >= 0.0) || !w.is_finite() {
            return Err(invalid(format!("kernel weight at step {k} is {w}")));
        }
        let q = k as f64 * grid.dq();
        let sqrt_s = grid
            .p_values()
            .iter()
            .map(|&p| {
                let e = if zero_energy {
                    0.0
                } else {
                    q * q / (2.0 * mass_m) + p * q / (2.0 * mass_m)
                };
                dynamic_structure_factor(q, e, gas_m, beta).map(f64::sqrt)
            })
            .collect::<Result<Vec<f64>>>()?;
        terms.push(LbTerm {
            steps: k,
            weight: w,
            sqrt_s,
        });
    }
    Ok(GeneratorSpec {
        grid: grid.clone(),
        kind: Kind::LinearBoltzmann { terms },
        variant: Variant::LinearBoltzmann,
    })
}

/// Dissipative QBM generator
/// 𝓛[ρ] = −(λ̄/2)[x,[x,ρ]] − (λ̄ᾱ²/2)[p,[p,ρ]] − iλ̄ᾱ[x,{p,ρ}], ħ = 1.
pub fn qbm_generator(grid: &Grid, p: QBMParams) -> Result<GeneratorSpec> {
    p.validate()?;
    Ok(GeneratorSpec {
        grid: grid.clone(),
        kind: Kind::Qbm { params: p },
        variant: Variant::DissipativeQbm,
    })
}

/// Negative-control fixture: GRW multiplier modulated by a smooth
/// x-dependent rate profile, so translation covariance fails by design.
pub fn broken_rate_generator(grid: &Grid, p: GRWParams) -> Result<GeneratorSpec> {
    p.validate()?;
    let n = grid.n_points();
    let l = grid.length();
    let profile: Vec<f64> = grid
        .x_values()
        .iter()
        .map(|&x| 0.25 * (2.0 * std::f64::consts::PI * x / l).sin())
        .collect();
    let multiplier = Array2::from_shape_fn((n, n), |(j, k)| {
        let s = grid.min_image(j, k);
        let base = -p.lambda * (1.0 - (-p.alpha * s * s / 4.0).exp());
        C64::new(base * (1.0 + profile[j] + profile[k]), 0.0)
    });
    Ok(GeneratorSpec {
        grid: grid.clone(),
        kind: Kind::BrokenXRate { multiplier },
        variant: Variant::BrokenFixture,
    })
}

impl GeneratorSpec {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Switch a c-number generator between the closed-multiplier path and
    /// the explicit boost-mixture path (cross-check only; same action).
    pub fn with_boost_sum(mut self, flag: bool) -> Result<Self> {
        match &mut self.kind {
            Kind::CNumber { use_boost_sum, .. } => {
                *use_boost_sum = flag;
                Ok(self)
            }
            _ => Err(Error::UnsupportedConfiguration(
                "boost-sum path exists only for c-number generators".into(),
            )),
        }
    }

    /// Upper bound on the element-wise damping rates, used for the
    /// integrator stability check.
    pub fn rate_bound(&self) -> f64 {
        match &self.kind {
            Kind::CNumber { multiplier, .. } | Kind::BrokenXRate { multiplier } => {
                multiplier.iter().map(|z| z.norm()).fold(0.0, f64::max)
            }
            Kind::LinearBoltzmann { terms } => terms
                .iter()
                .map(|t| {
                    t.weight * t.sqrt_s.iter().map(|d| d * d).fold(0.0, f64::max)
                })
                .sum(),
            Kind::Qbm { params } => {
                let xmax = self.grid.length() / 2.0;
                let pmax = self
                    .grid
                    .p_values()
                    .iter()
                    .fold(0.0f64, |m, p| m.max(p.abs()));
                params.lambda_bar
                    * (2.0 * xmax * xmax
                        + 2.0 * params.alpha_bar * params.alpha_bar * pmax * pmax
                        + 4.0 * params.alpha_bar * xmax * pmax)
            }
        }
    }

    /// Dissipator contribution dρ/dt, returned in the position
    /// representation; Hermitian by construction and traceless.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<Array2<C64>> {
        self.grid.check_dim(rho)?;
        let pos = self.grid.to_position_representation(rho)?;
        Ok(self.apply_raw(pos.entries()))
    }

    /// Same as [`apply`](Self::apply) on raw position-representation
    /// entries, without state validation (integrator inner loop).
    pub(crate) fn apply_raw(&self, m: &Array2<C64>) -> Array2<C64> {
        let mut out = self.apply_linear(m);
        hermitize(&mut out);
        out
    }

    /// The bare linear superoperator, valid on non-Hermitian inputs
    /// (tensor-factor slices in the multiparticle module).
    pub(crate) fn apply_linear(&self, m: &Array2<C64>) -> Array2<C64> {
        match &self.kind {
            Kind::CNumber {
                multiplier,
                boost_terms,
                use_boost_sum,
            } => {
                if *use_boost_sum {
                    self.apply_boost_sum(m, boost_terms)
                } else {
                    multiplier * m
                }
            }
            Kind::BrokenXRate { multiplier } => multiplier * m,
            Kind::LinearBoltzmann { terms } => self.apply_linear_boltzmann(m, terms),
            Kind::Qbm { params } => self.apply_qbm(m, params),
        }
    }

    /// Position-representation multiplier of a c-number generator.
    pub(crate) fn cnumber_multiplier(&self) -> Option<&Array2<C64>> {
        match &self.kind {
            Kind::CNumber { multiplier, .. } => Some(multiplier),
            _ => None,
        }
    }

    fn apply_boost_sum(&self, m: &Array2<C64>, terms: &[(i64, f64)]) -> Array2<C64> {
        let n = self.grid.n_points();
        let mut acc = Array2::<C64>::zeros((n, n));
        let total: f64 = terms.iter().map(|&(_, w)| w).sum();
        for &(k, w) in terms {
            let boosted = self.grid.boost_matrix(m, k);
            acc.zip_mut_with(&boosted, |a, &b| *a += b * w);
        }
        acc.zip_mut_with(m, |a, &b| *a -= b * total);
        acc
    }

    fn apply_linear_boltzmann(&self, m: &Array2<C64>, terms: &[LbTerm]) -> Array2<C64> {
        let n = self.grid.n_points();
        let rt = self.grid.conjugate_to_momentum(m);
        let mut acc = Array2::<C64>::zeros((n, n));
        for term in terms {
            let s = term.steps.rem_euclid(n as i64) as usize;
            let d = &term.sqrt_s;
            let w = term.weight;
            for a in 0..n {
                let sa = (a + n - s) % n;
                let da = d[sa];
                let la = d[a] * d[a];
                for b in 0..n {
                    let sb = (b + n - s) % n;
                    // gain: U_q D ρ D U_q†; loss: −½{D², ρ}
                    acc[[a, b]] += w
                        * (da * d[sb] * rt[[sa, sb]]
                            - 0.5 * (la + d[b] * d[b]) * rt[[a, b]]);
                }
            }
        }
        self.grid.conjugate_to_position(&acc)
    }

    fn apply_qbm(&self, m: &Array2<C64>, p: &QBMParams) -> Array2<C64> {
        let n = self.grid.n_points();
        let lb = p.lambda_bar;
        let ab = p.alpha_bar;
        // position double commutator: element-wise −(λ̄/2)(x_j − x_k)²
        let mut out = Array2::from_shape_fn((n, n), |(j, k)| {
            let s = self.grid.min_image(j, k);
            m[[j, k]] * (-0.5 * lb * s * s)
        });
        // momentum terms are element-wise in the momentum representation
        let rt = self.grid.conjugate_to_momentum(m);
        let pv = self.grid.p_values();
        let mut t2 = Array2::<C64>::zeros((n, n));
        let mut anti = Array2::<C64>::zeros((n, n));
        for a in 0..n {
            for b in 0..n {
                let dp = pv[a] - pv[b];
                t2[[a, b]] = rt[[a, b]] * (-0.5 * lb * ab * ab * dp * dp);
                anti[[a, b]] = rt[[a, b]] * (pv[a] + pv[b]);
            }
        }
        out += &self.grid.conjugate_to_position(&t2);
        // friction: −iλ̄ᾱ [x, {p, ρ}]
        let anti_pos = self.grid.conjugate_to_position(&anti);
        for j in 0..n {
            for k in 0..n {
                let s = self.grid.min_image(j, k);
                out[[j, k]] += anti_pos[[j, k]] * C64::new(0.0, -lb * ab * s);
            }
        }
        out
    }
}

/// Max-norm covariance residual 𝓛[TρT†] − T𝓛[ρ]T† for a cyclic shift.
pub fn check_translation_covariance(
    spec: &GeneratorSpec,
    rho: &DensityMatrix,
    steps: i64,
) -> Result<f64> {
    spec.grid().check_dim(rho)?;
    let pos = spec.grid().to_position_representation(rho)?;
    let shifted = shift_matrix(pos.entries(), steps);
    let lhs = spec.apply_raw(&shifted);
    let rhs = shift_matrix(&spec.apply_raw(pos.entries()), steps);
    Ok((&lhs - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `Tr(p² 𝓛[ρ])` — the instantaneous rate of change of ⟨p²⟩ under the
/// dissipator alone, evaluated by brute-force matrix algebra.
pub fn second_moment_rate(spec: &GeneratorSpec, rho: &DensityMatrix) -> Result<f64> {
    let deriv = spec.apply(rho)?;
    let drt = spec.grid().conjugate_to_momentum(&deriv);
    Ok(spec
        .grid()
        .p_values()
        .iter()
        .enumerate()
        .map(|(a, &p)| p * p * drt[[a, a]].re)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Representation;
    use crate::states::{cat_state, gaussian_packet, nearest_index};
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Grid {
        Grid::new(64, 32.0).unwrap()
    }

    /// Random valid density matrix: B B† / Tr, seeded.
    fn random_state(grid: &Grid, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = grid.n_points();
        let b = Array2::from_shape_fn((n, n), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let bd = b.mapv(|z| z.conj()).reversed_axes();
        let mut m = b.dot(&bd);
        let tr: f64 = m.diag().iter().map(|z| z.re).sum();
        m.mapv_inplace(|z| z / tr);
        DensityMatrix::new(m, Representation::Position).unwrap()
    }

    #[test]
    fn gaussian_distribution_moments() {
        let g = grid();
        let d = MomentumTransferDistribution::gaussian(&g, 2.0, 60).unwrap();
        assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // variance alpha/2 = 1
        assert!((d.second_moment() - 1.0).abs() < 1e-6, "{}", d.second_moment());
        // symmetry w(q) = w(-q) exactly
        let m = d.steps().len();
        for i in 0..m {
            assert_eq!(d.weights()[i], d.weights()[m - 1 - i]);
        }
        // insufficient coverage rejected
        assert!(MomentumTransferDistribution::gaussian(&g, 2.0, 10).is_err());
    }

    #[test]
    fn characteristic_function_oracles() {
        let g = grid();
        let d = MomentumTransferDistribution::gaussian(&g, 4.0, 80).unwrap();
        let phi0 = characteristic_function(&d, 0.0);
        assert!((phi0 - C64::new(1.0, 0.0)).norm() < 1e-14);
        // alpha = 4, s = 1: e^{-alpha s^2/4} = e^{-1}
        let phi1 = characteristic_function(&d, 1.0);
        assert!((phi1.re - (-1.0f64).exp()).abs() < 1e-6, "{phi1}");
        assert!(phi1.im.abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn characteristic_function_properties(s in -20.0f64..20.0, alpha in 0.5f64..8.0) {
            let g = Grid::new(64, 32.0).unwrap();
            let k_max = (8.0 * (alpha / 2.0).sqrt() / g.dq()).ceil() as i64;
            let d = MomentumTransferDistribution::gaussian(&g, alpha, k_max).unwrap();
            let phi = characteristic_function(&d, s);
            prop_assert!(phi.norm() <= 1.0 + 1e-12);
            let phi_neg = characteristic_function(&d, -s);
            prop_assert!((phi_neg - phi.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn grw_multiplier_oracles() {
        let g = grid();
        let spec = grw_generator(&g, GRWParams { lambda: 1.0, alpha: 4.0 }).unwrap();
        let Kind::CNumber { multiplier, .. } = &spec.kind else {
            panic!("grw is c-number")
        };
        // diagonal untouched
        for j in 0..g.n_points() {
            assert_eq!(multiplier[[j, j]], C64::new(0.0, 0.0));
        }
        // s = 1 (two lattice steps at dx = 0.5): -(1 - e^{-1})
        let j = 32;
        let k = 30;
        assert!((multiplier[[j, k]].re - (-(1.0 - (-1.0f64).exp()))).abs() < 1e-12);
        // deep saturation: alpha s^2/4 >= 80 leaves no representable residue
        let far = 32 + ((320.0f64 / 4.0).sqrt() / g.dx()).ceil() as usize;
        assert!((multiplier[[far, 32]].re - (-1.0)).abs() < 1e-15);
    }

    #[test]
    fn point_mass_at_zero_is_the_zero_generator() {
        let g = grid();
        let d = MomentumTransferDistribution::new(&g, &[(0, 1.0)]).unwrap();
        let spec = momentum_transfer_generator(&g, 1.0, &d).unwrap();
        let rho = random_state(&g, 1);
        let out = spec.apply(&rho).unwrap();
        assert!(out.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-15);
    }

    #[test]
    fn multiplier_and_boost_sum_paths_agree() {
        let g = grid();
        let spec = grw_generator(&g, GRWParams { lambda: 1.3, alpha: 4.0 }).unwrap();
        let cross = spec.clone().with_boost_sum(true).unwrap();
        let rho = random_state(&g, 2);
        let a = spec.apply(&rho).unwrap();
        let b = cross.apply(&rho).unwrap();
        let err = (&a - &b).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "path disagreement {err}");
    }

    #[test]
    fn momentum_transfer_matches_grw_for_gaussian_dist() {
        let g = grid();
        let alpha = 4.0;
        let k_max = (8.0 * (alpha / 2.0f64).sqrt() / g.dq()).ceil() as i64;
        let d = MomentumTransferDistribution::gaussian(&g, alpha, k_max).unwrap();
        let mt = momentum_transfer_generator(&g, 1.0, &d).unwrap();
        let grw = grw_generator(&g, GRWParams { lambda: 1.0, alpha }).unwrap();
        let rho = random_state(&g, 3);
        let a = mt.apply(&rho).unwrap();
        let b = grw.apply(&rho).unwrap();
        let err = (&a - &b).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn collisional_gaussian_kernel_equals_grw() {
        let g = grid();
        let (lambda, alpha) = (0.7, 4.0);
        let k_max = (8.0 * (alpha / 2.0f64).sqrt() / g.dq()).ceil() as i64;
        let kernel = gaussian_collision_kernel(&g, lambda, alpha, k_max).unwrap();
        let coll = collisional_zero_energy_generator(&g, &kernel).unwrap();
        let grw = grw_generator(&g, GRWParams { lambda, alpha }).unwrap();
        let rho = random_state(&g, 4);
        let a = coll.apply(&rho).unwrap();
        let b = grw.apply(&rho).unwrap();
        let err = (&a - &b).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn empty_kernel_is_zero_generator() {
        let g = grid();
        let coll = collisional_zero_energy_generator(&g, &[]).unwrap();
        let rho = random_state(&g, 5);
        let out = coll.apply(&rho).unwrap();
        assert!(out.iter().all(|z| z.norm() == 0.0));
        assert!(collisional_zero_energy_generator(&g, &[(1, -0.5)]).is_err());
    }

    #[test]
    fn structure_factor_oracles() {
        // beta=8, m=1, q=1, E=0 -> sqrt(8/2pi) e^{-1}
        let s = dynamic_structure_factor(1.0, 0.0, 1.0, 8.0).unwrap();
        let oracle = (8.0 / (2.0 * std::f64::consts::PI)).sqrt() * (-1.0f64).exp();
        assert_abs_diff_eq!(s, oracle, epsilon = 1e-12);
        assert!((oracle - 0.415107).abs() < 1e-6);
        // zero exponent: 2mE + q^2 = 0
        let q: f64 = 1.5;
        let e = -q * q / 2.0;
        let s2 = dynamic_structure_factor(q, e, 1.0, 8.0).unwrap();
        assert_abs_diff_eq!(
            s2,
            (8.0 / (2.0 * std::f64::consts::PI)).sqrt() / q,
            epsilon = 1e-12
        );
        // even in q
        assert_abs_diff_eq!(
            dynamic_structure_factor(2.0, 0.3, 1.0, 8.0).unwrap(),
            dynamic_structure_factor(-2.0, 0.3, 1.0, 8.0).unwrap(),
            epsilon = 1e-15
        );
        assert!(dynamic_structure_factor(0.0, 0.0, 1.0, 8.0).is_err());
    }

    #[test]
    fn linear_boltzmann_zero_energy_flag_reduces_to_collisional() {
        let g = grid();
        let (m, beta, mass) = (1.0, 4.0, 1.0);
        let kernel: Vec<(i64, f64)> = vec![(1, 0.3), (-1, 0.3), (2, 0.1), (-2, 0.1)];
        let lb = linear_boltzmann_generator(&g, &kernel, mass, m, beta, true).unwrap();
        // equivalent zero-energy kernel: w(q) S(q, 0)
        let eff: Vec<(i64, f64)> = kernel
            .iter()
            .map(|&(k, w)| {
                let q = k as f64 * g.dq();
                (k, w * dynamic_structure_factor(q, 0.0, m, beta).unwrap())
            })
            .collect();
        let coll = collisional_zero_energy_generator(&g, &eff).unwrap();
        let rho = random_state(&g, 6);
        let a = lb.apply(&rho).unwrap();
        let b = coll.apply(&rho).unwrap();
        let err = (&a - &b).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn linear_boltzmann_rejects_zero_transfer() {
        let g = grid();
        assert!(linear_boltzmann_generator(&g, &[(0, 1.0)], 1.0, 1.0, 1.0, false).is_err());
    }

    #[test]
    fn traces_vanish_for_all_variants() {
        let g = grid();
        let rho = random_state(&g, 7);
        let kernel: Vec<(i64, f64)> = vec![(1, 0.4), (-1, 0.4), (3, 0.1), (-3, 0.1)];
        let specs = vec![
            grw_generator(&g, GRWParams { lambda: 1.0, alpha: 4.0 }).unwrap(),
            collisional_zero_energy_generator(&g, &kernel).unwrap(),
            linear_boltzmann_generator(&g, &kernel, 1.0, 1.0, 4.0, false).unwrap(),
            qbm_generator(&g, QBMParams { lambda_bar: 1.0, alpha_bar: 0.5 }).unwrap(),
        ];
        for spec in specs {
            let out = spec.apply(&rho).unwrap();
            let tr: C64 = out.diag().sum();
            assert!(tr.norm() < 1e-11, "{:?}: trace {tr}", spec.variant());
            // hermitize is exact by construction
            assert!(crate::lattice::hermiticity_defect(&out) == 0.0);
        }
    }

    #[test]
    fn relaxation_direction_of_linear_boltzmann() {
        let g = grid();
        let mass = 1.0;
        let (m, beta) = (1.0, 1.0);
        let kernel: Vec<(i64, f64)> = (1..=10)
            .flat_map(|k| [(k, 0.05), (-k, 0.05)])
            .collect();
        let lb = linear_boltzmann_generator(&g, &kernel, mass, m, beta, false).unwrap();
        // hot: <p^2> = 4 M/beta via p0; cold: <p^2> = M/(4 beta)
        let hot = gaussian_packet(&g, 0.0, (4.0f64).sqrt(), 2.0).unwrap();
        let cold = gaussian_packet(&g, 0.0, 0.0, 2.0).unwrap();
        assert!(second_moment_rate(&lb, &hot).unwrap() < 0.0);
        assert!(second_moment_rate(&lb, &cold).unwrap() > 0.0);
    }

    #[test]
    fn qbm_moment_identity() {
        let g = Grid::new(128, 32.0).unwrap();
        let p = QBMParams { lambda_bar: 0.8, alpha_bar: 0.5 };
        let spec = qbm_generator(&g, p).unwrap();
        for (p0, sigma) in [(0.0, 1.0), (1.0, 1.5), (-0.7, 0.9)] {
            let rho = gaussian_packet(&g, 0.0, p0, sigma).unwrap();
            let p2 = crate::states::measure(&rho, &g, 1.0, &[]).unwrap().second_moment_p;
            let rate = second_moment_rate(&spec, &rho).unwrap();
            let oracle = p.lambda_bar - 4.0 * p.lambda_bar * p.alpha_bar * p2;
            let rel = (rate - oracle).abs() / oracle.abs().max(1e-12);
            assert!(rel < 1e-5, "p0={p0} sigma={sigma}: rate {rate} vs {oracle}");
        }
    }

    #[test]
    fn qbm_with_zero_rate_is_zero() {
        let g = grid();
        let spec = qbm_generator(&g, QBMParams { lambda_bar: 0.0, alpha_bar: 0.5 }).unwrap();
        let rho = random_state(&g, 8);
        let out = spec.apply(&rho).unwrap();
        assert!(out.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-15);
    }

    #[test]
    fn mass_scaling_oracles() {
        let p = mass_scaled_params(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!((p.lambda_bar, p.alpha_bar), (1.0, 1.0));
        let p = mass_scaled_params(2.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!((p.lambda_bar, p.alpha_bar), (2.0, 0.5));
        for m in [0.3, 1.7, 42.0] {
            let p = mass_scaled_params(m, 1.0, 1.3, 0.7).unwrap();
            assert_abs_diff_eq!(p.lambda_bar * p.alpha_bar, 1.3 * 0.7, epsilon = 1e-12);
        }
        assert!(mass_scaled_params(-1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn grw_kills_nothing_on_position_diagonal_states() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = g.n_points();
        let mut e = Array2::<C64>::zeros((n, n));
        let mut tot = 0.0;
        let mut diag = vec![0.0; n];
        for d in diag.iter_mut() {
            *d = rng.random::<f64>();
            tot += *d;
        }
        for (j, d) in diag.iter().enumerate() {
            e[[j, j]] = C64::new(d / tot, 0.0);
        }
        let rho = DensityMatrix::new(e, Representation::Position).unwrap();
        let spec = grw_generator(&g, GRWParams { lambda: 1.0, alpha: 4.0 }).unwrap();
        let out = spec.apply(&rho).unwrap();
        assert!(out.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-14);
    }

    #[test]
    fn cat_state_lobe_derivative_matches_closed_form() {
        let g = grid();
        let (lambda, alpha) = (1.0, 4.0);
        let d = 8.0;
        let rho = cat_state(&g, d, 1.0).unwrap();
        let spec = grw_generator(&g, GRWParams { lambda, alpha }).unwrap();
        let out = spec.apply(&rho).unwrap();
        let jp = nearest_index(&g, d / 2.0);
        let jm = nearest_index(&g, -d / 2.0);
        let expect = -lambda * (1.0 - (-alpha * d * d / 4.0).exp());
        let got = out[[jp, jm]] / rho.entries()[[jp, jm]];
        assert!((got.re - expect).abs() < 1e-10 && got.im.abs() < 1e-10, "{got}");
    }

    #[test]
    fn boost_mixtures_are_unital() {
        let g = grid();
        let rho = DensityMatrix::maximally_mixed(64);
        let spec = grw_generator(&g, GRWParams { lambda: 1.0, alpha: 4.0 }).unwrap();
        let out = spec.apply(&rho).unwrap();
        assert!(out.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn covariance_residuals() {
        let g = grid();
        let rho = random_state(&g, 10);
        let kernel: Vec<(i64, f64)> = vec![(1, 0.5), (-1, 0.5), (2, 0.2), (-2, 0.2)];
        let specs = vec![
            grw_generator(&g, GRWParams { lambda: 1.0, alpha: 4.0 }).unwrap(),
            collisional_zero_energy_generator(&g, &kernel).unwrap(),
            linear_boltzmann_generator(&g, &kernel, 1.0, 1.0, 2.0, false).unwrap(),
            qbm_generator(&g, QBMParams { lambda_bar: 1.0, alpha_bar: 0.5 }).unwrap(),
        ];
        for spec in &specs {
            for steps in [1i64, 7, 31, -5] {
                let r = check_translation_covariance(spec, &rho, steps).unwrap();
                assert!(r <= 1e-12, "{:?} steps {steps}: residual {r}", spec.variant());
            }
        }
        // negative control
        let broken = broken_rate_generator(&g, GRWParams { lambda: 1.0, alpha: 4.0 }).unwrap();
        let r = check_translation_covariance(&broken, &rho, 7).unwrap();
        assert!(r > 1e-3, "broken fixture residual too small: {r}");
    }

    #[test]
    fn grid_mismatch_rejected() {
        let g = grid();
        let other = Grid::new(32, 16.0).unwrap();
        let spec = grw_generator(&g, GRWParams { lambda: 1.0, alpha: 4.0 }).unwrap();
        let rho = DensityMatrix::maximally_mixed(other.n_points());
        assert!(matches!(spec.apply(&rho), Err(Error::GridMismatch { .. })));
    }
}
