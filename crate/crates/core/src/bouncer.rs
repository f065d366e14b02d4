//! The quantum bouncer: a neutron above a horizontal mirror in the
//! gravitational field.
//!
//! State indices are 1-based throughout, matching the usual |1⟩, |2⟩, …
//! labelling of the bound states.
//!
//! Wavefunctions use the closed-form normalization
//! ψₙ(z) = Ai(z/z₀ − εₙ) / (√z₀ · |Ai′(−εₙ)|), so ψₙ has the sign of
//! Ai′(−εₙ), i.e. (−1)ⁿ⁻¹, just above the mirror. In that phase convention the
//! position matrix element between distinct states is
//! (−1)ⁿ⁺ᵐ⁺¹ · 2z₀/(εₙ − εₘ)²: positive for neighbouring states, with the
//! familiar magnitude 2z₀/(εₙ − εₘ)² for every pair.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::airy::{airy_ai, airy_zeros};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Default basis size.
pub const DEFAULT_STATES: usize = 4;

/// Dimensionless extent beyond the classical turning point at which
/// wavefunction tails are cut off in overlap integrals.
const TAIL: f64 = 25.0;

#[derive(Clone, Debug, PartialEq)]
pub struct BouncerSpectrum {
    constants: PhysicalConstants,
    epsilon: Vec<f64>,
}

impl BouncerSpectrum {
    pub fn new(constants: PhysicalConstants, n_states: usize) -> Result<Self> {
        constants.validate()?;
        Ok(Self {
            constants,
            epsilon: airy_zeros(n_states)?,
        })
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn n_states(&self) -> usize {
        self.epsilon.len()
    }

    /// Airy-zero magnitudes εₙ, n = 1..N.
    pub fn epsilon(&self) -> &[f64] {
        &self.epsilon
    }

    /// Gravitational length z₀, m.
    pub fn z0(&self) -> f64 {
        self.constants.z0()
    }

    /// Base frequency f₀, Hz.
    pub fn f0(&self) -> f64 {
        self.constants.f0()
    }

    fn eps(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.epsilon.len() {
            return Err(Error::IndexOutOfRange {
                index: n,
                len: self.epsilon.len(),
            });
        }
        Ok(self.epsilon[n - 1])
    }

    /// Eₙ = εₙ·m·g·z₀, J.
    pub fn energy(&self, n: usize) -> Result<f64> {
        Ok(self.eps(n)? * self.constants.energy_scale())
    }

    pub fn energies(&self) -> Vec<f64> {
        let scale = self.constants.energy_scale();
        self.epsilon.iter().map(|e| e * scale).collect()
    }

    /// f_nm = f₀(εₙ − εₘ), Hz. Negative when n < m.
    pub fn transition_frequency(&self, n: usize, m: usize) -> Result<f64> {
        let (en, em) = (self.eps(n)?, self.eps(m)?);
        if n == m {
            return Err(Error::SameState(n));
        }
        Ok(self.f0() * (en - em))
    }

    /// ⟨n|ẑ|m⟩ in metres, in the phase convention described at module level.
    pub fn z_matrix_element(&self, n: usize, m: usize) -> Result<f64> {
        let (en, em) = (self.eps(n)?, self.eps(m)?);
        let z0 = self.z0();
        if n == m {
            return Ok(2.0 / 3.0 * z0 * en);
        }
        let d = en - em;
        let sign = if (n + m) % 2 == 1 { 1.0 } else { -1.0 };
        Ok(sign * 2.0 * z0 / (d * d))
    }

    /// Full N×N position matrix, row-major, metres.
    pub fn position_matrix(&self) -> Vec<f64> {
        let n = self.n_states();
        let mut out = Vec::with_capacity(n * n);
        for i in 1..=n {
            for j in 1..=n {
                out.push(self.z_matrix_element(i, j).expect("indices in range"));
            }
        }
        out
    }

    /// Gradient amplitude β (T/m) for which Ω_nm·t₀ = π.
    pub fn required_gradient(&self, n: usize, m: usize, excitation_time: f64) -> Result<f64> {
        let ratio = self.transition_frequency(n, m)? / self.f0();
        if !(excitation_time > 0.0) {
            return Err(Error::NonPositive {
                name: "excitation_time",
                value: excitation_time,
            });
        }
        let c = &self.constants;
        Ok(PI / 2.0 * c.hbar / (c.mu_neutron * self.z0()) * ratio * ratio / excitation_time)
    }

    /// Ω = (μ/ħ)·|⟨n|ẑ|m⟩|·β, rad/s.
    pub fn rabi_frequency(&self, n: usize, m: usize, beta: f64) -> Result<f64> {
        let z = self.z_matrix_element(n, m)?;
        if !(beta >= 0.0) {
            return Err(Error::OutOfDomain {
                name: "beta",
                value: beta,
                reason: "gradient amplitude must be non-negative",
            });
        }
        let c = &self.constants;
        Ok(c.mu_neutron / c.hbar * z.abs() * beta)
    }

    /// ψₙ(z) in m^(-1/2); zero below the mirror.
    pub fn wavefunction(&self, n: usize, z: f64) -> Result<f64> {
        let e = self.eps(n)?;
        let z0 = self.z0();
        Ok(scaled_wavefunction(e, z / z0) / libm::sqrt(z0))
    }
}

/// Unit-norm eigenfunction in units of z₀: ∫₀^∞ φ(ζ)² dζ = 1.
pub fn scaled_wavefunction(epsilon: f64, zeta: f64) -> f64 {
    if zeta < 0.0 {
        return 0.0;
    }
    let norm = airy_ai(-epsilon).1.abs();
    airy_ai(zeta - epsilon).0 / norm
}

fn overlap_rule() -> GaussLegendre {
    GaussLegendre::new(12)
}

/// ∫ f over [a, b] with panels no wider than a quarter of z₀.
fn integrate_scaled<F: FnMut(f64) -> f64>(rule: &GaussLegendre, a: f64, b: f64, f: F) -> f64 {
    let panels = libm::ceil((b - a) / 0.25).max(1.0) as usize;
    rule.integrate(a, b, panels, f)
}

fn check_norm(rule: &GaussLegendre, state: usize, epsilon: f64) -> Result<()> {
    let norm = integrate_scaled(rule, 0.0, epsilon + TAIL, |x| {
        let p = scaled_wavefunction(epsilon, x);
        p * p
    });
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Normalization { state, norm });
    }
    Ok(())
}

/// Populations after the neutron descends a step of height h.
///
/// Before the step the mirror sits at z = h and the neutron is in the
/// eigenstate `incoming_state` of that raised mirror; the state is projected
/// suddenly onto the eigenstates of the mirror at z = 0. Returns pₙ for
/// n = 1..N; the remainder 1 − Σpₙ has leaked into states above the basis.
pub fn step_populations(
    spectrum: &BouncerSpectrum,
    step_height: f64,
    incoming_state: usize,
) -> Result<Vec<f64>> {
    if !(step_height > 0.0) {
        return Err(Error::NonPositive {
            name: "step_height",
            value: step_height,
        });
    }
    if incoming_state == 0 {
        return Err(Error::IndexOutOfRange {
            index: 0,
            len: spectrum.n_states(),
        });
    }
    let zeros = airy_zeros(spectrum.n_states().max(incoming_state))?;
    let rule = overlap_rule();
    let eta = step_height / spectrum.z0();
    let e_in = zeros[incoming_state - 1];
    check_norm(&rule, incoming_state, e_in)?;
    (1..=spectrum.n_states())
        .map(|n| {
            let e_out = zeros[n - 1];
            check_norm(&rule, n, e_out)?;
            let upper = eta + e_in.max(e_out) + TAIL;
            let amp = integrate_scaled(&rule, eta, upper, |x| {
                scaled_wavefunction(e_out, x) * scaled_wavefunction(e_in, x - eta)
            });
            Ok(amp * amp)
        })
        .collect()
}

/// Incoherent mixture of raised-mirror states reaching the step.
///
/// State k enters with weight proportional to the flux it transmits through
/// the entrance slit: the fraction of |ψₖ|² lying below the slit ceiling,
/// raised to the number of `passes` the slit filter applies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IncomingEnsemble {
    pub max_state: usize,
    /// Slit ceiling above the raised mirror, m.
    pub slit_height: f64,
    pub passes: u32,
}

impl Default for IncomingEnsemble {
    fn default() -> Self {
        Self {
            max_state: 10,
            slit_height: 25e-6,
            passes: 4,
        }
    }
}

impl IncomingEnsemble {
    /// Normalized weights for k = 1..max_state.
    pub fn weights(&self, constants: &PhysicalConstants) -> Result<Vec<f64>> {
        if self.max_state == 0 {
            return Err(Error::Empty("incoming ensemble"));
        }
        if !(self.slit_height > 0.0) {
            return Err(Error::NonPositive {
                name: "slit_height",
                value: self.slit_height,
            });
        }
        let zeros = airy_zeros(self.max_state)?;
        let rule = overlap_rule();
        let ceiling = self.slit_height / constants.z0();
        let raw: Vec<f64> = zeros
            .iter()
            .map(|&e| {
                let inside = integrate_scaled(&rule, 0.0, ceiling, |x| {
                    let p = scaled_wavefunction(e, x);
                    p * p
                });
                libm::pow(inside.min(1.0), self.passes as f64)
            })
            .collect();
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Degenerate("slit transmits no state"));
        }
        Ok(raw.into_iter().map(|w| w / total).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreparedState {
    pub populations: Vec<f64>,
    /// Step height, m.
    pub step_height: f64,
}

/// Populations after the step for the whole incoming ensemble.
pub fn ensemble_populations(
    spectrum: &BouncerSpectrum,
    step_height: f64,
    ensemble: &IncomingEnsemble,
) -> Result<PreparedState> {
    let weights = ensemble.weights(spectrum.constants())?;
    let mut populations = alloc::vec![0.0; spectrum.n_states()];
    for (k, w) in weights.iter().enumerate() {
        let p = step_populations(spectrum, step_height, k + 1)?;
        for (acc, pk) in populations.iter_mut().zip(p) {
            *acc += w * pk;
        }
    }
    Ok(PreparedState {
        populations,
        step_height,
    })
}
