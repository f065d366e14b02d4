//! AC-mode resonant transitions between bouncer states.
//!
//! With the wire currents oscillating at the driving frequency f and a
//! transverse holding field B₀y, a neutron whose spin follows the field sees
//! the vertical gradient
//!
//! β(t) = β̂·B₁cos²θ / √(B₁²cos²θ + B₀y²),   θ = 2πft + φ,
//!
//! which repeats at 2f and has a non-zero mean β₀. The amplitudes in the
//! bouncer basis evolve under
//!
//! i daₙ/dt = (Eₙ/ħ) aₙ + Σₘ s(μ/ħ) β(t) ⟨n|ẑ|m⟩ aₘ,
//!
//! with s = ±1 for spin parallel / antiparallel to the field. The full
//! non-harmonic drive and all couplings, diagonal ones included, are kept.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, pow, sqrt};
use num_complex::Complex64;

use crate::bouncer::BouncerSpectrum;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::ode::{steps_for, OdeSystem, Rk4};
use crate::velocity::VelocitySpectrum;

/// Largest phase advance per step, rad, accepted by the amplitude solver.
pub const MAX_PHASE_PER_STEP: f64 = 0.05;

/// Default fixed step of the amplitude solver, s.
pub const DEFAULT_STEP: f64 = 5e-6;

/// Time-dependent gradient seen by a spin-following neutron.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientWaveform {
    /// Gradient scale β̂, T/m.
    pub beta_hat: f64,
    /// Rotating field amplitude, T.
    pub b1: f64,
    /// Holding field, T.
    pub b0y: f64,
    /// Hz
    pub driving_frequency: f64,
    /// rad
    pub phase: f64,
}

impl GradientWaveform {
    /// β as a function of the drive phase θ = 2πft + φ.
    #[inline]
    pub fn at_phase(&self, theta: f64) -> f64 {
        let c = cos(theta);
        let bx = self.b1 * c;
        let denom = sqrt(bx * bx + self.b0y * self.b0y);
        if denom == 0.0 {
            return 0.0;
        }
        self.beta_hat * self.b1 * c * c / denom
    }

    /// β(t), T/m.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        self.at_phase(2.0 * PI * self.driving_frequency * t + self.phase)
    }

    /// Peak value β̂·B₁/√(B₁² + B₀y²).
    pub fn max_value(&self) -> f64 {
        let d = sqrt(self.b1 * self.b1 + self.b0y * self.b0y);
        if d == 0.0 {
            0.0
        } else {
            self.beta_hat * self.b1.abs() / d
        }
    }
}

/// Cosine series of β in the excitation phase 2θ = 4πft + 2φ.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoefficients {
    /// Mean value β₀, T/m.
    pub beta0: f64,
    /// β₁, β₂, … multiplying cos(2kθ), T/m.
    pub harmonics: Vec<f64>,
}

impl FourierCoefficients {
    pub fn beta1(&self) -> f64 {
        self.harmonics[0]
    }

    /// Truncated series at drive phase θ.
    pub fn reconstruct(&self, theta: f64) -> f64 {
        self.beta0
            + self
                .harmonics
                .iter()
                .enumerate()
                .map(|(k, b)| b * cos(2.0 * (k + 1) as f64 * theta))
                .sum::<f64>()
    }
}

/// Quadrature points per period used by [`fourier_coefficients`].
pub const FOURIER_POINTS: usize = 4096;

/// Fourier coefficients by the trapezoid rule over one period of β.
pub fn fourier_coefficients(w: &GradientWaveform, n_harmonics: usize) -> Result<FourierCoefficients> {
    if n_harmonics == 0 {
        return Err(Error::Empty("harmonic request"));
    }
    let n = FOURIER_POINTS;
    let dtheta = PI / n as f64;
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let theta = i as f64 * dtheta;
            (theta, w.at_phase(theta))
        })
        .collect();
    let beta0 = samples.iter().map(|s| s.1).sum::<f64>() / n as f64;
    let harmonics = (1..=n_harmonics)
        .map(|k| {
            2.0 / n as f64
                * samples
                    .iter()
                    .map(|(th, b)| b * cos(2.0 * k as f64 * th))
                    .sum::<f64>()
        })
        .collect();
    Ok(FourierCoefficients { beta0, harmonics })
}

/// The gradient driving the amplitude equations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Drive {
    Waveform(GradientWaveform),
    /// β₀ + β₁cos(4πft + 2φ).
    Harmonic {
        beta0: f64,
        beta1: f64,
        driving_frequency: f64,
        phase: f64,
    },
}

impl Drive {
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Drive::Waveform(w) => w.value(t),
            Drive::Harmonic {
                beta0,
                beta1,
                driving_frequency,
                phase,
            } => beta0 + beta1 * cos(4.0 * PI * driving_frequency * t + 2.0 * phase),
        }
    }

    /// Upper bound on |β(t)|.
    pub fn max_abs(&self) -> f64 {
        match self {
            Drive::Waveform(w) => w.max_value().abs(),
            Drive::Harmonic { beta0, beta1, .. } => beta0.abs() + beta1.abs(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    /// Parallel to the field, s = +1.
    Up,
    /// Antiparallel, s = −1.
    Down,
}

impl Spin {
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }
}

/// Linear system i da/dt = (Ω + β(t)·C) a in a truncated basis.
///
/// Energies are stored relative to their mean; that only changes the global
/// phase of the state and keeps the fastest rotation in the integrator small.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeSystem {
    /// Diagonal angular frequencies, rad/s.
    omegas: Vec<f64>,
    /// Row-major coupling per unit gradient, rad/s per T/m.
    coupling: Vec<f64>,
    drive: Drive,
}

impl AmplitudeSystem {
    /// Bouncer basis of `spectrum` with coupling s(μ/ħ)⟨n|ẑ|m⟩.
    pub fn new(spectrum: &BouncerSpectrum, drive: Drive, spin: Spin) -> Self {
        let c = spectrum.constants();
        let scale = spin.sign() * c.mu_neutron / c.hbar;
        let omegas = spectrum.energies().iter().map(|e| e / c.hbar).collect();
        let coupling = spectrum.position_matrix().iter().map(|z| scale * z).collect();
        Self::from_parts(omegas, coupling, drive)
    }

    /// Arbitrary basis: `omegas` in rad/s, `coupling` row-major N×N.
    pub fn from_parts(omegas: Vec<f64>, coupling: Vec<f64>, drive: Drive) -> Self {
        let n = omegas.len();
        assert_eq!(coupling.len(), n * n, "coupling must be N×N");
        let mean = omegas.iter().sum::<f64>() / n as f64;
        Self {
            omegas: omegas.into_iter().map(|w| w - mean).collect(),
            coupling,
            drive,
        }
    }

    pub fn n_states(&self) -> usize {
        self.omegas.len()
    }

    /// Bound on the fastest phase rotation, rad/s.
    pub fn max_rate(&self) -> f64 {
        let n = self.n_states();
        let diag = self.omegas.iter().fold(0.0f64, |a, w| a.max(w.abs()));
        let row = (0..n)
            .map(|i| self.coupling[i * n..(i + 1) * n].iter().map(|c| c.abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        diag + row * self.drive.max_abs()
    }

    fn check_step(&self, step: f64) -> Result<()> {
        if !(step > 0.0) {
            return Err(Error::NonPositive {
                name: "step",
                value: step,
            });
        }
        let rate = self.max_rate();
        let angle = rate * step;
        if angle >= MAX_PHASE_PER_STEP {
            return Err(Error::StepTooLarge {
                step,
                rate,
                angle,
                limit: MAX_PHASE_PER_STEP,
            });
        }
        Ok(())
    }

    /// Evolves `initial` from t = 0 and returns the state at each of the
    /// ascending `times`. Every segment between consecutive times is split
    /// into equal steps of at most `step`.
    pub fn evolve(&self, initial: &[Complex64], times: &[f64], step: f64) -> Result<Vec<Vec<Complex64>>> {
        self.check_step(step)?;
        let n = self.n_states();
        if initial.len() != n {
            return Err(Error::IndexOutOfRange {
                index: initial.len(),
                len: n,
            });
        }
        let mut y: Vec<f64> = initial.iter().flat_map(|a| [a.re, a.im]).collect();
        let mut rk = Rk4::new(2 * n);
        let mut t = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            if target < t {
                return Err(Error::OutOfDomain {
                    name: "time",
                    value: target,
                    reason: "output times must be ascending and non-negative",
                });
            }
            let steps = steps_for(target - t, step);
            if steps > 0 {
                let h = (target - t) / steps as f64;
                for i in 0..steps {
                    rk.step(self, t + i as f64 * h, h, &mut y);
                }
            }
            t = target;
            out.push(y.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect());
        }
        Ok(out)
    }
}

impl OdeSystem for AmplitudeSystem {
    fn dim(&self) -> usize {
        2 * self.n_states()
    }

    #[inline]
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        let n = self.omegas.len();
        let beta = self.drive.value(t);
        for i in 0..n {
            let row = &self.coupling[i * n..(i + 1) * n];
            let mut re = self.omegas[i] * y[2 * i];
            let mut im = self.omegas[i] * y[2 * i + 1];
            let (mut cre, mut cim) = (0.0, 0.0);
            for (j, c) in row.iter().enumerate() {
                cre += c * y[2 * j];
                cim += c * y[2 * j + 1];
            }
            re += beta * cre;
            im += beta * cim;
            // da/dt = −i (H a)
            dydt[2 * i] = im;
            dydt[2 * i + 1] = -re;
        }
    }
}

/// Amplitudes at the end of the transition region.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeState {
    pub amplitudes: Vec<Complex64>,
    pub spin: Spin,
    /// m/s
    pub velocity: f64,
    /// rad
    pub phase: f64,
    /// Time spent in the region, s.
    pub time: f64,
}

impl AmplitudeState {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// |aₙ|² for 1-based n.
    pub fn probability(&self, n: usize) -> f64 {
        self.amplitudes[n - 1].norm_sqr()
    }
}

fn basis_state(n_states: usize, state: usize) -> Result<Vec<Complex64>> {
    if state == 0 || state > n_states {
        return Err(Error::IndexOutOfRange {
            index: state,
            len: n_states,
        });
    }
    let mut a = alloc::vec![Complex64::new(0.0, 0.0); n_states];
    a[state - 1] = Complex64::new(1.0, 0.0);
    Ok(a)
}

/// Integrates a neutron through a region of length `length` at speed `v`,
/// starting in `initial_state`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_amplitudes(
    spectrum: &BouncerSpectrum,
    waveform: &GradientWaveform,
    spin: Spin,
    velocity: f64,
    initial_state: usize,
    length: f64,
    step: f64,
) -> Result<AmplitudeState> {
    if !(velocity > 0.0) {
        return Err(Error::NonPositive {
            name: "velocity",
            value: velocity,
        });
    }
    if !(length > 0.0) {
        return Err(Error::NonPositive {
            name: "length",
            value: length,
        });
    }
    let initial = basis_state(spectrum.n_states(), initial_state)?;
    let system = AmplitudeSystem::new(spectrum, Drive::Waveform(*waveform), spin);
    let time = length / velocity;
    let mut states = system.evolve(&initial, &[time], step)?;
    Ok(AmplitudeState {
        amplitudes: states.pop().expect("one output time"),
        spin,
        velocity,
        phase: waveform.phase,
        time,
    })
}

/// Gradient waveform parameters independent of drive frequency and phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Excitation {
    /// T/m
    pub beta_hat: f64,
    /// T
    pub b1: f64,
    /// T
    pub b0y: f64,
}

impl Default for Excitation {
    fn default() -> Self {
        Self {
            beta_hat: 0.52,
            b1: 0.8e-3,
            b0y: 0.3e-3,
        }
    }
}

impl Excitation {
    pub fn waveform(&self, driving_frequency: f64, phase: f64) -> GradientWaveform {
        GradientWaveform {
            beta_hat: self.beta_hat,
            b1: self.b1,
            b0y: self.b0y,
            driving_frequency,
            phase,
        }
    }
}

/// Settings of a resonance-curve computation.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceSetup {
    pub excitation: Excitation,
    /// Driving frequencies, Hz.
    pub frequencies: Vec<f64>,
    pub velocity: VelocitySpectrum,
    pub phase_samples: usize,
    /// Length of the transition region, m.
    pub length: f64,
    pub initial_state: usize,
    /// State whose population is read out at the exit.
    pub final_state: usize,
    /// s
    pub step: f64,
}

impl Default for ResonanceSetup {
    fn default() -> Self {
        Self {
            excitation: Excitation::default(),
            frequencies: frequency_grid(80.0, 180.0, 0.5),
            velocity: VelocitySpectrum::default(),
            phase_samples: 16,
            length: 0.16,
            initial_state: 2,
            final_state: 1,
            step: DEFAULT_STEP,
        }
    }
}

/// Inclusive uniform grid from `lo` to `hi`.
pub fn frequency_grid(lo: f64, hi: f64, spacing: f64) -> Vec<f64> {
    let n = libm::round((hi - lo) / spacing) as usize;
    (0..=n).map(|i| lo + i as f64 * spacing).collect()
}

impl ResonanceSetup {
    pub fn validate(&self, n_states: usize) -> Result<()> {
        if self.frequencies.is_empty() {
            return Err(Error::Empty("frequency grid"));
        }
        if let Some(&f) = self.frequencies.iter().find(|f| !(**f >= 0.0 && f.is_finite())) {
            return Err(Error::OutOfDomain {
                name: "driving frequency",
                value: f,
                reason: "must be finite and non-negative",
            });
        }
        if self.phase_samples == 0 {
            return Err(Error::Empty("phase samples"));
        }
        if !(self.length > 0.0) {
            return Err(Error::NonPositive {
                name: "length",
                value: self.length,
            });
        }
        for s in [self.initial_state, self.final_state] {
            if s == 0 || s > n_states {
                return Err(Error::IndexOutOfRange {
                    index: s,
                    len: n_states,
                });
            }
        }
        if !(self.excitation.beta_hat >= 0.0 && self.excitation.b1 >= 0.0 && self.excitation.b0y >= 0.0) {
            return Err(Error::OutOfDomain {
                name: "excitation",
                value: self.excitation.beta_hat,
                reason: "gradient scale and fields must be non-negative",
            });
        }
        self.velocity.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceCurve {
    /// Hz
    pub frequencies: Vec<f64>,
    /// Spin-averaged transition probability.
    pub probabilities: Vec<f64>,
    pub spin_up: Vec<f64>,
    pub spin_down: Vec<f64>,
}

/// Exit-state probability for one (f, spin, φ) cell at every velocity node,
/// from a single integration: the drive does not depend on v, so a neutron
/// of speed v is simply read out at t = L/v.
fn cell_probabilities(
    spectrum: &BouncerSpectrum,
    setup: &ResonanceSetup,
    exit_times: &[f64],
    frequency: f64,
    spin: Spin,
    phase: f64,
) -> Result<Vec<f64>> {
    let drive = Drive::Waveform(setup.excitation.waveform(frequency, phase));
    let system = AmplitudeSystem::new(spectrum, drive, spin);
    let initial = basis_state(spectrum.n_states(), setup.initial_state)?;
    let states = system.evolve(&initial, exit_times, setup.step)?;
    Ok(states
        .iter()
        .map(|a| a[setup.final_state - 1].norm_sqr())
        .collect())
}

/// Transition probability versus driving frequency, averaged over phase,
/// velocity and (for `probabilities`) spin.
pub fn resonance_curve<E: Executor>(
    spectrum: &BouncerSpectrum,
    setup: &ResonanceSetup,
    exec: &E,
) -> Result<ResonanceCurve> {
    setup.validate(spectrum.n_states())?;
    let nodes = setup.velocity.nodes()?;
    // Fastest neutrons leave first.
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| nodes[b].0.total_cmp(&nodes[a].0));
    let exit_times: Vec<f64> = order.iter().map(|&i| setup.length / nodes[i].0).collect();
    let weights: Vec<f64> = order.iter().map(|&i| nodes[i].1).collect();

    let nf = setup.frequencies.len();
    let np = setup.phase_samples;
    let spins = [Spin::Up, Spin::Down];
    let cells = exec.map(nf * 2 * np, |idx| {
        let ip = idx % np;
        let is = (idx / np) % 2;
        let i_f = idx / (2 * np);
        let phase = 2.0 * PI * ip as f64 / np as f64;
        cell_probabilities(spectrum, setup, &exit_times, setup.frequencies[i_f], spins[is], phase)
    });
    let cells: Vec<Vec<f64>> = cells.into_iter().collect::<Result<_>>()?;

    let mut up = Vec::with_capacity(nf);
    let mut down = Vec::with_capacity(nf);
    for i_f in 0..nf {
        for (is, target) in [&mut up, &mut down].into_iter().enumerate() {
            let base = (i_f * 2 + is) * np;
            let mut acc = 0.0;
            for cell in &cells[base..base + np] {
                acc += cell.iter().zip(&weights).map(|(p, w)| p * w).sum::<f64>();
            }
            target.push(acc / np as f64);
        }
    }
    let probabilities = up.iter().zip(&down).map(|(a, b)| 0.5 * (a + b)).collect();
    Ok(ResonanceCurve {
        frequencies: setup.frequencies.clone(),
        probabilities,
        spin_up: up,
        spin_down: down,
    })
}

/// Curves whose maximum stays below this are treated as flat.
pub const PEAK_NOISE_FLOOR: f64 = 1e-3;

/// Location of the maximum of a sampled curve, refined by a parabola through
/// the largest sample and its neighbours.
pub fn find_peak(frequencies: &[f64], values: &[f64]) -> Result<f64> {
    if frequencies.is_empty() || frequencies.len() != values.len() {
        return Err(Error::Empty("curve"));
    }
    let (imax, &vmax) = values
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    if !(vmax >= PEAK_NOISE_FLOOR) {
        return Err(Error::NoPeak { max: vmax });
    }
    if imax == 0 || imax + 1 == values.len() {
        return Ok(frequencies[imax]);
    }
    let (x0, x1, x2) = (frequencies[imax - 1], frequencies[imax], frequencies[imax + 1]);
    let (y0, y1, y2) = (values[imax - 1], values[imax], values[imax + 1]);
    // Vertex of the interpolating parabola (non-uniform spacing allowed).
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if curvature >= 0.0 {
        return Ok(x1);
    }
    let vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
    Ok(vertex.clamp(x0, x2))
}

/// Driving frequencies of the spin-resolved maxima.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peaks {
    /// Spin parallel to the field, Hz.
    pub f_plus: f64,
    /// Spin antiparallel, Hz.
    pub f_minus: f64,
}

pub fn find_peaks(curve: &ResonanceCurve) -> Result<Peaks> {
    Ok(Peaks {
        f_plus: find_peak(&curve.frequencies, &curve.spin_up)?,
        f_minus: find_peak(&curve.frequencies, &curve.spin_down)?,
    })
}

/// Spin-dependent excitation frequencies of the n→m line when the mean
/// gradient β₀ acts as a shift of gravity: m·g± = m·g ± μβ₀, giving
/// f±_nm = f_nm (1 ± μβ₀/mg)^(2/3). Returns (f⁺, f⁻) in Hz.
pub fn stern_gerlach_prediction(
    spectrum: &BouncerSpectrum,
    beta0: f64,
    n: usize,
    m: usize,
) -> Result<(f64, f64)> {
    let f_nm = spectrum.transition_frequency(n, m)?;
    let c = spectrum.constants();
    let ratio = c.mu_neutron * beta0 / c.weight();
    if !(ratio.abs() < 1.0) {
        return Err(Error::OutOfDomain {
            name: "beta0",
            value: beta0,
            reason: "magnetic force reverses effective gravity",
        });
    }
    Ok((
        f_nm * pow(1.0 + ratio, 2.0 / 3.0),
        f_nm * pow(1.0 - ratio, 2.0 / 3.0),
    ))
}

/// Unperturbed transition frequency from the spin-resolved driving-frequency
/// peaks. The excitation runs at twice the driving frequency, and the
/// (3/2)-power mean cancels the Stern-Gerlach shift to first order.
pub fn extract_unperturbed_frequency(f_plus: f64, f_minus: f64) -> Result<f64> {
    for (name, value) in [("f_plus", f_plus), ("f_minus", f_minus)] {
        if !(value > 0.0) {
            return Err(Error::NonPositive { name, value });
        }
    }
    if f_plus < f_minus {
        return Err(Error::OutOfDomain {
            name: "f_plus",
            value: f_plus,
            reason: "spin-up peak must not lie below the spin-down peak",
        });
    }
    let mean = 0.5 * (pow(2.0 * f_plus, 1.5) + pow(2.0 * f_minus, 1.5));
    Ok(pow(mean, 2.0 / 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::PhysicalConstants;
    use approx::assert_relative_eq;

    fn benchmark_waveform(f: f64) -> GradientWaveform {
        Excitation::default().waveform(f, 0.0)
    }

    #[test]
    fn waveform_limits() {
        let w = benchmark_waveform(100.0);
        assert_relative_eq!(w.value(0.0), 0.52 * 0.8 / sqrt(0.73), max_relative = 1e-12);
        assert!((w.max_value() - 0.487).abs() < 1e-3);
        // cos θ = 0 a quarter drive period in.
        assert!(w.value(0.25 / 100.0).abs() < 1e-12);
        let rectified = GradientWaveform { b0y: 0.0, ..w };
        for i in 0..50 {
            let t = i as f64 * 1.3e-4;
            let expect = 0.52 * cos(2.0 * PI * 100.0 * t).abs();
            assert!((rectified.value(t) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn waveform_period_is_half_the_drive_period() {
        let w = GradientWaveform {
            phase: 0.7,
            ..benchmark_waveform(123.0)
        };
        for i in 0..100 {
            let t = i as f64 * 7.1e-5;
            assert!((w.value(t) - w.value(t + 1.0 / 246.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn rectified_mean() {
        let w = GradientWaveform {
            b0y: 0.0,
            ..benchmark_waveform(100.0)
        };
        let c = fourier_coefficients(&w, 1).unwrap();
        assert_relative_eq!(c.beta0, 2.0 / PI * 0.52, max_relative = 1e-6);
        assert!(fourier_coefficients(&w, 0).is_err());
    }

    #[test]
    fn free_evolution_only_rotates_phases() {
        let s = BouncerSpectrum::new(PhysicalConstants::default(), 4).unwrap();
        let w = GradientWaveform {
            beta_hat: 0.0,
            ..benchmark_waveform(120.0)
        };
        let sys = AmplitudeSystem::new(&s, Drive::Waveform(w), Spin::Up);
        let a0: Vec<Complex64> = (0..4).map(|i| Complex64::new(0.5, 0.1 * i as f64)).collect();
        let t = 0.03;
        let out = sys.evolve(&a0, &[t], DEFAULT_STEP).unwrap().pop().unwrap();
        let hbar = s.constants().hbar;
        let energies = s.energies();
        let mean = energies.iter().sum::<f64>() / 4.0 / hbar;
        for n in 0..4 {
            let expect = a0[n] * Complex64::from_polar(1.0, -(energies[n] / hbar - mean) * t);
            assert!((out[n] - expect).norm() < 1e-7, "{n}: {} vs {}", out[n], expect);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = BouncerSpectrum::new(PhysicalConstants::default(), 4).unwrap();
        let w = benchmark_waveform(120.0);
        assert!(integrate_amplitudes(&s, &w, Spin::Up, 0.0, 2, 0.16, DEFAULT_STEP).is_err());
        assert!(integrate_amplitudes(&s, &w, Spin::Up, 4.0, 5, 0.16, DEFAULT_STEP).is_err());
        assert!(matches!(
            integrate_amplitudes(&s, &w, Spin::Up, 4.0, 2, 0.16, 1e-4),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn peak_of_synthetic_gaussian() {
        let f = frequency_grid(150.0, 250.0, 0.5);
        let v: Vec<f64> = f
            .iter()
            .map(|x| libm::exp(-0.5 * ((x - 200.0) / 6.0) * ((x - 200.0) / 6.0)))
            .collect();
        assert!((find_peak(&f, &v).unwrap() - 200.0).abs() < 0.1);
        let shifted: Vec<f64> = f
            .iter()
            .map(|x| libm::exp(-0.5 * ((x - 200.2) / 6.0) * ((x - 200.2) / 6.0)))
            .collect();
        assert!((find_peak(&f, &shifted).unwrap() - 200.2).abs() < 0.01);
        let flat = alloc::vec![0.0; f.len()];
        assert!(matches!(find_peak(&f, &flat), Err(Error::NoPeak { .. })));
    }

    #[test]
    fn stern_gerlach_limits() {
        let s = BouncerSpectrum::new(PhysicalConstants::default(), 4).unwrap();
        let f21 = s.transition_frequency(2, 1).unwrap();
        assert_eq!(stern_gerlach_prediction(&s, 0.0, 2, 1).unwrap(), (f21, f21));
        let (p, m) = stern_gerlach_prediction(&s, 0.289, 2, 1).unwrap();
        let (p2, m2) = stern_gerlach_prediction(&s, -0.289, 2, 1).unwrap();
        assert_relative_eq!(p, m2, max_relative = 1e-15);
        assert_relative_eq!(m, p2, max_relative = 1e-15);
        let c = s.constants();
        let reversing = c.weight() / c.mu_neutron;
        assert!(stern_gerlach_prediction(&s, reversing * 1.01, 2, 1).is_err());
    }

    #[test]
    fn extraction() {
        assert_relative_eq!(extract_unperturbed_frequency(120.0, 120.0).unwrap(), 240.0, max_relative = 1e-14);
        let f = extract_unperturbed_frequency(141.5, 113.5).unwrap();
        assert!((f - 255.8).abs() < 0.5, "{f}");
        assert!(extract_unperturbed_frequency(0.0, 100.0).is_err());
        assert!(extract_unperturbed_frequency(100.0, 120.0).is_err());
    }
}
