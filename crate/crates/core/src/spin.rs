//! Spin transport below the wire array.
//!
//! A neutron moving at speed v along x sees, in its rest frame, the
//! spatially periodic array field oscillating at the driving frequency plus
//! the transverse holding field B₀y. The polarization obeys the Bloch
//! equation dΠ/dt = γ Π × B(t); the spin starts aligned with B(0) and the
//! flip probability p(t) = (1 − Π·B/|B|)/2 measures how badly it fails to
//! follow the field.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, sin, sqrt};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::magnetics::{wire_sum, WireArrayConfig};
use crate::ode::{steps_for, OdeSystem, Rk4};
use crate::velocity::VelocitySpectrum;

/// Largest rotation angle γ|B|·step accepted by the integrator, rad.
pub const MAX_ROTATION_PER_STEP: f64 = 0.1;

/// Time-dependent field experienced by the moving neutron.
pub trait RestFrameField: Sync {
    /// B(t) in tesla.
    fn field(&self, t: f64) -> [f64; 3];
    /// An upper bound on |B(t)|, used to bound the step.
    fn max_magnitude(&self) -> f64;
}

/// Analytic rest-frame field of the AC-driven array:
/// Bx = B₁cos(2πft+φ)sin(2πvt/d), By = B₀y, Bz = −B₁cos(2πft+φ)cos(2πvt/d).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestFrameFieldModel {
    /// T
    pub b1: f64,
    /// T
    pub b0y: f64,
    /// m
    pub spatial_period: f64,
    /// Hz
    pub driving_frequency: f64,
    /// rad
    pub phase: f64,
    /// m/s
    pub velocity: f64,
}

impl RestFrameField for RestFrameFieldModel {
    #[inline]
    fn field(&self, t: f64) -> [f64; 3] {
        let drive = self.b1 * cos(2.0 * PI * self.driving_frequency * t + self.phase);
        let k = 2.0 * PI * self.velocity * t / self.spatial_period;
        [drive * sin(k), self.b0y, -drive * cos(k)]
    }

    fn max_magnitude(&self) -> f64 {
        sqrt(self.b1 * self.b1 + self.b0y * self.b0y)
    }
}

/// Rest-frame field built from the full wire-array map at the mirror
/// surface, with the array currents driven as cos(2πft+φ) and a static
/// external field on top. The map is tabulated once and interpolated
/// linearly.
#[derive(Clone, Debug)]
pub struct ArrayRestFrameField {
    x_start: f64,
    dx: f64,
    bx: Vec<f64>,
    bz: Vec<f64>,
    external: [f64; 3],
    max_magnitude: f64,
    /// Position at t = 0, m.
    pub entry_x: f64,
    pub velocity: f64,
    pub driving_frequency: f64,
    pub phase: f64,
}

impl ArrayRestFrameField {
    /// Tabulates the wires-only field at z = 0 over the array span.
    pub fn new(
        config: &WireArrayConfig,
        mu0: f64,
        spacing: f64,
        velocity: f64,
        driving_frequency: f64,
        phase: f64,
    ) -> Result<Self> {
        config.validate()?;
        let half = 0.5 * config.span();
        let x_start = config.center_x - half;
        let n = libm::ceil(2.0 * half / spacing) as usize + 1;
        let dx = 2.0 * half / (n - 1) as f64;
        let mut bx = Vec::with_capacity(n);
        let mut bz = Vec::with_capacity(n);
        let mut peak: f64 = 0.0;
        for i in 0..n {
            let [wx, wz, _, _] = wire_sum(config, x_start + i as f64 * dx, 0.0, mu0)?;
            peak = peak.max(sqrt(wx * wx + wz * wz));
            bx.push(wx);
            bz.push(wz);
        }
        let e = config.external_field;
        let max_magnitude = peak + sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
        Ok(Self {
            x_start,
            dx,
            bx,
            bz,
            external: e,
            max_magnitude,
            entry_x: x_start,
            velocity,
            driving_frequency,
            phase,
        })
    }

    fn interpolate(&self, x: f64) -> (f64, f64) {
        let last = self.bx.len() - 1;
        let s = ((x - self.x_start) / self.dx).clamp(0.0, last as f64);
        let i = (s as usize).min(last.saturating_sub(1));
        let w = s - i as f64;
        let j = (i + 1).min(last);
        (
            self.bx[i] * (1.0 - w) + self.bx[j] * w,
            self.bz[i] * (1.0 - w) + self.bz[j] * w,
        )
    }
}

impl RestFrameField for ArrayRestFrameField {
    fn field(&self, t: f64) -> [f64; 3] {
        let drive = cos(2.0 * PI * self.driving_frequency * t + self.phase);
        let (bx, bz) = self.interpolate(self.entry_x + self.velocity * t);
        [
            drive * bx + self.external[0],
            self.external[1],
            drive * bz + self.external[2],
        ]
    }

    fn max_magnitude(&self) -> f64 {
        self.max_magnitude
    }
}

struct Bloch<'a, F> {
    field: &'a F,
    gamma: f64,
}

impl<F: RestFrameField> OdeSystem for Bloch<'_, F> {
    fn dim(&self) -> usize {
        3
    }

    #[inline]
    fn rhs(&self, t: f64, p: &[f64], dp: &mut [f64]) {
        let b = self.field.field(t);
        let g = self.gamma;
        dp[0] = g * (p[1] * b[2] - p[2] * b[1]);
        dp[1] = g * (p[2] * b[0] - p[0] * b[2]);
        dp[2] = g * (p[0] * b[1] - p[1] * b[0]);
    }
}

/// p = (1 − Π·B/|B|)/2.
#[inline]
pub fn flip_probability(polarization: &[f64], b: [f64; 3]) -> f64 {
    let norm = sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
    let dot = polarization[0] * b[0] + polarization[1] * b[1] + polarization[2] * b[2];
    (0.5 * (1.0 - dot / norm)).clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinTrajectory {
    /// s
    pub times: Vec<f64>,
    pub polarization: Vec<[f64; 3]>,
    pub flip_probability: Vec<f64>,
    pub p_max: f64,
}

fn check_step<F: RestFrameField>(field: &F, gamma: f64, duration: f64, step: f64) -> Result<()> {
    if !(duration > 0.0) {
        return Err(Error::NonPositive {
            name: "duration",
            value: duration,
        });
    }
    if !(step > 0.0) {
        return Err(Error::NonPositive {
            name: "step",
            value: step,
        });
    }
    let rate = gamma * field.max_magnitude();
    let angle = rate * step;
    if angle >= MAX_ROTATION_PER_STEP {
        return Err(Error::StepTooLarge {
            step,
            rate,
            angle,
            limit: MAX_ROTATION_PER_STEP,
        });
    }
    Ok(())
}

fn aligned_start<F: RestFrameField>(field: &F) -> Result<[f64; 3]> {
    let b = field.field(0.0);
    let norm = sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
    if !(norm > 0.0) {
        return Err(Error::ZeroField);
    }
    Ok([b[0] / norm, b[1] / norm, b[2] / norm])
}

/// Step of at most `rotation` radians of Larmor precession per step.
pub fn step_for_rotation<F: RestFrameField>(field: &F, gamma: f64, rotation: f64) -> f64 {
    rotation / (gamma * field.max_magnitude())
}

/// Fixed-step RK4 integration over [0, duration] with the spin initially
/// aligned with B(0); records every step.
pub fn integrate_bloch<F: RestFrameField>(
    field: &F,
    gamma: f64,
    duration: f64,
    step: f64,
) -> Result<SpinTrajectory> {
    check_step(field, gamma, duration, step)?;
    let start = aligned_start(field)?;
    integrate_bloch_from(field, gamma, start, duration, step)
}

/// As [`integrate_bloch`] but from an arbitrary initial polarization.
pub fn integrate_bloch_from<F: RestFrameField>(
    field: &F,
    gamma: f64,
    initial: [f64; 3],
    duration: f64,
    step: f64,
) -> Result<SpinTrajectory> {
    check_step(field, gamma, duration, step)?;
    let sys = Bloch { field, gamma };
    let n = steps_for(duration, step);
    let mut times = Vec::with_capacity(n + 1);
    let mut polarization = Vec::with_capacity(n + 1);
    let mut flip = Vec::with_capacity(n + 1);
    let mut y = initial;
    let p0 = flip_probability(&y, field.field(0.0));
    times.push(0.0);
    polarization.push(y);
    flip.push(p0);
    let mut p_max = p0;
    Rk4::new(3).integrate(&sys, 0.0, duration, step, &mut y, |t, y| {
        let p = flip_probability(y, field.field(t));
        p_max = p_max.max(p);
        times.push(t);
        polarization.push([y[0], y[1], y[2]]);
        flip.push(p);
    });
    Ok(SpinTrajectory {
        times,
        polarization,
        flip_probability: flip,
        p_max,
    })
}

/// Maximum flip probability over the passage without storing the trajectory.
pub fn peak_flip_probability<F: RestFrameField>(
    field: &F,
    gamma: f64,
    duration: f64,
    step: f64,
) -> Result<f64> {
    check_step(field, gamma, duration, step)?;
    let mut y = aligned_start(field)?;
    let sys = Bloch { field, gamma };
    let mut p_max = 0.0f64;
    Rk4::new(3).integrate(&sys, 0.0, duration, step, &mut y, |t, y| {
        p_max = p_max.max(flip_probability(y, field.field(t)));
    });
    Ok(p_max)
}

/// Phase rotor e^{iθ} advanced by repeated multiplication.
#[derive(Clone, Copy)]
struct Rotor {
    re: f64,
    im: f64,
}

impl Rotor {
    fn new(theta: f64) -> Self {
        Self {
            re: cos(theta),
            im: sin(theta),
        }
    }

    #[inline]
    fn mul(self, o: Rotor) -> Rotor {
        Rotor {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    #[inline]
    fn renormalized(self) -> Rotor {
        let k = 1.5 - 0.5 * (self.re * self.re + self.im * self.im);
        Rotor {
            re: self.re * k,
            im: self.im * k,
        }
    }
}

impl RestFrameFieldModel {
    #[inline]
    fn field_from(&self, drive: Rotor, space: Rotor) -> [f64; 3] {
        let d = self.b1 * drive.re;
        [d * space.im, self.b0y, -d * space.re]
    }

    /// Same result as [`peak_flip_probability`] for this model, with the
    /// drive and spatial phases advanced by rotors instead of evaluating
    /// trigonometric functions at every RK4 stage.
    pub fn peak_flip_probability(&self, gamma: f64, duration: f64, step: f64) -> Result<f64> {
        check_step(self, gamma, duration, step)?;
        let mut y = aligned_start(self)?;
        let n = steps_for(duration, step);
        let h = duration / n as f64;
        let w_drive = 2.0 * PI * self.driving_frequency;
        let w_space = 2.0 * PI * self.velocity / self.spatial_period;
        let (half_d, half_s) = (Rotor::new(0.5 * w_drive * h), Rotor::new(0.5 * w_space * h));
        let mut drive = Rotor::new(self.phase);
        let mut space = Rotor::new(0.0);
        let mut b0 = self.field_from(drive, space);
        let g = gamma;
        let cross = |p: [f64; 3], b: [f64; 3]| {
            [
                g * (p[1] * b[2] - p[2] * b[1]),
                g * (p[2] * b[0] - p[0] * b[2]),
                g * (p[0] * b[1] - p[1] * b[0]),
            ]
        };
        let mut p_max = 0.0f64;
        for i in 0..n {
            let (dm, sm) = (drive.mul(half_d), space.mul(half_s));
            let (de, se) = (dm.mul(half_d), sm.mul(half_s));
            let bm = self.field_from(dm, sm);
            let b1 = self.field_from(de, se);
            let k1 = cross(y, b0);
            let k2 = cross([0, 1, 2].map(|j| y[j] + 0.5 * h * k1[j]), bm);
            let k3 = cross([0, 1, 2].map(|j| y[j] + 0.5 * h * k2[j]), bm);
            let k4 = cross([0, 1, 2].map(|j| y[j] + h * k3[j]), b1);
            for j in 0..3 {
                y[j] += h / 6.0 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]);
            }
            p_max = p_max.max(flip_probability(&y, b1));
            b0 = b1;
            if i % 1024 == 1023 {
                // Re-anchor to the exact phases to stop round-off drift.
                let t = (i + 1) as f64 * h;
                drive = Rotor::new(w_drive * t + self.phase);
                space = Rotor::new(w_space * t);
                b0 = self.field_from(drive, space);
            } else {
                drive = de.renormalized();
                space = se.renormalized();
            }
        }
        Ok(p_max)
    }
}

/// Grid and averaging settings of an adiabaticity study.
#[derive(Clone, Debug, PartialEq)]
pub struct AdiabaticityScan {
    /// Holding fields, T.
    pub b0y_values: Vec<f64>,
    /// Driving frequencies, Hz.
    pub frequencies: Vec<f64>,
    pub velocity: VelocitySpectrum,
    pub phase_samples: usize,
    /// Rotating field amplitude, T.
    pub b1: f64,
    /// m
    pub spatial_period: f64,
    /// Length of the region below the array, m.
    pub length: f64,
    /// Larmor rotation per RK4 step, rad.
    pub rotation_per_step: f64,
}

impl Default for AdiabaticityScan {
    fn default() -> Self {
        Self {
            b0y_values: alloc::vec![0.3e-3],
            frequencies: (0..=30).map(|i| 10.0 * i as f64).collect(),
            velocity: VelocitySpectrum::default(),
            phase_samples: 16,
            b1: 0.8e-3,
            spatial_period: 0.01,
            length: 0.16,
            rotation_per_step: 0.05,
        }
    }
}

impl AdiabaticityScan {
    pub fn validate(&self) -> Result<()> {
        if self.b0y_values.is_empty() {
            return Err(Error::Empty("holding-field list"));
        }
        if self.frequencies.is_empty() {
            return Err(Error::Empty("frequency list"));
        }
        for &f in &self.frequencies {
            if !(0.0..=1000.0).contains(&f) {
                return Err(Error::OutOfDomain {
                    name: "driving frequency",
                    value: f,
                    reason: "must lie in [0, 1000] Hz",
                });
            }
        }
        if let Some(&b) = self.b0y_values.iter().find(|b| !(**b > 0.0)) {
            return Err(Error::NonPositive {
                name: "b0y",
                value: b,
            });
        }
        if self.phase_samples < 4 {
            return Err(Error::OutOfDomain {
                name: "phase_samples",
                value: self.phase_samples as f64,
                reason: "at least 4 phases are required",
            });
        }
        for (name, value) in [
            ("b1", self.b1),
            ("spatial_period", self.spatial_period),
            ("length", self.length),
        ] {
            if !(value > 0.0) {
                return Err(Error::NonPositive { name, value });
            }
        }
        if !(self.rotation_per_step > 0.0 && self.rotation_per_step < MAX_ROTATION_PER_STEP) {
            return Err(Error::OutOfDomain {
                name: "rotation_per_step",
                value: self.rotation_per_step,
                reason: "must lie in (0, 0.1) rad",
            });
        }
        self.velocity.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdiabaticityPoint {
    /// T
    pub b0y: f64,
    /// Hz
    pub frequency: f64,
    pub p_max_avg: f64,
}

/// Phase- and velocity-averaged maximum flip probability on the
/// (B₀y, f) grid, ordered B₀y-major.
pub fn adiabaticity_scan<E: Executor>(
    scan: &AdiabaticityScan,
    gamma: f64,
    exec: &E,
) -> Result<Vec<AdiabaticityPoint>> {
    scan.validate()?;
    let velocities = scan.velocity.nodes()?;
    let (nb, nf, nv, np) = (
        scan.b0y_values.len(),
        scan.frequencies.len(),
        velocities.len(),
        scan.phase_samples,
    );
    let cells = exec.map(nb * nf * nv * np, |idx| {
        let ip = idx % np;
        let iv = (idx / np) % nv;
        let i_f = (idx / (np * nv)) % nf;
        let ib = idx / (np * nv * nf);
        let v = velocities[iv].0;
        let model = RestFrameFieldModel {
            b1: scan.b1,
            b0y: scan.b0y_values[ib],
            spatial_period: scan.spatial_period,
            driving_frequency: scan.frequencies[i_f],
            phase: 2.0 * PI * ip as f64 / np as f64,
            velocity: v,
        };
        let step = step_for_rotation(&model, gamma, scan.rotation_per_step);
        model.peak_flip_probability(gamma, scan.length / v, step)
    });
    let cells: Vec<f64> = cells.into_iter().collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(nb * nf);
    for ib in 0..nb {
        for i_f in 0..nf {
            let base = (ib * nf + i_f) * nv * np;
            let mut avg = 0.0;
            for (iv, (_, w)) in velocities.iter().enumerate() {
                let phases = &cells[base + iv * np..base + (iv + 1) * np];
                avg += w * phases.iter().sum::<f64>() / np as f64;
            }
            out.push(AdiabaticityPoint {
                b0y: scan.b0y_values[ib],
                frequency: scan.frequencies[i_f],
                p_max_avg: avg,
            });
        }
    }
    Ok(out)
}
