//! Magnetostatics of an array of infinitely long square conductors running
//! along y, evaluated in the (x, z) plane.
//!
//! Coordinates: the mirror surface is z = 0, the wires hang above it. All
//! quantities are SI (m, A, T, T/m).
//!
//! Orientation convention: the closed form below gives, for positive current,
//! Bx > 0 directly underneath the conductor. In a right-handed frame that is
//! the field of a current flowing along −y. Only the relative sign between
//! wire field and external field depends on this choice.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{atan, log, sqrt};

use crate::error::{Error, Result};
use crate::exec::Executor;

/// Raw field of a unit-prefactor wire: (Bx, Bz, ∂zBx, ∂zBz) divided by
/// μ₀I/(4πc²). Valid only for |z| > c/2.
fn closed_form(x: f64, z: f64, c: f64) -> [f64; 4] {
    let h = c / 2.0;
    let (xm, xp, zm, zp) = (x - h, x + h, z - h, z + h);
    let (rmm, rpm) = (xm * xm + zm * zm, xp * xp + zm * zm);
    let (rmp, rpp) = (xm * xm + zp * zp, xp * xp + zp * zp);
    let l1 = log(rmm * rpp / (rpm * rmp));
    let l2 = log(rmm * rpm / (rmp * rpp));
    let l3 = log(rmm * rmp / (rpm * rpp));
    let amm = atan(xm / zm);
    let apm = atan(xp / zm);
    let amp = atan(xm / zp);
    let app = atan(xp / zp);
    let bx = -(x * l1 - h * l2 + 2.0 * zm * (amm - apm) + 2.0 * zp * (app - amp));
    let bz = z * l1 - h * l3 + 2.0 * xm * (amp - amm) + 2.0 * xp * (apm - app);
    let dbx = 2.0 * (amp - amm + apm - app);
    let dbz = l1;
    [bx, bz, dbx, dbz]
}

/// Closed form extended to every exterior point. Beside the conductor
/// (|z| ≤ c/2) the arctangents change branch, so the point is rotated a
/// quarter turn about y, where the square looks the same, and the result is
/// rotated back; z-derivatives follow from ∇·B = 0 and ∇×B = 0.
fn exterior(x: f64, z: f64, c: f64) -> Result<[f64; 4]> {
    let h = c / 2.0;
    if x.abs() <= h && z.abs() <= h {
        return Err(Error::InsideConductor { x, z });
    }
    if z.abs() > h {
        return Ok(closed_form(x, z, c));
    }
    let [bx, bz, dbx, dbz] = closed_form(z, -x, c);
    Ok([-bz, bx, -dbx, -dbz])
}

fn prefactor(current: f64, side: f64, mu0: f64) -> f64 {
    mu0 * current / (4.0 * PI * side * side)
}

/// (Bx, Bz) of a wire of square section `side` centred on the origin.
pub fn square_wire_field(x: f64, z: f64, current: f64, side: f64, mu0: f64) -> Result<(f64, f64)> {
    let k = prefactor(current, side, mu0);
    let [bx, bz, _, _] = exterior(x, z, side)?;
    Ok((k * bx, k * bz))
}

/// (∂zBx, ∂zBz) of the same wire.
pub fn square_wire_gradient(x: f64, z: f64, current: f64, side: f64, mu0: f64) -> Result<(f64, f64)> {
    let k = prefactor(current, side, mu0);
    let [_, _, dbx, dbz] = exterior(x, z, side)?;
    Ok((k * dbx, k * dbz))
}

/// Geometry and drive of the wire array.
#[derive(Clone, Debug, PartialEq)]
pub struct WireArrayConfig {
    /// Side of the square conductor section, m.
    pub side: f64,
    /// Gap between adjacent conductors, m.
    pub gap: f64,
    pub n_wires: usize,
    /// Mirror surface to the bottom faces of the wires, m.
    pub standoff: f64,
    /// Pattern amplitudes I₁..I₄, A; the array carries I₁,I₂,I₃,I₄,−I₁,−I₂,−I₃,−I₄,…
    pub currents: [f64; 4],
    /// Uniform external field (B₀x, B₀y, B₀z), T.
    pub external_field: [f64; 3],
    /// Horizontal position of the array centre, m.
    pub center_x: f64,
    /// Fraction of the array span treated as free of edge effects.
    pub central_fraction: f64,
}

impl Default for WireArrayConfig {
    fn default() -> Self {
        Self::benchmark()
    }
}

impl WireArrayConfig {
    /// 128 wires of 1 mm section with 0.25 mm gaps, 0.8 mm above the mirror,
    /// I₁ = I₄ = 1.4 A and I₂ = I₃ = 3.5 A, no external field.
    pub fn benchmark() -> Self {
        Self {
            side: 1e-3,
            gap: 0.25e-3,
            n_wires: 128,
            standoff: 0.8e-3,
            currents: [1.4, 3.5, 3.5, 1.4],
            external_field: [0.0; 3],
            center_x: 0.0,
            central_fraction: 0.8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("side", self.side), ("standoff", self.standoff)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositive { name, value });
            }
        }
        if !(self.gap >= 0.0) {
            return Err(Error::OutOfDomain {
                name: "gap",
                value: self.gap,
                reason: "gap must be non-negative",
            });
        }
        if self.n_wires == 0 || !self.n_wires.is_multiple_of(8) {
            return Err(Error::OutOfDomain {
                name: "n_wires",
                value: self.n_wires as f64,
                reason: "wire count must be a positive multiple of 8",
            });
        }
        if !(self.central_fraction > 0.0 && self.central_fraction <= 1.0) {
            return Err(Error::OutOfDomain {
                name: "central_fraction",
                value: self.central_fraction,
                reason: "must lie in (0, 1]",
            });
        }
        if self
            .currents
            .iter()
            .chain(&self.external_field)
            .any(|v| !v.is_finite())
        {
            return Err(Error::OutOfDomain {
                name: "currents",
                value: f64::NAN,
                reason: "currents and external field must be finite",
            });
        }
        Ok(())
    }

    /// Centre-to-centre wire spacing, m.
    pub fn pitch(&self) -> f64 {
        self.side + self.gap
    }

    /// Spatial period of the current pattern, m.
    pub fn period(&self) -> f64 {
        8.0 * self.pitch()
    }

    pub fn wire_center_z(&self) -> f64 {
        self.standoff + self.side / 2.0
    }

    /// Total horizontal extent covered by the wire pitch cells, m.
    pub fn span(&self) -> f64 {
        self.n_wires as f64 * self.pitch()
    }

    /// Horizontal window free of edge effects.
    pub fn central_window(&self) -> (f64, f64) {
        let half = 0.5 * self.central_fraction * self.span();
        (self.center_x - half, self.center_x + half)
    }

    /// (x centre, current) of each wire, left to right.
    pub fn wires(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let first = self.center_x - 0.5 * (self.n_wires as f64 - 1.0) * self.pitch();
        (0..self.n_wires).map(move |i| {
            let amplitude = self.currents[i % 4];
            let sign = if i % 8 < 4 { 1.0 } else { -1.0 };
            (first + i as f64 * self.pitch(), sign * amplitude)
        })
    }

    pub fn scaled_currents(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.currents {
            *c *= factor;
        }
        out
    }

    pub fn without_external_field(&self) -> Self {
        Self {
            external_field: [0.0; 3],
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample {
    /// Horizontal position, m.
    pub x: f64,
    /// Total field components including the external field, T.
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
    /// z-derivatives of the field components, T/m.
    pub dbx_dz: f64,
    pub dbz_dz: f64,
    /// ∂z|B|, T/m.
    pub grad_abs_b: f64,
    /// Set where |B| vanishes. `grad_abs_b` then holds the one-sided limit
    /// from above, |∂zB|, or NaN when the field gradient vanishes too.
    pub singular: bool,
}

impl FieldSample {
    pub fn abs_b(&self) -> f64 {
        sqrt(self.bx * self.bx + self.by * self.by + self.bz * self.bz)
    }
}

/// Wires-only field and z-gradient at (x, z): [Bx, Bz, ∂zBx, ∂zBz].
pub fn wire_sum(config: &WireArrayConfig, x: f64, z: f64, mu0: f64) -> Result<[f64; 4]> {
    let zc = config.wire_center_z();
    let unit = prefactor(1.0, config.side, mu0);
    let mut acc = [0.0; 4];
    for (xw, current) in config.wires() {
        let raw = exterior(x - xw, z - zc, config.side)?;
        let k = unit * current;
        for (a, r) in acc.iter_mut().zip(raw) {
            *a += k * r;
        }
    }
    Ok(acc)
}

/// Superposed field at (x, z), 0 ≤ z < standoff.
pub fn array_field(config: &WireArrayConfig, x: f64, z: f64, mu0: f64) -> Result<FieldSample> {
    if !(z >= 0.0 && z < config.standoff) {
        return Err(Error::OutOfDomain {
            name: "z",
            value: z,
            reason: "evaluation height must lie between the mirror and the wires",
        });
    }
    let [wx, wz, dbx_dz, dbz_dz] = wire_sum(config, x, z, mu0)?;
    let [ex, ey, ez] = config.external_field;
    let (bx, by, bz) = (wx + ex, ey, wz + ez);
    let abs_b = sqrt(bx * bx + by * by + bz * bz);
    let (grad_abs_b, singular) = if abs_b > 0.0 {
        ((bx * dbx_dz + bz * dbz_dz) / abs_b, false)
    } else {
        let g = sqrt(dbx_dz * dbx_dz + dbz_dz * dbz_dz);
        (if g > 0.0 { g } else { f64::NAN }, true)
    };
    Ok(FieldSample {
        x,
        bx,
        by,
        bz,
        dbx_dz,
        dbz_dz,
        grad_abs_b,
        singular,
    })
}

/// Uniform scan of `n_points` samples over [x_min, x_max] at height z.
pub fn field_map<E: Executor>(
    config: &WireArrayConfig,
    z: f64,
    x_range: (f64, f64),
    n_points: usize,
    mu0: f64,
    exec: &E,
) -> Result<Vec<FieldSample>> {
    config.validate()?;
    let (lo, hi) = x_range;
    if !(hi > lo) {
        return Err(Error::Empty("x range"));
    }
    if n_points < 2 {
        return Err(Error::OutOfDomain {
            name: "n_points",
            value: n_points as f64,
            reason: "a field map needs at least two points",
        });
    }
    let dx = (hi - lo) / (n_points - 1) as f64;
    exec.map(n_points, |i| array_field(config, lo + i as f64 * dx, z, mu0))
        .into_iter()
        .collect()
}

/// Summary of a gradient map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientStats {
    pub mean: f64,
    /// Largest |∂z|B| − mean|.
    pub max_deviation: f64,
    pub min: f64,
    pub max: f64,
}

pub fn gradient_stats(samples: &[FieldSample]) -> Result<GradientStats> {
    let values: Vec<f64> = samples
        .iter()
        .map(|s| s.grad_abs_b)
        .filter(|g| g.is_finite())
        .collect();
    if values.is_empty() {
        return Err(Error::Empty("gradient samples"));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let max_deviation = (max - mean).max(mean - min);
    Ok(GradientStats {
        mean,
        max_deviation,
        min,
        max,
    })
}

/// Parameters of the AC-mode excitation seen at the mirror surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExcitationParams {
    /// Mean ∂z|B| over the central window with no external field, T/m.
    pub beta_hat: f64,
    /// Amplitude of the rotating in-plane field, T.
    pub b1: f64,
}

/// Samples per metre used for excitation extraction (20 per mm).
const EXTRACTION_DENSITY: f64 = 20_000.0;

/// β̂ and B₁ of a homogeneous-gradient configuration.
///
/// The array field at the mirror rotates in the (x, z) plane with nearly
/// constant magnitude, so B₁ is taken as the half peak-to-peak swing of the
/// field components, averaged over Bx and Bz.
pub fn extract_excitation_params<E: Executor>(
    config: &WireArrayConfig,
    mu0: f64,
    exec: &E,
) -> Result<ExcitationParams> {
    config.validate()?;
    if config.currents.iter().all(|&c| c == 0.0) {
        return Err(Error::Degenerate("all wire currents are zero"));
    }
    let bare = config.without_external_field();
    let window = bare.central_window();
    let n = libm::ceil((window.1 - window.0) * EXTRACTION_DENSITY) as usize + 1;
    let samples = field_map(&bare, 0.0, window, n, mu0, exec)?;
    let stats = gradient_stats(&samples)?;
    let ptp = |f: fn(&FieldSample) -> f64| {
        let (lo, hi) = samples
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        hi - lo
    };
    let b1 = 0.25 * (ptp(|s| s.bx) + ptp(|s| s.bz));
    Ok(ExcitationParams {
        beta_hat: stats.mean,
        b1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::PhysicalConstants;
    use crate::exec::Serial;
    use approx::assert_relative_eq;

    const C: f64 = 1e-3;

    fn mu0() -> f64 {
        PhysicalConstants::default().mu0
    }

    #[test]
    fn far_field_matches_thin_wire() {
        let (bx, bz) = square_wire_field(0.0, -2.0 * C, 1.0, C, mu0()).unwrap();
        let thin = mu0() / (2.0 * PI * 2.0 * C);
        assert_relative_eq!(bx, thin, max_relative = 0.02);
        assert_eq!(bz, 0.0);
    }

    #[test]
    fn vertical_axis_has_no_bz() {
        for z in [-5.0 * C, -0.6 * C, 0.7 * C, 3.0 * C] {
            let (_, bz) = square_wire_field(0.0, z, 2.0, C, mu0()).unwrap();
            assert!(bz.abs() < 1e-18);
        }
    }

    #[test]
    fn mirror_symmetry() {
        for &(x, z) in &[(0.7e-3, -1.3e-3), (2.1e-3, 0.2e-3), (0.3e-3, 0.9e-3)] {
            let (bx1, bz1) = square_wire_field(x, z, 1.0, C, mu0()).unwrap();
            let (bx2, bz2) = square_wire_field(-x, z, 1.0, C, mu0()).unwrap();
            assert_relative_eq!(bx1, bx2, max_relative = 1e-12);
            assert_relative_eq!(bz1, -bz2, max_relative = 1e-12);
        }
    }

    #[test]
    fn rejects_interior_and_boundary() {
        assert!(matches!(
            square_wire_field(0.0, 0.0, 1.0, C, mu0()),
            Err(Error::InsideConductor { .. })
        ));
        assert!(square_wire_field(0.5e-3, 0.2e-3, 1.0, C, mu0()).is_err());
        assert!(square_wire_gradient(0.1e-3, -0.5e-3, 1.0, C, mu0()).is_err());
    }

    #[test]
    fn gradient_at_axis_point_is_l1_term() {
        let (x, z) = (0.0, -2.0 * C);
        let h = C / 2.0;
        let (xm, xp, zm, zp) = (x - h, x + h, z - h, z + h);
        let l1 = libm::log(
            (xm * xm + zm * zm) * (xp * xp + zp * zp) / ((xp * xp + zm * zm) * (xm * xm + zp * zp)),
        );
        let (_, dbz) = square_wire_gradient(x, z, 1.5, C, mu0()).unwrap();
        assert_relative_eq!(dbz, mu0() * 1.5 / (4.0 * PI * C * C) * l1, max_relative = 1e-14);
    }

    #[test]
    fn pattern_and_geometry() {
        let cfg = WireArrayConfig::benchmark();
        cfg.validate().unwrap();
        assert_relative_eq!(cfg.pitch(), 1.25e-3, max_relative = 1e-12);
        assert_relative_eq!(cfg.period(), 0.01, max_relative = 1e-12);
        assert_relative_eq!(cfg.wire_center_z(), 1.3e-3, max_relative = 1e-12);
        let currents: Vec<f64> = cfg.wires().take(9).map(|w| w.1).collect();
        assert_eq!(currents, [1.4, 3.5, 3.5, 1.4, -1.4, -3.5, -3.5, -1.4, 1.4]);
        let bad = WireArrayConfig {
            n_wires: 100,
            ..cfg
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn uniform_external_field_only() {
        let cfg = WireArrayConfig {
            currents: [0.0; 4],
            external_field: [0.0, 0.3e-3, 0.0],
            ..WireArrayConfig::benchmark()
        };
        for x in [-0.05, 0.0, 0.013] {
            let s = array_field(&cfg, x, 0.0, mu0()).unwrap();
            assert_relative_eq!(s.abs_b(), 0.3e-3, max_relative = 1e-15);
            assert_eq!(s.grad_abs_b, 0.0);
        }
    }

    #[test]
    fn zero_field_is_flagged() {
        let cfg = WireArrayConfig {
            currents: [0.0; 4],
            ..WireArrayConfig::benchmark()
        };
        let s = array_field(&cfg, 0.0, 0.0, mu0()).unwrap();
        assert!(s.singular && s.grad_abs_b.is_nan());
    }

    #[test]
    fn out_of_window_heights_rejected() {
        let cfg = WireArrayConfig::benchmark();
        assert!(array_field(&cfg, 0.0, -1e-6, mu0()).is_err());
        assert!(array_field(&cfg, 0.0, 0.8e-3, mu0()).is_err());
    }

    #[test]
    fn field_map_preconditions() {
        let cfg = WireArrayConfig::benchmark();
        assert!(field_map(&cfg, 0.0, (0.0, 0.01), 1, mu0(), &Serial).is_err());
        assert!(field_map(&cfg, 0.0, (0.01, 0.01), 10, mu0(), &Serial).is_err());
        let m = field_map(&cfg, 0.0, (-0.01, 0.01), 5, mu0(), &Serial).unwrap();
        assert_eq!(m.len(), 5);
        assert_relative_eq!(m[4].x, 0.01);
    }

    #[test]
    fn degenerate_extraction() {
        let cfg = WireArrayConfig {
            currents: [0.0; 4],
            ..WireArrayConfig::benchmark()
        };
        assert!(matches!(
            extract_excitation_params(&cfg, mu0(), &Serial),
            Err(Error::Degenerate(_))
        ));
        let equal = WireArrayConfig {
            currents: [2.0; 4],
            ..WireArrayConfig::benchmark()
        };
        let p = extract_excitation_params(&equal, mu0(), &Serial).unwrap();
        assert!(p.beta_hat.is_finite() && p.b1 > 0.0);
    }
}
