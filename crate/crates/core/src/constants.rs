//! Physical constants. Everything is SI internally; the `*_in_*` helpers exist
//! for reporting only.

use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Elementary charge, J/eV.
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    /// Neutron mass, kg.
    pub neutron_mass: f64,
    /// Local gravitational acceleration, m/s².
    pub g_local: f64,
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Magnitude of the neutron magnetic moment, J/T.
    pub mu_neutron: f64,
    /// Vacuum permeability, T·m/A.
    pub mu0: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            neutron_mass: 1.674_927_498_04e-27,
            g_local: 9.81,
            hbar: 1.054_571_817e-34,
            mu_neutron: 60.3e-9 * ELECTRON_VOLT,
            mu0: 1.256_637_062_12e-6,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("neutron_mass", self.neutron_mass),
            ("g_local", self.g_local),
            ("hbar", self.hbar),
            ("mu_neutron", self.mu_neutron),
            ("mu0", self.mu0),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositive { name, value });
            }
        }
        Ok(())
    }

    /// Gyromagnetic ratio 2μ/ħ as an angular frequency per field, rad/s/T.
    pub fn gamma(&self) -> f64 {
        2.0 * self.mu_neutron / self.hbar
    }

    /// Gravitational length scale (ħ²/2m²g)^(1/3), m.
    pub fn z0(&self) -> f64 {
        let m = self.neutron_mass;
        libm::cbrt(self.hbar * self.hbar / (2.0 * m * m * self.g_local))
    }

    /// Gravitational energy scale m·g·z₀, J.
    pub fn energy_scale(&self) -> f64 {
        self.weight() * self.z0()
    }

    /// Base frequency m·g·z₀/(2πħ), Hz.
    pub fn f0(&self) -> f64 {
        self.energy_scale() / (2.0 * PI * self.hbar)
    }

    /// Gravitational force m·g, N.
    pub fn weight(&self) -> f64 {
        self.neutron_mass * self.g_local
    }

    pub fn mu_in_nev_per_tesla(&self) -> f64 {
        self.mu_neutron / ELECTRON_VOLT * 1e9
    }
}
