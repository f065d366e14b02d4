//! Horizontal velocity spectrum of the neutron beam and its quadrature.

use alloc::vec::Vec;

use libm::exp;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Nodes weighted by the velocity density.
    #[default]
    Density,
    /// Density times velocity.
    Flux,
}

/// Gaussian spectrum truncated to [v_min, v_max], integrated with a
/// Gauss-Legendre rule on the truncation interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocitySpectrum {
    /// m/s
    pub mean: f64,
    /// m/s
    pub sigma: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub nodes: usize,
    pub weighting: Weighting,
}

impl Default for VelocitySpectrum {
    fn default() -> Self {
        Self {
            mean: 4.0,
            sigma: 1.5,
            v_min: 0.5,
            v_max: 8.5,
            nodes: 16,
            weighting: Weighting::Density,
        }
    }
}

impl VelocitySpectrum {
    /// A single velocity with unit weight.
    pub fn monochromatic(v: f64) -> Self {
        Self {
            mean: v,
            sigma: 0.0,
            v_min: v,
            v_max: v,
            nodes: 1,
            weighting: Weighting::Density,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 {
            return Err(Error::Empty("velocity nodes"));
        }
        if !(self.v_min > 0.0) {
            return Err(Error::NonPositive {
                name: "v_min",
                value: self.v_min,
            });
        }
        if !(self.v_max >= self.v_min) {
            return Err(Error::OutOfDomain {
                name: "v_max",
                value: self.v_max,
                reason: "must not be below v_min",
            });
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::OutOfDomain {
                name: "sigma",
                value: self.sigma,
                reason: "must be non-negative",
            });
        }
        Ok(())
    }

    fn is_point(&self) -> bool {
        self.v_max == self.v_min || self.sigma == 0.0
    }

    /// (velocity, weight) pairs with weights summing to one, ordered by
    /// increasing velocity.
    pub fn nodes(&self) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        if self.is_point() {
            let v = if self.v_max == self.v_min {
                self.v_min
            } else {
                self.mean
            };
            return Ok(alloc::vec![(v, 1.0)]);
        }
        let rule = GaussLegendre::new(self.nodes);
        let raw: Vec<(f64, f64)> = rule
            .on_interval(self.v_min, self.v_max)
            .map(|(v, w)| {
                let u = (v - self.mean) / self.sigma;
                let density = exp(-0.5 * u * u);
                let weight = match self.weighting {
                    Weighting::Density => density,
                    Weighting::Flux => density * v,
                };
                (v, w * weight)
            })
            .collect();
        let total: f64 = raw.iter().map(|p| p.1).sum();
        Ok(raw.into_iter().map(|(v, w)| (v, w / total)).collect())
    }
}
