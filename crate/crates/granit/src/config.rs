//! Run configuration: one TOML file plus `--set section.key=value` overrides.
//!
//! Every section is optional and defaults to the benchmark setup. Units are
//! carried in the key names (`_mm`, `_mt`, `_hz`, ...); conversion to SI
//! happens here and nowhere else.

use std::path::Path;

use granit_core::constants::ELECTRON_VOLT;
use granit_core::spin::AdiabaticityScan;
use granit_core::transitions::{frequency_grid, Excitation, ResonanceSetup};
use granit_core::velocity::Weighting;
use granit_core::{PhysicalConstants, VelocitySpectrum, WireArrayConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub constants: ConstantsConfig,
    pub bouncer: BouncerConfig,
    pub array: ArrayConfig,
    pub fieldmap: FieldMapConfig,
    pub velocity: VelocityConfig,
    pub region: RegionConfig,
    pub excitation: ExcitationConfig,
    pub adiabaticity: AdiabaticityConfig,
    pub resonance: ResonanceConfig,
}

/// Overrides of the physical constants; unset entries keep CODATA values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsConfig {
    pub neutron_mass_kg: Option<f64>,
    pub g_mps2: Option<f64>,
    pub hbar_js: Option<f64>,
    pub mu_neutron_nev_per_t: Option<f64>,
    pub mu0_tm_per_a: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BouncerConfig {
    pub n_states: usize,
    pub excitation_time_ms: f64,
    pub step_height_um: f64,
}

impl Default for BouncerConfig {
    fn default() -> Self {
        Self {
            n_states: 4,
            excitation_time_ms: 40.0,
            step_height_um: 15.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub side_mm: f64,
    pub gap_mm: f64,
    pub n_wires: usize,
    pub standoff_mm: f64,
    pub currents_a: [f64; 4],
    pub external_field_mt: [f64; 3],
    pub center_x_mm: f64,
    pub central_fraction: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            side_mm: 1.0,
            gap_mm: 0.25,
            n_wires: 128,
            standoff_mm: 0.8,
            currents_a: [1.4, 3.5, 3.5, 1.4],
            external_field_mt: [0.0; 3],
            center_x_mm: 0.0,
            central_fraction: 0.8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldMapConfig {
    pub z_mm: f64,
    pub x_min_mm: f64,
    pub x_max_mm: f64,
    pub points: usize,
}

impl Default for FieldMapConfig {
    fn default() -> Self {
        Self {
            z_mm: 0.0,
            x_min_mm: -80.0,
            x_max_mm: 80.0,
            points: 1601,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VelocityConfig {
    pub mean_mps: f64,
    pub sigma_mps: f64,
    pub min_mps: f64,
    pub max_mps: f64,
    pub nodes: usize,
    /// "density" or "flux".
    pub weighting: String,
}

impl Default for VelocityConfig {
    fn default() -> Self {
        let v = VelocitySpectrum::default();
        Self {
            mean_mps: v.mean,
            sigma_mps: v.sigma,
            min_mps: v.v_min,
            max_mps: v.v_max,
            nodes: v.nodes,
            weighting: "density".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionConfig {
    /// Length of the region below the wire array, m.
    pub length_m: f64,
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self { length_m: 0.16 }
    }
}

/// Gradient waveform parameters. With `derive_from_array` the gradient scale
/// and rotating-field amplitude come from the `[array]` map and must not be
/// given explicitly.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExcitationConfig {
    pub derive_from_array: bool,
    pub beta_hat_tpm: Option<f64>,
    pub b1_mt: Option<f64>,
    pub b0y_mt: Option<f64>,
}

/// One (f, B₀y, v, φ) passage whose full p(t) trace is written out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TracePoint {
    pub f_hz: f64,
    pub b0y_mt: f64,
    pub velocity_mps: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdiabaticityConfig {
    pub b0y_mt: Vec<f64>,
    pub b1_mt: f64,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub f_step_hz: f64,
    /// Explicit list; replaces the min/max/step grid when present.
    pub frequencies_hz: Option<Vec<f64>>,
    pub phase_samples: usize,
    pub spatial_period_mm: f64,
    pub rotation_per_step_rad: f64,
    pub trace: Option<TracePoint>,
}

impl Default for AdiabaticityConfig {
    fn default() -> Self {
        Self {
            b0y_mt: vec![0.3],
            b1_mt: 0.8,
            f_min_hz: 0.0,
            f_max_hz: 300.0,
            f_step_hz: 10.0,
            frequencies_hz: None,
            phase_samples: 16,
            spatial_period_mm: 10.0,
            rotation_per_step_rad: 0.05,
            trace: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonanceConfig {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub f_step_hz: f64,
    pub frequencies_hz: Option<Vec<f64>>,
    pub phase_samples: usize,
    pub initial_state: usize,
    pub final_state: usize,
    pub step_us: f64,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        Self {
            f_min_hz: 80.0,
            f_max_hz: 180.0,
            f_step_hz: 0.5,
            frequencies_hz: None,
            phase_samples: 16,
            initial_state: 2,
            final_state: 1,
            step_us: 5.0,
        }
    }
}

fn parse_error(origin: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Parse {
        origin: origin.to_string(),
        message: e.to_string().trim_end().to_string(),
    }
}

/// Splits `a.b.c=value`; the value is read as a TOML value, or as a bare
/// string if that fails.
fn parse_override(spec: &str) -> Result<(Vec<String>, toml::Value)> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::OverrideSyntax(spec.to_string()))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(|k| k.trim().is_empty()) {
        return Err(CliError::OverrideSyntax(spec.to_string()));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((key.split('.').map(|k| k.trim().to_string()).collect(), value))
}

fn apply_override(table: &mut toml::Table, path: &[String], value: toml::Value) -> Result<()> {
    let (last, parents) = path.split_last().expect("non-empty key path");
    let mut cur = table;
    for p in parents {
        let entry = cur
            .entry(p.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| CliError::Override {
            key: path.join("."),
            reason: format!("`{p}` is not a section"),
        })?;
    }
    cur.insert(last.clone(), value);
    Ok(())
}

impl RunConfig {
    /// Parses a config text; `origin` names it in error messages.
    pub fn from_toml(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| parse_error(origin, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, &path.display().to_string())
    }

    /// Loads the file (or defaults), applies overrides and validates.
    pub fn resolve(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let base = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        let cfg = base.with_overrides(overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let text = toml::to_string(self).map_err(|e| CliError::Invalid(e.to_string()))?;
        let mut table: toml::Table = toml::from_str(&text).expect("serialized config parses");
        for spec in overrides {
            let (path, value) = parse_override(spec)?;
            apply_override(&mut table, &path, value)?;
            // Re-check after every override so the message names the culprit.
            toml::Value::Table(table.clone())
                .try_into::<RunConfig>()
                .map_err(|e| CliError::Override {
                    key: path.join("."),
                    reason: e.to_string().trim_end().to_string(),
                })?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Invalid(e.to_string()))
    }

    pub fn constants(&self) -> PhysicalConstants {
        let d = PhysicalConstants::default();
        let c = &self.constants;
        PhysicalConstants {
            neutron_mass: c.neutron_mass_kg.unwrap_or(d.neutron_mass),
            g_local: c.g_mps2.unwrap_or(d.g_local),
            hbar: c.hbar_js.unwrap_or(d.hbar),
            mu_neutron: c
                .mu_neutron_nev_per_t
                .map_or(d.mu_neutron, |m| m * 1e-9 * ELECTRON_VOLT),
            mu0: c.mu0_tm_per_a.unwrap_or(d.mu0),
        }
    }

    pub fn wire_array(&self) -> WireArrayConfig {
        let a = &self.array;
        WireArrayConfig {
            side: a.side_mm * 1e-3,
            gap: a.gap_mm * 1e-3,
            n_wires: a.n_wires,
            standoff: a.standoff_mm * 1e-3,
            currents: a.currents_a,
            external_field: a.external_field_mt.map(|b| b * 1e-3),
            center_x: a.center_x_mm * 1e-3,
            central_fraction: a.central_fraction,
        }
    }

    pub fn velocity_spectrum(&self) -> Result<VelocitySpectrum> {
        let v = &self.velocity;
        let weighting = match v.weighting.as_str() {
            "density" => Weighting::Density,
            "flux" => Weighting::Flux,
            other => {
                return Err(CliError::Invalid(format!(
                    "velocity.weighting must be \"density\" or \"flux\", got \"{other}\""
                )))
            }
        };
        Ok(VelocitySpectrum {
            mean: v.mean_mps,
            sigma: v.sigma_mps,
            v_min: v.min_mps,
            v_max: v.max_mps,
            nodes: v.nodes,
            weighting,
        })
    }

    pub fn b0y(&self) -> f64 {
        self.excitation.b0y_mt.unwrap_or(0.3) * 1e-3
    }

    /// Explicit excitation parameters; `None` when they are to be derived
    /// from the array.
    pub fn explicit_excitation(&self) -> Option<Excitation> {
        if self.excitation.derive_from_array {
            return None;
        }
        let d = Excitation::default();
        Some(Excitation {
            beta_hat: self.excitation.beta_hat_tpm.unwrap_or(d.beta_hat),
            b1: self.excitation.b1_mt.map_or(d.b1, |b| b * 1e-3),
            b0y: self.b0y(),
        })
    }

    fn grid(
        section: &str,
        explicit: &Option<Vec<f64>>,
        lo: f64,
        hi: f64,
        step: f64,
    ) -> Result<Vec<f64>> {
        if let Some(list) = explicit {
            if list.is_empty() {
                return Err(CliError::Invalid(format!("{section}.frequencies_hz is empty")));
            }
            return Ok(list.clone());
        }
        if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(CliError::Invalid(format!(
                "{section}: need f_min_hz <= f_max_hz and f_step_hz > 0"
            )));
        }
        Ok(frequency_grid(lo, hi, step))
    }

    pub fn adiabaticity_scan(&self) -> Result<AdiabaticityScan> {
        let a = &self.adiabaticity;
        Ok(AdiabaticityScan {
            b0y_values: a.b0y_mt.iter().map(|b| b * 1e-3).collect(),
            frequencies: Self::grid("adiabaticity", &a.frequencies_hz, a.f_min_hz, a.f_max_hz, a.f_step_hz)?,
            velocity: self.velocity_spectrum()?,
            phase_samples: a.phase_samples,
            b1: a.b1_mt * 1e-3,
            spatial_period: a.spatial_period_mm * 1e-3,
            length: self.region.length_m,
            rotation_per_step: a.rotation_per_step_rad,
        })
    }

    /// Resonance settings with the given excitation.
    pub fn resonance_setup(&self, excitation: Excitation) -> Result<ResonanceSetup> {
        let r = &self.resonance;
        Ok(ResonanceSetup {
            excitation,
            frequencies: Self::grid("resonance", &r.frequencies_hz, r.f_min_hz, r.f_max_hz, r.f_step_hz)?,
            velocity: self.velocity_spectrum()?,
            phase_samples: r.phase_samples,
            length: self.region.length_m,
            initial_state: r.initial_state,
            final_state: r.final_state,
            step: r.step_us * 1e-6,
        })
    }

    /// Full validation; called before any computation.
    pub fn validate(&self) -> Result<()> {
        let rejected = CliError::Rejected;
        self.constants().validate().map_err(rejected)?;
        if self.bouncer.n_states < 2 {
            return Err(CliError::Invalid("bouncer.n_states must be at least 2".into()));
        }
        if self.bouncer.n_states > granit_core::airy::MAX_ZEROS {
            return Err(CliError::Invalid(format!(
                "bouncer.n_states must not exceed {}",
                granit_core::airy::MAX_ZEROS
            )));
        }
        for (name, v) in [
            ("bouncer.excitation_time_ms", self.bouncer.excitation_time_ms),
            ("bouncer.step_height_um", self.bouncer.step_height_um),
            ("region.length_m", self.region.length_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Invalid(format!("{name} must be positive")));
            }
        }
        self.wire_array().validate().map_err(rejected)?;
        let f = &self.fieldmap;
        if f.points < 2 {
            return Err(CliError::Invalid("fieldmap.points must be at least 2".into()));
        }
        if !(f.x_max_mm > f.x_min_mm) {
            return Err(CliError::Invalid("fieldmap.x_max_mm must exceed fieldmap.x_min_mm".into()));
        }
        if !(f.z_mm >= 0.0 && f.z_mm < self.array.standoff_mm) {
            return Err(CliError::Invalid(
                "fieldmap.z_mm must lie between the mirror (0) and the wires".into(),
            ));
        }
        self.velocity_spectrum()?.validate().map_err(rejected)?;

        let e = &self.excitation;
        if e.derive_from_array && (e.beta_hat_tpm.is_some() || e.b1_mt.is_some()) {
            return Err(CliError::Invalid(
                "excitation.derive_from_array excludes explicit beta_hat_tpm / b1_mt".into(),
            ));
        }
        for (name, v) in [("beta_hat_tpm", e.beta_hat_tpm), ("b1_mt", e.b1_mt), ("b0y_mt", e.b0y_mt)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(CliError::Invalid(format!("excitation.{name} must be non-negative")));
                }
            }
        }

        self.adiabaticity_scan()?.validate().map_err(rejected)?;
        if let Some(t) = &self.adiabaticity.trace {
            if !(t.velocity_mps > 0.0) || !(t.b0y_mt >= 0.0) || !(t.f_hz >= 0.0) {
                return Err(CliError::Invalid(
                    "adiabaticity.trace needs velocity_mps > 0, b0y_mt >= 0, f_hz >= 0".into(),
                ));
            }
        }

        let r = &self.resonance;
        if !(r.step_us > 0.0) {
            return Err(CliError::Invalid("resonance.step_us must be positive".into()));
        }
        let placeholder = self.explicit_excitation().unwrap_or_default();
        self.resonance_setup(placeholder)?
            .validate(self.bouncer.n_states)
            .map_err(rejected)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::from_toml("", "x").unwrap(), RunConfig::default());
    }

    #[test]
    fn parse_errors_carry_the_line() {
        let err = RunConfig::from_toml("[array]\nside_mm = 1.0\ngap_mm = \"wide\"\n", "cfg.toml").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert_eq!(err.exit_code(), 2);
        let err = RunConfig::from_toml("[nonsense]\n", "cfg.toml").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn overrides_apply_and_type_check() {
        let cfg = RunConfig::default()
            .with_overrides(&[
                "resonance.f_step_hz=2".into(),
                "velocity.weighting=flux".into(),
                "array.currents_a=[1, 2, 3, 4]".into(),
            ])
            .unwrap();
        assert_eq!(cfg.resonance.f_step_hz, 2.0);
        assert_eq!(cfg.velocity.weighting, "flux");
        assert_eq!(cfg.array.currents_a, [1.0, 2.0, 3.0, 4.0]);
        assert!(RunConfig::default().with_overrides(&["resonance.f_step_hz".into()]).is_err());
        assert!(RunConfig::default().with_overrides(&["resonance.nope=1".into()]).is_err());
        assert!(RunConfig::default().with_overrides(&["resonance.phase_samples=many".into()]).is_err());
    }

    #[test]
    fn derive_excludes_explicit_parameters() {
        let cfg = RunConfig::default()
            .with_overrides(&["excitation.derive_from_array=true".into(), "excitation.b1_mt=0.8".into()])
            .unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Invalid(_))));
        let cfg = RunConfig::default()
            .with_overrides(&["excitation.derive_from_array=true".into()])
            .unwrap();
        cfg.validate().unwrap();
        assert!(cfg.explicit_excitation().is_none());
    }

    #[test]
    fn rejects_bad_grids() {
        for o in [
            "adiabaticity.frequencies_hz=[]",
            "fieldmap.points=1",
            "resonance.f_step_hz=0",
            "array.n_wires=12",
            "resonance.initial_state=9",
            "velocity.nodes=0",
        ] {
            let cfg = RunConfig::default().with_overrides(&[o.into()]).unwrap();
            let err = cfg.validate().unwrap_err();
            assert_eq!(err.exit_code(), 2, "{o}: {err}");
        }
    }

    #[test]
    fn unit_conversion() {
        let cfg = RunConfig::default();
        let a = cfg.wire_array();
        assert_eq!(a, WireArrayConfig::benchmark());
        assert_eq!(cfg.constants(), PhysicalConstants::default());
        assert_eq!(cfg.explicit_excitation().unwrap(), Excitation::default());
        assert_eq!(cfg.velocity_spectrum().unwrap(), VelocitySpectrum::default());
    }
}
