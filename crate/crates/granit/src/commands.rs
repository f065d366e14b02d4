//! The four studies behind the subcommands. Each returns its artifacts in
//! memory; nothing touches the disk until [`Output::write`].

use std::path::{Path, PathBuf};

use granit_core::bouncer::{ensemble_populations, IncomingEnsemble};
use granit_core::magnetics::{extract_excitation_params, field_map, gradient_stats};
use granit_core::spin::{
    adiabaticity_scan, integrate_bloch, step_for_rotation, RestFrameFieldModel,
};
use granit_core::transitions::{
    extract_unperturbed_frequency, find_peaks, fourier_coefficients, resonance_curve,
    stern_gerlach_prediction, Excitation,
};
use granit_core::{BouncerSpectrum, Error as CoreError, FieldSample};

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{write_file, Format, Report, Table};
use crate::pool::Pool;

#[derive(Clone, Debug, PartialEq)]
pub enum Content {
    Table(Table),
    Report(Report),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    /// File name without extension.
    pub stem: &'static str,
    pub content: Content,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Output {
    pub artifacts: Vec<Artifact>,
}

impl Output {
    fn table(&mut self, stem: &'static str, t: Table) {
        self.artifacts.push(Artifact {
            stem,
            content: Content::Table(t),
        });
    }

    fn report(&mut self, stem: &'static str, r: Report) {
        self.artifacts.push(Artifact {
            stem,
            content: Content::Report(r),
        });
    }

    pub fn get_table(&self, stem: &str) -> Option<&Table> {
        self.artifacts.iter().find_map(|a| match &a.content {
            Content::Table(t) if a.stem == stem => Some(t),
            _ => None,
        })
    }

    pub fn get_report(&self, stem: &str) -> Option<&Report> {
        self.artifacts.iter().find_map(|a| match &a.content {
            Content::Report(r) if a.stem == stem => Some(r),
            _ => None,
        })
    }

    /// Path each artifact is written to.
    pub fn paths(&self, dir: &Path, format: Format) -> Vec<PathBuf> {
        self.artifacts
            .iter()
            .map(|a| {
                let ext = match (&a.content, format) {
                    (Content::Report(_), Format::Csv) => "txt",
                    _ => format.extension(),
                };
                dir.join(format!("{}.{ext}", a.stem))
            })
            .collect()
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
        let paths = self.paths(dir, format);
        for (a, p) in self.artifacts.iter().zip(&paths) {
            let text = match &a.content {
                Content::Table(t) => t.render(format),
                Content::Report(r) => r.render(format),
            };
            write_file(p, &text)?;
        }
        Ok(paths)
    }

    /// Text shown on stdout: every report.
    pub fn summary(&self) -> String {
        self.artifacts
            .iter()
            .filter_map(|a| match &a.content {
                Content::Report(r) => Some(format!("[{}]\n{}", a.stem, r.to_text())),
                _ => None,
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn spectrum(cfg: &RunConfig) -> Result<BouncerSpectrum> {
    Ok(BouncerSpectrum::new(cfg.constants(), cfg.bouncer.n_states)?)
}

/// Spectrum, matrix elements, π-pulse gradients and step preparation.
pub fn eigen(cfg: &RunConfig) -> Result<Output> {
    let s = spectrum(cfg)?;
    let c = s.constants();
    let nev = 1e-9 * granit_core::constants::ELECTRON_VOLT;
    let t0 = cfg.bouncer.excitation_time_ms * 1e-3;

    let mut levels = Table::new(&["n", "epsilon", "E_neV", "z_nn_um"]);
    for n in 1..=s.n_states() {
        levels.push(vec![
            n as f64,
            s.epsilon()[n - 1],
            s.energy(n)? / nev,
            s.z_matrix_element(n, n)? * 1e6,
        ]);
    }
    let mut lines = Table::new(&["n", "m", "f_Hz", "z_nm_um", "beta_needed_Tpm"]);
    for n in 2..=s.n_states() {
        for m in 1..n {
            lines.push(vec![
                n as f64,
                m as f64,
                s.transition_frequency(n, m)?,
                s.z_matrix_element(n, m)? * 1e6,
                s.required_gradient(n, m, t0)?,
            ]);
        }
    }

    let h = cfg.bouncer.step_height_um * 1e-6;
    let prepared = ensemble_populations(&s, h, &IncomingEnsemble::default())?;

    let mut r = Report::default();
    r.number("z0_um", s.z0() * 1e6);
    r.number("f0_Hz", s.f0());
    r.number("gamma_rad_per_s_T", c.gamma());
    r.number("f21_Hz", s.transition_frequency(2, 1)?);
    if s.n_states() >= 3 {
        r.number("f31_Hz", s.transition_frequency(3, 1)?);
    }
    r.number("excitation_time_ms", cfg.bouncer.excitation_time_ms);
    r.number("beta_needed_21_Tpm", s.required_gradient(2, 1, t0)?);
    if s.n_states() >= 3 {
        r.number("beta_needed_31_Tpm", s.required_gradient(3, 1, t0)?);
    }
    r.number("step_height_um", cfg.bouncer.step_height_um);
    for (n, p) in prepared.populations.iter().enumerate().take(4) {
        const KEYS: [&str; 4] = ["p1", "p2", "p3", "p4"];
        r.number(KEYS[n], *p);
    }

    let mut out = Output::default();
    out.table("eigen_levels", levels);
    out.table("eigen_transitions", lines);
    out.report("eigen_report", r);
    Ok(out)
}

/// Linearly interpolated sign changes of ∂z|B| between `lo` and `hi`.
pub fn zero_crossings(samples: &[FieldSample], lo: f64, hi: f64) -> Vec<f64> {
    samples
        .windows(2)
        .filter(|w| w[0].x >= lo && w[1].x <= hi)
        .filter(|w| w[0].grad_abs_b.is_finite() && w[1].grad_abs_b.is_finite())
        .filter(|w| (w[0].grad_abs_b < 0.0) != (w[1].grad_abs_b < 0.0))
        .map(|w| {
            let (a, b) = (w[0].grad_abs_b, w[1].grad_abs_b);
            w[0].x + (w[1].x - w[0].x) * a / (a - b)
        })
        .collect()
}

pub fn fieldmap(cfg: &RunConfig, pool: &Pool) -> Result<Output> {
    let array = cfg.wire_array();
    let mu0 = cfg.constants().mu0;
    let f = &cfg.fieldmap;
    let samples = field_map(
        &array,
        f.z_mm * 1e-3,
        (f.x_min_mm * 1e-3, f.x_max_mm * 1e-3),
        f.points,
        mu0,
        pool,
    )?;
    let mut t = Table::new(&["x_mm", "Bx_mT", "Bz_mT", "dBxdz_Tpm", "dBzdz_Tpm", "gradAbsB_Tpm"]);
    for s in &samples {
        t.push(vec![
            s.x * 1e3,
            s.bx * 1e3,
            s.bz * 1e3,
            s.dbx_dz,
            s.dbz_dz,
            s.grad_abs_b,
        ]);
    }

    let (lo, hi) = array.central_window();
    let central: Vec<FieldSample> = samples
        .iter()
        .filter(|s| s.x >= lo && s.x <= hi)
        .copied()
        .collect();
    let mut r = Report::default();
    r.number("central_x_min_mm", lo * 1e3);
    r.number("central_x_max_mm", hi * 1e3);
    r.number("central_samples", central.len() as f64);
    if let Ok(stats) = gradient_stats(&central) {
        r.number("mean_gradient_Tpm", stats.mean);
        r.number("max_deviation_Tpm", stats.max_deviation);
        r.number("min_gradient_Tpm", stats.min);
        r.number("max_gradient_Tpm", stats.max);
    }
    let crossings = zero_crossings(&samples, lo, hi);
    r.number("zero_crossings", crossings.len() as f64);
    if crossings.len() >= 2 {
        let spacing = (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
        r.number("zero_crossing_spacing_mm", spacing * 1e3);
    }
    let params = extract_excitation_params(&array, mu0, pool);
    match params {
        Ok(p) => {
            r.number("beta_hat_Tpm", p.beta_hat);
            r.number("b1_mT", p.b1 * 1e3);
        }
        Err(CoreError::Degenerate(_)) => r.text("b1_mT", "none"),
        Err(e) => return Err(e.into()),
    }

    let mut out = Output::default();
    out.table("fieldmap", t);
    out.report("fieldmap_report", r);
    Ok(out)
}

pub fn adiabaticity(cfg: &RunConfig, pool: &Pool) -> Result<Output> {
    let gamma = cfg.constants().gamma();
    let scan = cfg.adiabaticity_scan()?;
    let mut out = Output::default();
    let mut r = Report::default();

    if let Some(tp) = &cfg.adiabaticity.trace {
        let model = RestFrameFieldModel {
            b1: scan.b1,
            b0y: tp.b0y_mt * 1e-3,
            spatial_period: scan.spatial_period,
            driving_frequency: tp.f_hz,
            phase: tp.phase_rad,
            velocity: tp.velocity_mps,
        };
        let step = step_for_rotation(&model, gamma, scan.rotation_per_step);
        let traj = integrate_bloch(&model, gamma, scan.length / tp.velocity_mps, step)?;
        let mut t = Table::new(&["t_s", "Px", "Py", "Pz", "p"]);
        for ((time, p), f) in traj.times.iter().zip(&traj.polarization).zip(&traj.flip_probability) {
            t.push(vec![*time, p[0], p[1], p[2], *f]);
        }
        r.text("mode", "trace");
        r.number("f_Hz", tp.f_hz);
        r.number("B0y_mT", tp.b0y_mt);
        r.number("velocity_mps", tp.velocity_mps);
        r.number("phase_rad", tp.phase_rad);
        r.number("step_s", step);
        r.number("p_max", traj.p_max);
        out.table("adiabaticity_trace", t);
        out.report("adiabaticity_report", r);
        return Ok(out);
    }

    let points = adiabaticity_scan(&scan, gamma, pool)?;
    let mut t = Table::new(&["B0y_mT", "f_Hz", "pmax_avg"]);
    for p in &points {
        t.push(vec![p.b0y * 1e3, p.frequency, p.p_max_avg]);
    }
    r.text("mode", "scan");
    r.number("cells", points.len() as f64);
    let worst = points.iter().map(|p| p.p_max_avg).fold(0.0, f64::max);
    r.number("pmax_avg_max", worst);
    out.table("adiabaticity", t);
    out.report("adiabaticity_report", r);
    Ok(out)
}

pub fn resonance(cfg: &RunConfig, pool: &Pool) -> Result<Output> {
    let s = spectrum(cfg)?;
    let derived = cfg.explicit_excitation().is_none();
    let excitation = match cfg.explicit_excitation() {
        Some(e) => e,
        None => {
            let p = extract_excitation_params(&cfg.wire_array(), cfg.constants().mu0, pool)?;
            Excitation {
                beta_hat: p.beta_hat,
                b1: p.b1,
                b0y: cfg.b0y(),
            }
        }
    };
    let setup = cfg.resonance_setup(excitation)?;
    let curve = resonance_curve(&s, &setup, pool)?;

    let mut t = Table::new(&["f_Hz", "P_avg", "P_spin_up", "P_spin_down"]);
    for i in 0..curve.frequencies.len() {
        t.push(vec![
            curve.frequencies[i],
            curve.probabilities[i],
            curve.spin_up[i],
            curve.spin_down[i],
        ]);
    }

    let (n, m) = (setup.initial_state, setup.final_state);
    let mut r = Report::default();
    r.flag("derived_from_array", derived);
    r.number("beta_hat_Tpm", excitation.beta_hat);
    r.number("b1_mT", excitation.b1 * 1e3);
    r.number("b0y_mT", excitation.b0y * 1e3);
    let fourier = fourier_coefficients(&excitation.waveform(1.0, 0.0), 1)?;
    r.number("beta0_Tpm", fourier.beta0);
    r.number("beta1_Tpm", fourier.beta1());
    r.number("p_max", curve.probabilities.iter().copied().fold(0.0, f64::max));
    let f_true = if n != m {
        s.transition_frequency(n.max(m), n.min(m))?
    } else {
        f64::NAN
    };
    match find_peaks(&curve) {
        Ok(peaks) => {
            r.text("status", "ok");
            r.number("f_plus", peaks.f_plus);
            r.number("f_minus", peaks.f_minus);
            match extract_unperturbed_frequency(peaks.f_plus, peaks.f_minus) {
                Ok(f12) => {
                    r.number("f12_extracted", f12);
                    r.number("f12_true", f_true);
                    r.number("bias", f12 - f_true);
                    r.number("relative_error", (f12 - f_true).abs() / f_true);
                }
                Err(e) => {
                    r.text("f12_extracted", "none");
                    r.text("extraction_error", e.to_string());
                    r.number("f12_true", f_true);
                }
            }
        }
        Err(CoreError::NoPeak { max }) => {
            r.text("status", "no_peak");
            r.number("curve_max", max);
            r.number("f12_true", f_true);
        }
        Err(e) => return Err(e.into()),
    }
    if n != m {
        if let Ok((fp, fm)) = stern_gerlach_prediction(&s, fourier.beta0, n.max(m), n.min(m)) {
            // Driving frequency is half the excitation frequency.
            r.number("f_plus_stern_gerlach", fp / 2.0);
            r.number("f_minus_stern_gerlach", fm / 2.0);
        }
    }

    let mut out = Output::default();
    out.table("resonance", t);
    out.report("resonance_report", r);
    Ok(out)
}
