//! Reference computations written independently of `granit-core`, used by
//! the acceptance suite and the cross-checking tests.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

/// Composite Simpson rule on [a, b] with `n` (even) intervals.
pub fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    assert!(n.is_multiple_of(2) && n > 0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// β(θ) = β̂·B₁cos²θ/√(B₁²cos²θ + B₀y²).
pub fn gradient_waveform(theta: f64, beta_hat: f64, b1: f64, b0y: f64) -> f64 {
    let c2 = theta.cos().powi(2);
    let d = (b1 * b1 * c2 + b0y * b0y).sqrt();
    if d == 0.0 {
        0.0
    } else {
        beta_hat * b1 * c2 / d
    }
}

/// Mean and k-th cosine coefficient (in 2θ) of the gradient waveform.
pub fn waveform_coefficient(k: usize, beta_hat: f64, b1: f64, b0y: f64, intervals: usize) -> f64 {
    let norm = if k == 0 { 1.0 / PI } else { 2.0 / PI };
    norm * simpson(0.0, PI, intervals, |t| {
        gradient_waveform(t, beta_hat, b1, b0y) * (2.0 * k as f64 * t).cos()
    })
}

/// Field of an infinitely thin wire carrying `current` at distance `r`, T.
pub fn thin_wire_field(current: f64, r: f64, mu0: f64) -> f64 {
    mu0 * current / (2.0 * PI * r)
}

/// Resonant two-level Rabi probability with detuning δ, rad/s.
pub fn rabi_probability(rabi: f64, detuning: f64, t: f64) -> f64 {
    let g = (rabi * rabi + detuning * detuning).sqrt();
    if g == 0.0 {
        return 0.0;
    }
    (rabi / g).powi(2) * (g * t / 2.0).sin().powi(2)
}

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Verdict {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {}: {} ({:.1} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Accumulates named checks; the criterion passes when all of them do.
#[derive(Default)]
pub struct Checks {
    parts: Vec<(bool, String)>,
}

impl Checks {
    /// |value − target| ≤ tol.
    pub fn near(&mut self, name: &str, value: f64, target: f64, tol: f64) {
        let ok = (value - target).abs() <= tol;
        self.parts
            .push((ok, format!("{name} = {value:.5} (want {target} ± {tol})")));
    }

    pub fn below(&mut self, name: &str, value: f64, limit: f64) {
        let ok = value < limit;
        self.parts.push((ok, format!("{name} = {value:.3e} (want < {limit:e})")));
    }

    pub fn at_most(&mut self, name: &str, value: f64, limit: f64) {
        let ok = value <= limit;
        self.parts.push((ok, format!("{name} = {value:.3e} (want ≤ {limit:e})")));
    }

    pub fn holds(&mut self, name: &str, ok: bool) {
        self.parts.push((ok, name.to_string()));
    }

    pub fn passed(&self) -> bool {
        !self.parts.is_empty() && self.parts.iter().all(|p| p.0)
    }

    pub fn detail(&self) -> String {
        self.parts
            .iter()
            .map(|(ok, s)| if *ok { s.clone() } else { format!("✗ {s}") })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Runs `f`, timing it, and turns its checks into a verdict.
pub fn judge(id: u32, title: &'static str, f: impl FnOnce(&mut Checks)) -> Verdict {
    let start = Instant::now();
    let mut checks = Checks::default();
    f(&mut checks);
    Verdict {
        id,
        title,
        passed: checks.passed(),
        detail: checks.detail(),
        elapsed: start.elapsed(),
    }
}
