//! Airy function of the first kind and its negative zeros.
//!
//! Ai and Ai' are evaluated from the Maclaurin series on `[-8, 5]` and from
//! the standard asymptotic expansions outside that window. The positive-side
//! switch sits at 5 rather than 8 because the series cancels catastrophically
//! for large positive arguments, where Ai is exponentially small.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, exp, pow, sin, sqrt};

use crate::error::{Error, Result};

/// Ai(0).
const AI0: f64 = 0.355_028_053_887_817_2;
/// −Ai'(0).
const AIP0: f64 = 0.258_819_403_792_806_8;

const SERIES_MIN: f64 = -8.0;
const SERIES_MAX: f64 = 5.0;

/// Largest number of zeros [`airy_zeros`] will compute.
pub const MAX_ZEROS: usize = 100;

/// Returns `(Ai(x), Ai'(x))`.
pub fn airy_ai(x: f64) -> (f64, f64) {
    if (SERIES_MIN..=SERIES_MAX).contains(&x) {
        maclaurin(x)
    } else if x > 0.0 {
        asymptotic_positive(x)
    } else {
        asymptotic_negative(-x)
    }
}

pub fn ai(x: f64) -> f64 {
    airy_ai(x).0
}

pub fn ai_prime(x: f64) -> f64 {
    airy_ai(x).1
}

fn maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f = Σ 3^k (1/3)_k x^{3k}/(3k)!,   g = Σ 3^k (2/3)_k x^{3k+1}/(3k+1)!
    let (mut f, mut g, mut df, mut dg) = (1.0, x, x * x / 2.0, 1.0);
    let (mut tf, mut tg, mut tdf, mut tdg) = (1.0, x, x * x / 2.0, 1.0);
    for k in 1..200 {
        let k = k as f64;
        tf *= x3 / ((3.0 * k - 1.0) * (3.0 * k));
        tg *= x3 / ((3.0 * k) * (3.0 * k + 1.0));
        tdf *= x3 / ((3.0 * k) * (3.0 * k + 2.0));
        tdg *= x3 / ((3.0 * k - 2.0) * (3.0 * k));
        f += tf;
        g += tg;
        df += tdf;
        dg += tdg;
        let scale = f.abs() + g.abs() + df.abs() + dg.abs();
        if tf.abs() + tg.abs() + tdf.abs() + tdg.abs() <= 1e-18 * scale {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * df - AIP0 * dg)
}

/// Coefficients u_k and v_k of the large-argument expansions.
fn uv_coefficients(n: usize) -> ([f64; 24], [f64; 24]) {
    let mut u = [0.0; 24];
    let mut v = [0.0; 24];
    u[0] = 1.0;
    v[0] = 1.0;
    for k in 1..n.min(24) {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        v[k] = -u[k] * (6.0 * kf + 1.0) / (6.0 * kf - 1.0);
    }
    (u, v)
}

/// Sums Σ (-1)^k c_k ζ^{-k}, stopping at the smallest term.
fn alternating_sum(c: &[f64], zeta: f64, start: usize, stride: usize) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut j = 0usize;
    let mut k = start;
    while k < c.len() {
        let term = c[k] / pow(zeta, k as f64);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        sum += if j.is_multiple_of(2) { term } else { -term };
        j += 1;
        k += stride;
    }
    sum
}

fn asymptotic_positive(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x * sqrt(x);
    let (u, v) = uv_coefficients(24);
    let q = sqrt(sqrt(x));
    let e = exp(-zeta) / (2.0 * sqrt(PI));
    (
        e / q * alternating_sum(&u, zeta, 0, 1),
        -e * q * alternating_sum(&v, zeta, 0, 1),
    )
}

/// Ai(−z) and Ai'(−z) for z > 0.
fn asymptotic_negative(z: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * z * sqrt(z);
    let (u, v) = uv_coefficients(24);
    let q = sqrt(sqrt(z));
    let (s, c) = (sin(zeta - PI / 4.0), cos(zeta - PI / 4.0));
    let ai = (c * alternating_sum(&u, zeta, 0, 2) + s * alternating_sum(&u, zeta, 1, 2))
        / (sqrt(PI) * q);
    // d/dx Ai(x) at x = −z.
    let aip = q / sqrt(PI) * (s * alternating_sum(&v, zeta, 0, 2) - c * alternating_sum(&v, zeta, 1, 2));
    (ai, aip)
}

/// Asymptotic estimate of the k-th zero magnitude, used to seed Newton.
fn zero_seed(k: usize) -> f64 {
    let t = 3.0 * PI * (4.0 * k as f64 - 1.0) / 8.0;
    let t2 = t * t;
    pow(t, 2.0 / 3.0) * (1.0 + 5.0 / 48.0 / t2 - 5.0 / 36.0 / (t2 * t2))
}

/// Magnitudes εₙ of the first `n` negative zeros of Ai, ascending.
pub fn airy_zeros(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Empty("Airy zero request"));
    }
    if n > MAX_ZEROS {
        return Err(Error::TooManyStates {
            requested: n,
            max: MAX_ZEROS,
        });
    }
    Ok((1..=n).map(refine_zero).collect())
}

fn refine_zero(k: usize) -> f64 {
    let mut x = -zero_seed(k);
    for _ in 0..50 {
        let (a, ap) = airy_ai(x);
        let dx = a / ap;
        x -= dx;
        if dx.abs() < 1e-15 * x.abs() {
            break;
        }
    }
    -x
}
