use std::f64::consts::PI;

use granit_core::magnetics::{
    array_field, extract_excitation_params, field_map, gradient_stats, square_wire_field,
    square_wire_gradient, wire_sum,
};
use granit_core::{PhysicalConstants, Serial, WireArrayConfig};
use proptest::prelude::*;

const C: f64 = 1e-3;

fn mu0() -> f64 {
    PhysicalConstants::default().mu0
}

/// Random exterior point within 6 mm of the wire centre.
fn exterior_point() -> impl Strategy<Value = (f64, f64)> {
    (-6e-3f64..6e-3, -6e-3f64..6e-3).prop_filter("outside the conductor", |(x, z)| {
        x.abs() > 0.55 * C || z.abs() > 0.55 * C
    })
}

fn field(x: f64, z: f64) -> (f64, f64) {
    square_wire_field(x, z, 1.0, C, mu0()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_finite_differences((x, z) in exterior_point()) {
        let h = 1e-8;
        let (bxp, bzp) = field(x, z + h);
        let (bxm, bzm) = field(x, z - h);
        let fd = ((bxp - bxm) / (2.0 * h), (bzp - bzm) / (2.0 * h));
        let (gx, gz) = square_wire_gradient(x, z, 1.0, C, mu0()).unwrap();
        let scale = gx.abs() + gz.abs();
        prop_assert!((fd.0 - gx).abs() <= 1e-4 * scale, "{:?} vs {:?}", fd, (gx, gz));
        prop_assert!((fd.1 - gz).abs() <= 1e-4 * scale, "{:?} vs {:?}", fd, (gx, gz));
    }

    #[test]
    fn field_is_divergence_and_curl_free((x, z) in exterior_point()) {
        let h = 1e-8;
        let dbx_dx = (field(x + h, z).0 - field(x - h, z).0) / (2.0 * h);
        let dbz_dx = (field(x + h, z).1 - field(x - h, z).1) / (2.0 * h);
        let (dbx_dz, dbz_dz) = square_wire_gradient(x, z, 1.0, C, mu0()).unwrap();
        let scale = dbx_dz.abs() + dbz_dz.abs();
        prop_assert!((dbx_dx + dbz_dz).abs() <= 1e-4 * scale);
        prop_assert!((dbx_dz - dbz_dx).abs() <= 1e-4 * scale);
    }

    #[test]
    fn far_field_approaches_thin_wire(r in 2e-3f64..20e-3, angle in 0.0f64..(2.0 * PI)) {
        let (x, z) = (r * angle.cos(), r * angle.sin());
        let (bx, bz) = field(x, z);
        let thin = mu0() / (2.0 * PI * r);
        prop_assert!(((bx * bx + bz * bz).sqrt() - thin).abs() <= 0.02 * thin);
        // Field circulates: perpendicular to the radius.
        prop_assert!((bx * x + bz * z).abs() <= 0.02 * thin * r);
    }

    #[test]
    fn field_is_linear_in_current((x, z) in exterior_point(), i in -10.0f64..10.0) {
        let (bx, bz) = square_wire_field(x, z, i, C, mu0()).unwrap();
        let (ux, uz) = field(x, z);
        prop_assert!((bx - i * ux).abs() <= 1e-12 * ux.abs().max(1e-9));
        prop_assert!((bz - i * uz).abs() <= 1e-12 * uz.abs().max(1e-9));
    }

    #[test]
    fn quarter_turn_symmetry((x, z) in exterior_point()) {
        // The square is invariant under a rotation by 90° about its axis.
        let (bx, bz) = field(x, z);
        let (rx, rz) = field(-z, x);
        prop_assert!((rx + bz).abs() <= 1e-9 * (bx.abs() + bz.abs()));
        prop_assert!((rz - bx).abs() <= 1e-9 * (bx.abs() + bz.abs()));
    }

    #[test]
    fn array_superposition(
        x in -70e-3f64..70e-3,
        z in 0.0f64..0.79e-3,
        k in -3.0f64..3.0,
    ) {
        let base = WireArrayConfig::benchmark();
        let a = wire_sum(&base, x, z, mu0()).unwrap();
        let b = wire_sum(&base.scaled_currents(k), x, z, mu0()).unwrap();
        for (u, v) in a.iter().zip(b) {
            prop_assert!((k * u - v).abs() <= 1e-12 * u.abs().max(1e-9));
        }
    }
}

#[test]
fn array_gradient_matches_finite_differences() {
    let cfg = WireArrayConfig::benchmark();
    let h = 1e-8;
    for i in 0..20 {
        let x = -60e-3 + 6.1e-3 * i as f64;
        let z = 0.1e-3 + 0.03e-3 * i as f64;
        let s = array_field(&cfg, x, z, mu0()).unwrap();
        let up = array_field(&cfg, x, z + h, mu0()).unwrap();
        let dn = array_field(&cfg, x, z - h, mu0()).unwrap();
        let fd_bx = (up.bx - dn.bx) / (2.0 * h);
        let fd_abs = (up.abs_b() - dn.abs_b()) / (2.0 * h);
        assert!((fd_bx - s.dbx_dz).abs() <= 1e-4 * s.dbx_dz.abs().max(1e-3));
        assert!((fd_abs - s.grad_abs_b).abs() <= 1e-4 * s.grad_abs_b.abs());
    }
}

#[test]
fn benchmark_map_is_homogeneous() {
    let cfg = WireArrayConfig::benchmark();
    let window = cfg.central_window();
    let map = field_map(&cfg, 0.0, window, 2001, mu0(), &Serial).unwrap();
    let stats = gradient_stats(&map).unwrap();
    assert!((stats.mean - 0.52).abs() <= 0.02, "{stats:?}");
    assert!(stats.max_deviation <= 0.04, "{stats:?}");
    let p = extract_excitation_params(&cfg, mu0(), &Serial).unwrap();
    assert!((p.b1 - 0.8e-3).abs() <= 0.1e-3, "{p:?}");
    assert!((p.beta_hat - stats.mean).abs() < 1e-3);
}

#[test]
fn ripple_wavelength_is_about_two_millimetres() {
    let cfg = WireArrayConfig::benchmark();
    let map = field_map(&cfg, 0.0, cfg.central_window(), 6400, mu0(), &Serial).unwrap();
    let mean = map.iter().map(|s| s.grad_abs_b).sum::<f64>() / map.len() as f64;
    let power = |lambda: f64| {
        let (mut c, mut s) = (0.0, 0.0);
        for p in &map {
            let k = 2.0 * PI * p.x / lambda;
            c += (p.grad_abs_b - mean) * k.cos();
            s += (p.grad_abs_b - mean) * k.sin();
        }
        c * c + s * s
    };
    let dominant = (50..=600)
        .map(|i| i as f64 * 1e-5)
        .max_by(|a, b| power(*a).total_cmp(&power(*b)))
        .unwrap();
    assert!((dominant - 2e-3).abs() <= 0.5e-3, "{dominant}");
}

#[test]
fn rotating_field_has_one_centimetre_period() {
    // Field direction rotates once per eight wires.
    let cfg = WireArrayConfig::benchmark();
    let d = cfg.period();
    assert!((d - 0.01).abs() < 1e-12);
    for i in 0..10 {
        let x = -20e-3 + 3.7e-3 * i as f64;
        let a = array_field(&cfg, x, 0.0, mu0()).unwrap();
        let b = array_field(&cfg, x + d, 0.0, mu0()).unwrap();
        assert!((a.bx - b.bx).abs() < 0.02 * a.abs_b());
        assert!((a.bz - b.bz).abs() < 0.02 * a.abs_b());
    }
}
