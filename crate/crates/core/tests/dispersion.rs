mod common;

use common::*;
use shearwave::dispersion::*;
use shearwave::profiles::ShearProfile;
use shearwave::rayleigh::bifurcation_residual;
use shearwave::Error;

#[test]
fn wave_speed_matches_closed_forms_on_grid() {
    let mut worst = 0.0f64;
    for &gamma in &GAMMAS {
        for &k in &k_grid() {
            for &h0 in &h0_grid() {
                let shear = linear_or_zero(gamma, h0);
                let c = find_wave_speed(&shear, None, k, G, None).unwrap().c;
                // Independent oracle: c^2 + gamma tanh(kh0)/k c - g tanh(kh0)/k = 0.
                let t = (k * h0).tanh() / k;
                let exact = (-gamma * t + (gamma * gamma * t * t + 4.0 * G * t).sqrt()) / 2.0;
                worst = worst.max(rel(c, exact));
                if gamma == 0.0 {
                    assert!(rel(closed_form_c_zero(k, h0, G), exact) < 1e-14);
                } else {
                    assert!(rel(closed_form_c_const_vorticity(gamma, k, h0, G), exact) < 1e-14);
                }
            }
        }
    }
    assert!(worst <= 1e-8, "worst relative error {worst:e}");
}

#[test]
fn roots_satisfy_their_residual() {
    for &gamma in &[-5.0, 0.0, 1.0] {
        let shear = linear_or_zero(gamma, 2.0);
        for &k in &k_grid() {
            let r = find_wave_speed(&shear, None, k, G, None).unwrap();
            let again = bifurcation_residual(&shear, None, r.c, k, G).unwrap();
            assert!(again.abs() <= 1e-10, "gamma {gamma} k {k}: residual {again:e}");
            assert!(r.residual_at_root.abs() <= 1e-10);
            assert_eq!(*r.roots.last().unwrap(), r.c);
            assert!(r.bracket_used.0 <= r.c && r.c <= r.bracket_used.1);
        }
    }
}

#[test]
fn residual_at_off_dispersion_speed_has_a_sign() {
    let shear = ShearProfile::zero(2.0).unwrap();
    let c0 = closed_form_c_zero(1.0, 2.0, G);
    let on = bifurcation_residual(&shear, None, c0, 1.0, G).unwrap();
    let off = bifurcation_residual(&shear, None, 2.0 * c0, 1.0, G).unwrap();
    let below = bifurcation_residual(&shear, None, 0.5 * c0, 1.0, G).unwrap();
    assert!(on.abs() <= 1e-9);
    assert!(off.abs() > 1e-3 && below.abs() > 1e-3);
    assert!(off.signum() != below.signum());
}

#[test]
fn finer_scan_keeps_the_largest_root() {
    let fine = DispersionOptions {
        scan_points: 256,
        ..Default::default()
    };
    for shear in [
        ShearProfile::zero(2.0).unwrap(),
        ShearProfile::linear(-5.0, 2.0).unwrap(),
        ShearProfile::piecewise(1.0, 3.0, 1.0, 2.0).unwrap(),
    ] {
        for k in [0.3, 1.0, 4.0] {
            let a = find_wave_speed(&shear, None, k, G, None).unwrap().c;
            let b = find_wave_speed_with(&shear, None, k, G, None, &fine).unwrap().c;
            assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }
}

#[test]
fn bracket_hint_is_used_or_rejected() {
    let shear = ShearProfile::zero(2.0).unwrap();
    let exact = closed_form_c_zero(1.0, 2.0, G);
    let r = find_wave_speed(&shear, None, 1.0, G, Some((2.0, 4.0))).unwrap();
    assert!(rel(r.c, exact) < 1e-10);
    assert!(matches!(
        find_wave_speed(&shear, None, 1.0, G, Some((4.0, 5.0))),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn invalid_inputs_are_rejected() {
    let shear = ShearProfile::zero(2.0).unwrap();
    assert!(find_wave_speed(&shear, None, 0.0, G, None).is_err());
    assert!(find_wave_speed(&shear, None, -1.0, G, None).is_err());
    assert!(find_wave_speed(&shear, None, 1.0, 0.0, None).is_err());
}

#[test]
fn long_waves_approach_burns_speed() {
    for shear in [
        ShearProfile::zero(2.0).unwrap(),
        ShearProfile::linear(1.0, 2.0).unwrap(),
        ShearProfile::linear(-1.0, 2.0).unwrap(),
    ] {
        let burns = burns_speed(&shear, G).unwrap();
        assert_eq!(burns.len(), 1);
        let c = find_wave_speed(&shear, None, 1e-4, G, None).unwrap().c;
        assert!(rel(c, burns[0]) <= 1e-3, "{c} vs {}", burns[0]);
    }
}

#[test]
fn burns_speed_closed_forms() {
    let zero = burns_speed(&ShearProfile::zero(2.0).unwrap(), G).unwrap()[0];
    assert!(rel(zero, (G * 2.0).sqrt()) <= 1e-12);
    // For U = gamma (y - h0) the integral is h0 / (c (c + gamma h0)), so
    // c^2 + gamma h0 c - g h0 = 0.
    for gamma in [1.0, -1.0] {
        let c = burns_speed(&ShearProfile::linear(gamma, 2.0).unwrap(), G).unwrap()[0];
        let exact = (-2.0 * gamma + (4.0 * gamma * gamma + 8.0 * G).sqrt()) / 2.0;
        assert!(rel(c, exact) <= 1e-12, "gamma {gamma}: {c} vs {exact}");
    }
}

#[test]
fn burns_speed_for_a_tabulated_jet() {
    // U = 1 - (y - 1)^2 on [0, 2] peaks inside the layer.
    let samples: Vec<(f64, f64)> = (0..=80).map(|i| {
        let y = 2.0 * i as f64 / 80.0;
        (y, 1.0 - (y - 1.0).powi(2))
    }).collect();
    let shear = ShearProfile::tabulated(&samples, 2.0).unwrap();
    let c = burns_speed(&shear, G).unwrap()[0];
    assert!(c > 1.0);
    // Midpoint-rule oracle on the exact profile.
    let n = 200_000;
    let integral: f64 = (0..n)
        .map(|i| {
            let y = 2.0 * (i as f64 + 0.5) / n as f64;
            1.0 / (1.0 - (y - 1.0).powi(2) - c).powi(2)
        })
        .sum::<f64>()
        * 2.0
        / n as f64;
    assert!(rel(integral, 1.0 / G) < 1e-5, "{integral}");
}

#[test]
fn stagnation_examples() {
    assert!(stagnation_condition(-5.0, 1.0, 2.0, G).unwrap().critical);
    assert!(!stagnation_condition(5.0, 1.0, 2.0, G).unwrap().critical);
    assert!(!stagnation_condition(0.0, 1.0, 2.0, G).unwrap().critical);
}

#[test]
fn stagnation_means_the_speed_falls_below_the_bed_current() {
    for k in [0.3, 1.0, 3.0] {
        for h0 in [0.5, 2.0] {
            for i in 0..=60 {
                let gamma = -15.0 + 0.5 * i as f64;
                let c = closed_form_c_const_vorticity(gamma, k, h0, G);
                // U(0) = -gamma h0 is the largest current when gamma < 0.
                let stagnant = c < -gamma * h0;
                let s = stagnation_condition(gamma, k, h0, G).unwrap();
                if (gamma * gamma - s.threshold).abs() > 1e-9 * s.threshold {
                    assert_eq!(s.critical, stagnant, "gamma {gamma} k {k} h0 {h0}");
                }
            }
        }
    }
}

#[test]
fn stagnation_threshold_is_finite_for_small_kh0() {
    let s = stagnation_condition(-1.0, 1e-4, 1.0, G).unwrap();
    assert!(s.threshold.is_finite() && s.threshold > 0.0);
    // x - tanh x ~ x^3/3 gives threshold ~ 3 g / (k^2 h0^3).
    assert!(rel(s.threshold, 3.0 * G / 1e-8) < 1e-6);
}
