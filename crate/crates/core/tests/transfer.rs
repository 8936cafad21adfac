mod common;

use common::*;
use shearwave::dispersion::{closed_form_c_const_vorticity, find_wave_speed, stagnation_condition};
use shearwave::profiles::ShearProfile;
use shearwave::rayleigh::{solve_mode, solve_mode_piecewise, solve_mode_with, ShootingOptions};
use shearwave::transfer::*;

/// `T` for `U = gamma (y - h0)` from `phi = k c sinh(ky) / sinh(kh0)`.
fn linear_transfer(y: f64, gamma: f64, c: f64, k: f64, h0: f64) -> f64 {
    let s = (k * h0).sinh();
    let phi = k * c * (k * y).sinh() / s;
    let dphi = k * k * c * (k * y).cosh() / s;
    ((c - gamma * (y - h0)) * dphi + gamma * phi) / k
}

#[test]
fn transfer_matches_closed_forms_on_grid() {
    let mut worst = 0.0f64;
    for &gamma in &GAMMAS {
        for &k in &k_grid() {
            for &h0 in &h0_grid() {
                let shear = linear_or_zero(gamma, h0);
                let c = find_wave_speed(&shear, None, k, G, None).unwrap().c;
                let tf = transfer_from_mode(&solve_mode(&shear, c, k).unwrap(), &shear, None).unwrap();
                let exact: Vec<f64> = tf.y.iter().map(|&y| linear_transfer(y, gamma, c, k, h0)).collect();
                worst = worst.max(sup_rel(&tf.t, &exact));
                let library: Vec<f64> = tf
                    .y
                    .iter()
                    .map(|&y| {
                        if gamma == 0.0 {
                            closed_form_transfer_zero(y, k, h0, G)
                        } else {
                            closed_form_transfer_const_vorticity(y, gamma, c, k, h0)
                        }
                    })
                    .collect();
                assert!(sup_rel(&library, &exact) < 1e-9);
            }
        }
    }
    assert!(worst <= 1e-9, "worst sup-norm error {worst:e}");
}

#[test]
fn surface_condition_holds_at_every_root() {
    let mut profiles: Vec<ShearProfile> = Vec::new();
    for &gamma in &GAMMAS {
        for &h0 in &h0_grid() {
            profiles.push(linear_or_zero(gamma, h0));
        }
    }
    profiles.push(ShearProfile::piecewise(1.0, 3.0, 1.0, 2.0).unwrap());
    profiles.push(ShearProfile::piecewise(-2.0, 1.0, 0.5, 2.0).unwrap());
    let samples: Vec<(f64, f64)> = (0..=40).map(|i| {
        let y = 2.0 * i as f64 / 40.0;
        (y, 0.5 * (1.0 - (-y).exp()))
    }).collect();
    profiles.push(ShearProfile::tabulated(&samples, 2.0).unwrap());
    for shear in &profiles {
        for &k in &k_grid() {
            let c = find_wave_speed(shear, None, k, G, None).unwrap().c;
            let tf = transfer_from_mode(&solve_mode(shear, c, k).unwrap(), shear, None).unwrap();
            let top = *tf.t.last().unwrap();
            assert!(rel(top, G) <= 1e-8, "{:?} k {k}: T(h0) = {top}", shear.kind());
        }
    }
}

#[test]
fn bed_value_example() {
    let shear = ShearProfile::zero(2.0).unwrap();
    let c = find_wave_speed(&shear, None, 1.0, G, None).unwrap().c;
    let tf = transfer_from_mode(&solve_mode(&shear, c, 1.0).unwrap(), &shear, None).unwrap();
    assert!(rel(tf.t0, G / 2f64.cosh()) < 1e-9);
    assert!((tf.t0 - 2.6077).abs() < 5e-4);
    assert!(rel(bed_transfer(&shear, None, c, 1.0, G).unwrap(), tf.t0) < 1e-9);
}

const PIECEWISE_CASES: [(f64, f64, f64, f64); 5] = [
    (1.0, 3.0, 1.0, 2.0),
    (-2.0, 1.0, 0.5, 2.0),
    (3.0, -1.0, 1.5, 2.0),
    (0.5, -3.0, 0.8, 1.5),
    (0.5, -1.0, 1.0, 2.0),
];

#[test]
fn piecewise_mode_matches_matched_sinh_solution() {
    for &(gm, gp, h1, h0) in &PIECEWISE_CASES {
        let shear = ShearProfile::piecewise(gm, gp, h1, h0).unwrap();
        for k in [0.5, 1.0, 2.5] {
            let c = find_wave_speed(&shear, None, k, G, None).unwrap().c;
            let o = piecewise_oracle(gm, gp, h1, h0, c, k);
            let mode = solve_mode_piecewise(&shear, c, k).unwrap();
            let exact: Vec<f64> = mode
                .y
                .iter()
                .map(|&y| {
                    if y <= h1 {
                        o.a_minus * (k * y).sinh()
                    } else {
                        o.a_plus * (k * (y - h0)).sinh() + o.b * (k * (y - h0)).cosh()
                    }
                })
                .collect();
            let err = sup_rel(&mode.phi, &exact);
            assert!(err <= 1e-8, "case {gm} {gp} {h1} {h0} k {k}: {err:e}");
            let tf = transfer_from_mode(&mode, &shear, None).unwrap();
            let t0 = o.a_minus * (c + gm * h0);
            assert!(rel(tf.t0, t0) <= 1e-8, "T(0) {} vs {t0}", tf.t0);
            // Surface condition in coefficient form: (c - U(h0)) (A+ + gamma+) = g.
            let u_top = piecewise_u(gm, gp, h1, h0, h0);
            assert!(rel((c - u_top) * (o.a_plus + gp), G) <= 1e-8);
        }
    }
}

#[test]
fn piecewise_speed_matches_coefficient_dispersion_relation() {
    for &(gm, gp, h1, h0) in &PIECEWISE_CASES {
        let shear = ShearProfile::piecewise(gm, gp, h1, h0).unwrap();
        let k = 1.0;
        let c = find_wave_speed(&shear, None, k, G, None).unwrap().c;
        let u_top = piecewise_u(gm, gp, h1, h0, h0);
        let f = |c: f64| {
            let o = piecewise_oracle(gm, gp, h1, h0, c, k);
            (c - u_top) * (o.a_plus + gp) - G
        };
        let exact = bisect(f, c - 0.05, c + 0.05);
        assert!(rel(c, exact) <= 1e-8, "{c} vs {exact}");
    }
}

#[test]
fn piecewise_jump_and_continuity() {
    let (gm, gp, h1, h0) = (1.0, 3.0, 1.0, 2.0);
    let shear = ShearProfile::piecewise(gm, gp, h1, h0).unwrap();
    let c = find_wave_speed(&shear, None, 1.0, G, None).unwrap().c;
    let mode = solve_mode_piecewise(&shear, c, 1.0).unwrap();
    assert_eq!(mode.breakpoints.len(), 1);
    let bp = &mode.breakpoints[0];
    assert_eq!(mode.y[bp.index], h1);
    let u1 = gm * (h1 - h0);
    let expected = (gp - gm) / (u1 - c) * mode.phi[bp.index];
    let jump = bp.phi_prime_above - bp.phi_prime_below;
    assert!((jump - expected).abs() <= 1e-12 * expected.abs().max(1.0), "{jump} vs {expected}");
}

#[test]
fn equal_slopes_collapse_to_linear_current() {
    // A piecewise profile is not treated as affine, so the speed must clear max U.
    for gamma in [-1.0, 1.0, 5.0] {
        let h0 = 2.0;
        let pw = ShearProfile::piecewise(gamma, gamma, 0.7, h0).unwrap();
        let lin = ShearProfile::linear(gamma, h0).unwrap();
        for k in [0.5, 1.0] {
            let c_pw = find_wave_speed(&pw, None, k, G, None).unwrap().c;
            let c_lin = find_wave_speed(&lin, None, k, G, None).unwrap().c;
            assert!(rel(c_pw, c_lin) <= 1e-10);
            let t_pw = transfer_from_mode(&solve_mode_piecewise(&pw, c_lin, k).unwrap(), &pw, None).unwrap();
            let exact: Vec<f64> = t_pw.y.iter().map(|&y| linear_transfer(y, gamma, c_lin, k, h0)).collect();
            assert!(sup_rel(&t_pw.t, &exact) <= 1e-10);
            let o = piecewise_oracle(gamma, gamma, 0.7, h0, c_lin, k);
            assert!(rel(o.a_minus, k * c_lin / (k * h0).sinh()) < 1e-12);
        }
    }
}

#[test]
fn smoothed_table_converges_to_piecewise_solution() {
    let (gm, gp, h1, h0) = (1.0, 3.0, 1.0, 2.0);
    let shear = ShearProfile::piecewise(gm, gp, h1, h0).unwrap();
    let exact = find_wave_speed(&shear, None, 1.0, G, None).unwrap().c;
    let mut errors = Vec::new();
    for n in [40, 160, 640] {
        let samples: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let y = h0 * i as f64 / n as f64;
                (y, piecewise_u(gm, gp, h1, h0, y))
            })
            .collect();
        let table = ShearProfile::tabulated(&samples, h0).unwrap();
        let c = find_wave_speed(&table, None, 1.0, G, None).unwrap().c;
        errors.push(rel(c, exact));
    }
    assert!(errors[2] < errors[0], "{errors:?}");
    assert!(errors[2] < 1e-4, "{errors:?}");
}

#[test]
fn slope_sign_change_follows_stagnation_panel() {
    let (k, h0) = (1.0, 2.0);
    for gamma in [-5.0, 0.0, 5.0] {
        let shear = linear_or_zero(gamma, h0);
        let c = find_wave_speed(&shear, None, k, G, None).unwrap().c;
        let tf = transfer_from_mode(&solve_mode(&shear, c, k).unwrap(), &shear, None).unwrap();
        let changes = slope_changes_sign(&nonmonotonicity_profile(&tf));
        let critical = stagnation_condition(gamma, k, h0, G).unwrap().critical;
        assert_eq!(changes, critical, "gamma {gamma}");
        assert_eq!(changes, gamma == -5.0);
    }
}

#[test]
fn slope_sign_change_follows_stagnation_sweep() {
    // For a linear current T' = k (c - U) phi, so T' changes sign exactly when c - U does.
    for k in [0.5, 2.0] {
        for h0 in [1.0, 2.0] {
            for i in 0..=24 {
                let gamma = -12.0 + i as f64;
                let s = stagnation_condition(gamma, k, h0, G).unwrap();
                if (gamma * gamma / s.threshold - 1.0).abs() < 0.1 {
                    continue;
                }
                let shear = linear_or_zero(gamma, h0);
                let c = closed_form_c_const_vorticity(gamma, k, h0, G);
                let tf = transfer_from_mode(&solve_mode(&shear, c, k).unwrap(), &shear, None).unwrap();
                assert_eq!(
                    slope_changes_sign(&nonmonotonicity_profile(&tf)),
                    s.critical,
                    "gamma {gamma} k {k} h0 {h0}"
                );
            }
        }
    }
}

#[test]
fn transfer_slope_closed_form() {
    let (gamma, k, h0) = (-5.0, 1.0, 2.0);
    let c = closed_form_c_const_vorticity(gamma, k, h0, G);
    for i in 0..=20 {
        let y = h0 * i as f64 / 20.0;
        let phi = k * c * (k * y).sinh() / (k * h0).sinh();
        let expected = k * (c - gamma * (y - h0)) * phi;
        let got = closed_form_transfer_slope_const_vorticity(y, gamma, c, k, h0);
        assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0), "y {y}");
    }
}

/// Fourth-order centred difference at `i` on a uniform grid.
fn d4(f: &[f64], i: usize, h: f64) -> f64 {
    (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h)
}

#[test]
fn linear_field_is_divergence_free() {
    let (gamma, k, h0, a) = (-1.0, 1.0, 2.0, 0.1);
    let shear = ShearProfile::linear(gamma, h0).unwrap();
    let c = closed_form_c_const_vorticity(gamma, k, h0, G);
    let opts = ShootingOptions {
        min_points: 256,
        ..Default::default()
    };
    let mode = solve_mode_with(&shear, c, k, &opts).unwrap();
    let field = linear_field(&mode, &shear, None, a, 0.4, 256).unwrap();
    let ny = field.y.len();
    let nx = field.x.len();
    assert_eq!((ny, nx), (256, 256));
    let hy = field.y[1] - field.y[0];
    assert!(field.y.windows(2).all(|w| ((w[1] - w[0]) - hy).abs() < 1e-12));
    let hx = field.x[1] - field.x[0];
    let scale = a * k * mode.phi_prime.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for j in 2..ny - 2 {
        for i in 0..nx {
            let row = &field.u[j];
            let at = |m: isize| row[(i as isize + m).rem_euclid(nx as isize) as usize];
            let du_dx = (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * hx);
            let column: Vec<f64> = (j - 2..=j + 2).map(|jj| field.v[jj][i]).collect();
            let dv_dy = d4(&column, 2, hy);
            worst = worst.max((du_dx + dv_dy).abs());
        }
    }
    assert!(worst <= 1e-6 * scale, "divergence {worst:e} vs scale {scale:e}");
}

#[test]
fn linear_field_surface_pressure_is_g_eta() {
    let shear = ShearProfile::linear(2.0, 2.0).unwrap();
    let c = closed_form_c_const_vorticity(2.0, 1.5, 2.0, G);
    let mode = solve_mode(&shear, c, 1.5).unwrap();
    let (a, phase) = (0.3, 1.1);
    let field = linear_field(&mode, &shear, None, a, phase, 32).unwrap();
    let top = field.p.last().unwrap();
    for (x, p) in field.x.iter().zip(top) {
        let eta = a * (1.5 * x + phase).cos();
        assert!((p - G * eta).abs() <= 1e-8 * G * a);
    }
    assert!(field.rho.is_none());
    assert!(linear_field(&mode, &shear, None, -1.0, 0.0, 32).is_err());
}

#[test]
fn ill_conditioned_bed_gain() {
    // kh0 = 40: T0 ~ g / cosh(40) sits far below the rest of the profile.
    let shear = ShearProfile::zero(2.0).unwrap();
    let k = 20.0;
    let c = find_wave_speed(&shear, None, k, G, None).unwrap().c;
    let tf = transfer_from_mode(&solve_mode(&shear, c, k).unwrap(), &shear, None).unwrap();
    assert!(matches!(bed_gain(&tf), Err(shearwave::Error::IllConditioned { .. })));
}
