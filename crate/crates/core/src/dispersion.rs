//! Wave speeds: bifurcation roots `c(k)`, closed forms, Burns speeds and the two-fluid root.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::quad;
use crate::numerics::roots::{brent, BrentError};
use crate::profiles::{DensityProfile, ShearProfile, Side};
use crate::rayleigh::{check_wavenumber, surface_shot, ShootingOptions};
use crate::twofluid::{interface_shots, LidHeight, TwoFluidEnv};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionResult {
    pub c: f64,
    pub k: f64,
    pub residual_at_root: f64,
    pub bracket_used: (f64, f64),
    pub iterations: usize,
    /// Every root located by the scan, in increasing order. `c` is the largest.
    pub roots: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionOptions {
    pub shooting: ShootingOptions,
    pub scan_points: usize,
    /// Upper end of the scan, measured above the speed floor in units of `sqrt(g h0)`.
    pub upper_factor: f64,
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for DispersionOptions {
    fn default() -> Self {
        Self {
            shooting: ShootingOptions::default(),
            scan_points: 64,
            upper_factor: 10.0,
            xtol: 1e-12,
            max_iter: 200,
        }
    }
}

fn brent_error(e: BrentError<Error>) -> Error {
    match e {
        BrentError::Eval(e) => e,
        BrentError::NotBracketed { fa, fb } => Error::InvalidArgument(format!("interval does not bracket a root (f = {fa}, {fb})")),
        BrentError::NoConvergence { x, iterations } => {
            Error::Convergence(format!("root finder stopped at c = {x} after {iterations} iterations"))
        }
    }
}

/// Scans `f` on `(lo, hi]` with nodes clustered toward `lo`, refines every sign change
/// and returns the largest root.
fn largest_root<F>(f: F, lo: f64, hi: f64, k: f64, hint: Option<(f64, f64)>, opts: &DispersionOptions) -> Result<DispersionResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let refine = |a: f64, b: f64| brent(&f, a, b, opts.xtol, opts.xtol, opts.max_iter).map_err(brent_error);
    if let Some((a, b)) = hint {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidArgument(format!("invalid bracket hint ({a}, {b})")));
        }
        let (fa, fb) = (f(a)?, f(b)?);
        if fa * fb > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "bracket hint ({a}, {b}) does not enclose a sign change (f = {fa}, {fb})"
            )));
        }
        let root = refine(a, b)?;
        return Ok(DispersionResult {
            c: root.x,
            k,
            residual_at_root: f(root.x)?,
            bracket_used: (a, b),
            iterations: root.iterations,
            roots: vec![root.x],
        });
    }

    let n = opts.scan_points.max(2);
    let nodes: Vec<f64> = (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            lo + (hi - lo) * s * s
        })
        .collect();
    // Speeds where the shot itself fails (typically just above the floor, where the
    // coefficients are extreme) are left out of the scan.
    let values: Vec<Option<f64>> = nodes
        .par_iter()
        .map(|&c| match f(c) {
            Ok(v) => Ok(Some(v)),
            Err(Error::Integrator(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let mut roots = Vec::new();
    let mut last = None;
    for i in 0..n - 1 {
        let (a, b) = (nodes[i], nodes[i + 1]);
        let (Some(fa), Some(fb)) = (values[i], values[i + 1]) else {
            continue;
        };
        if fa == 0.0 {
            roots.push(a);
            last = Some((a, a, 0));
        } else if fa * fb < 0.0 {
            match refine(a, b) {
                Ok(root) => {
                    roots.push(root.x);
                    last = Some((a, b, root.iterations));
                }
                Err(Error::Integrator(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    if values[n - 1] == Some(0.0) {
        roots.push(nodes[n - 1]);
        last = Some((nodes[n - 1], nodes[n - 1], 0));
    }
    let Some((a, b, iterations)) = last else {
        return Err(Error::NoRoot {
            lo,
            hi,
            scan: nodes.into_iter().zip(values).filter_map(|(c, v)| v.map(|v| (c, v))).collect(),
        });
    };
    let c = *roots.last().expect("a root was recorded");
    Ok(DispersionResult {
        c,
        k,
        residual_at_root: f(c)?,
        bracket_used: (a, b),
        iterations,
        roots,
    })
}

fn check_gravity(g: f64) -> Result<()> {
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::InvalidArgument(format!("gravity must be positive, got {g}")));
    }
    Ok(())
}

/// Lowest admissible wave speed (exclusive) for `find_wave_speed`.
pub fn speed_floor(shear: &ShearProfile, dens: Option<&DensityProfile>) -> f64 {
    match dens {
        None => shear.speed_floor(),
        Some(_) => shear.max_u(),
    }
}

/// Scan bounds used by `find_wave_speed`.
pub fn scan_interval(shear: &ShearProfile, dens: Option<&DensityProfile>, g: f64, opts: &DispersionOptions) -> (f64, f64) {
    let floor = speed_floor(shear, dens);
    let lo = floor + 2.0 * opts.shooting.margin * (1.0 + floor.abs());
    let hi = shear.max_u().max(floor) + opts.upper_factor * (g * shear.h0()).sqrt();
    (lo, hi)
}

/// Fastest bifurcation speed at wavenumber `k`.
pub fn find_wave_speed(
    shear: &ShearProfile,
    dens: Option<&DensityProfile>,
    k: f64,
    g: f64,
    bracket_hint: Option<(f64, f64)>,
) -> Result<DispersionResult> {
    find_wave_speed_with(shear, dens, k, g, bracket_hint, &DispersionOptions::default())
}

pub fn find_wave_speed_with(
    shear: &ShearProfile,
    dens: Option<&DensityProfile>,
    k: f64,
    g: f64,
    bracket_hint: Option<(f64, f64)>,
    opts: &DispersionOptions,
) -> Result<DispersionResult> {
    check_wavenumber(k)?;
    check_gravity(g)?;
    let (lo, hi) = scan_interval(shear, dens, g, opts);
    let f = |c: f64| surface_shot(shear, dens, c, k, g, &opts.shooting).map(|s| s.residual);
    largest_root(f, lo, hi, k, bracket_hint, opts)
}

/// `sqrt(g tanh(k h0) / k)`.
pub fn closed_form_c_zero(k: f64, h0: f64, g: f64) -> f64 {
    (g * (k * h0).tanh() / k).sqrt()
}

/// Positive root for the linear current `U = gamma (y - h0)`.
pub fn closed_form_c_const_vorticity(gamma: f64, k: f64, h0: f64, g: f64) -> f64 {
    let t = (k * h0).tanh();
    let a = gamma * t / (2.0 * k);
    -a + (a * a + g * t / k).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stagnation {
    /// A critical layer appears in the constant-vorticity flow.
    pub critical: bool,
    /// `gamma^2` must exceed this (with `gamma < 0`).
    pub threshold: f64,
}

/// `x - tanh x`, accurate for small `x`.
fn x_minus_tanh(x: f64) -> f64 {
    if x.abs() < 0.05 {
        let x2 = x * x;
        // x^3/3 - 2x^5/15 + 17x^7/315 - 62x^9/2835
        x * x2 * (1.0 / 3.0 + x2 * (-2.0 / 15.0 + x2 * (17.0 / 315.0 - x2 * 62.0 / 2835.0)))
    } else {
        x - x.tanh()
    }
}

pub fn stagnation_condition(gamma: f64, k: f64, h0: f64, g: f64) -> Result<Stagnation> {
    for (name, v) in [("k", k), ("h0", h0), ("g", g)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    let t = (k * h0).tanh();
    let denom = h0 * x_minus_tanh(k * h0);
    if !(denom > 0.0) {
        return Err(Error::DegenerateGeometry(format!("k h0^2 - h0 tanh(k h0) = {denom}")));
    }
    let threshold = g * t / denom;
    Ok(Stagnation {
        critical: gamma < 0.0 && gamma * gamma > threshold,
        threshold,
    })
}

/// Points where the integrand of a Burns integral over `shear` is not smooth or peaks.
fn burns_breaks(shear: &ShearProfile) -> Vec<f64> {
    let mut breaks = shear.breaks();
    breaks.push(shear.argmax_u().0);
    breaks
}

/// `int_0^{h0} dy / (U - c)^2`.
fn burns_integral(shear: &ShearProfile, c: f64) -> Result<f64> {
    let h0 = shear.h0();
    quad::integrate(
        |y| {
            let d = shear.u_at(y) - c;
            1.0 / (d * d)
        },
        0.0,
        h0,
        &burns_breaks(shear),
        1e-12,
        0.0,
        5000,
    )
    .map(|q| q.value)
    .map_err(|e| Error::Integration(format!("Burns integral at c = {c} did not converge (value {}, error {})", e.value, e.error)))
}

/// Root above `floor` of a function that is positive just above `floor` and tends to a
/// negative limit at large speeds.
fn burns_root<F: Fn(f64) -> Result<f64>>(f: F, floor: f64, speed_scale: f64) -> Result<f64> {
    let mut delta = 1e-3 * (1.0 + floor.abs()).max(speed_scale);
    let mut fa = f(floor + delta)?;
    let mut tries = 0;
    while fa <= 0.0 {
        delta *= 0.1;
        tries += 1;
        if tries > 12 {
            return Err(Error::Convergence("long-wave condition stays negative just above max U".into()));
        }
        fa = f(floor + delta)?;
    }
    let a = floor + delta;
    let mut width = speed_scale.max(delta);
    let mut b = floor + width;
    let mut tries = 0;
    while f(b)? > 0.0 {
        width *= 2.0;
        b = floor + width;
        tries += 1;
        if tries > 200 {
            return Err(Error::Convergence("no upper bracket for the long-wave speed".into()));
        }
    }
    brent(&f, a, b, 1e-13, 1e-14, 200).map(|r| r.x).map_err(brent_error)
}

/// Long-wave speeds above `max U` solving `int dy/(U - c)^2 = 1/g`. Exactly one exists.
pub fn burns_speed(shear: &ShearProfile, g: f64) -> Result<Vec<f64>> {
    check_gravity(g)?;
    let f = |c: f64| Ok(burns_integral(shear, c)? - 1.0 / g);
    burns_root(f, shear.max_u(), (g * shear.h0()).sqrt()).map(|c| vec![c])
}

/// Long-wave speed of the two-fluid system. The densities enter as the weights
/// `rho_+/rho_-` and `1`, so that an empty upper layer gives the single-fluid speed.
pub fn generalized_burns_speed(env: &TwoFluidEnv) -> Result<f64> {
    let g = env.g();
    let ratio = env.rho_plus() / env.rho_minus();
    let with_upper = ratio > 0.0;
    if with_upper && env.lid() == LidHeight::Infinite {
        return Err(Error::Integrability(
            "the upper current is constant far from the interface, so the upper integral diverges".into(),
        ));
    }
    let lower = env.lower();
    let upper = env.upper();
    let f = |c: f64| {
        let mut total = burns_integral(lower, c)?;
        if with_upper {
            total += ratio * burns_integral(upper, c)?;
        }
        Ok(total - 1.0 / g)
    };
    let floor = env.speed_floor();
    let depth = match env.lid() {
        LidHeight::Finite(big_h) if with_upper => big_h,
        _ => env.h0(),
    };
    burns_root(f, floor, (g * depth).sqrt())
}

/// Interface residual `(rho_+ - rho_-) g - k^2 sigma - (rho_+ T_+(h0) - rho_- T_-(h0))`,
/// multiplied through by the raw shot values so that it has no poles, then normalized.
pub fn two_fluid_residual(env: &TwoFluidEnv, c: f64, k: f64, opts: &ShootingOptions) -> Result<f64> {
    check_wavenumber(k)?;
    crate::rayleigh::check_speed(c, env.speed_floor(), opts)?;
    let with_upper = env.rho_plus() > 0.0;
    let shots = interface_shots(env, c, k, opts, with_upper)?;
    let h0 = env.h0();
    let (rm, rp, g) = (env.rho_minus(), env.rho_plus(), env.g());
    let [sm, dsm] = shots.lower;
    let dm = c - env.lower().u_at(h0);
    let um = env.lower().du_at(h0, Side::Below);
    // rho_- T_-(h0) s_-, up to the common factor s_+
    let lower_term = rm * dm * (dm * dsm + um * sm);
    let lower_size = rm * dm.abs() * (dm.abs() * dsm.abs() + um.abs() * sm.abs());
    let (sp, upper_term, upper_size) = match shots.upper {
        Some([sp, dsp]) => {
            let dp = c - env.upper().u_at(0.0);
            let up = env.upper().du_at(0.0, Side::Above);
            (
                sp,
                rp * dp * (dp * dsp + up * sp),
                rp * dp.abs() * (dp.abs() * dsp.abs() + up.abs() * sp.abs()),
            )
        }
        None => (1.0, 0.0, 0.0),
    };
    let forcing = (rp - rm) * g - k * k * env.sigma();
    let residual = forcing * sm * sp - upper_term * sm + lower_term * sp;
    let norm = forcing.abs() * (sm * sp).abs() + upper_size * sm.abs() + lower_size * sp.abs();
    Ok(residual / norm)
}

/// Fastest interfacial wave speed at wavenumber `k`.
pub fn two_fluid_dispersion(env: &TwoFluidEnv, k: f64) -> Result<DispersionResult> {
    two_fluid_dispersion_with(env, k, None, &DispersionOptions::default())
}

pub fn two_fluid_dispersion_with(
    env: &TwoFluidEnv,
    k: f64,
    bracket_hint: Option<(f64, f64)>,
    opts: &DispersionOptions,
) -> Result<DispersionResult> {
    check_wavenumber(k)?;
    let floor = env.speed_floor();
    let lo = floor + 2.0 * opts.shooting.margin * (1.0 + floor.abs());
    let hi = floor + opts.upper_factor * (env.g() * env.h0()).sqrt();
    let f = |c: f64| two_fluid_residual(env, c, k, &opts.shooting);
    largest_root(f, lo, hi, k, bracket_hint, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_limits() {
        assert!((closed_form_c_zero(1e-6, 2.0, 9.81) - 19.62f64.sqrt()).abs() < 1e-6);
        assert!((closed_form_c_zero(50.0, 2.0, 9.81) - (9.81f64 / 50.0).sqrt()).abs() < 1e-12);
        assert_eq!(closed_form_c_const_vorticity(0.0, 1.3, 2.0, 9.81), closed_form_c_zero(1.3, 2.0, 9.81));
        assert!(closed_form_c_const_vorticity(5.0, 1.0, 2.0, 9.81) < closed_form_c_zero(1.0, 2.0, 9.81));
    }

    #[test]
    fn small_argument_series() {
        for x in [1e-3, 1e-2, 0.049] {
            let direct = x - f64::tanh(x);
            assert!((x_minus_tanh(x) - direct).abs() <= 1e-9 * direct, "{x}");
        }
        assert!(x_minus_tanh(1e-9) > 0.0);
    }

    #[test]
    fn stagnation_examples() {
        let s = stagnation_condition(-5.0, 1.0, 2.0, 9.81).unwrap();
        assert!(s.critical);
        assert!(!stagnation_condition(5.0, 1.0, 2.0, 9.81).unwrap().critical);
        assert!(!stagnation_condition(-0.1, 1.0, 2.0, 9.81).unwrap().critical);
        assert!(stagnation_condition(-5.0, 0.0, 2.0, 9.81).is_err());
        assert!(matches!(stagnation_condition(-5.0, 1e-300, 1e-300, 9.81), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn no_root_reports_scan() {
        let p = ShearProfile::zero(2.0).unwrap();
        let opts = DispersionOptions {
            upper_factor: 0.1,
            ..Default::default()
        };
        match find_wave_speed_with(&p, None, 1.0, 9.81, None, &opts) {
            Err(Error::NoRoot { scan, .. }) => assert_eq!(scan.len(), 64),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_hint_is_rejected() {
        let p = ShearProfile::zero(2.0).unwrap();
        assert!(matches!(find_wave_speed(&p, None, 1.0, 9.81, Some((0.5, 1.0))), Err(Error::InvalidArgument(_))));
        let r = find_wave_speed(&p, None, 1.0, 9.81, Some((2.0, 4.0))).unwrap();
        assert!((r.c - closed_form_c_zero(1.0, 2.0, 9.81)).abs() < 1e-10);
    }
}
