//! Pressure transfer functions `p = T(y) eta`, bed gains and linear wave fields.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::five_point_derivative;
use crate::profiles::{DensityProfile, ShearProfile, Side};
use crate::rayleigh::{check_wavenumber, surface_shot, Background, ModeSolution, ModeVariant, ShootingOptions};
use crate::twofluid::TwoFluidEnv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferVariant {
    Homogeneous,
    Stratified,
    TwoFluidLower,
    TwoFluidUpper,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferFunction {
    pub y: Vec<f64>,
    #[serde(rename = "T")]
    pub t: Vec<f64>,
    #[serde(rename = "T0")]
    pub t0: f64,
    pub c: f64,
    pub k: f64,
    pub variant: TransferVariant,
    /// `(y, T(y+))` where `U'` jumps; the main samples hold `T(y-)`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub jumps: Vec<(f64, f64)>,
}

fn check_mode(mode: &ModeSolution, lo: f64, hi: f64) -> Result<()> {
    let n = mode.y.len();
    if n < 2 || mode.phi.len() != n || mode.phi_prime.len() != n {
        return Err(Error::Consistency("mode arrays have inconsistent lengths".into()));
    }
    let slack = 1e-12 * hi.abs().max(1.0);
    if (mode.y[0] - lo).abs() > slack || (mode.y[n - 1] - hi).abs() > slack {
        return Err(Error::Consistency(format!(
            "mode grid [{}, {}] does not match the profile domain [{lo}, {hi}]",
            mode.y[0],
            mode.y[n - 1]
        )));
    }
    Ok(())
}

/// Samples `T` on the mode grid. Homogeneous modes use `(1/k)((c - U) phi' + U' phi)`,
/// stratified ones `(1/k) R (c - U)^2 phi'` in terms of `phi/(c - U)`.
pub fn transfer_from_mode(mode: &ModeSolution, shear: &ShearProfile, dens: Option<&DensityProfile>) -> Result<TransferFunction> {
    let (c, k) = (mode.c, mode.k);
    let h0 = shear.h0();
    check_mode(mode, 0.0, h0)?;
    let target = k * (c - shear.u_at(h0));
    let end = *mode.phi.last().expect("checked length");
    if (end - target).abs() > 1e-10 * target.abs().max(k * c.abs()).max(f64::MIN_POSITIVE) {
        return Err(Error::Consistency(format!(
            "mode surface value {end} does not match k (c - U(h0)) = {target} for this profile"
        )));
    }
    let (t, variant) = match mode.variant {
        ModeVariant::Homogeneous => {
            if dens.is_some_and(|d| !d.is_constant()) {
                return Err(Error::Consistency("homogeneous mode used with a stratified density".into()));
            }
            let t: Vec<f64> = mode
                .y
                .iter()
                .zip(mode.phi.iter().zip(&mode.phi_prime))
                .map(|(&y, (&p, &dp))| ((c - shear.u_at(y)) * dp + shear.du_at(y, Side::Below) * p) / k)
                .collect();
            (t, TransferVariant::Homogeneous)
        }
        ModeVariant::Stratified => {
            let dens = dens.ok_or_else(|| Error::Consistency("stratified mode needs its density profile".into()))?;
            let vp = mode
                .varphi_prime
                .as_ref()
                .ok_or_else(|| Error::Consistency("stratified mode without phi/(c - U) samples".into()))?;
            let t: Vec<f64> = mode
                .y
                .iter()
                .zip(vp)
                .map(|(&y, &vp)| {
                    let d = c - shear.u_at(y);
                    dens.r_at(y) * d * d * vp / k
                })
                .collect();
            (t, TransferVariant::Stratified)
        }
        _ => return Err(Error::Consistency("two-fluid modes need transfer_two_fluid".into())),
    };
    let jumps = mode
        .breakpoints
        .iter()
        .map(|b| {
            let d = c - shear.u_at(b.y);
            let above = match variant {
                TransferVariant::Stratified => t[b.index],
                _ => (d * b.phi_prime_above + shear.du_at(b.y, Side::Above) * mode.phi[b.index]) / k,
            };
            (b.y, above)
        })
        .collect();
    Ok(TransferFunction {
        t0: t[0],
        y: mode.y.clone(),
        t,
        c,
        k,
        variant,
        jumps,
    })
}

fn layer_transfer<B: Background>(mode: &ModeSolution, bg: &B, u_interface: f64, variant: TransferVariant) -> TransferFunction {
    let (c, k) = (mode.c, mode.k);
    let lead = (c - u_interface) / k;
    let t: Vec<f64> = mode
        .y
        .iter()
        .zip(mode.phi.iter().zip(&mode.phi_prime))
        .map(|(&y, (&p, &dp))| lead * ((c - bg.u(y)) * dp + bg.du(y, Side::Below) * p))
        .collect();
    let jumps = mode
        .breakpoints
        .iter()
        .map(|b| {
            (
                b.y,
                lead * ((c - bg.u(b.y)) * b.phi_prime_above + bg.du(b.y, Side::Above) * mode.phi[b.index]),
            )
        })
        .collect();
    TransferFunction {
        t0: t[0],
        y: mode.y.clone(),
        t,
        c,
        k,
        variant,
        jumps,
    }
}

/// Per-density transfer functions of both layers,
/// `T(y) = (1/k)(c - U(h0))((c - U) phi' + U' phi)` with `phi(h0) = k`.
/// `T0` of the upper function is its value at the interface.
pub fn transfer_two_fluid(env: &TwoFluidEnv, lower: &ModeSolution, upper: &ModeSolution) -> Result<(TransferFunction, TransferFunction)> {
    if lower.variant != ModeVariant::TwoFluidLower || upper.variant != ModeVariant::TwoFluidUpper {
        return Err(Error::Consistency("expected a lower and an upper two-fluid mode".into()));
    }
    if lower.c != upper.c || lower.k != upper.k {
        return Err(Error::Consistency("layer modes were solved at different (c, k)".into()));
    }
    let h0 = env.h0();
    check_mode(lower, 0.0, h0)?;
    check_mode(upper, h0, env.upper_top(upper.k))?;
    let lo = layer_transfer(lower, env.lower(), env.lower().u_at(h0), TransferVariant::TwoFluidLower);
    let up = layer_transfer(upper, &env.upper_layer(), env.upper().u_at(0.0), TransferVariant::TwoFluidUpper);
    Ok((lo, up))
}

/// `1 / T0`.
pub fn bed_gain(tf: &TransferFunction) -> Result<f64> {
    let scale = tf.t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(tf.t0.abs() > 1e-14 * scale) || !tf.t0.is_finite() {
        return Err(Error::IllConditioned { t0: tf.t0 });
    }
    Ok(1.0 / tf.t0)
}

/// `T(0)` straight from a surface shot, without building the mode.
pub fn bed_transfer(shear: &ShearProfile, dens: Option<&DensityProfile>, c: f64, k: f64, g: f64) -> Result<f64> {
    let shot = surface_shot(shear, dens, c, k, g, &ShootingOptions::default())?;
    if !shot.t0.is_finite() || shot.t0 == 0.0 {
        return Err(Error::DegenerateMode { c, k });
    }
    Ok(shot.t0)
}

/// `g cosh(k y) / cosh(k h0)`: zero vorticity at its dispersion root.
pub fn closed_form_transfer_zero(y: f64, k: f64, h0: f64, g: f64) -> f64 {
    // ratio of cosh written to stay finite for large k h0
    g * ((-k * (h0 - y)).exp() + (-k * (h0 + y)).exp()) / (1.0 + (-2.0 * k * h0).exp())
}

/// Transfer function for `U = gamma (y - h0)` at speed `c`.
pub fn closed_form_transfer_const_vorticity(y: f64, gamma: f64, c: f64, k: f64, h0: f64) -> f64 {
    let (ch, sh) = ratio_cosh_sinh(k, y, h0);
    c * ((c - gamma * (y - h0)) * k * ch + gamma * sh)
}

/// `T'` for `U = gamma (y - h0)` at speed `c`.
pub fn closed_form_transfer_slope_const_vorticity(y: f64, gamma: f64, c: f64, k: f64, h0: f64) -> f64 {
    let (_, sh) = ratio_cosh_sinh(k, y, h0);
    k * k * c * sh * (c - gamma * (y - h0))
}

/// `(cosh(k y), sinh(k y)) / sinh(k h0)`.
fn ratio_cosh_sinh(k: f64, y: f64, h0: f64) -> (f64, f64) {
    let den = 1.0 - (-2.0 * k * h0).exp();
    let a = (-k * (h0 - y)).exp();
    let b = (-k * (h0 + y)).exp();
    ((a + b) / den, (a - b) / den)
}

/// Sign of `dT/dy` at each node (`0` where the slope is negligible).
pub fn nonmonotonicity_profile(tf: &TransferFunction) -> Vec<(f64, i8)> {
    let d = five_point_derivative(&tf.y, &tf.t);
    let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    tf.y
        .iter()
        .zip(d)
        .map(|(&y, v)| {
            let s = if v.abs() <= 1e-6 * scale {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            };
            (y, s)
        })
        .collect()
}

/// `true` when the sampled slope takes both signs strictly inside the domain.
pub fn slope_changes_sign(profile: &[(f64, i8)]) -> bool {
    let n = profile.len();
    if n < 3 {
        return false;
    }
    let inner = &profile[1..n - 1];
    inner.iter().any(|p| p.1 > 0) && inner.iter().any(|p| p.1 < 0)
}

/// Linear wave field over one wavelength at `t = 0`, `eta = a cos(k x + phase)`.
/// Rows follow the mode grid in `y`, columns the `x` samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearField {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<Vec<f64>>>,
}

pub fn linear_field(
    mode: &ModeSolution,
    shear: &ShearProfile,
    dens: Option<&DensityProfile>,
    amplitude: f64,
    phase: f64,
    nx: usize,
) -> Result<LinearField> {
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::InvalidArgument(format!("amplitude must be non-negative, got {amplitude}")));
    }
    if nx < 2 {
        return Err(Error::InvalidArgument("need at least two x samples".into()));
    }
    check_wavenumber(mode.k)?;
    let tf = transfer_from_mode(mode, shear, dens)?;
    let (c, k, a) = (mode.c, mode.k, amplitude);
    let wavelength = 2.0 * std::f64::consts::PI / k;
    let x: Vec<f64> = (0..nx).map(|i| wavelength * i as f64 / nx as f64).collect();
    let (cos, sin): (Vec<f64>, Vec<f64>) = x.iter().map(|&x| (k * x + phase).cos()).zip(x.iter().map(|&x| (k * x + phase).sin())).unzip();
    let row = |amp: f64, basis: &[f64]| basis.iter().map(|b| amp * b).collect::<Vec<f64>>();
    let mut u = Vec::with_capacity(mode.y.len());
    let mut v = Vec::with_capacity(mode.y.len());
    let mut p = Vec::with_capacity(mode.y.len());
    for i in 0..mode.y.len() {
        u.push(row(a * mode.phi_prime[i] / k, &cos));
        v.push(row(a * mode.phi[i], &sin));
        p.push(row(a * tf.t[i], &cos));
    }
    let rho = match (mode.variant, dens) {
        (ModeVariant::Stratified, Some(dens)) => Some(
            mode.y
                .iter()
                .zip(&mode.phi)
                .map(|(&y, &ph)| row(a * dens.dr_at(y) * ph / (c - shear.u_at(y)), &sin))
                .collect(),
        ),
        _ => None,
    };
    Ok(LinearField {
        x,
        y: mode.y.clone(),
        u,
        v,
        p,
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rayleigh::solve_mode;

    #[test]
    fn closed_forms_reduce() {
        let (k, h0, g) = (1.0, 2.0, 9.81);
        let c = (g * f64::tanh(k * h0) / k).sqrt();
        for i in 0..=20 {
            let y = i as f64 * 0.1;
            let a = closed_form_transfer_zero(y, k, h0, g);
            let b = closed_form_transfer_const_vorticity(y, 0.0, c, k, h0);
            assert!((a - b).abs() <= 1e-12 * a, "{y}");
        }
        assert!((closed_form_transfer_zero(0.0, k, h0, g) - 9.81 / 2f64.cosh()).abs() < 1e-14);
        assert!((closed_form_transfer_zero(0.0, k, h0, g) - 2.6077).abs() < 5e-4);
    }

    #[test]
    fn bed_gain_zero_vorticity() {
        let p = ShearProfile::zero(2.0).unwrap();
        let c = (9.81 * 2f64.tanh()).sqrt();
        let tf = transfer_from_mode(&solve_mode(&p, c, 1.0).unwrap(), &p, None).unwrap();
        let gain = bed_gain(&tf).unwrap();
        assert!((gain - 2f64.cosh() / 9.81).abs() < 1e-10);
        assert!((gain - 0.3835).abs() < 1e-4);
        let fast = bed_transfer(&p, None, c, 1.0, 9.81).unwrap();
        assert!((fast - tf.t0).abs() < 1e-10 * fast);
    }

    #[test]
    fn mismatched_profile_is_rejected() {
        let p = ShearProfile::zero(2.0).unwrap();
        let m = solve_mode(&p, 3.0, 1.0).unwrap();
        let other = ShearProfile::piecewise(1.0, 3.0, 1.0, 2.0).unwrap();
        assert!(matches!(transfer_from_mode(&m, &other, None), Err(Error::Consistency(_))));
        let deeper = ShearProfile::zero(3.0).unwrap();
        assert!(matches!(transfer_from_mode(&m, &deeper, None), Err(Error::Consistency(_))));
        let strat = DensityProfile::exponential(0.1, 1.0).unwrap();
        assert!(matches!(transfer_from_mode(&m, &p, Some(&strat)), Err(Error::Consistency(_))));
    }

    #[test]
    fn ill_conditioned_gain() {
        let tf = TransferFunction {
            y: vec![0.0, 1.0],
            t: vec![0.0, 1.0],
            t0: 0.0,
            c: 1.0,
            k: 1.0,
            variant: TransferVariant::Homogeneous,
            jumps: vec![],
        };
        assert!(matches!(bed_gain(&tf), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn sign_change_detection() {
        assert!(slope_changes_sign(&[(0.0, 0), (0.5, 1), (1.0, -1), (1.5, -1)]));
        assert!(!slope_changes_sign(&[(0.0, 0), (0.5, 1), (1.0, 1), (1.5, -1)]));
    }
}
