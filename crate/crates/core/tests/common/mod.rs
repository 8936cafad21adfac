#![allow(dead_code)]

use shearwave::profiles::ShearProfile;

pub const G: f64 = 9.81;

/// Five wavenumbers log-spaced over [0.2, 5].
pub fn k_grid() -> Vec<f64> {
    (0..5).map(|i| 0.2 * 25f64.powf(i as f64 / 4.0)).collect()
}

/// Five depths evenly spaced over [0.5, 4].
pub fn h0_grid() -> Vec<f64> {
    (0..5).map(|i| 0.5 + 3.5 * i as f64 / 4.0).collect()
}

pub const GAMMAS: [f64; 5] = [-5.0, -1.0, 0.0, 1.0, 5.0];

pub fn linear_or_zero(gamma: f64, h0: f64) -> ShearProfile {
    if gamma == 0.0 {
        ShearProfile::zero(h0).unwrap()
    } else {
        ShearProfile::linear(gamma, h0).unwrap()
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Sup-norm error of `a` against `b`, relative to the largest `|b|`.
pub fn sup_rel(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// Plain bisection, for oracles that must not share code with the library.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) < 0.0, "oracle bracket [{lo}, {hi}] does not change sign");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Coefficients of the two-piece sinh/cosh solution over a current whose vorticity
/// jumps from `gm` to `gp` at `h1`, normalized so `phi(h0) = k (c - U(h0))`.
/// Obtained by solving the matching conditions at `h1` directly.
pub struct PiecewiseOracle {
    pub a_minus: f64,
    pub a_plus: f64,
    pub b: f64,
}

pub fn piecewise_u(gm: f64, gp: f64, h1: f64, h0: f64, y: f64) -> f64 {
    if y <= h1 {
        gm * (y - h0)
    } else {
        gm * (h1 - h0) + gp * (y - h1)
    }
}

pub fn piecewise_oracle(gm: f64, gp: f64, h1: f64, h0: f64, c: f64, k: f64) -> PiecewiseOracle {
    let u1 = gm * (h1 - h0);
    let b = k * (c - piecewise_u(gm, gp, h1, h0, h0));
    // (U - c)(phi'' - k^2 phi) = U'' phi puts a jump of (gp - gm) phi / (U1 - c) in phi'.
    let jump = (gp - gm) / (u1 - c);
    let d = h1 - h0;
    // A- sinh(k h1) - A+ sinh(k d) = B cosh(k d)
    // A- (k cosh(k h1) + J sinh(k h1)) - A+ k cosh(k d) = B k sinh(k d)
    let (m11, m12, r1) = ((k * h1).sinh(), -(k * d).sinh(), b * (k * d).cosh());
    let (m21, m22, r2) = (k * (k * h1).cosh() + jump * (k * h1).sinh(), -k * (k * d).cosh(), b * k * (k * d).sinh());
    let det = m11 * m22 - m12 * m21;
    PiecewiseOracle {
        a_minus: (r1 * m22 - m12 * r2) / det,
        a_plus: (m11 * r2 - r1 * m21) / det,
        b,
    }
}
