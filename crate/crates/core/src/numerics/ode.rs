//! Dormand–Prince 5(4) integrator with exact landing on requested output nodes.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

impl OdeOptions {
    /// Same options with both tolerances multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rtol: self.rtol * factor,
            atol: self.atol * factor,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("maximum number of steps ({0}) exceeded")]
    TooManySteps(usize),
    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

fn err_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], opts: &OdeOptions) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / sc;
        acc += r * r;
    }
    (acc / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(f: &mut F, t0: f64, y0: &[f64; N], f0: &[f64; N], span: f64, opts: &OdeOptions) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let zero = [0.0; N];
    let d0 = err_norm(y0, &zero, y0, opts);
    let d1 = err_norm(f0, &zero, y0, opts);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let dir = 1.0;
    let y1 = axpy(y0, &[(dir * h0, f0)]);
    let f1 = f(t0 + h0, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = err_norm(&diff, &zero, y0, opts) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates `y' = f(t, y)` from `t0` through every entry of `nodes` (which must be
/// strictly monotone in the direction of integration, beyond `t0`) and returns the
/// state at each node. Steps are clipped so that each node is hit exactly.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    nodes: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<[f64; N]>, OdeStats), OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut out = Vec::with_capacity(nodes.len());
    let mut stats = OdeStats::default();
    let Some(&t_last) = nodes.last() else {
        return Ok((out, stats));
    };
    let dir = if t_last >= t0 { 1.0 } else { -1.0 };
    let span = (t_last - t0).abs();
    if span == 0.0 {
        out.extend(nodes.iter().map(|_| y0));
        return Ok((out, stats));
    }

    // integrate in s = dir * t so that the step is always positive
    let mut g = |s: f64, y: &[f64; N]| -> [f64; N] {
        let d = f(dir * s, y);
        let mut r = [0.0; N];
        for i in 0..N {
            r[i] = dir * d[i];
        }
        r
    };

    let mut s = dir * t0;
    let mut y = y0;
    let mut k1 = g(s, &y);
    let mut h = initial_step(&mut g, s, &y, &k1, span, opts);
    let steps_total = |st: &OdeStats| st.accepted + st.rejected;

    for &node in nodes {
        let target = dir * node;
        while target - s > 0.0 {
            if steps_total(&stats) >= opts.max_steps {
                return Err(OdeError::TooManySteps(opts.max_steps));
            }
            let remaining = target - s;
            let last = remaining <= h * (1.0 + 1e-12);
            let h_try = if last { remaining } else { h };
            if h_try <= 1e-14 * s.abs().max(span) {
                return Err(OdeError::StepUnderflow { t: dir * s });
            }

            let k2 = g(s + C2 * h_try, &axpy(&y, &[(h_try * A21, &k1)]));
            let k3 = g(s + C3 * h_try, &axpy(&y, &[(h_try * A31, &k1), (h_try * A32, &k2)]));
            let k4 = g(
                s + C4 * h_try,
                &axpy(&y, &[(h_try * A41, &k1), (h_try * A42, &k2), (h_try * A43, &k3)]),
            );
            let k5 = g(
                s + C5 * h_try,
                &axpy(
                    &y,
                    &[(h_try * A51, &k1), (h_try * A52, &k2), (h_try * A53, &k3), (h_try * A54, &k4)],
                ),
            );
            let k6 = g(
                s + h_try,
                &axpy(
                    &y,
                    &[
                        (h_try * A61, &k1),
                        (h_try * A62, &k2),
                        (h_try * A63, &k3),
                        (h_try * A64, &k4),
                        (h_try * A65, &k5),
                    ],
                ),
            );
            let y_new = axpy(
                &y,
                &[
                    (h_try * A71, &k1),
                    (h_try * A73, &k3),
                    (h_try * A74, &k4),
                    (h_try * A75, &k5),
                    (h_try * A76, &k6),
                ],
            );
            let s_new = if last { target } else { s + h_try };
            let k7 = g(s_new, &y_new);

            let mut err = [0.0; N];
            for i in 0..N {
                err[i] = h_try * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            if y_new.iter().any(|v| !v.is_finite()) || err.iter().any(|v| !v.is_finite()) {
                return Err(OdeError::NonFinite { t: dir * s });
            }
            let e = err_norm(&err, &y, &y_new, opts);
            if e <= 1.0 {
                stats.accepted += 1;
                s = s_new;
                y = y_new;
                k1 = k7;
                let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                let proposal = h_try * fac;
                // a clipped step says little about the natural step size
                h = if last { h.max(proposal) } else { proposal };
            } else {
                stats.rejected += 1;
                h = h_try * (0.9 * e.powf(-0.2)).max(0.2);
            }
        }
        out.push(y);
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let nodes: Vec<f64> = (1..=10).map(|i| i as f64 * 0.2).collect();
        let (ys, _) = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], &nodes, &OdeOptions::default()).unwrap();
        for (t, y) in nodes.iter().zip(&ys) {
            assert!((y[0] - t.exp()).abs() <= 1e-9 * t.exp(), "{t}: {}", y[0]);
        }
    }

    #[test]
    fn harmonic_oscillator_backward() {
        // y'' = -y integrated from t = 3 down to 0
        let (ys, _) = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            3.0,
            [3f64.sin(), 3f64.cos()],
            &[1.5, 0.0],
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((ys[0][0] - 1.5f64.sin()).abs() < 1e-9);
        assert!(ys[1][0].abs() < 1e-9);
        assert!((ys[1][1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn nodes_hit_exactly_and_max_steps() {
        let opts = OdeOptions {
            max_steps: 3,
            ..OdeOptions::default()
        };
        let r = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], &[50.0], &opts);
        assert_eq!(r.unwrap_err(), OdeError::TooManySteps(3));
    }

    #[test]
    fn nonfinite_is_reported() {
        let r = integrate(|t, _y: &[f64; 1]| [1.0 / (t - 0.5)], 0.0, [0.0], &[1.0], &OdeOptions::default());
        assert!(r.is_err());
    }
}
