//! Bracketed root finding (Brent's method, in the formulation used by `brentq`).

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BrentError<E> {
    NotBracketed { fa: f64, fb: f64 },
    NoConvergence { x: f64, iterations: usize },
    Eval(E),
}

/// Finds a root of `f` in `[a, b]`. Stops when the bracket half-width drops below
/// `(xtol + rtol * |x|) / 2` or after `max_iter` evaluations.
pub fn brent<F, E>(mut f: F, a: f64, b: f64, xtol: f64, rtol: f64, max_iter: usize) -> Result<Root, BrentError<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut xpre = a;
    let mut xcur = b;
    let mut fpre = f(xpre).map_err(BrentError::Eval)?;
    let mut fcur = f(xcur).map_err(BrentError::Eval)?;
    if fpre == 0.0 {
        return Ok(Root { x: xpre, iterations: 0 });
    }
    if fcur == 0.0 {
        return Ok(Root { x: xcur, iterations: 0 });
    }
    if fpre.signum() == fcur.signum() {
        return Err(BrentError::NotBracketed { fa: fpre, fb: fcur });
    }
    let (mut xblk, mut fblk) = (0.0, 0.0);
    let (mut spre, mut scur) = (0.0, 0.0);

    for i in 0..max_iter {
        if fpre != 0.0 && fcur != 0.0 && fpre.signum() != fcur.signum() {
            xblk = xpre;
            fblk = fpre;
            spre = xcur - xpre;
            scur = spre;
        }
        if fblk.abs() < fcur.abs() {
            xpre = xcur;
            xcur = xblk;
            xblk = xpre;
            fpre = fcur;
            fcur = fblk;
            fblk = fpre;
        }
        let delta = (xtol + rtol * xcur.abs()) / 2.0;
        let sbis = (xblk - xcur) / 2.0;
        if fcur == 0.0 || sbis.abs() < delta {
            return Ok(Root { x: xcur, iterations: i });
        }
        if spre.abs() > delta && fcur.abs() < fpre.abs() {
            let stry = if xpre == xblk {
                // secant
                -fcur * (xcur - xpre) / (fcur - fpre)
            } else {
                // inverse quadratic interpolation
                let dpre = (fpre - fcur) / (xpre - xcur);
                let dblk = (fblk - fcur) / (xblk - xcur);
                -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            };
            if 2.0 * stry.abs() < spre.abs().min(3.0 * sbis.abs() - delta) {
                spre = scur;
                scur = stry;
            } else {
                spre = sbis;
                scur = sbis;
            }
        } else {
            spre = sbis;
            scur = sbis;
        }
        xpre = xcur;
        fpre = fcur;
        if scur.abs() > delta {
            xcur += scur;
        } else {
            xcur += if sbis > 0.0 { delta } else { -delta };
        }
        fcur = f(xcur).map_err(BrentError::Eval)?;
    }
    Err(BrentError::NoConvergence { x: xcur, iterations: max_iter })
}

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
