//! Background shear currents `U(y)` and density stratifications `R(y)`.
//!
//! Heights are measured upward from the bed. A shear profile lives on `[0, h0]`
//! where `h0` is the undisturbed depth. All quantities are SI.

use crate::error::{Error, Result};
use crate::numerics::roots::golden_max;
use crate::numerics::spline::CubicSpline;

pub const DEFAULT_GRAVITY: f64 = 9.81;

/// Relative slack allowed when checking that a height lies in the domain.
const DOMAIN_SLACK: f64 = 1e-12;

/// Which one-sided limit to take at a vorticity jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShearKind {
    Zero,
    /// `U(y) = gamma (y - h0)`, vorticity `-gamma`.
    Linear { gamma: f64 },
    /// Slope `gamma_minus` below `h1` and `gamma_plus` above, continuous, `U(h0)` not
    /// necessarily zero.
    PiecewiseLinear { gamma_minus: f64, gamma_plus: f64, h1: f64 },
    /// Natural cubic spline through samples `(y, U)`.
    Tabulated(CubicSpline),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShearProfile {
    kind: ShearKind,
    h0: f64,
    argmax: (f64, f64),
}

fn check_depth(h0: f64) -> Result<()> {
    if !(h0.is_finite() && h0 > 0.0) {
        return Err(Error::InvalidProfile(format!("depth must be positive and finite, got {h0}")));
    }
    Ok(())
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidProfile(format!("{name} must be finite, got {v}")));
    }
    Ok(())
}

impl ShearProfile {
    pub fn zero(h0: f64) -> Result<Self> {
        check_depth(h0)?;
        Ok(Self {
            kind: ShearKind::Zero,
            h0,
            argmax: (0.0, 0.0),
        })
    }

    pub fn linear(gamma: f64, h0: f64) -> Result<Self> {
        check_depth(h0)?;
        check_finite("gamma", gamma)?;
        // decreasing U peaks at the bed, increasing U at the surface
        let argmax = if gamma < 0.0 { (0.0, -gamma * h0) } else { (h0, 0.0) };
        Ok(Self {
            kind: ShearKind::Linear { gamma },
            h0,
            argmax,
        })
    }

    pub fn piecewise(gamma_minus: f64, gamma_plus: f64, h1: f64, h0: f64) -> Result<Self> {
        check_depth(h0)?;
        check_finite("gamma_minus", gamma_minus)?;
        check_finite("gamma_plus", gamma_plus)?;
        if !(h1 > 0.0 && h1 < h0) {
            return Err(Error::InvalidProfile(format!("breakpoint h1 = {h1} must lie strictly inside (0, {h0})")));
        }
        let mut p = Self {
            kind: ShearKind::PiecewiseLinear {
                gamma_minus,
                gamma_plus,
                h1,
            },
            h0,
            argmax: (0.0, 0.0),
        };
        // piecewise affine: the maximum sits at a vertex
        p.argmax = [0.0, h1, h0]
            .into_iter()
            .map(|y| (y, p.u_at(y)))
            .fold((f64::NAN, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        Ok(p)
    }

    /// Samples must be strictly increasing in `y`, cover `[0, h0]` and number at least four.
    pub fn tabulated(samples: &[(f64, f64)], h0: f64) -> Result<Self> {
        check_depth(h0)?;
        if samples.len() < 4 {
            return Err(Error::InvalidProfile(format!(
                "tabulated shear needs at least 4 samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|(y, u)| !y.is_finite() || !u.is_finite()) {
            return Err(Error::InvalidProfile("tabulated shear contains non-finite values".into()));
        }
        let (ys, us): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
        if ys.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidProfile("tabulated heights must be strictly increasing".into()));
        }
        let slack = DOMAIN_SLACK * h0;
        if ys[0] > slack || *ys.last().expect("non-empty") < h0 - slack {
            return Err(Error::InvalidProfile(format!(
                "tabulated heights [{}, {}] do not cover [0, {h0}]",
                ys[0],
                ys.last().expect("non-empty")
            )));
        }
        let spline = CubicSpline::natural(ys, us).ok_or_else(|| Error::InvalidProfile("spline construction failed".into()))?;
        let mut p = Self {
            kind: ShearKind::Tabulated(spline),
            h0,
            argmax: (0.0, 0.0),
        };
        p.argmax = p.refine_max();
        Ok(p)
    }

    fn refine_max(&self) -> (f64, f64) {
        let ShearKind::Tabulated(spline) = &self.kind else {
            unreachable!("only tabulated profiles need a numerical maximum");
        };
        let mut grid = vec![0.0];
        grid.extend(spline.knots().iter().copied().filter(|&y| y > 0.0 && y < self.h0));
        grid.push(self.h0);
        let sub = 32;
        let mut fine = Vec::with_capacity(grid.len() * sub);
        for w in grid.windows(2) {
            for j in 0..sub {
                fine.push(w[0] + (w[1] - w[0]) * j as f64 / sub as f64);
            }
        }
        fine.push(self.h0);
        let (ibest, _) = fine
            .iter()
            .enumerate()
            .map(|(i, &y)| (i, spline.eval(y)))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        let lo = fine[ibest.saturating_sub(1)];
        let hi = fine[(ibest + 1).min(fine.len() - 1)];
        let (y, u) = golden_max(|y| spline.eval(y), lo, hi, 1e-10 * self.h0);
        // endpoints are candidates too
        [(y, u), (fine[ibest], spline.eval(fine[ibest]))]
            .into_iter()
            .fold((f64::NAN, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
    }

    pub fn kind(&self) -> &ShearKind {
        &self.kind
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    fn check_domain(&self, y: f64) -> Result<f64> {
        let slack = DOMAIN_SLACK * self.h0;
        if !(y >= -slack && y <= self.h0 + slack) {
            return Err(Error::Domain { y, lo: 0.0, hi: self.h0 });
        }
        Ok(y.clamp(0.0, self.h0))
    }

    pub fn eval_u(&self, y: f64) -> Result<f64> {
        let y = self.check_domain(y)?;
        Ok(self.u_at(y))
    }

    /// `(U', U'')`. Errors at the breakpoint of a piecewise profile, where only
    /// one-sided derivatives exist.
    pub fn eval_u_derivs(&self, y: f64) -> Result<(f64, f64)> {
        let y = self.check_domain(y)?;
        if let ShearKind::PiecewiseLinear { h1, .. } = self.kind {
            if y == h1 {
                return Err(Error::AmbiguousSide { y });
            }
        }
        Ok((self.du_at(y, Side::Below), self.d2u_at(y)))
    }

    /// `(U', U'')` with an explicit side at the breakpoint. `U''` never includes the
    /// Dirac mass of a vorticity jump.
    pub fn eval_u_derivs_sided(&self, y: f64, side: Side) -> Result<(f64, f64)> {
        let y = self.check_domain(y)?;
        Ok((self.du_at(y, side), self.d2u_at(y)))
    }

    pub fn max_u(&self) -> f64 {
        self.argmax.1
    }

    /// Location and value of the maximum of `U` over `[0, h0]`.
    pub fn argmax_u(&self) -> (f64, f64) {
        self.argmax
    }

    /// `U'' == 0` away from isolated points, so the Rayleigh coefficient `U''/(U-c)`
    /// vanishes identically.
    pub fn is_affine(&self) -> bool {
        matches!(self.kind, ShearKind::Zero | ShearKind::Linear { .. })
    }

    /// Wave speeds must exceed this value for the single-fluid Rayleigh problem to be
    /// regular. For affine profiles only the surface value matters; otherwise it is
    /// `max U`.
    pub fn speed_floor(&self) -> f64 {
        if self.is_affine() {
            self.u_at(self.h0)
        } else {
            self.max_u()
        }
    }

    /// Interior heights where `U'` jumps, with the jump `U'(y+) - U'(y-)`.
    pub fn kinks(&self) -> Vec<(f64, f64)> {
        match self.kind {
            ShearKind::PiecewiseLinear {
                gamma_minus,
                gamma_plus,
                h1,
            } => vec![(h1, gamma_plus - gamma_minus)],
            _ => Vec::new(),
        }
    }

    /// Interior heights where the profile is not smooth: kinks and spline knots.
    pub fn breaks(&self) -> Vec<f64> {
        let mut breaks: Vec<f64> = self.kinks().iter().map(|(y, _)| *y).collect();
        if let ShearKind::Tabulated(s) = &self.kind {
            // knots within rounding of an end are not interior
            let eps = 1e-12 * self.h0;
            breaks.extend(s.knots().iter().copied().filter(|&y| y > eps && y < self.h0 - eps));
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        breaks
    }

    pub(crate) fn u_at(&self, y: f64) -> f64 {
        match &self.kind {
            ShearKind::Zero => 0.0,
            ShearKind::Linear { gamma } => gamma * (y - self.h0),
            ShearKind::PiecewiseLinear {
                gamma_minus,
                gamma_plus,
                h1,
            } => {
                if y <= *h1 {
                    gamma_minus * (y - self.h0)
                } else {
                    gamma_minus * (h1 - self.h0) + gamma_plus * (y - h1)
                }
            }
            ShearKind::Tabulated(s) => s.eval(y),
        }
    }

    pub(crate) fn du_at(&self, y: f64, side: Side) -> f64 {
        match &self.kind {
            ShearKind::Zero => 0.0,
            ShearKind::Linear { gamma } => *gamma,
            ShearKind::PiecewiseLinear {
                gamma_minus,
                gamma_plus,
                h1,
            } => {
                if y < *h1 || (y == *h1 && side == Side::Below) {
                    *gamma_minus
                } else {
                    *gamma_plus
                }
            }
            ShearKind::Tabulated(s) => s.eval_all(y).1,
        }
    }

    pub(crate) fn d2u_at(&self, y: f64) -> f64 {
        match &self.kind {
            ShearKind::Tabulated(s) => s.eval_all(y).2,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityKind {
    Constant { value: f64 },
    /// `R(y) = scale * exp(-2 beta y)`.
    Exponential { beta: f64, scale: f64 },
    Tabulated(CubicSpline),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    kind: DensityKind,
}

impl DensityProfile {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidProfile(format!("density must be non-negative, got {value}")));
        }
        Ok(Self {
            kind: DensityKind::Constant { value },
        })
    }

    pub fn exponential(beta: f64, scale: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidProfile(format!(
                "exponential stratification needs beta >= 0 (density non-increasing upward), got {beta}"
            )));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidProfile(format!("density scale must be positive, got {scale}")));
        }
        Ok(Self {
            kind: DensityKind::Exponential { beta, scale },
        })
    }

    /// Samples `(y, R)`: strictly increasing heights, non-negative and non-increasing densities.
    pub fn tabulated(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidProfile("tabulated density needs at least 2 samples".into()));
        }
        if samples.iter().any(|(y, r)| !y.is_finite() || !r.is_finite()) {
            return Err(Error::InvalidProfile("tabulated density contains non-finite values".into()));
        }
        if let Some((y, r)) = samples.iter().find(|(_, r)| *r < 0.0) {
            return Err(Error::InvalidProfile(format!("negative density {r} at y = {y}")));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidProfile("tabulated heights must be strictly increasing".into()));
            }
            if w[1].1 > w[0].1 {
                return Err(Error::InvalidProfile(format!(
                    "density increases upward between y = {} and y = {}",
                    w[0].0, w[1].0
                )));
            }
        }
        let (ys, rs): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
        let spline = CubicSpline::natural(ys, rs).ok_or_else(|| Error::InvalidProfile("spline construction failed".into()))?;
        Ok(Self {
            kind: DensityKind::Tabulated(spline),
        })
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, DensityKind::Constant { .. })
    }

    fn check_domain(&self, y: f64) -> Result<f64> {
        let (lo, hi) = match &self.kind {
            DensityKind::Tabulated(s) => s.domain(),
            _ => (0.0, f64::INFINITY),
        };
        let slack = DOMAIN_SLACK * (hi - lo).clamp(1e-300, 1.0);
        if !(y >= lo - slack && y <= hi + slack) {
            return Err(Error::Domain { y, lo, hi });
        }
        Ok(y.clamp(lo, hi))
    }

    /// Checks that the profile is defined on all of `[0, h0]`.
    pub fn check_covers(&self, h0: f64) -> Result<()> {
        self.check_domain(0.0)?;
        self.check_domain(h0)?;
        Ok(())
    }

    pub fn eval_r(&self, y: f64) -> Result<f64> {
        let y = self.check_domain(y)?;
        Ok(self.r_at(y))
    }

    pub fn eval_r_deriv(&self, y: f64) -> Result<f64> {
        let y = self.check_domain(y)?;
        Ok(self.dr_at(y))
    }

    pub(crate) fn r_at(&self, y: f64) -> f64 {
        match &self.kind {
            DensityKind::Constant { value } => *value,
            DensityKind::Exponential { beta, scale } => scale * (-2.0 * beta * y).exp(),
            DensityKind::Tabulated(s) => s.eval(y),
        }
    }

    pub(crate) fn dr_at(&self, y: f64) -> f64 {
        match &self.kind {
            DensityKind::Constant { .. } => 0.0,
            DensityKind::Exponential { beta, scale } => -2.0 * beta * scale * (-2.0 * beta * y).exp(),
            DensityKind::Tabulated(s) => s.eval_all(y).1,
        }
    }
}
