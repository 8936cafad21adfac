//! Shooting solvers for the Rayleigh equation and its stratified form.
//!
//! Every solve integrates a unit-slope initial value problem from the bed and rescales
//! the result, which is exact by linearity.

use std::cell::Cell;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::ode::{integrate, OdeOptions};
use crate::profiles::{DensityProfile, ShearKind, ShearProfile, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeVariant {
    Homogeneous,
    Stratified,
    TwoFluidLower,
    TwoFluidUpper,
}

/// One-sided values of `phi'` at a node where `U'` jumps. The main arrays hold the
/// value from below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Breakpoint {
    pub y: f64,
    pub index: usize,
    pub phi_prime_below: f64,
    pub phi_prime_above: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSolution {
    pub y: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_prime: Vec<f64>,
    pub c: f64,
    pub k: f64,
    pub variant: ModeVariant,
    /// `phi / (c - U)`, stratified solves only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub varphi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub varphi_prime: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub breakpoints: Vec<Breakpoint>,
}

impl ModeSolution {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("mode solutions contain only numbers and tags")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    pub ode: OdeOptions,
    /// Minimum number of output nodes on the returned grid.
    pub min_points: usize,
    /// Initial slope of the shot. Any nonzero value gives the same scaled mode.
    pub seed: f64,
    /// Relative distance `c` must keep from the critical level.
    pub margin: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default(),
            min_points: 201,
            seed: 1.0,
            margin: 1e-8,
        }
    }
}

impl ShootingOptions {
    pub fn margin_at(&self, c: f64) -> f64 {
        self.margin * (1.0 + c.abs())
    }

    /// The absolute tolerance follows the seed so that the step sequence does not
    /// depend on it.
    fn ode_for_seed(&self) -> OdeOptions {
        OdeOptions {
            atol: self.ode.atol * self.seed.abs(),
            ..self.ode
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.seed.is_finite() && self.seed != 0.0) {
            return Err(Error::InvalidArgument(format!("shooting seed must be finite and nonzero, got {}", self.seed)));
        }
        if self.min_points < 2 {
            return Err(Error::InvalidArgument("at least two output points are required".into()));
        }
        Ok(())
    }
}

/// A background current as seen by the shooting code: values, one-sided slopes,
/// curvature away from kinks, and the kinks themselves.
pub(crate) trait Background {
    fn u(&self, y: f64) -> f64;
    fn du(&self, y: f64, side: Side) -> f64;
    fn d2u(&self, y: f64) -> f64;
    /// `(y, U'(y+) - U'(y-))` for every interior kink.
    fn kinks(&self) -> Vec<(f64, f64)>;
    /// Kinks plus any other heights where the coefficients lose smoothness.
    fn breaks(&self) -> Vec<f64>;
}

impl Background for ShearProfile {
    fn u(&self, y: f64) -> f64 {
        self.u_at(y)
    }
    fn du(&self, y: f64, side: Side) -> f64 {
        self.du_at(y, side)
    }
    fn d2u(&self, y: f64) -> f64 {
        self.d2u_at(y)
    }
    fn kinks(&self) -> Vec<(f64, f64)> {
        ShearProfile::kinks(self)
    }
    fn breaks(&self) -> Vec<f64> {
        ShearProfile::breaks(self)
    }
}

pub(crate) fn check_wavenumber(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidArgument(format!("wavenumber must be positive and finite, got {k}")));
    }
    Ok(())
}

pub(crate) fn check_speed(c: f64, floor: f64, opts: &ShootingOptions) -> Result<()> {
    if !(c.is_finite() && c > floor + opts.margin_at(c)) {
        return Err(Error::CriticalLayer { c, floor });
    }
    Ok(())
}

/// Uniform nodes on `[a, b]` (increasing), with every break in `(a, b)` as a node and
/// at least `min_points` nodes in total.
pub(crate) fn uniform_grid(a: f64, b: f64, breaks: &[f64], min_points: usize) -> Vec<f64> {
    let mut edges = vec![a];
    let eps = 1e-12 * (b - a).abs();
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&y| y > a + eps && y < b - eps).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    edges.extend(inner);
    edges.push(b);
    let total = b - a;
    let intervals = min_points.max(2) - 1;
    let mut grid = vec![a];
    for w in edges.windows(2) {
        let n = (((w[1] - w[0]) / total) * intervals as f64).ceil().max(1.0) as usize;
        for j in 1..n {
            grid.push(w[0] + (w[1] - w[0]) * j as f64 / n as f64);
        }
        grid.push(w[1]);
    }
    grid
}

/// States of a shot at its nodes. At a kink node the stored state is the one reached
/// before crossing; `jumps` holds the derivative after crossing.
pub(crate) struct RawShot {
    pub states: Vec<[f64; 2]>,
    pub jumps: Vec<(usize, f64)>,
}

/// Integrates `phi'' = (U''/(U - c) + k^2) phi` from `start` through `nodes`, which run
/// monotonically away from `start`. Kinks of the background must coincide with nodes;
/// crossing one applies `[phi'] = [U'] phi / (U - c)`.
pub(crate) fn shoot_rayleigh<B: Background>(
    bg: &B,
    c: f64,
    k: f64,
    start: f64,
    state0: [f64; 2],
    nodes: &[f64],
    ode: &OdeOptions,
    margin: f64,
) -> Result<RawShot> {
    let Some(&last) = nodes.last() else {
        return Ok(RawShot {
            states: Vec::new(),
            jumps: Vec::new(),
        });
    };
    let upward = last > start;
    let kinks: Vec<(f64, f64)> = bg
        .kinks()
        .into_iter()
        .filter(|&(y, _)| if upward { y > start && y < last } else { y < start && y > last })
        .collect();
    let rhs = |y: f64, s: &[f64; 2]| {
        let d2 = bg.d2u(y);
        let q = if d2 == 0.0 { k * k } else { d2 / (bg.u(y) - c) + k * k };
        [s[1], q * s[0]]
    };

    let mut states = Vec::with_capacity(nodes.len());
    let mut jumps = Vec::new();
    let mut t = start;
    let mut state = state0;
    let mut begin = 0;
    while begin < nodes.len() {
        // the segment runs up to and including the next kink node
        let end = nodes[begin..]
            .iter()
            .position(|y| kinks.iter().any(|(yk, _)| yk == y))
            .map_or(nodes.len(), |i| begin + i + 1);
        let (seg, _) = integrate(rhs, t, state, &nodes[begin..end], ode)?;
        states.extend_from_slice(&seg);
        t = nodes[end - 1];
        state = *seg.last().expect("segment is non-empty");
        if let Some(&(yk, du_jump)) = kinks.iter().find(|(yk, _)| *yk == t) {
            let u1 = bg.u(yk);
            if (u1 - c).abs() <= margin {
                return Err(Error::SingularJump { c, u1 });
            }
            let jump = du_jump / (u1 - c) * state[0];
            state[1] += if upward { jump } else { -jump };
            jumps.push((end - 1, state[1]));
        }
        begin = end;
    }
    Ok(RawShot { states, jumps })
}

fn degenerate(end: f64, peak: f64) -> bool {
    !(end.abs() > 1e-12 * peak) || !end.is_finite()
}

/// Solves the Rayleigh problem `phi(0) = 0`, `phi(h0) = k (c - U(h0))`. Piecewise-linear
/// profiles are handled through the derivative jump at the breakpoint.
pub fn solve_mode(shear: &ShearProfile, c: f64, k: f64) -> Result<ModeSolution> {
    solve_mode_with(shear, c, k, &ShootingOptions::default())
}

pub fn solve_mode_with(shear: &ShearProfile, c: f64, k: f64, opts: &ShootingOptions) -> Result<ModeSolution> {
    opts.validate()?;
    check_wavenumber(k)?;
    check_speed(c, shear.speed_floor(), opts)?;
    let h0 = shear.h0();
    let breaks = shear.breaks();
    let grid = uniform_grid(0.0, h0, &breaks, opts.min_points);
    let seed = opts.seed;
    let shot = shoot_rayleigh(shear, c, k, 0.0, [0.0, seed], &grid[1..], &opts.ode_for_seed(), opts.margin_at(c))?;

    let mut states = Vec::with_capacity(grid.len());
    states.push([0.0, seed]);
    states.extend(shot.states);
    let target = k * (c - shear.u_at(h0));
    let end = states.last().expect("non-empty")[0];
    let peak = states.iter().map(|s| s[0].abs()).fold(0.0, f64::max);
    if degenerate(end, peak) {
        return Err(Error::DegenerateMode { c, k });
    }
    let scale = target / end;
    let mut phi: Vec<f64> = states.iter().map(|s| s[0] * scale).collect();
    let phi_prime: Vec<f64> = states.iter().map(|s| s[1] * scale).collect();
    *phi.last_mut().expect("non-empty") = target;
    let breakpoints = shot
        .jumps
        .iter()
        .map(|&(i, above)| Breakpoint {
            y: grid[i + 1],
            index: i + 1,
            phi_prime_below: phi_prime[i + 1],
            phi_prime_above: above * scale,
        })
        .collect();
    Ok(ModeSolution {
        y: grid,
        phi,
        phi_prime,
        c,
        k,
        variant: ModeVariant::Homogeneous,
        varphi: None,
        varphi_prime: None,
        breakpoints,
    })
}

/// Like [`solve_mode`], restricted to piecewise-linear currents.
pub fn solve_mode_piecewise(shear: &ShearProfile, c: f64, k: f64) -> Result<ModeSolution> {
    solve_mode_piecewise_with(shear, c, k, &ShootingOptions::default())
}

pub fn solve_mode_piecewise_with(shear: &ShearProfile, c: f64, k: f64, opts: &ShootingOptions) -> Result<ModeSolution> {
    if !matches!(shear.kind(), ShearKind::PiecewiseLinear { .. }) {
        return Err(Error::InvalidArgument("solve_mode_piecewise needs a piecewise-linear profile".into()));
    }
    solve_mode_with(shear, c, k, opts)
}

/// Integrates `(phi, w)` with `w = R (c - U)^2 phi'` where here `phi` is the stratified
/// unknown `phi/(c - U)`. Returns the states at `nodes`.
fn shoot_stratified(
    shear: &ShearProfile,
    dens: &DensityProfile,
    c: f64,
    k: f64,
    seed: f64,
    nodes: &[f64],
    ode: &OdeOptions,
) -> Result<Vec<[f64; 2]>> {
    let h0 = shear.h0();
    dens.check_covers(h0)?;
    for y in [0.0, h0] {
        if !(dens.r_at(y) > 0.0) {
            return Err(Error::VacuumLayer { y });
        }
    }
    let vacuum = Cell::new(None);
    let rhs = |y: f64, s: &[f64; 2]| {
        let r = dens.r_at(y);
        if !(r > 0.0) {
            vacuum.set(Some(y));
            return [f64::NAN, f64::NAN];
        }
        let d = c - shear.u_at(y);
        let d2 = d * d;
        [s[1] / (r * d2), (k * k * d2 * r + dens.dr_at(y)) * s[0]]
    };
    match integrate(rhs, 0.0, [0.0, seed], nodes, ode) {
        Ok((states, _)) => Ok(states),
        Err(e) => Err(match vacuum.get() {
            Some(y) => Error::VacuumLayer { y },
            None => e.into(),
        }),
    }
}

/// Solves the stratified problem for `phi/(c - U)` with value `k` at the surface and
/// fills both the stratified and the ordinary mode shapes.
pub fn solve_mode_stratified(shear: &ShearProfile, dens: &DensityProfile, c: f64, k: f64) -> Result<ModeSolution> {
    solve_mode_stratified_with(shear, dens, c, k, &ShootingOptions::default())
}

pub fn solve_mode_stratified_with(
    shear: &ShearProfile,
    dens: &DensityProfile,
    c: f64,
    k: f64,
    opts: &ShootingOptions,
) -> Result<ModeSolution> {
    opts.validate()?;
    check_wavenumber(k)?;
    check_speed(c, shear.max_u(), opts)?;
    let h0 = shear.h0();
    let breaks = shear.breaks();
    let grid = uniform_grid(0.0, h0, &breaks, opts.min_points);
    let states = shoot_stratified(shear, dens, c, k, opts.seed, &grid, &opts.ode_for_seed())?;

    let end = states.last().expect("non-empty")[0];
    let peak = states.iter().map(|s| s[0].abs()).fold(0.0, f64::max);
    if degenerate(end, peak) {
        return Err(Error::DegenerateMode { c, k });
    }
    let scale = k / end;
    let n = grid.len();
    let mut varphi = Vec::with_capacity(n);
    let mut varphi_prime = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    let mut phi_prime = Vec::with_capacity(n);
    for (&y, s) in grid.iter().zip(&states) {
        let d = c - shear.u_at(y);
        let v = s[0] * scale;
        let vp = s[1] * scale / (dens.r_at(y) * d * d);
        varphi.push(v);
        varphi_prime.push(vp);
        phi.push(d * v);
        phi_prime.push(d * vp - shear.du_at(y, Side::Below) * v);
    }
    varphi[n - 1] = k;
    phi[n - 1] = k * (c - shear.u_at(h0));
    let breakpoints = breaks
        .iter()
        .filter_map(|&yb| grid.iter().position(|&y| y == yb))
        .map(|i| {
            let y = grid[i];
            let d = c - shear.u_at(y);
            Breakpoint {
                y,
                index: i,
                phi_prime_below: phi_prime[i],
                phi_prime_above: d * varphi_prime[i] - shear.du_at(y, Side::Above) * varphi[i],
            }
        })
        .collect();
    Ok(ModeSolution {
        y: grid,
        phi,
        phi_prime,
        c,
        k,
        variant: ModeVariant::Stratified,
        varphi: Some(varphi),
        varphi_prime: Some(varphi_prime),
        breakpoints,
    })
}

/// Surface-condition residual and bed transfer value from a single unscaled shot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceShot {
    /// Normalized residual of the surface condition; zero exactly at a bifurcation point.
    pub residual: f64,
    /// Transfer function at the bed for the scaled mode; infinite when the mode is degenerate.
    pub t0: f64,
}

/// Signed, normalized residual of the surface condition. With a density profile the
/// stratified surface condition is used.
pub fn bifurcation_residual(shear: &ShearProfile, dens: Option<&DensityProfile>, c: f64, k: f64, g: f64) -> Result<f64> {
    Ok(surface_shot(shear, dens, c, k, g, &ShootingOptions::default())?.residual)
}

pub fn surface_shot(
    shear: &ShearProfile,
    dens: Option<&DensityProfile>,
    c: f64,
    k: f64,
    g: f64,
    opts: &ShootingOptions,
) -> Result<SurfaceShot> {
    opts.validate()?;
    check_wavenumber(k)?;
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::InvalidArgument(format!("gravity must be positive, got {g}")));
    }
    let h0 = shear.h0();
    let seed = opts.seed;
    let u0 = shear.u_at(h0);
    let d0 = c - u0;
    match dens {
        None => {
            check_speed(c, shear.speed_floor(), opts)?;
            let mut nodes = shear.breaks();
            nodes.push(h0);
            let shot = shoot_rayleigh(shear, c, k, 0.0, [0.0, seed], &nodes, &opts.ode_for_seed(), opts.margin_at(c))?;
            let [phi, dphi] = *shot.states.last().expect("non-empty");
            let du0 = shear.du_at(h0, Side::Below);
            let grav = g / (d0 * d0);
            let residual = dphi - (grav - du0 / d0) * phi;
            let norm = phi.abs().max(dphi.abs()) * (1.0 + grav);
            let t0 = seed * (c - shear.u_at(0.0)) * d0 / phi;
            Ok(SurfaceShot {
                residual: residual / norm,
                t0,
            })
        }
        Some(dens) => {
            check_speed(c, shear.max_u(), opts)?;
            let mut nodes = shear.breaks();
            nodes.push(h0);
            let states = shoot_stratified(shear, dens, c, k, seed, &nodes, &opts.ode_for_seed())?;
            let [vphi, w] = *states.last().expect("non-empty");
            let dvphi = w / (dens.r_at(h0) * d0 * d0);
            let grav = g / (d0 * d0);
            let residual = dvphi - grav * vphi;
            let norm = vphi.abs().max(dvphi.abs()) * (1.0 + grav);
            Ok(SurfaceShot {
                residual: residual / norm,
                t0: seed / vphi,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_contains_breaks_and_endpoints() {
        let g = uniform_grid(0.0, 2.0, &[0.7], 201);
        assert!(g.len() >= 201);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 2.0);
        assert!(g.contains(&0.7));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_vorticity_mode_is_sinh() {
        let (k, h0) = (1.0_f64, 2.0);
        let c = (9.81 * (k * h0).tanh() / k).sqrt();
        let p = ShearProfile::zero(h0).unwrap();
        let m = solve_mode(&p, c, k).unwrap();
        assert_eq!(m.phi[0], 0.0);
        assert_eq!(*m.phi.last().unwrap(), k * c);
        for (y, phi) in m.y.iter().zip(&m.phi) {
            let exact = k * c * (k * y).sinh() / (k * h0).sinh();
            assert!((phi - exact).abs() <= 1e-10 * k * c, "{y}");
        }
        assert!((m.phi_prime[0] - c / 2f64.sinh()).abs() < 1e-10);
    }

    #[test]
    fn critical_layer_is_rejected() {
        let p = ShearProfile::piecewise(1.0, 3.0, 1.0, 2.0).unwrap();
        assert!(matches!(solve_mode(&p, 1.0, 1.0), Err(Error::CriticalLayer { .. })));
        let t = ShearProfile::tabulated(&[(0.0, 0.0), (0.5, 1.0), (1.0, 1.5), (2.0, 1.0)], 2.0).unwrap();
        assert!(matches!(solve_mode(&t, 1.2, 1.0), Err(Error::CriticalLayer { .. })));
        let z = ShearProfile::zero(2.0).unwrap();
        assert!(matches!(solve_mode(&z, 0.0, 1.0), Err(Error::CriticalLayer { .. })));
        assert!(matches!(solve_mode(&z, 1.0, 0.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn piecewise_requires_piecewise_profile() {
        let z = ShearProfile::zero(2.0).unwrap();
        assert!(matches!(solve_mode_piecewise(&z, 3.0, 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn vacuum_is_reported() {
        let p = ShearProfile::zero(2.0).unwrap();
        let d = DensityProfile::tabulated(&[(0.0, 1.0), (1.0, 0.0), (2.0, 0.0)]).unwrap();
        assert!(matches!(solve_mode_stratified(&p, &d, 3.0, 1.0), Err(Error::VacuumLayer { .. })));
    }

    #[test]
    fn mode_serializes() {
        let m = solve_mode(&ShearProfile::zero(1.0).unwrap(), 3.0, 1.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(v["variant"], "homogeneous");
        assert_eq!(v["phi"].as_array().unwrap().len(), m.y.len());
        assert!(v.get("varphi").is_none());
    }
}
