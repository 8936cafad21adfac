//! Two constant-density layers under a rigid lid, with surface tension at the interface.
//!
//! The upper current is given in its own coordinate `s = y - h0`, so a profile of depth
//! `d` covers `h0 <= y <= h0 + d`. With an infinitely high lid the upper current is
//! continued as the constant `U(d)` above that height.

use crate::error::{Error, Result};
use crate::numerics::ode::OdeOptions;
use crate::profiles::{ShearProfile, Side};
use crate::rayleigh::{
    check_speed, check_wavenumber, shoot_rayleigh, uniform_grid, Background, Breakpoint, ModeSolution, ModeVariant,
    ShootingOptions,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LidHeight {
    Finite(f64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoFluidEnv {
    lower: ShearProfile,
    upper: ShearProfile,
    rho_minus: f64,
    rho_plus: f64,
    lid: LidHeight,
    sigma: f64,
    g: f64,
}

impl TwoFluidEnv {
    /// `lower` spans `[0, h0]`. For a finite lid `H`, `upper` must have depth `H - h0`.
    pub fn new(
        lower: ShearProfile,
        upper: ShearProfile,
        rho_minus: f64,
        rho_plus: f64,
        lid: LidHeight,
        sigma: f64,
        g: f64,
    ) -> Result<Self> {
        let h0 = lower.h0();
        if !(rho_minus.is_finite() && rho_minus > 0.0) {
            return Err(Error::InvalidArgument(format!("rho_minus must be positive, got {rho_minus}")));
        }
        if !(rho_plus.is_finite() && rho_plus >= 0.0) {
            return Err(Error::InvalidArgument(format!("rho_plus must be non-negative, got {rho_plus}")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!("surface tension must be non-negative, got {sigma}")));
        }
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::InvalidArgument(format!("gravity must be positive, got {g}")));
        }
        if let LidHeight::Finite(big_h) = lid {
            if !(big_h.is_finite() && big_h > h0) {
                return Err(Error::InvalidArgument(format!("lid height {big_h} must exceed h0 = {h0}")));
            }
            let depth = big_h - h0;
            if (upper.h0() - depth).abs() > 1e-12 * big_h {
                return Err(Error::InvalidArgument(format!(
                    "upper profile depth {} does not match H - h0 = {depth}",
                    upper.h0()
                )));
            }
        }
        Ok(Self {
            lower,
            upper,
            rho_minus,
            rho_plus,
            lid,
            sigma,
            g,
        })
    }

    pub fn lower(&self) -> &ShearProfile {
        &self.lower
    }
    pub fn upper(&self) -> &ShearProfile {
        &self.upper
    }
    pub fn rho_minus(&self) -> f64 {
        self.rho_minus
    }
    pub fn rho_plus(&self) -> f64 {
        self.rho_plus
    }
    pub fn lid(&self) -> LidHeight {
        self.lid
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn h0(&self) -> f64 {
        self.lower.h0()
    }

    /// Heavier fluid on top. Modes can still be computed.
    pub fn is_unstable(&self) -> bool {
        self.rho_plus > self.rho_minus
    }

    /// Largest current over both layers.
    pub fn max_u(&self) -> f64 {
        self.lower.max_u().max(self.upper.max_u())
    }

    /// Wave speeds must exceed this for the interface problem. An empty upper layer
    /// does not constrain `c`.
    pub(crate) fn speed_floor(&self) -> f64 {
        if self.rho_plus == 0.0 {
            self.lower.max_u()
        } else {
            self.max_u()
        }
    }

    pub(crate) fn upper_layer(&self) -> UpperLayer<'_> {
        UpperLayer {
            profile: &self.upper,
            h0: self.h0(),
            infinite: self.lid == LidHeight::Infinite,
        }
    }

    /// Top of the computational domain for the upper layer.
    pub fn upper_top(&self, k: f64) -> f64 {
        let h0 = self.h0();
        match self.lid {
            LidHeight::Finite(big_h) => big_h,
            LidHeight::Infinite => (h0 + (10.0 / k).max(5.0 * h0)).max(h0 + self.upper.h0()),
        }
    }
}

/// The upper current in absolute heights.
pub(crate) struct UpperLayer<'a> {
    profile: &'a ShearProfile,
    h0: f64,
    infinite: bool,
}

impl UpperLayer<'_> {
    fn local(&self, y: f64) -> f64 {
        (y - self.h0).clamp(0.0, self.profile.h0())
    }
    fn beyond(&self, y: f64, side: Side) -> bool {
        let s = y - self.h0;
        let d = self.profile.h0();
        self.infinite && (s > d || (s == d && side == Side::Above))
    }
}

impl Background for UpperLayer<'_> {
    fn u(&self, y: f64) -> f64 {
        self.profile.u_at(self.local(y))
    }
    fn du(&self, y: f64, side: Side) -> f64 {
        if self.beyond(y, side) {
            0.0
        } else {
            self.profile.du_at(self.local(y), side)
        }
    }
    fn d2u(&self, y: f64) -> f64 {
        if self.beyond(y, Side::Below) {
            0.0
        } else {
            self.profile.d2u_at(self.local(y))
        }
    }
    fn kinks(&self) -> Vec<(f64, f64)> {
        let mut kinks: Vec<(f64, f64)> = self.profile.kinks().into_iter().map(|(s, j)| (s + self.h0, j)).collect();
        let d = self.profile.h0();
        let slope = self.profile.du_at(d, Side::Below);
        if self.infinite && slope != 0.0 {
            kinks.push((self.h0 + d, -slope));
        }
        kinks
    }
    fn breaks(&self) -> Vec<f64> {
        let mut breaks: Vec<f64> = self.profile.breaks().iter().map(|s| s + self.h0).collect();
        if self.infinite {
            breaks.push(self.h0 + self.profile.h0());
        }
        breaks
    }
}

/// Raw unit-slope shots of both layers, evaluated at the interface: `(phi, phi')`.
pub(crate) struct InterfaceShots {
    pub lower: [f64; 2],
    pub upper: Option<[f64; 2]>,
}

pub(crate) fn interface_shots(env: &TwoFluidEnv, c: f64, k: f64, opts: &ShootingOptions, with_upper: bool) -> Result<InterfaceShots> {
    let h0 = env.h0();
    let seed = opts.seed;
    let ode = OdeOptions {
        atol: opts.ode.atol * seed.abs(),
        ..opts.ode
    };
    let margin = opts.margin_at(c);
    let mut nodes = env.lower.breaks();
    nodes.push(h0);
    let lower = *shoot_rayleigh(&env.lower, c, k, 0.0, [0.0, seed], &nodes, &ode, margin)?
        .states
        .last()
        .expect("non-empty");
    let upper = if with_upper {
        let layer = env.upper_layer();
        let top = env.upper_top(k);
        let mut nodes: Vec<f64> = layer.breaks().into_iter().filter(|&y| y < top).collect();
        nodes.sort_by(|a, b| b.total_cmp(a));
        nodes.push(h0);
        let state0 = upper_start(env, k, seed);
        Some(*shoot_rayleigh(&layer, c, k, top, state0, &nodes, &ode, margin)?.states.last().expect("non-empty"))
    } else {
        None
    };
    Ok(InterfaceShots { lower, upper })
}

fn upper_start(env: &TwoFluidEnv, k: f64, seed: f64) -> [f64; 2] {
    match env.lid {
        LidHeight::Finite(_) => [0.0, -seed],
        // decaying solution of phi'' = k^2 phi
        LidHeight::Infinite => [seed, -k * seed],
    }
}

/// Modes of both layers at speed `c`, each scaled to `phi(h0) = k`. The lower mode runs
/// over `[0, h0]`, the upper one over `[h0, H]` (or a truncated height for an unbounded
/// upper layer), both on increasing grids.
pub fn solve_two_layer_modes(env: &TwoFluidEnv, c: f64, k: f64) -> Result<(ModeSolution, ModeSolution)> {
    solve_two_layer_modes_with(env, c, k, &ShootingOptions::default())
}

pub fn solve_two_layer_modes_with(
    env: &TwoFluidEnv,
    c: f64,
    k: f64,
    opts: &ShootingOptions,
) -> Result<(ModeSolution, ModeSolution)> {
    check_wavenumber(k)?;
    check_speed(c, env.max_u(), opts)?;
    let h0 = env.h0();
    let seed = opts.seed;
    let ode = OdeOptions {
        atol: opts.ode.atol * seed.abs(),
        ..opts.ode
    };
    let margin = opts.margin_at(c);

    // lower layer, upward from the bed
    let breaks = env.lower.breaks();
    let grid = uniform_grid(0.0, h0, &breaks, opts.min_points);
    let shot = shoot_rayleigh(&env.lower, c, k, 0.0, [0.0, seed], &grid[1..], &ode, margin)?;
    let mut states = vec![[0.0, seed]];
    states.extend(shot.states);
    let breakpoints: Vec<(usize, f64, f64)> = shot.jumps.iter().map(|&(i, above)| (i + 1, states[i + 1][1], above)).collect();
    let lower = scaled_mode(grid, states, breakpoints, c, k, ModeVariant::TwoFluidLower)?;

    // upper layer, downward from the lid
    let layer = env.upper_layer();
    let top = env.upper_top(k);
    let breaks = layer.breaks();
    let grid = uniform_grid(h0, top, &breaks, opts.min_points);
    let down: Vec<f64> = grid.iter().rev().skip(1).copied().collect();
    let state0 = upper_start(env, k, seed);
    let shot = shoot_rayleigh(&layer, c, k, top, state0, &down, &ode, margin)?;
    let n = grid.len();
    let mut states = Vec::with_capacity(n);
    states.push(state0);
    states.extend(shot.states);
    // the stored value at a kink is the one from above; switch to the convention of
    // holding the value from below
    let mut breakpoints = Vec::new();
    for &(i, below) in &shot.jumps {
        let j = i + 1;
        breakpoints.push((n - 1 - j, below, states[j][1]));
        states[j][1] = below;
    }
    states.reverse();
    breakpoints.sort_by_key(|b| b.0);
    let upper = scaled_mode(grid, states, breakpoints, c, k, ModeVariant::TwoFluidUpper)?;
    Ok((lower, upper))
}

fn scaled_mode(
    y: Vec<f64>,
    states: Vec<[f64; 2]>,
    breakpoints: Vec<(usize, f64, f64)>,
    c: f64,
    k: f64,
    variant: ModeVariant,
) -> Result<ModeSolution> {
    let at_interface = match variant {
        ModeVariant::TwoFluidUpper => 0,
        _ => y.len() - 1,
    };
    let value = states[at_interface][0];
    let peak = states.iter().map(|s| s[0].abs()).fold(0.0, f64::max);
    if !(value.abs() > 1e-12 * peak) || !value.is_finite() {
        return Err(Error::DegenerateMode { c, k });
    }
    let scale = k / value;
    let mut phi: Vec<f64> = states.iter().map(|s| s[0] * scale).collect();
    let phi_prime = states.iter().map(|s| s[1] * scale).collect();
    phi[at_interface] = k;
    let breakpoints = breakpoints
        .into_iter()
        .map(|(index, below, above)| Breakpoint {
            y: y[index],
            index,
            phi_prime_below: below * scale,
            phi_prime_above: above * scale,
        })
        .collect();
    Ok(ModeSolution {
        y,
        phi,
        phi_prime,
        c,
        k,
        variant,
        varphi: None,
        varphi_prime: None,
        breakpoints,
    })
}

/// Interface elevation from the per-density dynamic pressures at the bed and at the lid,
/// in the long-wave (hydrostatic) regime. With an unbounded upper layer the lid pressure
/// is zero and `p_lid_plus` is ignored.
pub fn interface_hydrostatic(p_bed_minus: f64, p_lid_plus: f64, env: &TwoFluidEnv) -> Result<f64> {
    if env.rho_plus >= env.rho_minus {
        return Err(Error::DegenerateCoefficient(format!(
            "rho_plus = {} must be smaller than rho_minus = {}",
            env.rho_plus, env.rho_minus
        )));
    }
    let ratio = env.rho_plus / env.rho_minus;
    let p_plus = match env.lid {
        LidHeight::Finite(_) => p_lid_plus,
        LidHeight::Infinite => 0.0,
    };
    Ok((p_bed_minus - ratio * p_plus) / ((1.0 - ratio) * env.g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn still(h0: f64, big_h: f64, rho_plus: f64) -> TwoFluidEnv {
        TwoFluidEnv::new(
            ShearProfile::zero(h0).unwrap(),
            ShearProfile::zero(big_h - h0).unwrap(),
            1000.0,
            rho_plus,
            LidHeight::Finite(big_h),
            0.0,
            9.81,
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        let z = |d| ShearProfile::zero(d).unwrap();
        assert!(TwoFluidEnv::new(z(1.0), z(1.0), 0.0, 0.0, LidHeight::Finite(2.0), 0.0, 9.81).is_err());
        assert!(TwoFluidEnv::new(z(1.0), z(1.0), 1.0, -1.0, LidHeight::Finite(2.0), 0.0, 9.81).is_err());
        assert!(TwoFluidEnv::new(z(1.0), z(1.0), 1.0, 0.0, LidHeight::Finite(2.0), -1.0, 9.81).is_err());
        assert!(TwoFluidEnv::new(z(1.0), z(2.0), 1.0, 0.0, LidHeight::Finite(2.0), 0.0, 9.81).is_err());
        assert!(TwoFluidEnv::new(z(1.0), z(1.0), 1.0, 0.0, LidHeight::Finite(0.5), 0.0, 9.81).is_err());
        assert!(TwoFluidEnv::new(z(1.0), z(7.0), 1.0, 0.0, LidHeight::Infinite, 0.0, 9.81).is_ok());
        assert!(TwoFluidEnv::new(z(1.0), z(1.0), 1.0, 2.0, LidHeight::Finite(2.0), 0.0, 9.81).unwrap().is_unstable());
    }

    #[test]
    fn interface_hydrostatic_examples() {
        let env = still(1.0, 2.0, 0.0);
        assert_eq!(interface_hydrostatic(9.81, 5.0, &env).unwrap(), 1.0);
        assert_eq!(interface_hydrostatic(0.0, 0.0, &env).unwrap(), 0.0);
        let half = still(1.0, 2.0, 500.0);
        assert!((interface_hydrostatic(9.81, 0.0, &half).unwrap() - 2.0).abs() < 1e-15);
        let heavy = still(1.0, 2.0, 1000.0);
        assert!(matches!(interface_hydrostatic(1.0, 0.0, &heavy), Err(Error::DegenerateCoefficient(_))));
    }

    #[test]
    fn modes_are_normalized_at_the_interface() {
        let env = still(1.0, 3.0, 1.2);
        let (lo, up) = solve_two_layer_modes(&env, 2.0, 1.5).unwrap();
        assert_eq!(*lo.phi.last().unwrap(), 1.5);
        assert_eq!(up.phi[0], 1.5);
        assert_eq!(lo.phi[0], 0.0);
        assert!(up.phi.last().unwrap().abs() < 1e-12);
        assert_eq!(*up.y.last().unwrap(), 3.0);
    }
}
