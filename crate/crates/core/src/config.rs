//! JSON description of a flow environment.
//!
//! ```json
//! {"shear": {"kind": "linear", "gamma": -5.0}, "h0": 2.0, "g": 9.81}
//! ```
//!
//! Two-fluid environments add `upper`, `rho_minus`, `rho_plus`, `H` (a number or
//! `"inf"`) and `sigma`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{DensityProfile, ShearProfile, DEFAULT_GRAVITY};
use crate::twofluid::{LidHeight, TwoFluidEnv};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShearSpec {
    Zero,
    Linear { gamma: f64 },
    Piecewise { gamma_minus: f64, gamma_plus: f64, h1: f64 },
    Table { samples: Vec<[f64; 2]> },
}

impl ShearSpec {
    pub fn build(&self, h0: f64) -> Result<ShearProfile> {
        match self {
            ShearSpec::Zero => ShearProfile::zero(h0),
            ShearSpec::Linear { gamma } => ShearProfile::linear(*gamma, h0),
            ShearSpec::Piecewise {
                gamma_minus,
                gamma_plus,
                h1,
            } => ShearProfile::piecewise(*gamma_minus, *gamma_plus, *h1, h0),
            ShearSpec::Table { samples } => ShearProfile::tabulated(&pairs(samples), h0),
        }
    }
}

fn pairs(samples: &[[f64; 2]]) -> Vec<(f64, f64)> {
    samples.iter().map(|s| (s[0], s[1])).collect()
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensitySpec {
    Constant {
        value: f64,
    },
    Exponential {
        beta: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Table {
        samples: Vec<[f64; 2]>,
    },
}

impl DensitySpec {
    pub fn build(&self) -> Result<DensityProfile> {
        match self {
            DensitySpec::Constant { value } => DensityProfile::constant(*value),
            DensitySpec::Exponential { beta, scale } => DensityProfile::exponential(*beta, *scale),
            DensitySpec::Table { samples } => DensityProfile::tabulated(&pairs(samples)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperSpec {
    #[serde(flatten)]
    pub shear: ShearSpec,
    /// Depth of the profile above the interface. Defaults to `H - h0`, or `h0` for an
    /// unbounded upper layer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LidSpec {
    Height(f64),
    Keyword(String),
}

impl LidSpec {
    pub fn build(&self) -> Result<LidHeight> {
        match self {
            LidSpec::Height(h) => Ok(LidHeight::Finite(*h)),
            LidSpec::Keyword(s) if s == "inf" => Ok(LidHeight::Infinite),
            LidSpec::Keyword(s) => Err(Error::Format(format!("H must be a number or \"inf\", got {s:?}"))),
        }
    }
}

fn default_g() -> f64 {
    DEFAULT_GRAVITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub shear: ShearSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
    pub h0: f64,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<UpperSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_plus: Option<f64>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub lid: Option<LidSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

/// A single-fluid environment ready for computation.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub shear: ShearProfile,
    pub density: Option<DensityProfile>,
    pub g: f64,
}

impl EnvironmentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("environment JSON: {e}")))
    }

    /// Compact JSON with a fixed field order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("environment specs serialize")
    }

    fn check_g(&self) -> Result<()> {
        if !(self.g.is_finite() && self.g > 0.0) {
            return Err(Error::InvalidArgument(format!("g must be positive, got {}", self.g)));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Environment> {
        self.check_g()?;
        let shear = self.shear.build(self.h0)?;
        let density = self.density.as_ref().map(DensitySpec::build).transpose()?;
        if let Some(d) = &density {
            d.check_covers(self.h0)?;
        }
        Ok(Environment {
            shear,
            density,
            g: self.g,
        })
    }

    pub fn is_two_fluid(&self) -> bool {
        self.upper.is_some() || self.rho_minus.is_some() || self.rho_plus.is_some() || self.lid.is_some()
    }

    pub fn build_two_fluid(&self) -> Result<TwoFluidEnv> {
        self.check_g()?;
        let missing = |name: &str| Error::Format(format!("two-fluid environment needs \"{name}\""));
        let lower = self.shear.build(self.h0)?;
        let lid = self.lid.as_ref().ok_or_else(|| missing("H"))?.build()?;
        let upper = self.upper.as_ref().ok_or_else(|| missing("upper"))?;
        let depth = match (lid, upper.depth) {
            (_, Some(d)) => d,
            (LidHeight::Finite(big_h), None) => big_h - self.h0,
            (LidHeight::Infinite, None) => self.h0,
        };
        TwoFluidEnv::new(
            lower,
            upper.shear.build(depth)?,
            self.rho_minus.ok_or_else(|| missing("rho_minus"))?,
            self.rho_plus.ok_or_else(|| missing("rho_plus"))?,
            lid,
            self.sigma.unwrap_or(0.0),
            self.g,
        )
    }
}
