//! Environment flags and `--env` files.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use shearwave::config::{DensitySpec, EnvironmentSpec, LidSpec, ShearSpec, UpperSpec};
use shearwave::io::read_columns;
use shearwave::profiles::DEFAULT_GRAVITY;

use crate::UsageError;

/// Directory searched for relative `--env` paths that do not exist as given.
pub const CONFIG_DIR_VAR: &str = "SHEARWAVE_CONFIG_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShearArg {
    Zero,
    Linear,
    Piecewise,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UpperShearArg {
    Zero,
    Linear,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityArg {
    Constant,
    Exponential,
    Table,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EnvArgs {
    /// JSON environment file; cannot be combined with the profile flags below
    #[arg(long, value_name = "PATH")]
    pub env: Option<PathBuf>,

    /// Background current
    #[arg(long, value_enum)]
    pub shear: Option<ShearArg>,
    /// Vorticity-like slope of a linear current, U = gamma (y - h0)
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Slope below the breakpoint of a piecewise current
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_minus: Option<f64>,
    /// Slope above the breakpoint of a piecewise current
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_plus: Option<f64>,
    /// Breakpoint height of a piecewise current
    #[arg(long)]
    pub h1: Option<f64>,
    /// CSV with columns `y,U` for a tabulated current
    #[arg(long, value_name = "PATH")]
    pub table: Option<PathBuf>,
    /// Depth of the (lower) layer
    #[arg(long)]
    pub h0: Option<f64>,
    /// Gravitational acceleration
    #[arg(long)]
    pub g: Option<f64>,

    /// Density profile; omit for a homogeneous fluid
    #[arg(long, value_enum)]
    pub density: Option<DensityArg>,
    /// Constant density, or the bed density of an exponential profile
    #[arg(long)]
    pub rho: Option<f64>,
    /// Decay rate of an exponential profile, R = rho exp(-2 beta y)
    #[arg(long)]
    pub beta: Option<f64>,
    /// CSV with columns `y,R` for a tabulated density
    #[arg(long, value_name = "PATH")]
    pub density_table: Option<PathBuf>,

    /// Current of the upper fluid (two-fluid setups)
    #[arg(long, value_enum)]
    pub upper_shear: Option<UpperShearArg>,
    #[arg(long, allow_negative_numbers = true)]
    pub upper_gamma: Option<f64>,
    /// CSV with columns `y,U`, `y` measured from the interface
    #[arg(long, value_name = "PATH")]
    pub upper_table: Option<PathBuf>,
    /// Depth of the upper current profile above the interface
    #[arg(long)]
    pub upper_depth: Option<f64>,
    #[arg(long)]
    pub rho_minus: Option<f64>,
    #[arg(long)]
    pub rho_plus: Option<f64>,
    /// Lid height H, or `inf`
    #[arg(long)]
    pub lid: Option<String>,
    /// Interfacial surface tension
    #[arg(long)]
    pub sigma: Option<f64>,
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

fn read_samples(path: &Path, names: [&str; 2]) -> Result<Vec<[f64; 2]>, UsageError> {
    let (a, b) = read_columns(path, names).map_err(|e| usage(e.to_string()))?;
    Ok(a.into_iter().zip(b).map(|(a, b)| [a, b]).collect())
}

fn resolve_env_path(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Some(dir) = std::env::var_os(CONFIG_DIR_VAR) {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

impl EnvArgs {
    fn profile_flags(&self) -> Vec<&'static str> {
        let mut set = Vec::new();
        macro_rules! check {
            ($($field:ident => $name:literal),*) => {
                $(if self.$field.is_some() { set.push($name); })*
            };
        }
        check!(
            shear => "--shear", gamma => "--gamma", gamma_minus => "--gamma-minus",
            gamma_plus => "--gamma-plus", h1 => "--h1", table => "--table", h0 => "--h0",
            g => "--g", density => "--density", rho => "--rho", beta => "--beta",
            density_table => "--density-table", upper_shear => "--upper-shear",
            upper_gamma => "--upper-gamma", upper_table => "--upper-table",
            upper_depth => "--upper-depth", rho_minus => "--rho-minus", rho_plus => "--rho-plus",
            lid => "--lid", sigma => "--sigma"
        );
        set
    }

    /// The environment described by the flags or the `--env` file.
    pub fn spec(&self) -> Result<EnvironmentSpec, UsageError> {
        if let Some(path) = &self.env {
            let flags = self.profile_flags();
            if !flags.is_empty() {
                return Err(usage(format!("--env cannot be combined with {}", flags.join(", "))));
            }
            let path = resolve_env_path(path);
            let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            return EnvironmentSpec::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())));
        }
        let shear = match self.shear.ok_or_else(|| usage("either --env or --shear is required"))? {
            ShearArg::Zero => ShearSpec::Zero,
            ShearArg::Linear => ShearSpec::Linear {
                gamma: self.gamma.ok_or_else(|| usage("--shear linear needs --gamma"))?,
            },
            ShearArg::Piecewise => ShearSpec::Piecewise {
                gamma_minus: self.gamma_minus.ok_or_else(|| usage("--shear piecewise needs --gamma-minus"))?,
                gamma_plus: self.gamma_plus.ok_or_else(|| usage("--shear piecewise needs --gamma-plus"))?,
                h1: self.h1.ok_or_else(|| usage("--shear piecewise needs --h1"))?,
            },
            ShearArg::Table => ShearSpec::Table {
                samples: read_samples(self.table.as_deref().ok_or_else(|| usage("--shear table needs --table"))?, ["y", "U"])?,
            },
        };
        let density = match self.density {
            None => {
                if self.rho.is_some() || self.beta.is_some() || self.density_table.is_some() {
                    return Err(usage("density values need --density"));
                }
                None
            }
            Some(DensityArg::Constant) => Some(DensitySpec::Constant {
                value: self.rho.ok_or_else(|| usage("--density constant needs --rho"))?,
            }),
            Some(DensityArg::Exponential) => Some(DensitySpec::Exponential {
                beta: self.beta.ok_or_else(|| usage("--density exponential needs --beta"))?,
                scale: self.rho.unwrap_or(1.0),
            }),
            Some(DensityArg::Table) => Some(DensitySpec::Table {
                samples: read_samples(
                    self.density_table.as_deref().ok_or_else(|| usage("--density table needs --density-table"))?,
                    ["y", "R"],
                )?,
            }),
        };
        let upper = match self.upper_shear {
            None => None,
            Some(kind) => Some(UpperSpec {
                shear: match kind {
                    UpperShearArg::Zero => ShearSpec::Zero,
                    UpperShearArg::Linear => ShearSpec::Linear {
                        gamma: self.upper_gamma.ok_or_else(|| usage("--upper-shear linear needs --upper-gamma"))?,
                    },
                    UpperShearArg::Table => ShearSpec::Table {
                        samples: read_samples(
                            self.upper_table.as_deref().ok_or_else(|| usage("--upper-shear table needs --upper-table"))?,
                            ["y", "U"],
                        )?,
                    },
                },
                depth: self.upper_depth,
            }),
        };
        let lid = match &self.lid {
            None => None,
            Some(s) if s == "inf" => Some(LidSpec::Keyword("inf".into())),
            Some(s) => Some(LidSpec::Height(
                s.parse().map_err(|_| usage(format!("--lid must be a number or inf, got {s:?}")))?,
            )),
        };
        Ok(EnvironmentSpec {
            shear,
            density,
            h0: self.h0.ok_or_else(|| usage("--h0 is required"))?,
            g: self.g.unwrap_or(DEFAULT_GRAVITY),
            upper,
            rho_minus: self.rho_minus,
            rho_plus: self.rho_plus,
            lid,
            sigma: self.sigma,
        })
    }
}
