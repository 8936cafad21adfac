//! Linear water waves over shear currents: Rayleigh modes, dispersion relations,
//! pressure transfer functions and bed-pressure reconstruction.

pub mod config;
pub mod error;
pub mod io;
pub mod numerics;
pub mod profiles;
pub mod dispersion;
pub mod rayleigh;
pub mod reconstruct;
pub mod transfer;
pub mod twofluid;

pub use error::{Error, Result};
