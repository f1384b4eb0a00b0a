//! Mixture-transition-distribution temporal point processes.
//!
//! The crate covers the MTD point process (MTDPP), whose conditional
//! duration density is a weighted mixture of first-order lag-conditional
//! densities, and the MTD cluster point process (MTDCPP), which mixes an
//! independent immigrant duration density into an MTDPP. It provides
//!
//! * [`dist`]: Lomax, Burr, exponential components and the HRT copula maps,
//! * [`process`]: point patterns, models, conditional densities, intensities
//!   and likelihoods,
//! * [`simulate`]: forward simulation,
//! * [`mcmc`]: Metropolis-within-Gibbs posterior samplers,
//! * [`evaluate`]: prediction, time-rescaling checks, ACF/PACF and scores,
//! * [`curves`]: posterior summaries of intensity, density and hazard curves.

pub mod curves;
pub mod dist;
pub mod evaluate;
pub mod error;
pub mod mcmc;
pub mod numeric;
pub mod process;
pub mod simulate;

pub use error::{Error, Result};
