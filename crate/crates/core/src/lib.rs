#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

//! Spectral efficiency of a spectrum-pooling cognitive radio physical layer
//! over Rayleigh fading.
//!
//! * [`fading`]: water-filling cutoff and optimal-adaptation capacity.
//! * [`pooling`]: band factor gain and the multi-user sum rate.
//! * [`adaptive`]: VRVP MQAM thresholds and spectral efficiency.
//! * [`cross_layer`]: truncated-ARQ combining.
//! * [`oracle`]: Monte Carlo estimates of all of the above.
//! * [`numerics`]: `E1`, root finding, quadrature.

pub mod adaptive;
pub mod cross_layer;
mod error;
pub mod fading;
pub mod numerics;
pub mod oracle;
pub mod pooling;

pub use error::{Error, Result};
