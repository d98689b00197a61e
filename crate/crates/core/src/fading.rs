//! Rayleigh fading in the SNR domain and optimal power/rate adaptation.
//!
//! The received SNR `γ` of a Rayleigh channel is exponential with mean
//! `γ̄`. Water-filling transmits with power ratio `1/γ0 − 1/γ` above the
//! cutoff `γ0` and not at all below it; `γ0` is fixed by the unit average
//! power constraint
//!
//! ```text
//! ∫_{γ0}^∞ (1/γ0 − 1/γ) e^{−γ/γ̄}/γ̄ dγ = e^{−γ0/γ̄}/γ0 − E1(γ0/γ̄)/γ̄ = 1
//! ```
//!
//! and the resulting capacity is `∫_{γ0}^∞ log2(γ/γ0) p(γ) dγ =
//! log2(e)·E1(γ0/γ̄)` bits/s/Hz.
//!
//! All SNR arithmetic is linear; decibels only appear through
//! [`AvgSnr::from_db`] / [`AvgSnr::to_db`] and [`linear_to_db`].

use std::f64::consts::LOG2_E;

use crate::error::{Error, Result};
use crate::numerics::{e1, find_root, Interval, Tolerance};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Mean received SNR `γ̄` (linear power ratio, strictly positive).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AvgSnr(f64);

impl AvgSnr {
    pub fn new(linear: f64) -> Result<Self> {
        if !(linear > 0.0) || !linear.is_finite() {
            return Err(Error::domain("average SNR must be positive and finite", linear));
        }
        Ok(Self(linear))
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Self::new(db_to_linear(db))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_db(self) -> f64 {
        linear_to_db(self.0)
    }
}

/// Water-filling cutoff `γ0` (linear). Always in `(0, 1)` for Rayleigh fading.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CutoffSnr(f64);

impl CutoffSnr {
    pub fn new(linear: f64) -> Result<Self> {
        if !(linear > 0.0) || !linear.is_finite() {
            return Err(Error::domain("cutoff SNR must be positive and finite", linear));
        }
        Ok(Self(linear))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Spectral efficiency in bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct SpectralEfficiency(f64);

impl SpectralEfficiency {
    pub fn new(bits_per_hz: f64) -> Result<Self> {
        if !(bits_per_hz >= 0.0) || !bits_per_hz.is_finite() {
            return Err(Error::domain(
                "spectral efficiency must be finite and non-negative",
                bits_per_hz,
            ));
        }
        Ok(Self(bits_per_hz))
    }

    pub(crate) fn clamp_new(bits_per_hz: f64) -> Self {
        Self(bits_per_hz.max(0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Flat Rayleigh channel, described by its average SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighChannel {
    avg_snr: AvgSnr,
}

impl RayleighChannel {
    pub fn new(avg_snr: AvgSnr) -> Self {
        Self { avg_snr }
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Ok(Self::new(AvgSnr::from_db(db)?))
    }

    pub fn avg_snr(&self) -> AvgSnr {
        self.avg_snr
    }

    /// `γ̄` as a plain linear number.
    pub fn mean(&self) -> f64 {
        self.avg_snr.0
    }

    /// `P(γ ≥ threshold) = e^{−threshold/γ̄}`; one for non-positive thresholds.
    pub fn survival(&self, threshold: f64) -> f64 {
        if threshold <= 0.0 {
            1.0
        } else {
            (-threshold / self.mean()).exp()
        }
    }

    pub(crate) fn pdf(&self, gamma: f64) -> f64 {
        (-gamma / self.mean()).exp() / self.mean()
    }
}

/// Exponential SNR density `e^{−γ/γ̄}/γ̄`.
pub fn rayleigh_pdf(gamma: f64, ch: &RayleighChannel) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::domain("instantaneous SNR must be non-negative", gamma));
    }
    Ok(ch.pdf(gamma))
}

/// Water-filling power ratio `S(γ)/S̄ = max(0, 1/γ0 − 1/γ)`.
pub fn water_filling_ratio(gamma: f64, cutoff: CutoffSnr) -> f64 {
    if gamma <= cutoff.0 {
        0.0
    } else {
        1.0 / cutoff.0 - 1.0 / gamma
    }
}

/// Closed-form average power `E[S(γ)/S̄] − 1` for a trial cutoff `γ0`.
///
/// Zero at the water-filling cutoff; positive below it, negative above.
pub fn cutoff_residual(cutoff: f64, avg_snr: f64) -> f64 {
    let x = cutoff / avg_snr;
    (-x).exp() / cutoff - e1(x) / avg_snr - 1.0
}

/// Solves the average power constraint for the water-filling cutoff `γ0`.
///
/// Starts from the bracket `[1e−12, 1]` and halves the lower end while the
/// residual there is not yet positive (only needed for vanishing `γ̄`).
pub fn solve_cutoff(ch: &RayleighChannel, tol: &Tolerance) -> Result<CutoffSnr> {
    let g = ch.mean();
    let mut lo = 1e-12;
    while cutoff_residual(lo, g) <= 0.0 {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::Argument(format!("cannot bracket cutoff for average SNR {g}")));
        }
    }
    let gamma0 = find_root(|x| cutoff_residual(x, g), Interval::new(lo, 1.0)?, tol)?;
    CutoffSnr::new(gamma0)
}

/// Optimal power and rate adaptation capacity `log2(e)·E1(γ0/γ̄)`.
pub fn capacity_optimal(ch: &RayleighChannel) -> Result<SpectralEfficiency> {
    let cutoff = solve_cutoff(ch, &Tolerance::default())?;
    Ok(capacity_at_cutoff(ch, cutoff))
}

/// Capacity for a known cutoff; `capacity_optimal` without the solve.
pub fn capacity_at_cutoff(ch: &RayleighChannel, cutoff: CutoffSnr) -> SpectralEfficiency {
    SpectralEfficiency::clamp_new(LOG2_E * e1(cutoff.0 / ch.mean()))
}
