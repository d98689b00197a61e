//! Spectrum pooling: band factor gain and the multi-user sum rate.
//!
//! User 1 (the primary) water-fills its band; the sub-bands it leaves void
//! (gain below cutoff) are a fraction `Δ = 1 − e^{−γ0/γ̄}` of the band and
//! are refilled by user 2 with the same policy, and so on. With i.i.d.
//! gains each user inherits the void fraction of the one before it, so
//! user `l` sees `Δ^{l−1}` of the band and the `L`-user sum is a geometric
//! series in `Δ`.

use std::num::NonZeroU32;

use crate::error::{Error, Result};
use crate::fading::{capacity_at_cutoff, solve_cutoff, CutoffSnr, RayleighChannel, SpectralEfficiency};
use crate::numerics::Tolerance;

/// Number of users `L` sharing the pooled band (user 1 is the primary).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserPopulation(NonZeroU32);

impl UserPopulation {
    pub fn new(users: u32) -> Result<Self> {
        NonZeroU32::new(users)
            .map(Self)
            .ok_or_else(|| Error::Argument("user population must be at least 1".into()))
    }

    pub fn get(self) -> u32 {
        self.0.get()
    }
}

/// Void fraction `Δ` handed from one user to the next.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BandFactorGain(f64);

impl BandFactorGain {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::domain("band factor gain must lie in [0, 1]", value));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Probability that an instantaneous SNR falls below `threshold`:
/// `1 − e^{−threshold/γ̄}`.
pub fn void_fraction(ch: &RayleighChannel, threshold: f64) -> BandFactorGain {
    let x = threshold.max(0.0) / ch.mean();
    BandFactorGain((-(-x).exp_m1()).clamp(0.0, 1.0))
}

pub fn band_factor_gain(ch: &RayleighChannel, cutoff: CutoffSnr) -> BandFactorGain {
    void_fraction(ch, cutoff.value())
}

/// Capacity of user `l` (1-based): `Δ^{l−1}·C1`.
pub fn user_capacity(l: u32, gain: BandFactorGain, primary: SpectralEfficiency) -> Result<SpectralEfficiency> {
    if l == 0 {
        return Err(Error::Argument("user index is 1-based".into()));
    }
    Ok(SpectralEfficiency::clamp_new(
        gain.0.powi(l as i32 - 1) * primary.value(),
    ))
}

/// `(1 − Δ^L)/(1 − Δ) · C1`, continued as `L·C1` when `Δ` is within 1e−12 of one.
pub fn sum_spectral_efficiency(
    users: UserPopulation,
    gain: BandFactorGain,
    primary: SpectralEfficiency,
) -> SpectralEfficiency {
    SpectralEfficiency::clamp_new(geometric_factor(users, gain) * primary.value())
}

/// `Σ_{l=1..L} Δ^{l−1}`.
pub fn geometric_factor(users: UserPopulation, gain: BandFactorGain) -> f64 {
    let d = gain.0;
    let l = users.get();
    if (1.0 - d).abs() <= 1e-12 {
        l as f64
    } else {
        (1.0 - d.powi(l as i32)) / (1.0 - d)
    }
}

/// Everything the pooling model produces for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolingResult {
    pub cutoff: CutoffSnr,
    pub gain: BandFactorGain,
    pub per_user: Vec<SpectralEfficiency>,
    pub sum: SpectralEfficiency,
}

impl PoolingResult {
    pub fn primary(&self) -> SpectralEfficiency {
        self.per_user[0]
    }
}

pub fn evaluate_pooling(users: UserPopulation, ch: &RayleighChannel, tol: &Tolerance) -> Result<PoolingResult> {
    let cutoff = solve_cutoff(ch, tol)?;
    let gain = band_factor_gain(ch, cutoff);
    let c1 = capacity_at_cutoff(ch, cutoff);
    let per_user = (1..=users.get())
        .map(|l| user_capacity(l, gain, c1))
        .collect::<Result<Vec<_>>>()?;
    Ok(PoolingResult {
        cutoff,
        gain,
        per_user,
        sum: sum_spectral_efficiency(users, gain, c1),
    })
}
