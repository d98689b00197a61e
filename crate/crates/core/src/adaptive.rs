//! Variable-rate variable-power MQAM over the pooled channel.
//!
//! A BER target sets the MQAM power penalty `K = −1.5/ln(5·BER)`. Power
//! follows `S(γ)/S̄ = 1/γ0 − 1/(γK)` above the cutoff `γ_K = γ0/K` and is
//! zero below it. A ladder of constellations `M_1 < … < M_N` partitions
//! the SNR axis at `γ_j = γ_K·M_j/M_1`; region `j` carries `log2 M_j`
//! bits/symbol, so the discrete-rate spectral efficiency is a sum of
//! region probabilities under the exponential density.

use std::f64::consts::LOG2_E;

use crate::error::{Error, Result};
use crate::fading::{solve_cutoff, AvgSnr, RayleighChannel, SpectralEfficiency};
use crate::numerics::{e1, Tolerance};
use crate::pooling::{geometric_factor, void_fraction, BandFactorGain, UserPopulation};

/// Default target bit error rate.
pub const DEFAULT_BER: f64 = 1e-3;

/// MQAM BER-to-SNR penalty `K = −1.5/ln(5·BER)`, defined for `0 < BER < 0.2`.
pub fn k_factor(ber: f64) -> Result<f64> {
    if !(ber > 0.0 && ber < 0.2) {
        return Err(Error::domain("target BER must lie in (0, 0.2)", ber));
    }
    Ok(-1.5 / (5.0 * ber).ln())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerTarget {
    ber: f64,
    k: f64,
}

impl BerTarget {
    pub fn new(ber: f64) -> Result<Self> {
        Ok(Self { ber, k: k_factor(ber)? })
    }

    pub fn ber(&self) -> f64 {
        self.ber
    }

    pub fn k_factor(&self) -> f64 {
        self.k
    }
}

impl Default for BerTarget {
    fn default() -> Self {
        Self::new(DEFAULT_BER).expect("default BER is valid")
    }
}

/// One transmission mode of a ladder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mode {
    pub name: String,
    pub order: u32,
}

impl Mode {
    pub fn bits(&self) -> f64 {
        f64::from(self.order).log2()
    }
}

/// Strictly increasing constellation orders `M_1 < … < M_N`, each ≥ 2.
/// The no-transmission choice `M_0` is implicit, so a ladder of `N`
/// modes defines `N + 1` fading regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstellationLadder {
    modes: Vec<Mode>,
}

impl ConstellationLadder {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Argument("ladder needs at least one mode".into()));
        }
        if let Some(m) = modes.iter().find(|m| m.order < 2) {
            return Err(Error::Argument(format!("mode {} has order {} < 2", m.name, m.order)));
        }
        if modes.windows(2).any(|w| w[0].order >= w[1].order) {
            return Err(Error::Argument("ladder orders must be strictly increasing".into()));
        }
        Ok(Self { modes })
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, u32)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(name, order)| Mode {
                    name: name.into(),
                    order,
                })
                .collect(),
        )
    }

    /// BPSK, QPSK, 16-QAM, 64-QAM.
    pub fn mqam() -> Self {
        Self::from_pairs([("BPSK", 2), ("QPSK", 4), ("16-QAM", 16), ("64-QAM", 64)]).expect("valid ladder")
    }

    /// Prefix of this ladder with `regions − 1` modes.
    pub fn with_regions(&self, regions: usize) -> Result<Self> {
        if regions < 2 || regions > self.region_count() {
            return Err(Error::Argument(format!(
                "ladder has {} regions, cannot take {regions}",
                self.region_count()
            )));
        }
        Ok(Self {
            modes: self.modes[..regions - 1].to_vec(),
        })
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn region_count(&self) -> usize {
        self.modes.len() + 1
    }
}

/// Region boundaries `γ_1 < … < γ_N` (linear SNR); `γ_{N+1} = ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingThresholds(Vec<f64>);

impl SwitchingThresholds {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::Argument("at least one switching threshold required".into()));
        }
        if thresholds.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::Argument(
                "switching thresholds must be positive and finite".into(),
            ));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument(
                "switching thresholds must be strictly increasing".into(),
            ));
        }
        Ok(Self(thresholds))
    }

    pub fn from_db(db: &[f64]) -> Result<Self> {
        Self::new(db.iter().map(|d| crate::fading::db_to_linear(*d)).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_db(&self) -> Vec<f64> {
        self.0.iter().map(|t| crate::fading::linear_to_db(*t)).collect()
    }

    /// Lower and upper edge of region `j` (0-based mode index).
    pub fn region(&self, j: usize) -> (f64, f64) {
        (self.0[j], self.0.get(j + 1).copied().unwrap_or(f64::INFINITY))
    }
}

/// How the water level `γ0` behind `γ_K = γ0/K` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VrvpCutoffRule {
    /// `γ0` is the pooling cutoff of the channel itself, so the VRVP cutoff
    /// is the sensed cutoff scaled by `1/K`. Reproduces the published
    /// VRVP threshold table.
    #[default]
    SharedCutoff,
    /// `γ0` is re-solved so that the VRVP policy spends exactly unit average
    /// power; via `u = Kγ` this is the water-filling cutoff at `K·γ̄`.
    PowerClosed,
}

/// VRVP cutoff `γ_K = γ0/K` together with the water level and `K` it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VrvpCutoff {
    gamma_k: f64,
    water_level: f64,
    k: f64,
}

impl VrvpCutoff {
    pub fn new(water_level: f64, k: f64) -> Result<Self> {
        if !(water_level > 0.0) || !(k > 0.0) {
            return Err(Error::Argument(format!(
                "invalid VRVP cutoff inputs γ0={water_level}, K={k}"
            )));
        }
        Ok(Self {
            gamma_k: water_level / k,
            water_level,
            k,
        })
    }

    pub fn value(&self) -> f64 {
        self.gamma_k
    }

    pub fn water_level(&self) -> f64 {
        self.water_level
    }

    pub fn k_factor(&self) -> f64 {
        self.k
    }
}

/// VRVP power ratio `S(γ)/S̄`: `1/γ0 − 1/(γK)` for `γ ≥ γ0/K`, else 0.
/// Continuous at the cutoff, where both branches are zero.
pub fn vrvp_power_ratio(gamma: f64, water_level: f64, k: f64) -> f64 {
    if gamma < water_level / k {
        0.0
    } else {
        1.0 / water_level - 1.0 / (gamma * k)
    }
}

pub fn solve_vrvp_cutoff(ch: &RayleighChannel, ber: &BerTarget, tol: &Tolerance) -> Result<VrvpCutoff> {
    solve_vrvp_cutoff_with(ch, ber, VrvpCutoffRule::default(), tol)
}

pub fn solve_vrvp_cutoff_with(
    ch: &RayleighChannel,
    ber: &BerTarget,
    rule: VrvpCutoffRule,
    tol: &Tolerance,
) -> Result<VrvpCutoff> {
    let k = ber.k_factor();
    let water_level = match rule {
        VrvpCutoffRule::SharedCutoff => solve_cutoff(ch, tol)?.value(),
        VrvpCutoffRule::PowerClosed => {
            let scaled = RayleighChannel::new(AvgSnr::new(k * ch.mean())?);
            solve_cutoff(&scaled, tol)?.value()
        }
    };
    VrvpCutoff::new(water_level, k)
}

/// `γ_j = γ_K·M_j/M_1`, so the lowest mode switches on exactly at `γ_K`.
pub fn switching_thresholds(cutoff: &VrvpCutoff, ladder: &ConstellationLadder) -> SwitchingThresholds {
    let base = f64::from(ladder.modes[0].order);
    SwitchingThresholds(
        ladder
            .modes
            .iter()
            .map(|m| cutoff.value() * f64::from(m.order) / base)
            .collect(),
    )
}

/// Occupancy of every region under the exponential density; index 0 is
/// the no-transmission region.
pub fn region_probabilities(ch: &RayleighChannel, thresholds: &SwitchingThresholds) -> Vec<f64> {
    let mut probs = Vec::with_capacity(thresholds.len() + 1);
    probs.push(-(-thresholds.0[0] / ch.mean()).exp_m1());
    for j in 0..thresholds.len() {
        let (lo, hi) = thresholds.region(j);
        probs.push(ch.survival(lo) - ch.survival(hi));
    }
    probs
}

/// Discrete-rate spectral efficiency `Σ_j log2(M_j)·P(γ_j ≤ γ < γ_{j+1})`.
pub fn vrvp_spectral_efficiency(
    ch: &RayleighChannel,
    thresholds: &SwitchingThresholds,
    ladder: &ConstellationLadder,
) -> Result<SpectralEfficiency> {
    if thresholds.len() != ladder.len() {
        return Err(Error::Argument(format!(
            "{} thresholds for a ladder of {} modes",
            thresholds.len(),
            ladder.len()
        )));
    }
    let probs = region_probabilities(ch, thresholds);
    let se = ladder.modes.iter().zip(&probs[1..]).map(|(m, p)| m.bits() * p).sum();
    Ok(SpectralEfficiency::clamp_new(se))
}

/// Continuous-rate reference `log2(e)·E1(γ_K/γ̄)` (rate `log2(γ/γ_K)` above `γ_K`).
pub fn vrvp_continuous_se(ch: &RayleighChannel, cutoff: &VrvpCutoff) -> SpectralEfficiency {
    SpectralEfficiency::clamp_new(LOG2_E * e1(cutoff.value() / ch.mean()))
}

/// `1 − e^{−γ_K/γ̄}`.
pub fn vrvp_band_factor(ch: &RayleighChannel, cutoff: &VrvpCutoff) -> BandFactorGain {
    void_fraction(ch, cutoff.value())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmcCrResult {
    pub cutoff: VrvpCutoff,
    pub thresholds: SwitchingThresholds,
    pub band_factor: BandFactorGain,
    /// Single-user VRVP spectral efficiency `R/B`.
    pub single: SpectralEfficiency,
    pub sum: SpectralEfficiency,
}

impl AmcCrResult {
    pub fn gain(&self) -> f64 {
        self.sum.value() - self.single.value()
    }
}

pub fn evaluate_amc_cr(
    users: UserPopulation,
    ch: &RayleighChannel,
    ber: &BerTarget,
    ladder: &ConstellationLadder,
    rule: VrvpCutoffRule,
    tol: &Tolerance,
) -> Result<AmcCrResult> {
    let cutoff = solve_vrvp_cutoff_with(ch, ber, rule, tol)?;
    let thresholds = switching_thresholds(&cutoff, ladder);
    let single = vrvp_spectral_efficiency(ch, &thresholds, ladder)?;
    let band_factor = vrvp_band_factor(ch, &cutoff);
    let sum = SpectralEfficiency::clamp_new(geometric_factor(users, band_factor) * single.value());
    Ok(AmcCrResult {
        cutoff,
        thresholds,
        band_factor,
        single,
        sum,
    })
}

/// Sum spectral efficiency of VRVP MQAM over `L` pooled users.
pub fn amc_cr_sum_se(
    users: UserPopulation,
    ch: &RayleighChannel,
    ber: &BerTarget,
    ladder: &ConstellationLadder,
) -> Result<SpectralEfficiency> {
    Ok(evaluate_amc_cr(users, ch, ber, ladder, VrvpCutoffRule::default(), &Tolerance::default())?.sum)
}
