//! Cross-layer combining of adaptive modulation with truncated ARQ.
//!
//! A packet is sent at most `N_t^max` times. If every attempt fails
//! independently with probability `p`, the expected number of attempts is
//! `Σ_{n<N_t^max} p^n` and the delivered spectral efficiency is the
//! physical-layer efficiency divided by it. Mode switching thresholds are
//! placed where each mode's packet error rate meets the per-attempt target
//! `p_target = P_loss^{1/N_t^max}`.

use std::fmt;

use crate::adaptive::{region_probabilities, vrvp_spectral_efficiency, ConstellationLadder, Mode, SwitchingThresholds};
use crate::error::{Error, Result};
use crate::fading::{db_to_linear, linear_to_db, RayleighChannel, SpectralEfficiency};
use crate::pooling::{geometric_factor, void_fraction, BandFactorGain, UserPopulation};

/// Shipped PER table whose thresholds reproduce the published `N_t = 3` row.
pub const DEFAULT_PER_MODEL: &str = include_str!("../data/table1_cld.per");

/// Truncated ARQ settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArqConfig {
    nt_max: u32,
    p_loss: f64,
}

impl ArqConfig {
    pub fn new(nt_max: u32, p_loss: f64) -> Result<Self> {
        if nt_max == 0 {
            return Err(Error::Argument("nt_max must be at least 1".into()));
        }
        if !(p_loss > 0.0 && p_loss < 1.0) {
            return Err(Error::domain("packet loss target must lie in (0, 1)", p_loss));
        }
        Ok(Self { nt_max, p_loss })
    }

    pub fn nt_max(&self) -> u32 {
        self.nt_max
    }

    pub fn p_loss(&self) -> f64 {
        self.p_loss
    }

    /// `P_loss^{1/N_t^max}`.
    pub fn per_attempt_target(&self) -> f64 {
        self.p_loss.powf(1.0 / f64::from(self.nt_max))
    }
}

impl Default for ArqConfig {
    fn default() -> Self {
        Self {
            nt_max: 3,
            p_loss: 1e-3,
        }
    }
}

/// Expected number of transmissions `N̄(p, N_t^max)`, in `[1, N_t^max]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AvgTransmissions(f64);

impl AvgTransmissions {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn avg_transmissions(p: f64, nt_max: u32) -> Result<AvgTransmissions> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::domain("packet error rate must lie in [0, 1)", p));
    }
    if nt_max == 0 {
        return Err(Error::Argument("nt_max must be at least 1".into()));
    }
    let mut total = 0.0;
    let mut term = 1.0;
    for _ in 0..nt_max {
        total += term;
        term *= p;
    }
    Ok(AvgTransmissions(total))
}

/// `se_physical / N̄(p, nt_max)`.
pub fn cross_layer_se(se_physical: SpectralEfficiency, p: f64, nt_max: u32) -> Result<SpectralEfficiency> {
    let n = avg_transmissions(p, nt_max)?;
    SpectralEfficiency::new(se_physical.value() / n.value())
}

/// Exponential fit `PER(γ) = min(1, a·e^{−gγ})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub a: f64,
    pub g: f64,
}

impl ExpFit {
    /// SNR below which the fit is clamped to one.
    pub fn pivot(&self) -> f64 {
        (self.a.ln() / self.g).max(0.0)
    }
}

/// One mode of the PER model.
#[derive(Debug, Clone, PartialEq)]
pub struct PerMode {
    pub name: String,
    pub order: u32,
    /// Tabulated switching threshold (linear SNR).
    pub threshold: f64,
    pub fit: Option<ExpFit>,
}

impl PerMode {
    /// SNR at which the mode meets `p_target`. Uses the fit when present,
    /// the tabulated threshold otherwise.
    pub fn threshold_for(&self, p_target: f64) -> Result<f64> {
        match self.fit {
            Some(fit) if p_target >= fit.a => Err(Error::UnusableMode {
                name: self.name.clone(),
                p_target,
                amplitude: fit.a,
            }),
            Some(fit) => Ok((fit.a / p_target).ln() / fit.g),
            None => Ok(self.threshold),
        }
    }

    // ∫_lo^hi PER(γ) p(γ) dγ
    fn error_mass(&self, ch: &RayleighChannel, lo: f64, hi: f64, p_target: f64) -> f64 {
        let mass = |a: f64, b: f64| if b > a { ch.survival(a) - ch.survival(b) } else { 0.0 };
        match self.fit {
            Some(fit) => {
                let pivot = fit.pivot();
                let clamped = mass(lo, hi.min(pivot));
                let from = lo.max(pivot);
                if hi <= from {
                    return clamped;
                }
                let c = fit.g + 1.0 / ch.mean();
                let tail_hi = if hi.is_finite() { (-c * hi).exp() } else { 0.0 };
                clamped + fit.a / (1.0 + fit.g * ch.mean()) * ((-c * from).exp() - tail_hi)
            }
            None => mass(lo, hi.min(self.threshold)) + p_target * mass(lo.max(self.threshold), hi),
        }
    }
}

/// `PER_n(γ)`: the clamped exponential when fitted, otherwise a step that is
/// one below the tabulated threshold and `p_target` above it.
pub fn per_of_mode(gamma: f64, mode: &PerMode, p_target: f64) -> f64 {
    match mode.fit {
        Some(fit) => (fit.a * (-fit.g * gamma).exp()).clamp(0.0, 1.0),
        None if gamma < mode.threshold => 1.0,
        None => p_target,
    }
}

/// Per-mode PER curves, one per ladder rung.
#[derive(Debug, Clone, PartialEq)]
pub struct PerModel {
    modes: Vec<PerMode>,
}

impl PerModel {
    pub fn new(modes: Vec<PerMode>) -> Result<Self> {
        let ladder = ConstellationLadder::new(
            modes
                .iter()
                .map(|m| Mode {
                    name: m.name.clone(),
                    order: m.order,
                })
                .collect(),
        )?;
        debug_assert_eq!(ladder.len(), modes.len());
        for m in &modes {
            if !(m.threshold > 0.0) || !m.threshold.is_finite() {
                return Err(Error::Argument(format!("mode {}: threshold must be positive", m.name)));
            }
            if let Some(fit) = m.fit {
                if !(fit.a > 0.0 && fit.g > 0.0) || !fit.a.is_finite() || !fit.g.is_finite() {
                    return Err(Error::Argument(format!("mode {}: a and g must be positive", m.name)));
                }
            }
        }
        Ok(Self { modes })
    }

    /// Parses the whitespace (or comma) separated table
    /// `name M threshold_db [a g]`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut modes = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if fields.len() != 3 && fields.len() != 5 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "expected 3 or 5 fields (name M threshold_db [a g]), found {}",
                        fields.len()
                    ),
                });
            }
            let num = |s: &str, what: &str| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line: line_no,
                        message: format!("invalid {what}: {s:?}"),
                    })
            };
            let order = fields[1].parse::<u32>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid M: {:?}", fields[1]),
            })?;
            let threshold = db_to_linear(num(fields[2], "threshold_db")?);
            let fit = if fields.len() == 5 {
                Some(ExpFit {
                    a: num(fields[3], "a")?,
                    g: num(fields[4], "g")?,
                })
            } else {
                None
            };
            modes.push(PerMode {
                name: fields[0].to_string(),
                order,
                threshold,
                fit,
            });
        }
        Self::new(modes).map_err(|e| match e {
            Error::Parse { .. } => e,
            other => Error::Parse {
                line: 0,
                message: other.to_string(),
            },
        })
    }

    pub fn shipped() -> Self {
        Self::parse(DEFAULT_PER_MODEL).expect("shipped PER model parses")
    }

    pub fn modes(&self) -> &[PerMode] {
        &self.modes
    }

    pub fn ladder(&self) -> ConstellationLadder {
        ConstellationLadder::new(
            self.modes
                .iter()
                .map(|m| Mode {
                    name: m.name.clone(),
                    order: m.order,
                })
                .collect(),
        )
        .expect("validated at construction")
    }
}

impl fmt::Display for PerModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.modes {
            write!(f, "{} {} {}", m.name, m.order, linear_to_db(m.threshold))?;
            if let Some(fit) = m.fit {
                write!(f, " {} {}", fit.a, fit.g)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Cross-layer switching thresholds: where each mode's PER meets the
/// per-attempt target of `arq`.
pub fn cld_thresholds(per_model: &PerModel, arq: &ArqConfig) -> Result<SwitchingThresholds> {
    let target = arq.per_attempt_target();
    let t = per_model
        .modes
        .iter()
        .map(|m| m.threshold_for(target))
        .collect::<Result<Vec<_>>>()?;
    SwitchingThresholds::new(t)
}

/// Rate-weighted average packet error rate over the transmission regions.
/// Zero when the link never transmits.
pub fn avg_per(
    ch: &RayleighChannel,
    thresholds: &SwitchingThresholds,
    per_model: &PerModel,
    p_target: f64,
) -> Result<f64> {
    if thresholds.len() != per_model.modes.len() {
        return Err(Error::Argument(format!(
            "{} thresholds for {} PER modes",
            thresholds.len(),
            per_model.modes.len()
        )));
    }
    let probs = region_probabilities(ch, thresholds);
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, mode) in per_model.modes.iter().enumerate() {
        let bits = f64::from(mode.order).log2();
        let (lo, hi) = thresholds.region(j);
        num += bits * mode.error_mass(ch, lo, hi, p_target);
        den += bits * probs[j + 1];
    }
    Ok(if den > 0.0 { (num / den).clamp(0.0, 1.0) } else { 0.0 })
}

/// Which packet error rate enters `N̄(p, N_t^max)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PacketErrorRate {
    /// Rate-weighted average over the regions.
    #[default]
    Average,
    /// Caller-supplied per-attempt value.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossLayerResult {
    pub thresholds: SwitchingThresholds,
    pub se_physical: SpectralEfficiency,
    pub avg_per: f64,
    pub avg_transmissions: AvgTransmissions,
    pub se_cross_layer: SpectralEfficiency,
    pub band_factor: BandFactorGain,
    pub sum: SpectralEfficiency,
}

/// The full cross-layer pipeline for `L` pooled users: CLD thresholds,
/// discrete-rate efficiency over them, average PER, ARQ division, and the
/// geometric pooling sum with the first threshold as sensing cutoff.
pub fn evaluate_cld_cr(
    users: UserPopulation,
    ch: &RayleighChannel,
    per_model: &PerModel,
    arq: &ArqConfig,
    per_source: PacketErrorRate,
) -> Result<CrossLayerResult> {
    let thresholds = cld_thresholds(per_model, arq)?;
    let ladder = per_model.ladder();
    let se_physical = vrvp_spectral_efficiency(ch, &thresholds, &ladder)?;
    let p = match per_source {
        PacketErrorRate::Average => avg_per(ch, &thresholds, per_model, arq.per_attempt_target())?,
        PacketErrorRate::Fixed(p) => p,
    };
    let avg_tx = avg_transmissions(p, arq.nt_max)?;
    let se_cross_layer = cross_layer_se(se_physical, p, arq.nt_max)?;
    let band_factor = void_fraction(ch, thresholds.as_slice()[0]);
    let sum = SpectralEfficiency::new(geometric_factor(users, band_factor) * se_cross_layer.value())?;
    Ok(CrossLayerResult {
        thresholds,
        se_physical,
        avg_per: p,
        avg_transmissions: avg_tx,
        se_cross_layer,
        band_factor,
        sum,
    })
}

pub fn cld_cr_sum_se(
    users: UserPopulation,
    ch: &RayleighChannel,
    per_model: &PerModel,
    arq: &ArqConfig,
) -> Result<SpectralEfficiency> {
    Ok(evaluate_cld_cr(users, ch, per_model, arq, PacketErrorRate::Average)?.sum)
}
