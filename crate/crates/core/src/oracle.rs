//! Monte Carlo estimates of every closed-form quantity.
//!
//! SNR samples are drawn directly from the exponential density. Every
//! trial owns an independent ChaCha8 stream selected by its index, so a
//! trial's draws depend only on `(seed, trial)`. Trials are grouped into
//! fixed blocks whose moments are merged pairwise in block order; results
//! are therefore bit-identical for any number of worker threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::adaptive::{ConstellationLadder, SwitchingThresholds};
use crate::error::{Error, Result};
use crate::fading::{CutoffSnr, RayleighChannel};
use crate::pooling::UserPopulation;

const BLOCK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    n_subbands: usize,
    n_trials: u64,
    seed: u64,
}

impl SimConfig {
    pub fn new(n_subbands: usize, n_trials: u64, seed: u64) -> Result<Self> {
        if n_subbands == 0 || n_trials == 0 {
            return Err(Error::Argument("n_subbands and n_trials must be at least 1".into()));
        }
        Ok(Self {
            n_subbands,
            n_trials,
            seed,
        })
    }

    pub fn n_subbands(&self) -> usize {
        self.n_subbands
    }

    pub fn n_trials(&self) -> u64 {
        self.n_trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

impl SimEstimate {
    /// `(mean − expected)/std_error`; zero when both coincide exactly.
    pub fn z_score(&self, expected: f64) -> f64 {
        let diff = self.mean - expected;
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        if x.is_nan() {
            return;
        }
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let n = a.n + b.n;
        let delta = b.mean - a.mean;
        let mean = a.mean + delta * b.n as f64 / n as f64;
        let m2 = a.m2 + b.m2 + delta * delta * (a.n as f64) * (b.n as f64) / n as f64;
        Moments { n, mean, m2 }
    }

    fn estimate(&self) -> SimEstimate {
        let std_error = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        SimEstimate {
            mean: if self.n > 0 { self.mean } else { f64::NAN },
            std_error,
            n_samples: self.n,
        }
    }
}

fn pairwise(mut level: Vec<Vec<Moments>>) -> Vec<Moments> {
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => a.iter().zip(b).map(|(x, y)| Moments::merge(*x, *y)).collect(),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    level.pop().unwrap_or_default()
}

/// Random stream of one trial: a pure function of `(seed, trial)`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

// Runs `trial` for every trial index and returns the moments of each of
// the `width` statistics it writes (NaN entries are skipped).
fn run<F>(cfg: &SimConfig, width: usize, trial: F) -> Vec<SimEstimate>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let blocks = cfg.n_trials.div_ceil(BLOCK);
    let per_block: Vec<Vec<Moments>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![Moments::default(); width];
            let mut buf = vec![0.0; width];
            let end = ((b + 1) * BLOCK).min(cfg.n_trials);
            for t in b * BLOCK..end {
                let mut rng = base.clone();
                rng.set_stream(t);
                trial(&mut rng, &mut buf);
                for (m, x) in acc.iter_mut().zip(&buf) {
                    m.push(*x);
                }
            }
            acc
        })
        .collect();
    let mut merged = pairwise(per_block);
    merged.resize(width, Moments::default());
    merged.iter().map(Moments::estimate).collect()
}

/// `γ = −γ̄·ln(u)` for a uniform `u ∈ (0, 1]`.
pub fn rayleigh_snr_from_uniform(avg_snr: f64, u: f64) -> f64 {
    let g = -avg_snr * u.ln();
    if g == 0.0 {
        0.0
    } else {
        g
    }
}

pub fn sample_rayleigh_snr<R: Rng + ?Sized>(ch: &RayleighChannel, rng: &mut R) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    rayleigh_snr_from_uniform(ch.mean(), u)
}

/// Water-filling capacity estimate: mean of `log2(γ/γ0)` over `γ ≥ γ0`,
/// zero otherwise. One sample per trial.
pub fn estimate_capacity(ch: &RayleighChannel, cutoff: CutoffSnr, cfg: &SimConfig) -> SimEstimate {
    let g0 = cutoff.value();
    run(cfg, 1, |rng, out| {
        let g = sample_rayleigh_snr(ch, rng);
        out[0] = if g >= g0 { (g / g0).log2() } else { 0.0 };
    })[0]
}

/// Fraction of samples below `threshold` (the empirical band factor).
pub fn estimate_void_fraction(ch: &RayleighChannel, threshold: f64, cfg: &SimConfig) -> SimEstimate {
    run(cfg, 1, |rng, out| {
        out[0] = if sample_rayleigh_snr(ch, rng) < threshold {
            1.0
        } else {
            0.0
        };
    })[0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct VrvpEstimate {
    pub rate: SimEstimate,
    /// Region occupancy, no-transmission region first.
    pub occupancy: Vec<SimEstimate>,
}

/// Bins sampled SNRs into the ladder's fading regions and averages `log2 M_j`.
pub fn estimate_vrvp(
    ch: &RayleighChannel,
    thresholds: &SwitchingThresholds,
    ladder: &ConstellationLadder,
    cfg: &SimConfig,
) -> Result<VrvpEstimate> {
    if thresholds.len() != ladder.len() {
        return Err(Error::Argument("thresholds and ladder differ in length".into()));
    }
    let edges = thresholds.as_slice();
    let bits: Vec<f64> = ladder.modes().iter().map(|m| m.bits()).collect();
    let regions = edges.len() + 1;
    let mut est = run(cfg, regions + 1, |rng, out| {
        let g = sample_rayleigh_snr(ch, rng);
        let region = edges.partition_point(|t| *t <= g);
        out.fill(0.0);
        out[1 + region] = 1.0;
        out[0] = if region == 0 { 0.0 } else { bits[region - 1] };
    });
    let rate = est.remove(0);
    Ok(VrvpEstimate { rate, occupancy: est })
}

/// How each user picks its cutoff in the pooled simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffPolicy {
    /// Fixed ensemble cutoff (the `N → ∞` solution) for every user.
    Ensemble(CutoffSnr),
    /// Each user water-fills over the sub-bands it can access in the block,
    /// spending on average unit power per accessible sub-band.
    PerBlock,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PooledEstimate {
    /// Rate of user `l` per sub-band of the whole band.
    pub per_user: Vec<SimEstimate>,
    pub sum: SimEstimate,
    /// Fraction of the sub-bands offered to user `l` that it leaves void.
    pub void_fraction: Vec<SimEstimate>,
}

/// Water level `γ0` satisfying `Σ (1/γ0 − 1/γ_i)^+ = n` over `gains`.
pub fn block_water_level(gains: &mut [f64]) -> f64 {
    let n = gains.len() as f64;
    gains.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut inv_sum = 0.0;
    let mut level = f64::NAN;
    for (k, g) in gains.iter().enumerate() {
        let cand_inv = inv_sum + 1.0 / g;
        let cand = (k + 1) as f64 / (n + cand_inv);
        if *g <= cand {
            break;
        }
        inv_sum = cand_inv;
        level = cand;
    }
    level
}

/// Sequential hole filling over `n_subbands` sub-bands: user 1 draws a gain
/// per sub-band and transmits where it clears its cutoff, user `l + 1`
/// draws fresh gains on the sub-bands user `l` left void, and so on.
pub fn estimate_pooled_sum(
    users: UserPopulation,
    ch: &RayleighChannel,
    policy: CutoffPolicy,
    cfg: &SimConfig,
) -> PooledEstimate {
    let l = users.get() as usize;
    let n = cfg.n_subbands;
    let mut est = run(cfg, 2 * l + 1, |rng, out| {
        let mut available = n;
        let mut gains = Vec::with_capacity(n);
        let mut total = 0.0;
        for user in 0..l {
            gains.clear();
            gains.extend((0..available).map(|_| sample_rayleigh_snr(ch, rng)));
            let level = match policy {
                CutoffPolicy::Ensemble(c) => c.value(),
                CutoffPolicy::PerBlock if available > 0 => block_water_level(&mut gains),
                CutoffPolicy::PerBlock => f64::INFINITY,
            };
            let mut rate = 0.0;
            let mut used = 0;
            for g in &gains {
                if *g >= level {
                    rate += (g / level).log2();
                    used += 1;
                }
            }
            let rate = rate / n as f64;
            out[user] = rate;
            out[l + 1 + user] = if available > 0 {
                (available - used) as f64 / available as f64
            } else {
                f64::NAN
            };
            total += rate;
            available -= used;
        }
        out[l] = total;
    });
    let void_fraction = est.split_off(l + 1);
    let sum = est.pop().expect("sum column");
    PooledEstimate {
        per_user: est,
        sum,
        void_fraction,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptive::{solve_vrvp_cutoff, switching_thresholds, vrvp_spectral_efficiency, BerTarget};
    use crate::fading::{capacity_at_cutoff, solve_cutoff};
    use crate::numerics::Tolerance;
    use crate::pooling::{band_factor_gain, sum_spectral_efficiency, user_capacity};

    fn ch(db: f64) -> RayleighChannel {
        RayleighChannel::from_db(db).unwrap()
    }

    fn cutoff(c: &RayleighChannel) -> CutoffSnr {
        solve_cutoff(c, &Tolerance::default()).unwrap()
    }

    #[test]
    fn transform_endpoint() {
        assert_eq!(rayleigh_snr_from_uniform(5.0, 1.0), 0.0);
        assert!((rayleigh_snr_from_uniform(5.0, (-1.0f64).exp()) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn sample_mean_and_tail() {
        let c = ch(4.0);
        let cfg = SimConfig::new(1, 1_000_000, 7).unwrap();
        let mean = run(&cfg, 1, |rng, out| out[0] = sample_rayleigh_snr(&c, rng))[0];
        assert!(mean.z_score(c.mean()).abs() < 3.0, "{mean:?}");
        let g0 = cutoff(&c);
        let below = estimate_void_fraction(&c, g0.value(), &cfg);
        assert!(below.z_score(band_factor_gain(&c, g0).value()).abs() < 3.0);
    }

    #[test]
    fn capacity_oracle_at_20_db() {
        let c = ch(20.0);
        let g0 = cutoff(&c);
        let est = estimate_capacity(&c, g0, &SimConfig::new(1, 1_000_000, 42).unwrap());
        let z = est.z_score(capacity_at_cutoff(&c, g0).value());
        assert!(z.abs() < 3.0, "z = {z}");
        let never = estimate_capacity(&c, CutoffSnr::new(1e300).unwrap(), &SimConfig::new(1, 1000, 1).unwrap());
        assert_eq!(never.mean, 0.0);
    }

    #[test]
    fn std_error_scales_with_root_n() {
        let c = ch(10.0);
        let g0 = cutoff(&c);
        let a = estimate_capacity(&c, g0, &SimConfig::new(1, 200_000, 3).unwrap());
        let b = estimate_capacity(&c, g0, &SimConfig::new(1, 400_000, 3).unwrap());
        let ratio = a.std_error / b.std_error;
        assert!((ratio - 2f64.sqrt()).abs() < 0.2 * 2f64.sqrt(), "{ratio}");
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let c = ch(0.0);
        let cfg = SimConfig::new(16, 5_000, 99).unwrap();
        let users = UserPopulation::new(3).unwrap();
        let policy = CutoffPolicy::Ensemble(cutoff(&c));
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| estimate_pooled_sum(users, &c, policy, &cfg));
        let b = four.install(|| estimate_pooled_sum(users, &c, policy, &cfg));
        assert_eq!(a, b);
        assert_eq!(a.sum.mean.to_bits(), b.sum.mean.to_bits());
    }

    #[test]
    fn single_user_pool_reduces_to_capacity_estimate() {
        let c = ch(7.0);
        let g0 = cutoff(&c);
        let cfg = SimConfig::new(1, 20_000, 5).unwrap();
        let pooled = estimate_pooled_sum(UserPopulation::new(1).unwrap(), &c, CutoffPolicy::Ensemble(g0), &cfg);
        let cap = estimate_capacity(&c, g0, &cfg);
        assert_eq!(pooled.sum, cap);
        assert_eq!(pooled.per_user[0], cap);
    }

    #[test]
    fn pooled_sum_matches_geometric_series() {
        let c = ch(0.0);
        let g0 = cutoff(&c);
        let cfg = SimConfig::new(512, 10_000, 42).unwrap();
        let users = UserPopulation::new(5).unwrap();
        let est = estimate_pooled_sum(users, &c, CutoffPolicy::Ensemble(g0), &cfg);
        let d = band_factor_gain(&c, g0);
        let c1 = capacity_at_cutoff(&c, g0);
        assert!(est.sum.z_score(sum_spectral_efficiency(users, d, c1).value()).abs() < 3.0);
        for (l, u) in est.per_user.iter().enumerate() {
            let want = user_capacity(l as u32 + 1, d, c1).unwrap().value();
            assert!(u.z_score(want).abs() < 3.5, "user {}: {u:?} vs {want}", l + 1);
        }
        for v in &est.void_fraction {
            assert!(v.z_score(d.value()).abs() < 3.5, "{v:?} vs {}", d.value());
        }
    }

    #[test]
    fn block_water_level_satisfies_budget() {
        let mut gains = vec![0.1, 3.0, 0.7, 1.2, 0.05, 8.0];
        let n = gains.len() as f64;
        let level = block_water_level(&mut gains);
        let power: f64 = gains
            .iter()
            .filter(|g| **g > level)
            .map(|g| 1.0 / level - 1.0 / g)
            .sum();
        assert!((power - n).abs() < 1e-12);
        assert!(gains
            .iter()
            .filter(|g| **g <= level)
            .all(|g| 1.0 / level - 1.0 / g <= 0.0));
    }

    #[test]
    fn vrvp_oracle_matches_closed_form() {
        let c = ch(20.0);
        let cut = solve_vrvp_cutoff(&c, &BerTarget::default(), &Tolerance::default()).unwrap();
        let ladder = ConstellationLadder::mqam();
        let th = switching_thresholds(&cut, &ladder);
        let est = estimate_vrvp(&c, &th, &ladder, &SimConfig::new(1, 1_000_000, 42).unwrap()).unwrap();
        let closed = vrvp_spectral_efficiency(&c, &th, &ladder).unwrap().value();
        assert!(est.rate.z_score(closed).abs() < 3.0);
        let occ: f64 = est.occupancy.iter().map(|o| o.mean).sum();
        assert!((occ - 1.0).abs() < 1e-12);

        let tiny = RayleighChannel::new(crate::fading::AvgSnr::new(1e-9).unwrap());
        let est = estimate_vrvp(&tiny, &th, &ladder, &SimConfig::new(1, 1000, 1).unwrap()).unwrap();
        assert_eq!(est.rate.mean, 0.0);
    }
}
