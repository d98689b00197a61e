//! The three subcommands: `sweep`, `verify` and `table1`.

use std::fmt::Write as _;

use rayon::prelude::*;
use specpool::adaptive::{
    evaluate_amc_cr, solve_vrvp_cutoff, switching_thresholds, vrvp_band_factor, vrvp_continuous_se,
    vrvp_spectral_efficiency, VrvpCutoffRule,
};
use specpool::cross_layer::{cld_thresholds, evaluate_cld_cr, PacketErrorRate};
use specpool::fading::{capacity_at_cutoff, solve_cutoff, RayleighChannel};
use specpool::numerics::Tolerance;
use specpool::oracle::{
    estimate_capacity, estimate_pooled_sum, estimate_void_fraction, estimate_vrvp, CutoffPolicy, SimConfig,
};
use specpool::pooling::{band_factor_gain, sum_spectral_efficiency, void_fraction, UserPopulation};

use crate::config::{Mode, Settings};
use crate::error::CliResult;
use crate::table::{format_sig, CurveTable};

/// Average SNR at which the VRVP threshold row is tabulated.
pub const TABLE1_SNR_DB: f64 = 20.0;

fn one_user() -> UserPopulation {
    UserPopulation::new(1).expect("1 is a valid population")
}

fn columns(mode: Mode, s: &Settings) -> Vec<String> {
    let l = s.users.get();
    let mut cols = vec!["snr_db".to_string()];
    match mode {
        Mode::Capacity => cols.extend(["cutoff_linear", "capacity", "band_factor"].map(String::from)),
        Mode::Pooling => {
            cols.push("se_L1".into());
            if l > 1 {
                cols.push(format!("se_L{l}"));
            }
            cols.extend(["gain", "band_factor"].map(String::from));
        }
        Mode::Vrvp => {
            for r in region_counts(s) {
                cols.push(format!("se_r{r}_L1"));
                if l > 1 {
                    cols.push(format!("se_r{r}_L{l}"));
                }
                cols.push(format!("gain_r{r}"));
            }
            cols.push("continuous_L1".into());
        }
        Mode::Crosslayer => {
            cols.push("conventional".into());
            if l > 1 {
                cols.push(format!("cr_L{l}"));
            }
            cols.extend(["gain", "rel_gain", "avg_per"].map(String::from));
        }
    }
    cols
}

/// Region counts evaluated by the VRVP sweep: every prefix ladder with at
/// least three regions (or the whole ladder when it is shorter).
pub fn region_counts(s: &Settings) -> Vec<usize> {
    let full = s.ladder.region_count();
    if full <= 3 {
        vec![full]
    } else {
        (3..=full).collect()
    }
}

fn row(mode: Mode, s: &Settings, snr_db: f64) -> CliResult<Vec<f64>> {
    let ch = RayleighChannel::from_db(snr_db)?;
    let tol = Tolerance::default();
    let multi = s.users.get() > 1;
    let mut out = vec![snr_db];
    match mode {
        Mode::Capacity => {
            let cut = solve_cutoff(&ch, &tol)?;
            out.extend([
                cut.value(),
                capacity_at_cutoff(&ch, cut).value(),
                band_factor_gain(&ch, cut).value(),
            ]);
        }
        Mode::Pooling => {
            let cut = solve_cutoff(&ch, &tol)?;
            let c1 = capacity_at_cutoff(&ch, cut);
            let d = band_factor_gain(&ch, cut);
            let sum = sum_spectral_efficiency(s.users, d, c1).value();
            out.push(c1.value());
            if multi {
                out.push(sum);
            }
            out.extend([sum - c1.value(), d.value()]);
        }
        Mode::Vrvp => {
            let mut cutoff = None;
            for r in region_counts(s) {
                let ladder = s.ladder.with_regions(r)?;
                let res = evaluate_amc_cr(s.users, &ch, &s.ber, &ladder, VrvpCutoffRule::default(), &tol)?;
                out.push(res.single.value());
                if multi {
                    out.push(res.sum.value());
                }
                out.push(res.gain());
                cutoff = Some(res.cutoff);
            }
            let cutoff = cutoff.expect("at least one region count");
            out.push(vrvp_continuous_se(&ch, &cutoff).value());
        }
        Mode::Crosslayer => {
            let conv = evaluate_cld_cr(one_user(), &ch, &s.per_model, &s.arq, PacketErrorRate::Average)?;
            let cr = evaluate_cld_cr(s.users, &ch, &s.per_model, &s.arq, PacketErrorRate::Average)?;
            let base = conv.sum.value();
            out.push(base);
            if multi {
                out.push(cr.sum.value());
            }
            let gain = cr.sum.value() - base;
            out.extend([gain, if base > 0.0 { gain / base } else { 0.0 }, cr.avg_per]);
        }
    }
    Ok(out)
}

/// Evaluates the selected curves at every grid point. Rows come back in
/// grid order regardless of evaluation order.
pub fn run_sweep(s: &Settings) -> CliResult<CurveTable> {
    let rows = s
        .grid
        .points()
        .into_par_iter()
        .map(|db| row(s.mode, s, db))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(CurveTable {
        columns: columns(s.mode, s),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub snr_db: f64,
    pub quantity: &'static str,
    pub closed_form: f64,
    pub oracle_mean: f64,
    pub std_error: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    /// Per quantity: number of grid points with |z| > 3.
    pub misses: Vec<(&'static str, usize)>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("snr_db,quantity,closed_form,oracle_mean,std_error,z\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                format_sig(r.snr_db),
                r.quantity,
                format_sig(r.closed_form),
                format_sig(r.oracle_mean),
                format_sig(r.std_error),
                format_sig(r.z)
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let positive = self.rows.iter().filter(|r| r.z > 0.0).count();
        let detail: Vec<String> = self.misses.iter().map(|(q, n)| format!("{q}={n}")).collect();
        format!(
            "verdict={} points={} positive_z={} misses_over_3sigma[{}]",
            if self.passed { "PASS" } else { "FAIL" },
            self.rows.len(),
            positive,
            detail.join(" ")
        )
    }
}

fn verify_point(mode: Mode, s: &Settings, cfg: &SimConfig, snr_db: f64) -> CliResult<Vec<VerifyRow>> {
    let ch = RayleighChannel::from_db(snr_db)?;
    let tol = Tolerance::default();
    let mk = |quantity, closed_form: f64, est: specpool::oracle::SimEstimate| VerifyRow {
        snr_db,
        quantity,
        closed_form,
        oracle_mean: est.mean,
        std_error: est.std_error,
        z: est.z_score(closed_form),
    };
    let rows = match mode {
        Mode::Capacity => {
            let cut = solve_cutoff(&ch, &tol)?;
            vec![
                mk(
                    "capacity",
                    capacity_at_cutoff(&ch, cut).value(),
                    estimate_capacity(&ch, cut, cfg),
                ),
                mk(
                    "band_factor",
                    band_factor_gain(&ch, cut).value(),
                    estimate_void_fraction(&ch, cut.value(), cfg),
                ),
            ]
        }
        Mode::Pooling => {
            let cut = solve_cutoff(&ch, &tol)?;
            let d = band_factor_gain(&ch, cut);
            let closed = sum_spectral_efficiency(s.users, d, capacity_at_cutoff(&ch, cut)).value();
            // Keep the number of sub-band samples near the requested trial count.
            let trials = (cfg.n_trials() / cfg.n_subbands() as u64).max(1);
            let pooled_cfg = SimConfig::new(cfg.n_subbands(), trials, cfg.seed())?;
            let est = estimate_pooled_sum(s.users, &ch, CutoffPolicy::Ensemble(cut), &pooled_cfg);
            vec![
                mk("pooled_sum", closed, est.sum),
                mk("band_factor", d.value(), estimate_void_fraction(&ch, cut.value(), cfg)),
            ]
        }
        Mode::Vrvp => {
            let cut = solve_vrvp_cutoff(&ch, &s.ber, &tol)?;
            let th = switching_thresholds(&cut, &s.ladder);
            let closed = vrvp_spectral_efficiency(&ch, &th, &s.ladder)?.value();
            vec![
                mk("vrvp_rate", closed, estimate_vrvp(&ch, &th, &s.ladder, cfg)?.rate),
                mk(
                    "vrvp_band_factor",
                    vrvp_band_factor(&ch, &cut).value(),
                    estimate_void_fraction(&ch, cut.value(), cfg),
                ),
            ]
        }
        Mode::Crosslayer => {
            let th = cld_thresholds(&s.per_model, &s.arq)?;
            let ladder = s.per_model.ladder();
            let closed = vrvp_spectral_efficiency(&ch, &th, &ladder)?.value();
            let first = th.as_slice()[0];
            vec![
                mk("cld_rate", closed, estimate_vrvp(&ch, &th, &ladder, cfg)?.rate),
                mk(
                    "cld_band_factor",
                    void_fraction(&ch, first).value(),
                    estimate_void_fraction(&ch, first, cfg),
                ),
            ]
        }
    };
    Ok(rows)
}

/// Closed form against Monte Carlo at every grid point. A quantity fails
/// when more than one grid point misses by over three standard errors.
pub fn run_verify(s: &Settings) -> CliResult<VerifyReport> {
    let per_point = s
        .grid
        .points()
        .into_iter()
        .map(|db| verify_point(s.mode, s, &s.sim, db))
        .collect::<CliResult<Vec<_>>>()?;
    let rows: Vec<VerifyRow> = per_point.into_iter().flatten().collect();
    let mut misses: Vec<(&'static str, usize)> = Vec::new();
    for r in &rows {
        let miss = usize::from(r.z.abs() > 3.0);
        match misses.iter_mut().find(|(q, _)| *q == r.quantity) {
            Some(entry) => entry.1 += miss,
            None => misses.push((r.quantity, miss)),
        }
    }
    let passed = misses.iter().all(|(_, n)| *n <= 1);
    Ok(VerifyReport { rows, misses, passed })
}

/// VRVP and cross-layer switching thresholds in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub modes: Vec<String>,
    pub vrvp_db: Vec<f64>,
    pub cld_db: Vec<f64>,
    pub nt_max: u32,
}

pub fn emit_table1(s: &Settings) -> CliResult<Table1> {
    let ch = RayleighChannel::from_db(TABLE1_SNR_DB)?;
    let cut = solve_vrvp_cutoff(&ch, &s.ber, &Tolerance::default())?;
    let ladder = s.per_model.ladder();
    let vrvp_db = switching_thresholds(&cut, &ladder).to_db();
    let cld_db = cld_thresholds(&s.per_model, &s.arq)?.to_db();
    Ok(Table1 {
        modes: ladder.modes().iter().map(|m| m.name.clone()).collect(),
        vrvp_db,
        cld_db,
        nt_max: s.arq.nt_max(),
    })
}

impl Table1 {
    pub fn render(&self) -> String {
        let row = |label: String, vals: &[f64]| {
            let cells: Vec<String> = std::iter::once(0.0)
                .chain(vals.iter().copied())
                .map(|v| format!("{v:.4}"))
                .collect();
            format!("{label},{}\n", cells.join(","))
        };
        let mut out = format!("row,No Transmit,{}\n", self.modes.join(","));
        out += &row(format!("VRVP avg_snr={TABLE1_SNR_DB}dB"), &self.vrvp_db);
        out += &row(format!("CLD N_t={}", self.nt_max), &self.cld_db);
        out
    }
}
