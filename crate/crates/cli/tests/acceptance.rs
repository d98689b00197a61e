//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::process::{Command, ExitCode, Stdio};
use std::time::{Duration, Instant};

use specpool::adaptive::{
    evaluate_amc_cr, solve_vrvp_cutoff, switching_thresholds, vrvp_continuous_se, vrvp_spectral_efficiency, BerTarget,
    ConstellationLadder, VrvpCutoffRule,
};
use specpool::cross_layer::{
    avg_transmissions, cld_thresholds, cross_layer_se, evaluate_cld_cr, ArqConfig, PacketErrorRate, PerModel,
};
use specpool::fading::{
    capacity_at_cutoff, capacity_optimal, cutoff_residual, solve_cutoff, RayleighChannel, SpectralEfficiency,
};
use specpool::numerics::Tolerance;
use specpool::oracle::{
    estimate_capacity, estimate_pooled_sum, estimate_void_fraction, estimate_vrvp, CutoffPolicy, SimConfig,
};
use specpool::pooling::{band_factor_gain, sum_spectral_efficiency, UserPopulation};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ch(db: f64) -> RayleighChannel {
    RayleighChannel::from_db(db).unwrap()
}

fn users(l: u32) -> UserPopulation {
    UserPopulation::new(l).unwrap()
}

fn db_grid() -> impl Iterator<Item = f64> {
    (0..=30).map(f64::from)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cutoff_closure() -> Outcome {
    let tol = Tolerance::default();
    let start = Instant::now();
    let mut cutoffs = Vec::new();
    let mut worst = 0.0_f64;
    for db in db_grid() {
        let c = solve_cutoff(&ch(db), &tol).map_err(|e| e.to_string())?.value();
        worst = worst.max(cutoff_residual(c, ch(db).avg_snr().value()).abs());
        cutoffs.push(c);
    }
    let elapsed = start.elapsed();
    let bounded = cutoffs.iter().all(|c| *c > 0.0 && *c < 1.0);
    let increasing = cutoffs.windows(2).all(|w| w[1] > w[0]);
    check(
        worst <= 1e-10 && bounded && increasing && elapsed < Duration::from_secs(1),
        format!("max residual {worst:.2e}, in (0,1) {bounded}, increasing {increasing}, {elapsed:.2?}"),
    )
}

fn oracle_agreement() -> Outcome {
    let cfg = SimConfig::new(1, 1_000_000, 42).unwrap();
    let ber = BerTarget::default();
    let ladder = ConstellationLadder::mqam();
    let tol = Tolerance::default();
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut fails = Vec::new();
    for db in [0.0, 10.0, 20.0, 30.0] {
        let c = ch(db);
        let cut = solve_cutoff(&c, &tol).map_err(|e| e.to_string())?;
        let vc = solve_vrvp_cutoff(&c, &ber, &tol).map_err(|e| e.to_string())?;
        let th = switching_thresholds(&vc, &ladder);
        let vrvp = vrvp_spectral_efficiency(&c, &th, &ladder)
            .map_err(|e| e.to_string())?
            .value();
        let pairs = [
            (
                "capacity",
                capacity_optimal(&c).map_err(|e| e.to_string())?.value(),
                estimate_capacity(&c, cut, &cfg),
            ),
            (
                "band_factor",
                band_factor_gain(&c, cut).value(),
                estimate_void_fraction(&c, cut.value(), &cfg),
            ),
            (
                "vrvp",
                vrvp,
                estimate_vrvp(&c, &th, &ladder, &cfg).map_err(|e| e.to_string())?.rate,
            ),
        ];
        for (name, closed, est) in pairs {
            let z = est.z_score(closed).abs();
            worst = worst.max(z);
            if z > 3.0 {
                fails.push(format!("{name}@{db}dB z={z:.2}"));
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        fails.is_empty() && elapsed < Duration::from_secs(30),
        format!("max |z| {worst:.2}, misses {fails:?}, {elapsed:.2?}"),
    )
}

fn table1_vrvp_row() -> Outcome {
    let want = [5.2745, 8.2848, 14.3054, 20.326];
    let cut = solve_vrvp_cutoff(&ch(20.0), &BerTarget::new(1e-3).unwrap(), &Tolerance::default())
        .map_err(|e| e.to_string())?;
    let got = switching_thresholds(&cut, &ConstellationLadder::mqam()).to_db();
    let worst = got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    check(
        worst <= 0.05,
        format!("thresholds {got:.4?} dB, max deviation {worst:.4} dB"),
    )
}

fn pooling_gain_band() -> Outcome {
    let tol = Tolerance::default();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..=50 {
        let db = f64::from(i) * 0.1;
        let c = ch(db);
        let cut = solve_cutoff(&c, &tol).map_err(|e| e.to_string())?;
        let c1 = capacity_at_cutoff(&c, cut);
        let gain = sum_spectral_efficiency(users(5), band_factor_gain(&c, cut), c1).value() - c1.value();
        if gain > best.0 {
            best = (gain, db);
        }
    }
    check(
        (0.1..=0.4).contains(&best.0),
        format!("max gain {:.4} b/s/Hz at {:.1} dB, band [0.1, 0.4]", best.0, best.1),
    )
}

fn ladder_gain_doubling() -> Outcome {
    let c = ch(30.0);
    let ber = BerTarget::default();
    let full = ConstellationLadder::mqam();
    let mut gains = Vec::new();
    for regions in [5, 4, 3] {
        let ladder = full.with_regions(regions).map_err(|e| e.to_string())?;
        let r = evaluate_amc_cr(
            users(5),
            &c,
            &ber,
            &ladder,
            VrvpCutoffRule::default(),
            &Tolerance::default(),
        )
        .map_err(|e| e.to_string())?;
        gains.push(r.gain());
    }
    let (r54, r43) = (gains[0] / gains[1], gains[1] / gains[2]);
    let ok = gains.iter().all(|g| *g > 0.0)
        && (1.5..=2.5).contains(&r54)
        && (1.5..=2.5).contains(&r43)
        && (0.25..=0.55).contains(&gains[0]);
    check(
        ok,
        format!(
            "gains 5/4/3 regions {gains:.4?}, ratios {r54:.3} {r43:.3}, need ratios in [1.5, 2.5] and gain5 in [0.25, 0.55]"
        ),
    )
}

fn cross_layer_properties() -> Outcome {
    let se = SpectralEfficiency::new(3.7).unwrap();
    let identity = cross_layer_se(se, 0.0, 3).map_err(|e| e.to_string())? == se;
    let nbar = avg_transmissions(0.5, 3).map_err(|e| e.to_string())?.value();
    let model = PerModel::shipped();
    let arq = ArqConfig::default();
    let cld = cld_thresholds(&model, &arq).map_err(|e| e.to_string())?;
    let vc = solve_vrvp_cutoff(&ch(20.0), &BerTarget::default(), &Tolerance::default()).map_err(|e| e.to_string())?;
    let vrvp = switching_thresholds(&vc, &model.ladder());
    let dominates = cld.as_slice().iter().zip(vrvp.as_slice()).all(|(c, v)| c >= v);
    let mut below = Vec::new();
    let mut rel = Vec::new();
    for db in db_grid() {
        let eval = |l| evaluate_cld_cr(users(l), &ch(db), &model, &arq, PacketErrorRate::Average);
        let conv = eval(1).map_err(|e| e.to_string())?.sum.value();
        let cr = eval(5).map_err(|e| e.to_string())?.sum.value();
        if cr < conv {
            below.push(db);
        }
        rel.push(if conv > 0.0 { (cr - conv) / conv } else { f64::INFINITY });
    }
    let low_high = rel[0] > rel[30];
    check(
        identity && nbar == 1.75 && dominates && below.is_empty() && low_high,
        format!(
            "identity {identity}, N(0.5,3)={nbar}, CLD dominates {dominates}, CR<conventional at {below:?}, rel gain 0 dB {:.3} vs 30 dB {:.4}",
            rel[0], rel[30]
        ),
    )
}

fn run_cli(out: &std::path::Path) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_specpool"))
        .args([
            "verify", "--mode", "vrvp", "--snr-db", "0:30:10", "--trials", "100000", "--seed", "42", "--out",
        ])
        .arg(out)
        .env_clear()
        .stderr(Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if status.code() != Some(0) {
        return Err(format!("cli exited with {status}"));
    }
    std::fs::read(out).map_err(|e| e.to_string())
}

fn oracle_self_consistency() -> Outcome {
    let c = ch(0.0);
    let cut = solve_cutoff(&c, &Tolerance::default()).map_err(|e| e.to_string())?;
    let closed = sum_spectral_efficiency(users(5), band_factor_gain(&c, cut), capacity_at_cutoff(&c, cut)).value();
    let mut bias = Vec::new();
    for n in [8, 64, 512] {
        let cfg = SimConfig::new(n, 20_000, 42).unwrap();
        bias.push(estimate_pooled_sum(users(5), &c, CutoffPolicy::PerBlock, &cfg).sum.mean - closed);
    }
    let monotone = bias.windows(2).all(|w| w[1].abs() < w[0].abs());
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = run_cli(&dir.path().join("a.csv"))?;
    let b = run_cli(&dir.path().join("b.csv"))?;
    let identical = !a.is_empty() && a == b;
    check(
        monotone && identical,
        format!("bias N=8/64/512 {bias:.4?}, shrinking {monotone}, byte-identical CSV {identical}"),
    )
}

fn ordering_chain() -> Outcome {
    let ber = BerTarget::new(1e-3).unwrap();
    let ladder = ConstellationLadder::mqam();
    let tol = Tolerance::default();
    let mut violations = Vec::new();
    let mut gaps20 = (0.0, 0.0);
    for db in db_grid() {
        let c = ch(db);
        let cut = solve_vrvp_cutoff(&c, &ber, &tol).map_err(|e| e.to_string())?;
        let th = switching_thresholds(&cut, &ladder);
        let discrete = vrvp_spectral_efficiency(&c, &th, &ladder)
            .map_err(|e| e.to_string())?
            .value();
        let continuous = vrvp_continuous_se(&c, &cut).value();
        let cap = capacity_optimal(&c).map_err(|e| e.to_string())?.value();
        if discrete > continuous || continuous > cap {
            violations.push(db);
        }
        if db == 20.0 {
            gaps20 = (continuous - discrete, cap - continuous);
        }
    }
    check(
        violations.is_empty() && gaps20.0 > 0.0 && gaps20.1 > 0.0,
        format!(
            "chain violated at {} of 31 points {violations:?}; gaps at 20 dB {:+.4} {:+.4}",
            violations.len(),
            gaps20.0,
            gaps20.1
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 cutoff closure", cutoff_closure),
        ("2 closed form vs Monte Carlo", oracle_agreement),
        ("3 VRVP threshold row", table1_vrvp_row),
        ("4 pooling gain band", pooling_gain_band),
        ("5 ladder gain doubling", ladder_gain_doubling),
        ("6 cross-layer properties", cross_layer_properties),
        ("7 oracle self-consistency", oracle_self_consistency),
        ("8 ordering chain", ordering_chain),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
