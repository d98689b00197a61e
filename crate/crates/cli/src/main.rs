use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use specpool_cli::config::{FileConfig, Overrides, Settings, SnrGrid};
use specpool_cli::run::{emit_table1, run_sweep, run_verify};
use specpool_cli::{CliError, CliResult};

/// Spectrum pooling and adaptive modulation over Rayleigh fading.
#[derive(Parser)]
#[command(name = "specpool", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate closed-form curves over an SNR grid and write CSV.
    Sweep(Common),
    /// Compare closed forms against Monte Carlo; exits 1 on disagreement.
    Verify(Common),
    /// Print VRVP and cross-layer switching thresholds in dB.
    Table1(Common),
}

#[derive(Args)]
struct Common {
    /// SNR grid START:STOP:STEP in dB.
    #[arg(long, env = "SPECPOOL_SNR_DB", value_parser = parse_grid)]
    snr_db: Option<SnrGrid>,
    /// Number of pooled users L.
    #[arg(long, env = "SPECPOOL_USERS")]
    users: Option<u32>,
    /// Target bit error rate.
    #[arg(long, env = "SPECPOOL_BER")]
    ber: Option<f64>,
    /// Constellation ladder: mqam, mqam256 or a file of `name M` lines.
    #[arg(long, env = "SPECPOOL_LADDER")]
    ladder: Option<String>,
    /// capacity, pooling, vrvp or crosslayer.
    #[arg(long, env = "SPECPOOL_MODE")]
    mode: Option<String>,
    /// Maximum transmissions per packet.
    #[arg(long, env = "SPECPOOL_NT_MAX")]
    nt_max: Option<u32>,
    /// Target packet loss after all retransmissions.
    #[arg(long, env = "SPECPOOL_P_LOSS")]
    p_loss: Option<f64>,
    /// Monte Carlo trials. Pooling verification draws about this many sub-bands in total.
    #[arg(long, env = "SPECPOOL_TRIALS")]
    trials: Option<u64>,
    /// Sub-bands per trial block.
    #[arg(long, env = "SPECPOOL_SUBBANDS")]
    subbands: Option<usize>,
    /// RNG seed.
    #[arg(long, env = "SPECPOOL_SEED")]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, env = "SPECPOOL_OUT")]
    out: Option<PathBuf>,
    /// TOML config file.
    #[arg(long, env = "SPECPOOL_CONFIG")]
    config: Option<PathBuf>,
    /// PER model table.
    #[arg(long, env = "SPECPOOL_PER_MODEL")]
    per_model: Option<PathBuf>,
}

fn parse_grid(s: &str) -> Result<SnrGrid, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

impl Common {
    fn settings(&self) -> CliResult<Settings> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let o = Overrides {
            snr_db: self.snr_db,
            users: self.users,
            ber: self.ber,
            ladder: self.ladder.clone(),
            mode: self.mode.clone(),
            nt_max: self.nt_max,
            p_loss: self.p_loss,
            trials: self.trials,
            subbands: self.subbands,
            seed: self.seed,
            per_model: self.per_model.clone(),
        };
        Settings::resolve(&o, &file)
    }

    fn write(&self, text: &str) -> CliResult<()> {
        match &self.out {
            Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
            None => std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(e.to_string())),
        }
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Sweep(c) => {
            let table = run_sweep(&c.settings()?)?;
            c.write(&table.to_csv())?;
            Ok(true)
        }
        Command::Verify(c) => {
            let report = run_verify(&c.settings()?)?;
            c.write(&report.to_csv())?;
            eprintln!("{}", report.summary());
            Ok(report.passed)
        }
        Command::Table1(c) => {
            c.write(&emit_table1(&c.settings()?)?.render())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
