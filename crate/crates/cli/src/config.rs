//! Settings resolution: command-line flags and `SPECPOOL_*` environment
//! variables override the config file, which overrides built-in defaults.
//!
//! The config file is flat `key = value` text with sections:
//!
//! ```text
//! [sweep]
//! snr_db = "0:30:1"
//! users = 5
//! ber = 1e-3
//! mode = "pooling"
//! ladder = "mqam"          # built-in name or path to a ladder file
//!
//! [simulation]
//! trials = 1000000
//! subbands = 512
//! seed = 42
//!
//! [arq]
//! nt_max = 3
//! p_loss = 1e-3
//!
//! [per]
//! file = "modes.per"       # PER model table; shipped default otherwise
//!
//! [ladder]                 # inline ladder, used when sweep.ladder is unset
//! BPSK = 2
//! QPSK = 4
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use specpool::adaptive::{BerTarget, ConstellationLadder};
use specpool::cross_layer::{ArqConfig, PerModel};
use specpool::oracle::SimConfig;
use specpool::pooling::UserPopulation;

use crate::error::{CliError, CliResult};

pub const ENV_PREFIX: &str = "SPECPOOL_";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub arq: ArqSection,
    #[serde(default)]
    pub per: PerSection,
    pub ladder: Option<BTreeMap<String, u32>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub snr_db: Option<String>,
    pub users: Option<u32>,
    pub ber: Option<f64>,
    pub mode: Option<String>,
    pub ladder: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub trials: Option<u64>,
    pub subbands: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArqSection {
    pub nt_max: Option<u32>,
    pub p_loss: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerSection {
    pub file: Option<PathBuf>,
}

impl FileConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Inclusive dB grid `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> CliResult<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 || start > stop {
            return Err(CliError::Usage(format!(
                "invalid SNR grid {start}:{stop}:{step}; need step > 0 and start <= stop"
            )));
        }
        Ok(Self { start, stop, step })
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for SnrGrid {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let nums: Option<Vec<f64>> = parts.iter().map(|p| p.trim().parse().ok()).collect();
        match nums.as_deref() {
            Some([a, b, c]) => Self::new(*a, *b, *c),
            _ => Err(CliError::Usage(format!("expected START:STOP:STEP in dB, got {s:?}"))),
        }
    }
}

impl fmt::Display for SnrGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Capacity,
    Pooling,
    Vrvp,
    Crosslayer,
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "capacity" => Ok(Mode::Capacity),
            "pooling" => Ok(Mode::Pooling),
            "vrvp" => Ok(Mode::Vrvp),
            "crosslayer" => Ok(Mode::Crosslayer),
            other => Err(CliError::Usage(format!(
                "unknown mode {other:?}; expected capacity, pooling, vrvp or crosslayer"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Capacity => "capacity",
            Mode::Pooling => "pooling",
            Mode::Vrvp => "vrvp",
            Mode::Crosslayer => "crosslayer",
        })
    }
}

/// Built-in ladders by name, or a file with one `name M` pair per line.
pub fn resolve_ladder(spec: &str) -> CliResult<ConstellationLadder> {
    match spec {
        "mqam" => return Ok(ConstellationLadder::mqam()),
        "mqam256" => {
            return ConstellationLadder::from_pairs([
                ("BPSK", 2),
                ("QPSK", 4),
                ("16-QAM", 16),
                ("64-QAM", 64),
                ("256-QAM", 256),
            ])
            .map_err(Into::into)
        }
        _ => {}
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "unknown ladder {spec:?}: not a built-in name (mqam, mqam256) or a file"
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{spec}: {e}")))?;
    parse_ladder(&text)
}

pub fn parse_ladder(text: &str) -> CliResult<ConstellationLadder> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let [name, order] = fields.as_slice() else {
            return Err(CliError::Config(format!("ladder line {}: expected `name M`", i + 1)));
        };
        let order: u32 = order
            .parse()
            .map_err(|_| CliError::Config(format!("ladder line {}: invalid M {order:?}", i + 1)))?;
        pairs.push((name.to_string(), order));
    }
    ConstellationLadder::from_pairs(pairs).map_err(|e| CliError::Config(e.to_string()))
}

/// Values that may come from flags or the environment.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub snr_db: Option<SnrGrid>,
    pub users: Option<u32>,
    pub ber: Option<f64>,
    pub ladder: Option<String>,
    pub mode: Option<String>,
    pub nt_max: Option<u32>,
    pub p_loss: Option<f64>,
    pub trials: Option<u64>,
    pub subbands: Option<usize>,
    pub seed: Option<u64>,
    pub per_model: Option<PathBuf>,
}

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct Settings {
    pub grid: SnrGrid,
    pub users: UserPopulation,
    pub ber: BerTarget,
    pub ladder: ConstellationLadder,
    pub mode: Mode,
    pub arq: ArqConfig,
    pub per_model: PerModel,
    pub sim: SimConfig,
}

impl Settings {
    pub fn resolve(o: &Overrides, file: &FileConfig) -> CliResult<Self> {
        let grid = match (o.snr_db, &file.sweep.snr_db) {
            (Some(g), _) => g,
            (None, Some(s)) => s.parse()?,
            (None, None) => SnrGrid::new(0.0, 30.0, 1.0)?,
        };
        let users = UserPopulation::new(o.users.or(file.sweep.users).unwrap_or(5))
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let ber = BerTarget::new(o.ber.or(file.sweep.ber).unwrap_or(specpool::adaptive::DEFAULT_BER))
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let ladder = match (o.ladder.as_deref().or(file.sweep.ladder.as_deref()), &file.ladder) {
            (Some(spec), _) => resolve_ladder(spec)?,
            (None, Some(map)) => {
                let mut pairs: Vec<(String, u32)> = map.iter().map(|(k, v)| (k.clone(), *v)).collect();
                pairs.sort_by_key(|p| p.1);
                ConstellationLadder::from_pairs(pairs).map_err(|e| CliError::Config(e.to_string()))?
            }
            (None, None) => ConstellationLadder::mqam(),
        };
        let mode: Mode = o
            .mode
            .as_deref()
            .or(file.sweep.mode.as_deref())
            .unwrap_or("pooling")
            .parse()?;
        let defaults = ArqConfig::default();
        let arq = ArqConfig::new(
            o.nt_max.or(file.arq.nt_max).unwrap_or(defaults.nt_max()),
            o.p_loss.or(file.arq.p_loss).unwrap_or(defaults.p_loss()),
        )
        .map_err(|e| CliError::Usage(e.to_string()))?;
        let per_model = match o.per_model.as_ref().or(file.per.file.as_ref()) {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                PerModel::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => PerModel::shipped(),
        };
        let sim = SimConfig::new(
            o.subbands.or(file.simulation.subbands).unwrap_or(512),
            o.trials.or(file.simulation.trials).unwrap_or(1_000_000),
            o.seed.or(file.simulation.seed).unwrap_or(42),
        )
        .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Self {
            grid,
            users,
            ber,
            ladder,
            mode,
            arq,
            per_model,
            sim,
        })
    }
}
