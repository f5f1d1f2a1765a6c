use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sentfolio::lstm::LstmConfig;
use sentfolio::market_data::{ColumnMap, SplitSpec, DATE_FORMAT};
use sentfolio::pipeline::{ExperimentConfig, Strategy};
use sentfolio::portfolio::MeanVarianceConfig;

use crate::error::{CliError, CliResult};

fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_replicates() -> usize {
    10
}
fn default_capital() -> f64 {
    sentfolio::backtest::DEFAULT_INITIAL_CAPITAL
}
fn default_strategies() -> Vec<String> {
    Strategy::ALL.iter().map(|s| s.label().to_string()).collect()
}
fn default_max_lag() -> usize {
    8
}

/// Contents of the TOML run file. Relative paths are taken from the file's
/// own directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub assets: Vec<String>,
    /// Holds one `<asset>.csv` price file per asset.
    pub data_dir: PathBuf,
    pub sentiment: PathBuf,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    /// Hand-labeled `text,label` sample for `audit`.
    #[serde(default)]
    pub audit_sample: Option<PathBuf>,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    /// Replicate `k` trains with `seed + k`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_capital")]
    pub initial_capital: f64,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<String>,
    #[serde(default = "default_max_lag")]
    pub max_lag: usize,
    #[serde(default)]
    pub columns: ColumnMap,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default)]
    pub lstm: LstmConfig,
    #[serde(default)]
    pub monte_carlo: MeanVarianceConfig,
}

impl RunConfig {
    pub fn parse(text: &str, source: &Path) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("{}: {e}", source.display())))
    }

    pub fn strategies(&self) -> CliResult<Vec<Strategy>> {
        Ok(self
            .strategies
            .iter()
            .map(|s| s.parse::<Strategy>())
            .collect::<Result<Vec<_>, _>>()?)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.assets.is_empty() {
            return Err(CliError::Usage("config lists no assets".into()));
        }
        if self.max_lag == 0 {
            return Err(CliError::Usage("max_lag must be at least 1".into()));
        }
        self.experiment(None)?.validate()?;
        Ok(())
    }

    pub fn experiment(&self, window: Option<(NaiveDate, NaiveDate)>) -> CliResult<ExperimentConfig> {
        Ok(ExperimentConfig {
            split: self.split,
            lstm: self.lstm.clone(),
            mean_variance: self.monte_carlo,
            replicates: self.replicates,
            base_seed: self.seed,
            initial_capital: self.initial_capital,
            strategies: self.strategies()?,
            window,
        })
    }

    /// Every input the config names must exist.
    fn check_paths(&self) -> CliResult<()> {
        let inputs = [
            Some(&self.data_dir),
            Some(&self.sentiment),
            self.lexicon.as_ref(),
            self.audit_sample.as_ref(),
        ];
        for p in inputs.into_iter().flatten() {
            if !p.exists() {
                return Err(CliError::Core(sentfolio::Error::MissingFile(p.clone())));
            }
        }
        Ok(())
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.data_dir);
        join(&mut self.sentiment);
        join(&mut self.out_dir);
        if let Some(p) = self.lexicon.as_mut() {
            join(p);
        }
        if let Some(p) = self.audit_sample.as_mut() {
            join(p);
        }
    }
}

/// A loaded configuration plus the flags that override it.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    /// SHA-256 of the effective configuration, output directory excluded.
    pub hash: String,
    pub down_market: Option<(NaiveDate, NaiveDate)>,
}

impl Context {
    pub fn load(
        path: &Path,
        seed: Option<u64>,
        out: Option<&Path>,
        down_market: Option<(NaiveDate, NaiveDate)>,
    ) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::Core(sentfolio::Error::MissingFile(path.to_path_buf())),
            _ => CliError::io(path, e),
        })?;
        let mut config = RunConfig::parse(&text, path)?;
        if let Some(s) = seed {
            config.seed = s;
        }
        let mut hashed = config.clone();
        hashed.out_dir = PathBuf::new();
        let canonical = serde_json::to_string(&hashed).expect("config serializes");
        let hash: String = Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();

        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        config.resolve(&base);
        if let Some(o) = out {
            config.out_dir = o.to_path_buf();
        }
        config.validate()?;
        config.check_paths()?;
        Ok(Context {
            config,
            hash,
            down_market,
        })
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.config.out_dir.join(name)
    }

    /// Metadata lines every output file starts with.
    pub fn preamble(&self) -> Vec<String> {
        let mut lines = vec![format!("config_hash={} seed={}", self.hash, self.config.seed)];
        if let Some((from, to)) = self.down_market {
            lines.push(format!(
                "down_market={},{}",
                from.format(DATE_FORMAT),
                to.format(DATE_FORMAT)
            ));
        }
        lines
    }
}

/// Parses `FROM,TO` as two ISO dates.
pub fn parse_window(s: &str) -> Result<(NaiveDate, NaiveDate), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected FROM,TO but got `{s}`"))?;
    let date =
        |t: &str| NaiveDate::parse_from_str(t.trim(), DATE_FORMAT).map_err(|e| format!("bad date `{}`: {e}", t.trim()));
    Ok((date(a)?, date(b)?))
}
