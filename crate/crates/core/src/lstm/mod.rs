//! Next-day price forecaster: a stacked LSTM over a short window of panel
//! rows, trained in min-max scaled space.

mod network;
mod scaler;
mod train;

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::ops::Range;

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use network::{Architecture, Layout, Network, Trace};
pub use scaler::MinMaxScaler;
pub use train::{analytic_gradient, compare_gradient, gradient_check, train, AdamState, TrainReport};

use crate::error::{Error, Result};
use crate::market_data::{AlignedPanel, FeatureSet};

pub const CHECKPOINT_FORMAT: &str = "sentfolio-lstm";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LstmConfig {
    pub input_width: usize,
    pub hidden_size: usize,
    pub num_layers: usize,
    pub learning_rate: f64,
    /// Input days per window; the target is the following day.
    pub window: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for LstmConfig {
    fn default() -> Self {
        LstmConfig {
            input_width: 30,
            hidden_size: 13,
            num_layers: 3,
            learning_rate: 0.004,
            window: 6,
            batch_size: 32,
            epochs: 500,
            seed: 0,
        }
    }
}

impl LstmConfig {
    pub fn validate(&self) -> Result<()> {
        let sizes = [
            ("input_width", self.input_width),
            ("hidden_size", self.hidden_size),
            ("num_layers", self.num_layers),
            ("window", self.window),
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
        ];
        if let Some((name, _)) = sizes.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("lstm {name} must be at least 1")));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "lstm learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }

    /// Copy with `input_width` matching `features` over `n_assets`.
    pub fn for_features(&self, features: FeatureSet, n_assets: usize) -> Self {
        LstmConfig {
            input_width: features.width(n_assets),
            ..self.clone()
        }
    }

    fn architecture(&self, outputs: usize) -> Architecture {
        Architecture {
            input_width: self.input_width,
            hidden_size: self.hidden_size,
            num_layers: self.num_layers,
            output_size: outputs,
        }
    }
}

/// One training example in price units.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    /// `window` rows of features, oldest first.
    pub inputs: Vec<Vec<f64>>,
    /// Prices of every asset on the following day.
    pub target: Vec<f64>,
}

/// Stride-1 windows over `panel`: window `k` reads rows `k..k+window` and
/// targets the prices at row `k+window`.
pub fn make_windows(panel: &AlignedPanel, features: FeatureSet, window: usize) -> Result<Vec<Window>> {
    if window == 0 {
        return Err(Error::Config("window must be at least 1".into()));
    }
    if panel.len() < window + 1 {
        return Err(Error::InsufficientData(format!(
            "{} rows cannot form a {}-day window plus target",
            panel.len(),
            window
        )));
    }
    let rows: Vec<Vec<f64>> = (0..panel.len()).map(|r| panel.feature_row(r, features)).collect();
    Ok((0..panel.len() - window)
        .map(|k| Window {
            inputs: rows[k..k + window].to_vec(),
            target: panel.prices(k + window),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    pub config: LstmConfig,
    pub features: FeatureSet,
    pub assets: Vec<String>,
    /// Fitted on the training rows only; never refitted.
    pub scaler: MinMaxScaler,
    /// Position of each asset's price within a feature row.
    pub target_columns: Vec<usize>,
    pub network: Network,
    pub adam: AdamState,
}

impl LstmModel {
    /// Randomly initialised model whose scaler is fitted on `train_panel`.
    pub fn new(config: &LstmConfig, features: FeatureSet, train_panel: &AlignedPanel) -> Result<Self> {
        config.validate()?;
        let n = train_panel.n_assets();
        if config.input_width != features.width(n) {
            return Err(Error::Dimension {
                what: "lstm input width",
                expected: features.width(n),
                got: config.input_width,
            });
        }
        let rows: Vec<Vec<f64>> = (0..train_panel.len())
            .map(|r| train_panel.feature_row(r, features))
            .collect();
        let scaler = MinMaxScaler::fit(&rows)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let network = Network::init(config.architecture(n), &mut rng);
        Ok(LstmModel {
            adam: AdamState::new(network.n_params()),
            config: config.clone(),
            features,
            assets: train_panel.assets.clone(),
            scaler,
            target_columns: features.price_columns(n),
            network,
        })
    }

    /// Model with explicit parts, for tests and tooling.
    pub fn from_parts(
        config: LstmConfig,
        features: FeatureSet,
        assets: Vec<String>,
        scaler: MinMaxScaler,
        network: Network,
    ) -> Result<Self> {
        config.validate()?;
        let n = assets.len();
        let arch = config.architecture(n);
        if network.arch != arch {
            return Err(Error::Config(format!(
                "network architecture {:?} does not match config {:?}",
                network.arch, arch
            )));
        }
        if scaler.width() != config.input_width || features.width(n) != config.input_width {
            return Err(Error::Dimension {
                what: "scaler width",
                expected: config.input_width,
                got: scaler.width(),
            });
        }
        Ok(LstmModel {
            adam: AdamState::new(network.n_params()),
            target_columns: features.price_columns(n),
            config,
            features,
            assets,
            scaler,
            network,
        })
    }

    pub fn n_outputs(&self) -> usize {
        self.assets.len()
    }

    fn check_shape(&self, inputs: &[Vec<f64>]) -> Result<()> {
        if inputs.len() != self.config.window {
            return Err(Error::Dimension {
                what: "window length",
                expected: self.config.window,
                got: inputs.len(),
            });
        }
        if let Some(r) = inputs.iter().find(|r| r.len() != self.config.input_width) {
            return Err(Error::Dimension {
                what: "feature row width",
                expected: self.config.input_width,
                got: r.len(),
            });
        }
        Ok(())
    }

    /// Flattened scaled input sequence.
    pub(crate) fn scale_inputs(&self, inputs: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_shape(inputs)?;
        Ok(inputs.iter().flat_map(|r| self.scaler.scale(r)).collect())
    }

    pub(crate) fn scale_target(&self, target: &[f64]) -> Result<Vec<f64>> {
        if target.len() != self.n_outputs() {
            return Err(Error::Dimension {
                what: "target width",
                expected: self.n_outputs(),
                got: target.len(),
            });
        }
        Ok(target
            .iter()
            .zip(&self.target_columns)
            .map(|(&p, &c)| self.scaler.scale_value(c, p))
            .collect())
    }

    pub(crate) fn unscale_output(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.target_columns)
            .map(|(&v, &c)| self.scaler.inverse_value(c, v))
            .collect()
    }
}

/// Predicted next-day prices for one input window.
pub fn forward(model: &LstmModel, inputs: &[Vec<f64>]) -> Result<Vec<f64>> {
    let seq = model.scale_inputs(inputs)?;
    let mut trace = Trace::default();
    let y = model.network.forward(&seq, &mut trace);
    Ok(model.unscale_output(y))
}

/// Walk-forward predictions inside `segment`: one per row from
/// `segment.start + window` on, each built from the preceding `window` rows.
pub fn predict_series(
    model: &LstmModel,
    panel: &AlignedPanel,
    segment: Range<usize>,
) -> Result<Vec<(NaiveDate, Vec<f64>)>> {
    let w = model.config.window;
    if segment.end > panel.len() || segment.start > segment.end {
        return Err(Error::Config(format!(
            "segment {}..{} outside a panel of {} rows",
            segment.start,
            segment.end,
            panel.len()
        )));
    }
    if segment.len() < w + 1 {
        return Err(Error::InsufficientData(format!(
            "prediction segment of {} rows needs at least {}",
            segment.len(),
            w + 1
        )));
    }
    let rows: Vec<Vec<f64>> = segment.clone().map(|r| panel.feature_row(r, model.features)).collect();
    let mut trace = Trace::default();
    let mut out = Vec::with_capacity(segment.len() - w);
    for k in w..rows.len() {
        let seq = model.scale_inputs(&rows[k - w..k])?;
        let y = model.network.forward(&seq, &mut trace);
        out.push((panel.dates[segment.start + k], model.unscale_output(y)));
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    #[serde(default)]
    meta: BTreeMap<String, String>,
    config: LstmConfig,
    features: FeatureSet,
    assets: Vec<String>,
    scaler: MinMaxScaler,
    params: Vec<f64>,
    adam: AdamState,
}

/// Writes a JSON checkpoint; `meta` is free-form provenance kept alongside.
pub fn save_checkpoint<W: Write>(model: &LstmModel, meta: &BTreeMap<String, String>, writer: W) -> Result<()> {
    let ck = Checkpoint {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        meta: meta.clone(),
        config: model.config.clone(),
        features: model.features,
        assets: model.assets.clone(),
        scaler: model.scaler.clone(),
        params: model.network.params.clone(),
        adam: model.adam.clone(),
    };
    serde_json::to_writer(writer, &ck)?;
    Ok(())
}

pub fn load_checkpoint<R: Read>(reader: R) -> Result<LstmModel> {
    let ck: Checkpoint = serde_json::from_reader(reader)?;
    if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
        return Err(Error::Config(format!(
            "unsupported checkpoint {} v{} (expected {} v{})",
            ck.format, ck.version, CHECKPOINT_FORMAT, CHECKPOINT_VERSION
        )));
    }
    let mut network = Network::zeros(ck.config.architecture(ck.assets.len()));
    if ck.params.len() != network.n_params() {
        return Err(Error::Dimension {
            what: "checkpoint parameters",
            expected: network.n_params(),
            got: ck.params.len(),
        });
    }
    network.params = ck.params;
    let mut model = LstmModel::from_parts(ck.config, ck.features, ck.assets, ck.scaler, network)?;
    if ck.adam.m.len() == model.network.n_params() && ck.adam.v.len() == model.network.n_params() {
        model.adam = ck.adam;
    }
    Ok(model)
}
