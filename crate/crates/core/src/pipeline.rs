//! End-to-end experiment: train forecasters on the early rows of a panel,
//! then backtest every strategy over the test rows.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backtest::{compare_strategies, run_backtest, ComparisonReport, GrossReturns, WealthCurve};
use crate::error::{Error, Result};
use crate::lstm::{make_windows, predict_series, train, LstmConfig, LstmModel, TrainReport};
use crate::market_data::{AlignedPanel, FeatureSet, SplitBounds, SplitSpec};
use crate::portfolio::{strategy_weights, MarketWindow, MeanVarianceConfig, StrategyKind};

/// A row of the strategy report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    BuyAndHold,
    Rebalancing,
    BestStock,
    /// Mean-variance on forecasts from prices and volume only.
    Lstm,
    /// Mean-variance on forecasts that also see the sentiment features.
    LstmSentiment,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::BuyAndHold,
        Strategy::Rebalancing,
        Strategy::BestStock,
        Strategy::Lstm,
        Strategy::LstmSentiment,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Strategy::BuyAndHold => "BAH",
            Strategy::Rebalancing => "Rebalancing",
            Strategy::BestStock => "BestStock",
            Strategy::Lstm => "LSTM",
            Strategy::LstmSentiment => "LSTM+S",
        }
    }

    pub fn kind(self) -> StrategyKind {
        match self {
            Strategy::BuyAndHold => StrategyKind::BuyAndHold,
            Strategy::Rebalancing => StrategyKind::Rebalancing,
            Strategy::BestStock => StrategyKind::BestStock,
            Strategy::Lstm | Strategy::LstmSentiment => StrategyKind::MeanVariancePredictive,
        }
    }

    /// Forecaster inputs, for the model-driven strategies.
    pub fn features(self) -> Option<FeatureSet> {
        match self {
            Strategy::Lstm => Some(FeatureSet::PriceOnly),
            Strategy::LstmSentiment => Some(FeatureSet::WithSentiment),
            _ => None,
        }
    }

    pub fn for_features(set: FeatureSet) -> Strategy {
        match set {
            FeatureSet::PriceOnly => Strategy::Lstm,
            FeatureSet::WithSentiment => Strategy::LstmSentiment,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Ok(match norm.as_str() {
            "bah" | "buy_and_hold" => Strategy::BuyAndHold,
            "rebalancing" | "crp" => Strategy::Rebalancing,
            "beststock" | "best_stock" => Strategy::BestStock,
            "lstm" => Strategy::Lstm,
            "lstm+s" | "lstm_s" | "lstm_sentiment" => Strategy::LstmSentiment,
            _ => return Err(Error::Config(format!("unknown strategy '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub split: SplitSpec,
    /// `input_width` is recomputed per feature set.
    pub lstm: LstmConfig,
    pub mean_variance: MeanVarianceConfig,
    /// Independently seeded training runs of each forecaster.
    pub replicates: usize,
    /// Replicate `k` trains with seed `base_seed + k`.
    pub base_seed: u64,
    pub initial_capital: f64,
    pub strategies: Vec<Strategy>,
    /// Restricts the backtest to dates in `[from, to]` inside the test rows.
    pub window: Option<(NaiveDate, NaiveDate)>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            split: SplitSpec::default(),
            lstm: LstmConfig::default(),
            mean_variance: MeanVarianceConfig::default(),
            replicates: 10,
            base_seed: 0,
            initial_capital: crate::backtest::DEFAULT_INITIAL_CAPITAL,
            strategies: Strategy::ALL.to_vec(),
            window: None,
        }
    }
}

impl ExperimentConfig {
    pub fn replicate_seed(&self, k: usize) -> u64 {
        self.base_seed.wrapping_add(k as u64)
    }

    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        self.lstm.validate()?;
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if !(self.initial_capital > 0.0 && self.initial_capital.is_finite()) {
            return Err(Error::Config(format!(
                "initial capital must be positive, got {}",
                self.initial_capital
            )));
        }
        if self.mean_variance.count == 0 {
            return Err(Error::Config("monte carlo count must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("no strategies configured".into()));
        }
        if !self.strategies.contains(&Strategy::BuyAndHold) {
            return Err(Error::Config(
                "BAH is the benchmark and must be among the strategies".into(),
            ));
        }
        Ok(())
    }
}

/// Backtest rows: capital is invested at the close of row `start`, and the
/// periods end on rows `start + 1 ..= end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BacktestRange {
    pub start: usize,
    pub end: usize,
}

/// The whole test segment, or the dates of `window` within it.
pub fn backtest_range(
    panel: &AlignedPanel,
    bounds: &SplitBounds,
    window: Option<(NaiveDate, NaiveDate)>,
) -> Result<BacktestRange> {
    let test = &bounds.test;
    let range = match window {
        None => BacktestRange {
            start: test.start,
            end: test.end - 1,
        },
        Some((from, to)) => {
            let start = panel.lower_bound(from).max(test.start);
            let end = panel.dates.partition_point(|d| *d <= to).min(test.end);
            if end == 0 || end <= start + 1 {
                return Err(Error::InsufficientData(format!(
                    "backtest window {from}..{to} covers fewer than two test dates"
                )));
            }
            BacktestRange { start, end: end - 1 }
        }
    };
    if range.end <= range.start {
        return Err(Error::InsufficientData("test segment has no backtest periods".into()));
    }
    Ok(range)
}

/// Model fitted on the training rows, early-stopped on the validation rows.
pub fn fit_forecaster(
    panel: &AlignedPanel,
    bounds: &SplitBounds,
    lstm: &LstmConfig,
    features: FeatureSet,
    seed: u64,
) -> Result<(LstmModel, TrainReport)> {
    let config = LstmConfig {
        seed,
        ..lstm.for_features(features, panel.n_assets())
    };
    let w = config.window;
    let train_panel = panel.slice(bounds.train.clone());
    let mut model = LstmModel::new(&config, features, &train_panel)?;
    let train_windows = make_windows(&train_panel, features, w)?;
    // Validation targets lie in the validation rows; their inputs may reach
    // back into the training rows.
    let val_start = bounds.validation.start.saturating_sub(w);
    let val_windows = make_windows(&panel.slice(val_start..bounds.validation.end), features, w)?;
    let report = train(&mut model, &train_windows, &val_windows, &config)?;
    Ok((model, report))
}

/// Forecast of the prices at every row `range.start + 1 ..= range.end`.
pub fn forecast_range(model: &LstmModel, panel: &AlignedPanel, range: BacktestRange) -> Result<Vec<Vec<f64>>> {
    let w = model.config.window;
    let first = range.start + 1;
    if first < w {
        return Err(Error::InsufficientData(format!(
            "forecasting row {first} needs {w} earlier rows"
        )));
    }
    let preds = predict_series(model, panel, first - w..range.end + 1)?;
    Ok(preds.into_iter().map(|(_, p)| p).collect())
}

/// Wealth curve of one strategy over `range`.
pub fn run_strategy(
    strategy: Strategy,
    panel: &AlignedPanel,
    range: BacktestRange,
    predictions: Option<&[Vec<f64>]>,
    mv: &MeanVarianceConfig,
    initial_capital: f64,
) -> Result<WealthCurve> {
    let prices = panel.price_matrix();
    let window = MarketWindow {
        dates: &panel.dates,
        prices: &prices,
        start: range.start,
        end: range.end,
    };
    let schedule = strategy_weights(strategy.kind(), &window, predictions, mv)?;
    let returns = GrossReturns::from_prices(&panel.dates, &prices, range.start, range.end);
    run_backtest(&schedule, &returns, initial_capital)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecasterRun {
    pub features: FeatureSet,
    pub seed: u64,
    pub model: LstmModel,
    pub training: TrainReport,
    pub curve: WealthCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub bounds: SplitBounds,
    pub range: BacktestRange,
    /// One curve per configured strategy, in configuration order. Model
    /// strategies show their first replicate.
    pub curves: Vec<(Strategy, WealthCurve)>,
    /// Replicate runs, ordered by replicate then feature set.
    pub runs: Vec<ForecasterRun>,
    pub report: ComparisonReport,
}

impl ExperimentOutput {
    /// Final capitals of every replicate of `strategy`.
    pub fn replicate_capitals(&self, strategy: Strategy) -> Vec<f64> {
        self.runs
            .iter()
            .filter(|r| Some(r.features) == strategy.features())
            .map(|r| r.curve.final_value())
            .collect()
    }
}

/// Trains every configured forecaster `replicates` times and backtests all
/// strategies. Replicates run in parallel; results keep replicate order.
pub fn run_experiment(panel: &AlignedPanel, config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let bounds = config.split.bounds(panel.len())?;
    let range = backtest_range(panel, &bounds, config.window)?;

    let model_sets: Vec<FeatureSet> = config.strategies.iter().filter_map(|s| s.features()).collect();
    let jobs: Vec<(usize, FeatureSet)> = (0..config.replicates)
        .flat_map(|k| model_sets.iter().map(move |f| (k, *f)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(k, features)| {
            let seed = config.replicate_seed(k);
            let (model, training) = fit_forecaster(panel, &bounds, &config.lstm, features, seed)?;
            let preds = forecast_range(&model, panel, range)?;
            let curve = run_strategy(
                Strategy::for_features(features),
                panel,
                range,
                Some(&preds),
                &config.mean_variance,
                config.initial_capital,
            )?;
            Ok(ForecasterRun {
                features,
                seed,
                model,
                training,
                curve,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut curves = Vec::with_capacity(config.strategies.len());
    for &s in &config.strategies {
        let curve = match s.features() {
            Some(f) => runs
                .iter()
                .find(|r| r.features == f)
                .expect("every model strategy has a run")
                .curve
                .clone(),
            None => run_strategy(s, panel, range, None, &config.mean_variance, config.initial_capital)?,
        };
        curves.push((s, curve));
    }
    let bh = curves
        .iter()
        .find(|(s, _)| *s == Strategy::BuyAndHold)
        .map(|(_, c)| c.clone())
        .expect("validated");

    let mut out = ExperimentOutput {
        bounds,
        range,
        curves,
        runs,
        report: ComparisonReport {
            rows: Vec::new(),
            significance: None,
        },
    };
    let with_s = out.replicate_capitals(Strategy::LstmSentiment);
    let without = out.replicate_capitals(Strategy::Lstm);
    let pair = (with_s.len() >= 2 && without.len() >= 2).then(|| {
        (
            (Strategy::LstmSentiment.label(), with_s.as_slice()),
            (Strategy::Lstm.label(), without.as_slice()),
        )
    });
    let named: Vec<(String, WealthCurve)> = out
        .curves
        .iter()
        .map(|(s, c)| (s.label().to_string(), c.clone()))
        .collect();
    out.report = compare_strategies(&named, &bh, pair)?;
    Ok(out)
}
