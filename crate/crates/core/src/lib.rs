//! Sentiment-aware portfolio selection.
//!
//! Social-media sentiment is aggregated per asset and day, joined with
//! prices into an [`AlignedPanel`], tested for correlation and Granger
//! causality against returns, and fed with prices into an LSTM forecaster.
//! Forecasts drive a Monte-Carlo mean-variance allocator that is backtested
//! against buy-and-hold, constant rebalancing and best-stock baselines.

pub mod backtest;
pub mod error;
pub mod lstm;
pub mod market_data;
pub mod pipeline;
pub mod portfolio;
pub mod sentiment;
pub mod stats;
pub mod synthetic;

pub use backtest::{ComparisonReport, GrossReturns, PairedComparison, PerfReport, WealthCurve};
pub use error::{Error, Result};
pub use lstm::{LstmConfig, LstmModel, TrainReport};
pub use market_data::{AlignedPanel, FeatureSet, PriceSeries, SentimentFeatures, SplitSpec};
pub use pipeline::{ExperimentConfig, ExperimentOutput, Strategy};
pub use portfolio::{Moments, StrategyKind, WeightSchedule, Weights};
pub use sentiment::{Label, Lexicon, SentimentRecord};
pub use stats::TestResult;
