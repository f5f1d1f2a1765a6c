//! Monte-Carlo mean-variance selection and the allocation strategies.

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Volatility below which a portfolio's Sharpe ratio is defined as 0.
pub const VOLATILITY_FLOOR: f64 = 1e-12;

/// Long-only, fully invested allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("weights are empty".into()));
        }
        if values.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Validation(format!("weights must be non-negative: {values:?}")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("weights sum to {sum}, not 1")));
        }
        Ok(Weights(values))
    }

    pub fn equal(n: usize) -> Self {
        Weights(vec![1.0 / n as f64; n])
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Weights(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Expected returns and covariance of per-period simple returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mu: Vec<f64>,
    /// Row-major `n x n`.
    pub cov: Vec<f64>,
}

impl Moments {
    pub fn new(mu: Vec<f64>, cov: Vec<f64>) -> Result<Self> {
        let m = Moments { mu, cov };
        m.validate()?;
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.n() + j]
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 || self.cov.len() != n * n {
            return Err(Error::Dimension {
                what: "covariance",
                expected: n * n,
                got: self.cov.len(),
            });
        }
        if self.mu.iter().chain(&self.cov).any(|v| !v.is_finite()) {
            return Err(Error::Validation("moments contain non-finite values".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if (self.cov(i, j) - self.cov(j, i)).abs() > 1e-12 {
                    return Err(Error::Validation(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        // Cholesky of cov + 1e-10 I succeeds iff no eigenvalue is below -1e-10.
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.cov(i, j) + if i == j { 1e-10 } else { 0.0 };
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::Validation("covariance is not positive semi-definite".into()));
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(())
    }
}

/// Sample means and `n - 1` covariance of per-asset return series.
pub fn estimate_moments(returns: &[Vec<f64>]) -> Result<Moments> {
    let n = returns.len();
    if n == 0 {
        return Err(Error::InsufficientData("no assets".into()));
    }
    let len = returns[0].len();
    if let Some(r) = returns.iter().find(|r| r.len() != len) {
        return Err(Error::Dimension {
            what: "return window",
            expected: len,
            got: r.len(),
        });
    }
    if len < 2 {
        return Err(Error::InsufficientData(format!(
            "moments need a window of >= 2 returns, got {len}"
        )));
    }
    let mu: Vec<f64> = returns.iter().map(|r| r.iter().sum::<f64>() / len as f64).collect();
    let mut cov = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let c = returns[i]
                .iter()
                .zip(&returns[j])
                .map(|(a, b)| (a - mu[i]) * (b - mu[j]))
                .sum::<f64>()
                / (len - 1) as f64;
            cov[i * n + j] = c;
            cov[j * n + i] = c;
        }
    }
    Ok(Moments { mu, cov })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierSample {
    pub weights: Weights,
    pub exp_return: f64,
    pub volatility: f64,
    pub sharpe: f64,
}

fn stats_of(w: &[f64], m: &Moments, risk_free: f64) -> (f64, f64, f64) {
    let n = m.n();
    let exp_return: f64 = w.iter().zip(&m.mu).map(|(a, b)| a * b).sum();
    let mut var = 0.0;
    for i in 0..n {
        let row = &m.cov[i * n..(i + 1) * n];
        var += w[i] * row.iter().zip(w).map(|(c, wj)| c * wj).sum::<f64>();
    }
    let volatility = var.max(0.0).sqrt();
    let sharpe = if volatility < VOLATILITY_FLOOR {
        0.0
    } else {
        (exp_return - risk_free) / volatility
    };
    (exp_return, volatility, sharpe)
}

pub fn portfolio_stats(w: &Weights, m: &Moments, risk_free: f64) -> FrontierSample {
    let (exp_return, volatility, sharpe) = stats_of(w.as_slice(), m, risk_free);
    FrontierSample {
        weights: w.clone(),
        exp_return,
        volatility,
        sharpe,
    }
}

/// A seeded batch of portfolios drawn uniformly from the simplex.
///
/// Draws come from one sequential stream, so the first `k` portfolios of a
/// larger batch with the same seed are exactly the `k`-portfolio batch.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    n_assets: usize,
    flat: Vec<f64>,
}

impl CandidateSet {
    pub fn sample(n_assets: usize, count: usize, seed: u64) -> Self {
        assert!(n_assets >= 1 && count >= 1, "need at least one asset and one sample");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut flat = Vec::with_capacity(n_assets * count);
        let mut draw = vec![0.0; n_assets];
        for _ in 0..count {
            for d in draw.iter_mut() {
                *d = Exp1.sample(&mut rng);
            }
            let total: f64 = draw.iter().sum();
            flat.extend(draw.iter().map(|d| d / total));
        }
        CandidateSet { n_assets, flat }
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.n_assets
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn n_assets(&self) -> usize {
        self.n_assets
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.flat[i * self.n_assets..(i + 1) * self.n_assets]
    }

    pub fn weights(&self, i: usize) -> Weights {
        Weights(self.get(i).to_vec())
    }

    pub fn evaluate(&self, i: usize, m: &Moments, risk_free: f64) -> FrontierSample {
        let (exp_return, volatility, sharpe) = stats_of(self.get(i), m, risk_free);
        FrontierSample {
            weights: self.weights(i),
            exp_return,
            volatility,
            sharpe,
        }
    }

    /// Every candidate's statistics, in sample order.
    pub fn frontier(&self, m: &Moments, risk_free: f64) -> Vec<FrontierSample> {
        (0..self.len())
            .into_par_iter()
            .map(|i| self.evaluate(i, m, risk_free))
            .collect()
    }

    /// Index and statistics of the maximum-Sharpe candidate; ties go to the
    /// lowest index, so the answer does not depend on the worker count.
    pub fn select(&self, m: &Moments, risk_free: f64) -> Result<(usize, FrontierSample)> {
        if m.n() != self.n_assets {
            return Err(Error::Dimension {
                what: "moments",
                expected: self.n_assets,
                got: m.n(),
            });
        }
        #[derive(Clone, Copy)]
        struct Best {
            index: usize,
            sharpe: f64,
            live: bool,
        }
        fn better(a: Best, b: Best) -> Best {
            match a.sharpe.total_cmp(&b.sharpe) {
                std::cmp::Ordering::Greater => Best {
                    live: a.live || b.live,
                    ..a
                },
                std::cmp::Ordering::Less => Best {
                    live: a.live || b.live,
                    ..b
                },
                std::cmp::Ordering::Equal => Best {
                    index: a.index.min(b.index),
                    sharpe: a.sharpe,
                    live: a.live || b.live,
                },
            }
        }
        let best = (0..self.len())
            .into_par_iter()
            .with_min_len(1024)
            .map(|i| {
                let (_, vol, sharpe) = stats_of(self.get(i), m, risk_free);
                Best {
                    index: i,
                    sharpe,
                    live: vol >= VOLATILITY_FLOOR,
                }
            })
            .reduce_with(better)
            .expect("candidate set is non-empty");
        if !best.live {
            return Err(Error::DegenerateMarket);
        }
        Ok((best.index, self.evaluate(best.index, m, risk_free)))
    }
}

pub fn sample_simplex(n_assets: usize, count: usize, seed: u64) -> Vec<Weights> {
    let set = CandidateSet::sample(n_assets, count, seed);
    (0..set.len()).map(|i| set.weights(i)).collect()
}

/// Maximum-Sharpe portfolio among `count` seeded random portfolios.
pub fn mean_variance_select(m: &Moments, count: usize, seed: u64, risk_free: f64) -> Result<FrontierSample> {
    m.validate()?;
    CandidateSet::sample(m.n(), count, seed)
        .select(m, risk_free)
        .map(|(_, s)| s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    BuyAndHold,
    Rebalancing,
    BestStock,
    MeanVariancePredictive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeanVarianceConfig {
    pub count: usize,
    pub seed: u64,
    pub risk_free: f64,
    /// Trailing returns used for the covariance estimate.
    pub cov_window: usize,
}

impl Default for MeanVarianceConfig {
    fn default() -> Self {
        MeanVarianceConfig {
            count: 50_000,
            seed: 0,
            risk_free: 0.0,
            cov_window: 50,
        }
    }
}

/// Price history for a backtest. Periods run over rows `start + 1 ..= end`;
/// rows before `start` are history available to the strategies.
#[derive(Debug, Clone, Copy)]
pub struct MarketWindow<'a> {
    pub dates: &'a [NaiveDate],
    /// One row per date, one price per asset.
    pub prices: &'a [Vec<f64>],
    pub start: usize,
    pub end: usize,
}

impl MarketWindow<'_> {
    pub fn periods(&self) -> usize {
        self.end - self.start
    }

    pub fn n_assets(&self) -> usize {
        self.prices[self.start].len()
    }

    fn check(&self) -> Result<()> {
        if self.dates.len() != self.prices.len() {
            return Err(Error::Alignment(format!(
                "{} dates for {} price rows",
                self.dates.len(),
                self.prices.len()
            )));
        }
        if self.end >= self.prices.len() || self.end <= self.start {
            return Err(Error::InsufficientData(format!(
                "backtest window {}..={} needs at least one period within {} rows",
                self.start,
                self.end,
                self.prices.len()
            )));
        }
        Ok(())
    }
}

/// Weights held over each period, keyed by the period's end date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSchedule {
    pub dates: Vec<NaiveDate>,
    pub weights: Vec<Weights>,
}

/// Produces the weights each strategy holds over every period of `window`.
/// `predictions[k]` is the forecast of the prices at row `start + 1 + k`,
/// required only by [`StrategyKind::MeanVariancePredictive`].
pub fn strategy_weights(
    kind: StrategyKind,
    window: &MarketWindow<'_>,
    predictions: Option<&[Vec<f64>]>,
    mv: &MeanVarianceConfig,
) -> Result<WeightSchedule> {
    window.check()?;
    let n = window.n_assets();
    let p = window.prices;
    let (start, end) = (window.start, window.end);
    let mut weights = Vec::with_capacity(window.periods());
    match kind {
        StrategyKind::Rebalancing => weights.resize(window.periods(), Weights::equal(n)),
        StrategyKind::BuyAndHold => {
            let mut w = Weights::equal(n);
            for t in start + 1..=end {
                weights.push(w.clone());
                let grown: Vec<f64> = (0..n).map(|i| w.0[i] * p[t][i] / p[t - 1][i]).collect();
                let total: f64 = grown.iter().sum();
                w = Weights(grown.into_iter().map(|g| g / total).collect());
            }
        }
        StrategyKind::BestStock => {
            for t in start + 1..=end {
                let d = t - 1;
                if d == start {
                    weights.push(Weights::equal(n));
                    continue;
                }
                let mut best = 0;
                for i in 1..n {
                    if p[d][i] / p[start][i] > p[d][best] / p[start][best] {
                        best = i;
                    }
                }
                weights.push(Weights::basis(n, best));
            }
        }
        StrategyKind::MeanVariancePredictive => {
            let predictions =
                predictions.ok_or_else(|| Error::Config("mean-variance strategy needs price predictions".into()))?;
            if predictions.len() != window.periods() {
                return Err(Error::Alignment(format!(
                    "{} predictions for {} periods",
                    predictions.len(),
                    window.periods()
                )));
            }
            let candidates = CandidateSet::sample(n, mv.count, mv.seed);
            for (k, t) in (start + 1..=end).enumerate() {
                let d = t - 1;
                let pred = &predictions[k];
                if pred.len() != n {
                    return Err(Error::Dimension {
                        what: "prediction row",
                        expected: n,
                        got: pred.len(),
                    });
                }
                let mu: Vec<f64> = (0..n).map(|i| pred[i] / p[d][i] - 1.0).collect();
                let w = mv.cov_window.min(d);
                if w < 2 {
                    return Err(Error::InsufficientData(format!(
                        "covariance for period ending {} needs >= 2 trailing returns",
                        window.dates[t]
                    )));
                }
                let trailing: Vec<Vec<f64>> = (0..n)
                    .map(|i| (d + 1 - w..=d).map(|j| p[j][i] / p[j - 1][i] - 1.0).collect())
                    .collect();
                let cov = estimate_moments(&trailing)?.cov;
                let moments = Moments { mu, cov };
                let chosen = match candidates.select(&moments, mv.risk_free) {
                    Ok((i, _)) => candidates.weights(i),
                    Err(Error::DegenerateMarket) => Weights::equal(n),
                    Err(e) => return Err(e),
                };
                weights.push(chosen);
            }
        }
    }
    Ok(WeightSchedule {
        dates: window.dates[start + 1..=end].to_vec(),
        weights,
    })
}
