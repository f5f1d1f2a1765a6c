//! Wealth simulation and performance measures.

use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::portfolio::{WeightSchedule, Weights};
use crate::stats::{mean, paired_t_test, sample_sd, TestResult};

pub const DEFAULT_INITIAL_CAPITAL: f64 = 10_000.0;
pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;

/// Benchmark returns smaller than this are skipped in the Sharpe ratio.
pub const BENCHMARK_RETURN_FLOOR: f64 = 1e-8;

/// Gross returns `p_t / p_{t-1}` per period, keyed by the period's end date.
#[derive(Debug, Clone, PartialEq)]
pub struct GrossReturns {
    pub start: NaiveDate,
    pub dates: Vec<NaiveDate>,
    pub rows: Vec<Vec<f64>>,
}

impl GrossReturns {
    /// Returns over rows `start + 1 ..= end` of a price matrix.
    pub fn from_prices(dates: &[NaiveDate], prices: &[Vec<f64>], start: usize, end: usize) -> Self {
        GrossReturns {
            start: dates[start],
            dates: dates[start + 1..=end].to_vec(),
            rows: (start + 1..=end)
                .map(|t| prices[t].iter().zip(&prices[t - 1]).map(|(a, b)| a / b).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WealthCurve {
    /// Start date followed by every period end date.
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
    /// Weights held over each period (one fewer than `values`).
    pub weights: Vec<Weights>,
}

impl WealthCurve {
    pub fn initial(&self) -> f64 {
        self.values[0]
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("curve is non-empty")
    }

    pub fn periods(&self) -> usize {
        self.values.len() - 1
    }

    /// Per-period simple returns of the curve.
    pub fn simple_returns(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] / w[0] - 1.0).collect()
    }
}

/// Applies `w_t = w_{t-1} * sum_n r_n^t s_n^t` with gross returns `r`.
pub fn run_backtest(schedule: &WeightSchedule, returns: &GrossReturns, initial_capital: f64) -> Result<WealthCurve> {
    if schedule.dates != returns.dates || schedule.weights.len() != returns.rows.len() {
        return Err(Error::Alignment(format!(
            "weight schedule ({} periods) and returns ({} periods) cover different dates",
            schedule.weights.len(),
            returns.rows.len()
        )));
    }
    if !(initial_capital.is_finite() && initial_capital > 0.0) {
        return Err(Error::Validation(format!(
            "initial capital must be positive, got {initial_capital}"
        )));
    }
    let mut values = Vec::with_capacity(returns.rows.len() + 1);
    values.push(initial_capital);
    let mut wealth = initial_capital;
    for (w, r) in schedule.weights.iter().zip(&returns.rows) {
        if w.len() != r.len() {
            return Err(Error::Dimension {
                what: "weights",
                expected: r.len(),
                got: w.len(),
            });
        }
        Weights::new(w.as_slice().to_vec())?;
        if let Some(g) = r.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::Validation(format!("gross return must be positive, got {g}")));
        }
        wealth *= w.as_slice().iter().zip(r).map(|(s, g)| s * g).sum::<f64>();
        values.push(wealth);
    }
    let mut dates = Vec::with_capacity(values.len());
    dates.push(returns.start);
    dates.extend_from_slice(&returns.dates);
    Ok(WealthCurve {
        dates,
        values,
        weights: schedule.weights.clone(),
    })
}

/// Final accumulated portfolio value over initial capital.
pub fn fapv(curve: &WealthCurve) -> f64 {
    curve.final_value() / curve.initial()
}

/// Final value of a strategy over the final value of buy-and-hold.
pub fn benchmark_value(curve: &WealthCurve, bh: &WealthCurve) -> Result<f64> {
    if curve.dates != bh.dates {
        return Err(Error::Alignment(
            "benchmark value needs curves over the same dates".into(),
        ));
    }
    Ok(curve.final_value() / bh.final_value())
}

/// Mean of the daily return ratios `R_p / R_bh` divided by
/// `sd(R_p) / sd(R_bh)`. Days with `|R_bh| < 1e-8` are left out of the mean.
pub fn sharpe_vs_bh(strategy: &[f64], bh: &[f64]) -> Result<f64> {
    if strategy.len() != bh.len() {
        return Err(Error::Alignment(format!(
            "{} strategy returns vs {} benchmark returns",
            strategy.len(),
            bh.len()
        )));
    }
    let ratios: Vec<f64> = strategy
        .iter()
        .zip(bh)
        .filter(|(_, b)| b.abs() >= BENCHMARK_RETURN_FLOOR)
        .map(|(p, b)| p / b)
        .collect();
    if ratios.is_empty() || bh.len() < 2 {
        return Err(Error::DegenerateBenchmark);
    }
    let sd_bh = sample_sd(bh);
    let sd_p = sample_sd(strategy);
    if !(sd_bh > 0.0) {
        return Err(Error::DegenerateBenchmark);
    }
    if !(sd_p > 0.0) {
        return Ok(0.0);
    }
    Ok(mean(&ratios) / (sd_p / sd_bh))
}

/// Largest relative drop from any earlier value to the terminal value,
/// floored at 0.
pub fn max_drawdown(curve: &WealthCurve) -> f64 {
    let v = &curve.values;
    let last = *v.last().expect("curve is non-empty");
    v[..v.len() - 1].iter().map(|x| (x - last) / x).fold(0.0, f64::max)
}

/// Conventional running peak-to-trough drawdown.
pub fn peak_to_trough_drawdown(curve: &WealthCurve) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut worst: f64 = 0.0;
    for v in &curve.values {
        peak = peak.max(*v);
        worst = worst.max((peak - v) / peak);
    }
    worst
}

/// `fapv^(periods_per_year / D) - 1` where `D` is the number of periods.
pub fn annualized_return(curve: &WealthCurve, periods_per_year: f64) -> f64 {
    fapv(curve).powf(periods_per_year / curve.periods() as f64) - 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfReport {
    pub final_capital: f64,
    pub fapv: f64,
    pub bv: f64,
    pub sharpe_vs_bh: f64,
    pub mdd: f64,
    pub mdd_peak_to_trough: f64,
    pub annualized_return: f64,
}

impl PerfReport {
    pub fn compute(curve: &WealthCurve, bh: &WealthCurve) -> Result<Self> {
        if curve.values.len() < 2 {
            return Err(Error::InsufficientData("performance needs at least one period".into()));
        }
        Ok(PerfReport {
            final_capital: curve.final_value(),
            fapv: fapv(curve),
            bv: benchmark_value(curve, bh)?,
            sharpe_vs_bh: sharpe_vs_bh(&curve.simple_returns(), &bh.simple_returns())?,
            mdd: max_drawdown(curve),
            mdd_peak_to_trough: peak_to_trough_drawdown(curve),
            annualized_return: annualized_return(curve, TRADING_DAYS_PER_YEAR),
        })
    }
}

/// Summary of two replicate samples plus their paired t-test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub label_a: String,
    pub label_b: String,
    pub mean_a: f64,
    pub mean_b: f64,
    pub sd_a: f64,
    pub sd_b: f64,
    pub observations: usize,
    pub test: TestResult,
}

impl PairedComparison {
    pub fn new(label_a: &str, a: &[f64], label_b: &str, b: &[f64]) -> Result<Self> {
        let test = paired_t_test(a, b)?;
        Ok(PairedComparison {
            label_a: label_a.into(),
            label_b: label_b.into(),
            mean_a: mean(a),
            mean_b: mean(b),
            sd_a: sample_sd(a),
            sd_b: sample_sd(b),
            observations: a.len(),
            test,
        })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "Models,{},{}", self.label_a, self.label_b)?;
        writeln!(out, "Mean,{:.2},{:.2}", self.mean_a, self.mean_b)?;
        writeln!(out, "Standard deviation,{:.2},{:.2}", self.sd_a, self.sd_b)?;
        writeln!(out, "Observations,{},{}", self.observations, self.observations)?;
        let df = match self.test.df {
            crate::stats::DegreesOfFreedom::One(d) => d,
            crate::stats::DegreesOfFreedom::Two(d, _) => d,
        };
        writeln!(out, "degrees of freedom,{df},")?;
        writeln!(out, "t statistic,{:.4},", self.test.statistic)?;
        writeln!(out, "p-value,{:.4},", self.test.p_value)?;
        Ok(())
    }
}

/// Column header of the strategy table.
pub const REPORT_COLUMNS: [&str; 7] = ["Models", "Capital", "fAPV", "BV", "SR", "MDD(%)", "AR(%)"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub name: String,
    pub perf: PerfReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<StrategyRow>,
    pub significance: Option<PairedComparison>,
}

/// Builds the strategy table (every curve measured against `bh`) and, when
/// replicate capitals are supplied, the paired t-test between them.
pub fn compare_strategies(
    curves: &[(String, WealthCurve)],
    bh: &WealthCurve,
    replicates: Option<((&str, &[f64]), (&str, &[f64]))>,
) -> Result<ComparisonReport> {
    let rows = curves
        .iter()
        .map(|(name, c)| {
            Ok(StrategyRow {
                name: name.clone(),
                perf: PerfReport::compute(c, bh)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let significance = match replicates {
        Some(((la, a), (lb, b))) => Some(PairedComparison::new(la, a, lb, b)?),
        None => None,
    };
    Ok(ComparisonReport { rows, significance })
}

impl ComparisonReport {
    /// Table with one row per strategy. Lines starting with `#` are metadata.
    pub fn write_csv<W: Write>(&self, mut out: W, preamble: &[String]) -> Result<()> {
        for line in preamble {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "{}", REPORT_COLUMNS.join(","))?;
        for r in &self.rows {
            let p = &r.perf;
            writeln!(
                out,
                "{},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2}",
                r.name,
                p.final_capital,
                p.fapv,
                p.bv,
                p.sharpe_vs_bh,
                100.0 * p.mdd,
                100.0 * p.annualized_return
            )?;
        }
        Ok(())
    }
}

pub fn write_curves_csv<W: Write>(mut out: W, curves: &[(String, WealthCurve)], preamble: &[String]) -> Result<()> {
    for line in preamble {
        writeln!(out, "# {line}")?;
    }
    let names: Vec<&str> = curves.iter().map(|(n, _)| n.as_str()).collect();
    writeln!(out, "date,{}", names.join(","))?;
    let Some((_, first)) = curves.first() else {
        return Ok(());
    };
    for (i, d) in first.dates.iter().enumerate() {
        write!(out, "{}", d.format(crate::market_data::DATE_FORMAT))?;
        for (_, c) in curves {
            write!(out, ",{:.6}", c.values[i])?;
        }
        writeln!(out)?;
    }
    Ok(())
}
