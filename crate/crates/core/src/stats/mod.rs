//! Hypothesis tests: Pearson correlation, least squares, bivariate Granger
//! causality and the paired t-test.

mod granger;
mod ols;
pub mod special;

use serde::{Deserialize, Serialize};

pub use granger::{granger, GrangerLag, GrangerReport};
pub use ols::{ols, Design, OlsFit};
pub use special::{f_sf, student_t_sf, student_t_two_sided};

use crate::error::{Error, Result};

pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DegreesOfFreedom {
    One(f64),
    Two(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: DegreesOfFreedom,
    pub p_value: f64,
    pub reject_at_005: bool,
}

impl TestResult {
    pub fn new(statistic: f64, df: DegreesOfFreedom, p_value: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestResult {
            statistic,
            df,
            p_value,
            reject_at_005: p_value < SIGNIFICANCE,
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

/// Product-moment correlation with a two-sided t-test of `r = 0`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            what: "pearson",
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("pearson needs n >= 3, got {n}")));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("pearson: a series has zero variance".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let denom = 1.0 - r * r;
    let p = if denom <= 0.0 {
        0.0
    } else {
        student_t_two_sided(r * (df / denom).sqrt(), df)
    };
    Ok(TestResult::new(r, DegreesOfFreedom::One(df), p))
}

/// Two-sided paired t-test of `mean(a - b) = 0`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            what: "paired_t_test",
            expected: a.len(),
            got: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("paired t-test needs n >= 2, got {n}")));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let sd = sample_sd(&d);
    if !(sd > 0.0) {
        return Err(Error::Degenerate(
            "paired t-test: differences have zero variance".into(),
        ));
    }
    let t = mean(&d) / (sd / (n as f64).sqrt());
    let df = (n - 1) as f64;
    Ok(TestResult::new(
        t,
        DegreesOfFreedom::One(df),
        student_t_two_sided(t, df),
    ))
}
