use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ols::{ols, Design};
use super::special::f_sf;
use super::{DegreesOfFreedom, TestResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrangerLag {
    pub lag: usize,
    pub test: TestResult,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
    /// Rows used by both regressions.
    pub observations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrangerReport {
    pub lags: Vec<GrangerLag>,
}

impl GrangerReport {
    pub fn min_p(&self) -> Option<&GrangerLag> {
        self.lags
            .iter()
            .min_by(|a, b| a.test.p_value.total_cmp(&b.test.p_value))
    }
}

/// Nested-regression F-test of whether lags of `driver` improve a
/// regression of `target` on its own lags, for every lag 1..=max_lag.
pub fn granger(target: &[f64], driver: &[f64], max_lag: usize) -> Result<GrangerReport> {
    if target.len() != driver.len() {
        return Err(Error::Dimension {
            what: "granger",
            expected: target.len(),
            got: driver.len(),
        });
    }
    if max_lag == 0 {
        return Err(Error::Config("granger max_lag must be at least 1".into()));
    }
    if target.len() <= 3 * max_lag + 1 {
        return Err(Error::InsufficientData(format!(
            "granger with max_lag {max_lag} needs more than {} rows, got {}",
            3 * max_lag + 1,
            target.len()
        )));
    }
    let lags = (1..=max_lag)
        .into_par_iter()
        .map(|n| granger_at(target, driver, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(GrangerReport { lags })
}

fn granger_at(target: &[f64], driver: &[f64], n: usize) -> Result<GrangerLag> {
    let len = target.len();
    let rows = len - n;
    let y = &target[n..];
    let lagged = |series: &[f64], i: usize| -> Vec<f64> { (n..len).map(|t| series[t - i]).collect() };
    let own: Vec<Vec<f64>> = (1..=n).map(|i| lagged(target, i)).collect();
    let other: Vec<Vec<f64>> = (1..=n).map(|i| lagged(driver, i)).collect();

    let restricted_cols: Vec<&[f64]> = own.iter().map(|c| c.as_slice()).collect();
    let mut full_cols = restricted_cols.clone();
    full_cols.extend(other.iter().map(|c| c.as_slice()));

    let rss_r = ols(y, &Design::with_intercept(&restricted_cols)?)?.rss;
    let rss_u = ols(y, &Design::with_intercept(&full_cols)?)?.rss;

    let df1 = n as f64;
    let df2 = (rows - 2 * n - 1) as f64;
    let f = if rss_u > 0.0 {
        (((rss_r - rss_u) / df1) / (rss_u / df2)).max(0.0)
    } else if rss_r > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(GrangerLag {
        lag: n,
        test: TestResult::new(f, DegreesOfFreedom::Two(df1, df2), f_sf(f, df1, df2)),
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
        observations: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| StandardNormal.sample(rng)).collect()
    }

    #[test]
    fn causal_pair_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = noise(&mut rng, 300);
        let eps = noise(&mut rng, 300);
        let r: Vec<f64> = (0..300)
            .map(|t| if t == 0 { 0.0 } else { 0.8 * s[t - 1] + 0.1 * eps[t] })
            .collect();
        let rep = granger(&r, &s, 8).unwrap();
        assert_eq!(rep.lags.len(), 8);
        assert!(rep.lags[0].test.p_value < 0.01);
        for l in &rep.lags {
            assert!(l.rss_unrestricted <= l.rss_restricted + 1e-9);
            assert_eq!(
                l.test.df,
                DegreesOfFreedom::Two(l.lag as f64, (300 - 3 * l.lag - 1) as f64)
            );
        }
    }

    #[test]
    fn needs_enough_rows() {
        let x = vec![0.0; 25];
        assert!(matches!(granger(&x, &x, 8), Err(Error::InsufficientData(_))));
        assert!(granger(&x[..3], &x[..4], 1).is_err());
    }

    #[test]
    fn f_statistic_matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (r, s) = (noise(&mut rng, 60), noise(&mut rng, 60));
        let rep = granger(&r, &s, 2).unwrap();
        let l = &rep.lags[1];
        let t = 58.0;
        let want = ((l.rss_restricted - l.rss_unrestricted) / 2.0) / (l.rss_unrestricted / (t - 5.0));
        assert!((l.test.statistic - want).abs() < 1e-12 * want.max(1.0));
    }
}
