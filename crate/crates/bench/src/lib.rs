//! Shared fixtures for the benchmarks.

use sentfolio::market_data::{align_panel, AlignedPanel};
use sentfolio::sentiment::daily_features;
use sentfolio::synthetic::{generate, SyntheticConfig};
use sentfolio::Moments;

/// Five-asset synthetic panel with `days` rows.
pub fn panel(days: usize) -> AlignedPanel {
    let m = generate(&SyntheticConfig {
        days,
        ..SyntheticConfig::default()
    })
    .expect("default synthetic config is valid");
    align_panel(&m.prices, &daily_features(&m.records)).expect("synthetic prices align")
}

/// Daily-scale moments for `n` assets with pairwise correlation 0.3.
pub fn moments(n: usize) -> Moments {
    let mu = (0..n).map(|i| 0.0002 * (i as f64 + 1.0)).collect();
    let sd: Vec<f64> = (0..n).map(|i| 0.01 + 0.002 * i as f64).collect();
    let mut cov = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let rho = if i == j { 1.0 } else { 0.3 };
            cov[i * n + j] = rho * sd[i] * sd[j];
        }
    }
    Moments::new(mu, cov).expect("valid moments")
}
