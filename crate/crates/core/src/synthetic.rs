//! Seeded synthetic market in which each asset's next-day log return loads
//! on its own standardized (log) sentiment ratio. Used for fixtures,
//! benchmarks and end-to-end tests where the real scraped data is absent.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::PriceSeries;
use crate::sentiment::{label_text, sentiment_ratio, Label, Lexicon, SentimentRecord};

const POSITIVE_TEXTS: [&str; 6] = [
    "strong gains ahead",
    "bullish on this one",
    "earnings beat, great quarter",
    "analyst upgrade today",
    "shares rally on record profits",
    "optimistic about growth",
];

const NEGATIVE_TEXTS: [&str; 6] = [
    "weak quarter, big miss",
    "bearish setup here",
    "downgrade incoming",
    "shares plunge after lawsuit",
    "terrible guidance and layoffs",
    "fear of losses",
];

const NEUTRAL_TEXTS: [&str; 4] = [
    "earnings call on thursday",
    "what is the ticker for this",
    "annual meeting scheduled",
    "watching the open",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub assets: Vec<String>,
    /// Trading days generated (weekdays only).
    pub days: usize,
    pub start: NaiveDate,
    /// Target correlation between tomorrow's log return and today's
    /// standardized log sentiment ratio.
    pub rho: f64,
    /// Daily log-return volatility.
    pub volatility: f64,
    /// Pull of log price back toward its starting level.
    pub reversion: f64,
    /// Every asset/day gets at least this many opinionated posts.
    pub min_posts: u32,
    pub extra_posts_mean: f64,
    pub neutral_posts_mean: f64,
    /// Slope of the positive-post probability in the latent mood.
    pub mood_loading: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            assets: ["ALPHA", "BRAVO", "CHARLIE", "DELTA", "ECHO"]
                .map(String::from)
                .to_vec(),
            days: 1250,
            start: NaiveDate::from_ymd_opt(2015, 1, 5).expect("valid date"),
            rho: 0.3,
            volatility: 0.02,
            reversion: 0.02,
            min_posts: 6,
            extra_posts_mean: 6.0,
            neutral_posts_mean: 2.0,
            mood_loading: 1.0,
            seed: 7,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.assets.is_empty() {
            return Err(Error::Config("synthetic market needs at least one asset".into()));
        }
        if self.days < 2 {
            return Err(Error::Config("synthetic market needs at least 2 days".into()));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::Config(format!("rho {} outside [-1, 1]", self.rho)));
        }
        if !(self.volatility > 0.0) || self.reversion < 0.0 {
            return Err(Error::Config(
                "volatility must be positive and reversion non-negative".into(),
            ));
        }
        if self.extra_posts_mean < 0.0 || self.neutral_posts_mean < 0.0 {
            return Err(Error::Config("post means must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMarket {
    pub prices: Vec<PriceSeries>,
    /// Labeled by the built-in lexicon.
    pub records: Vec<SentimentRecord>,
    /// Daily smoothed sentiment ratio per asset.
    pub ratios: Vec<Vec<f64>>,
}

impl SyntheticMarket {
    pub fn dates(&self) -> &[NaiveDate] {
        &self.prices[0].dates
    }

    /// Log returns of asset `a`; element `t` is the move from day `t` to `t + 1`.
    pub fn log_returns(&self, a: usize) -> Vec<f64> {
        self.prices[a]
            .adj_close
            .windows(2)
            .map(|w| (w[1] / w[0]).ln())
            .collect()
    }
}

/// Weekdays starting at `start` (rolled forward past a weekend).
pub fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

fn standardize(xs: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt();
    if sd > 0.0 {
        xs.iter().map(|x| (x - m) / sd).collect()
    } else {
        vec![0.0; xs.len()]
    }
}

pub fn generate(config: &SyntheticConfig) -> Result<SyntheticMarket> {
    config.validate()?;
    let lexicon = Lexicon::builtin();
    let dates = business_days(config.start, config.days);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let extra = (config.extra_posts_mean > 0.0).then(|| Poisson::new(config.extra_posts_mean).expect("positive mean"));
    let neutral =
        (config.neutral_posts_mean > 0.0).then(|| Poisson::new(config.neutral_posts_mean).expect("positive mean"));
    let likes = Poisson::new(20.0).expect("positive mean");
    let retweets = Poisson::new(4.0).expect("positive mean");
    let comments = Poisson::new(2.0).expect("positive mean");

    let mut records = Vec::new();
    let mut ratios = Vec::with_capacity(config.assets.len());
    let mut prices = Vec::with_capacity(config.assets.len());
    for (a, asset) in config.assets.iter().enumerate() {
        let mut ratio = Vec::with_capacity(config.days);
        for &date in &dates {
            let mood: f64 = StandardNormal.sample(&mut rng);
            let p_pos = 1.0 / (1.0 + (-config.mood_loading * mood).exp());
            let m = config.min_posts as u64 + extra.map_or(0.0, |d| d.sample(&mut rng)) as u64;
            let n_pos = Binomial::new(m, p_pos).expect("valid binomial").sample(&mut rng);
            let n_neu = neutral.map_or(0.0, |d| d.sample(&mut rng)) as u64;
            let kinds = std::iter::repeat_n(Label::Positive, n_pos as usize)
                .chain(std::iter::repeat_n(Label::Negative, (m - n_pos) as usize))
                .chain(std::iter::repeat_n(Label::Neutral, n_neu as usize));
            for kind in kinds {
                let pool: &[&str] = match kind {
                    Label::Positive => &POSITIVE_TEXTS,
                    Label::Negative => &NEGATIVE_TEXTS,
                    Label::Neutral => &NEUTRAL_TEXTS,
                };
                let text = pool[rng.random_range(0..pool.len())];
                let (label, polarity) = label_text(text, &lexicon);
                records.push(SentimentRecord {
                    date,
                    asset_id: asset.clone(),
                    text: text.to_string(),
                    label,
                    polarity,
                    likes: likes.sample(&mut rng) as u64,
                    retweets: retweets.sample(&mut rng) as u64,
                    comments: comments.sample(&mut rng) as u64,
                });
            }
            ratio.push(sentiment_ratio(n_pos as usize, (m - n_pos) as usize));
        }

        let signal = standardize(&ratio.iter().map(|r| r.ln()).collect::<Vec<_>>());
        let noise_load = (1.0 - config.rho * config.rho).sqrt();
        let p0 = 20.0 + 15.0 * a as f64;
        let mut log_p = p0.ln();
        let mut adj_close = Vec::with_capacity(config.days);
        let mut volume = Vec::with_capacity(config.days);
        for t in 0..config.days {
            adj_close.push(log_p.exp());
            let vol_noise: f64 = StandardNormal.sample(&mut rng);
            volume.push((1.0e6 * (0.25 * vol_noise).exp()).round());
            let eps: f64 = StandardNormal.sample(&mut rng);
            let drift = -config.reversion * (log_p - p0.ln());
            log_p += config.volatility * (config.rho * signal[t] + noise_load * eps) + drift;
        }
        prices.push(PriceSeries::new(asset.clone(), dates.clone(), adj_close, volume)?);
        ratios.push(ratio);
    }
    Ok(SyntheticMarket {
        prices,
        records,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sentiment::daily_features;
    use crate::stats::pearson;

    #[test]
    fn canned_texts_label_as_intended() {
        let lex = Lexicon::builtin();
        for (pool, want) in [
            (&POSITIVE_TEXTS[..], Label::Positive),
            (&NEGATIVE_TEXTS[..], Label::Negative),
            (&NEUTRAL_TEXTS[..], Label::Neutral),
        ] {
            for t in pool {
                assert_eq!(label_text(t, &lex).0, want, "{t}");
            }
        }
    }

    #[test]
    fn weekdays_only() {
        let d = business_days(NaiveDate::from_ymd_opt(2024, 6, 1).unwrap(), 6);
        assert_eq!(d[0], NaiveDate::from_ymd_opt(2024, 6, 3).unwrap());
        assert_eq!(d[5], NaiveDate::from_ymd_opt(2024, 6, 10).unwrap());
    }

    #[test]
    fn returns_load_on_lagged_sentiment() {
        let cfg = SyntheticConfig {
            days: 1500,
            ..SyntheticConfig::default()
        };
        let m = generate(&cfg).unwrap();
        for a in 0..cfg.assets.len() {
            let r = m.log_returns(a);
            let s = &m.ratios[a][..r.len()];
            let c = pearson(&r, s).unwrap().statistic;
            assert!((0.2..0.4).contains(&c), "asset {a}: {c}");
        }
    }

    #[test]
    fn records_reproduce_the_ratios() {
        let cfg = SyntheticConfig {
            days: 40,
            ..SyntheticConfig::default()
        };
        let m = generate(&cfg).unwrap();
        let feats = daily_features(&m.records);
        for (a, asset) in cfg.assets.iter().enumerate() {
            let got: Vec<f64> = feats[asset].iter().map(|f| f.ratio).collect();
            assert_eq!(got, m.ratios[a]);
        }
        assert_eq!(m, generate(&cfg).unwrap());
    }
}
