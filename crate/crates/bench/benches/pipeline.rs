use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use sentfolio::lstm::{analytic_gradient, forward, make_windows};
use sentfolio::portfolio::CandidateSet;
use sentfolio::sentiment::label_text;
use sentfolio::stats::granger;
use sentfolio::{FeatureSet, Lexicon, LstmConfig, LstmModel};
use sentfolio_bench::{moments, panel};

fn mean_variance(c: &mut Criterion) {
    let m = moments(5);
    c.bench_function("candidate_sample_50k", |b| {
        b.iter(|| CandidateSet::sample(5, 50_000, black_box(0)))
    });
    let set = CandidateSet::sample(5, 50_000, 0);
    c.bench_function("max_sharpe_select_50k", |b| {
        b.iter(|| set.select(black_box(&m), 0.0).unwrap())
    });
}

fn lstm(c: &mut Criterion) {
    let p = panel(120);
    let features = FeatureSet::WithSentiment;
    let config = LstmConfig::default().for_features(features, p.n_assets());
    let model = LstmModel::new(&config, features, &p).unwrap();
    let windows = make_windows(&p, features, config.window).unwrap();
    let w = &windows[0];
    c.bench_function("lstm_forward", |b| {
        b.iter(|| forward(&model, black_box(&w.inputs)).unwrap())
    });
    c.bench_function("lstm_forward_backward", |b| {
        b.iter(|| analytic_gradient(&model, black_box(w)).unwrap())
    });
}

fn stats(c: &mut Criterion) {
    let p = panel(1250);
    let prices = &p.columns[0].adj_close;
    let target: Vec<f64> = prices.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
    let driver = p.columns[0].ratio[1..].to_vec();
    c.bench_function("granger_8_lags_1250", |b| {
        b.iter(|| granger(black_box(&target), &driver, 8).unwrap())
    });
}

fn sentiment(c: &mut Criterion) {
    let lex = Lexicon::builtin();
    let text = "not a great quarter, but very strong guidance and an analyst upgrade";
    c.bench_function("label_text", |b| b.iter(|| label_text(black_box(text), &lex)));
}

criterion_group!(benches, mean_variance, lstm, stats, sentiment);
criterion_main!(benches);
