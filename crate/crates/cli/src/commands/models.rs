use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

use sentfolio::backtest::{compare_strategies, write_curves_csv};
use sentfolio::lstm::{load_checkpoint, save_checkpoint};
use sentfolio::market_data::{AlignedPanel, SplitBounds};
use sentfolio::pipeline::{backtest_range, fit_forecaster, forecast_range, run_strategy, BacktestRange};
use sentfolio::portfolio::{estimate_moments, CandidateSet};
use sentfolio::{ComparisonReport, FeatureSet, LstmConfig, LstmModel, Strategy, WealthCurve};

use super::{create_file, create_output, finish, load_panel, open_input, write_svg, MODEL_DIR};
use crate::config::Context;
use crate::error::{CliError, CliResult};
use crate::svg;

fn model_tag(features: FeatureSet) -> &'static str {
    match features {
        FeatureSet::PriceOnly => "lstm",
        FeatureSet::WithSentiment => "lstm_s",
    }
}

fn checkpoint_name(features: FeatureSet, seed: u64) -> String {
    format!("{MODEL_DIR}/{}_seed{seed}.json", model_tag(features))
}

/// (replicate seed, feature set) for every model the config calls for.
fn model_jobs(ctx: &Context) -> CliResult<Vec<(u64, FeatureSet)>> {
    let exp = ctx.config.experiment(None)?;
    let sets: Vec<FeatureSet> = exp.strategies.iter().filter_map(|s| s.features()).collect();
    Ok((0..exp.replicates)
        .flat_map(|k| {
            let seed = exp.replicate_seed(k);
            sets.iter().map(move |f| (seed, *f))
        })
        .collect())
}

fn bounds(ctx: &Context, panel: &AlignedPanel) -> CliResult<SplitBounds> {
    Ok(ctx.config.split.bounds(panel.len())?)
}

pub fn train(ctx: &Context) -> CliResult<()> {
    let panel = load_panel(ctx)?;
    let b = bounds(ctx, &panel)?;
    let jobs = model_jobs(ctx)?;
    if jobs.is_empty() {
        println!("no model strategies configured");
        return Ok(());
    }
    let fitted = jobs
        .par_iter()
        .map(|&(seed, f)| fit_forecaster(&panel, &b, &ctx.config.lstm, f, seed))
        .collect::<sentfolio::Result<Vec<_>>>()?;

    let mut meta = BTreeMap::new();
    meta.insert("config_hash".to_string(), ctx.hash.clone());
    for (&(seed, f), (model, report)) in jobs.iter().zip(&fitted) {
        meta.insert("seed".to_string(), seed.to_string());
        let name = checkpoint_name(f, seed);
        let path = ctx.out(&name);
        let mut w = create_file(&path)?;
        save_checkpoint(model, &meta, &mut w)?;
        finish(&path, w)?;

        let loss = name.replace(".json", "_loss.csv");
        let (path, mut w) = create_output(ctx, &loss)?;
        report.write_csv(&mut w, &[])?;
        finish(&path, w)?;
        println!(
            "{} seed={seed} best_epoch={} val_mse={:.6e}",
            model_tag(f),
            report.best_epoch,
            report.best_val_mse()
        );
    }
    Ok(())
}

struct Evaluation {
    range: BacktestRange,
    curves: Vec<(Strategy, WealthCurve)>,
    /// Final capital per replicate seed for each model strategy.
    replicates: BTreeMap<u64, BTreeMap<Strategy, f64>>,
    report: ComparisonReport,
}

fn load_model(ctx: &Context, panel: &AlignedPanel, features: FeatureSet, seed: u64) -> CliResult<LstmModel> {
    let path = ctx.out(&checkpoint_name(features, seed));
    let model = load_checkpoint(open_input(&path)?)?;
    let expected = LstmConfig {
        seed,
        ..ctx.config.lstm.for_features(features, panel.n_assets())
    };
    if model.config != expected || model.features != features || model.assets != panel.assets {
        return Err(CliError::Usage(format!(
            "{} does not match the current config; rerun `train`",
            path.display()
        )));
    }
    Ok(model)
}

fn evaluate(ctx: &Context) -> CliResult<Evaluation> {
    let panel = load_panel(ctx)?;
    let b = bounds(ctx, &panel)?;
    let exp = ctx.config.experiment(ctx.down_market)?;
    let range = backtest_range(&panel, &b, ctx.down_market)?;

    let model_curves = model_jobs(ctx)?
        .par_iter()
        .map(|&(seed, f)| {
            let model = load_model(ctx, &panel, f, seed)?;
            let preds = forecast_range(&model, &panel, range)?;
            let curve = run_strategy(
                Strategy::for_features(f),
                &panel,
                range,
                Some(&preds),
                &exp.mean_variance,
                exp.initial_capital,
            )?;
            Ok((seed, f, curve))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut curves = Vec::new();
    for &s in &exp.strategies {
        let curve = match s.features() {
            // The table shows the first replicate of each model.
            Some(f) => model_curves
                .iter()
                .find(|(_, mf, _)| *mf == f)
                .map(|(_, _, c)| c.clone())
                .expect("one job per model strategy and replicate"),
            None => run_strategy(s, &panel, range, None, &exp.mean_variance, exp.initial_capital)?,
        };
        curves.push((s, curve));
    }
    let mut replicates: BTreeMap<u64, BTreeMap<Strategy, f64>> = BTreeMap::new();
    for (seed, f, c) in &model_curves {
        replicates
            .entry(*seed)
            .or_default()
            .insert(Strategy::for_features(*f), c.final_value());
    }

    let bh = curves
        .iter()
        .find(|(s, _)| *s == Strategy::BuyAndHold)
        .map(|(_, c)| c.clone())
        .expect("validated config includes BAH");
    let capitals = |s: Strategy| -> Vec<f64> { replicates.values().filter_map(|m| m.get(&s).copied()).collect() };
    let (with_s, without) = (capitals(Strategy::LstmSentiment), capitals(Strategy::Lstm));
    let pair = (with_s.len() >= 2 && without.len() >= 2).then(|| {
        (
            (Strategy::LstmSentiment.label(), with_s.as_slice()),
            (Strategy::Lstm.label(), without.as_slice()),
        )
    });
    let named: Vec<(String, WealthCurve)> = curves.iter().map(|(s, c)| (s.label().to_string(), c.clone())).collect();
    let report = compare_strategies(&named, &bh, pair)?;
    Ok(Evaluation {
        range,
        curves,
        replicates,
        report,
    })
}

pub fn backtest(ctx: &Context) -> CliResult<()> {
    let ev = evaluate(ctx)?;
    let named: Vec<(String, WealthCurve)> = ev
        .curves
        .iter()
        .map(|(s, c)| (s.label().to_string(), c.clone()))
        .collect();
    let (path, mut w) = create_output(ctx, "curves.csv")?;
    write_curves_csv(&mut w, &named, &[])?;
    finish(&path, w)?;

    let (path, mut w) = create_output(ctx, "replicates.csv")?;
    let io = |e| CliError::io(&path, e);
    let models: Vec<Strategy> = ev
        .curves
        .iter()
        .map(|(s, _)| *s)
        .filter(|s| s.features().is_some())
        .collect();
    let labels: Vec<&str> = models.iter().map(|s| s.label()).collect();
    writeln!(w, "seed,{}", labels.join(",")).map_err(io)?;
    for (seed, caps) in &ev.replicates {
        let cells: Vec<String> = models.iter().map(|s| format!("{:.6}", caps[s])).collect();
        writeln!(w, "{seed},{}", cells.join(",")).map_err(io)?;
    }
    finish(&path, w)?;

    let dates = &ev.curves[0].1.dates;
    let (first, last) = (dates[0].to_string(), dates[dates.len() - 1].to_string());
    let series: Vec<(&str, &[f64])> = ev
        .curves
        .iter()
        .map(|(s, c)| (s.label(), c.values.as_slice()))
        .collect();
    let chart = svg::line_chart(
        "Daily portfolio value",
        "portfolio value",
        (&first, &last),
        &series,
        &ctx.preamble(),
    );
    write_svg(ctx, "wealth.svg", &chart)?;

    println!("periods={} from={first} to={last}", ev.range.end - ev.range.start);
    for (s, c) in &ev.curves {
        println!("{}: final={:.2}", s.label(), c.final_value());
    }
    Ok(())
}

pub fn report(ctx: &Context) -> CliResult<()> {
    let ev = evaluate(ctx)?;
    let (path, mut w) = create_output(ctx, "report.csv")?;
    ev.report.write_csv(&mut w, &[])?;
    finish(&path, w)?;
    let mut table = Vec::new();
    ev.report.write_csv(&mut table, &[])?;
    print!("{}", String::from_utf8_lossy(&table));

    match &ev.report.significance {
        Some(sig) => {
            let (path, mut w) = create_output(ctx, "significance.csv")?;
            sig.write_csv(&mut w)?;
            finish(&path, w)?;
            println!(
                "{} vs {}: t={:.4} p={:.4}",
                sig.label_a, sig.label_b, sig.test.statistic, sig.test.p_value
            );
        }
        None => println!("significance test skipped: needs both models and at least 2 replicates"),
    }
    Ok(())
}

pub fn frontier(ctx: &Context) -> CliResult<()> {
    let panel = load_panel(ctx)?;
    let b = bounds(ctx, &panel)?;
    let prices = panel.price_matrix();
    let returns: Vec<Vec<f64>> = (0..panel.n_assets())
        .map(|a| {
            b.train
                .clone()
                .skip(1)
                .map(|t| prices[t][a] / prices[t - 1][a] - 1.0)
                .collect()
        })
        .collect();
    let moments = estimate_moments(&returns)?;
    let mc = ctx.config.monte_carlo;
    let set = CandidateSet::sample(panel.n_assets(), mc.count, mc.seed);
    let samples = set.frontier(&moments, mc.risk_free);
    let (best, chosen) = set.select(&moments, mc.risk_free)?;

    let (path, mut w) = create_output(ctx, "frontier.csv")?;
    let io = |e| CliError::io(&path, e);
    let weights: Vec<String> = panel.assets.iter().map(|a| format!("w_{a}")).collect();
    writeln!(w, "index,exp_return,volatility,sharpe,{},selected", weights.join(",")).map_err(io)?;
    for (i, s) in samples.iter().enumerate() {
        let ws: Vec<String> = s.weights.as_slice().iter().map(|x| format!("{x:.6}")).collect();
        writeln!(
            w,
            "{i},{:.8},{:.8},{:.6},{},{}",
            s.exp_return,
            s.volatility,
            s.sharpe,
            ws.join(","),
            u8::from(i == best)
        )
        .map_err(io)?;
    }
    finish(&path, w)?;

    // Plotting every candidate makes a huge file; a prefix of the seeded
    // stream is itself a uniform sample.
    let points: Vec<(f64, f64)> = samples
        .iter()
        .take(5000)
        .map(|s| (s.volatility, s.exp_return))
        .collect();
    let chart = svg::scatter(
        "Simulated portfolios (training period)",
        ("daily volatility", "expected daily return"),
        &points,
        Some((chosen.volatility, chosen.exp_return)),
        &ctx.preamble(),
    );
    write_svg(ctx, "frontier.svg", &chart)?;

    let ws: Vec<String> = panel
        .assets
        .iter()
        .zip(chosen.weights.as_slice())
        .map(|(a, x)| format!("{a}={x:.4}"))
        .collect();
    println!(
        "candidates={} max_sharpe={:.4} return={:.6} volatility={:.6}",
        samples.len(),
        chosen.sharpe,
        chosen.exp_return,
        chosen.volatility
    );
    println!("weights {}", ws.join(" "));
    Ok(())
}
