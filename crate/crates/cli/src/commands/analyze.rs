use std::io::Write;

use sentfolio::market_data::{AlignedPanel, Feature};
use sentfolio::sentiment::{load_sentiment, weekly_windows, WeeklySentiment};
use sentfolio::stats::{granger, pearson, GrangerReport, SIGNIFICANCE};

use super::{create_output, finish, fmt_p, lexicon, load_panel, write_svg};
use crate::config::Context;
use crate::error::{CliError, CliResult};
use crate::svg;

const STATS: [&str; 4] = ["mean", "max", "median", "ratio"];

fn stat(w: &WeeklySentiment, i: usize) -> f64 {
    match i {
        0 => w.mean_pol,
        1 => w.max_pol,
        2 => w.median_pol,
        _ => w.ratio,
    }
}

/// Pairs each sufficient week's sentiment with that week's price return
/// (last close in the week over the last close of the previous week).
fn weekly_pairs(panel: &AlignedPanel, asset: usize, weeks: &[WeeklySentiment]) -> Vec<(f64, [f64; 4])> {
    let prices = panel.columns[asset].get(Feature::AdjClose);
    let last_row = |w: &WeeklySentiment| {
        let end = panel.dates.partition_point(|d| *d <= w.window_end());
        (end > 0 && panel.dates[end - 1] >= w.window_start).then(|| end - 1)
    };
    let mut out = Vec::new();
    for pair in weeks.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        if !cur.sufficient {
            continue;
        }
        if let (Some(a), Some(b)) = (last_row(prev), last_row(cur)) {
            let r = prices[b] / prices[a] - 1.0;
            out.push((r, [0, 1, 2, 3].map(|i| stat(cur, i))));
        }
    }
    out
}

/// Simple return into each row from row 1 on, with the same row's sentiment ratio.
fn granger_series(panel: &AlignedPanel, asset: usize) -> (Vec<f64>, Vec<f64>) {
    let cols = &panel.columns[asset];
    let p = cols.get(Feature::AdjClose);
    let target = p.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
    let driver = cols.get(Feature::Ratio)[1..].to_vec();
    (target, driver)
}

pub fn analyze(ctx: &Context) -> CliResult<()> {
    let panel = load_panel(ctx)?;
    let lex = lexicon(ctx)?;
    let records = load_sentiment(&ctx.config.sentiment, &lex)?;
    let anchor = panel.dates[0];
    let end = *panel.dates.last().expect("panel is non-empty");

    let mut corr = Vec::new();
    for (a, asset) in panel.assets.iter().enumerate() {
        let weeks = weekly_windows(asset, &records, anchor, end)?;
        let pairs = weekly_pairs(&panel, a, &weeks);
        let returns: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let row: Vec<Option<(f64, f64)>> = (0..STATS.len())
            .map(|i| {
                let xs: Vec<f64> = pairs.iter().map(|p| p.1[i]).collect();
                pearson(&xs, &returns).ok().map(|t| (t.statistic, t.p_value))
            })
            .collect();
        corr.push((asset.clone(), pairs.len(), row));
    }
    let cell = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.4}"));

    let (path, mut w) = create_output(ctx, "correlation.csv")?;
    let io = |e| CliError::io(&path, e);
    writeln!(w, "asset,{}", STATS.join(",")).map_err(io)?;
    for (asset, _, row) in &corr {
        let cells: Vec<String> = row.iter().map(|c| cell(c.map(|c| c.0))).collect();
        writeln!(w, "{asset},{}", cells.join(",")).map_err(io)?;
    }
    finish(&path, w)?;

    let (path, mut w) = create_output(ctx, "correlation_pvalues.csv")?;
    let io = |e| CliError::io(&path, e);
    writeln!(w, "asset,{},weeks", STATS.join(",")).map_err(io)?;
    for (asset, n, row) in &corr {
        let cells: Vec<String> = row.iter().map(|c| cell(c.map(|c| c.1))).collect();
        writeln!(w, "{asset},{},{n}", cells.join(",")).map_err(io)?;
    }
    finish(&path, w)?;

    let max_lag = ctx.config.max_lag;
    let reports: Vec<GrangerReport> = (0..panel.n_assets())
        .map(|a| {
            let (target, driver) = granger_series(&panel, a);
            granger(&target, &driver, max_lag)
        })
        .collect::<sentfolio::Result<_>>()?;

    let (path, mut w) = create_output(ctx, "granger.csv")?;
    let io = |e| CliError::io(&path, e);
    let header: Vec<String> = panel
        .assets
        .iter()
        .flat_map(|a| [format!("{a}_p"), format!("{a}_sig")])
        .collect();
    writeln!(w, "lag,{}", header.join(",")).map_err(io)?;
    for l in 0..max_lag {
        let cells: Vec<String> = reports
            .iter()
            .flat_map(|r| {
                let p = r.lags[l].test.p_value;
                [fmt_p(p), if p < SIGNIFICANCE { "*".into() } else { String::new() }]
            })
            .collect();
        writeln!(w, "L{},{}", l + 1, cells.join(",")).map_err(io)?;
    }
    finish(&path, w)?;

    for (asset, r) in panel.assets.iter().zip(&reports) {
        let (path, mut w) = create_output(ctx, &format!("granger_{asset}.csv"))?;
        let io = |e| CliError::io(&path, e);
        writeln!(w, "lag,F,df1,df2,p,significant,observations").map_err(io)?;
        for g in &r.lags {
            let (d1, d2) = match g.test.df {
                sentfolio::stats::DegreesOfFreedom::Two(a, b) => (a, b),
                sentfolio::stats::DegreesOfFreedom::One(a) => (a, 0.0),
            };
            writeln!(
                w,
                "{},{:.4},{},{},{},{},{}",
                g.lag,
                g.test.statistic,
                d1,
                d2,
                fmt_p(g.test.p_value),
                g.test.p_value < SIGNIFICANCE,
                g.observations
            )
            .map_err(io)?;
        }
        finish(&path, w)?;
    }

    let ratios: Vec<(&str, &[f64])> = panel
        .assets
        .iter()
        .zip(&panel.columns)
        .map(|(a, c)| (a.as_str(), c.get(Feature::Ratio)))
        .collect();
    let first = anchor.to_string();
    let last = end.to_string();
    let chart = svg::line_chart(
        "Daily sentiment ratio",
        "positive / negative (smoothed)",
        (&first, &last),
        &ratios,
        &ctx.preamble(),
    );
    write_svg(ctx, "sentiment_ratio.svg", &chart)?;

    for ((asset, n, row), r) in corr.iter().zip(&reports) {
        let best = r.min_p().expect("at least one lag");
        println!(
            "{asset}: weeks={n} corr(ratio)={} granger min p={} at L{}",
            cell(row[3].map(|c| c.0)),
            fmt_p(best.test.p_value),
            best.lag
        );
    }
    Ok(())
}
