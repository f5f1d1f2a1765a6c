use std::io::Write;

use sentfolio::market_data::{align_panel, load_prices, DATE_FORMAT};
use sentfolio::sentiment::{audit_labels, daily_features, load_sentiment, write_sentiment};
use sentfolio::{Label, SentimentRecord};

use super::{create_output, finish, lexicon, open_input, PANEL_FILE};
use crate::config::Context;
use crate::error::{CliError, CliResult};

fn labeled_records(ctx: &Context) -> CliResult<Vec<SentimentRecord>> {
    let lex = lexicon(ctx)?;
    Ok(load_sentiment(&ctx.config.sentiment, &lex)?)
}

pub fn ingest(ctx: &Context) -> CliResult<()> {
    let cfg = &ctx.config;
    let prices = load_prices(&cfg.data_dir, &cfg.assets, &cfg.columns)?;
    let records = labeled_records(ctx)?;
    let panel = align_panel(&prices, &daily_features(&records))?;
    let bounds = cfg.split.bounds(panel.len())?;

    let (path, mut w) = create_output(ctx, PANEL_FILE)?;
    panel.write_csv(&mut w)?;
    finish(&path, w)?;

    let (path, mut w) = create_output(ctx, "split.csv")?;
    let io = |e| CliError::io(&path, e);
    writeln!(w, "segment,first_row,end_row,first_date,last_date").map_err(io)?;
    for (name, r) in [
        ("train", &bounds.train),
        ("validation", &bounds.validation),
        ("test", &bounds.test),
    ] {
        writeln!(
            w,
            "{name},{},{},{},{}",
            r.start,
            r.end,
            panel.dates[r.start].format(DATE_FORMAT),
            panel.dates[r.end - 1].format(DATE_FORMAT)
        )
        .map_err(io)?;
    }
    finish(&path, w)?;

    println!(
        "rows={} assets={} feature_width={} records={}",
        panel.len(),
        panel.n_assets(),
        panel.feature_width(),
        records.len()
    );
    println!(
        "split train={} validation={} test={}",
        bounds.train.len(),
        bounds.validation.len(),
        bounds.test.len()
    );
    Ok(())
}

pub fn label(ctx: &Context) -> CliResult<()> {
    let records = labeled_records(ctx)?;
    let (path, mut w) = create_output(ctx, "labeled_sentiment.csv")?;
    write_sentiment(&records, &mut w)?;
    finish(&path, w)?;
    let mut counts = [0usize; 3];
    for r in &records {
        counts[r.label.index()] += 1;
    }
    println!(
        "records={} positive={} negative={} neutral={}",
        records.len(),
        counts[0],
        counts[1],
        counts[2]
    );
    Ok(())
}

/// Reads a hand-labeled `text,label` sample.
fn read_sample(ctx: &Context) -> CliResult<Vec<(String, Label)>> {
    let path = ctx
        .config
        .audit_sample
        .as_ref()
        .ok_or_else(|| CliError::Usage("`audit` needs `audit_sample` in the config".into()))?;
    let source = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(open_input(path)?);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| sentfolio::Error::Parse {
                source_name: source.clone(),
                line: 1,
                message: format!("missing column `{name}`"),
            })
    };
    let (c_text, c_label) = (col("text")?, col("label")?);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i as u64 + 2, |p| p.line());
        let label = rec[c_label]
            .parse::<Label>()
            .map_err(|message| sentfolio::Error::Parse {
                source_name: source.clone(),
                line,
                message,
            })?;
        out.push((rec[c_text].to_string(), label));
    }
    Ok(out)
}

pub fn audit(ctx: &Context) -> CliResult<()> {
    let sample = read_sample(ctx)?;
    let lex = lexicon(ctx)?;
    let a = audit_labels(&sample, &lex)?;
    let (path, mut w) = create_output(ctx, "audit.csv")?;
    let io = |e| CliError::io(&path, e);
    writeln!(w, "true_label,Positive,Negative,Neutral,n").map_err(io)?;
    for t in Label::ALL {
        let i = t.index();
        let n: u64 = a.counts[i].iter().sum();
        writeln!(
            w,
            "{t},{:.4},{:.4},{:.4},{n}",
            a.matrix[i][0], a.matrix[i][1], a.matrix[i][2]
        )
        .map_err(io)?;
    }
    writeln!(w, "accuracy,{:.4},,,{}", a.accuracy, a.n).map_err(io)?;
    finish(&path, w)?;
    println!("audited={} accuracy={:.4}", a.n, a.accuracy);
    Ok(())
}
