use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;

use sentfolio::market_data::{price_file_path, write_prices, DATE_FORMAT};
use sentfolio::synthetic::{generate, SyntheticConfig};

use super::{create_file, finish};
use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory to write the fixture into.
    #[arg(long)]
    pub dir: PathBuf,
    /// Trading days to generate.
    #[arg(long, default_value_t = 1250)]
    pub days: usize,
    /// Seed of the generated market (not of training).
    #[arg(long, default_value_t = 7)]
    pub market_seed: u64,
    /// Comma-separated tickers.
    #[arg(long, value_delimiter = ',')]
    pub assets: Option<Vec<String>>,
}

const AUDIT_ROWS: usize = 120;

/// Writes price files, an unlabeled sentiment file, a hand-label sample and
/// a run config for a seeded synthetic market.
pub fn synth(args: &SynthArgs) -> CliResult<()> {
    let mut cfg = SyntheticConfig {
        days: args.days,
        seed: args.market_seed,
        ..SyntheticConfig::default()
    };
    if let Some(a) = &args.assets {
        cfg.assets = a.clone();
    }
    let market = generate(&cfg)?;
    let data = args.dir.join("data");

    for p in &market.prices {
        let path = price_file_path(&data, &p.asset_id);
        let mut w = create_file(&path)?;
        write_prices(p, &mut w)?;
        finish(&path, w)?;
    }

    // Labels are left out so that `ingest` scores the texts itself.
    let path = data.join("sentiment.csv");
    let mut wtr = csv::Writer::from_writer(create_file(&path)?);
    wtr.write_record(["date", "asset", "text", "likes", "retweets", "comments"])?;
    for r in &market.records {
        wtr.write_record([
            r.date.format(DATE_FORMAT).to_string(),
            r.asset_id.clone(),
            r.text.clone(),
            r.likes.to_string(),
            r.retweets.to_string(),
            r.comments.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| CliError::io(&path, e))?;

    let path = args.dir.join("audit_sample.csv");
    let mut wtr = csv::Writer::from_writer(create_file(&path)?);
    wtr.write_record(["text", "label"])?;
    let step = (market.records.len() / AUDIT_ROWS).max(1);
    for r in market.records.iter().step_by(step).take(AUDIT_ROWS) {
        wtr.write_record([r.text.as_str(), &r.label.to_string()])?;
    }
    wtr.flush().map_err(|e| CliError::io(&path, e))?;

    let path = args.dir.join("sentfolio.toml");
    let mut w = create_file(&path)?;
    write_config(&mut w, &cfg.assets).map_err(|e| CliError::io(&path, e))?;
    finish(&path, w)?;

    println!(
        "days={} assets={} records={} config={}",
        cfg.days,
        cfg.assets.len(),
        market.records.len(),
        display(&path)
    );
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn write_config<W: Write>(w: &mut W, assets: &[String]) -> std::io::Result<()> {
    let quoted: Vec<String> = assets.iter().map(|a| format!("\"{a}\"")).collect();
    writeln!(w, "assets = [{}]", quoted.join(", "))?;
    writeln!(w, "data_dir = \"data\"")?;
    writeln!(w, "sentiment = \"data/sentiment.csv\"")?;
    writeln!(w, "audit_sample = \"audit_sample.csv\"")?;
    writeln!(w, "out_dir = \"out\"")?;
    writeln!(w, "seed = 0")?;
    writeln!(w, "replicates = 10")?;
    writeln!(w, "initial_capital = 10000.0")?;
    writeln!(w)?;
    writeln!(w, "[split]")?;
    writeln!(w, "train = 0.7")?;
    writeln!(w, "validation = 0.1")?;
    writeln!(w, "test = 0.2")?;
    writeln!(w)?;
    writeln!(w, "[lstm]")?;
    writeln!(w, "hidden_size = 13")?;
    writeln!(w, "num_layers = 3")?;
    writeln!(w, "learning_rate = 0.004")?;
    writeln!(w, "window = 6")?;
    writeln!(
        w,
        "# 500 epochs at batch 32 is the full setting; this is a quicker one."
    )?;
    writeln!(w, "epochs = 30")?;
    writeln!(w, "batch_size = 8")?;
    writeln!(w)?;
    writeln!(w, "[monte_carlo]")?;
    writeln!(w, "count = 50000")?;
    writeln!(w, "seed = 0")?;
    Ok(())
}
