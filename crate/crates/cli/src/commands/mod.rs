mod analyze;
mod data;
mod models;
mod synth;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub use analyze::analyze;
pub use data::{audit, ingest, label};
pub use models::{backtest, frontier, report, train};
pub use synth::{synth, SynthArgs};

use sentfolio::market_data::AlignedPanel;
use sentfolio::Lexicon;

use crate::config::Context;
use crate::error::{CliError, CliResult};

pub const PANEL_FILE: &str = "panel.csv";
pub const MODEL_DIR: &str = "models";

fn create_file(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let f = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(BufWriter::new(f))
}

/// Opens `name` under the output directory with the `# ` preamble already
/// written.
fn create_output(ctx: &Context, name: &str) -> CliResult<(PathBuf, BufWriter<File>)> {
    let path = ctx.out(name);
    let mut w = create_file(&path)?;
    for line in ctx.preamble() {
        writeln!(w, "# {line}").map_err(|e| CliError::io(&path, e))?;
    }
    Ok((path, w))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> CliResult<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_svg(ctx: &Context, name: &str, svg: &str) -> CliResult<()> {
    let path = ctx.out(name);
    let mut w = create_file(&path)?;
    w.write_all(svg.as_bytes()).map_err(|e| CliError::io(&path, e))?;
    finish(&path, w)
}

fn lexicon(ctx: &Context) -> CliResult<Lexicon> {
    Ok(match &ctx.config.lexicon {
        Some(p) => Lexicon::load(p)?,
        None => Lexicon::builtin(),
    })
}

fn open_input(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::Core(sentfolio::Error::MissingFile(path.to_path_buf())),
        _ => CliError::io(path, e),
    })
}

/// Panel written by `ingest`, checked against the configured assets.
fn load_panel(ctx: &Context) -> CliResult<AlignedPanel> {
    let path = ctx.out(PANEL_FILE);
    let panel = AlignedPanel::read_csv(open_input(&path)?, &path.display().to_string())?;
    if panel.assets != ctx.config.assets {
        return Err(CliError::Usage(format!(
            "{} holds assets {:?} but the config lists {:?}; rerun `ingest`",
            path.display(),
            panel.assets,
            ctx.config.assets
        )));
    }
    Ok(panel)
}

fn fmt_p(p: f64) -> String {
    format!("{p:.4}")
}
