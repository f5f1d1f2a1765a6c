//! Text polarity labeling and per-asset sentiment aggregation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{SentimentFeatures, DATE_FORMAT};

/// Observations needed before a window's sentiment is considered representative.
pub const SUFFICIENCY_FLOOR: usize = 30;

/// Normalized polarities with magnitude below this are labeled neutral.
pub const NEUTRAL_BAND: f64 = 0.05;

/// Squash constant in `s / sqrt(s^2 + alpha)`.
pub const NORMALIZATION_ALPHA: f64 = 15.0;

pub const WINDOW_DAYS: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
    Neutral,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Positive, Label::Negative, Label::Neutral];

    pub fn index(self) -> usize {
        match self {
            Label::Positive => 0,
            Label::Negative => 1,
            Label::Neutral => 2,
        }
    }

    /// Label implied by the sign of a polarity that has already been through
    /// the neutral band.
    pub fn from_polarity(polarity: f64) -> Label {
        if polarity > 0.0 {
            Label::Positive
        } else if polarity < 0.0 {
            Label::Negative
        } else {
            Label::Neutral
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Positive => "Positive",
            Label::Negative => "Negative",
            Label::Neutral => "Neutral",
        })
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" => Ok(Label::Positive),
            "negative" | "neg" => Ok(Label::Negative),
            "neutral" | "neu" => Ok(Label::Neutral),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

/// One dated text observation about an asset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentRecord {
    pub date: NaiveDate,
    pub asset_id: String,
    pub text: String,
    pub label: Label,
    pub polarity: f64,
    pub likes: u64,
    pub retweets: u64,
    pub comments: u64,
}

impl SentimentRecord {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.polarity) {
            return Err(Error::Validation(format!("polarity {} outside [-1, 1]", self.polarity)));
        }
        if Label::from_polarity(self.polarity) != self.label {
            return Err(Error::Validation(format!(
                "label {} disagrees with polarity {}",
                self.label, self.polarity
            )));
        }
        Ok(())
    }
}

/// Anything that can assign a label and polarity to a text.
pub trait Labeler {
    fn label(&self, text: &str) -> (Label, f64);
}

/// Token valences plus negation and intensifier rules.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    valences: HashMap<String, f64>,
    negations: HashSet<String>,
    intensifiers: HashMap<String, f64>,
}

const DEFAULT_NEGATIONS: &[&str] = &["not", "no", "never", "neither", "nor", "without", "cannot"];

const DEFAULT_INTENSIFIERS: &[(&str, f64)] = &[
    ("very", 1.3),
    ("extremely", 1.5),
    ("really", 1.2),
    ("highly", 1.3),
    ("hugely", 1.4),
    ("slightly", 0.7),
    ("somewhat", 0.8),
    ("barely", 0.6),
];

impl Lexicon {
    /// Builds a lexicon with the default negation and intensifier sets.
    pub fn new(valences: HashMap<String, f64>) -> Result<Self> {
        Lexicon::with_rules(
            valences,
            DEFAULT_NEGATIONS.iter().map(|s| s.to_string()).collect(),
            DEFAULT_INTENSIFIERS.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        )
    }

    pub fn with_rules(
        valences: HashMap<String, f64>,
        negations: HashSet<String>,
        intensifiers: HashMap<String, f64>,
    ) -> Result<Self> {
        if valences.is_empty() {
            return Err(Error::Validation("lexicon has no entries".into()));
        }
        if let Some((tok, v)) = valences.iter().find(|(_, v)| !(-1.0..=1.0).contains(*v)) {
            return Err(Error::Validation(format!("valence of `{tok}` is {v}, outside [-1, 1]")));
        }
        if let Some((tok, m)) = intensifiers.iter().find(|(_, m)| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::Validation(format!(
                "intensifier `{tok}` has non-positive multiplier {m}"
            )));
        }
        let lower = |s: String| s.to_lowercase();
        Ok(Lexicon {
            valences: valences.into_iter().map(|(k, v)| (lower(k), v)).collect(),
            negations: negations.into_iter().map(lower).collect(),
            intensifiers: intensifiers.into_iter().map(|(k, v)| (lower(k), v)).collect(),
        })
    }

    /// Small finance-flavoured word list shipped with the crate.
    pub fn builtin() -> Lexicon {
        Lexicon::from_tsv(include_str!("default_lexicon.tsv").as_bytes(), "builtin lexicon")
            .expect("builtin lexicon is valid")
    }

    /// Reads `token<TAB>valence` lines. Blank lines and `#` comments are skipped.
    pub fn from_tsv<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        let mut valences = HashMap::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (tok, val) = trimmed
                .split_once('\t')
                .ok_or_else(|| Error::parse(source_name, i as u64 + 1, "expected `token<TAB>valence`"))?;
            let v: f64 = val
                .trim()
                .parse()
                .map_err(|_| Error::parse(source_name, i as u64 + 1, format!("bad valence `{val}`")))?;
            valences.insert(tok.trim().to_string(), v);
        }
        Lexicon::new(valences)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Lexicon::from_tsv(file, &path.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.valences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valences.is_empty()
    }

    fn is_negation(&self, token: &str) -> bool {
        self.negations.contains(token) || token.ends_with("n't")
    }
}

impl Labeler for Lexicon {
    fn label(&self, text: &str) -> (Label, f64) {
        label_text(text, self)
    }
}

fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .map(|t| {
            t.trim_matches(|c: char| !(c.is_alphanumeric() || c == '\''))
                .to_lowercase()
        })
        .filter(|t| !t.is_empty())
}

/// Scores `text` against the lexicon. A negation flips the sign of the next
/// scored token and intensifiers scale it. The raw sum `s` is squashed as
/// `s / sqrt(s^2 + 15)`; results inside the neutral band are snapped to 0.
pub fn label_text(text: &str, lexicon: &Lexicon) -> (Label, f64) {
    let mut sum = 0.0;
    let mut negate = false;
    let mut scale = 1.0;
    for tok in tokens(text) {
        if lexicon.is_negation(&tok) {
            negate = !negate;
        } else if let Some(m) = lexicon.intensifiers.get(&tok) {
            scale *= m;
        } else if let Some(v) = lexicon.valences.get(&tok) {
            let signed = if negate { -v } else { *v };
            sum += signed * scale;
            negate = false;
            scale = 1.0;
        }
    }
    let polarity = (sum / (sum * sum + NORMALIZATION_ALPHA).sqrt()).clamp(-1.0, 1.0);
    if polarity.abs() < NEUTRAL_BAND {
        (Label::Neutral, 0.0)
    } else {
        (Label::from_polarity(polarity), polarity)
    }
}

/// Positive-to-negative count ratio with add-one smoothing.
pub fn sentiment_ratio(n_pos: usize, n_neg: usize) -> f64 {
    (n_pos as f64 + 1.0) / (n_neg as f64 + 1.0)
}

/// Aggregate sentiment of one asset over a seven-day window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklySentiment {
    pub asset_id: String,
    pub window_start: NaiveDate,
    pub n_total: usize,
    pub n_pos: usize,
    pub n_neg: usize,
    pub n_neu: usize,
    pub mean_pol: f64,
    pub max_pol: f64,
    pub median_pol: f64,
    pub ratio: f64,
    pub sufficient: bool,
}

impl WeeklySentiment {
    pub fn window_end(&self) -> NaiveDate {
        self.window_start + Days::new(WINDOW_DAYS - 1)
    }
}

/// Aggregates the records of one asset dated within
/// `[window_start, window_start + 6]`.
pub fn aggregate_weekly(records: &[SentimentRecord], window_start: NaiveDate) -> Result<WeeklySentiment> {
    let window_end = window_start + Days::new(WINDOW_DAYS - 1);
    let asset_id = records.first().map(|r| r.asset_id.clone()).unwrap_or_default();
    let (mut n_pos, mut n_neg, mut n_neu) = (0, 0, 0);
    let mut pols = Vec::with_capacity(records.len());
    for r in records {
        if r.date < window_start || r.date > window_end {
            return Err(Error::Validation(format!(
                "record dated {} outside window {window_start}..={window_end}",
                r.date
            )));
        }
        if r.asset_id != asset_id {
            return Err(Error::Validation(format!(
                "window mixes assets `{asset_id}` and `{}`",
                r.asset_id
            )));
        }
        match r.label {
            Label::Positive => n_pos += 1,
            Label::Negative => n_neg += 1,
            Label::Neutral => n_neu += 1,
        }
        pols.push(r.polarity);
    }
    // Sorting first makes every statistic independent of record order.
    pols.sort_by(f64::total_cmp);
    let n = pols.len();
    let (mean_pol, max_pol, median_pol) = if n == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let mean = pols.iter().sum::<f64>() / n as f64;
        let median = if n % 2 == 1 {
            pols[n / 2]
        } else {
            0.5 * (pols[n / 2 - 1] + pols[n / 2])
        };
        (mean.clamp(pols[0], pols[n - 1]), pols[n - 1], median)
    };
    Ok(WeeklySentiment {
        asset_id,
        window_start,
        n_total: n,
        n_pos,
        n_neg,
        n_neu,
        mean_pol,
        max_pol,
        median_pol,
        ratio: sentiment_ratio(n_pos, n_neg),
        sufficient: n >= SUFFICIENCY_FLOOR,
    })
}

/// Splits one asset's records into consecutive non-overlapping seven-day
/// windows anchored at `anchor`, covering every date up to `end`. Records
/// outside `[anchor, end]` are ignored.
pub fn weekly_windows(
    asset_id: &str,
    records: &[SentimentRecord],
    anchor: NaiveDate,
    end: NaiveDate,
) -> Result<Vec<WeeklySentiment>> {
    let mut buckets: BTreeMap<u64, Vec<SentimentRecord>> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| r.asset_id == asset_id && r.date >= anchor && r.date <= end)
    {
        let k = (r.date - anchor).num_days() as u64 / WINDOW_DAYS;
        buckets.entry(k).or_default().push(r.clone());
    }
    let n_windows = (end - anchor).num_days().max(0) as u64 / WINDOW_DAYS + 1;
    (0..n_windows)
        .map(|k| {
            let start = anchor + Days::new(k * WINDOW_DAYS);
            let recs = buckets.remove(&k).unwrap_or_default();
            let mut w = aggregate_weekly(&recs, start)?;
            w.asset_id = asset_id.to_string();
            Ok(w)
        })
        .collect()
}

/// Smoothed positive/negative ratio for each date; dates without records get 1.0.
pub fn daily_ratio_series(records: &[SentimentRecord], dates: &[NaiveDate]) -> Vec<f64> {
    let mut counts: HashMap<NaiveDate, (usize, usize)> = HashMap::new();
    for r in records {
        let e = counts.entry(r.date).or_default();
        match r.label {
            Label::Positive => e.0 += 1,
            Label::Negative => e.1 += 1,
            Label::Neutral => {}
        }
    }
    dates
        .iter()
        .map(|d| counts.get(d).map_or(1.0, |(p, n)| sentiment_ratio(*p, *n)))
        .collect()
}

/// Per-asset daily engagement totals and ratio, keyed by asset id.
pub fn daily_features(records: &[SentimentRecord]) -> BTreeMap<String, Vec<SentimentFeatures>> {
    #[derive(Default)]
    struct Acc {
        likes: u64,
        retweets: u64,
        comments: u64,
        pos: usize,
        neg: usize,
    }
    let mut acc: BTreeMap<(String, NaiveDate), Acc> = BTreeMap::new();
    for r in records {
        let a = acc.entry((r.asset_id.clone(), r.date)).or_default();
        a.likes += r.likes;
        a.retweets += r.retweets;
        a.comments += r.comments;
        match r.label {
            Label::Positive => a.pos += 1,
            Label::Negative => a.neg += 1,
            Label::Neutral => {}
        }
    }
    let mut out: BTreeMap<String, Vec<SentimentFeatures>> = BTreeMap::new();
    for ((asset, date), a) in acc {
        out.entry(asset).or_default().push(SentimentFeatures {
            date,
            likes: a.likes as f64,
            retweets: a.retweets as f64,
            comments: a.comments as f64,
            ratio: sentiment_ratio(a.pos, a.neg),
        });
    }
    out
}

/// Row-normalized 3x3 confusion matrix (rows true, columns predicted, in
/// `Label::ALL` order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelAudit {
    pub counts: [[u64; 3]; 3],
    pub matrix: [[f64; 3]; 3],
    pub accuracy: f64,
    pub n: usize,
}

pub fn confusion(pairs: &[(Label, Label)]) -> Result<LabelAudit> {
    if pairs.is_empty() {
        return Err(Error::Validation("audit sample is empty".into()));
    }
    let mut counts = [[0u64; 3]; 3];
    for (truth, pred) in pairs {
        counts[truth.index()][pred.index()] += 1;
    }
    let mut matrix = [[0.0; 3]; 3];
    for (row, c) in matrix.iter_mut().zip(&counts) {
        let total: u64 = c.iter().sum();
        if total > 0 {
            for (m, v) in row.iter_mut().zip(c) {
                *m = *v as f64 / total as f64;
            }
        }
    }
    let correct: u64 = (0..3).map(|i| counts[i][i]).sum();
    Ok(LabelAudit {
        counts,
        matrix,
        accuracy: correct as f64 / pairs.len() as f64,
        n: pairs.len(),
    })
}

/// Compares a labeler against hand labels.
pub fn audit_labels<L: Labeler + ?Sized>(sample: &[(String, Label)], labeler: &L) -> Result<LabelAudit> {
    let pairs: Vec<(Label, Label)> = sample.iter().map(|(t, truth)| (*truth, labeler.label(t).0)).collect();
    confusion(&pairs)
}

/// Reads the sentiment CSV (`date, asset, text, label?, polarity?, likes,
/// retweets, comments`). Rows carrying both label and polarity are trusted;
/// rows with neither are scored by `labeler`.
pub fn read_sentiment<R: Read, L: Labeler + ?Sized>(
    reader: R,
    labeler: &L,
    source_name: &str,
) -> Result<Vec<SentimentRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::Headers)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| col(name).ok_or_else(|| Error::parse(source_name, 1, format!("missing column `{name}`")));
    let (c_date, c_asset, c_text) = (need("date")?, need("asset")?, need("text")?);
    let (c_likes, c_rt, c_comments) = (need("likes")?, need("retweets")?, need("comments")?);
    let (c_label, c_pol) = (col("label"), col("polarity"));

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let fallback = i as u64 + 2;
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(fallback, |p| p.line());
            Error::parse(source_name, line, e.to_string())
        })?;
        let line = rec.position().map_or(fallback, |p| p.line());
        let get = |c: usize| rec.get(c).unwrap_or("").trim();
        let opt = |c: Option<usize>| c.map(|c| get(c)).filter(|s| !s.is_empty());
        let date = NaiveDate::parse_from_str(get(c_date), DATE_FORMAT)
            .map_err(|e| Error::parse(source_name, line, format!("bad date `{}`: {e}", get(c_date))))?;
        let count = |c: usize, name: &str| -> Result<u64> {
            let s = get(c);
            if s.is_empty() {
                return Ok(0);
            }
            s.parse()
                .map_err(|_| Error::parse(source_name, line, format!("bad {name} `{s}`")))
        };
        let text = rec.get(c_text).unwrap_or("").to_string();
        let (label, polarity) = match (opt(c_label), opt(c_pol)) {
            (Some(l), Some(p)) => {
                let label = l.parse::<Label>().map_err(|e| Error::parse(source_name, line, e))?;
                let polarity: f64 = p
                    .parse()
                    .map_err(|_| Error::parse(source_name, line, format!("bad polarity `{p}`")))?;
                (label, polarity)
            }
            (None, None) => labeler.label(&text),
            _ => {
                return Err(Error::parse(
                    source_name,
                    line,
                    "label and polarity must be given together or not at all",
                ))
            }
        };
        let record = SentimentRecord {
            date,
            asset_id: get(c_asset).to_string(),
            text,
            label,
            polarity,
            likes: count(c_likes, "likes")?,
            retweets: count(c_rt, "retweets")?,
            comments: count(c_comments, "comments")?,
        };
        record
            .validate()
            .map_err(|e| Error::parse(source_name, line, e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}

pub fn load_sentiment<L: Labeler + ?Sized>(path: &Path, labeler: &L) -> Result<Vec<SentimentRecord>> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    read_sentiment(file, labeler, &path.display().to_string())
}

pub fn write_sentiment<W: Write>(records: &[SentimentRecord], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "date", "asset", "text", "label", "polarity", "likes", "retweets", "comments",
    ])?;
    for r in records {
        wtr.write_record([
            r.date.format(DATE_FORMAT).to_string(),
            r.asset_id.clone(),
            r.text.clone(),
            r.label.to_string(),
            r.polarity.to_string(),
            r.likes.to_string(),
            r.retweets.to_string(),
            r.comments.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
