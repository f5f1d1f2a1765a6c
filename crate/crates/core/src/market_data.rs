//! Daily price ingestion, return computation, panel alignment and
//! chronological splitting.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// Number of per-asset columns in an [`AlignedPanel`].
pub const FEATURES_PER_ASSET: usize = 6;

/// Dated adjusted-close and volume series for one asset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub asset_id: String,
    pub dates: Vec<NaiveDate>,
    pub adj_close: Vec<f64>,
    pub volume: Vec<f64>,
}

impl PriceSeries {
    pub fn new(
        asset_id: impl Into<String>,
        dates: Vec<NaiveDate>,
        adj_close: Vec<f64>,
        volume: Vec<f64>,
    ) -> Result<Self> {
        let series = PriceSeries {
            asset_id: asset_id.into(),
            dates,
            adj_close,
            volume,
        };
        series.validate()?;
        Ok(series)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dates.len();
        if self.adj_close.len() != n || self.volume.len() != n {
            return Err(Error::Validation(format!(
                "{}: dates, adj_close and volume lengths differ ({}, {}, {})",
                self.asset_id,
                n,
                self.adj_close.len(),
                self.volume.len()
            )));
        }
        for w in self.dates.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Validation(format!(
                    "{}: dates must be strictly increasing ({} then {})",
                    self.asset_id, w[0], w[1]
                )));
            }
        }
        if let Some((i, p)) = self
            .adj_close
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p > 0.0))
        {
            return Err(Error::Validation(format!(
                "{}: adj_close must be positive, got {} on {}",
                self.asset_id, p, self.dates[i]
            )));
        }
        if let Some((i, v)) = self
            .volume
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::Validation(format!(
                "{}: volume must be non-negative, got {} on {}",
                self.asset_id, v, self.dates[i]
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// Column names used when reading price files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub date: String,
    pub adj_close: String,
    pub volume: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            date: "date".into(),
            adj_close: "adj_close".into(),
            volume: "volume".into(),
        }
    }
}

/// Parses one asset's price CSV. Rows may appear in any order; they are
/// sorted by date and duplicate dates are rejected.
pub fn read_prices<R: Read>(reader: R, asset_id: &str, schema: &ColumnMap, source_name: &str) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(source_name, 1, format!("missing column `{name}`")))
    };
    let (date_col, close_col, vol_col) = (
        column(&schema.date)?,
        column(&schema.adj_close)?,
        column(&schema.volume)?,
    );

    let mut rows: Vec<(NaiveDate, f64, f64)> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let fallback = i as u64 + 2;
        let record = record.map_err(|e| {
            let line = e.position().map_or(fallback, |p| p.line());
            Error::parse(source_name, line, e.to_string())
        })?;
        let line = record.position().map_or(fallback, |p| p.line());
        let field = |col: usize| record.get(col).unwrap_or("");
        let date = NaiveDate::parse_from_str(field(date_col), DATE_FORMAT)
            .map_err(|e| Error::parse(source_name, line, format!("bad date `{}`: {e}", field(date_col))))?;
        let close: f64 = field(close_col)
            .parse()
            .map_err(|_| Error::parse(source_name, line, format!("bad adj_close `{}`", field(close_col))))?;
        let volume: f64 = field(vol_col)
            .parse()
            .map_err(|_| Error::parse(source_name, line, format!("bad volume `{}`", field(vol_col))))?;
        if !(close.is_finite() && close > 0.0) {
            return Err(Error::Validation(format!(
                "{source_name}:{line}: adj_close must be positive, got {close}"
            )));
        }
        if !(volume.is_finite() && volume >= 0.0) {
            return Err(Error::Validation(format!(
                "{source_name}:{line}: volume must be non-negative, got {volume}"
            )));
        }
        rows.push((date, close, volume));
    }

    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Validation(format!("{source_name}: duplicate date {}", w[0].0)));
    }
    PriceSeries::new(
        asset_id,
        rows.iter().map(|r| r.0).collect(),
        rows.iter().map(|r| r.1).collect(),
        rows.iter().map(|r| r.2).collect(),
    )
}

pub fn load_price_file(path: &Path, asset_id: &str, schema: &ColumnMap) -> Result<PriceSeries> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    read_prices(file, asset_id, schema, &path.display().to_string())
}

/// Path of the price file for `asset` inside `dir`.
pub fn price_file_path(dir: &Path, asset: &str) -> PathBuf {
    dir.join(format!("{asset}.csv"))
}

/// Loads `<dir>/<ticker>.csv` for every ticker, in the given order.
pub fn load_prices(dir: &Path, assets: &[String], schema: &ColumnMap) -> Result<Vec<PriceSeries>> {
    assets
        .iter()
        .map(|a| load_price_file(&price_file_path(dir, a), a, schema))
        .collect()
}

pub fn write_prices<W: Write>(series: &PriceSeries, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["date", "adj_close", "volume"])?;
    for i in 0..series.len() {
        wtr.write_record([
            series.dates[i].format(DATE_FORMAT).to_string(),
            series.adj_close[i].to_string(),
            series.volume[i].to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Gross and simple one-period returns of a price series.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub asset_id: String,
    /// Period end dates; one fewer than the price dates.
    pub dates: Vec<NaiveDate>,
    pub gross: Vec<f64>,
    pub simple: Vec<f64>,
}

pub fn compute_returns(prices: &PriceSeries) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{}: need at least 2 prices to compute returns, got {}",
            prices.asset_id,
            prices.len()
        )));
    }
    let gross: Vec<f64> = prices.adj_close.windows(2).map(|w| w[1] / w[0]).collect();
    let simple = gross.iter().map(|g| g - 1.0).collect();
    Ok(ReturnSeries {
        asset_id: prices.asset_id.clone(),
        dates: prices.dates[1..].to_vec(),
        gross,
        simple,
    })
}

/// Per-asset columns of a panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    AdjClose,
    Likes,
    Retweets,
    Comments,
    Volume,
    Ratio,
}

impl Feature {
    /// Panel column order within one asset's block.
    pub const ALL: [Feature; FEATURES_PER_ASSET] = [
        Feature::AdjClose,
        Feature::Likes,
        Feature::Retweets,
        Feature::Comments,
        Feature::Volume,
        Feature::Ratio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::AdjClose => "adj_close",
            Feature::Likes => "likes",
            Feature::Retweets => "retweets",
            Feature::Comments => "comments",
            Feature::Volume => "volume",
            Feature::Ratio => "ratio",
        }
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Feature::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Which per-asset columns feed a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    /// All six columns per asset.
    WithSentiment,
    /// Price and volume only.
    PriceOnly,
}

impl FeatureSet {
    pub fn features(self) -> &'static [Feature] {
        match self {
            FeatureSet::WithSentiment => &Feature::ALL,
            FeatureSet::PriceOnly => &[Feature::AdjClose, Feature::Volume],
        }
    }

    pub fn width(self, n_assets: usize) -> usize {
        self.features().len() * n_assets
    }

    /// Index of each asset's adjusted close within a row of this set.
    pub fn price_columns(self, n_assets: usize) -> Vec<usize> {
        let per = self.features().len();
        let offset = self
            .features()
            .iter()
            .position(|f| *f == Feature::AdjClose)
            .expect("every feature set carries prices");
        (0..n_assets).map(|a| a * per + offset).collect()
    }
}

/// One asset's sentiment features for one day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentFeatures {
    pub date: NaiveDate,
    pub likes: f64,
    pub retweets: f64,
    pub comments: f64,
    pub ratio: f64,
}

impl SentimentFeatures {
    /// Values used on a retained date with no sentiment observations.
    pub fn neutral(date: NaiveDate) -> Self {
        SentimentFeatures {
            date,
            likes: 0.0,
            retweets: 0.0,
            comments: 0.0,
            ratio: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AssetColumns {
    pub adj_close: Vec<f64>,
    pub likes: Vec<f64>,
    pub retweets: Vec<f64>,
    pub comments: Vec<f64>,
    pub volume: Vec<f64>,
    pub ratio: Vec<f64>,
}

impl AssetColumns {
    pub fn get(&self, feature: Feature) -> &[f64] {
        match feature {
            Feature::AdjClose => &self.adj_close,
            Feature::Likes => &self.likes,
            Feature::Retweets => &self.retweets,
            Feature::Comments => &self.comments,
            Feature::Volume => &self.volume,
            Feature::Ratio => &self.ratio,
        }
    }

    fn get_mut(&mut self, feature: Feature) -> &mut Vec<f64> {
        match feature {
            Feature::AdjClose => &mut self.adj_close,
            Feature::Likes => &mut self.likes,
            Feature::Retweets => &mut self.retweets,
            Feature::Comments => &mut self.comments,
            Feature::Volume => &mut self.volume,
            Feature::Ratio => &mut self.ratio,
        }
    }

    fn slice(&self, range: Range<usize>) -> AssetColumns {
        let mut out = AssetColumns::default();
        for f in Feature::ALL {
            *out.get_mut(f) = self.get(f)[range.clone()].to_vec();
        }
        out
    }
}

/// Prices and sentiment features for a fixed asset universe on a common
/// set of trading dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedPanel {
    pub dates: Vec<NaiveDate>,
    pub assets: Vec<String>,
    pub columns: Vec<AssetColumns>,
}

impl AlignedPanel {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    /// Width of a full feature row (6 per asset).
    pub fn feature_width(&self) -> usize {
        FEATURES_PER_ASSET * self.n_assets()
    }

    pub fn value(&self, row: usize, asset: usize, feature: Feature) -> f64 {
        self.columns[asset].get(feature)[row]
    }

    /// Full feature row, asset-major.
    pub fn row(&self, row: usize) -> Vec<f64> {
        self.feature_row(row, FeatureSet::WithSentiment)
    }

    pub fn feature_row(&self, row: usize, set: FeatureSet) -> Vec<f64> {
        let mut out = Vec::with_capacity(set.width(self.n_assets()));
        for cols in &self.columns {
            out.extend(set.features().iter().map(|f| cols.get(*f)[row]));
        }
        out
    }

    pub fn prices(&self, row: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.adj_close[row]).collect()
    }

    /// Price rows for every date.
    pub fn price_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|r| self.prices(r)).collect()
    }

    pub fn slice(&self, range: Range<usize>) -> AlignedPanel {
        AlignedPanel {
            dates: self.dates[range.clone()].to_vec(),
            assets: self.assets.clone(),
            columns: self.columns.iter().map(|c| c.slice(range.clone())).collect(),
        }
    }

    /// Index of the first date `>= date`.
    pub fn lower_bound(&self, date: NaiveDate) -> usize {
        self.dates.partition_point(|d| *d < date)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string()];
        for a in &self.assets {
            header.extend(Feature::ALL.iter().map(|f| format!("{a}_{}", f.name())));
        }
        wtr.write_record(&header)?;
        for r in 0..self.len() {
            let mut rec = vec![self.dates[r].format(DATE_FORMAT).to_string()];
            rec.extend(self.row(r).iter().map(|v| v.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, source_name: &str) -> Result<AlignedPanel> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("date") || (headers.len() - 1) % FEATURES_PER_ASSET != 0 {
            return Err(Error::parse(source_name, 1, "not a panel header"));
        }
        let mut assets = Vec::new();
        for (block, chunk) in headers
            .iter()
            .skip(1)
            .collect::<Vec<_>>()
            .chunks(FEATURES_PER_ASSET)
            .enumerate()
        {
            let first = chunk[0];
            let asset = first
                .strip_suffix(&format!("_{}", Feature::ALL[0].name()))
                .ok_or_else(|| Error::parse(source_name, 1, format!("unexpected column `{first}`")))?;
            for (f, name) in Feature::ALL.iter().zip(chunk) {
                if *name != format!("{asset}_{}", f.name()) {
                    return Err(Error::parse(
                        source_name,
                        1,
                        format!("asset block {block}: expected `{asset}_{}`, got `{name}`", f.name()),
                    ));
                }
            }
            assets.push(asset.to_string());
        }
        let mut panel = AlignedPanel {
            dates: Vec::new(),
            columns: vec![AssetColumns::default(); assets.len()],
            assets,
        };
        for (i, rec) in rdr.records().enumerate() {
            let fallback = i as u64 + 2;
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(fallback, |p| p.line());
                Error::parse(source_name, line, e.to_string())
            })?;
            let line = rec.position().map_or(fallback, |p| p.line());
            let date = NaiveDate::parse_from_str(&rec[0], DATE_FORMAT)
                .map_err(|e| Error::parse(source_name, line, format!("bad date: {e}")))?;
            panel.dates.push(date);
            for (j, field) in rec.iter().skip(1).enumerate() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::parse(source_name, line, format!("bad number `{field}`")))?;
                let (asset, f) = (j / FEATURES_PER_ASSET, Feature::ALL[j % FEATURES_PER_ASSET]);
                panel.columns[asset].get_mut(f).push(v);
            }
        }
        Ok(panel)
    }
}

/// Inner-joins price series on the dates common to every asset and attaches
/// daily sentiment features. Dates without sentiment get
/// [`SentimentFeatures::neutral`].
pub fn align_panel(
    prices: &[PriceSeries],
    daily_sentiment: &BTreeMap<String, Vec<SentimentFeatures>>,
) -> Result<AlignedPanel> {
    if prices.is_empty() {
        return Err(Error::Alignment("no assets to align".into()));
    }
    if let Some(s) = prices.iter().find(|s| s.is_empty()) {
        return Err(Error::Alignment(format!("{} has no rows", s.asset_id)));
    }
    let mut common: BTreeSet<NaiveDate> = prices[0].dates.iter().copied().collect();
    for s in &prices[1..] {
        let dates: BTreeSet<NaiveDate> = s.dates.iter().copied().collect();
        common = common.intersection(&dates).copied().collect();
    }
    if common.is_empty() {
        return Err(Error::Alignment("assets share no common dates".into()));
    }
    let dates: Vec<NaiveDate> = common.into_iter().collect();

    let mut columns = Vec::with_capacity(prices.len());
    for s in prices {
        let by_date: BTreeMap<NaiveDate, usize> = s.dates.iter().enumerate().map(|(i, d)| (*d, i)).collect();
        let sentiment: BTreeMap<NaiveDate, &SentimentFeatures> = daily_sentiment
            .get(&s.asset_id)
            .map(|rows| rows.iter().map(|r| (r.date, r)).collect())
            .unwrap_or_default();
        let mut cols = AssetColumns::default();
        for d in &dates {
            let i = by_date[d];
            let feat = sentiment
                .get(d)
                .map(|f| **f)
                .unwrap_or_else(|| SentimentFeatures::neutral(*d));
            cols.adj_close.push(s.adj_close[i]);
            cols.volume.push(s.volume[i]);
            cols.likes.push(feat.likes);
            cols.retweets.push(feat.retweets);
            cols.comments.push(feat.comments);
            cols.ratio.push(feat.ratio);
        }
        columns.push(cols);
    }
    Ok(AlignedPanel {
        dates,
        assets: prices.iter().map(|s| s.asset_id.clone()).collect(),
        columns,
    })
}

/// Train / validation / test proportions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    #[serde(alias = "val")]
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train: 0.7,
            validation: 0.1,
            test: 0.2,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fracs = [self.train, self.validation, self.test];
        if fracs.iter().any(|f| !f.is_finite() || *f < 0.0 || *f >= 1.0) {
            return Err(Error::Config(format!("split fractions must lie in [0, 1): {self:?}")));
        }
        if (fracs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("split fractions must sum to 1: {self:?}")));
        }
        Ok(())
    }

    /// Row ranges for a panel of `n` rows: train, then validation, then test.
    /// Train and validation get `floor(frac * n)` rows; test takes the rest.
    pub fn bounds(&self, n: usize) -> Result<SplitBounds> {
        self.validate()?;
        // The epsilon keeps products like 0.7 * 10 from flooring to 6.
        let take = |f: f64| (f * n as f64 + 1e-9).floor() as usize;
        let n_train = take(self.train);
        let n_val = take(self.validation);
        let bounds = SplitBounds {
            train: 0..n_train,
            validation: n_train..n_train + n_val,
            test: n_train + n_val..n,
        };
        for (name, r) in [
            ("train", &bounds.train),
            ("validation", &bounds.validation),
            ("test", &bounds.test),
        ] {
            if r.is_empty() {
                return Err(Error::Config(format!(
                    "{name} segment is empty for {n} rows with {self:?}"
                )));
            }
        }
        Ok(bounds)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitBounds {
    pub train: Range<usize>,
    pub validation: Range<usize>,
    pub test: Range<usize>,
}

pub fn split_chronological(
    panel: &AlignedPanel,
    spec: &SplitSpec,
) -> Result<(AlignedPanel, AlignedPanel, AlignedPanel)> {
    if panel.is_empty() {
        return Err(Error::InsufficientData("cannot split an empty panel".into()));
    }
    let b = spec.bounds(panel.len())?;
    Ok((panel.slice(b.train), panel.slice(b.validation), panel.slice(b.test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, DATE_FORMAT).unwrap()
    }

    fn parse(csv: &str) -> Result<PriceSeries> {
        read_prices(csv.as_bytes(), "TEST", &ColumnMap::default(), "TEST.csv")
    }

    #[test]
    fn parses_two_rows() {
        let s = parse("date,adj_close,volume\n2001-01-02,10.0,100\n2001-01-03,10.5,90\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.adj_close, vec![10.0, 10.5]);
        assert_eq!(s.volume, vec![100.0, 90.0]);
    }

    #[test]
    fn sorts_unordered_rows() {
        let s = parse("date,adj_close,volume\n2001-01-03,10.5,90\n2001-01-02,10.0,100\n").unwrap();
        assert_eq!(s.dates, vec![d("2001-01-02"), d("2001-01-03")]);
    }

    #[test]
    fn rejects_duplicate_date() {
        let err = parse("date,adj_close,volume\n2001-01-02,10.0,100\n2001-01-02,10.5,90\n").unwrap_err();
        assert!(
            matches!(err, Error::Validation(ref m) if m.contains("duplicate")),
            "{err}"
        );
    }

    #[test]
    fn rejects_negative_price() {
        let err = parse("date,adj_close,volume\n2001-01-02,-1.0,100\n").unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn malformed_row_names_line() {
        let err = parse("date,adj_close,volume\n2001-01-02,10.0,100\n2001-01-03,abc,90\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn custom_schema() {
        let schema = ColumnMap {
            date: "Date".into(),
            adj_close: "Adj Close".into(),
            volume: "Volume".into(),
        };
        let s = read_prices(
            "Date,Open,Adj Close,Volume\n2001-01-02,1,10.0,5\n".as_bytes(),
            "X",
            &schema,
            "X.csv",
        )
        .unwrap();
        assert_eq!(s.adj_close, vec![10.0]);
    }

    fn series(prices: &[f64]) -> PriceSeries {
        let start = d("2001-01-01");
        PriceSeries::new(
            "A",
            (0..prices.len()).map(|i| start + chrono::Days::new(i as u64)).collect(),
            prices.to_vec(),
            vec![1.0; prices.len()],
        )
        .unwrap()
    }

    #[test]
    fn returns_examples() {
        let r = compute_returns(&series(&[100.0, 110.0])).unwrap();
        assert!((r.gross[0] - 1.1).abs() < 1e-15);
        assert!((r.simple[0] - 0.1).abs() < 1e-15);
        assert_eq!(
            compute_returns(&series(&[100.0, 100.0, 100.0])).unwrap().gross,
            vec![1.0, 1.0]
        );
        assert_eq!(
            compute_returns(&series(&[100.0, 50.0, 100.0])).unwrap().gross,
            vec![0.5, 2.0]
        );
        assert!(matches!(
            compute_returns(&series(&[100.0])),
            Err(Error::InsufficientData(_))
        ));
    }

    fn panel_of(n: usize) -> AlignedPanel {
        align_panel(&[series(&vec![1.0; n])], &BTreeMap::new()).unwrap()
    }

    #[test]
    fn split_lengths() {
        let spec = SplitSpec::default();
        let (a, b, c) = split_chronological(&panel_of(10), &spec).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (7, 1, 2));
        let (a, b, c) = split_chronological(&panel_of(23), &spec).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (16, 2, 5));
    }

    #[test]
    fn split_rejects_empty_test() {
        let spec = SplitSpec {
            train: 0.5,
            validation: 0.5,
            test: 0.0,
        };
        assert!(matches!(
            split_chronological(&panel_of(10), &spec),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn align_intersects_dates() {
        let a = series(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let mut b = series(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        b.asset_id = "B".into();
        b.dates = vec![
            d("2001-01-02"),
            d("2001-01-03"),
            d("2001-01-05"),
            d("2001-01-07"),
            d("2001-01-09"),
        ];
        let p = align_panel(&[a.clone(), b], &BTreeMap::new()).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.columns[0].adj_close, vec![2.0, 3.0, 5.0]);
        assert_eq!(p.columns[1].adj_close, vec![1.0, 2.0, 3.0]);

        let single = align_panel(&[a.clone()], &BTreeMap::new()).unwrap();
        assert_eq!(single.dates, a.dates);
    }

    #[test]
    fn align_fills_neutral_sentiment() {
        let a = series(&[1.0, 2.0]);
        let mut sent = BTreeMap::new();
        sent.insert(
            "A".to_string(),
            vec![SentimentFeatures {
                date: a.dates[1],
                likes: 3.0,
                retweets: 2.0,
                comments: 1.0,
                ratio: 4.0,
            }],
        );
        let p = align_panel(&[a], &sent).unwrap();
        assert_eq!(p.row(0), vec![1.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        assert_eq!(p.row(1), vec![2.0, 3.0, 2.0, 1.0, 1.0, 4.0]);
    }

    #[test]
    fn align_rejects_disjoint_dates() {
        let a = series(&[1.0, 2.0]);
        let mut b = series(&[1.0, 2.0]);
        b.dates = vec![d("2002-01-01"), d("2002-01-02")];
        assert!(matches!(
            align_panel(&[a, b], &BTreeMap::new()),
            Err(Error::Alignment(_))
        ));
    }

    #[test]
    fn five_assets_give_thirty_features() {
        let assets: Vec<PriceSeries> = (0..5)
            .map(|i| {
                let mut s = series(&[1.0, 2.0, 3.0]);
                s.asset_id = format!("A{i}");
                s
            })
            .collect();
        let p = align_panel(&assets, &BTreeMap::new()).unwrap();
        assert_eq!(p.feature_width(), 30);
        assert_eq!(p.row(0).len(), 30);
        assert_eq!(FeatureSet::PriceOnly.width(5), 10);
        assert_eq!(FeatureSet::WithSentiment.price_columns(5), vec![0, 6, 12, 18, 24]);
        assert_eq!(FeatureSet::PriceOnly.price_columns(5), vec![0, 2, 4, 6, 8]);
    }

    #[test]
    fn panel_csv_round_trip() {
        let mut b = series(&[3.0, 4.5]);
        b.asset_id = "B_X".into();
        let p = align_panel(&[series(&[1.0, 2.25]), b], &BTreeMap::new()).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = AlignedPanel::read_csv(buf.as_slice(), "panel.csv").unwrap();
        assert_eq!(back, p);
    }
}
