//! CSV ingestion and emission for OHLC bars, feature matrices and loss
//! histories, plus atomic file writes.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use hqnn_core::indicators::OhlcSeries;
use hqnn_core::preprocess::FeatureMatrix;
use hqnn_core::train::EpochLoss;
use thiserror::Error;

pub const OHLC_COLUMNS: [&str; 5] = ["date", "open", "high", "low", "close"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("row {row}: duplicate date {date} (first seen on row {first})")]
    DuplicateDate { row: usize, first: usize, date: NaiveDate },
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Series(#[from] hqnn_core::Error),
}

impl IngestError {
    /// Formatting problems, as opposed to bad values.
    pub fn is_format(&self) -> bool {
        matches!(self, IngestError::MissingColumn(_) | IngestError::Csv(_))
    }
}

/// Day index used as the series timestamp.
pub fn day_index(date: NaiveDate) -> i64 {
    i64::from(date.num_days_from_ce())
}

pub fn date_of(day: i64) -> Option<NaiveDate> {
    i32::try_from(day).ok().and_then(NaiveDate::from_num_days_from_ce_opt)
}

struct Bar {
    row: usize,
    date: NaiveDate,
    ohlc: [f64; 4],
}

/// Reads `date,open,high,low,close` bars (header case-insensitive, extra
/// columns ignored). Rows may come in any order; they are sorted by date.
/// Row numbers in errors count the header as row 1.
pub fn read_ohlc(reader: impl Read) -> Result<OhlcSeries, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_ascii_lowercase).collect();
    let mut index = [0usize; 5];
    for (slot, name) in index.iter_mut().zip(OHLC_COLUMNS) {
        *slot = header
            .iter()
            .position(|h| h == name)
            .ok_or(IngestError::MissingColumn(name))?;
    }
    let mut bars = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let field = |j: usize| record.get(index[j]).unwrap_or("");
        let date = NaiveDate::parse_from_str(field(0), "%Y-%m-%d").map_err(|e| IngestError::Row {
            row,
            message: format!("bad date {:?}: {e}", field(0)),
        })?;
        let mut ohlc = [0.0; 4];
        for (j, v) in ohlc.iter_mut().enumerate() {
            let raw = field(j + 1);
            *v = raw
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| IngestError::Row {
                    row,
                    message: format!("{} is not a finite number: {raw:?}", OHLC_COLUMNS[j + 1]),
                })?;
        }
        let [o, h, l, c] = ohlc;
        if h < o.max(c) || l > o.min(c) || l > h {
            return Err(IngestError::Row {
                row,
                message: format!("inconsistent bar: open {o}, high {h}, low {l}, close {c}"),
            });
        }
        bars.push(Bar { row, date, ohlc });
    }
    bars.sort_by_key(|b| (b.date, b.row));
    if let Some(w) = bars.windows(2).find(|w| w[0].date == w[1].date) {
        return Err(IngestError::DuplicateDate {
            row: w[1].row,
            first: w[0].row,
            date: w[1].date,
        });
    }
    let col = |j: usize| bars.iter().map(|b| b.ohlc[j]).collect();
    Ok(OhlcSeries::new(
        bars.iter().map(|b| day_index(b.date)).collect(),
        col(0),
        col(1),
        col(2),
        col(3),
    )?)
}

pub fn ingest_csv(path: &Path) -> Result<OhlcSeries, IngestError> {
    read_ohlc(fs::File::open(path)?)
}

pub fn ohlc_csv(series: &OhlcSeries) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(OHLC_COLUMNS)?;
    for i in 0..series.len() {
        let date = date_of(series.timestamps()[i]).map_or_else(|| series.timestamps()[i].to_string(), |d| d.to_string());
        w.write_record([
            date,
            series.open()[i].to_string(),
            series.high()[i].to_string(),
            series.low()[i].to_string(),
            series.close()[i].to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
}

/// Feature rows with their source bar index and the raw close target.
pub fn features_csv(matrix: &FeatureMatrix) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["bar".to_string()];
    header.extend(matrix.column_names.iter().cloned());
    header.push("target".into());
    w.write_record(&header)?;
    for (i, row) in matrix.rows.iter().enumerate() {
        let mut rec = vec![matrix.source_index[i].to_string()];
        rec.extend(row.iter().map(f64::to_string));
        rec.push(matrix.target[i].to_string());
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
}

/// `fold,epoch,train_mse,val_mse` rows.
pub fn loss_csv(fold: usize, history: &[EpochLoss]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["fold", "epoch", "train_mse", "val_mse"])?;
    for e in history {
        w.write_record([
            fold.to_string(),
            e.epoch.to_string(),
            e.train_mse.to_string(),
            e.val_mse.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
}

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
