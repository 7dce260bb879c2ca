use hqnn::hqnn_core::synth::{synth_data, Regime};
use hqnn::io::{ingest_csv, ohlc_csv, read_ohlc, write_atomic, IngestError};

#[test]
fn reads_well_formed_file() {
    let csv = "date,open,high,low,close\n\
               2024-03-01,10,11,9.5,10.5\n\
               2024-03-04,10.5,12,10,11.5\n\
               2024-03-05,11.5,11.8,11,11.2\n";
    let s = read_ohlc(csv.as_bytes()).unwrap();
    assert_eq!(s.len(), 3);
    assert_eq!(s.close(), [10.5, 11.5, 11.2]);
    assert_eq!(s.timestamps()[1] - s.timestamps()[0], 3);
}

#[test]
fn missing_low_is_named() {
    let err = read_ohlc("date,open,high,close\n2024-03-01,1,2,1.5\n".as_bytes()).unwrap_err();
    assert!(matches!(err, IngestError::MissingColumn("low")));
    assert!(err.is_format());
    assert!(err.to_string().contains("low"));
}

#[test]
fn inconsistent_bar_cites_row() {
    let csv = "date,open,high,low,close\n2024-03-01,1,2,0.5,1.5\n2024-03-02,1.5,1.6,1.0,1.9\n";
    let err = read_ohlc(csv.as_bytes()).unwrap_err();
    assert!(matches!(err, IngestError::Row { row: 3, .. }), "{err}");
    assert!(!err.is_format());
    assert!(err.to_string().starts_with("row 3"));
}

#[test]
fn duplicate_dates_are_rejected() {
    let csv = "date,open,high,low,close\n2024-03-02,1,2,0.5,1.5\n2024-03-01,1,2,0.5,1.5\n2024-03-02,1,2,0.5,1.5\n";
    match read_ohlc(csv.as_bytes()).unwrap_err() {
        IngestError::DuplicateDate { row, first, .. } => assert_eq!((first, row), (2, 4)),
        other => panic!("{other}"),
    }
}

#[test]
fn written_series_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bars.csv");
    let s = synth_data(80, 3, Regime::Walk).unwrap();
    write_atomic(&path, ohlc_csv(&s).unwrap().as_bytes()).unwrap();
    let back = ingest_csv(&path).unwrap();
    assert_eq!(back.close(), s.close());
    assert_eq!(back.high(), s.high());
    assert!(matches!(ingest_csv(&dir.path().join("none.csv")), Err(IngestError::Io(_))));
}
