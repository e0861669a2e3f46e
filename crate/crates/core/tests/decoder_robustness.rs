//! Replays the checked-in fuzz corpus and feeds arbitrary text to the
//! decoders, applying the same checks as the fuzz targets.

use std::path::PathBuf;

use pcdfpca::io::{format_matrix_csv, parse_matrix_csv};
use pcdfpca::model::PcDfpcaModel;
use proptest::prelude::*;

fn corpus(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| entry.unwrap().path())
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect()
}

fn check_csv(text: &str) -> bool {
    match parse_matrix_csv(text) {
        Ok(parsed) => {
            assert!(parsed.data.nrows() > 0);
            assert!(parsed.data.iter().all(|v| v.is_finite()));
            let again = parse_matrix_csv(&format_matrix_csv(&parsed.data, None)).unwrap();
            assert_eq!(again.data, parsed.data);
            true
        }
        Err(_) => false,
    }
}

fn check_model(text: &str) -> bool {
    match PcDfpcaModel::from_json_str(text) {
        Ok(model) => {
            for d in 0..model.period() {
                for m in 0..model.ncomp() {
                    for l in model.lag_range(d) {
                        assert_eq!(model.filter(d, m, l).map(<[f64]>::len), Some(model.nbasis()));
                    }
                }
            }
            assert_eq!(PcDfpcaModel::from_json_str(&model.to_json().unwrap()).unwrap(), model);
            true
        }
        Err(_) => false,
    }
}

#[test]
fn csv_corpus() {
    let files = corpus("csv_matrix");
    assert!(!files.is_empty());
    let accepted = files.iter().filter(|(_, text)| check_csv(text)).count();
    assert!(accepted > 0 && accepted < files.len());
}

#[test]
fn model_corpus() {
    let files = corpus("model_json");
    assert!(!files.is_empty());
    let accepted = files.iter().filter(|(_, text)| check_model(text)).count();
    assert!(accepted > 0 && accepted < files.len());
}

proptest! {
    #[test]
    fn csv_never_panics(text in "[0-9eE.,+\\-a-z\" \n\r]{0,80}") {
        check_csv(&text);
    }

    #[test]
    fn model_json_never_panics(text in "\\PC{0,120}") {
        check_model(&text);
    }

    #[test]
    fn corrupted_model_never_panics(index in 0usize..2000, byte in 0u8..128) {
        let (_, text) = corpus("model_json").into_iter().find(|(p, _)| p.ends_with("small.json")).unwrap();
        let mut bytes = text.into_bytes();
        let i = index % bytes.len();
        bytes[i] = byte;
        if let Ok(text) = String::from_utf8(bytes) {
            check_model(&text);
        }
    }
}
