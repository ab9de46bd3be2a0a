//! The bundled Adult files against counts taken independently from the raw
//! text.

use std::path::PathBuf;

use fairbound::adult::{load_adult, AdultOptions, AdultVariant};
use fairbound_core::ColumnKind;

fn files() -> Vec<PathBuf> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/adult");
    vec![root.join("adult.data"), root.join("adult.test")]
}

/// Complete rows and male share, counted straight from the text.
fn raw_counts(paths: &[PathBuf]) -> (usize, usize) {
    let (mut rows, mut male) = (0, 0);
    for p in paths {
        for line in std::fs::read_to_string(p).unwrap().lines() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 15 || fields.contains(&"?") {
                continue;
            }
            rows += 1;
            male += usize::from(fields[9] == "Male");
        }
    }
    (rows, male)
}

#[test]
fn both_files_match_raw_counts() {
    let loaded = load_adult(&files(), &AdultOptions::default()).unwrap();
    let d = &loaded.dataset;
    let (rows, male) = raw_counts(&files());
    assert_eq!(d.n_rows(), rows);
    assert_eq!(d.n_rows(), 45_222);
    assert_eq!(loaded.skipped_rows, 3_621);
    assert_eq!(d.group_counts().0, male);
    assert!((d.group_rate() - 0.6750475432311707).abs() < 1e-15);
    let positive = d.labels().iter().filter(|&&y| y == 1).count() as f64 / d.n_rows() as f64;
    assert!((positive - 0.2478439697492371).abs() < 1e-15);
}

#[test]
fn training_file_alone() {
    let loaded = load_adult(&files()[..1], &AdultOptions::default()).unwrap();
    assert_eq!(loaded.dataset.n_rows(), 30_162);
    assert!((loaded.dataset.group_rate() - 0.6756846362973278).abs() < 1e-15);
}

#[test]
fn encoding_replays_bit_exactly() {
    let loaded = load_adult(&files()[..1], &AdultOptions::default()).unwrap();
    let mut matrix = Vec::new();
    for row in &loaded.raw_rows {
        loaded.encoding.encode_row(row, &mut matrix).unwrap();
    }
    let original: Vec<u64> = loaded.dataset.features().iter().map(|v| v.to_bits()).collect();
    assert_eq!(matrix.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), original);
}

#[test]
fn starred_variant_is_discrete() {
    let opts = AdultOptions { variant: AdultVariant::Binarized { shuffle_seed: 3 }, ..Default::default() };
    let loaded = load_adult(&files()[..1], &opts).unwrap();
    assert!(loaded.dataset.column_kinds().iter().all(|k| *k == ColumnKind::Discrete));
    let again = load_adult(&files()[..1], &opts).unwrap();
    assert_eq!(loaded.dataset, again.dataset);
}
