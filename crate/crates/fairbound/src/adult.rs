//! Loader for the UCI Adult census files (`adult.data`, `adult.test`).
//!
//! The label is `+1` for an income above 50K (the test file writes `>50K.`)
//! and the sensitive attribute is sex. Rows with a `?` or a wrong field
//! count are dropped and counted.

use std::path::{Path, PathBuf};

use fairbound_core::Group;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encoding::{Loaded, RawTable};
use crate::error::{io_err, Error, Result};

pub const COLUMNS: [&str; 15] = [
    "age",
    "workclass",
    "fnlwgt",
    "education",
    "education-num",
    "marital-status",
    "occupation",
    "relationship",
    "race",
    "sex",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
    "native-country",
    "income",
];

const NUMERIC: [&str; 6] = ["age", "fnlwgt", "education-num", "capital-gain", "capital-loss", "hours-per-week"];
const SEX: usize = 9;
const INCOME: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdultVariant {
    #[default]
    Raw,
    /// Numeric columns binarized at their median and the sex column randomly
    /// permuted, so that features carry no information about the group.
    Binarized { shuffle_seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdultOptions {
    /// Sex value of the reference group.
    pub reference_sex: String,
    /// The census sampling weight is not a property of the person and is
    /// dropped unless requested.
    pub keep_fnlwgt: bool,
    pub variant: AdultVariant,
}

impl Default for AdultOptions {
    fn default() -> Self {
        AdultOptions { reference_sex: "Male".into(), keep_fnlwgt: false, variant: AdultVariant::Raw }
    }
}

/// Reads and concatenates one or more Adult files.
pub fn load_adult(paths: &[PathBuf], opts: &AdultOptions) -> Result<Loaded> {
    if paths.is_empty() {
        return Err(Error::Schema("no Adult file given".into()));
    }
    let feature_cols: Vec<usize> =
        (0..COLUMNS.len()).filter(|&j| j != SEX && j != INCOME && (opts.keep_fnlwgt || COLUMNS[j] != "fnlwgt")).collect();
    let mut table = RawTable {
        feature_names: feature_cols.iter().map(|&j| COLUMNS[j].to_string()).collect(),
        force_categorical: vec![false; feature_cols.len()],
        features: Vec::new(),
        labels: Vec::new(),
        sensitive: Vec::new(),
        eta: None,
        skipped: 0,
    };
    for path in paths {
        read_file(path, &feature_cols, opts, &mut table)?;
    }
    if table.features.len() < 2 {
        return Err(Error::NoUsableRows { path: paths[0].clone(), skipped: table.skipped });
    }
    if let AdultVariant::Binarized { shuffle_seed } = opts.variant {
        binarize_numeric(&mut table, &feature_cols);
        table.sensitive.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
    }
    let source = paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join("+");
    table.into_loaded(source)
}

fn read_file(path: &Path, feature_cols: &[usize], opts: &AdultOptions, table: &mut RawTable) -> Result<()> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    for rec in reader.records() {
        let rec = rec.map_err(|source| Error::Csv { path: path.to_path_buf(), source })?;
        if rec.len() != COLUMNS.len() || rec.iter().any(|v| v == "?") {
            table.skipped += 1;
            continue;
        }
        let income = rec[INCOME].trim_end_matches('.');
        let label = match income {
            ">50K" => 1,
            "<=50K" => -1,
            _ => {
                table.skipped += 1;
                continue;
            }
        };
        table.features.push(feature_cols.iter().map(|&j| rec[j].to_string()).collect());
        table.labels.push(label);
        table.sensitive.push(if rec[SEX] == opts.reference_sex { Group::Reference } else { Group::Protected });
    }
    Ok(())
}

fn binarize_numeric(table: &mut RawTable, feature_cols: &[usize]) {
    for (k, &j) in feature_cols.iter().enumerate() {
        if !NUMERIC.contains(&COLUMNS[j]) {
            continue;
        }
        let mut values: Vec<f64> = table.features.iter().filter_map(|r| r[k].parse().ok()).collect();
        values.sort_by(f64::total_cmp);
        let median = values[values.len() / 2];
        for row in &mut table.features {
            let above = row[k].parse::<f64>().is_ok_and(|v| v > median);
            row[k] = if above { "1" } else { "0" }.to_string();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fairbound_core::ColumnKind;
    use std::io::Write;

    const SAMPLE: &str = "\
39, State-gov, 77516, Bachelors, 13, Never-married, Adm-clerical, Not-in-family, White, Male, 2174, 0, 40, United-States, <=50K
50, Self-emp-not-inc, 83311, Bachelors, 13, Married-civ-spouse, Exec-managerial, Husband, White, Male, 0, 0, 13, United-States, >50K
38, Private, 215646, HS-grad, 9, Divorced, Handlers-cleaners, Not-in-family, White, Female, 0, 0, 40, ?, <=50K
53, Private, 234721, 11th, 7, Married-civ-spouse, Handlers-cleaners, Husband, Black, Female, 0, 0, 40, United-States, >50K.

";

    fn sample() -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "|1x3 Cross validator\n{SAMPLE}").unwrap();
        f
    }

    #[test]
    fn parses_labels_groups_and_skips() {
        let f = sample();
        let l = load_adult(&[f.path().to_path_buf()], &AdultOptions::default()).unwrap();
        assert_eq!(l.dataset.n_rows(), 3);
        // header line and the row with '?'
        assert_eq!(l.skipped_rows, 2);
        assert_eq!(l.dataset.labels(), &[-1, 1, 1]);
        assert_eq!(l.dataset.sensitive(), &[Group::Reference, Group::Reference, Group::Protected]);
        assert!(!l.dataset.feature_names().iter().any(|n| n == "fnlwgt"));
    }

    #[test]
    fn binarized_variant_is_discrete() {
        let f = sample();
        let opts = AdultOptions { variant: AdultVariant::Binarized { shuffle_seed: 3 }, ..Default::default() };
        let l = load_adult(&[f.path().to_path_buf()], &opts).unwrap();
        assert!(l.dataset.column_kinds().iter().all(|k| *k == ColumnKind::Discrete));
        let (n_ref, _) = l.dataset.group_counts();
        assert_eq!(n_ref, 2);
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = load_adult(&[PathBuf::from("/no/such/adult.data")], &AdultOptions::default()).unwrap_err();
        assert!(err.to_string().contains("/no/such/adult.data"));
    }
}
