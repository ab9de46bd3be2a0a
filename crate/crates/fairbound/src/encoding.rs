//! Column schema, feature encoding and the generic CSV loader.
//!
//! Categorical columns are one-hot encoded over their sorted levels and
//! numeric columns are standardized. The fitted [`Encoding`] is kept so the
//! same transformation can be replayed on raw rows.

use std::collections::BTreeSet;
use std::path::Path;

use fairbound_core::{ColumnKind, Dataset, Group};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

fn default_true() -> bool {
    true
}

fn default_missing() -> Vec<String> {
    vec!["?".into(), String::new()]
}

/// Column mapping for [`load_csv`], usually read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schema {
    pub label_col: String,
    pub sensitive_col: String,
    /// Label value mapped to `+1`; every other value maps to `-1`.
    pub positive_label_value: String,
    /// Sensitive value of the reference group `s+`.
    pub positive_group_value: String,
    #[serde(default)]
    pub drop_cols: Vec<String>,
    /// Columns encoded one-hot even when their values parse as numbers.
    #[serde(default)]
    pub categorical_cols: Vec<String>,
    /// Column holding externally computed eta estimates.
    #[serde(default)]
    pub eta_col: Option<String>,
    #[serde(default = "default_true")]
    pub has_header: bool,
    /// Tokens treated as missing; rows containing one are skipped.
    #[serde(default = "default_missing")]
    pub missing_values: Vec<String>,
}

impl Schema {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        toml::from_str(&text).map_err(|source| Error::SchemaFile { path: path.to_path_buf(), source })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ColumnEncoding {
    /// `(value - mean) / scale`; `scale` is the population standard
    /// deviation, or 1 for a constant column.
    Numeric { name: String, mean: f64, scale: f64, discrete: bool },
    /// One indicator per level, in sorted order.
    Categorical { name: String, levels: Vec<String> },
}

impl ColumnEncoding {
    pub fn name(&self) -> &str {
        match self {
            ColumnEncoding::Numeric { name, .. } | ColumnEncoding::Categorical { name, .. } => name,
        }
    }

    fn width(&self) -> usize {
        match self {
            ColumnEncoding::Numeric { .. } => 1,
            ColumnEncoding::Categorical { levels, .. } => levels.len(),
        }
    }
}

/// Fitted transformation from raw feature columns to the feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    pub columns: Vec<ColumnEncoding>,
}

impl Encoding {
    /// Fits the encoding on raw rows (one string per feature column).
    /// A column is numeric unless forced categorical or some value fails to
    /// parse; numeric columns with at most two distinct values are discrete.
    pub fn fit(names: &[String], rows: &[Vec<String>], force_categorical: &[bool]) -> Result<Self> {
        let mut columns = Vec::with_capacity(names.len());
        for (j, name) in names.iter().enumerate() {
            let parsed: Option<Vec<f64>> = if force_categorical[j] {
                None
            } else {
                rows.iter().map(|r| r[j].trim().parse::<f64>().ok().filter(|v| v.is_finite())).collect()
            };
            let col = match parsed {
                Some(values) => {
                    let n = values.len().max(1) as f64;
                    let mean = values.iter().sum::<f64>() / n;
                    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                    let sd = var.sqrt();
                    let distinct: BTreeSet<u64> = values.iter().map(|v| v.to_bits()).collect();
                    ColumnEncoding::Numeric {
                        name: name.clone(),
                        mean,
                        scale: if sd > 0.0 { sd } else { 1.0 },
                        discrete: distinct.len() <= 2,
                    }
                }
                None => {
                    let levels: BTreeSet<&str> = rows.iter().map(|r| r[j].trim()).collect();
                    ColumnEncoding::Categorical { name: name.clone(), levels: levels.into_iter().map(String::from).collect() }
                }
            };
            columns.push(col);
        }
        Ok(Encoding { columns })
    }

    pub fn n_features(&self) -> usize {
        self.columns.iter().map(ColumnEncoding::width).sum()
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.n_features());
        for c in &self.columns {
            match c {
                ColumnEncoding::Numeric { name, .. } => out.push(name.clone()),
                ColumnEncoding::Categorical { name, levels } => {
                    out.extend(levels.iter().map(|l| format!("{name}={l}")));
                }
            }
        }
        out
    }

    pub fn column_kinds(&self) -> Vec<ColumnKind> {
        let mut out = Vec::with_capacity(self.n_features());
        for c in &self.columns {
            match c {
                ColumnEncoding::Numeric { discrete, .. } => {
                    out.push(if *discrete { ColumnKind::Discrete } else { ColumnKind::Continuous });
                }
                ColumnEncoding::Categorical { levels, .. } => out.extend(levels.iter().map(|_| ColumnKind::Discrete)),
            }
        }
        out
    }

    /// Appends the encoded features of one raw row to `out`.
    pub fn encode_row<S: AsRef<str>>(&self, raw: &[S], out: &mut Vec<f64>) -> Result<()> {
        if raw.len() != self.columns.len() {
            return Err(Error::Encode(format!("expected {} raw columns, found {}", self.columns.len(), raw.len())));
        }
        for (c, value) in self.columns.iter().zip(raw) {
            let value = value.as_ref().trim();
            match c {
                ColumnEncoding::Numeric { name, mean, scale, .. } => {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| Error::Encode(format!("column {name}: '{value}' is not a number")))?;
                    out.push((v - mean) / scale);
                }
                ColumnEncoding::Categorical { name, levels } => {
                    let hit = levels
                        .binary_search_by(|l| l.as_str().cmp(value))
                        .map_err(|_| Error::Encode(format!("column {name}: unseen level '{value}'")))?;
                    out.extend((0..levels.len()).map(|k| if k == hit { 1.0 } else { 0.0 }));
                }
            }
        }
        Ok(())
    }
}

/// A dataset together with how it was produced.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: Dataset,
    pub encoding: Encoding,
    /// Raw feature columns of the retained rows, in file order.
    pub raw_rows: Vec<Vec<String>>,
    /// Eta estimates read from the schema's eta column.
    pub eta_column: Option<Vec<f64>>,
    /// Rows dropped for a wrong field count, a missing value or an
    /// unparseable eta entry.
    pub skipped_rows: usize,
    pub source: String,
}

/// Tabular rows split into label, group, optional eta and feature columns.
pub(crate) struct RawTable {
    pub feature_names: Vec<String>,
    pub force_categorical: Vec<bool>,
    pub features: Vec<Vec<String>>,
    pub labels: Vec<i8>,
    pub sensitive: Vec<Group>,
    pub eta: Option<Vec<f64>>,
    pub skipped: usize,
}

impl RawTable {
    pub fn into_loaded(self, source: String) -> Result<Loaded> {
        let encoding = Encoding::fit(&self.feature_names, &self.features, &self.force_categorical)?;
        let mut matrix = Vec::with_capacity(self.features.len() * encoding.n_features());
        for row in &self.features {
            encoding.encode_row(row, &mut matrix)?;
        }
        let dataset = Dataset::new(
            matrix,
            encoding.n_features(),
            self.labels,
            self.sensitive,
            encoding.feature_names(),
            encoding.column_kinds(),
        )?;
        Ok(Loaded {
            dataset,
            encoding,
            raw_rows: self.features,
            eta_column: self.eta,
            skipped_rows: self.skipped,
            source,
        })
    }
}

/// Reads a comma-separated file according to `schema`.
///
/// Rows with a wrong number of fields, a missing-value token in any used
/// column, or an eta entry outside `[0, 1]` are skipped and counted.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<Loaded> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(schema.has_header).flexible(true).from_reader(file);
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };

    let header: Vec<String> = if schema.has_header {
        reader.headers().map_err(csv_err)?.iter().map(|h| h.trim().to_string()).collect()
    } else {
        Vec::new()
    };
    let mut records = Vec::new();
    for rec in reader.records() {
        records.push(rec.map_err(csv_err)?);
    }
    let width = if schema.has_header { header.len() } else { records.first().map_or(0, |r| r.len()) };
    let header: Vec<String> = if schema.has_header { header } else { (0..width).map(|j| j.to_string()).collect() };

    let find = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| Error::Schema(format!("column '{name}' not found")))
    };
    let label_idx = find(&schema.label_col)?;
    let group_idx = find(&schema.sensitive_col)?;
    let eta_idx = schema.eta_col.as_deref().map(find).transpose()?;
    for d in &schema.drop_cols {
        find(d)?;
    }
    for c in &schema.categorical_cols {
        find(c)?;
    }
    let feature_idx: Vec<usize> = (0..width)
        .filter(|&j| j != label_idx && j != group_idx && Some(j) != eta_idx && !schema.drop_cols.contains(&header[j]))
        .collect();

    let mut table = RawTable {
        feature_names: feature_idx.iter().map(|&j| header[j].clone()).collect(),
        force_categorical: feature_idx.iter().map(|&j| schema.categorical_cols.contains(&header[j])).collect(),
        features: Vec::new(),
        labels: Vec::new(),
        sensitive: Vec::new(),
        eta: eta_idx.map(|_| Vec::new()),
        skipped: 0,
    };
    let is_missing = |v: &str| schema.missing_values.iter().any(|m| m == v.trim());
    for rec in &records {
        if rec.len() != width {
            table.skipped += 1;
            continue;
        }
        let used = feature_idx.iter().chain([&label_idx, &group_idx]).chain(eta_idx.as_ref());
        if used.into_iter().any(|&j| is_missing(&rec[j])) {
            table.skipped += 1;
            continue;
        }
        if let (Some(j), Some(eta)) = (eta_idx, table.eta.as_mut()) {
            match rec[j].trim().parse::<f64>() {
                Ok(v) if (0.0..=1.0).contains(&v) => eta.push(v),
                _ => {
                    table.skipped += 1;
                    continue;
                }
            }
        }
        table.features.push(feature_idx.iter().map(|&j| rec[j].trim().to_string()).collect());
        table.labels.push(if rec[label_idx].trim() == schema.positive_label_value { 1 } else { -1 });
        table.sensitive.push(if rec[group_idx].trim() == schema.positive_group_value {
            Group::Reference
        } else {
            Group::Protected
        });
    }
    if table.features.len() < 2 {
        return Err(Error::NoUsableRows { path: path.to_path_buf(), skipped: table.skipped });
    }
    table.into_loaded(path.display().to_string())
}
