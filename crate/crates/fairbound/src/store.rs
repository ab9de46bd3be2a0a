//! On-disk form of an ingested dataset: `dataset.csv` (encoded features,
//! labels, groups and optional eta estimates), `encoding.json` and a
//! key-value `manifest.txt`. Every file is written to a temporary sibling
//! and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use fairbound_core::dataset::EtaSource;
use fairbound_core::{ColumnKind, Dataset, Group};
use sha2::{Digest, Sha256};

use crate::encoding::Encoding;
use crate::error::{io_err, Error, Result};

pub const MANIFEST_FORMAT: &str = "fairbound-manifest 1";
pub const DATASET_FILE: &str = "dataset.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const ENCODING_FILE: &str = "encoding.json";

const LABEL_COL: &str = "__label";
const GROUP_COL: &str = "__group";
const ETA_COL: &str = "__eta";

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so that a failure never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err(&dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Ordered `key = value` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn parse(text: &str) -> Option<Self> {
        let mut m = Manifest::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line.split_once(" = ")?;
            m.push(k.trim(), v);
        }
        Some(m)
    }

    pub fn digest(&self) -> String {
        sha256_hex(self.to_text().as_bytes())
    }
}

fn kinds_text(kinds: &[ColumnKind]) -> String {
    kinds.iter().map(|k| if *k == ColumnKind::Discrete { 'D' } else { 'C' }).collect()
}

fn eta_source_name(source: Option<EtaSource>, method: &str) -> String {
    match source {
        Some(_) => method.to_string(),
        None => "none".to_string(),
    }
}

/// Serializes the encoded dataset as CSV; floats use the shortest
/// representation that parses back to the same value.
pub fn dataset_csv(data: &Dataset) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = data.feature_names().to_vec();
    header.push(LABEL_COL.into());
    header.push(GROUP_COL.into());
    if data.eta().is_some() {
        header.push(ETA_COL.into());
    }
    w.write_record(&header).expect("writing to memory");
    for i in 0..data.n_rows() {
        let mut rec: Vec<String> = data.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(data.labels()[i].to_string());
        rec.push(if data.sensitive()[i].is_reference() { "1" } else { "0" }.into());
        if let Some(eta) = data.eta() {
            rec.push(eta[i].to_string());
        }
        w.write_record(&rec).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

/// Manifest describing `data`, together with the `dataset.csv` bytes it
/// refers to.
pub fn build_manifest(data: &Dataset, source: &str, skipped_rows: usize, eta_method: &str) -> (Manifest, Vec<u8>) {
    let csv_bytes = dataset_csv(data);
    let (n_ref, n_prot) = data.group_counts();
    let mut m = Manifest::default();
    m.push("format", MANIFEST_FORMAT);
    m.push("source", source);
    m.push("n_rows", data.n_rows());
    m.push("n_features", data.n_features());
    m.push("reference_rows", n_ref);
    m.push("protected_rows", n_prot);
    m.push("group_rate", crate::report::fmt_num(data.group_rate()));
    m.push("skipped_rows", skipped_rows);
    m.push("eta_method", eta_source_name(data.eta_source(), eta_method));
    m.push("column_kinds", kinds_text(data.column_kinds()));
    m.push("dataset_sha256", sha256_hex(&csv_bytes));
    (m, csv_bytes)
}

/// Writes an ingested dataset into `dir` and returns its manifest.
pub fn write_ingested(
    dir: &Path,
    data: &Dataset,
    encoding: &Encoding,
    source: &str,
    skipped_rows: usize,
    eta_method: &str,
) -> Result<Manifest> {
    let (m, csv_bytes) = build_manifest(data, source, skipped_rows, eta_method);
    write_atomic(&dir.join(DATASET_FILE), &csv_bytes)?;
    write_atomic(&dir.join(ENCODING_FILE), serde_json::to_string_pretty(encoding)?.as_bytes())?;
    write_atomic(&dir.join(MANIFEST_FILE), m.to_text().as_bytes())?;
    Ok(m)
}

/// A dataset read back from an ingest directory.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    pub manifest: Manifest,
    pub encoding: Option<Encoding>,
}

pub fn read_ingested(dir: &Path) -> Result<Ingested> {
    let mpath = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&mpath).map_err(io_err(&mpath))?;
    let bad = |reason: &str| Error::Format { path: mpath.clone(), line: 0, reason: reason.to_string() };
    let manifest = Manifest::parse(&text).ok_or_else(|| bad("malformed key-value line"))?;
    if manifest.get("format") != Some(MANIFEST_FORMAT) {
        return Err(bad("unsupported manifest format"));
    }
    let kinds: Vec<ColumnKind> = manifest
        .get("column_kinds")
        .ok_or_else(|| bad("missing column_kinds"))?
        .chars()
        .map(|c| if c == 'D' { ColumnKind::Discrete } else { ColumnKind::Continuous })
        .collect();

    let dpath = dir.join(DATASET_FILE);
    let mut reader = csv::Reader::from_path(&dpath).map_err(|source| Error::Csv { path: dpath.clone(), source })?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|source| Error::Csv { path: dpath.clone(), source })?
        .iter()
        .map(String::from)
        .collect();
    let has_eta = header.last().map(String::as_str) == Some(ETA_COL);
    let d = header.len() - 2 - usize::from(has_eta);
    if d != kinds.len() {
        return Err(bad("column_kinds does not match the dataset header"));
    }
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut sensitive = Vec::new();
    let mut eta = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|source| Error::Csv { path: dpath.clone(), source })?;
        let parse = |j: usize| -> Result<f64> {
            rec[j].parse().map_err(|_| Error::Format {
                path: dpath.clone(),
                line: line + 2,
                reason: format!("'{}' is not a number", &rec[j]),
            })
        };
        for j in 0..d {
            features.push(parse(j)?);
        }
        labels.push(parse(d)? as i8);
        sensitive.push(if parse(d + 1)? == 1.0 { Group::Reference } else { Group::Protected });
        if has_eta {
            eta.push(parse(d + 2)?);
        }
    }
    let mut dataset = Dataset::new(features, d, labels, sensitive, header[..d].to_vec(), kinds)?;
    if has_eta {
        let source = match manifest.get("eta_method") {
            Some("freq") => EtaSource::GroupFrequency,
            Some("model") => EtaSource::Model,
            _ => EtaSource::Supplied,
        };
        dataset = dataset.with_eta(eta, source)?;
    }
    let epath = dir.join(ENCODING_FILE);
    let encoding = match std::fs::read_to_string(&epath) {
        Ok(t) => Some(serde_json::from_str(&t)?),
        Err(_) => None,
    };
    Ok(Ingested { dataset, manifest, encoding })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fairbound_core::EtaEstimator;

    #[test]
    fn round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let data = fairbound_core::synthetic::biased_family(&Default::default())
            .unwrap()
            .estimate_eta(&EtaEstimator::model(1e-3))
            .unwrap();
        let enc = Encoding { columns: vec![] };
        let m = write_ingested(dir.path(), &data, &enc, "synthetic", 0, "model").unwrap();
        let back = read_ingested(dir.path()).unwrap();
        assert_eq!(back.dataset, data);
        assert_eq!(back.manifest, m);
        let again = write_ingested(dir.path(), &data, &enc, "synthetic", 0, "model").unwrap();
        assert_eq!(again.to_text(), m.to_text());
    }

    #[test]
    fn manifest_text_round_trips() {
        let mut m = Manifest::default();
        m.push("a", 1);
        m.push("source", "x = y.csv");
        assert_eq!(Manifest::parse(&m.to_text()).unwrap(), m);
        assert_eq!(m.get("source"), Some("x = y.csv"));
    }
}
