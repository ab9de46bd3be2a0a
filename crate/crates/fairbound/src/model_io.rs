//! Versioned plain-text model record:
//!
//! ```text
//! fairbound-model 1
//! config_digest<TAB><hex>
//! bias<TAB><value>
//! weight<TAB><feature name><TAB><value>
//! ```
//!
//! Values are written in the shortest form that parses back exactly.

use std::path::Path;

use fairbound_core::LinearModel;

use crate::error::{io_err, Error, Result};

pub const MODEL_FORMAT: &str = "fairbound-model 1";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelRecord {
    pub model: LinearModel,
    pub feature_names: Vec<String>,
    pub config_digest: String,
}

impl ModelRecord {
    pub fn to_text(&self) -> String {
        let mut out = format!("{MODEL_FORMAT}\nconfig_digest\t{}\nbias\t{}\n", self.config_digest, self.model.bias);
        for (name, w) in self.feature_names.iter().zip(&self.model.weights) {
            out.push_str(&format!("weight\t{name}\t{w}\n"));
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let bad = |line: usize, reason: &str| Error::Format { path: path.to_path_buf(), line, reason: reason.to_string() };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, MODEL_FORMAT)) => {}
            _ => return Err(bad(1, "not a fairbound model record")),
        }
        let mut digest = None;
        let mut bias = None;
        let mut names = Vec::new();
        let mut weights = Vec::new();
        for (i, line) in lines {
            let fields: Vec<&str> = line.split('\t').collect();
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1, "invalid number"));
            match fields.as_slice() {
                ["config_digest", d] => digest = Some(d.to_string()),
                ["bias", v] => bias = Some(num(v)?),
                ["weight", name, v] => {
                    names.push(name.to_string());
                    weights.push(num(v)?);
                }
                [""] => {}
                _ => return Err(bad(i + 1, "unrecognized line")),
            }
        }
        let bias = bias.ok_or_else(|| bad(0, "missing bias"))?;
        Ok(ModelRecord {
            model: LinearModel { weights, bias },
            feature_names: names,
            config_digest: digest.unwrap_or_default(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, path)
    }
}
