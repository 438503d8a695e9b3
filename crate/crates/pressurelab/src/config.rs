//! JSON system configuration: strict schema, 1-based matrix keys, and
//! field-precise validation messages.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Mat, MatrixFamily};
use crate::sft::{SubshiftSpec, Word};

/// On-disk system description. Unknown fields are rejected so typos in
/// matrix keys or option names fail loudly.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Alphabet size.
    pub m: usize,
    /// Optional 0/1 transition matrix; omitted means the full shift.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<Vec<Vec<u8>>>,
    /// Matrix dimension.
    pub d: usize,
    /// Locally-constant depth; 1 attaches one matrix per symbol.
    #[serde(default = "default_depth")]
    pub depth: usize,
    /// Row-major matrices keyed by 1-based depth-words ("1", "21", …).
    pub matrices: BTreeMap<String, Vec<Vec<f64>>>,
    /// Optional display names keyed like `matrices`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<BTreeMap<String, String>>,
}

fn default_depth() -> usize {
    1
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<SystemConfig> {
        serde_json::from_str(text).map_err(|e| {
            Error::Input(format!(
                "config parse error at line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })
    }

    pub fn load(path: &Path) -> Result<SystemConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Validate and build the subshift plus matrix family.
    pub fn build(&self) -> Result<(SubshiftSpec, MatrixFamily)> {
        let spec = match &self.adjacency {
            Some(rows) => SubshiftSpec::new(self.m, rows)?,
            None => SubshiftSpec::full_shift(self.m)?,
        };
        if self.d == 0 {
            return Err(Error::Input(
                "d: matrix dimension must be at least 1".into(),
            ));
        }
        if self.depth == 0 {
            return Err(Error::Input("depth: must be at least 1".into()));
        }
        let mut table = Vec::with_capacity(self.matrices.len());
        for (key, rows) in &self.matrices {
            let word =
                Word::parse(key).map_err(|e| Error::Input(format!("matrices.\"{key}\": {e}")))?;
            if rows.len() != self.d {
                return Err(Error::Input(format!(
                    "matrices.\"{key}\": {} rows, expected d={}",
                    rows.len(),
                    self.d
                )));
            }
            for (i, row) in rows.iter().enumerate() {
                if row.len() != self.d {
                    return Err(Error::Input(format!(
                        "matrices.\"{key}\"[{i}]: {} entries, expected d={}",
                        row.len(),
                        self.d
                    )));
                }
                for (j, &x) in row.iter().enumerate() {
                    if !x.is_finite() || x < 0.0 {
                        return Err(Error::Input(format!(
                            "matrices.\"{key}\"[{i}][{j}]: entry {x} must be a non-negative number"
                        )));
                    }
                }
            }
            let mat = Mat::from_rows(rows)
                .map_err(|e| Error::Input(format!("matrices.\"{key}\": {e}")))?;
            table.push((word, mat));
        }
        let family = MatrixFamily::new(spec.clone(), self.depth, table)?;
        Ok((spec, family))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_json() -> String {
        r#"{
            "m": 3,
            "d": 2,
            "matrices": {
                "1": [[1.0, 1.0], [0.0, 1.0]],
                "2": [[0.5, 0.5], [0.5, 0.5]],
                "3": [[1.0, 0.0], [1.0, 1.0]]
            }
        }"#
        .to_string()
    }

    #[test]
    fn golden_config_builds() {
        let cfg = SystemConfig::from_json(&golden_json()).unwrap();
        let (spec, fam) = cfg.build().unwrap();
        assert_eq!(spec.m(), 3);
        assert!(spec.is_full_shift());
        assert_eq!(fam.d(), 2);
        assert_eq!(fam.depth(), 1);
    }

    #[test]
    fn negative_entries_are_located() {
        let text = r#"{"m":2,"d":1,"matrices":{"1":[[-1.0]],"2":[[1.0]]}}"#;
        let cfg = SystemConfig::from_json(text).unwrap();
        let err = cfg.build().unwrap_err().to_string();
        assert!(err.contains("matrices.\"1\"[0][0]"), "message was: {err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"m":2,"d":1,"matrces":{"1":[[1.0]],"2":[[1.0]]}}"#;
        let err = SystemConfig::from_json(text).unwrap_err().to_string();
        assert!(err.contains("line"), "message was: {err}");
    }

    #[test]
    fn missing_matrix_for_admissible_word() {
        let text = r#"{"m":2,"d":1,"matrices":{"1":[[1.0]]}}"#;
        let cfg = SystemConfig::from_json(text).unwrap();
        let err = cfg.build().unwrap_err().to_string();
        assert!(err.contains("missing matrix"), "message was: {err}");
    }

    #[test]
    fn ragged_rows_are_located() {
        let text = r#"{"m":2,"d":2,"matrices":{"1":[[1.0,1.0],[1.0]],"2":[[1.0,1.0],[1.0,1.0]]}}"#;
        let cfg = SystemConfig::from_json(text).unwrap();
        let err = cfg.build().unwrap_err().to_string();
        assert!(err.contains("matrices.\"1\"[1]"), "message was: {err}");
    }

    #[test]
    fn roundtrip_preserves_semantics() {
        let cfg = SystemConfig::from_json(&golden_json()).unwrap();
        let text = cfg.to_json();
        let again = SystemConfig::from_json(&text).unwrap();
        assert_eq!(again.m, cfg.m);
        assert_eq!(again.d, cfg.d);
        assert_eq!(again.depth, cfg.depth);
        assert_eq!(again.matrices, cfg.matrices);
        let (s1, f1) = cfg.build().unwrap();
        let (s2, f2) = again.build().unwrap();
        assert_eq!(s1, s2);
        assert_eq!(f1.d(), f2.d());
    }

    #[test]
    fn adjacency_is_honored() {
        let text = r#"{
            "m": 2, "d": 1,
            "adjacency": [[1,1],[1,0]],
            "matrices": {"1": [[1.0]], "2": [[1.0]]}
        }"#;
        let cfg = SystemConfig::from_json(text).unwrap();
        let (spec, _) = cfg.build().unwrap();
        assert!(!spec.is_full_shift());
        assert_eq!(spec.word_count(3).unwrap(), 5);
    }
}
