//! Source-spec files: TOML with `x_alphabet`, `y_alphabet`, `pmf`
//! (row-major by x, column y) and optional `x_values` / `xhat_values`.
//! Unknown fields are rejected.

use serde::Deserialize;
use std::path::Path;

use super::{InfoError, JointSource};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpecFile {
    pub x_alphabet: Vec<String>,
    pub y_alphabet: Vec<String>,
    /// Row-major by x, column y.
    pub pmf: Vec<Vec<f64>>,
    #[serde(default)]
    pub x_values: Option<Vec<f64>>,
    /// Embedding for the reconstruction alphabet when it differs from the
    /// source embedding; defaults to `x_values`.
    #[serde(default)]
    pub xhat_values: Option<Vec<f64>>,
}

impl SourceSpecFile {
    pub fn to_source(&self) -> Result<JointSource, InfoError> {
        JointSource::new(
            self.x_alphabet.clone(),
            self.y_alphabet.clone(),
            self.pmf.clone(),
            self.x_values.clone(),
        )
    }

    pub fn xhat_values(&self) -> Option<Vec<f64>> {
        self.xhat_values.clone().or_else(|| self.x_values.clone())
    }
}

pub fn parse_source_toml(text: &str) -> Result<SourceSpecFile, InfoError> {
    toml::from_str(text).map_err(|e| InfoError::SourceFile(e.to_string()))
}

pub fn load_source_file(path: &Path) -> Result<SourceSpecFile, InfoError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InfoError::SourceFile(format!("{}: {e}", path.display())))?;
    parse_source_toml(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_spec() {
        let spec = parse_source_toml(
            r#"
x_alphabet = ["0", "1"]
y_alphabet = ["-"]
pmf = [[0.5], [0.5]]
x_values = [0.0, 1.0]
"#,
        )
        .unwrap();
        let src = spec.to_source().unwrap();
        assert_eq!(src.num_x(), 2);
        assert_eq!(spec.xhat_values(), Some(vec![0.0, 1.0]));
    }

    #[test]
    fn unknown_fields_rejected() {
        let err = parse_source_toml(
            r#"
x_alphabet = ["0"]
y_alphabet = ["-"]
pmf = [[1.0]]
bogus = 3
"#,
        )
        .unwrap_err();
        assert!(matches!(err, InfoError::SourceFile(_)));
    }

    #[test]
    fn bad_pmf_surfaces_as_construction_error() {
        let spec = parse_source_toml(
            r#"
x_alphabet = ["0", "1"]
y_alphabet = ["-"]
pmf = [[0.6], [0.6]]
"#,
        )
        .unwrap();
        assert!(matches!(spec.to_source(), Err(InfoError::Unnormalized { .. })));
    }
}
