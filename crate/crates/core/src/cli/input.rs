//! On-disk model documents and observation lists.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::model::{Model, ObservationSeq};

/// `{"alpha": [...], "beta": [[beta(v|z) per cause] per vocabulary item],
/// "vocab": [...], "causes": [...]}`; the label lists are optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub alpha: Vec<f64>,
    pub beta: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocab: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub causes: Option<Vec<String>>,
}

impl ModelFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("malformed model document: {e}")))?;
        file.check()?;
        Ok(file)
    }

    fn check(&self) -> Result<(), CliError> {
        let m = self.alpha.len();
        if let Some((v, row)) = self.beta.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(CliError::Input(format!(
                "beta row {v} has {} columns but alpha has {m} entries",
                row.len()
            )));
        }
        if let Some(vocab) = &self.vocab {
            if vocab.len() != self.beta.len() {
                return Err(CliError::Input(format!(
                    "{} vocabulary labels for {} beta rows",
                    vocab.len(),
                    self.beta.len()
                )));
            }
        }
        if let Some(causes) = &self.causes {
            if causes.len() != m {
                return Err(CliError::Input(format!("{} cause labels for {m} causes", causes.len())));
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<Model<f64>, CliError> {
        Model::new(self.alpha.clone(), self.beta.clone()).map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn cause_label(&self, z: usize) -> String {
        self.causes
            .as_ref()
            .map_or_else(|| format!("z{z}"), |c| c[z].clone())
    }
}

/// Comma-separated vocabulary indices; the empty string is the empty sequence.
pub fn parse_obs_list(text: &str) -> Result<Vec<usize>, CliError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(parse_index).collect()
}

/// One index per line; blank lines are skipped.
pub fn parse_obs_lines(text: &str) -> Result<Vec<usize>, CliError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(parse_index)
        .collect()
}

fn parse_index(s: &str) -> Result<usize, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Input(format!("invalid observation index {s:?}")))
}

pub fn observations(tokens: Vec<usize>, model: &Model<f64>) -> Result<ObservationSeq, CliError> {
    if let Some(&bad) = tokens.iter().find(|&&t| t >= model.vocab_size()) {
        return Err(CliError::Input(format!(
            "observation {bad} outside vocabulary of size {}",
            model.vocab_size()
        )));
    }
    ObservationSeq::new(tokens, model.vocab_size()).map_err(|e| CliError::Input(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists() {
        assert_eq!(parse_obs_list("").unwrap(), Vec::<usize>::new());
        assert_eq!(parse_obs_list("0, 1,1").unwrap(), vec![0, 1, 1]);
        assert!(parse_obs_list("0,,1").is_err());
        assert_eq!(parse_obs_lines("3\n\n1\n").unwrap(), vec![3, 1]);
    }

    #[test]
    fn checks_dimensions() {
        assert!(ModelFile::parse(r#"{"alpha":[1,1],"beta":[[0.5,0.5]]}"#).is_ok());
        assert!(ModelFile::parse(r#"{"alpha":[1,1],"beta":[[0.5]]}"#).is_err());
        assert!(ModelFile::parse(r#"{"alpha":[1],"beta":[[0.5]],"vocab":["a","b"]}"#).is_err());
        assert!(ModelFile::parse(r#"{"alpha":[1],"beta":[[0.5]],"causes":["x"]}"#).is_ok());
        assert!(ModelFile::parse(r#"{"alpha":[1],"beta":[[0.5]],"extra":1}"#).is_err());
    }
}
