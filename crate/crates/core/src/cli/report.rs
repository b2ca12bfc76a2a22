//! Machine-readable run reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub model: String,
    pub tokens: Vec<usize>,
    pub n: usize,
    pub causes: usize,
    pub vocab: usize,
    pub alpha_scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Labeled {
    pub label: String,
    pub value: f64,
}

/// Output of `infer` and `oracle`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub method: String,
    pub inputs: Inputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ptilde: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_mean: Option<Vec<Labeled>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<Labeled>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<String>,
    pub diagnostics: BTreeMap<String, String>,
}

/// Non-finite values have no JSON form and are dropped.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `key<TAB>value` lines; weights with 4 decimals, probabilities in
    /// 4-digit scientific notation.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "method\t{}", self.method);
        if let Some(p) = self.ptilde {
            let _ = writeln!(s, "ptilde\t{p:.4e}");
        }
        if let Some(p) = self.probability {
            let _ = writeln!(s, "probability\t{p:.4e}");
        }
        if let Some(p) = self.log_probability {
            let _ = writeln!(s, "log_probability\t{p:.4}");
        }
        for (key, list) in [("theta", &self.theta_mean), ("stderr", &self.stderr)] {
            for l in list.iter().flatten() {
                let _ = writeln!(s, "{key}[{}]\t{:.4}", l.label, l.value);
            }
        }
        for (k, v) in &self.diagnostics {
            let _ = writeln!(s, "{k}\t{v}");
        }
        if let Some(d) = &self.decomposition {
            for line in d.lines() {
                let _ = writeln!(s, "#\t{line}");
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphReport {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub width: usize,
    pub root: usize,
    pub bags: Vec<Vec<usize>>,
    pub parent: Vec<Option<usize>>,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub causes: usize,
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_ms: Option<f64>,
    pub sparse_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_diff: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let r = RunReport {
            command: "infer".into(),
            method: "exact".into(),
            inputs: Inputs {
                model: "m.json".into(),
                tokens: vec![0, 1],
                n: 2,
                causes: 3,
                vocab: 2,
                alpha_scale: 1.0,
            },
            ptilde: Some(0.004633333333333333),
            probability: Some(0.1 + 0.2),
            log_probability: None,
            theta_mean: Some(vec![Labeled { label: "z0".into(), value: 1.0 / 3.0 }]),
            stderr: None,
            decomposition: None,
            diagnostics: BTreeMap::from([("n".to_string(), "2".to_string())]),
        };
        let text = r.to_json();
        let back: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), text);
        assert!(r.to_tsv().contains("theta[z0]\t0.3333\n"));
        assert_eq!(finite(f64::NEG_INFINITY), None);
    }
}
