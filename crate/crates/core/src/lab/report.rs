//! JSON report manifest: config echo, config hash, metrics and verdicts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lab::config::RunConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub metrics: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    /// Checks that are reported but do not gate the status.
    #[serde(default)]
    pub findings: Vec<Verdict>,
    pub files: Vec<String>,
    #[serde(skip)]
    out_dir: Option<PathBuf>,
}

impl Report {
    pub fn new(experiment: &str, config: &RunConfig, out_dir: Option<&Path>) -> Result<Self> {
        if let Some(dir) = out_dir {
            fs::create_dir_all(dir)?;
        }
        Ok(Self {
            experiment: experiment.to_string(),
            config_hash: config.hash(),
            config: config.clone(),
            metrics: BTreeMap::new(),
            verdicts: Vec::new(),
            findings: Vec::new(),
            files: Vec::new(),
            out_dir: out_dir.map(Path::to_path_buf),
        })
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn verdict(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn finding(&mut self, name: impl Into<String>, holds: bool, detail: impl Into<String>) {
        self.findings.push(Verdict {
            name: name.into(),
            pass: holds,
            detail: detail.into(),
        });
    }

    /// Looks up a gating verdict first, then an informational finding.
    pub fn verdict_named(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().chain(&self.findings).find(|v| v.name == name)
    }

    pub fn passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.pass)
    }

    pub fn status(&self) -> &'static str {
        if self.passed() {
            "PASS"
        } else {
            "FAIL"
        }
    }

    /// Path for an artifact in the output directory, recorded in the manifest.
    pub fn artifact(&mut self, name: &str) -> Option<PathBuf> {
        let dir = self.out_dir.as_ref()?;
        self.files.push(name.to_string());
        Some(dir.join(name))
    }

    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        value["status"] = serde_json::Value::from(self.status());
        serde_json::to_string_pretty(&value).expect("report serializes")
    }

    /// Writes `report.json` into the output directory, if there is one.
    pub fn finish(&mut self) -> Result<()> {
        if let Some(path) = self.artifact("report.json") {
            fs::write(path, self.to_json())?;
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut out = format!("{} {}\n", self.experiment, self.status());
        for v in &self.verdicts {
            out.push_str(&format!("  [{}] {}: {}\n", if v.pass { "ok" } else { "FAIL" }, v.name, v.detail));
        }
        for f in &self.findings {
            out.push_str(&format!("  ({}) {}: {}\n", if f.pass { "yes" } else { "no" }, f.name, f.detail));
        }
        out
    }
}
