//! The JSON run report.

use std::io::Write;
use std::path::Path;

use bachlike_core::quadrature::DecayPoint;
use bachlike_core::regime::RegimeVerdict;
use bachlike_core::report::{IdentityReport, LemmaDetail, Verdict};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub run: RunMetadata,
    pub identities: Vec<IdentityReport>,
    pub details: Vec<LemmaDetail>,
    pub regimes: Vec<RegimeVerdict>,
    pub decay: Vec<DecayRecord>,
    pub summary: Summary,
}

/// Everything a report depends on. Thread count is deliberately absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub geometries: Vec<String>,
    pub selection: Vec<String>,
    pub seed: u64,
    pub jet_order: usize,
    pub samples: usize,
    pub quadrature: usize,
    pub levels: Vec<f64>,
    pub pointwise_tolerance: Option<f64>,
    pub integral_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub geometry: String,
    pub alpha: f64,
    pub points: Vec<DecayPoint>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped_hypothesis: usize,
    pub not_applicable: usize,
    pub low_accuracy: usize,
}

impl Summary {
    pub fn of(reports: &[IdentityReport]) -> Self {
        let mut s = Summary::default();
        for r in reports {
            match r.verdict {
                Verdict::Pass => s.pass += 1,
                Verdict::Fail => s.fail += 1,
                Verdict::SkippedHypothesis => s.skipped_hypothesis += 1,
                Verdict::NotApplicable => s.not_applicable += 1,
                Verdict::LowAccuracy => s.low_accuracy += 1,
            }
        }
        s
    }
}

impl Report {
    /// 1 if any identity failed, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.summary.fail > 0)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = self.to_json()?;
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(json.as_bytes()))
            .map_err(|source| Error::Write {
                path: path.to_path_buf(),
                source,
            })
    }

    /// One line per identity, for terminals.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for r in &self.identities {
            let residual = r
                .max_residual
                .map_or_else(|| "-".to_string(), |v| format!("{v:.3e}"));
            out.push_str(&format!(
                "{:<18} {:<8} {:<48} {:>10} / {:<9.1e}\n",
                r.verdict.as_str(),
                r.geometry,
                r.id,
                residual,
                r.tolerance
            ));
        }
        let s = &self.summary;
        out.push_str(&format!(
            "{} pass, {} fail, {} skipped, {} not applicable, {} low accuracy\n",
            s.pass, s.fail, s.skipped_hypothesis, s.not_applicable, s.low_accuracy
        ));
        out
    }
}
