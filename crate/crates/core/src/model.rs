//! Domain types shared across the engine.
//!
//! Everything here is immutable once loaded; the loaders in [`crate::ingest`]
//! are the only place that builds these from untrusted input.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::{Granularity, RFCode};

/// Canonical identifier of a cited work: trimmed and case-folded.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReferenceId(String);

impl ReferenceId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ReferenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn canonicalize_reference(raw: &str) -> Result<ReferenceId> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(Error::InvalidReference(raw.to_string()));
    }
    Ok(ReferenceId(trimmed.to_lowercase()))
}

/// One academic from the national registry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryRecord {
    pub record_id: String,
    pub first_name: String,
    pub last_name: String,
    pub role: String,
    pub gender: Option<String>,
    pub rf: RFCode,
    pub ad: String,
    pub university: String,
    pub department: Option<String>,
    pub year: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Publication {
    pub pub_id: String,
    pub year: i32,
    pub title: String,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default, rename = "abstract", skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
    #[serde(default)]
    pub references: Vec<ReferenceId>,
    #[serde(default)]
    pub coauthor_auids: Vec<String>,
}

/// One bibliographic author profile. Publications are kept in ascending year order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorProfile {
    pub auid: String,
    pub given_name: String,
    pub surname: String,
    pub initials: String,
    pub full_name: String,
    #[serde(default)]
    pub affiliations: Vec<String>,
    #[serde(default)]
    pub publications: Vec<Publication>,
}

/// A registry academic whose bibliographic identifier is already known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed {
    pub record_id: String,
    pub auid: String,
    pub rf: RFCode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePair {
    pub record: RegistryRecord,
    pub auid: String,
    pub gold: Option<bool>,
}

impl CandidatePair {
    pub fn key(&self) -> (&str, &str) {
        (&self.record.record_id, &self.auid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Abstain,
}

impl Verdict {
    /// Binary reading used by the metrics: abstain counts as a predicted "no".
    pub fn is_yes(self) -> bool {
        matches!(self, Verdict::Yes)
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Abstain => "abstain",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "BC")]
    Bc,
    #[serde(rename = "LS")]
    Ls,
    #[serde(rename = "LLM")]
    Llm,
    #[serde(rename = "LLM_ENRICHED")]
    LlmEnriched,
    #[serde(rename = "LEAD_BC_STAGE")]
    LeadBcStage,
    #[serde(rename = "LEAD_LLM_STAGE")]
    LeadLlmStage,
}

/// Overlap statistics carried as decision evidence and into enriched prompts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcEvidence {
    pub n_papers: usize,
    pub n_cited: usize,
    pub n_shared: usize,
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassLine {
    pub code: String,
    pub label: String,
}

/// Label Spreading prediction for one author.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsEvidence {
    pub level: Granularity,
    pub class_id: Option<String>,
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub tie: bool,
    /// Finest line: the inferred AD or RF.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<ClassLine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<ClassLine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<ClassLine>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc: Option<BcEvidence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ls: Option<LsEvidence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub llm_error: Option<String>,
}

impl Evidence {
    pub fn is_empty(&self) -> bool {
        self.bc.is_none() && self.ls.is_none() && self.llm_error.is_none()
    }
}

/// The outcome for one candidate pair. One line of `decisions.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub record_id: String,
    pub auid: String,
    pub verdict: Verdict,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Evidence>,
}

impl Decision {
    pub fn key(&self) -> (&str, &str) {
        (&self.record_id, &self.auid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonicalize_trims() {
        assert_eq!(canonicalize_reference(" 2-s2.0-001 ").unwrap().as_str(), "2-s2.0-001");
    }

    #[test]
    fn canonicalize_case_folds() {
        assert_eq!(canonicalize_reference("DOI:10.1/ABC").unwrap().as_str(), "doi:10.1/abc");
    }

    #[test]
    fn canonicalize_rejects_blank() {
        assert!(matches!(canonicalize_reference("   "), Err(Error::InvalidReference(_))));
        assert!(matches!(canonicalize_reference(""), Err(Error::InvalidReference(_))));
    }

    #[test]
    fn decision_wire_names() {
        let d = Decision {
            record_id: "14".into(),
            auid: "7103169675".into(),
            verdict: Verdict::Yes,
            method: Method::LeadBcStage,
            score: Some(0.5),
            explanation: None,
            evidence: None,
        };
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(
            s,
            r#"{"record_id":"14","auid":"7103169675","verdict":"yes","method":"LEAD_BC_STAGE","score":0.5}"#
        );
        let back: Decision = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(s in "\\PC{0,24}") {
            if let Ok(once) = canonicalize_reference(&s) {
                let twice = canonicalize_reference(once.as_str()).unwrap();
                prop_assert_eq!(once, twice);
            }
        }
    }
}
