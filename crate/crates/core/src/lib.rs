//! Cross-source author name disambiguation.
//!
//! Decides, for each (registry record, bibliographic author profile) candidate
//! pair, whether both describe the same person. Four signals are available:
//! bibliographic coupling against per-field reference corpora
//! ([`bibcoupling`]), Label Spreading over the co-authorship graph
//! ([`labelspread`]), an LLM judge ([`llmjudge`]), and LEAD, which accepts
//! high-overlap pairs directly and escalates the rest to the LLM with the
//! structural evidence attached ([`orchestrator`]).

pub mod bibcoupling;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod labelspread;
pub mod llmjudge;
pub mod model;
pub mod orchestrator;
pub mod percent;
pub mod synthkit;
pub mod taxonomy;

pub use error::{Error, Result};
