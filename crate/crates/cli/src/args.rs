//! Command-line flags and the config-file layer beneath them.
//!
//! Every option is optional on the command line so that an absent flag can
//! fall back to the `--config` JSON file (same keys as the flags, with
//! underscores) and then to the built-in default shown in `--help`.

use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Parser)]
#[command(
    name = "lead",
    version,
    about = "Cross-source author name disambiguation",
    long_about = "Decides whether registry academics and bibliographic author profiles refer to the same \
person, using bibliographic coupling, co-authorship label spreading, an LLM judge, or LEAD."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Load every input file, check referential integrity and print a summary
    Validate(ValidateArgs),
    /// Build and cache the per-field reference corpora for one window
    Corpus(CorpusArgs),
    /// Build the co-authorship graph and spread seed labels at one granularity
    Graph(GraphArgs),
    /// Run one method over the gold pairs or a pair file
    Run(RunArgs),
    /// Bibliographic coupling over a grid of thresholds and windows
    Sweep(SweepArgs),
    /// Score decision files against the gold standard
    Eval(EvalArgs),
    /// Generate a synthetic dataset with planted ground truth
    Synth(SynthArgs),
    /// Combine the metrics of finished runs into one table
    Report(ReportArgs),
}

fn skip_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct CommonArgs {
    /// Directory holding registry.csv, profiles.jsonl, seeds.csv, gold.csv and taxonomy.csv [default: .]
    #[arg(long, value_name = "DIR")]
    pub data: Option<PathBuf>,
    /// JSON file supplying values for flags not given on the command line; a run manifest also works [default: none]
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output directory [default: out]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; 1 gives a fully serial run [default: available parallelism]
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// error, warn, info, debug or trace; RUST_LOG takes precedence [default: warn]
    #[arg(long, value_name = "LEVEL")]
    pub log_level: Option<String>,
    /// Registry file [default: <data>/registry.csv]
    #[arg(long, value_name = "FILE")]
    pub registry: Option<PathBuf>,
    /// Author profile file (JSON Lines) [default: <data>/profiles.jsonl]
    #[arg(long, value_name = "FILE")]
    pub profiles: Option<PathBuf>,
    /// Seed author file [default: <data>/seeds.csv]
    #[arg(long, value_name = "FILE")]
    pub seeds: Option<PathBuf>,
    /// Gold standard file [default: <data>/gold.csv when present]
    #[arg(long, value_name = "FILE")]
    pub gold: Option<PathBuf>,
    /// Taxonomy file [default: <data>/taxonomy.csv when present]
    #[arg(long, value_name = "FILE")]
    pub taxonomy: Option<PathBuf>,
    /// Rename a gold column, as key=column; repeatable [default: record_id, first_name, last_name, rf, ad, university, auid, correct]
    #[arg(long, value_name = "KEY=COLUMN")]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub gold_column: Vec<String>,
    /// Directory caching field corpora between runs [default: no cache]
    #[arg(long, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,
}

impl CommonArgs {
    pub fn data_dir(&self) -> PathBuf {
        self.data.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn jobs(&self) -> usize {
        self.jobs.unwrap_or(0)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Citation window as start:end, both inclusive [default: 2016:2023]
    #[arg(long, value_name = "START:END")]
    pub window: Option<String>,
    /// Only these recruitment fields; repeatable [default: every field with seeds]
    #[arg(long, value_name = "AA/GF")]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rf: Vec<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SpreadArgs {
    /// Taxonomy level of the labels: sa, rfg, rf or ad [default: sa]
    #[arg(long, value_name = "LEVEL")]
    pub granularity: Option<String>,
    /// Label spreading clamping factor [default: 0.2]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Stop when no soft label moves more than this [default: 0.001]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap [default: 30]
    #[arg(long, value_name = "N")]
    pub max_iter: Option<usize>,
    /// Edge weights: count (co-authored papers) or binary [default: count]
    #[arg(long, value_name = "KIND")]
    pub edge_weighting: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub spread: SpreadArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Bc,
    Ls,
    Llm,
    LlmEnriched,
    Lead,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmArgs {
    /// Replay LLM answers from a JSONL fixture of {record_id, auid, response_text} [default: none]
    #[arg(long, value_name = "FILE")]
    pub mock: Option<PathBuf>,
    /// Answer from the gold labels instead of calling a model [default: off]
    #[arg(long, action = ArgAction::SetTrue)]
    #[serde(skip_serializing_if = "skip_false")]
    pub oracle_mock: bool,
    /// Fraction of oracle answers deliberately flipped [default: 0]
    #[arg(long, value_name = "RATE")]
    pub oracle_error_rate: Option<f64>,
    /// Seed choosing which oracle answers flip [default: 0]
    #[arg(long, value_name = "N")]
    pub oracle_seed: Option<u64>,
    /// Chat-completion URL; the bearer token is read from LEAD_LLM_API_KEY [default: none]
    #[arg(long, value_name = "URL")]
    pub endpoint: Option<String>,
    /// Model name sent to the endpoint [default: meta-llama/Llama-3.1-70B-Instruct]
    #[arg(long, value_name = "NAME")]
    pub model: Option<String>,
    /// Per-request timeout in seconds [default: 120]
    #[arg(long, value_name = "SECS")]
    pub timeout: Option<f64>,
    /// Attempts per pair, the first included [default: 3]
    #[arg(long, value_name = "N")]
    pub max_retries: Option<u32>,
    /// Requests in flight at once [default: 4]
    #[arg(long, value_name = "N")]
    pub max_concurrent: Option<usize>,
    /// Decoding top-k [default: 1]
    #[arg(long, value_name = "K")]
    pub top_k: Option<u32>,
    /// Maximum generated tokens [default: 700]
    #[arg(long, value_name = "TOKENS")]
    pub max_length: Option<u32>,
    /// Publication metadata in the prompt: keywords, keywords-titles or keywords-titles-abstracts [default: keywords-titles]
    #[arg(long, value_name = "MODE")]
    pub metadata_mode: Option<String>,
    /// Publications sampled per candidate [default: 10]
    #[arg(long, value_name = "K")]
    pub papers: Option<usize>,
    /// Put every publication in the prompt instead of a sample [default: off]
    #[arg(long, action = ArgAction::SetTrue)]
    #[serde(skip_serializing_if = "skip_false")]
    pub all_papers: bool,
    /// Seed for the publication sample [default: 0]
    #[arg(long, value_name = "N")]
    pub sample_seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct RunArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Method: bc, ls, llm, llm-enriched or lead [default: lead]
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    /// Coupling threshold for bc and lead, in (0, 1) [default: 0.15]
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Citation window as start:end, both inclusive [default: 2016:2023]
    #[arg(long, value_name = "START:END")]
    pub window: Option<String>,
    /// Give the LLM the coupling statistics (llm-enriched, lead) [default: off]
    #[arg(long, action = ArgAction::SetTrue)]
    #[serde(skip_serializing_if = "skip_false")]
    pub with_bc: bool,
    /// Give the LLM the label spreading prediction (llm-enriched, lead) [default: off]
    #[arg(long, action = ArgAction::SetTrue)]
    #[serde(skip_serializing_if = "skip_false")]
    pub with_ls: bool,
    /// Taxonomy level of the label spreading evidence shown to the LLM [default: rf]
    #[arg(long, value_name = "LEVEL")]
    pub evidence_level: Option<String>,
    /// Classify the pairs in this CSV (record_id,auid[,correct]) instead of the gold pairs [default: gold pairs]
    #[arg(long, value_name = "FILE")]
    pub pairs: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub spread: SpreadArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub llm: LlmArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Comma-separated thresholds [default: 0.25,0.20,0.15,0.10]
    #[arg(long, value_name = "LIST")]
    pub thresholds: Option<String>,
    /// Comma-separated start:end windows [default: 2020:2023,2016:2023]
    #[arg(long, value_name = "LIST")]
    pub windows: Option<String>,
    /// Classify the pairs in this labelled CSV instead of the gold pairs [default: gold pairs]
    #[arg(long, value_name = "FILE")]
    pub pairs: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Decision file to score, as PATH or NAME=PATH; repeatable, rows keep this order [default: none, required]
    #[arg(long, value_name = "[NAME=]FILE")]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub decisions: Vec<String>,
    /// Score against the labels of this pair CSV instead of the gold file [default: gold file]
    #[arg(long, value_name = "FILE")]
    pub pairs: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Random seed [default: 7]
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON file with generator parameters; flags below override it [default: built-in parameters]
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// Number of recruitment fields [default: 8]
    #[arg(long, value_name = "N")]
    pub n_fields: Option<usize>,
    /// Seed authors per field [default: 12]
    #[arg(long, value_name = "N")]
    pub seeds_per_field: Option<usize>,
    /// Registry candidates per field [default: 25]
    #[arg(long, value_name = "N")]
    pub candidates_per_field: Option<usize>,
    /// Probability that a candidate pair is a planted homonym [default: 0.35]
    #[arg(long, value_name = "RATE")]
    pub homonym_rate: Option<f64>,
    /// Cross-field reference noise [default: 0.3]
    #[arg(long, value_name = "RATE")]
    pub noise: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    /// Run directories or manifest.json files, one table row each [default: none, required]
    #[arg(value_name = "RUN")]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub runs: Vec<PathBuf>,
}

/// Reads a config file. A run manifest is accepted and its `settings` used.
pub fn read_config(path: &Path) -> Result<Value, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let value = match value {
        Value::Object(mut m) if m.contains_key("settings") => m.remove("settings").unwrap_or_default(),
        v => v,
    };
    if !value.is_object() {
        return Err(format!("{}: config must be a JSON object", path.display()));
    }
    Ok(value)
}

fn is_unset(v: &Value) -> bool {
    match v {
        Value::Null => true,
        Value::Bool(b) => !b,
        Value::Array(a) => a.is_empty(),
        _ => false,
    }
}

/// Fills every flag left unset on the command line from `config`.
pub fn layer<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Value>) -> Result<T, String> {
    let Some(Value::Object(file)) = config else {
        return serde_json::to_value(flags)
            .and_then(serde_json::from_value)
            .map_err(|e| e.to_string());
    };
    let Value::Object(mut merged) = serde_json::to_value(flags).map_err(|e| e.to_string())? else {
        unreachable!("argument structs serialize to objects")
    };
    for (k, v) in file {
        match merged.get(k) {
            Some(current) if !is_unset(current) => {}
            _ => {
                merged.insert(k.clone(), v.clone());
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| format!("config: {e}"))
}

/// Keys that were set on the command line itself.
pub fn explicit_keys<T: Serialize>(flags: &T) -> Vec<String> {
    match serde_json::to_value(flags) {
        Ok(Value::Object(m)) => m.into_iter().filter(|(_, v)| !is_unset(v)).map(|(k, _)| k).collect(),
        _ => Vec::new(),
    }
}
