//! Zero-shot LLM judging of candidate pairs.
//!
//! Renders the disambiguation prompt (plain or enriched with coupling and
//! label-spreading evidence), sends it through a [`ChatClient`], and parses
//! the JSON verdict out of the reply. Clients are pluggable: an HTTP
//! chat-completion endpoint, a replay fixture, or a gold-backed oracle.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{AuthorProfile, CandidatePair, Decision, Evidence, LsEvidence, Method, RegistryRecord, Verdict};
use crate::percent::Tenths;
use crate::taxonomy::TaxonomyTable;

pub const SYSTEM_PROMPT: &str =
    "Your task is to evaluate the candidate to determine if they match the specified researcher profile.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetadataMode {
    Keywords,
    #[default]
    KeywordsTitles,
    KeywordsTitlesAbstracts,
}

impl std::str::FromStr for MetadataMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "keywords" => Ok(MetadataMode::Keywords),
            "keywords_titles" => Ok(MetadataMode::KeywordsTitles),
            "keywords_titles_abstracts" => Ok(MetadataMode::KeywordsTitlesAbstracts),
            _ => Err(Error::Param(format!(
                "unknown metadata mode {s:?} (keywords, keywords-titles, keywords-titles-abstracts)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PaperLimit {
    All,
    Sample { k: usize, seed: u64 },
}

impl Default for PaperLimit {
    fn default() -> Self {
        PaperLimit::Sample { k: 10, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Enrichment {
    pub include_bc: bool,
    pub include_ls: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PromptConfig {
    pub metadata_mode: MetadataMode,
    pub paper_limit: PaperLimit,
    pub enrichment: Enrichment,
}

impl PromptConfig {
    pub fn validate(&self) -> Result<()> {
        if let PaperLimit::Sample { k: 0, .. } = self.paper_limit {
            return Err(Error::Param("paper sample size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeParams {
    pub top_k: u32,
    pub max_length: u32,
}

impl Default for DecodeParams {
    fn default() -> Self {
        DecodeParams {
            top_k: 1,
            max_length: 700,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model_name: String,
    pub decode: DecodeParams,
    pub timeout_secs: f64,
    /// Total attempts per pair, counting the first.
    pub max_retries: u32,
    pub max_concurrent: usize,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: "http://localhost:8000/v1/chat/completions".into(),
            model_name: "meta-llama/Llama-3.1-70B-Instruct".into(),
            decode: DecodeParams::default(),
            timeout_secs: 120.0,
            max_retries: 3,
            max_concurrent: 4,
        }
    }
}

impl EndpointConfig {
    pub fn validate(&self) -> Result<()> {
        if self.decode.top_k < 1 {
            return Err(Error::Param("top_k must be at least 1".into()));
        }
        if self.max_concurrent == 0 {
            return Err(Error::Param("max_concurrent must be at least 1".into()));
        }
        Ok(())
    }
}

fn sampled_publications(profile: &AuthorProfile, limit: PaperLimit) -> Vec<&crate::model::Publication> {
    match limit {
        PaperLimit::All => profile.publications.iter().collect(),
        PaperLimit::Sample { k, .. } if k >= profile.publications.len() => profile.publications.iter().collect(),
        PaperLimit::Sample { k, seed } => {
            // Per-profile stream so each candidate gets its own sample from one run seed.
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(profile.auid.as_bytes()));
            let mut picked = rand::seq::index::sample(&mut rng, profile.publications.len(), k).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| &profile.publications[i]).collect()
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// The candidate description: identity lines, then publications oldest first.
pub fn render_candidate_block(profile: &AuthorProfile, config: &PromptConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Author ID: {}", profile.auid);
    let _ = writeln!(out, "Name: {}", profile.full_name);
    let _ = writeln!(out, "Surname: {}", profile.surname);
    let _ = writeln!(out, "Initials: {}", profile.initials);
    let _ = writeln!(out, "Affiliations: {}", profile.affiliations.join("; "));
    out.push('\n');
    out.push_str("Publications (chronological order):");
    for p in sampled_publications(profile, config.paper_limit) {
        let keywords = p.keywords.join(", ");
        out.push('\n');
        match config.metadata_mode {
            MetadataMode::Keywords => {
                let _ = write!(out, "- [{}] Keywords: {keywords}", p.year);
            }
            MetadataMode::KeywordsTitles => {
                let _ = write!(out, "- [{}] {} - Keywords: {keywords}", p.year, p.title);
            }
            MetadataMode::KeywordsTitlesAbstracts => {
                let _ = write!(out, "- [{}] {} - Keywords: {keywords}", p.year, p.title);
                if let Some(a) = &p.abstract_text {
                    let _ = write!(out, " - Abstract: {a}");
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub system: String,
    pub user: String,
}

/// Human-readable discipline of a record: the AD label, else the raw AD code.
pub fn ad_description(record: &RegistryRecord, taxonomy: Option<&TaxonomyTable>) -> String {
    if let Some(label) = taxonomy.and_then(|t| t.ad_label(&record.ad)) {
        return label.to_string();
    }
    log::warn!(
        "no label for AD {:?} of record {}; using the raw code",
        record.ad,
        record.record_id
    );
    if record.ad.is_empty() {
        record.rf.to_string()
    } else {
        record.ad.clone()
    }
}

fn question(record: &RegistryRecord, ad_desc: &str) -> String {
    format!(
        "Is the following candidate a match for the researcher {} {}, affiliated with {},\n\
         working in the Italian academic field of {}?\n",
        record.first_name, record.last_name, record.university, ad_desc
    )
}

fn closing(record_id: &str, auid: &str) -> String {
    let quote = |s: &str| serde_json::to_string(s).expect("strings serialize");
    format!(
        "Based on the provided information, do you believe this candidate is the best match?\n\
         \n\
         Please respond with \"yes\" or \"no\" and a brief explanation.\n\
         \n\
         Respond only in JSON format as follows:\n\
         \n\
         {{\n  \"cerca_univ_id\": {},\n  \"scopus_candidate_id\": {},\n  \"match\": \"yes\" or \"no\",\n  \"explanation\": \"Your explanation here.\"\n}}\n",
        quote(record_id),
        quote(auid)
    )
}

/// The zero-shot prompt for `record` against a rendered candidate block.
pub fn render_prompt(record: &RegistryRecord, auid: &str, candidate_block: &str, ad_desc: &str) -> Prompt {
    let user = format!(
        "{}\nHere is the candidate:\n{}\n\n{}",
        question(record, ad_desc),
        candidate_block,
        closing(&record.record_id, auid)
    );
    Prompt {
        system: SYSTEM_PROMPT.to_string(),
        user,
    }
}

fn ls_lines(ls: &LsEvidence) -> Vec<String> {
    [
        ("Recruitment field", &ls.field),
        ("Macro recruitment field", &ls.group),
        ("Area", &ls.area),
    ]
    .into_iter()
    .filter_map(|(name, line)| line.as_ref().map(|l| format!("   - {name}: {} - {}", l.code, l.label)))
    .collect()
}

/// The prompt with automatically derived evidence listed before the candidate.
/// Falls back to [`render_prompt`] when no usable evidence is given.
pub fn render_enriched_prompt(
    record: &RegistryRecord,
    auid: &str,
    candidate_block: &str,
    ad_desc: &str,
    evidence: &Evidence,
) -> Prompt {
    let mut items = Vec::new();
    if let Some(bc) = &evidence.bc {
        let pct = Tenths::of_ratio(bc.n_shared as u64, bc.n_cited as u64);
        items.push(format!(
            "An analysis of citations through a citation network has shown that {pct}% of the citations in the \
             candidate's {} papers (which cite a total of {} papers) align with those of the academic community, \
             with {} relevant citations found in the network.",
            bc.n_papers, bc.n_cited, bc.n_shared
        ));
    }
    if let Some(ls) = evidence.ls.as_ref().filter(|l| l.class_id.is_some()) {
        let mut item = String::from(
            "A method based on a co-authorship network has predicted the following academic classification:",
        );
        for line in ls_lines(ls) {
            item.push('\n');
            item.push_str(&line);
        }
        items.push(item);
    }
    if items.is_empty() {
        log::debug!(
            "enriched prompt for ({}, {auid}) has no evidence; using the plain prompt",
            record.record_id
        );
        return render_prompt(record, auid, candidate_block, ad_desc);
    }
    let mut user = question(record, ad_desc);
    user.push_str(
        "\nYou also have additional information obtained through automated methods, which may contain inaccuracies.\n\
         Please use this information critically to support your evaluation:\n\n",
    );
    for (i, item) in items.iter().enumerate() {
        let _ = writeln!(user, "{}. {item}", i + 1);
    }
    let _ = write!(
        user,
        "\nHere is the candidate:\n{}\n\n{}",
        candidate_block,
        closing(&record.record_id, auid)
    );
    Prompt {
        system: SYSTEM_PROMPT.to_string(),
        user,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlmVerdict {
    pub cerca_univ_id: String,
    pub scopus_candidate_id: String,
    pub is_match: bool,
    pub explanation: String,
}

impl LlmVerdict {
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "cerca_univ_id": self.cerca_univ_id,
            "scopus_candidate_id": self.scopus_candidate_id,
            "match": if self.is_match { "yes" } else { "no" },
            "explanation": self.explanation,
        })
        .to_string()
    }
}

fn first_json_object(raw: &str) -> Option<serde_json::Map<String, Value>> {
    raw.match_indices('{').find_map(|(i, _)| {
        let mut stream = serde_json::Deserializer::from_str(&raw[i..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Object(map))) => Some(map),
            _ => None,
        }
    })
}

/// Extracts the first well-formed JSON object in `raw` and reads the verdict from it.
pub fn parse_verdict(raw: &str) -> Result<LlmVerdict> {
    let obj = first_json_object(raw).ok_or(Error::NoJsonFound)?;
    let id = |name: &'static str| -> Result<String> {
        match obj.get(name) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(Value::Number(n)) => Ok(n.to_string()),
            _ => Err(Error::MissingField(name)),
        }
    };
    let cerca_univ_id = id("cerca_univ_id")?;
    let scopus_candidate_id = id("scopus_candidate_id")?;
    let is_match = match obj.get("match") {
        Some(Value::String(s)) => match s.trim().to_ascii_lowercase().as_str() {
            "yes" => true,
            "no" => false,
            _ => return Err(Error::InvalidMatchValue(s.clone())),
        },
        Some(other) => return Err(Error::InvalidMatchValue(other.to_string())),
        None => return Err(Error::MissingField("match")),
    };
    let explanation = match obj.get("explanation") {
        Some(Value::String(s)) => s.clone(),
        _ => return Err(Error::MissingField("explanation")),
    };
    Ok(LlmVerdict {
        cerca_univ_id,
        scopus_candidate_id,
        is_match,
        explanation,
    })
}

/// One chat-completion call. `record_id`/`auid` travel with the request for
/// mocks and logging; they are not part of the wire body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatRequest {
    pub record_id: String,
    pub auid: String,
    pub model: String,
    pub prompt: Prompt,
    pub decode: DecodeParams,
}

impl ChatRequest {
    /// `{model, messages:[system, user], top_k, max_tokens}`
    pub fn body(&self) -> Value {
        serde_json::json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": self.prompt.system},
                {"role": "user", "content": self.prompt.user},
            ],
            "top_k": self.decode.top_k,
            "max_tokens": self.decode.max_length,
        })
    }
}

pub trait ChatClient: Send + Sync {
    /// Returns the raw assistant text. Transport problems are `Error::Endpoint`.
    fn complete(&self, request: &ChatRequest) -> Result<String>;

    /// Short description for run manifests.
    fn identity(&self) -> String;
}

/// Chat-completion client over HTTP. The optional bearer token comes from
/// [`API_KEY_ENV`].
pub struct HttpChatClient {
    agent: ureq::Agent,
    url: String,
    api_key: Option<String>,
}

pub const API_KEY_ENV: &str = "LEAD_LLM_API_KEY";

impl HttpChatClient {
    pub fn new(config: &EndpointConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs.max(0.001))))
            .http_status_as_error(false)
            .build()
            .into();
        HttpChatClient {
            agent,
            url: config.base_url.clone(),
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
        }
    }
}

/// Pulls the assistant text out of common completion response shapes.
pub fn extract_completion_text(body: &Value) -> Option<String> {
    let choice = body.get("choices").and_then(|c| c.get(0));
    choice
        .and_then(|c| c.pointer("/message/content"))
        .or_else(|| choice.and_then(|c| c.get("text")))
        .or_else(|| body.pointer("/message/content"))
        .or_else(|| body.get("content"))
        .or_else(|| body.get("response"))
        .and_then(Value::as_str)
        .map(str::to_string)
}

impl ChatClient for HttpChatClient {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        let mut req = self.agent.post(&self.url).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send(request.body().to_string())
            .map_err(|e| Error::Endpoint(format!("{}: {e}", self.url)))?;
        let status = resp.status();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::Endpoint(format!("reading response: {e}")))?;
        if !status.is_success() {
            return Err(Error::Endpoint(format!(
                "HTTP {status}: {}",
                text.chars().take(200).collect::<String>()
            )));
        }
        let body: Value =
            serde_json::from_str(&text).map_err(|e| Error::Endpoint(format!("response is not JSON: {e}")))?;
        extract_completion_text(&body).ok_or_else(|| Error::Endpoint("no completion text in response".into()))
    }

    fn identity(&self) -> String {
        format!("http:{}", self.url)
    }
}

/// Replays recorded responses keyed by `(record_id, auid)`.
#[derive(Debug, Clone, Default)]
pub struct FixtureClient {
    responses: HashMap<(String, String), String>,
    origin: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FixtureLine {
    pub record_id: String,
    pub auid: String,
    pub response_text: String,
}

impl FixtureClient {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut client = FixtureClient {
            origin: path.display().to_string(),
            ..Default::default()
        };
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let f: FixtureLine =
                serde_json::from_str(&line).map_err(|e| Error::schema(&client.origin, i as u64 + 1, e.to_string()))?;
            client.responses.insert((f.record_id, f.auid), f.response_text);
        }
        Ok(client)
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String, String)>) -> Self {
        FixtureClient {
            responses: pairs.into_iter().map(|(r, a, t)| ((r, a), t)).collect(),
            origin: "inline".into(),
        }
    }
}

impl ChatClient for FixtureClient {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        self.responses
            .get(&(request.record_id.clone(), request.auid.clone()))
            .cloned()
            .ok_or_else(|| Error::Endpoint(format!("no fixture for ({}, {})", request.record_id, request.auid)))
    }

    fn identity(&self) -> String {
        format!("fixture:{}", self.origin)
    }
}

/// Answers from planted gold labels, flipping a deterministic `error_rate` share.
#[derive(Debug, Clone)]
pub struct OracleClient {
    gold: HashMap<(String, String), bool>,
    error_rate: f64,
    seed: u64,
}

impl OracleClient {
    pub fn new(gold: impl IntoIterator<Item = (String, String, bool)>, error_rate: f64, seed: u64) -> Self {
        OracleClient {
            gold: gold.into_iter().map(|(r, a, g)| ((r, a), g)).collect(),
            error_rate,
            seed,
        }
    }

    pub fn from_pairs(pairs: &[CandidatePair], error_rate: f64, seed: u64) -> Self {
        Self::new(
            pairs
                .iter()
                .filter_map(|p| p.gold.map(|g| (p.record.record_id.clone(), p.auid.clone(), g))),
            error_rate,
            seed,
        )
    }
}

impl ChatClient for OracleClient {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        let truth = *self
            .gold
            .get(&(request.record_id.clone(), request.auid.clone()))
            .ok_or_else(|| {
                Error::Endpoint(format!(
                    "oracle has no label for ({}, {})",
                    request.record_id, request.auid
                ))
            })?;
        let h = fnv1a(format!("{}\u{0}{}\u{0}{}", self.seed, request.record_id, request.auid).as_bytes());
        let flip = ((h >> 11) as f64 / (1u64 << 53) as f64) < self.error_rate;
        Ok(LlmVerdict {
            cerca_univ_id: request.record_id.clone(),
            scopus_candidate_id: request.auid.clone(),
            is_match: truth != flip,
            explanation: "oracle".into(),
        }
        .to_json())
    }

    fn identity(&self) -> String {
        format!("oracle:error_rate={}:seed={}", self.error_rate, self.seed)
    }
}

/// Outcome of judging one pair, including call accounting.
#[derive(Debug, Clone)]
pub struct Judgement {
    pub decision: Decision,
    pub attempts: u32,
    pub latency: Duration,
    /// Set when every attempt failed at the transport level.
    pub endpoint_failure: bool,
}

/// Everything `judge` needs besides the client.
pub struct JudgeInput<'a> {
    pub pair: &'a CandidatePair,
    pub profile: &'a AuthorProfile,
    pub taxonomy: Option<&'a TaxonomyTable>,
    pub config: &'a PromptConfig,
    /// `Some` selects the enriched prompt.
    pub evidence: Option<Evidence>,
}

pub fn build_request(input: &JudgeInput<'_>, endpoint: &EndpointConfig) -> ChatRequest {
    let record = &input.pair.record;
    let block = render_candidate_block(input.profile, input.config);
    let ad_desc = ad_description(record, input.taxonomy);
    let prompt = match &input.evidence {
        Some(ev) => render_enriched_prompt(record, &input.pair.auid, &block, &ad_desc, ev),
        None => render_prompt(record, &input.pair.auid, &block, &ad_desc),
    };
    ChatRequest {
        record_id: record.record_id.clone(),
        auid: input.pair.auid.clone(),
        model: endpoint.model_name.clone(),
        prompt,
        decode: endpoint.decode,
    }
}

/// Renders, calls and parses with retries. Never fails: after the last
/// attempt the decision is `no` with the error recorded in its evidence.
pub fn judge(input: JudgeInput<'_>, endpoint: &EndpointConfig, client: &dyn ChatClient) -> Judgement {
    let request = build_request(&input, endpoint);
    let method = if input.evidence.is_some() {
        Method::LlmEnriched
    } else {
        Method::Llm
    };
    let mut evidence = input.evidence.unwrap_or_default();
    let started = Instant::now();
    let max_attempts = endpoint.max_retries.max(1);
    let mut last_error = String::new();
    let mut transport_only = true;
    for attempt in 1..=max_attempts {
        match client.complete(&request).and_then(|text| parse_verdict(&text)) {
            Ok(v) => {
                if v.cerca_univ_id != request.record_id || v.scopus_candidate_id != request.auid {
                    log::warn!(
                        "verdict ids ({}, {}) do not echo request ({}, {})",
                        v.cerca_univ_id,
                        v.scopus_candidate_id,
                        request.record_id,
                        request.auid
                    );
                }
                return Judgement {
                    decision: Decision {
                        record_id: request.record_id,
                        auid: request.auid,
                        verdict: Verdict::from_bool(v.is_match),
                        method,
                        score: evidence.bc.as_ref().map(|b| b.ratio),
                        explanation: Some(v.explanation),
                        evidence: (!evidence.is_empty()).then_some(evidence),
                    },
                    attempts: attempt,
                    latency: started.elapsed(),
                    endpoint_failure: false,
                };
            }
            Err(e) => {
                transport_only &= e.is_endpoint();
                log::warn!(
                    "({}, {}) attempt {attempt}/{max_attempts} failed: {e}",
                    request.record_id,
                    request.auid
                );
                last_error = e.to_string();
            }
        }
    }
    let kind = if transport_only { "endpoint" } else { "parse" };
    evidence.llm_error = Some(format!("{kind} failure after {max_attempts} attempts: {last_error}"));
    Judgement {
        decision: Decision {
            record_id: request.record_id,
            auid: request.auid,
            verdict: Verdict::No,
            method,
            score: evidence.bc.as_ref().map(|b| b.ratio),
            explanation: None,
            evidence: Some(evidence),
        },
        attempts: max_attempts,
        latency: started.elapsed(),
        endpoint_failure: transport_only,
    }
}
