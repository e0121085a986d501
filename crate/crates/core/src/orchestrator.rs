//! Runs a disambiguation method over a list of candidate pairs.
//!
//! Artifacts (field corpora, the label-spreading model) are prepared once per
//! run for exactly the keys the pairs need, then pairs are decided in
//! parallel. LEAD accepts pairs whose coupling ratio reaches the threshold
//! and sends the rest to the LLM with the structural evidence attached.

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bibcoupling::{
    bc_classify, build_field_corpus, candidate_reference_set, overlap, seed_set_hash, CorpusCache, FieldCorpus,
    OverlapResult, TimeWindow,
};
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::labelspread::{EdgeWeighting, LabelModel, SpreadParams};
use crate::llmjudge::{judge, ChatClient, EndpointConfig, Enrichment, JudgeInput, Judgement, PromptConfig};
use crate::model::{AuthorProfile, CandidatePair, Decision, Evidence, Method, Verdict};
use crate::taxonomy::{Granularity, RFCode, TaxonomyTable};

pub const DEFAULT_THRESHOLD: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MethodConfig {
    Bc {
        threshold: f64,
        window: TimeWindow,
    },
    Ls {
        granularity: Granularity,
    },
    Llm {
        prompt: PromptConfig,
    },
    /// Every pair goes to the LLM with the evidence selected by `prompt.enrichment`.
    LlmEnriched {
        prompt: PromptConfig,
        window: TimeWindow,
    },
    /// Below-threshold pairs go to the LLM with the evidence selected by `prompt.enrichment`.
    Lead {
        threshold: f64,
        window: TimeWindow,
        prompt: PromptConfig,
    },
}

impl MethodConfig {
    pub fn bc(threshold: f64, window: TimeWindow) -> Self {
        MethodConfig::Bc { threshold, window }
    }

    pub fn lead(threshold: f64, window: TimeWindow, enrichment: Enrichment) -> Self {
        MethodConfig::Lead {
            threshold,
            window,
            prompt: PromptConfig {
                enrichment,
                ..PromptConfig::default()
            },
        }
    }

    /// Row label used in result tables.
    pub fn label(&self) -> String {
        let flags = |e: &Enrichment| match (e.include_bc, e.include_ls) {
            (true, true) => " (BC+LS)",
            (true, false) => " (BC)",
            (false, true) => " (LS)",
            (false, false) => "",
        };
        match self {
            MethodConfig::Bc { .. } => "BC".into(),
            MethodConfig::Ls { granularity } => format!("LS ({granularity})"),
            MethodConfig::Llm { .. } => "LLM".into(),
            MethodConfig::LlmEnriched { prompt, .. } => format!("LLM enriched{}", flags(&prompt.enrichment)),
            MethodConfig::Lead { prompt, .. } => format!("LEAD{}", flags(&prompt.enrichment)),
        }
    }

    pub fn uses_llm(&self) -> bool {
        matches!(
            self,
            MethodConfig::Llm { .. } | MethodConfig::LlmEnriched { .. } | MethodConfig::Lead { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MethodConfig::Bc { threshold, .. } | MethodConfig::Lead { threshold, .. }
                if !(*threshold > 0.0 && *threshold < 1.0) =>
            {
                Err(Error::Param(format!("threshold must lie in (0, 1), got {threshold}")))
            }
            MethodConfig::Llm { prompt }
            | MethodConfig::LlmEnriched { prompt, .. }
            | MethodConfig::Lead { prompt, .. } => prompt.validate(),
            _ => Ok(()),
        }
    }

    fn window(&self) -> Option<TimeWindow> {
        match self {
            MethodConfig::Bc { window, .. } | MethodConfig::Lead { window, .. } => Some(*window),
            MethodConfig::LlmEnriched { prompt, window } if prompt.enrichment.include_bc => Some(*window),
            _ => None,
        }
    }

    /// Granularity of the label model the method needs, if any.
    fn ls_level(&self, evidence_level: Granularity) -> Option<Granularity> {
        match self {
            MethodConfig::Ls { granularity } => Some(*granularity),
            MethodConfig::LlmEnriched { prompt, .. } | MethodConfig::Lead { prompt, .. }
                if prompt.enrichment.include_ls =>
            {
                Some(evidence_level)
            }
            _ => None,
        }
    }
}

/// Settings shared by all methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Worker threads for pair evaluation; 0 means available parallelism.
    pub jobs: usize,
    pub cache_dir: Option<PathBuf>,
    pub spread: SpreadParams,
    pub weighting: EdgeWeighting,
    /// Granularity of the label-spreading evidence given to the LLM.
    pub evidence_level: Granularity,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            jobs: 0,
            cache_dir: None,
            spread: SpreadParams::default(),
            weighting: EdgeWeighting::Count,
            evidence_level: Granularity::RecruitmentField,
        }
    }
}

/// Inputs a run reads but does not own.
#[derive(Clone, Copy)]
pub struct RunContext<'a> {
    pub dataset: &'a Dataset,
    pub taxonomy: Option<&'a TaxonomyTable>,
    pub client: Option<&'a dyn ChatClient>,
    pub endpoint: &'a EndpointConfig,
    pub options: &'a RunOptions,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    /// One per input pair, sorted by `(record_id, auid)`.
    pub decisions: Vec<Decision>,
    pub elapsed_seconds: f64,
    /// Corpus and graph construction, included in `elapsed_seconds`.
    pub prep_seconds: f64,
    pub inference_seconds: f64,
    /// Pairs sent to the LLM.
    pub llm_calls: usize,
    /// Requests issued, retries included.
    pub llm_attempts: u64,
    pub escalated_pairs: usize,
    /// Pairs whose every attempt failed at the transport level.
    pub endpoint_failures: usize,
    pub corpora_built: usize,
    pub corpora_from_cache: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct CorpusKey {
    rf: RFCode,
    window: TimeWindow,
    exclude: Option<String>,
}

/// Field corpora keyed by what they were built from.
#[derive(Default)]
pub struct CorpusSet {
    corpora: HashMap<CorpusKey, Arc<FieldCorpus>>,
    pub built: usize,
    pub from_cache: usize,
}

impl CorpusSet {
    fn get(&self, key: &CorpusKey) -> Result<&FieldCorpus> {
        self.corpora
            .get(key)
            .map(Arc::as_ref)
            .ok_or_else(|| Error::Prerequisite(format!("field corpus for {} in {}", key.rf, key.window)))
    }
}

/// The seed author to leave out of the corpus for `pair`: the candidate
/// itself when it is a seed of the record's field.
fn excluded_seed(dataset: &Dataset, pair: &CandidatePair) -> Option<String> {
    dataset
        .seeds
        .iter()
        .any(|s| s.rf == pair.record.rf && s.auid == pair.auid)
        .then(|| pair.auid.clone())
}

fn corpus_key(dataset: &Dataset, pair: &CandidatePair, window: TimeWindow) -> CorpusKey {
    CorpusKey {
        rf: pair.record.rf,
        window,
        exclude: excluded_seed(dataset, pair),
    }
}

/// Builds, or loads from `cache`, the corpus of field `rf`.
pub fn corpus_for(
    dataset: &Dataset,
    rf: RFCode,
    window: TimeWindow,
    exclude: Option<&str>,
    cache: Option<&CorpusCache>,
) -> Result<(FieldCorpus, bool)> {
    let by_rf = dataset.seeds_by_rf();
    let seeds: Vec<&AuthorProfile> = by_rf
        .get(&rf)
        .into_iter()
        .flatten()
        .filter(|a| Some(**a) != exclude)
        .map(|a| {
            dataset
                .profiles
                .get(*a)
                .ok_or_else(|| Error::Prerequisite(format!("profile of seed author {a}")))
        })
        .collect::<Result<_>>()?;
    if let Some(cache) = cache {
        let hash = seed_set_hash(seeds.iter().map(|p| p.auid.as_str()));
        if let Some(c) = cache.load(rf, window, &hash)? {
            return Ok((c, true));
        }
        let corpus = build_field_corpus(rf, &seeds, window, None);
        cache.store(&corpus)?;
        return Ok((corpus, false));
    }
    Ok((build_field_corpus(rf, &seeds, window, None), false))
}

fn prepare_corpora(ctx: &RunContext<'_>, pairs: &[CandidatePair], window: TimeWindow) -> Result<CorpusSet> {
    let keys: BTreeSet<CorpusKey> = pairs.iter().map(|p| corpus_key(ctx.dataset, p, window)).collect();
    let cache = ctx.options.cache_dir.as_ref().map(CorpusCache::new);
    let built: Vec<(CorpusKey, FieldCorpus, bool)> = keys
        .into_par_iter()
        .map(|k| {
            let (c, cached) = corpus_for(ctx.dataset, k.rf, k.window, k.exclude.as_deref(), cache.as_ref())?;
            if c.is_empty_seed_set() {
                log::warn!("field {} has no seed authors; its corpus is empty", k.rf);
            }
            Ok((k, c, cached))
        })
        .collect::<Result<_>>()?;
    let mut set = CorpusSet::default();
    for (k, c, cached) in built {
        if cached {
            set.from_cache += 1;
        } else {
            set.built += 1;
        }
        set.corpora.insert(k, Arc::new(c));
    }
    Ok(set)
}

fn profile<'a>(dataset: &'a Dataset, auid: &str) -> Result<&'a AuthorProfile> {
    dataset
        .profiles
        .get(auid)
        .ok_or_else(|| Error::Prerequisite(format!("author profile {auid}")))
}

fn bc_overlap(
    dataset: &Dataset,
    corpora: &CorpusSet,
    pair: &CandidatePair,
    window: TimeWindow,
) -> Result<OverlapResult> {
    let corpus = corpora.get(&corpus_key(dataset, pair, window))?;
    let refs = candidate_reference_set(profile(dataset, &pair.auid)?, window);
    Ok(overlap(&refs, corpus))
}

fn bc_decision(pair: &CandidatePair, result: &OverlapResult, verdict: Verdict, method: Method) -> Decision {
    Decision {
        record_id: pair.record.record_id.clone(),
        auid: pair.auid.clone(),
        verdict,
        method,
        score: Some(result.ratio),
        explanation: None,
        evidence: Some(Evidence {
            bc: Some(result.evidence()),
            ..Evidence::default()
        }),
    }
}

/// First LEAD stage: `Ok` with the final decision when the ratio reaches the
/// threshold, `Err` with the overlap when the pair must be escalated.
pub fn lead_bc_stage(pair: &CandidatePair, result: &OverlapResult, threshold: f64) -> Result<Decision, OverlapResult> {
    if bc_classify(result, threshold).is_yes() {
        Ok(bc_decision(pair, result, Verdict::Yes, Method::LeadBcStage))
    } else {
        Err(*result)
    }
}

/// Evidence for an escalated or enriched prompt, as selected by `flags`.
pub fn gather_evidence(
    pair: &CandidatePair,
    bc: Option<&OverlapResult>,
    ls: Option<&LabelModel>,
    taxonomy: Option<&TaxonomyTable>,
    flags: Enrichment,
) -> Evidence {
    Evidence {
        bc: bc.filter(|_| flags.include_bc).map(OverlapResult::evidence),
        ls: ls
            .filter(|_| flags.include_ls)
            .map(|m| m.evidence(&pair.auid, taxonomy)),
        llm_error: None,
    }
}

/// Second LEAD stage: the enriched LLM judgement, re-tagged.
#[allow(clippy::too_many_arguments)]
pub fn lead_llm_stage(
    pair: &CandidatePair,
    profile: &AuthorProfile,
    result: &OverlapResult,
    evidence: Evidence,
    taxonomy: Option<&TaxonomyTable>,
    prompt: &PromptConfig,
    endpoint: &EndpointConfig,
    client: &dyn ChatClient,
) -> Judgement {
    let mut j = judge(
        JudgeInput {
            pair,
            profile,
            taxonomy,
            config: prompt,
            evidence: Some(evidence),
        },
        endpoint,
        client,
    );
    j.decision.method = Method::LeadLlmStage;
    j.decision.score = Some(result.ratio);
    j
}

/// Artifacts LEAD needs for one pair.
pub struct LeadInputs<'a> {
    pub corpus: &'a FieldCorpus,
    pub profile: &'a AuthorProfile,
    pub label_model: Option<&'a LabelModel>,
    pub taxonomy: Option<&'a TaxonomyTable>,
    pub prompt: &'a PromptConfig,
    pub endpoint: &'a EndpointConfig,
}

/// Decides one pair with LEAD. Returns the judgement too when the LLM was called.
pub fn lead_decide(
    pair: &CandidatePair,
    threshold: f64,
    window: TimeWindow,
    inputs: &LeadInputs<'_>,
    client: &dyn ChatClient,
) -> (Decision, Option<Judgement>) {
    let result = overlap(&candidate_reference_set(inputs.profile, window), inputs.corpus);
    match lead_bc_stage(pair, &result, threshold) {
        Ok(d) => (d, None),
        Err(result) => {
            let ev = gather_evidence(
                pair,
                Some(&result),
                inputs.label_model,
                inputs.taxonomy,
                inputs.prompt.enrichment,
            );
            let j = lead_llm_stage(
                pair,
                inputs.profile,
                &result,
                ev,
                inputs.taxonomy,
                inputs.prompt,
                inputs.endpoint,
                client,
            );
            (j.decision.clone(), Some(j))
        }
    }
}

fn thread_pool(n: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::Param(format!("cannot start worker pool: {e}")))
}

fn effective_jobs(jobs: usize) -> usize {
    if jobs > 0 {
        jobs
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

/// An escalated or LLM-bound pair waiting for the judge.
struct LlmTask<'p> {
    index: usize,
    pair: &'p CandidatePair,
    result: Option<OverlapResult>,
}

/// Runs `config` over `pairs`. Decisions are deterministic given the inputs
/// and a deterministic client; only the timings vary.
pub fn run(ctx: &RunContext<'_>, pairs: &[CandidatePair], config: &MethodConfig) -> Result<RunResult> {
    config.validate()?;
    if config.uses_llm() {
        ctx.endpoint.validate()?;
    }
    let client = match (config.uses_llm(), ctx.client) {
        (true, None) => return Err(Error::Prerequisite(format!("LLM client for method {}", config.label()))),
        (_, c) => c,
    };
    let jobs = effective_jobs(ctx.options.jobs);
    let pool = thread_pool(jobs)?;
    let started = Instant::now();

    let (corpora, label_model) = pool.install(|| -> Result<_> {
        let corpora = match config.window() {
            Some(w) => prepare_corpora(ctx, pairs, w)?,
            None => CorpusSet::default(),
        };
        let label_model = match config.ls_level(ctx.options.evidence_level) {
            Some(level) => {
                if ctx.dataset.seeds.is_empty() {
                    return Err(Error::Prerequisite("seed labels for label spreading".into()));
                }
                Some(LabelModel::build(
                    ctx.dataset,
                    level,
                    &ctx.options.spread,
                    ctx.options.weighting,
                )?)
            }
            None => None,
        };
        Ok((corpora, label_model))
    })?;
    let prep_seconds = started.elapsed().as_secs_f64();
    let inference_started = Instant::now();

    // First pass: everything that needs no LLM, plus the list of LLM tasks.
    let staged: Vec<std::result::Result<Decision, LlmTask<'_>>> = pool.install(|| {
        pairs
            .par_iter()
            .enumerate()
            .map(|(index, pair)| -> Result<_> {
                Ok(match config {
                    MethodConfig::Bc { threshold, window } => {
                        let r = bc_overlap(ctx.dataset, &corpora, pair, *window)?;
                        Ok(bc_decision(pair, &r, bc_classify(&r, *threshold), Method::Bc))
                    }
                    MethodConfig::Ls { .. } => {
                        let model = label_model.as_ref().expect("built above");
                        let (verdict, inference) = model.classify(&pair.record, &pair.auid);
                        Ok(Decision {
                            record_id: pair.record.record_id.clone(),
                            auid: pair.auid.clone(),
                            verdict,
                            method: Method::Ls,
                            score: inference.map(|i| i.confidence),
                            explanation: None,
                            evidence: Some(Evidence {
                                ls: Some(model.evidence(&pair.auid, ctx.taxonomy)),
                                ..Evidence::default()
                            }),
                        })
                    }
                    MethodConfig::Llm { .. } => Err(LlmTask {
                        index,
                        pair,
                        result: None,
                    }),
                    MethodConfig::LlmEnriched { window, prompt } => {
                        let result = if prompt.enrichment.include_bc {
                            Some(bc_overlap(ctx.dataset, &corpora, pair, *window)?)
                        } else {
                            None
                        };
                        Err(LlmTask { index, pair, result })
                    }
                    MethodConfig::Lead { threshold, window, .. } => {
                        let r = bc_overlap(ctx.dataset, &corpora, pair, *window)?;
                        lead_bc_stage(pair, &r, *threshold).map_err(|r| LlmTask {
                            index,
                            pair,
                            result: Some(r),
                        })
                    }
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut decisions: Vec<Option<Decision>> = vec![None; pairs.len()];
    let mut tasks = Vec::new();
    for (i, s) in staged.into_iter().enumerate() {
        match s {
            Ok(d) => decisions[i] = Some(d),
            Err(t) => tasks.push(t),
        }
    }

    let llm_calls = tasks.len();
    let escalated_pairs = if matches!(config, MethodConfig::Lead { .. }) {
        llm_calls
    } else {
        0
    };
    let mut llm_attempts = 0u64;
    let mut endpoint_failures = 0usize;
    if !tasks.is_empty() {
        let client = client.expect("checked above");
        let llm_pool = thread_pool(jobs.min(ctx.endpoint.max_concurrent).max(1))?;
        let judged: Vec<(usize, Judgement)> = llm_pool.install(|| {
            tasks
                .par_iter()
                .map(|t| -> Result<_> { Ok((t.index, judge_task(ctx, config, label_model.as_ref(), t, client)?)) })
                .collect::<Result<_>>()
        })?;
        for (i, j) in judged {
            llm_attempts += u64::from(j.attempts);
            endpoint_failures += usize::from(j.endpoint_failure);
            decisions[i] = Some(j.decision);
        }
    }

    let mut decisions: Vec<Decision> = decisions.into_iter().map(|d| d.expect("every pair decided")).collect();
    decisions.sort_by(|a, b| (&a.record_id, &a.auid).cmp(&(&b.record_id, &b.auid)));
    Ok(RunResult {
        decisions,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        prep_seconds,
        inference_seconds: inference_started.elapsed().as_secs_f64(),
        llm_calls,
        llm_attempts,
        escalated_pairs,
        endpoint_failures,
        corpora_built: corpora.built,
        corpora_from_cache: corpora.from_cache,
    })
}

fn judge_task(
    ctx: &RunContext<'_>,
    config: &MethodConfig,
    label_model: Option<&LabelModel>,
    task: &LlmTask<'_>,
    client: &dyn ChatClient,
) -> Result<Judgement> {
    let pair = task.pair;
    let profile = profile(ctx.dataset, &pair.auid)?;
    Ok(match config {
        MethodConfig::Lead { prompt, .. } => {
            let result = task.result.as_ref().expect("LEAD tasks carry their overlap");
            let ev = gather_evidence(pair, Some(result), label_model, ctx.taxonomy, prompt.enrichment);
            lead_llm_stage(pair, profile, result, ev, ctx.taxonomy, prompt, ctx.endpoint, client)
        }
        MethodConfig::LlmEnriched { prompt, .. } => {
            let ev = gather_evidence(pair, task.result.as_ref(), label_model, ctx.taxonomy, prompt.enrichment);
            judge(
                JudgeInput {
                    pair,
                    profile,
                    taxonomy: ctx.taxonomy,
                    config: prompt,
                    evidence: Some(ev),
                },
                ctx.endpoint,
                client,
            )
        }
        MethodConfig::Llm { prompt } => judge(
            JudgeInput {
                pair,
                profile,
                taxonomy: ctx.taxonomy,
                config: prompt,
                evidence: None,
            },
            ctx.endpoint,
            client,
        ),
        MethodConfig::Bc { .. } | MethodConfig::Ls { .. } => unreachable!("no LLM stage"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Dataset;
    use crate::llmjudge::{FixtureClient, OracleClient};
    use crate::model::{canonicalize_reference, Publication, RegistryRecord, Seed};
    use crate::taxonomy::parse_rf;
    use indexmap::IndexMap;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn refs(prefix: &str, range: std::ops::Range<usize>) -> Vec<crate::model::ReferenceId> {
        range
            .map(|i| canonicalize_reference(&format!("{prefix}{i}")).unwrap())
            .collect()
    }

    fn author(auid: &str, year: i32, references: Vec<crate::model::ReferenceId>, coauthors: &[&str]) -> AuthorProfile {
        AuthorProfile {
            auid: auid.into(),
            given_name: "A.".into(),
            surname: auid.into(),
            initials: "A.".into(),
            full_name: format!("A. {auid}"),
            affiliations: vec![],
            publications: vec![Publication {
                pub_id: format!("{auid}-p"),
                year,
                title: format!("Paper by {auid}"),
                keywords: vec!["k".into()],
                abstract_text: None,
                references,
                coauthor_auids: coauthors.iter().map(|c| c.to_string()).collect(),
            }],
        }
    }

    fn record(id: &str, rf: &str) -> RegistryRecord {
        RegistryRecord {
            record_id: id.into(),
            first_name: "Davide".into(),
            last_name: "Rossi".into(),
            role: "Researcher".into(),
            gender: None,
            rf: parse_rf(rf).unwrap(),
            ad: "ING-INF/01".into(),
            university: "Bologna".into(),
            department: None,
            year: 2022,
        }
    }

    /// Field 09/E3 with a 1000-reference seed corpus; candidate `c_k` shares
    /// `shared[k]` of its `cited[k]` references with it.
    fn fixture(cases: &[(usize, usize)]) -> (Dataset, Vec<CandidatePair>) {
        let mut records = IndexMap::new();
        let mut profiles = IndexMap::new();
        let seed = author("seed", 2018, refs("r", 0..1000), &[]);
        profiles.insert(seed.auid.clone(), seed);
        records.insert("s".to_string(), record("s", "09/E3"));
        let mut pairs = Vec::new();
        for (k, &(cited, shared)) in cases.iter().enumerate() {
            let mut r = refs("r", 0..shared);
            r.extend(refs(&format!("x{k}-"), 0..cited - shared));
            let auid = format!("c{k}");
            profiles.insert(auid.clone(), author(&auid, 2020, r, &["seed"]));
            let rec = record(&format!("{k}"), "09/E3");
            records.insert(rec.record_id.clone(), rec.clone());
            pairs.push(CandidatePair {
                record: rec,
                auid,
                gold: Some(true),
            });
        }
        let dataset = Dataset {
            records,
            profiles,
            seeds: vec![Seed {
                record_id: "s".into(),
                auid: "seed".into(),
                rf: parse_rf("09/E3").unwrap(),
            }],
            gold: pairs.clone(),
        };
        (dataset, pairs)
    }

    struct Counting<C>(C, AtomicUsize);

    impl<C: ChatClient> ChatClient for Counting<C> {
        fn complete(&self, r: &crate::llmjudge::ChatRequest) -> Result<String> {
            self.1.fetch_add(1, Ordering::SeqCst);
            self.0.complete(r)
        }
        fn identity(&self) -> String {
            "counting".into()
        }
    }

    fn ctx<'a>(
        dataset: &'a Dataset,
        client: Option<&'a dyn ChatClient>,
        endpoint: &'a EndpointConfig,
        options: &'a RunOptions,
    ) -> RunContext<'a> {
        RunContext {
            dataset,
            taxonomy: None,
            client,
            endpoint,
            options,
        }
    }

    #[test]
    fn bc_only_splits_by_threshold() {
        let (ds, pairs) = fixture(&[(100, 92), (100, 5)]);
        let (e, o) = (EndpointConfig::default(), RunOptions::default());
        let r = run(
            &ctx(&ds, None, &e, &o),
            &pairs,
            &MethodConfig::bc(0.15, TimeWindow::default()),
        )
        .unwrap();
        let v: Vec<Verdict> = r.decisions.iter().map(|d| d.verdict).collect();
        assert_eq!(v, vec![Verdict::Yes, Verdict::No]);
        assert_eq!(r.llm_calls, 0);
        assert!(r.decisions.iter().all(|d| d.method == Method::Bc));
    }

    #[test]
    fn lead_escalates_only_below_threshold() {
        let (ds, pairs) = fixture(&[(100, 92), (597, 23), (60, 1)]);
        let mock = Counting(OracleClient::from_pairs(&pairs, 0.0, 0), AtomicUsize::new(0));
        let (e, o) = (EndpointConfig::default(), RunOptions::default());
        let config = MethodConfig::lead(
            0.15,
            TimeWindow::default(),
            Enrichment {
                include_bc: true,
                include_ls: false,
            },
        );
        let r = run(&ctx(&ds, Some(&mock), &e, &o), &pairs, &config).unwrap();
        assert_eq!(r.llm_calls, 2);
        assert_eq!(r.escalated_pairs, 2);
        assert_eq!(mock.1.load(Ordering::SeqCst), 2);
        let methods: Vec<Method> = r.decisions.iter().map(|d| d.method).collect();
        assert_eq!(
            methods,
            vec![Method::LeadBcStage, Method::LeadLlmStage, Method::LeadLlmStage]
        );
        assert!(r.decisions.iter().all(|d| d.verdict == Verdict::Yes));
        let ratio = r.decisions[1].score.unwrap();
        assert!((ratio - 23.0 / 597.0).abs() < 1e-12);
    }

    #[test]
    fn lead_all_above_threshold_makes_no_calls() {
        let (ds, pairs) = fixture(&[(100, 50), (10, 9)]);
        let mock = Counting(OracleClient::from_pairs(&pairs, 0.0, 0), AtomicUsize::new(0));
        let (e, o) = (EndpointConfig::default(), RunOptions::default());
        let config = MethodConfig::lead(0.15, TimeWindow::default(), Enrichment::default());
        let r = run(&ctx(&ds, Some(&mock), &e, &o), &pairs, &config).unwrap();
        assert_eq!(r.llm_calls, 0);
        assert_eq!(mock.1.load(Ordering::SeqCst), 0);
    }

    #[test]
    fn escalated_pair_passes_through_llm_no() {
        let (ds, pairs) = fixture(&[(60, 1)]);
        let no = r#"{"cerca_univ_id": "0", "scopus_candidate_id": "c0", "match": "no", "explanation": "x"}"#;
        let mock = FixtureClient::from_pairs([("0".to_string(), "c0".to_string(), no.to_string())]);
        let (e, o) = (EndpointConfig::default(), RunOptions::default());
        let config = MethodConfig::lead(0.15, TimeWindow::default(), Enrichment::default());
        let r = run(&ctx(&ds, Some(&mock), &e, &o), &pairs, &config).unwrap();
        assert_eq!(r.decisions[0].verdict, Verdict::No);
        assert_eq!(r.decisions[0].method, Method::LeadLlmStage);
    }

    #[test]
    fn llm_method_without_client_is_a_prerequisite_error() {
        let (ds, pairs) = fixture(&[(10, 1)]);
        let (e, o) = (EndpointConfig::default(), RunOptions::default());
        let config = MethodConfig::lead(0.15, TimeWindow::default(), Enrichment::default());
        let err = run(&ctx(&ds, None, &e, &o), &pairs, &config).unwrap_err();
        assert!(
            matches!(err, Error::Prerequisite(ref m) if m.contains("LLM client")),
            "{err}"
        );
    }

    #[test]
    fn threshold_must_be_open_unit_interval() {
        for t in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(MethodConfig::bc(t, TimeWindow::default()).validate().is_err());
        }
        assert!(MethodConfig::bc(0.5, TimeWindow::default()).validate().is_ok());
    }

    #[test]
    fn seed_candidate_is_left_out_of_its_own_corpus() {
        // The only seed is also the candidate: the corpus it is scored
        // against must be empty, so the ratio is zero.
        let (ds, _) = fixture(&[]);
        let pair = CandidatePair {
            record: ds.records["s"].clone(),
            auid: "seed".into(),
            gold: Some(true),
        };
        let (e, o) = (EndpointConfig::default(), RunOptions::default());
        let r = run(
            &ctx(&ds, None, &e, &o),
            &[pair],
            &MethodConfig::bc(0.15, TimeWindow::default()),
        )
        .unwrap();
        assert_eq!(r.decisions[0].score, Some(0.0));
        assert_eq!(r.decisions[0].verdict, Verdict::No);
    }

    #[test]
    fn ls_only_matches_inferred_area() {
        let (ds, pairs) = fixture(&[(10, 5)]);
        let (e, o) = (EndpointConfig::default(), RunOptions::default());
        let config = MethodConfig::Ls {
            granularity: Granularity::ScientificArea,
        };
        let r = run(&ctx(&ds, None, &e, &o), &pairs, &config).unwrap();
        assert_eq!(r.decisions[0].verdict, Verdict::Yes);
        assert_eq!(r.decisions[0].method, Method::Ls);
        assert_eq!(r.llm_calls, 0);
    }

    #[test]
    fn corpus_cache_is_reused() {
        let dir = tempfile::tempdir().unwrap();
        let (ds, pairs) = fixture(&[(100, 92)]);
        let e = EndpointConfig::default();
        let o = RunOptions {
            cache_dir: Some(dir.path().to_path_buf()),
            ..RunOptions::default()
        };
        let config = MethodConfig::bc(0.15, TimeWindow::default());
        let first = run(&ctx(&ds, None, &e, &o), &pairs, &config).unwrap();
        let second = run(&ctx(&ds, None, &e, &o), &pairs, &config).unwrap();
        assert_eq!((first.corpora_built, first.corpora_from_cache), (1, 0));
        assert_eq!((second.corpora_built, second.corpora_from_cache), (0, 1));
        assert_eq!(first.decisions, second.decisions);
    }

    #[test]
    fn decisions_are_sorted_and_independent_of_jobs() {
        let cases: Vec<(usize, usize)> = (0..40).map(|k| (50, k % 20)).collect();
        let (ds, mut pairs) = fixture(&cases);
        pairs.reverse();
        let mock = OracleClient::from_pairs(&pairs, 0.3, 9);
        let e = EndpointConfig::default();
        let config = MethodConfig::lead(
            0.15,
            TimeWindow::default(),
            Enrichment {
                include_bc: true,
                include_ls: true,
            },
        );
        let runs: Vec<Vec<Decision>> = [1, 8]
            .iter()
            .map(|&jobs| {
                let o = RunOptions {
                    jobs,
                    ..RunOptions::default()
                };
                run(&ctx(&ds, Some(&mock), &e, &o), &pairs, &config).unwrap().decisions
            })
            .collect();
        assert_eq!(runs[0], runs[1]);
        let keys: Vec<(&str, &str)> = runs[0]
            .iter()
            .map(|d| (d.record_id.as_str(), d.auid.as_str()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn method_config_json_round_trip() {
        let c = MethodConfig::lead(
            0.2,
            "2012:2023".parse().unwrap(),
            Enrichment {
                include_bc: true,
                include_ls: false,
            },
        );
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains(r#""method":"lead""#), "{s}");
        assert_eq!(serde_json::from_str::<MethodConfig>(&s).unwrap(), c);
    }
}
