//! `lead` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 endpoint error.

mod args;

use std::collections::{BTreeMap, HashMap};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use lead_core::bibcoupling::{CorpusCache, TimeWindow};
use lead_core::eval::{self, format_sweep, format_table, ConfusionMatrix, SweepCell};
use lead_core::ingest::{load_pairs, Dataset, DatasetPaths, GoldColumns};
use lead_core::labelspread::{EdgeWeighting, LabelModel, SpreadParams};
use lead_core::llmjudge::{
    ChatClient, DecodeParams, EndpointConfig, Enrichment, FixtureClient, HttpChatClient, MetadataMode, OracleClient,
    PaperLimit, PromptConfig,
};
use lead_core::model::{CandidatePair, Decision};
use lead_core::orchestrator::{corpus_for, run, MethodConfig, RunContext, RunOptions, RunResult, DEFAULT_THRESHOLD};
use lead_core::synthkit::{generate, SynthParams};
use lead_core::taxonomy::{Granularity, RFCode, TaxonomyTable};

use args::*;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Endpoint(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Endpoint(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Endpoint(m) => m,
        }
    }
}

impl From<lead_core::Error> for Failure {
    fn from(e: lead_core::Error) -> Self {
        match e {
            lead_core::Error::Param(_) => Failure::Usage(e.to_string()),
            lead_core::Error::Endpoint(_) => Failure::Endpoint(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn data_err(msg: impl Into<String>) -> Failure {
    Failure::Data(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Validate(a) => resolve(&a, &a.common).and_then(|a| cmd_validate(&a)),
        Command::Corpus(a) => resolve(&a, &a.common).and_then(|a| cmd_corpus(&a)),
        Command::Graph(a) => resolve(&a, &a.common).and_then(|a| cmd_graph(&a)),
        Command::Run(a) => {
            let explicit = explicit_keys(&a);
            resolve(&a, &a.common).and_then(|a| cmd_run(&a, &explicit))
        }
        Command::Sweep(a) => resolve(&a, &a.common).and_then(|a| cmd_sweep(&a)),
        Command::Eval(a) => resolve(&a, &a.common).and_then(|a| cmd_eval(&a)),
        Command::Synth(a) => resolve(&a, &a.common).and_then(|a| cmd_synth(&a)),
        Command::Report(a) => resolve(&a, &a.common).and_then(|a| cmd_report(&a)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

/// Applies the config file under the flags, then starts logging and the worker pool.
fn resolve<T: Serialize + DeserializeOwned>(flags: &T, common: &CommonArgs) -> CliResult<T> {
    let config = common.config.as_deref().map(read_config).transpose().map_err(usage)?;
    let merged = layer(flags, config.as_ref()).map_err(usage)?;
    let Value::Object(m) = serde_json::to_value(&merged).map_err(|e| usage(e.to_string()))? else {
        unreachable!()
    };
    let level = m.get("log_level").and_then(Value::as_str).unwrap_or("warn").to_string();
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    if let Some(jobs) = m.get("jobs").and_then(Value::as_u64).filter(|j| *j > 0) {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs as usize)
            .build_global();
    }
    Ok(merged)
}

fn parse<T: std::str::FromStr<Err = lead_core::Error>>(s: Option<&str>, default: T) -> CliResult<T> {
    s.map_or(Ok(default), |s| s.parse().map_err(Failure::from))
}

fn window_of(s: Option<&str>) -> CliResult<TimeWindow> {
    parse(s, TimeWindow::default())
}

fn granularity_of(s: Option<&str>, default: Granularity) -> CliResult<Granularity> {
    parse(s, default)
}

struct Inputs {
    dataset: Dataset,
    taxonomy: Option<TaxonomyTable>,
    files: BTreeMap<&'static str, PathBuf>,
}

fn load_inputs(c: &CommonArgs) -> CliResult<Inputs> {
    let data = c.data_dir();
    let mut paths = DatasetPaths::in_dir(&data);
    if let Some(p) = &c.registry {
        paths.registry = p.clone();
    }
    if let Some(p) = &c.profiles {
        paths.profiles = p.clone();
    }
    if let Some(p) = &c.seeds {
        paths.seeds = p.clone();
    }
    if let Some(p) = &c.gold {
        paths.gold = Some(p.clone());
    }
    let mut columns = GoldColumns::default();
    for spec in &c.gold_column {
        let (k, v) = spec
            .split_once('=')
            .ok_or_else(|| usage(format!("--gold-column expects key=column, got {spec:?}")))?;
        columns.set(k.trim(), v.trim())?;
    }
    let dataset = Dataset::load(&paths, &columns)?;
    let taxonomy_path = c.taxonomy.clone().or_else(|| {
        let p = data.join("taxonomy.csv");
        p.exists().then_some(p)
    });
    let taxonomy = taxonomy_path.as_ref().map(TaxonomyTable::load).transpose()?;
    let mut files = BTreeMap::new();
    files.insert("registry", paths.registry);
    files.insert("profiles", paths.profiles);
    files.insert("seeds", paths.seeds);
    if let Some(g) = paths.gold {
        files.insert("gold", g);
    }
    if let Some(t) = taxonomy_path {
        files.insert("taxonomy", t);
    }
    Ok(Inputs {
        dataset,
        taxonomy,
        files,
    })
}

fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| data_err(format!("{}: {e}", path.display())))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn digests(files: &BTreeMap<&'static str, PathBuf>) -> CliResult<Value> {
    let mut out = serde_json::Map::new();
    for (name, path) in files {
        out.insert(name.to_string(), json!({"path": path, "sha256": sha256_file(path)?}));
    }
    Ok(Value::Object(out))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| data_err(format!("{}: {e}", dir.display())))
}

fn write_file(path: &Path, body: &str) -> CliResult<()> {
    std::fs::write(path, body).map_err(|e| data_err(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, v: &Value) -> CliResult<()> {
    let body = serde_json::to_string_pretty(v).map_err(|e| data_err(e.to_string()))? + "\n";
    write_file(path, &body)
}

fn cmd_validate(a: &ValidateArgs) -> CliResult<()> {
    let inputs = load_inputs(&a.common)?;
    let s = inputs.dataset.summary();
    println!("records        {}", s.records);
    println!("profiles       {}", s.profiles);
    println!("publications   {}", s.publications);
    println!("seeds          {} in {} fields", s.seeds, s.seed_fields);
    println!(
        "gold pairs     {} ({} correct, {} incorrect)",
        s.gold_pairs,
        s.gold_positive,
        s.gold_pairs - s.gold_positive
    );
    if let Some(t) = &inputs.taxonomy {
        let mut unknown_rf = 0;
        let mut inconsistent_ad = 0;
        for r in inputs.dataset.records.values() {
            if t.rf_label(&r.rf).is_none() {
                unknown_rf += 1;
            }
            if t.ad_to_rf.get(&r.ad).is_some_and(|rf| *rf != r.rf) {
                inconsistent_ad += 1;
                log::warn!(
                    "record {}: AD {} belongs to {}, not {}",
                    r.record_id,
                    r.ad,
                    t.ad_to_rf[&r.ad],
                    r.rf
                );
            }
        }
        println!(
            "taxonomy       {} fields; {} records with an unlisted field, {} with an AD of another field",
            t.rf_labels.len(),
            unknown_rf,
            inconsistent_ad
        );
        for m in t.official_count_mismatches() {
            log::info!("taxonomy differs from the official per-area counts: {m}");
        }
    }
    println!("ok");
    Ok(())
}

fn cmd_corpus(a: &CorpusArgs) -> CliResult<()> {
    let window = window_of(a.window.as_deref())?;
    let fields: Vec<RFCode> =
        a.rf.iter()
            .map(|s| s.parse::<RFCode>().map_err(Failure::from))
            .collect::<CliResult<_>>()?;
    let inputs = load_inputs(&a.common)?;
    let ds = &inputs.dataset;
    let fields = if fields.is_empty() {
        ds.seeds_by_rf().keys().copied().collect()
    } else {
        fields
    };
    let dir = a
        .common
        .cache_dir
        .clone()
        .unwrap_or_else(|| a.common.out_dir().join("corpora"));
    let cache = CorpusCache::new(&dir);
    println!("field  seeds  papers  references  source  file");
    for rf in fields {
        let (c, cached) = corpus_for(ds, rf, window, None, Some(&cache))?;
        println!(
            "{}  {:>5}  {:>6}  {:>10}  {:<6}  {}",
            rf,
            c.n_seed_authors,
            c.n_papers,
            c.references.len(),
            if cached { "cache" } else { "built" },
            cache.path_for(rf, window, &c.seed_hash).display()
        );
    }
    Ok(())
}

fn spread_settings(s: &SpreadArgs) -> CliResult<(SpreadParams, EdgeWeighting)> {
    let d = SpreadParams::default();
    let params = SpreadParams {
        alpha: s.alpha.unwrap_or(d.alpha),
        tol: s.tol.unwrap_or(d.tol),
        max_iter: s.max_iter.unwrap_or(d.max_iter),
    };
    params.validate()?;
    let weighting = match s.edge_weighting.as_deref() {
        None | Some("count") => EdgeWeighting::Count,
        Some("binary") => EdgeWeighting::Binary,
        Some(other) => return Err(usage(format!("unknown edge weighting {other:?} (count, binary)"))),
    };
    Ok((params, weighting))
}

fn cmd_graph(a: &GraphArgs) -> CliResult<()> {
    let level = granularity_of(a.spread.granularity.as_deref(), Granularity::ScientificArea)?;
    let (params, weighting) = spread_settings(&a.spread)?;
    let inputs = load_inputs(&a.common)?;
    let model = LabelModel::build(&inputs.dataset, level, &params, weighting)?;
    let out = a.common.out_dir();
    ensure_dir(&out)?;
    let mut w = csv_text(&["auid", "class", "confidence", "tie", "seed_class"]);
    let mut abstaining = 0usize;
    for (i, auid) in model.graph.nodes.iter().enumerate() {
        let inf = model.infer(auid)?;
        let class = model.class_id(&inf).unwrap_or("");
        if inf.class.is_none() {
            abstaining += 1;
        }
        let seed = model.seeds.labels[i].map_or("", |k| model.seeds.classes[k].as_str());
        w.push_row(&[
            auid,
            class,
            &format!("{}", inf.confidence),
            if inf.tie { "1" } else { "0" },
            seed,
        ]);
    }
    write_file(&out.join("soft_labels.csv"), &w.finish())?;
    let seeded = model.seeds.labels.iter().filter(|l| l.is_some()).count();
    let summary = json!({
        "level": level,
        "nodes": model.graph.len(),
        "edges": model.graph.weights.nnz() / 2,
        "seeded_nodes": seeded,
        "classes": model.seeds.classes.len(),
        "iterations_used": model.soft.iterations_used,
        "converged": model.soft.converged,
        "abstaining_nodes": abstaining,
        "params": params,
        "weighting": weighting,
        "step_norms": model.soft.trace,
    });
    write_json(&out.join("graph.json"), &summary)?;
    println!(
        "{} nodes, {} edges, {} seeded in {} classes at {}; {} iterations ({}), {} nodes without a label",
        model.graph.len(),
        model.graph.weights.nnz() / 2,
        seeded,
        model.seeds.classes.len(),
        level,
        model.soft.iterations_used,
        if model.soft.converged {
            "converged"
        } else {
            "stopped at the cap"
        },
        abstaining
    );
    Ok(())
}

/// Minimal CSV builder over the `csv` writer used by the core, kept local to avoid a direct dependency.
struct CsvText {
    out: String,
}

fn csv_text(header: &[&str]) -> CsvText {
    let mut t = CsvText { out: String::new() };
    t.push_row(header);
    t
}

impl CsvText {
    fn push_row(&mut self, cells: &[&str]) {
        let line: Vec<String> = cells
            .iter()
            .map(|c| {
                if c.contains([',', '"', '\n']) {
                    format!("\"{}\"", c.replace('"', "\"\""))
                } else {
                    c.to_string()
                }
            })
            .collect();
        self.out.push_str(&line.join(","));
        self.out.push('\n');
    }

    fn finish(self) -> String {
        self.out
    }
}

/// Flags that only make sense for some methods, checked against what was typed.
fn check_method_flags(method: MethodName, explicit: &[String]) -> CliResult<()> {
    let allowed: &[&str] = match method {
        MethodName::Bc => &["threshold", "window"],
        MethodName::Ls => &["granularity"],
        MethodName::Llm => &[],
        MethodName::LlmEnriched => &["window", "with_bc", "with_ls", "evidence_level"],
        MethodName::Lead => &["threshold", "window", "with_bc", "with_ls", "evidence_level"],
    };
    let method_specific = [
        "threshold",
        "window",
        "with_bc",
        "with_ls",
        "evidence_level",
        "granularity",
    ];
    let llm_only = [
        "mock",
        "oracle_mock",
        "oracle_error_rate",
        "oracle_seed",
        "endpoint",
        "model",
        "timeout",
        "max_retries",
        "max_concurrent",
        "top_k",
        "max_length",
        "metadata_mode",
        "papers",
        "all_papers",
        "sample_seed",
    ];
    let uses_llm = !matches!(method, MethodName::Bc | MethodName::Ls);
    let uses_graph = matches!(method, MethodName::Ls | MethodName::LlmEnriched | MethodName::Lead);
    for k in explicit {
        let bad = (method_specific.contains(&k.as_str()) && !allowed.contains(&k.as_str()))
            || (!uses_llm && llm_only.contains(&k.as_str()))
            || (!uses_graph && ["alpha", "tol", "max_iter", "edge_weighting"].contains(&k.as_str()));
        if bad {
            return Err(usage(format!(
                "--{} does not apply to --method {}",
                k.replace('_', "-"),
                method_flag(method)
            )));
        }
    }
    if explicit.iter().any(|k| k == "papers") && explicit.iter().any(|k| k == "all_papers") {
        return Err(usage("--papers and --all-papers conflict"));
    }
    Ok(())
}

fn method_flag(m: MethodName) -> &'static str {
    match m {
        MethodName::Bc => "bc",
        MethodName::Ls => "ls",
        MethodName::Llm => "llm",
        MethodName::LlmEnriched => "llm-enriched",
        MethodName::Lead => "lead",
    }
}

fn method_config(a: &RunArgs, method: MethodName) -> CliResult<MethodConfig> {
    let threshold = a.threshold.unwrap_or(DEFAULT_THRESHOLD);
    let window = window_of(a.window.as_deref())?;
    let l = &a.llm;
    let prompt = PromptConfig {
        metadata_mode: parse::<MetadataMode>(l.metadata_mode.as_deref(), MetadataMode::default())?,
        paper_limit: if l.all_papers {
            PaperLimit::All
        } else {
            PaperLimit::Sample {
                k: l.papers.unwrap_or(10),
                seed: l.sample_seed.unwrap_or(0),
            }
        },
        enrichment: Enrichment {
            include_bc: a.with_bc,
            include_ls: a.with_ls,
        },
    };
    let config = match method {
        MethodName::Bc => MethodConfig::Bc { threshold, window },
        MethodName::Ls => MethodConfig::Ls {
            granularity: granularity_of(a.spread.granularity.as_deref(), Granularity::ScientificArea)?,
        },
        MethodName::Llm => MethodConfig::Llm {
            prompt: PromptConfig {
                enrichment: Enrichment::default(),
                ..prompt
            },
        },
        MethodName::LlmEnriched => MethodConfig::LlmEnriched { prompt, window },
        MethodName::Lead => MethodConfig::Lead {
            threshold,
            window,
            prompt,
        },
    };
    config.validate()?;
    if matches!(method, MethodName::LlmEnriched | MethodName::Lead) && !a.with_bc && !a.with_ls {
        log::warn!("neither --with-bc nor --with-ls given; escalated pairs get the plain prompt");
    }
    Ok(config)
}

fn endpoint_config(l: &LlmArgs) -> CliResult<EndpointConfig> {
    let d = EndpointConfig::default();
    let e = EndpointConfig {
        base_url: l.endpoint.clone().unwrap_or(d.base_url),
        model_name: l.model.clone().unwrap_or(d.model_name),
        decode: DecodeParams {
            top_k: l.top_k.unwrap_or(d.decode.top_k),
            max_length: l.max_length.unwrap_or(d.decode.max_length),
        },
        timeout_secs: l.timeout.unwrap_or(d.timeout_secs),
        max_retries: l.max_retries.unwrap_or(d.max_retries),
        max_concurrent: l.max_concurrent.unwrap_or(d.max_concurrent),
    };
    e.validate()?;
    Ok(e)
}

fn make_client(l: &LlmArgs, endpoint: &EndpointConfig, labelled: &[CandidatePair]) -> CliResult<Box<dyn ChatClient>> {
    let chosen = [l.mock.is_some(), l.oracle_mock, l.endpoint.is_some()];
    match chosen.iter().filter(|b| **b).count() {
        0 => {
            return Err(usage(
                "this method needs an LLM: give --mock, --oracle-mock or --endpoint",
            ))
        }
        1 => {}
        _ => return Err(usage("--mock, --oracle-mock and --endpoint are mutually exclusive")),
    }
    if let Some(path) = &l.mock {
        return Ok(Box::new(FixtureClient::load(path)?));
    }
    if l.oracle_mock {
        let rate = l.oracle_error_rate.unwrap_or(0.0);
        if !(0.0..=1.0).contains(&rate) {
            return Err(usage(format!("--oracle-error-rate must lie in [0, 1], got {rate}")));
        }
        if labelled.is_empty() {
            return Err(data_err("--oracle-mock needs labelled pairs"));
        }
        return Ok(Box::new(OracleClient::from_pairs(
            labelled,
            rate,
            l.oracle_seed.unwrap_or(0),
        )));
    }
    Ok(Box::new(HttpChatClient::new(endpoint)))
}

/// The pairs to classify, with labels filled in from the gold file where the pair file has none.
fn select_pairs(ds: &Dataset, pairs_file: Option<&Path>) -> CliResult<Vec<CandidatePair>> {
    let mut pairs = match pairs_file {
        Some(p) => ds.resolve_pairs(&load_pairs(p)?)?,
        None => ds.gold.clone(),
    };
    let gold: HashMap<(&str, &str), Option<bool>> = ds.gold.iter().map(|p| (p.key(), p.gold)).collect();
    for p in &mut pairs {
        if p.gold.is_none() {
            p.gold = gold.get(&p.key()).copied().flatten();
        }
    }
    if pairs.is_empty() {
        return Err(data_err("no candidate pairs: give a gold file or --pairs"));
    }
    Ok(pairs)
}

fn decisions_jsonl(decisions: &[Decision]) -> CliResult<String> {
    let mut out = String::new();
    for d in decisions {
        out.push_str(&serde_json::to_string(d).map_err(|e| data_err(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

fn latency_summary(r: &RunResult) -> Value {
    json!({
        "llm_calls": r.llm_calls,
        "llm_attempts": r.llm_attempts,
        "escalated_pairs": r.escalated_pairs,
        "endpoint_failures": r.endpoint_failures,
        "corpora_built": r.corpora_built,
        "corpora_from_cache": r.corpora_from_cache,
        "elapsed_seconds": r.elapsed_seconds,
        "prep_seconds": r.prep_seconds,
        "inference_seconds": r.inference_seconds,
    })
}

fn cmd_run(a: &RunArgs, explicit: &[String]) -> CliResult<()> {
    let method = a.method.unwrap_or(MethodName::Lead);
    check_method_flags(method, explicit)?;
    let config = method_config(a, method)?;
    let (spread, weighting) = spread_settings(&a.spread)?;
    let options = RunOptions {
        jobs: a.common.jobs(),
        cache_dir: a.common.cache_dir.clone(),
        spread,
        weighting,
        evidence_level: granularity_of(a.evidence_level.as_deref(), Granularity::RecruitmentField)?,
    };
    let endpoint = endpoint_config(&a.llm)?;

    let inputs = load_inputs(&a.common)?;
    let ds = &inputs.dataset;
    let pairs = select_pairs(ds, a.pairs.as_deref())?;
    let labelled: Vec<CandidatePair> = pairs.iter().filter(|p| p.gold.is_some()).cloned().collect();
    let client = if config.uses_llm() {
        Some(make_client(&a.llm, &endpoint, &labelled)?)
    } else {
        None
    };

    let ctx = RunContext {
        dataset: ds,
        taxonomy: inputs.taxonomy.as_ref(),
        client: client.as_deref(),
        endpoint: &endpoint,
        options: &options,
    };
    let result = run(&ctx, &pairs, &config)?;

    let out = a.common.out_dir();
    ensure_dir(&out)?;
    write_file(&out.join("decisions.jsonl"), &decisions_jsonl(&result.decisions)?)?;

    let mut files = inputs.files.clone();
    if let Some(p) = &a.pairs {
        files.insert("pairs", p.clone());
    }
    if let Some(p) = &a.llm.mock {
        files.insert("mock", p.clone());
    }
    let mut manifest = json!({
        "tool": "lead",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "run",
        "label": config.label(),
        "settings": serde_json::to_value(a).map_err(|e| data_err(e.to_string()))?,
        "method": config,
        "options": options,
        "client": client.as_ref().map(|c| c.identity()),
        "endpoint": config.uses_llm().then_some(&endpoint),
        "inputs": digests(&files)?,
        "pairs": pairs.len(),
        "results": latency_summary(&result),
    });

    let label = config.label();
    println!(
        "{label}: {} pairs, {} sent to the LLM, {:.2} s ({:.2} s preparing artifacts)",
        pairs.len(),
        result.llm_calls,
        result.elapsed_seconds,
        result.prep_seconds
    );
    if labelled.len() == pairs.len() {
        let report = eval::evaluate(&result.decisions, &pairs)?.with_time(result.elapsed_seconds);
        manifest["matrix"] = serde_json::to_value(report.matrix).map_err(|e| data_err(e.to_string()))?;
        let table = format_table(&[(label, report)]);
        write_file(&out.join("report.txt"), &table.text)?;
        write_file(&out.join("report.csv"), &table.csv)?;
        print!("{}", table.text);
    } else {
        log::info!(
            "{} of {} pairs carry a label; no report written",
            labelled.len(),
            pairs.len()
        );
    }
    write_json(&out.join("manifest.json"), &manifest)?;

    if result.endpoint_failures > 0 {
        return Err(Failure::Endpoint(format!(
            "{} pairs got no answer from the LLM endpoint and were recorded as \"no\"; outputs are in {}",
            result.endpoint_failures,
            out.display()
        )));
    }
    Ok(())
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> CliResult<T>) -> CliResult<Vec<T>> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(f).collect()
}

fn cmd_sweep(a: &SweepArgs) -> CliResult<()> {
    let thresholds = parse_list(a.thresholds.as_deref().unwrap_or("0.25,0.20,0.15,0.10"), |s| {
        s.parse::<f64>().map_err(|_| usage(format!("bad threshold {s:?}")))
    })?;
    let windows = parse_list(a.windows.as_deref().unwrap_or("2020:2023,2016:2023"), |s| {
        window_of(Some(s))
    })?;
    if thresholds.is_empty() || windows.is_empty() {
        return Err(usage("--thresholds and --windows need at least one value each"));
    }
    let inputs = load_inputs(&a.common)?;
    let pairs = select_pairs(&inputs.dataset, a.pairs.as_deref())?;
    if pairs.iter().any(|p| p.gold.is_none()) {
        return Err(data_err("sweep needs a label for every pair"));
    }
    let out = a.common.out_dir();
    let options = RunOptions {
        jobs: a.common.jobs(),
        cache_dir: Some(a.common.cache_dir.clone().unwrap_or_else(|| out.join("corpora"))),
        ..RunOptions::default()
    };
    let endpoint = EndpointConfig::default();
    let ctx = RunContext {
        dataset: &inputs.dataset,
        taxonomy: inputs.taxonomy.as_ref(),
        client: None,
        endpoint: &endpoint,
        options: &options,
    };
    let mut cells = Vec::new();
    for &window in &windows {
        for &threshold in &thresholds {
            let config = MethodConfig::bc(threshold, window);
            let r = run(&ctx, &pairs, &config)?;
            cells.push(SweepCell {
                threshold,
                window,
                report: eval::evaluate(&r.decisions, &pairs)?.with_time(r.elapsed_seconds),
            });
        }
    }
    let table = format_sweep(&cells);
    ensure_dir(&out)?;
    write_file(&out.join("sweep.csv"), &table.csv)?;
    write_file(&out.join("sweep.txt"), &table.text)?;
    print!("{}", table.text);
    Ok(())
}

fn read_decisions(path: &Path) -> CliResult<Vec<Decision>> {
    let text = std::fs::read_to_string(path).map_err(|e| data_err(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| data_err(format!("{}:{}: {e}", path.display(), i + 1))))
        .collect()
}

/// Label and elapsed time recorded by the run that produced `decisions`, if its manifest sits beside it.
fn sibling_manifest(decisions: &Path) -> Option<Value> {
    let m = decisions.parent()?.join("manifest.json");
    serde_json::from_str(&std::fs::read_to_string(m).ok()?).ok()
}

fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    if a.decisions.is_empty() {
        return Err(usage("give at least one --decisions file"));
    }
    let inputs = load_inputs(&a.common)?;
    let pairs = select_pairs(&inputs.dataset, a.pairs.as_deref())?;
    let labelled: Vec<CandidatePair> = pairs.into_iter().filter(|p| p.gold.is_some()).collect();
    if labelled.is_empty() {
        return Err(data_err("no labelled pairs to score against"));
    }
    let mut rows = Vec::new();
    for spec in &a.decisions {
        let (name, path) = match spec.split_once('=') {
            Some((n, p)) => (Some(n.to_string()), PathBuf::from(p)),
            None => (None, PathBuf::from(spec)),
        };
        let decisions = read_decisions(&path)?;
        let manifest = sibling_manifest(&path);
        let name = name
            .or_else(|| manifest.as_ref()?.get("label")?.as_str().map(String::from))
            .unwrap_or_else(|| path.display().to_string());
        let mut report = eval::evaluate(&decisions, &labelled)?;
        if let Some(t) = manifest.as_ref().and_then(|m| m["results"]["elapsed_seconds"].as_f64()) {
            report = report.with_time(t);
        }
        rows.push((name, report));
    }
    let table = format_table(&rows);
    let out = a.common.out_dir();
    ensure_dir(&out)?;
    write_file(&out.join("report.txt"), &table.text)?;
    write_file(&out.join("report.csv"), &table.csv)?;
    print!("{}", table.text);
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> CliResult<()> {
    let mut params = match &a.params {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<SynthParams>(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
        None => SynthParams::default(),
    };
    if let Some(v) = a.seed {
        params.rng_seed = v;
    }
    if let Some(v) = a.n_fields {
        params.n_fields = v;
    }
    if let Some(v) = a.seeds_per_field {
        params.seeds_per_field = v;
    }
    if let Some(v) = a.candidates_per_field {
        params.candidates_per_field = v;
    }
    if let Some(v) = a.homonym_rate {
        params.homonym_rate = v;
    }
    if let Some(v) = a.noise {
        params.cross_field_ref_noise = v;
    }
    let dir = a.common.out.clone().unwrap_or_else(|| a.common.data_dir());
    let written = generate(&params)?.write_to(&dir)?;
    let mut stdout = std::io::stdout().lock();
    for p in written {
        let _ = writeln!(stdout, "wrote {}", p.display());
    }
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> CliResult<()> {
    if a.runs.is_empty() {
        return Err(usage("give at least one run directory or manifest"));
    }
    let mut rows = Vec::new();
    for run in &a.runs {
        let path = if run.is_dir() {
            run.join("manifest.json")
        } else {
            run.clone()
        };
        let text = std::fs::read_to_string(&path).map_err(|e| data_err(format!("{}: {e}", path.display())))?;
        let m: Value = serde_json::from_str(&text).map_err(|e| data_err(format!("{}: {e}", path.display())))?;
        let matrix: ConfusionMatrix = serde_json::from_value(m["matrix"].clone()).map_err(|_| {
            data_err(format!(
                "{}: no confusion matrix; was the run labelled?",
                path.display()
            ))
        })?;
        let mut report = eval::metrics(&matrix)?;
        if let Some(t) = m["results"]["elapsed_seconds"].as_f64() {
            report = report.with_time(t);
        }
        let label = m["label"]
            .as_str()
            .map_or_else(|| run.display().to_string(), String::from);
        rows.push((label, report));
    }
    let table = format_table(&rows);
    let out = a.common.out_dir();
    ensure_dir(&out)?;
    write_file(&out.join("report.txt"), &table.text)?;
    write_file(&out.join("report.csv"), &table.csv)?;
    print!("{}", table.text);
    Ok(())
}
