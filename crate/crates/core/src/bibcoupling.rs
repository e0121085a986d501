//! Bibliographic coupling against per-field reference corpora.
//!
//! A field corpus is the set of distinct references cited by a recruitment
//! field's seed authors in publications inside a time window. A candidate is
//! scored by the share of its own distinct in-window references that also
//! appear in the corpus of the record's field.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{AuthorProfile, BcEvidence, ReferenceId, Verdict};
use crate::percent::Tenths;
use crate::taxonomy::{parse_rf, RFCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TimeWindow {
    pub start_year: i32,
    pub end_year: i32,
}

impl TimeWindow {
    pub fn new(start_year: i32, end_year: i32) -> Result<Self> {
        if start_year > end_year {
            return Err(Error::Param(format!(
                "window start {start_year} is after end {end_year}"
            )));
        }
        Ok(TimeWindow { start_year, end_year })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start_year..=self.end_year).contains(&year)
    }
}

impl Default for TimeWindow {
    fn default() -> Self {
        TimeWindow {
            start_year: 2016,
            end_year: 2023,
        }
    }
}

impl fmt::Display for TimeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start_year, self.end_year)
    }
}

impl FromStr for TimeWindow {
    type Err = Error;

    /// Parses `start:end`, both inclusive.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Param(format!("window must be start:end, got {s:?}"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let a = a.trim().parse().map_err(|_| bad())?;
        let b = b.trim().parse().map_err(|_| bad())?;
        TimeWindow::new(a, b)
    }
}

impl TryFrom<String> for TimeWindow {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TimeWindow> for String {
    fn from(w: TimeWindow) -> String {
        w.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldCorpus {
    pub rf: RFCode,
    pub window: TimeWindow,
    pub n_seed_authors: usize,
    pub n_papers: usize,
    pub references: HashSet<ReferenceId>,
    /// Hex digest of the sorted seed auids the corpus was built from.
    pub seed_hash: String,
}

impl FieldCorpus {
    /// True when no seed author contributed (the `EmptyCorpus` condition).
    pub fn is_empty_seed_set(&self) -> bool {
        self.n_seed_authors == 0
    }
}

/// Digest identifying a seed set independent of its order.
pub fn seed_set_hash<'a>(auids: impl IntoIterator<Item = &'a str>) -> String {
    let mut sorted: Vec<&str> = auids.into_iter().collect();
    sorted.sort_unstable();
    sorted.dedup();
    let mut h = Sha256::new();
    for a in sorted {
        h.update(a.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Unions the in-window references of `seeds`, skipping `exclude_auid`.
pub fn build_field_corpus(
    rf: RFCode,
    seeds: &[&AuthorProfile],
    window: TimeWindow,
    exclude_auid: Option<&str>,
) -> FieldCorpus {
    let included: Vec<&AuthorProfile> = seeds
        .iter()
        .copied()
        .filter(|p| Some(p.auid.as_str()) != exclude_auid)
        .collect();
    let (n_papers, references) = included
        .par_iter()
        .map(|p| candidate_reference_set(p, window))
        .map(|c| (c.n_papers, c.references))
        .reduce(
            || (0, HashSet::new()),
            |(na, mut a), (nb, mut b)| {
                if a.len() < b.len() {
                    std::mem::swap(&mut a, &mut b);
                }
                a.extend(b);
                (na + nb, a)
            },
        );
    if included.is_empty() {
        log::warn!("empty seed set for {rf} in {window}");
    }
    FieldCorpus {
        rf,
        window,
        n_seed_authors: included.len(),
        n_papers,
        references,
        seed_hash: seed_set_hash(included.iter().map(|p| p.auid.as_str())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CandidateRefs {
    pub n_papers: usize,
    pub references: HashSet<ReferenceId>,
}

pub fn candidate_reference_set(profile: &AuthorProfile, window: TimeWindow) -> CandidateRefs {
    let mut out = CandidateRefs::default();
    for p in profile.publications.iter().filter(|p| window.contains(p.year)) {
        out.n_papers += 1;
        out.references.extend(p.references.iter().cloned());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapResult {
    pub n_papers: usize,
    pub n_cited: usize,
    pub n_shared: usize,
    pub ratio: f64,
    pub degenerate: bool,
}

impl OverlapResult {
    /// Shared share in percent, rounded half-up to one decimal.
    pub fn percent(&self) -> Tenths {
        Tenths::of_ratio(self.n_shared as u64, self.n_cited as u64)
    }

    pub fn evidence(&self) -> BcEvidence {
        BcEvidence {
            n_papers: self.n_papers,
            n_cited: self.n_cited,
            n_shared: self.n_shared,
            ratio: self.ratio,
            degenerate: self.degenerate,
        }
    }
}

pub fn overlap(candidate: &CandidateRefs, corpus: &FieldCorpus) -> OverlapResult {
    let (small, large) = if candidate.references.len() <= corpus.references.len() {
        (&candidate.references, &corpus.references)
    } else {
        (&corpus.references, &candidate.references)
    };
    let n_shared = small.iter().filter(|r| large.contains(*r)).count();
    let n_cited = candidate.references.len();
    let degenerate = n_cited == 0;
    OverlapResult {
        n_papers: candidate.n_papers,
        n_cited,
        n_shared,
        ratio: if degenerate {
            0.0
        } else {
            n_shared as f64 / n_cited as f64
        },
        degenerate,
    }
}

/// `yes` iff the ratio reaches the threshold; degenerate results are `no`.
pub fn bc_classify(result: &OverlapResult, threshold: f64) -> Verdict {
    if result.degenerate {
        return Verdict::No;
    }
    Verdict::from_bool(result.ratio >= threshold)
}

/// On-disk cache of field corpora, one text file per (rf, window, seed set).
///
/// File layout (UTF-8, `\n` line ends):
///
/// ```text
/// lead-corpus 1
/// rf 09/E3
/// window 2016:2023
/// seed_hash <64 hex chars>
/// n_seed_authors 271
/// n_papers 12912
/// n_references 232934
/// <reference>        one per line, sorted bytewise, n_references lines
/// ```
#[derive(Debug, Clone)]
pub struct CorpusCache {
    dir: PathBuf,
}

const CACHE_MAGIC: &str = "lead-corpus 1";

impl CorpusCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CorpusCache { dir: dir.into() }
    }

    pub fn path_for(&self, rf: RFCode, window: TimeWindow, seed_hash: &str) -> PathBuf {
        let rf = rf.to_string().replace('/', "_");
        self.dir.join(format!(
            "corpus_{rf}_{}-{}_{}.txt",
            window.start_year,
            window.end_year,
            &seed_hash[..16.min(seed_hash.len())]
        ))
    }

    pub fn load(&self, rf: RFCode, window: TimeWindow, seed_hash: &str) -> Result<Option<FieldCorpus>> {
        let path = self.path_for(rf, window, seed_hash);
        if !path.exists() {
            return Ok(None);
        }
        let corpus = read_corpus_file(&path)?;
        if corpus.rf != rf || corpus.window != window || corpus.seed_hash != seed_hash {
            return Err(Error::Cache {
                path,
                message: "header does not match the requested key".into(),
            });
        }
        Ok(Some(corpus))
    }

    pub fn store(&self, corpus: &FieldCorpus) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.path_for(corpus.rf, corpus.window, &corpus.seed_hash);
        write_corpus_file(&path, corpus)?;
        Ok(path)
    }
}

pub fn write_corpus_file(path: &Path, corpus: &FieldCorpus) -> Result<()> {
    let io = |e| Error::io(path, e);
    let tmp = path.with_extension("tmp");
    let mut w = BufWriter::new(std::fs::File::create(&tmp).map_err(io)?);
    let mut refs: Vec<&str> = corpus.references.iter().map(ReferenceId::as_str).collect();
    refs.sort_unstable();
    writeln!(w, "{CACHE_MAGIC}").map_err(io)?;
    writeln!(w, "rf {}", corpus.rf).map_err(io)?;
    writeln!(w, "window {}", corpus.window).map_err(io)?;
    writeln!(w, "seed_hash {}", corpus.seed_hash).map_err(io)?;
    writeln!(w, "n_seed_authors {}", corpus.n_seed_authors).map_err(io)?;
    writeln!(w, "n_papers {}", corpus.n_papers).map_err(io)?;
    writeln!(w, "n_references {}", refs.len()).map_err(io)?;
    for r in refs {
        writeln!(w, "{r}").map_err(io)?;
    }
    w.flush().map_err(io)?;
    drop(w);
    std::fs::rename(&tmp, path).map_err(io)
}

pub fn read_corpus_file(path: &Path) -> Result<FieldCorpus> {
    let bad = |message: String| Error::Cache {
        path: path.to_path_buf(),
        message,
    };
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let mut next = |key: &str| -> Result<String> {
        let line = lines
            .next()
            .ok_or_else(|| bad(format!("missing {key} line")))?
            .map_err(|e| Error::io(path, e))?;
        if key.is_empty() {
            return Ok(line);
        }
        line.strip_prefix(key)
            .and_then(|v| v.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| bad(format!("expected {key:?}, found {line:?}")))
    };
    if next("")? != CACHE_MAGIC {
        return Err(bad("bad magic line".into()));
    }
    let rf = parse_rf(&next("rf")?).map_err(|e| bad(e.to_string()))?;
    let window: TimeWindow = next("window")?.parse().map_err(|e: Error| bad(e.to_string()))?;
    let seed_hash = next("seed_hash")?;
    let num = |v: String| v.parse::<usize>().map_err(|e| bad(e.to_string()));
    let n_seed_authors = num(next("n_seed_authors")?)?;
    let n_papers = num(next("n_papers")?)?;
    let n_references = num(next("n_references")?)?;
    let mut references = HashSet::with_capacity(n_references);
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        let id = crate::model::canonicalize_reference(&line).map_err(|e| bad(e.to_string()))?;
        references.insert(id);
    }
    if references.len() != n_references {
        return Err(bad(format!(
            "header says {n_references} references, body has {}",
            references.len()
        )));
    }
    Ok(FieldCorpus {
        rf,
        window,
        n_seed_authors,
        n_papers,
        references,
        seed_hash,
    })
}
