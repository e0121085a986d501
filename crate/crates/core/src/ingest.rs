//! Loaders for the registry, profile, seed, gold and pair files, and the
//! referentially checked [`Dataset`] built from them.
//!
//! Tabular inputs are UTF-8 CSV with a header row; profiles are JSON Lines.
//! Every validation failure names the file and the 1-based line.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{canonicalize_reference, AuthorProfile, CandidatePair, Publication, RegistryRecord, Seed};
use crate::taxonomy::parse_rf;

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn origin(path: &Path) -> String {
    path.display().to_string()
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader)
}

fn csv_line(err: &csv::Error, fallback: u64) -> u64 {
    err.position().map(|p| p.line()).unwrap_or(fallback)
}

fn non_empty(s: String) -> Option<String> {
    if s.is_empty() {
        None
    } else {
        Some(s)
    }
}

#[derive(Debug, Deserialize)]
struct RegistryRow {
    record_id: String,
    first_name: String,
    last_name: String,
    #[serde(default)]
    role: String,
    #[serde(default)]
    gender: String,
    rf: String,
    #[serde(default)]
    ad: String,
    university: String,
    #[serde(default)]
    department: String,
    year: i32,
}

pub fn load_registry(path: impl AsRef<Path>) -> Result<Vec<RegistryRecord>> {
    let path = path.as_ref();
    read_registry(open(path)?, &origin(path))
}

pub fn read_registry<R: Read>(reader: R, origin: &str) -> Result<Vec<RegistryRecord>> {
    let mut rdr = csv_reader(reader);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<RegistryRow>().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| Error::schema(origin, csv_line(&e, line), e.to_string()))?;
        if row.record_id.is_empty() {
            return Err(Error::schema(origin, line, "empty record_id"));
        }
        let rf = parse_rf(&row.rf).map_err(|e| Error::schema(origin, line, e.to_string()))?;
        if row.year < 2000 {
            return Err(Error::schema(origin, line, format!("year {} before 2000", row.year)));
        }
        if !seen.insert(row.record_id.clone()) {
            return Err(Error::DuplicateRecordId(row.record_id));
        }
        out.push(RegistryRecord {
            record_id: row.record_id,
            first_name: row.first_name,
            last_name: row.last_name,
            role: row.role,
            gender: non_empty(row.gender),
            rf,
            ad: row.ad,
            university: row.university,
            department: non_empty(row.department),
            year: row.year,
        });
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct RawPublication {
    pub_id: String,
    year: i32,
    #[serde(default)]
    title: String,
    #[serde(default)]
    keywords: Vec<String>,
    #[serde(default, rename = "abstract")]
    abstract_text: Option<String>,
    #[serde(default)]
    references: Vec<String>,
    #[serde(default)]
    coauthor_auids: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct RawProfile {
    auid: String,
    #[serde(default)]
    given_name: String,
    #[serde(default)]
    surname: String,
    #[serde(default)]
    initials: String,
    #[serde(default)]
    full_name: String,
    #[serde(default)]
    affiliations: Vec<String>,
    #[serde(default)]
    publications: Vec<RawPublication>,
}

fn build_profile(raw: RawProfile) -> std::result::Result<AuthorProfile, String> {
    if raw.auid.trim().is_empty() {
        return Err("empty auid".into());
    }
    let mut pub_ids = HashSet::new();
    let mut publications = Vec::with_capacity(raw.publications.len());
    for p in raw.publications {
        if !pub_ids.insert(p.pub_id.clone()) {
            return Err(format!("duplicate pub_id {:?} in profile {}", p.pub_id, raw.auid));
        }
        if p.year <= 1900 {
            return Err(format!("publication {} has year {}", p.pub_id, p.year));
        }
        let mut seen = HashSet::new();
        let mut references = Vec::with_capacity(p.references.len());
        for r in &p.references {
            let id = canonicalize_reference(r).map_err(|e| format!("publication {}: {e}", p.pub_id))?;
            if seen.insert(id.clone()) {
                references.push(id);
            }
        }
        publications.push(Publication {
            pub_id: p.pub_id,
            year: p.year,
            title: p.title,
            keywords: p.keywords,
            abstract_text: p.abstract_text.filter(|a| !a.is_empty()),
            references,
            coauthor_auids: p.coauthor_auids,
        });
    }
    publications.sort_by_key(|p| p.year);
    Ok(AuthorProfile {
        auid: raw.auid,
        given_name: raw.given_name,
        surname: raw.surname,
        initials: raw.initials,
        full_name: raw.full_name,
        affiliations: raw.affiliations,
        publications,
    })
}

pub fn load_profiles(path: impl AsRef<Path>) -> Result<Vec<AuthorProfile>> {
    let path = path.as_ref();
    read_profiles(open(path)?, &origin(path))
}

pub fn read_profiles<R: Read>(reader: R, origin: &str) -> Result<Vec<AuthorProfile>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i as u64 + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawProfile = serde_json::from_str(&line).map_err(|e| Error::schema(origin, lineno, e.to_string()))?;
        let profile = build_profile(raw).map_err(|m| Error::schema(origin, lineno, m))?;
        if !seen.insert(profile.auid.clone()) {
            return Err(Error::DuplicateAuid(profile.auid));
        }
        out.push(profile);
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct SeedRow {
    record_id: String,
    auid: String,
    rf: String,
}

pub fn load_seeds(path: impl AsRef<Path>) -> Result<Vec<Seed>> {
    let path = path.as_ref();
    read_seeds(open(path)?, &origin(path))
}

pub fn read_seeds<R: Read>(reader: R, origin: &str) -> Result<Vec<Seed>> {
    let mut rdr = csv_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<SeedRow>().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| Error::schema(origin, csv_line(&e, line), e.to_string()))?;
        let rf = parse_rf(&row.rf).map_err(|e| Error::schema(origin, line, e.to_string()))?;
        out.push(Seed {
            record_id: row.record_id,
            auid: row.auid,
            rf,
        });
    }
    Ok(out)
}

/// Column names of the gold file. Defaults follow the documented header; a
/// differently named export can be read by overriding individual names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GoldColumns {
    pub record_id: String,
    pub first_name: String,
    pub last_name: String,
    pub rf: String,
    pub ad: String,
    pub university: String,
    pub auid: String,
    pub correct: String,
}

impl Default for GoldColumns {
    fn default() -> Self {
        GoldColumns {
            record_id: "record_id".into(),
            first_name: "first_name".into(),
            last_name: "last_name".into(),
            rf: "rf".into(),
            ad: "ad".into(),
            university: "university".into(),
            auid: "auid".into(),
            correct: "correct".into(),
        }
    }
}

impl GoldColumns {
    /// Applies a `key=column` override.
    pub fn set(&mut self, key: &str, column: &str) -> Result<()> {
        let slot = match key {
            "record_id" => &mut self.record_id,
            "first_name" => &mut self.first_name,
            "last_name" => &mut self.last_name,
            "rf" => &mut self.rf,
            "ad" => &mut self.ad,
            "university" => &mut self.university,
            "auid" => &mut self.auid,
            "correct" => &mut self.correct,
            _ => return Err(Error::Param(format!("unknown gold column key {key:?}"))),
        };
        *slot = column.to_string();
        Ok(())
    }
}

/// One row of the gold standard as written in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldEntry {
    pub record_id: String,
    pub first_name: String,
    pub last_name: String,
    pub rf: crate::taxonomy::RFCode,
    pub ad: String,
    pub university: String,
    pub auid: String,
    pub correct: bool,
}

pub fn load_gold(path: impl AsRef<Path>, columns: &GoldColumns) -> Result<Vec<GoldEntry>> {
    let path = path.as_ref();
    read_gold(open(path)?, &origin(path), columns)
}

pub fn read_gold<R: Read>(reader: R, origin: &str, columns: &GoldColumns) -> Result<Vec<GoldEntry>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::schema(origin, 1, e.to_string()))?
        .clone();
    let col = |name: &str, required: bool| -> Result<Option<usize>> {
        match headers.iter().position(|h| h == name) {
            Some(i) => Ok(Some(i)),
            None if required => Err(Error::schema(origin, 1, format!("missing column {name:?}"))),
            None => Ok(None),
        }
    };
    let record_id = col(&columns.record_id, true)?.unwrap();
    let auid = col(&columns.auid, true)?.unwrap();
    let correct = col(&columns.correct, true)?.unwrap();
    let rf = col(&columns.rf, true)?.unwrap();
    let first_name = col(&columns.first_name, false)?;
    let last_name = col(&columns.last_name, false)?;
    let ad = col(&columns.ad, false)?;
    let university = col(&columns.university, false)?;

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| Error::schema(origin, csv_line(&e, line), e.to_string()))?;
        let get = |idx: Option<usize>| idx.and_then(|i| rec.get(i)).unwrap_or("").to_string();
        let correct = match rec.get(correct).unwrap_or("") {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::schema(
                    origin,
                    line,
                    format!("correct must be 0 or 1, found {other:?}"),
                ))
            }
        };
        let rf = parse_rf(rec.get(rf).unwrap_or("")).map_err(|e| Error::schema(origin, line, e.to_string()))?;
        let entry = GoldEntry {
            record_id: get(Some(record_id)),
            first_name: get(first_name),
            last_name: get(last_name),
            rf,
            ad: get(ad),
            university: get(university),
            auid: get(Some(auid)),
            correct,
        };
        if entry.record_id.is_empty() || entry.auid.is_empty() {
            return Err(Error::schema(origin, line, "empty record_id or auid"));
        }
        out.push(entry);
    }
    Ok(out)
}

/// A pair to classify, read from an arbitrary pair file (`record_id,auid[,correct]`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairEntry {
    pub record_id: String,
    pub auid: String,
    pub correct: Option<bool>,
}

pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<PairEntry>> {
    let path = path.as_ref();
    read_pairs(open(path)?, &origin(path))
}

pub fn read_pairs<R: Read>(reader: R, origin: &str) -> Result<Vec<PairEntry>> {
    #[derive(Deserialize)]
    struct Row {
        record_id: String,
        auid: String,
        #[serde(default)]
        correct: Option<String>,
    }
    let mut rdr = csv_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|e| Error::schema(origin, csv_line(&e, line), e.to_string()))?;
        let correct = match row.correct.as_deref() {
            None | Some("") => None,
            Some("1") => Some(true),
            Some("0") => Some(false),
            Some(other) => {
                return Err(Error::schema(
                    origin,
                    line,
                    format!("correct must be 0 or 1, found {other:?}"),
                ))
            }
        };
        out.push(PairEntry {
            record_id: row.record_id,
            auid: row.auid,
            correct,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DatasetPaths {
    pub registry: PathBuf,
    pub profiles: PathBuf,
    pub seeds: PathBuf,
    pub gold: Option<PathBuf>,
}

impl DatasetPaths {
    /// The conventional file names inside one directory.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        let gold = dir.join("gold.csv");
        DatasetPaths {
            registry: dir.join("registry.csv"),
            profiles: dir.join("profiles.jsonl"),
            seeds: dir.join("seeds.csv"),
            gold: gold.exists().then_some(gold),
        }
    }
}

/// Records, profiles, seeds and gold with referential integrity checked.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub records: IndexMap<String, RegistryRecord>,
    pub profiles: IndexMap<String, AuthorProfile>,
    pub seeds: Vec<Seed>,
    pub gold: Vec<CandidatePair>,
}

impl Dataset {
    pub fn load(paths: &DatasetPaths, gold_columns: &GoldColumns) -> Result<Self> {
        let records = load_registry(&paths.registry)?;
        let profiles = load_profiles(&paths.profiles)?;
        let seeds = load_seeds(&paths.seeds)?;
        let gold = match &paths.gold {
            Some(p) => load_gold(p, gold_columns)?,
            None => Vec::new(),
        };
        Self::assemble(records, profiles, seeds, gold)
    }

    pub fn assemble(
        records: Vec<RegistryRecord>,
        profiles: Vec<AuthorProfile>,
        seeds: Vec<Seed>,
        gold: Vec<GoldEntry>,
    ) -> Result<Self> {
        let mut rec_map = IndexMap::with_capacity(records.len());
        for r in records {
            let id = r.record_id.clone();
            if rec_map.insert(id.clone(), r).is_some() {
                return Err(Error::DuplicateRecordId(id));
            }
        }
        let mut prof_map = IndexMap::with_capacity(profiles.len());
        for p in profiles {
            let id = p.auid.clone();
            if prof_map.insert(id.clone(), p).is_some() {
                return Err(Error::DuplicateAuid(id));
            }
        }
        for s in &seeds {
            if !rec_map.contains_key(&s.record_id) {
                return Err(Error::Dangling {
                    kind: "record_id",
                    id: s.record_id.clone(),
                    context: "seeds".into(),
                });
            }
            if !prof_map.contains_key(&s.auid) {
                return Err(Error::Dangling {
                    kind: "auid",
                    id: s.auid.clone(),
                    context: "seeds".into(),
                });
            }
        }
        let mut seen = HashSet::new();
        let mut pairs = Vec::with_capacity(gold.len());
        for g in gold {
            let Some(record) = rec_map.get(&g.record_id) else {
                return Err(Error::Dangling {
                    kind: "record_id",
                    id: g.record_id,
                    context: "gold".into(),
                });
            };
            if !prof_map.contains_key(&g.auid) {
                return Err(Error::Dangling {
                    kind: "auid",
                    id: g.auid,
                    context: "gold".into(),
                });
            }
            if !seen.insert((g.record_id.clone(), g.auid.clone())) {
                return Err(Error::DuplicateGoldPair {
                    record_id: g.record_id,
                    auid: g.auid,
                });
            }
            pairs.push(CandidatePair {
                record: record.clone(),
                auid: g.auid,
                gold: Some(g.correct),
            });
        }
        Ok(Dataset {
            records: rec_map,
            profiles: prof_map,
            seeds,
            gold: pairs,
        })
    }

    /// Resolves pair-file entries against the loaded records and profiles.
    pub fn resolve_pairs(&self, entries: &[PairEntry]) -> Result<Vec<CandidatePair>> {
        let mut seen = HashSet::new();
        entries
            .iter()
            .map(|e| {
                let record = self.records.get(&e.record_id).ok_or_else(|| Error::Dangling {
                    kind: "record_id",
                    id: e.record_id.clone(),
                    context: "pairs".into(),
                })?;
                if !self.profiles.contains_key(&e.auid) {
                    return Err(Error::Dangling {
                        kind: "auid",
                        id: e.auid.clone(),
                        context: "pairs".into(),
                    });
                }
                if !seen.insert((e.record_id.as_str(), e.auid.as_str())) {
                    return Err(Error::DuplicateGoldPair {
                        record_id: e.record_id.clone(),
                        auid: e.auid.clone(),
                    });
                }
                Ok(CandidatePair {
                    record: record.clone(),
                    auid: e.auid.clone(),
                    gold: e.correct,
                })
            })
            .collect()
    }

    /// Seed auids grouped by recruitment field, in seed-file order.
    pub fn seeds_by_rf(&self) -> BTreeMap<crate::taxonomy::RFCode, Vec<&str>> {
        let mut out: BTreeMap<_, Vec<&str>> = BTreeMap::new();
        for s in &self.seeds {
            let v = out.entry(s.rf).or_default();
            if !v.contains(&s.auid.as_str()) {
                v.push(&s.auid);
            }
        }
        out
    }

    pub fn summary(&self) -> DatasetSummary {
        let publications: usize = self.profiles.values().map(|p| p.publications.len()).sum();
        let mut rf_counts: HashMap<String, usize> = HashMap::new();
        for s in &self.seeds {
            *rf_counts.entry(s.rf.to_string()).or_default() += 1;
        }
        DatasetSummary {
            records: self.records.len(),
            profiles: self.profiles.len(),
            publications,
            seeds: self.seeds.len(),
            seed_fields: rf_counts.len(),
            gold_pairs: self.gold.len(),
            gold_positive: self.gold.iter().filter(|p| p.gold == Some(true)).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetSummary {
    pub records: usize,
    pub profiles: usize,
    pub publications: usize,
    pub seeds: usize,
    pub seed_fields: usize,
    pub gold_pairs: usize,
    pub gold_positive: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    const REG_HEADER: &str = "record_id,first_name,last_name,role,gender,rf,ad,university,department,year\n";

    #[test]
    fn registry_table4_row() {
        let csv = format!(
            "{REG_HEADER}14,DAVIDE,ROSSI,Associate Professor,Male,09/E3,ING-INF/01,Bologna,\"Electrical, Electronic and Information Engineering\",2022\n"
        );
        let recs = read_registry(csv.as_bytes(), "registry.csv").unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(r.record_id, "14");
        assert_eq!(r.rf.to_string(), "09/E3");
        assert_eq!(r.university, "Bologna");
        assert_eq!(r.year, 2022);
        assert_eq!(
            r.department.as_deref(),
            Some("Electrical, Electronic and Information Engineering")
        );
    }

    #[test]
    fn registry_header_only() {
        assert!(read_registry(REG_HEADER.as_bytes(), "r").unwrap().is_empty());
    }

    #[test]
    fn registry_bad_rf_reports_line() {
        let csv = format!("{REG_HEADER}1,A,B,R,,09/E3,X,U,,2022\n2,A,B,R,,9/E3,X,U,,2022\n");
        match read_registry(csv.as_bytes(), "r") {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn registry_rejects_old_year_and_duplicates() {
        let csv = format!("{REG_HEADER}1,A,B,R,,09/E3,X,U,,1999\n");
        assert!(matches!(read_registry(csv.as_bytes(), "r"), Err(Error::Schema { .. })));
        let csv = format!("{REG_HEADER}1,A,B,R,,09/E3,X,U,,2022\n1,A,B,R,,09/E3,X,U,,2022\n");
        assert!(matches!(
            read_registry(csv.as_bytes(), "r"),
            Err(Error::DuplicateRecordId(_))
        ));
    }

    #[test]
    fn profiles_sorted_and_deduplicated() {
        let line = r#"{"auid":"1","given_name":"A","surname":"B","initials":"A.","full_name":"A B","affiliations":["X"],"publications":[{"pub_id":"p2","year":2021,"title":"T2","references":["R1"," r1 ","r2"]},{"pub_id":"p1","year":2017,"title":"T1","keywords":["k"],"references":[]}]}"#;
        let ps = read_profiles(line.as_bytes(), "p").unwrap();
        let p = &ps[0];
        assert_eq!(p.publications[0].pub_id, "p1");
        assert_eq!(p.publications[1].references.len(), 2);
        assert_eq!(p.publications[1].references[0].as_str(), "r1");
        assert!(p.publications[0].references.is_empty());
    }

    #[test]
    fn profile_without_publications() {
        let line = r#"{"auid":"1","given_name":"A","surname":"B","initials":"A.","full_name":"A B","affiliations":[],"publications":[]}"#;
        let ps = read_profiles(line.as_bytes(), "p").unwrap();
        assert!(ps[0].publications.is_empty());
    }

    #[test]
    fn duplicate_auid_rejected() {
        let line = r#"{"auid":"7103169675","given_name":"A","surname":"B","initials":"","full_name":"","affiliations":[],"publications":[]}"#;
        let text = format!("{line}\n{line}\n");
        assert!(matches!(read_profiles(text.as_bytes(), "p"), Err(Error::DuplicateAuid(a)) if a == "7103169675"));
    }

    #[test]
    fn bad_profile_line_reports_number() {
        let line = r#"{"auid":"1","publications":[]}"#;
        let text = format!("{line}\nnot json\n");
        match read_profiles(text.as_bytes(), "p") {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    const GOLD_HEADER: &str = "record_id,first_name,last_name,rf,ad,university,auid,correct\n";

    #[test]
    fn gold_labels() {
        let csv = format!("{GOLD_HEADER}14,DAVIDE,ROSSI,09/E3,ING-INF/01,Bologna,7103169675,1\n15,DAVIDE,ROSSI,09/E3,ING-INF/01,Bologna,57194011914,0\n");
        let g = read_gold(csv.as_bytes(), "g", &GoldColumns::default()).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g[0].correct);
        assert!(!g[1].correct);
    }

    #[test]
    fn gold_rejects_non_binary() {
        let csv = format!("{GOLD_HEADER}14,D,R,09/E3,X,B,1,2\n");
        assert!(matches!(
            read_gold(csv.as_bytes(), "g", &GoldColumns::default()),
            Err(Error::Schema { line: 2, .. })
        ));
    }

    #[test]
    fn gold_606_split() {
        let mut csv = String::from(GOLD_HEADER);
        for i in 0..606 {
            let correct = u8::from(i < 394);
            csv.push_str(&format!("{i},N,S,06/D1,MED/09,U,{},{correct}\n", 1000 + i));
        }
        let g = read_gold(csv.as_bytes(), "g", &GoldColumns::default()).unwrap();
        assert_eq!(g.len(), 606);
        assert_eq!(g.iter().filter(|e| e.correct).count(), 394);
    }

    #[test]
    fn gold_column_mapping() {
        let csv = "id,name,surname,RF,AD,uni,AUID,ok\n14,D,R,09/E3,X,B,77,1\n";
        let mut cols = GoldColumns::default();
        for (k, v) in [
            ("record_id", "id"),
            ("first_name", "name"),
            ("last_name", "surname"),
            ("rf", "RF"),
            ("ad", "AD"),
            ("university", "uni"),
            ("auid", "AUID"),
            ("correct", "ok"),
        ] {
            cols.set(k, v).unwrap();
        }
        let g = read_gold(csv.as_bytes(), "g", &cols).unwrap();
        assert_eq!(g[0].auid, "77");
        assert!(cols.set("nope", "x").is_err());
    }

    fn profile(auid: &str) -> AuthorProfile {
        AuthorProfile {
            auid: auid.into(),
            given_name: String::new(),
            surname: String::new(),
            initials: String::new(),
            full_name: String::new(),
            affiliations: vec![],
            publications: vec![],
        }
    }

    fn record(id: &str) -> RegistryRecord {
        read_registry(format!("{REG_HEADER}{id},A,B,R,,09/E3,X,U,,2022\n").as_bytes(), "r")
            .unwrap()
            .remove(0)
    }

    fn gold(record_id: &str, auid: &str) -> GoldEntry {
        GoldEntry {
            record_id: record_id.into(),
            first_name: String::new(),
            last_name: String::new(),
            rf: parse_rf("09/E3").unwrap(),
            ad: String::new(),
            university: String::new(),
            auid: auid.into(),
            correct: true,
        }
    }

    #[test]
    fn assemble_checks_references() {
        let seeds = vec![Seed {
            record_id: "1".into(),
            auid: "missing".into(),
            rf: parse_rf("09/E3").unwrap(),
        }];
        let err = Dataset::assemble(vec![record("1")], vec![profile("a")], seeds, vec![]).unwrap_err();
        assert!(matches!(err, Error::Dangling { kind: "auid", .. }));

        let err = Dataset::assemble(vec![record("1")], vec![profile("a")], vec![], vec![gold("2", "a")]).unwrap_err();
        assert!(matches!(err, Error::Dangling { kind: "record_id", .. }));

        let err = Dataset::assemble(
            vec![record("1")],
            vec![profile("a")],
            vec![],
            vec![gold("1", "a"), gold("1", "a")],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateGoldPair { .. }));

        let ds = Dataset::assemble(vec![record("1")], vec![profile("a")], vec![], vec![gold("1", "a")]).unwrap();
        assert_eq!(ds.gold.len(), 1);
        assert_eq!(ds.gold[0].gold, Some(true));
    }

    #[test]
    fn pairs_file() {
        let p = read_pairs("record_id,auid,correct\n1,a,\n1,b,1\n".as_bytes(), "p").unwrap();
        assert_eq!(p[0].correct, None);
        assert_eq!(p[1].correct, Some(true));
        let p = read_pairs("record_id,auid\n1,a\n".as_bytes(), "p").unwrap();
        assert_eq!(p[0].correct, None);
    }
}
