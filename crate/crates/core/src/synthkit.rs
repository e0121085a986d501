//! Seeded synthetic datasets with planted ground truth.
//!
//! Every field owns a private, disjoint pool of reference identifiers. Each
//! author cites mostly from the pool of their home field and takes a
//! per-author noise fraction of references from the other pools instead.
//! Seed authors draw that fraction uniformly from `[0, noise]`, everyone else
//! from `[0, min(1, 3 * noise)]`, which produces true matches with low
//! overlap and homonyms with some. Homonyms are profiles from another field
//! sharing the registry academic's name. Co-authors are picked inside the
//! home field with probability 0.9.
//!
//! Output is exactly the files the ingest loaders read, plus `taxonomy.csv`
//! and a `manifest.json` with the parameters and file digests.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{canonicalize_reference, AuthorProfile, Publication, ReferenceId};
use crate::taxonomy::RFCode;

/// Probability that a co-author comes from the author's own field.
const WITHIN_FIELD_COAUTHOR: f64 = 0.9;
/// Non-seed authors draw their noise fraction from a range this many times wider.
const OTHER_NOISE_SCALE: f64 = 3.0;
const FIRST_YEAR: i32 = 2010;
const LAST_YEAR: i32 = 2023;
/// Every author has at least one paper from these years, so windows ending
/// in the last year and starting no later than the first see some output.
const RECENT_YEARS: RangeInclusive<i32> = 2020..=2023;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub rng_seed: u64,
    pub n_fields: usize,
    pub seeds_per_field: usize,
    pub candidates_per_field: usize,
    /// Probability that a candidate pair points at a homonym.
    pub homonym_rate: f64,
    pub papers_per_author: RangeInclusive<usize>,
    pub refs_per_paper: RangeInclusive<usize>,
    pub field_pool_size: usize,
    pub cross_field_ref_noise: f64,
    pub coauthor_degree: RangeInclusive<usize>,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            rng_seed: 7,
            n_fields: 8,
            seeds_per_field: 12,
            candidates_per_field: 25,
            homonym_rate: 0.35,
            papers_per_author: 2..=10,
            refs_per_paper: 8..=25,
            field_pool_size: 500,
            cross_field_ref_noise: 0.3,
            coauthor_degree: 1..=3,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Param(m));
        for (name, v) in [
            ("homonym_rate", self.homonym_rate),
            ("cross_field_ref_noise", self.cross_field_ref_noise),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        for (name, r) in [
            ("papers_per_author", &self.papers_per_author),
            ("refs_per_paper", &self.refs_per_paper),
            ("coauthor_degree", &self.coauthor_degree),
        ] {
            if r.is_empty() {
                return bad(format!("{name} range {r:?} is empty"));
            }
        }
        if *self.papers_per_author.start() == 0 {
            return bad("papers_per_author must start at 1 or more".into());
        }
        if self.n_fields == 0 || self.n_fields > MAX_FIELDS {
            return bad(format!("n_fields must lie in 1..={MAX_FIELDS}, got {}", self.n_fields));
        }
        if self.seeds_per_field == 0 {
            return bad("seeds_per_field must be at least 1".into());
        }
        if self.field_pool_size == 0 {
            return bad("field_pool_size must be at least 1".into());
        }
        let max_refs = *self.refs_per_paper.end();
        if self.cross_field_ref_noise == 0.0 && max_refs > self.field_pool_size {
            return bad(format!(
                "refs_per_paper up to {max_refs} cannot be drawn from a pool of {} without cross-field noise",
                self.field_pool_size
            ));
        }
        if max_refs > self.field_pool_size * self.n_fields {
            return bad(format!("refs_per_paper up to {max_refs} exceeds all pools combined"));
        }
        if self.n_fields < 2 && (self.homonym_rate > 0.0 || self.cross_field_ref_noise > 0.0) {
            return bad("homonyms and cross-field noise need at least two fields".into());
        }
        Ok(())
    }
}

/// Distinct `AA/GF` codes available: 14 areas × 26 letters × 9 digits.
pub const MAX_FIELDS: usize = 14 * 26 * 9;

/// Field `i` gets area `i % 14 + 1`, so the first fourteen fields sit in different areas.
pub fn field_code(i: usize) -> RFCode {
    let area = (i % 14 + 1) as u8;
    let letter = b'A' + ((i / 14) % 26) as u8;
    let digit = b'1' + ((i / (14 * 26)) % 9) as u8;
    crate::taxonomy::parse_rf(&format!("{area:02}/{}{}", letter as char, digit as char))
        .expect("generated codes are well formed")
}

pub fn field_ad(i: usize) -> String {
    format!("SYN-{:02}/{:02}", i % 100, i / 100 + 1)
}

/// File contents of one generated dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthOutput {
    pub registry: String,
    pub profiles: String,
    pub seeds: String,
    pub gold: String,
    pub taxonomy: String,
    pub manifest: String,
}

impl SynthOutput {
    pub fn files(&self) -> [(&'static str, &str); 6] {
        [
            ("registry.csv", &self.registry),
            ("profiles.jsonl", &self.profiles),
            ("seeds.csv", &self.seeds),
            ("gold.csv", &self.gold),
            ("taxonomy.csv", &self.taxonomy),
            ("manifest.json", &self.manifest),
        ]
    }

    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.files()
            .iter()
            .map(|(name, body)| {
                let path = dir.join(name);
                std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
                Ok(path)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Seed,
    Candidate,
    Homonym,
}

struct Author {
    auid: String,
    given: String,
    surname: String,
    field: usize,
    noise: f64,
    university: String,
    role: Role,
}

struct RegistryLine {
    record_id: String,
    first_name: String,
    last_name: String,
    role: &'static str,
    field: usize,
    university: String,
}

const GIVEN: [&str; 24] = [
    "Davide",
    "Anna",
    "Marco",
    "Giulia",
    "Luca",
    "Chiara",
    "Paolo",
    "Sara",
    "Andrea",
    "Elena",
    "Matteo",
    "Laura",
    "Stefano",
    "Francesca",
    "Roberto",
    "Silvia",
    "Giorgio",
    "Marta",
    "Fabio",
    "Valentina",
    "Alberto",
    "Irene",
    "Simone",
    "Paola",
];
const SURNAME: [&str; 24] = [
    "Rossi", "Russo", "Ferrari", "Esposito", "Bianchi", "Romano", "Colombo", "Ricci", "Marino", "Greco", "Bruno",
    "Gallo", "Conti", "DeLuca", "Mancini", "Costa", "Giordano", "Rizzo", "Lombardi", "Moretti", "Barbieri", "Fontana",
    "Santoro", "Mariani",
];
const UNIVERSITIES: [&str; 10] = [
    "Bologna",
    "Milano",
    "Padova",
    "Pisa",
    "Torino",
    "Napoli Federico II",
    "Roma La Sapienza",
    "Firenze",
    "Genova",
    "Trento",
];
const ROLES: [&str; 3] = ["Full Professor", "Associate Professor", "Researcher"];
const SYLLABLES: [&str; 16] = [
    "lu", "ma", "ter", "gra", "phi", "no", "vel", "sta", "qui", "dor", "ent", "ri", "bo", "sen", "tal", "cro",
];

fn field_word(field: usize, j: usize) -> String {
    let a = SYLLABLES[(field * 7 + j * 3) % SYLLABLES.len()];
    let b = SYLLABLES[(field * 5 + j * 11 + 1) % SYLLABLES.len()];
    let c = SYLLABLES[(field + j * 13 + 2) % SYLLABLES.len()];
    format!("{a}{b}{c}{field}")
}

fn reference(field: usize, i: usize) -> ReferenceId {
    canonicalize_reference(&format!("10.5555/f{field}.r{i}")).expect("non-empty")
}

fn initials(given: &str) -> String {
    given.chars().next().map(|c| format!("{c}.")).unwrap_or_default()
}

/// Generates a dataset. The same parameters always give byte-identical files.
pub fn generate(params: &SynthParams) -> Result<SynthOutput> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let seed_cap = params.cross_field_ref_noise;
    let other_cap = (OTHER_NOISE_SCALE * params.cross_field_ref_noise).min(1.0);
    let mut authors: Vec<Author> = Vec::new();
    let mut registry: Vec<RegistryLine> = Vec::new();
    let mut seeds: Vec<(String, String, usize)> = Vec::new();
    let mut gold: Vec<(usize, String, bool)> = Vec::new(); // (registry index, auid, correct)
    let mut next_auid = 57_000_000_000u64;
    let mut new_auid = || {
        next_auid += 1;
        next_auid.to_string()
    };

    let draw_noise = |rng: &mut ChaCha8Rng, cap: f64| if cap > 0.0 { rng.random_range(0.0..=cap) } else { 0.0 };

    for f in 0..params.n_fields {
        for k in 0..params.seeds_per_field {
            let record_id = format!("S{f:03}-{k:03}");
            let given = GIVEN.choose(&mut rng).unwrap().to_string();
            let surname = SURNAME.choose(&mut rng).unwrap().to_string();
            let university = UNIVERSITIES.choose(&mut rng).unwrap().to_string();
            let auid = new_auid();
            registry.push(RegistryLine {
                record_id: record_id.clone(),
                first_name: given.clone(),
                last_name: surname.clone(),
                role: ROLES.choose(&mut rng).unwrap(),
                field: f,
                university: university.clone(),
            });
            seeds.push((record_id, auid.clone(), f));
            let noise = draw_noise(&mut rng, seed_cap);
            authors.push(Author {
                auid,
                given,
                surname,
                field: f,
                noise,
                university,
                role: Role::Seed,
            });
        }
    }
    for f in 0..params.n_fields {
        for k in 0..params.candidates_per_field {
            let record_id = format!("R{f:03}-{k:03}");
            let given = GIVEN.choose(&mut rng).unwrap().to_string();
            let surname = SURNAME.choose(&mut rng).unwrap().to_string();
            let university = UNIVERSITIES.choose(&mut rng).unwrap().to_string();
            let auid = new_auid();
            registry.push(RegistryLine {
                record_id,
                first_name: given.clone(),
                last_name: surname.clone(),
                role: ROLES.choose(&mut rng).unwrap(),
                field: f,
                university: university.clone(),
            });
            let reg_index = registry.len() - 1;
            let noise = draw_noise(&mut rng, other_cap);
            authors.push(Author {
                auid: auid.clone(),
                given: given.clone(),
                surname: surname.clone(),
                field: f,
                noise,
                university: university.clone(),
                role: Role::Candidate,
            });
            if params.homonym_rate > 0.0 && rng.random_bool(params.homonym_rate) {
                let mut home = rng.random_range(0..params.n_fields - 1);
                if home >= f {
                    home += 1;
                }
                let other_uni = loop {
                    let u = UNIVERSITIES.choose(&mut rng).unwrap();
                    if *u != university {
                        break u.to_string();
                    }
                };
                let h_auid = new_auid();
                let noise = draw_noise(&mut rng, other_cap);
                authors.push(Author {
                    auid: h_auid.clone(),
                    given,
                    surname,
                    field: home,
                    noise,
                    university: other_uni,
                    role: Role::Homonym,
                });
                gold.push((reg_index, h_auid, false));
            } else {
                gold.push((reg_index, auid, true));
            }
        }
    }

    let by_field: Vec<Vec<usize>> = (0..params.n_fields)
        .map(|f| (0..authors.len()).filter(|&i| authors[i].field == f).collect())
        .collect();
    let mut next_pub = 0u64;
    let mut profiles: Vec<AuthorProfile> = Vec::with_capacity(authors.len());
    for (ai, a) in authors.iter().enumerate() {
        let n_papers = rng.random_range(params.papers_per_author.clone());
        let mut publications = Vec::with_capacity(n_papers);
        for p in 0..n_papers {
            next_pub += 1;
            let year = if p == 0 {
                rng.random_range(RECENT_YEARS)
            } else {
                rng.random_range(FIRST_YEAR..=LAST_YEAR)
            };
            let n_refs = rng.random_range(params.refs_per_paper.clone());
            let mut n_foreign = (0..n_refs).filter(|_| rng.random_bool(a.noise)).count();
            if params.n_fields < 2 {
                n_foreign = 0;
            }
            let n_foreign = n_foreign.min(params.field_pool_size * (params.n_fields - 1));
            let n_own = (n_refs - n_foreign).min(params.field_pool_size);
            let mut references: Vec<ReferenceId> = sample(&mut rng, params.field_pool_size, n_own)
                .into_iter()
                .map(|i| reference(a.field, i))
                .collect();
            if n_foreign > 0 {
                let foreign_size = params.field_pool_size * (params.n_fields - 1);
                for i in sample(&mut rng, foreign_size, n_foreign) {
                    let mut field = i / params.field_pool_size;
                    if field >= a.field {
                        field += 1;
                    }
                    references.push(reference(field, i % params.field_pool_size));
                }
            }
            let degree = rng.random_range(params.coauthor_degree.clone());
            let mut coauthors = BTreeSet::new();
            for _ in 0..degree {
                let pool: &[usize] = if rng.random_bool(WITHIN_FIELD_COAUTHOR) {
                    &by_field[a.field]
                } else {
                    &by_field[rng.random_range(0..params.n_fields)]
                };
                if let Some(&c) = pool.choose(&mut rng) {
                    if c != ai {
                        coauthors.insert(authors[c].auid.clone());
                    }
                }
            }
            let words: Vec<String> = (0..3).map(|_| field_word(a.field, rng.random_range(0..12))).collect();
            publications.push(Publication {
                pub_id: format!("2-s2.0-{next_pub:011}"),
                year,
                title: format!("On {} and {} in {}", words[0], words[1], words[2]),
                keywords: words.clone(),
                abstract_text: Some(format!(
                    "We study {} with methods from {}.",
                    words[0],
                    field_word(a.field, 12)
                )),
                references,
                coauthor_auids: coauthors.into_iter().collect(),
            });
        }
        profiles.push(AuthorProfile {
            auid: a.auid.clone(),
            given_name: a.given.clone(),
            surname: a.surname.clone(),
            initials: initials(&a.given),
            full_name: format!("{}, {}", a.surname, a.given),
            affiliations: vec![format!("University of {}", a.university)],
            publications,
        });
    }

    cover_pools(params, &authors, &mut profiles);

    for p in &mut profiles {
        p.publications.sort_by_key(|x| x.year);
    }

    let registry_csv = {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "record_id",
            "first_name",
            "last_name",
            "role",
            "gender",
            "rf",
            "ad",
            "university",
            "department",
            "year",
        ])
        .map_err(csv_err)?;
        for r in &registry {
            w.write_record([
                r.record_id.as_str(),
                &r.first_name,
                &r.last_name,
                r.role,
                "",
                &field_code(r.field).to_string(),
                &field_ad(r.field),
                &r.university,
                "",
                "2022",
            ])
            .map_err(csv_err)?;
        }
        finish_csv(w)?
    };
    let seeds_csv = {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["record_id", "auid", "rf"]).map_err(csv_err)?;
        for (r, a, f) in &seeds {
            w.write_record([r.as_str(), a, &field_code(*f).to_string()])
                .map_err(csv_err)?;
        }
        finish_csv(w)?
    };
    let gold_csv = {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "record_id",
            "first_name",
            "last_name",
            "rf",
            "ad",
            "university",
            "auid",
            "correct",
        ])
        .map_err(csv_err)?;
        for (ri, auid, correct) in &gold {
            let r = &registry[*ri];
            w.write_record([
                r.record_id.as_str(),
                &r.first_name,
                &r.last_name,
                &field_code(r.field).to_string(),
                &field_ad(r.field),
                &r.university,
                auid,
                if *correct { "1" } else { "0" },
            ])
            .map_err(csv_err)?;
        }
        finish_csv(w)?
    };
    let taxonomy_csv = {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["rf_code", "rf_label", "rfg_label", "sa_label", "ad_codes"])
            .map_err(csv_err)?;
        for f in 0..params.n_fields {
            let code = field_code(f);
            w.write_record([
                code.to_string(),
                format!("Synthetic field {f}"),
                format!("Synthetic group {}", code.group_code()),
                format!("Synthetic area {}", code.area()),
                format!("{}=Synthetic discipline {f}", field_ad(f)),
            ])
            .map_err(csv_err)?;
        }
        finish_csv(w)?
    };
    let mut profiles_jsonl = String::new();
    for p in &profiles {
        profiles_jsonl.push_str(&serde_json::to_string(p)?);
        profiles_jsonl.push('\n');
    }

    let digest = |s: &str| -> String {
        Sha256::digest(s.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    };
    let positives = gold.iter().filter(|g| g.2).count();
    let manifest = json!({
        "generator": "lead synth",
        "params": params,
        "counts": {
            "records": registry.len(),
            "profiles": profiles.len(),
            "seeds": seeds.len(),
            "gold_pairs": gold.len(),
            "gold_positive": positives,
            "homonyms": authors.iter().filter(|a| a.role == Role::Homonym).count(),
        },
        "sha256": {
            "registry.csv": digest(&registry_csv),
            "profiles.jsonl": digest(&profiles_jsonl),
            "seeds.csv": digest(&seeds_csv),
            "gold.csv": digest(&gold_csv),
            "taxonomy.csv": digest(&taxonomy_csv),
        },
    });
    Ok(SynthOutput {
        registry: registry_csv,
        profiles: profiles_jsonl,
        seeds: seeds_csv,
        gold: gold_csv,
        taxonomy: taxonomy_csv,
        manifest: serde_json::to_string_pretty(&manifest)? + "\n",
    })
}

/// Appends every pool reference no seed cites to a recent seed paper, so each
/// field corpus covers its whole pool for windows that include the recent years.
fn cover_pools(params: &SynthParams, authors: &[Author], profiles: &mut [AuthorProfile]) {
    for f in 0..params.n_fields {
        let seed_idx: Vec<usize> = (0..authors.len())
            .filter(|&i| authors[i].field == f && authors[i].role == Role::Seed)
            .collect();
        let mut cited = BTreeSet::new();
        for &i in &seed_idx {
            for p in profiles[i]
                .publications
                .iter()
                .filter(|p| RECENT_YEARS.contains(&p.year))
            {
                cited.extend(p.references.iter().cloned());
            }
        }
        let missing: Vec<ReferenceId> = (0..params.field_pool_size)
            .map(|i| reference(f, i))
            .filter(|r| !cited.contains(r))
            .collect();
        for (k, r) in missing.into_iter().enumerate() {
            let i = seed_idx[k % seed_idx.len()];
            // Paper 0 was drawn from the recent years before sorting.
            profiles[i].publications[0].references.push(r);
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Param(format!("csv encoding failed: {e}"))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Param(format!("csv encoding failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("all cells are utf-8"))
}
