//! Fixture datasets shared by the CLI test targets.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use lead_core::ingest::{load_gold, GoldColumns};
use lead_core::synthkit::{generate, SynthParams};

pub const SAMPLE_TAXONOMY: &str = include_str!("../fixtures/taxonomy.csv");

/// One worked example: a registry record, one candidate profile and the
/// reference counts the candidate must show against its field corpus.
pub struct Case {
    pub record_id: &'static str,
    pub auid: &'static str,
    pub papers: usize,
    pub cited: usize,
    pub shared: usize,
    pub correct: bool,
}

/// Record 14 and 15 share a name, field and university; 49 has two profiles.
pub const CASES: [Case; 4] = [
    Case {
        record_id: "14",
        auid: "7103169675",
        papers: 130,
        cited: 2393,
        shared: 2206,
        correct: true,
    },
    Case {
        record_id: "15",
        auid: "57194011914",
        papers: 26,
        cited: 470,
        shared: 27,
        correct: false,
    },
    Case {
        record_id: "49",
        auid: "6603258864",
        papers: 14,
        cited: 597,
        shared: 23,
        correct: true,
    },
    Case {
        record_id: "49",
        auid: "57208832161",
        papers: 1,
        cited: 60,
        shared: 1,
        correct: true,
    },
];

struct Topic {
    titles: [&'static str; 4],
    keywords: [&'static str; 3],
}

const ELECTRONICS: Topic = Topic {
    titles: [
        "Low-power analog front-end for wearable sensors",
        "Mixed-signal readout circuits for MEMS microphones",
        "Energy harvesting interfaces for IoT nodes",
        "Noise analysis of switched-capacitor amplifiers",
    ],
    keywords: ["analog circuits", "low power", "sensor interfaces"],
};

const INFORMATICS: Topic = Topic {
    titles: [
        "Consistency protocols for geo-replicated stores",
        "Scheduling serverless functions at the edge",
        "Gossip-based membership in large clusters",
        "Fault-tolerant stream processing",
    ],
    keywords: ["distributed systems", "cloud computing", "fault tolerance"],
};

const LEGAL_HISTORY: Topic = Topic {
    titles: [
        "Statutes and customs in late medieval communes",
        "Canon law sources in early modern courts",
        "The reception of Roman law in the Italian universities",
        "Notarial practice and legal culture",
    ],
    keywords: ["legal history", "medieval law", "ius commune"],
};

fn refs(tag: &str, range: std::ops::Range<usize>) -> Vec<String> {
    range.map(|i| format!("10.5555/{tag}.{i}")).collect()
}

/// Spreads `refs` round-robin over `papers` papers dated 2016..=2023.
#[allow(clippy::too_many_arguments)]
fn profile(
    auid: &str,
    given: &str,
    surname: &str,
    city: &str,
    topic: &Topic,
    papers: usize,
    refs: &[String],
    coauthors: &[&str],
) -> Value {
    let pubs: Vec<Value> = (0..papers)
        .map(|k| {
            let cited: Vec<&String> = refs.iter().skip(k).step_by(papers).collect();
            json!({
                "pub_id": format!("2-s2.0-{auid}{k:04}"),
                "year": 2016 + (k % 8) as i32,
                "title": format!("{}, study {}", topic.titles[k % 4], k + 1),
                "keywords": topic.keywords,
                "abstract": format!("We report on {}.", topic.keywords[k % 3]),
                "references": cited,
                "coauthor_auids": if k == 0 { coauthors.to_vec() } else { Vec::new() },
            })
        })
        .collect();
    json!({
        "auid": auid,
        "given_name": given,
        "surname": surname,
        "initials": format!("{}.", &given[..1]),
        "full_name": format!("{surname}, {given}"),
        "affiliations": [format!("University of {city}")],
        "publications": pubs,
    })
}

/// Writes the worked-example dataset into `dir` and returns the mock file
/// path, whose responses answer "yes" for every candidate pair.
pub fn write_paper_cases(dir: &Path) -> PathBuf {
    std::fs::create_dir_all(dir).unwrap();
    let [c14, c15, c49a, c49b] = &CASES;
    let seed_e3 = "9000000001";
    let seed_b1 = "9000000002";
    let seed_h2 = "9000000003";

    // Shared references live in the field corpora; the rest are private to the candidate.
    let cand_14 = [refs("e3", 0..c14.shared), refs("p14", 0..c14.cited - c14.shared)].concat();
    let cand_15 = [
        refs("e3", 5000..5000 + c15.shared),
        refs("b1", 0..c15.cited - c15.shared),
    ]
    .concat();
    let cand_49a = [refs("h2", 0..c49a.shared), refs("p49a", 0..c49a.cited - c49a.shared)].concat();
    let cand_49b = [
        refs("h2", 100..100 + c49b.shared),
        refs("p49b", 0..c49b.cited - c49b.shared),
    ]
    .concat();
    let corpus_e3 = [
        refs("e3", 0..c14.shared),
        refs("e3", 5000..5000 + c15.shared),
        refs("e3", 9000..9400),
    ]
    .concat();
    let corpus_b1 = [refs("b1", 0..c15.cited - c15.shared), refs("b1", 9000..9300)].concat();
    let corpus_h2 = [
        refs("h2", 0..c49a.shared),
        refs("h2", 100..100 + c49b.shared),
        refs("h2", 9000..9200),
    ]
    .concat();

    let profiles = [
        profile(
            seed_e3,
            "Giulia",
            "Ferrari",
            "Bologna",
            &ELECTRONICS,
            40,
            &corpus_e3,
            &[c14.auid],
        ),
        profile(
            seed_b1,
            "Marco",
            "Conti",
            "Bologna",
            &INFORMATICS,
            30,
            &corpus_b1,
            &[c15.auid],
        ),
        profile(
            seed_h2,
            "Paolo",
            "Greco",
            "Trieste",
            &LEGAL_HISTORY,
            20,
            &corpus_h2,
            &[c49a.auid, c49b.auid],
        ),
        profile(
            c14.auid,
            "Davide",
            "Rossi",
            "Bologna",
            &ELECTRONICS,
            c14.papers,
            &cand_14,
            &[seed_e3],
        ),
        profile(
            c15.auid,
            "Davide",
            "Rossi",
            "Bologna",
            &INFORMATICS,
            c15.papers,
            &cand_15,
            &[seed_b1],
        ),
        profile(
            c49a.auid,
            "Chiara",
            "Marino",
            "Trieste",
            &LEGAL_HISTORY,
            c49a.papers,
            &cand_49a,
            &[seed_h2],
        ),
        profile(
            c49b.auid,
            "Chiara",
            "Marino",
            "Trieste",
            &LEGAL_HISTORY,
            c49b.papers,
            &cand_49b,
            &[seed_h2],
        ),
    ];
    let mut jsonl = String::new();
    for p in &profiles {
        jsonl.push_str(&serde_json::to_string(p).unwrap());
        jsonl.push('\n');
    }
    std::fs::write(dir.join("profiles.jsonl"), jsonl).unwrap();

    let registry = "record_id,first_name,last_name,role,gender,rf,ad,university,department,year\n\
        14,DAVIDE,ROSSI,Associate Professor,Male,09/E3,ING-INF/01,Bologna,,2024\n\
        15,DAVIDE,ROSSI,Associate Professor,Male,09/E3,ING-INF/01,Bologna,,2024\n\
        49,CHIARA,MARINO,Researcher,Female,12/H2,IUS/19,Trieste,,2024\n\
        S1,GIULIA,FERRARI,Full Professor,Female,09/E3,ING-INF/01,Bologna,,2024\n\
        S2,MARCO,CONTI,Full Professor,Male,01/B1,INF/01,Bologna,,2024\n\
        S3,PAOLO,GRECO,Associate Professor,Male,12/H2,IUS/19,Trieste,,2024\n";
    std::fs::write(dir.join("registry.csv"), registry).unwrap();
    let seeds = format!("record_id,auid,rf\nS1,{seed_e3},09/E3\nS2,{seed_b1},01/B1\nS3,{seed_h2},12/H2\n");
    std::fs::write(dir.join("seeds.csv"), seeds).unwrap();

    let mut gold = String::from("record_id,first_name,last_name,rf,ad,university,auid,correct\n");
    let mut mock = String::new();
    for c in &CASES {
        let (first, last, rf, ad, uni) = if c.record_id == "49" {
            ("CHIARA", "MARINO", "12/H2", "IUS/19", "Trieste")
        } else {
            ("DAVIDE", "ROSSI", "09/E3", "ING-INF/01", "Bologna")
        };
        let _ = writeln!(
            gold,
            "{},{first},{last},{rf},{ad},{uni},{},{}",
            c.record_id,
            c.auid,
            u8::from(c.correct)
        );
        mock.push_str(&mock_line(c.record_id, c.auid, true));
    }
    std::fs::write(dir.join("gold.csv"), gold).unwrap();
    std::fs::write(dir.join("taxonomy.csv"), SAMPLE_TAXONOMY).unwrap();
    let mock_path = dir.join("mock_yes.jsonl");
    std::fs::write(&mock_path, mock).unwrap();
    mock_path
}

/// One recorded LLM reply in the fixture-client line format.
pub fn mock_line(record_id: &str, auid: &str, yes: bool) -> String {
    let answer = json!({
        "cerca_univ_id": record_id,
        "scopus_candidate_id": auid,
        "match": if yes { "yes" } else { "no" },
        "explanation": "Recorded fixture answer.",
    });
    let line = json!({"record_id": record_id, "auid": auid, "response_text": answer.to_string()});
    format!("{line}\n")
}

/// Generates a synthetic dataset into `dir` with the given RNG seed.
pub fn write_synth(dir: &Path, rng_seed: u64) {
    let params = SynthParams {
        rng_seed,
        ..SynthParams::default()
    };
    generate(&params).unwrap().write_to(dir).unwrap();
}

/// Writes a mock replying with each gold pair's label and returns its path.
pub fn write_gold_mock(dir: &Path) -> PathBuf {
    let gold = load_gold(dir.join("gold.csv"), &GoldColumns::default()).unwrap();
    let body: String = gold
        .iter()
        .map(|g| mock_line(&g.record_id, &g.auid, g.correct))
        .collect();
    let path = dir.join("mock_gold.jsonl");
    std::fs::write(&path, body).unwrap();
    path
}
