//! The four-level academic taxonomy: Scientific Area (SA) → Recruitment Field
//! Group (RFG) → Recruitment Field (RF) → Academic Discipline (AD).
//!
//! RF codes have the shape `AA/GF`: a two-digit area in `01..=14`, one
//! uppercase group letter and one field digit. AD codes such as `ING-INF/01`
//! are opaque keys.
//!
//! The table itself is data, loaded from a CSV with one row per RF:
//!
//! ```text
//! rf_code,rf_label,rfg_label,sa_label,ad_codes
//! 09/E3,Electronics,Electronic Engineering,Industrial and Information Engineering,ING-INF/01=Electronics
//! ```
//!
//! `ad_codes` is a semicolon-separated list; each entry is either a bare AD
//! code or `CODE=Label`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RFCode {
    area: u8,
    group: u8,
    field: u8,
}

impl RFCode {
    /// Two-digit area id, e.g. `"09"`.
    pub fn area(&self) -> String {
        format!("{:02}", self.area)
    }

    pub fn area_number(&self) -> u8 {
        self.area
    }

    pub fn group_letter(&self) -> char {
        self.group as char
    }

    pub fn field_digit(&self) -> char {
        self.field as char
    }

    /// `"AA/G"`.
    pub fn group_code(&self) -> String {
        format!("{:02}/{}", self.area, self.group as char)
    }
}

pub fn parse_rf(code: &str) -> Result<RFCode> {
    let bad = || Error::InvalidRFCode(code.to_string());
    let b = code.as_bytes();
    if b.len() != 5 || b[2] != b'/' {
        return Err(bad());
    }
    if !(b[0].is_ascii_digit() && b[1].is_ascii_digit()) {
        return Err(bad());
    }
    let area = (b[0] - b'0') * 10 + (b[1] - b'0');
    if !(1..=14).contains(&area) {
        return Err(bad());
    }
    if !b[3].is_ascii_uppercase() || !b[4].is_ascii_digit() {
        return Err(bad());
    }
    Ok(RFCode {
        area,
        group: b[3],
        field: b[4],
    })
}

impl FromStr for RFCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_rf(s)
    }
}

impl TryFrom<String> for RFCode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        parse_rf(&s)
    }
}

impl From<RFCode> for String {
    fn from(c: RFCode) -> String {
        c.to_string()
    }
}

impl fmt::Display for RFCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}/{}{}", self.area, self.group as char, self.field as char)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    ScientificArea,
    RecruitmentFieldGroup,
    RecruitmentField,
    AcademicDiscipline,
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sa" | "area" | "scientific_area" => Ok(Granularity::ScientificArea),
            "rfg" | "group" | "recruitment_field_group" => Ok(Granularity::RecruitmentFieldGroup),
            "rf" | "field" | "recruitment_field" => Ok(Granularity::RecruitmentField),
            "ad" | "discipline" | "academic_discipline" => Ok(Granularity::AcademicDiscipline),
            _ => Err(Error::Param(format!(
                "unknown granularity {s:?} (expected sa, rfg, rf or ad)"
            ))),
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::ScientificArea => "sa",
            Granularity::RecruitmentFieldGroup => "rfg",
            Granularity::RecruitmentField => "rf",
            Granularity::AcademicDiscipline => "ad",
        })
    }
}

/// Class id of `code` at `level`. The AD level needs the discipline code and returns it unchanged.
pub fn project(code: &RFCode, level: Granularity, ad: Option<&str>) -> Result<String> {
    match level {
        Granularity::ScientificArea => Ok(code.area()),
        Granularity::RecruitmentFieldGroup => Ok(code.group_code()),
        Granularity::RecruitmentField => Ok(code.to_string()),
        Granularity::AcademicDiscipline => match ad {
            Some(ad) if !ad.trim().is_empty() => Ok(ad.to_string()),
            _ => Err(Error::MissingAD),
        },
    }
}

/// Per-area group/field/discipline counts of the official taxonomy.
pub const OFFICIAL_AREA_COUNTS: [(&str, usize, usize, usize); 14] = [
    ("01", 2, 7, 10),
    ("02", 3, 6, 8),
    ("03", 4, 8, 12),
    ("04", 1, 4, 12),
    ("05", 10, 14, 19),
    ("06", 10, 27, 50),
    ("07", 7, 14, 30),
    ("08", 5, 12, 22),
    ("09", 7, 21, 42),
    ("10", 11, 21, 77),
    ("11", 4, 18, 34),
    ("12", 7, 16, 21),
    ("13", 3, 15, 19),
    ("14", 3, 7, 14),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct AreaCounts {
    pub groups: usize,
    pub fields: usize,
    pub disciplines: usize,
}

#[derive(Debug, Clone, Default)]
pub struct TaxonomyTable {
    pub sa_labels: BTreeMap<String, String>,
    pub rfg_labels: BTreeMap<String, String>,
    pub rf_labels: BTreeMap<String, String>,
    pub ad_to_rf: BTreeMap<String, RFCode>,
    pub ad_labels: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
struct TaxonomyRow {
    rf_code: String,
    rf_label: String,
    rfg_label: String,
    sa_label: String,
    #[serde(default)]
    ad_codes: String,
}

impl TaxonomyTable {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    pub fn from_reader<R: Read>(reader: R, origin: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut table = TaxonomyTable::default();
        for (i, row) in rdr.deserialize::<TaxonomyRow>().enumerate() {
            let line = i as u64 + 2;
            let row = row.map_err(|e| Error::schema(origin, line, e.to_string()))?;
            let rf = parse_rf(&row.rf_code).map_err(|e| Error::schema(origin, line, e.to_string()))?;
            if table.rf_labels.insert(rf.to_string(), row.rf_label).is_some() {
                return Err(Error::schema(origin, line, format!("duplicate rf_code {rf}")));
            }
            table.rfg_labels.entry(rf.group_code()).or_insert(row.rfg_label);
            table.sa_labels.entry(rf.area()).or_insert(row.sa_label);
            for entry in row.ad_codes.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                let (code, label) = match entry.split_once('=') {
                    Some((c, l)) => (c.trim(), Some(l.trim())),
                    None => (entry, None),
                };
                if let Some(prev) = table.ad_to_rf.insert(code.to_string(), rf) {
                    if prev != rf {
                        return Err(Error::schema(
                            origin,
                            line,
                            format!("AD {code} mapped to both {prev} and {rf}"),
                        ));
                    }
                }
                if let Some(label) = label {
                    table.ad_labels.insert(code.to_string(), label.to_string());
                }
            }
        }
        Ok(table)
    }

    pub fn sa_label(&self, area: &str) -> Option<&str> {
        self.sa_labels.get(area).map(String::as_str)
    }

    pub fn rfg_label(&self, group: &str) -> Option<&str> {
        self.rfg_labels.get(group).map(String::as_str)
    }

    pub fn rf_label(&self, rf: &RFCode) -> Option<&str> {
        self.rf_labels.get(&rf.to_string()).map(String::as_str)
    }

    pub fn ad_label(&self, ad: &str) -> Option<&str> {
        self.ad_labels.get(ad).map(String::as_str)
    }

    /// Label for a class id produced by [`project`] at `level`.
    pub fn class_label(&self, class_id: &str, level: Granularity) -> Option<&str> {
        match level {
            Granularity::ScientificArea => self.sa_labels.get(class_id),
            Granularity::RecruitmentFieldGroup => self.rfg_labels.get(class_id),
            Granularity::RecruitmentField => self.rf_labels.get(class_id),
            Granularity::AcademicDiscipline => self.ad_labels.get(class_id),
        }
        .map(String::as_str)
    }

    pub fn area_counts(&self) -> BTreeMap<String, AreaCounts> {
        let mut out: BTreeMap<String, AreaCounts> = BTreeMap::new();
        for group in self.rfg_labels.keys() {
            out.entry(group[..2].to_string()).or_default().groups += 1;
        }
        for rf in self.rf_labels.keys() {
            out.entry(rf[..2].to_string()).or_default().fields += 1;
        }
        for rf in self.ad_to_rf.values() {
            out.entry(rf.area()).or_default().disciplines += 1;
        }
        out
    }

    /// Compares per-area counts with [`OFFICIAL_AREA_COUNTS`]; returns one message per mismatching area.
    pub fn official_count_mismatches(&self) -> Vec<String> {
        let counts = self.area_counts();
        OFFICIAL_AREA_COUNTS
            .iter()
            .filter_map(|&(area, groups, fields, disciplines)| {
                let got = counts.get(area).copied().unwrap_or_default();
                let want = AreaCounts {
                    groups,
                    fields,
                    disciplines,
                };
                (got != want).then(|| format!("area {area}: expected {want:?}, found {got:?}"))
            })
            .collect()
    }
}
