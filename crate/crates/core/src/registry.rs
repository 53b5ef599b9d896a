//! Subscriber metadata: loading, family-contract resolution and lookup.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::HashedId;

pub const MAX_AGE: u8 = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Female,
    Male,
}

impl Sex {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sex::Female => "female",
            Sex::Male => "male",
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "female" | "f" => Ok(Sex::Female),
            "male" | "m" => Ok(Sex::Male),
            other => Err(Error::Contract(format!("unknown sex {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Contract {
    Individual,
    Family,
}

impl Contract {
    pub fn as_str(&self) -> &'static str {
        match self {
            Contract::Individual => "individual",
            Contract::Family => "family",
        }
    }
}

impl FromStr for Contract {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "individual" => Ok(Contract::Individual),
            "family" => Ok(Contract::Family),
            other => Err(Error::Contract(format!("unknown contract type {other:?}"))),
        }
    }
}

/// A registry row. Metadata (`ln_p`, `ln_m`, `sex`, `age`) is either fully
/// present (a labeled node) or fully absent (a grey node).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubscriberRecord {
    pub phone: HashedId,
    pub ln_p: Option<String>,
    pub ln_m: Option<String>,
    pub sex: Option<Sex>,
    pub age: Option<u8>,
    pub owner_id: String,
    pub contract: Contract,
    pub contract_start: Option<NaiveDate>,
}

impl SubscriberRecord {
    pub fn is_labeled(&self) -> bool {
        self.ln_p.is_some() && self.ln_m.is_some() && self.sex.is_some() && self.age.is_some()
    }

    fn has_any_metadata(&self) -> bool {
        self.ln_p.is_some() || self.ln_m.is_some() || self.sex.is_some() || self.age.is_some()
    }

    pub fn null_metadata(&mut self) {
        self.ln_p = None;
        self.ln_m = None;
        self.sex = None;
        self.age = None;
    }
}

/// Result of a registry lookup. Grey is a value, not an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node<'a> {
    Labeled(&'a SubscriberRecord),
    Grey,
}

impl<'a> Node<'a> {
    pub fn labeled(self) -> Option<&'a SubscriberRecord> {
        match self {
            Node::Labeled(r) => Some(r),
            Node::Grey => None,
        }
    }

    pub fn is_grey(&self) -> bool {
        matches!(self, Node::Grey)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub family_groups: u64,
    pub nulled: u64,
    /// Groups whose earliest start date was shared by several phones.
    pub ties: u64,
    /// Family phones without a start date; they never win a group that
    /// has a dated phone.
    pub missing_start: u64,
}

/// Keeps metadata only on the phone with the earliest contract start in
/// each family-contract owner group; every other phone of the group is
/// nulled. Ties go to the smallest hash. Individual contracts pass through.
pub fn resolve_family_contracts(
    mut records: Vec<SubscriberRecord>,
) -> (Vec<SubscriberRecord>, ResolutionReport) {
    let mut report = ResolutionReport::default();
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        if r.contract == Contract::Family {
            groups.entry(r.owner_id.as_str()).or_default().push(i);
        }
    }
    let mut to_null = Vec::new();
    for members in groups.values() {
        report.family_groups += 1;
        report.missing_start += members
            .iter()
            .filter(|&&i| records[i].contract_start.is_none())
            .count() as u64;
        // None sorts last: dated phones always beat undated ones
        let key = |i: usize| {
            let r = &records[i];
            (r.contract_start.is_none(), r.contract_start, r.phone)
        };
        let winner = *members.iter().min_by_key(|&&i| key(i)).expect("non-empty group");
        let best_date = (records[winner].contract_start.is_none(), records[winner].contract_start);
        let tied = members
            .iter()
            .filter(|&&i| (records[i].contract_start.is_none(), records[i].contract_start) == best_date)
            .count();
        if tied > 1 {
            report.ties += 1;
        }
        to_null.extend(members.iter().copied().filter(|&i| i != winner));
    }
    for i in to_null {
        if records[i].has_any_metadata() {
            report.nulled += 1;
        }
        records[i].null_metadata();
    }
    (records, report)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryReport {
    pub records: u64,
    pub labeled: u64,
    /// Rows with some but not all metadata fields, coerced to grey.
    pub partial_coerced: u64,
    /// Rows with an age above the plausible maximum, coerced to grey.
    pub age_coerced: u64,
    pub duplicate_phones: u64,
}

/// Read-only phone → subscriber index.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    by_phone: FxHashMap<HashedId, SubscriberRecord>,
}

impl Registry {
    /// Builds the index, coercing partial or implausible metadata to grey.
    /// When a phone appears twice the first row wins.
    pub fn from_records(records: Vec<SubscriberRecord>) -> (Self, RegistryReport) {
        let mut report = RegistryReport::default();
        let mut by_phone = FxHashMap::default();
        for mut r in records {
            report.records += 1;
            if r.has_any_metadata() && !r.is_labeled() {
                report.partial_coerced += 1;
                r.null_metadata();
            }
            if r.age.is_some_and(|a| a > MAX_AGE) {
                report.age_coerced += 1;
                r.null_metadata();
            }
            if by_phone.contains_key(&r.phone) {
                report.duplicate_phones += 1;
                continue;
            }
            if r.is_labeled() {
                report.labeled += 1;
            }
            by_phone.insert(r.phone, r);
        }
        (Registry { by_phone }, report)
    }

    pub fn lookup(&self, phone: &HashedId) -> Node<'_> {
        match self.by_phone.get(phone) {
            Some(r) if r.is_labeled() => Node::Labeled(r),
            _ => Node::Grey,
        }
    }

    pub fn len(&self) -> usize {
        self.by_phone.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_phone.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &SubscriberRecord> {
        self.by_phone.values()
    }

    /// Records ordered by phone.
    pub fn sorted_records(&self) -> Vec<&SubscriberRecord> {
        let mut v: Vec<_> = self.by_phone.values().collect();
        v.sort_by_key(|r| r.phone);
        v
    }
}

pub const REGISTRY_HEADER: [&str; 8] = [
    "phone",
    "ln_p",
    "ln_m",
    "sex",
    "age",
    "owner_id",
    "contract",
    "contract_start_date",
];

const NULL: &str = "NULL";

fn opt_field(s: &str) -> Option<&str> {
    let s = s.trim();
    (!s.is_empty() && s != NULL).then_some(s)
}

/// Reads a registry file. `NULL` (or an empty cell) denotes null.
pub fn read_registry<R: Read>(input: R, delimiter: u8) -> Result<Vec<SubscriberRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .from_reader(input);
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i as u64 + 2;
        let bad = |message: String| Error::Parse { line, message };
        if row.len() != REGISTRY_HEADER.len() {
            return Err(bad(format!("expected 8 columns, got {}", row.len())));
        }
        let phone: HashedId = row[0].parse().map_err(|e: Error| bad(e.to_string()))?;
        let sex = opt_field(&row[3])
            .map(str::parse::<Sex>)
            .transpose()
            .map_err(|e| bad(e.to_string()))?;
        let age = opt_field(&row[4])
            .map(|a| a.parse::<u8>().map_err(|e| bad(format!("age {a:?}: {e}"))))
            .transpose()?;
        let contract = row[6].parse().map_err(|e: Error| bad(e.to_string()))?;
        let contract_start = opt_field(&row[7])
            .map(|d| {
                NaiveDate::parse_from_str(d, "%Y-%m-%d")
                    .map_err(|e| bad(format!("date {d:?}: {e}")))
            })
            .transpose()?;
        out.push(SubscriberRecord {
            phone,
            ln_p: opt_field(&row[1]).map(str::to_owned),
            ln_m: opt_field(&row[2]).map(str::to_owned),
            sex,
            age,
            owner_id: row[5].trim().to_owned(),
            contract,
            contract_start,
        });
    }
    Ok(out)
}

pub fn read_registry_path(path: &Path, delimiter: u8) -> Result<Vec<SubscriberRecord>> {
    let f = File::open(path).map_err(|e| Error::at(path, e))?;
    read_registry(BufReader::new(f), delimiter)
}

/// Writes records in the input format, sorted by phone.
pub fn write_registry<'a, W, I>(out: W, records: I, delimiter: u8) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a SubscriberRecord>,
{
    let mut rows: Vec<_> = records.into_iter().collect();
    rows.sort_by_key(|r| r.phone);
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(out);
    w.write_record(REGISTRY_HEADER)?;
    for r in rows {
        let or_null = |s: Option<String>| s.unwrap_or_else(|| NULL.to_owned());
        w.write_record([
            r.phone.to_string(),
            or_null(r.ln_p.clone()),
            or_null(r.ln_m.clone()),
            or_null(r.sex.map(|s| s.to_string())),
            or_null(r.age.map(|a| a.to_string())),
            r.owner_id.clone(),
            r.contract.as_str().to_owned(),
            or_null(r.contract_start.map(|d| d.format("%Y-%m-%d").to_string())),
        ])?;
    }
    w.flush()?;
    Ok(())
}
