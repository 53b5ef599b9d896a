//! Kin vs. quasi-kin classification of an ego's cross-generational
//! contacts.
//!
//! For each of the four slots the ego's labeled alters go through three
//! filters in order: a demographic filter (alter sex and age offset), a
//! frequency filter (the single most-called candidate) and a surname
//! filter on the two-surname tokens. The selected alter is kin when the
//! surname rule holds and quasi-kin otherwise.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::ops::RangeInclusive;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ego_network, Alter, CallGraph, EgoNetwork, EgoSkip, MetricTuple};
use crate::hashing::HashedId;
use crate::registry::{Sex, SubscriberRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Mother,
    Father,
    Daughter,
    Son,
}

impl Slot {
    pub const ALL: [Slot; 4] = [Slot::Mother, Slot::Father, Slot::Daughter, Slot::Son];

    pub fn as_str(&self) -> &'static str {
        match self {
            Slot::Mother => "mother",
            Slot::Father => "father",
            Slot::Daughter => "daughter",
            Slot::Son => "son",
        }
    }

    pub fn category(&self, kin: bool) -> RelationCategory {
        use RelationCategory::*;
        match (self, kin) {
            (Slot::Mother, true) => Mother,
            (Slot::Mother, false) => QuasiMother,
            (Slot::Father, true) => Father,
            (Slot::Father, false) => QuasiFather,
            (Slot::Daughter, true) => Daughter,
            (Slot::Daughter, false) => QuasiDaughter,
            (Slot::Son, true) => Son,
            (Slot::Son, false) => QuasiSon,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Slot {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Slot::ALL
            .into_iter()
            .find(|x| x.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Contract(format!("unknown slot {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationCategory {
    Mother,
    QuasiMother,
    Father,
    QuasiFather,
    Daughter,
    QuasiDaughter,
    Son,
    QuasiSon,
}

impl RelationCategory {
    pub const ALL: [RelationCategory; 8] = [
        RelationCategory::Mother,
        RelationCategory::QuasiMother,
        RelationCategory::Father,
        RelationCategory::QuasiFather,
        RelationCategory::Daughter,
        RelationCategory::QuasiDaughter,
        RelationCategory::Son,
        RelationCategory::QuasiSon,
    ];

    pub fn is_kin(&self) -> bool {
        use RelationCategory::*;
        matches!(self, Mother | Father | Daughter | Son)
    }

    pub fn slot(&self) -> Slot {
        use RelationCategory::*;
        match self {
            Mother | QuasiMother => Slot::Mother,
            Father | QuasiFather => Slot::Father,
            Daughter | QuasiDaughter => Slot::Daughter,
            Son | QuasiSon => Slot::Son,
        }
    }

    pub fn as_str(&self) -> &'static str {
        use RelationCategory::*;
        match self {
            Mother => "Mother",
            QuasiMother => "QuasiMother",
            Father => "Father",
            QuasiFather => "QuasiFather",
            Daughter => "Daughter",
            QuasiDaughter => "QuasiDaughter",
            Son => "Son",
            QuasiSon => "QuasiSon",
        }
    }
}

impl fmt::Display for RelationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationCategory {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RelationCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| Error::Contract(format!("unknown category {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surname {
    /// First last name, inherited from the father.
    Paternal,
    /// Second last name, the mother's first last name.
    Maternal,
}

impl Surname {
    fn of(self, r: &SubscriberRecord) -> Option<&str> {
        match self {
            Surname::Paternal => r.ln_p.as_deref(),
            Surname::Maternal => r.ln_m.as_deref(),
        }
    }
}

/// Which ego surname must equal which alter surname.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurnameRule {
    pub ego: Surname,
    pub alter: Surname,
}

/// Demographic window and surname rule of one slot, split by ego sex where
/// the definition depends on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotSpec {
    pub slot: Slot,
    pub alter_sex: Sex,
    /// Inclusive bounds on `alter_age - ego_age` for a female ego.
    pub offset_female_ego: RangeInclusive<i32>,
    pub offset_male_ego: RangeInclusive<i32>,
    pub rule_female_ego: SurnameRule,
    pub rule_male_ego: SurnameRule,
}

impl SlotSpec {
    pub fn offset_range(&self, ego_sex: Sex) -> &RangeInclusive<i32> {
        match ego_sex {
            Sex::Female => &self.offset_female_ego,
            Sex::Male => &self.offset_male_ego,
        }
    }

    pub fn rule(&self, ego_sex: Sex) -> SurnameRule {
        match ego_sex {
            Sex::Female => self.rule_female_ego,
            Sex::Male => self.rule_male_ego,
        }
    }
}

/// Age windows of the four slots, in years.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgeBounds {
    /// Mother: alter this many years older, inclusive.
    pub mother_older: [i32; 2],
    pub father_older: [i32; 2],
    /// Children: alter this many years younger than a female ego.
    pub child_younger_female_ego: [i32; 2],
    pub child_younger_male_ego: [i32; 2],
}

impl Default for AgeBounds {
    fn default() -> Self {
        AgeBounds {
            mother_older: [15, 40],
            father_older: [17, 42],
            child_younger_female_ego: [15, 40],
            child_younger_male_ego: [17, 42],
        }
    }
}

impl AgeBounds {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [
            ("mother_older", self.mother_older),
            ("father_older", self.father_older),
            ("child_younger_female_ego", self.child_younger_female_ego),
            ("child_younger_male_ego", self.child_younger_male_ego),
        ] {
            if lo > hi {
                return Err(Error::Config(format!("age range {name}: min {lo} > max {hi}")));
            }
            if lo < 0 {
                return Err(Error::Config(format!("age range {name}: negative bound {lo}")));
            }
        }
        Ok(())
    }
}

/// The four slot definitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotSpecs {
    specs: [SlotSpec; 4],
}

impl Default for SlotSpecs {
    fn default() -> Self {
        SlotSpecs::from_bounds(&AgeBounds::default()).expect("default bounds are valid")
    }
}

impl SlotSpecs {
    pub fn from_bounds(b: &AgeBounds) -> Result<Self> {
        b.validate()?;
        let older = |r: [i32; 2]| r[0]..=r[1];
        let younger = |r: [i32; 2]| -r[1]..=-r[0];
        let same = |ego, alter| SurnameRule { ego, alter };
        let child = |slot, alter_sex| SlotSpec {
            slot,
            alter_sex,
            offset_female_ego: younger(b.child_younger_female_ego),
            offset_male_ego: younger(b.child_younger_male_ego),
            rule_female_ego: same(Surname::Paternal, Surname::Maternal),
            rule_male_ego: same(Surname::Paternal, Surname::Paternal),
        };
        Ok(SlotSpecs {
            specs: [
                SlotSpec {
                    slot: Slot::Mother,
                    alter_sex: Sex::Female,
                    offset_female_ego: older(b.mother_older),
                    offset_male_ego: older(b.mother_older),
                    rule_female_ego: same(Surname::Maternal, Surname::Paternal),
                    rule_male_ego: same(Surname::Maternal, Surname::Paternal),
                },
                SlotSpec {
                    slot: Slot::Father,
                    alter_sex: Sex::Male,
                    offset_female_ego: older(b.father_older),
                    offset_male_ego: older(b.father_older),
                    rule_female_ego: same(Surname::Paternal, Surname::Paternal),
                    rule_male_ego: same(Surname::Paternal, Surname::Paternal),
                },
                child(Slot::Daughter, Sex::Female),
                child(Slot::Son, Sex::Male),
            ],
        })
    }

    pub fn get(&self, slot: Slot) -> &SlotSpec {
        &self.specs[slot as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = &SlotSpec> {
        self.specs.iter()
    }
}

/// Labeled alters of matching sex whose age offset lies inside the slot
/// window. Grey alters never pass.
pub fn demographic_filter<'a, 'g>(
    ego: &SubscriberRecord,
    alters: &'a [Alter<'g>],
    spec: &SlotSpec,
) -> Vec<&'a Alter<'g>> {
    let (Some(ego_sex), Some(ego_age)) = (ego.sex, ego.age) else {
        return Vec::new();
    };
    let range = spec.offset_range(ego_sex);
    alters
        .iter()
        .filter(|a| {
            a.node.labeled().is_some_and(|r| {
                r.sex == Some(spec.alter_sex)
                    && r.age.is_some_and(|age| range.contains(&(age as i32 - ego_age as i32)))
            })
        })
        .collect()
}

/// The most-called candidate; ties go to more talk seconds, then to the
/// smaller id.
pub fn frequency_select<'a, 'g>(candidates: &[&'a Alter<'g>]) -> Option<&'a Alter<'g>> {
    candidates.iter().copied().max_by(|x, y| {
        (x.metrics.frequency, x.metrics.total_sec)
            .cmp(&(y.metrics.frequency, y.metrics.total_sec))
            .then_with(|| y.phone.cmp(&x.phone))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurnameVerdict {
    Kin,
    Quasi,
    /// A surname needed by the rule is missing on either side.
    Unresolvable,
}

pub fn surname_filter(ego: &SubscriberRecord, alter: &SubscriberRecord, spec: &SlotSpec) -> SurnameVerdict {
    let Some(ego_sex) = ego.sex else {
        return SurnameVerdict::Unresolvable;
    };
    let rule = spec.rule(ego_sex);
    match (rule.ego.of(ego), rule.alter.of(alter)) {
        (Some(e), Some(a)) if e == a => SurnameVerdict::Kin,
        (Some(_), Some(_)) => SurnameVerdict::Quasi,
        _ => SurnameVerdict::Unresolvable,
    }
}

/// A classified slot of one ego.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinAssignment {
    pub ego: HashedId,
    pub ego_sex: Sex,
    pub ego_age: u8,
    pub slot: Slot,
    pub alter: HashedId,
    pub category: RelationCategory,
    pub metrics: MetricTuple,
    pub candidate_pool_size: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EgoClassification {
    pub assignments: Vec<KinAssignment>,
    pub unresolvable: Vec<Slot>,
    /// Slots whose selected alter was already selected for another slot.
    pub overlaps: usize,
}

pub fn classify_ego(net: &EgoNetwork<'_>, specs: &SlotSpecs) -> EgoClassification {
    let ego = net.ego;
    let mut out = EgoClassification::default();
    let (Some(ego_sex), Some(ego_age)) = (ego.sex, ego.age) else {
        return out;
    };
    for spec in specs.iter() {
        let pool = demographic_filter(ego, &net.alters, spec);
        let Some(chosen) = frequency_select(&pool) else {
            continue;
        };
        let alter = chosen.node.labeled().expect("demographic filter keeps labeled alters");
        let kin = match surname_filter(ego, alter, spec) {
            SurnameVerdict::Kin => true,
            SurnameVerdict::Quasi => false,
            SurnameVerdict::Unresolvable => {
                out.unresolvable.push(spec.slot);
                continue;
            }
        };
        if out.assignments.iter().any(|a| a.alter == chosen.phone) {
            out.overlaps += 1;
        }
        out.assignments.push(KinAssignment {
            ego: ego.phone,
            ego_sex,
            ego_age,
            slot: spec.slot,
            alter: chosen.phone,
            category: spec.slot.category(kin),
            metrics: chosen.metrics,
            candidate_pool_size: pool.len(),
        });
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub egos_classified: u64,
    pub grey_skipped: u64,
    pub unresolvable_slots: u64,
    pub overlaps: u64,
    pub by_category: BTreeMap<RelationCategory, u64>,
}

/// Classifies every labeled node of the graph. Output is ordered by ego id,
/// then slot, regardless of worker count.
pub fn classify_graph(graph: &CallGraph, specs: &SlotSpecs, workers: usize) -> Result<(Vec<KinAssignment>, ClassifyReport)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        graph
            .nodes()
            .par_iter()
            .map(|ego| match ego_network(graph, ego) {
                Ok(net) => Ok(classify_ego(&net, specs)),
                Err(skip) => Err(skip),
            })
            .collect()
    });
    let mut report = ClassifyReport::default();
    let mut all = Vec::new();
    for r in results {
        match r {
            Ok(c) => {
                report.egos_classified += 1;
                report.unresolvable_slots += c.unresolvable.len() as u64;
                report.overlaps += c.overlaps as u64;
                for a in &c.assignments {
                    *report.by_category.entry(a.category).or_insert(0) += 1;
                }
                all.extend(c.assignments);
            }
            Err(EgoSkip::Grey) => report.grey_skipped += 1,
            Err(EgoSkip::NoEdges) => {}
        }
    }
    Ok((all, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfirmationRow {
    pub ego_age: u8,
    pub ego_sex: Sex,
    pub slot: Slot,
    pub kin: u64,
    pub quasi: u64,
    pub ratio: f64,
}

/// Share of frequency-age-sex candidates confirmed as kin by the surname
/// filter, per (ego age, ego sex, slot). Empty groups do not appear.
pub fn confirmation_ratio(assignments: &[KinAssignment]) -> Vec<ConfirmationRow> {
    let mut groups: BTreeMap<(u8, Sex, Slot), (u64, u64)> = BTreeMap::new();
    for a in assignments {
        let g = groups.entry((a.ego_age, a.ego_sex, a.slot)).or_default();
        if a.category.is_kin() {
            g.0 += 1;
        } else {
            g.1 += 1;
        }
    }
    groups
        .into_iter()
        .map(|((ego_age, ego_sex, slot), (kin, quasi))| ConfirmationRow {
            ego_age,
            ego_sex,
            slot,
            kin,
            quasi,
            ratio: kin as f64 / (kin + quasi) as f64,
        })
        .collect()
}

pub const ASSIGNMENT_HEADER: [&str; 12] = [
    "ego",
    "ego_sex",
    "ego_age",
    "slot",
    "alter",
    "category",
    "candidate_pool_size",
    "frequency",
    "frac_of_time",
    "out_call_frac",
    "call_length",
    "total_sec",
];

pub fn write_assignments<W: Write>(out: W, assignments: &[KinAssignment], delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
    w.write_record(ASSIGNMENT_HEADER)?;
    for a in assignments {
        let m = &a.metrics;
        w.write_record([
            a.ego.to_string(),
            a.ego_sex.to_string(),
            a.ego_age.to_string(),
            a.slot.to_string(),
            a.alter.to_string(),
            a.category.to_string(),
            a.candidate_pool_size.to_string(),
            m.frequency.to_string(),
            crate::stats::fmt_real(m.frac_of_time),
            crate::stats::fmt_real(m.out_call_frac),
            crate::stats::fmt_real(m.call_length),
            m.total_sec.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_assignments<R: Read>(input: R, delimiter: u8) -> Result<Vec<KinAssignment>> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).from_reader(input);
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i as u64 + 2;
        let bad = |message: String| Error::Parse { line, message };
        if row.len() != ASSIGNMENT_HEADER.len() {
            return Err(bad(format!("expected {} columns, got {}", ASSIGNMENT_HEADER.len(), row.len())));
        }
        let num = |k: usize| -> Result<f64> {
            row[k].parse::<f64>().map_err(|e| bad(format!("{}: {e}", ASSIGNMENT_HEADER[k])))
        };
        let int = |k: usize| -> Result<u64> {
            row[k].parse::<u64>().map_err(|e| bad(format!("{}: {e}", ASSIGNMENT_HEADER[k])))
        };
        let category: RelationCategory = row[5].parse().map_err(|e: Error| bad(e.to_string()))?;
        let slot: Slot = row[3].parse().map_err(|e: Error| bad(e.to_string()))?;
        if category.slot() != slot {
            return Err(bad(format!("category {category} does not belong to slot {slot}")));
        }
        out.push(KinAssignment {
            ego: row[0].parse().map_err(|e: Error| bad(e.to_string()))?,
            ego_sex: row[1].parse().map_err(|e: Error| bad(e.to_string()))?,
            ego_age: int(2)?.try_into().map_err(|_| bad("ego_age out of range".into()))?,
            slot,
            alter: row[4].parse().map_err(|e: Error| bad(e.to_string()))?,
            category,
            candidate_pool_size: int(6)? as usize,
            metrics: MetricTuple {
                frequency: int(7)?,
                frac_of_time: num(8)?,
                out_call_frac: num(9)?,
                call_length: num(10)?,
                total_sec: int(11)?,
            },
        });
    }
    Ok(out)
}
