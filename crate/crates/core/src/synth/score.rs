use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::World;
use crate::error::{Error, Result};
use crate::hashing::{HashedId, PhoneHasher};
use crate::kinclass::{KinAssignment, Slot};
use crate::registry::{Node, Registry, Sex};

/// Relation kinds stored in the relations file: `relative` is `person`'s
/// mother, father, daughter, son, sibling or spouse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Mother,
    Father,
    Daughter,
    Son,
    Sibling,
    Spouse,
}

impl Relation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Relation::Mother => "mother",
            Relation::Father => "father",
            Relation::Daughter => "daughter",
            Relation::Son => "son",
            Relation::Sibling => "sibling",
            Relation::Spouse => "spouse",
        }
    }
}

impl FromStr for Relation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mother" => Relation::Mother,
            "father" => Relation::Father,
            "daughter" => Relation::Daughter,
            "son" => Relation::Son,
            "sibling" => Relation::Sibling,
            "spouse" => Relation::Spouse,
            _ => return Err(Error::Config(format!("unknown relation {s:?}"))),
        })
    }
}

/// What an alter truly is to an ego.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrueRelation {
    Mother,
    Father,
    Daughter,
    Son,
    MaternalAunt,
    MaternalUncle,
    PaternalAunt,
    PaternalUncle,
    Niece,
    Nephew,
    Sibling,
    Spouse,
    Grandparent,
    Grandchild,
    Unrelated,
}

impl TrueRelation {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrueRelation::Mother => "mother",
            TrueRelation::Father => "father",
            TrueRelation::Daughter => "daughter",
            TrueRelation::Son => "son",
            TrueRelation::MaternalAunt => "maternal_aunt",
            TrueRelation::MaternalUncle => "maternal_uncle",
            TrueRelation::PaternalAunt => "paternal_aunt",
            TrueRelation::PaternalUncle => "paternal_uncle",
            TrueRelation::Niece => "niece",
            TrueRelation::Nephew => "nephew",
            TrueRelation::Sibling => "sibling",
            TrueRelation::Spouse => "spouse",
            TrueRelation::Grandparent => "grandparent",
            TrueRelation::Grandchild => "grandchild",
            TrueRelation::Unrelated => "unrelated",
        }
    }

    /// The slot's own relation plus its accepted misidentification.
    pub fn in_class(self, slot: Slot) -> bool {
        matches!(
            (slot, self),
            (Slot::Mother, TrueRelation::Mother | TrueRelation::MaternalAunt)
                | (Slot::Father, TrueRelation::Father | TrueRelation::PaternalUncle)
                | (Slot::Daughter, TrueRelation::Daughter | TrueRelation::Niece)
                | (Slot::Son, TrueRelation::Son | TrueRelation::Nephew)
        )
    }
}

impl fmt::Display for TrueRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn slot_relation(slot: Slot) -> TrueRelation {
    match slot {
        Slot::Mother => TrueRelation::Mother,
        Slot::Father => TrueRelation::Father,
        Slot::Daughter => TrueRelation::Daughter,
        Slot::Son => TrueRelation::Son,
    }
}

fn slot_alter_sex(slot: Slot) -> Sex {
    match slot {
        Slot::Mother | Slot::Daughter => Sex::Female,
        Slot::Father | Slot::Son => Sex::Male,
    }
}

/// Pedigree keyed by hashed phone. Only phone holders appear.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    pub mother: FxHashMap<HashedId, HashedId>,
    pub father: FxHashMap<HashedId, HashedId>,
    pub children: FxHashMap<HashedId, Vec<HashedId>>,
    pub siblings: FxHashMap<HashedId, Vec<HashedId>>,
    pub spouse: FxHashMap<HashedId, HashedId>,
    /// Sex of every phone-holding child, whether covered or not.
    pub child_sex: FxHashMap<HashedId, Sex>,
}

impl GroundTruth {
    pub fn from_world(world: &World, hasher: &PhoneHasher) -> Result<Self> {
        let ids: Vec<Option<HashedId>> = world
            .people
            .iter()
            .map(|p| {
                p.has_phone
                    .then(|| hasher.hash_phone(&p.phone()))
                    .transpose()
                    .map_err(|e| Error::Contract(format!("generated phone rejected: {e:?}")))
            })
            .collect::<Result<_>>()?;
        let mut rows = Vec::new();
        for p in &world.people {
            let Some(me) = ids[p.id as usize] else { continue };
            let mut add = |rel, other: Option<u32>| {
                if let Some(o) = other.and_then(|o| ids[o as usize]) {
                    rows.push((me, rel, o));
                }
            };
            add(Relation::Mother, p.mother);
            add(Relation::Father, p.father);
            add(Relation::Spouse, p.spouse);
            for &c in &p.children {
                let rel = match world.person(c).sex {
                    Sex::Female => Relation::Daughter,
                    Sex::Male => Relation::Son,
                };
                add(rel, Some(c));
            }
            for s in world.siblings(p.id) {
                add(Relation::Sibling, Some(s));
            }
        }
        Ok(Self::from_relations(rows))
    }

    pub fn from_relations<I: IntoIterator<Item = (HashedId, Relation, HashedId)>>(rows: I) -> Self {
        let mut t = GroundTruth::default();
        for (person, rel, relative) in rows {
            match rel {
                Relation::Mother => {
                    t.mother.insert(person, relative);
                }
                Relation::Father => {
                    t.father.insert(person, relative);
                }
                Relation::Spouse => {
                    t.spouse.insert(person, relative);
                }
                Relation::Daughter | Relation::Son => {
                    let sex = if rel == Relation::Daughter { Sex::Female } else { Sex::Male };
                    t.child_sex.insert(relative, sex);
                    t.children.entry(person).or_default().push(relative);
                }
                Relation::Sibling => t.siblings.entry(person).or_default().push(relative),
            }
        }
        for v in t.children.values_mut().chain(t.siblings.values_mut()) {
            v.sort();
            v.dedup();
        }
        t
    }

    /// Relation rows sorted by `(person, relation, relative)`.
    pub fn relations(&self) -> Vec<(HashedId, Relation, HashedId)> {
        let mut rows = Vec::new();
        for (&p, &r) in &self.mother {
            rows.push((p, Relation::Mother, r));
        }
        for (&p, &r) in &self.father {
            rows.push((p, Relation::Father, r));
        }
        for (&p, &r) in &self.spouse {
            rows.push((p, Relation::Spouse, r));
        }
        for (&p, v) in &self.children {
            rows.extend(v.iter().map(|&r| {
                let rel = match self.child_sex.get(&r) {
                    Some(Sex::Male) => Relation::Son,
                    _ => Relation::Daughter,
                };
                (p, rel, r)
            }));
        }
        for (&p, v) in &self.siblings {
            rows.extend(v.iter().map(|&r| (p, Relation::Sibling, r)));
        }
        rows.sort();
        rows
    }

    fn siblings_of(&self, p: &HashedId) -> &[HashedId] {
        self.siblings.get(p).map_or(&[], Vec::as_slice)
    }

    fn parents_of(&self, p: &HashedId) -> impl Iterator<Item = HashedId> + '_ {
        self.mother.get(p).into_iter().chain(self.father.get(p)).copied()
    }

    /// Names `alter`'s relation to `ego`; `alter_sex` picks between the
    /// gendered forms.
    pub fn relation_between(&self, ego: &HashedId, alter: &HashedId, alter_sex: Sex) -> TrueRelation {
        let female = alter_sex == Sex::Female;
        if self.mother.get(ego) == Some(alter) {
            return TrueRelation::Mother;
        }
        if self.father.get(ego) == Some(alter) {
            return TrueRelation::Father;
        }
        if self.parents_of(alter).any(|p| p == *ego) {
            return if female { TrueRelation::Daughter } else { TrueRelation::Son };
        }
        if self.spouse.get(ego) == Some(alter) {
            return TrueRelation::Spouse;
        }
        if self.siblings_of(ego).contains(alter) {
            return TrueRelation::Sibling;
        }
        if let Some(m) = self.mother.get(ego) {
            if self.siblings_of(m).contains(alter) {
                return if female { TrueRelation::MaternalAunt } else { TrueRelation::MaternalUncle };
            }
        }
        if let Some(f) = self.father.get(ego) {
            if self.siblings_of(f).contains(alter) {
                return if female { TrueRelation::PaternalAunt } else { TrueRelation::PaternalUncle };
            }
        }
        if self.parents_of(alter).any(|p| self.siblings_of(ego).contains(&p)) {
            return if female { TrueRelation::Niece } else { TrueRelation::Nephew };
        }
        if self.parents_of(ego).any(|p| self.parents_of(&p).any(|g| g == *alter)) {
            return TrueRelation::Grandparent;
        }
        if self.parents_of(alter).any(|p| self.parents_of(&p).any(|g| g == *ego)) {
            return TrueRelation::Grandchild;
        }
        TrueRelation::Unrelated
    }

    /// True `(ego, alter)` pairs for a slot: child to mother or father, or
    /// parent to daughter or son.
    fn true_pairs(&self, slot: Slot) -> Vec<(HashedId, HashedId)> {
        let mut out: Vec<(HashedId, HashedId)> = match slot {
            Slot::Mother => self.mother.iter().map(|(&c, &m)| (c, m)).collect(),
            Slot::Father => self.father.iter().map(|(&c, &f)| (c, f)).collect(),
            Slot::Daughter | Slot::Son => {
                let want = slot_alter_sex(slot);
                self.children
                    .iter()
                    .flat_map(|(&p, cs)| cs.iter().map(move |&c| (p, c)))
                    .filter(|(_, c)| self.child_sex.get(c) == Some(&want))
                    .collect()
            }
        };
        out.sort();
        out
    }
}

pub const RELATIONS_HEADER: [&str; 3] = ["person", "relation", "relative"];

pub fn write_relations<W: Write>(out: W, truth: &GroundTruth, delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
    w.write_record(RELATIONS_HEADER)?;
    for (p, rel, r) in truth.relations() {
        w.write_record([p.to_string(), rel.as_str().to_owned(), r.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_relations<R: Read>(input: R, delimiter: u8) -> Result<GroundTruth> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).from_reader(input);
    let mut rows = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let bad = |message: String| Error::Parse {
            line: i as u64 + 2,
            message,
        };
        if row.len() != 3 {
            return Err(bad(format!("expected 3 columns, got {}", row.len())));
        }
        let p: HashedId = row[0].parse().map_err(|e: Error| bad(e.to_string()))?;
        let rel: Relation = row[1].parse().map_err(|e: Error| bad(e.to_string()))?;
        let r: HashedId = row[2].parse().map_err(|e: Error| bad(e.to_string()))?;
        rows.push((p, rel, r));
    }
    Ok(GroundTruth::from_relations(rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotScore {
    pub slot: Slot,
    pub kin_labeled: u64,
    /// Kin-labeled assignments whose alter is the slot's true relative.
    pub correct: u64,
    pub precision: Option<f64>,
    /// Wrong kin labels by the alter's true relation.
    pub misidentified: BTreeMap<TrueRelation, u64>,
    /// Wrong kin labels outside the slot's accepted misidentification.
    pub out_of_class: u64,
    /// True pairs where both phones exist.
    pub true_pairs: u64,
    /// True pairs where both phones are labeled subscribers.
    pub covered_pairs: u64,
    pub recovered: u64,
    pub recall_covered: Option<f64>,
    pub recall_population: Option<f64>,
    pub both_covered_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub slots: Vec<SlotScore>,
}

impl ScoreReport {
    pub fn slot(&self, slot: Slot) -> &SlotScore {
        &self.slots[slot as usize]
    }

    pub fn out_of_class_total(&self) -> u64 {
        self.slots.iter().map(|s| s.out_of_class).sum()
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Scores kin labels against the pedigree. Coverage is read from the
/// registry: a phone counts as covered when it is a labeled node.
pub fn score_classifier(assignments: &[KinAssignment], truth: &GroundTruth, registry: &Registry) -> ScoreReport {
    let covered = |p: &HashedId| matches!(registry.lookup(p), Node::Labeled(_));
    let slots = Slot::ALL
        .iter()
        .map(|&slot| {
            let mut s = SlotScore {
                slot,
                kin_labeled: 0,
                correct: 0,
                precision: None,
                misidentified: BTreeMap::new(),
                out_of_class: 0,
                true_pairs: 0,
                covered_pairs: 0,
                recovered: 0,
                recall_covered: None,
                recall_population: None,
                both_covered_fraction: None,
            };
            let mut kin_pairs = Vec::new();
            for a in assignments.iter().filter(|a| a.slot == slot && a.category.is_kin()) {
                s.kin_labeled += 1;
                kin_pairs.push((a.ego, a.alter));
                let rel = truth.relation_between(&a.ego, &a.alter, slot_alter_sex(slot));
                if rel == slot_relation(slot) {
                    s.correct += 1;
                } else {
                    *s.misidentified.entry(rel).or_default() += 1;
                    if !rel.in_class(slot) {
                        s.out_of_class += 1;
                    }
                }
            }
            kin_pairs.sort();
            let pairs = truth.true_pairs(slot);
            s.true_pairs = pairs.len() as u64;
            for (ego, alter) in &pairs {
                if covered(ego) && covered(alter) {
                    s.covered_pairs += 1;
                    if kin_pairs.binary_search(&(*ego, *alter)).is_ok() {
                        s.recovered += 1;
                    }
                }
            }
            s.precision = ratio(s.correct, s.kin_labeled);
            s.recall_covered = ratio(s.recovered, s.covered_pairs);
            s.recall_population = ratio(s.recovered, s.true_pairs);
            s.both_covered_fraction = ratio(s.covered_pairs, s.true_pairs);
            s
        })
        .collect();
    ScoreReport { slots }
}

pub const SCORE_HEADER: [&str; 12] = [
    "slot",
    "kin_labeled",
    "correct",
    "precision",
    "out_of_class",
    "true_pairs",
    "covered_pairs",
    "recovered",
    "recall_covered",
    "recall_population",
    "both_covered_fraction",
    "misidentified",
];

pub fn write_score<W: Write>(out: W, report: &ScoreReport, delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
    w.write_record(SCORE_HEADER)?;
    let opt = |x: Option<f64>| x.map_or_else(|| "NA".to_owned(), crate::stats::fmt_real);
    for s in &report.slots {
        let mis: Vec<String> = s.misidentified.iter().map(|(r, n)| format!("{r}:{n}")).collect();
        w.write_record([
            s.slot.to_string(),
            s.kin_labeled.to_string(),
            s.correct.to_string(),
            opt(s.precision),
            s.out_of_class.to_string(),
            s.true_pairs.to_string(),
            s.covered_pairs.to_string(),
            s.recovered.to_string(),
            opt(s.recall_covered),
            opt(s.recall_population),
            opt(s.both_covered_fraction),
            mis.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}
