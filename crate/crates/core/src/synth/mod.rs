//! Synthetic society with two-surname inheritance and kin-biased calling.
//!
//! Families are disjoint pedigrees grown from one founder couple. Spouses
//! who marry in bring fresh surnames and no relatives, so with unique
//! lineage tokens the only surname matches are genuine blood relations.
//! Calls follow maintained dyads: kin edges (parents, siblings, spouses,
//! grandparents, blood aunts and uncles) and random non-kin edges between
//! families.

mod calls;
mod score;

pub use calls::{
    for_each_call, generate_calls, maintained_dyads, write_cdr, CallEvent, DyadKind, MaintainedDyad, CDR_HEADER,
};
pub use score::{
    read_relations, score_classifier, write_relations, write_score, GroundTruth, Relation, ScoreReport,
    SlotScore, TrueRelation, RELATIONS_HEADER,
};

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::PhoneHasher;
use crate::registry::{Contract, Sex, SubscriberRecord};

/// Parent-child age gaps and founder ages, in years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgeModel {
    /// Mother's age at a child's birth lies in `[min_gap, max_gap]`.
    pub min_gap: u8,
    pub max_gap: u8,
    /// Husbands are this many years older than wives, at most.
    pub spouse_gap_max: u8,
    /// Largest age difference between full siblings. Keep below the
    /// smallest slot offset so siblings never enter a parent/child slot.
    pub sibling_span: u8,
    pub founder_age_min: u8,
    pub founder_age_max: u8,
    pub marriage_age: u8,
}

impl Default for AgeModel {
    fn default() -> Self {
        AgeModel {
            min_gap: 22,
            max_gap: 38,
            spouse_gap_max: 6,
            sibling_span: 14,
            founder_age_min: 60,
            founder_age_max: 95,
            marriage_age: 20,
        }
    }
}

/// Per-call duration in seconds, log-normal with the given mean and sd.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationModel {
    pub mean: f64,
    pub sd: f64,
}

/// Kin call rates scale with the relation type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelationWeights {
    pub parent_child: f64,
    pub sibling: f64,
    pub spouse: f64,
    pub grandparent: f64,
    pub aunt_uncle: f64,
}

impl Default for RelationWeights {
    fn default() -> Self {
        RelationWeights {
            parent_child: 1.0,
            sibling: 0.5,
            spouse: 1.5,
            grandparent: 0.3,
            aunt_uncle: 0.2,
        }
    }
}

/// Multiplies kin call rates when the younger endpoint's age lies in
/// `[min_age, max_age]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgeBoost {
    pub min_age: u8,
    pub max_age: u8,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_families: usize,
    pub generations: u8,
    /// Mean children per couple (Poisson).
    pub fertility: f64,
    /// Probability that an adult in a non-final generation marries.
    pub marriage_rate: f64,
    pub age_model: AgeModel,
    /// Number of distinct surname tokens; `None` gives every lineage its
    /// own token.
    pub surname_pool: Option<usize>,
    /// Probability a phone holder is a labeled subscriber of the operator.
    pub coverage: f64,
    pub min_phone_age: u8,
    /// Probability a covered person shares a family contract with a covered
    /// parent.
    pub family_plan_rate: f64,
    /// Mean non-kin contacts drawn per person.
    pub nonkin_degree: f64,
    /// Share of non-kin contacts drawn within ±`peer_age_window` years.
    pub peer_fraction: f64,
    pub peer_age_window: u8,
    pub kin_rate_multiplier: f64,
    /// Calls per year on a maintained non-kin dyad.
    pub base_call_rate: f64,
    pub relation_weights: RelationWeights,
    /// Probability an ego has a favourite maternal aunt, called
    /// `aunt_preference_factor` times as often as the mother.
    pub aunt_preference: f64,
    pub aunt_preference_factor: f64,
    pub kin_boost: Option<AgeBoost>,
    pub kin_duration: DurationModel,
    pub nonkin_duration: DurationModel,
    pub year: i32,
    /// Set from the run-level seed.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_families: 1000,
            generations: 3,
            fertility: 2.5,
            marriage_rate: 0.9,
            age_model: AgeModel::default(),
            surname_pool: None,
            coverage: 0.4,
            min_phone_age: 10,
            family_plan_rate: 0.0,
            nonkin_degree: 6.0,
            peer_fraction: 0.5,
            peer_age_window: 10,
            kin_rate_multiplier: 4.0,
            base_call_rate: 6.0,
            relation_weights: RelationWeights::default(),
            aunt_preference: 0.0,
            aunt_preference_factor: 2.0,
            kin_boost: None,
            kin_duration: DurationModel { mean: 240.0, sd: 180.0 },
            nonkin_duration: DurationModel { mean: 100.0, sd: 80.0 },
            year: 2015,
            seed: 2015,
        }
    }
}

fn unit_interval(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in [0, 1], got {x}")))
    }
}

fn non_negative(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be a non-negative number, got {x}")))
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.generations == 0 {
            return Err(Error::Config("generations must be at least 1".into()));
        }
        if !(self.coverage > 0.0 && self.coverage <= 1.0) {
            return Err(Error::Config(format!("coverage must lie in (0, 1], got {}", self.coverage)));
        }
        unit_interval("marriage_rate", self.marriage_rate)?;
        unit_interval("family_plan_rate", self.family_plan_rate)?;
        unit_interval("peer_fraction", self.peer_fraction)?;
        unit_interval("aunt_preference", self.aunt_preference)?;
        non_negative("fertility", self.fertility)?;
        non_negative("nonkin_degree", self.nonkin_degree)?;
        non_negative("kin_rate_multiplier", self.kin_rate_multiplier)?;
        non_negative("base_call_rate", self.base_call_rate)?;
        non_negative("aunt_preference_factor", self.aunt_preference_factor)?;
        let w = &self.relation_weights;
        for (name, x) in [
            ("parent_child", w.parent_child),
            ("sibling", w.sibling),
            ("spouse", w.spouse),
            ("grandparent", w.grandparent),
            ("aunt_uncle", w.aunt_uncle),
        ] {
            non_negative(name, x)?;
        }
        for (name, d) in [("kin_duration", self.kin_duration), ("nonkin_duration", self.nonkin_duration)] {
            if !(d.mean > 0.0 && d.sd >= 0.0 && d.sd.is_finite()) {
                return Err(Error::Config(format!("{name}: mean must be positive and sd non-negative")));
            }
        }
        if let Some(b) = &self.kin_boost {
            non_negative("kin_boost.factor", b.factor)?;
            if b.min_age > b.max_age {
                return Err(Error::Config("kin_boost: min_age > max_age".into()));
            }
        }
        if self.surname_pool == Some(0) {
            return Err(Error::Config("surname_pool must be positive when set".into()));
        }
        let a = &self.age_model;
        if a.min_gap == 0 || a.min_gap > a.max_gap {
            return Err(Error::Config("age_model: need 0 < min_gap <= max_gap".into()));
        }
        if a.founder_age_min > a.founder_age_max {
            return Err(Error::Config("age_model: founder_age_min > founder_age_max".into()));
        }
        if NaiveDate::from_ymd_opt(self.year, 1, 1).is_none() {
            return Err(Error::Config(format!("year {} out of range", self.year)));
        }
        Ok(())
    }
}

pub type PersonId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct Person {
    pub id: PersonId,
    pub family: u32,
    pub sex: Sex,
    pub age: u8,
    pub ln_p: u32,
    pub ln_m: u32,
    pub mother: Option<PersonId>,
    pub father: Option<PersonId>,
    pub spouse: Option<PersonId>,
    pub children: Vec<PersonId>,
    pub has_phone: bool,
    pub covered: bool,
    /// Owner of the shared contract, when on a family plan.
    pub family_plan_owner: Option<PersonId>,
    pub contract_start: NaiveDate,
}

impl Person {
    pub fn phone(&self) -> String {
        format!("+569{:08}", self.id)
    }

    pub fn surname(token: u32) -> String {
        format!("S{token}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub people: Vec<Person>,
    pub config: SynthConfig,
}

struct TokenSource {
    pool: Option<usize>,
    next: u32,
}

impl TokenSource {
    fn draw(&mut self, rng: &mut ChaCha8Rng) -> u32 {
        match self.pool {
            Some(k) => rng.random_range(0..k as u32),
            None => {
                self.next += 1;
                self.next
            }
        }
    }
}

fn random_sex(rng: &mut ChaCha8Rng) -> Sex {
    if rng.random_bool(0.5) {
        Sex::Female
    } else {
        Sex::Male
    }
}

/// Builds the pedigree. Deterministic given `config.seed`.
pub fn generate_population(config: &SynthConfig) -> Result<World> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let am = &config.age_model;
    let mut tokens = TokenSource {
        pool: config.surname_pool,
        next: 0,
    };
    let fertility = (config.fertility > 0.0)
        .then(|| Poisson::new(config.fertility).expect("positive mean"));
    let mut people: Vec<Person> = Vec::new();
    let year_start = NaiveDate::from_ymd_opt(config.year, 1, 1).expect("validated");

    let new_person = |people: &mut Vec<Person>, rng: &mut ChaCha8Rng, family, sex, age, ln_p, ln_m| {
        let id = people.len() as PersonId;
        let days_before = rng.random_range(0..365 * 15);
        people.push(Person {
            id,
            family,
            sex,
            age,
            ln_p,
            ln_m,
            mother: None,
            father: None,
            spouse: None,
            children: Vec::new(),
            has_phone: false,
            covered: false,
            family_plan_owner: None,
            contract_start: year_start - chrono::Duration::days(days_before),
        });
        id
    };

    for family in 0..config.n_families as u32 {
        let wife_age = rng.random_range(am.founder_age_min..=am.founder_age_max);
        let husband_age = wife_age.saturating_add(rng.random_range(0..=am.spouse_gap_max));
        let (wp, wm, hp, hm) = (
            tokens.draw(&mut rng),
            tokens.draw(&mut rng),
            tokens.draw(&mut rng),
            tokens.draw(&mut rng),
        );
        let wife = new_person(&mut people, &mut rng, family, Sex::Female, wife_age, wp, wm);
        let husband = new_person(&mut people, &mut rng, family, Sex::Male, husband_age, hp, hm);
        people[wife as usize].spouse = Some(husband);
        people[husband as usize].spouse = Some(wife);

        let mut couples = vec![(wife, husband, 0u8)];
        while let Some((mother, father, generation)) = couples.pop() {
            if generation + 1 >= config.generations {
                continue;
            }
            let n_children = fertility.map_or(0, |d| d.sample(&mut rng) as u32);
            if n_children == 0 {
                continue;
            }
            let mother_age = people[mother as usize].age;
            let first_gap = rng.random_range(am.min_gap..=am.max_gap);
            let last_gap = am.max_gap.min(first_gap.saturating_add(am.sibling_span));
            for _ in 0..n_children {
                let gap = rng.random_range(first_gap..=last_gap);
                let sex = random_sex(&mut rng);
                let (ln_p, ln_m) = (people[father as usize].ln_p, people[mother as usize].ln_p);
                if gap > mother_age {
                    continue;
                }
                let child = new_person(&mut people, &mut rng, family, sex, mother_age - gap, ln_p, ln_m);
                people[child as usize].mother = Some(mother);
                people[child as usize].father = Some(father);
                people[mother as usize].children.push(child);
                people[father as usize].children.push(child);

                let child_age = people[child as usize].age;
                if generation + 2 < config.generations
                    && child_age >= am.marriage_age
                    && rng.random_bool(config.marriage_rate)
                {
                    let diff = rng.random_range(0..=am.spouse_gap_max);
                    let (sp, sm) = (tokens.draw(&mut rng), tokens.draw(&mut rng));
                    let (spouse_sex, spouse_age) = match sex {
                        Sex::Female => (Sex::Male, child_age.saturating_add(diff)),
                        Sex::Male => (Sex::Female, child_age.saturating_sub(diff).max(am.marriage_age)),
                    };
                    let spouse = new_person(&mut people, &mut rng, family, spouse_sex, spouse_age, sp, sm);
                    people[child as usize].spouse = Some(spouse);
                    people[spouse as usize].spouse = Some(child);
                    let couple = match sex {
                        Sex::Female => (child, spouse, generation + 1),
                        Sex::Male => (spouse, child, generation + 1),
                    };
                    couples.push(couple);
                }
            }
        }
    }

    for p in people.iter_mut() {
        p.has_phone = p.age >= config.min_phone_age;
        p.covered = p.has_phone && rng.random_bool(config.coverage);
    }
    if config.family_plan_rate > 0.0 {
        for i in 0..people.len() {
            if !people[i].covered {
                continue;
            }
            let parent = [people[i].mother, people[i].father]
                .into_iter()
                .flatten()
                .find(|&q| people[q as usize].covered);
            if let Some(parent) = parent {
                if rng.random_bool(config.family_plan_rate) {
                    let owner = people[parent as usize].family_plan_owner.unwrap_or(parent);
                    people[parent as usize].family_plan_owner = Some(owner);
                    people[i].family_plan_owner = Some(owner);
                }
            }
        }
    }
    Ok(World {
        people,
        config: config.clone(),
    })
}

impl World {
    pub fn person(&self, id: PersonId) -> &Person {
        &self.people[id as usize]
    }

    pub fn siblings(&self, id: PersonId) -> impl Iterator<Item = PersonId> + '_ {
        let p = self.person(id);
        p.mother
            .into_iter()
            .flat_map(move |m| self.person(m).children.iter().copied())
            .filter(move |&c| c != id)
    }

    /// Registry rows for covered people. Family-plan members carry the
    /// owner's id and the `family` contract type; resolution happens in the
    /// registry stage.
    pub fn registry_records(&self, hasher: &PhoneHasher) -> Result<Vec<SubscriberRecord>> {
        let mut out = Vec::new();
        for p in self.people.iter().filter(|p| p.covered) {
            let phone = hasher
                .hash_phone(&p.phone())
                .map_err(|e| Error::Contract(format!("generated phone rejected: {e:?}")))?;
            let (owner_id, contract) = match p.family_plan_owner {
                Some(o) => (format!("P{o}"), Contract::Family),
                None => (format!("P{}", p.id), Contract::Individual),
            };
            out.push(SubscriberRecord {
                phone,
                ln_p: Some(Person::surname(p.ln_p)),
                ln_m: Some(Person::surname(p.ln_m)),
                sex: Some(p.sex),
                age: Some(p.age),
                owner_id,
                contract,
                contract_start: Some(p.contract_start),
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SynthConfig {
        SynthConfig {
            n_families: 200,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn surname_rule_holds_for_every_child() {
        let w = generate_population(&small(1)).unwrap();
        let mut children = 0;
        for p in &w.people {
            if let (Some(m), Some(f)) = (p.mother, p.father) {
                assert_eq!(p.ln_p, w.person(f).ln_p);
                assert_eq!(p.ln_m, w.person(m).ln_p);
                children += 1;
            }
        }
        assert!(children > 200);
    }

    #[test]
    fn siblings_share_both_tokens_and_stay_close_in_age() {
        let w = generate_population(&small(2)).unwrap();
        for p in &w.people {
            for s in w.siblings(p.id) {
                let s = w.person(s);
                assert_eq!((p.ln_p, p.ln_m), (s.ln_p, s.ln_m));
                assert!(p.age.abs_diff(s.age) <= w.config.age_model.sibling_span);
            }
        }
    }

    #[test]
    fn age_gaps_respect_model() {
        let w = generate_population(&small(3)).unwrap();
        for p in &w.people {
            if let (Some(m), Some(f)) = (p.mother, p.father) {
                let gm = w.person(m).age - p.age;
                let gf = w.person(f).age - p.age;
                assert!((22..=38).contains(&gm), "{gm}");
                assert!((22..=44).contains(&gf), "{gf}");
            }
        }
    }

    #[test]
    fn single_token_pool_collides_everything() {
        let w = generate_population(&SynthConfig { surname_pool: Some(1), ..small(4) }).unwrap();
        assert!(w.people.iter().all(|p| p.ln_p == 0 && p.ln_m == 0));
    }

    #[test]
    fn unique_tokens_per_lineage() {
        let w = generate_population(&small(5)).unwrap();
        // a token is shared only by a founder-or-spouse and their descendants
        let mut origin = std::collections::HashMap::new();
        for p in w.people.iter().filter(|p| p.mother.is_none()) {
            assert!(origin.insert(p.ln_p, p.id).is_none());
        }
    }

    #[test]
    fn deterministic_given_seed() {
        assert_eq!(generate_population(&small(6)).unwrap(), generate_population(&small(6)).unwrap());
        assert_ne!(generate_population(&small(6)).unwrap(), generate_population(&small(7)).unwrap());
    }

    #[test]
    fn invalid_configs() {
        for bad in [
            SynthConfig { generations: 0, ..Default::default() },
            SynthConfig { coverage: 0.0, ..Default::default() },
            SynthConfig { coverage: 1.5, ..Default::default() },
            SynthConfig { kin_rate_multiplier: -1.0, ..Default::default() },
            SynthConfig { fertility: -0.5, ..Default::default() },
            SynthConfig { surname_pool: Some(0), ..Default::default() },
        ] {
            assert!(matches!(generate_population(&bad), Err(Error::Config(_))));
        }
    }

    #[test]
    fn family_plans_share_an_owner() {
        let cfg = SynthConfig { family_plan_rate: 0.5, coverage: 1.0, ..small(8) };
        let w = generate_population(&cfg).unwrap();
        let hasher = PhoneHasher::new(b"salt", 20).unwrap();
        let recs = w.registry_records(&hasher).unwrap();
        let family = recs.iter().filter(|r| r.contract == Contract::Family).count();
        assert!(family > 0);
        assert_eq!(recs.len(), w.people.iter().filter(|p| p.covered).count());
    }
}
