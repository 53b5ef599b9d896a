mod common;

use kincall::graph::Metric;
use kincall::kinclass::{RelationCategory, Slot};
use kincall::lifecourse::{build_tables, LifecourseConfig};
use kincall::registry::write_registry;
use kincall::synth::{generate_population, score_classifier, write_cdr, RelationWeights, SynthConfig, TrueRelation};

fn world(n: usize, seed: u64) -> SynthConfig {
    SynthConfig {
        n_families: n,
        coverage: 1.0,
        seed,
        ..Default::default()
    }
}

#[test]
fn kin_frequency_tracks_the_multiplier() {
    let run = common::run_world(&world(3000, 11));
    let tables = build_tables(&run.assignments, &LifecourseConfig::default()).unwrap();
    for slot in Slot::ALL {
        let rows: Vec<_> = tables.stats.iter().filter(|r| r.metric == Metric::Frequency && r.slot == slot).collect();
        assert_eq!(rows.len(), 2);
        for r in rows {
            let ratio = r.kin_mean / r.quasi_mean;
            assert!((ratio / 4.0 - 1.0).abs() <= 0.15, "{slot:?} {:?}: ratio {ratio}", r.ego_sex);
        }
    }
}

#[test]
fn top_contact_is_the_mother_gives_perfect_precision() {
    let cfg = SynthConfig {
        relation_weights: RelationWeights {
            aunt_uncle: 0.0,
            ..Default::default()
        },
        ..world(1500, 12)
    };
    let run = common::run_world(&cfg);
    let score = score_classifier(&run.assignments, &run.truth, &run.registry);
    let mother = score.slot(Slot::Mother);
    assert!(mother.kin_labeled > 500);
    assert_eq!(mother.precision, Some(1.0));
}

#[test]
fn aunt_preference_shortfall_is_all_maternal_aunts() {
    let cfg = SynthConfig {
        aunt_preference: 0.2,
        aunt_preference_factor: 3.0,
        ..world(2000, 13)
    };
    let run = common::run_world(&cfg);
    let score = score_classifier(&run.assignments, &run.truth, &run.registry);
    let mother = score.slot(Slot::Mother);
    let precision = mother.precision.unwrap();
    assert!(precision < 1.0 && precision > 0.7, "precision {precision}");
    assert_eq!(mother.misidentified.keys().copied().collect::<Vec<_>>(), vec![TrueRelation::MaternalAunt]);
    assert_eq!(mother.kin_labeled - mother.correct, mother.misidentified[&TrueRelation::MaternalAunt]);
}

#[test]
fn partial_coverage_bounds_recall() {
    let cfg = SynthConfig {
        coverage: 0.4,
        ..world(2000, 14)
    };
    let run = common::run_world(&cfg);
    let score = score_classifier(&run.assignments, &run.truth, &run.registry);
    for s in &score.slots {
        let (recall, both) = (s.recall_population.unwrap(), s.both_covered_fraction.unwrap());
        assert!(recall <= both + 1e-12, "{:?}: {recall} > {both}", s.slot);
        assert!((both - 0.16).abs() < 0.04, "{:?}: both-covered {both}", s.slot);
    }
}

#[test]
fn single_surname_pool_makes_everything_kin() {
    let cfg = SynthConfig {
        surname_pool: Some(1),
        ..world(300, 15)
    };
    let run = common::run_world(&cfg);
    assert!(!run.assignments.is_empty());
    assert!(run.assignments.iter().all(|a| a.category.is_kin()));
    assert!(!run.assignments.iter().any(|a| a.category == RelationCategory::QuasiMother));
}

#[test]
fn same_seed_same_bytes() {
    let render = |seed| {
        let w = generate_population(&world(40, seed)).unwrap();
        let hasher = kincall::hashing::PhoneHasher::new(common::SALT, 20).unwrap();
        let (mut cdr, mut reg) = (Vec::new(), Vec::new());
        write_cdr(&mut cdr, &w, b',').unwrap();
        write_registry(&mut reg, &w.registry_records(&hasher).unwrap(), b'\t').unwrap();
        (cdr, reg)
    };
    assert_eq!(render(16), render(16));
    assert_ne!(render(16).0, render(17).0);
}

#[test]
fn children_follow_the_surname_rule() {
    let w = generate_population(&world(200, 18)).unwrap();
    let mut checked = 0;
    for p in &w.people {
        if let (Some(m), Some(f)) = (p.mother, p.father) {
            assert_eq!(p.ln_p, w.person(f).ln_p);
            assert_eq!(p.ln_m, w.person(m).ln_p);
            checked += 1;
        }
    }
    assert!(checked > 200);
}
