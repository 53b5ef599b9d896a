//! Kin versus quasi curves and the two test tables on a synthetic world.
//!
//! ```bash
//! cargo run --release --example lifecourse_tables
//! ```

use kincall::graph::{build_graph, Metric};
use kincall::hashing::PhoneHasher;
use kincall::ingest::DyadSet;
use kincall::kinclass::{classify_graph, SlotSpecs};
use kincall::lifecourse::{build_tables, write_stats, write_variation, LifecourseConfig, VARIATION_TEST};
use kincall::registry::{resolve_family_contracts, Registry};
use kincall::synth::{for_each_call, generate_population, AgeBoost, SynthConfig};

fn main() -> kincall::Result<()> {
    let cfg = SynthConfig {
        n_families: 2500,
        coverage: 1.0,
        seed: 11,
        kin_boost: Some(AgeBoost { min_age: 25, max_age: 40, factor: 3.0 }),
        ..Default::default()
    };
    let world = generate_population(&cfg)?;
    let hasher = PhoneHasher::new(b"example-salt", 20)?;
    let ids: Vec<_> = world.people.iter().map(|p| p.has_phone.then(|| hasher.hash_phone(&p.phone()).unwrap())).collect();

    let mut dyads = DyadSet::new();
    for_each_call(&world, |ev| {
        dyads.add_call(ids[ev.origin as usize].unwrap(), ids[ev.destination as usize].unwrap(), ev.duration_sec);
        Ok(())
    })?;
    let (records, _) = resolve_family_contracts(world.registry_records(&hasher)?);
    let graph = build_graph(&dyads, Registry::from_records(records).0)?;
    let (assignments, _) = classify_graph(&graph, &SlotSpecs::default(), 1)?;

    let lc = LifecourseConfig { seed: 11, ..Default::default() };
    let tables = build_tables(&assignments, &lc)?;
    println!("{} assignments, {} curves", assignments.len(), tables.curves.len());
    if let Some(b) = &tables.balance {
        println!("balanced {} cohorts, removed {} quasi rows", b.downsampled, b.quasi_removed);
    }

    let curve = tables.curves.iter().find(|c| c.metric == Metric::Frequency).expect("a frequency curve");
    println!("\n{} {} {} ego", curve.metric.name(), curve.slot, curve.ego_sex);
    for p in curve.points.iter().step_by(4) {
        println!("  age {:>2}: kin {:>6.1}  quasi {:>5.1}  (n {} / {})", p.age, p.kin_mean, p.quasi_mean, p.n_kin, p.n_quasi);
    }

    println!();
    write_stats(std::io::stdout().lock(), &tables.stats[..4], b'\t')?;
    println!("\n{VARIATION_TEST}");
    write_variation(std::io::stdout().lock(), &tables.variation[..4.min(tables.variation.len())], b'\t')?;
    Ok(())
}
