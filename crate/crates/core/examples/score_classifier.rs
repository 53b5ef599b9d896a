//! How often the surname rule is right, and who it mistakes for kin, when
//! one in five egos calls a maternal aunt more than their mother.

use kincall::graph::build_graph;
use kincall::hashing::PhoneHasher;
use kincall::ingest::DyadSet;
use kincall::kinclass::{classify_graph, SlotSpecs};
use kincall::registry::{resolve_family_contracts, Registry};
use kincall::synth::{for_each_call, generate_population, score_classifier, write_score, GroundTruth, SynthConfig};

fn main() -> kincall::Result<()> {
    let cfg = SynthConfig {
        n_families: 1500,
        coverage: 0.6,
        aunt_preference: 0.2,
        seed: 21,
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
    let (registry, _) = Registry::from_records(records.clone());
    let graph = build_graph(&dyads, registry)?;
    let (assignments, _) = classify_graph(&graph, &SlotSpecs::default(), 1)?;

    let truth = GroundTruth::from_world(&world, &hasher)?;
    let report = score_classifier(&assignments, &truth, &Registry::from_records(records).0);
    write_score(std::io::stdout().lock(), &report, b'\t')?;
    Ok(())
}
