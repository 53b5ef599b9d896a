#![allow(dead_code)]

use kincall::graph::build_graph;
use kincall::hashing::{HashedId, PhoneHasher};
use kincall::ingest::DyadSet;
use kincall::kinclass::{classify_graph, KinAssignment, SlotSpecs};
use kincall::registry::{resolve_family_contracts, Registry};
use kincall::synth::{for_each_call, generate_population, GroundTruth, SynthConfig, World};

pub const SALT: &[u8] = b"test-salt";

pub struct WorldRun {
    pub world: World,
    pub truth: GroundTruth,
    pub registry: Registry,
    pub dyads: DyadSet,
    pub assignments: Vec<KinAssignment>,
}

/// Generates a world and runs aggregation and classification in memory.
pub fn run_world(cfg: &SynthConfig) -> WorldRun {
    let world = generate_population(cfg).unwrap();
    let hasher = PhoneHasher::new(SALT, 20).unwrap();
    let ids: Vec<Option<HashedId>> = world
        .people
        .iter()
        .map(|p| p.has_phone.then(|| hasher.hash_phone(&p.phone()).unwrap()))
        .collect();
    let mut dyads = DyadSet::new();
    for_each_call(&world, |ev| {
        dyads.add_call(
            ids[ev.origin as usize].unwrap(),
            ids[ev.destination as usize].unwrap(),
            ev.duration_sec,
        );
        Ok(())
    })
    .unwrap();
    let (records, _) = resolve_family_contracts(world.registry_records(&hasher).unwrap());
    let (registry, _) = Registry::from_records(records.clone());
    let graph = build_graph(&dyads, registry).unwrap();
    let (assignments, _) = classify_graph(&graph, &SlotSpecs::default(), 1).unwrap();
    let (registry, _) = Registry::from_records(records);
    let truth = GroundTruth::from_world(&world, &hasher).unwrap();
    WorldRun {
        world,
        truth,
        registry,
        dyads,
        assignments,
    }
}
