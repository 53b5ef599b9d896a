//! A synthetic pedigree with known kinship, its registry and a slice of
//! its call stream.
//!
//! ```bash
//! cargo run --release --example synth_world -- 200
//! ```

use std::collections::BTreeMap;

use kincall::hashing::PhoneHasher;
use kincall::synth::{generate_population, maintained_dyads, write_cdr, GroundTruth, SynthConfig};

fn main() -> kincall::Result<()> {
    let n_families = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let cfg = SynthConfig { n_families, seed: 7, ..Default::default() };
    let world = generate_population(&cfg)?;

    let phones = world.people.iter().filter(|p| p.has_phone).count();
    let covered = world.people.iter().filter(|p| p.covered).count();
    println!("{} people, {phones} with phones, {covered} in the registry", world.people.len());

    let mut kinds: BTreeMap<String, usize> = BTreeMap::new();
    for d in maintained_dyads(&world) {
        *kinds.entry(format!("{:?}", d.kind)).or_default() += 1;
    }
    println!("maintained dyads: {kinds:?}");

    let hasher = PhoneHasher::new(b"example-salt", 20)?;
    let truth = GroundTruth::from_world(&world, &hasher)?;
    println!("{} mother links, {} father links", truth.mother.len(), truth.father.len());

    let mut cdr = Vec::new();
    let calls = write_cdr(&mut cdr, &world, b',')?;
    println!("\n{calls} calls; first lines:");
    for line in String::from_utf8_lossy(&cdr).lines().take(6) {
        println!("{line}");
    }
    Ok(())
}
