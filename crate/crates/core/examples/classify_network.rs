//! The three filters on a six-node network: two families and one
//! unrelated mother-aged contact.
//!
//! | node | sex | LN_p | LN_m | age |
//! |------|-----|------|------|-----|
//! | 1    | F   | A    | B    | 55  |
//! | 2    | M   | E    | F    | 50  |
//! | 3    | F   | C    | D    | 28  |
//! | 4    | M   | E    | G    | 22  |
//! | 5    | F   | H    | I    | 48  |
//! | 6    | F   | J    | H    | 20  |

use kincall::graph::build_graph;
use kincall::ingest::DyadSet;
use kincall::kinclass::{classify_graph, confirmation_ratio, SlotSpecs};
use kincall::registry::{Contract, Registry, Sex, SubscriberRecord};

fn node(n: u8, sex: Sex, ln_p: &str, ln_m: &str, age: u8) -> SubscriberRecord {
    SubscriberRecord {
        phone: format!("{n:02}").parse().unwrap(),
        ln_p: Some(ln_p.into()),
        ln_m: Some(ln_m.into()),
        sex: Some(sex),
        age: Some(age),
        owner_id: format!("owner{n}"),
        contract: Contract::Individual,
        contract_start: None,
    }
}

fn main() -> kincall::Result<()> {
    let people = vec![
        node(1, Sex::Female, "A", "B", 55),
        node(2, Sex::Male, "E", "F", 50),
        node(3, Sex::Female, "C", "D", 28),
        node(4, Sex::Male, "E", "G", 22),
        node(5, Sex::Female, "H", "I", 48),
        node(6, Sex::Female, "J", "H", 20),
    ];
    let mut dyads = DyadSet::new();
    for (a, b, calls) in [(1, 3, 8), (2, 4, 12), (5, 6, 20), (4, 6, 5), (1, 5, 6), (3, 4, 3)] {
        for k in 0..calls {
            let (x, y) = if k % 2 == 0 { (a, b) } else { (b, a) };
            dyads.add_call(people[x - 1].phone, people[y - 1].phone, 90);
        }
    }

    let graph = build_graph(&dyads, Registry::from_records(people).0)?;
    let specs = SlotSpecs::default();
    let (assignments, report) = classify_graph(&graph, &specs, 1)?;
    for a in &assignments {
        println!("node {} is the {} of node {}", a.alter, a.category, a.ego);
    }
    println!("\n{report:?}");
    for row in confirmation_ratio(&assignments) {
        println!("{row:?}");
    }
    Ok(())
}
