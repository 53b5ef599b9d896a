use kincall::graph::{build_graph, dyad_metrics, Alter, EgoNetwork, MetricTuple};
use kincall::hashing::HashedId;
use kincall::ingest::DyadSet;
use kincall::kinclass::{classify_ego, SlotSpecs};
use kincall::registry::{Contract, Node, Registry, Sex, SubscriberRecord};
use proptest::prelude::*;

fn id(n: u16) -> HashedId {
    format!("{n:04x}").parse().unwrap()
}

fn dyads() -> impl Strategy<Value = DyadSet> {
    prop::collection::vec((0u16..30, 0u16..30, 0u64..5000), 1..150).prop_map(|calls| {
        let mut set = DyadSet::new();
        for (a, b, secs) in calls {
            if a != b {
                set.add_call(id(a), id(b), secs);
            }
        }
        set
    })
}

fn record(n: u16, sex: bool, age: u8, ln_p: u8, ln_m: u8) -> SubscriberRecord {
    SubscriberRecord {
        phone: id(n),
        ln_p: Some(format!("S{ln_p}")),
        ln_m: Some(format!("S{ln_m}")),
        sex: Some(if sex { Sex::Female } else { Sex::Male }),
        age: Some(age),
        owner_id: format!("o{n}"),
        contract: Contract::Individual,
        contract_start: None,
    }
}

proptest! {
    #[test]
    fn ego_metrics_are_consistent(set in dyads()) {
        let graph = build_graph(&set, Registry::default()).unwrap();
        for ego in graph.nodes() {
            let total = graph.ego_total_sec(ego);
            let mut frac = 0.0;
            for d in graph.incident(ego) {
                let m = dyad_metrics(ego, d, total).unwrap();
                let other = dyad_metrics(&d.other(ego).unwrap(), d, graph.ego_total_sec(&d.other(ego).unwrap())).unwrap();
                prop_assert_eq!(m.out_call_frac + other.out_call_frac, 1.0);
                prop_assert!((m.call_length * m.frequency as f64 - d.total_sec as f64).abs() <= 1e-9 * d.total_sec as f64);
                prop_assert!((0.0..=1.0).contains(&m.frac_of_time));
                frac += m.frac_of_time;
            }
            if total > 0 {
                prop_assert!((frac - 1.0).abs() <= 1e-9);
            }
        }
        prop_assert_eq!(graph.edge_count(), set.len());
    }

    #[test]
    fn classification_ignores_alter_order(
        ego in (any::<bool>(), 18u8..70, 0u8..3, 0u8..3),
        alters in prop::collection::vec((any::<bool>(), 0u8..100, 0u8..3, 0u8..3, 1u64..6, 0u64..50), 1..25),
        rotate in 0usize..25,
    ) {
        let ego = record(0, ego.0, ego.1, ego.2, ego.3);
        let records: Vec<_> = alters
            .iter()
            .enumerate()
            .map(|(i, a)| record(i as u16 + 1, a.0, a.1, a.2, a.3))
            .collect();
        let list: Vec<Alter> = records
            .iter()
            .zip(&alters)
            .map(|(r, a)| Alter {
                phone: r.phone,
                node: Node::Labeled(r),
                metrics: MetricTuple { frequency: a.4, frac_of_time: 0.0, out_call_frac: 0.5, call_length: a.5 as f64, total_sec: a.4 * a.5 },
            })
            .collect();
        let specs = SlotSpecs::default();
        let base = classify_ego(&EgoNetwork { ego: &ego, alters: list.clone() }, &specs);
        let mut permuted = list.clone();
        permuted.reverse();
        permuted.rotate_left(rotate % list.len());
        let other = classify_ego(&EgoNetwork { ego: &ego, alters: permuted }, &specs);
        prop_assert_eq!(&base, &other);
        prop_assert!(base.assignments.len() <= 4);
    }
}
