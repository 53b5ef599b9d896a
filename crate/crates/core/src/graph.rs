//! Mobile call graph, ego networks and per-dyad call-pattern metrics.

use std::io::Write;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::HashedId;
use crate::ingest::{DyadAggregate, DyadSet};
use crate::registry::{Node, Registry, SubscriberRecord};

/// The four call-pattern variables of one dyad seen from one ego.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTuple {
    /// Calls in either direction over the observation window.
    pub frequency: u64,
    /// Share of the ego's total talk time spent in this dyad.
    pub frac_of_time: f64,
    /// Ego-initiated calls over all calls in the dyad.
    pub out_call_frac: f64,
    /// Mean seconds per call.
    pub call_length: f64,
    /// Talk seconds in the dyad; `call_length * frequency` in exact form.
    pub total_sec: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Frequency,
    FracOfTime,
    OutCallFrac,
    CallLength,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::Frequency,
        Metric::FracOfTime,
        Metric::OutCallFrac,
        Metric::CallLength,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Frequency => "Frequency",
            Metric::FracOfTime => "FracOfTime",
            Metric::OutCallFrac => "OutCallFrac",
            Metric::CallLength => "CallLength",
        }
    }

    pub fn from_name(s: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(s))
    }
}

impl MetricTuple {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Frequency => self.frequency as f64,
            Metric::FracOfTime => self.frac_of_time,
            Metric::OutCallFrac => self.out_call_frac,
            Metric::CallLength => self.call_length,
        }
    }
}

/// Metrics of `dyad` from the point of view of `ego`.
///
/// `ego_total_sec` is the ego's talk time summed over all of its dyads.
/// When it is zero (every call lasted 0 s) `frac_of_time` is 0.
pub fn dyad_metrics(ego: &HashedId, dyad: &DyadAggregate, ego_total_sec: u64) -> Result<MetricTuple> {
    let ego_out = if *ego == dyad.phone_a {
        dyad.out_calls
    } else if *ego == dyad.phone_b {
        dyad.in_calls
    } else {
        return Err(Error::Contract(format!(
            "{ego} is not an endpoint of dyad ({}, {})",
            dyad.phone_a, dyad.phone_b
        )));
    };
    let frequency = dyad.calls();
    if frequency == 0 {
        return Err(Error::Contract("dyad without calls".into()));
    }
    if dyad.total_sec > ego_total_sec {
        return Err(Error::Contract(format!(
            "dyad seconds {} exceed ego total {ego_total_sec}",
            dyad.total_sec
        )));
    }
    let frac_of_time = if ego_total_sec == 0 {
        0.0
    } else {
        dyad.total_sec as f64 / ego_total_sec as f64
    };
    Ok(MetricTuple {
        frequency,
        frac_of_time,
        out_call_frac: ego_out as f64 / frequency as f64,
        call_length: dyad.total_sec as f64 / frequency as f64,
        total_sec: dyad.total_sec,
    })
}

/// Immutable call graph: every phone appearing on a dyad is a node; node
/// labels come from the registry.
#[derive(Debug)]
pub struct CallGraph {
    registry: Registry,
    edges: Vec<DyadAggregate>,
    nodes: Vec<HashedId>,
    adjacency: FxHashMap<HashedId, Vec<u32>>,
    total_sec: FxHashMap<HashedId, u64>,
}

pub fn build_graph(dyads: &DyadSet, registry: Registry) -> Result<CallGraph> {
    let edges = dyads.to_sorted_vec();
    if edges.len() > u32::MAX as usize {
        return Err(Error::Config("too many edges for a single graph".into()));
    }
    let mut adjacency: FxHashMap<HashedId, Vec<u32>> = FxHashMap::default();
    let mut total_sec: FxHashMap<HashedId, u64> = FxHashMap::default();
    for (i, e) in edges.iter().enumerate() {
        if e.phone_a == e.phone_b {
            return Err(Error::Contract(format!("self dyad on {}", e.phone_a)));
        }
        for p in [e.phone_a, e.phone_b] {
            adjacency.entry(p).or_default().push(i as u32);
            *total_sec.entry(p).or_default() += e.total_sec;
        }
    }
    let mut nodes: Vec<_> = adjacency.keys().copied().collect();
    nodes.sort_unstable();
    Ok(CallGraph {
        registry,
        edges,
        nodes,
        adjacency,
        total_sec,
    })
}

impl CallGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> &[HashedId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[DyadAggregate] {
        &self.edges
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn node(&self, phone: &HashedId) -> Node<'_> {
        self.registry.lookup(phone)
    }

    pub fn degree(&self, phone: &HashedId) -> usize {
        self.adjacency.get(phone).map_or(0, Vec::len)
    }

    pub fn ego_total_sec(&self, phone: &HashedId) -> u64 {
        self.total_sec.get(phone).copied().unwrap_or(0)
    }

    pub fn incident(&self, phone: &HashedId) -> impl Iterator<Item = &DyadAggregate> {
        self.adjacency
            .get(phone)
            .into_iter()
            .flatten()
            .map(|&i| &self.edges[i as usize])
    }

    /// Labeled nodes with at least one edge, ascending.
    pub fn labeled_egos(&self) -> impl Iterator<Item = HashedId> + '_ {
        self.nodes
            .iter()
            .copied()
            .filter(|p| !self.registry.lookup(p).is_grey())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Alter<'g> {
    pub phone: HashedId,
    pub node: Node<'g>,
    pub metrics: MetricTuple,
}

#[derive(Debug, Clone)]
pub struct EgoNetwork<'g> {
    pub ego: &'g SubscriberRecord,
    /// One entry per incident edge, ordered by alter id.
    pub alters: Vec<Alter<'g>>,
}

/// Why no ego network exists for a phone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EgoSkip {
    Grey,
    NoEdges,
}

pub fn ego_network<'g>(graph: &'g CallGraph, ego: &HashedId) -> std::result::Result<EgoNetwork<'g>, EgoSkip> {
    let record = graph.node(ego).labeled().ok_or(EgoSkip::Grey)?;
    let total = graph.ego_total_sec(ego);
    let mut alters: Vec<Alter<'g>> = graph
        .incident(ego)
        .map(|d| {
            let other = d.other(ego).expect("incident edge");
            Alter {
                phone: other,
                node: graph.node(&other),
                metrics: dyad_metrics(ego, d, total).expect("graph invariants"),
            }
        })
        .collect();
    if alters.is_empty() {
        return Err(EgoSkip::NoEdges);
    }
    alters.sort_unstable_by_key(|a| a.phone);
    Ok(EgoNetwork { ego: record, alters })
}

/// Per-ego metric export: one row per (labeled ego, alter).
pub fn write_ego_metrics<W: Write>(out: W, graph: &CallGraph, delimiter: u8) -> Result<u64> {
    let mut w = std::io::BufWriter::new(out);
    let d = delimiter as char;
    writeln!(w, "ego{d}alter{d}frequency{d}frac_of_time{d}out_call_frac{d}call_length")?;
    let mut rows = 0;
    for ego in graph.labeled_egos() {
        let Ok(net) = ego_network(graph, &ego) else { continue };
        for a in &net.alters {
            let m = &a.metrics;
            writeln!(
                w,
                "{ego}{d}{}{d}{}{d}{}{d}{}{d}{}",
                a.phone,
                m.frequency,
                crate::stats::fmt_real(m.frac_of_time),
                crate::stats::fmt_real(m.out_call_frac),
                crate::stats::fmt_real(m.call_length)
            )?;
            rows += 1;
        }
    }
    w.flush()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{Contract, Sex};

    fn id(s: &str) -> HashedId {
        s.parse().unwrap()
    }

    fn dyad(a: &str, b: &str, out: u64, inc: u64, sec: u64) -> DyadAggregate {
        DyadAggregate {
            phone_a: id(a),
            phone_b: id(b),
            out_calls: out,
            in_calls: inc,
            total_sec: sec,
        }
    }

    fn labeled(phone: &str) -> SubscriberRecord {
        SubscriberRecord {
            phone: id(phone),
            ln_p: Some("A".into()),
            ln_m: Some("B".into()),
            sex: Some(Sex::Female),
            age: Some(30),
            owner_id: phone.into(),
            contract: Contract::Individual,
            contract_start: None,
        }
    }

    #[test]
    fn three_one_512_row_metrics() {
        let d = dyad("71e61e625c967f98da69", "bbb818a312f0fdb0771d", 3, 1, 512);
        let m = dyad_metrics(&id("71e61e625c967f98da69"), &d, 512).unwrap();
        assert_eq!(m.frequency, 4);
        assert_eq!(m.out_call_frac, 0.75);
        assert_eq!(m.call_length, 128.0);
        assert_eq!(m.frac_of_time, 1.0);
        let other = dyad_metrics(&id("bbb818a312f0fdb0771d"), &d, 1024).unwrap();
        assert_eq!(other.out_call_frac, 0.25);
        assert_eq!(other.frac_of_time, 0.5);
        assert!(matches!(dyad_metrics(&id("00"), &d, 512), Err(Error::Contract(_))));
    }

    #[test]
    fn frac_of_time_normalizes_over_dyads() {
        let set = DyadSet::from_aggregates([dyad("01", "02", 1, 0, 300), dyad("01", "03", 0, 2, 100)]).unwrap();
        let (reg, _) = Registry::from_records(vec![labeled("01")]);
        let g = build_graph(&set, reg).unwrap();
        let net = ego_network(&g, &id("01")).unwrap();
        let fracs: Vec<_> = net.alters.iter().map(|a| a.metrics.frac_of_time).collect();
        assert_eq!(fracs, vec![0.75, 0.25]);
        assert!(net.alters[0].node.is_grey());
    }

    #[test]
    fn zero_duration_ego_has_zero_fractions() {
        let set = DyadSet::from_aggregates([dyad("01", "02", 1, 0, 0)]).unwrap();
        let (reg, _) = Registry::from_records(vec![labeled("01")]);
        let g = build_graph(&set, reg).unwrap();
        let net = ego_network(&g, &id("01")).unwrap();
        assert_eq!(net.alters[0].metrics.frac_of_time, 0.0);
        assert_eq!(net.alters[0].metrics.call_length, 0.0);
    }

    #[test]
    fn counts_nodes_and_edges() {
        let set = DyadSet::from_aggregates([
            dyad("01", "02", 1, 0, 5),
            dyad("02", "03", 1, 1, 5),
            dyad("03", "04", 0, 1, 5),
        ])
        .unwrap();
        let g = build_graph(&set, Registry::default()).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (4, 3));
        let empty = build_graph(&DyadSet::new(), Registry::default()).unwrap();
        assert_eq!((empty.node_count(), empty.edge_count()), (0, 0));
    }

    #[test]
    fn single_alter_takes_all_time_and_isolated_ego_is_skipped() {
        let set = DyadSet::from_aggregates([dyad("01", "02", 2, 3, 50)]).unwrap();
        let (reg, _) = Registry::from_records(vec![labeled("01"), labeled("09")]);
        let g = build_graph(&set, reg).unwrap();
        let net = ego_network(&g, &id("01")).unwrap();
        assert_eq!(net.alters.len(), 1);
        assert_eq!(net.alters[0].metrics.frac_of_time, 1.0);
        assert_eq!(ego_network(&g, &id("09")).unwrap_err(), EgoSkip::NoEdges);
        assert_eq!(ego_network(&g, &id("02")).unwrap_err(), EgoSkip::Grey);
    }

    #[test]
    fn metrics_export_has_header_and_rows() {
        let set = DyadSet::from_aggregates([dyad("01", "02", 2, 2, 40)]).unwrap();
        let (reg, _) = Registry::from_records(vec![labeled("01"), labeled("02")]);
        let g = build_graph(&set, reg).unwrap();
        let mut buf = Vec::new();
        assert_eq!(write_ego_metrics(&mut buf, &g, b'\t').unwrap(), 2);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "01\t02\t4\t1\t0.5\t10");
    }
}
