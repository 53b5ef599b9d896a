//! Per-dyad metrics from each ego's point of view.

use kincall::graph::{build_graph, ego_network, write_ego_metrics};
use kincall::ingest::read_dyads;
use kincall::registry::{read_registry, Registry};

const DYADS: &str = "\
Phone_A\tPhone_B\tOutCalls\tInCalls\tSec
71e61e625c967f98da69\tbbb818a312f0fdb0771d\t3\t1\t512
da1f483278cf73d22aa5\t562a74c3d213871edf6b\t1\t1\t333
71e61e625c967f98da69\t562a74c3d213871edf6b\t1\t0\t957
";

const REGISTRY: &str = "\
phone\tln_p\tln_m\tsex\tage\towner_id\tcontract\tcontract_start_date
71e61e625c967f98da69\tX1\tX10\tMale\t42\tadfr54kjhy5687lootek\tfamily\t2009-03-01
562a74c3d213871edf6b\tX24\tX5\tFemale\t20\toujh65dfhk87rfjih677\tindividual\t2014-01-01
";

fn main() -> kincall::Result<()> {
    let (dyads, _) = read_dyads(DYADS.as_bytes(), b'\t')?;
    let (registry, _) = Registry::from_records(read_registry(REGISTRY.as_bytes(), b'\t')?);
    let graph = build_graph(&dyads, registry)?;
    println!("{} nodes, {} edges", graph.node_count(), graph.edge_count());

    let ego = "71e61e625c967f98da69".parse()?;
    let net = ego_network(&graph, &ego).expect("labeled ego with calls");
    for a in &net.alters {
        let m = a.metrics;
        println!(
            "{} -> {}: frequency {} frac_of_time {:.3} out_call_frac {:.2} call_length {:.1}",
            ego, a.phone, m.frequency, m.frac_of_time, m.out_call_frac, m.call_length
        );
    }
    println!();
    write_ego_metrics(std::io::stdout().lock(), &graph, b'\t')?;
    Ok(())
}
