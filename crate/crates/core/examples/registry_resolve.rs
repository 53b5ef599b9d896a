//! Family-plan resolution: only the oldest contract of an owner keeps its
//! metadata, the rest become grey nodes.

use kincall::registry::{read_registry, resolve_family_contracts, write_registry, Registry};

const REGISTRY: &str = "\
phone\tln_p\tln_m\tsex\tage\towner_id\tcontract\tcontract_start_date
71e61e625c967f98da69\tX1\tX10\tMale\t42\tadfr54kjhy5687lootek\tfamily\t2009-03-01
da1f483278cf73d22aa5\tX3\tX4\tFemale\t16\tadfr54kjhy5687lootek\tfamily\t2013-07-15
562a74c3d213871edf6b\tX24\tX5\tFemale\t20\toujh65dfhk87rfjih677\tindividual\t2014-01-01
bbb818a312f0fdb0771d\tX24\tX8\tMale\t47\tgp984asw12rcyy998rjh\tindividual\t
";

fn main() -> kincall::Result<()> {
    let records = read_registry(REGISTRY.as_bytes(), b'\t')?;
    let (resolved, resolution) = resolve_family_contracts(records);
    println!("{resolution:?}");

    let (registry, report) = Registry::from_records(resolved);
    println!("{report:?}\n");
    write_registry(std::io::stdout().lock(), registry.sorted_records(), b'\t')?;

    for phone in ["71e61e625c967f98da69", "da1f483278cf73d22aa5", "0000"] {
        let node = registry.lookup(&phone.parse()?);
        println!("{phone}: {}", if node.is_grey() { "grey" } else { "labeled" });
    }
    Ok(())
}
