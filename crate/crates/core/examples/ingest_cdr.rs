//! Raw call records in, one aggregate per unordered phone pair out.
//!
//! ```bash
//! cargo run --example ingest_cdr
//! ```

use kincall::hashing::PhoneHasher;
use kincall::ingest::{ingest_reader, write_dyads, IngestOptions};

const CDR: &str = "\
origin,destination,timestamp,duration_sec
+56911111111,+56922222222,2015-02-01 10:00:00,100
+56911111111,+56922222222,2015-03-14T18:30:00,200
+56911111111,+56922222222,2015-07-02 08:15:00,112
+56922222222,+56911111111,2015-07-03 21:00:00Z,100
+56933333333,+56911111111,2015-11-30 12:00:00,0
+56933333333,+56933333333,2015-05-05 05:05:05,60
+56944444444,+56911111111,2014-12-31 23:59:59,30
not-a-phone,+56911111111,2015-01-01 00:00:00,30
";

fn main() -> kincall::Result<()> {
    let hasher = PhoneHasher::new(b"example-salt", 20)?;
    let opts = IngestOptions { workers: 2, ..Default::default() };
    let (dyads, report) = ingest_reader(CDR.as_bytes(), &hasher, &opts)?;

    println!("accepted {} rejected {}", report.accepted, report.rejected_total());
    for (reason, n) in &report.rejected {
        println!("  {reason:?}: {n}");
    }
    write_dyads(std::io::stdout().lock(), &dyads, b'\t')?;
    Ok(())
}
