//! Every stage through files: synth, ingest, classify, stats, score.
//!
//! ```bash
//! cargo run --release --example end_to_end -- /tmp/kincall-run
//! ```

use std::path::PathBuf;

use kincall::config::RunConfig;
use kincall::pipeline::run_all;

fn main() -> kincall::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("kincall-example"));

    let mut cfg = RunConfig::from_toml(
        r#"
        seed = 2015
        workers = 2

        [synth]
        n_families = 1500
        coverage = 0.8

        [lifecourse]
        min_cohort_size = 10
        "#,
    )?;
    cfg.paths.out = out.clone();

    let summary = run_all(&cfg, true)?;
    for m in &summary.stages {
        let counts = m.counts.to_string();
        println!("{:<9} {}", m.stage, &counts[..counts.len().min(150)]);
        for f in &m.outputs {
            println!("          {} ({} rows) {}", f.path, f.rows.map_or("-".into(), |r| r.to_string()), &f.sha256[..12]);
        }
    }
    println!("\nartifacts in {}", out.display());
    Ok(())
}
