//! Stage runners. Each stage reads only documented files, writes its
//! artifacts atomically into the output directory and leaves a JSON
//! manifest next to them.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::graph::{build_graph, write_ego_metrics};
use crate::ingest::{ingest_path, read_dyads_path, write_dyads, IngestOptions};
use crate::kinclass::{classify_graph, confirmation_ratio, read_assignments, write_assignments, ConfirmationRow};
use crate::lifecourse::{build_tables, write_curves, write_stats, write_variation, VARIATION_TEST};
use crate::registry::{read_registry_path, resolve_family_contracts, write_registry, Registry};
use crate::synth::{generate_population, maintained_dyads, score_classifier, write_cdr, write_relations, write_score, GroundTruth};

pub const DYADS_FILE: &str = "dyads.tsv";
pub const EGO_METRICS_FILE: &str = "ego_metrics.tsv";
pub const ASSIGNMENTS_FILE: &str = "assignments.tsv";
pub const CONFIRMATION_FILE: &str = "confirmation.tsv";
pub const CURVES_FILE: &str = "curves.tsv";
pub const STATS_FILE: &str = "stats.tsv";
pub const VARIATION_FILE: &str = "variation.tsv";
pub const SCORE_FILE: &str = "score.tsv";
pub const SYNTH_CDR_FILE: &str = "calls.csv";
pub const SYNTH_REGISTRY_FILE: &str = "registry.tsv";
pub const SYNTH_RELATIONS_FILE: &str = "relations.tsv";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    /// Data rows, header excluded. Not counted for inputs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub stage: &'static str,
    pub seed: u64,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub counts: Value,
    pub config: RunConfig,
}

impl Manifest {
    pub fn output(&self, name: &str) -> Option<&FileRecord> {
        self.outputs.iter().find(|f| f.path == name)
    }
}

struct HashingWriter<W: Write> {
    inner: W,
    hasher: Sha256,
    lines: u64,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        self.lines += buf[..n].iter().filter(|&&c| c == b'\n').count() as u64;
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

type ArtifactWriter = HashingWriter<BufWriter<File>>;

/// Writes `dir/name` through a temporary file and a rename, so a reader
/// never sees a partial artifact.
fn write_atomic<F>(dir: &Path, name: &str, body: F) -> Result<FileRecord>
where
    F: FnOnce(&mut ArtifactWriter) -> Result<()>,
{
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let file = File::create(&tmp).map_err(|e| Error::at(&tmp, e))?;
    let mut w = HashingWriter {
        inner: BufWriter::with_capacity(1 << 20, file),
        hasher: Sha256::new(),
        lines: 0,
    };
    let written = body(&mut w).and_then(|()| {
        w.flush()?;
        Ok(())
    });
    if let Err(e) = written {
        let _ = std::fs::remove_file(&tmp);
        return Err(e);
    }
    let HashingWriter { inner, hasher, lines } = w;
    inner
        .into_inner()
        .map_err(|e| Error::at(&tmp, e.into_error()))?
        .sync_all()
        .map_err(|e| Error::at(&tmp, e))?;
    std::fs::rename(&tmp, &target).map_err(|e| Error::at(&target, e))?;
    Ok(FileRecord {
        path: name.to_owned(),
        sha256: hex::encode(hasher.finalize()),
        rows: Some(lines.saturating_sub(1)),
    })
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| Error::at(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 20];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::at(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

fn input_record(path: &Path) -> Result<FileRecord> {
    Ok(FileRecord {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
        rows: None,
    })
}

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::Config(format!("paths.{key} is not set")))
}

fn prepare(cfg: &RunConfig) -> Result<&Path> {
    cfg.validate()?;
    let out = cfg.paths.out.as_path();
    std::fs::create_dir_all(out).map_err(|e| Error::at(out, e))?;
    Ok(out)
}

fn finish(cfg: &RunConfig, stage: &'static str, inputs: Vec<FileRecord>, outputs: Vec<FileRecord>, counts: Value) -> Result<Manifest> {
    let m = Manifest {
        stage,
        seed: cfg.seed,
        inputs,
        outputs,
        counts,
        config: cfg.clone(),
    };
    write_manifest(&cfg.paths.out, &format!("manifest_{stage}.json"), &m)?;
    Ok(m)
}

fn write_manifest<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<FileRecord> {
    write_atomic(dir, name, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

/// Raw call records → dyad file.
pub fn run_ingest(cfg: &RunConfig) -> Result<Manifest> {
    let out = prepare(cfg)?;
    let cdr = required(&cfg.paths.cdr, "cdr")?;
    let input = input_record(cdr)?;
    let opts = IngestOptions {
        delimiter: cfg.cdr_delim(),
        workers: cfg.workers,
        window: cfg.window(),
        ..Default::default()
    };
    log::info!("ingesting {}", cdr.display());
    let (dyads, report) = ingest_path(cdr, &cfg.hasher()?, &opts)?;
    if dyads.total_calls() != report.accepted {
        return Err(Error::Corruption(format!(
            "{} calls aggregated from {} accepted records",
            dyads.total_calls(),
            report.accepted
        )));
    }
    let dyad_file = write_atomic(out, DYADS_FILE, |w| write_dyads(w, &dyads, cfg.table_delim()))?;
    let counts = json!({
        "accepted": report.accepted,
        "rejected": report.rejected,
        "rejected_total": report.rejected_total(),
        "dyads": dyads.len(),
        "calls": dyads.total_calls(),
        "seconds": dyads.total_sec(),
    });
    finish(cfg, "ingest", vec![input], vec![dyad_file], counts)
}

fn load_registry(cfg: &RunConfig) -> Result<(Registry, FileRecord, Value)> {
    let path = required(&cfg.paths.registry, "registry")?;
    let input = input_record(path)?;
    let (records, resolution) = resolve_family_contracts(read_registry_path(path, cfg.table_delim())?);
    let (registry, report) = Registry::from_records(records);
    let counts = json!({ "resolution": resolution, "registry": report });
    Ok((registry, input, counts))
}

const CONFIRMATION_HEADER: [&str; 6] = ["ego_age", "ego_sex", "slot", "kin", "quasi", "ratio"];

fn write_confirmation<W: Write>(out: W, rows: &[ConfirmationRow], delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
    w.write_record(CONFIRMATION_HEADER)?;
    for r in rows {
        w.write_record([
            r.ego_age.to_string(),
            r.ego_sex.to_string(),
            r.slot.to_string(),
            r.kin.to_string(),
            r.quasi.to_string(),
            crate::stats::fmt_real(r.ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Dyad file + registry → ego metrics, kin assignments, confirmation
/// ratios.
pub fn run_classify(cfg: &RunConfig) -> Result<Manifest> {
    let out = prepare(cfg)?;
    let dyad_path = out.join(DYADS_FILE);
    let dyad_input = input_record(&dyad_path)?;
    let (dyads, dyad_report) = read_dyads_path(&dyad_path, cfg.table_delim())?;
    let (registry, registry_input, registry_counts) = load_registry(cfg)?;
    let graph = build_graph(&dyads, registry)?;
    let specs = cfg.slot_specs()?;
    let (assignments, report) = classify_graph(&graph, &specs, cfg.workers)?;
    let d = cfg.table_delim();
    let metrics = write_atomic(out, EGO_METRICS_FILE, |w| write_ego_metrics(w, &graph, d).map(|_| ()))?;
    let assign = write_atomic(out, ASSIGNMENTS_FILE, |w| write_assignments(w, &assignments, d))?;
    let confirmation = confirmation_ratio(&assignments);
    let conf = write_atomic(out, CONFIRMATION_FILE, |w| write_confirmation(w, &confirmation, d))?;
    let counts = json!({
        "dyad_rows": dyad_report,
        "nodes": graph.node_count(),
        "edges": graph.edge_count(),
        "registry": registry_counts,
        "classify": report,
        "assignments": assignments.len(),
    });
    finish(cfg, "classify", vec![dyad_input, registry_input], vec![metrics, assign, conf], counts)
}

/// Assignments → life-course curves and the two test tables.
pub fn run_stats(cfg: &RunConfig) -> Result<Manifest> {
    let out = prepare(cfg)?;
    let path = out.join(ASSIGNMENTS_FILE);
    let input = input_record(&path)?;
    let f = File::open(&path).map_err(|e| Error::at(&path, e))?;
    let assignments = read_assignments(std::io::BufReader::new(f), cfg.table_delim())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let tables = pool.install(|| build_tables(&assignments, &cfg.lifecourse))?;
    let d = cfg.table_delim();
    let curves = write_atomic(out, CURVES_FILE, |w| write_curves(w, &tables.curves, d))?;
    let stats = write_atomic(out, STATS_FILE, |w| write_stats(w, &tables.stats, d))?;
    let variation = write_atomic(out, VARIATION_FILE, |w| write_variation(w, &tables.variation, d))?;
    let counts = json!({
        "assignments": assignments.len(),
        "curve_points": tables.curves.iter().map(|c| c.points.len()).sum::<usize>(),
        "stat_rows": tables.stats.len(),
        "variation_rows": tables.variation.len(),
        "variation_test": VARIATION_TEST,
        "balance": tables.balance,
        "omitted": tables.omitted,
    });
    finish(cfg, "stats", vec![input], vec![curves, stats, variation], counts)
}

/// Synthetic world → raw call records, registry and relations files.
pub fn run_synth(cfg: &RunConfig) -> Result<Manifest> {
    let out = prepare(cfg)?;
    let world = generate_population(&cfg.synth)?;
    let hasher = cfg.hasher()?;
    let records = world.registry_records(&hasher)?;
    let truth = GroundTruth::from_world(&world, &hasher)?;
    let mut calls = 0;
    let cdr = write_atomic(out, SYNTH_CDR_FILE, |w| {
        calls = write_cdr(w, &world, cfg.cdr_delim())?;
        Ok(())
    })?;
    let d = cfg.table_delim();
    let registry = write_atomic(out, SYNTH_REGISTRY_FILE, |w| write_registry(w, &records, d))?;
    let relations = write_atomic(out, SYNTH_RELATIONS_FILE, |w| write_relations(w, &truth, d))?;
    let counts = json!({
        "people": world.people.len(),
        "phone_holders": world.people.iter().filter(|p| p.has_phone).count(),
        "covered": world.people.iter().filter(|p| p.covered).count(),
        "maintained_dyads": maintained_dyads(&world).len(),
        "calls": calls,
    });
    finish(cfg, "synth", vec![], vec![cdr, registry, relations], counts)
}

/// Assignments + relations + registry → per-slot precision and recall.
pub fn run_score(cfg: &RunConfig) -> Result<Manifest> {
    let out = prepare(cfg)?;
    let assign_path = out.join(ASSIGNMENTS_FILE);
    let assign_input = input_record(&assign_path)?;
    let f = File::open(&assign_path).map_err(|e| Error::at(&assign_path, e))?;
    let assignments = read_assignments(std::io::BufReader::new(f), cfg.table_delim())?;
    let rel_path = required(&cfg.paths.relations, "relations")?;
    let rel_input = input_record(rel_path)?;
    let rf = File::open(rel_path).map_err(|e| Error::at(rel_path, e))?;
    let truth = crate::synth::read_relations(std::io::BufReader::new(rf), cfg.table_delim())?;
    let (registry, registry_input, _) = load_registry(cfg)?;
    let report = score_classifier(&assignments, &truth, &registry);
    let score = write_atomic(out, SCORE_FILE, |w| write_score(w, &report, cfg.table_delim()))?;
    let counts = serde_json::to_value(&report)?;
    finish(cfg, "score", vec![assign_input, rel_input, registry_input], vec![score], counts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub stages: Vec<Manifest>,
}

/// Runs the stages in order. With `synth`, a synthetic world is generated
/// first and used as input, and the classifier is scored against it.
pub fn run_all(cfg: &RunConfig, synth: bool) -> Result<RunSummary> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    let mut stages = Vec::new();
    if synth {
        stages.push(run_synth(&cfg)?);
        let out = cfg.paths.out.clone();
        cfg.paths.cdr = Some(out.join(SYNTH_CDR_FILE));
        cfg.paths.registry = Some(out.join(SYNTH_REGISTRY_FILE));
        cfg.paths.relations = Some(out.join(SYNTH_RELATIONS_FILE));
    }
    stages.push(run_ingest(&cfg)?);
    stages.push(run_classify(&cfg)?);
    stages.push(run_stats(&cfg)?);
    if cfg.paths.relations.is_some() {
        stages.push(run_score(&cfg)?);
    }
    let summary = RunSummary { stages };
    write_manifest(&cfg.paths.out, "manifest.json", &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp_and_counts_rows() {
        let dir = tempfile::tempdir().unwrap();
        let rec = write_atomic(dir.path(), "t.tsv", |w| {
            w.write_all(b"h\n1\n2\n")?;
            Ok(())
        })
        .unwrap();
        assert_eq!(rec.rows, Some(2));
        assert_eq!(rec.sha256, sha256_file(&dir.path().join("t.tsv")).unwrap());
        assert!(!dir.path().join(".t.tsv.tmp").exists());
    }

    #[test]
    fn failed_body_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let r = write_atomic(dir.path(), "t.tsv", |_| Err(Error::Contract("boom".into())));
        assert!(r.is_err());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn missing_input_is_an_error_and_invalid_config_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::default();
        cfg.paths.out = dir.path().join("out");
        cfg.paths.cdr = Some(dir.path().join("absent.csv"));
        assert!(matches!(run_ingest(&cfg), Err(Error::IoAt { .. })));

        cfg.paths.out = dir.path().join("out2");
        cfg.age_bounds.father_older = [42, 17];
        assert!(matches!(run_ingest(&cfg), Err(Error::Config(_))));
        assert!(!cfg.paths.out.exists());
    }
}
