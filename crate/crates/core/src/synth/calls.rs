use std::io::Write;

use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::{DurationModel, PersonId, SynthConfig, World};
use crate::error::Result;
use crate::ingest::RawCallRecord;
use crate::registry::Sex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DyadKind {
    ParentChild,
    Sibling,
    Spouse,
    Grandparent,
    AuntUncle,
    NonKin,
}

impl DyadKind {
    pub fn is_kin(self) -> bool {
        self != DyadKind::NonKin
    }
}

/// A maintained pair with its expected calls per year. `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaintainedDyad {
    pub a: PersonId,
    pub b: PersonId,
    pub kind: DyadKind,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CallEvent {
    pub origin: PersonId,
    pub destination: PersonId,
    pub timestamp: NaiveDateTime,
    pub duration_sec: u64,
}

fn ordered(x: PersonId, y: PersonId) -> (PersonId, PersonId) {
    if x < y {
        (x, y)
    } else {
        (y, x)
    }
}

fn kin_weight(cfg: &SynthConfig, kind: DyadKind) -> f64 {
    let w = &cfg.relation_weights;
    match kind {
        DyadKind::ParentChild => w.parent_child,
        DyadKind::Sibling => w.sibling,
        DyadKind::Spouse => w.spouse,
        DyadKind::Grandparent => w.grandparent,
        DyadKind::AuntUncle => w.aunt_uncle,
        DyadKind::NonKin => 1.0,
    }
}

fn kin_pairs(world: &World) -> Vec<(PersonId, PersonId, DyadKind)> {
    let mut out = Vec::new();
    for p in &world.people {
        for &c in &p.children {
            out.push((p.id, c, DyadKind::ParentChild));
            for &g in &world.person(c).children {
                out.push((p.id, g, DyadKind::Grandparent));
            }
        }
        for s in world.siblings(p.id) {
            if s > p.id {
                out.push((p.id, s, DyadKind::Sibling));
            }
            for &n in &world.person(s).children {
                out.push((p.id, n, DyadKind::AuntUncle));
            }
        }
        if let Some(s) = p.spouse {
            if s > p.id {
                out.push((p.id, s, DyadKind::Spouse));
            }
        }
    }
    out
}

fn nonkin_pairs(world: &World, rng: &mut ChaCha8Rng) -> Vec<(PersonId, PersonId)> {
    let cfg = &world.config;
    let holders: Vec<PersonId> = world.people.iter().filter(|p| p.has_phone).map(|p| p.id).collect();
    if holders.len() < 2 || cfg.nonkin_degree == 0.0 {
        return Vec::new();
    }
    let mut by_age: Vec<Vec<PersonId>> = vec![Vec::new(); 256];
    for &id in &holders {
        by_age[world.person(id).age as usize].push(id);
    }
    // each edge contributes to two degrees
    let per_person = Poisson::new(cfg.nonkin_degree / 2.0).expect("positive mean");
    let window = cfg.peer_age_window as i32;
    let mut out = Vec::new();
    for &id in &holders {
        let me = world.person(id);
        let k = per_person.sample(rng) as u32;
        for _ in 0..k {
            for _attempt in 0..8 {
                let other = if rng.random_bool(cfg.peer_fraction) {
                    let age = me.age as i32 + rng.random_range(-window..=window);
                    match by_age.get(age.clamp(0, 255) as usize) {
                        Some(bucket) if !bucket.is_empty() => bucket[rng.random_range(0..bucket.len())],
                        _ => continue,
                    }
                } else {
                    holders[rng.random_range(0..holders.len())]
                };
                if world.person(other).family != me.family {
                    out.push(ordered(id, other));
                    break;
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// All maintained dyads with at least one covered endpoint, sorted by
/// `(a, b)`.
pub fn maintained_dyads(world: &World) -> Vec<MaintainedDyad> {
    let cfg = &world.config;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);

    let mut kin: FxHashMap<(PersonId, PersonId), DyadKind> = FxHashMap::default();
    for (x, y, kind) in kin_pairs(world) {
        kin.entry(ordered(x, y)).or_insert(kind);
    }
    let mut dyads: Vec<MaintainedDyad> = kin
        .into_iter()
        .map(|((a, b), kind)| MaintainedDyad {
            a,
            b,
            kind,
            rate: cfg.base_call_rate * cfg.kin_rate_multiplier * kin_weight(cfg, kind),
        })
        .collect();
    dyads.sort_by_key(|d| (d.a, d.b));

    if cfg.aunt_preference > 0.0 {
        let index: FxHashMap<(PersonId, PersonId), usize> =
            dyads.iter().enumerate().map(|(i, d)| ((d.a, d.b), i)).collect();
        for p in &world.people {
            let Some(m) = p.mother else { continue };
            let aunts: Vec<PersonId> = world
                .siblings(m)
                .filter(|&s| world.person(s).sex == Sex::Female)
                .collect();
            if aunts.is_empty() || !rng.random_bool(cfg.aunt_preference) {
                continue;
            }
            let aunt = aunts[rng.random_range(0..aunts.len())];
            if let Some(&i) = index.get(&ordered(p.id, aunt)) {
                dyads[i].rate = cfg.base_call_rate
                    * cfg.kin_rate_multiplier
                    * cfg.relation_weights.parent_child
                    * cfg.aunt_preference_factor;
            }
        }
    }

    if let Some(boost) = &cfg.kin_boost {
        for d in &mut dyads {
            let younger = world.person(d.a).age.min(world.person(d.b).age);
            if (boost.min_age..=boost.max_age).contains(&younger) {
                d.rate *= boost.factor;
            }
        }
    }

    dyads.extend(nonkin_pairs(world, &mut rng).into_iter().map(|(a, b)| MaintainedDyad {
        a,
        b,
        kind: DyadKind::NonKin,
        rate: cfg.base_call_rate,
    }));
    dyads.retain(|d| {
        let (pa, pb) = (world.person(d.a), world.person(d.b));
        pa.has_phone && pb.has_phone && (pa.covered || pb.covered)
    });
    dyads.sort_by_key(|d| (d.a, d.b));
    dyads
}

enum Durations {
    Constant(u64),
    LogNormal(LogNormal<f64>),
}

impl Durations {
    fn new(m: DurationModel) -> Self {
        if m.sd == 0.0 {
            return Durations::Constant(m.mean.round() as u64);
        }
        let s2 = (1.0 + (m.sd / m.mean).powi(2)).ln();
        Durations::LogNormal(LogNormal::new(m.mean.ln() - s2 / 2.0, s2.sqrt()).expect("validated model"))
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        match self {
            Durations::Constant(c) => *c,
            Durations::LogNormal(d) => d.sample(rng).round() as u64,
        }
    }
}

/// Streams every generated call to `sink` in dyad order. Returns the call
/// count. Deterministic given the world's seed.
pub fn for_each_call<F: FnMut(&CallEvent) -> Result<()>>(world: &World, mut sink: F) -> Result<u64> {
    let cfg = &world.config;
    let dyads = maintained_dyads(world);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(2);
    let kin_d = Durations::new(cfg.kin_duration);
    let nonkin_d = Durations::new(cfg.nonkin_duration);
    let start = NaiveDate::from_ymd_opt(cfg.year, 1, 1).expect("validated").and_hms_opt(0, 0, 0).unwrap();
    let end = NaiveDate::from_ymd_opt(cfg.year + 1, 1, 1).expect("validated").and_hms_opt(0, 0, 0).unwrap();
    let year_secs = (end - start).num_seconds();
    let mut n = 0;
    for d in dyads {
        if d.rate <= 0.0 {
            continue;
        }
        let calls = Poisson::new(d.rate).expect("positive rate").sample(&mut rng) as u64;
        let durations = if d.kind.is_kin() { &kin_d } else { &nonkin_d };
        for _ in 0..calls {
            let (origin, destination) = if rng.random_bool(0.5) { (d.a, d.b) } else { (d.b, d.a) };
            let ev = CallEvent {
                origin,
                destination,
                timestamp: start + chrono::Duration::seconds(rng.random_range(0..year_secs)),
                duration_sec: durations.sample(&mut rng),
            };
            sink(&ev)?;
            n += 1;
        }
    }
    Ok(n)
}

pub fn generate_calls(world: &World) -> Vec<RawCallRecord> {
    let mut out = Vec::new();
    for_each_call(world, |ev| {
        out.push(RawCallRecord {
            origin: world.person(ev.origin).phone(),
            destination: world.person(ev.destination).phone(),
            timestamp: ev.timestamp,
            duration_sec: ev.duration_sec as i64,
        });
        Ok(())
    })
    .expect("sink is infallible");
    out
}

pub const CDR_HEADER: [&str; 4] = ["origin", "destination", "timestamp", "duration_sec"];

/// Writes the raw CDR format read by the ingest stage.
pub fn write_cdr<W: Write>(out: W, world: &World, delimiter: u8) -> Result<u64> {
    let mut w = std::io::BufWriter::with_capacity(1 << 20, out);
    let d = delimiter as char;
    writeln!(w, "{}", CDR_HEADER.join(&d.to_string()))?;
    let n = for_each_call(world, |ev| {
        let t = ev.timestamp;
        writeln!(
            w,
            "{}{d}{}{d}{:04}-{:02}-{:02} {:02}:{:02}:{:02}{d}{}",
            world.person(ev.origin).phone(),
            world.person(ev.destination).phone(),
            t.year(),
            t.month(),
            t.day(),
            t.hour(),
            t.minute(),
            t.second(),
            ev.duration_sec
        )?;
        Ok(())
    })?;
    w.flush()?;
    Ok(n)
}
