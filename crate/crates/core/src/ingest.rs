//! Raw call-record ingestion and dyad aggregation.
//!
//! Every accepted call lands in exactly one [`DyadCounts`] keyed by the
//! unordered pair of hashed phones. The key is stored with the smaller id
//! first; `out_calls` counts calls placed by that smaller id.
//!
//! Text ingestion splits the input into newline-aligned chunks and
//! aggregates them on a rayon pool. Counts are integer sums, so the result
//! does not depend on worker count, chunk boundaries or record order.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::{HashedId, PhoneHasher, PhoneRejection};

/// Half-open `[start, end)` interval that accepted timestamps must fall in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationWindow {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
}

impl ObservationWindow {
    /// One calendar year starting January 1st.
    pub fn calendar_year(year: i32) -> Self {
        let start = NaiveDate::from_ymd_opt(year, 1, 1)
            .and_then(|d| d.and_hms_opt(0, 0, 0))
            .expect("valid year start");
        let end = NaiveDate::from_ymd_opt(year + 1, 1, 1)
            .and_then(|d| d.and_hms_opt(0, 0, 0))
            .expect("valid year end");
        ObservationWindow { start, end }
    }

    pub fn contains(&self, t: &NaiveDateTime) -> bool {
        *t >= self.start && *t < self.end
    }
}

impl Default for ObservationWindow {
    fn default() -> Self {
        ObservationWindow::calendar_year(2015)
    }
}

/// One call as it leaves the switch: raw numbers, start time, duration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCallRecord {
    pub origin: String,
    pub destination: String,
    pub timestamp: NaiveDateTime,
    pub duration_sec: i64,
}

/// Record-level rejection classes. Rejected records are counted and skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    EmptyPhone,
    MalformedPhone,
    SelfCall,
    NegativeDuration,
    MalformedDuration,
    MalformedTimestamp,
    OutsideWindow,
    WrongFieldCount,
    MalformedId,
    EmptyDyad,
}

impl From<PhoneRejection> for RejectReason {
    fn from(r: PhoneRejection) -> Self {
        match r {
            PhoneRejection::Empty => RejectReason::EmptyPhone,
            PhoneRejection::Garbage => RejectReason::MalformedPhone,
        }
    }
}

/// Machine-readable tally of accepted and rejected input rows.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionReport {
    pub accepted: u64,
    pub rejected: BTreeMap<RejectReason, u64>,
}

impl RejectionReport {
    pub fn reject(&mut self, reason: RejectReason) {
        *self.rejected.entry(reason).or_insert(0) += 1;
    }

    pub fn rejected_total(&self) -> u64 {
        self.rejected.values().sum()
    }

    pub fn count(&self, reason: RejectReason) -> u64 {
        self.rejected.get(&reason).copied().unwrap_or(0)
    }

    pub fn absorb(&mut self, other: RejectionReport) {
        self.accepted += other.accepted;
        for (k, v) in other.rejected {
            *self.rejected.entry(k).or_insert(0) += v;
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DyadCounts {
    pub out_calls: u64,
    pub in_calls: u64,
    pub total_sec: u64,
}

impl DyadCounts {
    pub fn calls(&self) -> u64 {
        self.out_calls + self.in_calls
    }

    fn add(&mut self, other: &DyadCounts) {
        self.out_calls += other.out_calls;
        self.in_calls += other.in_calls;
        self.total_sec += other.total_sec;
    }
}

/// The edge record: call counts between two phones, oriented to `phone_a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadAggregate {
    pub phone_a: HashedId,
    pub phone_b: HashedId,
    pub out_calls: u64,
    pub in_calls: u64,
    pub total_sec: u64,
}

impl DyadAggregate {
    pub fn calls(&self) -> u64 {
        self.out_calls + self.in_calls
    }

    /// Re-orients a record so that `phone_a < phone_b`.
    pub fn canonical(self) -> Self {
        if self.phone_a <= self.phone_b {
            self
        } else {
            DyadAggregate {
                phone_a: self.phone_b,
                phone_b: self.phone_a,
                out_calls: self.in_calls,
                in_calls: self.out_calls,
                total_sec: self.total_sec,
            }
        }
    }

    /// The endpoint that is not `ego`, or `None` if `ego` is not on the dyad.
    pub fn other(&self, ego: &HashedId) -> Option<HashedId> {
        if *ego == self.phone_a {
            Some(self.phone_b)
        } else if *ego == self.phone_b {
            Some(self.phone_a)
        } else {
            None
        }
    }

    fn counts(&self) -> DyadCounts {
        DyadCounts {
            out_calls: self.out_calls,
            in_calls: self.in_calls,
            total_sec: self.total_sec,
        }
    }
}

/// One aggregate per unordered pair of hashed phones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DyadSet {
    map: FxHashMap<(HashedId, HashedId), DyadCounts>,
}

impl DyadSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Adds one call placed by `caller` to `callee`. Callers must have
    /// excluded self-calls.
    pub fn add_call(&mut self, caller: HashedId, callee: HashedId, duration_sec: u64) {
        debug_assert!(caller != callee);
        if caller < callee {
            let c = self.map.entry((caller, callee)).or_default();
            c.out_calls += 1;
            c.total_sec += duration_sec;
        } else {
            let c = self.map.entry((callee, caller)).or_default();
            c.in_calls += 1;
            c.total_sec += duration_sec;
        }
    }

    /// Inserts an aggregate in any orientation, summing with an existing
    /// entry for the same pair.
    pub fn insert(&mut self, dyad: DyadAggregate) -> Result<()> {
        if dyad.phone_a == dyad.phone_b {
            return Err(Error::Contract(format!(
                "dyad references itself: {}",
                dyad.phone_a
            )));
        }
        let d = dyad.canonical();
        self.map
            .entry((d.phone_a, d.phone_b))
            .or_default()
            .add(&d.counts());
        Ok(())
    }

    pub fn from_aggregates<I: IntoIterator<Item = DyadAggregate>>(iter: I) -> Result<Self> {
        let mut set = DyadSet::new();
        for d in iter {
            set.insert(d)?;
        }
        Ok(set)
    }

    /// Looks up a pair in either orientation; the result is canonical.
    pub fn get(&self, x: &HashedId, y: &HashedId) -> Option<DyadAggregate> {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        self.map.get(&(*a, *b)).map(|c| DyadAggregate {
            phone_a: *a,
            phone_b: *b,
            out_calls: c.out_calls,
            in_calls: c.in_calls,
            total_sec: c.total_sec,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = DyadAggregate> + '_ {
        self.map.iter().map(|(&(a, b), c)| DyadAggregate {
            phone_a: a,
            phone_b: b,
            out_calls: c.out_calls,
            in_calls: c.in_calls,
            total_sec: c.total_sec,
        })
    }

    /// All aggregates ordered by `(phone_a, phone_b)`.
    pub fn to_sorted_vec(&self) -> Vec<DyadAggregate> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable_by(|x, y| (x.phone_a, x.phone_b).cmp(&(y.phone_a, y.phone_b)));
        v
    }

    pub fn total_calls(&self) -> u64 {
        self.map.values().map(DyadCounts::calls).sum()
    }

    pub fn total_sec(&self) -> u64 {
        self.map.values().map(|c| c.total_sec).sum()
    }

    fn check_canonical(&self) -> Result<()> {
        match self.map.keys().find(|(a, b)| a >= b) {
            Some((a, b)) => Err(Error::Corruption(format!(
                "non-canonical dyad key ({a}, {b})"
            ))),
            None => Ok(()),
        }
    }

    fn absorb(&mut self, other: DyadSet) {
        if self.map.len() < other.map.len() {
            let mine = std::mem::replace(&mut self.map, other.map);
            for (k, v) in mine {
                self.map.entry(k).or_default().add(&v);
            }
        } else {
            for (k, v) in other.map {
                self.map.entry(k).or_default().add(&v);
            }
        }
    }
}

/// Field-wise sum of two shard results.
pub fn merge(part1: DyadSet, part2: DyadSet) -> Result<DyadSet> {
    part1.check_canonical()?;
    part2.check_canonical()?;
    let mut out = part1;
    out.absorb(part2);
    Ok(out)
}

/// Checks a parsed record and hashes its endpoints.
pub fn validate_record(
    rec: &RawCallRecord,
    hasher: &PhoneHasher,
    window: &ObservationWindow,
) -> std::result::Result<(HashedId, HashedId, u64), RejectReason> {
    let origin = hasher.hash_phone(&rec.origin)?;
    let destination = hasher.hash_phone(&rec.destination)?;
    if origin == destination {
        return Err(RejectReason::SelfCall);
    }
    if rec.duration_sec < 0 {
        return Err(RejectReason::NegativeDuration);
    }
    if !window.contains(&rec.timestamp) {
        return Err(RejectReason::OutsideWindow);
    }
    Ok((origin, destination, rec.duration_sec as u64))
}

/// Single-pass aggregation of an in-memory record stream.
pub fn aggregate<I>(
    records: I,
    hasher: &PhoneHasher,
    window: &ObservationWindow,
) -> (DyadSet, RejectionReport)
where
    I: IntoIterator<Item = RawCallRecord>,
{
    let mut set = DyadSet::new();
    let mut report = RejectionReport::default();
    for rec in records {
        match validate_record(&rec, hasher, window) {
            Ok((o, d, secs)) => {
                set.add_call(o, d, secs);
                report.accepted += 1;
            }
            Err(r) => report.reject(r),
        }
    }
    (set, report)
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub delimiter: u8,
    pub workers: usize,
    pub window: ObservationWindow,
    /// Target chunk size handed to a worker.
    pub chunk_bytes: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            delimiter: b',',
            workers: 1,
            window: ObservationWindow::default(),
            chunk_bytes: 1 << 22,
        }
    }
}

/// Parses `YYYY-MM-DDThh:mm:ss` (a space separator and a trailing `Z` are
/// also accepted).
pub fn parse_timestamp(s: &[u8]) -> Option<NaiveDateTime> {
    let s = match s.last() {
        Some(b'Z') => &s[..s.len() - 1],
        _ => s,
    };
    if s.len() != 19
        || s[4] != b'-'
        || s[7] != b'-'
        || !(s[10] == b'T' || s[10] == b' ')
        || s[13] != b':'
        || s[16] != b':'
    {
        return None;
    }
    let num = |r: std::ops::Range<usize>| -> Option<u32> {
        s[r].iter().try_fold(0u32, |acc, &c| {
            c.is_ascii_digit().then(|| acc * 10 + (c - b'0') as u32)
        })
    };
    let date = NaiveDate::from_ymd_opt(num(0..4)? as i32, num(5..7)?, num(8..10)?)?;
    date.and_hms_opt(num(11..13)?, num(14..16)?, num(17..19)?)
}

fn parse_duration(s: &[u8]) -> std::result::Result<u64, RejectReason> {
    let (neg, digits) = match s.first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    if digits.is_empty() || digits.len() > 18 || !digits.iter().all(u8::is_ascii_digit) {
        return Err(RejectReason::MalformedDuration);
    }
    let v = digits
        .iter()
        .fold(0u64, |acc, &c| acc * 10 + (c - b'0') as u64);
    if neg && v > 0 {
        return Err(RejectReason::NegativeDuration);
    }
    Ok(v)
}

fn trim(mut s: &[u8]) -> &[u8] {
    while let [first, rest @ ..] = s {
        if first.is_ascii_whitespace() {
            s = rest;
        } else {
            break;
        }
    }
    while let [rest @ .., last] = s {
        if last.is_ascii_whitespace() {
            s = rest;
        } else {
            break;
        }
    }
    s
}

fn parse_line(
    line: &[u8],
    delimiter: u8,
    hasher: &PhoneHasher,
    window: &ObservationWindow,
) -> std::result::Result<(HashedId, HashedId, u64), RejectReason> {
    let mut fields = line.split(|&c| c == delimiter);
    let (Some(origin), Some(dest), Some(ts), Some(dur), None) = (
        fields.next(),
        fields.next(),
        fields.next(),
        fields.next(),
        fields.next(),
    ) else {
        return Err(RejectReason::WrongFieldCount);
    };
    let origin = hasher.hash_phone_bytes(origin)?;
    let dest = hasher.hash_phone_bytes(dest)?;
    if origin == dest {
        return Err(RejectReason::SelfCall);
    }
    let secs = parse_duration(trim(dur))?;
    let ts = parse_timestamp(trim(ts)).ok_or(RejectReason::MalformedTimestamp)?;
    if !window.contains(&ts) {
        return Err(RejectReason::OutsideWindow);
    }
    Ok((origin, dest, secs))
}

fn aggregate_chunk(
    chunk: &[u8],
    opts: &IngestOptions,
    hasher: &PhoneHasher,
) -> (DyadSet, RejectionReport) {
    let mut set = DyadSet::new();
    let mut report = RejectionReport::default();
    for line in chunk.split(|&c| c == b'\n') {
        let line = match line.last() {
            Some(b'\r') => &line[..line.len() - 1],
            _ => line,
        };
        if trim(line).is_empty() {
            continue;
        }
        match parse_line(line, opts.delimiter, hasher, &opts.window) {
            Ok((o, d, secs)) => {
                set.add_call(o, d, secs);
                report.accepted += 1;
            }
            Err(r) => report.reject(r),
        }
    }
    (set, report)
}

fn is_header(line: &[u8], delimiter: u8) -> bool {
    let first = line.split(|&c| c == delimiter).next().unwrap_or_default();
    trim(first).eq_ignore_ascii_case(b"origin")
}

/// Aggregates delimited raw call records (`origin, destination, timestamp,
/// duration_sec`) from a reader. A leading header row is detected and
/// skipped. Output is independent of `opts.workers` and `opts.chunk_bytes`.
pub fn ingest_reader<R: Read>(
    reader: R,
    hasher: &PhoneHasher,
    opts: &IngestOptions,
) -> Result<(DyadSet, RejectionReport)> {
    if opts.workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let chunk_bytes = opts.chunk_bytes.max(1024);
    let batch_len = opts.workers * 4;

    let mut reader = BufReader::with_capacity(1 << 20, reader);
    let mut total = DyadSet::new();
    let mut report = RejectionReport::default();

    // header detection on the first line only
    let mut carry = Vec::new();
    reader.read_until(b'\n', &mut carry)?;
    if is_header(&carry, opts.delimiter) {
        carry.clear();
    }

    let mut eof = false;
    while !eof {
        let mut batch: Vec<Vec<u8>> = Vec::with_capacity(batch_len);
        while batch.len() < batch_len && !eof {
            let mut buf = std::mem::take(&mut carry);
            let start = buf.len();
            buf.resize(start + chunk_bytes, 0);
            let mut filled = start;
            while filled < buf.len() {
                let n = reader.read(&mut buf[filled..])?;
                if n == 0 {
                    eof = true;
                    break;
                }
                filled += n;
            }
            buf.truncate(filled);
            if !eof {
                match buf.iter().rposition(|&c| c == b'\n') {
                    Some(pos) => carry = buf.split_off(pos + 1),
                    None => {
                        // line longer than a chunk; keep reading into it
                        carry = buf;
                        continue;
                    }
                }
            }
            if !buf.is_empty() {
                batch.push(buf);
            }
        }
        let (set, rep) = pool.install(|| {
            batch
                .par_iter()
                .map(|chunk| aggregate_chunk(chunk, opts, hasher))
                .reduce(
                    || (DyadSet::new(), RejectionReport::default()),
                    |(mut s1, mut r1), (s2, r2)| {
                        s1.absorb(s2);
                        r1.absorb(r2);
                        (s1, r1)
                    },
                )
        });
        total.absorb(set);
        report.absorb(rep);
    }
    Ok((total, report))
}

pub fn ingest_path(
    path: &Path,
    hasher: &PhoneHasher,
    opts: &IngestOptions,
) -> Result<(DyadSet, RejectionReport)> {
    let f = File::open(path).map_err(|e| Error::at(path, e))?;
    ingest_reader(f, hasher, opts)
}

pub const DYAD_HEADER: [&str; 5] = ["Phone_A", "Phone_B", "OutCalls", "InCalls", "Sec"];

/// Writes the dyad file sorted by `(phone_a, phone_b)`.
pub fn write_dyads<W: Write>(out: W, dyads: &DyadSet, delimiter: u8) -> Result<()> {
    let mut w = std::io::BufWriter::with_capacity(1 << 20, out);
    let d = delimiter as char;
    writeln!(w, "{}", DYAD_HEADER.join(&d.to_string()))?;
    for r in dyads.to_sorted_vec() {
        writeln!(
            w,
            "{}{d}{}{d}{}{d}{}{d}{}",
            r.phone_a, r.phone_b, r.out_calls, r.in_calls, r.total_sec
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a pre-aggregated dyad file (`Phone_A, Phone_B, OutCalls, InCalls,
/// Sec`). Rows in either orientation are canonicalized; repeated pairs are
/// summed. Self-dyads, zero-call rows and malformed rows are counted and
/// skipped.
pub fn read_dyads<R: Read>(input: R, delimiter: u8) -> Result<(DyadSet, RejectionReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let mut set = DyadSet::new();
    let mut report = RejectionReport::default();
    for row in rdr.records() {
        let row = row?;
        if row.len() != 5 {
            report.reject(RejectReason::WrongFieldCount);
            continue;
        }
        let ids = (row[0].parse::<HashedId>(), row[1].parse::<HashedId>());
        let (Ok(a), Ok(b)) = ids else {
            report.reject(RejectReason::MalformedId);
            continue;
        };
        let nums: Option<Vec<u64>> = (2..5).map(|i| row[i].trim().parse().ok()).collect();
        let Some(nums) = nums else {
            report.reject(RejectReason::MalformedDuration);
            continue;
        };
        if a == b {
            report.reject(RejectReason::SelfCall);
            continue;
        }
        if nums[0] + nums[1] == 0 {
            report.reject(RejectReason::EmptyDyad);
            continue;
        }
        set.insert(DyadAggregate {
            phone_a: a,
            phone_b: b,
            out_calls: nums[0],
            in_calls: nums[1],
            total_sec: nums[2],
        })?;
        report.accepted += 1;
    }
    Ok((set, report))
}

pub fn read_dyads_path(path: &Path, delimiter: u8) -> Result<(DyadSet, RejectionReport)> {
    let f = File::open(path).map_err(|e| Error::at(path, e))?;
    read_dyads(BufReader::new(f), delimiter)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> NaiveDateTime {
        parse_timestamp(s.as_bytes()).unwrap()
    }

    fn call(o: &str, d: &str, secs: i64) -> RawCallRecord {
        RawCallRecord {
            origin: o.into(),
            destination: d.into(),
            timestamp: ts("2015-06-01T12:00:00"),
            duration_sec: secs,
        }
    }

    fn hasher() -> PhoneHasher {
        PhoneHasher::new(b"unit", 20).unwrap()
    }

    #[test]
    fn three_out_one_in_gives_512_seconds() {
        let h = hasher();
        let recs = vec![
            call("+100", "+200", 100),
            call("+100", "+200", 200),
            call("+100", "+200", 112),
            call("+200", "+100", 100),
        ];
        let (set, rep) = aggregate(recs, &h, &ObservationWindow::default());
        assert_eq!(rep.accepted, 4);
        assert_eq!(set.len(), 1);
        let a = h.hash_phone("+100").unwrap();
        let b = h.hash_phone("+200").unwrap();
        let d = set.get(&a, &b).unwrap();
        assert_eq!(d.total_sec, 512);
        let (out_a, in_a) = if d.phone_a == a {
            (d.out_calls, d.in_calls)
        } else {
            (d.in_calls, d.out_calls)
        };
        assert_eq!((out_a, in_a), (3, 1));
    }

    #[test]
    fn empty_stream_is_empty_set() {
        let (set, rep) = aggregate(Vec::new(), &hasher(), &ObservationWindow::default());
        assert!(set.is_empty());
        assert_eq!(rep, RejectionReport::default());
    }

    #[test]
    fn zero_duration_call_is_kept() {
        let h = hasher();
        let (set, _) = aggregate(vec![call("+1", "+2", 0)], &h, &ObservationWindow::default());
        let d = set.iter().next().unwrap();
        assert_eq!(d.calls(), 1);
        assert_eq!(d.total_sec, 0);
    }

    #[test]
    fn self_calls_negative_durations_and_window_are_counted() {
        let h = hasher();
        let mut late = call("+1", "+2", 5);
        late.timestamp = ts("2016-01-01T00:00:00");
        let recs = vec![
            call("+1", "+1", 5),
            call("+1", " +(1)", 5),
            call("+1", "+2", -3),
            call("", "+2", 3),
            call("abc", "+2", 3),
            late,
            call("+1", "+2", 7),
        ];
        let (set, rep) = aggregate(recs, &h, &ObservationWindow::default());
        assert_eq!(rep.accepted, 1);
        assert_eq!(rep.count(RejectReason::SelfCall), 2);
        assert_eq!(rep.count(RejectReason::NegativeDuration), 1);
        assert_eq!(rep.count(RejectReason::EmptyPhone), 1);
        assert_eq!(rep.count(RejectReason::MalformedPhone), 1);
        assert_eq!(rep.count(RejectReason::OutsideWindow), 1);
        assert_eq!(set.total_calls(), 1);
    }

    #[test]
    fn merge_identity_and_sum() {
        let h = hasher();
        let (x, _) = aggregate(vec![call("+1", "+2", 10)], &h, &ObservationWindow::default());
        assert_eq!(merge(x.clone(), DyadSet::new()).unwrap(), x);
        let both = merge(x.clone(), x.clone()).unwrap();
        let d = both.iter().next().unwrap();
        assert_eq!(d.calls(), 2);
        assert_eq!(d.total_sec, 20);
    }

    #[test]
    fn merge_rejects_non_canonical_keys() {
        let a: HashedId = "aa".parse().unwrap();
        let b: HashedId = "bb".parse().unwrap();
        let mut bad = DyadSet::new();
        bad.map.insert((b, a), DyadCounts::default());
        assert!(matches!(
            merge(bad, DyadSet::new()),
            Err(Error::Corruption(_))
        ));
    }

    #[test]
    fn text_ingest_matches_in_memory_and_skips_header() {
        let h = hasher();
        let text = "origin,destination,timestamp,duration_sec\n\
                    +1,+2,2015-01-01T00:00:00,10\n\
                    +2,+1,2015-12-31 23:59:59,5\r\n\
                    +1,+3,2015-02-30T00:00:00,5\n\
                    +1,+3,2015-02-03T00:00:00\n\
                    +1,+3,2015-02-03T00:00:00,x\n\
                    \n\
                    +3,+1,2015-02-03T00:00:00Z,-0\n";
        let (set, rep) = ingest_reader(text.as_bytes(), &h, &IngestOptions::default()).unwrap();
        assert_eq!(rep.accepted, 3);
        assert_eq!(rep.count(RejectReason::MalformedTimestamp), 1);
        assert_eq!(rep.count(RejectReason::WrongFieldCount), 1);
        assert_eq!(rep.count(RejectReason::MalformedDuration), 1);
        assert_eq!(set.len(), 2);
        assert_eq!(set.total_sec(), 15);
    }

    #[test]
    fn tiny_chunks_and_long_lines_are_handled() {
        let h = hasher();
        let mut text = String::new();
        for i in 0..500 {
            text.push_str(&format!(
                "+{},+{},2015-03-01T10:00:00,{}\n",
                i % 7,
                (i % 5) + 10,
                i
            ));
        }
        let base = ingest_reader(text.as_bytes(), &h, &IngestOptions::default()).unwrap();
        let opts = IngestOptions {
            workers: 3,
            chunk_bytes: 1,
            ..Default::default()
        };
        let small = ingest_reader(text.as_bytes(), &h, &opts).unwrap();
        assert_eq!(base, small);
        assert_eq!(base.1.accepted, 500);
    }

    #[test]
    fn dyad_file_roundtrip_is_sorted_and_canonical() {
        let text = "Phone_A\tPhone_B\tOutCalls\tInCalls\tSec\n\
                    71e61e625c967f98da69\tbbb818a312f0fdb0771d\t3\t1\t512\n\
                    da1f483278cf73d22aa5\t562a74c3d213871edf6b\t1\t1\t333\n\
                    71e61e625c967f98da69\t562a74c3d213871edf6b\t1\t0\t957\n";
        let (set, rep) = read_dyads(text.as_bytes(), b'\t').unwrap();
        assert_eq!(rep.accepted, 3);
        let mut out = Vec::new();
        write_dyads(&mut out, &set, b'\t').unwrap();
        let out = String::from_utf8(out).unwrap();
        let lines: Vec<_> = out.lines().collect();
        assert_eq!(lines[0], "Phone_A\tPhone_B\tOutCalls\tInCalls\tSec");
        assert_eq!(lines[1], "562a74c3d213871edf6b\t71e61e625c967f98da69\t0\t1\t957");
        assert_eq!(lines[2], "562a74c3d213871edf6b\tda1f483278cf73d22aa5\t1\t1\t333");
        assert_eq!(lines[3], "71e61e625c967f98da69\tbbb818a312f0fdb0771d\t3\t1\t512");
        let (again, _) = read_dyads(out.as_bytes(), b'\t').unwrap();
        assert_eq!(again, set);
    }

    #[test]
    fn dyad_file_bad_rows_are_counted() {
        let text = "Phone_A,Phone_B,OutCalls,InCalls,Sec\n\
                    aa,aa,1,0,3\n\
                    aa,bb,0,0,0\n\
                    zz,bb,1,0,3\n\
                    aa,bb,x,0,3\n\
                    aa,bb,1\n\
                    aa,bb,1,0,3\n";
        let (set, rep) = read_dyads(text.as_bytes(), b',').unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(rep.accepted, 1);
        assert_eq!(rep.rejected_total(), 5);
    }
}
