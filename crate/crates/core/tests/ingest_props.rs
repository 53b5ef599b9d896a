use chrono::NaiveDate;
use kincall::hashing::PhoneHasher;
use kincall::ingest::{aggregate, ingest_reader, merge, write_dyads, DyadSet, IngestOptions, ObservationWindow, RawCallRecord};
use proptest::prelude::*;

fn hasher() -> PhoneHasher {
    PhoneHasher::new(b"props", 20).unwrap()
}

fn record(o: u8, d: u8, secs: u32) -> RawCallRecord {
    RawCallRecord {
        origin: format!("+5690000{o:04}"),
        destination: format!("+5690000{d:04}"),
        timestamp: NaiveDate::from_ymd_opt(2015, 3, 1).unwrap().and_hms_opt(9, 0, 0).unwrap(),
        duration_sec: secs as i64,
    }
}

fn calls() -> impl Strategy<Value = Vec<(u8, u8, u32)>> {
    prop::collection::vec((0u8..12, 0u8..12, 0u32..2000), 0..200)
}

fn agg(rows: &[(u8, u8, u32)]) -> DyadSet {
    aggregate(rows.iter().map(|&(o, d, s)| record(o, d, s)), &hasher(), &ObservationWindow::default()).0
}

fn text(rows: &[(u8, u8, u32)]) -> String {
    let mut s = String::from("origin,destination,timestamp,duration_sec\n");
    for &(o, d, secs) in rows {
        s.push_str(&format!("+5690000{o:04},+5690000{d:04},2015-03-01 09:00:00,{secs}\n"));
    }
    s
}

fn file(set: &DyadSet) -> Vec<u8> {
    let mut out = Vec::new();
    write_dyads(&mut out, set, b'\t').unwrap();
    out
}

proptest! {
    #[test]
    fn shuffled_input_gives_identical_dyads(rows in calls(), seed in any::<u64>()) {
        let mut shuffled = rows.clone();
        let mut state = seed | 1;
        for i in (1..shuffled.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            shuffled.swap(i, (state % (i as u64 + 1)) as usize);
        }
        prop_assert_eq!(file(&agg(&rows)), file(&agg(&shuffled)));
    }

    #[test]
    fn merged_shards_equal_single_pass(rows in calls(), cut1 in 0usize..200, cut2 in 0usize..200) {
        let (i, j) = (cut1.min(cut2).min(rows.len()), cut1.max(cut2).min(rows.len()));
        let (a, b, c) = (agg(&rows[..i]), agg(&rows[i..j]), agg(&rows[j..]));
        let left = merge(merge(a.clone(), b.clone()).unwrap(), c.clone()).unwrap();
        let right = merge(a.clone(), merge(b.clone(), c.clone()).unwrap()).unwrap();
        let whole = agg(&rows);
        prop_assert_eq!(&left, &whole);
        prop_assert_eq!(&right, &whole);
        prop_assert_eq!(merge(b, a).unwrap(), merge(agg(&rows[..i]), agg(&rows[i..j])).unwrap());
        prop_assert_eq!(merge(c.clone(), DyadSet::new()).unwrap(), c);
    }

    #[test]
    fn conservation_and_canonical_orientation(rows in calls()) {
        let (set, report) = aggregate(rows.iter().map(|&(o, d, s)| record(o, d, s)), &hasher(), &ObservationWindow::default());
        let accepted: Vec<_> = rows.iter().filter(|r| r.0 != r.1).collect();
        prop_assert_eq!(report.accepted, accepted.len() as u64);
        prop_assert_eq!(set.total_calls(), report.accepted);
        prop_assert_eq!(set.total_sec(), accepted.iter().map(|r| r.2 as u64).sum::<u64>());
        for d in set.iter() {
            prop_assert!(d.phone_a < d.phone_b);
            prop_assert!(d.calls() >= 1);
        }
    }

    #[test]
    fn workers_and_chunking_do_not_change_output(rows in calls(), workers in 1usize..5, chunk in 1usize..4096) {
        let t = text(&rows);
        let base = ingest_reader(t.as_bytes(), &hasher(), &IngestOptions::default()).unwrap();
        let opts = IngestOptions { workers, chunk_bytes: chunk, ..Default::default() };
        let other = ingest_reader(t.as_bytes(), &hasher(), &opts).unwrap();
        prop_assert_eq!(file(&base.0), file(&other.0));
        prop_assert_eq!(base.1, other.1);
        prop_assert_eq!(&base.0, &agg(&rows));
    }
}

#[test]
fn zero_second_call_is_kept() {
    let set = agg(&[(1, 2, 0)]);
    let d = set.iter().next().unwrap();
    assert_eq!((d.calls(), d.total_sec), (1, 0));
}

#[test]
fn empty_stream_is_empty() {
    assert!(agg(&[]).is_empty());
    let (set, report) = ingest_reader("".as_bytes(), &hasher(), &IngestOptions::default()).unwrap();
    assert!(set.is_empty());
    assert_eq!(report.accepted, 0);
}
