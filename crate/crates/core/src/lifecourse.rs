//! Life-course curves, cohort balancing and the kin vs. quasi-kin test
//! tables.
//!
//! A cohort is `(ego age, ego sex, slot)`. Balancing subsamples the quasi
//! side of each cohort down to the kin side's size so that pooled tests are
//! not dominated by the ages where quasi contacts are plentiful.

use std::collections::BTreeMap;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::Metric;
use crate::kinclass::{KinAssignment, Slot};
use crate::registry::Sex;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kinship {
    Kin,
    Quasi,
}

impl Kinship {
    pub fn of(a: &KinAssignment) -> Kinship {
        if a.category.is_kin() {
            Kinship::Kin
        } else {
            Kinship::Quasi
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CohortKey {
    pub ego_age: u8,
    pub ego_sex: Sex,
    pub slot: Slot,
    pub kinship: Kinship,
}

impl CohortKey {
    pub fn of(a: &KinAssignment) -> CohortKey {
        CohortKey {
            ego_age: a.ego_age,
            ego_sex: a.ego_sex,
            slot: a.slot,
            kinship: Kinship::of(a),
        }
    }
}

/// Ego-age binning: `[min_age, max_age]` in bins of `width` years, each
/// labeled by its lower edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgeBins {
    pub min_age: u8,
    pub max_age: u8,
    pub width: u8,
}

impl Default for AgeBins {
    fn default() -> Self {
        AgeBins {
            min_age: 18,
            max_age: 70,
            width: 1,
        }
    }
}

impl AgeBins {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 {
            return Err(Error::Config("age bin width must be positive".into()));
        }
        if self.min_age > self.max_age {
            return Err(Error::Config(format!(
                "age bins: min {} > max {}",
                self.min_age, self.max_age
            )));
        }
        Ok(())
    }

    pub fn bin(&self, age: u8) -> Option<u8> {
        (self.min_age..=self.max_age)
            .contains(&age)
            .then(|| self.min_age + (age - self.min_age) / self.width * self.width)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LifecourseConfig {
    pub bins: AgeBins,
    /// Minimum kin and quasi observations for an age bin to count.
    pub min_cohort_size: usize,
    pub downsample: bool,
    /// Set from the run-level seed.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for LifecourseConfig {
    fn default() -> Self {
        LifecourseConfig {
            bins: AgeBins::default(),
            min_cohort_size: 30,
            downsample: true,
            seed: 2015,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedCohort {
    pub ego_age: u8,
    pub ego_sex: Sex,
    pub slot: Slot,
    pub kin: usize,
    pub quasi: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub cohorts: usize,
    pub downsampled: usize,
    pub quasi_removed: usize,
    /// Cohorts where quasi was already smaller than kin; left as is.
    pub quasi_smaller: Vec<FlaggedCohort>,
}

fn cohort_seed(seed: u64, age: u8, sex: Sex, slot: Slot) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update([age, sex as u8, slot as u8]);
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Subsamples, without replacement, the quasi group of every
/// `(age, sex, slot)` cohort down to its kin group's size. Kin are never
/// dropped. Each cohort draws from its own RNG seeded from `(seed, cohort)`,
/// and candidates are ordered by `(ego, alter)` first, so the kept set does
/// not depend on input order. Output keeps input order.
pub fn downsample_balance(assignments: &[KinAssignment], seed: u64) -> (Vec<KinAssignment>, BalanceReport) {
    let mut cohorts: BTreeMap<(u8, Sex, Slot), (usize, Vec<usize>)> = BTreeMap::new();
    for (i, a) in assignments.iter().enumerate() {
        let c = cohorts.entry((a.ego_age, a.ego_sex, a.slot)).or_default();
        match Kinship::of(a) {
            Kinship::Kin => c.0 += 1,
            Kinship::Quasi => c.1.push(i),
        }
    }
    let mut report = BalanceReport {
        cohorts: cohorts.len(),
        ..Default::default()
    };
    let mut keep = vec![true; assignments.len()];
    for ((age, sex, slot), (kin, mut quasi)) in cohorts {
        if quasi.len() < kin {
            report.quasi_smaller.push(FlaggedCohort {
                ego_age: age,
                ego_sex: sex,
                slot,
                kin,
                quasi: quasi.len(),
            });
            continue;
        }
        if quasi.len() == kin {
            continue;
        }
        quasi.sort_by_key(|&i| (assignments[i].ego, assignments[i].alter));
        let mut rng = ChaCha8Rng::seed_from_u64(cohort_seed(seed, age, sex, slot));
        let mut chosen = vec![false; quasi.len()];
        for k in rand::seq::index::sample(&mut rng, quasi.len(), kin) {
            chosen[k] = true;
        }
        for (k, &i) in quasi.iter().enumerate() {
            if !chosen[k] {
                keep[i] = false;
                report.quasi_removed += 1;
            }
        }
        report.downsampled += 1;
    }
    let kept = assignments
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(a, _)| *a)
        .collect();
    (kept, report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Lower edge of the age bin.
    pub age: u8,
    pub kin_mean: f64,
    pub quasi_mean: f64,
    pub difference: f64,
    pub n_kin: usize,
    pub n_quasi: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifeCourseCurve {
    pub metric: Metric,
    pub slot: Slot,
    pub ego_sex: Sex,
    pub points: Vec<CurvePoint>,
}

/// One table cell: a metric for one slot and ego sex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub metric: Metric,
    pub slot: Slot,
    pub ego_sex: Sex,
}

pub fn all_cells() -> Vec<Cell> {
    let mut v = Vec::with_capacity(32);
    for metric in Metric::ALL {
        for slot in Slot::ALL {
            for ego_sex in [Sex::Female, Sex::Male] {
                v.push(Cell { metric, slot, ego_sex });
            }
        }
    }
    v
}

/// Per-bin values of one cell, split by kinship.
#[derive(Debug, Default)]
struct CellSamples {
    by_bin: BTreeMap<u8, (Vec<f64>, Vec<f64>)>,
}

impl CellSamples {
    fn collect(assignments: &[KinAssignment], cell: Cell, bins: &AgeBins) -> Self {
        let mut s = CellSamples::default();
        for a in assignments {
            if a.slot != cell.slot || a.ego_sex != cell.ego_sex {
                continue;
            }
            let Some(bin) = bins.bin(a.ego_age) else { continue };
            let v = a.metrics.get(cell.metric);
            let entry = s.by_bin.entry(bin).or_default();
            match Kinship::of(a) {
                Kinship::Kin => entry.0.push(v),
                Kinship::Quasi => entry.1.push(v),
            }
        }
        s
    }

    fn pooled(&self) -> (Vec<f64>, Vec<f64>) {
        let mut kin = Vec::new();
        let mut quasi = Vec::new();
        for (k, q) in self.by_bin.values() {
            kin.extend_from_slice(k);
            quasi.extend_from_slice(q);
        }
        (kin, quasi)
    }

    fn points(&self, min_cohort: usize) -> Vec<CurvePoint> {
        self.by_bin
            .iter()
            .filter(|(_, (k, q))| k.len() >= min_cohort.max(1) && q.len() >= min_cohort.max(1))
            .map(|(&age, (k, q))| {
                let kin_mean = stats::mean(k).expect("non-empty");
                let quasi_mean = stats::mean(q).expect("non-empty");
                CurvePoint {
                    age,
                    kin_mean,
                    quasi_mean,
                    difference: kin_mean - quasi_mean,
                    n_kin: k.len(),
                    n_quasi: q.len(),
                }
            })
            .collect()
    }
}

/// Life-course curves, one per cell; only bins where both groups reach
/// `min_cohort_size` carry a point.
pub fn life_course_curves(assignments: &[KinAssignment], cfg: &LifecourseConfig) -> Vec<LifeCourseCurve> {
    all_cells()
        .into_par_iter()
        .map(|cell| LifeCourseCurve {
            metric: cell.metric,
            slot: cell.slot,
            ego_sex: cell.ego_sex,
            points: CellSamples::collect(assignments, cell, &cfg.bins).points(cfg.min_cohort_size),
        })
        .collect()
}

/// One row of the distribution-comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub metric: Metric,
    pub slot: Slot,
    pub ego_sex: Sex,
    pub ks_stat: f64,
    pub ks_p: f64,
    pub kin_mean: f64,
    pub quasi_mean: f64,
    pub kin_median: f64,
    pub quasi_median: f64,
    pub t_p: f64,
    pub mwu_p: f64,
    pub n_kin: usize,
    pub n_quasi: usize,
}

fn stat_row(cell: Cell, kin: &[f64], quasi: &[f64]) -> Result<StatRow> {
    let ks = stats::ks_statistic(kin, quasi)?;
    let welch = stats::welch_t_test(kin, quasi)?;
    let mwu = stats::mann_whitney_u(kin, quasi)?;
    Ok(StatRow {
        metric: cell.metric,
        slot: cell.slot,
        ego_sex: cell.ego_sex,
        ks_stat: ks.statistic,
        ks_p: ks.p_value,
        kin_mean: stats::mean(kin).expect("non-empty"),
        quasi_mean: stats::mean(quasi).expect("non-empty"),
        kin_median: stats::median(kin).expect("non-empty"),
        quasi_median: stats::median(quasi).expect("non-empty"),
        t_p: welch.p_value,
        mwu_p: mwu.p_value,
        n_kin: kin.len(),
        n_quasi: quasi.len(),
    })
}

/// Life-course variation of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationRow {
    pub metric: Metric,
    pub slot: Slot,
    pub ego_sex: Sex,
    pub kin_sd_of_age_means: f64,
    pub quasi_sd_of_age_means: f64,
    /// Two-sided F test on the variances of the two per-age mean series.
    pub p_value: f64,
    pub kin_total_sd: f64,
    pub quasi_total_sd: f64,
    pub n_ages: usize,
}

pub const VARIATION_TEST: &str = "two-sample F test on per-age mean series";

fn variation_row(cell: Cell, samples: &CellSamples, min_cohort: usize) -> Result<Option<VariationRow>> {
    let points = samples.points(min_cohort);
    if points.len() < 3 {
        return Ok(None);
    }
    let kin_means: Vec<f64> = points.iter().map(|p| p.kin_mean).collect();
    let quasi_means: Vec<f64> = points.iter().map(|p| p.quasi_mean).collect();
    let f = stats::variance_ratio_test(&kin_means, &quasi_means)?;
    let (kin, quasi) = samples.pooled();
    Ok(Some(VariationRow {
        metric: cell.metric,
        slot: cell.slot,
        ego_sex: cell.ego_sex,
        kin_sd_of_age_means: stats::std_dev(&kin_means).expect(">= 3 points"),
        quasi_sd_of_age_means: stats::std_dev(&quasi_means).expect(">= 3 points"),
        p_value: f.p_value,
        kin_total_sd: stats::std_dev(&kin).unwrap_or(0.0),
        quasi_total_sd: stats::std_dev(&quasi).unwrap_or(0.0),
        n_ages: points.len(),
    }))
}

/// Variation rows for every cell with at least three populated age bins.
pub fn variation_table(assignments: &[KinAssignment], cfg: &LifecourseConfig) -> Result<Vec<VariationRow>> {
    let rows: Result<Vec<_>> = all_cells()
        .into_par_iter()
        .map(|cell| {
            let s = CellSamples::collect(assignments, cell, &cfg.bins);
            variation_row(cell, &s, cfg.min_cohort_size)
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmittedRow {
    pub table: String,
    pub metric: Metric,
    pub slot: Slot,
    pub ego_sex: Sex,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tables {
    pub curves: Vec<LifeCourseCurve>,
    pub stats: Vec<StatRow>,
    pub variation: Vec<VariationRow>,
    pub balance: Option<BalanceReport>,
    pub omitted: Vec<OmittedRow>,
}

/// Curves from all assignments; test tables from the balanced set when
/// downsampling is on. Rows are in cell order (metric, slot, ego sex).
pub fn build_tables(assignments: &[KinAssignment], cfg: &LifecourseConfig) -> Result<Tables> {
    cfg.bins.validate()?;
    let curves = life_course_curves(assignments, cfg);
    let (balanced, balance) = if cfg.downsample {
        let (b, r) = downsample_balance(assignments, cfg.seed);
        (b, Some(r))
    } else {
        (assignments.to_vec(), None)
    };

    let per_cell: Vec<(Cell, Result<Option<StatRow>>, Result<Option<VariationRow>>)> = all_cells()
        .into_par_iter()
        .map(|cell| {
            let s = CellSamples::collect(&balanced, cell, &cfg.bins);
            let (kin, quasi) = s.pooled();
            let stat = if kin.len() >= 2 && quasi.len() >= 2 {
                stat_row(cell, &kin, &quasi).map(Some)
            } else {
                Ok(None)
            };
            (cell, stat, variation_row(cell, &s, cfg.min_cohort_size))
        })
        .collect();

    let mut stats_rows = Vec::new();
    let mut variation = Vec::new();
    let mut omitted = Vec::new();
    let omit = |table: &str, cell: Cell, reason: &str| OmittedRow {
        table: table.into(),
        metric: cell.metric,
        slot: cell.slot,
        ego_sex: cell.ego_sex,
        reason: reason.into(),
    };
    for (cell, stat, var) in per_cell {
        match stat? {
            Some(r) => stats_rows.push(r),
            None => omitted.push(omit("stats", cell, "fewer than two kin or quasi observations")),
        }
        match var? {
            Some(r) => variation.push(r),
            None => omitted.push(omit("variation", cell, "fewer than three populated age bins")),
        }
    }
    Ok(Tables {
        curves,
        stats: stats_rows,
        variation,
        balance,
        omitted,
    })
}

pub const CURVE_HEADER: [&str; 7] = ["metric", "slot", "ego_sex", "kinship", "age", "mean", "n"];

/// Long format: a kin row, a quasi row and a difference row per point. The
/// difference row's `n` is the smaller group size.
pub fn write_curves<W: Write>(out: W, curves: &[LifeCourseCurve], delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
    w.write_record(CURVE_HEADER)?;
    for c in curves {
        for p in &c.points {
            for (kinship, mean, n) in [
                ("kin", p.kin_mean, p.n_kin),
                ("quasi", p.quasi_mean, p.n_quasi),
                ("difference", p.difference, p.n_kin.min(p.n_quasi)),
            ] {
                w.write_record([
                    c.metric.name(),
                    c.slot.as_str(),
                    c.ego_sex.as_str(),
                    kinship,
                    &p.age.to_string(),
                    &stats::fmt_real(mean),
                    &n.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub const STATS_HEADER: [&str; 13] = [
    "Variable",
    "AlterType",
    "EgoSex",
    "KS",
    "p_val",
    "Kin_mean",
    "NonKin_mean",
    "Kin_median",
    "NonKin_median",
    "t_test",
    "WMW",
    "n_kin",
    "n_non_kin",
];

pub fn write_stats<W: Write>(out: W, rows: &[StatRow], delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
    w.write_record(STATS_HEADER)?;
    for r in rows {
        w.write_record([
            r.metric.name().to_owned(),
            r.slot.to_string(),
            r.ego_sex.to_string(),
            stats::fmt_real(r.ks_stat),
            stats::fmt_real(r.ks_p),
            stats::fmt_real(r.kin_mean),
            stats::fmt_real(r.quasi_mean),
            stats::fmt_real(r.kin_median),
            stats::fmt_real(r.quasi_median),
            stats::fmt_real(r.t_p),
            stats::fmt_real(r.mwu_p),
            r.n_kin.to_string(),
            r.n_quasi.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const VARIATION_HEADER: [&str; 9] = [
    "Variable",
    "AlterType",
    "EgoSex",
    "Kin_sd_of_means",
    "NonKin_sd_of_means",
    "p_value",
    "Kin_total_sd",
    "NonKin_total_sd",
    "n_ages",
];

pub fn write_variation<W: Write>(out: W, rows: &[VariationRow], delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
    w.write_record(VARIATION_HEADER)?;
    for r in rows {
        w.write_record([
            r.metric.name().to_owned(),
            r.slot.to_string(),
            r.ego_sex.to_string(),
            stats::fmt_real(r.kin_sd_of_age_means),
            stats::fmt_real(r.quasi_sd_of_age_means),
            stats::fmt_real(r.p_value),
            stats::fmt_real(r.kin_total_sd),
            stats::fmt_real(r.quasi_total_sd),
            r.n_ages.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MetricTuple;
    use crate::hashing::HashedId;
    use crate::kinclass::RelationCategory;

    fn assignment(i: u32, age: u8, sex: Sex, slot: Slot, kin: bool, freq: u64) -> KinAssignment {
        let ego = HashedId::from_bytes(&i.to_be_bytes()).unwrap();
        let alter = HashedId::from_bytes(&(i | 0x8000_0000).to_be_bytes()).unwrap();
        KinAssignment {
            ego,
            ego_sex: sex,
            ego_age: age,
            slot,
            alter,
            category: slot.category(kin),
            metrics: MetricTuple {
                frequency: freq,
                frac_of_time: 0.5,
                out_call_frac: 0.5,
                call_length: 60.0,
                total_sec: 60 * freq,
            },
            candidate_pool_size: 1,
        }
    }

    fn cohort(start: u32, age: u8, kin: usize, quasi: usize) -> Vec<KinAssignment> {
        (0..kin + quasi)
            .map(|k| assignment(start + k as u32, age, Sex::Female, Slot::Mother, k < kin, 1 + k as u64))
            .collect()
    }

    #[test]
    fn large_cohort_is_sampled_to_kin_size() {
        let all = cohort(0, 23, 5230, 21000);
        let (kept, report) = downsample_balance(&all, 7);
        let kin = kept.iter().filter(|a| a.category.is_kin()).count();
        let quasi = kept.len() - kin;
        assert_eq!((kin, quasi), (5230, 5230));
        assert_eq!(report.quasi_removed, 21000 - 5230);
    }

    #[test]
    fn equal_cohorts_untouched_and_small_quasi_flagged() {
        let mut all = cohort(0, 30, 10, 10);
        all.extend(cohort(100, 31, 10, 4));
        let (kept, report) = downsample_balance(&all, 1);
        assert_eq!(kept, all);
        assert_eq!(report.quasi_smaller.len(), 1);
        assert_eq!(report.quasi_smaller[0].ego_age, 31);
    }

    #[test]
    fn same_seed_same_sample_and_input_order_irrelevant() {
        let all = cohort(0, 40, 20, 200);
        let (a, _) = downsample_balance(&all, 99);
        let (b, _) = downsample_balance(&all, 99);
        assert_eq!(a, b);
        let mut reversed = all.clone();
        reversed.reverse();
        let (c, _) = downsample_balance(&reversed, 99);
        let key = |v: &[KinAssignment]| {
            let mut k: Vec<_> = v.iter().map(|a| a.ego).collect();
            k.sort();
            k
        };
        assert_eq!(key(&a), key(&c));
        let (d, _) = downsample_balance(&all, 100);
        assert_ne!(key(&a), key(&d));
    }

    #[test]
    fn age_bins() {
        let b = AgeBins { min_age: 18, max_age: 70, width: 5 };
        assert_eq!(b.bin(17), None);
        assert_eq!(b.bin(18), Some(18));
        assert_eq!(b.bin(22), Some(18));
        assert_eq!(b.bin(23), Some(23));
        assert_eq!(b.bin(70), Some(68));
        assert_eq!(b.bin(71), None);
        assert!(AgeBins { width: 0, ..b }.validate().is_err());
    }

    #[test]
    fn curve_difference_and_min_cohort() {
        let mut all = Vec::new();
        let mut id = 0;
        for (age, kin_f, quasi_f, n) in [(30u8, 10u64, 4u64, 3usize), (31, 8, 8, 3), (32, 5, 1, 1)] {
            for _ in 0..n {
                all.push(assignment(id, age, Sex::Male, Slot::Father, true, kin_f));
                all.push(assignment(id + 1, age, Sex::Male, Slot::Father, false, quasi_f));
                id += 2;
            }
        }
        let cfg = LifecourseConfig { min_cohort_size: 2, ..Default::default() };
        let curves = life_course_curves(&all, &cfg);
        assert_eq!(curves.len(), 32);
        let c = curves
            .iter()
            .find(|c| c.metric == Metric::Frequency && c.slot == Slot::Father && c.ego_sex == Sex::Male)
            .unwrap();
        assert_eq!(c.points.len(), 2);
        assert_eq!(c.points[0].difference, 6.0);
        assert_eq!(c.points[1].difference, 0.0);
    }

    #[test]
    fn variation_constant_means_have_zero_sd() {
        let mut all = Vec::new();
        let mut id = 0;
        for age in 20..30u8 {
            for k in 0..4 {
                all.push(assignment(id, age, Sex::Female, Slot::Son, true, 10));
                all.push(assignment(id + 1, age, Sex::Female, Slot::Son, false, 3 + k));
                id += 2;
            }
        }
        let cfg = LifecourseConfig { min_cohort_size: 4, ..Default::default() };
        let rows = variation_table(&all, &cfg).unwrap();
        let r = rows.iter().find(|r| r.metric == Metric::Frequency).unwrap();
        assert_eq!(r.kin_sd_of_age_means, 0.0);
        assert_eq!(r.quasi_sd_of_age_means, 0.0);
        assert_eq!(r.n_ages, 10);
        // all other cells lack data
        assert_eq!(rows.len(), 4);
    }

    #[test]
    fn variation_omitted_below_three_bins() {
        let all: Vec<_> = (0..4)
            .flat_map(|i| [assignment(i * 2, 20 + (i % 2) as u8, Sex::Female, Slot::Son, true, 3), assignment(i * 2 + 1, 20 + (i % 2) as u8, Sex::Female, Slot::Son, false, 4)])
            .collect();
        let cfg = LifecourseConfig { min_cohort_size: 1, ..Default::default() };
        assert!(variation_table(&all, &cfg).unwrap().is_empty());
    }

    #[test]
    fn build_tables_full_cardinality() {
        let mut all = Vec::new();
        let mut id = 0;
        for slot in Slot::ALL {
            for sex in [Sex::Female, Sex::Male] {
                for age in 20..26u8 {
                    for k in 0..3u64 {
                        all.push(assignment(id, age, sex, slot, true, 10 + k));
                        all.push(assignment(id + 1, age, sex, slot, false, 2 + k));
                        id += 2;
                    }
                }
            }
        }
        let cfg = LifecourseConfig { min_cohort_size: 3, ..Default::default() };
        let t = build_tables(&all, &cfg).unwrap();
        assert_eq!(t.stats.len(), 32);
        assert_eq!(t.variation.len(), 32);
        assert!(t.omitted.is_empty());
        let freq = &t.stats[0];
        assert_eq!(freq.metric, Metric::Frequency);
        assert_eq!(freq.kin_mean, 11.0);
        assert_eq!(freq.quasi_mean, 3.0);
        assert_eq!(freq.ks_stat, 1.0);
        let mut buf = Vec::new();
        write_stats(&mut buf, &t.stats, b'\t').unwrap();
        let header = String::from_utf8(buf).unwrap().lines().next().unwrap().to_owned();
        assert_eq!(header, "Variable\tAlterType\tEgoSex\tKS\tp_val\tKin_mean\tNonKin_mean\tKin_median\tNonKin_median\tt_test\tWMW\tn_kin\tn_non_kin");
        let _ = RelationCategory::Mother;
    }
}
