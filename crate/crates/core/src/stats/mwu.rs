use crate::error::{Error, Result};

/// Combined sample size up to which the exact permutation distribution is
/// enumerated.
pub const EXACT_MAX_COMBINED: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwuMethod {
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwuResult {
    /// U statistic of the first sample.
    pub u: f64,
    pub p_value: f64,
    pub method: MwuMethod,
}

/// Mann–Whitney U test: exact enumeration for small combined samples,
/// tie-corrected normal approximation with continuity correction otherwise.
pub fn mann_whitney_u(sample_a: &[f64], sample_b: &[f64]) -> Result<MwuResult> {
    if sample_a.len() + sample_b.len() <= EXACT_MAX_COMBINED {
        mwu_exact(sample_a, sample_b)
    } else {
        mwu_asymptotic(sample_a, sample_b)
    }
}

/// Ranks of the pooled sample, doubled so that midranks stay integral.
/// Returns the doubled ranks in pooled order and the tie-group sizes.
fn doubled_midranks(pooled: &[f64]) -> (Vec<i64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&x, &y| pooled[x].total_cmp(&pooled[y]));
    let mut ranks = vec![0i64; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean; doubled that is i + j + 2
        for &k in &order[i..=j] {
            ranks[k] = (i + j + 2) as i64;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

fn validate(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Statistic("Mann-Whitney U needs two non-empty samples"));
    }
    super::check_finite(a)?;
    super::check_finite(b)
}

/// Exact two-sided p-value: the share of all `C(n, n1)` splits of the pooled
/// ranks whose rank sum is at least as far from its mean as observed.
/// Ties are handled by the same midranks, so this is the exact conditional
/// distribution.
pub fn mwu_exact(sample_a: &[f64], sample_b: &[f64]) -> Result<MwuResult> {
    validate(sample_a, sample_b)?;
    let n1 = sample_a.len();
    let n = n1 + sample_b.len();
    if n > 24 {
        return Err(Error::Statistic("exact Mann-Whitney enumeration limited to 24 values"));
    }
    let pooled: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();
    let (ranks, _) = doubled_midranks(&pooled);
    // doubled rank-sum mean is n1 (n + 1)
    let centre = (n1 * (n + 1)) as i64;
    let observed: i64 = ranks[..n1].iter().sum();
    let observed_dev = (observed - centre).abs();

    let (mut extreme, mut total) = (0u64, 0u64);
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let s: i64 = (0..n).filter(|&k| mask >> k & 1 == 1).map(|k| ranks[k]).sum();
        total += 1;
        if (s - centre).abs() >= observed_dev {
            extreme += 1;
        }
    }
    let u = (observed as f64 / 2.0) - (n1 * (n1 + 1)) as f64 / 2.0;
    Ok(MwuResult {
        u,
        p_value: extreme as f64 / total as f64,
        method: MwuMethod::Exact,
    })
}

/// Normal approximation with tie correction and a 0.5 continuity
/// correction.
pub fn mwu_asymptotic(sample_a: &[f64], sample_b: &[f64]) -> Result<MwuResult> {
    validate(sample_a, sample_b)?;
    let (n1, n2) = (sample_a.len() as f64, sample_b.len() as f64);
    let n = n1 + n2;
    let pooled: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();
    let (ranks, ties) = doubled_midranks(&pooled);
    let r1 = ranks[..sample_a.len()].iter().sum::<i64>() as f64 / 2.0;
    let u = r1 - n1 * (n1 + 1.0) / 2.0;
    let mu = n1 * n2 / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum();
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = ((u - mu).abs() - 0.5) / var.sqrt();
        (2.0 * super::normal_sf(z)).min(1.0)
    };
    Ok(MwuResult {
        u,
        p_value,
        method: MwuMethod::Asymptotic,
    })
}
