use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// Supremum of the absolute difference between the two ECDFs.
    pub statistic: f64,
    /// Asymptotic two-sided p-value.
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test.
///
/// `D` is computed exactly as `max |i·m − j·n| / (n·m)` over the merged
/// sample. The p-value is the limiting Kolmogorov survival function at
/// `sqrt(n·m / (n + m)) · D`.
pub fn ks_statistic(sample_a: &[f64], sample_b: &[f64]) -> Result<KsResult> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::Statistic("KS test needs two non-empty samples"));
    }
    super::check_finite(sample_a)?;
    super::check_finite(sample_b)?;
    let mut a = sample_a.to_vec();
    let mut b = sample_b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as i128, b.len() as i128);

    let (mut i, mut j) = (0usize, 0usize);
    let mut best: i128 = 0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        best = best.max((i as i128 * m - j as i128 * n).abs());
    }
    let statistic = best as f64 / (n * m) as f64;
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    Ok(KsResult {
        statistic,
        p_value: kolmogorov_sf(en * statistic),
    })
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // theta-function form of the CDF converges fast for small x
        let w = (2.0 * std::f64::consts::PI).sqrt() / x;
        let q = -std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let mut cdf = 0.0;
        for k in 1..=20 {
            let odd = (2 * k - 1) as f64;
            let term = (q * odd * odd).exp();
            cdf += term;
            if term < 1e-300 {
                break;
            }
        }
        return (1.0 - w * cdf).clamp(0.0, 1.0);
    }
    let mut sf = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        sf += sign * term;
        if term < 1e-300 || term < sf.abs() * 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sf).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_have_zero_distance() {
        let r = ks_statistic(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn disjoint_samples_have_unit_distance() {
        let r = ks_statistic(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]).unwrap();
        assert_eq!(r.statistic, 1.0);
    }

    #[test]
    fn shifted_by_one() {
        // ECDF gap peaks at 1/4 (e.g. at x = 1)
        let r = ks_statistic(&[1.0, 2.0, 3.0, 4.0], &[2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(r.statistic, 0.25);
    }

    #[test]
    fn empty_and_nan_rejected() {
        assert!(ks_statistic(&[], &[1.0]).is_err());
        assert!(ks_statistic(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn kolmogorov_known_values() {
        // reference values of the limiting distribution
        assert!((kolmogorov_sf(1.0) - 0.26999967167735456).abs() < 1e-14);
        assert!((kolmogorov_sf(0.5) - 0.9639452436648751).abs() < 1e-14);
        assert!((kolmogorov_sf(1.3580986393225507) - 0.05).abs() < 1e-12);
        assert!((kolmogorov_sf(0.2) - 0.999999999999495).abs() < 1e-14);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        assert!(kolmogorov_sf(10.0) < 1e-80);
    }

    #[test]
    fn branches_agree_near_switch() {
        let below = kolmogorov_sf(1.0 - 1e-12);
        let above = kolmogorov_sf(1.0);
        assert!((below - above).abs() < 1e-11);
    }
}
