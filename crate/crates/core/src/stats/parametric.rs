use statrs::function::beta::beta_reg;

use super::{mean, variance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

/// Welch's unequal-variance t test with Welch–Satterthwaite degrees of
/// freedom.
///
/// When both samples have zero variance the statistic is degenerate:
/// `p = 1` for equal means, `p = 0` otherwise.
pub fn welch_t_test(sample_a: &[f64], sample_b: &[f64]) -> Result<WelchResult> {
    if sample_a.len() < 2 || sample_b.len() < 2 {
        return Err(Error::Statistic("Welch t test needs at least two values per sample"));
    }
    super::check_finite(sample_a)?;
    super::check_finite(sample_b)?;
    let (na, nb) = (sample_a.len() as f64, sample_b.len() as f64);
    let (ma, mb) = (mean(sample_a).unwrap(), mean(sample_b).unwrap());
    let (va, vb) = (variance(sample_a).unwrap(), variance(sample_b).unwrap());
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        let same = ma == mb;
        return Ok(WelchResult {
            t: if same { 0.0 } else { f64::INFINITY.copysign(ma - mb) },
            df: f64::NAN,
            p_value: if same { 1.0 } else { 0.0 },
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    // two-sided tail of Student's t: I_{df/(df+t^2)}(df/2, 1/2)
    let p_value = beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0);
    Ok(WelchResult { t, df, p_value })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FTestResult {
    /// Ratio of the first sample's variance to the second's.
    pub f: f64,
    pub df1: f64,
    pub df2: f64,
    pub p_value: f64,
}

/// Two-sided F test for equality of two variances.
pub fn variance_ratio_test(sample_a: &[f64], sample_b: &[f64]) -> Result<FTestResult> {
    if sample_a.len() < 2 || sample_b.len() < 2 {
        return Err(Error::Statistic("F test needs at least two values per sample"));
    }
    super::check_finite(sample_a)?;
    super::check_finite(sample_b)?;
    let (va, vb) = (variance(sample_a).unwrap(), variance(sample_b).unwrap());
    let df1 = (sample_a.len() - 1) as f64;
    let df2 = (sample_b.len() - 1) as f64;
    let (f, p_value) = match (va == 0.0, vb == 0.0) {
        (true, true) => (1.0, 1.0),
        (false, true) => (f64::INFINITY, 0.0),
        (true, false) => (0.0, 0.0),
        (false, false) => {
            let f = va / vb;
            let lower = beta_reg(df1 / 2.0, df2 / 2.0, df1 * f / (df1 * f + df2));
            let upper = beta_reg(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
            (f, (2.0 * lower.min(upper)).min(1.0))
        }
    };
    Ok(FTestResult { f, df1, df2, p_value })
}
