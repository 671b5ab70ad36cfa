use serde::{Deserialize, Serialize};

use super::report::DimensionReport;
use crate::error::{Error, Result};

/// Outcome of comparing several dimension estimates of one measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceVerdict {
    pub passed: bool,
    /// Mean of the compared slopes.
    pub common_value: f64,
    /// Largest pairwise slope difference.
    pub worst_deviation: f64,
    /// Largest [`DimensionReport::spread`].
    pub worst_spread: f64,
    pub estimators: Vec<String>,
    pub slopes: Vec<f64>,
    pub tolerance: f64,
}

/// Passes iff all slopes agree pairwise within `tolerance` and every report's
/// spread is below `tolerance`.
pub fn coincidence_check(reports: &[DimensionReport], tolerance: f64) -> Result<CoincidenceVerdict> {
    if reports.len() < 2 {
        return Err(Error::param("reports", "need at least two reports to compare"));
    }
    let slopes: Vec<f64> = reports.iter().map(|r| r.slope).collect();
    let max = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = slopes.iter().copied().fold(f64::INFINITY, f64::min);
    let worst_deviation = max - min;
    let worst_spread = reports.iter().map(DimensionReport::spread).fold(0.0, f64::max);
    Ok(CoincidenceVerdict {
        passed: worst_deviation < tolerance && worst_spread < tolerance,
        common_value: slopes.iter().sum::<f64>() / slopes.len() as f64,
        worst_deviation,
        worst_spread,
        estimators: reports.iter().map(|r| r.estimator.clone()).collect(),
        slopes,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(slope: f64, spread: f64) -> DimensionReport {
        DimensionReport {
            estimator: "test".into(),
            scales: vec![],
            counts_or_measures: vec![],
            slope,
            lower_slope: slope - spread / 2.0,
            upper_slope: slope + spread / 2.0,
            residual: 0.0,
            per_point: None,
            curve: Default::default(),
        }
    }

    #[test]
    fn agreeing_reports_pass() {
        let v = coincidence_check(&[report(1.0, 0.01), report(1.01, 0.015), report(0.99, 0.0)], 0.05).unwrap();
        assert!(v.passed);
        assert!((v.common_value - 1.0).abs() < 1e-12);
        assert!((v.worst_deviation - 0.02).abs() < 1e-12);
    }

    #[test]
    fn disagreeing_reports_fail() {
        let v = coincidence_check(&[report(0.63, 0.0), report(0.88, 0.0)], 0.05).unwrap();
        assert!(!v.passed);
        assert!((v.worst_deviation - 0.25).abs() < 1e-12);
    }

    #[test]
    fn duplicate_passes_with_zero_deviation() {
        let r = report(0.7, 0.01);
        let v = coincidence_check(&[r.clone(), r], 0.05).unwrap();
        assert!(v.passed);
        assert_eq!(v.worst_deviation, 0.0);
    }

    #[test]
    fn wide_spread_fails() {
        let mut r = report(0.7, 0.0);
        r.per_point = Some(vec![0.4, 0.5, 0.9, 1.0]);
        assert!(!coincidence_check(&[r.clone(), r], 0.05).unwrap().passed);
        assert!(coincidence_check(&[report(1.0, 0.0)], 0.05).is_err());
    }
}
