use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::shift::{check_beta, MeasureModel, TwoSidedWord};

/// Deviation of `μ(C_n(ω))` from the product of its one-sided measures with a
/// level shift `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductDefectRecord {
    pub n: usize,
    pub m: usize,
    /// `ln[μ(C_n) / (μ⁺_{n+m} μ⁻_{n+m})]`.
    pub log_lower_ratio: f64,
    /// `ln[(μ⁺_{n-m} μ⁻_{n-m}) / μ(C_n)]`.
    pub log_upper_ratio: f64,
    /// `max(|lower|, |upper|) / n`.
    pub defect_exponent: f64,
}

impl ProductDefectRecord {
    /// Whether `β^{-δn} μ⁺_{n+m}μ⁻_{n+m} <= μ(C_n) <= β^{δn} μ⁺_{n-m}μ⁻_{n-m}`.
    pub fn satisfies(&self, delta: f64, beta: f64) -> bool {
        let slack = -delta * self.n as f64 * beta.ln();
        self.log_lower_ratio >= slack && self.log_upper_ratio >= slack
    }
}

pub fn product_defect(model: &MeasureModel, w: &TwoSidedWord, n: usize, m: usize) -> Result<ProductDefectRecord> {
    if n == 0 {
        return Err(Error::param("n", "level must be >= 1"));
    }
    if m > n {
        return Err(Error::param("m", format!("shift {m} exceeds level {n}")));
    }
    let ln = |k: usize, l: usize| -> Result<f64> {
        let v = model.block_log_measure(w.block(k, l)?);
        if v == f64::NEG_INFINITY {
            return Err(Error::OutsideSupport { level: n });
        }
        Ok(v)
    };
    let centre = ln(n, n)?;
    let wide = ln(0, n + m)? + ln(n + m, 0)?;
    let narrow = ln(0, n - m)? + ln(n - m, 0)?;
    let lower = centre - wide;
    let upper = narrow - centre;
    Ok(ProductDefectRecord {
        n,
        m,
        log_lower_ratio: lower,
        log_upper_ratio: upper,
        defect_exponent: lower.abs().max(upper.abs()) / n as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MainInequalityReport {
    pub delta: f64,
    pub beta: f64,
    pub n_lo: usize,
    pub n_hi: usize,
    pub m_bound: usize,
    /// Smallest shift meeting the coverage target, if any.
    pub m: Option<usize>,
    /// Fraction of samples satisfying the sandwich at every level, per shift `0..=m_bound`.
    pub fraction_by_m: Vec<f64>,
    /// Coverage at the chosen shift, or the best coverage when none qualifies.
    pub fraction: f64,
    /// Mean defect exponent per level with `m = 0`.
    pub mean_defect_m0: Vec<(usize, f64)>,
    /// Mean defect exponent per level at the chosen (or best) shift.
    pub mean_defect: Vec<(usize, f64)>,
    pub passed: bool,
}

/// Finds the smallest `m <= m_bound` for which at least a `1 - δ` fraction of
/// samples satisfy the sandwich with `β^{δn}` slack for every `n` in `levels`.
pub fn verify_main_inequality(
    model: &MeasureModel,
    samples: &[TwoSidedWord],
    delta: f64,
    beta: f64,
    levels: RangeInclusive<usize>,
    m_bound: usize,
) -> Result<MainInequalityReport> {
    check_beta(beta)?;
    if !model.is_ergodic() {
        return Err(Error::Model("the main inequality is stated for ergodic models".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    if samples.is_empty() {
        return Err(Error::param("samples", "need at least one sample"));
    }
    let (n_lo, n_hi) = (*levels.start(), *levels.end());
    if n_lo == 0 || n_lo > n_hi || m_bound > n_lo {
        return Err(Error::param("levels", "need 1 <= n_lo <= n_hi and m_bound <= n_lo"));
    }
    let ns: Vec<usize> = levels.collect();
    // records[s][m][j] for sample s, shift m, level ns[j]
    let records = par::try_map_range(samples.len(), |s| {
        (0..=m_bound)
            .map(|m| ns.iter().map(|&n| product_defect(model, &samples[s], n, m)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
    })?;
    let count = samples.len() as f64;
    let fraction_by_m: Vec<f64> = (0..=m_bound)
        .map(|m| records.iter().filter(|r| r[m].iter().all(|d| d.satisfies(delta, beta))).count() as f64 / count)
        .collect();
    let m = fraction_by_m.iter().position(|&f| f >= 1.0 - delta);
    let chosen = m.unwrap_or_else(|| {
        (0..=m_bound).max_by(|&i, &j| fraction_by_m[i].total_cmp(&fraction_by_m[j]).then(j.cmp(&i))).unwrap_or(0)
    });
    let mean = |mm: usize| -> Vec<(usize, f64)> {
        ns.iter()
            .enumerate()
            .map(|(j, &n)| (n, records.iter().map(|r| r[mm][j].defect_exponent).sum::<f64>() / count))
            .collect()
    };
    Ok(MainInequalityReport {
        delta,
        beta,
        n_lo,
        n_hi,
        m_bound,
        m,
        fraction: fraction_by_m[chosen],
        mean_defect_m0: mean(0),
        mean_defect: mean(chosen),
        fraction_by_m,
        passed: m.is_some(),
    })
}
