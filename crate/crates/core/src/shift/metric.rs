use serde::{Deserialize, Serialize};

use super::word::TwoSidedWord;
use crate::error::{Error, Result};

/// Parameters of the truncated symbolic metric
/// `d_β(ω¹, ω²) = Σ_{|i| ≤ K} β^{-|i|} |ω¹_i − ω²_i|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolicMetricParams {
    beta: f64,
    truncation: usize,
}

impl SymbolicMetricParams {
    pub fn new(beta: f64, truncation: usize) -> Result<Self> {
        check_beta(beta)?;
        if truncation == 0 {
            return Err(Error::param("truncation", "must be positive"));
        }
        Ok(SymbolicMetricParams { beta, truncation })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Upper bound `2(p−1)β^{−K}/(1−1/β)` on the mass of the ignored tail.
    pub fn truncation_error_bound(&self, p: usize) -> f64 {
        2.0 * (p as f64 - 1.0) * self.beta.powi(-(self.truncation as i32)) / (1.0 - 1.0 / self.beta)
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta >= 2.0) {
        return Err(Error::param("beta", format!("beta must be >= 2, got {beta}")));
    }
    Ok(())
}

pub fn d_beta(w1: &TwoSidedWord, w2: &TwoSidedWord, m: &SymbolicMetricParams) -> Result<f64> {
    if w1.alphabet() != w2.alphabet() {
        return Err(Error::AlphabetMismatch(w1.alphabet().size(), w2.alphabet().size()));
    }
    let k = m.truncation;
    let a = w1.block(k, k)?;
    let b = w2.block(k, k)?;
    let inv = 1.0 / m.beta;
    // Sum from the outermost coordinates inwards so small terms accumulate first.
    let mut total = 0.0;
    for dist in (0..=k).rev() {
        let weight = inv.powi(dist as i32);
        let mut diff = (a[k + dist] as f64 - b[k + dist] as f64).abs();
        if dist > 0 {
            diff += (a[k - dist] as f64 - b[k - dist] as f64).abs();
        }
        total += weight * diff;
    }
    Ok(total)
}
