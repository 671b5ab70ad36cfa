use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shift::check_beta;

/// Minimum number of scales a regression window must contain.
pub const MIN_WINDOW: usize = 4;

/// A strictly decreasing sequence of scales and the index window used for the
/// log-log fit.
///
/// Scales are stored as natural logarithms so that symbolic ladders reaching
/// `β^{-(2n+1)}` for large `n` never underflow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleLadder {
    log_scales: Vec<f64>,
    fit_window: Range<usize>,
    levels: Option<Vec<usize>>,
}

impl ScaleLadder {
    /// Ladder of explicit radii; the fit window covers all of them.
    pub fn new(scales: Vec<f64>) -> Result<Self> {
        if scales.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::param("scales", "scales must be positive and finite"));
        }
        let log_scales = scales.iter().map(|s| s.ln()).collect();
        Self::from_log_scales(log_scales, None)
    }

    fn from_log_scales(log_scales: Vec<f64>, levels: Option<Vec<usize>>) -> Result<Self> {
        if log_scales.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::param("scales", "scales must be strictly decreasing"));
        }
        let n = log_scales.len();
        let ladder = ScaleLadder { log_scales, fit_window: 0..n, levels };
        ladder.check_window()?;
        Ok(ladder)
    }

    /// Radii `base^{-k}` for `k` in `exponents`.
    pub fn geometric(base: f64, exponents: Range<i32>) -> Result<Self> {
        if !(base > 1.0) {
            return Err(Error::param("base", "geometric ladders need base > 1"));
        }
        Self::from_log_scales(exponents.map(|k| -(k as f64) * base.ln()).collect(), None)
    }

    /// Symbolic ladder over cylinder levels.
    ///
    /// A level-`n` cylinder fixes the `2n + 1` coordinates `-n..=n`, so its
    /// scale is `β^{-(2n+1)}`.
    pub fn levels(levels: Range<usize>, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let levels: Vec<usize> = levels.collect();
        let logs = levels.iter().map(|&n| level_log_scale(n, beta)).collect();
        Self::from_log_scales(logs, Some(levels))
    }

    /// Restricts the regression to `window` (indices into the ladder).
    pub fn with_window(mut self, window: Range<usize>) -> Result<Self> {
        self.fit_window = window;
        self.check_window()?;
        Ok(self)
    }

    fn check_window(&self) -> Result<()> {
        let w = &self.fit_window;
        if w.end > self.log_scales.len() || w.start >= w.end || w.end - w.start < MIN_WINDOW {
            return Err(Error::param(
                "fit_window",
                format!("need at least {MIN_WINDOW} scales inside the window, got {w:?} of {}", self.log_scales.len()),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.log_scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_scales.is_empty()
    }

    pub fn log_scales(&self) -> &[f64] {
        &self.log_scales
    }

    pub fn scales(&self) -> Vec<f64> {
        self.log_scales.iter().map(|l| l.exp()).collect()
    }

    pub fn fit_window(&self) -> Range<usize> {
        self.fit_window.clone()
    }

    /// Cylinder levels, for ladders built by [`ScaleLadder::levels`].
    pub fn level_values(&self) -> Option<&[usize]> {
        self.levels.as_deref()
    }

    pub(crate) fn require_levels(&self) -> Result<&[usize]> {
        self.level_values()
            .ok_or_else(|| Error::param("ladder", "symbolic estimators need a ladder over cylinder levels"))
    }

    /// Largest level the ladder refers to (0 for geometric ladders).
    pub fn max_level(&self) -> usize {
        self.levels.as_ref().and_then(|l| l.iter().copied().max()).unwrap_or(0)
    }
}

/// `ln` of the scale attached to a level-`n` cylinder.
pub fn level_log_scale(n: usize, beta: f64) -> f64 {
    -((2 * n + 1) as f64) * beta.ln()
}
