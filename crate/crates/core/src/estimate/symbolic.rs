//! Pointwise and one-sided dimensions of shift-invariant measures.

use super::ladder::{level_log_scale, ScaleLadder};
use super::report::DimensionReport;
use crate::error::{Error, Result};
use crate::par;
use crate::shift::{check_beta, MeasureModel, TwoSidedWord};

/// `μ(C_n(ω))`, the measure of the symbolic ball around `ω` at level `n`.
pub fn symbolic_ball_measure(model: &MeasureModel, w: &TwoSidedWord, n: usize) -> Result<f64> {
    model.cylinder_measure(&w.central(n)?)
}

#[derive(Clone, Copy)]
enum Window {
    Both,
    Past,
    Future,
}

impl Window {
    fn block(self, w: &TwoSidedWord, n: usize) -> Result<&[u8]> {
        match self {
            Window::Both => w.block(n, n),
            Window::Past => w.block(n, 0),
            Window::Future => w.block(0, n),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Window::Both => "pointwise",
            Window::Past => "stable",
            Window::Future => "unstable",
        }
    }
}

fn single(
    model: &MeasureModel,
    w: &TwoSidedWord,
    ladder: &ScaleLadder,
    beta: f64,
    window: Window,
) -> Result<DimensionReport> {
    check_beta(beta)?;
    if w.alphabet() != model.alphabet() {
        return Err(Error::AlphabetMismatch(model.alphabet().size(), w.alphabet().size()));
    }
    let levels = ladder.require_levels()?;
    let mut x = Vec::with_capacity(levels.len());
    let mut y = Vec::with_capacity(levels.len());
    for &n in levels {
        let lm = model.block_log_measure(window.block(w, n)?);
        if lm == f64::NEG_INFINITY {
            return Err(Error::OutsideSupport { level: n });
        }
        // d = log μ / log r with log r = -(2n+1) log β; fit y = -log μ on x = -log r.
        x.push(-level_log_scale(n, beta));
        y.push(-lm);
    }
    let raw = y.iter().map(|v| (-v).exp()).collect();
    Ok(DimensionReport::fit(window.name(), ladder, x, y, raw))
}

/// Least-squares slope of `log μ(C_n(ω))` against the level scale over the
/// ladder's window.
pub fn pointwise_dimension_symbolic(
    model: &MeasureModel,
    w: &TwoSidedWord,
    ladder: &ScaleLadder,
    beta: f64,
) -> Result<DimensionReport> {
    single(model, w, ladder, beta, Window::Both)
}

fn aggregate(
    model: &MeasureModel,
    samples: &[TwoSidedWord],
    ladder: &ScaleLadder,
    beta: f64,
    window: Window,
) -> Result<DimensionReport> {
    if samples.is_empty() {
        return Err(Error::param("samples", "need at least one sample"));
    }
    let reports = par::try_map_range(samples.len(), |i| single(model, &samples[i], ladder, beta, window))?;
    Ok(merge(window.name(), ladder, &reports))
}

/// Averages per-point reports. The mean curve is refitted, the per-point
/// slopes are kept, and the reported slope is their mean.
pub(crate) fn merge(estimator: &str, ladder: &ScaleLadder, reports: &[DimensionReport]) -> DimensionReport {
    let m = reports.len() as f64;
    let len = reports[0].curve.y.len();
    let x = reports[0].curve.x.clone();
    let y: Vec<f64> = (0..len).map(|j| reports.iter().map(|r| r.curve.y[j]).sum::<f64>() / m).collect();
    let raw = y.iter().map(|v| (-v).exp()).collect();
    let mut out = DimensionReport::fit(estimator, ladder, x, y, raw);
    let slopes: Vec<f64> = reports.iter().map(|r| r.slope).collect();
    out.slope = slopes.iter().sum::<f64>() / m;
    out.residual = (reports.iter().map(|r| r.residual * r.residual).sum::<f64>() / m).sqrt();
    out.lower_slope = out.lower_slope.min(out.slope);
    out.upper_slope = out.upper_slope.max(out.slope);
    out.per_point = Some(slopes);
    out
}

/// Pointwise dimension over a sample: mean of per-sample slopes, with the
/// per-sample slopes in `per_point`.
pub fn pointwise_dimension_sampled(
    model: &MeasureModel,
    samples: &[TwoSidedWord],
    ladder: &ScaleLadder,
    beta: f64,
) -> Result<DimensionReport> {
    aggregate(model, samples, ladder, beta, Window::Both)
}

/// Stable (past window `-n..=0`) and unstable (future window `0..=n`)
/// dimensions over a sample, returned as `(d_s, d_u)`.
pub fn stable_unstable_dimensions(
    model: &MeasureModel,
    samples: &[TwoSidedWord],
    ladder: &ScaleLadder,
    beta: f64,
) -> Result<(DimensionReport, DimensionReport)> {
    Ok((
        aggregate(model, samples, ladder, beta, Window::Past)?,
        aggregate(model, samples, ladder, beta, Window::Future)?,
    ))
}
