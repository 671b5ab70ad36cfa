//! Least-squares slopes and secant-slope bracketing.

/// Ordinary least squares fit of `y` on `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

pub fn least_squares(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need two points for a line");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(&a, &b)| (b - intercept - slope * a).powi(2)).sum();
    LineFit { slope, intercept, residual: (ss / n).sqrt() }
}

/// Slopes of the least-squares lines through consecutive triples.
pub fn secant_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    (0..x.len().saturating_sub(2)).map(|i| least_squares(&x[i..i + 3], &y[i..i + 3]).slope).collect()
}

/// Fit plus liminf/limsup proxies: the most extreme 3-point secant slopes in
/// the window, widened if needed so that `lower <= slope <= upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketedFit {
    pub fit: LineFit,
    pub lower: f64,
    pub upper: f64,
}

pub fn bracketed(x: &[f64], y: &[f64]) -> BracketedFit {
    let fit = least_squares(x, y);
    let secants = secant_slopes(x, y);
    let lower = secants.iter().copied().fold(fit.slope, f64::min);
    let upper = secants.iter().copied().fold(fit.slope, f64::max);
    BracketedFit { fit, lower, upper }
}

/// Interquartile range (linear interpolation between order statistics).
pub fn interquartile_range(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25)
}

pub(crate) fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = least_squares(&x, &y);
        assert!((f.slope - 2.0).abs() < 1e-15);
        assert!((f.intercept - 1.0).abs() < 1e-15);
        assert!(f.residual < 1e-15);
        let b = bracketed(&x, &y);
        assert_eq!((b.lower, b.upper), (b.fit.slope, b.fit.slope));
    }

    #[test]
    fn iqr_basic() {
        assert_eq!(interquartile_range(&[1.0, 2.0, 3.0, 4.0, 5.0]), 2.0);
        assert_eq!(interquartile_range(&[7.0]), 0.0);
    }

    proptest! {
        #[test]
        fn bracket_contains_slope(ys in proptest::collection::vec(-10.0f64..10.0, 4..12)) {
            let xs: Vec<f64> = (0..ys.len()).map(|i| (i as f64).powf(1.3)).collect();
            let b = bracketed(&xs, &ys);
            prop_assert!(b.lower <= b.fit.slope && b.fit.slope <= b.upper);
            prop_assert!(b.fit.residual >= 0.0);
        }
    }
}
