use serde::{Deserialize, Serialize};

use super::ladder::ScaleLadder;
use super::symbolic::pointwise_dimension_sampled;
use crate::error::{Error, Result};
use crate::shift::{MeasureModel, TwoSidedWord};

/// Clusters lighter than this fraction of the samples are folded into their
/// nearest neighbour.
pub const MIN_CLUSTER_MASS: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub center: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub mass: f64,
}

/// Histogram of per-sample pointwise-dimension slopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` bin edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub clusters: Vec<Cluster>,
    pub slopes: Vec<f64>,
}

pub fn pointwise_dim_histogram(
    model: &MeasureModel,
    samples: &[TwoSidedWord],
    ladder: &ScaleLadder,
    beta: f64,
    bins: usize,
) -> Result<Histogram> {
    if !matches!(model, MeasureModel::Mixture(_)) {
        return Err(Error::Model(format!("histogram needs a mixture model, got {}", model.kind())));
    }
    if bins == 0 {
        return Err(Error::param("bins", "need at least one bin"));
    }
    let report = pointwise_dimension_sampled(model, samples, ladder, beta)?;
    Ok(histogram(report.per_point.unwrap_or_default(), bins))
}

/// Bins `slopes` and groups them into clusters separated by gaps wider than
/// two bins.
pub fn histogram(slopes: Vec<f64>, bins: usize) -> Histogram {
    let mut sorted = slopes.clone();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
    let mut counts = vec![0; bins];
    for &s in &sorted {
        counts[(((s - lo) / width) as usize).min(bins - 1)] += 1;
    }

    let mut groups: Vec<Vec<f64>> = vec![vec![sorted[0]]];
    for w in sorted.windows(2) {
        if w[1] - w[0] > 2.0 * width {
            groups.push(Vec::new());
        }
        groups.last_mut().unwrap().push(w[1]);
    }
    let total = sorted.len();
    while groups.len() > 1 {
        let (i, g) = groups.iter().enumerate().min_by_key(|(_, g)| g.len()).unwrap();
        if (g.len() as f64) >= MIN_CLUSTER_MASS * total as f64 {
            break;
        }
        let center = mean(g);
        let j = if i == 0 {
            1
        } else if i == groups.len() - 1 || center - mean(&groups[i - 1]) <= mean(&groups[i + 1]) - center {
            i - 1
        } else {
            i + 1
        };
        let g = groups.remove(i);
        let j = if j > i { j - 1 } else { j };
        groups[j].extend(g);
        groups[j].sort_by(f64::total_cmp);
    }
    let clusters = groups
        .iter()
        .map(|g| Cluster {
            center: mean(g),
            min: g[0],
            max: g[g.len() - 1],
            count: g.len(),
            mass: g.len() as f64 / total as f64,
        })
        .collect();
    Histogram { edges, counts, clusters, slopes }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
