//! Experiment configuration documents (TOML).
//!
//! ```toml
//! [experiment]
//! kind = "dimension"        # dimension | product-check | rect-count | young-check | histogram | compare
//! seed = 7
//!
//! [model]
//! file = "models/uniform.toml"   # relative to this file
//! beta = 2.0
//!
//! [ladder]
//! levels = [1, 12]          # symbolic levels, inclusive
//! ```
//!
//! Other sections: `[sampling]`, `[gamma]`, `[counting]`, `[product]`,
//! `[smooth]`, `[histogram]`, `[compare]`, `[verdict]`. Each experiment kind
//! documents which ones it reads in `run.rs`.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dimlab_core::estimate::ScaleLadder;
use dimlab_core::product::GammaParams;
use dimlab_core::smooth::SmoothMap;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Dimension,
    ProductCheck,
    RectCount,
    YoungCheck,
    Histogram,
    Compare,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Dimension => "dimension",
            Kind::ProductCheck => "product-check",
            Kind::RectCount => "rect-count",
            Kind::YoungCheck => "young-check",
            Kind::Histogram => "histogram",
            Kind::Compare => "compare",
        };
        f.write_str(s)
    }
}

/// A config-level problem; reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn field_error(field: &str, reason: impl fmt::Display) -> anyhow::Error {
    ConfigError(format!("config field `{field}`: {reason}")).into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: ExperimentSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<LadderSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counting: Option<CountingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<ProductSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smooth: Option<SmoothSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram: Option<HistogramSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<DimensionSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub file: PathBuf,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_beta() -> f64 {
    2.0
}

/// Either symbolic `levels = [lo, hi]` or geometric `base` with
/// `exponents = [lo, hi]` (radii `base^-k`). Both ranges are inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<[i32; 2]>,
    /// Regression window as ladder indices `[start, end)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<usize>,
    #[serde(default)]
    pub exhaustive: bool,
}

fn default_samples() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSection {
    pub epsilon: f64,
    pub c: f64,
    #[serde(default = "one")]
    pub n0: usize,
    #[serde(default = "one")]
    pub a: usize,
    pub n_max: usize,
    pub n1: usize,
    pub n_top: usize,
    /// Entropy override in nats; required in effect for factor models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<f64>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountingSection {
    pub levels: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductSection {
    pub delta: f64,
    pub levels: [usize; 2],
    pub m_bound: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothSection {
    pub map: SmoothMap,
    pub n_orbit: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramSection {
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Cluster centres the run is checked against, if any.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected: Vec<f64>,
}

fn default_bins() -> usize {
    40
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub reports: Vec<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictSection {
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionSection {
    /// Subset of `pointwise`, `stable`, `unstable` (symbolic models) or
    /// `box`, `information`, `pointwise` (maps). Empty means all.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub estimators: Vec<String>,
}

pub const DEFAULT_TOLERANCE: f64 = 0.05;

impl Config {
    pub fn parse(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| {
            let line = e.span().map(|s| src[..s.start].matches('\n').count() + 1).unwrap_or(1);
            ConfigError(format!("config line {line}: {}", e.message())).into()
        })
    }

    /// Reads `path` and resolves relative file references against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&src)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(m) = &mut cfg.model {
            resolve(&mut m.file);
        }
        if let Some(o) = &mut cfg.experiment.output {
            resolve(o);
        }
        if let Some(c) = &mut cfg.compare {
            c.reports.iter_mut().for_each(resolve);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    pub fn tolerance(&self) -> f64 {
        self.verdict.as_ref().map_or(DEFAULT_TOLERANCE, |v| v.tolerance)
    }

    /// Checks every field the experiment kind reads, and that referenced
    /// files exist.
    pub fn validate(&self) -> Result<()> {
        if let Some(v) = &self.verdict {
            if !(v.tolerance > 0.0 && v.tolerance.is_finite()) {
                return Err(field_error("verdict.tolerance", "must be positive"));
            }
        }
        match self.experiment.kind {
            Kind::Dimension => {
                if self.smooth.is_some() {
                    self.smooth_section()?;
                    self.geometric_ladder()?;
                } else {
                    self.model_section()?;
                    self.symbolic_ladder()?;
                    self.sampling()?;
                }
                self.estimators()?;
            }
            Kind::ProductCheck => {
                self.model_section()?;
                self.sampling()?;
                self.product_section()?;
            }
            Kind::RectCount => {
                self.model_section()?;
                self.sampling()?;
                self.gamma_params()?;
                self.counting_levels()?;
            }
            Kind::YoungCheck => {
                self.smooth_section()?;
                self.geometric_ladder()?;
            }
            Kind::Histogram => {
                self.model_section()?;
                self.symbolic_ladder()?;
                self.sampling()?;
                let h = self.histogram.clone().unwrap_or(HistogramSection { bins: default_bins(), expected: vec![] });
                if h.bins == 0 {
                    return Err(field_error("histogram.bins", "need at least one bin"));
                }
            }
            Kind::Compare => {
                let c = self.compare.as_ref().ok_or_else(|| field_error("compare", "section is required"))?;
                if c.reports.len() < 2 {
                    return Err(field_error("compare.reports", "need >= 2 reports"));
                }
                for r in &c.reports {
                    if !r.is_file() {
                        return Err(field_error("compare.reports", format!("{} does not exist", r.display())));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn model_section(&self) -> Result<&ModelSection> {
        let m = self.model.as_ref().ok_or_else(|| field_error("model", "section is required"))?;
        if !(m.beta >= 2.0) {
            return Err(field_error("model.beta", "beta must be >= 2"));
        }
        if !m.file.is_file() {
            return Err(field_error("model.file", format!("{} does not exist", m.file.display())));
        }
        Ok(m)
    }

    pub fn beta(&self) -> f64 {
        self.model.as_ref().map_or(default_beta(), |m| m.beta)
    }

    fn ladder_section(&self) -> Result<&LadderSection> {
        self.ladder.as_ref().ok_or_else(|| field_error("ladder", "section is required"))
    }

    fn with_window(&self, ladder: ScaleLadder) -> Result<ScaleLadder> {
        match self.ladder_section()?.window {
            Some([s, e]) => ladder.with_window(s..e).map_err(|e| field_error("ladder.window", e)),
            None => Ok(ladder),
        }
    }

    pub fn symbolic_ladder(&self) -> Result<ScaleLadder> {
        let l = self.ladder_section()?;
        let [lo, hi] =
            l.levels.ok_or_else(|| field_error("ladder.levels", "symbolic experiments need `levels = [lo, hi]`"))?;
        if lo > hi {
            return Err(field_error("ladder.levels", "lo must not exceed hi"));
        }
        let ladder = ScaleLadder::levels(lo..hi + 1, self.beta()).map_err(|e| field_error("ladder.levels", e))?;
        self.with_window(ladder)
    }

    pub fn geometric_ladder(&self) -> Result<ScaleLadder> {
        let l = self.ladder_section()?;
        let base = l.base.ok_or_else(|| field_error("ladder.base", "map experiments need a geometric `base`"))?;
        let [lo, hi] = l
            .exponents
            .ok_or_else(|| field_error("ladder.exponents", "map experiments need `exponents = [lo, hi]`"))?;
        if lo > hi {
            return Err(field_error("ladder.exponents", "lo must not exceed hi"));
        }
        let ladder = ScaleLadder::geometric(base, lo..hi + 1).map_err(|e| field_error("ladder", e))?;
        self.with_window(ladder)
    }

    pub fn sampling(&self) -> Result<SamplingSection> {
        let s = self.sampling.clone().unwrap_or(SamplingSection {
            samples: default_samples(),
            extent: None,
            exhaustive: false,
        });
        if s.samples == 0 {
            return Err(field_error("sampling.samples", "need at least one sample"));
        }
        if s.exhaustive && self.experiment.kind != Kind::RectCount {
            return Err(field_error("sampling.exhaustive", "enumeration mode is only available for rect-count"));
        }
        Ok(s)
    }

    pub fn gamma_params(&self) -> Result<(GammaParams, &GammaSection)> {
        let g = self.gamma.as_ref().ok_or_else(|| field_error("gamma", "section is required"))?;
        let mut p = GammaParams::new(g.epsilon, g.c, g.n0, g.a, self.beta()).map_err(|e| field_error("gamma", e))?;
        if let Some(h) = g.entropy {
            p = p.with_entropy(h).map_err(|e| field_error("gamma.entropy", e))?;
        }
        if g.n1 > g.n_top {
            return Err(field_error("gamma.n1", "n1 must not exceed n_top"));
        }
        if g.n_max == 0 {
            return Err(field_error("gamma.n_max", "must be >= 1"));
        }
        Ok((p, g))
    }

    pub fn counting_levels(&self) -> Result<[usize; 2]> {
        let c = self.counting.as_ref().ok_or_else(|| field_error("counting", "section is required"))?;
        let [lo, hi] = c.levels;
        if lo == 0 || lo > hi {
            return Err(field_error("counting.levels", "need 1 <= lo <= hi"));
        }
        Ok(c.levels)
    }

    pub fn product_section(&self) -> Result<&ProductSection> {
        let p = self.product.as_ref().ok_or_else(|| field_error("product", "section is required"))?;
        if !(p.delta > 0.0 && p.delta < 1.0) {
            return Err(field_error("product.delta", "must lie in (0, 1)"));
        }
        let [lo, hi] = p.levels;
        if lo == 0 || lo > hi {
            return Err(field_error("product.levels", "need 1 <= lo <= hi"));
        }
        if p.m_bound > lo {
            return Err(field_error("product.m_bound", "must not exceed the lowest level"));
        }
        Ok(p)
    }

    pub fn smooth_section(&self) -> Result<&SmoothSection> {
        let s = self.smooth.as_ref().ok_or_else(|| field_error("smooth", "section is required"))?;
        s.map.validate().map_err(|e| field_error("smooth.map", e))?;
        if s.n_orbit < 2 {
            return Err(field_error("smooth.n_orbit", "need at least two orbit points"));
        }
        Ok(s)
    }

    pub fn histogram_section(&self) -> HistogramSection {
        self.histogram.clone().unwrap_or(HistogramSection { bins: default_bins(), expected: vec![] })
    }

    /// Requested estimators, defaulting to every one available for the source.
    pub fn estimators(&self) -> Result<Vec<String>> {
        let allowed: &[&str] = if self.smooth.is_some() {
            &["box", "information", "pointwise"]
        } else {
            &["pointwise", "stable", "unstable"]
        };
        let asked = self.dimension.as_ref().map(|d| d.estimators.clone()).unwrap_or_default();
        if asked.is_empty() {
            return Ok(allowed.iter().map(|s| s.to_string()).collect());
        }
        for e in &asked {
            if !allowed.contains(&e.as_str()) {
                bail!(field_error("dimension.estimators", format!("`{e}` is not one of {allowed:?}")));
            }
        }
        Ok(asked)
    }
}

pub fn read_model(cfg: &Config) -> Result<dimlab_core::shift::MeasureModel> {
    let m = cfg.model_section()?;
    let src = std::fs::read_to_string(&m.file).with_context(|| format!("reading model {}", m.file.display()))?;
    dimlab_core::shift::parse_model(&src)
        .map_err(|e| ConfigError(format!("model file {}: {e}", m.file.display())).into())
}
