//! Experiment kinds.
//!
//! | kind | sections read | CSV columns |
//! |------|---------------|-------------|
//! | dimension | model, ladder (levels), sampling, dimension; or smooth, ladder (base/exponents) | `estimator,scale,raw_value,secant_slope` |
//! | product-check | model, sampling, product | `m,fraction` then `n,mean_defect_m0,mean_defect` |
//! | rect-count | model, sampling, gamma, counting | `n,lemma,min_margin,evaluated` |
//! | young-check | smooth, ladder (base/exponents) | `estimator,scale,raw_value,secant_slope` |
//! | histogram | model, ladder (levels), sampling, histogram | `bin_lo,bin_hi,count` |
//! | compare | compare, verdict | `estimator,slope,spread` |

use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use dimlab_core::estimate::{
    box_dimension, coincidence_check, grid_pointwise_dimension, information_dimension, pointwise_dim_histogram,
    pointwise_dimension_sampled, stable_unstable_dimensions, DimensionReport,
};
use dimlab_core::product::{build_gamma, build_gamma_hat, check_counting_lemmas, verify_main_inequality, WordPool};
use dimlab_core::shift::{entropy, render_model, sample_words, smb_estimate, MeasureModel};
use dimlab_core::smooth::{iterate, verify_exact_dimension, REFERENCE_POINTS};
use serde_json::{json, Value};

use crate::config::{read_model, Config, ConfigError, Kind};

pub const SCHEMA_VERSION: u32 = 1;

/// Extent and count of the samples used to estimate entropy for models
/// without a closed form.
const SMB_SAMPLES: usize = 400;
const SMB_EXTENT: usize = 500;

pub struct Outcome {
    pub passed: bool,
    pub report: Value,
    pub csv: String,
    pub timings: Vec<(String, f64)>,
}

struct Clock {
    last: Instant,
    timings: Vec<(String, f64)>,
}

impl Clock {
    fn new() -> Self {
        Clock { last: Instant::now(), timings: Vec::new() }
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.timings.push((name.to_string(), (now - self.last).as_secs_f64()));
        self.last = now;
    }
}

fn module(name: &'static str) -> impl Fn(dimlab_core::Error) -> anyhow::Error {
    move |e| anyhow!("{name}: {e}")
}

pub fn run(cfg: &Config) -> Result<Outcome> {
    cfg.validate()?;
    let mut clock = Clock::new();
    let (passed, body, csv) = match cfg.experiment.kind {
        Kind::Dimension if cfg.smooth.is_some() => map_dimension(cfg, &mut clock)?,
        Kind::Dimension => symbolic_dimension(cfg, &mut clock)?,
        Kind::ProductCheck => product_check(cfg, &mut clock)?,
        Kind::RectCount => rect_count(cfg, &mut clock)?,
        Kind::YoungCheck => young_check(cfg, &mut clock)?,
        Kind::Histogram => histogram(cfg, &mut clock)?,
        Kind::Compare => compare(cfg, &mut clock)?,
    };
    let mut report = json!({
        "schema_version": SCHEMA_VERSION,
        "kind": cfg.experiment.kind.to_string(),
        "seed": cfg.experiment.seed,
        "passed": passed,
    });
    merge_into(&mut report, body);
    Ok(Outcome { passed, report, csv, timings: clock.timings })
}

fn merge_into(target: &mut Value, extra: Value) {
    if let (Value::Object(t), Value::Object(e)) = (target, extra) {
        t.extend(e);
    }
}

fn source_of_model(cfg: &Config, model: &MeasureModel) -> Value {
    json!({ "model": render_model(model), "beta": cfg.beta() })
}

fn curves_csv(reports: &[&DimensionReport]) -> String {
    let mut out = String::from("estimator,scale,raw_value,secant_slope\n");
    for r in reports {
        for line in r.to_csv().lines().skip(1) {
            out.push_str(&format!("{},{line}\n", r.estimator));
        }
    }
    out
}

fn entropy_nats(model: &MeasureModel, seed: u64) -> Result<(f64, &'static str)> {
    match entropy(model) {
        Ok(h) => Ok((h.nats(), "closed_form")),
        Err(_) => {
            let samples = sample_words(model, seed, SMB_SAMPLES, SMB_EXTENT);
            let est = smb_estimate(model, &samples, SMB_EXTENT).map_err(module("shift-space"))?;
            Ok((est.mean, "smb"))
        }
    }
}

fn symbolic_dimension(cfg: &Config, clock: &mut Clock) -> Result<(bool, Value, String)> {
    let model = read_model(cfg)?;
    let ladder = cfg.symbolic_ladder()?;
    let sampling = cfg.sampling()?;
    let beta = cfg.beta();
    let wanted = cfg.estimators()?;
    let extent = sampling.extent.unwrap_or(ladder.max_level()).max(ladder.max_level());
    clock.lap("load");
    let samples = sample_words(&model, cfg.experiment.seed, sampling.samples, extent);
    clock.lap("sample");
    let pointwise =
        pointwise_dimension_sampled(&model, &samples, &ladder, beta).map_err(module("dimension-estimators"))?;
    let (stable, unstable) =
        stable_unstable_dimensions(&model, &samples, &ladder, beta).map_err(module("dimension-estimators"))?;
    clock.lap("estimate");

    let tol = cfg.tolerance();
    let decomposition_error = (pointwise.slope - (stable.slope + unstable.slope)).abs();
    let expected = entropy(&model).ok().map(|h| h.in_base(beta));
    let mut passed = decomposition_error < tol;
    if let (Some(e), true) = (expected, model.is_ergodic()) {
        passed &= (pointwise.slope - e).abs() < tol;
    }
    let estimates: Vec<&DimensionReport> =
        [&pointwise, &stable, &unstable].into_iter().filter(|r| wanted.contains(&r.estimator)).collect();
    let body = json!({
        "source": source_of_model(cfg, &model),
        "samples": sampling.samples,
        "expected_dimension": expected,
        "decomposition_error": decomposition_error,
        "tolerance": tol,
        "estimates": estimates,
    });
    Ok((passed, body, curves_csv(&estimates)))
}

fn map_dimension(cfg: &Config, clock: &mut Clock) -> Result<(bool, Value, String)> {
    let s = cfg.smooth_section()?;
    let ladder = cfg.geometric_ladder()?;
    let wanted = cfg.estimators()?;
    let seed = cfg.experiment.seed;
    let orbit = iterate(&s.map, s.map.random_start(seed), s.n_orbit, seed).map_err(module("smooth-models"))?;
    clock.lap("iterate");
    let step = (s.n_orbit / REFERENCE_POINTS).max(1);
    let references: Vec<usize> = (0..s.n_orbit).step_by(step).take(REFERENCE_POINTS).collect();
    let mut estimates = Vec::new();
    for w in &wanted {
        let r = match w.as_str() {
            "box" => box_dimension(&orbit, &ladder),
            "information" => information_dimension(&orbit, &ladder),
            _ => grid_pointwise_dimension(&orbit, &ladder, &references),
        };
        estimates.push(r.map_err(module("dimension-estimators"))?);
    }
    clock.lap("estimate");
    let body = json!({
        "source": { "map": s.map, "n_orbit": s.n_orbit },
        "estimates": estimates,
    });
    let refs: Vec<&DimensionReport> = estimates.iter().collect();
    Ok((true, body, curves_csv(&refs)))
}

fn product_check(cfg: &Config, clock: &mut Clock) -> Result<(bool, Value, String)> {
    let model = read_model(cfg)?;
    let p = cfg.product_section()?;
    let sampling = cfg.sampling()?;
    let [lo, hi] = p.levels;
    let extent = sampling.extent.unwrap_or(0).max(hi + p.m_bound);
    clock.lap("load");
    let samples = sample_words(&model, cfg.experiment.seed, sampling.samples, extent);
    clock.lap("sample");
    let report = verify_main_inequality(&model, &samples, p.delta, cfg.beta(), lo..=hi, p.m_bound)
        .map_err(module("product-structure"))?;
    clock.lap("verify");
    let mut csv = String::from("m,fraction\n");
    for (m, f) in report.fraction_by_m.iter().enumerate() {
        csv.push_str(&format!("{m},{f}\n"));
    }
    csv.push_str("n,mean_defect_m0,mean_defect\n");
    for ((n, d0), (_, d)) in report.mean_defect_m0.iter().zip(&report.mean_defect) {
        csv.push_str(&format!("{n},{d0},{d}\n"));
    }
    let body = json!({ "source": source_of_model(cfg, &model), "samples": sampling.samples, "result": report });
    Ok((report.passed, body, csv))
}

fn rect_count(cfg: &Config, clock: &mut Clock) -> Result<(bool, Value, String)> {
    let model = read_model(cfg)?;
    let sampling = cfg.sampling()?;
    let (mut params, g) = cfg.gamma_params()?;
    let [lo, hi] = cfg.counting_levels()?;
    let extent = sampling.extent.unwrap_or(0).max(g.a * (hi + 2)).max(g.a * g.n_top);
    let seed = cfg.experiment.seed;
    let (h, entropy_source) = match g.entropy {
        Some(h) => (h, "config"),
        None => entropy_nats(&model, seed)?,
    };
    params = params.with_entropy(h).map_err(module("product-structure"))?;
    clock.lap("load");
    let pool = if sampling.exhaustive {
        WordPool::exhaustive(&model, extent)
    } else {
        WordPool::sampled(&model, seed, sampling.samples, extent)
    }
    .map_err(module("product-structure"))?;
    clock.lap("pool");
    let gamma = build_gamma(&model, &pool, params, g.n_max).map_err(module("product-structure"))?;
    let gamma_hat = build_gamma_hat(&pool, &gamma, g.n1, g.n_top).map_err(module("product-structure"))?;
    clock.lap("gamma");
    let report =
        check_counting_lemmas(&model, &pool, &gamma, &gamma_hat, lo..=hi).map_err(module("product-structure"))?;
    clock.lap("lemmas");
    let body = json!({
        "source": source_of_model(cfg, &model),
        "mode": pool.mode(),
        "pool_size": pool.len(),
        "entropy_source": entropy_source,
        "gamma": { "members": gamma.len(), "mass": gamma.achieved_mass, "mass_ci_halfwidth": gamma.mass_ci_halfwidth },
        "gamma_hat": { "members": gamma_hat.len(), "mass": gamma_hat.achieved_mass, "skipped_density_checks": gamma_hat.skipped_density_checks },
        "result": report,
    });
    Ok((report.passed(), body, report.to_csv()))
}

fn young_check(cfg: &Config, clock: &mut Clock) -> Result<(bool, Value, String)> {
    let s = cfg.smooth_section()?;
    let ladder = cfg.geometric_ladder()?;
    let report =
        verify_exact_dimension(&s.map, s.n_orbit, cfg.experiment.seed, &ladder).map_err(module("smooth-models"))?;
    clock.lap("verify");
    let tol = cfg.tolerance();
    let csv = curves_csv(&[&report.box_dim, &report.information, &report.pointwise, &report.d_u, &report.d_s]);
    let passed = report.passed(tol);
    let body = json!({ "source": { "map": s.map, "n_orbit": s.n_orbit }, "tolerance": tol, "result": report });
    Ok((passed, body, csv))
}

fn histogram(cfg: &Config, clock: &mut Clock) -> Result<(bool, Value, String)> {
    let model = read_model(cfg)?;
    let ladder = cfg.symbolic_ladder()?;
    let sampling = cfg.sampling()?;
    let h = cfg.histogram_section();
    clock.lap("load");
    let samples = sample_words(&model, cfg.experiment.seed, sampling.samples, ladder.max_level());
    clock.lap("sample");
    let hist = pointwise_dim_histogram(&model, &samples, &ladder, cfg.beta(), h.bins)
        .map_err(module("dimension-estimators"))?;
    clock.lap("histogram");
    let tol = cfg.tolerance();
    let matched: Vec<bool> =
        h.expected.iter().map(|e| hist.clusters.iter().any(|c| (c.center - e).abs() < tol)).collect();
    let passed = matched.iter().all(|&m| m) && (h.expected.is_empty() || hist.clusters.len() == h.expected.len());
    let mut csv = String::from("bin_lo,bin_hi,count\n");
    for (i, c) in hist.counts.iter().enumerate() {
        csv.push_str(&format!("{},{},{c}\n", hist.edges[i], hist.edges[i + 1]));
    }
    let body = json!({
        "source": source_of_model(cfg, &model),
        "samples": sampling.samples,
        "expected": h.expected,
        "tolerance": tol,
        "clusters": hist.clusters,
        "edges": hist.edges,
        "counts": hist.counts,
    });
    Ok((passed, body, csv))
}

fn load_report(path: &Path) -> Result<Value> {
    let src = std::fs::read_to_string(path).with_context(|| format!("reading report {}", path.display()))?;
    serde_json::from_str(&src).map_err(|e| ConfigError(format!("report {}: {e}", path.display())).into())
}

fn compare(cfg: &Config, clock: &mut Clock) -> Result<(bool, Value, String)> {
    let paths = &cfg.compare.as_ref().expect("validated").reports;
    let docs = paths.iter().map(|p| load_report(p)).collect::<Result<Vec<_>>>()?;
    for (doc, path) in docs.iter().zip(paths) {
        if doc["kind"] != "dimension" {
            return Err(ConfigError(format!(
                "incompatible report kinds: {} is a `{}` report, compare needs dimension reports",
                path.display(),
                doc["kind"].as_str().unwrap_or("unknown")
            ))
            .into());
        }
    }
    let mut reports: Vec<DimensionReport> = Vec::new();
    for (doc, path) in docs.iter().zip(paths) {
        let est: Vec<DimensionReport> = serde_json::from_value(doc["estimates"].clone())
            .map_err(|e| ConfigError(format!("report {}: {e}", path.display())))?;
        reports.extend(est);
    }
    clock.lap("load");
    let same_source = docs.windows(2).all(|w| w[0]["source"] == w[1]["source"]);
    let tol = cfg.tolerance();
    let verdict = coincidence_check(&reports, tol).map_err(|e| ConfigError(format!("dimension-estimators: {e}")))?;
    clock.lap("compare");
    let mut csv = String::from("estimator,slope,spread\n");
    for r in &reports {
        csv.push_str(&format!("{},{},{}\n", r.estimator, r.slope, r.spread()));
    }
    let inputs = paths.iter().map(|p| crate::output::file_digest(p)).collect::<Result<Vec<_>>>()?;
    let passed = verdict.passed && same_source;
    let body = json!({ "input_digests": inputs, "same_source": same_source, "verdict": verdict });
    Ok((passed, body, csv))
}
