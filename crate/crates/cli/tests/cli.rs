use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn dimlab(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dimlab"));
    cmd.args(args).env_remove("DIMLAB_OUT");
    if let Some(d) = env_out {
        cmd.env("DIMLAB_OUT", d);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Workspace { dir: tempfile::tempdir().unwrap() };
        ws.write("uniform.toml", "kind = \"bernoulli\"\np = 2\nprobs = [0.5, 0.5]\n");
        ws.write("biased.toml", "kind = \"bernoulli\"\np = 2\nprobs = [0.3, 0.7]\n");
        ws.write(
            "mixture.toml",
            "kind = \"mixture\"\np = 2\n[[components]]\nweight = 0.5\nkind = \"bernoulli\"\np = 2\nprobs = [0.5, 0.5]\n\
             [[components]]\nweight = 0.5\nkind = \"bernoulli\"\np = 2\nprobs = [0.9, 0.1]\n",
        );
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, body: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn run(&self, sub: &str, config: &str, out: &str, extra: &[&str]) -> Output {
        let cfg = self.path(config);
        let out = self.path(out);
        let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        dimlab(&args, None)
    }

    fn report(&self, out: &str) -> Value {
        serde_json::from_str(&std::fs::read_to_string(self.path(out).join("report.json")).unwrap()).unwrap()
    }

    fn bytes(&self, out: &str, file: &str) -> Vec<u8> {
        std::fs::read(self.path(out).join(file)).unwrap()
    }
}

const UNIFORM_DIM: &str = "[experiment]\nkind = \"dimension\"\nseed = 1\n[model]\nfile = \"uniform.toml\"\n\
                           [ladder]\nlevels = [2, 10]\n[sampling]\nsamples = 50\n";

fn map_dim(estimator: &str, contractions: &str) -> String {
    format!(
        "[experiment]\nkind = \"dimension\"\nseed = 9\n[smooth]\nn_orbit = 200000\n\
         map = {{ kind = \"baker\", contractions = {contractions} }}\n\
         [ladder]\nbase = 3.0\nexponents = [1, 4]\n[dimension]\nestimators = [\"{estimator}\"]\n"
    )
}

#[test]
fn uniform_dimension_is_exact() {
    let ws = Workspace::new();
    ws.write("dim.toml", UNIFORM_DIM);
    let o = ws.run("dim", "dim.toml", "a", &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = ws.report("a");
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["passed"], true);
    let pw = &r["estimates"][0];
    assert_eq!(pw["estimator"], "pointwise");
    assert!((pw["slope"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(pw["residual"].as_f64().unwrap() < 1e-12);
    let csv = String::from_utf8(ws.bytes("a", "series.csv")).unwrap();
    assert!(csv.starts_with("estimator,scale,raw_value,secant_slope\n"));
}

#[test]
fn reruns_are_byte_identical() {
    let ws = Workspace::new();
    ws.write("dim.toml", UNIFORM_DIM.replace("uniform", "biased").as_str());
    assert_eq!(code(&ws.run("dim", "dim.toml", "a", &[])), 0);
    assert_eq!(code(&ws.run("dim", "dim.toml", "b", &["--workers", "1"])), 0);
    assert_eq!(ws.bytes("a", "report.json"), ws.bytes("b", "report.json"));
    assert_eq!(ws.bytes("a", "series.csv"), ws.bytes("b", "series.csv"));
    // A different seed changes the sample.
    assert_eq!(code(&ws.run("dim", "dim.toml", "c", &["--seed", "2"])), 0);
    assert_ne!(ws.bytes("a", "report.json"), ws.bytes("c", "report.json"));
}

#[test]
fn every_kind_reruns_identically() {
    let ws = Workspace::new();
    let configs = [
        (
            "product-check",
            "[experiment]\nkind = \"product-check\"\n[model]\nfile = \"biased.toml\"\n[sampling]\nsamples = 100\n\
             [product]\ndelta = 0.2\nlevels = [4, 8]\nm_bound = 2\n",
        ),
        (
            "rect-count",
            "[experiment]\nkind = \"rect-count\"\n[model]\nfile = \"uniform.toml\"\n[sampling]\nexhaustive = true\n\
             [gamma]\nepsilon = 0.1\nc = 2.0\nn_max = 6\nn1 = 2\nn_top = 5\n[counting]\nlevels = [2, 4]\n",
        ),
        (
            "young-check",
            "[experiment]\nkind = \"young-check\"\n[smooth]\nn_orbit = 100000\n\
             map = { kind = \"torus_aut\", matrix = [[2, 1], [1, 1]] }\n[ladder]\nbase = 2.0\nexponents = [2, 6]\n",
        ),
        (
            "histogram",
            "[experiment]\nkind = \"histogram\"\n[model]\nfile = \"mixture.toml\"\n[ladder]\nlevels = [20, 120]\n\
             [sampling]\nsamples = 200\n[histogram]\nexpected = [1.0, 0.469]\n",
        ),
    ];
    for (sub, body) in configs {
        let name = format!("{sub}.toml");
        ws.write(&name, body);
        let a = ws.run(sub, &name, &format!("{sub}-a"), &[]);
        assert_eq!(code(&a), 0, "{sub}: {}", stderr(&a));
        let b = ws.run(sub, &name, &format!("{sub}-b"), &[]);
        assert_eq!(code(&b), 0, "{sub}: {}", stderr(&b));
        assert_eq!(ws.bytes(&format!("{sub}-a"), "report.json"), ws.bytes(&format!("{sub}-b"), "report.json"), "{sub}");
    }
}

#[test]
fn manifest_digests_match_outputs() {
    let ws = Workspace::new();
    ws.write("dim.toml", UNIFORM_DIM);
    assert_eq!(code(&ws.run("dim", "dim.toml", "a", &[])), 0);
    let m: Value = serde_json::from_slice(&ws.bytes("a", "manifest.json")).unwrap();
    assert_eq!(m["command"], "dim");
    assert_eq!(m["config"]["experiment"]["seed"], 1);
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for o in outputs {
        let bytes = ws.bytes("a", o["file"].as_str().unwrap());
        let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(o["sha256"], hex.as_str());
    }
    assert!(!m["timings"].as_array().unwrap().is_empty());
}

#[test]
fn beta_below_two_is_a_config_error() {
    let ws = Workspace::new();
    ws.write("dim.toml", &UNIFORM_DIM.replace("[ladder]", "beta = 1.5\n[ladder]"));
    let o = ws.run("dim", "dim.toml", "a", &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("beta must be >= 2"), "{}", stderr(&o));
    let o = ws.run("validate", "dim.toml", "a", &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn config_errors_exit_two() {
    let ws = Workspace::new();
    ws.write("dim.toml", UNIFORM_DIM);
    let o = ws.run("histogram", "dim.toml", "a", &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("experiment.kind"));
    ws.write("bad.toml", "[experiment]\nkind = \"dimension\"\nsede = 1\n");
    let o = ws.run("dim", "bad.toml", "a", &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    ws.write("missing.toml", &UNIFORM_DIM.replace("uniform.toml", "nope.toml"));
    assert_eq!(code(&ws.run("dim", "missing.toml", "a", &[])), 2);
    assert_eq!(code(&ws.run("dim", "dim.toml", "a", &["--exhaustive"])), 2);
    assert_eq!(code(&dimlab(&["dim"], None)), 2);
}

#[test]
fn validate_prints_a_round_trippable_config() {
    let ws = Workspace::new();
    ws.write("dim.toml", UNIFORM_DIM);
    let o = ws.run("validate", "dim.toml", "a", &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let printed = String::from_utf8(o.stdout).unwrap();
    let again = ws.write("again.toml", &printed);
    let o2 = dimlab(&["validate", "--config", again.to_str().unwrap()], None);
    assert_eq!(code(&o2), 0, "{}", stderr(&o2));
    assert_eq!(String::from_utf8(o2.stdout).unwrap(), printed);
    assert!(!ws.path("a").exists(), "validate writes nothing");
}

#[test]
fn output_directory_defaults_to_env() {
    let ws = Workspace::new();
    ws.write("dim.toml", UNIFORM_DIM);
    let cfg = ws.path("dim.toml");
    let env_dir = ws.path("from-env");
    let o = dimlab(&["dim", "--config", cfg.to_str().unwrap()], Some(&env_dir));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(env_dir.join("report.json").is_file());
    assert!(env_dir.join("manifest.json").is_file());
}

fn compare_config(ws: &Workspace, name: &str, reports: &[&str]) {
    let list: Vec<String> = reports.iter().map(|r| format!("{:?}", format!("{r}/report.json"))).collect();
    ws.write(
        name,
        &format!(
            "[experiment]\nkind = \"compare\"\n[compare]\nreports = [{}]\n[verdict]\ntolerance = 0.05\n",
            list.join(", ")
        ),
    );
}

#[test]
fn compare_estimators_on_one_map() {
    let ws = Workspace::new();
    let skinny = "[0.3333333333333333, 0.3333333333333333]";
    for e in ["box", "information", "pointwise"] {
        ws.write(&format!("{e}.toml"), &map_dim(e, skinny));
        let o = ws.run("dim", &format!("{e}.toml"), e, &[]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    ws.write("other.toml", &map_dim("box", "[0.5, 0.5]"));
    assert_eq!(code(&ws.run("dim", "other.toml", "other", &[])), 0);

    compare_config(&ws, "same.toml", &["box", "information", "pointwise"]);
    let o = ws.run("compare", "same.toml", "same", &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = ws.report("same");
    assert_eq!(v["verdict"]["passed"], true);
    assert_eq!(v["input_digests"].as_array().unwrap().len(), 3);

    compare_config(&ws, "diff.toml", &["box", "other"]);
    let o = ws.run("compare", "diff.toml", "diff", &[]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert_eq!(ws.report("diff")["same_source"], false);

    compare_config(&ws, "single.toml", &["box"]);
    let o = ws.run("compare", "single.toml", "single", &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("need >= 2"), "{}", stderr(&o));

    compare_config(&ws, "mixed.toml", &["box", "diff"]);
    let o = ws.run("compare", "mixed.toml", "mixed", &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("incompatible report kinds"), "{}", stderr(&o));
}

#[test]
fn failing_verdict_exits_one() {
    let ws = Workspace::new();
    ws.write(
        "hist.toml",
        "[experiment]\nkind = \"histogram\"\n[model]\nfile = \"mixture.toml\"\n[ladder]\nlevels = [20, 80]\n\
         [sampling]\nsamples = 100\n[histogram]\nexpected = [1.5]\n",
    );
    let o = ws.run("histogram", "hist.toml", "h", &[]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert_eq!(ws.report("h")["passed"], false);
}
