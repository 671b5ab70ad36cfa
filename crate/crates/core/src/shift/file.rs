//! Model definition documents.
//!
//! A model file is TOML. Every model has a `kind` and an alphabet size `p`:
//!
//! ```toml
//! kind = "bernoulli"          # i.i.d. symbols
//! p = 2
//! probs = [0.3, 0.7]
//! ```
//!
//! ```toml
//! kind = "markov"
//! p = 2
//! matrix = [[0.9, 0.1], [0.2, 0.8]]
//! stationary = [0.6666666666666666, 0.3333333333333333]   # optional
//! ```
//!
//! A `factor` model is a sliding block code of `width` hidden symbols applied
//! to a hidden Markov chain. The code is a table from hidden blocks (symbols
//! separated by spaces or commas) to output symbols:
//!
//! ```toml
//! kind = "factor"
//! p = 2
//! width = 2
//! [hidden]
//! kind = "markov"
//! p = 3
//! matrix = [[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.1, 0.1, 0.8]]
//! [code]
//! "0 0" = 0
//! "0 1" = 1
//! # ... one entry per hidden block
//! ```
//!
//! A `mixture` lists weighted ergodic components:
//!
//! ```toml
//! kind = "mixture"
//! p = 2
//! [[components]]
//! weight = 0.5
//! kind = "bernoulli"
//! p = 2
//! probs = [0.5, 0.5]
//! ```
//!
//! When `stationary` is omitted it is computed by power iteration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::{stationary_distribution, Bernoulli, Factor, Markov, MeasureModel, Mixture};
use super::word::Alphabet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: String,
    p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stationary: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hidden: Option<Box<RawModel>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    code: Option<BTreeMap<String, u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    components: Option<Vec<RawModel>>,
}

/// Line (1-based) of the first line that defines `field`, or 1.
fn locate(src: &str, field: &str) -> usize {
    src.lines()
        .position(|line| {
            let t = line.trim_start();
            let key = t.trim_start_matches('[').trim_start_matches('[');
            key.starts_with(field) && key[field.len()..].trim_start().starts_with(['=', ']'])
        })
        .map(|i| i + 1)
        .unwrap_or(1)
}

fn line_of_offset(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

struct Ctx<'a> {
    src: &'a str,
}

impl Ctx<'_> {
    fn err(&self, field: &str, reason: impl Into<String>) -> Error {
        Error::Parse { line: locate(self.src, field), field: field.to_string(), reason: reason.into() }
    }

    fn require<'b, T>(&self, v: &'b Option<T>, field: &str, kind: &str) -> Result<&'b T> {
        v.as_ref().ok_or_else(|| self.err(field, format!("required for kind = \"{kind}\"")))
    }

    fn build(&self, raw: &RawModel, allow_weight: bool) -> Result<MeasureModel> {
        if raw.weight.is_some() && !allow_weight {
            return Err(self.err("weight", "only allowed inside [[components]]"));
        }
        let alphabet = Alphabet::new(raw.p).map_err(|e| self.err("p", e.to_string()))?;
        match raw.kind.as_str() {
            "bernoulli" => {
                let probs = self.require(&raw.probs, "probs", "bernoulli")?;
                if probs.len() != raw.p {
                    return Err(self.err("probs", format!("expected {} entries, found {}", raw.p, probs.len())));
                }
                Ok(Bernoulli::new(probs.clone()).map_err(|e| self.err("probs", e.to_string()))?.into())
            }
            "markov" => Ok(self.markov(raw)?.into()),
            "factor" => {
                let width = *self.require(&raw.width, "width", "factor")?;
                let hidden_raw = self.require(&raw.hidden, "hidden", "factor")?;
                if hidden_raw.kind != "markov" {
                    return Err(self.err("hidden", "hidden process must be kind = \"markov\""));
                }
                let hidden = self.markov(hidden_raw)?;
                let table = self.require(&raw.code, "code", "factor")?;
                let q = hidden.size();
                let blocks = q.pow(width as u32);
                let mut code = vec![None; blocks];
                for (key, &out) in table {
                    let digits =
                        parse_block(key, width).ok_or_else(|| self.err("code", format!("bad block `{key}`")))?;
                    if digits.len() != width || digits.iter().any(|&d| d >= q) {
                        return Err(self.err(
                            "code",
                            format!("block `{key}` is not a width-{width} word over {q} hidden symbols"),
                        ));
                    }
                    let idx = digits.iter().fold(0, |acc, &d| acc * q + d);
                    code[idx] = Some(out);
                }
                let code: Option<Vec<u8>> = code.into_iter().collect();
                let code =
                    code.ok_or_else(|| self.err("code", format!("table must define all {blocks} hidden blocks")))?;
                Ok(Factor::new(alphabet, hidden, width, code).map_err(|e| self.err("code", e.to_string()))?.into())
            }
            "mixture" => {
                let comps = self.require(&raw.components, "components", "mixture")?;
                let mut parts = Vec::with_capacity(comps.len());
                for c in comps {
                    let w = c.weight.ok_or_else(|| self.err("weight", "every component needs a weight"))?;
                    parts.push((w, self.build(c, true)?));
                }
                Ok(Mixture::new(parts).map_err(|e| self.err("components", e.to_string()))?.into())
            }
            other => {
                Err(self.err("kind", format!("unknown kind `{other}` (expected bernoulli|markov|factor|mixture)")))
            }
        }
    }

    fn markov(&self, raw: &RawModel) -> Result<Markov> {
        let matrix = self.require(&raw.matrix, "matrix", "markov")?;
        if matrix.len() != raw.p {
            return Err(self.err("matrix", format!("expected {} rows, found {}", raw.p, matrix.len())));
        }
        let pi = match &raw.stationary {
            Some(pi) => pi.clone(),
            None => stationary_distribution(matrix).map_err(|e| self.err("matrix", e.to_string()))?,
        };
        let field = if raw.stationary.is_some() { "stationary" } else { "matrix" };
        Markov::new(matrix.clone(), pi).map_err(|e| self.err(field, e.to_string()))
    }
}

fn parse_block(key: &str, width: usize) -> Option<Vec<usize>> {
    let tokens: Vec<&str> = key.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
    if tokens.len() == 1 && width > 1 && tokens[0].len() == width {
        return tokens[0].chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect();
    }
    tokens.iter().map(|t| t.parse().ok()).collect()
}

/// Parses a model definition document.
pub fn parse_model(src: &str) -> Result<MeasureModel> {
    let raw: RawModel = toml::from_str(src).map_err(|e| {
        let line = e.span().map(|s| line_of_offset(src, s.start)).unwrap_or(1);
        let msg = e.message().to_string();
        let field = msg.split('`').nth(1).map(str::to_string).unwrap_or_else(|| "<document>".to_string());
        Error::Parse { line, field, reason: msg }
    })?;
    Ctx { src }.build(&raw, false)
}

fn to_raw(model: &MeasureModel) -> RawModel {
    let p = model.alphabet().size();
    match model {
        MeasureModel::Bernoulli(b) => {
            RawModel { kind: "bernoulli".into(), p, probs: Some(b.probs().to_vec()), ..Default::default() }
        }
        MeasureModel::Markov(m) => RawModel {
            kind: "markov".into(),
            p,
            matrix: Some(m.matrix()),
            stationary: Some(m.stationary().to_vec()),
            ..Default::default()
        },
        MeasureModel::Factor(f) => {
            let q = f.hidden().size();
            let code = f
                .code()
                .iter()
                .enumerate()
                .map(|(idx, &out)| {
                    let mut digits = vec![0usize; f.width()];
                    let mut x = idx;
                    for d in digits.iter_mut().rev() {
                        *d = x % q;
                        x /= q;
                    }
                    let key = digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ");
                    (key, out)
                })
                .collect();
            RawModel {
                kind: "factor".into(),
                p,
                width: Some(f.width()),
                hidden: Some(Box::new(to_raw(&f.hidden().clone().into()))),
                code: Some(code),
                ..Default::default()
            }
        }
        MeasureModel::Mixture(mix) => RawModel {
            kind: "mixture".into(),
            p,
            components: Some(
                mix.components().iter().map(|(w, c)| RawModel { weight: Some(*w), ..to_raw(c) }).collect(),
            ),
            ..Default::default()
        },
    }
}

/// Renders a model back into the document format accepted by [`parse_model`].
pub fn render_model(model: &MeasureModel) -> String {
    toml::to_string(&to_raw(model)).expect("model documents always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_kind() {
        let b = parse_model("kind = \"bernoulli\"\np = 2\nprobs = [0.3, 0.7]\n").unwrap();
        assert_eq!(b.kind(), "bernoulli");

        let m = parse_model("kind = \"markov\"\np = 2\nmatrix = [[0.9, 0.1], [0.2, 0.8]]\n").unwrap();
        match &m {
            MeasureModel::Markov(m) => assert!((m.stationary()[0] - 2.0 / 3.0).abs() < 1e-12),
            _ => panic!(),
        }

        let f = parse_model(
            r#"
kind = "factor"
p = 2
width = 2
[hidden]
kind = "markov"
p = 2
matrix = [[0.7, 0.3], [0.4, 0.6]]
[code]
"0 0" = 0
"0,1" = 1
"10" = 1
"1 1" = 0
"#,
        )
        .unwrap();
        assert_eq!(f.kind(), "factor");

        let mix = parse_model(
            r#"
kind = "mixture"
p = 2
[[components]]
weight = 0.5
kind = "bernoulli"
p = 2
probs = [0.5, 0.5]
[[components]]
weight = 0.5
kind = "bernoulli"
p = 2
probs = [0.9, 0.1]
"#,
        )
        .unwrap();
        assert!(!mix.is_ergodic());
    }

    #[test]
    fn reports_line_and_field() {
        let src = "kind = \"bernoulli\"\np = 2\n\nprobs = [0.3, 0.6]\n";
        match parse_model(src) {
            Err(Error::Parse { line, field, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(field, "probs");
            }
            other => panic!("{other:?}"),
        }
        match parse_model("kind = \"bernoulli\"\np = 2\nprobs = [0.5, 0.5]\ncolour = 1\n") {
            Err(Error::Parse { line, field, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(field, "colour");
            }
            other => panic!("{other:?}"),
        }
        match parse_model("kind = \"gibbs\"\np = 2\n") {
            Err(Error::Parse { line, field, .. }) => assert_eq!((line, field.as_str()), (1, "kind")),
            other => panic!("{other:?}"),
        }
        match parse_model("kind = \"markov\"\np = 2\nmatrix = [[0.9, 0.1], [0.2, 0.8]]\nstationary = [0.5, 0.5]\n") {
            Err(Error::Parse { line, field, .. }) => assert_eq!((line, field.as_str()), (4, "stationary")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn render_round_trips() {
        let docs = [
            "kind = \"bernoulli\"\np = 3\nprobs = [0.2, 0.3, 0.5]\n",
            "kind = \"markov\"\np = 2\nmatrix = [[0.9, 0.1], [0.2, 0.8]]\n",
            "kind = \"factor\"\np = 2\nwidth = 2\n[hidden]\nkind = \"markov\"\np = 2\nmatrix = [[0.7, 0.3], [0.4, 0.6]]\n[code]\n\"0 0\" = 0\n\"0 1\" = 1\n\"1 0\" = 1\n\"1 1\" = 0\n",
        ];
        for d in docs {
            let m = parse_model(d).unwrap();
            let again = parse_model(&render_model(&m)).unwrap();
            assert_eq!(m, again);
        }
    }
}
