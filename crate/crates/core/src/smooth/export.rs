//! Binary orbit files: a short text header followed by little-endian `f64`
//! `(x, y)` pairs.
//!
//! ```text
//! dimlab-orbit 1
//! map {"kind":"torus_aut","matrix":[[2,1],[1,1]]}
//! seed 7
//! n 1000
//! end
//! <16 * n bytes>
//! ```

use std::io::{BufRead, Write};

use super::maps::SmoothMap;
use crate::error::{Error, Result};
use crate::estimate::PointCloud;

const MAGIC: &str = "dimlab-orbit 1";

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitHeader {
    pub map: SmoothMap,
    pub seed: u64,
    pub n: usize,
}

fn io(e: std::io::Error) -> Error {
    Error::param("orbit file", e.to_string())
}

pub fn write_orbit<W: Write>(mut w: W, map: &SmoothMap, seed: u64, orbit: &PointCloud) -> Result<()> {
    if orbit.dimension() != 2 {
        return Err(Error::param("orbit", "orbit must be two-dimensional"));
    }
    let map_json = serde_json::to_string(map).map_err(|e| Error::param("map", e.to_string()))?;
    write!(w, "{MAGIC}\nmap {map_json}\nseed {seed}\nn {}\nend\n", orbit.len()).map_err(io)?;
    let mut buf = Vec::with_capacity(8 * orbit.coords().len());
    for c in orbit.coords() {
        buf.extend_from_slice(&c.to_le_bytes());
    }
    w.write_all(&buf).map_err(io)
}

pub fn read_orbit<R: BufRead>(mut r: R) -> Result<(OrbitHeader, PointCloud)> {
    let mut line = String::new();
    let mut next = |r: &mut R, lineno: usize| -> Result<String> {
        line.clear();
        r.read_line(&mut line).map_err(io)?;
        if line.is_empty() {
            return Err(Error::Parse { line: lineno, field: "header".into(), reason: "unexpected end of file".into() });
        }
        Ok(line.trim_end_matches('\n').to_string())
    };
    let bad = |lineno: usize, field: &str, reason: String| Error::Parse { line: lineno, field: field.into(), reason };

    if next(&mut r, 1)? != MAGIC {
        return Err(bad(1, "magic", format!("expected `{MAGIC}`")));
    }
    let mut map = None;
    let mut seed = None;
    let mut n = None;
    for lineno in 2.. {
        let l = next(&mut r, lineno)?;
        if l == "end" {
            break;
        }
        let (key, value) = l.split_once(' ').ok_or_else(|| bad(lineno, &l, "expected `key value`".into()))?;
        match key {
            "map" => map = Some(serde_json::from_str(value).map_err(|e| bad(lineno, key, e.to_string()))?),
            "seed" => seed = Some(value.parse().map_err(|e| bad(lineno, key, format!("{e}")))?),
            "n" => n = Some(value.parse().map_err(|e| bad(lineno, key, format!("{e}")))?),
            _ => return Err(bad(lineno, key, "unknown header field".into())),
        }
    }
    let missing = |f: &str| bad(0, f, "missing header field".into());
    let header = OrbitHeader {
        map: map.ok_or_else(|| missing("map"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
        n: n.ok_or_else(|| missing("n"))?,
    };
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(io)?;
    if bytes.len() != 16 * header.n {
        return Err(Error::param(
            "orbit file",
            format!("expected {} payload bytes, found {}", 16 * header.n, bytes.len()),
        ));
    }
    let coords = bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk"))).collect();
    Ok((header, PointCloud::new(2, coords, None)?))
}
