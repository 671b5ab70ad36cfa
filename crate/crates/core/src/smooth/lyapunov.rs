use serde::{Deserialize, Serialize};

use super::maps::SmoothMap;
use crate::error::{Error, Result};
use crate::estimate::PointCloud;
use crate::shift::EntropyValue;

/// Shortest orbit accepted by the QR iteration.
pub const MIN_QR_STEPS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LyapunovMethod {
    ClosedForm,
    QrIteration,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub lambda_u: f64,
    pub lambda_s: f64,
    pub method: LyapunovMethod,
    pub n_steps: usize,
}

type Mat = [[f64; 2]; 2];

fn differential(map: &SmoothMap, p: &[f64]) -> Mat {
    match map {
        SmoothMap::Baker(b) => {
            let i = b.branch(p[0]);
            [[1.0 / b.widths()[i], 0.0], [0.0, b.contractions[i]]]
        }
        SmoothMap::TorusAut(t) => t.matrix.map(|row| row.map(|v| v as f64)),
    }
}

/// Lyapunov exponents of `map` along `orbit` (a 2-D cloud, in time order).
///
/// Closed form: for baker maps, Birkhoff averages of `ln(1/p_i)` and `ln a_i`
/// over the visited branches; for toral automorphisms, the log moduli of the
/// eigenvalues. QR iteration pushes an orthonormal frame through the
/// differentials and averages the logs of the Gram-Schmidt diagonal.
pub fn lyapunov(map: &SmoothMap, orbit: &PointCloud, method: LyapunovMethod) -> Result<LyapunovEstimate> {
    map.validate()?;
    if orbit.dimension() != 2 {
        return Err(Error::param("orbit", "orbit must be two-dimensional"));
    }
    let n = orbit.len();
    let (lambda_u, lambda_s) = match method {
        LyapunovMethod::ClosedForm => {
            if n == 0 {
                return Err(Error::param("orbit", "orbit is empty"));
            }
            closed_form(map, orbit)
        }
        LyapunovMethod::QrIteration => {
            if n < MIN_QR_STEPS {
                return Err(Error::param(
                    "orbit",
                    format!("QR iteration needs at least {MIN_QR_STEPS} points, got {n}"),
                ));
            }
            qr_iteration(map, orbit)?
        }
    };
    Ok(LyapunovEstimate { lambda_u, lambda_s, method, n_steps: n })
}

fn closed_form(map: &SmoothMap, orbit: &PointCloud) -> (f64, f64) {
    match map {
        SmoothMap::TorusAut(t) => {
            let (lu, ls) = t.eigenvalues();
            (lu.abs().ln(), ls.abs().ln())
        }
        SmoothMap::Baker(b) => {
            let widths = b.widths();
            let n = orbit.len();
            let (mut su, mut ss) = (0.0, 0.0);
            for t in 0..n {
                let i = b.branch(orbit.point(t)[0]);
                su -= widths[i].ln();
                ss += b.contractions[i].ln();
            }
            (su / n as f64, ss / n as f64)
        }
    }
}

fn qr_iteration(map: &SmoothMap, orbit: &PointCloud) -> Result<(f64, f64)> {
    // Columns of `q` are the frame vectors.
    let mut q: Mat = [[1.0, 0.0], [0.0, 1.0]];
    let (mut s1, mut s2) = (0.0, 0.0);
    for t in 0..orbit.len() {
        let j = differential(map, orbit.point(t));
        let v1 = [j[0][0] * q[0][0] + j[0][1] * q[1][0], j[1][0] * q[0][0] + j[1][1] * q[1][0]];
        let v2 = [j[0][0] * q[0][1] + j[0][1] * q[1][1], j[1][0] * q[0][1] + j[1][1] * q[1][1]];
        let r11 = v1[0].hypot(v1[1]);
        if !(r11 > 0.0 && r11.is_finite()) {
            return Err(Error::DegenerateDifferential(t));
        }
        let e1 = [v1[0] / r11, v1[1] / r11];
        let r12 = e1[0] * v2[0] + e1[1] * v2[1];
        let w = [v2[0] - r12 * e1[0], v2[1] - r12 * e1[1]];
        let r22 = w[0].hypot(w[1]);
        if !(r22 > 0.0 && r22.is_finite()) {
            return Err(Error::DegenerateDifferential(t));
        }
        s1 += r11.ln();
        s2 += r22.ln();
        q = [[e1[0], w[0] / r22], [e1[1], w[1] / r22]];
    }
    let n = orbit.len() as f64;
    Ok((s1 / n, s2 / n))
}

/// Predicted dimension `h (1/λ_u - 1/λ_s)` of a hyperbolic surface measure.
pub fn young_formula(h: EntropyValue, lam: &LyapunovEstimate) -> Result<f64> {
    if !(lam.lambda_u > 0.0 && lam.lambda_s < 0.0) {
        return Err(Error::ExponentSign { lambda_u: lam.lambda_u, lambda_s: lam.lambda_s });
    }
    Ok(h.nats() * (1.0 / lam.lambda_u - 1.0 / lam.lambda_s))
}
