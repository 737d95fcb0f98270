//! Geodesics on surfaces of revolution, integrated in the `(s, φ)` chart with the
//! heading angle `ψ` measured from the meridian direction `+s`.

use std::f64::consts::PI;

use super::{Point, Profile};
use crate::numerics::{wrap, wrap_signed};

const MAX_STEP: f64 = 2.5e-3;

/// State `(s, φ, ψ, J, J')`; `J` is the normal Jacobi field with `J(0)=0, J'(0)=1`.
type State = [f64; 5];

fn deriv(p: &Profile, y: &State) -> State {
    let (s, psi) = (y[0], y[2]);
    let rho = p.rho(s);
    let (sp, cp) = psi.sin_cos();
    let (dphi, dpsi) = if sp == 0.0 || rho <= 0.0 {
        (0.0, 0.0)
    } else {
        (sp / rho, -p.rho_prime(s) * sp / rho)
    };
    [cp, dphi, dpsi, y[4], -p.curvature(s) * y[3]]
}

fn rk4(p: &Profile, y: &State, h: f64) -> State {
    let add = |a: &State, b: &State, c: f64| -> State {
        [
            a[0] + c * b[0],
            a[1] + c * b[1],
            a[2] + c * b[2],
            a[3] + c * b[3],
            a[4] + c * b[4],
        ]
    };
    let k1 = deriv(p, y);
    let k2 = deriv(p, &add(y, &k1, 0.5 * h));
    let k3 = deriv(p, &add(y, &k2, 0.5 * h));
    let k4 = deriv(p, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..5 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Fold a chart state back into `s ∈ [0, L]` after crossing a pole.
fn fold(p: &Profile, y: &mut State) {
    let len = p.length();
    if y[0] < 0.0 {
        y[0] = -y[0];
        y[1] += PI;
        y[2] = PI - y[2];
    } else if y[0] > len {
        y[0] = 2.0 * len - y[0];
        y[1] += PI;
        y[2] = PI - y[2];
    }
}

/// Walk the geodesic from `start` with initial bearing (0 = `+s`, π/2 = `+φ`)
/// and report the point and Jacobi field `J` at each of the increasing arclengths
/// `radii`. At a pole the bearing is read as the meridian `φ = bearing` leaving it.
pub(crate) fn march(p: &Profile, start: Point, bearing: f64, radii: &[f64]) -> Vec<(Point, f64)> {
    let len = p.length();
    let pole = if start.0 <= 0.0 {
        Some(false)
    } else if start.0 >= len {
        Some(true)
    } else {
        None
    };
    if let Some(south) = pole {
        // meridians leave a pole; J equals the parallel radius
        return radii
            .iter()
            .map(|&r| {
                let s = if south { len - r } else { r };
                let q = normalize(p, s, bearing);
                (q, p.rho(q.0))
            })
            .collect();
    }
    let mut y: State = [start.0, start.1, bearing, 0.0, 1.0];
    let mut t = 0.0;
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let span = r - t;
        if span > 0.0 {
            let n = (span / MAX_STEP).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for _ in 0..n {
                y = rk4(p, &y, h);
                fold(p, &mut y);
            }
            t = r;
        }
        out.push((normalize(p, y[0], y[1]), y[3]));
    }
    out
}

fn normalize(p: &Profile, s: f64, phi: f64) -> Point {
    let len = p.length();
    let mut s = wrap(s, 2.0 * len);
    let mut phi = phi;
    if s > len {
        s = 2.0 * len - s;
        phi += PI;
    }
    Point(s, wrap(phi, 2.0 * PI))
}

fn endpoint(p: &Profile, start: Point, psi: f64, sigma: f64) -> Point {
    march(p, start, psi, &[sigma])[0].0
}

/// Residual of a shot, measured in lengths: meridian offset and parallel offset
/// scaled by the target's parallel radius.
fn miss(p: &Profile, a: Point, target: Point) -> [f64; 2] {
    let rho = p.rho(target.0).max(1e-12);
    [a.0 - target.0, wrap_signed(a.1 - target.1, 2.0 * PI) * rho]
}

/// Newton shooting on `(ψ0, σ)`; returns the converged length.
fn shoot(p: &Profile, from: Point, to: Point, psi0: f64, sigma0: f64) -> Option<f64> {
    let (mut psi, mut sigma) = (psi0, sigma0);
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let mut res = miss(p, endpoint(p, from, psi, sigma), to);
    for _ in 0..60 {
        let rn = norm(res);
        if rn < 1e-11 {
            return Some(sigma);
        }
        let d = 1e-7;
        let r_psi = miss(p, endpoint(p, from, psi + d, sigma), to);
        let r_sig = miss(p, endpoint(p, from, psi, sigma + d), to);
        let j = [
            [(r_psi[0] - res[0]) / d, (r_sig[0] - res[0]) / d],
            [(r_psi[1] - res[1]) / d, (r_sig[1] - res[1]) / d],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-14 {
            return None;
        }
        let dpsi = -(j[1][1] * res[0] - j[0][1] * res[1]) / det;
        let dsig = -(-j[1][0] * res[0] + j[0][0] * res[1]) / det;
        let mut step = 1.0;
        loop {
            let cand_psi = psi + step * dpsi;
            let cand_sig = sigma + step * dsig;
            if cand_sig > 0.0 {
                let r = miss(p, endpoint(p, from, cand_psi, cand_sig), to);
                if norm(r) < rn {
                    psi = cand_psi;
                    sigma = cand_sig;
                    res = r;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-6 {
                return if rn < 1e-8 { Some(sigma) } else { None };
            }
        }
    }
    if norm(res) < 1e-8 {
        Some(sigma)
    } else {
        None
    }
}

pub(crate) fn revolution_distance(p: &Profile, a: Point, b: Point) -> f64 {
    let len = p.length();
    let a_pole = a.0 <= 0.0 || a.0 >= len;
    let b_pole = b.0 <= 0.0 || b.0 >= len;
    // paths through a pole: meridian to the pole and out along another meridian
    let via_poles = (a.0 + b.0).min(2.0 * len - a.0 - b.0);
    let dphi = wrap_signed(b.1 - a.1, 2.0 * PI);
    if a_pole || b_pole {
        return if a_pole {
            if a.0 <= 0.0 {
                b.0
            } else {
                len - b.0
            }
        } else if b.0 <= 0.0 {
            a.0
        } else {
            len - a.0
        };
    }
    let mut best = via_poles;
    if dphi == 0.0 {
        best = best.min((b.0 - a.0).abs());
    }
    let mid_rho = p.rho(0.5 * (a.0 + b.0)).max(1e-9);
    let dx = b.0 - a.0;
    for wind in [0.0, -dphi.signum() * 2.0 * PI] {
        let dy = (dphi + wind) * mid_rho;
        let guess = dx.hypot(dy);
        if wind != 0.0 && guess >= 1.5 * best {
            continue;
        }
        if let Some(sigma) = shoot(p, a, b, dy.atan2(dx), guess) {
            best = best.min(sigma);
        }
    }
    best
}
