//! Nodal and critical sets of eigenfunctions: contour extraction, length
//! estimates and power-law fits.
//!
//! The critical set is measured through the level sets `{|∇u| = δ}`. Around a
//! curve of transversally nondegenerate critical points these are two parallel
//! curves, so `L(δ) → 2·H¹(C_u)`; around isolated critical points they are small
//! loops with `L(δ) = O(δ)`.

mod contour;

use std::collections::HashMap;

use crate::error::{invalid, Error, Result};
use crate::manifolds::{ModelSurface, Point};
use crate::numerics::linear_fit;
use crate::spectra::{covariant_hessian, ChartField};

pub use contour::{
    extract_level_set, write_polylines_csv, ChartGrid, Polyline, SampledGrid, MIN_GRID,
};

/// `H¹` of the nodal set `{u = 0}`.
pub fn nodal_measure(field: &impl ChartField, grid: &ChartGrid) -> Result<f64> {
    let f = |p: Point| field.value(p);
    Ok(extract_level_set(&f, 0.0, grid)?
        .iter()
        .map(|l| l.length)
        .sum())
}

/// Geometric level sequence `δ_j = δ₀·2^{−j}`, `j = 0..=halvings`, with `δ₀`
/// given relative to the grid maximum of `|∇u|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSchedule {
    pub delta0: f64,
    pub halvings: usize,
}

impl Default for LevelSchedule {
    fn default() -> Self {
        LevelSchedule {
            delta0: 0.2,
            halvings: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Curve,
    Points,
    /// Level lengths did not settle; only the raw sequence is meaningful.
    Withheld,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Curve => "curve",
            Verdict::Points => "points",
            Verdict::Withheld => "withheld",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureEstimate {
    pub levels: Vec<f64>,
    pub level_lengths: Vec<f64>,
    pub extrapolated: f64,
    pub verdict: Verdict,
    pub point_count: Option<usize>,
}

/// Limit of `L(δ)` from the three finest levels, removing the `δ` and `δ²` terms.
fn richardson(lengths: &[f64]) -> f64 {
    let n = lengths.len();
    (8.0 * lengths[n - 1] - 6.0 * lengths[n - 2] + lengths[n - 3]) / 3.0
}

struct LevelData {
    levels: Vec<f64>,
    lengths: Vec<f64>,
    limit: f64,
    verdict: Verdict,
}

fn level_sequence(
    sampled: &SampledGrid,
    schedule: LevelSchedule,
    length: impl Fn(f64) -> f64,
) -> Result<LevelData> {
    if schedule.halvings < 4 {
        return Err(invalid(
            "halvings",
            format!("need at least 4 level halvings, got {}", schedule.halvings),
        ));
    }
    if !(schedule.delta0 > 0.0 && schedule.delta0 < 1.0) {
        return Err(invalid(
            "delta0",
            format!("relative level must lie in (0, 1), got {}", schedule.delta0),
        ));
    }
    let top = sampled.max_abs();
    if top < 1e-300 {
        return Err(Error::TrivialNorm {
            what: "gradient on the grid".into(),
            value: top,
        });
    }
    let levels: Vec<f64> = (0..=schedule.halvings)
        .map(|j| schedule.delta0 * top * 0.5f64.powi(j as i32))
        .collect();
    let lengths: Vec<f64> = levels.iter().map(|&d| length(d)).collect();
    let first = lengths[0];
    let last = lengths[lengths.len() - 1];
    let prev = lengths[lengths.len() - 2];
    let verdict = if first == 0.0 || last / first < 0.2 {
        Verdict::Points
    } else if (last - prev).abs() > 0.2 * last {
        Verdict::Withheld
    } else {
        Verdict::Curve
    };
    let r = richardson(&lengths);
    let mut limit = if r > 0.0 { 0.5 * r } else { 0.0 };
    if verdict == Verdict::Points {
        limit = limit.min(0.5 * last);
    }
    Ok(LevelData {
        levels,
        lengths,
        limit,
        verdict,
    })
}

/// Estimates `H¹` of the critical set from the level sets of `|∇u|`.
pub fn critical_measure(
    field: &impl ChartField,
    grid: &ChartGrid,
    schedule: LevelSchedule,
) -> Result<MeasureEstimate> {
    let g = |p: Point| {
        let v = field.grad(p);
        v[0].hypot(v[1])
    };
    let sampled = SampledGrid::new(grid, &g);
    let data = level_sequence(&sampled, schedule, |d| sampled.level_length(d))?;
    let point_count =
        if data.verdict == Verdict::Points && grid.cells()[0] >= 128 && grid.cells()[1] >= 128 {
            Some(critical_points(field, grid)?.points.len())
        } else {
            None
        };
    Ok(MeasureEstimate {
        levels: data.levels,
        level_lengths: data.lengths,
        extrapolated: data.limit,
        verdict: data.verdict,
        point_count,
    })
}

/// Zero-set measure of a gradient norm inside the chart disc `|x − center| ≤ radius`,
/// by the same level-set extrapolation as [`critical_measure`].
pub fn critical_measure_in_disc(
    gradient_norm: &(dyn Fn(Point) -> f64 + Sync),
    grid: &ChartGrid,
    schedule: LevelSchedule,
    center: Point,
    radius: f64,
) -> Result<MeasureEstimate> {
    if !(radius > 0.0) {
        return Err(invalid("radius", format!("must be positive, got {radius}")));
    }
    let sampled = SampledGrid::new(grid, gradient_norm);
    let data = level_sequence(&sampled, schedule, |d| {
        sampled.level_length_in_disc(d, center, radius)
    })?;
    Ok(MeasureEstimate {
        levels: data.levels,
        level_lengths: data.lengths,
        extrapolated: data.limit,
        verdict: data.verdict,
        point_count: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CriticalKind {
    Maximum,
    Minimum,
    Saddle,
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalPoint {
    pub point: Point,
    pub kind: CriticalKind,
    /// Eigenvalues of the covariant Hessian, ascending.
    pub hessian_eigenvalues: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoints {
    pub points: Vec<CriticalPoint>,
    /// Seeds whose Newton iteration did not converge.
    pub unresolved: usize,
}

fn sym_eigen(m: [[f64; 2]; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
    let mean = 0.5 * (a + c);
    let rad = (0.5 * (a - c)).hypot(b);
    let (l1, l2) = (mean - rad, mean + rad);
    // eigenvector for l2; l1's is its rotation
    let v = if b.abs() > 1e-300 || (a - c).abs() > 1e-300 {
        let theta = 0.5 * (2.0 * b).atan2(a - c);
        [theta.cos(), theta.sin()]
    } else {
        [1.0, 0.0]
    };
    ([l1, l2], [[-v[1], v[0]], v])
}

fn is_pole(surface: &ModelSurface, p: Point) -> Option<f64> {
    if surface.is_flat() {
        return None;
    }
    let len = surface.chart_extent()[0];
    if p.0 < 1e-7 {
        Some(0.0)
    } else if p.0 > len - 1e-7 {
        Some(len)
    } else {
        None
    }
}

/// Critical points seeded from grid cells where both chart partials change sign,
/// refined by Newton iteration and classified by the covariant Hessian.
pub fn critical_points(field: &impl ChartField, grid: &ChartGrid) -> Result<CriticalPoints> {
    let cells = grid.cells();
    if cells[0] < 128 || cells[1] < 128 {
        return Err(Error::GridTooCoarse(format!(
            "critical point search needs 128 cells per axis, got {} x {}",
            cells[0], cells[1]
        )));
    }
    let surface = *field.surface();
    let u1 = grid.sample(&|p| field.jet(p).u1);
    let u2 = grid.sample(&|p| field.jet(p).u2);
    let usup = grid
        .sample(&|p| field.value(p))
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let lambda = field.lambda();
    let grad_tol = 1e-9 * lambda.sqrt().max(1.0) * usup.max(f64::MIN_POSITIVE);
    let det_tol = 1e-8 * lambda * lambda * usup * usup;
    let whole = grid.is_whole();
    let h = [grid.spacing(0), grid.spacing(1)];
    let origin = grid.lower();
    let idx = |i: usize, j: usize| grid.node_index(i, j);

    let mut found: Vec<CriticalPoint> = Vec::new();
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut unresolved = 0;
    let mut seeds: Vec<Point> = Vec::new();
    if whole && !surface.is_flat() {
        // Meridian derivatives at a pole are the gradient's components along
        // two directions; linear extrapolation from two offsets removes the O(θ) term.
        let len = surface.chart_extent()[0];
        for (x1, dir) in [(0.0, 1.0), (len, -1.0)] {
            let e = 1e-6 * len;
            let d = |phi: f64| {
                let at = |t: f64| field.jet(Point(x1 + dir * t, phi)).u1;
                2.0 * at(e) - at(2.0 * e)
            };
            let (a, _, _) = surface.metric(Point(0.5 * len, 0.0));
            if d(0.0).hypot(d(0.5 * std::f64::consts::PI)) <= grad_tol * a {
                seeds.push(Point(x1, 0.0));
            }
        }
    }
    let pole_seeds = seeds.len();
    for i in 0..cells[0] {
        for j in 0..cells[1] {
            let corners = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
            let changes = |v: &Vec<f64>| {
                let (mn, mx) = corners
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &k| {
                        (a.min(v[k]), b.max(v[k]))
                    });
                mn <= 0.0 && mx >= 0.0
            };
            if !(changes(&u1) && changes(&u2)) {
                continue;
            }
            seeds.push(Point(
                origin.0 + (i as f64 + 0.5) * h[0],
                origin.1 + (j as f64 + 0.5) * h[1],
            ));
        }
    }
    for (n, seed) in seeds.into_iter().enumerate() {
        let p = if n < pole_seeds {
            seed
        } else {
            match newton(field, grid, whole, seed, grad_tol) {
                Some(p) => p,
                None => {
                    unresolved += 1;
                    continue;
                }
            }
        };
        let key_point = match is_pole(&surface, p) {
            Some(x1) if whole => Point(x1, 0.0),
            _ => p,
        };
        let q = 1e-5;
        let key = (
            (key_point.0 / q).round() as i64,
            (key_point.1 / q).round() as i64,
        );
        let mut duplicate = false;
        'scan: for di in -1..=1 {
            for dj in -1..=1 {
                if let Some(list) = buckets.get(&(key.0 + di, key.1 + dj)) {
                    for &k in list {
                        if grid.segment_length(found[k].point, key_point) < 1e-6 {
                            duplicate = true;
                            break 'scan;
                        }
                    }
                }
            }
        }
        if duplicate {
            continue;
        }
        let hp = match is_pole(&surface, key_point) {
            Some(x1) if whole => Point(if x1 == 0.0 { 1e-5 } else { x1 - 1e-5 }, key_point.1),
            _ => key_point,
        };
        let hess = covariant_hessian(&surface, hp, &field.jet(hp));
        let (ev, _) = sym_eigen(hess);
        let det = ev[0] * ev[1];
        let kind = if det.abs() < det_tol {
            CriticalKind::Degenerate
        } else if det < 0.0 {
            CriticalKind::Saddle
        } else if ev[1] < 0.0 {
            CriticalKind::Maximum
        } else {
            CriticalKind::Minimum
        };
        buckets.entry(key).or_default().push(found.len());
        found.push(CriticalPoint {
            point: key_point,
            kind,
            hessian_eigenvalues: ev,
        });
    }
    Ok(CriticalPoints {
        points: found,
        unresolved,
    })
}

/// Newton iteration on the chart gradient with a pseudo-inverse Jacobian, so
/// that seeds on critical curves converge onto the curve.
fn newton(
    field: &impl ChartField,
    grid: &ChartGrid,
    whole: bool,
    seed: Point,
    tol: f64,
) -> Option<Point> {
    let surface = field.surface();
    let mut p = seed;
    for _ in 0..50 {
        let q = grid.eval_point(p);
        let j = field.jet(q);
        let (ev, vecs) = sym_eigen([[j.u11, j.u12], [j.u12, j.u22]]);
        let cut = 1e-10 * ev[0].abs().max(ev[1].abs());
        let g = [j.u1, j.u2];
        let mut step = [0.0; 2];
        for k in 0..2 {
            if ev[k].abs() > cut && ev[k] != 0.0 {
                let c = (vecs[k][0] * g[0] + vecs[k][1] * g[1]) / ev[k];
                step[0] -= c * vecs[k][0];
                step[1] -= c * vecs[k][1];
            }
        }
        let size = step[0].hypot(step[1]);
        p = Point(p.0 + step[0], p.1 + step[1]);
        if whole {
            p = surface.normalize(p);
        }
        if size < 1e-13 * (1.0 + p.0.abs().max(p.1.abs())) {
            let j = field.jet(grid.eval_point(p));
            if j.u1.hypot(j.u2) <= tol {
                return Some(p);
            }
            return None;
        }
    }
    let j = field.jet(grid.eval_point(p));
    (j.u1.hypot(j.u2) <= tol).then_some(p)
}

/// Distinct `x1` values of the degenerate critical points (latitudes of
/// critical circles on a surface of revolution), merged within `tol` and
/// excluding the poles.
pub fn degenerate_rows(surface: &ModelSurface, points: &[CriticalPoint], tol: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = points
        .iter()
        .filter(|c| c.kind == CriticalKind::Degenerate && is_pole(surface, c.point).is_none())
        .map(|c| c.point.0)
        .collect();
    xs.sort_by(f64::total_cmp);
    let mut rows: Vec<f64> = Vec::new();
    for x in xs {
        if rows.last().is_none_or(|&r| x - r > tol) {
            rows.push(x);
        }
    }
    rows
}

/// Least-squares fit of `ln measure = slope·ln λ + intercept`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerLawFit {
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl PowerLawFit {
    /// `exp(intercept)`, the empirical constant in `measure ≈ C·λ^slope`.
    pub fn prefactor(&self) -> f64 {
        self.intercept.exp()
    }
}

pub fn scaling_fit(samples: &[(f64, f64)]) -> Result<PowerLawFit> {
    if samples.len() < 3 {
        return Err(invalid(
            "samples",
            format!("need at least 3 samples, got {}", samples.len()),
        ));
    }
    if let Some(&(l, m)) = samples.iter().find(|&&(l, m)| !(l > 0.0 && m > 0.0)) {
        return Err(invalid(
            "samples",
            format!("eigenvalue and measure must be positive, got ({l}, {m})"),
        ));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(PowerLawFit {
        samples: samples.to_vec(),
        slope,
        intercept,
        r_squared: r2.clamp(0.0, 1.0),
    })
}
