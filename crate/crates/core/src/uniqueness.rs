//! Three-sphere, doubling, lower-bound and elliptic-estimate experiments for
//! gradients of eigenfunctions.
//!
//! Norms over nested balls are assembled from disjoint pieces (`B_r` plus the
//! annulus `A_{r,2r}`), so they are monotone in the radius exactly, not just up
//! to quadrature error.

use std::f64::consts::PI;

use crate::carleman::WeightParams;
use crate::error::{invalid, Error, Result};
use crate::fieldcalc::{gradient_norms, norms_over_region, NormKind, Norms};
use crate::manifolds::{ModelSurface, Point, Region};
use crate::numerics::halton_2d;
use crate::spectra::{fd_laplacian, legendre, ChartField, EigenPair, Provenance};

/// Norms below this are treated as numerically vanishing.
pub const TRIVIAL_NORM: f64 = 1e-14;

/// `A_R = φ(R/4) − φ(R)`, `B_R = −(φ(3R/2) − φ(R))`, `α = A_R / (A_R + B_R)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaReport {
    pub a_r: f64,
    pub b_r: f64,
    pub alpha: f64,
}

pub fn alpha_from_weight(params: &WeightParams, r: f64) -> Result<AlphaReport> {
    if !(r > 0.0 && r < params.max_radius()) {
        return Err(invalid(
            "R",
            format!("must lie in (0, e^T0 = {}), got {r}", params.max_radius()),
        ));
    }
    let a_r = params.phi(r / 4.0) - params.phi(r);
    let b_r = -(params.phi(1.5 * r) - params.phi(r));
    Ok(AlphaReport {
        a_r,
        b_r,
        alpha: a_r / (a_r + b_r),
    })
}

/// Observed `(min A_R, max A_R, min B_R, max B_R)` over a grid of radii.
pub fn alpha_bounds(params: &WeightParams, radii: &[f64]) -> Result<(f64, f64, f64, f64)> {
    if radii.is_empty() {
        return Err(invalid("radii", "empty grid"));
    }
    let mut out = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &r in radii {
        let a = alpha_from_weight(params, r)?;
        out.0 = out.0.min(a.a_r);
        out.1 = out.1.max(a.a_r);
        out.2 = out.2.min(a.b_r);
        out.3 = out.3.max(a.b_r);
    }
    Ok(out)
}

fn check_nonzero(what: impl FnOnce() -> String, value: f64) -> Result<f64> {
    if value < TRIVIAL_NORM || !value.is_finite() {
        Err(Error::TrivialNorm {
            what: what(),
            value,
        })
    } else {
        Ok(value)
    }
}

fn check_radius(surface: &ModelSurface, r: f64) -> Result<()> {
    let inj = surface.injectivity_radius();
    if !(r > 0.0) {
        return Err(invalid("R", format!("must be positive, got {r}")));
    }
    if 2.0 * r >= inj {
        return Err(Error::InvalidRegion(format!(
            "2R = {} is not below the injectivity bound {inj}",
            2.0 * r
        )));
    }
    Ok(())
}

fn combine(a: Norms, b: Norms) -> Norms {
    Norms {
        l2: a.l2.hypot(b.l2),
        sup: a.sup.max(b.sup),
    }
}

/// Gradient norms over `B_{r_0} ⊂ B_{r_1} ⊂ …` for increasing radii, built from
/// disjoint pieces.
pub fn nested_gradient_norms(
    field: &impl ChartField,
    center: Point,
    radii: &[f64],
    order: usize,
) -> Result<Vec<Norms>> {
    let mut out: Vec<Norms> = Vec::with_capacity(radii.len());
    let mut prev = 0.0;
    for &r in radii {
        if r <= prev {
            return Err(invalid("radii", "must be strictly increasing"));
        }
        let region = if prev == 0.0 {
            Region::ball(center, r)
        } else {
            Region::annulus(center, prev, r)
        };
        let piece = gradient_norms(field, &region, order)?;
        out.push(match out.last() {
            Some(acc) => combine(*acc, piece),
            None => piece,
        });
        prev = r;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeSphereReport {
    pub center: Point,
    pub r: f64,
    pub alpha: AlphaReport,
    /// `‖∇u‖` over `B_{R/2}`, `B_R`, `B_{2R}`.
    pub norms: [f64; 3],
    /// `[ln‖∇u‖_R − α ln‖∇u‖_{R/2} − (1−α) ln‖∇u‖_{2R}] / √λ`.
    pub required_c: f64,
    /// Same with the exponents exchanged: `α` on `B_{2R}`, `1 − α` on `B_{R/2}`.
    pub required_c_swapped: f64,
}

pub fn three_sphere_check(
    field: &impl ChartField,
    center: Point,
    r: f64,
    params: &WeightParams,
    order: usize,
) -> Result<ThreeSphereReport> {
    check_radius(field.surface(), r)?;
    let alpha = alpha_from_weight(params, r)?;
    let n = nested_gradient_norms(field, center, &[0.5 * r, r, 2.0 * r], order)?;
    let norms = [n[0].l2, n[1].l2, n[2].l2];
    for (i, v) in norms.iter().enumerate() {
        check_nonzero(|| format!("grad u on ball {} of three", i + 1), *v)?;
    }
    let sl = field.lambda().sqrt();
    let (l0, l1, l2) = (norms[0].ln(), norms[1].ln(), norms[2].ln());
    let a = alpha.alpha;
    Ok(ThreeSphereReport {
        center,
        r,
        alpha,
        norms,
        required_c: (l1 - a * l0 - (1.0 - a) * l2) / sl,
        required_c_swapped: (l1 - a * l2 - (1.0 - a) * l0) / sl,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoublingReport {
    pub center: Point,
    pub r: f64,
    pub kind: NormKind,
    /// `ln(‖∇u‖_{B_{2r}} / ‖∇u‖_{B_r})`.
    pub index: f64,
    pub lambda: f64,
}

/// Doubling indices for both norm kinds from one pass: `[L2, SupNorm]`.
pub fn doubling_indices(
    field: &impl ChartField,
    center: Point,
    r: f64,
    order: usize,
) -> Result<[DoublingReport; 2]> {
    check_radius(field.surface(), r)?;
    let n = nested_gradient_norms(field, center, &[r, 2.0 * r], order)?;
    check_nonzero(|| "grad u on the inner ball".into(), n[0].l2)?;
    check_nonzero(|| "sup of grad u on the inner ball".into(), n[0].sup)?;
    let lambda = field.lambda();
    let mk = |kind: NormKind| DoublingReport {
        center,
        r,
        kind,
        index: (n[1].get(kind) / n[0].get(kind)).ln(),
        lambda,
    };
    Ok([mk(NormKind::L2), mk(NormKind::SupNorm)])
}

pub fn doubling_index(
    field: &impl ChartField,
    center: Point,
    r: f64,
    kind: NormKind,
    order: usize,
) -> Result<DoublingReport> {
    let both = doubling_indices(field, center, r, order)?;
    Ok(match kind {
        NormKind::L2 => both[0],
        NormKind::SupNorm => both[1],
    })
}

/// Largest doubling index over a sweep, with failed cells collected.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepMax {
    pub max: DoublingReport,
    pub evaluated: usize,
    pub failures: Vec<(Point, f64, Error)>,
}

fn lex_key(p: Point, r: f64) -> (f64, f64, f64) {
    (p.0, p.1, r)
}

/// Ordering for arg-max reports: larger value first, then lexicographic on
/// `(center, radius)`.
fn better(a: &DoublingReport, b: &DoublingReport) -> bool {
    if a.index != b.index {
        return a.index > b.index;
    }
    let (ka, kb) = (lex_key(a.center, a.r), lex_key(b.center, b.r));
    ka.0.total_cmp(&kb.0)
        .then(ka.1.total_cmp(&kb.1))
        .then(ka.2.total_cmp(&kb.2))
        .is_lt()
}

/// Maximum doubling index for both kinds over all `(center, radius)` pairs.
pub fn doubling_sweep_both(
    field: &impl ChartField,
    centers: &[Point],
    radii: &[f64],
    order: usize,
) -> Result<[SweepMax; 2]> {
    if centers.is_empty() || radii.is_empty() {
        return Err(invalid("sweep", "need at least one center and one radius"));
    }
    let mut best: [Option<DoublingReport>; 2] = [None, None];
    let mut failures = Vec::new();
    let mut evaluated = 0;
    for &c in centers {
        for &r in radii {
            match doubling_indices(field, c, r, order) {
                Ok(reps) => {
                    evaluated += 1;
                    for (slot, rep) in best.iter_mut().zip(reps) {
                        if slot.as_ref().is_none_or(|b| better(&rep, b)) {
                            *slot = Some(rep);
                        }
                    }
                }
                Err(e) => failures.push((c, r, e)),
            }
        }
    }
    match best {
        [Some(a), Some(b)] => Ok([
            SweepMax {
                max: a,
                evaluated,
                failures: failures.clone(),
            },
            SweepMax {
                max: b,
                evaluated,
                failures,
            },
        ]),
        _ => Err(failures
            .into_iter()
            .next()
            .map(|f| f.2)
            .unwrap_or_else(|| invalid("sweep", "no cell evaluated"))),
    }
}

pub fn doubling_sweep(
    field: &impl ChartField,
    centers: &[Point],
    radii: &[f64],
    kind: NormKind,
    order: usize,
) -> Result<SweepMax> {
    let [l2, sup] = doubling_sweep_both(field, centers, radii, order)?;
    Ok(match kind {
        NormKind::L2 => l2,
        NormKind::SupNorm => sup,
    })
}

/// `‖∇u‖_{L²(M)}`.
pub fn global_gradient_norm(field: &impl ChartField, order: usize) -> Result<f64> {
    let surface = field.surface();
    let n = norms_over_region(surface, &Region::Whole, order, |p| {
        let g = field.grad(p);
        g[0].hypot(g[1])
    })?;
    check_nonzero(|| "grad u on the whole surface".into(), n.l2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerBoundReport {
    pub min_ratio: f64,
    pub argmin: Point,
    /// `−ln(min_ratio) / √λ`.
    pub exponent: f64,
}

/// `min over centers of ‖∇u‖_{B_R(c)} / ‖∇u‖_{L²(M)}`.
pub fn global_lower_bound_check(
    field: &impl ChartField,
    r: f64,
    centers: &[Point],
    order: usize,
) -> Result<LowerBoundReport> {
    lower_bound(field, centers, order, |c| Region::ball(c, r))
}

/// `‖∇u‖_{A_{R/8, R/4}(c)} / ‖∇u‖_{L²(M)}`, minimized over the given centers.
pub fn annulus_lower_bound_check(
    field: &impl ChartField,
    r: f64,
    centers: &[Point],
    order: usize,
) -> Result<LowerBoundReport> {
    lower_bound(field, centers, order, |c| {
        Region::annulus(c, r / 8.0, r / 4.0)
    })
}

fn lower_bound(
    field: &impl ChartField,
    centers: &[Point],
    order: usize,
    region: impl Fn(Point) -> Region,
) -> Result<LowerBoundReport> {
    if centers.is_empty() {
        return Err(invalid("centers", "need at least one center"));
    }
    let total = global_gradient_norm(field, order)?;
    let mut best: Option<(f64, Point)> = None;
    for &c in centers {
        let n = gradient_norms(field, &region(c), order)?.l2 / total;
        let replace = match best {
            None => true,
            Some((v, p)) => n < v || (n == v && (c.0, c.1) < (p.0, p.1)),
        };
        if replace {
            best = Some((n, c));
        }
    }
    let (min_ratio, argmin) = best.expect("nonempty");
    Ok(LowerBoundReport {
        min_ratio,
        argmin,
        exponent: -min_ratio.ln() / field.lambda().sqrt(),
    })
}

/// `‖∇V‖_{B_{(1−a)R}} / [(1/((1−a)R) + √λ) ‖V‖_{B_R}]` with `V = ∇u` and `|∇V|` the
/// Frobenius norm of the covariant Hessian.
pub fn elliptic_gradient_check(
    field: &impl ChartField,
    center: Point,
    r: f64,
    a: f64,
    order: usize,
) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(invalid("a", format!("must lie in (0, 1), got {a}")));
    }
    let surface = field.surface();
    surface.check_region(&Region::ball(center, r))?;
    let inner = (1.0 - a) * r;
    let hess = norms_over_region(surface, &Region::ball(center, inner), order, |p| {
        let h = field.hess(p);
        (h[0][0] * h[0][0] + 2.0 * h[0][1] * h[0][1] + h[1][1] * h[1][1]).sqrt()
    })?;
    let v = gradient_norms(field, &Region::ball(center, r), order)?;
    let v = check_nonzero(|| "V = grad u on B_R".into(), v.l2)?;
    Ok(hess.l2 / ((1.0 / inner + field.lambda().sqrt()) * v))
}

/// `max over points of |ΔVᵢ + λVᵢ|` for the chart gradient `V` on a flat torus,
/// with `Δ` from finite differences.
pub fn eigen_system_residual(field: &impl ChartField, points: &[Point]) -> Result<f64> {
    let surface = field.surface();
    if !surface.is_flat() {
        return Err(Error::Unsupported(
            "the gradient system is only formed on flat charts, where its commutator terms vanish"
                .into(),
        ));
    }
    let lambda = field.lambda();
    let mut worst = 0.0f64;
    for &p in points {
        let g = field.grad(p);
        for (i, gi) in g.iter().enumerate() {
            let lap = fd_laplacian(surface, |q| field.grad(q)[i], p);
            worst = worst.max((lap + lambda * gi).abs());
        }
    }
    Ok(worst)
}

/// `n` low-discrepancy centers, uniform with respect to area (Halton bases 2, 3,
/// skipping `offset` points).
pub fn halton_centers(surface: &ModelSurface, n: usize, offset: u64) -> Vec<Point> {
    let ext = surface.chart_extent();
    halton_2d(n, offset)
        .into_iter()
        .map(|(h1, h2)| match surface {
            ModelSurface::FlatTorus { .. } => Point(ext[0] * h1, ext[1] * h2),
            _ => Point(ext[0] * (1.0 - 2.0 * h1).acos() / PI, ext[1] * h2),
        })
        .collect()
}

/// Known adversarial centers for closed-form pairs: points on critical curves and
/// the poles of zonal harmonics.
pub fn critical_centers(pair: &EigenPair) -> Vec<Point> {
    let surface = *pair.surface();
    match pair.provenance() {
        Provenance::TorusWave { k, phase } => {
            let ModelSurface::FlatTorus { periods } = surface else {
                return vec![];
            };
            let w = [
                2.0 * PI * k[0] as f64 / periods[0],
                2.0 * PI * k[1] as f64 / periods[1],
            ];
            let t = 0.5 * PI - phase;
            let p = if w[0] != 0.0 {
                Point(t / w[0], 0.0)
            } else {
                Point(0.0, t / w[1])
            };
            // a second point along the same critical line
            let q = Point(p.0 - w[1] * 0.37, p.1 + w[0] * 0.37);
            vec![surface.normalize(p), surface.normalize(q)]
        }
        Provenance::TorusProduct { k } => {
            let ModelSurface::FlatTorus { periods } = surface else {
                return vec![];
            };
            let w = [
                2.0 * PI * k[0] as f64 / periods[0],
                2.0 * PI * k[1] as f64 / periods[1],
            ];
            vec![Point(0.5 * PI / w[0], 0.5 * PI / w[1]), Point(0.0, 0.0)]
        }
        Provenance::Zonal { l } => {
            let mut v = vec![Point(0.0, 0.0), Point(PI, 0.0)];
            v.extend(
                legendre::critical_colatitudes(*l)
                    .into_iter()
                    .map(|t| Point(t, 0.0)),
            );
            v
        }
        Provenance::Revolution { .. } => {
            let len = surface.chart_extent()[0];
            vec![Point(0.0, 0.0), Point(len, 0.0)]
        }
    }
}
