//! L² and sup norms of scalar and gradient fields over regions.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::manifolds::{region_quadrature, ModelSurface, Point, Region};
use crate::numerics::golden_max;
use crate::spectra::ChartField;

/// Default quadrature order for the inequality experiments.
pub const DEFAULT_ORDER: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormKind {
    L2,
    SupNorm,
}

/// L² and sup norm of the same field, from one pass over the nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub sup: f64,
}

impl Norms {
    pub fn get(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L2 => self.l2,
            NormKind::SupNorm => self.sup,
        }
    }
}

/// Norm of a field given by its pointwise magnitude (`|u|` for scalars,
/// the Riemannian length for vector fields).
pub fn norm_over_region(
    surface: &ModelSurface,
    region: &Region,
    kind: NormKind,
    order: usize,
    magnitude: impl Fn(Point) -> f64,
) -> Result<f64> {
    match kind {
        NormKind::L2 => {
            let rule = region_quadrature(surface, region, order)?;
            Ok(rule.integrate(|p| magnitude(p).powi(2)).sqrt())
        }
        NormKind::SupNorm => Ok(norms_over_region(surface, region, order, magnitude)?.sup),
    }
}

/// Both norms at once. The sup is taken over the quadrature nodes, the region's
/// boundary circles and its center, then refined by golden-section search in
/// polar coordinates around the best few nodes.
pub fn norms_over_region(
    surface: &ModelSurface,
    region: &Region,
    order: usize,
    magnitude: impl Fn(Point) -> f64,
) -> Result<Norms> {
    let rule = region_quadrature(surface, region, order)?;
    let values: Vec<f64> = rule.nodes.iter().map(|p| magnitude(*p)).collect();
    let l2 = values
        .iter()
        .zip(&rule.weights)
        .map(|(v, w)| w * v * v)
        .sum::<f64>()
        .sqrt();
    let sup = match (region.center(), region.radii()) {
        (Some(center), Some((inner, outer))) => {
            let n_ang = 4 * order;
            let mut cands: Vec<(f64, f64, f64)> = rule
                .polar
                .iter()
                .zip(&values)
                .map(|(&(r, b), &v)| (v, r, b))
                .collect();
            for j in 0..n_ang {
                let b = 2.0 * PI * j as f64 / n_ang as f64;
                cands.push((magnitude(surface.exp_map(center, outer, b)), outer, b));
                if inner > 0.0 {
                    cands.push((magnitude(surface.exp_map(center, inner, b)), inner, b));
                }
            }
            if inner == 0.0 {
                cands.push((magnitude(surface.normalize(center)), 0.0, 0.0));
            }
            refine_polar(surface, center, inner, outer, order, &cands, &magnitude)
        }
        _ => {
            let ext = surface.chart_extent();
            let n2 = 4 * order;
            let cands: Vec<(f64, f64, f64)> = rule
                .nodes
                .iter()
                .zip(&values)
                .map(|(p, &v)| (v, p.0, p.1))
                .collect();
            refine_chart(surface, ext, n2, &cands, &magnitude)
        }
    };
    Ok(Norms { l2, sup })
}

const REFINE_SEEDS: usize = 4;
const REFINE_ROUNDS: usize = 3;
const GOLDEN_ITERS: usize = 40;

fn top_candidates(cands: &[(f64, f64, f64)]) -> (f64, Vec<(f64, f64, f64)>) {
    let mut sorted: Vec<(f64, f64, f64)> =
        cands.iter().copied().filter(|c| c.0.is_finite()).collect();
    sorted.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
    });
    let best = sorted.first().map(|c| c.0).unwrap_or(0.0);
    sorted.truncate(REFINE_SEEDS);
    (best, sorted)
}

fn refine_polar(
    surface: &ModelSurface,
    center: Point,
    inner: f64,
    outer: f64,
    order: usize,
    cands: &[(f64, f64, f64)],
    magnitude: &impl Fn(Point) -> f64,
) -> f64 {
    let (mut best, seeds) = top_candidates(cands);
    let dr = (outer - inner) / (2 * order) as f64 * 1.5;
    let db = 2.0 * PI / (4 * order) as f64 * 1.5;
    let eval = |r: f64, b: f64| magnitude(surface.exp_map(center, r, b));
    for (v0, mut r, mut b) in seeds {
        let mut v = v0;
        for _ in 0..REFINE_ROUNDS {
            let (r_new, v_r) = golden_max(
                (r - dr).max(inner),
                (r + dr).min(outer),
                GOLDEN_ITERS,
                |x| eval(x, b),
            );
            if v_r > v {
                r = r_new;
                v = v_r;
            }
            if r > 0.0 {
                let (b_new, v_b) = golden_max(b - db, b + db, GOLDEN_ITERS, |y| eval(r, y));
                if v_b > v {
                    b = b_new;
                    v = v_b;
                }
            }
        }
        best = best.max(v);
    }
    best
}

fn refine_chart(
    surface: &ModelSurface,
    ext: [f64; 2],
    n2: usize,
    cands: &[(f64, f64, f64)],
    magnitude: &impl Fn(Point) -> f64,
) -> f64 {
    let (mut best, seeds) = top_candidates(cands);
    let d1 = ext[0] / n2 as f64 * 1.5;
    let d2 = ext[1] / n2 as f64 * 1.5;
    let periodic = surface.x1_periodic();
    let clamp1 = |x: f64| if periodic { x } else { x.clamp(0.0, ext[0]) };
    for (v0, mut x1, mut x2) in seeds {
        let mut v = v0;
        for _ in 0..REFINE_ROUNDS {
            let (a, fa) = golden_max(clamp1(x1 - d1), clamp1(x1 + d1), GOLDEN_ITERS, |x| {
                magnitude(Point(x, x2))
            });
            if fa > v {
                x1 = a;
                v = fa;
            }
            let (b, fb) = golden_max(x2 - d2, x2 + d2, GOLDEN_ITERS, |y| {
                magnitude(surface.normalize(Point(x1, y)))
            });
            if fb > v {
                x2 = b;
                v = fb;
            }
        }
        best = best.max(v);
    }
    best
}

/// Norms of `u` over a region.
pub fn value_norms(field: &impl ChartField, region: &Region, order: usize) -> Result<Norms> {
    norms_over_region(field.surface(), region, order, |p| field.value(p).abs())
}

/// Norms of `|∇u|` over a region.
pub fn gradient_norms(field: &impl ChartField, region: &Region, order: usize) -> Result<Norms> {
    norms_over_region(field.surface(), region, order, |p| {
        let g = field.grad(p);
        g[0].hypot(g[1])
    })
}

/// Largest componentwise deviation between `grad` and metric-scaled central
/// differences of `value` (step `1e-5`) over seeded random points. On
/// pole-to-pole charts the points avoid a `0.05` neighborhood of the poles.
pub fn gradient_consistency_check(
    field: &impl ChartField,
    sample_count: usize,
    seed: u64,
) -> Result<f64> {
    if sample_count == 0 {
        return Err(invalid("sample_count", "need at least one sample"));
    }
    let surface = field.surface();
    let ext = surface.chart_extent();
    let (lo, hi) = if surface.x1_periodic() {
        (0.0, ext[0])
    } else {
        (0.05, ext[0] - 0.05)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..sample_count {
        let p = Point(rng.gen_range(lo..hi), rng.gen_range(0.0..ext[1]));
        let (a, b, _) = surface.metric(p);
        let g = field.grad(p);
        let d1 =
            (field.value(Point(p.0 + h, p.1)) - field.value(Point(p.0 - h, p.1))) / (2.0 * h * a);
        let d2 =
            (field.value(Point(p.0, p.1 + h)) - field.value(Point(p.0, p.1 - h))) / (2.0 * h * b);
        worst = worst.max((g[0] - d1).abs()).max((g[1] - d2).abs());
    }
    Ok(worst)
}

/// Largest deviation between the chart second derivatives of the jet and
/// central differences (step `1e-5`) of its chart first derivatives, over
/// seeded random points chosen as in [`gradient_consistency_check`].
pub fn hessian_consistency_check(
    field: &impl ChartField,
    sample_count: usize,
    seed: u64,
) -> Result<f64> {
    if sample_count == 0 {
        return Err(invalid("sample_count", "need at least one sample"));
    }
    let surface = field.surface();
    let ext = surface.chart_extent();
    let (lo, hi) = if surface.x1_periodic() {
        (0.0, ext[0])
    } else {
        (0.05, ext[0] - 0.05)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..sample_count {
        let p = Point(rng.gen_range(lo..hi), rng.gen_range(0.0..ext[1]));
        let j = field.jet(p);
        let (e1, w1) = (
            field.jet(Point(p.0 + h, p.1)),
            field.jet(Point(p.0 - h, p.1)),
        );
        let (e2, w2) = (
            field.jet(Point(p.0, p.1 + h)),
            field.jet(Point(p.0, p.1 - h)),
        );
        let d11 = (e1.u1 - w1.u1) / (2.0 * h);
        let d12 = (e2.u1 - w2.u1) / (2.0 * h);
        let d21 = (e1.u2 - w1.u2) / (2.0 * h);
        let d22 = (e2.u2 - w2.u2) / (2.0 * h);
        worst = worst
            .max((j.u11 - d11).abs())
            .max((j.u12 - d12).abs())
            .max((j.u12 - d21).abs())
            .max((j.u22 - d22).abs());
    }
    Ok(worst)
}
