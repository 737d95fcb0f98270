//! Carleman weight, closed-form test functions, and evaluation of both sides of
//! the weighted estimates
//!
//! `C ‖r² e^{τφ}(Δu + Wu)‖ ≥ τ^{3/2} ‖r^{ε/2} e^{τφ} u‖ + τ^{1/2} ‖r^{1+ε/2} e^{τφ} ∇u‖ (+ τδ ‖r^{-1} e^{τφ} u‖)`.
//!
//! All weighted norms are accumulated as logarithms.

mod testfn;
mod weight;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::manifolds::{polar_rule, ModelSurface, Point, Region};
use crate::numerics::{gauss_on, log_sum_exp};

pub use testfn::{LogEval, TestFunction};
pub use weight::{check_weight_admissibility, Admissibility, WeightParams, WeightValues};

/// Potential `W` of the operator `Δ + W`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Potential {
    Constant(f64),
    /// `λ (1 + amplitude · sin x1)`, with `x1` the first chart coordinate.
    Modulated {
        lambda: f64,
        amplitude: f64,
    },
}

impl Potential {
    #[inline]
    pub fn at(&self, p: Point) -> f64 {
        match *self {
            Potential::Constant(l) => l,
            Potential::Modulated { lambda, amplitude } => lambda * (1.0 + amplitude * p.0.sin()),
        }
    }

    /// `‖W‖_{C¹} = sup |W| + sup |∇W|` in closed form.
    pub fn c1_norm(&self, surface: &ModelSurface) -> f64 {
        match *self {
            Potential::Constant(l) => l.abs(),
            Potential::Modulated { lambda, amplitude } => {
                let a = match *surface {
                    ModelSurface::Sphere { radius } => radius,
                    _ => 1.0,
                };
                lambda.abs() * (1.0 + amplitude.abs()) + lambda.abs() * amplitude.abs() / a
            }
        }
    }

    /// `τ_min = 2 √‖W‖_{C¹} + 10`.
    pub fn tau_min(&self, surface: &ModelSurface) -> f64 {
        2.0 * self.c1_norm(surface).sqrt() + 10.0
    }
}

/// Both sides of the estimate for one `(u, W, τ)`, stored as natural logs so
/// that large `τ` cannot overflow. `log_delta_term` is present for
/// annulus-supported functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CarlemanSides {
    pub tau: f64,
    /// `ln ‖r² e^{τφ}(Δu + Wu)‖`.
    pub log_lhs: f64,
    /// `ln(τ^{3/2} ‖r^{ε/2} e^{τφ} u‖)`.
    pub log_u_term: f64,
    /// `ln(τ^{1/2} ‖r^{1+ε/2} e^{τφ} ∇u‖)`.
    pub log_grad_term: f64,
    /// `ln(τ δ ‖r^{-1} e^{τφ} u‖)`.
    pub log_delta_term: Option<f64>,
}

impl CarlemanSides {
    pub fn lhs(&self) -> f64 {
        self.log_lhs.exp()
    }

    /// `ln` of the sum of the right-hand terms.
    pub fn log_rhs_total(&self) -> f64 {
        let mut terms = vec![self.log_u_term, self.log_grad_term];
        if let Some(d) = self.log_delta_term {
            terms.push(d);
        }
        log_sum_exp(&terms)
    }

    pub fn rhs_total(&self) -> f64 {
        self.log_rhs_total().exp()
    }

    /// `rhs_total / lhs`: the smallest constant `C` for which this instance holds.
    pub fn ratio(&self) -> f64 {
        (self.log_rhs_total() - self.log_lhs).exp()
    }

    /// The same ratio without the `τδ` term (the ball form of the estimate).
    pub fn ratio_without_delta(&self) -> f64 {
        (log_sum_exp(&[self.log_u_term, self.log_grad_term]) - self.log_lhs).exp()
    }
}

/// Radial rule for weighted norms: composite 8-point Gauss on panels graded
/// geometrically toward both support edges (`panels` toward the inner edge,
/// `panels / 4` toward the outer one), so the sharp peak of `e^{2τφ}·bump²`
/// near the inner edge is resolved for every `τ`.
pub fn carleman_radial_rule(inner: f64, outer: f64, panels: usize) -> Vec<(f64, f64)> {
    let w = outer - inner;
    let panels = panels.max(4);
    let x0: f64 = 1e-7;
    let mut breaks = vec![0.0, 1.0];
    for k in 0..panels {
        breaks.push(x0 * (0.5 / x0).powf(k as f64 / (panels - 1) as f64));
    }
    let outer_panels = (panels / 4).max(2);
    for k in 0..outer_panels {
        breaks.push(1.0 - x0 * (0.5 / x0).powf(k as f64 / (outer_panels - 1) as f64));
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut rule = Vec::with_capacity(8 * breaks.len());
    for pair in breaks.windows(2) {
        for (x, wx) in gauss_on(pair[0], pair[1], 8) {
            rule.push((inner + w * x, w * wx));
        }
    }
    rule
}

/// Node data of a test function on its weighted-norm quadrature rule, reusable
/// across `τ` and `W`.
#[derive(Clone, Debug)]
pub struct SampledTestFunction {
    epsilon: f64,
    delta: Option<f64>,
    log_amp: f64,
    nodes: Vec<NodeData>,
}

/// Per-node data; `base` is `ln w + 2·log_scale`, the `ln_*` fields are `-inf`
/// where the factor vanishes.
#[derive(Clone, Copy, Debug)]
struct NodeData {
    base: f64,
    log_r: f64,
    phi: f64,
    ln_u: f64,
    ln_grad: f64,
    u: f64,
    lap: f64,
    sin_x1: f64,
}

fn ln_abs(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        x.abs().ln()
    }
}

impl SampledTestFunction {
    pub fn new(u: &TestFunction, params: &WeightParams, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(invalid("order", "quadrature order must be at least 1"));
        }
        let (inner, outer) = u.support();
        if outer > params.max_radius() * (1.0 + 1e-12) {
            return Err(invalid(
                "support",
                format!(
                    "outer radius {outer} exceeds e^T0 = {}",
                    params.max_radius()
                ),
            ));
        }
        let radial = carleman_radial_rule(inner, outer, order);
        let n_ang = (4 * order).max(4 * u.angular_mode() as usize + 8);
        let rule = polar_rule(u.surface(), u.center(), &radial, n_ang);
        let mut nodes = Vec::with_capacity(rule.len());
        for ((p, w), (r, beta)) in rule.nodes.iter().zip(&rule.weights).zip(&rule.polar) {
            if let Some(e) = u.eval_polar_unit(*r, *beta) {
                nodes.push(NodeData {
                    base: w.ln() + 2.0 * e.log_scale,
                    log_r: r.ln(),
                    phi: params.phi(*r),
                    ln_u: ln_abs(e.u),
                    ln_grad: ln_abs(e.grad[0].hypot(e.grad[1])),
                    u: e.u,
                    lap: e.lap,
                    sin_x1: p.0.sin(),
                });
            }
        }
        Ok(SampledTestFunction {
            epsilon: params.epsilon(),
            delta: u.delta(),
            log_amp: u.amplitude().abs().ln(),
            nodes,
        })
    }

    /// `ln ‖r^{power} e^{τφ} g‖` where `ln_g` gives `ln |g|` at a node.
    fn log_norm(&self, tau: f64, power: f64, ln_g: impl Fn(&NodeData) -> f64) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .map(|n| n.base + 2.0 * (power * n.log_r + tau * n.phi + ln_g(n)))
            .collect();
        0.5 * log_sum_exp(&terms) + self.log_amp
    }

    pub fn sides(&self, potential: &Potential, tau: f64) -> Result<CarlemanSides> {
        if !(tau > 0.0) {
            return Err(invalid("tau", format!("must be positive, got {tau}")));
        }
        let eps = self.epsilon;
        let (lambda, amp) = match *potential {
            Potential::Constant(l) => (l, 0.0),
            Potential::Modulated { lambda, amplitude } => (lambda, amplitude),
        };
        let log_lhs = self.log_norm(tau, 2.0, |n| {
            ln_abs(n.lap + lambda * (1.0 + amp * n.sin_x1) * n.u)
        });
        let log_u = self.log_norm(tau, eps / 2.0, |n| n.ln_u);
        let log_g = self.log_norm(tau, 1.0 + eps / 2.0, |n| n.ln_grad);
        if !log_u.is_finite() && !log_lhs.is_finite() {
            return Err(Error::DegenerateTestFunction);
        }
        let log_delta_term = self
            .delta
            .map(|d| tau.ln() + d.ln() + self.log_norm(tau, -1.0, |n| n.ln_u));
        Ok(CarlemanSides {
            tau,
            log_lhs,
            log_u_term: 1.5 * tau.ln() + log_u,
            log_grad_term: 0.5 * tau.ln() + log_g,
            log_delta_term,
        })
    }
}

/// Both sides of the estimate for a test function.
pub fn carleman_sides(
    u: &TestFunction,
    potential: &Potential,
    tau: f64,
    params: &WeightParams,
    order: usize,
) -> Result<CarlemanSides> {
    SampledTestFunction::new(u, params, order)?.sides(potential, tau)
}

/// Vector version with constant potential `λ`: squared norms of the components
/// are summed. The components must share their center.
pub fn vector_carleman_sides(
    components: &[TestFunction],
    lambda: f64,
    tau: f64,
    params: &WeightParams,
    order: usize,
) -> Result<CarlemanSides> {
    let Some(first) = components.first() else {
        return Err(invalid("components", "need at least one component"));
    };
    if components.iter().any(|c| c.center() != first.center()) {
        return Err(invalid(
            "components",
            "all components must share the center",
        ));
    }
    let potential = Potential::Constant(lambda);
    let mut runs = Vec::new();
    for c in components {
        match carleman_sides(c, &potential, tau, params, order) {
            Ok(s) => runs.push(s),
            Err(Error::DegenerateTestFunction) => {}
            Err(e) => return Err(e),
        }
    }
    if runs.is_empty() {
        return Err(Error::DegenerateTestFunction);
    }
    let combine = |f: &dyn Fn(&CarlemanSides) -> f64| -> f64 {
        let sq: Vec<f64> = runs.iter().map(|s| 2.0 * f(s)).collect();
        0.5 * log_sum_exp(&sq)
    };
    // the δ term uses the common inner radius: the smallest δ over the components
    let all_annular = components.iter().all(|c| c.delta().is_some());
    let log_delta_term = if all_annular {
        let delta = components
            .iter()
            .filter_map(|c| c.delta())
            .fold(f64::INFINITY, f64::min);
        let parts: Vec<f64> = runs
            .iter()
            .zip(components)
            .map(|(s, c)| 2.0 * (s.log_delta_term.unwrap() - c.delta().unwrap().ln() + delta.ln()))
            .collect();
        Some(0.5 * log_sum_exp(&parts))
    } else {
        None
    };
    Ok(CarlemanSides {
        tau,
        log_lhs: combine(&|s| s.log_lhs),
        log_u_term: combine(&|s| s.log_u_term),
        log_grad_term: combine(&|s| s.log_grad_term),
        log_delta_term,
    })
}

/// One `(sample, potential, τ)` cell of a calibration sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepCell {
    pub sample: usize,
    pub potential: usize,
    pub tau: f64,
    /// Ratio including the `τδ` term when the support is an annulus.
    pub ratio: f64,
    /// Ratio of the ball form (no `τδ` term).
    pub ratio_ball: f64,
    /// `τ` is below the admissible threshold `τ_min(W)`.
    pub below_threshold: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    /// Largest `rhs_total / lhs` over all admissible cells.
    pub c_star: f64,
    /// Largest ratio of the ball form over all admissible cells.
    pub c_star_ball: f64,
    pub argmax: SweepCell,
    /// Cells where the ratio is not a finite number.
    pub failures: Vec<SweepCell>,
    pub cells: Vec<SweepCell>,
}

/// Empirical Carleman constant over a sweep. `taus[k]` lists the `τ` values used
/// for `potentials[k]`. Cells with `τ < τ_min` are evaluated and flagged but do
/// not enter `C*`.
pub fn calibrate_carleman_constant(
    samples: &[SampledTestFunction],
    potentials: &[Potential],
    taus: &[Vec<f64>],
    surface: &ModelSurface,
) -> Result<Calibration> {
    if samples.is_empty() || potentials.is_empty() {
        return Err(invalid("samples", "empty sweep"));
    }
    if taus.len() != potentials.len() {
        return Err(invalid("taus", "one τ list per potential"));
    }
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    let mut degenerate = 0;
    for (si, s) in samples.iter().enumerate() {
        let mut any = false;
        for (pi, (pot, tlist)) in potentials.iter().zip(taus).enumerate() {
            let tmin = pot.tau_min(surface);
            for &tau in tlist {
                let cell = match s.sides(pot, tau) {
                    Ok(sides) => {
                        any = true;
                        SweepCell {
                            sample: si,
                            potential: pi,
                            tau,
                            ratio: sides.ratio(),
                            ratio_ball: sides.ratio_without_delta(),
                            below_threshold: tau < tmin,
                        }
                    }
                    Err(Error::DegenerateTestFunction) => SweepCell {
                        sample: si,
                        potential: pi,
                        tau,
                        ratio: f64::NAN,
                        ratio_ball: f64::NAN,
                        below_threshold: tau < tmin,
                    },
                    Err(e) => return Err(e),
                };
                if !cell.ratio.is_finite() {
                    failures.push(cell);
                }
                cells.push(cell);
            }
        }
        if !any {
            degenerate += 1;
        }
    }
    if degenerate == samples.len() {
        return Err(Error::DegenerateTestFunction);
    }
    let argmax = cells
        .iter()
        .filter(|c| c.ratio.is_finite() && !c.below_threshold)
        .copied()
        .reduce(|a, b| if b.ratio > a.ratio { b } else { a })
        .ok_or_else(|| invalid("taus", "no admissible cell in the sweep"))?;
    let c_star_ball = cells
        .iter()
        .filter(|c| c.ratio_ball.is_finite() && !c.below_threshold)
        .map(|c| c.ratio_ball)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Calibration {
        c_star: argmax.ratio,
        c_star_ball,
        argmax,
        failures,
        cells,
    })
}

/// `n` geometrically spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Upper-envelope slope of `ln(τ^{3/2}‖r^{ε/2}e^{τφ}u‖) − ln‖r²e^{τφ}(Δu+Wu)‖`
/// against `ln τ`: the largest secant slope between consecutive `τ` values.
pub fn tau_exponent_probe(
    sample: &SampledTestFunction,
    potential: &Potential,
    taus: &[f64],
) -> Result<f64> {
    if taus.len() < 2 {
        return Err(invalid("taus", "need at least two τ values"));
    }
    let mut pts = Vec::with_capacity(taus.len());
    for &t in taus {
        let s = sample.sides(potential, t)?;
        pts.push((t.ln(), s.log_u_term - s.log_lhs));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pts
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Ranges for randomly drawn annulus-supported test functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleRanges {
    pub delta: (f64, f64),
    pub max_outer: f64,
    pub min_width: f64,
    pub max_mode: u32,
    pub max_degree: usize,
}

impl Default for SampleRanges {
    fn default() -> Self {
        SampleRanges {
            delta: (0.02, 0.06),
            max_outer: 0.13,
            min_width: 0.03,
            max_mode: 3,
            max_degree: 3,
        }
    }
}

/// Deterministic family of annulus-supported test functions about `center`.
pub fn random_annulus_samples(
    surface: &ModelSurface,
    center: Point,
    count: usize,
    seed: u64,
    ranges: &SampleRanges,
) -> Result<Vec<TestFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let delta = rng.gen_range(ranges.delta.0..=ranges.delta.1);
            let outer =
                rng.gen_range((delta + ranges.min_width).min(ranges.max_outer)..=ranges.max_outer);
            let m = rng.gen_range(0..=ranges.max_mode);
            let d = rng.gen_range(0..=ranges.max_degree);
            let s: u64 = rng.gen();
            TestFunction::new(surface, s, &Region::annulus(center, delta, outer), m, d)
        })
        .collect()
}
