use crate::error::{invalid, Result};

/// Carleman weight data: `f(t) = t − e^{εt}` on `t ≤ T0 < 0`, `φ(r) = −f(ln r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightParams {
    epsilon: f64,
    t0: f64,
}

/// `(f, f', f'', φ)` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightValues {
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub phi: f64,
}

impl WeightParams {
    pub fn new(epsilon: f64, t0: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(invalid(
                "epsilon",
                format!("must lie in (0, 1), got {epsilon}"),
            ));
        }
        if !(t0 < 0.0 && t0.is_finite()) {
            return Err(invalid("t0", format!("must be negative, got {t0}")));
        }
        Ok(WeightParams { epsilon, t0 })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Largest support radius compatible with the weight, `e^{T0}`.
    pub fn max_radius(&self) -> f64 {
        self.t0.exp()
    }

    /// Exact values at `t`. Defined for every real `t`; the admissibility
    /// conditions only concern `t ≤ T0`.
    pub fn at_t(&self, t: f64) -> WeightValues {
        let e = (self.epsilon * t).exp();
        let f = t - e;
        WeightValues {
            f,
            f1: 1.0 - self.epsilon * e,
            f2: -self.epsilon * self.epsilon * e,
            phi: -f,
        }
    }

    /// Values at `t = ln r`.
    pub fn at_r(&self, r: f64) -> Result<WeightValues> {
        if !(r > 0.0) {
            return Err(invalid("r", format!("must be positive, got {r}")));
        }
        Ok(self.at_t(r.ln()))
    }

    /// `φ(r) = −ln r + r^ε`, for `r > 0`.
    #[inline]
    pub fn phi(&self, r: f64) -> f64 {
        -r.ln() + r.powf(self.epsilon)
    }
}

/// Outcome of checking the weight conditions on a grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Admissibility {
    /// `1 − εe^{εT0} ≤ f'(t) ≤ 1` at every grid point.
    pub fprime_bounds: bool,
    /// `−e^{−t}f''(t)` increases strictly toward the left end and grows without
    /// bound: either it already exceeds `10³` there, or its logarithmic slope is
    /// negative and bounded away from zero across the grid (exponential growth).
    pub divergence: bool,
    pub fprime_min: f64,
    pub divergence_left: f64,
}

pub fn check_weight_admissibility(params: &WeightParams, t_grid: &[f64]) -> Result<Admissibility> {
    if t_grid.len() < 100 {
        return Err(invalid(
            "t_grid",
            format!("need at least 100 points, got {}", t_grid.len()),
        ));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t <= params.t0)) {
        return Err(invalid(
            "t_grid",
            format!("point {t} lies outside (-inf, T0 = {}]", params.t0),
        ));
    }
    let lower = 1.0 - params.epsilon * (params.epsilon * params.t0).exp();
    let mut ts: Vec<f64> = t_grid.to_vec();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut fprime_ok = true;
    let mut fprime_min = f64::INFINITY;
    let g: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let w = params.at_t(t);
            fprime_min = fprime_min.min(w.f1);
            if !(w.f1 >= lower - 1e-15 && w.f1 <= 1.0) {
                fprime_ok = false;
            }
            -(-t).exp() * w.f2
        })
        .collect();
    let monotone = g.windows(2).all(|w| w[0] > w[1]);
    let left = g[0];
    let right = *g.last().unwrap();
    let span = ts.last().unwrap() - ts[0];
    let log_slope = if span > 0.0 {
        (right.ln() - left.ln()) / span
    } else {
        0.0
    };
    let divergence = monotone && (left > 1e3 || log_slope < -1e-3);
    Ok(Admissibility {
        fprime_bounds: fprime_ok,
        divergence,
        fprime_min,
        divergence_left: left,
    })
}
