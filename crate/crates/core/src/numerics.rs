//! Small numerical building blocks shared by the experiment modules.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton iteration
/// on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_on(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| (mid + half * xi, half * wi))
        .collect()
}

/// `ln(sum(exp(x_i)))`, robust to large magnitudes; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// `ln(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Radical inverse in the given base (van der Corput).
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// First `n` points of the 2D Halton sequence (bases 2 and 3), skipping
/// `offset` leading points.
pub fn halton_2d(n: usize, offset: u64) -> Vec<(f64, f64)> {
    (0..n as u64)
        .map(|i| {
            let j = i + offset + 1;
            (radical_inverse(j, 2), radical_inverse(j, 3))
        })
        .collect()
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_max(mut a: f64, mut b: f64, iters: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Ordinary least squares fit `y = slope * x + intercept`; returns `(slope, intercept, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r2)
}

/// Lowest line `y = slope·x + intercept` with `slope ≥ 0` lying on or above
/// every point, "lowest" meaning smallest value at the mean of `xs`. Ties go to
/// the smaller slope. Returns `(slope, intercept)`.
pub fn upper_envelope_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert!(!xs.is_empty() && xs.len() == ys.len());
    let n = xs.len();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let ymax = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = ys.iter().fold(1.0f64, |a, y| a.max(y.abs()));
    let feasible = |a: f64, b: f64| {
        xs.iter()
            .zip(ys)
            .all(|(x, y)| a * x + b >= y - 1e-12 * scale)
    };
    let mut best = (0.0, ymax);
    let mut best_val = ymax;
    for i in 0..n {
        for j in 0..n {
            if xs[j] <= xs[i] {
                continue;
            }
            let a = (ys[j] - ys[i]) / (xs[j] - xs[i]);
            if a < 0.0 {
                continue;
            }
            let b = ys[i] - a * xs[i];
            let val = a * mx + b;
            if feasible(a, b)
                && (val < best_val - 1e-15 * scale
                    || (val <= best_val + 1e-15 * scale && a < best.0))
            {
                best = (a, b);
                best_val = val;
            }
        }
    }
    best
}

/// Wrap `x` into `[0, period)`.
pub fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Signed representative of `x` in `[-period/2, period/2)`.
pub fn wrap_signed(x: f64, period: f64) -> f64 {
    let r = wrap(x + 0.5 * period, period);
    r - 0.5 * period
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_envelope_dominates_points() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [1.0, 3.0, 2.5, 4.0, 4.2];
        let (a, b) = upper_envelope_line(&xs, &ys);
        assert!(a >= 0.0);
        for (x, y) in xs.iter().zip(&ys) {
            assert!(a * x + b >= y - 1e-12);
        }
        // decreasing data gives a flat line at the maximum
        let (a, b) = upper_envelope_line(&xs, &[5.0, 4.0, 3.0, 2.0, 1.0]);
        assert_eq!((a, b), (0.0, 5.0));
    }

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        let rule = gauss_on(0.0, 2.0, 5);
        for deg in 0..10 {
            let q: f64 = rule.iter().map(|(x, w)| w * x.powi(deg)).sum();
            let exact = 2f64.powi(deg + 1) / (deg as f64 + 1.0);
            assert!((q - exact).abs() < 1e-12 * exact.max(1.0), "deg {deg}");
        }
    }

    #[test]
    fn gauss_large_order_weights_sum() {
        for n in [1, 2, 17, 64, 128, 256] {
            let (_, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
        }
    }

    #[test]
    fn log_sum_exp_handles_overflow() {
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert!((log_add_exp(800.0, 800.0) - (800.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn halton_is_in_unit_square() {
        for (a, b) in halton_2d(100, 0) {
            assert!((0.0..1.0).contains(&a) && (0.0..1.0).contains(&b));
        }
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, y) = golden_max(0.0, 3.0, 80, |x| -(x - 1.3) * (x - 1.3) + 2.0);
        assert!((x - 1.3).abs() < 1e-7);
        assert!((y - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wrap_signed_is_centered() {
        assert!((wrap_signed(3.0 * PI / 2.0, 2.0 * PI) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_signed(0.25, 1.0) - 0.25).abs() < 1e-15);
    }
}
