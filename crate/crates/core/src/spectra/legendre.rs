//! Legendre polynomials by upward recurrence, with first derivatives from the
//! derivative recurrence `P'_{n+1} = P'_{n-1} + (2n+1) P_n`.

/// `(P_l(x), P_l'(x))`.
pub fn legendre(l: usize, x: f64) -> (f64, f64) {
    if l == 0 {
        return (1.0, 0.0);
    }
    // (P_{n-1}, P_n) and (P'_{n-1}, P'_n)
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    for n in 1..l {
        let nf = n as f64;
        let p2 = ((2.0 * nf + 1.0) * x * p1 - nf * p0) / (nf + 1.0);
        let d2 = d0 + (2.0 * nf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Colatitudes in `(0, π)` where `d/dθ P_l(cos θ)` vanishes, ascending. There are
/// exactly `l − 1` of them: the zeros of `P_l'` inside `(−1, 1)`.
pub fn critical_colatitudes(l: usize) -> Vec<f64> {
    if l < 2 {
        return Vec::new();
    }
    // P_l' zeros interlace with the zeros of P_l; bracket on a fine θ grid
    let n = 64 * l + 64;
    let f = |t: f64| legendre(l, t.cos()).1;
    let mut roots = Vec::with_capacity(l - 1);
    let h = std::f64::consts::PI / n as f64;
    let mut a = h;
    let mut fa = f(a);
    for i in 2..n {
        let b = i as f64 * h;
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_closed_forms() {
        for x in [-0.9, -0.3, 0.0, 0.4, 1.0] {
            let (p, d) = legendre(2, x);
            assert!((p - (3.0 * x * x - 1.0) / 2.0).abs() < 1e-15);
            assert!((d - 3.0 * x).abs() < 1e-15);
            let (p, d) = legendre(3, x);
            assert!((p - (5.0 * x * x * x - 3.0 * x) / 2.0).abs() < 1e-15);
            assert!((d - (15.0 * x * x - 3.0) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn endpoint_values() {
        for l in 0..30 {
            let (p, d) = legendre(l, 1.0);
            assert!((p - 1.0).abs() < 1e-13);
            let lf = l as f64;
            assert!((d - lf * (lf + 1.0) / 2.0).abs() < 1e-10 * (1.0 + lf * lf));
        }
    }

    #[test]
    fn critical_latitude_counts() {
        assert_eq!(critical_colatitudes(1).len(), 0);
        let c2 = critical_colatitudes(2);
        assert_eq!(c2.len(), 1);
        assert!((c2[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        for l in 2..40 {
            assert_eq!(critical_colatitudes(l).len(), l - 1, "l = {l}");
        }
    }
}
