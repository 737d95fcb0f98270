//! Radial Sturm–Liouville problem of a surface of revolution,
//! `−(ρ g')' + (m²/ρ) g = λ ρ g` on `[0, L]`, discretized by cell-centered finite
//! volumes (zero flux through the pole faces, where `ρ = 0`).

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::manifolds::Profile;

/// Radial factor of a separated eigenfunction, stored as a truncated cosine
/// (even `m`) or sine (odd `m`) series in `πs/L`, normalized to `max |g| = 1`.
#[derive(Clone, Debug)]
pub struct RadialMode {
    pub(crate) length: f64,
    pub(crate) odd: bool,
    pub(crate) coeffs: Vec<f64>,
}

impl RadialMode {
    /// `(g, g', g'')` at `s`.
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        let w = PI / self.length;
        let (mut g, mut g1, mut g2) = (0.0, 0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let kw = k as f64 * w;
            let (sn, cs) = (kw * s).sin_cos();
            if self.odd {
                g += c * sn;
                g1 += c * kw * cs;
                g2 -= c * kw * kw * sn;
            } else {
                g += c * cs;
                g1 -= c * kw * sn;
                g2 -= c * kw * kw * cs;
            }
        }
        (g, g1, g2)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Symmetric tridiagonal matrix (diagonal, off-diagonal).
struct Tridiagonal {
    d: Vec<f64>,
    e: Vec<f64>,
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.d.len() {
            let e2 = if i == 0 {
                0.0
            } else {
                self.e[i - 1] * self.e[i - 1]
            };
            q = self.d[i] - x - if i == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = -1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// `k`-th smallest eigenvalue (0-based) by bisection.
    fn eigenvalue(&self, k: usize) -> f64 {
        let n = self.d.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.e[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for a converged eigenvalue by inverse iteration.
    fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.d.len();
        let shift = lambda + 1e-10 * (1.0 + lambda.abs());
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * ((i * 7919 % 97) as f64 / 97.0))
            .collect();
        for _ in 0..4 {
            v = self.solve_shifted(shift, &v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }

    /// Solve `(T − σ I) x = b` by Gaussian elimination with partial pivoting.
    fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        // row i holds columns i, i+1, i+2 in (diag, up1, up2); low[i] is column i-1
        let mut diag: Vec<f64> = self.d.iter().map(|x| x - sigma).collect();
        let mut up1: Vec<f64> = (0..n)
            .map(|i| if i + 1 < n { self.e[i] } else { 0.0 })
            .collect();
        let mut up2 = vec![0.0; n];
        let mut low: Vec<f64> = (0..n)
            .map(|i| if i > 0 { self.e[i - 1] } else { 0.0 })
            .collect();
        let mut rhs = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if low[i + 1].abs() > diag[i].abs() {
                let row_i = (diag[i], up1[i], up2[i], rhs[i]);
                diag[i] = low[i + 1];
                up1[i] = diag[i + 1];
                up2[i] = up1[i + 1];
                rhs[i] = rhs[i + 1];
                low[i + 1] = row_i.0;
                diag[i + 1] = row_i.1;
                up1[i + 1] = row_i.2;
                rhs[i + 1] = row_i.3;
            }
            if diag[i] == 0.0 {
                diag[i] = 1e-300;
            }
            let m = low[i + 1] / diag[i];
            diag[i + 1] -= m * up1[i];
            up1[i + 1] -= m * up2[i];
            rhs[i + 1] -= m * rhs[i];
            low[i + 1] = 0.0;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            if i + 1 < n {
                s -= up1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= up2[i] * x[i + 2];
            }
            let piv = if diag[i] == 0.0 { 1e-300 } else { diag[i] };
            x[i] = s / piv;
        }
        x
    }
}

/// Radial problem data: profile, angular mode and number of finite-volume cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SturmLiouvilleSpec {
    pub profile: Profile,
    pub m: u32,
    pub grid_size: usize,
}

impl SturmLiouvilleSpec {
    pub fn new(profile: Profile, m: u32, grid_size: usize) -> Result<Self> {
        if grid_size < 64 {
            return Err(invalid(
                "grid_size",
                format!("need at least 64 cells, got {grid_size}"),
            ));
        }
        Ok(SturmLiouvilleSpec {
            profile,
            m,
            grid_size,
        })
    }

    fn operator(&self) -> (Tridiagonal, Vec<f64>) {
        let n = self.grid_size;
        let len = self.profile.length();
        let h = len / n as f64;
        let m2 = (self.m as f64).powi(2);
        let rho_c: Vec<f64> = (0..n)
            .map(|i| self.profile.rho((i as f64 + 0.5) * h))
            .collect();
        let rho_f: Vec<f64> = (0..=n)
            .map(|i| {
                if i == 0 || i == n {
                    0.0
                } else {
                    self.profile.rho(i as f64 * h)
                }
            })
            .collect();
        let mut d = vec![0.0; n];
        let mut e = vec![0.0; n - 1];
        for i in 0..n {
            let a = (rho_f[i] + rho_f[i + 1]) / (h * h) + m2 / rho_c[i];
            d[i] = a / rho_c[i];
            if i + 1 < n {
                e[i] = -rho_f[i + 1] / (h * h) / (rho_c[i] * rho_c[i + 1]).sqrt();
            }
        }
        (Tridiagonal { d, e }, rho_c)
    }

    /// Position of the requested mode in the ascending discrete spectrum. For
    /// `m = 0` the constant mode (λ = 0) is skipped, so `j = 1` is the first
    /// non-constant eigenfunction.
    fn index(&self, j: usize) -> Result<usize> {
        if j == 0 {
            return Err(invalid("j", "mode index starts at 1"));
        }
        if j > self.grid_size / 8 {
            return Err(Error::GridTooCoarse(format!(
                "mode j = {j} needs grid_size ≥ {}, have {}",
                8 * j,
                self.grid_size
            )));
        }
        Ok(if self.m == 0 { j } else { j - 1 })
    }

    /// Discrete eigenvalue of mode `j`.
    pub fn eigenvalue(&self, j: usize) -> Result<f64> {
        let k = self.index(j)?;
        Ok(self.operator().0.eigenvalue(k))
    }

    /// Discrete eigenvalue and radial factor of mode `j`.
    pub fn solve(&self, j: usize) -> Result<(f64, RadialMode)> {
        let k = self.index(j)?;
        let (t, rho_c) = self.operator();
        let lambda = t.eigenvalue(k);
        let y = t.eigenvector(lambda);
        let g: Vec<f64> = y.iter().zip(&rho_c).map(|(y, r)| y / r.sqrt()).collect();
        Ok((lambda, self.series(&g, j)))
    }

    /// Discrete cosine/sine transform of the cell values, truncated where the
    /// spectrum reaches the discretization noise floor.
    fn series(&self, g: &[f64], j: usize) -> RadialMode {
        let n = g.len();
        let odd = self.m % 2 == 1;
        let len = self.profile.length();
        let kmax = (n / 4).max(4 * (j + self.m as usize) + 16).min(n - 1);
        let mut coeffs = vec![0.0; kmax + 1];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, gi) in g.iter().enumerate() {
                let arg = PI * k as f64 * (i as f64 + 0.5) / n as f64;
                acc += gi * if odd { arg.sin() } else { arg.cos() };
            }
            *c = acc * 2.0 / n as f64;
        }
        if !odd {
            coeffs[0] *= 0.5;
        } else {
            coeffs[0] = 0.0;
        }
        let cmax = coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        // drop the tail once coefficients stay below the O(h²) noise floor
        let floor = cmax * 1e-9;
        let mut last = 0;
        for (k, c) in coeffs.iter().enumerate() {
            if c.abs() > floor {
                last = k;
            }
        }
        coeffs.truncate(last + 1);
        let mut mode = RadialMode {
            length: len,
            odd,
            coeffs,
        };
        // normalize to unit maximum with a deterministic sign
        let mut best = (0.0f64, 0.0f64);
        let samples = 8 * n;
        for i in 0..=samples {
            let v = mode.eval(len * i as f64 / samples as f64).0;
            if v.abs() > best.0.abs() + 1e-12 {
                best = (v, 0.0);
            }
        }
        let scale = best.0;
        mode.coeffs.iter_mut().for_each(|c| *c /= scale);
        mode
    }
}
