//! Laplace–Beltrami eigenpairs: closed forms on the torus and sphere, and
//! separated Sturm–Liouville modes on surfaces of revolution.

pub mod legendre;
mod sturm;

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::manifolds::{region_quadrature, ModelSurface, Point, Profile, Region};

pub use sturm::{RadialMode, SturmLiouvilleSpec};

/// Value and chart partial derivatives up to second order at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub u: f64,
    pub u1: f64,
    pub u2: f64,
    pub u11: f64,
    pub u12: f64,
    pub u22: f64,
}

impl Jet {
    fn scale(self, c: f64) -> Jet {
        Jet {
            u: c * self.u,
            u1: c * self.u1,
            u2: c * self.u2,
            u11: c * self.u11,
            u12: c * self.u12,
            u22: c * self.u22,
        }
    }
}

/// A smooth function on a model surface, known through its chart jet.
///
/// Gradients and Hessians are returned in the orthonormal frame
/// `(e1, e2) = (∂1 / a, ∂2 / b)` of the diagonal metric, so their Euclidean
/// norms are the Riemannian ones.
pub trait ChartField: Sync {
    fn surface(&self) -> &ModelSurface;

    /// Eigenvalue (or the spectral scale used to normalize experiments).
    fn lambda(&self) -> f64;

    fn jet(&self, p: Point) -> Jet;

    fn value(&self, p: Point) -> f64 {
        self.jet(p).u
    }

    fn grad(&self, p: Point) -> [f64; 2] {
        let (a, b, _) = self.surface().metric(p);
        let j = self.jet(p);
        [j.u1 / a, j.u2 / b]
    }

    /// Covariant Hessian in the orthonormal frame.
    fn hess(&self, p: Point) -> [[f64; 2]; 2] {
        covariant_hessian(self.surface(), p, &self.jet(p))
    }

    /// Laplace–Beltrami operator applied to the field.
    fn laplacian(&self, p: Point) -> f64 {
        let h = self.hess(p);
        h[0][0] + h[1][1]
    }
}

/// Covariant Hessian of a jet in the orthonormal frame of the diagonal metric.
pub fn covariant_hessian(surface: &ModelSurface, p: Point, j: &Jet) -> [[f64; 2]; 2] {
    let (a, b, db) = surface.metric(p);
    let h11 = j.u11 / (a * a);
    let h12 = (j.u12 - (db / b) * j.u2) / (a * b);
    let h22 = (j.u22 + (b * db / (a * a)) * j.u1) / (b * b);
    [[h11, h12], [h12, h22]]
}

/// Origin of an eigenpair.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    /// `sin(ω·x + phase)` with `ωᵢ = 2π kᵢ / Lᵢ`.
    TorusWave { k: [i64; 2], phase: f64 },
    /// `sin(ω₁x₁) sin(ω₂x₂)`.
    TorusProduct { k: [i64; 2] },
    /// `P_l(cos θ)`.
    Zonal { l: usize },
    /// `cos(mφ) g_j(s)`.
    Revolution { m: u32, j: usize },
}

/// An eigenvalue with closed-form (or series) evaluators for the eigenfunction.
#[derive(Clone, Debug)]
pub struct EigenPair {
    surface: ModelSurface,
    lambda: f64,
    provenance: Provenance,
    amplitude: f64,
    radial: Option<Arc<RadialMode>>,
}

impl EigenPair {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// The same eigenfunction multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        EigenPair {
            amplitude: self.amplitude * c,
            ..self.clone()
        }
    }

    /// The same eigenfunction paired with a different eigenvalue (used to build
    /// deliberately miscalibrated pairs).
    pub fn with_lambda(&self, lambda: f64) -> Self {
        EigenPair {
            lambda,
            ..self.clone()
        }
    }

    pub fn radial_mode(&self) -> Option<&RadialMode> {
        self.radial.as_deref()
    }

    pub(crate) fn frequencies(&self) -> [f64; 2] {
        match (&self.provenance, self.surface) {
            (
                Provenance::TorusWave { k, .. } | Provenance::TorusProduct { k },
                ModelSurface::FlatTorus { periods },
            ) => [
                2.0 * PI * k[0] as f64 / periods[0],
                2.0 * PI * k[1] as f64 / periods[1],
            ],
            _ => [0.0, 0.0],
        }
    }
}

impl ChartField for EigenPair {
    fn surface(&self) -> &ModelSurface {
        &self.surface
    }

    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn jet(&self, p: Point) -> Jet {
        let jet = match &self.provenance {
            Provenance::TorusWave { phase, .. } => {
                let w = self.frequencies();
                let (s, c) = (w[0] * p.0 + w[1] * p.1 + phase).sin_cos();
                Jet {
                    u: s,
                    u1: w[0] * c,
                    u2: w[1] * c,
                    u11: -w[0] * w[0] * s,
                    u12: -w[0] * w[1] * s,
                    u22: -w[1] * w[1] * s,
                }
            }
            Provenance::TorusProduct { .. } => {
                let w = self.frequencies();
                let (s1, c1) = (w[0] * p.0).sin_cos();
                let (s2, c2) = (w[1] * p.1).sin_cos();
                Jet {
                    u: s1 * s2,
                    u1: w[0] * c1 * s2,
                    u2: w[1] * s1 * c2,
                    u11: -w[0] * w[0] * s1 * s2,
                    u12: w[0] * w[1] * c1 * c2,
                    u22: -w[1] * w[1] * s1 * s2,
                }
            }
            Provenance::Zonal { l } => {
                let (st, ct) = p.0.sin_cos();
                let (pl, dpl) = legendre::legendre(*l, ct);
                let ll = (*l * (*l + 1)) as f64;
                Jet {
                    u: pl,
                    u1: -st * dpl,
                    u2: 0.0,
                    u11: ct * dpl - ll * pl,
                    u12: 0.0,
                    u22: 0.0,
                }
            }
            Provenance::Revolution { m, .. } => {
                let radial = self
                    .radial
                    .as_ref()
                    .expect("revolution pair carries its radial mode");
                let (g, g1, g2) = radial.eval(p.0);
                let mf = *m as f64;
                let (s, c) = (mf * p.1).sin_cos();
                Jet {
                    u: c * g,
                    u1: c * g1,
                    u2: -mf * s * g,
                    u11: c * g2,
                    u12: -mf * s * g1,
                    u22: -mf * mf * c * g,
                }
            }
        };
        jet.scale(self.amplitude)
    }
}

/// `u = sin(2πk₁x₁/L₁ + 2πk₂x₂/L₂ + phase)` on a flat torus; on the `2π × 2π`
/// torus this is `sin(k₁θ₁ + k₂θ₂ + phase)` with `λ = k₁² + k₂²`.
pub fn torus_eigenpair(surface: &ModelSurface, k: [i64; 2], phase: f64) -> Result<EigenPair> {
    let ModelSurface::FlatTorus { .. } = surface else {
        return Err(Error::Unsupported(
            "torus eigenpairs need a flat torus".into(),
        ));
    };
    if k == [0, 0] {
        return Err(Error::ZeroFrequency);
    }
    let mut pair = EigenPair {
        surface: *surface,
        lambda: 0.0,
        provenance: Provenance::TorusWave { k, phase },
        amplitude: 1.0,
        radial: None,
    };
    let w = pair.frequencies();
    pair.lambda = w[0] * w[0] + w[1] * w[1];
    Ok(pair)
}

/// `u = sin(ω₁x₁) sin(ω₂x₂)` on a flat torus, whose critical points are all
/// nondegenerate. Both frequencies must be nonzero.
pub fn torus_product_eigenpair(surface: &ModelSurface, k: [i64; 2]) -> Result<EigenPair> {
    let ModelSurface::FlatTorus { .. } = surface else {
        return Err(Error::Unsupported(
            "torus eigenpairs need a flat torus".into(),
        ));
    };
    if k[0] == 0 || k[1] == 0 {
        return Err(Error::ZeroFrequency);
    }
    let mut pair = EigenPair {
        surface: *surface,
        lambda: 0.0,
        provenance: Provenance::TorusProduct { k },
        amplitude: 1.0,
        radial: None,
    };
    let w = pair.frequencies();
    pair.lambda = w[0] * w[0] + w[1] * w[1];
    Ok(pair)
}

/// Zonal spherical harmonic `P_l(cos θ)` with `λ = l(l+1)/R²`.
pub fn sphere_zonal_eigenpair(surface: &ModelSurface, l: usize) -> Result<EigenPair> {
    let ModelSurface::Sphere { radius } = *surface else {
        return Err(Error::Unsupported("zonal eigenpairs need a sphere".into()));
    };
    if l == 0 {
        return Err(Error::ConstantMode("l = 0 is the constant function".into()));
    }
    Ok(EigenPair {
        surface: *surface,
        lambda: (l * (l + 1)) as f64 / (radius * radius),
        provenance: Provenance::Zonal { l },
        amplitude: 1.0,
        radial: None,
    })
}

/// Separated eigenfunction `cos(mφ) g(s)` of a surface of revolution, with
/// `(λ, g)` the `j`-th solution of the radial problem.
pub fn revolution_eigenpair(spec: &SturmLiouvilleSpec, j: usize) -> Result<EigenPair> {
    let (lambda, mode) = spec.solve(j)?;
    Ok(EigenPair {
        surface: ModelSurface::revolution(spec.profile),
        lambda,
        provenance: Provenance::Revolution { m: spec.m, j },
        amplitude: 1.0,
        radial: Some(Arc::new(mode)),
    })
}

/// Convenience for the profile-level constructor.
pub fn revolution_eigenpair_on(
    profile: Profile,
    m: u32,
    j: usize,
    grid_size: usize,
) -> Result<EigenPair> {
    revolution_eigenpair(&SturmLiouvilleSpec::new(profile, m, grid_size)?, j)
}

const FD_STEP: f64 = 1e-3;

/// Fourth-order central differences `(f', f'')` with step `h`.
fn fd4(f: impl Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
    let (fm2, fm1, f0, fp1, fp2) = (f(x - 2.0 * h), f(x - h), f(x), f(x + h), f(x + 2.0 * h));
    let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
    (d1, d2)
}

/// Laplace–Beltrami of `value` at `p` from fourth-order finite differences in the
/// chart, with the metric terms of the diagonal metric.
pub fn fd_laplacian(surface: &ModelSurface, value: impl Fn(Point) -> f64, p: Point) -> f64 {
    let (a, b, db) = surface.metric(p);
    let h1 = if surface.is_flat() {
        FD_STEP
    } else {
        let len = surface.chart_extent()[0];
        FD_STEP.min(p.0 / 4.0).min((len - p.0) / 4.0)
    };
    let (u1, u11) = fd4(|x| value(Point(x, p.1)), p.0, h1);
    let (_, u22) = fd4(|y| value(Point(p.0, y)), p.1, FD_STEP);
    u11 / (a * a) + db / (a * a * b) * u1 + u22 / (b * b)
}

/// `‖Δu + λu‖ / ‖u‖` over the whole surface, with `Δu` from finite differences.
pub fn eigen_residual(pair: &EigenPair, order: usize) -> Result<f64> {
    let surface = pair.surface();
    let rule = region_quadrature(surface, &Region::Whole, order)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, w) in rule.nodes.iter().zip(&rule.weights) {
        let u = pair.value(*p);
        let r = fd_laplacian(surface, |q| pair.value(q), *p) + pair.lambda() * u;
        num += w * r * r;
        den += w * u * u;
    }
    if den <= 0.0 {
        return Err(invalid(
            "pair",
            "eigenfunction vanishes on the quadrature nodes",
        ));
    }
    Ok((num / den).sqrt())
}
