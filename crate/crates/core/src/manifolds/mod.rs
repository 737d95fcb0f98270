//! Model analytic surfaces: flat tori, round spheres and closed surfaces of
//! revolution, together with their metrics, geodesic distance and polar
//! quadrature over geodesic balls and annuli.
//!
//! Every surface is described in a global chart `(x1, x2)` in which the metric
//! is diagonal, `a² dx1² + b(x1)² dx2²`:
//!
//! | surface     | chart            | `a` | `b(x1)`       |
//! |-------------|------------------|-----|---------------|
//! | flat torus  | `[0,L1)×[0,L2)`  | 1   | 1             |
//! | sphere      | `(θ, φ)`         | R   | R sin θ       |
//! | revolution  | `(s, φ)`         | 1   | ρ(s)          |

mod geodesic;
mod quadrature;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{wrap, wrap_signed};

pub use quadrature::{area, polar_rule, region_quadrature, QuadratureRule};

/// A point in the global chart of a [`ModelSurface`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point(pub f64, pub f64);

impl Point {
    pub fn new(x1: f64, x2: f64) -> Self {
        Point(x1, x2)
    }
}

/// Meridian profile of a closed surface of revolution, parametrized by arclength
/// `s ∈ [0, π·radius]`:
///
/// `ρ(s) = radius · (sin x + bulge · sin³ x)`, `x = s / radius`.
///
/// `bulge = 0` is the round sphere of the given radius. The profile is odd about
/// both poles, so the surface is analytic there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Profile {
    radius: f64,
    bulge: f64,
}

impl Profile {
    pub fn sine(radius: f64) -> Result<Self> {
        Self::perturbed(radius, 0.0)
    }

    pub fn perturbed(radius: f64, bulge: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidSurface(format!(
                "profile radius must be positive, got {radius}"
            )));
        }
        if !(bulge > -1.0 / 3.0 && bulge.is_finite()) {
            return Err(Error::InvalidSurface(format!(
                "profile bulge must exceed -1/3, got {bulge}"
            )));
        }
        Ok(Profile { radius, bulge })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn bulge(&self) -> f64 {
        self.bulge
    }

    /// Meridian length `L`.
    pub fn length(&self) -> f64 {
        PI * self.radius
    }

    pub fn rho(&self, s: f64) -> f64 {
        let x = s / self.radius;
        let sx = x.sin();
        self.radius * sx * (1.0 + self.bulge * sx * sx)
    }

    pub fn rho_prime(&self, s: f64) -> f64 {
        let x = s / self.radius;
        let sx = x.sin();
        x.cos() * (1.0 + 3.0 * self.bulge * sx * sx)
    }

    pub fn rho_second(&self, s: f64) -> f64 {
        let x = s / self.radius;
        let (sx, cx) = x.sin_cos();
        (-sx * (1.0 + 3.0 * self.bulge * sx * sx) + 6.0 * self.bulge * sx * cx * cx) / self.radius
    }

    /// Gaussian curvature `-ρ''/ρ`, finite at the poles.
    pub fn curvature(&self, s: f64) -> f64 {
        let x = s / self.radius;
        let (sx, cx) = x.sin_cos();
        let b = self.bulge;
        ((1.0 + 3.0 * b * sx * sx) - 6.0 * b * cx * cx)
            / ((1.0 + b * sx * sx) * self.radius * self.radius)
    }

    pub fn rho_max(&self) -> f64 {
        self.radius * (1.0 + self.bulge)
    }
}

/// A two-dimensional analytic model manifold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelSurface {
    FlatTorus { periods: [f64; 2] },
    Sphere { radius: f64 },
    Revolution(Profile),
}

impl ModelSurface {
    pub fn flat_torus(l1: f64, l2: f64) -> Result<Self> {
        if !(l1 > 0.0 && l2 > 0.0 && l1.is_finite() && l2.is_finite()) {
            return Err(Error::InvalidSurface(format!(
                "torus periods must be positive, got ({l1}, {l2})"
            )));
        }
        Ok(ModelSurface::FlatTorus { periods: [l1, l2] })
    }

    /// The square torus with both circumferences equal to `2π`.
    pub fn standard_torus() -> Self {
        ModelSurface::FlatTorus {
            periods: [2.0 * PI, 2.0 * PI],
        }
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidSurface(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Ok(ModelSurface::Sphere { radius })
    }

    pub fn revolution(profile: Profile) -> Self {
        ModelSurface::Revolution(profile)
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, ModelSurface::FlatTorus { .. })
    }

    /// Chart extents `(x1 range length, x2 period)`; `x1` starts at 0.
    pub fn chart_extent(&self) -> [f64; 2] {
        match *self {
            ModelSurface::FlatTorus { periods } => periods,
            ModelSurface::Sphere { .. } => [PI, 2.0 * PI],
            ModelSurface::Revolution(p) => [p.length(), 2.0 * PI],
        }
    }

    /// Whether the first chart coordinate is periodic (torus) or runs pole to pole.
    pub fn x1_periodic(&self) -> bool {
        self.is_flat()
    }

    /// Metric coefficients `(a, b, db/dx1)` at `p`.
    #[inline]
    pub fn metric(&self, p: Point) -> (f64, f64, f64) {
        match *self {
            ModelSurface::FlatTorus { .. } => (1.0, 1.0, 0.0),
            ModelSurface::Sphere { radius } => {
                let (s, c) = p.0.sin_cos();
                (radius, radius * s, radius * c)
            }
            ModelSurface::Revolution(pr) => (1.0, pr.rho(p.0), pr.rho_prime(p.0)),
        }
    }

    /// Area element `√det g` in chart coordinates.
    pub fn volume_element(&self, p: Point) -> f64 {
        let (a, b, _) = self.metric(p);
        a * b
    }

    /// Reduce a point into the canonical chart domain.
    pub fn normalize(&self, p: Point) -> Point {
        match *self {
            ModelSurface::FlatTorus { periods } => {
                Point(wrap(p.0, periods[0]), wrap(p.1, periods[1]))
            }
            _ => {
                let len = self.chart_extent()[0];
                let mut x1 = wrap(p.0, 2.0 * len);
                let mut x2 = p.1;
                if x1 > len {
                    x1 = 2.0 * len - x1;
                    x2 += PI;
                }
                Point(x1, wrap(x2, 2.0 * PI))
            }
        }
    }

    /// Total area of the surface.
    pub fn total_area(&self) -> f64 {
        match *self {
            ModelSurface::FlatTorus { periods } => periods[0] * periods[1],
            ModelSurface::Sphere { radius } => 4.0 * PI * radius * radius,
            ModelSurface::Revolution(p) => {
                let rule = crate::numerics::gauss_on(0.0, p.length(), 96);
                2.0 * PI * rule.iter().map(|(s, w)| w * p.rho(*s)).sum::<f64>()
            }
        }
    }

    /// Explicit lower bound for the injectivity radius; region radii must stay below it.
    pub fn injectivity_radius(&self) -> f64 {
        match *self {
            ModelSurface::FlatTorus { periods } => 0.5 * periods[0].min(periods[1]),
            ModelSurface::Sphere { radius } => PI * radius,
            ModelSurface::Revolution(p) => {
                let len = p.length();
                let kmax = (0..=2000)
                    .map(|i| p.curvature(len * i as f64 / 2000.0))
                    .fold(f64::NEG_INFINITY, f64::max);
                let conj = if kmax > 0.0 {
                    PI / kmax.sqrt()
                } else {
                    f64::INFINITY
                };
                conj.min(len).min(PI * p.rho_max())
            }
        }
    }

    /// Riemannian distance between two chart points.
    pub fn geodesic_distance(&self, p: Point, q: Point) -> f64 {
        let p = self.normalize(p);
        let q = self.normalize(q);
        if p == q {
            return 0.0;
        }
        // canonical order keeps the result exactly symmetric
        let (p, q) = if (p.0, p.1) <= (q.0, q.1) {
            (p, q)
        } else {
            (q, p)
        };
        match *self {
            ModelSurface::FlatTorus { periods } => {
                let dx = wrap_signed(q.0 - p.0, periods[0]);
                let dy = wrap_signed(q.1 - p.1, periods[1]);
                dx.hypot(dy)
            }
            ModelSurface::Sphere { radius } => {
                let a = unit_vector(p);
                let b = unit_vector(q);
                let cross = [
                    a[1] * b[2] - a[2] * b[1],
                    a[2] * b[0] - a[0] * b[2],
                    a[0] * b[1] - a[1] * b[0],
                ];
                let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
                let cos = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                radius * sin.atan2(cos)
            }
            ModelSurface::Revolution(profile) => geodesic::revolution_distance(&profile, p, q),
        }
    }

    /// Point at geodesic distance `r` from `center` in direction `bearing`, where
    /// bearing 0 points along increasing `x1` and `π/2` along increasing `x2`.
    pub fn exp_map(&self, center: Point, r: f64, bearing: f64) -> Point {
        match *self {
            ModelSurface::FlatTorus { .. } => {
                let (s, c) = bearing.sin_cos();
                self.normalize(Point(center.0 + r * c, center.1 + r * s))
            }
            ModelSurface::Sphere { radius } => {
                let f = SphereFrame::new(center);
                f.point(r / radius, bearing)
            }
            ModelSurface::Revolution(profile) => {
                geodesic::march(&profile, center, bearing, &[r])[0].0
            }
        }
    }

    /// Inverse of [`exp_map`](Self::exp_map) inside the injectivity radius:
    /// `(r, bearing)` of `p` seen from `center`. Surfaces of revolution support
    /// pole centers only.
    pub fn polar_coords(&self, center: Point, p: Point) -> Result<(f64, f64)> {
        match *self {
            ModelSurface::FlatTorus { periods } => {
                let dx = wrap_signed(p.0 - center.0, periods[0]);
                let dy = wrap_signed(p.1 - center.1, periods[1]);
                Ok((dx.hypot(dy), wrap(dy.atan2(dx), 2.0 * PI)))
            }
            ModelSurface::Sphere { radius } => {
                let f = SphereFrame::new(center);
                let v = unit_vector(p);
                let cos = dot(v, f.n);
                let t1 = dot(v, f.e1);
                let t2 = dot(v, f.e2);
                let sin = t1.hypot(t2);
                Ok((radius * sin.atan2(cos), wrap(t2.atan2(t1), 2.0 * PI)))
            }
            ModelSurface::Revolution(profile) => {
                let c = self.normalize(center);
                let q = self.normalize(p);
                if c.0 == 0.0 {
                    Ok((q.0, q.1))
                } else if c.0 == profile.length() {
                    Ok((profile.length() - q.0, q.1))
                } else {
                    Err(Error::Unsupported(
                        "polar coordinates on a surface of revolution need a pole center".into(),
                    ))
                }
            }
        }
    }

    /// Validate a region against this surface.
    pub fn check_region(&self, region: &Region) -> Result<()> {
        let inj = self.injectivity_radius();
        match *region {
            Region::Ball { radius, .. } => {
                if !(radius > 0.0) {
                    return Err(Error::InvalidRegion(format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
                if radius >= inj {
                    return Err(Error::InvalidRegion(format!(
                        "ball radius {radius} is not below the injectivity bound {inj}"
                    )));
                }
            }
            Region::Annulus { inner, outer, .. } => {
                if !(inner > 0.0 && inner < outer) {
                    return Err(Error::InvalidRegion(format!(
                        "annulus needs 0 < inner < outer, got ({inner}, {outer})"
                    )));
                }
                if outer >= inj {
                    return Err(Error::InvalidRegion(format!(
                        "annulus outer radius {outer} is not below the injectivity bound {inj}"
                    )));
                }
            }
            Region::Whole => {}
        }
        Ok(())
    }
}

/// A geodesic ball, a geodesic annulus `{inner ≤ r ≤ outer}`, or the whole surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Ball {
        center: Point,
        radius: f64,
    },
    Annulus {
        center: Point,
        inner: f64,
        outer: f64,
    },
    Whole,
}

impl Region {
    pub fn ball(center: Point, radius: f64) -> Self {
        Region::Ball { center, radius }
    }

    pub fn annulus(center: Point, inner: f64, outer: f64) -> Self {
        Region::Annulus {
            center,
            inner,
            outer,
        }
    }

    pub fn center(&self) -> Option<Point> {
        match *self {
            Region::Ball { center, .. } | Region::Annulus { center, .. } => Some(center),
            Region::Whole => None,
        }
    }

    /// `(inner, outer)` radii for balls and annuli.
    pub fn radii(&self) -> Option<(f64, f64)> {
        match *self {
            Region::Ball { radius, .. } => Some((0.0, radius)),
            Region::Annulus { inner, outer, .. } => Some((inner, outer)),
            Region::Whole => None,
        }
    }
}

pub(crate) fn unit_vector(p: Point) -> [f64; 3] {
    let (st, ct) = p.0.sin_cos();
    let (sp, cp) = p.1.sin_cos();
    [st * cp, st * sp, ct]
}

pub(crate) fn from_unit_vector(v: [f64; 3]) -> Point {
    let rho = v[0].hypot(v[1]);
    let theta = rho.atan2(v[2]);
    let phi = if rho == 0.0 {
        0.0
    } else {
        wrap(v[1].atan2(v[0]), 2.0 * PI)
    };
    Point(theta, phi)
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Orthonormal frame at a sphere point: normal, `∂θ` and `∂φ` directions.
/// The formulas stay valid at the poles.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SphereFrame {
    n: [f64; 3],
    e1: [f64; 3],
    e2: [f64; 3],
}

impl SphereFrame {
    pub(crate) fn new(c: Point) -> Self {
        let (st, ct) = c.0.sin_cos();
        let (sp, cp) = c.1.sin_cos();
        SphereFrame {
            n: [st * cp, st * sp, ct],
            e1: [ct * cp, ct * sp, -st],
            e2: [-sp, cp, 0.0],
        }
    }

    /// Point at angular distance `angle` in direction `bearing`.
    #[inline]
    pub(crate) fn point(&self, angle: f64, bearing: f64) -> Point {
        let (sa, ca) = angle.sin_cos();
        let (sb, cb) = bearing.sin_cos();
        let v = [
            ca * self.n[0] + sa * (cb * self.e1[0] + sb * self.e2[0]),
            ca * self.n[1] + sa * (cb * self.e1[1] + sb * self.e2[1]),
            ca * self.n[2] + sa * (cb * self.e1[2] + sb * self.e2[2]),
        ];
        from_unit_vector(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_half_period_distance() {
        let t = ModelSurface::standard_torus();
        let d = t.geodesic_distance(Point(0.0, 0.0), Point(PI, 0.0));
        assert!((d - PI).abs() < 1e-15);
        let d = t.geodesic_distance(Point(0.1, 0.0), Point(2.0 * PI - 0.1, 0.0));
        assert!((d - 0.2).abs() < 1e-12);
    }

    #[test]
    fn sphere_antipodal_distance() {
        let s = ModelSurface::sphere(1.0).unwrap();
        let d = s.geodesic_distance(Point(0.0, 0.0), Point(PI, 0.0));
        assert!((d - PI).abs() < 1e-15);
        let s2 = ModelSurface::sphere(2.0).unwrap();
        assert!((s2.geodesic_distance(Point(0.0, 0.0), Point(PI / 2.0, 1.0)) - PI).abs() < 1e-14);
    }

    #[test]
    fn invalid_surfaces_are_rejected() {
        assert!(ModelSurface::flat_torus(0.0, 1.0).is_err());
        assert!(ModelSurface::sphere(-1.0).is_err());
        assert!(Profile::perturbed(1.0, -0.5).is_err());
        assert!(Profile::sine(0.0).is_err());
    }

    #[test]
    fn injectivity_bounds() {
        assert!((ModelSurface::standard_torus().injectivity_radius() - PI).abs() < 1e-15);
        assert!((ModelSurface::sphere(2.0).unwrap().injectivity_radius() - 2.0 * PI).abs() < 1e-15);
        let rev = ModelSurface::revolution(Profile::sine(1.0).unwrap());
        assert!((rev.injectivity_radius() - PI).abs() < 1e-9);
    }

    #[test]
    fn region_beyond_injectivity_is_rejected() {
        let t = ModelSurface::standard_torus();
        assert!(t.check_region(&Region::ball(Point(0.0, 0.0), 3.5)).is_err());
        assert!(t.check_region(&Region::ball(Point(0.0, 0.0), 0.0)).is_err());
        assert!(t
            .check_region(&Region::annulus(Point(0.0, 0.0), 0.4, 0.2))
            .is_err());
        assert!(t
            .check_region(&Region::annulus(Point(0.0, 0.0), 0.2, 0.4))
            .is_ok());
    }

    #[test]
    fn sphere_exp_and_polar_are_inverse() {
        let s = ModelSurface::sphere(1.5).unwrap();
        for c in [
            Point(0.0, 0.0),
            Point(1.0, 2.0),
            Point(PI, 0.3),
            Point(2.5, 6.0),
        ] {
            for (r, b) in [(0.3, 0.2), (1.0, 4.0), (0.01, 3.0)] {
                let p = s.exp_map(c, r, b);
                let (r2, b2) = s.polar_coords(c, p).unwrap();
                assert!((r - r2).abs() < 1e-12, "{c:?} {r} {r2}");
                assert!(wrap_signed(b - b2, 2.0 * PI).abs() < 1e-9);
                assert!((s.geodesic_distance(c, p) - r).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalize_reflects_through_poles() {
        let s = ModelSurface::sphere(1.0).unwrap();
        let p = s.normalize(Point(-0.2, 0.0));
        assert!((p.0 - 0.2).abs() < 1e-15 && (p.1 - PI).abs() < 1e-15);
        let p = s.normalize(Point(PI + 0.1, 1.0));
        assert!((p.0 - (PI - 0.1)).abs() < 1e-14 && (p.1 - (1.0 + PI)).abs() < 1e-14);
    }

    #[test]
    fn perturbed_profile_curvature_matches_second_derivative() {
        let p = Profile::perturbed(1.3, 0.2).unwrap();
        for s in [0.2, 1.0, 2.0, 3.5] {
            let k = -p.rho_second(s) / p.rho(s);
            assert!((k - p.curvature(s)).abs() < 1e-12);
            let h = 1e-5;
            let fd = (p.rho(s + h) - p.rho(s - h)) / (2.0 * h);
            assert!((fd - p.rho_prime(s)).abs() < 1e-8);
        }
    }
}
