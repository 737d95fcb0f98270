use std::f64::consts::PI;

use super::{geodesic, ModelSurface, Point, Region, SphereFrame};
use crate::error::{Error, Result};
use crate::numerics::gauss_on;

/// Positive quadrature `Σ wᵢ f(xᵢ) ≈ ∫ f dV` over a region. For polar rules
/// `polar[i]` holds the geodesic polar coordinates `(r, bearing)` of node `i`
/// about the region center; it is empty for whole-surface rules.
#[derive(Clone, Debug, Default)]
pub struct QuadratureRule {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub polar: Vec<(f64, f64)>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, mut f: impl FnMut(Point) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(*p))
            .sum()
    }
}

/// Tensor rule in geodesic polar coordinates about `center`: the supplied radial
/// nodes (ascending) times `n_angular` equispaced bearings, weighted by the polar
/// volume density `J(r, bearing)`.
pub fn polar_rule(
    surface: &ModelSurface,
    center: Point,
    radial: &[(f64, f64)],
    n_angular: usize,
) -> QuadratureRule {
    let center = surface.normalize(center);
    let dbeta = 2.0 * PI / n_angular as f64;
    let cap = radial.len() * n_angular;
    let mut rule = QuadratureRule {
        nodes: Vec::with_capacity(cap),
        weights: Vec::with_capacity(cap),
        polar: Vec::with_capacity(cap),
    };
    let radii: Vec<f64> = radial.iter().map(|(r, _)| *r).collect();
    for j in 0..n_angular {
        let beta = j as f64 * dbeta;
        let pts: Vec<(Point, f64)> = match *surface {
            ModelSurface::FlatTorus { .. } => radii
                .iter()
                .map(|&r| (surface.exp_map(center, r, beta), r))
                .collect(),
            ModelSurface::Sphere { radius } => {
                let frame = SphereFrame::new(center);
                radii
                    .iter()
                    .map(|&r| (frame.point(r / radius, beta), radius * (r / radius).sin()))
                    .collect()
            }
            ModelSurface::Revolution(profile) => geodesic::march(&profile, center, beta, &radii),
        };
        for ((p, jac), (r, w)) in pts.into_iter().zip(radial) {
            rule.nodes.push(p);
            rule.weights.push(w * dbeta * jac);
            rule.polar.push((*r, beta));
        }
    }
    rule
}

/// Quadrature over a region. Balls and annuli use `2·order` radial Gauss–Legendre
/// nodes (never fewer than 8, so the area is exact to 1e-6 even at order 1) and
/// `4·order` angular trapezoid nodes about the center; the whole surface uses a
/// tensor rule in the global chart.
pub fn region_quadrature(
    surface: &ModelSurface,
    region: &Region,
    order: usize,
) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(crate::error::invalid(
            "order",
            "quadrature order must be at least 1",
        ));
    }
    surface.check_region(region)?;
    match *region {
        Region::Ball { center, radius } => Ok(polar_rule(
            surface,
            center,
            &gauss_on(0.0, radius, radial_nodes(order)),
            4 * order,
        )),
        Region::Annulus {
            center,
            inner,
            outer,
        } => Ok(polar_rule(
            surface,
            center,
            &gauss_on(inner, outer, radial_nodes(order)),
            4 * order,
        )),
        Region::Whole => Ok(whole_rule(surface, order)),
    }
}

fn radial_nodes(order: usize) -> usize {
    (2 * order).max(8)
}

fn whole_rule(surface: &ModelSurface, order: usize) -> QuadratureRule {
    let n2 = 4 * order;
    let mut rule = QuadratureRule::default();
    let first: Vec<(f64, f64)> = match *surface {
        ModelSurface::FlatTorus { periods } => {
            let n1 = 4 * order;
            let h = periods[0] / n1 as f64;
            (0..n1).map(|i| (i as f64 * h, h)).collect()
        }
        ModelSurface::Sphere { radius } => gauss_on(-1.0, 1.0, 2 * order)
            .into_iter()
            .map(|(x, w)| (x.acos(), w * radius * radius))
            .collect(),
        ModelSurface::Revolution(p) => gauss_on(0.0, p.length(), 2 * order)
            .into_iter()
            .map(|(s, w)| (s, w * p.rho(s)))
            .collect(),
    };
    let period2 = surface.chart_extent()[1];
    let h2 = period2 / n2 as f64;
    for (x1, w1) in first {
        for j in 0..n2 {
            rule.nodes.push(Point(x1, j as f64 * h2));
            rule.weights.push(w1 * h2);
        }
    }
    rule
}

/// Riemannian area of a region, from closed forms where available.
pub fn area(surface: &ModelSurface, region: &Region) -> Result<f64> {
    surface.check_region(region)?;
    let disc = |r: f64| -> f64 {
        match *surface {
            ModelSurface::FlatTorus { .. } => PI * r * r,
            ModelSurface::Sphere { radius } => {
                2.0 * PI * radius * radius * (1.0 - (r / radius).cos())
            }
            ModelSurface::Revolution(_) => f64::NAN,
        }
    };
    match (*surface, *region) {
        (_, Region::Whole) => Ok(surface.total_area()),
        (ModelSurface::Revolution(_), _) => {
            let rule = region_quadrature(surface, region, 24)?;
            let a = rule.total_weight();
            if a > 0.0 {
                Ok(a)
            } else {
                Err(Error::InvalidRegion("region has no area".into()))
            }
        }
        (_, Region::Ball { radius, .. }) => Ok(disc(radius)),
        (_, Region::Annulus { inner, outer, .. }) => Ok(disc(outer) - disc(inner)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::Profile;

    #[test]
    fn flat_ball_constant_and_r_squared() {
        let t = ModelSurface::standard_torus();
        let c = Point(1.0, 2.0);
        let rule = region_quadrature(&t, &Region::ball(c, 0.3), 4).unwrap();
        assert!((rule.total_weight() - PI * 0.09).abs() < 1e-12);
        let rr = rule
            .polar
            .iter()
            .zip(&rule.weights)
            .map(|((r, _), w)| w * r * r)
            .sum::<f64>();
        assert!((rr - PI * 0.3f64.powi(4) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_areas() {
        let t = ModelSurface::standard_torus();
        let a = area(&t, &Region::ball(Point(0.0, 0.0), 0.5)).unwrap();
        assert!((a - PI * 0.25).abs() < 1e-12);
        let a = area(&t, &Region::annulus(Point(0.0, 0.0), 0.2, 0.4)).unwrap();
        assert!((a - 0.376_991_118_430_775_2).abs() < 1e-12);
        let s = ModelSurface::sphere(1.0).unwrap();
        let a = area(&s, &Region::ball(Point(0.0, 0.0), 1.0)).unwrap();
        assert!((a - 2.888_365_797_513_64).abs() < 1e-12);
    }

    #[test]
    fn weight_sums_match_area() {
        let rev = ModelSurface::revolution(Profile::sine(1.0).unwrap());
        let sph = ModelSurface::sphere(1.0).unwrap();
        for c in [Point(0.0, 0.0), Point(1.2, 0.5), Point(0.05, 3.0)] {
            for region in [Region::ball(c, 0.7), Region::annulus(c, 0.1, 0.9)] {
                let exact = area(&sph, &region).unwrap();
                for s in [&sph, &rev] {
                    let rule = region_quadrature(s, &region, 6).unwrap();
                    assert!(rule.weights.iter().all(|w| *w > 0.0));
                    let rel = (rule.total_weight() - exact).abs() / exact;
                    assert!(rel < 1e-6, "{s:?} {region:?} {rel}");
                }
            }
        }
    }

    #[test]
    fn whole_surface_rules_integrate_area() {
        let t = ModelSurface::flat_torus(2.0, 3.0).unwrap();
        let r = region_quadrature(&t, &Region::Whole, 4).unwrap();
        assert!((r.total_weight() - 6.0).abs() < 1e-12);
        let s = ModelSurface::sphere(2.0).unwrap();
        let r = region_quadrature(&s, &Region::Whole, 4).unwrap();
        assert!((r.total_weight() - 16.0 * PI).abs() < 1e-11);
        let p = ModelSurface::revolution(Profile::perturbed(1.0, 0.2).unwrap());
        let r = region_quadrature(&p, &Region::Whole, 16).unwrap();
        assert!((r.total_weight() - p.total_area()).abs() < 1e-10);
    }

    #[test]
    fn zero_order_is_rejected() {
        let t = ModelSurface::standard_torus();
        assert!(region_quadrature(&t, &Region::ball(Point(0.0, 0.0), 0.3), 0).is_err());
    }
}
