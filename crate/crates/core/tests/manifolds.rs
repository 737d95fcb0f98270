use std::f64::consts::PI;

use proptest::prelude::*;
use specgeo_core::manifolds::{area, region_quadrature};
use specgeo_core::{ModelSurface, Point, Profile, Region};

fn sine_revolution() -> ModelSurface {
    ModelSurface::revolution(Profile::sine(1.0).unwrap())
}

#[test]
fn revolution_distance_matches_great_circle() {
    let rev = sine_revolution();
    let sph = ModelSurface::sphere(1.0).unwrap();
    let pairs = [
        (Point(0.4, 0.1), Point(1.9, 2.2)),
        (Point(1.0, 0.0), Point(1.0, 1.0)),
        (Point(0.2, 0.0), Point(0.3, 3.0)),
        (Point(2.8, 5.0), Point(0.9, 1.3)),
        (Point(1.5, 0.0), Point(1.5, 3.0)),
        (Point(0.0, 0.0), Point(2.0, 1.0)),
        (Point(1.1, 0.7), Point(1.6, 0.7)),
    ];
    for (p, q) in pairs {
        let d_rev = rev.geodesic_distance(p, q);
        let d_sph = sph.geodesic_distance(p, q);
        assert!(
            (d_rev - d_sph).abs() < 1e-6,
            "{p:?} {q:?}: {d_rev} vs {d_sph}"
        );
    }
}

#[test]
fn flat_ball_matches_brute_force_riemann_sum() {
    let t = ModelSurface::standard_torus();
    let radius = 0.5;
    let f = |p: Point| (4.0 * p.0).sin().powi(2);
    let rule = region_quadrature(&t, &Region::ball(Point(0.0, 0.0), radius), 16).unwrap();
    let quad = rule.integrate(f);
    // midpoint sum on a 2000² grid covering the disc, with fractional cell coverage
    // handled by supersampling boundary cells
    let n = 2000;
    let h = 2.0 * radius / n as f64;
    let mut brute = 0.0;
    for i in 0..n {
        let x = -radius + (i as f64 + 0.5) * h;
        for j in 0..n {
            let y = -radius + (j as f64 + 0.5) * h;
            let rr = x.hypot(y);
            if (rr - radius).abs() > h {
                if rr < radius {
                    brute += f(Point(x, y)) * h * h;
                }
            } else {
                let m = 8;
                let hh = h / m as f64;
                for a in 0..m {
                    for b in 0..m {
                        let xs = x - 0.5 * h + (a as f64 + 0.5) * hh;
                        let ys = y - 0.5 * h + (b as f64 + 0.5) * hh;
                        if xs.hypot(ys) < radius {
                            brute += f(Point(xs, ys)) * hh * hh;
                        }
                    }
                }
            }
        }
    }
    assert!((quad - brute).abs() / brute < 1e-6, "{quad} vs {brute}");
}

#[test]
fn refining_order_reduces_error() {
    let t = ModelSurface::standard_torus();
    let region = Region::ball(Point(0.3, 0.2), 1.0);
    let f = |p: Point| (3.0 * p.0).sin().powi(2) * (2.0 * p.1).cos().exp();
    let reference = region_quadrature(&t, &region, 40).unwrap().integrate(f);
    let mut last = f64::INFINITY;
    for order in [2, 4, 8] {
        let err = (region_quadrature(&t, &region, order).unwrap().integrate(f) - reference).abs();
        assert!(err < last, "order {order}: {err} vs {last}");
        last = err;
    }
}

#[test]
fn sphere_pole_region_weights() {
    let s = ModelSurface::sphere(1.0).unwrap();
    let region = Region::ball(Point(0.0, 0.0), 1.0);
    let rule = region_quadrature(&s, &region, 8).unwrap();
    let exact = area(&s, &region).unwrap();
    assert!((rule.total_weight() - exact).abs() / exact < 1e-10);
    assert!(rule.nodes.iter().all(|p| p.0 > 0.0));
    let _ = PI;
}

fn sphere_point() -> impl Strategy<Value = Point> {
    (0.0..PI, 0.0..2.0 * PI).prop_map(|(a, b)| Point(a, b))
}

fn torus_point() -> impl Strategy<Value = Point> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(a, b)| Point(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn torus_distance_is_a_metric(p in torus_point(), q in torus_point(), r in torus_point()) {
        let t = ModelSurface::flat_torus(2.0 * PI, 3.0).unwrap();
        prop_assert_eq!(t.geodesic_distance(p, q), t.geodesic_distance(q, p));
        prop_assert_eq!(t.geodesic_distance(p, p), 0.0);
        prop_assert!(t.geodesic_distance(p, r) <= t.geodesic_distance(p, q) + t.geodesic_distance(q, r) + 1e-12);
    }

    #[test]
    fn sphere_distance_is_a_metric(p in sphere_point(), q in sphere_point(), r in sphere_point()) {
        let s = ModelSurface::sphere(1.7).unwrap();
        prop_assert_eq!(s.geodesic_distance(p, q), s.geodesic_distance(q, p));
        prop_assert_eq!(s.geodesic_distance(p, p), 0.0);
        prop_assert!(s.geodesic_distance(p, r) <= s.geodesic_distance(p, q) + s.geodesic_distance(q, r) + 1e-12);
    }

    #[test]
    fn quadrature_weights_positive_and_sum_to_area(c in sphere_point(), inner in 0.05..0.5f64, width in 0.05..1.0f64, order in 1usize..6) {
        let s = ModelSurface::sphere(1.0).unwrap();
        for region in [Region::ball(c, inner + width), Region::annulus(c, inner, inner + width)] {
            let rule = region_quadrature(&s, &region, order).unwrap();
            prop_assert!(rule.weights.iter().all(|w| *w > 0.0));
            let exact = area(&s, &region).unwrap();
            prop_assert!((rule.total_weight() - exact).abs() / exact < 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn revolution_distance_is_symmetric(p in sphere_point(), q in sphere_point()) {
        let rev = ModelSurface::revolution(Profile::perturbed(1.0, 0.15).unwrap());
        prop_assert_eq!(rev.geodesic_distance(p, q), rev.geodesic_distance(q, p));
        prop_assert_eq!(rev.geodesic_distance(p, p), 0.0);
    }
}
