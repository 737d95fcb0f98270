use std::f64::consts::PI;

use proptest::prelude::*;
use specgeo_core::fieldcalc::{
    gradient_consistency_check, gradient_norms, norm_over_region, value_norms, NormKind,
};
use specgeo_core::spectra::{sphere_zonal_eigenpair, torus_eigenpair, Jet};
use specgeo_core::{ChartField, EigenPair, ModelSurface, Point, Region};

fn torus() -> ModelSurface {
    ModelSurface::standard_torus()
}

#[test]
fn whole_torus_norms() {
    let u = torus_eigenpair(&torus(), [1, 0], 0.0).unwrap();
    let n = value_norms(&u, &Region::Whole, 32).unwrap();
    assert!((n.l2 - PI * 2f64.sqrt()).abs() < 1e-12, "{}", n.l2);
    assert!((n.sup - 1.0).abs() < 1e-12);
    for k in [1i64, 3, 7] {
        let u = torus_eigenpair(&torus(), [k, 0], 0.0).unwrap();
        let g = gradient_norms(&u, &Region::Whole, 32).unwrap();
        assert!((g.l2 - k as f64 * PI * 2f64.sqrt()).abs() < 1e-10);
    }
}

#[test]
fn ball_l2_matches_riemann_sum() {
    let u = torus_eigenpair(&torus(), [4, 0], 0.0).unwrap();
    let radius = 0.3;
    let quad = norm_over_region(
        &torus(),
        &Region::ball(Point(0.0, 0.0), radius),
        NormKind::L2,
        32,
        |p| u.value(p).abs(),
    )
    .unwrap();
    let n = 2000;
    let h = 2.0 * radius / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let x = -radius + (i as f64 + 0.5) * h;
        for j in 0..n {
            let y = -radius + (j as f64 + 0.5) * h;
            if (x.hypot(y) - radius).abs() < h {
                let m = 10;
                let hh = h / m as f64;
                for a in 0..m {
                    for b in 0..m {
                        let xs = x - 0.5 * h + (a as f64 + 0.5) * hh;
                        let ys = y - 0.5 * h + (b as f64 + 0.5) * hh;
                        if xs.hypot(ys) < radius {
                            sum += (4.0 * xs).sin().powi(2) * hh * hh;
                        }
                    }
                }
            } else if x.hypot(y) < radius {
                sum += (4.0 * x).sin().powi(2) * h * h;
            }
        }
    }
    let brute = sum.sqrt();
    assert!((quad - brute).abs() / brute < 1e-6, "{quad} {brute}");
}

#[test]
fn sup_norm_finds_interior_peak() {
    let u = torus_eigenpair(&torus(), [3, 2], 0.37).unwrap();
    let region = Region::ball(Point(0.5, 0.5), 0.8);
    let sup = value_norms(&u, &region, 8).unwrap().sup;
    assert!((sup - 1.0).abs() < 1e-10, "{sup}");
}

struct NegatedGradient(EigenPair);

impl ChartField for NegatedGradient {
    fn surface(&self) -> &ModelSurface {
        self.0.surface()
    }
    fn lambda(&self) -> f64 {
        self.0.lambda()
    }
    fn jet(&self, p: Point) -> Jet {
        self.0.jet(p)
    }
    fn grad(&self, p: Point) -> [f64; 2] {
        let g = self.0.grad(p);
        [-g[0], -g[1]]
    }
}

#[test]
fn gradient_consistency_examples() {
    let t = torus_eigenpair(&torus(), [1, 0], 0.0).unwrap();
    assert!(gradient_consistency_check(&t, 1000, 1).unwrap() < 1e-9);
    let s = ModelSurface::sphere(1.0).unwrap();
    let z = sphere_zonal_eigenpair(&s, 5).unwrap();
    assert!(gradient_consistency_check(&z, 1000, 2).unwrap() < 1e-6 * (1.0 + 30f64.sqrt()));
    let bad = NegatedGradient(t);
    assert!(gradient_consistency_check(&bad, 1000, 3).unwrap() >= 1.0);
    assert!(gradient_consistency_check(&z, 0, 3).is_err());
}

#[test]
fn degenerate_region_is_an_error() {
    let t = torus_eigenpair(&torus(), [1, 0], 0.0).unwrap();
    assert!(value_norms(&t, &Region::ball(Point(0.0, 0.0), 0.0), 8).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn l2_norm_is_monotone_in_radius(c1 in 0.0..6.2f64, c2 in 0.0..6.2f64, r1 in 0.05..1.0f64, dr in 0.0..1.0f64, k1 in -4i64..4, k2 in 1i64..4) {
        let u = torus_eigenpair(&torus(), [k1, k2], 0.2).unwrap();
        let c = Point(c1, c2);
        let a = gradient_norms(&u, &Region::ball(c, r1), 16).unwrap().l2;
        let b = gradient_norms(&u, &Region::ball(c, r1 + dr), 16).unwrap().l2;
        prop_assert!(a <= b + 1e-12);
    }

    #[test]
    fn norms_are_homogeneous(alpha in -50.0..50.0f64, c1 in 0.0..3.0f64, l in 1usize..8) {
        let s = ModelSurface::sphere(1.0).unwrap();
        let u = sphere_zonal_eigenpair(&s, l).unwrap();
        let region = Region::ball(Point(c1, 0.4), 0.5);
        let n = value_norms(&u, &region, 12).unwrap();
        let m = value_norms(&u.scaled(alpha), &region, 12).unwrap();
        prop_assert!((m.l2 - alpha.abs() * n.l2).abs() <= 1e-13 * m.l2.max(1e-300));
        prop_assert!((m.sup - alpha.abs() * n.sup).abs() <= 1e-13 * m.sup.max(1e-300));
    }

    #[test]
    fn annulus_decomposition_is_additive(delta in 0.05..0.5f64, extra in 0.1..1.0f64, k in 1i64..6) {
        let u = torus_eigenpair(&torus(), [k, 1], 0.0).unwrap();
        let c = Point(0.3, 1.1);
        let big = gradient_norms(&u, &Region::ball(c, delta + extra), 32).unwrap().l2;
        let inner = gradient_norms(&u, &Region::ball(c, delta), 32).unwrap().l2;
        let ring = gradient_norms(&u, &Region::annulus(c, delta, delta + extra), 32).unwrap().l2;
        prop_assert!((big * big - inner * inner - ring * ring).abs() <= 1e-8 * big * big);
    }
}

#[test]
fn eigenpair_field_type_is_shareable() {
    fn assert_sync<T: Sync + Send>() {}
    assert_sync::<EigenPair>();
}
