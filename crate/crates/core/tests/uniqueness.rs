use std::f64::consts::PI;

use proptest::prelude::*;
use specgeo_core::carleman::WeightParams;
use specgeo_core::fieldcalc::NormKind;
use specgeo_core::spectra::{sphere_zonal_eigenpair, torus_eigenpair, Jet};
use specgeo_core::uniqueness::*;
use specgeo_core::{ChartField, ModelSurface, Point};

fn torus() -> ModelSurface {
    ModelSurface::standard_torus()
}

fn three_sphere_params() -> WeightParams {
    WeightParams::new(0.5, -0.5).unwrap()
}

/// `u = x₁` in the chart: constant unit gradient, spectral scale 1.
struct LinearProbe(ModelSurface);

impl ChartField for LinearProbe {
    fn surface(&self) -> &ModelSurface {
        &self.0
    }
    fn lambda(&self) -> f64 {
        1.0
    }
    fn jet(&self, p: Point) -> Jet {
        Jet {
            u: p.0,
            u1: 1.0,
            ..Jet::default()
        }
    }
}

fn phi(eps: f64, r: f64) -> f64 {
    -r.ln() + r.powf(eps)
}

#[test]
fn alpha_examples() {
    let a = alpha_from_weight(&WeightParams::new(0.5, -0.5).unwrap(), 0.1).unwrap();
    let ea = phi(0.5, 0.025) - phi(0.5, 0.1);
    let eb = phi(0.5, 0.1) - phi(0.5, 0.15);
    assert!((a.a_r - ea).abs() < 1e-14 && (a.b_r - eb).abs() < 1e-14);
    assert!((a.a_r - 1.228_180).abs() < 1e-6);
    assert!((a.b_r - 0.334_395).abs() < 1e-6);
    assert!((a.alpha - 0.786_00).abs() < 1e-5);
    let small = alpha_from_weight(&WeightParams::new(1e-9, -0.5).unwrap(), 0.1).unwrap();
    assert!((small.a_r - 4f64.ln()).abs() < 1e-8);
    assert!((small.b_r - 1.5f64.ln()).abs() < 1e-8);
    assert!((small.alpha - 4f64.ln() / 6f64.ln()).abs() < 1e-8);
    let grid: Vec<f64> = (1..=60).map(|i| 0.01 * i as f64).collect();
    let (amin, _, bmin, _) = alpha_bounds(&three_sphere_params(), &grid).unwrap();
    assert!(amin > 0.0 && bmin > 0.0);
    assert!(alpha_from_weight(&three_sphere_params(), 0.7).is_err());
}

#[test]
fn three_sphere_constant_gradient_probe() {
    let probe = LinearProbe(torus());
    let params = three_sphere_params();
    let rep = three_sphere_check(&probe, Point(1.0, 1.0), 0.1, &params, 16).unwrap();
    let expect = (2.0 * rep.alpha.alpha - 1.0) * 2f64.ln();
    assert!((rep.required_c - expect).abs() < 1e-12);
    assert!((rep.required_c - 0.396_48).abs() < 1e-4);
    assert!((rep.required_c_swapped + expect).abs() < 1e-12);
}

#[test]
fn three_sphere_refinement_and_scaling() {
    let u = torus_eigenpair(&torus(), [5, 0], 0.0).unwrap();
    let params = three_sphere_params();
    let a = three_sphere_check(&u, Point(0.0, 0.0), 0.2, &params, 32).unwrap();
    let b = three_sphere_check(&u, Point(0.0, 0.0), 0.2, &params, 64).unwrap();
    assert!((a.required_c - b.required_c).abs() < 1e-4);
    let c = three_sphere_check(&u.scaled(10.0), Point(0.0, 0.0), 0.2, &params, 32).unwrap();
    assert!((a.required_c - c.required_c).abs() < 1e-12);
    assert!(three_sphere_check(&u, Point(0.0, 0.0), 1.6, &params, 8).is_err());
}

#[test]
fn doubling_probe_and_refinement() {
    let probe = LinearProbe(torus());
    let rep = doubling_index(&probe, Point(1.0, 1.0), 0.01, NormKind::L2, 16).unwrap();
    assert!((rep.index - 2f64.ln()).abs() < 1e-12);
    let sup = doubling_index(&probe, Point(1.0, 1.0), 0.01, NormKind::SupNorm, 16).unwrap();
    assert!(sup.index.abs() < 1e-12);

    let u = torus_eigenpair(&torus(), [1, 0], 0.0).unwrap();
    let c = Point(PI / 2.0, 0.0);
    let a = doubling_index(&u, c, 0.3, NormKind::L2, 32).unwrap();
    let b = doubling_index(&u, c, 0.3, NormKind::L2, 64).unwrap();
    assert!((a.index - b.index).abs() < 1e-4);
    let s = doubling_index(&u, c, 0.3, NormKind::SupNorm, 32).unwrap();
    assert!(s.index >= 0.0);
}

#[test]
fn doubling_sweep_singleton_and_permutation() {
    let s = ModelSurface::sphere(1.0).unwrap();
    let u = sphere_zonal_eigenpair(&s, 4).unwrap();
    let c = Point(0.7, 0.2);
    let single = doubling_sweep(&u, &[c], &[0.1], NormKind::L2, 16).unwrap();
    assert_eq!(
        single.max,
        doubling_index(&u, c, 0.1, NormKind::L2, 16).unwrap()
    );
    let mut centers = halton_centers(&s, 12, 0);
    let radii = [0.05, 0.1, 0.2];
    let a = doubling_sweep(&u, &centers, &radii, NormKind::SupNorm, 12).unwrap();
    centers.reverse();
    let b = doubling_sweep(&u, &centers, &[0.2, 0.05, 0.1], NormKind::SupNorm, 12).unwrap();
    assert_eq!(a.max, b.max);
    assert!(doubling_sweep(&u, &[], &radii, NormKind::L2, 12).is_err());
}

/// Bessel J₁ by its integral representation.
fn bessel_j1(x: f64) -> f64 {
    let n = 20_000;
    let h = PI / n as f64;
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            (t - x * t.sin()).cos()
        })
        .sum::<f64>()
        * h
        / PI
}

#[test]
fn global_lower_bound_torus_closed_form() {
    let k = 4;
    let u = torus_eigenpair(&torus(), [k, 0], 0.0).unwrap();
    let kf = k as f64;
    // ratio² = (1/4π)(1 + J₁(2k) cos(2k x_c)/k); centers along x₁ cover both extremes
    let centers: Vec<Point> = (0..16)
        .map(|i| Point(i as f64 * PI / (8.0 * kf), 0.3))
        .collect();
    let rep = global_lower_bound_check(&u, 1.0, &centers, 32).unwrap();
    let j = bessel_j1(2.0 * kf);
    let exact_min = centers
        .iter()
        .map(|c| ((1.0 + j * (2.0 * kf * c.0).cos() / kf) / (4.0 * PI)).sqrt())
        .fold(f64::INFINITY, f64::min);
    assert!(
        (rep.min_ratio - exact_min).abs() < 1e-8,
        "{} {exact_min}",
        rep.min_ratio
    );
    assert!((rep.min_ratio - 0.2821).abs() < 0.01);
    let scaled = global_lower_bound_check(&u.scaled(3.0), 1.0, &centers, 32).unwrap();
    assert!((scaled.min_ratio - rep.min_ratio).abs() < 1e-12);
}

#[test]
fn zonal_lower_bound_positive() {
    let s = ModelSurface::sphere(1.0).unwrap();
    let u = sphere_zonal_eigenpair(&s, 2).unwrap();
    let rep = global_lower_bound_check(&u, 1.0, &halton_centers(&s, 50, 0), 16).unwrap();
    assert!(rep.min_ratio > 0.0);
}

#[test]
fn annulus_lower_bound_examples() {
    let u = torus_eigenpair(&torus(), [1, 0], 0.0).unwrap();
    let c = [Point(0.0, 0.0)];
    let a = annulus_lower_bound_check(&u, 1.0, &c, 32).unwrap();
    let b = annulus_lower_bound_check(&u, 1.0, &c, 64).unwrap();
    assert!((a.min_ratio - b.min_ratio).abs() < 1e-4);
    let ball = global_lower_bound_check(&u, 0.25, &c, 32).unwrap();
    assert!(a.min_ratio <= ball.min_ratio);
    let d = annulus_lower_bound_check(&u.scaled(2.0), 1.0, &c, 32).unwrap();
    assert!((a.min_ratio - d.min_ratio).abs() < 1e-12);
}

#[test]
fn elliptic_examples() {
    for k in [1i64, 3, 7] {
        // u = sin(kθ₁): V = ∇u is largest at the center
        let u = torus_eigenpair(&torus(), [k, 0], 0.0).unwrap();
        for (r, a) in [(0.2, 0.25), (0.5, 0.5)] {
            let ratio = elliptic_gradient_check(&u, Point(0.0, 0.0), r, a, 32).unwrap();
            let bound = k as f64 / (1.0 / ((1.0 - a) * r) + k as f64);
            assert!(ratio <= bound + 1e-12, "k={k}: {ratio} {bound}");
            let fine = elliptic_gradient_check(&u, Point(0.0, 0.0), r, a, 64).unwrap();
            assert!((ratio - fine).abs() < 1e-4);
        }
        let near_one = elliptic_gradient_check(&u, Point(0.0, 0.0), 0.5, 0.9999, 32).unwrap();
        assert!(near_one < 1e-3);
    }
    let u = torus_eigenpair(&torus(), [1, 0], 0.0).unwrap();
    assert!(elliptic_gradient_check(&u, Point(0.0, 0.0), 0.5, 1.0, 8).is_err());
}

#[test]
fn gradient_system_residual() {
    let u = torus_eigenpair(&torus(), [2, 1], 0.3).unwrap();
    let pts = halton_centers(&torus(), 200, 0);
    assert!(eigen_system_residual(&u, &pts).unwrap() < 1e-6);
    let bad = u.with_lambda(u.lambda() + 1.0);
    let vsup = 5f64.sqrt();
    assert!(eigen_system_residual(&bad, &pts).unwrap() >= 0.1 * vsup);
    let s = ModelSurface::sphere(1.0).unwrap();
    let z = sphere_zonal_eigenpair(&s, 2).unwrap();
    assert!(eigen_system_residual(&z, &pts).is_err());
}

#[test]
fn critical_centers_have_vanishing_gradient() {
    let u = torus_eigenpair(&torus(), [3, 2], 0.4).unwrap();
    for c in critical_centers(&u) {
        let g = u.grad(c);
        assert!(g[0].hypot(g[1]) < 1e-12);
    }
    let s = ModelSurface::sphere(1.0).unwrap();
    let z = sphere_zonal_eigenpair(&s, 6).unwrap();
    let cs = critical_centers(&z);
    assert_eq!(cs.len(), 2 + 5);
    for c in cs {
        assert!(z.grad(c)[0].abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reports_are_scale_invariant(scale in prop_oneof![-100.0..-0.01f64, 0.01..100.0f64], c1 in 0.0..6.0f64, c2 in 0.0..6.0f64, k in 1i64..6, r in 0.05..0.4f64) {
        let u = torus_eigenpair(&torus(), [k, 1], 0.0).unwrap();
        let v = u.scaled(scale);
        let c = Point(c1, c2);
        let a = doubling_indices(&u, c, r, 8).unwrap();
        let b = doubling_indices(&v, c, r, 8).unwrap();
        for i in 0..2 {
            prop_assert!((a[i].index - b[i].index).abs() < 1e-12);
            prop_assert!(a[i].index >= -1e-8);
        }
        let p = three_sphere_params();
        let t = three_sphere_check(&u, c, r, &p, 8).unwrap();
        let s = three_sphere_check(&v, c, r, &p, 8).unwrap();
        prop_assert!((t.required_c - s.required_c).abs() < 1e-12);
    }
}
