use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specgeo_core::spectra::{
    eigen_residual, legendre, revolution_eigenpair, sphere_zonal_eigenpair, torus_eigenpair,
    torus_product_eigenpair, SturmLiouvilleSpec,
};
use specgeo_core::{ChartField, Error, ModelSurface, Point, Profile};

fn torus() -> ModelSurface {
    ModelSurface::standard_torus()
}

/// Independent second-order finite-difference Laplacian with step `h`.
fn fd2_laplacian(s: &ModelSurface, f: &dyn Fn(Point) -> f64, p: Point, h: f64) -> f64 {
    let (a, b, db) = s.metric(p);
    let u = f(p);
    let up = f(Point(p.0 + h, p.1));
    let um = f(Point(p.0 - h, p.1));
    let vp = f(Point(p.0, p.1 + h));
    let vm = f(Point(p.0, p.1 - h));
    (up - 2.0 * u + um) / (h * h * a * a)
        + db / (a * a * b) * (up - um) / (2.0 * h)
        + (vp - 2.0 * u + vm) / (h * h * b * b)
}

#[test]
fn torus_example_values() {
    let p = torus_eigenpair(&torus(), [3, 0], 0.0).unwrap();
    assert!((p.lambda() - 9.0).abs() < 1e-12);
    assert!((p.value(Point(PI / 6.0, 1.234)) - 1.0).abs() < 1e-15);
    let p = torus_eigenpair(&torus(), [0, 1], 0.0).unwrap();
    assert!((p.lambda() - 1.0).abs() < 1e-12);
    let g = p.grad(Point(0.0, 0.0));
    assert_eq!(g, [0.0, 1.0]);
    assert_eq!(
        torus_eigenpair(&torus(), [0, 0], 0.0).unwrap_err(),
        Error::ZeroFrequency
    );
}

#[test]
fn torus_residual_on_random_points() {
    let p = torus_eigenpair(&torus(), [2, 1], 0.3).unwrap();
    assert!((p.lambda() - 5.0).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let q = Point(rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
        // Richardson-combined second-order differences: O(h⁴) oracle
        let f = |x: Point| p.value(x);
        let l1 = fd2_laplacian(&torus(), &f, q, 2e-3);
        let l2 = fd2_laplacian(&torus(), &f, q, 1e-3);
        let lap = (4.0 * l2 - l1) / 3.0;
        worst = worst.max((lap + p.lambda() * p.value(q)).abs());
        // analytic Laplacian from the jet must be exact
        assert!((p.laplacian(q) + p.lambda() * p.value(q)).abs() < 1e-12);
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn zonal_examples() {
    let s = ModelSurface::sphere(1.0).unwrap();
    let p1 = sphere_zonal_eigenpair(&s, 1).unwrap();
    assert_eq!(p1.lambda(), 2.0);
    assert!((p1.value(Point(0.7, 0.0)) - 0.7f64.cos()).abs() < 1e-15);
    let p2 = sphere_zonal_eigenpair(&s, 2).unwrap();
    assert_eq!(p2.lambda(), 6.0);
    let g = p2.grad(Point(PI / 2.0, 1.0));
    assert!(g[0].abs() < 1e-15 && g[1] == 0.0);
    let t = 0.4f64;
    assert!((p2.grad(Point(t, 0.0))[0] + 3.0 * t.cos() * t.sin()).abs() < 1e-14);
    assert!(matches!(
        sphere_zonal_eigenpair(&s, 0),
        Err(Error::ConstantMode(_))
    ));
}

#[test]
fn zonal_critical_latitudes_by_sign_changes() {
    // oracle: sign changes of a centered difference of P_l(cos θ) on a fine grid
    let l = 10;
    let n = 200_000;
    let f = |t: f64| legendre::legendre(l, t.cos()).0;
    let h = PI / n as f64;
    let mut count = 0;
    let mut prev = f(2.0 * h) - f(0.0);
    for i in 2..n {
        let d = f((i + 1) as f64 * h) - f((i - 1) as f64 * h);
        if d * prev < 0.0 {
            count += 1;
        }
        if d != 0.0 {
            prev = d;
        }
    }
    assert_eq!(count, 9, "sign changes");
    assert_eq!(legendre::critical_colatitudes(l).len(), 9);
}

#[test]
fn eigen_residual_examples() {
    let t = torus_eigenpair(&torus(), [1, 0], 0.0).unwrap();
    assert!(eigen_residual(&t, 16).unwrap() < 1e-8);
    let s = ModelSurface::sphere(1.0).unwrap();
    let z = sphere_zonal_eigenpair(&s, 3).unwrap();
    assert!(eigen_residual(&z, 16).unwrap() < 1e-6);
    let bad = z.with_lambda(z.lambda() + 1.0);
    assert!(eigen_residual(&bad, 16).unwrap() >= 0.1);
    let tp = torus_product_eigenpair(&torus(), [3, 2]).unwrap();
    assert!(eigen_residual(&tp, 16).unwrap() < 1e-8);
}

#[test]
fn revolution_sphere_profile_recovers_sphere_spectrum() {
    let profile = Profile::sine(1.0).unwrap();
    let spec = SturmLiouvilleSpec::new(profile, 0, 512).unwrap();
    let p1 = revolution_eigenpair(&spec, 1).unwrap();
    assert!((p1.lambda() - 2.0).abs() / 2.0 < 1e-3, "{}", p1.lambda());
    let p2 = revolution_eigenpair(&spec, 2).unwrap();
    assert!((p2.lambda() - 6.0).abs() / 6.0 < 1e-3, "{}", p2.lambda());
    // m = 0 modes have no φ dependence
    let g = p2.grad(Point(1.0, 2.0));
    assert_eq!(g[1], 0.0);
    // the radial factor is P_2 up to normalization
    for s in [0.3f64, 1.0, 2.2] {
        let expect = (3.0 * s.cos().powi(2) - 1.0) / 2.0;
        assert!((p2.value(Point(s, 0.0)) - expect).abs() < 1e-4, "{s}");
    }
}

#[test]
fn revolution_eigenvalues_converge_at_second_order() {
    let profile = Profile::sine(1.0).unwrap();
    for (m, j, exact) in [(0u32, 1usize, 2.0), (0, 3, 12.0), (1, 1, 2.0), (2, 2, 12.0)] {
        let err = |n: usize| {
            (SturmLiouvilleSpec::new(profile, m, n)
                .unwrap()
                .eigenvalue(j)
                .unwrap()
                - exact)
                .abs()
        };
        let (e1, e2, e3) = (err(128), err(256), err(512));
        let o1 = (e1 / e2).log2();
        let o2 = (e2 / e3).log2();
        assert!(
            (1.8..=2.2).contains(&o1) && (1.8..=2.2).contains(&o2),
            "m={m} j={j}: {o1} {o2}"
        );
    }
}

#[test]
fn revolution_residual_within_discretization_tolerance() {
    for profile in [
        Profile::sine(1.0).unwrap(),
        Profile::perturbed(1.0, 0.2).unwrap(),
    ] {
        for (m, j) in [(0u32, 1usize), (0, 4), (1, 2), (3, 1)] {
            let spec = SturmLiouvilleSpec::new(profile, m, 2048).unwrap();
            let pair = revolution_eigenpair(&spec, j).unwrap();
            let res = eigen_residual(&pair, 24).unwrap();
            assert!(
                res <= 1e-4 * pair.lambda(),
                "{profile:?} m={m} j={j}: {res} λ={}",
                pair.lambda()
            );
        }
    }
}

#[test]
fn gradients_and_hessians_match_finite_differences() {
    let s = ModelSurface::sphere(1.3).unwrap();
    let rev = Profile::perturbed(1.0, 0.2).unwrap();
    let pairs = vec![
        torus_eigenpair(&torus(), [2, 3], 0.4).unwrap(),
        torus_product_eigenpair(&torus(), [4, 1]).unwrap(),
        sphere_zonal_eigenpair(&s, 7).unwrap(),
        revolution_eigenpair(&SturmLiouvilleSpec::new(rev, 2, 1024).unwrap(), 2).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-5;
    for pair in &pairs {
        let surf = *pair.surface();
        let ext = surf.chart_extent();
        let lam = pair.lambda();
        for _ in 0..1000 {
            let p = Point(
                rng.gen_range(0.05..ext[0] - 0.05),
                rng.gen_range(0.0..ext[1]),
            );
            let (a, b, _) = surf.metric(p);
            let g = pair.grad(p);
            let d1 =
                (pair.value(Point(p.0 + h, p.1)) - pair.value(Point(p.0 - h, p.1))) / (2.0 * h) / a;
            let d2 =
                (pair.value(Point(p.0, p.1 + h)) - pair.value(Point(p.0, p.1 - h))) / (2.0 * h) / b;
            let tol = 1e-6 * (1.0 + lam.sqrt());
            assert!(
                (g[0] - d1).abs() < tol && (g[1] - d2).abs() < tol,
                "{:?} {p:?}",
                pair.provenance()
            );
            // chart Hessian: differences of chart partials
            let j = pair.jet(p);
            let jp = pair.jet(Point(p.0 + h, p.1));
            let jm = pair.jet(Point(p.0 - h, p.1));
            let kp = pair.jet(Point(p.0, p.1 + h));
            let km = pair.jet(Point(p.0, p.1 - h));
            let tol2 = 1e-6 * (1.0 + lam);
            assert!((j.u11 - (jp.u1 - jm.u1) / (2.0 * h)).abs() < tol2);
            assert!((j.u12 - (kp.u1 - km.u1) / (2.0 * h)).abs() < tol2);
            assert!((j.u22 - (kp.u2 - km.u2) / (2.0 * h)).abs() < tol2);
            // trace of the covariant Hessian is the Laplacian: −λu for eigenfunctions
            let hs = pair.hess(p);
            assert!(
                (hs[0][0] + hs[1][1] + lam * pair.value(p)).abs() < 1e-3 * (1.0 + lam),
                "{:?}",
                pair.provenance()
            );
        }
    }
}
