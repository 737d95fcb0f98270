use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specgeo_core::carleman::{
    calibrate_carleman_constant, carleman_sides, check_weight_admissibility, log_spaced,
    random_annulus_samples, tau_exponent_probe, vector_carleman_sides, Potential, SampleRanges,
    SampledTestFunction, TestFunction, WeightParams,
};
use specgeo_core::{Error, ModelSurface, Point, Region};

fn harness() -> WeightParams {
    WeightParams::new(0.5, -2.0).unwrap()
}

fn torus() -> ModelSurface {
    ModelSurface::standard_torus()
}

#[test]
fn weight_examples() {
    let p = harness();
    let w = p.at_t(-4.0);
    assert!((w.f - (-4.0 - (-2f64).exp())).abs() < 1e-15);
    assert!((w.f - (-4.135_335_283_236_613)).abs() < 1e-12);
    let w = p.at_r((-4f64).exp()).unwrap();
    assert!((w.phi - 4.135_335_283_236_613).abs() < 1e-12);
    let w = p.at_t(-4.0);
    assert!((w.f1 - 0.932_332_358_381_693_6).abs() < 1e-12);
    let lower = 1.0 - 0.5 * (-1f64).exp();
    assert!(w.f1 >= lower && w.f1 <= 1.0);
    assert!(p.at_r(0.0).is_err());
    assert!(WeightParams::new(1.0, -1.0).is_err());
    assert!(WeightParams::new(0.5, 0.3).is_err());
}

#[test]
fn admissibility_examples() {
    let grid: Vec<f64> = (0..=580).map(|i| -60.0 + i as f64 * 0.1).collect();
    let rep = check_weight_admissibility(&harness(), &grid).unwrap();
    assert!(rep.fprime_bounds && rep.divergence);
    assert!((rep.divergence_left - 0.25 * 30f64.exp()).abs() / rep.divergence_left < 1e-12);
    let p = WeightParams::new(0.99, -1.0).unwrap();
    let grid: Vec<f64> = (0..200).map(|i| -60.0 + i as f64 * 59.0 / 199.0).collect();
    let rep = check_weight_admissibility(&p, &grid).unwrap();
    assert!(rep.fprime_bounds && rep.divergence);
    assert!((1.0 - 0.99 * (-0.99f64).exp() - 0.6321).abs() < 1e-4);
    let mut bad = grid.clone();
    bad.push(-0.5);
    assert!(check_weight_admissibility(&p, &bad).is_err());
    assert!(check_weight_admissibility(&p, &grid[..50]).is_err());
}

#[test]
fn test_function_support_and_determinism() {
    let s = torus();
    let c = Point(1.0, 1.0);
    let u = TestFunction::new(&s, 42, &Region::annulus(c, 0.03, 0.1), 2, 3).unwrap();
    let v = TestFunction::new(&s, 42, &Region::annulus(c, 0.03, 0.1), 2, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let p = Point(rng.gen_range(0.8..1.2), rng.gen_range(0.8..1.2));
        assert_eq!(u.value(p), v.value(p));
        let r = s.geodesic_distance(c, p);
        if r <= 0.03 || r >= 0.1 {
            assert_eq!(u.value(p), 0.0);
        }
    }
    assert_eq!(u.value(Point(2.0, 2.0)), 0.0);
    assert_eq!(u.value(c), 0.0);
}

/// Fourth-order five-point finite-difference Laplace–Beltrami in the chart.
fn fd_laplacian(s: &ModelSurface, f: &dyn Fn(Point) -> f64, p: Point, h: f64) -> f64 {
    let d = |g: &dyn Fn(f64) -> f64, x: f64| {
        let (a, b, c, d, e) = (g(x - 2.0 * h), g(x - h), g(x), g(x + h), g(x + 2.0 * h));
        (
            (a - 8.0 * b + 8.0 * d - e) / (12.0 * h),
            (-a + 16.0 * b - 30.0 * c + 16.0 * d - e) / (12.0 * h * h),
        )
    };
    let (a, b, db) = s.metric(p);
    let (u1, u11) = d(&|x| f(Point(x, p.1)), p.0);
    let (_, u22) = d(&|y| f(Point(p.0, y)), p.1);
    u11 / (a * a) + db / (a * a * b) * u1 + u22 / (b * b)
}

#[test]
fn test_function_laplacian_matches_finite_differences() {
    for s in [torus(), ModelSurface::sphere(1.0).unwrap()] {
        let c = Point(1.0, 0.5);
        let u = TestFunction::new(&s, 9, &Region::annulus(c, 0.04, 0.12), 3, 2).unwrap();
        let scale = (0..200)
            .map(|i| {
                u.laplacian(s.exp_map(c, 0.04 + 0.08 * i as f64 / 200.0, 0.3))
                    .abs()
            })
            .fold(0.0, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let p = s.exp_map(c, rng.gen_range(0.05..0.11), rng.gen_range(0.0..2.0 * PI));
            let fd = fd_laplacian(&s, &|q| u.value(q), p, 2e-4);
            assert!(
                (fd - u.laplacian(p)).abs() < 1e-6 * scale,
                "{fd} {} {scale}",
                u.laplacian(p)
            );
        }
    }
}

#[test]
fn annulus_support_must_avoid_the_center() {
    let s = torus();
    let e = TestFunction::new(&s, 1, &Region::annulus(Point(0.0, 0.0), 0.0, 0.1), 0, 1);
    assert!(e.is_err());
    let ball = TestFunction::new(&s, 1, &Region::ball(Point(0.0, 0.0), 0.1), 0, 1).unwrap();
    assert!(ball.delta().is_none());
}

#[test]
fn zero_function_is_degenerate() {
    let u = TestFunction::new(
        &torus(),
        3,
        &Region::annulus(Point(1.0, 1.0), 0.03, 0.1),
        1,
        2,
    )
    .unwrap();
    let e = carleman_sides(
        &u.scaled(0.0),
        &Potential::Constant(25.0),
        40.0,
        &harness(),
        16,
    );
    assert_eq!(e.unwrap_err(), Error::DegenerateTestFunction);
}

#[test]
fn sides_are_one_homogeneous() {
    let u = TestFunction::new(
        &torus(),
        3,
        &Region::annulus(Point(1.0, 1.0), 0.03, 0.1),
        1,
        2,
    )
    .unwrap();
    let pot = Potential::Constant(25.0);
    let a = carleman_sides(&u, &pot, 40.0, &harness(), 16).unwrap();
    let b = carleman_sides(&u.scaled(2.0), &pot, 40.0, &harness(), 16).unwrap();
    let ln2 = 2f64.ln();
    assert!((b.log_lhs - a.log_lhs - ln2).abs() < 1e-12);
    assert!((b.log_u_term - a.log_u_term - ln2).abs() < 1e-12);
    assert!((b.log_grad_term - a.log_grad_term - ln2).abs() < 1e-12);
    assert!((b.log_delta_term.unwrap() - a.log_delta_term.unwrap() - ln2).abs() < 1e-12);
    assert!((b.lhs() / a.lhs() - 2.0).abs() < 1e-12);
}

/// Direct linear-space recomputation on a fine uniform polar grid (midpoint rule
/// in r and β), rescaled by the weight at the inner edge to stay in range.
fn brute_force_ratio(u: &TestFunction, lambda: f64, tau: f64, params: &WeightParams) -> f64 {
    let s = *u.surface();
    let (ra, rb) = u.support();
    let delta = u.delta().unwrap();
    let eps = params.epsilon();
    let (nr, nb) = (40_000, 64);
    let hr = (rb - ra) / nr as f64;
    let hb = 2.0 * PI / nb as f64;
    let shift = tau * params.phi(ra);
    let (mut lhs, mut t1, mut t2, mut t3) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..nr {
        let r = ra + (i as f64 + 0.5) * hr;
        let ew = (tau * params.phi(r) - shift).exp();
        for j in 0..nb {
            let b = j as f64 * hb;
            let p = s.exp_map(u.center(), r, b);
            let val = u.value(p);
            let jac = r;
            let w = hr * hb * jac;
            lhs += w * (r * r * ew * (u.laplacian(p) + lambda * val)).powi(2);
            t1 += w * (r.powf(eps / 2.0) * ew * val).powi(2);
            t2 += w * (r.powf(1.0 + eps / 2.0) * ew * u.grad_norm(p)).powi(2);
            t3 += w * (ew * val / r).powi(2);
        }
    }
    (tau.powf(1.5) * t1.sqrt() + tau.sqrt() * t2.sqrt() + tau * delta * t3.sqrt()) / lhs.sqrt()
}

#[test]
fn ratio_matches_brute_force_quadrature() {
    let u = TestFunction::new(
        &torus(),
        17,
        &Region::annulus(Point(1.0, 1.0), 0.04, 0.11),
        2,
        2,
    )
    .unwrap();
    let sides = carleman_sides(&u, &Potential::Constant(25.0), 40.0, &harness(), 32).unwrap();
    let brute = brute_force_ratio(&u, 25.0, 40.0, &harness());
    assert!(
        (sides.ratio() - brute).abs() / brute < 1e-4,
        "{} {brute}",
        sides.ratio()
    );
}

#[test]
fn vector_sides_combine_components() {
    let c = Point(1.0, 1.0);
    let u = TestFunction::new(&torus(), 5, &Region::annulus(c, 0.03, 0.1), 1, 2).unwrap();
    let v = TestFunction::new(&torus(), 6, &Region::annulus(c, 0.05, 0.12), 2, 1).unwrap();
    let p = harness();
    let scalar = carleman_sides(&u, &Potential::Constant(25.0), 40.0, &p, 16).unwrap();
    let with_zero = vector_carleman_sides(&[u.clone(), u.scaled(0.0)], 25.0, 40.0, &p, 16).unwrap();
    assert!((with_zero.log_lhs - scalar.log_lhs).abs() < 1e-12);
    assert!((with_zero.log_u_term - scalar.log_u_term).abs() < 1e-12);
    let doubled = vector_carleman_sides(&[u.clone(), u.clone()], 25.0, 40.0, &p, 16).unwrap();
    let half_ln2 = 0.5 * 2f64.ln();
    assert!((doubled.log_lhs - scalar.log_lhs - half_ln2).abs() < 1e-12);
    assert!((doubled.log_grad_term - scalar.log_grad_term - half_ln2).abs() < 1e-12);
    let pair = vector_carleman_sides(&[u.clone(), v.clone()], 25.0, 40.0, &p, 16).unwrap();
    let sv = carleman_sides(&v, &Potential::Constant(25.0), 40.0, &p, 16).unwrap();
    let recombined = (scalar.lhs().powi(2) + sv.lhs().powi(2)).sqrt();
    assert!((pair.lhs() - recombined).abs() / recombined < 1e-10);
}

#[test]
fn calibration_singleton_and_monotone() {
    let s = torus();
    let p = harness();
    let fns = random_annulus_samples(&s, Point(1.0, 1.0), 3, 7, &SampleRanges::default()).unwrap();
    let sampled: Vec<SampledTestFunction> = fns
        .iter()
        .map(|u| SampledTestFunction::new(u, &p, 12).unwrap())
        .collect();
    let pot = [Potential::Constant(25.0)];
    let one = calibrate_carleman_constant(&sampled[..1], &pot, &[vec![40.0]], &s).unwrap();
    let direct = sampled[0].sides(&pot[0], 40.0).unwrap().ratio();
    assert_eq!(one.c_star, direct);
    let two = calibrate_carleman_constant(&sampled[..2], &pot, &[vec![40.0]], &s).unwrap();
    let three = calibrate_carleman_constant(&sampled, &pot, &[vec![40.0]], &s).unwrap();
    assert!(two.c_star >= one.c_star && three.c_star >= two.c_star);
    assert!(three.failures.is_empty());
    assert!(calibrate_carleman_constant(&[], &pot, &[vec![40.0]], &s).is_err());
}

#[test]
fn tau_probe_slope_is_moderate() {
    let s = torus();
    let p = harness();
    let u = TestFunction::new(&s, 21, &Region::annulus(Point(1.0, 1.0), 0.04, 0.12), 1, 2).unwrap();
    let sampled = SampledTestFunction::new(&u, &p, 32).unwrap();
    let pot = Potential::Constant(25.0);
    let tmin = pot.tau_min(&s);
    let slope = tau_exponent_probe(&sampled, &pot, &log_spaced(tmin, 10.0 * tmin, 20)).unwrap();
    assert!(slope <= 1.6, "{slope}");
}
