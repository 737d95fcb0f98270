use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::manifolds::{ModelSurface, Point, Region};

/// Compactly supported smooth test function in geodesic polar coordinates
/// `(r, β)` about a center:
///
/// `u = A · e^{q(r)} · p(x) · (a cos mβ + c sin mβ)`, `x = (r − r_a)/(r_b − r_a)`,
///
/// with `q(r) = −w/(r − r_a) − w/(r_b − r) + 4`, `w = r_b − r_a`, on
/// `r_a < r < r_b` and `u = 0` elsewhere. For a ball support `r_a = 0`, so the
/// function still vanishes near the center.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    surface: ModelSurface,
    center: Point,
    inner: f64,
    outer: f64,
    annulus: bool,
    m: u32,
    poly: Vec<f64>,
    trig: (f64, f64),
    amplitude: f64,
    seed: u64,
}

/// Factored evaluation: the value is `e^{log_scale} · rest`. Keeping the bump
/// in log form lets weighted norms be summed without underflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogEval {
    pub log_scale: f64,
    pub u: f64,
    /// Orthonormal polar components `(∂_r u, r-frame angular derivative)`.
    pub grad: [f64; 2],
    pub lap: f64,
}

/// Polar density `J(r)` of the volume element and `J'(r)`.
pub(crate) fn polar_density(surface: &ModelSurface, r: f64) -> Result<(f64, f64)> {
    match *surface {
        ModelSurface::FlatTorus { .. } => Ok((r, 1.0)),
        ModelSurface::Sphere { radius } => Ok((radius * (r / radius).sin(), (r / radius).cos())),
        ModelSurface::Revolution(_) => Err(Error::Unsupported(
            "closed-form test functions need a torus or a sphere".into(),
        )),
    }
}

impl TestFunction {
    /// Seeded random test function with support in `support`, angular mode `m`
    /// and radial polynomial degree `d`.
    pub fn new(
        surface: &ModelSurface,
        seed: u64,
        support: &Region,
        m: u32,
        degree: usize,
    ) -> Result<Self> {
        polar_density(surface, 0.1)?;
        surface.check_region(support)?;
        let (center, inner, outer, annulus) = match *support {
            Region::Ball { center, radius } => (center, 0.0, radius, false),
            Region::Annulus {
                center,
                inner,
                outer,
            } => (center, inner, outer, true),
            Region::Whole => {
                return Err(invalid(
                    "support",
                    "test functions need a ball or annulus support",
                ))
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut poly: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // keep the polynomial away from the zero function
        poly[0] += if poly[0] >= 0.0 { 0.5 } else { -0.5 };
        let gamma: f64 = rng.gen_range(0.0..2.0 * PI);
        let trig = if m == 0 {
            (1.0, 0.0)
        } else {
            (gamma.cos(), gamma.sin())
        };
        Ok(TestFunction {
            surface: *surface,
            center: surface.normalize(center),
            inner,
            outer,
            annulus,
            m,
            poly,
            trig,
            amplitude: 1.0,
            seed,
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        TestFunction {
            amplitude: self.amplitude * c,
            ..self.clone()
        }
    }

    pub fn surface(&self) -> &ModelSurface {
        &self.surface
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Support radii `(r_a, r_b)`.
    pub fn support(&self) -> (f64, f64) {
        (self.inner, self.outer)
    }

    /// Inner radius `δ` when the support is an annulus.
    pub fn delta(&self) -> Option<f64> {
        self.annulus.then_some(self.inner)
    }

    pub fn angular_mode(&self) -> u32 {
        self.m
    }

    fn poly_eval(&self, x: f64) -> (f64, f64, f64) {
        let (mut p, mut p1, mut p2) = (0.0, 0.0, 0.0);
        for c in self.poly.iter().rev() {
            p2 = p2 * x + 2.0 * p1;
            p1 = p1 * x + p;
            p = p * x + c;
        }
        (p, p1, p2)
    }

    /// Evaluation in polar coordinates, without the amplitude. `None` outside
    /// the open support.
    pub fn eval_polar_unit(&self, r: f64, beta: f64) -> Option<LogEval> {
        if !(r > self.inner && r < self.outer) {
            return None;
        }
        let w = self.outer - self.inner;
        let (ra, rb) = (r - self.inner, self.outer - r);
        let q = -w / ra - w / rb + 4.0;
        let q1 = w / (ra * ra) - w / (rb * rb);
        let q2 = -2.0 * w / (ra * ra * ra) - 2.0 * w / (rb * rb * rb);
        let (p, px, pxx) = self.poly_eval(ra / w);
        let p1 = px / w;
        let p2 = pxx / (w * w);
        // radial factor G = e^q g with g, g', g''
        let g = p;
        let g1 = q1 * p + p1;
        let g2 = (q2 + q1 * q1) * p + 2.0 * q1 * p1 + p2;
        let mf = self.m as f64;
        let (s, c) = (mf * beta).sin_cos();
        let th = self.trig.0 * c + self.trig.1 * s;
        let th1 = mf * (-self.trig.0 * s + self.trig.1 * c);
        let (j, j1) = polar_density(&self.surface, r).expect("checked at construction");
        Some(LogEval {
            log_scale: q,
            u: g * th,
            grad: [g1 * th, g * th1 / j],
            lap: (g2 + j1 / j * g1) * th - mf * mf * g * th / (j * j),
        })
    }

    /// `u` at a chart point (zero outside the support).
    pub fn value(&self, p: Point) -> f64 {
        let (r, beta) = self
            .surface
            .polar_coords(self.center, p)
            .expect("torus or sphere");
        match self.eval_polar_unit(r, beta) {
            Some(e) => self.amplitude * e.log_scale.exp() * e.u,
            None => 0.0,
        }
    }

    /// `Δu` at a chart point from the closed form.
    pub fn laplacian(&self, p: Point) -> f64 {
        let (r, beta) = self
            .surface
            .polar_coords(self.center, p)
            .expect("torus or sphere");
        match self.eval_polar_unit(r, beta) {
            Some(e) => self.amplitude * e.log_scale.exp() * e.lap,
            None => 0.0,
        }
    }

    /// `|∇u|` at a chart point from the closed form.
    pub fn grad_norm(&self, p: Point) -> f64 {
        let (r, beta) = self
            .surface
            .polar_coords(self.center, p)
            .expect("torus or sphere");
        match self.eval_polar_unit(r, beta) {
            Some(e) => self.amplitude.abs() * e.log_scale.exp() * e.grad[0].hypot(e.grad[1]),
            None => 0.0,
        }
    }
}
