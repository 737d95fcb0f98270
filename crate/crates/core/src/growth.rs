//! Complex growth of `F = Σ|∂u/∂xᵢ|²` for closed-form eigenfunctions, the
//! derivative bound at a point, and the measure-versus-growth relation.
//!
//! Everything here works in a rescaled chart `x = c + s·y` around a chart
//! center `c`. The complex ball is the polydisc `{|yᵢ| < 1}`; on a flat torus
//! `s = 1`, on the sphere `s` shrinks so that `B(2)` stays off the poles.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fieldcalc::gradient_norms;
use crate::geomeasure::{critical_measure_in_disc, ChartGrid, LevelSchedule, MeasureEstimate};
use crate::manifolds::{ModelSurface, Point, Region};
use crate::numerics::golden_max;
use crate::spectra::{ChartField, EigenPair, Provenance};

/// Largest derivative order accepted by [`taylor_derivative_check`].
pub const MAX_TAYLOR_ORDER: usize = 12;

/// `F = (∂₁u)² + (∂₂u)²` in chart coordinates.
pub fn f_field(pair: &EigenPair, p: Point) -> f64 {
    let j = pair.jet(p);
    j.u1 * j.u1 + j.u2 * j.u2
}

fn complex_legendre(l: usize, w: Complex64) -> (Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    let (mut p0, mut p1) = (one, w);
    let (mut d0, mut d1) = (Complex64::new(0.0, 0.0), one);
    if l == 0 {
        return (p0, d0);
    }
    for n in 1..l {
        let nf = n as f64;
        let p2 = (w * p1 * (2.0 * nf + 1.0) - p0 * nf) / (nf + 1.0);
        let d2 = d0 + p1 * (2.0 * nf + 1.0);
        (p0, p1) = (p1, p2);
        (d0, d1) = (d1, d2);
    }
    (p1, d1)
}

/// Holomorphic extension of the chart gradient `(∂₁u, ∂₂u)` at complex chart coordinates.
pub fn complex_gradient(pair: &EigenPair, z: [Complex64; 2]) -> Result<[Complex64; 2]> {
    let a = pair.amplitude();
    match *pair.provenance() {
        Provenance::TorusWave { phase, .. } => {
            let w = pair.frequencies();
            let c = (z[0] * w[0] + z[1] * w[1] + phase).cos() * a;
            Ok([c * w[0], c * w[1]])
        }
        Provenance::TorusProduct { .. } => {
            let w = pair.frequencies();
            let (a1, a2) = (z[0] * w[0], z[1] * w[1]);
            Ok([
                a1.cos() * a2.sin() * (a * w[0]),
                a1.sin() * a2.cos() * (a * w[1]),
            ])
        }
        Provenance::Zonal { l } => {
            let (_, dp) = complex_legendre(l, z[0].cos());
            Ok([-z[0].sin() * dp * a, Complex64::new(0.0, 0.0)])
        }
        Provenance::Revolution { .. } => Err(Error::Unsupported(
            "numerically computed revolution modes have no closed-form continuation".into(),
        )),
    }
}

/// Holomorphic extension of `F` at complex chart coordinates.
pub fn complex_f(pair: &EigenPair, z: [Complex64; 2]) -> Result<Complex64> {
    let g = complex_gradient(pair, z)?;
    Ok(g[0] * g[0] + g[1] * g[1])
}

/// Rescaled chart `x = center + scale·y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chart {
    pub center: Point,
    pub scale: f64,
}

impl Chart {
    /// Chart around `center` in which the Euclidean ball `B(2)` avoids the
    /// coordinate singularities (and wrapping) of the surface chart.
    pub fn around(surface: &ModelSurface, center: Point) -> Result<Chart> {
        let scale = match *surface {
            ModelSurface::FlatTorus { periods } => (0.25 * periods[0].min(periods[1])).min(1.0),
            ModelSurface::Sphere { .. } => {
                let room = center.0.min(PI - center.0);
                if room <= 0.0 {
                    return Err(invalid("chart_center", "must not be a pole"));
                }
                (0.5 * room).min(1.0)
            }
            ModelSurface::Revolution(_) => {
                return Err(Error::Unsupported(
                    "no closed-form continuation on surfaces of revolution".into(),
                ))
            }
        };
        Ok(Chart { center, scale })
    }

    pub fn to_surface(&self, y: Point) -> Point {
        Point(
            self.center.0 + self.scale * y.0,
            self.center.1 + self.scale * y.1,
        )
    }

    /// `F` in the rescaled coordinates, at a real point `y`.
    pub fn f_real(&self, pair: &EigenPair, y: Point) -> f64 {
        self.scale * self.scale * f_field(pair, self.to_surface(y))
    }

    /// `|F|` in the rescaled coordinates at complex `y`.
    pub fn f_complex_abs(&self, pair: &EigenPair, y: [Complex64; 2]) -> Result<f64> {
        let z = [
            y[0] * self.scale + self.center.0,
            y[1] * self.scale + self.center.1,
        ];
        Ok(self.scale * self.scale * complex_f(pair, z)?.norm())
    }
}

fn refine_top(
    seeds: &mut Vec<(f64, [f64; 2])>,
    spans: [f64; 2],
    bounds: [Option<(f64, f64)>; 2],
    f: &dyn Fn([f64; 2]) -> f64,
) -> f64 {
    seeds.sort_by(|a, b| b.0.total_cmp(&a.0));
    seeds.truncate(4);
    let mut best = seeds.first().map_or(f64::NEG_INFINITY, |s| s.0);
    for &(_, start) in seeds.iter() {
        let mut x = start;
        let mut span = spans;
        for _ in 0..3 {
            for axis in 0..2 {
                let (mut lo, mut hi) = (x[axis] - span[axis], x[axis] + span[axis]);
                if let Some((a, b)) = bounds[axis] {
                    lo = lo.max(a);
                    hi = hi.min(b);
                }
                let (arg, val) = golden_max(lo, hi, 40, |t| {
                    let mut y = x;
                    y[axis] = t;
                    f(y)
                });
                if val >= f(x) {
                    x[axis] = arg;
                }
            }
            span = [0.5 * span[0], 0.5 * span[1]];
        }
        best = best.max(f(x));
    }
    best
}

/// Sup of `|F|` over the polydisc `{|yᵢ| ≤ radius}` of the rescaled chart,
/// taken on the distinguished boundary `yᵢ = radius·e^{iθᵢ}` (maximum
/// principle) with an `n × n` angle grid plus golden-section refinement.
pub fn complex_sup(pair: &EigenPair, chart: &Chart, radius: f64, grid_n: usize) -> Result<f64> {
    if !(radius >= 0.0) {
        return Err(invalid(
            "complex_radius",
            format!("must be nonnegative, got {radius}"),
        ));
    }
    if grid_n < 8 {
        return Err(Error::GridTooCoarse(format!(
            "need at least 8 angles per circle, got {grid_n}"
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    chart.f_complex_abs(pair, [zero, zero])?;
    let at = |th: [f64; 2]| -> f64 {
        let y = [
            Complex64::from_polar(radius, th[0]),
            Complex64::from_polar(radius, th[1]),
        ];
        chart.f_complex_abs(pair, y).unwrap_or(f64::NAN)
    };
    if radius == 0.0 {
        return Ok(at([0.0, 0.0]));
    }
    let h = 2.0 * PI / grid_n as f64;
    let mut seeds = Vec::with_capacity(grid_n * grid_n);
    for i in 0..grid_n {
        for j in 0..grid_n {
            let th = [i as f64 * h, j as f64 * h];
            seeds.push((at(th), th));
        }
    }
    Ok(refine_top(&mut seeds, [h, h], [None, None], &at))
}

/// Sup of `F` over the real chart ball `|y| ≤ radius`.
pub fn real_ball_sup(pair: &EigenPair, chart: &Chart, radius: f64, grid_n: usize) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(invalid("radius", format!("must be positive, got {radius}")));
    }
    if grid_n < 8 {
        return Err(Error::GridTooCoarse(format!(
            "need at least 8 radial nodes, got {grid_n}"
        )));
    }
    let at = |rb: [f64; 2]| chart.f_real(pair, Point(rb[0] * rb[1].cos(), rb[0] * rb[1].sin()));
    let (hr, hb) = (radius / grid_n as f64, 2.0 * PI / (4 * grid_n) as f64);
    let mut seeds = Vec::new();
    for i in 0..=grid_n {
        for j in 0..4 * grid_n {
            let rb = [i as f64 * hr, j as f64 * hb];
            seeds.push((at(rb), rb));
        }
    }
    Ok(refine_top(
        &mut seeds,
        [hr, hb],
        [Some((0.0, radius)), None],
        &at,
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub lambda: f64,
    pub chart: Chart,
    pub sup_complex: f64,
    pub sup_real_half: f64,
    /// `ln(sup_complex / sup_real_half)`.
    pub alpha_growth: f64,
}

pub fn growth_exponent(
    pair: &EigenPair,
    chart_center: Point,
    grid_n: usize,
) -> Result<GrowthReport> {
    let chart = Chart::around(pair.surface(), chart_center)?;
    let sup_complex = complex_sup(pair, &chart, 1.0, grid_n)?;
    let sup_real_half = real_ball_sup(pair, &chart, 0.5, grid_n)?;
    if sup_real_half < 1e-14 {
        return Err(Error::TrivialNorm {
            what: "F on the real half ball".into(),
            value: sup_real_half,
        });
    }
    Ok(GrowthReport {
        lambda: pair.lambda(),
        chart,
        sup_complex,
        sup_real_half,
        alpha_growth: (sup_complex / sup_real_half).ln(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DfRow {
    pub growth: GrowthReport,
    /// Critical set measure inside the chart ball `|y| ≤ 1/4`.
    pub measure: MeasureEstimate,
    /// `measure / alpha_growth`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DfReport {
    pub rows: Vec<DfRow>,
    pub max_ratio: f64,
}

/// Settings for the critical-set measurement in the quarter ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DfSettings {
    pub complex_grid: usize,
    /// Cells per axis of the window grid around the quarter ball.
    pub window_cells: usize,
    pub schedule: LevelSchedule,
}

impl Default for DfSettings {
    fn default() -> Self {
        DfSettings {
            complex_grid: 64,
            window_cells: 1024,
            schedule: LevelSchedule::default(),
        }
    }
}

/// Critical set measure of `u` inside the rescaled chart ball `|y| ≤ 1/4`,
/// measured with the chart's Euclidean length.
pub fn quarter_ball_measure(
    pair: &EigenPair,
    chart: &Chart,
    settings: &DfSettings,
) -> Result<MeasureEstimate> {
    let w = 0.3;
    let grid = ChartGrid::window(
        Point(-w, -w),
        Point(w, w),
        settings.window_cells,
        settings.window_cells,
    )?;
    let g = |y: Point| chart.f_real(pair, y).sqrt();
    critical_measure_in_disc(&g, &grid, settings.schedule, Point(0.0, 0.0), 0.25)
}

pub fn df_relation_check(
    family: &[EigenPair],
    chart_center: Point,
    settings: &DfSettings,
) -> Result<DfReport> {
    if family.is_empty() {
        return Err(invalid("family", "empty"));
    }
    let mut rows = Vec::with_capacity(family.len());
    for pair in family {
        let growth = growth_exponent(pair, chart_center, settings.complex_grid)?;
        let measure = quarter_ball_measure(pair, &growth.chart, settings)?;
        let ratio = if growth.alpha_growth > 0.0 {
            measure.extrapolated / growth.alpha_growth
        } else if measure.extrapolated == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        rows.push(DfRow {
            growth,
            measure,
            ratio,
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(DfReport { rows, max_ratio })
}

/// Truncated power series in one variable, `Σ cₙ tⁿ`.
#[derive(Clone, Copy)]
struct Series([f64; MAX_TAYLOR_ORDER + 1]);

impl Series {
    fn constant(c: f64) -> Self {
        let mut s = [0.0; MAX_TAYLOR_ORDER + 1];
        s[0] = c;
        Series(s)
    }

    fn mul(&self, o: &Series) -> Series {
        let mut s = [0.0; MAX_TAYLOR_ORDER + 1];
        for i in 0..=MAX_TAYLOR_ORDER {
            for j in 0..=MAX_TAYLOR_ORDER - i {
                s[i + j] += self.0[i] * o.0[j];
            }
        }
        Series(s)
    }

    fn lin(&self, a: f64, o: &Series, b: f64) -> Series {
        Series(std::array::from_fn(|i| a * self.0[i] + b * o.0[i]))
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Chart partial derivatives `∂^β u(center)` for every `|β| ≤ max_order`,
/// indexed as `d[β₁][β₂]`.
pub fn chart_derivatives(
    pair: &EigenPair,
    center: Point,
    max_order: usize,
) -> Result<Vec<Vec<f64>>> {
    if max_order > MAX_TAYLOR_ORDER {
        return Err(invalid(
            "max_order",
            format!("at most {MAX_TAYLOR_ORDER}, got {max_order}"),
        ));
    }
    let a = pair.amplitude();
    let mut d = vec![vec![0.0; max_order + 1]; max_order + 1];
    match *pair.provenance() {
        Provenance::TorusWave { phase, .. } => {
            let w = pair.frequencies();
            let arg = w[0] * center.0 + w[1] * center.1 + phase;
            for b1 in 0..=max_order {
                for b2 in 0..=max_order - b1 {
                    let n = (b1 + b2) as f64;
                    d[b1][b2] = a
                        * w[0].powi(b1 as i32)
                        * w[1].powi(b2 as i32)
                        * (arg + n * PI / 2.0).sin();
                }
            }
        }
        Provenance::TorusProduct { .. } => {
            let w = pair.frequencies();
            for b1 in 0..=max_order {
                for b2 in 0..=max_order - b1 {
                    let f1 = w[0].powi(b1 as i32) * (w[0] * center.0 + b1 as f64 * PI / 2.0).sin();
                    let f2 = w[1].powi(b2 as i32) * (w[1] * center.1 + b2 as f64 * PI / 2.0).sin();
                    d[b1][b2] = a * f1 * f2;
                }
            }
        }
        Provenance::Zonal { l } => {
            // cos(θc + t) as a series, then P_l by the three-term recurrence
            let w = Series(std::array::from_fn(|n| {
                (center.0 + n as f64 * PI / 2.0).cos() / factorial(n)
            }));
            let (mut p0, mut p1) = (Series::constant(1.0), w);
            let p = if l == 0 {
                p0
            } else {
                for n in 1..l {
                    let nf = n as f64;
                    let p2 = w
                        .mul(&p1)
                        .lin((2.0 * nf + 1.0) / (nf + 1.0), &p0, -nf / (nf + 1.0));
                    (p0, p1) = (p1, p2);
                }
                p1
            };
            for (b1, row) in d.iter_mut().enumerate() {
                row[0] = a * p.0[b1] * factorial(b1);
            }
        }
        Provenance::Revolution { .. } => {
            return Err(Error::Unsupported(
                "symbolic derivatives need a closed-form pair".into(),
            ));
        }
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaylorReport {
    /// Smallest `C` with `|∂^β u(0)| ≤ β! C^{|β|} √λ^{|β|} G` for `1 ≤ |β| ≤ max_order`.
    pub min_c: f64,
    /// Multi-index attaining `min_c`.
    pub worst: [usize; 2],
    /// `G = sup |∇u|` over the geodesic ball of radius `1/√λ`.
    pub gradient_sup: f64,
}

pub fn taylor_derivative_check(
    pair: &EigenPair,
    center: Point,
    max_order: usize,
    order: usize,
) -> Result<TaylorReport> {
    if max_order == 0 {
        return Err(invalid("max_order", "derivatives start at order 1"));
    }
    let d = chart_derivatives(pair, center, max_order)?;
    let sl = pair.lambda().sqrt();
    let g = gradient_norms(pair, &Region::ball(center, 1.0 / sl), order)?.sup;
    if g < 1e-14 {
        return Err(Error::TrivialNorm {
            what: "gradient on the shrunk ball".into(),
            value: g,
        });
    }
    let mut min_c = 0.0;
    let mut worst = [0, 0];
    for b1 in 0..=max_order {
        for b2 in 0..=max_order - b1 {
            let n = b1 + b2;
            if n == 0 {
                continue;
            }
            let c = (d[b1][b2].abs() / (factorial(b1) * factorial(b2) * sl.powi(n as i32) * g))
                .powf(1.0 / n as f64);
            if c > min_c {
                min_c = c;
                worst = [b1, b2];
            }
        }
    }
    Ok(TaylorReport {
        min_c,
        worst,
        gradient_sup: g,
    })
}
