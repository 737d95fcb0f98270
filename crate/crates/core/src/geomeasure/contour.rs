use std::collections::HashMap;
use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::manifolds::{ModelSurface, Point};
use crate::numerics::{wrap, wrap_signed};

/// Smallest admissible cell count per axis.
pub const MIN_GRID: usize = 64;

/// A regular grid on a chart rectangle.
///
/// Periodic axes have `n` nodes and `n` cells; closed axes have `n + 1` nodes.
/// On whole-surface sphere/revolution grids the first and last `x1` rows sit on
/// the poles, so the adjacent cells degenerate to triangles.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartGrid {
    lo: [f64; 2],
    hi: [f64; 2],
    n: [usize; 2],
    periodic: [bool; 2],
    poles: bool,
    metric: Option<ModelSurface>,
}

impl ChartGrid {
    /// Grid covering the whole surface.
    pub fn whole(surface: &ModelSurface, n1: usize, n2: usize) -> Result<Self> {
        check_counts(n1, n2)?;
        let ext = surface.chart_extent();
        let flat = surface.is_flat();
        Ok(ChartGrid {
            lo: [0.0, 0.0],
            hi: ext,
            n: [n1, n2],
            periodic: [flat, true],
            poles: !flat,
            metric: Some(*surface),
        })
    }

    /// Non-periodic grid on the chart rectangle `[lo, hi]`, with Euclidean chart lengths.
    pub fn window(lo: Point, hi: Point, n1: usize, n2: usize) -> Result<Self> {
        check_counts(n1, n2)?;
        if !(hi.0 > lo.0 && hi.1 > lo.1) {
            return Err(invalid(
                "window",
                "upper corner must exceed lower corner in both coordinates",
            ));
        }
        Ok(ChartGrid {
            lo: [lo.0, lo.1],
            hi: [hi.0, hi.1],
            n: [n1, n2],
            periodic: [false, false],
            poles: false,
            metric: None,
        })
    }

    /// Measure lengths with the metric of `surface` instead of the chart's Euclidean one.
    pub fn with_metric(mut self, surface: &ModelSurface) -> Self {
        self.metric = Some(*surface);
        self
    }

    pub fn cells(&self) -> [usize; 2] {
        self.n
    }

    /// Same rectangle with every cell count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        let mut g = self.clone();
        g.n = [self.n[0] * factor, self.n[1] * factor];
        g
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.n[axis] as f64
    }

    fn nodes(&self, axis: usize) -> usize {
        if self.periodic[axis] {
            self.n[axis]
        } else {
            self.n[axis] + 1
        }
    }

    fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + i as f64 * self.spacing(axis)
    }

    pub(crate) fn lower(&self) -> Point {
        Point(self.lo[0], self.lo[1])
    }

    /// Whole-surface grids are the periodic ones.
    pub(crate) fn is_whole(&self) -> bool {
        self.periodic[1]
    }

    pub(crate) fn node_index(&self, i: usize, j: usize) -> usize {
        let i = if self.periodic[0] { i % self.n[0] } else { i };
        let j = if self.periodic[1] { j % self.n[1] } else { j };
        i * self.nodes(1) + j
    }

    fn pole_margin(&self) -> f64 {
        1e-9 * (self.hi[0] - self.lo[0])
    }

    /// Where a chart point is evaluated: pole rows are nudged off the coordinate singularity.
    pub(crate) fn eval_point(&self, p: Point) -> Point {
        if self.poles {
            let m = self.pole_margin();
            Point(p.0.clamp(self.lo[0] + m, self.hi[0] - m), p.1)
        } else {
            p
        }
    }

    fn canonical(&self, p: Point) -> Point {
        let mut q = p;
        if self.periodic[0] {
            q.0 = self.lo[0] + wrap(q.0 - self.lo[0], self.hi[0] - self.lo[0]);
        }
        if self.periodic[1] {
            q.1 = self.lo[1] + wrap(q.1 - self.lo[1], self.hi[1] - self.lo[1]);
        }
        q
    }

    fn delta(&self, p: Point, q: Point) -> (f64, f64) {
        let mut d = (q.0 - p.0, q.1 - p.1);
        if self.periodic[0] {
            d.0 = wrap_signed(d.0, self.hi[0] - self.lo[0]);
        }
        if self.periodic[1] {
            d.1 = wrap_signed(d.1, self.hi[1] - self.lo[1]);
        }
        d
    }

    /// Length of the chart segment `pq` under the midpoint metric.
    pub fn segment_length(&self, p: Point, q: Point) -> f64 {
        let (d1, d2) = self.delta(p, q);
        match &self.metric {
            None => d1.hypot(d2),
            Some(s) => {
                let (a, b, _) = s.metric(Point(p.0 + 0.5 * d1, p.1 + 0.5 * d2));
                (a * d1).hypot(b * d2)
            }
        }
    }

    /// Field values at every node, row-major in `x1`.
    pub fn sample(&self, f: &(dyn Fn(Point) -> f64 + Sync)) -> Vec<f64> {
        let (n1, n2) = (self.nodes(0), self.nodes(1));
        let mut out = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            let x1 = self.coord(0, i);
            if self.poles && (i == 0 || i == n1 - 1) {
                let v = f(self.eval_point(Point(x1, self.lo[1])));
                out.extend(std::iter::repeat_n(v, n2));
                continue;
            }
            for j in 0..n2 {
                out.push(f(Point(x1, self.coord(1, j))));
            }
        }
        out
    }
}

fn check_counts(n1: usize, n2: usize) -> Result<()> {
    if n1 < MIN_GRID || n2 < MIN_GRID {
        return Err(Error::GridTooCoarse(format!(
            "need at least {MIN_GRID} cells per axis, got {n1} x {n2}"
        )));
    }
    Ok(())
}

/// An open or closed chain of contour vertices in chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub closed: bool,
    pub length: f64,
}

/// A grid with sampled values, ready for contouring at several levels.
pub struct SampledGrid<'a> {
    grid: &'a ChartGrid,
    field: &'a (dyn Fn(Point) -> f64 + Sync),
    values: Vec<f64>,
    scale: f64,
}

#[derive(Clone, Copy)]
struct Segment {
    a: u64,
    b: u64,
    pa: Point,
    pb: Point,
}

impl<'a> SampledGrid<'a> {
    pub fn new(grid: &'a ChartGrid, field: &'a (dyn Fn(Point) -> f64 + Sync)) -> Self {
        let values = grid.sample(field);
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        SampledGrid {
            grid,
            field,
            values,
            scale,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.scale
    }

    fn node_point(&self, i: usize, j: usize) -> Point {
        Point(self.grid.coord(0, i), self.grid.coord(1, j))
    }

    fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.node_index(i, j)]
    }

    fn edge_key(&self, i: usize, j: usize, vertical: bool) -> u64 {
        (self.grid.node_index(i, j) as u64) << 1 | vertical as u64
    }

    /// Level crossing on the edge between two nodes, refined by bracketed secant steps.
    fn crossing(&self, p: Point, q: Point, fp: f64, fq: f64, level: f64) -> Point {
        let tol = 1e-10 * self.scale.max(level.abs()).max(f64::MIN_POSITIVE);
        let at = |t: f64| Point(p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1));
        let (mut ta, mut ga, mut tb, mut gb) = (0.0, fp - level, 1.0, fq - level);
        if ga == 0.0 {
            return self.grid.canonical(p);
        }
        let mut t = ga / (ga - gb);
        let mut side = 0i8;
        for _ in 0..60 {
            t = (ta - ga * (tb - ta) / (gb - ga)).clamp(ta, tb);
            let g = (self.field)(self.grid.eval_point(at(t))) - level;
            if g.abs() <= tol || (tb - ta) < 1e-15 {
                break;
            }
            if (g < 0.0) == (ga < 0.0) {
                ta = t;
                ga = g;
                if side == -1 {
                    gb *= 0.5;
                }
                side = -1;
            } else {
                tb = t;
                gb = g;
                if side == 1 {
                    ga *= 0.5;
                }
                side = 1;
            }
        }
        self.grid.canonical(at(t))
    }

    fn segments(&self, level: f64) -> Vec<Segment> {
        let g = self.grid;
        let mut cache: HashMap<u64, Point> = HashMap::new();
        let mut segs = Vec::new();
        for i in 0..g.n[0] {
            for j in 0..g.n[1] {
                let corner = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let v = corner.map(|(a, b)| self.value(a, b));
                let above = v.map(|x| x >= level);
                let mask = above
                    .iter()
                    .enumerate()
                    .fold(0u8, |m, (k, &u)| m | (u as u8) << k);
                if mask == 0 || mask == 15 {
                    continue;
                }
                // edges: 0 = c0-c1, 1 = c1-c2, 2 = c3-c2, 3 = c0-c3
                let ends = [(0, 1), (1, 2), (3, 2), (0, 3)];
                let keys = [
                    self.edge_key(i, j, false),
                    self.edge_key(i + 1, j, true),
                    self.edge_key(i, j + 1, false),
                    self.edge_key(i, j, true),
                ];
                let mut point = |e: usize| -> Point {
                    *cache.entry(keys[e]).or_insert_with(|| {
                        let (s, t) = ends[e];
                        let (ps, pt) = (
                            self.node_point(corner[s].0, corner[s].1),
                            self.node_point(corner[t].0, corner[t].1),
                        );
                        self.crossing(ps, pt, v[s], v[t], level)
                    })
                };
                let crossing: Vec<usize> = (0..4)
                    .filter(|&e| above[ends[e].0] != above[ends[e].1])
                    .collect();
                let pairs: Vec<(usize, usize)> = if crossing.len() == 2 {
                    vec![(crossing[0], crossing[1])]
                } else {
                    let c = self.node_point(i, j);
                    let center = Point(c.0 + 0.5 * g.spacing(0), c.1 + 0.5 * g.spacing(1));
                    let center_above = (self.field)(g.eval_point(center)) >= level;
                    // corners 0 and 2 share a side iff the center agrees with them
                    if center_above == above[0] {
                        vec![(0, 1), (2, 3)]
                    } else {
                        vec![(3, 0), (1, 2)]
                    }
                };
                for (ea, eb) in pairs {
                    let (pa, pb) = (point(ea), point(eb));
                    segs.push(Segment {
                        a: keys[ea],
                        b: keys[eb],
                        pa,
                        pb,
                    });
                }
            }
        }
        segs
    }

    /// Total length of `{field = level}` without assembling polylines.
    pub fn level_length(&self, level: f64) -> f64 {
        self.segments(level)
            .iter()
            .map(|s| self.grid.segment_length(s.pa, s.pb))
            .sum()
    }

    /// Length of the part of `{field = level}` inside the chart disc `|x − center| ≤ radius`.
    pub fn level_length_in_disc(&self, level: f64, center: Point, radius: f64) -> f64 {
        self.segments(level)
            .iter()
            .map(|s| {
                let (d1, d2) = self.grid.delta(s.pa, s.pb);
                let (p1, p2) = self.grid.delta(center, s.pa);
                let a = d1 * d1 + d2 * d2;
                let b = 2.0 * (p1 * d1 + p2 * d2);
                let c = p1 * p1 + p2 * p2 - radius * radius;
                let disc = b * b - 4.0 * a * c;
                if a == 0.0 || disc <= 0.0 {
                    return 0.0;
                }
                let root = disc.sqrt();
                let t0 = ((-b - root) / (2.0 * a)).max(0.0);
                let t1 = ((-b + root) / (2.0 * a)).min(1.0);
                if t1 <= t0 {
                    0.0
                } else {
                    (t1 - t0) * self.grid.segment_length(s.pa, s.pb)
                }
            })
            .sum()
    }

    /// Contour polylines of `{field = level}`.
    pub fn level_set(&self, level: f64) -> Vec<Polyline> {
        let segs = self.segments(level);
        let mut at: HashMap<u64, Vec<usize>> = HashMap::new();
        for (k, s) in segs.iter().enumerate() {
            at.entry(s.a).or_default().push(k);
            at.entry(s.b).or_default().push(k);
        }
        let mut used = vec![false; segs.len()];
        let mut out = Vec::new();
        let mut starts: Vec<(u64, usize)> = Vec::new();
        for (k, s) in segs.iter().enumerate() {
            for key in [s.a, s.b] {
                if at[&key].len() == 1 {
                    starts.push((key, k));
                }
            }
        }
        let all: Vec<(u64, usize)> = segs.iter().enumerate().map(|(k, s)| (s.a, k)).collect();
        for (key, first) in starts.into_iter().chain(all) {
            if used[first] {
                continue;
            }
            let mut pts = Vec::new();
            let mut cur_key = key;
            let mut cur = first;
            let mut closed = false;
            let start_point = if segs[first].a == key {
                segs[first].pa
            } else {
                segs[first].pb
            };
            pts.push(start_point);
            loop {
                used[cur] = true;
                let s = segs[cur];
                let (next_key, next_point) = if s.a == cur_key {
                    (s.b, s.pb)
                } else {
                    (s.a, s.pa)
                };
                if next_key == key {
                    closed = true;
                    break;
                }
                pts.push(next_point);
                cur_key = next_key;
                match at[&next_key].iter().find(|&&k| !used[k]) {
                    Some(&k) => cur = k,
                    None => break,
                }
            }
            pts.dedup();
            if closed && pts.len() > 1 && pts.first() == pts.last() {
                pts.pop();
            }
            if pts.len() < 2 {
                continue;
            }
            let mut length: f64 = pts
                .windows(2)
                .map(|w| self.grid.segment_length(w[0], w[1]))
                .sum();
            if closed {
                length += self.grid.segment_length(pts[pts.len() - 1], pts[0]);
            }
            out.push(Polyline {
                points: pts,
                closed,
                length,
            });
        }
        out
    }
}

/// Contour polylines of `{field = level}` on `grid`.
pub fn extract_level_set(
    field: &(dyn Fn(Point) -> f64 + Sync),
    level: f64,
    grid: &ChartGrid,
) -> Result<Vec<Polyline>> {
    if !level.is_finite() {
        return Err(invalid("level", "must be finite"));
    }
    Ok(SampledGrid::new(grid, field).level_set(level))
}

/// Writes polylines as CSV with columns `curve_id,vertex_index,coord1,coord2`.
pub fn write_polylines_csv(mut w: impl Write, polylines: &[Polyline]) -> std::io::Result<()> {
    writeln!(w, "curve_id,vertex_index,coord1,coord2")?;
    for (c, line) in polylines.iter().enumerate() {
        for (k, p) in line.points.iter().enumerate() {
            writeln!(w, "{c},{k},{:?},{:?}", p.0, p.1)?;
        }
    }
    Ok(())
}
