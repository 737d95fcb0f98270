use specgeo_core::carleman::WeightParams;
use specgeo_core::numerics::upper_envelope_line;
use specgeo_core::uniqueness::{
    annulus_lower_bound_check, doubling_indices, elliptic_gradient_check, global_lower_bound_check,
    three_sphere_check,
};
use specgeo_core::Point;

use super::{centers_for, fresh_centers, nan_row, Ctx, Outcome};
use crate::config::{
    DoublingParams, EllipticParams, LowerBoundParams, ThreeSphereParams, ValidationSpec,
};
use crate::error::Result;
use crate::table::{PlotRequest, ResultTable, Value};

/// Componentwise maxima over a `(center, radius)` sweep.
#[derive(Clone, Copy, Debug)]
struct SweepStats<const N: usize> {
    max: [f64; N],
    evaluated: usize,
    failures: usize,
}

fn sweep<const N: usize>(
    centers: &[Point],
    radii: &[f64],
    f: impl Fn(Point, f64) -> specgeo_core::Result<[f64; N]>,
) -> SweepStats<N> {
    let mut s = SweepStats {
        max: [f64::NEG_INFINITY; N],
        evaluated: 0,
        failures: 0,
    };
    for &c in centers {
        for &r in radii {
            match f(c, r) {
                Ok(v) if v.iter().all(|x| x.is_finite()) => {
                    s.evaluated += 1;
                    for (m, x) in s.max.iter_mut().zip(v) {
                        *m = m.max(x);
                    }
                }
                _ => s.failures += 1,
            }
        }
    }
    s
}

/// Calibration sweep on the configured centers and, if requested, a
/// validation sweep on fresh ones.
fn calibrate_and_validate<const N: usize>(
    ctx: &Ctx,
    centers: &crate::config::CenterSpec,
    validation: Option<&ValidationSpec>,
    radii: &[f64],
    f: impl Fn(&specgeo_core::EigenPair, Point, f64) -> specgeo_core::Result<[f64; N]> + Sync + Send,
) -> Vec<(SweepStats<N>, Option<SweepStats<N>>)> {
    ctx.per_member(|m| {
        let cal = sweep(&centers_for(&m.pair, centers), radii, |c, r| {
            f(&m.pair, c, r)
        });
        let val = validation.map(|v| {
            sweep(&fresh_centers(&m.pair, v.count, v.offset), radii, |c, r| {
                f(&m.pair, c, r)
            })
        });
        (cal, val)
    })
}

fn within(value: f64, bound: f64, margin: f64) -> bool {
    value <= bound + margin * bound.abs()
}

pub(super) fn doubling(ctx: &Ctx, p: &DoublingParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let order = p.quadrature_order;
    let results = calibrate_and_validate(
        ctx,
        &p.centers,
        p.validation.as_ref(),
        &p.radii,
        |u, c, r| {
            let [a, b] = doubling_indices(u, c, r, order)?;
            Ok([a.index, b.index])
        },
    );
    let mut cols = vec![
        "lambda",
        "sqrt_lambda",
        "index_l2",
        "index_sup",
        "evaluated",
        "failures",
    ];
    if p.validation.is_some() {
        cols.extend(["validation_l2", "validation_sup"]);
    }
    let mut table = ResultTable::new("doubling", ctx.columns(&cols));
    let mut failures = 0;
    let mut xs = Vec::new();
    let mut ys = [Vec::new(), Vec::new()];
    let mut vs = [Vec::new(), Vec::new()];
    for (m, (cal, val)) in ctx.members.iter().zip(&results) {
        let sl = m.pair.lambda().sqrt();
        failures += cal.failures + val.map_or(0, |v| v.failures);
        if cal.failures > 0 {
            out.row_error(m, format!("{} sweep cells failed", cal.failures));
        }
        let mut row: Vec<Value> = vec![
            m.pair.lambda().into(),
            sl.into(),
            cal.max[0].into(),
            cal.max[1].into(),
            cal.evaluated.into(),
            cal.failures.into(),
        ];
        if let Some(v) = val {
            row.extend([v.max[0].into(), v.max[1].into()]);
            for k in 0..2 {
                vs[k].push((sl, v.max[k]));
            }
        }
        table.push(ctx.row(m, row));
        if cal.max.iter().all(|x| x.is_finite()) {
            xs.push(sl);
            for k in 0..2 {
                ys[k].push(cal.max[k]);
            }
        }
    }

    let mut env = ResultTable::new(
        "envelope",
        ["norm", "c1", "c2", "violations", "validation_violations"]
            .map(String::from)
            .to_vec(),
    );
    for (k, name) in ["l2", "sup"].into_iter().enumerate() {
        if xs.is_empty() {
            out.check(
                &format!("doubling envelope ({name})"),
                false,
                "no member evaluated",
            );
            continue;
        }
        let (c1, c2) = upper_envelope_line(&xs, &ys[k]);
        let scale = ys[k].iter().fold(1.0f64, |a, y| a.max(y.abs()));
        let violations = xs
            .iter()
            .zip(&ys[k])
            .filter(|(x, y)| **y > c1 * **x + c2 + 1e-9 * scale)
            .count();
        let margin = p.validation.map_or(0.0, |v| v.margin);
        let val_violations = vs[k]
            .iter()
            .filter(|(x, y)| !within(*y, c1 * x + c2, margin))
            .count();
        env.push(vec![
            name.into(),
            c1.into(),
            c2.into(),
            violations.into(),
            val_violations.into(),
        ]);
        let mut detail = format!(
            "max index <= {c1:.5} sqrt(lambda) + {c2:.5}; {violations} violations over {} members, {failures} failed cells",
            xs.len()
        );
        if p.validation.is_some() {
            detail += &format!("; {val_violations} validation violations at margin {margin}");
        }
        out.check(
            &format!("doubling envelope ({name})"),
            violations == 0 && val_violations == 0 && failures == 0,
            detail,
        );
        out.plots.push(PlotRequest {
            name: format!("doubling-{name}"),
            title: format!("maximal doubling index ({name})"),
            x_label: "sqrt(lambda)".into(),
            y_label: "doubling index".into(),
            log_log: false,
            points: xs.iter().zip(&ys[k]).map(|(x, y)| [*x, *y]).collect(),
            line: Some([c1, c2]),
        });
    }
    out.tables.push(table);
    out.tables.push(env);
    Ok(out)
}

/// Single-constant check shared by the three-sphere, elliptic and lower-bound
/// experiments: the constant is the largest calibration value and every
/// validation value must stay within the margin.
fn constant_check(
    out: &mut Outcome,
    name: &str,
    cal: &[f64],
    val: &[f64],
    validation: Option<&ValidationSpec>,
    failures: usize,
) -> f64 {
    let c = cal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let margin = validation.map_or(0.0, |v| v.margin);
    let bad = val.iter().filter(|v| !within(**v, c, margin)).count();
    let mut detail = format!(
        "constant {c:.6} over {} values, {failures} failed cells",
        cal.len()
    );
    if validation.is_some() {
        detail += &format!(
            "; {bad} of {} validation values above it at margin {margin}",
            val.len()
        );
    }
    out.check(name, c.is_finite() && bad == 0 && failures == 0, detail);
    c
}

pub(super) fn three_sphere(ctx: &Ctx, p: &ThreeSphereParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let params = WeightParams::new(p.epsilon, p.t0)?;
    let order = p.quadrature_order;
    let results = calibrate_and_validate(
        ctx,
        &p.centers,
        p.validation.as_ref(),
        &p.radii,
        |u, c, r| {
            let rep = three_sphere_check(u, c, r, &params, order)?;
            Ok([rep.required_c, rep.required_c_swapped])
        },
    );
    let mut cols = vec![
        "lambda",
        "required_c",
        "required_c_swapped",
        "evaluated",
        "failures",
    ];
    if p.validation.is_some() {
        cols.extend(["validation_c", "validation_c_swapped"]);
    }
    let mut table = ResultTable::new("three-sphere", ctx.columns(&cols));
    let mut cal = [Vec::new(), Vec::new()];
    let mut val = [Vec::new(), Vec::new()];
    let mut failures = 0;
    for (m, (c, v)) in ctx.members.iter().zip(&results) {
        failures += c.failures + v.map_or(0, |v| v.failures);
        let mut row: Vec<Value> = vec![
            m.pair.lambda().into(),
            c.max[0].into(),
            c.max[1].into(),
            c.evaluated.into(),
            c.failures.into(),
        ];
        for k in 0..2 {
            cal[k].push(c.max[k]);
        }
        if let Some(v) = v {
            row.extend([v.max[0].into(), v.max[1].into()]);
            for k in 0..2 {
                val[k].push(v.max[k]);
            }
        }
        table.push(ctx.row(m, row));
    }
    let mut consts = ResultTable::new("constants", vec!["orientation".into(), "constant".into()]);
    for (k, name) in ["standard", "swapped"].into_iter().enumerate() {
        let c = constant_check(
            &mut out,
            &format!("three-sphere constant ({name})"),
            &cal[k],
            &val[k],
            p.validation.as_ref(),
            failures,
        );
        consts.push(vec![name.into(), c.into()]);
    }
    out.tables.push(table);
    out.tables.push(consts);
    Ok(out)
}

pub(super) fn elliptic(ctx: &Ctx, p: &EllipticParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let order = p.quadrature_order;
    let combos: Vec<(f64, f64)> = p
        .shrink
        .iter()
        .flat_map(|&a| p.radii.iter().map(move |&r| (a, r)))
        .collect();
    let results = ctx.per_member(|m| {
        combos
            .iter()
            .map(|&(a, r)| {
                let f = |c: Point, r: f64| Ok([elliptic_gradient_check(&m.pair, c, r, a, order)?]);
                let cal = sweep(&centers_for(&m.pair, &p.centers), &[r], f);
                let val = p
                    .validation
                    .map(|v| sweep(&fresh_centers(&m.pair, v.count, v.offset), &[r], f));
                (cal, val)
            })
            .collect::<Vec<_>>()
    });
    let mut cols = vec!["lambda", "a", "R", "max_ratio", "failures"];
    if p.validation.is_some() {
        cols.push("validation_ratio");
    }
    let mut table = ResultTable::new("elliptic", ctx.columns(&cols));
    let (mut cal, mut val, mut failures) = (Vec::new(), Vec::new(), 0);
    for (m, per) in ctx.members.iter().zip(&results) {
        for (&(a, r), (c, v)) in combos.iter().zip(per) {
            failures += c.failures + v.map_or(0, |v| v.failures);
            let mut row: Vec<Value> = vec![
                m.pair.lambda().into(),
                a.into(),
                r.into(),
                c.max[0].into(),
                c.failures.into(),
            ];
            cal.push(c.max[0]);
            if let Some(v) = v {
                row.push(v.max[0].into());
                val.push(v.max[0]);
            }
            table.push(ctx.row(m, row));
        }
    }
    let c = constant_check(
        &mut out,
        "elliptic constant",
        &cal,
        &val,
        p.validation.as_ref(),
        failures,
    );
    let mut consts = ResultTable::new("constants", vec!["constant".into()]);
    consts.push(vec![c.into()]);
    out.tables.push(table);
    out.tables.push(consts);
    Ok(out)
}

pub(super) fn lower_bound(ctx: &Ctx, p: &LowerBoundParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let order = p.quadrature_order;
    let both = |u: &specgeo_core::EigenPair,
                centers: &[Point],
                r: f64|
     -> specgeo_core::Result<[f64; 2]> {
        Ok([
            global_lower_bound_check(u, r, centers, order)?.exponent,
            annulus_lower_bound_check(u, r, centers, order)?.exponent,
        ])
    };
    let results = ctx.per_member(|m| {
        let cal_centers = centers_for(&m.pair, &p.centers);
        let val_centers = p
            .validation
            .map(|v| fresh_centers(&m.pair, v.count, v.offset));
        p.radii
            .iter()
            .map(|&r| {
                let cal = both(&m.pair, &cal_centers, r);
                let val = val_centers.as_ref().map(|c| both(&m.pair, c, r));
                (cal, val)
            })
            .collect::<Vec<_>>()
    });
    let mut cols = vec!["lambda", "R", "ball_exponent", "annulus_exponent"];
    if p.validation.is_some() {
        cols.extend(["validation_ball", "validation_annulus"]);
    }
    let width = cols.len() - 2;
    let mut table = ResultTable::new("lower-bound", ctx.columns(&cols));
    let nr = p.radii.len();
    let mut cal = vec![[Vec::new(), Vec::new()]; nr];
    let mut val = vec![[Vec::new(), Vec::new()]; nr];
    let mut failures = vec![0; nr];
    for (m, per) in ctx.members.iter().zip(results) {
        for (i, (&r, (c, v))) in p.radii.iter().zip(per).enumerate() {
            let c = match c {
                Ok(c) => c,
                Err(e) => {
                    out.row_error(m, format!("R = {r}: {e}"));
                    failures[i] += 1;
                    table.push(ctx.row(
                        m,
                        [vec![m.pair.lambda().into(), r.into()], nan_row(width)].concat(),
                    ));
                    continue;
                }
            };
            let mut row: Vec<Value> =
                vec![m.pair.lambda().into(), r.into(), c[0].into(), c[1].into()];
            for k in 0..2 {
                cal[i][k].push(c[k]);
            }
            match v {
                Some(Ok(v)) => {
                    row.extend([v[0].into(), v[1].into()]);
                    for k in 0..2 {
                        val[i][k].push(v[k]);
                    }
                }
                Some(Err(e)) => {
                    out.row_error(m, format!("validation at R = {r}: {e}"));
                    failures[i] += 1;
                    row.extend(nan_row(2));
                }
                None => {}
            }
            table.push(ctx.row(m, row));
        }
    }
    let mut consts = ResultTable::new(
        "constants",
        vec!["R".into(), "C_ball".into(), "C_annulus".into()],
    );
    for (i, &r) in p.radii.iter().enumerate() {
        let mut row = vec![r.into()];
        for (k, name) in ["ball", "annulus"].into_iter().enumerate() {
            let c = constant_check(
                &mut out,
                &format!("lower-bound constant (R = {r}, {name})"),
                &cal[i][k],
                &val[i][k],
                p.validation.as_ref(),
                failures[i],
            );
            row.push(c.into());
        }
        consts.push(row);
    }
    out.tables.push(table);
    out.tables.push(consts);
    Ok(out)
}
