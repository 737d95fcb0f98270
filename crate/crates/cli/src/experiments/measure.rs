use std::f64::consts::PI;

use specgeo_core::geomeasure::{
    critical_measure, critical_points, degenerate_rows, nodal_measure, scaling_fit, ChartGrid,
    LevelSchedule, PowerLawFit, Verdict,
};
use specgeo_core::numerics::linear_fit;
use specgeo_core::spectra::legendre::{critical_colatitudes, legendre};
use specgeo_core::spectra::Provenance;
use specgeo_core::{ChartField, EigenPair, ModelSurface};

use super::{fmt_range, nan_row, Ctx, Outcome};
use crate::config::{CriticalMeasureParams, FitParams, NodalMeasureParams};
use crate::error::Result;
use crate::table::{PlotRequest, ResultTable, Value};

/// Length of the level lines of `sin(ω·x + phase)` at any fixed level
/// spacing `π/|ω|`: area divided by spacing.
fn wave_length(pair: &EigenPair) -> Option<f64> {
    let (Provenance::TorusWave { k, .. }, ModelSurface::FlatTorus { periods }) =
        (pair.provenance(), pair.surface())
    else {
        return None;
    };
    let w = [
        2.0 * PI * k[0] as f64 / periods[0],
        2.0 * PI * k[1] as f64 / periods[1],
    ];
    Some(periods[0] * periods[1] * w[0].hypot(w[1]) / PI)
}

fn sphere_radius(pair: &EigenPair) -> Option<f64> {
    match *pair.surface() {
        ModelSurface::Sphere { radius } => Some(radius),
        _ => None,
    }
}

const SCAN: usize = 4000;

/// Colatitudes in `(0, π)` where `g(cos θ)` changes sign, refined by bisection.
fn sign_change_colatitudes(g: impl Fn(f64) -> f64) -> Vec<f64> {
    let f = |t: f64| g(t.cos());
    let h = PI / SCAN as f64;
    let mut roots = Vec::new();
    for i in 1..SCAN - 1 {
        let (mut a, mut b) = (i as f64 * h, (i + 1) as f64 * h);
        let (mut fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fa * fm <= 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

/// Closed-form length of the critical set, where one is known.
fn critical_closed_form(pair: &EigenPair) -> Option<f64> {
    match pair.provenance() {
        Provenance::TorusWave { .. } => wave_length(pair),
        Provenance::TorusProduct { .. } => Some(0.0),
        Provenance::Zonal { l } => {
            let r = sphere_radius(pair)?;
            Some(
                2.0 * PI
                    * r
                    * critical_colatitudes(*l)
                        .iter()
                        .map(|t| t.sin())
                        .sum::<f64>(),
            )
        }
        Provenance::Revolution { .. } => None,
    }
}

/// Closed-form length of the nodal set, where one is known.
fn nodal_closed_form(pair: &EigenPair) -> Option<f64> {
    match (pair.provenance(), pair.surface()) {
        (Provenance::TorusWave { .. }, _) => wave_length(pair),
        (Provenance::TorusProduct { k }, ModelSurface::FlatTorus { periods }) => {
            Some(2.0 * (k[0].abs() as f64 * periods[1] + k[1].abs() as f64 * periods[0]))
        }
        (Provenance::Zonal { l }, _) => {
            let r = sphere_radius(pair)?;
            let zeros = sign_change_colatitudes(|x| legendre(*l, x).0);
            Some(2.0 * PI * r * zeros.iter().map(|t| t.sin()).sum::<f64>())
        }
        _ => None,
    }
}

fn fit_plot(
    name: &str,
    title: &str,
    y_label: &str,
    pts: &[(f64, f64)],
    fit: &PowerLawFit,
) -> PlotRequest {
    PlotRequest {
        name: name.into(),
        title: title.into(),
        x_label: "lambda".into(),
        y_label: y_label.into(),
        log_log: true,
        points: pts.iter().map(|&(x, y)| [x, y]).collect(),
        line: Some([fit.slope, fit.intercept]),
    }
}

fn rel_err(est: f64, exact: f64) -> f64 {
    (est - exact).abs() / exact
}

pub(super) fn critical(ctx: &Ctx, p: &CriticalMeasureParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let schedule = LevelSchedule {
        delta0: p.delta0,
        halvings: p.halvings,
    };
    let want_latitudes = p.acceptance.as_ref().is_some_and(|a| a.latitude_count);
    let results = ctx.per_member(|m| -> specgeo_core::Result<_> {
        let grid = ChartGrid::whole(m.pair.surface(), p.grid[0], p.grid[1])?;
        let est = critical_measure(&m.pair, &grid, schedule)?;
        let latitudes = match m.pair.provenance() {
            Provenance::Zonal { l } if want_latitudes => {
                let pts = critical_points(&m.pair, &grid)?;
                let found = degenerate_rows(m.pair.surface(), &pts.points, 1e-6).len();
                let oracle = sign_change_colatitudes(|x| legendre(*l, x).1).len();
                Some((found, oracle))
            }
            _ => None,
        };
        Ok((est, latitudes))
    });

    let mut main = ResultTable::new(
        "critical-measure",
        ctx.columns(&["lambda", "H1_estimate", "verdict"]),
    );
    let mut detail = ResultTable::new(
        "reference",
        ctx.columns(&[
            "closed_form",
            "relative_error",
            "point_count",
            "latitudes",
            "expected_latitudes",
        ]),
    );
    let mut samples = Vec::new();
    let mut closed_bad = Vec::new();
    let mut closed_n = 0;
    let mut lat_bad = Vec::new();
    let mut lat_n = 0;
    let tol = p.acceptance.as_ref().map(|a| a.closed_form_tolerance);
    for (m, r) in ctx.members.iter().zip(results) {
        let lambda = m.pair.lambda();
        let (est, latitudes) = match r {
            Ok(v) => v,
            Err(e) => {
                out.row_error(m, &e);
                main.push(ctx.row(m, vec![lambda.into(), f64::NAN.into(), "error".into()]));
                detail.push(ctx.row(m, nan_row(5)));
                closed_bad.push(m.index);
                continue;
            }
        };
        let h1 = est.extrapolated;
        main.push(ctx.row(
            m,
            vec![lambda.into(), h1.into(), est.verdict.to_string().into()],
        ));
        let exact = critical_closed_form(&m.pair);
        let err = exact.filter(|e| *e > 0.0).map(|e| rel_err(h1, e));
        let lat_cells: [Value; 2] = match latitudes {
            Some((found, oracle)) => [found.into(), oracle.into()],
            None => [(-1i64).into(), (-1i64).into()],
        };
        detail.push(ctx.row(
            m,
            vec![
                exact.unwrap_or(f64::NAN).into(),
                err.unwrap_or(f64::NAN).into(),
                est.point_count.map_or(-1, |c| c as i64).into(),
                lat_cells[0].clone(),
                lat_cells[1].clone(),
            ],
        ));
        if let (Some(tol), Some(exact)) = (tol, exact) {
            closed_n += 1;
            let ok = if exact > 0.0 {
                est.verdict == Verdict::Curve && err.is_some_and(|e| e <= tol)
            } else {
                est.verdict == Verdict::Points
            };
            if !ok {
                closed_bad.push(m.index);
            }
        }
        if let (Some((found, oracle)), Provenance::Zonal { l }) = (latitudes, m.pair.provenance()) {
            lat_n += 1;
            if found != oracle || oracle + 1 != *l {
                lat_bad.push(m.index);
            }
        }
        if h1 > 0.0 {
            samples.push((lambda, h1));
        }
    }

    let fit = if samples.len() >= 3 {
        Some(scaling_fit(&samples)?)
    } else {
        None
    };
    if let Some(fit) = &fit {
        out.plots.push(fit_plot(
            "critical-measure-fit",
            "critical set length",
            "H1",
            &samples,
            fit,
        ));
    }
    if let Some(acc) = &p.acceptance {
        if closed_n > 0 {
            out.check(
                "closed-form critical length",
                closed_bad.is_empty(),
                format!(
                    "{} of {closed_n} within relative {}; failing {closed_bad:?}",
                    closed_n - closed_bad.len(),
                    acc.closed_form_tolerance
                ),
            );
        }
        if want_latitudes {
            out.check(
                "critical latitude count",
                lat_n > 0 && lat_bad.is_empty(),
                format!(
                    "{} of {lat_n} members with l - 1 latitudes; failing {lat_bad:?}",
                    lat_n - lat_bad.len()
                ),
            );
        }
        if let Some(range) = acc.slope {
            let (ok, detail) = match &fit {
                Some(f) => {
                    let r2_ok = acc.r_squared_min.is_none_or(|m| f.r_squared >= m);
                    (
                        f.slope >= range[0] && f.slope <= range[1] && r2_ok,
                        format!(
                            "slope {:.5} in {}, r² {:.6}",
                            f.slope,
                            fmt_range(range),
                            f.r_squared
                        ),
                    )
                }
                None => (false, "fewer than 3 positive measures".into()),
            };
            out.check("scaling slope", ok, detail);
        }
        if let Some(range) = acc.linear_slope {
            let norm = acc.linear_normalizer.unwrap_or(1.0);
            let xs: Vec<f64> = samples.iter().map(|s| s.0.sqrt()).collect();
            let ys: Vec<f64> = samples.iter().map(|s| s.1 / norm).collect();
            let (ok, detail) = if xs.len() >= 3 {
                let (slope, intercept, r2) = linear_fit(&xs, &ys);
                out.plots.push(PlotRequest {
                    name: "critical-measure-linear".into(),
                    title: format!("critical set length / {norm}"),
                    x_label: "sqrt(lambda)".into(),
                    y_label: "H1".into(),
                    log_log: false,
                    points: xs.iter().zip(&ys).map(|(x, y)| [*x, *y]).collect(),
                    line: Some([slope, intercept]),
                });
                (
                    slope >= range[0] && slope <= range[1],
                    format!(
                        "slope of H1/{norm} against sqrt(lambda) {slope:.5} in {}, r² {r2:.6}",
                        fmt_range(range)
                    ),
                )
            } else {
                (false, "fewer than 3 positive measures".into())
            };
            out.check("linear slope", ok, detail);
        }
    }
    out.tables.push(main);
    out.tables.push(detail);
    Ok(out)
}

pub(super) fn nodal(ctx: &Ctx, p: &NodalMeasureParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let results = ctx.per_member(|m| -> specgeo_core::Result<f64> {
        let grid = ChartGrid::whole(m.pair.surface(), p.grid[0], p.grid[1])?;
        nodal_measure(&m.pair, &grid)
    });
    let mut table = ResultTable::new(
        "nodal-measure",
        ctx.columns(&["lambda", "H1_nodal", "closed_form", "relative_error"]),
    );
    let mut per_family: Vec<Vec<(f64, f64)>> = vec![Vec::new(); ctx.cfg.families.len()];
    let mut closed_bad = Vec::new();
    let mut closed_n = 0;
    for (m, r) in ctx.members.iter().zip(results) {
        let lambda = m.pair.lambda();
        let h1 = match r {
            Ok(v) => v,
            Err(e) => {
                out.row_error(m, &e);
                table.push(ctx.row(m, [vec![lambda.into()], nan_row(3)].concat()));
                closed_bad.push(m.index);
                continue;
            }
        };
        let exact = nodal_closed_form(&m.pair);
        let err = exact.map(|e| rel_err(h1, e));
        table.push(ctx.row(
            m,
            vec![
                lambda.into(),
                h1.into(),
                exact.unwrap_or(f64::NAN).into(),
                err.unwrap_or(f64::NAN).into(),
            ],
        ));
        if let (Some(acc), Some(err)) = (&p.acceptance, err) {
            closed_n += 1;
            if !(err <= acc.closed_form_tolerance) {
                closed_bad.push(m.index);
            }
        }
        if h1 > 0.0 {
            per_family[m.family].push((lambda, h1));
        }
    }
    let mut fits = ResultTable::new(
        "fits",
        vec![
            "family".into(),
            "members".into(),
            "slope".into(),
            "prefactor".into(),
            "r_squared".into(),
        ],
    );
    let mut slope_detail = Vec::new();
    let mut slope_ok = true;
    for f in ctx.families() {
        let name = ctx.family_name(f);
        let pts = &per_family[f];
        if pts.len() < 3 {
            slope_ok = false;
            slope_detail.push(format!("{name}: fewer than 3 members"));
            continue;
        }
        let fit = scaling_fit(pts)?;
        fits.push(vec![
            name.clone().into(),
            pts.len().into(),
            fit.slope.into(),
            fit.prefactor().into(),
            fit.r_squared.into(),
        ]);
        if let Some(acc) = &p.acceptance {
            let ok = fit.slope >= acc.slope[0] && fit.slope <= acc.slope[1];
            slope_ok &= ok;
            slope_detail.push(format!("{name} {:.5}", fit.slope));
        }
        out.plots.push(fit_plot(
            &format!("nodal-measure-{name}"),
            &format!("nodal length, {name}"),
            "H1",
            pts,
            &fit,
        ));
    }
    if let Some(acc) = &p.acceptance {
        if closed_n > 0 {
            out.check(
                "closed-form nodal length",
                closed_bad.is_empty(),
                format!(
                    "{} of {closed_n} within relative {}; failing {closed_bad:?}",
                    closed_n - closed_bad.len(),
                    acc.closed_form_tolerance
                ),
            );
        }
        out.check(
            "nodal scaling slope",
            slope_ok,
            format!(
                "slopes {} in {}",
                slope_detail.join(", "),
                fmt_range(acc.slope)
            ),
        );
    }
    out.tables.push(table);
    out.tables.push(fits);
    Ok(out)
}

pub(super) fn fit(p: &FitParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let samples: Vec<(f64, f64)> = p.samples.iter().map(|s| (s[0], s[1])).collect();
    let fit = scaling_fit(&samples)?;
    let mut table = ResultTable::new(
        "samples",
        vec!["lambda".into(), "measure".into(), "fitted".into()],
    );
    for &(l, m) in &samples {
        table.push(vec![
            l.into(),
            m.into(),
            (fit.prefactor() * l.powf(fit.slope)).into(),
        ]);
    }
    let mut summary = ResultTable::new(
        "fit",
        vec![
            "slope".into(),
            "intercept".into(),
            "prefactor".into(),
            "r_squared".into(),
        ],
    );
    summary.push(vec![
        fit.slope.into(),
        fit.intercept.into(),
        fit.prefactor().into(),
        fit.r_squared.into(),
    ]);
    if let Some(acc) = &p.acceptance {
        out.check(
            "scaling slope",
            fit.slope >= acc.slope[0]
                && fit.slope <= acc.slope[1]
                && fit.r_squared >= acc.r_squared_min,
            format!(
                "slope {:.5} in {}, r² {:.6}",
                fit.slope,
                fmt_range(acc.slope),
                fit.r_squared
            ),
        );
    }
    out.plots
        .push(fit_plot("fit", "power-law fit", "measure", &samples, &fit));
    out.tables.push(table);
    out.tables.push(summary);
    Ok(out)
}
