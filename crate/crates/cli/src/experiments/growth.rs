use specgeo_core::geomeasure::LevelSchedule;
use specgeo_core::growth::{
    df_relation_check, growth_exponent, taylor_derivative_check, DfRow, DfSettings, GrowthReport,
};
use specgeo_core::numerics::linear_fit;
use specgeo_core::spectra::Provenance;
use specgeo_core::{ChartField, EigenPair, ModelSurface, Point};

use super::{nan_row, Ctx, Outcome};
use crate::config::{DfCheckParams, GrowthParams};
use crate::error::Result;
use crate::table::{PlotRequest, ResultTable};

/// `2 ln cosh(s(|ω₁| + |ω₂|))` for `sin(ω·x + phase)` when the chart center lies
/// on a crest (`sin(ω·c + phase) = 0`, so `|∇u|²` peaks there): the complex sup
/// is then attained on the imaginary axes and the real sup at the center.
fn closed_form_growth(pair: &EigenPair, rep: &GrowthReport) -> Option<f64> {
    let (Provenance::TorusWave { k, phase }, ModelSurface::FlatTorus { periods }) =
        (pair.provenance(), pair.surface())
    else {
        return None;
    };
    let w = [
        2.0 * std::f64::consts::PI * k[0] as f64 / periods[0],
        2.0 * std::f64::consts::PI * k[1] as f64 / periods[1],
    ];
    let c = rep.chart.center;
    if (w[0] * c.0 + w[1] * c.1 + phase).sin().abs() > 1e-12 {
        return None;
    }
    let b = rep.chart.scale * (w[0].abs() + w[1].abs());
    Some(2.0 * b.cosh().ln())
}

pub(super) fn growth(ctx: &Ctx, p: &GrowthParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let center = Point(p.center[0], p.center[1]);
    let results = ctx.per_member(|m| -> specgeo_core::Result<_> {
        let g = growth_exponent(&m.pair, center, p.complex_grid)?;
        let t = taylor_derivative_check(&m.pair, center, p.taylor_order, p.quadrature_order)?;
        Ok((g, t))
    });
    let cols = [
        "lambda",
        "sup_complex",
        "sup_real_half",
        "alpha_growth",
        "alpha_over_sqrt_lambda",
        "closed_form",
        "taylor_c",
    ];
    let mut table = ResultTable::new("growth", ctx.columns(&cols));
    let mut bad = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    let mut closed_n = 0;
    let mut pts = Vec::new();
    for (m, r) in ctx.members.iter().zip(results) {
        let lambda = m.pair.lambda();
        let (g, t) = match r {
            Ok(v) => v,
            Err(e) => {
                out.row_error(m, &e);
                table.push(ctx.row(m, [vec![lambda.into()], nan_row(6)].concat()));
                for b in &mut bad {
                    b.push(m.index);
                }
                continue;
            }
        };
        let sl = lambda.sqrt();
        let ratio = g.alpha_growth / sl;
        let exact = closed_form_growth(&m.pair, &g);
        table.push(ctx.row(
            m,
            vec![
                lambda.into(),
                g.sup_complex.into(),
                g.sup_real_half.into(),
                g.alpha_growth.into(),
                ratio.into(),
                exact.unwrap_or(f64::NAN).into(),
                t.min_c.into(),
            ],
        ));
        pts.push([sl, g.alpha_growth]);
        if let Some(acc) = &p.acceptance {
            if !(ratio <= acc.ratio_max) {
                bad[0].push(m.index);
            }
            if m.index >= acc.asymptotic_from && !((ratio - acc.target).abs() <= acc.tolerance) {
                bad[1].push(m.index);
            }
            if let Some(e) = exact {
                closed_n += 1;
                if !((g.alpha_growth - e).abs() <= acc.closed_form_tolerance * e) {
                    bad[2].push(m.index);
                }
            }
            if !(t.min_c <= acc.taylor_max) {
                bad[3].push(m.index);
            }
        }
    }
    if let Some(acc) = &p.acceptance {
        let n = ctx.members.len();
        out.check(
            "growth ratio bound",
            bad[0].is_empty(),
            format!(
                "alpha/sqrt(lambda) <= {} for {} of {n}; failing {:?}",
                acc.ratio_max,
                n - bad[0].len(),
                bad[0]
            ),
        );
        out.check(
            "growth asymptote",
            bad[1].is_empty(),
            format!(
                "alpha/sqrt(lambda) within {} of {} from index {}; failing {:?}",
                acc.tolerance, acc.target, acc.asymptotic_from, bad[1]
            ),
        );
        if closed_n > 0 {
            out.check(
                "growth closed form",
                bad[2].is_empty(),
                format!(
                    "{} of {closed_n} within relative {} of 2 ln cosh; failing {:?}",
                    closed_n - bad[2].len(),
                    acc.closed_form_tolerance,
                    bad[2]
                ),
            );
        }
        out.check(
            "taylor constant",
            bad[3].is_empty(),
            format!(
                "minimal C <= {} up to order {}; failing {:?}",
                acc.taylor_max, p.taylor_order, bad[3]
            ),
        );
    }
    if pts.len() >= 2 {
        let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p[1]).collect();
        let (slope, intercept, _) = linear_fit(&xs, &ys);
        out.plots.push(PlotRequest {
            name: "growth".into(),
            title: "growth exponent".into(),
            x_label: "sqrt(lambda)".into(),
            y_label: "alpha".into(),
            log_log: false,
            points: pts,
            line: Some([slope, intercept]),
        });
    }
    out.tables.push(table);
    Ok(out)
}

fn df_rows(ctx: &Ctx, center: Point, settings: &DfSettings) -> Vec<specgeo_core::Result<DfRow>> {
    ctx.per_member(|m| {
        let rep = df_relation_check(std::slice::from_ref(&m.pair), center, settings)?;
        Ok(rep.rows.into_iter().next().expect("one row per member"))
    })
}

pub(super) fn df_check(ctx: &Ctx, p: &DfCheckParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let center = Point(p.center[0], p.center[1]);
    let settings = DfSettings {
        complex_grid: p.complex_grid,
        window_cells: p.window_cells,
        schedule: LevelSchedule {
            delta0: p.delta0,
            halvings: p.halvings,
        },
    };
    let rows = df_rows(ctx, center, &settings);
    let mut table = ResultTable::new(
        "df-check",
        ctx.columns(&[
            "lambda",
            "alpha_growth",
            "H1_quarter_ball",
            "verdict",
            "ratio",
        ]),
    );
    let mut max_ratio = 0.0f64;
    let mut failures = 0;
    for (m, r) in ctx.members.iter().zip(&rows) {
        match r {
            Ok(row) => {
                max_ratio = max_ratio.max(row.ratio);
                table.push(ctx.row(
                    m,
                    vec![
                        m.pair.lambda().into(),
                        row.growth.alpha_growth.into(),
                        row.measure.extrapolated.into(),
                        row.measure.verdict.to_string().into(),
                        row.ratio.into(),
                    ],
                ));
            }
            Err(e) => {
                failures += 1;
                out.row_error(m, e);
                let mut cells = vec![m.pair.lambda().into()];
                cells.extend(nan_row(2));
                cells.push("error".into());
                cells.push(f64::NAN.into());
                table.push(ctx.row(m, cells));
            }
        }
    }
    if let Some(acc) = &p.acceptance {
        out.check(
            "df ratio bound",
            failures == 0 && max_ratio <= acc.ratio_max,
            format!(
                "max measure/alpha {max_ratio:.6} <= recorded {}; {failures} failed members",
                acc.ratio_max
            ),
        );
        let fine = DfSettings {
            window_cells: 2 * p.window_cells,
            ..settings
        };
        let fine_max = df_rows(ctx, center, &fine)
            .iter()
            .map(|r| r.as_ref().map_or(f64::NAN, |r| r.ratio))
            .fold(0.0f64, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) });
        let change = if max_ratio > 0.0 {
            (fine_max - max_ratio).abs() / max_ratio
        } else {
            fine_max.abs()
        };
        out.check(
            "df refinement",
            change <= acc.refinement_tolerance,
            format!(
                "max ratio {max_ratio:.6} -> {fine_max:.6} with {} window cells (relative change {change:.3e}, allowed {})",
                2 * p.window_cells,
                acc.refinement_tolerance
            ),
        );
    }
    out.tables.push(table);
    Ok(out)
}
