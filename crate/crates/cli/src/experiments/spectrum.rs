use specgeo_core::fieldcalc::{gradient_consistency_check, hessian_consistency_check};
use specgeo_core::spectra::eigen_residual;

use super::{nan_row, Ctx, Outcome};
use crate::config::SpectrumParams;
use crate::error::Result;
use crate::table::ResultTable;

pub(super) fn run(ctx: &Ctx, p: &SpectrumParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let cols = [
        "lambda",
        "reference_lambda",
        "residual",
        "gradient_error",
        "hessian_error",
    ];
    let mut table = ResultTable::new("spectrum", ctx.columns(&cols));
    let results = ctx.per_member(|m| -> specgeo_core::Result<[f64; 3]> {
        Ok([
            eigen_residual(&m.pair, p.quadrature_order)?,
            gradient_consistency_check(&m.pair, p.fd_samples, ctx.seed())?,
            hessian_consistency_check(&m.pair, p.fd_samples, ctx.seed())?,
        ])
    });

    let mut bad = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    let mut compared = 0;
    for (m, r) in ctx.members.iter().zip(results) {
        let lambda = m.pair.lambda();
        let reference = m.reference_lambda.unwrap_or(f64::NAN);
        let vals = match r {
            Ok(v) => v,
            Err(e) => {
                out.row_error(m, &e);
                table.push(ctx.row(m, [vec![lambda.into()], nan_row(4)].concat()));
                for b in &mut bad {
                    b.push(m.index);
                }
                continue;
            }
        };
        table.push(ctx.row(
            m,
            vec![
                lambda.into(),
                reference.into(),
                vals[0].into(),
                vals[1].into(),
                vals[2].into(),
            ],
        ));
        if let Some(acc) = &p.acceptance {
            let solver = m.label == "radial";
            let residual_bound = if solver {
                acc.residual_per_lambda * lambda
            } else {
                acc.residual
            };
            let fd = acc.fd_tolerance * (1.0 + lambda.sqrt());
            if !(vals[0] <= residual_bound) {
                bad[0].push(m.index);
            }
            if !(vals[1] <= fd) {
                bad[1].push(m.index);
            }
            if !(vals[2] <= fd * lambda.max(1.0)) {
                bad[2].push(m.index);
            }
            if let Some(r) = m.reference_lambda.filter(|r| *r <= acc.lambda_max) {
                compared += 1;
                if !((lambda - r).abs() <= acc.lambda_tolerance * r) {
                    bad[3].push(m.index);
                }
            }
        }
    }
    if let Some(acc) = &p.acceptance {
        let n = ctx.members.len();
        let names = [
            "eigen residual",
            "gradient consistency",
            "hessian consistency",
        ];
        for (name, b) in names.iter().zip(&bad) {
            out.check(
                name,
                b.is_empty(),
                format!(
                    "{} of {n} members within tolerance; failing {:?}",
                    n - b.len(),
                    b
                ),
            );
        }
        if compared > 0 {
            out.check(
                "reference spectrum",
                bad[3].is_empty(),
                format!(
                    "{} of {compared} eigenvalues with λ ≤ {} within relative {}",
                    compared - bad[3].len(),
                    acc.lambda_max,
                    acc.lambda_tolerance
                ),
            );
        }
    }
    out.tables.push(table);
    Ok(out)
}
