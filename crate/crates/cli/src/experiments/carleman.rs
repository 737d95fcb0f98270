use rayon::prelude::*;
use specgeo_core::carleman::{
    calibrate_carleman_constant, check_weight_admissibility, log_spaced, random_annulus_samples,
    Calibration, Potential, SampleRanges, SampledTestFunction, SweepCell, WeightParams,
};
use specgeo_core::Point;

use super::Outcome;
use crate::config::{CarlemanParams, WeightCheckParams, WeightQuantity};
use crate::error::Result;
use crate::table::ResultTable;

fn calibrate(p: &CarlemanParams, seed: u64, order: usize) -> Result<(Calibration, Vec<Potential>)> {
    let surface = p.surface.build()?;
    let params = WeightParams::new(p.epsilon, p.t0)?;
    let ranges = SampleRanges {
        delta: (p.sample_ranges.delta[0], p.sample_ranges.delta[1]),
        max_outer: p.sample_ranges.max_outer,
        min_width: p.sample_ranges.min_width,
        max_mode: p.sample_ranges.max_mode,
        max_degree: p.sample_ranges.max_degree,
    };
    let center = Point(p.center[0], p.center[1]);
    let fns = random_annulus_samples(&surface, center, p.samples, seed, &ranges)?;
    let samples = fns
        .par_iter()
        .map(|u| SampledTestFunction::new(u, &params, order))
        .collect::<specgeo_core::Result<Vec<_>>>()?;
    let mut potentials = Vec::new();
    for &l in &p.lambdas {
        potentials.push(Potential::Constant(l));
        if let Some(a) = p.modulation {
            potentials.push(Potential::Modulated {
                lambda: l,
                amplitude: a,
            });
        }
    }
    let taus: Vec<Vec<f64>> = potentials
        .iter()
        .map(|w| {
            let t = w.tau_min(&surface);
            log_spaced(t, p.tau_span * t, p.tau_steps)
        })
        .collect();
    let cal = calibrate_carleman_constant(&samples, &potentials, &taus, &surface)?;
    Ok((cal, potentials))
}

pub(super) fn run(p: &CarlemanParams, seed: u64) -> Result<Outcome> {
    let mut out = Outcome::default();
    let surface = p.surface.build()?;
    let (cal, potentials) = calibrate(p, seed, p.quadrature_order)?;

    let mut table = ResultTable::new(
        "carleman",
        [
            "potential",
            "lambda",
            "amplitude",
            "tau_min",
            "max_ratio",
            "max_ratio_ball",
            "cells",
            "failures",
        ]
        .map(String::from)
        .to_vec(),
    );
    for (i, w) in potentials.iter().enumerate() {
        let cells: Vec<_> = cal.cells.iter().filter(|c| c.potential == i).collect();
        let admissible = cells.iter().filter(|c| !c.below_threshold);
        let max = |f: fn(&SweepCell) -> f64| {
            admissible
                .clone()
                .map(|c| f(c))
                .filter(|x| x.is_finite())
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let (kind, lambda, amp) = match *w {
            Potential::Constant(l) => ("constant", l, 0.0),
            Potential::Modulated { lambda, amplitude } => ("modulated", lambda, amplitude),
        };
        table.push(vec![
            kind.into(),
            lambda.into(),
            amp.into(),
            w.tau_min(&surface).into(),
            max(|c| c.ratio).into(),
            max(|c| c.ratio_ball).into(),
            cells.len().into(),
            cells.iter().filter(|c| !c.ratio.is_finite()).count().into(),
        ]);
    }

    let mut orders = ResultTable::new(
        "orders",
        [
            "quadrature_order",
            "c_star",
            "c_star_ball",
            "failures",
            "argmax_sample",
            "argmax_tau",
        ]
        .map(String::from)
        .to_vec(),
    );
    let push_order = |t: &mut ResultTable, order: usize, c: &Calibration| {
        t.push(vec![
            order.into(),
            c.c_star.into(),
            c.c_star_ball.into(),
            c.failures.len().into(),
            c.argmax.sample.into(),
            c.argmax.tau.into(),
        ]);
    };
    push_order(&mut orders, p.quadrature_order, &cal);

    if let Some(acc) = &p.acceptance {
        let (fine, _) = calibrate(p, seed, 2 * p.quadrature_order)?;
        push_order(&mut orders, 2 * p.quadrature_order, &fine);
        let failures = cal.failures.len() + fine.failures.len();
        out.check(
            "carleman sweep evaluated",
            failures == 0,
            format!("{} cells, {failures} non-finite", cal.cells.len()),
        );
        out.check(
            "carleman annulus form",
            cal.c_star <= acc.c_star,
            format!("calibrated {:.6} <= recorded {}", cal.c_star, acc.c_star),
        );
        out.check(
            "carleman ball form",
            cal.c_star_ball <= acc.c_star_ball,
            format!(
                "calibrated {:.6} <= recorded {}",
                cal.c_star_ball, acc.c_star_ball
            ),
        );
        let drift = |a: f64, b: f64| (b - a).abs() / a;
        let (d, db) = (
            drift(cal.c_star, fine.c_star),
            drift(cal.c_star_ball, fine.c_star_ball),
        );
        out.check(
            "carleman order stability",
            d <= acc.stability && db <= acc.stability,
            format!(
                "relative change at order {}: {d:.3e} (annulus), {db:.3e} (ball)",
                2 * p.quadrature_order
            ),
        );
    }
    out.tables.push(table);
    out.tables.push(orders);
    Ok(out)
}

pub(super) fn weight(p: &WeightCheckParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut table = ResultTable::new(
        "weight",
        [
            "epsilon",
            "t0",
            "fprime_bounds",
            "divergence",
            "fprime_min",
            "fprime_lower_bound",
            "divergence_left",
        ]
        .map(String::from)
        .to_vec(),
    );
    let mut bad = Vec::new();
    for &[eps, t0] in &p.params {
        let w = WeightParams::new(eps, t0)?;
        let n = p.grid_points;
        let grid: Vec<f64> = (0..n)
            .map(|i| p.t_min + (t0 - p.t_min) * i as f64 / (n - 1) as f64)
            .collect();
        let a = check_weight_admissibility(&w, &grid)?;
        table.push(vec![
            eps.into(),
            t0.into(),
            a.fprime_bounds.into(),
            a.divergence.into(),
            a.fprime_min.into(),
            (1.0 - eps * (eps * t0).exp()).into(),
            a.divergence_left.into(),
        ]);
        if !(a.fprime_bounds && a.divergence) {
            bad.push(format!("({eps}, {t0})"));
        }
    }
    out.check(
        "weight admissibility",
        bad.is_empty(),
        format!(
            "{} of {} (epsilon, T0) pairs admissible on [{}, T0]; failing {bad:?}",
            p.params.len() - bad.len(),
            p.params.len(),
            p.t_min
        ),
    );

    let mut spots = ResultTable::new(
        "spot-checks",
        [
            "epsilon",
            "t",
            "quantity",
            "expected",
            "computed",
            "abs_error",
        ]
        .map(String::from)
        .to_vec(),
    );
    let mut spot_bad = 0;
    for s in &p.spot_checks {
        // The exact formulas do not involve T0; any admissible value will do.
        let w = WeightParams::new(s.epsilon, -1.0)?;
        let v = w.at_t(s.t);
        let (name, computed) = match s.quantity {
            WeightQuantity::F => ("f", v.f),
            WeightQuantity::Fprime => ("fprime", v.f1),
            WeightQuantity::Fsecond => ("fsecond", v.f2),
            WeightQuantity::Phi => ("phi", w.phi(s.t.exp())),
        };
        let err = (computed - s.expected).abs();
        if !(err <= s.tolerance) {
            spot_bad += 1;
        }
        spots.push(vec![
            s.epsilon.into(),
            s.t.into(),
            name.into(),
            s.expected.into(),
            computed.into(),
            err.into(),
        ]);
    }
    if !p.spot_checks.is_empty() {
        out.check(
            "weight spot checks",
            spot_bad == 0,
            format!(
                "{} of {} exact values reproduced",
                p.spot_checks.len() - spot_bad,
                p.spot_checks.len()
            ),
        );
    }
    out.tables.push(table);
    out.tables.push(spots);
    Ok(out)
}
