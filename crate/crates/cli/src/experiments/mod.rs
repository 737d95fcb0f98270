//! One runner per experiment kind. Rows are computed in parallel and assembled
//! in configuration order.

mod carleman;
mod growth;
mod measure;
mod spectrum;
mod uniqueness;

use rayon::prelude::*;
use specgeo_core::uniqueness::{critical_centers, halton_centers};
use specgeo_core::{ChartField, EigenPair, Point};

use crate::config::{CenterSpec, ExperimentConfig, ExperimentSpec, Member};
use crate::error::Result;
use crate::table::{Check, PlotRequest, ResultTable, Value};

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub tables: Vec<ResultTable>,
    pub plots: Vec<PlotRequest>,
    pub checks: Vec<Check>,
    pub row_errors: Vec<String>,
}

impl Outcome {
    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn row_error(&mut self, m: &Member, e: impl std::fmt::Display) {
        self.row_errors
            .push(format!("{} {}: {e}", m.label, m.index));
    }
}

pub(crate) fn dispatch(cfg: &ExperimentConfig) -> Result<Outcome> {
    let members = cfg.members()?;
    let ctx = Ctx { cfg, members };
    match &cfg.experiment {
        ExperimentSpec::Spectrum(p) => spectrum::run(&ctx, p),
        ExperimentSpec::CriticalMeasure(p) => measure::critical(&ctx, p),
        ExperimentSpec::NodalMeasure(p) => measure::nodal(&ctx, p),
        ExperimentSpec::Fit(p) => measure::fit(p),
        ExperimentSpec::Doubling(p) => uniqueness::doubling(&ctx, p),
        ExperimentSpec::ThreeSphere(p) => uniqueness::three_sphere(&ctx, p),
        ExperimentSpec::Elliptic(p) => uniqueness::elliptic(&ctx, p),
        ExperimentSpec::LowerBound(p) => uniqueness::lower_bound(&ctx, p),
        ExperimentSpec::Carleman(p) => carleman::run(p, cfg.seed),
        ExperimentSpec::Weight(p) => carleman::weight(p),
        ExperimentSpec::Growth(p) => growth::growth(&ctx, p),
        ExperimentSpec::DfCheck(p) => growth::df_check(&ctx, p),
    }
}

pub(crate) struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    members: Vec<Member>,
}

impl Ctx<'_> {
    /// Leading columns identifying a member: the family's own index name when
    /// there is one family, `family, index` otherwise.
    fn prefix_columns(&self) -> Vec<String> {
        match self.cfg.families.as_slice() {
            [one] => vec![one.members.index_name().into()],
            _ => vec!["family".into(), "index".into()],
        }
    }

    fn prefix(&self, m: &Member) -> Vec<Value> {
        if self.cfg.families.len() == 1 {
            vec![m.index.into()]
        } else {
            vec![self.family_name(m.family).into(), m.index.into()]
        }
    }

    fn family_name(&self, family: usize) -> String {
        let label = self.cfg.families[family].members.label();
        let clash = self
            .cfg
            .families
            .iter()
            .filter(|f| f.members.label() == label)
            .count()
            > 1;
        if clash {
            format!("{label}-{family}")
        } else {
            label.to_string()
        }
    }

    fn columns(&self, rest: &[&str]) -> Vec<String> {
        let mut c = self.prefix_columns();
        c.extend(rest.iter().map(|s| s.to_string()));
        c
    }

    fn row(&self, m: &Member, rest: Vec<Value>) -> Vec<Value> {
        let mut r = self.prefix(m);
        r.extend(rest);
        r
    }

    fn seed(&self) -> u64 {
        self.cfg.seed
    }

    /// Evaluates `f` for every member in parallel; results come back in
    /// member order.
    fn per_member<R: Send>(&self, f: impl Fn(&Member) -> R + Sync + Send) -> Vec<R> {
        self.members.par_iter().map(f).collect()
    }

    /// Family indices present, in order.
    fn families(&self) -> Vec<usize> {
        (0..self.cfg.families.len()).collect()
    }
}

/// Row of NaNs used when a member's computation failed.
fn nan_row(n: usize) -> Vec<Value> {
    vec![Value::Float(f64::NAN); n]
}

fn centers_for(pair: &EigenPair, spec: &CenterSpec) -> Vec<Point> {
    let mut c = halton_centers(pair.surface(), spec.count, spec.offset);
    if spec.include_critical {
        c.extend(critical_centers(pair));
    }
    c
}

/// Halton centers alone, for validation sweeps.
fn fresh_centers(pair: &EigenPair, count: usize, offset: u64) -> Vec<Point> {
    halton_centers(pair.surface(), count, offset)
}

fn fmt_range(r: [f64; 2]) -> String {
    format!("[{}, {}]", r[0], r[1])
}
