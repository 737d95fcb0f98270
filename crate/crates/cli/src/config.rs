//! Strict JSON experiment configuration.
//!
//! Every physics-relevant number must be spelled out; only the `output` block
//! has defaults.

use serde::{Deserialize, Serialize};
use specgeo_core::spectra::{
    revolution_eigenpair_on, sphere_zonal_eigenpair, torus_eigenpair, torus_product_eigenpair,
};
use specgeo_core::{EigenPair, ModelSurface, Profile};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub families: Vec<FamilySpec>,
    pub experiment: ExperimentSpec,
    /// Seed for every random draw of the run; `SPECGEO_SEED` overrides it.
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_true")]
    pub plots: bool,
}

fn default_dir() -> String {
    "results".into()
}

fn default_true() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: default_dir(),
            plots: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Torus {
        periods: [f64; 2],
    },
    Sphere {
        radius: f64,
    },
    /// Profile `radius · (sin s + bulge · sin³ s)`.
    Revolution {
        radius: f64,
        bulge: f64,
    },
}

impl SurfaceSpec {
    pub fn build(&self) -> Result<ModelSurface> {
        Ok(match *self {
            SurfaceSpec::Torus { periods } => ModelSurface::flat_torus(periods[0], periods[1])?,
            SurfaceSpec::Sphere { radius } => ModelSurface::sphere(radius)?,
            SurfaceSpec::Revolution { radius, bulge } => {
                ModelSurface::revolution(Profile::perturbed(radius, bulge)?)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MemberSpec {
    /// `sin(n·direction·ω + phase)` for `n` in `range` (inclusive).
    Wave {
        direction: [i64; 2],
        range: [i64; 2],
        phase: f64,
    },
    /// `sin(k₁ω₁x₁) sin(k₂ω₂x₂)` for each listed `k`.
    Product { k: Vec<[i64; 2]> },
    /// `P_l(cos θ)` for `l` in `range` (inclusive).
    Zonal { range: [usize; 2] },
    /// Separated modes `cos(mφ) g_j(s)` for `j` in `range` (inclusive).
    Radial {
        m: u32,
        range: [usize; 2],
        grid_size: usize,
    },
}

impl MemberSpec {
    pub fn index_name(&self) -> &'static str {
        match self {
            MemberSpec::Wave { .. } => "k",
            MemberSpec::Product { .. } => "n",
            MemberSpec::Zonal { .. } => "l",
            MemberSpec::Radial { .. } => "j",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            MemberSpec::Wave { .. } => "wave",
            MemberSpec::Product { .. } => "product",
            MemberSpec::Zonal { .. } => "zonal",
            MemberSpec::Radial { .. } => "radial",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub surface: SurfaceSpec,
    pub members: MemberSpec,
}

/// One eigenpair of a configured family.
#[derive(Clone, Debug)]
pub struct Member {
    pub family: usize,
    pub label: &'static str,
    pub index: i64,
    pub pair: EigenPair,
    /// Closed-form eigenvalue where one is known independently of the solver.
    pub reference_lambda: Option<f64>,
}

fn range_of<T: Copy + PartialOrd>(r: [T; 2], key: &str) -> Result<[T; 2]> {
    if r[0] > r[1] {
        return Err(CliError::invalid(key, "range must be ascending"));
    }
    Ok(r)
}

impl FamilySpec {
    pub fn members(&self, family: usize) -> Result<Vec<Member>> {
        let surface = self.surface.build()?;
        let label = self.members.label();
        let key = format!("families[{family}].members");
        let mk = |index: i64, pair: EigenPair, reference_lambda: Option<f64>| Member {
            family,
            label,
            index,
            pair,
            reference_lambda,
        };
        let mismatch = || {
            CliError::invalid(
                &key,
                format!("member kind `{label}` does not live on this surface"),
            )
        };
        let mut out = Vec::new();
        match (&self.members, self.surface) {
            (
                MemberSpec::Wave {
                    direction,
                    range,
                    phase,
                },
                SurfaceSpec::Torus { .. },
            ) => {
                let [a, b] = range_of(*range, &key)?;
                for n in a..=b {
                    let k = [n * direction[0], n * direction[1]];
                    out.push(mk(n, torus_eigenpair(&surface, k, *phase)?, None));
                }
            }
            (MemberSpec::Product { k }, SurfaceSpec::Torus { .. }) => {
                for (i, k) in k.iter().enumerate() {
                    out.push(mk(
                        i as i64 + 1,
                        torus_product_eigenpair(&surface, *k)?,
                        None,
                    ));
                }
            }
            (MemberSpec::Zonal { range }, SurfaceSpec::Sphere { .. }) => {
                let [a, b] = range_of(*range, &key)?;
                for l in a..=b {
                    out.push(mk(l as i64, sphere_zonal_eigenpair(&surface, l)?, None));
                }
            }
            (
                MemberSpec::Radial {
                    m,
                    range,
                    grid_size,
                },
                SurfaceSpec::Revolution { radius, bulge },
            ) => {
                let [a, b] = range_of(*range, &key)?;
                let profile = Profile::perturbed(radius, bulge)?;
                for j in a..=b {
                    let pair = revolution_eigenpair_on(profile, *m, j, *grid_size)?;
                    // With no bulge the surface is a round sphere and mode j of
                    // angular order m has degree l = m + j − 1 (m > 0) or j.
                    let reference = (bulge == 0.0).then(|| {
                        let l = if *m == 0 { j } else { *m as usize + j - 1 } as f64;
                        l * (l + 1.0) / (radius * radius)
                    });
                    out.push(mk(j as i64, pair, reference));
                }
            }
            _ => return Err(mismatch()),
        }
        Ok(out)
    }
}

/// Ball-center sampling: low-discrepancy centers plus, optionally, the known
/// critical points of each eigenfunction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterSpec {
    pub count: usize,
    pub offset: u64,
    pub include_critical: bool,
}

/// Fresh centers on which a calibrated constant is re-checked.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationSpec {
    pub count: usize,
    pub offset: u64,
    /// Relative slack on the calibrated constant.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentSpec {
    Spectrum(SpectrumParams),
    Doubling(DoublingParams),
    ThreeSphere(ThreeSphereParams),
    Carleman(CarlemanParams),
    CriticalMeasure(CriticalMeasureParams),
    NodalMeasure(NodalMeasureParams),
    Growth(GrowthParams),
    DfCheck(DfCheckParams),
    Fit(FitParams),
    Elliptic(EllipticParams),
    LowerBound(LowerBoundParams),
    Weight(WeightCheckParams),
}

impl ExperimentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentSpec::Spectrum(_) => "spectrum",
            ExperimentSpec::Doubling(_) => "doubling",
            ExperimentSpec::ThreeSphere(_) => "three-sphere",
            ExperimentSpec::Carleman(_) => "carleman",
            ExperimentSpec::CriticalMeasure(_) => "critical-measure",
            ExperimentSpec::NodalMeasure(_) => "nodal-measure",
            ExperimentSpec::Growth(_) => "growth",
            ExperimentSpec::DfCheck(_) => "df-check",
            ExperimentSpec::Fit(_) => "fit",
            ExperimentSpec::Elliptic(_) => "elliptic",
            ExperimentSpec::LowerBound(_) => "lower-bound",
            ExperimentSpec::Weight(_) => "weight",
        }
    }

    fn needs_families(&self) -> bool {
        !matches!(
            self,
            ExperimentSpec::Carleman(_) | ExperimentSpec::Fit(_) | ExperimentSpec::Weight(_)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    pub quadrature_order: usize,
    pub fd_samples: usize,
    pub acceptance: Option<SpectrumAcceptance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumAcceptance {
    /// Residual bound for closed-form pairs.
    pub residual: f64,
    /// Residual bound per unit λ for solver-computed pairs.
    pub residual_per_lambda: f64,
    /// Finite-difference bound per `(1 + √λ)`; scaled by `max(1, λ)` for the Hessian.
    pub fd_tolerance: f64,
    /// Relative eigenvalue error against the closed form.
    pub lambda_tolerance: f64,
    /// Eigenvalue comparison is restricted to `λ ≤ lambda_max`.
    pub lambda_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoublingParams {
    pub centers: CenterSpec,
    pub radii: Vec<f64>,
    pub quadrature_order: usize,
    pub validation: Option<ValidationSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeSphereParams {
    pub centers: CenterSpec,
    pub radii: Vec<f64>,
    pub epsilon: f64,
    pub t0: f64,
    pub quadrature_order: usize,
    pub validation: Option<ValidationSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRangeSpec {
    pub delta: [f64; 2],
    pub max_outer: f64,
    pub min_width: f64,
    pub max_mode: u32,
    pub max_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarlemanParams {
    pub surface: SurfaceSpec,
    pub center: [f64; 2],
    pub epsilon: f64,
    pub t0: f64,
    pub samples: usize,
    pub sample_ranges: SampleRangeSpec,
    /// Constant potentials `W = λ` and, for each, the modulated `λ(1 + a sin x₁)`.
    pub lambdas: Vec<f64>,
    pub modulation: Option<f64>,
    /// τ runs over `tau_steps` log-spaced values from `τ_min(W)` to `tau_span · τ_min(W)`.
    pub tau_steps: usize,
    pub tau_span: f64,
    pub quadrature_order: usize,
    pub acceptance: Option<CarlemanAcceptance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarlemanAcceptance {
    /// Recorded constant for the annulus form (with the `τδ` term).
    pub c_star: f64,
    /// Recorded constant for the ball form.
    pub c_star_ball: f64,
    /// Relative change allowed when the quadrature order is doubled.
    pub stability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalMeasureParams {
    pub grid: [usize; 2],
    pub delta0: f64,
    pub halvings: usize,
    pub acceptance: Option<CriticalAcceptance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalAcceptance {
    /// Relative error against the closed-form length.
    pub closed_form_tolerance: f64,
    /// Log-log slope interval for the measure against λ.
    pub slope: Option<[f64; 2]>,
    pub r_squared_min: Option<f64>,
    /// Interval for the linear slope of `measure / normalizer` against √λ.
    pub linear_slope: Option<[f64; 2]>,
    pub linear_normalizer: Option<f64>,
    /// Require the exact number of degenerate critical latitudes.
    pub latitude_count: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodalMeasureParams {
    pub grid: [usize; 2],
    pub acceptance: Option<NodalAcceptance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodalAcceptance {
    pub closed_form_tolerance: f64,
    /// Interval for each family's log-log slope against λ.
    pub slope: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthParams {
    pub center: [f64; 2],
    pub complex_grid: usize,
    pub taylor_order: usize,
    pub quadrature_order: usize,
    pub acceptance: Option<GrowthAcceptance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthAcceptance {
    /// Upper bound for `alpha_growth / √λ` over the whole family.
    pub ratio_max: f64,
    /// From this index on, `alpha_growth / √λ` must lie within `tolerance` of `target`.
    pub asymptotic_from: i64,
    pub target: f64,
    pub tolerance: f64,
    /// Relative agreement with the closed-form exponent, when one is known.
    pub closed_form_tolerance: f64,
    pub taylor_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfCheckParams {
    pub center: [f64; 2],
    pub complex_grid: usize,
    pub window_cells: usize,
    pub delta0: f64,
    pub halvings: usize,
    pub acceptance: Option<DfAcceptance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfAcceptance {
    /// Recorded bound on `measure / alpha_growth` over the family.
    pub ratio_max: f64,
    /// Relative change of the largest ratio allowed under window refinement.
    pub refinement_tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitParams {
    /// `(λ, measure)` pairs.
    pub samples: Vec<[f64; 2]>,
    pub acceptance: Option<FitAcceptance>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitAcceptance {
    pub slope: [f64; 2],
    pub r_squared_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticParams {
    pub centers: CenterSpec,
    pub radii: Vec<f64>,
    pub shrink: Vec<f64>,
    pub quadrature_order: usize,
    pub validation: Option<ValidationSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundParams {
    pub centers: CenterSpec,
    pub radii: Vec<f64>,
    pub quadrature_order: usize,
    pub validation: Option<ValidationSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightCheckParams {
    /// `(ε, T0)` pairs to check.
    pub params: Vec<[f64; 2]>,
    /// Admissibility is checked on `grid_points` equispaced `t` in `[t_min, T0]`.
    pub t_min: f64,
    pub grid_points: usize,
    #[serde(default)]
    pub spot_checks: Vec<SpotCheck>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightQuantity {
    F,
    Fprime,
    Fsecond,
    /// `φ(r)` at `r = e^t`.
    Phi,
}

/// An exact weight value to reproduce.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpotCheck {
    pub epsilon: f64,
    pub t: f64,
    pub quantity: WeightQuantity,
    pub expected: f64,
    pub tolerance: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(CliError::from_json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Checks that do not need any numerics; operation preconditions are
    /// re-checked (and reported with their parameter name) when the run starts.
    pub fn validate(&self) -> Result<()> {
        if self.experiment.needs_families() && self.families.is_empty() {
            return Err(CliError::invalid(
                "families",
                format!(
                    "experiment `{}` needs at least one family",
                    self.experiment.name()
                ),
            ));
        }
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::invalid(key, format!("must be positive, got {v}")))
            }
        };
        let nonempty = |key: &str, n: usize| {
            if n > 0 {
                Ok(())
            } else {
                Err(CliError::invalid(key, "must not be empty"))
            }
        };
        let radii = |key: &str, r: &[f64]| {
            nonempty(key, r.len())?;
            r.iter().try_for_each(|&v| positive(key, v))
        };
        match &self.experiment {
            ExperimentSpec::Doubling(p) => {
                radii("experiment.radii", &p.radii)?;
                nonempty("experiment.quadrature_order", p.quadrature_order)?;
            }
            ExperimentSpec::ThreeSphere(p) => {
                radii("experiment.radii", &p.radii)?;
                nonempty("experiment.quadrature_order", p.quadrature_order)?;
            }
            ExperimentSpec::Elliptic(p) => {
                radii("experiment.radii", &p.radii)?;
                nonempty("experiment.shrink", p.shrink.len())?;
                for &a in &p.shrink {
                    if !(a > 0.0 && a < 1.0) {
                        return Err(CliError::invalid(
                            "experiment.shrink",
                            format!("values must lie in (0, 1), got {a}"),
                        ));
                    }
                }
            }
            ExperimentSpec::LowerBound(p) => radii("experiment.radii", &p.radii)?,
            ExperimentSpec::Carleman(p) => {
                nonempty("experiment.samples", p.samples)?;
                nonempty("experiment.lambdas", p.lambdas.len())?;
                nonempty("experiment.tau_steps", p.tau_steps)?;
                if !(p.tau_span >= 1.0) {
                    return Err(CliError::invalid(
                        "experiment.tau_span",
                        "must be at least 1",
                    ));
                }
            }
            ExperimentSpec::CriticalMeasure(p) => {
                positive("experiment.delta0", p.delta0)?;
                if p.halvings < 2 {
                    return Err(CliError::invalid(
                        "experiment.halvings",
                        "need at least 2 halvings for the extrapolation",
                    ));
                }
            }
            ExperimentSpec::DfCheck(p) => positive("experiment.delta0", p.delta0)?,
            ExperimentSpec::Fit(p) => {
                if p.samples.len() < 3 {
                    return Err(CliError::invalid(
                        "experiment.samples",
                        "need at least 3 samples",
                    ));
                }
            }
            ExperimentSpec::Weight(p) => {
                nonempty("experiment.params", p.params.len())?;
                if p.grid_points < 100 {
                    return Err(CliError::invalid(
                        "experiment.grid_points",
                        "need at least 100 points",
                    ));
                }
            }
            ExperimentSpec::Spectrum(p) => {
                nonempty("experiment.fd_samples", p.fd_samples)?;
            }
            ExperimentSpec::NodalMeasure(_) | ExperimentSpec::Growth(_) => {}
        }
        Ok(())
    }

    /// All members of all families, in configuration order.
    pub fn members(&self) -> Result<Vec<Member>> {
        let mut out = Vec::new();
        for (i, f) in self.families.iter().enumerate() {
            out.extend(f.members(i)?);
        }
        Ok(out)
    }
}
