//! JSON experiment specs and the sweeps behind them.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nlreg::adaptive::{adaptive_regression, merge_global, AdaptiveConfig};
use nlreg::basis::lagrange_matrix;
use nlreg::diagnostics::lebesgue_estimate;
use nlreg::linalg::Factorization;
use nlreg::regression::{evaluate_regressor, least_squares_fit, BasisKind, RegressionBasis};
use nlreg::sampling::{equispaced_grid, halton, legendre_grid, random_uniform, sobol, TestFunction};
use nlreg::{AxisBox, GeneratingPoints, LpDegree, MultiIndexSet, PointSet};

use crate::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Lebesgue,
    Factor,
    Cond,
    Regress,
    Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Equispaced,
    Random,
    Legendre,
    Sobol,
    Halton,
}

impl Distribution {
    fn name(self) -> &'static str {
        match self {
            Distribution::Equispaced => "equispaced",
            Distribution::Random => "random",
            Distribution::Legendre => "legendre",
            Distribution::Sobol => "sobol",
            Distribution::Halton => "halton",
        }
    }
}

/// An explicit list, or an inclusive range with optional step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Degrees {
    List(Vec<usize>),
    Range { from: usize, to: usize, #[serde(default = "one")] step: usize },
}

fn one() -> usize {
    1
}

impl Degrees {
    fn values(&self) -> Vec<usize> {
        match self {
            Degrees::List(v) => v.clone(),
            Degrees::Range { from, to, step } => (*from..=*to).step_by((*step).max(1)).collect(),
        }
    }
}

fn default_p() -> Vec<LpDegree> {
    vec![LpDegree::Total, LpDegree::Euclidean, LpDegree::Maximum]
}

fn default_samples() -> usize {
    10_000
}

fn default_probes() -> usize {
    1000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    pub m: usize,
    #[serde(default)]
    pub degrees: Option<Degrees>,
    #[serde(default = "default_p")]
    pub p: Vec<LpDegree>,
    #[serde(default)]
    pub distributions: Vec<Distribution>,
    /// Grid resolution per axis; also the default `points_per_dim^m` count of sequences.
    #[serde(default)]
    pub points_per_dim: Option<usize>,
    /// Point count for random, Sobol and Halton data.
    #[serde(default)]
    pub points: Option<usize>,
    /// Uniform samples for Λ estimates.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Random probes for residuals.
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default)]
    pub function: Option<String>,
    #[serde(default = "default_basis")]
    pub basis: BasisKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub probe_degrees: Option<Vec<usize>>,
    #[serde(default)]
    pub max_degree: Option<usize>,
    #[serde(default)]
    pub merge_degree: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_basis() -> BasisKind {
    BasisKind::LagrangeNewton
}

impl ExperimentSpec {
    pub fn validate(&self) -> CliResult<()> {
        let missing = |what: &str| Err(CliError::Input(format!("{:?} experiment requires '{what}'", self.experiment)));
        if self.m == 0 {
            return Err(CliError::Input("m must be at least 1".into()));
        }
        if self.p.is_empty() {
            return missing("p");
        }
        let needs_data = matches!(self.experiment, ExperimentKind::Factor | ExperimentKind::Cond | ExperimentKind::Regress);
        if self.experiment != ExperimentKind::Adaptive && self.degrees.as_ref().is_none_or(|d| d.values().is_empty()) {
            return missing("degrees");
        }
        if needs_data && self.distributions.is_empty() {
            return missing("distributions");
        }
        if needs_data && self.points_per_dim.is_none() {
            return missing("points_per_dim");
        }
        if matches!(self.experiment, ExperimentKind::Regress | ExperimentKind::Adaptive) {
            match &self.function {
                None => return missing("function"),
                Some(tag) => {
                    let f = TestFunction::parse(tag, self.m)?;
                    if f.dim() != self.m {
                        return Err(CliError::Input(format!("function {} is {}-dimensional, spec has m = {}", f.tag(), f.dim(), self.m)));
                    }
                }
            }
        }
        if self.experiment == ExperimentKind::Adaptive {
            if self.tolerance.is_none() {
                return missing("tolerance");
            }
            if self.points_per_dim.is_none() {
                return missing("points_per_dim");
            }
        }
        Ok(())
    }
}

/// One output line; fields that do not apply to an experiment stay empty.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Row {
    pub experiment: String,
    pub m: usize,
    pub n: Option<usize>,
    pub p: String,
    pub distribution: String,
    pub points: usize,
    pub terms: Option<usize>,
    pub status: String,
    pub lebesgue: Option<f64>,
    pub cond: Option<f64>,
    pub s_inf_norm: Option<f64>,
    pub approx_factor: Option<f64>,
    pub mu: Option<f64>,
    pub residual: Option<f64>,
    pub rank: Option<usize>,
    pub regressors: Option<usize>,
    pub coefficients: Option<usize>,
    pub cf: Option<f64>,
    pub merged_residual: Option<f64>,
    /// Halton data is computed but was left out of the published plots.
    pub in_paper_plots: bool,
    pub seed: u64,
}

fn data_points(spec: &ExperimentSpec, d: Distribution) -> nlreg::Result<PointSet> {
    let k = spec.points_per_dim.unwrap_or(2);
    let count = spec.points.unwrap_or_else(|| k.saturating_pow(spec.m as u32));
    match d {
        Distribution::Equispaced => equispaced_grid(spec.m, k),
        Distribution::Legendre => legendre_grid(spec.m, k),
        Distribution::Random => random_uniform(spec.m, count, spec.seed),
        Distribution::Sobol => sobol(spec.m, count),
        Distribution::Halton => halton(spec.m, count),
    }
}

/// Seed of the residual probes, distinct from the data stream.
fn probe_seed(seed: u64) -> u64 {
    seed.wrapping_add(1)
}

struct Context {
    spec: ExperimentSpec,
    samples: Option<PointSet>,
    data: Vec<(Distribution, PointSet, Option<Vec<f64>>)>,
    probes: Option<(PointSet, Vec<f64>)>,
}

fn base_row(ctx: &Context, n: Option<usize>, p: LpDegree, distribution: &str, points: usize) -> Row {
    Row {
        experiment: format!("{:?}", ctx.spec.experiment).to_lowercase(),
        m: ctx.spec.m,
        n,
        p: p.to_string(),
        distribution: distribution.into(),
        points,
        status: "ok".into(),
        in_paper_plots: distribution != "halton",
        seed: ctx.spec.seed,
        ..Row::default()
    }
}

fn finite(v: f64) -> Option<f64> {
    Some(v)
}

fn lebesgue_cell(ctx: &Context, n: usize, p: LpDegree) -> nlreg::Result<Row> {
    let samples = ctx.samples.as_ref().expect("samples prepared");
    let set = MultiIndexSet::generate(ctx.spec.m, n, p)?;
    let gen = GeneratingPoints::leja_chebyshev(&set.max_exponents()?);
    let lam = lebesgue_estimate(&lagrange_matrix(&set, &gen)?, &samples.points)?;
    let mut row = base_row(ctx, Some(n), p, "uniform", samples.len());
    row.terms = Some(set.len());
    row.lebesgue = Some(lam);
    Ok(row)
}

fn data_cell(ctx: &Context, n: usize, p: LpDegree, di: usize) -> nlreg::Result<Row> {
    let (dist, data, values) = &ctx.data[di];
    let set = MultiIndexSet::generate(ctx.spec.m, n, p)?;
    let mut row = base_row(ctx, Some(n), p, dist.name(), data.len());
    row.terms = Some(set.len());
    if data.len() < set.len() {
        row.status = "skipped".into();
        return Ok(row);
    }
    let gen = GeneratingPoints::leja_chebyshev(&set.max_exponents()?);
    match ctx.spec.experiment {
        ExperimentKind::Cond => {
            let basis = RegressionBasis::new(&set, &gen, ctx.spec.basis)?;
            let fac = Factorization::new(basis.matrix(&data.points)?)?;
            row.cond = finite(fac.cond());
            row.rank = Some(fac.rank());
            if !fac.is_full_rank() {
                row.status = "rank-deficient".into();
            }
        }
        ExperimentKind::Factor => {
            let lag = lagrange_matrix(&set, &gen)?;
            let samples = ctx.samples.as_ref().expect("samples prepared");
            let lam = lebesgue_estimate(&lag, &samples.points)?;
            let fac = Factorization::new(nlreg::basis::eval_lagrange_basis(&lag, &data.points)?)?;
            row.lebesgue = Some(lam);
            row.cond = finite(fac.cond());
            row.rank = Some(fac.rank());
            match fac.pinv_inf_norm() {
                Ok(s) => {
                    row.s_inf_norm = Some(s);
                    row.approx_factor = Some(lam * s);
                }
                Err(_) => row.status = "rank-deficient".into(),
            }
        }
        ExperimentKind::Regress => {
            let values = values.as_ref().expect("values sampled");
            let fit = least_squares_fit(&set, &gen, &data.points, values, ctx.spec.basis)?;
            let (probes, truth) = ctx.probes.as_ref().expect("probes prepared");
            let q = evaluate_regressor(&fit, &probes.points)?;
            row.mu = Some(fit.mu);
            row.residual = Some(q.iter().zip(truth).fold(0.0f64, |e, (a, b)| e.max((a - b).abs())));
            row.cond = finite(fit.cond);
            row.rank = Some(fit.rank);
            if fit.rank_deficient() {
                row.status = "rank-deficient".into();
            }
        }
        _ => unreachable!("data cells only for factor, cond and regress"),
    }
    Ok(row)
}

fn adaptive_cell(ctx: &Context, p: LpDegree) -> nlreg::Result<Row> {
    let spec = &ctx.spec;
    let (_, data, values) = &ctx.data[0];
    let values = values.as_ref().expect("values sampled");
    let mut cfg = AdaptiveConfig::new(p, spec.tolerance.expect("validated"), spec.depth.unwrap_or(5));
    if let Some(pd) = &spec.probe_degrees {
        cfg.probe_degrees = pd.clone();
    }
    if let Some(md) = spec.max_degree {
        cfg.max_degree = md;
    }
    let tree = adaptive_regression(&AxisBox::reference(spec.m), &data.points, values, &cfg)?;
    let s = tree.summary();
    let mut row = base_row(ctx, spec.merge_degree, p, "equispaced", data.len());
    row.regressors = Some(s.regressors);
    row.coefficients = Some(s.coefficients);
    row.cf = Some(s.cf);
    let (probes, truth) = ctx.probes.as_ref().expect("probes prepared");
    let err = |q: Vec<f64>| q.iter().zip(truth).fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
    if s.data_starved > 0 {
        row.status = "data-starved".into();
        return Ok(row);
    }
    row.residual = Some(err(tree.eval_many(&probes.points)?));
    if s.tolerance_violated > 0 {
        row.status = "tolerance-violated".into();
    }
    if let Some(n) = spec.merge_degree {
        let global = MultiIndexSet::generate(spec.m, n, p)?;
        let merged = merge_global(&tree, &global)?;
        row.terms = Some(global.len());
        row.merged_residual = Some(err(merged.eval_many(&probes.points)?));
    }
    Ok(row)
}

/// Evaluates every cell; rows come back in spec order whatever the scheduling.
pub fn run(spec: &ExperimentSpec) -> CliResult<Vec<Row>> {
    let function = spec.function.as_deref().map(|t| TestFunction::parse(t, spec.m)).transpose()?;
    let samples = match spec.experiment {
        ExperimentKind::Lebesgue | ExperimentKind::Factor => Some(random_uniform(spec.m, spec.samples, spec.seed)?),
        _ => None,
    };
    let dists: Vec<Distribution> = match spec.experiment {
        ExperimentKind::Adaptive => vec![Distribution::Equispaced],
        ExperimentKind::Lebesgue => Vec::new(),
        _ => spec.distributions.clone(),
    };
    let mut data = Vec::new();
    for d in dists {
        let pts = data_points(spec, d)?;
        let values = function.as_ref().map(|f| pts.points.iter().map(|x| f.eval(x)).collect());
        data.push((d, pts, values));
    }
    let probes = match &function {
        Some(f) => {
            let pr = random_uniform(spec.m, spec.probes, probe_seed(spec.seed))?;
            let truth = pr.points.iter().map(|x| f.eval(x)).collect();
            Some((pr, truth))
        }
        None => None,
    };
    let ctx = Context { spec: spec.clone(), samples, data, probes };

    let degrees = spec.degrees.as_ref().map(Degrees::values).unwrap_or_default();
    let mut cells: Vec<(usize, LpDegree, usize)> = Vec::new();
    match spec.experiment {
        ExperimentKind::Lebesgue => {
            for &n in &degrees {
                for &p in &spec.p {
                    cells.push((n, p, 0));
                }
            }
        }
        ExperimentKind::Adaptive => cells.extend(spec.p.iter().map(|&p| (0, p, 0))),
        _ => {
            for di in 0..ctx.data.len() {
                for &n in &degrees {
                    for &p in &spec.p {
                        cells.push((n, p, di));
                    }
                }
            }
        }
    }
    cells
        .par_iter()
        .map(|&(n, p, di)| {
            let r = match spec.experiment {
                ExperimentKind::Lebesgue => lebesgue_cell(&ctx, n, p),
                ExperimentKind::Adaptive => adaptive_cell(&ctx, p),
                _ => data_cell(&ctx, n, p, di),
            };
            r.map_err(CliError::from)
        })
        .collect()
}
