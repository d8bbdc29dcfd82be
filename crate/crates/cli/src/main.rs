//! `nlreg`: fit, evaluate, sweep and decompose lp-degree polynomial regressions.
//!
//! Exit status: 0 success, 2 input error, 3 rank deficiency or infeasible
//! data, 4 adaptive run that missed its tolerance.

mod experiment;

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use nlreg::adaptive::{adaptive_regression, merge_global, AdaptiveConfig, NodeStatus};
use nlreg::regression::{least_squares_fit, BasisKind};
use nlreg::sampling::{equispaced_grid, random_uniform, PointSet, TestFunction};
use nlreg::{AxisBox, DecompositionTree, GeneratingPoints, LpDegree, Model, MultiIndexSet};

#[derive(Parser)]
#[command(name = "nlreg", version, about = "Multivariate lp-degree polynomial regression")]
struct Cli {
    /// Seed for every random stream; overrides the seed of an experiment spec.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (fit, eval, experiment) or directory (adaptive).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the summary line on standard output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Least-squares fit of a CSV data set (`x1..xm,f`) and write the model JSON.
    Fit(FitArgs),
    /// Append model predictions to a CSV of points.
    Eval(EvalArgs),
    /// Run a JSON experiment spec and write one CSV row per cell.
    Experiment(ExperimentArgs),
    /// Oracle-based adaptive decomposition, with optional global merge.
    Adaptive(AdaptiveArgs),
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, short = 'n')]
    degree: usize,
    /// 1, 2, inf, or any positive exponent.
    #[arg(long, default_value = "2")]
    lp: LpDegree,
    #[arg(long, default_value = "lagrange-newton")]
    basis: BasisKind,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    points: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Args)]
struct AdaptiveArgs {
    /// CSV data set `x1..xm,f` on `[-1,1]^m`.
    #[arg(long, conflicts_with = "function", required_unless_present = "function")]
    data: Option<PathBuf>,
    /// Built-in function: f1, f2, f3, runge[:r[:m]].
    #[arg(long)]
    function: Option<String>,
    /// Equispaced grid resolution per axis for a built-in function.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    tolerance: f64,
    #[arg(long, default_value_t = 5)]
    depth: usize,
    #[arg(long, default_value = "2")]
    lp: LpDegree,
    /// Degree of the global merged polynomial; no merge when absent.
    #[arg(long)]
    merge_degree: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,6,8")]
    probe_degrees: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    max_degree: usize,
    /// Random probes for the reported residuals of a built-in function.
    #[arg(long, default_value_t = 1000)]
    probes: usize,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Feasibility(String),
    Tolerance(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Feasibility(_) => 3,
            CliError::Tolerance(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Feasibility(m) | CliError::Tolerance(m) => m,
        }
    }
}

impl From<nlreg::Error> for CliError {
    fn from(e: nlreg::Error) -> Self {
        match e {
            nlreg::Error::Underdetermined { .. } | nlreg::Error::RankDeficient { .. } | nlreg::Error::UnfittedLeaf { .. } => {
                CliError::Feasibility(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line());
        CliError::Input(format!("CSV error at line {line}: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// `out` or standard output.
fn sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn model_json(model: &Model, run: Value) -> CliResult<String> {
    let mut v = serde_json::to_value(model)?;
    v.as_object_mut().expect("model serializes to an object").insert("run".into(), run);
    Ok(serde_json::to_string_pretty(&v)?)
}

fn cmd_fit(cli: &Cli, a: &FitArgs) -> CliResult<()> {
    let data = PointSet::read_csv(read_file(&a.data)?.as_bytes(), true)?;
    let values = data.values.clone().expect("values required");
    let set = MultiIndexSet::generate(data.m, a.degree, a.lp)?;
    if data.len() < set.len() {
        return Err(nlreg::Error::Underdetermined { points: data.len(), terms: set.len() }.into());
    }
    let gen = GeneratingPoints::leja_chebyshev(&set.max_exponents()?);
    let fit = least_squares_fit(&set, &gen, &data.points, &values, a.basis)?;
    let path = cli.out.clone().unwrap_or_else(|| PathBuf::from("model.json"));
    let run = json!({
        "command": "fit",
        "data": a.data.display().to_string(),
        "m": data.m,
        "degree": a.degree,
        "lp": a.lp,
        "basis": a.basis,
        "seed": cli.seed,
    });
    let mut w = create(&path)?;
    writeln!(w, "{}", model_json(&fit.to_model(), run)?)?;
    w.flush()?;
    if !cli.quiet {
        let line = json!({
            "mu": fit.mu,
            "cond": finite(fit.cond),
            "rank": fit.rank,
            "terms": set.len(),
            "points": data.len(),
            "rank_deficient": fit.rank_deficient(),
            "model": path.display().to_string(),
        });
        println!("{line}");
    }
    if fit.rank_deficient() {
        return Err(CliError::Feasibility(format!("regression matrix is rank deficient: rank {} < {}", fit.rank, set.len())));
    }
    Ok(())
}

fn cmd_eval(cli: &Cli, a: &EvalArgs) -> CliResult<()> {
    let model = Model::from_json(&read_file(&a.model)?)?;
    let mut text = String::new();
    File::open(&a.points)
        .map_err(|e| CliError::Input(format!("{}: {e}", a.points.display())))?
        .read_to_string(&mut text)?;
    let mut out = sink(cli.out.as_deref())?;
    if text.trim().is_empty() {
        out.flush()?;
        return Ok(());
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    let m = header.iter().enumerate().take_while(|(i, h)| *h == format!("x{}", i + 1)).count();
    if m != model.dim() {
        return Err(CliError::Input(format!("dimension mismatch: model has m = {}, points have {m} coordinate columns", model.dim())));
    }
    let mut records = Vec::new();
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let x = (0..m)
            .map(|c| {
                rec.get(c)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| CliError::Input(format!("CSV error at line {line}: column x{} is not a number", c + 1)))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        points.push(x);
        records.push(rec);
    }
    let q = model.eval_many(&points)?;
    writeln!(out, "# model: {}", a.model.display())?;
    let mut wtr = csv::Writer::from_writer(out);
    let mut head: Vec<&str> = header.iter().collect();
    head.push("prediction");
    wtr.write_record(&head)?;
    for (rec, v) in records.iter().zip(q) {
        let mut row: Vec<String> = rec.iter().map(str::to_string).collect();
        row.push(format!("{v:?}"));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

fn cmd_experiment(cli: &Cli, a: &ExperimentArgs) -> CliResult<()> {
    let mut spec: experiment::ExperimentSpec = serde_json::from_str(&read_file(&a.spec)?)?;
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    spec.validate()?;
    let rows = experiment::run(&spec)?;
    let path = cli.out.clone().or_else(|| spec.output.clone());
    let mut out = sink(path.as_deref())?;
    writeln!(out, "# spec: {}", serde_json::to_string(&spec)?)?;
    let mut wtr = csv::Writer::from_writer(out);
    for row in &rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    if !cli.quiet && path.is_some() {
        let skipped = rows.iter().filter(|r| r.status == "skipped").count();
        println!("{}", json!({ "rows": rows.len(), "skipped": skipped, "seed": spec.seed }));
    }
    Ok(())
}

/// Row of `summary.csv`.
#[derive(serde::Serialize)]
struct SummaryRow {
    p: String,
    tolerance: f64,
    regressors: usize,
    coefficients: usize,
    cf: f64,
    data_points: usize,
    depth: usize,
    tolerance_violated: usize,
    data_starved: usize,
    residual: f64,
    merge_degree: Option<usize>,
    merged_terms: Option<usize>,
    merged_cf: Option<f64>,
    merged_residual: Option<f64>,
}

fn starved_boxes(tree: &DecompositionTree) -> Vec<String> {
    tree.nodes
        .iter()
        .filter(|n| n.status == NodeStatus::DataStarved)
        .map(|n| format!("[{:?}, {:?}] ({} points)", n.domain.lo(), n.domain.hi(), n.n_points))
        .collect()
}

fn cmd_adaptive(cli: &Cli, a: &AdaptiveArgs) -> CliResult<()> {
    let (data, source) = match (&a.data, &a.function) {
        (Some(path), _) => (PointSet::read_csv(read_file(path)?.as_bytes(), true)?, path.display().to_string()),
        (None, Some(tag)) => {
            let f = TestFunction::parse(tag, 2)?;
            let k = a.grid.unwrap_or(match f {
                TestFunction::PiecewisePoly => 15,
                _ => 200,
            });
            (equispaced_grid::<f64>(f.dim(), k)?.sample(&f)?, f.tag())
        }
        (None, None) => return Err(CliError::Input("either --data or --function is required".into())),
    };
    let values = data.values.clone().expect("values present");
    let m = data.m;
    let cfg = AdaptiveConfig {
        p: a.lp,
        tolerance: a.tolerance,
        max_depth: a.depth,
        probe_degrees: a.probe_degrees.clone(),
        max_degree: a.max_degree,
    };
    let root = AxisBox::reference(m);
    let tree = adaptive_regression(&root, &data.points, &values, &cfg)?;
    let summary = tree.summary();
    let seed = cli.seed.unwrap_or(0);
    let run = json!({ "command": "adaptive", "source": source, "config": cfg, "merge_degree": a.merge_degree, "seed": seed });

    // without a known function the residuals are measured on the data itself
    let (probe_points, truth): (Vec<Vec<f64>>, Vec<f64>) = match &a.function {
        Some(tag) if a.data.is_none() => {
            let f = TestFunction::parse(tag, 2)?;
            let probes = random_uniform::<f64>(m, a.probes, seed)?.points;
            let truth = probes.iter().map(|x| f.eval(x)).collect();
            (probes, truth)
        }
        _ => (data.points.clone(), values.clone()),
    };
    let max_err = |q: &[f64]| q.iter().zip(&truth).fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));

    let starved = starved_boxes(&tree);
    let residual = if starved.is_empty() { max_err(&tree.eval_many(&probe_points)?) } else { f64::NAN };

    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let mut tree_json: Value = serde_json::from_str(&tree.to_json()?)?;
    tree_json.as_object_mut().expect("tree serializes to an object").insert("run".into(), run.clone());
    fs::write(dir.join("tree.json"), serde_json::to_string_pretty(&tree_json)?)?;

    let mut merged_info = (None, None, None);
    let mut merge_err = None;
    if let Some(n) = a.merge_degree {
        let global = MultiIndexSet::generate(m, n, a.lp)?;
        match merge_global(&tree, &global) {
            Ok(merged) => {
                fs::write(dir.join("merged.json"), model_json(&merged.model, run.clone())?)?;
                let mres = max_err(&merged.eval_many(&probe_points)?);
                merged_info = (Some(global.len()), Some(summary.data_points as f64 / global.len() as f64), Some(mres));
            }
            Err(e) => merge_err = Some(CliError::from(e)),
        }
    }

    let row = SummaryRow {
        p: summary.p.clone(),
        tolerance: summary.tolerance,
        regressors: summary.regressors,
        coefficients: summary.coefficients,
        cf: summary.cf,
        data_points: summary.data_points,
        depth: summary.depth,
        tolerance_violated: summary.tolerance_violated,
        data_starved: summary.data_starved,
        residual,
        merge_degree: a.merge_degree,
        merged_terms: merged_info.0,
        merged_cf: merged_info.1,
        merged_residual: merged_info.2,
    };
    let mut w = create(&dir.join("summary.csv"))?;
    writeln!(w, "# run: {run}")?;
    let mut wtr = csv::Writer::from_writer(w);
    wtr.serialize(&row)?;
    wtr.flush()?;

    if !cli.quiet {
        println!("{}", serde_json::to_string(&row)?);
    }
    if !starved.is_empty() {
        return Err(CliError::Feasibility(format!("data-starved leaves: {}", starved.join("; "))));
    }
    if let Some(e) = merge_err {
        return Err(e);
    }
    if summary.tolerance_violated > 0 {
        return Err(CliError::Tolerance(format!(
            "{} leaves miss the tolerance {} at depth {}",
            summary.tolerance_violated, a.tolerance, a.depth
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(a) => cmd_fit(&cli, a),
        Command::Eval(a) => cmd_eval(&cli, a),
        Command::Experiment(a) => cmd_experiment(&cli, a),
        Command::Adaptive(a) => cmd_adaptive(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nlreg: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
