//! Command definitions and their implementations.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use evdep::dependence::{chi_u_empirical_at, model_chi, Estimate};
use evdep::inference::fit::{fit_data, FitConfig, FitResult, TransformKind};
use evdep::inference::rect::{rect_prob, RectRegion};
use evdep::inference::transform::{rank_transform, semiparametric_transform, MarginTransform};
use evdep::inference::{loglik_surface, sv_diagnostic, SvDiagnostic};
use evdep::numerics::stats::{norm_cdf, norm_quantile};
use evdep::simulate::experiment::{run_experiment, table1_mini, ExperimentReport, ScenarioConfig, CSV_HEADER};
use evdep::simulate::samplers::{stream_rng, Structure};
use evdep::{Copula, ModelParams, UniformSample};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::io::{
    format_csv, format_surface, parse_csv, parse_grid, read_text, select_pairs, to_json, write_text, Surface, SCHEMA_VERSION,
};

#[derive(Debug, Parser)]
#[command(name = "evdep", version, about = "Fit and explore a copula spanning asymptotic dependence and independence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit (λ, α) by censored maximum likelihood and write a JSON artifact.
    Fit(FitArgs),
    /// Draw a sample on the uniform scale.
    Simulate(SimulateArgs),
    /// Probability of a copula-scale rectangle under a fitted model.
    Prob(ProbArgs),
    /// Empirical and fitted χ(u), χ̄(u) on a threshold grid.
    Diagnose(DiagnoseArgs),
    /// Negative log-likelihood on a (λ, α) grid.
    Surface(SurfaceArgs),
    /// Replicate simulation study.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    Empirical,
    Semiparametric,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV input, `-` for stdin. A non-numeric first row is a header.
    pub input: PathBuf,
    /// Two 1-based columns to use, as `i,j`.
    #[arg(long, default_value = "1,2")]
    pub columns: String,
    #[arg(long, value_enum, default_value = "empirical")]
    pub transform: TransformArg,
    /// Threshold probability for the GP tails of the semiparametric transform.
    #[arg(long, default_value_t = 0.9)]
    pub gp_threshold: f64,
}

impl DataArgs {
    fn transform_kind(&self) -> Result<TransformKind, CliError> {
        Ok(match self.transform {
            TransformArg::Empirical => TransformKind::EmpiricalRanks,
            TransformArg::Semiparametric => {
                if !(self.gp_threshold > 0.0 && self.gp_threshold < 1.0) {
                    return Err(CliError::Usage(format!("--gp-threshold must lie in (0, 1), got {}", self.gp_threshold)));
                }
                TransformKind::SemiparametricGp { threshold_prob: self.gp_threshold }
            }
        })
    }

    fn columns(&self) -> Result<[usize; 2], CliError> {
        let bad = || CliError::Usage(format!("--columns needs two 1-based indices `i,j`, got {:?}", self.columns));
        let v: Vec<usize> = self.columns.split(',').map(|c| c.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
        <[usize; 2]>::try_from(v).map_err(|_| bad())
    }

    fn pairs(&self) -> Result<Vec<[f64; 2]>, CliError> {
        let columns = self.columns()?;
        let table = parse_csv(&read_text(&self.input)?)?;
        select_pairs(&table, columns)
    }

    /// Data on the copula scale, with the marginal fits when GP tails were used.
    fn uniform(&self) -> Result<(UniformSample, Option<[MarginTransform; 2]>), CliError> {
        let data = self.pairs()?;
        let data_err = |e: evdep::Error| CliError::Data(e.to_string());
        match self.transform_kind()? {
            TransformKind::EmpiricalRanks => Ok((rank_transform(&data).map_err(data_err)?, None)),
            TransformKind::SemiparametricGp { threshold_prob } => {
                let t = semiparametric_transform(&data, threshold_prob).map_err(data_err)?;
                Ok((t.sample, Some(t.margins)))
            }
        }
    }
}

fn check_prob(name: &str, v: f64) -> Result<(), CliError> {
    if !(v > 0.0 && v < 1.0) {
        return Err(CliError::Usage(format!("{name} must lie in (0, 1), got {v}")));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0.95)]
    pub censor_u: f64,
    /// Confidence level of the profile-likelihood intervals.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Skip the profile-likelihood intervals.
    #[arg(long)]
    pub no_ci: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// JSON artifact written by `fit` and read by `prob`, `diagnose`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitArtifact {
    pub schema_version: u32,
    pub command: String,
    pub status: String,
    pub input: String,
    pub columns: [usize; 2],
    pub transform: TransformKind,
    pub margins: Option<[MarginTransform; 2]>,
    pub neg_loglik: f64,
    #[serde(flatten)]
    pub fit: FitResult,
}

/// Written instead of an artifact when a command fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusReport {
    pub schema_version: u32,
    pub command: String,
    pub status: String,
    pub error_kind: String,
    pub message: String,
}

impl StatusReport {
    pub fn failure(command: &str, e: &CliError) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            status: "error".into(),
            error_kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

pub fn read_fit(path: &Path) -> Result<FitArtifact, CliError> {
    let art: FitArtifact = serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Data(format!("{}: not a fit artifact: {e}", path.display())))?;
    if art.schema_version != SCHEMA_VERSION {
        return Err(CliError::Data(format!("unsupported schema_version {}", art.schema_version)));
    }
    art.fit.params_hat.validate().map_err(|e| CliError::Data(e.to_string()))?;
    Ok(art)
}

fn cmd_fit(a: &FitArgs) -> Result<(), CliError> {
    check_prob("--censor-u", a.censor_u)?;
    check_prob("--level", a.level)?;
    let config = FitConfig {
        censor_u: a.censor_u,
        transform: a.data.transform_kind()?,
        ci_level: (!a.no_ci).then_some(a.level),
        ..FitConfig::default()
    };
    let data = a.data.pairs()?;
    if data.len() < 2 {
        return Err(CliError::Data(format!("need at least 2 rows, found {}", data.len())));
    }
    let (fit, margins) = fit_data(&data, &config)?;
    let art = FitArtifact {
        schema_version: SCHEMA_VERSION,
        command: "fit".into(),
        status: if fit.converged { "ok".into() } else { "not-converged".into() },
        input: a.data.input.display().to_string(),
        columns: a.data.columns()?,
        transform: config.transform,
        margins,
        neg_loglik: -fit.loglik,
        fit,
    };
    write_text(a.out.as_deref(), &to_json(&art)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StructureArg {
    NewModel,
    Logistic,
    InvertedLogistic,
    Gaussian,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, required_unless_present = "demo")]
    pub structure: Option<StructureArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub dep: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// Synthetic three-column data set: columns 1–2 asymptotically
    /// dependent, the other pairs asymptotically independent.
    #[arg(long, conflicts_with = "structure")]
    pub demo: bool,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn need(v: Option<f64>, flag: &str, kind: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--structure {kind} requires --{flag}")))
}

impl SimulateArgs {
    fn structure(&self) -> Result<Structure, CliError> {
        let s = match self.structure.expect("structure or demo") {
            StructureArg::NewModel => Structure::NewModel {
                lambda: need(self.lambda, "lambda", "new-model")?,
                alpha: need(self.alpha, "alpha", "new-model")?,
            },
            StructureArg::Logistic => Structure::Logistic { dep: need(self.dep, "dep", "logistic")? },
            StructureArg::InvertedLogistic => Structure::InvertedLogistic { dep: need(self.dep, "dep", "inverted-logistic")? },
            StructureArg::Gaussian => Structure::GaussianCopula { rho: need(self.rho, "rho", "gaussian")? },
        };
        s.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(s)
    }
}

/// Demo data on unit-exponential margins: `(X1, X2)` logistic with
/// `dep = 0.5`, and `X3` Gaussian-linked to `X1` with correlation 0.6.
pub fn demo_rows(n: usize, seed: u64) -> Result<Vec<Vec<f64>>, CliError> {
    let base = Structure::Logistic { dep: 0.5 }.sample(n, seed, 0)?;
    let mut rng = stream_rng(seed, 1);
    let rho: f64 = 0.6;
    let s = (1.0 - rho * rho).sqrt();
    let exp_margin = |u: f64| -(-u).ln_1p();
    Ok(base
        .pairs()
        .iter()
        .map(|p| {
            let e: f64 = StandardNormal.sample(&mut rng);
            let z3 = rho * norm_quantile(p[0]) + s * e;
            let u3 = norm_cdf(z3).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
            vec![exp_margin(p[0]), exp_margin(p[1]), exp_margin(u3)]
        })
        .collect())
}

fn cmd_simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let text = if a.demo {
        format_csv(&["x1", "x2", "x3"], &demo_rows(a.n, a.seed)?)
    } else {
        let sample = a.structure()?.sample(a.n, a.seed, 0)?;
        let rows: Vec<Vec<f64>> = sample.pairs().iter().map(|p| p.to_vec()).collect();
        format_csv(&["u1", "u2"], &rows)
    };
    write_text(a.out.as_deref(), &text)
}

#[derive(Debug, Args)]
pub struct ProbArgs {
    /// Fit artifact from `evdep fit`.
    #[arg(long)]
    pub fit: PathBuf,
    /// `set1` … `set5` or `whole`.
    #[arg(long, conflicts_with = "region", required_unless_present = "region")]
    pub preset: Option<String>,
    /// `u1,v1,u2,v2` on the copula scale.
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbReport {
    pub schema_version: u32,
    pub command: String,
    pub region: RectRegion,
    pub preset: Option<String>,
    pub params: ModelParams,
    pub prob: f64,
    pub raw: f64,
    /// `"below-2eps"` when the estimate was negative or below twice machine
    /// epsilon and is reported as zero.
    pub flag: Option<String>,
}

fn cmd_prob(a: &ProbArgs) -> Result<(), CliError> {
    let region = match (&a.preset, &a.region) {
        (Some(name), _) => RectRegion::preset(name).ok_or_else(|| CliError::Usage(format!("unknown preset {name:?}")))?,
        (None, Some(spec)) => {
            let r = parse_grid(spec)?;
            if r.len() != 4 || spec.contains(':') {
                return Err(CliError::Usage(format!("--region needs `u1,v1,u2,v2`, got {spec:?}")));
            }
            RectRegion::new(r[0], r[1], r[2], r[3]).map_err(|e| CliError::Usage(e.to_string()))?
        }
        (None, None) => return Err(CliError::Usage("give --preset or --region".into())),
    };
    let art = read_fit(&a.fit)?;
    let params = art.fit.params_hat;
    let p = rect_prob(&params, &region)?;
    let report = ProbReport {
        schema_version: SCHEMA_VERSION,
        command: "prob".into(),
        region,
        preset: a.preset.clone(),
        params,
        prob: p.prob,
        raw: p.raw,
        flag: p.below_2eps.then(|| "below-2eps".to_string()),
    };
    write_text(a.out.as_deref(), &to_json(&report)?)
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Fit artifact; adds model curves and the radius/angle check.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    /// Thresholds as `start:stop:count` or a comma list.
    #[arg(long, default_value = "0.9:0.99:19")]
    pub u_grid: String,
    /// Level of the empirical confidence bands.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0.9)]
    pub radial_quantile: f64,
    /// Table output (CSV); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON output of the radius/angle check (requires --fit).
    #[arg(long, requires = "fit")]
    pub sv_out: Option<PathBuf>,
}

/// Column names of the diagnose table.
pub const DIAGNOSE_HEADER: [&str; 12] = [
    "u", "n", "n_conditioning", "n_joint", "chi", "chi_lower", "chi_upper", "chibar", "chibar_lower", "chibar_upper",
    "chi_model", "chibar_model",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvReport {
    pub schema_version: u32,
    pub command: String,
    pub params: ModelParams,
    pub radial_quantile: f64,
    pub n_retained: usize,
    #[serde(flatten)]
    pub diagnostic: SvDiagnostic,
}

fn cell(v: Option<f64>) -> String {
    v.map(evdep::simulate::experiment::fmt17).unwrap_or_default()
}

fn estimate_cells(e: &Estimate) -> [String; 3] {
    [cell(e.value), cell(e.lower), cell(e.upper)]
}

fn cmd_diagnose(a: &DiagnoseArgs) -> Result<(), CliError> {
    let grid = parse_grid(&a.u_grid)?;
    if let Some(u) = grid.iter().find(|u| !(**u > 0.0 && **u < 1.0)) {
        return Err(CliError::Usage(format!("u-grid values must lie in (0, 1), got {u}")));
    }
    check_prob("--level", a.level)?;
    let (sample, _) = a.data.uniform()?;
    let fit = a.fit.as_deref().map(read_fit).transpose()?;
    let copula = fit.as_ref().map(|f| Copula::new(f.fit.params_hat)).transpose()?;
    let mut text = DIAGNOSE_HEADER.join(",");
    text.push('\n');
    for &u in &grid {
        let e = chi_u_empirical_at(&sample, u, a.level)?;
        let (cm, cbm) = match &copula {
            Some(c) => {
                let m = model_chi(u, c)?;
                (Some(m.chi), Some(m.chibar))
            }
            None => (None, None),
        };
        let mut row = vec![cell(Some(u)), e.n.to_string(), e.n_conditioning.to_string(), e.n_joint.to_string()];
        row.extend(estimate_cells(&e.chi));
        row.extend(estimate_cells(&e.chibar));
        row.push(cell(cm));
        row.push(cell(cbm));
        text.push_str(&row.join(","));
        text.push('\n');
    }
    if let (Some(path), Some(f)) = (&a.sv_out, &fit) {
        if !(a.radial_quantile >= 0.0 && a.radial_quantile < 1.0) {
            return Err(CliError::Usage(format!("--radial-quantile must lie in [0, 1), got {}", a.radial_quantile)));
        }
        let d = sv_diagnostic(&f.fit.params_hat, &sample, a.radial_quantile)?;
        let report = SvReport {
            schema_version: SCHEMA_VERSION,
            command: "diagnose".into(),
            params: f.fit.params_hat,
            radial_quantile: a.radial_quantile,
            n_retained: d.pairs.len(),
            diagnostic: d,
        };
        write_text(Some(path), &to_json(&report)?)?;
    }
    write_text(a.out.as_deref(), &text)
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_grid: String,
    #[arg(long)]
    pub alpha_grid: String,
    #[arg(long, default_value_t = 0.95)]
    pub censor_u: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn cmd_surface(a: &SurfaceArgs) -> Result<(), CliError> {
    let lambdas = parse_grid(&a.lambda_grid)?;
    let alphas = parse_grid(&a.alpha_grid)?;
    if let Some(l) = lambdas.iter().find(|l| **l > evdep::model::params::LAMBDA_MAX) {
        return Err(CliError::Usage(format!("lambda grid values must be at most 1, got {l}")));
    }
    if let Some(al) = alphas.iter().find(|a| !(**a > 0.0)) {
        return Err(CliError::Usage(format!("alpha grid values must be positive, got {al}")));
    }
    check_prob("--censor-u", a.censor_u)?;
    let (sample, _) = a.data.uniform()?;
    let values = loglik_surface(&sample, a.censor_u, evdep::NormSpec::Linf, &lambdas, &alphas)?;
    write_text(a.out.as_deref(), &format_surface(&Surface { lambdas, alphas, values }))
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Scenario JSON: one scenario object or `{"scenarios": [...]}`.
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    pub scenario: Option<PathBuf>,
    /// Built-in scenario list (`table1-mini`).
    #[arg(long)]
    pub preset: Option<String>,
    /// Seed for presets.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// CSV summary, one row per structure, level and set; stdout when absent.
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    /// Full JSON report including per-replicate estimates.
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default)]
    pub schema_version: Option<u32>,
    pub scenarios: Vec<ScenarioConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentArtifact {
    pub schema_version: u32,
    pub command: String,
    pub reports: Vec<ExperimentReport>,
}

pub fn read_scenarios(text: &str) -> Result<Vec<ScenarioConfig>, CliError> {
    if let Ok(f) = serde_json::from_str::<ScenarioFile>(text) {
        return Ok(f.scenarios);
    }
    serde_json::from_str::<ScenarioConfig>(text)
        .map(|s| vec![s])
        .map_err(|e| CliError::Usage(format!("invalid scenario JSON: {e}")))
}

/// CSV text for a set of reports, one row per structure, level and set.
pub fn experiment_csv(reports: &[ExperimentReport]) -> String {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(CSV_HEADER).expect("in-memory write");
    for r in reports {
        for row in r.csv_rows() {
            wtr.write_record(&row).expect("in-memory write");
        }
    }
    String::from_utf8(wtr.into_inner().expect("in-memory flush")).expect("utf-8 CSV")
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<(), CliError> {
    let scenarios = match (&a.preset, &a.scenario) {
        (Some(p), _) if p == "table1-mini" => table1_mini(a.seed),
        (Some(p), _) => return Err(CliError::Usage(format!("unknown preset {p:?}"))),
        (None, Some(path)) => read_scenarios(&read_text(path)?)?,
        (None, None) => return Err(CliError::Usage("give a scenario file or --preset".into())),
    };
    for s in &scenarios {
        s.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let reports = scenarios.iter().map(run_experiment).collect::<Result<Vec<_>, _>>()?;
    if let Some(p) = &a.out_json {
        let art = ExperimentArtifact { schema_version: SCHEMA_VERSION, command: "experiment".into(), reports: reports.clone() };
        write_text(Some(p), &to_json(&art)?)?;
    }
    write_text(a.out_csv.as_deref(), &experiment_csv(&reports))
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fit(_) => "fit",
            Command::Simulate(_) => "simulate",
            Command::Prob(_) => "prob",
            Command::Diagnose(_) => "diagnose",
            Command::Surface(_) => "surface",
            Command::Experiment(_) => "experiment",
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Prob(a) => cmd_prob(a),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Surface(a) => cmd_surface(a),
        Command::Experiment(a) => cmd_experiment(a),
    }
}
