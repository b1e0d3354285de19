//! `osblip` — estimation, prediction and efficiency analysis of future
//! order statistics from Type-II right-censored samples.
//!
//! Subcommands: `moments`, `estimate`, `predict`, `efficiency`,
//! `simulate`, `reproduce`. Exit codes: 0 success, 2 validation error,
//! 3 numerical failure.

mod output;
mod reproduce;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use osblip::efficiency::{
    crossings, curve, efficiency_at, find_delta_star, iem, EfficiencyKind, EfficiencySpec,
};
use osblip::estimation::{blue, delta_hat, BlueResult, CensoredSample, Transform};
use osblip::family::Family;
use osblip::mc::{simulate, NamedPredictor, SimPlan};
use osblip::moments::{
    compute_moments, load_moments, save_moments, slice_moments, MomentMethod, MomentSet,
    MomentSlice, ParentModel,
};
use osblip::prediction::{
    blip, blup, blup_mspe, kaminsky_blip, mspe_of_coeffs, predict, scale_blip, LinearPredictor,
};
use osblip::{Error, Result};

use output::{emit, sig12, OutFormat};

#[derive(Parser)]
#[command(name = "osblip", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute standardized order-statistic moments and write a moment file.
    Moments(MomentsArgs),
    /// Estimate (mu, sigma) by generalized least squares and report delta-hat.
    Estimate(EstimateArgs),
    /// Build a predictor for future order statistics and apply it to data.
    Predict(PredictArgs),
    /// Evaluate efficiency functionals of delta (RE1, D, trace).
    Efficiency(EfficiencyArgs),
    /// Validate analytic MSPE formulas by Monte Carlo simulation.
    Simulate(SimulateArgs),
    /// Recompute a published benchmark table or figure next to its
    /// published values, with per-cell differences.
    Reproduce(ReproduceArgs),
}

/// Flags shared by every subcommand that needs a moment set.
#[derive(Args)]
struct ModelArgs {
    /// Parent family: exponential, uniform, normal, gumbel.
    #[arg(long)]
    family: String,
    /// Sample size.
    #[arg(long)]
    n: usize,
    /// Moment engine: closed-form, quadrature, monte-carlo. Defaults to
    /// closed form where available, quadrature otherwise.
    #[arg(long)]
    method: Option<String>,
    /// Relative tolerance for quadrature moments.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// Moment file: loaded if it exists, otherwise computed and cached there.
    #[arg(long)]
    moments: Option<PathBuf>,
}

impl ModelArgs {
    fn family(&self) -> Result<Family> {
        Family::from_name(&self.family)
    }

    fn model(&self, mc_reps: u64, mc_seed: u64) -> Result<ParentModel> {
        let family = self.family()?;
        let method = match &self.method {
            Some(name) => MomentMethod::from_name(name)?,
            None if family.has_closed_form_moments() => MomentMethod::ClosedForm,
            None => MomentMethod::Quadrature,
        };
        let mut model = match method {
            MomentMethod::ClosedForm => ParentModel::closed_form(family),
            MomentMethod::Quadrature => ParentModel::quadrature(family).with_tol(self.tolerance),
            MomentMethod::MonteCarlo => ParentModel::monte_carlo(family, mc_reps, mc_seed),
        };
        model.quad_rel_tol = self.tolerance;
        Ok(model)
    }

    /// Loads the moment file when present, otherwise computes the moments
    /// (and caches them to the file when one was named).
    fn moment_set(&self, mc_reps: u64, mc_seed: u64) -> Result<MomentSet> {
        if let Some(path) = &self.moments {
            if path.exists() {
                let ms = load_moments(path)?;
                if ms.n != self.n {
                    return Err(Error::InvalidArgument(format!(
                        "moment file has n={} but --n {} was requested",
                        ms.n, self.n
                    )));
                }
                if ms.provenance.family != self.family()?.name() {
                    return Err(Error::InvalidArgument(format!(
                        "moment file is for family '{}' but --family {} was requested",
                        ms.provenance.family, self.family
                    )));
                }
                return Ok(ms);
            }
        }
        let ms = compute_moments(&self.model(mc_reps, mc_seed)?, self.n)?;
        if let Some(path) = &self.moments {
            save_moments(&ms, path)?;
        }
        Ok(ms)
    }
}

/// Flags shared by subcommands that read a data file.
#[derive(Args)]
struct DataArgs {
    /// CSV data file: one numeric value per line, optional header `value`.
    #[arg(long)]
    data: PathBuf,
    /// Work on the natural-log scale (data must be positive).
    #[arg(long)]
    log: bool,
}

impl DataArgs {
    fn sample(&self, n: usize, r: usize) -> Result<CensoredSample> {
        let raw = read_data_csv(&self.data)?;
        if raw.len() != n {
            return Err(Error::InvalidArgument(format!(
                "data file has {} values but --n {n} was requested",
                raw.len()
            )));
        }
        let transform = if self.log { Transform::Log } else { Transform::None };
        CensoredSample::from_raw(&raw, r, transform)
    }
}

fn read_data_csv(path: &std::path::Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut vals = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || (lineno == 0 && t.eq_ignore_ascii_case("value")) {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| {
            Error::Format(format!("line {}: '{t}' is not a number", lineno + 1))
        })?;
        vals.push(v);
    }
    if vals.is_empty() {
        return Err(Error::Format("data file contains no values".into()));
    }
    Ok(vals)
}

fn parse_targets(spec: &str) -> Result<Vec<usize>> {
    let targets: Vec<usize> = spec
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad target index '{t}'")))
        })
        .collect::<Result<_>>()?;
    Ok(targets)
}

/// `--delta <x>` or `--delta plugin`.
#[derive(Clone)]
enum DeltaMode {
    Fixed(f64),
    Plugin,
}

fn parse_delta(s: &str) -> std::result::Result<DeltaMode, String> {
    if s.eq_ignore_ascii_case("plugin") {
        return Ok(DeltaMode::Plugin);
    }
    s.parse::<f64>()
        .map(DeltaMode::Fixed)
        .map_err(|_| format!("'{s}' is neither a number nor 'plugin'"))
}

/// Resolves a delta mode, running the BLUE when the plug-in was requested.
fn resolve_delta(
    mode: &DeltaMode,
    data: Option<&DataArgs>,
    slice: &MomentSlice,
) -> Result<(f64, &'static str)> {
    match mode {
        DeltaMode::Fixed(v) => {
            if !v.is_finite() {
                return Err(Error::InvalidArgument("--delta must be finite".into()));
            }
            Ok((*v, "fixed"))
        }
        DeltaMode::Plugin => {
            let data = data.ok_or_else(|| {
                Error::InvalidArgument("--delta plugin requires --data".into())
            })?;
            let sample = data.sample(slice.n, slice.r)?;
            let b = blue(&sample, slice)?;
            Ok((delta_hat(&b)?.value, "plugin"))
        }
    }
}

// ---------------------------------------------------------------------------
// moments
// ---------------------------------------------------------------------------

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Replications for the Monte Carlo engine.
    #[arg(long, default_value_t = 1_000_000)]
    reps: u64,
    /// RNG seed for the Monte Carlo engine.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Destination moment file (JSON).
    #[arg(long)]
    out: PathBuf,
}

fn cmd_moments(args: &MomentsArgs) -> Result<()> {
    let ms = compute_moments(&args.model.model(args.reps, args.seed)?, args.model.n)?;
    save_moments(&ms, &args.out)?;
    for w in &ms.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Censoring index: the first r order statistics are observed.
    #[arg(long)]
    r: usize,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Serialize)]
struct EstimateReport {
    family: String,
    n: usize,
    r: usize,
    transform: Transform,
    mu_star: f64,
    sigma_star: f64,
    delta_hat: f64,
    delta_hat_unstable: bool,
    var_mu: f64,
    var_sigma: f64,
    cov_mu_sigma: f64,
    v1: f64,
    v2: f64,
    v3: f64,
    big_delta: f64,
}

fn estimate_report(args: &EstimateArgs) -> Result<EstimateReport> {
    let ms = args.model.moment_set(1_000_000, 0)?;
    if args.r >= ms.n {
        return Err(Error::InvalidArgument(format!(
            "estimation requires r < n (got r={}, n={})",
            args.r, ms.n
        )));
    }
    let slice = slice_moments(&ms, args.r, &[args.r + 1])?;
    let sample = args.data.sample(ms.n, args.r)?;
    let b = blue(&sample, &slice)?;
    let dh = delta_hat(&b)?;
    Ok(EstimateReport {
        family: ms.provenance.family.clone(),
        n: ms.n,
        r: args.r,
        transform: sample.transform,
        mu_star: b.mu_star,
        sigma_star: b.sigma_star,
        delta_hat: dh.value,
        delta_hat_unstable: dh.unstable,
        var_mu: b.var_mu,
        var_sigma: b.var_sigma,
        cov_mu_sigma: b.cov_mu_sigma,
        v1: b.v1,
        v2: b.v2,
        v3: b.v3,
        big_delta: b.big_delta,
    })
}

fn cmd_estimate(args: &EstimateArgs) -> Result<()> {
    let report = estimate_report(args)?;
    let text = match args.format {
        OutFormat::Json => output::to_json(&report)?,
        OutFormat::Csv => {
            let mut s = String::from("field,value\n");
            for (k, v) in [
                ("mu_star", report.mu_star),
                ("sigma_star", report.sigma_star),
                ("delta_hat", report.delta_hat),
                ("var_mu", report.var_mu),
                ("var_sigma", report.var_sigma),
                ("cov_mu_sigma", report.cov_mu_sigma),
                ("v1", report.v1),
                ("v2", report.v2),
                ("v3", report.v3),
                ("big_delta", report.big_delta),
            ] {
                s.push_str(&format!("{k},{}\n", sig12(v)));
            }
            s
        }
    };
    emit(args.out.as_deref(), &text)
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PredictorArg {
    Blup,
    Blip,
    Kaminsky,
    Scale,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    r: usize,
    /// Future order-statistic indices, comma-separated (e.g. 10,15).
    #[arg(long)]
    targets: String,
    #[arg(long, value_enum, default_value_t = PredictorArg::Blip)]
    predictor: PredictorArg,
    /// Delta for the BLIP: a number, or 'plugin' for mu*/sigma* from the data.
    #[arg(long, value_parser = parse_delta)]
    delta: Option<DeltaMode>,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

/// Predictor export: coefficients, MSPE matrix (sigma^2 units) and the
/// predicted values on the working and original scales.
#[derive(Serialize)]
struct PredictReport {
    kind: osblip::prediction::PredictorKind,
    targets: Vec<usize>,
    delta: Option<f64>,
    coeffs: Vec<Vec<f64>>,
    mspe: Vec<Vec<f64>>,
    mspe_units: &'static str,
    predictions: osblip::prediction::Prediction,
}

fn build_predictor(
    args: &PredictArgs,
    slice: &MomentSlice,
) -> Result<(LinearPredictor, nalgebra::DMatrix<f64>)> {
    match args.predictor {
        PredictorArg::Blup => {
            let p = blup(slice)?;
            let m = blup_mspe(slice)?;
            Ok((p, m.w))
        }
        PredictorArg::Blip => {
            let mode = args.delta.as_ref().ok_or_else(|| {
                Error::InvalidArgument("--predictor blip requires --delta <x|plugin>".into())
            })?;
            let (delta, _) = resolve_delta(mode, Some(&args.data), slice)?;
            let p = blip(slice, delta)?;
            let m = mspe_of_coeffs(&p.coeffs, slice, delta)?;
            Ok((p, m.w))
        }
        PredictorArg::Kaminsky => {
            let (p, _) = kaminsky_blip(slice)?;
            // Kaminsky rows satisfy a'1 = 1, so the bilinear form is
            // delta-free.
            let m = mspe_of_coeffs(&p.coeffs, slice, 0.0)?;
            Ok((p, m.w))
        }
        PredictorArg::Scale => {
            let p = scale_blip(slice)?;
            let m = mspe_of_coeffs(&p.coeffs, slice, 0.0)?;
            Ok((p, m.w))
        }
    }
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let ms = args.model.moment_set(1_000_000, 0)?;
    let targets = parse_targets(&args.targets)?;
    let slice = slice_moments(&ms, args.r, &targets)?;
    let (pred, mspe) = build_predictor(args, &slice)?;
    let sample = args.data.sample(ms.n, args.r)?;
    let values = predict(&pred, &sample)?;
    let report = PredictReport {
        kind: pred.kind,
        targets: pred.targets.clone(),
        delta: pred.delta,
        coeffs: output::matrix_rows(&pred.coeffs),
        mspe: output::matrix_rows(&mspe),
        mspe_units: "sigma2",
        predictions: values,
    };
    let text = match args.format {
        OutFormat::Json => output::to_json(&report)?,
        OutFormat::Csv => {
            let mut s = String::from("target,prediction,mspe\n");
            for (k, &t) in report.targets.iter().enumerate() {
                s.push_str(&format!(
                    "{t},{},{}\n",
                    sig12(report.predictions.values[k]),
                    sig12(report.mspe[k][k])
                ));
            }
            s
        }
    };
    emit(args.out.as_deref(), &text)
}

// ---------------------------------------------------------------------------
// efficiency
// ---------------------------------------------------------------------------

#[derive(Args)]
struct EfficiencyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    r: usize,
    /// One target for re1, two for d/trace, comma-separated.
    #[arg(long)]
    targets: String,
    /// Efficiency kind: re1, d, trace.
    #[arg(long)]
    kind: String,
    /// Evaluate at a single delta (number or 'plugin'; plugin needs --data).
    #[arg(long, value_parser = parse_delta)]
    delta: Option<DeltaMode>,
    /// Sample the curve on `lo:hi:points` (emits CSV).
    #[arg(long)]
    grid: Option<String>,
    /// Integrated efficiency measure over (0, DMAX).
    #[arg(long, value_name = "DMAX")]
    iem: Option<f64>,
    /// Maximize the efficiency over `lo:hi`.
    #[arg(long, value_name = "LO:HI")]
    delta_star: Option<String>,
    /// Find all crossings with 1 on `lo:hi`.
    #[arg(long, value_name = "LO:HI")]
    crossings: Option<String>,
    /// Data file for `--delta plugin`.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    log: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
}

fn parse_interval(s: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidArgument(format!("expected LO:HI, got '{s}'")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad interval bound '{}'", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad interval bound '{}'", parts[1])))?;
    Ok((lo, hi))
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!("expected LO:HI:POINTS, got '{s}'")));
    }
    let (lo, hi) = parse_interval(&format!("{}:{}", parts[0], parts[1]))?;
    let points: usize = parts[2]
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad point count '{}'", parts[2])))?;
    if points < 1 || lo >= hi || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument("grid needs lo < hi and points >= 1".into()));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect())
}

#[derive(Serialize)]
struct EfficiencyValueReport {
    kind: &'static str,
    targets: Vec<usize>,
    delta: f64,
    delta_mode: &'static str,
    value: f64,
}

fn cmd_efficiency(args: &EfficiencyArgs) -> Result<()> {
    let modes = [
        args.delta.is_some(),
        args.grid.is_some(),
        args.iem.is_some(),
        args.delta_star.is_some(),
        args.crossings.is_some(),
    ];
    if modes.iter().filter(|&&m| m).count() != 1 {
        return Err(Error::InvalidArgument(
            "exactly one of --delta, --grid, --iem, --delta-star, --crossings is required".into(),
        ));
    }
    let ms = args.model.moment_set(1_000_000, 0)?;
    let targets = parse_targets(&args.targets)?;
    let slice = slice_moments(&ms, args.r, &targets)?;
    let kind = EfficiencyKind::from_name(&args.kind)?;
    let spec = EfficiencySpec::new(kind, targets.clone())?;

    if let Some(mode) = &args.delta {
        let data_args = args.data.clone().map(|data| DataArgs { data, log: args.log });
        let (delta, delta_mode) = resolve_delta(mode, data_args.as_ref(), &slice)?;
        let value = efficiency_at(&spec, &slice, delta)?;
        let report = EfficiencyValueReport {
            kind: kind.name(),
            targets,
            delta,
            delta_mode,
            value,
        };
        return emit(args.out.as_deref(), &output::to_json(&report)?);
    }
    if let Some(grid_spec) = &args.grid {
        let grid = parse_grid(grid_spec)?;
        let c = curve(&spec, &slice, &grid)?;
        let csv = output::curve_csv(&[c], ms.n, args.r);
        return emit(args.out.as_deref(), &csv);
    }
    if let Some(dmax) = args.iem {
        let value = iem(&spec, &slice, dmax)?;
        #[derive(Serialize)]
        struct IemReport {
            kind: &'static str,
            targets: Vec<usize>,
            delta_max: f64,
            iem: f64,
        }
        let report = IemReport { kind: kind.name(), targets, delta_max: dmax, iem: value };
        return emit(args.out.as_deref(), &output::to_json(&report)?);
    }
    if let Some(interval) = &args.delta_star {
        let m = find_delta_star(&spec, &slice, parse_interval(interval)?)?;
        #[derive(Serialize)]
        struct StarReport {
            kind: &'static str,
            targets: Vec<usize>,
            delta_star: f64,
            value: f64,
            at_boundary: bool,
        }
        let report = StarReport {
            kind: kind.name(),
            targets,
            delta_star: m.argmax,
            value: m.value,
            at_boundary: m.at_boundary,
        };
        return emit(args.out.as_deref(), &output::to_json(&report)?);
    }
    let interval = args.crossings.as_ref().unwrap();
    let roots = crossings(&spec, &slice, parse_interval(interval)?)?;
    #[derive(Serialize)]
    struct CrossingReport {
        kind: &'static str,
        targets: Vec<usize>,
        crossings: Vec<f64>,
    }
    let report = CrossingReport { kind: kind.name(), targets, crossings: roots };
    emit(args.out.as_deref(), &output::to_json(&report)?)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    targets: String,
    /// True location parameter.
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    /// True scale parameter.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1_000_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let family = args.model.family()?;
    let ms = args.model.moment_set(args.reps, args.seed)?;
    let targets = parse_targets(&args.targets)?;
    let slice = slice_moments(&ms, args.r, &targets)?;
    if args.sigma <= 0.0 || !args.sigma.is_finite() {
        return Err(Error::InvalidArgument("--sigma must be positive".into()));
    }
    let true_delta = args.mu / args.sigma;

    let bu = blup(&slice)?;
    let bl = blip(&slice, true_delta)?;
    let (km, _) = kaminsky_blip(&slice)?;
    let plan = SimPlan {
        family,
        n: ms.n,
        r: args.r,
        targets,
        mu: args.mu,
        sigma: args.sigma,
        reps: args.reps,
        seed: args.seed,
        predictors: vec![
            NamedPredictor {
                label: "blup".into(),
                coeffs: bu.coeffs,
                analytic_mspe: Some(blup_mspe(&slice)?.w),
            },
            NamedPredictor {
                label: "blip_at_true_delta".into(),
                coeffs: bl.coeffs.clone(),
                analytic_mspe: Some(mspe_of_coeffs(&bl.coeffs, &slice, true_delta)?.w),
            },
            NamedPredictor {
                label: "kaminsky".into(),
                coeffs: km.coeffs.clone(),
                analytic_mspe: Some(mspe_of_coeffs(&km.coeffs, &slice, true_delta)?.w),
            },
        ],
    };
    let report = simulate(&plan)?;
    emit(args.out.as_deref(), &output::to_json(&report)?)
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ReproduceTarget {
    Table1,
    Table2,
    Table3,
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(value_enum)]
    target: ReproduceTarget,
    /// Moment file for the normal n=15 moments: loaded if present,
    /// otherwise computed and cached there (defaults to a file in the
    /// system temp directory).
    #[arg(long)]
    moments: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
}

fn cmd_reproduce(args: &ReproduceArgs) -> Result<()> {
    let cache = args
        .moments
        .clone()
        .unwrap_or_else(|| std::env::temp_dir().join("osblip-normal15-quadrature.json"));
    let model = ModelArgs {
        family: "normal".into(),
        n: 15,
        method: Some("quadrature".into()),
        tolerance: 1e-8,
        moments: Some(cache),
    };
    let ms = model.moment_set(0, 0)?;
    let text = match args.target {
        ReproduceTarget::Table1 => reproduce::table1(&ms, args.format.unwrap_or(OutFormat::Json))?,
        ReproduceTarget::Table2 => reproduce::table2(&ms, args.format.unwrap_or(OutFormat::Json))?,
        ReproduceTarget::Table3 => reproduce::table3(&ms, args.format.unwrap_or(OutFormat::Json))?,
        ReproduceTarget::Fig1 => reproduce::fig1(&ms)?,
        ReproduceTarget::Fig2 => reproduce::fig_pair(&ms, (10, 11), 10.0)?,
        ReproduceTarget::Fig3 => reproduce::fig_pair(&ms, (10, 15), 10.0)?,
        ReproduceTarget::Fig4 => reproduce::fig_pair(&ms, (14, 15), 50.0)?,
    };
    emit(args.out.as_deref(), &text)
}

// ---------------------------------------------------------------------------

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Moments(a) => cmd_moments(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Efficiency(a) => cmd_efficiency(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Reproduce(a) => cmd_reproduce(a),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

// Re-export pieces the reproduce module needs.
pub(crate) use osblip::datasets::LEAD_CONTAMINATION;

pub(crate) fn lead_sample() -> Result<CensoredSample> {
    CensoredSample::from_raw(&LEAD_CONTAMINATION, 9, Transform::Log)
}

pub(crate) fn lead_blue(ms: &MomentSet) -> Result<BlueResult> {
    let slice = slice_moments(ms, 9, &[10])?;
    blue(&lead_sample()?, &slice)
}
