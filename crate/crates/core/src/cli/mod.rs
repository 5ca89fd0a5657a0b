//! The `radlevy` command line: `eval`, `verify` and `simulate`.
//!
//! Exit codes: 0 when every emitted report passes, 1 when a check fails,
//! 2 for configuration errors, 3 when a computation fails.

mod suites;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bernstein::{BernsteinSpec, LevyMeasure};
use crate::catalog::{self, NON_BERNSTEIN_FIXTURE};
use crate::convention::Convention;
use crate::error::{Error, Result};
use crate::export::{self, CurveHeader};
use crate::numerics::QuadratureConfig;
use crate::report::VerificationReport;
use crate::simulation::{sample_subordinator, simulation_suite};
use crate::subordinator::SubordinatorModel;
use crate::transition::{LevyDensity, Route, TransitionDensity};

pub use suites::Suite;

#[derive(Debug, Parser)]
#[command(
    name = "radlevy",
    version,
    about = "Radial Lévy processes from subordinated Brownian motion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate f, the transition density or the Lévy density.
    Eval(EvalArgs),
    /// Run verification suites and stream JSON reports.
    Verify(VerifyArgs),
    /// Monte Carlo checks against the analytic laws.
    Simulate(SimulateArgs),
}

/// Flags shared by every subcommand; each overrides the `--config` file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Catalog name (drift, stable12, ig, gamma, cp) or a JSON spec file.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long = "r-max")]
    pub r_max: Option<f64>,
    #[arg(long = "grid-n")]
    pub grid_n: Option<usize>,
    /// mixture, fourier or closed-form.
    #[arg(long)]
    pub route: Option<String>,
    /// default or paper-literal.
    #[arg(long)]
    pub convention: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory for this run.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with any of the fields of the run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Jump intensity of the compound-Poisson model.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Exponential jump rate of the compound-Poisson model.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum What {
    F,
    Density,
    Levy,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "density")]
    pub what: What,
    /// Points for `--what f` (comma separated); defaults to a grid on [0, r_max].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub u: Vec<f64>,
    /// Also write an SVG chart into the output directory.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Write the subordinator samples to `samples.csv` in the output directory.
    #[arg(long)]
    pub samples: bool,
}

/// A model given by name or by an inline spec in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelChoice {
    Name(String),
    Spec(BernsteinSpec),
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `None` means every catalog model (verify only).
    pub model: Option<ModelChoice>,
    pub k: usize,
    pub t: f64,
    pub r_max: f64,
    pub grid_n: usize,
    pub route: Option<Route>,
    pub convention: Convention,
    pub n: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub lambda: Option<f64>,
    pub beta: Option<f64>,
    pub quadrature: QuadratureConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: None,
            k: 1,
            t: 1.0,
            r_max: 5.0,
            grid_n: 100,
            route: None,
            convention: Convention::Default,
            n: 100_000,
            seed: 0,
            threads: None,
            out: None,
            lambda: None,
            beta: None,
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// The model a run works on.
#[derive(Debug, Clone)]
pub enum Selected {
    Model(SubordinatorModel),
    /// `f(u) = u²`, accepted only by the `cm` suite.
    NonBernstein,
}

impl Selected {
    pub fn name(&self) -> &str {
        match self {
            Selected::Model(m) => m.name(),
            Selected::NonBernstein => NON_BERNSTEIN_FIXTURE,
        }
    }

    fn model(&self) -> Result<&SubordinatorModel> {
        match self {
            Selected::Model(m) => Ok(m),
            Selected::NonBernstein => Err(Error::invalid(
                "model",
                format!("`{NON_BERNSTEIN_FIXTURE}` is only accepted by `verify --suite cm`"),
            )),
        }
    }
}

impl RunConfig {
    /// Starts from the `--config` file (if any) and applies the flags.
    pub fn from_args(args: &CommonArgs) -> Result<RunConfig> {
        let mut cfg = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
                serde_json::from_str::<RunConfig>(&text)
                    .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(m) = &args.model {
            cfg.model = Some(ModelChoice::Name(m.clone()));
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = args.$f.clone() { cfg.$f = v.into(); } )* };
        }
        take!(k, t, r_max, grid_n, n, seed);
        if args.threads.is_some() {
            cfg.threads = args.threads;
        }
        if args.out.is_some() {
            cfg.out = args.out.clone();
        }
        if args.lambda.is_some() {
            cfg.lambda = args.lambda;
        }
        if args.beta.is_some() {
            cfg.beta = args.beta;
        }
        if let Some(r) = &args.route {
            cfg.route =
                Some(r.parse().map_err(|_| {
                    Error::invalid("route", format!("`{r}`; expected mixture, fourier or closed-form"))
                })?);
        }
        if let Some(c) = &args.convention {
            cfg.convention = c
                .parse()
                .map_err(|_| Error::invalid("convention", format!("`{c}`; expected default or paper-literal")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k", "dimension must be at least 1"));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::invalid(
                "t",
                format!("must be positive and finite, got {}", self.t),
            ));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::invalid(
                "r_max",
                format!("must be positive and finite, got {}", self.r_max),
            ));
        }
        if self.grid_n < 2 {
            return Err(Error::invalid("grid_n", "need at least 2 grid points"));
        }
        if self.n == 0 {
            return Err(Error::invalid("n", "sample count must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads", "must be at least 1"));
        }
        self.quadrature.validate()?;
        self.selection()?;
        Ok(())
    }

    /// Resolves the model, applying `--lambda`/`--beta`.
    pub fn selection(&self) -> Result<Option<Selected>> {
        let Some(choice) = &self.model else {
            if self.lambda.is_some() || self.beta.is_some() {
                return Err(Error::invalid("lambda", "needs --model cp"));
            }
            return Ok(None);
        };
        let (name, spec) = match choice {
            ModelChoice::Name(n) if n == NON_BERNSTEIN_FIXTURE => return Ok(Some(Selected::NonBernstein)),
            ModelChoice::Name(n) if catalog::NAMES.contains(&n.as_str()) => (Some(n.clone()), catalog::lookup(n)?),
            ModelChoice::Name(n) if Path::new(n).is_file() || n.ends_with(".json") => {
                let text = fs::read_to_string(n)
                    .map_err(|e| Error::invalid("model", format!("cannot read spec file {n}: {e}")))?;
                let spec: BernsteinSpec =
                    serde_json::from_str(&text).map_err(|e| Error::invalid("model", format!("spec file {n}: {e}")))?;
                (None, spec)
            }
            ModelChoice::Name(n) => return catalog::lookup(n).map(|_| None),
            ModelChoice::Spec(s) => (None, s.clone()),
        };
        let spec = if self.lambda.is_some() || self.beta.is_some() {
            let LevyMeasure::ExponentialCp { intensity, jump_rate } = spec.levy_measure() else {
                return Err(Error::invalid(
                    if self.lambda.is_some() { "lambda" } else { "beta" },
                    "only applies to the compound-Poisson model",
                ));
            };
            let measure = LevyMeasure::ExponentialCp {
                intensity: self.lambda.unwrap_or(*intensity),
                jump_rate: self.beta.unwrap_or(*jump_rate),
            };
            BernsteinSpec::new(spec.drift(), measure)
                .map_err(|e| Error::invalid("lambda", e.to_string()))?
                .with_closed_form(spec.uses_closed_form())
        } else {
            spec
        };
        let model = match name {
            Some(n) if catalog::lookup(&n).map(|s| s == spec).unwrap_or(false) => SubordinatorModel::named(n, spec),
            _ => SubordinatorModel::new(spec),
        };
        Ok(Some(Selected::Model(model)))
    }

    fn single(&self) -> Result<Selected> {
        self.selection()?
            .ok_or_else(|| Error::invalid("model", "this command needs --model"))
    }

    fn r_grid(&self) -> Vec<f64> {
        (1..=self.grid_n)
            .map(|i| self.r_max * i as f64 / self.grid_n as f64)
            .collect()
    }
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument { .. } | Error::Config(_) | Error::Json(_) => 2,
        _ => 3,
    }
}

/// Entry point used by the binary; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let common = match &cli.command {
        Command::Eval(a) => &a.common,
        Command::Verify(a) => &a.common,
        Command::Simulate(a) => &a.common,
    };
    let cfg = match RunConfig::from_args(common) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    // output is buffered so the work can move onto a sized thread pool
    let work = || -> (Result<i32>, Vec<u8>, Vec<u8>) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let result = (|| {
            if let Some(dir) = &cfg.out {
                fs::create_dir_all(dir)?;
                write_meta(dir, &args, &cfg)?;
            }
            match &cli.command {
                Command::Eval(a) => cmd_eval(&cfg, a, &mut out),
                Command::Verify(a) => cmd_verify(&cfg, a.suite, &mut out, &mut err),
                Command::Simulate(a) => cmd_simulate(&cfg, a, &mut out, &mut err),
            }
        })();
        (result, out, err)
    };
    let (outcome, out, err) = match cfg.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(e) => (Err(Error::Config(format!("thread pool: {e}"))), Vec::new(), Vec::new()),
        },
        None => work(),
    };
    let _ = stdout.write_all(&out);
    let _ = stderr.write_all(&err);
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// `run_meta.json`: everything that is allowed to differ between identical runs.
fn write_meta(dir: &Path, args: &[OsString], cfg: &RunConfig) -> Result<()> {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": secs,
        "args": args.iter().map(|a| a.to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "config": cfg,
    });
    fs::write(dir.join("run_meta.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

pub fn cmd_eval(cfg: &RunConfig, args: &EvalArgs, stdout: &mut dyn Write) -> Result<i32> {
    let selected = cfg.single()?;
    let q = &cfg.quadrature;
    let (header, columns, rows, stem) = match args.what {
        What::F => {
            let us = if args.u.is_empty() {
                (0..=cfg.grid_n)
                    .map(|i| cfg.r_max * i as f64 / cfg.grid_n as f64)
                    .collect()
            } else {
                args.u.clone()
            };
            let rows = match &selected {
                Selected::NonBernstein => us.iter().map(|&u| (u, u * u)).collect(),
                Selected::Model(m) => us
                    .iter()
                    .map(|&u| {
                        if u < 0.0 {
                            return Err(Error::invalid("u", format!("f is defined on [0, ∞), got {u}")));
                        }
                        Ok((u, m.spec().eval_f(u)?))
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            (CurveHeader::new("f", selected.name()), ["u", "f"], rows, "f")
        }
        What::Density => {
            let model = selected.model()?;
            let td = TransitionDensity::compute(model, cfg.k, cfg.t, cfg.route.unwrap_or_default(), cfg.convention, q)?
                .with_grid(&cfg.r_grid())?;
            let rows = td
                .profile()
                .grid()
                .iter()
                .copied()
                .zip(td.profile().values().iter().copied())
                .collect();
            (CurveHeader::for_density(&td), ["r", "value"], rows, "density")
        }
        What::Levy => {
            let model = selected.model()?;
            let ld = LevyDensity::compute(model, cfg.k, cfg.convention, q)?;
            let profile = ld.profile().clone().with_grid(&cfg.r_grid())?;
            let rows = profile
                .grid()
                .iter()
                .copied()
                .zip(profile.values().iter().copied())
                .collect();
            (CurveHeader::for_levy(&ld), ["r", "value"], rows, "levy")
        }
    };
    export::write_curve_csv(&mut *stdout, &header, columns, &rows)?;
    if let Some(dir) = &cfg.out {
        export::write_curve_csv(
            fs::File::create(dir.join(format!("{stem}.csv")))?,
            &header,
            columns,
            &rows,
        )?;
        if args.svg {
            let title = format!("{} {}", header.model, stem);
            fs::write(
                dir.join(format!("{stem}.svg")),
                export::svg_line_chart(&title, columns[0], columns[1], &rows),
            )?;
        }
    } else if args.svg {
        return Err(Error::invalid("svg", "needs --out"));
    }
    Ok(0)
}

pub fn cmd_verify(cfg: &RunConfig, suite: Suite, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let targets = match cfg.selection()? {
        Some(s) => vec![s],
        None => catalog::catalog()
            .into_iter()
            .map(|(n, s)| Selected::Model(SubordinatorModel::named(n, s)))
            .collect(),
    };
    if targets.iter().any(|t| matches!(t, Selected::NonBernstein)) && suite != Suite::Cm {
        return Err(Error::invalid(
            "suite",
            format!("`{NON_BERNSTEIN_FIXTURE}` is only accepted by the cm suite"),
        ));
    }
    let mut reports: Vec<VerificationReport> = Vec::new();
    for target in &targets {
        for (note, report) in suites::run_suite(suite, target, cfg) {
            if let Some(note) = note {
                writeln!(stderr, "skip  {}: {note}", target.name())?;
            }
            reports.extend(report);
        }
    }
    // failing reports go last
    let (mut ok, failed): (Vec<_>, Vec<_>) = reports.into_iter().partition(|r| r.pass);
    let n_failed = failed.len();
    ok.extend(failed);
    export::write_json_lines(&mut *stdout, &ok)?;
    if let Some(dir) = &cfg.out {
        export::write_json_lines(fs::File::create(dir.join("reports.jsonl"))?, &ok)?;
    }
    for r in &ok {
        writeln!(
            stderr,
            "{}  {:<24} {:<16} max_error={:.3e} tol={:.1e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            r.model,
            r.max_error,
            r.tolerance
        )?;
    }
    writeln!(stderr, "{} of {} checks passed", ok.len() - n_failed, ok.len())?;
    Ok(if n_failed == 0 { 0 } else { 1 })
}

pub fn cmd_simulate(
    cfg: &RunConfig,
    args: &SimulateArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let selected = cfg.single()?;
    let model = selected.model()?;
    let reports = simulation_suite(model, cfg.k, cfg.t, cfg.n, cfg.seed, cfg.convention, &cfg.quadrature)?;
    export::write_json_lines(&mut *stdout, &reports)?;
    if let Some(dir) = &cfg.out {
        export::write_json_lines(fs::File::create(dir.join("reports.jsonl"))?, &reports)?;
        if args.samples {
            let s = sample_subordinator(model, cfg.t, cfg.n, cfg.seed)?;
            export::write_samples_csv(fs::File::create(dir.join("samples.csv"))?, cfg.t, &s)?;
        }
    } else if args.samples {
        return Err(Error::invalid("samples", "needs --out"));
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    for r in &reports {
        writeln!(
            stderr,
            "{}  {:<24} observed={:.6e} predicted={:.6e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.statistic,
            r.observed,
            r.predicted
        )?;
    }
    Ok(if failed == 0 { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("radlevy").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn eval_f() {
        let (code, out, _) = run_args(&["eval", "--model", "drift", "--what", "f", "--u", "4"]);
        assert_eq!(code, 0);
        assert!(out.ends_with("u,f\n4.0,4.0\n"), "{out}");
    }

    #[test]
    fn config_errors_name_the_field() {
        let (code, _, err) = run_args(&["simulate", "--model", "cp", "--n", "0"]);
        assert_eq!(code, 2);
        assert!(err.contains("`n`"), "{err}");
        let (code, _, err) = run_args(&["eval", "--model", "gamma", "--lambda", "2"]);
        assert_eq!(code, 2);
        assert!(err.contains("`lambda`"), "{err}");
        let (code, _, err) = run_args(&["eval", "--model", "nope"]);
        assert_eq!(code, 2);
        assert!(err.contains("`model`"), "{err}");
        let (code, _, _) = run_args(&["eval", "--model", "drift", "--route", "sideways"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn config_file_and_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(
            &path,
            r#"{"model": {"drift": 0.5, "levy_measure": {"family": "null"}}, "k": 3, "seed": 9}"#,
        )
        .unwrap();
        let args = CommonArgs {
            config: Some(path.clone()),
            k: Some(2),
            ..Default::default()
        };
        let cfg = RunConfig::from_args(&args).unwrap();
        assert_eq!((cfg.k, cfg.seed), (2, 9));
        fs::write(&path, r#"{"kk": 3}"#).unwrap();
        assert!(matches!(RunConfig::from_args(&args), Err(Error::Config(_))));
    }

    #[test]
    fn lambda_overrides_cp() {
        let cfg = RunConfig {
            model: Some(ModelChoice::Name("cp".into())),
            lambda: Some(3.0),
            ..Default::default()
        };
        let Some(Selected::Model(m)) = cfg.selection().unwrap() else {
            panic!()
        };
        assert_eq!(m.atom_rate(), 3.0);
    }
}
