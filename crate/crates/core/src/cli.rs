//! Command-line driver: single runs, campaigns, profiles and the problem list.
//!
//! Settings are resolved as defaults, then the `SNOWPAC_SEED` environment
//! variable (seed only), then a `--config` file, then flags. The config file
//! holds one `key = value` per line; `#` starts a comment and unknown keys are
//! errors. `--dump-config` prints the effective settings in the same format.
//!
//! Exit codes: 0 on success, 1 on invalid input, 2 when a run or campaign
//! fails at runtime.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::engine::{run, ExplorationScale, OptimizerConfig, RunResult};
use crate::error::{Result, SnowpacError};
use crate::gp::KernelForm;
use crate::harness::{self, CampaignSpec, RunRecord};
use crate::problems::{make_robust, problem_by_name, problem_names, Formulation};

pub const SEED_ENV: &str = "SNOWPAC_SEED";

/// Everything that can influence a result.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub problems: Vec<String>,
    pub formulations: Vec<Formulation>,
    pub n_samples: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
    pub workers: usize,
    pub eps_f: f64,
    pub eps_c: f64,
    /// Total evaluations per campaign run, initial ones included.
    pub budget: usize,
    pub optimizer: OptimizerConfig,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            problems: vec!["example2d".into()],
            formulations: vec![Formulation::MeanMean],
            n_samples: vec![200],
            repeats: 10,
            seed: 0,
            workers: 1,
            eps_f: 1e-2,
            eps_c: 1e-2,
            budget: harness::STEP_CAP,
            optimizer: OptimizerConfig { max_iterations: harness::STEP_CAP, ..OptimizerConfig::default() },
        }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| SnowpacError::Config(format!("{key}: '{s}': {e}"))))
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(SnowpacError::Config(format!("{key}: empty list")));
    }
    Ok(items)
}

fn parse_one<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| SnowpacError::Config(format!("{key}: '{v}': {e}")))
}

impl Settings {
    /// Set one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let o = &mut self.optimizer;
        let v = value.trim();
        match key {
            "problem" => self.problems = parse_list(key, v)?,
            "formulation" => self.formulations = parse_list(key, v)?,
            "n_samples" => self.n_samples = parse_list(key, v)?,
            "repeats" => self.repeats = parse_one(key, v)?,
            "seed" => self.seed = parse_one(key, v)?,
            "workers" => self.workers = parse_one(key, v)?,
            "eps_f" => self.eps_f = parse_one(key, v)?,
            "eps_c" => self.eps_c = parse_one(key, v)?,
            "budget" => self.budget = parse_one(key, v)?,
            "lambda_t" => o.lambda_t = parse_one(key, v)?,
            "lambda_max" => o.lambda_max = parse_one(key, v)?,
            "lambda_g" => o.lambda_g = parse_one(key, v)?,
            "eta0" => o.eta0 = parse_one(key, v)?,
            "eta1" => o.eta1 = parse_one(key, v)?,
            "gamma_shrink" => o.gamma_shrink = parse_one(key, v)?,
            "gamma_inc" => o.gamma_inc = parse_one(key, v)?,
            "omega" => o.omega = parse_one(key, v)?,
            "theta_tr" => o.theta_tr = parse_one(key, v)?,
            "rho0" => o.rho0 = parse_one(key, v)?,
            "rho_min" => o.rho_min = parse_one(key, v)?,
            "rho_max" => o.rho_max = parse_one(key, v)?,
            "n_max" => o.n_max = parse_one(key, v)?,
            "max_iterations" => o.max_iterations = parse_one(key, v)?,
            "crit_threshold" => o.crit_threshold = parse_one(key, v)?,
            "crit_mu" => o.crit_mu = parse_one(key, v)?,
            "gp_refit_every" => o.gp_refit_every = parse_one(key, v)?,
            "lambda_k" => o.lambda_k = parse_one(key, v)?,
            "gp_restarts" => o.gp_restarts = parse_one(key, v)?,
            "gp_enabled" => o.gp_enabled = parse_one(key, v)?,
            "kernel" => o.kernel = parse_one::<KernelForm>(key, v)?,
            "exploration" => o.exploration = parse_one::<ExplorationScale>(key, v)?,
            "t_quantile" => o.t_quantile = parse_one(key, v)?,
            _ => return Err(SnowpacError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Apply a `key = value` file.
    pub fn apply_file_text(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |m: String| SnowpacError::Parse { path: path.to_path_buf(), message: format!("line {}: {m}", i + 1) };
            let (k, v) = line.split_once('=').ok_or_else(|| bad("expected key = value".into()))?;
            self.set(k.trim(), v).map_err(|e| bad(e.to_string()))?;
        }
        Ok(())
    }

    /// Effective settings as a config file.
    pub fn dump(&self) -> String {
        let o = &self.optimizer;
        let mut s = String::from("# snowpac effective configuration\n");
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("problem", join(&self.problems));
        kv("formulation", join(&self.formulations));
        kv("n_samples", join(&self.n_samples));
        kv("repeats", self.repeats.to_string());
        kv("seed", self.seed.to_string());
        kv("workers", self.workers.to_string());
        kv("eps_f", self.eps_f.to_string());
        kv("eps_c", self.eps_c.to_string());
        kv("budget", self.budget.to_string());
        kv("lambda_t", o.lambda_t.to_string());
        kv("lambda_max", o.lambda_max.to_string());
        kv("lambda_g", o.lambda_g.to_string());
        kv("eta0", o.eta0.to_string());
        kv("eta1", o.eta1.to_string());
        kv("gamma_shrink", o.gamma_shrink.to_string());
        kv("gamma_inc", o.gamma_inc.to_string());
        kv("omega", o.omega.to_string());
        kv("theta_tr", o.theta_tr.to_string());
        kv("rho0", o.rho0.to_string());
        kv("rho_min", o.rho_min.to_string());
        kv("rho_max", o.rho_max.to_string());
        kv("n_max", o.n_max.to_string());
        kv("max_iterations", o.max_iterations.to_string());
        kv("crit_threshold", o.crit_threshold.to_string());
        kv("crit_mu", o.crit_mu.to_string());
        kv("gp_refit_every", o.gp_refit_every.to_string());
        kv("lambda_k", o.lambda_k.to_string());
        kv("gp_restarts", o.gp_restarts.to_string());
        kv("gp_enabled", o.gp_enabled.to_string());
        kv("kernel", o.kernel.name().to_string());
        kv("exploration", o.exploration.name().to_string());
        kv("t_quantile", o.t_quantile.to_string());
        s
    }

    pub fn validate(&self) -> Result<()> {
        let mut cfg = self.optimizer.clone();
        cfg.seed = self.seed;
        cfg.validate()?;
        let check = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(SnowpacError::InvalidArgument(msg.into())) };
        check(self.n_samples.iter().all(|&n| n >= 2), "n_samples must be at least 2")?;
        check(self.workers >= 1, "workers must be at least 1")?;
        check(self.eps_f > 0.0 && self.eps_c >= 0.0, "eps_f must be positive and eps_c non-negative")?;
        for p in &self.problems {
            problem_by_name(p)?;
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "snowpac", version, about = "Noise-adapted trust-region optimization of robustness measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize one problem once and print the result.
    Run(CommonArgs),
    /// Repeated seeded runs over problems, formulations and sample sizes.
    Campaign(CommonArgs),
    /// Data profile of an exported campaign CSV.
    Profile(ProfileArgs),
    /// Print the problem registry.
    ListProblems,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Problem name(s), comma separated [default: example2d for run, the eight suite problems for campaign].
    #[arg(long)]
    pub problem: Option<String>,
    /// mean-mean, mean-q95 or cvar95-mean; campaigns accept a comma list [default: mean-mean for run, all three for campaign].
    #[arg(long)]
    pub formulation: Option<String>,
    /// Samples per estimate; campaigns accept a comma list [default: 200].
    #[arg(long)]
    pub n_samples: Option<String>,
    /// Repeats per combination [default: 10].
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Seed (master seed for campaigns); falls back to SNOWPAC_SEED [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for campaigns; results do not depend on it [default: 1].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output: trace CSV for run, directory for campaign.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key = value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Relative objective accuracy for solved steps [default: 0.01].
    #[arg(long)]
    pub eps_f: Option<f64>,
    /// Constraint violation accuracy for solved steps [default: 0.01].
    #[arg(long)]
    pub eps_c: Option<f64>,
    /// Total evaluations per campaign run including the initial ones [default: 250].
    #[arg(long)]
    pub budget: Option<usize>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    pub dump_config: bool,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

/// Overrides for the optimizer constants.
#[derive(Debug, Args, Default)]
pub struct OptimizerArgs {
    /// Noise-floor factor λ_t [default: 1.4142135623730951].
    #[arg(long)]
    pub lambda_t: Option<f64>,
    /// Poisedness threshold Λ [default: 100].
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Interior bias of feasibility restoration λ_g [default: 0.0001].
    #[arg(long)]
    pub lambda_g: Option<f64>,
    /// Acceptance threshold η₀ [default: 0.1].
    #[arg(long)]
    pub eta0: Option<f64>,
    /// Radius-growth threshold η₁ [default: 0.7].
    #[arg(long)]
    pub eta1: Option<f64>,
    /// Shrink factor γ on rejection [default: 0.5].
    #[arg(long)]
    pub gamma_shrink: Option<f64>,
    /// Growth factor γ_inc on very successful steps [default: 2].
    #[arg(long)]
    pub gamma_inc: Option<f64>,
    /// Criticality-step shrink factor ω [default: 0.6].
    #[arg(long)]
    pub omega: Option<f64>,
    /// Shrink factor θ after an infeasible trial [default: 0.5].
    #[arg(long)]
    pub theta_tr: Option<f64>,
    /// Initial radius ρ₀ [default: 1].
    #[arg(long)]
    pub rho0: Option<f64>,
    /// Termination radius ρ_min [default: 0.000001].
    #[arg(long)]
    pub rho_min: Option<f64>,
    /// Maximal radius ρ_max [default: 10].
    #[arg(long)]
    pub rho_max: Option<f64>,
    /// Evaluations after the initial ones, for run [default: 250].
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Outer iteration cap [default: 250].
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Criticality threshold [default: 0.001].
    #[arg(long)]
    pub crit_threshold: Option<f64>,
    /// Criticality radius multiplier μ [default: 10].
    #[arg(long)]
    pub crit_mu: Option<f64>,
    /// Refit GP hyperparameters every this many evaluations [default: 10].
    #[arg(long)]
    pub gp_refit_every: Option<usize>,
    /// Also refit after λ_k·n consecutive failures [default: 2].
    #[arg(long)]
    pub lambda_k: Option<f64>,
    /// Random restarts of the first hyperparameter fit [default: 1].
    #[arg(long)]
    pub gp_restarts: Option<usize>,
    /// Enable GP correction [default: true].
    #[arg(long)]
    pub gp_enabled: Option<bool>,
    /// Kernel form: literal or ard [default: literal].
    #[arg(long)]
    pub kernel: Option<String>,
    /// Exploration scale: covariance or stddev [default: covariance].
    #[arg(long)]
    pub exploration: Option<String>,
    /// Error-bound multiplier t [default: 2].
    #[arg(long)]
    pub t_quantile: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Campaign CSV produced by `campaign`.
    #[arg(long)]
    pub input: PathBuf,
    /// Output profile CSV; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-2)]
    pub eps_f: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub eps_c: f64,
    /// Largest integer budget ratio α.
    #[arg(long, default_value_t = 100)]
    pub alpha_max: usize,
}

impl OptimizerArgs {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        macro_rules! push {
            ($($f:ident),*) => {$(
                if let Some(x) = &self.$f {
                    v.push((stringify!($f), x.to_string()));
                }
            )*};
        }
        push!(
            lambda_t, lambda_max, lambda_g, eta0, eta1, gamma_shrink, gamma_inc, omega, theta_tr, rho0, rho_min, rho_max,
            n_max, max_iterations, crit_threshold, crit_mu, gp_refit_every, lambda_k, gp_restarts, gp_enabled, kernel,
            exploration, t_quantile
        );
        v
    }
}

/// Resolve defaults, environment, config file and flags.
pub fn resolve(args: &CommonArgs, campaign: bool, env_seed: Option<&str>) -> Result<Settings> {
    let mut s = Settings::default();
    if campaign {
        s.problems = crate::problems::noisy_suite().iter().map(|p| p.name().to_string()).collect();
        s.formulations = Formulation::ALL.to_vec();
    }
    if let Some(e) = env_seed {
        s.set("seed", e).map_err(|e| SnowpacError::Config(format!("{SEED_ENV}: {e}")))?;
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|source| SnowpacError::Io { path: path.clone(), source })?;
        s.apply_file_text(&text, path)?;
    }
    let mut flags: Vec<(&str, String)> = Vec::new();
    let mut opt = |k: &'static str, v: Option<String>| {
        if let Some(v) = v {
            flags.push((k, v));
        }
    };
    opt("problem", args.problem.clone());
    opt("formulation", args.formulation.clone());
    opt("n_samples", args.n_samples.clone());
    opt("repeats", args.repeats.map(|v| v.to_string()));
    opt("seed", args.seed.map(|v| v.to_string()));
    opt("workers", args.workers.map(|v| v.to_string()));
    opt("eps_f", args.eps_f.map(|v| v.to_string()));
    opt("eps_c", args.eps_c.map(|v| v.to_string()));
    opt("budget", args.budget.map(|v| v.to_string()));
    flags.extend(args.optimizer.pairs());
    for (k, v) in flags {
        s.set(k, &v)?;
    }
    s.validate()?;
    Ok(s)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SnowpacError + '_ {
    move |source| SnowpacError::Io { path: path.to_path_buf(), source }
}

/// Per-iteration trace of a single run.
pub fn trace_csv(result: &RunResult) -> String {
    let mut out = String::from("k,evaluations,rho,floor,mode,accepted,ratio,x\n");
    for it in &result.iterations {
        let x = it.x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        let ratio = it.ratio.map(|r| r.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{},{},{},{}", it.k, it.evaluations_used, it.rho, it.floor, it.mode, it.accepted, ratio, x);
    }
    out
}

fn one<T: Clone>(v: &[T], what: &str) -> Result<T> {
    match v {
        [x] => Ok(x.clone()),
        _ => Err(SnowpacError::InvalidArgument(format!("run takes exactly one {what}"))),
    }
}

fn cmd_run(s: &Settings, out: Option<&Path>) -> Result<i32> {
    let base = problem_by_name(&one(&s.problems, "problem")?)?;
    let formulation = one(&s.formulations, "formulation")?;
    let n = one(&s.n_samples, "sample size")?;
    let problem = make_robust(base, formulation, n, s.seed)?;
    let cfg = OptimizerConfig { seed: s.seed, ..s.optimizer.clone() };
    let result = run(&problem, &cfg)?;
    println!("problem      {} ({formulation}, N = {n}, seed {})", problem.base().name(), s.seed);
    println!("termination  {}", result.termination);
    println!("iterations   {}", result.iterations.last().map_or(0, |it| it.k));
    println!("evaluations  {}", result.history.len());
    println!("best point   {:?}", result.best_point);
    println!("best value   {} (estimated, feasible: {})", result.best_value, result.best_feasible);
    if problem.base().has_exact() {
        let exact = problem.base().exact_objective(formulation, &result.best_point)?;
        let viol = problem.base().exact_constraints(formulation, &result.best_point)?.iter().fold(0.0f64, |m, c| m.max(*c));
        println!("exact value  {exact} (max constraint {viol})");
    }
    if let Some(path) = out {
        harness::write_atomic(path, trace_csv(&result).as_bytes())?;
    }
    Ok(if result.termination.is_failure() { 2 } else { 0 })
}

fn failure_manifest(records: &[RunRecord]) -> String {
    let mut s = String::from("problem,formulation,n_samples,repeat,seed,status\n");
    for r in records.iter().filter(|r| harness::is_failed(r)) {
        let _ = writeln!(s, "{},{},{},{},{},\"{}\"", r.problem, r.formulation, r.n_samples, r.repeat, r.seed, r.status.replace('"', "'"));
    }
    s
}

fn cmd_campaign(s: &Settings, out: Option<&Path>) -> Result<i32> {
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("campaign-out"));
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let spec = CampaignSpec {
        problems: s.problems.clone(),
        formulations: s.formulations.clone(),
        n_samples: s.n_samples.clone(),
        repeats: s.repeats,
        master_seed: s.seed,
        workers: s.workers,
        evaluation_budget: Some(s.budget),
        config: s.optimizer.clone(),
    };
    let records = harness::run_campaign(&spec)?;
    harness::write_records(&records, &dir.join("records.csv"))?;
    let summary = harness::summarize(&records, s.eps_f, s.eps_c);
    harness::write_summary(&summary, &dir.join("summary.txt"))?;
    let usable: Vec<RunRecord> = records.iter().filter(|r| r.reference.is_some()).cloned().collect();
    if !usable.is_empty() {
        let profile = harness::data_profile(&usable, s.eps_f, s.eps_c, &harness::default_alphas(100))?;
        harness::write_profile(&profile, s.eps_f, s.eps_c, &dir.join("profile.csv"))?;
    }
    let failed = records.iter().filter(|r| harness::is_failed(r)).count();
    println!("{} runs, {} failed, results in {}", records.len(), failed, dir.display());
    if failed > 0 {
        harness::write_atomic(&dir.join("failures.csv"), failure_manifest(&records).as_bytes())?;
        return Ok(2);
    }
    Ok(0)
}

fn cmd_profile(a: &ProfileArgs) -> Result<i32> {
    let records: Vec<RunRecord> = harness::read_records(&a.input)?.into_iter().filter(|r| r.reference.is_some()).collect();
    let profile = harness::data_profile(&records, a.eps_f, a.eps_c, &harness::default_alphas(a.alpha_max))?;
    match &a.out {
        Some(p) => harness::write_profile(&profile, a.eps_f, a.eps_c, p)?,
        None => print!("{}", harness::profile_to_csv(&profile, a.eps_f, a.eps_c)),
    }
    Ok(0)
}

fn list_problems() -> Result<i32> {
    for name in problem_names() {
        let p = problem_by_name(&name)?;
        println!("{name:<10} n = {:<2} r = {}", p.dim(), p.num_constraints());
    }
    Ok(0)
}

fn exit_code(e: &SnowpacError) -> i32 {
    match e {
        SnowpacError::Io { .. } | SnowpacError::Evaluation(_) | SnowpacError::NotPositiveDefinite | SnowpacError::DegenerateGeometry(_) => 2,
        _ => 1,
    }
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let outcome = match &cli.command {
        Command::ListProblems => list_problems(),
        Command::Profile(a) => cmd_profile(a),
        Command::Run(a) | Command::Campaign(a) => {
            let campaign = matches!(cli.command, Command::Campaign(_));
            resolve(a, campaign, env_seed.as_deref()).and_then(|s| {
                if a.dump_config {
                    print!("{}", s.dump());
                    Ok(0)
                } else if campaign {
                    cmd_campaign(&s, a.out.as_deref())
                } else {
                    cmd_run(&s, a.out.as_deref())
                }
            })
        }
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common(argv: &[&str]) -> CommonArgs {
        let mut full = vec!["snowpac", "run"];
        full.extend_from_slice(argv);
        match Cli::try_parse_from(full).unwrap().command {
            Command::Run(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn dump_round_trips() {
        let mut s = resolve(&common(&["--lambda-t", "1.7", "--kernel", "ard", "--n-samples", "50"]), false, Some("9")).unwrap();
        s.optimizer.omega = 1.0 / 3.0;
        let mut back = Settings::default();
        back.apply_file_text(&s.dump(), Path::new("mem")).unwrap();
        assert_eq!(back, s);
        assert_eq!(s.seed, 9);
    }

    #[test]
    fn precedence_flags_over_env() {
        assert_eq!(resolve(&common(&["--seed", "4"]), false, Some("9")).unwrap().seed, 4);
        assert_eq!(resolve(&common(&[]), false, None).unwrap().seed, 0);
        assert!(resolve(&common(&[]), false, Some("x")).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(resolve(&common(&["--lambda-t", "0"]), false, None).is_err());
        assert!(matches!(resolve(&common(&["--problem", "nope"]), false, None), Err(SnowpacError::UnknownProblem(_))));
        let mut s = Settings::default();
        assert!(s.apply_file_text("bogus = 1\n", Path::new("f")).is_err());
        assert!(s.apply_file_text("seed 3\n", Path::new("f")).is_err());
        s.apply_file_text("# comment\nseed = 3 # trailing\n\n", Path::new("f")).unwrap();
        assert_eq!(s.seed, 3);
    }

    #[test]
    fn campaign_defaults_cover_suite() {
        let s = resolve(&common(&[]), true, None).unwrap();
        assert_eq!(s.problems.len(), 8);
        assert_eq!(s.formulations.len(), 3);
    }
}
