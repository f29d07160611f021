//! Repeated seeded runs, accuracy post-processing, data profiles and export.
//!
//! Step convention: step `k` is the current iterate after outer iteration `k`
//! of the optimizer, with `k = 0` the starting point. A run is solved at the
//! first step whose exact objective error and exact violation meet the
//! thresholds; steps beyond [`STEP_CAP`] never count.
//!
//! The CSV export has one row per record per step with the header
//!
//! ```text
//! problem,formulation,n_samples,repeat,seed,n_p,status,reference,iteration,evaluations,objective,objective_error,max_violation,design_error
//! ```
//!
//! `objective` is the exact robust objective at the iterate, `objective_error`
//! is `|R(x_k) − R*| / max(1, |R*|)`, `max_violation` is `max_i [R_ci(x_k)]⁺`
//! and `design_error` is the Euclidean distance of the design coordinates to
//! the reference point (the CVaR level is not a design coordinate). Records
//! without steps are written as a single row with empty step fields. Wall time
//! is kept out of the CSV so that exports are reproducible byte for byte; it
//! appears in the summary instead.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::{run, IterationRecord, OptimizerConfig, RobustEvaluator};
use crate::error::{Result, SnowpacError};
use crate::problems::{make_robust, problem_by_name, reference, Formulation, Reference, StochasticBlackBox};

/// Largest step index that can count as solved.
pub const STEP_CAP: usize = 250;

/// Exact quantities at one step of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub iteration: usize,
    /// Measure evaluations spent when the step was recorded.
    pub evaluations: usize,
    pub objective: f64,
    pub objective_error: f64,
    pub max_violation: f64,
    pub design_error: f64,
}

/// One optimization run after post-processing with exact robust functions.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem: String,
    pub formulation: Formulation,
    pub n_samples: usize,
    pub repeat: usize,
    pub seed: u64,
    /// Number of optimizer variables, including the CVaR level.
    pub n_p: usize,
    /// Termination reason, or an error message for runs that could not start.
    pub status: String,
    /// Exact robust optimum value, if an oracle exists.
    pub reference: Option<f64>,
    pub steps: Vec<StepRecord>,
    /// Not exported to CSV.
    pub wall_seconds: f64,
}

impl RunRecord {
    pub fn final_step(&self) -> Option<&StepRecord> {
        self.steps.last()
    }
}

/// Fraction of runs solved within each budget ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct DataProfile {
    pub alphas: Vec<f64>,
    pub fraction_solved: Vec<f64>,
}

/// Relative objective error `|v − v*| / max(1, |v*|)`.
pub fn relative_error(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(1.0)
}

/// First step index meeting both thresholds, `None` for never (within the cap).
///
/// Fails with [`SnowpacError::MissingOracle`] if the record has no reference.
pub fn solved_time(record: &RunRecord, eps_f: f64, eps_c: f64) -> Result<Option<usize>> {
    if record.reference.is_none() {
        return Err(SnowpacError::MissingOracle(format!(
            "run {} / {} has no reference optimum",
            record.problem, record.formulation
        )));
    }
    Ok(record
        .steps
        .iter()
        .filter(|s| s.iteration <= STEP_CAP)
        .find(|s| s.objective_error <= eps_f && s.max_violation <= eps_c)
        .map(|s| s.iteration))
}

/// `d(α)` from solved times and problem dimensions.
pub fn profile_from_times(times: &[(Option<usize>, usize)], alphas: &[f64]) -> DataProfile {
    let total = times.len().max(1) as f64;
    let fraction_solved = alphas
        .iter()
        .map(|&a| {
            let hits = times.iter().filter(|(t, n_p)| t.is_some_and(|t| t as f64 / (*n_p as f64 + 1.0) <= a)).count();
            hits as f64 / total
        })
        .collect();
    DataProfile { alphas: alphas.to_vec(), fraction_solved }
}

/// `d(α) = |{runs : t / (n_p + 1) ≤ α}| / |runs|`.
pub fn data_profile(records: &[RunRecord], eps_f: f64, eps_c: f64, alphas: &[f64]) -> Result<DataProfile> {
    if records.is_empty() {
        return Err(SnowpacError::InvalidArgument("data profile needs at least one record".into()));
    }
    let times = records
        .iter()
        .map(|r| Ok((solved_time(r, eps_f, eps_c)?, r.n_p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(profile_from_times(&times, alphas))
}

/// Integer budget ratios `0, 1, …, max`.
pub fn default_alphas(max: usize) -> Vec<f64> {
    (0..=max).map(|a| a as f64).collect()
}

/// Exact per-step quantities along an iteration history.
pub fn post_process(
    base: &StochasticBlackBox,
    formulation: Formulation,
    reference: &Reference,
    iterations: &[IterationRecord],
) -> Result<Vec<StepRecord>> {
    let n = base.dim();
    iterations
        .iter()
        .map(|it| {
            let objective = base.exact_objective(formulation, &it.x)?;
            let max_violation = base.exact_constraints(formulation, &it.x)?.iter().fold(0.0f64, |m, c| m.max(c.max(0.0)));
            let design_error = it.x[..n].iter().zip(&reference.point[..n]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            Ok(StepRecord {
                iteration: it.k,
                evaluations: it.evaluations_used,
                objective,
                objective_error: relative_error(objective, reference.value),
                max_violation,
                design_error,
            })
        })
        .collect()
}

/// What to run in a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSpec {
    pub problems: Vec<String>,
    pub formulations: Vec<Formulation>,
    pub n_samples: Vec<usize>,
    pub repeats: usize,
    pub master_seed: u64,
    /// Worker threads; results do not depend on this.
    pub workers: usize,
    /// Total measure evaluations per run including the `n_p + 1` initial
    /// ones. `None` uses `config.n_max` as given.
    pub evaluation_budget: Option<usize>,
    pub config: OptimizerConfig,
}

impl CampaignSpec {
    /// Defaults matching the benchmark protocol: 250 steps and 250 evaluations.
    pub fn new(problems: Vec<String>, formulations: Vec<Formulation>, n_samples: Vec<usize>, repeats: usize) -> Self {
        CampaignSpec {
            problems,
            formulations,
            n_samples,
            repeats,
            master_seed: 0,
            workers: 1,
            evaluation_budget: Some(STEP_CAP),
            config: OptimizerConfig { max_iterations: STEP_CAP, ..OptimizerConfig::default() },
        }
    }

    pub fn num_runs(&self) -> usize {
        self.problems.len() * self.formulations.len() * self.n_samples.len() * self.repeats
    }
}

/// Seed of repeat `repeat` under `master`, shared by every problem,
/// formulation and sample size so that selections do not shift seeds.
pub fn repeat_seed(master: u64, repeat: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(repeat as u64);
    rng.next_u64()
}

/// One seeded run, post-processed. Failures become records with a status
/// message instead of errors.
#[allow(clippy::too_many_arguments)]
pub fn run_single(
    base: &StochasticBlackBox,
    formulation: Formulation,
    n_samples: usize,
    repeat: usize,
    seed: u64,
    config: &OptimizerConfig,
    evaluation_budget: Option<usize>,
    reference: Option<&Reference>,
) -> RunRecord {
    let start = Instant::now();
    let mut record = RunRecord {
        problem: base.name().to_string(),
        formulation,
        n_samples,
        repeat,
        seed,
        n_p: base.dim() + formulation.extra_dims(),
        status: String::new(),
        reference: reference.map(|r| r.value),
        steps: Vec::new(),
        wall_seconds: 0.0,
    };
    let Some(reference) = reference else {
        record.status = "error: no reference optimum".into();
        return record;
    };
    let outcome = (|| -> Result<(String, Vec<StepRecord>)> {
        let problem = make_robust(base.clone(), formulation, n_samples, seed)?;
        let mut cfg = config.clone();
        cfg.seed = seed;
        if let Some(b) = evaluation_budget {
            cfg.n_max = b.saturating_sub(problem.dim() + 1);
        }
        let result = run(&problem, &cfg)?;
        let steps = post_process(base, formulation, reference, &result.iterations)?;
        Ok((result.termination.to_string(), steps))
    })();
    match outcome {
        Ok((status, steps)) => {
            record.status = status;
            record.steps = steps;
        }
        Err(e) => record.status = format!("error: {e}"),
    }
    record.wall_seconds = start.elapsed().as_secs_f64();
    record
}

/// Whether a record describes a run that failed rather than finished.
pub fn is_failed(record: &RunRecord) -> bool {
    record.status.starts_with("error") || record.status.contains("failed")
}

/// Run every (problem, formulation, N, repeat) combination.
///
/// Records come back in that nesting order whatever the worker count.
/// Unknown problem names and invalid configurations are errors; everything
/// else that goes wrong in a run is recorded in its status.
pub fn run_campaign(spec: &CampaignSpec) -> Result<Vec<RunRecord>> {
    spec.config.validate()?;
    if spec.workers == 0 {
        return Err(SnowpacError::InvalidArgument("workers must be at least 1".into()));
    }
    let mut jobs = Vec::with_capacity(spec.num_runs());
    for name in &spec.problems {
        let base = problem_by_name(name)?;
        for &formulation in &spec.formulations {
            let reference = reference(&base, formulation).ok();
            for &n in &spec.n_samples {
                for repeat in 0..spec.repeats {
                    jobs.push((base.clone(), formulation, reference.clone(), n, repeat));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| SnowpacError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|(base, formulation, reference, n, repeat)| {
                let seed = repeat_seed(spec.master_seed, *repeat);
                run_single(base, *formulation, *n, *repeat, seed, &spec.config, spec.evaluation_budget, reference.as_ref())
            })
            .collect()
    }))
}

const HEADER: [&str; 14] = [
    "problem",
    "formulation",
    "n_samples",
    "repeat",
    "seed",
    "n_p",
    "status",
    "reference",
    "iteration",
    "evaluations",
    "objective",
    "objective_error",
    "max_violation",
    "design_error",
];

fn csv_err(path: &Path, e: impl std::fmt::Display) -> SnowpacError {
    SnowpacError::Parse { path: path.to_path_buf(), message: e.to_string() }
}

/// CSV text of the records (header only for an empty list).
pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = "writing to memory cannot fail";
    w.write_record(HEADER).expect(fail);
    for r in records {
        let prefix = [
            r.problem.clone(),
            r.formulation.name().to_string(),
            r.n_samples.to_string(),
            r.repeat.to_string(),
            r.seed.to_string(),
            r.n_p.to_string(),
            r.status.clone(),
            r.reference.map(|v| v.to_string()).unwrap_or_default(),
        ];
        if r.steps.is_empty() {
            let row: Vec<String> = prefix.iter().cloned().chain(std::iter::repeat_n(String::new(), 6)).collect();
            w.write_record(&row).expect(fail);
        }
        for s in &r.steps {
            let tail = [
                s.iteration.to_string(),
                s.evaluations.to_string(),
                s.objective.to_string(),
                s.objective_error.to_string(),
                s.max_violation.to_string(),
                s.design_error.to_string(),
            ];
            let row: Vec<&String> = prefix.iter().chain(tail.iter()).collect();
            w.write_record(row).expect(fail);
        }
    }
    String::from_utf8(w.into_inner().expect(fail)).expect("csv output is UTF-8")
}

/// Parse CSV text produced by [`records_to_csv`]. `path` is only used in
/// error messages.
pub fn records_from_csv(text: &str, path: &Path) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| csv_err(path, e))?;
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(csv_err(path, "unexpected header"));
    }
    let mut records: Vec<RunRecord> = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let at = |m: String| csv_err(path, format!("row {}: {m}", line + 2));
        let num = |i: usize| -> Result<f64> { row[i].parse::<f64>().map_err(|e| at(format!("{}: {e}", HEADER[i]))) };
        let int = |i: usize| -> Result<u64> { row[i].parse::<u64>().map_err(|e| at(format!("{}: {e}", HEADER[i]))) };
        let formulation: Formulation = row[1].parse().map_err(|e: SnowpacError| at(e.to_string()))?;
        let (n_samples, repeat) = (int(2)? as usize, int(3)? as usize);
        let same = records.last().is_some_and(|r: &RunRecord| {
            r.problem == row[0] && r.formulation == formulation && r.n_samples == n_samples && r.repeat == repeat
        });
        if !same {
            records.push(RunRecord {
                problem: row[0].to_string(),
                formulation,
                n_samples,
                repeat,
                seed: int(4)?,
                n_p: int(5)? as usize,
                status: row[6].to_string(),
                reference: if row[7].is_empty() { None } else { Some(num(7)?) },
                steps: Vec::new(),
                wall_seconds: 0.0,
            });
        }
        if row[8].is_empty() {
            continue;
        }
        let step = StepRecord {
            iteration: int(8)? as usize,
            evaluations: int(9)? as usize,
            objective: num(10)?,
            objective_error: num(11)?,
            max_violation: num(12)?,
            design_error: num(13)?,
        };
        records.last_mut().expect("pushed above").steps.push(step);
    }
    Ok(records)
}

/// Write `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    use std::io::Write;
    let io = |source| SnowpacError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| SnowpacError::Io { path: path.to_path_buf(), source })
}

pub fn write_records(records: &[RunRecord], path: &Path) -> Result<()> {
    write_atomic(path, records_to_csv(records).as_bytes())
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    records_from_csv(&read_text(path)?, path)
}

/// Profile as CSV with the thresholds in `#` comment lines.
pub fn profile_to_csv(profile: &DataProfile, eps_f: f64, eps_c: f64) -> String {
    let mut out = format!("# eps_f = {eps_f}\n# eps_c = {eps_c}\nalpha,fraction_solved\n");
    for (a, d) in profile.alphas.iter().zip(&profile.fraction_solved) {
        let _ = writeln!(out, "{a},{d}");
    }
    out
}

pub fn profile_from_csv(text: &str, path: &Path) -> Result<DataProfile> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut p = DataProfile { alphas: Vec::new(), fraction_solved: Vec::new() };
    for row in reader.records() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let parse = |s: &str| s.parse::<f64>().map_err(|e| csv_err(path, e));
        p.alphas.push(parse(&row[0])?);
        p.fraction_solved.push(parse(&row[1])?);
    }
    Ok(p)
}

pub fn write_profile(profile: &DataProfile, eps_f: f64, eps_c: f64, path: &Path) -> Result<()> {
    write_atomic(path, profile_to_csv(profile, eps_f, eps_c).as_bytes())
}

pub fn read_profile(path: &Path) -> Result<DataProfile> {
    profile_from_csv(&read_text(path)?, path)
}

/// Minimum, quartiles and maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Quartiles {
    /// Linear interpolation between order statistics; NaN fields when empty.
    pub fn of(values: &[f64]) -> Self {
        let mut v: Vec<f64> = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |p: f64| {
            if v.is_empty() {
                return f64::NAN;
            }
            let h = p * (v.len() - 1) as f64;
            let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Quartiles { min: at(0.0), q1: at(0.25), median: at(0.5), q3: at(0.75), max: at(1.0) }
    }
}

/// Final-step statistics of one (problem, formulation, N) group.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryGroup {
    pub problem: String,
    pub formulation: Formulation,
    pub n_samples: usize,
    pub runs: usize,
    pub failures: usize,
    pub solved: usize,
    pub objective_error: Quartiles,
    pub max_violation: Quartiles,
    pub design_error: Quartiles,
    pub mean_wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub eps_f: f64,
    pub eps_c: f64,
    pub groups: Vec<SummaryGroup>,
}

/// Group records in order of first appearance and summarize final steps.
pub fn summarize(records: &[RunRecord], eps_f: f64, eps_c: f64) -> Summary {
    let mut groups: Vec<(String, Formulation, usize, Vec<&RunRecord>)> = Vec::new();
    for r in records {
        match groups.iter_mut().find(|g| g.0 == r.problem && g.1 == r.formulation && g.2 == r.n_samples) {
            Some(g) => g.3.push(r),
            None => groups.push((r.problem.clone(), r.formulation, r.n_samples, vec![r])),
        }
    }
    let groups = groups
        .into_iter()
        .map(|(problem, formulation, n_samples, rs)| {
            let finals: Vec<&StepRecord> = rs.iter().filter_map(|r| r.final_step()).collect();
            let q = |f: fn(&StepRecord) -> f64| Quartiles::of(&finals.iter().map(|s| f(s)).collect::<Vec<_>>());
            SummaryGroup {
                problem,
                formulation,
                n_samples,
                runs: rs.len(),
                failures: rs.iter().filter(|r| is_failed(r)).count(),
                solved: rs.iter().filter(|r| matches!(solved_time(r, eps_f, eps_c), Ok(Some(_)))).count(),
                objective_error: q(|s| s.objective_error),
                max_violation: q(|s| s.max_violation),
                design_error: q(|s| s.design_error),
                mean_wall_seconds: rs.iter().map(|r| r.wall_seconds).sum::<f64>() / rs.len() as f64,
            }
        })
        .collect();
    Summary { eps_f, eps_c, groups }
}

fn quartile_line(q: &Quartiles) -> String {
    format!("{} {} {} {} {}", q.min, q.q1, q.median, q.q3, q.max)
}

/// Structured text: a preamble of `key = value` lines and one `[group]`
/// section per (problem, formulation, N). Quartile lines list
/// min, q1, median, q3 and max.
pub fn summary_to_text(summary: &Summary) -> String {
    let mut out = format!("eps_f = {}\neps_c = {}\n", summary.eps_f, summary.eps_c);
    for g in &summary.groups {
        let _ = write!(
            out,
            "\n[group]\nproblem = {}\nformulation = {}\nn_samples = {}\nruns = {}\nfailures = {}\nsolved = {}\n\
             final_objective_error = {}\nfinal_max_violation = {}\nfinal_design_error = {}\nmean_wall_seconds = {}\n",
            g.problem,
            g.formulation,
            g.n_samples,
            g.runs,
            g.failures,
            g.solved,
            quartile_line(&g.objective_error),
            quartile_line(&g.max_violation),
            quartile_line(&g.design_error),
            g.mean_wall_seconds,
        );
    }
    out
}

pub fn summary_from_text(text: &str, path: &Path) -> Result<Summary> {
    let bad = |m: String| SnowpacError::Parse { path: path.to_path_buf(), message: m };
    let mut sections: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "[group]" {
            sections.push(Vec::new());
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("line {}: expected key = value", i + 1)))?;
        sections.last_mut().expect("non-empty").push((k.trim().to_string(), v.trim().to_string()));
    }
    let get = |sec: &[(String, String)], key: &str| -> Result<String> {
        sec.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone()).ok_or_else(|| bad(format!("missing key '{key}'")))
    };
    let float = |s: String| s.parse::<f64>().map_err(|e| bad(format!("'{s}': {e}")));
    let int = |s: String| s.parse::<usize>().map_err(|e| bad(format!("'{s}': {e}")));
    let quart = |s: String| -> Result<Quartiles> {
        let v = s.split_whitespace().map(|t| float(t.to_string())).collect::<Result<Vec<_>>>()?;
        match v[..] {
            [min, q1, median, q3, max] => Ok(Quartiles { min, q1, median, q3, max }),
            _ => Err(bad(format!("expected five quartile values in '{s}'"))),
        }
    };
    let head = &sections[0];
    let mut summary = Summary { eps_f: float(get(head, "eps_f")?)?, eps_c: float(get(head, "eps_c")?)?, groups: Vec::new() };
    for sec in &sections[1..] {
        summary.groups.push(SummaryGroup {
            problem: get(sec, "problem")?,
            formulation: get(sec, "formulation")?.parse()?,
            n_samples: int(get(sec, "n_samples")?)?,
            runs: int(get(sec, "runs")?)?,
            failures: int(get(sec, "failures")?)?,
            solved: int(get(sec, "solved")?)?,
            objective_error: quart(get(sec, "final_objective_error")?)?,
            max_violation: quart(get(sec, "final_max_violation")?)?,
            design_error: quart(get(sec, "final_design_error")?)?,
            mean_wall_seconds: float(get(sec, "mean_wall_seconds")?)?,
        });
    }
    Ok(summary)
}

pub fn write_summary(summary: &Summary, path: &Path) -> Result<()> {
    write_atomic(path, summary_to_text(summary).as_bytes())
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    summary_from_text(&read_text(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(t: Option<usize>, n_p: usize, len: usize) -> RunRecord {
        // Objective error drops below 1e-2 at step `t` and stays there.
        let steps = (0..len)
            .map(|k| {
                let solved = t.is_some_and(|t| k >= t);
                StepRecord {
                    iteration: k,
                    evaluations: 3 + k,
                    objective: 1.0,
                    objective_error: if solved { 1e-3 } else { 0.5 },
                    max_violation: 0.0,
                    design_error: 0.1,
                }
            })
            .collect();
        RunRecord {
            problem: "p".into(),
            formulation: Formulation::MeanMean,
            n_samples: 10,
            repeat: 0,
            seed: 1,
            n_p,
            status: "budget".into(),
            reference: Some(0.0),
            steps,
            wall_seconds: 0.0,
        }
    }

    #[test]
    fn three_record_profile() {
        let recs = [synthetic(Some(3), 2, 20), synthetic(Some(6), 2, 20), synthetic(None, 2, 20)];
        let p = data_profile(&recs, 1e-2, 1e-2, &[1.0, 2.0, 10.0]).unwrap();
        assert_eq!(p.fraction_solved, vec![1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]);
        let back = profile_from_csv(&profile_to_csv(&p, 1e-2, 1e-2), Path::new("mem")).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn solved_time_cases() {
        assert_eq!(solved_time(&synthetic(Some(0), 2, 5), 1e-2, 1e-2).unwrap(), Some(0));
        assert_eq!(solved_time(&synthetic(Some(17), 2, 40), 1e-2, 1e-2).unwrap(), Some(17));
        let mut infeasible = synthetic(Some(0), 2, 5);
        infeasible.steps.iter_mut().for_each(|s| s.max_violation = 1.0);
        assert_eq!(solved_time(&infeasible, 1e-2, 1e-2).unwrap(), None);
        assert_eq!(solved_time(&synthetic(Some(251), 2, 300), 1e-2, 1e-2).unwrap(), None);
        let mut orphan = synthetic(Some(0), 2, 5);
        orphan.reference = None;
        assert!(matches!(solved_time(&orphan, 1e-2, 1e-2), Err(SnowpacError::MissingOracle(_))));
    }

    #[test]
    fn profile_extremes() {
        let never: Vec<_> = (0..4).map(|_| synthetic(None, 3, 10)).collect();
        let now: Vec<_> = (0..4).map(|_| synthetic(Some(0), 3, 10)).collect();
        let alphas = default_alphas(20);
        assert!(data_profile(&never, 1e-2, 1e-2, &alphas).unwrap().fraction_solved.iter().all(|d| *d == 0.0));
        assert!(data_profile(&now, 1e-2, 1e-2, &alphas).unwrap().fraction_solved.iter().all(|d| *d == 1.0));
        assert!(data_profile(&[], 1e-2, 1e-2, &alphas).is_err());
    }

    #[test]
    fn csv_round_trip_and_empty() {
        assert_eq!(records_to_csv(&[]).trim_end(), HEADER.join(","));
        let mut recs: Vec<RunRecord> = (0..100).map(|i| {
            let mut r = synthetic(if i % 3 == 0 { None } else { Some(i % 7) }, 2 + i % 3, 1 + i % 9);
            r.repeat = i;
            r.steps.iter_mut().for_each(|s| s.objective = 0.1 * i as f64 + 1.0 / 3.0);
            r
        }).collect();
        recs[5].steps.clear();
        recs[5].status = "error: boom, with comma".into();
        recs[5].reference = None;
        let text = records_to_csv(&recs);
        assert_eq!(records_from_csv(&text, Path::new("mem")).unwrap(), recs);
    }

    #[test]
    fn summary_round_trip() {
        let recs = [synthetic(Some(3), 2, 20), synthetic(Some(6), 2, 10), synthetic(None, 2, 4)];
        let s = summarize(&recs, 1e-2, 1e-2);
        assert_eq!(s.groups.len(), 1);
        assert_eq!(s.groups[0].solved, 2);
        assert_eq!(s.groups[0].objective_error.median, 1e-3);
        let back = summary_from_text(&summary_to_text(&s), Path::new("mem")).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn quartiles_interpolate() {
        let q = Quartiles::of(&[4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!((q.min, q.q1, q.median, q.q3, q.max), (1.0, 2.0, 3.0, 4.0, 5.0));
        assert_eq!(Quartiles::of(&[1.0, 2.0]).median, 1.5);
    }

    #[test]
    fn atomic_write_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_records(&[synthetic(Some(1), 2, 3)], &p).unwrap();
        assert_eq!(read_records(&p).unwrap().len(), 1);
        let missing = dir.path().join("no/such/dir/out.csv");
        match write_records(&[], &missing) {
            Err(SnowpacError::Io { path, .. }) => assert_eq!(path, missing),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn campaign_shape_and_seeds() {
        let mut spec = CampaignSpec::new(vec!["hs228".into()], vec![Formulation::MeanMean], vec![20], 2);
        spec.evaluation_budget = Some(15);
        spec.config.gp_enabled = false;
        let recs = run_campaign(&spec).unwrap();
        assert_eq!(recs.len(), 2);
        assert_ne!(recs[0].seed, recs[1].seed);
        assert_eq!(recs[0].seed, repeat_seed(0, 0));
        assert!(recs.iter().all(|r| !r.steps.is_empty() && r.steps[0].iteration == 0));
        spec.workers = 3;
        assert_eq!(records_to_csv(&run_campaign(&spec).unwrap()), records_to_csv(&recs));
    }
}
