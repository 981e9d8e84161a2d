use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use batchlp::fsb::{fractional_indices, run_fsb, score_branching, FsbConfig, FsbRequest, DEFAULT_SCORE_EPS};
use batchlp::io::{generate, read_mps, write_mps, Family, InstanceSpec, MpsModel, ProblemReport, RunReport};
use batchlp::obbt::{run_obbt, ObbtConfig};
use batchlp::oracle::{oracle_solve, OracleStatus};
use batchlp::pdhg::{solve, step_size, SolverConfig, Status};
use batchlp::tuner::{tune, DEFAULT_CANDIDATES, DEFAULT_REPETITIONS};
use batchlp::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_LIMIT: u8 = 3;

pub const BENCH_HEADER: [&str; 8] = ["family", "instance", "m", "n", "nnz", "S", "runtime_s", "iters"];

#[derive(Parser)]
#[command(name = "batchlp", version, about = "Batched PDHG for LPs sharing one constraint matrix")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one LP.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the JSON report here (`-` for stdout).
        #[arg(long)]
        json: Option<String>,
    },
    /// One round of full strong branching.
    Fsb {
        file: PathBuf,
        /// Relaxation point: numbers separated by whitespace or commas, or a JSON array.
        #[arg(long, conflicts_with = "from_root_oracle", required_unless_present = "from_root_oracle")]
        xrel: Option<PathBuf>,
        /// Take the relaxation point from the exact vertex oracle (tiny LPs only).
        #[arg(long)]
        from_root_oracle: bool,
        #[arg(long, default_value_t = 1e-6)]
        int_tol: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        json: Option<String>,
    },
    /// One pass of bound tightening.
    Obbt {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, default_value_t = 1e-8)]
        eps_dual: f64,
        #[arg(long, default_value_t = 1e-4)]
        min_improvement: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// Objective cutoff `cᵀx ≤ A`.
        #[arg(long, allow_hyphen_values = true)]
        cutoff: Option<f64>,
        /// Accept certified dual bounds of columns stopped by the iteration limit.
        #[arg(long)]
        lenient: bool,
        #[arg(long)]
        json: Option<String>,
    },
    /// Time sparse products at several batch widths.
    Tune {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        widths: Option<Vec<usize>>,
        #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
        reps: usize,
        /// Write the CSV here (`-` for stdout).
        #[arg(long, default_value = "-")]
        csv: String,
    },
    /// Strong branching on generated instances.
    Bench {
        #[arg(long)]
        family: String,
        /// Comma separated size strings, e.g. `100x1500,300x1500`.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        int_tol: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "-")]
        csv: String,
    },
    /// Generate an instance and write it as MPS.
    Gen {
        #[arg(long)]
        family: String,
        #[arg(long)]
        sizes: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            eps_opt: self.eps,
            max_iterations: self.max_iter,
            ..SolverConfig::default()
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidConfig(_) => EXIT_USAGE,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn emit(target: &str, text: &str) -> Result<(), Failure> {
    if target == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| input_error(e.to_string()))
    } else {
        fs::write(target, text).map_err(|e| input_error(format!("{target}: {e}")))
    }
}

fn emit_report(target: &Option<String>, report: &RunReport) -> Result<(), Failure> {
    match target {
        Some(t) => emit(t, &(report.to_json()? + "\n")),
        None => Ok(()),
    }
}

fn load(path: &Path) -> Result<MpsModel, Failure> {
    read_mps(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn read_point(path: &Path, n: usize) -> Result<Vec<f64>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let values: Vec<f64> = if text.trim_start().starts_with('[') {
        serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))?
    } else {
        text.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| input_error(format!("{}: invalid number '{s}'", path.display()))))
            .collect::<Result<_, _>>()?
    };
    if values.len() != n {
        return Err(input_error(format!("{}: expected {n} values, found {}", path.display(), values.len())));
    }
    Ok(values)
}

/// Runs `body`; on failure a report carrying the error is still written when
/// JSON output was requested.
fn with_report<F>(json_target: &Option<String>, mut report: RunReport, body: F) -> Result<u8, Failure>
where
    F: FnOnce(&mut RunReport) -> Result<u8, Failure>,
{
    match body(&mut report) {
        Ok(code) => {
            emit_report(json_target, &report)?;
            Ok(code)
        }
        Err(f) => {
            report.error = Some(f.message.clone());
            let _ = emit_report(json_target, &report);
            Err(f)
        }
    }
}

fn cmd_solve(file: &Path, args: &SolverArgs, json_target: &Option<String>) -> Result<u8, Failure> {
    let cfg = args.config();
    cfg.validate()?;
    let report = RunReport::new("solve", Some(file.display().to_string()), cfg.clone());
    with_report(json_target, report, |report| {
        let t = Instant::now();
        let model = load(file)?;
        report.times.load_s = t.elapsed().as_secs_f64();
        let t = Instant::now();
        step_size(&model.problem.a)?;
        report.times.norm_estimate_s = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let mut r = solve(&model.problem, &cfg, None)?;
        report.times.solve_s = t.elapsed().as_secs_f64();
        r.objective += model.objective_offset;
        r.dual_objective += model.objective_offset;
        report.problems.push(ProblemReport::from_result(0, &r));
        eprintln!("{}: {} objective {} after {} iterations", file.display(), r.status.as_str(), r.objective, r.iterations);
        Ok(if r.status == Status::IterationLimit { EXIT_LIMIT } else { 0 })
    })
}

fn root_point_from_oracle(model: &MpsModel) -> Result<Vec<f64>, Failure> {
    let r = oracle_solve(&model.problem)?;
    match (r.status, r.vertex) {
        (OracleStatus::Optimal, Some(v)) => Ok(v),
        (s, _) => Err(input_error(format!("root relaxation is {s:?}, no point to branch on"))),
    }
}

fn cmd_fsb(file: &Path, xrel: &Option<PathBuf>, from_oracle: bool, int_tol: f64, args: &SolverArgs, json_target: &Option<String>) -> Result<u8, Failure> {
    let cfg = FsbConfig {
        solver: args.config(),
        ..FsbConfig::default()
    };
    cfg.solver.validate()?;
    let report = RunReport::new("fsb", Some(file.display().to_string()), cfg.solver.clone());
    with_report(json_target, report, |report| {
        let t = Instant::now();
        let model = load(file)?;
        let n = model.problem.n_cols();
        let x = match (xrel, from_oracle) {
            (Some(path), _) => read_point(path, n)?,
            (None, _) => root_point_from_oracle(&model)?,
        };
        report.times.load_s = t.elapsed().as_secs_f64();
        let candidates: Vec<usize> = if model.integer.is_empty() { (0..n).collect() } else { model.integer.clone() };
        let req = FsbRequest::from_candidates(model.problem.clone(), x, &candidates, int_tol)?;
        let t = Instant::now();
        let out = run_fsb(&req, &cfg)?;
        report.times.solve_s = t.elapsed().as_secs_f64();
        let p = req.p();
        for (j, b) in out.branches.iter().enumerate() {
            report.problems.push(child_report(j, &b.up));
            report.problems.push(child_report(p + j, &b.down));
        }
        report.problems.sort_by_key(|r| r.index);
        let ranking = score_branching(&out, DEFAULT_SCORE_EPS);
        report.outcome = Some(json!({ "fsb": out, "ranking": ranking }));
        eprintln!("{}: {} fractional variables, {} branch LPs", file.display(), p, 2 * p);
        let all_limited = p > 0 && out.iteration_limit_count() == 2 * p;
        Ok(if all_limited { EXIT_LIMIT } else { 0 })
    })
}

fn child_report(index: usize, c: &batchlp::fsb::ChildOutcome) -> ProblemReport {
    ProblemReport {
        index,
        status: c.status,
        objective: c.objective,
        dual_objective: f64::NAN,
        iterations: c.iterations,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_obbt(
    file: &Path,
    eps: f64,
    eps_dual: f64,
    min_improvement: f64,
    max_iter: usize,
    cutoff: Option<f64>,
    lenient: bool,
    json_target: &Option<String>,
) -> Result<u8, Failure> {
    let cfg = ObbtConfig {
        eps_opt: eps,
        eps_dual,
        min_improvement,
        max_iterations: max_iter,
        cutoff,
        lenient,
    };
    cfg.validate()?;
    let report = RunReport::new("obbt", Some(file.display().to_string()), cfg.solver_config());
    with_report(json_target, report, |report| {
        let t = Instant::now();
        let model = load(file)?;
        report.times.load_s = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let out = run_obbt(&model.problem, &cfg)?;
        report.times.solve_s = t.elapsed().as_secs_f64();
        let mut changed = Vec::new();
        for v in out.variables.iter().filter(|v| v.changed()) {
            if v.lower_changed {
                let m = v.lower_candidate.map_or(0.0, |c| c.margin);
                changed.push(json!({"variable": v.variable, "name": model.col_names[v.variable], "side": "lower", "old": v.old.lower, "new": v.new.lower, "margin": m}));
            }
            if v.upper_changed {
                let m = v.upper_candidate.map_or(0.0, |c| c.margin);
                changed.push(json!({"variable": v.variable, "name": model.col_names[v.variable], "side": "upper", "old": v.old.upper, "new": v.new.upper, "margin": m}));
            }
        }
        report.outcome = Some(json!({
            "changed": changed,
            "solved": out.solved,
            "subproblems": out.subproblems,
            "iteration_limit": out.iteration_limit,
            "variables_changed": out.changed,
            "mean_reduction_percent": out.mean_reduction,
            "obbt": out,
        }));
        eprintln!(
            "{}: {}/{} subproblems solved, {} variables changed",
            file.display(),
            out.solved,
            out.subproblems,
            out.changed
        );
        let nothing = out.subproblems > 0 && out.solved == 0 && out.changed == 0;
        Ok(if nothing { EXIT_LIMIT } else { 0 })
    })
}

fn cmd_tune(file: &Path, widths: &Option<Vec<usize>>, reps: usize, csv_target: &str) -> Result<u8, Failure> {
    let model = load(file)?;
    let widths = widths.clone().unwrap_or_else(|| DEFAULT_CANDIDATES.to_vec());
    let report = tune(&model.problem.a, &widths, reps)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    emit(csv_target, &String::from_utf8_lossy(&buf))?;
    eprintln!("chosen width {}", report.chosen);
    Ok(0)
}

fn cmd_bench(family: &str, sizes: &[String], seed: u64, int_tol: f64, args: &SolverArgs, csv_target: &str) -> Result<u8, Failure> {
    let family: Family = family.parse()?;
    let cfg = FsbConfig {
        solver: args.config(),
        ..FsbConfig::default()
    };
    cfg.solver.validate()?;
    let specs = sizes.iter().map(|s| InstanceSpec::parse(family, s)).collect::<Result<Vec<_>, _>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| input_error(e.to_string());
    w.write_record(BENCH_HEADER).map_err(csv_err)?;
    for spec in specs {
        let g = generate(spec, seed)?;
        let p = &g.problem;
        let root = solve(p, &cfg.solver, None)?;
        if root.status != Status::Optimal {
            eprintln!("{}: root relaxation {}, skipped", g.name, root.status.as_str());
            continue;
        }
        let frac = fractional_indices(&root.x, &g.integer, int_tol);
        let req = FsbRequest::with_tolerance(p.clone(), root.x.clone(), frac, int_tol)?;
        let t = Instant::now();
        let out = run_fsb(&req, &cfg)?;
        let runtime = t.elapsed().as_secs_f64();
        w.write_record([
            family.as_str().to_string(),
            g.name.clone(),
            p.n_rows().to_string(),
            p.n_cols().to_string(),
            p.a.nnz().to_string(),
            (2 * req.p()).to_string(),
            format!("{runtime:.6}"),
            out.batch_iterations.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| input_error(e.to_string()))?;
    emit(csv_target, &String::from_utf8_lossy(&bytes))?;
    Ok(0)
}

fn cmd_gen(family: &str, sizes: &str, seed: u64, out: &str) -> Result<u8, Failure> {
    let family: Family = family.parse()?;
    let g = generate(InstanceSpec::parse(family, sizes)?, seed)?;
    let model = MpsModel::from_problem(&g.name, g.problem, g.integer);
    emit(out, &write_mps(&model))?;
    Ok(0)
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("BATCHLP_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| Failure {
            code: EXIT_USAGE,
            message: format!("BATCHLP_THREADS must be a positive integer, got '{v}'"),
        })?;
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Solve { file, solver, json } => cmd_solve(file, solver, json),
        Command::Fsb {
            file,
            xrel,
            from_root_oracle,
            int_tol,
            solver,
            json,
        } => cmd_fsb(file, xrel, *from_root_oracle, *int_tol, solver, json),
        Command::Obbt {
            file,
            eps,
            eps_dual,
            min_improvement,
            max_iter,
            cutoff,
            lenient,
            json,
        } => cmd_obbt(file, *eps, *eps_dual, *min_improvement, *max_iter, *cutoff, *lenient, json),
        Command::Tune { file, widths, reps, csv } => cmd_tune(file, widths, *reps, csv),
        Command::Bench {
            family,
            sizes,
            seed,
            int_tol,
            solver,
            csv,
        } => cmd_bench(family, sizes, *seed, *int_tol, solver, csv),
        Command::Gen { family, sizes, seed, out } => cmd_gen(family, sizes, *seed, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
