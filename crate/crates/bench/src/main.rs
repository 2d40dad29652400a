//! `lkm-bench`: generate instances, run solvers, write traces and plots,
//! and run the acceptance suite.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lkm::acceptance::{check_all, AcceptanceConfig, Corpus, Outcome};
use lkm::algorithms::{run, Algorithm, BRule, RunOptions, RunResult, RunStatus, StoppingRule};
use lkm::error::Error;
use lkm::instance::{generate_instance, FunctionSpec, Instance, InstanceSpec, ObjectiveSpec};
use lkm::report::{gap_panel, memory_panel, render_svg, summarize, time_panel, write_trace_csv};

const EXIT_CAP: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_INNER: u8 = 4;

#[derive(Parser)]
#[command(
    name = "lkm-bench",
    version,
    about = "Limited-memory Kelley and Frank-Wolfe benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance description as JSON.
    Gen {
        #[command(flatten)]
        source: Generator,
        #[arg(long)]
        notes: Option<String>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one algorithm on one instance.
    Solve {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Algo::Lkm)]
        algo: Algo,
        #[command(flatten)]
        stop: Stop,
        /// Trace CSV output.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// SVG plot output (gap and memory).
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Summary JSON output.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run several algorithms on one instance and overlay their curves.
    Compare {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, value_delimiter = ',', num_args = 1.., default_values_t = [Algo::Lkm, Algo::Osm])]
        algos: Vec<Algo>,
        #[command(flatten)]
        stop: Stop,
        #[arg(long, default_value = "compare-out")]
        out: PathBuf,
    },
    /// Run the acceptance suite and print one line per criterion.
    Verify {
        /// Largest instance size to run; larger criteria are skipped.
        #[arg(long, default_value_t = 100)]
        n_max: usize,
        /// Seeds per criterion (default: each criterion's own count).
        #[arg(long)]
        seeds: Option<usize>,
        /// Machine-readable report output.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Args, Clone)]
struct Generator {
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Objective::Random)]
    objective: Objective,
    /// Diagonal shift of the random quadratic (default n).
    #[arg(long)]
    shift: Option<f64>,
    #[arg(long, value_enum, default_value_t = Function::Permutahedron)]
    function: Function,
    /// Truncation level for `--function truncation`.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args, Clone)]
struct Source {
    /// Instance JSON; overrides the generator flags.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[command(flatten)]
    generator: Generator,
}

#[derive(Args, Clone)]
struct Stop {
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    /// Scale the tolerance by 1 + |p|.
    #[arg(long)]
    relative: bool,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    /// Retention rule for the fully-corrective method.
    #[arg(long, value_enum, default_value_t = Rule::MinimalSupport)]
    b_rule: Rule,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Debug)]
enum Algo {
    Lkm,
    Osm,
    Lfcfw,
    Fcfw,
    Awayfw,
}

#[derive(ValueEnum, Clone, Copy)]
enum Rule {
    MinimalSupport,
    ActiveSet,
    FullMemory,
}

#[derive(ValueEnum, Clone, Copy)]
enum Objective {
    Random,
    Identity,
}

#[derive(ValueEnum, Clone, Copy)]
enum Function {
    Permutahedron,
    Truncation,
}

impl Generator {
    fn spec(&self) -> Result<InstanceSpec, Error> {
        let function = match self.function {
            Function::Permutahedron => FunctionSpec::Permutahedron,
            Function::Truncation => FunctionSpec::CardinalityTruncation {
                k: self
                    .k
                    .ok_or_else(|| Error::InvalidInput("--function truncation needs --k".into()))?,
            },
        };
        let objective = match self.objective {
            Objective::Random => ObjectiveSpec::RandomQuadratic { shift: self.shift },
            Objective::Identity => ObjectiveSpec::Identity,
        };
        Ok(InstanceSpec {
            function,
            objective,
            ..InstanceSpec::random(self.n, self.seed)
        })
    }
}

impl Source {
    fn load(&self) -> Result<Instance, Error> {
        let spec = match &self.instance {
            Some(path) => InstanceSpec::load(path)?,
            None => self.generator.spec()?,
        };
        generate_instance(&spec)
    }
}

impl Stop {
    fn rule(&self) -> StoppingRule {
        StoppingRule {
            epsilon: self.eps,
            relative: self.relative,
            max_iterations: self.max_iters,
        }
    }

    fn b_rule(&self) -> BRule {
        match self.b_rule {
            Rule::MinimalSupport => BRule::MinimalSupport,
            Rule::ActiveSet => BRule::ActiveSet,
            Rule::FullMemory => BRule::FullMemory,
        }
    }

    fn algorithm(&self, algo: Algo) -> Algorithm {
        match algo {
            Algo::Lkm => Algorithm::Lkm,
            Algo::Osm => Algorithm::Osm,
            Algo::Lfcfw => Algorithm::Lfcfw(self.b_rule()),
            Algo::Fcfw => Algorithm::Lfcfw(BRule::FullMemory),
            Algo::Awayfw => Algorithm::AwayFw,
        }
    }
}

fn status_code(status: RunStatus) -> u8 {
    match status {
        RunStatus::Converged => 0,
        RunStatus::IterationCap => EXIT_CAP,
        RunStatus::InnerSolverFailure => EXIT_INNER,
    }
}

fn write_run(result: &RunResult, trace: Option<&Path>, json: Option<&Path>) -> Result<(), Error> {
    if let Some(path) = trace {
        write_trace_csv(std::fs::File::create(path)?, &result.trace)?;
    }
    if let Some(path) = json {
        let text = serde_json::to_string_pretty(&summarize(result))?;
        std::fs::write(path, text + "\n")?;
    }
    Ok(())
}

fn solve(
    source: &Source,
    algo: Algo,
    stop: &Stop,
    trace: Option<&Path>,
    plot: Option<&Path>,
    json: Option<&Path>,
) -> Result<u8, Error> {
    let instance = source.load()?;
    let algorithm = stop.algorithm(algo);
    let result = run(
        algorithm,
        &instance.g,
        &instance.f,
        &stop.rule(),
        &RunOptions::default(),
    )?;
    write_run(&result, trace, json)?;
    if let Some(path) = plot {
        let runs = [(algorithm.name(), &result.trace)];
        std::fs::write(path, render_svg(&[gap_panel(&runs), memory_panel(&runs)]))?;
    }
    let summary = summarize(&result);
    println!(
        "{} {}: {} iterations, p = {}, d = {}, gap = {:e}, {:.1} ms",
        summary.algorithm,
        summary.status,
        summary.iterations,
        summary.final_p,
        summary.final_d,
        summary.final_gap,
        summary.total_ms
    );
    if let Some(msg) = &result.failure {
        eprintln!("{msg}");
    }
    Ok(status_code(result.status))
}

/// Worker count for `compare`: `BENCH_THREADS` if set, else one per algorithm.
fn thread_cap(jobs: usize) -> Result<usize, Error> {
    match std::env::var("BENCH_THREADS") {
        Ok(value) => match value.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(k.min(jobs.max(1))),
            _ => Err(Error::InvalidInput(format!(
                "BENCH_THREADS must be a positive integer, got {value:?}"
            ))),
        },
        Err(_) => Ok(jobs.max(1)),
    }
}

fn compare(source: &Source, algos: &[Algo], stop: &Stop, out: &Path) -> Result<u8, Error> {
    let mut unique: Vec<Algo> = Vec::new();
    for &a in algos {
        if !unique.contains(&a) {
            unique.push(a);
        }
    }
    if unique.len() < 2 {
        return Err(Error::InvalidInput(
            "compare needs at least two distinct algorithms".into(),
        ));
    }
    let instance = source.load()?;
    std::fs::create_dir_all(out)?;
    let rule = stop.rule();
    let workers = thread_cap(unique.len())?;

    let mut results: Vec<Option<Result<RunResult, Error>>> =
        (0..unique.len()).map(|_| None).collect();
    for (chunk_algos, chunk_slots) in unique.chunks(workers).zip(results.chunks_mut(workers)) {
        std::thread::scope(|scope| {
            for (&algo, slot) in chunk_algos.iter().zip(chunk_slots.iter_mut()) {
                let (instance, stop, rule) = (&instance, stop, &rule);
                scope.spawn(move || {
                    let result = run(
                        stop.algorithm(algo),
                        &instance.g,
                        &instance.f,
                        rule,
                        &RunOptions::default(),
                    );
                    let result = result.and_then(|r| {
                        let name = algo_file_name(algo);
                        write_trace_csv(
                            std::fs::File::create(out.join(format!("{name}.csv")))?,
                            &r.trace,
                        )?;
                        Ok(r)
                    });
                    *slot = Some(result);
                });
            }
        });
    }

    let mut finished = Vec::new();
    for (algo, result) in unique.iter().zip(results) {
        finished.push((*algo, result.expect("every slot is filled")?));
    }
    let runs: Vec<(&str, &lkm::algorithms::IterationTrace)> = finished
        .iter()
        .map(|(a, r)| (algo_file_name(*a), &r.trace))
        .collect();
    std::fs::write(out.join("gap.svg"), render_svg(&[gap_panel(&runs)]))?;
    std::fs::write(out.join("memory.svg"), render_svg(&[memory_panel(&runs)]))?;
    std::fs::write(out.join("time.svg"), render_svg(&[time_panel(&runs)]))?;
    let summaries: Vec<_> = finished.iter().map(|(_, r)| summarize(r)).collect();
    std::fs::write(
        out.join("summary.json"),
        serde_json::to_string_pretty(&summaries)? + "\n",
    )?;
    for s in &summaries {
        println!(
            "{:<7} {:<20} iterations {:>5}  max memory {:>5}  gap {:.3e}  {:.1} ms",
            s.algorithm, s.status, s.iterations, s.max_memory, s.final_gap, s.total_ms
        );
    }
    let code = finished
        .iter()
        .map(|(_, r)| status_code(r.status))
        .max_by_key(|&c| match c {
            EXIT_INNER => 2,
            EXIT_CAP => 1,
            _ => 0,
        })
        .unwrap_or(0);
    Ok(code)
}

fn algo_file_name(algo: Algo) -> &'static str {
    match algo {
        Algo::Lkm => "lkm",
        Algo::Osm => "osm",
        Algo::Lfcfw => "lfcfw",
        Algo::Fcfw => "fcfw",
        Algo::Awayfw => "awayfw",
    }
}

fn verify(config: AcceptanceConfig, json: Option<&Path>) -> Result<u8, Error> {
    let corpus = Corpus::new(config);
    let reports = check_all(&corpus);
    for r in &reports {
        println!("{r}");
    }
    if let Some(path) = json {
        let items: Vec<_> = reports
            .iter()
            .map(|r| {
                serde_json::json!({
                    "id": r.id,
                    "name": r.name,
                    "outcome": match r.outcome {
                        Outcome::Pass => "pass",
                        Outcome::Fail => "fail",
                        Outcome::Skipped => "skipped",
                    },
                    "detail": r.detail,
                })
            })
            .collect();
        std::fs::write(path, serde_json::to_string_pretty(&items)? + "\n")?;
    }
    let failed = reports
        .iter()
        .filter(|r| r.outcome == Outcome::Fail)
        .count();
    println!(
        "{} passed, {failed} failed, {} skipped",
        reports
            .iter()
            .filter(|r| r.outcome == Outcome::Pass)
            .count(),
        reports
            .iter()
            .filter(|r| r.outcome == Outcome::Skipped)
            .count()
    );
    Ok(u8::from(failed > 0))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Gen { source, notes, out } => source.spec().and_then(|mut spec| {
            spec.notes = notes.clone();
            generate_instance(&spec)?;
            match out {
                Some(path) => spec.save(path)?,
                None => println!("{}", spec.to_json()?),
            }
            Ok(0)
        }),
        Command::Solve {
            source,
            algo,
            stop,
            trace,
            plot,
            json,
        } => solve(
            source,
            *algo,
            stop,
            trace.as_deref(),
            plot.as_deref(),
            json.as_deref(),
        ),
        Command::Compare {
            source,
            algos,
            stop,
            out,
        } => compare(source, algos, stop, out),
        Command::Verify {
            n_max,
            seeds,
            json,
            inject_fault,
        } => verify(
            AcceptanceConfig {
                n_max: *n_max,
                seeds: *seeds,
                inject_fault: *inject_fault,
            },
            json.as_deref(),
        ),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
