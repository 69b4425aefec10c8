use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use ots_core::baselines::{greedy_schedule, random_schedule};
use ots_core::bench::{read_records, run_bench, summarize, write_summary, BenchOptions, Method};
use ots_core::generator::{generate, generate_suite, GeneratorParams, TsFamily, R_VALUES};
use ots_core::model::ScheduleMeta;
use ots_core::oracle::{oracle_optimum, OracleLimits};
use ots_core::rng::RngStream;
use ots_core::{
    parse_instance, parse_schedule, solve, validate_schedule, write_instance, write_schedule, OtsInstance,
    Schedule, SolveParams, Strategy,
};

#[derive(Parser)]
#[command(name = "ots", version, about = "Test execution scheduling on shared machines and resources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the makespan of an instance within a time contract.
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = 300_000)]
        contract_ms: u64,
        #[arg(long, default_value = "duration_splitting")]
        strategy: Strategy,
        /// Include every improving solution in the output.
        #[arg(long)]
        stream: bool,
        /// Stop at the first solution.
        #[arg(long)]
        first: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Longest-first list scheduling.
    Greedy {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Uniformly random list scheduling.
    Random {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate one random instance.
    Generate {
        #[arg(long)]
        family: TsFamily,
        /// Maximum number of resources per test.
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a benchmark suite and its manifest.
    GenerateSuite {
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        /// Comma-separated families, e.g. TS1,TS5.
        #[arg(long, value_delimiter = ',')]
        families: Option<Vec<TsFamily>>,
        #[arg(long, value_delimiter = ',')]
        r: Option<Vec<usize>>,
        #[arg(long, default_value_t = 20)]
        per_cell: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Exact optimum of a tiny instance by exhaustive search.
    Oracle {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a schedule against an instance.
    Validate { instance: PathBuf, schedule: PathBuf },
    /// Print the makespan lower bound of an instance.
    Bound { file: PathBuf },
    /// Run methods over every instance of a manifest.
    Bench {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "tcsched,greedy,random")]
        methods: String,
        #[arg(long, default_value_t = 300_000)]
        contract_ms: u64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Aggregate a results file into comparison, timing and threshold tables.
    Summarize {
        results: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn read_instance(path: &Path) -> Result<OtsInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_baseline(schedule: &Schedule, output: Option<&Path>) -> Result<()> {
    emit(&write_schedule(schedule, Some(&ScheduleMeta::new("feasible", 0))), output)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve {
            file,
            contract_ms,
            strategy,
            stream,
            first,
            output,
        } => {
            let instance = read_instance(&file)?;
            let mut params = SolveParams::new(contract_ms).with_strategy(strategy);
            params.stop_after_first = first;
            let report = solve(&instance, &params);
            let mut meta = ScheduleMeta::from(&report);
            if !stream {
                meta.stream = None;
            }
            eprintln!(
                "{}: {} makespan {} in {} ms, {} nodes",
                instance.name(),
                report.outcome.as_str(),
                report.best.as_ref().map_or("-".to_string(), |s| s.makespan().to_string()),
                report.t_total_ms,
                report.nodes_explored
            );
            match &report.best {
                Some(best) => emit(&write_schedule(best, Some(&meta)), output.as_deref())?,
                None => return Ok(ExitCode::from(2)),
            }
        }
        Command::Greedy { file, output } => {
            emit_baseline(&greedy_schedule(&read_instance(&file)?), output.as_deref())?;
        }
        Command::Random { file, seed, output } => {
            let instance = read_instance(&file)?;
            emit_baseline(&random_schedule(&instance, &mut RngStream::new(seed)), output.as_deref())?;
        }
        Command::Generate {
            family,
            r,
            seed,
            output,
        } => {
            let instance = generate(&GeneratorParams::for_family(family, r, seed))?;
            emit(&write_instance(&instance), output.as_deref())?;
        }
        Command::GenerateSuite {
            base_seed,
            families,
            r,
            per_cell,
            output,
        } => {
            let families = families.unwrap_or_else(|| TsFamily::all().collect());
            let r_values = r.unwrap_or_else(|| R_VALUES.to_vec());
            let rows = generate_suite(&families, &r_values, per_cell, base_seed, &output)?;
            eprintln!("wrote {} instances to {}", rows.len(), output.display());
        }
        Command::Oracle { file, output } => {
            let instance = read_instance(&file)?;
            let res = oracle_optimum(&instance, &OracleLimits::default())?;
            eprintln!("optimum {} ({} nodes)", res.makespan, res.nodes);
            let meta = ScheduleMeta::new("optimal_proved", 0);
            emit(&write_schedule(&res.witness, Some(&meta)), output.as_deref())?;
        }
        Command::Validate { instance, schedule } => {
            let instance = read_instance(&instance)?;
            let text = fs::read_to_string(&schedule).with_context(|| format!("reading {}", schedule.display()))?;
            let (schedule, _) = parse_schedule(&text)?;
            let violations = validate_schedule(&instance, &schedule);
            for v in &violations {
                println!("{v}");
            }
            if !violations.is_empty() {
                return Ok(ExitCode::FAILURE);
            }
            println!("ok, makespan {}", schedule.makespan());
        }
        Command::Bound { file } => {
            println!("{}", read_instance(&file)?.makespan_lower_bound());
        }
        Command::Bench {
            manifest,
            methods,
            contract_ms,
            workers,
            output,
        } => {
            let mut options = BenchOptions::new(Method::parse_list(&methods)?, contract_ms);
            if let Some(w) = workers {
                if w == 0 {
                    bail!("--workers must be at least 1");
                }
                options.workers = w;
            }
            let records = run_bench(&manifest, &options, &output)?;
            let errors = records.iter().filter(|r| r.is_error()).count();
            eprintln!("{} records, {} errors", records.len(), errors);
            if errors > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Summarize { results, output } => {
            let summary = summarize(&read_records(&results)?)?;
            write_summary(&summary, &output)?;
            eprintln!(
                "{} instances compared, {} timing rows",
                summary.comparison.len(),
                summary.times.len()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
