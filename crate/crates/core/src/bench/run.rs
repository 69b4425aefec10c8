use std::collections::HashSet;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::{greedy_schedule, random_schedule};
use crate::bench::{t_opt_for_tt, BenchError, BenchRecord, Method};
use crate::generator::{read_manifest, ManifestRow};
use crate::model::{parse_instance, parse_schedule, validate_schedule, write_schedule, OtsInstance, Schedule};
use crate::rng::RngStream;
use crate::search::{solve, Outcome, SolveParams, SolveReport, Strategy};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchOptions {
    pub methods: Vec<Method>,
    pub contract_ms: u64,
    pub workers: usize,
}

impl BenchOptions {
    pub fn new(methods: Vec<Method>, contract_ms: u64) -> Self {
        Self {
            methods,
            contract_ms,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

fn empty_record(row: &ManifestRow, method: Method, contract_ms: u64) -> BenchRecord {
    BenchRecord {
        instance: Path::new(&row.file)
            .file_stem()
            .map_or_else(|| row.file.clone(), |s| s.to_string_lossy().into_owned()),
        family: row.family.clone(),
        r: row.r,
        method: method.as_str().to_string(),
        outcome: String::new(),
        makespan_first: None,
        t_first_ms: None,
        makespan_last: None,
        t_last_ms: None,
        t_total_ms: 0,
        t_opt_for_tt_ms: None,
        seed: row.seed,
        error: String::new(),
        contract_ms,
    }
}

/// Serializes the schedule, reads it back and validates the copy.
fn replay_check(instance: &OtsInstance, schedule: &Schedule) -> Result<(), String> {
    let text = write_schedule(schedule, None);
    let (parsed, _) = parse_schedule(&text).map_err(|e| e.to_string())?;
    match validate_schedule(instance, &parsed).first() {
        None => Ok(()),
        Some(v) => Err(format!("invalid schedule: {v}")),
    }
}

/// Fills a record from a solver run. Validation of the schedule is left to
/// the caller.
pub fn record_from_report(row: &ManifestRow, method: Method, contract_ms: u64, report: &SolveReport) -> BenchRecord {
    let mut rec = empty_record(row, method, contract_ms);
    rec.outcome = report.outcome.as_str().to_string();
    rec.makespan_first = report.first().map(|p| p.makespan);
    rec.t_first_ms = report.first().map(|p| p.t_ms);
    rec.makespan_last = report.last().map(|p| p.makespan);
    rec.t_last_ms = report.last().map(|p| p.t_ms);
    rec.t_total_ms = report.t_total_ms;
    rec.t_opt_for_tt_ms = t_opt_for_tt(&report.stream);
    rec
}

/// Runs one method on one instance.
pub fn run_one(instance: &OtsInstance, row: &ManifestRow, method: Method, contract_ms: u64) -> BenchRecord {
    let mut rec = empty_record(row, method, contract_ms);
    let schedule = match method {
        Method::Tcsched | Method::TcschedNaive => {
            let strategy = if method == Method::Tcsched {
                Strategy::DurationSplitting
            } else {
                Strategy::NaiveLeftmost
            };
            let params = SolveParams::new(contract_ms).with_strategy(strategy);
            let report = solve(instance, &params);
            rec = record_from_report(row, method, contract_ms, &report);
            report.best
        }
        Method::Greedy | Method::Random => {
            let started = Instant::now();
            let schedule = if method == Method::Greedy {
                greedy_schedule(instance)
            } else {
                random_schedule(instance, &mut RngStream::new(row.seed))
            };
            let ms = started.elapsed().as_millis() as u64;
            rec.outcome = Outcome::Feasible.as_str().to_string();
            rec.makespan_first = Some(schedule.makespan());
            rec.makespan_last = Some(schedule.makespan());
            rec.t_first_ms = Some(ms);
            rec.t_last_ms = Some(ms);
            rec.t_total_ms = ms;
            rec.t_opt_for_tt_ms = Some(ms);
            Some(schedule)
        }
    };
    if let Some(schedule) = schedule {
        if let Err(e) = replay_check(instance, &schedule) {
            rec.error = e;
        }
    }
    rec
}

pub fn read_records(path: &Path) -> Result<Vec<BenchRecord>, BenchError> {
    let csv_err = |source| BenchError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    reader.deserialize().collect::<Result<_, _>>().map_err(csv_err)
}

/// Runs every `(instance, method)` pair of the manifest not yet present in
/// `out`, appending one CSV row per completed run. Returns all records,
/// including those already present.
pub fn run_bench(manifest: &Path, options: &BenchOptions, out: &Path) -> Result<Vec<BenchRecord>, BenchError> {
    if options.contract_ms == 0 {
        return Err(BenchError::BadContract);
    }
    let rows = read_manifest(manifest)?;
    let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();

    let resume = out.exists() && fs::metadata(out).map(|m| m.len() > 0).unwrap_or(false);
    let mut records = if resume { read_records(out)? } else { Vec::new() };
    let mut contracts: Vec<u64> = records.iter().map(|r| r.contract_ms).collect();
    contracts.push(options.contract_ms);
    contracts.sort_unstable();
    contracts.dedup();
    if contracts.len() > 1 {
        return Err(BenchError::MixedContracts(contracts));
    }
    let done: HashSet<(String, String)> = records.iter().map(BenchRecord::key).collect();

    let jobs: Vec<(&ManifestRow, Method)> = rows
        .iter()
        .flat_map(|row| options.methods.iter().map(move |&m| (row, m)))
        .filter(|(row, m)| {
            let rec = empty_record(row, *m, 0);
            !done.contains(&rec.key())
        })
        .collect();

    let io_err = |source| BenchError::Io {
        path: out.to_path_buf(),
        source,
    };
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(out)
        .map_err(io_err)?;
    let mut writer = csv::WriterBuilder::new().has_headers(!resume).from_writer(file);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .expect("thread pool");
    let contract_ms = options.contract_ms;
    let (tx, rx) = mpsc::channel::<BenchRecord>();
    let mut failure: Option<BenchError> = None;
    std::thread::scope(|scope| {
        scope.spawn(|| {
            pool.install(|| {
                jobs.par_iter().for_each_with(tx, |tx, &(row, method)| {
                    let rec = run_job(&base, row, method, contract_ms);
                    let _ = tx.send(rec);
                });
            });
        });
        for rec in rx {
            if failure.is_none() {
                let written = writer
                    .serialize(&rec)
                    .map_err(|source| BenchError::Csv {
                        path: out.to_path_buf(),
                        source,
                    })
                    .and_then(|_| writer.flush().map_err(io_err));
                if let Err(e) = written {
                    failure = Some(e);
                }
            }
            records.push(rec);
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(records),
    }
}

fn run_job(base: &Path, row: &ManifestRow, method: Method, contract_ms: u64) -> BenchRecord {
    let path: PathBuf = base.join(&row.file);
    let parsed = fs::read_to_string(&path)
        .map_err(|e| format!("{}: {e}", path.display()))
        .and_then(|text| parse_instance(&text).map_err(|e| format!("{}: {e}", path.display())));
    match parsed {
        Ok(instance) => run_one(&instance, row, method, contract_ms),
        Err(e) => {
            let mut rec = empty_record(row, method, contract_ms);
            rec.error = e;
            rec
        }
    }
}
