use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::bench::{BenchError, BenchRecord, Method};

type Metric = fn(&BenchRecord) -> Option<u64>;

/// Makespans of one instance relative to greedy, in percent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub instance: String,
    pub family: String,
    pub r: usize,
    pub ratio_random: Option<f64>,
    pub ratio_first: Option<f64>,
    pub ratio_last: Option<f64>,
}

/// Five-number summary of one timing metric within a `(family, r)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeBox {
    pub family: String,
    pub r: usize,
    pub metric: String,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub threshold_ms: u64,
    pub count: usize,
    pub total: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub contract_ms: u64,
    pub comparison: Vec<ComparisonRow>,
    pub times: Vec<TimeBox>,
    pub thresholds: Vec<ThresholdRow>,
}

pub const THRESHOLDS_MS: [u64; 4] = [5_000, 10_000, 120_000, 240_000];

/// Min, lower quartile, median, upper quartile and max, interpolating
/// linearly between order statistics.
pub fn quantiles(values: &[f64]) -> Option<[f64; 5]> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |q: f64| {
        let pos = q * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    Some([v[0], at(0.25), at(0.5), at(0.75), v[v.len() - 1]])
}

fn percent(value: i64, base: i64) -> Option<f64> {
    (base > 0).then(|| 100.0 * value as f64 / base as f64)
}

/// Aggregates successful records of a single time contract.
pub fn summarize(records: &[BenchRecord]) -> Result<Summary, BenchError> {
    if records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    let mut contracts: Vec<u64> = records.iter().map(|r| r.contract_ms).collect();
    contracts.sort_unstable();
    contracts.dedup();
    if contracts.len() > 1 {
        return Err(BenchError::MixedContracts(contracts));
    }

    let ok: Vec<&BenchRecord> = records.iter().filter(|r| !r.is_error()).collect();
    let mut by_instance: BTreeMap<(&str, &str, usize), BTreeMap<&str, &BenchRecord>> = BTreeMap::new();
    for r in &ok {
        by_instance
            .entry((r.family.as_str(), r.instance.as_str(), r.r))
            .or_default()
            .insert(r.method.as_str(), r);
    }

    let mut comparison = Vec::new();
    for ((family, instance, r), methods) in &by_instance {
        let Some(greedy) = methods
            .get(Method::Greedy.as_str())
            .and_then(|g| g.makespan_last)
            .filter(|&g| g > 0)
        else {
            continue;
        };
        let random = methods.get(Method::Random.as_str()).and_then(|x| x.makespan_last);
        let tc = methods.get(Method::Tcsched.as_str());
        comparison.push(ComparisonRow {
            instance: instance.to_string(),
            family: family.to_string(),
            r: *r,
            ratio_random: random.and_then(|x| percent(x, greedy)),
            ratio_first: tc.and_then(|x| x.makespan_first).and_then(|x| percent(x, greedy)),
            ratio_last: tc.and_then(|x| x.makespan_last).and_then(|x| percent(x, greedy)),
        });
    }

    let tc: Vec<&&BenchRecord> = ok.iter().filter(|r| r.method == Method::Tcsched.as_str()).collect();
    let mut cells: BTreeMap<(&str, usize), Vec<&BenchRecord>> = BTreeMap::new();
    for r in &tc {
        cells.entry((r.family.as_str(), r.r)).or_default().push(r);
    }
    let mut times = Vec::new();
    for ((family, r), recs) in &cells {
        let metrics: [(&str, Metric); 3] = [
            ("t_first_ms", |x| x.t_first_ms),
            ("t_opt_for_tt_ms", |x| x.t_opt_for_tt_ms),
            ("t_last_ms", |x| x.t_last_ms),
        ];
        for (metric, get) in metrics {
            let values: Vec<f64> = recs.iter().filter_map(|x| get(x)).map(|v| v as f64).collect();
            if let Some([min, q1, median, q3, max]) = quantiles(&values) {
                times.push(TimeBox {
                    family: family.to_string(),
                    r: *r,
                    metric: metric.to_string(),
                    count: values.len(),
                    min,
                    q1,
                    median,
                    q3,
                    max,
                });
            }
        }
    }
    // family labels sort numerically, not lexically
    let family_key = |f: &str| f.trim_start_matches("TS").parse::<u32>().unwrap_or(u32::MAX);
    times.sort_by(|a, b| {
        (family_key(&a.family), a.r)
            .cmp(&(family_key(&b.family), b.r))
    });
    comparison.sort_by(|a, b| {
        (family_key(&a.family), a.r, &a.instance).cmp(&(family_key(&b.family), b.r, &b.instance))
    });

    let with_opt: Vec<u64> = tc.iter().filter_map(|r| r.t_opt_for_tt_ms).collect();
    let thresholds = THRESHOLDS_MS
        .iter()
        .map(|&threshold_ms| {
            let count = with_opt.iter().filter(|&&t| t < threshold_ms).count();
            ThresholdRow {
                threshold_ms,
                count,
                total: with_opt.len(),
                percent: if with_opt.is_empty() {
                    0.0
                } else {
                    100.0 * count as f64 / with_opt.len() as f64
                },
            }
        })
        .collect();

    Ok(Summary {
        contract_ms: contracts[0],
        comparison,
        times,
        thresholds,
    })
}

/// Writes `comparison.csv`, `times.csv` and `thresholds.csv` into `dir`.
pub fn write_summary(summary: &Summary, dir: &Path) -> Result<(), BenchError> {
    fs::create_dir_all(dir).map_err(|source| BenchError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write_csv(&dir.join("comparison.csv"), &summary.comparison)?;
    write_csv(&dir.join("times.csv"), &summary.times)?;
    write_csv(&dir.join("thresholds.csv"), &summary.thresholds)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), BenchError> {
    let csv_err = |source| BenchError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(instance: &str, method: Method, first: i64, last: i64) -> BenchRecord {
        BenchRecord {
            instance: instance.to_string(),
            family: "TS1".to_string(),
            r: 3,
            method: method.as_str().to_string(),
            outcome: "feasible".to_string(),
            makespan_first: Some(first),
            t_first_ms: Some(1),
            makespan_last: Some(last),
            t_last_ms: Some(2),
            t_total_ms: 3,
            t_opt_for_tt_ms: Some(2),
            seed: 0,
            error: String::new(),
            contract_ms: 1000,
        }
    }

    #[test]
    fn ties_give_full_ratios() {
        let recs: Vec<_> = [Method::Tcsched, Method::Greedy, Method::Random]
            .into_iter()
            .map(|m| record("a", m, 50, 50))
            .collect();
        let s = summarize(&recs).unwrap();
        assert_eq!(s.comparison.len(), 1);
        let row = &s.comparison[0];
        assert_eq!(row.ratio_random, Some(100.0));
        assert_eq!(row.ratio_first, Some(100.0));
        assert_eq!(row.ratio_last, Some(100.0));
        assert_eq!(summarize(&recs).unwrap(), s);
    }

    #[test]
    fn refuses_mixed_contracts() {
        let mut recs = vec![record("a", Method::Greedy, 5, 5), record("b", Method::Greedy, 5, 5)];
        recs[1].contract_ms = 2000;
        assert!(matches!(summarize(&recs), Err(BenchError::MixedContracts(_))));
        assert!(matches!(summarize(&[]), Err(BenchError::NoRecords)));
    }

    #[test]
    fn zero_greedy_is_skipped() {
        let recs = vec![record("a", Method::Greedy, 0, 0), record("a", Method::Tcsched, 0, 0)];
        assert!(summarize(&recs).unwrap().comparison.is_empty());
    }

    #[test]
    fn quantile_interpolation() {
        assert_eq!(quantiles(&[4.0, 1.0, 3.0, 2.0, 5.0]), Some([1.0, 2.0, 3.0, 4.0, 5.0]));
        assert_eq!(quantiles(&[1.0, 2.0]).unwrap()[2], 1.5);
        assert_eq!(quantiles(&[]), None);
    }

    #[test]
    fn thresholds_count_strictly_below() {
        let mut a = record("a", Method::Tcsched, 9, 8);
        a.t_opt_for_tt_ms = Some(4_999);
        let mut b = record("b", Method::Tcsched, 9, 8);
        b.t_opt_for_tt_ms = Some(5_000);
        let s = summarize(&[a, b]).unwrap();
        assert_eq!(s.thresholds[0].count, 1);
        assert_eq!(s.thresholds[0].percent, 50.0);
        assert_eq!(s.thresholds[1].count, 2);
        assert_eq!(s.times.len(), 3);
    }
}
