//! Seeded generator for the TS1-TS14 benchmark families.
//!
//! Draw order per test, all from one [`RngStream`]:
//!
//! 1. duration, uniform in `duration_range`;
//! 2. a coin with probability `p_resource`; on success the number of
//!    resources, uniform in `[1, r_max]`, then that many distinct resource
//!    ids;
//! 3. a coin with probability `p_all_machines`; on failure the eligible-set
//!    size, uniform in `[max(1, ceil(lo * m)), max(1, floor(hi * m))]`, then
//!    that many distinct machine ids.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{write_instance, OtsInstance, TestCase};
use crate::rng::{mix64, RngStream};
use crate::Time;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("invalid generator parameter: {0}")]
    InvalidParams(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

/// The fourteen (tests, machines) cells of the benchmark grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TsFamily(u8);

const FAMILIES: [(usize, usize); 14] = [
    (20, 10),
    (30, 20),
    (30, 10),
    (40, 20),
    (40, 10),
    (50, 20),
    (50, 10),
    (100, 50),
    (100, 20),
    (100, 10),
    (500, 100),
    (500, 50),
    (500, 20),
    (500, 10),
];

pub const R_VALUES: [usize; 3] = [3, 5, 10];

impl TsFamily {
    pub fn new(number: u8) -> Option<Self> {
        (1..=14).contains(&number).then_some(Self(number))
    }

    pub fn all() -> impl Iterator<Item = TsFamily> {
        (1..=14).map(TsFamily)
    }

    pub fn number(self) -> u8 {
        self.0
    }

    pub fn n_tests(self) -> usize {
        FAMILIES[self.0 as usize - 1].0
    }

    pub fn n_machines(self) -> usize {
        FAMILIES[self.0 as usize - 1].1
    }

    pub fn from_size(n_tests: usize, n_machines: usize) -> Option<Self> {
        FAMILIES
            .iter()
            .position(|&cell| cell == (n_tests, n_machines))
            .map(|i| Self(i as u8 + 1))
    }
}

impl fmt::Display for TsFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TS{}", self.0)
    }
}

impl FromStr for TsFamily {
    type Err = GeneratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix("TS")
            .and_then(|n| n.parse().ok())
            .and_then(TsFamily::new)
            .ok_or_else(|| GeneratorError::InvalidParams(format!("unknown family `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub n_tests: usize,
    pub n_machines: usize,
    pub r_max: usize,
    pub duration_range: (Time, Time),
    pub p_resource: f64,
    pub p_all_machines: f64,
    pub subset_frac_range: (f64, f64),
    pub seed: u64,
}

impl GeneratorParams {
    pub fn for_family(family: TsFamily, r_max: usize, seed: u64) -> Self {
        Self {
            n_tests: family.n_tests(),
            n_machines: family.n_machines(),
            r_max,
            duration_range: (1, 800),
            p_resource: 0.30,
            p_all_machines: 0.80,
            subset_frac_range: (0.01, 0.40),
            seed,
        }
    }

    pub fn family(&self) -> Option<TsFamily> {
        TsFamily::from_size(self.n_tests, self.n_machines)
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |msg: String| Err(GeneratorError::InvalidParams(msg));
        if self.family().is_none() {
            return bad(format!(
                "n_tests = {}, n_machines = {} is not a TS cell",
                self.n_tests, self.n_machines
            ));
        }
        if !R_VALUES.contains(&self.r_max) {
            return bad(format!("r_max = {} not in {{3, 5, 10}}", self.r_max));
        }
        let (lo, hi) = self.duration_range;
        if lo < 1 || hi < lo {
            return bad(format!("duration_range = [{lo}, {hi}] needs 1 <= lo <= hi"));
        }
        for (name, p) in [("p_resource", self.p_resource), ("p_all_machines", self.p_all_machines)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} outside [0, 1]"));
            }
        }
        let (flo, fhi) = self.subset_frac_range;
        if !(0.0..=1.0).contains(&flo) || !(0.0..=1.0).contains(&fhi) || flo > fhi {
            return bad(format!(
                "subset_frac_range = [{flo}, {fhi}] needs 0 <= lo <= hi <= 1"
            ));
        }
        Ok(())
    }

    /// Inclusive bounds on the size of a restricted eligible set.
    pub fn subset_size_bounds(&self) -> (usize, usize) {
        let m = self.n_machines as f64;
        let lo = ((self.subset_frac_range.0 * m).ceil() as usize).max(1);
        let hi = ((self.subset_frac_range.1 * m).floor() as usize).max(1);
        (lo, hi.max(lo))
    }
}

pub fn generate(params: &GeneratorParams) -> Result<OtsInstance, GeneratorError> {
    params.validate()?;
    let family = params.family().expect("validated");
    let name = format!("{family}R{}_s{}", params.r_max, params.seed);
    generate_named(params, name)
}

fn generate_named(params: &GeneratorParams, name: String) -> Result<OtsInstance, GeneratorError> {
    params.validate()?;
    let mut rng = RngStream::new(params.seed);
    let machines: Vec<u32> = (1..=params.n_machines as u32).collect();
    let resources: Vec<u32> = (1..=params.r_max as u32).collect();
    let (size_lo, size_hi) = params.subset_size_bounds();
    let mut tests = Vec::with_capacity(params.n_tests);
    for id in 1..=params.n_tests as u32 {
        let duration = rng.range_inclusive(params.duration_range.0, params.duration_range.1);
        let mut uses = Vec::new();
        if rng.chance(params.p_resource) {
            let count = rng.range_inclusive(1, params.r_max as i64) as usize;
            uses = rng
                .sample_indices(params.r_max, count)
                .into_iter()
                .map(|r| resources[r])
                .collect();
        }
        let eligible = if rng.chance(params.p_all_machines) {
            machines.clone()
        } else {
            let size = rng.range_inclusive(size_lo as i64, size_hi as i64) as usize;
            rng.sample_indices(params.n_machines, size)
                .into_iter()
                .map(|k| machines[k])
                .collect()
        };
        tests.push(TestCase::new(id, duration, eligible, uses));
    }
    OtsInstance::new(name, machines, resources, tests)
        .map_err(|e| GeneratorError::InvalidParams(e.to_string()))
}

/// Seed of instance `k` in cell `(family, r)`.
pub fn cell_seed(base_seed: u64, family: TsFamily, r: usize, k: usize) -> u64 {
    let key = (u64::from(family.number()) << 32) | ((r as u64) << 16) | k as u64;
    base_seed ^ mix64(key)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub file: String,
    pub family: String,
    pub r: usize,
    pub seed: u64,
}

/// Writes `instances_per_cell` instances for every `(family, r)` pair to
/// `out_dir` as `TS{f}R{r}_{k:02}.json`, plus `manifest.csv`.
pub fn generate_suite(
    families: &[TsFamily],
    r_values: &[usize],
    instances_per_cell: usize,
    base_seed: u64,
    out_dir: &Path,
) -> Result<Vec<ManifestRow>, GeneratorError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| GeneratorError::Io { path, source }
    };
    fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let mut rows = Vec::new();
    for &family in families {
        for &r in r_values {
            for k in 1..=instances_per_cell {
                let seed = cell_seed(base_seed, family, r, k);
                let stem = format!("{family}R{r}_{k:02}");
                let params = GeneratorParams::for_family(family, r, seed);
                let instance = generate_named(&params, stem.clone())?;
                let file = format!("{stem}.json");
                let path = out_dir.join(&file);
                fs::write(&path, write_instance(&instance)).map_err(io(&path))?;
                rows.push(ManifestRow {
                    file,
                    family: family.to_string(),
                    r,
                    seed,
                });
            }
        }
    }
    let path = out_dir.join("manifest.csv");
    write_manifest(&path, &rows)?;
    Ok(rows)
}

pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> Result<(), GeneratorError> {
    let csv_err = |source| GeneratorError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| GeneratorError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>, GeneratorError> {
    let csv_err = |source| GeneratorError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_grid() {
        let ts1 = TsFamily::new(1).unwrap();
        assert_eq!((ts1.n_tests(), ts1.n_machines()), (20, 10));
        let ts11: TsFamily = "TS11".parse().unwrap();
        assert_eq!((ts11.n_tests(), ts11.n_machines()), (500, 100));
        assert_eq!(TsFamily::from_size(100, 50), TsFamily::new(8));
        assert_eq!(TsFamily::from_size(20, 20), None);
        assert!("TS15".parse::<TsFamily>().is_err());
        assert_eq!(TsFamily::all().count(), 14);
    }

    #[test]
    fn ts1_instance_shape() {
        let params = GeneratorParams::for_family(TsFamily::new(1).unwrap(), 3, 99);
        assert_eq!(params.subset_size_bounds(), (1, 4));
        let inst = generate(&params).unwrap();
        assert_eq!(inst.len(), 20);
        assert_eq!(inst.machines().len(), 10);
        for t in inst.tests() {
            assert!((1..=800).contains(&t.duration));
            assert!(t.machines.len() == 10 || (1..=4).contains(&t.machines.len()));
            assert!(t.resources.len() <= 3);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let params = GeneratorParams::for_family(TsFamily::new(5).unwrap(), 10, 42);
        let a = write_instance(&generate(&params).unwrap());
        let b = write_instance(&generate(&params).unwrap());
        assert_eq!(a, b);
        let other = GeneratorParams { seed: 43, ..params };
        assert_ne!(a, write_instance(&generate(&other).unwrap()));
    }

    #[test]
    fn rejects_invalid_params() {
        let mut p = GeneratorParams::for_family(TsFamily::new(1).unwrap(), 3, 1);
        p.n_machines = 11;
        assert!(generate(&p).unwrap_err().to_string().contains("n_machines = 11"));
        let mut p = GeneratorParams::for_family(TsFamily::new(1).unwrap(), 4, 1);
        assert!(generate(&p).unwrap_err().to_string().contains("r_max = 4"));
        p.r_max = 3;
        p.p_resource = 1.5;
        assert!(generate(&p).unwrap_err().to_string().contains("p_resource"));
        p.p_resource = 0.3;
        p.duration_range = (0, 800);
        assert!(generate(&p).unwrap_err().to_string().contains("duration_range"));
    }

    #[test]
    fn subset_bounds_round_outward_then_clamp() {
        let p = |m| GeneratorParams {
            n_machines: m,
            ..GeneratorParams::for_family(TsFamily::new(11).unwrap(), 3, 0)
        };
        assert_eq!(p(100).subset_size_bounds(), (1, 40));
        assert_eq!(p(50).subset_size_bounds(), (1, 20));
        assert_eq!(p(20).subset_size_bounds(), (1, 8));
    }
}
