//! Benchmark harness: expand instance families, run every configuration on
//! every instance, and emit per-run statistics as CSV or JSON.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extended::{AnalysisConfig, Mode, StopCriterion, WeakeningStrategy};
use crate::generators::{gen_irrelevant_pattern, gen_pigeonhole, random_pb};
use crate::solver::{Formula, Heuristic, Limits, RunStats, Solver, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Pigeonhole(u32),
    IrrelevantPattern(u32),
    RandomPb { seed: u64, vars: u32, constraints: u32, max_coef: u32 },
}

/// `instances` consecutive members of a family: sizes `n, n+1, ...` for the
/// parametric families, seeds `seed, seed+1, ...` for random ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub instances: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad family spec `{0}`")]
pub struct FamilyParseError(String);

impl FromStr for FamilySpec {
    type Err = FamilyParseError;

    /// `pigeonhole:4-8`, `pigeonhole:5`, `irrelevant:10`, or
    /// `random:SEED:VARS:CONSTRAINTS:MAXCOEF[:COUNT]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FamilyParseError(s.to_string());
        let (name, rest) = s.split_once(':').ok_or_else(bad)?;
        let range = |r: &str| -> Result<(u32, u32), FamilyParseError> {
            let (lo, hi) = r.split_once('-').unwrap_or((r, r));
            let lo: u32 = lo.parse().map_err(|_| bad())?;
            let hi: u32 = hi.parse().map_err(|_| bad())?;
            if hi < lo {
                return Err(bad());
            }
            Ok((lo, hi - lo + 1))
        };
        match name {
            "pigeonhole" | "php" => {
                let (n, k) = range(rest)?;
                if n < 2 {
                    return Err(bad());
                }
                Ok(FamilySpec { family: Family::Pigeonhole(n), instances: k })
            }
            "irrelevant" => {
                let (n, k) = range(rest)?;
                if n < 3 {
                    return Err(bad());
                }
                Ok(FamilySpec { family: Family::IrrelevantPattern(n), instances: k })
            }
            "random" => {
                let f: Vec<u64> = rest.split(':').map(str::parse).collect::<Result<_, _>>().map_err(|_| bad())?;
                let small = |v: u64| u32::try_from(v).map_err(|_| bad());
                match f.as_slice() {
                    &[seed, vars, cons, coef] | &[seed, vars, cons, coef, _] => {
                        let instances = if f.len() == 5 { small(f[4])? } else { 1 };
                        let (vars, constraints, max_coef) = (small(vars)?, small(cons)?, small(coef)?);
                        if vars == 0 || max_coef == 0 {
                            return Err(bad());
                        }
                        Ok(FamilySpec { family: Family::RandomPb { seed, vars, constraints, max_coef }, instances })
                    }
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }
}

/// One concrete benchmark instance.
#[derive(Debug, Clone)]
pub struct BenchInstance {
    pub name: String,
    pub family: &'static str,
    pub seed: Option<u64>,
    pub formula: Formula,
    pub heuristic: Heuristic,
}

impl FamilySpec {
    pub fn expand(&self) -> Vec<BenchInstance> {
        (0..self.instances)
            .map(|k| match self.family {
                Family::Pigeonhole(n) => {
                    let n = n + k;
                    let inst = gen_pigeonhole(n);
                    BenchInstance {
                        name: format!("php-{n}"),
                        family: "pigeonhole",
                        seed: None,
                        formula: Formula::from_raw(inst.variable_count, &inst.constraints),
                        heuristic: Heuristic::FixedOrder,
                    }
                }
                Family::IrrelevantPattern(n) => {
                    let n = n + k;
                    let sc = gen_irrelevant_pattern(n);
                    BenchInstance {
                        name: format!("irrelevant-{n}"),
                        family: "irrelevant",
                        seed: None,
                        formula: Formula::from_raw(sc.instance.variable_count, &sc.instance.constraints),
                        heuristic: Heuristic::script_then_fixed(sc.script),
                    }
                }
                Family::RandomPb { seed, vars, constraints, max_coef } => {
                    let seed = seed + u64::from(k);
                    let inst = random_pb(seed, vars, constraints, max_coef);
                    BenchInstance {
                        name: format!("random-v{vars}-c{constraints}-k{max_coef}-s{seed}"),
                        family: "random",
                        seed: Some(seed),
                        formula: Formula::from_raw(inst.variable_count, &inst.constraints),
                        heuristic: Heuristic::FixedOrder,
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RowVerdict {
    Sat,
    Unsat,
    /// Conflict or time limit hit.
    Timeout,
    Error,
}

impl RowVerdict {
    pub fn is_solved(self) -> bool {
        matches!(self, RowVerdict::Sat | RowVerdict::Unsat)
    }
}

/// Column order of the CSV output; JSON objects use the same keys.
pub const CSV_HEADER: &str = "instance,family,seed,mode,weakening,stop,verdict,conflicts,cancellations,\
improved_backjumps,total_backjumps,improved_percent,wall_time_ms";

/// One (instance, configuration) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub instance: String,
    pub family: String,
    pub seed: Option<u64>,
    #[serde(with = "as_text")]
    pub mode: Mode,
    /// Empty for regular runs.
    #[serde(with = "opt_text")]
    pub weakening: Option<WeakeningStrategy>,
    #[serde(with = "opt_text")]
    pub stop: Option<StopCriterion>,
    pub verdict: RowVerdict,
    pub conflicts: u64,
    pub cancellations: u64,
    pub improved_backjumps: u64,
    pub total_backjumps: u64,
    pub improved_percent: f64,
    pub wall_time_ms: f64,
}

impl StatsRow {
    pub fn config(&self) -> AnalysisConfig {
        match self.mode {
            Mode::Regular => AnalysisConfig::regular(),
            Mode::Extended => {
                AnalysisConfig::extended(self.weakening.unwrap_or_default(), self.stop.unwrap_or_default())
            }
        }
    }
}

pub fn improved_percent(improved: u64, total: u64) -> f64 {
    100.0 * improved as f64 / total.max(1) as f64
}

mod as_text {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

mod opt_text {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Option<T>, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        match Option::<String>::deserialize(d)? {
            Some(s) if !s.is_empty() => s.parse().map(Some).map_err(D::Error::custom),
            _ => Ok(None),
        }
    }
}

pub fn default_limits() -> Limits {
    Limits { max_conflicts: Some(1_000_000), time_limit: Some(Duration::from_secs(60)) }
}

impl RowVerdict {
    pub fn of(verdict: &Verdict) -> Self {
        match verdict {
            Verdict::Satisfiable(_) => RowVerdict::Sat,
            Verdict::Unsatisfiable => RowVerdict::Unsat,
            Verdict::Unknown => RowVerdict::Timeout,
        }
    }
}

impl StatsRow {
    pub fn new(
        instance: &str,
        family: &str,
        seed: Option<u64>,
        config: AnalysisConfig,
        verdict: RowVerdict,
        stats: &RunStats,
    ) -> Self {
        let extended = config.mode == Mode::Extended;
        StatsRow {
            instance: instance.to_string(),
            family: family.to_string(),
            seed,
            mode: config.mode,
            weakening: extended.then_some(config.weakening),
            stop: extended.then_some(config.stop),
            verdict,
            conflicts: stats.conflicts,
            cancellations: stats.cancellations,
            improved_backjumps: stats.improved_backjumps,
            total_backjumps: stats.total_backjumps,
            improved_percent: improved_percent(stats.improved_backjumps, stats.total_backjumps),
            wall_time_ms: stats.wall_time.as_secs_f64() * 1000.0,
        }
    }
}

/// Runs one configuration on one instance.
pub fn run_one(instance: &BenchInstance, config: AnalysisConfig, limits: Limits) -> StatsRow {
    let mut solver =
        Solver::new(&instance.formula, config).with_heuristic(instance.heuristic.clone()).with_limits(limits);
    let (verdict, stats) = match solver.solve() {
        Ok(r) => (RowVerdict::of(&r.verdict), r.stats),
        Err(e) => {
            log::warn!("{} under {config}: {e}", instance.name);
            (RowVerdict::Error, *solver.stats())
        }
    };
    StatsRow::new(&instance.name, instance.family, instance.seed, config, verdict, &stats)
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("could not build thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Runs every configuration on every instance with `jobs` worker threads
/// (0 means one per core). Rows come out ordered by family spec, instance
/// and configuration, whatever the scheduling.
pub fn run_benchmark(
    specs: &[FamilySpec],
    configs: &[AnalysisConfig],
    limits: Limits,
    jobs: usize,
) -> Result<Vec<StatsRow>, HarnessError> {
    let instances: Vec<BenchInstance> = specs.iter().flat_map(FamilySpec::expand).collect();
    let pairs: Vec<(&BenchInstance, AnalysisConfig)> =
        instances.iter().flat_map(|i| configs.iter().map(move |c| (i, *c))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    Ok(pool.install(|| pairs.par_iter().map(|(i, c)| run_one(i, *c, limits)).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsFormat {
    Csv,
    Json,
}

impl fmt::Display for StatsFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StatsFormat::Csv => "csv",
            StatsFormat::Json => "json",
        })
    }
}

impl FromStr for StatsFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(StatsFormat::Csv),
            "json" => Ok(StatsFormat::Json),
            _ => Err(format!("unknown stats format `{s}`")),
        }
    }
}

pub fn emit_stats<W: Write>(rows: &[StatsRow], format: StatsFormat, out: W) -> Result<(), HarnessError> {
    match format {
        StatsFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        StatsFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn parse_stats<R: Read>(input: R, format: StatsFormat) -> Result<Vec<StatsRow>, HarnessError> {
    match format {
        StatsFormat::Csv => Ok(csv::Reader::from_reader(input).deserialize().collect::<Result<_, _>>()?),
        StatsFormat::Json => Ok(serde_json::from_reader(input)?),
    }
}

/// Rows of two configurations on the same instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Paired {
    pub instance: String,
    pub a: StatsRow,
    pub b: StatsRow,
}

/// Pairs up runs of `a` and `b`, keeping only instances both solved.
pub fn compare_pairwise(rows: &[StatsRow], a: AnalysisConfig, b: AnalysisConfig) -> Vec<Paired> {
    rows.iter()
        .filter(|r| r.config() == a && r.verdict.is_solved())
        .filter_map(|ra| {
            rows.iter()
                .find(|rb| rb.instance == ra.instance && rb.config() == b && rb.verdict.is_solved())
                .map(|rb| Paired { instance: ra.instance.clone(), a: ra.clone(), b: rb.clone() })
        })
        .collect()
}
