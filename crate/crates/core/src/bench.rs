//! Benchmark matrix runner, trace files, and the reduction summary.
//!
//! A trace file is CSV with a self-describing header:
//!
//! ```text
//! # adaptbai-trace v1
//! # meta {"molecule":"h4",...}
//! iteration,cumulative_shots,energy,energy_error,chosen_label,survivors_json
//! 0,0,-2.0985459369980050,0.0678415116367575,,[]
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driver::{
    default_epsilon, run_adapt_on, AdaptProblem, AdaptTrace, Policy, RunConfig, TraceMeta,
    CHEMICAL_ACCURACY,
};
use crate::error::{Error, Result};
use crate::measurement::Charging;
use crate::pools::PoolKind;

const TRACE_MAGIC: &str = "# adaptbai-trace v1";
const META_PREFIX: &str = "# meta ";
pub const TRACE_COLUMNS: [&str; 6] = [
    "iteration",
    "cumulative_shots",
    "energy",
    "energy_error",
    "chosen_label",
    "survivors_json",
];

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_policies() -> Vec<Policy> {
    Policy::BOTH.to_vec()
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn default_max_iters() -> usize {
    30
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkMatrix {
    pub molecules: Vec<PathBuf>,
    pub pools: Vec<PoolKind>,
    #[serde(default = "default_policies")]
    pub policies: Vec<Policy>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Per-pool ε overrides; missing pools use [`default_epsilon`].
    #[serde(default)]
    pub epsilon: BTreeMap<PoolKind, f64>,
    #[serde(default = "default_max_iters")]
    pub max_adapt_iterations: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_true")]
    pub noise: bool,
    #[serde(default)]
    pub charging: Charging,
}

impl BenchmarkMatrix {
    pub fn new(molecules: Vec<PathBuf>, pools: Vec<PoolKind>) -> Self {
        Self {
            molecules,
            pools,
            policies: default_policies(),
            seeds: default_seeds(),
            epsilon: BTreeMap::new(),
            max_adapt_iterations: default_max_iters(),
            workers: default_workers(),
            noise: true,
            charging: Charging::Incremental,
        }
    }

    pub fn epsilon_for(&self, pool: PoolKind) -> f64 {
        self.epsilon.get(&pool).copied().unwrap_or_else(|| default_epsilon(pool))
    }

    fn config(&self, molecule: &Path, pool: PoolKind, policy: Policy, seed: u64) -> RunConfig {
        let mut cfg = RunConfig::new(molecule, pool, policy, seed);
        cfg.epsilon = self.epsilon_for(pool);
        cfg.max_adapt_iterations = self.max_adapt_iterations;
        cfg.noise = self.noise;
        cfg.charging = self.charging;
        cfg
    }
}

pub fn trace_file_name(molecule: &str, pool: PoolKind, policy: Policy, seed: u64) -> String {
    format!("{molecule}_{pool}_{policy}_seed{seed}.csv")
}

/// Renders a trace in the CSV layout above. Output is a pure function of the trace.
pub fn trace_to_csv(trace: &AdaptTrace) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "{TRACE_MAGIC}").expect("string write");
    writeln!(out, "{META_PREFIX}{}", serde_json::to_string(&trace.meta)?).expect("string write");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_COLUMNS)?;
    for r in &trace.rows {
        w.write_record([
            r.iteration.to_string(),
            r.cumulative_shots.to_string(),
            r.energy.to_string(),
            r.energy_error.to_string(),
            r.chosen_label.clone(),
            serde_json::to_string(&r.survivors_per_round)?,
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}

/// One parsed row of a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub cumulative_shots: u64,
    pub energy: f64,
    pub energy_error: f64,
    pub chosen_label: String,
    pub survivors_json: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub meta: TraceMeta,
    pub rows: Vec<TraceRecord>,
}

impl TraceFile {
    pub fn shots_to_accuracy(&self, threshold: f64) -> Option<u64> {
        self.rows
            .iter()
            .find(|r| r.energy_error < threshold)
            .map(|r| r.cumulative_shots)
    }
}

pub fn parse_trace(text: &str) -> Result<TraceFile> {
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_MAGIC) {
        return Err(Error::parse("trace header", "missing trace magic line"));
    }
    let meta_line = lines
        .next()
        .and_then(|l| l.strip_prefix(META_PREFIX))
        .ok_or_else(|| Error::parse("trace header", "missing meta line"))?;
    let meta: TraceMeta =
        serde_json::from_str(meta_line).map_err(|e| Error::parse("trace meta", e.to_string()))?;
    let body: String = lines.map(|l| format!("{l}\n")).collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().ne(TRACE_COLUMNS.iter().copied()) {
        return Err(Error::parse("trace columns", format!("unexpected header {headers:?}")));
    }
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<TraceRecord>, _>>()?;
    Ok(TraceFile { meta, rows })
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<TraceFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text)
}

/// Writes via a temporary sibling and a rename so readers never see partial files.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub molecule: String,
    pub pool: PoolKind,
    pub policy: Policy,
    pub seed: u64,
    pub trace_file: Option<PathBuf>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub cells: Vec<CellOutcome>,
    pub summary: ReductionSummary,
}

impl BenchReport {
    pub fn all_ok(&self) -> bool {
        self.cells.iter().all(|c| c.error.is_none())
    }
}

/// Runs every (molecule, pool, policy, seed) cell, writing one trace per cell
/// plus `summary.json` and `summary.txt`. A failing cell is recorded, not fatal.
pub fn run_benchmark(matrix: &BenchmarkMatrix, out_dir: impl AsRef<Path>) -> Result<BenchReport> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(matrix.workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;

    let pairs: Vec<(PathBuf, PoolKind)> = matrix
        .molecules
        .iter()
        .flat_map(|m| matrix.pools.iter().map(move |&p| (m.clone(), p)))
        .collect();

    let cells: Vec<CellOutcome> = pool.install(|| {
        let problems: Vec<(&PathBuf, PoolKind, Result<AdaptProblem>)> = pairs
            .par_iter()
            .map(|(path, kind)| (path, *kind, AdaptProblem::load(path, *kind)))
            .collect();
        let jobs: Vec<_> = problems
            .iter()
            .flat_map(|(path, kind, problem)| {
                matrix.policies.iter().flat_map(move |&policy| {
                    matrix
                        .seeds
                        .iter()
                        .map(move |&seed| (*path, *kind, problem, policy, seed))
                })
            })
            .collect();
        jobs.into_par_iter()
            .map(|(path, kind, problem, policy, seed)| {
                let fallback = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let mut cell = CellOutcome {
                    molecule: fallback,
                    pool: kind,
                    policy,
                    seed,
                    trace_file: None,
                    error: None,
                };
                let problem = match problem {
                    Ok(p) => p,
                    Err(e) => {
                        cell.error = Some(e.to_string());
                        return cell;
                    }
                };
                cell.molecule = problem.file.metadata.molecule.clone();
                let cfg = matrix.config(path, kind, policy, seed);
                let result = run_adapt_on(problem, &cfg).and_then(|trace| {
                    let file = out_dir.join(trace_file_name(&cell.molecule, kind, policy, seed));
                    write_atomic(&file, &trace_to_csv(&trace)?)?;
                    Ok(file)
                });
                match result {
                    Ok(file) => cell.trace_file = Some(file),
                    Err(e) => cell.error = Some(e.to_string()),
                }
                cell
            })
            .collect()
    });

    let traces = cells
        .iter()
        .filter_map(|c| c.trace_file.as_ref())
        .map(read_trace)
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize_traces(&traces);
    write_atomic(&out_dir.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    write_atomic(&out_dir.join("summary.txt"), &summary.table())?;
    Ok(BenchReport { cells, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReduction {
    pub seed: u64,
    pub naive_shots: Option<u64>,
    pub se_shots: Option<u64>,
    /// `100·(1 − SE/naive)`; absent unless both runs reached chemical accuracy.
    pub reduction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionCell {
    pub molecule: String,
    pub pool: PoolKind,
    pub seeds: Vec<SeedReduction>,
    pub median: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// No seed produced a reduction.
    pub incomparable: bool,
    /// Seeds where at least one policy missed chemical accuracy.
    pub incomparable_seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ReductionSummary {
    pub threshold: f64,
    pub cells: Vec<ReductionCell>,
}

pub fn percent_reduction(naive: u64, se: u64) -> f64 {
    100.0 * (1.0 - se as f64 / naive as f64)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Pure function of the trace contents.
pub fn summarize_traces(traces: &[TraceFile]) -> ReductionSummary {
    type Key = (String, PoolKind);
    let mut by_cell: BTreeMap<Key, BTreeMap<u64, (Option<u64>, Option<u64>, bool, bool)>> =
        BTreeMap::new();
    for t in traces {
        let cfg = &t.meta.config;
        let entry = by_cell
            .entry((t.meta.molecule.clone(), cfg.pool))
            .or_default()
            .entry(cfg.seed)
            .or_default();
        let shots = t.shots_to_accuracy(CHEMICAL_ACCURACY);
        match cfg.policy {
            Policy::Naive => {
                entry.0 = shots;
                entry.2 = true;
            }
            Policy::Se => {
                entry.1 = shots;
                entry.3 = true;
            }
        }
    }
    let cells = by_cell
        .into_iter()
        .map(|((molecule, pool), seeds)| {
            let seeds: Vec<SeedReduction> = seeds
                .into_iter()
                .filter(|(_, (_, _, has_naive, has_se))| *has_naive && *has_se)
                .map(|(seed, (naive, se, _, _))| SeedReduction {
                    seed,
                    naive_shots: naive,
                    se_shots: se,
                    reduction: match (naive, se) {
                        (Some(n), Some(s)) if n > 0 => Some(percent_reduction(n, s)),
                        _ => None,
                    },
                })
                .collect();
            let mut values: Vec<f64> = seeds.iter().filter_map(|s| s.reduction).collect();
            values.sort_by(f64::total_cmp);
            let incomparable = values.is_empty();
            let incomparable_seeds = seeds.len() - values.len();
            ReductionCell {
                molecule,
                pool,
                median: (!incomparable).then(|| median(&values)),
                min: values.first().copied(),
                max: values.last().copied(),
                seeds,
                incomparable,
                incomparable_seeds,
            }
        })
        .collect();
    ReductionSummary {
        threshold: CHEMICAL_ACCURACY,
        cells,
    }
}

pub fn summarize_reductions<P: AsRef<Path>>(trace_files: &[P]) -> Result<ReductionSummary> {
    let traces = trace_files
        .iter()
        .map(read_trace)
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_traces(&traces))
}

impl ReductionSummary {
    pub fn cell(&self, molecule: &str, pool: PoolKind) -> Option<&ReductionCell> {
        self.cells
            .iter()
            .find(|c| c.molecule == molecule && c.pool == pool)
    }

    /// Pools as rows, molecules as columns: median reduction with the seed range.
    pub fn table(&self) -> String {
        let mut molecules: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !molecules.contains(&c.molecule.as_str()) {
                molecules.push(&c.molecule);
            }
        }
        let mut out = String::new();
        let width = 24;
        write!(out, "{:<8}", "Pool").unwrap();
        for m in &molecules {
            write!(out, " | {m:^width$}").unwrap();
        }
        out.push('\n');
        out.push_str(&"-".repeat(8 + molecules.len() * (width + 3)));
        out.push('\n');
        for pool in [PoolKind::Uccsd, PoolKind::Qubit, PoolKind::QubitExcitation] {
            if !self.cells.iter().any(|c| c.pool == pool) {
                continue;
            }
            write!(out, "{:<8}", pool.as_str().to_uppercase()).unwrap();
            for m in &molecules {
                let text = match self.cell(m, pool) {
                    None => "-".to_string(),
                    Some(c) if c.incomparable => "incomparable".to_string(),
                    Some(c) => {
                        let mut t = format!(
                            "{:.1} [{:.1}, {:.1}]",
                            c.median.unwrap(),
                            c.min.unwrap(),
                            c.max.unwrap()
                        );
                        if c.incomparable_seeds > 0 {
                            write!(t, " ({}x n/a)", c.incomparable_seeds).unwrap();
                        }
                        t
                    }
                };
                write!(out, " | {text:^width$}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{StopReason, TraceRow};
    use crate::driver::FragmentStats;
    use crate::ham_io::bundled_path;
    use crate::measurement::ShotLedger;

    fn fake_trace(policy: Policy, seed: u64, shots: &[(u64, f64)]) -> TraceFile {
        let mut rows = vec![TraceRow {
            iteration: 0,
            chosen_id: None,
            chosen_label: String::new(),
            selection_shots: 0,
            cumulative_shots: 0,
            energy: -1.0,
            energy_error: 0.05,
            vqe_iterations: 0,
            vqe_converged: true,
            final_gradient: 0.0,
            rounds_used: 0,
            survivors_per_round: vec![],
            repeat: false,
        }];
        for (k, &(s, err)) in shots.iter().enumerate() {
            let mut r = rows[0].clone();
            r.iteration = k + 1;
            r.cumulative_shots = s;
            r.energy_error = err;
            r.chosen_label = "0->2".into();
            r.survivors_per_round = vec![3, 1];
            rows.push(r);
        }
        let trace = AdaptTrace {
            meta: TraceMeta {
                molecule: "toy".into(),
                n_qubits: 4,
                pool_size: 3,
                fragment_stats: FragmentStats { min: 1, max: 2, mean: 1.5, total: 3 },
                exact_energy: -1.05,
                hf_energy: -1.0,
                config: RunConfig::new(bundled_path("h2"), PoolKind::Uccsd, policy, seed),
                stop_reason: StopReason::ChemicalAccuracy,
                total_selection_shots: shots.last().map_or(0, |s| s.0),
                per_iteration_shots: vec![],
            },
            rows,
            ledger: ShotLedger::new(),
            final_parameters: vec![],
        };
        parse_trace(&trace_to_csv(&trace).unwrap()).unwrap()
    }

    #[test]
    fn reduction_arithmetic() {
        assert!((percent_reduction(1000, 100) - 90.0).abs() < 1e-12);
        let traces = [
            fake_trace(Policy::Naive, 0, &[(600, 0.01), (1000, 1e-3)]),
            fake_trace(Policy::Se, 0, &[(40, 0.01), (100, 1e-3)]),
        ];
        let s = summarize_traces(&traces);
        let cell = s.cell("toy", PoolKind::Uccsd).unwrap();
        assert!((cell.median.unwrap() - 90.0).abs() < 1e-12);
        assert!(!cell.incomparable);
        assert!(s.table().contains("90.0"));
    }

    #[test]
    fn se_without_accuracy_is_incomparable() {
        let traces = [
            fake_trace(Policy::Naive, 0, &[(1000, 1e-3)]),
            fake_trace(Policy::Se, 0, &[(100, 0.01)]),
        ];
        let s = summarize_traces(&traces);
        let cell = s.cell("toy", PoolKind::Uccsd).unwrap();
        assert!(cell.incomparable);
        assert_eq!(cell.incomparable_seeds, 1);
        assert_eq!(cell.seeds[0].reduction, None);
        assert!(s.table().contains("incomparable"));
    }

    #[test]
    fn median_over_seeds() {
        let mut traces = Vec::new();
        for (seed, se) in [(0, 100), (1, 300), (2, 200)] {
            traces.push(fake_trace(Policy::Naive, seed, &[(1000, 1e-3)]));
            traces.push(fake_trace(Policy::Se, seed, &[(se, 1e-3)]));
        }
        let cell = summarize_traces(&traces).cells.remove(0);
        assert!((cell.median.unwrap() - 80.0).abs() < 1e-12);
        assert!((cell.min.unwrap() - 70.0).abs() < 1e-12);
        assert!((cell.max.unwrap() - 90.0).abs() < 1e-12);
    }

    #[test]
    fn partially_comparable_cell_counts_missing_seeds() {
        let traces = [
            fake_trace(Policy::Naive, 0, &[(1000, 1e-3)]),
            fake_trace(Policy::Se, 0, &[(100, 1e-3)]),
            fake_trace(Policy::Naive, 1, &[(1000, 1e-3)]),
            fake_trace(Policy::Se, 1, &[(100, 0.01)]),
        ];
        let s = summarize_traces(&traces);
        let cell = s.cell("toy", PoolKind::Uccsd).unwrap();
        assert!(!cell.incomparable);
        assert_eq!(cell.incomparable_seeds, 1);
        assert!(s.table().contains("(1x n/a)"));
    }

    #[test]
    fn trace_csv_round_trip() {
        let t = fake_trace(Policy::Se, 4, &[(40, 0.01), (100, 1e-3)]);
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[1].survivors_json, "[3,1]");
        assert_eq!(t.meta.config.seed, 4);
        assert_eq!(t.shots_to_accuracy(CHEMICAL_ACCURACY), Some(100));
        assert!(parse_trace("iteration\n").is_err());
    }
}
