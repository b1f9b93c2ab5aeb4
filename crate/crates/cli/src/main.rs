//! `adaptbai` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adaptbai::bench::{
    run_benchmark, summarize_reductions, trace_file_name, trace_to_csv, write_atomic,
    BenchmarkMatrix,
};
use adaptbai::driver::{run_adapt, RunConfig, CHEMICAL_ACCURACY};
use adaptbai::ham_io::{load_hamiltonian, verify_reference_energies};
use adaptbai::statevector::EXACT_DIAG_CAP;
use adaptbai::{Policy, PoolKind};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "adaptbai", version, about = "ADAPT-VQE with best-arm-identification generator selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single ADAPT-VQE configuration and write its trace.
    Run(RunArgs),
    /// Run a benchmark matrix and write one trace per cell plus a summary.
    Bench(BenchArgs),
    /// Compute the reduction table from existing trace files.
    Summarize(SummarizeArgs),
    /// Validate Hamiltonian files.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// RunConfig JSON; flags given on the command line override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ham: Option<PathBuf>,
    #[arg(long)]
    pool: Option<PoolKind>,
    #[arg(long)]
    policy: Option<Policy>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    /// Output directory for the trace CSV.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Also write the per-charge shot ledger as JSON to this path.
    #[arg(long)]
    ledger: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// BenchmarkMatrix JSON; flags given on the command line override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Hamiltonian file; repeat for several molecules.
    #[arg(long)]
    ham: Vec<PathBuf>,
    /// Pool kind; repeat for several pools.
    #[arg(long)]
    pool: Vec<PoolKind>,
    /// Restrict to one selection policy.
    #[arg(long)]
    policy: Option<Policy>,
    /// Overrides ε for every pool.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Number of seeds, `0..N`.
    #[arg(long)]
    seeds: Option<u64>,
    /// Single seed; takes precedence over `--seeds`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Trace files or directories containing them.
    #[arg(required = true)]
    traces: Vec<PathBuf>,
    /// Write the summary JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Recompute the ground energy and compare with the stored FCI value.
    #[arg(long)]
    exact: bool,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => read_json::<RunConfig>(path)?,
        None => {
            let (Some(ham), Some(pool)) = (&args.ham, args.pool) else {
                bail!("--ham and --pool are required without --config");
            };
            RunConfig::new(ham, pool, args.policy.unwrap_or(Policy::Se), 0)
        }
    };
    if let Some(ham) = &args.ham {
        cfg.hamiltonian_path = ham.clone();
    }
    if let Some(pool) = args.pool {
        if args.epsilon.is_none() && args.config.is_some() && pool != cfg.pool {
            cfg.epsilon = adaptbai::driver::default_epsilon(pool);
        }
        cfg.pool = pool;
    }
    if let Some(policy) = args.policy {
        cfg.policy = policy;
    }
    if let Some(eps) = args.epsilon {
        cfg.epsilon = eps;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.max_iters {
        cfg.max_adapt_iterations = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: RunArgs) -> Result<bool> {
    let cfg = run_config(&args)?;
    let trace = run_adapt(&cfg)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let file = args
        .out
        .join(trace_file_name(&trace.meta.molecule, cfg.pool, cfg.policy, cfg.seed));
    write_atomic(&file, &trace_to_csv(&trace)?)?;
    if let Some(path) = &args.ledger {
        write_atomic(path, &serde_json::to_string_pretty(&trace.ledger)?)?;
    }
    let last = trace.rows.last().expect("trace has the HF row");
    println!("trace: {}", file.display());
    println!(
        "stop: {:?} after {} iterations, energy {:.10}, error {:.3e}, selection shots {}",
        trace.meta.stop_reason,
        last.iteration,
        last.energy,
        last.energy_error,
        trace.meta.total_selection_shots
    );
    match trace.shots_to_accuracy(CHEMICAL_ACCURACY) {
        Some(s) => println!("shots to chemical accuracy: {s}"),
        None => println!("chemical accuracy not reached"),
    }
    Ok(true)
}

fn bench_matrix(args: &BenchArgs) -> Result<BenchmarkMatrix> {
    let mut m = match &args.config {
        Some(path) => read_json::<BenchmarkMatrix>(path)?,
        None => {
            if args.ham.is_empty() {
                bail!("--ham is required without --config");
            }
            let pools = if args.pool.is_empty() {
                PoolKind::ALL.to_vec()
            } else {
                args.pool.clone()
            };
            BenchmarkMatrix::new(args.ham.clone(), pools)
        }
    };
    if !args.ham.is_empty() {
        m.molecules = args.ham.clone();
    }
    if !args.pool.is_empty() {
        m.pools = args.pool.clone();
    }
    if let Some(p) = args.policy {
        m.policies = vec![p];
    }
    if let Some(eps) = args.epsilon {
        for &p in &m.pools {
            m.epsilon.insert(p, eps);
        }
    }
    if let Some(n) = args.seeds {
        m.seeds = (0..n).collect();
    }
    if let Some(s) = args.seed {
        m.seeds = vec![s];
    }
    if let Some(n) = args.max_iters {
        m.max_adapt_iterations = n;
    }
    if let Some(w) = args.workers {
        m.workers = w;
    }
    Ok(m)
}

fn cmd_bench(args: BenchArgs) -> Result<bool> {
    let matrix = bench_matrix(&args)?;
    let report = run_benchmark(&matrix, &args.out)?;
    for c in &report.cells {
        match (&c.trace_file, &c.error) {
            (_, Some(e)) => eprintln!(
                "FAILED {} {} {} seed {}: {e}",
                c.molecule, c.pool, c.policy, c.seed
            ),
            (Some(f), None) => println!("wrote {}", f.display()),
            (None, None) => {}
        }
    }
    print!("{}", report.summary.table());
    Ok(report.all_ok())
}

fn collect_traces(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("reading {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        bail!("no trace files found");
    }
    Ok(files)
}

fn cmd_summarize(args: SummarizeArgs) -> Result<bool> {
    let files = collect_traces(&args.traces)?;
    let summary = summarize_reductions(&files)?;
    print!("{}", summary.table());
    if let Some(out) = &args.out {
        write_atomic(out, &serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(summary.cells.iter().all(|c| !c.incomparable))
}

fn cmd_validate(args: ValidateArgs) -> Result<bool> {
    let mut ok = true;
    for path in &args.files {
        let loaded = load_hamiltonian(path).and_then(|(h, file)| {
            let exact = if args.exact && h.n_qubits() <= EXACT_DIAG_CAP {
                Some(verify_reference_energies(&h, &file.metadata)?)
            } else {
                None
            };
            Ok((h, file, exact))
        });
        match loaded {
            Ok((h, file, exact)) => {
                print!(
                    "ok {}: {} qubits, {} terms, HF {:.10}",
                    path.display(),
                    h.n_qubits(),
                    h.len(),
                    file.metadata.hf_energy
                );
                if let Some(r) = exact {
                    print!(", ground {:.10} (stored FCI diff {:.1e})", r.computed_ground_energy, r.difference);
                }
                println!();
            }
            Err(e) => {
                ok = false;
                eprintln!("invalid {}: {e}", path.display());
            }
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Summarize(a) => cmd_summarize(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
