//! Command-line surface: simulate data from a sparse Cholesky truth, fit
//! per-column support posteriors, evaluate selections against a truth,
//! run replicate grids, and probe the estimation-error rate over n.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use esc_dag::io::{
    read_matrix_csv, read_triplets_csv, triplets_to_lower, write_matrix_csv, write_triplets_csv,
    write_vector_csv,
};
use esc_dag::sampler::derive_seed;
use esc_dag::{
    compose, fit_dag, generate_truth, rate_probe, sample_posterior_model,
    selection_metrics, simulate, ChainConfig, DagFit, DataLaw, DataMatrix, NormKind, PriorVariant,
    RRule, RunConfig, SelectionMetrics,
};

#[derive(Parser)]
#[command(
    name = "esc-dag",
    version,
    about = "Bayesian structure learning for Gaussian DAG models via sparse Cholesky factors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sparse truth and a data set, writing truth, data, and provenance files.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Fit per-column support posteriors to a data CSV.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Data matrix CSV, one observation per row.
        #[arg(long)]
        data: PathBuf,
    },
    /// Score an inclusion-probability file against a truth file.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Truth Cholesky factor as sparse triplets (j,l,value).
        #[arg(long)]
        truth: PathBuf,
        /// Inclusion probabilities as triplets (j,l,prob).
        #[arg(long)]
        inclusion: PathBuf,
    },
    /// Run a replicate study over the configured alpha grid.
    Replicate {
        #[command(flatten)]
        common: Common,
    },
    /// Posterior estimation error over a grid of sample sizes.
    RateProbe {
        #[command(flatten)]
        common: Common,
        /// Norm for the error: spectral, l1, linf, frobenius.
        #[arg(long)]
        norm: Option<String>,
    },
}

/// Flags shared by every command; each overrides the corresponding config
/// field when present.
#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for truth, data, and chains.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long, env = "ESC_DAG_WORKERS")]
    workers: Option<usize>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    /// Inclusion-probability cutoff for the selected model.
    #[arg(long)]
    threshold: Option<f64>,
    /// Support-size cap rule: condition_p or order_cap.
    #[arg(long)]
    r_rule: Option<String>,
    /// Prior variant: esc or mesc.
    #[arg(long)]
    variant: Option<String>,
    /// gaussian or laplace.
    #[arg(long)]
    data_law: Option<String>,
    /// Standardize columns before fitting.
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    sparsity: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Posterior (A, D, Omega) draws written by the fit command.
    #[arg(long)]
    posterior_draws: Option<usize>,
}

fn resolve(common: &Common) -> Result<RunConfig, String> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            RunConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    // One master seed drives truth generation and the chains.
    cfg.truth.seed = cfg.seed;
    cfg.chain.seed = cfg.seed;
    cfg.workers = common.workers.or(cfg.workers);
    if let Some(v) = common.alpha {
        cfg.hyper.alpha = v;
    }
    if let Some(v) = common.gamma {
        cfg.hyper.gamma = v;
    }
    if let Some(v) = common.c1 {
        cfg.hyper.c1 = v;
    }
    if let Some(v) = common.c2 {
        cfg.hyper.c2 = v;
    }
    if let Some(v) = common.iterations {
        cfg.chain.iterations = v;
    }
    if let Some(v) = common.burn_in {
        cfg.chain.burn_in = v;
    }
    if let Some(v) = common.threshold {
        cfg.chain.threshold = v;
    }
    if let Some(rule) = &common.r_rule {
        cfg.hyper.r_rule = match rule.as_str() {
            "condition_p" => RRule::ConditionP,
            "order_cap" => RRule::OrderCap,
            other => return Err(format!("unknown r-rule: {other}")),
        };
    }
    if let Some(v) = &common.variant {
        cfg.hyper.variant = v.parse::<PriorVariant>()?;
    }
    if let Some(v) = &common.data_law {
        cfg.data_law = v.parse::<DataLaw>()?;
    }
    if common.standardize {
        cfg.standardize = true;
    }
    if let Some(v) = common.n {
        cfg.n = v;
    }
    if let Some(v) = common.p {
        cfg.truth.p = v;
    }
    if let Some(v) = common.sparsity {
        cfg.truth.sparsity = v;
    }
    if let Some(v) = common.replicates {
        cfg.replicates = v;
    }
    if let Some(v) = common.posterior_draws {
        cfg.posterior_draws = v;
    }
    let warnings = cfg.validate()?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

/// Runs `f` inside a dedicated rayon pool when a worker count is requested.
fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, String> {
    match workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| format!("thread pool: {e}"))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn ensure_out(out: &Path) -> Result<(), String> {
    std::fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_simulate(common: &Common) -> Result<(), String> {
    let cfg = resolve(common)?;
    ensure_out(&common.out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0));
    let truth = generate_truth(&cfg.truth, &mut rng);
    let data = simulate::sample_data(cfg.data_law, cfg.n, &truth, &mut rng);

    let a_path = common.out.join("truth_a.csv");
    write_triplets_csv(
        &a_path,
        "value",
        truth.support().iter().map(|&(j, l)| (j, l, truth.a(j, l))),
    )
    .map_err(|e| e.to_string())?;
    write_vector_csv(&common.out.join("truth_d.csv"), "d", truth.d())
        .map_err(|e| e.to_string())?;
    write_matrix_csv(&common.out.join("data.csv"), &data).map_err(|e| e.to_string())?;

    let provenance = serde_json::json!({
        "command": "simulate",
        "config": serde_json::from_str::<serde_json::Value>(&cfg.emit()).unwrap(),
        "edges": truth.support().len(),
    });
    write_json(&common.out.join("provenance.json"), &provenance)?;
    println!(
        "simulated n={} p={} edges={} into {}",
        cfg.n,
        cfg.truth.p,
        truth.support().len(),
        common.out.display()
    );
    Ok(())
}

fn write_fit_outputs(
    out: &Path,
    cfg: &RunConfig,
    data: &DataMatrix,
    fit: &DagFit,
) -> Result<(), String> {
    let p = data.p();
    write_triplets_csv(
        &out.join("inclusion.csv"),
        "prob",
        (2..=p).flat_map(|j| {
            let row = &fit.inclusion[j - 2];
            (1..j).map(move |l| (j, l, row[l - 1]))
        }),
    )
    .map_err(|e| e.to_string())?;

    let mut selected = String::from("j,l\n");
    for s in &fit.selected {
        for &l in s.indices() {
            selected.push_str(&format!("{},{l}\n", s.column()));
        }
    }
    let sel_path = out.join("selected.csv");
    std::fs::write(&sel_path, selected).map_err(|e| format!("{}: {e}", sel_path.display()))?;

    let rates: Vec<f64> = fit.traces.iter().map(|t| t.acceptance_rate()).collect();
    let mean_rate = rates.iter().sum::<f64>() / rates.len().max(1) as f64;
    let summary = serde_json::json!({
        "n": data.n(),
        "p": p,
        "iterations": cfg.chain.iterations,
        "burn_in": cfg.chain.burn_in,
        "threshold": cfg.chain.threshold,
        "acceptance_rate": mean_rate,
        "acceptance_rate_min": rates.iter().cloned().fold(f64::INFINITY, f64::min),
        "acceptance_rate_max": rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        "selected_edges": fit.selected.iter().map(|s| s.len()).sum::<usize>(),
        "hyper": serde_json::to_value(&cfg.hyper).unwrap(),
    });
    write_json(&out.join("summary.json"), &summary)?;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 3000));
    for k in 0..cfg.posterior_draws {
        let model = sample_posterior_model(data, &fit.selected, &cfg.hyper, &mut rng)
            .map_err(|e| e.to_string())?;
        write_triplets_csv(
            &out.join(format!("draw_{k}_a.csv")),
            "value",
            model.support().iter().map(|&(j, l)| (j, l, model.a(j, l))),
        )
        .map_err(|e| e.to_string())?;
        write_vector_csv(&out.join(format!("draw_{k}_d.csv")), "d", model.d())
            .map_err(|e| e.to_string())?;
        let omega = compose(&model);
        let rows: Vec<Vec<f64>> = (0..p).map(|r| omega.row(r).iter().cloned().collect()).collect();
        let omega_data = DataMatrix::from_rows(&rows).map_err(|e| e.to_string())?;
        write_matrix_csv(&out.join(format!("draw_{k}_omega.csv")), &omega_data)
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn cmd_fit(common: &Common, data_path: &Path) -> Result<(), String> {
    let mut cfg = resolve(common)?;
    if common.posterior_draws.is_none() {
        cfg.posterior_draws = 0; // draws only on request for fit
    }
    ensure_out(&common.out)?;
    let data = read_matrix_csv(data_path).map_err(|e| e.to_string())?;
    let data = if cfg.standardize { data.standardized() } else { data };
    let fit = with_pool(cfg.workers, || fit_dag(&data, &cfg.hyper, &cfg.chain))?
        .map_err(|e| e.to_string())?;
    write_fit_outputs(&common.out, &cfg, &data, &fit)?;
    println!(
        "fitted p={} columns, selected {} edges, outputs in {}",
        data.p(),
        fit.selected.iter().map(|s| s.len()).sum::<usize>(),
        common.out.display()
    );
    Ok(())
}

fn metrics_table(m: &SelectionMetrics) -> String {
    format!(
        "errors  fdr     tpr     p_bar_0  p_bar_1\n{:<7} {:<7.4} {:<7.4} {:<8.4} {:<7.4}\n",
        m.errors, m.fdr, m.tpr, m.p_bar_0, m.p_bar_1
    )
}

fn cmd_evaluate(common: &Common, truth_path: &Path, incl_path: &Path) -> Result<(), String> {
    let cfg = resolve(common)?;
    ensure_out(&common.out)?;
    let truth_entries = read_triplets_csv(truth_path).map_err(|e| e.to_string())?;
    let incl_entries = read_triplets_csv(incl_path).map_err(|e| e.to_string())?;
    let truth_p = truth_entries.iter().map(|&(j, _, _)| j).max().unwrap_or(1);
    let incl_p = incl_entries.iter().map(|&(j, _, _)| j).max().unwrap_or(1);
    if truth_p > incl_p {
        return Err(format!(
            "dimension mismatch: truth has entries up to row {truth_p} but inclusion only up to row {incl_p}"
        ));
    }
    let inclusion = triplets_to_lower(&incl_entries, Some(incl_p))?;
    let true_support: BTreeSet<(usize, usize)> = truth_entries
        .iter()
        .filter(|&&(_, _, v)| v != 0.0)
        .map(|&(j, l, _)| (j, l))
        .collect();
    let m = selection_metrics(&true_support, &inclusion, cfg.chain.threshold);
    write_json(&common.out.join("metrics.json"), &serde_json::to_value(&m).unwrap())?;
    let table = metrics_table(&m);
    let table_path = common.out.join("metrics.txt");
    std::fs::write(&table_path, &table).map_err(|e| format!("{}: {e}", table_path.display()))?;
    print!("{table}");
    Ok(())
}

fn cmd_replicate(common: &Common) -> Result<(), String> {
    let cfg = resolve(common)?;
    ensure_out(&common.out)?;
    let mut rows = String::from("n,p,sparsity,data_law,alpha,replicates,errors,fdr,tpr,p_bar_0,p_bar_1\n");
    let mut failures = 0usize;
    for (ai, &alpha) in cfg.alpha_grid.iter().enumerate() {
        let hyper = esc_dag::Hyperparams { alpha, ..cfg.hyper.clone() };
        let mut sums = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let mut ok = 0usize;
        for rep in 0..cfg.replicates {
            let stream = (ai * cfg.replicates + rep) as u64;
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 10_000 + stream));
            let truth = generate_truth(&cfg.truth, &mut rng);
            let data = simulate::sample_data(cfg.data_law, cfg.n, &truth, &mut rng);
            let data = if cfg.standardize { data.standardized() } else { data };
            let chain = ChainConfig {
                seed: derive_seed(cfg.seed, 20_000 + stream),
                ..cfg.chain.clone()
            };
            let fit = with_pool(cfg.workers, || fit_dag(&data, &hyper, &chain))?;
            match fit {
                Ok(fit) => {
                    let m = selection_metrics(&truth.support(), &fit.inclusion, chain.threshold);
                    sums.0 += m.errors as f64;
                    sums.1 += m.fdr;
                    sums.2 += m.tpr;
                    sums.3 += m.p_bar_0;
                    sums.4 += m.p_bar_1;
                    ok += 1;
                }
                Err(e) => {
                    eprintln!("cell alpha={alpha} replicate {rep} failed: {e}");
                    failures += 1;
                }
            }
        }
        if ok > 0 {
            let k = ok as f64;
            rows.push_str(&format!(
                "{},{},{},{:?},{},{},{:.4},{:.4},{:.4},{:.4},{:.4}\n",
                cfg.n,
                cfg.truth.p,
                cfg.truth.sparsity,
                cfg.data_law,
                alpha,
                ok,
                sums.0 / k,
                sums.1 / k,
                sums.2 / k,
                sums.3 / k,
                sums.4 / k,
            ));
        }
    }
    let path = common.out.join("replicate.csv");
    std::fs::write(&path, &rows).map_err(|e| format!("{}: {e}", path.display()))?;
    print!("{rows}");
    if failures > 0 {
        return Err(format!("{failures} replicate cell(s) failed"));
    }
    Ok(())
}

fn cmd_rate_probe(common: &Common, norm_flag: &Option<String>) -> Result<(), String> {
    let cfg = resolve(common)?;
    ensure_out(&common.out)?;
    let norm = match norm_flag {
        Some(s) => s.parse::<NormKind>()?,
        None => cfg.norm,
    };
    let mut spec = cfg.truth.clone();
    spec.seed = cfg.seed;
    let results = with_pool(cfg.workers, || {
        rate_probe(
            norm,
            &cfg.n_grid,
            &spec,
            cfg.replicates,
            &cfg.hyper,
            &cfg.chain,
            cfg.posterior_draws,
        )
    })?
    .map_err(|e| e.to_string())?;
    let mut rows = String::from("n,mean_error,ratio\n");
    let mut prev: Option<f64> = None;
    for &(n, err) in &results {
        match prev {
            Some(p) => rows.push_str(&format!("{n},{err:.6},{:.4}\n", err / p)),
            None => rows.push_str(&format!("{n},{err:.6},\n")),
        }
        prev = Some(err);
    }
    let path = common.out.join("rate_probe.csv");
    std::fs::write(&path, &rows).map_err(|e| format!("{}: {e}", path.display()))?;
    print!("{rows}");
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { common } => cmd_simulate(common),
        Command::Fit { common, data } => cmd_fit(common, data),
        Command::Evaluate { common, truth, inclusion } => cmd_evaluate(common, truth, inclusion),
        Command::Replicate { common } => cmd_replicate(common),
        Command::RateProbe { common, norm } => cmd_rate_probe(common, norm),
    };
    if let Err(msg) = result {
        eprintln!("error: {msg}");
        std::process::exit(1);
    }
}
