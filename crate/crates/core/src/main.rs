use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use glreg::graph::{generate_geometric_graph, laplacian, DEFAULT_ZERO_TOL};
use glreg::harness::csv::sweep_n_table;
use glreg::harness::experiments::{
    check_lemmas_to_dir, compare_to_dir, prepare_out_dir, sweep_density_to_dir, sweep_sample_size_to_dir,
    tune_alpha_to_dir,
};
use glreg::harness::trial::{report_on, TrialData, TrialWorld};
use glreg::harness::{trial_seed, ExperimentConfig, PenaltyChoice, SeedDomain, TrialCell, TrialOptions, TruthModel};
use glreg::io::write_matrix_csv;
use glreg::solver::EstimatorKind;
use glreg::{Error, Result};

#[derive(Parser)]
#[command(
    name = "glreg",
    version,
    about = "Graph-Laplacian regularized design-matrix estimation experiments"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config; omitted keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `trials`.
    #[arg(long, global = true)]
    trials: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one geometric graph and write its edge list and Laplacian spectrum.
    GenGraph {
        #[arg(long)]
        threshold: Option<f64>,
        /// Trial index whose evaluation seed drives the graph.
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Run a single trial and dump its data and report row.
    Simulate {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value = "laplacian")]
        kind: EstimatorKind,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[arg(long)]
        threshold: Option<f64>,
        /// Replays a row directly from its `trial_seed` column.
        #[arg(long)]
        trial_seed: Option<u64>,
    },
    /// Error and bound versus sample size for both estimators.
    SweepN,
    /// Laplacian-estimator error and bound across graph thresholds.
    SweepDensity {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Grid search for the best regularization weight.
    TuneAlpha {
        #[arg(long, default_value = "laplacian")]
        kind: EstimatorKind,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Paired comparison of the two estimators at their tuned weights.
    Compare {
        #[arg(long)]
        n: Option<usize>,
        /// Penalize with the identity instead of the graph Laplacian.
        #[arg(long)]
        identity_penalty: bool,
        /// Draw the ground truth with i.i.d. entries instead of graph-smooth columns.
        #[arg(long)]
        iid_truth: bool,
    },
    /// Lemma diagnostics on realized estimation errors.
    CheckLemmas {
        #[arg(long)]
        n: Option<usize>,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.master_seed = seed;
    }
    if let Some(out) = &common.out {
        config.out_dir = out.clone();
    }
    if let Some(trials) = common.trials {
        config.trials = trials;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let config = load_config(&cli.common)?;
    let out = config.out_dir.clone();
    let default_opts = TrialOptions::default();
    match cli.command {
        Command::GenGraph { threshold, trial } => {
            prepare_out_dir(&out, &config, "gen_graph")?;
            let threshold = threshold.unwrap_or(config.reference_threshold());
            let seed = trial_seed(config.master_seed, SeedDomain::Evaluation, trial);
            let graph = generate_geometric_graph(config.m, config.bandwidth, threshold, seed)?;
            let spectrum = laplacian(&graph, DEFAULT_ZERO_TOL)?;
            graph.write_edge_list(&out.join("graph.txt"))?;
            write_matrix_csv(
                &out.join("laplacian_eigenvalues.csv"),
                &nalgebra::DMatrix::from_column_slice(spectrum.dim(), 1, spectrum.eigenvalues().as_slice()),
            )?;
            let lambda2 = if spectrum.dim() >= 2 {
                spectrum.fiedler_value()?
            } else {
                f64::NAN
            };
            println!(
                "vertices={} edges={} connected={} lambda2={lambda2:.6e} seed={seed}",
                graph.num_vertices(),
                graph.num_edges(),
                graph.is_connected()
            );
        }
        Command::Simulate {
            n,
            alpha,
            kind,
            trial,
            threshold,
            trial_seed: explicit,
        } => {
            prepare_out_dir(&out, &config, "simulate")?;
            let cell = TrialCell {
                n: n.unwrap_or(config.reference_n()),
                threshold: threshold.unwrap_or(config.reference_threshold()),
                alpha,
                kind,
                trial,
            };
            let seed = explicit.unwrap_or(trial_seed(config.master_seed, SeedDomain::Evaluation, trial));
            let world = TrialWorld::build(&config, cell.threshold, seed, default_opts)?;
            world.graph.write_edge_list(&out.join("graph.txt"))?;
            let data = TrialData::new(&world, &config, cell.n)?;
            data.instance.dump(&out, config.bandwidth, cell.threshold)?;
            let report = report_on(&config, &data, &data.prepared()?, &cell)?;
            let table = sweep_n_table(std::slice::from_ref(&report));
            table.write(&out.join("simulate.csv"))?;
            print!("{}", table.render());
        }
        Command::SweepN => {
            let sweep = sweep_sample_size_to_dir(&config, &out, default_opts)?;
            for row in &sweep.summary {
                println!(
                    "{:<9} n={:<5} alpha={:.3e} error={:.4} bound={:.4} bound_holds={}/{}",
                    row.kind.as_str(),
                    row.n,
                    row.alpha,
                    row.mean_error,
                    row.mean_bound,
                    row.bound_holds,
                    row.ok_trials
                );
            }
        }
        Command::SweepDensity { n } => {
            let sweep = sweep_density_to_dir(&config, n.unwrap_or(config.reference_n()), &out, default_opts)?;
            for row in &sweep.summary {
                println!(
                    "threshold={:.3} connected={} lambda2={:.4} error={:.4} bound={:.4}",
                    row.threshold, row.connected_trials, row.mean_lambda2, row.mean_error, row.mean_bound
                );
            }
        }
        Command::TuneAlpha { kind, n } => {
            let result = tune_alpha_to_dir(&config, kind, n.unwrap_or(config.reference_n()), &out, default_opts)?;
            match result.best_alpha {
                Some(a) => println!("{kind} n={} best_alpha={a:.6e}", result.n),
                None => {
                    return Err(Error::EmptyResult(
                        "no alpha in the grid solved on every tuning instance".into(),
                    ))
                }
            }
        }
        Command::Compare {
            n,
            identity_penalty,
            iid_truth,
        } => {
            let options = TrialOptions {
                truth: if iid_truth { TruthModel::Iid } else { TruthModel::Smooth },
                penalty: if identity_penalty {
                    PenaltyChoice::Identity
                } else {
                    PenaltyChoice::Graph
                },
            };
            let cmp = compare_to_dir(&config, n.unwrap_or(config.reference_n()), &out, options)?;
            println!(
                "n={} laplacian_error={:.4} ridge_error={:.4} mean_difference={:.4} laplacian_wins={} ridge_wins={} ties={} sign_test_p={:.4e}",
                cmp.n,
                cmp.mean_laplacian_error,
                cmp.mean_ridge_error,
                cmp.mean_difference,
                cmp.laplacian_wins,
                cmp.ridge_wins,
                cmp.ties,
                cmp.sign_test_p
            );
        }
        Command::CheckLemmas { n } => {
            let check = check_lemmas_to_dir(&config, n.unwrap_or(config.reference_n()), &out, default_opts)?;
            println!(
                "n={} alpha={:.4e} ok={} lemma1_exact={:.3} lemma1_approx={:.3} lemma2={:.3} lemma3={:.3} assumption1_mean={:.4e}",
                check.n,
                check.alpha,
                check.ok_trials,
                check.lemma1_exact_rate,
                check.lemma1_approx_rate,
                check.lemma2_rate,
                check.lemma3_rate,
                check.assumption1_mean
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
