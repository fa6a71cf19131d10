//! Sweeps built from seeded trials.
//!
//! Each sweep is split into a pure computation returning typed rows and a
//! `*_to_dir` wrapper that prepares the output directory, runs the
//! computation, and writes CSV/SVG artifacts. Trials run in parallel; rows
//! are always emitted in a fixed order (estimator kind, grid coordinates,
//! trial index), so reruns produce byte-identical files.

use std::path::Path;

use rayon::prelude::*;

use crate::bounds::{kappa_from_sigma, lemma_diagnostics, recommended_alpha, theorem1_bound};
use crate::error::{Error, Result};
use crate::solver::EstimatorKind;

use super::config::ExperimentConfig;
use super::csv::{b, f, s, sweep_n_table, u, us, Table};
use super::plot::{line_chart, Series};
use super::stats::{mean_std, sign_test_p_value};
use super::trial::{report_on, trial_seed, SeedDomain, TrialCell, TrialData, TrialOptions, TrialReport, TrialWorld};

/// Mean error of one `alpha` over the tuning instances.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneRow {
    pub alpha: f64,
    pub mean_error: f64,
    pub std_error: f64,
    /// Instances where the solve failed at this `alpha`; such an `alpha` is not selectable.
    pub failures: usize,
    pub used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub kind: EstimatorKind,
    pub n: usize,
    pub threshold: f64,
    /// `None` when every `alpha` failed somewhere.
    pub best_alpha: Option<f64>,
    pub table: Vec<TuneRow>,
}

fn select_alpha(table: &[TuneRow]) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for row in table {
        if row.failures > 0 || row.used == 0 || !row.mean_error.is_finite() {
            continue;
        }
        // Ascending grid and strict comparison: ties go to the smaller alpha.
        if best.is_none_or(|(_, e)| row.mean_error < e) {
            best = Some((row.alpha, row.mean_error));
        }
    }
    best.map(|(a, _)| a)
}

/// Tunes `alpha` for every `(kind, n)` pair on `config.trials` fresh tuning
/// instances at one graph threshold. Results are ordered by kind, then `n`.
pub fn tune_grid(
    config: &ExperimentConfig,
    ns: &[usize],
    kinds: &[EstimatorKind],
    threshold: f64,
    options: TrialOptions,
) -> Vec<TuneResult> {
    let alphas = &config.alpha_grid;
    // errors[trial] = None if the world could not be built, else [n][kind][alpha].
    let errors: Vec<Option<Vec<Vec<Vec<f64>>>>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(config.master_seed, SeedDomain::Tuning, t);
            let world = TrialWorld::build(config, threshold, seed, options).ok()?;
            Some(
                ns.iter()
                    .map(|&n| {
                        let data = TrialData::new(&world, config, n);
                        let prepared = data.as_ref().ok().and_then(|d| d.prepared().ok());
                        kinds
                            .iter()
                            .map(|&kind| {
                                alphas
                                    .iter()
                                    .map(|&alpha| match (&data, &prepared) {
                                        (Ok(d), Some(p)) => {
                                            d.solve(p, kind, alpha).map(|e| d.error_of(&e)).unwrap_or(f64::NAN)
                                        }
                                        _ => f64::NAN,
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect(),
            )
        })
        .collect();

    let mut out = Vec::new();
    for (ki, &kind) in kinds.iter().enumerate() {
        for (ni, &n) in ns.iter().enumerate() {
            let table: Vec<TuneRow> = alphas
                .iter()
                .enumerate()
                .map(|(ai, &alpha)| {
                    let vals: Vec<f64> = errors.iter().flatten().map(|e| e[ni][ki][ai]).collect();
                    let failures = vals.iter().filter(|v| !v.is_finite()).count();
                    let (mean_error, std_error) = mean_std(vals.iter().copied());
                    TuneRow {
                        alpha,
                        mean_error,
                        std_error,
                        failures,
                        used: vals.len() - failures,
                    }
                })
                .collect();
            out.push(TuneResult {
                kind,
                n,
                threshold,
                best_alpha: select_alpha(&table),
                table,
            });
        }
    }
    out
}

/// Best `alpha` from the grid for one estimator at one sample size.
pub fn tune_alpha(config: &ExperimentConfig, kind: EstimatorKind, n: usize, options: TrialOptions) -> TuneResult {
    tune_grid(config, &[n], &[kind], config.reference_threshold(), options)
        .pop()
        .expect("one tuning result")
}

fn tuned(tuning: &[TuneResult], kind: EstimatorKind, n: usize) -> Option<f64> {
    tuning
        .iter()
        .find(|t| t.kind == kind && t.n == n)
        .and_then(|t| t.best_alpha)
}

fn no_alpha_report(config: &ExperimentConfig, cell: &TrialCell, seed: u64) -> TrialReport {
    let mut r = TrialReport::failed(config, cell, seed, &Error::EmptyResult(String::new()));
    r.status = "error:no_admissible_alpha".into();
    r
}

/// Evaluates every `(kind, n)` at its tuned `alpha` on the evaluation trials.
fn evaluate_tuned(
    config: &ExperimentConfig,
    ns: &[usize],
    kinds: &[EstimatorKind],
    threshold: f64,
    tuning: &[TuneResult],
    options: TrialOptions,
) -> Vec<TrialReport> {
    let per_trial: Vec<Vec<TrialReport>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(config.master_seed, SeedDomain::Evaluation, t);
            let cells: Vec<TrialCell> = kinds
                .iter()
                .flat_map(|&kind| {
                    ns.iter().map(move |&n| TrialCell {
                        n,
                        threshold,
                        alpha: tuned(tuning, kind, n).unwrap_or(f64::NAN),
                        kind,
                        trial: t,
                    })
                })
                .collect();
            let world = match TrialWorld::build(config, threshold, seed, options) {
                Ok(w) => w,
                Err(e) => return cells.iter().map(|c| TrialReport::failed(config, c, seed, &e)).collect(),
            };
            let mut reports = Vec::with_capacity(cells.len());
            for &n in ns {
                let data = TrialData::new(&world, config, n);
                let prepared = data.as_ref().ok().map(|d| d.prepared());
                for cell in cells.iter().filter(|c| c.n == n) {
                    let report = if cell.alpha.is_nan() {
                        no_alpha_report(config, cell, seed)
                    } else {
                        match (&data, &prepared) {
                            (Ok(d), Some(Ok(p))) => report_on(config, d, p, cell)
                                .unwrap_or_else(|e| TrialReport::failed(config, cell, seed, &e)),
                            (Err(e), _) | (_, Some(Err(e))) => TrialReport::failed(config, cell, seed, e),
                            (Ok(_), None) => unreachable!("prepared exists whenever data does"),
                        }
                    };
                    reports.push(report);
                }
            }
            reports
        })
        .collect();
    let mut rows: Vec<TrialReport> = per_trial.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.kind, r.n, r.trial));
    rows
}

/// Creates the output directory and writes the run manifest, failing with an
/// I/O error before any computation when the location is unusable.
pub fn prepare_out_dir(dir: &Path, config: &ExperimentConfig, command: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = config.manifest();
    manifest.push("command", command);
    manifest.write(&dir.join(format!("{command}_manifest.txt")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummaryRow {
    pub kind: EstimatorKind,
    pub n: usize,
    pub alpha: f64,
    pub mean_error: f64,
    pub std_error: f64,
    pub mean_bound: f64,
    pub std_bound: f64,
    pub ok_trials: usize,
    /// Trials where the bound was at least the empirical error.
    pub bound_holds: usize,
}

#[derive(Debug, Clone)]
pub struct SampleSizeSweep {
    pub tuning: Vec<TuneResult>,
    pub rows: Vec<TrialReport>,
    pub summary: Vec<SweepSummaryRow>,
}

fn summarize(
    rows: &[TrialReport],
    kinds: &[EstimatorKind],
    ns: &[usize],
    tuning: &[TuneResult],
) -> Vec<SweepSummaryRow> {
    let mut out = Vec::new();
    for &kind in kinds {
        for &n in ns {
            let cell: Vec<&TrialReport> = rows
                .iter()
                .filter(|r| r.kind == kind && r.n == n && r.is_ok())
                .collect();
            let (mean_error, std_error) = mean_std(cell.iter().map(|r| r.empirical_error));
            let (mean_bound, std_bound) = mean_std(cell.iter().map(|r| r.bound_value));
            out.push(SweepSummaryRow {
                kind,
                n,
                alpha: tuned(tuning, kind, n).unwrap_or(f64::NAN),
                mean_error,
                std_error,
                mean_bound,
                std_bound,
                ok_trials: cell.len(),
                bound_holds: cell.iter().filter(|r| r.bound_value >= r.empirical_error).count(),
            });
        }
    }
    out
}

/// Empirical error and bound versus sample size for both estimators, each at
/// its own tuned `alpha` per sample size.
pub fn sweep_sample_size(config: &ExperimentConfig, options: TrialOptions) -> Result<SampleSizeSweep> {
    config.validate()?;
    let kinds = EstimatorKind::ALL;
    let threshold = config.reference_threshold();
    let tuning = tune_grid(config, &config.n_grid, &kinds, threshold, options);
    let rows = evaluate_tuned(config, &config.n_grid, &kinds, threshold, &tuning, options);
    let summary = summarize(&rows, &kinds, &config.n_grid, &tuning);
    Ok(SampleSizeSweep { tuning, rows, summary })
}

pub fn tuning_table(tuning: &[TuneResult]) -> Table {
    let mut t = Table::new("kind,n,threshold,alpha,mean_error,std_error,failures,selected");
    for r in tuning {
        for row in &r.table {
            t.push(&[
                s(r.kind.as_str()),
                us(r.n),
                f(r.threshold),
                f(row.alpha),
                f(row.mean_error),
                f(row.std_error),
                us(row.failures),
                b(r.best_alpha == Some(row.alpha)),
            ]);
        }
    }
    t
}

pub fn sweep_summary_table(summary: &[SweepSummaryRow]) -> Table {
    let mut t = Table::new("kind,n,alpha,mean_error,std_error,mean_bound,std_bound,ok_trials,bound_holds");
    for r in summary {
        t.push(&[
            s(r.kind.as_str()),
            us(r.n),
            f(r.alpha),
            f(r.mean_error),
            f(r.std_error),
            f(r.mean_bound),
            f(r.std_bound),
            us(r.ok_trials),
            us(r.bound_holds),
        ]);
    }
    t
}

pub fn sweep_plot(summary: &[SweepSummaryRow], kind: EstimatorKind) -> String {
    let rows: Vec<&SweepSummaryRow> = summary.iter().filter(|r| r.kind == kind).collect();
    let title = match kind {
        EstimatorKind::Laplacian => "Laplacian regularized estimator",
        EstimatorKind::Ridge => "Ridge estimator",
    };
    line_chart(
        title,
        "sample size n",
        "||Theta_hat - Theta*||_F",
        &[
            Series {
                label: "theoretical bound",
                color: "#d62728",
                points: rows.iter().map(|r| (r.n as f64, r.mean_bound)).collect(),
            },
            Series {
                label: "empirical error",
                color: "#1f77b4",
                points: rows.iter().map(|r| (r.n as f64, r.mean_error)).collect(),
            },
        ],
    )
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs [`sweep_sample_size`] and writes `sweep_n.csv`, `sweep_n_summary.csv`,
/// `sweep_n_tuning.csv`, and one SVG per estimator into `dir`.
pub fn sweep_sample_size_to_dir(
    config: &ExperimentConfig,
    dir: &Path,
    options: TrialOptions,
) -> Result<SampleSizeSweep> {
    config.validate()?;
    prepare_out_dir(dir, config, "sweep_n")?;
    let sweep = sweep_sample_size(config, options)?;
    sweep_n_table(&sweep.rows).write(&dir.join("sweep_n.csv"))?;
    sweep_summary_table(&sweep.summary).write(&dir.join("sweep_n_summary.csv"))?;
    tuning_table(&sweep.tuning).write(&dir.join("sweep_n_tuning.csv"))?;
    for kind in EstimatorKind::ALL {
        write_text(
            &dir.join(format!("sweep_n_{kind}.svg")),
            &sweep_plot(&sweep.summary, kind),
        )?;
    }
    Ok(sweep)
}

pub fn tune_alpha_to_dir(
    config: &ExperimentConfig,
    kind: EstimatorKind,
    n: usize,
    dir: &Path,
    options: TrialOptions,
) -> Result<TuneResult> {
    config.validate()?;
    prepare_out_dir(dir, config, "tune_alpha")?;
    let result = tune_alpha(config, kind, n, options);
    tuning_table(std::slice::from_ref(&result)).write(&dir.join(format!("tune_alpha_{kind}.csv")))?;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRow {
    pub trial: usize,
    pub trial_seed: u64,
    pub laplacian_error: f64,
    pub ridge_error: f64,
    pub status: String,
}

impl PairRow {
    pub fn difference(&self) -> f64 {
        self.laplacian_error - self.ridge_error
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub n: usize,
    pub laplacian_alpha: Option<f64>,
    pub ridge_alpha: Option<f64>,
    pub pairs: Vec<PairRow>,
    pub mean_difference: f64,
    pub mean_laplacian_error: f64,
    pub mean_ridge_error: f64,
    pub laplacian_wins: usize,
    pub ridge_wins: usize,
    pub ties: usize,
    pub sign_test_p: f64,
}

/// Paired comparison of both estimators at their tuned `alpha`: each trial
/// solves both on the same data.
pub fn compare_estimators(config: &ExperimentConfig, n: usize, options: TrialOptions) -> Result<Comparison> {
    config.validate()?;
    let kinds = EstimatorKind::ALL;
    let threshold = config.reference_threshold();
    let tuning = tune_grid(config, &[n], &kinds, threshold, options);
    let rows = evaluate_tuned(config, &[n], &kinds, threshold, &tuning, options);
    let pairs: Vec<PairRow> = (0..config.trials)
        .map(|t| {
            let find = |kind| {
                rows.iter()
                    .find(|r| r.kind == kind && r.trial == t)
                    .expect("row per trial")
            };
            let (lap, ridge) = (find(EstimatorKind::Laplacian), find(EstimatorKind::Ridge));
            let status = if lap.is_ok() && ridge.is_ok() {
                "ok".to_string()
            } else if !lap.is_ok() {
                lap.status.clone()
            } else {
                ridge.status.clone()
            };
            PairRow {
                trial: t,
                trial_seed: lap.trial_seed,
                laplacian_error: lap.empirical_error,
                ridge_error: ridge.empirical_error,
                status,
            }
        })
        .collect();
    let ok: Vec<&PairRow> = pairs.iter().filter(|p| p.status == "ok").collect();
    let laplacian_wins = ok.iter().filter(|p| p.difference() < 0.0).count();
    let ridge_wins = ok.iter().filter(|p| p.difference() > 0.0).count();
    let ties = ok.len() - laplacian_wins - ridge_wins;
    Ok(Comparison {
        n,
        laplacian_alpha: tuned(&tuning, EstimatorKind::Laplacian, n),
        ridge_alpha: tuned(&tuning, EstimatorKind::Ridge, n),
        mean_difference: mean_std(ok.iter().map(|p| p.difference())).0,
        mean_laplacian_error: mean_std(ok.iter().map(|p| p.laplacian_error)).0,
        mean_ridge_error: mean_std(ok.iter().map(|p| p.ridge_error)).0,
        laplacian_wins,
        ridge_wins,
        ties,
        sign_test_p: sign_test_p_value(laplacian_wins, ridge_wins),
        pairs,
    })
}

pub fn comparison_tables(cmp: &Comparison) -> (Table, Table) {
    let alpha = |a: Option<f64>| f(a.unwrap_or(f64::NAN));
    let mut rows =
        Table::new("n,trial,trial_seed,laplacian_alpha,ridge_alpha,laplacian_error,ridge_error,difference,status");
    for p in &cmp.pairs {
        rows.push(&[
            us(cmp.n),
            us(p.trial),
            u(p.trial_seed),
            alpha(cmp.laplacian_alpha),
            alpha(cmp.ridge_alpha),
            f(p.laplacian_error),
            f(p.ridge_error),
            f(p.difference()),
            s(p.status.clone()),
        ]);
    }
    let mut summary = Table::new("key,value");
    summary.push(&[s("n"), us(cmp.n)]);
    summary.push(&[s("laplacian_alpha"), alpha(cmp.laplacian_alpha)]);
    summary.push(&[s("ridge_alpha"), alpha(cmp.ridge_alpha)]);
    summary.push(&[s("mean_laplacian_error"), f(cmp.mean_laplacian_error)]);
    summary.push(&[s("mean_ridge_error"), f(cmp.mean_ridge_error)]);
    summary.push(&[s("mean_difference"), f(cmp.mean_difference)]);
    summary.push(&[s("laplacian_wins"), us(cmp.laplacian_wins)]);
    summary.push(&[s("ridge_wins"), us(cmp.ridge_wins)]);
    summary.push(&[s("ties"), us(cmp.ties)]);
    summary.push(&[s("sign_test_p"), f(cmp.sign_test_p)]);
    (rows, summary)
}

pub fn compare_to_dir(config: &ExperimentConfig, n: usize, dir: &Path, options: TrialOptions) -> Result<Comparison> {
    config.validate()?;
    prepare_out_dir(dir, config, "compare")?;
    let cmp = compare_estimators(config, n, options)?;
    let (rows, summary) = comparison_tables(&cmp);
    rows.write(&dir.join("compare.csv"))?;
    summary.write(&dir.join("compare_summary.csv"))?;
    Ok(cmp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityRow {
    pub threshold: f64,
    pub trial: usize,
    pub trial_seed: u64,
    pub num_edges: usize,
    pub lambda2: f64,
    pub alpha: f64,
    pub empirical_error: f64,
    pub bound_value: f64,
    pub misalignment: f64,
    pub kappa: f64,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySummaryRow {
    pub threshold: f64,
    pub alpha: f64,
    pub connected_trials: usize,
    pub mean_edges: f64,
    pub mean_lambda2: f64,
    pub mean_error: f64,
    pub mean_bound: f64,
}

#[derive(Debug, Clone)]
pub struct DensitySweep {
    pub rows: Vec<DensityRow>,
    pub summary: Vec<DensitySummaryRow>,
}

/// Laplacian-estimator error and bound across graph sparsification
/// thresholds at one sample size. Disconnected trials are kept as rows with
/// status `disconnected` and excluded from the summary.
pub fn sweep_density(config: &ExperimentConfig, n: usize, options: TrialOptions) -> Result<DensitySweep> {
    config.validate()?;
    let kind = EstimatorKind::Laplacian;
    let kappa = kappa_from_sigma(&config.sigma_cov())?;
    let r = config.m.min(config.k);
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &threshold in &config.threshold_grid {
        let alpha = tune_grid(config, &[n], &[kind], threshold, options)[0]
            .best_alpha
            .unwrap_or(f64::NAN);
        let block: Vec<DensityRow> = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(config.master_seed, SeedDomain::Evaluation, t);
                let mut row = DensityRow {
                    threshold,
                    trial: t,
                    trial_seed: seed,
                    num_edges: 0,
                    lambda2: f64::NAN,
                    alpha,
                    empirical_error: f64::NAN,
                    bound_value: f64::NAN,
                    misalignment: f64::NAN,
                    kappa,
                    status: "ok".into(),
                };
                let graph = match crate::graph::generate_geometric_graph(config.m, config.bandwidth, threshold, seed) {
                    Ok(g) => g,
                    Err(e) => {
                        row.status = format!("error:{}", e.status_tag());
                        return row;
                    }
                };
                row.num_edges = graph.num_edges();
                if !graph.is_connected() {
                    row.status = "disconnected".into();
                    return row;
                }
                if alpha.is_nan() {
                    row.status = "error:no_admissible_alpha".into();
                    return row;
                }
                let mut attempt = || -> Result<()> {
                    let world = TrialWorld::build(config, threshold, seed, options)?;
                    let data = TrialData::new(&world, config, n)?;
                    let prepared = data.prepared()?;
                    let est = data.solve(&prepared, kind, alpha)?;
                    let ingredients = theorem1_bound(alpha, r, &world.penalty, &world.theta_star, kappa)?;
                    row.lambda2 = world.spectrum.fiedler_value()?;
                    row.empirical_error = data.error_of(&est);
                    row.bound_value = ingredients.bound_value;
                    row.misalignment = ingredients.smoothness_misalignment;
                    Ok(())
                };
                if let Err(e) = attempt() {
                    row.status = format!("error:{}", e.status_tag());
                }
                row
            })
            .collect();
        let ok: Vec<&DensityRow> = block.iter().filter(|r| r.status == "ok").collect();
        summary.push(DensitySummaryRow {
            threshold,
            alpha,
            connected_trials: ok.len(),
            mean_edges: mean_std(ok.iter().map(|r| r.num_edges as f64)).0,
            mean_lambda2: mean_std(ok.iter().map(|r| r.lambda2)).0,
            mean_error: mean_std(ok.iter().map(|r| r.empirical_error)).0,
            mean_bound: mean_std(ok.iter().map(|r| r.bound_value)).0,
        });
        rows.extend(block);
    }
    if summary.iter().all(|s| s.connected_trials == 0) {
        return Err(Error::EmptyResult(
            "every threshold produced only disconnected graphs".into(),
        ));
    }
    Ok(DensitySweep { rows, summary })
}

pub fn density_tables(sweep: &DensitySweep) -> (Table, Table) {
    let mut rows = Table::new(
        "threshold,trial,trial_seed,num_edges,lambda2,alpha,empirical_error,bound_value,misalignment,kappa,status",
    );
    for r in &sweep.rows {
        rows.push(&[
            f(r.threshold),
            us(r.trial),
            u(r.trial_seed),
            us(r.num_edges),
            f(r.lambda2),
            f(r.alpha),
            f(r.empirical_error),
            f(r.bound_value),
            f(r.misalignment),
            f(r.kappa),
            s(r.status.clone()),
        ]);
    }
    let mut summary = Table::new("threshold,alpha,connected_trials,mean_edges,mean_lambda2,mean_error,mean_bound");
    for r in &sweep.summary {
        summary.push(&[
            f(r.threshold),
            f(r.alpha),
            us(r.connected_trials),
            f(r.mean_edges),
            f(r.mean_lambda2),
            f(r.mean_error),
            f(r.mean_bound),
        ]);
    }
    (rows, summary)
}

pub fn sweep_density_to_dir(
    config: &ExperimentConfig,
    n: usize,
    dir: &Path,
    options: TrialOptions,
) -> Result<DensitySweep> {
    config.validate()?;
    prepare_out_dir(dir, config, "sweep_density")?;
    let sweep = sweep_density(config, n, options)?;
    let (rows, summary) = density_tables(&sweep);
    rows.write(&dir.join("sweep_density.csv"))?;
    summary.write(&dir.join("sweep_density_summary.csv"))?;
    Ok(sweep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaRow {
    pub trial: usize,
    pub trial_seed: u64,
    pub alpha: f64,
    pub report: Option<crate::bounds::LemmaReport>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub n: usize,
    pub alpha: f64,
    pub rows: Vec<LemmaRow>,
    pub ok_trials: usize,
    pub lemma1_exact_rate: f64,
    pub lemma1_approx_rate: f64,
    pub lemma2_rate: f64,
    pub lemma3_rate: f64,
    pub assumption1_mean: f64,
    pub assumption1_max: f64,
}

/// Evaluates every lemma on `trials` realized instances, with
/// `Delta = Theta_hat - Theta*` from the Laplacian estimator at the smallest
/// `alpha` the bound admits.
pub fn check_lemmas(config: &ExperimentConfig, n: usize, options: TrialOptions) -> Result<LemmaCheck> {
    config.validate()?;
    let alpha = recommended_alpha(config.sigma, config.d, config.m, config.k, n)?;
    let threshold = config.reference_threshold();
    let rows: Vec<LemmaRow> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(config.master_seed, SeedDomain::Evaluation, t);
            let attempt = || -> Result<crate::bounds::LemmaReport> {
                let world = TrialWorld::build(config, threshold, seed, options)?;
                let data = TrialData::new(&world, config, n)?;
                let prepared = data.prepared()?;
                let est = data.solve(&prepared, EstimatorKind::Laplacian, alpha)?;
                let delta = &est.theta_hat - &data.instance.theta_star;
                lemma_diagnostics(
                    &delta,
                    &world.penalty,
                    &data.instance.omega,
                    &data.instance.x,
                    config.sigma,
                    config.d,
                    &config.sigma_cov(),
                )
            };
            match attempt() {
                Ok(report) => LemmaRow {
                    trial: t,
                    trial_seed: seed,
                    alpha,
                    report: Some(report),
                    status: "ok".into(),
                },
                Err(e) => LemmaRow {
                    trial: t,
                    trial_seed: seed,
                    alpha,
                    report: None,
                    status: format!("error:{}", e.status_tag()),
                },
            }
        })
        .collect();
    let reports: Vec<&crate::bounds::LemmaReport> = rows.iter().filter_map(|r| r.report.as_ref()).collect();
    let ok = reports.len();
    let rate = |pred: &dyn Fn(&crate::bounds::LemmaReport) -> bool| {
        if ok == 0 {
            f64::NAN
        } else {
            reports.iter().filter(|r| pred(r)).count() as f64 / ok as f64
        }
    };
    Ok(LemmaCheck {
        n,
        alpha,
        ok_trials: ok,
        lemma1_exact_rate: rate(&|r| r.lemma1_exact_holds()),
        lemma1_approx_rate: rate(&|r| r.lemma1_approx_holds()),
        lemma2_rate: rate(&|r| r.lemma2_holds()),
        lemma3_rate: rate(&|r| r.lemma3_event),
        assumption1_mean: mean_std(reports.iter().map(|r| r.assumption1_ratio)).0,
        assumption1_max: reports.iter().map(|r| r.assumption1_ratio).fold(f64::NAN, f64::max),
        rows,
    })
}

pub fn lemma_tables(check: &LemmaCheck) -> (Table, Table) {
    let mut rows = Table::new(
        "n,trial,trial_seed,alpha,lemma1_lhs,lemma1_exact_rhs,lemma1_approx_rhs,lemma1_exact_ok,lemma1_approx_ok,\
assumption1_ratio,lemma2_lhs,lemma2_lhs_operator,lemma2_rhs,lemma2_ok,lemma3_min,lemma3_max,lemma3_ok,realized_kappa,status",
    );
    for r in &check.rows {
        let mut fields = vec![us(check.n), us(r.trial), u(r.trial_seed), f(r.alpha)];
        match &r.report {
            Some(rep) => fields.extend([
                f(rep.lemma1_lhs),
                f(rep.lemma1_exact_rhs),
                f(rep.lemma1_approx_rhs),
                b(rep.lemma1_exact_holds()),
                b(rep.lemma1_approx_holds()),
                f(rep.assumption1_ratio),
                f(rep.lemma2_lhs),
                f(rep.lemma2_lhs_operator),
                f(rep.lemma2_rhs),
                b(rep.lemma2_holds()),
                f(rep.lemma3_min),
                f(rep.lemma3_max),
                b(rep.lemma3_event),
                f(rep.realized_kappa()),
            ]),
            None => {
                fields.extend((0..3).map(|_| f(f64::NAN)));
                fields.extend([b(false), b(false)]);
                fields.extend((0..4).map(|_| f(f64::NAN)));
                fields.push(b(false));
                fields.extend((0..2).map(|_| f(f64::NAN)));
                fields.push(b(false));
                fields.push(f(f64::NAN));
            }
        }
        fields.push(s(r.status.clone()));
        rows.push(&fields);
    }
    let mut summary = Table::new("key,value");
    summary.push(&[s("n"), us(check.n)]);
    summary.push(&[s("alpha"), f(check.alpha)]);
    summary.push(&[s("ok_trials"), us(check.ok_trials)]);
    summary.push(&[s("lemma1_exact_rate"), f(check.lemma1_exact_rate)]);
    summary.push(&[s("lemma1_approx_rate"), f(check.lemma1_approx_rate)]);
    summary.push(&[s("assumption1_ratio_mean"), f(check.assumption1_mean)]);
    summary.push(&[s("assumption1_ratio_max"), f(check.assumption1_max)]);
    summary.push(&[s("lemma2_rate"), f(check.lemma2_rate)]);
    summary.push(&[s("lemma2_violation_rate"), f(1.0 - check.lemma2_rate)]);
    summary.push(&[
        s("lemma2_note"),
        s("lhs uses the entrywise max norm; lemma2_lhs_operator gives the spectral-norm reading; the inequality is reported not assumed"),
    ]);
    summary.push(&[s("lemma3_rate"), f(check.lemma3_rate)]);
    (rows, summary)
}

pub fn check_lemmas_to_dir(
    config: &ExperimentConfig,
    n: usize,
    dir: &Path,
    options: TrialOptions,
) -> Result<LemmaCheck> {
    config.validate()?;
    prepare_out_dir(dir, config, "check_lemmas")?;
    let check = check_lemmas(config, n, options)?;
    let (rows, summary) = lemma_tables(&check);
    rows.write(&dir.join("check_lemmas.csv"))?;
    summary.write(&dir.join("check_lemmas_summary.csv"))?;
    Ok(check)
}
