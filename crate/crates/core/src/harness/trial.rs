//! One trial of the simulation: graph, ground truth, data, estimate, bound.

use nalgebra::DMatrix;

use crate::bounds::{empirical_vs_bound, kappa_from_sigma, theorem1_bound};
use crate::error::{Error, Result};
use crate::graph::{generate_geometric_graph, laplacian, Graph, LaplacianSpectrum, DEFAULT_ZERO_TOL};
use crate::rng::derive_seed;
use crate::solver::{solve_ridge, EstimateResult, EstimatorKind, PreparedProblem};
use crate::synth::{sample_design_matrix, sample_iid_design_matrix, ModelInstance};

use super::config::ExperimentConfig;

/// Seed domains under the master seed. Evaluation and tuning never share instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum SeedDomain {
    Evaluation = 0,
    Tuning = 1,
}

pub fn trial_seed(master_seed: u64, domain: SeedDomain, trial: usize) -> u64 {
    derive_seed(master_seed, &[domain as u64, trial as u64])
}

/// How the ground truth is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruthModel {
    /// Columns from `N(0, L^+)`, smooth on the graph.
    #[default]
    Smooth,
    /// i.i.d. Gaussian entries with the same average variance `tr(L^+) / m`.
    Iid,
}

/// Which penalty the "laplacian" estimator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PenaltyChoice {
    #[default]
    Graph,
    /// Replace the graph Laplacian by `I_m`, making both estimators coincide.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOptions {
    pub truth: TruthModel,
    pub penalty: PenaltyChoice,
}

/// Everything in a trial that does not depend on the sample size.
#[derive(Debug, Clone)]
pub struct TrialWorld {
    pub seed: u64,
    pub threshold: f64,
    pub graph: Graph,
    pub spectrum: LaplacianSpectrum,
    /// Penalty of the "laplacian" estimator: `spectrum` or the identity.
    pub penalty: LaplacianSpectrum,
    pub identity: LaplacianSpectrum,
    pub theta_star: DMatrix<f64>,
}

impl TrialWorld {
    pub fn build(config: &ExperimentConfig, threshold: f64, seed: u64, options: TrialOptions) -> Result<Self> {
        let graph = generate_geometric_graph(config.m, config.bandwidth, threshold, seed)?;
        let spectrum = laplacian(&graph, DEFAULT_ZERO_TOL)?;
        if !graph.is_connected() || !spectrum.is_connected() {
            return Err(Error::InvalidArgument(format!(
                "graph at threshold {threshold} is disconnected"
            )));
        }
        let theta_star = match options.truth {
            TruthModel::Smooth => sample_design_matrix(&spectrum, config.k, seed)?,
            TruthModel::Iid => {
                let trace_pinv: f64 = spectrum
                    .eigenvalues()
                    .iter()
                    .filter(|&&l| l > 0.0)
                    .map(|l| 1.0 / l)
                    .sum();
                sample_iid_design_matrix(config.m, config.k, trace_pinv / config.m as f64, seed)?
            }
        };
        let identity = LaplacianSpectrum::identity(config.m);
        let penalty = match options.penalty {
            PenaltyChoice::Graph => spectrum.clone(),
            PenaltyChoice::Identity => identity.clone(),
        };
        Ok(TrialWorld {
            seed,
            threshold,
            graph,
            spectrum,
            penalty,
            identity,
            theta_star,
        })
    }

    pub fn instance(&self, config: &ExperimentConfig, n: usize) -> Result<ModelInstance> {
        ModelInstance::from_truth(self.theta_star.clone(), n, config.sigma, &config.sigma_cov(), self.seed)
    }

    /// Penalty spectrum that the bound for `kind` refers to.
    pub fn bound_penalty(&self, kind: EstimatorKind) -> &LaplacianSpectrum {
        match kind {
            EstimatorKind::Laplacian => &self.penalty,
            EstimatorKind::Ridge => &self.identity,
        }
    }
}

/// An instance with the Laplacian solve prepared, so many `alpha` values can
/// be tried cheaply.
pub struct TrialData<'w> {
    pub world: &'w TrialWorld,
    pub instance: ModelInstance,
}

impl<'w> TrialData<'w> {
    pub fn new(world: &'w TrialWorld, config: &ExperimentConfig, n: usize) -> Result<Self> {
        Ok(TrialData {
            world,
            instance: world.instance(config, n)?,
        })
    }

    pub fn prepared(&self) -> Result<PreparedProblem<'_>> {
        PreparedProblem::new(&self.instance.y, &self.instance.x, &self.world.penalty)
    }

    pub fn solve(&self, prepared: &PreparedProblem<'_>, kind: EstimatorKind, alpha: f64) -> Result<EstimateResult> {
        match kind {
            EstimatorKind::Laplacian => prepared.solve(alpha, kind),
            EstimatorKind::Ridge => solve_ridge(&self.instance.y, &self.instance.x, alpha),
        }
    }

    pub fn error_of(&self, estimate: &EstimateResult) -> f64 {
        (&estimate.theta_hat - &self.instance.theta_star).norm()
    }
}

/// Grid coordinates of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialCell {
    pub n: usize,
    pub threshold: f64,
    pub alpha: f64,
    pub kind: EstimatorKind,
    pub trial: usize,
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub sigma: f64,
    pub bandwidth: f64,
    pub threshold: f64,
    pub d: f64,
    pub kind: EstimatorKind,
    pub alpha: f64,
    pub trial: usize,
    pub trial_seed: u64,
    pub empirical_error: f64,
    pub bound_value: f64,
    pub lambda2: f64,
    pub kappa: f64,
    pub smoothness_misalignment: f64,
    pub assumption1_ratio: f64,
    pub stationarity_residual: f64,
    pub realized_kappa: f64,
    pub alpha_meets_hypothesis: bool,
    pub status: String,
}

impl TrialReport {
    fn blank(config: &ExperimentConfig, cell: &TrialCell, seed: u64, status: String) -> Self {
        TrialReport {
            m: config.m,
            k: config.k,
            n: cell.n,
            sigma: config.sigma,
            bandwidth: config.bandwidth,
            threshold: cell.threshold,
            d: config.d,
            kind: cell.kind,
            alpha: cell.alpha,
            trial: cell.trial,
            trial_seed: seed,
            empirical_error: f64::NAN,
            bound_value: f64::NAN,
            lambda2: f64::NAN,
            kappa: f64::NAN,
            smoothness_misalignment: f64::NAN,
            assumption1_ratio: f64::NAN,
            stationarity_residual: f64::NAN,
            realized_kappa: f64::NAN,
            alpha_meets_hypothesis: false,
            status,
        }
    }

    pub fn failed(config: &ExperimentConfig, cell: &TrialCell, seed: u64, err: &Error) -> Self {
        Self::blank(config, cell, seed, format!("error:{}", err.status_tag()))
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Solves, bounds and reports one cell on already generated data.
pub fn report_on(
    config: &ExperimentConfig,
    data: &TrialData<'_>,
    prepared: &PreparedProblem<'_>,
    cell: &TrialCell,
) -> Result<TrialReport> {
    let estimate = data.solve(prepared, cell.kind, cell.alpha)?;
    let kappa = kappa_from_sigma(&config.sigma_cov())?;
    let r = config.m.min(config.k);
    let penalty = data.world.bound_penalty(cell.kind);
    let ingredients = theorem1_bound(cell.alpha, r, penalty, &data.instance.theta_star, kappa)?;
    let cmp = empirical_vs_bound(&data.instance, &estimate, &ingredients, penalty, config.d)?;
    let mut report = TrialReport::blank(config, cell, data.world.seed, "ok".into());
    report.empirical_error = cmp.empirical_error;
    report.bound_value = cmp.bound_value;
    report.lambda2 = ingredients.lambda2;
    report.kappa = ingredients.kappa;
    report.smoothness_misalignment = ingredients.smoothness_misalignment;
    report.assumption1_ratio = cmp.lemmas.assumption1_ratio;
    report.stationarity_residual = estimate.stationarity_residual;
    report.realized_kappa = cmp.lemmas.realized_kappa();
    report.alpha_meets_hypothesis = cmp.alpha_meets_hypothesis;
    Ok(report)
}

/// Runs one evaluation trial end to end from a known trial seed. Failures
/// become a report with a non-OK status instead of an error.
pub fn run_trial_with_seed(
    config: &ExperimentConfig,
    cell: &TrialCell,
    seed: u64,
    options: TrialOptions,
) -> TrialReport {
    let attempt = || -> Result<TrialReport> {
        let world = TrialWorld::build(config, cell.threshold, seed, options)?;
        let data = TrialData::new(&world, config, cell.n)?;
        let prepared = data.prepared()?;
        report_on(config, &data, &prepared, cell)
    };
    attempt().unwrap_or_else(|e| TrialReport::failed(config, cell, seed, &e))
}

/// Runs evaluation trial `cell.trial` under the config's master seed.
pub fn run_trial(config: &ExperimentConfig, cell: &TrialCell, options: TrialOptions) -> TrialReport {
    let seed = trial_seed(config.master_seed, SeedDomain::Evaluation, cell.trial);
    run_trial_with_seed(config, cell, seed, options)
}
