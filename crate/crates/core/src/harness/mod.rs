//! Seeded experiment engine: configuration, single trials, sweeps, and
//! their CSV/SVG outputs.

pub mod config;
pub mod csv;
pub mod experiments;
pub mod plot;
pub mod stats;
pub mod trial;

pub use config::{default_alpha_grid, log_grid, ExperimentConfig};
pub use experiments::{
    check_lemmas, check_lemmas_to_dir, compare_estimators, compare_to_dir, sweep_density, sweep_density_to_dir,
    sweep_sample_size, sweep_sample_size_to_dir, tune_alpha, tune_alpha_to_dir, tune_grid, Comparison, DensitySweep,
    LemmaCheck, SampleSizeSweep, TuneResult, TuneRow,
};
pub use trial::{
    run_trial, run_trial_with_seed, trial_seed, PenaltyChoice, SeedDomain, TrialCell, TrialOptions, TrialReport,
    TruthModel,
};
