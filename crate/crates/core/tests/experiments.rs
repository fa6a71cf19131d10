use std::time::Instant;

use glreg::bounds::BoundIngredients;
use glreg::harness::experiments::{check_lemmas_to_dir, density_tables, sweep_sample_size_to_dir, tune_alpha_to_dir};
use glreg::harness::{
    compare_estimators, run_trial, run_trial_with_seed, sweep_density, tune_alpha, ExperimentConfig, PenaltyChoice,
    TrialCell, TrialOptions, TruthModel,
};
use glreg::solver::EstimatorKind;
use glreg::Error;

fn small() -> ExperimentConfig {
    ExperimentConfig {
        m: 30,
        k: 4,
        n_grid: vec![50, 100, 200],
        trials: 6,
        ..ExperimentConfig::default()
    }
}

#[test]
fn single_point_sweep_has_one_row_per_estimator() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig {
        trials: 1,
        n_grid: vec![500],
        ..ExperimentConfig::default()
    };
    let sweep = sweep_sample_size_to_dir(&config, dir.path(), TrialOptions::default()).unwrap();
    assert_eq!(sweep.rows.len(), 2);
    let csv = std::fs::read_to_string(dir.path().join("sweep_n.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(
        lines[0],
        "kind,n,alpha,trial,empirical_error,bound_value,lambda2,kappa,misalignment,assumption1_ratio,residual,trial_seed,status"
    );
    assert!(lines[1].starts_with("laplacian,500,") && lines[1].ends_with(",ok"));
    assert!(lines[2].starts_with("ridge,500,"));
    for name in [
        "sweep_n_summary.csv",
        "sweep_n_tuning.csv",
        "sweep_n_laplacian.svg",
        "sweep_n_ridge.svg",
        "sweep_n_manifest.txt",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn rows_replay_from_their_seed() {
    let config = small();
    let dir = tempfile::tempdir().unwrap();
    let sweep = sweep_sample_size_to_dir(&config, dir.path(), TrialOptions::default()).unwrap();
    for row in sweep.rows.iter().step_by(5) {
        let cell = TrialCell {
            n: row.n,
            threshold: row.threshold,
            alpha: row.alpha,
            kind: row.kind,
            trial: row.trial,
        };
        assert_eq!(
            &run_trial_with_seed(&config, &cell, row.trial_seed, TrialOptions::default()),
            row
        );
        assert_eq!(&run_trial(&config, &cell, TrialOptions::default()), row);
    }
}

#[test]
fn unwritable_output_fails_before_computing() {
    let file = tempfile::NamedTempFile::new().unwrap();
    let bad = file.path().join("sub");
    let start = Instant::now();
    let err = sweep_sample_size_to_dir(&ExperimentConfig::default(), &bad, TrialOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Io { .. }), "{err:?}");
    assert_eq!(err.exit_code(), 4);
    assert!(start.elapsed().as_secs_f64() < 0.5);
}

#[test]
fn tuning_edge_cases() {
    let single = ExperimentConfig {
        alpha_grid: vec![0.37],
        ..small()
    };
    for kind in EstimatorKind::ALL {
        assert_eq!(
            tune_alpha(&single, kind, 100, TrialOptions::default()).best_alpha,
            Some(0.37)
        );
    }
    let noiseless = ExperimentConfig { sigma: 0.0, ..small() };
    for kind in EstimatorKind::ALL {
        let t = tune_alpha(&noiseless, kind, 100, TrialOptions::default());
        assert_eq!(t.best_alpha, Some(noiseless.alpha_grid[0]), "{kind}");
        assert_eq!(t.table.len(), noiseless.alpha_grid.len());
    }
}

#[test]
fn tuning_writes_its_table() {
    let dir = tempfile::tempdir().unwrap();
    let t = tune_alpha_to_dir(&small(), EstimatorKind::Ridge, 100, dir.path(), TrialOptions::default()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("tune_alpha_ridge.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + t.table.len());
    assert_eq!(csv.lines().filter(|l| l.ends_with(",true")).count(), 1);
}

#[test]
fn identity_penalty_makes_estimators_coincide() {
    let options = TrialOptions {
        penalty: PenaltyChoice::Identity,
        ..TrialOptions::default()
    };
    let cmp = compare_estimators(&small(), 100, options).unwrap();
    assert_eq!(cmp.laplacian_alpha, cmp.ridge_alpha);
    for p in &cmp.pairs {
        assert!(p.difference().abs() < 1e-10 * p.ridge_error, "{}", p.difference());
    }
}

#[test]
fn iid_truth_comparison_reports() {
    let options = TrialOptions {
        truth: TruthModel::Iid,
        ..TrialOptions::default()
    };
    let cmp = compare_estimators(&small(), 100, options).unwrap();
    assert_eq!(cmp.pairs.len(), 6);
    assert_eq!(cmp.laplacian_wins + cmp.ridge_wins + cmp.ties, 6);
    assert!(cmp.mean_difference.is_finite());
}

#[test]
fn denser_graphs_have_larger_fiedler_value() {
    let config = ExperimentConfig {
        threshold_grid: vec![0.0, 0.5],
        ..small()
    };
    let sweep = sweep_density(&config, 100, TrialOptions::default()).unwrap();
    let (dense, sparse) = (&sweep.summary[0], &sweep.summary[1]);
    assert!(dense.mean_lambda2 > sparse.mean_lambda2);
    assert!(dense.mean_edges > sparse.mean_edges);
    // Bound decreases in lambda_2 with the other ingredients held fixed.
    for row in sweep.rows.iter().filter(|r| r.status == "ok") {
        let here = BoundIngredients::evaluate(row.alpha, 4, row.misalignment, row.kappa, row.lambda2).unwrap();
        assert_eq!(here.bound_value, row.bound_value);
        let denser = BoundIngredients::evaluate(row.alpha, 4, row.misalignment, row.kappa, row.lambda2 * 2.0).unwrap();
        assert!(denser.bound_value < here.bound_value);
    }
    let (rows, summary) = density_tables(&sweep);
    assert_eq!(rows.len(), 12);
    assert_eq!(summary.len(), 2);
}

#[test]
fn disconnected_points_are_skipped_or_rejected() {
    let mixed = ExperimentConfig {
        threshold_grid: vec![0.0, 0.999],
        bandwidth: 0.1,
        trials: 3,
        ..small()
    };
    let sweep = sweep_density(&mixed, 100, TrialOptions::default()).unwrap();
    assert!(sweep
        .rows
        .iter()
        .filter(|r| r.threshold == 0.999)
        .all(|r| r.status == "disconnected"));
    assert_eq!(sweep.summary[1].connected_trials, 0);
    let all_bad = ExperimentConfig {
        threshold_grid: vec![0.999],
        ..mixed
    };
    assert!(matches!(
        sweep_density(&all_bad, 100, TrialOptions::default()),
        Err(Error::EmptyResult(_))
    ));
}

#[test]
fn lemma_check_writes_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let check = check_lemmas_to_dir(&small(), 100, dir.path(), TrialOptions::default()).unwrap();
    assert_eq!(check.ok_trials, 6);
    let csv = std::fs::read_to_string(dir.path().join("check_lemmas.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    let summary = std::fs::read_to_string(dir.path().join("check_lemmas_summary.csv")).unwrap();
    assert!(summary.contains("lemma2_violation_rate,"));
}

#[test]
fn config_contract() {
    let parsed = ExperimentConfig::from_json(r#"{"m": 40, "D": 3.0}"#).unwrap();
    assert_eq!(parsed.m, 40);
    assert_eq!(parsed.d, 3.0);
    assert_eq!(parsed.k, 10);
    let round = ExperimentConfig::from_json(&parsed.to_json()).unwrap();
    assert_eq!(round, parsed);
    assert!(matches!(
        ExperimentConfig::from_json(r#"{"mm": 3}"#),
        Err(Error::Config(_))
    ));
    let bad = [
        ExperimentConfig {
            n_grid: vec![200, 100],
            ..small()
        },
        ExperimentConfig {
            n_grid: vec![2],
            ..small()
        },
        ExperimentConfig {
            alpha_grid: vec![],
            ..small()
        },
        ExperimentConfig {
            alpha_grid: vec![0.0, 1.0],
            ..small()
        },
        ExperimentConfig { trials: 0, ..small() },
        ExperimentConfig { d: 1.0, ..small() },
    ];
    for c in bad {
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
    }
    assert_eq!(ExperimentConfig::default().reference_n(), 500);
}
