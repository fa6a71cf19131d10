use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Manifest;

/// Default `alpha` grid: 20 log-spaced points over `[1e-6, 1e2]`.
pub fn default_alpha_grid() -> Vec<f64> {
    log_grid(1e-6, 1e2, 20)
}

/// `count` log-spaced points over `[lo, hi]`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count)
                .map(|i| match i {
                    0 => lo,
                    i if i == count - 1 => hi,
                    i => 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64),
                })
                .collect()
        }
    }
}

/// Everything a sweep needs. Read from a JSON object whose keys are exactly
/// these field names; missing keys take the defaults below, unknown keys are
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub m: usize,
    pub k: usize,
    pub n_grid: Vec<usize>,
    /// Noise standard deviation.
    pub sigma: f64,
    pub bandwidth: f64,
    pub threshold_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    #[serde(rename = "D")]
    pub d: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: 100,
            k: 10,
            n_grid: (1..=10).map(|i| 100 * i).collect(),
            sigma: 5f64.sqrt(),
            bandwidth: 0.5,
            threshold_grid: vec![0.0],
            alpha_grid: default_alpha_grid(),
            d: crate::bounds::DEFAULT_D,
            trials: 20,
            master_seed: 2020,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn strictly_ascending<T: PartialOrd>(xs: &[T]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.m == 0 || self.k == 0 {
            return fail("m and k must be >= 1".into());
        }
        if self.n_grid.is_empty() || !strictly_ascending(&self.n_grid) {
            return fail("n_grid must be non-empty and strictly ascending".into());
        }
        if let Some(&n) = self.n_grid.iter().find(|&&n| n < self.k) {
            return fail(format!("n_grid entry {n} is below k = {}", self.k));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return fail(format!("sigma must be finite and >= 0, got {}", self.sigma));
        }
        if !(self.bandwidth > 0.0) || !self.bandwidth.is_finite() {
            return fail(format!("bandwidth must be positive, got {}", self.bandwidth));
        }
        if self.threshold_grid.is_empty() || !strictly_ascending(&self.threshold_grid) {
            return fail("threshold_grid must be non-empty and strictly ascending".into());
        }
        if let Some(t) = self.threshold_grid.iter().find(|t| !(0.0..1.0).contains(*t)) {
            return fail(format!("threshold {t} outside [0, 1)"));
        }
        if self.alpha_grid.is_empty() || !strictly_ascending(&self.alpha_grid) {
            return fail("alpha_grid must be non-empty and strictly ascending".into());
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
            return fail(format!("alpha_grid entries must be positive, got {a}"));
        }
        if !(self.d >= 2.0) {
            return fail(format!("D must be >= 2, got {}", self.d));
        }
        if self.trials == 0 {
            return fail("trials must be >= 1".into());
        }
        Ok(())
    }

    /// Coefficient covariance, fixed to the identity.
    pub fn sigma_cov(&self) -> DMatrix<f64> {
        DMatrix::identity(self.k, self.k)
    }

    /// Sample size used by single-`n` experiments when none is given: the
    /// lower median of `n_grid` (500 for the default grid).
    pub fn reference_n(&self) -> usize {
        self.n_grid[(self.n_grid.len() - 1) / 2]
    }

    /// Graph threshold used by everything except the density sweep.
    pub fn reference_threshold(&self) -> f64 {
        self.threshold_grid[0]
    }

    pub fn manifest(&self) -> Manifest {
        let join = |xs: Vec<String>| xs.join(";");
        let mut m = Manifest::new();
        m.push("m", self.m)
            .push("k", self.k)
            .push("n_grid", join(self.n_grid.iter().map(|n| n.to_string()).collect()))
            .push_f64("sigma", self.sigma)
            .push_f64("bandwidth", self.bandwidth)
            .push(
                "threshold_grid",
                join(self.threshold_grid.iter().map(|&t| crate::graph::fmt_f64(t)).collect()),
            )
            .push(
                "alpha_grid",
                join(self.alpha_grid.iter().map(|&a| crate::graph::fmt_f64(a)).collect()),
            )
            .push_f64("D", self.d)
            .push("trials", self.trials)
            .push("master_seed", self.master_seed)
            .push("sigma_cov", "identity");
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.reference_n(), 500);
        assert_eq!(c.alpha_grid.len(), 20);
        assert_eq!(c.alpha_grid[0], 1e-6);
        assert_eq!(c.alpha_grid[19], 1e2);
    }

    #[test]
    fn partial_json_and_unknown_keys() {
        let c = ExperimentConfig::from_json(r#"{"m": 30, "D": 3.0, "n_grid": [50, 60]}"#).unwrap();
        assert_eq!((c.m, c.d, c.n_grid.clone()), (30, 3.0, vec![50, 60]));
        assert_eq!(c.k, 10);
        let err = ExperimentConfig::from_json(r#"{"m": 30, "bogus": 1}"#).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn json_roundtrip() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn validation_failures() {
        let bad = |f: &dyn Fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(&|c| c.n_grid = vec![]));
        assert!(bad(&|c| c.n_grid = vec![200, 100]));
        assert!(bad(&|c| c.n_grid = vec![5]));
        assert!(bad(&|c| c.alpha_grid = vec![0.0, 1.0]));
        assert!(bad(&|c| c.threshold_grid = vec![1.0]));
        assert!(bad(&|c| c.d = 1.0));
        assert!(bad(&|c| c.trials = 0));
        assert!(bad(&|c| c.bandwidth = 0.0));
    }

    #[test]
    fn log_grid_shape() {
        let g = log_grid(1e-2, 1e2, 5);
        assert_eq!(g.len(), 5);
        assert!((g[2] - 1.0).abs() < 1e-12);
        assert_eq!(log_grid(3.0, 4.0, 1), vec![3.0]);
    }
}
