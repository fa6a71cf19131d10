//! Synthetic instances of the linear model `Y = Theta X + Omega`.
//!
//! The ground truth is smooth on the graph: each column of `Theta` is drawn
//! from the degenerate Gaussian whose covariance is the pseudoinverse `L^+`.
//! Draws are made column by column, so for a fixed seed the first `n`
//! columns of `X` and `Omega` do not depend on the total sample size.

use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dims, Error, Result};
use crate::graph::LaplacianSpectrum;
use crate::io::{write_matrix_csv, Manifest};
use crate::rng::{stream_rng, Stream};

fn standard_normal_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut z = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            z[(i, j)] = rng.sample(StandardNormal);
        }
    }
    z
}

/// `m x k` matrix with i.i.d. columns from `N(0, L^+)`, realized as
/// `Q[:, 1..] diag(lambda_i^{-1/2}) z`. The constant mode is never excited.
pub fn sample_design_matrix(spectrum: &LaplacianSpectrum, k: usize, seed: u64) -> Result<DMatrix<f64>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if !spectrum.is_connected() {
        return Err(Error::InvalidArgument(
            "the pseudoinverse prior needs a connected graph".into(),
        ));
    }
    let m = spectrum.dim();
    let mut rng = stream_rng(seed, Stream::DesignMatrix);
    let mut z = standard_normal_matrix(&mut rng, m.saturating_sub(1), k);
    for (i, mut row) in z.row_iter_mut().enumerate() {
        row /= spectrum.eigenvalues()[i + 1].sqrt();
    }
    let basis = spectrum.eigenvectors().columns(1, m.saturating_sub(1));
    Ok(basis * z)
}

/// `m x k` matrix of i.i.d. `N(0, variance)` entries, with no graph structure.
pub fn sample_iid_design_matrix(m: usize, k: usize, variance: f64, seed: u64) -> Result<DMatrix<f64>> {
    if !(variance >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "variance must be nonnegative, got {variance}"
        )));
    }
    let mut rng = stream_rng(seed, Stream::DesignMatrix);
    Ok(standard_normal_matrix(&mut rng, m, k) * variance.sqrt())
}

/// `k x n` coefficients with i.i.d. `N(0, Sigma)` columns via the Cholesky factor.
pub fn sample_coefficients(sigma_cov: &DMatrix<f64>, k: usize, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    check_dims("sample_coefficients Sigma", (k, k), sigma_cov.shape())?;
    if n < k {
        return Err(Error::InvalidArgument(format!("need n >= k, got n = {n}, k = {k}")));
    }
    let chol = sigma_cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("Sigma is not positive definite".into()))?;
    let mut rng = stream_rng(seed, Stream::Coefficients);
    let z = standard_normal_matrix(&mut rng, k, n);
    Ok(chol.l() * z)
}

/// Draws `Omega` with i.i.d. `N(0, sigma^2)` entries and returns `(Y, Omega)`
/// with `Y = Theta X + Omega`.
pub fn synthesize_observations(
    theta_star: &DMatrix<f64>,
    x: &DMatrix<f64>,
    sigma: f64,
    seed: u64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_dims("synthesize_observations X", (theta_star.ncols(), x.ncols()), x.shape())?;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sigma must be finite and nonnegative, got {sigma}"
        )));
    }
    let mut rng = stream_rng(seed, Stream::Noise);
    let omega = standard_normal_matrix(&mut rng, theta_star.nrows(), x.ncols()) * sigma;
    let y = theta_star * x + &omega;
    Ok((y, omega))
}

/// One draw of the generative model together with its generating parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInstance {
    pub theta_star: DMatrix<f64>,
    pub x: DMatrix<f64>,
    pub omega: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub sigma: f64,
    pub sigma_cov: DMatrix<f64>,
    pub seed: u64,
}

impl ModelInstance {
    /// Full generation from a spectrum: design matrix, coefficients and noise
    /// each from their own stream of `seed`.
    pub fn generate(
        spectrum: &LaplacianSpectrum,
        k: usize,
        n: usize,
        sigma: f64,
        sigma_cov: &DMatrix<f64>,
        seed: u64,
    ) -> Result<Self> {
        let theta_star = sample_design_matrix(spectrum, k, seed)?;
        Self::from_truth(theta_star, n, sigma, sigma_cov, seed)
    }

    /// Generates `X`, `Omega`, `Y` around a given ground truth.
    pub fn from_truth(
        theta_star: DMatrix<f64>,
        n: usize,
        sigma: f64,
        sigma_cov: &DMatrix<f64>,
        seed: u64,
    ) -> Result<Self> {
        let x = sample_coefficients(sigma_cov, theta_star.ncols(), n, seed)?;
        let (y, omega) = synthesize_observations(&theta_star, &x, sigma, seed)?;
        Ok(ModelInstance {
            theta_star,
            x,
            omega,
            y,
            sigma,
            sigma_cov: sigma_cov.clone(),
            seed,
        })
    }

    pub fn m(&self) -> usize {
        self.theta_star.nrows()
    }

    pub fn k(&self) -> usize {
        self.theta_star.ncols()
    }

    pub fn n(&self) -> usize {
        self.x.ncols()
    }

    /// Writes `theta_star.csv`, `x.csv`, `omega.csv`, `y.csv` and `manifest.txt`.
    pub fn dump(&self, dir: &Path, bandwidth: f64, threshold: f64) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_matrix_csv(&dir.join("theta_star.csv"), &self.theta_star)?;
        write_matrix_csv(&dir.join("x.csv"), &self.x)?;
        write_matrix_csv(&dir.join("omega.csv"), &self.omega)?;
        write_matrix_csv(&dir.join("y.csv"), &self.y)?;
        let mut manifest = Manifest::new();
        manifest
            .push("m", self.m())
            .push("k", self.k())
            .push("n", self.n())
            .push_f64("sigma", self.sigma)
            .push_f64("bandwidth", bandwidth)
            .push_f64("threshold", threshold)
            .push("seed", self.seed);
        manifest.write(&dir.join("manifest.txt"))
    }
}
