//! Non-asymptotic error bounds for the Laplacian-regularized estimator and
//! empirical diagnostics for the conditions they rest on.
//!
//! The main bound reads
//!
//! ```text
//! ||Theta_hat - Theta*||_F <= alpha (sqrt(r) + 2 ||L Theta*||_F) / (kappa + alpha lambda_2)
//! ```
//!
//! for `alpha >= 8 sigma sqrt(D) sqrt(m + k) / (m n)`, a strong-convexity
//! constant `kappa`, and `rank(Delta) <= r`. With `L = I_m` it becomes the
//! ridge bound `alpha (sqrt(r) + 2 ||Theta*||_F) / (kappa + alpha)`.

use nalgebra::DMatrix;

use crate::error::{check_dims, Error, Result};
use crate::graph::LaplacianSpectrum;
use crate::linalg::{max_abs, symmetric_eigen};
use crate::solver::EstimateResult;
use crate::synth::ModelInstance;

/// Smallest admissible Lemma-2 constant.
pub const DEFAULT_D: f64 = 2.0;

/// Curvature floor used by the strong-convexity constant: `kappa = sigma_min(Sigma) / 18`.
pub const KAPPA_DIVISOR: f64 = 18.0;

/// Spectral band of the sample covariance that holds with high probability.
pub const LEMMA3_FACTOR: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundIngredients {
    pub alpha: f64,
    pub r: usize,
    /// `||L Theta*||_F`.
    pub smoothness_misalignment: f64,
    pub kappa: f64,
    pub lambda2: f64,
    pub bound_value: f64,
}

impl BoundIngredients {
    pub fn evaluate(alpha: f64, r: usize, smoothness_misalignment: f64, kappa: f64, lambda2: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidArgument(format!("kappa must be positive, got {kappa}")));
        }
        if !(alpha >= 0.0) {
            return Err(Error::InvalidArgument(format!("alpha must be >= 0, got {alpha}")));
        }
        if r == 0 {
            return Err(Error::InvalidArgument("rank budget r must be >= 1".into()));
        }
        let bound_value = alpha * ((r as f64).sqrt() + 2.0 * smoothness_misalignment) / (kappa + alpha * lambda2);
        Ok(BoundIngredients {
            alpha,
            r,
            smoothness_misalignment,
            kappa,
            lambda2,
            bound_value,
        })
    }
}

/// Evaluates the Laplacian bound from a spectrum and ground truth.
/// Refuses disconnected graphs, where `lambda_2 = 0`.
pub fn theorem1_bound(
    alpha: f64,
    r: usize,
    spectrum: &LaplacianSpectrum,
    theta_star: &DMatrix<f64>,
    kappa: f64,
) -> Result<BoundIngredients> {
    if theta_star.nrows() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            context: "theorem1_bound Theta*",
            expected: format!("{} rows", spectrum.dim()),
            actual: format!("{} rows", theta_star.nrows()),
        });
    }
    if !spectrum.is_connected() {
        return Err(Error::InvalidArgument(
            "error bound requires a connected graph (lambda_2 > 0)".into(),
        ));
    }
    let lambda2 = spectrum.fiedler_value()?;
    let misalignment = (spectrum.matrix() * theta_star).norm();
    BoundIngredients::evaluate(alpha, r, misalignment, kappa, lambda2)
}

/// Ridge bound `alpha (sqrt(r) + 2 ||Theta*||_F) / (kappa + alpha)`.
pub fn corollary1_bound(alpha: f64, r: usize, theta_star: &DMatrix<f64>, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidArgument(format!("kappa must be positive, got {kappa}")));
    }
    Ok(alpha * ((r as f64).sqrt() + 2.0 * theta_star.norm()) / (kappa + alpha))
}

/// `8 sigma sqrt(D) sqrt(m + k) / (m n)`, the smallest `alpha` the bound admits.
pub fn recommended_alpha(sigma: f64, d: f64, m: usize, k: usize, n: usize) -> Result<f64> {
    if !(d >= 2.0) {
        return Err(Error::InvalidArgument(format!("D must be >= 2, got {d}")));
    }
    if m == 0 || k == 0 || n == 0 {
        return Err(Error::InvalidArgument("dimensions must be >= 1".into()));
    }
    Ok(8.0 * sigma * d.sqrt() * ((m + k) as f64).sqrt() / (m as f64 * n as f64))
}

fn spd_extremes(sigma_cov: &DMatrix<f64>) -> Result<(f64, f64)> {
    if !sigma_cov.is_square() || sigma_cov.nrows() == 0 {
        return Err(Error::InvalidArgument("Sigma must be a nonempty square matrix".into()));
    }
    if (sigma_cov - sigma_cov.transpose()).norm() > 1e-12 * sigma_cov.norm() {
        return Err(Error::InvalidArgument("Sigma is not symmetric".into()));
    }
    let eig = symmetric_eigen(sigma_cov)?;
    let lo = eig.eigenvalues[0];
    let hi = eig.eigenvalues[eig.eigenvalues.len() - 1];
    if !(lo > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Sigma is not positive definite (smallest eigenvalue {lo:e})"
        )));
    }
    Ok((lo, hi))
}

/// `sigma_min(Sigma) / 18`.
pub fn kappa_from_sigma(sigma_cov: &DMatrix<f64>) -> Result<f64> {
    Ok(spd_extremes(sigma_cov)?.0 / KAPPA_DIVISOR)
}

/// `sum_j sum_i lambda_i u_ij^2` with `u = Q^T Delta`: the quadratic form
/// evaluated in the eigenbasis.
pub fn spectral_quadratic_form(spectrum: &LaplacianSpectrum, delta: &DMatrix<f64>) -> Result<f64> {
    if delta.nrows() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            context: "spectral_quadratic_form",
            expected: format!("{} rows", spectrum.dim()),
            actual: format!("{} rows", delta.nrows()),
        });
    }
    let u = spectrum.eigenvectors().transpose() * delta;
    let lambdas = spectrum.eigenvalues();
    Ok(u.row_iter()
        .enumerate()
        .map(|(i, row)| lambdas[i] * row.norm_squared())
        .sum())
}

/// `[sum_j (1/m)(sum_i Delta_ij)^2] / ||Delta||_F^2`, zero when `Delta = 0`.
pub fn assumption1_ratio(delta: &DMatrix<f64>) -> f64 {
    let total = delta.norm_squared();
    if total == 0.0 {
        return 0.0;
    }
    let m = delta.nrows() as f64;
    let constant_mass: f64 = delta.column_iter().map(|c| c.sum().powi(2) / m).sum();
    constant_mass / total
}

/// Both sides of each lemma evaluated on realized quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaReport {
    /// `tr(Delta^T L Delta)`.
    pub lemma1_lhs: f64,
    /// `lambda_2 ||Delta||_F^2 - lambda_2 ||Q_1^T Delta||_2^2`, unconditional.
    pub lemma1_exact_rhs: f64,
    /// `lambda_2 ||Delta||_F^2`, valid when the constant-mode term is negligible.
    pub lemma1_approx_rhs: f64,
    pub assumption1_ratio: f64,
    /// `(1/n) ||Omega X^T||_inf` (entrywise max).
    pub lemma2_lhs: f64,
    /// `(1/n) ||Omega X^T||_2` (operator norm), an alternative reading.
    pub lemma2_lhs_operator: f64,
    /// `8 sigma sqrt(D) sqrt(m + k) / (m n)`.
    pub lemma2_rhs: f64,
    /// `sigma_min(X X^T / n)`.
    pub lemma3_min: f64,
    /// `sigma_max(X X^T / n)`.
    pub lemma3_max: f64,
    pub lemma3_event: bool,
}

impl LemmaReport {
    /// Relative slack used when judging the lemma inequalities numerically.
    pub const SLACK: f64 = 1e-9;

    pub fn lemma1_exact_holds(&self) -> bool {
        self.lemma1_lhs >= self.lemma1_exact_rhs - Self::SLACK * (1.0 + self.lemma1_lhs.abs())
    }

    pub fn lemma1_approx_holds(&self) -> bool {
        self.lemma1_lhs >= self.lemma1_approx_rhs - Self::SLACK * (1.0 + self.lemma1_lhs.abs())
    }

    pub fn lemma2_holds(&self) -> bool {
        self.lemma2_lhs <= self.lemma2_rhs
    }

    /// `sigma_min(X X^T) / (2n)`, the curvature the realized data provides.
    pub fn realized_kappa(&self) -> f64 {
        self.lemma3_min / 2.0
    }
}

/// Lemma 1 sides for a direction `Delta` on a connected graph.
pub fn lemma1_sides(spectrum: &LaplacianSpectrum, delta: &DMatrix<f64>) -> Result<(f64, f64, f64)> {
    if !spectrum.is_connected() {
        return Err(Error::InvalidArgument("Lemma 1 requires a connected graph".into()));
    }
    let lhs = spectrum.quadratic_form(delta)?;
    let lambda2 = spectrum.fiedler_value()?;
    let q1 = spectrum.eigenvectors().column(0);
    let constant_mode: f64 = delta.column_iter().map(|c| q1.dot(&c).powi(2)).sum();
    let fro2 = delta.norm_squared();
    Ok((lhs, lambda2 * fro2 - lambda2 * constant_mode, lambda2 * fro2))
}

#[allow(clippy::too_many_arguments)]
pub fn lemma_diagnostics(
    delta: &DMatrix<f64>,
    spectrum: &LaplacianSpectrum,
    omega: &DMatrix<f64>,
    x: &DMatrix<f64>,
    sigma: f64,
    d: f64,
    sigma_cov: &DMatrix<f64>,
) -> Result<LemmaReport> {
    let (m, k, n) = (delta.nrows(), delta.ncols(), x.ncols());
    check_dims("lemma_diagnostics X", (k, n), x.shape())?;
    check_dims("lemma_diagnostics Omega", (m, n), omega.shape())?;
    check_dims("lemma_diagnostics Sigma", (k, k), sigma_cov.shape())?;

    let (lemma1_lhs, lemma1_exact_rhs, lemma1_approx_rhs) = lemma1_sides(spectrum, delta)?;

    let noise_corr = omega * x.transpose() / n as f64;
    let lemma2_lhs = max_abs(&noise_corr);
    let corr_gram = noise_corr.transpose() * &noise_corr;
    let lemma2_lhs_operator = symmetric_eigen(&corr_gram)?
        .eigenvalues
        .iter()
        .copied()
        .fold(0.0_f64, f64::max)
        .sqrt();
    let lemma2_rhs = recommended_alpha(sigma, d, m, k, n)?;

    let gram = x * x.transpose() / n as f64;
    let g = symmetric_eigen(&gram)?.eigenvalues;
    let (lemma3_min, lemma3_max) = (g[0], g[g.len() - 1]);
    let (s_min, s_max) = spd_extremes(sigma_cov)?;
    let lemma3_event = lemma3_min >= s_min / LEMMA3_FACTOR && lemma3_max <= LEMMA3_FACTOR * s_max;

    Ok(LemmaReport {
        lemma1_lhs,
        lemma1_exact_rhs,
        lemma1_approx_rhs,
        assumption1_ratio: assumption1_ratio(delta),
        lemma2_lhs,
        lemma2_lhs_operator,
        lemma2_rhs,
        lemma3_min,
        lemma3_max,
        lemma3_event,
    })
}

/// Realized error of one estimate next to its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundComparison {
    pub empirical_error: f64,
    pub bound_value: f64,
    /// `empirical_error / bound_value`; below 1 when the bound holds.
    pub ratio: f64,
    pub rank_budget: usize,
    pub alpha_meets_hypothesis: bool,
    pub lemmas: LemmaReport,
}

impl BoundComparison {
    pub fn bound_holds(&self) -> bool {
        self.empirical_error <= self.bound_value
    }
}

/// Compares `||Theta_hat - Theta*||_F` with a precomputed bound and fills the
/// lemma report for `Delta = Theta_hat - Theta*`.
pub fn empirical_vs_bound(
    instance: &ModelInstance,
    estimate: &EstimateResult,
    ingredients: &BoundIngredients,
    spectrum: &LaplacianSpectrum,
    d: f64,
) -> Result<BoundComparison> {
    check_dims(
        "empirical_vs_bound",
        instance.theta_star.shape(),
        estimate.theta_hat.shape(),
    )?;
    let delta = &estimate.theta_hat - &instance.theta_star;
    let empirical_error = delta.norm();
    let lemmas = lemma_diagnostics(
        &delta,
        spectrum,
        &instance.omega,
        &instance.x,
        instance.sigma,
        d,
        &instance.sigma_cov,
    )?;
    let threshold = recommended_alpha(instance.sigma, d, instance.m(), instance.k(), instance.n())?;
    Ok(BoundComparison {
        empirical_error,
        bound_value: ingredients.bound_value,
        ratio: empirical_error / ingredients.bound_value,
        rank_budget: instance.m().min(instance.k()),
        alpha_meets_hypothesis: estimate.config.alpha >= threshold,
        lemmas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_geometric_graph, laplacian, Graph, DEFAULT_ZERO_TOL};

    #[test]
    fn bound_arithmetic() {
        let b = BoundIngredients::evaluate(1.0, 1, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(b.bound_value, 0.5);
        assert!(BoundIngredients::evaluate(1.0, 0, 0.0, 1.0, 1.0).is_err());
        assert!(BoundIngredients::evaluate(1.0, 1, 0.0, 0.0, 1.0).is_err());
        assert_eq!(corollary1_bound(1.0, 1, &DMatrix::zeros(3, 2), 1.0).unwrap(), 0.5);
        assert_eq!(
            corollary1_bound(0.0, 4, &DMatrix::from_element(3, 2, 1.0), 0.1).unwrap(),
            0.0
        );
    }

    #[test]
    fn theorem_refuses_disconnected() {
        let s = laplacian(&Graph::from_weights(DMatrix::zeros(3, 3)).unwrap(), DEFAULT_ZERO_TOL).unwrap();
        let err = theorem1_bound(1.0, 1, &s, &DMatrix::zeros(3, 1), 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn identity_penalty_reduces_to_ridge_bound() {
        let theta = DMatrix::from_fn(5, 2, |i, j| (i as f64) - 0.7 * j as f64);
        let eye = LaplacianSpectrum::identity(5);
        let t = theorem1_bound(0.3, 2, &eye, &theta, 0.05).unwrap();
        let c = corollary1_bound(0.3, 2, &theta, 0.05).unwrap();
        assert!((t.bound_value - c).abs() <= 1e-12 * c);
    }

    #[test]
    fn recommended_alpha_values() {
        // 8 * sqrt(5) * sqrt(2) * sqrt(110) / 50000, evaluated independently.
        let expected = 8.0 * 5f64.sqrt() * 2f64.sqrt() * 110f64.sqrt() / 50_000.0;
        let got = recommended_alpha(5f64.sqrt(), 2.0, 100, 10, 500).unwrap();
        assert!((got - expected).abs() < 1e-18);
        assert!((got - 5.3066e-3).abs() < 1e-6);
        assert_eq!(recommended_alpha(0.0, 2.0, 100, 10, 500).unwrap(), 0.0);
        let half = recommended_alpha(1.0, 3.0, 20, 4, 1000).unwrap();
        let full = recommended_alpha(1.0, 3.0, 20, 4, 500).unwrap();
        assert!((2.0 * half - full).abs() < 1e-18);
        assert!(recommended_alpha(1.0, 1.9, 20, 4, 500).is_err());
    }

    #[test]
    fn kappa_examples() {
        assert!((kappa_from_sigma(&DMatrix::identity(10, 10)).unwrap() - 1.0 / 18.0).abs() < 1e-16);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0]));
        assert!((kappa_from_sigma(&d).unwrap() - 1.0 / 9.0).abs() < 1e-16);
        let c = DMatrix::identity(3, 3) * 4.5;
        assert!((kappa_from_sigma(&c).unwrap() - 0.25).abs() < 1e-16);
        assert!(kappa_from_sigma(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
        assert!(kappa_from_sigma(&DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])).is_err());
    }

    fn connected(m: usize, seed: u64) -> LaplacianSpectrum {
        laplacian(&generate_geometric_graph(m, 0.5, 0.0, seed).unwrap(), DEFAULT_ZERO_TOL).unwrap()
    }

    #[test]
    fn constant_direction_is_maximally_misaligned() {
        let s = connected(8, 1);
        let delta = DMatrix::from_element(8, 1, 1.0);
        let (lhs, exact, _) = lemma1_sides(&s, &delta).unwrap();
        assert!(lhs.abs() < 1e-12);
        assert!(exact.abs() < 1e-10);
        assert!((assumption1_ratio(&delta) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mean_zero_columns_make_both_forms_agree() {
        let s = connected(9, 2);
        let mut delta = DMatrix::from_fn(9, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.3);
        for mut c in delta.column_iter_mut() {
            let mean = c.mean();
            c.add_scalar_mut(-mean);
        }
        assert!(assumption1_ratio(&delta) < 1e-28);
        let (lhs, exact, approx) = lemma1_sides(&s, &delta).unwrap();
        assert!((exact - approx).abs() < 1e-10 * approx);
        assert!(lhs >= approx * (1.0 - 1e-12));
        assert_eq!(assumption1_ratio(&DMatrix::zeros(4, 2)), 0.0);
    }

    #[test]
    fn lemma_report_for_noise() {
        use crate::synth::ModelInstance;
        let s = connected(30, 3);
        let eye = DMatrix::identity(4, 4);
        let inst = ModelInstance::generate(&s, 4, 200, 1.0, &eye, 3).unwrap();
        let delta = DMatrix::from_fn(30, 4, |i, j| ((i + j) % 3) as f64 - 1.0);
        let rep = lemma_diagnostics(&delta, &s, &inst.omega, &inst.x, 1.0, 2.0, &eye).unwrap();
        assert!(rep.lemma1_exact_holds());
        assert!(rep.lemma3_event);
        assert!(rep.lemma2_lhs <= rep.lemma2_lhs_operator + 1e-15);
        let direct = (&inst.omega * inst.x.transpose() / 200.0).abs().max();
        assert_eq!(rep.lemma2_lhs, direct);
        assert!((rep.realized_kappa() - rep.lemma3_min / 2.0).abs() < 1e-16);
    }
}
