//! Laplacian-regularized and ridge estimators of the design matrix.
//!
//! The estimator minimizes
//!
//! ```text
//! f(Theta) = 1/(2n) ||Y - Theta X||_F^2 + alpha tr(Theta^T L Theta)
//! ```
//!
//! whose stationarity condition is the Sylvester equation
//! `2 alpha L Theta + Theta G = C` with `G = X X^T / n` and `C = Y X^T / n`.
//! Both `L` and `G` are symmetric, so with `L = Q Lambda Q^T` and
//! `G = P M P^T` the system decouples entrywise in the rotated basis:
//! `U_ij = (Q^T C P)_ij / (2 alpha lambda_i + mu_j)` and `Theta = Q U P^T`.
//! This is what Bartels-Stewart reduces to when both Schur forms are diagonal.

use nalgebra::DMatrix;

use crate::error::{check_dims, Error, Result};
use crate::graph::LaplacianSpectrum;
use crate::linalg::{frobenius_inner, symmetric_eigen, SymmetricEigen};

/// Relative guard on the decoupled divisors `2 alpha lambda_i + mu_j`.
pub const DIVISOR_REL_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    Laplacian,
    Ridge,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 2] = [EstimatorKind::Laplacian, EstimatorKind::Ridge];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Laplacian => "laplacian",
            EstimatorKind::Ridge => "ridge",
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laplacian" => Ok(EstimatorKind::Laplacian),
            "ridge" => Ok(EstimatorKind::Ridge),
            other => Err(Error::InvalidArgument(format!("unknown estimator kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub alpha: f64,
    pub kind: EstimatorKind,
}

impl EstimatorConfig {
    pub fn new(alpha: f64, kind: EstimatorKind) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        Ok(EstimatorConfig { alpha, kind })
    }
}

#[derive(Debug, Clone)]
pub struct EstimateResult {
    pub theta_hat: DMatrix<f64>,
    pub config: EstimatorConfig,
    /// `||2 alpha L Theta + Theta G - C||_F`, with `L = I` for ridge.
    pub stationarity_residual: f64,
    pub objective_value: f64,
}

fn check_data(y: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<()> {
    if x.ncols() == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    check_dims("Y versus X", (y.nrows(), x.ncols()), y.shape())
}

fn check_theta(theta: &DMatrix<f64>, y: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<()> {
    check_data(y, x)?;
    check_dims("Theta", (y.nrows(), x.nrows()), theta.shape())
}

/// `1/(2n) ||Y - Theta X||_F^2`.
pub fn loss(theta: &DMatrix<f64>, y: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<f64> {
    check_theta(theta, y, x)?;
    let resid = y - theta * x;
    Ok(resid.norm_squared() / (2.0 * x.ncols() as f64))
}

/// `1/(2n) ||Y - Theta X||_F^2 + alpha tr(Theta^T L Theta)`.
pub fn objective(
    theta: &DMatrix<f64>,
    y: &DMatrix<f64>,
    x: &DMatrix<f64>,
    penalty: &LaplacianSpectrum,
    alpha: f64,
) -> Result<f64> {
    let data = loss(theta, y, x)?;
    Ok(data + alpha * penalty.quadratic_form(theta)?)
}

/// `(1/n) (Theta X - Y) X^T`, the gradient of the data-fit loss.
pub fn gradient_loss(theta: &DMatrix<f64>, y: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_theta(theta, y, x)?;
    Ok((theta * x - y) * x.transpose() / x.ncols() as f64)
}

/// First-order Taylor remainder of the loss at `theta_star` in direction
/// `delta`, in closed form `1/(2n) ||Delta X||_F^2`. It does not depend on
/// `theta_star` or `Y`.
pub fn taylor_remainder(theta_star: &DMatrix<f64>, delta: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<f64> {
    check_dims("taylor_remainder Delta", theta_star.shape(), delta.shape())?;
    check_dims("taylor_remainder X", (delta.ncols(), x.ncols()), x.shape())?;
    Ok((delta * x).norm_squared() / (2.0 * x.ncols() as f64))
}

/// The same remainder from its definition,
/// `L(Theta* + Delta) - L(Theta*) - <grad L(Theta*), Delta>`.
pub fn taylor_remainder_by_definition(
    theta_star: &DMatrix<f64>,
    delta: &DMatrix<f64>,
    y: &DMatrix<f64>,
    x: &DMatrix<f64>,
) -> Result<f64> {
    check_dims("taylor_remainder Delta", theta_star.shape(), delta.shape())?;
    let moved = theta_star + delta;
    let grad = gradient_loss(theta_star, y, x)?;
    Ok(loss(&moved, y, x)? - loss(theta_star, y, x)? - frobenius_inner(&grad, delta))
}

/// `||2 alpha L Theta + Theta G - C||_F`.
pub fn stationarity_residual(
    theta: &DMatrix<f64>,
    y: &DMatrix<f64>,
    x: &DMatrix<f64>,
    penalty: &LaplacianSpectrum,
    alpha: f64,
) -> Result<f64> {
    check_theta(theta, y, x)?;
    let n = x.ncols() as f64;
    let gram = x * x.transpose() / n;
    let cross = y * x.transpose() / n;
    let r = penalty.matrix() * theta * (2.0 * alpha) + theta * gram - cross;
    Ok(r.norm())
}

/// Sufficient statistics of one data set, with the eigendecomposition of
/// `G = X X^T / n` and the rotated right-hand side cached so a sweep over
/// `alpha` costs two small products per value.
#[derive(Debug, Clone)]
pub struct PreparedProblem<'a> {
    y: &'a DMatrix<f64>,
    x: &'a DMatrix<f64>,
    penalty: &'a LaplacianSpectrum,
    gram_eigen: SymmetricEigen,
    rotated_rhs: DMatrix<f64>,
}

impl<'a> PreparedProblem<'a> {
    pub fn new(y: &'a DMatrix<f64>, x: &'a DMatrix<f64>, penalty: &'a LaplacianSpectrum) -> Result<Self> {
        check_data(y, x)?;
        if penalty.dim() != y.nrows() {
            return Err(Error::DimensionMismatch {
                context: "penalty versus Y",
                expected: format!("{} rows", y.nrows()),
                actual: format!("{} rows", penalty.dim()),
            });
        }
        let n = x.ncols() as f64;
        let gram = x * x.transpose() / n;
        let cross = y * x.transpose() / n;
        let gram_eigen = symmetric_eigen(&gram)?;
        let rotated_rhs = penalty.eigenvectors().transpose() * cross * &gram_eigen.eigenvectors;
        Ok(PreparedProblem {
            y,
            x,
            penalty,
            gram_eigen,
            rotated_rhs,
        })
    }

    /// Eigenvalues of `X X^T / n`, ascending.
    pub fn gram_eigenvalues(&self) -> &[f64] {
        self.gram_eigen.eigenvalues.as_slice()
    }

    /// Solves the Sylvester system for one `alpha` and labels the result `kind`.
    pub fn solve(&self, alpha: f64, kind: EstimatorKind) -> Result<EstimateResult> {
        let config = EstimatorConfig::new(alpha, kind)?;
        let lambdas = self.penalty.eigenvalues();
        let mus = &self.gram_eigen.eigenvalues;
        let mu_max = mus.iter().copied().fold(0.0, f64::max);
        let guard = DIVISOR_REL_GUARD * (2.0 * alpha * self.penalty.max_eigenvalue() + mu_max);

        let mut u = self.rotated_rhs.clone();
        for j in 0..u.ncols() {
            for i in 0..u.nrows() {
                let divisor = 2.0 * alpha * lambdas[i] + mus[j];
                if !(divisor > guard) {
                    return Err(Error::Singular {
                        row: i,
                        col: j,
                        divisor,
                        guard,
                    });
                }
                u[(i, j)] /= divisor;
            }
        }
        let theta_hat = self.penalty.eigenvectors() * u * self.gram_eigen.eigenvectors.transpose();
        finish(theta_hat, config, self.y, self.x, self.penalty)
    }
}

fn finish(
    theta_hat: DMatrix<f64>,
    config: EstimatorConfig,
    y: &DMatrix<f64>,
    x: &DMatrix<f64>,
    penalty: &LaplacianSpectrum,
) -> Result<EstimateResult> {
    let stationarity_residual = stationarity_residual(&theta_hat, y, x, penalty, config.alpha)?;
    let objective_value = objective(&theta_hat, y, x, penalty, config.alpha)?;
    Ok(EstimateResult {
        theta_hat,
        config,
        stationarity_residual,
        objective_value,
    })
}

/// Laplacian-regularized estimate by the decoupled spectral Sylvester solve.
pub fn solve_laplacian_regularized(
    y: &DMatrix<f64>,
    x: &DMatrix<f64>,
    spectrum: &LaplacianSpectrum,
    alpha: f64,
) -> Result<EstimateResult> {
    PreparedProblem::new(y, x, spectrum)?.solve(alpha, EstimatorKind::Laplacian)
}

/// Ridge estimate `C (G + 2 alpha I)^{-1}`, one `k x k` Cholesky solve.
pub fn solve_ridge(y: &DMatrix<f64>, x: &DMatrix<f64>, alpha: f64) -> Result<EstimateResult> {
    check_data(y, x)?;
    let config = EstimatorConfig::new(alpha, EstimatorKind::Ridge)?;
    let n = x.ncols() as f64;
    let k = x.nrows();
    let gram = x * x.transpose() / n;
    let cross = y * x.transpose() / n;

    let eig = symmetric_eigen(&gram)?;
    let mu_max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let guard = DIVISOR_REL_GUARD * (2.0 * alpha + mu_max);
    if let Some((j, &mu)) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .find(|(_, &mu)| !(2.0 * alpha + mu > guard))
    {
        return Err(Error::Singular {
            row: 0,
            col: j,
            divisor: 2.0 * alpha + mu,
            guard,
        });
    }

    let system = gram + DMatrix::identity(k, k) * (2.0 * alpha);
    let chol = system.cholesky().ok_or(Error::Singular {
        row: 0,
        col: 0,
        divisor: 0.0,
        guard,
    })?;
    // Theta A = C  <=>  A Theta^T = C^T for symmetric A.
    let theta_hat = chol.solve(&cross.transpose()).transpose();
    let identity = LaplacianSpectrum::identity(y.nrows());
    finish(theta_hat, config, y, x, &identity)
}

/// Armijo constant for the oracle line search.
pub const ARMIJO_C: f64 = 1e-4;
/// Step shrink factor on each failed Armijo test.
pub const BACKTRACK: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub result: EstimateResult,
    pub iterations: usize,
    /// Objective after each accepted step, starting with the initial point.
    pub objectives: Vec<f64>,
}

/// Gradient descent with backtracking on the full objective, from
/// `Theta = 0`, until the full gradient's Frobenius norm is `<= tol`.
///
/// Used only to cross-check the spectral solve. The Armijo test uses the
/// exact objective decrease of a quadratic along the search direction,
/// `t ||g||^2 - t^2/2 h(g)`, which stays accurate when the decrease is far
/// below the rounding level of the objective itself.
pub fn oracle_gradient_descent(
    y: &DMatrix<f64>,
    x: &DMatrix<f64>,
    penalty: &LaplacianSpectrum,
    alpha: f64,
    tol: f64,
    max_iter: usize,
) -> Result<OracleRun> {
    check_data(y, x)?;
    let config = EstimatorConfig::new(alpha, EstimatorKind::Laplacian)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let n = x.ncols() as f64;
    let gram = x * x.transpose() / n;
    let cross = y * x.transpose() / n;
    let l = penalty.matrix();

    let gram_top = symmetric_eigen(&gram)?.eigenvalues.iter().copied().fold(0.0, f64::max);
    let lipschitz = gram_top + 2.0 * alpha * penalty.max_eigenvalue();
    if !(lipschitz > 0.0) {
        return Err(Error::InvalidArgument("objective has zero curvature".into()));
    }
    let initial_step = 1.0 / lipschitz;

    let full_gradient = |theta: &DMatrix<f64>| theta * &gram - &cross + l * theta * (2.0 * alpha);
    // Curvature of the objective along direction d: <d, d G + 2 alpha L d>.
    let curvature = |d: &DMatrix<f64>| frobenius_inner(d, &(d * &gram + l * d * (2.0 * alpha)));

    let mut theta = DMatrix::zeros(y.nrows(), x.nrows());
    let mut objectives = vec![objective(&theta, y, x, penalty, alpha)?];
    let mut iterations = 0;
    loop {
        let g = full_gradient(&theta);
        let gnorm2 = g.norm_squared();
        if gnorm2.sqrt() <= tol {
            break;
        }
        if iterations == max_iter {
            return Err(Error::NonConvergence {
                iterations,
                grad_norm: gnorm2.sqrt(),
            });
        }
        let h = curvature(&g);
        let mut step = initial_step;
        loop {
            let decrease = step * gnorm2 - 0.5 * step * step * h;
            if decrease >= ARMIJO_C * step * gnorm2 {
                break;
            }
            step *= BACKTRACK;
            if step < f64::MIN_POSITIVE {
                return Err(Error::NonConvergence {
                    iterations,
                    grad_norm: gnorm2.sqrt(),
                });
            }
        }
        theta -= &g * step;
        objectives.push(objective(&theta, y, x, penalty, alpha)?);
        iterations += 1;
    }
    let result = finish(theta, config, y, x, penalty)?;
    Ok(OracleRun {
        result,
        iterations,
        objectives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_geometric_graph, laplacian, Graph, DEFAULT_ZERO_TOL};
    use crate::synth::ModelInstance;

    fn instance(m: usize, k: usize, n: usize, sigma: f64, seed: u64) -> (LaplacianSpectrum, ModelInstance) {
        let s = laplacian(&generate_geometric_graph(m, 0.5, 0.0, seed).unwrap(), DEFAULT_ZERO_TOL).unwrap();
        let inst = ModelInstance::generate(&s, k, n, sigma, &DMatrix::identity(k, k), seed).unwrap();
        (s, inst)
    }

    fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn alpha_zero_is_least_squares() {
        let (s, inst) = instance(8, 3, 30, 1.0, 1);
        let est = solve_laplacian_regularized(&inst.y, &inst.x, &s, 0.0).unwrap();
        let xxt = &inst.x * inst.x.transpose();
        let ls = &inst.y * inst.x.transpose() * xxt.try_inverse().unwrap();
        assert!(rel(&est.theta_hat, &ls) < 1e-10);
        let g = gradient_loss(&est.theta_hat, &inst.y, &inst.x).unwrap();
        assert!(g.norm() < 1e-10);
    }

    #[test]
    fn empty_graph_penalty_vanishes() {
        let (_, inst) = instance(6, 2, 20, 1.0, 2);
        let empty = laplacian(&Graph::from_weights(DMatrix::zeros(6, 6)).unwrap(), DEFAULT_ZERO_TOL).unwrap();
        let a = solve_laplacian_regularized(&inst.y, &inst.x, &empty, 3.0).unwrap();
        let b = solve_laplacian_regularized(&inst.y, &inst.x, &empty, 0.0).unwrap();
        assert!(rel(&a.theta_hat, &b.theta_hat) < 1e-12);
    }

    #[test]
    fn rank_deficient_unregularized_is_singular() {
        let x = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 3.0, 4.0, 2.0, 4.0, 6.0, 8.0]);
        let y = DMatrix::from_row_slice(1, 4, &[1.0, 0.0, 1.0, 0.0]);
        let one = LaplacianSpectrum::identity(1);
        let err = solve_laplacian_regularized(&y, &x, &one, 0.0).unwrap_err();
        assert!(matches!(err, Error::Singular { row: 0, col: 0, .. }), "{err}");
        assert!(matches!(solve_ridge(&y, &x, 0.0), Err(Error::Singular { .. })));
        assert!(solve_ridge(&y, &x, 0.1).is_ok());
    }

    #[test]
    fn ridge_matches_identity_penalty() {
        for seed in 0..5 {
            let (_, inst) = instance(7, 3, 25, 2.0, seed);
            let eye = LaplacianSpectrum::identity(7);
            for alpha in [0.0, 0.01, 1.0] {
                let r = solve_ridge(&inst.y, &inst.x, alpha).unwrap();
                let l = solve_laplacian_regularized(&inst.y, &inst.x, &eye, alpha).unwrap();
                assert!(rel(&r.theta_hat, &l.theta_hat) < 1e-10);
            }
        }
    }

    #[test]
    fn scalar_ridge() {
        let x = DMatrix::from_row_slice(1, 10, &[0.3, -1.2, 0.8, 2.0, -0.5, 1.1, 0.0, -0.7, 1.5, 0.4]);
        let y = DMatrix::from_fn(1, 10, |_, j| 2.0 * x[(0, j)] + if j % 2 == 0 { 0.1 } else { -0.2 });
        let alpha = 0.3;
        let n = 10.0;
        let sxy: f64 = (0..10).map(|j| x[(0, j)] * y[(0, j)]).sum::<f64>() / n;
        let sxx: f64 = (0..10).map(|j| x[(0, j)] * x[(0, j)]).sum::<f64>() / n;
        let expected = sxy / (sxx + 2.0 * alpha);
        let got = solve_ridge(&y, &x, alpha).unwrap().theta_hat[(0, 0)];
        assert!((got - expected).abs() < 1e-14 * expected.abs());

        let run = oracle_gradient_descent(&y, &x, &LaplacianSpectrum::identity(1), alpha, 1e-13, 10_000).unwrap();
        assert!((run.result.theta_hat[(0, 0)] - expected).abs() < 1e-12);
    }

    #[test]
    fn objective_examples() {
        let (s, inst) = instance(6, 2, 20, 0.0, 3);
        assert!(objective(&inst.theta_star, &inst.y, &inst.x, &s, 0.0).unwrap() < 1e-28);
        let t = DMatrix::from_element(6, 2, 0.3);
        let plain = loss(&t, &inst.y, &inst.x).unwrap();
        assert_eq!(objective(&t, &inst.y, &inst.x, &s, 0.0).unwrap(), plain);
    }

    #[test]
    fn gradient_at_truth_is_noise_correlation() {
        let (_, inst) = instance(5, 2, 30, 1.5, 4);
        let g = gradient_loss(&inst.theta_star, &inst.y, &inst.x).unwrap();
        // With Omega = Y - Theta* X the gradient is -(1/n) Omega X^T; the
        // sign convention `Omega = Theta* X - Y` gives +(1/n) Omega X^T.
        let expected = -(&inst.omega * inst.x.transpose()) / 30.0;
        assert!(rel(&g, &expected) < 1e-12);
    }

    #[test]
    fn taylor_zero_direction() {
        let (_, inst) = instance(5, 2, 10, 1.0, 5);
        let zero = DMatrix::zeros(5, 2);
        assert_eq!(taylor_remainder(&inst.theta_star, &zero, &inst.x).unwrap(), 0.0);
    }

    #[test]
    fn oracle_objective_nonincreasing() {
        let (s, inst) = instance(6, 2, 40, 1.0, 6);
        let run = oracle_gradient_descent(&inst.y, &inst.x, &s, 0.1, 1e-10, 100_000).unwrap();
        for w in run.objectives.windows(2) {
            assert!(w[1] <= w[0] + 1e-13 * w[0].abs(), "{} -> {}", w[0], w[1]);
        }
        let spectral = solve_laplacian_regularized(&inst.y, &inst.x, &s, 0.1).unwrap();
        assert!(rel(&run.result.theta_hat, &spectral.theta_hat) < 1e-6);
    }

    #[test]
    fn oracle_reports_non_convergence() {
        let (s, inst) = instance(6, 2, 40, 1.0, 7);
        let err = oracle_gradient_descent(&inst.y, &inst.x, &s, 0.1, 1e-14, 3).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 3, .. }));
    }

    #[test]
    fn dimension_errors() {
        let y = DMatrix::zeros(3, 5);
        let x = DMatrix::zeros(2, 4);
        assert!(matches!(solve_ridge(&y, &x, 1.0), Err(Error::DimensionMismatch { .. })));
        assert!(gradient_loss(&DMatrix::zeros(3, 3), &y, &DMatrix::zeros(2, 5)).is_err());
        assert!(EstimatorConfig::new(-1.0, EstimatorKind::Ridge).is_err());
    }
}
