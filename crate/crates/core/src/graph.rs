//! Weighted undirected graphs, combinatorial Laplacians and their spectra.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{check_dims, Error, Result};
use crate::linalg::symmetric_eigen;
use crate::rng::{stream_rng, Stream};

pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

/// A weighted undirected graph on `m` vertices embedded in the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    coords: Vec<[f64; 2]>,
    weights: DMatrix<f64>,
}

impl Graph {
    /// Builds a graph after checking symmetry, zero diagonal and nonnegativity.
    pub fn new(coords: Vec<[f64; 2]>, weights: DMatrix<f64>) -> Result<Self> {
        let m = coords.len();
        check_dims("Graph::new weights", (m, m), weights.shape())?;
        for i in 0..m {
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidArgument(format!("nonzero diagonal weight at vertex {i}")));
            }
            for j in 0..m {
                let w = weights[(i, j)];
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "weight ({i}, {j}) = {w} is not a finite nonnegative number"
                    )));
                }
                if w != weights[(j, i)] {
                    return Err(Error::InvalidArgument(format!(
                        "weights are not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Graph { coords, weights })
    }

    /// Graph with all vertices at the origin; for hand-built topologies.
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        let m = weights.nrows();
        Graph::new(vec![[0.0, 0.0]; m], weights)
    }

    /// Path `0 - 1 - ... - (m-1)` with unit weights.
    pub fn path(m: usize) -> Self {
        let mut w = DMatrix::zeros(m, m);
        for i in 1..m {
            w[(i - 1, i)] = 1.0;
            w[(i, i - 1)] = 1.0;
        }
        Graph::from_weights(w).expect("path graph is valid")
    }

    /// Complete graph with unit weights.
    pub fn complete(m: usize) -> Self {
        let w = DMatrix::from_fn(m, m, |i, j| if i == j { 0.0 } else { 1.0 });
        Graph::from_weights(w).expect("complete graph is valid")
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Number of edges with positive weight.
    pub fn num_edges(&self) -> usize {
        let m = self.num_vertices();
        (0..m)
            .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
            .filter(|&(i, j)| self.weights[(i, j)] > 0.0)
            .count()
    }

    /// Breadth-first connectivity over edges with positive weight.
    pub fn is_connected(&self) -> bool {
        let m = self.num_vertices();
        if m <= 1 {
            return true;
        }
        let mut seen = vec![false; m];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut visited = 1;
        while let Some(i) = queue.pop_front() {
            for (j, flag) in seen.iter_mut().enumerate() {
                if !*flag && self.weights[(i, j)] > 0.0 {
                    *flag = true;
                    visited += 1;
                    queue.push_back(j);
                }
            }
        }
        visited == m
    }

    /// `1/2 sum_{i~j} W_ij sum_c (F_ic - F_jc)^2`, the edge-sum form of the
    /// Laplacian quadratic form.
    pub fn edge_quadratic_form(&self, signal: &DMatrix<f64>) -> Result<f64> {
        let m = self.num_vertices();
        if signal.nrows() != m {
            return Err(Error::DimensionMismatch {
                context: "edge_quadratic_form",
                expected: format!("{m} rows"),
                actual: format!("{} rows", signal.nrows()),
            });
        }
        let mut acc = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                let w = self.weights[(i, j)];
                if w == 0.0 {
                    continue;
                }
                let diff: f64 = (0..signal.ncols())
                    .map(|c| (signal[(i, c)] - signal[(j, c)]).powi(2))
                    .sum();
                acc += w * diff;
            }
        }
        Ok(acc)
    }

    /// Writes the plain-text edge list: `m <count>`, then `v <i> <x> <y>` per
    /// vertex, then `e <i> <j> <w>` per nonzero upper-triangular weight.
    pub fn to_edge_list(&self) -> String {
        let m = self.num_vertices();
        let mut out = String::new();
        writeln!(out, "m {m}").unwrap();
        for (i, [x, y]) in self.coords.iter().enumerate() {
            writeln!(out, "v {i} {} {}", fmt_f64(*x), fmt_f64(*y)).unwrap();
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let w = self.weights[(i, j)];
                if w != 0.0 {
                    writeln!(out, "e {i} {j} {}", fmt_f64(w)).unwrap();
                }
            }
        }
        out
    }

    pub fn from_edge_list(text: &str, source: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: source.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (first_no, first) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let m: usize = match first.split_whitespace().collect::<Vec<_>>()[..] {
            ["m", count] => count
                .parse()
                .map_err(|e| err(first_no + 1, format!("bad vertex count: {e}")))?,
            _ => return Err(err(first_no + 1, "expected header `m <count>`".into())),
        };
        let mut coords = vec![None; m];
        let mut weights = DMatrix::zeros(m, m);
        for (no, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let index = |s: &str| -> Result<usize> {
                let i: usize = s.parse().map_err(|e| err(no + 1, format!("bad index `{s}`: {e}")))?;
                if i >= m {
                    return Err(err(no + 1, format!("index {i} out of range for m = {m}")));
                }
                Ok(i)
            };
            let real =
                |s: &str| -> Result<f64> { s.parse().map_err(|e| err(no + 1, format!("bad number `{s}`: {e}"))) };
            match fields[..] {
                ["v", i, x, y] => coords[index(i)?] = Some([real(x)?, real(y)?]),
                ["e", i, j, w] => {
                    let (i, j, w) = (index(i)?, index(j)?, real(w)?);
                    if i == j {
                        return Err(err(no + 1, "self loop".into()));
                    }
                    weights[(i, j)] = w;
                    weights[(j, i)] = w;
                }
                _ => return Err(err(no + 1, format!("unrecognized line `{line}`"))),
            }
        }
        let coords = coords
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.ok_or_else(|| err(0, format!("missing coordinates for vertex {i}"))))
            .collect::<Result<Vec<_>>>()?;
        Graph::new(coords, weights)
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list()).map_err(|e| Error::io(path, e))
    }

    pub fn read_edge_list(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Graph::from_edge_list(&text, path)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Random geometric graph: `m` points uniform in `[0,1]^2`, Gaussian RBF
/// weights `exp(-d^2 / bandwidth^2)`, dropped to zero unless above `threshold`.
pub fn generate_geometric_graph(m: usize, bandwidth: f64, threshold: f64, seed: u64) -> Result<Graph> {
    if m == 0 {
        return Err(Error::InvalidArgument("graph needs at least one vertex".into()));
    }
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!(
            "threshold must lie in [0, 1), got {threshold}"
        )));
    }
    let mut rng = stream_rng(seed, Stream::GraphCoords);
    let coords: Vec<[f64; 2]> = (0..m).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    let bw2 = bandwidth * bandwidth;
    let weights = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            return 0.0;
        }
        let dx = coords[i][0] - coords[j][0];
        let dy = coords[i][1] - coords[j][1];
        let w = (-(dx * dx + dy * dy) / bw2).exp();
        if w > threshold {
            w
        } else {
            0.0
        }
    });
    Graph::new(coords, weights)
}

/// A symmetric positive semidefinite penalty matrix with its ascending
/// eigendecomposition. For a graph this is the combinatorial Laplacian
/// `D - W`; [`LaplacianSpectrum::identity`] gives the ridge penalty.
#[derive(Debug, Clone)]
pub struct LaplacianSpectrum {
    matrix: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    zero_tol: f64,
}

impl LaplacianSpectrum {
    /// Eigendecomposes an arbitrary symmetric PSD penalty matrix.
    pub fn from_symmetric(matrix: DMatrix<f64>, zero_tol: f64) -> Result<Self> {
        if !(zero_tol >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "zero_tol must be nonnegative, got {zero_tol}"
            )));
        }
        let eig = symmetric_eigen(&matrix)?;
        let mut eigenvalues = eig.eigenvalues;
        let top = eigenvalues.iter().copied().fold(0.0_f64, f64::max);
        let cutoff = zero_tol * top.max(1.0);
        for lam in eigenvalues.iter_mut() {
            if lam.abs() < cutoff {
                *lam = 0.0;
            }
        }
        Ok(LaplacianSpectrum {
            matrix,
            eigenvalues,
            eigenvectors: eig.eigenvectors,
            zero_tol,
        })
    }

    /// `L = I_m`, all eigenvalues 1, eigenvectors the standard basis.
    pub fn identity(m: usize) -> Self {
        LaplacianSpectrum {
            matrix: DMatrix::identity(m, m),
            eigenvalues: DVector::from_element(m, 1.0),
            eigenvectors: DMatrix::identity(m, m),
            zero_tol: DEFAULT_ZERO_TOL,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(0.0, f64::max)
    }

    /// True when at most one eigenvalue was clamped to zero, i.e. the
    /// underlying graph has a single component.
    pub fn is_connected(&self) -> bool {
        self.dim() < 2 || self.eigenvalues[1] > 0.0
    }

    /// Second smallest eigenvalue.
    pub fn fiedler_value(&self) -> Result<f64> {
        if self.dim() < 2 {
            return Err(Error::InvalidArgument(
                "the Fiedler value needs at least two vertices".into(),
            ));
        }
        Ok(self.eigenvalues[1])
    }

    /// `tr(F^T L F)`.
    pub fn quadratic_form(&self, signal: &DMatrix<f64>) -> Result<f64> {
        if signal.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "laplacian_quadratic_form",
                expected: format!("{} rows", self.dim()),
                actual: format!("{} rows", signal.nrows()),
            });
        }
        let lf = &self.matrix * signal;
        Ok(crate::linalg::frobenius_inner(signal, &lf))
    }
}

/// Combinatorial Laplacian `L = D - W` and its ascending eigendecomposition.
pub fn laplacian(graph: &Graph, zero_tol: f64) -> Result<LaplacianSpectrum> {
    let w = graph.weights();
    let m = graph.num_vertices();
    let degrees: Vec<f64> = (0..m).map(|i| w.row(i).sum()).collect();
    let l = DMatrix::from_fn(m, m, |i, j| if i == j { degrees[i] } else { -w[(i, j)] });
    LaplacianSpectrum::from_symmetric(l, zero_tol)
}

pub fn fiedler_value(spectrum: &LaplacianSpectrum) -> Result<f64> {
    spectrum.fiedler_value()
}

pub fn laplacian_quadratic_form(spectrum: &LaplacianSpectrum, signal: &DMatrix<f64>) -> Result<f64> {
    spectrum.quadratic_form(signal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_edge() -> Graph {
        Graph::from_weights(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
    }

    #[test]
    fn unit_edge_spectrum() {
        let s = laplacian(&unit_edge(), DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(s.matrix(), &DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        assert!(s.eigenvalues()[0].abs() < 1e-15);
        assert!((s.eigenvalues()[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn empty_graph_has_zero_spectrum() {
        let g = Graph::from_weights(DMatrix::zeros(3, 3)).unwrap();
        let s = laplacian(&g, DEFAULT_ZERO_TOL).unwrap();
        assert!(s.matrix().iter().all(|&x| x == 0.0));
        assert!(s.eigenvalues().iter().all(|&x| x == 0.0));
        assert!(!s.is_connected());
        assert!(!g.is_connected());
    }

    #[test]
    fn path3_spectrum() {
        let s = laplacian(&Graph::path(3), DEFAULT_ZERO_TOL).unwrap();
        for (got, want) in s.eigenvalues().iter().zip([0.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn fiedler_examples() {
        let k4 = laplacian(&Graph::complete(4), DEFAULT_ZERO_TOL).unwrap();
        assert!((k4.fiedler_value().unwrap() - 4.0).abs() < 1e-13);

        let mut w = DMatrix::zeros(4, 4);
        w[(0, 1)] = 1.0;
        w[(1, 0)] = 1.0;
        w[(2, 3)] = 2.0;
        w[(3, 2)] = 2.0;
        let two = laplacian(&Graph::from_weights(w).unwrap(), DEFAULT_ZERO_TOL).unwrap();
        assert!(two.fiedler_value().unwrap() < DEFAULT_ZERO_TOL);

        assert_eq!(LaplacianSpectrum::identity(5).fiedler_value().unwrap(), 1.0);

        let single = laplacian(&Graph::path(1), DEFAULT_ZERO_TOL).unwrap();
        assert!(matches!(single.fiedler_value(), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn quadratic_form_examples() {
        let s = laplacian(&unit_edge(), DEFAULT_ZERO_TOL).unwrap();
        let q = |v: [f64; 2]| s.quadratic_form(&DMatrix::from_column_slice(2, 1, &v)).unwrap();
        assert_eq!(q([1.0, 0.0]), 1.0);
        assert_eq!(q([1.0, -1.0]), 4.0);
        assert_eq!(q([3.0, 3.0]), 0.0);
        assert!(s.quadratic_form(&DMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn generated_graph_basics() {
        let g = generate_geometric_graph(1, 0.5, 0.0, 3).unwrap();
        assert_eq!(g.weights(), &DMatrix::zeros(1, 1));
        assert!(matches!(
            generate_geometric_graph(0, 0.5, 0.0, 3),
            Err(Error::InvalidArgument(_))
        ));
        assert!(generate_geometric_graph(4, 0.0, 0.0, 3).is_err());
        assert!(generate_geometric_graph(4, 0.5, 1.0, 3).is_err());

        let g = generate_geometric_graph(2, 0.5, 0.0, 9).unwrap();
        let [a, b] = [g.coords()[0], g.coords()[1]];
        let d2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
        assert_eq!(g.weights()[(0, 1)], (-d2 / 0.25).exp());

        let g = generate_geometric_graph(100, 0.5, 0.0, 5).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.num_edges(), 100 * 99 / 2);
        assert!(g.weights().iter().all(|&w| (0.0..=1.0).contains(&w)));
        assert_eq!(g, generate_geometric_graph(100, 0.5, 0.0, 5).unwrap());
    }

    #[test]
    fn connectivity() {
        assert!(Graph::complete(5).is_connected());
        assert!(Graph::path(7).is_connected());
        assert!(!Graph::from_weights(DMatrix::zeros(2, 2)).unwrap().is_connected());
    }

    #[test]
    fn invalid_weights_rejected() {
        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(Graph::from_weights(asym).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        assert!(Graph::from_weights(neg).is_err());
        let diag = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(Graph::from_weights(diag).is_err());
    }

    #[test]
    fn edge_list_roundtrip_and_errors() {
        let g = generate_geometric_graph(12, 0.5, 0.4, 21).unwrap();
        let text = g.to_edge_list();
        assert!(text.starts_with("m 12\nv 0 "));
        let back = Graph::from_edge_list(&text, Path::new("mem")).unwrap();
        assert_eq!(back, g);

        let p = Path::new("mem");
        assert!(Graph::from_edge_list("", p).is_err());
        assert!(Graph::from_edge_list("m 2\nv 0 0 0\n", p).is_err());
        assert!(Graph::from_edge_list("m 2\nv 0 0 0\nv 1 0 0\ne 0 5 1\n", p).is_err());
        assert!(Graph::from_edge_list("m 2\nv 0 0 0\nv 1 0 0\nx\n", p).is_err());
    }
}
