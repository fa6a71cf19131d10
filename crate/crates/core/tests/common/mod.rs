#![allow(dead_code)]

use glreg::graph::{generate_geometric_graph, laplacian, Graph, LaplacianSpectrum, DEFAULT_ZERO_TOL};
use glreg::synth::ModelInstance;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// A connected random graph on `m` vertices: geometric with a random
/// threshold, or i.i.d. sparse weights. Redraws until connected.
pub fn connected_graph(rng: &mut impl Rng, m: usize) -> Graph {
    loop {
        let g = if rng.random_bool(0.5) {
            let threshold = rng.random_range(0.0..0.6);
            generate_geometric_graph(m, rng.random_range(0.2..1.0), threshold, rng.random()).unwrap()
        } else {
            let p = rng.random_range(0.3..1.0);
            let mut w = DMatrix::zeros(m, m);
            for i in 0..m {
                for j in i + 1..m {
                    if rng.random_bool(p) {
                        let v = rng.random_range(0.01..3.0);
                        w[(i, j)] = v;
                        w[(j, i)] = v;
                    }
                }
            }
            Graph::from_weights(w).unwrap()
        };
        if g.is_connected() {
            return g;
        }
    }
}

pub fn connected_spectrum(rng: &mut impl Rng, m: usize) -> LaplacianSpectrum {
    laplacian(&connected_graph(rng, m), DEFAULT_ZERO_TOL).unwrap()
}

/// A model instance on a random connected graph with smooth ground truth.
pub fn random_instance(
    rng: &mut impl Rng,
    m: usize,
    k: usize,
    n: usize,
    sigma: f64,
) -> (LaplacianSpectrum, ModelInstance) {
    let s = connected_spectrum(rng, m);
    let inst = ModelInstance::generate(&s, k, n, sigma, &DMatrix::identity(k, k), rng.random()).unwrap();
    (s, inst)
}

pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
