//! Shared input generators for the benchmark targets.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mixprep::cholesky::Ensemble;
use mixprep::linalg::{ComplexMatrix, DensityMatrix, StateVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_state(rng: &mut ChaCha8Rng, num_qubits: usize) -> StateVector {
    let dim = 1usize << num_qubits;
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector::new(num_qubits, amps).unwrap()
}

/// A PSD matrix with entries decaying away from the diagonal, so incomplete
/// factorization has something to drop.
pub fn banded_density(rng: &mut ChaCha8Rng, num_qubits: usize, bandwidth: usize) -> DensityMatrix {
    let dim = 1usize << num_qubits;
    let mut b = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i.saturating_sub(bandwidth)..=i {
            let decay = 0.5f64.powi((i - j) as i32);
            b[(i, j)] = Complex64::new(
                decay * (rng.gen::<f64>() - 0.5),
                decay * (rng.gen::<f64>() - 0.5),
            );
        }
    }
    let mut m = b.matmul(&b.dagger());
    let trace = m.trace().re;
    m = m.scale(Complex64::new(1.0 / trace, 0.0));
    DensityMatrix::new(num_qubits, m).unwrap()
}

pub fn random_ensemble(rng: &mut ChaCha8Rng, num_qubits: usize, members: usize) -> Ensemble {
    let mut weights: Vec<f64> = (0..members).map(|_| rng.gen::<f64>() + 0.1).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let states = (0..members).map(|_| random_state(rng, num_qubits)).collect();
    Ensemble { weights, states }
}
