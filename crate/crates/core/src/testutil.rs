//! Shared helpers for unit and integration tests.

use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{ComplexMatrix, DensityMatrix, StateVector};

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_state(rng: &mut impl Rng, num_qubits: usize) -> StateVector {
    let d = 1usize << num_qubits;
    let mut amps: Vec<Complex64> = (0..d)
        .map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in amps.iter_mut() {
        *a /= norm;
    }
    StateVector::new(num_qubits, amps).unwrap()
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = c64(rng.gen_range(-1.0..1.0), 0.0);
        for j in (i + 1)..d {
            let z = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Random full-rank density matrix, AA^dag normalized to trace 1.
pub fn random_density(rng: &mut impl Rng, num_qubits: usize) -> DensityMatrix {
    let d = 1usize << num_qubits;
    random_density_of_rank(rng, num_qubits, d)
}

/// Random density matrix of the given rank.
pub fn random_density_of_rank(
    rng: &mut impl Rng,
    num_qubits: usize,
    rank: usize,
) -> DensityMatrix {
    let d = 1usize << num_qubits;
    let mut a = ComplexMatrix::zeros(d, rank);
    for i in 0..d {
        for j in 0..rank {
            a[(i, j)] = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let mut m = a.matmul(&a.dagger());
    let tr = m.trace().re;
    m = m.scale(c64(1.0 / tr, 0.0));
    DensityMatrix::new(num_qubits, m).unwrap()
}
