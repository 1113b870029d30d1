//! Pivoted and incomplete Cholesky factorization of density matrices, and
//! conversion of a factor into an ensemble of weighted pure states.
//!
//! The pivoted (rank-revealing) path is exact and exposes the numerical rank;
//! the incomplete path drops small off-diagonal entries against a per-column
//! threshold `drop_tol * sqrt(M[j][j])`, trading reconstruction accuracy for
//! factor sparsity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, ComplexMatrix, DensityMatrix, StateVector};

/// Hermiticity / PSD entry tolerance for factorization inputs.
const INPUT_TOL: f64 = 1e-10;

/// Columns with squared norm at or below this are dropped from ensembles.
const WEIGHT_FLOOR: f64 = 1e-14;

/// Which factorization produced a [`CholeskyFactor`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorKind {
    Complete,
    Incomplete { drop_tol: f64 },
}

/// Lower-triangular Cholesky factor under a row permutation.
///
/// Row `i` of `l` corresponds to original index `permutation[i]`, so the
/// reconstruction is `(P L)(P L)^dag` with `(P L)[permutation[i]][j] = l[i][j]`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    pub l: ComplexMatrix,
    pub permutation: Vec<usize>,
    pub rank: usize,
    pub kind: FactorKind,
    /// Diagonal shift `delta` applied to recover from breakdown (`M + delta*I`);
    /// zero when no retry was needed.
    pub shift: f64,
}

impl CholeskyFactor {
    /// The factor with the permutation applied: rows back in original order.
    pub fn permuted(&self) -> ComplexMatrix {
        let d = self.l.rows;
        let mut a = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..self.l.cols {
                a[(self.permutation[i], j)] = self.l[(i, j)];
            }
        }
        a
    }

    /// `(P L)(P L)^dag`, the matrix this factor represents.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let a = self.permuted();
        a.matmul(&a.dagger())
    }

    /// Structural nonzeros in the triangular factor.
    pub fn nnz(&self) -> usize {
        self.l.nnz()
    }
}

/// The permuted factor with all-zero columns removed: the `2^n x l` matrix
/// whose columns are the unnormalized ensemble states.
#[derive(Debug, Clone)]
pub struct FactorMatrix {
    pub a: ComplexMatrix,
    pub source: CholeskyFactor,
}

/// A convex mixture of pure states.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub weights: Vec<f64>,
    pub states: Vec<StateVector>,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `sum_i p_i |psi_i><psi_i|`.
    pub fn density(&self) -> ComplexMatrix {
        let d = 1usize << self.states[0].num_qubits;
        let mut rho = ComplexMatrix::zeros(d, d);
        for (p, psi) in self.weights.iter().zip(&self.states) {
            for a in 0..d {
                for b in 0..d {
                    rho[(a, b)] += psi.amplitudes[a] * psi.amplitudes[b].conj() * p;
                }
            }
        }
        rho
    }
}

fn check_input(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "factorization requires a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let dev = hermitian_deviation(m);
    if dev > INPUT_TOL * (1.0 + m.max_abs()) {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian (deviation {dev:.3e})"
        )));
    }
    Ok(())
}

/// Rank-revealing Cholesky factorization with diagonal pivoting.
///
/// Pivots on the largest remaining diagonal (ties: lowest original index) and
/// stops once the largest remaining diagonal drops to `rank_tol` times the
/// largest initial diagonal; the accepted pivot count is the numerical rank.
/// A diagonal falling below the negated threshold means the input is
/// indefinite beyond tolerance.
pub fn pivoted_cholesky(m: &ComplexMatrix, rank_tol: f64) -> Result<CholeskyFactor> {
    check_input(m)?;
    let d = m.rows;
    let mut perm: Vec<usize> = (0..d).collect();
    let mut diag: Vec<f64> = (0..d).map(|i| m[(i, i)].re).collect();
    let max_init = diag.iter().cloned().fold(0.0_f64, f64::max);
    let tol = rank_tol * max_init.max(f64::MIN_POSITIVE);
    let mut l = ComplexMatrix::zeros(d, d);
    let mut rank = d;

    for k in 0..d {
        // Largest remaining diagonal, lowest original index on ties.
        let mut best = k;
        for j in (k + 1)..d {
            let better = diag[perm[j]] > diag[perm[best]]
                || (diag[perm[j]] == diag[perm[best]] && perm[j] < perm[best]);
            if better {
                best = j;
            }
        }
        let pivot = diag[perm[best]];
        if pivot <= tol {
            if pivot < -tol {
                return Err(Error::Indefinite(format!(
                    "pivot {pivot:.3e} below -{tol:.3e} at step {k}"
                )));
            }
            rank = k;
            break;
        }
        perm.swap(k, best);
        for c in 0..k {
            let tmp = l[(k, c)];
            l[(k, c)] = l[(best, c)];
            l[(best, c)] = tmp;
        }
        let pk = pivot.sqrt();
        l[(k, k)] = Complex64::new(pk, 0.0);
        for i in (k + 1)..d {
            let mut s = m[(perm[i], perm[k])];
            for c in 0..k {
                s -= l[(i, c)] * l[(k, c)].conj();
            }
            let v = s / pk;
            l[(i, k)] = v;
            diag[perm[i]] -= v.norm_sqr();
        }
    }

    Ok(CholeskyFactor {
        l,
        permutation: perm,
        rank,
        kind: FactorKind::Complete,
        shift: 0.0,
    })
}

/// Incomplete Cholesky with threshold dropping, in the natural column order.
///
/// See [`incomplete_cholesky_with`]; column reordering is off.
pub fn incomplete_cholesky(m: &ComplexMatrix, drop_tol: f64) -> Result<CholeskyFactor> {
    incomplete_cholesky_with(m, drop_tol, false)
}

/// Incomplete Cholesky with threshold dropping.
///
/// A computed off-diagonal entry is zeroed before use when its magnitude is
/// below `drop_tol * sqrt(M[j][j])` for its column `j`. `drop_tol = 0` gives
/// the complete unpivoted factorization. When dropping drives a pivot to zero
/// or below, the factorization is retried on `M + delta*I` with `delta`
/// starting at 1e-12 and growing tenfold, up to 8 retries; the shift that
/// succeeded is reported on the factor.
///
/// With `reorder` set, columns are processed in ascending order of their
/// nonzero count in `M` (ties by index) to limit fill-in on sparse inputs.
pub fn incomplete_cholesky_with(
    m: &ComplexMatrix,
    drop_tol: f64,
    reorder: bool,
) -> Result<CholeskyFactor> {
    if drop_tol < 0.0 {
        return Err(Error::Validation("drop tolerance must be >= 0".into()));
    }
    check_input(m)?;
    let d = m.rows;
    let perm: Vec<usize> = if reorder {
        let mut idx: Vec<usize> = (0..d).collect();
        let counts: Vec<usize> = (0..d)
            .map(|j| (0..d).filter(|&i| m[(i, j)].norm() > 0.0).count())
            .collect();
        idx.sort_by_key(|&j| (counts[j], j));
        idx
    } else {
        (0..d).collect()
    };

    let mut shift = 0.0_f64;
    for attempt in 0..=8 {
        match ict_attempt(m, drop_tol, &perm, shift) {
            Ok(l) => {
                return Ok(CholeskyFactor {
                    l,
                    permutation: perm,
                    rank: d,
                    kind: FactorKind::Incomplete { drop_tol },
                    shift,
                });
            }
            Err(e) => {
                if attempt == 8 {
                    return Err(e);
                }
                shift = if shift == 0.0 { 1e-12 } else { shift * 10.0 };
            }
        }
    }
    unreachable!("retry loop returns on success or final failure");
}

fn ict_attempt(
    m: &ComplexMatrix,
    drop_tol: f64,
    perm: &[usize],
    shift: f64,
) -> Result<ComplexMatrix> {
    let d = m.rows;
    let mut l = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        let mut pivot = m[(perm[j], perm[j])].re + shift;
        for c in 0..j {
            pivot -= l[(j, c)].norm_sqr();
        }
        if pivot <= 0.0 {
            return Err(Error::Breakdown(format!(
                "pivot {pivot:.3e} at column {j} (shift {shift:.1e})"
            )));
        }
        let pj = pivot.sqrt();
        l[(j, j)] = Complex64::new(pj, 0.0);
        let scale = drop_tol * (m[(perm[j], perm[j])].re + shift).max(0.0).sqrt();
        for i in (j + 1)..d {
            let mut s = m[(perm[i], perm[j])];
            for c in 0..j {
                s -= l[(i, c)] * l[(j, c)].conj();
            }
            let v = s / pj;
            if v.norm() >= scale {
                l[(i, j)] = v;
            }
        }
    }
    Ok(l)
}

/// Strip all-zero columns from the permuted factor.
pub fn prune_zero_columns(factor: &CholeskyFactor) -> FactorMatrix {
    let full = factor.permuted();
    let keep: Vec<usize> = (0..full.cols)
        .filter(|&j| (0..full.rows).any(|i| full[(i, j)].norm() > 0.0))
        .collect();
    let mut a = ComplexMatrix::zeros(full.rows, keep.len());
    for (jj, &j) in keep.iter().enumerate() {
        for i in 0..full.rows {
            a[(i, jj)] = full[(i, j)];
        }
    }
    FactorMatrix {
        a,
        source: factor.clone(),
    }
}

/// Read off the ensemble encoded in the columns of `A`: weights are the
/// squared column norms (renormalized to sum to one) and states the
/// normalized columns. Columns with negligible weight are dropped.
pub fn ensemble_from_factor(factor: &FactorMatrix) -> Result<Ensemble> {
    let a = &factor.a;
    let num_qubits = a.rows.trailing_zeros() as usize;
    if a.rows == 0 || a.rows != 1 << num_qubits {
        return Err(Error::Dimension(format!(
            "factor row count {} is not a power of two",
            a.rows
        )));
    }
    let mut raw = Vec::new();
    let mut states = Vec::new();
    for j in 0..a.cols {
        let col = a.column(j);
        let w: f64 = col.iter().map(|z| z.norm_sqr()).sum();
        if w <= WEIGHT_FLOOR {
            continue;
        }
        let inv = 1.0 / w.sqrt();
        let amps: Vec<Complex64> = col.into_iter().map(|z| z * inv).collect();
        raw.push(w);
        states.push(StateVector::new(num_qubits, amps)?);
    }
    if raw.is_empty() {
        return Err(Error::EmptyEnsemble(
            "all factor columns have negligible weight".into(),
        ));
    }
    let total: f64 = raw.iter().sum();
    Ok(Ensemble {
        weights: raw.into_iter().map(|w| w / total).collect(),
        states,
    })
}

/// Spectral ensemble of a density matrix: eigenvalues above `rank_tol` with
/// their eigenvectors. The alternative preprocessing path, and the oracle the
/// Cholesky path is cross-checked against.
pub fn ensemble_from_eigh(rho: &DensityMatrix, rank_tol: f64) -> Result<Ensemble> {
    let (eigenvalues, vectors) = crate::linalg::eigh(&rho.matrix)?;
    let mut weights = Vec::new();
    let mut states = Vec::new();
    for (i, &lambda) in eigenvalues.iter().enumerate() {
        if lambda <= rank_tol {
            continue;
        }
        weights.push(lambda);
        states.push(StateVector::new(rho.num_qubits, vectors.column(i))?);
    }
    if weights.is_empty() {
        return Err(Error::EmptyEnsemble(
            "no eigenvalue above the rank tolerance".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    Ok(Ensemble { weights, states })
}

/// Convenience pipeline: density matrix to ensemble via pivoted (exact) or
/// incomplete (`drop_tol > 0`) factorization.
pub fn ensemble_from_density(rho: &DensityMatrix, drop_tol: f64) -> Result<(Ensemble, CholeskyFactor)> {
    let factor = if drop_tol > 0.0 {
        incomplete_cholesky(&rho.matrix, drop_tol)?
    } else {
        pivoted_cholesky(&rho.matrix, 1e-10)?
    };
    let pruned = prune_zero_columns(&factor);
    Ok((ensemble_from_factor(&pruned)?, factor))
}
