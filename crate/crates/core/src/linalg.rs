//! Dense complex linear algebra kernels.
//!
//! Everything here is a plain row-major `Vec<Complex64>` matrix with the
//! handful of operations the synthesis pipeline needs: Hermitian/PSD checks,
//! a cyclic Jacobi eigensolver (used as the verification oracle, never on the
//! synthesis path), norms, trace distance, Uhlmann fidelity, and partial
//! trace.
//!
//! Qubit convention: qubit 0 is the most significant bit of a basis-state
//! index, i.e. the bit of qubit `q` in index `a` is `(a >> (n - 1 - q)) & 1`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Norm tolerance for [`StateVector`] construction.
pub const NORM_TOL: f64 = 1e-12;
/// Eigenvalues above this (negative) floor are treated as numerically PSD.
pub const PSD_TOL: f64 = 1e-10;

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            entries,
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.entries.iter_mut().zip(&other.entries) {
            *x -= y;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.entries.iter_mut().zip(&other.entries) {
            *x += y;
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for x in out.entries.iter_mut() {
            *x *= s;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Number of entries that are exactly zero is `len - nnz`.
    pub fn nnz(&self) -> usize {
        self.entries
            .iter()
            .filter(|z| z.re != 0.0 || z.im != 0.0)
            .count()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

/// Unit-norm amplitude vector over `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub num_qubits: usize,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << num_qubits {
            return Err(Error::Dimension(format!(
                "expected {} amplitudes for {} qubits, got {}",
                1usize << num_qubits,
                num_qubits,
                amplitudes.len()
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "state vector norm^2 = {norm_sq}, expected 1"
            )));
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// |psi><psi| as a density matrix.
    pub fn outer(&self) -> DensityMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                m[(a, b)] = self.amplitudes[a] * self.amplitudes[b].conj();
            }
        }
        DensityMatrix {
            num_qubits: self.num_qubits,
            matrix: m,
        }
    }

    /// |<self|other>|^2.
    pub fn overlap_sq(&self, other: &StateVector) -> f64 {
        let ip: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        ip.norm_sqr()
    }
}

/// Hermitian, PSD, trace-1 matrix over `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub num_qubits: usize,
    pub matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Construct with cheap structural checks (shape, Hermiticity, trace).
    pub fn new(num_qubits: usize, matrix: ComplexMatrix) -> Result<Self> {
        let d = 1usize << num_qubits;
        if matrix.rows != d || matrix.cols != d {
            return Err(Error::Dimension(format!(
                "expected {d}x{d} matrix for {num_qubits} qubits, got {}x{}",
                matrix.rows, matrix.cols
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::Validation("non-finite matrix entry".into()));
        }
        let herm_dev = hermitian_deviation(&matrix);
        if herm_dev > 1e-9 {
            return Err(Error::Validation(format!(
                "matrix is not Hermitian (max deviation {herm_dev:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::Validation(format!("trace = {tr}, expected 1")));
        }
        Ok(Self { num_qubits, matrix })
    }

    /// Full validation including the PSD check via the eigensolver.
    pub fn validated(num_qubits: usize, matrix: ComplexMatrix) -> Result<Self> {
        let dm = Self::new(num_qubits, matrix)?;
        let check = hermitian_psd_check(&dm.matrix, PSD_TOL)?;
        if !check.psd {
            return Err(Error::Validation(format!(
                "matrix is not PSD (min eigenvalue {:.3e})",
                check.min_eigenvalue
            )));
        }
        Ok(dm)
    }

    pub fn from_matrix_unchecked(num_qubits: usize, matrix: ComplexMatrix) -> Self {
        Self { num_qubits, matrix }
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let d = 1usize << num_qubits;
        let m = ComplexMatrix::identity(d).scale(Complex64::new(1.0 / d as f64, 0.0));
        Self {
            num_qubits,
            matrix: m,
        }
    }
}

/// Result of [`hermitian_psd_check`].
#[derive(Debug, Clone, Copy)]
pub struct HermitianPsdReport {
    pub hermitian: bool,
    pub psd: bool,
    pub min_eigenvalue: f64,
}

pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.rows {
        for j in 0..m.cols {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Check Hermiticity and positive semi-definiteness within `tol`.
pub fn hermitian_psd_check(m: &ComplexMatrix, tol: f64) -> Result<HermitianPsdReport> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "hermitian_psd_check requires a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let hermitian = hermitian_deviation(m) <= tol;
    if !hermitian {
        return Ok(HermitianPsdReport {
            hermitian: false,
            psd: false,
            min_eigenvalue: f64::NAN,
        });
    }
    let (eigenvalues, _) = eigh(m)?;
    let min_eigenvalue = eigenvalues.last().copied().unwrap_or(0.0);
    Ok(HermitianPsdReport {
        hermitian: true,
        psd: min_eigenvalue >= -tol,
        min_eigenvalue,
    })
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// matrix columns. Convergence: off-diagonal Frobenius mass below
/// `1e-14 * ||M||_F`, at most 100 sweeps.
pub fn eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::Dimension("eigh requires a square matrix".into()));
    }
    if hermitian_deviation(m) > 1e-10 * (1.0 + m.max_abs()) {
        return Err(Error::Validation(format!(
            "eigh requires a Hermitian matrix (deviation {:.3e})",
            hermitian_deviation(m)
        )));
    }
    let d = m.rows;
    let mut a = m.clone();
    // Symmetrize away round-off so the iteration stays Hermitian.
    for i in 0..d {
        for j in (i + 1)..d {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(d);
    let norm = frobenius_norm(m).max(f64::MIN_POSITIVE);
    let threshold = 1e-14 * norm;

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                off += 2.0 * a[(i, j)].norm_sqr();
            }
        }
        if off.sqrt() <= threshold {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                // Phase factor turning a_pq real, then a real Jacobi rotation.
                let u = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = [[c, s*u], [-s*conj(u)... ]] chosen so (G^H A G)_pq = 0.
                let g00 = Complex64::new(c, 0.0);
                let g01 = u * s;
                let g10 = -u.conj() * s;
                let g11 = Complex64::new(c, 0.0);
                // A <- G^H A G, applied as column then row updates.
                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g00 + akq * g10;
                    a[(k, q)] = akp * g01 + akq * g11;
                }
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g00.conj() * apk + g10.conj() * aqk;
                    a[(q, k)] = g01.conj() * apk + g11.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g00 + vkq * g10;
                    v[(k, q)] = vkp * g01 + vkq * g11;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    let eigenvalues: Vec<f64> = (0..d).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| eigenvalues[j].partial_cmp(&eigenvalues[i]).unwrap());
    let sorted_values: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(d, d);
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..d {
            vectors[(k, new_col)] = v[(k, old_col)];
        }
    }
    Ok((sorted_values, vectors))
}

pub fn frobenius_norm(m: &ComplexMatrix) -> f64 {
    m.entries
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Trace norm: sum of singular values, via eigh of M^dag M.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    let gram = m.dagger().matmul(m);
    let (eigenvalues, _) = eigh(&gram).expect("gram matrix is Hermitian");
    // Eigenvalues at the level of the Jacobi termination residual are noise;
    // their square roots would otherwise dominate small singular values.
    let cutoff = 1e-13 * eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    eigenvalues
        .iter()
        .filter(|&&l| l > cutoff)
        .map(|&l| l.sqrt())
        .sum()
}

/// Trace distance D = ||rho1 - rho2||_* / 2.
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.num_qubits != rho2.num_qubits {
        return Err(Error::Dimension(format!(
            "trace_distance: {} vs {} qubits",
            rho1.num_qubits, rho2.num_qubits
        )));
    }
    Ok(0.5 * trace_norm(&rho1.matrix.sub(&rho2.matrix)))
}

/// Hermitian matrix square root; round-off negatives are clamped to zero.
fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (eigenvalues, vectors) = eigh(m)?;
    if let Some(&min) = eigenvalues.last() {
        if min < -PSD_TOL * (1.0 + eigenvalues[0].abs()) {
            return Err(Error::Validation(format!(
                "matrix square root of non-PSD matrix (min eigenvalue {min:.3e})"
            )));
        }
    }
    let d = m.rows;
    let mut out = ComplexMatrix::zeros(d, d);
    for (i, &l) in eigenvalues.iter().enumerate() {
        let s = l.max(0.0).sqrt();
        if s == 0.0 {
            continue;
        }
        for a in 0..d {
            for b in 0..d {
                out[(a, b)] += vectors[(a, i)] * vectors[(b, i)].conj() * s;
            }
        }
    }
    Ok(out)
}

/// Uhlmann fidelity F = (Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2, the squared
/// convention for which 1 - sqrt(F) <= D <= sqrt(1 - F).
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.num_qubits != rho2.num_qubits {
        return Err(Error::Dimension(format!(
            "fidelity: {} vs {} qubits",
            rho1.num_qubits, rho2.num_qubits
        )));
    }
    let s1 = sqrt_psd(&rho1.matrix)?;
    let inner = s1.matmul(&rho2.matrix).matmul(&s1);
    // Round-off can leave inner slightly non-Hermitian; resymmetrize.
    let inner = inner.add(&inner.dagger()).scale(Complex64::new(0.5, 0.0));
    let root = sqrt_psd(&inner)?;
    let f = root.trace().re;
    Ok((f * f).clamp(0.0, 1.0 + 1e-9).min(1.0))
}

/// Partial trace onto the kept qubits.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::Dimension("partial_trace: empty keep set".into()));
    }
    let n = rho.num_qubits;
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || *keep_sorted.last().unwrap() >= n {
        return Err(Error::Dimension(format!(
            "partial_trace: invalid keep set {keep:?} for {n} qubits"
        )));
    }
    let trash: Vec<usize> = (0..n).filter(|q| !keep_sorted.contains(q)).collect();
    let nk = keep_sorted.len();
    let nt = trash.len();
    let dk = 1usize << nk;
    let dt = 1usize << nt;
    let expand = |kept_bits: usize, trash_bits: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &q) in keep_sorted.iter().enumerate() {
            let bit = (kept_bits >> (nk - 1 - pos)) & 1;
            idx |= bit << (n - 1 - q);
        }
        for (pos, &q) in trash.iter().enumerate() {
            let bit = (trash_bits >> (nt - 1 - pos)) & 1;
            idx |= bit << (n - 1 - q);
        }
        idx
    };
    let mut out = ComplexMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut sum = Complex64::new(0.0, 0.0);
            for t in 0..dt {
                sum += rho.matrix[(expand(a, t), expand(b, t))];
            }
            out[(a, b)] = sum;
        }
    }
    Ok(DensityMatrix {
        num_qubits: nk,
        matrix: out,
    })
}

/// Partial trace of a pure state's projector without forming the full
/// density matrix; the reduced matrix is over the kept qubits.
pub fn partial_trace_state(psi: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::Dimension("partial_trace: empty keep set".into()));
    }
    let n = psi.num_qubits;
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || *keep_sorted.last().unwrap() >= n {
        return Err(Error::Dimension(format!(
            "partial_trace: invalid keep set {keep:?} for {n} qubits"
        )));
    }
    let trash: Vec<usize> = (0..n).filter(|q| !keep_sorted.contains(q)).collect();
    let nk = keep_sorted.len();
    let nt = trash.len();
    let dk = 1usize << nk;
    let dt = 1usize << nt;
    let expand = |kept_bits: usize, trash_bits: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &q) in keep_sorted.iter().enumerate() {
            let bit = (kept_bits >> (nk - 1 - pos)) & 1;
            idx |= bit << (n - 1 - q);
        }
        for (pos, &q) in trash.iter().enumerate() {
            let bit = (trash_bits >> (nt - 1 - pos)) & 1;
            idx |= bit << (n - 1 - q);
        }
        idx
    };
    let mut out = ComplexMatrix::zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut sum = Complex64::new(0.0, 0.0);
            for t in 0..dt {
                sum += psi.amplitudes[expand(a, t)] * psi.amplitudes[expand(b, t)].conj();
            }
            out[(a, b)] = sum;
        }
    }
    Ok(DensityMatrix {
        num_qubits: nk,
        matrix: out,
    })
}
