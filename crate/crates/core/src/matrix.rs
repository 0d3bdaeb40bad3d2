//! Dense complex matrices at desk scale (dimension ≤ ~16) and a cyclic Jacobi
//! eigensolver for Hermitian inputs. Robustness is preferred over speed
//! throughout: every matrix here is tiny.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hermiticity tolerance used by the eigensolver and the quantum-state
/// validators: `max |M − M†|` entrywise.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Jacobi convergence target: off-diagonal Frobenius norm below this value.
pub const JACOBI_OFFDIAG_TOL: f64 = 1e-12;

/// Hard cap on Jacobi sweeps; convergence is quadratic, so hitting this
/// indicates a bug or a non-Hermitian input that slipped through.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// A dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Builds from nested rows, validating rectangularity and finiteness.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Validation("matrix must have at least one row and column".into()));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in &rows {
            if r.len() != cols {
                return Err(Error::Validation("ragged rows in matrix literal".into()));
            }
            for &z in r {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::Validation("non-finite matrix entry".into()));
                }
                data.push(z);
            }
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "add: {}×{} vs {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "sub: {}×{} vs {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let data = self.data.iter().map(|a| a * s).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "mul: {}×{} by {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "trace of non-square {}×{} matrix",
                self.rows, self.cols
            )));
        }
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    /// Entrywise max modulus, `‖M‖_max`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M − M†|` entrywise; zero for exactly Hermitian matrices.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Frobenius norm of the strictly off-diagonal part.
    pub fn offdiag_frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    s += self.get(i, j).norm_sqr();
                }
            }
        }
        s.sqrt()
    }
}

/// Kronecker product with A's index major: `(A⊗B)[(i·rB + k), (j·cB + l)] = A[i,j]·B[k,l]`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a.get(i, j);
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out.set(i * b.rows() + k, j * b.cols() + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues in descending
/// order, with the matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Cyclic Jacobi for complex Hermitian matrices. Each rotation zeroes one
/// off-diagonal pair; sweeps repeat until the off-diagonal Frobenius norm
/// drops below [`JACOBI_OFFDIAG_TOL`].
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(Error::Validation(format!(
            "eigendecomposition requires a square matrix, got {}×{}",
            m.rows(),
            m.cols()
        )));
    }
    let herm_err = m.hermiticity_error();
    if herm_err > HERMITICITY_TOL {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian: max |M − M†| = {herm_err:.3e} exceeds {HERMITICITY_TOL:e}"
        )));
    }
    let n = m.rows();
    // Work on the exactly Hermitian part; the discarded remainder is within
    // tolerance by the check above.
    let mut a = m.add(&m.dagger())?.scale_re(0.5);
    let mut v = ComplexMatrix::identity(n);

    let mut converged = false;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if a.offdiag_frobenius() < JACOBI_OFFDIAG_TOL {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let abs_b = apq.norm();
                if abs_b == 0.0 {
                    continue;
                }
                let beta = apq.arg();
                let phase = Complex64::from_polar(1.0, beta);
                let theta = 0.5 * (2.0 * abs_b).atan2(a.get(p, p).re - a.get(q, q).re);
                let (s, c) = theta.sin_cos();
                // A ← A·U, columns p and q; U = [[c, −s e^{iβ}], [s e^{−iβ}, c]].
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, aip * c + aiq * s * phase.conj());
                    a.set(i, q, -aip * s * phase + aiq * c);
                }
                // A ← U†·A, rows p and q.
                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, apj * c + aqj * s * phase);
                    a.set(q, j, -apj * s * phase.conj() + aqj * c);
                }
                // Accumulate eigenvectors: V ← V·U.
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip * c + viq * s * phase.conj());
                    v.set(i, q, -vip * s * phase + viq * c);
                }
            }
        }
    }
    if !converged && a.offdiag_frobenius() >= JACOBI_OFFDIAG_TOL {
        return Err(Error::Numerical(format!(
            "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (off-diagonal norm {:.3e})",
            a.offdiag_frobenius()
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order
        .sort_by(|&i, &j| a.get(j, j).re.partial_cmp(&a.get(i, i).re).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, col, v.get(row, src));
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Smallest eigenvalue of a Hermitian matrix (used for PSD checks, where the
/// witness value feeds error messages).
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    let eig = hermitian_eig(m)?;
    Ok(*eig.values.last().expect("non-empty spectrum"))
}
