//! Dense complex linear algebra: Kronecker products, the matrix exponential,
//! Hermitian spectra and null vectors.
//!
//! Superoperators use the column-stacking convention throughout the crate:
//! `vec(A X B) = (B^T ⊗ A) vec(X)`, and the element `X[i, j]` lives at
//! `i + j * rows` of `vec(X)`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default Hermiticity tolerance (max entry of `|h - h^dagger|`).
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Default relative singular-value threshold for null-space detection.
pub const RANK_TOL: f64 = 1e-10;

/// A dense complex matrix with at least one row and column and finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Wraps an nalgebra matrix, checking shape and finiteness.
    pub fn new(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::Empty);
        }
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                let z = inner[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(inner))
    }

    pub(crate) fn from_inner(inner: DMatrix<Complex64>) -> Self {
        debug_assert!(inner.nrows() > 0 && inner.ncols() > 0);
        Self(inner)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_inner(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_inner(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self::from_inner(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from row-major complex entries.
    pub fn from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds a matrix from row-major real entries.
    pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_rows(rows, cols, &c)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { ZERO })
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_inner(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self::from_inner(self.0.transpose())
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self::from_inner(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_inner(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows().min(self.cols())).map(|i| self.0[(i, i)]).sum()
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.rows().min(self.cols())).map(|i| self.0[(i, i)].re).collect()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows(), self.cols()),
            (other.rows(), other.cols()),
            "shape mismatch"
        );
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols())
            .map(|j| self.0.column(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Max entry of `|m - m^dagger|`; infinite for non-square input.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// `(m + m^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_inner((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols(), v.len(), "vector length mismatch");
        let out = &self.0 * DVector::from_column_slice(v);
        out.as_slice().to_vec()
    }

    /// Column-stacked vectorization.
    pub fn vectorize(&self) -> Vec<Complex64> {
        self.0.as_slice().to_vec()
    }

    /// Inverse of [`ComplexMatrix::vectorize`] for a square `n x n` matrix.
    pub fn unvectorize(v: &[Complex64], n: usize) -> Result<Self> {
        if v.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: v.len(),
            });
        }
        Self::new(DMatrix::from_column_slice(n, n, v))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.0[idx]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_inner(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_inner(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_inner(&self.0 - &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix::from_inner(-&self.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product: entry `(i*rb + k, j*cb + l)` equals `a[i,j] * b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = (a.rows(), a.cols());
    let (rb, cb) = (b.rows(), b.cols());
    let mut out = DMatrix::zeros(ra * rb, ca * cb);
    for j in 0..ca {
        for i in 0..ra {
            let aij = a.0[(i, j)];
            if aij == ZERO {
                continue;
            }
            for l in 0..cb {
                for k in 0..rb {
                    out[(i * rb + k, j * cb + l)] = aij * b.0[(k, l)];
                }
            }
        }
    }
    ComplexMatrix::from_inner(out)
}

// Padé coefficients and 1-norm thresholds for scaling and squaring
// (Higham, SIAM J. Matrix Anal. Appl. 26 (2005) 1179).
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152e0;

/// Matrix exponential by Padé scaling and squaring. Works for arbitrary
/// (non-normal) square input such as Liouvillians.
pub fn matexp(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.ensure_square()?;
    let a = &m.0;
    let id = DMatrix::<Complex64>::identity(n, n);
    let norm = m.norm_one();
    if norm == 0.0 {
        return Ok(ComplexMatrix::from_inner(id));
    }

    for &(order, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match order {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return pade_low(a, &id, coeffs).map(ComplexMatrix::from_inner);
        }
    }

    let s = ((norm / THETA13).log2().ceil()).max(0.0) as i32;
    let scaled = a * Complex64::new(2f64.powi(-s), 0.0);
    let mut r = pade13(&scaled, &id)?;
    for _ in 0..s {
        r = &r * &r;
    }
    ComplexMatrix::new(r)
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn pade_low(a: &DMatrix<Complex64>, id: &DMatrix<Complex64>, b: &[f64]) -> Result<DMatrix<Complex64>> {
    let a2 = a * a;
    let mut u = id * c(b[1]);
    let mut v = id * c(b[0]);
    let mut power = id.clone();
    for k in 1..b.len() / 2 {
        power = &power * &a2;
        u += &power * c(b[2 * k + 1]);
        v += &power * c(b[2 * k]);
    }
    let u = a * u;
    solve_pade(&u, &v)
}

fn pade13(a: &DMatrix<Complex64>, id: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let b = &PADE13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (&a6 * c(b[13]) + &a4 * c(b[11]) + &a2 * c(b[9]));
    let u = a * (inner_u + &a6 * c(b[7]) + &a4 * c(b[5]) + &a2 * c(b[3]) + id * c(b[1]));
    let inner_v = &a6 * (&a6 * c(b[12]) + &a4 * c(b[10]) + &a2 * c(b[8]));
    let v = inner_v + &a6 * c(b[6]) + &a4 * c(b[4]) + &a2 * c(b[2]) + id * c(b[0]);
    solve_pade(&u, &v)
}

fn solve_pade(u: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let q = v - u;
    let p = v + u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::InvalidParameter("singular Padé denominator".into()))
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
}

pub fn hermitian_eigen(h: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    let n = h.ensure_square()?;
    let deviation = h.hermiticity_deviation();
    if deviation > tol {
        return Err(Error::NotHermitian {
            deviation,
            tolerance: tol,
        });
    }
    let eig = SymmetricEigen::new(h.hermitian_part().0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    Ok(HermitianEigen {
        values,
        vectors: ComplexMatrix::from_inner(vectors),
    })
}

/// Real eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigvals(h: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigvals_tol(h, HERMITIAN_TOL)
}

pub fn hermitian_eigvals_tol(h: &ComplexMatrix, tol: f64) -> Result<Vec<f64>> {
    hermitian_eigen(h, tol).map(|e| e.values)
}

/// Singular values, descending.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = SVD::new(m.0.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Unit vector spanning the one-dimensional null space of `m`.
pub fn null_vector(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    null_vector_tol(m, RANK_TOL)
}

/// As [`null_vector`] with an explicit relative rank threshold. The phase is
/// fixed so that the largest-magnitude entry is real and positive.
pub fn null_vector_tol(m: &ComplexMatrix, rank_tol: f64) -> Result<Vec<Complex64>> {
    let n = m.ensure_square()?;
    if n == 1 {
        return if m[(0, 0)].norm() == 0.0 {
            Ok(vec![ONE])
        } else {
            Err(Error::RankDeficiency {
                smallest: m[(0, 0)].norm(),
                second: f64::NAN,
                largest: m[(0, 0)].norm(),
            })
        };
    }
    let svd = SVD::new(m.0.clone(), false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    let (smallest, second) = (sv[order[0]], sv[order[1]]);
    let largest = sv[order[n - 1]];
    if largest == 0.0 || smallest > rank_tol * largest || second <= rank_tol * largest {
        return Err(Error::RankDeficiency {
            smallest,
            second,
            largest,
        });
    }
    let row = order[0];
    let mut v: Vec<Complex64> = (0..n).map(|j| v_t[(row, j)].conj()).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("non-empty");
    let phase = pivot.conj() / (pivot.norm() * norm);
    for z in &mut v {
        *z *= phase;
    }
    Ok(v)
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
