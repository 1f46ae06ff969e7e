//! Dense complex matrices and LU-based linear algebra.
//!
//! Everything here is deliberately generic (plain partial-pivoting LU, no
//! structure exploitation) so that determinants and inverses computed through
//! this module are independent of the structured Toeplitz fast paths they are
//! checked against.

use thiserror::Error;

use crate::C64;

/// Relative pivot threshold: a pivot below `1e-14 * max_norm(input)` marks
/// the factorization singular.
pub const SINGULAR_PIVOT_REL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("data length {len} does not match {rows}x{cols}")]
    BadLength { len: usize, rows: usize, cols: usize },
    #[error("entry ({row},{col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is singular (pivot {pivot})")]
    Singular { pivot: usize },
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    /// Build from a row-major entry vector; every entry must be finite.
    pub fn from_data(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::BadLength {
                len: data.len(),
                rows,
                cols,
            });
        }
        for (k, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(LinalgError::NonFinite {
                    row: k / cols.max(1),
                    col: k % cols.max(1),
                });
            }
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Build entrywise from a closure.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Convenience constructor from real entries, row-major.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self, LinalgError> {
        Self::from_data(
            rows,
            cols,
            entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
        )
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Matrix product; panics on inner-dimension mismatch (programming error).
    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: inner dimensions {} vs {}",
            self.cols, rhs.rows
        );
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        // i-k-j order: the inner loop runs over contiguous rows of `rhs` and
        // `out`, and accumulation over k is in ascending order (relied on by
        // the bit-reproducibility of kernel sections).
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &r) in orow.iter_mut().zip(rrow) {
                    *o += aik * r;
                }
            }
        }
        out
    }

    /// Entrywise sum; panics on shape mismatch.
    pub fn add(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add: shape");
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| a + b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Entrywise difference; panics on shape mismatch.
    pub fn sub(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub: shape");
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| a - b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Scalar multiple.
    pub fn scaled(&self, s: C64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| s * z).collect(),
        }
    }

    pub fn transpose(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced infinity norm (max absolute row sum); submultiplicative, used
    /// as the convergence guard for Neumann series.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Copy of the `r x c` submatrix with top-left corner `(i0, j0)`.
    pub fn block(&self, i0: usize, j0: usize, r: usize, c: usize) -> ComplexMatrix {
        assert!(i0 + r <= self.rows && j0 + c <= self.cols, "block: bounds");
        ComplexMatrix::from_fn(r, c, |i, j| self.get(i0 + i, j0 + j))
    }

    /// Overwrite the submatrix at `(i0, j0)` with `m`.
    pub fn set_block(&mut self, i0: usize, j0: usize, m: &ComplexMatrix) {
        assert!(
            i0 + m.rows <= self.rows && j0 + m.cols <= self.cols,
            "set_block: bounds"
        );
        for i in 0..m.rows {
            for j in 0..m.cols {
                self.set(i0 + i, j0 + j, m.get(i, j));
            }
        }
    }
}

/// Packed LU factorization `P A = L U` with partial pivoting.
///
/// `factors` stores the strictly lower part of `L` (unit diagonal implied)
/// and the upper part `U`. `pivots[k]` is the row swapped into position `k`
/// at step `k`; `sign` is the permutation sign. A pivot of modulus below
/// [`SINGULAR_PIVOT_REL`] times the input max-norm marks the matrix singular
/// and elimination stops there.
#[derive(Debug, Clone)]
pub struct LuDecomposition {
    factors: ComplexMatrix,
    pivots: Vec<usize>,
    sign: f64,
    singular_pivot: Option<usize>,
}

impl LuDecomposition {
    pub fn is_singular(&self) -> bool {
        self.singular_pivot.is_some()
    }

    /// Index of the failing pivot, if any.
    pub fn singular_pivot(&self) -> Option<usize> {
        self.singular_pivot
    }

    pub fn order(&self) -> usize {
        self.factors.rows()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn factors(&self) -> &ComplexMatrix {
        &self.factors
    }

    /// Determinant: sign times the product of the `U` diagonal; exactly zero
    /// when the factorization is singular.
    pub fn determinant(&self) -> C64 {
        if self.is_singular() {
            return C64::new(0.0, 0.0);
        }
        let mut det = C64::new(self.sign, 0.0);
        for k in 0..self.order() {
            det *= self.factors.get(k, k);
        }
        det
    }

    /// Cheap reciprocal-condition surrogate from the `U` diagonal:
    /// `min |u_kk| / max |u_kk|` (zero when singular).
    pub fn rcond_estimate(&self) -> f64 {
        if self.is_singular() {
            return 0.0;
        }
        let n = self.order();
        if n == 0 {
            return 1.0;
        }
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for k in 0..n {
            let m = self.factors.get(k, k).norm();
            lo = lo.min(m);
            hi = hi.max(m);
        }
        if hi == 0.0 {
            0.0
        } else {
            lo / hi
        }
    }

    /// Solve `A X = rhs` for every column of `rhs`.
    pub fn solve(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
        if let Some(pivot) = self.singular_pivot {
            return Err(LinalgError::Singular { pivot });
        }
        let n = self.order();
        if rhs.rows() != n {
            return Err(LinalgError::DimensionMismatch {
                left_rows: n,
                left_cols: n,
                right_rows: rhs.rows(),
                right_cols: rhs.cols(),
            });
        }
        let mut x = rhs.clone();
        // Apply the recorded row swaps in factorization order.
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                for j in 0..x.cols() {
                    let a = x.get(k, j);
                    let b = x.get(p, j);
                    x.set(k, j, b);
                    x.set(p, j, a);
                }
            }
        }
        let cols = x.cols();
        // Forward substitution with unit lower factor.
        for i in 1..n {
            for j in 0..i {
                let lij = self.factors.get(i, j);
                if lij.re == 0.0 && lij.im == 0.0 {
                    continue;
                }
                axpy_rows(&mut x.data, cols, j, i, -lij);
            }
        }
        // Back substitution with the upper factor.
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let uij = self.factors.get(i, j);
                if uij.re == 0.0 && uij.im == 0.0 {
                    continue;
                }
                axpy_rows(&mut x.data, cols, j, i, -uij);
            }
            let d = self.factors.get(i, i);
            for v in x.row_mut(i) {
                *v /= d;
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<ComplexMatrix, LinalgError> {
        self.solve(&ComplexMatrix::identity(self.order()))
    }
}

/// `dst_row += coeff * src_row` on a row-major buffer.
#[inline]
fn axpy_rows(data: &mut [C64], cols: usize, src: usize, dst: usize, coeff: C64) {
    debug_assert_ne!(src, dst);
    let (s0, d0) = (src * cols, dst * cols);
    if src < dst {
        let (a, b) = data.split_at_mut(d0);
        let srow = &a[s0..s0 + cols];
        let drow = &mut b[..cols];
        for (d, &s) in drow.iter_mut().zip(srow) {
            *d += coeff * s;
        }
    } else {
        let (a, b) = data.split_at_mut(s0);
        let drow = &mut a[d0..d0 + cols];
        let srow = &b[..cols];
        for (d, &s) in drow.iter_mut().zip(srow) {
            *d += coeff * s;
        }
    }
}

/// LU-factor a square matrix with partial pivoting.
pub fn lu_factor(m: &ComplexMatrix) -> Result<LuDecomposition, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let threshold = SINGULAR_PIVOT_REL * m.max_norm();
    let mut a = m.clone();
    let mut pivots: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut singular_pivot = None;

    for k in 0..n {
        // Pick the largest remaining entry in column k.
        let mut p = k;
        let mut best = a.get(k, k).norm();
        for i in (k + 1)..n {
            let v = a.get(i, k).norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best <= threshold {
            singular_pivot = Some(k);
            break;
        }
        if p != k {
            sign = -sign;
            let (lo, hi) = (k.min(p), k.max(p));
            let (top, bot) = a.data.split_at_mut(hi * n);
            top[lo * n..lo * n + n].swap_with_slice(&mut bot[..n]);
        }
        pivots[k] = p;
        let pivot = a.get(k, k);
        for i in (k + 1)..n {
            let m_ik = a.get(i, k) / pivot;
            a.set(i, k, m_ik);
            if m_ik.re == 0.0 && m_ik.im == 0.0 {
                continue;
            }
            let (top, bot) = a.data.split_at_mut(i * n);
            let krow = &top[k * n + k + 1..k * n + n];
            let irow = &mut bot[k + 1..n];
            for (x, &y) in irow.iter_mut().zip(krow) {
                *x -= m_ik * y;
            }
        }
    }

    Ok(LuDecomposition {
        factors: a,
        pivots,
        sign,
        singular_pivot,
    })
}

/// Determinant via LU; exactly zero for singular input.
pub fn determinant(m: &ComplexMatrix) -> Result<C64, LinalgError> {
    Ok(lu_factor(m)?.determinant())
}

/// Solve `A X = rhs`.
pub fn solve(m: &ComplexMatrix, rhs: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    lu_factor(m)?.solve(rhs)
}

/// Matrix inverse via LU.
pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    lu_factor(m)?.inverse()
}

/// Dense Cholesky factorization `A = L L^H` of a Hermitian positive-definite
/// matrix; returns the lower factor with real positive diagonal.
pub fn cholesky(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let floor = 1e-13 * m.max_norm().max(f64::MIN_POSITIVE);
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m.get(j, j).re;
        for k in 0..j {
            d -= l.get(j, k).norm_sqr();
        }
        if !(d > floor) {
            return Err(LinalgError::NotPositiveDefinite { pivot: j });
        }
        let djj = d.sqrt();
        l.set(j, j, C64::new(djj, 0.0));
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k).conj();
            }
            l.set(i, j, s / djj);
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn determinant_of_small_worked_examples() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((determinant(&m).unwrap() - c(-2.0, 0.0)).norm() < 1e-14);
        // A pure row swap: the permutation sign must come through as -1.
        let swap = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((determinant(&swap).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn inverse_of_worked_symmetric_matrix() {
        let m = ComplexMatrix::from_real(2, 2, &[1.25, -0.5, -0.5, 1.25]).unwrap();
        let inv = inverse(&m).unwrap();
        let scale = 1.0 / 1.3125;
        let expect =
            ComplexMatrix::from_real(2, 2, &[1.25 * scale, 0.5 * scale, 0.5 * scale, 1.25 * scale])
                .unwrap();
        assert!(inv.sub(&expect).max_norm() < 1e-14);
    }

    /// Independent oracle: determinant by cofactor expansion along the first
    /// row. Exponential cost, fine for the small matrices it is used on.
    fn cofactor_det(m: &ComplexMatrix) -> C64 {
        let n = m.rows();
        assert!(m.is_square());
        if n == 0 {
            return c(1.0, 0.0);
        }
        if n == 1 {
            return m.get(0, 0);
        }
        let mut det = c(0.0, 0.0);
        let mut sign = 1.0;
        for j in 0..n {
            let minor = ComplexMatrix::from_fn(n - 1, n - 1, |r, s| {
                m.get(r + 1, if s < j { s } else { s + 1 })
            });
            det += m.get(0, j) * cofactor_det(&minor) * c(sign, 0.0);
            sign = -sign;
        }
        det
    }

    fn uniform(rng: &mut ChaCha8Rng) -> f64 {
        // [-1, 1) from the top 53 bits.
        ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| c(uniform(rng), uniform(rng)))
    }

    #[test]
    fn identity_determinant_is_one() {
        let det = determinant(&ComplexMatrix::identity(4)).unwrap();
        assert_eq!(det, c(1.0, 0.0));
    }

    #[test]
    fn two_by_two_real_determinant() {
        let m = ComplexMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let det = determinant(&m).unwrap();
        assert!((det - c(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn complex_determinant_frozen() {
        // det [[1+2i, 3], [0, 2-i]] = (1+2i)(2-i) = 4+3i, by hand.
        let m =
            ComplexMatrix::from_data(2, 2, vec![c(1.0, 2.0), c(3.0, 0.0), c(0.0, 0.0), c(2.0, -1.0)])
                .unwrap();
        let det = determinant(&m).unwrap();
        assert!((det - c(4.0, 3.0)).norm() < 1e-14);
    }

    #[test]
    fn matches_cofactor_oracle_up_to_4x4() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=4 {
            for _ in 0..8 {
                let m = random_matrix(&mut rng, n);
                let lu = determinant(&m).unwrap();
                let oracle = cofactor_det(&m);
                assert!(
                    (lu - oracle).norm() <= 1e-12 * oracle.norm().max(1.0),
                    "n={n}: {lu} vs oracle {oracle}"
                );
            }
        }
    }

    #[test]
    fn lu_reconstructs_pa() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_matrix(&mut rng, 6);
        let lu = lu_factor(&m).unwrap();
        assert!(!lu.is_singular());
        let n = 6;
        // Unpack L and U, rebuild P*A row order, compare.
        let mut l = ComplexMatrix::identity(n);
        let mut u = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i > j {
                    l.set(i, j, lu.factors().get(i, j));
                } else {
                    u.set(i, j, lu.factors().get(i, j));
                }
            }
        }
        let mut pa = m.clone();
        for k in 0..n {
            let p = lu.pivots()[k];
            if p != k {
                for j in 0..n {
                    let a = pa.get(k, j);
                    let b = pa.get(p, j);
                    pa.set(k, j, b);
                    pa.set(p, j, a);
                }
            }
        }
        let rebuilt = l.matmul(&u);
        assert!(rebuilt.sub(&pa).max_norm() < 1e-13 * m.max_norm().max(1.0));
    }

    #[test]
    fn singular_matrix_flagged_and_det_exactly_zero() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        let lu = lu_factor(&m).unwrap();
        assert!(lu.is_singular());
        assert_eq!(lu.determinant(), c(0.0, 0.0));
        let err = lu.solve(&ComplexMatrix::identity(2)).unwrap_err();
        match err {
            LinalgError::Singular { pivot } => assert_eq!(pivot, 1),
            other => panic!("expected singular error, got {other}"),
        }
    }

    #[test]
    fn solve_residual_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in [3usize, 8, 20] {
            let m = random_matrix(&mut rng, n);
            let rhs = random_matrix(&mut rng, n);
            let x = solve(&m, &rhs).unwrap();
            let resid = m.matmul(&x).sub(&rhs).max_norm();
            assert!(
                resid <= 1e-10 * m.max_norm() * x.max_norm().max(1.0),
                "n={n}: residual {resid}"
            );
        }
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..6 {
            let m = random_matrix(&mut rng, 7);
            let lu = lu_factor(&m).unwrap();
            if lu.rcond_estimate() < 1e-4 {
                continue; // keep to the well-conditioned contract
            }
            let inv = lu.inverse().unwrap();
            let back = inverse(&inv).unwrap();
            assert!(back.sub(&m).max_norm() < 1e-8 * m.max_norm());
            let eye = m.matmul(&inv);
            assert!(eye.sub(&ComplexMatrix::identity(7)).max_norm() < 1e-10);
        }
    }

    #[test]
    fn determinant_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in [2usize, 5, 9] {
            let a = random_matrix(&mut rng, n);
            let b = random_matrix(&mut rng, n);
            let lhs = determinant(&a.matmul(&b)).unwrap();
            let rhs = determinant(&a).unwrap() * determinant(&b).unwrap();
            assert!(
                (lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0),
                "n={n}: det(AB)={lhs} vs det(A)det(B)={rhs}"
            );
        }
    }

    #[test]
    fn determinant_of_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..5 {
            let a = random_matrix(&mut rng, 6);
            let d1 = determinant(&a).unwrap();
            let d2 = determinant(&a.transpose()).unwrap();
            assert!((d1 - d2).norm() <= 1e-12 * d1.norm().max(1.0));
        }
    }

    #[test]
    fn non_square_rejected() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            lu_factor(&m),
            Err(LinalgError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn non_finite_entry_rejected_on_construction() {
        let err = ComplexMatrix::from_data(1, 2, vec![c(1.0, 0.0), c(f64::NAN, 0.0)]).unwrap_err();
        assert!(matches!(err, LinalgError::NonFinite { row: 0, col: 1 }));
    }

    #[test]
    fn cholesky_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let b = random_matrix(&mut rng, 5);
        // b b^H + 5 I is Hermitian positive definite.
        let a = b
            .matmul(&b.adjoint())
            .add(&ComplexMatrix::identity(5).scaled(c(5.0, 0.0)));
        let l = cholesky(&a).unwrap();
        let rebuilt = l.matmul(&l.adjoint());
        assert!(rebuilt.sub(&a).max_norm() < 1e-12 * a.max_norm());
        for j in 0..5 {
            assert!(l.get(j, j).re > 0.0 && l.get(j, j).im == 0.0);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            cholesky(&m),
            Err(LinalgError::NotPositiveDefinite { pivot: 1 })
        ));
    }

    #[test]
    fn rcond_estimate_sane() {
        let eye = ComplexMatrix::identity(4);
        assert!((lu_factor(&eye).unwrap().rcond_estimate() - 1.0).abs() < 1e-15);
        let mut skew = ComplexMatrix::identity(3);
        skew.set(2, 2, c(1e-6, 0.0));
        let r = lu_factor(&skew).unwrap().rcond_estimate();
        assert!((r - 1e-6).abs() < 1e-18);
    }
}
