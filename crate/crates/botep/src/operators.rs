//! Finite sections of Toeplitz, Hankel, and product-kernel operators.
//!
//! For a symbol `f` with blocks `f_n`, the Toeplitz operator has block matrix
//! `(f_{j-k})`, the Hankel operator `(f_{j+k+1})`, and the reflected Hankel
//! operator `(f_{-j-k-1})`, all over block indices `j, k >= 0`. The kernel of
//! interest is
//!
//! ```text
//! K = H(b) H(c~),     c~(t) = c(1/t),
//! ```
//!
//! materialized as the exact product of the two stored Hankel sections. For
//! finitely supported `b` and `c` whose bands the section covers, every entry
//! of that product already equals the corresponding entry of the infinite
//! operator, because the discarded factors are genuinely zero; the part that
//! is lost to truncation is summarized by a Krein-weighted tail bound.

use thiserror::Error;

use crate::linalg::ComplexMatrix;
use crate::symbol::LaurentSymbol;
use crate::C64;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("block size mismatch: {left} vs {right}")]
    BlockSizeMismatch { left: usize, right: usize },
    #[error("compression start {start} must be below the kernel order {order}")]
    CompressionOutOfRange { start: usize, order: usize },
}

/// `n x n` block Toeplitz section `(f_{j-k})`, as an `nN x nN` matrix.
pub fn toeplitz_section(f: &LaurentSymbol, n: usize) -> ComplexMatrix {
    let bs = f.block_size();
    let mut out = ComplexMatrix::zeros(n * bs, n * bs);
    for j in 0..n {
        for k in 0..n {
            if let Some(m) = f.coeff_ref(j as i64 - k as i64) {
                out.set_block(j * bs, k * bs, m);
            }
        }
    }
    out
}

/// `m x m` block Hankel section `(f_{j+k+1})`, as an `mN x mN` matrix.
pub fn hankel_section(f: &LaurentSymbol, m: usize) -> ComplexMatrix {
    let bs = f.block_size();
    let mut out = ComplexMatrix::zeros(m * bs, m * bs);
    for j in 0..m {
        for k in 0..m {
            if let Some(blk) = f.coeff_ref((j + k + 1) as i64) {
                out.set_block(j * bs, k * bs, blk);
            }
        }
    }
    out
}

/// `m x m` block section of the reflected Hankel operator `(f_{-j-k-1})`;
/// identical to `hankel_section(&f.reflect(), m)`.
pub fn hankel_reflect_section(f: &LaurentSymbol, m: usize) -> ComplexMatrix {
    let bs = f.block_size();
    let mut out = ComplexMatrix::zeros(m * bs, m * bs);
    for j in 0..m {
        for k in 0..m {
            if let Some(blk) = f.coeff_ref(-((j + k + 1) as i64)) {
                out.set_block(j * bs, k * bs, blk);
            }
        }
    }
    out
}

/// Rectangular block section of `K = H(b) H(c~)` with block rows
/// `row0 .. row0 + rows` and block columns `col0 .. col0 + cols`, evaluated
/// entrywise from the defining series
///
/// ```text
/// K_{jk} = sum_{r >= 0} b_{j+r+1} c_{-r-k-1}
/// ```
///
/// (a finite sum for stored coefficients). Whenever a `kernel_k` section
/// covers the bands of `b` and `c`, its entries agree with this series up to
/// floating-point associativity, so this is both the independent oracle for
/// kernel entries and the cheap route to far-out sub-blocks: the cost depends
/// only on the requested block and the bands, never on `row0 + rows` itself.
pub fn kernel_block(
    b: &LaurentSymbol,
    c: &LaurentSymbol,
    row0: usize,
    col0: usize,
    rows: usize,
    cols: usize,
) -> Result<ComplexMatrix, OperatorError> {
    if b.block_size() != c.block_size() {
        return Err(OperatorError::BlockSizeMismatch {
            left: b.block_size(),
            right: c.block_size(),
        });
    }
    let bs = b.block_size();
    let (_, q_b) = b.band();
    let (p_c, _) = c.band();
    let mut out = ComplexMatrix::zeros(rows * bs, cols * bs);
    for j in 0..rows {
        let row = row0 + j;
        if row + 1 > q_b {
            continue; // b_{row+r+1} vanishes for every r >= 0
        }
        for k in 0..cols {
            let col = col0 + k;
            if col + 1 > p_c {
                continue; // c_{-r-col-1} vanishes for every r >= 0
            }
            let r_max = (q_b - row - 1).min(p_c - col - 1);
            let mut acc = ComplexMatrix::zeros(bs, bs);
            let mut nonzero = false;
            // Ascending r keeps the accumulation order fixed, so sections of
            // different extent agree exactly on shared entries.
            for r in 0..=r_max {
                let bm = b.coeff_ref((row + r + 1) as i64);
                let cm = c.coeff_ref(-((r + col + 1) as i64));
                if let (Some(bm), Some(cm)) = (bm, cm) {
                    acc = acc.add(&bm.matmul(cm));
                    nonzero = true;
                }
            }
            if nonzero {
                out.set_block(j * bs, k * bs, &acc);
            }
        }
    }
    Ok(out)
}

/// Leading `order x order` block section of `K = H(b) H(c~)`, stored as the
/// exact product of the two Hankel sections, with a bound on the mass the
/// section discards.
#[derive(Debug, Clone)]
pub struct TruncatedKernel {
    block_size: usize,
    order: usize,
    matrix: ComplexMatrix,
    tail_bound: f64,
}

impl TruncatedKernel {
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Number of block rows (and columns) retained.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Scalar dimension `order * block_size`.
    pub fn dim(&self) -> usize {
        self.order * self.block_size
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Cauchy–Schwarz bound on the discarded tail: the product of the square
    /// roots of the Krein-weighted coefficient tails of `b` (analytic side)
    /// and reflected `c` beyond the section order. Zero once the section
    /// covers both bands.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Section of the compression `Q_n K Q_n` in trailing coordinates: the
    /// square sub-block with block rows and columns `start .. order`. This is
    /// the only part of `Q_n K Q_n` that is not identically zero.
    pub fn compress_tail(&self, start: usize) -> Result<ComplexMatrix, OperatorError> {
        if start >= self.order {
            return Err(OperatorError::CompressionOutOfRange {
                start,
                order: self.order,
            });
        }
        let bs = self.block_size;
        let side = (self.order - start) * bs;
        Ok(self.matrix.block(start * bs, start * bs, side, side))
    }
}

/// Build the leading `m x m` block section of `K = H(b) H(c~)` as the literal
/// product `hankel_section(b, m) * hankel_reflect_section(c, m)`.
///
/// A section that does not cover the stored bands of `b` and `c` is legal but
/// carries genuine truncation error; `tail_bound` quantifies it and shrinks
/// to zero as `m` reaches the bands.
pub fn kernel_k(
    b: &LaurentSymbol,
    c: &LaurentSymbol,
    m: usize,
) -> Result<TruncatedKernel, OperatorError> {
    if b.block_size() != c.block_size() {
        return Err(OperatorError::BlockSizeMismatch {
            left: b.block_size(),
            right: c.block_size(),
        });
    }
    let matrix = hankel_section(b, m).matmul(&hankel_reflect_section(c, m));
    Ok(TruncatedKernel {
        block_size: b.block_size(),
        order: m,
        matrix,
        tail_bound: kernel_tail_bound(b, c, m),
    })
}

/// Free-function form of [`TruncatedKernel::compress_tail`].
pub fn compress_tail(k: &TruncatedKernel, start: usize) -> Result<ComplexMatrix, OperatorError> {
    k.compress_tail(start)
}

/// Trailing `(m - start)` block rows and columns of the `m`-section kernel —
/// the same matrix `compress_tail(kernel_k(b, c, m)?, start)` returns, entry
/// for entry — assembled from two Hankel strips whose width is clipped to
/// the band of `b`, so the cost scales with `m - start` and the bands rather
/// than with `m` itself. Columns dropped from the strips are exactly those
/// where the left strip vanishes, and the product skips zero left entries in
/// ascending order either way, so the two routes agree bit for bit.
pub fn kernel_trailing_section(
    b: &LaurentSymbol,
    c: &LaurentSymbol,
    start: usize,
    m: usize,
) -> Result<ComplexMatrix, OperatorError> {
    if b.block_size() != c.block_size() {
        return Err(OperatorError::BlockSizeMismatch {
            left: b.block_size(),
            right: c.block_size(),
        });
    }
    if start >= m {
        return Err(OperatorError::CompressionOutOfRange { start, order: m });
    }
    let bs = b.block_size();
    let (_, q_b) = b.band();
    let inner = m.min(q_b);
    let rows = (m - start) * bs;
    let zero = C64::new(0.0, 0.0);
    let hb = ComplexMatrix::from_fn(rows, inner * bs, |x, z| {
        let j = start + x / bs;
        let r = z / bs;
        b.coeff_ref((j + r + 1) as i64)
            .map(|blk| blk.get(x % bs, z % bs))
            .unwrap_or(zero)
    });
    let hc = ComplexMatrix::from_fn(inner * bs, rows, |z, y| {
        let r = z / bs;
        let k = start + y / bs;
        c.coeff_ref(-((r + k + 1) as i64))
            .map(|blk| blk.get(z % bs, y % bs))
            .unwrap_or(zero)
    });
    Ok(hb.matmul(&hc))
}

/// `sqrt(tail_K(b, m)) * sqrt(tail_K(c~, m))` where `tail_K(f, m)` is the
/// Krein-weighted coefficient mass of the analytic side beyond index `m`.
pub fn kernel_tail_bound(b: &LaurentSymbol, c: &LaurentSymbol, m: usize) -> f64 {
    let tb = b.positive_krein_tail(m as i64);
    let tc = c.reflect().positive_krein_tail(m as i64);
    tb.sqrt() * tc.sqrt()
}
