//! Matrix-valued Laurent symbols on the unit circle.
//!
//! A symbol is a finitely supported map `n -> f_n` of `N x N` complex
//! coefficient blocks, understood as `f(t) = sum_n f_n t^n` for `|t| = 1`.
//! Band edges are tracked from the stored support. Sampling happens on
//! power-of-two grids `t_j = exp(2*pi*i*j/M)` so Fourier coefficients can be
//! recovered by FFT.

use std::collections::BTreeMap;

use rustfft::FftPlanner;
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, LinalgError};
use crate::{pow2_at_least, C64};

/// Grid determinants with modulus at or below this are treated as singular
/// symbols (inverse, winding number, geometric mean all refuse).
pub const DET_GUARD: f64 = 1e-10;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum SymbolError {
    #[error("block size mismatch: {left} vs {right}")]
    BlockSizeMismatch { left: usize, right: usize },
    #[error("coefficient {index} must be {expected}x{expected}, got {rows}x{cols}")]
    BadCoefficientShape {
        index: i64,
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("block size must be at least 1")]
    ZeroBlockSize,
    #[error("sample grid size {size} is not a power of two >= 2")]
    BadGridSize { size: usize },
    #[error("sample count {count} differs from grid size {size}")]
    BadSampleCount { count: usize, size: usize },
    #[error(
        "grid of {size} points cannot resolve band (-{p},{q}); need at least {needed} (aliasing)"
    )]
    Aliasing {
        size: usize,
        p: usize,
        q: usize,
        needed: usize,
    },
    #[error("symbol is numerically singular on the grid: |det| = {det_abs:.3e} at angle {angle:.6}")]
    NearSingular { det_abs: f64, angle: f64 },
    #[error("winding number estimate {value:.4} is not within 0.1 of an integer")]
    UnstableWinding { value: f64 },
    #[error("operation requires winding number 0, got {winding}")]
    NonzeroWinding { winding: i64 },
    #[error("operation requires a scalar symbol, got block size {block_size}")]
    NotScalar { block_size: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Finitely supported matrix Laurent series.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSymbol {
    block_size: usize,
    coeffs: BTreeMap<i64, ComplexMatrix>,
}

impl LaurentSymbol {
    /// The zero symbol with the given block size.
    pub fn new(block_size: usize) -> Result<Self, SymbolError> {
        if block_size == 0 {
            return Err(SymbolError::ZeroBlockSize);
        }
        Ok(LaurentSymbol {
            block_size,
            coeffs: BTreeMap::new(),
        })
    }

    /// Constant symbol `f(t) = m`.
    pub fn constant(m: ComplexMatrix) -> Result<Self, SymbolError> {
        let mut s = Self::new(m.rows())?;
        if m.rows() != m.cols() {
            return Err(SymbolError::BadCoefficientShape {
                index: 0,
                expected: m.rows(),
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        s.set_coeff(0, m)?;
        Ok(s)
    }

    /// Identity symbol `f(t) = I`.
    pub fn identity(block_size: usize) -> Result<Self, SymbolError> {
        Self::constant(ComplexMatrix::identity(block_size))
    }

    /// Build from `(index, block)` pairs.
    pub fn from_coeffs(
        block_size: usize,
        coeffs: impl IntoIterator<Item = (i64, ComplexMatrix)>,
    ) -> Result<Self, SymbolError> {
        let mut s = Self::new(block_size)?;
        for (n, m) in coeffs {
            s.set_coeff(n, m)?;
        }
        Ok(s)
    }

    /// Build a scalar (1x1) symbol from `(index, value)` pairs.
    pub fn scalar(coeffs: impl IntoIterator<Item = (i64, C64)>) -> Self {
        let mut s = LaurentSymbol {
            block_size: 1,
            coeffs: BTreeMap::new(),
        };
        for (n, z) in coeffs {
            let m = ComplexMatrix::from_data(1, 1, vec![z]).expect("finite scalar coefficient");
            s.coeffs.insert(n, m);
        }
        s
    }

    pub fn set_coeff(&mut self, n: i64, m: ComplexMatrix) -> Result<(), SymbolError> {
        if m.rows() != self.block_size || m.cols() != self.block_size {
            return Err(SymbolError::BadCoefficientShape {
                index: n,
                expected: self.block_size,
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        self.coeffs.insert(n, m);
        Ok(())
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Stored coefficient, or the zero block.
    pub fn coeff(&self, n: i64) -> ComplexMatrix {
        self.coeffs
            .get(&n)
            .cloned()
            .unwrap_or_else(|| ComplexMatrix::zeros(self.block_size, self.block_size))
    }

    pub fn coeff_ref(&self, n: i64) -> Option<&ComplexMatrix> {
        self.coeffs.get(&n)
    }

    /// Iterate over the stored support in index order.
    pub fn support(&self) -> impl Iterator<Item = (i64, &ComplexMatrix)> {
        self.coeffs.iter().map(|(&n, m)| (n, m))
    }

    /// Band edges `(p, q)`: support is contained in `[-p, q]`.
    pub fn band(&self) -> (usize, usize) {
        let mut p = 0i64;
        let mut q = 0i64;
        for (&n, _) in &self.coeffs {
            if n < -p {
                p = -n;
            }
            if n > q {
                q = n;
            }
        }
        (p as usize, q as usize)
    }

    pub fn bandwidth(&self) -> usize {
        let (p, q) = self.band();
        p + q
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|m| m.max_norm() == 0.0)
    }

    /// Largest coefficient-entry modulus.
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs
            .values()
            .map(|m| m.max_norm())
            .fold(0.0, f64::max)
    }

    /// Drop stored blocks that are exactly zero.
    pub fn prune_zeros(&mut self) {
        self.coeffs.retain(|_, m| m.max_norm() != 0.0);
    }

    /// Keep only coefficients with `|n| <= trunc`.
    pub fn truncated(&self, trunc: usize) -> LaurentSymbol {
        let t = trunc as i64;
        LaurentSymbol {
            block_size: self.block_size,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&n, _)| -t <= n && n <= t)
                .map(|(&n, m)| (n, m.clone()))
                .collect(),
        }
    }

    /// Evaluate `f(t)` by direct summation over the support.
    pub fn evaluate(&self, t: C64) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.block_size, self.block_size);
        for (&n, m) in &self.coeffs {
            let w = t.powi(n as i32);
            out = out.add(&m.scaled(w));
        }
        out
    }

    /// Sample on the `m`-point power-of-two grid `t_j = exp(2 pi i j / m)`.
    pub fn sample(&self, m: usize) -> Result<SampleGrid, SymbolError> {
        if m < 2 || !m.is_power_of_two() {
            return Err(SymbolError::BadGridSize { size: m });
        }
        let samples = (0..m)
            .map(|j| {
                let theta = TWO_PI * j as f64 / m as f64;
                self.evaluate(C64::new(theta.cos(), theta.sin()))
            })
            .collect();
        SampleGrid::new(self.block_size, samples)
    }

    /// Index reflection `f~(t) = f(1/t)`: coefficient `n` moves to `-n`.
    pub fn reflect(&self) -> LaurentSymbol {
        LaurentSymbol {
            block_size: self.block_size,
            coeffs: self.coeffs.iter().map(|(&n, m)| (-n, m.clone())).collect(),
        }
    }

    /// Scalar multiple `lambda * f`.
    pub fn scaled(&self, s: C64) -> LaurentSymbol {
        LaurentSymbol {
            block_size: self.block_size,
            coeffs: self.coeffs.iter().map(|(&n, m)| (n, m.scaled(s))).collect(),
        }
    }

    /// Entrywise difference `f - g`.
    pub fn sub(&self, rhs: &LaurentSymbol) -> Result<LaurentSymbol, SymbolError> {
        if self.block_size != rhs.block_size {
            return Err(SymbolError::BlockSizeMismatch {
                left: self.block_size,
                right: rhs.block_size,
            });
        }
        let mut out = self.clone();
        for (&n, m) in &rhs.coeffs {
            let cur = out.coeff(n);
            out.coeffs.insert(n, cur.sub(m));
        }
        Ok(out)
    }

    /// Cauchy product `(f g)_n = sum_k f_k g_{n-k}`; bands add.
    pub fn multiply(&self, rhs: &LaurentSymbol) -> Result<LaurentSymbol, SymbolError> {
        if self.block_size != rhs.block_size {
            return Err(SymbolError::BlockSizeMismatch {
                left: self.block_size,
                right: rhs.block_size,
            });
        }
        let mut out = LaurentSymbol::new(self.block_size)?;
        for (&k, fk) in &self.coeffs {
            for (&l, gl) in &rhs.coeffs {
                let n = k + l;
                let prod = fk.matmul(gl);
                match out.coeffs.get_mut(&n) {
                    Some(acc) => *acc = acc.add(&prod),
                    None => {
                        out.coeffs.insert(n, prod);
                    }
                }
            }
        }
        out.prune_zeros();
        Ok(out)
    }

    /// Max-norm distance to another symbol, probed on an `m`-point grid.
    pub fn grid_distance(&self, rhs: &LaurentSymbol, m: usize) -> Result<f64, SymbolError> {
        if self.block_size != rhs.block_size {
            return Err(SymbolError::BlockSizeMismatch {
                left: self.block_size,
                right: rhs.block_size,
            });
        }
        let a = self.sample(m)?;
        let b = rhs.sample(m)?;
        let mut worst = 0.0f64;
        for j in 0..m {
            worst = worst.max(a.sample(j).sub(b.sample(j)).max_norm());
        }
        Ok(worst)
    }

    /// Pointwise inverse `f(t)^{-1}`, truncated to the band `[-trunc, trunc]`.
    ///
    /// Returns the truncated inverse together with the residual
    /// `max_grid || f(t) g(t) - I ||` of the truncated series `g`, which
    /// measures the truncation (not just the pointwise inversion) error.
    pub fn invert(&self, trunc: usize) -> Result<(LaurentSymbol, f64), SymbolError> {
        let (p, q) = self.band();
        let grid_size = pow2_at_least(4 * (p + q + 1), 2 * (2 * trunc + 2)).max(64);
        let grid = self.sample(grid_size)?;
        let n = self.block_size;
        let mut inv_samples = Vec::with_capacity(grid_size);
        for j in 0..grid_size {
            let s = grid.sample(j);
            let lu = linalg::lu_factor(s)?;
            let det = lu.determinant();
            if det.norm() <= DET_GUARD {
                return Err(SymbolError::NearSingular {
                    det_abs: det.norm(),
                    angle: TWO_PI * j as f64 / grid_size as f64,
                });
            }
            inv_samples.push(lu.inverse()?);
        }
        let inv_grid = SampleGrid::new(n, inv_samples)?;
        let g = coefficients_from_samples(&inv_grid, (trunc, trunc))?;
        // Truncation residual: resample the truncated series.
        let g_grid = g.sample(grid_size)?;
        let eye = ComplexMatrix::identity(n);
        let mut residual = 0.0f64;
        for j in 0..grid_size {
            let r = grid.sample(j).matmul(g_grid.sample(j)).sub(&eye).max_norm();
            residual = residual.max(r);
        }
        Ok((g, residual))
    }

    /// Lifted (continuous-branch) values of `log det f` along the grid,
    /// together with the raw winding estimate `(l_close - l_0).im / 2 pi`.
    fn lifted_log_det(&self, grid_size: usize) -> Result<(Vec<C64>, f64), SymbolError> {
        if grid_size < 2 || !grid_size.is_power_of_two() {
            return Err(SymbolError::BadGridSize { size: grid_size });
        }
        let grid = self.sample(grid_size)?;
        let mut dets = Vec::with_capacity(grid_size);
        for j in 0..grid_size {
            let det = linalg::determinant(grid.sample(j))?;
            if det.norm() <= DET_GUARD {
                return Err(SymbolError::NearSingular {
                    det_abs: det.norm(),
                    angle: TWO_PI * j as f64 / grid_size as f64,
                });
            }
            dets.push(det);
        }
        let mut lifted = Vec::with_capacity(grid_size);
        let mut l = dets[0].ln();
        lifted.push(l);
        for j in 1..grid_size {
            l += (dets[j] / dets[j - 1]).ln();
            lifted.push(l);
        }
        let closed = l + (dets[0] / dets[grid_size - 1]).ln();
        let winding = (closed - lifted[0]).im / TWO_PI;
        Ok((lifted, winding))
    }

    /// Winding number of `det f` around the origin, by phase unwrapping on an
    /// `m`-point grid. Errors if the unrounded estimate strays more than 0.1
    /// from an integer (grid too coarse) or the determinant nears zero.
    pub fn winding_number(&self, grid_size: usize) -> Result<i64, SymbolError> {
        let (_, w) = self.lifted_log_det(grid_size)?;
        let rounded = w.round();
        if (w - rounded).abs() > 0.1 {
            return Err(SymbolError::UnstableWinding { value: w });
        }
        Ok(rounded as i64)
    }

    /// Geometric mean `G(f) = exp( (1/2 pi) \int_0^{2 pi} log det f dθ )`,
    /// computed as the grid mean of the lifted log branch. Requires winding
    /// number zero so the branch closes.
    pub fn geometric_mean(&self, grid_size: usize) -> Result<C64, SymbolError> {
        let (lifted, w) = self.lifted_log_det(grid_size)?;
        let rounded = w.round();
        if (w - rounded).abs() > 0.1 {
            return Err(SymbolError::UnstableWinding { value: w });
        }
        if rounded as i64 != 0 {
            return Err(SymbolError::NonzeroWinding {
                winding: rounded as i64,
            });
        }
        let mean = lifted.iter().sum::<C64>() / C64::new(grid_size as f64, 0.0);
        Ok(mean.exp())
    }

    /// A grid size adequate for this symbol's band (used by callers that do
    /// not want to pick one by hand).
    pub fn default_grid(&self) -> usize {
        let (p, q) = self.band();
        pow2_at_least(4 * (p + q + 1), 64)
    }

    /// Fourier coefficients of the continuous branch of `log f` for a scalar
    /// symbol with winding number zero, for indices `-max_index..=max_index`.
    pub fn scalar_log_coefficients(
        &self,
        max_index: usize,
        grid_size: usize,
    ) -> Result<BTreeMap<i64, C64>, SymbolError> {
        if self.block_size != 1 {
            return Err(SymbolError::NotScalar {
                block_size: self.block_size,
            });
        }
        let m = pow2_at_least(grid_size, 2 * (2 * max_index + 2)).max(64);
        let (lifted, w) = self.lifted_log_det(m)?;
        let rounded = w.round();
        if (w - rounded).abs() > 0.1 {
            return Err(SymbolError::UnstableWinding { value: w });
        }
        if rounded as i64 != 0 {
            return Err(SymbolError::NonzeroWinding {
                winding: rounded as i64,
            });
        }
        let mut buf = lifted;
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(m).process(&mut buf);
        let mut out = BTreeMap::new();
        let scale = 1.0 / m as f64;
        for n in -(max_index as i64)..=(max_index as i64) {
            let idx = n.rem_euclid(m as i64) as usize;
            out.insert(n, buf[idx] * scale);
        }
        Ok(out)
    }

    /// Krein-algebra norm squared-sum: `sum_n (|n| + 1) ||f_n||_F^2`.
    ///
    /// Terms are grouped by `|n|` (negative index first inside a group, and
    /// the group subtotal formed before accumulation) so the value is exactly
    /// invariant under reflection.
    pub fn krein_norm(&self) -> f64 {
        let mut max_abs = 0i64;
        for (&n, _) in &self.coeffs {
            max_abs = max_abs.max(n.abs());
        }
        let mut total = 0.0f64;
        for k in 0..=max_abs {
            let weight = (k + 1) as f64;
            let mut group = 0.0f64;
            if k > 0 {
                if let Some(m) = self.coeffs.get(&(-k)) {
                    group += m.frobenius_norm().powi(2);
                }
            }
            if let Some(m) = self.coeffs.get(&k) {
                group += m.frobenius_norm().powi(2);
            }
            total += weight * group;
        }
        total
    }

    /// Krein-weighted tail of the analytic side beyond `beyond`:
    /// `sum_{n > beyond} (n + 1) ||f_n||_F^2` over stored coefficients.
    pub fn positive_krein_tail(&self, beyond: i64) -> f64 {
        self.coeffs
            .iter()
            .filter(|(&n, _)| n > beyond)
            .map(|(&n, m)| (n + 1) as f64 * m.frobenius_norm().powi(2))
            .sum()
    }
}

/// Samples of a symbol on the uniform power-of-two grid.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    block_size: usize,
    samples: Vec<ComplexMatrix>,
}

impl SampleGrid {
    pub fn new(block_size: usize, samples: Vec<ComplexMatrix>) -> Result<Self, SymbolError> {
        let size = samples.len();
        if size < 2 || !size.is_power_of_two() {
            return Err(SymbolError::BadGridSize { size });
        }
        for s in &samples {
            if s.rows() != block_size || s.cols() != block_size {
                return Err(SymbolError::BadCoefficientShape {
                    index: 0,
                    expected: block_size,
                    rows: s.rows(),
                    cols: s.cols(),
                });
            }
        }
        Ok(SampleGrid {
            block_size,
            samples,
        })
    }

    pub fn size(&self) -> usize {
        self.samples.len()
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn sample(&self, j: usize) -> &ComplexMatrix {
        &self.samples[j]
    }

    /// Grid angle of node `j`.
    pub fn angle(&self, j: usize) -> f64 {
        TWO_PI * j as f64 / self.size() as f64
    }
}

/// Recover coefficients `f_n`, `n` in `[-p, q]`, from grid samples by
/// entrywise inverse DFT. The grid must satisfy `M >= 2 (p + q + 1)` or the
/// call fails with an aliasing error.
pub fn coefficients_from_samples(
    grid: &SampleGrid,
    band: (usize, usize),
) -> Result<LaurentSymbol, SymbolError> {
    let (p, q) = band;
    let m = grid.size();
    let needed = 2 * (p + q + 1);
    if m < needed {
        return Err(SymbolError::Aliasing {
            size: m,
            p,
            q,
            needed,
        });
    }
    let n = grid.block_size();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    let scale = 1.0 / m as f64;
    let mut blocks: BTreeMap<i64, ComplexMatrix> = BTreeMap::new();
    for idx in -(p as i64)..=(q as i64) {
        blocks.insert(idx, ComplexMatrix::zeros(n, n));
    }
    let mut buf = vec![C64::new(0.0, 0.0); m];
    for r in 0..n {
        for c in 0..n {
            for j in 0..m {
                buf[j] = grid.sample(j).get(r, c);
            }
            fft.process(&mut buf);
            // Forward DFT: X_k = sum_j x_j e^{-2 pi i jk/M}, so the Fourier
            // coefficient f_n is X_{n mod M} / M.
            for idx in -(p as i64)..=(q as i64) {
                let k = idx.rem_euclid(m as i64) as usize;
                blocks
                    .get_mut(&idx)
                    .expect("preallocated block")
                    .set(r, c, buf[k] * scale);
            }
        }
    }
    LaurentSymbol::from_coeffs(n, blocks)
}
