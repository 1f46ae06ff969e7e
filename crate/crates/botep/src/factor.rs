//! Wiener-Hopf factorization of matrix symbols.
//!
//! A factorization set holds the two one-sided factorizations of an
//! invertible symbol `a` on the unit circle:
//!
//! ```text
//! a = u_- u_+      (left:  u_- antianalytic, u_+ analytic)
//! a = v_+ v_-      (right: v_+ analytic,    v_- antianalytic)
//! ```
//!
//! normalized so that the constant blocks of `u_-` and `v_-` are the
//! identity, which pins each factorization uniquely. From the four factors
//! the quotient pair
//!
//! ```text
//! b = v_- u_+^{-1},    c = u_-^{-1} v_+,    b c = I
//! ```
//!
//! is derived and cached; `b` and `c` feed the product kernel in
//! [`crate::operators`].
//!
//! Three construction routes are provided: a log/exp route for scalar
//! symbols, a Bauer-type route (trailing rows of banded Cholesky factors of
//! growing Toeplitz sections) for Hermitian positive definite block symbols,
//! and validated explicit factors for everything else.

use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, LinalgError};
use crate::symbol::{LaurentSymbol, SymbolError};
use crate::{pow2_at_least, C64};

/// Grid max-norm tolerance for accepting a factorization.
pub const FACTORIZATION_TOL: f64 = 1e-10;

/// Bauer iteration stops when the trailing Cholesky block row moves by less
/// than this between section doublings.
pub const BAUER_STEP_TOL: f64 = 1e-8;

/// Residual tolerance for the Bauer route: an iteration stopped at
/// [`BAUER_STEP_TOL`] cannot guarantee reconstruction much below it.
pub const BAUER_RESIDUAL_TOL: f64 = 1e-7;

/// Largest scalar dimension of a Toeplitz section used by the Bauer route.
pub const BAUER_SECTION_CAP: usize = 4096;

#[derive(Debug, Error)]
pub enum FactorError {
    #[error("scalar factorization requires block size 1, got {block_size}")]
    NotScalar { block_size: usize },
    #[error("block size mismatch among factors: {left} vs {right}")]
    BlockSizeMismatch { left: usize, right: usize },
    #[error("symbol is not Hermitian on the circle (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("symbol is not positive definite (Cholesky pivot {pivot})")]
    NotPositive { pivot: usize },
    #[error(
        "Bauer iteration did not converge below {tol:.3e} within section cap {cap} (last step {achieved:.3e})"
    )]
    Convergence { achieved: f64, tol: f64, cap: usize },
    #[error("factor {factor} has a coefficient on the wrong side (index {index})")]
    TriangularSupport { factor: &'static str, index: i64 },
    #[error("factor {factor} has a singular constant block")]
    SingularConstantTerm { factor: &'static str },
    #[error("factor {factor} is not invertible in its half plane (winding {winding})")]
    InvalidFactor { factor: &'static str, winding: i64 },
    #[error("u_- u_+ and v_+ v_- disagree: coefficient distance {distance:.3e}")]
    ProductMismatch { distance: f64 },
    #[error("factorization residual {residual:.3e} exceeds tolerance {tol:.3e} (truncation too small)")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Both one-sided factorizations of a symbol, minus-normalized, with the
/// derived quotient pair cached.
#[derive(Debug, Clone)]
pub struct FactorizationSet {
    u_minus: LaurentSymbol,
    u_plus: LaurentSymbol,
    v_plus: LaurentSymbol,
    v_minus: LaurentSymbol,
    b: LaurentSymbol,
    c: LaurentSymbol,
    truncation_order: usize,
    residual_left: f64,
    residual_right: f64,
    residual_bc: f64,
}

impl FactorizationSet {
    pub fn u_minus(&self) -> &LaurentSymbol {
        &self.u_minus
    }

    pub fn u_plus(&self) -> &LaurentSymbol {
        &self.u_plus
    }

    pub fn v_plus(&self) -> &LaurentSymbol {
        &self.v_plus
    }

    pub fn v_minus(&self) -> &LaurentSymbol {
        &self.v_minus
    }

    /// Cached quotient `b = v_- u_+^{-1}`.
    pub fn b(&self) -> &LaurentSymbol {
        &self.b
    }

    /// Cached quotient `c = u_-^{-1} v_+`.
    pub fn c(&self) -> &LaurentSymbol {
        &self.c
    }

    pub fn block_size(&self) -> usize {
        self.u_plus.block_size()
    }

    /// Truncation order used for the cached series inverses.
    pub fn truncation_order(&self) -> usize {
        self.truncation_order
    }

    /// Grid max-norm of `u_- u_+ - a`.
    pub fn residual_left(&self) -> f64 {
        self.residual_left
    }

    /// Grid max-norm of `v_+ v_- - a`.
    pub fn residual_right(&self) -> f64 {
        self.residual_right
    }

    /// Grid max-norm of `b c - I`.
    pub fn residual_bc(&self) -> f64 {
        self.residual_bc
    }

    /// Worst of the three residuals.
    pub fn residual(&self) -> f64 {
        self.residual_left.max(self.residual_right).max(self.residual_bc)
    }

    /// The symbol represented by the set, reassembled as `u_- u_+`.
    pub fn symbol(&self) -> Result<LaurentSymbol, FactorError> {
        Ok(self.u_minus.multiply(&self.u_plus)?)
    }

    /// Truncated series inverse of `u_+` (analytic, coefficients `0..=trunc`).
    pub fn u_plus_inverse(&self, trunc: usize) -> Result<LaurentSymbol, FactorError> {
        invert_analytic(&self.u_plus, trunc)
    }

    /// Truncated series inverse of `u_-` (antianalytic, `-trunc..=0`).
    pub fn u_minus_inverse(&self, trunc: usize) -> Result<LaurentSymbol, FactorError> {
        Ok(invert_analytic(&self.u_minus.reflect(), trunc)?.reflect())
    }

    /// Recompute the quotient pair at truncation `trunc` (both results are
    /// truncated to the band `[-trunc, trunc]`).
    pub fn derive_bc(&self, trunc: usize) -> Result<(LaurentSymbol, LaurentSymbol), FactorError> {
        let u_plus_inv = invert_analytic(&self.u_plus, trunc)?;
        let u_minus_inv = invert_analytic(&self.u_minus.reflect(), trunc)?.reflect();
        let b = self.v_minus.multiply(&u_plus_inv)?.truncated(trunc);
        let c = u_minus_inv.multiply(&self.v_plus)?.truncated(trunc);
        Ok((b, c))
    }

    /// Factor a scalar symbol with winding number zero through the Fourier
    /// coefficients of `log a`: the analytic part exponentiates to `u_+`
    /// (which also carries `exp((log a)_0)`), the antianalytic part to `u_-`.
    /// The left and right factorizations coincide for scalars.
    pub fn factor_scalar(a: &LaurentSymbol, trunc: usize) -> Result<Self, FactorError> {
        if a.block_size() != 1 {
            return Err(FactorError::NotScalar {
                block_size: a.block_size(),
            });
        }
        let logc = a.scalar_log_coefficients(trunc, a.default_grid())?;
        let mut h_plus = vec![C64::new(0.0, 0.0); trunc + 1];
        let mut h_minus = vec![C64::new(0.0, 0.0); trunc + 1];
        for k in 1..=trunc {
            h_plus[k] = logc[&(k as i64)];
            h_minus[k] = logc[&-(k as i64)];
        }
        let g0 = logc[&0].exp();
        let plus = series_exp(&h_plus);
        let minus = series_exp(&h_minus);
        let u_plus = LaurentSymbol::scalar(
            plus.iter().enumerate().map(|(n, &g)| (n as i64, g * g0)),
        );
        let u_minus =
            LaurentSymbol::scalar(minus.iter().enumerate().map(|(n, &g)| (-(n as i64), g)));
        Self::assemble(
            u_minus.clone(),
            u_plus.clone(),
            u_plus,
            u_minus,
            a,
            trunc,
            FACTORIZATION_TOL,
        )
    }

    /// Factor a Hermitian positive definite block symbol by the Bauer route.
    ///
    /// The trailing block row of the Cholesky factor of the `m x m` block
    /// Toeplitz section converges (as `m` grows) to a polynomial `w` with
    /// `a = w w^*`, which yields the right factorization; running the same
    /// procedure on the transposed-coefficient symbol yields the left one.
    /// Starting from `section` block rows (0 = automatic), sections double
    /// until the trailing row moves by less than [`BAUER_STEP_TOL`], capped
    /// at [`BAUER_SECTION_CAP`] scalar rows.
    pub fn factor_block_bauer(
        a: &LaurentSymbol,
        trunc: usize,
        section: usize,
    ) -> Result<Self, FactorError> {
        check_positive_on_grid(a)?;
        let w = bauer_polynomial(a, section)?;
        let omega = bauer_polynomial(&transpose_coeffs(a), section)?;

        // Right: a = w w^*; pull the constant through so (v_-)_0 = I.
        let w0_h = w.coeff(0).adjoint();
        let w0_h_inv = linalg::inverse(&w0_h)?;
        let v_plus = const_mul_right(&w, &w0_h);
        let v_minus = const_mul_left(&w0_h_inv, &star(&w));

        // Left: a^T = omega omega^* gives a = (omega^*)^T omega^T = u_- u_+,
        // then the constant block of u_- is pulled out the same way.
        let u_minus_raw = star(&transpose_coeffs(&omega));
        let u_plus_raw = transpose_coeffs(&omega);
        let d = u_minus_raw.coeff(0);
        let d_inv = linalg::inverse(&d)?;
        let u_minus = const_mul_right(&u_minus_raw, &d_inv);
        let u_plus = const_mul_left(&d, &u_plus_raw);

        Self::assemble(
            u_minus,
            u_plus,
            v_plus,
            v_minus,
            a,
            trunc,
            BAUER_RESIDUAL_TOL,
        )
    }

    /// Build a set from externally supplied factors, after validating block
    /// sizes, one-sided supports, invertibility of each factor in its half
    /// plane, and agreement of the two products. Factors are re-normalized
    /// so the constant blocks of `u_-` and `v_-` are the identity; the
    /// represented symbol is taken to be `u_- u_+`.
    pub fn from_explicit_factors(
        u_minus: LaurentSymbol,
        u_plus: LaurentSymbol,
        v_plus: LaurentSymbol,
        v_minus: LaurentSymbol,
        trunc: usize,
    ) -> Result<Self, FactorError> {
        let bs = u_plus.block_size();
        for other in [
            u_minus.block_size(),
            v_plus.block_size(),
            v_minus.block_size(),
        ] {
            if other != bs {
                return Err(FactorError::BlockSizeMismatch {
                    left: bs,
                    right: other,
                });
            }
        }
        check_support("u_plus", &u_plus, true)?;
        check_support("v_plus", &v_plus, true)?;
        check_support("u_minus", &u_minus, false)?;
        check_support("v_minus", &v_minus, false)?;
        check_half_plane_invertible("u_plus", &u_plus)?;
        check_half_plane_invertible("v_plus", &v_plus)?;
        check_half_plane_invertible("u_minus", &u_minus.reflect())?;
        check_half_plane_invertible("v_minus", &v_minus.reflect())?;

        let (u_minus, u_plus) = normalize_pair("u_minus", u_minus, u_plus, true)?;
        let (v_minus, v_plus) = normalize_pair("v_minus", v_minus, v_plus, false)?;

        let left = u_minus.multiply(&u_plus)?;
        let right = v_plus.multiply(&v_minus)?;
        let distance = left.sub(&right)?.max_coeff_norm();
        if distance > FACTORIZATION_TOL {
            return Err(FactorError::ProductMismatch { distance });
        }
        Self::assemble(u_minus, u_plus, v_plus, v_minus, &left, trunc, FACTORIZATION_TOL)
    }

    /// Shared tail of all construction routes: derive and cache `b`, `c`,
    /// measure the three residuals against `a` on a verification grid, and
    /// refuse the set if they exceed the route tolerance (`b c - I` gets the
    /// usual 10x headroom since it stacks two series inversions).
    fn assemble(
        u_minus: LaurentSymbol,
        u_plus: LaurentSymbol,
        v_plus: LaurentSymbol,
        v_minus: LaurentSymbol,
        a: &LaurentSymbol,
        trunc: usize,
        tol: f64,
    ) -> Result<Self, FactorError> {
        let mut set = FactorizationSet {
            u_minus,
            u_plus,
            v_plus,
            v_minus,
            b: LaurentSymbol::identity(a.block_size())?,
            c: LaurentSymbol::identity(a.block_size())?,
            truncation_order: trunc,
            residual_left: 0.0,
            residual_right: 0.0,
            residual_bc: 0.0,
        };
        let (b, c) = set.derive_bc(trunc)?;
        set.b = b;
        set.c = c;
        let grid = pow2_at_least(4 * trunc + 8, a.default_grid());
        set.residual_left = set.u_minus.multiply(&set.u_plus)?.grid_distance(a, grid)?;
        set.residual_right = set.v_plus.multiply(&set.v_minus)?.grid_distance(a, grid)?;
        let eye = LaurentSymbol::identity(a.block_size())?;
        set.residual_bc = set.b.multiply(&set.c)?.grid_distance(&eye, grid)?;
        let worst = set.residual_left.max(set.residual_right);
        if worst > tol {
            return Err(FactorError::ResidualTooLarge {
                residual: worst,
                tol,
            });
        }
        if set.residual_bc > 10.0 * tol {
            return Err(FactorError::ResidualTooLarge {
                residual: set.residual_bc,
                tol: 10.0 * tol,
            });
        }
        Ok(set)
    }
}

/// `g = exp(h)` for a power series with `h_0 = 0`, via the derivative
/// recurrence `n g_n = sum_{k=1}^{n} k h_k g_{n-k}`; `h[0]` is ignored.
fn series_exp(h: &[C64]) -> Vec<C64> {
    let len = h.len();
    let mut g = vec![C64::new(0.0, 0.0); len];
    g[0] = C64::new(1.0, 0.0);
    for n in 1..len {
        let mut acc = C64::new(0.0, 0.0);
        for k in 1..=n {
            acc += C64::new(k as f64, 0.0) * h[k] * g[n - k];
        }
        g[n] = acc / C64::new(n as f64, 0.0);
    }
    g
}

/// Inverse of an analytic symbol with invertible constant block, truncated at
/// `trunc`, by the triangular recursion
/// `g_n = -f_0^{-1} sum_{k=1}^{n} f_k g_{n-k}`.
///
/// This agrees with grid-based inversion to roundoff while keeping the
/// support exactly one-sided, which preserves the analytic/antianalytic
/// split of the derived quotients.
fn invert_analytic(f: &LaurentSymbol, trunc: usize) -> Result<LaurentSymbol, FactorError> {
    let (p, q) = f.band();
    if p != 0 {
        return Err(FactorError::TriangularSupport {
            factor: "analytic inverse input",
            index: -(p as i64),
        });
    }
    let f0_inv = linalg::inverse(&f.coeff(0))?;
    let bs = f.block_size();
    let mut g: Vec<ComplexMatrix> = Vec::with_capacity(trunc + 1);
    g.push(f0_inv.clone());
    for n in 1..=trunc {
        let mut acc = ComplexMatrix::zeros(bs, bs);
        for k in 1..=n.min(q) {
            if let Some(fk) = f.coeff_ref(k as i64) {
                acc = acc.add(&fk.matmul(&g[n - k]));
            }
        }
        g.push(f0_inv.matmul(&acc).scaled(C64::new(-1.0, 0.0)));
    }
    let mut out = LaurentSymbol::new(bs)?;
    for (n, m) in g.into_iter().enumerate() {
        out.set_coeff(n as i64, m)?;
    }
    out.prune_zeros();
    Ok(out)
}

/// Coefficient-wise transpose: `f_n -> f_n^T`, indices unchanged.
fn transpose_coeffs(f: &LaurentSymbol) -> LaurentSymbol {
    LaurentSymbol::from_coeffs(f.block_size(), f.support().map(|(n, m)| (n, m.transpose())))
        .expect("shape preserved")
}

/// Adjoint on the circle: `f^*(t) = f(t)^H`, i.e. `f_n -> f_n^H` at `-n`.
fn star(f: &LaurentSymbol) -> LaurentSymbol {
    LaurentSymbol::from_coeffs(f.block_size(), f.support().map(|(n, m)| (-n, m.adjoint())))
        .expect("shape preserved")
}

/// Multiply every coefficient by a constant block on the left.
fn const_mul_left(m: &ComplexMatrix, f: &LaurentSymbol) -> LaurentSymbol {
    LaurentSymbol::from_coeffs(f.block_size(), f.support().map(|(n, c)| (n, m.matmul(c))))
        .expect("shape preserved")
}

/// Multiply every coefficient by a constant block on the right.
fn const_mul_right(f: &LaurentSymbol, m: &ComplexMatrix) -> LaurentSymbol {
    LaurentSymbol::from_coeffs(f.block_size(), f.support().map(|(n, c)| (n, c.matmul(m))))
        .expect("shape preserved")
}

fn check_support(
    name: &'static str,
    f: &LaurentSymbol,
    analytic: bool,
) -> Result<(), FactorError> {
    for (n, m) in f.support() {
        if m.max_norm() == 0.0 {
            continue;
        }
        if (analytic && n < 0) || (!analytic && n > 0) {
            return Err(FactorError::TriangularSupport { factor: name, index: n });
        }
    }
    Ok(())
}

/// An analytic factor is invertible in the closed disk iff `det` does not
/// vanish on the circle and has winding number zero (argument principle).
/// Antianalytic factors are checked through their reflection.
fn check_half_plane_invertible(
    name: &'static str,
    analytic: &LaurentSymbol,
) -> Result<(), FactorError> {
    let winding = analytic.winding_number(analytic.default_grid())?;
    if winding != 0 {
        return Err(FactorError::InvalidFactor {
            factor: name,
            winding,
        });
    }
    Ok(())
}

/// Gauge-fix a pair so the minus factor has identity constant block. For the
/// left pair (`left = true`) the constant moves into `u_+` from the left;
/// for the right pair it moves into `v_+` from the right.
fn normalize_pair(
    minus_name: &'static str,
    minus: LaurentSymbol,
    plus: LaurentSymbol,
    left: bool,
) -> Result<(LaurentSymbol, LaurentSymbol), FactorError> {
    let d = minus.coeff(0);
    let lu = linalg::lu_factor(&d)?;
    if lu.is_singular() {
        return Err(FactorError::SingularConstantTerm { factor: minus_name });
    }
    let d_inv = lu.inverse()?;
    if left {
        Ok((const_mul_right(&minus, &d_inv), const_mul_left(&d, &plus)))
    } else {
        Ok((const_mul_left(&d_inv, &minus), const_mul_right(&plus, &d)))
    }
}

/// Positivity surrogate for the Bauer pre-condition: Hermitian coefficient
/// symmetry plus a Cholesky probe of every sample on the default grid (a
/// Cholesky failure is the practical min-eigenvalue test).
fn check_positive_on_grid(a: &LaurentSymbol) -> Result<(), FactorError> {
    let (p, q) = a.band();
    let mut deviation = 0.0f64;
    for n in 0..=p.max(q) as i64 {
        let dev = a.coeff(-n).sub(&a.coeff(n).adjoint()).max_norm();
        deviation = deviation.max(dev);
    }
    if deviation > 1e-12 * a.max_coeff_norm().max(1.0) {
        return Err(FactorError::NotHermitian { deviation });
    }
    let grid = a.sample(a.default_grid())?;
    for j in 0..grid.size() {
        // Symmetrize to scrub sampling roundoff before the probe.
        let s = grid.sample(j);
        let herm = s.add(&s.adjoint()).scaled(C64::new(0.5, 0.0));
        if linalg::cholesky(&herm).is_err() {
            return Err(FactorError::NotPositive { pivot: j });
        }
    }
    Ok(())
}

/// Trailing block row of the Cholesky factor of the `m x m` block Toeplitz
/// section, as the polynomial coefficients `w_0 .. w_q`.
fn bauer_trailing_row(a: &LaurentSymbol, m: usize) -> Result<Vec<ComplexMatrix>, FactorError> {
    let bs = a.block_size();
    let (_, q) = a.band();
    let dim = m * bs;
    let bw = (q * bs + bs - 1).min(dim - 1);
    let floor = a.max_coeff_norm() * 1e-13;

    // Banded storage: row r keeps columns r-bw ..= r at offsets 0..=bw.
    let zero = C64::new(0.0, 0.0);
    let mut band = vec![zero; dim * (bw + 1)];
    let idx = |r: usize, c: usize| r * (bw + 1) + (c + bw - r);
    let entry = |r: usize, s: usize| -> C64 {
        let (j, k) = (r / bs, s / bs);
        a.coeff_ref(j as i64 - k as i64)
            .map(|blk| blk.get(r % bs, s % bs))
            .unwrap_or(zero)
    };

    for r in 0..dim {
        let lo = r.saturating_sub(bw);
        for s in lo..=r {
            let klo = lo.max(s.saturating_sub(bw));
            let mut sum = entry(r, s);
            for k in klo..s {
                sum -= band[idx(r, k)] * band[idx(s, k)].conj();
            }
            if s < r {
                band[idx(r, s)] = sum / band[idx(s, s)];
            } else {
                if sum.re <= floor || !sum.re.is_finite() {
                    return Err(FactorError::NotPositive { pivot: r });
                }
                band[idx(r, r)] = C64::new(sum.re.sqrt(), 0.0);
            }
        }
    }

    let keep = q.min(m - 1);
    let mut w = Vec::with_capacity(keep + 1);
    for k in 0..=keep {
        let mut blk = ComplexMatrix::zeros(bs, bs);
        for s in 0..bs {
            for u in 0..bs {
                let r = (m - 1) * bs + s;
                let col = (m - 1 - k) * bs + u;
                // The factor is lower triangular and banded: anything above
                // the scalar diagonal or below the band is structurally zero
                // (and absent from the banded storage).
                let v = if col <= r && col + bw >= r {
                    band[idx(r, col)]
                } else {
                    zero
                };
                blk.set(s, u, v);
            }
        }
        w.push(blk);
    }
    Ok(w)
}

/// Bauer iteration: double the section order until the trailing block row is
/// stationary, returning it as a symbol `w` with `a = w w^*` (the matrix
/// Fejer-Riesz factor: degree at most the band of `a`).
fn bauer_polynomial(a: &LaurentSymbol, section: usize) -> Result<LaurentSymbol, FactorError> {
    let bs = a.block_size();
    let (_, q) = a.band();

    if q == 0 {
        // Constant positive symbol: a_0 = L L^H directly.
        let l = linalg::cholesky(&a.coeff(0)).map_err(|_| FactorError::NotPositive { pivot: 0 })?;
        return Ok(LaurentSymbol::from_coeffs(bs, [(0, l)])?);
    }

    let m_cap = (BAUER_SECTION_CAP / bs).max(q + 2);
    let mut m = if section > 0 { section } else { (4 * q).max(8) };
    m = m.max(q + 2).min(m_cap);
    let mut prev = bauer_trailing_row(a, m)?;
    let mut last_step = f64::INFINITY;
    while m < m_cap {
        m = (2 * m).min(m_cap);
        let cur = bauer_trailing_row(a, m)?;
        last_step = cur
            .iter()
            .zip(prev.iter())
            .map(|(x, y)| x.sub(y).max_norm())
            .fold(0.0, f64::max);
        prev = cur;
        if last_step <= BAUER_STEP_TOL {
            let coeffs = prev.iter().enumerate().map(|(k, blk)| (k as i64, blk.clone()));
            return Ok(LaurentSymbol::from_coeffs(bs, coeffs)?);
        }
    }
    Err(FactorError::Convergence {
        achieved: last_step,
        tol: BAUER_STEP_TOL,
        cap: BAUER_SECTION_CAP,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn geometric(alpha: f64, beta: f64) -> LaurentSymbol {
        LaurentSymbol::scalar([
            (-1, c(-beta, 0.0)),
            (0, c(1.0 + alpha * beta, 0.0)),
            (1, c(-alpha, 0.0)),
        ])
    }

    /// The validated triangular quadruple for
    /// `a = [[1, alpha t], [beta/t, 1 + alpha beta]]`.
    fn block_quadruple(
        alpha: f64,
        beta: f64,
    ) -> (LaurentSymbol, LaurentSymbol, LaurentSymbol, LaurentSymbol) {
        let gamma = beta / (1.0 + alpha * beta);
        let z = c(0.0, 0.0);
        let mat = |d: Vec<C64>| ComplexMatrix::from_data(2, 2, d).unwrap();
        let u_minus = LaurentSymbol::from_coeffs(
            2,
            [
                (0, ComplexMatrix::identity(2)),
                (-1, mat(vec![z, z, c(beta, 0.0), z])),
            ],
        )
        .unwrap();
        let u_plus = LaurentSymbol::from_coeffs(
            2,
            [
                (0, ComplexMatrix::identity(2)),
                (1, mat(vec![z, c(alpha, 0.0), z, z])),
            ],
        )
        .unwrap();
        let v_plus = LaurentSymbol::from_coeffs(
            2,
            [
                (
                    0,
                    mat(vec![
                        c(1.0 / (1.0 + alpha * beta), 0.0),
                        z,
                        z,
                        c(1.0 + alpha * beta, 0.0),
                    ]),
                ),
                (1, mat(vec![z, c(alpha, 0.0), z, z])),
            ],
        )
        .unwrap();
        let v_minus = LaurentSymbol::from_coeffs(
            2,
            [
                (0, ComplexMatrix::identity(2)),
                (-1, mat(vec![z, z, c(gamma, 0.0), z])),
            ],
        )
        .unwrap();
        (u_minus, u_plus, v_plus, v_minus)
    }

    #[test]
    fn scalar_factorization_recovers_geometric_factors() {
        let a = geometric(0.5, 0.5);
        let f = FactorizationSet::factor_scalar(&a, 48).unwrap();
        assert!((f.u_plus().coeff(0).get(0, 0) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((f.u_plus().coeff(1).get(0, 0) - c(-0.5, 0.0)).norm() < 1e-12);
        assert!((f.u_minus().coeff(0).get(0, 0) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((f.u_minus().coeff(-1).get(0, 0) - c(-0.5, 0.0)).norm() < 1e-12);
        // The true factors are degree-1 polynomials; everything further out
        // is numerical debris.
        for n in 2..=48i64 {
            assert!(f.u_plus().coeff(n).get(0, 0).norm() < 1e-12, "u+ tail {n}");
            assert!(f.u_minus().coeff(-n).get(0, 0).norm() < 1e-12, "u- tail {n}");
        }
        assert!(f.residual() < 1e-10, "residual {}", f.residual());
        assert_eq!(f.truncation_order(), 48);
    }

    #[test]
    fn scalar_factorization_of_asymmetric_symbol_reconstructs() {
        // (1 - 0.3 t)(1 - 0.7 / t) = {-1: -0.7, 0: 1.21, 1: -0.3}.
        let a = LaurentSymbol::scalar([
            (-1, c(-0.7, 0.0)),
            (0, c(1.21, 0.0)),
            (1, c(-0.3, 0.0)),
        ]);
        let f = FactorizationSet::factor_scalar(&a, 64).unwrap();
        assert!(f.residual_left() < 1e-10);
        assert!(f.residual_right() < 1e-10);
        assert!(f.residual_bc() < 1e-9);
        assert!((f.u_plus().coeff(1).get(0, 0) - c(-0.3, 0.0)).norm() < 1e-11);
        assert!((f.u_minus().coeff(-1).get(0, 0) - c(-0.7, 0.0)).norm() < 1e-11);
    }

    #[test]
    fn scalar_factorization_carries_constant_in_u_plus() {
        // a = 4: u_+ must absorb the full constant, u_- staying normalized.
        let a = LaurentSymbol::scalar([(0, c(4.0, 0.0))]);
        let f = FactorizationSet::factor_scalar(&a, 8).unwrap();
        assert!((f.u_plus().coeff(0).get(0, 0) - c(4.0, 0.0)).norm() < 1e-12);
        assert!((f.u_minus().coeff(0).get(0, 0) - c(1.0, 0.0)).norm() < 1e-12);
        // b = 1/4, c = 4 for a constant scalar.
        assert!((f.b().coeff(0).get(0, 0) - c(0.25, 0.0)).norm() < 1e-12);
        assert!((f.c().coeff(0).get(0, 0) - c(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn scalar_factorization_rejects_nonzero_winding() {
        let a = LaurentSymbol::scalar([(1, c(1.0, 0.0))]);
        assert!(matches!(
            FactorizationSet::factor_scalar(&a, 8),
            Err(FactorError::Symbol(SymbolError::NonzeroWinding { winding: 1 }))
        ));
    }

    #[test]
    fn scalar_quotients_match_closed_form() {
        // b = (1 - beta/t)/(1 - alpha t): b_n = alpha^n (1 - alpha beta) for
        // n >= 0, b_{-1} = -beta; c is the mirror image.
        let (alpha, beta) = (0.5, 0.4);
        let a = geometric(alpha, beta);
        let f = FactorizationSet::factor_scalar(&a, 48).unwrap();
        assert!((f.b().coeff(-1).get(0, 0) - c(-beta, 0.0)).norm() < 1e-12);
        assert!((f.c().coeff(1).get(0, 0) - c(-alpha, 0.0)).norm() < 1e-12);
        for n in 0..=12i64 {
            let bn = alpha.powi(n as i32) * (1.0 - alpha * beta);
            let cn = beta.powi(n as i32) * (1.0 - alpha * beta);
            assert!((f.b().coeff(n).get(0, 0) - c(bn, 0.0)).norm() < 1e-12, "b_{n}");
            assert!((f.c().coeff(-n).get(0, 0) - c(cn, 0.0)).norm() < 1e-12, "c_{n}");
        }
        assert!(f.residual_bc() < 1e-10);
    }

    #[test]
    fn bauer_of_identity_block_is_trivial() {
        let a = LaurentSymbol::identity(2).unwrap();
        let f = FactorizationSet::factor_block_bauer(&a, 8, 0).unwrap();
        let eye = LaurentSymbol::identity(2).unwrap();
        assert!(f.u_minus().sub(&eye).unwrap().max_coeff_norm() < 1e-14);
        assert!(f.u_plus().sub(&eye).unwrap().max_coeff_norm() < 1e-14);
        assert!(f.v_plus().sub(&eye).unwrap().max_coeff_norm() < 1e-14);
        assert!(f.v_minus().sub(&eye).unwrap().max_coeff_norm() < 1e-14);
    }

    #[test]
    fn bauer_recovers_triangular_cholesky_factors() {
        // a = h^* h with h = I + 0.4 E_12 t is already a minus-normalized
        // left factorization, and that normal form is unique.
        let z = c(0.0, 0.0);
        let a = LaurentSymbol::from_coeffs(
            2,
            [
                (
                    0,
                    ComplexMatrix::from_data(2, 2, vec![c(1.0, 0.0), z, z, c(1.16, 0.0)])
                        .unwrap(),
                ),
                (
                    1,
                    ComplexMatrix::from_data(2, 2, vec![z, c(0.4, 0.0), z, z]).unwrap(),
                ),
                (
                    -1,
                    ComplexMatrix::from_data(2, 2, vec![z, z, c(0.4, 0.0), z]).unwrap(),
                ),
            ],
        )
        .unwrap();
        let f = FactorizationSet::factor_block_bauer(&a, 32, 0).unwrap();
        let h_star = LaurentSymbol::from_coeffs(
            2,
            [
                (0, ComplexMatrix::identity(2)),
                (
                    -1,
                    ComplexMatrix::from_data(2, 2, vec![z, z, c(0.4, 0.0), z]).unwrap(),
                ),
            ],
        )
        .unwrap();
        let h = LaurentSymbol::from_coeffs(
            2,
            [
                (0, ComplexMatrix::identity(2)),
                (
                    1,
                    ComplexMatrix::from_data(2, 2, vec![z, c(0.4, 0.0), z, z]).unwrap(),
                ),
            ],
        )
        .unwrap();
        let du = f.u_minus().sub(&h_star).unwrap().max_coeff_norm();
        let dp = f.u_plus().sub(&h).unwrap().max_coeff_norm();
        assert!(du < 1e-7, "u_- deviation {du}");
        assert!(dp < 1e-7, "u_+ deviation {dp}");
        assert!(f.residual_left() < 1e-7, "residual {}", f.residual_left());
        assert!(f.residual_right() < 1e-7, "residual {}", f.residual_right());
        assert!(f.residual_bc() < 1e-6, "bc residual {}", f.residual_bc());
    }

    #[test]
    fn bauer_agrees_with_scalar_route() {
        let a = geometric(0.5, 0.5);
        let scalar = FactorizationSet::factor_scalar(&a, 48).unwrap();
        let bauer = FactorizationSet::factor_block_bauer(&a, 48, 0).unwrap();
        for n in 0..=1i64 {
            let d_plus = bauer
                .u_plus()
                .coeff(n)
                .sub(&scalar.u_plus().coeff(n))
                .max_norm();
            let d_minus = bauer
                .u_minus()
                .coeff(-n)
                .sub(&scalar.u_minus().coeff(-n))
                .max_norm();
            assert!(d_plus < 1e-7, "u_+ coeff {n}: {d_plus}");
            assert!(d_minus < 1e-7, "u_- coeff {n}: {d_minus}");
        }
    }

    #[test]
    fn bauer_rejects_indefinite_and_non_hermitian() {
        // t + 1/t is Hermitian but vanishes on the circle.
        let indefinite = LaurentSymbol::scalar([(1, c(1.0, 0.0)), (-1, c(1.0, 0.0))]);
        assert!(matches!(
            FactorizationSet::factor_block_bauer(&indefinite, 16, 0),
            Err(FactorError::NotPositive { .. })
        ));
        // 1 + t is not Hermitian on the circle.
        let skew = LaurentSymbol::scalar([(0, c(1.0, 0.0)), (1, c(1.0, 0.0))]);
        assert!(matches!(
            FactorizationSet::factor_block_bauer(&skew, 16, 0),
            Err(FactorError::NotHermitian { .. })
        ));
    }

    #[test]
    fn explicit_quadruple_is_accepted_and_quotients_match() {
        let (alpha, beta) = (0.4, 0.3);
        let gamma = beta / (1.0 + alpha * beta);
        let (um, up, vp, vm) = block_quadruple(alpha, beta);
        let f = FactorizationSet::from_explicit_factors(um, up, vp, vm, 16).unwrap();
        assert!(f.residual() < 1e-13, "residual {}", f.residual());
        // b = [[1, -alpha t], [gamma/t, 1 - alpha gamma]].
        assert!((f.b().coeff(1).get(0, 1) - c(-alpha, 0.0)).norm() < 1e-14);
        assert!((f.b().coeff(-1).get(1, 0) - c(gamma, 0.0)).norm() < 1e-14);
        assert!((f.b().coeff(0).get(1, 1) - c(1.0 - alpha * gamma, 0.0)).norm() < 1e-14);
        // c = [[1/(1+alpha beta), alpha t], [-gamma/t, 1]].
        assert!((f.c().coeff(0).get(0, 0) - c(1.0 / (1.0 + alpha * beta), 0.0)).norm() < 1e-14);
        assert!((f.c().coeff(1).get(0, 1) - c(alpha, 0.0)).norm() < 1e-14);
        assert!((f.c().coeff(-1).get(1, 0) - c(-gamma, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn explicit_identity_quadruple_gives_identity_quotients() {
        let eye = LaurentSymbol::identity(2).unwrap();
        let f = FactorizationSet::from_explicit_factors(
            eye.clone(),
            eye.clone(),
            eye.clone(),
            eye.clone(),
            4,
        )
        .unwrap();
        assert!(f.b().sub(&eye).unwrap().max_coeff_norm() < 1e-15);
        assert!(f.c().sub(&eye).unwrap().max_coeff_norm() < 1e-15);
        assert_eq!(f.residual(), 0.0);
    }

    #[test]
    fn explicit_mismatched_products_are_rejected() {
        // u_- u_+ and v_+ v_- land on different symbols here, so the set
        // must be refused even though each factor alone looks fine.
        let z = c(0.0, 0.0);
        let plus = LaurentSymbol::from_coeffs(
            2,
            [
                (0, ComplexMatrix::identity(2)),
                (
                    1,
                    ComplexMatrix::from_data(2, 2, vec![z, c(0.4, 0.0), z, z]).unwrap(),
                ),
            ],
        )
        .unwrap();
        let minus = LaurentSymbol::from_coeffs(
            2,
            [
                (0, ComplexMatrix::identity(2)),
                (
                    -1,
                    ComplexMatrix::from_data(2, 2, vec![z, z, c(0.3, 0.0), z]).unwrap(),
                ),
            ],
        )
        .unwrap();
        let err =
            FactorizationSet::from_explicit_factors(minus.clone(), plus.clone(), plus, minus, 16)
                .unwrap_err();
        match err {
            FactorError::ProductMismatch { distance } => {
                assert!((distance - 0.12).abs() < 1e-12, "distance {distance}")
            }
            other => panic!("expected product mismatch, got {other}"),
        }
    }

    #[test]
    fn explicit_factors_with_wrong_support_are_rejected() {
        let (um, up, vp, vm) = block_quadruple(0.4, 0.3);
        let err = FactorizationSet::from_explicit_factors(up, um, vp, vm, 16).unwrap_err();
        assert!(matches!(err, FactorError::TriangularSupport { .. }), "{err}");
    }

    #[test]
    fn normalization_removes_constant_gauge() {
        // Scaling u_- by S on the right and u_+ by S^{-1} on the left leaves
        // the product unchanged; normalization must recover the same set.
        let (um, up, vp, vm) = block_quadruple(0.4, 0.3);
        let s = ComplexMatrix::from_data(
            2,
            2,
            vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        )
        .unwrap();
        let s_inv = linalg::inverse(&s).unwrap();
        let um_scaled = const_mul_right(&um, &s);
        let up_scaled = const_mul_left(&s_inv, &up);
        let f = FactorizationSet::from_explicit_factors(
            um_scaled,
            up_scaled,
            vp.clone(),
            vm.clone(),
            16,
        )
        .unwrap();
        assert!(f.u_minus().sub(&um).unwrap().max_coeff_norm() < 1e-14);
        assert!(f.u_plus().sub(&up).unwrap().max_coeff_norm() < 1e-14);
    }

    #[test]
    fn analytic_inverse_matches_geometric_series() {
        let f = LaurentSymbol::scalar([(0, c(1.0, 0.0)), (1, c(-0.5, 0.0))]);
        let g = invert_analytic(&f, 20).unwrap();
        for n in 0..=20i64 {
            assert!((g.coeff(n).get(0, 0) - c(0.5f64.powi(n as i32), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn derive_bc_truncates_to_requested_band() {
        let a = geometric(0.5, 0.4);
        let f = FactorizationSet::factor_scalar(&a, 48).unwrap();
        let (b, c_) = f.derive_bc(10).unwrap();
        let (pb, qb) = b.band();
        let (pc, qc) = c_.band();
        assert!(pb <= 10 && qb <= 10);
        assert!(pc <= 10 && qc <= 10);
    }
}
