//! Numerical verification of determinant identities for block Toeplitz
//! operators with matrix-valued symbols on the unit circle.
//!
//! The centerpiece is a classical exact identity: for a sufficiently
//! smooth, nonvanishing `N x N` symbol `a` with left and right Wiener–Hopf
//! factorizations `a = u_- u_+ = v_+ v_-`, the determinant of the `n`-th
//! block Toeplitz section satisfies
//!
//! ```text
//!     det T_n(a) = G(a)^n · det(I - Q_n K Q_n) / det(I - K),
//! ```
//!
//! where `K = H(b) H(c~)` is the product of two Hankel operators built from
//! `b = v_- u_+^{-1}` and `c = u_-^{-1} v_+`, `Q_n = I - P_n` is the tail
//! projection, and `G(a)` is the geometric mean of `det a`.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`] — dense complex matrices, LU with partial pivoting,
//!   determinants, solves, inverses, Cholesky. Deliberately generic so it can
//!   serve as an independent oracle for the structured fast paths.
//! - [`symbol`] — matrix Laurent symbols: coefficients, sampling grids,
//!   products, pointwise inverses, winding numbers, geometric means, and the
//!   Krein-algebra norm.
//! - [`factor`] — Wiener–Hopf factorization (scalar log-splitting, block
//!   Bauer iteration, explicit factors) and the derived `b`, `c` pair.
//! - [`operators`] — Toeplitz/Hankel sections and the truncated kernel
//!   `K = H(b) H(c~)` with a tail estimate.
//! - [`identities`] — the identity checks themselves: the BO formula, the
//!   determinant equality chain for `1/det(I-K)`, the finite-section inverse
//!   formula, the numerator reduction, the projection compression identity,
//!   and the Hankel product identity.
//! - [`config`] / [`report`] — run configuration, sweep driver, CSV/JSON
//!   report emission for the `botep` binary.

#![forbid(unsafe_code)]

pub mod config;
pub mod factor;
pub mod identities;
pub mod linalg;
pub mod operators;
pub mod report;
pub mod symbol;

/// Scalar type used throughout: double-precision complex.
pub type C64 = num_complex::Complex64;

/// Smallest power of two that is `>= n` (and at least `min`).
pub(crate) fn pow2_at_least(n: usize, min: usize) -> usize {
    n.max(min).next_power_of_two()
}
