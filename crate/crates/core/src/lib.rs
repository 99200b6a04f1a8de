//! Evaluation of pseudodifferential operators `Op(p)u` with analytic-type
//! symbols, and of their holomorphic extension to complex `x`, by explicit
//! deformation of the `(y, ξ)` integration cycle into `ℂⁿ × ℂⁿ`.
//!
//! Module map:
//!
//! * [`geometry`]: balls, wedges `W_ε`, tube domains and the deformation
//!   parameter constellation `r > r″ > r′`, `δ ≥ δ′`, `δ′/(r″ − r′) < ε`.
//! * [`cutoffs`]: the smooth plateau bumps `χ`, `χ1`, `χ2`.
//! * [`symbols`]: analytic symbols, a small built-in library and sampled
//!   checks of the `S^d` and wedge estimates.
//! * [`contour`]: the deformation maps, their Jacobians and phase exponents.
//! * [`quadrature`]: Gauss–Legendre and exponentially fitted panel rules,
//!   contour integration and `λ → 0` extrapolation.
//! * [`evaluator`]: real-axis reference values, deformed evaluation,
//!   holomorphic extension, the distribution kernel and tube extension.
//! * [`verify`]: numerical checks of the inequalities and identities the
//!   deformation argument relies on.
//! * [`cli`]: JSON-configured batch runs.

// `!(a > b)` is used throughout so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod contour;
pub mod cutoffs;
pub mod error;
pub mod evaluator;
pub mod geometry;
pub mod quadrature;
pub mod symbols;
pub mod verify;

mod linalg;

pub use error::{Error, Result};

use smallvec::SmallVec;

/// Complex double.
pub type C64 = num_complex::Complex<f64>;

/// Real n-vector; inline storage up to n = 3.
pub type RVec = SmallVec<[f64; 3]>;

/// Complex n-vector; inline storage up to n = 3.
pub type CVec = SmallVec<[C64; 3]>;

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn re_part(z: &[C64]) -> RVec {
    z.iter().map(|c| c.re).collect()
}

pub(crate) fn im_part(z: &[C64]) -> RVec {
    z.iter().map(|c| c.im).collect()
}

pub(crate) fn to_complex(v: &[f64]) -> CVec {
    v.iter().map(|&a| C64::new(a, 0.0)).collect()
}

/// Bilinear (not Hermitian) product `Σ a_j b_j`.
pub(crate) fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `⟨ξ⟩ = (1 + |ξ|²)^{1/2}` for a scalar radius.
pub fn japanese_bracket(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}
