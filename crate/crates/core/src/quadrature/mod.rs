//! Numerical integration over the deformed cycles `C(t)`.
//!
//! The `y`-integral is taken outermost on composite Gauss–Legendre panels
//! (polar about `Re x` when `n = 2`); for each `y` node the `ξ`-integral runs
//! in polar form `ξ = ρω`. On `|ξ| ≤ 4R` the integrand is sampled on Gauss
//! panels. Beyond `supp χ2` the exponent `i(x − w)·ζ` is exactly linear in
//! `ρ` at fixed `(y, ω)`, so the tail is integrated with an exponentially
//! fitted rule on dyadic panels and truncated where the actual decay rate of
//! that ray makes the remainder negligible.

mod engine;
pub mod rules;

use serde::{Deserialize, Serialize};

pub use engine::{
    integrate_contour, integrate_contour_window, integrate_kernel, y_grid, ContourIntegral, XiWindow, YGrid,
};
pub use rules::{chebyshev_nodes, CompensatedSum, FilonRule, GaussRule};

use crate::{japanese_bracket, Error, Result, C64};

/// Resolution parameters of the composite rules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Gauss nodes per `y` panel (per radial panel when `n = 2`).
    pub y_nodes: usize,
    /// Largest `y` panel width.
    pub y_max_width: f64,
    /// Panels per cutoff transition band in `y`.
    pub transition_pieces: usize,
    /// Gauss nodes per `ρ` panel on `|ξ| ≤ 4R`.
    pub xi_nodes: usize,
    /// `ρ` panel width on the plateau `|ξ| ≤ 2R`.
    pub xi_inner_width: f64,
    /// `ρ` panel width on the transition `2R ≤ |ξ| ≤ 4R`.
    pub xi_transition_width: f64,
    /// Chebyshev nodes per exponentially fitted tail panel.
    pub tail_nodes: usize,
    /// Ratio `b/a` of consecutive tail panel ends.
    pub tail_ratio: f64,
    /// Relative size of the discarded `ρ`-tail on each ray.
    pub truncation_tol: f64,
    /// `n = 2`: trapezoid points in `θ` on `|ξ| ≤ 4R`.
    pub theta_inner: usize,
    /// `n = 2`: Gauss nodes per `θ` panel in the tail.
    pub theta_nodes: usize,
    /// `n = 2`: largest `θ` panel width in the tail.
    pub theta_max_width: f64,
    /// `n = 2`: trapezoid points in the polar angle of `y − Re x`.
    pub phi_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            y_nodes: 16,
            y_max_width: 0.5,
            transition_pieces: 4,
            xi_nodes: 16,
            xi_inner_width: 1.0,
            xi_transition_width: 0.5,
            tail_nodes: 12,
            tail_ratio: 2.0,
            truncation_tol: 1e-15,
            theta_inner: 64,
            theta_nodes: 16,
            theta_max_width: 0.3,
            phi_nodes: 32,
        }
    }
}

impl QuadratureConfig {
    /// Cheaper rule for two-dimensional smoke runs (about three digits).
    pub fn coarse() -> Self {
        Self {
            y_nodes: 8,
            y_max_width: 0.3,
            transition_pieces: 2,
            xi_nodes: 8,
            xi_inner_width: 1.0,
            xi_transition_width: 1.0,
            tail_nodes: 8,
            tail_ratio: 2.0,
            truncation_tol: 1e-8,
            theta_inner: 32,
            theta_nodes: 6,
            theta_max_width: 0.5,
            phi_nodes: 16,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.y_nodes >= 2
            && self.xi_nodes >= 2
            && self.tail_nodes >= 4
            && self.theta_nodes >= 2
            && self.theta_inner >= 8
            && self.phi_nodes >= 4
            && self.transition_pieces >= 1
            && self.y_max_width > 0.0
            && self.xi_inner_width > 0.0
            && self.xi_transition_width > 0.0
            && self.theta_max_width > 0.0
            && self.tail_ratio > 1.0
            && self.truncation_tol > 0.0
            && self.truncation_tol < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid quadrature configuration {self:?}")))
        }
    }
}

/// `λ` values for the Gaussian factor `e^{−λ²ζ·ζ}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizationSchedule {
    pub lambda_values: Vec<f64>,
    pub richardson: bool,
}

impl Default for RegularizationSchedule {
    /// `λ_k = 0.5·2^{−k}`, `k = 0..6`, with extrapolation.
    fn default() -> Self {
        Self::geometric(0.5, 7)
    }
}

impl RegularizationSchedule {
    pub fn geometric(first: f64, count: usize) -> Self {
        Self {
            lambda_values: (0..count).map(|k| first * 0.5f64.powi(k as i32)).collect(),
            richardson: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda_values.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::Config("regularization λ values must be positive".into()));
        }
        if self.lambda_values.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("regularization λ values must strictly decrease".into()));
        }
        if self.richardson && self.lambda_values.len() < 3 {
            return Err(Error::Config("extrapolation needs at least three λ values".into()));
        }
        Ok(())
    }
}

/// Smallest `ρ` with `e^{−ρ(tδ′ − |Im x|)}⟨ρ⟩^d ρ^{n−1} < tol`, by bisection
/// on the monotone part of the envelope.
pub fn choose_truncation(order: f64, dim: usize, t: f64, delta_prime: f64, im_x: f64, tol: f64) -> Result<f64> {
    let margin = t * delta_prime - im_x;
    if !(margin > 0.0) {
        return Err(Error::NoDecayMargin { margin });
    }
    let log_env =
        |rho: f64| -rho * margin + order * japanese_bracket(rho).ln() + (dim as f64 - 1.0) * rho.max(1e-300).ln();
    let target = tol.ln();
    // the envelope is decreasing beyond its maximum at ρ ≈ (d + n − 1)/margin
    let peak = ((order + dim as f64 - 1.0) / margin).max(1.0);
    let mut lo = peak;
    if log_env(lo) < target {
        return Ok(lo);
    }
    let mut hi = (2.0 * peak).max(1.0);
    while log_env(hi) >= target {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Divergence("truncation radius search overflowed".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_env(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Extrapolated `λ → 0` value with diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct RegularizedLimit {
    pub value: C64,
    pub err_estimate: f64,
    /// `|F_{k+1} − F_k|`.
    pub differences: Vec<f64>,
    pub monotone: bool,
    pub diverging: bool,
}

/// Richardson (Neville) extrapolation in `λ²` to `λ = 0`.
pub fn regularized_limit(lambdas: &[f64], values: &[C64], richardson: bool) -> Result<RegularizedLimit> {
    if lambdas.len() != values.len() || values.len() < 3 {
        return Err(Error::precondition(
            "regularized_limit needs at least three (λ, value) pairs",
        ));
    }
    let differences: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let monotone = differences.windows(2).all(|d| d[1] < d[0] || d[0] == 0.0);
    let tail = &differences[differences.len().saturating_sub(3)..];
    let diverging = tail.windows(2).all(|d| d[1] > d[0]) && tail[tail.len() - 1] > 0.0;
    let last = *values.last().unwrap();
    let value = if richardson {
        let h: Vec<f64> = lambdas.iter().map(|l| l * l).collect();
        let mut p: Vec<C64> = values.to_vec();
        let m = p.len();
        for k in 1..m {
            for i in 0..(m - k) {
                p[i] = (p[i + 1] * h[i] - p[i] * h[i + k]) / (h[i] - h[i + k]);
            }
        }
        p[0]
    } else {
        last
    };
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::NonFinite {
            location: "regularized limit".into(),
        });
    }
    Ok(RegularizedLimit {
        value,
        err_estimate: (last - value).norm(),
        differences,
        monotone,
        diverging,
    })
}

/// Smallest `t ∈ (0, 1]` with `t·δ′/(r″ − r′) ≤ ½(1 − margin)`: the
/// contour `C(t0)` then lies in `ℂⁿ × W_{1/2}`.
pub fn select_t0(zeta_slope: f64, margin: f64) -> f64 {
    let limit = 0.5 * (1.0 - margin);
    if zeta_slope <= limit {
        1.0
    } else {
        limit / zeta_slope
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_example() {
        let rho = choose_truncation(0.0, 1, 1.0, 0.09, 0.0, 1e-10).unwrap();
        // oracle: ρ·0.09 = ln(1e10)
        let oracle = (1e10f64).ln() / 0.09;
        assert!((rho - oracle).abs() < 1e-6 * oracle, "{rho} vs {oracle}");
        assert!((rho - 256.0).abs() < 1.0);
        let err = choose_truncation(0.0, 1, 1.0, 0.09, 0.09, 1e-10).unwrap_err();
        assert!(matches!(err, Error::NoDecayMargin { .. }));
        let lower = choose_truncation(-2.0, 1, 1.0, 0.09, 0.0, 1e-10).unwrap();
        assert!(lower < rho);
        let higher = choose_truncation(0.0, 2, 1.0, 0.09, 0.0, 1e-10).unwrap();
        assert!(higher > rho);
    }

    #[test]
    fn truncation_matches_independent_bisection() {
        for (d, n, im) in [(1.0, 1, 0.02), (-1.0, 2, 0.05), (2.0, 2, 0.0)] {
            let rho = choose_truncation(d, n, 1.0, 0.09, im, 1e-12).unwrap();
            let f = |r: f64| (-(0.09 - im) * r).exp() * (1.0 + r * r).powf(d / 2.0) * r.powi(n as i32 - 1);
            assert!(f(rho) < 1e-12 * 1.0000001);
            assert!(f(rho * 0.999) > 1e-12 * 0.999);
        }
    }

    #[test]
    fn limit_of_constant_sequence() {
        let s = RegularizationSchedule::default();
        let v = vec![C64::new(2.0, -1.0); s.lambda_values.len()];
        let r = regularized_limit(&s.lambda_values, &v, true).unwrap();
        assert!((r.value - C64::new(2.0, -1.0)).norm() < 1e-14);
        assert!(r.err_estimate < 1e-14);
    }

    #[test]
    fn limit_of_quadratic_sequence_is_exact() {
        let s = RegularizationSchedule::default();
        let v: Vec<C64> = s
            .lambda_values
            .iter()
            .map(|l| C64::new(1.5 + 3.0 * l * l, -0.25 * l * l))
            .collect();
        let r = regularized_limit(&s.lambda_values, &v, true).unwrap();
        assert!((r.value - C64::new(1.5, 0.0)).norm() < 1e-12);
        assert!(r.monotone && !r.diverging);
        let plain = regularized_limit(&s.lambda_values, &v, false).unwrap();
        assert_eq!(plain.value, v[6]);
    }

    #[test]
    fn divergence_flag() {
        let l = [0.5, 0.25, 0.125, 0.0625];
        let v: Vec<C64> = [1.0, 2.0, 4.0, 8.0].iter().map(|&a| C64::new(a, 0.0)).collect();
        let r = regularized_limit(&l, &v, true).unwrap();
        assert!(r.diverging && !r.monotone);
        assert!(regularized_limit(&l[..2], &v[..2], true).is_err());
    }

    #[test]
    fn schedule_validation() {
        let s = RegularizationSchedule::default();
        assert_eq!(s.lambda_values.len(), 7);
        assert_eq!(s.lambda_values[0], 0.5);
        assert!((s.lambda_values[6] - 0.5 / 64.0).abs() < 1e-18);
        s.validate().unwrap();
        let bad = RegularizationSchedule {
            lambda_values: vec![0.5, 0.5, 0.1],
            richardson: true,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn t0_selection() {
        assert_eq!(select_t0(0.45, 0.05), 1.0);
        let t0 = select_t0(0.9, 0.05);
        assert!((t0 * 0.9 - 0.475).abs() < 1e-15);
    }
}
