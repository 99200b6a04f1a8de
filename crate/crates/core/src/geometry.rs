//! Balls, wedges, tube domains and the deformation parameter set.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{norm, Error, RVec, Result, C64};

/// Open ball `B(center, radius)` in `ℝⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn centered(dim: usize, radius: f64) -> Result<Self> {
        Self::new(vec![0.0; dim], radius)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn offset(&self, x: &[f64]) -> f64 {
        let d: RVec = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        norm(&d)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.offset(x) < self.radius
    }

    /// Distance from an interior point to the sphere; negative outside.
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        self.radius - self.offset(x)
    }
}

/// Truncated cone `W_ε = {|Im ζ| < ε|Re ζ|} ∩ {|Re ζ| > R}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wedge {
    pub epsilon: f64,
    /// Truncation radius `R`.
    pub truncation: f64,
    pub dim: usize,
}

impl Wedge {
    pub fn new(epsilon: f64, truncation: f64, dim: usize) -> Result<Self> {
        if !(epsilon > 0.0) || !(truncation > 0.0) || dim == 0 {
            return Err(Error::domain(format!(
                "wedge needs ε > 0, R > 0, n ≥ 1 (got ε={epsilon}, R={truncation}, n={dim})"
            )));
        }
        Ok(Self {
            epsilon,
            truncation,
            dim,
        })
    }

    pub fn contains(&self, zeta: &[C64]) -> bool {
        wedge_contains(self, zeta)
    }
}

/// `true` iff `|Im ζ| < ε|Re ζ|` and `|Re ζ| > R` (Euclidean norms).
pub fn wedge_contains(w: &Wedge, zeta: &[C64]) -> bool {
    let re = zeta.iter().map(|z| z.re * z.re).sum::<f64>().sqrt();
    let im = zeta.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    im < w.epsilon * re && re > w.truncation
}

/// The full parameter constellation of the deformation.
///
/// `r`, `delta` describe the holomorphy domain `B(0,r) + iB(0,δ)` of the
/// input; `r0`, `delta0` that of the symbol in `x`; `epsilon`, `truncation`
/// the wedge `W_ε` of the symbol in `ζ`. The deformation itself uses
/// `r″`, `r′` and `δ′`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationParams {
    pub r: f64,
    pub r_prime: f64,
    pub r_dprime: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub r0: f64,
    pub delta0: f64,
    pub epsilon: f64,
    pub truncation: f64,
    pub dim: usize,
}

/// One violated inequality of [`DeformationParams`].
#[derive(Clone, Debug, PartialEq)]
pub enum ParamViolation {
    NotPositive { name: &'static str, value: f64 },
    ROrdering { r: f64, r_dprime: f64 },
    RPrimeOrdering { r_dprime: f64, r_prime: f64 },
    DeltaOrdering { delta: f64, delta_prime: f64 },
    Slope { slope: f64, epsilon: f64 },
    Dimension,
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamViolation::NotPositive { name, value } => {
                write!(f, "{name} > 0 fails ({name} = {value})")
            }
            ParamViolation::ROrdering { r, r_dprime } => {
                write!(f, "r > r″ fails (r = {r}, r″ = {r_dprime})")
            }
            ParamViolation::RPrimeOrdering { r_dprime, r_prime } => {
                write!(f, "r″ > r′ fails (r″ = {r_dprime}, r′ = {r_prime})")
            }
            ParamViolation::DeltaOrdering { delta, delta_prime } => {
                write!(f, "δ ≥ δ′ fails (δ = {delta}, δ′ = {delta_prime})")
            }
            ParamViolation::Slope { slope, epsilon } => {
                write!(f, "δ′/(r″−r′) = {slope:.6} ≥ ε = {epsilon}")
            }
            ParamViolation::Dimension => write!(f, "dimension n ≥ 1 fails"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamViolations(pub Vec<ParamViolation>);

impl fmt::Display for ParamViolations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

impl std::error::Error for ParamViolations {}

impl DeformationParams {
    /// Parameters with `r″ = (r + r′)/2` and an unbounded symbol `x`-domain.
    #[allow(clippy::too_many_arguments)]
    pub fn new(dim: usize, r: f64, r_prime: f64, delta: f64, delta_prime: f64, epsilon: f64, truncation: f64) -> Self {
        Self {
            r,
            r_prime,
            r_dprime: 0.5 * (r + r_prime),
            delta,
            delta_prime,
            r0: f64::INFINITY,
            delta0: f64::INFINITY,
            epsilon,
            truncation,
            dim,
        }
    }

    pub fn with_r_dprime(mut self, r_dprime: f64) -> Self {
        self.r_dprime = r_dprime;
        self
    }

    pub fn with_symbol_domain(mut self, r0: f64, delta0: f64) -> Self {
        self.r0 = r0;
        self.delta0 = delta0;
        self
    }

    /// The running example: `r = 1, r″ = 0.8, r′ = 0.6, δ = 0.1, δ′ = 0.09,
    /// ε = 0.5, R = 2`.
    pub fn reference(dim: usize) -> Self {
        Self::new(dim, 1.0, 0.6, 0.1, 0.09, 0.5, 2.0).with_r_dprime(0.8)
    }

    pub fn validate(self) -> std::result::Result<Self, ParamViolations> {
        validate_params(self)
    }

    /// Maximal slope `δ′/(r″ − r′)` of the `ζ`-deformation.
    pub fn zeta_slope(&self) -> f64 {
        self.delta_prime / (self.r_dprime - self.r_prime)
    }

    /// `ε − δ′/(r″ − r′)`; positive for valid parameters.
    pub fn slope_margin(&self) -> f64 {
        self.epsilon - self.zeta_slope()
    }

    /// Outer radius of `χ1`: midway between `r″` and `r`.
    pub fn chi1_outer(&self) -> f64 {
        0.5 * (self.r_dprime + self.r)
    }

    /// Inner radius of `χ`: midway between `supp χ1` and `r`.
    pub fn chi_inner(&self) -> f64 {
        0.5 * (self.chi1_outer() + self.r)
    }

    /// Plateau radius `2R` of `χ2`.
    pub fn chi2_inner(&self) -> f64 {
        2.0 * self.truncation
    }

    /// Support radius `4R` of `χ2`.
    pub fn chi2_outer(&self) -> f64 {
        4.0 * self.truncation
    }

    /// Polydisc `B(0, min{r′, r0}) + iB(0, min{δ′, δ0})` on which the
    /// extension is guaranteed.
    pub fn extension_radii(&self) -> (f64, f64) {
        (self.r_prime.min(self.r0), self.delta_prime.min(self.delta0))
    }

    pub fn wedge(&self) -> Wedge {
        Wedge {
            epsilon: self.epsilon,
            truncation: self.truncation,
            dim: self.dim,
        }
    }
}

/// Checks every ordering constraint; returns the parameters untouched or
/// the full list of violated inequalities.
pub fn validate_params(p: DeformationParams) -> std::result::Result<DeformationParams, ParamViolations> {
    let mut v = Vec::new();
    if p.dim == 0 {
        v.push(ParamViolation::Dimension);
    }
    for (name, value) in [
        ("r", p.r),
        ("r′", p.r_prime),
        ("r″", p.r_dprime),
        ("δ", p.delta),
        ("δ′", p.delta_prime),
        ("r0", p.r0),
        ("δ0", p.delta0),
        ("ε", p.epsilon),
        ("R", p.truncation),
    ] {
        if !(value > 0.0) {
            v.push(ParamViolation::NotPositive { name, value });
        }
    }
    if !(p.r > p.r_dprime) {
        v.push(ParamViolation::ROrdering {
            r: p.r,
            r_dprime: p.r_dprime,
        });
    }
    if !(p.r_dprime > p.r_prime) {
        v.push(ParamViolation::RPrimeOrdering {
            r_dprime: p.r_dprime,
            r_prime: p.r_prime,
        });
    }
    if !(p.delta >= p.delta_prime) {
        v.push(ParamViolation::DeltaOrdering {
            delta: p.delta,
            delta_prime: p.delta_prime,
        });
    }
    if p.r_dprime > p.r_prime {
        let slope = p.zeta_slope();
        if !(slope < p.epsilon) {
            v.push(ParamViolation::Slope {
                slope,
                epsilon: p.epsilon,
            });
        }
    }
    if v.is_empty() {
        Ok(p)
    } else {
        Err(ParamViolations(v))
    }
}

/// A tube domain about an open set `U ⊂ ℝⁿ`, with `U` a finite union of
/// open balls.
///
/// `dist(x, ∂U)` is computed exactly for a single ball and as the
/// max-over-balls lower bound `max_k (ρ_k − |x − c_k|)` for unions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeDomain {
    pub base: Vec<Ball>,
    /// Imaginary radius of `U_ℂ` above each base point; `None` means
    /// `U_ℂ = U + iℝⁿ`.
    pub height: Option<f64>,
}

impl TubeDomain {
    pub fn new(base: Vec<Ball>, height: Option<f64>) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::domain("tube domain base must contain at least one ball"));
        }
        let n = base[0].dim();
        if base.iter().any(|b| b.dim() != n) {
            return Err(Error::domain("tube domain balls must share a dimension"));
        }
        Ok(Self { base, height })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![Ball::new(vec![0.5 * (a + b)], 0.5 * (b - a))?], None)
    }

    pub fn dim(&self) -> usize {
        self.base[0].dim()
    }

    pub fn base_contains(&self, x: &[f64]) -> bool {
        self.base.iter().any(|b| b.contains(x))
    }

    /// `z ∈ U_ℂ`: `Re z ∈ U` and `|Im z|` below the height.
    pub fn contains(&self, z: &[C64]) -> bool {
        let re: RVec = z.iter().map(|c| c.re).collect();
        let im: RVec = z.iter().map(|c| c.im).collect();
        self.base_contains(&re) && self.height.is_none_or(|h| norm(&im) < h)
    }

    /// Lower bound for `dist(x, ∂U)`; `None` when `x ∉ U`.
    pub fn distance_to_boundary(&self, x: &[f64]) -> Option<f64> {
        self.base
            .iter()
            .filter(|b| b.contains(x))
            .map(|b| b.distance_to_boundary(x))
            .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))))
    }
}

/// `ε · dist(x, ∂U)`, the imaginary radius guaranteed above `x`.
pub fn tube_height(t: &TubeDomain, x: &[f64], epsilon: f64) -> Result<f64> {
    t.distance_to_boundary(x)
        .map(|d| epsilon * d)
        .ok_or_else(|| Error::domain(format!("point {x:?} is outside the tube base")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn wedge_examples() {
        let w = Wedge::new(0.5, 2.0, 1).unwrap();
        assert!(wedge_contains(&w, &[c(10.0, 2.0)]));
        assert!(!wedge_contains(&w, &[c(10.0, 6.0)]));
        assert!(!wedge_contains(&w, &[c(1.0, 0.1)]));
    }

    #[test]
    fn reference_params_are_valid() {
        let p = DeformationParams::reference(1);
        assert_eq!(validate_params(p), Ok(p));
        assert!((p.zeta_slope() - 0.45).abs() < 1e-15);
    }

    #[test]
    fn slope_violation_is_named() {
        let mut p = DeformationParams::reference(1);
        p.delta_prime = 0.11;
        let err = validate_params(p).unwrap_err();
        assert!(err
            .0
            .iter()
            .any(|v| matches!(v, ParamViolation::Slope { slope, .. } if (slope - 0.55).abs() < 1e-12)));
        let text = err.to_string();
        assert!(text.contains("δ′/(r″−r′) = 0.55"), "{text}");
        assert!(text.contains("≥ ε"));
    }

    #[test]
    fn ordering_violation_is_named() {
        let mut p = DeformationParams::reference(1);
        p.r = 0.5;
        let err = validate_params(p).unwrap_err();
        assert!(err.to_string().contains("r > r″ fails"));
    }

    #[test]
    fn tube_height_examples() {
        let u = TubeDomain::interval(-1.0, 1.0).unwrap();
        assert!((tube_height(&u, &[0.0], 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((tube_height(&u, &[0.8], 0.5).unwrap() - 0.1).abs() < 1e-15);
        let disc = TubeDomain::new(vec![Ball::centered(2, 1.0).unwrap()], None).unwrap();
        assert!((tube_height(&disc, &[0.6, 0.0], 0.25).unwrap() - 0.1).abs() < 1e-15);
        assert!(tube_height(&u, &[1.5], 0.5).is_err());
    }

    #[test]
    fn union_distance_is_max_over_balls() {
        let u = TubeDomain::new(
            vec![Ball::new(vec![0.0], 1.0).unwrap(), Ball::new(vec![1.5], 1.0).unwrap()],
            None,
        )
        .unwrap();
        // 0.9 is in both balls: 0.1 from the first boundary, 0.4 from the second.
        assert!((u.distance_to_boundary(&[0.9]).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn tube_height_vanishes_towards_boundary() {
        let disc = TubeDomain::new(vec![Ball::centered(2, 1.0).unwrap()], None).unwrap();
        let dir = [0.6, 0.8];
        let mut last = f64::INFINITY;
        for k in 0..50 {
            let s = 1.0 - 0.5f64.powi(k);
            let h = tube_height(&disc, &[s * dir[0], s * dir[1]], 0.5).unwrap();
            assert!(h <= last);
            last = h;
        }
        assert!(last < 1e-12);
    }

    proptest! {
        #[test]
        fn wedge_scaling_invariance(re in -50.0f64..50.0, im in -20.0f64..20.0, s in 1.0f64..100.0) {
            let w = Wedge::new(0.5, 2.0, 1).unwrap();
            let z = [c(re, im)];
            if wedge_contains(&w, &z) {
                prop_assert!(wedge_contains(&w, &[c(s * re, s * im)]));
            }
        }

        #[test]
        fn validation_matches_direct_inequalities(
            r in 0.01f64..2.0, rd in 0.01f64..2.0, rp in 0.01f64..2.0,
            d in 0.01f64..0.5, dp in 0.01f64..0.5, eps in 0.05f64..1.0,
        ) {
            let p = DeformationParams::new(1, r, rp, d, dp, eps, 2.0).with_r_dprime(rd);
            let direct = r > rd && rd > rp && d >= dp && dp / (rd - rp) < eps;
            prop_assert_eq!(validate_params(p).is_ok(), direct);
        }
    }
}
