//! Radial plateau cutoffs `χ`, `χ1`, `χ2`.
//!
//! Every bump is `h((outer − |y − c|)/(outer − inner))` with the transition
//! profile `h(s) = g(s)/(g(s) + g(1 − s))`, `g(s) = e^{−1/s}` for `s > 0`
//! and `0` otherwise. `h` is `C^∞`, monotone, and exactly `0` for `s ≤ 0`
//! and `1` for `s ≥ 1`.

use crate::geometry::DeformationParams;
use crate::{Error, RVec, Result};

/// The transition profile `h` on `ℝ`.
pub fn transition_profile(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let e = 1.0 / s - 1.0 / (1.0 - s);
    if e > 0.0 {
        let q = (-e).exp();
        q / (1.0 + q)
    } else {
        1.0 / (1.0 + e.exp())
    }
}

/// `h′(s) = h(1 − h)(1/s² + 1/(1 − s)²)` inside `(0, 1)`, zero elsewhere.
pub fn transition_profile_derivative(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let e = 1.0 / s - 1.0 / (1.0 - s);
    let q = (-e.abs()).exp();
    let hh = q / ((1.0 + q) * (1.0 + q));
    hh * (1.0 / (s * s) + 1.0 / ((1.0 - s) * (1.0 - s)))
}

/// Smooth radial bump: `1` on the closed inner ball, `0` outside the open
/// outer ball.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothBump {
    center: RVec,
    inner: f64,
    outer: f64,
}

impl SmoothBump {
    pub fn new(center: &[f64], inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(Error::domain(format!(
                "bump radii must satisfy 0 < inner < outer (inner={inner}, outer={outer})"
            )));
        }
        Ok(Self {
            center: center.into(),
            inner,
            outer,
        })
    }

    pub fn centered(dim: usize, inner: f64, outer: f64) -> Result<Self> {
        Self::new(&vec![0.0; dim], inner, outer)
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn s_of(&self, dist: f64) -> f64 {
        (self.outer - dist) / (self.outer - self.inner)
    }

    /// Value as a function of `|y − c|`.
    pub fn radial_value(&self, dist: f64) -> f64 {
        transition_profile(self.s_of(dist))
    }

    /// `d/d|y|` of the value.
    pub fn radial_derivative(&self, dist: f64) -> f64 {
        -transition_profile_derivative(self.s_of(dist)) / (self.outer - self.inner)
    }

    fn offset(&self, y: &[f64]) -> (RVec, f64) {
        let d: RVec = y.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let r = crate::norm(&d);
        (d, r)
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        self.radial_value(self.offset(y).1)
    }

    pub fn gradient(&self, y: &[f64]) -> RVec {
        self.value_and_gradient(y).1
    }

    pub fn value_and_gradient(&self, y: &[f64]) -> (f64, RVec) {
        let (d, r) = self.offset(y);
        let v = self.radial_value(r);
        let dr = self.radial_derivative(r);
        let g = if dr == 0.0 {
            d.iter().map(|_| 0.0).collect()
        } else {
            d.iter().map(|a| dr * a / r).collect()
        };
        (v, g)
    }
}

pub fn bump_value(b: &SmoothBump, y: &[f64]) -> f64 {
    b.value(y)
}

pub fn bump_gradient(b: &SmoothBump, y: &[f64]) -> RVec {
    b.gradient(y)
}

/// The three cutoffs of the construction, allocated inside `B(0, r)` and
/// around `B(0, 2R)`.
///
/// `χ1`: plateau `r″`, support `(r″ + r)/2`. `χ`: plateau halfway between
/// `supp χ1` and `r`, support `r`, so that `χ = 1` on `supp χ1`.
/// `χ2`: plateau `2R`, support `4R`.
#[derive(Clone, Debug)]
pub struct Cutoffs {
    pub chi1: SmoothBump,
    pub chi2: SmoothBump,
    pub chi: SmoothBump,
}

impl Cutoffs {
    pub fn for_params(p: &DeformationParams) -> Result<Self> {
        Ok(Self {
            chi1: SmoothBump::centered(p.dim, p.r_dprime, p.chi1_outer())?,
            chi2: SmoothBump::centered(p.dim, p.chi2_inner(), p.chi2_outer())?,
            chi: SmoothBump::centered(p.dim, p.chi_inner(), p.r)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn chi1_example() -> SmoothBump {
        SmoothBump::centered(1, 0.8, 1.0).unwrap()
    }

    #[test]
    fn plateau_and_exterior() {
        let b = chi1_example();
        assert_eq!(b.value(&[0.0]), 1.0);
        assert_eq!(b.value(&[0.8]), 1.0);
        assert_eq!(b.value(&[1.2]), 0.0);
        assert_eq!(b.value(&[-1.0]), 0.0);
    }

    #[test]
    fn transition_midpoint() {
        // s = (1 − 0.9)/(1 − 0.8) = 1/2 and h(1/2) = 1/2 by symmetry.
        let v = chi1_example().value(&[0.9]);
        assert!((v - 0.5).abs() < 1e-15, "{v}");
        let v = chi1_example().value(&[0.95]);
        // s = 1/4: 1/(1 + e^{4 − 4/3})
        let expected = 1.0 / (1.0 + (4.0f64 - 4.0 / 3.0).exp());
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn gradient_vanishes_on_constant_regions() {
        let b = chi1_example();
        assert!(b.gradient(&[0.0]).iter().all(|&g| g == 0.0));
        assert!(b.gradient(&[1.5]).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn gradient_matches_central_difference_at_midpoint() {
        let b = chi1_example();
        let h = 1e-6;
        let fd = (b.value(&[0.9 + h]) - b.value(&[0.9 - h])) / (2.0 * h);
        let g = b.gradient(&[0.9])[0];
        assert!(((g - fd) / fd).abs() < 1e-6, "g={g} fd={fd}");
    }

    #[test]
    fn random_gradient_checks_2d() {
        let b = SmoothBump::new(&[0.1, -0.2], 0.5, 1.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5 * b.outer_radius();
        for _ in 0..1000 {
            let y = [rng.random_range(-1.5..1.7), rng.random_range(-1.6..1.2)];
            let g = b.gradient(&y);
            for k in 0..2 {
                let mut yp = y;
                let mut ym = y;
                yp[k] += h;
                ym[k] -= h;
                let fd = (b.value(&yp) - b.value(&ym)) / (2.0 * h);
                let scale = g[k].abs().max(fd.abs());
                if scale > 1e-3 {
                    assert!((g[k] - fd).abs() <= 1e-5 * scale, "y={y:?} g={} fd={fd}", g[k]);
                } else {
                    assert!((g[k] - fd).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn range_plateau_support_and_radial_symmetry() {
        let b = SmoothBump::centered(2, 0.8, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let r: f64 = rng.random_range(0.0..1.4);
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let v = b.value(&[r * th.cos(), r * th.sin()]);
            assert!((0.0..=1.0).contains(&v));
            if r <= 0.8 {
                assert_eq!(v, 1.0);
            }
            if r >= 1.0 {
                assert_eq!(v, 0.0);
            }
            // away from the floating-point saturation bands the value is strictly inside (0, 1)
            let s = (1.0 - r) / 0.2;
            if (0.05..=0.95).contains(&s) {
                assert!(v > 0.0 && v < 1.0);
            }
            let th2: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let v2 = b.value(&[r * th2.cos(), r * th2.sin()]);
            assert!((v - v2).abs() < 1e-13);
        }
    }

    #[test]
    fn profile_is_monotone() {
        let mut last = 0.0;
        for k in 0..=1000 {
            let v = transition_profile(k as f64 / 1000.0);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn default_cutoff_allocation() {
        let p = DeformationParams::reference(1);
        let c = Cutoffs::for_params(&p).unwrap();
        assert!((c.chi1.outer_radius() - 0.9).abs() < 1e-15);
        assert!((c.chi.inner_radius() - 0.95).abs() < 1e-15);
        assert_eq!(c.chi2.inner_radius(), 4.0);
        assert_eq!(c.chi2.outer_radius(), 8.0);
        // χ = 1 on supp χ1
        assert_eq!(c.chi.value(&[c.chi1.outer_radius()]), 1.0);
    }
}
