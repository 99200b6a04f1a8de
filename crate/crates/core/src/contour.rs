//! The deformation `σ(t, y, ξ) = (w, ζ)` of the real cycle `ℝⁿ × ℝⁿ`,
//!
//! ```text
//! w = y − it·s(y,ξ)·ξ/|ξ|,          s = δ′χ1(y)(1 − χ2(ξ)),
//! ζ = ξ − it·η(y,ξ)·|ξ|·y/|y|,      η = δ′(1 − χ1(y))(1 − χ2(ξ))/(r″ − r′),
//! ```
//!
//! together with its Jacobians, the sphere map `σ_ρ`, the `ζ`-only kernel
//! contour `σ_y` and the phase exponent `Re(i(x − w)·ζ)`.
//!
//! The unit vectors `ξ/|ξ|` and `y/|y|` are set to zero wherever their
//! coefficient vanishes, so the maps are defined at `y = 0` and `ξ = 0`.

use nalgebra::DMatrix;

use crate::cutoffs::{Cutoffs, SmoothBump};
use crate::evaluator::TestFunction;
use crate::geometry::DeformationParams;
use crate::linalg::{numerical_rank, realify, SmallMat};
use crate::symbols::AnalyticSymbol;
use crate::{cdot, norm, CVec, Error, RVec, Result, C64};

const I: C64 = C64::new(0.0, 1.0);

/// The deformation data: validated parameters and the cutoffs built from
/// them.
#[derive(Clone, Debug)]
pub struct ContourMap {
    pub params: DeformationParams,
    pub chi1: SmoothBump,
    pub chi2: SmoothBump,
    pub chi: SmoothBump,
    eta0: f64,
}

/// `σ(t, y, ξ)` and the fixed-`t` pullback determinant.
#[derive(Clone, Debug, PartialEq)]
pub struct ContourPoint {
    pub w: CVec,
    pub zeta: CVec,
    pub pullback_det: C64,
}

/// `y`-dependent pieces of the deformation.
#[derive(Clone, Debug)]
pub struct YFactors {
    pub chi1: f64,
    pub grad_chi1: RVec,
    pub yhat: RVec,
    pub ynorm: f64,
}

/// `ξ`-dependent pieces of the deformation.
#[derive(Clone, Debug)]
pub struct XiFactors {
    pub chi2: f64,
    pub grad_chi2: RVec,
    pub xihat: RVec,
    pub rho: f64,
}

fn unit(v: &[f64]) -> (RVec, f64) {
    let r = norm(v);
    if r > 0.0 {
        (v.iter().map(|a| a / r).collect(), r)
    } else {
        (v.iter().map(|_| 0.0).collect(), 0.0)
    }
}

impl ContourMap {
    pub fn new(params: DeformationParams) -> Result<Self> {
        let params = params.validate().map_err(Error::InvalidParams)?;
        let cut = Cutoffs::for_params(&params)?;
        let eta0 = params.zeta_slope();
        Ok(Self {
            params,
            chi1: cut.chi1,
            chi2: cut.chi2,
            chi: cut.chi,
            eta0,
        })
    }

    pub fn dim(&self) -> usize {
        self.params.dim
    }

    /// `δ′/(r″ − r′)`.
    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    pub fn y_factors(&self, y: &[f64]) -> YFactors {
        let (chi1, grad_chi1) = self.chi1.value_and_gradient(y);
        let (yhat, ynorm) = unit(y);
        YFactors {
            chi1,
            grad_chi1,
            yhat,
            ynorm,
        }
    }

    pub fn xi_factors(&self, xi: &[f64]) -> XiFactors {
        let (chi2, grad_chi2) = self.chi2.value_and_gradient(xi);
        let (xihat, rho) = unit(xi);
        XiFactors {
            chi2,
            grad_chi2,
            xihat,
            rho,
        }
    }

    /// Factors at `ξ = ρω` beyond the support of `χ2`.
    pub fn far_xi_factors(&self, omega: &[f64], rho: f64) -> XiFactors {
        XiFactors {
            chi2: 0.0,
            grad_chi2: omega.iter().map(|_| 0.0).collect(),
            xihat: omega.into(),
            rho,
        }
    }

    /// `s(y, ξ)` and `η(y, ξ)`.
    pub fn coefficients(&self, yf: &YFactors, xf: &XiFactors) -> (f64, f64) {
        let s = self.params.delta_prime * yf.chi1 * (1.0 - xf.chi2);
        let eta = self.eta0 * (1.0 - yf.chi1) * (1.0 - xf.chi2);
        (s, eta)
    }

    /// `(w, ζ)` from precomputed factors.
    pub fn map_from_factors(&self, t: f64, y: &[f64], xi: &[f64], yf: &YFactors, xf: &XiFactors) -> (CVec, CVec) {
        let (s, eta) = self.coefficients(yf, xf);
        let w = y
            .iter()
            .zip(&xf.xihat)
            .map(|(&a, &h)| {
                if s == 0.0 {
                    C64::new(a, 0.0)
                } else {
                    C64::new(a, -t * s * h)
                }
            })
            .collect();
        let zeta = xi
            .iter()
            .zip(&yf.yhat)
            .map(|(&a, &h)| {
                if eta == 0.0 {
                    C64::new(a, 0.0)
                } else {
                    C64::new(a, -t * eta * xf.rho * h)
                }
            })
            .collect();
        (w, zeta)
    }

    /// The complex `2n × 2n` matrix `∂(w, ζ)/∂(y, ξ)` at fixed `t`: rows are
    /// `w_1..w_n, ζ_1..ζ_n`, columns `y_1..y_n, ξ_1..ξ_n`.
    pub(crate) fn jacobian_small(&self, t: f64, yf: &YFactors, xf: &XiFactors) -> SmallMat {
        let n = self.dim();
        let dp = self.params.delta_prime;
        let (s, eta) = self.coefficients(yf, xf);
        let mut m = SmallMat::identity(2 * n);
        let it = C64::new(0.0, t);
        // w block
        for j in 0..n {
            let xh_j = xf.xihat[j];
            for i in 0..n {
                // ∂_{y_i} s = δ′(1 − χ2)∂_iχ1
                let dys = dp * (1.0 - xf.chi2) * yf.grad_chi1[i];
                if dys != 0.0 {
                    m.a[j][i] -= it * (xh_j * dys);
                }
                // ∂_{ξ_i} s = −δ′χ1∂_iχ2
                let dxs = -dp * yf.chi1 * xf.grad_chi2[i];
                let mut v = dxs * xh_j;
                if s != 0.0 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    v += s * (delta - xf.xihat[i] * xh_j) / xf.rho;
                }
                if v != 0.0 {
                    m.a[j][n + i] = -it * v;
                }
            }
        }
        // ζ block
        for j in 0..n {
            let yh_j = yf.yhat[j];
            for i in 0..n {
                // ∂_{ξ_i}(η|ξ|) = ∂_{ξ_i}η·|ξ| + η ξ̂_i, with ∂_{ξ_i}η = −η0(1 − χ1)∂_iχ2
                let dxe = -self.eta0 * (1.0 - yf.chi1) * xf.grad_chi2[i];
                let v = (dxe * xf.rho + eta * xf.xihat[i]) * yh_j;
                if v != 0.0 {
                    m.a[n + j][n + i] -= it * v;
                }
                // ∂_{y_i}(η ŷ_j) = ∂_{y_i}η ŷ_j + η(δ_ij − ŷ_iŷ_j)/|y|, ∂_{y_i}η = −η0(1 − χ2)∂_iχ1
                let dye = -self.eta0 * (1.0 - xf.chi2) * yf.grad_chi1[i];
                let mut u = dye * yh_j;
                if eta != 0.0 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    u += eta * (delta - yf.yhat[i] * yh_j) / yf.ynorm;
                }
                if u != 0.0 {
                    m.a[n + j][i] = -it * (xf.rho * u);
                }
            }
        }
        m
    }

    /// `σ(t, y, ξ)` with its fixed-`t` pullback determinant.
    pub fn deform(&self, t: f64, y: &[f64], xi: &[f64]) -> ContourPoint {
        let yf = self.y_factors(y);
        let xf = self.xi_factors(xi);
        self.point_from_factors(t, y, xi, &yf, &xf)
    }

    pub fn point_from_factors(&self, t: f64, y: &[f64], xi: &[f64], yf: &YFactors, xf: &XiFactors) -> ContourPoint {
        let (w, zeta) = self.map_from_factors(t, y, xi, yf, xf);
        let pullback_det = if t == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            self.jacobian_small(t, yf, xf).det()
        };
        ContourPoint { w, zeta, pullback_det }
    }

    /// `d_{(y,ξ)}σ(t, ·, ·)` and its determinant.
    pub fn jacobian_fixed_t(&self, t: f64, y: &[f64], xi: &[f64]) -> (DMatrix<C64>, C64) {
        let m = self.jacobian_small(t, &self.y_factors(y), &self.xi_factors(xi));
        (m.to_dmatrix(), m.det())
    }

    /// `∂_t σ(t, y, ξ) = (−i s ξ̂, −i η |ξ| ŷ)`.
    pub fn t_derivative(&self, y: &[f64], xi: &[f64]) -> CVec {
        let yf = self.y_factors(y);
        let xf = self.xi_factors(xi);
        let (s, eta) = self.coefficients(&yf, &xf);
        let mut out: CVec = xf
            .xihat
            .iter()
            .map(|h| if s == 0.0 { C64::new(0.0, 0.0) } else { -I * (s * h) })
            .collect();
        out.extend(yf.yhat.iter().map(|h| {
            if eta == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                -I * (eta * xf.rho * h)
            }
        }));
        out
    }

    /// Numerical rank of the real `4n × 2n` Jacobian of `(y, ξ) ↦ σ(t, y, ξ)`
    /// (singular values above `1e−8·σ_max`). Equal to `2n` exactly when
    /// `σ(t, ·, ·)` is an immersion at the point.
    pub fn jacobian_rank_full(&self, t: f64, y: &[f64], xi: &[f64]) -> usize {
        let m = self.jacobian_small(t, &self.y_factors(y), &self.xi_factors(xi));
        let n2 = 2 * self.dim();
        numerical_rank(&realify(n2, n2, |i, j| m.a[i][j]), 1e-8)
    }

    /// Rank of the real `4n × (2n + 1)` Jacobian of `(t, y, ξ) ↦ σ`. The
    /// `t`-column vanishes wherever the deformation is off, so the value is
    /// `2n` there and `2n + 1` where `∂_tσ` is transverse to the slice.
    pub fn jacobian_rank_with_t(&self, t: f64, y: &[f64], xi: &[f64]) -> usize {
        let m = self.jacobian_small(t, &self.y_factors(y), &self.xi_factors(xi));
        let dt = self.t_derivative(y, xi);
        let n2 = 2 * self.dim();
        let mat = realify(n2, n2 + 1, |i, j| if j < n2 { m.a[i][j] } else { dt[i] });
        numerical_rank(&mat, 1e-8)
    }

    /// `ζ`-component of `σ_y(t, ξ)`; identical to the `ζ`-component of
    /// [`ContourMap::deform`].
    pub fn kernel_contour(&self, y: &[f64], t: f64, xi: &[f64]) -> CVec {
        let yf = self.y_factors(y);
        let xf = self.xi_factors(xi);
        self.map_from_factors(t, y, xi, &yf, &xf).1
    }

    /// `det ∂ζ/∂ξ` of the kernel contour at fixed `(t, y)`.
    pub fn kernel_det(&self, y: &[f64], t: f64, xi: &[f64]) -> C64 {
        let yf = self.y_factors(y);
        let xf = self.xi_factors(xi);
        self.kernel_det_from_factors(t, &yf, &xf)
    }

    pub(crate) fn kernel_det_from_factors(&self, t: f64, yf: &YFactors, xf: &XiFactors) -> C64 {
        let n = self.dim();
        let full = self.jacobian_small(t, yf, xf);
        let mut m = SmallMat::zeros(n);
        for j in 0..n {
            for i in 0..n {
                m.a[j][i] = full.a[n + j][n + i];
            }
        }
        m.det()
    }

    /// `σ_ρ(t, y, ω) = (y − itδ′χ1(y)ω, ρ[ω − itη0(1 − χ1(y))ŷ])` on the
    /// sphere `|ξ| = ρ`, with the surface determinant for the frame
    /// `(∂_t, ∂_{y_1}, …, ∂_{y_n}, ∂_θ)`; for `n = 2`, `ω = (cos θ, sin θ)`.
    pub fn boundary_map(&self, rho: f64, t: f64, y: &[f64], omega: &[f64]) -> Result<BoundaryPoint> {
        let n = self.dim();
        if !(rho >= self.params.chi2_outer()) {
            return Err(Error::precondition(format!(
                "sphere radius ρ = {rho} must lie beyond supp χ2 (≥ {})",
                self.params.chi2_outer()
            )));
        }
        if n > 2 {
            return Err(Error::Unsupported("boundary map tangent frame for n ≥ 3".into()));
        }
        let yf = self.y_factors(y);
        let xi: RVec = omega.iter().map(|o| o * rho).collect();
        let xf = self.far_xi_factors(omega, rho);
        let (w, zeta) = self.map_from_factors(t, y, &xi, &yf, &xf);
        let dp = self.params.delta_prime;
        let eta = self.eta0 * (1.0 - yf.chi1);
        let mut m = SmallMat::zeros(2 * n);
        let it = C64::new(0.0, t);
        // column 0: ∂_t
        for j in 0..n {
            m.a[j][0] = -I * (dp * yf.chi1 * omega[j]);
            m.a[n + j][0] = if eta == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                -I * (rho * eta * yf.yhat[j])
            };
        }
        // columns 1..=n: ∂_{y_i}
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                m.a[j][1 + i] = C64::new(delta, 0.0) - it * (dp * omega[j] * yf.grad_chi1[i]);
                let mut u = -self.eta0 * yf.grad_chi1[i] * yf.yhat[j];
                if eta != 0.0 {
                    u += eta * (delta - yf.yhat[i] * yf.yhat[j]) / yf.ynorm;
                }
                m.a[n + j][1 + i] = -it * (rho * u);
            }
        }
        // tangent column ∂_θ for n = 2
        let mut tangent: RVec = RVec::new();
        if n == 2 {
            tangent = RVec::from_slice(&[-omega[1], omega[0]]);
            for j in 0..n {
                m.a[j][n + 1] = -it * (dp * yf.chi1 * tangent[j]);
                m.a[n + j][n + 1] = C64::new(rho * tangent[j], 0.0);
            }
        }
        // outward-normal orientation of the face |ξ| = ρ
        let frame = if n == 1 {
            omega[0]
        } else {
            omega[0] * tangent[1] - omega[1] * tangent[0]
        };
        let orientation = if n.is_multiple_of(2) { -frame } else { frame };
        Ok(BoundaryPoint {
            w,
            zeta,
            surface_det: m.det(),
            orientation,
        })
    }
}

/// A point of the sphere contour `σ_ρ` with its surface determinant.
#[derive(Clone, Debug)]
pub struct BoundaryPoint {
    pub w: CVec,
    pub zeta: CVec,
    pub surface_det: C64,
    /// `±1`: sign of the face in the boundary of `(t1, t2) × ℝⁿ × (B(0,ρ)∖B(0,2R))`.
    pub orientation: f64,
}

/// `Re(i(x − w)·ζ)`.
pub fn phase_exponent(x: &[C64], pt: &ContourPoint) -> f64 {
    phase_exponent_raw(x, &pt.w, &pt.zeta)
}

pub fn phase_exponent_raw(x: &[C64], w: &[C64], zeta: &[C64]) -> f64 {
    let d: CVec = x.iter().zip(w).map(|(a, b)| a - b).collect();
    (I * cdot(&d, zeta)).re
}

/// `−|ξ|(tδ′ − |Im x|)`.
pub fn phase_bound(delta_prime: f64, t: f64, x: &[C64], xi_norm: f64) -> f64 {
    -xi_norm * (t * delta_prime - norm(&crate::im_part(x)))
}

/// `−|ξ|(tδ′(1 − χ1(y)) − |Im x|)`.
pub fn kernel_phase_bound(delta_prime: f64, t: f64, chi1_y: f64, x: &[C64], xi_norm: f64) -> f64 {
    -xi_norm * (t * delta_prime * (1.0 - chi1_y) - norm(&crate::im_part(x)))
}

/// `G_x(w, ζ) = e^{iζ·(x − w)} p(x, ζ) u(w)`.
#[derive(Clone, Copy)]
pub struct Integrand<'a> {
    pub symbol: &'a AnalyticSymbol,
    pub input: &'a TestFunction,
    pub x: &'a [C64],
}

impl<'a> Integrand<'a> {
    pub fn new(symbol: &'a AnalyticSymbol, input: &'a TestFunction, x: &'a [C64]) -> Self {
        Self { symbol, input, x }
    }

    /// `u(w)`: the holomorphic extension off the real slice, `u` on it.
    #[inline]
    pub fn input_at(&self, w: &[C64]) -> C64 {
        self.input.eval_at(w)
    }

    #[inline]
    pub fn eval(&self, w: &[C64], zeta: &[C64]) -> C64 {
        let u = self.input_at(w);
        if u == C64::new(0.0, 0.0) {
            return u;
        }
        let d: CVec = self.x.iter().zip(w).map(|(a, b)| a - b).collect();
        (I * cdot(zeta, &d)).exp() * self.symbol.eval_unchecked(self.x, zeta) * u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cmap(n: usize) -> ContourMap {
        ContourMap::new(DeformationParams::reference(n)).unwrap()
    }

    #[test]
    fn identity_slices() {
        let m = cmap(1);
        let p = m.deform(0.0, &[0.3], &[17.0]);
        assert_eq!(p.w[0], c(0.3, 0.0));
        assert_eq!(p.zeta[0], c(17.0, 0.0));
        assert_eq!(p.pullback_det, c(1.0, 0.0));
        let p = m.deform(1.0, &[0.3], &[3.9]);
        assert_eq!(p.w[0], c(0.3, 0.0));
        assert_eq!(p.zeta[0], c(3.9, 0.0));
        assert_eq!(p.pullback_det, c(1.0, 0.0));
        // y = 0 and ξ = 0 are regular points
        let p = m.deform(1.0, &[0.0], &[0.0]);
        assert_eq!(p.pullback_det, c(1.0, 0.0));
        let m2 = cmap(2);
        let p = m2.deform(0.7, &[0.0, 0.0], &[1.0, -2.0]);
        assert_eq!(p.pullback_det, c(1.0, 0.0));
        assert!(p.w.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn hand_evaluated_point() {
        let m = cmap(1);
        let p = m.deform(1.0, &[0.0], &[10.0]);
        assert!((p.w[0] - c(0.0, -0.09)).norm() < 1e-16);
        assert_eq!(p.zeta[0], c(10.0, 0.0));
        // χ1 = 1, χ2 = 0, ∇χ1 = 0: upper-triangular blocks, det 1
        assert!((p.pullback_det - c(1.0, 0.0)).norm() < 1e-15);
        let x = [c(0.2, 0.05)];
        let ph = phase_exponent(&x, &p);
        assert!((ph + 1.4).abs() < 1e-13, "{ph}");
        let b = phase_bound(0.09, 1.0, &x, 10.0);
        assert!((b + 0.4).abs() < 1e-13);
        assert!(ph <= b);
    }

    #[test]
    fn kernel_contour_example() {
        let m = cmap(1);
        let z = m.kernel_contour(&[2.0], 1.0, &[10.0]);
        assert!((z[0] - c(10.0, -4.5)).norm() < 1e-13);
        assert!(m.params.wedge().contains(&z));
        assert_eq!(m.kernel_contour(&[0.5], 1.0, &[10.0])[0], c(10.0, 0.0));
        assert_eq!(m.kernel_contour(&[2.0], 1.0, &[3.0])[0], c(3.0, 0.0));
        let zc = m.deform(1.0, &[2.0], &[10.0]).zeta;
        assert_eq!(zc[0], z[0]);
    }

    #[test]
    fn phase_vanishes_on_real_slice() {
        let m = cmap(1);
        let p = m.deform(0.0, &[0.4], &[33.0]);
        assert_eq!(phase_exponent(&[c(0.1, 0.0)], &p), 0.0);
    }

    fn fd_det(m: &ContourMap, t: f64, y: &[f64], xi: &[f64]) -> C64 {
        let n = m.dim();
        let mut mat = SmallMat::zeros(2 * n);
        for col in 0..2 * n {
            let scale = if col < n { 1.0 } else { crate::norm(xi).max(1.0) };
            let h = 1e-6 * scale;
            let shifted = |sgn: f64| {
                let mut yy = y.to_vec();
                let mut xx = xi.to_vec();
                if col < n {
                    yy[col] += sgn * h;
                } else {
                    xx[col - n] += sgn * h;
                }
                let p = m.deform(t, &yy, &xx);
                let mut v: CVec = p.w.clone();
                v.extend(p.zeta.iter().cloned());
                v
            };
            let a = shifted(1.0);
            let b = shifted(-1.0);
            for row in 0..2 * n {
                mat.a[row][col] = (a[row] - b[row]) / (2.0 * h);
            }
        }
        mat.det()
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1usize, 2] {
            let m = cmap(n);
            for _ in 0..300 {
                let t: f64 = rng.random_range(0.0..1.0);
                let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.3..1.3)).collect();
                let rho: f64 = rng.random_range(2.0..30.0);
                let xi: Vec<f64> = if n == 1 {
                    vec![if rng.random_bool(0.5) { rho } else { -rho }]
                } else {
                    let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    vec![rho * th.cos(), rho * th.sin()]
                };
                let d = m.deform(t, &y, &xi).pullback_det;
                let f = fd_det(&m, t, &y, &xi);
                assert!(
                    (d - f).norm() <= 1e-5 * d.norm(),
                    "n={n} t={t} y={y:?} xi={xi:?}: {d} vs {f}"
                );
            }
        }
    }

    #[test]
    fn one_dimensional_far_determinant_closed_form() {
        let m = cmap(1);
        let eta0 = m.eta0();
        for (y, xi) in [(0.85, 12.0), (0.88, -9.0), (-0.86, 20.0), (1.5, 10.0)] {
            let yf = m.y_factors(&[y]);
            let t = 0.8;
            let sx: f64 = if xi > 0.0 { 1.0 } else { -1.0 };
            let sy: f64 = if y > 0.0 { 1.0 } else { -1.0 };
            let expected = (c(1.0, 0.0) - I * (t * 0.09 * yf.grad_chi1[0] * sx))
                * (c(1.0, 0.0) - I * (t * eta0 * (1.0 - yf.chi1) * sy * sx));
            let d = m.deform(t, &[y], &[xi]).pullback_det;
            assert!((d - expected).norm() < 1e-12 * expected.norm());
        }
    }

    #[test]
    fn rank_is_2n() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = cmap(1);
        for _ in 0..100 {
            let y = [rng.random_range(-1.5..1.5)];
            let xi = [rng.random_range(-40.0..40.0)];
            assert_eq!(m.jacobian_rank_full(0.5, &y, &xi), 2);
        }
        let m2 = cmap(2);
        assert_eq!(m2.jacobian_rank_full(0.5, &[0.85, 0.1], &[12.0, 5.0]), 4);
        assert_eq!(m2.jacobian_rank_full(0.5, &[0.1, 0.1], &[1.0, 0.5]), 4);
        assert_eq!(m2.jacobian_rank_with_t(0.5, &[0.1, 0.1], &[1.0, 0.5]), 4);
        assert_eq!(m2.jacobian_rank_with_t(0.5, &[0.1, 0.1], &[12.0, 0.5]), 5);
    }

    #[test]
    fn deformed_zeta_lies_in_wedge() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in [1usize, 2] {
            let m = cmap(n);
            let wedge = m.params.wedge();
            for _ in 0..10_000 {
                let t: f64 = rng.random_range(0.0..=1.0);
                let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
                let rho: f64 = rng.random_range(4.0..500.0);
                let xi: Vec<f64> = if n == 1 {
                    vec![if rng.random_bool(0.5) { rho } else { -rho }]
                } else {
                    let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    vec![rho * th.cos(), rho * th.sin()]
                };
                let z = m.deform(t, &y, &xi).zeta;
                let real = z.iter().all(|a| a.im == 0.0);
                assert!(real || wedge.contains(&z), "{z:?}");
            }
        }
    }

    #[test]
    fn pullback_determinant_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m = cmap(2);
        let mut sup_small: f64 = 0.0;
        let mut sup_large: f64 = 0.0;
        for k in 0..10_000 {
            let y: Vec<f64> = (0..2).map(|_| rng.random_range(-1.5..1.5)).collect();
            let rho: f64 = if k % 2 == 0 {
                rng.random_range(2.0..50.0)
            } else {
                rng.random_range(50.0..5000.0)
            };
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let d = m.deform(1.0, &y, &[rho * th.cos(), rho * th.sin()]).pullback_det.norm();
            if k % 2 == 0 {
                sup_small = sup_small.max(d);
            } else {
                sup_large = sup_large.max(d);
            }
        }
        assert!(sup_small.is_finite() && sup_large.is_finite());
        assert!(sup_large <= 1.5 * sup_small, "{sup_small} {sup_large}");
    }

    #[test]
    fn boundary_map_limits() {
        let m = cmap(1);
        let b = m.boundary_map(40.0, 0.0, &[0.3], &[1.0]).unwrap();
        assert_eq!(b.w[0], c(0.3, 0.0));
        assert_eq!(b.zeta[0], c(40.0, 0.0));
        let b = m.boundary_map(40.0, 0.7, &[0.3], &[-1.0]).unwrap();
        assert!((b.w[0] - c(0.3, 0.7 * 0.09)).norm() < 1e-15);
        assert_eq!(b.zeta[0], c(-40.0, 0.0));
        assert_eq!(b.orientation, -1.0);
        assert!(m.boundary_map(5.0, 0.5, &[0.0], &[1.0]).is_err());
        // boundary map agrees with deform on the sphere
        let m2 = cmap(2);
        let th: f64 = 0.7;
        let om = [th.cos(), th.sin()];
        let b = m2.boundary_map(30.0, 0.6, &[0.87, -0.2], &om).unwrap();
        let p = m2.deform(0.6, &[0.87, -0.2], &[30.0 * om[0], 30.0 * om[1]]);
        for k in 0..2 {
            assert!((b.w[k] - p.w[k]).norm() < 1e-14);
            assert!((b.zeta[k] - p.zeta[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn boundary_surface_det_matches_finite_differences() {
        let m = cmap(2);
        let (t, y, th, rho) = (0.6, [0.87, -0.2], 0.7f64, 30.0);
        let eval = |t: f64, y: [f64; 2], th: f64| {
            let b = m.boundary_map(rho, t, &y, &[th.cos(), th.sin()]).unwrap();
            let mut v: CVec = b.w.clone();
            v.extend(b.zeta.iter().cloned());
            v
        };
        let h = 1e-6;
        let mut mat = SmallMat::zeros(4);
        let cols: [Box<dyn Fn(f64) -> CVec>; 4] = [
            Box::new(|s| eval(t + s, y, th)),
            Box::new(|s| eval(t, [y[0] + s, y[1]], th)),
            Box::new(|s| eval(t, [y[0], y[1] + s], th)),
            Box::new(|s| eval(t, y, th + s)),
        ];
        for (j, f) in cols.iter().enumerate() {
            let a = f(h);
            let b = f(-h);
            for i in 0..4 {
                mat.a[i][j] = (a[i] - b[i]) / (2.0 * h);
            }
        }
        let b = m.boundary_map(rho, t, &y, &[th.cos(), th.sin()]).unwrap();
        let fd = mat.det();
        assert!(
            (b.surface_det - fd).norm() < 1e-5 * fd.norm(),
            "{} vs {fd}",
            b.surface_det
        );
    }
}
