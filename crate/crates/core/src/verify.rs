//! Sampled checks of the inequalities, invariances and vanishing statements
//! behind the deformation: contour independence, the Stokes boundary
//! identity, phase and Gaussian bounds, holomorphy of computed extensions
//! and the integrand decay envelope.
//!
//! All margins are floating-point; nothing here is a certificate.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contour::{kernel_phase_bound, phase_bound, phase_exponent_raw, ContourMap, Integrand};
use crate::evaluator::{op_deformed, TestFunction};
use crate::geometry::DeformationParams;
use crate::linalg::SmallMat;
use crate::quadrature::{integrate_contour_window, y_grid, CompensatedSum, GaussRule, QuadratureConfig, XiWindow};
use crate::symbols::AnalyticSymbol;
use crate::{im_part, japanese_bracket, norm, CVec, Error, RVec, Result, C64};

/// Outcome of one check. A check passes iff `worst_margin ≥ −tolerance`;
/// residual checks report `−residual` as their margin.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub worst_margin: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub location: String,
    pub seed: Option<u64>,
    #[serde(default)]
    pub details: BTreeMap<String, f64>,
}

impl CheckReport {
    fn new(name: &str, worst_margin: f64, tolerance: f64, samples: usize, location: String, seed: Option<u64>) -> Self {
        Self {
            name: name.into(),
            passed: worst_margin >= -tolerance,
            worst_margin,
            tolerance,
            samples,
            location,
            seed,
            details: BTreeMap::new(),
        }
    }

    fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.into(), value);
        self
    }
}

/// Default tolerances; all are relative except `inequality`, which is the
/// admitted negative margin of normalized pointwise bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub invariance: f64,
    pub morera: f64,
    pub stokes: f64,
    pub inequality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            invariance: 1e-6,
            morera: 1e-4,
            stokes: 1e-5,
            inequality: 1e-12,
        }
    }
}

/// `|∫_{C(t2)} − ∫_{C(t1)}|` relative to the larger of the two.
#[allow(clippy::too_many_arguments)]
pub fn check_deformation_invariance(
    p: &AnalyticSymbol,
    u: &TestFunction,
    params: &DeformationParams,
    x: &[C64],
    t1: f64,
    t2: f64,
    cfg: &QuadratureConfig,
    tol: f64,
) -> Result<CheckReport> {
    let a = op_deformed(p, u, params, t1, x, cfg)?;
    let b = op_deformed(p, u, params, t2, x, cfg)?;
    let scale = a.value.norm().max(b.value.norm());
    let rel = if scale == 0.0 {
        0.0
    } else {
        (a.value - b.value).norm() / scale
    };
    Ok(CheckReport::new(
        "deformation_invariance",
        -rel,
        tol,
        2,
        format!("x = {x:?}, t = ({t1}, {t2})"),
        None,
    )
    .detail("relative_difference", rel)
    .detail("value_t1_re", a.value.re)
    .detail("value_t1_im", a.value.im)
    .detail("value_t2_re", b.value.re)
    .detail("value_t2_im", b.value.im))
}

/// `(t1, t2) × y-box × {2R < |ξ| < ρ}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerDomain {
    pub t1: f64,
    pub t2: f64,
    /// `[lo, hi]` per coordinate.
    pub y_box: Vec<(f64, f64)>,
    pub rho_inner: f64,
    pub rho: f64,
}

impl CornerDomain {
    pub fn new(t1: f64, t2: f64, y_box: Vec<(f64, f64)>, rho_inner: f64, rho: f64) -> Result<Self> {
        if !(0.0 <= t1 && t1 < t2 && t2 <= 1.0) {
            return Err(Error::domain(format!(
                "corner domain needs 0 ≤ t1 < t2 ≤ 1 (got {t1}, {t2})"
            )));
        }
        if !(rho > rho_inner && rho_inner > 0.0) {
            return Err(Error::domain(format!(
                "corner domain needs ρ > 2R > 0 (got 2R = {rho_inner}, ρ = {rho})"
            )));
        }
        if y_box.iter().any(|(a, b)| !(a < b)) {
            return Err(Error::domain("degenerate y-box"));
        }
        Ok(Self {
            t1,
            t2,
            y_box,
            rho_inner,
            rho,
        })
    }

    /// The standard domain for `params` with a y-box covering `B(0, half_width)`.
    pub fn for_params(params: &DeformationParams, t1: f64, t2: f64, half_width: f64, rho: f64) -> Result<Self> {
        Self::new(
            t1,
            t2,
            vec![(-half_width, half_width); params.dim],
            params.chi2_inner(),
            rho,
        )
    }
}

/// The four face integrals of `∂Q(ρ)` and the Stokes sum. The `y`-box faces
/// vanish identically when the box contains the support of the integrand;
/// `box_contains_support` records whether it does.
#[derive(Clone, Debug, Serialize)]
pub struct StokesReport {
    pub report: CheckReport,
    pub face_t1: C64,
    pub face_t2: C64,
    pub face_inner: C64,
    pub face_outer: C64,
    pub total: C64,
    pub box_contains_support: bool,
}

fn sphere_directions(n: usize, rho: f64) -> Vec<(RVec, f64)> {
    match n {
        1 => vec![(RVec::from_slice(&[1.0]), 1.0), (RVec::from_slice(&[-1.0]), 1.0)],
        _ => {
            let m = (4.0 * rho).ceil().max(64.0) as usize;
            let h = std::f64::consts::TAU / m as f64;
            (0..m)
                .map(|k| {
                    let th = h * k as f64;
                    (RVec::from_slice(&[th.cos(), th.sin()]), h)
                })
                .collect()
        }
    }
}

fn box_contains(b: &[(f64, f64)], center: &[f64], radius: f64) -> bool {
    b.iter()
        .zip(center)
        .all(|((lo, hi), c)| c - radius >= *lo && c + radius <= *hi)
}

/// `Σ_faces ∫ σ*μ_x` over `∂Q(ρ)` for real `x`, each face by tensor
/// Gauss–Legendre in `t`, the engine's `y` rule and `ξ̂` on the sphere.
#[allow(clippy::too_many_arguments)]
pub fn check_stokes_residual(
    p: &AnalyticSymbol,
    u: &TestFunction,
    params: &DeformationParams,
    x: &[C64],
    q: &CornerDomain,
    cfg: &QuadratureConfig,
    t_nodes: usize,
    tol: f64,
) -> Result<StokesReport> {
    let cmap = ContourMap::new(*params)?;
    let n = params.dim;
    if x.iter().any(|z| z.im != 0.0) || norm(&crate::re_part(x)) >= params.r_prime {
        return Err(Error::precondition("the Stokes check needs real x with |x| < r′"));
    }
    if (q.rho_inner - params.chi2_inner()).abs() > 1e-12 {
        return Err(Error::precondition("the inner face of Q(ρ) must be |ξ| = 2R"));
    }
    if q.rho < params.chi2_outer() {
        return Err(Error::precondition(format!(
            "ρ = {} must be at least 4R = {}",
            q.rho,
            params.chi2_outer()
        )));
    }
    let g = Integrand::new(p, u, x);
    let window = XiWindow::Annulus { outer: q.rho };
    let face_t1 = integrate_contour_window(&cmap, &g, q.t1, cfg, 0.0, window)?.value;
    let face_t2 = integrate_contour_window(&cmap, &g, q.t2, cfg, 0.0, window)?.value;

    let re_x = crate::re_part(x);
    let ygrid = y_grid(&cmap, cfg, &re_x, (q.t1 * params.delta_prime).max(1e-3), u)?;
    let trule = GaussRule::legendre(t_nodes);
    let norm_const = std::f64::consts::TAU.powi(-(n as i32));

    let mut outer = CompensatedSum::new();
    for (t, wt) in trule.mapped(q.t1, q.t2) {
        for (y, wy) in ygrid.nodes.iter().zip(&ygrid.weights) {
            for (omega, wo) in sphere_directions(n, q.rho) {
                let bp = cmap.boundary_map(q.rho, t, y, &omega)?;
                let v = g.eval(&bp.w, &bp.zeta) * bp.surface_det * (bp.orientation * wt * wy * wo);
                outer.add(v);
            }
        }
    }
    let face_outer = outer.value() * norm_const;

    let mut inner = CompensatedSum::new();
    for (t, wt) in trule.mapped(q.t1, q.t2) {
        for (y, wy) in ygrid.nodes.iter().zip(&ygrid.weights) {
            for (omega, wo) in sphere_directions(n, q.rho_inner) {
                let xi: RVec = omega.iter().map(|o| o * q.rho_inner).collect();
                let (w, zeta) = {
                    let pt = cmap.deform(t, y, &xi);
                    (pt.w, pt.zeta)
                };
                let det = inner_face_det(&cmap, t, y, &xi, &omega, q.rho_inner);
                inner.add(g.eval(&w, &zeta) * det * (wt * wy * wo));
            }
        }
    }
    let face_inner = inner.value() * norm_const;

    let total = face_t2 - face_t1 + face_outer - face_inner;
    let scale = face_t1.norm().max(face_t2.norm()).max(face_outer.norm());
    let rel = if scale == 0.0 { 0.0 } else { total.norm() / scale };
    let box_ok = box_contains(&q.y_box, &[0.0; 3][..n], cmap.chi1.outer_radius())
        && box_contains(&q.y_box, u.center(), u.support_radius());
    let mut report = CheckReport::new(
        "stokes_residual",
        -rel,
        tol,
        t_nodes * ygrid.nodes.len(),
        format!("x = {x:?}, ρ = {}", q.rho),
        None,
    )
    .detail("relative_total", rel)
    .detail("face_inner_abs", face_inner.norm())
    .detail("face_outer_abs", face_outer.norm());
    if face_inner != C64::new(0.0, 0.0) || !box_ok {
        report.passed = false;
    }
    Ok(StokesReport {
        report,
        face_t1,
        face_t2,
        face_inner,
        face_outer,
        total,
        box_contains_support: box_ok,
    })
}

/// Surface determinant of `σ` on `|ξ| = ρ` in the frame `(∂_t, ∂_y, ∂_θ)`
/// from the general `t`-derivative, valid inside the `χ2` transition too.
fn inner_face_det(cmap: &ContourMap, t: f64, y: &[f64], xi: &[f64], omega: &[f64], rho: f64) -> C64 {
    let n = cmap.dim();
    let dt = cmap.t_derivative(y, xi);
    let (jac, _) = cmap.jacobian_fixed_t(t, y, xi);
    let mut m = SmallMat::zeros(2 * n);
    for r in 0..2 * n {
        m.a[r][0] = dt[r];
        for i in 0..n {
            m.a[r][1 + i] = jac[(r, i)];
        }
        if n == 2 {
            let tangent = [-omega[1], omega[0]];
            m.a[r][n + 1] = (0..n).map(|j| jac[(r, n + j)] * (rho * tangent[j])).sum();
        }
    }
    m.det()
}

/// `|face_outer(ρ)| / (e^{−ρ t1 δ′}⟨ρ⟩^{d+n})` for each `ρ`; the envelope
/// holds when these ratios do not grow.
#[allow(clippy::too_many_arguments)]
pub fn outer_face_ratios(
    p: &AnalyticSymbol,
    u: &TestFunction,
    params: &DeformationParams,
    x: &[C64],
    t1: f64,
    t2: f64,
    rhos: &[f64],
    cfg: &QuadratureConfig,
    t_nodes: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    let half = u.support_radius() + norm(u.center()) + params.r;
    rhos.iter()
        .map(|&rho| {
            let q = CornerDomain::for_params(params, t1, t2, half, rho)?;
            let r = check_stokes_residual(p, u, params, x, &q, cfg, t_nodes, f64::INFINITY)?;
            let env = (-rho * t1 * params.delta_prime).exp() * japanese_bracket(rho).powf(p.order + params.dim as f64);
            Ok((rho, r.face_outer.norm(), r.face_outer.norm() / env))
        })
        .collect()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> RVec {
    loop {
        let v: RVec = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.iter().map(|a| a / r).collect();
        }
    }
}

fn random_in_ball(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> RVec {
    let dir = random_unit(rng, n);
    let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
    dir.iter().map(|a| a * r).collect()
}

/// Samples both phase inequalities at random `(t, y, ξ, x)` with `χ2(ξ) = 0`
/// and `|Re x| < r′`. Margins are `(bound − actual)/|ξ|`.
pub fn check_phase_bounds(params: &DeformationParams, samples: usize, seed: u64) -> Result<CheckReport> {
    let cmap = ContourMap::new(*params)?;
    let n = params.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dp = params.delta_prime;
    let mut worst = (f64::INFINITY, String::new());
    let mut worst_kernel = f64::INFINITY;
    let tol = Tolerances::default().inequality;
    let mut violations = 0usize;
    for _ in 0..samples {
        let t = rng.random::<f64>();
        let y = random_in_ball(&mut rng, n, 1.2 * params.r);
        let rho = params.chi2_outer() * 10f64.powf(rng.random_range(0.0..3.0));
        let xi: RVec = random_unit(&mut rng, n).iter().map(|a| a * rho).collect();
        let re = random_in_ball(&mut rng, n, params.r_prime * 0.999_999);
        let im = random_in_ball(&mut rng, n, 2.0 * dp);
        let x: CVec = re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)).collect();

        let pt = cmap.deform(t, &y, &xi);
        let actual = phase_exponent_raw(&x, &pt.w, &pt.zeta);
        let m = (phase_bound(dp, t, &x, rho) - actual) / rho;
        violations += (m < -tol) as usize;
        if m < worst.0 {
            worst = (
                m,
                format!(
                    "phase: t = {t}, y = {:?}, ξ = {:?}, x = {x:?}",
                    y.as_slice(),
                    xi.as_slice()
                ),
            );
        }

        let zeta = cmap.kernel_contour(&y, t, &xi);
        let yc: CVec = y.iter().map(|a| C64::new(*a, 0.0)).collect();
        let actual_k = phase_exponent_raw(&x, &yc, &zeta);
        let mk = (kernel_phase_bound(dp, t, cmap.chi1.value(&y), &x, rho) - actual_k) / rho;
        violations += (mk < -tol) as usize;
        if mk < worst_kernel {
            worst_kernel = mk;
        }
        if mk < worst.0 {
            worst = (
                mk,
                format!(
                    "kernel phase: t = {t}, y = {:?}, ξ = {:?}, x = {x:?}",
                    y.as_slice(),
                    xi.as_slice()
                ),
            );
        }
    }
    Ok(
        CheckReport::new("phase_bounds", worst.0, tol, 2 * samples, worst.1, Some(seed))
            .detail("worst_kernel_margin", worst_kernel)
            .detail("violations", violations as f64),
    )
}

/// `λ²(Re(ζ·ζ) − ½|Re ζ|²)`, the exponent slack of
/// `|e^{−λ²ζ·ζ}| ≤ e^{−½λ²|Re ζ|²}`.
pub fn gaussian_bound_slack(zeta: &[C64], lambda: f64) -> f64 {
    let re: f64 = zeta.iter().map(|z| z.re * z.re).sum();
    let zz = crate::cdot(zeta, zeta);
    lambda * lambda * (zz.re - 0.5 * re)
}

/// Samples the Gaussian bound on `W_{1/2}`; margins normalized by `λ²|Re ζ|²`.
pub fn check_gaussian_bound(dim: usize, samples: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (f64::INFINITY, String::new());
    for _ in 0..samples {
        let rho = 10f64.powf(rng.random_range(-2.0..3.0));
        let re: RVec = random_unit(&mut rng, dim).iter().map(|a| a * rho).collect();
        let im: RVec = random_in_ball(&mut rng, dim, 0.5 * rho * 0.999_999);
        let zeta: CVec = re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)).collect();
        let lambda = rng.random_range(0.01..2.0);
        let m = gaussian_bound_slack(&zeta, lambda) / (lambda * lambda * rho * rho);
        if m < worst.0 {
            worst = (m, format!("ζ = {zeta:?}, λ = {lambda}"));
        }
    }
    CheckReport::new(
        "gaussian_bound",
        worst.0,
        Tolerances::default().inequality,
        samples,
        worst.1,
        Some(seed),
    )
}

/// Discrete Morera residuals over every cell of a rectangular grid in one
/// complex coordinate. `values[j][i]` is the value at `re[i] + i·im[j]`.
/// Each residual is the trapezoidal `∮ F dz` around the cell divided by
/// the cell perimeter and `max |F|`. Cauchy–Riemann residuals
/// `|∂_x F + i∂_y F|·h/max|F|` at interior nodes are reported alongside.
pub fn check_holomorphy(re: &[f64], im: &[f64], values: &[Vec<C64>], tol: f64) -> Result<CheckReport> {
    if re.len() < 2 || im.len() < 2 || values.len() != im.len() || values.iter().any(|r| r.len() != re.len()) {
        return Err(Error::domain(
            "holomorphy check needs a rectangular grid of at least 2 × 2 values",
        ));
    }
    let vmax = values.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    if !vmax.is_finite() {
        return Err(Error::NonFinite {
            location: "holomorphy grid".into(),
        });
    }
    let z = |i: usize, j: usize| C64::new(re[i], im[j]);
    let mut worst = (0.0f64, String::new());
    let mut cells = 0;
    for j in 0..im.len() - 1 {
        for i in 0..re.len() - 1 {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1), (i, j)];
            let mut acc = C64::new(0.0, 0.0);
            let mut perimeter = 0.0;
            for e in corners.windows(2) {
                let (a, b) = (e[0], e[1]);
                let dz = z(b.0, b.1) - z(a.0, a.1);
                acc += (values[a.1][a.0] + values[b.1][b.0]) * 0.5 * dz;
                perimeter += dz.norm();
            }
            let r = if vmax == 0.0 {
                0.0
            } else {
                acc.norm() / (perimeter * vmax)
            };
            cells += 1;
            if r > worst.0 || worst.1.is_empty() {
                worst = (r, format!("cell at {}", z(i, j)));
            }
        }
    }
    let mut cr = 0.0f64;
    for j in 1..im.len().saturating_sub(1) {
        for i in 1..re.len().saturating_sub(1) {
            let hx = re[i + 1] - re[i - 1];
            let hy = im[j + 1] - im[j - 1];
            let fx = (values[j][i + 1] - values[j][i - 1]) / hx;
            let fy = (values[j + 1][i] - values[j - 1][i]) / hy;
            let h = 0.5 * hx.min(hy);
            if vmax > 0.0 {
                cr = cr.max((fx + C64::new(0.0, 1.0) * fy).norm() * h / vmax);
            }
        }
    }
    Ok(
        CheckReport::new("holomorphy_morera", -worst.0, tol, cells, worst.1, None)
            .detail("max_morera_residual", worst.0)
            .detail("max_cauchy_riemann_residual", cr),
    )
}

/// Fits `C = max |G_x∘σ · det dσ| / (e^{−|ξ|(tδ′−|Im x|)}⟨ξ⟩^d)` on
/// `|ξ| ≤ fit_radius` and tests the bound with that `C` on
/// `fit_radius < |ξ| ≤ test_radius`. Samples with `y` outside
/// `supp u ∪ supp χ1` must give an integrand of exactly `0`.
#[allow(clippy::too_many_arguments)]
pub fn check_decay_envelope(
    p: &AnalyticSymbol,
    u: &TestFunction,
    params: &DeformationParams,
    x: &[C64],
    t: f64,
    fit_radius: f64,
    test_radius: f64,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let cmap = ContourMap::new(*params)?;
    let n = params.dim;
    let margin = t * params.delta_prime - norm(&im_part(x));
    if !(margin > 0.0) {
        return Err(Error::NoDecayMargin { margin });
    }
    let g = Integrand::new(p, u, x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = (norm(u.center()) + u.support_radius()).max(cmap.chi1.outer_radius());
    let envelope = |r: f64| (-r * margin).exp() * japanese_bracket(r).powf(p.order);
    let sample = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| -> (RVec, RVec, f64) {
        let y = random_in_ball(rng, n, reach);
        let r = rng.random_range(lo..hi);
        let xi: RVec = random_unit(rng, n).iter().map(|a| a * r).collect();
        let pt = cmap.deform(t, &y, &xi);
        let v = (g.eval(&pt.w, &pt.zeta) * pt.pullback_det).norm();
        (y, xi, v)
    };
    let mut c_fit = 0.0f64;
    for _ in 0..samples {
        let (_, xi, v) = sample(&mut rng, 0.0, fit_radius);
        c_fit = c_fit.max(v / envelope(norm(&xi)));
    }
    let mut worst = (f64::INFINITY, String::new());
    for _ in 0..samples {
        let (y, xi, v) = sample(&mut rng, fit_radius, test_radius);
        let bound = c_fit * envelope(norm(&xi));
        let m = if bound > 0.0 {
            (bound - v) / bound
        } else if v == 0.0 {
            0.0
        } else {
            -1.0
        };
        if m < worst.0 {
            worst = (m, format!("y = {:?}, ξ = {:?}", y.as_slice(), xi.as_slice()));
        }
    }
    let mut support_violations = 0.0;
    for _ in 0..samples.min(1000) {
        let dir = random_unit(&mut rng, n);
        let y: RVec = dir.iter().map(|a| a * (reach + 0.01 + rng.random::<f64>())).collect();
        let r = rng.random_range(0.0..test_radius);
        let xi: RVec = random_unit(&mut rng, n).iter().map(|a| a * r).collect();
        let pt = cmap.deform(t, &y, &xi);
        if g.eval(&pt.w, &pt.zeta) * pt.pullback_det != C64::new(0.0, 0.0) {
            support_violations += 1.0;
        }
    }
    let mut report = CheckReport::new(
        "decay_envelope",
        worst.0,
        Tolerances::default().inequality,
        2 * samples,
        worst.1,
        Some(seed),
    )
    .detail("fitted_constant", c_fit)
    .detail("support_violations", support_violations);
    if support_violations > 0.0 {
        report.passed = false;
    }
    Ok(report)
}

/// Values of `F` on the rectangle `re × im` in coordinate `coord`, the
/// other coordinates fixed at `base`; rows follow `im`.
pub fn plane_grid(base: &[C64], coord: usize, re: &[f64], im: &[f64]) -> Vec<CVec> {
    let mut pts = Vec::with_capacity(re.len() * im.len());
    for &b in im {
        for &a in re {
            let mut z: CVec = base.into();
            z[coord] = C64::new(a, b);
            pts.push(z);
        }
    }
    pts
}

/// Reshapes values computed on [`plane_grid`] points into rows.
pub fn rows(values: &[C64], width: usize) -> Vec<Vec<C64>> {
    values.chunks(width).map(|c| c.to_vec()).collect()
}

/// The default suite for one configuration: invariance at `x = 0`, phase
/// and Gaussian bounds, the decay envelope, holomorphy on a small grid and,
/// for `n = 1`, the Stokes identity at `ρ = 10R`.
pub fn default_suite(
    p: &AnalyticSymbol,
    u: &TestFunction,
    params: &DeformationParams,
    cfg: &QuadratureConfig,
    tol: &Tolerances,
    samples: usize,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    let n = params.dim;
    let zero: CVec = std::iter::repeat_n(C64::new(0.0, 0.0), n).collect();
    let mut out = vec![
        check_deformation_invariance(p, u, params, &zero, 0.5, 1.0, cfg, tol.invariance)?,
        check_phase_bounds(params, samples, seed)?,
        check_gaussian_bound(n, samples, seed.wrapping_add(1)),
    ];
    let mut x_env = zero.clone();
    x_env[0] = C64::new(0.0, 0.5 * params.delta_prime);
    out.push(check_decay_envelope(
        p,
        u,
        params,
        &x_env,
        1.0,
        50.0,
        200.0,
        samples.min(20_000),
        seed.wrapping_add(2),
    )?);
    let a = 0.5 * params.r_prime;
    let b = 0.8 * params.delta_prime;
    let re: Vec<f64> = (0..5).map(|k| -a + 2.0 * a * k as f64 / 4.0).collect();
    let im: Vec<f64> = (0..5).map(|k| -b + 2.0 * b * k as f64 / 4.0).collect();
    let pts = plane_grid(&zero, 0, &re, &im);
    let res = crate::evaluator::extend(p, u, params, &pts, cfg)?;
    let values = res.values()?;
    out.push(check_holomorphy(&re, &im, &rows(&values, re.len()), tol.morera)?);
    if n == 1 {
        let half = u.support_radius() + norm(u.center()) + params.r;
        let q = CornerDomain::for_params(params, 0.5, 1.0, half, 10.0 * params.truncation)?;
        out.push(check_stokes_residual(p, u, params, &zero, &q, cfg, 16, tol.stokes)?.report);
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}
