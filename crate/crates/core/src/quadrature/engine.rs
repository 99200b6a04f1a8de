use serde::Serialize;

use super::rules::{CompensatedSum, FilonRule, GaussRule, FILON_MIN_BETA};
use super::QuadratureConfig;
use crate::contour::{ContourMap, Integrand, YFactors};
use crate::evaluator::TestFunction;
use crate::symbols::AnalyticSymbol;
use crate::{cdot, im_part, norm, re_part, CVec, Error, RVec, Result, C64};

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Radial extent of the `ξ`-integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum XiWindow {
    /// All of `ℝⁿ`, truncated per ray where the remainder is negligible.
    Full,
    /// The annulus `2R < |ξ| < outer`, no truncation; `outer ≥ 4R`.
    Annulus { outer: f64 },
}

/// Value of a contour or kernel integral with diagnostics.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct ContourIntegral {
    pub value: C64,
    /// Largest `ρ` reached on any ray.
    pub rho_max: f64,
    /// Bound on the discarded `ρ`-tails plus a rounding allowance; does not
    /// include the discretization error of the panel rules.
    pub err_estimate: f64,
    pub evaluations: u64,
}

/// Materialized `y` rule.
#[derive(Clone, Debug)]
pub struct YGrid {
    pub nodes: Vec<RVec>,
    pub weights: Vec<f64>,
}

/// A cutoff transition band `inner < |y − center| < outer`.
#[derive(Clone, Debug)]
struct Band {
    center: RVec,
    inner: f64,
    outer: f64,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn domain_pieces(cmap: &ContourMap, input: &TestFunction) -> (Vec<Band>, Vec<(RVec, f64)>) {
    let n = cmap.dim();
    let origin: RVec = std::iter::repeat_n(0.0, n).collect();
    let mut bands = vec![Band {
        center: origin.clone(),
        inner: cmap.chi1.inner_radius(),
        outer: cmap.chi1.outer_radius(),
    }];
    for (inner, outer) in input.bands() {
        bands.push(Band {
            center: input.center().into(),
            inner,
            outer,
        });
    }
    let balls = vec![
        (origin, cmap.chi1.outer_radius()),
        (RVec::from_slice(input.center()), input.support_radius()),
    ];
    (bands, balls)
}

fn max_width_at(bands: &[Band], y: &[f64], hmax: f64, pieces: usize) -> f64 {
    let mut h = hmax;
    for b in bands {
        let d = dist(y, &b.center);
        if d > b.inner && d < b.outer {
            h = h.min((b.outer - b.inner) / pieces as f64);
        }
    }
    h
}

fn subdivide(points: &mut Vec<f64>, width_at: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let mut panels = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = width_at(0.5 * (a + b));
        let k = ((b - a) / h).ceil().max(1.0) as usize;
        for j in 0..k {
            panels.push((
                a + (b - a) * j as f64 / k as f64,
                a + (b - a) * (j + 1) as f64 / k as f64,
            ));
        }
    }
    panels
}

/// Builds the `y` rule: panels break at every cutoff transition radius and
/// are graded geometrically toward `Re x` down to `scale`.
pub fn y_grid(
    cmap: &ContourMap,
    cfg: &QuadratureConfig,
    center: &[f64],
    scale: f64,
    input: &TestFunction,
) -> Result<YGrid> {
    let n = cmap.dim();
    let gl = GaussRule::legendre(cfg.y_nodes);
    let (bands, balls) = domain_pieces(cmap, input);
    let hmax = cfg.y_max_width;
    let pieces = cfg.transition_pieces;
    let mut grading = Vec::new();
    let mut s = scale.max(1e-9);
    while s < hmax {
        grading.push(s);
        s *= 2.0;
    }
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    match n {
        1 => {
            let lo = balls.iter().map(|(c, r)| c[0] - r).fold(f64::INFINITY, f64::min);
            let hi = balls.iter().map(|(c, r)| c[0] + r).fold(f64::NEG_INFINITY, f64::max);
            let mut pts = vec![lo, hi];
            for b in &bands {
                for r in [b.inner, b.outer] {
                    pts.push(b.center[0] - r);
                    pts.push(b.center[0] + r);
                }
            }
            let c = center[0];
            if c > lo && c < hi {
                pts.push(c);
                for g in &grading {
                    pts.push(c - g);
                    pts.push(c + g);
                }
            }
            pts.retain(|p| *p >= lo && *p <= hi);
            let panels = subdivide(&mut pts, |m| max_width_at(&bands, &[m], hmax, pieces));
            for (a, b) in panels {
                for (y, w) in gl.mapped(a, b) {
                    nodes.push(RVec::from_slice(&[y]));
                    weights.push(w);
                }
            }
        }
        2 => {
            let m = cfg.phi_nodes;
            let wphi = std::f64::consts::TAU / m as f64;
            for j in 0..m {
                let phi = std::f64::consts::TAU * j as f64 / m as f64;
                let e = [phi.cos(), phi.sin()];
                // positive roots of |center + r e − c_k| = ρ_k
                let roots = |ck: &[f64], rho: f64| -> Vec<f64> {
                    let d = [center[0] - ck[0], center[1] - ck[1]];
                    let b = d[0] * e[0] + d[1] * e[1];
                    let disc = b * b - (d[0] * d[0] + d[1] * d[1]) + rho * rho;
                    if disc < 0.0 {
                        return vec![];
                    }
                    let sq = disc.sqrt();
                    [-b - sq, -b + sq].into_iter().filter(|r| *r > 0.0).collect()
                };
                let r_end = balls.iter().flat_map(|(c, r)| roots(c, *r)).fold(0.0, f64::max);
                if r_end <= 0.0 {
                    continue;
                }
                let mut pts = vec![0.0, r_end];
                for b in &bands {
                    pts.extend(roots(&b.center, b.inner));
                    pts.extend(roots(&b.center, b.outer));
                }
                pts.extend(grading.iter().cloned());
                pts.retain(|p| *p >= 0.0 && *p <= r_end);
                let panels = subdivide(&mut pts, |r| {
                    max_width_at(&bands, &[center[0] + r * e[0], center[1] + r * e[1]], hmax, pieces)
                });
                for (a, b) in panels {
                    for (r, w) in gl.mapped(a, b) {
                        nodes.push(RVec::from_slice(&[center[0] + r * e[0], center[1] + r * e[1]]));
                        weights.push(w * r * wphi);
                    }
                }
            }
        }
        _ => return Err(Error::Unsupported(format!("quadrature in dimension n = {n}"))),
    }
    Ok(YGrid { nodes, weights })
}

/// What is integrated along each ray.
#[derive(Clone, Copy)]
enum Mode<'a> {
    /// `G_x(σ) det d_{(y,ξ)}σ` over `C(t)`.
    Contour { input: &'a TestFunction },
    /// `e^{i(x−y)·ζ} p(x,ζ) det ∂ζ/∂ξ` over `C_y(t)`.
    Kernel,
}

struct RayResult {
    value: C64,
    rho_end: f64,
    err: f64,
    evals: u64,
}

struct XiEngine<'a> {
    cmap: &'a ContourMap,
    cfg: &'a QuadratureConfig,
    t: f64,
    lambda: f64,
    x: &'a [C64],
    re_x: RVec,
    symbol: &'a AnalyticSymbol,
    mode: Mode<'a>,
    window: XiWindow,
    gl_xi: GaussRule,
    gl_theta: GaussRule,
    filon: FilonRule,
    inner_panels: Vec<(f64, f64)>,
    tail_start: f64,
    poly: f64,
}

impl<'a> XiEngine<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        cmap: &'a ContourMap,
        cfg: &'a QuadratureConfig,
        t: f64,
        lambda: f64,
        x: &'a [C64],
        symbol: &'a AnalyticSymbol,
        mode: Mode<'a>,
        window: XiWindow,
    ) -> Self {
        let lower = match window {
            XiWindow::Full => 0.0,
            XiWindow::Annulus { .. } => cmap.params.chi2_inner(),
        };
        let inner_panels = inner_panels(cmap, cfg, lower, f64::INFINITY);
        let four_r = cmap.params.chi2_outer();
        Self {
            cmap,
            cfg,
            t,
            lambda,
            x,
            re_x: re_part(x),
            symbol,
            mode,
            window,
            gl_xi: GaussRule::legendre(cfg.xi_nodes),
            gl_theta: GaussRule::legendre(cfg.theta_nodes),
            filon: FilonRule::new(cfg.tail_nodes),
            inner_panels,
            tail_start: four_r,
            poly: symbol.order.max(0.0) + (cmap.dim() as f64 - 1.0),
        }
    }

    fn n(&self) -> usize {
        self.cmap.dim()
    }

    /// Narrows the inner panels so that each spans at most four radians of
    /// `e^{iξ·(Re x − y)}` when `|Re x − y| = frequency`.
    fn resolving(mut self, frequency: f64) -> Self {
        if frequency > 0.0 {
            let lower = self.inner_panels.first().map_or(0.0, |p| p.0);
            self.inner_panels = inner_panels(self.cmap, self.cfg, lower, 4.0 / frequency);
        }
        self
    }

    /// Full integrand at `ξ = ρω`, including the polar factor `ρ^{n−1}`.
    #[inline]
    fn sample(&self, y: &[f64], yf: &YFactors, rho: f64, omega: &[f64]) -> C64 {
        let xi: RVec = omega.iter().map(|o| o * rho).collect();
        let xf = self.cmap.xi_factors(&xi);
        let (w, zeta) = self.cmap.map_from_factors(self.t, y, &xi, yf, &xf);
        let (u, det, w) = match self.mode {
            Mode::Contour { input } => {
                let u = input.eval_at(&w);
                if u == ZERO {
                    return ZERO;
                }
                let det = if self.t == 0.0 {
                    C64::new(1.0, 0.0)
                } else {
                    self.cmap.jacobian_small(self.t, yf, &xf).det()
                };
                (u, det, w)
            }
            Mode::Kernel => {
                let det = if self.t == 0.0 {
                    C64::new(1.0, 0.0)
                } else {
                    self.cmap.kernel_det_from_factors(self.t, yf, &xf)
                };
                (C64::new(1.0, 0.0), det, crate::to_complex(y))
            }
        };
        let d: CVec = self.x.iter().zip(&w).map(|(a, b)| a - b).collect();
        let mut expo = I * cdot(&zeta, &d);
        if self.lambda > 0.0 {
            expo -= self.lambda * self.lambda * cdot(&zeta, &zeta);
        }
        let polar = if self.n() == 1 {
            1.0
        } else {
            rho.powi(self.n() as i32 - 1)
        };
        expo.exp() * self.symbol.eval_unchecked(self.x, &zeta) * u * det * polar
    }

    fn inner_part(&self, y: &[f64], yf: &YFactors, omega: &[f64]) -> (C64, u64) {
        let mut acc = CompensatedSum::new();
        let mut evals = 0;
        for &(a, b) in &self.inner_panels {
            for (rho, w) in self.gl_xi.mapped(a, b) {
                acc.add(self.sample(y, yf, rho, omega) * w);
                evals += 1;
            }
        }
        (acc.value(), evals)
    }

    /// `(w, c)` with `ζ = ρc` on the ray beyond `supp χ2`.
    fn tail_frame(&self, y: &[f64], yf: &YFactors, omega: &[f64]) -> (CVec, CVec) {
        let rho = self.tail_start;
        let xi: RVec = omega.iter().map(|o| o * rho).collect();
        let xf = self.cmap.far_xi_factors(omega, rho);
        let (w, zeta) = self.cmap.map_from_factors(self.t, y, &xi, yf, &xf);
        let w = match self.mode {
            Mode::Contour { .. } => w,
            Mode::Kernel => crate::to_complex(y),
        };
        (w, zeta.iter().map(|z| z / rho).collect())
    }

    /// `A = i(x − w)·c` for the ray.
    fn tail_rate(&self, w: &[C64], c: &[C64]) -> C64 {
        let d: CVec = self.x.iter().zip(w).map(|(a, b)| a - b).collect();
        I * cdot(&d, c)
    }

    fn tail_part(&self, y: &[f64], yf: &YFactors, omega: &[f64]) -> Result<RayResult> {
        let n = self.n();
        let (w, c) = self.tail_frame(y, yf, omega);
        let u = match self.mode {
            Mode::Contour { input } => input.eval_at(&w),
            Mode::Kernel => C64::new(1.0, 0.0),
        };
        if u == ZERO {
            return Ok(RayResult {
                value: ZERO,
                rho_end: self.tail_start,
                err: 0.0,
                evals: 0,
            });
        }
        let a_rate = self.tail_rate(&w, &c);
        let cc = cdot(&c, &c);
        let q = self.lambda * self.lambda * cc.re;
        let kappa = -a_rate.re;
        let lam2cc = cc * (self.lambda * self.lambda);
        let det_at = |rho: f64| -> C64 {
            if self.t == 0.0 {
                return C64::new(1.0, 0.0);
            }
            let xf = self.cmap.far_xi_factors(omega, rho);
            match self.mode {
                Mode::Contour { .. } => self.cmap.jacobian_small(self.t, yf, &xf).det(),
                Mode::Kernel => self.cmap.kernel_det_from_factors(self.t, yf, &xf),
            }
        };
        let det_const = if n == 1 { Some(det_at(self.tail_start)) } else { None };
        let amp = |rho: f64| -> C64 {
            let zeta: CVec = c.iter().map(|ci| ci * rho).collect();
            let det = det_const.unwrap_or_else(|| det_at(rho));
            let polar = if n == 1 { 1.0 } else { rho.powi(n as i32 - 1) };
            let mut v = self.symbol.eval_unchecked(self.x, &zeta) * u * det * polar;
            if self.lambda > 0.0 {
                v *= (-lam2cc * (rho * rho)).exp();
            }
            v
        };
        let start = self.tail_start;
        let (end, truncated) = match self.window {
            XiWindow::Annulus { outer } => (outer, false),
            XiWindow::Full => {
                if !(kappa > 0.0) && !(q > 0.0) {
                    return Err(Error::NoDecayMargin { margin: kappa });
                }
                (truncate_ray(start, kappa, q, self.poly, self.cfg.truncation_tol), true)
            }
        };
        let mut acc = CompensatedSum::new();
        let mut evals = 0;
        let mut a = start;
        while a < end {
            let mut b = (a * self.cfg.tail_ratio).min(end);
            if q > 0.0 {
                b = b.min((a * a + 2.0 / (self.lambda * self.lambda * cc.norm())).sqrt());
            }
            if end - b < 1e-9 * end {
                b = end;
            }
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let beta = a_rate * half;
            if beta.norm() <= FILON_MIN_BETA {
                for (rho, wt) in self.gl_xi.mapped(a, b) {
                    acc.add(amp(rho) * (a_rate * rho).exp() * wt);
                    evals += 1;
                }
            } else {
                let (wts, sigma) = self.filon.weights(beta);
                let endpoint = if sigma < 0.0 { a } else { b };
                let mut s = C64::new(0.0, 0.0);
                for (u, wk) in self.filon.nodes.iter().zip(&wts) {
                    s += wk * amp(mid + half * u);
                    evals += 1;
                }
                acc.add(s * (a_rate * endpoint).exp() * half);
            }
            a = b;
        }
        let err = if truncated {
            let rate = kappa + 2.0 * q * end;
            (amp(end) * (a_rate * end).exp()).norm() / rate.max(1e-300)
        } else {
            0.0
        };
        Ok(RayResult {
            value: acc.value(),
            rho_end: end,
            err,
            evals,
        })
    }

    /// `∫_{ℝⁿ} … dξ` at fixed `y` (without the `(2π)^{−n}` factor).
    fn xi_integral(&self, y: &[f64]) -> Result<RayResult> {
        let yf = self.cmap.y_factors(y);
        let mut total = CompensatedSum::new();
        let mut rho_end: f64 = 0.0;
        let mut err = 0.0;
        let mut evals = 0;
        match self.n() {
            1 => {
                for om in [1.0, -1.0] {
                    let (v, e) = self.inner_part(y, &yf, &[om]);
                    total.add(v);
                    evals += e;
                    let r = self.tail_part(y, &yf, &[om])?;
                    total.add(r.value);
                    rho_end = rho_end.max(r.rho_end);
                    err += r.err;
                    evals += r.evals;
                }
            }
            2 => {
                let m = self.cfg.theta_inner;
                let wth = std::f64::consts::TAU / m as f64;
                for k in 0..m {
                    let th = std::f64::consts::TAU * k as f64 / m as f64;
                    let (v, e) = self.inner_part(y, &yf, &[th.cos(), th.sin()]);
                    total.add(v * wth);
                    evals += e;
                }
                for (th, wt) in self.theta_nodes(y, &yf) {
                    let r = self.tail_part(y, &yf, &[th.cos(), th.sin()])?;
                    total.add(r.value * wt);
                    rho_end = rho_end.max(r.rho_end);
                    err += r.err * wt;
                    evals += r.evals;
                }
            }
            n => return Err(Error::Unsupported(format!("quadrature in dimension n = {n}"))),
        }
        Ok(RayResult {
            value: total.value(),
            rho_end,
            err,
            evals,
        })
    }

    /// Tail `θ` rule: Gauss panels graded toward the two directions with
    /// `ω ⊥ Re x − y`, where the ray integral varies fastest.
    fn theta_nodes(&self, y: &[f64], yf: &YFactors) -> Vec<(f64, f64)> {
        let d = [self.re_x[0] - y[0], self.re_x[1] - y[1]];
        let dn = norm(&d);
        let cap = self.cfg.theta_max_width;
        let quarter = std::f64::consts::FRAC_PI_2;
        let mut breaks = vec![0.0];
        let theta_c = d[1].atan2(d[0]) + quarter;
        if dn > 1e-12 {
            let om = [theta_c.cos(), theta_c.sin()];
            let (w, c) = self.tail_frame(y, yf, &om);
            let rate = (-self.tail_rate(&w, &c).re).max(0.0).max(self.lambda);
            let mut width = (0.5 * rate / dn).clamp(1e-7, cap);
            let mut b = 0.0;
            while b < quarter {
                b = (b + width).min(quarter);
                if quarter - b < 0.25 * width {
                    b = quarter;
                }
                breaks.push(b);
                width = (2.0 * width).min(cap);
            }
        } else {
            let k = (quarter / cap).ceil() as usize;
            breaks.extend((1..=k).map(|j| quarter * j as f64 / k as f64));
        }
        let mut out = Vec::new();
        for q in 0..4 {
            let base = theta_c + q as f64 * quarter;
            // quarters alternate direction so that grading always points at a critical angle
            let flip = q % 2 == 1;
            for wdw in breaks.windows(2) {
                let (lo, hi) = if flip {
                    (quarter - wdw[1], quarter - wdw[0])
                } else {
                    (wdw[0], wdw[1])
                };
                for (th, wt) in self.gl_theta.mapped(base + lo, base + hi) {
                    out.push((th, wt));
                }
            }
        }
        out
    }
}

/// Panels of `[lower, 4R]`: `xi_inner_width` below `2R`, `xi_transition_width`
/// across the `χ2` transition, neither wider than `cap`.
fn inner_panels(cmap: &ContourMap, cfg: &QuadratureConfig, lower: f64, cap: f64) -> Vec<(f64, f64)> {
    let two_r = cmap.params.chi2_inner();
    let four_r = cmap.params.chi2_outer();
    let mut panels = Vec::new();
    let mut push = |a: f64, b: f64, h: f64| {
        if b <= a {
            return;
        }
        let k = ((b - a) / h.min(cap)).ceil().max(1.0) as usize;
        for j in 0..k {
            panels.push((
                a + (b - a) * j as f64 / k as f64,
                a + (b - a) * (j + 1) as f64 / k as f64,
            ));
        }
    };
    push(lower, two_r, cfg.xi_inner_width);
    push(lower.max(two_r), four_r, cfg.xi_transition_width);
    panels
}

/// Smallest `L` (found by doubling then bisection) with
/// `−κL − q((a+L)² − a²) + m ln(1 + L/a) < ln tol`; returns `a + L`.
fn truncate_ray(a: f64, kappa: f64, q: f64, m: f64, tol: f64) -> f64 {
    let g = |l: f64| -kappa * l - q * ((a + l) * (a + l) - a * a) + m * (1.0 + l / a).ln();
    let target = tol.ln();
    let mut hi = a.max(1.0);
    let mut lo = 0.0;
    while g(hi) >= target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-3 * hi {
            break;
        }
    }
    a + hi
}

fn check_common(cmap: &ContourMap, x: &[C64], t: f64, lambda: f64) -> Result<f64> {
    if x.len() != cmap.dim() {
        return Err(Error::domain("evaluation point dimension mismatch"));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::precondition(format!("t = {t} outside [0, 1]")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::precondition("λ must be nonnegative"));
    }
    let margin = t * cmap.params.delta_prime - norm(&im_part(x));
    if lambda == 0.0 && !(margin > 0.0) {
        return Err(Error::NoDecayMargin { margin });
    }
    if t > 0.0 && !(norm(&re_part(x)) < cmap.params.r_prime) {
        return Err(Error::precondition(format!(
            "|Re x| = {} must be below r′ = {}",
            norm(&re_part(x)),
            cmap.params.r_prime
        )));
    }
    Ok(margin)
}

/// `∫_{C(t)} e^{iζ·(x−w)} e^{−λ²ζ·ζ} p(x,ζ) u(w) dw ∧ đζ`, `đζ = (2π)^{−n}dζ`.
pub fn integrate_contour(
    cmap: &ContourMap,
    g: &Integrand,
    t: f64,
    cfg: &QuadratureConfig,
    lambda: f64,
) -> Result<ContourIntegral> {
    integrate_contour_window(cmap, g, t, cfg, lambda, XiWindow::Full)
}

/// As [`integrate_contour`], restricted in `ξ` to `window`.
pub fn integrate_contour_window(
    cmap: &ContourMap,
    g: &Integrand,
    t: f64,
    cfg: &QuadratureConfig,
    lambda: f64,
    window: XiWindow,
) -> Result<ContourIntegral> {
    cfg.validate()?;
    let margin = match window {
        XiWindow::Full => check_common(cmap, g.x, t, lambda)?,
        XiWindow::Annulus { outer } => {
            if !(outer >= cmap.params.chi2_outer()) {
                return Err(Error::precondition("annulus outer radius must be at least 4R"));
            }
            t * cmap.params.delta_prime - norm(&im_part(g.x))
        }
    };
    if g.input.is_zero() {
        return Ok(ContourIntegral::default());
    }
    let scale = if margin > 0.0 {
        margin.max(lambda)
    } else {
        lambda.max(1e-3)
    };
    let grid = y_grid(cmap, cfg, &re_part(g.x), scale, g.input)?;
    let engine = XiEngine::new(
        cmap,
        cfg,
        t,
        lambda,
        g.x,
        g.symbol,
        Mode::Contour { input: g.input },
        window,
    );
    let mut acc = CompensatedSum::new();
    let mut abs_sum = 0.0;
    let mut out = ContourIntegral::default();
    for (y, wy) in grid.nodes.iter().zip(&grid.weights) {
        let yf = cmap.y_factors(y);
        if yf.chi1 == 0.0 && g.input.eval_real(y) == ZERO {
            continue;
        }
        let r = engine.xi_integral(y)?;
        if !(r.value.re.is_finite() && r.value.im.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("y = {:?}", y.as_slice()),
            });
        }
        let term = r.value * *wy;
        acc.add(term);
        abs_sum += term.norm();
        out.rho_max = out.rho_max.max(r.rho_end);
        out.err_estimate += r.err * wy;
        out.evaluations += r.evals;
    }
    let norm_const = std::f64::consts::TAU.powi(-(cmap.dim() as i32));
    out.value = acc.value() * norm_const;
    out.err_estimate = (out.err_estimate + 1e-15 * abs_sum) * norm_const;
    Ok(out)
}

/// `(1 − χ(y)) ∫_{C_y(t)} e^{i(x−y)·ζ} e^{−λ²ζ·ζ} p(x,ζ) đζ`.
pub fn integrate_kernel(
    cmap: &ContourMap,
    symbol: &AnalyticSymbol,
    x: &[C64],
    y: &[f64],
    t: f64,
    cfg: &QuadratureConfig,
    lambda: f64,
) -> Result<ContourIntegral> {
    cfg.validate()?;
    if y.len() != cmap.dim() {
        return Err(Error::domain("kernel point dimension mismatch"));
    }
    let weight = 1.0 - cmap.chi.value(y);
    if weight == 0.0 {
        return Ok(ContourIntegral::default());
    }
    let chi1 = cmap.chi1.value(y);
    let margin = t * cmap.params.delta_prime * (1.0 - chi1) - norm(&im_part(x));
    if lambda == 0.0 && !(margin > 0.0) {
        return Err(Error::NoDecayMargin { margin });
    }
    if t > 0.0 && !(norm(&re_part(x)) < cmap.params.r_prime) {
        return Err(Error::precondition(format!(
            "|Re x| must be below r′ = {}",
            cmap.params.r_prime
        )));
    }
    let freq = norm(&re_part(x).iter().zip(y).map(|(a, b)| a - b).collect::<RVec>());
    let engine = XiEngine::new(cmap, cfg, t, lambda, x, symbol, Mode::Kernel, XiWindow::Full).resolving(freq);
    let r = engine.xi_integral(y)?;
    if !(r.value.re.is_finite() && r.value.im.is_finite()) {
        return Err(Error::NonFinite {
            location: format!("kernel at y = {y:?}"),
        });
    }
    let norm_const = std::f64::consts::TAU.powi(-(cmap.dim() as i32)) * weight;
    Ok(ContourIntegral {
        value: r.value * norm_const,
        rho_max: r.rho_end,
        err_estimate: (r.err + 1e-15 * r.value.norm()) * norm_const,
        evaluations: r.evals,
    })
}
