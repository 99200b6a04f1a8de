//! User-facing evaluation: the real-axis reference `Op(p)u(x)` by direct
//! Fourier quadrature, deformed evaluation and holomorphic extension at
//! complex `x`, the kernel `K(x, y)` and distributional inputs, and
//! extension over tube domains by translation.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{ContourMap, Integrand};
use crate::cutoffs::SmoothBump;
use crate::geometry::{DeformationParams, TubeDomain};
use crate::quadrature::{
    integrate_contour, integrate_kernel, regularized_limit, CompensatedSum, ContourIntegral, GaussRule,
    QuadratureConfig, RegularizationSchedule, RegularizedLimit,
};
use crate::symbols::{AnalyticSymbol, ComplexValue};
use crate::{cdot, im_part, norm, re_part, to_complex, CVec, Error, RVec, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

pub type RealFn = dyn Fn(&[f64]) -> C64 + Send + Sync;
pub type ComplexFn = dyn Fn(&[C64]) -> C64 + Send + Sync;

#[derive(Clone)]
enum InputKind {
    Zero,
    /// `χ_u(y) e^{−|y|²}`; extension `e^{−w·w}` on the plateau of `χ_u`.
    Gaussian {
        cutoff: SmoothBump,
    },
    /// `f − Δf` with `f(y) = e^{−1/(1−|y|²)}` on `|y| < 1`.
    BumpResolvent,
    /// `χ_u(y) sin(k y_coord)`.
    Sine {
        cutoff: SmoothBump,
        coord: usize,
        freq: f64,
    },
    /// `χ(y) u(y)` for a bump `χ` that is `1` wherever the extension is used.
    Cutoff {
        bump: SmoothBump,
        inner: Box<TestFunction>,
    },
    Combination(Vec<(C64, TestFunction)>),
    Custom {
        real: Arc<RealFn>,
        ext: Arc<ComplexFn>,
        support: f64,
        bands: Vec<(f64, f64)>,
        ext_domain: (f64, f64),
    },
}

/// A compactly supported input `u` with a holomorphic extension on
/// `B(c, r) + iB(0, δ)`.
///
/// All recipes are built about the origin; [`TestFunction::translated`]
/// moves them.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    dim: usize,
    kind: InputKind,
    /// The recipe is evaluated at `y − center`.
    center: RVec,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "TestFunction({}, n={}, center={:?})",
            self.name,
            self.dim,
            self.center.as_slice()
        )
    }
}

/// `g(s) = e^{−1/(1−s)}` and its first two derivatives.
fn bump_profile<T>(s: T) -> (T, T, T)
where
    T: Copy
        + std::ops::Sub<Output = T>
        + std::ops::Mul<Output = T>
        + std::ops::Div<Output = T>
        + std::ops::Neg<Output = T>
        + From<f64>
        + Exp,
{
    let one = T::from(1.0);
    let q = one / (one - s);
    let g = (-q).exp_();
    let g1 = -(g * q * q);
    let q3 = q * q * q;
    let g2 = g * (q3 * q - T::from(2.0) * q3);
    (g, g1, g2)
}

trait Exp {
    fn exp_(self) -> Self;
}
impl Exp for f64 {
    fn exp_(self) -> Self {
        self.exp()
    }
}
impl Exp for C64 {
    fn exp_(self) -> Self {
        self.exp()
    }
}

/// `f(z) = e^{−1/(1 − z·z)}`, the holomorphic extension of the standard bump.
pub fn standard_bump_extension(z: &[C64]) -> C64 {
    let s = cdot(z, z);
    (-(C64::new(1.0, 0.0) - s).inv()).exp()
}

impl InputKind {
    fn eval_real(&self, y: &[f64]) -> C64 {
        let r2: f64 = y.iter().map(|a| a * a).sum();
        match self {
            InputKind::Zero => ZERO,
            InputKind::Gaussian { cutoff } => {
                let c = cutoff.value(y);
                if c == 0.0 {
                    ZERO
                } else {
                    C64::new(c * (-r2).exp(), 0.0)
                }
            }
            InputKind::BumpResolvent => {
                if r2 >= 1.0 {
                    return ZERO;
                }
                let n = y.len() as f64;
                let (g, g1, g2) = bump_profile(r2);
                C64::new(g - (2.0 * n * g1 + 4.0 * r2 * g2), 0.0)
            }
            InputKind::Sine { cutoff, coord, freq } => {
                let c = cutoff.value(y);
                if c == 0.0 {
                    ZERO
                } else {
                    C64::new(c * (freq * y[*coord]).sin(), 0.0)
                }
            }
            InputKind::Cutoff { bump, inner } => {
                let c = bump.value(y);
                if c == 0.0 {
                    ZERO
                } else {
                    inner.eval_real(y) * c
                }
            }
            InputKind::Combination(terms) => terms.iter().map(|(c, u)| c * u.eval_real(y)).sum(),
            InputKind::Custom { real, .. } => real(y),
        }
    }

    fn eval_ext(&self, w: &[C64]) -> C64 {
        match self {
            InputKind::Zero => ZERO,
            InputKind::Gaussian { .. } => (-cdot(w, w)).exp(),
            InputKind::BumpResolvent => {
                let s = cdot(w, w);
                let n = w.len() as f64;
                let (g, g1, g2) = bump_profile(s);
                g - (g1 * (2.0 * n) + s * g2 * 4.0)
            }
            InputKind::Sine { coord, freq, .. } => (w[*coord] * *freq).sin(),
            InputKind::Cutoff { inner, .. } => inner.eval_ext(w),
            InputKind::Combination(terms) => terms.iter().map(|(c, u)| c * u.eval_ext(w)).sum(),
            InputKind::Custom { ext, .. } => ext(w),
        }
    }

    fn support_radius(&self) -> f64 {
        match self {
            InputKind::Zero => 0.0,
            InputKind::Gaussian { cutoff } | InputKind::Sine { cutoff, .. } => cutoff.outer_radius(),
            InputKind::BumpResolvent => 1.0,
            InputKind::Cutoff { bump, inner } => bump.outer_radius().min(inner.support_radius()),
            InputKind::Combination(terms) => terms.iter().map(|(_, u)| u.support_radius()).fold(0.0, f64::max),
            InputKind::Custom { support, .. } => *support,
        }
    }

    fn bands(&self) -> Vec<(f64, f64)> {
        match self {
            InputKind::Zero => vec![],
            InputKind::Gaussian { cutoff } | InputKind::Sine { cutoff, .. } => {
                vec![(cutoff.inner_radius(), cutoff.outer_radius())]
            }
            InputKind::BumpResolvent => vec![(0.5, 0.8), (0.8, 0.92), (0.92, 1.0)],
            InputKind::Cutoff { bump, inner } => {
                let mut b = inner.bands();
                b.push((bump.inner_radius(), bump.outer_radius()));
                b
            }
            InputKind::Combination(terms) => terms.iter().flat_map(|(_, u)| u.bands()).collect(),
            InputKind::Custom { bands, .. } => bands.clone(),
        }
    }

    fn ext_domain(&self) -> (f64, f64) {
        match self {
            InputKind::Zero => (f64::INFINITY, f64::INFINITY),
            InputKind::Gaussian { cutoff } | InputKind::Sine { cutoff, .. } => (cutoff.inner_radius(), f64::INFINITY),
            InputKind::BumpResolvent => (1.0, f64::INFINITY),
            InputKind::Cutoff { bump, inner } => {
                let (r, d) = inner.extension_domain();
                (r.min(bump.inner_radius()), d)
            }
            InputKind::Combination(terms) => terms
                .iter()
                .map(|(_, u)| u.extension_domain())
                .fold((f64::INFINITY, f64::INFINITY), |(r, d), (r2, d2)| {
                    (r.min(r2), d.min(d2))
                }),
            InputKind::Custom { ext_domain, .. } => *ext_domain,
        }
    }
}

impl TestFunction {
    fn build(name: impl Into<String>, dim: usize, kind: InputKind) -> Self {
        Self {
            name: name.into(),
            dim,
            kind,
            center: std::iter::repeat_n(0.0, dim).collect(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::build("zero", dim, InputKind::Zero)
    }

    /// `χ_u(y) e^{−|y|²}` with `χ_u = 1` on `|y| ≤ plateau`, `0` beyond `support`.
    pub fn gaussian(dim: usize, plateau: f64, support: f64) -> Result<Self> {
        let cutoff = SmoothBump::centered(dim, plateau, support)?;
        Ok(Self::build("gaussian", dim, InputKind::Gaussian { cutoff }))
    }

    /// `f − Δf` for the standard bump `f(y) = e^{−1/(1−|y|²)}`; the exact
    /// resolvent image `(1 − Δ)^{−1}` of this input is `f`.
    pub fn bump_resolvent(dim: usize) -> Self {
        Self::build("bump_resolvent", dim, InputKind::BumpResolvent)
    }

    /// `χ_u(y) sin(k y_coord)`.
    pub fn sine(dim: usize, coord: usize, freq: f64, plateau: f64, support: f64) -> Result<Self> {
        if coord >= dim {
            return Err(Error::domain(format!(
                "sine coordinate {coord} out of range for n = {dim}"
            )));
        }
        let cutoff = SmoothBump::centered(dim, plateau, support)?;
        Ok(Self::build("sine", dim, InputKind::Sine { cutoff, coord, freq }))
    }

    /// `χ·u` for a bump `χ`; the extension is taken from `u` on the plateau.
    pub fn cut_off(&self, bump: SmoothBump) -> Result<Self> {
        if bump.dim() != self.dim {
            return Err(Error::domain("cutoff dimension mismatch"));
        }
        let mut moved = bump.clone();
        if self.center.iter().any(|&c| c != 0.0) {
            let c: Vec<f64> = bump.center().iter().zip(&self.center).map(|(b, s)| b - s).collect();
            moved = SmoothBump::new(&c, bump.inner_radius(), bump.outer_radius())?;
        }
        if moved.center().iter().any(|&c| c != 0.0) {
            return Err(Error::Unsupported(
                "cutoffs must be centred at the input's centre".into(),
            ));
        }
        let mut inner = self.clone();
        inner.center = self.center.iter().map(|_| 0.0).collect();
        let mut out = Self::build(
            format!("cutoff({})", self.name),
            self.dim,
            InputKind::Cutoff {
                bump: moved,
                inner: Box::new(inner),
            },
        );
        out.center = self.center.clone();
        Ok(out)
    }

    /// `Σ c_k u_k`; all terms must share the centre of the first.
    pub fn combination(terms: Vec<(C64, TestFunction)>) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::domain("empty combination"))?;
        let dim = first.1.dim;
        let center = first.1.center.clone();
        if terms.iter().any(|(_, u)| u.dim != dim || u.center != center) {
            return Err(Error::domain("combination terms must share dimension and centre"));
        }
        let inner = terms
            .into_iter()
            .map(|(c, mut u)| {
                u.center = center.iter().map(|_| 0.0).collect();
                (c, u)
            })
            .collect();
        let mut out = Self::build("combination", dim, InputKind::Combination(inner));
        out.center = center;
        Ok(out)
    }

    /// A user input: real values `real`, extension `ext` on
    /// `B(0, ext_domain.0) + iB(0, ext_domain.1)`, support in `B(0, support)`,
    /// and the radial bands where it varies rapidly.
    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        support: f64,
        ext_domain: (f64, f64),
        bands: Vec<(f64, f64)>,
        real: impl Fn(&[f64]) -> C64 + Send + Sync + 'static,
        ext: impl Fn(&[C64]) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self::build(
            name,
            dim,
            InputKind::Custom {
                real: Arc::new(real),
                ext: Arc::new(ext),
                support,
                bands,
                ext_domain,
            },
        )
    }

    /// `ũ(y) = u(y + shift)`.
    pub fn translated(&self, shift: &[f64]) -> Self {
        let mut out = self.clone();
        for (c, s) in out.center.iter_mut().zip(shift) {
            *c -= s;
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, InputKind::Zero)
    }

    pub fn eval_real(&self, y: &[f64]) -> C64 {
        let local: RVec = y.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        self.kind.eval_real(&local)
    }

    /// The holomorphic extension; only meaningful on [`Self::extension_domain`].
    pub fn eval_ext(&self, w: &[C64]) -> C64 {
        let local: CVec = w.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        self.kind.eval_ext(&local)
    }

    /// Real values on the real slice, the extension elsewhere.
    #[inline]
    pub fn eval_at(&self, w: &[C64]) -> C64 {
        if w.iter().all(|z| z.im == 0.0) {
            self.eval_real(&re_part(w))
        } else {
            self.eval_ext(w)
        }
    }

    /// `supp u ⊂ B(center, support_radius)`.
    pub fn support_radius(&self) -> f64 {
        self.kind.support_radius()
    }

    /// Radial bands about the centre where `u` has a cutoff transition.
    pub fn bands(&self) -> Vec<(f64, f64)> {
        self.kind.bands()
    }

    /// `(r_u, δ_u)`: the extension is valid on `B(center, r_u) + iB(0, δ_u)`.
    pub fn extension_domain(&self) -> (f64, f64) {
        self.kind.ext_domain()
    }

    /// Whether the extension covers `B(0, radius) + iB(0, height)`.
    pub fn extension_covers(&self, radius: f64, height: f64) -> bool {
        let (r, d) = self.extension_domain();
        norm(&self.center) + radius <= r + 1e-12 && height < d
    }
}

fn default_plateau() -> f64 {
    1.0
}

fn default_support() -> f64 {
    1.5
}

fn default_freq() -> f64 {
    1.0
}

fn default_coeff() -> ComplexValue {
    ComplexValue::Real(1.0)
}

/// Input sub-schema of the run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum InputSpec {
    Zero {},
    Gaussian {
        #[serde(default = "default_plateau")]
        plateau: f64,
        #[serde(default = "default_support")]
        support: f64,
    },
    BumpResolvent {},
    Sine {
        #[serde(default)]
        coord: usize,
        #[serde(default = "default_freq")]
        freq: f64,
        #[serde(default = "default_plateau")]
        plateau: f64,
        #[serde(default = "default_support")]
        support: f64,
    },
    Combination {
        terms: Vec<InputTerm>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputTerm {
    #[serde(default = "default_coeff")]
    pub coeff: ComplexValue,
    pub input: InputSpec,
}

impl InputSpec {
    pub fn build(&self, dim: usize) -> Result<TestFunction> {
        Ok(match self {
            InputSpec::Zero {} => TestFunction::zero(dim),
            InputSpec::Gaussian { plateau, support } => TestFunction::gaussian(dim, *plateau, *support)?,
            InputSpec::BumpResolvent {} => TestFunction::bump_resolvent(dim),
            InputSpec::Sine {
                coord,
                freq,
                plateau,
                support,
            } => TestFunction::sine(dim, *coord, *freq, *plateau, *support)?,
            InputSpec::Combination { terms } => TestFunction::combination(
                terms
                    .iter()
                    .map(|t| Ok((t.coeff.to_c64(), t.input.build(dim)?)))
                    .collect::<Result<Vec<_>>>()?,
            )?,
        })
    }
}

/// `c·∂^γ δ_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiracTerm {
    pub point: RVec,
    pub gamma: Vec<u32>,
    pub coeff: C64,
}

/// `u = smooth + Σ c_k ∂^{γ_k} δ_{a_k}`, a compactly supported distribution
/// whose singular part sits where `χ(a) = 0`.
#[derive(Clone, Debug)]
pub struct CompactDistribution {
    pub smooth: TestFunction,
    pub diracs: Vec<DiracTerm>,
}

impl CompactDistribution {
    pub fn dirac(dim: usize, point: &[f64]) -> Self {
        Self {
            smooth: TestFunction::zero(dim),
            diracs: vec![DiracTerm {
                point: point.into(),
                gamma: vec![0; dim],
                coeff: C64::new(1.0, 0.0),
            }],
        }
    }

    pub fn dirac_derivative(point: &[f64], gamma: Vec<u32>) -> Self {
        let dim = point.len();
        Self {
            smooth: TestFunction::zero(dim),
            diracs: vec![DiracTerm {
                point: point.into(),
                gamma,
                coeff: C64::new(1.0, 0.0),
            }],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracSpec {
    pub point: Vec<f64>,
    #[serde(default)]
    pub gamma: Option<Vec<u32>>,
    #[serde(default = "default_coeff")]
    pub coeff: ComplexValue,
}

/// Distribution sub-schema of the run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    #[serde(default)]
    pub smooth: Option<InputSpec>,
    #[serde(default)]
    pub diracs: Vec<DiracSpec>,
}

impl DistributionSpec {
    pub fn build(&self, dim: usize) -> Result<CompactDistribution> {
        let smooth = match &self.smooth {
            Some(s) => s.build(dim)?,
            None => TestFunction::zero(dim),
        };
        let mut diracs = Vec::new();
        for d in &self.diracs {
            if d.point.len() != dim {
                return Err(Error::Config(format!(
                    "dirac point {:?} has the wrong dimension",
                    d.point
                )));
            }
            let gamma = d.gamma.clone().unwrap_or_else(|| vec![0; dim]);
            if gamma.len() != dim {
                return Err(Error::Config(format!(
                    "dirac multi-index {gamma:?} has the wrong length"
                )));
            }
            diracs.push(DiracTerm {
                point: RVec::from_slice(&d.point),
                gamma,
                coeff: d.coeff.to_c64(),
            });
        }
        Ok(CompactDistribution { smooth, diracs })
    }
}

/// Grid of the direct Fourier reference: `û` by `y`-quadrature on panels of
/// width `y_panel`, then `ξ`-quadrature on `[−xi_max, xi_max]ⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierConfig {
    pub xi_max: f64,
    pub xi_panel: f64,
    pub xi_nodes: usize,
    pub y_panel: f64,
    pub y_nodes: usize,
}

impl FourierConfig {
    pub fn for_dim(dim: usize) -> Self {
        if dim == 1 {
            Self {
                xi_max: 400.0,
                xi_panel: 0.5,
                xi_nodes: 16,
                y_panel: 0.05,
                y_nodes: 16,
            }
        } else {
            Self {
                xi_max: 40.0,
                xi_panel: 1.0,
                xi_nodes: 8,
                y_panel: 0.1,
                y_nodes: 8,
            }
        }
    }
}

/// Real-axis value with its regularization history.
#[derive(Clone, Debug, Serialize)]
pub struct StandardValue {
    pub value: C64,
    pub err_estimate: f64,
    /// Present when the `λ`-schedule was used.
    pub limit: Option<RegularizedLimit>,
}

/// `û` tabulated on a tensor `ξ`-grid, reusable across `x` and symbols.
#[derive(Clone, Debug)]
pub struct FourierReference {
    dim: usize,
    xi: Vec<f64>,
    xi_w: Vec<f64>,
    /// Row-major over the `n`-fold tensor grid.
    uhat: Vec<C64>,
}

fn panel_rule(breaks: &mut Vec<f64>, width: f64, rule: &GaussRule) -> (Vec<f64>, Vec<f64>) {
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in breaks.windows(2) {
        let pieces = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / pieces as f64;
        for k in 0..pieces {
            for (x, wt) in rule.mapped(w[0] + k as f64 * h, w[0] + (k + 1) as f64 * h) {
                nodes.push(x);
                weights.push(wt);
            }
        }
    }
    (nodes, weights)
}

impl FourierReference {
    pub fn new(u: &TestFunction, cfg: &FourierConfig) -> Result<Self> {
        let n = u.dim();
        if n == 0 || n > 2 {
            return Err(Error::Unsupported(format!(
                "the Fourier reference supports n ≤ 2, got n = {n}"
            )));
        }
        let grule = GaussRule::legendre(cfg.y_nodes);
        let rs = u.support_radius();
        let axis_y: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .map(|k| {
                let c = u.center()[k];
                let mut br = vec![c - rs, c + rs];
                if n == 1 {
                    for (a, b) in u.bands() {
                        br.extend([c - b, c - a, c + a, c + b]);
                    }
                    br.retain(|v| (v - c).abs() <= rs);
                }
                panel_rule(&mut br, cfg.y_panel, &grule)
            })
            .collect();
        let xrule = GaussRule::legendre(cfg.xi_nodes);
        let (xi, xi_w) = panel_rule(&mut vec![-cfg.xi_max, cfg.xi_max], cfg.xi_panel, &xrule);
        let m = xi.len();
        let phase = |ys: &[f64]| -> Vec<C64> {
            let mut e = Vec::with_capacity(m * ys.len());
            for &k in &xi {
                for &y in ys {
                    let (s, c) = (k * y).sin_cos();
                    e.push(C64::new(c, -s));
                }
            }
            e
        };
        let uhat = if n == 1 {
            let (ys, ws) = &axis_y[0];
            let vals: Vec<C64> = ys.iter().zip(ws).map(|(y, w)| u.eval_real(&[*y]) * *w).collect();
            let e = phase(ys);
            (0..m)
                .into_par_iter()
                .map(|i| {
                    let row = &e[i * ys.len()..(i + 1) * ys.len()];
                    row.iter().zip(&vals).map(|(a, b)| a * b).sum()
                })
                .collect()
        } else {
            let (y1, w1) = &axis_y[0];
            let (y2, w2) = &axis_y[1];
            let (n1, n2) = (y1.len(), y2.len());
            let e1 = phase(y1);
            let e2 = phase(y2);
            // partial[i][j2] = Σ_{j1} e^{−iξ_i y1} u(y1, y2) w1
            let samples: Vec<C64> = (0..n2)
                .flat_map(|j2| (0..n1).map(move |j1| (j1, j2)))
                .map(|(j1, j2)| u.eval_real(&[y1[j1], y2[j2]]) * (w1[j1] * w2[j2]))
                .collect();
            let partial: Vec<Vec<C64>> = (0..m)
                .into_par_iter()
                .map(|i| {
                    let row = &e1[i * n1..(i + 1) * n1];
                    (0..n2)
                        .map(|j2| {
                            row.iter()
                                .zip(&samples[j2 * n1..(j2 + 1) * n1])
                                .map(|(a, b)| a * b)
                                .sum()
                        })
                        .collect()
                })
                .collect();
            (0..m * m)
                .into_par_iter()
                .map(|idx| {
                    let (i, k) = (idx / m, idx % m);
                    let row = &e2[k * n2..(k + 1) * n2];
                    row.iter().zip(&partial[i]).map(|(a, b)| a * b).sum()
                })
                .collect()
        };
        Ok(Self { dim: n, xi, xi_w, uhat })
    }

    fn terms(&self, p: &AnalyticSymbol, x: &[f64]) -> Vec<(f64, C64)> {
        let m = self.xi.len();
        let xc = to_complex(x);
        let total = m.pow(self.dim as u32);
        (0..total)
            .into_par_iter()
            .map(|idx| {
                let mut xi = RVec::new();
                let mut w = 1.0;
                let mut rest = idx;
                let mut digits = [0usize; 2];
                for k in (0..self.dim).rev() {
                    digits[k] = rest % m;
                    rest /= m;
                }
                for &d in &digits[..self.dim] {
                    xi.push(self.xi[d]);
                    w *= self.xi_w[d];
                }
                let r2: f64 = xi.iter().map(|a| a * a).sum();
                let ph: f64 = xi.iter().zip(x).map(|(a, b)| a * b).sum();
                let (s, c) = ph.sin_cos();
                let zc = to_complex(&xi);
                (r2, C64::new(c, s) * p.eval_unchecked(&xc, &zc) * self.uhat[idx] * w)
            })
            .collect()
    }

    /// `(2π)^{−n} Σ e^{ix·ξ} e^{−λ²|ξ|²} p(x, ξ) û(ξ)` for each `λ`.
    pub fn regularized_values(&self, p: &AnalyticSymbol, x: &[f64], lambdas: &[f64]) -> Vec<C64> {
        let terms = self.terms(p, x);
        let c = std::f64::consts::TAU.powi(-(self.dim as i32));
        lambdas
            .iter()
            .map(|l| {
                let mut acc = CompensatedSum::new();
                for (r2, v) in &terms {
                    acc.add(v * (-l * l * r2).exp());
                }
                acc.value() * c
            })
            .collect()
    }

    /// `Op(p)u(x)` at real `x`: the `λ`-schedule with extrapolation when
    /// `d ≥ −n`, direct summation otherwise.
    pub fn eval(&self, p: &AnalyticSymbol, x: &[f64], schedule: &RegularizationSchedule) -> Result<StandardValue> {
        if p.dim != self.dim || x.len() != self.dim {
            return Err(Error::domain("dimension mismatch in the Fourier reference"));
        }
        if p.order >= -(self.dim as f64) {
            self.eval_scheduled(p, x, schedule)
        } else {
            let v = self.regularized_values(p, x, &[0.0])[0];
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite {
                    location: format!("Fourier reference at x = {x:?}"),
                });
            }
            Ok(StandardValue {
                value: v,
                err_estimate: 1e-14 * v.norm().max(1.0),
                limit: None,
            })
        }
    }

    /// As [`Self::eval`], always through the `λ`-schedule.
    pub fn eval_scheduled(
        &self,
        p: &AnalyticSymbol,
        x: &[f64],
        schedule: &RegularizationSchedule,
    ) -> Result<StandardValue> {
        schedule.validate()?;
        let values = self.regularized_values(p, x, &schedule.lambda_values);
        let limit = regularized_limit(&schedule.lambda_values, &values, schedule.richardson)?;
        if limit.diverging {
            return Err(Error::Divergence(format!(
                "λ-differences grow at x = {x:?}: {:?}",
                limit.differences
            )));
        }
        Ok(StandardValue {
            value: limit.value,
            err_estimate: limit.err_estimate,
            limit: Some(limit),
        })
    }
}

/// `Op(p)u(x) = ∫∫ e^{i(x−y)·ξ} p(x, ξ) u(y) dy đξ` at real `x`.
pub fn op_standard(
    p: &AnalyticSymbol,
    u: &TestFunction,
    x: &[f64],
    schedule: &RegularizationSchedule,
) -> Result<StandardValue> {
    let reference = FourierReference::new(u, &FourierConfig::for_dim(u.dim()))?;
    reference.eval(p, x, schedule)
}

fn check_compatible(p: &AnalyticSymbol, u: Option<&TestFunction>, params: &DeformationParams) -> Result<()> {
    let n = params.dim;
    if p.dim != n || u.is_some_and(|u| u.dim() != n) {
        return Err(Error::domain(format!(
            "dimension mismatch: params n = {n}, symbol n = {}",
            p.dim
        )));
    }
    if params.epsilon > p.wedge.epsilon + 1e-15 {
        return Err(Error::precondition(format!(
            "deformation aperture ε = {} exceeds the symbol's wedge ε = {}",
            params.epsilon, p.wedge.epsilon
        )));
    }
    if params.chi2_inner() < p.wedge.truncation {
        return Err(Error::precondition(format!(
            "the deformation starts at |ξ| = 2R = {} inside the symbol's wedge truncation {}",
            params.chi2_inner(),
            p.wedge.truncation
        )));
    }
    Ok(())
}

fn check_x(p: &AnalyticSymbol, params: &DeformationParams, x: &[C64], t: f64) -> Result<()> {
    if x.len() != params.dim {
        return Err(Error::domain("x has the wrong dimension"));
    }
    let re = norm(&re_part(x));
    let im = norm(&im_part(x));
    if re >= params.r_prime.min(params.r0) {
        return Err(Error::domain(format!(
            "|Re x| = {re} must be below min(r′, r0) = {}",
            params.r_prime.min(params.r0)
        )));
    }
    if im >= (t * params.delta_prime).min(params.delta0) {
        return Err(Error::domain(format!(
            "|Im x| = {im} must be below min(tδ′, δ0) = {}",
            (t * params.delta_prime).min(params.delta0)
        )));
    }
    if !p.x_domain.contains(x) {
        return Err(Error::domain(format!("x = {x:?} outside the symbol's x-domain")));
    }
    Ok(())
}

/// `∫_{C(t)} e^{i(x−w)·ζ} p(x, ζ) u(w) dw ∧ đζ` at `λ = 0`.
pub fn op_deformed(
    p: &AnalyticSymbol,
    u: &TestFunction,
    params: &DeformationParams,
    t: f64,
    x: &[C64],
    cfg: &QuadratureConfig,
) -> Result<ContourIntegral> {
    op_deformed_regularized(p, u, params, t, x, cfg, 0.0)
}

/// As [`op_deformed`] with the Gaussian factor `e^{−λ²ζ·ζ}`.
pub fn op_deformed_regularized(
    p: &AnalyticSymbol,
    u: &TestFunction,
    params: &DeformationParams,
    t: f64,
    x: &[C64],
    cfg: &QuadratureConfig,
    lambda: f64,
) -> Result<ContourIntegral> {
    let cmap = ContourMap::new(*params)?;
    check_compatible(p, Some(u), params)?;
    if lambda == 0.0 {
        check_x(p, params, x, t)?;
    }
    if !u.extension_covers(params.chi1_outer(), t * params.delta_prime) {
        return Err(Error::precondition(format!(
            "input extension {:?} about {:?} does not cover B(0, {}) + iB(0, {})",
            u.extension_domain(),
            u.center(),
            params.chi1_outer(),
            t * params.delta_prime
        )));
    }
    integrate_contour(&cmap, &Integrand::new(p, u, x), t, cfg, lambda)
}

/// One point of a holomorphic extension run.
#[derive(Clone, Debug, Serialize)]
pub struct ExtensionPoint {
    pub x: Vec<[f64; 2]>,
    pub value: Option<C64>,
    /// `δ′ − |Im x|`.
    pub decay_margin: f64,
    pub rho_max: f64,
    pub err_estimate: f64,
    pub error: Option<String>,
    /// Exit status class of the error, see [`Error::exit_code`].
    pub error_code: Option<i32>,
}

impl ExtensionPoint {
    pub fn point(&self) -> CVec {
        self.x.iter().map(|[a, b]| C64::new(*a, *b)).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionResult {
    pub points: Vec<ExtensionPoint>,
    pub elapsed_seconds: f64,
}

impl ExtensionResult {
    /// Values in input order; the first failure is returned as an error.
    pub fn values(&self) -> Result<Vec<C64>> {
        self.points
            .iter()
            .map(|p| {
                p.value
                    .ok_or_else(|| Error::precondition(p.error.clone().unwrap_or_default()))
            })
            .collect()
    }
}

/// `F(x) = ∫_{C(1)} …` at each point, in parallel.
pub fn extend(
    p: &AnalyticSymbol,
    u: &TestFunction,
    params: &DeformationParams,
    points: &[CVec],
    cfg: &QuadratureConfig,
) -> Result<ExtensionResult> {
    let start = std::time::Instant::now();
    ContourMap::new(*params)?;
    check_compatible(p, Some(u), params)?;
    let out = points
        .par_iter()
        .map(|x| {
            let decay_margin = params.delta_prime - norm(&im_part(x));
            let xs: Vec<[f64; 2]> = x.iter().map(|z| [z.re, z.im]).collect();
            match op_deformed(p, u, params, 1.0, x, cfg) {
                Ok(r) => ExtensionPoint {
                    x: xs,
                    value: Some(r.value),
                    decay_margin,
                    rho_max: r.rho_max,
                    err_estimate: r.err_estimate,
                    error: None,
                    error_code: None,
                },
                Err(e) => ExtensionPoint {
                    x: xs,
                    value: None,
                    decay_margin,
                    rho_max: 0.0,
                    err_estimate: f64::NAN,
                    error: Some(e.to_string()),
                    error_code: Some(e.exit_code()),
                },
            }
        })
        .collect();
    Ok(ExtensionResult {
        points: out,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// The kernel `K(x, y) = (1 − χ(y)) ∫_{C_y(1)} e^{i(x−y)·ζ} p(x, ζ) đζ`.
pub fn kernel_k(
    p: &AnalyticSymbol,
    params: &DeformationParams,
    x: &[C64],
    y: &[f64],
    cfg: &QuadratureConfig,
) -> Result<ContourIntegral> {
    let cmap = ContourMap::new(*params)?;
    check_compatible(p, None, params)?;
    check_x(p, params, x, 1.0)?;
    integrate_kernel(&cmap, p, x, y, 1.0, cfg, 0.0)
}

/// `∂^γ_y K(x, a)` by nested central differences with step `h`.
fn kernel_derivative(
    p: &AnalyticSymbol,
    params: &DeformationParams,
    x: &[C64],
    a: &[f64],
    gamma: &[u32],
    h: f64,
    cfg: &QuadratureConfig,
) -> Result<C64> {
    let mut stencil: Vec<(RVec, f64)> = vec![(RVec::from_slice(a), 1.0)];
    for (i, &k) in gamma.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let scale = (2.0 * h).powi(-(k as i32));
        let mut next = Vec::new();
        for (pt, c) in &stencil {
            let mut binom = 1.0;
            for j in 0..=k {
                let mut q = pt.clone();
                q[i] += (k as f64 - 2.0 * j as f64) * h;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                next.push((q, c * sign * binom * scale));
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
        }
        stencil = next;
    }
    let mut acc = CompensatedSum::new();
    for (pt, c) in stencil {
        acc.add(kernel_k(p, params, x, &pt, cfg)?.value * c);
    }
    Ok(acc.value())
}

/// `Op(p)u(x)` for `u = smooth + Σ c ∂^γ δ_a` with every `a` outside
/// `supp χ`: `Op(p)(χ·smooth) + ⟨(1−χ)·smooth, K(x,·)⟩ + Σ c (−1)^{|γ|} ∂^γ_y K(x, a)`.
pub fn op_distribution(
    p: &AnalyticSymbol,
    u: &CompactDistribution,
    params: &DeformationParams,
    x: &[C64],
    cfg: &QuadratureConfig,
) -> Result<C64> {
    let cmap = ContourMap::new(*params)?;
    check_compatible(p, Some(&u.smooth), params)?;
    check_x(p, params, x, 1.0)?;
    let n = params.dim;
    let mut total = CompensatedSum::new();
    const H: f64 = 1e-4;
    for d in &u.diracs {
        if d.point.len() != n || d.gamma.len() != n {
            return Err(Error::domain("dirac term has the wrong dimension"));
        }
        let reach = if d.gamma.iter().all(|&g| g == 0) {
            0.0
        } else {
            H * d.gamma.iter().map(|&g| g as f64).fold(0.0, f64::max)
        };
        if norm(&d.point) - reach < cmap.chi.outer_radius() {
            return Err(Error::precondition(format!(
                "singular support point {:?} must lie outside supp χ = B(0, {})",
                d.point.as_slice(),
                cmap.chi.outer_radius()
            )));
        }
        let order: u32 = d.gamma.iter().sum();
        let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
        total.add(kernel_derivative(p, params, x, &d.point, &d.gamma, H, cfg)? * d.coeff * sign);
    }
    if !u.smooth.is_zero() {
        let near = u.smooth.cut_off(cmap.chi.clone())?;
        total.add(op_deformed(p, &near, params, 1.0, x, cfg)?.value);
        total.add(far_pairing(p, &u.smooth, params, &cmap, x, cfg)?);
    }
    Ok(total.value())
}

/// `∫ u(y) K(x, y) dy` over `|y| ≥` the plateau of `χ`.
fn far_pairing(
    p: &AnalyticSymbol,
    u: &TestFunction,
    params: &DeformationParams,
    cmap: &ContourMap,
    x: &[C64],
    cfg: &QuadratureConfig,
) -> Result<C64> {
    let n = params.dim;
    let inner = cmap.chi.inner_radius();
    let reach = norm(u.center()) + u.support_radius();
    if reach <= inner {
        return Ok(ZERO);
    }
    let rule = GaussRule::legendre(cfg.y_nodes);
    let mut radial_breaks = vec![inner, cmap.chi.outer_radius().min(reach), reach];
    let (r_nodes, r_weights) = panel_rule(
        &mut radial_breaks,
        cfg.y_max_width.min((cmap.chi.outer_radius() - inner) / 2.0),
        &rule,
    );
    let mut acc = CompensatedSum::new();
    match n {
        1 => {
            for (r, w) in r_nodes.iter().zip(&r_weights) {
                for y in [*r, -*r] {
                    let uy = u.eval_real(&[y]);
                    if uy != ZERO {
                        acc.add(uy * kernel_k(p, params, x, &[y], cfg)?.value * *w);
                    }
                }
            }
        }
        2 => {
            let m = cfg.phi_nodes.max(8);
            for k in 0..m {
                let phi = std::f64::consts::TAU * k as f64 / m as f64;
                let (s, c) = phi.sin_cos();
                for (r, w) in r_nodes.iter().zip(&r_weights) {
                    let y = [r * c, r * s];
                    let uy = u.eval_real(&y);
                    if uy != ZERO {
                        let wt = w * r * std::f64::consts::TAU / m as f64;
                        acc.add(uy * kernel_k(p, params, x, &y, cfg)?.value * wt);
                    }
                }
            }
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "distributional inputs need n ≤ 2, got n = {n}"
            )))
        }
    }
    Ok(acc.value())
}

/// The deformation parameters chosen at one tube point.
#[derive(Clone, Debug, Serialize)]
pub struct TubeExtension {
    pub value: C64,
    pub err_estimate: f64,
    pub rho_max: f64,
    /// Parameters about the translated origin `Re x`.
    pub params: DeformationParams,
    pub distance: f64,
}

/// `F(x)` at a point of the tube `{|Im x| < ε·dist(Re x, ∂U)}` by translating
/// the deformation to `Re x`.
pub fn extend_tube(
    p: &AnalyticSymbol,
    u: &TestFunction,
    domain: &TubeDomain,
    epsilon: f64,
    x: &[C64],
    cfg: &QuadratureConfig,
) -> Result<TubeExtension> {
    let n = domain.dim();
    if x.len() != n || p.dim != n || u.dim() != n {
        return Err(Error::domain("dimension mismatch in tube extension"));
    }
    if !(epsilon > 0.0 && epsilon <= p.wedge.epsilon) {
        return Err(Error::precondition(format!(
            "ε = {epsilon} must lie in (0, {}]",
            p.wedge.epsilon
        )));
    }
    let re = re_part(x);
    let im = norm(&im_part(x));
    let dist = domain
        .distance_to_boundary(&re)
        .ok_or_else(|| Error::domain(format!("Re x = {:?} is outside U", re.as_slice())))?;
    if im >= epsilon * dist {
        return Err(Error::domain(format!(
            "point outside the guaranteed domain: |Im z| < ε dist(Re z, ∂U) fails (|Im z| = {im}, ε dist = {})",
            epsilon * dist
        )));
    }
    let mut s = 0.5;
    let (r_prime, r_dprime) = loop {
        let rp = s * dist;
        let rdp = rp + 0.99 * (dist - rp);
        if epsilon * (rdp - rp) > im {
            break (rp, rdp);
        }
        s *= 0.5;
        if s < 1e-8 {
            return Err(Error::domain("no admissible r′ for this point"));
        }
    };
    let delta_prime = im + 0.9 * (epsilon * (r_dprime - r_prime) - im);
    let (_, u_delta) = u.extension_domain();
    if u_delta <= delta_prime {
        return Err(Error::precondition(format!(
            "input extension height {u_delta} is below δ′ = {delta_prime}"
        )));
    }
    let delta = if u_delta.is_finite() { u_delta } else { delta_prime };
    let params = DeformationParams::new(n, dist, r_prime, delta, delta_prime, epsilon, 0.5 * p.wedge.truncation)
        .with_r_dprime(r_dprime)
        .validate()
        .map_err(Error::InvalidParams)?;
    let pt = p.translated(&re);
    let ut = u.translated(&re);
    let xt: CVec = x.iter().map(|z| C64::new(0.0, z.im)).collect();
    let r = op_deformed(&pt, &ut, &params, 1.0, &xt, cfg)?;
    Ok(TubeExtension {
        value: r.value,
        err_estimate: r.err_estimate,
        rho_max: r.rho_max,
        params,
        distance: dist,
    })
}
