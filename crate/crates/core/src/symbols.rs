//! Analytic-type symbols `p(x, ζ)`: holomorphic in `x` near a real ball,
//! holomorphic in `ζ` on a wedge `W_ε`, with `|p(x,ζ)| ≲ ⟨Re ζ⟩^d` there.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{wedge_contains, Wedge};
use crate::{cdot, japanese_bracket, norm, Error, RVec, Result, C64};

/// `x`-dependent factor of a modulated symbol; both variants are entire.
#[derive(Clone, Debug, PartialEq)]
pub enum XFactor {
    /// `Σ_j c_j x_coord^j`.
    Polynomial { coord: usize, coeffs: Vec<C64> },
    /// `e^{k·x}`.
    Exponential { k: Vec<C64> },
}

impl XFactor {
    pub fn eval(&self, x: &[C64]) -> C64 {
        match self {
            XFactor::Polynomial { coord, coeffs } => {
                let z = x[*coord];
                coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
            }
            XFactor::Exponential { k } => cdot(k, x).exp(),
        }
    }
}

pub type SymbolFn = dyn Fn(&[C64], &[C64]) -> C64 + Send + Sync;

#[derive(Clone)]
pub enum SymbolKind {
    Constant(C64),
    /// `ζ^α`.
    Monomial(Vec<u32>),
    /// `(1 + ζ·ζ)^{−1}`.
    Resolvent,
    /// `(1 + ζ·ζ)^{d/2}`, principal branch.
    BracketPower(f64),
    Modulated {
        factor: XFactor,
        inner: Box<SymbolKind>,
    },
    Product(Vec<SymbolKind>),
    /// `p(x + shift, ζ)`.
    Shifted {
        shift: RVec,
        inner: Box<SymbolKind>,
    },
    Custom(Arc<SymbolFn>),
}

impl fmt::Debug for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolKind::Constant(c) => write!(f, "Constant({c})"),
            SymbolKind::Monomial(a) => write!(f, "Monomial({a:?})"),
            SymbolKind::Resolvent => write!(f, "Resolvent"),
            SymbolKind::BracketPower(d) => write!(f, "BracketPower({d})"),
            SymbolKind::Modulated { factor, inner } => {
                write!(f, "Modulated({factor:?}, {inner:?})")
            }
            SymbolKind::Product(v) => write!(f, "Product({v:?})"),
            SymbolKind::Shifted { shift, inner } => write!(f, "Shifted({shift:?}, {inner:?})"),
            SymbolKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl SymbolKind {
    fn eval(&self, x: &[C64], zeta: &[C64]) -> C64 {
        match self {
            SymbolKind::Constant(c) => *c,
            SymbolKind::Monomial(alpha) => alpha
                .iter()
                .zip(zeta)
                .fold(C64::new(1.0, 0.0), |acc, (&a, z)| acc * z.powu(a)),
            SymbolKind::Resolvent => (C64::new(1.0, 0.0) + cdot(zeta, zeta)).inv(),
            SymbolKind::BracketPower(d) => (C64::new(1.0, 0.0) + cdot(zeta, zeta)).powf(0.5 * d),
            SymbolKind::Modulated { factor, inner } => factor.eval(x) * inner.eval(x, zeta),
            SymbolKind::Product(parts) => parts.iter().map(|p| p.eval(x, zeta)).product(),
            SymbolKind::Shifted { shift, inner } => {
                let xs: crate::CVec = x.iter().zip(shift).map(|(a, s)| a + s).collect();
                inner.eval(&xs, zeta)
            }
            SymbolKind::Custom(f) => f(x, zeta),
        }
    }
}

/// `B(center, r0) + iB(0, δ0)`: where the symbol is holomorphic in `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct XDomain {
    pub center: RVec,
    pub radius: f64,
    pub imag_radius: f64,
}

impl XDomain {
    pub fn unbounded(dim: usize) -> Self {
        Self {
            center: std::iter::repeat_n(0.0, dim).collect(),
            radius: f64::INFINITY,
            imag_radius: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: &[C64]) -> bool {
        let re: RVec = x.iter().zip(&self.center).map(|(z, c)| z.re - c).collect();
        let im: RVec = x.iter().map(|z| z.im).collect();
        norm(&re) < self.radius && norm(&im) < self.imag_radius
    }
}

/// An order-`d` symbol with declared holomorphy domains.
#[derive(Clone, Debug)]
pub struct AnalyticSymbol {
    pub name: String,
    pub kind: SymbolKind,
    pub order: f64,
    pub dim: usize,
    pub x_domain: XDomain,
    pub wedge: Wedge,
    /// Declared `sup ⟨Re ζ⟩^{−d}|p|` over the wedge, when known.
    pub wedge_bound: Option<f64>,
}

impl AnalyticSymbol {
    fn build(name: impl Into<String>, kind: SymbolKind, order: f64, wedge: Wedge, wedge_bound: Option<f64>) -> Self {
        Self {
            name: name.into(),
            kind,
            order,
            dim: wedge.dim,
            x_domain: XDomain::unbounded(wedge.dim),
            wedge,
            wedge_bound,
        }
    }

    pub fn constant(value: C64, wedge: Wedge) -> Self {
        Self::build("constant", SymbolKind::Constant(value), 0.0, wedge, Some(value.norm()))
    }

    pub fn identity(wedge: Wedge) -> Self {
        Self::constant(C64::new(1.0, 0.0), wedge)
    }

    /// `ζ^α`; on `W_ε`, `|ζ^α| ≤ (1 + ε²)^{|α|/2}⟨Re ζ⟩^{|α|}`.
    pub fn monomial(alpha: Vec<u32>, wedge: Wedge) -> Result<Self> {
        if alpha.len() != wedge.dim {
            return Err(Error::domain("multi-index length must equal the dimension"));
        }
        let deg: u32 = alpha.iter().sum();
        let bound = (1.0 + wedge.epsilon * wedge.epsilon).powf(0.5 * deg as f64);
        Ok(Self::build(
            format!("monomial{alpha:?}"),
            SymbolKind::Monomial(alpha),
            deg as f64,
            wedge,
            Some(bound),
        ))
    }

    /// `(1 + ζ·ζ)^{−1}`, order −2. Needs `ε < 1`, which keeps
    /// `Re(1 + ζ·ζ) ≥ 1 + (1 − ε²)|Re ζ|²` on the wedge.
    pub fn resolvent(wedge: Wedge) -> Result<Self> {
        if wedge.epsilon >= 1.0 {
            return Err(Error::domain("resolvent symbol needs a wedge aperture ε < 1"));
        }
        let bound = 1.0 / (1.0 - wedge.epsilon * wedge.epsilon);
        Ok(Self::build(
            "resolvent",
            SymbolKind::Resolvent,
            -2.0,
            wedge,
            Some(bound),
        ))
    }

    /// `(1 + ζ·ζ)^{d/2}`, principal branch; needs `ε < 1`.
    pub fn bracket_power(order: f64, wedge: Wedge) -> Result<Self> {
        if wedge.epsilon >= 1.0 {
            return Err(Error::domain("bracket power needs a wedge aperture ε < 1"));
        }
        let e2 = wedge.epsilon * wedge.epsilon;
        let bound = if order >= 0.0 {
            (1.0 + e2).powf(0.5 * order)
        } else {
            (1.0 - e2).powf(0.5 * order)
        };
        Ok(Self::build(
            format!("bracket_power({order})"),
            SymbolKind::BracketPower(order),
            order,
            wedge,
            Some(bound),
        ))
    }

    /// `a(x)·p(x, ζ)` with `a` entire.
    pub fn modulated(factor: XFactor, inner: AnalyticSymbol) -> Self {
        Self {
            name: format!("modulated({})", inner.name),
            kind: SymbolKind::Modulated {
                factor,
                inner: Box::new(inner.kind),
            },
            order: inner.order,
            dim: inner.dim,
            x_domain: inner.x_domain,
            wedge: inner.wedge,
            wedge_bound: None,
        }
    }

    /// Pointwise product; orders add.
    pub fn product(a: AnalyticSymbol, b: AnalyticSymbol) -> Result<Self> {
        if a.dim != b.dim {
            return Err(Error::domain("product of symbols of different dimensions"));
        }
        let wedge = Wedge {
            epsilon: a.wedge.epsilon.min(b.wedge.epsilon),
            truncation: a.wedge.truncation.max(b.wedge.truncation),
            dim: a.dim,
        };
        let bound = match (a.wedge_bound, b.wedge_bound) {
            (Some(x), Some(y)) => Some(x * y),
            _ => None,
        };
        Ok(Self {
            name: format!("{}*{}", a.name, b.name),
            kind: SymbolKind::Product(vec![a.kind, b.kind]),
            order: a.order + b.order,
            dim: a.dim,
            x_domain: a.x_domain,
            wedge,
            wedge_bound: bound,
        })
    }

    pub fn custom(
        name: impl Into<String>,
        order: f64,
        wedge: Wedge,
        f: impl Fn(&[C64], &[C64]) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self::build(name, SymbolKind::Custom(Arc::new(f)), order, wedge, None)
    }

    pub fn with_x_domain(mut self, domain: XDomain) -> Self {
        self.x_domain = domain;
        self
    }

    /// `p̃(x, ζ) = p(x + shift, ζ)`.
    pub fn translated(&self, shift: &[f64]) -> Self {
        let mut center = self.x_domain.center.clone();
        for (c, s) in center.iter_mut().zip(shift) {
            *c -= s;
        }
        Self {
            name: self.name.clone(),
            kind: SymbolKind::Shifted {
                shift: shift.into(),
                inner: Box::new(self.kind.clone()),
            },
            x_domain: XDomain {
                center,
                ..self.x_domain.clone()
            },
            ..self.clone()
        }
    }

    /// Evaluation without domain checks; callers guarantee the point lies in
    /// the declared domains.
    #[inline]
    pub fn eval_unchecked(&self, x: &[C64], zeta: &[C64]) -> C64 {
        self.kind.eval(x, zeta)
    }

    pub fn eval(&self, x: &[C64], zeta: &[C64]) -> Result<C64> {
        eval_symbol(self, x, zeta)
    }

    /// Real `(x, ξ)` evaluation; same code path as [`eval_symbol`].
    pub fn eval_real(&self, x: &[f64], xi: &[f64]) -> C64 {
        let xc = crate::to_complex(x);
        let zc = crate::to_complex(xi);
        self.kind.eval(&xc, &zc)
    }
}

/// Value of the holomorphic extension at `(x, ζ)`.
pub fn eval_symbol(p: &AnalyticSymbol, x: &[C64], zeta: &[C64]) -> Result<C64> {
    if x.len() != p.dim || zeta.len() != p.dim {
        return Err(Error::domain("argument dimension mismatch"));
    }
    if !p.x_domain.contains(x) {
        return Err(Error::domain(format!("x = {x:?} outside the symbol's x-domain")));
    }
    let real = zeta.iter().all(|z| z.im == 0.0);
    if !real && !wedge_contains(&p.wedge, zeta) {
        return Err(Error::domain(format!("ζ = {zeta:?} is neither real nor in W_ε")));
    }
    Ok(p.kind.eval(x, zeta))
}

/// Sample points for [`check_real_symbol_estimate`].
#[derive(Clone, Debug)]
pub struct RealSampleGrid {
    pub xs: Vec<RVec>,
    /// Unit directions for `ξ`.
    pub directions: Vec<RVec>,
    /// Decades `|ξ| ∈ [2^k, 2^{k+1}]`, `k = 0..decades`.
    pub decades: usize,
    pub per_decade: usize,
}

impl RealSampleGrid {
    pub fn standard(dim: usize) -> Self {
        let directions: Vec<RVec> = match dim {
            1 => vec![RVec::from_slice(&[1.0]), RVec::from_slice(&[-1.0])],
            _ => (0..8)
                .map(|k| {
                    let th = k as f64 * std::f64::consts::TAU / 8.0 + 0.1;
                    let mut v: RVec = std::iter::repeat_n(0.0, dim).collect();
                    v[0] = th.cos();
                    v[1] = th.sin();
                    v
                })
                .collect(),
        };
        let xs = [-0.5, 0.0, 0.3]
            .iter()
            .map(|&a| {
                let mut v: RVec = std::iter::repeat_n(0.0, dim).collect();
                v[0] = a;
                v
            })
            .collect();
        Self {
            xs,
            directions,
            decades: 11,
            per_decade: 6,
        }
    }
}

/// Sampled sup of `⟨ξ⟩^{|α|−d} |∂_x^β ∂_ξ^α p|` for one `(α, β)`.
#[derive(Clone, Debug, Serialize)]
pub struct DerivativeSup {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub sup: f64,
    pub decade_sups: Vec<f64>,
    pub violation: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolEstimateReport {
    pub symbol: String,
    pub order: f64,
    pub entries: Vec<DerivativeSup>,
    pub violations: Vec<String>,
}

impl SymbolEstimateReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn multi_indices(dim: usize, max_total: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::new();
        for idx in &out {
            let used: u32 = idx.iter().sum();
            for k in 0..=(max_total - used) {
                let mut v = idx.clone();
                v.push(k);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Nested central differences: `Π_i (2h_i)^{−k_i} Σ_j (−1)^j C(k_i, j) f(z + (k_i − 2j)h_i e_i)`.
fn mixed_difference(f: &dyn Fn(&[f64]) -> C64, z: &[f64], orders: &[u32], steps: &[f64]) -> C64 {
    let dims: Vec<usize> = (0..z.len()).filter(|&i| orders[i] > 0).collect();
    let mut total = C64::new(0.0, 0.0);
    let counts: Vec<u32> = dims.iter().map(|&i| orders[i] + 1).collect();
    let n_terms: u32 = counts.iter().product();
    let mut pt = z.to_vec();
    for idx in 0..n_terms {
        let mut rem = idx;
        let mut coef = 1.0;
        pt.copy_from_slice(z);
        for (d, &i) in dims.iter().enumerate() {
            let j = rem % counts[d];
            rem /= counts[d];
            let k = orders[i];
            coef *= if j.is_multiple_of(2) { 1.0 } else { -1.0 } * binomial(k, j);
            pt[i] += (k as f64 - 2.0 * j as f64) * steps[i];
        }
        total += f(&pt) * coef;
    }
    let scale: f64 = dims.iter().map(|&i| (2.0 * steps[i]).powi(orders[i] as i32)).product();
    total / scale
}

/// Heuristic finiteness test on per-decade sups: finite, and non-increasing
/// (within 5%) after the fourth decade.
fn growth_flag(decade_sups: &[f64], floor: f64) -> bool {
    if decade_sups.iter().any(|s| !s.is_finite()) {
        return true;
    }
    decade_sups
        .windows(2)
        .enumerate()
        .skip(4)
        .any(|(_, w)| w[1] > 1.05 * w[0] + floor)
}

/// Samples `⟨ξ⟩^{|α|−d}|∂_x^β ∂_ξ^α p(x, ξ)|` for `|α| + |β| ≤ cap`.
pub fn check_real_symbol_estimate(p: &AnalyticSymbol, cap: u32, grid: &RealSampleGrid) -> SymbolEstimateReport {
    let n = p.dim;
    let mut entries = Vec::new();
    let mut violations = Vec::new();
    for mi in multi_indices(2 * n, cap) {
        let beta: Vec<u32> = mi[..n].to_vec();
        let alpha: Vec<u32> = mi[n..].to_vec();
        let abs_alpha: u32 = alpha.iter().sum();
        let mut decade_sups = vec![0.0f64; grid.decades];
        let f = |z: &[f64]| p.eval_real(&z[..n], &z[n..]);
        for (k, sup) in decade_sups.iter_mut().enumerate() {
            let lo = 2f64.powi(k as i32);
            for j in 0..grid.per_decade {
                let rad = lo * (1.0 + (j as f64 + 0.5) / grid.per_decade as f64);
                let weight = japanese_bracket(rad).powf(abs_alpha as f64 - p.order);
                for x in &grid.xs {
                    for dir in &grid.directions {
                        let mut z: Vec<f64> = x.to_vec();
                        z.extend(dir.iter().map(|d| d * rad));
                        let hx = 1e-2;
                        let hxi = 1e-2 * japanese_bracket(rad);
                        let steps: Vec<f64> = (0..2 * n).map(|i| if i < n { hx } else { hxi }).collect();
                        let d = mixed_difference(&f, &z, &mi, &steps);
                        let v = weight * d.norm();
                        *sup = if v.is_nan() { f64::INFINITY } else { sup.max(v) };
                    }
                }
            }
        }
        let sup = decade_sups.iter().cloned().fold(0.0, f64::max);
        let violation = growth_flag(&decade_sups, 1e-6 * sup.max(1.0));
        if violation {
            violations.push(format!("α={alpha:?} β={beta:?}: sampled sup grows across decades"));
        }
        entries.push(DerivativeSup {
            alpha,
            beta,
            sup,
            decade_sups,
            violation,
        });
    }
    SymbolEstimateReport {
        symbol: p.name.clone(),
        order: p.order,
        entries,
        violations,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WedgeBoundReport {
    pub symbol: String,
    pub empirical_constant: f64,
    pub decade_sups: Vec<f64>,
    pub unbounded: bool,
    pub samples: usize,
}

/// Samples `⟨Re ζ⟩^{−d}|p(x, ζ)|` along rays `ζ = s·ω(1 + iτ)`, `|τ| < ε`,
/// `s ∈ (R, R·2^decades]`, for `x` in the given compact sample set.
pub fn check_wedge_bound(
    p: &AnalyticSymbol,
    xs: &[Vec<C64>],
    directions: &[RVec],
    rays_per_direction: usize,
    decades: usize,
) -> WedgeBoundReport {
    let eps = p.wedge.epsilon;
    let r_trunc = p.wedge.truncation;
    let per_decade = 8;
    let mut decade_sups = vec![0.0f64; decades];
    let mut samples = 0;
    for (k, sup) in decade_sups.iter_mut().enumerate() {
        let lo = r_trunc * 2f64.powi(k as i32);
        for j in 0..per_decade {
            let s = lo * (1.0 + (j as f64 + 0.5) / per_decade as f64);
            for dir in directions {
                for m in 0..rays_per_direction {
                    let tau = eps * (-1.0 + (2.0 * m as f64 + 1.0) / rays_per_direction as f64);
                    let zeta: Vec<C64> = dir.iter().map(|w| C64::new(s * w, s * tau * w)).collect();
                    let re_norm = s * norm(dir);
                    for x in xs {
                        let v = japanese_bracket(re_norm).powf(-p.order) * p.eval_unchecked(x, &zeta).norm();
                        samples += 1;
                        *sup = if v.is_nan() { f64::INFINITY } else { sup.max(v) };
                    }
                }
            }
        }
    }
    let empirical_constant = decade_sups.iter().cloned().fold(0.0, f64::max);
    let unbounded = growth_flag(&decade_sups, 1e-9 * empirical_constant.max(1.0));
    WedgeBoundReport {
        symbol: p.name.clone(),
        empirical_constant,
        decade_sups,
        unbounded,
        samples,
    }
}

/// A complex number in configuration files: a bare real or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn to_c64(self) -> C64 {
        match self {
            ComplexValue::Real(a) => C64::new(a, 0.0),
            ComplexValue::Pair([a, b]) => C64::new(a, b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum XFactorSpec {
    Polynomial { coord: usize, coeffs: Vec<ComplexValue> },
    Exponential { k: Vec<ComplexValue> },
}

/// Symbol sub-schema of the run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum SymbolSpec {
    Constant {
        value: ComplexValue,
    },
    Monomial {
        alpha: Vec<u32>,
    },
    Resolvent {},
    BracketPower {
        order: f64,
    },
    Modulated {
        factor: XFactorSpec,
        inner: Box<SymbolSpec>,
    },
}

impl SymbolSpec {
    pub fn build(&self, wedge: Wedge) -> Result<AnalyticSymbol> {
        Ok(match self {
            SymbolSpec::Constant { value } => AnalyticSymbol::constant(value.to_c64(), wedge),
            SymbolSpec::Monomial { alpha } => AnalyticSymbol::monomial(alpha.clone(), wedge)?,
            SymbolSpec::Resolvent {} => AnalyticSymbol::resolvent(wedge)?,
            SymbolSpec::BracketPower { order } => AnalyticSymbol::bracket_power(*order, wedge)?,
            SymbolSpec::Modulated { factor, inner } => {
                let factor = match factor {
                    XFactorSpec::Polynomial { coord, coeffs } => {
                        if *coord >= wedge.dim {
                            return Err(Error::Config(format!(
                                "polynomial factor coordinate {coord} out of range"
                            )));
                        }
                        XFactor::Polynomial {
                            coord: *coord,
                            coeffs: coeffs.iter().map(|c| c.to_c64()).collect(),
                        }
                    }
                    XFactorSpec::Exponential { k } => {
                        if k.len() != wedge.dim {
                            return Err(Error::Config(
                                "exponential factor needs one coefficient per coordinate".into(),
                            ));
                        }
                        XFactor::Exponential {
                            k: k.iter().map(|c| c.to_c64()).collect(),
                        }
                    }
                };
                AnalyticSymbol::modulated(factor, inner.build(wedge)?)
            }
        })
    }
}
