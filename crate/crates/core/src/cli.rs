//! JSON-configured batch runs: `run <config.json>` evaluates one action over
//! a complex grid and writes a results CSV, a diagnostics JSON and gnuplot
//! tables of `|F|` and `arg F`; `schema` prints the configuration schema.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::evaluator::{
    extend, extend_tube, kernel_k, op_distribution, DistributionSpec, FourierConfig, FourierReference, InputSpec,
};
use crate::geometry::{Ball, DeformationParams, TubeDomain, Wedge};
use crate::quadrature::{select_t0, QuadratureConfig, RegularizationSchedule};
use crate::symbols::{ComplexValue, SymbolSpec};
use crate::verify::{default_suite, CheckReport, Tolerances};
use crate::{CVec, Error, Result, C64};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    /// Real-axis reference by direct Fourier quadrature.
    Evaluate,
    /// Holomorphic extension on the complex grid.
    Extend,
    /// The kernel `K(x, y)` at a fixed `y`.
    Kernel,
    /// A smooth part plus Dirac terms.
    Distribution,
    /// The default verification suite.
    Verify,
    /// Extension over a tube domain.
    Tube,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub r: f64,
    pub r_prime: f64,
    #[serde(default)]
    pub r_dprime: Option<f64>,
    pub delta: f64,
    pub delta_prime: f64,
    pub epsilon: f64,
    pub truncation: f64,
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default)]
    pub delta0: Option<f64>,
}

impl ParamsSpec {
    pub fn build(&self, dim: usize) -> Result<DeformationParams> {
        let mut p = DeformationParams::new(
            dim,
            self.r,
            self.r_prime,
            self.delta,
            self.delta_prime,
            self.epsilon,
            self.truncation,
        );
        if let Some(v) = self.r_dprime {
            p = p.with_r_dprime(v);
        }
        p = p.with_symbol_domain(self.r0.unwrap_or(f64::INFINITY), self.delta0.unwrap_or(f64::INFINITY));
        p.validate().map_err(Error::InvalidParams)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => vec![],
            1 => vec![self.min],
            m => (0..m)
                .map(|k| self.min + (self.max - self.min) * k as f64 / (m - 1) as f64)
                .collect(),
        }
    }
}

fn default_im_axis() -> AxisSpec {
    AxisSpec {
        min: 0.0,
        max: 0.0,
        count: 1,
    }
}

/// A rectangle `re × im` in coordinate `coord` through `base`, or an
/// explicit point list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub re: Option<AxisSpec>,
    #[serde(default = "default_im_axis")]
    pub im: AxisSpec,
    #[serde(default)]
    pub coord: usize,
    #[serde(default)]
    pub base: Option<Vec<ComplexValue>>,
    #[serde(default)]
    pub points: Option<Vec<Vec<ComplexValue>>>,
}

struct Grid {
    points: Vec<CVec>,
    /// `(re, im)` axes when the grid is a rectangle.
    axes: Option<(Vec<f64>, Vec<f64>)>,
}

impl GridSpec {
    fn build(&self, dim: usize) -> Result<Grid> {
        if let Some(pts) = &self.points {
            let points = pts
                .iter()
                .map(|p| {
                    if p.len() != dim {
                        Err(Error::Config(format!(
                            "grid point of length {} in dimension {dim}",
                            p.len()
                        )))
                    } else {
                        Ok(p.iter().map(|c| c.to_c64()).collect())
                    }
                })
                .collect::<Result<Vec<CVec>>>()?;
            return Ok(Grid { points, axes: None });
        }
        let re = self
            .re
            .ok_or_else(|| Error::Config("grid needs either \"re\" or \"points\"".into()))?;
        if self.coord >= dim {
            return Err(Error::Config(format!("grid coordinate {} out of range", self.coord)));
        }
        let base: CVec = match &self.base {
            Some(b) if b.len() == dim => b.iter().map(|c| c.to_c64()).collect(),
            Some(_) => return Err(Error::Config("grid base has the wrong dimension".into())),
            None => std::iter::repeat_n(C64::new(0.0, 0.0), dim).collect(),
        };
        let (rv, iv) = (re.values(), self.im.values());
        let points = crate::verify::plane_grid(&base, self.coord, &rv, &iv);
        Ok(Grid {
            points,
            axes: Some((rv, iv)),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WedgeSpec {
    pub epsilon: f64,
    pub truncation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TubeSpec {
    pub base: Vec<Ball>,
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_prefix")]
    pub prefix: String,
    #[serde(default = "default_true")]
    pub plots: bool,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_prefix() -> String {
    "run".into()
}

fn default_true() -> bool {
    true
}

fn default_t() -> f64 {
    1.0
}

fn default_samples() -> usize {
    100_000
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            prefix: default_prefix(),
            plots: true,
        }
    }
}

/// A complete run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: String,
    pub dimension: usize,
    pub action: Action,
    pub symbol: SymbolSpec,
    /// Wedge of the symbol; defaults to the deformation's `ε` and `R`.
    #[serde(default)]
    pub symbol_wedge: Option<WedgeSpec>,
    #[serde(default)]
    pub input: Option<InputSpec>,
    #[serde(default)]
    pub distribution: Option<DistributionSpec>,
    pub params: ParamsSpec,
    pub grid: GridSpec,
    /// Contour parameter for `extend`; only `t = 1` is used by the other actions.
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default)]
    pub kernel_y: Option<Vec<f64>>,
    #[serde(default)]
    pub tube: Option<TubeSpec>,
    /// Defaults to the standard rule for `n = 1` and the coarse rule otherwise.
    #[serde(default)]
    pub quadrature: Option<QuadratureConfig>,
    #[serde(default)]
    pub fourier: Option<FourierConfig>,
    #[serde(default)]
    pub schedule: RegularizationSchedule,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {:?}; expected {SCHEMA_VERSION:?}",
                cfg.version
            )));
        }
        if cfg.dimension == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        Ok(cfg)
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        self.quadrature.clone().unwrap_or_else(|| {
            if self.dimension == 1 {
                QuadratureConfig::default()
            } else {
                QuadratureConfig::coarse()
            }
        })
    }
}

/// Command-line overrides of config fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// One output row.
#[derive(Clone, Debug, Serialize)]
pub struct ResultRow {
    #[serde(serialize_with = "serialize_point")]
    pub x: CVec,
    pub value: Option<C64>,
    pub decay_margin: f64,
    pub rho_max: f64,
    pub err_estimate: f64,
    pub error: Option<String>,
    #[serde(skip)]
    pub error_code: Option<i32>,
}

/// Paths written and the process exit status of a run.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub exit_code: i32,
    pub csv: PathBuf,
    pub diagnostics: PathBuf,
    pub plots: Vec<PathBuf>,
    pub rows: Vec<ResultRow>,
    pub checks: Vec<CheckReport>,
}

fn serialize_point<S: serde::Serializer>(x: &CVec, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|z| [z.re, z.im]))
}

fn row_ok(x: CVec, value: C64, decay_margin: f64, rho_max: f64, err_estimate: f64) -> ResultRow {
    ResultRow {
        x,
        value: Some(value),
        decay_margin,
        rho_max,
        err_estimate,
        error: None,
        error_code: None,
    }
}

fn row_err(x: CVec, decay_margin: f64, e: &Error) -> ResultRow {
    ResultRow {
        x,
        value: None,
        decay_margin,
        rho_max: f64::NAN,
        err_estimate: f64::NAN,
        error: Some(e.to_string()),
        error_code: Some(e.exit_code()),
    }
}

fn im_norm(x: &[C64]) -> f64 {
    crate::norm(&crate::im_part(x))
}

/// Reads, runs and writes one configuration.
pub fn run_file(path: &Path, overrides: &Overrides) -> Result<RunSummary> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    if let Some(o) = &overrides.out {
        cfg.output.dir = o.clone();
    }
    run_config(&cfg)
}

/// Executes `cfg` and writes its artifacts.
pub fn run_config(cfg: &RunConfig) -> Result<RunSummary> {
    let start = Instant::now();
    let n = cfg.dimension;
    let params = cfg.params.build(n)?;
    let wedge = match &cfg.symbol_wedge {
        Some(w) => Wedge::new(w.epsilon, w.truncation, n)?,
        None => Wedge::new(params.epsilon, params.truncation, n)?,
    };
    let symbol = cfg.symbol.build(wedge).map_err(|e| match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    })?;
    let qcfg = cfg.quadrature();
    qcfg.validate()?;
    cfg.schedule.validate()?;
    let grid = cfg.grid.build(n)?;
    let input = || -> Result<crate::evaluator::TestFunction> {
        cfg.input
            .as_ref()
            .ok_or_else(|| Error::Config(format!("action {:?} needs an \"input\"", cfg.action)))?
            .build(n)
    };

    let mut checks = Vec::new();
    let rows: Vec<ResultRow> = match cfg.action {
        Action::Evaluate => {
            let u = input()?;
            let fcfg = cfg.fourier.unwrap_or_else(|| FourierConfig::for_dim(n));
            let reference = FourierReference::new(&u, &fcfg)?;
            grid.points
                .iter()
                .map(|x| {
                    if im_norm(x) != 0.0 {
                        return row_err(x.clone(), f64::NAN, &Error::domain("evaluate needs real grid points"));
                    }
                    let re = crate::re_part(x);
                    match reference.eval(&symbol, &re, &cfg.schedule) {
                        Ok(v) => row_ok(x.clone(), v.value, f64::NAN, fcfg.xi_max, v.err_estimate),
                        Err(e) => row_err(x.clone(), f64::NAN, &e),
                    }
                })
                .collect()
        }
        Action::Extend => {
            let u = input()?;
            if cfg.t == 1.0 {
                let res = extend(&symbol, &u, &params, &grid.points, &qcfg)?;
                res.points
                    .into_iter()
                    .map(|p| ResultRow {
                        x: p.point(),
                        value: p.value,
                        decay_margin: p.decay_margin,
                        rho_max: p.rho_max,
                        err_estimate: p.err_estimate,
                        error: p.error,
                        error_code: p.error_code,
                    })
                    .collect()
            } else {
                grid.points
                    .iter()
                    .map(|x| {
                        let m = cfg.t * params.delta_prime - im_norm(x);
                        match crate::evaluator::op_deformed(&symbol, &u, &params, cfg.t, x, &qcfg) {
                            Ok(r) => row_ok(x.clone(), r.value, m, r.rho_max, r.err_estimate),
                            Err(e) => row_err(x.clone(), m, &e),
                        }
                    })
                    .collect()
            }
        }
        Action::Kernel => {
            let y = cfg
                .kernel_y
                .clone()
                .ok_or_else(|| Error::Config("action kernel needs \"kernel_y\"".into()))?;
            if y.len() != n {
                return Err(Error::Config("kernel_y has the wrong dimension".into()));
            }
            let chi1 = crate::cutoffs::SmoothBump::centered(n, params.r_dprime, params.chi1_outer())?.value(&y);
            grid.points
                .iter()
                .map(|x| {
                    let m = params.delta_prime * (1.0 - chi1) - im_norm(x);
                    match kernel_k(&symbol, &params, x, &y, &qcfg) {
                        Ok(r) => row_ok(x.clone(), r.value, m, r.rho_max, r.err_estimate),
                        Err(e) => row_err(x.clone(), m, &e),
                    }
                })
                .collect()
        }
        Action::Distribution => {
            let d = cfg
                .distribution
                .as_ref()
                .ok_or_else(|| Error::Config("action distribution needs \"distribution\"".into()))?
                .build(n)?;
            grid.points
                .iter()
                .map(|x| {
                    let m = params.delta_prime - im_norm(x);
                    match op_distribution(&symbol, &d, &params, x, &qcfg) {
                        Ok(v) => row_ok(x.clone(), v, m, f64::NAN, f64::NAN),
                        Err(e) => row_err(x.clone(), m, &e),
                    }
                })
                .collect()
        }
        Action::Tube => {
            let u = input()?;
            let spec = cfg
                .tube
                .as_ref()
                .ok_or_else(|| Error::Config("action tube needs \"tube\"".into()))?;
            let domain = TubeDomain::new(spec.base.clone(), None).map_err(|e| Error::Config(e.to_string()))?;
            grid.points
                .iter()
                .map(|x| match extend_tube(&symbol, &u, &domain, spec.epsilon, x, &qcfg) {
                    Ok(r) => row_ok(
                        x.clone(),
                        r.value,
                        r.params.delta_prime - im_norm(x),
                        r.rho_max,
                        r.err_estimate,
                    ),
                    Err(e) => row_err(x.clone(), f64::NAN, &e),
                })
                .collect()
        }
        Action::Verify => {
            let u = input()?;
            checks = default_suite(&symbol, &u, &params, &qcfg, &cfg.tolerances, cfg.samples, cfg.seed)?;
            let res = extend(&symbol, &u, &params, &grid.points, &qcfg)?;
            res.points
                .into_iter()
                .map(|p| ResultRow {
                    x: p.point(),
                    value: p.value,
                    decay_margin: p.decay_margin,
                    rho_max: p.rho_max,
                    err_estimate: p.err_estimate,
                    error: p.error,
                    error_code: p.error_code,
                })
                .collect()
        }
    };

    let mut exit_code = rows.iter().filter_map(|r| r.error_code).max().unwrap_or(0);
    if rows
        .iter()
        .any(|r| r.value.is_some_and(|v| !(v.re.is_finite() && v.im.is_finite())))
    {
        exit_code = exit_code.max(3);
    }
    if checks.iter().any(|c| !c.passed) {
        exit_code = exit_code.max(3);
    }

    fs::create_dir_all(&cfg.output.dir)?;
    let csv_path = cfg.output.dir.join(format!("{}.csv", cfg.output.prefix));
    write_csv(&csv_path, n, &rows)?;
    let mut plots = Vec::new();
    if cfg.output.plots {
        if let Some((re, im)) = &grid.axes {
            let abs_path = cfg.output.dir.join(format!("{}_abs.dat", cfg.output.prefix));
            let arg_path = cfg.output.dir.join(format!("{}_arg.dat", cfg.output.prefix));
            write_plot(&abs_path, re, im, &rows, |v| v.norm(), "|F|")?;
            write_plot(&arg_path, re, im, &rows, |v| v.arg(), "arg F")?;
            plots.push(abs_path);
            plots.push(arg_path);
        }
    }
    let diag_path = cfg.output.dir.join(format!("{}_diagnostics.json", cfg.output.prefix));
    let diagnostics = json!({
        "schema_version": SCHEMA_VERSION,
        "config": cfg,
        "derived": {
            "r_dprime": params.r_dprime,
            "zeta_slope": params.zeta_slope(),
            "slope_margin": params.slope_margin(),
            "t0": select_t0(params.zeta_slope(), 0.05),
            "quadrature": qcfg,
        },
        "checks": checks,
        "points": rows,
        "exit_code": exit_code,
        "elapsed_seconds": start.elapsed().as_secs_f64(),
    });
    fs::write(
        &diag_path,
        serde_json::to_string_pretty(&diagnostics).map_err(|e| Error::Config(e.to_string()))?,
    )?;
    Ok(RunSummary {
        exit_code,
        csv: csv_path,
        diagnostics: diag_path,
        plots,
        rows,
        checks,
    })
}

fn write_csv(path: &Path, n: usize, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Config(e.to_string()))?;
    let mut header: Vec<String> = (1..=n).map(|k| format!("re_x_{k}")).collect();
    header.extend((1..=n).map(|k| format!("im_x_{k}")));
    header.extend(["re_value", "im_value", "decay_margin", "rho_max", "err_estimate"].map(String::from));
    w.write_record(&header).map_err(|e| Error::Config(e.to_string()))?;
    for r in rows {
        let mut rec: Vec<String> = r.x.iter().map(|z| format!("{:?}", z.re)).collect();
        rec.extend(r.x.iter().map(|z| format!("{:?}", z.im)));
        let v = r.value.unwrap_or(C64::new(f64::NAN, f64::NAN));
        for f in [v.re, v.im, r.decay_margin, r.rho_max, r.err_estimate] {
            rec.push(format!("{f:?}"));
        }
        w.write_record(&rec).map_err(|e| Error::Config(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn write_plot(
    path: &Path,
    re: &[f64],
    im: &[f64],
    rows: &[ResultRow],
    f: impl Fn(C64) -> f64,
    label: &str,
) -> Result<()> {
    let mut out = fs::File::create(path)?;
    writeln!(out, "# Re x\tIm x\t{label}")?;
    for (j, b) in im.iter().enumerate() {
        for (i, a) in re.iter().enumerate() {
            let v = rows[j * re.len() + i].value.map_or(f64::NAN, &f);
            writeln!(out, "{a:?}\t{b:?}\t{v:?}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// The configuration schema with defaults.
pub fn schema() -> Value {
    let field = |ty: &str, doc: &str| json!({ "type": ty, "doc": doc });
    json!({
        "version": SCHEMA_VERSION,
        "fields": {
            "version": field("string", "must equal the schema version"),
            "dimension": field("integer ≥ 1", "space dimension n"),
            "action": { "type": "string", "enum": ["evaluate", "extend", "kernel", "distribution", "verify", "tube"] },
            "symbol": {
                "type": "object {kind, params}",
                "kinds": {
                    "constant": { "value": "real or [re, im]" },
                    "monomial": { "alpha": "multi-index" },
                    "resolvent": {},
                    "bracket_power": { "order": "real" },
                    "modulated": { "factor": "{type: polynomial, coord, coeffs} or {type: exponential, k}", "inner": "symbol" }
                }
            },
            "symbol_wedge": { "type": "object, optional", "fields": { "epsilon": "real", "truncation": "real" }, "default": "params.epsilon, params.truncation" },
            "input": {
                "type": "object {kind, params}",
                "kinds": {
                    "zero": {},
                    "gaussian": { "plateau": 1.0, "support": 1.5 },
                    "bump_resolvent": {},
                    "sine": { "coord": 0, "freq": 1.0, "plateau": 1.0, "support": 1.5 },
                    "combination": { "terms": "[{coeff, input}]" }
                }
            },
            "distribution": { "smooth": "input, optional", "diracs": "[{point, gamma (default 0), coeff (default 1)}]" },
            "params": {
                "r": field("real", "input holomorphy radius"),
                "r_prime": field("real", "radius r′ of the extension"),
                "r_dprime": field("real, optional", "plateau of χ1; default (r + r′)/2"),
                "delta": field("real", "input holomorphy height δ"),
                "delta_prime": field("real", "deformation height δ′ ≤ δ"),
                "epsilon": field("real", "wedge aperture ε > δ′/(r″ − r′)"),
                "truncation": field("real", "wedge truncation R"),
                "r0": field("real, optional", "symbol x-radius, default ∞"),
                "delta0": field("real, optional", "symbol x-height, default ∞")
            },
            "grid": {
                "re": "{min, max, count}",
                "im": { "default": default_im_axis() },
                "coord": { "default": 0 },
                "base": "complex n-vector, default 0",
                "points": "explicit list of complex n-vectors, replaces the rectangle"
            },
            "t": { "default": 1.0 },
            "kernel_y": "real n-vector (action kernel)",
            "tube": { "base": "[{center, radius}]", "epsilon": "real" },
            "quadrature": { "default_n1": QuadratureConfig::default(), "default_n_ge_2": QuadratureConfig::coarse() },
            "fourier": { "default_n1": FourierConfig::for_dim(1), "default_n_ge_2": FourierConfig::for_dim(2) },
            "schedule": { "default": RegularizationSchedule::default(), "doc": "λ_k = 0.5·2^{−k}, k = 0..6, Richardson in λ²" },
            "tolerances": { "default": Tolerances::default() },
            "samples": { "default": default_samples() },
            "seed": { "default": 0 },
            "output": { "default": OutputSpec::default() }
        },
        "csv_columns": "re_x_1..re_x_n, im_x_1..im_x_n, re_value, im_value, decay_margin, rho_max, err_estimate",
        "exit_codes": { "0": "success", "1": "configuration error", "2": "domain or precondition error", "3": "non-finite value, divergence or failed check" }
    })
}
