//! Comparison checks: each assembles both sides of an inequality (or an
//! equality case), solves them and returns a [`ComparisonReport`].
//!
//! A report passes when `margin ≥ −slack · max(|lhs|, |rhs|)`, with the
//! margin signed in the asserted direction. Equality cases assert both
//! one-sided bounds with the same slack.

mod domains;
mod properties;
mod reference;
mod suite;

pub use domains::{
    check_dirichlet_disc, check_fiberwise_faber_krahn, check_hyperbolic_domain,
    check_spherical_domain, FaberKrahnParams, FkPreset, SdPreset, SphericalDomainParams,
};
pub use properties::{
    check_fiberwise_contraction, check_layer_cake, check_polya_szego, check_sup_contraction,
};
pub use reference::{check_reference, reference_values, ReferenceValue};
pub use suite::{run_suite, summary_csv, SuiteConfig};

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::functionals::{
    expand_over_fibers, warped_scalar_curvature, yamabe_descent, yamabe_functional, DescentOptions,
};
use crate::manifold::{
    make_circle, make_icosphere, make_product, make_warped_product, DiscreteManifold, RadialGrid,
    ScalarField,
};
use crate::model_spaces::ModelSpace;
use crate::spectrum::{lambda1_closed, SolverOptions, SpectralResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Default relative slack of eigenvalue checks.
pub const LAMBDA_SLACK: f64 = 0.02;
/// Default relative slack of the Yamabe comparison.
pub const YAMABE_SLACK: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs ≥ rhs`; margin `lhs − rhs`.
    AtLeast,
    /// `lhs ≤ rhs`; margin `rhs − lhs`.
    AtMost,
    /// Both of the above; margin `lhs − rhs`.
    Equal,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub theorem_id: String,
    pub lhs_label: String,
    pub rhs_label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub margin: f64,
    pub slack: f64,
    pub pass: bool,
    /// Unasserted reports never affect a verdict.
    pub asserted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub diagnostics: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub subchecks: Vec<ComparisonReport>,
}

impl ComparisonReport {
    pub fn new(
        theorem_id: &str,
        (lhs_label, lhs): (impl Into<String>, f64),
        (rhs_label, rhs): (impl Into<String>, f64),
        relation: Relation,
        slack: f64,
    ) -> Self {
        let margin = match relation {
            Relation::AtLeast | Relation::Equal => lhs - rhs,
            Relation::AtMost => rhs - lhs,
        };
        let tol = -slack * lhs.abs().max(rhs.abs());
        let pass = match relation {
            Relation::Equal => margin >= tol && -margin >= tol,
            _ => margin >= tol,
        };
        ComparisonReport {
            schema_version: SCHEMA_VERSION,
            theorem_id: theorem_id.to_owned(),
            lhs_label: lhs_label.into(),
            rhs_label: rhs_label.into(),
            lhs,
            rhs,
            relation,
            margin,
            slack,
            pass,
            asserted: true,
            note: None,
            diagnostics: BTreeMap::new(),
            subchecks: Vec::new(),
        }
    }

    pub fn with_diag(mut self, key: &str, value: impl Serialize) -> Self {
        self.diagnostics.insert(
            key.to_owned(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn with_subcheck(mut self, sub: ComparisonReport) -> Self {
        self.subchecks.push(sub);
        self
    }

    pub fn unasserted(mut self) -> Self {
        self.asserted = false;
        self
    }

    /// False only when this report or an asserted subcheck fails an asserted
    /// comparison.
    pub fn verdict(&self) -> bool {
        !self.asserted || (self.pass && self.subchecks.iter().all(ComparisonReport::verdict))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Shared knobs: a slack override and the eigensolver settings.
#[derive(Clone, Debug, Default)]
pub struct CheckConfig {
    pub slack: Option<f64>,
    pub solver: SolverOptions,
}

impl CheckConfig {
    fn slack_or(&self, default: f64) -> f64 {
        self.slack.unwrap_or(default)
    }
}

/// Warping function on a circle base, `const:c` or `sin:a` for
/// `ρ(s) = 1 + a sin s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum RhoSpec {
    Const(f64),
    Sin(f64),
}

impl RhoSpec {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            RhoSpec::Const(c) => c,
            RhoSpec::Sin(a) => 1.0 + a * s.sin(),
        }
    }

    pub fn sample(&self, base: &DiscreteManifold) -> Result<Vec<f64>> {
        let coords = base
            .coords()
            .ok_or_else(|| Error::mesh("base has no coordinates"))?;
        let rho: Vec<f64> = coords.iter().map(|c| self.eval(c[0])).collect();
        if let Some(r) = rho.iter().find(|r| !(**r > 0.0)) {
            return Err(Error::domain(format!(
                "warping function {self} is not positive ({r})"
            )));
        }
        Ok(rho)
    }
}

impl fmt::Display for RhoSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoSpec::Const(c) => write!(f, "const:{c}"),
            RhoSpec::Sin(a) => write!(f, "sin:{a}"),
        }
    }
}

impl FromStr for RhoSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::domain(format!(
                "cannot parse warping function {s:?}; expected const:<c> or sin:<a>"
            ))
        };
        let (kind, val) = s.split_once(':').ok_or_else(bad)?;
        let v: f64 = val.trim().parse().map_err(|_| bad())?;
        if !v.is_finite() {
            return Err(bad());
        }
        match kind.trim() {
            "const" if v > 0.0 => Ok(RhoSpec::Const(v)),
            "sin" if v.abs() < 1.0 => Ok(RhoSpec::Sin(v)),
            _ => Err(bad()),
        }
    }
}

impl From<RhoSpec> for String {
    fn from(r: RhoSpec) -> String {
        r.to_string()
    }
}

impl TryFrom<String> for RhoSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

fn solver_diag(r: &SpectralResult) -> Value {
    serde_json::json!({
        "iterations": r.iterations,
        "residual": r.residual,
        "seed": r.seed,
        "method": r.method,
    })
}

fn circle_base(length: f64, n: usize) -> Result<DiscreteManifold> {
    make_circle(length, n)
}

/// Radial chain standing in for the round `S²` fiber on fiber-radial
/// functions, which carry every distinct eigenvalue of a warped product over
/// a sphere.
fn sphere_model_chain(bins: usize) -> Result<DiscreteManifold> {
    RadialGrid::equal_radius(ModelSpace::unit_sphere(2)?, bins, PI)?.to_manifold()
}

/// `λ₁(S²) = 2` against the icosphere at `level`.
pub fn check_lichnerowicz(level: usize, cfg: &CheckConfig) -> Result<ComparisonReport> {
    let m = make_icosphere(level)?;
    let r = lambda1_closed(&m, &cfg.solver)?;
    Ok(ComparisonReport::new(
        "lichnerowicz",
        (format!("lambda1(icosphere({level}))"), r.lambda1),
        ("lambda1(S^2)", 2.0),
        Relation::Equal,
        cfg.slack_or(LAMBDA_SLACK),
    )
    .with_diag("level", level)
    .with_diag("vertices", m.vertex_count())
    .with_diag("solver", solver_diag(&r)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FiberSpec {
    Icosphere { level: usize },
    Circle { length: f64, n: usize },
}

impl FiberSpec {
    fn build(&self) -> Result<DiscreteManifold> {
        match *self {
            FiberSpec::Icosphere { level } => make_icosphere(level),
            FiberSpec::Circle { length, n } => make_circle(length, n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProductParams {
    pub base_len: f64,
    pub base_n: usize,
    pub fiber: FiberSpec,
}

impl Default for ProductParams {
    fn default() -> Self {
        ProductParams {
            base_len: 2.0 * PI,
            base_n: 128,
            fiber: FiberSpec::Icosphere { level: 3 },
        }
    }
}

/// `λ₁(N × M) = min(λ₁(N), λ₁(M))`.
pub fn check_product_formula(p: &ProductParams, cfg: &CheckConfig) -> Result<ComparisonReport> {
    let base = circle_base(p.base_len, p.base_n)?;
    let fiber = p.fiber.build()?;
    let prod = make_product(&base, &fiber)?;
    let rp = lambda1_closed(&prod, &cfg.solver)?;
    let rb = lambda1_closed(&base, &cfg.solver)?;
    let rf = lambda1_closed(&fiber, &cfg.solver)?;
    Ok(ComparisonReport::new(
        "product",
        ("lambda1(N x M)", rp.lambda1),
        ("min(lambda1(N), lambda1(M))", rb.lambda1.min(rf.lambda1)),
        Relation::Equal,
        cfg.slack_or(LAMBDA_SLACK),
    )
    .with_diag("params", p)
    .with_diag("vertices", prod.vertex_count())
    .with_diag("lambda1_base", rb.lambda1)
    .with_diag("lambda1_fiber", rf.lambda1)
    .with_diag("solver", solver_diag(&rp)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WarpedParams {
    pub base_len: f64,
    pub base_n: usize,
    pub rho: RhoSpec,
    pub level: usize,
    /// Cells of the radial chain modelling the round sphere.
    pub model_bins: usize,
}

impl Default for WarpedParams {
    fn default() -> Self {
        WarpedParams {
            base_len: 2.0 * PI,
            base_n: 64,
            rho: RhoSpec::Const(0.5),
            level: 3,
            model_bins: 128,
        }
    }
}

/// `λ₁(N ×_ρ M) ≥ λ₁(N ×_ρ S²)` with `M` the icosphere; for constant `ρ`
/// with `λ₁(N) ≤ 2/ρ²` also `λ₁(N ×_ρ M) = λ₁(N)`.
pub fn check_warped_lambda1(p: &WarpedParams, cfg: &CheckConfig) -> Result<ComparisonReport> {
    let slack = cfg.slack_or(LAMBDA_SLACK);
    let base = circle_base(p.base_len, p.base_n)?;
    let rho = p.rho.sample(&base)?;
    let x = make_warped_product(&base, &make_icosphere(p.level)?, &rho)?;
    let model = make_warped_product(&base, &sphere_model_chain(p.model_bins)?, &rho)?;
    let rx = lambda1_closed(&x, &cfg.solver)?;
    let rm = lambda1_closed(&model, &cfg.solver)?;
    let mut report = ComparisonReport::new(
        "warped-lambda1",
        ("lambda1(N x_rho M)", rx.lambda1),
        ("lambda1(N x_rho S^2)", rm.lambda1),
        Relation::AtLeast,
        slack,
    )
    .with_diag("params", p)
    .with_diag("vertices", x.vertex_count())
    .with_diag("model_vertices", model.vertex_count())
    .with_diag("solver", solver_diag(&rx))
    .with_diag("model_solver", solver_diag(&rm));
    if let RhoSpec::Const(c) = p.rho {
        let rb = lambda1_closed(&base, &cfg.solver)?;
        if rb.lambda1 <= 2.0 / (c * c) {
            report = report.with_subcheck(
                ComparisonReport::new(
                    "warped-lambda1-base",
                    ("lambda1(N x_rho M)", rx.lambda1),
                    ("lambda1(N)", rb.lambda1),
                    Relation::Equal,
                    slack,
                )
                .with_note("constant warping with lambda1(N) <= m / rho^2"),
            );
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct YamabeParams {
    pub base_len: f64,
    pub base_n: usize,
    pub rho: RhoSpec,
    pub level: usize,
    pub model_bins: usize,
    pub iters: usize,
    pub step: f64,
    pub seed: u64,
}

impl Default for YamabeParams {
    fn default() -> Self {
        YamabeParams {
            base_len: 2.0 * PI,
            base_n: 32,
            rho: RhoSpec::Sin(0.2),
            level: 3,
            model_bins: 64,
            iters: 400,
            step: 1.0,
            seed: 1,
        }
    }
}

const YAMABE_NOTE: &str =
    "indicative: both sides are descent upper bounds on discrete Yamabe infima, not the infima themselves";

/// Yamabe comparison between `N ×_ρ M` (icosphere) and `N ×_ρ S²` (radial
/// chain), both with the warped scalar curvature.
pub fn check_yamabe_warped(p: &YamabeParams, cfg: &CheckConfig) -> Result<ComparisonReport> {
    let base = circle_base(p.base_len, p.base_n)?;
    let rho = p.rho.sample(&base)?;
    let curv = warped_scalar_curvature(&base, 2, 2.0, &vec![0.0; base.vertex_count()], &rho)?;
    let opts = DescentOptions {
        iters: p.iters,
        step: p.step,
        seed: p.seed,
        ..Default::default()
    };
    let m_total = base.dim() + 2;
    let side = |fiber: DiscreteManifold| -> Result<(f64, f64, usize, usize)> {
        let x = make_warped_product(&base, &fiber, &rho)?;
        let s = expand_over_fibers(&x, &curv)?;
        let y1 = yamabe_functional(&x, &ScalarField::constant(&x, 1.0)?, &s, m_total)?;
        let out = yamabe_descent(&x, &s, m_total, &opts)?;
        Ok((out.value, y1, out.trace.len() - 1, x.vertex_count()))
    };
    let (lhs, lhs_const, lhs_iters, nx) = side(make_icosphere(p.level)?)?;
    let (rhs, rhs_const, rhs_iters, nm) = side(sphere_model_chain(p.model_bins)?)?;
    Ok(ComparisonReport::new(
        "yamabe-warped",
        ("Y upper bound on N x_rho M", lhs),
        ("Y upper bound on N x_rho S^2", rhs),
        Relation::AtLeast,
        cfg.slack_or(YAMABE_SLACK),
    )
    .with_note(YAMABE_NOTE)
    .with_diag("params", p)
    .with_diag("vertices", nx)
    .with_diag("model_vertices", nm)
    .with_diag("descent_iterations", [lhs_iters, rhs_iters])
    .with_diag("constant_field_values", [lhs_const, rhs_const]))
}

/// `Y(1)` on `S¹_L × S²` against `2 (4πL)^{2/3}`, to absolute accuracy
/// `abs_tol`.
pub fn check_yamabe_constant(
    base_n: usize,
    level: usize,
    abs_tol: f64,
) -> Result<ComparisonReport> {
    let len = 2.0 * PI;
    let m = make_product(&circle_base(len, base_n)?, &make_icosphere(level)?)?;
    let s = vec![2.0; m.vertex_count()];
    let y = yamabe_functional(&m, &ScalarField::constant(&m, 1.0)?, &s, 3)?;
    let exact = 2.0 * (4.0 * PI * len).powf(2.0 / 3.0);
    Ok(ComparisonReport::new(
        "yamabe-constant",
        ("Y(1) on S^1 x S^2", y),
        ("2 (8 pi^2)^(2/3)", exact),
        Relation::Equal,
        abs_tol / exact,
    )
    .with_diag("base_n", base_n)
    .with_diag("level", level)
    .with_diag("abs_error", (y - exact).abs()))
}
