//! Copula and subcopula representations: evaluation, rendering, transpose,
//! bracket, convex combination, and JSON round-tripping.
//!
//! A [`CopulaSpec`] is a *candidate* copula: any evaluator on the unit square
//! with values in [0, 1]. Whether it actually satisfies the copula axioms is
//! decided by [`axioms::verify_axioms`], which reports failures instead of
//! erroring, so margin-violating objects (subcopula a.e. parts, for example)
//! are first-class citizens.

pub mod axioms;
pub mod sklar;

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::families::GeneratorSpec;
use crate::grid::{Grid, GridFunction};

/// Symbolic description of a copula-shaped function on the unit square.
///
/// Closed under [`CopulaSpec::transpose`] and [`convex_combine`]. Rendering
/// at any dyadic resolution goes through [`CopulaSpec::render`].
#[derive(Clone)]
pub enum CopulaSpec {
    /// Independence copula u*v.
    Product,
    /// Upper Frechet-Hoeffding bound M(u,v) = min(u,v).
    FrechetUpper,
    /// Lower Frechet-Hoeffding bound W(u,v) = max(u+v-1, 0).
    FrechetLower,
    /// Clayton copula (u^-t + v^-t - 1)^(-1/t), theta > 0.
    Clayton { theta: f64 },
    /// Gumbel copula exp(-((-ln u)^t + (-ln v)^t)^(1/t)), theta >= 1.
    Gumbel { theta: f64 },
    /// coeff * u^u_exp * v^v_exp; carries Cobb-Douglas a.e. parts and the
    /// power-product test functions.
    PowerProduct { coeff: f64, u_exp: f64, v_exp: f64 },
    /// Archimedean copula from an explicit generator, evaluated through the
    /// generalized inverse (bisection).
    Archimedean { generator: GeneratorSpec },
    /// Generator/cogenerator form phi^[-1](phi(max(u,v)) + psi(min(u,v))).
    /// Symmetric by construction.
    GeneralizedArchimedean {
        phi: GeneratorSpec,
        psi: GeneratorSpec,
    },
    /// Node table with bilinear interpolation between nodes.
    Tabulated(Arc<GridFunction>),
    /// Argument swap of the inner spec.
    Transpose(Box<CopulaSpec>),
    /// weight * first + (1 - weight) * second.
    Mixture {
        weight: f64,
        first: Box<CopulaSpec>,
        second: Box<CopulaSpec>,
    },
    /// Arbitrary evaluator; not serializable.
    Custom {
        name: String,
        eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for CopulaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CopulaSpec::Product => write!(f, "Product"),
            CopulaSpec::FrechetUpper => write!(f, "FrechetUpper"),
            CopulaSpec::FrechetLower => write!(f, "FrechetLower"),
            CopulaSpec::Clayton { theta } => write!(f, "Clayton {{ theta: {theta} }}"),
            CopulaSpec::Gumbel { theta } => write!(f, "Gumbel {{ theta: {theta} }}"),
            CopulaSpec::PowerProduct {
                coeff,
                u_exp,
                v_exp,
            } => write!(f, "PowerProduct {{ {coeff} * u^{u_exp} * v^{v_exp} }}"),
            CopulaSpec::Archimedean { generator } => {
                write!(f, "Archimedean {{ {generator:?} }}")
            }
            CopulaSpec::GeneralizedArchimedean { phi, psi } => {
                write!(f, "GeneralizedArchimedean {{ phi: {phi:?}, psi: {psi:?} }}")
            }
            CopulaSpec::Tabulated(t) => write!(f, "Tabulated {{ n: {} }}", t.grid().n()),
            CopulaSpec::Transpose(inner) => write!(f, "Transpose({inner:?})"),
            CopulaSpec::Mixture {
                weight,
                first,
                second,
            } => write!(f, "Mixture {{ {weight} * {first:?} + .. * {second:?} }}"),
            CopulaSpec::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

fn clayton_eval(u: f64, v: f64, theta: f64) -> f64 {
    if u <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return v;
    }
    if v >= 1.0 {
        return u;
    }
    (u.powf(-theta) + v.powf(-theta) - 1.0).powf(-1.0 / theta)
}

fn gumbel_eval(u: f64, v: f64, theta: f64) -> f64 {
    if u <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return v;
    }
    if v >= 1.0 {
        return u;
    }
    (-((-u.ln()).powf(theta) + (-v.ln()).powf(theta)).powf(1.0 / theta)).exp()
}

fn bilinear_eval(table: &GridFunction, u: f64, v: f64) -> f64 {
    let n = table.grid().n();
    let x = u.clamp(0.0, 1.0) * n as f64;
    let y = v.clamp(0.0, 1.0) * n as f64;
    let i = (x.floor() as usize).min(n - 1);
    let j = (y.floor() as usize).min(n - 1);
    let s = x - i as f64;
    let r = y - j as f64;
    (1.0 - s) * (1.0 - r) * table.value(i, j)
        + s * (1.0 - r) * table.value(i + 1, j)
        + (1.0 - s) * r * table.value(i, j + 1)
        + s * r * table.value(i + 1, j + 1)
}

impl CopulaSpec {
    pub fn product() -> Self {
        CopulaSpec::Product
    }

    pub fn frechet_upper() -> Self {
        CopulaSpec::FrechetUpper
    }

    pub fn frechet_lower() -> Self {
        CopulaSpec::FrechetLower
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::ParamOutOfRange {
                family: "archimedean_clayton".into(),
                param: "theta".into(),
                value: theta,
                range: "theta > 0".into(),
            });
        }
        Ok(CopulaSpec::Clayton { theta })
    }

    pub fn gumbel(theta: f64) -> Result<Self> {
        if !(theta >= 1.0 && theta.is_finite()) {
            return Err(Error::ParamOutOfRange {
                family: "archimedean_gumbel".into(),
                param: "theta".into(),
                value: theta,
                range: "theta >= 1".into(),
            });
        }
        Ok(CopulaSpec::Gumbel { theta })
    }

    pub fn power_product(coeff: f64, u_exp: f64, v_exp: f64) -> Result<Self> {
        for (name, x) in [("coeff", coeff), ("u_exp", u_exp), ("v_exp", v_exp)] {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::ParamOutOfRange {
                    family: "power_product".into(),
                    param: name.into(),
                    value: x,
                    range: "finite and >= 0".into(),
                });
            }
        }
        Ok(CopulaSpec::PowerProduct {
            coeff,
            u_exp,
            v_exp,
        })
    }

    pub fn tabulated(table: GridFunction) -> Self {
        CopulaSpec::Tabulated(Arc::new(table))
    }

    pub fn custom<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        CopulaSpec::Custom {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    /// Swap the arguments: the transpose C^T(u,v) = C(v,u).
    /// A double transpose renders identically to the original spec.
    pub fn transpose(&self) -> Self {
        CopulaSpec::Transpose(Box::new(self.clone()))
    }

    /// Pointwise evaluation at (u, v) in the unit square.
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match self {
            CopulaSpec::Product => u * v,
            CopulaSpec::FrechetUpper => u.min(v),
            CopulaSpec::FrechetLower => (u + v - 1.0).max(0.0),
            CopulaSpec::Clayton { theta } => clayton_eval(u, v, *theta),
            CopulaSpec::Gumbel { theta } => gumbel_eval(u, v, *theta),
            // grouping keeps equal-exponent instances bitwise symmetric
            CopulaSpec::PowerProduct {
                coeff,
                u_exp,
                v_exp,
            } => coeff * (u.powf(*u_exp) * v.powf(*v_exp)),
            CopulaSpec::Archimedean { generator } => {
                let s = generator.eval(u) + generator.eval(v);
                generator.generalized_inverse(s)
            }
            CopulaSpec::GeneralizedArchimedean { phi, psi } => {
                let s = phi.eval(u.max(v)) + psi.eval(u.min(v));
                phi.generalized_inverse(s)
            }
            CopulaSpec::Tabulated(table) => bilinear_eval(table, u, v),
            CopulaSpec::Transpose(inner) => inner.eval(v, u),
            // second + w*(first - second) keeps nodes where both operands
            // agree exact, so mixtures never drift past a shared envelope
            CopulaSpec::Mixture {
                weight,
                first,
                second,
            } => {
                let a = first.eval(u, v);
                let b = second.eval(u, v);
                b + weight * (a - b)
            }
            CopulaSpec::Custom { eval, .. } => eval(u, v),
        }
    }

    /// Sample onto a grid. Values must be finite and inside [0, 1] (with a
    /// 1e-12 rounding allowance); anything else is a construction error.
    pub fn render(&self, grid: Grid) -> Result<GridFunction> {
        let f = GridFunction::sample(grid, |u, v| self.eval(u, v))?;
        for j in 0..=grid.n() {
            for i in 0..=grid.n() {
                let value = f.value(i, j);
                if !(-1e-12..=1.0 + 1e-12).contains(&value) {
                    return Err(Error::ValueOutOfUnitRange {
                        u: grid.coord(i),
                        v: grid.coord(j),
                        value,
                    });
                }
            }
        }
        Ok(f)
    }

    /// True when evaluation is formula-backed all the way down (no table
    /// interpolation anywhere in the tree).
    pub fn is_formula_backed(&self) -> bool {
        match self {
            CopulaSpec::Tabulated(_) => false,
            CopulaSpec::Transpose(inner) => inner.is_formula_backed(),
            CopulaSpec::Mixture { first, second, .. } => {
                first.is_formula_backed() && second.is_formula_backed()
            }
            _ => true,
        }
    }

    /// Default axiom-check tolerance: 1e-9 for formula-backed specs, 2/n for
    /// anything interpolated (sup interpolation error of a Lipschitz-1
    /// function is O(1/n)).
    pub fn default_axiom_tol(&self, grid: Grid) -> f64 {
        if self.is_formula_backed() {
            1e-9
        } else {
            2.0 / grid.n() as f64
        }
    }

    /// JSON document with `kind`, `family`, `params`, optional `table`.
    /// Custom evaluators cannot be serialized.
    pub fn to_json_value(&self) -> Result<Value> {
        Ok(match self {
            CopulaSpec::Product => json!({"kind": "family", "family": "product", "params": {}}),
            CopulaSpec::FrechetUpper => {
                json!({"kind": "family", "family": "frechet_upper_M", "params": {}})
            }
            CopulaSpec::FrechetLower => {
                json!({"kind": "family", "family": "frechet_lower_W", "params": {}})
            }
            CopulaSpec::Clayton { theta } => {
                json!({"kind": "family", "family": "archimedean_clayton", "params": {"theta": theta}})
            }
            CopulaSpec::Gumbel { theta } => {
                json!({"kind": "family", "family": "archimedean_gumbel", "params": {"theta": theta}})
            }
            CopulaSpec::PowerProduct {
                coeff,
                u_exp,
                v_exp,
            } => json!({
                "kind": "family", "family": "power_product",
                "params": {"coeff": coeff, "u_exp": u_exp, "v_exp": v_exp}
            }),
            CopulaSpec::Archimedean { generator } => json!({
                "kind": "archimedean_generator",
                "generator": generator.to_json_value()?,
            }),
            CopulaSpec::GeneralizedArchimedean { phi, psi } => json!({
                "kind": "generalized_archimedean",
                "phi": phi.to_json_value()?,
                "psi": psi.to_json_value()?,
            }),
            CopulaSpec::Tabulated(table) => json!({
                "kind": "tabulated",
                "table": table.to_json_value(),
            }),
            CopulaSpec::Transpose(inner) => json!({
                "kind": "transpose",
                "inner": inner.to_json_value()?,
            }),
            CopulaSpec::Mixture {
                weight,
                first,
                second,
            } => json!({
                "kind": "mixture",
                "params": {"weight": weight},
                "first": first.to_json_value()?,
                "second": second.to_json_value()?,
            }),
            CopulaSpec::Custom { .. } => return Err(Error::NotSerializable),
        })
    }

    pub fn from_json_value(doc: &Value) -> Result<Self> {
        let kind = doc
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::SpecJson("missing 'kind'".into()))?;
        let param = |name: &str| -> Result<f64> {
            doc.get("params")
                .and_then(|p| p.get(name))
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::SpecJson(format!("missing numeric param '{name}'")))
        };
        match kind {
            "family" => {
                let family = doc
                    .get("family")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::SpecJson("missing 'family'".into()))?;
                match family {
                    "product" => Ok(CopulaSpec::Product),
                    "frechet_upper_M" => Ok(CopulaSpec::FrechetUpper),
                    "frechet_lower_W" => Ok(CopulaSpec::FrechetLower),
                    "archimedean_clayton" => CopulaSpec::clayton(param("theta")?),
                    "archimedean_gumbel" => CopulaSpec::gumbel(param("theta")?),
                    "power_product" => {
                        CopulaSpec::power_product(param("coeff")?, param("u_exp")?, param("v_exp")?)
                    }
                    other => Err(Error::SpecJson(format!("unknown family '{other}'"))),
                }
            }
            "archimedean_generator" => {
                let generator = GeneratorSpec::from_json_value(
                    doc.get("generator")
                        .ok_or_else(|| Error::SpecJson("missing 'generator'".into()))?,
                )?;
                Ok(CopulaSpec::Archimedean { generator })
            }
            "generalized_archimedean" => {
                let phi = GeneratorSpec::from_json_value(
                    doc.get("phi")
                        .ok_or_else(|| Error::SpecJson("missing 'phi'".into()))?,
                )?;
                let psi = GeneratorSpec::from_json_value(
                    doc.get("psi")
                        .ok_or_else(|| Error::SpecJson("missing 'psi'".into()))?,
                )?;
                Ok(CopulaSpec::GeneralizedArchimedean { phi, psi })
            }
            "tabulated" => {
                let table = doc
                    .get("table")
                    .ok_or_else(|| Error::SpecJson("missing 'table'".into()))?;
                let text = serde_json::to_string(table).expect("value reserialization");
                Ok(CopulaSpec::tabulated(GridFunction::from_json(&text)?))
            }
            "transpose" => {
                let inner = CopulaSpec::from_json_value(
                    doc.get("inner")
                        .ok_or_else(|| Error::SpecJson("missing 'inner'".into()))?,
                )?;
                Ok(CopulaSpec::Transpose(Box::new(inner)))
            }
            "mixture" => {
                let weight = param("weight")?;
                let first = CopulaSpec::from_json_value(
                    doc.get("first")
                        .ok_or_else(|| Error::SpecJson("missing 'first'".into()))?,
                )?;
                let second = CopulaSpec::from_json_value(
                    doc.get("second")
                        .ok_or_else(|| Error::SpecJson("missing 'second'".into()))?,
                )?;
                convex_combine(&first, &second, weight)
            }
            other => Err(Error::SpecJson(format!("unknown kind '{other}'"))),
        }
    }
}

/// Node-wise |C(u,v) - C(v,u)|: the pointwise asymmetry profile.
///
/// Always nonnegative and zero on the diagonal; for a genuine copula it also
/// vanishes on the boundary of the square.
pub fn bracket(spec: &impl Measurable, grid: Grid) -> Result<GridFunction> {
    let c = spec.measurable_part().render(grid)?;
    let stride = grid.nodes_per_axis();
    let mut values = vec![0.0; grid.node_count()];
    for j in 0..stride {
        for i in 0..stride {
            values[j * stride + i] = (c.value(i, j) - c.value(j, i)).abs();
        }
    }
    GridFunction::new(grid, values)
}

/// t * c1 + (1 - t) * c2 as a spec; rejects weights outside [0, 1].
pub fn convex_combine(c1: &CopulaSpec, c2: &CopulaSpec, t: f64) -> Result<CopulaSpec> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::BadWeight(t));
    }
    Ok(CopulaSpec::Mixture {
        weight: t,
        first: Box::new(c1.clone()),
        second: Box::new(c2.clone()),
    })
}

/// Anything that exposes an evaluator the asymmetry pipeline can measure.
///
/// Copulas are measured directly; subcopulas through their almost-everywhere
/// part (null parts live on measure-zero sets and never enter an integral).
pub trait Measurable {
    fn measurable_part(&self) -> &CopulaSpec;

    /// True when conclusions drawn from the measurable part hold only almost
    /// everywhere (a non-null annotation exists on a measure-zero set).
    fn ae_only(&self) -> bool;
}

impl Measurable for CopulaSpec {
    fn measurable_part(&self) -> &CopulaSpec {
        self
    }

    fn ae_only(&self) -> bool {
        false
    }
}

/// Which subsets of [0, 1] pin the margin conditions of a subcopula.
/// Both always contain 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginSet {
    /// The full interval: margins pinned everywhere (a genuine copula).
    Full,
    /// Only the endpoints {0, 1}.
    Endpoints,
}

impl fmt::Display for MarginSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarginSet::Full => write!(f, "[0,1]"),
            MarginSet::Endpoints => write!(f, "{{0,1}}"),
        }
    }
}

/// The product domain S1 x S2 of a subcopula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductDomain {
    pub s1: MarginSet,
    pub s2: MarginSet,
}

impl ProductDomain {
    pub fn endpoints() -> Self {
        ProductDomain {
            s1: MarginSet::Endpoints,
            s2: MarginSet::Endpoints,
        }
    }

    pub fn swapped(&self) -> Self {
        ProductDomain {
            s1: self.s2,
            s2: self.s1,
        }
    }
}

impl fmt::Display for ProductDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} x {}", self.s1, self.s2)
    }
}

/// Symbolic annotation of a measure-zero component of a subcopula.
///
/// The evaluator exists for diagnostics only; it is never sampled onto a
/// grid and never enters an integral or norm.
#[derive(Debug, Clone)]
pub struct NullPart {
    pub description: String,
    pub diagnostic_formula: Option<String>,
    eval: CopulaSpec,
}

impl NullPart {
    pub fn new(
        description: impl Into<String>,
        diagnostic_formula: Option<String>,
        eval: CopulaSpec,
    ) -> Self {
        NullPart {
            description: description.into(),
            diagnostic_formula,
            eval,
        }
    }

    /// Value of the null branch at a point of its (measure-zero) support.
    pub fn eval_at(&self, qn: f64, qm: f64) -> f64 {
        self.eval.eval(qn, qm)
    }

    /// |null(qn,qm) - null(qm,qn)|: the bracket of the null branch at one
    /// support point, for diagnostic output.
    pub fn bracket_diagnostic(&self, qn: f64, qm: f64) -> f64 {
        (self.eval_at(qn, qm) - self.eval_at(qm, qn)).abs()
    }

    fn transposed(&self) -> Self {
        NullPart {
            description: self.description.clone(),
            diagnostic_formula: self.diagnostic_formula.clone(),
            eval: self.eval.transpose(),
        }
    }
}

/// A subcopula: an almost-everywhere evaluator plus an optional symbolic
/// null part, with margins pinned only on `domain`.
#[derive(Debug, Clone)]
pub struct SubcopulaSpec {
    ae_part: CopulaSpec,
    null_part: Option<NullPart>,
    domain: ProductDomain,
}

impl SubcopulaSpec {
    /// Builds a subcopula and validates that the a.e. part is grounded and
    /// 2-increasing on a coarse grid (margins are intentionally unchecked).
    pub fn new(
        ae_part: CopulaSpec,
        null_part: Option<NullPart>,
        domain: ProductDomain,
    ) -> Result<Self> {
        let grid = Grid::new(16)?;
        let tol = ae_part.default_axiom_tol(grid);
        let report = axioms::verify_axioms(&ae_part, grid, tol)?;
        if !report.grounded.pass {
            return Err(Error::SpecJson(format!(
                "subcopula a.e. part is not grounded (worst violation {})",
                report.grounded.worst
            )));
        }
        if !report.two_increasing.pass {
            return Err(Error::SpecJson(format!(
                "subcopula a.e. part is not 2-increasing (worst violation {})",
                report.two_increasing.worst
            )));
        }
        Ok(SubcopulaSpec {
            ae_part,
            null_part,
            domain,
        })
    }

    pub fn ae_part(&self) -> &CopulaSpec {
        &self.ae_part
    }

    pub fn null_part(&self) -> Option<&NullPart> {
        self.null_part.as_ref()
    }

    pub fn domain(&self) -> ProductDomain {
        self.domain
    }

    /// Transpose of the whole object: a.e. part, null part and domain swap.
    pub fn transpose(&self) -> Self {
        SubcopulaSpec {
            ae_part: self.ae_part.transpose(),
            null_part: self.null_part.as_ref().map(NullPart::transposed),
            domain: self.domain.swapped(),
        }
    }
}

impl Measurable for SubcopulaSpec {
    fn measurable_part(&self) -> &CopulaSpec {
        &self.ae_part
    }

    fn ae_only(&self) -> bool {
        self.null_part.is_some()
    }
}

/// Either kind of spec, for pipelines that accept both.
#[derive(Debug, Clone)]
pub enum AnySpec {
    Copula(CopulaSpec),
    Subcopula(SubcopulaSpec),
}

impl Measurable for AnySpec {
    fn measurable_part(&self) -> &CopulaSpec {
        match self {
            AnySpec::Copula(c) => c,
            AnySpec::Subcopula(s) => s.measurable_part(),
        }
    }

    fn ae_only(&self) -> bool {
        match self {
            AnySpec::Copula(_) => false,
            AnySpec::Subcopula(s) => s.ae_only(),
        }
    }
}

impl From<CopulaSpec> for AnySpec {
    fn from(c: CopulaSpec) -> Self {
        AnySpec::Copula(c)
    }
}

impl From<SubcopulaSpec> for AnySpec {
    fn from(s: SubcopulaSpec) -> Self {
        AnySpec::Subcopula(s)
    }
}
