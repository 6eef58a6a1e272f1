//! Built-in copula and subcopula families, generator validation, and the
//! name-addressable registry behind the CLI.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::copula::{AnySpec, CopulaSpec, NullPart, ProductDomain, SubcopulaSpec};
use crate::error::{Error, Result};

/// Archimedean generator: a decreasing convex function on (0, 1] with
/// phi(1) = 0. Cogenerators reuse the same representation.
#[derive(Clone)]
pub enum GeneratorSpec {
    /// phi(t) = (t^-theta - 1) / theta.
    Clayton { theta: f64 },
    /// phi(t) = (-ln t)^theta.
    Gumbel { theta: f64 },
    /// factor * base(t); the cogenerator psi = phi/2 is this with factor 0.5.
    Scaled {
        base: Box<GeneratorSpec>,
        factor: f64,
    },
    /// Arbitrary evaluator; not serializable.
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Clayton { theta } => write!(f, "ClaytonGenerator(theta={theta})"),
            GeneratorSpec::Gumbel { theta } => write!(f, "GumbelGenerator(theta={theta})"),
            GeneratorSpec::Scaled { base, factor } => write!(f, "{factor} * {base:?}"),
            GeneratorSpec::Custom { name, .. } => write!(f, "CustomGenerator({name})"),
        }
    }
}

impl GeneratorSpec {
    pub fn clayton(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::ParamOutOfRange {
                family: "clayton generator".into(),
                param: "theta".into(),
                value: theta,
                range: "theta > 0".into(),
            });
        }
        Ok(GeneratorSpec::Clayton { theta })
    }

    pub fn gumbel(theta: f64) -> Result<Self> {
        if !(theta >= 1.0 && theta.is_finite()) {
            return Err(Error::ParamOutOfRange {
                family: "gumbel generator".into(),
                param: "theta".into(),
                value: theta,
                range: "theta >= 1".into(),
            });
        }
        Ok(GeneratorSpec::Gumbel { theta })
    }

    pub fn scaled(base: GeneratorSpec, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::ParamOutOfRange {
                family: "scaled generator".into(),
                param: "factor".into(),
                value: factor,
                range: "factor > 0".into(),
            });
        }
        Ok(GeneratorSpec::Scaled {
            base: Box::new(base),
            factor,
        })
    }

    pub fn custom<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        GeneratorSpec::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            GeneratorSpec::Clayton { theta } => {
                if t <= 0.0 {
                    f64::INFINITY
                } else {
                    (t.powf(-theta) - 1.0) / theta
                }
            }
            GeneratorSpec::Gumbel { theta } => {
                if t <= 0.0 {
                    f64::INFINITY
                } else {
                    (-t.ln()).powf(*theta)
                }
            }
            GeneratorSpec::Scaled { base, factor } => factor * base.eval(t),
            GeneratorSpec::Custom { f, .. } => f(t),
        }
    }

    /// Generalized inverse `phi^[-1](s) = inf{t in [0,1] : phi(t) <= s}`,
    /// realized by bisection to 1e-13 (at most 200 halvings).
    pub fn generalized_inverse(&self, s: f64) -> f64 {
        if s.is_infinite() && s > 0.0 {
            return 0.0;
        }
        if s <= 0.0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            if hi - lo <= 1e-13 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) <= s {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    pub fn to_json_value(&self) -> Result<Value> {
        Ok(match self {
            GeneratorSpec::Clayton { theta } => json!({"family": "clayton", "theta": theta}),
            GeneratorSpec::Gumbel { theta } => json!({"family": "gumbel", "theta": theta}),
            GeneratorSpec::Scaled { base, factor } => json!({
                "family": "scaled",
                "factor": factor,
                "base": base.to_json_value()?,
            }),
            GeneratorSpec::Custom { .. } => return Err(Error::NotSerializable),
        })
    }

    pub fn from_json_value(doc: &Value) -> Result<Self> {
        let family = doc
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::SpecJson("generator missing 'family'".into()))?;
        let num = |name: &str| -> Result<f64> {
            doc.get(name)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::SpecJson(format!("generator missing '{name}'")))
        };
        match family {
            "clayton" => GeneratorSpec::clayton(num("theta")?),
            "gumbel" => GeneratorSpec::gumbel(num("theta")?),
            "scaled" => {
                let base =
                    GeneratorSpec::from_json_value(doc.get("base").ok_or_else(|| {
                        Error::SpecJson("scaled generator missing 'base'".into())
                    })?)?;
                GeneratorSpec::scaled(base, num("factor")?)
            }
            other => Err(Error::SpecJson(format!("unknown generator '{other}'"))),
        }
    }
}

/// Points used for the numeric generator spot checks: i/64 for i = 1..=64.
fn probe_points() -> impl Iterator<Item = f64> {
    (1..=64).map(|i| i as f64 / 64.0)
}

/// Archimedean copula phi^[-1](phi(u) + phi(v)) from a validated generator.
///
/// The generator is spot-checked on 64 points: nonincreasing values, second
/// differences >= -1e-9 (convexity), and |phi(1)| <= 1e-12.
pub fn make_archimedean(generator: GeneratorSpec) -> Result<CopulaSpec> {
    let values: Vec<f64> = probe_points().map(|t| generator.eval(t)).collect();
    if values.iter().any(|x| x.is_nan()) {
        return Err(Error::BadGenerator("NaN on (0, 1]".into()));
    }
    let at_one = *values.last().expect("probe sample is nonempty");
    if at_one.abs() > 1e-12 {
        return Err(Error::BadGenerator(format!(
            "phi(1) = {at_one}, expected 0 (within 1e-12)"
        )));
    }
    for w in values.windows(2) {
        if w[1] > w[0] + 1e-9 {
            return Err(Error::BadGenerator(format!(
                "not decreasing: {} -> {}",
                w[0], w[1]
            )));
        }
    }
    for w in values.windows(3) {
        if w[0].is_finite() && w[2] - 2.0 * w[1] + w[0] < -1e-9 {
            return Err(Error::BadGenerator(format!(
                "not convex near values ({}, {}, {})",
                w[0], w[1], w[2]
            )));
        }
    }
    Ok(CopulaSpec::Archimedean { generator })
}

/// Generator/cogenerator copula phi^[-1](phi(max(u,v)) + psi(min(u,v))).
/// Symmetric by construction: it depends only on max and min.
///
/// Spot checks on 64 points: phi strictly decreasing, psi nonincreasing and
/// nonnegative, psi - phi nondecreasing, |phi(1)| <= 1e-12.
pub fn make_generalized_archimedean(phi: GeneratorSpec, psi: GeneratorSpec) -> Result<CopulaSpec> {
    let phis: Vec<f64> = probe_points().map(|t| phi.eval(t)).collect();
    let psis: Vec<f64> = probe_points().map(|t| psi.eval(t)).collect();
    if phis.iter().chain(&psis).any(|x| x.is_nan()) {
        return Err(Error::BadGenerator("NaN on (0, 1]".into()));
    }
    let at_one = *phis.last().expect("probe sample is nonempty");
    if at_one.abs() > 1e-12 {
        return Err(Error::BadGenerator(format!(
            "phi(1) = {at_one}, expected 0 (within 1e-12)"
        )));
    }
    if psis[psis.len() - 1] < -1e-12 {
        return Err(Error::BadGenerator("psi(1) < 0".into()));
    }
    for w in phis.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::BadGenerator(format!(
                "phi not strictly decreasing: {} -> {}",
                w[0], w[1]
            )));
        }
    }
    for w in psis.windows(2) {
        if w[1] > w[0] + 1e-9 {
            return Err(Error::BadGenerator(format!(
                "psi not decreasing: {} -> {}",
                w[0], w[1]
            )));
        }
    }
    for k in 0..phis.len() - 1 {
        if phis[k].is_infinite() || phis[k + 1].is_infinite() {
            continue;
        }
        let d0 = psis[k] - phis[k];
        let d1 = psis[k + 1] - phis[k + 1];
        if d1 < d0 - 1e-9 {
            return Err(Error::BadGenerator(format!(
                "psi - phi not increasing: {d0} -> {d1}"
            )));
        }
    }
    Ok(CopulaSpec::GeneralizedArchimedean { phi, psi })
}

fn check_alpha(family: &str, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::ParamOutOfRange {
            family: family.into(),
            param: "alpha".into(),
            value: alpha,
            range: "0 < alpha < 1".into(),
        });
    }
    Ok(())
}

/// Cobb-Douglas subcopula with a.e. part (2/3) u^alpha v.
///
/// The rational-grid branch (1/3) q_n q_m is carried symbolically and never
/// sampled; on any dyadic grid the a.e. branch covers every node that
/// matters for an integral.
pub fn make_cobb_douglas_c(alpha: f64) -> Result<SubcopulaSpec> {
    check_alpha("cobb_douglas_C", alpha)?;
    let ae = CopulaSpec::power_product(2.0 / 3.0, alpha, 1.0)?;
    let null = NullPart::new(
        "(1/3)*q_n*q_m on rational pairs",
        None,
        CopulaSpec::power_product(1.0 / 3.0, 1.0, 1.0)?,
    );
    SubcopulaSpec::new(ae, Some(null), ProductDomain::endpoints())
}

/// Cobb-Douglas companion with symmetric a.e. part (2/3) u v; all of its
/// asymmetry hides in the rational-grid branch (1/3) q_n^alpha q_m.
pub fn make_cobb_douglas_d(alpha: f64) -> Result<SubcopulaSpec> {
    check_alpha("cobb_douglas_D", alpha)?;
    let ae = CopulaSpec::power_product(2.0 / 3.0, 1.0, 1.0)?;
    let null = NullPart::new(
        "(1/3)*q_n^alpha*q_m on rational pairs",
        Some("|(1/3)*q_n^alpha*q_m - (1/3)*q_n*q_m^alpha|".into()),
        CopulaSpec::power_product(1.0 / 3.0, alpha, 1.0)?,
    );
    SubcopulaSpec::new(ae, Some(null), ProductDomain::endpoints())
}

/// w * cobb_douglas_C(alpha).ae + (1 - w) * product: the one-parameter
/// family swept in the symmetry searches.
pub fn make_mixture(weight: f64, alpha: f64) -> Result<CopulaSpec> {
    check_alpha("mixture", alpha)?;
    let cd = CopulaSpec::power_product(2.0 / 3.0, alpha, 1.0)?;
    crate::copula::convex_combine(&cd, &CopulaSpec::Product, weight)
}

/// Inclusive/exclusive bounds of a scalar family parameter.
#[derive(Debug, Clone, Copy)]
pub struct ParamRange {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl ParamRange {
    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        let above = if self.lo_open {
            x > self.lo
        } else {
            x >= self.lo
        };
        let below = if self.hi_open {
            x < self.hi
        } else {
            x <= self.hi
        };
        above && below
    }

    pub fn text(&self, param: &str) -> String {
        let lo_rel = if self.lo_open { "<" } else { "<=" };
        let hi_rel = if self.hi_open { "<" } else { "<=" };
        if self.hi.is_infinite() {
            let rel = if self.lo_open { ">" } else { ">=" };
            format!("{param} {rel} {}", self.lo)
        } else {
            format!("{} {lo_rel} {param} {hi_rel} {}", self.lo, self.hi)
        }
    }
}

/// One named parameter of a registry family.
#[derive(Debug, Clone, Copy)]
pub struct ParamInfo {
    pub name: &'static str,
    pub range: ParamRange,
    pub default: Option<f64>,
}

/// A registry entry: family name, aliases, and parameter schema.
#[derive(Debug, Clone, Copy)]
pub struct FamilyInfo {
    pub name: &'static str,
    pub aliases: &'static [&'static str],
    pub params: &'static [ParamInfo],
    pub summary: &'static str,
}

const OPEN_POSITIVE: ParamRange = ParamRange {
    lo: 0.0,
    hi: f64::INFINITY,
    lo_open: true,
    hi_open: true,
};
const GUMBEL_RANGE: ParamRange = ParamRange {
    lo: 1.0,
    hi: f64::INFINITY,
    lo_open: false,
    hi_open: true,
};
const OPEN_UNIT: ParamRange = ParamRange {
    lo: 0.0,
    hi: 1.0,
    lo_open: true,
    hi_open: true,
};
const CLOSED_UNIT: ParamRange = ParamRange {
    lo: 0.0,
    hi: 1.0,
    lo_open: false,
    hi_open: false,
};
const HALF_OPEN_UNIT: ParamRange = ParamRange {
    lo: 0.0,
    hi: 1.0,
    lo_open: true,
    hi_open: false,
};

/// All built-in families, addressable by name or alias.
pub const FAMILIES: &[FamilyInfo] = &[
    FamilyInfo {
        name: "product",
        aliases: &["pi", "independence"],
        params: &[],
        summary: "independence copula u*v",
    },
    FamilyInfo {
        name: "frechet_upper_M",
        aliases: &["m", "frechet_upper"],
        params: &[],
        summary: "upper Frechet-Hoeffding bound min(u,v)",
    },
    FamilyInfo {
        name: "frechet_lower_W",
        aliases: &["w", "frechet_lower"],
        params: &[],
        summary: "lower Frechet-Hoeffding bound max(u+v-1,0)",
    },
    FamilyInfo {
        name: "archimedean_clayton",
        aliases: &["clayton"],
        params: &[ParamInfo {
            name: "theta",
            range: OPEN_POSITIVE,
            default: None,
        }],
        summary: "Clayton copula (u^-t + v^-t - 1)^(-1/t)",
    },
    FamilyInfo {
        name: "archimedean_gumbel",
        aliases: &["gumbel"],
        params: &[ParamInfo {
            name: "theta",
            range: GUMBEL_RANGE,
            default: None,
        }],
        summary: "Gumbel copula exp(-((-ln u)^t + (-ln v)^t)^(1/t))",
    },
    FamilyInfo {
        name: "generalized_archimedean",
        aliases: &["generalized"],
        params: &[
            ParamInfo {
                name: "theta",
                range: OPEN_POSITIVE,
                default: Some(1.0),
            },
            ParamInfo {
                name: "psi_scale",
                range: HALF_OPEN_UNIT,
                default: Some(1.0),
            },
        ],
        summary: "phi^[-1](phi(max) + psi(min)) with Clayton phi, psi = psi_scale * phi",
    },
    FamilyInfo {
        name: "cobb_douglas_C",
        aliases: &["cobb_douglas_c"],
        params: &[ParamInfo {
            name: "alpha",
            range: OPEN_UNIT,
            default: Some(0.5),
        }],
        summary: "Cobb-Douglas subcopula, a.e. part (2/3) u^alpha v",
    },
    FamilyInfo {
        name: "cobb_douglas_D",
        aliases: &["cobb_douglas_d"],
        params: &[ParamInfo {
            name: "alpha",
            range: OPEN_UNIT,
            default: Some(0.5),
        }],
        summary: "Cobb-Douglas companion, symmetric a.e. part (2/3) u v",
    },
    FamilyInfo {
        name: "mixture",
        aliases: &[],
        params: &[
            ParamInfo {
                name: "weight",
                range: CLOSED_UNIT,
                default: None,
            },
            ParamInfo {
                name: "alpha",
                range: OPEN_UNIT,
                default: Some(0.5),
            },
        ],
        summary: "weight * cobb_douglas_C(alpha).ae + (1-weight) * product",
    },
];

pub fn known_family_names() -> String {
    FAMILIES
        .iter()
        .map(|f| f.name)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Find a family by name or alias (case-insensitive).
pub fn lookup(name: &str) -> Result<&'static FamilyInfo> {
    let lowered = name.to_ascii_lowercase();
    FAMILIES
        .iter()
        .find(|f| {
            f.name.to_ascii_lowercase() == lowered
                || f.aliases.iter().any(|a| a.to_ascii_lowercase() == lowered)
        })
        .ok_or_else(|| Error::UnknownFamily {
            name: name.into(),
            known: known_family_names(),
        })
}

/// Named parameter values passed to [`build`].
pub type ParamMap = BTreeMap<String, f64>;

fn resolve_params(info: &FamilyInfo, given: &ParamMap) -> Result<Vec<f64>> {
    for key in given.keys() {
        if !info.params.iter().any(|p| p.name == key) {
            return Err(Error::UnknownParam {
                family: info.name.into(),
                param: key.clone(),
            });
        }
    }
    info.params
        .iter()
        .map(|p| {
            let value = match given.get(p.name) {
                Some(&v) => v,
                None => p.default.ok_or_else(|| Error::MissingParam {
                    family: info.name.into(),
                    param: p.name.into(),
                })?,
            };
            if !p.range.contains(value) {
                return Err(Error::ParamOutOfRange {
                    family: info.name.into(),
                    param: p.name.into(),
                    value,
                    range: p.range.text(p.name),
                });
            }
            Ok(value)
        })
        .collect()
}

/// Build a spec from a family name and named parameters. Unknown names and
/// out-of-range values produce errors that spell out the valid range.
pub fn build(name: &str, params: &ParamMap) -> Result<AnySpec> {
    let info = lookup(name)?;
    let values = resolve_params(info, params)?;
    Ok(match info.name {
        "product" => AnySpec::Copula(CopulaSpec::Product),
        "frechet_upper_M" => AnySpec::Copula(CopulaSpec::FrechetUpper),
        "frechet_lower_W" => AnySpec::Copula(CopulaSpec::FrechetLower),
        "archimedean_clayton" => AnySpec::Copula(CopulaSpec::clayton(values[0])?),
        "archimedean_gumbel" => AnySpec::Copula(CopulaSpec::gumbel(values[0])?),
        "generalized_archimedean" => {
            let phi = GeneratorSpec::clayton(values[0])?;
            let psi = if values[1] == 1.0 {
                phi.clone()
            } else {
                GeneratorSpec::scaled(phi.clone(), values[1])?
            };
            AnySpec::Copula(make_generalized_archimedean(phi, psi)?)
        }
        "cobb_douglas_C" => AnySpec::Subcopula(make_cobb_douglas_c(values[0])?),
        "cobb_douglas_D" => AnySpec::Subcopula(make_cobb_douglas_d(values[0])?),
        "mixture" => AnySpec::Copula(make_mixture(values[0], values[1])?),
        other => unreachable!("family {other} listed but not constructible"),
    })
}

/// A one-parameter family for sweeps: builder plus the sweep parameter's
/// valid range.
#[derive(Clone)]
pub struct ParamFamily {
    pub family: String,
    pub param: &'static str,
    pub range: ParamRange,
    build: Arc<dyn Fn(f64) -> Result<AnySpec> + Send + Sync>,
}

impl ParamFamily {
    pub fn new<F>(
        family: impl Into<String>,
        param: &'static str,
        range: ParamRange,
        build: F,
    ) -> Self
    where
        F: Fn(f64) -> Result<AnySpec> + Send + Sync + 'static,
    {
        ParamFamily {
            family: family.into(),
            param,
            range,
            build: Arc::new(build),
        }
    }

    pub fn build(&self, value: f64) -> Result<AnySpec> {
        (self.build)(value)
    }
}

impl fmt::Debug for ParamFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ParamFamily({} over {})", self.family, self.param)
    }
}

/// Sweepable view of a registry family: the first declared parameter varies,
/// the rest stay fixed at `fixed` (or their defaults).
pub fn param_family(name: &str, fixed: &ParamMap) -> Result<ParamFamily> {
    let info = lookup(name)?;
    let Some(primary) = info.params.first() else {
        return Err(Error::NoSweepParameter(info.name.into()));
    };
    for key in fixed.keys() {
        if key == primary.name {
            return Err(Error::UnknownParam {
                family: info.name.into(),
                param: format!("{key} (it is the sweep parameter)"),
            });
        }
    }
    let family_name = info.name.to_string();
    let fixed = fixed.clone();
    let sweep_param = primary.name;
    Ok(ParamFamily::new(
        info.name,
        primary.name,
        primary.range,
        move |value| {
            let mut params = fixed.clone();
            params.insert(sweep_param.to_string(), value);
            build(&family_name, &params)
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::{bracket, Measurable};
    use crate::grid::{Grid, PExponent};

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn clayton_generator_matches_closed_form() {
        // generic generator route vs closed form at several points
        let generic = make_archimedean(GeneratorSpec::clayton(1.0).unwrap()).unwrap();
        let closed = CopulaSpec::clayton(1.0).unwrap();
        assert!((generic.eval(0.5, 0.5) - 1.0 / 3.0).abs() < 1e-12);
        for (u, v) in [(0.25, 0.75), (0.1, 0.9), (0.5, 0.125), (0.875, 0.875)] {
            assert!(
                (generic.eval(u, v) - closed.eval(u, v)).abs() < 1e-12,
                "mismatch at ({u}, {v})"
            );
        }
        // theta -> 0 approaches the product copula
        let near_product = make_archimedean(GeneratorSpec::clayton(1e-3).unwrap()).unwrap();
        assert!((near_product.eval(0.5, 0.5) - 0.25).abs() < 1e-3);
    }

    #[test]
    fn gumbel_generator_matches_closed_form() {
        let generic = make_archimedean(GeneratorSpec::gumbel(2.0).unwrap()).unwrap();
        let closed = CopulaSpec::gumbel(2.0).unwrap();
        for (u, v) in [(0.25, 0.75), (0.1, 0.9), (0.5, 0.5)] {
            assert!(
                (generic.eval(u, v) - closed.eval(u, v)).abs() < 1e-12,
                "mismatch at ({u}, {v})"
            );
        }
    }

    #[test]
    fn generator_route_passes_axiom_verification() {
        let g = grid(64);
        for generator in [
            GeneratorSpec::clayton(1.0).unwrap(),
            GeneratorSpec::gumbel(2.0).unwrap(),
        ] {
            let spec = make_archimedean(generator).unwrap();
            let report = crate::copula::axioms::verify_axioms(&spec, g, 1e-9).unwrap();
            assert!(report.all_pass(), "{spec:?}: {report:?}");
        }
    }

    #[test]
    fn archimedean_instances_are_symmetric() {
        let g = grid(64);
        let specs = [
            make_archimedean(GeneratorSpec::clayton(1.0).unwrap()).unwrap(),
            make_archimedean(GeneratorSpec::gumbel(2.0).unwrap()).unwrap(),
            make_generalized_archimedean(
                GeneratorSpec::clayton(1.0).unwrap(),
                GeneratorSpec::scaled(GeneratorSpec::clayton(1.0).unwrap(), 0.5).unwrap(),
            )
            .unwrap(),
        ];
        for spec in specs {
            let b = bracket(&spec, g).unwrap();
            assert!(b.sup_norm() < 1e-12, "{spec:?} not symmetric");
        }
    }

    #[test]
    fn generator_validation_rejects_bad_inputs() {
        // phi(1) != 0
        let err = make_archimedean(GeneratorSpec::custom("off", |t| 1.0 / t)).unwrap_err();
        assert!(matches!(err, Error::BadGenerator(_)));
        // increasing
        let err = make_archimedean(GeneratorSpec::custom("rising", |t| t - 1.0)).unwrap_err();
        assert!(matches!(err, Error::BadGenerator(_)));
        // concave: phi(t) = 1 - t^2 is decreasing in reverse... use sqrt shape
        let err =
            make_archimedean(GeneratorSpec::custom("concave", |t| (1.0 - t).sqrt())).unwrap_err();
        assert!(matches!(err, Error::BadGenerator(_)));
    }

    #[test]
    fn generalized_reduces_to_clayton_when_psi_is_phi() {
        let phi = GeneratorSpec::clayton(1.0).unwrap();
        let c = make_generalized_archimedean(phi.clone(), phi).unwrap();
        assert!((c.eval(0.5, 0.5) - 1.0 / 3.0).abs() < 1e-12);
        let closed = CopulaSpec::clayton(1.0).unwrap();
        for (u, v) in [(0.25, 0.75), (0.7, 0.3)] {
            assert!((c.eval(u, v) - closed.eval(u, v)).abs() < 1e-12);
        }
    }

    #[test]
    fn generalized_half_cogenerator_value() {
        // phi Clayton theta=1, psi = phi/2:
        // C(0.25, 0.75) = 1 / (1 + phi(0.75) + phi(0.25)/2) = 6/17
        let phi = GeneratorSpec::clayton(1.0).unwrap();
        let psi = GeneratorSpec::scaled(phi.clone(), 0.5).unwrap();
        let c = make_generalized_archimedean(phi, psi).unwrap();
        let want: f64 = 1.0 / (1.0 + (1.0 / 0.75 - 1.0) + (1.0 / 0.25 - 1.0) / 2.0);
        assert!((want - 6.0 / 17.0).abs() < 1e-15);
        assert!((c.eval(0.25, 0.75) - want).abs() < 1e-12);
        assert!((c.eval(0.25, 0.75) - 0.35294117647058826).abs() < 1e-10);
    }

    #[test]
    fn generalized_rejects_decreasing_violations() {
        let phi = GeneratorSpec::clayton(1.0).unwrap();
        let rising = GeneratorSpec::custom("rising", |t| t);
        assert!(make_generalized_archimedean(phi.clone(), rising).is_err());
        // psi - phi must increase: psi = 2*phi fails (psi - phi = phi decreases)
        let psi = GeneratorSpec::scaled(phi.clone(), 2.0).unwrap();
        assert!(make_generalized_archimedean(phi, psi).is_err());
    }

    #[test]
    fn cobb_douglas_values() {
        let c = make_cobb_douglas_c(0.5).unwrap();
        // a.e. part at (0.25, 0.75): (2/3) * 0.5 * 0.75 = 0.25
        assert!((c.measurable_part().eval(0.25, 0.75) - 0.25).abs() < 1e-15);
        let b = bracket(&c, grid(16)).unwrap();
        for i in 0..=16 {
            assert_eq!(b.value(i, i), 0.0);
        }
        assert!(make_cobb_douglas_c(0.0).is_err());
        assert!(make_cobb_douglas_c(1.0).is_err());

        let d = make_cobb_douglas_d(0.5).unwrap();
        let bd = bracket(&d, grid(64)).unwrap();
        assert_eq!(bd.norm_lp(PExponent::ONE), 0.0);
        // null-branch diagnostic at (1/2, 1/3)
        let diag = d.null_part().unwrap().bracket_diagnostic(0.5, 1.0 / 3.0);
        let want =
            ((0.5f64.sqrt() / 3.0) * (1.0 / 3.0) - (0.5 / 3.0) * (1.0f64 / 3.0).sqrt()).abs();
        assert!((diag - want).abs() < 1e-15);
        assert!((diag - 0.01765762473309901).abs() < 1e-10);
        assert!(d.null_part().unwrap().diagnostic_formula.is_some());
    }

    #[test]
    fn bounds_achieve_the_envelope_with_equality_patterns() {
        let g = grid(64);
        let upper = CopulaSpec::FrechetUpper.render(g).unwrap();
        let lower = CopulaSpec::FrechetLower.render(g).unwrap();
        let product = CopulaSpec::Product.render(g).unwrap();
        for j in 0..=64 {
            let v = g.coord(j);
            for i in 0..=64 {
                let u = g.coord(i);
                let (m, w) = (u.min(v), (u + v - 1.0).max(0.0));
                // M sits on the upper envelope everywhere, W on the lower
                assert_eq!(upper.value(i, j), m);
                assert_eq!(lower.value(i, j), w);
                let p = product.value(i, j);
                assert!(w <= p && p <= m);
            }
        }
    }

    #[test]
    fn registry_default_generalized_instance_is_a_copula() {
        // psi_scale defaults to 1 (psi = phi), which keeps the margins intact
        let mut params = ParamMap::new();
        params.insert("theta".into(), 1.0);
        let spec = build("generalized_archimedean", &params).unwrap();
        for n in [16usize, 64] {
            let report =
                crate::copula::axioms::verify_axioms(spec.measurable_part(), grid(n), 1e-9)
                    .unwrap();
            assert!(report.all_pass(), "n={n}: {report:?}");
        }
    }

    #[test]
    fn clayton_is_increasing_in_theta_at_center() {
        let mut prev = 0.0;
        for theta in [0.5, 1.0, 2.0, 4.0] {
            let c = CopulaSpec::clayton(theta).unwrap();
            let value = c.eval(0.5, 0.5);
            assert!(value > prev, "theta={theta}: {value} <= {prev}");
            prev = value;
        }
    }

    #[test]
    fn registry_builds_by_name_and_alias() {
        let mut params = ParamMap::new();
        assert!(matches!(
            build("product", &params).unwrap(),
            AnySpec::Copula(CopulaSpec::Product)
        ));
        params.insert("theta".into(), 1.0);
        assert!(build("clayton", &params).is_ok());
        assert!(build("archimedean_clayton", &params).is_ok());
        assert!(build("CLAYTON", &params).is_ok());

        let err = build("nope", &params).unwrap_err();
        assert!(matches!(err, Error::UnknownFamily { .. }));
    }

    #[test]
    fn registry_rejects_out_of_range_with_range_message() {
        let mut params = ParamMap::new();
        params.insert("theta".into(), -1.0);
        let err = build("clayton", &params).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("theta > 0"), "message was: {msg}");

        params.clear();
        params.insert("alpha".into(), 1.5);
        let err = build("cobb_douglas_C", &params).unwrap_err();
        assert!(err.to_string().contains("0 < alpha < 1"));

        params.clear();
        params.insert("bogus".into(), 1.0);
        assert!(matches!(
            build("product", &params),
            Err(Error::UnknownParam { .. })
        ));

        params.clear();
        assert!(matches!(
            build("clayton", &params),
            Err(Error::MissingParam { .. })
        ));
    }

    #[test]
    fn param_family_sweeps_first_parameter() {
        let fam = param_family("cobb_douglas_C", &ParamMap::new()).unwrap();
        assert_eq!(fam.param, "alpha");
        assert!(fam.build(0.5).is_ok());
        assert!(fam.build(1.5).is_err());
        assert!(param_family("product", &ParamMap::new()).is_err());
    }
}
