//! Resolving command-line spec references into library objects.
//!
//! Two forms: `family[:param]` shorthand (the value binds to the family's
//! first declared parameter) and `@path.json` for serialized specs.

use std::fs;

use anyhow::{bail, Context, Result};
use asymcop::families::{self, ParamMap};
use asymcop::{AnySpec, CopulaSpec};

pub fn parse_spec_ref(text: &str) -> Result<AnySpec> {
    if let Some(path) = text.strip_prefix('@') {
        let doc = fs::read_to_string(path).with_context(|| format!("cannot read {path}"))?;
        let value: serde_json::Value =
            serde_json::from_str(&doc).with_context(|| format!("{path} is not valid JSON"))?;
        let spec = CopulaSpec::from_json_value(&value)?;
        return Ok(AnySpec::Copula(spec));
    }
    let (name, param_text) = match text.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (text, None),
    };
    let mut params = ParamMap::new();
    if let Some(raw) = param_text {
        let value: f64 = raw
            .parse()
            .with_context(|| format!("'{raw}' is not a number in spec reference '{text}'"))?;
        let info = families::lookup(name)?;
        let Some(primary) = info.params.first() else {
            bail!("family '{}' takes no parameter, got '{text}'", info.name);
        };
        params.insert(primary.name.to_string(), value);
    }
    Ok(families::build(name, &params)?)
}

/// Named parameter flags shared by the family-taking commands.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct FamilyArgs {
    /// Family name from the registry (see `families` in the README).
    #[arg(long)]
    pub family: Option<String>,

    /// Spec reference: `family[:param]` or `@file.json`.
    #[arg(long)]
    pub spec: Option<String>,

    /// Family parameter: Clayton/Gumbel dependence strength.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,

    /// Family parameter: Cobb-Douglas exponent.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,

    /// Family parameter: mixture weight.
    #[arg(long, allow_negative_numbers = true)]
    pub weight: Option<f64>,

    /// Family parameter: cogenerator scale of generalized_archimedean.
    #[arg(long, allow_negative_numbers = true)]
    pub psi_scale: Option<f64>,
}

impl FamilyArgs {
    pub fn param_map(&self) -> ParamMap {
        let mut params = ParamMap::new();
        for (name, value) in [
            ("theta", self.theta),
            ("alpha", self.alpha),
            ("weight", self.weight),
            ("psi_scale", self.psi_scale),
        ] {
            if let Some(v) = value {
                params.insert(name.to_string(), v);
            }
        }
        params
    }

    pub fn resolve(&self) -> Result<AnySpec> {
        match (&self.family, &self.spec) {
            (Some(name), None) => Ok(families::build(name, &self.param_map())?),
            (None, Some(reference)) => parse_spec_ref(reference),
            (Some(_), Some(_)) => bail!("pass either --family or --spec, not both"),
            (None, None) => bail!("a spec is required: --family <name> or --spec <ref>"),
        }
    }

    /// Short label for report output.
    pub fn label(&self) -> String {
        match (&self.family, &self.spec) {
            (Some(name), _) => name.clone(),
            (_, Some(reference)) => reference.clone(),
            _ => "<unspecified>".into(),
        }
    }
}
