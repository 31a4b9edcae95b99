use std::path::Path;

use serde::Deserialize;

use crate::builtins::{CONNECTIONS, CONSTRUCTED_RULES, LOCAL_RULES};
use crate::bundle::PrincipalBundle;
use crate::functor::DirectionalDerivativeSpec;
use crate::geometry::ManifoldKind;
use crate::liegroup::GroupKind;

use super::ScenarioError;

pub const CHECKS: &[&str] = &[
    "exp_log",
    "connection_axioms",
    "discrete_axioms",
    "retraction_axioms",
    "equivariant_retraction",
    "invariant_metric",
    "diagram",
    "derive_roundtrip",
    "horizontal_roundtrip",
    "discrete_flatness",
    "derived_flatness",
    "area_identity",
    "distinctness",
    "uniqueness",
    "same_derived_curvature",
    "discrete_curvature_match",
    "curvature_descent",
];

pub const RETRACTIONS: &[&str] = &["straight_line", "exponential", "stereographic"];
pub const METRICS: &[&str] = &["standard", "euclidean", "round"];

fn default_samples() -> usize {
    50
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub sample_count: usize,
    pub bundle: BundleSpec,
    pub connection: ConnectionSpec,
    /// Diagonal-derivative settings; command-line flags take precedence.
    #[serde(default)]
    pub derivative: Option<DerivativeConfig>,
    #[serde(default)]
    pub discrete: Option<DiscreteSpec>,
    /// Second discrete form for comparison checks.
    #[serde(default)]
    pub alternate: Option<DiscreteSpec>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BundleSpec {
    Trivial { base: String, group: String },
    Hopf,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConnectionSpec {
    pub builtin: String,
    #[serde(default)]
    pub parameter: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DerivativeConfig {
    pub base_step: f64,
    pub richardson_levels: usize,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DiscreteSpec {
    pub builtin: String,
    #[serde(default)]
    pub parameter: Option<f64>,
    /// Total-space retraction for `integrated`.
    #[serde(default)]
    pub retraction: Option<String>,
    #[serde(default)]
    pub domain_radius: Option<f64>,
    /// Reference rule for `curvature_matched`.
    #[serde(default)]
    pub reference: Option<Box<DiscreteSpec>>,
    /// Connection to integrate, when it differs from the scenario's.
    #[serde(default)]
    pub connection: Option<ConnectionSpec>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub name: String,
    pub tolerance: f64,
    #[serde(default)]
    pub samples: Option<usize>,
    /// Target value for `area_identity`.
    #[serde(default)]
    pub expected: Option<f64>,
    /// Minimum separation for `distinctness`.
    #[serde(default)]
    pub threshold: Option<f64>,
    /// Bundle points as base coordinates followed by fiber coordinates.
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn bundle(&self) -> Result<PrincipalBundle, ScenarioError> {
        match &self.bundle {
            BundleSpec::Hopf => Ok(PrincipalBundle::Hopf),
            BundleSpec::Trivial { base, group } => {
                let b = ManifoldKind::from_tag(base).map_err(ScenarioError::invalid)?;
                let g = GroupKind::from_tag(group).map_err(ScenarioError::invalid)?;
                PrincipalBundle::trivial(b, g).map_err(ScenarioError::invalid)
            }
        }
    }

    pub fn derivative(&self) -> Result<DirectionalDerivativeSpec, ScenarioError> {
        match self.derivative {
            Some(d) => DirectionalDerivativeSpec::new(d.base_step, d.richardson_levels).map_err(ScenarioError::invalid),
            None => Ok(DirectionalDerivativeSpec::default()),
        }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        self.bundle()?;
        self.derivative()?;
        if !CONNECTIONS.contains(&self.connection.builtin.as_str()) {
            return Err(ScenarioError::UnknownBuiltin(self.connection.builtin.clone()));
        }
        for d in self.discrete.iter().chain(&self.alternate) {
            validate_discrete(d)?;
        }
        for c in &self.checks {
            if !CHECKS.contains(&c.name.as_str()) {
                return Err(ScenarioError::UnknownCheck(c.name.clone()));
            }
            if !(c.tolerance > 0.0) {
                return Err(ScenarioError::Parse(format!("check {} has non-positive tolerance", c.name)));
            }
        }
        Ok(())
    }
}

fn validate_discrete(d: &DiscreteSpec) -> Result<(), ScenarioError> {
    let name = d.builtin.as_str();
    if !LOCAL_RULES.contains(&name) && !CONSTRUCTED_RULES.contains(&name) {
        return Err(ScenarioError::UnknownBuiltin(d.builtin.clone()));
    }
    if let Some(r) = &d.retraction {
        if !RETRACTIONS.contains(&r.as_str()) {
            return Err(ScenarioError::UnknownBuiltin(r.clone()));
        }
    }
    if let Some(c) = &d.connection {
        if !CONNECTIONS.contains(&c.builtin.as_str()) {
            return Err(ScenarioError::UnknownBuiltin(c.builtin.clone()));
        }
    }
    if name == "curvature_matched" && d.reference.is_none() {
        return Err(ScenarioError::Parse("curvature_matched needs a reference rule".into()));
    }
    if let Some(r) = &d.reference {
        validate_discrete(r)?;
    }
    Ok(())
}
