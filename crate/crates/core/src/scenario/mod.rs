//! JSON scenario files: a bundle, a connection, optional discrete forms and a
//! list of named checks, run with a fixed seed into a [`Report`].

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

pub use config::{BundleSpec, CheckSpec, ConnectionSpec, DerivativeConfig, DiscreteSpec, Scenario, CHECKS, METRICS, RETRACTIONS};
pub use report::{CheckOutcome, Format, Report};

use crate::abelian::{
    check_agreement, check_same_derived_curvature, curvature_matched_integrate, descend_discrete_difference,
    discrete_curvature_defect, flat_integrate_local, sample_triple, BaseOneForm, CurvatureMatchOptions,
};
use crate::builtins;
use crate::bundle::{BundlePoint, PrincipalBundle};
use crate::connection::ConnectionForm;
use crate::discrete::{DiscreteConnectionForm, DISCRETE_AXIOM_TOLERANCE};
use crate::error::Error;
use crate::functor::{check_diagram, derive_connection, derive_horizontal, DirectionalDerivativeSpec};
use crate::geometry::{ManifoldKind, ManifoldPoint, MetricDescriptor, Retraction, RetractionRule, UNBOUNDED_RADIUS};
use crate::integrator::{
    build_invariant_metric, certify_equivariance, integrate_connection, integrate_connection_on, EquivariantRetraction,
    ReducedRetraction, TotalRetraction,
};
use crate::liegroup::GroupElement;
use crate::quadrature::QuadratureSpec;
use crate::sampling::Sampler;
use crate::verify::worst;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown builtin: {0}")]
    UnknownBuiltin(String),
    #[error("unknown check: {0}")]
    UnknownCheck(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

impl ScenarioError {
    pub(crate) fn invalid(e: Error) -> Self {
        ScenarioError::Invalid(e.to_string())
    }
}

/// Command-line overrides applied on top of a scenario file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    /// Overrides the scenario's derivative settings when set.
    pub derivative: Option<DirectionalDerivativeSpec>,
    pub quadrature: QuadratureSpec,
    pub base_point: Option<Vec<f64>>,
    pub metric: Option<String>,
    pub retraction: Option<String>,
    pub domain_radius: Option<f64>,
    pub timings: bool,
}

pub fn run_scenario(path: &Path, options: &RunOptions) -> Result<Report, ScenarioError> {
    let scenario = Scenario::load(path)?;
    run(&scenario, options)
}

/// Runs every `*.json` file in `dir`, in file-name order.
pub type ScenarioResults = Vec<(PathBuf, Result<Report, ScenarioError>)>;

pub fn verify_all(dir: &Path, options: &RunOptions) -> Result<ScenarioResults, ScenarioError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| ScenarioError::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    Ok(paths.into_iter().map(|p| {
        let r = run_scenario(&p, options);
        (p, r)
    }).collect())
}

pub fn run(scenario: &Scenario, options: &RunOptions) -> Result<Report, ScenarioError> {
    if let Some(m) = &options.metric {
        if !METRICS.contains(&m.as_str()) {
            return Err(ScenarioError::UnknownBuiltin(m.clone()));
        }
    }
    if let Some(r) = &options.retraction {
        if !RETRACTIONS.contains(&r.as_str()) {
            return Err(ScenarioError::UnknownBuiltin(r.clone()));
        }
    }
    let ctx = Context::new(scenario, options)?;
    let mut checks = Vec::new();
    for spec in &scenario.checks {
        let start = Instant::now();
        let n = spec.samples.unwrap_or(scenario.sample_count).max(1);
        let mut outcomes = ctx
            .check(spec, n)
            .unwrap_or_else(|e| vec![CheckOutcome::failed(&spec.name, spec.tolerance, n, e.to_string())]);
        if options.timings {
            let ms = start.elapsed().as_millis() as u64;
            for o in &mut outcomes {
                o.wall_time_ms = Some(ms);
            }
        }
        checks.extend(outcomes);
    }
    Ok(Report {
        scenario: scenario.name.clone(),
        checks,
    })
}

struct Context<'a> {
    scenario: &'a Scenario,
    options: &'a RunOptions,
    bundle: PrincipalBundle,
    connection: ConnectionForm,
    derivative: DirectionalDerivativeSpec,
}

fn connection_for(spec: &ConnectionSpec, bundle: &PrincipalBundle) -> Result<ConnectionForm, Error> {
    match (bundle, spec.builtin.as_str()) {
        (PrincipalBundle::Hopf, "hopf_canonical") => Ok(ConnectionForm::hopf_canonical()),
        (PrincipalBundle::Hopf, "hopf_perturbed") => Ok(ConnectionForm::hopf_perturbed(spec.parameter.unwrap_or(0.1))),
        (PrincipalBundle::Hopf, other) => Err(Error::InvalidInput(format!("{other} is not a connection on the Hopf bundle"))),
        (PrincipalBundle::Trivial { base, group }, name) => {
            ConnectionForm::trivial_local(bundle.clone(), builtins::one_form(name, base, group)?)
        }
    }
}

fn point_from(bundle: &PrincipalBundle, coords: &[f64]) -> Result<BundlePoint, Error> {
    match bundle {
        PrincipalBundle::Hopf => {
            let c: [f64; 4] = coords
                .try_into()
                .map_err(|_| Error::InvalidInput("Hopf points have four coordinates".into()))?;
            BundlePoint::hopf_normalized(c)
        }
        PrincipalBundle::Trivial { base, group } => {
            let d = base.ambient_dim();
            if coords.len() != d + group.dim() {
                return Err(Error::InvalidInput(format!(
                    "point needs {} base and {} fiber coordinates",
                    d,
                    group.dim()
                )));
            }
            let m = ManifoldPoint::new(base.clone(), coords[..d].to_vec())?;
            Ok(BundlePoint::trivial(m, GroupElement::from_abelian_coords(group, &coords[d..])?))
        }
    }
}

impl<'a> Context<'a> {
    fn new(scenario: &'a Scenario, options: &'a RunOptions) -> Result<Self, ScenarioError> {
        let bundle = scenario.bundle()?;
        let connection = connection_for(&scenario.connection, &bundle).map_err(ScenarioError::invalid)?;
        let derivative = match options.derivative {
            Some(d) => d,
            None => scenario.derivative()?,
        };
        Ok(Self {
            scenario,
            options,
            bundle,
            connection,
            derivative,
        })
    }

    fn seed(&self) -> u64 {
        self.scenario.seed
    }

    fn metric(&self, kind: &ManifoldKind) -> MetricDescriptor {
        match self.options.metric.as_deref() {
            Some("euclidean") => MetricDescriptor::Euclidean,
            Some("round") => MetricDescriptor::Round,
            _ => MetricDescriptor::standard(kind),
        }
    }

    fn retraction_name(&self, spec: Option<&DiscreteSpec>) -> String {
        self.options
            .retraction
            .clone()
            .or_else(|| spec.and_then(|s| s.retraction.clone()))
            .unwrap_or_else(|| "exponential".into())
    }

    fn retraction_on(&self, kind: ManifoldKind, name: &str) -> Result<Retraction, Error> {
        match name {
            "exponential" => Retraction::new(kind.clone(), RetractionRule::MetricExponential(self.metric(&kind))),
            _ => Retraction::straight_line(kind),
        }
    }

    fn total_retraction(&self, name: &str) -> Result<TotalRetraction, Error> {
        match &self.bundle {
            PrincipalBundle::Trivial { base, .. } => Ok(TotalRetraction::Product(self.retraction_on(base.clone(), name)?)),
            PrincipalBundle::Hopf => TotalRetraction::hopf(self.retraction_on(crate::geometry::S3, name)?),
        }
    }

    fn equivariant(&self, spec: Option<&DiscreteSpec>) -> Result<EquivariantRetraction, Error> {
        let r = self.total_retraction(&self.retraction_name(spec))?;
        certify_equivariance(r, &self.bundle, self.scenario.sample_count, self.seed())
    }

    fn connection_of(&self, spec: &DiscreteSpec) -> Result<ConnectionForm, Error> {
        match &spec.connection {
            Some(c) => connection_for(c, &self.bundle),
            None => Ok(self.connection.clone()),
        }
    }

    fn radius(&self, spec: &DiscreteSpec) -> Option<f64> {
        self.options.domain_radius.or(spec.domain_radius)
    }

    fn build(&self, spec: &DiscreteSpec) -> Result<DiscreteConnectionForm, Error> {
        match spec.builtin.as_str() {
            "integrated" => {
                let a = self.connection_of(spec)?;
                let er = self.equivariant(Some(spec))?;
                match self.radius(spec) {
                    Some(r) => integrate_connection_on(&a, &er, r),
                    None => integrate_connection(&a, &er),
                }
            }
            "flat_line_integral" => {
                let a = self.connection_of(spec)?;
                let omega = a
                    .local_expression()
                    .ok_or_else(|| Error::UnsupportedPresentation("flat integration needs a local expression".into()))?;
                let form = BaseOneForm::new(self.bundle.base_kind(), omega.clone())?;
                flat_integrate_local(&form, self.radius(spec).unwrap_or(UNBOUNDED_RADIUS), self.options.quadrature)
            }
            "curvature_matched" => {
                let a = self.connection_of(spec)?;
                let reference = self.build(spec.reference.as_deref().expect("validated"))?;
                let opts = CurvatureMatchOptions {
                    quadrature: self.options.quadrature,
                    base_point: self.options.base_point.clone(),
                    samples: self.scenario.sample_count,
                    seed: self.seed(),
                };
                curvature_matched_integrate(&a, &reference, self.derivative, &opts)
            }
            name => match &self.bundle {
                PrincipalBundle::Trivial { base, group } => {
                    let c = builtins::local_rule(name, base, group, spec.parameter)?;
                    DiscreteConnectionForm::trivial_local(self.bundle.clone(), self.radius(spec).unwrap_or(UNBOUNDED_RADIUS), c)
                }
                PrincipalBundle::Hopf => Err(Error::InvalidInput(format!("{name} is a rule on trivial bundles"))),
            },
        }
    }

    fn discrete(&self) -> Result<DiscreteConnectionForm, Error> {
        let spec = self
            .scenario
            .discrete
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("scenario has no discrete form".into()))?;
        self.build(spec)
    }

    fn alternate(&self) -> Result<DiscreteConnectionForm, Error> {
        let spec = self
            .scenario
            .alternate
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("scenario has no alternate discrete form".into()))?;
        self.build(spec)
    }

    fn check(&self, spec: &CheckSpec, n: usize) -> Result<Vec<CheckOutcome>, Error> {
        let tol = spec.tolerance;
        let seed = self.seed();
        let one = |defect: f64| Ok(vec![CheckOutcome::new(&spec.name, defect, tol, n)]);
        let fd = self.derivative;
        match spec.name.as_str() {
            "exp_log" => one(self.exp_log(n)),
            "connection_axioms" => one(self.connection.verify_axioms(n, seed).max_defect()),
            "discrete_axioms" => one(self.discrete()?.verify_axioms(n, seed).max_defect()),
            "retraction_axioms" => one(self.retraction_axioms(n)?),
            "equivariant_retraction" => {
                let r = self.total_retraction(&self.retraction_name(self.scenario.discrete.as_ref()))?;
                match certify_equivariance(r, &self.bundle, n, seed) {
                    Ok(er) => one(er.defect()),
                    Err(Error::NotEquivariant { defect }) => one(defect),
                    Err(e) => Err(e),
                }
            }
            "invariant_metric" => one(self.invariant_metric(n)?),
            "diagram" => one(check_diagram(&self.discrete()?, n, seed, fd).max_defect()),
            "derive_roundtrip" => one(self.derive_roundtrip(n)?),
            "horizontal_roundtrip" => one(self.horizontal_roundtrip(n)?),
            "discrete_flatness" => {
                let ad = self.discrete()?;
                let mut rng = Sampler::new(seed);
                let mut defect = 0.0;
                for _ in 0..n {
                    let (q0, q1, q2) = sample_triple(&mut rng, &self.bundle, ad.domain().base_radius);
                    let d = ad.curvature(&q0, &q1, &q2).map(|b| b.distance_to_identity()).unwrap_or(f64::INFINITY);
                    defect = worst(defect, d);
                }
                one(defect)
            }
            "derived_flatness" => {
                let a = derive_connection(&self.discrete()?, fd)?;
                let base = self.bundle.base_kind();
                let mut rng = Sampler::new(seed);
                let mut defect = 0.0;
                for _ in 0..n {
                    let m = rng.base_point(&base);
                    let (u, w) = (rng.base_tangent(&m), rng.base_tangent(&m));
                    defect = worst(defect, a.curvature(&m, &u, &w).map(|c| c.norm()).unwrap_or(f64::INFINITY));
                }
                one(defect)
            }
            "area_identity" => {
                let expected = spec
                    .expected
                    .ok_or_else(|| Error::InvalidInput("area_identity needs an expected value".into()))?;
                let base_points = spec
                    .points
                    .clone()
                    .unwrap_or_else(|| vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
                if base_points.len() != 3 {
                    return Err(Error::InvalidInput("area_identity needs three base points".into()));
                }
                let ad = self.discrete()?;
                let q: Vec<BundlePoint> = base_points
                    .iter()
                    .map(|m| self.bundle.section(&ManifoldPoint::new(self.bundle.base_kind(), m.clone())?))
                    .collect::<Result<_, _>>()?;
                let b = ad.curvature(&q[0], &q[1], &q[2])?;
                let value = b
                    .abelian_coords()
                    .filter(|c| c.len() == 1)
                    .ok_or_else(|| Error::NonAbelian("area_identity reads a scalar curvature".into()))?[0];
                let mut o = CheckOutcome::new(&spec.name, (value - expected).abs(), tol, 1);
                o.observed = Some(value);
                Ok(vec![o])
            }
            "distinctness" => {
                let points = spec
                    .points
                    .as_ref()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| Error::InvalidInput("distinctness needs two points".into()))?;
                let q0 = point_from(&self.bundle, &points[0])?;
                let q1 = point_from(&self.bundle, &points[1])?;
                let separation = self.discrete()?.eval(&q0, &q1)?.distance(&self.alternate()?.eval(&q0, &q1)?)?;
                let threshold = spec.threshold.unwrap_or(0.1);
                let mut o = CheckOutcome::new(&spec.name, (threshold - separation).max(0.0), tol, 1);
                o.observed = Some(separation);
                Ok(vec![o])
            }
            "uniqueness" => one(check_agreement(&self.discrete()?, &self.alternate()?, n, seed).max_defect()),
            "same_derived_curvature" => {
                let c = check_same_derived_curvature(&self.discrete()?, &self.alternate()?, n, seed, fd);
                let mut out = vec![CheckOutcome::new(&spec.name, c.report.max_defect(), tol, n)];
                if !c.precondition_met {
                    out.push(CheckOutcome::new(
                        format!("{}.precondition", spec.name),
                        c.discrete_defect,
                        DISCRETE_AXIOM_TOLERANCE,
                        n,
                    ));
                }
                Ok(out)
            }
            "discrete_curvature_match" => one(discrete_curvature_defect(&self.discrete()?, &self.alternate()?, n, seed)),
            "curvature_descent" => {
                let ad = self.discrete()?;
                let zeta = descend_discrete_difference(&ad, &self.alternate()?, n, seed)?;
                one(zeta.triangle_defect(ad.domain().base_radius, n, seed))
            }
            other => Err(Error::InvalidInput(format!("unknown check {other}"))),
        }
    }

    fn exp_log(&self, n: usize) -> f64 {
        let group = self.bundle.group_kind();
        let mut rng = Sampler::new(self.seed());
        let mut defect = 0.0;
        for _ in 0..n {
            let xi = rng.algebra_element(&group);
            let d = xi
                .exp()
                .log()
                .and_then(|l| l.sub(&xi))
                .map(|e| e.norm())
                .unwrap_or(f64::INFINITY);
            defect = worst(defect, d);
            let g = rng.group_element(&group);
            let d = g
                .log()
                .and_then(|l| l.exp().distance(&g))
                .unwrap_or(f64::INFINITY);
            defect = worst(defect, d);
        }
        defect
    }

    fn retraction_axioms(&self, n: usize) -> Result<f64, Error> {
        let base = self.bundle.base_kind();
        let discrete = self.scenario.discrete.as_ref();
        let r = self.retraction_on(base.clone(), &self.retraction_name(discrete))?;
        let reduced = match discrete {
            Some(d) if d.builtin == "integrated" => Some(ReducedRetraction::new(self.connection_of(d)?, self.equivariant(Some(d))?)?),
            _ => None,
        };
        let reach = 0.5 * r.domain_radius().min(2.0);
        let mut rng = Sampler::new(self.seed());
        let mut defect = 0.0;
        for _ in 0..n {
            let m = rng.base_point(&base);
            let v = rng.base_tangent(&m);
            let v = v.scale(rng.uniform(0.0, reach) / v.norm().max(1e-12));
            defect = worst(defect, r.check_axioms(&v).max_defect());
            if let Some(rr) = &reduced {
                defect = worst(defect, rr.check_axioms(&v).max_defect());
            }
        }
        Ok(defect)
    }

    /// Invariance under the action together with orthogonality of horizontal
    /// lifts and vertical generators.
    fn invariant_metric(&self, n: usize) -> Result<f64, Error> {
        let base = self.bundle.base_kind();
        let g = build_invariant_metric(&self.bundle, &self.connection, self.metric(&base))?;
        let mut defect = g.invariance_defect(n, self.seed()).max_defect();
        let mut rng = Sampler::new(self.seed());
        for _ in 0..n {
            let q = rng.bundle_point(&self.bundle);
            let d = (|| {
                let m = self.bundle.project(&q)?;
                let h = self.connection.horizontal_lift(&q, &rng.base_tangent(&m))?;
                let v = self.bundle.infinitesimal_generator(&q, &rng.algebra_element(&self.bundle.group_kind()))?;
                Ok::<_, Error>(g.eval(&h, &v)?.abs())
            })()
            .unwrap_or(f64::INFINITY);
            defect = worst(defect, d);
        }
        Ok(defect)
    }

    fn derive_roundtrip(&self, n: usize) -> Result<f64, Error> {
        let spec = self.scenario.discrete.as_ref();
        let target = match spec {
            Some(s) => self.connection_of(s)?,
            None => self.connection.clone(),
        };
        let derived = derive_connection(&self.discrete()?, self.derivative)?;
        let mut rng = Sampler::new(self.seed());
        let mut defect = 0.0;
        for _ in 0..n {
            let q = rng.bundle_point(&self.bundle);
            let v = rng.bundle_tangent(&q);
            let d = (|| derived.eval(&v)?.sub(&target.eval(&v)?).map(|e| e.norm()))().unwrap_or(f64::INFINITY);
            defect = worst(defect, d);
        }
        Ok(defect)
    }

    fn horizontal_roundtrip(&self, n: usize) -> Result<f64, Error> {
        let ad = self.discrete()?;
        let mut rng = Sampler::new(self.seed());
        let mut defect = 0.0;
        for _ in 0..n {
            let q = rng.bundle_point(&self.bundle);
            let d = (|| {
                let dm = rng.base_tangent(&self.bundle.project(&q)?);
                let lhs = derive_horizontal(&ad, &q, &dm, self.derivative)?;
                lhs.distance(&self.connection.horizontal_lift(&q, &dm)?)
            })()
            .unwrap_or(f64::INFINITY);
            defect = worst(defect, d);
        }
        Ok(defect)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#""bundle": {"kind": "trivial", "base": "R^2", "group": "R^1"}, "connection": {"builtin": "x_dy"}"#;

    fn scenario(rest: &str) -> Result<Scenario, ScenarioError> {
        Scenario::parse(&format!(r#"{{"name": "t", "seed": 1, "sample_count": 10, {BASE}{rest}}}"#))
    }

    #[test]
    fn zero_checks_give_empty_passing_report() {
        let r = run(&scenario("").unwrap(), &RunOptions::default()).unwrap();
        assert!(r.checks.is_empty() && r.passed());
    }

    #[test]
    fn unknown_builtin_is_rejected() {
        let err = Scenario::parse(r#"{"name": "t", "bundle": {"kind": "hopf"}, "connection": {"builtin": "nope"}}"#).unwrap_err();
        assert!(matches!(err, ScenarioError::UnknownBuiltin(n) if n == "nope"));
        let err = scenario(r#", "discrete": {"builtin": "simpson"}"#).unwrap_err();
        assert!(matches!(err, ScenarioError::UnknownBuiltin(_)));
    }

    #[test]
    fn unknown_check_and_bad_tolerance() {
        assert!(matches!(scenario(r#", "checks": [{"name": "vibes", "tolerance": 1}]"#), Err(ScenarioError::UnknownCheck(_))));
        assert!(matches!(scenario(r#", "checks": [{"name": "diagram", "tolerance": 0}]"#), Err(ScenarioError::Parse(_))));
        assert!(matches!(Scenario::parse("{"), Err(ScenarioError::Parse(_))));
    }

    #[test]
    fn missing_discrete_is_reported_not_raised() {
        let r = run(&scenario(r#", "checks": [{"name": "diagram", "tolerance": 1e-6}]"#).unwrap(), &RunOptions::default()).unwrap();
        assert!(!r.passed());
        assert!(r.checks[0].error.as_deref().unwrap().contains("no discrete form"));
    }

    #[test]
    fn trapezoid_area_check() {
        let s = scenario(r#", "discrete": {"builtin": "trapezoid_x_dy"}, "checks": [{"name": "area_identity", "tolerance": 1e-12, "expected": 0.5}]"#).unwrap();
        let r = run(&s, &RunOptions::default()).unwrap();
        assert!(r.passed(), "{}", r.render(Format::Table));
        assert_eq!(r.checks[0].observed, Some(0.5));
    }

    #[test]
    fn json_reports_are_deterministic() {
        let s = scenario(r#", "discrete": {"builtin": "integrated", "retraction": "straight_line"}, "checks": [{"name": "derive_roundtrip", "tolerance": 1e-6}, {"name": "discrete_axioms", "tolerance": 1e-9}]"#).unwrap();
        let a = run(&s, &RunOptions::default()).unwrap().render(Format::Json);
        let b = run(&s, &RunOptions::default()).unwrap().render(Format::Json);
        assert_eq!(a, b);
        assert!(!a.contains("wall_time_ms"));
    }
}
