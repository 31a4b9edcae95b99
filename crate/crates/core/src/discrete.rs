//! Discrete connection forms `A_d`, discrete horizontal lifts and discrete
//! curvature.
//!
//! On a trivial bundle a discrete connection is stored through its local
//! expression `C(m₀, m₁)` and evaluates as `A_d((m₀,g₀),(m₁,g₁)) = g₁ C(m₀,m₁) g₀⁻¹`.
//! Connections produced by the integrator are opaque closures over pairs of
//! bundle points.

use std::fmt;
use std::sync::Arc;

use crate::bundle::{BundlePoint, DomainSpec, PrincipalBundle};
use crate::error::{mismatch, Error, Result};
use crate::geometry::ManifoldPoint;
use crate::liegroup::{GroupElement, GroupKind};
use crate::sampling::Sampler;
use crate::verify::{worst, VerificationReport};

pub const DISCRETE_AXIOM_TOLERANCE: f64 = 1e-9;

type GroupFn = dyn Fn(&ManifoldPoint, &ManifoldPoint) -> Result<GroupElement> + Send + Sync;
type PairFn = dyn Fn(&BundlePoint, &BundlePoint) -> Result<GroupElement> + Send + Sync;

/// A group-valued function of base-point pairs.
#[derive(Clone)]
pub struct LocalGroupFunction {
    group: GroupKind,
    label: String,
    rule: Arc<GroupFn>,
}

impl LocalGroupFunction {
    pub fn new<F>(group: GroupKind, label: impl Into<String>, rule: F) -> Self
    where
        F: Fn(&ManifoldPoint, &ManifoldPoint) -> Result<GroupElement> + Send + Sync + 'static,
    {
        Self {
            group,
            label: label.into(),
            rule: Arc::new(rule),
        }
    }

    /// `C(m₀, m₁) = exp(c(m₀, m₁))` for a real-valued `c` and a one-dimensional
    /// abelian group.
    pub fn scalar<F>(group: GroupKind, label: impl Into<String>, c: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        let g = group.clone();
        Self::new(group, label, move |m0, m1| {
            GroupElement::from_abelian_coords(&g, &[c(m0.coords(), m1.coords())])
        })
    }

    pub fn identity(group: GroupKind) -> Self {
        let g = group.clone();
        Self::new(group, "zero", move |_, _| Ok(g.identity()))
    }

    pub fn group(&self) -> &GroupKind {
        &self.group
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, m0: &ManifoldPoint, m1: &ManifoldPoint) -> Result<GroupElement> {
        let out = (self.rule)(m0, m1)?;
        let kind = out.kind();
        if kind != self.group {
            return Err(mismatch(&self.group, kind));
        }
        Ok(out)
    }
}

impl fmt::Debug for LocalGroupFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalGroupFunction({}, {})", self.label, self.group)
    }
}

#[derive(Clone)]
pub enum DiscreteRule {
    TrivialLocal(LocalGroupFunction),
    Composed(Arc<PairFn>),
}

impl fmt::Debug for DiscreteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiscreteRule::TrivialLocal(c) => write!(f, "TrivialLocal({c:?})"),
            DiscreteRule::Composed(_) => write!(f, "Composed"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiscreteConnectionForm {
    domain: DomainSpec,
    rule: DiscreteRule,
}

impl DiscreteConnectionForm {
    pub fn trivial_local(bundle: PrincipalBundle, base_radius: f64, c: LocalGroupFunction) -> Result<Self> {
        match &bundle {
            PrincipalBundle::Trivial { group, .. } if group == c.group() => Ok(Self {
                domain: DomainSpec::new(bundle, base_radius)?,
                rule: DiscreteRule::TrivialLocal(c),
            }),
            PrincipalBundle::Trivial { group, .. } => Err(mismatch(group, c.group())),
            PrincipalBundle::Hopf => Err(Error::UnsupportedPresentation(
                "local expressions need a trivial bundle".into(),
            )),
        }
    }

    pub fn composed<F>(bundle: PrincipalBundle, base_radius: f64, rule: F) -> Result<Self>
    where
        F: Fn(&BundlePoint, &BundlePoint) -> Result<GroupElement> + Send + Sync + 'static,
    {
        Ok(Self {
            domain: DomainSpec::new(bundle, base_radius)?,
            rule: DiscreteRule::Composed(Arc::new(rule)),
        })
    }

    pub fn bundle(&self) -> &PrincipalBundle {
        &self.domain.bundle
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn rule(&self) -> &DiscreteRule {
        &self.rule
    }

    pub fn local_expression(&self) -> Option<&LocalGroupFunction> {
        match &self.rule {
            DiscreteRule::TrivialLocal(c) => Some(c),
            DiscreteRule::Composed(_) => None,
        }
    }

    /// Same rule on a smaller (or larger) domain.
    pub fn with_base_radius(mut self, base_radius: f64) -> Result<Self> {
        self.domain = DomainSpec::new(self.domain.bundle, base_radius)?;
        Ok(self)
    }

    pub fn eval(&self, q1: &BundlePoint, q2: &BundlePoint) -> Result<GroupElement> {
        let bundle = self.bundle();
        bundle.check_point(q1)?;
        bundle.check_point(q2)?;
        self.domain.require(q1, q2)?;
        match (&self.rule, q1, q2) {
            (
                DiscreteRule::TrivialLocal(c),
                BundlePoint::Trivial { base: m0, fiber: g0 },
                BundlePoint::Trivial { base: m1, fiber: g1 },
            ) => g1.compose(&c.eval(m0, m1)?)?.compose(&g0.inverse()),
            (DiscreteRule::Composed(f), _, _) => {
                let out = f(q1, q2)?;
                let kind = out.kind();
                if kind != bundle.group_kind() {
                    return Err(mismatch(bundle.group_kind(), kind));
                }
                Ok(out)
            }
            _ => unreachable!("constructors pair local rules with trivial bundles"),
        }
    }

    /// `C(m₀, m₁) = A_d(σ(m₀), σ(m₁))` for the bundle's section `σ`.
    pub fn along_section(&self, m0: &ManifoldPoint, m1: &ManifoldPoint) -> Result<GroupElement> {
        let b = self.bundle();
        self.eval(&b.section(m0)?, &b.section(m1)?)
    }

    /// Second component of `h_d(q, m) = (q, l_{A_d(q,q')⁻¹}(q'))` for `q'` over `m`.
    pub fn horizontal_lift(&self, q: &BundlePoint, m: &ManifoldPoint) -> Result<BundlePoint> {
        let b = self.bundle();
        let target = b.section(m)?;
        let a = self.eval(q, &target)?;
        b.act(&a.inverse(), &target)
    }

    /// `B_d(q₀,q₁,q₂) = A_d(q₀,q₂)⁻¹ A_d(q₁,q₂) A_d(q₀,q₁)`.
    pub fn curvature(&self, q0: &BundlePoint, q1: &BundlePoint, q2: &BundlePoint) -> Result<GroupElement> {
        let a01 = self.eval(q0, q1)?;
        let a12 = self.eval(q1, q2)?;
        let a02 = self.eval(q0, q2)?;
        a02.inverse().compose(&a12)?.compose(&a01)
    }

    /// Sampled diagonal defect `|A_d(q,q) − e|` and equivariance defect
    /// `|A_d(l_g q, l_g' q') − g' A_d(q,q') g⁻¹|`.
    pub fn verify_axioms(&self, samples: usize, seed: u64) -> VerificationReport {
        let bundle = self.bundle();
        let group = bundle.group_kind();
        let mut rng = Sampler::new(seed);
        let mut diagonal = 0.0;
        let mut equivariant = 0.0;
        for _ in 0..samples.max(1) {
            let q = rng.bundle_point(bundle);
            let q2 = rng.nearby_bundle_point(bundle, &q, self.domain.base_radius);
            let g = rng.group_element(&group);
            let h = rng.group_element(&group);
            let d = self
                .eval(&q, &q)
                .map(|a| a.distance_to_identity())
                .unwrap_or(f64::INFINITY);
            diagonal = worst(diagonal, d);
            let e = (|| {
                let lhs = self.eval(&bundle.act(&g, &q)?, &bundle.act(&h, &q2)?)?;
                let rhs = h.compose(&self.eval(&q, &q2)?)?.compose(&g.inverse())?;
                lhs.distance(&rhs)
            })()
            .unwrap_or(f64::INFINITY);
            equivariant = worst(equivariant, e);
        }
        VerificationReport::new(DISCRETE_AXIOM_TOLERANCE, samples.max(1))
            .with("diagonal", diagonal)
            .with("equivariance", equivariant)
    }
}
