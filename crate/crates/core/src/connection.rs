//! Connection one-forms, horizontal lifts and curvature.
//!
//! On a trivial bundle `M × G` a connection is given by its local expression
//! `ω`, a `g`-valued one-form on the base, and evaluates as
//! `A(δm, ξ) = Ad_g ω(δm) + ξ` where `ξ = δg·g⁻¹`. The `Ad_g` factor is what
//! makes `A` equivariant for nonabelian `G`; for abelian groups it is the
//! identity.
//!
//! Curvature of a trivial-bundle connection follows the structure equation of
//! left principal bundles, `Ω(u, w) = dω(u, w) − [ω(u), ω(w)]`, with `dω` from
//! central differences along constant (projected) fields.

use std::fmt;
use std::sync::Arc;

use crate::bundle::{hermitian, BundlePoint, BundleTangent, PrincipalBundle};
use crate::diff;
use crate::error::{mismatch, Error, Result};
use crate::geometry::{same_base, ManifoldPoint, TangentVector, S2};
use crate::liegroup::{AlgebraElement, GroupKind};
use crate::linalg;
use crate::sampling::Sampler;
use crate::verify::{worst, VerificationReport};

pub const CONNECTION_AXIOM_TOLERANCE: f64 = 1e-8;
/// Step of the central differences used for `dω`.
pub const CURVATURE_STEP: f64 = 1e-3;

type OneFormFn = dyn Fn(&TangentVector) -> Result<AlgebraElement> + Send + Sync;
type TotalFormFn = dyn Fn(&BundleTangent) -> Result<AlgebraElement> + Send + Sync;

/// A `g`-valued one-form on a base manifold.
#[derive(Clone)]
pub struct LocalOneForm {
    group: GroupKind,
    label: String,
    rule: Arc<OneFormFn>,
}

impl LocalOneForm {
    pub fn new<F>(group: GroupKind, label: impl Into<String>, rule: F) -> Self
    where
        F: Fn(&TangentVector) -> Result<AlgebraElement> + Send + Sync + 'static,
    {
        Self {
            group,
            label: label.into(),
            rule: Arc::new(rule),
        }
    }

    /// The form `(δm) ↦ Σᵢ coeffs(m)ᵢ δmᵢ` valued in a one-dimensional algebra.
    pub fn scalar<F>(group: GroupKind, label: impl Into<String>, coeffs: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self::new(group.clone(), label, move |dm| {
            let c = coeffs(dm.base().coords());
            AlgebraElement::new(group.clone(), vec![linalg::dot(&c, dm.components())])
        })
    }

    pub fn zero(group: GroupKind) -> Self {
        let g = group.clone();
        Self::new(group, "zero", move |_| Ok(AlgebraElement::zero(&g)))
    }

    pub fn group(&self) -> &GroupKind {
        &self.group
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, dm: &TangentVector) -> Result<AlgebraElement> {
        let out = (self.rule)(dm)?;
        if out.kind() != &self.group {
            return Err(mismatch(&self.group, out.kind()));
        }
        Ok(out)
    }

    /// `dω(u, w)` by central differences along fields that are constant in
    /// ambient coordinates and projected onto the tangent spaces. Such fields
    /// commute at the evaluation point.
    pub fn exterior_derivative(&self, u: &TangentVector, w: &TangentVector) -> Result<AlgebraElement> {
        same_base(u.base(), w.base())?;
        let m = u.base();
        let along = |dir: &TangentVector, field: &TangentVector| {
            diff::central_derivative(
                |t| {
                    let p = crate::bundle::base_curve(m, dir.components(), t)?;
                    let f = TangentVector::projected(p, field.components())?;
                    Ok(self.eval(&f)?.into_coords())
                },
                CURVATURE_STEP,
                2,
            )
        };
        let a = along(u, w)?;
        let b = along(w, u)?;
        AlgebraElement::new(self.group.clone(), linalg::sub(&a, &b))
    }

    /// `dω(u, w) − [ω(u), ω(w)]`.
    pub fn structure_curvature(&self, u: &TangentVector, w: &TangentVector) -> Result<AlgebraElement> {
        let d = self.exterior_derivative(u, w)?;
        let br = self.eval(u)?.bracket(&self.eval(w)?)?;
        d.sub(&br)
    }
}

impl fmt::Debug for LocalOneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalOneForm({}, {})", self.label, self.group)
    }
}

#[derive(Clone)]
pub enum ConnectionRule {
    TrivialLocal(LocalOneForm),
    HopfCanonical,
    /// Canonical form plus `ε · φ*(x dy)`.
    HopfPerturbed(f64),
    /// Arbitrary evaluation rule on total-space tangents, e.g. the output of the
    /// derivation functor on the Hopf bundle.
    Total(Arc<TotalFormFn>),
}

impl fmt::Debug for ConnectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConnectionRule::TrivialLocal(w) => write!(f, "TrivialLocal({w:?})"),
            ConnectionRule::HopfCanonical => write!(f, "HopfCanonical"),
            ConnectionRule::HopfPerturbed(e) => write!(f, "HopfPerturbed({e})"),
            ConnectionRule::Total(_) => write!(f, "Total"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConnectionForm {
    bundle: PrincipalBundle,
    rule: ConnectionRule,
}

impl ConnectionForm {
    pub fn trivial_local(bundle: PrincipalBundle, omega: LocalOneForm) -> Result<Self> {
        match &bundle {
            PrincipalBundle::Trivial { group, .. } if group == omega.group() => Ok(Self {
                bundle,
                rule: ConnectionRule::TrivialLocal(omega),
            }),
            PrincipalBundle::Trivial { group, .. } => Err(mismatch(group, omega.group())),
            PrincipalBundle::Hopf => Err(Error::UnsupportedPresentation(
                "local expressions need a trivial bundle".into(),
            )),
        }
    }

    pub fn hopf_canonical() -> Self {
        Self {
            bundle: PrincipalBundle::Hopf,
            rule: ConnectionRule::HopfCanonical,
        }
    }

    pub fn hopf_perturbed(epsilon: f64) -> Self {
        Self {
            bundle: PrincipalBundle::Hopf,
            rule: ConnectionRule::HopfPerturbed(epsilon),
        }
    }

    pub fn from_total<F>(bundle: PrincipalBundle, rule: F) -> Self
    where
        F: Fn(&BundleTangent) -> Result<AlgebraElement> + Send + Sync + 'static,
    {
        Self {
            bundle,
            rule: ConnectionRule::Total(Arc::new(rule)),
        }
    }

    pub fn bundle(&self) -> &PrincipalBundle {
        &self.bundle
    }

    pub fn rule(&self) -> &ConnectionRule {
        &self.rule
    }

    pub fn local_expression(&self) -> Option<&LocalOneForm> {
        match &self.rule {
            ConnectionRule::TrivialLocal(w) => Some(w),
            _ => None,
        }
    }

    pub fn eval(&self, v: &BundleTangent) -> Result<AlgebraElement> {
        self.bundle.check_point(v.point())?;
        match &self.rule {
            ConnectionRule::TrivialLocal(omega) => {
                let (dm, xi) = v.split()?;
                let BundlePoint::Trivial { fiber, .. } = v.point() else {
                    unreachable!("split succeeded")
                };
                fiber.adjoint(&omega.eval(&dm)?)?.add(&xi)
            }
            ConnectionRule::HopfCanonical => hopf_canonical(v),
            ConnectionRule::HopfPerturbed(eps) => {
                let base = hopf_canonical(v)?;
                let dm = self.bundle.push_forward(v)?;
                let beta = dm.base().coords()[0] * dm.components()[1];
                Ok(AlgebraElement::new(GroupKind::Circle, vec![base.coords()[0] + eps * beta])?)
            }
            ConnectionRule::Total(f) => {
                let out = f(v)?;
                if out.kind() != &self.bundle.group_kind() {
                    return Err(mismatch(self.bundle.group_kind(), out.kind()));
                }
                Ok(out)
            }
        }
    }

    /// `h(q, δm) = δq − (A(δq))_Q(q)` for a preimage `δq` of `δm`.
    pub fn horizontal_lift(&self, q: &BundlePoint, dm: &TangentVector) -> Result<BundleTangent> {
        let dq = self.bundle.lift_tangent(q, dm)?;
        let a = self.eval(&dq)?;
        let vertical = self.bundle.infinitesimal_generator(q, &a)?;
        let c = linalg::sub(dq.components(), vertical.components());
        BundleTangent::new(q.clone(), c)
    }

    /// The pulled-back form `σ*A` along the identity section of a trivial bundle.
    pub fn pullback_along_identity(&self, dm: &TangentVector) -> Result<AlgebraElement> {
        let q = self.bundle.section(dm.base())?;
        let v = self.bundle.lift_tangent(&q, dm)?;
        self.eval(&v)
    }

    /// Curvature two-form at `m` on the base tangent vectors `u`, `w`.
    pub fn curvature(&self, m: &ManifoldPoint, u: &TangentVector, w: &TangentVector) -> Result<AlgebraElement> {
        same_base(m, u.base())?;
        same_base(m, w.base())?;
        match (&self.bundle, &self.rule) {
            (_, ConnectionRule::TrivialLocal(omega)) => omega.structure_curvature(u, w),
            (PrincipalBundle::Trivial { group, .. }, ConnectionRule::Total(_)) => {
                let this = self.clone();
                let pulled = LocalOneForm::new(group.clone(), "pullback", move |dm| {
                    this.pullback_along_identity(dm)
                });
                pulled.structure_curvature(u, w)
            }
            (PrincipalBundle::Hopf, ConnectionRule::HopfCanonical) => Ok(hopf_area(m, u, w, 0.0)),
            (PrincipalBundle::Hopf, ConnectionRule::HopfPerturbed(eps)) => Ok(hopf_area(m, u, w, *eps)),
            (PrincipalBundle::Hopf, ConnectionRule::Total(_)) => self.total_curvature(m, u, w),
            _ => Err(Error::UnsupportedPresentation(format!("{:?}", self.rule))),
        }
    }

    /// `dA(hu, hw)` on an abelian total space, with `dA` by central differences
    /// along constant ambient fields projected onto `S³`.
    fn total_curvature(&self, m: &ManifoldPoint, u: &TangentVector, w: &TangentVector) -> Result<AlgebraElement> {
        let q = self.bundle.section(m)?;
        let x = self.horizontal_lift(&q, u)?;
        let y = self.horizontal_lift(&q, w)?;
        let BundlePoint::Hopf(p) = q else {
            return Err(Error::UnsupportedPresentation("total curvature needs S3".into()));
        };
        let along = |dir: &BundleTangent, field: &BundleTangent| {
            diff::central_derivative(
                |t| {
                    let c = [0, 1, 2, 3].map(|k| p[k] + t * dir.components()[k]);
                    let at = BundlePoint::hopf_normalized(c)?;
                    let BundlePoint::Hopf(a) = &at else { unreachable!() };
                    let s = linalg::dot(a, field.components());
                    let f = field.components().iter().zip(a).map(|(fi, ai)| fi - s * ai).collect();
                    Ok(self.eval(&BundleTangent::new(at.clone(), f)?)?.into_coords())
                },
                CURVATURE_STEP,
                2,
            )
        };
        let d = linalg::sub(&along(&x, &y)?, &along(&y, &x)?);
        AlgebraElement::new(GroupKind::Circle, d)
    }

    /// Sampled verticality `|A(ξ_Q) − ξ|` and equivariance `|A(l_g v) − Ad_g A(v)|`.
    pub fn verify_axioms(&self, samples: usize, seed: u64) -> VerificationReport {
        let mut rng = Sampler::new(seed);
        let group = self.bundle.group_kind();
        let mut vertical = 0.0;
        let mut equivariant = 0.0;
        for _ in 0..samples.max(1) {
            let q = rng.bundle_point(&self.bundle);
            let xi = rng.algebra_element(&group);
            let g = rng.group_element(&group);
            let v = rng.bundle_tangent(&q);
            let vd = self
                .bundle
                .infinitesimal_generator(&q, &xi)
                .and_then(|gen| self.eval(&gen))
                .and_then(|a| a.sub(&xi))
                .map(|d| d.norm())
                .unwrap_or(f64::INFINITY);
            vertical = worst(vertical, vd);
            let ed = (|| {
                let lhs = self.eval(&self.bundle.tangent_lift_action(&g, &v)?)?;
                let rhs = g.adjoint(&self.eval(&v)?)?;
                Ok::<_, Error>(lhs.sub(&rhs)?.norm())
            })()
            .unwrap_or(f64::INFINITY);
            equivariant = worst(equivariant, ed);
        }
        VerificationReport::new(CONNECTION_AXIOM_TOLERANCE, samples.max(1))
            .with("verticality", vertical)
            .with("equivariance", equivariant)
    }
}

fn hopf_canonical(v: &BundleTangent) -> Result<AlgebraElement> {
    let BundlePoint::Hopf(q) = v.point() else {
        return Err(Error::BundleMismatch {
            expected: "hopf".into(),
            found: v.point().bundle().to_string(),
        });
    };
    let (_, im) = hermitian(q, v.components());
    AlgebraElement::new(GroupKind::Circle, vec![im])
}

/// `−½⟨m, u × w⟩ + ε (u_x w_y − u_y w_x)`.
fn hopf_area(m: &ManifoldPoint, u: &TangentVector, w: &TangentVector, eps: f64) -> AlgebraElement {
    debug_assert_eq!(m.kind(), &S2);
    let (u, w, m) = (u.components(), w.components(), m.coords());
    let cross = [
        u[1] * w[2] - u[2] * w[1],
        u[2] * w[0] - u[0] * w[2],
        u[0] * w[1] - u[1] * w[0],
    ];
    let value = -0.5 * linalg::dot(m, &cross) + eps * cross[2];
    AlgebraElement::new(GroupKind::Circle, vec![value]).expect("circle algebra is one-dimensional")
}
