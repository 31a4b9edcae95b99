//! Abelian structure groups: descent of differences of (discrete) connections
//! to the base, flat integration by line integrals and curvature-matched
//! integration on chart bases.
//!
//! Line integrals run along straight chart segments, so the flat and
//! curvature-matched constructions require a `EuclideanChart` base (convex
//! and simply connected).

use crate::bundle::{BundlePoint, PrincipalBundle};
use crate::connection::{ConnectionForm, LocalOneForm};
use crate::discrete::{DiscreteConnectionForm, LocalGroupFunction, DISCRETE_AXIOM_TOLERANCE};
use crate::error::{Error, Result};
use crate::functor::{derive_connection, DirectionalDerivativeSpec};
use crate::geometry::{ManifoldKind, ManifoldPoint, TangentVector};
use crate::liegroup::{AlgebraElement, GroupElement, GroupKind};
use crate::linalg;
use crate::quadrature::QuadratureSpec;
use crate::sampling::Sampler;
use crate::verify::{worst, VerificationReport};

/// Largest accepted fiber dependence of a difference before descent fails.
pub const DESCENT_TOLERANCE: f64 = 1e-8;
pub const CLOSEDNESS_TOLERANCE: f64 = 1e-8;
pub const CURVATURE_MATCH_TOLERANCE: f64 = 1e-6;
pub const AGREEMENT_TOLERANCE: f64 = 1e-8;
const CHECK_SAMPLES: usize = 20;

fn require_abelian(group: &GroupKind) -> Result<()> {
    if group.is_abelian() {
        Ok(())
    } else {
        Err(Error::NonAbelian(group.to_string()))
    }
}

fn require_chart(base: &ManifoldKind) -> Result<()> {
    match base {
        ManifoldKind::EuclideanChart(_) => Ok(()),
        other => Err(Error::NotSimplyConnected(format!(
            "line integrals need a convex chart base, got {other}"
        ))),
    }
}

/// A `g`-valued one-form on the base, for abelian `g`.
#[derive(Clone, Debug)]
pub struct BaseOneForm {
    base: ManifoldKind,
    form: LocalOneForm,
}

impl BaseOneForm {
    pub fn new(base: ManifoldKind, form: LocalOneForm) -> Result<Self> {
        require_abelian(form.group())?;
        Ok(Self { base, form })
    }

    pub fn base(&self) -> &ManifoldKind {
        &self.base
    }

    pub fn group(&self) -> &GroupKind {
        self.form.group()
    }

    pub fn form(&self) -> &LocalOneForm {
        &self.form
    }

    pub fn eval(&self, dm: &TangentVector) -> Result<AlgebraElement> {
        if dm.base().kind() != &self.base {
            return Err(crate::error::mismatch(&self.base, dm.base().kind()));
        }
        self.form.eval(dm)
    }

    /// `dω(u, w)`.
    pub fn exterior_derivative(&self, u: &TangentVector, w: &TangentVector) -> Result<AlgebraElement> {
        self.form.exterior_derivative(u, w)
    }

    /// Sampled `|dω(u, w)|`.
    pub fn closedness_defect(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = Sampler::new(seed);
        let mut defect = 0.0;
        for _ in 0..samples.max(1) {
            let m = rng.base_point(&self.base);
            let u = rng.base_tangent(&m);
            let w = rng.base_tangent(&m);
            let d = self.exterior_derivative(&u, &w).map(|c| c.norm()).unwrap_or(f64::INFINITY);
            defect = worst(defect, d);
        }
        defect
    }

    /// `∫ ω` along the chart segment from `m0` to `m1`.
    pub fn line_integral(&self, m0: &ManifoldPoint, m1: &ManifoldPoint, quadrature: QuadratureSpec) -> Result<Vec<f64>> {
        require_chart(&self.base)?;
        let dir = linalg::sub(m1.coords(), m0.coords());
        quadrature.integrate(self.group().dim(), |t| {
            let p = ManifoldPoint::new(self.base.clone(), linalg::axpy(m0.coords(), t, &dir))?;
            Ok(self.form.eval(&TangentVector::new(p, dir.clone())?)?.into_coords())
        })
    }
}

/// An abelian group-valued function of base-point pairs.
#[derive(Clone, Debug)]
pub struct BaseGroupFunction {
    base: ManifoldKind,
    func: LocalGroupFunction,
}

impl BaseGroupFunction {
    pub fn new(base: ManifoldKind, func: LocalGroupFunction) -> Result<Self> {
        require_abelian(func.group())?;
        Ok(Self { base, func })
    }

    pub fn base(&self) -> &ManifoldKind {
        &self.base
    }

    pub fn group(&self) -> &GroupKind {
        self.func.group()
    }

    pub fn function(&self) -> &LocalGroupFunction {
        &self.func
    }

    pub fn eval(&self, m0: &ManifoldPoint, m1: &ManifoldPoint) -> Result<GroupElement> {
        self.func.eval(m0, m1)
    }

    /// The discrete connection on `M × G` with local expression `ζ`.
    pub fn to_discrete(&self, base_radius: f64) -> Result<DiscreteConnectionForm> {
        let bundle = PrincipalBundle::trivial(self.base.clone(), self.group().clone())?;
        DiscreteConnectionForm::trivial_local(bundle, base_radius, self.func.clone())
    }

    /// Sampled `|ζ(m₀,m₁) + ζ(m₁,m₂) − ζ(m₀,m₂)|` over triples with pairwise
    /// distances below `radius`, written additively.
    pub fn triangle_defect(&self, radius: f64, samples: usize, seed: u64) -> f64 {
        let mut rng = Sampler::new(seed);
        let mut defect = 0.0;
        for _ in 0..samples.max(1) {
            let m0 = rng.base_point(&self.base);
            let m1 = rng.nearby_base_point(&m0, radius / 2.0);
            let m2 = rng.nearby_base_point(&m0, radius / 2.0);
            let d = (|| {
                let g = self
                    .eval(&m0, &m2)?
                    .inverse()
                    .compose(&self.eval(&m1, &m2)?)?
                    .compose(&self.eval(&m0, &m1)?)?;
                Ok::<_, Error>(g.distance_to_identity())
            })()
            .unwrap_or(f64::INFINITY);
            defect = worst(defect, d);
        }
        defect
    }
}

fn same_bundle(a: &PrincipalBundle, b: &PrincipalBundle) -> Result<()> {
    if a != b {
        return Err(Error::BundleMismatch {
            expected: a.to_string(),
            found: b.to_string(),
        });
    }
    require_abelian(&a.group_kind())
}

/// The base form `ε` with `ε ∘ Tφ = A − A2`.
pub fn descend_continuous_difference(a: &ConnectionForm, a2: &ConnectionForm, samples: usize, seed: u64) -> Result<BaseOneForm> {
    let bundle = a.bundle().clone();
    same_bundle(&bundle, a2.bundle())?;
    let (x, y, b) = (a.clone(), a2.clone(), bundle.clone());
    let form = LocalOneForm::new(bundle.group_kind(), "difference", move |dm| {
        let v = b.lift_tangent(&b.section(dm.base())?, dm)?;
        x.eval(&v)?.sub(&y.eval(&v)?)
    });
    let eps = BaseOneForm::new(bundle.base_kind(), form)?;
    let mut rng = Sampler::new(seed);
    let mut defect = 0.0;
    for _ in 0..samples.max(1) {
        let q = rng.bundle_point(&bundle);
        let v = rng.bundle_tangent(&q);
        let d = (|| {
            let lhs = a.eval(&v)?.sub(&a2.eval(&v)?)?;
            let rhs = eps.eval(&bundle.push_forward(&v)?)?;
            Ok::<_, Error>(lhs.sub(&rhs)?.norm())
        })()
        .unwrap_or(f64::INFINITY);
        defect = worst(defect, d);
    }
    if !(defect <= DESCENT_TOLERANCE) {
        return Err(Error::DescentFailure { defect });
    }
    Ok(eps)
}

/// The base function `ζ` with `ζ ∘ (φ × φ) = A_d − A_d2` (written additively).
pub fn descend_discrete_difference(
    ad: &DiscreteConnectionForm,
    ad2: &DiscreteConnectionForm,
    samples: usize,
    seed: u64,
) -> Result<BaseGroupFunction> {
    let bundle = ad.bundle().clone();
    same_bundle(&bundle, ad2.bundle())?;
    if ad.domain() != ad2.domain() {
        return Err(Error::InvalidInput(format!(
            "domains differ: radius {} vs {}",
            ad.domain().base_radius,
            ad2.domain().base_radius
        )));
    }
    let (x, y) = (ad.clone(), ad2.clone());
    let func = LocalGroupFunction::new(bundle.group_kind(), "difference", move |m0, m1| {
        x.along_section(m0, m1)?.compose(&y.along_section(m0, m1)?.inverse())
    });
    let zeta = BaseGroupFunction::new(bundle.base_kind(), func)?;
    let radius = ad.domain().base_radius;
    let mut rng = Sampler::new(seed);
    let mut defect = 0.0;
    for _ in 0..samples.max(1) {
        let q0 = rng.bundle_point(&bundle);
        let q1 = rng.nearby_bundle_point(&bundle, &q0, radius);
        let d = (|| {
            let lhs = ad.eval(&q0, &q1)?.compose(&ad2.eval(&q0, &q1)?.inverse())?;
            let rhs = zeta.eval(&bundle.project(&q0)?, &bundle.project(&q1)?)?;
            lhs.distance(&rhs)
        })()
        .unwrap_or(f64::INFINITY);
        defect = worst(defect, d);
    }
    if !(defect <= DESCENT_TOLERANCE) {
        return Err(Error::DescentFailure { defect });
    }
    Ok(zeta)
}

/// Sampled `|B_d − B_d2|` over triples inside the common domain.
pub fn discrete_curvature_defect(ad: &DiscreteConnectionForm, ad2: &DiscreteConnectionForm, samples: usize, seed: u64) -> f64 {
    let bundle = ad.bundle();
    let radius = ad.domain().base_radius.min(ad2.domain().base_radius);
    let mut rng = Sampler::new(seed);
    let mut defect = 0.0;
    for _ in 0..samples.max(1) {
        let (q0, q1, q2) = sample_triple(&mut rng, bundle, radius);
        let d = (|| ad.curvature(&q0, &q1, &q2)?.distance(&ad2.curvature(&q0, &q1, &q2)?))().unwrap_or(f64::INFINITY);
        defect = worst(defect, d);
    }
    defect
}

/// Three points whose pairwise base distances are below `radius`.
pub(crate) fn sample_triple(rng: &mut Sampler, bundle: &PrincipalBundle, radius: f64) -> (BundlePoint, BundlePoint, BundlePoint) {
    let q0 = rng.bundle_point(bundle);
    let q1 = rng.nearby_bundle_point(bundle, &q0, radius / 2.0);
    let q2 = rng.nearby_bundle_point(bundle, &q0, radius / 2.0);
    (q0, q1, q2)
}

/// The flat discrete connection on `M × G` whose local expression is the line
/// integral of the closed form `ω` along chart segments.
pub fn flat_integrate_local(omega: &BaseOneForm, domain_radius: f64, quadrature: QuadratureSpec) -> Result<DiscreteConnectionForm> {
    require_chart(omega.base())?;
    let curvature = omega.closedness_defect(CHECK_SAMPLES, 0);
    if !(curvature <= CLOSEDNESS_TOLERANCE) {
        return Err(Error::NotClosed { curvature });
    }
    let w = omega.clone();
    let group = omega.group().clone();
    let label = format!("line_integral({})", omega.form().label());
    let c = LocalGroupFunction::new(group.clone(), label, move |m0, m1| {
        GroupElement::from_abelian_coords(&group, &w.line_integral(m0, m1, quadrature)?)
    });
    let bundle = PrincipalBundle::trivial(omega.base().clone(), omega.group().clone())?;
    DiscreteConnectionForm::trivial_local(bundle, domain_radius, c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureMatchOptions {
    pub quadrature: QuadratureSpec,
    /// Start of the segments defining the primitive; the chart origin if unset.
    pub base_point: Option<Vec<f64>>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CurvatureMatchOptions {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec::default(),
            base_point: None,
            samples: CHECK_SAMPLES,
            seed: 0,
        }
    }
}

/// Sampled `|curv(A) − curv(A2)|`.
pub fn continuous_curvature_defect(a: &ConnectionForm, a2: &ConnectionForm, samples: usize, seed: u64) -> f64 {
    let base = a.bundle().base_kind();
    let mut rng = Sampler::new(seed);
    let mut defect = 0.0;
    for _ in 0..samples.max(1) {
        let m = rng.base_point(&base);
        let u = rng.base_tangent(&m);
        let w = rng.base_tangent(&m);
        let d = (|| a.curvature(&m, &u, &w)?.sub(&a2.curvature(&m, &u, &w)?).map(|e| e.norm()))().unwrap_or(f64::INFINITY);
        defect = worst(defect, d);
    }
    defect
}

/// A discrete connection with the discrete curvature of `ad_ref` that
/// integrates `a`: `A_d = A_d,ref · exp(f(m₁) − f(m₀))` where `f` is a
/// primitive of the descended difference between `a` and the form derived
/// from `ad_ref`.
pub fn curvature_matched_integrate(
    a: &ConnectionForm,
    ad_ref: &DiscreteConnectionForm,
    spec: DirectionalDerivativeSpec,
    options: &CurvatureMatchOptions,
) -> Result<DiscreteConnectionForm> {
    let bundle = ad_ref.bundle().clone();
    same_bundle(&bundle, a.bundle())?;
    let base = bundle.base_kind();
    require_chart(&base)?;
    let origin = match &options.base_point {
        Some(p) => ManifoldPoint::new(base.clone(), p.clone())?,
        None => ManifoldPoint::new(base.clone(), vec![0.0; base.ambient_dim()])?,
    };
    let derived = derive_connection(ad_ref, spec)?;
    let defect = continuous_curvature_defect(a, &derived, options.samples, options.seed);
    if !(defect <= CURVATURE_MATCH_TOLERANCE) {
        return Err(Error::CurvatureMismatch { defect });
    }
    let eps = descend_continuous_difference(a, &derived, options.samples, options.seed)?;
    let group = bundle.group_kind();
    let quadrature = options.quadrature;
    let primitive = move |m: &ManifoldPoint| eps.line_integral(&origin, m, quadrature);
    let reference = ad_ref.clone();
    let label = format!("curvature_matched({})", a.local_expression().map_or("total", |w| w.label()));
    let c = LocalGroupFunction::new(group.clone(), label, move |m0, m1| {
        let shift = linalg::sub(&primitive(m1)?, &primitive(m0)?);
        reference
            .along_section(m0, m1)?
            .compose(&GroupElement::from_abelian_coords(&group, &shift)?)
    });
    DiscreteConnectionForm::trivial_local(bundle, ad_ref.domain().base_radius, c)
}

/// Outcome of comparing the curvatures of two derived connections.
#[derive(Clone, Debug)]
pub struct SameCurvatureCheck {
    /// Sampled `|B_d − B_d2|`; the comparison presumes this is at most `1e-9`.
    pub discrete_defect: f64,
    pub precondition_met: bool,
    pub report: VerificationReport,
}

/// Sampled curvature defect between `derive(ad)` and `derive(ad2)`.
pub fn check_same_derived_curvature(
    ad: &DiscreteConnectionForm,
    ad2: &DiscreteConnectionForm,
    samples: usize,
    seed: u64,
    spec: DirectionalDerivativeSpec,
) -> SameCurvatureCheck {
    let discrete_defect = discrete_curvature_defect(ad, ad2, samples, seed);
    let derived = derive_connection(ad, spec).and_then(|a| Ok((a, derive_connection(ad2, spec)?)));
    let d = match derived {
        Ok((a, a2)) => continuous_curvature_defect(&a, &a2, samples, seed),
        Err(_) => f64::INFINITY,
    };
    SameCurvatureCheck {
        discrete_defect,
        precondition_met: discrete_defect <= DISCRETE_AXIOM_TOLERANCE,
        report: VerificationReport::new(CURVATURE_MATCH_TOLERANCE, samples.max(1)).with("derived_curvature", d),
    }
}

/// Sampled `|A_d(q₀,q₁) − A_d2(q₀,q₁)|` over pairs within half the common
/// domain radius.
pub fn check_agreement(ad: &DiscreteConnectionForm, ad2: &DiscreteConnectionForm, samples: usize, seed: u64) -> VerificationReport {
    let bundle = ad.bundle();
    let radius = ad.domain().base_radius.min(ad2.domain().base_radius) / 2.0;
    let mut rng = Sampler::new(seed);
    let mut defect = 0.0;
    for _ in 0..samples.max(1) {
        let q0 = rng.bundle_point(bundle);
        let q1 = rng.nearby_bundle_point(bundle, &q0, radius);
        let d = (|| ad.eval(&q0, &q1)?.distance(&ad2.eval(&q0, &q1)?))().unwrap_or(f64::INFINITY);
        defect = worst(defect, d);
    }
    VerificationReport::new(AGREEMENT_TOLERANCE, samples.max(1)).with("agreement", defect)
}
