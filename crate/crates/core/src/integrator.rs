//! Integration of a connection form into a discrete connection through an
//! equivariant retraction on the total space.
//!
//! With `h` the horizontal lift of `A` and `R` an equivariant retraction, the
//! reduced retraction on the base is `Ř(δm) = φ(R(h(q, δm)))` for any `q` over
//! the base point of `δm`. The discrete lift is
//! `h_d(q, m) = R(h(q, Ř⁻¹(φ(q), m)))` and `A_d(q, q')` is the fiber
//! translation carrying `h_d(q, φ(q'))` to `q'`.

use nalgebra::DMatrix;

use crate::bundle::{BundlePoint, BundleTangent, PrincipalBundle};
use crate::connection::ConnectionForm;
use crate::diff;
use crate::discrete::DiscreteConnectionForm;
use crate::error::{mismatch, Error, Result};
use crate::geometry::{
    metric_eval, newton_inverse, ManifoldPoint, MetricDescriptor, Retraction,
    TangentVector, RETRACTION_AXIOM_TOLERANCE, S3,
};
use crate::linalg;
use crate::sampling::Sampler;
use crate::verify::{worst, VerificationReport};

pub const EQUIVARIANCE_TOLERANCE: f64 = 1e-8;
pub const METRIC_INVARIANCE_TOLERANCE: f64 = 1e-8;
/// Largest norm of the random tangents used to test equivariance.
const CERTIFY_REACH: f64 = 0.5;

/// A retraction on the total space of a bundle.
#[derive(Clone, Debug, PartialEq)]
pub enum TotalRetraction {
    /// Base retraction combined with `g ↦ exp(ξ)·g` on the fiber of `M × G`,
    /// where `ξ = δg·g⁻¹`.
    Product(Retraction),
    /// A retraction on `S³`, the Hopf total space.
    Hopf(Retraction),
}

impl TotalRetraction {
    pub fn hopf(r: Retraction) -> Result<Self> {
        if r.kind() != &S3 {
            return Err(mismatch(S3, r.kind()));
        }
        Ok(TotalRetraction::Hopf(r))
    }

    fn inner(&self) -> &Retraction {
        match self {
            TotalRetraction::Product(r) | TotalRetraction::Hopf(r) => r,
        }
    }

    pub fn domain_radius(&self) -> f64 {
        self.inner().domain_radius()
    }

    fn check_bundle(&self, bundle: &PrincipalBundle) -> Result<()> {
        match (self, bundle) {
            (TotalRetraction::Product(r), PrincipalBundle::Trivial { base, .. }) if r.kind() == base => Ok(()),
            (TotalRetraction::Hopf(_), PrincipalBundle::Hopf) => Ok(()),
            _ => Err(Error::BundleMismatch {
                expected: bundle.to_string(),
                found: format!("retraction on {}", self.inner().kind()),
            }),
        }
    }

    pub fn retract(&self, v: &BundleTangent) -> Result<BundlePoint> {
        match (self, v.point()) {
            (TotalRetraction::Product(r), BundlePoint::Trivial { fiber, .. }) => {
                let (dm, xi) = v.split()?;
                Ok(BundlePoint::trivial(r.retract(&dm)?, xi.exp().compose(fiber)?))
            }
            (TotalRetraction::Hopf(r), BundlePoint::Hopf(q)) => {
                let x = ManifoldPoint::new(S3, q.to_vec())?;
                let p = r.retract(&TangentVector::new(x, v.components().to_vec())?)?;
                let c = p.coords();
                BundlePoint::hopf([c[0], c[1], c[2], c[3]])
            }
            _ => Err(Error::BundleMismatch {
                expected: format!("retraction on {}", self.inner().kind()),
                found: v.point().bundle().to_string(),
            }),
        }
    }
}

/// A total-space retraction whose `G`-equivariance has been checked on samples.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivariantRetraction {
    bundle: PrincipalBundle,
    retraction: TotalRetraction,
    certified: bool,
    defect: f64,
}

impl EquivariantRetraction {
    pub fn bundle(&self) -> &PrincipalBundle {
        &self.bundle
    }

    pub fn retraction(&self) -> &TotalRetraction {
        &self.retraction
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    /// Largest sampled `|R(l_g v) − l_g R(v)|`.
    pub fn defect(&self) -> f64 {
        self.defect
    }
}

/// Samples `|R(l_g v) − l_g R(v)|` and certifies the retraction if every
/// defect is at most `EQUIVARIANCE_TOLERANCE`.
pub fn certify_equivariance(
    retraction: TotalRetraction,
    bundle: &PrincipalBundle,
    samples: usize,
    seed: u64,
) -> Result<EquivariantRetraction> {
    retraction.check_bundle(bundle)?;
    let mut rng = Sampler::new(seed);
    let reach = CERTIFY_REACH.min(0.5 * retraction.domain_radius());
    let mut defect = 0.0;
    for _ in 0..samples.max(1) {
        let q = rng.bundle_point(bundle);
        let raw = rng.bundle_tangent(&q);
        let v = raw.scale(rng.uniform(0.0, reach) / raw.norm().max(1e-12));
        let g = rng.group_element(&bundle.group_kind());
        let d = (|| {
            let lhs = retraction.retract(&bundle.tangent_lift_action(&g, &v)?)?;
            let rhs = bundle.act(&g, &retraction.retract(&v)?)?;
            bundle.distance(&lhs, &rhs)
        })()
        .unwrap_or(f64::INFINITY);
        defect = worst(defect, d);
    }
    if !(defect <= EQUIVARIANCE_TOLERANCE) {
        return Err(Error::NotEquivariant { defect });
    }
    Ok(EquivariantRetraction {
        bundle: bundle.clone(),
        retraction,
        certified: true,
        defect,
    })
}

/// `⟨u, w⟩ = ⟨Tφ u, Tφ w⟩_M + ⟨A(u), A(w)⟩_g`: horizontal and vertical spaces
/// are orthogonal, the horizontal part pulls back the base metric and the
/// vertical part is the coordinate dot product on `g` (Euclidean on
/// translation and torus factors, `−½ tr(XY)` on `so(3)`).
#[derive(Clone, Debug)]
pub struct InvariantMetric {
    connection: ConnectionForm,
    base_metric: MetricDescriptor,
}

/// Every supported structure group is a product of compact factors (`U(1)`,
/// tori, `SO(3)`) and translation factors, so the assembly always applies.
pub fn build_invariant_metric(
    bundle: &PrincipalBundle,
    connection: &ConnectionForm,
    base_metric: MetricDescriptor,
) -> Result<InvariantMetric> {
    if connection.bundle() != bundle {
        return Err(Error::BundleMismatch {
            expected: bundle.to_string(),
            found: connection.bundle().to_string(),
        });
    }
    let base = bundle.base_kind();
    // rejects descriptors that do not fit the base
    Retraction::new(base, crate::geometry::RetractionRule::MetricExponential(base_metric.clone()))?;
    Ok(InvariantMetric {
        connection: connection.clone(),
        base_metric,
    })
}

impl InvariantMetric {
    pub fn eval(&self, u: &BundleTangent, w: &BundleTangent) -> Result<f64> {
        let bundle = self.connection.bundle();
        if u.point() != w.point() {
            return Err(Error::BasePointMismatch);
        }
        let base = bundle.base_kind();
        let horizontal = metric_eval(&base, &self.base_metric, &bundle.push_forward(u)?, &bundle.push_forward(w)?)?;
        let vertical = linalg::dot(self.connection.eval(u)?.coords(), self.connection.eval(w)?.coords());
        Ok(horizontal + vertical)
    }

    /// Gram matrix in the coordinate frame of the tangent representation: the
    /// standard basis on trivial bundles over charts, the ambient basis of `ℝ⁴`
    /// projected to `T_q S³` on the Hopf bundle.
    pub fn gram(&self, q: &BundlePoint) -> Result<DMatrix<f64>> {
        let n = BundleTangent::zero(q.clone()).components().len();
        let frame: Vec<BundleTangent> = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                BundleTangent::projected(q.clone(), &e)
            })
            .collect::<Result<_>>()?;
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = self.eval(&frame[i], &frame[j])?;
            }
        }
        Ok(g)
    }

    /// Sampled `|⟨l_g u, l_g w⟩ − ⟨u, w⟩|`.
    pub fn invariance_defect(&self, samples: usize, seed: u64) -> VerificationReport {
        let bundle = self.connection.bundle();
        let mut rng = Sampler::new(seed);
        let mut defect = 0.0;
        for _ in 0..samples.max(1) {
            let q = rng.bundle_point(bundle);
            let u = rng.bundle_tangent(&q);
            let w = rng.bundle_tangent(&q);
            let g = rng.group_element(&bundle.group_kind());
            let d = (|| {
                let moved = self.eval(&bundle.tangent_lift_action(&g, &u)?, &bundle.tangent_lift_action(&g, &w)?)?;
                Ok::<_, Error>((moved - self.eval(&u, &w)?).abs())
            })()
            .unwrap_or(f64::INFINITY);
            defect = worst(defect, d);
        }
        VerificationReport::new(METRIC_INVARIANCE_TOLERANCE, samples.max(1)).with("invariance", defect)
    }
}

/// `Ř(δm) = φ(R(h(q, δm)))`.
#[derive(Clone, Debug)]
pub struct ReducedRetraction {
    connection: ConnectionForm,
    retraction: EquivariantRetraction,
}

impl ReducedRetraction {
    pub fn new(connection: ConnectionForm, retraction: EquivariantRetraction) -> Result<Self> {
        if connection.bundle() != retraction.bundle() {
            return Err(Error::BundleMismatch {
                expected: retraction.bundle().to_string(),
                found: connection.bundle().to_string(),
            });
        }
        if !retraction.certified() {
            return Err(Error::NotEquivariant {
                defect: retraction.defect(),
            });
        }
        Ok(Self { connection, retraction })
    }

    /// Base tangent norms admitted by `Ř`. Hopf horizontal lifts halve norms.
    pub fn domain_radius(&self) -> f64 {
        match self.retraction.retraction() {
            TotalRetraction::Product(r) => r.domain_radius(),
            TotalRetraction::Hopf(r) => 2.0 * r.domain_radius(),
        }
    }

    pub fn retract(&self, dm: &TangentVector) -> Result<ManifoldPoint> {
        let bundle = self.connection.bundle();
        let q = bundle.section(dm.base())?;
        self.retract_from(&q, dm)
    }

    /// `Ř(δm)` evaluated with a chosen point `q` over the base point of `δm`.
    pub fn retract_from(&self, q: &BundlePoint, dm: &TangentVector) -> Result<ManifoldPoint> {
        let bundle = self.connection.bundle();
        if dm.is_zero() {
            return bundle.project(q);
        }
        let h = self.connection.horizontal_lift(q, dm)?;
        bundle.project(&self.retraction.retraction().retract(&h)?)
    }

    /// `Ř̃⁻¹(x, m)`: the tangent at `x` retracting to `m`.
    pub fn inverse(&self, x: &ManifoldPoint, m: &ManifoldPoint) -> Result<TangentVector> {
        if x.coords() == m.coords() {
            return Ok(TangentVector::zero(x.clone()));
        }
        let q = self.connection.bundle().section(x)?;
        newton_inverse(x, m, |v| self.retract_from(&q, v))
    }

    pub fn check_axioms(&self, dm: &TangentVector) -> VerificationReport {
        let x = dm.base();
        let identity = self
            .retract(&TangentVector::zero(x.clone()))
            .map(|p| linalg::dist(p.coords(), x.coords()))
            .unwrap_or(f64::INFINITY);
        let slope = diff::central_derivative(|t| Ok(self.retract(&dm.scale(t))?.coords().to_vec()), 1e-3, 2)
            .map(|s| linalg::dist(&s, dm.components()))
            .unwrap_or(f64::INFINITY);
        VerificationReport::new(RETRACTION_AXIOM_TOLERANCE, 1)
            .with("identity", identity)
            .with("slope", slope)
    }
}

/// Default admissible base radius of an integrated connection: half of the
/// smaller of the base injectivity bound and the reduced-retraction domain.
pub fn integrated_domain_radius(reduced: &ReducedRetraction) -> f64 {
    let injectivity = reduced.connection.bundle().base_kind().injectivity_radius();
    injectivity.min(reduced.domain_radius()) / 2.0
}

/// The discrete connection integrating `A` through `R`.
pub fn integrate_connection(connection: &ConnectionForm, retraction: &EquivariantRetraction) -> Result<DiscreteConnectionForm> {
    let reduced = ReducedRetraction::new(connection.clone(), retraction.clone())?;
    let radius = integrated_domain_radius(&reduced);
    integrate_with_radius(reduced, radius)
}

/// As [`integrate_connection`] with an explicit domain radius.
pub fn integrate_connection_on(
    connection: &ConnectionForm,
    retraction: &EquivariantRetraction,
    base_radius: f64,
) -> Result<DiscreteConnectionForm> {
    let reduced = ReducedRetraction::new(connection.clone(), retraction.clone())?;
    integrate_with_radius(reduced, base_radius)
}

fn integrate_with_radius(reduced: ReducedRetraction, radius: f64) -> Result<DiscreteConnectionForm> {
    let bundle = reduced.connection.bundle().clone();
    let b = bundle.clone();
    DiscreteConnectionForm::composed(bundle, radius, move |q, target| {
        let x = b.project(q)?;
        let m = b.project(target)?;
        if x.coords() == m.coords() {
            return b.fiber_translation(q, target);
        }
        let dm = reduced.inverse(&x, &m)?;
        let h = reduced.connection.horizontal_lift(q, &dm)?;
        let lifted = reduced.retraction.retraction().retract(&h)?;
        b.fiber_translation(&lifted, target)
    })
}

/// The discrete lift `h_d(q, m)` of an integrated connection, built directly
/// from its defining formula.
pub fn integrated_lift(reduced: &ReducedRetraction, q: &BundlePoint, m: &ManifoldPoint) -> Result<BundlePoint> {
    let x = reduced.connection.bundle().project(q)?;
    let dm = reduced.inverse(&x, m)?;
    let h = reduced.connection.horizontal_lift(q, &dm)?;
    reduced.retraction.retraction().retract(&h)
}
