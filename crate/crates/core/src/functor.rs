//! Derivation of continuous connections and horizontal lifts from discrete
//! ones, by differentiating along the diagonal in the second slot.
//!
//! Group-valued curves `t ↦ A_d(q, γ(t))` start at the identity and are
//! differentiated as `log(A_d(q, γ(t))) / t` with Richardson-extrapolated central
//! differences. A one-sided estimate is compared against the central one to
//! flag rules that are not differentiable along the diagonal.

use crate::bundle::{base_curve, BundlePoint, BundleTangent, PrincipalBundle};
use crate::connection::{ConnectionForm, LocalOneForm};
use crate::diff;
use crate::discrete::DiscreteConnectionForm;
use crate::error::{Error, Result};
use crate::geometry::{same_base, TangentVector};
use crate::liegroup::AlgebraElement;
use crate::sampling::Sampler;
use crate::verify::{worst, VerificationReport};

pub const DIAGRAM_TOLERANCE: f64 = 1e-6;
const PROBE_SAMPLES: usize = 3;
const PROBE_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionalDerivativeSpec {
    pub base_step: f64,
    pub richardson_levels: usize,
}

impl Default for DirectionalDerivativeSpec {
    fn default() -> Self {
        Self {
            base_step: 1e-4,
            richardson_levels: 2,
        }
    }
}

impl DirectionalDerivativeSpec {
    pub fn new(base_step: f64, richardson_levels: usize) -> Result<Self> {
        if !(1e-8..=1e-2).contains(&base_step) {
            return Err(Error::InvalidInput(format!(
                "finite-difference step {base_step} is outside [1e-8, 1e-2]"
            )));
        }
        if !(1..=8).contains(&richardson_levels) {
            return Err(Error::InvalidInput(format!(
                "Richardson levels {richardson_levels} is outside 1..=8"
            )));
        }
        Ok(Self {
            base_step,
            richardson_levels,
        })
    }

    fn derivative<F>(&self, f: F) -> Result<Vec<f64>>
    where
        F: Fn(f64) -> Result<Vec<f64>>,
    {
        diff::derivative_at_zero(f, self.base_step, self.richardson_levels)
    }
}

/// `A(v_q) = D₂ A_d(q, q)(v_q)`.
///
/// On trivial bundles the result is presented by its local expression
/// `η(δm) = D₂ C(m, m)(δm)` with `C(m₀, m₁) = A_d((m₀, e), (m₁, e))`; on the Hopf
/// bundle it is a total-space rule differentiating along `q + t·v`.
pub fn derive_connection(ad: &DiscreteConnectionForm, spec: DirectionalDerivativeSpec) -> Result<ConnectionForm> {
    let bundle = ad.bundle().clone();
    let derived = match &bundle {
        PrincipalBundle::Trivial { group, .. } => {
            let ad = ad.clone();
            let group = group.clone();
            let eta = LocalOneForm::new(group.clone(), "derived", move |dm| {
                let m = dm.base();
                let d = spec.derivative(|t| {
                    let mt = base_curve(m, dm.components(), t)?;
                    Ok(ad.along_section(m, &mt)?.log()?.into_coords())
                })?;
                AlgebraElement::new(group.clone(), d)
            });
            ConnectionForm::trivial_local(bundle.clone(), eta)?
        }
        PrincipalBundle::Hopf => {
            let ad = ad.clone();
            let b = bundle.clone();
            ConnectionForm::from_total(bundle.clone(), move |v| {
                let q = v.point();
                let d = spec.derivative(|t| Ok(ad.eval(q, &b.curve(v, t)?)?.log()?.into_coords()))?;
                AlgebraElement::new(b.group_kind(), d)
            })
        }
    };
    probe(&derived, ad)?;
    Ok(derived)
}

/// Evaluates the derived form at a few points so that rules which are not
/// differentiable along the diagonal are rejected at construction.
fn probe(derived: &ConnectionForm, ad: &DiscreteConnectionForm) -> Result<()> {
    let mut rng = Sampler::new(PROBE_SEED);
    for _ in 0..PROBE_SAMPLES {
        let q = rng.bundle_point(ad.bundle());
        let v = rng.bundle_tangent(&q);
        derived.eval(&v)?;
    }
    Ok(())
}

/// `V(h_d)(q, δm) = D₂ h_{d,2}(q, φ(q))(δm)`.
pub fn derive_horizontal(
    ad: &DiscreteConnectionForm,
    q: &BundlePoint,
    dm: &TangentVector,
    spec: DirectionalDerivativeSpec,
) -> Result<BundleTangent> {
    let bundle = ad.bundle();
    let m = bundle.project(q)?;
    same_base(&m, dm.base())?;
    if dm.is_zero() {
        return Ok(BundleTangent::zero(q.clone()));
    }
    let d = spec.derivative(|t| {
        let mt = base_curve(&m, dm.components(), t)?;
        bundle.local_coordinates(q, &ad.horizontal_lift(q, &mt)?)
    })?;
    BundleTangent::projected(q.clone(), &d)
}

/// Maximum over samples of `|h(q, δm) − V(h_d)(q, δm)|` where `h` is the lift
/// of the derived connection.
pub fn check_diagram(
    ad: &DiscreteConnectionForm,
    samples: usize,
    seed: u64,
    spec: DirectionalDerivativeSpec,
) -> VerificationReport {
    let report = VerificationReport::new(DIAGRAM_TOLERANCE, samples.max(1));
    let derived = match derive_connection(ad, spec) {
        Ok(a) => a,
        Err(_) => return report.with("diagram", f64::INFINITY),
    };
    let mut rng = Sampler::new(seed);
    let mut defect = 0.0;
    for _ in 0..samples.max(1) {
        let q = rng.bundle_point(ad.bundle());
        let d = (|| {
            let m = ad.bundle().project(&q)?;
            let dm = rng.base_tangent(&m);
            let lhs = derived.horizontal_lift(&q, &dm)?;
            let rhs = derive_horizontal(ad, &q, &dm, spec)?;
            lhs.distance(&rhs)
        })()
        .unwrap_or(f64::INFINITY);
        defect = worst(defect, d);
    }
    report.with("diagram", defect)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::LocalGroupFunction;
    use crate::geometry::{ManifoldKind, ManifoldPoint, UNBOUNDED_RADIUS};
    use crate::liegroup::{GroupElement, GroupKind};
    use crate::linalg;

    fn plane(group: GroupKind) -> PrincipalBundle {
        PrincipalBundle::trivial(ManifoldKind::EuclideanChart(2), group).unwrap()
    }

    fn line() -> PrincipalBundle {
        PrincipalBundle::trivial(ManifoldKind::EuclideanChart(1), GroupKind::Translation(1)).unwrap()
    }

    fn trapezoid() -> DiscreteConnectionForm {
        let c = LocalGroupFunction::scalar(GroupKind::Translation(1), "trapezoid", |a, b| {
            0.5 * (a[0] + b[0]) * (b[1] - a[1])
        });
        DiscreteConnectionForm::trivial_local(plane(GroupKind::Translation(1)), UNBOUNDED_RADIUS, c).unwrap()
    }

    fn quadratic_sin() -> DiscreteConnectionForm {
        let c = LocalGroupFunction::scalar(GroupKind::Translation(1), "quadratic_f", |a, b| {
            (b[0] - a[0]).powi(2) * (a[0] * b[0]).sin()
        });
        DiscreteConnectionForm::trivial_local(line(), UNBOUNDED_RADIUS, c).unwrap()
    }

    #[test]
    fn spec_bounds() {
        assert!(DirectionalDerivativeSpec::new(1e-9, 2).is_err());
        assert!(DirectionalDerivativeSpec::new(1e-1, 2).is_err());
        assert!(DirectionalDerivativeSpec::new(1e-4, 2).is_ok());
    }

    #[test]
    fn quadratic_family_derives_to_dy() {
        let a = derive_connection(&quadratic_sin(), DirectionalDerivativeSpec::default()).unwrap();
        let q = BundlePoint::trivial(ManifoldPoint::euclidean(&[0.7]), GroupElement::Translation(vec![-1.0]));
        let v = BundleTangent::new(q, vec![1.0, 2.0]).unwrap();
        assert!((a.eval(&v).unwrap().coords()[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn trapezoid_derives_to_x_dy() {
        let a = derive_connection(&trapezoid(), DirectionalDerivativeSpec::default()).unwrap();
        let m = ManifoldPoint::euclidean(&[2.0, 3.0]);
        let dm = TangentVector::new(m, vec![0.0, 1.0]).unwrap();
        // D₂ of ½(x₀+x₁)(y₁−y₀) at the diagonal in direction (0,1) is x
        let eta = a.local_expression().unwrap().eval(&dm).unwrap();
        assert!((eta.coords()[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn zero_rule_derives_to_zero() {
        let ad = DiscreteConnectionForm::trivial_local(line(), UNBOUNDED_RADIUS, LocalGroupFunction::identity(GroupKind::Translation(1))).unwrap();
        let a = derive_connection(&ad, DirectionalDerivativeSpec::default()).unwrap();
        let dm = TangentVector::new(ManifoldPoint::euclidean(&[0.3]), vec![1.0]).unwrap();
        assert_eq!(a.local_expression().unwrap().eval(&dm).unwrap().coords(), &[0.0]);
        let q = BundlePoint::trivial(ManifoldPoint::euclidean(&[0.0]), GroupElement::Translation(vec![3.0]));
        let dm = TangentVector::new(ManifoldPoint::euclidean(&[0.0]), vec![1.0]).unwrap();
        let h = derive_horizontal(&ad, &q, &dm, DirectionalDerivativeSpec::default()).unwrap();
        assert!(linalg::dist(h.components(), &[1.0, 0.0]) < 1e-12);
        let z = derive_horizontal(&ad, &q, &dm.scale(0.0), DirectionalDerivativeSpec::default()).unwrap();
        assert_eq!(z.components(), &[0.0, 0.0]);
    }

    #[test]
    fn trapezoid_lift_derivative() {
        let q = BundlePoint::trivial(ManifoldPoint::euclidean(&[1.5, 0.2]), GroupElement::Translation(vec![0.4]));
        let dm = TangentVector::new(ManifoldPoint::euclidean(&[1.5, 0.2]), vec![0.0, 1.0]).unwrap();
        let h = derive_horizontal(&trapezoid(), &q, &dm, DirectionalDerivativeSpec::default()).unwrap();
        assert!(linalg::dist(h.components(), &[0.0, 1.0, -1.5]) < 1e-10);
    }

    #[test]
    fn diagrams_commute() {
        let spec = DirectionalDerivativeSpec::default();
        for ad in [trapezoid(), quadratic_sin()] {
            let rep = check_diagram(&ad, 50, 9, spec);
            assert!(rep.passed(), "{rep}");
        }
    }

    #[test]
    fn kink_on_the_diagonal_is_rejected() {
        let c = LocalGroupFunction::scalar(GroupKind::Translation(1), "kink", |a, b| (b[0] - a[0]).abs());
        let ad = DiscreteConnectionForm::trivial_local(line(), UNBOUNDED_RADIUS, c).unwrap();
        let err = derive_connection(&ad, DirectionalDerivativeSpec::default()).unwrap_err();
        assert!(matches!(err, Error::NonDifferentiable { .. }));
    }
}
