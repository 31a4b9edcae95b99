use disconn::abelian::check_agreement;
use disconn::builtins;
use disconn::bundle::{BundlePoint, PrincipalBundle};
use disconn::discrete::DiscreteConnectionForm;
use disconn::functor::{derive_connection, DirectionalDerivativeSpec};
use disconn::geometry::{ManifoldKind, ManifoldPoint, UNBOUNDED_RADIUS};
use disconn::liegroup::{GroupElement, GroupKind};
use disconn::sampling::Sampler;

fn main() -> disconn::Result<()> {
    let base = ManifoldKind::EuclideanChart(2);
    let group = GroupKind::Translation(1);
    let bundle = PrincipalBundle::trivial(base.clone(), group.clone())?;
    let rule = |name| -> disconn::Result<DiscreteConnectionForm> {
        let c = builtins::local_rule(name, &base, &group, None)?;
        DiscreteConnectionForm::trivial_local(bundle.clone(), UNBOUNDED_RADIUS, c)
    };
    let trapezoid = rule("trapezoid_x_dy")?;
    let left = rule("left_x_dy")?;

    // both rules differentiate to x dy
    let spec = DirectionalDerivativeSpec::default();
    let (a, b) = (derive_connection(&trapezoid, spec)?, derive_connection(&left, spec)?);
    let mut rng = Sampler::new(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let q = rng.bundle_point(&bundle);
        let v = rng.bundle_tangent(&q);
        worst = worst.max(a.eval(&v)?.sub(&b.eval(&v)?)?.norm());
    }
    println!("derived forms differ by at most {worst:.2e}");

    let at = |x: f64, y: f64| -> disconn::Result<BundlePoint> {
        Ok(BundlePoint::trivial(ManifoldPoint::new(base.clone(), vec![x, y])?, GroupElement::Translation(vec![0.0])))
    };
    let (q0, q1) = (at(0.0, 0.0)?, at(2.0, 5.0)?);
    println!("trapezoid A_d(q0, q1) = {}", trapezoid.eval(&q0, &q1)?);
    println!("left-point A_d(q0, q1) = {}", left.eval(&q0, &q1)?);
    println!("agreement check, expected to fail: {}", check_agreement(&trapezoid, &left, 100, 5));
    Ok(())
}
