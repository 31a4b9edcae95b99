use disconn::builtins;
use disconn::bundle::PrincipalBundle;
use disconn::connection::ConnectionForm;
use disconn::discrete::DiscreteConnectionForm;
use disconn::functor::{check_diagram, derive_connection, DirectionalDerivativeSpec};
use disconn::geometry::{ManifoldKind, UNBOUNDED_RADIUS};
use disconn::liegroup::GroupKind;
use disconn::sampling::Sampler;

fn main() -> disconn::Result<()> {
    let base = ManifoldKind::EuclideanChart(2);
    let group = GroupKind::Translation(1);
    let bundle = PrincipalBundle::trivial(base.clone(), group.clone())?;
    let trapezoid = builtins::local_rule("trapezoid_x_dy", &base, &group, None)?;
    let ad = DiscreteConnectionForm::trivial_local(bundle.clone(), UNBOUNDED_RADIUS, trapezoid)?;
    let target = ConnectionForm::trivial_local(bundle.clone(), builtins::one_form("x_dy", &base, &group)?)?;

    let spec = DirectionalDerivativeSpec::default();
    let derived = derive_connection(&ad, spec)?;
    let mut rng = Sampler::new(1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let q = rng.bundle_point(&bundle);
        let v = rng.bundle_tangent(&q);
        worst = worst.max(derived.eval(&v)?.sub(&target.eval(&v)?)?.norm());
    }
    println!("derived trapezoid rule vs x dy: max defect {worst:.2e}");
    println!("derived axioms: {}", derived.verify_axioms(200, 2));
    println!("lift diagram: {}", check_diagram(&ad, 100, 3, spec));
    Ok(())
}
