use disconn::abelian::{check_same_derived_curvature, curvature_matched_integrate, discrete_curvature_defect, CurvatureMatchOptions};
use disconn::builtins;
use disconn::bundle::PrincipalBundle;
use disconn::connection::ConnectionForm;
use disconn::discrete::DiscreteConnectionForm;
use disconn::functor::DirectionalDerivativeSpec;
use disconn::geometry::{ManifoldKind, UNBOUNDED_RADIUS};
use disconn::liegroup::GroupKind;

fn main() -> disconn::Result<()> {
    let base = ManifoldKind::EuclideanChart(2);
    let group = GroupKind::Circle;
    let bundle = PrincipalBundle::trivial(base.clone(), group.clone())?;
    let reference = DiscreteConnectionForm::trivial_local(
        bundle.clone(),
        UNBOUNDED_RADIUS,
        builtins::local_rule("trapezoid_x_dy", &base, &group, None)?,
    )?;
    // same curvature as x dy, different form
    let a = ConnectionForm::trivial_local(bundle, builtins::one_form("x_dy_plus_dx2", &base, &group)?)?;

    let spec = DirectionalDerivativeSpec::new(1e-3, 2)?;
    let ad = curvature_matched_integrate(&a, &reference, spec, &CurvatureMatchOptions::default())?;
    println!("B_d defect against reference {:.2e}", discrete_curvature_defect(&ad, &reference, 100, 0));
    let check = check_same_derived_curvature(&ad, &reference, 50, 1, spec);
    println!("derived curvature precondition met: {}", check.precondition_met);
    println!("{}", check.report);
    Ok(())
}
