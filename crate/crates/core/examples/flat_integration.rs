use disconn::abelian::{flat_integrate_local, BaseOneForm};
use disconn::connection::LocalOneForm;
use disconn::geometry::{ManifoldKind, ManifoldPoint, UNBOUNDED_RADIUS};
use disconn::liegroup::GroupKind;
use disconn::quadrature::QuadratureSpec;

fn main() -> disconn::Result<()> {
    let plane = ManifoldKind::EuclideanChart(2);
    let group = GroupKind::Translation(1);
    let exact = LocalOneForm::scalar(group.clone(), "y dx + x dy", |m| vec![m[1], m[0]]);
    let omega = BaseOneForm::new(plane.clone(), exact)?;
    println!("closedness defect {:.2e}", omega.closedness_defect(50, 0));

    let ad = flat_integrate_local(&omega, UNBOUNDED_RADIUS, QuadratureSpec::default())?;
    let m0 = ManifoldPoint::new(plane.clone(), vec![0.5, -1.0])?;
    let m1 = ManifoldPoint::new(plane.clone(), vec![2.0, 3.0])?;
    println!("C(m0, m1) = {}  (xy difference {})", ad.along_section(&m0, &m1)?, 2.0 * 3.0 + 0.5);
    println!("discrete axioms: {}", ad.verify_axioms(100, 1));

    let twisted = LocalOneForm::scalar(group, "x dy", |m| vec![0.0, m[0]]);
    match flat_integrate_local(&BaseOneForm::new(plane, twisted)?, UNBOUNDED_RADIUS, QuadratureSpec::default()) {
        Ok(_) => println!("x dy unexpectedly accepted"),
        Err(e) => println!("x dy rejected: {e}"),
    }
    Ok(())
}
