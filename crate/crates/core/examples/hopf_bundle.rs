use disconn::bundle::{BundlePoint, PrincipalBundle};
use disconn::connection::ConnectionForm;
use disconn::geometry::TangentVector;
use disconn::liegroup::GroupElement;

fn main() -> disconn::Result<()> {
    let hopf = PrincipalBundle::Hopf;
    let q = BundlePoint::hopf_normalized([0.5, 0.1, -0.3, 0.8])?;
    let m = hopf.project(&q)?;
    println!("q = {q}\nprojection = {m}");

    let g = GroupElement::circle(1.2);
    let moved = hopf.act(&g, &q)?;
    println!("projection after action = {}", hopf.project(&moved)?);
    println!("recovered fiber element = {}", hopf.fiber_translation(&q, &moved)?);

    let a = ConnectionForm::hopf_canonical();
    let dm = TangentVector::projected(m.clone(), &[0.2, -0.4, 0.1])?;
    let h = a.horizontal_lift(&q, &dm)?;
    println!("A(horizontal lift) = {}", a.eval(&h)?.norm());
    println!("push-forward = {:?}", hopf.push_forward(&h)?.components());
    println!("tangent input = {:?}", dm.components());
    println!("axioms: {}", a.verify_axioms(100, 0));
    Ok(())
}
