use disconn::liegroup::{AlgebraElement, GroupElement, GroupKind};

fn main() -> disconn::Result<()> {
    let x = AlgebraElement::new(GroupKind::SO3, vec![0.3, -0.2, 0.9])?;
    let y = AlgebraElement::new(GroupKind::SO3, vec![-0.5, 0.1, 0.4])?;
    let g = x.exp();
    println!("exp(x) = {g}");
    println!("|log(exp(x)) - x| = {:.2e}", g.log()?.sub(&x)?.norm());

    // Ad_g [x, y] = [Ad_g x, Ad_g y]
    let h = y.exp();
    let lhs = h.adjoint(&x.bracket(&y)?)?;
    let rhs = h.adjoint(&x)?.bracket(&h.adjoint(&y)?)?;
    println!("bracket equivariance defect = {:.2e}", lhs.sub(&rhs)?.norm());

    let a = GroupElement::circle(3.0);
    let b = GroupElement::circle(1.0);
    println!("circle: 3.0 + 1.0 wraps to {}", a.compose(&b)?);
    let t = GroupElement::Translation(vec![1.0, 2.0]).compose(&GroupElement::Translation(vec![0.5, -1.0]))?;
    println!("translation: {t}");
    Ok(())
}
