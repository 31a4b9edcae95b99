use disconn::geometry::{ManifoldPoint, Retraction, TangentVector, S2};

fn main() -> disconn::Result<()> {
    let x = ManifoldPoint::new(S2, vec![0.0, 0.6, 0.8])?;
    let v = TangentVector::new(x.clone(), vec![0.7, 0.24, -0.18])?;
    for (name, r) in [("great circle", Retraction::exponential(S2)?), ("stereographic line", Retraction::straight_line(S2)?)] {
        let y = r.retract(&v)?;
        let back = r.invert_extended(&x, &y)?;
        let err: f64 = back.components().iter().zip(v.components()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("{name}");
        println!("  R(v)            = {y}");
        println!("  inverse error   = {err:.2e}");
        println!("  axiom defect    = {:.2e}", r.check_axioms(&v).max_defect());
    }
    Ok(())
}
