use disconn::bundle::PrincipalBundle;
use disconn::connection::ConnectionForm;
use disconn::functor::{derive_connection, DirectionalDerivativeSpec};
use disconn::geometry::{Retraction, S3};
use disconn::integrator::{certify_equivariance, integrate_connection, TotalRetraction};
use disconn::sampling::Sampler;

fn main() -> disconn::Result<()> {
    let hopf = PrincipalBundle::Hopf;
    let total = TotalRetraction::hopf(Retraction::exponential(S3)?)?;
    let er = certify_equivariance(total, &hopf, 50, 0)?;
    println!("great-circle retraction equivariance defect {:.2e}", er.defect());

    let stereo = TotalRetraction::hopf(Retraction::straight_line(S3)?)?;
    match certify_equivariance(stereo, &hopf, 50, 0) {
        Ok(_) => println!("stereographic retraction unexpectedly certified"),
        Err(e) => println!("stereographic retraction rejected: {e}"),
    }

    let a = ConnectionForm::hopf_canonical();
    let ad = integrate_connection(&a, &er)?;
    println!("integrated domain base radius {:.4}", ad.domain().base_radius);
    println!("discrete axioms: {}", ad.verify_axioms(100, 1));

    let derived = derive_connection(&ad, DirectionalDerivativeSpec::default())?;
    let mut rng = Sampler::new(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let q = rng.bundle_point(&hopf);
        let v = rng.bundle_tangent(&q);
        worst = worst.max(derived.eval(&v)?.sub(&a.eval(&v)?)?.norm());
    }
    println!("derive(integrate(A)) vs A: max defect {worst:.2e}");
    Ok(())
}
