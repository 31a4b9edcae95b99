//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are printed on every `cargo test`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use disconn::abelian::{
    check_agreement, curvature_matched_integrate, discrete_curvature_defect, flat_integrate_local, BaseOneForm,
    CurvatureMatchOptions,
};
use disconn::builtins;
use disconn::bundle::{BundlePoint, PrincipalBundle};
use disconn::connection::{ConnectionForm, LocalOneForm};
use disconn::discrete::DiscreteConnectionForm;
use disconn::functor::{derive_connection, DirectionalDerivativeSpec};
use disconn::geometry::{ManifoldKind, ManifoldPoint, Retraction, S2, S3, UNBOUNDED_RADIUS};
use disconn::integrator::{certify_equivariance, integrate_connection, TotalRetraction};
use disconn::liegroup::{GroupElement, GroupKind};
use disconn::quadrature::QuadratureSpec;
use disconn::sampling::Sampler;
use disconn::Error;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn plane() -> ManifoldKind {
    ManifoldKind::EuclideanChart(2)
}

fn r1() -> GroupKind {
    GroupKind::Translation(1)
}

fn local(bundle: &PrincipalBundle, name: &str) -> ConnectionForm {
    let PrincipalBundle::Trivial { base, group } = bundle else { unreachable!() };
    ConnectionForm::trivial_local(bundle.clone(), builtins::one_form(name, base, group).unwrap()).unwrap()
}

fn rule(bundle: &PrincipalBundle, name: &str, parameter: Option<f64>) -> DiscreteConnectionForm {
    let PrincipalBundle::Trivial { base, group } = bundle else { unreachable!() };
    let c = builtins::local_rule(name, base, group, parameter).unwrap();
    DiscreteConnectionForm::trivial_local(bundle.clone(), UNBOUNDED_RADIUS, c).unwrap()
}

/// Max over samples of `|derive(A_d)(v) − A(v)|`.
fn roundtrip_defect(ad: &DiscreteConnectionForm, a: &ConnectionForm, samples: usize, seed: u64) -> f64 {
    let derived = match derive_connection(ad, DirectionalDerivativeSpec::default()) {
        Ok(d) => d,
        Err(_) => return f64::INFINITY,
    };
    let mut rng = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let q = rng.bundle_point(ad.bundle());
        let v = rng.bundle_tangent(&q);
        let d = derived
            .eval(&v)
            .and_then(|x| x.sub(&a.eval(&v)?))
            .map(|e| e.norm())
            .unwrap_or(f64::INFINITY);
        worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
    }
    worst
}

fn scalar(g: GroupElement) -> f64 {
    g.abelian_coords().expect("abelian")[0]
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let o = f();
    let t = start.elapsed();
    match limit {
        Some(l) => outcome(o.passed && t < l, format!("{}; {:.2?} (limit {:?})", o.detail, t, l)),
        None => outcome(o.passed, format!("{}; {:.2?}", o.detail, t)),
    }
}

fn trivial_roundtrip() -> Outcome {
    let bundle = PrincipalBundle::trivial(plane(), GroupKind::Circle).unwrap();
    let a = local(&bundle, "x_dy");
    let r = Retraction::straight_line(plane()).unwrap();
    let er = match certify_equivariance(TotalRetraction::Product(r), &bundle, 100, 1) {
        Ok(er) => er,
        Err(e) => return outcome(false, e.to_string()),
    };
    let ad = integrate_connection(&a, &er).unwrap();
    let d = roundtrip_defect(&ad, &a, 100, 101);
    outcome(d <= 1e-6, format!("max |derive(A_d) - A| = {d:.3e} (tol 1e-6, 100 samples)"))
}

fn hopf_roundtrip() -> Outcome {
    let a = ConnectionForm::hopf_canonical();
    let r = TotalRetraction::hopf(Retraction::exponential(S3).unwrap()).unwrap();
    let er = match certify_equivariance(r, &PrincipalBundle::Hopf, 50, 2) {
        Ok(er) => er,
        Err(e) => return outcome(false, e.to_string()),
    };
    let ad = integrate_connection(&a, &er).unwrap();
    let d = roundtrip_defect(&ad, &a, 50, 102);
    outcome(d <= 1e-5, format!("max |derive(A_d) - A| = {d:.3e} (tol 1e-5, 50 samples)"))
}

fn nonuniqueness() -> Outcome {
    let bundle = PrincipalBundle::trivial(ManifoldKind::EuclideanChart(1), r1()).unwrap();
    let f0 = rule(&bundle, "quadratic_const", Some(0.0));
    let f1 = rule(&bundle, "quadratic_const", Some(1.0));
    let q0 = BundlePoint::trivial(ManifoldPoint::euclidean(&[0.0]), GroupElement::Translation(vec![0.0]));
    let q1 = BundlePoint::trivial(ManifoldPoint::euclidean(&[2.0]), GroupElement::Translation(vec![5.0]));
    let (v0, v1) = (scalar(f0.eval(&q0, &q1).unwrap()), scalar(f1.eval(&q0, &q1).unwrap()));
    // y₁ − y₀ + (x₁ − x₀)² f: 5 and 9
    let formula = (v0 - 5.0).abs() < 1e-15 && (v1 - 9.0).abs() < 1e-15;
    let a = local(&bundle, "zero");
    let d = roundtrip_defect(&f0, &a, 100, 103).max(roundtrip_defect(&f1, &a, 100, 104));
    let sep = (v1 - v0).abs();
    outcome(
        formula && sep >= 0.1 && d <= 1e-8,
        format!("separation {sep} at ((0,0),(2,5)), both derive to dy with defect {d:.3e} (tol 1e-8)"),
    )
}

fn flatness_preserved() -> Outcome {
    let bundle = PrincipalBundle::trivial(plane(), r1()).unwrap();
    let omega = BaseOneForm::new(plane(), builtins::one_form("closed_xy", &plane(), &r1()).unwrap()).unwrap();
    let ad = match flat_integrate_local(&omega, UNBOUNDED_RADIUS, QuadratureSpec::default()) {
        Ok(ad) => ad,
        Err(e) => return outcome(false, e.to_string()),
    };
    let derived = derive_connection(&ad, DirectionalDerivativeSpec::default()).unwrap();
    let mut rng = Sampler::new(105);
    let mut curvature: f64 = 0.0;
    for _ in 0..100 {
        let m = rng.base_point(&plane());
        let (u, w) = (rng.base_tangent(&m), rng.base_tangent(&m));
        curvature = curvature.max(derived.curvature(&m, &u, &w).map(|c| c.norm()).unwrap_or(f64::INFINITY));
    }
    let mut discrete: f64 = 0.0;
    for _ in 0..100 {
        let q0 = rng.bundle_point(&bundle);
        let q1 = rng.nearby_bundle_point(&bundle, &q0, 1.0);
        let q2 = rng.nearby_bundle_point(&bundle, &q0, 1.0);
        discrete = discrete.max(ad.curvature(&q0, &q1, &q2).map(|b| b.distance_to_identity()).unwrap_or(f64::INFINITY));
    }
    outcome(
        curvature <= 1e-6 && discrete <= 1e-9,
        format!("derived curvature {curvature:.3e} (tol 1e-6), B_d {discrete:.3e} (tol 1e-9)"),
    )
}

fn area_identity() -> Outcome {
    let bundle = PrincipalBundle::trivial(plane(), r1()).unwrap();
    let ad = rule(&bundle, "trapezoid_x_dy", None);
    let q = |x: f64, y: f64| BundlePoint::trivial(ManifoldPoint::euclidean(&[x, y]), GroupElement::Translation(vec![0.0]));
    let b = scalar(ad.curvature(&q(0.0, 0.0), &q(1.0, 0.0), &q(0.0, 1.0)).unwrap());
    // C₀₁ = 0, C₁₂ = ½·1·1, C₀₂ = 0
    let expected = 0.0 + 0.5 - 0.0;
    outcome((b - expected).abs() <= 1e-12, format!("B_d = {b} (expected {expected}, tol 1e-12)"))
}

fn curvature_matched() -> Outcome {
    let bundle = PrincipalBundle::trivial(plane(), r1()).unwrap();
    let reference = rule(&bundle, "trapezoid_x_dy", None);
    let a = local(&bundle, "x_dy_plus_dx2");
    let out = match curvature_matched_integrate(&a, &reference, DirectionalDerivativeSpec::default(), &CurvatureMatchOptions::default()) {
        Ok(o) => o,
        Err(e) => return outcome(false, e.to_string()),
    };
    let b = discrete_curvature_defect(&out, &reference, 50, 106);
    let d = roundtrip_defect(&out, &a, 100, 107);
    outcome(
        b <= 1e-6 && d <= 1e-6,
        format!("B_d defect {b:.3e} (tol 1e-6, 50 triples), derived-form defect {d:.3e} (tol 1e-6, 100 samples)"),
    )
}

fn uniqueness() -> Outcome {
    let bundle = PrincipalBundle::trivial(plane(), r1()).unwrap();
    let reference = rule(&bundle, "trapezoid_x_dy", None);
    let spec = DirectionalDerivativeSpec::default();
    let opts = CurvatureMatchOptions::default();
    let derived = derive_connection(&reference, spec).unwrap();
    let mut worst: f64 = 0.0;
    for a in [derived, local(&bundle, "x_dy")] {
        match curvature_matched_integrate(&a, &reference, spec, &opts) {
            Ok(out) => worst = worst.max(check_agreement(&out, &reference, 100, 108).max_defect()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    outcome(worst <= 1e-8, format!("max pair disagreement {worst:.3e} (tol 1e-8, 100 pairs x 2)"))
}

fn axiom_suites() -> Outcome {
    let mut conn: f64 = 0.0;
    let mut disc: f64 = 0.0;
    let mut retr: f64 = 0.0;
    let mut explog: f64 = 0.0;

    let circle = PrincipalBundle::trivial(plane(), GroupKind::Circle).unwrap();
    let so3 = PrincipalBundle::trivial(plane(), GroupKind::SO3).unwrap();
    let forms = [
        local(&circle, "x_dy"),
        local(&so3, "polynomial"),
        ConnectionForm::hopf_canonical(),
        ConnectionForm::hopf_perturbed(0.1),
    ];
    for a in &forms {
        conn = conn.max(a.verify_axioms(200, 7).max_defect());
    }

    let straight = |b: &PrincipalBundle| {
        let r = TotalRetraction::Product(Retraction::straight_line(plane()).unwrap());
        certify_equivariance(r, b, 50, 3).unwrap()
    };
    let hopf = certify_equivariance(
        TotalRetraction::hopf(Retraction::exponential(S3).unwrap()).unwrap(),
        &PrincipalBundle::Hopf,
        50,
        3,
    )
    .unwrap();
    let plane_r1 = PrincipalBundle::trivial(plane(), r1()).unwrap();
    let discretes = [
        rule(&plane_r1, "trapezoid_x_dy", None),
        integrate_connection(&forms[0], &straight(&circle)).unwrap(),
        integrate_connection(&forms[1], &straight(&so3)).unwrap(),
        integrate_connection(&forms[2], &hopf).unwrap(),
    ];
    for ad in &discretes {
        disc = disc.max(ad.verify_axioms(100, 9).max_defect());
    }

    let mut rng = Sampler::new(110);
    for kind in [plane(), S2, S3] {
        for r in [Retraction::straight_line(kind.clone()).unwrap(), Retraction::exponential(kind.clone()).unwrap()] {
            let reach = 0.5 * r.domain_radius().min(2.0);
            for _ in 0..100 {
                let m = rng.base_point(&kind);
                let v = rng.base_tangent(&m);
                let v = v.scale(rng.uniform(0.0, reach) / v.norm().max(1e-12));
                retr = retr.max(r.check_axioms(&v).max_defect());
            }
        }
    }

    let groups = [GroupKind::Translation(3), GroupKind::Circle, GroupKind::Torus(2), GroupKind::SO3];
    for g in &groups {
        for _ in 0..1000 {
            let xi = rng.algebra_element(g);
            let back = xi.exp().log().and_then(|l| l.sub(&xi)).map(|e| e.norm()).unwrap_or(f64::INFINITY);
            let h = rng.group_element(g);
            let again = h.log().and_then(|l| l.exp().distance(&h)).unwrap_or(f64::INFINITY);
            explog = explog.max(back).max(again);
        }
    }
    outcome(
        conn <= 1e-8 && disc <= 1e-9 && retr <= 1e-7 && explog <= 1e-10,
        format!(
            "connection {conn:.2e} (1e-8), discrete {disc:.2e} (1e-9), retraction {retr:.2e} (1e-7), exp/log {explog:.2e} (1e-10)"
        ),
    )
}

fn negative_controls() -> Outcome {
    let x_dy = BaseOneForm::new(plane(), builtins::one_form("x_dy", &plane(), &r1()).unwrap()).unwrap();
    let not_closed = matches!(
        flat_integrate_local(&x_dy, UNBOUNDED_RADIUS, QuadratureSpec::default()),
        Err(Error::NotClosed { .. })
    );

    let bundle = PrincipalBundle::trivial(plane(), r1()).unwrap();
    let reference = rule(&bundle, "trapezoid_x_dy", None);
    let doubled = ConnectionForm::trivial_local(
        bundle.clone(),
        LocalOneForm::scalar(r1(), "2x_dy", |m| vec![0.0, 2.0 * m[0]]),
    )
    .unwrap();
    let mismatch = matches!(
        curvature_matched_integrate(&doubled, &reference, DirectionalDerivativeSpec::default(), &CurvatureMatchOptions::default()),
        Err(Error::CurvatureMismatch { .. })
    );

    let stereographic = TotalRetraction::hopf(Retraction::straight_line(S3).unwrap()).unwrap();
    let not_equivariant = matches!(
        certify_equivariance(stereographic, &PrincipalBundle::Hopf, 50, 4),
        Err(Error::NotEquivariant { .. })
    );
    outcome(
        not_closed && mismatch && not_equivariant,
        format!("NotClosed {not_closed}, CurvatureMismatch {mismatch}, NotEquivariant {not_equivariant}"),
    )
}

fn main() -> ExitCode {
    let suite = Instant::now();
    type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);
    let criteria: Vec<Criterion> = vec![
        ("round trip on R^2 x U1, x dy", Some(Duration::from_secs(5)), trivial_roundtrip),
        ("round trip on the Hopf bundle", Some(Duration::from_secs(10)), hopf_roundtrip),
        ("non-uniqueness of integrals", None, nonuniqueness),
        ("flatness preserved by derivation", None, flatness_preserved),
        ("trapezoid area identity", None, area_identity),
        ("curvature-matched integration", None, curvature_matched),
        ("uniqueness near the diagonal", None, uniqueness),
        ("axiom suites", None, axiom_suites),
        ("negative controls", None, negative_controls),
    ];
    let mut all = true;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let o = timed(limit, run);
        all &= o.passed;
        println!("{} [{}] {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    let total = suite.elapsed();
    let within = total < Duration::from_secs(60);
    all &= within;
    println!("{} suite runtime {total:.2?} (limit 60s)", if within { "PASS" } else { "FAIL" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
