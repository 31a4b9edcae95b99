use proptest::prelude::*;

use disconn::abelian::{curvature_matched_integrate, discrete_curvature_defect, flat_integrate_local, BaseOneForm, CurvatureMatchOptions};
use disconn::builtins;
use disconn::bundle::{BundleTangent, PrincipalBundle};
use disconn::connection::{ConnectionForm, LocalOneForm};
use disconn::discrete::DiscreteConnectionForm;
use disconn::functor::{derive_connection, DirectionalDerivativeSpec};
use disconn::geometry::{ManifoldKind, Retraction, S2, S3, UNBOUNDED_RADIUS};
use disconn::integrator::{build_invariant_metric, certify_equivariance, integrate_connection, ReducedRetraction, TotalRetraction};
use disconn::liegroup::{AlgebraElement, GroupElement, GroupKind};
use disconn::quadrature::QuadratureSpec;
use disconn::sampling::Sampler;

fn plane() -> ManifoldKind {
    ManifoldKind::EuclideanChart(2)
}

fn so3(v: [f64; 3]) -> GroupElement {
    AlgebraElement::new(GroupKind::SO3, v.to_vec()).unwrap().exp()
}

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    [-1.5f64..1.5, -1.5f64..1.5, -1.5f64..1.5]
}

fn local(bundle: &PrincipalBundle, name: &str) -> ConnectionForm {
    let PrincipalBundle::Trivial { base, group } = bundle else { unreachable!() };
    ConnectionForm::trivial_local(bundle.clone(), builtins::one_form(name, base, group).unwrap()).unwrap()
}

fn rule(bundle: &PrincipalBundle, name: &str) -> DiscreteConnectionForm {
    let PrincipalBundle::Trivial { base, group } = bundle else { unreachable!() };
    DiscreteConnectionForm::trivial_local(bundle.clone(), UNBOUNDED_RADIUS, builtins::local_rule(name, base, group, None).unwrap()).unwrap()
}

fn hopf_integrated() -> DiscreteConnectionForm {
    let r = TotalRetraction::hopf(Retraction::exponential(S3).unwrap()).unwrap();
    let er = certify_equivariance(r, &PrincipalBundle::Hopf, 20, 1).unwrap();
    integrate_connection(&ConnectionForm::hopf_canonical(), &er).unwrap()
}

fn bundles() -> Vec<PrincipalBundle> {
    vec![
        PrincipalBundle::Hopf,
        PrincipalBundle::trivial(plane(), GroupKind::SO3).unwrap(),
        PrincipalBundle::trivial(plane(), GroupKind::Torus(2)).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_associative(a in vec3(), b in vec3(), c in vec3()) {
        let (x, y, z) = (so3(a), so3(b), so3(c));
        let lhs = x.compose(&y).unwrap().compose(&z).unwrap();
        let rhs = x.compose(&y.compose(&z).unwrap()).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-12);
        let t = |v: [f64; 3]| GroupElement::torus(&v);
        let lhs = t(a).compose(&t(b)).unwrap().compose(&t(c)).unwrap();
        let rhs = t(a).compose(&t(b).compose(&t(c)).unwrap()).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn log_inverts_exp_on_unit_ball(v in vec3()) {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1.0);
        let x = AlgebraElement::new(GroupKind::SO3, v.iter().map(|c| c / n).collect()).unwrap();
        prop_assert!(x.exp().log().unwrap().sub(&x).unwrap().norm() <= 1e-10);
        let theta = v[0] / n;
        let c = AlgebraElement::new(GroupKind::Circle, vec![theta]).unwrap();
        prop_assert!(c.exp().log().unwrap().sub(&c).unwrap().norm() <= 1e-10);
    }

    #[test]
    fn adjoint_is_an_action(a in vec3(), b in vec3(), x in vec3()) {
        let (g, h) = (so3(a), so3(b));
        let xi = AlgebraElement::new(GroupKind::SO3, x.to_vec()).unwrap();
        let lhs = g.compose(&h).unwrap().adjoint(&xi).unwrap();
        let rhs = g.adjoint(&h.adjoint(&xi).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().norm() <= 1e-10);
    }

    #[test]
    fn abelian_composition_commutes(a in vec3(), b in vec3()) {
        let (x, y) = (GroupElement::Translation(a.to_vec()), GroupElement::Translation(b.to_vec()));
        prop_assert_eq!(x.compose(&y).unwrap(), y.compose(&x).unwrap());
        let (s, t) = (GroupElement::circle(a[0] * 3.0), GroupElement::circle(b[0] * 3.0));
        prop_assert!(s.compose(&t).unwrap().distance(&t.compose(&s).unwrap()).unwrap() <= 1e-15);
    }

    #[test]
    fn retraction_inverse_round_trip(seed in any::<u64>()) {
        let mut rng = Sampler::new(seed);
        // a fixed-chart straight line on a sphere is only locally invertible near the chart pole
        let cases = [
            Retraction::exponential(S2).unwrap(),
            Retraction::exponential(S3).unwrap(),
            Retraction::exponential(plane()).unwrap(),
            Retraction::straight_line(plane()).unwrap(),
        ];
        for r in cases {
            let kind = r.kind().clone();
            {
                let x = rng.base_point(&kind);
                let y = rng.nearby_base_point(&x, r.domain_radius() / 2.0);
                let v = r.invert_extended(&x, &y).unwrap();
                let back = r.retract(&v).unwrap();
                prop_assert!(back.distance(&y).unwrap() <= 1e-9);
            }
        }
    }

    #[test]
    fn sphere_retractions_stay_on_sphere_and_are_smooth(seed in any::<u64>()) {
        let mut rng = Sampler::new(seed);
        for r in [Retraction::exponential(S2).unwrap(), Retraction::straight_line(S2).unwrap()] {
            let x = rng.base_point(&S2);
            let v = rng.base_tangent(&x);
            prop_assume!(v.norm() > 1e-3);
            let t_max = 0.9 * r.domain_radius() / v.norm();
            let h = t_max / 64.0;
            let at = |t: f64| r.retract(&v.scale(t)).unwrap().coords().to_vec();
            for k in 1..64 {
                let t = k as f64 * h;
                let (a, b, c) = (at(t - h), at(t), at(t + h));
                let n: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                prop_assert!((n - 1.0).abs() <= 1e-12);
                let second: f64 = (0..3).map(|i| (a[i] - 2.0 * b[i] + c[i]).powi(2)).sum::<f64>().sqrt() / (h * h);
                prop_assert!(second.is_finite() && second < 1e3 * (1.0 + v.norm() * v.norm()));
            }
        }
    }

    #[test]
    fn action_is_free_and_vertical(seed in any::<u64>()) {
        let mut rng = Sampler::new(seed);
        for b in bundles() {
            let q = rng.bundle_point(&b);
            let g = rng.group_element(&b.group_kind());
            let moved = b.act(&g, &q).unwrap();
            prop_assert!(b.fiber_translation(&q, &moved).unwrap().distance(&g).unwrap() <= 1e-10);
            let (m0, m1) = (b.project(&q).unwrap(), b.project(&moved).unwrap());
            let tol = if b == PrincipalBundle::Hopf { 1e-12 } else { 0.0 };
            prop_assert!(m0.distance(&m1).unwrap() <= tol);
        }
    }

    #[test]
    fn generator_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, c in -2.0f64..2.0) {
        let mut rng = Sampler::new(seed);
        for b in bundles() {
            let q = rng.bundle_point(&b);
            let kind = b.group_kind();
            let (x, y) = (rng.algebra_element(&kind), rng.algebra_element(&kind));
            let lhs = b.infinitesimal_generator(&q, &x.scale(a).add(&y.scale(c)).unwrap()).unwrap();
            let gx = b.infinitesimal_generator(&q, &x).unwrap();
            let gy = b.infinitesimal_generator(&q, &y).unwrap();
            let comps: Vec<f64> = gx.components().iter().zip(gy.components()).map(|(u, w)| a * u + c * w).collect();
            let rhs = BundleTangent::new(q.clone(), comps).unwrap();
            prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn horizontal_lift_is_equivariant_right_inverse(seed in any::<u64>()) {
        let mut rng = Sampler::new(seed);
        let so3_bundle = PrincipalBundle::trivial(plane(), GroupKind::SO3).unwrap();
        let forms = [ConnectionForm::hopf_canonical(), ConnectionForm::hopf_perturbed(0.3), local(&so3_bundle, "polynomial")];
        for a in &forms {
            let b = a.bundle();
            let q = rng.bundle_point(b);
            let dm = rng.base_tangent(&b.project(&q).unwrap());
            let h = a.horizontal_lift(&q, &dm).unwrap();
            let pushed = b.push_forward(&h).unwrap();
            let err: f64 = pushed.components().iter().zip(dm.components()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-9);
            let g = rng.group_element(&b.group_kind());
            let lhs = a.horizontal_lift(&b.act(&g, &q).unwrap(), &dm).unwrap();
            let rhs = b.tangent_lift_action(&g, &h).unwrap();
            prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn discrete_lift_is_horizontal(seed in any::<u64>()) {
        let mut rng = Sampler::new(seed);
        let plane_r = PrincipalBundle::trivial(plane(), GroupKind::Translation(1)).unwrap();
        for ad in [rule(&plane_r, "trapezoid_x_dy"), hopf_integrated()] {
            let b = ad.bundle();
            let q = rng.bundle_point(b);
            let near = rng.nearby_bundle_point(b, &q, ad.domain().base_radius);
            let m = b.project(&near).unwrap();
            let lifted = ad.horizontal_lift(&q, &m).unwrap();
            prop_assert!(ad.eval(&q, &lifted).unwrap().distance_to_identity() <= 1e-9);
        }
    }

    #[test]
    fn discrete_curvature_degenerates_and_is_invariant(seed in any::<u64>()) {
        let mut rng = Sampler::new(seed);
        let plane_r = PrincipalBundle::trivial(plane(), GroupKind::Translation(1)).unwrap();
        for ad in [rule(&plane_r, "trapezoid_x_dy"), rule(&plane_r, "left_x_dy"), hopf_integrated()] {
            let b = ad.bundle();
            let r = ad.domain().base_radius / 2.0;
            let q0 = rng.bundle_point(b);
            let q1 = rng.nearby_bundle_point(b, &q0, r);
            let q2 = rng.nearby_bundle_point(b, &q0, r);
            prop_assert!(ad.curvature(&q0, &q0, &q2).unwrap().distance_to_identity() <= 1e-10);
            prop_assert!(ad.curvature(&q0, &q1, &q1).unwrap().distance_to_identity() <= 1e-10);
            let kind = b.group_kind();
            let moved: Vec<_> = [&q0, &q1, &q2].iter().map(|q| b.act(&rng.group_element(&kind), q).unwrap()).collect();
            let before = ad.curvature(&q0, &q1, &q2).unwrap();
            let after = ad.curvature(&moved[0], &moved[1], &moved[2]).unwrap();
            prop_assert!(before.distance(&after).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn line_integral_triangle_identity(seed in any::<u64>()) {
        let g = GroupKind::Translation(1);
        let exact = LocalOneForm::scalar(g.clone(), "d(y sin x)", |m| vec![m[1] * m[0].cos(), m[0].sin()]);
        let ad = flat_integrate_local(&BaseOneForm::new(plane(), exact).unwrap(), UNBOUNDED_RADIUS, QuadratureSpec::default()).unwrap();
        let mut rng = Sampler::new(seed);
        let b = ad.bundle().clone();
        let q0 = rng.bundle_point(&b);
        let q1 = rng.nearby_bundle_point(&b, &q0, 2.0);
        let q2 = rng.nearby_bundle_point(&b, &q0, 2.0);
        prop_assert!(ad.curvature(&q0, &q1, &q2).unwrap().distance_to_identity() <= 1e-9);
    }

    #[test]
    fn reduced_inverse_is_based_at_the_projection(seed in any::<u64>()) {
        let r = TotalRetraction::hopf(Retraction::exponential(S3).unwrap()).unwrap();
        let er = certify_equivariance(r, &PrincipalBundle::Hopf, 10, 1).unwrap();
        let rr = ReducedRetraction::new(ConnectionForm::hopf_canonical(), er).unwrap();
        let mut rng = Sampler::new(seed);
        let q = rng.bundle_point(&PrincipalBundle::Hopf);
        let x = PrincipalBundle::Hopf.project(&q).unwrap();
        let m = rng.nearby_base_point(&x, 1.0);
        let v = rr.inverse(&x, &m).unwrap();
        prop_assert!(v.base().distance(&x).unwrap() <= 1e-10);
        prop_assert!(rr.retract(&v).unwrap().distance(&m).unwrap() <= 1e-9);
    }
}

#[test]
fn flat_criterion_matches_closedness() {
    let g = GroupKind::Translation(1);
    type Coeffs = fn(&[f64]) -> Vec<f64>;
    let corpus: Vec<(&str, bool, Coeffs)> = vec![
        ("zero", true, |_| vec![0.0, 0.0]),
        ("y dx + x dy", true, |m| vec![m[1], m[0]]),
        ("2x dx", true, |m| vec![2.0 * m[0], 0.0]),
        ("d(sin x sin y)", true, |m| vec![m[0].cos() * m[1].sin(), m[0].sin() * m[1].cos()]),
        ("x dy", false, |m| vec![0.0, m[0]]),
        ("y dx - x dy", false, |m| vec![m[1], -m[0]]),
        ("x^2 dy", false, |m| vec![0.0, m[0] * m[0]]),
    ];
    let bundle = PrincipalBundle::trivial(plane(), g.clone()).unwrap();
    for (label, closed, coeffs) in corpus {
        let a = ConnectionForm::trivial_local(bundle.clone(), LocalOneForm::scalar(g.clone(), label, coeffs)).unwrap();
        let mut rng = Sampler::new(5);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let m = rng.base_point(&plane());
            let (u, w) = (rng.base_tangent(&m), rng.base_tangent(&m));
            worst = worst.max(a.curvature(&m, &u, &w).unwrap().norm());
        }
        assert_eq!(worst <= 1e-8, closed, "{label}: {worst}");
    }
}

#[test]
fn derived_forms_satisfy_connection_axioms() {
    let plane_r = PrincipalBundle::trivial(plane(), GroupKind::Translation(1)).unwrap();
    let line = PrincipalBundle::trivial(ManifoldKind::EuclideanChart(1), GroupKind::Translation(1)).unwrap();
    let so3_bundle = PrincipalBundle::trivial(plane(), GroupKind::SO3).unwrap();
    let straight = TotalRetraction::Product(Retraction::straight_line(plane()).unwrap());
    let er = certify_equivariance(straight, &so3_bundle, 20, 1).unwrap();
    let discretes = [
        rule(&plane_r, "trapezoid_x_dy"),
        rule(&line, "quadratic_sin"),
        integrate_connection(&local(&so3_bundle, "polynomial"), &er).unwrap(),
        hopf_integrated(),
    ];
    for ad in &discretes {
        let a = derive_connection(ad, DirectionalDerivativeSpec::default()).unwrap();
        let rep = a.verify_axioms(200, 3);
        assert!(rep.max_defect() <= 1e-7, "{rep}");
    }
}

#[test]
fn halving_the_step_barely_moves_derived_values() {
    let plane_r = PrincipalBundle::trivial(plane(), GroupKind::Translation(1)).unwrap();
    let line = PrincipalBundle::trivial(ManifoldKind::EuclideanChart(1), GroupKind::Translation(1)).unwrap();
    let fine = DirectionalDerivativeSpec::new(5e-5, 2).unwrap();
    for ad in [rule(&plane_r, "trapezoid_x_dy"), rule(&line, "quadratic_sin"), hopf_integrated()] {
        let a = derive_connection(&ad, DirectionalDerivativeSpec::default()).unwrap();
        let b = derive_connection(&ad, fine).unwrap();
        let mut rng = Sampler::new(8);
        for _ in 0..50 {
            let q = rng.bundle_point(ad.bundle());
            let v = rng.bundle_tangent(&q);
            let d = a.eval(&v).unwrap().sub(&b.eval(&v).unwrap()).unwrap().norm();
            assert!(d <= 1e-8, "{d}");
        }
    }
}

#[test]
fn matched_shift_is_additive() {
    // B_d of the output equals that of the reference up to rounding of the primitive differences
    let plane_r = PrincipalBundle::trivial(plane(), GroupKind::Translation(1)).unwrap();
    let reference = rule(&plane_r, "trapezoid_x_dy");
    let a = local(&plane_r, "x_dy_plus_dx2");
    let out = curvature_matched_integrate(&a, &reference, DirectionalDerivativeSpec::default(), &CurvatureMatchOptions::default()).unwrap();
    assert!(discrete_curvature_defect(&out, &reference, 100, 2) <= 1e-12);
    let torus = PrincipalBundle::trivial(plane(), GroupKind::Circle).unwrap();
    let reference = rule(&torus, "trapezoid_x_dy");
    let out = curvature_matched_integrate(&local(&torus, "x_dy_plus_dx2"), &reference, DirectionalDerivativeSpec::default(), &CurvatureMatchOptions::default()).unwrap();
    assert!(discrete_curvature_defect(&out, &reference, 100, 2) <= 1e-12);
}

#[test]
fn every_abelian_connection_integrates() {
    let spec = DirectionalDerivativeSpec::default();
    let mut cases = Vec::new();
    for group in [GroupKind::Translation(1), GroupKind::Circle] {
        let b = PrincipalBundle::trivial(plane(), group).unwrap();
        for name in ["zero", "x_dy", "closed_xy", "x_dy_plus_dx2"] {
            let r = TotalRetraction::Product(Retraction::straight_line(plane()).unwrap());
            cases.push((local(&b, name), r));
        }
    }
    for a in [ConnectionForm::hopf_canonical(), ConnectionForm::hopf_perturbed(0.1)] {
        cases.push((a, TotalRetraction::hopf(Retraction::exponential(S3).unwrap()).unwrap()));
    }
    for (a, r) in cases {
        let b = a.bundle().clone();
        let metric = build_invariant_metric(&b, &a, disconn::geometry::MetricDescriptor::standard(&b.base_kind())).unwrap();
        assert!(metric.invariance_defect(20, 1).passed());
        let er = certify_equivariance(r, &b, 20, 1).unwrap();
        let ad = integrate_connection(&a, &er).unwrap();
        let derived = derive_connection(&ad, spec).unwrap();
        let mut rng = Sampler::new(4);
        for _ in 0..20 {
            let q = rng.bundle_point(&b);
            let v = rng.bundle_tangent(&q);
            let d = derived.eval(&v).unwrap().sub(&a.eval(&v).unwrap()).unwrap().norm();
            assert!(d <= 1e-6, "{b}: {d}");
        }
    }
}
