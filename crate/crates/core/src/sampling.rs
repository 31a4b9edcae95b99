//! Seeded random samples for the verification routines.
//!
//! Distributions are uniform in coordinate boxes: base chart coordinates in
//! `[-1, 1]`, sphere points as normalized samples of the ambient cube, tangent
//! components in `[-1, 1]` (projected onto the tangent space), translations in
//! `[-2, 2]`, angles in `(−π, π]`, rotations as `exp` of a vector in `[-1, 1]³`.

use std::f64::consts::PI;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundle::{BundlePoint, BundleTangent, PrincipalBundle};
use crate::geometry::{ManifoldKind, ManifoldPoint, Retraction, TangentVector};
use crate::liegroup::{AlgebraElement, GroupElement, GroupKind};
use crate::linalg;

/// Fraction of an admissible radius used when sampling nearby points.
pub const NEARBY_FRACTION: f64 = 0.9;
/// Upper bound on the reach of nearby samples, so unbounded radii stay local.
pub const NEARBY_REACH: f64 = 1.0;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    fn cube(&mut self, n: usize, half: f64) -> Vec<f64> {
        (0..n).map(|_| self.uniform(-half, half)).collect()
    }

    pub fn base_point(&mut self, kind: &ManifoldKind) -> ManifoldPoint {
        let mut coords = Vec::with_capacity(kind.ambient_dim());
        for (atom, r) in kind.atoms() {
            match atom {
                ManifoldKind::Sphere(_) => loop {
                    let c = self.cube(r.len(), 1.0);
                    let n = linalg::norm(&c);
                    if n > 0.1 {
                        coords.extend(linalg::scale(&c, 1.0 / n));
                        break;
                    }
                },
                _ => coords.extend(self.cube(r.len(), 1.0)),
            }
        }
        ManifoldPoint::normalized(kind.clone(), coords).expect("sampled point is valid")
    }

    pub fn base_tangent(&mut self, m: &ManifoldPoint) -> TangentVector {
        let raw = self.cube(m.kind().ambient_dim(), 1.0);
        TangentVector::projected(m.clone(), &raw).expect("projected vector is tangent")
    }

    /// A point at base distance below `NEARBY_FRACTION · radius` from `m`.
    pub fn nearby_base_point(&mut self, m: &ManifoldPoint, radius: f64) -> ManifoldPoint {
        let exp = Retraction::exponential(m.kind().clone())
            .and_then(|r| r.with_domain_radius(f64::INFINITY))
            .expect("standard exponential exists");
        let mut direction = self.base_tangent(m);
        while direction.norm() < 1e-3 {
            direction = self.base_tangent(m);
        }
        let cap = radius.min(0.5 * m.kind().injectivity_radius()).min(NEARBY_REACH);
        let len = self.uniform(0.0, NEARBY_FRACTION * cap);
        let v = direction.scale(len / direction.norm());
        exp.retract(&v).expect("exponential is global")
    }

    pub fn group_element(&mut self, kind: &GroupKind) -> GroupElement {
        match kind {
            GroupKind::Translation(k) => GroupElement::Translation(self.cube(*k, 2.0)),
            GroupKind::Circle => GroupElement::circle(self.uniform(-PI, PI)),
            GroupKind::Torus(n) => GroupElement::torus(&self.cube(*n, PI)),
            GroupKind::SO3 => AlgebraElement::new(GroupKind::SO3, self.cube(3, 1.0))
                .expect("three coordinates")
                .exp(),
            GroupKind::Product(fs) => GroupElement::Product(fs.iter().map(|f| self.group_element(f)).collect()),
        }
    }

    pub fn algebra_element(&mut self, kind: &GroupKind) -> AlgebraElement {
        AlgebraElement::new(kind.clone(), self.cube(kind.dim(), 1.0)).expect("matching dimension")
    }

    pub fn bundle_point(&mut self, bundle: &PrincipalBundle) -> BundlePoint {
        match bundle {
            PrincipalBundle::Trivial { base, group } => {
                BundlePoint::trivial(self.base_point(base), self.group_element(group))
            }
            PrincipalBundle::Hopf => loop {
                let c = self.cube(4, 1.0);
                if linalg::norm(&c) > 0.1 {
                    break BundlePoint::hopf_normalized([c[0], c[1], c[2], c[3]])
                        .expect("nonzero sample");
                }
            },
        }
    }

    pub fn bundle_tangent(&mut self, q: &BundlePoint) -> BundleTangent {
        match q {
            BundlePoint::Trivial { base, fiber } => {
                let dm = self.base_tangent(base);
                let xi = self.algebra_element(&fiber.kind());
                BundleTangent::trivial(q.clone(), &dm, &xi).expect("valid parts")
            }
            BundlePoint::Hopf(p) => {
                let raw = self.cube(4, 1.0);
                let s = linalg::dot(p, &raw);
                let c = raw.iter().zip(p).map(|(r, pi)| r - s * pi).collect();
                BundleTangent::new(q.clone(), c).expect("projected vector is tangent")
            }
        }
    }

    /// A point of the fiber over a base point near `φ(q)`.
    pub fn nearby_bundle_point(&mut self, bundle: &PrincipalBundle, q: &BundlePoint, radius: f64) -> BundlePoint {
        let m = bundle.project(q).expect("point on bundle");
        let m2 = self.nearby_base_point(&m, radius);
        let s = bundle.section(&m2).expect("section exists");
        let g = self.group_element(&bundle.group_kind());
        bundle.act(&g, &s).expect("group of the bundle")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::S2;

    #[test]
    fn seeded_streams_repeat() {
        let mut a = Sampler::new(7);
        let mut b = Sampler::new(7);
        for _ in 0..10 {
            assert_eq!(a.base_point(&S2), b.base_point(&S2));
        }
    }

    #[test]
    fn nearby_points_respect_radius() {
        let mut s = Sampler::new(1);
        for _ in 0..100 {
            let m = s.base_point(&S2);
            let n = s.nearby_base_point(&m, 0.4);
            assert!(m.distance(&n).unwrap() < 0.4 * NEARBY_FRACTION + 1e-12);
        }
    }
}
