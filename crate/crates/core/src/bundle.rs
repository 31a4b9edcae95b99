//! Principal bundles: trivial products `M × G` and the Hopf fibration
//! `S³ → S²`, both with left actions.
//!
//! Tangent vectors to a trivial bundle are stored as the ambient base components
//! followed by the right-trivialized fiber velocity `δg·g⁻¹` in algebra
//! coordinates; with this convention generators are `(0, ξ)` and the lifted
//! action only applies `Ad_h` to the fiber part. Hopf tangents are ambient
//! vectors in `ℝ⁴`, ordered `(Re z₁, Im z₁, Re z₂, Im z₂)`.

use std::fmt;

use crate::error::{mismatch, Error, Result};
use crate::geometry::{ManifoldKind, ManifoldPoint, TangentVector, CONSTRAINT_TOLERANCE, S2};
use crate::liegroup::{AlgebraElement, GroupElement, GroupKind};
use crate::linalg;

/// Base points closer than this are treated as the same fiber.
pub const SAME_FIBER_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PrincipalBundle {
    Trivial { base: ManifoldKind, group: GroupKind },
    Hopf,
}

impl fmt::Display for PrincipalBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrincipalBundle::Trivial { base, group } => write!(f, "{base} x {group}"),
            PrincipalBundle::Hopf => write!(f, "hopf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BundlePoint {
    Trivial { base: ManifoldPoint, fiber: GroupElement },
    Hopf([f64; 4]),
}

impl BundlePoint {
    pub fn trivial(base: ManifoldPoint, fiber: GroupElement) -> Self {
        BundlePoint::Trivial { base, fiber }
    }

    pub fn hopf(q: [f64; 4]) -> Result<Self> {
        let n = linalg::norm(&q);
        if (n - 1.0).abs() > CONSTRAINT_TOLERANCE || q.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "Hopf point has norm {n}, expected 1"
            )));
        }
        Ok(BundlePoint::Hopf(q))
    }

    /// Radial projection onto `S³`.
    pub fn hopf_normalized(q: [f64; 4]) -> Result<Self> {
        let n = linalg::norm(&q);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::OutsideDomain("degenerate Hopf point".into()));
        }
        Ok(BundlePoint::Hopf(q.map(|c| c / n)))
    }

    pub fn bundle(&self) -> PrincipalBundle {
        match self {
            BundlePoint::Trivial { base, fiber } => PrincipalBundle::Trivial {
                base: base.kind().clone(),
                group: fiber.kind(),
            },
            BundlePoint::Hopf(_) => PrincipalBundle::Hopf,
        }
    }
}

impl fmt::Display for BundlePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BundlePoint::Trivial { base, fiber } => write!(f, "({base}, {fiber})"),
            BundlePoint::Hopf(q) => write!(
                f,
                "({:.6}{:+.6}i, {:.6}{:+.6}i)",
                q[0], q[1], q[2], q[3]
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BundleTangent {
    point: BundlePoint,
    components: Vec<f64>,
}

impl BundleTangent {
    pub fn new(point: BundlePoint, components: Vec<f64>) -> Result<Self> {
        match &point {
            BundlePoint::Trivial { base, fiber } => {
                let n = base.kind().ambient_dim();
                if components.len() != n + fiber.kind().dim() {
                    return Err(Error::InvalidInput("tangent has wrong length".into()));
                }
                TangentVector::new(base.clone(), components[..n].to_vec())?;
            }
            BundlePoint::Hopf(q) => {
                if components.len() != 4 {
                    return Err(Error::InvalidInput("Hopf tangent needs 4 components".into()));
                }
                let s = linalg::dot(q, &components);
                if s.abs() > CONSTRAINT_TOLERANCE * linalg::norm(&components).max(1.0) {
                    return Err(Error::InvalidInput(format!(
                        "vector is not tangent to S3 (normal part {s:e})"
                    )));
                }
            }
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite tangent component".into()));
        }
        Ok(Self { point, components })
    }

    /// Tangent to `M × G` from a base part and a right-trivialized fiber part.
    pub fn trivial(point: BundlePoint, base: &TangentVector, fiber: &AlgebraElement) -> Result<Self> {
        let mut c = base.components().to_vec();
        c.extend_from_slice(fiber.coords());
        Self::new(point, c)
    }

    /// Removes the normal parts of `components`: on sphere factors of a trivial
    /// base and on `S³`.
    pub fn projected(point: BundlePoint, components: &[f64]) -> Result<Self> {
        let c = match &point {
            BundlePoint::Trivial { base, .. } => {
                let n = base.kind().ambient_dim();
                if components.len() < n {
                    return Err(Error::InvalidInput("tangent has wrong length".into()));
                }
                let dm = TangentVector::projected(base.clone(), &components[..n])?;
                let mut c = dm.components().to_vec();
                c.extend_from_slice(&components[n..]);
                c
            }
            BundlePoint::Hopf(q) => {
                if components.len() != 4 {
                    return Err(Error::InvalidInput("Hopf tangent needs 4 components".into()));
                }
                let s = linalg::dot(q, components);
                components.iter().zip(q).map(|(c, qi)| c - s * qi).collect()
            }
        };
        Self::new(point, c)
    }

    pub fn zero(point: BundlePoint) -> Self {
        let n = match &point {
            BundlePoint::Trivial { base, fiber } => base.kind().ambient_dim() + fiber.kind().dim(),
            BundlePoint::Hopf(_) => 4,
        };
        Self {
            point,
            components: vec![0.0; n],
        }
    }

    pub fn point(&self) -> &BundlePoint {
        &self.point
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.components)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            point: self.point.clone(),
            components: linalg::scale(&self.components, s),
        }
    }

    /// Base and fiber parts of a tangent to a trivial bundle.
    pub fn split(&self) -> Result<(TangentVector, AlgebraElement)> {
        match &self.point {
            BundlePoint::Trivial { base, fiber } => {
                let n = base.kind().ambient_dim();
                Ok((
                    TangentVector::new(base.clone(), self.components[..n].to_vec())?,
                    AlgebraElement::new(fiber.kind(), self.components[n..].to_vec())?,
                ))
            }
            BundlePoint::Hopf(_) => Err(Error::UnsupportedPresentation(
                "Hopf tangents have no base/fiber split".into(),
            )),
        }
    }

    /// Component-wise difference; both tangents must share their base point.
    pub fn distance(&self, other: &BundleTangent) -> Result<f64> {
        if self.components.len() != other.components.len() {
            return Err(Error::BasePointMismatch);
        }
        Ok(linalg::dist(&self.components, &other.components))
    }
}

/// Admissible pairs of a discrete connection: base distance below `base_radius`.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainSpec {
    pub bundle: PrincipalBundle,
    pub base_radius: f64,
}

impl DomainSpec {
    pub fn new(bundle: PrincipalBundle, base_radius: f64) -> Result<Self> {
        if !(base_radius > 0.0) {
            return Err(Error::InvalidInput("domain radius must be positive".into()));
        }
        Ok(Self { bundle, base_radius })
    }

    pub fn contains(&self, q1: &BundlePoint, q2: &BundlePoint) -> bool {
        let (Ok(m1), Ok(m2)) = (self.bundle.project(q1), self.bundle.project(q2)) else {
            return false;
        };
        m1.distance(&m2).is_ok_and(|d| d < self.base_radius)
    }

    pub(crate) fn require(&self, q1: &BundlePoint, q2: &BundlePoint) -> Result<()> {
        if self.contains(q1, q2) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(format!(
                "pair is outside the domain of base radius {}",
                self.base_radius
            )))
        }
    }
}

fn times_i(q: &[f64]) -> [f64; 4] {
    [-q[1], q[0], -q[3], q[2]]
}

fn rotate(theta: f64, v: &[f64]) -> [f64; 4] {
    let (s, c) = theta.sin_cos();
    let iv = times_i(v);
    [0, 1, 2, 3].map(|k| c * v[k] + s * iv[k])
}

/// `⟨a, b⟩ = ā₁b₁ + ā₂b₂` as `(re, im)`.
pub(crate) fn hermitian(a: &[f64], b: &[f64]) -> (f64, f64) {
    let re = linalg::dot(a, b);
    let im = a[0] * b[1] - a[1] * b[0] + a[2] * b[3] - a[3] * b[2];
    (re, im)
}

/// Jacobian of the Hopf projection at `q` (3 × 4, rows).
pub(crate) fn hopf_jacobian(q: &[f64]) -> [[f64; 4]; 3] {
    let [a, b, c, d] = [q[0], q[1], q[2], q[3]];
    [
        [2.0 * c, 2.0 * d, 2.0 * a, 2.0 * b],
        [-2.0 * d, 2.0 * c, 2.0 * b, -2.0 * a],
        [2.0 * a, 2.0 * b, -2.0 * c, -2.0 * d],
    ]
}

fn hopf_map(q: &[f64]) -> [f64; 3] {
    let [a, b, c, d] = [q[0], q[1], q[2], q[3]];
    [
        2.0 * (a * c + b * d),
        2.0 * (b * c - a * d),
        a * a + b * b - c * c - d * d,
    ]
}

impl PrincipalBundle {
    pub fn trivial(base: ManifoldKind, group: GroupKind) -> Result<Self> {
        base.validate()?;
        group.validate()?;
        Ok(PrincipalBundle::Trivial { base, group })
    }

    pub fn base_kind(&self) -> ManifoldKind {
        match self {
            PrincipalBundle::Trivial { base, .. } => base.clone(),
            PrincipalBundle::Hopf => S2,
        }
    }

    pub fn group_kind(&self) -> GroupKind {
        match self {
            PrincipalBundle::Trivial { group, .. } => group.clone(),
            PrincipalBundle::Hopf => GroupKind::Circle,
        }
    }

    pub(crate) fn check_point(&self, q: &BundlePoint) -> Result<()> {
        let found = q.bundle();
        if &found != self {
            return Err(Error::BundleMismatch {
                expected: self.to_string(),
                found: found.to_string(),
            });
        }
        Ok(())
    }

    fn check_group(&self, g: &GroupElement) -> Result<()> {
        let kind = g.kind();
        if kind != self.group_kind() {
            return Err(mismatch(self.group_kind(), kind));
        }
        Ok(())
    }

    pub fn project(&self, q: &BundlePoint) -> Result<ManifoldPoint> {
        self.check_point(q)?;
        match q {
            BundlePoint::Trivial { base, .. } => Ok(base.clone()),
            BundlePoint::Hopf(q) => ManifoldPoint::normalized(S2, hopf_map(q).to_vec()),
        }
    }

    pub fn act(&self, g: &GroupElement, q: &BundlePoint) -> Result<BundlePoint> {
        self.check_point(q)?;
        self.check_group(g)?;
        match (q, g) {
            (BundlePoint::Trivial { base, fiber }, _) => Ok(BundlePoint::Trivial {
                base: base.clone(),
                fiber: g.compose(fiber)?,
            }),
            (BundlePoint::Hopf(q), GroupElement::Circle(theta)) => {
                BundlePoint::hopf_normalized(rotate(*theta, q))
            }
            _ => Err(mismatch(self.group_kind(), g.kind())),
        }
    }

    /// The group element carrying `q1` to `q2` within a fiber.
    pub fn fiber_translation(&self, q1: &BundlePoint, q2: &BundlePoint) -> Result<GroupElement> {
        let distance = self.project(q1)?.distance(&self.project(q2)?)?;
        if distance > SAME_FIBER_TOLERANCE {
            return Err(Error::NotSameFiber { distance });
        }
        match (q1, q2) {
            (BundlePoint::Trivial { fiber: g1, .. }, BundlePoint::Trivial { fiber: g2, .. }) => {
                g2.compose(&g1.inverse())
            }
            (BundlePoint::Hopf(a), BundlePoint::Hopf(b)) => {
                let (re, im) = hermitian(a, b);
                Ok(GroupElement::circle(im.atan2(re)))
            }
            _ => unreachable!("check_point guarantees matching variants"),
        }
    }

    pub fn infinitesimal_generator(&self, q: &BundlePoint, xi: &AlgebraElement) -> Result<BundleTangent> {
        self.check_point(q)?;
        if xi.kind() != &self.group_kind() {
            return Err(mismatch(self.group_kind(), xi.kind()));
        }
        match q {
            BundlePoint::Trivial { base, .. } => {
                let mut c = vec![0.0; base.kind().ambient_dim()];
                c.extend_from_slice(xi.coords());
                Ok(BundleTangent {
                    point: q.clone(),
                    components: c,
                })
            }
            BundlePoint::Hopf(p) => Ok(BundleTangent {
                point: q.clone(),
                components: times_i(p).map(|c| c * xi.coords()[0]).to_vec(),
            }),
        }
    }

    /// Pushforward `T l_g (v)`.
    pub fn tangent_lift_action(&self, g: &GroupElement, v: &BundleTangent) -> Result<BundleTangent> {
        let point = self.act(g, &v.point)?;
        let components = match (&v.point, g) {
            (BundlePoint::Trivial { base, .. }, _) => {
                let n = base.kind().ambient_dim();
                let fiber = AlgebraElement::new(g.kind(), v.components[n..].to_vec())?;
                let mut c = v.components[..n].to_vec();
                c.extend(g.adjoint(&fiber)?.into_coords());
                c
            }
            (BundlePoint::Hopf(_), GroupElement::Circle(theta)) => rotate(*theta, &v.components).to_vec(),
            _ => return Err(mismatch(self.group_kind(), g.kind())),
        };
        Ok(BundleTangent { point, components })
    }

    /// `Tφ(v)`.
    pub fn push_forward(&self, v: &BundleTangent) -> Result<TangentVector> {
        let m = self.project(&v.point)?;
        match &v.point {
            BundlePoint::Trivial { base, .. } => {
                let n = base.kind().ambient_dim();
                TangentVector::new(m, v.components[..n].to_vec())
            }
            BundlePoint::Hopf(q) => {
                let jac = hopf_jacobian(q);
                let image: Vec<f64> = jac.iter().map(|row| linalg::dot(row, &v.components)).collect();
                TangentVector::projected(m, &image)
            }
        }
    }

    /// Some preimage of `δm` under `Tφ` at `q`: `(δm, 0)` on trivial bundles and
    /// `¼ Jᵀ δm` on the Hopf bundle, which is orthogonal to the fiber.
    pub fn lift_tangent(&self, q: &BundlePoint, dm: &TangentVector) -> Result<BundleTangent> {
        let m = self.project(q)?;
        crate::geometry::same_base(&m, dm.base())?;
        match q {
            BundlePoint::Trivial { fiber, .. } => {
                let mut c = dm.components().to_vec();
                c.extend(std::iter::repeat_n(0.0, fiber.kind().dim()));
                Ok(BundleTangent {
                    point: q.clone(),
                    components: c,
                })
            }
            BundlePoint::Hopf(p) => {
                let jac = hopf_jacobian(p);
                let mut c = [0.0; 4];
                for (row, dmi) in jac.iter().zip(dm.components()) {
                    for k in 0..4 {
                        c[k] += 0.25 * row[k] * dmi;
                    }
                }
                // remove roundoff normal to S³
                let s = linalg::dot(p, &c);
                let c: Vec<f64> = c.iter().zip(p).map(|(ci, pi)| ci - s * pi).collect();
                Ok(BundleTangent {
                    point: q.clone(),
                    components: c,
                })
            }
        }
    }

    /// A point in the fiber over `m`: `(m, e)` on trivial bundles; on the Hopf
    /// bundle, a point with real `z₁` on the northern hemisphere and real `z₂`
    /// on the southern one.
    pub fn section(&self, m: &ManifoldPoint) -> Result<BundlePoint> {
        let kind = self.base_kind();
        if m.kind() != &kind {
            return Err(mismatch(kind, m.kind()));
        }
        match self {
            PrincipalBundle::Trivial { group, .. } => Ok(BundlePoint::Trivial {
                base: m.clone(),
                fiber: group.identity(),
            }),
            PrincipalBundle::Hopf => {
                let [a, b, c] = [m.coords()[0], m.coords()[1], m.coords()[2]];
                let q = if c >= 0.0 {
                    let r = ((1.0 + c) / 2.0).sqrt();
                    [r, 0.0, a / (2.0 * r), -b / (2.0 * r)]
                } else {
                    let s = ((1.0 - c) / 2.0).sqrt();
                    [a / (2.0 * s), b / (2.0 * s), s, 0.0]
                };
                BundlePoint::hopf_normalized(q)
            }
        }
    }

    /// Smooth curve through `v.point()` with velocity `v`, evaluated at `t`.
    pub fn curve(&self, v: &BundleTangent, t: f64) -> Result<BundlePoint> {
        self.check_point(&v.point)?;
        match &v.point {
            BundlePoint::Trivial { base, fiber } => {
                let n = base.kind().ambient_dim();
                let m = base_curve(base, &v.components[..n], t)?;
                let xi = AlgebraElement::new(fiber.kind(), linalg::scale(&v.components[n..], t))?;
                Ok(BundlePoint::Trivial {
                    base: m,
                    fiber: xi.exp().compose(fiber)?,
                })
            }
            BundlePoint::Hopf(q) => {
                BundlePoint::hopf_normalized([0, 1, 2, 3].map(|k| q[k] + t * v.components[k]))
            }
        }
    }

    /// Coordinates of `q` relative to `origin` whose differential at `origin`
    /// reproduces tangent components: base coordinate difference and
    /// `log(g·g₀⁻¹)` on trivial bundles, ambient difference on Hopf.
    pub fn local_coordinates(&self, origin: &BundlePoint, q: &BundlePoint) -> Result<Vec<f64>> {
        self.check_point(origin)?;
        self.check_point(q)?;
        match (origin, q) {
            (
                BundlePoint::Trivial { base: m0, fiber: g0 },
                BundlePoint::Trivial { base: m, fiber: g },
            ) => {
                let mut c = linalg::sub(m.coords(), m0.coords());
                c.extend(g.compose(&g0.inverse())?.log()?.into_coords());
                Ok(c)
            }
            (BundlePoint::Hopf(a), BundlePoint::Hopf(b)) => Ok(linalg::sub(b, a)),
            _ => unreachable!("check_point guarantees matching variants"),
        }
    }

    /// Total-space distance used for defect measurements.
    pub fn distance(&self, q1: &BundlePoint, q2: &BundlePoint) -> Result<f64> {
        self.check_point(q1)?;
        self.check_point(q2)?;
        match (q1, q2) {
            (
                BundlePoint::Trivial { base: m1, fiber: g1 },
                BundlePoint::Trivial { base: m2, fiber: g2 },
            ) => Ok(m1.distance(m2)?.hypot(g1.distance(g2)?)),
            (BundlePoint::Hopf(a), BundlePoint::Hopf(b)) => Ok(linalg::dist(a, b)),
            _ => unreachable!("check_point guarantees matching variants"),
        }
    }
}

/// `m + t·δm` on charts, radially renormalized on sphere factors.
pub(crate) fn base_curve(m: &ManifoldPoint, dm: &[f64], t: f64) -> Result<ManifoldPoint> {
    let c = linalg::axpy(m.coords(), t, dm);
    ManifoldPoint::normalized(m.kind().clone(), c)
}
