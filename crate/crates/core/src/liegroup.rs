//! Matrix Lie groups and their Lie algebras.
//!
//! Structure groups are translation groups `ℝᵏ`, the circle `U(1)`, tori `Tⁿ`,
//! the rotation group `SO(3)` and finite products of these. Angles of circle and
//! torus factors are always stored reduced to `(−π, π]`. Algebra elements are
//! flat coordinate vectors; for `SO(3)` this is the hat-map vector and for
//! products the concatenation of the factors.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix3, Vector3};

use crate::error::{mismatch, Error, Result};
use crate::linalg;

/// Rotation angles at or beyond `π − LOG_ANGLE_MARGIN` are outside the domain of
/// [`GroupElement::log`].
pub const LOG_ANGLE_MARGIN: f64 = 1e-6;

/// Orthogonality tolerance for accepting a matrix as an element of `SO(3)`.
pub const SO3_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Translation(usize),
    Circle,
    Torus(usize),
    SO3,
    Product(Vec<GroupKind>),
}

impl GroupKind {
    pub fn dim(&self) -> usize {
        match self {
            GroupKind::Translation(k) | GroupKind::Torus(k) => *k,
            GroupKind::Circle => 1,
            GroupKind::SO3 => 3,
            GroupKind::Product(fs) => fs.iter().map(GroupKind::dim).sum(),
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GroupKind::SO3 => false,
            GroupKind::Product(fs) => fs.iter().all(GroupKind::is_abelian),
            _ => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GroupKind::Translation(0) | GroupKind::Torus(0) => Err(Error::InvalidInput(
                "group dimension must be at least 1".into(),
            )),
            GroupKind::Product(fs) if fs.is_empty() => Err(Error::InvalidInput(
                "product group needs at least one factor".into(),
            )),
            GroupKind::Product(fs) => fs.iter().try_for_each(GroupKind::validate),
            _ => Ok(()),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupKind::Translation(k) => GroupElement::Translation(vec![0.0; *k]),
            GroupKind::Circle => GroupElement::Circle(0.0),
            GroupKind::Torus(n) => GroupElement::Torus(vec![0.0; *n]),
            GroupKind::SO3 => GroupElement::SO3(Matrix3::identity()),
            GroupKind::Product(fs) => {
                GroupElement::Product(fs.iter().map(GroupKind::identity).collect())
            }
        }
    }

    /// Parses a scalar tag: `R^k`, `U1`, `T^n` or `SO3`.
    pub fn from_tag(tag: &str) -> Result<Self> {
        let tag = tag.trim();
        let parse_dim = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("bad group tag `{tag}`")))
        };
        let kind = match tag {
            "U1" => GroupKind::Circle,
            "SO3" => GroupKind::SO3,
            _ if tag.starts_with("R^") => GroupKind::Translation(parse_dim(&tag[2..])?),
            _ if tag.starts_with("T^") => GroupKind::Torus(parse_dim(&tag[2..])?),
            _ => return Err(Error::InvalidInput(format!("unknown group tag `{tag}`"))),
        };
        kind.validate()?;
        Ok(kind)
    }

    /// Coordinate ranges of the factors inside a flat algebra vector.
    fn factor_ranges(factors: &[GroupKind]) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        factors
            .iter()
            .map(|f| {
                let r = start..start + f.dim();
                start = r.end;
                r
            })
            .collect()
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Translation(k) => write!(f, "R^{k}"),
            GroupKind::Circle => write!(f, "U1"),
            GroupKind::Torus(n) => write!(f, "T^{n}"),
            GroupKind::SO3 => write!(f, "SO3"),
            GroupKind::Product(fs) => {
                let parts: Vec<String> = fs.iter().map(ToString::to_string).collect();
                write!(f, "product({})", parts.join(","))
            }
        }
    }
}

/// Reduces an angle to `(−π, π]`.
pub fn reduce_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let r = theta - 2.0 * PI * (theta / (2.0 * PI)).round();
    if r <= -PI {
        r + 2.0 * PI
    } else if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

fn hat(x: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -x.z, x.y, x.z, 0.0, -x.x, -x.y, x.x, 0.0)
}

fn so3_exp(x: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = x.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < 1e-4 {
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let k = hat(x);
    Matrix3::identity() + k * a + k * k * b
}

fn so3_log(r: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let skew = (r - r.transpose()) * 0.5;
    let v = Vector3::new(skew[(2, 1)], skew[(0, 2)], skew[(1, 0)]);
    let sin = v.norm();
    let cos = 0.5 * (r.trace() - 1.0);
    let theta = sin.atan2(cos);
    if theta > PI - LOG_ANGLE_MARGIN {
        return Err(Error::OutsideInjectivityRadius { angle: theta });
    }
    let factor = if sin < 1e-8 {
        1.0 + theta * theta / 6.0
    } else {
        theta / sin
    };
    Ok(v * factor)
}

#[derive(Clone, Debug, PartialEq)]
pub enum GroupElement {
    Translation(Vec<f64>),
    Circle(f64),
    Torus(Vec<f64>),
    SO3(Matrix3<f64>),
    Product(Vec<GroupElement>),
}

impl GroupElement {
    pub fn circle(theta: f64) -> Self {
        GroupElement::Circle(reduce_angle(theta))
    }

    pub fn torus(angles: &[f64]) -> Self {
        GroupElement::Torus(angles.iter().copied().map(reduce_angle).collect())
    }

    pub fn so3(m: Matrix3<f64>) -> Result<Self> {
        let defect = (m.transpose() * m - Matrix3::identity()).norm();
        if defect > SO3_TOLERANCE || m.determinant() <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "matrix is not a rotation (orthogonality defect {defect:e})"
            )));
        }
        Ok(GroupElement::SO3(m))
    }

    /// Rotation by `angle` about the `z` axis.
    pub fn rot_z(angle: f64) -> Self {
        GroupElement::SO3(so3_exp(&Vector3::new(0.0, 0.0, angle)))
    }

    pub fn kind(&self) -> GroupKind {
        match self {
            GroupElement::Translation(v) => GroupKind::Translation(v.len()),
            GroupElement::Circle(_) => GroupKind::Circle,
            GroupElement::Torus(v) => GroupKind::Torus(v.len()),
            GroupElement::SO3(_) => GroupKind::SO3,
            GroupElement::Product(fs) => GroupKind::Product(fs.iter().map(Self::kind).collect()),
        }
    }

    /// Group product `self · other`.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        use GroupElement as G;
        Ok(match (self, other) {
            (G::Translation(a), G::Translation(b)) if a.len() == b.len() => {
                G::Translation(linalg::add(a, b))
            }
            (G::Circle(a), G::Circle(b)) => G::circle(a + b),
            (G::Torus(a), G::Torus(b)) if a.len() == b.len() => G::torus(&linalg::add(a, b)),
            (G::SO3(a), G::SO3(b)) => G::SO3(a * b),
            (G::Product(a), G::Product(b)) if a.len() == b.len() => G::Product(
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.compose(y))
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(mismatch(self.kind(), other.kind())),
        })
    }

    pub fn inverse(&self) -> GroupElement {
        use GroupElement as G;
        match self {
            G::Translation(a) => G::Translation(linalg::scale(a, -1.0)),
            G::Circle(a) => G::circle(-a),
            G::Torus(a) => G::torus(&linalg::scale(a, -1.0)),
            G::SO3(r) => G::SO3(r.transpose()),
            G::Product(fs) => G::Product(fs.iter().map(Self::inverse).collect()),
        }
    }

    pub fn log(&self) -> Result<AlgebraElement> {
        let kind = self.kind();
        let coords = self.log_coords()?;
        Ok(AlgebraElement { kind, coords })
    }

    fn log_coords(&self) -> Result<Vec<f64>> {
        use GroupElement as G;
        Ok(match self {
            G::Translation(a) | G::Torus(a) => a.clone(),
            G::Circle(a) => vec![*a],
            G::SO3(r) => so3_log(r)?.iter().copied().collect(),
            G::Product(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    out.extend(f.log_coords()?);
                }
                out
            }
        })
    }

    /// Adjoint action `Ad_g(x)`; the identity for abelian kinds.
    pub fn adjoint(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        let kind = self.kind();
        if kind != x.kind {
            return Err(mismatch(kind, &x.kind));
        }
        let coords = self.adjoint_coords(&x.coords);
        Ok(AlgebraElement { kind, coords })
    }

    fn adjoint_coords(&self, x: &[f64]) -> Vec<f64> {
        match self {
            GroupElement::SO3(r) => (r * Vector3::from_column_slice(x)).iter().copied().collect(),
            GroupElement::Product(fs) => {
                let kinds: Vec<GroupKind> = fs.iter().map(Self::kind).collect();
                let mut out = Vec::with_capacity(x.len());
                for (f, r) in fs.iter().zip(GroupKind::factor_ranges(&kinds)) {
                    out.extend(f.adjoint_coords(&x[r]));
                }
                out
            }
            _ => x.to_vec(),
        }
    }

    /// A metric on the group used for defect measurements: wrapped angle
    /// differences on circle factors, Frobenius distance on `SO(3)`.
    pub fn distance(&self, other: &GroupElement) -> Result<f64> {
        Ok(self.distance_sq(other)?.sqrt())
    }

    fn distance_sq(&self, other: &GroupElement) -> Result<f64> {
        use GroupElement as G;
        Ok(match (self, other) {
            (G::Translation(a), G::Translation(b)) if a.len() == b.len() => {
                linalg::dist(a, b).powi(2)
            }
            (G::Circle(a), G::Circle(b)) => reduce_angle(a - b).powi(2),
            (G::Torus(a), G::Torus(b)) if a.len() == b.len() => a
                .iter()
                .zip(b)
                .map(|(x, y)| reduce_angle(x - y).powi(2))
                .sum(),
            (G::SO3(a), G::SO3(b)) => (a - b).norm_squared(),
            (G::Product(a), G::Product(b)) if a.len() == b.len() => {
                let mut s = 0.0;
                for (x, y) in a.iter().zip(b) {
                    s += x.distance_sq(y)?;
                }
                s
            }
            _ => return Err(mismatch(self.kind(), other.kind())),
        })
    }

    pub fn distance_to_identity(&self) -> f64 {
        self.distance(&self.kind().identity())
            .expect("identity has the same kind")
    }

    /// Additive coordinates of an abelian element (angles for circle factors).
    /// `None` for groups with an `SO(3)` factor.
    pub fn abelian_coords(&self) -> Option<Vec<f64>> {
        use GroupElement as G;
        match self {
            G::Translation(a) | G::Torus(a) => Some(a.clone()),
            G::Circle(a) => Some(vec![*a]),
            G::SO3(_) => None,
            G::Product(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    out.extend(f.abelian_coords()?);
                }
                Some(out)
            }
        }
    }

    /// Builds an abelian element of `kind` from additive coordinates.
    pub fn from_abelian_coords(kind: &GroupKind, coords: &[f64]) -> Result<Self> {
        if !kind.is_abelian() {
            return Err(Error::NonAbelian(kind.to_string()));
        }
        AlgebraElement::new(kind.clone(), coords.to_vec()).map(|x| x.exp())
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::SO3(r) => {
                let rows: Vec<String> = (0..3)
                    .map(|i| format!("[{:.6}, {:.6}, {:.6}]", r[(i, 0)], r[(i, 1)], r[(i, 2)]))
                    .collect();
                write!(f, "SO3[{}]", rows.join(", "))
            }
            GroupElement::Product(fs) => {
                let parts: Vec<String> = fs.iter().map(ToString::to_string).collect();
                write!(f, "({})", parts.join(", "))
            }
            other => {
                let c = other.abelian_coords().unwrap_or_default();
                let parts: Vec<String> = c.iter().map(|x| format!("{x:.6}")).collect();
                write!(f, "{}[{}]", other.kind(), parts.join(", "))
            }
        }
    }
}

/// Element of the Lie algebra of a [`GroupKind`], in flat coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    kind: GroupKind,
    coords: Vec<f64>,
}

impl AlgebraElement {
    pub fn new(kind: GroupKind, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != kind.dim() {
            return Err(Error::InvalidInput(format!(
                "{} algebra has dimension {}, got {} coordinates",
                kind,
                kind.dim(),
                coords.len()
            )));
        }
        Ok(Self { kind, coords })
    }

    pub fn zero(kind: &GroupKind) -> Self {
        Self {
            kind: kind.clone(),
            coords: vec![0.0; kind.dim()],
        }
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.coords)
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.same_kind(other)?;
        Ok(Self {
            kind: self.kind.clone(),
            coords: linalg::add(&self.coords, &other.coords),
        })
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.same_kind(other)?;
        Ok(Self {
            kind: self.kind.clone(),
            coords: linalg::sub(&self.coords, &other.coords),
        })
    }

    pub fn scale(&self, s: f64) -> AlgebraElement {
        Self {
            kind: self.kind.clone(),
            coords: linalg::scale(&self.coords, s),
        }
    }

    fn same_kind(&self, other: &AlgebraElement) -> Result<()> {
        if self.kind != other.kind {
            return Err(mismatch(&self.kind, &other.kind));
        }
        Ok(())
    }

    /// One-parameter-subgroup exponential.
    pub fn exp(&self) -> GroupElement {
        exp_coords(&self.kind, &self.coords)
    }

    /// Lie bracket; zero on abelian factors, cross product on `so(3)`.
    pub fn bracket(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.same_kind(other)?;
        Ok(Self {
            kind: self.kind.clone(),
            coords: bracket_coords(&self.kind, &self.coords, &other.coords),
        })
    }
}

fn exp_coords(kind: &GroupKind, x: &[f64]) -> GroupElement {
    match kind {
        GroupKind::Translation(_) => GroupElement::Translation(x.to_vec()),
        GroupKind::Circle => GroupElement::circle(x[0]),
        GroupKind::Torus(_) => GroupElement::torus(x),
        GroupKind::SO3 => GroupElement::SO3(so3_exp(&Vector3::from_column_slice(x))),
        GroupKind::Product(fs) => GroupElement::Product(
            fs.iter()
                .zip(GroupKind::factor_ranges(fs))
                .map(|(f, r)| exp_coords(f, &x[r]))
                .collect(),
        ),
    }
}

fn bracket_coords(kind: &GroupKind, x: &[f64], y: &[f64]) -> Vec<f64> {
    match kind {
        GroupKind::SO3 => Vector3::from_column_slice(x)
            .cross(&Vector3::from_column_slice(y))
            .iter()
            .copied()
            .collect(),
        GroupKind::Product(fs) => {
            let mut out = Vec::with_capacity(x.len());
            for (f, r) in fs.iter().zip(GroupKind::factor_ranges(fs)) {
                out.extend(bracket_coords(f, &x[r.clone()], &y[r]));
            }
            out
        }
        _ => vec![0.0; x.len()],
    }
}
