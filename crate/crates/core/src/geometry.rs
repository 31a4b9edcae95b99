//! Manifolds, Riemannian metrics and retractions.
//!
//! Points of a [`ManifoldKind::Sphere`] are stored as ambient unit vectors and
//! its tangent vectors as ambient vectors orthogonal to the base point. Products
//! concatenate the coordinates of their factors.
//!
//! Retractions are inverted by Newton's method in a chart centered at the base
//! point: the identity chart for Euclidean factors, and for sphere factors the
//! stereographic projection from the antipode, scaled so that its differential at
//! the center is the identity.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::diff;
use crate::error::{mismatch, Error, Result};
use crate::linalg;
use crate::verify::VerificationReport;

/// Stand-in for an infinite radius on Euclidean charts.
pub const UNBOUNDED_RADIUS: f64 = 1e12;
/// Tolerance of the unit-norm and tangency constraints.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-12;
pub const NEWTON_TOLERANCE: f64 = 1e-10;
pub const NEWTON_MAX_ITERATIONS: usize = 50;
pub const RETRACTION_AXIOM_TOLERANCE: f64 = 1e-7;

const NEWTON_POLISH: f64 = 1e-14;
const NEWTON_JACOBIAN_STEP: f64 = 1e-6;
const NEWTON_BACKTRACKS: usize = 30;
const AXIOM_STEP: f64 = 1e-3;
const CHART_SINGULARITY: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ManifoldKind {
    EuclideanChart(usize),
    /// Unit sphere in `ℝⁿ` for the given ambient dimension `n`.
    Sphere(usize),
    Product(Vec<ManifoldKind>),
}

/// Shorthand for the 2-sphere in `ℝ³`.
pub const S2: ManifoldKind = ManifoldKind::Sphere(3);
/// Shorthand for the 3-sphere in `ℝ⁴`.
pub const S3: ManifoldKind = ManifoldKind::Sphere(4);

impl ManifoldKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            ManifoldKind::EuclideanChart(0) => {
                Err(Error::InvalidInput("chart dimension must be at least 1".into()))
            }
            ManifoldKind::Sphere(n) if *n < 2 => Err(Error::InvalidInput(
                "sphere ambient dimension must be at least 2".into(),
            )),
            ManifoldKind::Product(fs) if fs.is_empty() => Err(Error::InvalidInput(
                "product manifold needs at least one factor".into(),
            )),
            ManifoldKind::Product(fs) => fs.iter().try_for_each(ManifoldKind::validate),
            _ => Ok(()),
        }
    }

    /// Length of the coordinate vector of a point.
    pub fn ambient_dim(&self) -> usize {
        match self {
            ManifoldKind::EuclideanChart(d) | ManifoldKind::Sphere(d) => *d,
            ManifoldKind::Product(fs) => fs.iter().map(ManifoldKind::ambient_dim).sum(),
        }
    }

    /// Manifold dimension.
    pub fn dim(&self) -> usize {
        match self {
            ManifoldKind::EuclideanChart(d) => *d,
            ManifoldKind::Sphere(n) => n - 1,
            ManifoldKind::Product(fs) => fs.iter().map(ManifoldKind::dim).sum(),
        }
    }

    pub fn is_euclidean(&self) -> bool {
        self.atoms().iter().all(|(k, _)| matches!(k, ManifoldKind::EuclideanChart(_)))
    }

    /// A lower bound for the injectivity radius of the exponential map.
    pub fn injectivity_radius(&self) -> f64 {
        self.atoms()
            .iter()
            .map(|(k, _)| match k {
                ManifoldKind::Sphere(_) => PI,
                _ => UNBOUNDED_RADIUS,
            })
            .fold(UNBOUNDED_RADIUS, f64::min)
    }

    /// Parses `R^d`, `S2`, `S3` or `S^k`.
    pub fn from_tag(tag: &str) -> Result<Self> {
        let tag = tag.trim();
        let dim = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("bad manifold tag `{tag}`")))
        };
        let kind = match tag {
            "S2" => S2,
            "S3" => S3,
            _ if tag.starts_with("R^") => ManifoldKind::EuclideanChart(dim(&tag[2..])?),
            _ if tag.starts_with("S^") => ManifoldKind::Sphere(dim(&tag[2..])? + 1),
            _ => return Err(Error::InvalidInput(format!("unknown manifold tag `{tag}`"))),
        };
        kind.validate()?;
        Ok(kind)
    }

    /// Non-product factors with their coordinate ranges.
    pub(crate) fn atoms(&self) -> Vec<(ManifoldKind, Range<usize>)> {
        fn walk(k: &ManifoldKind, start: &mut usize, out: &mut Vec<(ManifoldKind, Range<usize>)>) {
            match k {
                ManifoldKind::Product(fs) => fs.iter().for_each(|f| walk(f, start, out)),
                atom => {
                    let r = *start..*start + atom.ambient_dim();
                    *start = r.end;
                    out.push((atom.clone(), r));
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut 0, &mut out);
        out
    }

    fn distance_coords(&self, a: &[f64], b: &[f64]) -> f64 {
        self.atoms()
            .into_iter()
            .map(|(k, r)| match k {
                ManifoldKind::Sphere(_) => sphere_angle(&a[r.clone()], &b[r]).powi(2),
                _ => linalg::dist(&a[r.clone()], &b[r]).powi(2),
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Orthonormal ambient basis of the tangent space at `x`.
    pub(crate) fn tangent_basis(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n = self.ambient_dim();
        let mut out = Vec::with_capacity(self.dim());
        for (k, r) in self.atoms() {
            let embed = |local: Vec<f64>| {
                let mut v = vec![0.0; n];
                v[r.clone()].copy_from_slice(&local);
                v
            };
            match k {
                ManifoldKind::Sphere(m) => {
                    let xs = &x[r.clone()];
                    let skip = (0..m)
                        .max_by(|&i, &j| xs[i].abs().total_cmp(&xs[j].abs()))
                        .unwrap_or(0);
                    let mut frame: Vec<Vec<f64>> = vec![xs.to_vec()];
                    for j in (0..m).filter(|&j| j != skip) {
                        let mut e = vec![0.0; m];
                        e[j] = 1.0;
                        for f in &frame {
                            e = linalg::axpy(&e, -linalg::dot(&e, f), f);
                        }
                        let len = linalg::norm(&e);
                        frame.push(linalg::scale(&e, 1.0 / len));
                    }
                    out.extend(frame.into_iter().skip(1).map(&embed));
                }
                _ => {
                    for j in 0..r.len() {
                        let mut e = vec![0.0; r.len()];
                        e[j] = 1.0;
                        out.push(embed(e));
                    }
                }
            }
        }
        out
    }

    /// Coordinates of `p` in the chart centered at `x`, whose differential at `x`
    /// is the identity in the [`tangent_basis`](Self::tangent_basis) frame.
    pub(crate) fn centered_chart(&self, x: &[f64], p: &[f64], basis: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut weights = vec![1.0; self.ambient_dim()];
        for (k, r) in self.atoms() {
            if let ManifoldKind::Sphere(_) = k {
                let denom = 1.0 + linalg::dot(&x[r.clone()], &p[r.clone()]);
                if denom < CHART_SINGULARITY {
                    return Err(Error::OutsideDomain(
                        "point is antipodal to the chart center".into(),
                    ));
                }
                weights[r].iter_mut().for_each(|w| *w = 2.0 / denom);
            }
        }
        let diff: Vec<f64> = self
            .atoms()
            .into_iter()
            .flat_map(|(k, r)| match k {
                // the frame is orthogonal to x, so x itself drops out
                ManifoldKind::Sphere(_) => p[r].to_vec(),
                _ => linalg::sub(&p[r.clone()], &x[r]),
            })
            .collect();
        let weighted: Vec<f64> = diff.iter().zip(&weights).map(|(d, w)| d * w).collect();
        Ok(basis.iter().map(|e| linalg::dot(e, &weighted)).collect())
    }

    fn project_tangent(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for (k, r) in self.atoms() {
            if let ManifoldKind::Sphere(_) = k {
                let s = linalg::dot(&x[r.clone()], &v[r.clone()]);
                for i in r {
                    out[i] -= s * x[i];
                }
            }
        }
        out
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldKind::EuclideanChart(d) => write!(f, "R^{d}"),
            ManifoldKind::Sphere(3) => write!(f, "S2"),
            ManifoldKind::Sphere(4) => write!(f, "S3"),
            ManifoldKind::Sphere(n) => write!(f, "S^{}", n - 1),
            ManifoldKind::Product(fs) => {
                let parts: Vec<String> = fs.iter().map(ToString::to_string).collect();
                write!(f, "product({})", parts.join(","))
            }
        }
    }
}

fn sphere_angle(a: &[f64], b: &[f64]) -> f64 {
    let c = linalg::dot(a, b);
    let s = linalg::norm(&linalg::axpy(b, -c, a));
    s.atan2(c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldPoint {
    kind: ManifoldKind,
    coords: Vec<f64>,
}

impl ManifoldPoint {
    pub fn new(kind: ManifoldKind, coords: Vec<f64>) -> Result<Self> {
        kind.validate()?;
        if coords.len() != kind.ambient_dim() {
            return Err(Error::InvalidInput(format!(
                "{kind} point needs {} coordinates, got {}",
                kind.ambient_dim(),
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite point coordinate".into()));
        }
        for (k, r) in kind.atoms() {
            if let ManifoldKind::Sphere(_) = k {
                let n = linalg::norm(&coords[r]);
                if (n - 1.0).abs() > CONSTRAINT_TOLERANCE {
                    return Err(Error::InvalidInput(format!(
                        "sphere point has norm {n}, expected 1"
                    )));
                }
            }
        }
        Ok(Self { kind, coords })
    }

    pub fn euclidean(coords: &[f64]) -> Self {
        Self {
            kind: ManifoldKind::EuclideanChart(coords.len()),
            coords: coords.to_vec(),
        }
    }

    /// Radial projection of a nonzero vector onto the unit sphere.
    pub fn on_sphere(coords: &[f64]) -> Result<Self> {
        let n = linalg::norm(coords);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidInput("cannot normalize a zero vector".into()));
        }
        Self::new(ManifoldKind::Sphere(coords.len()), linalg::scale(coords, 1.0 / n))
    }

    /// Builds a point, re-normalizing sphere factors; for coordinates produced by
    /// formulas that are unit-norm only up to roundoff.
    pub(crate) fn normalized(kind: ManifoldKind, mut coords: Vec<f64>) -> Result<Self> {
        for (k, r) in kind.atoms() {
            if let ManifoldKind::Sphere(_) = k {
                let n = linalg::norm(&coords[r.clone()]);
                if !(n > 0.0) {
                    return Err(Error::OutsideDomain("degenerate sphere point".into()));
                }
                coords[r].iter_mut().for_each(|c| *c /= n);
            }
        }
        Self::new(kind, coords)
    }

    pub fn kind(&self) -> &ManifoldKind {
        &self.kind
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Chart distance on Euclidean factors and geodesic angle on sphere factors.
    pub fn distance(&self, other: &ManifoldPoint) -> Result<f64> {
        if self.kind != other.kind {
            return Err(mismatch(&self.kind, &other.kind));
        }
        Ok(self.kind.distance_coords(&self.coords, &other.coords))
    }
}

impl fmt::Display for ManifoldPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| format!("{c:.6}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: ManifoldPoint,
    components: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: ManifoldPoint, components: Vec<f64>) -> Result<Self> {
        if components.len() != base.kind.ambient_dim() {
            return Err(Error::InvalidInput(format!(
                "tangent vector needs {} components, got {}",
                base.kind.ambient_dim(),
                components.len()
            )));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite tangent component".into()));
        }
        let scale = linalg::norm(&components).max(1.0);
        for (k, r) in base.kind.atoms() {
            if let ManifoldKind::Sphere(_) = k {
                let s = linalg::dot(&base.coords[r.clone()], &components[r]);
                if s.abs() > CONSTRAINT_TOLERANCE * scale {
                    return Err(Error::InvalidInput(format!(
                        "vector is not tangent to the sphere (normal part {s:e})"
                    )));
                }
            }
        }
        Ok(Self { base, components })
    }

    /// Orthogonal projection of an ambient vector onto the tangent space.
    pub fn projected(base: ManifoldPoint, ambient: &[f64]) -> Result<Self> {
        if ambient.len() != base.kind.ambient_dim() {
            return Err(Error::InvalidInput("ambient vector has wrong length".into()));
        }
        let components = base.kind.project_tangent(&base.coords, ambient);
        Self::new(base, components)
    }

    pub fn zero(base: ManifoldPoint) -> Self {
        let n = base.kind.ambient_dim();
        Self {
            base,
            components: vec![0.0; n],
        }
    }

    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.components)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| *c == 0.0)
    }

    pub fn scale(&self, s: f64) -> TangentVector {
        Self {
            base: self.base.clone(),
            components: linalg::scale(&self.components, s),
        }
    }

    pub fn add(&self, other: &TangentVector) -> Result<TangentVector> {
        same_base(&self.base, &other.base)?;
        Ok(Self {
            base: self.base.clone(),
            components: linalg::add(&self.components, &other.components),
        })
    }

    /// Tangent vector with the given coordinates in the tangent frame at the base.
    pub(crate) fn from_frame(base: &ManifoldPoint, frame: &[Vec<f64>], a: &[f64]) -> Self {
        let mut components = vec![0.0; base.kind.ambient_dim()];
        for (e, ai) in frame.iter().zip(a) {
            components = linalg::axpy(&components, *ai, e);
        }
        Self {
            base: base.clone(),
            components,
        }
    }
}

pub(crate) fn same_base(a: &ManifoldPoint, b: &ManifoldPoint) -> Result<()> {
    if a.kind != b.kind || linalg::dist(&a.coords, &b.coords) > CONSTRAINT_TOLERANCE {
        return Err(Error::BasePointMismatch);
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MetricDescriptor {
    Euclidean,
    /// Restriction of the ambient Euclidean metric to a unit sphere.
    Round,
    Product(Vec<MetricDescriptor>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum AtomMetric {
    Flat,
    Round,
}

impl MetricDescriptor {
    /// Euclidean on charts, round on spheres.
    pub fn standard(kind: &ManifoldKind) -> Self {
        match kind {
            ManifoldKind::EuclideanChart(_) => MetricDescriptor::Euclidean,
            ManifoldKind::Sphere(_) => MetricDescriptor::Round,
            ManifoldKind::Product(fs) => {
                MetricDescriptor::Product(fs.iter().map(Self::standard).collect())
            }
        }
    }

    fn atoms(&self, kind: &ManifoldKind) -> Result<Vec<AtomMetric>> {
        match (kind, self) {
            (ManifoldKind::EuclideanChart(_), MetricDescriptor::Euclidean) => Ok(vec![AtomMetric::Flat]),
            (ManifoldKind::Sphere(_), MetricDescriptor::Round) => Ok(vec![AtomMetric::Round]),
            (ManifoldKind::Product(fs), MetricDescriptor::Product(ms)) if fs.len() == ms.len() => {
                let mut out = Vec::new();
                for (f, m) in fs.iter().zip(ms) {
                    out.extend(m.atoms(f)?);
                }
                Ok(out)
            }
            (ManifoldKind::Product(fs), m) if !matches!(m, MetricDescriptor::Product(_)) => {
                let mut out = Vec::new();
                for f in fs {
                    out.extend(m.atoms(f)?);
                }
                Ok(out)
            }
            _ => Err(Error::InvalidInput(format!(
                "metric {self} does not apply to {kind}"
            ))),
        }
    }
}

impl fmt::Display for MetricDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricDescriptor::Euclidean => write!(f, "euclidean"),
            MetricDescriptor::Round => write!(f, "round"),
            MetricDescriptor::Product(ms) => {
                let parts: Vec<String> = ms.iter().map(ToString::to_string).collect();
                write!(f, "product({})", parts.join(","))
            }
        }
    }
}

/// Inner product of two tangent vectors at the same point.
pub fn metric_eval(
    kind: &ManifoldKind,
    metric: &MetricDescriptor,
    u: &TangentVector,
    w: &TangentVector,
) -> Result<f64> {
    same_base(&u.base, &w.base)?;
    if &u.base.kind != kind {
        return Err(mismatch(kind, &u.base.kind));
    }
    // both flat and round atoms use the ambient dot product
    metric.atoms(kind)?;
    Ok(linalg::dot(&u.components, &w.components))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RetractionRule {
    /// `x + v` on Euclidean charts; on sphere factors, the straight line in the
    /// stereographic chart projecting from the antipode of the last basis vector.
    ChartStraightLine,
    MetricExponential(MetricDescriptor),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum AtomRule {
    Affine,
    GreatCircle,
    Stereographic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Retraction {
    kind: ManifoldKind,
    rule: RetractionRule,
    domain_radius: f64,
    atom_rules: Vec<AtomRule>,
}

impl Retraction {
    pub fn new(kind: ManifoldKind, rule: RetractionRule) -> Result<Self> {
        kind.validate()?;
        let atom_rules = match &rule {
            RetractionRule::ChartStraightLine => kind
                .atoms()
                .iter()
                .map(|(k, _)| match k {
                    ManifoldKind::Sphere(_) => AtomRule::Stereographic,
                    _ => AtomRule::Affine,
                })
                .collect(),
            RetractionRule::MetricExponential(m) => m
                .atoms(&kind)?
                .into_iter()
                .map(|a| match a {
                    AtomMetric::Flat => AtomRule::Affine,
                    AtomMetric::Round => AtomRule::GreatCircle,
                })
                .collect(),
        };
        let domain_radius = kind
            .atoms()
            .iter()
            .map(|(k, _)| match k {
                ManifoldKind::Sphere(_) => FRAC_PI_2,
                _ => UNBOUNDED_RADIUS,
            })
            .fold(UNBOUNDED_RADIUS, f64::min);
        Ok(Self {
            kind,
            rule,
            domain_radius,
            atom_rules,
        })
    }

    pub fn straight_line(kind: ManifoldKind) -> Result<Self> {
        Self::new(kind, RetractionRule::ChartStraightLine)
    }

    /// Exponential map of the standard metric of `kind`.
    pub fn exponential(kind: ManifoldKind) -> Result<Self> {
        let m = MetricDescriptor::standard(&kind);
        Self::new(kind, RetractionRule::MetricExponential(m))
    }

    pub fn with_domain_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidInput("domain radius must be positive".into()));
        }
        self.domain_radius = radius;
        Ok(self)
    }

    pub fn kind(&self) -> &ManifoldKind {
        &self.kind
    }

    pub fn rule(&self) -> &RetractionRule {
        &self.rule
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    fn check_vector(&self, v: &TangentVector) -> Result<()> {
        if v.base.kind != self.kind {
            return Err(mismatch(&self.kind, &v.base.kind));
        }
        let n = v.norm();
        if !(n < self.domain_radius) {
            return Err(Error::OutsideDomain(format!(
                "tangent norm {n} exceeds domain radius {}",
                self.domain_radius
            )));
        }
        Ok(())
    }

    pub fn retract(&self, v: &TangentVector) -> Result<ManifoldPoint> {
        self.check_vector(v)?;
        if v.is_zero() {
            return Ok(v.base.clone());
        }
        let x = &v.base.coords;
        let mut out = vec![0.0; x.len()];
        for ((_, r), rule) in self.kind.atoms().into_iter().zip(&self.atom_rules) {
            let xs = &x[r.clone()];
            let vs = &v.components[r.clone()];
            let image = match rule {
                AtomRule::Affine => linalg::add(xs, vs),
                AtomRule::GreatCircle => great_circle(xs, vs),
                AtomRule::Stereographic => stereographic_step(xs, vs)?,
            };
            out[r].copy_from_slice(&image);
        }
        ManifoldPoint::normalized(self.kind.clone(), out)
    }

    pub fn retract_extended(&self, v: &TangentVector) -> Result<(ManifoldPoint, ManifoldPoint)> {
        Ok((v.base.clone(), self.retract(v)?))
    }

    /// Tangent vector at `x` retracting to `y`, by Newton's method.
    pub fn invert_extended(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<TangentVector> {
        if x.kind != self.kind {
            return Err(mismatch(&self.kind, &x.kind));
        }
        let d = x.distance(y)?;
        if !(d < self.domain_radius / 2.0) {
            return Err(Error::OutsideDomain(format!(
                "points at distance {d} are beyond half the domain radius {}",
                self.domain_radius
            )));
        }
        if x.coords == y.coords {
            return Ok(TangentVector::zero(x.clone()));
        }
        newton_inverse(x, y, |v| self.retract(v))
    }

    /// Identity and first-order defects of the retraction at `v`'s base point.
    pub fn check_axioms(&self, v: &TangentVector) -> VerificationReport {
        let x = &v.base;
        let identity = self
            .retract(&TangentVector::zero(x.clone()))
            .map(|p| linalg::dist(p.coords(), x.coords()))
            .unwrap_or(f64::INFINITY);
        let slope = diff::central_derivative(
            |t| Ok(self.retract(&v.scale(t))?.coords.clone()),
            AXIOM_STEP,
            2,
        )
        .map(|s| linalg::dist(&s, &v.components))
        .unwrap_or(f64::INFINITY);
        VerificationReport::new(RETRACTION_AXIOM_TOLERANCE, 1)
            .with("identity", identity)
            .with("slope", slope)
    }
}

fn great_circle(x: &[f64], v: &[f64]) -> Vec<f64> {
    let n = linalg::norm(v);
    if n == 0.0 {
        return x.to_vec();
    }
    let a = linalg::scale(x, n.cos());
    linalg::axpy(&a, n.sin() / n, v)
}

fn stereographic_step(x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let k = x.len() - 1;
    let denom = 1.0 + x[k];
    if denom < 1e-6 {
        return Err(Error::OutsideDomain(
            "point is at the pole of the stereographic chart".into(),
        ));
    }
    let y: Vec<f64> = (0..k)
        .map(|i| x[i] / denom + v[i] / denom - x[i] * v[k] / (denom * denom))
        .collect();
    let s = linalg::dot(&y, &y);
    let mut p: Vec<f64> = y.iter().map(|yi| 2.0 * yi / (1.0 + s)).collect();
    p.push((1.0 - s) / (1.0 + s));
    Ok(p)
}

/// Solves `map(v) = target` for `v ∈ T_x M` by Newton's method in the chart
/// centered at `x`, starting from the chart difference.
pub(crate) fn newton_inverse<F>(x: &ManifoldPoint, target: &ManifoldPoint, map: F) -> Result<TangentVector>
where
    F: Fn(&TangentVector) -> Result<ManifoldPoint>,
{
    let kind = &x.kind;
    if &target.kind != kind {
        return Err(mismatch(kind, &target.kind));
    }
    let frame = kind.tangent_basis(&x.coords);
    let goal = kind.centered_chart(&x.coords, &target.coords, &frame)?;
    let residual = |a: &[f64]| -> Result<Vec<f64>> {
        let v = TangentVector::from_frame(x, &frame, a);
        let p = map(&v)?;
        Ok(linalg::sub(&kind.centered_chart(&x.coords, &p.coords, &frame)?, &goal))
    };
    let k = frame.len();
    let mut a = goal.clone();
    let mut r = residual(&a)?;
    let mut rn = linalg::norm(&r);
    let mut iterations = 0;
    while iterations < NEWTON_MAX_ITERATIONS && rn > NEWTON_POLISH {
        iterations += 1;
        let mut jac = DMatrix::zeros(k, k);
        for j in 0..k {
            let mut ap = a.clone();
            let mut am = a.clone();
            ap[j] += NEWTON_JACOBIAN_STEP;
            am[j] -= NEWTON_JACOBIAN_STEP;
            let col = linalg::scale(
                &linalg::sub(&residual(&ap)?, &residual(&am)?),
                0.5 / NEWTON_JACOBIAN_STEP,
            );
            jac.set_column(j, &DVector::from_vec(col));
        }
        let Some(step) = jac.lu().solve(&DVector::from_iterator(k, r.iter().map(|c| -c))) else {
            break;
        };
        // backtrack when a full step leaves the retraction domain or overshoots
        let mut accepted = None;
        let mut scale = 1.0;
        for _ in 0..NEWTON_BACKTRACKS {
            let next: Vec<f64> = a.iter().zip(step.iter()).map(|(ai, s)| ai + scale * s).collect();
            if let Ok(r_next) = residual(&next) {
                let rn_next = linalg::norm(&r_next);
                if rn_next < rn {
                    accepted = Some((next, r_next, rn_next));
                    break;
                }
            }
            scale *= 0.5;
        }
        let Some((next, r_next, rn_next)) = accepted else {
            break;
        };
        a = next;
        r = r_next;
        rn = rn_next;
    }
    if !(rn <= NEWTON_TOLERANCE) {
        return Err(Error::NewtonDivergence {
            residual: rn,
            iterations,
        });
    }
    Ok(TangentVector::from_frame(x, &frame, &a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn north() -> ManifoldPoint {
        ManifoldPoint::new(S2, vec![0.0, 0.0, 1.0]).unwrap()
    }

    fn great_circle_oracle(x: &[f64], v: &[f64]) -> Vec<f64> {
        let n = linalg::norm(v);
        (0..x.len())
            .map(|i| n.cos() * x[i] + n.sin() * v[i] / n)
            .collect()
    }

    #[test]
    fn euclidean_straight_line() {
        let r = Retraction::straight_line(ManifoldKind::EuclideanChart(2)).unwrap();
        let x = ManifoldPoint::euclidean(&[1.0, 2.0]);
        let v = TangentVector::new(x.clone(), vec![0.5, -1.0]).unwrap();
        assert_eq!(r.retract(&v).unwrap().coords(), &[1.5, 1.0]);
        assert_eq!(r.retract(&TangentVector::zero(x.clone())).unwrap(), x);
        let o = ManifoldPoint::euclidean(&[0.0, 0.0]);
        let w = TangentVector::new(o.clone(), vec![1.0, 1.0]).unwrap();
        let (a, b) = r.retract_extended(&w).unwrap();
        assert_eq!((a.coords(), b.coords()), (&[0.0, 0.0][..], &[1.0, 1.0][..]));
        let inv = r.invert_extended(&o, &b).unwrap();
        assert_eq!(inv.components(), &[1.0, 1.0]);
    }

    #[test]
    fn sphere_exponential_quarter_turn() {
        let r = Retraction::exponential(S2).unwrap().with_domain_radius(4.0).unwrap();
        let components = vec![FRAC_PI_2, 0.0, 0.0];
        let v = TangentVector::new(north(), components.clone()).unwrap();
        let p = r.retract(&v).unwrap();
        let oracle = great_circle_oracle(&[0.0, 0.0, 1.0], &components);
        assert!(linalg::dist(p.coords(), &oracle) < 1e-15);
        assert!(linalg::dist(p.coords(), &[1.0, 0.0, 0.0]) < 1e-15);
        let (a, _) = r.retract_extended(&v).unwrap();
        assert_eq!(a, north());
    }

    #[test]
    fn sphere_inverse_converges_to_quarter_turn() {
        let r = Retraction::exponential(S2).unwrap().with_domain_radius(4.0).unwrap();
        let y = ManifoldPoint::new(S2, vec![1.0, 0.0, 0.0]).unwrap();
        let v = r.invert_extended(&north(), &y).unwrap();
        assert!(linalg::dist(v.components(), &[FRAC_PI_2, 0.0, 0.0]) < 1e-10);
        let back = r.retract(&v).unwrap();
        assert!(back.distance(&y).unwrap() <= 1e-10);
        assert!(r.invert_extended(&north(), &north()).unwrap().is_zero());
    }

    #[test]
    fn inverse_rejects_far_points() {
        let r = Retraction::exponential(S2).unwrap();
        let y = ManifoldPoint::new(S2, vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            r.invert_extended(&north(), &y),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn stereographic_straight_line_inverts() {
        let r = Retraction::straight_line(S3).unwrap();
        let x = ManifoldPoint::on_sphere(&[0.3, -0.2, 0.5, 0.6]).unwrap();
        let y = ManifoldPoint::on_sphere(&[0.4, -0.1, 0.45, 0.55]).unwrap();
        let v = r.invert_extended(&x, &y).unwrap();
        assert!(r.retract(&v).unwrap().distance(&y).unwrap() < 1e-10);
    }

    #[test]
    fn axioms_for_both_rules() {
        let e = Retraction::straight_line(ManifoldKind::EuclideanChart(3)).unwrap();
        let x = ManifoldPoint::euclidean(&[0.2, -1.0, 4.0]);
        let v = TangentVector::new(x, vec![0.3, 0.1, -0.9]).unwrap();
        assert!(e.check_axioms(&v).max_defect() < 1e-12);

        let s = Retraction::exponential(S2).unwrap();
        let v = TangentVector::new(north(), vec![0.3, 0.0, 0.0]).unwrap();
        // analytic slope of cos(t|v|)x + sin(t|v|)v/|v| at t = 0 is v
        let rep = s.check_axioms(&v);
        assert!(rep.max_defect() <= 1e-8, "{rep}");
        assert_eq!(s.check_axioms(&TangentVector::zero(north())).max_defect(), 0.0);
    }

    #[test]
    fn metric_values() {
        let m = MetricDescriptor::Euclidean;
        let k = ManifoldKind::EuclideanChart(2);
        let x = ManifoldPoint::euclidean(&[0.0, 0.0]);
        let u = TangentVector::new(x.clone(), vec![1.0, 0.0]).unwrap();
        let w = TangentVector::new(x.clone(), vec![0.0, 1.0]).unwrap();
        assert_eq!(metric_eval(&k, &m, &u, &w).unwrap(), 0.0);
        let z = TangentVector::new(x, vec![3.0, 4.0]).unwrap();
        assert_eq!(metric_eval(&k, &m, &z, &z).unwrap(), 25.0);
        let h = TangentVector::new(north(), vec![0.5, 0.0, 0.0]).unwrap();
        assert_eq!(metric_eval(&S2, &MetricDescriptor::Round, &h, &h).unwrap(), 0.25);
        let other = TangentVector::zero(ManifoldPoint::euclidean(&[1.0, 0.0]));
        assert_eq!(metric_eval(&k, &m, &u, &other), Err(Error::BasePointMismatch));
    }

    #[test]
    fn constraints_are_enforced() {
        assert!(ManifoldPoint::new(S2, vec![0.0, 0.0, 1.1]).is_err());
        assert!(TangentVector::new(north(), vec![0.0, 0.0, 1.0]).is_err());
        let t = TangentVector::projected(north(), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.components(), &[1.0, 2.0, 0.0]);
    }

    #[test]
    fn product_manifolds_split() {
        let kind = ManifoldKind::Product(vec![ManifoldKind::EuclideanChart(1), S2]);
        assert_eq!(kind.dim(), 3);
        assert_eq!(kind.ambient_dim(), 4);
        let r = Retraction::exponential(kind.clone()).unwrap();
        let x = ManifoldPoint::new(kind, vec![2.0, 0.0, 0.0, 1.0]).unwrap();
        let v = TangentVector::new(x.clone(), vec![-0.5, 0.2, 0.1, 0.0]).unwrap();
        let y = r.retract(&v).unwrap();
        let back = r.invert_extended(&x, &y).unwrap();
        assert!(linalg::dist(back.components(), v.components()) < 1e-10);
    }

    #[test]
    fn tags() {
        for tag in ["R^2", "S2", "S3"] {
            assert_eq!(ManifoldKind::from_tag(tag).unwrap().to_string(), tag);
        }
        assert!(ManifoldKind::from_tag("H2").is_err());
    }
}
