//! Named connection forms and discrete rules used by scenario files and the
//! examples.

use crate::connection::LocalOneForm;
use crate::discrete::LocalGroupFunction;
use crate::error::{Error, Result};
use crate::geometry::ManifoldKind;
use crate::liegroup::{AlgebraElement, GroupKind};

pub const CONNECTIONS: &[&str] = &[
    "zero",
    "x_dy",
    "closed_xy",
    "x_dy_plus_dx2",
    "polynomial",
    "hopf_canonical",
    "hopf_perturbed",
];

pub const LOCAL_RULES: &[&str] = &[
    "zero",
    "trapezoid_x_dy",
    "midpoint_x_dy",
    "left_x_dy",
    "quadratic_const",
    "quadratic_sin",
];

/// Rules built from a connection rather than written down directly.
pub const CONSTRUCTED_RULES: &[&str] = &["integrated", "flat_line_integral", "curvature_matched"];

fn plane_scalar(name: &str, base: &ManifoldKind, group: &GroupKind) -> Result<()> {
    if base != &ManifoldKind::EuclideanChart(2) || !group.is_abelian() || group.dim() != 1 {
        return Err(Error::InvalidInput(format!(
            "{name} needs base R^2 and a one-dimensional abelian group, got {base} x {group}"
        )));
    }
    Ok(())
}

fn line_scalar(name: &str, base: &ManifoldKind, group: &GroupKind) -> Result<()> {
    if base != &ManifoldKind::EuclideanChart(1) || !group.is_abelian() || group.dim() != 1 {
        return Err(Error::InvalidInput(format!(
            "{name} needs base R and a one-dimensional abelian group, got {base} x {group}"
        )));
    }
    Ok(())
}

/// Local expression of a builtin connection on a trivial bundle.
pub fn one_form(name: &str, base: &ManifoldKind, group: &GroupKind) -> Result<LocalOneForm> {
    let g = group.clone();
    match name {
        "zero" => Ok(LocalOneForm::zero(g)),
        "x_dy" => {
            plane_scalar(name, base, group)?;
            Ok(LocalOneForm::scalar(g, name, |m| vec![0.0, m[0]]))
        }
        "closed_xy" => {
            plane_scalar(name, base, group)?;
            Ok(LocalOneForm::scalar(g, name, |m| vec![m[1], m[0]]))
        }
        "x_dy_plus_dx2" => {
            plane_scalar(name, base, group)?;
            Ok(LocalOneForm::scalar(g, name, |m| vec![2.0 * m[0], m[0]]))
        }
        "polynomial" => {
            if base != &ManifoldKind::EuclideanChart(2) {
                return Err(Error::InvalidInput(format!("polynomial needs base R^2, got {base}")));
            }
            let k = group.dim();
            Ok(LocalOneForm::new(g.clone(), name, move |dm| {
                let (x, y) = (dm.base().coords()[0], dm.base().coords()[1]);
                let (dx, dy) = (dm.components()[0], dm.components()[1]);
                let coords = (0..k)
                    .map(|i| {
                        let c = (i + 1) as f64;
                        (c * x + y * y) * dx + (x * y - c) * dy
                    })
                    .collect();
                AlgebraElement::new(g.clone(), coords)
            }))
        }
        _ => Err(Error::InvalidInput(format!("unknown connection builtin {name}"))),
    }
}

/// A local rule `C(m₀, m₁)` given by a closed formula.
pub fn local_rule(name: &str, base: &ManifoldKind, group: &GroupKind, parameter: Option<f64>) -> Result<LocalGroupFunction> {
    let g = group.clone();
    match name {
        "zero" => Ok(LocalGroupFunction::identity(g)),
        "trapezoid_x_dy" => {
            plane_scalar(name, base, group)?;
            Ok(LocalGroupFunction::scalar(g, name, |a, b| 0.5 * (a[0] + b[0]) * (b[1] - a[1])))
        }
        "midpoint_x_dy" => {
            plane_scalar(name, base, group)?;
            Ok(LocalGroupFunction::scalar(g, name, |a, b| {
                let x = 0.5 * (a[0] + b[0]);
                x * (b[1] - a[1])
            }))
        }
        "left_x_dy" => {
            plane_scalar(name, base, group)?;
            Ok(LocalGroupFunction::scalar(g, name, |a, b| a[0] * (b[1] - a[1])))
        }
        "quadratic_const" => {
            line_scalar(name, base, group)?;
            let c = parameter.unwrap_or(1.0);
            Ok(LocalGroupFunction::scalar(g, name, move |a, b| (b[0] - a[0]).powi(2) * c))
        }
        "quadratic_sin" => {
            line_scalar(name, base, group)?;
            Ok(LocalGroupFunction::scalar(g, name, |a, b| (b[0] - a[0]).powi(2) * (a[0] * b[0]).sin()))
        }
        _ => Err(Error::InvalidInput(format!("unknown discrete builtin {name}"))),
    }
}
