//! Richardson-extrapolated difference quotients for vector-valued curves.
//!
//! Every derivative in the crate goes through [`derivative_at_zero`]: central
//! differences at steps `h, h/2, …, h/2^(levels-1)` combined in a Richardson
//! tableau. With `levels = 2` this is the "central difference with `h` and `h/2`
//! plus one extrapolation step" contract.

use crate::error::{Error, Result};

/// Relative discrepancy between central and one-sided estimates above which a
/// curve is declared non-differentiable at `t = 0`.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-5;

fn tableau(mut rows: Vec<Vec<f64>>, ratio_power: f64) -> Vec<f64> {
    // rows[k] is the estimate at step h / 2^k; the error expansion is in powers
    // of h^ratio_power.
    let n = rows.len();
    for j in 1..n {
        let factor = 2f64.powf(ratio_power * j as f64);
        for k in (j..n).rev() {
            let prev = rows[k - 1].clone();
            for (cur, p) in rows[k].iter_mut().zip(&prev) {
                *cur += (*cur - p) / (factor - 1.0);
            }
        }
    }
    rows.pop().unwrap_or_default()
}

/// Central-difference derivative of `f` at `t = 0` with Richardson extrapolation.
pub fn central_derivative<F>(f: F, h: f64, levels: usize) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let levels = levels.max(1);
    let mut rows = Vec::with_capacity(levels);
    for k in 0..levels {
        let step = h / 2f64.powi(k as i32);
        let plus = f(step)?;
        let minus = f(-step)?;
        rows.push(
            plus.iter()
                .zip(&minus)
                .map(|(p, m)| (p - m) / (2.0 * step))
                .collect(),
        );
    }
    // central differences have an even error expansion
    let out = tableau(rows, 2.0);
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonDifferentiable {
            discrepancy: f64::INFINITY,
        });
    }
    Ok(out)
}

fn forward_derivative<F>(f: &F, h: f64, levels: usize) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let f0 = f(0.0)?;
    let mut rows = Vec::with_capacity(levels);
    for k in 0..levels {
        let step = h / 2f64.powi(k as i32);
        let plus = f(step)?;
        rows.push(
            plus.iter()
                .zip(&f0)
                .map(|(p, z)| (p - z) / step)
                .collect(),
        );
    }
    Ok(tableau(rows, 1.0))
}

/// Like [`central_derivative`], but also compares against a one-sided estimate
/// and fails with [`Error::NonDifferentiable`] when they disagree.
pub fn derivative_at_zero<F>(f: F, h: f64, levels: usize) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let central = central_derivative(&f, h, levels)?;
    let forward = forward_derivative(&f, h, levels.max(2) + 1)?;
    let scale = central.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let discrepancy = central
        .iter()
        .zip(&forward)
        .fold(0.0f64, |m, (c, f)| m.max((c - f).abs()));
    if !(discrepancy <= CONSISTENCY_TOLERANCE * scale) {
        return Err(Error::NonDifferentiable { discrepancy });
    }
    Ok(central)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivative_is_exact_after_extrapolation() {
        let d = central_derivative(|t| Ok(vec![1.0 + 3.0 * t + t * t * t * 5.0]), 1e-2, 2).unwrap();
        assert!((d[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sine_derivative_reaches_contract_accuracy() {
        let x = 0.7f64;
        let d = central_derivative(|t| Ok(vec![(x + t).sin()]), 1e-3, 2).unwrap();
        assert!((d[0] - x.cos()).abs() < 1e-11);
    }

    #[test]
    fn kink_is_rejected() {
        let err = derivative_at_zero(|t| Ok(vec![t.abs()]), 1e-4, 2).unwrap_err();
        assert!(matches!(err, Error::NonDifferentiable { .. }));
    }

    #[test]
    fn smooth_curve_passes_consistency() {
        let d = derivative_at_zero(|t| Ok(vec![(2.0 * t).exp(), t.cos()]), 1e-4, 2).unwrap();
        assert!((d[0] - 2.0).abs() < 1e-9);
        assert!(d[1].abs() < 1e-9);
    }
}
