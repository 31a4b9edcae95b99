//! Composite Gauss–Legendre quadrature of vector-valued integrands on `[0, 1]`.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub order: usize,
    pub panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { order: 8, panels: 16 }
    }
}

impl QuadratureSpec {
    pub fn new(order: usize, panels: usize) -> Result<Self> {
        if !(1..=64).contains(&order) || !(1..=4096).contains(&panels) {
            return Err(Error::InvalidInput(format!(
                "quadrature order {order} / panels {panels} outside 1..=64 / 1..=4096"
            )));
        }
        Ok(Self { order, panels })
    }

    /// Nodes and weights of the composite rule on `[0, 1]`.
    pub fn rule(&self) -> Vec<(f64, f64)> {
        let order = NonZeroUsize::new(self.order.max(1)).expect("positive order");
        let gl = GaussLegendre::new(order);
        let width = 1.0 / self.panels as f64;
        let mut out = Vec::with_capacity(self.order * self.panels);
        for k in 0..self.panels {
            let left = k as f64 * width;
            for &(x, w) in gl.iter() {
                out.push((left + 0.5 * width * (x + 1.0), 0.5 * width * w));
            }
        }
        out
    }

    pub fn integrate<F>(&self, dim: usize, f: F) -> Result<Vec<f64>>
    where
        F: Fn(f64) -> Result<Vec<f64>>,
    {
        let mut acc = vec![0.0; dim];
        for (t, w) in self.rule() {
            let v = f(t)?;
            if v.len() != dim {
                return Err(Error::InvalidInput(format!("integrand has {} components, expected {dim}", v.len())));
            }
            for (a, x) in acc.iter_mut().zip(&v) {
                *a += w * x;
            }
        }
        Ok(acc)
    }
}
