//! Nucleation bump: a localized field whose `B` set can be made arbitrarily
//! small at arbitrarily small energy.
//!
//! Supported on `[L - δ, L] x [0, 4a]`. The amplitude profile
//! `f(x) = λ ((x - (L - δ)) / δ)^2` vanishes with its derivative at the inner
//! edge `x = L - δ`, so the zero extension is C^1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ClassTag, Grid, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub a: f64,
    pub delta_x: f64,
    pub lambda: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

impl BumpSpec {
    pub fn new(a: f64, delta_x: f64, lambda: f64, l: f64) -> Result<Self> {
        if !(a > 0.0 && 4.0 * a <= 1.0) {
            return Err(Error::InvalidParams(format!("a = {a} must satisfy 0 < 4a <= 1")));
        }
        if !(delta_x > 0.0 && delta_x <= l) {
            return Err(Error::InvalidParams(format!("delta = {delta_x} must lie in (0, L]")));
        }
        if !(lambda > 1.0) {
            return Err(Error::InvalidParams(format!("lambda = {lambda} must exceed 1")));
        }
        Ok(BumpSpec { a, delta_x, lambda, l })
    }

    pub fn amplitude(&self, x: f64) -> f64 {
        let s = (x - (self.l - self.delta_x)) / self.delta_x;
        if s <= 0.0 {
            0.0
        } else {
            self.lambda * s * s
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let a = self.a;
        let f = self.amplitude(x);
        if f == 0.0 || y >= 4.0 * a {
            return 0.0;
        }
        let t = if y > 2.0 * a { 4.0 * a - y } else { y };
        if t <= a {
            f * t * t / (2.0 * a)
        } else {
            a * f - f * (2.0 * a - t).powi(2) / (2.0 * a)
        }
    }

    /// `4 a δ (1 - λ^(-1/2))^2`.
    pub fn area_b_exact(&self) -> f64 {
        4.0 * self.a * self.delta_x * (1.0 - self.lambda.powf(-0.5)).powi(2)
    }
}

pub fn nucleation_bump(spec: &BumpSpec, grid: &Grid) -> Result<ScalarField> {
    if (grid.l - spec.l).abs() > 1e-12 * spec.l {
        return Err(Error::InvalidParams(format!("grid width {} differs from spec L {}", grid.l, spec.l)));
    }
    if spec.a / grid.hy < 8.0 || spec.delta_x / grid.hx < 8.0 {
        return Err(Error::ResolutionTooCoarse(format!(
            "need 8 cells across a = {} and delta = {} (hx = {}, hy = {})",
            spec.a, spec.delta_x, grid.hx, grid.hy
        )));
    }
    let mut u = ScalarField::from_fn(*grid, |x, y| spec.value(x, y)).with_class(ClassTag::A3);
    u.pin_left_edge();
    Ok(u)
}
