//! Sawtooth competitor with parabolic caps.
//!
//! On the right half `[L/2, L]` the field is a sawtooth in `y` of period `4h`
//! whose linear parts have slope `±1`, joined by parabolic caps of half-width
//! `H(x) = h - k x` (local `x`). On the left half it is the linear
//! interpolation `(x / l) w(0, y)` from zero to the sawtooth profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ClassTag, Grid, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchedSpec {
    pub epsilon: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// Shape constant: `h = c (eps L)^(1/2)`.
    pub c: f64,
    pub h: f64,
    /// Half width `L / 2` of each piece.
    pub half: f64,
    /// Slope of the cap width, `h / (2 half)`.
    pub k: f64,
    /// Number of periods in `[0, 1]`, `1 / (4h)`.
    pub n: u32,
}

impl BranchedSpec {
    /// Picks the period count `N` so that `c = 1 / (4 N (eps L)^(1/2))` is
    /// as close to one as possible.
    pub fn new(epsilon: f64, l: f64) -> Result<Self> {
        if !(epsilon > 0.0 && l > 0.0) {
            return Err(Error::InvalidParams(format!("epsilon = {epsilon}, L = {l} must be positive")));
        }
        let root = (epsilon * l).sqrt();
        let ideal = 1.0 / (4.0 * root);
        let c_of = |n: u32| 1.0 / (4.0 * n as f64 * root);
        let lo = (ideal.floor() as u32).max(1);
        let n = [lo, lo + 1]
            .into_iter()
            .min_by(|&a, &b| (c_of(a) - 1.0).abs().total_cmp(&(c_of(b) - 1.0).abs()))
            .unwrap();
        Ok(Self::with_periods(epsilon, l, n))
    }

    pub fn with_periods(epsilon: f64, l: f64, n: u32) -> Self {
        let h = 1.0 / (4.0 * n as f64);
        let half = l / 2.0;
        BranchedSpec { epsilon, l, c: h / (epsilon * l).sqrt(), h, half, k: h / (2.0 * half), n }
    }

    fn cap_width(&self, x_local: f64) -> f64 {
        self.h - self.k * x_local
    }

    /// Sawtooth profile at local abscissa `x_local in [0, half]`.
    pub fn w(&self, x_local: f64, y: f64) -> f64 {
        let h = self.h;
        let cap = self.cap_width(x_local);
        let mut t = y.rem_euclid(4.0 * h);
        if t > 2.0 * h {
            t = 4.0 * h - t;
        }
        if t <= cap {
            t * t / (2.0 * cap)
        } else if t <= 2.0 * h - cap {
            t - cap / 2.0
        } else {
            let s = t - 2.0 * h;
            2.0 * h - cap - s * s / (2.0 * cap)
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        if x <= self.half {
            (x / self.half) * self.w(0.0, y)
        } else {
            self.w(x - self.half, y)
        }
    }

    /// Closed-form `L^2(B)`: the column at local `x` is in `B` on a fraction
    /// `1 - H(x)/h` of its length, which integrates to `half / 4`.
    pub fn area_b_exact(&self) -> f64 {
        self.half / 4.0
    }
}

pub fn branched_seed(spec: &BranchedSpec, grid: &Grid) -> Result<ScalarField> {
    if (grid.l - spec.l).abs() > 1e-12 * spec.l {
        return Err(Error::InvalidParams(format!("grid width {} differs from spec L {}", grid.l, spec.l)));
    }
    if (grid.ny as f64) * spec.h < 8.0 {
        return Err(Error::ResolutionTooCoarse(format!(
            "ny * h = {} < 8; refine y to at least {} cells",
            grid.ny as f64 * spec.h,
            (8.0 / spec.h).ceil()
        )));
    }
    let mut u = ScalarField::from_fn(*grid, |x, y| spec.value(x, y)).with_class(ClassTag::A3);
    u.pin_left_edge();
    Ok(u)
}
