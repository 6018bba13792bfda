//! Newtonian-potential sequence.
//!
//! The densities are `f(R, θ) = g(R) sin θ` with a three-branch radial factor
//! `g_j`. For densities of this form the logarithmic potential is
//! `z = Z(R) sin θ`, where `Z` solves `Z'' + Z'/R - Z/R^2 = g` and is given by
//! variation of parameters:
//!
//! ```text
//! Z(R) = -(1 / 2R) ∫_0^R s^2 g(s) ds - (R / 2) ∫_R^2 g(s) ds
//! ```
//!
//! [`convolution_oracle`] evaluates the same potential by direct quadrature of
//! the log kernel and is kept independent of the radial reduction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::smoothstep_cutoff;
use crate::error::{Error, Result};
use crate::field::{ClassTag, Grid, ScalarField};
use crate::quad::{gauss_legendre, panels};

/// Outer radius of the support of every density in the sequence.
pub const SUPPORT: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub j: u32,
    #[serde(rename = "L")]
    pub l: f64,
    /// `-6 (L^2 + 1)^(1/2)`.
    pub k: f64,
    /// `k / j`.
    pub a_j: f64,
    /// `1/j - 2`.
    pub alpha_j: f64,
    /// Radial resolution of the Poisson solve on `[0, 2]`.
    pub n_r: usize,
    /// Multiply the density by the cutoff `η` (off by default: the closed
    /// form for `z_y(0, 0)` holds for the bare density).
    #[serde(default)]
    pub eta_cutoff: bool,
    /// Dilation of the affine map `x ↦ scale (x - P)` onto the potential's
    /// coordinates.
    pub scale: f64,
}

impl PotentialSpec {
    pub fn new(j: u32, l: f64) -> Result<Self> {
        if j == 0 {
            return Err(Error::InvalidParams("sequence index j must be >= 1".into()));
        }
        if !(l > 0.0) {
            return Err(Error::InvalidParams(format!("L = {l} must be positive")));
        }
        let k = -6.0 * (l * l + 1.0).sqrt();
        Ok(PotentialSpec {
            j,
            l,
            k,
            a_j: k / j as f64,
            alpha_j: 1.0 / j as f64 - 2.0,
            n_r: 4096,
            eta_cutoff: false,
            // the boundary of the domain lands on R >= 2, outside the cutoff
            scale: 4.0 / l.min(1.0),
        })
    }

    /// Predicted `z_y(0, 0) = -k/4 - A_j` for the bare density.
    pub fn zy_origin_closed_form(&self) -> f64 {
        -self.k / 4.0 - self.a_j
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialProfile {
    pub j: u32,
    pub a_j: f64,
    pub alpha_j: f64,
    pub eta_cutoff: bool,
}

impl RadialProfile {
    pub fn inner_knot(&self) -> f64 {
        0.5_f64.powi(self.j as i32)
    }

    /// Radial factor `g_j(R)` with `f = g_j(R) sin θ`.
    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        let base = if r <= self.inner_knot() {
            2.0_f64.powi(self.j as i32) * self.a_j
        } else if r <= 1.0 {
            self.a_j * r.powf(self.alpha_j + 1.0)
        } else if r <= SUPPORT {
            self.a_j
        } else {
            0.0
        };
        if self.eta_cutoff {
            base * smoothstep_cutoff(r)
        } else {
            base
        }
    }

    /// Radii where `g` is not smooth.
    pub fn knots(&self) -> Vec<f64> {
        let mut k = vec![0.0, self.inner_knot(), 1.0];
        if self.eta_cutoff {
            k.push(1.5);
        }
        k.push(SUPPORT);
        k.dedup();
        k
    }

    /// `||f||_2^2 = π ∫ g^2 R dR` by panel quadrature.
    pub fn l2_norm_sq(&self) -> f64 {
        panels(&self.knots(), 16, 64).iter().map(|&(r, w)| w * self.value(r).powi(2) * r).sum::<f64>() * PI
    }

    /// Closed form of `||f||_2^2` for the bare density:
    /// `(2π k^2 / j^2)(1 + 3j/16)`.
    pub fn l2_norm_sq_closed_form(&self) -> f64 {
        let j = self.j as f64;
        let k = self.a_j * j;
        2.0 * PI * k * k / (j * j) * (1.0 + 3.0 * j / 16.0)
    }
}

pub fn radial_profile(spec: &PotentialSpec) -> RadialProfile {
    RadialProfile { j: spec.j, a_j: spec.a_j, alpha_j: spec.alpha_j, eta_cutoff: spec.eta_cutoff }
}

/// Tabulated solution of the radial problem on a uniform grid over `[0, 2]`.
#[derive(Clone, Debug)]
pub struct RadialSolution {
    pub step: f64,
    /// `∫_0^{R_n} s^2 g(s) ds`.
    pub inner: Vec<f64>,
    /// `∫_{R_n}^2 g(s) ds`.
    pub outer: Vec<f64>,
}

impl RadialSolution {
    fn interp(&self, table: &[f64], r: f64) -> f64 {
        let t = (r / self.step).min((table.len() - 1) as f64);
        let k = (t.floor() as usize).min(table.len() - 2);
        let f = t - k as f64;
        table[k] * (1.0 - f) + table[k + 1] * f
    }

    fn inner_at(&self, r: f64) -> f64 {
        if r < self.step {
            // s^2 g(s) ~ s^2 near the origin
            self.inner[1] * (r / self.step).powi(3)
        } else {
            self.interp(&self.inner, r)
        }
    }

    /// `Z(R)`.
    pub fn z(&self, r: f64) -> f64 {
        if r >= SUPPORT {
            return -self.inner[self.inner.len() - 1] / (2.0 * r);
        }
        if r == 0.0 {
            return 0.0;
        }
        -self.inner_at(r) / (2.0 * r) - r * self.interp(&self.outer, r) / 2.0
    }

    /// `Z(R) / R`, finite at the origin.
    pub fn z_over_r(&self, r: f64) -> f64 {
        if r == 0.0 {
            return self.dz(0.0);
        }
        if r >= SUPPORT {
            return self.z(r) / r;
        }
        -self.inner_at(r) / (2.0 * r * r) - self.interp(&self.outer, r) / 2.0
    }

    /// `Z'(R) = (1 / 2R^2) ∫_0^R s^2 g - (1/2) ∫_R^2 g`.
    pub fn dz(&self, r: f64) -> f64 {
        if r == 0.0 {
            return -self.outer[0] / 2.0;
        }
        if r >= SUPPORT {
            return self.inner[self.inner.len() - 1] / (2.0 * r * r);
        }
        self.inner_at(r) / (2.0 * r * r) - self.interp(&self.outer, r) / 2.0
    }

    /// `z_y` at the origin, equal to `Z'(0)`.
    pub fn zy_origin(&self) -> f64 {
        self.dz(0.0)
    }
}

/// Solves the radial problem for `g` supported in `(0, 2]`.
///
/// Cell integrals use the two-point Gauss rule, so a jump of `g` at a grid
/// node is integrated without bias.
pub fn radial_poisson(g: &dyn Fn(f64) -> f64, n_r: usize) -> Result<RadialSolution> {
    if (1..=64).any(|k| g(SUPPORT + 1e-9 + 2.0 * k as f64 / 64.0) != 0.0) {
        return Err(Error::UnsupportedProfile);
    }
    let n_r = n_r.max(8);
    let step = SUPPORT / n_r as f64;
    let (xs, ws) = gauss_legendre(2);
    let mut inner = vec![0.0; n_r + 1];
    let mut cell_g = vec![0.0; n_r];
    for k in 0..n_r {
        let a = k as f64 * step;
        let (mut s2g, mut sg) = (0.0, 0.0);
        for (x, w) in xs.iter().zip(&ws) {
            let s = a + step * (x + 1.0) / 2.0;
            let v = g(s);
            s2g += w * s * s * v;
            sg += w * v;
        }
        inner[k + 1] = inner[k] + s2g * step / 2.0;
        cell_g[k] = sg * step / 2.0;
    }
    let mut outer = vec![0.0; n_r + 1];
    for k in (0..n_r).rev() {
        outer[k] = outer[k + 1] + cell_g[k];
    }
    Ok(RadialSolution { step, inner, outer })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeValue {
    pub z: f64,
    pub zx: f64,
    pub zy: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct OracleResolution {
    pub gauss_per_panel: usize,
    pub splits_per_panel: usize,
    pub n_theta: usize,
}

impl Default for OracleResolution {
    fn default() -> Self {
        OracleResolution { gauss_per_panel: 8, splits_per_panel: 24, n_theta: 768 }
    }
}

/// Direct quadrature of `z(x) = (1/2π) ∫ ln|x - y| f(y) dy` over the disk
/// `B_2(0)` and of its gradient, on a polar grid (Gauss panels in `R`
/// between `radial_knots`, uniform in `θ`).
///
/// The singular part is integrated analytically: the rule is applied to
/// `f(y) - f(x)` and `f(x)` times the exact potential of the uniform disk is
/// added back.
pub fn convolution_oracle(
    f: &dyn Fn(f64, f64) -> f64,
    radial_knots: &[f64],
    probes: &[(f64, f64)],
    res: OracleResolution,
) -> Vec<ProbeValue> {
    let rule = panels(radial_knots, res.gauss_per_panel, res.splits_per_panel);
    let dth = 2.0 * PI / res.n_theta as f64;
    let mut pts = Vec::with_capacity(rule.len() * res.n_theta);
    for &(r, w) in &rule {
        for t in 0..res.n_theta {
            let th = (t as f64 + 0.5) * dth;
            let (x, y) = (r * th.cos(), r * th.sin());
            pts.push((x, y, w * r * dth, f(x, y)));
        }
    }
    let rho = radial_knots.last().copied().unwrap_or(SUPPORT);
    let inv2pi = 1.0 / (2.0 * PI);
    probes
        .iter()
        .map(|&(px, py)| {
            let r0sq = px * px + py * py;
            let inside = r0sq.sqrt() < rho;
            let f0 = if inside { f(px, py) } else { 0.0 };
            let (mut z, mut zx, mut zy) = (0.0, 0.0, 0.0);
            for &(x, y, w, fv) in &pts {
                let (dx, dy) = (px - x, py - y);
                let d2 = dx * dx + dy * dy;
                if d2 == 0.0 {
                    continue;
                }
                let df = (fv - f0) * w;
                z += 0.5 * d2.ln() * df;
                zx += dx / d2 * df;
                zy += dy / d2 * df;
            }
            z *= inv2pi;
            zx *= inv2pi;
            zy *= inv2pi;
            if inside {
                // potential of the unit-density disk: (ρ²/2) ln ρ - (ρ² - |x|²)/4
                z += f0 * (0.5 * rho * rho * rho.ln() - (rho * rho - r0sq) / 4.0);
                zx += f0 * px / 2.0;
                zy += f0 * py / 2.0;
            }
            ProbeValue { z, zx, zy }
        })
        .collect()
}

/// Samples `ψ(R) z(R, θ)` at `scale (x - P)` with `P = (L/2, 1/2)`.
pub fn potential_seed(spec: &PotentialSpec, grid: &Grid) -> Result<ScalarField> {
    if (grid.l - spec.l).abs() > 1e-12 * spec.l {
        return Err(Error::InvalidParams(format!("grid width {} differs from spec L {}", grid.l, spec.l)));
    }
    let profile = radial_profile(spec);
    let sol = radial_poisson(&|r| profile.value(r), spec.n_r)?;
    Ok(sample_seed(spec, &sol, grid))
}

pub(crate) fn sample_seed(spec: &PotentialSpec, sol: &RadialSolution, grid: &Grid) -> ScalarField {
    let (px, py) = (spec.l / 2.0, 0.5);
    let s = spec.scale;
    let mut u = ScalarField::from_fn(*grid, |x, y| {
        let (xx, yy) = (s * (x - px), s * (y - py));
        let r = xx.hypot(yy);
        let cut = smoothstep_cutoff(r);
        if cut == 0.0 {
            0.0
        } else {
            cut * sol.z_over_r(r) * yy
        }
    })
    .with_class(ClassTag::A3);
    u.pin_left_edge();
    u
}
