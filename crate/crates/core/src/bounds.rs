//! Bound calculators and numerical certifiers for the inequalities behind the
//! local-minimality and critical-depth results.
//!
//! Verdicts on proven inequalities allow a relative slack of
//! `10 max(hx, hy)` for discretization error.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::calibration::Calibration;
use crate::energy::{b_geometry, cell_ux, cell_uy, column_uyy_sq, truncate_b};
use crate::error::{Error, Result};
use crate::field::{integrate, Grid, ScalarField};

/// Sharp constant of `∫ u_x^2 ≥ (C / L^2) ∫ u^2` with `u = 0` at `x = 0`.
pub const POINCARE_CONSTANT: f64 = PI * PI / 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub check: String,
    pub context: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`.
    pub slack: f64,
    pub holds: bool,
}

impl BoundReport {
    fn new(check: &str, context: String, lhs: f64, rhs: f64, factor: f64) -> Self {
        BoundReport {
            check: check.into(),
            context,
            lhs,
            rhs,
            slack: lhs - rhs,
            holds: lhs >= rhs * factor,
        }
    }

    pub const CSV_HEADER: &'static str = "check,context,lhs,rhs,slack,holds";

    pub fn csv_row(&self) -> String {
        format!(
            "{},\"{}\",{:e},{:e},{:e},{}",
            self.check,
            self.context.replace('"', "'"),
            self.lhs,
            self.rhs,
            self.slack,
            self.holds
        )
    }
}

pub fn reports_to_csv(reports: &[BoundReport]) -> String {
    let mut s = String::from(BoundReport::CSV_HEADER);
    s.push('\n');
    for r in reports {
        let _ = writeln!(s, "{}", r.csv_row());
    }
    s
}

/// Tolerance factor `1 - 10 max(hx, hy)` applied to right-hand sides.
pub fn grid_factor(g: &Grid) -> f64 {
    (1.0 - 10.0 * g.hx.max(g.hy)).max(0.0)
}

/// Continuum minimizer of `∫ f''^2` on `[y1, y2]` with `f'(y1) ≥ 1`,
/// `f'(y2) ≤ -1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSolution {
    pub y1: f64,
    pub y2: f64,
    pub value: f64,
}

impl ObstacleSolution {
    /// `(y - (y1 + y2)/2)^2 / (y1 - y2)`.
    pub fn profile(&self, y: f64) -> f64 {
        let m = 0.5 * (self.y1 + self.y2);
        (y - m).powi(2) / (self.y1 - self.y2)
    }

    pub fn slope(&self, y: f64) -> f64 {
        2.0 * (y - 0.5 * (self.y1 + self.y2)) / (self.y1 - self.y2)
    }
}

pub fn obstacle_min_1d(y1: f64, y2: f64) -> Result<ObstacleSolution> {
    if !(y2 > y1) {
        return Err(Error::DegenerateInterval { y1, y2 });
    }
    Ok(ObstacleSolution { y1, y2, value: 4.0 / (y2 - y1) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleQp {
    pub value: f64,
    pub nodes: Vec<f64>,
    pub profile: Vec<f64>,
    /// Multipliers of the two slope constraints; both nonnegative at a KKT point.
    pub multipliers: [f64; 2],
}

/// Discrete oracle: minimizes the trapezoid sum of `f''^2` over nodal values
/// with second-order one-sided slopes at the ends.
///
/// A linear `f` cannot satisfy both slope constraints, so both are active at
/// the optimum; the KKT system is solved with that active set and the
/// multiplier signs are returned for inspection.
pub fn obstacle_qp(y1: f64, y2: f64, n: usize) -> Result<ObstacleQp> {
    if !(y2 > y1) {
        return Err(Error::DegenerateInterval { y1, y2 });
    }
    if n < 5 {
        return Err(Error::InvalidParams(format!("obstacle QP needs at least 5 nodes, got {n}")));
    }
    let h = (y2 - y1) / (n - 1) as f64;
    // rows of the second-difference operator
    let mut d2 = DMatrix::<f64>::zeros(n, n);
    for k in 1..n - 1 {
        d2[(k, k - 1)] = 1.0;
        d2[(k, k)] = -2.0;
        d2[(k, k + 1)] = 1.0;
    }
    for (c, v) in [2.0, -5.0, 4.0, -1.0].into_iter().enumerate() {
        d2[(0, c)] = v;
        d2[(n - 1, n - 1 - c)] = v;
    }
    d2 /= h * h;
    let mut wd = d2.clone();
    for k in 0..n {
        let w = if k == 0 || k == n - 1 { 0.5 * h } else { h };
        wd.row_mut(k).scale_mut(w);
    }
    let hess = 2.0 * d2.transpose() * wd;
    // equality rows: f'(y1) = 1, f'(y2) = -1, f(y1) = 0
    let m = 3;
    let mut kkt = DMatrix::<f64>::zeros(n + m, n + m);
    kkt.view_mut((0, 0), (n, n)).copy_from(&hess);
    let mut a = DMatrix::<f64>::zeros(m, n);
    a[(0, 0)] = -3.0 / (2.0 * h);
    a[(0, 1)] = 4.0 / (2.0 * h);
    a[(0, 2)] = -1.0 / (2.0 * h);
    a[(1, n - 1)] = 3.0 / (2.0 * h);
    a[(1, n - 2)] = -4.0 / (2.0 * h);
    a[(1, n - 3)] = 1.0 / (2.0 * h);
    a[(2, 0)] = 1.0;
    kkt.view_mut((n, 0), (m, n)).copy_from(&a);
    kkt.view_mut((0, n), (n, m)).copy_from(&a.transpose());
    let mut rhs = DVector::<f64>::zeros(n + m);
    rhs[n] = 1.0;
    rhs[n + 1] = -1.0;
    let sol = kkt
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidParams("singular obstacle KKT system".into()))?;
    let f = sol.rows(0, n).into_owned();
    let curv = &d2 * &f;
    let value: f64 = (0..n).map(|k| if k == 0 || k == n - 1 { 0.5 * h } else { h } * curv[k] * curv[k]).sum();
    // stationarity reads hess f + a^T mu = 0 with mu = -lambda for a ≥ / ≤ pair
    let multipliers = [-sol[n], sol[n + 1]];
    Ok(ObstacleQp {
        value,
        nodes: (0..n).map(|k| y1 + k as f64 * h).collect(),
        profile: f.iter().copied().collect(),
        multipliers,
    })
}

/// `∫ u_yy^2 dx` with the same column quadrature as the truncation.
pub fn uyy_sq_integral(u: &ScalarField) -> f64 {
    column_uyy_sq(u).iter().sum::<f64>() * u.grid.hx
}

/// `∫ u_yy^2 / L^2(B) ≥ 4 / (τ (1 - τ))`.
pub fn lemma1_check(u: &ScalarField) -> Result<BoundReport> {
    let geo = b_geometry(u);
    let tau = geo.tau.ok_or(Error::EmptyB)?;
    if tau >= 1.0 - 1e-12 {
        return Err(Error::TauOne);
    }
    let lhs = uyy_sq_integral(u) / geo.area_b;
    let rhs = 4.0 / (tau * (1.0 - tau));
    Ok(BoundReport::new("lemma1", format!("tau={tau:.6}"), lhs, rhs, grid_factor(&u.grid)))
}

/// `(σ^-2 ∫f''^2 + σ^2 ∫f^2) / ∫f'^2`, minimized over `sigmas`, for one
/// periodic profile sampled on `[0, 1)`. `None` when `∫f'^2 = 0`.
pub fn interp_ratio(profile: &[f64], sigmas: &[f64]) -> Option<f64> {
    let n = profile.len();
    if n < 3 {
        return None;
    }
    let h = 1.0 / n as f64;
    let (mut f2, mut d1, mut d2) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let (a, b, c) = (profile[(k + n - 1) % n], profile[k], profile[(k + 1) % n]);
        f2 += b * b;
        d1 += ((c - b) / h).powi(2);
        d2 += ((c - 2.0 * b + a) / (h * h)).powi(2);
    }
    let (f2, d1, d2) = (f2 * h, d1 * h, d2 * h);
    if d1 <= 1e-300 * (f2 + d2).max(1.0) {
        return None;
    }
    sigmas
        .iter()
        .filter(|s| **s > 0.0)
        .map(|s| (d2 / (s * s) + s * s * f2) / d1)
        .min_by(f64::total_cmp)
}

/// Empirical infimum of [`interp_ratio`] over a family of profiles;
/// degenerate profiles are skipped.
pub fn estimate_interp_constant(family: &[Vec<f64>], sigmas: &[f64]) -> Option<f64> {
    family.iter().filter_map(|p| interp_ratio(p, sigmas)).min_by(f64::total_cmp)
}

/// Log-spaced σ grid over `[lo, hi]`.
pub fn sigma_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1).max(1) as f64).exp()).collect()
}

/// `∫ u_x^2 ≥ (π^2 / 4L^2) ∫ u^2`.
pub fn poincare_check(u: &ScalarField) -> BoundReport {
    let g = u.grid;
    let lhs = cell_ux(u).iter().map(|v| v * v).sum::<f64>() * g.cell_area();
    let rhs = POINCARE_CONSTANT / (g.l * g.l) * integrate(&u.mul(u));
    BoundReport::new("poincare", format!("L={}", g.l), lhs, rhs, grid_factor(&g))
}

/// Band `[4ε²/Δ, 1 - 4ε²/Δ]` that `τ` must lie in for a field with
/// `E ≤ E(0)`.
pub fn proportional_band(epsilon: f64, delta: f64) -> Result<(f64, f64)> {
    let threshold = 16.0 * epsilon * epsilon;
    if !(delta >= threshold * (1.0 - 1e-12)) {
        return Err(Error::BandEmpty { delta, threshold });
    }
    let lo = 4.0 * epsilon * epsilon / delta;
    Ok((lo, 1.0 - lo))
}

/// `||u||_2 ||u_x||_2 ≥ (C / M) (L^2(B_M) / L^1(Π_M))^2`.
///
/// The context records the raw ratio `lhs / ((1/M)(...)^2)`, which is what
/// the calibrated `C` is compared against.
pub fn killerinterp_check(u: &ScalarField, m: f64, cal: &Calibration) -> Result<BoundReport> {
    let t = truncate_b(u, m)?;
    if t.pi_m_columns.is_empty() {
        return Err(Error::EmptyPiM);
    }
    let g = u.grid;
    let ux = cell_ux(u).iter().map(|v| v * v).sum::<f64>() * g.cell_area();
    let lhs = integrate(&u.mul(u)).sqrt() * ux.sqrt();
    let base = (t.area_b_m / t.len_pi_m).powi(2) / m;
    let c = cal.get("killerinterp");
    Ok(BoundReport::new(
        "killerinterp",
        format!("M={m:e} raw_ratio={:e} C={c:e}", lhs / base),
        lhs,
        c * base,
        grid_factor(&g),
    ))
}

/// Per-column boundary term `∫ (u_y u_x)_y dy` and the column inequality
/// `∫ ε² u_yy² + u_x² ≥ ε max L^1(l_x ∩ B)` over columns where it vanishes.
pub fn wopper_check(u: &ScalarField, epsilon: f64) -> BoundReport {
    let g = u.grid;
    let ny = g.ny;
    let uy = cell_uy(u);
    let ux = cell_ux(u);
    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let tol = 1e-8 * (sup(&uy) * sup(&ux) + 1.0);
    let geo = b_geometry(u);
    let mut qualifying = 0usize;
    let mut max_len = 0.0_f64;
    for i in 0..g.nx {
        let col = |k: usize| uy[i * ny + k] * ux[i * ny + k];
        let boundary: f64 = (0..ny).map(|k| col((k + 1) % ny) - col(k)).sum();
        if boundary.abs() <= tol {
            qualifying += 1;
            max_len = max_len.max(geo.column_lengths[i]);
        }
    }
    let lhs = epsilon * epsilon * uyy_sq_integral(u) + ux.iter().map(|v| v * v).sum::<f64>() * g.cell_area();
    let rhs = epsilon * max_len;
    BoundReport::new(
        "wopper",
        format!("eps={epsilon} qualifying_columns={qualifying}/{}", g.nx),
        lhs,
        rhs,
        grid_factor(&g),
    )
}

/// `r = C ε^(7/2) Δ^-2`, `s = C ε^6 Δ^-4 L^-1`.
pub fn theorem2_bounds(epsilon: f64, delta: f64, l: f64, c: f64) -> (f64, f64) {
    (c * epsilon.powf(3.5) / (delta * delta), c * epsilon.powi(6) / (delta.powi(4) * l))
}

/// Calibrated `r` and `s`.
pub fn theorem2_bounds_calibrated(epsilon: f64, delta: f64, l: f64, cal: &Calibration) -> (f64, f64) {
    (
        theorem2_bounds(epsilon, delta, l, cal.get("theorem2_r")).0,
        theorem2_bounds(epsilon, delta, l, cal.get("theorem2_s")).1,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PqConstants {
    pub c_f: f64,
    pub c_g: f64,
    pub c_u: f64,
}

impl PqConstants {
    pub fn from_calibration(cal: &Calibration) -> Self {
        PqConstants { c_f: cal.get("pq_f"), c_g: cal.get("pq_g"), c_u: cal.get("pq_upper") }
    }
}

/// Region in the `(p, q) = (||v||_2, L^2(B)^(1/2))` plane compatible with
/// `pq ≥ f`, `p ≥ g q` and `p ≤ upper q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PqRegion {
    pub f_const: f64,
    pub g_slope: f64,
    pub upper_slope: f64,
    /// Intersection of `pq = f` with `p = g q`.
    pub p_min: f64,
    /// Intersection of `pq = f` with `p = upper q`.
    pub q_min: f64,
    pub nonempty: bool,
}

pub fn pq_region(epsilon: f64, delta: f64, l: f64, c: PqConstants) -> PqRegion {
    let f_const = c.c_f * epsilon.powi(6) * delta.powf(-3.5);
    let g_slope = c.c_g * epsilon / delta.sqrt();
    let upper_slope = c.c_u * l * delta.sqrt();
    PqRegion {
        f_const,
        g_slope,
        upper_slope,
        p_min: (f_const * g_slope).sqrt(),
        q_min: (f_const / upper_slope).sqrt(),
        nonempty: g_slope < upper_slope,
    }
}

/// `(max(16ε², c ε/L), C ε/L)` with calibrated `c`, `C`.
pub fn critical_delta_bounds(epsilon: f64, l: f64, cal: &Calibration) -> (f64, f64) {
    let lower = (16.0 * epsilon * epsilon).max(cal.get("critical_lower") * epsilon / l);
    (lower, cal.get("critical_upper") * epsilon / l)
}
