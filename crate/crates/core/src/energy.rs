//! The well potential, the transformed set `B(u)`, and the three energies.
//!
//! Discretization: `u_yy` and `u_xx` are nodal (see [`crate::field`]) and are
//! integrated with the field quadrature. The first derivatives `u_x`, `u_y`
//! and the mixed derivative `u_xy` are evaluated at cell centers from the four
//! corners of each cell, which keeps the elastic term free of the
//! odd/even decoupling that nodal central differences would allow. Membership
//! in `B(u)` is decided per cell from the cell-center `u_y`, so
//! `area_B + area_A` is exactly the area of the domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{dyy_into, validate_admissible, Grid, ScalarField, XStencil};

/// Cells with `|u_y| >= 1 - B_TIE_TOL` count as `B`. Exact ties at 1 belong to
/// `B`; the tolerance absorbs rounding in difference quotients of fields whose
/// slope is exactly one.
pub const B_TIE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Variant {
    E1 = 1,
    E2 = 2,
    E3 = 3,
}

impl TryFrom<u8> for Variant {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Variant::E1),
            2 => Ok(Variant::E2),
            3 => Ok(Variant::E3),
            _ => Err(format!("variant must be 1, 2 or 3, got {v}")),
        }
    }
}

impl From<Variant> for u8 {
    fn from(v: Variant) -> u8 {
        v as u8
    }
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::E1, Variant::E2, Variant::E3];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub epsilon: f64,
    pub delta: f64,
    pub variant: Variant,
    #[serde(default)]
    pub smooth_w: f64,
}

impl EnergyParams {
    pub fn new(epsilon: f64, delta: f64, variant: Variant) -> Result<Self> {
        let p = EnergyParams { epsilon, delta, variant, smooth_w: 0.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_smoothing(mut self, w: f64) -> Self {
        self.smooth_w = w;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParams(format!("epsilon = {} must be > 0", self.epsilon)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParams(format!("delta = {} must be >= 0", self.delta)));
        }
        if !(0.0..=0.5).contains(&self.smooth_w) {
            return Err(Error::InvalidParams(format!(
                "smooth_w = {} must lie in [0, 0.5]",
                self.smooth_w
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub surface: f64,
    pub elastic: f64,
    pub well: f64,
    pub total: f64,
    #[serde(rename = "area_B")]
    pub area_b: f64,
    #[serde(rename = "area_A")]
    pub area_a: f64,
}

/// `W(a, b) = a^2 + delta * chi_(-1,1)(b)`.
pub fn well_potential(a: f64, b: f64, delta: f64) -> f64 {
    a * a + if b.abs() < 1.0 { delta } else { 0.0 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BSetGeometry {
    /// One flag per cell, indexed `i * ny + j` for `i in 0..nx`.
    pub b_mask: Vec<bool>,
    pub area_b: f64,
    /// Cell columns that contain at least one `B` cell.
    pub pi_columns: Vec<usize>,
    pub len_pi: f64,
    /// `area_b / len_pi`; `None` when `B` is empty.
    pub tau: Option<f64>,
    /// `L^1(l_x ∩ B)` for every cell column.
    pub column_lengths: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedBSet {
    pub m: f64,
    pub pi_m_columns: Vec<usize>,
    pub b_m_mask: Vec<bool>,
    pub area_b_m: f64,
    pub len_pi_m: f64,
}

/// Cell-center `u_y`, one entry per cell.
pub fn cell_uy(u: &ScalarField) -> Vec<f64> {
    let g = u.grid;
    let ny = g.ny;
    let s = 0.5 / g.hy;
    let mut out = Vec::with_capacity(g.nx * ny);
    for i in 0..g.nx {
        let a = u.column(i);
        let b = u.column(i + 1);
        for j in 0..ny {
            let jp = if j + 1 == ny { 0 } else { j + 1 };
            out.push((a[jp] - a[j] + b[jp] - b[j]) * s);
        }
    }
    out
}

/// Cell-center `u_x`, one entry per cell.
pub fn cell_ux(u: &ScalarField) -> Vec<f64> {
    let g = u.grid;
    let ny = g.ny;
    let s = 0.5 / g.hx;
    let mut out = Vec::with_capacity(g.nx * ny);
    for i in 0..g.nx {
        let a = u.column(i);
        let b = u.column(i + 1);
        for j in 0..ny {
            let jp = if j + 1 == ny { 0 } else { j + 1 };
            out.push((b[j] - a[j] + b[jp] - a[jp]) * s);
        }
    }
    out
}

#[inline]
pub fn in_b(uy: f64) -> bool {
    uy.abs() >= 1.0 - B_TIE_TOL
}

pub fn b_geometry(u: &ScalarField) -> BSetGeometry {
    let g = u.grid;
    let uy = cell_uy(u);
    let b_mask: Vec<bool> = uy.iter().map(|&v| in_b(v)).collect();
    let mut column_lengths = Vec::with_capacity(g.nx);
    let mut pi_columns = Vec::new();
    let mut count = 0usize;
    for i in 0..g.nx {
        let c = b_mask[i * g.ny..(i + 1) * g.ny].iter().filter(|&&b| b).count();
        count += c;
        column_lengths.push(c as f64 * g.hy);
        if c > 0 {
            pi_columns.push(i);
        }
    }
    let area_b = count as f64 * g.cell_area();
    let len_pi = g.hx * pi_columns.len() as f64;
    let tau = if count > 0 { Some(area_b / len_pi) } else { None };
    BSetGeometry { b_mask, area_b, pi_columns, len_pi, tau, column_lengths }
}

/// `∫ u_yy^2 dy` along every cell column (mean of its two node columns).
pub fn column_uyy_sq(u: &ScalarField) -> Vec<f64> {
    let g = u.grid;
    let mut uyy = vec![0.0; g.len()];
    dyy_into(&g, &u.values, &mut uyy);
    let node: Vec<f64> =
        uyy.chunks_exact(g.ny).map(|c| c.iter().map(|v| v * v).sum::<f64>() * g.hy).collect();
    node.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Restricts `B` to columns whose `∫ u_yy^2 dy` is below `m`.
pub fn truncate_b(u: &ScalarField, m: f64) -> Result<TruncatedBSet> {
    let geo = b_geometry(u);
    if geo.area_b == 0.0 {
        return Err(Error::EmptyB);
    }
    let g = u.grid;
    let col = column_uyy_sq(u);
    let pi_m_columns: Vec<usize> = geo.pi_columns.iter().copied().filter(|&i| col[i] < m).collect();
    let mut b_m_mask = vec![false; geo.b_mask.len()];
    let mut count = 0usize;
    for &i in &pi_m_columns {
        for j in 0..g.ny {
            let k = i * g.ny + j;
            if geo.b_mask[k] {
                b_m_mask[k] = true;
                count += 1;
            }
        }
    }
    Ok(TruncatedBSet {
        m,
        len_pi_m: g.hx * pi_m_columns.len() as f64,
        pi_m_columns,
        b_m_mask,
        area_b_m: count as f64 * g.cell_area(),
    })
}

/// Sharp energy of an admissible field.
pub fn energy(u: &ScalarField, p: &EnergyParams) -> Result<EnergyBreakdown> {
    p.validate()?;
    let report = validate_admissible(u);
    if !report.admissible {
        return Err(Error::NotAdmissible(report.violations.join("; ")));
    }
    Ok(energy_unchecked(u, p))
}

/// Sharp energy without the admissibility check.
pub fn energy_unchecked(u: &ScalarField, p: &EnergyParams) -> EnergyBreakdown {
    let terms = evaluate(&u.grid, &u.values, p, Well::Sharp, None);
    let area_b = terms.b_cells as f64 * u.grid.cell_area();
    let area_a = u.grid.cell_area() * (u.grid.nx * u.grid.ny - terms.b_cells) as f64;
    let well = p.delta * area_a;
    EnergyBreakdown {
        surface: terms.surface,
        elastic: terms.elastic,
        well,
        total: terms.surface + terms.elastic + well,
        area_b,
        area_a,
    }
}

/// Energy with the indicator replaced by [`smooth_indicator`] of width
/// `p.smooth_w`. Never below the sharp energy; equal to it when `smooth_w = 0`.
pub fn energy_smoothed(u: &ScalarField, p: &EnergyParams) -> f64 {
    let t = evaluate(&u.grid, &u.values, p, Well::Smooth(p.smooth_w), None);
    t.surface + t.elastic + t.well
}

/// Exact gradient of [`energy_smoothed`] with respect to nodal values. The
/// left-edge column is zero.
pub fn energy_gradient(u: &ScalarField, p: &EnergyParams) -> Result<ScalarField> {
    if p.smooth_w <= 0.0 {
        return Err(Error::ZeroSmoothing);
    }
    let mut grad = vec![0.0; u.values.len()];
    evaluate(&u.grid, &u.values, p, Well::Smooth(p.smooth_w), Some(&mut grad));
    Ok(ScalarField { grid: u.grid, values: grad, class: u.class })
}

/// Smoothed value and gradient in one pass, on raw nodal storage.
pub(crate) fn smoothed_value_and_gradient(
    grid: &Grid,
    values: &[f64],
    p: &EnergyParams,
    grad: &mut [f64],
) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let t = evaluate(grid, values, p, Well::Smooth(p.smooth_w), Some(grad));
    t.surface + t.elastic + t.well
}

pub(crate) fn smoothed_value(grid: &Grid, values: &[f64], p: &EnergyParams) -> f64 {
    let t = evaluate(grid, values, p, Well::Smooth(p.smooth_w), None);
    t.surface + t.elastic + t.well
}

/// `1` on `[0, 1]`, `0` on `[1 + w, inf)`, cubic and C^1 in between, with
/// its derivative in `t`.
///
/// The ramp sits above the threshold, so the smoothed energy bounds the sharp
/// one from above and a descent that settles at `|u_y| = 1^+` keeps its cells
/// in `B`.
#[inline]
pub fn smooth_indicator(t: f64, w: f64) -> (f64, f64) {
    let t = t.abs();
    if t <= 1.0 {
        (1.0, 0.0)
    } else if t >= 1.0 + w {
        (0.0, 0.0)
    } else {
        let z = (t - 1.0) / w;
        (1.0 - z * z * (3.0 - 2.0 * z), -6.0 * z * (1.0 - z) / w)
    }
}

#[derive(Clone, Copy)]
enum Well {
    Sharp,
    Smooth(f64),
}

struct Terms {
    surface: f64,
    elastic: f64,
    well: f64,
    b_cells: usize,
}

fn evaluate(grid: &Grid, u: &[f64], p: &EnergyParams, well: Well, mut grad: Option<&mut [f64]>) -> Terms {
    let g = *grid;
    let ny = g.ny;
    let area = g.cell_area();
    let eps2 = p.epsilon * p.epsilon;

    // nodal u_yy, weighted by the quadrature
    let mut uyy = vec![0.0; u.len()];
    dyy_into(&g, u, &mut uyy);
    let mut surface = 0.0;
    for (i, col) in uyy.chunks_mut(ny).enumerate() {
        let w = g.column_weight(i) * area * eps2;
        for v in col.iter_mut() {
            surface += w * *v * *v;
            // adjoint seed: d/dr of w r^2
            *v *= 2.0 * w;
        }
    }
    if let Some(gr) = grad.as_deref_mut() {
        // periodic second difference is symmetric
        let mut tmp = vec![0.0; u.len()];
        dyy_into(&g, &uyy, &mut tmp);
        gr.iter_mut().zip(&tmp).for_each(|(a, b)| *a += b);
    }

    if p.variant == Variant::E3 {
        let sxx = XStencil::second(&g);
        let mut uxx = vec![0.0; u.len()];
        sxx.apply(ny, u, &mut uxx);
        for (i, col) in uxx.chunks_mut(ny).enumerate() {
            let w = g.column_weight(i) * area * eps2;
            for v in col.iter_mut() {
                surface += w * *v * *v;
                *v *= 2.0 * w;
            }
        }
        if let Some(gr) = grad.as_deref_mut() {
            sxx.apply_transpose_add(ny, &uxx, gr);
        }
    }

    let mixed_weight = match p.variant {
        Variant::E1 => 0.0,
        Variant::E2 => eps2,
        Variant::E3 => 2.0 * eps2,
    };

    let sx = 0.5 / g.hx;
    let sy = 0.5 / g.hy;
    let sxy = 1.0 / (g.hx * g.hy);
    let mut elastic = 0.0;
    let mut well_sum = 0.0;
    let mut b_cells = 0usize;
    for i in 0..g.nx {
        let a0 = i * ny;
        let b0 = (i + 1) * ny;
        for j in 0..ny {
            let jp = if j + 1 == ny { 0 } else { j + 1 };
            let (u00, u01, u10, u11) = (u[a0 + j], u[a0 + jp], u[b0 + j], u[b0 + jp]);
            let ux = (u10 - u00 + u11 - u01) * sx;
            let uy = (u01 - u00 + u11 - u10) * sy;
            elastic += area * ux * ux;
            // adjoint coefficients for the four corners
            let mut c_ux = 2.0 * area * ux;
            let mut c_uy = 0.0;
            let mut c_uxy = 0.0;
            if mixed_weight > 0.0 {
                let uxy = (u11 - u10 - u01 + u00) * sxy;
                surface += mixed_weight * area * uxy * uxy;
                c_uxy = 2.0 * mixed_weight * area * uxy;
            }
            match well {
                Well::Sharp => {
                    if in_b(uy) {
                        b_cells += 1;
                    }
                }
                Well::Smooth(w) => {
                    if in_b(uy) {
                        b_cells += 1;
                    }
                    let (s, ds) = if w > 0.0 {
                        smooth_indicator(uy, w)
                    } else {
                        (if in_b(uy) { 0.0 } else { 1.0 }, 0.0)
                    };
                    well_sum += s;
                    c_uy = p.delta * area * ds * uy.signum();
                }
            }
            if let Some(gr) = grad.as_deref_mut() {
                c_ux *= sx;
                c_uy *= sy;
                c_uxy *= sxy;
                gr[a0 + j] += -c_ux - c_uy + c_uxy;
                gr[a0 + jp] += -c_ux + c_uy - c_uxy;
                gr[b0 + j] += c_ux - c_uy - c_uxy;
                gr[b0 + jp] += c_ux + c_uy + c_uxy;
            }
        }
    }
    if let Some(gr) = grad {
        gr[..ny].iter_mut().for_each(|v| *v = 0.0);
    }
    let well_val = match well {
        Well::Sharp => p.delta * area * (g.nx * ny - b_cells) as f64,
        Well::Smooth(_) => p.delta * area * well_sum,
    };
    Terms { surface, elastic, well: well_val, b_cells }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn params(eps: f64, delta: f64, v: Variant) -> EnergyParams {
        EnergyParams::new(eps, delta, v).unwrap()
    }

    #[test]
    fn potential_values() {
        assert_eq!(well_potential(0.0, 0.0, 0.5), 0.5);
        assert_eq!(well_potential(0.0, 1.0, 0.5), 0.0);
        assert_eq!(well_potential(0.0, -1.0, 0.5), 0.0);
        assert!((well_potential(2.0, 0.5, 0.3) - 4.3).abs() < 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(EnergyParams::new(0.0, 1.0, Variant::E1).is_err());
        assert!(EnergyParams::new(0.1, -1.0, Variant::E1).is_err());
        assert!(params(0.1, 1.0, Variant::E1).with_smoothing(0.6).validate().is_err());
        let js = serde_json::to_string(&params(0.1, 1.0, Variant::E2)).unwrap();
        assert!(js.contains("\"variant\":2"));
        assert!(serde_json::from_str::<EnergyParams>(r#"{"epsilon":0.1,"delta":1,"variant":4}"#).is_err());
    }

    #[test]
    fn zero_field() {
        let g = Grid::new(1.0, 16, 16).unwrap();
        let z = ScalarField::zeros(g);
        for v in Variant::ALL {
            let e = energy(&z, &params(0.3, 0.7, v)).unwrap();
            assert!((e.total - 0.7).abs() < 1e-14);
            assert_eq!(e.area_b, 0.0);
            assert_eq!(e.area_a, 1.0);
        }
        let geo = b_geometry(&z);
        assert!(geo.pi_columns.is_empty());
        assert!(geo.tau.is_none());
        assert!(matches!(truncate_b(&z, 1.0), Err(Error::EmptyB)));
    }

    #[test]
    fn rejects_inadmissible() {
        let g = Grid::new(1.0, 16, 16).unwrap();
        let u = ScalarField::from_fn(g, |x, _| 1.0 + x);
        assert!(matches!(energy(&u, &params(0.1, 0.1, Variant::E1)), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn e1_closed_form() {
        // u = x sin(2 pi y): eps^2 ∫u_yy^2 = eps^2 16 pi^4 (L^3/3)(1/2), ∫u_x^2 = L/2
        let eps = 0.1;
        let g = Grid::new(1.0, 512, 512).unwrap();
        let u = ScalarField::from_fn(g, |x, y| x * (2.0 * PI * y).sin());
        let e = energy(&u, &params(eps, 0.0, Variant::E1)).unwrap();
        let surface = eps * eps * 16.0 * PI.powi(4) / 6.0;
        let elastic = 0.5;
        assert!(((e.surface - surface) / surface).abs() < 5e-3, "{}", e.surface);
        assert!(((e.elastic - elastic) / elastic).abs() < 5e-3, "{}", e.elastic);
        assert!(((e.total - surface - elastic) / (surface + elastic)).abs() < 5e-3);
    }

    /// Closed-form measure of `{y : |a cos(2 pi y)| >= 1}` on one period.
    fn measure_cos_above(a: f64) -> f64 {
        if a.abs() < 1.0 {
            0.0
        } else {
            // |cos t| >= 1/a on a fraction 2 acos(1/a)/pi of the period
            2.0 * (1.0 / a.abs()).acos() / PI
        }
    }

    #[test]
    fn b_area_matches_column_measure() {
        // u_y = 2 (x/L) cos(2 pi y)  <=  u = (x/L) sin(2 pi y)/pi
        let l = 1.0;
        let g = Grid::new(l, 512, 512).unwrap();
        let u = ScalarField::from_fn(g, |x, y| (x / l) * (2.0 * PI * y).sin() / PI);
        let geo = b_geometry(&u);
        // oracle: midpoint quadrature of the per-column closed form
        let n = 100_000;
        let oracle: f64 = (0..n)
            .map(|k| measure_cos_above(2.0 * (k as f64 + 0.5) / n as f64) * l / n as f64)
            .sum();
        assert!(((geo.area_b - oracle) / oracle).abs() < 0.01, "{} vs {oracle}", geo.area_b);
        let tau = geo.tau.unwrap();
        assert!(tau > 0.0 && tau <= 1.0);
        let from_cols: f64 = geo.column_lengths.iter().sum::<f64>() * g.hx;
        assert!((from_cols - geo.area_b).abs() < 1e-12);
    }

    #[test]
    fn truncation() {
        let g = Grid::new(1.0, 64, 64).unwrap();
        let u = ScalarField::from_fn(g, |x, y| x * (2.0 * PI * y).sin());
        let geo = b_geometry(&u);
        let t = truncate_b(&u, 1e30).unwrap();
        assert_eq!(t.pi_m_columns, geo.pi_columns);
        assert_eq!(t.area_b_m, geo.area_b);
        let cols = column_uyy_sq(&u);
        let min = geo.pi_columns.iter().map(|&i| cols[i]).fold(f64::INFINITY, f64::min);
        let t = truncate_b(&u, min - 1e-12).unwrap();
        assert!(t.pi_m_columns.is_empty());
        assert_eq!(t.area_b_m, 0.0);
    }

    fn random_field(g: Grid, rng: &mut ChaCha8Rng, amp: f64) -> ScalarField {
        let modes: Vec<(f64, f64, f64, f64)> = (0..6)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(1..5) as f64, rng.gen_range(0.0..1.0), rng.gen_range(0.5..3.0)))
            .collect();
        let l = g.l;
        ScalarField::from_fn(g, |x, y| {
            let s: f64 = modes
                .iter()
                .map(|&(a, m, ph, kx)| a * (2.0 * PI * (m * y + ph)).sin() * (kx * x / l).sin())
                .sum();
            amp * s * x / l
        })
    }

    #[test]
    fn variant_ordering_and_partition() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = Grid::new(1.3, 40, 48).unwrap();
        for _ in 0..20 {
            let u = random_field(g, &mut rng, 0.3);
            let e: Vec<_> = Variant::ALL.iter().map(|&v| energy(&u, &params(0.05, 0.2, v)).unwrap()).collect();
            assert!(e[0].total <= e[1].total && e[1].total <= e[2].total);
            for b in &e {
                assert_eq!(b.area_a + b.area_b, g.area());
                assert!((b.total - (b.surface + b.elastic + b.well)).abs() < 1e-12 * b.total.max(1.0));
            }
        }
    }

    #[test]
    fn shift_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = Grid::new(1.0, 32, 32).unwrap();
        let u = random_field(g, &mut rng, 0.4);
        for v in Variant::ALL {
            let p = params(0.05, 0.2, v);
            let e0 = energy(&u, &p).unwrap().total;
            let e1 = energy(&u.shift_y(5), &p).unwrap().total;
            assert!((e0 - e1).abs() <= 1e-10 * e0);
        }
    }

    #[test]
    fn smoothed_matches_sharp_outside_band() {
        let g = Grid::new(1.0, 32, 32).unwrap();
        let u = ScalarField::from_fn(g, |x, y| 0.05 * x * (2.0 * PI * y).sin());
        let p = params(0.1, 0.4, Variant::E2).with_smoothing(1e-3);
        assert_eq!(energy_smoothed(&u, &p), energy(&u, &p).unwrap().total);
        let steep = ScalarField::from_fn(g, |x, y| 0.5 * x * (2.0 * PI * y).sin());
        assert!(cell_uy(&steep).iter().all(|v| v.abs() < 1.0 || v.abs() >= 1.0 + 1e-3));
        assert_eq!(energy_smoothed(&steep, &p), energy(&steep, &p).unwrap().total);
        let z = ScalarField::zeros(g);
        let pg = params(0.1, 0.0, Variant::E3).with_smoothing(0.1);
        assert_eq!(energy_gradient(&z, &pg).unwrap().max_abs(), 0.0);
        assert!(matches!(energy_gradient(&z, &params(0.1, 0.0, Variant::E1)), Err(Error::ZeroSmoothing)));
    }

    #[test]
    fn smoothing_gap_is_bounded_by_band_area() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = Grid::new(1.0, 32, 32).unwrap();
        for _ in 0..10 {
            let u = random_field(g, &mut rng, 0.5);
            let p = params(0.05, 0.3, Variant::E1).with_smoothing(0.3);
            let uy = cell_uy(&u);
            let band = uy.iter().filter(|v| in_b(**v) && v.abs() < 1.3).count() as f64 * g.cell_area();
            assert!(band > 0.0);
            let gap = energy_smoothed(&u, &p) - energy(&u, &p).unwrap().total;
            assert!(gap >= -1e-12 && gap <= p.delta * band + 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Grid::new(1.0, 24, 24).unwrap();
        for v in Variant::ALL {
            let u = random_field(g, &mut rng, 0.4);
            let p = params(0.07, 0.5, v).with_smoothing(0.25);
            let grad = energy_gradient(&u, &p).unwrap();
            let dir = random_field(g, &mut rng, 1.0);
            let analytic: f64 = grad.values.iter().zip(&dir.values).map(|(a, b)| a * b).sum();
            let h = 1e-5;
            let fd = (energy_smoothed(&u.combine(1.0, &dir, h), &p) - energy_smoothed(&u.combine(1.0, &dir, -h), &p)) / (2.0 * h);
            assert!(((analytic - fd) / fd.abs().max(1e-12)).abs() < 1e-6, "{v:?}: {analytic} vs {fd}");
        }
    }
}
