//! Uniform-grid scalar fields on the strip `[0, L] x [0, 1]`.
//!
//! Nodes sit at `(i * hx, j * hy)` for `i in 0..=nx` and `j in 0..ny`. The
//! row `j = ny` is the same as `j = 0`, so periodicity in `y` is part of the
//! storage layout rather than a constraint. Values are stored column-major in
//! `y`: node `(i, j)` lives at `i * ny + j`.
//!
//! Derivatives in `y` are periodic central differences. Derivatives in `x`
//! are central in the interior and one-sided (second order) on the two
//! vertical edges. Quadrature is the cell-centered rule that evaluates the
//! bilinear interpolant at each cell center, which reduces to the trapezoid
//! rule in `x` and the rectangle rule in `y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dirichlet tolerance on the left edge used by [`validate_admissible`].
pub const TOL_BC: f64 = 1e-12;

/// Smallest admissible cell count per axis.
pub const MIN_CELLS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub l: f64,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl Grid {
    pub fn new(l: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidGrid(format!("width L = {l} must be positive")));
        }
        if nx < MIN_CELLS || ny < MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "cell counts nx = {nx}, ny = {ny} must both be at least {MIN_CELLS}"
            )));
        }
        Ok(Grid { l, nx, ny, hx: l / nx as f64, hy: 1.0 / ny as f64 })
    }

    /// Number of stored nodes, `(nx + 1) * ny`.
    #[inline]
    pub fn len(&self) -> usize {
        (self.nx + 1) * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy
    }

    /// Area of one cell.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }

    /// Area of the domain, which equals `L` because the height is one.
    #[inline]
    pub fn area(&self) -> f64 {
        self.l
    }

    /// Trapezoid weight of column `i` in `x`.
    #[inline]
    pub fn column_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.nx {
            0.5
        } else {
            1.0
        }
    }
}

/// Which admissible class a field claims to belong to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum ClassTag {
    A1,
    A2,
    #[default]
    A3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub class: ClassTag,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField { grid, values: vec![0.0; grid.len()], class: ClassTag::default() }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(ScalarField { grid, values, class: ClassTag::default() })
    }

    /// Samples `f(x, y)` at every stored node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..=grid.nx {
            let x = grid.x(i);
            for j in 0..grid.ny {
                values.push(f(x, grid.y(j)));
            }
        }
        ScalarField { grid, values, class: ClassTag::default() }
    }

    pub fn with_class(mut self, class: ClassTag) -> Self {
        self.class = class;
        self
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn column(&self, i: usize) -> &[f64] {
        let ny = self.grid.ny;
        &self.values[i * ny..(i + 1) * ny]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            class: self.class,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// Pointwise `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &ScalarField, b: f64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        ScalarField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(u, v)| a * u + b * v).collect(),
            class: self.class,
        }
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        ScalarField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(u, v)| u * v).collect(),
            class: self.class,
        }
    }

    /// Circular shift by `k` whole cells in `y`.
    pub fn shift_y(&self, k: usize) -> Self {
        let ny = self.grid.ny;
        let mut values = vec![0.0; self.values.len()];
        for i in 0..=self.grid.nx {
            for j in 0..ny {
                values[i * ny + (j + k) % ny] = self.values[i * ny + j];
            }
        }
        ScalarField { grid: self.grid, values, class: self.class }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Sets the left edge to exactly zero.
    pub fn pin_left_edge(&mut self) {
        let ny = self.grid.ny;
        self.values[..ny].iter_mut().for_each(|v| *v = 0.0);
    }
}

/// A one-dimensional stencil along `x`: for output column `i`, a list of
/// `(source column, coefficient)` pairs.
pub(crate) struct XStencil {
    rows: Vec<Vec<(usize, f64)>>,
}

impl XStencil {
    pub(crate) fn first(grid: &Grid) -> Self {
        let n = grid.nx;
        let s = 1.0 / (2.0 * grid.hx);
        let mut rows = Vec::with_capacity(n + 1);
        rows.push(vec![(0, -3.0 * s), (1, 4.0 * s), (2, -s)]);
        for i in 1..n {
            rows.push(vec![(i - 1, -s), (i + 1, s)]);
        }
        rows.push(vec![(n - 2, s), (n - 1, -4.0 * s), (n, 3.0 * s)]);
        XStencil { rows }
    }

    pub(crate) fn second(grid: &Grid) -> Self {
        let n = grid.nx;
        let s = 1.0 / (grid.hx * grid.hx);
        let mut rows = Vec::with_capacity(n + 1);
        rows.push(vec![(0, 2.0 * s), (1, -5.0 * s), (2, 4.0 * s), (3, -s)]);
        for i in 1..n {
            rows.push(vec![(i - 1, s), (i, -2.0 * s), (i + 1, s)]);
        }
        rows.push(vec![(n - 3, -s), (n - 2, 4.0 * s), (n - 1, -5.0 * s), (n, 2.0 * s)]);
        XStencil { rows }
    }

    pub(crate) fn apply(&self, ny: usize, src: &[f64], dst: &mut [f64]) {
        for (i, row) in self.rows.iter().enumerate() {
            let out = &mut dst[i * ny..(i + 1) * ny];
            out.iter_mut().for_each(|v| *v = 0.0);
            for &(k, c) in row {
                let col = &src[k * ny..(k + 1) * ny];
                for (o, s) in out.iter_mut().zip(col) {
                    *o += c * s;
                }
            }
        }
    }

    /// Accumulates the transpose: `dst += S^T src`.
    pub(crate) fn apply_transpose_add(&self, ny: usize, src: &[f64], dst: &mut [f64]) {
        for (i, row) in self.rows.iter().enumerate() {
            let adj = &src[i * ny..(i + 1) * ny];
            for &(k, c) in row {
                let col = &mut dst[k * ny..(k + 1) * ny];
                for (d, a) in col.iter_mut().zip(adj) {
                    *d += c * a;
                }
            }
        }
    }
}

pub(crate) fn dy_into(grid: &Grid, src: &[f64], dst: &mut [f64]) {
    let ny = grid.ny;
    let s = 1.0 / (2.0 * grid.hy);
    for (col, out) in src.chunks_exact(ny).zip(dst.chunks_exact_mut(ny)) {
        for j in 0..ny {
            let up = col[if j + 1 == ny { 0 } else { j + 1 }];
            let dn = col[if j == 0 { ny - 1 } else { j - 1 }];
            out[j] = (up - dn) * s;
        }
    }
}

pub(crate) fn dyy_into(grid: &Grid, src: &[f64], dst: &mut [f64]) {
    let ny = grid.ny;
    let s = 1.0 / (grid.hy * grid.hy);
    for (col, out) in src.chunks_exact(ny).zip(dst.chunks_exact_mut(ny)) {
        for j in 0..ny {
            let up = col[if j + 1 == ny { 0 } else { j + 1 }];
            let dn = col[if j == 0 { ny - 1 } else { j - 1 }];
            out[j] = (up - 2.0 * col[j] + dn) * s;
        }
    }
}

fn derived(u: &ScalarField, values: Vec<f64>) -> ScalarField {
    ScalarField { grid: u.grid, values, class: u.class }
}

/// Periodic central difference in `y`.
pub fn d_y(u: &ScalarField) -> ScalarField {
    let mut out = vec![0.0; u.values.len()];
    dy_into(&u.grid, &u.values, &mut out);
    derived(u, out)
}

/// Central difference in `x`, one-sided second-order at `x = 0` and `x = L`.
pub fn d_x(u: &ScalarField) -> ScalarField {
    let mut out = vec![0.0; u.values.len()];
    XStencil::first(&u.grid).apply(u.grid.ny, &u.values, &mut out);
    derived(u, out)
}

pub fn d_yy(u: &ScalarField) -> ScalarField {
    let mut out = vec![0.0; u.values.len()];
    dyy_into(&u.grid, &u.values, &mut out);
    derived(u, out)
}

pub fn d_xx(u: &ScalarField) -> ScalarField {
    let mut out = vec![0.0; u.values.len()];
    XStencil::second(&u.grid).apply(u.grid.ny, &u.values, &mut out);
    derived(u, out)
}

pub fn d_xy(u: &ScalarField) -> ScalarField {
    d_x(&d_y(u))
}

/// Cell-centered quadrature of a nodal field over the domain.
///
/// Each cell contributes the bilinear interpolant at its center (the mean of
/// its four corners) times `hx * hy`, so the rule is exact for cellwise
/// bilinear integrands.
pub fn integrate(f: &ScalarField) -> f64 {
    integrate_values(&f.grid, &f.values)
}

pub(crate) fn integrate_values(grid: &Grid, values: &[f64]) -> f64 {
    let ny = grid.ny;
    let mut total = 0.0;
    for (i, col) in values.chunks_exact(ny).enumerate() {
        let s: f64 = col.iter().sum();
        total += grid.column_weight(i) * s;
    }
    total * grid.cell_area()
}

pub fn l2_norm(u: &ScalarField) -> f64 {
    let sq: Vec<f64> = u.values.iter().map(|v| v * v).collect();
    integrate_values(&u.grid, &sq).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub violations: Vec<String>,
    pub max_left_edge: f64,
}

/// Checks the left-edge Dirichlet condition and finiteness. Periodicity in
/// `y` holds by construction.
pub fn validate_admissible(u: &ScalarField) -> AdmissibilityReport {
    let mut violations = Vec::new();
    if !u.is_finite() {
        violations.push("non-finite values".to_string());
    }
    let max_left_edge = u.column(0).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(max_left_edge <= TOL_BC) {
        violations.push(format!("Dirichlet violation at x = 0: max |u(0, y)| = {max_left_edge:e}"));
    }
    AdmissibilityReport { admissible: violations.is_empty(), violations, max_left_edge }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_err(a: &ScalarField, f: impl Fn(f64, f64) -> f64) -> f64 {
        let g = a.grid;
        let mut m = 0.0_f64;
        for i in 0..=g.nx {
            for j in 0..g.ny {
                m = m.max((a.at(i, j) - f(g.x(i), g.y(j))).abs());
            }
        }
        m
    }

    #[test]
    fn grid_spacings() {
        let g = Grid::new(2.0, 64, 64).unwrap();
        assert_eq!(g.hx, 0.03125);
        assert_eq!(g.hy, 0.015625);
        assert!(Grid::new(1.0, 8, 8).is_ok());
        assert!(matches!(Grid::new(1.0, 4, 64), Err(Error::InvalidGrid(_))));
        assert!(Grid::new(0.0, 16, 16).is_err());
        assert!(Grid::new(-1.0, 16, 16).is_err());
    }

    #[test]
    fn dy_of_sine() {
        let g = Grid::new(1.0, 128, 128).unwrap();
        let u = ScalarField::from_fn(g, |_, y| (2.0 * PI * y).sin());
        let err = max_err(&d_y(&u), |_, y| 2.0 * PI * (2.0 * PI * y).cos());
        // central difference error is (2 pi)^3 hy^2 / 6
        assert!(err <= (2.0 * PI).powi(3) / 6.0 * g.hy * g.hy * 1.01, "{err}");
        let c = ScalarField::from_fn(g, |_, _| 3.5);
        assert_eq!(d_y(&c).max_abs(), 0.0);
        assert_eq!(d_yy(&c).max_abs(), 0.0);
    }

    #[test]
    fn dy_seam_uses_wrapped_rows() {
        let g = Grid::new(1.0, 8, 16).unwrap();
        let u = ScalarField::from_fn(g, |_, y| y * (1.0 - y));
        let d = d_y(&u);
        // rows ny-1 and 1: y = 15/16 and 1/16 give equal values, so the seam derivative is 0
        assert!(d.at(3, 0).abs() < 1e-15);
        let hy = g.hy;
        let expect = (u.at(3, 2) - u.at(3, 0)) / (2.0 * hy);
        assert!((d.at(3, 1) - expect).abs() < 1e-14);
        let expect_top = (u.at(3, 0) - u.at(3, 14)) / (2.0 * hy);
        assert!((d.at(3, 15) - expect_top).abs() < 1e-14);
    }

    #[test]
    fn dx_exactness() {
        let g = Grid::new(1.0, 32, 16).unwrap();
        let u = ScalarField::from_fn(g, |x, _| 3.0 * x);
        assert!(max_err(&d_x(&u), |_, _| 3.0) < 1e-12);
        let q = ScalarField::from_fn(g, |x, _| x * x);
        assert!(max_err(&d_x(&q), |x, _| 2.0 * x) < 1e-12);
        assert!(max_err(&d_xx(&q), |_, _| 2.0) < 1e-9);
        let c = ScalarField::from_fn(g, |_, _| -1.0);
        assert!(d_x(&c).max_abs() < 1e-12);
    }

    #[test]
    fn second_derivatives() {
        let g = Grid::new(1.0, 64, 128).unwrap();
        let u = ScalarField::from_fn(g, |_, y| (2.0 * PI * y).sin());
        let err = max_err(&d_yy(&u), |_, y| -4.0 * PI * PI * (2.0 * PI * y).sin());
        assert!(err < 4.0 * PI.powi(4) / 3.0 * g.hy * g.hy * 1.01, "{err}");
        // x*y is not periodic in y; only interior rows see the exact stencil
        let xy = ScalarField::from_fn(g, |x, y| x * y);
        let m = d_xy(&xy);
        for i in 0..=g.nx {
            for j in 1..g.ny - 1 {
                assert!((m.at(i, j) - 1.0).abs() < 1e-9);
            }
        }
        let aff = ScalarField::from_fn(g, |x, _| 2.0 * x - 0.5);
        assert!(d_xx(&aff).max_abs() < 1e-9);
        assert!(d_yy(&aff).max_abs() < 1e-9);
        assert!(d_xy(&aff).max_abs() < 1e-9);
    }

    #[test]
    fn quadrature() {
        let g = Grid::new(2.0, 16, 16).unwrap();
        assert!((integrate(&ScalarField::from_fn(g, |_, _| 1.0)) - 2.0).abs() < 1e-14);
        assert_eq!(integrate(&ScalarField::zeros(g)), 0.0);
        let g = Grid::new(1.0, 256, 256).unwrap();
        let s2 = ScalarField::from_fn(g, |_, y| (2.0 * PI * y).sin().powi(2));
        assert!((integrate(&s2) - 0.5).abs() < 1e-6);
        let s = ScalarField::from_fn(g, |_, y| (2.0 * PI * y).sin());
        assert!((l2_norm(&s) - 0.5_f64.sqrt()).abs() < 1e-6);
        let g4 = Grid::new(4.0, 16, 16).unwrap();
        assert!((l2_norm(&ScalarField::from_fn(g4, |_, _| 1.0)) - 2.0).abs() < 1e-14);
        assert_eq!(l2_norm(&ScalarField::zeros(g4)), 0.0);
        // bilinear integrand is integrated exactly
        let b = ScalarField::from_fn(g4, |x, _| 1.0 + 3.0 * x);
        assert!((integrate(&b) - (4.0 + 1.5 * 16.0)).abs() < 1e-12);
    }

    #[test]
    fn admissibility() {
        let g = Grid::new(1.0, 16, 16).unwrap();
        assert!(validate_admissible(&ScalarField::zeros(g)).admissible);
        let u = ScalarField::from_fn(g, |x, y| x * (2.0 * PI * y).sin());
        assert!(validate_admissible(&u).admissible);
        let bad = ScalarField::from_fn(g, |x, _| 1.0 + x);
        let r = validate_admissible(&bad);
        assert!(!r.admissible);
        assert!(r.violations[0].contains("Dirichlet"));
        let mut nan = ScalarField::zeros(g);
        nan.values[40] = f64::NAN;
        assert!(!validate_admissible(&nan).admissible);
    }

    #[test]
    fn second_order_convergence() {
        let err_at = |n: usize| {
            let g = Grid::new(1.5, n, n).unwrap();
            let l = g.l;
            let k = 2.0 * PI / l;
            let m = 2.0 * PI;
            let u = ScalarField::from_fn(g, |x, y| (k * x).sin() * (m * y).sin());
            [
                max_err(&d_x(&u), |x, y| k * (k * x).cos() * (m * y).sin()),
                max_err(&d_y(&u), |x, y| m * (k * x).sin() * (m * y).cos()),
                max_err(&d_xx(&u), |x, y| -k * k * (k * x).sin() * (m * y).sin()),
                max_err(&d_yy(&u), |x, y| -m * m * (k * x).sin() * (m * y).sin()),
                max_err(&d_xy(&u), |x, y| k * m * (k * x).cos() * (m * y).cos()),
            ]
        };
        let coarse = err_at(32);
        let fine = err_at(64);
        for (c, f) in coarse.iter().zip(&fine) {
            assert!(c / f >= 3.5, "ratio {}", c / f);
        }
    }
}
