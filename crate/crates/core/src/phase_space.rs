//! Uniform phase-space grids: rasterization, trapezoid quadrature, marginals
//! and rotated (homodyne) marginals.
//!
//! Values are stored row-major in x: `values[i * np + j] = W(x_i, p_j)`.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{lerp_node, pairwise_sum, trapezoid, trapezoid_weights};
use crate::output;
use crate::states::WignerFunction;

/// Boundary/peak ratio above which a window is considered too small.
pub const WINDOW_THRESHOLD: f64 = 1e-10;

const MIN_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl GridSpec {
    pub fn new(
        x_min: f64,
        x_max: f64,
        p_min: f64,
        p_max: f64,
        nx: usize,
        np: usize,
    ) -> Result<Self> {
        let spec = GridSpec {
            x_min,
            x_max,
            p_min,
            p_max,
            nx,
            np,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Square window [−half, half]² with `n` nodes per axis.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        GridSpec::new(-half_width, half_width, -half_width, half_width, n, n)
    }

    /// ±12 window, 1024 nodes per axis.
    pub fn desk() -> Self {
        GridSpec::symmetric(12.0, 1024).expect("static grid is valid")
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("x_min", self.x_min),
            ("x_max", self.x_max),
            ("p_min", self.p_min),
            ("p_max", self.p_max),
        ] {
            crate::states::ensure_finite(field, v)?;
        }
        if self.x_min >= self.x_max {
            return Err(Error::invalid(
                "x_min",
                format!("x_min ({}) must be < x_max ({})", self.x_min, self.x_max),
            ));
        }
        if self.p_min >= self.p_max {
            return Err(Error::invalid(
                "p_min",
                format!("p_min ({}) must be < p_max ({})", self.p_min, self.p_max),
            ));
        }
        if self.nx < MIN_NODES {
            return Err(Error::invalid(
                "nx",
                format!("need at least {MIN_NODES} nodes, got {}", self.nx),
            ));
        }
        if self.np < MIN_NODES {
            return Err(Error::invalid(
                "np",
                format!("need at least {MIN_NODES} nodes, got {}", self.np),
            ));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn x_at(&self, i: usize) -> f64 {
        lerp_node(self.x_min, self.x_max, i, self.nx)
    }

    pub fn p_at(&self, j: usize) -> f64 {
        lerp_node(self.p_min, self.p_max, j, self.np)
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x_at(i)).collect()
    }

    pub fn p_nodes(&self) -> Vec<f64> {
        (0..self.np).map(|j| self.p_at(j)).collect()
    }

    /// Index of the column lying exactly on x = 0, if there is one.
    pub fn origin_column(&self) -> Option<usize> {
        (0..self.nx).find(|&i| self.x_at(i) == 0.0)
    }

    /// Makes x = 0 a lattice line. A symmetric x-window with an even node
    /// count gets one extra node; anything else without an origin node is
    /// rejected.
    pub fn with_origin_node(self) -> Result<Self> {
        if self.origin_column().is_some() {
            return Ok(self);
        }
        if self.x_min == -self.x_max {
            let widened = GridSpec {
                nx: self.nx + 1,
                ..self
            };
            if widened.origin_column().is_some() {
                return Ok(widened);
            }
        }
        Err(Error::invalid(
            "x_min",
            "x = 0 must be a grid line; use a symmetric x-window",
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    spec: GridSpec,
    values: Vec<f64>,
    convention_tag: String,
    integral: f64,
}

/// Samples `f` on every node of `spec`. Rows are filled in parallel; the
/// result does not depend on the number of workers.
pub fn rasterize<F>(f: &F, spec: GridSpec, convention_tag: impl Into<String>) -> Result<WignerGrid>
where
    F: WignerFunction + ?Sized,
{
    spec.validate()?;
    let np = spec.np;
    let p_nodes = spec.p_nodes();
    let mut values = vec![0.0; spec.nx * np];
    values
        .par_chunks_mut(np)
        .enumerate()
        .try_for_each(|(i, row)| {
            let x = spec.x_at(i);
            for (slot, &p) in row.iter_mut().zip(&p_nodes) {
                let v = f.value(x, p);
                if !v.is_finite() {
                    return Err(Error::NonFinite { x, p, value: v });
                }
                *slot = v;
            }
            Ok(())
        })?;
    WignerGrid::from_values(spec, values, convention_tag)
}

impl WignerGrid {
    pub fn from_values(
        spec: GridSpec,
        values: Vec<f64>,
        convention_tag: impl Into<String>,
    ) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.nx * spec.np {
            return Err(Error::invalid(
                "values",
                format!(
                    "expected {} values, got {}",
                    spec.nx * spec.np,
                    values.len()
                ),
            ));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                x: spec.x_at(k / spec.np),
                p: spec.p_at(k % spec.np),
                value: values[k],
            });
        }
        let mut grid = WignerGrid {
            spec,
            values,
            convention_tag: convention_tag.into(),
            integral: 0.0,
        };
        grid.integral = integrate_2d(&grid, |_, _| 1.0);
        Ok(grid)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn convention_tag(&self) -> &str {
        &self.convention_tag
    }

    /// Trapezoid integral recorded at construction.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.np + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let np = self.spec.np;
        &self.values[i * np..(i + 1) * np]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Bilinear interpolation; zero outside the window.
    pub fn interpolate(&self, x: f64, p: f64) -> f64 {
        let s = &self.spec;
        let (Some((i, fx)), Some((j, fp))) = (
            locate(x, s.x_min, s.dx(), s.nx),
            locate(p, s.p_min, s.dp(), s.np),
        ) else {
            return 0.0;
        };
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        (1.0 - fx) * ((1.0 - fp) * v00 + fp * v01) + fx * ((1.0 - fp) * v10 + fp * v11)
    }

    /// W(x, ·) as a function of p at arbitrary x, linearly interpolated
    /// between columns. `None` outside the x-window.
    pub fn section(&self, x: f64) -> Option<Vec<f64>> {
        let s = &self.spec;
        let (i, f) = locate(x, s.x_min, s.dx(), s.nx)?;
        if f == 0.0 {
            return Some(self.row(i).to_vec());
        }
        Some(
            self.row(i)
                .iter()
                .zip(self.row(i + 1))
                .map(|(a, b)| (1.0 - f) * a + f * b)
                .collect(),
        )
    }

    /// Largest |W| on the outer ring of nodes divided by the largest |W|
    /// anywhere. Zero for an all-zero grid.
    pub fn boundary_ratio(&self) -> f64 {
        let (nx, np) = (self.spec.nx, self.spec.np);
        let peak = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak == 0.0 {
            return 0.0;
        }
        let mut edge = 0.0f64;
        for i in 0..nx {
            edge = edge.max(self.at(i, 0).abs()).max(self.at(i, np - 1).abs());
        }
        for j in 0..np {
            edge = edge.max(self.at(0, j).abs()).max(self.at(nx - 1, j).abs());
        }
        edge / peak
    }

    pub fn check_window(&self, threshold: f64) -> Result<()> {
        let ratio = self.boundary_ratio();
        if ratio > threshold {
            Err(Error::WindowTooSmall { ratio, threshold })
        } else {
            Ok(())
        }
    }

    /// CSV with header `x,p,w`, one line per cell, row-major in x.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = output::csv_writer(w);
        out.write_record(["x", "p", "w"])?;
        let p_nodes = self.spec.p_nodes();
        for i in 0..self.spec.nx {
            let x = output::fmt_f64(self.spec.x_at(i));
            for (j, &p) in p_nodes.iter().enumerate() {
                out.write_record([
                    x.as_str(),
                    &output::fmt_f64(p),
                    &output::fmt_f64(self.at(i, j)),
                ])?;
            }
        }
        out.flush().map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn sidecar(&self) -> GridSidecar {
        GridSidecar {
            spec: self.spec,
            convention_tag: self.convention_tag.clone(),
            integral: self.integral,
            min_value: self.min_value(),
        }
    }

    /// Writes `path` (CSV) and its `.json` sidecar.
    pub fn export(&self, path: &Path) -> Result<()> {
        let file = output::create_file(path)?;
        self.write_csv(file)?;
        output::write_json(&self.sidecar(), &output::sidecar_path(path))
    }
}

/// JSON sidecar accompanying an exported grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub spec: GridSpec,
    pub convention_tag: String,
    pub integral: f64,
    pub min_value: f64,
}

/// Cell index and fractional offset of `v` on a uniform axis.
fn locate(v: f64, lo: f64, h: f64, n: usize) -> Option<(usize, f64)> {
    let u = (v - lo) / h;
    let last = (n - 1) as f64;
    if !(0.0..=last).contains(&u) {
        return None;
    }
    let i = (u.floor() as usize).min(n - 2);
    Some((i, u - i as f64))
}

/// Trapezoid value of ∬ weight(x, p)·W(x, p) dx dp.
pub fn integrate_2d<F>(g: &WignerGrid, weight: F) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let s = &g.spec;
    let wx = trapezoid_weights(s.nx, s.dx());
    let wp = trapezoid_weights(s.np, s.dp());
    let p_nodes = s.p_nodes();
    let rows: Vec<f64> = (0..s.nx)
        .into_par_iter()
        .map(|i| {
            let x = s.x_at(i);
            let terms: Vec<f64> = g
                .row(i)
                .iter()
                .zip(&p_nodes)
                .zip(&wp)
                .map(|((&w, &p), &q)| q * weight(x, p) * w)
                .collect();
            wx[i] * pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&rows)
}

/// ∬ |x + p·τ| W(x, p) dx dp with the kink of |·| handled per momentum row.
///
/// Plain trapezoid carries an O(dx²) error that depends on where the kink
/// falls inside its cell; that error jumps as τ changes and swamps second
/// differences in τ. Each row subtracts g(a)·dx²·(s(1−s) − 1/6), the
/// leading-order trapezoid error for a kink at a = −p·τ with fractional
/// cell offset s.
pub fn integrate_abs_linear(g: &WignerGrid, tau: f64) -> f64 {
    let s = &g.spec;
    let dx = s.dx();
    let wx = trapezoid_weights(s.nx, dx);
    let wp = trapezoid_weights(s.np, s.dp());
    let x_nodes = s.x_nodes();
    let rows: Vec<f64> = (0..s.np)
        .into_par_iter()
        .map(|j| {
            let a = -s.p_at(j) * tau;
            let terms: Vec<f64> = (0..s.nx)
                .map(|i| wx[i] * (x_nodes[i] - a).abs() * g.at(i, j))
                .collect();
            let mut row = pairwise_sum(&terms);
            if let Some((i, frac)) = locate(a, s.x_min, dx, s.nx) {
                let ga = (1.0 - frac) * g.at(i, j) + frac * g.at(i + 1, j);
                row -= ga * dx * dx * (frac * (1.0 - frac) - 1.0 / 6.0);
            }
            wp[j] * row
        })
        .collect();
    pairwise_sum(&rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    pub axis_values: Vec<f64>,
    pub density: Vec<f64>,
    pub label: String,
}

impl Marginal {
    pub fn len(&self) -> usize {
        self.axis_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis_values.is_empty()
    }

    /// Trapezoid integral, assuming uniform spacing.
    pub fn total(&self) -> f64 {
        if self.len() < 2 {
            return 0.0;
        }
        let h = (self.axis_values[self.len() - 1] - self.axis_values[0]) / (self.len() - 1) as f64;
        trapezoid(&self.density, h)
    }

    /// Linear interpolation; zero outside the tabulated range.
    pub fn value_at(&self, q: f64) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let lo = self.axis_values[0];
        let h = (self.axis_values[n - 1] - lo) / (n - 1) as f64;
        match locate(q, lo, h, n) {
            Some((i, f)) => (1.0 - f) * self.density[i] + f * self.density[i + 1],
            None => 0.0,
        }
    }
}

/// Position density π₀(x): integrates out p for every x row.
pub fn marginal_along_p(g: &WignerGrid) -> Marginal {
    let s = &g.spec;
    let dp = s.dp();
    let density = (0..s.nx)
        .into_par_iter()
        .map(|i| trapezoid(g.row(i), dp))
        .collect();
    Marginal {
        axis_values: s.x_nodes(),
        density,
        label: "x".into(),
    }
}

/// Momentum density: integrates out x for every p column.
pub fn marginal_along_x(g: &WignerGrid) -> Marginal {
    let s = &g.spec;
    let dx = s.dx();
    let density = (0..s.np)
        .into_par_iter()
        .map(|j| {
            let column: Vec<f64> = (0..s.nx).map(|i| g.at(i, j)).collect();
            trapezoid(&column, dx)
        })
        .collect();
    Marginal {
        axis_values: s.p_nodes(),
        density,
        label: "p".into(),
    }
}

/// Density of the rotated quadrature x_θ = x cos θ + p sin θ.
///
/// For each q the bilinear interpolant of the grid is integrated exactly
/// along {x = q cos θ − u sin θ, p = q sin θ + u cos θ}, clipped to the
/// window. At θ = 0 the q nodes coincide with the x nodes.
pub fn rotated_marginal(g: &WignerGrid, theta: f64) -> Result<Marginal> {
    crate::states::ensure_finite("theta", theta)?;
    g.check_window(WINDOW_THRESHOLD)?;
    let s = &g.spec;
    let (sin, cos) = theta.sin_cos();
    let h = s.dx().min(s.dp());

    let corners = [
        (s.x_min, s.p_min),
        (s.x_min, s.p_max),
        (s.x_max, s.p_min),
        (s.x_max, s.p_max),
    ];
    let proj: Vec<f64> = corners.iter().map(|&(x, p)| x * cos + p * sin).collect();
    let q_lo = proj.iter().copied().fold(f64::INFINITY, f64::min);
    let q_hi = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let nq = node_count(q_hi - q_lo, h);

    let axis_values: Vec<f64> = (0..nq).map(|k| lerp_node(q_lo, q_hi, k, nq)).collect();
    let density = axis_values
        .par_iter()
        .map(|&q| line_integral(g, q, sin, cos))
        .collect();
    Ok(Marginal {
        axis_values,
        density,
        label: format!("x_theta(theta={theta})"),
    })
}

fn node_count(span: f64, h: f64) -> usize {
    ((span / h) * (1.0 - 1e-12)).ceil() as usize + 1
}

fn line_integral(g: &WignerGrid, q: f64, sin: f64, cos: f64) -> f64 {
    let s = &g.spec;
    let mut u_lo = f64::NEG_INFINITY;
    let mut u_hi = f64::INFINITY;
    // x = q cos − u sin must stay in [x_min, x_max]
    clip(&mut u_lo, &mut u_hi, q * cos, -sin, s.x_min, s.x_max);
    // p = q sin + u cos must stay in [p_min, p_max]
    clip(&mut u_lo, &mut u_hi, q * sin, cos, s.p_min, s.p_max);
    if !(u_hi > u_lo) {
        return 0.0;
    }
    // The interpolant is quadratic in u between grid-line crossings, so
    // Simpson's rule on each piece integrates it exactly.
    let mut cuts = vec![u_lo, u_hi];
    crossings(
        &mut cuts,
        q * cos,
        -sin,
        (s.x_min, s.x_max, s.nx),
        (u_lo, u_hi),
    );
    crossings(
        &mut cuts,
        q * sin,
        cos,
        (s.p_min, s.p_max, s.np),
        (u_lo, u_hi),
    );
    cuts.sort_by(f64::total_cmp);
    let at = |u: f64| g.interpolate(q * cos - u * sin, q * sin + u * cos);
    let mut pieces = Vec::with_capacity(cuts.len());
    let mut f0 = at(cuts[0]);
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let f1 = at(w[1]);
        pieces.push(len * (f0 + 4.0 * at(0.5 * (w[0] + w[1])) + f1) / 6.0);
        f0 = f1;
    }
    pairwise_sum(&pieces)
}

/// Appends the u at which `offset + slope·u` meets a grid line `lo + k·h`.
fn crossings(
    cuts: &mut Vec<f64>,
    offset: f64,
    slope: f64,
    axis: (f64, f64, usize),
    span: (f64, f64),
) {
    let (lo, hi, n) = axis;
    let (u_lo, u_hi) = span;
    if slope.abs() < 1e-15 {
        return;
    }
    for k in 0..n {
        let u = (lerp_node(lo, hi, k, n) - offset) / slope;
        if u > u_lo && u < u_hi {
            cuts.push(u);
        }
    }
}

/// Restricts [lo, hi] to the u for which `offset + slope·u` lies in [a, b].
fn clip(lo: &mut f64, hi: &mut f64, offset: f64, slope: f64, a: f64, b: f64) {
    if slope.abs() < 1e-15 {
        if offset < a || offset > b {
            *lo = f64::INFINITY;
            *hi = f64::NEG_INFINITY;
        }
        return;
    }
    let (u1, u2) = ((a - offset) / slope, (b - offset) / slope);
    *lo = lo.max(u1.min(u2));
    *hi = hi.min(u1.max(u2));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{CatStateParams, CoherentStateParams, Convention};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{PI, SQRT_2};

    fn coherent_grid(x0: f64, p0: f64, half: f64, n: usize) -> WignerGrid {
        let s = CoherentStateParams::new(x0, p0).unwrap();
        rasterize(&s, GridSpec::symmetric(half, n).unwrap(), "coherent").unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(1.0, 1.0, -1.0, 1.0, 16, 16).is_err());
        assert!(GridSpec::new(-1.0, 1.0, 2.0, 1.0, 16, 16).is_err());
        assert!(GridSpec::new(-1.0, 1.0, -1.0, 1.0, 7, 16).is_err());
        assert!(GridSpec::new(-1.0, f64::NAN, -1.0, 1.0, 16, 16).is_err());
        assert!(GridSpec::new(-1.0, 1.0, -1.0, 1.0, 8, 8).is_ok());
    }

    #[test]
    fn origin_node_forcing() {
        let even = GridSpec::symmetric(12.0, 1024).unwrap();
        assert_eq!(even.origin_column(), None);
        let odd = even.with_origin_node().unwrap();
        assert_eq!(odd.nx, 1025);
        assert_eq!(odd.origin_column(), Some(512));
        assert_eq!(odd.dx(), 24.0 / 1024.0);
        let skewed = GridSpec::new(-3.0, 5.0, -4.0, 4.0, 10, 10).unwrap();
        assert!(skewed.with_origin_node().is_err());
    }

    #[test]
    fn coherent_grid_normalized() {
        let g = coherent_grid(0.0, 0.0, 8.0, 512);
        assert_abs_diff_eq!(g.integral(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn cat_grid_matches_norm_integral() {
        let s = CatStateParams::new(SQRT_2, 0.0, Convention::AsPrinted).unwrap();
        let g = rasterize(&s, GridSpec::symmetric(12.0, 1024).unwrap(), "as-printed").unwrap();
        assert_abs_diff_eq!(
            g.integral(),
            crate::states::cat_norm_integral(&s),
            epsilon = 1e-8
        );
        assert_abs_diff_eq!(g.integral(), 2.270671, epsilon = 1e-6);
    }

    #[test]
    fn zero_evaluator() {
        let g = rasterize(
            &|_: f64, _: f64| 0.0,
            GridSpec::symmetric(4.0, 32).unwrap(),
            "zero",
        )
        .unwrap();
        assert_eq!(g.integral(), 0.0);
        assert!(g.values().iter().all(|&v| v == 0.0));
        assert!(marginal_along_p(&g).density.iter().all(|&v| v == 0.0));
        assert_eq!(g.boundary_ratio(), 0.0);
    }

    #[test]
    fn rejects_non_finite_output() {
        let f = |x: f64, _: f64| if x > 0.5 { f64::NAN } else { 1.0 };
        let err = rasterize(&f, GridSpec::symmetric(1.0, 16).unwrap(), "bad").unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn weighted_integrals() {
        let g = coherent_grid(0.0, 0.0, 8.0, 513);
        assert_abs_diff_eq!(integrate_2d(&g, |_, _| 1.0), 1.0, epsilon = 1e-8);
        // half-normal mean with variance 1/2
        let abs_mean = integrate_2d(&g, |x, _| x.abs());
        assert_abs_diff_eq!(abs_mean, 1.0 / PI.sqrt(), epsilon = 1e-4);
        let g1 = coherent_grid(0.0, 1.3, 8.0, 513);
        assert_abs_diff_eq!(
            integrate_2d(&g1, |x, _| crate::numeric::sign0(x)),
            0.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn abs_linear_matches_closed_form() {
        // coherent at origin: x + pτ ~ N(0, (1 + τ²)/2)
        let g = coherent_grid(0.0, 0.0, 10.0, 401);
        for &tau in &[0.0, 0.05, 0.2, -0.37] {
            let exact = ((1.0 + tau * tau) / PI).sqrt();
            assert_abs_diff_eq!(integrate_abs_linear(&g, tau), exact, epsilon = 1e-7);
        }
    }

    #[test]
    fn coherent_marginals_are_gaussian() {
        let (x0, p0) = (0.8, -1.1);
        let g = coherent_grid(x0, p0, 10.0, 401);
        let mx = marginal_along_p(&g);
        for (x, d) in mx.axis_values.iter().zip(&mx.density) {
            let expected = (-(x - x0).powi(2)).exp() / PI.sqrt();
            assert_abs_diff_eq!(*d, expected, epsilon = 1e-12);
        }
        let mp = marginal_along_x(&g);
        assert_abs_diff_eq!(mp.value_at(p0), 1.0 / PI.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn cat_momentum_marginal_fringes() {
        let x0 = SQRT_2;
        let s = CatStateParams::new(x0, 0.0, Convention::AsPrinted).unwrap();
        let g = rasterize(&s, GridSpec::symmetric(10.0, 801).unwrap(), "as-printed").unwrap();
        let mp = marginal_along_x(&g);
        for (p, d) in mp.axis_values.iter().zip(&mp.density) {
            // ∫ dx of the printed form, done by hand
            let expected = 2.0 / PI.sqrt() * (-p * p).exp() * (1.0 + (2.0 * p * x0).cos());
            assert_abs_diff_eq!(*d, expected, epsilon = 1e-12);
        }
        let mx = marginal_along_p(&g);
        for (x, d) in mx.axis_values.iter().zip(&mx.density) {
            let expected = ((-(x - x0).powi(2)).exp()
                + (-(x + x0).powi(2)).exp()
                + 2.0 * (-x * x - x0 * x0).exp())
                / PI.sqrt();
            assert_abs_diff_eq!(*d, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn rotation_by_zero_is_position_marginal() {
        let g = coherent_grid(0.5, 0.3, 8.0, 129);
        let r = rotated_marginal(&g, 0.0).unwrap();
        let m = marginal_along_p(&g);
        assert_eq!(r.len(), m.len());
        for k in 0..r.len() {
            assert_abs_diff_eq!(r.axis_values[k], m.axis_values[k], epsilon = 1e-12);
            assert_abs_diff_eq!(r.density[k], m.density[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn rotation_by_quarter_turn_gives_momentum_density() {
        let (x0, p0) = (0.5, 1.2);
        let g = coherent_grid(x0, p0, 8.0, 257);
        let r = rotated_marginal(&g, PI / 2.0).unwrap();
        for (q, d) in r.axis_values.iter().zip(&r.density) {
            let expected = (-(q - p0).powi(2)).exp() / PI.sqrt();
            assert_abs_diff_eq!(*d, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn small_window_is_rejected() {
        let g = coherent_grid(0.0, 0.0, 2.0, 64);
        assert!(matches!(
            rotated_marginal(&g, 0.3),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn csv_layout() {
        let g = coherent_grid(0.0, 0.0, 1.0, 8);
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,p,w");
        assert_eq!(lines.len(), 1 + 64);
        assert!(!text.contains('\r'));
        // second line: x_0, p_1
        let fields: Vec<f64> = lines[2].split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields[0], -1.0);
        assert_eq!(fields[1], g.spec().p_at(1));
        assert_eq!(fields[2], g.at(0, 1));
    }
}
