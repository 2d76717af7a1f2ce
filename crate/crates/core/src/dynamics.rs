//! Free-particle evolution of Wigner functions and the diagnostics built on
//! it: momentum moments π_n(x; t), conditional kinetic energy, the absolute
//! deviation ⟨|x|⟩ with its first two time derivatives, and the classical
//! curvature bound d²⟨|x|⟩/dt² ≥ 0.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{sign0, trapezoid};
use crate::output;
use crate::phase_space::{integrate_2d, rasterize, GridSpec, WignerGrid, WINDOW_THRESHOLD};
use crate::states::{ensure_finite, WignerFunction};

pub const MAX_MOMENT_ORDER: u32 = 4;
pub const DEFAULT_PI0_FLOOR: f64 = 1e-12;
pub const DEFAULT_TOL_NEG: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSpec {
    mass: f64,
    t: f64,
}

impl EvolutionSpec {
    pub fn new(mass: f64, t: f64) -> Result<Self> {
        ensure_finite("mass", mass)?;
        ensure_finite("t", t)?;
        if mass <= 0.0 {
            return Err(Error::invalid("mass", format!("must be > 0, got {mass}")));
        }
        Ok(EvolutionSpec { mass, t })
    }

    /// Unit mass.
    pub fn at(t: f64) -> Result<Self> {
        EvolutionSpec::new(1.0, t)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// W(x, p; t) = W(x − p·t/m, p; 0), evaluated by composition.
#[derive(Debug, Clone, Copy)]
pub struct FreeEvolution<'a, F: ?Sized> {
    initial: &'a F,
    drift: f64,
}

impl<F: WignerFunction + ?Sized> WignerFunction for FreeEvolution<'_, F> {
    fn value(&self, x: f64, p: f64) -> f64 {
        self.initial.value(x - p * self.drift, p)
    }
}

pub fn evolve_free<F: WignerFunction + ?Sized>(f: &F, ev: EvolutionSpec) -> FreeEvolution<'_, F> {
    FreeEvolution {
        initial: f,
        drift: ev.t / ev.mass,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    pub x_values: Vec<f64>,
    pub pi_values: Vec<f64>,
    pub order_n: u32,
    pub t: f64,
    pub convention_tag: String,
}

impl MomentProfile {
    /// Linear interpolation between grid columns; exact on nodes.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        let n = self.x_values.len();
        let k = self.x_values.partition_point(|&v| v < x);
        if k < n && self.x_values[k] == x {
            return Some(self.pi_values[k]);
        }
        if k == 0 || k == n {
            return None;
        }
        let (x0, x1) = (self.x_values[k - 1], self.x_values[k]);
        let f = (x - x0) / (x1 - x0);
        Some((1.0 - f) * self.pi_values[k - 1] + f * self.pi_values[k])
    }

    /// CSV with header `x,pi_n`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = output::csv_writer(w);
        out.write_record(["x", "pi_n"])?;
        for (x, v) in self.x_values.iter().zip(&self.pi_values) {
            out.write_record([output::fmt_f64(*x), output::fmt_f64(*v)])?;
        }
        out.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

fn check_order(order: u32) -> Result<()> {
    if order > MAX_MOMENT_ORDER {
        Err(Error::invalid(
            "order",
            format!("moment order must be in 0..={MAX_MOMENT_ORDER}, got {order}"),
        ))
    } else {
        Ok(())
    }
}

/// π_n(x_i) = ∫ dp pⁿ W(x_i, p) for every grid column. `t` is recorded as
/// metadata only.
pub fn moment_profile(g: &WignerGrid, order: u32, t: f64) -> Result<MomentProfile> {
    check_order(order)?;
    let spec = g.spec();
    let p_pow: Vec<f64> = spec
        .p_nodes()
        .iter()
        .map(|p| p.powi(order as i32))
        .collect();
    let dp = spec.dp();
    let pi_values = (0..spec.nx)
        .into_par_iter()
        .map(|i| column_moment(g.row(i), &p_pow, dp))
        .collect();
    Ok(MomentProfile {
        x_values: spec.x_nodes(),
        pi_values,
        order_n: order,
        t,
        convention_tag: g.convention_tag().to_owned(),
    })
}

fn column_moment(column: &[f64], p_pow: &[f64], dp: f64) -> f64 {
    let terms: Vec<f64> = column.iter().zip(p_pow).map(|(w, q)| w * q).collect();
    trapezoid(&terms, dp)
}

/// π₂(x) / (2m·π₀(x)), the kinetic energy conditioned on position.
pub fn conditional_kinetic_energy(g: &WignerGrid, x: f64, mass: f64) -> Result<f64> {
    conditional_kinetic_energy_with_floor(g, x, mass, DEFAULT_PI0_FLOOR)
}

pub fn conditional_kinetic_energy_with_floor(
    g: &WignerGrid,
    x: f64,
    mass: f64,
    floor: f64,
) -> Result<f64> {
    ensure_finite("x", x)?;
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::invalid("mass", format!("must be > 0, got {mass}")));
    }
    let column = g
        .section(x)
        .ok_or_else(|| Error::invalid("x", format!("{x} lies outside the grid window")))?;
    let p_nodes = g.spec().p_nodes();
    let dp = g.spec().dp();
    let pi0 = trapezoid(&column, dp);
    if !(pi0.abs() >= floor) {
        return Err(Error::IllConditionedConditional { x, pi0, floor });
    }
    let p2: Vec<f64> = p_nodes.iter().map(|p| p * p).collect();
    let pi2 = column_moment(&column, &p2, dp);
    Ok(pi2 / (2.0 * mass * pi0))
}

/// Closed-form π₂(0; t) for the even cat state with p0 = 0, under the
/// half-scaled convention:
/// (1/√π)·exp(−x0²/(1+t²))·(1 − x0² + t² + x0²t²)/(1+t²)^(5/2).
pub fn pi2_origin_analytic(t: f64, x0: f64) -> f64 {
    let s = 1.0 + t * t;
    let x2 = x0 * x0;
    (-x2 / s).exp() * (1.0 - x2 + t * t + x2 * t * t) / (PI.sqrt() * s.powf(2.5))
}

/// End of the interval [0, t*) on which π₂(0; t) < 0, or `None` when
/// |x0| ≤ 1 and π₂(0; t) never goes negative.
pub fn negativity_window(x0: f64) -> Option<f64> {
    let x2 = x0 * x0;
    if x2 > 1.0 {
        Some(((x2 - 1.0) / (x2 + 1.0)).sqrt())
    } else {
        None
    }
}

/// π₂(0; t) measured on a rasterized grid of the evolved state. The grid is
/// widened by one node if needed so that x = 0 is a lattice line.
pub fn pi2_origin_numeric<F: WignerFunction>(
    f: &F,
    ev: EvolutionSpec,
    spec: GridSpec,
    tag: &str,
) -> Result<f64> {
    let spec = spec.with_origin_node()?;
    let g = rasterize(&evolve_free(f, ev), spec, tag)?;
    let profile = moment_profile(&g, 2, ev.t)?;
    Ok(profile.value_at(0.0).expect("origin is a node"))
}

/// Bisection for the sign change of the measured π₂(0; t) on [t_lo, t_hi].
/// Returns `None` when the endpoints do not bracket a root.
pub fn pi2_zero_crossing<F: WignerFunction>(
    f: &F,
    mass: f64,
    spec: GridSpec,
    t_lo: f64,
    t_hi: f64,
    tol: f64,
) -> Result<Option<f64>> {
    let eval = |t: f64| pi2_origin_numeric(f, EvolutionSpec::new(mass, t)?, spec, "");
    let (mut a, mut b) = (t_lo, t_hi);
    let (mut fa, fb) = (eval(a)?, eval(b)?);
    if fa == 0.0 {
        return Ok(Some(a));
    }
    if fa.signum() == fb.signum() {
        return Ok(None);
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = eval(m)?;
        if fm == 0.0 {
            return Ok(Some(m));
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(Some(0.5 * (a + b)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsDevCurve {
    pub t_values: Vec<f64>,
    pub absdev: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct AbsDevPoint {
    absdev: f64,
    d1: f64,
    d2: f64,
}

/// ⟨|x|⟩(t), d⟨|x|⟩/dt = (1/m)∬ p·sign(x)·W and
/// d²⟨|x|⟩/dt² = (2/m²)∫ p²·W(0, p; t) dp, all three from one grid per t.
/// Times are processed independently; output order follows `times`.
pub fn absdev_curve<F: WignerFunction>(
    f: &F,
    times: &[f64],
    mass: f64,
    spec: GridSpec,
) -> Result<AbsDevCurve> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::invalid("mass", format!("must be > 0, got {mass}")));
    }
    let spec = spec.with_origin_node()?;
    let origin = spec.origin_column().expect("origin node forced");
    let points: Vec<AbsDevPoint> = times
        .par_iter()
        .map(|&t| {
            let ev = EvolutionSpec::new(mass, t)?;
            let g = rasterize(&evolve_free(f, ev), spec, "")?;
            g.check_window(WINDOW_THRESHOLD)?;
            let absdev = integrate_2d(&g, |x, _| x.abs());
            let d1 = integrate_2d(&g, |x, p| p * sign0(x)) / mass;
            let p2: Vec<f64> = spec.p_nodes().iter().map(|p| p * p).collect();
            let d2 = 2.0 / (mass * mass) * column_moment(g.row(origin), &p2, spec.dp());
            Ok(AbsDevPoint { absdev, d1, d2 })
        })
        .collect::<Result<_>>()?;
    Ok(AbsDevCurve {
        t_values: times.to_vec(),
        absdev: points.iter().map(|q| q.absdev).collect(),
        d1: points.iter().map(|q| q.d1).collect(),
        d2: points.iter().map(|q| q.d2).collect(),
    })
}

impl AbsDevCurve {
    pub fn len(&self) -> usize {
        self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_values.is_empty()
    }

    /// CSV `t,absdev,d1,d2,violation_flag`, flagging d2 < −tol_neg.
    pub fn write_csv<W: Write>(&self, w: W, tol_neg: f64) -> Result<()> {
        let mut out = output::csv_writer(w);
        out.write_record(["t", "absdev", "d1", "d2", "violation_flag"])?;
        for k in 0..self.len() {
            out.write_record([
                output::fmt_f64(self.t_values[k]),
                output::fmt_f64(self.absdev[k]),
                output::fmt_f64(self.d1[k]),
                output::fmt_f64(self.d2[k]),
                (self.d2[k] < -tol_neg).to_string(),
            ])?;
        }
        out.flush().map_err(|e| Error::Serialize(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalityReport {
    pub tol_neg: f64,
    /// Times at which d2 < −tol_neg.
    pub violations: Vec<f64>,
    pub min_d2: Option<f64>,
}

impl ClassicalityReport {
    pub fn is_classical(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn classicality_check(curve: &AbsDevCurve) -> ClassicalityReport {
    classicality_check_with_tol(curve, DEFAULT_TOL_NEG)
}

pub fn classicality_check_with_tol(curve: &AbsDevCurve, tol_neg: f64) -> ClassicalityReport {
    let violations = curve
        .t_values
        .iter()
        .zip(&curve.d2)
        .filter(|(_, &d2)| d2 < -tol_neg)
        .map(|(&t, _)| t)
        .collect();
    let min_d2 = curve.d2.iter().copied().reduce(f64::min);
    ClassicalityReport {
        tol_neg,
        violations,
        min_d2,
    }
}
