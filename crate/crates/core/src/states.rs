//! Closed-form Wigner functions (ħ = 1) for the states this crate works with:
//! coherent states and the even coherent ("cat") superposition |α⟩ + |−α⟩.

use std::f64::consts::{FRAC_1_PI, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Anything that can be evaluated pointwise as a Wigner function.
pub trait WignerFunction: Sync {
    fn value(&self, x: f64, p: f64) -> f64;

    fn eval(&self, pt: PhasePoint) -> f64 {
        self.value(pt.x, pt.p)
    }
}

impl<F> WignerFunction for F
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    fn value(&self, x: f64, p: f64) -> f64 {
        self(x, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(x: f64, p: f64) -> Result<Self> {
        ensure_finite("x", x)?;
        ensure_finite("p", p)?;
        Ok(PhasePoint { x, p })
    }
}

/// Overall scale applied to the printed three-term cat Wigner function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Convention {
    /// The three-term expression verbatim; integrates to 2 + 2·exp(−(x0² + p0²)).
    #[serde(rename = "as-printed")]
    AsPrinted,
    /// Half the printed expression. This is the scale under which the
    /// closed-form π₂(0; t) holds exactly.
    #[default]
    #[serde(rename = "paper")]
    PaperScaled,
    /// Normalized to unit phase-space integral.
    #[serde(rename = "unit-norm")]
    UnitNorm,
}

impl Convention {
    pub const ALL: [Convention; 3] = [
        Convention::AsPrinted,
        Convention::PaperScaled,
        Convention::UnitNorm,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Convention::AsPrinted => "as-printed",
            Convention::PaperScaled => "paper",
            Convention::UnitNorm => "unit-norm",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentStateParams {
    x0: f64,
    p0: f64,
}

impl CoherentStateParams {
    pub fn new(x0: f64, p0: f64) -> Result<Self> {
        ensure_finite("x0", x0)?;
        ensure_finite("p0", p0)?;
        Ok(CoherentStateParams { x0, p0 })
    }

    pub fn vacuum() -> Self {
        CoherentStateParams { x0: 0.0, p0: 0.0 }
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }
}

/// Even cat state |α⟩ + |−α⟩ with α ↔ (x0, p0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatStateParams {
    x0: f64,
    p0: f64,
    convention: Convention,
}

impl CatStateParams {
    pub fn new(x0: f64, p0: f64, convention: Convention) -> Result<Self> {
        ensure_finite("x0", x0)?;
        ensure_finite("p0", p0)?;
        Ok(CatStateParams { x0, p0, convention })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn with_convention(self, convention: Convention) -> Self {
        CatStateParams { convention, ..self }
    }

    /// Factor multiplying the printed expression under this convention.
    pub fn scale(&self) -> f64 {
        match self.convention {
            Convention::AsPrinted => 1.0,
            Convention::PaperScaled => 0.5,
            Convention::UnitNorm => 1.0 / cat_norm_integral(self),
        }
    }
}

/// (1/π)·exp(−(p−p0)² − (x−x0)²).
pub fn eval_coherent_wigner(pt: PhasePoint, s: &CoherentStateParams) -> f64 {
    let dx = pt.x - s.x0;
    let dp = pt.p - s.p0;
    FRAC_1_PI * (-(dp * dp) - dx * dx).exp()
}

/// Two displaced Gaussians plus the interference term
/// 2·exp(−x² − p²)·cos 2(p0·x − p·x0), all over π, times the convention scale.
pub fn eval_cat_wigner(pt: PhasePoint, s: &CatStateParams) -> f64 {
    s.scale() * printed_cat(pt.x, pt.p, s.x0, s.p0)
}

/// Phase-space integral of the printed (unscaled) cat expression.
pub fn cat_norm_integral(s: &CatStateParams) -> f64 {
    2.0 + 2.0 * (-(s.x0 * s.x0 + s.p0 * s.p0)).exp()
}

fn printed_cat(x: f64, p: f64, x0: f64, p0: f64) -> f64 {
    let plus = (-(p - p0).powi(2) - (x - x0).powi(2)).exp();
    let minus = (-(p + p0).powi(2) - (x + x0).powi(2)).exp();
    let fringe = 2.0 * (-x * x - p * p).exp() * (2.0 * (p0 * x - p * x0)).cos();
    (plus + minus + fringe) / PI
}

impl WignerFunction for CoherentStateParams {
    fn value(&self, x: f64, p: f64) -> f64 {
        eval_coherent_wigner(PhasePoint { x, p }, self)
    }
}

impl WignerFunction for CatStateParams {
    fn value(&self, x: f64, p: f64) -> f64 {
        // scale() for UnitNorm costs an exp; fine at grid sizes used here
        eval_cat_wigner(PhasePoint { x, p }, self)
    }
}

/// Serializable description of a state, carried in run records and sidecars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateDescriptor {
    Coherent {
        x0: f64,
        p0: f64,
    },
    Cat {
        x0: f64,
        p0: f64,
        convention: Convention,
    },
}

impl StateDescriptor {
    pub fn x0(&self) -> f64 {
        match *self {
            StateDescriptor::Coherent { x0, .. } | StateDescriptor::Cat { x0, .. } => x0,
        }
    }

    pub fn p0(&self) -> f64 {
        match *self {
            StateDescriptor::Coherent { p0, .. } | StateDescriptor::Cat { p0, .. } => p0,
        }
    }

    pub fn convention_tag(&self) -> &'static str {
        match self {
            StateDescriptor::Coherent { .. } => "coherent",
            StateDescriptor::Cat { convention, .. } => convention.tag(),
        }
    }
}

impl From<CoherentStateParams> for StateDescriptor {
    fn from(s: CoherentStateParams) -> Self {
        StateDescriptor::Coherent { x0: s.x0, p0: s.p0 }
    }
}

impl From<CatStateParams> for StateDescriptor {
    fn from(s: CatStateParams) -> Self {
        StateDescriptor::Cat {
            x0: s.x0,
            p0: s.p0,
            convention: s.convention,
        }
    }
}

/// A state usable wherever a pointwise evaluator is needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum State {
    Coherent(CoherentStateParams),
    Cat(CatStateParams),
}

impl State {
    pub fn descriptor(&self) -> StateDescriptor {
        match *self {
            State::Coherent(s) => s.into(),
            State::Cat(s) => s.into(),
        }
    }
}

impl WignerFunction for State {
    fn value(&self, x: f64, p: f64) -> f64 {
        match self {
            State::Coherent(s) => s.value(x, p),
            State::Cat(s) => s.value(x, p),
        }
    }
}

pub(crate) fn ensure_finite(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite, got {v}")))
    }
}
