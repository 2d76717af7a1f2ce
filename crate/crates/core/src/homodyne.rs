//! Simulated homodyne test for Wigner negativity.
//!
//! Quadratures x_θ = x cos θ + p sin θ are drawn from the rotated marginal
//! of a grid, rescaled to χ_τ = x_θ / cos θ = x + p·τ with τ = tan θ, and
//! ⟨|χ_τ|⟩ is estimated per angle. For a nonnegative Wigner function the
//! curvature d²⟨|χ_τ|⟩/dτ² at τ = 0 equals 2∫ p² W(0, p) dp ≥ 0, so a
//! curvature confidently below zero witnesses negative regions on x = 0.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::trapezoid;
use crate::output;
use crate::phase_space::{integrate_abs_linear, rotated_marginal, GridSpec, WignerGrid};
use crate::sampling::{
    bootstrap_means, mean_and_std_error, sorted_quantile, stream_rng, InverseCdf,
};
use crate::states::{ensure_finite, StateDescriptor};

/// Tolerated negative mass in a computed rotated marginal, relative to its
/// total. Smaller excursions are clipped to zero before sampling.
pub const MARGINAL_NEGATIVITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureAngle {
    theta: f64,
    tau: f64,
}

impl QuadratureAngle {
    pub fn new(theta: f64) -> Result<Self> {
        ensure_finite("theta", theta)?;
        if theta.abs() >= FRAC_PI_2 {
            return Err(Error::invalid(
                "theta",
                format!("|theta| must be < pi/2, got {theta}"),
            ));
        }
        Ok(QuadratureAngle {
            theta,
            tau: theta.tan(),
        })
    }

    /// θ = arctan τ, keeping τ exactly as given.
    pub fn from_tau(tau: f64) -> Result<Self> {
        ensure_finite("tau", tau)?;
        Ok(QuadratureAngle {
            theta: tau.atan(),
            tau,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn cos(&self) -> f64 {
        self.theta.cos()
    }
}

/// Draws from the (normalized) rotated marginal of one grid at one angle.
#[derive(Debug, Clone)]
pub struct QuadratureSampler {
    angle: QuadratureAngle,
    inverse: InverseCdf,
}

impl QuadratureSampler {
    pub fn new(g: &WignerGrid, angle: QuadratureAngle) -> Result<Self> {
        let m = rotated_marginal(g, angle.theta)?;
        let n = m.len();
        let h = (m.axis_values[n - 1] - m.axis_values[0]) / (n - 1) as f64;
        let total = trapezoid(&m.density, h);
        let negatives: Vec<f64> = m.density.iter().map(|d| d.min(0.0)).collect();
        let negative = -trapezoid(&negatives, h);
        if !(total > 0.0) || negative > MARGINAL_NEGATIVITY_TOL * total {
            return Err(Error::NonpositiveMarginal {
                theta: angle.theta,
                negative,
                total,
            });
        }
        let clipped: Vec<f64> = m.density.iter().map(|d| d.max(0.0)).collect();
        let inverse =
            InverseCdf::new(&m.axis_values, &clipped).ok_or(Error::NonpositiveMarginal {
                theta: angle.theta,
                negative,
                total,
            })?;
        Ok(QuadratureSampler { angle, inverse })
    }

    pub fn angle(&self) -> QuadratureAngle {
        self.angle
    }

    pub fn sample_n<R: rand::Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        self.inverse.sample_n(n, rng)
    }
}

/// `n` quadrature outcomes at angle `a`, from stream 0 of `seed`.
pub fn sample_quadrature(
    g: &WignerGrid,
    a: QuadratureAngle,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let sampler = QuadratureSampler::new(g, a)?;
    Ok(sampler.sample_n(n, &mut stream_rng(seed, 0)))
}

/// Sample mean of |x_θ| / cos θ and its standard error.
pub fn estimate_abs_chi(samples: &[f64], a: QuadratureAngle) -> (f64, f64) {
    let c = a.cos();
    let chi: Vec<f64> = samples.iter().map(|s| s.abs() / c).collect();
    mean_and_std_error(&chi)
}

/// ⟨|χ_τ|⟩ = ∬ |x + pτ| W by quadrature, with no sampling.
pub fn abs_chi_quadrature(g: &WignerGrid, tau: f64) -> f64 {
    integrate_abs_linear(g, tau)
}

/// Central second difference of the quadrature ⟨|χ_τ|⟩ at τ = 0.
pub fn quadrature_curvature(g: &WignerGrid, h: f64) -> f64 {
    (abs_chi_quadrature(g, h) - 2.0 * abs_chi_quadrature(g, 0.0) + abs_chi_quadrature(g, -h))
        / (h * h)
}

/// 2∫ p² W(0, p) dp, read off the grid (interpolated if x = 0 is not a node).
pub fn origin_curvature(g: &WignerGrid) -> Option<f64> {
    let column = g.section(0.0)?;
    let terms: Vec<f64> = g
        .spec()
        .p_nodes()
        .iter()
        .zip(&column)
        .map(|(p, w)| p * p * w)
        .collect();
    Some(2.0 * trapezoid(&terms, g.spec().dp()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessConfig {
    pub tau_grid: Vec<f64>,
    pub samples_per_angle: usize,
    pub seed: u64,
    pub confidence: f64,
    pub bootstrap_resamples: usize,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        WitnessConfig {
            tau_grid: vec![-0.2, 0.0, 0.2],
            samples_per_angle: 1_000_000,
            seed: 42,
            confidence: 0.99,
            bootstrap_resamples: 10_000,
        }
    }
}

impl WitnessConfig {
    pub fn validate(&self) -> Result<()> {
        for &t in &self.tau_grid {
            ensure_finite("tau_grid", t)?;
        }
        self.central_triplet()?;
        if self.samples_per_angle < 2 {
            return Err(Error::invalid(
                "samples_per_angle",
                "need at least 2 samples per angle",
            ));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::invalid(
                "confidence",
                format!("must lie in (0, 1), got {}", self.confidence),
            ));
        }
        if self.bootstrap_resamples < 2 {
            return Err(Error::invalid(
                "bootstrap_resamples",
                "need at least 2 resamples",
            ));
        }
        Ok(())
    }

    /// Indices of (−h, 0, +h) for the smallest symmetric offset h.
    fn central_triplet(&self) -> Result<(usize, usize, usize, f64)> {
        let zero = self
            .tau_grid
            .iter()
            .position(|&t| t == 0.0)
            .ok_or_else(|| Error::invalid("tau_grid", "must contain 0"))?;
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, &t) in self.tau_grid.iter().enumerate() {
            if t <= 0.0 {
                continue;
            }
            if let Some(j) = self.tau_grid.iter().position(|&s| s == -t) {
                if best.is_none_or(|(_, _, h)| t < h) {
                    best = Some((j, i, t));
                }
            }
        }
        let (minus, plus, h) =
            best.ok_or_else(|| Error::invalid("tau_grid", "must contain a symmetric pair ±h"))?;
        Ok((minus, zero, plus, h))
    }
}

/// Per-angle quadrature samples of one simulated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneRun {
    pub angles: Vec<QuadratureAngle>,
    pub samples_per_angle: usize,
    pub seed: u64,
    pub samples: Vec<Vec<f64>>,
}

impl HomodyneRun {
    /// Angle k draws from stream 2k of the seed, so the samples do not
    /// depend on how angles are scheduled.
    pub fn simulate(g: &WignerGrid, cfg: &WitnessConfig) -> Result<Self> {
        cfg.validate()?;
        let angles: Vec<QuadratureAngle> = cfg
            .tau_grid
            .iter()
            .map(|&t| QuadratureAngle::from_tau(t))
            .collect::<Result<_>>()?;
        let samples = angles
            .par_iter()
            .enumerate()
            .map(|(k, &a)| {
                let sampler = QuadratureSampler::new(g, a)?;
                let mut rng = stream_rng(cfg.seed, 2 * k as u64);
                Ok(sampler.sample_n(cfg.samples_per_angle, &mut rng))
            })
            .collect::<Result<_>>()?;
        Ok(HomodyneRun {
            angles,
            samples_per_angle: cfg.samples_per_angle,
            seed: cfg.seed,
            samples,
        })
    }

    /// Raw outcomes as CSV `theta,sample`.
    pub fn write_samples_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = output::csv_writer(w);
        out.write_record(["theta", "sample"])?;
        for (a, s) in self.angles.iter().zip(&self.samples) {
            let theta = output::fmt_f64(a.theta());
            for v in s {
                out.write_record([theta.as_str(), &output::fmt_f64(*v)])?;
            }
        }
        out.flush().map_err(|e| Error::Serialize(e.to_string()))
    }

    /// Curvature estimate with bootstrap confidence interval. `mass` is the
    /// phase-space integral of the sampled grid; means are scaled by it so
    /// that they estimate ∬ |x + pτ| W itself. Bootstrap resamples for
    /// angle k come from stream 2k + 1.
    pub fn curvature(
        &self,
        cfg: &WitnessConfig,
        mass: f64,
        expected: Option<f64>,
    ) -> Result<CurvatureEstimate> {
        let (im, i0, ip, h) = cfg.central_triplet()?;
        let mut means = Vec::with_capacity(self.angles.len());
        let mut errors = Vec::with_capacity(self.angles.len());
        for (a, s) in self.angles.iter().zip(&self.samples) {
            let (m, se) = estimate_abs_chi(s, *a);
            means.push(mass * m);
            errors.push(mass * se);
        }
        let h2 = h * h;
        let curvature = (means[ip] - 2.0 * means[i0] + means[im]) / h2;
        let numerator_se =
            (errors[ip].powi(2) + 4.0 * errors[i0].powi(2) + errors[im].powi(2)).sqrt();
        let std_error = numerator_se / h2;

        let boot: Vec<Vec<f64>> = [im, i0, ip]
            .par_iter()
            .map(|&k| {
                let c = self.angles[k].cos();
                let chi: Vec<f64> = self.samples[k].iter().map(|s| mass * s.abs() / c).collect();
                let mut rng = stream_rng(self.seed, 2 * k as u64 + 1);
                bootstrap_means(&chi, cfg.bootstrap_resamples, &mut rng)
            })
            .collect();
        let mut curvatures: Vec<f64> = (0..cfg.bootstrap_resamples)
            .map(|r| (boot[2][r] - 2.0 * boot[1][r] + boot[0][r]) / h2)
            .collect();
        curvatures.sort_by(f64::total_cmp);
        let alpha = 1.0 - cfg.confidence;
        let ci_low = sorted_quantile(&curvatures, 0.5 * alpha).min(curvature);
        let ci_high = sorted_quantile(&curvatures, 1.0 - 0.5 * alpha).max(curvature);

        let under_resolved = match expected {
            Some(k) => k.abs() * h2 < 10.0 * numerator_se,
            None => false,
        };
        Ok(CurvatureEstimate {
            tau_values: self.angles.iter().map(|a| a.tau()).collect(),
            abs_chi_means: means,
            abs_chi_std_errors: errors,
            step: h,
            curvature_at_zero: curvature,
            std_error,
            ci_low,
            ci_high,
            confidence: cfg.confidence,
            expected_curvature: expected,
            under_resolved,
            verdict: Verdict::from_interval(ci_low, ci_high),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ClassicalConsistent,
    NegativityWitnessed,
    Inconclusive,
}

impl Verdict {
    pub fn from_interval(ci_low: f64, ci_high: f64) -> Self {
        if ci_high < 0.0 {
            Verdict::NegativityWitnessed
        } else if ci_low > 0.0 {
            Verdict::ClassicalConsistent
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureEstimate {
    pub tau_values: Vec<f64>,
    pub abs_chi_means: Vec<f64>,
    pub abs_chi_std_errors: Vec<f64>,
    /// Offset h of the central second difference.
    pub step: f64,
    pub curvature_at_zero: f64,
    /// Propagated standard error of `curvature_at_zero`.
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    /// 2∫ p² W(0, p) dp from the grid, when available.
    pub expected_curvature: Option<f64>,
    /// |expected|·h² is below ten standard errors of the second-difference
    /// numerator: the τ offsets are too small for the sample size.
    pub under_resolved: bool,
    pub verdict: Verdict,
}

/// Samples every angle, estimates the curvature at τ = 0 and classifies it.
pub fn curvature_witness(g: &WignerGrid, cfg: &WitnessConfig) -> Result<CurvatureEstimate> {
    let run = HomodyneRun::simulate(g, cfg)?;
    run.curvature(cfg, g.integral(), origin_curvature(g))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSummary {
    pub theta: f64,
    pub tau: f64,
    pub samples: usize,
    pub quadrature_mean: f64,
    pub quadrature_variance: f64,
    pub abs_chi_mean: f64,
    pub abs_chi_std_error: f64,
}

/// Everything needed to reproduce and audit one witness run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub state: StateDescriptor,
    pub convention: String,
    pub grid: GridSpec,
    pub grid_integral: f64,
    pub samples_per_angle: usize,
    pub seed: u64,
    pub bootstrap_resamples: usize,
    pub angles: Vec<AngleSummary>,
    pub estimate: CurvatureEstimate,
}

impl RunRecord {
    pub fn to_json(&self) -> Result<String> {
        output::to_json_string(self)
    }
}

/// Full experiment: grid → samples → estimate → record. Also returns the
/// raw run for optional sample export.
pub fn run_experiment(
    state: StateDescriptor,
    g: &WignerGrid,
    cfg: &WitnessConfig,
) -> Result<(RunRecord, HomodyneRun)> {
    let run = HomodyneRun::simulate(g, cfg)?;
    let estimate = run.curvature(cfg, g.integral(), origin_curvature(g))?;
    let angles = run
        .angles
        .iter()
        .zip(&run.samples)
        .zip(
            estimate
                .abs_chi_means
                .iter()
                .zip(&estimate.abs_chi_std_errors),
        )
        .map(|((a, s), (&m, &se))| {
            let (mean, se_q) = mean_and_std_error(s);
            let n = s.len() as f64;
            AngleSummary {
                theta: a.theta(),
                tau: a.tau(),
                samples: s.len(),
                quadrature_mean: mean,
                quadrature_variance: se_q * se_q * n,
                abs_chi_mean: m,
                abs_chi_std_error: se,
            }
        })
        .collect();
    let record = RunRecord {
        state,
        convention: state.convention_tag().to_owned(),
        grid: *g.spec(),
        grid_integral: g.integral(),
        samples_per_angle: cfg.samples_per_angle,
        seed: cfg.seed,
        bootstrap_resamples: cfg.bootstrap_resamples,
        angles,
        estimate,
    };
    Ok((record, run))
}
