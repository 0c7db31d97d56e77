//! The two separation criteria and the hybrid candidate evaluation: the slope
//! genotype fixes the nonlinear stage, SOBI supplies the linear stage.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixing::linearize;
use crate::signal::{lagged_covariance_centered, SignalMatrix};
use crate::sobi::{sobi, SobiParams};

/// Theoretical electrode slope for monovalent ions at room temperature, mV/decade.
pub const NERNST_SLOPE_MV: f64 = 59.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    /// Squared distance of the slopes to the Nernstian reference (mV²).
    pub j1: f64,
    /// Summed squared off-diagonal lagged covariances of the retrieved signals.
    pub j2: f64,
}

impl ObjectiveVector {
    pub fn as_array(&self) -> [f64; 2] {
        [self.j1, self.j2]
    }
}

/// `Σ_i (d*_i − reference)²`.
pub fn nernst_criterion(d_star: &[f64], reference: f64) -> f64 {
    d_star.iter().map(|d| (d - reference).powi(2)).sum()
}

/// `Σ_{r=0..=max_lag} Σ_{i≠j} C_yy,ij(r)²` on the unsymmetrized lagged covariances.
pub fn offdiag_criterion(y: &SignalMatrix, max_lag: usize) -> Result<f64> {
    let t = y.samples();
    let max = t.saturating_sub(2);
    if max_lag > max {
        return Err(Error::LagOutOfRange { lag: max_lag, samples: t, max });
    }
    Ok(offdiag_centered(&y.centered(), max_lag))
}

fn offdiag_centered(c: &DMatrix<f64>, max_lag: usize) -> f64 {
    let n = c.nrows();
    (0..=max_lag)
        .map(|lag| {
            let m = lagged_covariance_centered(c, lag);
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        acc += m[(i, j)] * m[(i, j)];
                    }
                }
            }
            acc
        })
        .sum()
}

/// Everything needed to score a slope genotype against a fixed set of mixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Nernstian reference slope (mV/decade).
    pub reference: f64,
    /// Largest lag `R` of the off-diagonality criterion; SOBI uses lags `1..=R`.
    pub max_lag: usize,
    /// Admissible slope interval `(min, max)` in mV/decade.
    pub bounds: (f64, f64),
    pub sobi_tol: f64,
    pub sobi_max_sweeps: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            reference: NERNST_SLOPE_MV,
            max_lag: 3,
            bounds: (10.0, 120.0),
            sobi_tol: 1e-8,
            sobi_max_sweeps: 100,
        }
    }
}

impl EvalConfig {
    pub fn sobi_params(&self) -> SobiParams {
        SobiParams {
            lags: (1..=self.max_lag).collect(),
            tol: self.sobi_tol,
            max_sweeps: self.sobi_max_sweeps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluatedCandidate {
    pub d_star: Vec<f64>,
    pub objectives: ObjectiveVector,
    /// Separating matrix found by SOBI on the linearized mixtures.
    pub w: DMatrix<f64>,
    /// Retrieved signals, `separate(x, d_star, w)`.
    pub y: SignalMatrix,
}

pub fn evaluate_candidate(
    d_star: &[f64],
    x: &SignalMatrix,
    cfg: &EvalConfig,
) -> Result<EvaluatedCandidate> {
    let (lo, hi) = cfg.bounds;
    for (index, &value) in d_star.iter().enumerate() {
        if !(value >= lo && value <= hi) {
            return Err(Error::SlopeOutOfBounds { index, value, min: lo, max: hi });
        }
    }
    let v = SignalMatrix::new(linearize(x, d_star)?)?;
    let w = sobi(&v, &cfg.sobi_params())?;
    let y = SignalMatrix::new(&w * v.matrix())?;
    let j2 = offdiag_criterion(&y, cfg.max_lag)?;
    Ok(EvaluatedCandidate {
        d_star: d_star.to_vec(),
        objectives: ObjectiveVector { j1: nernst_criterion(d_star, cfg.reference), j2 },
        w,
        y,
    })
}
