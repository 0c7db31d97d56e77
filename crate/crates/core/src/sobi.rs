//! Second-order blind identification.
//!
//! The mixtures are whitened, then an orthogonal matrix is found that jointly
//! diagonalizes the symmetrized lagged covariances of the whitened signals.
//! The joint diagonalizer is a Jacobi sweep of plane (Givens) rotations; for
//! each index pair the angle is the closed-form minimizer of the summed
//! squared off-diagonal entries across all matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{lagged_covariance_centered, symmetrized, SignalMatrix};

/// Relative eigenvalue floor below which the zero-lag correlation is treated as rank deficient.
pub const RANK_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobiParams {
    pub lags: Vec<usize>,
    /// Stop once every rotation sine in a sweep is below this.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SobiParams {
    fn default() -> Self {
        Self { lags: vec![1, 2, 3], tol: 1e-8, max_sweeps: 100 }
    }
}

#[derive(Debug, Clone)]
pub struct WhiteningResult {
    pub whitened: SignalMatrix,
    /// `B = Λ^{-1/2} Eᵀ D^{-1/2}` with `E Λ Eᵀ` the zero-lag correlation and `D`
    /// the channel variances; rows ordered by decreasing eigenvalue.
    pub matrix: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct JointDiagResult {
    /// Orthogonal `U` such that `Uᵀ M U` is as diagonal as possible for every `M`.
    pub rotation: DMatrix<f64>,
    /// Summed squared off-diagonal entries after the last sweep.
    pub off: f64,
    pub sweeps: usize,
    /// Off-diagonality before any rotation followed by the value after each sweep.
    pub off_history: Vec<f64>,
}

pub fn whiten(x: &SignalMatrix) -> Result<WhiteningResult> {
    let centered = x.centered();
    let c0 = symmetrized(&lagged_covariance_centered(&centered, 0));
    let n = x.channels();

    // Work on the correlation matrix so that channels on wildly different
    // scales neither fail the rank test nor lose precision in the eigensolver.
    let scale: Vec<f64> = (0..n).map(|i| c0[(i, i)].sqrt()).collect();
    if let Some(i) = scale.iter().position(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::DegenerateData(format!("channel {i} has no variance")));
    }
    let corr = DMatrix::from_fn(n, n, |r, c| c0[(r, c)] / (scale[r] * scale[c]));
    let eig = SymmetricEigen::new(corr);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let largest = eig.eigenvalues[order[0]];
    let smallest = eig.eigenvalues[order[n - 1]];
    if !(largest > 0.0) || smallest <= RANK_EPS * largest {
        return Err(Error::DegenerateData(format!(
            "zero-lag correlation is rank deficient (eigenvalues {smallest:e} .. {largest:e})"
        )));
    }

    let b = DMatrix::from_fn(n, n, |r, c| {
        let k = order[r];
        eig.eigenvectors[(c, k)] / (eig.eigenvalues[k].sqrt() * scale[c])
    });
    let whitened = SignalMatrix::new(&b * centered)?;
    Ok(WhiteningResult { whitened, matrix: b })
}

fn off_diagonality(ms: &[DMatrix<f64>]) -> f64 {
    ms.iter()
        .map(|m| {
            let mut acc = 0.0;
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    if i != j {
                        acc += m[(i, j)] * m[(i, j)];
                    }
                }
            }
            acc
        })
        .sum()
}

pub fn givens_joint_diag(
    matrices: &[DMatrix<f64>],
    tol: f64,
    max_sweeps: usize,
) -> Result<JointDiagResult> {
    let Some(first) = matrices.first() else {
        return Err(Error::Dimension("no matrices to diagonalize".into()));
    };
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let n = first.nrows();
    for m in matrices {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension(format!(
                "expected {n}x{n} matrices, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let asym = (m - m.transpose()).amax();
        if asym > 1e-10 * m.amax().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
    }

    let mut ms: Vec<DMatrix<f64>> = matrices.to_vec();
    let mut u = DMatrix::<f64>::identity(n, n);
    let mut off_history = vec![off_diagonality(&ms)];
    let mut sweeps = 0;

    while sweeps < max_sweeps {
        sweeps += 1;
        let mut largest_sine = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let (mut g00, mut g01, mut g11) = (0.0, 0.0, 0.0);
                for m in &ms {
                    let on = m[(p, p)] - m[(q, q)];
                    let off = m[(p, q)] + m[(q, p)];
                    g00 += on * on;
                    g01 += on * off;
                    g11 += off * off;
                }
                let ton = g00 - g11;
                let toff = 2.0 * g01;
                let theta = 0.5 * toff.atan2(ton + (ton * ton + toff * toff).sqrt());
                let (s, c) = theta.sin_cos();
                largest_sine = largest_sine.max(s.abs());
                if s.abs() <= tol {
                    continue;
                }
                for m in ms.iter_mut() {
                    rotate(m, p, q, c, s);
                }
                for k in 0..n {
                    let (up, uq) = (u[(k, p)], u[(k, q)]);
                    u[(k, p)] = c * up + s * uq;
                    u[(k, q)] = c * uq - s * up;
                }
            }
        }
        off_history.push(off_diagonality(&ms));
        if largest_sine < tol {
            break;
        }
    }

    Ok(JointDiagResult {
        rotation: u,
        off: *off_history.last().expect("non-empty history"),
        sweeps,
        off_history,
    })
}

/// `M ← Gᵀ M G` for the plane rotation acting on indices `(p, q)`.
fn rotate(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = m.nrows();
    for k in 0..n {
        let (mp, mq) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = c * mp + s * mq;
        m[(q, k)] = c * mq - s * mp;
    }
    for k in 0..n {
        let (mp, mq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = c * mp + s * mq;
        m[(k, q)] = c * mq - s * mp;
    }
}

/// Separating matrix `W = Uᵀ B`.
pub fn sobi(x: &SignalMatrix, params: &SobiParams) -> Result<DMatrix<f64>> {
    if params.lags.is_empty() {
        return Err(Error::Config("SOBI needs at least one lag".into()));
    }
    let t = x.samples();
    let max = t.saturating_sub(2);
    if let Some(&lag) = params.lags.iter().find(|&&l| l == 0 || l > max) {
        return Err(Error::LagOutOfRange { lag, samples: t, max });
    }
    let white = whiten(x)?;
    // whitened rows are already zero-mean
    let z = white.whitened.matrix();
    let covs: Vec<DMatrix<f64>> = params
        .lags
        .iter()
        .map(|&lag| symmetrized(&lagged_covariance_centered(z, lag)))
        .collect();
    let jd = givens_joint_diag(&covs, params.tol, params.max_sweeps)?;
    Ok(jd.rotation.transpose() * white.matrix)
}
