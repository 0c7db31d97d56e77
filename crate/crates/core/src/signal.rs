//! Signal containers, lagged second-order statistics and the SIR metric.

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest channel count accepted by [`match_and_score`] (it enumerates all `N!` pairings).
pub const MAX_MATCH_CHANNELS: usize = 6;

/// A real `channels × samples` matrix. Rows are channels, columns are time samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalMatrix {
    data: DMatrix<f64>,
    labels: Option<Vec<String>>,
}

impl SignalMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::Empty);
        }
        if data.ncols() < 2 {
            return Err(Error::TooFewSamples { got: data.ncols(), min: 2 });
        }
        for ch in 0..data.nrows() {
            for t in 0..data.ncols() {
                if !data[(ch, t)].is_finite() {
                    return Err(Error::NonFinite { channel: ch, sample: t });
                }
            }
        }
        Ok(Self { data, labels: None })
    }

    /// Builds from channel-major rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let t = rows[0].len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != t) {
            return Err(Error::Dimension(format!(
                "row {i} has {} samples, expected {t}",
                r.len()
            )));
        }
        Self::new(DMatrix::from_fn(n, t, |i, j| rows[i][j]))
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.channels() {
            return Err(Error::Dimension(format!(
                "{} labels for {} channels",
                labels.len(),
                self.channels()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn samples(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn get(&self, channel: usize, sample: usize) -> f64 {
        self.data[(channel, sample)]
    }

    pub fn row(&self, channel: usize) -> Vec<f64> {
        self.data.row(channel).iter().copied().collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.channels()).map(|i| self.row(i)).collect()
    }

    /// Per-channel sample mean over all samples.
    pub fn channel_means(&self) -> Vec<f64> {
        let t = self.samples() as f64;
        (0..self.channels())
            .map(|i| self.data.row(i).iter().sum::<f64>() / t)
            .collect()
    }

    /// Copy with each channel's mean removed.
    pub fn centered(&self) -> DMatrix<f64> {
        let means = self.channel_means();
        DMatrix::from_fn(self.channels(), self.samples(), |i, t| {
            self.data[(i, t)] - means[i]
        })
    }
}

/// Sample covariance between a signal and its delayed copy.
#[derive(Debug, Clone, PartialEq)]
pub struct LaggedCovariance {
    pub matrix: DMatrix<f64>,
    pub lag: usize,
}

/// Entry `(i, j)` is `1/(T−r) Σ_{t≥r} (x_i(t) − μ_i)(x_j(t−r) − μ_j)` with
/// `μ` the per-channel mean over all `T` samples.
pub fn lagged_covariance(x: &SignalMatrix, lag: usize) -> Result<LaggedCovariance> {
    let t = x.samples();
    let max = t.saturating_sub(2);
    if lag > max {
        return Err(Error::LagOutOfRange { lag, samples: t, max });
    }
    let c = x.centered();
    Ok(LaggedCovariance {
        matrix: lagged_covariance_centered(&c, lag),
        lag,
    })
}

/// Same estimator on an already-centered matrix; the lag is assumed valid.
pub(crate) fn lagged_covariance_centered(c: &DMatrix<f64>, lag: usize) -> DMatrix<f64> {
    let n = c.nrows();
    let t = c.ncols();
    let norm = 1.0 / (t - lag) as f64;
    DMatrix::from_fn(n, n, |i, j| {
        (lag..t).map(|s| c[(i, s)] * c[(j, s - lag)]).sum::<f64>() * norm
    })
}

/// `(C + Cᵀ) / 2`, same lag.
pub fn symmetrize(c: &LaggedCovariance) -> LaggedCovariance {
    LaggedCovariance {
        matrix: symmetrized(&c.matrix),
        lag: c.lag,
    }
}

pub(crate) fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least-squares gain `a = ⟨s,y⟩/⟨y,y⟩` mapping `y` onto `s`.
pub fn scale_gain(y: &[f64], s: &[f64]) -> Result<f64> {
    if y.len() != s.len() {
        return Err(Error::Dimension(format!(
            "estimate has {} samples, reference {}",
            y.len(),
            s.len()
        )));
    }
    let yy = dot(y, y);
    if yy == 0.0 {
        return Err(Error::DegenerateChannel("estimate is identically zero".into()));
    }
    Ok(dot(s, y) / yy)
}

/// Returns `a·y` with the least-squares gain `a` (possibly negative).
pub fn scale_correct(y: &[f64], s: &[f64]) -> Result<Vec<f64>> {
    let a = scale_gain(y, s)?;
    Ok(y.iter().map(|v| a * v).collect())
}

/// Signal-to-interference ratio in dB; `+∞` when the estimate is exact.
pub fn sir(s: &[f64], y_hat: &[f64]) -> Result<f64> {
    if s.len() != y_hat.len() {
        return Err(Error::Dimension(format!(
            "reference has {} samples, estimate {}",
            s.len(),
            y_hat.len()
        )));
    }
    let n = s.len() as f64;
    let signal = dot(s, s) / n;
    if signal == 0.0 {
        return Err(Error::DegenerateChannel("reference has zero power".into()));
    }
    let err = s.iter().zip(y_hat).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n;
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / err).log10())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirReport {
    /// SIR of each source (dB), in source order.
    #[serde(with = "crate::bundle::float_vec")]
    pub per_source: Vec<f64>,
    /// `permutation[i]` is the estimate row matched to source `i`.
    pub permutation: Vec<usize>,
    /// Gain applied to the matched estimate of source `i`.
    pub gains: Vec<f64>,
    #[serde(with = "crate::bundle::float")]
    pub average: f64,
}

/// Resolves permutation and scale ambiguity by trying every pairing of
/// estimate rows to sources and keeping the one with the highest average SIR.
pub fn match_and_score(y: &SignalMatrix, s: &SignalMatrix) -> Result<SirReport> {
    let n = s.channels();
    if y.channels() != n || y.samples() != s.samples() {
        return Err(Error::Dimension(format!(
            "estimates are {}x{}, sources {}x{}",
            y.channels(),
            y.samples(),
            n,
            s.samples()
        )));
    }
    if n > MAX_MATCH_CHANNELS {
        return Err(Error::TooManyChannels { got: n, max: MAX_MATCH_CHANNELS });
    }
    let ys = y.rows();
    let ss = s.rows();

    // pair[(i, j)] = (gain, sir) for estimate j against source i
    let mut pair = vec![(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let gain = scale_gain(&ys[j], &ss[i])?;
            let corrected: Vec<f64> = ys[j].iter().map(|v| gain * v).collect();
            pair[i * n + j] = (gain, sir(&ss[i], &corrected)?);
        }
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in (0..n).permutations(n) {
        let avg = mean((0..n).map(|i| pair[i * n + perm[i]].1));
        if best.as_ref().is_none_or(|(b, _)| avg > *b) {
            best = Some((avg, perm));
        }
    }
    let (average, permutation) = best.expect("at least one permutation");
    Ok(SirReport {
        per_source: (0..n).map(|i| pair[i * n + permutation[i]].1).collect(),
        gains: (0..n).map(|i| pair[i * n + permutation[i]].0).collect(),
        permutation,
        average,
    })
}

/// Report for a fixed pairing, without searching permutations.
pub fn score_with_permutation(
    y: &SignalMatrix,
    s: &SignalMatrix,
    permutation: &[usize],
) -> Result<SirReport> {
    let n = s.channels();
    if y.channels() != n || permutation.len() != n || y.samples() != s.samples() {
        return Err(Error::Dimension("permutation does not fit signals".into()));
    }
    let mut per_source = Vec::with_capacity(n);
    let mut gains = Vec::with_capacity(n);
    for (i, &j) in permutation.iter().enumerate() {
        let yr = y.row(j);
        let sr = s.row(i);
        let gain = scale_gain(&yr, &sr)?;
        let corrected: Vec<f64> = yr.iter().map(|v| gain * v).collect();
        per_source.push(sir(&sr, &corrected)?);
        gains.push(gain);
    }
    Ok(SirReport {
        average: mean(per_source.iter().copied()),
        per_source,
        permutation: permutation.to_vec(),
        gains,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}
