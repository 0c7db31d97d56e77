//! Nicolsky-Eisenman forward model, the post-nonlinear separating transform
//! and a seeded synthetic electrode-array generator.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SignalMatrix;

/// Largest admissible `x/d*` exponent in [`separate`]; `10^300` is near the f64 limit.
pub const MAX_EXPONENT: f64 = 300.0;

/// Electrode response parameters: `x_i = e_i + d_i·log10((A·s)_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingModel {
    offsets: Vec<f64>,
    slopes: Vec<f64>,
    selectivity: DMatrix<f64>,
}

impl MixingModel {
    pub fn new(offsets: Vec<f64>, slopes: Vec<f64>, selectivity: DMatrix<f64>) -> Result<Self> {
        let n = slopes.len();
        if n == 0 {
            return Err(Error::Config("no electrodes".into()));
        }
        if offsets.len() != n || selectivity.nrows() != n || selectivity.ncols() != n {
            return Err(Error::Dimension(format!(
                "{} offsets, {} slopes, {}x{} selectivity",
                offsets.len(),
                n,
                selectivity.nrows(),
                selectivity.ncols()
            )));
        }
        if let Some((index, &value)) = slopes.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
            return Err(Error::NonPositiveSlope { index, value });
        }
        for i in 0..n {
            for j in 0..n {
                let a = selectivity[(i, j)];
                let ok = if i == j { a == 1.0 } else { a >= 0.0 && a.is_finite() };
                if !ok {
                    return Err(Error::Config(format!(
                        "selectivity ({i},{j}) = {a}: diagonal must be 1, off-diagonal non-negative"
                    )));
                }
            }
        }
        if offsets.iter().any(|e| !e.is_finite()) {
            return Err(Error::Config("non-finite offset".into()));
        }
        Ok(Self { offsets, slopes, selectivity })
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn selectivity(&self) -> &DMatrix<f64> {
        &self.selectivity
    }

    pub fn electrodes(&self) -> usize {
        self.slopes.len()
    }
}

/// Simulates electrode responses to the activities `s`.
pub fn ne_mix(s: &SignalMatrix, model: &MixingModel) -> Result<SignalMatrix> {
    let n = model.electrodes();
    if s.channels() != n {
        return Err(Error::Dimension(format!(
            "{} sources for {} electrodes",
            s.channels(),
            n
        )));
    }
    let lin = model.selectivity() * s.matrix();
    let mut x = DMatrix::zeros(n, s.samples());
    for i in 0..n {
        for t in 0..s.samples() {
            let arg = lin[(i, t)];
            if !(arg > 0.0) {
                return Err(Error::LogDomain { channel: i, sample: t, value: arg });
            }
            x[(i, t)] = model.offsets[i] + model.slopes[i] * arg.log10();
        }
    }
    SignalMatrix::new(x)
}

/// Undoes the electrode nonlinearity, `v(t) = 10^{x(t) ∘ 1/d*}`.
pub fn linearize(x: &SignalMatrix, d_star: &[f64]) -> Result<DMatrix<f64>> {
    if d_star.len() != x.channels() {
        return Err(Error::Dimension(format!(
            "{} slopes for {} channels",
            d_star.len(),
            x.channels()
        )));
    }
    if let Some((index, &value)) = d_star.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
        return Err(Error::NonPositiveSlope { index, value });
    }
    let mut v = DMatrix::zeros(x.channels(), x.samples());
    for i in 0..x.channels() {
        for t in 0..x.samples() {
            let exponent = x.get(i, t) / d_star[i];
            if exponent > MAX_EXPONENT {
                return Err(Error::Overflow { channel: i, sample: t, exponent });
            }
            v[(i, t)] = 10f64.powf(exponent);
        }
    }
    Ok(v)
}

/// Post-nonlinear separating system `y(t) = W·10^{x(t) ∘ 1/d*}`.
pub fn separate(x: &SignalMatrix, d_star: &[f64], w: &DMatrix<f64>) -> Result<SignalMatrix> {
    let m = x.channels();
    if w.nrows() != w.ncols() || w.ncols() != m {
        return Err(Error::Dimension(format!(
            "separating matrix is {}x{}, expected {m}x{m}",
            w.nrows(),
            w.ncols()
        )));
    }
    let v = linearize(x, d_star)?;
    SignalMatrix::new(w * v)
}

/// Synthetic electrode-array experiment.
///
/// Each source is a mean-reverting random walk in log10-activity, clipped to
/// `activity_range` and smoothed by a trailing moving average. Sources use
/// independent RNG streams derived from `seed`; mixture noise uses another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub sources: usize,
    pub samples: usize,
    pub slopes: Vec<f64>,
    /// Row-major selectivity matrix.
    pub selectivity: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    /// Moving-average window per source; a single value applies to every source.
    pub smoothing: Vec<usize>,
    /// Lag-one coefficient of the underlying walk, in `[0, 1)`.
    pub persistence: f64,
    /// `(min, max)` activity, both strictly positive.
    pub activity_range: (f64, f64),
    /// Standard deviation of additive mixture noise in mV.
    pub noise_mv: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// Two electrodes, 41 samples, slopes (55, 62) mV/decade and
    /// cross-selectivities 0.3 / 0.4, noiseless.
    pub fn two_electrode(seed: u64) -> Self {
        Self {
            sources: 2,
            samples: 41,
            slopes: vec![55.0, 62.0],
            selectivity: vec![vec![1.0, 0.3], vec![0.4, 1.0]],
            offsets: vec![0.0, 0.0],
            smoothing: vec![2, 6],
            persistence: 0.9,
            activity_range: (1e-3, 1e-1),
            noise_mv: 0.0,
            seed,
        }
    }

    pub fn model(&self) -> Result<MixingModel> {
        let n = self.sources;
        if self.selectivity.len() != n || self.selectivity.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!("selectivity must be {n}x{n}")));
        }
        let a = DMatrix::from_fn(n, n, |i, j| self.selectivity[i][j]);
        MixingModel::new(self.offsets.clone(), self.slopes.clone(), a)
    }

    fn validate(&self) -> Result<()> {
        if self.sources < 2 {
            return Err(Error::Config("need at least 2 sources".into()));
        }
        if self.samples < 2 {
            return Err(Error::Config("need at least 2 samples".into()));
        }
        let (lo, hi) = self.activity_range;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Config(format!("activity range ({lo}, {hi}) must be 0 < min < max")));
        }
        if !(self.smoothing.len() == 1 || self.smoothing.len() == self.sources) {
            return Err(Error::Config("smoothing needs 1 or one-per-source windows".into()));
        }
        if self.smoothing.contains(&0) {
            return Err(Error::Config("smoothing window must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.persistence) {
            return Err(Error::Config("persistence must lie in [0, 1)".into()));
        }
        if !(self.noise_mv >= 0.0 && self.noise_mv.is_finite()) {
            return Err(Error::Config("noise deviation must be finite and non-negative".into()));
        }
        Ok(())
    }

    fn window(&self, source: usize) -> usize {
        if self.smoothing.len() == 1 {
            self.smoothing[0]
        } else {
            self.smoothing[source]
        }
    }
}

/// Output of [`synth_generate`].
#[derive(Debug, Clone)]
pub struct SynthData {
    pub sources: SignalMatrix,
    pub mixtures: SignalMatrix,
    pub model: MixingModel,
}

pub fn synth_generate(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let model = cfg.model()?;
    let (lo, hi) = cfg.activity_range;
    let (log_lo, log_hi) = (lo.log10(), hi.log10());
    let center = 0.5 * (log_lo + log_hi);
    let half = 0.5 * (log_hi - log_lo);
    let innovation = (1.0 - cfg.persistence * cfg.persistence).sqrt() * 0.5;
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    let rows: Vec<Vec<f64>> = (0..cfg.sources)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64 + 1);
            let w = cfg.window(i);
            let mut z: f64 = rng.random_range(-0.5..0.5);
            let walk: Vec<f64> = (0..cfg.samples + w - 1)
                .map(|_| {
                    z = (cfg.persistence * z + innovation * std_normal.sample(&mut rng))
                        .clamp(-1.0, 1.0);
                    center + half * z
                })
                .collect();
            walk.windows(w)
                .map(|win| {
                    let m = win.iter().sum::<f64>() / w as f64;
                    10f64.powf(m).clamp(lo, hi)
                })
                .collect()
        })
        .collect();
    let sources = SignalMatrix::from_rows(&rows)?;
    let clean = ne_mix(&sources, &model)?;

    let mixtures = if cfg.noise_mv > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(0);
        let noise = Normal::new(0.0, cfg.noise_mv)
            .map_err(|e| Error::Config(format!("noise: {e}")))?;
        let m = clean.matrix();
        // draw order: sample by sample, electrodes within a sample
        let mut noisy = DMatrix::zeros(m.nrows(), m.ncols());
        for t in 0..m.ncols() {
            for i in 0..m.nrows() {
                noisy[(i, t)] = m[(i, t)] + noise.sample(&mut rng);
            }
        }
        SignalMatrix::new(noisy)?
    } else {
        clean
    };
    Ok(SynthData { sources, mixtures, model })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn model(a12: f64, a21: f64, d: [f64; 2]) -> MixingModel {
        MixingModel::new(
            vec![0.0, 0.0],
            d.to_vec(),
            DMatrix::from_row_slice(2, 2, &[1.0, a12, a21, 1.0]),
        )
        .unwrap()
    }

    #[test]
    fn model_validation() {
        let a = DMatrix::identity(2, 2);
        assert!(matches!(
            MixingModel::new(vec![0.0; 2], vec![59.0, 0.0], a.clone()),
            Err(Error::NonPositiveSlope { index: 1, .. })
        ));
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, -0.1, 0.0, 1.0]);
        assert!(matches!(MixingModel::new(vec![0.0; 2], vec![59.0; 2], bad), Err(Error::Config(_))));
        let bad = DMatrix::from_row_slice(2, 2, &[0.9, 0.0, 0.0, 1.0]);
        assert!(matches!(MixingModel::new(vec![0.0; 2], vec![59.0; 2], bad), Err(Error::Config(_))));
    }

    #[test]
    fn ne_mix_examples() {
        let s = SignalMatrix::from_rows(&[vec![10.0; 3], vec![10.0; 3]]).unwrap();
        let x = ne_mix(&s, &model(0.0, 0.0, [59.0, 59.0])).unwrap();
        assert!(x.matrix().iter().all(|&v| (v - 59.0).abs() < 1e-12));

        let x = ne_mix(&s, &model(0.5, 0.0, [59.0, 59.0])).unwrap();
        assert_relative_eq!(x.get(0, 0), 59.0 * 15f64.log10(), epsilon = 1e-12);
        assert_relative_eq!(x.get(0, 0), 69.389, epsilon = 1e-3);

        let z = SignalMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            ne_mix(&z, &model(0.0, 0.0, [59.0, 59.0])),
            Err(Error::LogDomain { channel: 0, sample: 1, .. })
        ));
    }

    #[test]
    fn separate_examples() {
        let s = SignalMatrix::from_rows(&[vec![0.5, 2.0, 7.0], vec![3.0, 0.1, 1.0]]).unwrap();
        let m = model(0.0, 0.0, [55.0, 62.0]);
        let x = ne_mix(&s, &m).unwrap();
        let y = separate(&x, m.slopes(), &DMatrix::identity(2, 2)).unwrap();
        for (a, b) in y.matrix().iter().zip(s.matrix().iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }

        let zero = SignalMatrix::from_rows(&[vec![0.0; 4], vec![0.0; 4]]).unwrap();
        let y = separate(&zero, &[40.0, 70.0], &DMatrix::identity(2, 2)).unwrap();
        assert!(y.matrix().iter().all(|&v| v == 1.0));

        // A = [[1, 0.3], [0.6, 1]], cond ≈ 2.3
        let m = model(0.3, 0.6, [55.0, 62.0]);
        let x = ne_mix(&s, &m).unwrap();
        let w = m.selectivity().clone().try_inverse().unwrap();
        let y = separate(&x, m.slopes(), &w).unwrap();
        for (a, b) in y.matrix().iter().zip(s.matrix().iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn separate_errors() {
        let x = SignalMatrix::from_rows(&[vec![0.0, 400.0], vec![1.0, 1.0]]).unwrap();
        let i2 = DMatrix::identity(2, 2);
        assert!(matches!(
            separate(&x, &[1.0, 1.0], &i2),
            Err(Error::Overflow { channel: 0, sample: 1, .. })
        ));
        assert!(matches!(
            separate(&x, &[10.0, -1.0], &i2),
            Err(Error::NonPositiveSlope { index: 1, .. })
        ));
        assert!(matches!(
            separate(&x, &[10.0, 10.0], &DMatrix::identity(3, 3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn synth_is_deterministic() {
        let cfg = SynthConfig { noise_mv: 0.5, ..SynthConfig::two_electrode(11) };
        let a = synth_generate(&cfg).unwrap();
        let b = synth_generate(&cfg).unwrap();
        assert_eq!(a.sources, b.sources);
        assert_eq!(a.mixtures, b.mixtures);
        let c = synth_generate(&SynthConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a.sources, c.sources);
    }

    #[test]
    fn synth_noiseless_identity_inverts() {
        let cfg = SynthConfig {
            selectivity: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            ..SynthConfig::two_electrode(3)
        };
        let data = synth_generate(&cfg).unwrap();
        let y = separate(&data.mixtures, &cfg.slopes, &DMatrix::identity(2, 2)).unwrap();
        for (a, b) in y.matrix().iter().zip(data.sources.matrix().iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
        let (lo, hi) = cfg.activity_range;
        assert!(data.sources.matrix().iter().all(|&v| v >= lo && v <= hi));
    }

    #[test]
    fn synth_sources_uncorrelated() {
        let cfg = SynthConfig {
            samples: 1000,
            smoothing: vec![1],
            persistence: 0.3,
            ..SynthConfig::two_electrode(2024)
        };
        let data = synth_generate(&cfg).unwrap();
        let c = crate::signal::lagged_covariance(&data.sources, 0).unwrap().matrix;
        let corr = c[(0, 1)] / (c[(0, 0)] * c[(1, 1)]).sqrt();
        assert!(corr.abs() < 0.1, "correlation {corr}");
    }

    #[test]
    fn synth_rejects_bad_config() {
        let base = SynthConfig::two_electrode(1);
        let bad = [
            SynthConfig { activity_range: (0.0, 1.0), ..base.clone() },
            SynthConfig { samples: 1, ..base.clone() },
            SynthConfig { sources: 1, ..base.clone() },
            SynthConfig { smoothing: vec![0], ..base.clone() },
            SynthConfig { persistence: 1.0, ..base.clone() },
            SynthConfig { noise_mv: -1.0, ..base.clone() },
        ];
        for cfg in bad {
            assert!(matches!(synth_generate(&cfg), Err(Error::Config(_))), "{cfg:?}");
        }
    }

    proptest! {
        #[test]
        fn round_trip_through_inverse(
            a12 in 0.0f64..0.6, a21 in 0.0f64..0.6,
            d1 in 40.0f64..80.0, d2 in 40.0f64..80.0,
            seed in 0u64..1000,
        ) {
            let cfg = SynthConfig {
                slopes: vec![d1, d2],
                selectivity: vec![vec![1.0, a12], vec![a21, 1.0]],
                seed,
                ..SynthConfig::two_electrode(0)
            };
            let data = synth_generate(&cfg).unwrap();
            let w = data.model.selectivity().clone().try_inverse().unwrap();
            let y = separate(&data.mixtures, &[d1, d2], &w).unwrap();
            for (a, b) in y.matrix().iter().zip(data.sources.matrix().iter()) {
                prop_assert!(((a - b) / b).abs() < 1e-9);
            }
        }

        #[test]
        fn mixing_is_permutation_equivariant(
            a12 in 0.0f64..1.0, a21 in 0.0f64..1.0, e1 in -50.0f64..50.0,
            s in prop::collection::vec(0.01f64..10.0, 6),
        ) {
            let src = SignalMatrix::from_rows(&[s[..3].to_vec(), s[3..].to_vec()]).unwrap();
            let m = MixingModel::new(
                vec![e1, 0.0], vec![55.0, 62.0],
                DMatrix::from_row_slice(2, 2, &[1.0, a12, a21, 1.0]),
            ).unwrap();
            let swapped_src = SignalMatrix::from_rows(&[s[3..].to_vec(), s[..3].to_vec()]).unwrap();
            let swapped = MixingModel::new(
                vec![0.0, e1], vec![62.0, 55.0],
                DMatrix::from_row_slice(2, 2, &[1.0, a21, a12, 1.0]),
            ).unwrap();
            let x = ne_mix(&src, &m).unwrap();
            let xs = ne_mix(&swapped_src, &swapped).unwrap();
            prop_assert_eq!(x.row(0), xs.row(1));
            prop_assert_eq!(x.row(1), xs.row(0));
        }

        #[test]
        fn offsets_only_rescale(
            e1 in -100.0f64..100.0, e2 in -100.0f64..100.0,
            s in prop::collection::vec(0.01f64..10.0, 8),
        ) {
            let src = SignalMatrix::from_rows(&[s[..4].to_vec(), s[4..].to_vec()]).unwrap();
            let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.4, 1.0]);
            let d = vec![55.0, 62.0];
            let with = MixingModel::new(vec![e1, e2], d.clone(), a.clone()).unwrap();
            let without = MixingModel::new(vec![0.0, 0.0], d.clone(), a).unwrap();
            let i2 = DMatrix::identity(2, 2);
            let y1 = separate(&ne_mix(&src, &with).unwrap(), &d, &i2).unwrap();
            let y0 = separate(&ne_mix(&src, &without).unwrap(), &d, &i2).unwrap();
            for ch in 0..2 {
                let ratios: Vec<f64> = (0..4).map(|t| y1.get(ch, t) / y0.get(ch, t)).collect();
                prop_assert!(ratios[0] > 0.0);
                for r in &ratios {
                    prop_assert!(((r - ratios[0]) / ratios[0]).abs() < 1e-10);
                }
            }
        }
    }
}
