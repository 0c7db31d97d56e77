//! Versioned JSON run artifact shared by the reports and the browser views.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixing::{separate, SynthConfig};
use crate::objectives::EvaluatedCandidate;
use crate::signal::{SignalMatrix, SirReport};
use crate::spea2::Spea2Config;

pub const FORMAT_VERSION: &str = "pnlsep-bundle/1";

/// Tolerance for recomputing a stored `y` from `(x, d*, W)`.
pub const RECOMPUTE_TOL: f64 = 1e-9;

/// Serializes `f64` as a JSON number, or `"inf"`, `"-inf"`, `"nan"` when not finite.
pub mod float {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    struct FloatVisitor;

    impl Visitor<'_> for FloatVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(FloatVisitor)
    }
}

/// [`float`] applied to every element of a vector.
pub mod float_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct F(#[serde(with = "super::float")] f64);

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| F(*x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<F>::deserialize(d)?.into_iter().map(|f| f.0).collect())
    }
}

/// Dense matrix with explicit dimensions, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl MatrixData {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let data = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
            .collect();
        Self { rows: m.nrows(), cols: m.ncols(), data, labels: None }
    }

    pub fn from_signal(s: &SignalMatrix) -> Self {
        Self { labels: s.labels().map(<[String]>::to_vec), ..Self::from_matrix(s.matrix()) }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Bundle(format!(
                "matrix declares {}x{} but holds {} values",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }

    pub fn to_signal(&self) -> Result<SignalMatrix> {
        let s = SignalMatrix::new(self.to_matrix()?)?;
        match &self.labels {
            Some(l) => s.with_labels(l.clone()),
            None => Ok(s),
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleEntry {
    pub d_star: Vec<f64>,
    pub w: MatrixData,
    pub j1: f64,
    pub j2: f64,
    pub y: MatrixData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sir: Option<SirReport>,
}

impl BundleEntry {
    pub fn from_candidate(c: &EvaluatedCandidate, sir: Option<SirReport>) -> Self {
        Self {
            d_star: c.d_star.clone(),
            w: MatrixData::from_matrix(&c.w),
            j1: c.objectives.j1,
            j2: c.objectives.j2,
            y: MatrixData::from_signal(&c.y),
            sir,
        }
    }

    pub fn average_sir(&self) -> Option<f64> {
        self.sir.as_ref().map(|r| r.average)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    pub nernst: BundleEntry,
    pub sobi_criterion: BundleEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub reference: f64,
    #[serde(with = "float")]
    pub best_sir: f64,
    pub archive_size: usize,
}

/// Where the mixtures came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Synthetic(SynthConfig),
    Files { mixtures: String, truth: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub seed: u64,
    /// Seconds since the Unix epoch; the only field allowed to differ between reruns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
    pub toolkit_version: String,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, inputs: Vec<String>, seed: u64) -> Self {
        Self {
            command: command.into(),
            inputs,
            seed,
            created_unix: None,
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionBundle {
    pub format_version: String,
    pub manifest: RunManifest,
    pub config: Spea2Config,
    pub source: DataSource,
    pub mixtures: MatrixData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<MatrixData>,
    /// Sorted by ascending `j1`.
    pub archive: Vec<BundleEntry>,
    pub baselines: Baselines,
    /// Archive entry with the highest average SIR, when ground truth is known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepRow>>,
}

impl SolutionBundle {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Bundle(e.to_string()))
    }

    /// Parses and checks the format version and the `j1` ordering.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Bundle(e.to_string()))?;
        match value.get("format_version").and_then(|v| v.as_str()) {
            Some(FORMAT_VERSION) => {}
            Some(other) => {
                return Err(Error::Bundle(format!("unsupported format version {other:?}")))
            }
            None => return Err(Error::Bundle("missing format_version".into())),
        }
        let bundle: Self =
            serde_json::from_value(value).map_err(|e| Error::Bundle(e.to_string()))?;
        if bundle.archive.windows(2).any(|w| w[0].j1 > w[1].j1) {
            return Err(Error::Bundle("archive entries are not sorted by j1".into()));
        }
        Ok(bundle)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Largest absolute difference between any stored `y` (archive and
    /// baselines) and its recomputation from `(x, d*, W)`.
    pub fn max_recompute_error(&self) -> Result<f64> {
        let x = self.mixtures.to_signal()?;
        let mut worst = 0.0f64;
        for e in self.archive.iter().chain([&self.baselines.nernst, &self.baselines.sobi_criterion]) {
            let y = separate(&x, &e.d_star, &e.w.to_matrix()?)?;
            worst = worst.max((y.matrix() - e.y.to_matrix()?).amax());
        }
        Ok(worst)
    }

    pub fn best_entry(&self) -> Option<&BundleEntry> {
        self.best_index.and_then(|i| self.archive.get(i))
    }
}
