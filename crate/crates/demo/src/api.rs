//! Plain-Rust operations behind the browser bindings. Every result is a JSON
//! document so the page can consume it without generated type glue.

use pnlsep::bundle::{BundleEntry, MatrixData};
use pnlsep::mixing::SynthConfig;
use pnlsep::objectives::{evaluate_candidate, EvalConfig};
use pnlsep::pipeline::{self, Dataset};
use pnlsep::signal::match_and_score;
use pnlsep::spea2::Spea2Config;
use pnlsep::{Error, Result};
use serde::Serialize;

fn to_json(value: &impl Serialize) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Bundle(e.to_string()))
}

#[derive(Serialize)]
struct Instance {
    seed: u64,
    true_slopes: Vec<f64>,
    sources: MatrixData,
    mixtures: MatrixData,
}

/// The synthetic two-electrode experiment for `seed`.
pub fn instance(seed: u64) -> Result<String> {
    let cfg = SynthConfig::two_electrode(seed);
    let data = Dataset::synthetic(&cfg)?;
    to_json(&Instance {
        seed,
        true_slopes: cfg.slopes,
        sources: MatrixData::from_signal(data.truth.as_ref().expect("synthetic data has truth")),
        mixtures: MatrixData::from_signal(&data.mixtures),
    })
}

/// Separates the instance with the given slopes; same shape as a bundle entry.
pub fn evaluate(seed: u64, d_star: &[f64]) -> Result<String> {
    let data = Dataset::synthetic(&SynthConfig::two_electrode(seed))?;
    let c = evaluate_candidate(d_star, &data.mixtures, &EvalConfig::default())?;
    let truth = data.truth.as_ref().expect("synthetic data has truth");
    to_json(&BundleEntry::from_candidate(&c, Some(match_and_score(&c.y, truth)?)))
}

/// Full multi-objective run with baselines, returned as a solution bundle.
pub fn optimize(seed: u64, population: usize, archive: usize, generations: usize) -> Result<String> {
    let data = Dataset::synthetic(&SynthConfig::two_electrode(seed))?;
    let cfg = Spea2Config { population, archive, generations, seed, ..Default::default() };
    pipeline::run_experiment(&data, &cfg, "demo")?.to_json()
}
