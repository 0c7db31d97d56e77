//! End-to-end runs: optimizer plus both single-criterion baselines, SIR
//! scoring against known sources, reference-slope sweeps.

use crate::bundle::{
    Baselines, BundleEntry, DataSource, MatrixData, RunManifest, SolutionBundle, SweepRow,
    FORMAT_VERSION,
};
use crate::error::{Error, Result};
use crate::mixing::{synth_generate, SynthConfig};
use crate::objectives::EvaluatedCandidate;
use crate::signal::{match_and_score, SignalMatrix, SirReport};
use crate::spea2::{run_mono, run_spea2, MonoObjective, Spea2Config};

/// Mixtures, optional ground truth and their provenance.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub mixtures: SignalMatrix,
    pub truth: Option<SignalMatrix>,
    pub source: DataSource,
}

impl Dataset {
    pub fn synthetic(cfg: &SynthConfig) -> Result<Self> {
        let data = synth_generate(cfg)?;
        Ok(Self {
            mixtures: data.mixtures,
            truth: Some(data.sources),
            source: DataSource::Synthetic(cfg.clone()),
        })
    }

    pub fn inputs(&self) -> Vec<String> {
        match &self.source {
            DataSource::Synthetic(_) => Vec::new(),
            DataSource::Files { mixtures, truth } => {
                std::iter::once(mixtures.clone()).chain(truth.clone()).collect()
            }
        }
    }

    fn check(&self) -> Result<()> {
        if let Some(s) = &self.truth {
            if s.channels() != self.mixtures.channels() || s.samples() != self.mixtures.samples() {
                return Err(Error::Dimension(format!(
                    "truth is {}x{}, mixtures {}x{}",
                    s.channels(),
                    s.samples(),
                    self.mixtures.channels(),
                    self.mixtures.samples()
                )));
            }
        }
        Ok(())
    }
}

fn score(c: &EvaluatedCandidate, truth: Option<&SignalMatrix>) -> Result<Option<SirReport>> {
    truth.map(|s| match_and_score(&c.y, s)).transpose()
}

fn entry(c: &EvaluatedCandidate, truth: Option<&SignalMatrix>) -> Result<BundleEntry> {
    Ok(BundleEntry::from_candidate(c, score(c, truth)?))
}

/// Index of the highest average SIR (first on ties).
fn best_index(entries: &[BundleEntry]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in entries.iter().enumerate() {
        if let Some(v) = e.average_sir() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Archive entries as written to a bundle: scored and sorted by ascending `j1`.
pub fn archive_entries(
    members: &[EvaluatedCandidate],
    truth: Option<&SignalMatrix>,
) -> Result<Vec<BundleEntry>> {
    let mut entries = members.iter().map(|c| entry(c, truth)).collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| a.j1.total_cmp(&b.j1).then(a.j2.total_cmp(&b.j2)));
    Ok(entries)
}

/// Multi-objective run plus both baselines, packaged as a bundle.
pub fn run_experiment(data: &Dataset, cfg: &Spea2Config, command: &str) -> Result<SolutionBundle> {
    data.check()?;
    let truth = data.truth.as_ref();
    let archive = run_spea2(&data.mixtures, cfg)?;
    let members: Vec<EvaluatedCandidate> =
        archive.members.into_iter().map(|m| m.candidate).collect();
    let entries = archive_entries(&members, truth)?;
    let baselines = run_baselines(data, cfg)?;

    Ok(SolutionBundle {
        format_version: FORMAT_VERSION.to_string(),
        manifest: RunManifest::new(command, data.inputs(), cfg.seed),
        config: cfg.clone(),
        source: data.source.clone(),
        mixtures: MatrixData::from_signal(&data.mixtures),
        truth: truth.map(MatrixData::from_signal),
        best_index: best_index(&entries),
        archive: entries,
        baselines,
        sweep: None,
    })
}

/// `from, from+step, …` up to `to` inclusive (within half a step of rounding).
pub fn sweep_references(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && to >= from) {
        return Err(Error::Config(format!("bad sweep range [{from}, {to}]")));
    }
    if from == to {
        return Ok(vec![from]);
    }
    if !(step > 0.0) {
        return Err(Error::Config(format!("sweep step must be positive, got {step}")));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| from + i as f64 * step).collect())
}

/// Best average SIR over the final archive, one run per reference slope.
pub fn run_sweep(data: &Dataset, cfg: &Spea2Config, references: &[f64]) -> Result<Vec<SweepRow>> {
    data.check()?;
    let Some(truth) = data.truth.as_ref() else {
        return Err(Error::Config("a sweep needs ground-truth sources to report SIR".into()));
    };
    let (lo, hi) = cfg.bounds;
    if let Some(r) = references.iter().find(|r| !(**r >= lo && **r <= hi)) {
        return Err(Error::Config(format!("reference {r} outside slope bounds [{lo}, {hi}]")));
    }
    references
        .iter()
        .map(|&reference| {
            let run_cfg = Spea2Config { reference, ..cfg.clone() };
            let archive = run_spea2(&data.mixtures, &run_cfg)?;
            let mut best = f64::NEG_INFINITY;
            for m in &archive.members {
                best = best.max(match_and_score(&m.candidate.y, truth)?.average);
            }
            Ok(SweepRow { reference, best_sir: best, archive_size: archive.len() })
        })
        .collect()
}

/// Plain-text table of every archive entry and the two baselines. The best
/// entry is starred. SIR values print in shortest round-trip form so they read
/// back exactly as stored.
pub fn format_table(bundle: &SolutionBundle) -> String {
    let mut rows: Vec<(String, &BundleEntry)> = bundle
        .archive
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mark = if bundle.best_index == Some(i) { "*" } else { "" };
            (format!("{i}{mark}"), e)
        })
        .collect();
    rows.push(("nernst".into(), &bundle.baselines.nernst));
    rows.push(("sobi".into(), &bundle.baselines.sobi_criterion));
    format_rows(bundle.mixtures.rows, &rows)
}

pub fn format_rows(channels: usize, rows: &[(String, &BundleEntry)]) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let sir_cols: String = (1..=channels).map(|i| format!(" {:>20}", format!("SIR{i}"))).collect();
    let _ = writeln!(
        out,
        "{:<8} {:>24} {:>12} {:>12}{sir_cols} {:>20}",
        "entry", "slopes (mV/dec)", "j1", "j2", "avg"
    );
    for (label, e) in rows {
        let slopes: Vec<String> = e.d_star.iter().map(|d| format!("{d:.2}")).collect();
        let _ = write!(out, "{label:<8} {:>24} {:>12.4e} {:>12.4e}", slopes.join(", "), e.j1, e.j2);
        if let Some(r) = &e.sir {
            for v in &r.per_source {
                let _ = write!(out, " {v:>20}");
            }
            let _ = write!(out, " {:>20}", r.average);
        }
        out.push('\n');
    }
    out
}

/// Both single-criterion baselines, scored when ground truth is known.
pub fn run_baselines(data: &Dataset, cfg: &Spea2Config) -> Result<Baselines> {
    data.check()?;
    let truth = data.truth.as_ref();
    let nernst = run_mono(&data.mixtures, MonoObjective::Nernst, cfg)?;
    let sobi = run_mono(&data.mixtures, MonoObjective::SobiCriterion, cfg)?;
    Ok(Baselines { nernst: entry(&nernst, truth)?, sobi_criterion: entry(&sobi, truth)? })
}
