//! Columnar CSV series extracted from a bundle, one table per figure.

use std::fmt::Write;
use std::str::FromStr;

use crate::bundle::{BundleEntry, SolutionBundle};
use crate::error::{Error, Result};
use crate::signal::scale_correct;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// `(j1, j2)` of every archive entry plus the two baselines.
    Front,
    /// Per-entry SIR in `j1` order.
    SirByIndex,
    /// Reference slope against best SIR.
    Sweep,
    /// Time series of the true sources and one retrieved entry.
    Sources,
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "front" => Ok(Figure::Front),
            "sir-by-index" => Ok(Figure::SirByIndex),
            "sweep" => Ok(Figure::Sweep),
            "sources" => Ok(Figure::Sources),
            other => Err(Error::Config(format!("unknown figure {other:?}"))),
        }
    }
}

fn missing(what: &str) -> Error {
    Error::Bundle(format!("bundle has no {what}"))
}

/// `entry` picks the retrieved signals for [`Figure::Sources`]; it defaults to
/// the best entry, else the first.
pub fn plot_data(bundle: &SolutionBundle, figure: Figure, entry: Option<usize>) -> Result<String> {
    let mut out = String::new();
    match figure {
        Figure::Front => {
            out.push_str("kind,index,j1,j2,best\n");
            for (i, e) in bundle.archive.iter().enumerate() {
                let best = u8::from(bundle.best_index == Some(i));
                let _ = writeln!(out, "archive,{i},{},{},{best}", e.j1, e.j2);
            }
            let b = &bundle.baselines;
            let _ = writeln!(out, "nernst,,{},{},0", b.nernst.j1, b.nernst.j2);
            let _ = writeln!(out, "sobi,,{},{},0", b.sobi_criterion.j1, b.sobi_criterion.j2);
        }
        Figure::SirByIndex => {
            let n = bundle.mixtures.rows;
            let cols: String = (1..=n).map(|i| format!(",sir{i}")).collect();
            let _ = writeln!(out, "index,j1{cols},average");
            for (i, e) in bundle.archive.iter().enumerate() {
                let r = e.sir.as_ref().ok_or_else(|| missing("SIR values"))?;
                let vals: String = r.per_source.iter().map(|v| format!(",{v}")).collect();
                let _ = writeln!(out, "{i},{}{vals},{}", e.j1, r.average);
            }
        }
        Figure::Sweep => {
            let rows = bundle.sweep.as_ref().ok_or_else(|| missing("sweep table"))?;
            out.push_str(&sweep_table(rows));
        }
        Figure::Sources => {
            let index = entry.or(bundle.best_index).unwrap_or(0);
            let e = bundle
                .archive
                .get(index)
                .ok_or_else(|| Error::Bundle(format!("no archive entry {index}")))?;
            out.push_str(&sources_table(bundle, e)?);
        }
    }
    Ok(out)
}

pub fn sweep_table(rows: &[crate::bundle::SweepRow]) -> String {
    let mut out = String::from("reference_mv,best_sir_db\n");
    for r in rows {
        let _ = writeln!(out, "{},{}", r.reference, r.best_sir);
    }
    out
}

fn sources_table(bundle: &SolutionBundle, e: &BundleEntry) -> Result<String> {
    let n = e.y.rows;
    let t = e.y.cols;
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    if let Some(s) = &bundle.truth {
        for i in 0..s.rows {
            columns.push((format!("s{}", i + 1), s.row(i).to_vec()));
        }
    }
    for i in 0..n {
        columns.push((format!("y{}", i + 1), e.y.row(i).to_vec()));
    }
    // estimates matched to sources and rescaled, as scored
    if let (Some(s), Some(r)) = (&bundle.truth, &e.sir) {
        for (i, &j) in r.permutation.iter().enumerate() {
            columns.push((format!("yhat{}", i + 1), scale_correct(e.y.row(j), s.row(i))?));
        }
    }
    let mut out = String::from("t");
    for (name, _) in &columns {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for k in 0..t {
        let _ = write!(out, "{k}");
        for (_, v) in &columns {
            let _ = write!(out, ",{}", v[k]);
        }
        out.push('\n');
    }
    Ok(out)
}
