//! Multi-objective blind source separation for post-nonlinear
//! (Nicolsky-Eisenman) electrode mixtures.
//!
//! Slope parameters of the nonlinear stage are searched by a strength Pareto
//! evolutionary algorithm under two criteria: closeness to the Nernstian
//! slope and joint diagonality of lagged covariances. For every candidate the
//! linear stage is solved by SOBI. The result is a set of non-dominated
//! separations to choose from.
//!
//! ```no_run
//! use pnlsep::{pipeline, mixing::SynthConfig, spea2::Spea2Config};
//!
//! let data = pipeline::Dataset::synthetic(&SynthConfig::two_electrode(7))?;
//! let bundle = pipeline::run_experiment(&data, &Spea2Config::default(), "example")?;
//! println!("{}", pipeline::format_table(&bundle));
//! # Ok::<(), pnlsep::Error>(())
//! ```

pub mod bundle;
pub mod csvio;
pub mod error;
pub mod mixing;
pub mod objectives;
pub mod pipeline;
pub mod plotdata;
pub mod signal;
pub mod sobi;
pub mod spea2;

pub use error::{Error, Result};
pub use signal::SignalMatrix;
