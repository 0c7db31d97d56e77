//! `pnlsep` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use pnlsep::bundle::{DataSource, RunManifest, SolutionBundle};
use pnlsep::csvio::{load_csv, save_csv};
use pnlsep::mixing::{synth_generate, SynthConfig};
use pnlsep::pipeline::{self, Dataset};
use pnlsep::plotdata::{plot_data, sweep_table, Figure};
use pnlsep::spea2::Spea2Config;
use pnlsep::{Error, Result};

#[derive(Parser)]
#[command(name = "pnlsep", version, about = "Multi-objective separation of ion-selective electrode mixtures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic two-electrode experiment as CSV files.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 41)]
        samples: usize,
        /// Mixture noise in mV.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Output directory for mixtures.csv, truth.csv and synth.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Multi-objective run plus both baselines; writes a solution bundle.
    Run {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        opt: OptArgs,
        #[arg(long, default_value = "bundle.json")]
        out: PathBuf,
    },
    /// Best SIR as a function of the reference slope.
    Sweep {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        opt: OptArgs,
        /// Reference range `from,to` in mV/decade.
        #[arg(long, value_parser = parse_pair, default_value = "40,80")]
        range: (f64, f64),
        #[arg(long, default_value_t = 5.0)]
        step: f64,
        #[arg(long, default_value = "sweep.json")]
        out: PathBuf,
    },
    /// Columnar CSV for one figure, read from a bundle.
    Plotdata {
        /// Bundle file.
        #[arg(long)]
        input: PathBuf,
        /// One of front, sir-by-index, sweep, sources.
        #[arg(long, value_parser = parse_figure)]
        figure: Figure,
        /// Archive entry for the sources figure (default: best).
        #[arg(long)]
        entry: Option<usize>,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Only the Nernstian and off-diagonality baselines.
    Baselines {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        opt: OptArgs,
        /// Optional JSON output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DataArgs {
    /// Mixtures CSV, one column per electrode.
    #[arg(long, required_unless_present = "synthetic", conflicts_with = "synthetic")]
    input: Option<PathBuf>,
    /// Ground-truth activities CSV, same shape as the mixtures.
    #[arg(long, requires = "input")]
    truth: Option<PathBuf>,
    /// Use the built-in synthetic two-electrode instance for `--seed`.
    #[arg(long)]
    synthetic: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OptArgs {
    /// Population size.
    #[arg(long, default_value_t = 100)]
    pop: usize,
    /// Archive size.
    #[arg(long, default_value_t = 50)]
    archive: usize,
    /// Generations.
    #[arg(long, default_value_t = 30)]
    gens: usize,
    /// Share of offspring from crossover, percent.
    #[arg(long, default_value_t = 50.0)]
    alpha: f64,
    /// Reference slope, mV/decade.
    #[arg(long = "ref", default_value_t = 59.0)]
    reference: f64,
    /// Largest covariance lag.
    #[arg(long, default_value_t = 3)]
    lags: usize,
    /// Slope bounds `min,max`, mV/decade.
    #[arg(long, value_parser = parse_pair, default_value = "10,120")]
    bounds: (f64, f64),
    /// Mutation standard deviation, mV/decade.
    #[arg(long, default_value_t = 3.0)]
    sigma: f64,
}

impl OptArgs {
    fn config(&self, seed: u64) -> Result<Spea2Config> {
        let cfg = Spea2Config {
            population: self.pop,
            archive: self.archive,
            crossover_percent: self.alpha,
            generations: self.gens,
            bounds: self.bounds,
            sigma: self.sigma,
            seed,
            reference: self.reference,
            max_lag: self.lags,
            density_k: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

fn parse_figure(s: &str) -> std::result::Result<Figure, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        4
    } else if matches!(e, Error::Config(_)) {
        2
    } else {
        3
    }
}

fn now_unix() -> Option<u64> {
    // honour reproducible-build conventions when set
    if let Some(epoch) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return Some(epoch);
    }
    SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
}

fn load_dataset(args: &DataArgs) -> Result<Dataset> {
    if args.synthetic {
        return Dataset::synthetic(&SynthConfig::two_electrode(args.seed));
    }
    let input = args.input.as_ref().ok_or_else(|| Error::Config("no input".into()))?;
    let mixtures = load_csv(input)?;
    let truth = args.truth.as_ref().map(load_csv).transpose()?;
    Ok(Dataset {
        mixtures,
        truth,
        source: DataSource::Files {
            mixtures: input.display().to_string(),
            truth: args.truth.as_ref().map(|p| p.display().to_string()),
        },
    })
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// On failure the manifest is still written next to the intended output.
fn write_failure_manifest(out: &Path, manifest: &RunManifest, err: &Error) {
    let doc = serde_json::json!({ "manifest": manifest, "error": err.to_string() });
    let path = manifest_path(out);
    match serde_json::to_string_pretty(&doc) {
        Ok(text) => {
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("could not write {}: {e}", path.display());
            } else {
                eprintln!("manifest written to {}", path.display());
            }
        }
        Err(e) => eprintln!("could not serialize manifest: {e}"),
    }
}

fn finish(mut bundle: SolutionBundle, out: &Path) -> Result<()> {
    bundle.manifest.created_unix = now_unix();
    bundle.save(out)?;
    eprintln!("bundle written to {}", out.display());
    Ok(())
}

fn with_manifest<T>(
    out: &Path,
    data: &DataArgs,
    inputs: impl FnOnce() -> Vec<String>,
    body: impl FnOnce() -> Result<T>,
) -> Result<T> {
    body().inspect_err(|e| {
        let mut manifest = RunManifest::new(command_line(), inputs(), data.seed);
        manifest.created_unix = now_unix();
        write_failure_manifest(out, &manifest, e);
    })
}

fn file_inputs(data: &DataArgs) -> Vec<String> {
    data.input
        .iter()
        .chain(data.truth.iter())
        .map(|p| p.display().to_string())
        .collect()
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth { seed, samples, noise, out } => {
            let cfg = SynthConfig { samples, noise_mv: noise, ..SynthConfig::two_electrode(seed) };
            let data = synth_generate(&cfg)?;
            std::fs::create_dir_all(&out)?;
            let n = cfg.sources;
            let mixtures = data.mixtures.with_labels((1..=n).map(|i| format!("e{i}_mv")).collect())?;
            let sources = data.sources.with_labels((1..=n).map(|i| format!("s{i}")).collect())?;
            save_csv(&mixtures, out.join("mixtures.csv"))?;
            save_csv(&sources, out.join("truth.csv"))?;
            let json = serde_json::to_string_pretty(&cfg).map_err(|e| Error::Io(e.to_string()))?;
            std::fs::write(out.join("synth.json"), json)?;
            eprintln!("wrote mixtures.csv, truth.csv, synth.json to {}", out.display());
        }
        Command::Run { data, opt, out } => {
            let cfg = opt.config(data.seed)?;
            with_manifest(&out, &data, || file_inputs(&data), || {
                let dataset = load_dataset(&data)?;
                let bundle = pipeline::run_experiment(&dataset, &cfg, &command_line())?;
                print!("{}", pipeline::format_table(&bundle));
                finish(bundle, &out)
            })?;
        }
        Command::Sweep { data, opt, range, step, out } => {
            let cfg = opt.config(data.seed)?;
            let refs = pipeline::sweep_references(range.0, range.1, step)?;
            with_manifest(&out, &data, || file_inputs(&data), || {
                let dataset = load_dataset(&data)?;
                let rows = pipeline::run_sweep(&dataset, &cfg, &refs)?;
                print!("{}", sweep_table(&rows));
                let mut bundle = pipeline::run_experiment(&dataset, &cfg, &command_line())?;
                bundle.sweep = Some(rows);
                finish(bundle, &out)
            })?;
        }
        Command::Plotdata { input, figure, entry, out } => {
            let bundle = SolutionBundle::load(&input)?;
            let text = plot_data(&bundle, figure, entry)?;
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
        }
        Command::Baselines { data, opt, out } => {
            let cfg = opt.config(data.seed)?;
            let dataset = load_dataset(&data)?;
            let baselines = pipeline::run_baselines(&dataset, &cfg)?;
            let rows = [
                ("nernst".to_string(), &baselines.nernst),
                ("sobi".to_string(), &baselines.sobi_criterion),
            ];
            print!("{}", pipeline::format_rows(dataset.mixtures.channels(), &rows));
            if let Some(path) = out {
                let json =
                    serde_json::to_string_pretty(&baselines).map_err(|e| Error::Io(e.to_string()))?;
                std::fs::write(path, json)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
