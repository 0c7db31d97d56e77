//! Strength Pareto evolutionary optimizer over slope genotypes.
//!
//! Each generation scores the population together with the external archive,
//! rebuilds the archive by environmental selection and, unless the generation
//! budget is spent, breeds a new population from archive tournaments. Every
//! random draw comes from a single seeded stream consumed sequentially;
//! candidate evaluations (the expensive part) may run in parallel without
//! affecting the result.

mod selection;
mod variation;

pub use selection::{
    assign_fitness, default_density_k, dominates, environmental_selection, nondominated_filter,
    FitnessInfo,
};
pub use variation::{binary_tournament, blend, crossover, mutate};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{evaluate_candidate, EvalConfig, EvaluatedCandidate, NERNST_SLOPE_MV};
use crate::signal::SignalMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spea2Config {
    /// Population size `L`.
    pub population: usize,
    /// Archive size `L̃`.
    pub archive: usize,
    /// Share of offspring produced by crossover, in percent.
    pub crossover_percent: f64,
    /// Number of variation rounds `G`.
    pub generations: usize,
    /// Slope bounds in mV/decade.
    pub bounds: (f64, f64),
    /// Mutation standard deviation in mV/decade.
    pub sigma: f64,
    pub seed: u64,
    /// Nernstian reference slope in mV/decade.
    pub reference: f64,
    /// Largest covariance lag `R`.
    pub max_lag: usize,
    /// Neighbor index for the density estimate; `None` uses `round(√(L + L̃))`.
    #[serde(default)]
    pub density_k: Option<usize>,
}

impl Default for Spea2Config {
    fn default() -> Self {
        Self {
            population: 100,
            archive: 50,
            crossover_percent: 50.0,
            generations: 30,
            bounds: (10.0, 120.0),
            sigma: 3.0,
            seed: 0,
            reference: NERNST_SLOPE_MV,
            max_lag: 3,
            density_k: None,
        }
    }
}

impl Spea2Config {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.population == 0 || self.archive == 0 {
            return fail("population and archive sizes must be at least 1".into());
        }
        if !(0.0..=100.0).contains(&self.crossover_percent) {
            return fail(format!("crossover share {} not in [0, 100]", self.crossover_percent));
        }
        let (lo, hi) = self.bounds;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return fail(format!("slope bounds ({lo}, {hi}) must satisfy 0 < min <= max"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return fail(format!("mutation deviation {} must be positive", self.sigma));
        }
        if !self.reference.is_finite() {
            return fail("reference slope must be finite".into());
        }
        if self.density_k == Some(0) {
            return fail("density neighbor index must be at least 1".into());
        }
        Ok(())
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            reference: self.reference,
            max_lag: self.max_lag,
            bounds: self.bounds,
            ..EvalConfig::default()
        }
    }

    pub fn crossover_count(&self) -> usize {
        ((self.crossover_percent / 100.0 * self.population as f64).round() as usize)
            .min(self.population)
    }

    fn k(&self) -> usize {
        self.density_k
            .unwrap_or_else(|| default_density_k(self.population, self.archive))
    }
}

/// Which criteria drive dominance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveMode {
    /// Both the Nernstian similarity and the off-diagonality criterion.
    Both,
    /// Off-diagonality only; dominance reduces to scalar comparison.
    OffDiagonalOnly,
}

impl ObjectiveMode {
    fn point(self, c: &EvaluatedCandidate) -> Vec<f64> {
        match self {
            ObjectiveMode::Both => c.objectives.as_array().to_vec(),
            ObjectiveMode::OffDiagonalOnly => vec![c.objectives.j2],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub candidate: EvaluatedCandidate,
    pub fitness: FitnessInfo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub members: Vec<Individual>,
    /// Number of variation rounds completed when this archive was selected.
    pub generation: usize,
}

impl Archive {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members not dominated by any other member, under both criteria.
    pub fn front(&self) -> Vec<&Individual> {
        let pts: Vec<[f64; 2]> = self
            .members
            .iter()
            .map(|m| m.candidate.objectives.as_array())
            .collect();
        nondominated_filter(&pts)
            .into_iter()
            .map(|i| &self.members[i])
            .collect()
    }
}

fn evaluate_all(
    genotypes: Vec<Vec<f64>>,
    x: &SignalMatrix,
    eval: &EvalConfig,
    generation: usize,
) -> Result<Vec<EvaluatedCandidate>> {
    #[cfg(feature = "parallel")]
    let results: Vec<Result<EvaluatedCandidate>> = {
        use rayon::prelude::*;
        genotypes
            .par_iter()
            .map(|g| evaluate_candidate(g, x, eval))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<EvaluatedCandidate>> = genotypes
        .iter()
        .map(|g| evaluate_candidate(g, x, eval))
        .collect();

    results
        .into_iter()
        .enumerate()
        .map(|(candidate, r)| {
            r.map_err(|e| Error::Evaluation { generation, candidate, source: Box::new(e) })
        })
        .collect()
}

/// Runs the optimizer under both criteria and returns the final archive.
pub fn run_spea2(x: &SignalMatrix, cfg: &Spea2Config) -> Result<Archive> {
    run_spea2_with(x, cfg, ObjectiveMode::Both, |_| {})
}

/// Full control: choose the criteria and observe the archive after every
/// environmental selection (generation 0 is the initial population).
pub fn run_spea2_with(
    x: &SignalMatrix,
    cfg: &Spea2Config,
    mode: ObjectiveMode,
    mut observe: impl FnMut(&Archive),
) -> Result<Archive> {
    cfg.validate()?;
    let eval = cfg.eval_config();
    let n = x.channels();
    let (lo, hi) = cfg.bounds;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut genotypes: Vec<Vec<f64>> = (0..cfg.population)
        .map(|_| (0..n).map(|_| rng.random_range(lo..=hi)).collect())
        .collect();
    let mut archive = Archive { members: Vec::new(), generation: 0 };

    for generation in 0..=cfg.generations {
        let offspring = evaluate_all(std::mem::take(&mut genotypes), x, &eval, generation)?;
        let union: Vec<EvaluatedCandidate> = archive
            .members
            .drain(..)
            .map(|m| m.candidate)
            .chain(offspring)
            .collect();
        let points: Vec<Vec<f64>> = union.iter().map(|c| mode.point(c)).collect();
        let fitness = assign_fitness(&points, cfg.k());
        let keep = environmental_selection(&points, &fitness, cfg.archive);

        let mut slots: Vec<Option<EvaluatedCandidate>> = union.into_iter().map(Some).collect();
        archive = Archive {
            members: keep
                .into_iter()
                .map(|i| Individual {
                    candidate: slots[i].take().expect("selected once"),
                    fitness: fitness[i],
                })
                .collect(),
            generation,
        };
        observe(&archive);

        if generation == cfg.generations {
            break;
        }

        let fit: Vec<f64> = archive.members.iter().map(|m| m.fitness.fitness).collect();
        let genotype = |i: usize| archive.members[i].candidate.d_star.as_slice();
        let crossovers = cfg.crossover_count();
        genotypes = Vec::with_capacity(cfg.population);
        for _ in 0..crossovers {
            let a = binary_tournament(&fit, &mut rng)?;
            let b = binary_tournament(&fit, &mut rng)?;
            genotypes.push(crossover(genotype(a), genotype(b), cfg.bounds, &mut rng));
        }
        for _ in crossovers..cfg.population {
            let a = binary_tournament(&fit, &mut rng)?;
            genotypes.push(mutate(genotype(a), cfg.sigma, cfg.bounds, &mut rng));
        }
    }
    Ok(archive)
}

/// Single-criterion baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonoObjective {
    /// Slopes fixed at the reference (the exact minimizer of the first criterion).
    Nernst,
    /// Optimizer driven by the off-diagonality criterion alone.
    SobiCriterion,
}

pub fn run_mono(
    x: &SignalMatrix,
    which: MonoObjective,
    cfg: &Spea2Config,
) -> Result<EvaluatedCandidate> {
    cfg.validate()?;
    match which {
        MonoObjective::Nernst => {
            let d = vec![cfg.reference; x.channels()];
            evaluate_candidate(&d, x, &cfg.eval_config())
        }
        MonoObjective::SobiCriterion => {
            let archive = run_spea2_with(x, cfg, ObjectiveMode::OffDiagonalOnly, |_| {})?;
            let best = archive
                .members
                .into_iter()
                .reduce(|best, m| {
                    if m.candidate.objectives.j2 < best.candidate.objectives.j2 {
                        m
                    } else {
                        best
                    }
                })
                .expect("archive is never empty");
            Ok(best.candidate)
        }
    }
}
