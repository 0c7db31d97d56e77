//! Dominance, strength/density fitness and archive truncation.
//!
//! All routines work on objective points (minimization) addressed by their
//! index in the input slice, so they are independent of what a point encodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `p` dominates `q` when it is no worse in every objective and better in one.
pub fn dominates(p: &[f64], q: &[f64]) -> Result<bool> {
    if p.len() != q.len() {
        return Err(Error::Dimension(format!(
            "comparing {}-objective and {}-objective points",
            p.len(),
            q.len()
        )));
    }
    Ok(dominates_unchecked(p, q))
}

pub(crate) fn dominates_unchecked(p: &[f64], q: &[f64]) -> bool {
    let mut strictly_better = false;
    for (a, b) in p.iter().zip(q) {
        if a > b {
            return false;
        }
        if a < b {
            strictly_better = true;
        }
    }
    strictly_better
}

/// Indices of the points not dominated by any other point. Duplicates of a
/// non-dominated point are all kept.
pub fn nondominated_filter<P: AsRef<[f64]>>(points: &[P]) -> Vec<usize> {
    // sweep in lexicographic order: a point can only be dominated by one sorted before it
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(points[a].as_ref(), points[b].as_ref()));
    let mut front: Vec<usize> = Vec::new();
    for &i in &order {
        let p = points[i].as_ref();
        if !front.iter().any(|&f| dominates_unchecked(points[f].as_ref(), p)) {
            front.push(i);
        }
    }
    front.sort_unstable();
    front
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessInfo {
    /// Number of points this one dominates.
    pub strength: usize,
    /// Sum of the strengths of the points dominating this one; zero iff non-dominated.
    pub raw: usize,
    /// `1 / (σ_k + 2)`, in `(0, 0.5]`.
    pub density: f64,
    pub fitness: f64,
}

/// Default neighbor index for the density estimate, `round(√(L + L̃))`.
pub fn default_density_k(population: usize, archive: usize) -> usize {
    ((population + archive) as f64).sqrt().round() as usize
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Strength-based fitness (smaller is better). `k` is clamped to `[1, n − 1]`;
/// a lone point gets density `1/2`.
pub fn assign_fitness<P: AsRef<[f64]>>(points: &[P], k: usize) -> Vec<FitnessInfo> {
    let n = points.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut strength = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dominates_unchecked(points[i].as_ref(), points[j].as_ref()) {
                strength[i] += 1;
                dominated_by[j].push(i);
            }
        }
    }
    let k = k.clamp(1, n.saturating_sub(1).max(1));
    (0..n)
        .map(|i| {
            let raw = dominated_by[i].iter().map(|&j| strength[j]).sum();
            let mut dists: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| distance(points[i].as_ref(), points[j].as_ref()))
                .collect();
            let sigma_k = if dists.is_empty() {
                0.0
            } else {
                dists.sort_by(f64::total_cmp);
                dists[k - 1]
            };
            let density = 1.0 / (sigma_k + 2.0);
            FitnessInfo { strength: strength[i], raw, density, fitness: raw as f64 + density }
        })
        .collect()
}

/// Picks the next archive (indices into `points`).
///
/// Non-dominated points are kept; a shortfall is filled with the best
/// dominated points by fitness, an excess is truncated by repeatedly removing
/// the point closest to its neighbors (comparing sorted neighbor-distance
/// vectors lexicographically, then lowest index).
pub fn environmental_selection<P: AsRef<[f64]>>(
    points: &[P],
    fitness: &[FitnessInfo],
    capacity: usize,
) -> Vec<usize> {
    assert_eq!(points.len(), fitness.len(), "one fitness record per point");
    let capacity = capacity.min(points.len());
    let mut chosen: Vec<usize> = (0..points.len()).filter(|&i| fitness[i].raw == 0).collect();

    if chosen.len() < capacity {
        let mut rest: Vec<usize> = (0..points.len()).filter(|&i| fitness[i].raw != 0).collect();
        rest.sort_by(|&a, &b| fitness[a].fitness.total_cmp(&fitness[b].fitness).then(a.cmp(&b)));
        chosen.extend(rest.into_iter().take(capacity - chosen.len()));
    } else if chosen.len() > capacity {
        chosen = truncate(points, chosen, capacity);
    }
    chosen
}

fn truncate<P: AsRef<[f64]>>(points: &[P], members: Vec<usize>, capacity: usize) -> Vec<usize> {
    // neighbors[a]: (distance, member) for every other live member, nearest first
    let mut neighbors: Vec<Vec<(f64, usize)>> = members
        .iter()
        .map(|&a| {
            let mut v: Vec<(f64, usize)> = members
                .iter()
                .filter(|&&b| b != a)
                .map(|&b| (distance(points[a].as_ref(), points[b].as_ref()), b))
                .collect();
            v.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            v
        })
        .collect();
    let mut alive: Vec<bool> = vec![true; members.len()];
    let mut remaining = members.len();

    while remaining > capacity {
        let mut victim: Option<usize> = None;
        for slot in (0..members.len()).filter(|&s| alive[s]) {
            let better = match victim {
                None => true,
                Some(v) => {
                    compare_distances(&neighbors[slot], &neighbors[v]) == std::cmp::Ordering::Less
                }
            };
            if better {
                victim = Some(slot);
            }
        }
        let v = victim.expect("live member");
        alive[v] = false;
        remaining -= 1;
        let removed = members[v];
        for slot in (0..members.len()).filter(|&s| alive[s]) {
            if let Some(pos) = neighbors[slot].iter().position(|e| e.1 == removed) {
                neighbors[slot].remove(pos);
            }
        }
    }
    members
        .into_iter()
        .zip(alive)
        .filter_map(|(m, keep)| keep.then_some(m))
        .collect()
}

fn compare_distances(a: &[(f64, usize)], b: &[(f64, usize)]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.0.total_cmp(&y.0))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}
