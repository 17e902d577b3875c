//! Detection of mis-specified associations in a local solution.
//!
//! One-fit-many detectors return the index of a fitted cluster that probably
//! covers several true clusters:
//! - standard deviation (SD): largest mean squared distance to the center,
//! - total deviation (TD): largest within-cluster sum of squares,
//! - ε-radius (RD): smallest fraction of members inside a small ball around
//!   the center, with the radius adapted to the data.
//!
//! Many-fit-one detectors return a pair of fitted clusters that probably share
//! one true cluster:
//! - pairwise distance (PD): the two closest centers,
//! - objective increment (OI): the center whose removal raises the objective
//!   least, paired with its nearest remaining center.
//!
//! All selections break ties towards the lowest index (lexicographically
//! smallest pair).

use crate::dataset::{sq_dist, Dataset};
use crate::error::{Error, Result};
use crate::kmeans::LocalSolution;

/// Per-candidate scores and the winning candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionScores<T> {
    pub scores: Vec<f64>,
    pub selected: T,
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn argmin_filtered(scores: &[f64], skip: &[usize]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        if best.is_none_or(|b| s < scores[b]) {
            best = Some(i);
        }
    }
    best
}

/// `σ_i² = (1/|C_i|) Σ_{x∈C_i} ‖x − β_i‖²` for every cluster.
pub fn sd_scores(solution: &LocalSolution) -> Result<DetectionScores<usize>> {
    solution.require_nonempty()?;
    let scores: Vec<f64> = solution
        .assignment
        .cluster_sse()
        .into_iter()
        .zip(&solution.assignment.clusters)
        .map(|(v, members)| v / members.len() as f64)
        .collect();
    Ok(DetectionScores {
        selected: argmax(&scores),
        scores,
    })
}

/// `v_i² = Σ_{x∈C_i} ‖x − β_i‖²` for every cluster.
pub fn td_scores(solution: &LocalSolution) -> Result<DetectionScores<usize>> {
    solution.require_nonempty()?;
    let scores = solution.assignment.cluster_sse();
    Ok(DetectionScores {
        selected: argmax(&scores),
        scores,
    })
}

pub fn detect_ofm_sd(solution: &LocalSolution) -> Result<usize> {
    Ok(sd_scores(solution)?.selected)
}

pub fn detect_ofm_td(solution: &LocalSolution) -> Result<usize> {
    Ok(td_scores(solution)?.selected)
}

/// Scores of the ε-radius detector.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusScores {
    /// Smallest per-cluster median distance to the center.
    pub base_radius: f64,
    /// `delta · base_radius`.
    pub epsilon: f64,
    /// Fraction `p_i` of `C_i` within `epsilon` of `β_i`.
    pub ratios: Vec<f64>,
    pub selected: usize,
}

fn median_sorted(v: &[f64]) -> f64 {
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub fn radius_scores(solution: &LocalSolution, delta: f64) -> Result<RadiusScores> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!(
            "radius delta must be positive, got {delta}"
        )));
    }
    solution.require_nonempty()?;
    let asg = &solution.assignment;
    let dists: Vec<Vec<f64>> = asg
        .clusters
        .iter()
        .map(|members| {
            let mut d: Vec<f64> = members.iter().map(|&t| asg.sq_dists[t].sqrt()).collect();
            d.sort_by(f64::total_cmp);
            d
        })
        .collect();
    let base_radius = dists
        .iter()
        .map(|d| median_sorted(d))
        .fold(f64::INFINITY, f64::min);
    let epsilon = delta * base_radius;
    let ratios: Vec<f64> = dists
        .iter()
        .map(|d| d.partition_point(|&x| x <= epsilon) as f64 / d.len() as f64)
        .collect();
    let selected = argmin_filtered(&ratios, &[]).expect("k >= 1");
    Ok(RadiusScores {
        base_radius,
        epsilon,
        ratios,
        selected,
    })
}

pub fn detect_ofm_radius(solution: &LocalSolution, delta: f64) -> Result<usize> {
    Ok(radius_scores(solution, delta)?.selected)
}

fn require_pair(k: usize, excluded: usize) -> Result<()> {
    if k < 2 + excluded {
        return Err(Error::invalid(format!(
            "many-fit-one detection needs at least two eligible centers (k={k})"
        )));
    }
    Ok(())
}

/// Unordered center pairs `(i, j)`, `i < j`, with their distances, in
/// lexicographic order.
pub fn pair_distances(solution: &LocalSolution) -> Vec<((usize, usize), f64)> {
    let c = &solution.centers;
    let mut out = Vec::with_capacity(c.k() * c.k().saturating_sub(1) / 2);
    for i in 0..c.k() {
        for j in i + 1..c.k() {
            out.push(((i, j), sq_dist(c.center(i), c.center(j)).sqrt()));
        }
    }
    out
}

fn closest_pair(solution: &LocalSolution, exclude: Option<usize>) -> Result<(usize, usize)> {
    require_pair(solution.k(), usize::from(exclude.is_some()))?;
    let mut best: Option<((usize, usize), f64)> = None;
    for ((i, j), d) in pair_distances(solution) {
        if exclude.is_some_and(|e| e == i || e == j) {
            continue;
        }
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some(((i, j), d));
        }
    }
    Ok(best.expect("at least one eligible pair").0)
}

/// Closest pair of centers.
pub fn detect_mfo_pd(solution: &LocalSolution) -> Result<(usize, usize)> {
    closest_pair(solution, None)
}

/// `G_i`: objective of the solution with center `i` removed, for every `i`.
///
/// Only the members of `C_i` move, each to its second-nearest center.
pub fn removal_objectives(data: &Dataset, solution: &LocalSolution) -> Result<Vec<f64>> {
    let k = solution.k();
    require_pair(k, 0)?;
    solution.centers.check_compatible(data)?;
    let asg = &solution.assignment;
    if asg.labels.len() != data.len() {
        return Err(Error::invalid(
            "solution assignment does not match the dataset",
        ));
    }
    let sse = asg.cluster_sse();
    let n = data.len() as f64;
    let out = (0..k)
        .map(|i| {
            let moved: f64 = asg.clusters[i]
                .iter()
                .map(|&t| {
                    let p = data.point(t);
                    solution
                        .centers
                        .centers()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, c)| sq_dist(p, c))
                        .fold(f64::INFINITY, f64::min)
                })
                .sum();
            let kept: f64 = sse
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, s)| s)
                .sum();
            (kept + moved) / n
        })
        .collect();
    Ok(out)
}

fn objective_increment(
    data: &Dataset,
    solution: &LocalSolution,
    exclude: Option<usize>,
) -> Result<(usize, usize)> {
    require_pair(solution.k(), usize::from(exclude.is_some()))?;
    let g = removal_objectives(data, solution)?;
    let skip: Vec<usize> = exclude.into_iter().collect();
    let removed = argmin_filtered(&g, &skip).expect("eligible center");
    let c = &solution.centers;
    let dists: Vec<f64> = c.centers().map(|b| sq_dist(b, c.center(removed))).collect();
    let mut skip = skip;
    skip.push(removed);
    let partner = argmin_filtered(&dists, &skip).expect("eligible partner");
    Ok((removed, partner))
}

/// `(i*, j*)` with `i*` the removed center and `j*` its nearest survivor.
pub fn detect_mfo_oi(data: &Dataset, solution: &LocalSolution) -> Result<(usize, usize)> {
    objective_increment(data, solution, None)
}

/// One-fit-many detector selection.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OfmDetector {
    Sd,
    Td,
    #[serde(rename = "rd")]
    Radius {
        delta: f64,
    },
}

impl OfmDetector {
    pub const DEFAULT_RADIUS_DELTA: f64 = 0.1;

    pub fn select(&self, solution: &LocalSolution) -> Result<usize> {
        match *self {
            OfmDetector::Sd => detect_ofm_sd(solution),
            OfmDetector::Td => detect_ofm_td(solution),
            OfmDetector::Radius { delta } => detect_ofm_radius(solution, delta),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OfmDetector::Sd => "SD",
            OfmDetector::Td => "TD",
            OfmDetector::Radius { .. } => "RD",
        }
    }

    /// Parse `sd`, `td` or `rd`; `delta` is used by `rd` only.
    pub fn parse(name: &str, delta: f64) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "sd" => Ok(OfmDetector::Sd),
            "td" => Ok(OfmDetector::Td),
            "rd" => Ok(OfmDetector::Radius { delta }),
            other => Err(Error::invalid(format!(
                "unknown one-fit-many detector '{other}'"
            ))),
        }
    }
}

/// Many-fit-one detector selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MfoDetector {
    Pd,
    Oi,
}

impl MfoDetector {
    pub fn select(&self, data: &Dataset, solution: &LocalSolution) -> Result<(usize, usize)> {
        self.select_excluding(data, solution, None)
    }

    /// Like [`select`](Self::select) but never returns a pair containing
    /// `exclude`; the detector's next-best candidate is taken instead.
    pub fn select_excluding(
        &self,
        data: &Dataset,
        solution: &LocalSolution,
        exclude: Option<usize>,
    ) -> Result<(usize, usize)> {
        match self {
            MfoDetector::Pd => closest_pair(solution, exclude),
            MfoDetector::Oi => objective_increment(data, solution, exclude),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MfoDetector::Pd => "PD",
            MfoDetector::Oi => "OI",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "pd" => Ok(MfoDetector::Pd),
            "oi" => Ok(MfoDetector::Oi),
            other => Err(Error::invalid(format!(
                "unknown many-fit-one detector '{other}'"
            ))),
        }
    }
}
