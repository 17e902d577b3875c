//! Split/merge primitives and the fission-fusion drivers.
//!
//! [`fission_fusion`] keeps `k` fixed: every outer iteration splits one
//! suspected one-fit-many center (k+1 centers), merges one suspected
//! many-fit-one pair (back to k), and re-runs Lloyd. The loop stops at the
//! first iteration that does not strictly lower the objective and returns the
//! last improving solution.
//!
//! [`over_parameterized`] only merges (k shrinks to k*), [`under_parameterized`]
//! only splits (k grows to k*).

use crate::dataset::{sq_dist, CenterSet, Dataset};
use crate::detect::{MfoDetector, OfmDetector};
use crate::error::{Error, Result};
use crate::init::{init_kmeanspp, init_random};
use crate::kmeans::{lloyd, LloydParams, LocalSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMethod {
    /// Keep the center and add the farthest member of its Voronoi set.
    FarthestPoint,
    /// Replace the center by a seeded 2-means fit of its Voronoi set.
    Local2Means,
}

impl std::str::FromStr for SplitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "farthest_point" | "farthest" => Ok(SplitMethod::FarthestPoint),
            "local_2means" | "2means" => Ok(SplitMethod::Local2Means),
            other => Err(Error::invalid(format!("unknown split method '{other}'"))),
        }
    }
}

/// Split center `idx` into two; the result has `k + 1` centers.
///
/// With [`SplitMethod::FarthestPoint`] the existing centers are untouched and
/// the farthest member of `C_idx` (lowest point index on ties) is appended.
/// With [`SplitMethod::Local2Means`] center `idx` is overwritten by the first
/// 2-means center and the second one is appended.
pub fn split_center(
    data: &Dataset,
    solution: &LocalSolution,
    idx: usize,
    method: SplitMethod,
    seed: u64,
) -> Result<CenterSet> {
    if idx >= solution.k() {
        return Err(Error::invalid(format!(
            "split index {idx} out of range (k={})",
            solution.k()
        )));
    }
    let members = &solution.assignment.clusters[idx];
    if members.is_empty() {
        return Err(Error::Degenerate(format!(
            "cannot split empty cluster {idx}"
        )));
    }
    let mut out = solution.centers.clone();
    if method == SplitMethod::Local2Means && members.len() >= 2 {
        let sub = data.subset(members)?;
        let init = init_kmeanspp(&sub, 2, seed)?;
        let two = lloyd(&sub, &init, &LloydParams::default())?;
        out.center_mut(idx).copy_from_slice(two.centers.center(0));
        out.push(two.centers.center(1))?;
        return Ok(out);
    }
    let mut far = members[0];
    for &t in members {
        if solution.assignment.sq_dists[t] > solution.assignment.sq_dists[far] {
            far = t;
        }
    }
    out.push(data.point(far))?;
    Ok(out)
}

/// Remove centers `i` and `j` and append their midpoint; `k - 1` centers remain.
pub fn merge_centers(centers: &CenterSet, i: usize, j: usize) -> Result<CenterSet> {
    let k = centers.k();
    if i == j {
        return Err(Error::invalid(format!(
            "cannot merge center {i} with itself"
        )));
    }
    if i >= k || j >= k {
        return Err(Error::invalid(format!(
            "merge indices ({i}, {j}) out of range (k={k})"
        )));
    }
    if k < 2 {
        return Err(Error::invalid("merge needs at least two centers"));
    }
    let mid: Vec<f64> = centers
        .center(i)
        .iter()
        .zip(centers.center(j))
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let mut rest = centers.without(&[i, j]);
    rest.extend(mid);
    CenterSet::from_flat(rest, centers.dim())
}

/// Relocate empty centers onto far-away points and re-run Lloyd.
///
/// Each empty center is moved to the point with the largest distance to its
/// own center among clusters that can spare a point. Gives up with
/// [`Error::Degenerate`] when `k > n` or the repair keeps failing.
pub fn repair_degenerate(
    data: &Dataset,
    mut solution: LocalSolution,
    params: &LloydParams,
) -> Result<LocalSolution> {
    if solution.k() > data.len() {
        return Err(Error::Degenerate(format!(
            "k={} exceeds the number of points n={}",
            solution.k(),
            data.len()
        )));
    }
    for _ in 0..solution.k() {
        let empty: Vec<usize> = (0..solution.k())
            .filter(|&i| solution.assignment.clusters[i].is_empty())
            .collect();
        if empty.is_empty() {
            return Ok(solution);
        }
        let asg = &solution.assignment;
        let mut donors: Vec<usize> = (0..data.len())
            .filter(|&t| asg.clusters[asg.labels[t]].len() >= 2)
            .collect();
        // Farthest first; stable on index for equal distances.
        donors.sort_by(|&a, &b| asg.sq_dists[b].total_cmp(&asg.sq_dists[a]).then(a.cmp(&b)));
        let mut centers = solution.centers.clone();
        for (slot, &t) in empty.iter().zip(&donors) {
            centers.center_mut(*slot).copy_from_slice(data.point(t));
        }
        solution = lloyd(data, &centers, params)?;
    }
    solution.require_nonempty()?;
    Ok(solution)
}

/// Upper bound `288 · k* · Δmax² / Δmin²` on the number of outer iterations
/// in the well-separated ball-mixture regime.
pub fn outer_iteration_bound(k_star: usize, delta_min: f64, delta_max: f64) -> f64 {
    288.0 * k_star as f64 * (delta_max * delta_max) / (delta_min * delta_min)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FfkmConfig {
    pub ofm: OfmDetector,
    pub mfo: MfoDetector,
    pub split: SplitMethod,
    /// Maximum number of outer iterations `L`.
    pub max_outer_iters: usize,
    pub lloyd: LloydParams,
    /// Seed for the local 2-means split; iteration `l` uses `seed + l`.
    pub seed: u64,
}

impl Default for FfkmConfig {
    fn default() -> Self {
        Self {
            ofm: OfmDetector::Sd,
            mfo: MfoDetector::Pd,
            split: SplitMethod::FarthestPoint,
            max_outer_iters: 100,
            lloyd: LloydParams::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The candidate objective was not strictly lower.
    NonImprovement,
    IterationCap,
    /// `k = 1`: nothing to merge, Lloyd's solution is returned.
    SingleCenter,
}

/// One outer iteration of [`fission_fusion`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OuterStep {
    /// `G^(l)` of the solution the step started from.
    pub objective: f64,
    /// `G^(l+1)` of the candidate after split, merge and Lloyd.
    pub candidate_objective: f64,
    pub split: usize,
    /// Merged pair, indexed in the split (k+1) center set.
    pub merged: (usize, usize),
    /// Number of centers between the split and the merge.
    pub k_expanded: usize,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FfkmTrace {
    /// Objective `G^(1)` of the first Lloyd solution.
    pub lloyd_objective: f64,
    pub steps: Vec<OuterStep>,
    pub terminated: Termination,
}

impl FfkmTrace {
    /// Number of accepted outer iterations.
    pub fn accepted(&self) -> usize {
        self.steps.iter().filter(|s| s.accepted).count()
    }
}

/// Fission-fusion k-means from `init` (which fixes `k`).
pub fn fission_fusion(
    data: &Dataset,
    init: &CenterSet,
    config: &FfkmConfig,
) -> Result<(LocalSolution, FfkmTrace)> {
    if config.max_outer_iters == 0 {
        return Err(Error::invalid("max_outer_iters must be at least 1"));
    }
    let k = init.k();
    let first = lloyd(data, init, &config.lloyd)?;
    let mut current = repair_degenerate(data, first, &config.lloyd)?;
    let mut trace = FfkmTrace {
        lloyd_objective: current.objective,
        steps: Vec::new(),
        terminated: Termination::IterationCap,
    };
    if k == 1 {
        trace.terminated = Termination::SingleCenter;
        return Ok((current, trace));
    }

    for l in 1..=config.max_outer_iters {
        let split_idx = config.ofm.select(&current)?;
        let split = split_center(
            data,
            &current,
            split_idx,
            config.split,
            config.seed.wrapping_add(l as u64),
        )?;
        let merged = if k >= 3 {
            // Detected on the pre-split solution, away from the split center.
            // Split centers keep the original indices, so the pair is valid in `split` too.
            config
                .mfo
                .select_excluding(data, &current, Some(split_idx))?
        } else {
            merge_pair_for_two(data, &split, split_idx, config)?
        };
        let fused = merge_centers(&split, merged.0, merged.1)?;
        debug_assert_eq!(fused.k(), k);
        let candidate = lloyd(data, &fused, &config.lloyd)?;
        let candidate = repair_degenerate(data, candidate, &config.lloyd)?;
        let accepted = candidate.objective < current.objective;
        trace.steps.push(OuterStep {
            objective: current.objective,
            candidate_objective: candidate.objective,
            split: split_idx,
            merged,
            k_expanded: split.k(),
            accepted,
        });
        if !accepted {
            trace.terminated = Termination::NonImprovement;
            return Ok((current, trace));
        }
        current = candidate;
    }
    Ok((current, trace))
}

/// With `k = 2` no pair avoids the split center, so the merge is chosen in the
/// three-center split set among the pairs that do not re-join the two halves.
fn merge_pair_for_two(
    data: &Dataset,
    split: &CenterSet,
    split_idx: usize,
    config: &FfkmConfig,
) -> Result<(usize, usize)> {
    let other = 1 - split_idx;
    let halves = [split_idx, 2];
    match config.mfo {
        MfoDetector::Pd => {
            let d: Vec<f64> = halves
                .iter()
                .map(|&h| sq_dist(split.center(other), split.center(h)))
                .collect();
            let h = if d[1] < d[0] { halves[1] } else { halves[0] };
            Ok((other.min(h), other.max(h)))
        }
        MfoDetector::Oi => {
            let sol = LocalSolution::evaluate(data, split.clone(), config.lloyd.min_pts)?;
            let g = crate::detect::removal_objectives(data, &sol)?;
            let h = if g[halves[1]] < g[halves[0]] {
                halves[1]
            } else {
                halves[0]
            };
            Ok((other.min(h), other.max(h)))
        }
    }
}

fn check_k_star(data: &Dataset, k_star: usize) -> Result<()> {
    if k_star == 0 {
        return Err(Error::invalid("k_star must be at least 1"));
    }
    if k_star > data.len() {
        return Err(Error::Degenerate(format!(
            "k_star={k_star} exceeds the number of points n={}",
            data.len()
        )));
    }
    Ok(())
}

/// Merge-only variant: start with more centers than `k_star` and merge the
/// detected many-fit-one pair into its midpoint until `k_star` remain.
///
/// Empty clusters are dropped before detection; each drop counts as one
/// reduction of `k`.
pub fn over_parameterized_from(
    data: &Dataset,
    init: &CenterSet,
    k_star: usize,
    mfo: MfoDetector,
    params: &LloydParams,
) -> Result<LocalSolution> {
    check_k_star(data, k_star)?;
    if init.k() <= k_star {
        return Err(Error::invalid(format!(
            "over-parameterized run needs k_init > k_star (got {} <= {k_star})",
            init.k()
        )));
    }
    let mut sol = lloyd(data, init, params)?;
    while sol.k() > k_star {
        let centers = match sol.assignment.clusters.iter().position(Vec::is_empty) {
            Some(empty) => CenterSet::from_flat(sol.centers.without(&[empty]), data.dim())?,
            None => {
                let (i, j) = mfo.select(data, &sol)?;
                merge_centers(&sol.centers, i, j)?
            }
        };
        sol = lloyd(data, &centers, params)?;
    }
    repair_degenerate(data, sol, params)
}

/// [`over_parameterized_from`] with `k_init` centers sampled uniformly from the data.
pub fn over_parameterized(
    data: &Dataset,
    k_init: usize,
    k_star: usize,
    mfo: MfoDetector,
    seed: u64,
    params: &LloydParams,
) -> Result<LocalSolution> {
    let init = init_random(data, k_init, seed)?;
    over_parameterized_from(data, &init, k_star, mfo, params)
}

/// Split-only variant: start with fewer centers than `k_star` and split the
/// detected one-fit-many cluster until `k_star` centers remain.
pub fn under_parameterized_from(
    data: &Dataset,
    init: &CenterSet,
    k_star: usize,
    ofm: OfmDetector,
    split: SplitMethod,
    seed: u64,
    params: &LloydParams,
) -> Result<LocalSolution> {
    check_k_star(data, k_star)?;
    if init.k() > k_star {
        return Err(Error::invalid(format!(
            "under-parameterized run needs k_init <= k_star (got {} > {k_star})",
            init.k()
        )));
    }
    let mut sol = repair_degenerate(data, lloyd(data, init, params)?, params)?;
    let mut step = 0u64;
    while sol.k() < k_star {
        step += 1;
        let idx = ofm.select(&sol)?;
        let centers = split_center(data, &sol, idx, split, seed.wrapping_add(step))?;
        sol = repair_degenerate(data, lloyd(data, &centers, params)?, params)?;
    }
    Ok(sol)
}

/// [`under_parameterized_from`] with `k_init` centers sampled uniformly from the data.
pub fn under_parameterized(
    data: &Dataset,
    k_init: usize,
    k_star: usize,
    ofm: OfmDetector,
    split: SplitMethod,
    seed: u64,
    params: &LloydParams,
) -> Result<LocalSolution> {
    let init = init_random(data, k_init, seed)?;
    under_parameterized_from(data, &init, k_star, ofm, split, seed, params)
}
