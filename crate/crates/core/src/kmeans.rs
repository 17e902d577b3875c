//! The empirical k-means objective and Lloyd's algorithm.
//!
//! The objective is normalized by the number of points,
//!
//! ```text
//! G_n(β) = (1/n) Σ_t min_s ‖x_t − β_s‖²
//! ```
//!
//! so the sum of squared errors reported by the harness is `n · G_n`.

use rayon::prelude::*;

use crate::dataset::{sq_dist, CenterSet, Dataset};
use crate::error::{Error, Result};

/// Point counts above which assignment is spread over the rayon pool.
const PAR_ASSIGN_MIN_WORK: usize = 1 << 16;

/// Stopping rule and degeneracy threshold for [`lloyd`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LloydParams {
    pub max_iter: usize,
    /// Stop once the relative objective decrease of one step falls below this.
    pub tol: f64,
    /// Clusters with fewer points than this are flagged degenerate.
    pub min_pts: usize,
}

impl Default for LloydParams {
    fn default() -> Self {
        Self {
            max_iter: 300,
            tol: 1e-10,
            min_pts: 1,
        }
    }
}

/// Nearest-center labels together with the Voronoi sets they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub labels: Vec<usize>,
    /// `clusters[i]` lists the point indices of `C_i` in increasing order.
    pub clusters: Vec<Vec<usize>>,
    /// Squared distance of every point to its assigned center.
    pub sq_dists: Vec<f64>,
}

impl Assignment {
    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }

    /// `(1/n) Σ_t ‖x_t − β_{label(t)}‖²`.
    pub fn objective(&self) -> f64 {
        self.sq_dists.iter().sum::<f64>() / self.sq_dists.len() as f64
    }

    /// Within-cluster sum of squared distances, one entry per center.
    pub fn cluster_sse(&self) -> Vec<f64> {
        self.clusters
            .iter()
            .map(|members| members.iter().map(|&t| self.sq_dists[t]).sum())
            .collect()
    }
}

/// Index and squared distance of the nearest center; ties go to the lowest index.
#[inline]
pub fn nearest(point: &[f64], centers: &CenterSet) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.centers().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn check(data: &Dataset, centers: &CenterSet) -> Result<()> {
    centers.check_compatible(data)?;
    if data.is_empty() {
        return Err(Error::invalid("empty dataset"));
    }
    Ok(())
}

/// Assign every point to its nearest center.
pub fn assign(data: &Dataset, centers: &CenterSet) -> Result<Assignment> {
    check(data, centers)?;
    let nearest_all: Vec<(usize, f64)> = if data.len() * centers.k() >= PAR_ASSIGN_MIN_WORK {
        (0..data.len())
            .into_par_iter()
            .map(|t| nearest(data.point(t), centers))
            .collect()
    } else {
        data.points().map(|p| nearest(p, centers)).collect()
    };
    let mut clusters = vec![Vec::new(); centers.k()];
    let mut labels = Vec::with_capacity(data.len());
    let mut sq_dists = Vec::with_capacity(data.len());
    for (t, (label, d)) in nearest_all.into_iter().enumerate() {
        clusters[label].push(t);
        labels.push(label);
        sq_dists.push(d);
    }
    Ok(Assignment {
        labels,
        clusters,
        sq_dists,
    })
}

/// Empirical k-means objective `G_n`.
pub fn objective(data: &Dataset, centers: &CenterSet) -> Result<f64> {
    Ok(assign(data, centers)?.objective())
}

/// Move every center to the mean of its Voronoi set; centers with an empty
/// set keep their previous position.
pub fn update_centers(
    data: &Dataset,
    assignment: &Assignment,
    previous: &CenterSet,
) -> Result<CenterSet> {
    previous.check_compatible(data)?;
    if assignment.labels.len() != data.len() || assignment.k() != previous.k() {
        return Err(Error::invalid("assignment does not match dataset/centers"));
    }
    let dim = data.dim();
    let mut next = previous.clone();
    for (i, members) in assignment.clusters.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let mut acc = vec![0.0; dim];
        for &t in members {
            for (a, x) in acc.iter_mut().zip(data.point(t)) {
                *a += x;
            }
        }
        let inv = 1.0 / members.len() as f64;
        for (c, a) in next.center_mut(i).iter_mut().zip(acc) {
            *c = a * inv;
        }
    }
    Ok(next)
}

/// A converged (or iteration-capped) Lloyd solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSolution {
    pub centers: CenterSet,
    /// Assignment of the data to `centers`.
    pub assignment: Assignment,
    pub objective: f64,
    pub iterations: usize,
    /// `degenerate[i]` is set when `|C_i| < min_pts`.
    pub degenerate: Vec<bool>,
}

impl LocalSolution {
    /// Wrap arbitrary centers as a solution (no Lloyd steps taken).
    pub fn evaluate(data: &Dataset, centers: CenterSet, min_pts: usize) -> Result<Self> {
        let assignment = assign(data, &centers)?;
        Ok(Self::from_parts(centers, assignment, 0, min_pts))
    }

    fn from_parts(
        centers: CenterSet,
        assignment: Assignment,
        iterations: usize,
        min_pts: usize,
    ) -> Self {
        let degenerate = assignment
            .clusters
            .iter()
            .map(|c| c.len() < min_pts)
            .collect();
        Self {
            objective: assignment.objective(),
            centers,
            assignment,
            iterations,
            degenerate,
        }
    }

    pub fn k(&self) -> usize {
        self.centers.k()
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate.iter().any(|&d| d)
    }

    /// Error unless every Voronoi set is non-empty.
    pub fn require_nonempty(&self) -> Result<()> {
        match self.assignment.clusters.iter().position(Vec::is_empty) {
            Some(i) => Err(Error::Degenerate(format!("cluster {i} is empty"))),
            None => Ok(()),
        }
    }
}

/// Lloyd's algorithm from `init`.
///
/// Alternates assignment and mean updates until the labels stop changing,
/// the relative objective decrease drops below `params.tol`, or
/// `params.max_iter` updates have been made. Empty clusters keep their
/// center and are reported through [`LocalSolution::degenerate`].
pub fn lloyd(data: &Dataset, init: &CenterSet, params: &LloydParams) -> Result<LocalSolution> {
    if params.max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    if params.tol.is_nan() || params.tol < 0.0 {
        return Err(Error::invalid("tol must be non-negative"));
    }
    let mut centers = init.clone();
    let mut asg = assign(data, &centers)?;
    let mut obj = asg.objective();
    let mut iterations = 0;
    while iterations < params.max_iter {
        iterations += 1;
        let next_centers = update_centers(data, &asg, &centers)?;
        let next_asg = assign(data, &next_centers)?;
        let next_obj = next_asg.objective();
        debug_assert!(
            next_obj <= obj * (1.0 + 1e-12) + 1e-300,
            "Lloyd step increased the objective: {obj} -> {next_obj}"
        );
        let unchanged = next_asg.labels == asg.labels;
        let decrease = if obj > 0.0 {
            (obj - next_obj) / obj
        } else {
            0.0
        };
        centers = next_centers;
        asg = next_asg;
        obj = next_obj;
        if unchanged || decrease < params.tol {
            break;
        }
    }
    Ok(LocalSolution::from_parts(
        centers,
        asg,
        iterations,
        params.min_pts,
    ))
}
