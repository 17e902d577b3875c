//! Evaluation metrics: centroid index, success rate, average missing rate,
//! objective ratio and SSE.

use serde::{Deserialize, Serialize};

use crate::dataset::{sq_dist, CenterSet, Dataset};
use crate::error::{Error, Result};
use crate::kmeans::objective;

/// Number of true centers that are not the nearest true center of any fitted
/// center. Zero means every true cluster was found.
pub fn centroid_index(fitted: &CenterSet, truth: &CenterSet) -> Result<usize> {
    if fitted.dim() != truth.dim() {
        return Err(Error::DimensionMismatch {
            expected: truth.dim(),
            got: fitted.dim(),
        });
    }
    let mut hit = vec![false; truth.k()];
    for f in fitted.centers() {
        let mut best = (0, f64::INFINITY);
        for (s, t) in truth.centers().enumerate() {
            let d = sq_dist(f, t);
            if d < best.1 {
                best = (s, d);
            }
        }
        hit[best.0] = true;
    }
    Ok(hit.iter().filter(|&&h| !h).count())
}

/// Percentage of trials with zero centroid index.
pub fn success_rate(cis: &[usize]) -> Result<f64> {
    if cis.is_empty() {
        return Err(Error::invalid("success rate of zero trials"));
    }
    Ok(100.0 * cis.iter().filter(|&&c| c == 0).count() as f64 / cis.len() as f64)
}

/// Mean centroid index divided by the number of true clusters.
pub fn amr(cis: &[usize], k_star: usize) -> Result<f64> {
    if cis.is_empty() {
        return Err(Error::invalid("missing rate of zero trials"));
    }
    if k_star == 0 {
        return Err(Error::invalid("k_star must be at least 1"));
    }
    Ok(cis.iter().sum::<usize>() as f64 / cis.len() as f64 / k_star as f64)
}

pub fn rho_ratio(objective: f64, reference: f64) -> Result<f64> {
    if reference.is_nan() || reference <= 0.0 {
        return Err(Error::invalid(format!(
            "reference objective must be positive, got {reference}"
        )));
    }
    Ok(objective / reference)
}

/// Sum of squared errors, `n · G_n`.
pub fn sse(data: &Dataset, centers: &CenterSet) -> Result<f64> {
    Ok(data.len() as f64 * objective(data, centers)?)
}

/// Metrics for one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub ci: usize,
    pub objective: f64,
    pub sse: f64,
    pub rho: f64,
    pub outer_iters: usize,
    pub wall_time: f64,
}

/// Aggregates over the successful trials of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub sr: f64,
    pub amr: f64,
    pub rho_mean: f64,
    /// Population standard deviation.
    pub rho_std: f64,
    pub trials: usize,
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn aggregate(reports: &[TrialReport], k_star: usize) -> Result<AggregateReport> {
    let cis: Vec<usize> = reports.iter().map(|r| r.ci).collect();
    let rhos: Vec<f64> = reports.iter().map(|r| r.rho).collect();
    let (rho_mean, rho_std) = mean_std(&rhos);
    Ok(AggregateReport {
        sr: success_rate(&cis)?,
        amr: amr(&cis, k_star)?,
        rho_mean,
        rho_std,
        trials: reports.len(),
    })
}
