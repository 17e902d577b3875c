//! Seeded multi-trial experiment runner.
//!
//! Trial `t` of every variant uses seed `base_seed + t`, so trials are
//! independent of each other and of the thread pool. The objective ratio of
//! a trial is taken against a reference objective: Lloyd started at the
//! ground-truth centers, lowered to the best objective any trial of the same
//! experiment reached.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::io::{load_points, load_truth};
use super::table::ResultRow;
use crate::dataset::{CenterSet, Dataset};
use crate::detect::{MfoDetector, OfmDetector};
use crate::error::{Error, Result};
use crate::eval::{self, TrialReport};
use crate::ffkm::{
    fission_fusion, over_parameterized_from, under_parameterized_from, FfkmConfig, SplitMethod,
};
use crate::init::InitMethod;
use crate::kmeans::{lloyd, LloydParams};
use crate::synth::GeneratorSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    File {
        points: PathBuf,
        truth: PathBuf,
        labeled: bool,
    },
    /// Generator spec string, see [`GeneratorSpec`].
    Generate(String),
}

/// A dataset ready for experiments.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub name: String,
    pub data: Dataset,
    pub truth: CenterSet,
}

impl DataSource {
    pub fn load(&self) -> Result<LoadedData> {
        match self {
            DataSource::File {
                points,
                truth,
                labeled,
            } => {
                let data = load_points(points, *labeled)?;
                let truth = load_truth(truth)?;
                let name = points
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("data")
                    .to_string();
                Ok(LoadedData { name, data, truth })
            }
            DataSource::Generate(spec) => {
                let g = spec.parse::<GeneratorSpec>()?.generate()?;
                Ok(LoadedData {
                    name: g.name,
                    data: g.data,
                    truth: g.truth,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lloyd,
    Ffkm,
    Opkm,
    Upkm,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lloyd" => Ok(Algorithm::Lloyd),
            "ffkm" => Ok(Algorithm::Ffkm),
            "opkm" => Ok(Algorithm::Opkm),
            "upkm" => Ok(Algorithm::Upkm),
            other => Err(Error::invalid(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// One algorithm configuration evaluated over all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub algorithm: Algorithm,
    pub init: InitMethod,
    pub ofm: OfmDetector,
    pub mfo: MfoDetector,
    pub split: SplitMethod,
    /// Starting number of centers for `opkm` (default 4k*) and `upkm` (default 2).
    pub k_init: Option<usize>,
    pub max_outer_iters: usize,
}

impl Variant {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            init: InitMethod::Random,
            ofm: OfmDetector::Sd,
            mfo: MfoDetector::Pd,
            split: SplitMethod::FarthestPoint,
            k_init: None,
            max_outer_iters: FfkmConfig::default().max_outer_iters,
        }
    }

    pub fn lloyd(init: InitMethod) -> Self {
        Self {
            init,
            ..Self::new(Algorithm::Lloyd)
        }
    }

    pub fn ffkm(ofm: OfmDetector, mfo: MfoDetector) -> Self {
        Self {
            ofm,
            mfo,
            ..Self::new(Algorithm::Ffkm)
        }
    }

    pub fn opkm(mfo: MfoDetector, k_init: Option<usize>) -> Self {
        Self {
            mfo,
            k_init,
            ..Self::new(Algorithm::Opkm)
        }
    }

    pub fn upkm(ofm: OfmDetector, k_init: Option<usize>) -> Self {
        Self {
            ofm,
            k_init,
            ..Self::new(Algorithm::Upkm)
        }
    }

    fn k_init_for(&self, k_star: usize) -> usize {
        match self.algorithm {
            Algorithm::Opkm => self.k_init.unwrap_or(4 * k_star),
            Algorithm::Upkm => self.k_init.unwrap_or(2.min(k_star)),
            _ => k_star,
        }
    }

    /// Row label such as `lloyd(random)`, `ffkm(SD+PD)` or `upkm(SD k0=2)`.
    pub fn label(&self, k_star: usize) -> String {
        let init = match self.init {
            InitMethod::Random => "",
            InitMethod::KMeansPlusPlus => " kmeans++",
        };
        let split = match self.split {
            SplitMethod::FarthestPoint => "",
            SplitMethod::Local2Means => " 2means",
        };
        let rd = match self.ofm {
            OfmDetector::Radius { delta } if delta != OfmDetector::DEFAULT_RADIUS_DELTA => {
                format!(" delta={delta}")
            }
            _ => String::new(),
        };
        match self.algorithm {
            Algorithm::Lloyd => match self.init {
                InitMethod::Random => "lloyd(random)".into(),
                InitMethod::KMeansPlusPlus => "lloyd(kmeans++)".into(),
            },
            Algorithm::Ffkm => {
                format!(
                    "ffkm({}+{}{rd}{split}{init})",
                    self.ofm.name(),
                    self.mfo.name()
                )
            }
            Algorithm::Opkm => {
                format!(
                    "opkm({} k0={}{init})",
                    self.mfo.name(),
                    self.k_init_for(k_star)
                )
            }
            Algorithm::Upkm => format!(
                "upkm({}{rd} k0={}{split}{init})",
                self.ofm.name(),
                self.k_init_for(k_star)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub variants: Vec<Variant>,
    /// Fitted clusters for `lloyd`/`ffkm`; defaults to `k_star`.
    pub k: Option<usize>,
    /// True number of clusters; defaults to the number of truth centers.
    pub k_star: Option<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub lloyd: LloydParams,
}

impl ExperimentConfig {
    pub fn new(data: DataSource, variants: Vec<Variant>, trials: usize, base_seed: u64) -> Self {
        Self {
            data,
            variants,
            k: None,
            k_star: None,
            trials,
            base_seed,
            lloyd: LloydParams::default(),
        }
    }
}

/// Persisted per-trial outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub dataset: String,
    pub algorithm: String,
    pub trial: usize,
    pub seed: u64,
    pub ci: Option<usize>,
    pub objective: Option<f64>,
    pub sse: Option<f64>,
    pub rho: Option<f64>,
    pub outer_iters: Option<usize>,
    pub error: Option<String>,
    #[serde(skip)]
    pub wall_time: f64,
}

impl TrialRecord {
    pub fn report(&self) -> Option<TrialReport> {
        Some(TrialReport {
            ci: self.ci?,
            objective: self.objective?,
            sse: self.sse?,
            rho: self.rho?,
            outer_iters: self.outer_iters?,
            wall_time: self.wall_time,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub records: Vec<TrialRecord>,
    /// Denominator of every objective ratio.
    pub reference_objective: f64,
    pub k_star: usize,
}

impl ExperimentOutput {
    /// Records of one variant, in trial order.
    pub fn records_for<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a TrialRecord> + 'a {
        self.records.iter().filter(move |r| r.algorithm == label)
    }
}

struct Validated {
    loaded: LoadedData,
    k: usize,
    k_star: usize,
}

fn validate(config: &ExperimentConfig) -> Result<Validated> {
    if config.trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if config.variants.is_empty() {
        return Err(Error::invalid("no algorithm variants configured"));
    }
    if config.lloyd.max_iter == 0 || config.lloyd.tol.is_nan() || config.lloyd.tol < 0.0 {
        return Err(Error::invalid("lloyd max_iter must be >= 1 and tol >= 0"));
    }
    let loaded = config.data.load()?;
    if loaded.truth.dim() != loaded.data.dim() {
        return Err(Error::DimensionMismatch {
            expected: loaded.data.dim(),
            got: loaded.truth.dim(),
        });
    }
    let n = loaded.data.len();
    let k_star = config.k_star.unwrap_or(loaded.truth.k());
    let k = config.k.unwrap_or(k_star);
    if k_star == 0 || k == 0 {
        return Err(Error::invalid("k and k_star must be at least 1"));
    }
    if k > n || k_star > n {
        return Err(Error::invalid(format!(
            "k={k}, k_star={k_star} must not exceed n={n}"
        )));
    }
    for v in &config.variants {
        if let OfmDetector::Radius { delta } = v.ofm {
            if !(delta > 0.0 && delta.is_finite()) {
                return Err(Error::invalid(format!(
                    "radius delta must be positive, got {delta}"
                )));
            }
        }
        if v.max_outer_iters == 0 {
            return Err(Error::invalid("max_outer_iters must be at least 1"));
        }
        let k0 = v.k_init_for(k_star);
        match v.algorithm {
            Algorithm::Opkm if k0 <= k_star || k0 > n => {
                return Err(Error::invalid(format!(
                    "opkm needs k_star < k_init <= n (k_init={k0})"
                )))
            }
            Algorithm::Upkm if k0 == 0 || k0 > k_star => {
                return Err(Error::invalid(format!(
                    "upkm needs 1 <= k_init <= k_star (k_init={k0})"
                )))
            }
            Algorithm::Ffkm if k < 2 => {
                return Err(Error::invalid("ffkm needs k >= 2"));
            }
            _ => {}
        }
    }
    Ok(Validated { loaded, k, k_star })
}

/// Final centers, objective and outer-iteration count of one trial.
fn run_trial(
    variant: &Variant,
    data: &Dataset,
    k: usize,
    k_star: usize,
    seed: u64,
    params: &LloydParams,
) -> Result<(CenterSet, f64, usize)> {
    match variant.algorithm {
        Algorithm::Lloyd => {
            let init = variant.init.init(data, k, seed)?;
            let sol = lloyd(data, &init, params)?;
            Ok((sol.centers, sol.objective, 0))
        }
        Algorithm::Ffkm => {
            let init = variant.init.init(data, k, seed)?;
            let cfg = FfkmConfig {
                ofm: variant.ofm,
                mfo: variant.mfo,
                split: variant.split,
                max_outer_iters: variant.max_outer_iters,
                lloyd: *params,
                seed,
            };
            let (sol, trace) = fission_fusion(data, &init, &cfg)?;
            Ok((sol.centers, sol.objective, trace.steps.len()))
        }
        Algorithm::Opkm => {
            let k0 = variant.k_init_for(k_star);
            let init = variant.init.init(data, k0, seed)?;
            let sol = over_parameterized_from(data, &init, k_star, variant.mfo, params)?;
            Ok((sol.centers, sol.objective, k0 - k_star))
        }
        Algorithm::Upkm => {
            let k0 = variant.k_init_for(k_star);
            let init = variant.init.init(data, k0, seed)?;
            let sol = under_parameterized_from(
                data,
                &init,
                k_star,
                variant.ofm,
                variant.split,
                seed,
                params,
            )?;
            Ok((sol.centers, sol.objective, k_star - k0))
        }
    }
}

/// Run every variant for `config.trials` seeds and aggregate the results.
///
/// Configuration and data errors abort before any trial runs. A failing trial
/// is recorded with its error message and left out of the aggregates.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let Validated { loaded, k, k_star } = validate(config)?;
    let data = &loaded.data;
    let truth_fit = lloyd(data, &loaded.truth, &config.lloyd)?;

    struct Raw {
        variant: usize,
        trial: usize,
        seed: u64,
        result: std::result::Result<(usize, f64, usize), String>,
        wall_time: f64,
    }

    let jobs: Vec<(usize, usize)> = (0..config.variants.len())
        .flat_map(|v| (0..config.trials).map(move |t| (v, t)))
        .collect();
    let raws: Vec<Raw> = jobs
        .par_iter()
        .map(|&(v, trial)| {
            let seed = config.base_seed.wrapping_add(trial as u64);
            let start = Instant::now();
            let result = run_trial(&config.variants[v], data, k, k_star, seed, &config.lloyd)
                .and_then(|(centers, obj, iters)| {
                    Ok((eval::centroid_index(&centers, &loaded.truth)?, obj, iters))
                })
                .map_err(|e| e.to_string());
            Raw {
                variant: v,
                trial,
                seed,
                result,
                wall_time: start.elapsed().as_secs_f64(),
            }
        })
        .collect();

    let best_seen = raws
        .iter()
        .filter_map(|r| r.result.as_ref().ok().map(|x| x.1))
        .fold(f64::INFINITY, f64::min);
    let reference = truth_fit.objective.min(best_seen);
    if reference.is_nan() || reference <= 0.0 {
        return Err(Error::invalid(
            "reference objective is zero; objective ratios are undefined",
        ));
    }

    let n = data.len() as f64;
    let labels: Vec<String> = config.variants.iter().map(|v| v.label(k_star)).collect();
    let records: Vec<TrialRecord> = raws
        .into_iter()
        .map(|r| {
            let base = TrialRecord {
                dataset: loaded.name.clone(),
                algorithm: labels[r.variant].clone(),
                trial: r.trial,
                seed: r.seed,
                ci: None,
                objective: None,
                sse: None,
                rho: None,
                outer_iters: None,
                error: None,
                wall_time: r.wall_time,
            };
            match r.result {
                Ok((ci, obj, iters)) => TrialRecord {
                    ci: Some(ci),
                    objective: Some(obj),
                    sse: Some(n * obj),
                    rho: Some(obj / reference),
                    outer_iters: Some(iters),
                    ..base
                },
                Err(e) => TrialRecord {
                    error: Some(e),
                    ..base
                },
            }
        })
        .collect();

    let rows = labels
        .iter()
        .map(|label| {
            summarize(
                &loaded.name,
                label,
                records.iter().filter(|r| &r.algorithm == label),
                k_star,
            )
        })
        .collect();

    Ok(ExperimentOutput {
        rows,
        records,
        reference_objective: reference,
        k_star,
    })
}

/// Aggregate row from per-trial records; failed trials are skipped.
pub fn summarize<'a>(
    dataset: &str,
    label: &str,
    records: impl Iterator<Item = &'a TrialRecord>,
    k_star: usize,
) -> ResultRow {
    let reports: Vec<TrialReport> = records.filter_map(TrialRecord::report).collect();
    let sse: Vec<f64> = reports.iter().map(|r| r.sse).collect();
    let times: Vec<f64> = reports.iter().map(|r| r.wall_time).collect();
    let agg = eval::aggregate(&reports, k_star).ok();
    ResultRow {
        dataset: dataset.to_string(),
        algorithm: label.to_string(),
        sr_percent: agg.as_ref().map_or(f64::NAN, |a| a.sr),
        amr: agg.as_ref().map_or(f64::NAN, |a| a.amr),
        rho_mean: agg.as_ref().map_or(f64::NAN, |a| a.rho_mean),
        rho_std: agg.as_ref().map_or(f64::NAN, |a| a.rho_std),
        sse_mean: eval::mean_std(&sse).0,
        time_mean_s: eval::mean_std(&times).0,
        trials: reports.len(),
    }
}
