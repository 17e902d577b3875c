//! Synthetic data: stochastic ball mixtures, Gaussian look-alikes of the
//! benchmark sets, and the one-dimensional diffuse ball model on which Lloyd
//! stays trapped.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::{sq_dist, CenterSet, Dataset};
use crate::error::{Error, Result};
use crate::init::rng_from_seed;
use crate::kmeans::{assign, update_centers};

/// Equal-weight mixture of uniform distributions on radius-`r` balls.
#[derive(Debug, Clone, PartialEq)]
pub struct BallMixture {
    pub centers: CenterSet,
    pub radius: f64,
}

impl BallMixture {
    pub fn new(centers: CenterSet, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self { centers, radius })
    }

    /// `rows x cols` planar grid of centers with the given spacing.
    pub fn grid(rows: usize, cols: usize, spacing: f64, radius: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("grid needs at least one row and column"));
        }
        let mut flat = Vec::with_capacity(2 * rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                flat.push(c as f64 * spacing);
                flat.push(r as f64 * spacing);
            }
        }
        Self::new(CenterSet::from_flat(flat, 2)?, radius)
    }

    pub fn k(&self) -> usize {
        self.centers.k()
    }
}

/// Uniform sample from the `dim`-ball of the given radius around the origin.
fn uniform_in_ball<R: Rng>(rng: &mut R, dim: usize, radius: f64, out: &mut Vec<f64>) {
    let dir: Vec<f64> = loop {
        let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            break g.into_iter().map(|x| x / norm).collect();
        }
    };
    let u: f64 = rng.random();
    let scale = radius * u.powf(1.0 / dim as f64);
    out.extend(dir.into_iter().map(|x| x * scale));
}

/// Draw `n` points: a uniformly chosen component, then a uniform point in its ball.
pub fn gen_ball_mixture(model: &BallMixture, n: usize, seed: u64) -> Result<(Dataset, Vec<usize>)> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let mut rng = rng_from_seed(seed);
    let dim = model.centers.dim();
    let mut values = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    let mut offset = Vec::with_capacity(dim);
    for _ in 0..n {
        let s = rng.random_range(0..model.k());
        offset.clear();
        uniform_in_ball(&mut rng, dim, model.radius, &mut offset);
        values.extend(
            model
                .centers
                .center(s)
                .iter()
                .zip(&offset)
                .map(|(c, o)| c + o),
        );
        labels.push(s);
    }
    Ok((Dataset::from_flat(values, dim)?, labels))
}

/// Isotropic Gaussian clusters with a fixed number of points each.
///
/// Stand-in for benchmark sets built from Gaussian clusters; distinct from
/// the ball model because its support is unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    pub centers: CenterSet,
    pub sigma: f64,
    pub per_cluster: usize,
}

/// Draw `per_cluster` points from every component, grouped by component.
pub fn gen_gaussian_mixture(model: &GaussianMixture, seed: u64) -> Result<(Dataset, Vec<usize>)> {
    if model.sigma.is_nan() || model.sigma <= 0.0 || model.per_cluster == 0 {
        return Err(Error::invalid(
            "gaussian mixture needs sigma > 0 and per_cluster >= 1",
        ));
    }
    let mut rng = rng_from_seed(seed);
    let dim = model.centers.dim();
    let n = model.per_cluster * model.centers.k();
    let mut values = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for (s, c) in model.centers.centers().enumerate() {
        for _ in 0..model.per_cluster {
            for &x in c {
                let z: f64 = StandardNormal.sample(&mut rng);
                values.push(x + model.sigma * z);
            }
            labels.push(s);
        }
    }
    Ok((Dataset::from_flat(values, dim)?, labels))
}

/// Pairwise overlap of two equal isotropic Gaussians at distance `dist`:
/// the share of the pair's points that fall on the other side of the
/// bisecting hyperplane, counted from both sides, `2 Φ(−dist / 2σ)`.
pub fn gaussian_pair_overlap(dist: f64, sigma: f64) -> f64 {
    let std = Normal::standard();
    2.0 * std.cdf(-dist / (2.0 * sigma))
}

/// A1-style layout: `clusters` centers on a jittered planar grid, with σ
/// chosen so that the closest pair of clusters overlaps by `overlap` as
/// measured by [`gaussian_pair_overlap`].
pub fn a1_format(
    clusters: usize,
    per_cluster: usize,
    overlap: f64,
    seed: u64,
) -> Result<GaussianMixture> {
    if clusters < 2 {
        return Err(Error::invalid("a1 layout needs at least two clusters"));
    }
    if !(overlap > 0.0 && overlap < 1.0) {
        return Err(Error::invalid(format!(
            "overlap must lie in (0, 1), got {overlap}"
        )));
    }
    let cols = (clusters as f64).sqrt().ceil() as usize;
    let spacing = 100.0;
    let jitter = 0.25 * spacing;
    let mut rng = rng_from_seed(seed);
    let mut flat = Vec::with_capacity(2 * clusters);
    for i in 0..clusters {
        let (r, c) = (i / cols, i % cols);
        flat.push(c as f64 * spacing + rng.random_range(-jitter..=jitter));
        flat.push(r as f64 * spacing + rng.random_range(-jitter..=jitter));
    }
    let centers = CenterSet::from_flat(flat, 2)?;
    let (dmin, _) = separation_stats(&centers)?;
    let z = Normal::standard().inverse_cdf(1.0 - overlap / 2.0);
    Ok(GaussianMixture {
        centers,
        sigma: dmin / (2.0 * z),
        per_cluster,
    })
}

/// `(Δmin, Δmax)`: smallest and largest pairwise center distance.
pub fn separation_stats(centers: &CenterSet) -> Result<(f64, f64)> {
    if centers.k() < 2 {
        return Err(Error::invalid("separation needs at least two centers"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..centers.k() {
        for j in i + 1..centers.k() {
            let d = sq_dist(centers.center(i), centers.center(j)).sqrt();
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    Ok((lo, hi))
}

/// Where a one-dimensional location sits in a diffuse model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `[cδ − δ, cδ + δ]`
    Right,
    /// `[−cδ − δ, −cδ + δ]`
    Left,
    /// `|x| > 20cδ`
    Outer,
    Elsewhere,
}

/// One-dimensional unit-radius ball mixture whose centers sit in two small
/// inner windows at `±cδ` plus optional far-away outer centers.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffuseModel {
    c: f64,
    delta: f64,
    centers: Vec<f64>,
}

impl DiffuseModel {
    /// Validates `c > 20`, `δ > 3`, at least one center in each inner window
    /// and every other center outside `[−20cδ, 20cδ]`.
    pub fn new(c: f64, delta: f64, centers: Vec<f64>) -> Result<Self> {
        if c.is_nan() || c <= 20.0 || delta.is_nan() || delta <= 3.0 {
            return Err(Error::invalid(format!(
                "diffuse model needs c > 20 and delta > 3 (c={c}, delta={delta})"
            )));
        }
        let model = Self { c, delta, centers };
        let mut right = 0;
        let mut left = 0;
        for &x in &model.centers {
            match model.region(x) {
                Region::Right => right += 1,
                Region::Left => left += 1,
                Region::Outer => {}
                Region::Elsewhere => {
                    return Err(Error::invalid(format!(
                        "center {x} is neither in an inner window nor beyond 20·c·delta"
                    )))
                }
            }
        }
        if right == 0 || left == 0 {
            return Err(Error::invalid(
                "each inner window needs at least one true center",
            ));
        }
        Ok(model)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn region(&self, x: f64) -> Region {
        let cd = self.c * self.delta;
        if (x - cd).abs() <= self.delta {
            Region::Right
        } else if (x + cd).abs() <= self.delta {
            Region::Left
        } else if x.abs() > 20.0 * cd {
            Region::Outer
        } else {
            Region::Elsewhere
        }
    }

    /// Number of true centers in the two inner windows.
    pub fn inner_count(&self) -> usize {
        self.centers
            .iter()
            .filter(|&&x| matches!(self.region(x), Region::Right | Region::Left))
            .count()
    }

    pub fn k_tilde(&self) -> usize {
        self.centers.len()
    }

    /// Centers counted per region: `(right, left, outer)`.
    pub fn region_counts(&self, xs: impl IntoIterator<Item = f64>) -> (usize, usize, usize) {
        let mut out = (0, 0, 0);
        for x in xs {
            match self.region(x) {
                Region::Right => out.0 += 1,
                Region::Left => out.1 += 1,
                Region::Outer => out.2 += 1,
                Region::Elsewhere => {}
            }
        }
        out
    }
}

/// Sample `n` points from the diffuse model (unit-radius intervals).
pub fn gen_diffuse(model: &DiffuseModel, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let mut rng = rng_from_seed(seed);
    let values: Vec<f64> = (0..n)
        .map(|_| {
            let s = rng.random_range(0..model.centers.len());
            model.centers[s] + rng.random_range(-1.0..=1.0)
        })
        .collect();
    Dataset::from_flat(values, 1)
}

/// Region counts of the fitted centers over a Lloyd run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapReport {
    /// True iff the right/left window counts never changed.
    pub held: bool,
    /// `(k1, k2, k3)` at steps `0..=iters`.
    pub counts: Vec<(usize, usize, usize)>,
}

/// Run `iters` Lloyd steps from `init` on `data` and track how many fitted
/// centers sit in the right window, the left window and the outer region.
pub fn check_trap(
    model: &DiffuseModel,
    init: &CenterSet,
    iters: usize,
    data: &Dataset,
) -> Result<TrapReport> {
    if init.dim() != 1 || data.dim() != 1 {
        return Err(Error::invalid("trap check is one-dimensional"));
    }
    let start = model.region_counts(init.as_flat().iter().copied());
    if start.0 == 0 || start.1 == 0 {
        return Err(Error::invalid(format!(
            "initial centers must cover both inner windows (k1={}, k2={})",
            start.0, start.1
        )));
    }
    for &s in model
        .centers()
        .iter()
        .filter(|&&s| model.region(s) == Region::Outer)
    {
        if !init
            .as_flat()
            .iter()
            .any(|&b| (b - s).abs() <= s.abs() / 10.0)
        {
            return Err(Error::invalid(format!(
                "outer true center {s} has no initial center within |s|/10"
            )));
        }
    }
    let mut centers = init.clone();
    let mut counts = vec![start];
    for _ in 0..iters {
        let asg = assign(data, &centers)?;
        centers = update_centers(data, &asg, &centers)?;
        counts.push(model.region_counts(centers.as_flat().iter().copied()));
    }
    let held = counts.iter().all(|&(a, b, _)| a == start.0 && b == start.1);
    Ok(TrapReport { held, counts })
}

/// A dataset produced from a generator spec, with its ground truth.
#[derive(Debug, Clone)]
pub struct Generated {
    pub name: String,
    pub data: Dataset,
    pub truth: CenterSet,
    pub labels: Vec<usize>,
}

/// Textual generator description, `kind:key=value,...`.
///
/// - `balls:rows=4,cols=4,sep=30,r=1,n=8000,seed=1` planar grid of uniform
///   balls; `sep` is the grid spacing in units of the radius.
/// - `a1:clusters=20,per=150,overlap=0.2,seed=1` Gaussian A1-format layout.
/// - `diffuse:c=25,delta=4,centers=97;103;-97;-103,n=100000,seed=1`.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Balls {
        rows: usize,
        cols: usize,
        sep: f64,
        radius: f64,
        n: usize,
        seed: u64,
    },
    A1 {
        clusters: usize,
        per_cluster: usize,
        overlap: f64,
        seed: u64,
    },
    Diffuse {
        c: f64,
        delta: f64,
        centers: Vec<f64>,
        n: usize,
        seed: u64,
    },
}

fn take<T: FromStr>(kv: &mut BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    match kv.remove(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::invalid(format!("generator: bad value '{v}' for '{key}'"))),
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = BTreeMap::new();
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| {
                Error::invalid(format!("generator: expected key=value, got '{part}'"))
            })?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let spec = match kind.trim().to_ascii_lowercase().as_str() {
            "balls" => GeneratorSpec::Balls {
                rows: take(&mut kv, "rows", 4)?,
                cols: take(&mut kv, "cols", 4)?,
                sep: take(&mut kv, "sep", 30.0)?,
                radius: take(&mut kv, "r", 1.0)?,
                n: take(&mut kv, "n", 8000)?,
                seed: take(&mut kv, "seed", 0)?,
            },
            "a1" => GeneratorSpec::A1 {
                clusters: take(&mut kv, "clusters", 20)?,
                per_cluster: take(&mut kv, "per", 150)?,
                overlap: take(&mut kv, "overlap", 0.2)?,
                seed: take(&mut kv, "seed", 0)?,
            },
            "diffuse" => {
                let centers = kv
                    .remove("centers")
                    .unwrap_or_else(|| "97;103;-97;-103".to_string())
                    .split(';')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::invalid("generator: bad diffuse centers"))?;
                GeneratorSpec::Diffuse {
                    c: take(&mut kv, "c", 25.0)?,
                    delta: take(&mut kv, "delta", 4.0)?,
                    centers,
                    n: take(&mut kv, "n", 100_000)?,
                    seed: take(&mut kv, "seed", 0)?,
                }
            }
            other => return Err(Error::invalid(format!("unknown generator '{other}'"))),
        };
        if let Some(k) = kv.keys().next() {
            return Err(Error::invalid(format!(
                "generator '{kind}': unknown key '{k}'"
            )));
        }
        Ok(spec)
    }
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Generated> {
        match self {
            GeneratorSpec::Balls {
                rows,
                cols,
                sep,
                radius,
                n,
                seed,
            } => {
                let model = BallMixture::grid(*rows, *cols, sep * radius, *radius)?;
                let (data, labels) = gen_ball_mixture(&model, *n, *seed)?;
                Ok(Generated {
                    name: format!("balls-{rows}x{cols}-sep{sep}"),
                    data,
                    truth: model.centers,
                    labels,
                })
            }
            GeneratorSpec::A1 {
                clusters,
                per_cluster,
                overlap,
                seed,
            } => {
                let model = a1_format(*clusters, *per_cluster, *overlap, *seed)?;
                let (data, labels) = gen_gaussian_mixture(&model, seed.wrapping_add(1))?;
                Ok(Generated {
                    name: "A1-format".into(),
                    data,
                    truth: model.centers,
                    labels,
                })
            }
            GeneratorSpec::Diffuse {
                c,
                delta,
                centers,
                n,
                seed,
            } => {
                let model = DiffuseModel::new(*c, *delta, centers.clone())?;
                let data = gen_diffuse(&model, *n, *seed)?;
                let truth = CenterSet::from_scalars(centers)?;
                let labels = assign(&data, &truth)?.labels;
                Ok(Generated {
                    name: "diffuse".into(),
                    data,
                    truth,
                    labels,
                })
            }
        }
    }
}
