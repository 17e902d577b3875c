use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ffkm::bench::experiment::{run_experiment, Algorithm, DataSource, ExperimentConfig, Variant};
use ffkm::bench::io::{
    load_centers, load_points, load_truth, save_centers, save_labeled_points, save_points,
};
use ffkm::bench::table::{
    emit_table, records_path, write_csv, write_json, write_records, TableFormat,
};
use ffkm::detect::{MfoDetector, OfmDetector};
use ffkm::error::{Error, Result};
use ffkm::eval;
use ffkm::ffkm::SplitMethod;
use ffkm::init::InitMethod;
use ffkm::kmeans::{lloyd, objective, LloydParams};
use ffkm::synth::GeneratorSpec;

#[derive(Parser)]
#[command(
    name = "ffkm",
    version,
    about = "Fission-fusion k-means experiment harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trials and write an aggregate table plus per-trial records.
    Run(Box<RunArgs>),
    /// Write a synthetic dataset and its true centers.
    Gen(GenArgs),
    /// Score saved centers against the ground truth.
    Eval(EvalArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Point file.
    #[arg(long, conflicts_with = "generate", requires = "truth")]
    data: Option<PathBuf>,
    /// Generator spec, e.g. `balls:rows=4,cols=4,sep=30` or `a1:clusters=20`.
    #[arg(long)]
    generate: Option<String>,
    /// Ground-truth center file (with --data).
    #[arg(long)]
    truth: Option<PathBuf>,
    /// The point file has a trailing integer label column.
    #[arg(long)]
    labeled: bool,
    /// Comma-separated algorithms: lloyd, ffkm, opkm, upkm.
    #[arg(long, default_value = "ffkm", value_delimiter = ',')]
    algo: Vec<String>,
    /// random | kmeanspp
    #[arg(long, default_value = "random")]
    init: String,
    /// sd | td | rd
    #[arg(long, default_value = "sd")]
    ofm: String,
    /// pd | oi
    #[arg(long, default_value = "pd")]
    mfo: String,
    /// Radius multiplier for the rd detector.
    #[arg(long, default_value_t = OfmDetector::DEFAULT_RADIUS_DELTA)]
    delta: f64,
    /// farthest | 2means
    #[arg(long, default_value = "farthest")]
    split: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    k_star: Option<usize>,
    /// Starting center count for opkm/upkm.
    #[arg(long)]
    k_init: Option<usize>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Base seed; trial t uses seed + t.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = LloydParams::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = LloydParams::default().max_iter)]
    max_iter: usize,
    /// Table path; per-trial records go next to it. Table goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct GenArgs {
    /// Generator spec.
    #[arg(long)]
    generate: String,
    /// Output prefix: writes PREFIX.txt and PREFIX.truth.txt.
    #[arg(long)]
    out: PathBuf,
    /// Append the generating component index to every point.
    #[arg(long)]
    labeled: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    centers: PathBuf,
    #[arg(long)]
    labeled: bool,
}

fn build_config(a: &RunArgs) -> Result<(ExperimentConfig, TableFormat)> {
    let data = match (&a.data, &a.generate) {
        (Some(points), None) => DataSource::File {
            points: points.clone(),
            truth: a
                .truth
                .clone()
                .ok_or_else(|| Error::invalid("--data requires --truth"))?,
            labeled: a.labeled,
        },
        (None, Some(spec)) => {
            spec.parse::<GeneratorSpec>()?;
            DataSource::Generate(spec.clone())
        }
        _ => {
            return Err(Error::invalid(
                "exactly one of --data or --generate is required",
            ))
        }
    };
    let init: InitMethod = a.init.parse()?;
    let ofm = OfmDetector::parse(&a.ofm, a.delta)?;
    let mfo = MfoDetector::parse(&a.mfo)?;
    let split: SplitMethod = a.split.parse()?;
    let variants = a
        .algo
        .iter()
        .map(|name| {
            Ok(Variant {
                init,
                ofm,
                mfo,
                split,
                k_init: a.k_init,
                ..Variant::new(name.parse::<Algorithm>()?)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut config = ExperimentConfig::new(data, variants, a.trials, a.seed);
    config.k = a.k;
    config.k_star = a.k_star;
    config.lloyd = LloydParams {
        tol: a.tol,
        max_iter: a.max_iter,
        ..LloydParams::default()
    };
    Ok((config, a.format.parse()?))
}

fn cmd_run(a: &RunArgs) -> Result<i32> {
    let (config, format) = build_config(a)?;
    let out = run_experiment(&config)?;
    match &a.out {
        Some(path) => {
            emit_table(&out.rows, format, path)?;
            write_records(&out.records, format, records_path(path, format))?;
        }
        None => match format {
            TableFormat::Csv => write_csv(std::io::stdout().lock(), &out.rows)?,
            TableFormat::Json => write_json(std::io::stdout().lock(), &out.rows)?,
        },
    }
    let failed: Vec<_> = out.records.iter().filter(|r| r.error.is_some()).collect();
    for r in &failed {
        eprintln!(
            "trial {} of {} failed: {}",
            r.trial,
            r.algorithm,
            r.error.as_deref().unwrap_or("")
        );
    }
    if !failed.is_empty() {
        eprintln!(
            "{} of {} trials failed and were excluded",
            failed.len(),
            out.records.len()
        );
    }
    Ok(if out.rows.iter().any(|r| r.trials == 0) {
        2
    } else {
        0
    })
}

fn cmd_gen(a: &GenArgs) -> Result<i32> {
    let g = a.generate.parse::<GeneratorSpec>()?.generate()?;
    let with_ext = |suffix: &str| {
        let mut s = a.out.clone().into_os_string();
        s.push(suffix);
        PathBuf::from(s)
    };
    if a.labeled {
        save_labeled_points(with_ext(".txt"), &g.data, &g.labels)?;
    } else {
        save_points(with_ext(".txt"), &g.data)?;
    }
    save_centers(with_ext(".truth.txt"), &g.truth)?;
    eprintln!(
        "{}: n={} d={} k*={}",
        g.name,
        g.data.len(),
        g.data.dim(),
        g.truth.k()
    );
    Ok(0)
}

fn cmd_eval(a: &EvalArgs) -> Result<i32> {
    let data = load_points(&a.data, a.labeled)?;
    let truth = load_truth(&a.truth)?;
    let centers = load_centers(&a.centers)?;
    let obj = objective(&data, &centers)?;
    let reference = lloyd(&data, &truth, &LloydParams::default())?
        .objective
        .min(obj);
    let report = serde_json::json!({
        "k": centers.k(),
        "k_star": truth.k(),
        "ci": eval::centroid_index(&centers, &truth)?,
        "objective": obj,
        "sse": data.len() as f64 * obj,
        "rho": eval::rho_ratio(obj, reference)?,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(0)
}

fn main() -> ExitCode {
    // Usage errors are configuration errors (exit 1), not clap's default 2.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Eval(a) => cmd_eval(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
