//! CSV-emitting experiment pipelines for the localization toolkit.
//!
//! Every experiment writes deterministic CSV files plus a `manifest.csv`
//! listing each output with its row count. Exit codes: 0 on success, 2 for
//! usage errors, 3 for numerical failures.

mod experiments;

use clap::{Args, Parser, Subcommand};
use locz_core::Error as CoreError;
use std::collections::HashMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "locz",
    about = "Localization measures for densities: rearrangements, participation ratios, \
             and Wasserstein/Sobolev coefficients",
    long_about = None,
    after_help = "Output directory precedence: LOCZ_OUT env var, then --out, then the \
                  config file, then ./locz-out.\nConfig files are flat `key = value` \
                  lines; command-line flags override file values."
)]
struct Cli {
    /// Flat key = value config file supplying defaults for the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parameter sweeps (default 1).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    experiment: Experiment,
}

#[derive(Args, Debug, Clone, Copy, Default)]
struct SweepArgs {
    /// Grid resolution.
    #[arg(long)]
    n: Option<usize>,
    /// Number of sweep points.
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Experiment {
    /// Step/Gaussian family sweeps: participation ratios and both
    /// localization backends per parameter value.
    Families(SweepArgs),
    /// Quantile-form vs Sobolev-form Wasserstein distance on random
    /// mixture densities.
    LemmaCheck {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Plain vs periodized transport cost over the step-family separation
    /// sweep (exact LP both ways).
    Periodized(SweepArgs),
    /// Transport cost to the uniform density on an enlarged interval.
    Extended {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Extension margin on each side of (0, 1).
        #[arg(long)]
        margin: Option<f64>,
    },
    /// Sobolev-norm sandwich bounds against the LP Wasserstein distance.
    Peyre {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Sturm-Liouville eigenfunction localization scores.
    Sturm {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        margin: Option<f64>,
    },
    /// Neumann-Poincare eigenfunction localization on the reference curves.
    Np {
        /// Quadrature node count.
        #[arg(long)]
        n: Option<usize>,
        /// Number of eigenpairs per curve.
        #[arg(long)]
        count: Option<usize>,
        /// Curve selector: 1, 2, 3, or "all".
        #[arg(long)]
        curve: Option<String>,
    },
    /// Two-bump densities on a masked 2D domain under the
    /// distance-to-boundary transport cost.
    Ot2d {
        /// Cells per axis of the bounding box.
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        points: Option<usize>,
        /// Gaussian bump width.
        #[arg(long)]
        width: Option<f64>,
        /// Also solve the Neumann-Poisson problem for the first density and
        /// dump the potential as x,y,w.
        #[arg(long)]
        dump_hm1_w: Option<PathBuf>,
    },
}

/// Flat `key = value` file; `#` starts a comment.
fn parse_config_file(path: &PathBuf) -> Result<HashMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!(
                "config line {} is not `key = value`: {line:?}",
                lineno + 1
            ));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn lookup<T>(flag: Option<T>, map: &HashMap<String, String>, key: &str) -> Result<Option<T>, String>
where
    T: std::str::FromStr,
    T::Err: Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| format!("config value {key} = {raw:?} is invalid: {e}")),
    }
}

fn usage_error(msg: impl Display) -> ExitCode {
    eprintln!("usage error: {msg}");
    ExitCode::from(2)
}

fn numerical_error(msg: impl Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(3)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match cli.config.as_ref().map(parse_config_file).transpose() {
        Ok(map) => map.unwrap_or_default(),
        Err(msg) => return usage_error(msg),
    };

    // LOCZ_OUT beats the flag, which beats the config file
    let out = std::env::var_os("LOCZ_OUT")
        .map(PathBuf::from)
        .or(cli.out)
        .or_else(|| file.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("locz-out"));
    let jobs = match lookup(cli.jobs, &file, "jobs") {
        Ok(j) => j.unwrap_or(1).max(1),
        Err(msg) => return usage_error(msg),
    };

    let spec = match build_spec(cli.experiment, &file) {
        Ok(spec) => spec,
        Err(msg) => return usage_error(msg),
    };

    match experiments::run(&spec, &out, jobs) {
        Ok(report) => {
            for (name, rows) in report {
                println!("wrote {} ({rows} rows)", out.join(name).display());
            }
            ExitCode::SUCCESS
        }
        Err(experiments::RunError::Usage(msg)) => usage_error(msg),
        Err(experiments::RunError::Failure(msg)) => numerical_error(msg),
    }
}

fn build_spec(
    experiment: Experiment,
    file: &HashMap<String, String>,
) -> Result<experiments::ExperimentSpec, String> {
    use experiments::ExperimentSpec as Spec;
    Ok(match experiment {
        Experiment::Families(sweep) => Spec::Families {
            n: lookup(sweep.n, file, "n")?.unwrap_or(2000),
            points: lookup(sweep.points, file, "points")?.unwrap_or(31),
        },
        Experiment::LemmaCheck { n, samples } => Spec::LemmaCheck {
            n: lookup(n, file, "n")?.unwrap_or(4096),
            samples: lookup(samples, file, "samples")?.unwrap_or(100),
        },
        Experiment::Periodized(sweep) => Spec::Periodized {
            n: lookup(sweep.n, file, "n")?.unwrap_or(128),
            points: lookup(sweep.points, file, "points")?.unwrap_or(16),
        },
        Experiment::Extended { sweep, margin } => Spec::Extended {
            n: lookup(sweep.n, file, "n")?.unwrap_or(2000),
            points: lookup(sweep.points, file, "points")?.unwrap_or(16),
            margin: lookup(margin, file, "margin")?.unwrap_or(2.0),
        },
        Experiment::Peyre { n, samples } => Spec::Peyre {
            n: lookup(n, file, "n")?.unwrap_or(128),
            samples: lookup(samples, file, "samples")?.unwrap_or(20),
        },
        Experiment::Sturm { n, count, margin } => Spec::Sturm {
            n: lookup(n, file, "n")?.unwrap_or(2048),
            count: lookup(count, file, "count")?.unwrap_or(40),
            margin: lookup(margin, file, "margin")?.unwrap_or(1.0),
        },
        Experiment::Np { n, count, curve } => {
            let curve = lookup(curve, file, "curve")?.unwrap_or_else(|| "all".to_string());
            let curves = match curve.as_str() {
                "all" => vec![0, 1, 2],
                "1" => vec![0],
                "2" => vec![1],
                "3" => vec![2],
                other => return Err(format!("--curve must be 1, 2, 3 or all, got {other:?}")),
            };
            Spec::Np {
                n: lookup(n, file, "n")?.unwrap_or(512),
                count: lookup(count, file, "count")?.unwrap_or(60),
                curves,
            }
        }
        Experiment::Ot2d { nx, points, width, dump_hm1_w } => Spec::Ot2d {
            nx: lookup(nx, file, "nx")?.unwrap_or(48),
            points: lookup(points, file, "points")?.unwrap_or(6),
            width: lookup(width, file, "width")?.unwrap_or(0.08),
            dump_hm1_w: dump_hm1_w
                .or_else(|| file.get("dump_hm1_w").map(PathBuf::from)),
        },
    })
}

pub(crate) fn classify(err: CoreError) -> experiments::RunError {
    match err {
        CoreError::InvalidParameter(msg) => experiments::RunError::Usage(msg),
        other => experiments::RunError::Failure(other.to_string()),
    }
}
