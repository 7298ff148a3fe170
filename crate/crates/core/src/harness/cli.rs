//! The `nlcs` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use super::config::ExperimentConfig;
use super::runner::{run_experiment, RunOptions};
use super::summary::{render, summarize, SummaryOptions};
use crate::analysis::{
    decoupling_probe, default_target_map, dither_identity, mean_width_global, mean_width_local, target_mismatch,
    DitherIdentity, WidthSet,
};
use crate::error::{Error, Result};
use crate::model::{gen_signal, target_of, ConstraintSet, EnsembleLaw, ObservationModel, SignalFamily, SignalSpec};
use crate::seed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nlcs", version, about = "Generalized-Lasso recovery experiments for non-linear observations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelKind {
    Linear,
    Onebit,
    OnebitDither,
    Multibit,
    Modulo,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SetKind {
    L1ball,
    L2ball,
    Tvball,
    Sphere,
    Fullspace,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LawKind {
    Gaussian,
    Rademacher,
    Uniform,
}

impl From<LawKind> for EnsembleLaw {
    fn from(l: LawKind) -> Self {
        match l {
            LawKind::Gaussian => EnsembleLaw::Gaussian,
            LawKind::Rademacher => EnsembleLaw::Rademacher,
            LawKind::Uniform => EnsembleLaw::UniformScaled,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment from a JSON config and write one CSV row per trial.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; defaults to the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (the NLCS_THREADS environment variable takes precedence).
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Fill the wall_ms column.
        #[arg(long)]
        timing: bool,
    },
    /// Per-m medians, quartiles and the fitted log-log slope of a results CSV.
    Rates {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "err_direction")]
        metric: String,
        /// Comma-separated grouping columns.
        #[arg(long, default_value = "model,p,s")]
        group: String,
        /// Fit only the largest `window` sample sizes.
        #[arg(long)]
        window: Option<usize>,
        /// Report the fraction of trials with metric at most this value.
        #[arg(long)]
        t: Option<f64>,
    },
    /// Monte-Carlo target mismatch of a model at a random sparse unit signal.
    Mismatch {
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 16)]
        p: usize,
        #[arg(long, default_value_t = 3)]
        s: usize,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = LawKind::Gaussian)]
        law: LawKind,
    },
    /// Monte-Carlo mean width of a set (local width at the origin with --t).
    Meanwidth {
        #[arg(long, value_enum)]
        set: SetKind,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Decoupling probe for the unit ℓ₁ ball and random s-sparse centers on its boundary.
    Probe {
        #[arg(long, default_value_t = 32)]
        p: usize,
        #[arg(long, default_value_t = 2)]
        s: usize,
        #[arg(long, default_value_t = 20)]
        centers: usize,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte-Carlo check of the dithering identities at fixed test points.
    Identities {
        #[arg(long, value_enum)]
        model: ModelKind,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Errors that map to the usage exit code.
struct Usage(String);

enum Failure {
    Usage(Usage),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(Usage(msg.into()))
}

fn need(v: Option<f64>, flag: &str) -> std::result::Result<f64, Failure> {
    v.ok_or_else(|| usage(format!("--{flag} is required for this model")))
}

fn build_model(kind: ModelKind, lambda: Option<f64>, delta: Option<f64>) -> std::result::Result<ObservationModel, Failure> {
    Ok(match kind {
        ModelKind::Linear => ObservationModel::Linear,
        ModelKind::Onebit => ObservationModel::OneBit,
        ModelKind::OnebitDither => ObservationModel::OneBitDither {
            lambda: need(lambda, "lambda")?,
        },
        ModelKind::Multibit => ObservationModel::MultiBitDither {
            delta: need(delta, "delta")?,
        },
        ModelKind::Modulo => ObservationModel::Modulo {
            lambda: need(lambda, "lambda")?,
        },
    })
}

fn execute(cmd: Command, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Runtime(Error::io("<stdout>", e));
    match cmd {
        Command::Run {
            config,
            out: csv_out,
            threads,
            seed,
            timing,
        } => {
            if !config.is_file() {
                return Err(usage(format!("config file {} does not exist", config.display())));
            }
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            cfg.record_timing |= timing;
            let path = csv_out
                .or_else(|| cfg.output.clone())
                .ok_or_else(|| usage("no output path: pass --out or set `output` in the config"))?;
            let env_threads = match std::env::var("NLCS_THREADS") {
                Ok(v) => Some(
                    v.parse::<usize>()
                        .map_err(|_| usage(format!("NLCS_THREADS must be a positive integer, got `{v}`")))?,
                ),
                Err(_) => None,
            };
            let threads = env_threads.or(threads);
            if threads == Some(0) {
                return Err(usage("thread count must be ≥ 1"));
            }
            let records = run_experiment(&cfg, Some(&path), RunOptions { threads })?;
            writeln!(out, "wrote {} rows to {}", records.len(), path.display()).map_err(io)?;
        }
        Command::Rates {
            input,
            metric,
            group,
            window,
            t,
        } => {
            let keys: Vec<&str> = group.split(',').map(str::trim).filter(|k| !k.is_empty()).collect();
            let opts = SummaryOptions {
                group_keys: &keys,
                metric: &metric,
                window,
                accuracy_target: t,
            };
            let groups = summarize(&input, &opts)?;
            write!(out, "{}", render(&groups, &opts)).map_err(io)?;
        }
        Command::Mismatch {
            model,
            lambda,
            delta,
            p,
            s,
            n,
            seed,
            law,
        } => {
            let model = build_model(model, lambda, delta)?;
            let law = EnsembleLaw::from(law);
            let x = gen_signal(&SignalSpec::new(SignalFamily::UnitSphere, p, s), seed::derive(seed, "signal", &[]))?;
            let tx = target_of(&default_target_map(&model, law)?, &x)?.value;
            let est = target_mismatch(&model, law, &x, &tx, n, seed::derive(seed, "mismatch", &[]))?;
            writeln!(out, "model,n,rho_hat,stderr").map_err(io)?;
            writeln!(out, "{},{},{:.6e},{:.6e}", model.tag(), est.n_samples, est.rho_hat, est.stderr).map_err(io)?;
        }
        Command::Meanwidth {
            set,
            radius,
            p,
            n,
            seed,
            t,
        } => {
            let k = match set {
                SetKind::L1ball => Some(ConstraintSet::L1Ball { radius }),
                SetKind::L2ball => Some(ConstraintSet::L2Ball { radius }),
                SetKind::Tvball => Some(ConstraintSet::TvBall { radius }),
                SetKind::Fullspace => Some(ConstraintSet::FullSpace),
                SetKind::Sphere => None,
            };
            let est = match (t, k) {
                (Some(t), Some(k)) => mean_width_local(&k, &vec![0.0; p], t, n, seed)?,
                (Some(_), None) => return Err(usage("--t applies to constraint sets, not the sphere")),
                (None, Some(set)) => mean_width_global(&WidthSet::Constraint { set, p }, n, seed)?,
                (None, None) => mean_width_global(&WidthSet::Sphere { p }, n, seed)?,
            };
            writeln!(out, "value,stderr,n").map_err(io)?;
            writeln!(out, "{:.6},{:.6},{}", est.value, est.stderr, est.n_samples).map_err(io)?;
        }
        Command::Probe {
            p,
            s,
            centers,
            t,
            n,
            seed,
        } => {
            if centers == 0 {
                return Err(usage("--centers must be ≥ 1"));
            }
            let spec = SignalSpec::new(SignalFamily::Sparse, p, s);
            let pts: Vec<Vec<f64>> = (0..centers)
                .map(|i| gen_signal(&spec, seed::derive(seed, "center", &[i as u64])).map(|x| x.to_dense()))
                .collect::<Result<_>>()?;
            let r = decoupling_probe(&ConstraintSet::L1Ball { radius: 1.0 }, &pts, t, n, seed)?;
            writeln!(out, "lhs,rhs,ratio").map_err(io)?;
            writeln!(out, "{:.6},{:.6},{:.6}", r.lhs, r.rhs, r.ratio).map_err(io)?;
        }
        Command::Identities {
            model,
            delta,
            lambda,
            n,
            seed,
        } => {
            let (kind, points) = match model {
                ModelKind::Multibit => {
                    let delta = need(delta, "delta")?;
                    (DitherIdentity::Quantizer { delta }, vec![-3.3, 0.0, 0.7, 2.0 * delta])
                }
                ModelKind::OnebitDither | ModelKind::Onebit => {
                    let lambda = need(lambda, "lambda")?;
                    (
                        DitherIdentity::Sign { lambda },
                        vec![-lambda, -0.5 * lambda, 0.0, 0.3 * lambda, lambda],
                    )
                }
                _ => return Err(usage("identities are defined for the multibit and onebit-dither models")),
            };
            writeln!(out, "s,expected,estimate,residual,stderr").map_err(io)?;
            for (i, s) in points.into_iter().enumerate() {
                let c = dither_identity(kind, s, n, seed::derive(seed, "identity", &[i as u64]))?;
                writeln!(out, "{},{:.6},{:.6},{:.3e},{:.3e}", c.s, c.expected, c.estimate, c.residual, c.stderr)
                    .map_err(io)?;
            }
        }
    }
    Ok(())
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(Usage(msg))) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_cli(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
