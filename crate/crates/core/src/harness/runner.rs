//! Trial execution and atomic CSV persistence.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::analysis::{default_target_map, direction_error, support_recover};
use crate::error::{Error, Result};
use crate::linalg::{dist2, norm2};
use crate::model::{gen_matrix, gen_signal, target_of, SignalFamily, TargetMap};
use crate::observe::observe_batch;
use crate::seed;
use crate::solver::solve_lasso;

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub model: String,
    pub p: usize,
    pub s: usize,
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    /// `‖ẑ − Tx̊‖₂`
    pub err_l2: f64,
    /// `‖ẑ − ‖Tx̊‖₂·x̊/‖x̊‖₂‖₂`
    pub err_direction: f64,
    /// Hard-threshold support equals the true support; empty for gradient-sparse signals.
    pub support_match: Option<bool>,
    pub iterations: usize,
    pub converged: bool,
    pub wall_ms: Option<f64>,
}

pub const CSV_HEADER: [&str; 12] = [
    "model",
    "p",
    "s",
    "m",
    "trial",
    "seed",
    "err_l2",
    "err_direction",
    "support_match",
    "iterations",
    "converged",
    "wall_ms",
];

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
}

/// Everything a trial produces beyond its record.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    pub estimate: Vec<f64>,
    pub target: Vec<f64>,
}

/// Runs one `(m, trial)` cell. The signal, matrix and observation streams are derived
/// from the trial seed under the labels `signal`, `matrix` and `observe`.
pub fn run_trial(cfg: &ExperimentConfig, tmap: &TargetMap, m: usize, trial: usize) -> Result<TrialOutcome> {
    let start = Instant::now();
    let tseed = seed::trial_seed(cfg.master_seed, m, trial);
    let x = gen_signal(&cfg.signal, seed::derive(tseed, "signal", &[]))?;
    let a = gen_matrix(&cfg.ensemble, m, seed::derive(tseed, "matrix", &[]))?;
    let batch = observe_batch(&cfg.model, &a, &x, &cfg.corruption, seed::derive(tseed, "observe", &[]))?;
    let tx = target_of(tmap, &x)?.value;
    let k = cfg.constraint.resolve(&tx)?;
    let (z, diag) = solve_lasso(&a, &batch.corrupted, &k, &cfg.solver)?;

    let dense = x.to_dense();
    let err_direction = if norm2(&dense) > 0.0 {
        direction_error(&z, &dense, norm2(&tx))?
    } else {
        f64::NAN
    };
    let support_match = match cfg.signal.family {
        SignalFamily::GradientSparse => None,
        _ if cfg.signal.s == 0 => None,
        _ => Some(support_recover(&z, cfg.signal.s)? == x.support()),
    };
    let record = TrialRecord {
        model: cfg.model.tag().to_string(),
        p: cfg.signal.p,
        s: cfg.signal.s,
        m,
        trial,
        seed: tseed,
        err_l2: dist2(&z, &tx),
        err_direction,
        support_match,
        iterations: diag.iterations,
        converged: diag.converged,
        wall_ms: cfg.record_timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    };
    Ok(TrialOutcome {
        record,
        estimate: z,
        target: tx,
    })
}

/// Runs every `(m, trial)` cell; rows come back ordered by `(m, trial)`.
pub fn run_records(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let tmap = match &cfg.target {
        Some(t) => t.clone(),
        None => default_target_map(&cfg.model, cfg.ensemble.law)?,
    };
    let jobs: Vec<(usize, usize)> = cfg
        .m_grid
        .iter()
        .flat_map(|&m| (0..cfg.trials).map(move |t| (m, t)))
        .collect();
    let work = || {
        jobs.par_iter()
            .map(|&(m, t)| {
                let rec = run_trial(cfg, &tmap, m, t)?.record;
                log::debug!("m={m} trial={t} err_l2={:.3e} iters={}", rec.err_l2, rec.iterations);
                Ok(rec)
            })
            .collect::<Result<Vec<_>>>()
    };
    match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Writes records to `path` through a temporary file in the same directory, so the final
/// path either holds a complete CSV or is untouched.
pub fn write_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let text = records_to_csv(records)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    tmp.as_file_mut().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// `run_records` followed by an atomic write to `out` (or the configured output path).
pub fn run_experiment(cfg: &ExperimentConfig, out: Option<&Path>, opts: RunOptions) -> Result<Vec<TrialRecord>> {
    let path = out
        .or(cfg.output.as_deref())
        .ok_or_else(|| Error::schema("output", "no output path given"))?
        .to_path_buf();
    let records = run_records(cfg, opts)?;
    write_csv(&records, &path)?;
    Ok(records)
}

/// The CSV text `write_csv` persists.
pub fn records_to_csv(records: &[TrialRecord]) -> Result<String> {
    let mut buf = Vec::new();
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut buf);
        w.write_record(CSV_HEADER)?;
        for r in records {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io("<memory>", e))?;
    }
    let mut s = String::from_utf8(buf).expect("csv output is utf-8");
    if !s.ends_with('\n') {
        s.push('\n');
    }
    Ok(s)
}
