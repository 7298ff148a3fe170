//! Per-`m` medians, quartiles and fitted decay rates of a results CSV.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::analysis::fit_rate;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub m: usize,
    pub n: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    /// Fraction of trials with metric `≤ t`, when an accuracy target is given.
    pub success: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    /// Values of the grouping columns, in the order requested.
    pub key: Vec<String>,
    pub rows: Vec<RateRow>,
    /// Log-log slope of the medians against `m`; `None` when no fit is possible.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SummaryOptions<'a> {
    pub group_keys: &'a [&'a str],
    pub metric: &'a str,
    pub window: Option<usize>,
    pub accuracy_target: Option<f64>,
}

impl Default for SummaryOptions<'_> {
    fn default() -> Self {
        Self {
            group_keys: &["model", "p", "s"],
            metric: "err_direction",
            window: None,
            accuracy_target: None,
        }
    }
}

/// Linearly interpolated quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize_reader<R: std::io::Read>(reader: R, opts: &SummaryOptions) -> Result<Vec<GroupSummary>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
    let headers = match rdr.headers() {
        Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].is_empty()) => h.clone(),
        Ok(_) => return Err(Error::EmptyInput("the CSV has no header".into())),
        Err(e) => return Err(Error::Format(e.to_string())),
    };
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("missing column `{name}`")))
    };
    let m_col = col("m")?;
    let metric_col = col(opts.metric)?;
    let key_cols: Vec<usize> = opts.group_keys.iter().map(|k| col(k)).collect::<Result<_>>()?;

    let mut groups: BTreeMap<Vec<String>, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        rows += 1;
        let m: usize = rec[m_col]
            .parse()
            .map_err(|_| Error::Format(format!("row {rows}: `m` is not an integer")))?;
        let key: Vec<String> = key_cols.iter().map(|&c| rec[c].to_string()).collect();
        let bucket = groups.entry(key).or_default().entry(m).or_default();
        let raw = &rec[metric_col];
        if raw.is_empty() {
            continue;
        }
        let v: f64 = raw
            .parse()
            .map_err(|_| Error::Format(format!("row {rows}: `{}` is not a number", opts.metric)))?;
        if !v.is_nan() {
            bucket.push(v);
        }
    }
    if rows == 0 {
        return Err(Error::EmptyInput("the CSV has no data rows".into()));
    }

    Ok(groups
        .into_iter()
        .map(|(key, by_m)| {
            let rows: Vec<RateRow> = by_m
                .into_iter()
                .filter(|(_, v)| !v.is_empty())
                .map(|(m, mut v)| {
                    v.sort_by(f64::total_cmp);
                    RateRow {
                        m,
                        n: v.len(),
                        median: quantile(&v, 0.5),
                        q25: quantile(&v, 0.25),
                        q75: quantile(&v, 0.75),
                        success: opts
                            .accuracy_target
                            .map(|t| v.iter().filter(|e| **e <= t).count() as f64 / v.len() as f64),
                    }
                })
                .collect();
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.m as f64, r.median)).collect();
            let slope = fit_rate(&pts, opts.window).ok();
            GroupSummary { key, rows, slope }
        })
        .collect())
}

/// Reads a results CSV and summarizes `opts.metric` per group and per `m`.
pub fn summarize(path: &Path, opts: &SummaryOptions) -> Result<Vec<GroupSummary>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    summarize_reader(file, opts)
}

/// Plain-text table of a summary.
pub fn render(groups: &[GroupSummary], opts: &SummaryOptions) -> String {
    let mut out = String::new();
    for g in groups {
        let label: Vec<String> = opts
            .group_keys
            .iter()
            .zip(&g.key)
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        out.push_str(&format!("# {} metric={}\n", label.join(" "), opts.metric));
        out.push_str("m,n,median,q25,q75");
        if opts.accuracy_target.is_some() {
            out.push_str(",success");
        }
        out.push('\n');
        for r in &g.rows {
            out.push_str(&format!("{},{},{:.6e},{:.6e},{:.6e}", r.m, r.n, r.median, r.q25, r.q75));
            if let Some(s) = r.success {
                out.push_str(&format!(",{s:.3}"));
            }
            out.push('\n');
        }
        match g.slope {
            Some(s) => out.push_str(&format!("slope,{s:.6}\n")),
            None => out.push_str("slope,NA\n"),
        }
    }
    out
}
