//! Outlier norms, recovery errors, support recovery, stability probes and rate fits.

use crate::error::{Error, Result};
use crate::linalg::{dist2, norm2, sum_squares, Matrix};
use crate::model::{target_of, ObservationModel, Signal, TargetMap};
use crate::observe::observe;

/// Indices sorted by decreasing `|w_i|`, ties to the lower index.
fn order_by_magnitude(w: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..w.len()).collect();
    idx.sort_by(|&a, &b| w[b].abs().total_cmp(&w[a].abs()).then(a.cmp(&b)));
    idx
}

/// `(‖w‖_[m0], σ_{m0}(w)₂)`: norms of the `m0` largest-magnitude entries and of the rest.
pub fn outlier_split(w: &[f64], m0: usize) -> Result<(f64, f64)> {
    if m0 > w.len() {
        return Err(Error::InvalidParameter(format!(
            "m0 = {m0} exceeds the vector length {}",
            w.len()
        )));
    }
    let idx = order_by_magnitude(w);
    let top = sum_squares(idx[..m0].iter().map(|&i| w[i]));
    let tail = sum_squares(idx[m0..].iter().map(|&i| w[i]));
    Ok((top.sqrt(), tail.sqrt()))
}

pub fn top_norm(w: &[f64], m0: usize) -> Result<f64> {
    outlier_split(w, m0).map(|(t, _)| t)
}

pub fn tail_norm(w: &[f64], m0: usize) -> Result<f64> {
    outlier_split(w, m0).map(|(_, t)| t)
}

/// `‖ẑ − μ·x/‖x‖₂‖₂`
pub fn direction_error(z: &[f64], x: &[f64], mu: f64) -> Result<f64> {
    if z.len() != x.len() {
        return Err(Error::InvalidDimension("estimate and signal differ in length".into()));
    }
    let n = norm2(x);
    if n == 0.0 {
        return Err(Error::DegenerateInput("direction of the zero signal".into()));
    }
    let target: Vec<f64> = x.iter().map(|v| mu * v / n).collect();
    Ok(dist2(z, &target))
}

/// Indices of the `s` largest `|ẑ_j|` in increasing order.
pub fn support_recover(z: &[f64], s: usize) -> Result<Vec<usize>> {
    if s == 0 || s > z.len() {
        return Err(Error::InvalidParameter(format!("need 1 ≤ s ≤ {}, got {s}", z.len())));
    }
    let mut idx = order_by_magnitude(z);
    idx.truncate(s);
    idx.sort_unstable();
    Ok(idx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityProbe {
    /// `max ‖ỹ(x) − ỹ(x′)‖_[2m0] / √m`
    pub top: f64,
    /// `max σ_{m0}(ỹ(x) − ỹ(x′))₂ / √m`
    pub tail: f64,
}

/// Empirical maxima of the outlier functionals of observation differences over pairs
/// with `‖Tx − Tx′‖₂ ≤ eps`. Both signals of a pair share the dither.
pub fn local_stability_probe(
    model: &ObservationModel,
    tmap: &TargetMap,
    pairs: &[(Signal, Signal)],
    eps: f64,
    a: &Matrix,
    m0: usize,
    seed: u64,
) -> Result<StabilityProbe> {
    let m = a.rows();
    if m0 > m {
        return Err(Error::InvalidParameter(format!("m0 = {m0} exceeds m = {m}")));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("ε must be ≥ 0, got {eps}")));
    }
    let root_m = (m as f64).sqrt();
    let mut out = StabilityProbe { top: 0.0, tail: 0.0 };
    for (k, (x, xp)) in pairs.iter().enumerate() {
        let gap = dist2(&target_of(tmap, x)?.value, &target_of(tmap, xp)?.value);
        if gap > eps * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::InvalidParameter(format!(
                "pair {k} has ‖Tx − Tx′‖₂ = {gap} > ε = {eps}"
            )));
        }
        let y = observe(model, a, x, seed)?;
        let yp = observe(model, a, xp, seed)?;
        let w: Vec<f64> = y.iter().zip(&yp).map(|(u, v)| u - v).collect();
        let top = top_norm(&w, (2 * m0).min(m))?;
        let tail = tail_norm(&w, m0)?;
        out.top = out.top.max(top / root_m);
        out.tail = out.tail.max(tail / root_m);
    }
    Ok(out)
}

/// Least-squares slope of `log(error)` against `log(m)`.
///
/// Nonpositive errors are dropped with a warning. With `window = Some(k)` only the
/// points at the `k` largest distinct `m` are used.
pub fn fit_rate(points: &[(f64, f64)], window: Option<usize>) -> Result<f64> {
    let mut kept: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &(m, e) in points {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidParameter(format!("sample size must be > 0, got {m}")));
        }
        if e > 0.0 && e.is_finite() {
            kept.push((m, e));
        } else {
            log::warn!("fit_rate: dropping point (m = {m}, error = {e})");
        }
    }
    if let Some(k) = window {
        let mut ms: Vec<f64> = kept.iter().map(|p| p.0).collect();
        ms.sort_by(f64::total_cmp);
        ms.dedup();
        if k < ms.len() {
            let cut = ms[ms.len() - k];
            kept.retain(|p| p.0 >= cut);
        }
    }
    let first = kept.first().map(|p| p.0);
    if kept.len() < 2 || kept.iter().all(|p| Some(p.0) == first) {
        return Err(Error::FitImpossible(
            "need positive errors at two or more distinct sample sizes".into(),
        ));
    }
    let n = kept.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = kept.iter().map(|(m, e)| (m.ln(), e.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
