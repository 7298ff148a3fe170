//! Chunked Monte-Carlo estimators whose results do not depend on the thread count.

use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::{gaussian_expectation, CUTOFF};
use crate::error::{Error, Result};
use crate::linalg::{norm2, Matrix};
use crate::model::{EnsembleLaw, Link, ObservationModel, Signal};
use crate::observe::{quantize_unchecked, respond, sign_val};
use crate::seed::{self, SimRng};

/// Samples per chunk; each chunk owns an RNG derived from `(seed, chunk index)`.
pub(crate) const CHUNK: usize = 4096;

/// Half-width multiplier of every reported standard error.
pub const Z95: f64 = 1.96;

/// Running mean and centered second moment.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub n: f64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(self, o: Moments) -> Moments {
        if o.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }

    /// `1.96·sd/√n`
    pub fn stderr(&self) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        Z95 * (self.m2 / (self.n - 1.0)).sqrt() / self.n.sqrt()
    }
}

fn chunks(n: usize) -> impl IndexedParallelIterator<Item = (usize, usize)> {
    let count = n.div_ceil(CHUNK);
    (0..count).into_par_iter().map(move |c| (c, CHUNK.min(n - c * CHUNK)))
}

/// Mean and stderr of `sample(rng)` over `n` draws.
pub(crate) fn mc_scalar(
    n: usize,
    seed: u64,
    sample: impl Fn(&mut SimRng) -> Result<f64> + Sync,
) -> Result<Moments> {
    let parts: Vec<Moments> = chunks(n)
        .map(|(c, len)| {
            let mut rng = seed::child_rng(seed, "chunk", &[c as u64]);
            let mut mo = Moments::default();
            for _ in 0..len {
                mo.push(sample(&mut rng)?);
            }
            Ok(mo)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().fold(Moments::default(), Moments::merge))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarMethod {
    /// Composite Gauss–Legendre over `[-12, 12]`, split at the link's discontinuities,
    /// `nodes` points per panel.
    Quadrature { nodes: usize },
    MonteCarlo { n: usize, seed: u64 },
}

impl Default for ScalarMethod {
    fn default() -> Self {
        ScalarMethod::Quadrature { nodes: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarTarget {
    pub mu: f64,
    pub method: ScalarMethod,
    pub stderr: Option<f64>,
}

/// `μ = E[f(g)g]` for `g ~ N(0, 1)`.
pub fn mu_scalar(link: Link, method: ScalarMethod) -> Result<ScalarTarget> {
    link.validate()?;
    match method {
        ScalarMethod::Quadrature { nodes } => {
            if nodes == 0 {
                return Err(Error::InvalidParameter("quadrature needs at least one node".into()));
            }
            let breaks = link.breakpoints(-CUTOFF, CUTOFF);
            let mu = gaussian_expectation(|g| link.apply(g) * g, &breaks, nodes);
            Ok(ScalarTarget {
                mu,
                method,
                stderr: None,
            })
        }
        ScalarMethod::MonteCarlo { n, seed } => {
            if n < 2 {
                return Err(Error::InvalidParameter("Monte-Carlo needs n ≥ 2".into()));
            }
            let mo = mc_scalar(n, seed, |rng| {
                let g: f64 = StandardNormal.sample(rng);
                Ok(link.apply(g) * g)
            })?;
            Ok(ScalarTarget {
                mu: mo.mean,
                method,
                stderr: Some(mo.stderr()),
            })
        }
    }
}

/// Per-coordinate sample mean of `ỹ(x)·a` and its stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanResponse {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n: usize,
}

/// Monte-Carlo estimate of `E[ỹ(x)a]` over fresh rows and dither.
pub fn mean_response(
    model: &ObservationModel,
    law: EnsembleLaw,
    x: &Signal,
    n: usize,
    seed: u64,
) -> Result<MeanResponse> {
    model.validate()?;
    if n < 2 {
        return Err(Error::InvalidParameter("Monte-Carlo needs n ≥ 2".into()));
    }
    let p = x.dim();
    let parts: Vec<Vec<Moments>> = chunks(n)
        .map(|(c, len)| {
            let mut rows = seed::child_rng(seed, "rows", &[c as u64]);
            let mut data = vec![0.0; len * p];
            law.fill(&mut rows, &mut data);
            let a = Matrix::from_vec(len, p, data)?;
            let mut dither = seed::child_rng(seed, "dither", &[c as u64]);
            let mut noise = seed::child_rng(seed, "noise", &[c as u64]);
            let (y, _) = respond(model, &a, x, &mut dither, &mut noise)?;
            let mut mo = vec![Moments::default(); p];
            for (yi, row) in y.iter().zip(a.row_iter()) {
                for (m, aj) in mo.iter_mut().zip(row) {
                    m.push(yi * aj);
                }
            }
            Ok(mo)
        })
        .collect::<Result<_>>()?;
    let mut acc = vec![Moments::default(); p];
    for part in parts {
        for (a, b) in acc.iter_mut().zip(part) {
            *a = a.merge(b);
        }
    }
    Ok(MeanResponse {
        mean: acc.iter().map(|m| m.mean).collect(),
        stderr: acc.iter().map(Moments::stderr).collect(),
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MismatchEstimate {
    pub rho_hat: f64,
    /// Norm of the per-coordinate stderr vector.
    pub stderr: f64,
    pub n_samples: usize,
}

/// `‖(1/n)Σ ỹ_k a_k − Tx‖₂`.
pub fn target_mismatch(
    model: &ObservationModel,
    law: EnsembleLaw,
    x: &Signal,
    tx: &[f64],
    n: usize,
    seed: u64,
) -> Result<MismatchEstimate> {
    if n < 1000 {
        return Err(Error::InvalidParameter(format!("target mismatch needs n ≥ 1000, got {n}")));
    }
    if tx.len() != x.dim() {
        return Err(Error::InvalidDimension("target and signal differ in length".into()));
    }
    let est = mean_response(model, law, x, n, seed)?;
    let diff: Vec<f64> = est.mean.iter().zip(tx).map(|(a, b)| a - b).collect();
    Ok(MismatchEstimate {
        rho_hat: norm2(&diff),
        stderr: norm2(&est.stderr),
        n_samples: n,
    })
}

/// Dithered scalar maps whose expectation over the dither is known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DitherIdentity {
    /// `E[q_δ(s + τ)] = s`, `τ ~ U[−δ, δ]`.
    Quantizer { delta: f64 },
    /// `E[sign(s + τ)] = s/λ` for `|s| ≤ λ`, `τ ~ U[−λ, λ]`.
    Sign { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub s: f64,
    pub expected: f64,
    pub estimate: f64,
    pub residual: f64,
    pub stderr: f64,
}

pub fn dither_identity(kind: DitherIdentity, s: f64, n: usize, seed: u64) -> Result<IdentityCheck> {
    if n < 2 {
        return Err(Error::InvalidParameter("Monte-Carlo needs n ≥ 2".into()));
    }
    let (half, expected) = match kind {
        DitherIdentity::Quantizer { delta } => (delta, s),
        DitherIdentity::Sign { lambda } => {
            if s.abs() > lambda {
                return Err(Error::InvalidParameter(format!("need |s| ≤ λ, got s = {s}, λ = {lambda}")));
            }
            (lambda, s / lambda)
        }
    };
    if !(half > 0.0 && half.is_finite()) {
        return Err(Error::InvalidParameter(format!("dither half-width must be > 0, got {half}")));
    }
    let u = Uniform::new_inclusive(-half, half).expect("validated width");
    let mo = mc_scalar(n, seed, |rng| {
        let tau = u.sample(rng);
        Ok(match kind {
            DitherIdentity::Quantizer { delta } => quantize_unchecked(s + tau, delta),
            DitherIdentity::Sign { .. } => sign_val(s + tau),
        })
    })?;
    Ok(IdentityCheck {
        s,
        expected,
        estimate: mo.mean,
        residual: mo.mean - expected,
        stderr: mo.stderr(),
    })
}
