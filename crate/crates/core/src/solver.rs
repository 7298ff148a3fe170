//! Projected gradient descent for the constrained least-squares (generalized Lasso)
//! program `min_{z ∈ K} (1/m)‖y − Az‖₂²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::project;
use crate::linalg::{dist2, dot, norm2, Matrix};
use crate::model::ConstraintSet;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `η = safety·m/(2‖A‖²_op)`
    #[default]
    FixedInverseLipschitz,
    /// Armijo backtracking along the projection arc, halving from twice the previous step.
    Backtracking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Stop when `‖z_{k+1} − z_k‖₂ ≤ rel_tol·‖z_{k+1}‖₂`.
    pub rel_tol: f64,
    pub step_rule: StepRule,
    pub safety_factor: f64,
    /// Keep the full objective trace in the diagnostics.
    pub record_trace: bool,
    /// Power iterations used for the Lipschitz constant.
    pub power_iters: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            rel_tol: 1e-9,
            step_rule: StepRule::FixedInverseLipschitz,
            safety_factor: 0.9,
            record_trace: false,
            power_iters: 200,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be ≥ 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter("rel_tol must be > 0".into()));
        }
        if !(self.safety_factor > 0.0 && self.safety_factor <= 1.0) {
            return Err(Error::InvalidParameter("safety_factor must lie in (0, 1]".into()));
        }
        if self.power_iters == 0 {
            return Err(Error::InvalidParameter("power_iters must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    /// `(1/m)‖y − Aẑ‖₂²` at the returned point.
    pub objective: f64,
    pub trace: Option<Vec<f64>>,
    pub converged: bool,
    /// `‖ẑ − P_K(ẑ − η∇)‖₂` at the returned point.
    pub stationarity: f64,
    pub step_size: f64,
}

fn power_iteration(p: usize, iters: usize, seed: u64, mut apply: impl FnMut(&[f64], &mut [f64])) -> f64 {
    let mut rng = seed::child_rng(seed, "power", &[]);
    let mut v = vec![0.0; p];
    crate::model::EnsembleLaw::Gaussian.fill(&mut rng, &mut v);
    let mut w = vec![0.0; p];
    let mut estimate = 0.0;
    for _ in 0..iters {
        let n = norm2(&v);
        if n == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= n);
        apply(&v, &mut w);
        estimate = dot(&v, &w);
        std::mem::swap(&mut v, &mut w);
    }
    estimate
}

/// Power-iteration estimate of `‖A‖²_op`, the top eigenvalue of `AᵀA`.
pub fn spectral_norm_sq(a: &Matrix, iters: usize, seed: u64) -> f64 {
    let mut tmp = vec![0.0; a.rows()];
    power_iteration(a.cols(), iters.max(1), seed, |v, out| {
        a.mul_vec_into(v, &mut tmp);
        a.tmul_vec_into(&tmp, out);
    })
}

/// The least-squares loss in whichever form is cheaper to iterate with.
enum Loss<'a> {
    /// `zᵀGz − 2bᵀz + c` with `G = AᵀA/m`, `b = Aᵀy/m`, `c = ‖y‖²/m`.
    Gram { g: Matrix, b: Vec<f64>, c: f64 },
    Direct { a: &'a Matrix, y: &'a [f64], resid: Vec<f64> },
}

impl Loss<'_> {
    /// Writes `∇f(z)` into `grad` and returns `f(z)`.
    fn eval(&mut self, z: &[f64], grad: &mut [f64]) -> f64 {
        match self {
            Loss::Gram { g, b, c } => {
                g.mul_vec_into(z, grad);
                let quad = dot(z, grad);
                let lin = dot(b, z);
                for (gi, bi) in grad.iter_mut().zip(b.iter()) {
                    *gi = 2.0 * (*gi - bi);
                }
                (quad - 2.0 * lin + *c).max(0.0)
            }
            Loss::Direct { a, y, resid } => {
                let m = a.rows() as f64;
                a.mul_vec_into(z, resid);
                for (r, yi) in resid.iter_mut().zip(y.iter()) {
                    *r -= yi;
                }
                a.tmul_vec_into(resid, grad);
                grad.iter_mut().for_each(|v| *v *= 2.0 / m);
                dot(resid, resid) / m
            }
        }
    }

    fn value(&mut self, z: &[f64], scratch: &mut [f64]) -> f64 {
        self.eval(z, scratch)
    }
}

/// Minimizes `(1/m)‖y − Az‖₂²` over `z ∈ K` starting from `P_K(0)`.
///
/// Non-convergence is not an error: the best iterate comes back with `converged = false`.
pub fn solve_lasso(
    a: &Matrix,
    y: &[f64],
    k: &ConstraintSet,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, SolveDiagnostics)> {
    let init = project(k, &vec![0.0; a.cols()]).point;
    solve_lasso_from(a, y, k, opts, &init)
}

pub fn solve_lasso_from(
    a: &Matrix,
    y: &[f64],
    k: &ConstraintSet,
    opts: &SolveOptions,
    init: &[f64],
) -> Result<(Vec<f64>, SolveDiagnostics)> {
    opts.validate()?;
    k.validate()?;
    let (m, p) = (a.rows(), a.cols());
    if y.len() != m {
        return Err(Error::InvalidDimension(format!(
            "{} observations for {m} measurement rows",
            y.len()
        )));
    }
    if init.len() != p {
        return Err(Error::InvalidDimension("initial point has the wrong length".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("observations must be finite".into()));
    }
    let mf = m as f64;

    let use_gram = p <= 2 * m;
    let (mut loss, op_norm_sq) = if use_gram {
        let g = a.gram(mf);
        let b: Vec<f64> = a.tmul_vec(y).into_iter().map(|v| v / mf).collect();
        let c = dot(y, y) / mf;
        let lam = power_iteration(p, opts.power_iters, seed::derive(0, "step", &[m as u64, p as u64]), |v, out| {
            g.mul_vec_into(v, out)
        });
        (Loss::Gram { g, b, c }, lam * mf)
    } else {
        let lam = spectral_norm_sq(a, opts.power_iters, seed::derive(0, "step", &[m as u64, p as u64]));
        (
            Loss::Direct {
                a,
                y,
                resid: vec![0.0; m],
            },
            lam,
        )
    };
    // gradient Lipschitz constant 2‖A‖²/m
    let lipschitz = 2.0 * op_norm_sq / mf;
    let fixed_step = if lipschitz > 0.0 {
        opts.safety_factor / lipschitz
    } else {
        1.0
    };

    let mut z = project(k, init).point;
    let mut grad = vec![0.0; p];
    let mut scratch = vec![0.0; p];
    let mut obj = loss.eval(&z, &mut grad);
    let mut trace = opts.record_trace.then(|| vec![obj]);
    let mut best = (obj, z.clone());
    let mut step = fixed_step;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..opts.max_iters {
        iterations += 1;
        let (next, next_obj) = match opts.step_rule {
            StepRule::FixedInverseLipschitz => {
                let trial: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi - step * gi).collect();
                let next = project(k, &trial).point;
                let f = loss.value(&next, &mut scratch);
                (next, f)
            }
            StepRule::Backtracking => {
                let mut eta = (2.0 * step).min(1e8);
                let mut accepted = None;
                for _ in 0..80 {
                    let trial: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi - eta * gi).collect();
                    let cand = project(k, &trial).point;
                    let f = loss.value(&cand, &mut scratch);
                    let decrease: f64 = grad.iter().zip(cand.iter().zip(&z)).map(|(g, (c, zi))| g * (c - zi)).sum();
                    if f <= obj + 1e-4 * decrease {
                        accepted = Some((cand, f));
                        break;
                    }
                    eta *= 0.5;
                }
                step = eta;
                match accepted {
                    Some(v) => v,
                    None => {
                        // no admissible step: we are at machine-precision stationarity
                        converged = true;
                        break;
                    }
                }
            }
        };
        let change = dist2(&next, &z);
        let scale = norm2(&next);
        z = next;
        obj = loss.eval(&z, &mut grad);
        debug_assert!((obj - next_obj).abs() <= 1e-9 * (1.0 + obj.abs()));
        if let Some(t) = trace.as_mut() {
            t.push(obj);
        }
        if obj <= best.0 {
            best = (obj, z.clone());
        }
        if change <= opts.rel_tol * scale.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    let (_, z_best) = best;
    let z = if converged { z } else { z_best };
    let objective = loss.eval(&z, &mut grad);
    let trial: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi - fixed_step * gi).collect();
    let stationarity = dist2(&z, &project(k, &trial).point);
    let objective = match loss {
        // report the loss from the residual so it is exact rather than cancelled
        Loss::Gram { .. } => {
            let r = a.mul_vec(&z);
            r.iter().zip(y).map(|(ri, yi)| (ri - yi).powi(2)).sum::<f64>() / mf
        }
        Loss::Direct { .. } => objective,
    };
    Ok((
        z,
        SolveDiagnostics {
            iterations,
            objective,
            trace,
            converged,
            stationarity,
            step_size: step,
        },
    ))
}
