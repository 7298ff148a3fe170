//! Exact Euclidean projections onto the constraint sets and the support-function
//! maximizers used by mean-width estimation.

mod tv;

pub use tv::{collapse_threshold, tv_prox};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm1, norm2, norm_inf};
use crate::model::ConstraintSet;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub point: Vec<f64>,
    /// Whether the constraint was binding.
    pub active: bool,
    /// Inner solver evaluations (TV prox calls); zero for closed forms.
    pub iterations: usize,
}

impl ProjectionResult {
    fn inactive(x: &[f64]) -> Self {
        Self {
            point: x.to_vec(),
            active: false,
            iterations: 0,
        }
    }
}

/// Euclidean projection of `x` onto `set`. Points already inside are returned unchanged.
pub fn project(set: &ConstraintSet, x: &[f64]) -> ProjectionResult {
    match *set {
        ConstraintSet::FullSpace => ProjectionResult::inactive(x),
        ConstraintSet::L2Ball { radius } => {
            let n = norm2(x);
            if n <= radius {
                ProjectionResult::inactive(x)
            } else {
                let c = radius / n;
                ProjectionResult {
                    point: x.iter().map(|v| v * c).collect(),
                    active: true,
                    iterations: 0,
                }
            }
        }
        ConstraintSet::L1Ball { radius } => {
            if norm1(x) <= radius {
                ProjectionResult::inactive(x)
            } else {
                ProjectionResult {
                    point: project_l1_ball(x, radius),
                    active: true,
                    iterations: 0,
                }
            }
        }
        ConstraintSet::Box { lo, hi } => {
            if x.iter().all(|v| (lo..=hi).contains(v)) {
                ProjectionResult::inactive(x)
            } else {
                ProjectionResult {
                    point: x.iter().map(|v| v.clamp(lo, hi)).collect(),
                    active: true,
                    iterations: 0,
                }
            }
        }
        ConstraintSet::TvBall { radius } => {
            if crate::linalg::tv_norm(x) <= radius {
                ProjectionResult::inactive(x)
            } else {
                let (point, iterations) = tv::project_tv_ball(x, radius);
                ProjectionResult {
                    point,
                    active: true,
                    iterations,
                }
            }
        }
    }
}

/// Soft-threshold level `θ` with `Σ(|x_i| − θ)₊ = radius`, by sorting magnitudes.
fn l1_threshold(x: &[f64], radius: f64) -> f64 {
    let mut u: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - radius) / (j + 1) as f64;
        if uj > t {
            theta = t;
        } else {
            break;
        }
    }
    theta.max(0.0)
}

fn project_l1_ball(x: &[f64], radius: f64) -> Vec<f64> {
    let theta = l1_threshold(x, radius);
    x.iter().map(|&v| soft(v, theta)).collect()
}

#[inline]
fn soft(v: f64, theta: f64) -> f64 {
    v.signum() * (v.abs() - theta).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportResult {
    pub value: f64,
    pub argmax: Vec<f64>,
}

/// `max ⟨g, v⟩` over `{v ∈ set : ‖v‖₂ ≤ l2_cap}`; pass `f64::INFINITY` for no cap.
pub fn support_max(set: &ConstraintSet, l2_cap: f64, g: &[f64]) -> Result<SupportResult> {
    if !(l2_cap > 0.0) {
        return Err(Error::InvalidParameter(format!("ℓ₂ cap must be > 0, got {l2_cap}")));
    }
    match *set {
        ConstraintSet::L1Ball { radius } if l2_cap.is_finite() && radius > l2_cap => {
            Ok(l1_capped_support(radius, l2_cap, g))
        }
        // ‖v‖₂ ≤ ‖v‖₁ ≤ radius ≤ cap: the cap never binds
        ConstraintSet::L1Ball { .. } => {
            let (value, argmax) = uncapped_support(set, g)?;
            Ok(SupportResult { value, argmax })
        }
        ConstraintSet::L2Ball { radius } => {
            let r = radius.min(l2_cap);
            Ok(ball_support(r, g))
        }
        ConstraintSet::FullSpace if l2_cap.is_finite() => Ok(ball_support(l2_cap, g)),
        _ => support_max_local(set, &vec![0.0; g.len()], l2_cap, g),
    }
}

/// `max ⟨g, v − c⟩` over `{v ∈ set : ‖v − c‖₂ ≤ l2_cap}`, i.e. the support function of
/// `(set − c) ∩ l2_cap·B₂`. Returns the maximizing displacement `v − c`.
pub fn support_max_local(
    set: &ConstraintSet,
    center: &[f64],
    l2_cap: f64,
    g: &[f64],
) -> Result<SupportResult> {
    if !(l2_cap > 0.0) {
        return Err(Error::InvalidParameter(format!("ℓ₂ cap must be > 0, got {l2_cap}")));
    }
    if center.len() != g.len() {
        return Err(Error::InvalidDimension("center and direction differ in length".into()));
    }
    if !set.contains(center, 1e-9) {
        return Err(Error::InfeasibleCenter);
    }
    if g.iter().all(|v| *v == 0.0) {
        return Ok(SupportResult {
            value: 0.0,
            argmax: vec![0.0; g.len()],
        });
    }
    if !l2_cap.is_finite() {
        let (value, point) = uncapped_support(set, g)?;
        let argmax: Vec<f64> = point.iter().zip(center).map(|(v, c)| v - c).collect();
        return Ok(SupportResult {
            value: value - dot(g, center),
            argmax,
        });
    }
    if let ConstraintSet::FullSpace = set {
        return Ok(ball_support(l2_cap, g));
    }
    Ok(capped_support_by_path(set, center, l2_cap, g))
}

fn ball_support(radius: f64, g: &[f64]) -> SupportResult {
    let n = norm2(g);
    if n == 0.0 {
        return SupportResult {
            value: 0.0,
            argmax: vec![0.0; g.len()],
        };
    }
    SupportResult {
        value: radius * n,
        argmax: g.iter().map(|v| radius * v / n).collect(),
    }
}

fn first_argmax_abs(g: &[f64]) -> usize {
    let mut best = 0;
    for (j, v) in g.iter().enumerate() {
        if v.abs() > g[best].abs() {
            best = j;
        }
    }
    best
}

/// Closed-form support function of an uncapped set.
fn uncapped_support(set: &ConstraintSet, g: &[f64]) -> Result<(f64, Vec<f64>)> {
    let p = g.len();
    match *set {
        ConstraintSet::L1Ball { radius } => {
            let j = first_argmax_abs(g);
            let mut v = vec![0.0; p];
            v[j] = radius * if g[j] < 0.0 { -1.0 } else { 1.0 };
            Ok((radius * norm_inf(g), v))
        }
        ConstraintSet::L2Ball { radius } => {
            let r = ball_support(radius, g);
            Ok((r.value, r.argmax))
        }
        ConstraintSet::Box { lo, hi } => {
            let v: Vec<f64> = g.iter().map(|&gj| if gj > 0.0 { hi } else { lo }).collect();
            Ok((dot(g, &v), v))
        }
        ConstraintSet::FullSpace => Err(Error::Unbounded(
            "the whole space has no finite support function".into(),
        )),
        ConstraintSet::TvBall { radius } => {
            // only directions orthogonal to the constants are bounded; Dᵀw = g gives w = −cumsum(g)
            let total: f64 = g.iter().sum();
            if total.abs() > 1e-12 * norm1(g) {
                return Err(Error::Unbounded(
                    "TV ball is unbounded along constants and g has a nonzero mean".into(),
                ));
            }
            let mut run = 0.0;
            let mut best = (0usize, 0.0f64);
            for (k, gk) in g[..p - 1].iter().enumerate() {
                run -= gk;
                if run.abs() > best.1.abs() {
                    best = (k, run);
                }
            }
            let (k, wk) = best;
            let step = radius * if wk < 0.0 { -1.0 } else { 1.0 };
            let v: Vec<f64> = (0..p).map(|i| if i > k { step } else { 0.0 }).collect();
            Ok((radius * wk.abs(), v))
        }
    }
}

/// ℓ₁ ball intersected with a centered ℓ₂ ball, `radius > cap`: KKT gives
/// `v = cap · soft(g, θ)/‖soft(g, θ)‖₂` with the smallest `θ` making `‖v‖₁ ≤ radius`.
fn l1_capped_support(radius: f64, cap: f64, g: &[f64]) -> SupportResult {
    let n2 = norm2(g);
    if n2 == 0.0 {
        return SupportResult {
            value: 0.0,
            argmax: vec![0.0; g.len()],
        };
    }
    let ratio = |theta: f64| {
        let s: Vec<f64> = g.iter().map(|&v| soft(v, theta)).collect();
        let l2 = norm2(&s);
        (norm1(&s) / l2, s, l2)
    };
    let target = radius / cap;
    let (r0, s0, l0) = ratio(0.0);
    let (s, l2) = if r0 <= target {
        (s0, l0)
    } else {
        // ratio decreases to 1 as θ → ‖g‖_∞; since target > 1 a root exists
        let mut lo = 0.0;
        let mut hi = norm_inf(g);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ratio(mid).0 > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        let (_, s, l2) = ratio(hi);
        (s, l2)
    };
    let v: Vec<f64> = s.iter().map(|x| cap * x / l2).collect();
    SupportResult {
        value: dot(g, &v),
        argmax: v,
    }
}

/// Generic capped support via the projection path `ρ ↦ P_K(c + ρg)`.
///
/// For `c ∈ K`, `‖P_K(c + ρg) − c‖` is nondecreasing in `ρ`, and the maximizer of
/// `⟨g, v⟩` over `K ∩ (c + tB₂)` is `P_K(c + ρ*g)` at the `ρ*` where the path reaches
/// distance `t` (or the end of the path when the cap never binds).
fn capped_support_by_path(set: &ConstraintSet, center: &[f64], cap: f64, g: &[f64]) -> SupportResult {
    let gn = norm2(g);
    let step = |rho: f64| -> (Vec<f64>, f64) {
        let z: Vec<f64> = center.iter().zip(g).map(|(c, gi)| c + rho * gi).collect();
        let v = project(set, &z).point;
        let d: Vec<f64> = v.iter().zip(center).map(|(a, c)| a - c).collect();
        let n = norm2(&d);
        (d, n)
    };
    let finish = |d: Vec<f64>| SupportResult {
        value: dot(g, &d),
        argmax: d,
    };

    let mut rho_lo = cap / gn;
    let (mut d_lo, n_lo) = step(rho_lo);
    if n_lo >= cap * (1.0 - 1e-14) {
        return finish(d_lo);
    }
    let mut rho_hi = rho_lo;
    let mut found = false;
    for _ in 0..80 {
        rho_hi *= 2.0;
        let (d, n) = step(rho_hi);
        if n > cap {
            found = true;
            break;
        }
        rho_lo = rho_hi;
        d_lo = d;
    }
    if !found {
        // cap never binds: the path has converged onto the maximizing face
        return finish(d_lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (rho_lo + rho_hi);
        let (d, n) = step(mid);
        if n > cap {
            rho_hi = mid;
        } else {
            rho_lo = mid;
            d_lo = d;
            if cap - n <= 1e-13 * cap {
                break;
            }
        }
        if rho_hi - rho_lo <= 1e-15 * rho_hi {
            break;
        }
    }
    finish(d_lo)
}
