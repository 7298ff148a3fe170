//! Monte-Carlo Gaussian mean widths.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::montecarlo::{mc_scalar, Moments, CHUNK};
use crate::error::{Error, Result};
use crate::geometry::{support_max, support_max_local};
use crate::linalg::{dot, norm2};
use crate::model::ConstraintSet;
use crate::seed::{self, SimRng};

/// Sets whose width can be estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WidthSet {
    Constraint { set: ConstraintSet, p: usize },
    /// A finite point cloud; suprema are taken relative to the first point.
    Points { points: Vec<Vec<f64>> },
    /// The unit sphere `S^{p−1}`.
    Sphere { p: usize },
}

impl WidthSet {
    pub fn dim(&self) -> Result<usize> {
        let p = match self {
            WidthSet::Constraint { p, .. } | WidthSet::Sphere { p } => *p,
            WidthSet::Points { points } => {
                let first = points
                    .first()
                    .ok_or_else(|| Error::EmptyInput("point set has no points".into()))?;
                if points.iter().any(|v| v.len() != first.len()) {
                    return Err(Error::InvalidDimension("points differ in length".into()));
                }
                first.len()
            }
        };
        if p == 0 {
            return Err(Error::InvalidDimension("dimension must be ≥ 1".into()));
        }
        Ok(p)
    }

    /// `sup_{v ∈ H} ⟨g, v⟩` (shifted by the first point for point clouds).
    pub fn sup(&self, g: &[f64]) -> Result<f64> {
        match self {
            WidthSet::Constraint { set, .. } => Ok(support_max(set, f64::INFINITY, g)?.value),
            WidthSet::Sphere { .. } => Ok(norm2(g)),
            WidthSet::Points { points } => {
                let base = dot(g, &points[0]);
                Ok(points[1..].iter().map(|v| dot(g, v) - base).fold(0.0, f64::max))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WidthKind {
    Global,
    Local { t: f64 },
    /// Local width at a small scale, standing in for the conic width.
    ConicApprox { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub kind: WidthKind,
}

fn gaussian(rng: &mut SimRng, p: usize) -> Vec<f64> {
    (0..p).map(|_| StandardNormal.sample(rng)).collect()
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {n}")));
    }
    Ok(())
}

/// `w(H) = E sup_{v∈H} ⟨g, v⟩`.
pub fn mean_width_global(set: &WidthSet, n: usize, seed: u64) -> Result<WidthEstimate> {
    check_n(n)?;
    let p = set.dim()?;
    if let WidthSet::Constraint { set: k, .. } = set {
        k.validate()?;
    }
    let mo = mc_scalar(n, seed, |rng| set.sup(&gaussian(rng, p)))?;
    Ok(WidthEstimate {
        value: mo.mean,
        stderr: mo.stderr(),
        n_samples: n,
        kind: WidthKind::Global,
    })
}

/// `(1/t)·E[sup ⟨g, v⟩ over (K − c) ∩ tB₂]`, an upper proxy of the local mean width.
pub fn mean_width_local(k: &ConstraintSet, center: &[f64], t: f64, n: usize, seed: u64) -> Result<WidthEstimate> {
    check_n(n)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale t must be > 0, got {t}")));
    }
    k.validate()?;
    if !k.contains(center, 1e-9) {
        return Err(Error::InfeasibleCenter);
    }
    let p = center.len();
    let mo = mc_scalar(n, seed, |rng| Ok(support_max_local(k, center, t, &gaussian(rng, p))?.value / t))?;
    Ok(WidthEstimate {
        value: mo.mean,
        stderr: mo.stderr(),
        n_samples: n,
        kind: WidthKind::Local { t },
    })
}

/// Local width at `t = 1e−3·diam(K)`; unbounded sets use `1e−3·max(‖c‖₂, 1)`.
pub fn mean_width_conic(k: &ConstraintSet, center: &[f64], n: usize, seed: u64) -> Result<WidthEstimate> {
    let diam = match *k {
        ConstraintSet::L1Ball { radius } | ConstraintSet::L2Ball { radius } => 2.0 * radius,
        ConstraintSet::Box { lo, hi } => (hi - lo) * (center.len() as f64).sqrt(),
        ConstraintSet::TvBall { .. } | ConstraintSet::FullSpace => norm2(center).max(1.0),
    };
    let t = 1e-3 * diam;
    if !(t > 0.0) {
        return Err(Error::DegenerateInput("the set has zero diameter".into()));
    }
    let mut est = mean_width_local(k, center, t, n, seed)?;
    est.kind = WidthKind::ConicApprox { t };
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecouplingProbe {
    /// `(1/t)·E max_c sup ⟨g, v⟩` over `(K − c) ∩ tB₂`, maximized over centers per draw.
    pub lhs: f64,
    /// `max_c w_t(K − c) + w(L)/t`.
    pub rhs: f64,
    pub ratio: f64,
    pub n_samples: usize,
}

/// Compares the width of a union of localized sets with the sum of its parts, using
/// common Gaussian draws for every term.
pub fn decoupling_probe(
    k: &ConstraintSet,
    centers: &[Vec<f64>],
    t: f64,
    n: usize,
    seed: u64,
) -> Result<DecouplingProbe> {
    check_n(n)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale t must be > 0, got {t}")));
    }
    let cloud = WidthSet::Points {
        points: centers.to_vec(),
    };
    let p = cloud.dim()?;
    for c in centers {
        if !k.contains(c, 1e-9) {
            return Err(Error::InfeasibleCenter);
        }
    }
    let count = n.div_ceil(CHUNK);
    let parts: Vec<(Moments, Vec<Moments>, Moments)> = (0..count)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(n - c * CHUNK);
            let mut rng = seed::child_rng(seed, "chunk", &[c as u64]);
            let mut lhs = Moments::default();
            let mut per = vec![Moments::default(); centers.len()];
            let mut wl = Moments::default();
            for _ in 0..len {
                let g = gaussian(&mut rng, p);
                let mut best = f64::NEG_INFINITY;
                for (mo, ctr) in per.iter_mut().zip(centers) {
                    let v = support_max_local(k, ctr, t, &g)?.value / t;
                    mo.push(v);
                    best = best.max(v);
                }
                lhs.push(best);
                wl.push(cloud.sup(&g)? / t);
            }
            Ok((lhs, per, wl))
        })
        .collect::<Result<_>>()?;
    let mut lhs = Moments::default();
    let mut per = vec![Moments::default(); centers.len()];
    let mut wl = Moments::default();
    for (l, pc, w) in parts {
        lhs = lhs.merge(l);
        for (a, b) in per.iter_mut().zip(pc) {
            *a = a.merge(b);
        }
        wl = wl.merge(w);
    }
    let rhs = per.iter().map(|m| m.mean).fold(f64::NEG_INFINITY, f64::max) + wl.mean;
    let ratio = if rhs > 0.0 {
        lhs.mean / rhs
    } else if lhs.mean <= 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(DecouplingProbe {
        lhs: lhs.mean,
        rhs,
        ratio,
        n_samples: n,
    })
}
