//! Domain types and random generation of signals and measurement ensembles.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm1, norm2, tv_norm, Matrix};
use crate::seed;

const MAX_REJECTIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalFamily {
    /// `s`-sparse vectors tuned to `‖x‖₁ = R`.
    Sparse,
    /// Piecewise-constant vectors with at most `s` Δ-separated jumps, `‖Dx‖₁ = R`.
    GradientSparse,
    /// `s`-sparse unit vectors (`s = p` gives the whole sphere).
    UnitSphere,
    /// Index sets `S ⊂ [p]` with `|S| = s`.
    Support,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub family: SignalFamily,
    pub p: usize,
    pub s: usize,
    #[serde(default = "one")]
    pub delta_sep: f64,
    #[serde(default = "one")]
    pub r_tune: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_l2: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl SignalSpec {
    pub fn new(family: SignalFamily, p: usize, s: usize) -> Self {
        Self {
            family,
            p,
            s,
            delta_sep: 1.0,
            r_tune: 1.0,
            r_l2: None,
        }
    }

    pub fn with_tuning(mut self, r: f64) -> Self {
        self.r_tune = r;
        self
    }

    pub fn with_separation(mut self, delta: f64) -> Self {
        self.delta_sep = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidDimension("signal dimension p must be ≥ 1".into()));
        }
        match self.family {
            SignalFamily::GradientSparse => {
                if self.s > self.p - 1 {
                    return Err(Error::InvalidParameter(format!(
                        "gradient-sparse signals allow at most p-1 = {} jumps, got s = {}",
                        self.p - 1,
                        self.s
                    )));
                }
                if !(self.delta_sep > 0.0 && self.delta_sep <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "separation Δ must lie in (0, 1], got {}",
                        self.delta_sep
                    )));
                }
                if !(self.r_tune >= 0.0 && self.r_tune.is_finite()) {
                    return Err(Error::InvalidParameter("tuning norm R must be ≥ 0".into()));
                }
            }
            _ => {
                if self.s == 0 || self.s > self.p {
                    return Err(Error::InvalidParameter(format!(
                        "sparsity must satisfy 1 ≤ s ≤ p = {}, got {}",
                        self.p, self.s
                    )));
                }
                if self.family == SignalFamily::Sparse
                    && !(self.r_tune > 0.0 && self.r_tune.is_finite())
                {
                    return Err(Error::InvalidParameter("tuning norm R must be > 0".into()));
                }
            }
        }
        if let Some(r) = self.r_l2 {
            if !(r > 0.0) {
                return Err(Error::InvalidParameter("ℓ₂ radius bound must be > 0".into()));
            }
        }
        Ok(())
    }

    /// Minimum admissible distance between consecutive jump positions.
    pub fn min_gap(&self) -> usize {
        (self.delta_sep * self.p as f64 / (self.s + 1) as f64 + 1e-12).floor() as usize
    }
}

/// A ground-truth signal: either a vector in `ℝ^p` or an index set (variable selection).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    Vector(Vec<f64>),
    Support { p: usize, indices: Vec<usize> },
}

impl Signal {
    pub fn dim(&self) -> usize {
        match self {
            Signal::Vector(v) => v.len(),
            Signal::Support { p, .. } => *p,
        }
    }

    pub fn as_vector(&self) -> Result<&[f64]> {
        match self {
            Signal::Vector(v) => Ok(v),
            Signal::Support { .. } => Err(Error::ModelMismatch(
                "expected a vector signal, got an index set".into(),
            )),
        }
    }

    /// The vector itself, or the indicator `1_S` of an index set.
    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            Signal::Vector(v) => v.clone(),
            Signal::Support { p, indices } => {
                let mut out = vec![0.0; *p];
                for &j in indices {
                    out[j] = 1.0;
                }
                out
            }
        }
    }

    /// Nonzero positions, sorted ascending.
    pub fn support(&self) -> Vec<usize> {
        match self {
            Signal::Vector(v) => (0..v.len()).filter(|&j| v[j] != 0.0).collect(),
            Signal::Support { indices, .. } => indices.clone(),
        }
    }
}

pub fn gen_signal(spec: &SignalSpec, seed: u64) -> Result<Signal> {
    spec.validate()?;
    let mut rng = seed::rng(seed);
    match spec.family {
        SignalFamily::Sparse => {
            let bound = spec.r_l2;
            for _ in 0..MAX_REJECTIONS {
                let x = sparse_direction(spec.p, spec.s, &mut rng, |v: f64| v.abs());
                let l1 = norm1(&x);
                if l1 == 0.0 {
                    continue;
                }
                let x: Vec<f64> = x.iter().map(|v| v * spec.r_tune / l1).collect();
                if bound.is_none_or(|b| norm2(&x) <= b) {
                    return Ok(Signal::Vector(x));
                }
            }
            Err(Error::ConstraintInfeasible(format!(
                "no s-sparse vector with ‖x‖₁ = {} found inside the ℓ₂ bound",
                spec.r_tune
            )))
        }
        SignalFamily::UnitSphere => {
            let x = sparse_direction(spec.p, spec.s, &mut rng, |v| v);
            let n = norm2(&x);
            Ok(Signal::Vector(x.iter().map(|v| v / n).collect()))
        }
        SignalFamily::Support => {
            let mut idx = index::sample(&mut rng, spec.p, spec.s).into_vec();
            idx.sort_unstable();
            Ok(Signal::Support {
                p: spec.p,
                indices: idx,
            })
        }
        SignalFamily::GradientSparse => gradient_sparse(spec, &mut rng).map(Signal::Vector),
    }
}

/// Random `s`-sparse vector with Gaussian entries mapped through `shape` and uniform signs.
fn sparse_direction<R: Rng>(p: usize, s: usize, rng: &mut R, shape: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut x = vec![0.0; p];
    for j in index::sample(rng, p, s) {
        let g: f64 = StandardNormal.sample(rng);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        // keep exact zeros out of the support
        let mag = shape(g);
        x[j] = sign * if mag == 0.0 { f64::MIN_POSITIVE } else { mag };
    }
    x
}

fn gradient_sparse<R: Rng>(spec: &SignalSpec, rng: &mut R) -> Result<Vec<f64>> {
    let p = spec.p;
    let s = spec.s;
    let l2_bound = spec.r_l2.unwrap_or(1.0);
    if s == 0 {
        if spec.r_tune != 0.0 {
            return Err(Error::ConstraintInfeasible(
                "a signal without jumps has ‖Dx‖₁ = 0, cannot match R > 0".into(),
            ));
        }
        let level: f64 = StandardNormal.sample(rng);
        let c = level / (level.abs() * (p as f64).sqrt() / l2_bound).max(1.0);
        return Ok(vec![c; p]);
    }
    if spec.r_tune == 0.0 {
        return Err(Error::ConstraintInfeasible(
            "R = 0 forces a constant signal but s ≥ 1 jumps were requested".into(),
        ));
    }
    let gap = spec.min_gap();
    if gap < 1 {
        return Err(Error::ConstraintInfeasible(format!(
            "separation ⌊Δp/(s+1)⌋ = 0 for Δ = {}, p = {p}, s = {s}",
            spec.delta_sep
        )));
    }
    let jumps = jump_positions(p, s, gap, rng);

    for _ in 0..MAX_REJECTIONS {
        let mut x = vec![0.0; p];
        let mut start = 0;
        let mut prev = f64::NAN;
        for &end in jumps.iter().chain(std::iter::once(&p)) {
            let mut level: f64 = StandardNormal.sample(rng);
            while level == prev {
                level = StandardNormal.sample(rng);
            }
            x[start..end].fill(level);
            prev = level;
            start = end;
        }
        // a constant shift leaves Dx unchanged; the mean-free version has least ℓ₂ norm
        let mean = x.iter().sum::<f64>() / p as f64;
        x.iter_mut().for_each(|v| *v -= mean);
        let tv = tv_norm(&x);
        x.iter_mut().for_each(|v| *v *= spec.r_tune / tv);
        if norm2(&x) <= l2_bound {
            return Ok(x);
        }
    }
    Err(Error::ConstraintInfeasible(format!(
        "could not draw a signal with ‖Dx‖₁ = {} and ‖x‖₂ ≤ {l2_bound}; lower R",
        spec.r_tune
    )))
}

/// Jump positions `ν₁ < … < ν_s` (a jump at `ν` means `x[ν] ≠ x[ν-1]`), jittered
/// around the equispaced grid while keeping every segment at least `gap` long.
fn jump_positions<R: Rng>(p: usize, s: usize, gap: usize, rng: &mut R) -> Vec<usize> {
    let spacing = p as f64 / (s + 1) as f64;
    let jitter = ((spacing - gap as f64) / 2.0).floor().max(0.0) as usize;
    let mut out = Vec::with_capacity(s);
    let mut prev = 0usize;
    for j in 1..=s {
        let grid = (j as f64 * spacing).round() as usize;
        let lo = (prev + gap).max(grid.saturating_sub(jitter));
        let hi = (p - (s + 1 - j) * gap).min(grid + jitter);
        let pos = if lo >= hi { lo.min(p - (s + 1 - j) * gap) } else { rng.random_range(lo..=hi) };
        out.push(pos);
        prev = pos;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleLaw {
    Gaussian,
    Rademacher,
    /// Uniform on `[-√3, √3]`, unit variance.
    UniformScaled,
}

impl EnsembleLaw {
    pub fn sample<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            EnsembleLaw::Gaussian => StandardNormal.sample(rng),
            EnsembleLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EnsembleLaw::UniformScaled => {
                let r = 3f64.sqrt();
                Uniform::new_inclusive(-r, r).expect("finite bounds").sample(rng)
            }
        }
    }

    pub fn fill<R: Rng>(self, rng: &mut R, out: &mut [f64]) {
        match self {
            EnsembleLaw::Gaussian => out.iter_mut().for_each(|v| *v = StandardNormal.sample(rng)),
            EnsembleLaw::Rademacher => out
                .iter_mut()
                .for_each(|v| *v = if rng.random::<bool>() { 1.0 } else { -1.0 }),
            EnsembleLaw::UniformScaled => {
                let r = 3f64.sqrt();
                let u = Uniform::new_inclusive(-r, r).expect("finite bounds");
                out.iter_mut().for_each(|v| *v = u.sample(rng));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementEnsemble {
    pub law: EnsembleLaw,
    pub p: usize,
    /// Sub-Gaussian proxy `L`; informational only.
    #[serde(default = "one")]
    pub subg_param: f64,
}

impl MeasurementEnsemble {
    pub fn new(law: EnsembleLaw, p: usize) -> Self {
        Self {
            law,
            p,
            subg_param: 1.0,
        }
    }
}

pub fn gen_matrix(ens: &MeasurementEnsemble, m: usize, seed: u64) -> Result<Matrix> {
    if m == 0 {
        return Err(Error::InvalidDimension("number of measurements m must be ≥ 1".into()));
    }
    if ens.p == 0 {
        return Err(Error::InvalidDimension("ensemble dimension p must be ≥ 1".into()));
    }
    let mut rng = seed::rng(seed);
    let mut data = vec![0.0; m * ens.p];
    ens.law.fill(&mut rng, &mut data);
    Matrix::from_vec(m, ens.p, data)
}

/// Scalar non-linearities of single-index models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Link {
    Identity,
    Sign,
    Tanh,
    Modulo { lambda: f64 },
}

impl Link {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Link::Identity => v,
            Link::Sign => crate::observe::sign_val(v),
            Link::Tanh => v.tanh(),
            Link::Modulo { lambda } => crate::observe::modulo_unchecked(v, lambda),
        }
    }

    /// Lipschitz constant `γ`, `None` for discontinuous links.
    pub fn lipschitz(self) -> Option<f64> {
        match self {
            Link::Identity | Link::Tanh => Some(1.0),
            Link::Sign | Link::Modulo { .. } => None,
        }
    }

    /// Discontinuities of the link inside `[lo, hi]`.
    pub fn breakpoints(self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            Link::Identity | Link::Tanh => vec![],
            Link::Sign => {
                if lo < 0.0 && 0.0 < hi {
                    vec![0.0]
                } else {
                    vec![]
                }
            }
            Link::Modulo { lambda } => {
                let k_lo = ((lo / lambda - 1.0) / 2.0).ceil() as i64;
                let k_hi = ((hi / lambda - 1.0) / 2.0).floor() as i64;
                (k_lo..=k_hi)
                    .map(|k| (2 * k + 1) as f64 * lambda)
                    .filter(|b| lo < *b && *b < hi)
                    .collect()
            }
        }
    }

    pub fn validate(self) -> Result<()> {
        match self {
            Link::Modulo { lambda } if !(lambda > 0.0) => Err(Error::InvalidParameter(format!(
                "modulo half-period λ must be > 0, got {lambda}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Output function of the variable-selection model, `f(a_S) = s^{-1/2} Σ_{j∈S} φ(a_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarSelectLink {
    Linear,
    Tanh,
}

impl VarSelectLink {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            VarSelectLink::Linear => v,
            VarSelectLink::Tanh => v.tanh(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservationModel {
    Linear,
    LinearGaussNoise { sigma: f64 },
    OneBit,
    OneBitDither { lambda: f64 },
    MultiBitDither { delta: f64 },
    Modulo { lambda: f64 },
    Sim { link: Link },
    /// `y = Σ_j f_j(a_j x_j)` with `f_j(v) = v + gain·tanh(v)`.
    CoordWise { gain: f64 },
    VarSelect { link: VarSelectLink, s: usize },
}

/// Growth and Lipschitz parameters of a coordinate-wise distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordWiseParams {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: f64,
}

/// Balancing parameters of a variable-selection output function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarSelectParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub kappa: f64,
}

impl ObservationModel {
    pub fn tag(&self) -> &'static str {
        match self {
            ObservationModel::Linear => "linear",
            ObservationModel::LinearGaussNoise { .. } => "linear_gauss_noise",
            ObservationModel::OneBit => "one_bit",
            ObservationModel::OneBitDither { .. } => "one_bit_dither",
            ObservationModel::MultiBitDither { .. } => "multi_bit_dither",
            ObservationModel::Modulo { .. } => "modulo",
            ObservationModel::Sim { .. } => "sim",
            ObservationModel::CoordWise { .. } => "coord_wise",
            ObservationModel::VarSelect { .. } => "var_select",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
            }
        };
        match *self {
            ObservationModel::LinearGaussNoise { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                Err(Error::InvalidParameter(format!("σ must be ≥ 0, got {sigma}")))
            }
            ObservationModel::OneBitDither { lambda } | ObservationModel::Modulo { lambda } => {
                positive("λ", lambda)
            }
            ObservationModel::MultiBitDither { delta } => positive("δ", delta),
            ObservationModel::Sim { link } => link.validate(),
            ObservationModel::CoordWise { gain } if !(gain >= 0.0 && gain.is_finite()) => Err(
                Error::InvalidParameter(format!("coordinate-wise gain must be ≥ 0, got {gain}")),
            ),
            ObservationModel::VarSelect { s: 0, .. } => {
                Err(Error::InvalidParameter("variable-selection sparsity s must be ≥ 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Whether clean observations take values in `{-1, +1}`.
    pub fn is_binary(&self) -> bool {
        matches!(
            self,
            ObservationModel::OneBit
                | ObservationModel::OneBitDither { .. }
                | ObservationModel::Sim { link: Link::Sign }
        )
    }

    pub fn coord_wise_params(&self) -> Option<CoordWiseParams> {
        match *self {
            ObservationModel::CoordWise { gain } => Some(CoordWiseParams {
                alpha: 1.0,
                beta1: 1.0,
                beta2: 1.0 + gain,
                gamma: 1.0 + gain,
            }),
            _ => None,
        }
    }

    /// Balancing parameters for the built-in variable-selection links under a given law.
    ///
    /// For the linear link `(TS)_j = s^{-1/2}` on `S`, so `α = β = 1`; the increment is
    /// `s^{-1/2}Σ_{S△S'} ±a_j` which gives `γ = L`, and `κ = L`. The tanh link scales the
    /// target by `E[tanh(a)a]`.
    pub fn var_select_params(&self, law: EnsembleLaw, subg: f64) -> Option<VarSelectParams> {
        match *self {
            ObservationModel::VarSelect { link, .. } => {
                let c = match link {
                    VarSelectLink::Linear => 1.0,
                    VarSelectLink::Tanh => crate::analysis::law_expectation(law, |a| a.tanh() * a),
                };
                Some(VarSelectParams {
                    alpha: c,
                    beta: c,
                    gamma: subg,
                    kappa: subg,
                })
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSet {
    L1Ball { radius: f64 },
    L2Ball { radius: f64 },
    /// `{v : ‖Dv‖₁ ≤ radius}`
    TvBall { radius: f64 },
    /// The cube `[lo, hi]^p`.
    Box { lo: f64, hi: f64 },
    FullSpace,
}

impl ConstraintSet {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ConstraintSet::L1Ball { radius }
            | ConstraintSet::L2Ball { radius }
            | ConstraintSet::TvBall { radius }
                if !(radius > 0.0 && radius.is_finite()) =>
            {
                Err(Error::InvalidParameter(format!("radius must be > 0, got {radius}")))
            }
            ConstraintSet::Box { lo, hi } if !(lo <= hi && lo.is_finite() && hi.is_finite()) => {
                Err(Error::InvalidParameter(format!("box bounds must satisfy lo ≤ hi, got [{lo}, {hi}]")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, ConstraintSet::FullSpace | ConstraintSet::TvBall { .. })
    }

    /// Constraint residual of `x`: how far the defining inequality is violated.
    pub fn residual(&self, x: &[f64]) -> f64 {
        match *self {
            ConstraintSet::L1Ball { radius } => (norm1(x) - radius).max(0.0),
            ConstraintSet::L2Ball { radius } => (norm2(x) - radius).max(0.0),
            ConstraintSet::TvBall { radius } => (tv_norm(x) - radius).max(0.0),
            ConstraintSet::Box { lo, hi } => x
                .iter()
                .map(|&v| (lo - v).max(v - hi).max(0.0))
                .fold(0.0, f64::max),
            ConstraintSet::FullSpace => 0.0,
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.residual(x) <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversarialMode {
    #[default]
    Random,
    /// Noise aligned with `⟨a_i, x̊⟩`; bit flips hit the most confident measurements.
    AlignedWithSignal,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CorruptionSpec {
    /// Fraction `β` of binary observations whose sign is flipped.
    pub bitflip_frac: f64,
    /// Normalized ℓ₂ budget `b = (1/m Σ ν_i²)^{1/2}` (in aligned mode the factor `c·t`).
    pub l2_budget: f64,
    /// Number `m₀` of gross outliers.
    pub gross_outliers: usize,
    pub outlier_magnitude: f64,
    pub adversarial_mode: AdversarialMode,
}

impl CorruptionSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.bitflip_frac == 0.0 && self.l2_budget == 0.0 && self.gross_outliers == 0
    }

    pub fn flip_count(&self, m: usize) -> usize {
        (self.bitflip_frac * m as f64 + 1e-9).floor() as usize
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.bitflip_frac) {
            return Err(Error::InvalidParameter(format!(
                "bit-flip fraction β must lie in [0, 1], got {}",
                self.bitflip_frac
            )));
        }
        if !(self.l2_budget >= 0.0 && self.l2_budget.is_finite()) {
            return Err(Error::InvalidParameter("ℓ₂ budget must be ≥ 0".into()));
        }
        if self.gross_outliers > m {
            return Err(Error::InvalidParameter(format!(
                "m₀ = {} gross outliers exceed m = {m}",
                self.gross_outliers
            )));
        }
        if !self.outlier_magnitude.is_finite() {
            return Err(Error::InvalidParameter("outlier magnitude must be finite".into()));
        }
        Ok(())
    }
}

/// The map `T` sending a signal to the vector the Lasso actually approximates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetMap {
    /// `x ↦ μ·x` (index sets map to `μ·1_S`).
    ScaleBy { mu: f64 },
    /// `x ↦ μ·x/‖x‖₂`
    NormalizeScale { mu: f64 },
    Identity,
    /// Monte-Carlo estimate of `E[ỹ(x)a]`.
    MonteCarlo {
        model: ObservationModel,
        law: EnsembleLaw,
        n: usize,
        seed: u64,
    },
    /// Exact `(Tx)_j = E[f_j(x_j a) a]` for the coordinate-wise model with independent
    /// coordinates, evaluated by one-dimensional quadrature.
    CoordWiseExact { gain: f64, law: EnsembleLaw },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetValue {
    pub value: Vec<f64>,
    /// Per-coordinate standard error (Monte-Carlo only).
    pub stderr: Option<Vec<f64>>,
}

pub fn target_of(tmap: &TargetMap, x: &Signal) -> Result<TargetValue> {
    let exact = |value| Ok(TargetValue { value, stderr: None });
    match tmap {
        TargetMap::Identity => exact(x.to_dense()),
        TargetMap::ScaleBy { mu } => exact(x.to_dense().iter().map(|v| mu * v).collect()),
        TargetMap::NormalizeScale { mu } => {
            let d = x.to_dense();
            let n = norm2(&d);
            if n == 0.0 {
                return Err(Error::DegenerateInput("cannot normalize the zero vector".into()));
            }
            exact(d.iter().map(|v| mu * v / n).collect())
        }
        TargetMap::MonteCarlo { model, law, n, seed } => {
            let est = crate::analysis::mean_response(model, *law, x, *n, *seed)?;
            Ok(TargetValue {
                value: est.mean,
                stderr: Some(est.stderr),
            })
        }
        TargetMap::CoordWiseExact { gain, law } => {
            let v = x.as_vector()?;
            exact(
                v.iter()
                    .map(|&xj| {
                        crate::analysis::law_expectation(*law, |a| (xj * a + gain * (xj * a).tanh()) * a)
                    })
                    .collect(),
            )
        }
    }
}
