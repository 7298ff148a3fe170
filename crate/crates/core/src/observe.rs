//! Output functions, dithering, and adversarial corruption of observation vectors.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::model::{AdversarialMode, CorruptionSpec, ObservationModel, Signal};
use crate::seed::{self, SimRng};

/// `sign(u)` with the convention `sign(0) = +1`.
#[inline]
pub fn sign_val(u: f64) -> f64 {
    if u < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Uniform quantizer `q_δ(v) = (2⌈v/(2δ)⌉ − 1)δ` onto the grid `δ(2ℤ − 1)`.
pub fn uniform_quantize(v: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("resolution δ must be > 0, got {delta}")));
    }
    Ok(quantize_unchecked(v, delta))
}

#[inline]
pub(crate) fn quantize_unchecked(v: f64, delta: f64) -> f64 {
    (2.0 * (v / (2.0 * delta)).ceil() - 1.0) * delta
}

/// Modulo non-linearity `m_λ(v) = v − ⌊(v+λ)/(2λ)⌋·2λ`, with values in `[−λ, λ)`.
pub fn modulo_val(v: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("half-period λ must be > 0, got {lambda}")));
    }
    Ok(modulo_unchecked(v, lambda))
}

#[inline]
pub(crate) fn modulo_unchecked(v: f64, lambda: f64) -> f64 {
    let period = 2.0 * lambda;
    let r = v - ((v + lambda) / period).floor() * period;
    // rounding in the quotient can land exactly on the open end
    if r >= lambda {
        r - period
    } else if r < -lambda {
        r + period
    } else {
        r
    }
}

#[inline]
fn coord_wise(v: f64, gain: f64) -> f64 {
    v + gain * v.tanh()
}

/// Draws the dither vector a model needs, if any.
fn draw_dither(model: &ObservationModel, m: usize, rng: &mut SimRng) -> Option<Vec<f64>> {
    let half = match *model {
        ObservationModel::OneBitDither { lambda } => lambda,
        ObservationModel::MultiBitDither { delta } => delta,
        _ => return None,
    };
    let u = Uniform::new_inclusive(-half, half).expect("validated width");
    Some((0..m).map(|_| u.sample(rng)).collect())
}

/// Clean observations of `x` for every row of `a`, plus the realized dither.
///
/// `dither_rng` and `noise_rng` drive the dither and the statistical noise of
/// `LinearGaussNoise`; they are independent of the rows.
pub(crate) fn respond(
    model: &ObservationModel,
    a: &Matrix,
    x: &Signal,
    dither_rng: &mut SimRng,
    noise_rng: &mut SimRng,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    model.validate()?;
    if x.dim() != a.cols() {
        return Err(Error::InvalidDimension(format!(
            "signal has dimension {} but the matrix has {} columns",
            x.dim(),
            a.cols()
        )));
    }
    let m = a.rows();
    let dither = draw_dither(model, m, dither_rng);

    if let ObservationModel::VarSelect { link, s } = *model {
        let Signal::Support { indices, .. } = x else {
            return Err(Error::ModelMismatch(
                "the variable-selection model observes index sets".into(),
            ));
        };
        let scale = 1.0 / (s as f64).sqrt();
        let y = a
            .row_iter()
            .map(|row| scale * indices.iter().map(|&j| link.apply(row[j])).sum::<f64>())
            .collect();
        return Ok((y, None));
    }

    let xv = x.as_vector()?;
    let y: Vec<f64> = match *model {
        ObservationModel::CoordWise { gain } => a
            .row_iter()
            .map(|row| row.iter().zip(xv).map(|(aj, xj)| coord_wise(aj * xj, gain)).sum())
            .collect(),
        _ => {
            let z = a.mul_vec(xv);
            match *model {
                ObservationModel::Linear => z,
                ObservationModel::LinearGaussNoise { sigma } => z
                    .into_iter()
                    .map(|zi| {
                        let e: f64 = StandardNormal.sample(noise_rng);
                        zi + sigma * e
                    })
                    .collect(),
                ObservationModel::OneBit => z.into_iter().map(sign_val).collect(),
                ObservationModel::OneBitDither { .. } => {
                    let tau = dither.as_ref().expect("dither drawn");
                    z.iter().zip(tau).map(|(zi, ti)| sign_val(zi + ti)).collect()
                }
                ObservationModel::MultiBitDither { delta } => {
                    let tau = dither.as_ref().expect("dither drawn");
                    z.iter()
                        .zip(tau)
                        .map(|(zi, ti)| quantize_unchecked(zi + ti, delta))
                        .collect()
                }
                ObservationModel::Modulo { lambda } => {
                    z.into_iter().map(|zi| modulo_unchecked(zi, lambda)).collect()
                }
                ObservationModel::Sim { link } => z.into_iter().map(|zi| link.apply(zi)).collect(),
                ObservationModel::CoordWise { .. } | ObservationModel::VarSelect { .. } => {
                    unreachable!("handled above")
                }
            }
        }
    };
    Ok((y, dither))
}

/// Clean observation vector `ỹ(x)`; entry `i` is the output function applied to `(a_i, x)`.
///
/// Dither and statistical noise are seeded from `(seed, "dither")` and `(seed, "noise")`,
/// so they are independent of however `a` was generated.
pub fn observe(model: &ObservationModel, a: &Matrix, x: &Signal, seed: u64) -> Result<Vec<f64>> {
    observe_with_dither(model, a, x, seed).map(|(y, _)| y)
}

pub fn observe_with_dither(
    model: &ObservationModel,
    a: &Matrix,
    x: &Signal,
    seed: u64,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let mut dither_rng = seed::child_rng(seed, "dither", &[]);
    let mut noise_rng = seed::child_rng(seed, "noise", &[]);
    respond(model, a, x, &mut dither_rng, &mut noise_rng)
}

/// Record of everything `corrupt` injected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorruptionLog {
    /// Indices whose sign was flipped, ascending.
    pub flipped: Vec<usize>,
    /// Realized `(1/m Σ ν_i²)^{1/2}` of the dense ℓ₂ component.
    pub l2_rms: f64,
    /// `(index, added value)` for each gross outlier, ascending by index.
    pub outliers: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationBatch {
    pub clean: Vec<f64>,
    pub corrupted: Vec<f64>,
    pub dither: Option<Vec<f64>>,
    pub corruption_log: CorruptionLog,
}

/// Indices of the `k` largest `|w_i|`, ties to the lowest index.
fn largest_k(w: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..w.len()).collect();
    idx.sort_by(|&i, &j| w[j].abs().total_cmp(&w[i].abs()).then(i.cmp(&j)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Applies a corruption recipe to a clean observation vector.
///
/// Bit flips act first (binary models only), then the dense ℓ₂ component, then
/// gross outliers; each stage is recorded separately in the log.
pub fn corrupt(
    clean: &[f64],
    spec: &CorruptionSpec,
    model: &ObservationModel,
    x: &Signal,
    a: &Matrix,
    seed: u64,
) -> Result<(Vec<f64>, CorruptionLog)> {
    let m = clean.len();
    spec.validate(m)?;
    if a.rows() != m {
        return Err(Error::InvalidDimension(format!(
            "{} observations for a matrix with {} rows",
            m,
            a.rows()
        )));
    }
    let mut y = clean.to_vec();
    let mut log = CorruptionLog::default();
    if spec.is_empty() {
        return Ok((y, log));
    }
    let aligned = spec.adversarial_mode == AdversarialMode::AlignedWithSignal;
    let projections = if aligned {
        let xd = x.to_dense();
        if xd.len() != a.cols() {
            return Err(Error::InvalidDimension("signal and matrix disagree".into()));
        }
        Some(a.row_iter().map(|row| dot(row, &xd)).collect::<Vec<f64>>())
    } else {
        None
    };
    let mut rng = seed::child_rng(seed, "corruption", &[]);

    let flips = spec.flip_count(m);
    if flips > 0 {
        if !model.is_binary() || clean.iter().any(|v| v.abs() != 1.0) {
            return Err(Error::ModelMismatch(format!(
                "bit flips need binary observations, model `{}` is not binary",
                model.tag()
            )));
        }
        log.flipped = match &projections {
            Some(z) => largest_k(z, flips),
            None => {
                let mut v = index::sample(&mut rng, m, flips).into_vec();
                v.sort_unstable();
                v
            }
        };
        for &i in &log.flipped {
            y[i] = -y[i];
        }
    }

    if spec.l2_budget > 0.0 {
        let nu: Vec<f64> = match &projections {
            Some(z) => z.iter().map(|zi| spec.l2_budget * zi).collect(),
            None => {
                let g: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = crate::linalg::norm2(&g);
                let c = spec.l2_budget * (m as f64).sqrt() / norm;
                g.into_iter().map(|v| c * v).collect()
            }
        };
        log.l2_rms = (crate::linalg::sum_squares(nu.iter().copied()) / m as f64).sqrt();
        for (yi, ni) in y.iter_mut().zip(&nu) {
            *yi += ni;
        }
    }

    if spec.gross_outliers > 0 {
        let victims = match &projections {
            Some(z) => largest_k(z, spec.gross_outliers),
            None => {
                let mut v = index::sample(&mut rng, m, spec.gross_outliers).into_vec();
                v.sort_unstable();
                v
            }
        };
        for i in victims {
            let sign = match &projections {
                // push against the signal
                Some(z) => -sign_val(z[i]),
                None => {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            let delta = sign * spec.outlier_magnitude;
            y[i] += delta;
            log.outliers.push((i, delta));
        }
    }
    Ok((y, log))
}

/// Observes `x` and corrupts the result; corruption randomness is seeded from
/// `(seed, "corruption")`.
pub fn observe_batch(
    model: &ObservationModel,
    a: &Matrix,
    x: &Signal,
    spec: &CorruptionSpec,
    seed: u64,
) -> Result<ObservationBatch> {
    let (clean, dither) = observe_with_dither(model, a, x, seed)?;
    let (corrupted, corruption_log) = corrupt(&clean, spec, model, x, a, seed)?;
    Ok(ObservationBatch {
        clean,
        corrupted,
        dither,
        corruption_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use crate::model::{gen_matrix, gen_signal, EnsembleLaw, MeasurementEnsemble, SignalFamily, SignalSpec};
    use proptest::prelude::*;

    #[test]
    fn sign_convention() {
        assert_eq!(sign_val(0.0), 1.0);
        assert_eq!(sign_val(-0.0), 1.0);
        assert_eq!(sign_val(-0.3), -1.0);
        assert_eq!(sign_val(2.0), 1.0);
    }

    #[test]
    fn quantizer_examples() {
        assert_eq!(uniform_quantize(0.5, 1.0).unwrap(), 1.0);
        assert_eq!(uniform_quantize(-0.5, 1.0).unwrap(), -1.0);
        assert_eq!(uniform_quantize(2.0, 1.0).unwrap(), 1.0);
        assert!(matches!(uniform_quantize(1.0, 0.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn modulo_examples() {
        assert_eq!(modulo_val(0.0, 3.0).unwrap(), 0.0);
        assert_eq!(modulo_val(1.5, 1.0).unwrap(), -0.5);
        assert_eq!(modulo_val(0.7, 1.0).unwrap(), 0.7);
        assert_eq!(modulo_val(-0.999, 1.0).unwrap(), -0.999);
        assert_eq!(modulo_val(1.0, 1.0).unwrap(), -1.0);
        assert!(modulo_val(1.0, -1.0).is_err());
    }

    #[test]
    fn modulo_periodicity_exact_on_dyadic_grid() {
        for &lambda in &[0.5, 1.0, 2.0] {
            for &v in &[-0.75, -0.25, 0.0, 0.375, 0.4375] {
                let base = modulo_val(v, lambda).unwrap();
                for k in [-1_000_000i64, -12345, -1, 1, 7, 999_999, 1_000_000] {
                    let shifted = v + 2.0 * k as f64 * lambda;
                    assert_eq!(modulo_val(shifted, lambda).unwrap(), base, "λ={lambda} v={v} k={k}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn quantizer_cell_and_grid(v in -1e3f64..1e3, delta in 1e-3f64..10.0) {
            let q = uniform_quantize(v, delta).unwrap();
            prop_assert!((q - v).abs() <= delta * (1.0 + 1e-12));
            let odd = q / delta;
            prop_assert!((odd - odd.round()).abs() < 1e-9);
            prop_assert_eq!(odd.round().rem_euclid(2.0), 1.0);
        }

        #[test]
        fn modulo_range_and_periodicity(v in -1e4f64..1e4, lambda in 1e-2f64..10.0, k in -1000i64..1000) {
            let r = modulo_val(v, lambda).unwrap();
            prop_assert!(r >= -lambda && r < lambda);
            let shifted = modulo_val(v + 2.0 * k as f64 * lambda, lambda).unwrap();
            let diff = (shifted - r).abs();
            // either equal up to rounding or wrapped across the seam
            prop_assert!(diff < 1e-8 || (diff - 2.0 * lambda).abs() < 1e-8);
        }

        #[test]
        fn coord_wise_growth(v in -20f64..20.0, w in -20f64..20.0) {
            let (hi, lo) = if v > w { (v, w) } else { (w, v) };
            let d = coord_wise(hi, 0.5) - coord_wise(lo, 0.5);
            prop_assert!(d >= (hi - lo) * (1.0 - 1e-12) - 1e-12);
            prop_assert!(d <= 1.5 * (hi - lo) * (1.0 + 1e-12) + 1e-12);
            if v >= 0.0 {
                prop_assert!(coord_wise(v, 0.5) >= v && coord_wise(v, 0.5) <= 1.5 * v + 1e-15);
            }
        }
    }

    #[test]
    fn linear_and_one_bit_examples() {
        let a = Matrix::from_rows(&[vec![1.0, -1.0], vec![2.0, 0.5]]).unwrap();
        let x = Signal::Vector(vec![0.0, 1.0]);
        assert_eq!(observe(&ObservationModel::Linear, &a, &x, 0).unwrap(), vec![-1.0, 0.5]);
        assert_eq!(observe(&ObservationModel::OneBit, &a, &x, 0).unwrap(), vec![-1.0, 1.0]);
    }

    #[test]
    fn dither_stays_in_interval_and_is_independent_of_matrix_seed() {
        let ens = MeasurementEnsemble::new(EnsembleLaw::Gaussian, 8);
        let a = gen_matrix(&ens, 500, 1).unwrap();
        let x = gen_signal(&SignalSpec::new(SignalFamily::UnitSphere, 8, 2), 2).unwrap();
        let model = ObservationModel::MultiBitDither { delta: 0.25 };
        let (_, tau) = observe_with_dither(&model, &a, &x, 3).unwrap();
        let tau = tau.unwrap();
        assert!(tau.iter().all(|t| t.abs() <= 0.25));
        let b = gen_matrix(&ens, 500, 99).unwrap();
        let (_, tau_b) = observe_with_dither(&model, &b, &x, 3).unwrap();
        assert_eq!(tau, tau_b.unwrap());
    }

    #[test]
    fn var_select_needs_index_set() {
        let a = Matrix::identity(3);
        let model = ObservationModel::VarSelect {
            link: crate::model::VarSelectLink::Linear,
            s: 2,
        };
        assert!(matches!(
            observe(&model, &a, &Signal::Vector(vec![1.0, 0.0, 0.0]), 0),
            Err(Error::ModelMismatch(_))
        ));
        let y = observe(&model, &a, &Signal::Support { p: 3, indices: vec![0, 2] }, 0).unwrap();
        let c = 1.0 / 2f64.sqrt();
        assert_eq!(y, vec![c, 0.0, c]);
    }

    fn setup(m: usize) -> (Matrix, Signal) {
        let ens = MeasurementEnsemble::new(EnsembleLaw::Gaussian, 16);
        let a = gen_matrix(&ens, m, 10).unwrap();
        let x = gen_signal(&SignalSpec::new(SignalFamily::Sparse, 16, 3).with_tuning(2.0), 11).unwrap();
        (a, x)
    }

    #[test]
    fn empty_corruption_is_identity() {
        let (a, x) = setup(50);
        let y = observe(&ObservationModel::Linear, &a, &x, 1).unwrap();
        let (z, log) = corrupt(&y, &CorruptionSpec::none(), &ObservationModel::Linear, &x, &a, 1).unwrap();
        assert_eq!(y, z);
        assert_eq!(log, CorruptionLog::default());
    }

    #[test]
    fn bit_flips_are_exact() {
        let (a, x) = setup(100);
        let model = ObservationModel::OneBit;
        let y = observe(&model, &a, &x, 1).unwrap();
        for mode in [AdversarialMode::Random, AdversarialMode::AlignedWithSignal] {
            let spec = CorruptionSpec {
                bitflip_frac: 0.05,
                adversarial_mode: mode,
                ..Default::default()
            };
            let (z, log) = corrupt(&y, &spec, &model, &x, &a, 2).unwrap();
            let hamming = y.iter().zip(&z).filter(|(u, v)| u != v).count();
            assert_eq!(hamming, 5);
            assert_eq!(log.flipped.len(), 5);
            let l1: f64 = y.iter().zip(&z).map(|(u, v)| (u - v).abs()).sum();
            assert_eq!(l1 / 2.0, 5.0);
            assert!(y.iter().zip(&z).all(|(u, v)| [-2.0, 0.0, 2.0].contains(&(v - u))));
        }
    }

    #[test]
    fn bit_flip_on_real_valued_model_is_rejected() {
        let (a, x) = setup(20);
        let y = observe(&ObservationModel::Linear, &a, &x, 1).unwrap();
        let spec = CorruptionSpec {
            bitflip_frac: 0.1,
            ..Default::default()
        };
        assert!(matches!(
            corrupt(&y, &spec, &ObservationModel::Linear, &x, &a, 1),
            Err(Error::ModelMismatch(_))
        ));
    }

    #[test]
    fn l2_budget_is_met_exactly_and_outliers_counted() {
        let (a, x) = setup(400);
        let model = ObservationModel::Linear;
        let y = observe(&model, &a, &x, 1).unwrap();
        let spec = CorruptionSpec {
            l2_budget: 0.3,
            ..Default::default()
        };
        let (z, log) = corrupt(&y, &spec, &model, &x, &a, 5).unwrap();
        let rms = (y.iter().zip(&z).map(|(u, v)| (u - v).powi(2)).sum::<f64>() / 400.0).sqrt();
        assert!((rms - 0.3).abs() < 1e-12);
        assert!((log.l2_rms - 0.3).abs() < 1e-12);

        let spec = CorruptionSpec {
            gross_outliers: 7,
            outlier_magnitude: 10.0,
            ..Default::default()
        };
        let (z, log) = corrupt(&y, &spec, &model, &x, &a, 5).unwrap();
        let touched = y.iter().zip(&z).filter(|(u, v)| u != v).count();
        assert_eq!(touched, 7);
        assert_eq!(log.outliers.len(), 7);
        assert!(log.outliers.iter().all(|(i, d)| d.abs() == 10.0 && (z[*i] - y[*i] - d).abs() < 1e-12));
        assert!(corrupt(
            &y,
            &CorruptionSpec {
                gross_outliers: 401,
                ..Default::default()
            },
            &model,
            &x,
            &a,
            5
        )
        .is_err());
    }

    #[test]
    fn aligned_noise_scales_with_signal_norm() {
        let m = 10_000;
        let (a, x) = setup(m);
        let model = ObservationModel::Linear;
        let y = observe(&model, &a, &x, 1).unwrap();
        let ct = 0.2;
        let spec = CorruptionSpec {
            l2_budget: ct,
            adversarial_mode: AdversarialMode::AlignedWithSignal,
            ..Default::default()
        };
        let (_, log) = corrupt(&y, &spec, &model, &x, &a, 3).unwrap();
        let expect = ct * norm2(&x.to_dense());
        assert!((log.l2_rms - expect).abs() <= 0.1 * expect);
    }
}
