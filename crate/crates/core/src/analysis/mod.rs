//! Diagnostic quantities: target scalars, target mismatch, mean widths, outlier norms,
//! error metrics, support recovery, stability probes and rate fits.
//!
//! Every Monte-Carlo estimate reports `1.96·sd/√n` as its stderr and is computed in
//! fixed-size chunks with per-chunk seeds, so results do not depend on the thread count.

mod metrics;
mod montecarlo;
mod quadrature;
mod width;

pub use metrics::{
    direction_error, fit_rate, local_stability_probe, outlier_split, support_recover, tail_norm, top_norm,
    StabilityProbe,
};
pub use montecarlo::{
    dither_identity, mean_response, mu_scalar, target_mismatch, DitherIdentity, IdentityCheck, MeanResponse,
    MismatchEstimate, ScalarMethod, ScalarTarget, Z95,
};
pub use quadrature::{gauss_legendre, gaussian_expectation, integrate, law_expectation};
pub use width::{
    decoupling_probe, mean_width_conic, mean_width_global, mean_width_local, DecouplingProbe, WidthEstimate,
    WidthKind, WidthSet,
};

use crate::error::Result;
use crate::model::{EnsembleLaw, Link, ObservationModel, TargetMap, VarSelectLink};

/// The target map each model is paired with by default.
///
/// Single-index models use Gaussian `μ = E[f(g)g]`, which is exact for unit-norm signals
/// under Gaussian rows.
pub fn default_target_map(model: &ObservationModel, law: EnsembleLaw) -> Result<TargetMap> {
    model.validate()?;
    let quad = ScalarMethod::default();
    Ok(match *model {
        ObservationModel::Linear
        | ObservationModel::LinearGaussNoise { .. }
        | ObservationModel::MultiBitDither { .. } => TargetMap::Identity,
        ObservationModel::OneBit => TargetMap::NormalizeScale {
            mu: mu_scalar(Link::Sign, quad)?.mu,
        },
        ObservationModel::OneBitDither { lambda } => TargetMap::ScaleBy { mu: 1.0 / lambda },
        ObservationModel::Modulo { lambda } => TargetMap::NormalizeScale {
            mu: mu_scalar(Link::Modulo { lambda }, quad)?.mu,
        },
        ObservationModel::Sim { link } => TargetMap::NormalizeScale {
            mu: mu_scalar(link, quad)?.mu,
        },
        ObservationModel::CoordWise { gain } => TargetMap::CoordWiseExact { gain, law },
        ObservationModel::VarSelect { link, s } => {
            let c = match link {
                VarSelectLink::Linear => 1.0,
                VarSelectLink::Tanh => law_expectation(law, |a| a.tanh() * a),
            };
            TargetMap::ScaleBy {
                mu: c / (s as f64).sqrt(),
            }
        }
    })
}
