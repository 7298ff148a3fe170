//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm1, norm2, tv_norm};
use crate::model::{ConstraintSet, CorruptionSpec, MeasurementEnsemble, ObservationModel, SignalSpec, TargetMap};
use crate::solver::SolveOptions;

/// A radius given either as a number or as `"tuned"`, the matching norm of `Tx̊`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Radius {
    Fixed(f64),
    Keyword(Tuned),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tuned {
    Tuned,
}

impl Radius {
    pub const TUNED: Radius = Radius::Keyword(Tuned::Tuned);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSpec {
    L1Ball { radius: Radius },
    L2Ball { radius: Radius },
    TvBall { radius: Radius },
    Box { lo: f64, hi: f64 },
    FullSpace,
}

impl ConstraintSpec {
    /// The concrete set for a trial whose target vector is `tx`.
    pub fn resolve(&self, tx: &[f64]) -> Result<ConstraintSet> {
        let pick = |r: Radius, tuned: f64| match r {
            Radius::Fixed(v) => v,
            Radius::Keyword(Tuned::Tuned) => tuned,
        };
        let set = match *self {
            ConstraintSpec::L1Ball { radius } => ConstraintSet::L1Ball {
                radius: pick(radius, norm1(tx)),
            },
            ConstraintSpec::L2Ball { radius } => ConstraintSet::L2Ball {
                radius: pick(radius, norm2(tx)),
            },
            ConstraintSpec::TvBall { radius } => ConstraintSet::TvBall {
                radius: pick(radius, tv_norm(tx)),
            },
            ConstraintSpec::Box { lo, hi } => ConstraintSet::Box { lo, hi },
            ConstraintSpec::FullSpace => ConstraintSet::FullSpace,
        };
        set.validate().map_err(|e| match e {
            Error::InvalidParameter(msg) => Error::DegenerateInput(format!("resolved constraint: {msg}")),
            other => other,
        })?;
        Ok(set)
    }

    fn fixed_radius(&self) -> Option<f64> {
        match *self {
            ConstraintSpec::L1Ball { radius: Radius::Fixed(r) }
            | ConstraintSpec::L2Ball { radius: Radius::Fixed(r) }
            | ConstraintSpec::TvBall { radius: Radius::Fixed(r) } => Some(r),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ObservationModel,
    pub ensemble: MeasurementEnsemble,
    pub signal: SignalSpec,
    pub constraint: ConstraintSpec,
    /// Strictly increasing sample sizes; defaults to `p·2^k`, `k = −1..4`.
    #[serde(default)]
    pub m_grid: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub corruption: CorruptionSpec,
    #[serde(default)]
    pub solver: SolveOptions,
    pub master_seed: u64,
    /// Accuracy `t`; trials with `err_l2 ≤ t` count as successes in summaries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy_target: Option<f64>,
    /// Overrides the model's default target map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Fill the `wall_ms` column; off by default so CSV bodies are reproducible.
    #[serde(default)]
    pub record_timing: bool,
}

/// `p/2, p, 2p, 4p, 8p, 16p`
pub fn default_m_grid(p: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = (0..6).map(|k| ((p << k) / 2).max(1)).collect();
    grid.dedup();
    grid
}

fn schema_err(path: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::schema(path, e.to_string())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::schema(path, e.into_inner().to_string())
        })?;
        if cfg.m_grid.is_empty() {
            cfg.m_grid = default_m_grid(cfg.signal.p);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config types serialize infallibly")
    }

    /// Checks every field; errors name the offending field path.
    pub fn validate(&self) -> Result<()> {
        self.model.validate().map_err(schema_err("model"))?;
        self.signal.validate().map_err(schema_err("signal"))?;
        if self.ensemble.p != self.signal.p {
            return Err(Error::schema(
                "ensemble.p",
                format!("ensemble dimension {} differs from signal dimension {}", self.ensemble.p, self.signal.p),
            ));
        }
        if !(self.ensemble.subg_param > 0.0) {
            return Err(Error::schema("ensemble.subg_param", "must be > 0"));
        }
        if let Some(r) = self.constraint.fixed_radius() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::schema("constraint.radius", format!("must be > 0, got {r}")));
            }
        }
        if let ConstraintSpec::Box { lo, hi } = self.constraint {
            if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
                return Err(Error::schema("constraint", "box bounds must satisfy lo ≤ hi"));
            }
        }
        if self.m_grid.is_empty() {
            return Err(Error::schema("m_grid", "must list at least one sample size"));
        }
        for (i, w) in self.m_grid.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::schema(
                    format!("m_grid[{}]", i + 1),
                    format!("must be strictly increasing, {} follows {}", w[1], w[0]),
                ));
            }
        }
        if self.m_grid[0] == 0 {
            return Err(Error::schema("m_grid[0]", "sample sizes must be ≥ 1"));
        }
        if self.trials == 0 {
            return Err(Error::schema("trials", "must be ≥ 1"));
        }
        for &m in &self.m_grid {
            self.corruption.validate(m).map_err(schema_err("corruption"))?;
        }
        if (self.corruption.bitflip_frac > 0.0) && !self.model.is_binary() {
            return Err(Error::schema("corruption.bitflip_frac", "bit flips need a binary observation model"));
        }
        self.solver.validate().map_err(schema_err("solver"))?;
        if let Some(t) = self.accuracy_target {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::schema("accuracy_target", "must be > 0"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const ONE_BIT: &str = r#"{
        "model": {"kind": "one_bit"},
        "ensemble": {"law": "gaussian", "p": 16},
        "signal": {"family": "unit_sphere", "p": 16, "s": 2},
        "constraint": {"kind": "l1_ball", "radius": "tuned"},
        "m_grid": [40, 80],
        "trials": 2,
        "master_seed": 7
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_json(ONE_BIT).unwrap();
        assert_eq!(cfg.constraint, ConstraintSpec::L1Ball { radius: Radius::TUNED });
        let once = cfg.to_json();
        let twice = ExperimentConfig::from_json(&once).unwrap().to_json();
        assert_eq!(once, twice);
    }

    #[test]
    fn default_grid_is_six_log_spaced_points() {
        assert_eq!(default_m_grid(64), vec![32, 64, 128, 256, 512, 1024]);
        let text = ONE_BIT.replace(r#""m_grid": [40, 80],"#, "");
        assert_eq!(ExperimentConfig::from_json(&text).unwrap().m_grid, default_m_grid(16));
    }

    fn schema_path(text: &str) -> String {
        match ExperimentConfig::from_json(text) {
            Err(Error::Schema { path, .. }) => path,
            other => panic!("expected a schema error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_field_paths() {
        assert_eq!(schema_path(&ONE_BIT.replace("[40, 80]", "[80, 40]")), "m_grid[1]");
        assert_eq!(schema_path(&ONE_BIT.replace(r#""trials": 2"#, r#""trials": 0"#)), "trials");
        assert_eq!(schema_path(&ONE_BIT.replace(r#""p": 16, "s""#, r#""p": 17, "s""#)), "ensemble.p");
        assert_eq!(schema_path(&ONE_BIT.replace(r#""law": "gaussian""#, r#""law": "cauchy""#)), "ensemble.law");
        assert_eq!(schema_path(&ONE_BIT.replace(r#""trials": 2"#, r#""trials": "two""#)), "trials");
        assert_eq!(schema_path(&ONE_BIT.replace(r#""radius": "tuned""#, r#""radius": -1"#)), "constraint.radius");
        assert_eq!(schema_path(&ONE_BIT.replace(r#""master_seed""#, r#""seed""#)), "seed");
    }

    #[test]
    fn bit_flips_need_binary_models() {
        let text = ONE_BIT
            .replace(r#"{"kind": "one_bit"}"#, r#"{"kind": "linear"}"#)
            .replace(r#""master_seed": 7"#, r#""master_seed": 7, "corruption": {"bitflip_frac": 0.1}"#);
        assert_eq!(schema_path(&text), "corruption.bitflip_frac");
    }

    #[test]
    fn tuned_radius_resolves_against_the_target() {
        let tx = [0.5, -0.5, 1.0];
        let k = ConstraintSpec::L1Ball { radius: Radius::TUNED }.resolve(&tx).unwrap();
        assert_eq!(k, ConstraintSet::L1Ball { radius: 2.0 });
        let k = ConstraintSpec::TvBall { radius: Radius::TUNED }.resolve(&tx).unwrap();
        assert_eq!(k, ConstraintSet::TvBall { radius: 2.5 });
        assert!(ConstraintSpec::L2Ball { radius: Radius::TUNED }.resolve(&[0.0]).is_err());
    }
}
