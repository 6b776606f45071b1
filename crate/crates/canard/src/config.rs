//! Run configuration for the command-line driver: which family to build,
//! with what parameters, and where outputs go. Loaded from TOML, every
//! field optional with a sensible default.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lienard::{HopfModel, JumpModel, ModelRef, SdiKind};
use crate::ode::IntegratorConfig;
use crate::transition::TransitionSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Hopf,
    Jump,
}

impl ModelKind {
    pub fn sdi_kind(self) -> SdiKind {
        match self {
            ModelKind::Hopf => SdiKind::Hopf,
            ModelKind::Jump => SdiKind::Jump,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Hopf => "hopf",
            ModelKind::Jump => "jump",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hopf" => Ok(ModelKind::Hopf),
            "jump" => Ok(ModelKind::Jump),
            other => Err(Error::Config(format!(
                "unknown model kind {other:?}, expected hopf or jump"
            ))),
        }
    }
}

/// Breaking-parameter range for the cycle sweep, written `lo:hi:n` on the
/// command line (an optional `name=` prefix is accepted and ignored, so
/// `a=-1e-3:1e-3:41` reads naturally).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            lo: -5e-3,
            hi: 5e-3,
            n: 21,
        }
    }
}

impl FromStr for SweepSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = match s.split_once('=') {
            Some((_, rest)) => rest,
            None => s,
        };
        let parts: Vec<&str> = body.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "sweep spec {s:?} must look like lo:hi:n"
            )));
        }
        let lo: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad sweep lower bound {:?}", parts[0])))?;
        let hi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad sweep upper bound {:?}", parts[1])))?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad sweep count {:?}", parts[2])))?;
        let spec = SweepSpec { lo, hi, n };
        spec.validate()?;
        Ok(spec)
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::Config(format!(
                "sweep range [{}, {}] must be finite with lo < hi",
                self.lo, self.hi
            )));
        }
        if self.n < 20 {
            return Err(Error::Config(format!(
                "sweep needs at least 20 parameter values, got {}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Everything one invocation needs. TOML keys match the field names;
/// unknown keys are rejected so typos surface as config errors instead of
/// silently running on defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub kind: ModelKind,
    /// Zeros planted in the odd part of the critical curve. Left empty,
    /// a one-seed family (hopf) or a two-seed family (jump) is used.
    pub seeds: Option<Vec<f64>>,
    pub delta: f64,
    /// Fold location of the jump family; unused by the hopf family.
    pub eta: f64,
    /// Breaking parameter baked into the jump family's critical curve.
    pub b: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    /// Cut-off radius; `None` picks the built-in working radius.
    pub rho: Option<f64>,
    pub eps: Vec<f64>,
    pub sweep: SweepSpec,
    /// Grid resolution for divergence-integral sampling.
    pub n_grid: usize,
    /// Restrict the divergence-integral scan to a subinterval.
    pub interval: Option<(f64, f64)>,
    pub out_dir: PathBuf,
    pub integrator: IntegratorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kind: ModelKind::Hopf,
            seeds: None,
            delta: 1e-2,
            eta: 0.5,
            b: 0.0,
            c_plus: 3.0,
            c_minus: 1.0,
            rho: None,
            eps: vec![0.1, 0.07, 0.05],
            sweep: SweepSpec::default(),
            n_grid: 400,
            interval: None,
            out_dir: PathBuf::from("out"),
            integrator: IntegratorConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.is_empty() {
            return Err(Error::Config("eps list must not be empty".into()));
        }
        for &e in &self.eps {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::Config(format!(
                    "eps values must lie in (0, 1], got {e}"
                )));
            }
        }
        if !self.delta.is_finite() || self.delta < 0.0 {
            return Err(Error::Config(format!(
                "delta must be finite and nonnegative, got {}",
                self.delta
            )));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Config(format!(
                "eta must lie in (0, 1), got {}",
                self.eta
            )));
        }
        if !self.b.is_finite() {
            return Err(Error::Config(format!("b must be finite, got {}", self.b)));
        }
        if let Some(r) = self.rho {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Config(format!("rho must lie in (0, 1), got {r}")));
            }
        }
        if let Some(seeds) = &self.seeds {
            for &s in seeds {
                if !s.is_finite() {
                    return Err(Error::Config(format!("seeds must be finite, got {s}")));
                }
            }
        }
        if let Some((lo, hi)) = self.interval {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!(
                    "interval [{lo}, {hi}] must be finite with lo < hi"
                )));
            }
        }
        if self.n_grid < 200 {
            return Err(Error::Config(format!(
                "n_grid must be at least 200, got {}",
                self.n_grid
            )));
        }
        self.sweep.validate()?;
        self.integrator
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// Seeds to build with: the explicit list if one was given, otherwise
    /// a default that satisfies the family's placement rules (inside the
    /// window for hopf, between the fold and the edge for jump).
    pub fn effective_seeds(&self) -> Vec<f64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => match self.kind {
                ModelKind::Hopf => vec![0.3],
                ModelKind::Jump => vec![0.75, 0.85],
            },
        }
    }

    pub fn hopf_model(&self) -> Result<HopfModel> {
        let seeds = self.effective_seeds();
        match self.rho {
            Some(r) => HopfModel::with_rho(self.delta, &seeds, self.c_plus, self.c_minus, r),
            None => HopfModel::new(self.delta, &seeds, self.c_plus, self.c_minus),
        }
    }

    pub fn jump_model(&self) -> Result<JumpModel> {
        let seeds = self.effective_seeds();
        match self.rho {
            Some(r) => JumpModel::with_rho(
                self.eta,
                self.b,
                self.delta,
                &seeds,
                self.c_plus,
                self.c_minus,
                r,
            ),
            None => JumpModel::new(
                self.eta,
                self.b,
                self.delta,
                &seeds,
                self.c_plus,
                self.c_minus,
            ),
        }
    }

    pub fn model(&self) -> Result<OwnedModel> {
        match self.kind {
            ModelKind::Hopf => Ok(OwnedModel::Hopf(self.hopf_model()?)),
            ModelKind::Jump => Ok(OwnedModel::Jump(self.jump_model()?)),
        }
    }
}

/// A constructed family of either kind, owned, so the driver can pass it
/// around without threading generics.
pub enum OwnedModel {
    Hopf(HopfModel),
    Jump(JumpModel),
}

impl OwnedModel {
    pub fn as_ref(&self) -> ModelRef<'_> {
        match self {
            OwnedModel::Hopf(m) => ModelRef::Hopf(m),
            OwnedModel::Jump(m) => ModelRef::Jump(m),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            OwnedModel::Hopf(_) => ModelKind::Hopf,
            OwnedModel::Jump(_) => ModelKind::Jump,
        }
    }

    pub fn transition(&self) -> Result<TransitionSpec> {
        match self {
            OwnedModel::Hopf(m) => m.transition(),
            OwnedModel::Jump(m) => m.transition(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn sweep_spec_parses_with_and_without_name() {
        let s: SweepSpec = "a=-1e-3:1e-3:41".parse().unwrap();
        assert_eq!((s.lo, s.hi, s.n), (-1e-3, 1e-3, 41));
        let t: SweepSpec = "-2e-3:2e-3:21".parse().unwrap();
        assert_eq!((t.lo, t.hi, t.n), (-2e-3, 2e-3, 21));
    }

    #[test]
    fn sweep_spec_rejects_malformed_input() {
        assert!("1:2".parse::<SweepSpec>().is_err());
        assert!("a=1:2:x".parse::<SweepSpec>().is_err());
        assert!("2:1:30".parse::<SweepSpec>().is_err());
        assert!("0:1:5".parse::<SweepSpec>().is_err());
    }

    #[test]
    fn toml_round_trip_keeps_fields() {
        let text = r#"
            kind = "jump"
            eta = 0.6
            seeds = [0.75, 0.85]
            eps = [0.1]
            out_dir = "results"

            [sweep]
            lo = -1e-3
            hi = 1e-3
            n = 25

            [integrator]
            event_tol = 1e-11
        "#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.kind, ModelKind::Jump);
        assert_eq!(cfg.eta, 0.6);
        assert_eq!(cfg.sweep.n, 25);
        assert_eq!(cfg.integrator.event_tol, 1e-11);
        assert_eq!(cfg.integrator.abs_tol, 1e-10);
        assert_eq!(cfg.out_dir, PathBuf::from("results"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml_str("klnd = \"hopf\"").is_err());
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(RunConfig::from_toml_str("eps = []").is_err());
        assert!(RunConfig::from_toml_str("eps = [1.5]").is_err());
        assert!(RunConfig::from_toml_str("n_grid = 50").is_err());
        assert!(RunConfig::from_toml_str("eta = 1.5").is_err());
    }

    #[test]
    fn default_seed_choice_builds_both_families() {
        let mut cfg = RunConfig::default();
        cfg.model().unwrap();
        cfg.kind = ModelKind::Jump;
        cfg.model().unwrap();
    }
}
