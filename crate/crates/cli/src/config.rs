//! Experiment configuration: a JSON document plus command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use evodyn::analysis::Thresholds;
use evodyn::rational::rat;
use evodyn::{Rational, RpsSpec};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Best-reply runs in the 6x6 game.
    Br66,
    /// Replicator runs in the 7x7 game.
    Rep77,
    /// Best-reply runs in the 7x7 game.
    Br77,
    /// Best-reply runs in an RPS game.
    RpsBr,
    /// Replicator runs in an RPS game.
    RpsRep,
    /// Face-game comparison under rescaled time in the 7x7 game.
    RescaleCheck,
    /// Equilibria (and optionally best-reply runs) of perturbed 6x6 games.
    Perturb66,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Br66 => "br66",
            Experiment::Rep77 => "rep77",
            Experiment::Br77 => "br77",
            Experiment::RpsBr => "rps-br",
            Experiment::RpsRep => "rps-rep",
            Experiment::RescaleCheck => "rescale-check",
            Experiment::Perturb66 => "perturb66",
        }
    }

    fn default_horizon(self) -> f64 {
        match self {
            Experiment::Br66 | Experiment::Perturb66 => 60.0,
            Experiment::Rep77 => 3000.0,
            Experiment::Br77 => 100.0,
            Experiment::RpsBr => 40.0,
            Experiment::RpsRep => 5000.0,
            Experiment::RescaleCheck => 50.0,
        }
    }

    fn default_eps(self) -> Option<Rational> {
        match self {
            Experiment::Rep77 | Experiment::RescaleCheck => Some(rat(1, 50)),
            Experiment::Br77 => Some(rat(1, 10)),
            Experiment::RpsRep => Some(rat(1, 5)),
            _ => None,
        }
    }

    fn default_thresholds(self) -> Thresholds {
        match self {
            Experiment::Rep77 => Thresholds { geometric: 1e-3, elimination: 1e-3, window: 200.0 },
            Experiment::RpsRep => Thresholds { geometric: 1e-6, ..Thresholds::default() },
            _ => Thresholds::default(),
        }
    }
}

mod rational_str {
    use evodyn::rational::{format_rational, parse_rational};
    use evodyn::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_str(&format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let v: Option<String> = Option::deserialize(d)?;
        v.map(|s| parse_rational(&s).map_err(serde::de::Error::custom)).transpose()
    }
}

/// Everything that determines a batch. Rationals are written `p/q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default, with = "rational_str", skip_serializing_if = "Option::is_none")]
    pub eps: Option<Rational>,
    #[serde(default, with = "rational_str", skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Rational>,
    #[serde(default, with = "rational_str", skip_serializing_if = "Option::is_none")]
    pub beta: Option<Rational>,
    /// Perturbation magnitude for `perturb66`.
    #[serde(default, with = "rational_str", skip_serializing_if = "Option::is_none")]
    pub delta: Option<Rational>,
    #[serde(default = "default_count")]
    pub count: usize,
    /// Best-reply runs per perturbed game in `perturb66`.
    #[serde(default)]
    pub runs_per_game: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Thresholds>,
    /// Largest accepted discrepancy in `rescale-check`.
    #[serde(default = "default_rescale_tol")]
    pub rescale_tol: f64,
    /// Uniformly spaced rows in per-run CSV exports.
    #[serde(default = "default_csv_samples")]
    pub csv_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

fn default_count() -> usize {
    20
}
fn default_seed() -> u64 {
    7
}
fn default_rtol() -> f64 {
    1e-9
}
fn default_atol() -> f64 {
    1e-12
}
fn default_rescale_tol() -> f64 {
    1e-6
}
fn default_csv_samples() -> usize {
    1000
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            eps: None,
            alpha: None,
            beta: None,
            delta: None,
            count: default_count(),
            runs_per_game: 0,
            seed: default_seed(),
            horizon: None,
            rtol: default_rtol(),
            atol: default_atol(),
            thresholds: None,
            rescale_tol: default_rescale_tol(),
            csv_samples: default_csv_samples(),
            out_dir: None,
        }
    }

    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fills every experiment-dependent default so the config alone
    /// reproduces the batch.
    pub fn resolve(mut self) -> anyhow::Result<Self> {
        let e = self.experiment;
        let cyclic = self.alpha.is_some() || self.beta.is_some();
        if self.eps.is_none() && !(e == Experiment::RpsRep && cyclic) {
            self.eps = e.default_eps();
        }
        if e == Experiment::Perturb66 && self.delta.is_none() {
            self.delta = Some(rat(1, 100));
        }
        if e == Experiment::RpsBr && self.eps.is_none() && self.alpha.is_none() && self.beta.is_none() {
            self.alpha = Some(rat(3, 1));
            self.beta = Some(rat(1, 1));
        }
        self.horizon.get_or_insert(e.default_horizon());
        self.thresholds.get_or_insert_with(|| e.default_thresholds());
        if !(self.horizon.unwrap() > 0.0) {
            bail!("horizon must be positive");
        }
        if self.count == 0 {
            bail!("count must be positive");
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            bail!("tolerances must be positive");
        }
        if matches!(e, Experiment::RpsBr | Experiment::RpsRep) {
            self.rps_spec()?;
        }
        Ok(self)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon.unwrap_or(self.experiment.default_horizon())
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds.clone().unwrap_or_else(|| self.experiment.default_thresholds())
    }

    /// RPS game of the `rps-*` experiments: cyclic when `alpha`/`beta` are
    /// given, epsilon form otherwise.
    pub fn rps_spec(&self) -> anyhow::Result<RpsSpec> {
        let spec = match (&self.alpha, &self.beta, &self.eps) {
            (Some(a), Some(b), None) => RpsSpec::Cyclic { alpha: a.clone(), beta: b.clone() },
            (None, None, Some(eps)) => RpsSpec::Epsilon(eps.clone()),
            _ => bail!("give either --alpha and --beta or --eps"),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_with_rationals() {
        let mut c = ExperimentConfig::new(Experiment::Rep77);
        c.eps = Some(rat(1, 50));
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains(r#""experiment":"rep77""#) && text.contains(r#""eps":"1/50""#));
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), c);
    }

    #[test]
    fn defaults_are_filled_per_experiment() {
        let c = ExperimentConfig::new(Experiment::Rep77).resolve().unwrap();
        assert_eq!(c.eps, Some(rat(1, 50)));
        assert_eq!(c.horizon, Some(3000.0));
        assert_eq!(c.thresholds.unwrap().window, 200.0);
        let c = ExperimentConfig::new(Experiment::RpsBr).resolve().unwrap();
        assert!(matches!(c.rps_spec().unwrap(), RpsSpec::Cyclic { .. }));
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"experiment":"rep77","eps":"1/0"}"#).is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"experiment":"nope"}"#).is_err());
        let mut c = ExperimentConfig::new(Experiment::RpsRep);
        c.alpha = Some(rat(3, 1));
        assert!(c.resolve().is_err());
    }
}
