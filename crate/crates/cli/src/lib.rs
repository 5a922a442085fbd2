//! Named, seeded experiments over the `evodyn` library, plus the game
//! builders shared by the `evodyn` subcommands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;

use std::path::Path;

use anyhow::{bail, Context};
use evodyn::game::faces;
use evodyn::{build_game_66, build_game_77, build_rps, Rational, RpsSpec, StrategySet, SymmetricGame};

pub use config::{Experiment, ExperimentConfig};
pub use experiments::{run_batch, thread_pool, Batch, RunRecord, Summary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Builder {
    Game66,
    Game77,
    RpsCyclic,
    RpsEpsilon,
}

/// Game parameters accepted by the builders.
#[derive(Clone, Debug, Default)]
pub struct BuilderArgs {
    pub eps: Option<Rational>,
    pub alpha: Option<Rational>,
    pub beta: Option<Rational>,
}

impl Builder {
    pub fn build(self, a: &BuilderArgs) -> anyhow::Result<SymmetricGame> {
        let need = |v: &Option<Rational>, name: &str| v.clone().with_context(|| format!("--{name} is required"));
        Ok(match self {
            Builder::Game66 => build_game_66(),
            Builder::Game77 => build_game_77(&need(&a.eps, "eps")?)?,
            Builder::RpsCyclic => build_rps(&self.rps_spec(a)?)?,
            Builder::RpsEpsilon => build_rps(&self.rps_spec(a)?)?,
        })
    }

    fn rps_spec(self, a: &BuilderArgs) -> anyhow::Result<RpsSpec> {
        let need = |v: &Option<Rational>, name: &str| v.clone().with_context(|| format!("--{name} is required"));
        Ok(match self {
            Builder::RpsCyclic => RpsSpec::Cyclic { alpha: need(&a.alpha, "alpha")?, beta: need(&a.beta, "beta")? },
            _ => RpsSpec::Epsilon(need(&a.eps, "eps")?),
        })
    }

    /// Faces that carry an RPS block in the built game.
    pub fn rps_faces(self) -> Vec<StrategySet> {
        match self {
            Builder::Game66 => vec![faces::first(), faces::g66_second()],
            Builder::Game77 => vec![faces::first(), faces::g77_second()],
            Builder::RpsCyclic | Builder::RpsEpsilon => vec![StrategySet::all(3)],
        }
    }
}

pub fn load_game(path: &Path) -> anyhow::Result<SymmetricGame> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(SymmetricGame::from_json(&value)?)
}

/// Parses comma-separated 1-based labels such as `4,5,6`.
pub fn parse_face(s: &str) -> anyhow::Result<StrategySet> {
    let labels: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().with_context(|| format!("bad strategy label {p:?}")))
        .collect::<anyhow::Result<_>>()?;
    if labels.len() != 3 {
        bail!("a face has exactly 3 strategies, got {s:?}");
    }
    Ok(StrategySet::from_labels(&labels)?)
}
