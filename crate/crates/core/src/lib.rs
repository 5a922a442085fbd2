//! Evolutionary dynamics on symmetric games: exact Nash enumeration,
//! replicator and best-reply dynamics, and Shapley-triangle geometry.
//!
//! The games of interest have a unique, quasi-strict Nash equilibrium whose
//! whole support is driven to extinction by the dynamics from almost every
//! initial condition. [`game`] builds them, [`equilibria`] certifies the
//! uniqueness claims exactly, [`replicator`] and [`best_reply`] integrate
//! the two dynamics, and [`analysis`] turns runs into verdicts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod best_reply;
pub mod equilibria;
pub mod error;
pub mod export;
pub mod game;
pub mod linalg;
pub mod ode;
pub mod rational;
pub mod replicator;
pub mod sampling;
pub mod scalar;
pub mod shapley;
pub mod simplex;

pub use analysis::{
    classify_run, claim_integrals, cycle_proximity, distance_to_shapley, elimination_check,
    ConvergenceReport, Run, Targets, Thresholds, Verdict,
};
pub use best_reply::{integrate_br, BRSolution, BrOptions, Side, Termination, TiePolicy};
pub use equilibria::{enumerate_nash, is_nash, EquilibriumCertificate, NashEnumeration};
pub use error::{Error, Result};
pub use game::{
    average_payoff, better_reply_edges, build_game_66, build_game_77, build_rps,
    is_outward_cycling, payoff_vector, RpsSpec, SymmetricGame,
};
pub use num_bigint::BigInt;
pub use num_rational::BigRational;
pub use rational::Rational;
pub use replicator::{integrate_rep, RepOptions, Trajectory};
pub use scalar::Scalar;
pub use shapley::{shapley_triangle, ShapleyTriangle};
pub use simplex::{FloatPoint, RationalPoint, SimplexPoint, StrategySet};
