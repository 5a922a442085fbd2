//! Event-driven best-reply dynamics `x' in BR(x) - x`.
//!
//! While the best reply is a single pure strategy `i` the solution is the
//! chord `x(t) = e_i + (x0 - e_i) e^{-(t - t0)}`. Payoff gaps along the chord
//! are affine in the weight `w = e^{-(t - t0)}`, so the next tie happens at a
//! rational weight and event states are computed exactly. Only the elapsed
//! times (sums of logarithms) are floats.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::equilibria::{self, symmetric_equilibrium_on_support};
use crate::error::{Error, Result};
use crate::game::{faces, SymmetricGame};
use crate::rational::{self, common_denominator};
use crate::scalar::Scalar;
use crate::simplex::{RationalPoint, SimplexPoint, StrategySet};

/// Pure best replies to `x`. Exact in the rational flavor; in the float
/// flavor payoffs within `1e-12 * max|u_ij|` of the maximum count as ties.
pub fn pure_best_replies<T: Scalar>(g: &SymmetricGame, x: &SimplexPoint<T>) -> Result<StrategySet> {
    let ux = g.payoff_vector(x)?;
    let max = ux
        .iter()
        .cloned()
        .fold(ux[0].clone(), |m, v| if v > m { v } else { m });
    let scale = g.entries().iter().map(Signed::abs).max().unwrap_or_default();
    let tol = T::tie_tolerance(&T::from_rational(&scale));
    Ok(ux
        .iter()
        .enumerate()
        .filter(|(_, v)| max.clone() - (*v).clone() <= tol)
        .map(|(i, _)| i)
        .collect())
}

/// How a best-reply tie is resolved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// A two-strategy tie goes to the strategy that strictly dominates the
    /// other in the 2x2 restricted game; anything else is non-unique.
    #[default]
    Dominance,
    /// Every tie is non-unique.
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieResolution {
    Unique(usize),
    NonUnique,
}

/// Picks the continuation at a state where `tied` are the pure best replies.
pub fn resolve_tie(g: &SymmetricGame, _x: &RationalPoint, tied: StrategySet, policy: TiePolicy) -> TieResolution {
    if tied.len() == 1 {
        return TieResolution::Unique(tied.first().unwrap());
    }
    if policy == TiePolicy::Fail || tied.len() != 2 {
        return TieResolution::NonUnique;
    }
    let mut it = tied.iter();
    let (p, q) = (it.next().unwrap(), it.next().unwrap());
    let dominates = |j: usize, i: usize| g.entry(j, i) > g.entry(i, i) && g.entry(j, j) > g.entry(i, j);
    if dominates(q, p) {
        TieResolution::Unique(q)
    } else if dominates(p, q) {
        TieResolution::Unique(p)
    } else {
        TieResolution::NonUnique
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EndReason {
    /// The listed strategies became best replies alongside the target.
    TieEvent(StrategySet),
    Horizon,
    EquilibriumReached,
}

/// One chord of the solution, aimed at the pure strategy `target`.
#[derive(Clone, Debug)]
pub struct BRSegment {
    pub t_start: f64,
    /// Time to the next event; `f64::INFINITY` when none occurs.
    pub duration: f64,
    pub start_state: RationalPoint,
    pub target: usize,
    pub end_reason: EndReason,
    start_f64: Vec<f64>,
}

impl BRSegment {
    pub fn new(t_start: f64, start_state: RationalPoint, target: usize) -> Self {
        let start_f64 = start_state.to_float().into_weights();
        BRSegment {
            t_start,
            duration: f64::INFINITY,
            start_state,
            target,
            end_reason: EndReason::Horizon,
            start_f64,
        }
    }

    /// State at time `t >= t_start` (float).
    pub fn state_at(&self, t: f64) -> Vec<f64> {
        let w = (-(t - self.t_start)).exp();
        self.start_f64
            .iter()
            .enumerate()
            .map(|(k, &x0)| {
                let e = if k == self.target { 1.0 } else { 0.0 };
                e + (x0 - e) * w
            })
            .collect()
    }

    /// State at weight `w = e^{-(t - t_start)}`, exactly.
    pub fn state_at_weight(&self, w: &BigRational) -> RationalPoint {
        let one_minus = BigRational::one() - w;
        let weights = self
            .start_state
            .weights()
            .iter()
            .enumerate()
            .map(|(k, x0)| {
                let v = x0 * w;
                if k == self.target {
                    v + &one_minus
                } else {
                    v
                }
            })
            .collect();
        SimplexPoint::from_trusted(weights)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BREvent {
    pub time: f64,
    /// Target of the segment that ended.
    pub from: usize,
    /// Pure best replies at the event state.
    pub tied: StrategySet,
    /// New target, `None` when the continuation is not unique.
    pub to: Option<usize>,
    pub state: RationalPoint,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Horizon,
    NonUniqueContinuation { time: f64, state: RationalPoint, tied: StrategySet },
    /// The state reached a rest point, either a pure strategy that is a best
    /// reply to itself or the limit of accumulating events.
    Equilibrium { time: f64, state: RationalPoint },
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::Horizon => "horizon",
            Termination::NonUniqueContinuation { .. } => "non_unique_continuation",
            Termination::Equilibrium { .. } => "equilibrium",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BRSolution {
    pub horizon: f64,
    pub segments: Vec<BRSegment>,
    pub events: Vec<BREvent>,
    pub termination: Termination,
}

impl BRSolution {
    /// Time up to which the solution is defined.
    pub fn end_time(&self) -> f64 {
        match &self.termination {
            Termination::NonUniqueContinuation { time, .. } => *time,
            _ => self.horizon,
        }
    }

    pub fn dim(&self) -> usize {
        match self.segments.first() {
            Some(s) => s.start_state.dim(),
            None => match &self.termination {
                Termination::NonUniqueContinuation { state, .. } | Termination::Equilibrium { state, .. } => state.dim(),
                Termination::Horizon => 0,
            },
        }
    }

    /// State at time `t` in `[0, end_time]`.
    pub fn state_at(&self, t: f64) -> Result<Vec<f64>> {
        let end = self.end_time();
        if !(0.0..=end).contains(&t) {
            return Err(Error::TimeOutOfRange { t, end });
        }
        match &self.termination {
            Termination::Equilibrium { time, state } if t >= *time => {
                return Ok(state.to_float().into_weights())
            }
            Termination::NonUniqueContinuation { time, state, .. } if t >= *time => {
                return Ok(state.to_float().into_weights())
            }
            _ => {}
        }
        let k = self.segments.partition_point(|s| s.t_start <= t).max(1) - 1;
        Ok(self.segments[k].state_at(t))
    }

    pub fn final_state(&self) -> Vec<f64> {
        self.state_at(self.end_time()).expect("end time is in range")
    }

    pub fn is_flagged(&self) -> bool {
        matches!(self.termination, Termination::NonUniqueContinuation { .. })
    }

    pub fn to_json(&self) -> Value {
        let segments: Vec<Value> = self
            .segments
            .iter()
            .map(|s| {
                let duration = s.duration.min(self.end_time() - s.t_start);
                let end_reason = match &s.end_reason {
                    EndReason::TieEvent(set) => json!({"tie_event": set}),
                    EndReason::Horizon => json!("horizon"),
                    EndReason::EquilibriumReached => json!("equilibrium_reached"),
                };
                json!({
                    "t_start": s.t_start,
                    "duration": duration,
                    "target": s.target + 1,
                    "state": rational::json::vec_to_value(s.start_state.weights()),
                    "end_reason": end_reason,
                })
            })
            .collect();
        let events: Vec<Value> = self
            .events
            .iter()
            .map(|e| {
                json!({
                    "time": e.time,
                    "old": [e.from + 1],
                    "new": e.tied,
                    "next_target": e.to.map(|j| j + 1),
                    "state": rational::json::vec_to_value(e.state.weights()),
                })
            })
            .collect();
        let termination = match &self.termination {
            Termination::Horizon => json!({"kind": "horizon"}),
            Termination::NonUniqueContinuation { time, state, tied } => json!({
                "kind": "non_unique_continuation",
                "time": time,
                "tied": tied,
                "state": rational::json::vec_to_value(state.weights()),
            }),
            Termination::Equilibrium { time, state } => json!({
                "kind": "equilibrium",
                "time": time,
                "state": rational::json::vec_to_value(state.weights()),
            }),
        };
        json!({
            "horizon": self.horizon,
            "segments": segments,
            "events": events,
            "termination": termination,
        })
    }
}

#[derive(Clone, Debug)]
pub struct BrOptions {
    pub policy: TiePolicy,
    pub max_events: usize,
    /// Inter-event durations below this trigger the accumulation check.
    pub accumulation_gap: f64,
    /// Max-norm distance to the candidate equilibrium accepted at accumulation.
    pub equilibrium_tol: f64,
}

impl Default for BrOptions {
    fn default() -> Self {
        BrOptions {
            policy: TiePolicy::Dominance,
            max_events: 1_000_000,
            accumulation_gap: 1e-12,
            equilibrium_tol: 1e-9,
        }
    }
}

/// The game with denominators cleared: `M = L U` with integer entries.
struct IntGame {
    n: usize,
    m: Vec<BigInt>,
}

impl IntGame {
    fn new(g: &SymmetricGame) -> Self {
        let l = common_denominator(g.entries());
        let m = g.entries().iter().map(|u| u.numer() * (&l / u.denom())).collect();
        IntGame { n: g.n(), m }
    }

    fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.m[i * self.n + j]
    }

    fn apply(&self, p: &[BigInt]) -> Vec<BigInt> {
        (0..self.n)
            .map(|i| {
                p.iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .fold(BigInt::zero(), |acc, (j, v)| acc + self.at(i, j) * v)
            })
            .collect()
    }
}

/// A simplex point `num / den` with integer numerators.
#[derive(Clone, Debug)]
struct ExactState {
    num: Vec<BigInt>,
    den: BigInt,
}

impl ExactState {
    fn from_point(x: &RationalPoint) -> Self {
        let den = common_denominator(x.weights());
        let num = x.weights().iter().map(|w| w.numer() * (&den / w.denom())).collect();
        ExactState { num, den }
    }

    fn to_point(&self) -> RationalPoint {
        SimplexPoint::from_trusted(
            self.num
                .iter()
                .map(|p| BigRational::new(p.clone(), self.den.clone()))
                .collect(),
        )
    }

    fn reduce(&mut self) {
        let g = self.num.iter().fold(self.den.clone(), |acc, p| acc.gcd(p));
        if !g.is_one() {
            for p in &mut self.num {
                *p /= &g;
            }
            self.den /= &g;
        }
    }

    fn is_vertex(&self, i: usize) -> bool {
        self.num[i] == self.den
    }
}

/// The earliest tie on a chord aimed at `target`: the payoff gap of `j` is
/// proportional to `w a_j + (1 - w) b_j den` with `a_j = (Mp)_j - (Mp)_i < 0`
/// and `b_j = M_ji - M_ii`, vanishing at `w = b_j den / (b_j den - a_j)`.
struct Crossing {
    a: BigInt,
    b: BigInt,
    tied: StrategySet,
}

fn scan(ig: &IntGame, state: &ExactState, target: usize) -> Result<Option<Crossing>> {
    let mp = ig.apply(&state.num);
    let mut best: Option<Crossing> = None;
    for j in 0..ig.n {
        if j == target {
            continue;
        }
        let a = &mp[j] - &mp[target];
        let b = ig.at(j, target) - ig.at(target, target);
        // A tie at the start is fine when `j` falls behind right away.
        if a.is_positive() || (a.is_zero() && !b.is_negative()) {
            return Err(Error::BestReplyPrecondition(format!(
                "strategy {} is not the unique best reply (strategy {} earns at least as much)",
                target + 1,
                j + 1
            )));
        }
        if a.is_zero() || !b.is_positive() {
            continue;
        }
        // Smaller -a/b means an earlier crossing.
        match &mut best {
            None => best = Some(Crossing { a, b, tied: StrategySet::singleton(j) }),
            Some(c) => {
                let lhs = (-&a) * &c.b;
                let rhs = (-&c.a) * &b;
                if lhs < rhs {
                    *c = Crossing { a, b, tied: StrategySet::singleton(j) };
                } else if lhs == rhs {
                    c.tied.insert(j);
                }
            }
        }
    }
    Ok(best)
}

/// Duration `s = ln(1 - a / (b den))` of the chord up to the crossing.
fn crossing_duration(c: &Crossing, den: &BigInt) -> f64 {
    let r = BigRational::new(-&c.a, &c.b * den);
    rational::to_f64(&r).ln_1p()
}

/// Closed-form next event on `seg`: the duration to the first tie and the
/// strategies that tie with the target there. `None` if no tie ever occurs.
pub fn next_event(g: &SymmetricGame, seg: &BRSegment) -> Result<Option<(f64, StrategySet)>> {
    let ig = IntGame::new(g);
    let state = ExactState::from_point(&seg.start_state);
    Ok(scan(&ig, &state, seg.target)?.map(|c| (crossing_duration(&c, &state.den), c.tied)))
}

/// Integrates the best-reply dynamics from `x0` over `[0, horizon]`.
pub fn integrate_br(g: &SymmetricGame, x0: &RationalPoint, horizon: f64, opts: &BrOptions) -> Result<BRSolution> {
    if x0.dim() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), actual: x0.dim() });
    }
    if !(horizon > 0.0) {
        return Err(Error::OutOfRange(format!("horizon must be positive, got {horizon}")));
    }
    let ig = IntGame::new(g);
    let mut segments = Vec::new();
    let mut events = Vec::new();
    let sol = |segments, events, termination| BRSolution { horizon, segments, events, termination };

    let tied = equilibria::best_reply_set(g, x0.weights());
    let mut target = match resolve_tie(g, x0, tied, opts.policy) {
        TieResolution::Unique(i) => i,
        TieResolution::NonUnique => {
            let termination = Termination::NonUniqueContinuation { time: 0.0, state: x0.clone(), tied };
            return Ok(sol(segments, events, termination));
        }
    };
    let mut state = ExactState::from_point(x0);
    let mut point = x0.clone();
    let mut t = 0.0;
    loop {
        let mut seg = BRSegment::new(t, point.clone(), target);
        if state.is_vertex(target) {
            seg.end_reason = EndReason::EquilibriumReached;
            segments.push(seg);
            return Ok(sol(segments, events, Termination::Equilibrium { time: t, state: point }));
        }
        let Some(crossing) = scan(&ig, &state, target)? else {
            segments.push(seg);
            return Ok(sol(segments, events, Termination::Horizon));
        };
        let s = crossing_duration(&crossing, &state.den);
        seg.duration = s;
        if t + s >= horizon {
            segments.push(seg);
            return Ok(sol(segments, events, Termination::Horizon));
        }
        if events.len() >= opts.max_events {
            return Err(Error::EventLimit(opts.max_events));
        }
        seg.end_reason = EndReason::TieEvent(crossing.tied);
        segments.push(seg);

        // New state (b p - a e_i) / (b den - a).
        let Crossing { a, b, .. } = crossing;
        for p in &mut state.num {
            *p *= &b;
        }
        state.num[target] -= &a;
        state.den = &b * &state.den - &a;
        state.reduce();
        point = state.to_point();
        t += s;

        let tied = equilibria::best_reply_set(g, point.weights());
        debug_assert_eq!(tied, crossing.tied.union(StrategySet::singleton(target)));
        let to = match resolve_tie(g, &point, tied, opts.policy) {
            TieResolution::Unique(j) => Some(j),
            TieResolution::NonUnique => None,
        };
        events.push(BREvent { time: t, from: target, tied, to, state: point.clone() });
        let Some(next) = to else {
            let termination = Termination::NonUniqueContinuation { time: t, state: point, tied };
            return Ok(sol(segments, events, termination));
        };
        if g.entry(next, target) <= g.entry(target, target) {
            return Err(Error::ImprovementPrinciple { from: target + 1, to: next + 1 });
        }
        target = next;

        if s < opts.accumulation_gap {
            if let Some(eq) = accumulation_limit(g, &segments, &point, opts.equilibrium_tol) {
                let mut seg = BRSegment::new(t, point, target);
                seg.end_reason = EndReason::EquilibriumReached;
                seg.duration = 0.0;
                segments.push(seg);
                return Ok(sol(segments, events, Termination::Equilibrium { time: t, state: eq }));
            }
        }
    }
}

/// When events accumulate, the solution is closing in on a symmetric
/// equilibrium supported on the recent targets.
fn accumulation_limit(g: &SymmetricGame, segments: &[BRSegment], x: &RationalPoint, tol: f64) -> Option<RationalPoint> {
    let support: StrategySet = segments.iter().rev().take(2 * g.n()).map(|s| s.target).collect();
    let eq = symmetric_equilibrium_on_support(g, support)?;
    let d = rational::to_f64(&x.linf_distance(&eq));
    (d < tol).then_some(eq)
}

/// A violated inclusion found by [`br_decomposition_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionViolation {
    pub time: f64,
    pub segment: usize,
    pub side: Side,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Bar,
    Hat,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Bar => "bar",
            Side::Hat => "hat",
        })
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DecompositionReport {
    pub samples: usize,
    pub violations: Vec<DecompositionViolation>,
}

impl DecompositionReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks, exactly at sampled interior points of every segment of a 7x7 run,
/// that the normalized face states move as best-reply dynamics of the face
/// games: `d/dt xbar = (1 + lambda'/lambda)(e_b - xbar)` with `b` a best reply
/// of the face game when the target `b` lies in the face, and `d/dt xbar = 0`
/// otherwise. The same for `xhat` on strategies 5-7.
pub fn br_decomposition_check(g77: &SymmetricGame, sol: &BRSolution) -> Result<DecompositionReport> {
    if g77.n() != 7 {
        return Err(Error::DimensionMismatch { expected: 7, actual: g77.n() });
    }
    let sides = [
        (Side::Bar, faces::first(), g77.restrict(faces::first())?),
        (Side::Hat, faces::g77_second(), g77.restrict(faces::g77_second())?),
    ];
    let mut report = DecompositionReport::default();
    let end = sol.end_time();
    for (k, seg) in sol.segments.iter().enumerate() {
        let remaining = seg.duration.min(end - seg.t_start);
        if !(remaining > 0.0) {
            continue;
        }
        let w_end = (-remaining).exp();
        for frac in [0.25, 0.5, 0.75] {
            let w = rational::from_f64_exact(1.0 - frac * (1.0 - w_end)).expect("finite weight");
            let x = seg.state_at_weight(&w);
            let time = seg.t_start - rational::to_f64(&w).ln();
            // x' = e_target - x.
            let dx: Vec<BigRational> = x
                .weights()
                .iter()
                .enumerate()
                .map(|(i, v)| if i == seg.target { BigRational::one() - v } else { -v.clone() })
                .collect();
            for (side, face, block) in &sides {
                report.samples += 1;
                if let Some(message) = check_face(&x, &dx, seg.target, *face, block) {
                    report.violations.push(DecompositionViolation { time, segment: k, side: *side, message });
                }
            }
        }
    }
    Ok(report)
}

fn check_face(
    x: &RationalPoint,
    dx: &[BigRational],
    target: usize,
    face: StrategySet,
    block: &SymmetricGame,
) -> Option<String> {
    let idx: Vec<usize> = face.iter().collect();
    let mass = x.mass(face);
    if mass.is_zero() {
        return None;
    }
    let dmass: BigRational = idx.iter().map(|&i| dx[i].clone()).sum();
    let xbar: Vec<BigRational> = idx.iter().map(|&i| x.weights()[i].clone() / &mass).collect();
    let dxbar: Vec<BigRational> = idx
        .iter()
        .map(|&i| (&dx[i] * &mass - &x.weights()[i] * &dmass) / (&mass * &mass))
        .collect();
    match idx.iter().position(|&i| i == target) {
        None => dxbar
            .iter()
            .any(|d| !d.is_zero())
            .then(|| format!("target {} is off the face but the face state moves", target + 1)),
        Some(b) => {
            let multiplier = BigRational::one() + &dmass / &mass;
            if multiplier.is_negative() {
                return Some(format!("negative time-change multiplier {multiplier}"));
            }
            let expected: Vec<BigRational> = xbar
                .iter()
                .enumerate()
                .map(|(c, v)| {
                    let e = if c == b { BigRational::one() } else { BigRational::zero() };
                    &multiplier * (e - v)
                })
                .collect();
            if expected != dxbar {
                return Some("face velocity is not a multiple of (e_b - xbar)".into());
            }
            if !equilibria::best_reply_set(block, &xbar).contains(b) {
                return Some(format!("target {} is not a face-game best reply", target + 1));
            }
            None
        }
    }
}
