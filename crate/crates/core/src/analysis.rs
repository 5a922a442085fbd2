//! Convergence verdicts for best-reply solutions and replicator trajectories.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::best_reply::{BRSolution, Side, Termination};
use crate::game::{faces, SymmetricGame};
use crate::replicator::Trajectory;
use crate::scalar::Scalar;
use crate::shapley::ShapleyTriangle;
use crate::simplex::{SimplexPoint, StrategySet};

/// `max(mass off the face, |max_face (Ux)_i - sum_k a_k x_k|)`; zero exactly
/// on the Shapley triangle.
pub fn distance_to_shapley<T: Scalar>(g: &SymmetricGame, tri: &ShapleyTriangle, x: &SimplexPoint<T>) -> T {
    let w = x.weights();
    let face = tri.face_set();
    let off = T::one() - x.mass(face);
    let level = tri
        .face
        .iter()
        .zip(&tri.coefficients)
        .fold(T::zero(), |acc, (&i, a)| acc + T::from_rational(a) * w[i].clone());
    let max = tri
        .face
        .iter()
        .map(|&i| g.row_dot(i, w))
        .reduce(|m, v| if v > m { v } else { m })
        .unwrap();
    let gap = (max - level).abs();
    if off > gap {
        off
    } else {
        gap
    }
}

/// `max(1 - mass on face, smallest normalized face share)`; zero exactly on
/// the heteroclinic cycle formed by the edges of the face.
pub fn cycle_proximity<T: Scalar>(x: &SimplexPoint<T>, face: StrategySet) -> T {
    let mass = x.mass(face);
    if mass <= T::zero() {
        return T::one();
    }
    let min_share = face
        .iter()
        .map(|i| x.get(i).clone() / mass.clone())
        .reduce(|m, v| if v < m { v } else { m })
        .unwrap();
    let off = T::one() - mass;
    if off > min_share {
        off
    } else {
        min_share
    }
}

/// A run to analyse.
#[derive(Clone, Copy, Debug)]
pub enum Run<'a> {
    Br(&'a BRSolution),
    Rep(&'a Trajectory),
}

impl Run<'_> {
    pub fn end_time(&self) -> f64 {
        match self {
            Run::Br(s) => s.end_time(),
            Run::Rep(t) => t.end_time(),
        }
    }

    /// Shares sampled over `[from, end]`, including both ends. Best-reply
    /// shares are monotone along each segment, so segment boundaries suffice.
    fn window_samples(&self, from: f64) -> Vec<Vec<f64>> {
        let end = self.end_time();
        let mut times = vec![from];
        match self {
            Run::Br(s) => {
                times.extend(s.segments.iter().map(|g| g.t_start).filter(|&t| t > from && t < end));
            }
            Run::Rep(tr) => {
                for pair in tr.times.windows(2) {
                    if pair[1] > from && pair[0] < end {
                        times.push(0.5 * (pair[0] + pair[1]).max(from));
                        if pair[1] < end {
                            times.push(pair[1]);
                        }
                    }
                }
            }
        }
        times.push(end);
        times.into_iter().map(|t| self.shares_at(t)).collect()
    }

    fn shares_at(&self, t: f64) -> Vec<f64> {
        match self {
            Run::Br(s) => s.state_at(t).expect("time within run"),
            Run::Rep(tr) => tr
                .log_state_at(t)
                .expect("time within run")
                .into_iter()
                .map(f64::exp)
                .collect(),
        }
    }

    fn final_shares(&self) -> Vec<f64> {
        self.shares_at(self.end_time())
    }
}

/// Each listed share stays below `threshold` over the final `window` and ends
/// below `threshold / 10`. False when the run is shorter than the window.
pub fn elimination_check(run: Run<'_>, strategies: StrategySet, threshold: f64, window: f64) -> bool {
    let end = run.end_time();
    if end < window {
        return false;
    }
    let samples = run.window_samples(end - window);
    let below = samples.iter().all(|x| strategies.iter().all(|i| x[i] < threshold));
    let last = run.final_shares();
    below && strategies.iter().all(|i| last[i] < threshold / 10.0)
}

/// Sampled observables of a 7x7 replicator run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ClaimSeries {
    pub t: Vec<f64>,
    /// `int_0^t (4 x3 - 3 lambda) ds`.
    pub claim_integral: Vec<f64>,
    pub ln_x4_over_lambda: Vec<f64>,
    pub ln_mu_over_lambda: Vec<f64>,
    pub tau_bar: Vec<f64>,
    pub tau_hat: Vec<f64>,
    /// Closed form of `d/dt ln(mu/lambda)`:
    /// `mu (xhat.A xhat + 1/3 - eps) - lambda (1/3 + xbar.A xbar) + 20 x4`.
    pub ln_mu_over_lambda_rate: Vec<f64>,
}

fn log_sum(l: &[f64], face: StrategySet) -> f64 {
    let m = face.iter().map(|i| l[i]).fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + face.iter().map(|i| (l[i] - m).exp()).sum::<f64>().ln()
}

fn face_quadratic(block: &SymmetricGame, l: &[f64], face: StrategySet) -> f64 {
    let lm = log_sum(l, face);
    let s: Vec<f64> = face.iter().map(|i| (l[i] - lm).exp()).collect();
    let mut out = [0.0; 3];
    block.apply_f64(&s, &mut out);
    s.iter().zip(&out).map(|(a, b)| a * b).sum()
}

pub fn claim_integrals(g77: &SymmetricGame, traj: &Trajectory, times: &[f64]) -> crate::Result<ClaimSeries> {
    if g77.n() != 7 || traj.dim() != 7 {
        return Err(crate::Error::DimensionMismatch { expected: 7, actual: traj.dim() });
    }
    let eps = g77.entry_f64(1, 0);
    let bar = g77.restrict(faces::first())?;
    let hat = g77.restrict(faces::g77_second())?;
    let mut out = ClaimSeries::default();
    for &t in times {
        let l = traj.log_state_at(t)?;
        let integral = traj.integral(t)?;
        let lambda_int: f64 = faces::first().iter().map(|i| integral[i]).sum();
        let ln_lambda = log_sum(&l, faces::first());
        let ln_mu = log_sum(&l, faces::g77_second());
        let (lambda, mu, x4) = (ln_lambda.exp(), ln_mu.exp(), l[3].exp());
        out.t.push(t);
        out.claim_integral.push(4.0 * integral[2] - 3.0 * lambda_int);
        out.ln_x4_over_lambda.push(l[3] - ln_lambda);
        out.ln_mu_over_lambda.push(ln_mu - ln_lambda);
        out.tau_bar.push(traj.rescaled_time(t, Side::Bar)?);
        out.tau_hat.push(traj.rescaled_time(t, Side::Hat)?);
        let qbar = face_quadratic(&bar, &l, faces::first());
        let qhat = face_quadratic(&hat, &l, faces::g77_second());
        out.ln_mu_over_lambda_rate
            .push(mu * (qhat + 1.0 / 3.0 - eps) - lambda * (1.0 / 3.0 + qbar) + 20.0 * x4);
    }
    Ok(out)
}

/// Times and values at which a series sets a new running maximum, grouped into
/// episodes: maximal runs of consecutive samples that each raise the record.
pub fn record_episodes(t: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let mut episodes: Vec<(f64, f64)> = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut in_episode = false;
    for (k, (&ti, &v)) in t.iter().zip(values).enumerate() {
        if v > best && k > 0 {
            match episodes.last_mut() {
                Some(last) if in_episode => last.1 = v,
                _ => episodes.push((ti, v)),
            }
            in_episode = true;
        } else {
            in_episode = false;
        }
        best = best.max(v);
    }
    episodes
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub geometric: f64,
    pub elimination: f64,
    pub window: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { geometric: 1e-8, elimination: 1e-12, window: 20.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    ConvergedToSt { face: StrategySet },
    ConvergedToCycle { face: StrategySet },
    Eliminated { strategies: StrategySet },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn label(&self) -> String {
        match self {
            Verdict::ConvergedToSt { face } => format!("converged_to_ST({face})"),
            Verdict::ConvergedToCycle { face } => format!("converged_to_cycle({face})"),
            Verdict::Eliminated { strategies } => format!("eliminated({strategies})"),
            Verdict::Inconclusive { .. } => "inconclusive".into(),
        }
    }
}

/// What a run is expected to do.
#[derive(Clone, Debug)]
pub struct Targets {
    pub triangle: Option<ShapleyTriangle>,
    pub cycle_face: Option<StrategySet>,
    pub eliminate: StrategySet,
    pub thresholds: Thresholds,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub verdict: Verdict,
    /// Strategies that passed the elimination check.
    pub eliminated: Option<StrategySet>,
    /// Runs whose continuation was not unique; excluded from pass/fail counts.
    pub flagged: bool,
    pub metrics: BTreeMap<String, f64>,
    pub thresholds: Thresholds,
    /// Free-form run metadata (seed, tolerances, horizon, ...).
    pub metadata: Value,
}

/// Applies the threshold battery to a finished run.
pub fn classify_run(g: &SymmetricGame, run: Run<'_>, targets: &Targets, metadata: Value) -> ConvergenceReport {
    let th = &targets.thresholds;
    let mut metrics = BTreeMap::new();
    let x = run.final_shares();
    let final_point = SimplexPoint::from_trusted(x.clone());
    metrics.insert("end_time".to_string(), run.end_time());
    metrics.insert(
        "final_eliminated_mass".to_string(),
        targets.eliminate.iter().map(|i| x[i]).sum(),
    );
    if x.len() == 7 {
        metrics.insert("final_lambda".into(), faces::first().iter().map(|i| x[i]).sum());
        metrics.insert("final_mu".into(), faces::g77_second().iter().map(|i| x[i]).sum());
        metrics.insert("final_x4".into(), x[faces::G77_LINK]);
    }
    let eliminated = (!targets.eliminate.is_empty()
        && elimination_check(run, targets.eliminate, th.elimination, th.window))
    .then_some(targets.eliminate);
    let elimination_ok = targets.eliminate.is_empty() || eliminated.is_some();
    let mut flagged = false;
    let mut reason = None;
    let mut converged = None;

    if let Some(tri) = &targets.triangle {
        let ux = g.apply(&x).expect("dimension checked by the run");
        let max_face = tri.face.iter().map(|&i| ux[i]).fold(f64::NEG_INFINITY, f64::max);
        metrics.insert("final_max_face_payoff".into(), max_face);
        metrics.insert("final_distance_to_st".into(), distance_to_shapley(g, tri, &final_point));
    }
    if let Some(face) = targets.cycle_face {
        metrics.insert("final_cycle_proximity".into(), cycle_proximity(&final_point, face));
    }

    match run {
        Run::Br(sol) => {
            metrics.insert("event_count".into(), sol.events.len() as f64);
            match &sol.termination {
                Termination::NonUniqueContinuation { .. } => {
                    flagged = true;
                    reason = Some("non_unique_continuation".to_string());
                }
                Termination::Equilibrium { .. } => reason = Some("reached a rest point".to_string()),
                Termination::Horizon => {}
            }
            if let (Some(tri), None) = (&targets.triangle, &reason) {
                let face = tri.face_set();
                let targets_in_face = |k: usize| sol.segments[k..].iter().all(|s| face.contains(s.target));
                let lock = (0..sol.segments.len()).find(|&k| targets_in_face(k));
                if let Some(k) = lock {
                    metrics.insert("lock_in_time".into(), sol.segments[k].t_start);
                    let after: Vec<_> = sol.events.iter().filter(|e| e.time >= sol.segments[k].t_start).collect();
                    if after.len() >= 3 {
                        let d = after[after.len() - 3..]
                            .iter()
                            .map(|e| tri.nearest_vertex_distance(e.state.to_float().as_slice()))
                            .fold(0.0, f64::max);
                        metrics.insert("max_vertex_distance_last_cycle".into(), d);
                        if d < th.geometric && elimination_ok {
                            converged = Some(Verdict::ConvergedToSt { face });
                        }
                    }
                }
            }
        }
        Run::Rep(traj) => {
            metrics.insert("steps".into(), traj.steps() as f64);
            if x.len() == 7 {
                // Final shares routinely underflow; the logs do not.
                let l = traj.final_log_state();
                metrics.insert("final_ln_lambda".into(), log_sum(l, faces::first()));
                metrics.insert("final_ln_x4".into(), l[faces::G77_LINK]);
            }
            if let Some(face) = targets.cycle_face {
                let prox = cycle_proximity(&final_point, face);
                if prox < th.geometric && elimination_ok {
                    converged = Some(Verdict::ConvergedToCycle { face });
                }
            }
        }
    }

    let verdict = match (converged, eliminated, reason) {
        (Some(v), _, _) => v,
        (None, _, Some(r)) => Verdict::Inconclusive { reason: r },
        (None, Some(s), None) => Verdict::Eliminated { strategies: s },
        (None, None, None) => Verdict::Inconclusive { reason: "no threshold met".into() },
    };
    ConvergenceReport { verdict, eliminated, flagged, metrics, thresholds: th.clone(), metadata }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::best_reply::{integrate_br, BrOptions};
    use crate::game::{build_game_66, build_game_77, RpsSpec};
    use crate::rational::{rat, int};
    use crate::replicator::{integrate_rep, RepOptions};
    use crate::shapley::shapley_triangle;
    use crate::simplex::{FloatPoint, RationalPoint};
    use crate::BigRational;
    use serde_json::json;

    fn st456() -> (SymmetricGame, ShapleyTriangle) {
        let g = build_game_66();
        let tri = shapley_triangle(&RpsSpec::Epsilon(rat(1, 5)), faces::g66_second(), &g).unwrap();
        (g, tri)
    }

    #[test]
    fn distance_examples() {
        let (g, tri) = st456();
        for v in &tri.vertices {
            assert_eq!(distance_to_shapley(&g, &tri, v), BigRational::from_integer(0.into()));
        }
        let n456 = RationalPoint::face_barycenter(6, faces::g66_second());
        assert_eq!(distance_to_shapley(&g, &tri, &n456), rat(4, 3));
        // Midpoint of an edge of the triangle is on it too.
        let mid = SimplexPoint::from_trusted(
            tri.vertices[0].weights().iter().zip(tri.vertices[1].weights()).map(|(a, b)| (a + b) / int(2)).collect(),
        );
        assert_eq!(distance_to_shapley(&g, &tri, &mid), rat(0, 1));
    }

    #[test]
    fn cycle_proximity_examples() {
        let face = faces::g77_second();
        assert_eq!(cycle_proximity(&RationalPoint::vertex(7, 4), face), rat(0, 1));
        assert_eq!(cycle_proximity(&RationalPoint::face_barycenter(7, face), face), rat(1, 3));
        let edge = RationalPoint::from_integer_weights(&[0, 0, 0, 0, 1, 1, 0]).unwrap();
        assert_eq!(cycle_proximity(&edge, face), rat(0, 1));
    }

    #[test]
    fn br66_run_is_classified_as_converged() {
        let (g, tri) = st456();
        let x0 = RationalPoint::from_integer_weights(&[3, 1, 4, 1, 5, 9]).unwrap();
        let sol = integrate_br(&g, &x0, 60.0, &BrOptions::default()).unwrap();
        let targets = Targets {
            triangle: Some(tri),
            cycle_face: None,
            eliminate: faces::first(),
            thresholds: Thresholds::default(),
        };
        let r = classify_run(&g, Run::Br(&sol), &targets, json!({}));
        assert_eq!(r.verdict, Verdict::ConvergedToSt { face: faces::g66_second() });
        assert_eq!(r.eliminated, Some(faces::first()));
        assert!(elimination_check(Run::Br(&sol), faces::first(), 1e-12, 20.0));
        // Pure function of the run.
        let again = classify_run(&g, Run::Br(&sol), &targets, json!({}));
        assert_eq!(r.metrics, again.metrics);
    }

    #[test]
    fn constant_run_does_not_eliminate() {
        let g = build_game_77(&rat(1, 50)).unwrap();
        let opts = RepOptions { allow_faces: true, ..Default::default() };
        let n123 = FloatPoint::face_barycenter(7, faces::first());
        let traj = integrate_rep(&g, &n123, 30.0, &opts).unwrap();
        assert!(!elimination_check(Run::Rep(&traj), faces::first(), 1e-12, 20.0));
        let series = claim_integrals(&g, &traj, &[10.0, 20.0]).unwrap();
        assert!((series.claim_integral[0] + 50.0 / 3.0).abs() < 1e-9);
        assert!(series.claim_integral[1] < series.claim_integral[0]);
    }

    #[test]
    fn records_group_into_episodes() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let v = [0.0, 1.0, 2.0, 1.0, 0.5, 3.0, 4.0];
        assert_eq!(record_episodes(&t, &v), vec![(1.0, 2.0), (5.0, 4.0)]);
    }
}
