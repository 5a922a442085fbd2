//! Replicator dynamics `x_i' = x_i [(Ux)_i - x.Ux]`, integrated in log
//! coordinates so that shares of order `e^{-500}` near heteroclinic cycles
//! keep their full relative precision.

use serde::Serialize;

use crate::best_reply::Side;
use crate::error::{Error, Result};
use crate::game::{faces, SymmetricGame};
use crate::ode::{self, DenseStep, OdeOptions, OdeSystem};
use crate::scalar::Scalar;
use crate::simplex::{FloatPoint, SimplexPoint, StrategySet};

/// `x_i [(Ux)_i - x.Ux]`.
pub fn rep_rhs<T: Scalar>(g: &SymmetricGame, x: &SimplexPoint<T>) -> Result<Vec<T>> {
    let ux = g.payoff_vector(x)?;
    let avg = crate::game::dot(x.weights(), &ux);
    Ok(x.weights()
        .iter()
        .zip(&ux)
        .map(|(xi, ui)| xi.clone() * (ui.clone() - avg.clone()))
        .collect())
}

/// Payoff-functional dynamics `x_i [f((Ux)_i) - sum_j x_j f((Ux)_j)]`.
pub fn functional_rhs(g: &SymmetricGame, x: &FloatPoint, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let fx: Vec<f64> = g.payoff_vector(x)?.into_iter().map(f).collect();
    if fx.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: 0.0 });
    }
    let avg: f64 = x.as_slice().iter().zip(&fx).map(|(a, b)| a * b).sum();
    Ok(x.as_slice().iter().zip(&fx).map(|(xi, fi)| xi * (fi - avg)).collect())
}

/// One step of the discrete replicator map
/// `x_i <- x_i (C + (Ux)_i) / (C + x.Ux)`. Requires `C > -min_ij u_ij`.
pub fn discrete_rep_step<T: Scalar>(g: &SymmetricGame, x: &SimplexPoint<T>, c: &T) -> Result<SimplexPoint<T>> {
    let min = g.entries().iter().min().expect("nonempty game");
    if !(c.clone() + T::from_rational(min) > T::zero()) {
        return Err(Error::OutOfRange(format!("need C > {}, got {c:?}", -min)));
    }
    let ux = g.payoff_vector(x)?;
    let den = c.clone() + crate::game::dot(x.weights(), &ux);
    let next: Vec<T> = x
        .weights()
        .iter()
        .zip(ux)
        .map(|(xi, ui)| xi.clone() * (c.clone() + ui) / den.clone())
        .collect();
    if T::EXACT {
        Ok(SimplexPoint::from_trusted(next))
    } else {
        SimplexPoint::normalized(next)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RepOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Simpson subintervals per accepted step for time integrals (even).
    pub samples_per_step: usize,
    /// Accept starts on the boundary; zero shares stay zero.
    pub allow_faces: bool,
}

impl Default for RepOptions {
    fn default() -> Self {
        RepOptions { rtol: 1e-9, atol: 1e-12, samples_per_step: 10, allow_faces: false }
    }
}

struct LogReplicator<'a> {
    g: &'a SymmetricGame,
    active: Vec<bool>,
    x: Vec<f64>,
    ux: Vec<f64>,
}

impl OdeSystem for LogReplicator<'_> {
    fn rhs(&mut self, t: f64, l: &[f64], dl: &mut [f64]) -> Result<()> {
        softmax(l, &self.active, &mut self.x);
        self.g.apply_f64(&self.x, &mut self.ux);
        let avg: f64 = self.x.iter().zip(&self.ux).map(|(a, b)| a * b).sum();
        for i in 0..l.len() {
            dl[i] = if self.active[i] { self.ux[i] - avg } else { 0.0 };
        }
        if !avg.is_finite() {
            return Err(Error::NonFinite { t });
        }
        Ok(())
    }
}

/// Normalized exponentials of the active log weights.
fn softmax(l: &[f64], active: &[bool], out: &mut [f64]) {
    let m = l
        .iter()
        .zip(active)
        .filter(|(_, &a)| a)
        .map(|(v, _)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for i in 0..l.len() {
        out[i] = if active[i] { (l[i] - m).exp() } else { 0.0 };
        sum += out[i];
    }
    for v in out.iter_mut() {
        *v /= sum;
    }
}

/// `l - logsumexp(l)` over the active coordinates; `-inf` elsewhere.
fn normalize_logs(l: &[f64], active: &[bool]) -> Vec<f64> {
    let m = l
        .iter()
        .zip(active)
        .filter(|(_, &a)| a)
        .map(|(v, _)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let lse = m + l
        .iter()
        .zip(active)
        .filter(|(_, &a)| a)
        .map(|(v, _)| (v - m).exp())
        .sum::<f64>()
        .ln();
    l.iter()
        .zip(active)
        .map(|(v, &a)| if a { v - lse } else { f64::NEG_INFINITY })
        .collect()
}

/// `ln sum_{i in face} exp(l_i)` for normalized logs.
fn log_mass(l: &[f64], face: StrategySet) -> f64 {
    let m = face.iter().map(|i| l[i]).fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + face.iter().map(|i| (l[i] - m).exp()).sum::<f64>().ln()
}

/// A solution of the replicator dynamics with dense output.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Accepted step endpoints, starting at 0.
    pub times: Vec<f64>,
    pub states: Vec<FloatPoint>,
    /// Normalized natural-log shares (`-inf` on frozen coordinates).
    pub log_states: Vec<Vec<f64>>,
    steps: Vec<DenseStep>,
    active: Vec<bool>,
    /// `prefix[k] = int_0^{times[k]} x(s) ds`.
    prefix: Vec<Vec<f64>>,
    samples_per_step: usize,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.active.len()
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn steps(&self) -> usize {
        self.steps.len()
    }

    pub fn final_state(&self) -> &FloatPoint {
        self.states.last().unwrap()
    }

    pub fn final_log_state(&self) -> &[f64] {
        self.log_states.last().unwrap()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let end = self.end_time();
        if !(0.0..=end).contains(&t) {
            return Err(Error::TimeOutOfRange { t, end });
        }
        Ok(())
    }

    fn step_index(&self, t: f64) -> Option<usize> {
        if self.steps.is_empty() {
            return None;
        }
        Some((self.steps.partition_point(|s| s.t0 <= t).max(1) - 1).min(self.steps.len() - 1))
    }

    /// Normalized log shares at time `t`.
    pub fn log_state_at(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        let Some(k) = self.step_index(t) else {
            return Ok(self.log_states[0].clone());
        };
        let mut l = vec![0.0; self.dim()];
        self.steps[k].eval(t, &mut l);
        Ok(normalize_logs(&l, &self.active))
    }

    pub fn state_at(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        Ok(self.state_unchecked(t))
    }

    fn state_unchecked(&self, t: f64) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        match self.step_index(t) {
            None => x.copy_from_slice(self.states[0].as_slice()),
            Some(k) => {
                let mut l = vec![0.0; self.dim()];
                self.steps[k].eval(t, &mut l);
                softmax(&l, &self.active, &mut x);
            }
        }
        x
    }

    fn simpson(&self, a: f64, b: f64) -> Vec<f64> {
        let n = self.dim();
        let m = self.samples_per_step;
        let mut acc = vec![0.0; n];
        if b <= a {
            return acc;
        }
        let h = (b - a) / m as f64;
        for j in 0..=m {
            let w = if j == 0 || j == m { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
            let x = self.state_unchecked(a + h * j as f64);
            for i in 0..n {
                acc[i] += w * x[i];
            }
        }
        acc.iter_mut().for_each(|v| *v *= h / 3.0);
        acc
    }

    /// `int_0^t x(s) ds`, per strategy.
    pub fn integral(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        let k = self.times.partition_point(|&s| s <= t).max(1) - 1;
        let mut out = self.prefix[k].clone();
        for (o, p) in out.iter_mut().zip(self.simpson(self.times[k], t)) {
            *o += p;
        }
        Ok(out)
    }

    /// `(1/t) int_0^t x(s) ds`.
    pub fn time_average(&self, t: f64) -> Result<FloatPoint> {
        if t <= 0.0 {
            return Err(Error::TimeOutOfRange { t, end: self.end_time() });
        }
        let integral = self.integral(t)?;
        FloatPoint::from_floats(integral.into_iter().map(|v| v / t).collect())
    }

    /// `int_0^t lambda(s) ds` (bar) or `int_0^t mu(s) ds` (hat) for 7x7 runs.
    pub fn rescaled_time(&self, t: f64, which: Side) -> Result<f64> {
        if self.dim() != 7 {
            return Err(Error::DimensionMismatch { expected: 7, actual: self.dim() });
        }
        let face = match which {
            Side::Bar => faces::first(),
            Side::Hat => faces::g77_second(),
        };
        let integral = self.integral(t)?;
        Ok(face.iter().map(|i| integral[i]).sum())
    }

    /// Share vector of `face` normalized to one, computed from log shares.
    pub fn face_share_at(&self, t: f64, face: StrategySet) -> Result<Option<Vec<f64>>> {
        let l = self.log_state_at(t)?;
        let lm = log_mass(&l, face);
        if lm == f64::NEG_INFINITY {
            return Ok(None);
        }
        Ok(Some(face.iter().map(|i| (l[i] - lm).exp()).collect()))
    }
}

/// Integrates the replicator dynamics from `x0` over `[0, horizon]`.
pub fn integrate_rep(g: &SymmetricGame, x0: &FloatPoint, horizon: f64, opts: &RepOptions) -> Result<Trajectory> {
    if x0.dim() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), actual: x0.dim() });
    }
    if !x0.is_interior() && !opts.allow_faces {
        return Err(Error::NotInSimplex("start must be interior".into()));
    }
    let l0: Vec<f64> = x0.as_slice().iter().map(|v| v.ln()).collect();
    integrate_rep_logs(g, &l0, horizon, opts)
}

/// As [`integrate_rep`], starting from (unnormalized) log shares; `-inf`
/// marks a strategy that is absent.
pub fn integrate_rep_logs(g: &SymmetricGame, l0: &[f64], horizon: f64, opts: &RepOptions) -> Result<Trajectory> {
    if l0.len() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), actual: l0.len() });
    }
    if !(horizon > 0.0) {
        return Err(Error::OutOfRange(format!("horizon must be positive, got {horizon}")));
    }
    if opts.samples_per_step == 0 || opts.samples_per_step % 2 == 1 {
        return Err(Error::OutOfRange("samples_per_step must be even and positive".into()));
    }
    let active: Vec<bool> = l0.iter().map(|v| *v > f64::NEG_INFINITY).collect();
    if !active.iter().any(|&a| a) || l0.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::NotInSimplex("no finite log share".into()));
    }
    let n = g.n();
    let start = normalize_logs(l0, &active);
    // Frozen coordinates are carried as 0 inside the solver.
    let y0: Vec<f64> = start.iter().map(|v| if v.is_finite() { *v } else { 0.0 }).collect();
    let mut x_start = vec![0.0; n];
    softmax(&y0, &active, &mut x_start);

    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![SimplexPoint::from_trusted(x_start)],
        log_states: vec![start],
        steps: Vec::new(),
        active: active.clone(),
        prefix: vec![vec![0.0; n]],
        samples_per_step: opts.samples_per_step,
    };
    let mut sys = LogReplicator { g, active: active.clone(), x: vec![0.0; n], ux: vec![0.0; n] };
    let ode_opts = OdeOptions { rtol: opts.rtol, atol: opts.atol, ..OdeOptions::default() };
    let mut steps = Vec::new();
    ode::integrate(&mut sys, 0.0, &y0, horizon, &active, &ode_opts, |step, y| {
        let m = y
            .iter()
            .zip(&active)
            .filter(|(_, &a)| a)
            .map(|(v, _)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        for (v, &a) in y.iter_mut().zip(&active) {
            if a {
                *v -= m;
            }
        }
        steps.push(step);
    })?;
    traj.steps = steps;
    for k in 0..traj.steps.len() {
        let (t0, t1) = (traj.steps[k].t0, traj.steps[k].t1());
        let t1 = if k + 1 == traj.steps.len() { horizon } else { t1 };
        let mut l = vec![0.0; n];
        traj.steps[k].eval(t1, &mut l);
        let mut x = vec![0.0; n];
        softmax(&l, &active, &mut x);
        let part = traj.simpson(t0, t1);
        let prev = traj.prefix.last().unwrap();
        let next: Vec<f64> = prev.iter().zip(part).map(|(a, b)| a + b).collect();
        traj.prefix.push(next);
        traj.times.push(t1);
        traj.states.push(SimplexPoint::from_trusted(x));
        traj.log_states.push(normalize_logs(&l, &active));
    }
    Ok(traj)
}

/// Face masses and normalized face states of a 7-strategy state:
/// `lambda = x1 + x2 + x3`, `mu = x5 + x6 + x7`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition<T> {
    pub lambda: T,
    pub mu: T,
    pub x4: T,
    /// `None` when `lambda = 0`.
    pub xbar: Option<Vec<T>>,
    /// `None` when `mu = 0`.
    pub xhat: Option<Vec<T>>,
}

pub fn decompose<T: Scalar>(x: &SimplexPoint<T>) -> Result<Decomposition<T>> {
    if x.dim() != 7 {
        return Err(Error::DimensionMismatch { expected: 7, actual: x.dim() });
    }
    let split = |face: StrategySet| {
        let mass = x.mass(face);
        let share = (!mass.is_zero()).then(|| face.iter().map(|i| x.get(i).clone() / mass.clone()).collect());
        (mass, share)
    };
    let (lambda, xbar) = split(faces::first());
    let (mu, xhat) = split(faces::g77_second());
    Ok(Decomposition { lambda, mu, x4: x.get(faces::G77_LINK).clone(), xbar, xhat })
}

#[derive(Clone, Debug, Serialize)]
pub struct RescaleReport {
    /// `sup_t |xbar(t) - y(taubar(t))|_inf`; `None` when lambda vanishes.
    pub bar: Option<f64>,
    pub hat: Option<f64>,
    pub samples: usize,
    pub horizon: f64,
}

/// Integrates a 7x7 run and, separately, each face game from the run's
/// initial face state, and compares them under the rescaled times.
pub fn verify_rescale_lemma(g77: &SymmetricGame, x0: &FloatPoint, horizon: f64, opts: &RepOptions) -> Result<RescaleReport> {
    if g77.n() != 7 {
        return Err(Error::DimensionMismatch { expected: 7, actual: g77.n() });
    }
    let traj = integrate_rep(g77, x0, horizon, opts)?;
    let samples = 2000;
    let times: Vec<f64> = (0..=samples).map(|k| horizon * k as f64 / samples as f64).collect();
    let side = |which: Side, face: StrategySet| -> Result<Option<f64>> {
        let Some(y0) = traj.face_share_at(0.0, face)? else {
            return Ok(None);
        };
        let block = g77.restrict(face)?;
        let tau_end = traj.rescaled_time(horizon, which)?;
        if tau_end <= 0.0 {
            return Ok(None);
        }
        let y = integrate_rep(&block, &FloatPoint::from_floats(y0)?, tau_end, opts)?;
        let mut worst: f64 = 0.0;
        for &t in &times {
            let tau = traj.rescaled_time(t, which)?.min(tau_end);
            let xs = traj.face_share_at(t, face)?.expect("face mass stays positive");
            let ys = y.state_at(tau)?;
            for (a, b) in xs.iter().zip(&ys) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(Some(worst))
    };
    Ok(RescaleReport {
        bar: side(Side::Bar, faces::first())?,
        hat: side(Side::Hat, faces::g77_second())?,
        samples: times.len(),
        horizon,
    })
}
