//! Dormand-Prince 5(4) with step-size control and continuous (dense) output.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Right-hand side `dy = f(t, y)`.
pub trait OdeSystem {
    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

#[derive(Clone, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            initial_step: 1e-3,
            max_step: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }
}

/// Dense-output polynomial of one accepted step on `[t0, t0 + h]`.
#[derive(Clone, Debug)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    rcont: [Vec<f64>; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Interpolated solution at `t` (meant for `t` in the step).
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        for i in 0..out.len() {
            out[i] = r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
        }
    }
}

/// Integrates from `(t0, y0)` to `t_end`. `active[i] == false` freezes
/// component `i` and removes it from the error norm. After every accepted
/// step `observer` receives the dense step and may adjust the new state in
/// place, but only in ways that leave the right-hand side unchanged.
pub fn integrate<S, F>(
    sys: &mut S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    active: &[bool],
    opts: &OdeOptions,
    mut observer: F,
) -> Result<Vec<f64>>
where
    S: OdeSystem,
    F: FnMut(DenseStep, &mut [f64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    sys.rhs(t, &y, &mut k[0])?;
    let mut h = opts.initial_step.min(t_end - t).min(opts.max_step);
    let mut steps = 0usize;
    let mut err_old: f64 = 1e-4;
    let mut last_rejected = false;

    while t < t_end {
        if steps >= opts.max_steps {
            return Err(Error::StepSizeUnderflow { t });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t });
        }
        let stage = |ytmp: &mut Vec<f64>, k: &[Vec<f64>; 7], coef: &[(usize, f64)]| {
            for i in 0..n {
                let mut acc = y[i];
                if active[i] {
                    for &(s, c) in coef {
                        acc += h * c * k[s][i];
                    }
                }
                ytmp[i] = acc;
            }
        };
        stage(&mut ytmp, &k, &[(0, A21)]);
        sys.rhs(t + C2 * h, &ytmp, &mut k[1])?;
        stage(&mut ytmp, &k, &[(0, A31), (1, A32)]);
        sys.rhs(t + C3 * h, &ytmp, &mut k[2])?;
        stage(&mut ytmp, &k, &[(0, A41), (1, A42), (2, A43)]);
        sys.rhs(t + C4 * h, &ytmp, &mut k[3])?;
        stage(&mut ytmp, &k, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
        sys.rhs(t + C5 * h, &ytmp, &mut k[4])?;
        stage(&mut ynew, &k, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
        sys.rhs(t + h, &ynew, &mut k[5])?;
        stage(&mut ynew, &k, &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)]);
        sys.rhs(t + h, &ynew, &mut k[6])?;
        if ynew.iter().any(|v| v.is_nan()) {
            return Err(Error::NonFinite { t });
        }

        let mut sum = 0.0;
        let mut count = 0usize;
        for i in (0..n).filter(|&i| active[i]) {
            let e = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            sum += (e / sc).powi(2);
            count += 1;
        }
        let err = if count == 0 { 0.0 } else { (sum / count as f64).sqrt() };
        if !err.is_finite() {
            return Err(Error::NonFinite { t });
        }
        steps += 1;

        // PI controller (Hairer's DOPRI5 defaults).
        let fac11 = err.powf(0.2 - 0.04 * 0.75);
        let mut fac = fac11 / err_old.powf(0.04);
        fac = (fac / 0.9).clamp(1.0 / 10.0, 1.0 / 0.2);
        if err <= 1.0 {
            err_old = err.max(1e-4);
            let mut rcont: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
            for i in 0..n {
                let ydiff = ynew[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k[6][i] - bspl;
                rcont[4][i] = if active[i] {
                    h * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i])
                } else {
                    0.0
                };
            }
            t = if last { t_end } else { t + h };
            y.copy_from_slice(&ynew);
            observer(DenseStep { t0: t - h, h, rcont }, &mut y);
            let (first, rest) = k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            let mut hnew = h / fac;
            if last_rejected {
                hnew = hnew.min(h);
            }
            h = hnew.min(opts.max_step);
            last_rejected = false;
        } else {
            h /= (fac11 / 0.9).min(1.0 / 0.2);
            last_rejected = true;
        }
    }
    Ok(y)
}
