//! Seeded initial conditions and random perturbations.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_distr::Exp1;

use crate::game::faces;
use crate::simplex::{FloatPoint, RationalPoint, SimplexPoint, StrategySet};

/// Resolution of float-to-rational conversion of sampled points.
const RATIONAL_SCALE: f64 = (1u64 << 40) as f64;

/// Uniform point of the simplex: normalized i.i.d. exponential spacings.
pub fn uniform_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Nearby interior rational point: every share is rounded to a multiple of
/// `2^-40` (at least one unit) and the result renormalized exactly.
pub fn to_rational_point(w: &[f64]) -> RationalPoint {
    let units: Vec<i64> = w
        .iter()
        .map(|v| ((v * RATIONAL_SCALE).round() as i64).max(1))
        .collect();
    let total: i64 = units.iter().sum();
    SimplexPoint::from_trusted(
        units
            .into_iter()
            .map(|u| BigRational::new(BigInt::from(u), BigInt::from(total)))
            .collect(),
    )
}

pub fn random_interior_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RationalPoint {
    to_rational_point(&uniform_simplex(rng, n))
}

fn face_share(x: &[f64], face: StrategySet) -> Vec<f64> {
    let mass: f64 = face.iter().map(|i| x[i]).sum();
    face.iter().map(|i| x[i] / mass).collect()
}

/// Whether both normalized face states of a 7-strategy point stay at least
/// `tol` (max-norm) away from the barycenter.
pub fn off_face_barycenters(x: &[f64], tol: f64) -> bool {
    [faces::first(), faces::g77_second()].iter().all(|&face| {
        face_share(x, face)
            .iter()
            .map(|v| (v - 1.0 / 3.0).abs())
            .fold(0.0, f64::max)
            >= tol
    })
}

/// Uniform interior start of the 7x7 game with neither face state within
/// `1e-6` of its barycenter (redrawn otherwise).
pub fn rep77_start<R: Rng + ?Sized>(rng: &mut R) -> RationalPoint {
    loop {
        let x = uniform_simplex(rng, 7);
        if off_face_barycenters(&x, 1e-6) {
            let p = to_rational_point(&x);
            if off_face_barycenters(p.to_float().as_slice(), 1e-6) {
                return p;
            }
        }
    }
}

/// Interior point within max-norm distance about `dist` of the heteroclinic
/// cycle on `face` (the relative boundary of the face): a random point of a
/// random edge of the face plus mass below `dist` on every other strategy.
pub fn near_cycle_start<R: Rng + ?Sized>(rng: &mut R, n: usize, face: StrategySet, dist: f64) -> FloatPoint {
    let idx: Vec<usize> = face.iter().collect();
    let k = rng.random_range(0..idx.len());
    let (a, b) = (idx[k], idx[(k + 1) % idx.len()]);
    let s: f64 = rng.random_range(0.05..0.95);
    let mut x = vec![0.0; n];
    x[a] = s;
    x[b] = 1.0 - s;
    for (i, v) in x.iter_mut().enumerate() {
        if i != a && i != b {
            *v = dist * rng.random_range(0.1..1.0) / 2.0;
        }
    }
    FloatPoint::from_floats(x).expect("positive weights")
}

/// Random rational perturbation matrix with entries `delta * k / 1000`,
/// `k` uniform in `-1000..=1000`.
pub fn random_perturbation<R: Rng + ?Sized>(rng: &mut R, n: usize, delta: &BigRational) -> Vec<BigRational> {
    (0..n * n)
        .map(|_| {
            let k: i64 = rng.random_range(-1000..=1000);
            delta * BigRational::new(BigInt::from(k), BigInt::from(1000))
        })
        .collect()
}
