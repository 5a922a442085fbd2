//! Shapley triangles of outward-cycling RPS faces.
//!
//! On a face `{f1, f2, f3}` the best-reply cycle is `f1 -> f2 -> f3 -> f1`.
//! The triangle vertex where `f_k` hands over to `f_{k+1}` solves
//! `(Ux)_{f_k} = (Ux)_{f_{k+1}} = sum_l a_l x_l` on the face.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::game::{build_rps, is_outward_cycling, RpsSpec, SymmetricGame};
use crate::linalg::{self, LinearSolution};
use crate::rational;
use crate::scalar::Scalar;
use crate::simplex::{RationalPoint, SimplexPoint, StrategySet};

#[derive(Clone, Debug, PartialEq)]
pub struct ShapleyTriangle {
    /// Face strategies in cyclic order.
    pub face: [usize; 3],
    /// `vertices[k]` is where `face[k]` and `face[k + 1]` tie as best replies.
    pub vertices: [RationalPoint; 3],
    /// Coefficients `a_k` of `V(x) = max_k (Ux)_{face[k]} - sum_k a_k x_{face[k]}`.
    pub coefficients: [BigRational; 3],
}

impl ShapleyTriangle {
    pub fn face_set(&self) -> StrategySet {
        self.face.iter().copied().collect()
    }

    /// Vertex closest to `e_{face[2]}` (the `face[2] -> face[0]` switch).
    pub fn q_bar(&self) -> &RationalPoint {
        &self.vertices[2]
    }

    pub fn vertices_f64(&self) -> Vec<Vec<f64>> {
        self.vertices.iter().map(|v| v.to_float().into_weights()).collect()
    }

    /// Max-norm distance from `x` to the nearest vertex.
    pub fn nearest_vertex_distance(&self, x: &[f64]) -> f64 {
        self.vertices_f64()
            .iter()
            .map(|v| v.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "face": self.face.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "vertices": self.vertices.iter().map(|v| rational::json::vec_to_value(v.weights())).collect::<Vec<_>>(),
            "coefficients": rational::json::vec_to_value(&self.coefficients),
        })
    }
}

/// The Shapley triangle of the RPS game `spec`, embedded on `face` of `host`.
///
/// `spec` must describe the host's face block up to a positive rescaling;
/// this is checked by requiring `V = 0` at every embedded vertex.
pub fn shapley_triangle(spec: &RpsSpec, face: StrategySet, host: &SymmetricGame) -> Result<ShapleyTriangle> {
    spec.validate()?;
    if face.len() != 3 || face.iter().any(|i| i >= host.n()) {
        return Err(Error::OutOfRange(format!("face {face} must be 3 strategies of the host game")));
    }
    if !is_outward_cycling(spec) {
        return Err(Error::DegenerateTriangle);
    }
    let local: [Vec<BigRational>; 3] = match spec {
        RpsSpec::Epsilon(eps) => {
            let e2 = eps * eps;
            let one = BigRational::one();
            [
                vec![one.clone(), e2.clone(), eps.clone()],
                vec![eps.clone(), one.clone(), e2.clone()],
                vec![e2, eps.clone(), one],
            ]
        }
        _ => {
            let block = build_rps(spec)?;
            let a = spec.diagonal();
            let solve_pair = |k: usize| -> Result<Vec<BigRational>> {
                let l = (k + 1) % 3;
                let row = |i: usize| -> Vec<BigRational> {
                    (0..3).map(|c| block.entry(i, c) - &a[c]).collect()
                };
                let rows = vec![row(k), row(l), vec![BigRational::one(); 3]];
                let rhs = vec![BigRational::zero(), BigRational::zero(), BigRational::one()];
                match linalg::solve(&rows, &rhs) {
                    LinearSolution::Unique(x) => Ok(x),
                    _ => Err(Error::DegenerateTriangle),
                }
            };
            [solve_pair(0)?, solve_pair(1)?, solve_pair(2)?]
        }
    };
    let idx: Vec<usize> = face.iter().collect();
    let embed = |w: &[BigRational]| -> Result<RationalPoint> {
        let sum: BigRational = w.iter().sum();
        let mut full = vec![BigRational::zero(); host.n()];
        for (k, &i) in idx.iter().enumerate() {
            full[i] = &w[k] / &sum;
        }
        RationalPoint::new(full).map_err(|_| Error::DegenerateTriangle)
    };
    let vertices = [embed(&local[0])?, embed(&local[1])?, embed(&local[2])?];
    let coefficients = [0, 1, 2].map(|k| host.entry(idx[k], idx[k]).clone());
    let tri = ShapleyTriangle { face: [idx[0], idx[1], idx[2]], vertices, coefficients };
    for (k, v) in tri.vertices.iter().enumerate() {
        let ux = host.apply(v.weights())?;
        let level = level(&tri, v.weights());
        let (i, j) = (tri.face[k], tri.face[(k + 1) % 3]);
        if v_value(host, &tri, v)? != BigRational::zero() || ux[i] != level || ux[j] != level {
            return Err(Error::InvalidRps(format!(
                "spec does not match the host block on face {face}"
            )));
        }
    }
    Ok(tri)
}

fn level<T: Scalar>(tri: &ShapleyTriangle, x: &[T]) -> T {
    tri.face
        .iter()
        .zip(&tri.coefficients)
        .fold(T::zero(), |acc, (&i, a)| acc + T::from_rational(a) * x[i].clone())
}

/// `V(x) = max over the face of (Ux)_i - sum_k a_k x_k`.
pub fn v_value<T: Scalar>(g: &SymmetricGame, tri: &ShapleyTriangle, x: &SimplexPoint<T>) -> Result<T> {
    let w = x.weights();
    if w.len() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), actual: w.len() });
    }
    let max = tri
        .face
        .iter()
        .map(|&i| g.row_dot(i, w))
        .reduce(|m, v| if v > m { v } else { m })
        .expect("three face strategies");
    Ok(max - level(tri, w))
}

/// `W(x)`: largest payoff difference between two strategies of `face`.
pub fn gap_function_w<T: Scalar>(g: &SymmetricGame, face: StrategySet, x: &SimplexPoint<T>) -> Result<T> {
    if face.len() != 3 {
        return Err(Error::OutOfRange(format!("face {face} must have 3 strategies")));
    }
    if x.dim() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), actual: x.dim() });
    }
    let pay: Vec<T> = face.iter().map(|i| g.row_dot(i, x.weights())).collect();
    let max = pay.iter().cloned().reduce(|m, v| if v > m { v } else { m }).unwrap();
    let min = pay.iter().cloned().reduce(|m, v| if v < m { v } else { m }).unwrap();
    Ok(max - min)
}
