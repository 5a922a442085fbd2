//! Symmetric games, the Rock-Paper-Scissors families and the 6x6 / 7x7
//! constructions, payoff evaluation and better-reply structure.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{self, int, rat};
use crate::scalar::Scalar;
use crate::simplex::{SimplexPoint, StrategySet, MAX_STRATEGIES};

/// A finite symmetric two-player game given by the row player's payoff
/// matrix `U`; entry `(i, j)` is the payoff of strategy `i` against `j`.
///
/// The exact matrix is authoritative; the float view is derived once at
/// construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricGame {
    n: usize,
    payoff: Vec<BigRational>,
    float: Vec<f64>,
}

impl SymmetricGame {
    /// `payoff` is row-major with `n * n` entries.
    pub fn new(n: usize, payoff: Vec<BigRational>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGame(format!("need at least 2 strategies, got {n}")));
        }
        if n > MAX_STRATEGIES {
            return Err(Error::InvalidGame(format!(
                "at most {MAX_STRATEGIES} strategies are supported, got {n}"
            )));
        }
        if payoff.len() != n * n {
            return Err(Error::InvalidGame(format!(
                "expected {} payoff entries, got {}",
                n * n,
                payoff.len()
            )));
        }
        let float = payoff.iter().map(rational::to_f64).collect();
        Ok(SymmetricGame { n, payoff, float })
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidGame("payoff matrix is not square".into()));
        }
        Self::new(n, rows.into_iter().flatten().collect())
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| int(v)).collect())
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigRational {
        &self.payoff[i * self.n + j]
    }

    pub fn entry_f64(&self, i: usize, j: usize) -> f64 {
        self.float[i * self.n + j]
    }

    /// Row-major exact entries.
    pub fn entries(&self) -> &[BigRational] {
        &self.payoff
    }

    /// Row-major float view.
    pub fn float_view(&self) -> &[f64] {
        &self.float
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.payoff[i * self.n..(i + 1) * self.n]
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.float.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: d });
        }
        Ok(())
    }

    /// `Uz` for an arbitrary weight vector (not necessarily on the simplex).
    pub fn apply<T: Scalar>(&self, z: &[T]) -> Result<Vec<T>> {
        self.check_dim(z.len())?;
        Ok((0..self.n).map(|i| self.row_dot(i, z)).collect())
    }

    /// `(Uz)_i`.
    pub fn row_dot<T: Scalar>(&self, i: usize, z: &[T]) -> T {
        self.row(i)
            .iter()
            .zip(z)
            .filter(|(_, zj)| !zj.is_zero())
            .fold(T::zero(), |acc, (u, zj)| acc + T::from_rational(u) * zj.clone())
    }

    /// `(z^T U)_j`, the payoff of `z` against pure strategy `j`.
    pub fn col_dot<T: Scalar>(&self, z: &[T], j: usize) -> T {
        (0..self.n)
            .filter(|&i| !z[i].is_zero())
            .fold(T::zero(), |acc, i| {
                acc + z[i].clone() * T::from_rational(self.entry(i, j))
            })
    }

    /// Float-only fast path for `Ux`.
    pub fn apply_f64(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.float[i * self.n..(i + 1) * self.n];
            *o = row.iter().zip(x).map(|(u, v)| u * v).sum();
        }
    }

    /// The game restricted to `strategies` (in increasing index order).
    pub fn restrict(&self, strategies: StrategySet) -> Result<SymmetricGame> {
        let idx: Vec<usize> = strategies.iter().collect();
        if idx.iter().any(|&i| i >= self.n) {
            return Err(Error::OutOfRange(format!("restriction {strategies} exceeds n = {}", self.n)));
        }
        let payoff = idx
            .iter()
            .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.entry(i, j).clone())
            .collect();
        SymmetricGame::new(idx.len(), payoff)
    }

    /// Entrywise sum with another matrix of the same size.
    pub fn perturbed(&self, delta: &[BigRational]) -> Result<SymmetricGame> {
        self.check_dim_entries(delta.len())?;
        SymmetricGame::new(
            self.n,
            self.payoff.iter().zip(delta).map(|(a, b)| a + b).collect(),
        )
    }

    fn check_dim_entries(&self, len: usize) -> Result<()> {
        if len != self.n * self.n {
            return Err(Error::DimensionMismatch { expected: self.n * self.n, actual: len });
        }
        Ok(())
    }

    pub fn scaled(&self, c: &BigRational) -> Result<SymmetricGame> {
        SymmetricGame::new(self.n, self.payoff.iter().map(|u| u * c).collect())
    }

    /// `Ux`: payoff of every pure strategy against the population state `x`.
    pub fn payoff_vector<T: Scalar>(&self, x: &SimplexPoint<T>) -> Result<Vec<T>> {
        self.apply(x.weights())
    }

    /// `x . Ux`.
    pub fn average_payoff<T: Scalar>(&self, x: &SimplexPoint<T>) -> Result<T> {
        let ux = self.payoff_vector(x)?;
        Ok(dot(x.weights(), &ux))
    }

    /// Transition semantics of the improvement principle: `(i, j)` with
    /// `u_ji > u_ii`, i.e. `j` can take over after a segment aimed at `i`.
    pub fn better_reply_edges(&self) -> BTreeSet<(usize, usize)> {
        let mut edges = BTreeSet::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && self.entry(j, i) > self.entry(i, i) {
                    edges.insert((i, j));
                }
            }
        }
        edges
    }

    /// The transposed convention `u_ij > u_ii`.
    pub fn caption_edges(&self) -> BTreeSet<(usize, usize)> {
        let mut edges = BTreeSet::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && self.entry(i, j) > self.entry(i, i) {
                    edges.insert((i, j));
                }
            }
        }
        edges
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "payoff": rational::json::vec_to_value(&self.payoff),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("game JSON needs an integer field \"n\"".into()))?
            as usize;
        let payoff = v
            .get("payoff")
            .ok_or_else(|| Error::Parse("game JSON needs a \"payoff\" array".into()))?;
        let payoff = rational::json::vec_from_value(payoff)?;
        Self::new(n, payoff)
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Parameters of a 3x3 Rock-Paper-Scissors game in one of its three forms.
#[derive(Clone, Debug, PartialEq)]
pub enum RpsSpec {
    /// Rows `(a1, b2, c3), (c1, a2, b3), (b1, c2, a3)` with `b_i < a_i < c_i`.
    General {
        a: [BigRational; 3],
        b: [BigRational; 3],
        c: [BigRational; 3],
    },
    /// Rows `(0, -alpha, beta), (beta, 0, -alpha), (-alpha, beta, 0)`.
    Cyclic { alpha: BigRational, beta: BigRational },
    /// Rows `(0, -1, eps), (eps, 0, -1), (-1, eps, 0)`, `0 < eps < 1`.
    Epsilon(BigRational),
}

impl RpsSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            RpsSpec::General { a, b, c } => {
                for i in 0..3 {
                    if !(b[i] < a[i] && a[i] < c[i]) {
                        return Err(Error::InvalidRps(format!(
                            "need b{k} < a{k} < c{k}, got b={}, a={}, c={}",
                            b[i],
                            a[i],
                            c[i],
                            k = i + 1
                        )));
                    }
                }
                Ok(())
            }
            RpsSpec::Cyclic { alpha, beta } => {
                if alpha.is_positive() && beta.is_positive() {
                    Ok(())
                } else {
                    Err(Error::InvalidRps(format!("need alpha, beta > 0, got {alpha}, {beta}")))
                }
            }
            RpsSpec::Epsilon(eps) => {
                if eps.is_positive() && eps < &BigRational::one() {
                    Ok(())
                } else {
                    Err(Error::InvalidRps(format!("need 0 < eps < 1, got {eps}")))
                }
            }
        }
    }

    /// Reads the general-form parameters off a 3x3 block.
    pub fn from_matrix(m: &SymmetricGame) -> Result<RpsSpec> {
        if m.n() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, actual: m.n() });
        }
        let e = |i: usize, j: usize| m.entry(i, j).clone();
        let spec = RpsSpec::General {
            a: [e(0, 0), e(1, 1), e(2, 2)],
            b: [e(2, 0), e(0, 1), e(1, 2)],
            c: [e(1, 0), e(2, 1), e(0, 2)],
        };
        spec.validate()?;
        Ok(spec)
    }

    /// An outward-cycling cyclic game is a positive multiple of the epsilon
    /// form with `eps = beta / alpha`.
    pub fn normalize_to_epsilon(&self) -> Option<RpsSpec> {
        match self {
            RpsSpec::Cyclic { alpha, beta } if alpha > beta && beta.is_positive() => {
                Some(RpsSpec::Epsilon(beta / alpha))
            }
            RpsSpec::Epsilon(e) => Some(RpsSpec::Epsilon(e.clone())),
            _ => None,
        }
    }

    /// The diagonal payoffs `a_i` (zero for the cyclic and epsilon forms).
    pub fn diagonal(&self) -> [BigRational; 3] {
        match self {
            RpsSpec::General { a, .. } => a.clone(),
            _ => [BigRational::zero(), BigRational::zero(), BigRational::zero()],
        }
    }
}

pub fn build_rps(spec: &RpsSpec) -> Result<SymmetricGame> {
    spec.validate()?;
    let rows = match spec {
        RpsSpec::General { a, b, c } => vec![
            vec![a[0].clone(), b[1].clone(), c[2].clone()],
            vec![c[0].clone(), a[1].clone(), b[2].clone()],
            vec![b[0].clone(), c[1].clone(), a[2].clone()],
        ],
        RpsSpec::Cyclic { alpha, beta } => {
            let z = BigRational::zero();
            vec![
                vec![z.clone(), -alpha, beta.clone()],
                vec![beta.clone(), z.clone(), -alpha],
                vec![-alpha, beta.clone(), z],
            ]
        }
        RpsSpec::Epsilon(eps) => {
            let z = BigRational::zero();
            let m1 = int(-1);
            vec![
                vec![z.clone(), m1.clone(), eps.clone()],
                vec![eps.clone(), z.clone(), m1.clone()],
                vec![m1, eps.clone(), z],
            ]
        }
    };
    SymmetricGame::from_rows(rows)
}

/// The outward-cycling test on the product of the `a - b` and `c - a` gaps.
pub fn is_outward_cycling(spec: &RpsSpec) -> bool {
    match spec {
        RpsSpec::General { a, b, c } => {
            let gain: BigRational = (0..3).map(|i| &a[i] - &b[i]).product();
            let loss: BigRational = (0..3).map(|i| &c[i] - &a[i]).product();
            gain > loss
        }
        RpsSpec::Cyclic { alpha, beta } => alpha > beta,
        RpsSpec::Epsilon(_) => true,
    }
}

/// Two cyclic RPS blocks (`alpha = 3` on strategies 1-3, `alpha = 5` on
/// 4-6). The unique equilibrium is supported on 1-3, yet under the
/// best-reply dynamics strategies 1-3 die out from almost every start.
pub fn build_game_66() -> SymmetricGame {
    SymmetricGame::from_int_rows(&[
        &[0, -3, 1, -1, -1, -1],
        &[1, 0, -3, -1, -1, -1],
        &[-3, 1, 0, -1, -1, -1],
        &[-4, -4, 3, 0, -5, 1],
        &[-1, -1, -3, 1, 0, -5],
        &[-1, -1, -3, -5, 1, 0],
    ])
    .expect("static 6x6 game is valid")
}

/// The 7x7 game: epsilon-RPS blocks on 1-3 and 5-7 linked by strategy 4.
/// Requires `0 < eps < 1/6`.
pub fn build_game_77(eps: &BigRational) -> Result<SymmetricGame> {
    if !(eps.is_positive() && eps < &rat(1, 6)) {
        return Err(Error::OutOfRange(format!("need 0 < eps < 1/6, got {eps}")));
    }
    let e = eps.clone();
    let z = BigRational::zero();
    let m1 = int(-1);
    let third = rat(-1, 3);
    let link = &third + &e;
    let rows = vec![
        vec![z.clone(), m1.clone(), e.clone(), int(-10), link.clone(), link.clone(), link.clone()],
        vec![e.clone(), z.clone(), m1.clone(), int(-10), link.clone(), link.clone(), link.clone()],
        vec![m1.clone(), e.clone(), z.clone(), int(-10), link.clone(), link.clone(), link],
        vec![int(-2), int(-2), int(2), z.clone(), third.clone(), third.clone(), third.clone()],
        vec![third.clone(), third.clone(), third.clone(), int(10), z.clone(), m1.clone(), e.clone()],
        vec![third.clone(), third.clone(), third.clone(), int(10), e.clone(), z.clone(), m1.clone()],
        vec![third.clone(), third.clone(), third, int(10), m1, e, z],
    ];
    SymmetricGame::from_rows(rows)
}

pub fn payoff_vector<T: Scalar>(g: &SymmetricGame, x: &SimplexPoint<T>) -> Result<Vec<T>> {
    g.payoff_vector(x)
}

pub fn average_payoff<T: Scalar>(g: &SymmetricGame, x: &SimplexPoint<T>) -> Result<T> {
    g.average_payoff(x)
}

pub fn better_reply_edges(g: &SymmetricGame) -> BTreeSet<(usize, usize)> {
    g.better_reply_edges()
}

/// The faces `{1,2,3}`, `{4,5,6}` (6x6) and `{1,2,3}`, `{5,6,7}` (7x7) in
/// 0-based form.
pub mod faces {
    use crate::simplex::StrategySet;

    pub fn first() -> StrategySet {
        StrategySet::from_mask(0b000_0111)
    }
    pub fn g66_second() -> StrategySet {
        StrategySet::from_mask(0b011_1000)
    }
    pub fn g77_second() -> StrategySet {
        StrategySet::from_mask(0b111_0000)
    }
    pub const G77_LINK: usize = 3;
}
