//! Exact Nash equilibria of the symmetric bimatrix game `(U, U^T)`.
//!
//! Enumeration works on support pairs. For a candidate support `B` and a
//! set `A` of strategies required to be best replies, the indifference
//! system `(Uy)_k = v (k in A), sum_{j in B} y_j = 1` is solved exactly. Its
//! feasible unique solutions are the vertices of the best-reply polytope;
//! on nondegenerate games these are exactly the solutions of the square
//! support-enumeration systems. Equilibria are the vertex pairs that are
//! mutual best replies. When a support system is singular the equilibrium
//! set contains polytopes; their vertices are returned and the game is
//! flagged degenerate.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::game::SymmetricGame;
use crate::linalg::{self, LinearSolution};
use crate::rational;
use crate::simplex::{RationalPoint, SimplexPoint, StrategySet};

/// Largest game `enumerate_nash` accepts.
pub const MAX_ENUMERATION_STRATEGIES: usize = 12;

/// A Nash equilibrium `(x, y)` with its supports and strictness verdicts.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumCertificate {
    pub x: RationalPoint,
    pub y: RationalPoint,
    pub support_x: StrategySet,
    pub support_y: StrategySet,
    pub quasi_strict: bool,
    pub strict: bool,
}

impl EquilibriumCertificate {
    pub fn is_symmetric(&self) -> bool {
        self.x == self.y
    }

    pub fn to_json(&self) -> Value {
        json!({
            "x": rational::json::vec_to_value(self.x.weights()),
            "y": rational::json::vec_to_value(self.y.weights()),
            "support_x": self.support_x,
            "support_y": self.support_y,
            "symmetric": self.is_symmetric(),
            "quasi_strict": self.quasi_strict,
            "strict": self.strict,
        })
    }
}

/// Output of [`enumerate_nash`]: the extreme equilibria, in support-pair
/// lexicographic order.
#[derive(Clone, Debug)]
pub struct NashEnumeration {
    pub equilibria: Vec<EquilibriumCertificate>,
    /// The equilibrium set contains a continuum: some extreme equilibrium
    /// strategy is paired with more than one extreme partner.
    pub degenerate: bool,
}

impl NashEnumeration {
    /// Exactly one equilibrium point (no continuum).
    pub fn is_unique(&self) -> bool {
        self.equilibria.len() == 1
    }

    /// Whether `(x, y)` lies in the equilibrium set described by the extreme
    /// equilibria: some product `conv(X) x conv(Y)` with every pair of `X x Y`
    /// an extreme equilibrium contains it.
    pub fn contains(&self, x: &RationalPoint, y: &RationalPoint) -> bool {
        let mut xs: Vec<&RationalPoint> = Vec::new();
        let mut ys: Vec<&RationalPoint> = Vec::new();
        let mut partners: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for cert in &self.equilibria {
            let xi = index_of(&mut xs, &cert.x);
            let yi = index_of(&mut ys, &cert.y);
            partners.entry(xi).or_default().insert(yi);
        }
        let dim = x.dim();
        for subset in subsets_up_to(xs.len(), dim) {
            let pts: Vec<&[BigRational]> = subset.iter().map(|&k| xs[k].weights()).collect();
            if !in_convex_hull(&pts, x.weights()) {
                continue;
            }
            let common = subset
                .iter()
                .map(|k| partners[k].clone())
                .reduce(|a, b| a.intersection(&b).copied().collect())
                .unwrap_or_default();
            let ypts: Vec<&[BigRational]> = common.iter().map(|&k| ys[k].weights()).collect();
            if subsets_up_to(ypts.len(), dim).into_iter().any(|s| {
                let sub: Vec<&[BigRational]> = s.iter().map(|&k| ypts[k]).collect();
                in_convex_hull(&sub, y.weights())
            }) {
                return true;
            }
        }
        false
    }

    pub fn to_json(&self) -> Value {
        json!({
            "count": self.equilibria.len(),
            "unique": self.is_unique(),
            "degenerate": self.degenerate,
            "equilibria": self.equilibria.iter().map(EquilibriumCertificate::to_json).collect::<Vec<_>>(),
        })
    }
}

fn index_of<'a>(pool: &mut Vec<&'a RationalPoint>, p: &'a RationalPoint) -> usize {
    match pool.iter().position(|q| *q == p) {
        Some(i) => i,
        None => {
            pool.push(p);
            pool.len() - 1
        }
    }
}

fn subsets_up_to(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    assert!(n < 20, "too many extreme points for hull membership");
    (1u32..(1 << n))
        .filter(|m| (m.count_ones() as usize) <= max_size)
        .map(|m| (0..n).filter(|&i| m & (1 << i) != 0).collect())
        .collect()
}

/// Exact test of `p` being a convex combination of affinely independent `pts`.
fn in_convex_hull(pts: &[&[BigRational]], p: &[BigRational]) -> bool {
    if pts.is_empty() {
        return false;
    }
    let mut rows: Vec<Vec<BigRational>> = (0..p.len())
        .map(|c| pts.iter().map(|pt| pt[c].clone()).collect())
        .collect();
    let mut rhs: Vec<BigRational> = p.to_vec();
    rows.push(vec![BigRational::one(); pts.len()]);
    rhs.push(BigRational::one());
    match linalg::solve(&rows, &rhs) {
        LinearSolution::Unique(l) => l.iter().all(|v| !v.is_negative()),
        _ => false,
    }
}

/// Pure best replies to `z`: the argmax of `Uz`, exactly.
pub fn best_reply_set(g: &SymmetricGame, z: &[BigRational]) -> StrategySet {
    let uz: Vec<BigRational> = (0..g.n()).map(|i| g.row_dot(i, z)).collect();
    argmax_set(&uz)
}

pub(crate) fn argmax_set(v: &[BigRational]) -> StrategySet {
    let max = v.iter().max().expect("nonempty payoff vector");
    v.iter()
        .enumerate()
        .filter(|(_, p)| *p == max)
        .map(|(i, _)| i)
        .collect()
}

/// Both players play best replies: every strategy in the support of `x`
/// maximises `Uy`, and every strategy in the support of `y` maximises `Ux`.
pub fn is_nash(g: &SymmetricGame, x: &RationalPoint, y: &RationalPoint) -> Result<bool> {
    check_dims(g, x, y)?;
    Ok(x.support().is_subset(best_reply_set(g, y.weights()))
        && y.support().is_subset(best_reply_set(g, x.weights())))
}

fn check_dims(g: &SymmetricGame, x: &RationalPoint, y: &RationalPoint) -> Result<()> {
    for d in [x.dim(), y.dim()] {
        if d != g.n() {
            return Err(Error::DimensionMismatch { expected: g.n(), actual: d });
        }
    }
    Ok(())
}

/// `(quasi_strict, strict)` for an equilibrium pair.
pub fn strictness(g: &SymmetricGame, x: &RationalPoint, y: &RationalPoint) -> (bool, bool) {
    let quasi = x.support() == best_reply_set(g, y.weights())
        && y.support() == best_reply_set(g, x.weights());
    let strict = quasi && x.support().len() == 1 && y.support().len() == 1;
    (quasi, strict)
}

/// Every player's support equals her full set of pure best replies.
pub fn is_quasi_strict(g: &SymmetricGame, cert: &EquilibriumCertificate) -> bool {
    strictness(g, &cert.x, &cert.y).0
}

fn certificate(g: &SymmetricGame, x: RationalPoint, y: RationalPoint) -> EquilibriumCertificate {
    let (quasi_strict, strict) = strictness(g, &x, &y);
    EquilibriumCertificate {
        support_x: x.support(),
        support_y: y.support(),
        x,
        y,
        quasi_strict,
        strict,
    }
}

/// Solves `(Uz)_k = v` for `k` in `tight`, `z` supported in `support`,
/// `sum z = 1`. Returns the weight vector when the solution is unique.
fn solve_indifference(
    g: &SymmetricGame,
    tight: StrategySet,
    support: StrategySet,
) -> Option<Vec<BigRational>> {
    let cols: Vec<usize> = support.iter().collect();
    let k = cols.len();
    let mut rows = Vec::with_capacity(tight.len() + 1);
    let mut rhs = Vec::with_capacity(tight.len() + 1);
    for i in tight.iter() {
        let mut row: Vec<BigRational> = cols.iter().map(|&j| g.entry(i, j).clone()).collect();
        row.push(-BigRational::one());
        rows.push(row);
        rhs.push(BigRational::zero());
    }
    let mut norm = vec![BigRational::one(); k];
    norm.push(BigRational::zero());
    rows.push(norm);
    rhs.push(BigRational::one());
    match linalg::solve(&rows, &rhs) {
        LinearSolution::Unique(sol) => {
            let mut z = vec![BigRational::zero(); g.n()];
            for (c, &j) in cols.iter().enumerate() {
                z[j] = sol[c].clone();
            }
            Some(z)
        }
        _ => None,
    }
}

/// A vertex of the best-reply polytope with its support and pure best replies.
#[derive(Clone, Debug)]
struct Vertex {
    point: Vec<BigRational>,
    support: StrategySet,
    best_replies: StrategySet,
}

fn best_reply_vertices(g: &SymmetricGame) -> Vec<Vertex> {
    let n = g.n();
    let full = (1u32 << n) - 1;
    let found: BTreeSet<Vec<BigRational>> = (1..=full)
        .into_par_iter()
        .flat_map_iter(|support_mask| {
            let support = StrategySet::from_mask(support_mask);
            (1..=full)
                .map(StrategySet::from_mask)
                .filter(move |tight| tight.len() >= support.len())
                .filter_map(move |tight| {
                    let z = solve_indifference(g, tight, support)?;
                    if z.iter().any(Signed::is_negative) {
                        return None;
                    }
                    // Feasible only when every strategy in `tight` is a best reply.
                    tight.is_subset(best_reply_set(g, &z)).then_some(z)
                })
        })
        .collect();
    found
        .into_iter()
        .map(|point| {
            let support = point
                .iter()
                .enumerate()
                .filter(|(_, w)| w.is_positive())
                .map(|(i, _)| i)
                .collect();
            let best_replies = best_reply_set(g, &point);
            Vertex { point, support, best_replies }
        })
        .collect()
}

/// All extreme Nash equilibria of `(U, U^T)`, symmetric and asymmetric.
pub fn enumerate_nash(g: &SymmetricGame) -> Result<NashEnumeration> {
    if g.n() > MAX_ENUMERATION_STRATEGIES {
        return Err(Error::TooManyStrategies { n: g.n(), limit: MAX_ENUMERATION_STRATEGIES });
    }
    let vertices = best_reply_vertices(g);
    let mut equilibria = Vec::new();
    let mut partners = vec![0usize; vertices.len()];
    for (a, vx) in vertices.iter().enumerate() {
        for vy in &vertices {
            if vx.support.is_subset(vy.best_replies) && vy.support.is_subset(vx.best_replies) {
                partners[a] += 1;
                let x = SimplexPoint::from_trusted(vx.point.clone());
                let y = SimplexPoint::from_trusted(vy.point.clone());
                equilibria.push(certificate(g, x, y));
            }
        }
    }
    // The pairing relation is symmetric, so counting partners of x suffices.
    let degenerate = partners.iter().any(|&c| c > 1);
    equilibria.sort_by(|a, b| {
        (a.support_x, a.support_y, a.x.weights(), a.y.weights())
            .cmp(&(b.support_x, b.support_y, b.x.weights(), b.y.weights()))
    });
    Ok(NashEnumeration { equilibria, degenerate })
}

/// The symmetric equilibrium `(x, x)` with support inside `support` whose
/// indifference system has a unique solution, if it exists.
pub fn symmetric_equilibrium_on_support(
    g: &SymmetricGame,
    support: StrategySet,
) -> Option<RationalPoint> {
    let z = solve_indifference(g, support, support)?;
    if z.iter().any(Signed::is_negative) {
        return None;
    }
    let x = SimplexPoint::from_trusted(z);
    is_nash(g, &x, &x).ok()?.then_some(x)
}

/// Checks the restriction lemma for an equilibrium `(x, y)` and a strategy
/// subset `subset`: when the payoffs of `subset` against the mass outside
/// `subset` do not depend on the strategy, the restricted weights form an
/// (unnormalised) equilibrium of the restricted game.
///
/// A violated hypothesis is an error; `Ok(false)` means the conclusion failed.
pub fn restriction_check(
    g: &SymmetricGame,
    x: &RationalPoint,
    y: &RationalPoint,
    subset: StrategySet,
) -> Result<bool> {
    check_dims(g, x, y)?;
    let fail = |msg: String| Err(Error::HypothesisViolated(msg));
    if subset.is_empty() || subset.iter().any(|i| i >= g.n()) {
        return fail(format!("invalid subset {subset}"));
    }
    if !is_nash(g, x, y)? {
        return fail("(x, y) is not a Nash equilibrium".into());
    }
    if !x.mass(subset).is_positive() || !y.mass(subset).is_positive() {
        return fail(format!("x and y must put positive mass on {subset}"));
    }
    let restrict = |z: &RationalPoint, inside: bool| -> Vec<BigRational> {
        z.weights()
            .iter()
            .enumerate()
            .map(|(i, w)| {
                if subset.contains(i) == inside {
                    w.clone()
                } else {
                    BigRational::zero()
                }
            })
            .collect()
    };
    let constant_on_subset = |z: &[BigRational]| {
        let vals: Vec<BigRational> = subset.iter().map(|i| g.row_dot(i, z)).collect();
        vals.windows(2).all(|w| w[0] == w[1])
    };
    let (x_in, y_in) = (restrict(x, true), restrict(y, true));
    let (x_out, y_out) = (restrict(x, false), restrict(y, false));
    if !constant_on_subset(&y_out) || !constant_on_subset(&x_out) {
        return fail(format!(
            "payoffs against the mass outside {subset} depend on the strategy"
        ));
    }
    let induced = |own: &[BigRational], other: &[BigRational]| {
        let pay: Vec<(usize, BigRational)> =
            subset.iter().map(|i| (i, g.row_dot(i, other))).collect();
        pay.iter().all(|(i, pi)| {
            own[*i].is_zero() || pay.iter().all(|(_, pj)| pi >= pj)
        })
    };
    Ok(induced(&x_in, &y_in) && induced(&y_in, &x_in))
}

/// `p` earns strictly more than `q` against every pure strategy.
pub fn strictly_dominates(g: &SymmetricGame, p: &RationalPoint, q: &RationalPoint) -> Result<bool> {
    check_dims(g, p, q)?;
    Ok((0..g.n()).all(|j| g.col_dot(p.weights(), j) > g.col_dot(q.weights(), j)))
}
