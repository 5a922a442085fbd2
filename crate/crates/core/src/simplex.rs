//! Population states and strategy index sets.
//!
//! Strategies are 0-based inside the library. Everything user-facing
//! (`Display`, JSON, CSV headers, the CLI) uses 1-based labels.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A set of pure strategies, stored as a bitmask (at most 32 strategies).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct StrategySet(u32);

pub const MAX_STRATEGIES: usize = 32;

impl StrategySet {
    pub const EMPTY: StrategySet = StrategySet(0);

    pub fn from_mask(mask: u32) -> Self {
        StrategySet(mask)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn singleton(i: usize) -> Self {
        StrategySet(1 << i)
    }

    /// `{0, 1, ..., n-1}`.
    pub fn all(n: usize) -> Self {
        if n >= 32 {
            StrategySet(u32::MAX)
        } else {
            StrategySet((1u32 << n) - 1)
        }
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: StrategySet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: StrategySet) -> Self {
        StrategySet(self.0 | other.0)
    }

    pub fn intersection(self, other: StrategySet) -> Self {
        StrategySet(self.0 & other.0)
    }

    pub fn difference(self, other: StrategySet) -> Self {
        StrategySet(self.0 & !other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 & (1 << i) != 0)
    }

    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Builds a set from 1-based labels as written in the CLI and files.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        labels
            .iter()
            .map(|&l| {
                if l == 0 || l > MAX_STRATEGIES {
                    Err(Error::OutOfRange(format!("strategy label {l}")))
                } else {
                    Ok(l - 1)
                }
            })
            .collect()
    }

    pub fn labels(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }
}

impl FromIterator<usize> for StrategySet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = StrategySet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Display for StrategySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.labels().iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

impl fmt::Debug for StrategySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for StrategySet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.labels().serialize(s)
    }
}

impl<'de> Deserialize<'de> for StrategySet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let labels = Vec::<usize>::deserialize(d)?;
        StrategySet::from_labels(&labels).map_err(serde::de::Error::custom)
    }
}

/// A mixed strategy / population state: nonnegative weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint<T> {
    weights: Vec<T>,
}

pub type RationalPoint = SimplexPoint<BigRational>;
pub type FloatPoint = SimplexPoint<f64>;

impl<T: Scalar> SimplexPoint<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::NotInSimplex("empty weight vector".into()));
        }
        if let Some(i) = weights.iter().position(|w| *w < T::zero()) {
            return Err(Error::NotInSimplex(format!(
                "coordinate {} is negative: {:?}",
                i + 1,
                weights[i]
            )));
        }
        let sum = weights.iter().fold(T::zero(), |acc, w| acc + w.clone());
        if (sum.clone() - T::one()).abs() > T::simplex_tolerance() {
            return Err(Error::NotInSimplex(format!("coordinates sum to {sum:?}")));
        }
        Ok(SimplexPoint { weights })
    }

    /// Divides by the coordinate sum. The weights must be nonnegative with a
    /// positive sum.
    pub fn normalized(weights: Vec<T>) -> Result<Self> {
        let sum = weights.iter().fold(T::zero(), |acc, w| acc + w.clone());
        if !(sum > T::zero()) {
            return Err(Error::NotInSimplex("weights do not have a positive sum".into()));
        }
        Self::new(weights.into_iter().map(|w| w / sum.clone()).collect())
    }

    pub fn vertex(n: usize, i: usize) -> Self {
        let mut weights = vec![T::zero(); n];
        weights[i] = T::one();
        SimplexPoint { weights }
    }

    pub fn barycenter(n: usize) -> Self {
        Self::face_barycenter(n, StrategySet::all(n))
    }

    /// Uniform mixture over `face`, embedded in `S_n`.
    pub fn face_barycenter(n: usize, face: StrategySet) -> Self {
        let k = T::from_rational(&BigRational::from_integer(face.len().into()));
        let share = T::one() / k;
        let weights = (0..n)
            .map(|i| if face.contains(i) { share.clone() } else { T::zero() })
            .collect();
        SimplexPoint { weights }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<T> {
        self.weights
    }

    pub fn get(&self, i: usize) -> &T {
        &self.weights[i]
    }

    /// Strategies with strictly positive weight.
    pub fn support(&self) -> StrategySet {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > T::zero())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_interior(&self) -> bool {
        self.weights.iter().all(|w| *w > T::zero())
    }

    /// Total weight on `set`.
    pub fn mass(&self, set: StrategySet) -> T {
        set.iter()
            .filter(|&i| i < self.dim())
            .fold(T::zero(), |acc, i| acc + self.weights[i].clone())
    }

    pub fn to_float(&self) -> FloatPoint {
        SimplexPoint {
            weights: self.weights.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// Maximum coordinate difference.
    pub fn linf_distance(&self, other: &Self) -> T {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a.clone() - b.clone()).abs())
            .fold(T::zero(), |m, d| if d > m { d } else { m })
    }
}

impl RationalPoint {
    /// Exact point from nonnegative integer weights.
    pub fn from_integer_weights(weights: &[i64]) -> Result<Self> {
        let sum: i64 = weights.iter().sum();
        if sum <= 0 {
            return Err(Error::NotInSimplex("weights do not have a positive sum".into()));
        }
        Self::new(
            weights
                .iter()
                .map(|&w| BigRational::new(w.into(), sum.into()))
                .collect(),
        )
    }

    pub fn is_vertex(&self) -> bool {
        self.weights.iter().filter(|w| w.is_one()).count() == 1
    }
}

impl FloatPoint {
    /// Rescales nonnegative float weights onto the simplex.
    pub fn from_floats(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NotInSimplex("non-finite weight".into()));
        }
        Self::normalized(weights)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }
}

impl<T: fmt::Display> fmt::Display for SimplexPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.weights.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl<T: Zero> SimplexPoint<T> {
    /// Wraps weights that are known to lie on the simplex (internal use).
    pub(crate) fn from_trusted(weights: Vec<T>) -> Self {
        SimplexPoint { weights }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn strategy_set_basics() {
        let s: StrategySet = [0, 2, 5].into_iter().collect();
        assert_eq!(s.len(), 3);
        assert!(s.contains(2) && !s.contains(1));
        assert_eq!(s.to_string(), "{1,3,6}");
        assert_eq!(StrategySet::from_labels(&[1, 3, 6]).unwrap(), s);
        assert!(StrategySet::from_labels(&[0]).is_err());
        assert!(StrategySet::singleton(2).is_subset(s));
        assert_eq!(StrategySet::all(3).difference(s).labels(), vec![2]);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[1,3,6]");
    }

    #[test]
    fn rejects_points_off_the_simplex() {
        assert!(RationalPoint::new(vec![rat(1, 2), rat(1, 3)]).is_err());
        assert!(RationalPoint::new(vec![rat(3, 2), rat(-1, 2)]).is_err());
        assert!(FloatPoint::new(vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(FloatPoint::new(vec![0.5, 0.5 + 1e-9]).is_err());
        // Signed zeros are neither in the support nor negative.
        let p = FloatPoint::new(vec![1.0, 0.0, -0.0]).unwrap();
        assert_eq!(p.support(), StrategySet::singleton(0));
        assert!(!p.is_interior());
    }

    #[test]
    fn support_mass_and_barycenters() {
        let p = RationalPoint::from_integer_weights(&[1, 3, 9, 0, 0, 0]).unwrap();
        assert_eq!(p.support(), StrategySet::from_labels(&[1, 2, 3]).unwrap());
        assert_eq!(p.mass(StrategySet::from_labels(&[3]).unwrap()), rat(9, 13));
        let n = RationalPoint::face_barycenter(7, StrategySet::from_labels(&[5, 6, 7]).unwrap());
        assert_eq!(n.weights()[4], rat(1, 3));
        assert_eq!(n.weights()[0], rat(0, 1));
        assert!(RationalPoint::vertex(3, 1).is_vertex());
    }
}
