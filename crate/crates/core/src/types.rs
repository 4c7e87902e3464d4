//! Scalar and vector types for the unit interval.
//!
//! Every input and output of an aggregation function lives in `[0,1]`.
//! [`UnitValue`] enforces that at construction, [`GridPoint`] carries an
//! exact rational `i/k`, and [`Param`] is the tagged threshold/bias stored
//! inside basis expressions.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_integer::Integer;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("value {0} lies outside [0,1]")]
    OutOfRange(f64),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("rational {num}/{den} exceeds 1")]
    RationalAboveOne { num: u64, den: u64 },
    #[error("input vector must have at least one coordinate")]
    EmptyVector,
}

/// A real number in `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UnitValue(f64);

impl UnitValue {
    pub const ZERO: UnitValue = UnitValue(0.0);
    pub const ONE: UnitValue = UnitValue(1.0);

    pub fn new(value: f64) -> Result<Self, DomainError> {
        if (0.0..=1.0).contains(&value) {
            // Normalise -0.0 so that printing never produces "-0".
            Ok(UnitValue(value + 0.0))
        } else {
            Err(DomainError::OutOfRange(value))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `1 - x`, the standard strong negation.
    pub fn complement(self) -> UnitValue {
        UnitValue(1.0 - self.0)
    }
}

impl Eq for UnitValue {}

impl PartialOrd for UnitValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for UnitValue {
    fn cmp(&self, other: &Self) -> Ordering {
        // NaN is excluded by construction.
        self.0.partial_cmp(&other.0).expect("UnitValue is never NaN")
    }
}

impl TryFrom<f64> for UnitValue {
    type Error = DomainError;
    fn try_from(value: f64) -> Result<Self, Self::Error> {
        UnitValue::new(value)
    }
}

impl From<UnitValue> for f64 {
    fn from(v: UnitValue) -> f64 {
        v.0
    }
}

impl fmt::Display for UnitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// An exact rational `numerator / denominator` in `[0,1]`.
///
/// The stored pair is kept as given (not reduced) so that `2/4` prints back
/// as `2/4`; equality, ordering and hashing are on the rational value.
#[derive(Debug, Clone, Copy)]
pub struct GridPoint {
    num: u64,
    den: u64,
}

impl GridPoint {
    pub fn new(num: u64, den: u64) -> Result<Self, DomainError> {
        if den == 0 {
            return Err(DomainError::ZeroDenominator);
        }
        if num > den {
            return Err(DomainError::RationalAboveOne { num, den });
        }
        Ok(GridPoint { num, den })
    }

    pub const fn zero() -> Self {
        GridPoint { num: 0, den: 1 }
    }

    pub const fn one() -> Self {
        GridPoint { num: 1, den: 1 }
    }

    pub fn numerator(self) -> u64 {
        self.num
    }

    pub fn denominator(self) -> u64 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn is_one(self) -> bool {
        self.num == self.den
    }

    /// Lowest-terms form of the same rational.
    pub fn reduced(self) -> GridPoint {
        let g = self.num.gcd(&self.den);
        GridPoint {
            num: self.num / g,
            den: self.den / g,
        }
    }

    /// `(den - num) / den`, exact.
    pub fn complement(self) -> GridPoint {
        GridPoint {
            num: self.den - self.num,
            den: self.den,
        }
    }

    /// Correctly rounded conversion; the same `i/k` always yields the same
    /// float, which is what makes grid-point comparisons exact.
    #[inline]
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn to_unit(self) -> UnitValue {
        UnitValue(self.to_f64())
    }

    /// Exact comparison of this rational with a non-negative finite float.
    pub fn cmp_f64(self, x: f64) -> Ordering {
        // Compare num with x * den exactly: the fused multiply-add recovers
        // the rounding error of the product.
        let den = self.den as f64;
        let num = self.num as f64;
        let prod = x * den;
        let err = x.mul_add(den, -prod);
        match num.partial_cmp(&prod).expect("finite operands") {
            Ordering::Equal => 0.0_f64.partial_cmp(&err).expect("finite error"),
            other => other,
        }
    }
}

impl PartialEq for GridPoint {
    fn eq(&self, other: &Self) -> bool {
        self.num as u128 * other.den as u128 == other.num as u128 * self.den as u128
    }
}

impl Eq for GridPoint {}

impl PartialOrd for GridPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GridPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl Hash for GridPoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let r = self.reduced();
        r.num.hash(state);
        r.den.hash(state);
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A threshold or bias stored in an expression node: exact rational when
/// it came from a grid, plain float otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    Ratio(GridPoint),
    Real(UnitValue),
}

impl Param {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Param::Ratio(q) => q.to_f64(),
            Param::Real(v) => v.get(),
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Param::Ratio(q) => q.is_zero(),
            Param::Real(v) => v.get() == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Param::Ratio(q) => q.is_one(),
            Param::Real(v) => v.get() == 1.0,
        }
    }

    /// `1 - p`, exact for rationals.
    pub fn complement(self) -> Param {
        match self {
            Param::Ratio(q) => Param::Ratio(q.complement()),
            Param::Real(v) => Param::Real(v.complement()),
        }
    }

    pub fn real(value: f64) -> Result<Param, DomainError> {
        UnitValue::new(value).map(Param::Real)
    }

    pub fn ratio(num: u64, den: u64) -> Result<Param, DomainError> {
        GridPoint::new(num, den).map(Param::Ratio)
    }
}

impl From<GridPoint> for Param {
    fn from(q: GridPoint) -> Self {
        Param::Ratio(q)
    }
}

impl From<UnitValue> for Param {
    fn from(v: UnitValue) -> Self {
        Param::Real(v)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Ratio(q) => fmt::Display::fmt(q, f),
            // Rust prints the shortest decimal that parses back to the same
            // float, without an exponent.
            Param::Real(v) => fmt::Display::fmt(v, f),
        }
    }
}

/// A point of `[0,1]^n`, `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputVector {
    coords: Vec<f64>,
}

impl InputVector {
    pub fn new(coords: Vec<f64>) -> Result<Self, DomainError> {
        if coords.is_empty() {
            return Err(DomainError::EmptyVector);
        }
        let coords = coords
            .into_iter()
            .map(|c| UnitValue::new(c).map(UnitValue::get))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(InputVector { coords })
    }

    pub fn from_units(coords: &[UnitValue]) -> Result<Self, DomainError> {
        if coords.is_empty() {
            return Err(DomainError::EmptyVector);
        }
        Ok(InputVector {
            coords: coords.iter().map(|c| c.get()).collect(),
        })
    }

    pub fn from_grid(coords: &[GridPoint]) -> Result<Self, DomainError> {
        if coords.is_empty() {
            return Err(DomainError::EmptyVector);
        }
        Ok(InputVector {
            coords: coords.iter().map(|q| q.to_f64()).collect(),
        })
    }

    pub fn zeros(n: usize) -> Result<Self, DomainError> {
        InputVector::new(vec![0.0; n])
    }

    pub fn ones(n: usize) -> Result<Self, DomainError> {
        InputVector::new(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> Option<UnitValue> {
        self.coords.get(i).map(|&c| UnitValue(c))
    }

    pub fn iter(&self) -> impl Iterator<Item = UnitValue> + '_ {
        self.coords.iter().map(|&c| UnitValue(c))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn is_zeros(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    pub fn is_ones(&self) -> bool {
        self.coords.iter().all(|&c| c == 1.0)
    }

    /// Membership in `[0,1]^n_*`: neither all-zeros nor all-ones.
    pub fn is_star(&self) -> bool {
        !self.is_zeros() && !self.is_ones()
    }

    /// Indices of the nonzero coordinates.
    pub fn support(&self) -> Vec<usize> {
        self.coords
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Componentwise `self <= other`. Vectors of different length are
    /// incomparable.
    pub fn le(&self, other: &InputVector) -> bool {
        self.len() == other.len() && self.coords.iter().zip(&other.coords).all(|(a, b)| a <= b)
    }

    /// Coordinatewise `1 - x`.
    pub fn complement(&self) -> InputVector {
        InputVector {
            coords: self.coords.iter().map(|&c| 1.0 - c).collect(),
        }
    }
}

impl fmt::Display for InputVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Enumerates `I_k^n` in lexicographic order of the integer coordinates.
///
/// Yields numerator vectors; every coordinate has denominator `k`.
pub fn grid_indices(n: usize, k: u64) -> impl Iterator<Item = Vec<u64>> {
    let mut next = Some(vec![0u64; n]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        for pos in (0..n).rev() {
            if succ[pos] < k {
                succ[pos] += 1;
                next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(current)
    })
}

/// Grid coordinates `i/k` as floats, computed the same way everywhere.
pub fn grid_coords(indices: &[u64], k: u64) -> Vec<f64> {
    indices
        .iter()
        .map(|&i| GridPoint { num: i, den: k }.to_f64())
        .collect()
}

/// Largest `i` in `0..=k` with `i/k <= x` on the float grid.
pub fn grid_floor(x: f64, k: u64) -> u64 {
    let mut i = ((x * k as f64).floor().max(0.0) as u64).min(k);
    while i > 0 && (GridPoint { num: i, den: k }).to_f64() > x {
        i -= 1;
    }
    while i < k && (GridPoint { num: i + 1, den: k }).to_f64() <= x {
        i += 1;
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_value_rejects_out_of_range() {
        assert!(UnitValue::new(-0.1).is_err());
        assert!(UnitValue::new(1.0000001).is_err());
        assert!(UnitValue::new(f64::NAN).is_err());
        assert_eq!(UnitValue::new(-0.0).unwrap().to_string(), "0");
    }

    #[test]
    fn grid_point_equality_is_exact() {
        let a = GridPoint::new(1, 2).unwrap();
        let b = GridPoint::new(2, 4).unwrap();
        assert_eq!(a, b);
        assert!(GridPoint::new(1, 3).unwrap() < a);
        assert_eq!(b.to_string(), "2/4");
        assert_eq!(b.reduced().to_string(), "1/2");
        assert!(GridPoint::new(3, 2).is_err());
        assert!(GridPoint::new(0, 0).is_err());
    }

    #[test]
    fn cmp_f64_detects_rounding() {
        // 1/3 as a float is strictly below the rational 1/3.
        let third = GridPoint::new(1, 3).unwrap();
        assert_eq!(third.cmp_f64(1.0 / 3.0), Ordering::Greater);
        let half = GridPoint::new(1, 2).unwrap();
        assert_eq!(half.cmp_f64(0.5), Ordering::Equal);
        assert_eq!(half.cmp_f64(0.4), Ordering::Greater);
        assert_eq!(half.cmp_f64(0.6), Ordering::Less);
        assert_eq!(GridPoint::new(7, 10).unwrap().cmp_f64(0.7), Ordering::Greater);
        assert_eq!(GridPoint::new(1, 10).unwrap().cmp_f64(0.1), Ordering::Less);
    }

    #[test]
    fn star_and_support() {
        let v = InputVector::new(vec![0.0, 0.3, 1.0]).unwrap();
        assert!(v.is_star());
        assert_eq!(v.support(), vec![1, 2]);
        assert!(!InputVector::zeros(3).unwrap().is_star());
        assert!(!InputVector::ones(2).unwrap().is_star());
        assert!(InputVector::zeros(2).unwrap().support().is_empty());
        assert!(InputVector::new(vec![]).is_err());
    }

    #[test]
    fn grid_floor_matches_float_grid() {
        for k in 1..60u64 {
            for i in 0..=k {
                let x = GridPoint::new(i, k).unwrap().to_f64();
                assert_eq!(grid_floor(x, k), i);
                if i < k {
                    assert_eq!(grid_floor(x + 1e-9 / k as f64, k), i);
                }
            }
        }
        assert_eq!(grid_floor(0.0, 7), 0);
        assert_eq!(grid_floor(1.0, 7), 7);
    }

    #[test]
    fn grid_enumeration_is_lexicographic() {
        let all: Vec<_> = grid_indices(2, 2).collect();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[8], vec![2, 2]);
    }
}
