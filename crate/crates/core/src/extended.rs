//! Nonnegative extended reals with an explicit `+inf` saturation state.

use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::real::Real;

/// Value in `[0, +inf]`.
///
/// Saturation is carried as a variant rather than an IEEE infinity, so an
/// overflowing intermediate is never mistaken for a large finite number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Extended<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> Extended<T> {
    pub fn zero() -> Self {
        Extended::Finite(T::zero())
    }

    /// Wraps `x`, saturating anything non-finite or above `cap`.
    pub fn saturating(x: T, cap: T) -> Self {
        if x.is_finite() && x <= cap {
            Extended::Finite(x)
        } else {
            Extended::Infinite
        }
    }

    /// Wraps `x`, saturating on IEEE overflow only.
    pub fn from_float(x: T) -> Self {
        if x.is_finite() {
            Extended::Finite(x)
        } else {
            Extended::Infinite
        }
    }

    /// `exp(log_value)`, saturating when the exponential is not representable.
    pub fn from_log(log_value: T) -> Self {
        if log_value > T::max_ln() || log_value.is_nan() {
            Extended::Infinite
        } else {
            Extended::Finite(log_value.exp())
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinite)
    }

    pub fn finite(self) -> Option<T> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    /// IEEE view, for code that must hand a plain float to a callback.
    pub fn to_float(self) -> T {
        match self {
            Extended::Finite(x) => x,
            Extended::Infinite => T::infinity(),
        }
    }

    pub fn ln(self) -> T {
        match self {
            Extended::Finite(x) => x.ln(),
            Extended::Infinite => T::infinity(),
        }
    }

    pub fn max(self, other: Self) -> Self {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a.max(b)),
            _ => Extended::Infinite,
        }
    }
}

impl<T: Real> Add for Extended<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::from_float(a + b),
            _ => Extended::Infinite,
        }
    }
}

impl<T: Real> Mul<T> for Extended<T> {
    type Output = Self;
    /// Scaling by a nonnegative factor; `0 * inf` is taken as `0`.
    fn mul(self, rhs: T) -> Self {
        match self {
            Extended::Finite(a) => Extended::from_float(a * rhs),
            Extended::Infinite if rhs == T::zero() => Extended::zero(),
            Extended::Infinite => Extended::Infinite,
        }
    }
}

impl<T: Real> PartialOrd for Extended<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering;
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.partial_cmp(b),
            (Extended::Finite(_), Extended::Infinite) => Some(Ordering::Less),
            (Extended::Infinite, Extended::Finite(_)) => Some(Ordering::Greater),
            (Extended::Infinite, Extended::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl<T: Real> fmt::Display for Extended<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_saturates() {
        let a = Extended::Finite(f64::MAX);
        assert!((a + a).is_infinite());
        assert_eq!(Extended::<f64>::Infinite * 0.0, Extended::zero());
        assert!(Extended::<f64>::from_log(710.0).is_infinite());
        assert_eq!(Extended::<f64>::from_log(0.0), Extended::Finite(1.0));
        assert!(Extended::Finite(3.0) < Extended::Infinite);
        assert!(Extended::saturating(2e12, 1e12).is_infinite());
    }
}
