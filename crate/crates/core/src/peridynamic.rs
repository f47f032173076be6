//! Horizon-limited energies and their localization as the horizon shrinks.
//!
//! The localized quantity at a point `x` is
//! `(1 / A(delta^{1-s})) \int_{B(x, delta)} A(|u(x) - u(y)| / |x-y|^s) |x-y|^{-n} dy`,
//! handled in log domain throughout. For `A(t) = t^p` and `n = 1` it tends to
//! `2 |u'(x)|^p / ((1-s) p)`; for Young functions failing the doubling
//! condition near zero it tends to `0` or `+inf` according to `|grad u(x)|`.

use serde::{Deserialize, Serialize};

use crate::energy::{local_log_integral, EnergyError, EnergyOptions};
use crate::functions::{norm, ScalarField, TestFunction};
use crate::quadrature::{Dim, Point};
use crate::real::{lit, Real};
use crate::young::YoungFunction;

pub use crate::energy::{eval_jdelta, eval_jdelta_with};

/// Consecutive rows whose trend decides the classification.
pub const TREND_WINDOW: usize = 3;

/// Minimal log-change per decade of `delta` for a ZERO or INFINITE verdict.
pub const DECADE_SLOPE: f64 = std::f64::consts::LN_10;

/// Maximal spread of the trailing log-values for a FINITE verdict.
pub const PLATEAU_SPREAD: f64 = 1e-2;

/// Largest horizon accepted by [`localized_normalized`].
pub const MAX_LOCAL_HORIZON: f64 = 0.1;

/// Horizons `1e-1, ..., 1e-5`.
pub fn default_delta_list<T: Real>() -> Vec<T> {
    [1e-1, 1e-2, 1e-3, 1e-4, 1e-5].iter().map(|&d| lit(d)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification<T> {
    Zero,
    Finite { limit: T },
    Infinite,
    Ambiguous,
}

impl<T> Classification<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Zero => "ZERO",
            Classification::Finite { .. } => "FINITE",
            Classification::Infinite => "INFINITE",
            Classification::Ambiguous => "AMBIGUOUS",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationRow<T> {
    pub delta: T,
    /// Log of the normalized localized integral; may be `-inf`.
    pub log_value: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationResult<T> {
    pub x: Point<T>,
    pub grad_norm: T,
    pub rows: Vec<LocalizationRow<T>>,
    pub classification: Classification<T>,
    /// Normalization in force, recorded for the report.
    pub normalization: String,
}

/// `ln \int_{B(x,delta)} A(|D^s u|) |x-y|^{-n} dy - ln A(delta^{1-s})`.
pub fn localized_normalized<T: Real>(
    f: &YoungFunction<T>,
    u: &TestFunction<T>,
    s: T,
    delta: T,
    x: Point<T>,
) -> Result<T, EnergyError> {
    if !(s > T::zero() && s < T::one()) {
        return Err(EnergyError::InvalidOrder(s.to_f64_lossy()));
    }
    if !(delta > T::zero() && delta <= lit(MAX_LOCAL_HORIZON)) {
        return Err(EnergyError::InvalidHorizon(delta.to_f64_lossy()));
    }
    let opts = EnergyOptions::<T>::default();
    let log_integral = local_log_integral(f, u, s, delta, x, opts.inner_rel_tol);
    if log_integral == T::neg_infinity() {
        return Ok(log_integral);
    }
    Ok(log_integral - f.log_eval(delta.powf(T::one() - s)))
}

/// Classifies log-values along decreasing horizons.
pub fn classify<T: Real>(rows: &[LocalizationRow<T>]) -> Classification<T> {
    if rows.len() < TREND_WINDOW {
        return Classification::Ambiguous;
    }
    let tail = &rows[rows.len() - TREND_WINDOW..];
    let slope = lit::<T>(DECADE_SLOPE);
    let steps: Vec<(T, T)> = tail
        .windows(2)
        .map(|w| ((w[0].delta / w[1].delta).log10(), w[1].log_value - w[0].log_value))
        .collect();
    let falling = tail.windows(2).all(|w| w[1].log_value == T::neg_infinity())
        || steps.iter().all(|&(dec, d)| d <= -slope * dec);
    if falling {
        return Classification::Zero;
    }
    let rising = steps.iter().all(|&(dec, d)| d >= slope * dec) || tail.iter().all(|r| r.log_value == T::infinity());
    if rising {
        return Classification::Infinite;
    }
    let lo = tail.iter().map(|r| r.log_value).fold(T::infinity(), T::min);
    let hi = tail.iter().map(|r| r.log_value).fold(T::neg_infinity(), T::max);
    if lo.is_finite() && hi.is_finite() && hi - lo < lit(PLATEAU_SPREAD) {
        return Classification::Finite { limit: tail[TREND_WINDOW - 1].log_value.exp() };
    }
    Classification::Ambiguous
}

/// Rows of [`localized_normalized`] over `delta_list` and their classification.
pub fn localization_limit<T: Real>(
    f: &YoungFunction<T>,
    u: &TestFunction<T>,
    s: T,
    x: Point<T>,
    delta_list: &[T],
) -> Result<LocalizationResult<T>, EnergyError> {
    if delta_list.is_empty() || delta_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(EnergyError::InvalidParameterList);
    }
    let rows = delta_list
        .iter()
        .map(|&delta| Ok(LocalizationRow { delta, log_value: localized_normalized(f, u, s, delta, x)? }))
        .collect::<Result<Vec<_>, EnergyError>>()?;
    Ok(LocalizationResult {
        x,
        grad_norm: norm(u.gradient(x), Dim::Two),
        classification: classify(&rows),
        rows,
        normalization: "1/A(delta^(1-s))".into(),
    })
}

/// Limit `2 |u'(x)|^p / ((1-s) p)` of the normalized quantity for
/// `A(t) = c t^p` in one dimension.
pub fn power_localization_limit<T: Real>(p: T, s: T, grad_norm: T) -> T {
    T::two() * grad_norm.powf(p) / ((T::one() - s) * p)
}

/// Points on the positive first axis where a radial function attains
/// `|grad u| = target`: one on each side of the radius of steepest slope.
/// Targets above the maximal slope are skipped.
pub fn points_with_gradient<T: Real>(u: &TestFunction<T>, targets: &[T]) -> Vec<(T, Point<T>)> {
    let r_sup = u.support_radius();
    let slope = |r: T| norm(u.gradient([r, T::zero()]), Dim::Two);
    let n = 4000;
    let grid: Vec<T> = (0..=n).map(|i| r_sup * T::from_usize_lossy(i) / T::from_usize_lossy(n)).collect();
    let (i_max, _) = grid
        .iter()
        .enumerate()
        .map(|(i, &r)| (i, slope(r)))
        .fold((0, T::neg_infinity()), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let r_star = grid[i_max];
    let s_max = slope(r_star);
    let solve = |lo: T, hi: T, target: T| {
        let (mut a, mut b) = (lo, hi);
        let increasing = slope(b) > slope(a);
        for _ in 0..200 {
            let m = (a + b) * T::half();
            if (slope(m) < target) == increasing {
                a = m;
            } else {
                b = m;
            }
        }
        (a + b) * T::half()
    };
    let mut out = Vec::new();
    for &t in targets {
        if t >= s_max || t <= T::zero() {
            continue;
        }
        for (lo, hi) in [(T::zero(), r_star), (r_star, r_sup)] {
            out.push((t, [solve(lo, hi, t), T::zero()]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young::{default_deltas, matuszewska, LimitClass};

    fn steep_bump() -> TestFunction<f64> {
        TestFunction::bump(1.0, Dim::One).scaled(3.0)
    }

    #[test]
    fn gradient_points_hit_targets() {
        let u = steep_bump();
        let pts = points_with_gradient(&u, &[0.5, 2.0, 5.0]);
        assert_eq!(pts.len(), 4);
        for (t, x) in pts {
            assert!((u.gradient(x)[0].abs() - t).abs() < 1e-10);
        }
    }

    #[test]
    fn power_limit_is_finite() {
        let f = YoungFunction::power(2.0).unwrap();
        let u = steep_bump();
        let (_, x) = points_with_gradient(&u, &[1.5])[0];
        let res = localization_limit(&f, &u, 0.5, x, &default_delta_list()).unwrap();
        match res.classification {
            Classification::Finite { limit } => assert!((limit - 4.5).abs() < 0.09, "{limit}"),
            c => panic!("unexpected {c:?}"),
        }
        let at = res.rows.iter().find(|r| (r.delta - 1e-4).abs() < 1e-12).unwrap();
        assert!((at.log_value.exp() / 4.5 - 1.0).abs() < 0.02);
    }

    #[test]
    fn flat_zero_trichotomy() {
        let f = YoungFunction::parse("flatzero").unwrap();
        let u = steep_bump();
        for (t, x) in points_with_gradient(&u, &[0.5, 2.0]) {
            let res = localization_limit(&f, &u, 0.5, x, &default_delta_list()).unwrap();
            let expected = if t < 1.0 { "ZERO" } else { "INFINITE" };
            assert_eq!(res.classification.name(), expected, "{t}: {:?}", res.rows);
            assert!(res.rows.iter().all(|r| !r.log_value.is_nan()));
            let m = matuszewska(&f, t, &default_deltas()).unwrap();
            assert_eq!(m.class, if t < 1.0 { LimitClass::Zero } else { LimitClass::Infinite });
        }
    }

    #[test]
    fn locally_constant_gives_minus_infinity() {
        let f = YoungFunction::power(2.0).unwrap();
        let u = TestFunction::plateau(1.0, Dim::One);
        assert_eq!(localized_normalized(&f, &u, 0.5, 1e-2, [0.1, 0.0]).unwrap(), f64::NEG_INFINITY);
    }
}
