//! Young functions: analytic catalog, complementary functions, growth
//! diagnostics (doubling ratios, indices, Matuszewska function) and the
//! integrated functions `t -> \int_0^t Phi(r) dr / r` used for the limit
//! energy density.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extended::Extended;
use crate::quadrature::{integrate_sphere, Dim, Integrator};
use crate::real::{geometric_grid, lit, Real};

/// Glue point of the flat-at-zero catalog function.
pub const FLAT_ZERO_GLUE: f64 = 0.25;

/// Ratio cap beyond which doubling ratios and indices saturate to `+inf`.
pub const RATIO_CAP: f64 = 1e12;

/// Relative bracket width at which the complementary-function root search stops.
pub const CONJUGATE_REL_TOL: f64 = 1e-12;

/// Matuszewska values below / above these thresholds classify as `0` / `+inf`.
pub const MATUSZEWSKA_ZERO: f64 = 1e-10;
pub const MATUSZEWSKA_INFINITE: f64 = 1e10;

/// Sample points per decade of the diagnostic grids.
pub const GRID_POINTS_PER_DECADE: usize = 100;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum YoungError {
    #[error("unknown Young function label `{0}`")]
    UnknownLabel(String),
    #[error("invalid parameter in `{label}`: {reason}")]
    InvalidParameter { label: String, reason: String },
    #[error("density of `{0}` is bounded; the complementary function is not finite")]
    BoundedDensity(String),
    #[error("delta sequence must be strictly decreasing with last element <= 1e-6")]
    InvalidDeltas,
    #[error("log A underflows at both t*delta = {t_delta} and delta = {delta}; use a smaller glue point t0")]
    NeedsSmallerT0 { t_delta: f64, delta: f64 },
}

/// Integrand profile `Phi` of an integrated Young function.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Profile {
    /// `Phi(r) = A(r)`.
    Plain,
    /// `Phi(r) = \int_{S^{n-1}} A(r |omega . e|) dH^{n-1}`, with `e` the given axis.
    Sphere { dim: Dim, axis: usize },
}

/// `t -> \int_0^t Phi(r) dr / r` with node values memoized on the grid `2^{k/8}`.
///
/// A query adds one short Gauss-Kronrod panel from the nearest node below,
/// so values are exact up to quadrature error rather than interpolated.
pub struct LogIntegral<T> {
    base: YoungFunction<T>,
    profile: Profile,
    nodes: RwLock<HashMap<i32, T>>,
}

const NODES_PER_OCTAVE: f64 = 8.0;

impl<T: Real> LogIntegral<T> {
    fn new(base: YoungFunction<T>, profile: Profile) -> Self {
        LogIntegral { base, profile, nodes: RwLock::new(HashMap::new()) }
    }

    fn phi(&self, r: T) -> T {
        match self.profile {
            Profile::Plain => self.base.eval(r).to_float(),
            Profile::Sphere { dim, axis } => integrate_sphere(
                |w: [T; 2]| self.base.eval(r * w[axis].abs()).to_float(),
                dim,
            ),
        }
    }

    fn integrand(&self, r: T) -> T {
        if r <= T::zero() {
            T::zero()
        } else {
            self.phi(r) / r
        }
    }

    fn integrator() -> Integrator<T> {
        Integrator::new(T::min_positive_value(), lit(1e-13))
    }

    fn node_value(&self, k: i32) -> T {
        if let Some(v) = self.nodes.read().expect("node cache poisoned").get(&k) {
            return *v;
        }
        let tk = T::two().powf(T::lit(k as f64 / NODES_PER_OCTAVE));
        // Octave breakpoints down to tk * 2^-40 resolve algebraic behavior at 0.
        let mut points: Vec<T> = (0..=40).rev().map(|j| tk * T::two().powi(-j)).collect();
        points.insert(0, T::zero());
        let value = match Self::integrator().integrate_with_breakpoints(|r| self.integrand(r), &points) {
            Ok(res) => res.value,
            Err(e) => e.partial().map(|p| p.value).unwrap_or(T::infinity()),
        };
        self.nodes.write().expect("node cache poisoned").insert(k, value);
        value
    }

    pub fn eval(&self, t: T) -> Extended<T> {
        if t <= T::zero() {
            return Extended::zero();
        }
        if !t.is_finite() {
            return Extended::Infinite;
        }
        let k = (t.log2() * T::lit(NODES_PER_OCTAVE)).floor().to_i32().unwrap_or(i32::MIN / 2);
        let tk = T::two().powf(T::lit(k as f64 / NODES_PER_OCTAVE));
        let base = self.node_value(k);
        if !base.is_finite() {
            return Extended::Infinite;
        }
        let panel = if t > tk {
            match Self::integrator().integrate(|r| self.integrand(r), tk, t) {
                Ok(res) => res.value,
                Err(_) => return Extended::Infinite,
            }
        } else {
            T::zero()
        };
        Extended::from_float(base + panel)
    }

    pub fn density(&self, t: T) -> Extended<T> {
        if t <= T::zero() {
            return Extended::zero();
        }
        Extended::from_float(self.phi(t) / t)
    }
}

impl<T> fmt::Debug for LogIntegral<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LogIntegral").field("profile", &self.profile).finish_non_exhaustive()
    }
}

/// A Young function `A(t) = \int_0^t a`, given in closed form or derived from
/// another Young function.
#[derive(Clone, Debug)]
pub enum YoungFunction<T> {
    /// `t^p / p`, `p > 1`.
    Power { p: T },
    /// `t^p`, `p > 1`.
    PowerUnnormalized { p: T },
    /// `t^p ln(1 + t)`, `p >= 1`.
    PowerLog { p: T },
    /// `t ln(1 + t)`.
    LLogL,
    /// `exp(t^q) - 1 - t^q`, `q >= 1`.
    ExpPower { q: T },
    /// `exp(-1/t)` for `t <= 1/4`, continued by the tangent-matched quadratic
    /// with matching curvature.
    FlatZero,
    /// Complementary function of the inner Young function.
    Conjugate(Arc<YoungFunction<T>>),
    /// Limit density `A_0` (or the plain log-integral) of the inner function.
    Integrated { label: String, table: Arc<LogIntegral<T>> },
}

impl<T: Real> YoungFunction<T> {
    pub fn power(p: T) -> Result<Self, YoungError> {
        if p > T::one() && p.is_finite() {
            Ok(YoungFunction::Power { p })
        } else {
            Err(invalid(format!("power:{p:?}"), "p must exceed 1"))
        }
    }

    pub fn power_unnormalized(p: T) -> Result<Self, YoungError> {
        if p > T::one() && p.is_finite() {
            Ok(YoungFunction::PowerUnnormalized { p })
        } else {
            Err(invalid(format!("power-unnormalized:{p:?}"), "p must exceed 1"))
        }
    }

    pub fn power_log(p: T) -> Result<Self, YoungError> {
        if p >= T::one() && p.is_finite() {
            Ok(YoungFunction::PowerLog { p })
        } else {
            Err(invalid(format!("powerlog:{p:?}"), "p must be at least 1"))
        }
    }

    pub fn exp_power(q: T) -> Result<Self, YoungError> {
        if q >= T::one() && q.is_finite() {
            Ok(YoungFunction::ExpPower { q })
        } else {
            Err(invalid(format!("exppower:{q:?}"), "q must be at least 1"))
        }
    }

    /// Parses a catalog label such as `power:2.0`, `exppower:1.0`, `llogl`,
    /// `flatzero`, `powerlog:2.0` or `power-unnormalized:2.0`.
    pub fn parse(label: &str) -> Result<Self, YoungError> {
        let label = label.trim();
        let (name, arg) = match label.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (label, None),
        };
        let number = |arg: Option<&str>| -> Result<T, YoungError> {
            let text = arg.ok_or_else(|| invalid(label.to_string(), "missing numeric parameter"))?;
            let v: f64 = text
                .parse()
                .map_err(|_| invalid(label.to_string(), "parameter is not a number"))?;
            Ok(T::lit(v))
        };
        match name {
            "power" => Self::power(number(arg)?),
            "power-unnormalized" => Self::power_unnormalized(number(arg)?),
            "powerlog" => Self::power_log(number(arg)?),
            "exppower" => Self::exp_power(number(arg)?),
            "llogl" if arg.is_none() => Ok(YoungFunction::LLogL),
            "flatzero" if arg.is_none() => Ok(YoungFunction::FlatZero),
            _ => Err(YoungError::UnknownLabel(label.to_string())),
        }
    }

    /// Labels of the analytic catalog accepted by [`YoungFunction::parse`].
    pub fn catalog_labels() -> &'static [&'static str] {
        &["power:<p>", "power-unnormalized:<p>", "powerlog:<p>", "llogl", "exppower:<q>", "flatzero"]
    }

    /// The five reference instances used by the diagnostics and acceptance runs.
    pub fn reference_catalog() -> Vec<Self> {
        vec![
            YoungFunction::Power { p: T::two() },
            YoungFunction::PowerLog { p: T::two() },
            YoungFunction::LLogL,
            YoungFunction::ExpPower { q: T::one() },
            YoungFunction::FlatZero,
        ]
    }

    pub fn label(&self) -> String {
        match self {
            YoungFunction::Power { p } => format!("power:{p:?}"),
            YoungFunction::PowerUnnormalized { p } => format!("power-unnormalized:{p:?}"),
            YoungFunction::PowerLog { p } => format!("powerlog:{p:?}"),
            YoungFunction::LLogL => "llogl".into(),
            YoungFunction::ExpPower { q } => format!("exppower:{q:?}"),
            YoungFunction::FlatZero => "flatzero".into(),
            YoungFunction::Conjugate(inner) => format!("conj({})", inner.label()),
            YoungFunction::Integrated { label, .. } => label.clone(),
        }
    }

    pub fn eval(&self, t: T) -> Extended<T> {
        if t <= T::zero() {
            return Extended::zero();
        }
        if !t.is_finite() {
            return Extended::Infinite;
        }
        match self {
            YoungFunction::Power { p } => Extended::from_float(t.powf(*p) / *p),
            YoungFunction::PowerUnnormalized { p } => Extended::from_float(t.powf(*p)),
            YoungFunction::PowerLog { p } => Extended::from_float(t.powf(*p) * t.ln_1p()),
            YoungFunction::LLogL => Extended::from_float(t * t.ln_1p()),
            YoungFunction::ExpPower { q } => {
                let x = t.powf(*q);
                if x < T::half() {
                    Extended::Finite(exp_tail(x))
                } else {
                    Extended::from_log(ln_exp_tail(x))
                }
            }
            YoungFunction::FlatZero => {
                let t0 = T::lit(FLAT_ZERO_GLUE);
                if t <= t0 {
                    Extended::Finite((-t.recip()).exp())
                } else {
                    let (a0, d0, c) = flat_zero_glue::<T>();
                    let h = t - t0;
                    Extended::from_float(a0 + d0 * h + c * h * h)
                }
            }
            YoungFunction::Conjugate(inner) => conjugate_eval(inner, t),
            YoungFunction::Integrated { table, .. } => table.eval(t),
        }
    }

    pub fn density(&self, t: T) -> Extended<T> {
        if t <= T::zero() {
            return Extended::zero();
        }
        if !t.is_finite() {
            return Extended::Infinite;
        }
        match self {
            YoungFunction::Power { p } => Extended::from_float(t.powf(*p - T::one())),
            YoungFunction::PowerUnnormalized { p } => Extended::from_float(*p * t.powf(*p - T::one())),
            YoungFunction::PowerLog { p } => Extended::from_float(
                *p * t.powf(*p - T::one()) * t.ln_1p() + t.powf(*p) / (T::one() + t),
            ),
            YoungFunction::LLogL => Extended::from_float(t.ln_1p() + t / (T::one() + t)),
            YoungFunction::ExpPower { q } => {
                let x = t.powf(*q);
                let log = q.ln() + (*q - T::one()) * t.ln() + ln_expm1(x);
                Extended::from_log(log)
            }
            YoungFunction::FlatZero => {
                let t0 = T::lit(FLAT_ZERO_GLUE);
                if t <= t0 {
                    Extended::Finite((-t.recip()).exp() / (t * t))
                } else {
                    let (_, d0, c) = flat_zero_glue::<T>();
                    Extended::from_float(d0 + T::two() * c * (t - t0))
                }
            }
            YoungFunction::Conjugate(inner) => match conjugate_argmax(inner, t) {
                Some(tau) => Extended::Finite(tau),
                None => Extended::Infinite,
            },
            YoungFunction::Integrated { table, .. } => table.density(t),
        }
    }

    /// `ln A(t)`; `-inf` at `t = 0`, `+inf` on saturation. Stays finite where
    /// `A(t)` itself underflows for the closed-form catalog entries.
    pub fn log_eval(&self, t: T) -> T {
        if t <= T::zero() {
            return T::neg_infinity();
        }
        if !t.is_finite() {
            return T::infinity();
        }
        match self {
            YoungFunction::Power { p } => *p * t.ln() - p.ln(),
            YoungFunction::PowerUnnormalized { p } => *p * t.ln(),
            YoungFunction::PowerLog { p } => *p * t.ln() + t.ln_1p().ln(),
            YoungFunction::LLogL => t.ln() + t.ln_1p().ln(),
            YoungFunction::ExpPower { q } => {
                let x = t.powf(*q);
                if x < T::half() {
                    exp_tail(x).ln()
                } else {
                    ln_exp_tail(x)
                }
            }
            YoungFunction::FlatZero if t <= T::lit(FLAT_ZERO_GLUE) => -t.recip(),
            _ => self.eval(t).ln(),
        }
    }

    /// `ln a(t)`, with the same conventions as [`YoungFunction::log_eval`].
    pub fn log_density(&self, t: T) -> T {
        if t <= T::zero() {
            return T::neg_infinity();
        }
        match self {
            YoungFunction::Power { p } => (*p - T::one()) * t.ln(),
            YoungFunction::PowerUnnormalized { p } => p.ln() + (*p - T::one()) * t.ln(),
            YoungFunction::ExpPower { q } => q.ln() + (*q - T::one()) * t.ln() + ln_expm1(t.powf(*q)),
            YoungFunction::FlatZero if t <= T::lit(FLAT_ZERO_GLUE) => -t.recip() - T::two() * t.ln(),
            _ => self.density(t).ln(),
        }
    }

    /// Whether the density keeps growing at infinity (sampled at two far points).
    fn density_unbounded(&self) -> bool {
        let far = self.density(T::lit(1e30));
        let near = self.density(T::lit(1e15));
        match (near, far) {
            (_, Extended::Infinite) => true,
            (Extended::Finite(n), Extended::Finite(f)) => f > n,
            _ => false,
        }
    }
}

fn invalid(label: String, reason: &str) -> YoungError {
    YoungError::InvalidParameter { label, reason: reason.to_string() }
}

/// `(A(t0), a(t0), c)` of the flat-at-zero continuation; `c = a'(t0) / 2`
/// keeps the density `C^1` and nondecreasing.
fn flat_zero_glue<T: Real>() -> (T, T, T) {
    let t0 = T::lit(FLAT_ZERO_GLUE);
    let e = (-t0.recip()).exp();
    let a0 = e / (t0 * t0);
    let da0 = e * (T::one() - T::two() * t0) / t0.powi(4);
    (e, a0, da0 * T::half())
}

/// `e^x - 1 - x` for small `x` by its Taylor series.
fn exp_tail<T: Real>(x: T) -> T {
    let mut term = x * x * T::half();
    let mut sum = term;
    for k in 3..40 {
        term = term * x / T::from_usize_lossy(k);
        sum += term;
        if term <= T::epsilon() * sum {
            break;
        }
    }
    sum
}

/// `ln(e^x - 1 - x)` for `x >= 1/2`.
fn ln_exp_tail<T: Real>(x: T) -> T {
    if x < T::lit(30.0) {
        (x.exp_m1() - x).ln()
    } else {
        x + (-(T::one() + x) * (-x).exp()).ln_1p()
    }
}

/// `ln(e^x - 1)` without overflow.
fn ln_expm1<T: Real>(x: T) -> T {
    if x < T::lit(30.0) {
        x.exp_m1().ln()
    } else {
        x + (-(-x).exp()).ln_1p()
    }
}

/// Maximizer `tau*` of `tau t - A(tau)`: the root of `a(tau) = t`, found by
/// doubling then bisection. `None` when the bracket cannot be closed.
fn conjugate_argmax<T: Real>(inner: &YoungFunction<T>, t: T) -> Option<T> {
    if t <= T::zero() {
        return Some(T::zero());
    }
    let target = Extended::Finite(t);
    let mut hi = T::one();
    let mut steps = 0;
    while inner.density(hi) < target {
        hi = hi * T::two();
        steps += 1;
        if steps > 4000 || !hi.is_finite() {
            return None;
        }
    }
    let mut lo = hi * T::half();
    steps = 0;
    while inner.density(lo) >= target {
        lo = lo * T::half();
        steps += 1;
        if lo <= T::min_positive_value() || steps > 4000 {
            return Some(T::zero());
        }
    }
    let tol = T::lit(CONJUGATE_REL_TOL);
    for _ in 0..200 {
        if hi - lo <= tol * hi {
            break;
        }
        let mid = (lo + hi) * T::half();
        if inner.density(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) * T::half())
}

fn conjugate_eval<T: Real>(inner: &YoungFunction<T>, t: T) -> Extended<T> {
    let Some(tau) = conjugate_argmax(inner, t) else {
        return Extended::Infinite;
    };
    match inner.eval(tau) {
        Extended::Finite(a) => {
            let gain = tau * t;
            if !gain.is_finite() {
                return Extended::Infinite;
            }
            Extended::Finite((gain - a).max(T::zero()))
        }
        // tau t - A(tau) with A saturated cannot be the supremum; the
        // supremum then lives at a smaller tau, which bisection never reaches.
        Extended::Infinite => Extended::Infinite,
    }
}

/// Complementary function `sup_{tau >= 0} (tau t - A(tau))`.
pub fn conjugate<T: Real>(f: &YoungFunction<T>) -> Result<YoungFunction<T>, YoungError> {
    if !f.density_unbounded() {
        return Err(YoungError::BoundedDensity(f.label()));
    }
    Ok(YoungFunction::Conjugate(Arc::new(f.clone())))
}

/// `conj(A)(tau) + A(t) - tau t`, nonnegative up to rounding; `+inf` when a term saturates.
pub fn young_inequality_margin<T: Real>(f: &YoungFunction<T>, conj: &YoungFunction<T>, tau: T, t: T) -> Extended<T> {
    match (conj.eval(tau), f.eval(t)) {
        (Extended::Finite(c), Extended::Finite(a)) => Extended::Finite(c + a - tau * t),
        _ => Extended::Infinite,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Global,
    NearZero,
}

impl Regime {
    fn range<T: Real>(self) -> (T, T, usize) {
        match self {
            Regime::Global => (T::lit(1e-8), T::lit(1e8), 16 * GRID_POINTS_PER_DECADE + 1),
            Regime::NearZero => (T::lit(1e-8), T::lit(1e-1), 7 * GRID_POINTS_PER_DECADE + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Delta2Report<T> {
    pub sup_ratio: Extended<T>,
    pub argmax_t: T,
    pub regime: Regime,
    pub grid: String,
}

/// `sup A(2t) / A(t)` over a geometric grid, evaluated in log domain.
pub fn delta2_ratio<T: Real>(f: &YoungFunction<T>, regime: Regime) -> Delta2Report<T> {
    let (lo, hi, points) = regime.range::<T>();
    let grid = geometric_grid(lo, hi, points);
    let log_cap = T::lit(RATIO_CAP).ln();
    let mut best = T::neg_infinity();
    let mut argmax = lo;
    for &t in &grid {
        let (l2, l1) = (f.log_eval(T::two() * t), f.log_eval(t));
        let log_ratio = if l2 == T::infinity() && l1.is_finite() {
            T::infinity()
        } else if l1.is_finite() && l2.is_finite() {
            l2 - l1
        } else {
            continue;
        };
        if log_ratio > best {
            best = log_ratio;
            argmax = t;
        }
    }
    let sup_ratio = if best > log_cap { Extended::Infinite } else { Extended::Finite(best.exp()) };
    Delta2Report {
        sup_ratio,
        argmax_t: argmax,
        regime,
        grid: format!("geometric t in [{lo:e}, {hi:e}], {points} points"),
    }
}

/// Classification of a limit value in `[0, +inf]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LimitClass {
    Zero,
    Finite,
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Matuszewska<T> {
    pub value: Extended<T>,
    pub log_value: T,
    pub class: LimitClass,
}

/// Default `delta` sequence: `10^{-k/2}`, `k = 2..=16`.
pub fn default_deltas<T: Real>() -> Vec<T> {
    (2..=16).map(|k| T::lit(10f64.powf(-(k as f64) / 2.0))).collect()
}

/// `M_0(t) = limsup_{delta -> 0} A(t delta) / A(delta)`, estimated as the running
/// maximum of the log ratio over the tail half of `deltas`.
pub fn matuszewska<T: Real>(f: &YoungFunction<T>, t: T, deltas: &[T]) -> Result<Matuszewska<T>, YoungError> {
    let valid = !deltas.is_empty()
        && deltas.windows(2).all(|w| w[1] < w[0])
        && deltas.iter().all(|d| *d > T::zero())
        && *deltas.last().unwrap() <= T::lit(1e-6);
    if !valid {
        return Err(YoungError::InvalidDeltas);
    }
    if t <= T::zero() {
        return Ok(Matuszewska { value: Extended::zero(), log_value: T::neg_infinity(), class: LimitClass::Zero });
    }
    let mut best = T::neg_infinity();
    for &delta in &deltas[deltas.len() / 2..] {
        let num = f.log_eval(t * delta);
        let den = f.log_eval(delta);
        if !num.is_finite() && !den.is_finite() {
            return Err(YoungError::NeedsSmallerT0 {
                t_delta: (t * delta).to_f64_lossy(),
                delta: delta.to_f64_lossy(),
            });
        }
        let log_ratio = if !den.is_finite() { T::infinity() } else { num - den };
        if log_ratio > best {
            best = log_ratio;
        }
    }
    let class = if best < T::lit(MATUSZEWSKA_ZERO).ln() {
        LimitClass::Zero
    } else if best > T::lit(MATUSZEWSKA_INFINITE).ln() {
        LimitClass::Infinite
    } else {
        LimitClass::Finite
    };
    Ok(Matuszewska { value: Extended::from_log(best), log_value: best, class })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexBounds<T> {
    pub p_minus: T,
    pub p_plus: Extended<T>,
}

/// `inf` and `sup` of `t a(t) / A(t)` over `t in [1e-8, 1e8]`.
///
/// The supremum saturates when it exceeds [`RATIO_CAP`], or when it is attained
/// at an end of the grid while still growing by at least a factor two over
/// the last decade towards that end.
pub fn index_bounds<T: Real>(f: &YoungFunction<T>) -> IndexBounds<T> {
    let (lo, hi, points) = Regime::Global.range::<T>();
    let grid = geometric_grid(lo, hi, points);
    let ratios: Vec<Option<T>> = grid
        .iter()
        .map(|&t| {
            let l = t.ln() + f.log_density(t) - f.log_eval(t);
            l.is_finite().then(|| l.exp())
        })
        .collect();
    let mut p_minus = T::infinity();
    let mut p_plus = T::neg_infinity();
    let mut argmax = 0usize;
    for (i, r) in ratios.iter().enumerate() {
        if let Some(r) = *r {
            p_minus = p_minus.min(r);
            if r > p_plus {
                p_plus = r;
                argmax = i;
            }
        }
    }
    let decade = GRID_POINTS_PER_DECADE;
    let growing_at_end = |end: usize, inward: usize| match (ratios[end], ratios[inward]) {
        (Some(e), Some(i)) => e >= T::two() * i,
        _ => false,
    };
    let last = ratios.len() - 1;
    let unbounded = p_plus > T::lit(RATIO_CAP)
        || (argmax == 0 && growing_at_end(0, decade))
        || (argmax == last && growing_at_end(last, last - decade));
    IndexBounds {
        p_minus,
        p_plus: if unbounded { Extended::Infinite } else { Extended::Finite(p_plus) },
    }
}

/// `(t a(t) - A(t), A(2t) - t a(t))`, both nonnegative for a Young function.
pub fn sandwich_check<T: Real>(f: &YoungFunction<T>, t: T) -> (Extended<T>, Extended<T>) {
    let ta = f.density(t) * t;
    let lhs = match (ta, f.eval(t)) {
        (Extended::Finite(ta), Extended::Finite(a)) => Extended::Finite(ta - a),
        _ => Extended::Infinite,
    };
    let rhs = match (f.eval(T::two() * t), ta) {
        (Extended::Finite(a2), Extended::Finite(ta)) => Extended::Finite(a2 - ta),
        _ => Extended::Infinite,
    };
    (lhs, rhs)
}

/// Both readings of the regular-variation quotient at `t`:
/// `(A(lambda t) / A(t), A(lambda t) / t)`.
pub fn regular_variation_quotients<T: Real>(f: &YoungFunction<T>, lambda: T, t: T) -> (T, T) {
    let num = f.log_eval(lambda * t);
    ((num - f.log_eval(t)).exp(), (num - t.ln()).exp())
}

/// Limit Young function `A_0(t) = \int_0^t \int_{S^{n-1}} A(r |omega . e_n|) dH^{n-1} dr / r`.
pub fn compute_a0<T: Real>(f: &YoungFunction<T>, n: Dim) -> YoungFunction<T> {
    compute_a0_with_axis(f, n, n.as_usize() - 1)
}

/// [`compute_a0`] with the fixed unit vector `e_axis` instead of `e_n`.
pub fn compute_a0_with_axis<T: Real>(f: &YoungFunction<T>, n: Dim, axis: usize) -> YoungFunction<T> {
    assert!(axis < n.as_usize(), "axis outside the ambient dimension");
    YoungFunction::Integrated {
        label: format!("a0[n={},e{}]({})", n.as_usize(), axis + 1, f.label()),
        table: Arc::new(LogIntegral::new(f.clone(), Profile::Sphere { dim: n, axis })),
    }
}

/// `Lambda(w) = \int_0^w A(v) dv / v`: closes radial tails exactly, since
/// `\int_rho^\infty A(c r^{-s}) dr / r = Lambda(c rho^{-s}) / s`.
pub fn log_integral<T: Real>(f: &YoungFunction<T>) -> YoungFunction<T> {
    YoungFunction::Integrated {
        label: format!("logint({})", f.label()),
        table: Arc::new(LogIntegral::new(f.clone(), Profile::Plain)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn parse_round_trips_labels() {
        for label in ["power:2.0", "powerlog:2.0", "llogl", "exppower:1.0", "flatzero", "power-unnormalized:3.0"] {
            let f = YoungFunction::<f64>::parse(label).unwrap();
            assert_eq!(f.label(), label);
        }
        assert!(matches!(YoungFunction::<f64>::parse("cosh"), Err(YoungError::UnknownLabel(_))));
        assert!(YoungFunction::<f64>::parse("power:1.0").is_err());
        assert!(YoungFunction::<f64>::parse("power:abc").is_err());
        assert!(YoungFunction::<f64>::parse("exppower:0.5").is_err());
    }

    #[test]
    fn flat_zero_continuation_is_smooth_and_convex() {
        let f = YoungFunction::<f64>::FlatZero;
        let t0 = FLAT_ZERO_GLUE;
        let h = 1e-9;
        let left = f.eval(t0 - h).finite().unwrap();
        let right = f.eval(t0 + h).finite().unwrap();
        assert!((right - left) / (2.0 * h) - f.density(t0).finite().unwrap() < 1e-6);
        let grid = geometric_grid(1e-3, 1e3, 2000);
        let dens: Vec<f64> = grid.iter().map(|&t| f.density(t).finite().unwrap()).collect();
        assert!(dens.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn catalog_invariants_hold() {
        for f in YoungFunction::<f64>::reference_catalog() {
            assert_eq!(f.eval(0.0), Extended::zero());
            assert_eq!(f.density(0.0), Extended::zero());
            let grid = geometric_grid(1e-3, 50.0, 400);
            let mut prev = 0.0;
            for &t in &grid {
                let a = f.density(t).finite().unwrap();
                assert!(a >= prev, "{}: density decreases at {t}", f.label());
                prev = a;
                if a > 0.0 {
                    continue;
                }
                // Flat-at-zero densities underflow near 0 but never go negative.
                assert!(matches!(f, YoungFunction::FlatZero));
            }
            // eval agrees with the integral of the density
            for &t in &[0.05, 0.3, 1.0, 4.0] {
                let q = Integrator::new(1e-14, 1e-13)
                    .integrate(|x| f.density(x).to_float(), 0.0, t)
                    .unwrap();
                let a = f.eval(t).finite().unwrap();
                assert!((a - q.value).abs() <= 1e-8 * (1.0 + a), "{} at {t}", f.label());
            }
        }
    }

    #[test]
    fn superlinear_at_zero_and_infinity() {
        for f in YoungFunction::<f64>::reference_catalog() {
            let small: Vec<f64> = (1..=8).map(|k| {
                let t = 10f64.powi(-k);
                f.eval(t).finite().unwrap() / t
            }).collect();
            assert!(small.windows(2).all(|w| w[1] <= w[0]), "{}", f.label());
            assert!(*small.last().unwrap() < 1e-6, "{}", f.label());
            let large: Vec<Extended<f64>> = (1..=4).map(|k| {
                let t = 10f64.powi(k);
                f.eval(t) * (1.0 / t)
            }).collect();
            assert!(large.windows(2).all(|w| w[1] > w[0] || w[1].is_infinite()), "{}", f.label());
        }
    }

    #[test]
    fn log_eval_matches_eval_where_representable() {
        for f in YoungFunction::<f64>::reference_catalog() {
            for &t in &[1e-3, 0.1, 0.25, 0.7, 3.0, 40.0] {
                if f.eval(t).finite().unwrap() < 1e-300 {
                    assert!(f.log_eval(t).is_finite());
                    continue;
                }
                let direct = f.eval(t).finite().unwrap().ln();
                let log = f.log_eval(t);
                assert!((direct - log).abs() < 1e-10 * (1.0 + direct.abs()), "{} at {t}", f.label());
                let dd = f.density(t).finite().unwrap().ln();
                assert!((dd - f.log_density(t)).abs() < 1e-10 * (1.0 + dd.abs()));
            }
        }
        // ExpPower stays finite in log domain far beyond overflow.
        let e = YoungFunction::<f64>::ExpPower { q: 1.0 };
        assert!(e.eval(1e4).is_infinite());
        assert!((e.log_eval(1e4) - 1e4).abs() < 1e-9);
    }

    #[test]
    fn conjugate_of_quadratic_is_quadratic() {
        let f = YoungFunction::<f64>::power(2.0).unwrap();
        let c = conjugate(&f).unwrap();
        assert_eq!(c.eval(0.0), Extended::zero());
        for t in geometric_grid(1e-3, 1e3, 60) {
            let v = c.eval(t).finite().unwrap();
            assert!(rel(v, t * t / 2.0) < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn conjugate_of_cubic() {
        let f = YoungFunction::<f64>::power(3.0).unwrap();
        let c = conjugate(&f).unwrap();
        for t in geometric_grid(1e-3, 1e3, 40) {
            let v = c.eval(t).finite().unwrap();
            assert!(rel(v, t.powf(1.5) / 1.5) < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn young_inequality_examples() {
        let f = YoungFunction::<f64>::power(2.0).unwrap();
        let c = conjugate(&f).unwrap();
        assert_eq!(young_inequality_margin(&f, &c, 0.0, 0.0), Extended::Finite(0.0));
        for t in [0.1, 1.0, 7.5] {
            let m = young_inequality_margin(&f, &c, t, t).finite().unwrap();
            assert!(m.abs() < 1e-8, "{m}");
        }
        let m = young_inequality_margin(&f, &c, 1.0, 3.0).finite().unwrap();
        assert!((m - 2.0).abs() < 1e-10);
    }

    #[test]
    fn delta2_examples() {
        let p2 = YoungFunction::<f64>::power(2.0).unwrap();
        let r = delta2_ratio(&p2, Regime::Global);
        assert!((r.sup_ratio.finite().unwrap() - 4.0).abs() < 1e-8);
        assert!(delta2_ratio(&YoungFunction::<f64>::ExpPower { q: 1.0 }, Regime::Global).sup_ratio.is_infinite());
        assert!(delta2_ratio(&YoungFunction::<f64>::FlatZero, Regime::NearZero).sup_ratio.is_infinite());
        let r = delta2_ratio(&YoungFunction::<f64>::LLogL, Regime::Global);
        assert!(r.sup_ratio.finite().unwrap() >= 2.0);
    }

    #[test]
    fn matuszewska_examples() {
        let deltas = default_deltas::<f64>();
        for f in YoungFunction::<f64>::reference_catalog() {
            let m = matuszewska(&f, 1.0, &deltas).unwrap();
            assert_eq!(m.value, Extended::Finite(1.0));
            assert_eq!(m.class, LimitClass::Finite);
        }
        let p = YoungFunction::<f64>::power(2.0).unwrap();
        let m = matuszewska(&p, 0.5, &deltas).unwrap();
        assert!((m.value.finite().unwrap() - 0.25).abs() < 1e-12);
        let fz = YoungFunction::<f64>::FlatZero;
        assert_eq!(matuszewska(&fz, 0.5, &deltas).unwrap().class, LimitClass::Zero);
        assert_eq!(matuszewska(&fz, 2.0, &deltas).unwrap().class, LimitClass::Infinite);
        assert_eq!(matuszewska(&p, 0.5, &[1e-3, 1e-4]), Err(YoungError::InvalidDeltas));
        assert_eq!(matuszewska(&p, 0.5, &[1e-7, 1e-6]), Err(YoungError::InvalidDeltas));
    }

    #[test]
    fn index_bound_examples() {
        let p2 = index_bounds(&YoungFunction::<f64>::power(2.0).unwrap());
        assert!((p2.p_minus - 2.0).abs() < 1e-10);
        assert!((p2.p_plus.finite().unwrap() - 2.0).abs() < 1e-10);
        assert!(index_bounds(&YoungFunction::<f64>::ExpPower { q: 1.0 }).p_plus.is_infinite());
        assert!(index_bounds(&YoungFunction::<f64>::FlatZero).p_plus.is_infinite());
        let ll = index_bounds(&YoungFunction::<f64>::LLogL);
        assert!(ll.p_minus > 1.0 && ll.p_minus <= 2.0);
        assert!(ll.p_plus.finite().unwrap() <= 2.0);
    }

    #[test]
    fn sandwich_examples() {
        let p2 = YoungFunction::<f64>::power(2.0).unwrap();
        let (l, r) = sandwich_check(&p2, 1.0);
        assert!((l.finite().unwrap() - 0.5).abs() < 1e-15);
        assert!((r.finite().unwrap() - 1.0).abs() < 1e-15);
        let (l, r) = sandwich_check(&p2, 1e-9);
        assert!(l.finite().unwrap().abs() < 1e-17 && r.finite().unwrap().abs() < 1e-17);
        let (l, r) = sandwich_check(&YoungFunction::<f64>::FlatZero, 0.1);
        assert!(l.finite().unwrap() >= 0.0 && r.finite().unwrap() >= 0.0);
    }

    #[test]
    fn a0_of_powers_in_one_dimension() {
        let f = YoungFunction::<f64>::power(2.0).unwrap();
        let a0 = compute_a0(&f, Dim::One);
        assert_eq!(a0.eval(0.0), Extended::zero());
        for t in geometric_grid(1e-2, 1e2, 25) {
            assert!(rel(a0.eval(t).finite().unwrap(), t * t / 2.0) < 1e-8);
        }
    }

    #[test]
    fn a0_axis_is_immaterial_in_the_plane() {
        let f = YoungFunction::<f64>::ExpPower { q: 1.0 };
        let e2 = compute_a0(&f, Dim::Two);
        let e1 = compute_a0_with_axis(&f, Dim::Two, 0);
        for t in [0.3, 1.0, 2.5] {
            let (a, b) = (e2.eval(t).finite().unwrap(), e1.eval(t).finite().unwrap());
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn log_integral_of_power() {
        let f = YoungFunction::<f64>::power(3.0).unwrap();
        let lam = log_integral(&f);
        // \int_0^w v^2 / 3 dv = w^3 / 9
        for w in [1e-4, 0.2, 1.0, 13.0] {
            assert!(rel(lam.eval(w).finite().unwrap(), w.powi(3) / 9.0) < 1e-10);
        }
    }

    #[test]
    fn catalog_densities_are_unbounded() {
        for f in YoungFunction::<f64>::reference_catalog() {
            assert!(conjugate(&f).is_ok());
        }
    }

    #[test]
    fn f32_catalog_evaluates() {
        let f = YoungFunction::<f32>::parse("power:2.0").unwrap();
        assert!((f.eval(3.0).finite().unwrap() - 4.5).abs() < 1e-6);
        let c = conjugate(&f).unwrap();
        assert!((c.eval(2.0).finite().unwrap() - 2.0).abs() < 1e-4);
    }
}
