//! Modulars, Luxemburg norms, mollification and the `C^2` convolution bound.

use serde::{Deserialize, Serialize};

use crate::extended::Extended;
use crate::functions::{Derivative, Mollifier, ScalarField, TestFunction};
use crate::quadrature::Integrator;
use crate::real::{geometric_grid, lit, Real};
use crate::young::{conjugate, YoungError, YoungFunction};

/// Relative tolerance of modular quadratures.
pub const MODULAR_REL_TOL: f64 = 1e-12;

/// Acceptance window `[1 - LUXEMBURG_WINDOW, 1]` for the modular at the norm.
pub const LUXEMBURG_WINDOW: f64 = 1e-8;

/// Factor in the Orlicz-Hölder inequality `\int |uv| <= 2 ||u||_A ||v||_{conj A}`.
pub const HOLDER_FACTOR: f64 = 2.0;

fn modular_integrator<T: Real>() -> Integrator<T> {
    Integrator::new(lit(1e-30), lit(MODULAR_REL_TOL))
}

/// `\int A(|u| / k)`, `+inf` when the integrand overflows.
pub fn modular<T: Real, F: ScalarField<T> + ?Sized>(f: &YoungFunction<T>, u: &F, k: T) -> Extended<T> {
    assert!(k > T::zero(), "modular scale must be positive");
    let phi = |v: T| f.eval(v / k).to_float();
    match u.integrate_abs(&phi, &modular_integrator()) {
        Ok(res) => Extended::from_float(res.value),
        Err(err) => match err.partial() {
            Some(p) if p.value.is_finite() => Extended::Finite(p.value),
            _ => Extended::Infinite,
        },
    }
}

/// `ln \int A(|u| / k)`, computed with the integrand scaled by its largest
/// value so that neither overflow nor underflow of `A` is mistaken for a
/// divergent or vanishing modular. Returns `-inf` for a zero modular.
pub fn log_modular<T: Real, F: ScalarField<T> + ?Sized>(f: &YoungFunction<T>, u: &F, k: T) -> T {
    let peak = f.log_eval(u.sup_abs() / k);
    if peak == T::neg_infinity() {
        return peak;
    }
    if !peak.is_finite() {
        return T::infinity();
    }
    let phi = |v: T| {
        let l = f.log_eval(v / k);
        if l == T::infinity() {
            T::infinity()
        } else {
            (l - peak).exp()
        }
    };
    match u.integrate_abs(&phi, &modular_integrator()) {
        Ok(res) if res.value > T::zero() => res.value.ln() + peak,
        Ok(_) => T::neg_infinity(),
        Err(_) => T::infinity(),
    }
}

/// `inf{k > 0 : \int A(|u|/k) <= 1}`, located by bracketing in `k` and
/// bisection in `ln k` until the modular lies in `[1 - 1e-8, 1]`.
pub fn luxemburg_norm<T: Real, F: ScalarField<T> + ?Sized>(f: &YoungFunction<T>, u: &F) -> T {
    let sup = u.sup_abs();
    if sup == T::zero() {
        return T::zero();
    }
    let above_one = |k: T| modular(f, u, k) > Extended::Finite(T::one());
    let mut hi = sup.max(T::min_positive_value());
    while above_one(hi) {
        hi = hi * T::two();
    }
    let mut lo = hi * T::half();
    while !above_one(lo) {
        hi = lo;
        lo = lo * T::half();
        if lo < T::min_positive_value() {
            return T::zero();
        }
    }
    let floor = Extended::Finite(T::one() - lit(LUXEMBURG_WINDOW));
    for _ in 0..200 {
        if modular(f, u, hi) >= floor {
            break;
        }
        let mid = ((lo.ln() + hi.ln()) * T::half()).exp();
        if mid <= lo || mid >= hi {
            break;
        }
        if above_one(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `u * rho_eps`, evaluated by quadrature of the convolution.
pub fn mollify<T: Real>(u: &TestFunction<T>, eps: T) -> TestFunction<T> {
    let dim = crate::functions::ScalarField::dim(u);
    TestFunction::Mollified { inner: std::sync::Arc::new(u.clone()), mollifier: Mollifier::new(eps, dim) }
}

/// Both sides of `||u * rho||_{C^2} <= C_rho ||u||_A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C2Bound<T> {
    pub lhs: T,
    pub rhs: T,
    /// `2 max_{|alpha| <= 2} ||d^alpha rho||_{conj A}`.
    pub c_rho: T,
    pub norm_u: T,
}

impl<T: Real> C2Bound<T> {
    pub fn holds(&self, slack: T) -> bool {
        self.lhs <= self.rhs * (T::one() + slack)
    }
}

/// Compares the `C^2` norm of `u * rho` with its Orlicz-Hölder majorant.
pub fn c2_convolution_bound<T: Real>(
    u: &TestFunction<T>,
    rho: &Mollifier<T>,
    f: &YoungFunction<T>,
) -> Result<C2Bound<T>, YoungError> {
    let conj = conjugate(f)?;
    let kernel = rho.as_function();
    let c_rho = Derivative::<T>::multi_indices(rho.dim)
        .into_iter()
        .map(|alpha| luxemburg_norm(&conj, &Derivative { inner: kernel.clone(), alpha }))
        .fold(T::zero(), T::max)
        * lit(HOLDER_FACTOR);
    if u.is_zero() {
        return Ok(C2Bound { lhs: T::zero(), rhs: T::zero(), c_rho, norm_u: T::zero() });
    }
    let norm_u = luxemburg_norm(f, u);
    let smoothed = TestFunction::Mollified { inner: std::sync::Arc::new(u.clone()), mollifier: rho.clone() };
    Ok(C2Bound { lhs: smoothed.c2_norm(), rhs: c_rho * norm_u, c_rho, norm_u })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    /// Finite modular at every sampled scale.
    EAConsistent,
    Inconclusive,
}

/// Scales `k` spanning `[1e-4, 1e4]`, two per decade.
pub fn default_probe_scales<T: Real>() -> Vec<T> {
    geometric_grid(lit(1e-4), lit(1e4), 17)
}

/// Heuristic check that `u` behaves like an element of the closure of bounded
/// functions: the modular must be finite at every sampled `k`. A finite answer
/// on finitely many scales proves nothing; an infinite one is reported as
/// inconclusive rather than as a counterexample.
pub fn membership_probe<T: Real, F: ScalarField<T> + ?Sized>(f: &YoungFunction<T>, u: &F, scales: &[T]) -> Membership {
    if scales.iter().all(|&k| log_modular(f, u, k) < T::infinity()) {
        Membership::EAConsistent
    } else {
        Membership::Inconclusive
    }
}
