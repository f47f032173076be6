//! Fractional Orlicz energies `J_s(u) = (1-s) \iint A(|D^s u|) |x-y|^{-n} dx dy`,
//! their pointwise densities, the local limit `J(u) = \int A_0(|grad u|)` and
//! the convergence experiments built on them.
//!
//! Pair integrals are written in polar coordinates around `x`. For `x` in the
//! support ball `B_R` a ray leaves the ball at distance `rho`; beyond it
//! `u(y) = 0` and the remaining radial integral is `Lambda(|u(x)| rho^{-s}) / s`
//! with `Lambda(w) = \int_0^w A(v) dv / v`. By symmetry of the integrand the
//! pairs with `x` outside the ball are the mirror image of that tail, so the
//! outer integral never leaves `B_R` and no truncation is needed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extended::Extended;
use crate::functions::{integrate_over_support, norm, Hessian, ScalarField, TestFunction};
use crate::orlicz::mollify;
use crate::quadrature::{
    growth_certificate_with_factor, Dim, GrowthCertificate, Integrator, Point, QuadError, QuadResult, RADIAL_DECADES,
};
use crate::real::{lit, Real};
use crate::young::{compute_a0, log_integral, YoungFunction};

/// Largest admissible fractional order.
pub const MAX_S: f64 = 0.9999;

/// Radius, relative to the support radius, below which differences
/// `u(x + r w) - u(x)` are replaced by their second-order Taylor expansion.
pub const TAYLOR_RADIUS: f64 = 1e-4;

/// Equispaced directions on the circle used by the energy kernels.
pub const ENERGY_CIRCLE_NODES: usize = 128;

/// Per-decade growth of truncated energies that certifies divergence.
pub const ENERGY_GROWTH_FACTOR: f64 = 2.0;

/// Inner cutoffs of the truncated energies behind a growth certificate.
pub const CERTIFICATE_CUTOFFS: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Final relative error below which an s-sweep counts as convergent.
pub const CONVERGENCE_THRESHOLD: f64 = 0.05;

/// Relative slack of the liminf verdict.
pub const LIMINF_SLACK: f64 = 1e-2;

/// `s_k = 1 - 2^{-k}` stays below [`MAX_S`] up to this `k`.
pub const MAX_LIMINF_TERMS: usize = 13;

/// Denominator floor in relative errors.
pub const REL_ERROR_FLOOR: f64 = 1e-30;

/// Relative errors at or below this level count as exact in monotonicity tests.
pub const EXACT_LEVEL: f64 = 1e-12;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("fractional order s = {0} outside (0, {MAX_S}]")]
    InvalidOrder(f64),
    #[error("horizon must be positive, got {0}")]
    InvalidHorizon(f64),
    #[error("liminf experiment needs 1..={MAX_LIMINF_TERMS} terms, got {0}")]
    InvalidTermCount(usize),
    #[error("parameter list must be nonempty and strictly monotone")]
    InvalidParameterList,
    #[error("test functions live in different dimensions")]
    DimensionMismatch,
}

/// Accuracy and scheduling knobs of the energy evaluations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyOptions<T> {
    /// Relative tolerance of the outer integral over `x`.
    pub rel_tol: T,
    /// Relative tolerance of the ray integrals.
    pub inner_rel_tol: T,
    /// Evaluate outer quadrature nodes on the rayon pool.
    pub parallel: bool,
}

impl<T: Real> Default for EnergyOptions<T> {
    fn default() -> Self {
        EnergyOptions { rel_tol: lit(1e-8), inner_rel_tol: lit(1e-10), parallel: true }
    }
}

impl<T: Real> EnergyOptions<T> {
    /// Options with outer tolerance `tol` and ray tolerance `tol / 100`.
    pub fn with_tolerance(tol: T) -> Self {
        EnergyOptions { rel_tol: tol, inner_rel_tol: tol * lit(1e-2), parallel: true }
    }
}

/// An energy together with its error bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue<T> {
    pub value: Extended<T>,
    pub err_estimate: T,
    /// Contribution of truncated pairs; zero because tails are closed exactly.
    pub truncation_bound: T,
    /// Truncated energies along decreasing inner cutoffs, present when the
    /// full integral failed to converge.
    pub certificate: Option<GrowthCertificate<T>>,
}

impl<T: Real> EnergyValue<T> {
    pub fn exact_zero() -> Self {
        EnergyValue { value: Extended::zero(), err_estimate: T::zero(), truncation_bound: T::zero(), certificate: None }
    }

    pub fn finite(&self) -> Option<T> {
        self.value.finite()
    }
}

fn check_order<T: Real>(s: T) -> Result<(), EnergyError> {
    if s > T::zero() && s <= lit::<T>(MAX_S) * (T::one() + T::epsilon()) {
        Ok(())
    } else {
        Err(EnergyError::InvalidOrder(s.to_f64_lossy()))
    }
}

fn dot<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

fn quad_form<T: Real>(h: &Hessian<T>, w: Point<T>) -> T {
    h[0][0] * w[0] * w[0] + T::two() * h[0][1] * w[0] * w[1] + h[1][1] * w[1] * w[1]
}

/// Value, gradient and Hessian of `u` at a point.
#[derive(Clone, Copy, Debug)]
struct Jet<T> {
    value: T,
    grad: Point<T>,
    hess: Hessian<T>,
}

fn circle_directions<T: Real>(dim: Dim) -> Vec<(Point<T>, T)> {
    match dim {
        Dim::One => vec![([T::one(), T::zero()], T::one()), ([-T::one(), T::zero()], T::one())],
        Dim::Two => {
            let w = T::two() * T::PI() / T::from_usize_lossy(ENERGY_CIRCLE_NODES);
            (0..ENERGY_CIRCLE_NODES)
                .map(|k| {
                    let t = w * (T::from_usize_lossy(k) + T::half());
                    ([t.cos(), t.sin()], w)
                })
                .collect()
        }
    }
}

/// Distances `r > 0` at which the ray `x + r w` meets the sphere `|y| = radius`.
fn sphere_crossings<T: Real>(x: Point<T>, w: Point<T>, radius: T) -> Vec<T> {
    let b = dot(x, w);
    let c = dot(x, x) - radius * radius;
    let disc = b * b - c;
    if disc < T::zero() {
        return Vec::new();
    }
    let root = disc.sqrt();
    [-b - root, -b + root].into_iter().filter(|&r| r > T::zero()).collect()
}

/// Ray integrals of difference quotients of a fixed test function.
struct RayKernel<'a, T: Real> {
    u: &'a TestFunction<T>,
    s: T,
    support: T,
    taylor_r: T,
    smooth: bool,
    jumps: Vec<T>,
    integrator: Integrator<T>,
    directions: Vec<(Point<T>, T)>,
    /// Extra breakpoints accumulating at the outer end of each ray, for
    /// integrands concentrated there.
    refine_top: bool,
}

impl<'a, T: Real> RayKernel<'a, T> {
    fn new(u: &'a TestFunction<T>, s: T, inner_rel_tol: T) -> Self {
        let support = u.support_radius();
        RayKernel {
            u,
            s,
            support,
            taylor_r: support * lit(TAYLOR_RADIUS),
            smooth: u.is_smooth(),
            jumps: u.jump_radii(),
            integrator: Integrator::new(T::min_positive_value(), inner_rel_tol).max_evaluations(200_000),
            directions: circle_directions(u.dim()),
            refine_top: false,
        }
    }

    fn jet(&self, x: Point<T>) -> Jet<T> {
        let value = self.u.eval(x);
        if self.smooth {
            Jet { value, grad: self.u.gradient(x), hess: self.u.hessian(x) }
        } else {
            Jet { value, grad: [T::zero(); 2], hess: [[T::zero(); 2]; 2] }
        }
    }

    /// `(u(x + r w) - u(x)) / r`.
    fn quotient(&self, x: Point<T>, jet: &Jet<T>, w: Point<T>, r: T) -> T {
        if self.smooth && r < self.taylor_r {
            return dot(jet.grad, w) + T::half() * r * quad_form(&jet.hess, w);
        }
        if r <= T::zero() {
            return T::zero();
        }
        (self.u.eval([x[0] + r * w[0], x[1] + r * w[1]]) - jet.value) / r
    }

    /// Distance from `x` (inside the support ball) to its boundary along `w`.
    fn exit_distance(&self, x: Point<T>, w: Point<T>) -> T {
        let b = dot(x, w);
        let c = dot(x, x) - self.support * self.support;
        -b + (b * b - c).max(T::zero()).sqrt()
    }

    fn jump_points(&self, x: Point<T>, w: Point<T>, r_hi: T) -> Vec<T> {
        self.jumps
            .iter()
            .flat_map(|&j| sphere_crossings(x, w, j))
            .filter(|&r| r < r_hi)
            .collect()
    }

    /// `(1-s) \int_{r_lo}^{r_hi} phi(|q(r)| r^{1-s}) dr / r` with `q` the
    /// difference quotient, integrated in `v = r^{1-s}` where the measure
    /// becomes `dv / v`.
    fn ray<P>(&self, x: Point<T>, jet: &Jet<T>, w: Point<T>, r_lo: T, r_hi: T, phi: P) -> Result<QuadResult<T>, QuadError<T>>
    where
        P: Fn(T) -> T + Sync,
    {
        if !(r_hi > r_lo) {
            return Ok(QuadResult::zero());
        }
        let oms = T::one() - self.s;
        let to_v = |r: T| if r > T::zero() { (oms * r.ln()).exp() } else { T::zero() };
        let v_lo = to_v(r_lo);
        let ten = lit::<T>(10.0);
        let mut pts: Vec<T> = (0..=RADIAL_DECADES).map(|k| to_v(r_hi / ten.powi(k as i32))).collect();
        pts.extend(self.jump_points(x, w, r_hi).into_iter().map(to_v));
        pts.push(v_lo);
        if self.refine_top {
            let v_hi = to_v(r_hi);
            pts.extend((1..=10).map(|j| v_hi * (T::one() - ten.powi(-j))));
        }
        pts.retain(|&v| v >= v_lo);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        let g = |v: T| {
            if v <= T::zero() {
                return T::zero();
            }
            let r = (v.ln() / oms).exp();
            let q = self.quotient(x, jet, w, r).abs();
            if q == T::zero() {
                return T::zero();
            }
            phi(q * v) / v
        };
        self.integrator.integrate_with_breakpoints(g, &pts)
    }

    /// `(1-s) \int_{S} [\int_{r_floor}^{min(rho, horizon)} A(|D^s u|) dr/r
    ///   + tail_weight (Lambda(|u(x)| rho^{-s}) - Lambda(|u(x)| horizon^{-s})) / s]`
    /// for `x` inside the support ball.
    fn interior_density(
        &self,
        f: &YoungFunction<T>,
        lambda: &YoungFunction<T>,
        x: Point<T>,
        horizon: T,
        tail_weight: T,
        r_floor: T,
    ) -> Extended<T> {
        let jet = self.jet(x);
        let ux = jet.value.abs();
        let oms = T::one() - self.s;
        let phi = |z: T| f.eval(z).to_float();
        let mut total = T::zero();
        for &(w, weight) in &self.directions {
            let rho = self.exit_distance(x, w);
            let inner = match self.ray(x, &jet, w, r_floor, rho.min(horizon), phi) {
                Ok(q) => q.value,
                Err(e) => match e.partial() {
                    Some(p) if p.value.is_finite() => p.value,
                    _ => return Extended::Infinite,
                },
            };
            let mut tail = T::zero();
            if ux > T::zero() && horizon > rho && tail_weight > T::zero() {
                let near = lambda.eval(ux * rho.powf(-self.s));
                let far = if horizon.is_finite() { lambda.eval(ux * horizon.powf(-self.s)) } else { Extended::zero() };
                match (near, far) {
                    (Extended::Finite(a), Extended::Finite(b)) => tail = (a - b).max(T::zero()),
                    _ => return Extended::Infinite,
                }
                tail = tail * oms * tail_weight / self.s;
            }
            total += weight * (inner + tail);
        }
        Extended::from_float(total)
    }

    /// `F_s(x)` for `x` outside the support ball, where `u(x) = 0`.
    fn exterior_density(&self, f: &YoungFunction<T>, x: Point<T>) -> Extended<T> {
        let oms = T::one() - self.s;
        let mut total = T::zero();
        for &(w, weight) in &self.directions {
            let cross = sphere_crossings(x, w, self.support);
            let (r1, r2) = match cross.as_slice() {
                [a, b] => (*a, *b),
                [b] => (T::zero(), *b),
                _ => continue,
            };
            let mut pts = vec![r1, r2];
            pts.extend(self.jump_points(x, w, r2).into_iter().filter(|&r| r > r1));
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let g = |r: T| {
                if r <= T::zero() {
                    return T::zero();
                }
                let v = self.u.eval([x[0] + r * w[0], x[1] + r * w[1]]).abs();
                f.eval(v * r.powf(-self.s)).to_float() / r
            };
            match self.integrator.integrate_with_breakpoints(g, &pts) {
                Ok(q) => total += weight * q.value,
                Err(e) => match e.partial() {
                    Some(p) if p.value.is_finite() => total += weight * p.value,
                    _ => return Extended::Infinite,
                },
            }
        }
        Extended::from_float(total * oms)
    }
}

/// `ln \int_{B(x, delta)} A(|D^s u(x, y)|) |x-y|^{-n} dy`, computed with the
/// integrand scaled by an estimate of its maximum so that the result stays
/// finite when `A` underflows. `-inf` when the integral vanishes.
pub(crate) fn local_log_integral<T: Real>(
    f: &YoungFunction<T>,
    u: &TestFunction<T>,
    s: T,
    delta: T,
    x: Point<T>,
    inner_rel_tol: T,
) -> T {
    let mut kernel = RayKernel::new(u, s, inner_rel_tol);
    kernel.refine_top = true;
    let jet = kernel.jet(x);
    let base = delta.powf(T::one() - s);
    let peak = kernel
        .directions
        .iter()
        .map(|&(w, _)| {
            let q = dot(jet.grad, w).abs().max(kernel.quotient(x, &jet, w, delta).abs());
            f.log_eval(q * base)
        })
        .fold(T::neg_infinity(), T::max);
    if peak == T::neg_infinity() {
        return peak;
    }
    if !peak.is_finite() {
        return T::infinity();
    }
    let phi = |z: T| {
        let l = f.log_eval(z);
        if l == T::neg_infinity() {
            T::zero()
        } else {
            (l - peak).exp()
        }
    };
    let mut total = T::zero();
    for &(w, weight) in &kernel.directions {
        match kernel.ray(x, &jet, w, T::zero(), delta, phi) {
            Ok(q) => total += weight * q.value,
            Err(e) => match e.partial() {
                Some(p) if p.value.is_finite() => total += weight * p.value,
                _ => return T::infinity(),
            },
        }
    }
    if total > T::zero() {
        total.ln() - (T::one() - s).ln() + peak
    } else {
        T::neg_infinity()
    }
}

/// `\int_{B_R} g(x) dx` exploiting radial symmetry when available.
fn integrate_ball<T, G>(u: &TestFunction<T>, g: G, opts: &EnergyOptions<T>) -> Result<QuadResult<T>, QuadError<T>>
where
    T: Real,
    G: Fn(Point<T>) -> T + Sync,
{
    let r_sup = u.support_radius();
    let integrator = Integrator::new(T::min_positive_value(), opts.rel_tol).parallel(opts.parallel);
    let quarter = r_sup * lit(0.25);
    let mut pts: Vec<T> = (0..=4).map(|k| quarter * T::from_usize_lossy(k)).collect();
    pts.extend(u.jump_radii());
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    match (u.dim(), u.is_radial()) {
        (Dim::One, true) => integrator.integrate_with_breakpoints(|x| T::two() * g([x, T::zero()]), &pts),
        (Dim::Two, true) => integrator.integrate_with_breakpoints(|r| T::two() * T::PI() * r * g([r, T::zero()]), &pts),
        (Dim::One, false) => {
            let mut sym: Vec<T> = pts.iter().rev().map(|&p| -p).collect();
            sym.extend(pts.iter().skip(1).copied());
            integrator.integrate_with_breakpoints(|x| g([x, T::zero()]), &sym)
        }
        (Dim::Two, false) => integrate_over_support(u, &g, &integrator),
    }
}

/// Shared driver of `J_s` and `J_delta`: integrates the interior density over
/// the support ball, falling back to a growth certificate on failure.
fn pair_energy<T: Real>(
    f: &YoungFunction<T>,
    u: &TestFunction<T>,
    s: T,
    horizon: T,
    scale: T,
    opts: &EnergyOptions<T>,
) -> EnergyValue<T> {
    if u.is_zero() {
        return EnergyValue::exact_zero();
    }
    let lambda = log_integral(f);
    let kernel = RayKernel::new(u, s, opts.inner_rel_tol);
    let truncated = |r_floor: T| {
        integrate_ball(
            u,
            |x| kernel.interior_density(f, &lambda, x, horizon, T::two(), r_floor).to_float(),
            opts,
        )
    };
    match truncated(T::zero()) {
        Ok(q) => EnergyValue {
            value: Extended::from_float(q.value * scale),
            err_estimate: (q.err_estimate + opts.inner_rel_tol * q.value.abs()) * scale,
            truncation_bound: T::zero(),
            certificate: None,
        },
        Err(_) => {
            let cutoffs: Vec<T> = CERTIFICATE_CUTOFFS.iter().map(|&c| lit::<T>(c) * u.support_radius()).collect();
            let cert = growth_certificate_with_factor(
                |r| match truncated(r) {
                    Ok(q) => q.value * scale,
                    Err(e) => e.partial().map(|p| p.value * scale).unwrap_or(T::infinity()),
                },
                &cutoffs,
                lit(ENERGY_GROWTH_FACTOR),
            );
            EnergyValue {
                value: Extended::Infinite,
                err_estimate: T::infinity(),
                truncation_bound: T::zero(),
                certificate: Some(cert),
            }
        }
    }
}

/// `J_s(u)` with default options.
pub fn eval_js<T: Real>(f: &YoungFunction<T>, u: &TestFunction<T>, s: T) -> Result<EnergyValue<T>, EnergyError> {
    eval_js_with(f, u, s, &EnergyOptions::default())
}

pub fn eval_js_with<T: Real>(
    f: &YoungFunction<T>,
    u: &TestFunction<T>,
    s: T,
    opts: &EnergyOptions<T>,
) -> Result<EnergyValue<T>, EnergyError> {
    check_order(s)?;
    Ok(pair_energy(f, u, s, T::infinity(), T::one(), opts))
}

/// `J_delta(u) = \iint_{|x-y| < delta} A(|D^s u|) |x-y|^{-n} dx dy`, without the
/// `(1-s)` prefactor.
pub fn eval_jdelta<T: Real>(
    f: &YoungFunction<T>,
    u: &TestFunction<T>,
    s: T,
    delta: T,
) -> Result<EnergyValue<T>, EnergyError> {
    eval_jdelta_with(f, u, s, delta, &EnergyOptions::default())
}

pub fn eval_jdelta_with<T: Real>(
    f: &YoungFunction<T>,
    u: &TestFunction<T>,
    s: T,
    delta: T,
    opts: &EnergyOptions<T>,
) -> Result<EnergyValue<T>, EnergyError> {
    check_order(s)?;
    if !(delta > T::zero()) {
        return Err(EnergyError::InvalidHorizon(delta.to_f64_lossy()));
    }
    Ok(pair_energy(f, u, s, delta, (T::one() - s).recip(), opts))
}

/// Pointwise density `F_s(x) = (1-s) \int A(|D^s u(x, y)|) |x-y|^{-n} dy`.
pub fn eval_fs<T: Real>(f: &YoungFunction<T>, u: &TestFunction<T>, s: T, x: Point<T>) -> Result<Extended<T>, EnergyError> {
    eval_fs_with(f, u, s, x, &EnergyOptions::default())
}

pub fn eval_fs_with<T: Real>(
    f: &YoungFunction<T>,
    u: &TestFunction<T>,
    s: T,
    x: Point<T>,
    opts: &EnergyOptions<T>,
) -> Result<Extended<T>, EnergyError> {
    check_order(s)?;
    if u.is_zero() {
        return Ok(Extended::zero());
    }
    let kernel = RayKernel::new(u, s, opts.inner_rel_tol);
    if norm(x, u.dim()) < u.support_radius() {
        Ok(kernel.interior_density(f, &log_integral(f), x, T::infinity(), T::one(), T::zero()))
    } else {
        Ok(kernel.exterior_density(f, x))
    }
}

/// `J(u) = \int A_0(|grad u|) dx` to relative tolerance `1e-10`.
pub fn eval_j<T: Real>(f: &YoungFunction<T>, u: &TestFunction<T>) -> Extended<T> {
    eval_j_with_a0(&compute_a0(f, u.dim()), u)
}

/// [`eval_j`] with a precomputed limit function `A_0`.
pub fn eval_j_with_a0<T: Real>(a0: &YoungFunction<T>, u: &TestFunction<T>) -> Extended<T> {
    if u.is_zero() {
        return Extended::zero();
    }
    let integrator = Integrator::new(T::min_positive_value(), lit(1e-10)).parallel(true);
    let g = |x: Point<T>| a0.eval(norm(u.gradient(x), Dim::Two)).to_float();
    match integrate_over_support(u, &g, &integrator) {
        Ok(q) => Extended::from_float(q.value),
        Err(e) => match e.partial() {
            Some(p) if p.value.is_finite() => Extended::Finite(p.value),
            _ => Extended::Infinite,
        },
    }
}

/// `|energy - reference| / max(reference, 1e-30)`, infinite for divergent energies.
pub fn relative_error<T: Real>(energy: Extended<T>, reference: T) -> T {
    match energy {
        Extended::Finite(e) => (e - reference).abs() / reference.abs().max(lit(REL_ERROR_FLOOR)),
        Extended::Infinite => T::infinity(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    /// `s`, `delta` or the sequence index, depending on the sweep.
    pub param: T,
    pub energy: EnergyValue<T>,
    pub reference: T,
    pub rel_error: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable<T> {
    pub young: String,
    pub function: String,
    pub dim: usize,
    pub rel_tol: T,
    pub rows: Vec<SweepRow<T>>,
}

/// Formats a float with 17 significant digits.
pub fn format_float<T: Real>(x: T) -> String {
    let v = x.to_f64_lossy();
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl<T: Real> SweepTable<T> {
    pub fn new(young: String, function: String, dim: Dim, rel_tol: T) -> Self {
        SweepTable { young, function, dim: dim.as_usize(), rel_tol, rows: Vec::new() }
    }

    pub fn push(&mut self, param: T, energy: EnergyValue<T>, reference: T) {
        let rel_error = relative_error(energy.value, reference);
        self.rows.push(SweepRow { param, energy, reference, rel_error });
    }

    pub const CSV_HEADER: &'static str = "param,energy,err_estimate,reference,rel_error";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                format_float(row.param),
                format_float(row.energy.value.to_float()),
                format_float(row.energy.err_estimate),
                format_float(row.reference),
                format_float(row.rel_error)
            ));
        }
        out
    }

    pub fn params_strictly_monotone(&self) -> bool {
        let p: Vec<T> = self.rows.iter().map(|r| r.param).collect();
        p.windows(2).all(|w| w[0] < w[1]) || p.windows(2).all(|w| w[0] > w[1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Informative,
    Ambiguous,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Pass, Verdict::Pass) => Verdict::Pass,
            (Verdict::Ambiguous, _) | (_, Verdict::Ambiguous) => Verdict::Ambiguous,
            _ => Verdict::Informative,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SweepVerdict {
    Convergent,
    NotConvergent,
    /// Some energy is infinite.
    Divergent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport<T> {
    pub table: SweepTable<T>,
    pub verdict: SweepVerdict,
}

/// Default orders approaching one.
pub fn default_s_list<T: Real>() -> Vec<T> {
    [0.5, 0.9, 0.99, 0.999, 0.9999].iter().map(|&s| lit(s)).collect()
}

fn check_increasing<T: Real>(list: &[T]) -> Result<(), EnergyError> {
    if list.is_empty() || list.windows(2).any(|w| !(w[0] < w[1])) {
        Err(EnergyError::InvalidParameterList)
    } else {
        Ok(())
    }
}

/// Rows `(s, J_s(u), J(u), rel_error)`; convergent when the relative error
/// strictly decreases (or is already at rounding level) and ends below 5%.
pub fn s_sweep<T: Real>(
    f: &YoungFunction<T>,
    u: &TestFunction<T>,
    s_list: &[T],
    opts: &EnergyOptions<T>,
) -> Result<SweepReport<T>, EnergyError> {
    check_increasing(s_list)?;
    for &s in s_list {
        check_order(s)?;
    }
    let reference = eval_j(f, u).to_float();
    let mut table = SweepTable::new(f.label(), u.label(), u.dim(), opts.rel_tol);
    for &s in s_list {
        table.push(s, eval_js_with(f, u, s, opts)?, reference);
    }
    let verdict = sweep_verdict(&table);
    Ok(SweepReport { table, verdict })
}

fn sweep_verdict<T: Real>(table: &SweepTable<T>) -> SweepVerdict {
    if table.rows.iter().any(|r| r.energy.value.is_infinite()) {
        return SweepVerdict::Divergent;
    }
    let errs: Vec<T> = table.rows.iter().map(|r| r.rel_error).collect();
    let exact = lit::<T>(EXACT_LEVEL);
    let decreasing = errs.windows(2).all(|w| w[1] < w[0] || w[1] <= exact);
    let last_ok = errs.last().map_or(false, |&e| e < lit(CONVERGENCE_THRESHOLD));
    if decreasing && last_ok {
        SweepVerdict::Convergent
    } else {
        SweepVerdict::NotConvergent
    }
}

/// Approximating sequences `u_k -> u` for the liminf inequality.
#[derive(Clone, Debug)]
pub enum SequenceSpec<T> {
    /// `u_k = u * rho_{1/k}`.
    Mollified,
    /// `u_k = u + v / k`.
    Perturbed(TestFunction<T>),
}

impl<T: Real> SequenceSpec<T> {
    pub fn label(&self) -> String {
        match self {
            SequenceSpec::Mollified => "mollified".into(),
            SequenceSpec::Perturbed(v) => format!("perturbed({})", v.label()),
        }
    }

    pub fn term(&self, u: &TestFunction<T>, k: usize) -> TestFunction<T> {
        let inv_k = T::from_usize_lossy(k).recip();
        match self {
            SequenceSpec::Mollified if u.is_zero() => u.clone(),
            SequenceSpec::Mollified => mollify(u, inv_k),
            SequenceSpec::Perturbed(v) => u.clone().plus(v.clone().scaled(inv_k)),
        }
    }
}

/// `s_k = 1 - 2^{-k}`.
pub fn liminf_order<T: Real>(k: usize) -> T {
    T::one() - T::two().powi(-(k as i32))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiminfReport<T> {
    pub sequence: String,
    /// Rows `(k, J_{s_k}(u_k), J(u))`.
    pub table: SweepTable<T>,
    /// `J_{s_k}(u)` per row, for comparison with the regularized terms.
    pub unperturbed: Vec<Extended<T>>,
    /// Whether `J_{s_k}(u_k) <= J_{s_k}(u) (1 + 1e-4)` on every row; only
    /// meaningful for mollified sequences.
    pub regularization_monotone: bool,
    pub verdict: Verdict,
}

/// Evaluates `J_{s_k}(u_k)` for `k = 1..=terms` and passes when the minimum
/// over the last third of the rows is at least `J(u) (1 - 1e-2)`.
pub fn liminf_experiment<T: Real>(
    f: &YoungFunction<T>,
    u: &TestFunction<T>,
    spec: &SequenceSpec<T>,
    terms: usize,
    opts: &EnergyOptions<T>,
) -> Result<LiminfReport<T>, EnergyError> {
    if terms == 0 || terms > MAX_LIMINF_TERMS {
        return Err(EnergyError::InvalidTermCount(terms));
    }
    if let SequenceSpec::Perturbed(v) = spec {
        if v.dim() != u.dim() {
            return Err(EnergyError::DimensionMismatch);
        }
    }
    let reference = eval_j(f, u).to_float();
    let mut table = SweepTable::new(f.label(), u.label(), u.dim(), opts.rel_tol);
    let mut unperturbed = Vec::with_capacity(terms);
    let mut monotone = true;
    for k in 1..=terms {
        let s = liminf_order::<T>(k);
        let uk = spec.term(u, k);
        let e = eval_js_with(f, &uk, s, opts)?;
        let base = eval_js_with(f, u, s, opts)?.value;
        if e.value > base * (T::one() + lit(1e-4)) {
            monotone = false;
        }
        unperturbed.push(base);
        table.push(T::from_usize_lossy(k), e, reference);
    }
    let tail = (terms + 2) / 3;
    let floor = reference * (T::one() - lit(LIMINF_SLACK));
    let min_tail = table.rows[terms - tail..].iter().map(|r| r.energy.value).fold(Extended::Infinite, |a, b| {
        if b < a {
            b
        } else {
            a
        }
    });
    let verdict = Verdict::from_bool(min_tail >= Extended::Finite(floor));
    Ok(LiminfReport { sequence: spec.label(), table, unperturbed, regularization_monotone: monotone, verdict })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaReport<T> {
    pub liminf: Vec<LiminfReport<T>>,
    /// `|J_{s_max}(u) - J(u)| / J(u)` along the constant sequence.
    pub limsup_rel_error: T,
    pub limsup_verdict: Verdict,
    pub verdict: Verdict,
}

/// Liminf experiments over several sequences plus the constant-sequence
/// limsup check at the largest order in `s_list`.
pub fn gamma_report<T: Real>(
    f: &YoungFunction<T>,
    u: &TestFunction<T>,
    s_list: &[T],
    specs: &[SequenceSpec<T>],
    terms: usize,
    opts: &EnergyOptions<T>,
) -> Result<GammaReport<T>, EnergyError> {
    check_increasing(s_list)?;
    let liminf = specs
        .iter()
        .map(|spec| liminf_experiment(f, u, spec, terms, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let s_max = *s_list.last().expect("nonempty");
    let reference = eval_j(f, u).to_float();
    let e = eval_js_with(f, u, s_max, opts)?;
    let limsup_rel_error = if u.is_zero() { T::zero() } else { relative_error(e.value, reference) };
    let limsup_verdict = Verdict::from_bool(limsup_rel_error < lit(CONVERGENCE_THRESHOLD));
    let verdict = liminf.iter().fold(limsup_verdict, |acc, r| acc.and(r.verdict));
    Ok(GammaReport { liminf, limsup_rel_error, limsup_verdict, verdict })
}

/// Sup norms of `u` and `|grad u|`, sampled finely along a ray for radial
/// functions and on the `C^2` grid otherwise.
pub fn sup_norms<T: Real>(u: &TestFunction<T>) -> (T, T) {
    let r_sup = u.support_radius();
    let pts: Vec<Point<T>> = if u.is_radial() {
        let n = 10_000;
        (0..=n).map(|i| [r_sup * T::from_usize_lossy(i) / T::from_usize_lossy(n), T::zero()]).collect()
    } else {
        crate::functions::sample_points(u.dim(), r_sup, false)
    };
    pts.iter().fold((T::zero(), T::zero()), |(a, b), &x| {
        (a.max(u.eval(x).abs()), b.max(norm(u.gradient(x), Dim::Two)))
    })
}

/// `10 (1 + ||u||_{C^2}) a(2 ||u||_{C^2} (2R)^{1-s} + 1)`.
pub fn error_bound_constant<T: Real>(f: &YoungFunction<T>, u: &TestFunction<T>, s: T) -> T {
    let c2 = u.c2_norm();
    let arg = T::two() * c2 * (T::two() * u.support_radius()).powf(T::one() - s) + T::one();
    lit::<T>(10.0) * (T::one() + c2) * f.density(arg).to_float()
}

/// `C |x-y|^{2-s} - |A(|D^s u(x,y)|) - A(|grad u(x) . (x-y)| / |x-y|^s)|`.
pub fn error_bound_margin<T: Real>(f: &YoungFunction<T>, u: &TestFunction<T>, s: T, c: T, x: Point<T>, y: Point<T>) -> T {
    let h = [x[0] - y[0], x[1] - y[1]];
    let d = norm(h, u.dim());
    assert!(d > T::zero(), "points must differ");
    let ds = d.powf(s);
    let exact = f.eval((u.eval(x) - u.eval(y)).abs() / ds).to_float();
    let linear = f.eval(dot(u.gradient(x), h).abs() / ds).to_float();
    c * d.powf(T::two() - s) - (exact - linear).abs()
}

/// Single-pair margin with the calibrated constant.
pub fn error_bound_check<T: Real>(f: &YoungFunction<T>, u: &TestFunction<T>, s: T, x: Point<T>, y: Point<T>) -> T {
    error_bound_margin(f, u, s, error_bound_constant(f, u, s), x, y)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundReport<T> {
    pub constant: T,
    /// Whether the constant had to be multiplied by ten.
    pub bumped: bool,
    pub min_margin: T,
    pub verdict: Verdict,
}

/// Margins over many pairs; on a violation the constant is bumped by ten
/// once before the check fails.
pub fn error_bound_sweep<T: Real>(
    f: &YoungFunction<T>,
    u: &TestFunction<T>,
    s: T,
    pairs: &[(Point<T>, Point<T>)],
) -> ErrorBoundReport<T> {
    let base = error_bound_constant(f, u, s);
    let min_margin = |c: T| {
        pairs
            .iter()
            .map(|&(x, y)| error_bound_margin(f, u, s, c, x, y))
            .fold(T::infinity(), T::min)
    };
    let m = min_margin(base);
    if m >= T::zero() {
        return ErrorBoundReport { constant: base, bumped: false, min_margin: m, verdict: Verdict::Pass };
    }
    let bumped = base * lit(10.0);
    let m = min_margin(bumped);
    ErrorBoundReport { constant: bumped, bumped: true, min_margin: m, verdict: Verdict::from_bool(m >= T::zero()) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MajorantBranch {
    /// `|x| < 2R`: `n w_n A(||grad u||) + (1-s)/s n w_n A(2 ||u||)`.
    Near,
    /// `|x| >= 2R`: `2^s |x|^{-n-1/2} \int A(2^s |u|)`.
    Far,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorantCheck<T> {
    pub branch: MajorantBranch,
    pub bound: T,
    pub density: Extended<T>,
    /// `bound - F_s(x)`.
    pub margin: T,
}

impl<T: Real> MajorantCheck<T> {
    /// `margin >= -slack * bound`.
    pub fn holds(&self, slack: T) -> bool {
        self.margin >= -slack * self.bound
    }
}

/// Compares `F_s(x)` with the integrable majorant used for dominated convergence.
pub fn majorant_check<T: Real>(f: &YoungFunction<T>, u: &TestFunction<T>, s: T, x: Point<T>) -> Result<MajorantCheck<T>, EnergyError> {
    check_order(s)?;
    let dim = u.dim();
    let r = norm(x, dim);
    let n_omega: T = dim.sphere_measure();
    let (branch, bound) = if r < T::two() * u.support_radius() {
        let (sup_u, sup_grad) = sup_norms(u);
        let near = n_omega * f.eval(sup_grad).to_float();
        let far = (T::one() - s) / s * n_omega * f.eval(T::two() * sup_u).to_float();
        (MajorantBranch::Near, near + far)
    } else {
        let two_s = T::two().powf(s);
        let integrator = Integrator::new(T::min_positive_value(), lit(1e-12));
        let mass = u
            .integrate_abs(&|v| f.eval(two_s * v).to_float(), &integrator)
            .map(|q| q.value)
            .unwrap_or(T::infinity());
        let exponent = T::from_usize_lossy(dim.as_usize()) + T::half();
        (MajorantBranch::Far, two_s * r.powf(-exponent) * mass)
    };
    let density = eval_fs(f, u, s, x)?;
    let margin = bound - density.to_float();
    Ok(MajorantCheck { branch, bound, density, margin })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_square() -> YoungFunction<f64> {
        YoungFunction::power(2.0).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn zero_function_has_zero_energy() {
        let z = TestFunction::<f64>::zero(Dim::One);
        assert_eq!(eval_js(&half_square(), &z, 0.5).unwrap().value, Extended::zero());
        assert_eq!(eval_fs(&half_square(), &z, 0.5, [0.3, 0.0]).unwrap(), Extended::zero());
        assert_eq!(eval_j(&half_square(), &z), Extended::zero());
    }

    #[test]
    fn order_is_validated() {
        let u = TestFunction::<f64>::bump(1.0, Dim::One);
        assert!(eval_js(&half_square(), &u, 0.99995).is_err());
        assert!(eval_js(&half_square(), &u, 0.0).is_err());
        assert!(eval_js(&half_square(), &u, MAX_S).is_ok());
    }

    #[test]
    fn energy_is_homogeneous_for_powers() {
        let f = half_square();
        let u = TestFunction::<f64>::bump(1.0, Dim::One);
        let e1 = eval_js(&f, &u, 0.5).unwrap().finite().unwrap();
        let e2 = eval_js(&f, &u.clone().scaled(2.0), 0.5).unwrap().finite().unwrap();
        assert!(rel(e2, 4.0 * e1) < 1e-6);
    }

    #[test]
    fn limit_energy_of_bump() {
        let u = TestFunction::<f64>::bump(1.0, Dim::One);
        let j = eval_j(&half_square(), &u).finite().unwrap();
        let n = 400_000;
        let h = 2.0 / n as f64;
        let direct: f64 = (0..n)
            .map(|i| {
                let x = -1.0 + (i as f64 + 0.5) * h;
                0.5 * u.gradient([x, 0.0])[0].powi(2)
            })
            .sum::<f64>()
            * h;
        assert!(rel(j, direct) < 1e-8, "{j} vs {direct}");
    }

    #[test]
    fn density_integrates_to_energy() {
        let f = half_square();
        let u = TestFunction::<f64>::bump(1.0, Dim::One);
        let s = 0.6;
        let e = eval_js(&f, &u, s).unwrap().finite().unwrap();
        let integrator = Integrator::new(1e-14, 1e-8);
        let inside = integrator
            .integrate(|x| eval_fs(&f, &u, s, [x, 0.0]).unwrap().to_float(), -1.0, 1.0)
            .unwrap()
            .value;
        // Exterior part in t = 1/x, doubled for x < -1.
        let outside = integrator
            .integrate(|t| if t <= 0.0 { 0.0 } else { eval_fs(&f, &u, s, [1.0 / t, 0.0]).unwrap().to_float() / (t * t) }, 0.0, 1.0)
            .unwrap()
            .value;
        assert!(rel(inside + 2.0 * outside, e) < 1e-6, "{} vs {e}", inside + 2.0 * outside);
    }

    #[test]
    fn huge_horizon_recovers_full_energy() {
        let f = half_square();
        let u = TestFunction::<f64>::bump(1.0, Dim::One);
        let s = 0.5;
        let js = eval_js(&f, &u, s).unwrap().finite().unwrap();
        let jd = eval_jdelta(&f, &u, s, 1e12).unwrap().finite().unwrap();
        assert!(rel(jd, js / (1.0 - s)) < 1e-5);
        let small = eval_jdelta(&f, &u, s, 0.1).unwrap().finite().unwrap();
        let medium = eval_jdelta(&f, &u, s, 0.5).unwrap().finite().unwrap();
        assert!(small <= medium && medium <= jd);
    }

    #[test]
    fn csv_layout() {
        let mut t = SweepTable::<f64>::new("a".into(), "u".into(), Dim::One, 1e-8);
        t.push(0.5, EnergyValue::exact_zero(), 0.0);
        let csv = t.to_csv();
        assert!(csv.starts_with("param,energy,err_estimate,reference,rel_error\n"));
        assert!(csv.contains("5.0000000000000000e-1,0.0000000000000000e0"));
    }
}
