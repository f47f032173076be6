//! Compactly supported test functions in dimension one or two, the standard
//! mollifier, and the scalar-field abstraction the norm and energy routines
//! integrate against.

use std::sync::Arc;

use thiserror::Error;

use crate::quadrature::{Dim, Integrator, Point, QuadError, QuadResult};
use crate::real::{lit, Real};

/// Grid spacing of the sup-norm sampling behind [`TestFunction::c2_norm`].
pub const C2_GRID_SPACING: f64 = 1e-2;

/// Equispaced angular nodes of the polar convolution rule in the plane.
pub const CONVOLUTION_ANGLES: usize = 128;

/// Symmetric 2x2 Hessian; unused entries are zero for `n = 1`.
pub type Hessian<T> = [[T; 2]; 2];

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FunctionError {
    #[error("unknown test function label `{0}`")]
    UnknownLabel(String),
    #[error("invalid parameter in `{0}`")]
    InvalidParameter(String),
}

/// Anything that can be integrated over its (compact) support.
pub trait ScalarField<T: Real>: Sync {
    fn dim(&self) -> Dim;
    fn eval(&self, x: Point<T>) -> T;
    /// Radius of a ball centered at the origin containing the support.
    fn support_radius(&self) -> T;
    fn label(&self) -> String;

    fn is_radial(&self) -> bool {
        false
    }

    /// Radii across which the field jumps.
    fn jump_radii(&self) -> Vec<T> {
        Vec::new()
    }

    /// `\int phi(|u(x)|) dx` over the support.
    fn integrate_abs(&self, phi: &(dyn Fn(T) -> T + Sync), integrator: &Integrator<T>) -> Result<QuadResult<T>, QuadError<T>> {
        integrate_over_support(self, &|x| phi(self.eval(x).abs()), integrator)
    }

    /// `max |u|` sampled on the documented grid.
    fn sup_abs(&self) -> T {
        sample_points(self.dim(), self.support_radius(), self.is_radial())
            .into_iter()
            .map(|x| self.eval(x).abs())
            .fold(T::zero(), T::max)
    }
}

/// `\int g(x) dx` over the support ball of `field`.
///
/// Radial fields in the plane use polar coordinates; otherwise the bounding box
/// is integrated with nested adaptive rules.
pub fn integrate_over_support<T, F>(
    field: &F,
    g: &(dyn Fn(Point<T>) -> T + Sync),
    integrator: &Integrator<T>,
) -> Result<QuadResult<T>, QuadError<T>>
where
    T: Real,
    F: ScalarField<T> + ?Sized,
{
    let r_sup = field.support_radius();
    let jumps = field.jump_radii();
    match field.dim() {
        Dim::One => {
            let mut pts = vec![-r_sup, r_sup];
            for j in &jumps {
                pts.push(-*j);
                pts.push(*j);
            }
            pts.push(T::zero());
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup();
            integrator.integrate_with_breakpoints(|x| g([x, T::zero()]), &pts)
        }
        Dim::Two if field.is_radial() => {
            let mut pts = vec![T::zero(), r_sup];
            pts.extend(jumps.iter().copied());
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup();
            integrator.integrate_with_breakpoints(|r| T::two() * T::PI() * r * g([r, T::zero()]), &pts)
        }
        Dim::Two => {
            let inner_integrator = Integrator::new(integrator.abs_tol / (T::two() * r_sup), integrator.rel_tol);
            let outer = |x: T| {
                let half = (r_sup * r_sup - x * x).max(T::zero()).sqrt();
                if half <= T::zero() {
                    return T::zero();
                }
                match inner_integrator.integrate(|y| g([x, y]), -half, half) {
                    Ok(res) => res.value,
                    Err(e) => e.partial().map(|p| p.value).unwrap_or(T::nan()),
                }
            };
            integrator.integrate_with_breakpoints(outer, &[-r_sup, T::zero(), r_sup])
        }
    }
}

/// Grid with spacing [`C2_GRID_SPACING`] covering the support; for radial
/// fields only the positive first axis is sampled.
pub fn sample_points<T: Real>(dim: Dim, r_sup: T, radial: bool) -> Vec<Point<T>> {
    let h = T::lit(C2_GRID_SPACING);
    let steps = (r_sup / h).ceil().to_usize().unwrap_or(0);
    let axis: Vec<T> = (0..=steps).map(|i| (h * T::from_usize_lossy(i)).min(r_sup)).collect();
    match (dim, radial) {
        (_, true) => axis.into_iter().map(|x| [x, T::zero()]).collect(),
        (Dim::One, false) => axis.iter().flat_map(|&x| [[x, T::zero()], [-x, T::zero()]]).collect(),
        (Dim::Two, false) => {
            let full: Vec<T> = axis.iter().rev().map(|&x| -x).chain(axis.iter().skip(1).copied()).collect();
            full.iter()
                .flat_map(|&x| full.iter().map(move |&y| [x, y]))
                .filter(|p| p[0] * p[0] + p[1] * p[1] <= r_sup * r_sup)
                .collect()
        }
    }
}

/// Radial profiles `h(r)` of the catalog, normalized to support radius `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadialKind {
    /// `exp(-1 / (1 - (r/R)^2))`.
    Bump,
    /// `1` on `r <= R/2`, smoothly cut off to `0` at `R`.
    Plateau,
    /// Tent `~ (1 - r/R)` with `C^2`-rounded apex and foot, peak value 1.
    Tent,
    /// Indicator of `r < R/2`.
    Step,
}

impl RadialKind {
    fn name(self) -> &'static str {
        match self {
            RadialKind::Bump => "bump",
            RadialKind::Plateau => "plateau",
            RadialKind::Tent => "tent",
            RadialKind::Step => "step",
        }
    }

    /// `(h, h', h'')` at radius `r >= 0`.
    pub fn profile<T: Real>(self, r: T, radius: T) -> (T, T, T) {
        let zero = (T::zero(), T::zero(), T::zero());
        if r >= radius {
            return zero;
        }
        match self {
            RadialKind::Bump => {
                let r2 = radius * radius;
                let one_minus_q = T::one() - r * r / r2;
                let h = (-one_minus_q.recip()).exp();
                if h == T::zero() {
                    return zero;
                }
                let g1 = -T::two() * r / (r2 * one_minus_q * one_minus_q);
                let g2 = -T::two() / (r2 * one_minus_q * one_minus_q)
                    - lit::<T>(8.0) * r * r / (r2 * r2 * one_minus_q.powi(3));
                (h, h * g1, h * (g1 * g1 + g2))
            }
            RadialKind::Plateau => {
                let z = T::two() - T::two() * r / radius;
                let (s, s1, s2) = smooth_step(z);
                let dz = -T::two() / radius;
                (s, s1 * dz, s2 * dz * dz)
            }
            RadialKind::Tent => {
                let eta = radius * lit(0.25);
                let w = radius * lit(0.25);
                let r0 = (radius * radius + eta * eta).sqrt() - eta;
                let norm = r0 - w * T::half();
                let root = (r * r + eta * eta).sqrt();
                let z = r0 - (root - eta);
                let z1 = -r / root;
                let z2 = -eta * eta / root.powi(3);
                let (p, p1, p2) = cubic_ramp(z / w);
                let psi = w * p;
                let psi1 = p1;
                let psi2 = p2 / w;
                (psi / norm, psi1 * z1 / norm, (psi2 * z1 * z1 + psi1 * z2) / norm)
            }
            RadialKind::Step => {
                if r < radius * T::half() {
                    (T::one(), T::zero(), T::zero())
                } else {
                    zero
                }
            }
        }
    }
}

/// `(P, P', P'')` of the `C^2` ramp `0` (t <= 0), `t^3 - t^4/2` (0..1), `t - 1/2` (t >= 1).
fn cubic_ramp<T: Real>(t: T) -> (T, T, T) {
    if t <= T::zero() {
        (T::zero(), T::zero(), T::zero())
    } else if t >= T::one() {
        (t - T::half(), T::one(), T::zero())
    } else {
        let t2 = t * t;
        (t2 * t - t2 * t2 * T::half(), lit::<T>(3.0) * t2 - T::two() * t2 * t, lit::<T>(6.0) * (t - t2))
    }
}

/// `(f, f', f'')` of `f(z) = exp(-1/z)` for `z > 0`, zero otherwise.
fn flat_exp<T: Real>(z: T) -> (T, T, T) {
    if z <= T::zero() {
        return (T::zero(), T::zero(), T::zero());
    }
    let f = (-z.recip()).exp();
    let z2 = z * z;
    (f, f / z2, f * (T::one() / (z2 * z2) - T::two() / (z2 * z)))
}

/// `(S, S', S'')` of `S(z) = f(z) / (f(z) + f(1 - z))`.
fn smooth_step<T: Real>(z: T) -> (T, T, T) {
    if z <= T::zero() {
        return (T::zero(), T::zero(), T::zero());
    }
    if z >= T::one() {
        return (T::one(), T::zero(), T::zero());
    }
    let (f, f1, f2) = flat_exp(z);
    let (g, g1, g2) = flat_exp(T::one() - z);
    let sum = f + g;
    let n = f1 * g + f * g1;
    let dn = f2 * g - f * g2;
    let s1 = n / (sum * sum);
    let s2 = dn / (sum * sum) - T::two() * n * (f1 - g1) / (sum * sum * sum);
    (f / sum, s1, s2)
}

/// Standard mollifier `rho_eps(x) = eps^{-n} rho(x / eps)` with `rho` the unit-mass bump on `B_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mollifier<T> {
    pub eps: T,
    pub dim: Dim,
    /// `\int_{B_1} exp(-1 / (1 - |x|^2)) dx`.
    pub normalization: T,
}

impl<T: Real> Mollifier<T> {
    pub fn new(eps: T, dim: Dim) -> Self {
        assert!(eps > T::zero(), "mollifier radius must be positive");
        let integrator = Integrator::new(lit(1e-16), lit(1e-14));
        let normalization = match dim {
            Dim::One => integrator
                .integrate(|x| RadialKind::Bump.profile(x.abs(), T::one()).0, -T::one(), T::one()),
            Dim::Two => integrator.integrate(
                |r| T::two() * T::PI() * r * RadialKind::Bump.profile(r, T::one()).0,
                T::zero(),
                T::one(),
            ),
        }
        .expect("mollifier normalization converges")
        .value;
        Mollifier { eps, dim, normalization }
    }

    /// `rho_eps` as a test function: a scaled bump of radius `eps`.
    pub fn as_function(&self) -> TestFunction<T> {
        let scale = self.eps.powi(-(self.dim.as_usize() as i32)) / self.normalization;
        TestFunction::radial(RadialKind::Bump, self.eps, self.dim).scaled(scale)
    }

    /// `(rho_eps, grad rho_eps, hess rho_eps)` at `y`.
    fn jet(&self, y: Point<T>) -> (T, Point<T>, Hessian<T>) {
        let f = self.as_function();
        (f.eval(y), f.gradient(y), f.hessian(y))
    }
}

/// Compactly supported `C^2` function (or a step, for divergence experiments)
/// with exact gradient and Hessian.
#[derive(Clone, Debug)]
pub enum TestFunction<T> {
    Zero { dim: Dim },
    Radial { kind: RadialKind, radius: T, dim: Dim },
    Scaled { factor: T, inner: Arc<TestFunction<T>> },
    Sum(Arc<TestFunction<T>>, Arc<TestFunction<T>>),
    Mollified { inner: Arc<TestFunction<T>>, mollifier: Mollifier<T> },
}

impl<T: Real> TestFunction<T> {
    pub fn zero(dim: Dim) -> Self {
        TestFunction::Zero { dim }
    }

    pub fn radial(kind: RadialKind, radius: T, dim: Dim) -> Self {
        assert!(radius > T::zero(), "support radius must be positive");
        TestFunction::Radial { kind, radius, dim }
    }

    pub fn bump(radius: T, dim: Dim) -> Self {
        Self::radial(RadialKind::Bump, radius, dim)
    }

    pub fn plateau(radius: T, dim: Dim) -> Self {
        Self::radial(RadialKind::Plateau, radius, dim)
    }

    pub fn tent(radius: T, dim: Dim) -> Self {
        Self::radial(RadialKind::Tent, radius, dim)
    }

    pub fn step(radius: T, dim: Dim) -> Self {
        Self::radial(RadialKind::Step, radius, dim)
    }

    pub fn scaled(self, factor: T) -> Self {
        TestFunction::Scaled { factor, inner: Arc::new(self) }
    }

    pub fn plus(self, other: TestFunction<T>) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        TestFunction::Sum(Arc::new(self), Arc::new(other))
    }

    /// Parses `bump:R`, `plateau:R`, `tent:R`, `step:R` or `zero`, optionally
    /// prefixed by an amplitude as in `0.5*bump:1.0`.
    pub fn parse(label: &str, dim: Dim) -> Result<Self, FunctionError> {
        let label = label.trim();
        if let Some((amp, rest)) = label.split_once('*') {
            let a: f64 = amp.trim().parse().map_err(|_| FunctionError::InvalidParameter(label.into()))?;
            return Ok(Self::parse(rest, dim)?.scaled(T::lit(a)));
        }
        if label == "zero" {
            return Ok(Self::zero(dim));
        }
        let (name, arg) = label.split_once(':').ok_or_else(|| FunctionError::UnknownLabel(label.into()))?;
        let radius: f64 = arg.trim().parse().map_err(|_| FunctionError::InvalidParameter(label.into()))?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(FunctionError::InvalidParameter(label.into()));
        }
        let kind = match name.trim() {
            "bump" => RadialKind::Bump,
            "plateau" => RadialKind::Plateau,
            "tent" => RadialKind::Tent,
            "step" => RadialKind::Step,
            _ => return Err(FunctionError::UnknownLabel(label.into())),
        };
        Ok(Self::radial(kind, T::lit(radius), dim))
    }

    pub fn catalog_labels() -> &'static [&'static str] {
        &["bump:<R>", "plateau:<R>", "tent:<R>", "step:<R>", "zero", "<amplitude>*<label>"]
    }

    /// Whether the function is `C^2` (everything but steps).
    pub fn is_smooth(&self) -> bool {
        match self {
            TestFunction::Zero { .. } => true,
            TestFunction::Radial { kind, .. } => *kind != RadialKind::Step,
            TestFunction::Scaled { inner, .. } => inner.is_smooth(),
            TestFunction::Sum(a, b) => a.is_smooth() && b.is_smooth(),
            TestFunction::Mollified { .. } => true,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TestFunction::Zero { .. } => true,
            TestFunction::Scaled { factor, inner } => *factor == T::zero() || inner.is_zero(),
            TestFunction::Sum(a, b) => a.is_zero() && b.is_zero(),
            TestFunction::Mollified { inner, .. } => inner.is_zero(),
            TestFunction::Radial { .. } => false,
        }
    }

    pub fn gradient(&self, x: Point<T>) -> Point<T> {
        match self {
            TestFunction::Zero { .. } => [T::zero(); 2],
            TestFunction::Radial { kind, radius, dim } => {
                let r = norm(x, *dim);
                if r <= T::zero() || r >= *radius {
                    return [T::zero(); 2];
                }
                let (_, h1, _) = kind.profile(r, *radius);
                match dim {
                    Dim::One => [h1 * x[0].signum(), T::zero()],
                    Dim::Two => [h1 * x[0] / r, h1 * x[1] / r],
                }
            }
            TestFunction::Scaled { factor, inner } => {
                let g = inner.gradient(x);
                [*factor * g[0], *factor * g[1]]
            }
            TestFunction::Sum(a, b) => {
                let (ga, gb) = (a.gradient(x), b.gradient(x));
                [ga[0] + gb[0], ga[1] + gb[1]]
            }
            TestFunction::Mollified { inner, mollifier } => {
                let (_, g, _) = convolve(&|y| inner.eval(y), mollifier, x, JetPart::Gradient);
                g
            }
        }
    }

    pub fn hessian(&self, x: Point<T>) -> Hessian<T> {
        let z = [[T::zero(); 2]; 2];
        match self {
            TestFunction::Zero { .. } => z,
            TestFunction::Radial { kind, radius, dim } => {
                let r = norm(x, *dim);
                if r >= *radius {
                    return z;
                }
                let (_, h1, h2) = kind.profile(r, *radius);
                match dim {
                    Dim::One => [[h2, T::zero()], [T::zero(), T::zero()]],
                    Dim::Two => {
                        if r <= T::zero() {
                            return [[h2, T::zero()], [T::zero(), h2]];
                        }
                        let (c, s) = (x[0] / r, x[1] / r);
                        let t = h1 / r;
                        [
                            [h2 * c * c + t * s * s, (h2 - t) * c * s],
                            [(h2 - t) * c * s, h2 * s * s + t * c * c],
                        ]
                    }
                }
            }
            TestFunction::Scaled { factor, inner } => {
                let h = inner.hessian(x);
                let f = *factor;
                [[f * h[0][0], f * h[0][1]], [f * h[1][0], f * h[1][1]]]
            }
            TestFunction::Sum(a, b) => {
                let (ha, hb) = (a.hessian(x), b.hessian(x));
                [
                    [ha[0][0] + hb[0][0], ha[0][1] + hb[0][1]],
                    [ha[1][0] + hb[1][0], ha[1][1] + hb[1][1]],
                ]
            }
            TestFunction::Mollified { inner, mollifier } => {
                let (_, _, h) = convolve(&|y| inner.eval(y), mollifier, x, JetPart::Hessian);
                h
            }
        }
    }

    /// `max_{|alpha| <= 2} sup |d^alpha u|` over the grid of spacing
    /// [`C2_GRID_SPACING`], using the closed-form derivatives.
    pub fn c2_norm(&self) -> T {
        let pts = sample_points(self.dim(), self.support_radius(), self.is_radial());
        // For radial fields the axis samples see h, h', h'' and h'/r, which bound
        // every off-axis second derivative as well.
        pts.iter()
            .map(|&x| {
                let g = self.gradient(x);
                let h = self.hessian(x);
                let mut m = self.eval(x).abs().max(g[0].abs()).max(g[1].abs());
                for row in h {
                    for v in row {
                        m = m.max(v.abs());
                    }
                }
                m
            })
            .fold(T::zero(), T::max)
    }

    /// `sup |grad u|` on the sampling grid.
    pub fn gradient_sup(&self) -> T {
        sample_points(self.dim(), self.support_radius(), self.is_radial())
            .into_iter()
            .map(|x| norm(self.gradient(x), Dim::Two))
            .fold(T::zero(), T::max)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum JetPart {
    Value,
    Gradient,
    Hessian,
}

/// `(u * rho_eps)(x)` and its derivatives `u * d^alpha rho_eps`, by direct quadrature.
fn convolve<T: Real>(
    u: &(dyn Fn(Point<T>) -> T + Sync),
    mollifier: &Mollifier<T>,
    x: Point<T>,
    part: JetPart,
) -> (T, Point<T>, Hessian<T>) {
    let eps = mollifier.eps;
    let integrator = Integrator::new(lit(1e-15), lit(1e-13));
    let unwrap = |r: Result<QuadResult<T>, QuadError<T>>| match r {
        Ok(q) => q.value,
        Err(e) => e.partial().map(|p| p.value).unwrap_or(T::nan()),
    };
    let mut value = T::zero();
    let mut grad = [T::zero(); 2];
    let mut hess = [[T::zero(); 2]; 2];
    match mollifier.dim {
        Dim::One => {
            // Kernel samples at y, integrand u(x - y) K(y).
            let kernel = |y: T, which: usize| -> T {
                let (v, g, h) = mollifier.jet([y, T::zero()]);
                match which {
                    0 => v,
                    1 => g[0],
                    _ => h[0][0],
                }
            };
            let conv = |which: usize| {
                unwrap(integrator.integrate_with_breakpoints(
                    |y| u([x[0] - y, T::zero()]) * kernel(y, which),
                    &[-eps, T::zero(), eps],
                ))
            };
            match part {
                JetPart::Value => value = conv(0),
                JetPart::Gradient => grad[0] = conv(1),
                JetPart::Hessian => hess[0][0] = conv(2),
            }
        }
        Dim::Two => {
            let nodes: Vec<(T, T)> = (0..CONVOLUTION_ANGLES)
                .map(|k| {
                    let th = T::two() * T::PI() * T::from_usize_lossy(k) / T::from_usize_lossy(CONVOLUTION_ANGLES);
                    (th.cos(), th.sin())
                })
                .collect();
            let dth = T::two() * T::PI() / T::from_usize_lossy(CONVOLUTION_ANGLES);
            let components: Vec<usize> = match part {
                JetPart::Value => vec![0],
                JetPart::Gradient => vec![1, 2],
                JetPart::Hessian => vec![3, 4, 5],
            };
            let mut out = [T::zero(); 6];
            for c in components {
                let ring = |r: T| -> T {
                    let mut acc = T::zero();
                    for &(co, si) in &nodes {
                        let y = [r * co, r * si];
                        let (v, g, h) = mollifier.jet(y);
                        let k = match c {
                            0 => v,
                            1 => g[0],
                            2 => g[1],
                            3 => h[0][0],
                            4 => h[0][1],
                            _ => h[1][1],
                        };
                        acc += u([x[0] - y[0], x[1] - y[1]]) * k;
                    }
                    acc * dth * r
                };
                out[c] = unwrap(integrator.integrate(ring, T::zero(), eps));
            }
            value = out[0];
            grad = [out[1], out[2]];
            hess = [[out[3], out[4]], [out[4], out[5]]];
        }
    }
    (value, grad, hess)
}

/// `(u * rho_eps)(x)` for an arbitrary field.
pub fn convolve_at<T: Real, F: ScalarField<T> + ?Sized>(u: &F, mollifier: &Mollifier<T>, x: Point<T>) -> T {
    convolve(&|y| u.eval(y), mollifier, x, JetPart::Value).0
}

/// `|x|` in the given dimension.
pub fn norm<T: Real>(x: Point<T>, dim: Dim) -> T {
    match dim {
        Dim::One => x[0].abs(),
        Dim::Two => x[0].hypot(x[1]),
    }
}

impl<T: Real> ScalarField<T> for TestFunction<T> {
    fn dim(&self) -> Dim {
        match self {
            TestFunction::Zero { dim } | TestFunction::Radial { dim, .. } => *dim,
            TestFunction::Scaled { inner, .. } => inner.dim(),
            TestFunction::Sum(a, _) => a.dim(),
            TestFunction::Mollified { mollifier, .. } => mollifier.dim,
        }
    }

    fn eval(&self, x: Point<T>) -> T {
        match self {
            TestFunction::Zero { .. } => T::zero(),
            TestFunction::Radial { kind, radius, dim } => kind.profile(norm(x, *dim), *radius).0,
            TestFunction::Scaled { factor, inner } => *factor * inner.eval(x),
            TestFunction::Sum(a, b) => a.eval(x) + b.eval(x),
            TestFunction::Mollified { inner, mollifier } => {
                if norm(x, mollifier.dim) >= inner.support_radius() + mollifier.eps {
                    return T::zero();
                }
                convolve(&|y| inner.eval(y), mollifier, x, JetPart::Value).0
            }
        }
    }

    fn support_radius(&self) -> T {
        match self {
            TestFunction::Zero { .. } => T::one(),
            TestFunction::Radial { radius, .. } => *radius,
            TestFunction::Scaled { inner, .. } => inner.support_radius(),
            TestFunction::Sum(a, b) => a.support_radius().max(b.support_radius()),
            TestFunction::Mollified { inner, mollifier } => inner.support_radius() + mollifier.eps,
        }
    }

    fn label(&self) -> String {
        match self {
            TestFunction::Zero { .. } => "zero".into(),
            TestFunction::Radial { kind, radius, .. } => format!("{}:{radius:?}", kind.name()),
            TestFunction::Scaled { factor, inner } => format!("{factor:?}*{}", inner.label()),
            TestFunction::Sum(a, b) => format!("({} + {})", a.label(), b.label()),
            TestFunction::Mollified { inner, mollifier } => format!("mollify({}, {:?})", inner.label(), mollifier.eps),
        }
    }

    fn is_radial(&self) -> bool {
        match self {
            TestFunction::Zero { .. } | TestFunction::Radial { .. } => true,
            TestFunction::Scaled { inner, .. } => inner.is_radial(),
            TestFunction::Sum(a, b) => a.is_radial() && b.is_radial(),
            TestFunction::Mollified { inner, .. } => inner.is_radial(),
        }
    }

    fn jump_radii(&self) -> Vec<T> {
        match self {
            TestFunction::Radial { kind: RadialKind::Step, radius, .. } => vec![*radius * T::half()],
            TestFunction::Scaled { inner, .. } => inner.jump_radii(),
            TestFunction::Sum(a, b) => {
                let mut v = a.jump_radii();
                v.extend(b.jump_radii());
                v
            }
            _ => Vec::new(),
        }
    }
}

/// Partial derivative `d^alpha u`, `|alpha| <= 2`, of a test function, viewed
/// as a scalar field (values only).
#[derive(Clone, Debug)]
pub struct Derivative<T> {
    pub inner: TestFunction<T>,
    pub alpha: [usize; 2],
}

impl<T: Real> Derivative<T> {
    /// All multi-indices with `|alpha| <= 2` in dimension `dim`.
    pub fn multi_indices(dim: Dim) -> Vec<[usize; 2]> {
        match dim {
            Dim::One => vec![[0, 0], [1, 0], [2, 0]],
            Dim::Two => vec![[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]],
        }
    }
}

impl<T: Real> ScalarField<T> for Derivative<T> {
    fn dim(&self) -> Dim {
        self.inner.dim()
    }

    fn eval(&self, x: Point<T>) -> T {
        match self.alpha {
            [0, 0] => self.inner.eval(x),
            [1, 0] => self.inner.gradient(x)[0],
            [0, 1] => self.inner.gradient(x)[1],
            [2, 0] => self.inner.hessian(x)[0][0],
            [1, 1] => self.inner.hessian(x)[0][1],
            [0, 2] => self.inner.hessian(x)[1][1],
            _ => panic!("derivatives above order two are not available"),
        }
    }

    fn support_radius(&self) -> T {
        self.inner.support_radius()
    }

    fn label(&self) -> String {
        format!("d^({},{}) {}", self.alpha[0], self.alpha[1], self.inner.label())
    }

    // Derivatives of radial functions are not radial in the plane.
    fn is_radial(&self) -> bool {
        self.dim() == Dim::One || self.alpha == [0, 0]
    }
}

/// Piecewise constant samples on a uniform one-dimensional grid centered at
/// the origin; entries may be `+inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    pub spacing: T,
    pub values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(spacing: T, values: Vec<T>) -> Self {
        assert!(spacing > T::zero() && !values.is_empty());
        GridFunction { spacing, values }
    }

    /// Samples `f` at cell midpoints of a grid of `cells` cells over its support.
    pub fn sample<F: ScalarField<T>>(f: &F, cells: usize) -> Self {
        let r = f.support_radius();
        let h = T::two() * r / T::from_usize_lossy(cells);
        let values = (0..cells)
            .map(|i| f.eval([-r + h * (T::from_usize_lossy(i) + T::half()), T::zero()]))
            .collect();
        GridFunction { spacing: h, values }
    }

    fn left(&self) -> T {
        -self.spacing * T::from_usize_lossy(self.values.len()) * T::half()
    }
}

impl<T: Real> ScalarField<T> for GridFunction<T> {
    fn dim(&self) -> Dim {
        Dim::One
    }

    fn eval(&self, x: Point<T>) -> T {
        let idx = ((x[0] - self.left()) / self.spacing).floor();
        match idx.to_usize() {
            Some(i) if idx >= T::zero() && i < self.values.len() => self.values[i],
            _ => T::zero(),
        }
    }

    fn support_radius(&self) -> T {
        -self.left()
    }

    fn label(&self) -> String {
        format!("grid[{} cells]", self.values.len())
    }

    fn integrate_abs(&self, phi: &(dyn Fn(T) -> T + Sync), _integrator: &Integrator<T>) -> Result<QuadResult<T>, QuadError<T>> {
        let mut total = T::zero();
        for (i, v) in self.values.iter().enumerate() {
            let term = phi(v.abs()) * self.spacing;
            if !term.is_finite() {
                return Err(QuadError::NonFinite { at: self.left() + self.spacing * T::from_usize_lossy(i) });
            }
            total += term;
        }
        Ok(QuadResult { value: total, err_estimate: T::zero(), evaluations: self.values.len() })
    }

    fn sup_abs(&self) -> T {
        self.values.iter().map(|v| v.abs()).fold(T::zero(), T::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(u: &TestFunction<f64>, pts: &[Point<f64>]) {
        let h = 1e-4;
        for &x in pts {
            let g = u.gradient(x);
            let dim = u.dim().as_usize();
            for k in 0..dim {
                let mut xp = x;
                let mut xm = x;
                xp[k] += h;
                xm[k] -= h;
                let fd = (u.eval(xp) - u.eval(xm)) / (2.0 * h);
                assert!((fd - g[k]).abs() < 1e-5, "{} grad at {x:?}: {fd} vs {}", u.label(), g[k]);
                let (gp, gm) = (u.gradient(xp), u.gradient(xm));
                let hess = u.hessian(x);
                for j in 0..dim {
                    let fd2 = (gp[j] - gm[j]) / (2.0 * h);
                    assert!((fd2 - hess[j][k]).abs() < 1e-4, "{} hess at {x:?}", u.label());
                }
            }
        }
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences() {
        let pts1: Vec<Point<f64>> = [-0.9, -0.55, -0.3, 0.1, 0.45, 0.77, 0.95].iter().map(|&x| [x, 0.0]).collect();
        let pts2: Vec<Point<f64>> = vec![[0.1, 0.2], [-0.4, 0.3], [0.6, -0.5], [0.05, -0.02], [-0.2, -0.7]];
        for kind in [RadialKind::Bump, RadialKind::Plateau, RadialKind::Tent] {
            fd_check(&TestFunction::radial(kind, 1.0, Dim::One), &pts1);
            fd_check(&TestFunction::radial(kind, 1.0, Dim::Two), &pts2);
        }
    }

    #[test]
    fn functions_vanish_outside_support() {
        for kind in [RadialKind::Bump, RadialKind::Plateau, RadialKind::Tent, RadialKind::Step] {
            let u = TestFunction::radial(kind, 1.3, Dim::Two);
            for k in 0..16 {
                let th = k as f64 * 0.4;
                let x = [1.3 * th.cos(), 1.3 * th.sin()];
                assert!(u.eval(x).abs() < 1e-30);
                assert!(u.gradient(x)[0].abs() < 1e-20 && u.gradient(x)[1].abs() < 1e-20);
                let far = [2.0 * th.cos(), 2.0 * th.sin()];
                assert_eq!(u.eval(far), 0.0);
            }
        }
    }

    #[test]
    fn profile_values() {
        let t = TestFunction::<f64>::tent(1.0, Dim::One);
        assert!((t.eval([0.0, 0.0]) - 1.0).abs() < 1e-15);
        let p = TestFunction::<f64>::plateau(1.0, Dim::One);
        assert_eq!(p.eval([0.3, 0.0]), 1.0);
        let b = TestFunction::<f64>::bump(1.0, Dim::One);
        assert!((b.eval([0.0, 0.0]) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn parse_labels() {
        let u = TestFunction::<f64>::parse("0.5*bump:1.0", Dim::One).unwrap();
        assert!((u.eval([0.0, 0.0]) - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(u.label(), "0.5*bump:1.0");
        assert!(TestFunction::<f64>::parse("spike:1", Dim::One).is_err());
        assert!(TestFunction::<f64>::parse("bump:-1", Dim::One).is_err());
    }

    #[test]
    fn mollifier_has_unit_mass() {
        for dim in [Dim::One, Dim::Two] {
            let m = Mollifier::<f64>::new(0.3, dim);
            let rho = m.as_function();
            let mass = integrate_over_support(&rho, &|x| rho.eval(x), &Integrator::new(1e-14, 1e-12)).unwrap();
            assert!((mass.value - 1.0).abs() < 1e-8, "{dim:?}: {}", mass.value);
            assert_eq!(rho.support_radius(), 0.3);
        }
    }

    #[test]
    fn grid_function_integrates_cells() {
        let g = GridFunction::new(0.5, vec![1.0, 2.0, 3.0, 4.0]);
        let r = g.integrate_abs(&|v| v, &Integrator::default()).unwrap();
        assert_eq!(r.value, 5.0);
        assert_eq!(g.eval([-0.9, 0.0]), 1.0);
        assert_eq!(g.eval([0.9, 0.0]), 4.0);
        assert_eq!(g.eval([1.1, 0.0]), 0.0);
        let bad = GridFunction::new(0.5, vec![1.0, f64::INFINITY]);
        assert!(bad.integrate_abs(&|v| v, &Integrator::default()).is_err());
    }

    #[test]
    fn c2_norm_of_bump() {
        let b = TestFunction::<f64>::bump(1.0, Dim::One);
        let n = b.c2_norm();
        // max |h''| = 7.7497... is attained near r = 0.895, between grid nodes.
        assert!(n > 7.6 && n <= 7.7498, "{n}");
        let b2 = TestFunction::bump(1.0, Dim::Two);
        assert!((b2.c2_norm() - n).abs() < 1e-12);
    }
}
