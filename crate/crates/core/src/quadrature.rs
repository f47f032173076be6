//! One-dimensional adaptive quadrature, circle/sphere averages for `n <= 2`,
//! and the radial integral against `dr / r` used by every nonlocal kernel.
//!
//! The adaptive driver is a globally adaptive bisection scheme built on the
//! 21-point Gauss-Kronrod rule. Refinement order never depends on the thread
//! count: parallel evaluation only fans out the nodes of one bisection step, so
//! serial and parallel runs produce bit-identical results.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use rayon::prelude::*;
use thiserror::Error;

use crate::real::{lit, Real};

/// Hard cap on integrand evaluations for one adaptive integral.
pub const MAX_EVALUATIONS: usize = 10_000_000;

/// Number of equispaced nodes of the periodic trapezoid rule on the circle.
pub const CIRCLE_NODES: usize = 512;

/// Initial breakpoints placed at each decade of `r` by the radial integrator.
pub const RADIAL_DECADES: usize = 12;

// 21-point Kronrod abscissae on [-1, 1] (nonnegative half, descending) and the
// embedded 10-point Gauss weights for the odd-indexed abscissae.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_745_367,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Outcome of a converged (or roundoff-limited) integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub err_estimate: T,
    pub evaluations: usize,
}

impl<T: Real> QuadResult<T> {
    pub fn zero() -> Self {
        QuadResult { value: T::zero(), err_estimate: T::zero(), evaluations: 0 }
    }

    /// Sum of two independent results; errors add.
    pub fn combine(self, other: Self) -> Self {
        QuadResult {
            value: self.value + other.value,
            err_estimate: self.err_estimate + other.err_estimate,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    pub fn scale(self, factor: T) -> Self {
        QuadResult {
            value: self.value * factor,
            err_estimate: self.err_estimate * factor.abs(),
            evaluations: self.evaluations,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum QuadError<T: Real> {
    #[error("evaluation cap exceeded after {} evaluations (partial value {})", partial.evaluations, partial.value)]
    NonConvergence { partial: QuadResult<T> },
    #[error("integrand returned a non-finite value at {at}")]
    NonFinite { at: T },
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: T, b: T },
}

impl<T: Real> QuadError<T> {
    /// Best available value: the partial sum for non-convergence.
    pub fn partial(&self) -> Option<QuadResult<T>> {
        match self {
            QuadError::NonConvergence { partial } => Some(*partial),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    err: T,
    abs_value: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Segment<T> {}
impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Largest error first; ties broken by position for determinism.
        self.err
            .partial_cmp(&other.err)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.a.partial_cmp(&self.a).unwrap_or(Ordering::Equal))
    }
}

/// QUADPACK-style error rescaling for the Kronrod/Gauss difference.
fn rescale_error<T: Real>(err: T, res_abs: T, res_asc: T) -> T {
    let mut scaled = err.abs();
    if res_asc != T::zero() && scaled != T::zero() {
        let scale = (lit::<T>(200.0) * scaled / res_asc).powf(lit(1.5));
        scaled = if scale < T::one() { res_asc * scale } else { res_asc };
    }
    let floor_threshold = T::min_positive_value() / (lit::<T>(50.0) * T::epsilon());
    if res_abs > floor_threshold {
        let min_err = lit::<T>(50.0) * T::epsilon() * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// Absolute nodes of the 21-point rule on `[a, b]`, in the order used by
/// [`apply_gk21`]: `center, (center - h x_i, center + h x_i) for i in 0..10`.
fn gk21_nodes<T: Real>(a: T, b: T) -> [T; 21] {
    let center = (a + b) * T::half();
    let half = (b - a) * T::half();
    let mut nodes = [center; 21];
    for i in 0..10 {
        let dx = half * lit::<T>(XGK[i]);
        nodes[1 + 2 * i] = center - dx;
        nodes[2 + 2 * i] = center + dx;
    }
    nodes
}

fn apply_gk21<T: Real>(a: T, b: T, fv: &[T; 21]) -> Segment<T> {
    let half = (b - a) * T::half();
    let fc = fv[0];
    let mut res_k = fc * lit::<T>(WGK[10]);
    let mut res_g = T::zero();
    let mut res_abs = fc.abs() * lit::<T>(WGK[10]);
    for i in 0..10 {
        let f1 = fv[1 + 2 * i];
        let f2 = fv[2 + 2 * i];
        let w = lit::<T>(WGK[i]);
        res_k += w * (f1 + f2);
        res_abs += w * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            res_g += lit::<T>(WG[i / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * T::half();
    let mut res_asc = lit::<T>(WGK[10]) * (fc - mean).abs();
    for i in 0..10 {
        res_asc += lit::<T>(WGK[i]) * ((fv[1 + 2 * i] - mean).abs() + (fv[2 + 2 * i] - mean).abs());
    }
    let hab = half.abs();
    let value = res_k * half;
    let err = rescale_error((res_k - res_g) * half, res_abs * hab, res_asc * hab);
    Segment { a, b, value, err, abs_value: res_abs * hab }
}

/// Configurable adaptive integrator.
#[derive(Clone, Debug)]
pub struct Integrator<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_evaluations: usize,
    /// Evaluate the nodes of each refinement step on the rayon pool.
    pub parallel: bool,
}

impl<T: Real> Default for Integrator<T> {
    fn default() -> Self {
        Integrator {
            abs_tol: lit(1e-12),
            rel_tol: lit(1e-10),
            max_evaluations: MAX_EVALUATIONS,
            parallel: false,
        }
    }
}

impl<T: Real> Integrator<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        Integrator { abs_tol, rel_tol, ..Default::default() }
    }

    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn max_evaluations(mut self, cap: usize) -> Self {
        self.max_evaluations = cap;
        self
    }

    pub fn integrate<F>(&self, f: F, a: T, b: T) -> Result<QuadResult<T>, QuadError<T>>
    where
        F: Fn(T) -> T + Sync,
    {
        self.integrate_with_breakpoints(f, &[a, b])
    }

    /// Integrates over `[points[0], points.last()]` with the given initial
    /// subdivision. Points must be nondecreasing; empty pieces are skipped.
    pub fn integrate_with_breakpoints<F>(&self, f: F, points: &[T]) -> Result<QuadResult<T>, QuadError<T>>
    where
        F: Fn(T) -> T + Sync,
    {
        if points.len() < 2 {
            return Ok(QuadResult::zero());
        }
        for w in points.windows(2) {
            if !(w[0] <= w[1]) || !w[0].is_finite() || !w[1].is_finite() {
                return Err(QuadError::InvalidInterval { a: w[0], b: w[1] });
            }
        }
        let pieces: Vec<(T, T)> = points
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[0], w[1]))
            .collect();
        if pieces.is_empty() {
            return Ok(QuadResult::zero());
        }

        let mut evaluations = 0usize;
        let initial = self.evaluate_segments(&f, &pieces)?;
        evaluations += 21 * pieces.len();

        let mut heap: BinaryHeap<Segment<T>> = BinaryHeap::new();
        let mut frozen: Vec<Segment<T>> = Vec::new();
        let mut total = T::zero();
        let mut total_err = T::zero();
        let mut total_abs = T::zero();
        for seg in initial {
            total += seg.value;
            total_err += seg.err;
            total_abs += seg.abs_value;
            heap.push(seg);
        }

        loop {
            let target = self.abs_tol.max(self.rel_tol * total.abs());
            let roundoff = lit::<T>(100.0) * T::epsilon() * total_abs;
            if total_err <= target || total_err <= roundoff {
                break;
            }
            let worst = match heap.pop() {
                Some(seg) => seg,
                None => break,
            };
            let mid = (worst.a + worst.b) * T::half();
            let width = worst.b - worst.a;
            let scale = worst.a.abs().max(worst.b.abs()).max(T::min_positive_value());
            if width <= lit::<T>(1000.0) * T::epsilon() * scale || mid <= worst.a || mid >= worst.b {
                frozen.push(worst);
                continue;
            }
            if evaluations + 42 > self.max_evaluations {
                heap.push(worst);
                let partial = Self::finish(heap, frozen, evaluations);
                return Err(QuadError::NonConvergence { partial });
            }
            let halves = self.evaluate_segments(&f, &[(worst.a, mid), (mid, worst.b)])?;
            evaluations += 42;
            total -= worst.value;
            total_err -= worst.err;
            total_abs -= worst.abs_value;
            for seg in halves {
                total += seg.value;
                total_err += seg.err;
                total_abs += seg.abs_value;
                heap.push(seg);
            }
            // Guard against drift from the running sums.
            if total_err < T::zero() {
                total_err = heap.iter().chain(frozen.iter()).map(|s| s.err).sum();
            }
        }
        Ok(Self::finish(heap, frozen, evaluations))
    }

    fn finish(heap: BinaryHeap<Segment<T>>, frozen: Vec<Segment<T>>, evaluations: usize) -> QuadResult<T> {
        let mut all: Vec<Segment<T>> = heap.into_vec();
        all.extend(frozen);
        all.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap_or(Ordering::Equal));
        let mut value = T::zero();
        let mut err = T::zero();
        for s in &all {
            value += s.value;
            err += s.err;
        }
        QuadResult { value, err_estimate: err, evaluations }
    }

    fn evaluate_segments<F>(&self, f: &F, pieces: &[(T, T)]) -> Result<Vec<Segment<T>>, QuadError<T>>
    where
        F: Fn(T) -> T + Sync,
    {
        let nodes: Vec<T> = pieces
            .iter()
            .flat_map(|&(a, b)| gk21_nodes(a, b))
            .collect();
        let values: Vec<T> = if self.parallel {
            nodes.par_iter().map(|&x| f(x)).collect()
        } else {
            nodes.iter().map(|&x| f(x)).collect()
        };
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(QuadError::NonFinite { at: nodes[i] });
        }
        Ok(pieces
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                let mut fv = [T::zero(); 21];
                fv.copy_from_slice(&values[21 * k..21 * (k + 1)]);
                apply_gk21(a, b, &fv)
            })
            .collect())
    }
}

/// Adaptive integral of `g` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate_adaptive<T, F>(g: F, a: T, b: T, tol: T) -> Result<QuadResult<T>, QuadError<T>>
where
    T: Real,
    F: Fn(T) -> T + Sync,
{
    if !(a < b) {
        return Err(QuadError::InvalidInterval { a, b });
    }
    Integrator::new(tol, T::zero()).integrate(g, a, b)
}

/// Spatial dimension supported by the kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn from_usize(n: usize) -> Option<Dim> {
        match n {
            1 => Some(Dim::One),
            2 => Some(Dim::Two),
            _ => None,
        }
    }

    pub fn as_usize(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }

    /// Lebesgue measure of the unit ball.
    pub fn unit_ball_volume<T: Real>(self) -> T {
        match self {
            Dim::One => T::two(),
            Dim::Two => T::PI(),
        }
    }

    /// `H^{n-1}` measure of the unit sphere.
    pub fn sphere_measure<T: Real>(self) -> T {
        match self {
            Dim::One => T::two(),
            Dim::Two => T::two() * T::PI(),
        }
    }
}

/// Points of `R^n`, `n <= 2`, stored as two coordinates; the second is zero for `n = 1`.
pub type Point<T> = [T; 2];

/// Unit directions used by [`integrate_sphere`], with their weights.
pub fn sphere_nodes<T: Real>(n: Dim) -> Vec<(Point<T>, T)> {
    match n {
        Dim::One => vec![([T::one(), T::zero()], T::one()), ([-T::one(), T::zero()], T::one())],
        Dim::Two => {
            let w = T::two() * T::PI() / T::from_usize_lossy(CIRCLE_NODES);
            (0..CIRCLE_NODES)
                .map(|k| {
                    let theta = w * T::from_usize_lossy(k);
                    ([theta.cos(), theta.sin()], w)
                })
                .collect()
        }
    }
}

/// `\int_{S^{n-1}} g(omega) dH^{n-1}(omega)`.
pub fn integrate_sphere<T, F>(g: F, n: Dim) -> T
where
    T: Real,
    F: Fn(Point<T>) -> T,
{
    sphere_nodes::<T>(n).into_iter().map(|(w, weight)| weight * g(w)).sum()
}

/// Abscissa of the radial integrators: the radius together with `r^{1-s}`,
/// which stays representable when `r` itself underflows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialSample<T> {
    pub r: T,
    pub r_pow: T,
}

/// `\int_0^{r_max} h dr / r` computed in the variable `w = r^{1-s}`, where
/// `dr / r = dw / ((1-s) w)`. The callback sees both `r` and `w`.
///
/// The `w`-interval is pre-split at the images of the last
/// [`RADIAL_DECADES`] decades of `r` so that structure at moderate radii is
/// resolved even when `1 - s` compresses it towards `w = r_max^{1-s}`.
pub fn integrate_radial_substituted<T, H>(
    h: H,
    s: T,
    r_max: T,
    integrator: &Integrator<T>,
) -> Result<QuadResult<T>, QuadError<T>>
where
    T: Real,
    H: Fn(RadialSample<T>) -> T + Sync,
{
    if !(r_max > T::zero()) {
        return Ok(QuadResult::zero());
    }
    let one_minus_s = T::one() - s;
    let ln_r_max = r_max.ln();
    let ln10 = T::LN_10();
    let mut points: Vec<T> = (0..=RADIAL_DECADES)
        .rev()
        .map(|j| (one_minus_s * (ln_r_max - ln10 * T::from_usize_lossy(j))).exp())
        .collect();
    points.insert(0, T::zero());
    points.dedup();
    let g = |w: T| {
        if w <= T::zero() {
            return T::zero();
        }
        let r = (w.ln() / one_minus_s).exp();
        h(RadialSample { r, r_pow: w }) / (one_minus_s * w)
    };
    integrator.integrate_with_breakpoints(g, &points)
}

/// `\int_0^{r_max} g(r) dr / r` through the substitution `u = r^{1-s}`.
pub fn integrate_radial_singular<T, G>(g: G, s: T, r_max: T, tol: T) -> Result<QuadResult<T>, QuadError<T>>
where
    T: Real,
    G: Fn(T) -> T + Sync,
{
    let integrator = Integrator::new(tol, T::zero());
    integrate_radial_substituted(|p: RadialSample<T>| g(p.r), s, r_max, &integrator)
}

/// `\int_{r_0}^{r_1} g(r) dr / r` for `0 < r_0 < r_1`, integrated in `ln r`.
pub fn integrate_log_radial<T, G>(g: G, r0: T, r1: T, integrator: &Integrator<T>) -> Result<QuadResult<T>, QuadError<T>>
where
    T: Real,
    G: Fn(T) -> T + Sync,
{
    if !(r1 > r0) || !(r0 > T::zero()) {
        return Ok(QuadResult::zero());
    }
    let (l0, l1) = (r0.ln(), r1.ln());
    let pieces = ((l1 - l0) / T::LN_10()).ceil().to_usize().unwrap_or(1).clamp(1, 64);
    let step = (l1 - l0) / T::from_usize_lossy(pieces);
    let mut points: Vec<T> = (0..pieces).map(|k| l0 + step * T::from_usize_lossy(k)).collect();
    points.push(l1);
    integrator.integrate_with_breakpoints(|v: T| g(v.exp()), &points)
}

/// Verdict of the refinement-growth test for integrals that may diverge.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GrowthCertificate<T> {
    /// `(r_min, truncated value)` pairs, `r_min` decreasing by a decade per row.
    pub rows: Vec<(T, T)>,
    pub divergent: bool,
}

/// Factor per decade of `r_min` above which a truncated integral is declared divergent.
pub const GROWTH_FACTOR: f64 = 10.0;

/// Builds a [`GrowthCertificate`] from truncated integrals `value(r_min)`.
///
/// Divergence is declared when every decade step over the last three rows
/// multiplies the value by more than [`GROWTH_FACTOR`].
pub fn growth_certificate<T, F>(value: F, r_mins: &[T]) -> GrowthCertificate<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    growth_certificate_with_factor(value, r_mins, lit(GROWTH_FACTOR))
}

/// [`growth_certificate`] with a caller-chosen growth factor per decade.
pub fn growth_certificate_with_factor<T, F>(value: F, r_mins: &[T], factor: T) -> GrowthCertificate<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let rows: Vec<(T, T)> = r_mins.iter().map(|&r| (r, value(r))).collect();
    let tail = &rows[rows.len().saturating_sub(3)..];
    let divergent = tail.len() >= 2
        && tail.windows(2).all(|w| {
            let (lo, hi) = (w[0].1, w[1].1);
            hi.is_infinite() || (lo > T::zero() && hi > factor * lo)
        });
    GrowthCertificate { rows, divergent }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate_adaptive(|x: f64| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-10);
        assert!(r.err_estimate >= 0.0);
        assert_eq!(r.evaluations, 21);
    }

    #[test]
    fn zero_integrand() {
        let r = integrate_adaptive(|_x: f64| 0.0, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn sine_over_half_period() {
        let r = integrate_adaptive(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn kronrod_exactness_degree_31() {
        for k in 0..=31 {
            let r = Integrator::<f64>::new(1.0, 1.0).integrate(|x| x.powi(k), -1.0, 1.0).unwrap();
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((r.value - exact).abs() < 1e-14, "degree {k}");
        }
    }

    #[test]
    fn endpoint_singularity_converges() {
        let r = integrate_adaptive(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn invalid_interval_and_non_finite() {
        assert!(matches!(integrate_adaptive(|x: f64| x, 1.0, 0.0, 1e-8), Err(QuadError::InvalidInterval { .. })));
        let e = integrate_adaptive(|x: f64| if x > 0.5 { f64::INFINITY } else { 0.0 }, 0.0, 1.0, 1e-8);
        assert!(matches!(e, Err(QuadError::NonFinite { .. })));
    }

    #[test]
    fn cap_reports_partial_value() {
        let e = Integrator::new(1e-300, 0.0)
            .max_evaluations(500)
            .integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0)
            .unwrap_err();
        let partial = e.partial().expect("partial value");
        assert!(partial.evaluations <= 500);
    }

    #[test]
    fn parallel_matches_serial_bitwise() {
        let f = |x: f64| (3.0 * x).sin() * (-x * x).exp() / (1.0 + x * x);
        let a = Integrator::new(1e-13, 0.0).integrate(f, -4.0, 7.0).unwrap();
        let b = Integrator::new(1e-13, 0.0).parallel(true).integrate(f, -4.0, 7.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sphere_rules() {
        assert_eq!(integrate_sphere(|_w: Point<f64>| 1.0, Dim::One), 2.0);
        let c = integrate_sphere(|_w: Point<f64>| 1.0, Dim::Two);
        assert!((c - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        let q = integrate_sphere(|w: Point<f64>| w[1] * w[1], Dim::Two);
        assert!((q - std::f64::consts::PI).abs() < 1e-10);
        let odd = integrate_sphere(|w: Point<f64>| w[0], Dim::One);
        assert_eq!(odd, 0.0);
    }

    #[test]
    fn radial_singular_examples() {
        let s = 0.5;
        let p = 2.0;
        let r = integrate_radial_singular(|r: f64| r.powf((1.0 - s) * p), s, 1.0, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        let z = integrate_radial_singular(|_r: f64| 0.0, 0.3, 1.0, 1e-12).unwrap();
        assert_eq!(z.value, 0.0);
        for s in [0.1, 0.5, 0.9, 0.999] {
            let r = integrate_radial_singular(|r: f64| r, s, 2.0, 1e-12).unwrap();
            assert!((r.value - 2.0).abs() < 1e-9, "s = {s}: {}", r.value);
        }
    }

    #[test]
    fn radial_substitution_survives_underflowing_radius() {
        // For s close to 1, most of the w-range maps to radii below f64::MIN_POSITIVE.
        let s = 0.9999;
        let r = integrate_radial_substituted(
            |p: RadialSample<f64>| p.r_pow * p.r_pow,
            s,
            1.0,
            &Integrator::new(1e-12, 1e-12),
        )
        .unwrap();
        let exact = 1.0 / (2.0 * (1.0 - s));
        assert!((r.value - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn log_radial_matches_closed_form() {
        let r = integrate_log_radial(|r: f64| r, 1e-3, 10.0, &Integrator::new(1e-13, 1e-13)).unwrap();
        assert!((r.value - (10.0 - 1e-3)).abs() < 1e-10);
    }

    #[test]
    fn growth_certificate_flags_power_blowup() {
        let r_mins = [1e-1, 1e-2, 1e-3, 1e-4];
        let div = growth_certificate(|r: f64| r.powf(-1.5), &r_mins);
        assert!(div.divergent);
        let conv = growth_certificate(|r: f64| 1.0 - r, &r_mins);
        assert!(!conv.divergent);
    }

    #[test]
    fn f32_instantiation() {
        let r = integrate_adaptive(|x: f32| x * x, 0.0, 1.0, 1e-6).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-6);
    }
}
