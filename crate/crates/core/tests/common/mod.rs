//! Helpers shared by the property and acceptance tests, including the
//! brute-force double-integral oracle for the fractional energy.
#![allow(dead_code)]

use orlicz_gamma::{Dim, Extended, Extended64, ScalarField, TestFunction64, YoungFunction64};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use rayon::prelude::*;

pub const YOUNG_LABELS: [&str; 5] = ["power:2.0", "powerlog:2.0", "llogl", "exppower:1.0", "flatzero"];

pub fn young(label: &str) -> YoungFunction64 {
    YoungFunction64::parse(label).unwrap()
}

pub fn function(label: &str, dim: Dim) -> TestFunction64 {
    TestFunction64::parse(label, dim).unwrap()
}

/// `|A(t) - B(t)| / (1 + A(t))`, zero when both saturate to `+inf` and
/// infinite when only one does.
pub fn saturated_error(a: Extended64, b: Extended64) -> f64 {
    match (a, b) {
        (Extended::Infinite, Extended::Infinite) => 0.0,
        (Extended::Finite(a), Extended::Finite(b)) => (a - b).abs() / (1.0 + a),
        _ => f64::INFINITY,
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Draws `count` values from `strategy` with a fixed seed.
pub fn deterministic_sample<S: Strategy>(strategy: S, count: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..count).map(|_| strategy.new_tree(&mut runner).unwrap().current()).collect()
}

fn midpoints(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let h = (b - a) / n as f64;
    (0..n).map(move |i| a + (i as f64 + 0.5) * h)
}

/// `u(x + h) - u(x)` in one dimension; a second-order Taylor expansion
/// replaces the difference once it would be lost to cancellation.
fn difference(u: &TestFunction64, x: f64, h: f64) -> f64 {
    if h < 1e-5 * u.support_radius() {
        u.gradient([x, 0.0])[0] * h + 0.5 * u.hessian([x, 0.0])[0][0] * h * h
    } else {
        u.eval([x + h, 0.0]) - u.eval([x, 0.0])
    }
}

/// Midpoint-rule value of `(1-s) \iint A(|u(x)-u(y)|/|x-y|^s) |x-y|^{-1} dx dy`
/// in one dimension on an `n x n` grid.
///
/// With `y = x + h`, `h > 0` (doubling by symmetry) and `H = 2R`:
/// for `h < H` the substitution `h = H tau^{1/(1-s)}` absorbs the kernel, and
/// for `h >= H` the supports no longer overlap, so the inner integral is
/// `2 \int A(|u| / h^s)` and `h = H sigma^{-1/s}` maps the tail onto `(0, 1]`.
pub fn brute_force_js(f: &YoungFunction64, u: &TestFunction64, s: f64, n: usize) -> f64 {
    let r = u.support_radius();
    let big_h = 2.0 * r;
    let a = |t: f64| f.eval(t).to_float();
    let near: f64 = midpoints(0.0, 1.0, n)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&tau| {
            let h = big_h * tau.powf(1.0 / (1.0 - s));
            let hs = h.powf(s);
            let dx = (2.0 * r + h) / n as f64;
            let inner: f64 = midpoints(-r - h, r, n).map(|x| a(difference(u, x, h).abs() / hs)).sum::<f64>() * dx;
            inner / tau
        })
        .sum::<f64>()
        / n as f64;
    let dx = 2.0 * r / n as f64;
    let values: Vec<f64> = midpoints(-r, r, n).map(|x| u.eval([x, 0.0]).abs()).collect();
    let far: f64 = midpoints(0.0, 1.0, n)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&sigma| {
            let scale = sigma / big_h.powf(s);
            2.0 * values.iter().map(|&v| a(v * scale)).sum::<f64>() * dx / sigma
        })
        .sum::<f64>()
        / n as f64
        * (1.0 - s)
        / s;
    2.0 * (near + far)
}

/// Richardson extrapolation of [`brute_force_js`] from grids `n` and `2n`,
/// together with the size of the correction.
pub fn brute_force_js_extrapolated(f: &YoungFunction64, u: &TestFunction64, s: f64, n: usize) -> (f64, f64) {
    let coarse = brute_force_js(f, u, s, n);
    let fine = brute_force_js(f, u, s, 2 * n);
    let extrapolated = (4.0 * fine - coarse) / 3.0;
    (extrapolated, (extrapolated - fine).abs())
}
