//! Quadrature and one-dimensional search.
//!
//! `integrate` is adaptive Simpson with a Richardson error estimate, pre-split
//! at every kink of the integrand. `integrate_tensor` is a fixed
//! Gauss-Legendre product rule for small joint integrals over product
//! measures. `maximize_concave` is golden-section search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_DEPTH: u32 = 60;

/// Equal-width panels each kink-free segment is cut into before adaptation.
const PANELS_PER_SEGMENT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub argmax: f64,
    pub max_value: f64,
    pub iterations: usize,
    pub bracket_width: f64,
}

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// `kinks` must be sorted and lie in `[a, b]`; the interval is split at each of
/// them before refinement starts.
pub fn integrate<F>(f: F, a: f64, b: f64, kinks: &[f64], tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    integrate_with_depth(f, a, b, kinks, tol, DEFAULT_MAX_DEPTH)
}

pub fn integrate_with_depth<F>(
    f: F,
    a: f64,
    b: f64,
    kinks: &[f64],
    tol: f64,
    max_depth: u32,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!("integration bounds must satisfy a < b, got [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if kinks.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("kink points must be sorted"));
    }
    if kinks.iter().any(|k| *k < a || *k > b) {
        return Err(Error::domain(format!("kink points must lie within [{a}, {b}]")));
    }

    let mut breaks = Vec::with_capacity(kinks.len() + 2);
    breaks.push(a);
    breaks.extend(kinks.iter().copied().filter(|k| *k > a && *k < b));
    breaks.push(b);
    breaks.dedup();

    let panels: Vec<(f64, f64)> = breaks
        .windows(2)
        .flat_map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let h = (hi - lo) / PANELS_PER_SEGMENT as f64;
            (0..PANELS_PER_SEGMENT).map(move |i| {
                let l = lo + h * i as f64;
                let r = if i + 1 == PANELS_PER_SEGMENT { hi } else { lo + h * (i + 1) as f64 };
                (l, r)
            })
        })
        .collect();

    let panel_tol = tol / panels.len() as f64;
    let mut total = QuadratureResult { value: 0.0, error_estimate: 0.0, evaluations: 0 };
    for (lo, hi) in panels {
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        let mut acc = Accumulator { evaluations: 3, max_depth };
        let (v, e) = acc.refine(&f, Panel { a: lo, m: mid, b: hi, fa: flo, fm: fmid, fb: fhi, whole }, panel_tol, 0)?;
        total.value += v;
        total.error_estimate += e;
        total.evaluations += acc.evaluations;
    }
    Ok(total)
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

struct Accumulator {
    evaluations: usize,
    max_depth: u32,
}

impl Accumulator {
    fn refine<F: Fn(f64) -> f64>(&mut self, f: &F, p: Panel, tol: f64, depth: u32) -> Result<(f64, f64)> {
        let lm = 0.5 * (p.a + p.m);
        let rm = 0.5 * (p.m + p.b);
        let (flm, frm) = (f(lm), f(rm));
        self.evaluations += 2;

        let left = (p.m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
        let right = (p.b - p.m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
        let delta = left + right - p.whole;

        let unsplittable = lm <= p.a || rm >= p.b || p.m <= lm || rm <= p.m;
        let at_roundoff = delta.abs() <= 64.0 * f64::EPSILON * (left.abs() + right.abs());
        if delta.abs() <= 15.0 * tol || unsplittable || at_roundoff {
            return Ok((left + right + delta / 15.0, delta.abs() / 15.0));
        }
        if !delta.is_finite() {
            return Err(Error::domain(format!("integrand is not finite on [{}, {}]", p.a, p.b)));
        }
        if depth >= self.max_depth {
            return Err(Error::NonConvergence { a: p.a, b: p.b, max_depth: self.max_depth });
        }

        let l = Panel { a: p.a, m: lm, b: p.m, fa: p.fa, fm: flm, fb: p.fm, whole: left };
        let r = Panel { a: p.m, m: rm, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right };
        let (lv, le) = self.refine(f, l, 0.5 * tol, depth + 1)?;
        let (rv, re) = self.refine(f, r, 0.5 * tol, depth + 1)?;
        Ok((lv + rv, le + re))
    }
}

/// Golden-section maximization of a concave function on `[lo, hi]`.
///
/// Returns the midpoint of the final bracket, whose width is at most `tol`.
pub fn maximize_concave<G>(mut g: G, lo: f64, hi: f64, tol: f64) -> Result<OptimizeResult>
where
    G: FnMut(f64) -> f64,
{
    try_maximize_concave(|x| Ok(g(x)), lo, hi, tol)
}

/// As [`maximize_concave`], for objectives whose evaluation can fail.
pub fn try_maximize_concave<G>(mut g: G, lo: f64, hi: f64, tol: f64) -> Result<OptimizeResult>
where
    G: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain(format!("search interval must satisfy lo < hi, got [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("search tolerance must be positive, got {tol}")));
    }
    // 1/phi
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;

    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = g(x1)?;
    let mut f2 = g(x2)?;
    let mut iterations = 0;

    while b - a > tol {
        iterations += 1;
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = g(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = g(x1)?;
        }
    }

    let argmax = 0.5 * (a + b);
    Ok(OptimizeResult {
        argmax,
        max_value: g(argmax)?,
        iterations,
        bracket_width: b - a,
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be at least 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// One axis of a tensor-product grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    /// Sorted breakpoints inside `(lo, hi)`.
    pub kinks: Vec<f64>,
    /// Width of the panels next to each breakpoint and end.
    pub max_panel: f64,
    /// Ratio of neighbouring panel widths moving away from a breakpoint;
    /// 1 keeps every panel at `max_panel` or below.
    pub growth: f64,
}

impl Axis {
    fn panels(&self) -> Vec<(f64, f64)> {
        let mut breaks = vec![self.lo];
        breaks.extend(self.kinks.iter().copied().filter(|k| *k > self.lo && *k < self.hi));
        breaks.push(self.hi);
        breaks.dedup();
        let mut panels = Vec::new();
        for seg in breaks.windows(2) {
            let edges = self.graded(seg[0], seg[1]);
            panels.extend(edges.windows(2).map(|e| (e[0], e[1])));
        }
        panels
    }

    /// Panel edges on `[a, c]`, widening geometrically from both ends.
    fn graded(&self, a: f64, c: f64) -> Vec<f64> {
        let mut left = vec![a];
        let mut right = vec![c];
        let mut w = self.max_panel;
        loop {
            let (l, r) = (*left.last().unwrap(), *right.last().unwrap());
            if r - l <= 2.0 * w {
                if r - l > w {
                    left.push(0.5 * (l + r));
                }
                break;
            }
            left.push(l + w);
            right.push(r - w);
            w *= self.growth;
        }
        left.extend(right.into_iter().rev());
        left
    }

    fn rule(&self, order: usize) -> (Vec<f64>, Vec<f64>) {
        let (gx, gw) = gauss_legendre(order);
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        for (l, r) in self.panels() {
            let half = 0.5 * (r - l);
            let mid = 0.5 * (r + l);
            for (x, w) in gx.iter().zip(&gw) {
                xs.push(mid + half * x);
                ws.push(half * w);
            }
        }
        (xs, ws)
    }
}

/// Product-rule integration of `f` over a box, with a panelled Gauss-Legendre
/// rule of the given order on every axis. The error estimate compares against
/// the half-order rule.
pub fn integrate_tensor<F>(f: F, axes: &[Axis], order: usize) -> Result<QuadratureResult>
where
    F: Fn(&[f64]) -> f64,
{
    if axes.is_empty() {
        return Err(Error::domain("tensor quadrature needs at least one axis"));
    }
    for ax in axes {
        if !(ax.lo < ax.hi) || !(ax.max_panel > 0.0) || !(ax.growth >= 1.0) {
            return Err(Error::domain(format!("invalid axis [{}, {}]", ax.lo, ax.hi)));
        }
    }
    let fine = tensor_sum(&f, axes, order.max(2));
    let coarse = tensor_sum(&f, axes, (order / 2).max(1));
    Ok(QuadratureResult {
        value: fine.0,
        error_estimate: (fine.0 - coarse.0).abs(),
        evaluations: fine.1 + coarse.1,
    })
}

fn tensor_sum<F: Fn(&[f64]) -> f64>(f: &F, axes: &[Axis], order: usize) -> (f64, usize) {
    let rules: Vec<(Vec<f64>, Vec<f64>)> = axes.iter().map(|a| a.rule(order)).collect();
    let dims = rules.len();
    let mut idx = vec![0usize; dims];
    let mut point = vec![0.0; dims];
    let mut sum = 0.0;
    let mut count = 0;
    'outer: loop {
        let mut w = 1.0;
        for d in 0..dims {
            point[d] = rules[d].0[idx[d]];
            w *= rules[d].1[idx[d]];
        }
        sum += w * f(&point);
        count += 1;
        for d in (0..dims).rev() {
            idx[d] += 1;
            if idx[d] < rules[d].0.len() {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    (sum, count)
}
