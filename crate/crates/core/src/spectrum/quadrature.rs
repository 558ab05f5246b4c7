//! `(1/2π)∫_{−π}^{π} f(θ) dθ` by composite Gauss-Legendre panels.
//!
//! The mesh starts as `panel_count` uniform panels with the declared
//! singular points added as breakpoints. Each panel that ends on a singular
//! point is split geometrically (ratio 1/2, `singularity_refinement_depth`
//! levels) toward it, which handles integrable logarithmic singularities.
//! On top of that mesh the rule is globally adaptive: every panel carries
//! the error estimate `|G(a,b) − G(a,m) − G(m,b)|` and the worst panel is
//! bisected until the summed estimate meets `abs_tolerance`.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use crate::{Error, Result};
#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

/// Points per Gauss-Legendre panel.
const RULE_ORDER: usize = 10;
/// Refinement budget; exceeding it is reported as non-convergence.
const MAX_PANELS: usize = 20_000;

#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Uniform panels across `[−π, π]` before any refinement (at least 8).
    pub panel_count: usize,
    /// Geometric subdivision levels toward each singular point.
    pub singularity_refinement_depth: usize,
    /// Absolute tolerance on the returned mean.
    pub abs_tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            panel_count: 64,
            singularity_refinement_depth: 40,
            abs_tolerance: 1e-10,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tolerance(abs_tolerance: f64) -> Self {
        Self {
            abs_tolerance,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.panel_count < 8 {
            return Err(Error::InvalidInput("quadrature needs at least 8 panels"));
        }
        if !(self.abs_tolerance > 0.0 && self.abs_tolerance.is_finite()) {
            return Err(Error::InvalidInput("quadrature tolerance must be positive"));
        }
        Ok(())
    }
}

/// Nodes and weights on `[−1, 1]`, by Newton iteration on `P_n`.
struct GaussLegendre {
    nodes: [f64; RULE_ORDER],
    weights: [f64; RULE_ORDER],
}

impl GaussLegendre {
    fn new() -> Self {
        let n = RULE_ORDER;
        let mut nodes = [0.0; RULE_ORDER];
        let mut weights = [0.0; RULE_ORDER];
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Self { nodes, weights }
    }

    fn panel(&self, f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum();
        half * sum
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed composite rule: `panels` equal Gauss-Legendre panels on `[a, b]`.
pub fn composite_gauss_legendre(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    panels: usize,
) -> f64 {
    let rule = GaussLegendre::new();
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + h * k as f64;
            let hi = if k + 1 == panels { b } else { lo + h };
            rule.panel(&mut f, lo, hi)
        })
        .sum()
}

/// `(1/2π)∫_{−π}^{π} f(θ) dθ`, with `singular_points` in `[−π, π]` marking
/// integrable singularities.
pub fn mean_integral(
    f: impl FnMut(f64) -> f64,
    config: &QuadratureConfig,
    singular_points: &[f64],
) -> Result<f64> {
    config.validate()?;
    let span = 2.0 * PI;
    let integral = integrate(
        f,
        -PI,
        PI,
        config.panel_count,
        config,
        singular_points,
        config.abs_tolerance * span,
    )?;
    Ok(integral / span)
}

/// Same mean for an even integrand, computed as `(1/π)∫_0^π f(θ) dθ`.
/// `singular_points` are the ones in `[0, π]`.
pub fn mean_integral_even(
    f: impl FnMut(f64) -> f64,
    config: &QuadratureConfig,
    singular_points: &[f64],
) -> Result<f64> {
    config.validate()?;
    let panels = config.panel_count.div_ceil(2);
    let integral = integrate(
        f,
        0.0,
        PI,
        panels,
        config,
        singular_points,
        config.abs_tolerance * PI,
    )?;
    Ok(integral / PI)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    err: f64,
}

impl Panel {
    fn new(
        rule: &GaussLegendre,
        f: &mut impl FnMut(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
    ) -> Self {
        let m = 0.5 * (a + b);
        let left = rule.panel(f, a, m);
        let right = rule.panel(f, m, b);
        Self {
            a,
            b,
            left,
            right,
            err: (left + right - whole).abs(),
        }
    }

    fn value(&self) -> f64 {
        self.left + self.right
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    panels: usize,
    config: &QuadratureConfig,
    singular_points: &[f64],
    tol: f64,
) -> Result<f64> {
    let rule = GaussLegendre::new();
    let h = (b - a) / panels as f64;
    let mut breaks: Vec<f64> = (0..=panels)
        .map(|k| if k == panels { b } else { a + h * k as f64 })
        .collect();
    let mut singular: Vec<f64> = singular_points
        .iter()
        .copied()
        .filter(|s| *s >= a && *s <= b)
        .collect();
    singular.sort_by(f64::total_cmp);
    breaks.extend(singular.iter().copied());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (b - a));

    let near = |x: f64| singular.iter().any(|s| (x - s).abs() <= 1e-14 * (b - a));
    let mut mesh = Vec::new();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        match (near(lo), near(hi)) {
            (false, false) => mesh.push((lo, hi)),
            (true, false) => graded(&mut mesh, lo, hi, config.singularity_refinement_depth),
            (false, true) => graded(&mut mesh, hi, lo, config.singularity_refinement_depth),
            (true, true) => {
                let mid = 0.5 * (lo + hi);
                graded(&mut mesh, lo, mid, config.singularity_refinement_depth);
                graded(&mut mesh, hi, mid, config.singularity_refinement_depth);
            }
        }
    }

    let mut heap = BinaryHeap::with_capacity(mesh.len() * 2);
    for (lo, hi) in mesh {
        let whole = rule.panel(&mut f, lo, hi);
        heap.push(Panel::new(&rule, &mut f, lo, hi, whole));
    }

    loop {
        let total_err: f64 = heap.iter().map(|p| p.err).sum();
        if !total_err.is_finite() {
            return Err(Error::InvalidInput(
                "integrand is not finite on the quadrature mesh",
            ));
        }
        if total_err <= tol {
            break;
        }
        // split the worst panels until the running estimate drops below tol,
        // then re-sum from scratch to avoid drift
        let mut running = total_err;
        while running > tol {
            if heap.len() >= MAX_PANELS {
                return Err(Error::NoConvergence {
                    what: "quadrature",
                    achieved: running / (b - a),
                    requested: tol / (b - a),
                });
            }
            let Some(worst) = heap.pop() else { break };
            let m = 0.5 * (worst.a + worst.b);
            let l = Panel::new(&rule, &mut f, worst.a, m, worst.left);
            let r = Panel::new(&rule, &mut f, m, worst.b, worst.right);
            running += l.err + r.err - worst.err;
            heap.push(l);
            heap.push(r);
        }
    }
    // sum small contributions first
    let mut values: Vec<f64> = heap.iter().map(Panel::value).collect();
    values.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    Ok(values.iter().sum())
}

/// Splits `[s, far]` (either orientation) geometrically toward `s`.
fn graded(mesh: &mut Vec<(f64, f64)>, s: f64, far: f64, depth: usize) {
    let mut outer = far;
    let mut width = far - s;
    for _ in 0..depth {
        width *= 0.5;
        let inner = s + width;
        mesh.push(ordered(inner, outer));
        outer = inner;
    }
    mesh.push(ordered(s, outer));
}

fn ordered(x: f64, y: f64) -> (f64, f64) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}
