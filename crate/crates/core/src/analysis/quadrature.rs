//! Gauss–Legendre rules and expectations of scalar functions of one random coordinate.

use std::f64::consts::PI;

use crate::model::EnsembleLaw;

/// Gaussian integrals are truncated to `[-CUTOFF, CUTOFF]`; the neglected mass is below `1e-32`.
pub(crate) const CUTOFF: f64 = 12.0;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a quadrature rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess for the i-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule: `∫_lo^hi f` split at `breaks`, `nodes` points per panel.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, breaks: &[f64], nodes: usize) -> f64 {
    let (x, w) = gauss_legendre(nodes);
    let mut edges = vec![lo];
    edges.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
    edges.push(hi);
    edges.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let panel: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * f(mid + half * xi)).sum();
        total += half * panel;
    }
    total
}

pub(crate) fn std_normal_pdf(g: f64) -> f64 {
    (-0.5 * g * g).exp() / (2.0 * PI).sqrt()
}

/// `E[f(g)]` for `g ~ N(0,1)` with `f` smooth between `breaks`.
pub fn gaussian_expectation(f: impl Fn(f64) -> f64, breaks: &[f64], nodes: usize) -> f64 {
    // eight fixed panels keep each piece of the Gaussian well resolved
    let mut all: Vec<f64> = (1..8).map(|k| -CUTOFF + 3.0 * k as f64).collect();
    all.extend_from_slice(breaks);
    integrate(|g| f(g) * std_normal_pdf(g), -CUTOFF, CUTOFF, &all, nodes)
}

/// `E[f(a)]` for a single coordinate of the ensemble; `f` is assumed smooth.
pub fn law_expectation(law: EnsembleLaw, f: impl Fn(f64) -> f64) -> f64 {
    match law {
        EnsembleLaw::Gaussian => gaussian_expectation(f, &[], 64),
        EnsembleLaw::Rademacher => 0.5 * (f(1.0) + f(-1.0)),
        EnsembleLaw::UniformScaled => {
            let r = 3f64.sqrt();
            integrate(f, -r, r, &[-r / 2.0, 0.0, r / 2.0], 32) / (2.0 * r)
        }
    }
}
