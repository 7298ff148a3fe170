//! Total-variation ball projection built on an exact 1-D TV proximal operator.

/// Exact minimizer of `½‖v − x‖² + θ‖Dv‖₁` (Condat's direct taut-string algorithm).
///
/// Runs in `O(n)` on typical inputs; output is piecewise constant.
pub fn tv_prox(input: &[f64], theta: f64) -> Vec<f64> {
    let n = input.len();
    let mut out = vec![0.0; n];
    tv_prox_into(input, theta, &mut out);
    out
}

pub fn tv_prox_into(input: &[f64], theta: f64, out: &mut [f64]) {
    let n = input.len();
    debug_assert_eq!(out.len(), n);
    if n == 0 {
        return;
    }
    if theta <= 0.0 || n == 1 {
        out.copy_from_slice(input);
        return;
    }
    let lambda = theta;
    let twolambda = 2.0 * lambda;
    let minlambda = -lambda;
    let (mut k, mut k0, mut kplus, mut kminus) = (0usize, 0usize, 0usize, 0usize);
    let mut umin = lambda;
    let mut umax = minlambda;
    let mut vmin = input[0] - lambda;
    let mut vmax = input[0] + lambda;
    loop {
        while k == n - 1 {
            if umin < 0.0 {
                loop {
                    out[k0] = vmin;
                    k0 += 1;
                    if k0 > kminus {
                        break;
                    }
                }
                k = k0;
                kminus = k0;
                vmin = input[k0];
                umin = lambda;
                umax = vmin + umin - vmax;
            } else if umax > 0.0 {
                loop {
                    out[k0] = vmax;
                    k0 += 1;
                    if k0 > kplus {
                        break;
                    }
                }
                k = k0;
                kplus = k0;
                vmax = input[k0];
                umax = minlambda;
                umin = vmax + umax - vmin;
            } else {
                vmin += umin / (k - k0 + 1) as f64;
                loop {
                    out[k0] = vmin;
                    k0 += 1;
                    if k0 > k {
                        break;
                    }
                }
                return;
            }
        }
        umin += input[k + 1] - vmin;
        if umin < minlambda {
            loop {
                out[k0] = vmin;
                k0 += 1;
                if k0 > kminus {
                    break;
                }
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmin = input[k0];
            vmax = vmin + twolambda;
            umin = lambda;
            umax = minlambda;
            continue;
        }
        umax += input[k + 1] - vmax;
        if umax > lambda {
            loop {
                out[k0] = vmax;
                k0 += 1;
                if k0 > kplus {
                    break;
                }
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmax = input[k0];
            vmin = vmax - twolambda;
            umin = lambda;
            umax = minlambda;
        } else {
            k += 1;
            if umin >= lambda {
                kminus = k;
                vmin += (umin - lambda) / (kminus - k0 + 1) as f64;
                umin = lambda;
            }
            if umax <= minlambda {
                kplus = k;
                vmax += (umax + lambda) / (kplus - k0 + 1) as f64;
                umax = minlambda;
            }
        }
    }
}

/// Smallest `θ` at which the TV prox of `x` collapses to the constant mean vector.
pub fn collapse_threshold(x: &[f64]) -> f64 {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let mut run = 0.0f64;
    let mut best = 0.0f64;
    for v in &x[..x.len().saturating_sub(1)] {
        run += v - mean;
        best = best.max(run.abs());
    }
    best
}

const MAX_BISECTIONS: usize = 200;

/// Projection onto `{v : ‖Dv‖₁ ≤ radius}` by bisection on the multiplier of the TV
/// constraint. Returns the point and the number of prox evaluations.
pub(crate) fn project_tv_ball(x: &[f64], radius: f64) -> (Vec<f64>, usize) {
    use crate::linalg::tv_norm;
    let tol = 1e-12 * radius.max(1.0);
    let mut hi = collapse_threshold(x);
    let mut lo = 0.0;
    let mut tv_lo = tv_norm(x);
    let mut tv_hi = 0.0;
    let mut best = tv_prox(x, hi);
    let mut buf = vec![0.0; x.len()];
    let mut evals = 1;
    for _ in 0..MAX_BISECTIONS {
        // the prox path is piecewise linear in θ: try the secant point first
        let secant = lo + (tv_lo - radius) / (tv_lo - tv_hi) * (hi - lo);
        let mid = if secant > lo && secant < hi { secant } else { 0.5 * (lo + hi) };
        tv_prox_into(x, mid, &mut buf);
        evals += 1;
        let tv = tv_norm(&buf);
        if tv > radius {
            lo = mid;
            tv_lo = tv;
        } else {
            hi = mid;
            tv_hi = tv;
            std::mem::swap(&mut best, &mut buf);
            if radius - tv <= tol {
                break;
            }
        }
        // a bisection step to guarantee the bracket shrinks
        let mid = 0.5 * (lo + hi);
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
        tv_prox_into(x, mid, &mut buf);
        evals += 1;
        let tv = tv_norm(&buf);
        if tv > radius {
            lo = mid;
            tv_lo = tv;
        } else {
            hi = mid;
            tv_hi = tv;
            std::mem::swap(&mut best, &mut buf);
            if radius - tv <= tol {
                break;
            }
        }
    }
    (best, evals)
}
