//! Acceptance criteria A1–A14. Runs sequentially (custom harness) so wall-clock limits
//! are measured without contention; prints one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nlcs::analysis::{
    dither_identity, mean_width_global, mean_width_local, mu_scalar, outlier_split, target_mismatch, DitherIdentity,
    ScalarMethod, WidthSet,
};
use nlcs::geometry::project;
use nlcs::harness::{run_records, ExperimentConfig, RunOptions, TrialRecord};
use nlcs::linalg::{dot, norm2, sum_squares};
use nlcs::model::{gen_signal, ConstraintSet, EnsembleLaw, Link, ObservationModel, SignalFamily, SignalSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn run(json: &str) -> Vec<TrialRecord> {
    let cfg = ExperimentConfig::from_json(json).expect("acceptance config is valid");
    run_records(&cfg, RunOptions::default()).expect("acceptance run succeeds")
}

fn medians_by_m(recs: &[TrialRecord], metric: impl Fn(&TrialRecord) -> f64) -> Vec<(usize, f64)> {
    let mut ms: Vec<usize> = recs.iter().map(|r| r.m).collect();
    ms.dedup();
    ms.into_iter()
        .map(|m| (m, median(recs.iter().filter(|r| r.m == m).map(&metric).collect())))
        .collect()
}

fn a1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut pass = true;
    for (i, delta) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        for (j, s) in [-3.3, 0.0, 0.7, 2.0 * delta].into_iter().enumerate() {
            let c = dither_identity(DitherIdentity::Quantizer { delta }, s, 1_000_000, (10 * i + j) as u64).unwrap();
            let tol = 5e-3 * f64::max(1.0, s.abs());
            worst = worst.max(c.residual.abs() / tol);
            pass &= c.residual.abs() <= tol;
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(10);
    outcome(pass, format!("max |residual|/tol = {worst:.3}, runtime {:.2}s (< 10s)", elapsed.as_secs_f64()))
}

fn a2() -> Outcome {
    let mut worst = 0.0f64;
    let mut pass = true;
    for (i, lambda) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        for (j, frac) in [-1.0, -0.5, 0.0, 0.3, 1.0].into_iter().enumerate() {
            let c = dither_identity(DitherIdentity::Sign { lambda }, frac * lambda, 1_000_000, (100 + 10 * i + j) as u64)
                .unwrap();
            worst = worst.max(c.residual.abs());
            pass &= c.residual.abs() <= 5e-3;
        }
    }
    outcome(pass, format!("max |E sign(s+τ) − s/λ| = {worst:.2e} (≤ 5e-3)"))
}

fn a3() -> Outcome {
    let q = ScalarMethod::Quadrature { nodes: 64 };
    let sign = mu_scalar(Link::Sign, q).unwrap().mu;
    let err = (sign - (2.0 / std::f64::consts::PI).sqrt()).abs();
    let mu2 = mu_scalar(Link::Modulo { lambda: 2.0 }, q).unwrap().mu;
    outcome(
        err <= 1e-10 && (0.5..=1.0).contains(&mu2),
        format!("|μ_sign − √(2/π)| = {err:.1e} (≤ 1e-10); μ_λ(λ=2) = {mu2:.6} ∈ [1/2, 1]"),
    )
}

fn a4() -> Outcome {
    let x = gen_signal(&SignalSpec::new(SignalFamily::UnitSphere, 16, 4), 404).unwrap();
    let xd = x.to_dense();
    let n = 100_000;
    let law = EnsembleLaw::Gaussian;
    let lin = target_mismatch(&ObservationModel::Linear, law, &x, &xd, n, 1).unwrap();
    let mu = (2.0 / std::f64::consts::PI).sqrt();
    let tx: Vec<f64> = xd.iter().map(|v| mu * v / norm2(&xd)).collect();
    let ob = target_mismatch(&ObservationModel::OneBit, law, &x, &tx, n, 2).unwrap();
    let (t, r) = (0.1f64, 1.0f64);
    let lambda = 8.0 * r * (std::f64::consts::E / t).ln().sqrt();
    let tx: Vec<f64> = xd.iter().map(|v| v / lambda).collect();
    let dith = target_mismatch(&ObservationModel::OneBitDither { lambda }, law, &x, &tx, n, 3).unwrap();
    let pass = lin.rho_hat <= 3.0 * lin.stderr
        && ob.rho_hat <= 3.0 * ob.stderr
        && dith.rho_hat <= t / 32.0 + 3.0 * dith.stderr;
    outcome(
        pass,
        format!(
            "linear ρ̂={:.2e}/3se={:.2e}; one-bit ρ̂={:.2e}/3se={:.2e}; dithered (λ={lambda:.3}) ρ̂={:.2e} ≤ {:.2e}",
            lin.rho_hat,
            3.0 * lin.stderr,
            ob.rho_hat,
            3.0 * ob.stderr,
            dith.rho_hat,
            t / 32.0 + 3.0 * dith.stderr
        ),
    )
}

fn a5() -> Outcome {
    let start = Instant::now();
    let recs = run(
        r#"{
        "model": {"kind": "linear"},
        "ensemble": {"law": "gaussian", "p": 256},
        "signal": {"family": "sparse", "p": 256, "s": 5},
        "constraint": {"kind": "l1_ball", "radius": "tuned"},
        "m_grid": [120],
        "trials": 50,
        "solver": {"max_iters": 20000, "rel_tol": 1e-12},
        "master_seed": 5
    }"#,
    );
    let elapsed = start.elapsed();
    let ok = recs.iter().filter(|r| r.err_l2 <= 1e-5).count();
    outcome(
        ok * 10 >= 9 * recs.len() && elapsed < Duration::from_secs(60),
        format!("{ok}/{} trials with ‖ẑ − x̊‖₂ ≤ 1e-5 (≥ 90%), runtime {:.2}s (< 60s)", recs.len(), elapsed.as_secs_f64()),
    )
}

const ONE_BIT_A6: &str = r#"{
    "model": {"kind": "one_bit"},
    "ensemble": {"law": "gaussian", "p": 128},
    "signal": {"family": "unit_sphere", "p": 128, "s": 4},
    "constraint": {"kind": "l1_ball", "radius": "tuned"},
    "m_grid": [250, 500, 1000, 2000, 4000, 8000],
    "trials": 20,
    "master_seed": 6
}"#;

fn a6() -> Outcome {
    let start = Instant::now();
    let recs = run(ONE_BIT_A6);
    let elapsed = start.elapsed();
    let med = medians_by_m(&recs, |r| r.err_direction);
    let decreasing = med.windows(2).all(|w| w[1].1 < w[0].1);
    let pts: Vec<(f64, f64)> = med.iter().map(|&(m, e)| (m as f64, e)).collect();
    let slope = nlcs::analysis::fit_rate(&pts, None).unwrap();
    let meds: Vec<String> = med.iter().map(|(m, e)| format!("{m}:{e:.4}")).collect();
    outcome(
        decreasing && (-0.75..=-0.2).contains(&slope) && elapsed < Duration::from_secs(300),
        format!(
            "medians [{}] strictly decreasing={decreasing}, slope {slope:.3} ∈ [−0.75, −0.2], runtime {:.1}s (< 300s)",
            meds.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn a7() -> Outcome {
    let base = ONE_BIT_A6.replace("[250, 500, 1000, 2000, 4000, 8000]", "[4000]");
    let clean = median(run(&base).iter().map(|r| r.err_direction).collect());
    let with = |mode: &str| {
        let cfg = base.replace(
            r#""master_seed": 6"#,
            &format!(r#""master_seed": 6, "corruption": {{"bitflip_frac": 0.05, "adversarial_mode": "{mode}"}}"#),
        );
        median(run(&cfg).iter().map(|r| r.err_direction).collect())
    };
    let flipped = with("random");
    let aligned = with("aligned_with_signal");
    outcome(
        flipped - clean <= 0.3,
        format!(
            "median error β=0: {clean:.4}, β=0.05 random: {flipped:.4} (increase {:.4} ≤ 0.3); aligned flips (info): {aligned:.4}",
            flipped - clean
        ),
    )
}

fn a8() -> Outcome {
    let cfg = |model: &str| {
        format!(
            r#"{{
            "model": {model},
            "ensemble": {{"law": "gaussian", "p": 128}},
            "signal": {{"family": "unit_sphere", "p": 128, "s": 4}},
            "constraint": {{"kind": "l1_ball", "radius": "tuned"}},
            "m_grid": [2000],
            "trials": 20,
            "master_seed": 8
        }}"#
        )
    };
    let med = |model: String| median(run(&cfg(&model)).iter().map(|r| r.err_l2).collect());
    let deltas = [2.0, 0.5, 0.125];
    let errs: Vec<f64> = deltas
        .iter()
        .map(|d| med(format!(r#"{{"kind": "multi_bit_dither", "delta": {d}}}"#)))
        .collect();
    // linear measurements carrying noise of the same variance as the dithered quantizer error
    let sigma = 0.125 * (2.0f64 / 3.0).sqrt();
    let linear = med(format!(r#"{{"kind": "linear_gauss_noise", "sigma": {sigma}}}"#));
    let monotone = errs.windows(2).all(|w| w[1] <= w[0]);
    let ratio = errs[2] / linear;
    outcome(
        monotone && ratio <= 1.5,
        format!(
            "median errors δ=2: {:.4}, δ=0.5: {:.4}, δ=0.125: {:.4} (non-increasing={monotone}); linear σ={sigma:.4}: {linear:.4}, ratio {ratio:.3} ≤ 1.5",
            errs[0], errs[1], errs[2]
        ),
    )
}

fn random_vec(rng: &mut ChaCha8Rng, p: usize, scale: f64) -> Vec<f64> {
    (0..p).map(|_| scale * rng.random_range(-1.0..1.0)).collect()
}

/// Closest point of a 2-D set by dense search along its boundary (or `x` itself if inside).
fn boundary_search(set: &ConstraintSet, x: &[f64]) -> Vec<f64> {
    if set.contains(x, 0.0) {
        return x.to_vec();
    }
    let n = 400_000;
    let mut best = (f64::INFINITY, vec![0.0, 0.0]);
    let mut consider = |v: [f64; 2]| {
        let d = (v[0] - x[0]).powi(2) + (v[1] - x[1]).powi(2);
        if d < best.0 {
            best = (d, v.to_vec());
        }
    };
    match *set {
        ConstraintSet::L1Ball { radius: r } | ConstraintSet::L2Ball { radius: r } => {
            for k in 0..n {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                let (c, s) = (th.cos(), th.sin());
                let scale = if matches!(set, ConstraintSet::L1Ball { .. }) { r / (c.abs() + s.abs()) } else { r };
                consider([scale * c, scale * s]);
            }
        }
        ConstraintSet::Box { lo, hi } => {
            for k in 0..=n {
                let u = lo + (hi - lo) * k as f64 / n as f64;
                consider([u, lo]);
                consider([u, hi]);
                consider([lo, u]);
                consider([hi, u]);
            }
        }
        ConstraintSet::TvBall { radius: r } => {
            // boundary lines v₂ = v₁ ± r, searched in a window around x
            let c = 0.5 * (x[0] + x[1]);
            for k in 0..=n {
                let u = c - 3.0 + 6.0 * k as f64 / n as f64;
                consider([u, u + r]);
                consider([u, u - r]);
            }
        }
        ConstraintSet::FullSpace => unreachable!("every point is inside"),
    }
    best.1
}

fn a9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures: Vec<String> = Vec::new();
    let families = |rng: &mut ChaCha8Rng| {
        let r = rng.random_range(0.2..3.0);
        let lo = rng.random_range(-1.0..0.5);
        vec![
            ConstraintSet::L1Ball { radius: r },
            ConstraintSet::L2Ball { radius: r },
            ConstraintSet::TvBall { radius: r },
            ConstraintSet::Box { lo, hi: lo + rng.random_range(0.0..1.5) },
            ConstraintSet::FullSpace,
        ]
    };
    let mut worst_vi = f64::NEG_INFINITY;
    for fam in 0..5 {
        for _ in 0..10_000 {
            let set = families(&mut rng)[fam];
            let p = rng.random_range(1..40);
            let scale = rng.random_range(0.1..5.0);
            let x = random_vec(&mut rng, p, scale);
            let y = random_vec(&mut rng, p, scale);
            let px = project(&set, &x).point;
            let py = project(&set, &y).point;
            let ppx = project(&set, &px).point;
            if nlcs::linalg::dist2(&ppx, &px) > 1e-8 {
                failures.push(format!("{set:?}: idempotence"));
            }
            if nlcs::linalg::dist2(&px, &py) > nlcs::linalg::dist2(&x, &y) + 1e-8 {
                failures.push(format!("{set:?}: expansive"));
            }
            if set.residual(&px) > 1e-10 {
                failures.push(format!("{set:?}: infeasible output"));
            }
            // an interior point: shrink a feasible point towards the set's center
            let inner: Vec<f64> = match set {
                ConstraintSet::Box { lo, hi } => px.iter().map(|v| 0.5 * (v + 0.5 * (lo + hi))).collect(),
                _ => px.iter().map(|v| 0.5 * v).collect(),
            };
            if project(&set, &inner).point != inner {
                failures.push(format!("{set:?}: interior point moved"));
            }
            let r: Vec<f64> = x.iter().zip(&px).map(|(a, b)| a - b).collect();
            for z in [py.clone(), inner.clone()] {
                let d: Vec<f64> = z.iter().zip(&px).map(|(a, b)| a - b).collect();
                let vi = dot(&r, &d);
                worst_vi = worst_vi.max(vi);
                if vi > 1e-8 {
                    failures.push(format!("{set:?}: variational inequality {vi:.2e}"));
                }
            }
        }
    }
    let mut worst_grid = 0.0f64;
    for fam in 0..4 {
        for _ in 0..100 {
            let set = families(&mut rng)[fam];
            let x = random_vec(&mut rng, 2, 3.0);
            let px = project(&set, &x).point;
            let g = boundary_search(&set, &x);
            let d = nlcs::linalg::dist2(&px, &g);
            worst_grid = worst_grid.max(d);
            if d > 1e-4 {
                failures.push(format!("{set:?}: grid mismatch {d:.2e} at {x:?}"));
            }
        }
    }
    let first = failures.first().cloned().unwrap_or_default();
    outcome(
        failures.is_empty(),
        format!(
            "5 families × 10⁴ instances, {} violations {first}; max VI {worst_vi:.1e}; p=2 grid max deviation {worst_grid:.1e} (≤ 1e-4)",
            failures.len()
        ),
    )
}

fn a10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_ulps = 0.0f64;
    let mut edge_ok = true;
    for _ in 0..100_000 {
        let m = rng.random_range(1..64);
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let w = random_vec(&mut rng, m, scale);
        let m0 = rng.random_range(0..=m);
        let (top, tail) = outlier_split(&w, m0).unwrap();
        let total = sum_squares(w.iter().copied());
        let ulps = (top * top + tail * tail - total).abs() / (f64::EPSILON * total);
        worst_ulps = worst_ulps.max(ulps);
        let (t0, s0) = outlier_split(&w, 0).unwrap();
        edge_ok &= t0 == 0.0 && s0 == total.sqrt() && (s0 - norm2(&w)).abs() <= 4.0 * f64::EPSILON * s0;
    }
    outcome(
        worst_ulps <= 8.0 && edge_ok,
        format!("max |top²+tail²−‖w‖²| = {worst_ulps:.2} ulp (≤ 8) over 10⁵ vectors; m0=0 edge exact={edge_ok}"),
    )
}

fn a11() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for (p, exact) in [(2usize, 1.2533141373155003), (100, 9.975031639551357)] {
        let w = mean_width_global(&WidthSet::Sphere { p }, 100_000, 11 + p as u64).unwrap();
        pass &= (w.value - exact).abs() <= 3.0 * w.stderr;
        lines.push(format!("sphere p={p}: {:.4}±{:.4} vs {exact:.4}", w.value, w.stderr));
    }
    let l1 = WidthSet::Constraint {
        set: ConstraintSet::L1Ball { radius: 1.0 },
        p: 1,
    };
    let w = mean_width_global(&l1, 100_000, 12).unwrap();
    let exact = (2.0 / std::f64::consts::PI).sqrt();
    pass &= (w.value - exact).abs() <= 3.0 * w.stderr;
    lines.push(format!("ℓ₁ p=1: {:.4}±{:.4} vs {exact:.4}", w.value, w.stderr));
    let p = 64;
    for s in [1usize, 2, 4] {
        let c = gen_signal(&SignalSpec::new(SignalFamily::Sparse, p, s), 13 + s as u64).unwrap().to_dense();
        let k = ConstraintSet::L1Ball { radius: 1.0 };
        let w = mean_width_local(&k, &c, 1e-2, 4000, 14 + s as u64).unwrap();
        let bound = 4.0 * ((s as f64) * (2.0 * p as f64 / s as f64).ln()).sqrt();
        pass &= w.value <= bound;
        lines.push(format!("local s={s}: {:.3} ≤ {bound:.3}", w.value));
    }
    outcome(pass, lines.join("; "))
}

fn a12() -> Outcome {
    let recs = run(
        r#"{
        "model": {"kind": "linear"},
        "ensemble": {"law": "gaussian", "p": 200},
        "signal": {"family": "gradient_sparse", "p": 200, "s": 3, "delta_sep": 0.8, "r_tune": 0.1},
        "constraint": {"kind": "tv_ball", "radius": "tuned"},
        "m_grid": [150],
        "trials": 20,
        "solver": {"max_iters": 20000},
        "master_seed": 12
    }"#,
    );
    let med = median(recs.iter().map(|r| r.err_l2).collect());
    outcome(med <= 0.05, format!("median ‖ẑ − x̊‖₂ = {med:.2e} (≤ 0.05) over {} trials", recs.len()))
}

fn a13() -> Outcome {
    let recs = run(
        r#"{
        "model": {"kind": "var_select", "link": "linear", "s": 5},
        "ensemble": {"law": "gaussian", "p": 100},
        "signal": {"family": "support", "p": 100, "s": 5},
        "constraint": {"kind": "l2_ball", "radius": 2.0},
        "m_grid": [2000],
        "trials": 25,
        "master_seed": 13
    }"#,
    );
    let ok = recs.iter().filter(|r| r.support_match == Some(true)).count();
    outcome(ok * 5 >= 4 * recs.len(), format!("{ok}/{} exact support recoveries (≥ 80%)", recs.len()))
}

fn a14() -> Outcome {
    let recs = run(
        r#"{
        "model": {"kind": "modulo", "lambda": 2.0},
        "ensemble": {"law": "gaussian", "p": 64},
        "signal": {"family": "unit_sphere", "p": 64, "s": 3},
        "constraint": {"kind": "l1_ball", "radius": "tuned"},
        "m_grid": [4000],
        "trials": 20,
        "master_seed": 14
    }"#,
    );
    let med = median(recs.iter().map(|r| r.err_l2).collect());
    let mu = mu_scalar(Link::Modulo { lambda: 2.0 }, ScalarMethod::default()).unwrap().mu;
    outcome(med <= 0.15, format!("median ‖ẑ − μ_λx̊‖₂ = {med:.4} (≤ 0.15), μ_λ = {mu:.4}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [Criterion; 14] = [
        ("A1", a1),
        ("A2", a2),
        ("A3", a3),
        ("A4", a4),
        ("A5", a5),
        ("A6", a6),
        ("A7", a7),
        ("A8", a8),
        ("A9", a9),
        ("A10", a10),
        ("A11", a11),
        ("A12", a12),
        ("A13", a13),
        ("A14", a14),
    ];
    let mut failed = Vec::new();
    for (id, f) in criteria {
        if filter.as_deref().is_some_and(|flt| flt != id) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        println!(
            "{id:<4} {} [{:.1}s] {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {}", failed.join(", "));
        std::process::exit(1);
    }
}
