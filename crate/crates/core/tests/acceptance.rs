//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gue_edge::airy_ops::{self, f2_cdf, Discretization, F2Method};
use gue_edge::edgeworth::{self, Ec2Variant, EdgeworthTerms};
use gue_edge::gue_mc::{self, SamplerConfig};
use gue_edge::hermite_n::{self, cdf_fredholm, cdf_via_qp, FiniteNState, ScalingMap};
use gue_edge::painleve2;
use gue_edge::Result;

type Criterion = fn() -> Result<Outcome>;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

/// erf by its Maclaurin series; adequate to ~1e-14 for |t| <= 3.
fn erf_series(t: f64) -> f64 {
    let mut term = t;
    let mut sum = t;
    let mut k = 0.0;
    while term.abs() > 1e-18 * sum.abs().max(1e-300) {
        k += 1.0;
        term *= -t * t / k;
        sum += term / (2.0 * k + 1.0);
    }
    2.0 / std::f64::consts::PI.sqrt() * sum
}

/// Least-squares slope of log y against log x.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `Σ_{k<n} φ_k(x) φ_k(y)` by the three-term recurrence with running
/// rescaling so that `e^{-x²/2}` never underflows.
fn kernel_direct_sum(n: usize, x: f64, y: f64) -> f64 {
    let (mut ax0, mut ax1) = (0.0, 1.0);
    let (mut ay0, mut ay1) = (0.0, 1.0);
    let mut log_scale = -0.5 * (x * x + y * y) - 0.5 * std::f64::consts::PI.ln();
    let mut sum = 0.0;
    for k in 0..n {
        sum += ax1 * ay1;
        let kf = k as f64;
        let c1 = (2.0 / (kf + 1.0)).sqrt();
        let c0 = (kf / (kf + 1.0)).sqrt();
        let nx = c1 * x * ax1 - c0 * ax0;
        let ny = c1 * y * ay1 - c0 * ay0;
        (ax0, ax1, ay0, ay1) = (ax1, nx, ay1, ny);
        for (a0, a1) in [(&mut ax0, &mut ax1), (&mut ay0, &mut ay1)] {
            if a1.abs() > 1e150 {
                *a0 *= 1e-150;
                *a1 *= 1e-150;
                sum *= 1e-150;
                log_scale += 150.0 * std::f64::consts::LN_10;
            }
        }
    }
    sum * log_scale.exp()
}

fn c1_tracy_widom() -> Result<Outcome> {
    let start = Instant::now();
    let grid = painleve2::hastings_mcleod();
    let mut worst: f64 = 0.0;
    for s in [-8.0, -6.0, -4.0, -2.0, 0.0, 2.0, 4.0] {
        worst =
            worst.max((f2_cdf(s, F2Method::Determinant)? - painleve2::f2_from_q(grid, s)?).abs());
    }
    let secs = start.elapsed();
    outcome(
        worst < 1e-7 && secs < Duration::from_secs(60),
        format!("max |det - Painleve II| = {worst:.2e} (< 1e-7), {secs:.2?} (< 60 s)"),
    )
}

fn c2_finite_n() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [1usize, 2, 4, 8, 16] {
        for c in [0.0, 1.0] {
            for s in [-2.0, 0.0, 2.0] {
                let t = ScalingMap::new(n, c)?.tau(s);
                worst = worst.max((cdf_fredholm(n, t)? - cdf_via_qp(n, t)?).abs());
            }
        }
    }
    let secs = start.elapsed();
    outcome(
        worst < 1e-7 && secs < Duration::from_secs(300),
        format!("max |Fredholm - q_n p_n integral| = {worst:.2e} (< 1e-7), {secs:.2?} (< 5 min)"),
    )
}

fn c3_closed_forms() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let t = -2.25 + 0.5 * k as f64;
        worst = worst.max((cdf_fredholm(1, t)? - 0.5 * (1.0 + erf_series(t))).abs());
    }
    let median = (cdf_fredholm(1, 0.0)? - 0.5).abs();
    outcome(
        worst < 1e-10 && median < 1e-12,
        format!("max |F_1 - (1 + erf)/2| = {worst:.2e} (< 1e-10), |F_1(0) - 1/2| = {median:.2e} (< 1e-12)"),
    )
}

fn c4_identities() -> Result<Outcome> {
    let h = 1e-4;
    let (mut du, mut dv, mut q1, mut u1, mut mat): (f64, f64, f64, f64, f64) =
        (0.0, 0.0, 0.0, 0.0, 0.0);
    for s in [-4.0, -2.0, 0.0, 2.0] {
        let f = airy_ops::functionals(s)?;
        let fp = airy_ops::functionals(s + h)?;
        let fm = airy_ops::functionals(s - h)?;
        du = du.max(((fp.u[0] - fm.u[0]) / (2.0 * h) + f.q[0] * f.q[0]).abs());
        dv = dv.max(((fp.v[0] - fm.v[0]) / (2.0 * h) + f.p[0] * f.q[0]).abs());
        q1 = q1.max((f.q[1] - (s * f.q[0] - f.v[0] * f.q[0] + f.u[0] * f.p[0])).abs());
        u1 = u1.max((f.u[1] - f.u[0] * f.v[0] + f.w[0] + f.p[0] * f.q[0]).abs());
        let lhs = -edgeworth::bracket_tail(s)?;
        let rhs = 2.0 * f.w[1] - 3.0 * f.u[2] + f.u[1] * f.v[0] - f.u[0] * f.vt[1];
        mat = mat.max((lhs - rhs).abs());
    }
    outcome(
        du < 1e-6 && dv < 1e-6 && q1 < 1e-8 && u1 < 1e-8 && mat < 1e-5,
        format!(
            "u0' {du:.1e}, v0' {dv:.1e} (< 1e-6); q1 {q1:.1e}, u1 {u1:.1e} (< 1e-8); matching {mat:.1e} (< 1e-5)"
        ),
    )
}

const EDGE_NS: [usize; 6] = [16, 32, 64, 128, 256, 512];

fn edgeworth_slope(c: f64, order: usize) -> Result<f64> {
    let terms = EdgeworthTerms::new(0.0, c)?;
    let mut res = Vec::new();
    for n in EDGE_NS {
        let exact = cdf_fredholm(n, ScalingMap::new(n, c)?.tau(0.0))?;
        res.push((exact - terms.assembled(n, order)?).abs());
    }
    let x: Vec<f64> = EDGE_NS.iter().map(|&n| n as f64).collect();
    Ok(slope(&x, &res))
}

fn c5_edgeworth_orders() -> Result<Outcome> {
    let start = Instant::now();
    let s0 = edgeworth_slope(1.0, 0)?;
    let s1 = edgeworth_slope(1.0, 1)?;
    let s2 = edgeworth_slope(0.0, 2)?;
    let secs = start.elapsed();
    let ok0 = (s0 + 1.0 / 3.0).abs() <= 0.1;
    let ok1 = (s1 + 2.0 / 3.0).abs() <= 0.1;
    let ok2 = (s2 + 1.0).abs() <= 0.25;
    let mark = |b: bool| if b { "ok" } else { "out" };
    outcome(
        ok0 && ok1 && ok2 && secs < Duration::from_secs(1200),
        format!(
            "order0 c=1 {s0:.3} ({}), order1 c=1 {s1:.3} ({}), order2 c=0 {s2:.3} ({}, target -1 +- 0.25), {secs:.2?}",
            mark(ok0),
            mark(ok1),
            mark(ok2)
        ),
    )
}

fn c6_kernel_expansion() -> Result<Outcome> {
    let (x, y, c) = (0.3, -0.2, 0.5);
    let ns: Vec<usize> = (6..=12).map(|k| 1usize << k).collect();
    let mut res = Vec::new();
    for &n in &ns {
        let map = ScalingMap::new(n, c)?;
        let lhs = map.jacobian() * kernel_direct_sum(n, map.tau(x), map.tau(y));
        res.push((lhs - hermite_n::kernel_expansion_rhs(c, x, y, 2, n)?).abs());
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let s = slope(&xs, &res);
    outcome(
        (s + 1.0).abs() <= 0.2,
        format!("order-2 residual slope {s:.3} over n = 64..4096 (target -1 +- 0.2)"),
    )
}

fn c7_comparators() -> Result<Outcome> {
    let ns = [64usize, 128, 256, 512, 1024];
    let grid = |a: f64| -> Vec<f64> { (0..10).map(|k| a + 0.4 * k as f64).collect() };
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let r1 = hermite_n::resolvent_n_check(&ns, 1.0, 0.0, &grid(0.0))?;
    let r2 = hermite_n::qp_expansion_check(&ns, 1.0, &grid(-2.0), &grid(0.0))?;
    let s1 = slope(&x, &r1.residuals.iter().map(|r| r[2]).collect::<Vec<_>>());
    let s2 = slope(&x, &r2.residuals.iter().map(|r| r[2]).collect::<Vec<_>>());
    outcome(
        (s1 + 1.0).abs() <= 0.25 && (s2 + 1.0).abs() <= 0.25,
        format!("c = 1: resolvent slope {s1:.3}, q_n/p_n slope {s2:.3} (target -1 +- 0.25)"),
    )
}

fn c8_differential() -> Result<Outcome> {
    let h = 1e-4;
    let n = 8;
    let st = |t: f64| FiniteNState::at_threshold(n, 0.0, t, Discretization::default());
    let map = ScalingMap::new(n, 0.0)?;
    let (mut e7, mut e8): (f64, f64) = (0.0, 0.0);
    for s in [-3.0, -1.5, 0.0, 1.5] {
        let t = map.tau(s);
        let (p, m, c) = (st(t + h)?, st(t - h)?, st(t)?);
        let r = c.resolvent_at(t, t)?;
        let dlog = (p.det().ln() - m.det().ln()) / (2.0 * h);
        // d/dt log det(I - K_n) = +R_n(t, t; t)
        e7 = e7.max((dlog - r).abs() / r.abs());
        let dr = (p.resolvent_at(t + h, t + h)? - m.resolvent_at(t - h, t - h)?) / (2.0 * h);
        let rhs = -2.0 * c.qn() * c.pn();
        e8 = e8.max((dr - rhs).abs() / rhs.abs());
    }
    outcome(
        e7 < 1e-4 && e8 < 1e-4,
        format!("n = 8: (log det)' vs R_n rel {e7:.2e}, R_n' vs -2 q_n p_n rel {e8:.2e} (< 1e-4)"),
    )
}

fn c9_monte_carlo() -> Result<Outcome> {
    let start = Instant::now();
    let samples = 100_000;
    let mut worst: f64 = 0.0;
    let mut outside = 0;
    for n in [2usize, 4, 8] {
        let draws = gue_mc::sample_lambda_max(&SamplerConfig::raw(n, samples, 42))?;
        let map = ScalingMap::new(n, 0.0)?;
        for k in 0..20 {
            let t = map.tau(-3.5 + 5.0 * k as f64 / 19.0);
            let p = cdf_fredholm(n, t)?;
            let emp = draws.iter().filter(|&&d| d <= t).count() as f64 / samples as f64;
            let band = 3.0 * (p * (1.0 - p) / samples as f64).sqrt();
            let ratio = (emp - p).abs() / band;
            worst = worst.max(ratio);
            if ratio > 1.0 {
                outside += 1;
            }
        }
    }
    let secs = start.elapsed();
    outcome(
        outside == 0 && secs < Duration::from_secs(300),
        format!("n = 2, 4, 8, N = 1e5, seed 42: worst |emp - F_n| / 3 sigma = {worst:.3}, {outside}/60 outside, {secs:.2?}"),
    )
}

fn c10_adjudication() -> Result<Outcome> {
    let adj = edgeworth::adjudicate(&[-2.0, 0.0, 2.0], 0.0, 1e-5)?;
    let exactly_one = adj.printed_passes != adj.tilde_passes;
    // the shipped E_c2 must be the variant that passes
    let shipped = edgeworth::ec2(0.0, 0.0)?;
    let f = airy_ops::functionals(0.0)?;
    let shipped_variant = if shipped == edgeworth::ec2_from(&f, 0.0, Ec2Variant::Printed) {
        Ec2Variant::Printed
    } else {
        Ec2Variant::TildeV1
    };
    outcome(
        exactly_one && adj.verdict() == Some(shipped_variant),
        format!(
            "printed v1 dev {:.2e} ({}), tilde v1 dev {:.2e} ({}), shipped {:?}",
            adj.worst(Ec2Variant::Printed),
            if adj.printed_passes { "pass" } else { "fail" },
            adj.worst(Ec2Variant::TildeV1),
            if adj.tilde_passes { "pass" } else { "fail" },
            shipped_variant
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("1 tracy-widom cross-route", c1_tracy_widom),
        ("2 finite-n cross-route", c2_finite_n),
        ("3 closed forms n = 1", c3_closed_forms),
        ("4 identity suite", c4_identities),
        ("5 edgeworth orders", c5_edgeworth_orders),
        ("6 kernel expansion", c6_kernel_expansion),
        ("7 resolvent and q/p comparators", c7_comparators),
        ("8 differential identities", c8_differential),
        ("9 monte carlo band", c9_monte_carlo),
        ("10 v1 adjudication", c10_adjudication),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let (passed, detail) = match f() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {detail} [{:.2?}]",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed()
        );
    }
    println!("acceptance: {}/10 passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
