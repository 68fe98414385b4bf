//! Finite-n objects built on the Hermite kernel.
//!
//! Everything here works in the unscaled variable `x`. The edge map
//! `τ(X) = √(2(n+c)) + X 2^{-1/2} n^{-1/6}` is applied only when comparing
//! against the Airy-limit objects of [`crate::airy_ops`].
//!
//! `Q_n` and `P_n` solve `(I - K_n) Q_n = φ̃_n`, `(I - K_n) P_n = φ̃_{n-1}` with
//! `φ̃_k = (n/2)^{1/4} φ_k`, so that
//! `K_n(x, y) = (φ̃_n(x) φ̃_{n-1}(y) - φ̃_{n-1}(x) φ̃_n(y)) / (x - y)`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::airy_ops::{self, AiryResolvent, Discretization};
use crate::error::{invalid, Error, Result};
use crate::fit::loglog_slope;
use crate::quad::{truncated_halfline, KernelMatrix, QuadRule, Resolvent};
use crate::specfun::{airy_pair, hermite_phi_triple, MAX_HERMITE_DEGREE};

const DIAGONAL_SEAM: f64 = 1e-6;
/// Leftmost scaled threshold accepted by [`finite_state`].
pub const FINITE_LEFT_LIMIT: f64 = -10.0;
/// Default outer node count for [`cdf_via_qp`].
pub const DEFAULT_OUTER_NODES: usize = 80;

/// The edge map `τ(X) = √(2(n+c)) + X / (√2 n^{1/6})`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ScalingMap {
    n: usize,
    c: f64,
}

impl ScalingMap {
    pub fn new(n: usize, c: f64) -> Result<Self> {
        check_n(n)?;
        if !c.is_finite() || !(n as f64 + c > 0.0) {
            return Err(invalid(
                "c",
                format!("n + c must be positive (n = {n}, c = {c})"),
            ));
        }
        Ok(ScalingMap { n, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `2^{-1/2} n^{-1/6}`, the width of one scaled unit.
    pub fn jacobian(&self) -> f64 {
        edge_width(self.n)
    }

    pub fn center(&self) -> f64 {
        (2.0 * (self.n as f64 + self.c)).sqrt()
    }

    pub fn tau(&self, x: f64) -> f64 {
        self.center() + x * self.jacobian()
    }

    pub fn inverse(&self, t: f64) -> f64 {
        (t - self.center()) / self.jacobian()
    }
}

fn edge_width(n: usize) -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 * (n as f64).powf(-1.0 / 6.0)
}

fn check_n(n: usize) -> Result<()> {
    if n < 1 {
        return Err(invalid("n", "must be at least 1"));
    }
    if n > MAX_HERMITE_DEGREE {
        return Err(invalid("n", format!("{n} exceeds {MAX_HERMITE_DEGREE}")));
    }
    Ok(())
}

/// `φ̃_n`, `φ̃_{n-1}` and `K_n(x, x)` at one point.
#[derive(Debug, Clone, Copy)]
struct HermitePoint {
    x: f64,
    phi: f64,
    psi: f64,
    diag: f64,
}

impl HermitePoint {
    fn new(n: usize, x: f64) -> Self {
        let [pm2, pm1, p] = hermite_phi_triple(n, x);
        let nf = n as f64;
        let norm = (nf / 2.0).powf(0.25);
        HermitePoint {
            x,
            phi: norm * p,
            psi: norm * pm1,
            diag: nf * pm1 * pm1 - (nf * (nf - 1.0)).sqrt() * pm2 * p,
        }
    }
}

fn kernel_between(n: usize, a: &HermitePoint, b: &HermitePoint) -> f64 {
    let d = a.x - b.x;
    if d == 0.0 {
        a.diag
    } else if d.abs() > DIAGONAL_SEAM {
        (a.phi * b.psi - a.psi * b.phi) / d
    } else {
        HermitePoint::new(n, 0.5 * (a.x + b.x)).diag
    }
}

/// The Hermite kernel `K_n(x, y) = Σ_{k<n} φ_k(x) φ_k(y)` in Christoffel–Darboux
/// form. Within `1e-6` of the diagonal it uses `K_n(z, z)` at the midpoint.
pub fn hermite_kernel(n: usize, x: f64, y: f64) -> Result<f64> {
    check_n(n)?;
    if !x.is_finite() || !y.is_finite() {
        return Err(invalid("x", "arguments must be finite"));
    }
    Ok(kernel_between(
        n,
        &HermitePoint::new(n, x),
        &HermitePoint::new(n, y),
    ))
}

/// `2^{-1/2} n^{-1/6} K_n(τ(X), τ(Y))`.
pub fn scaled_kernel(map: &ScalingMap, x: f64, y: f64) -> Result<f64> {
    Ok(map.jacobian() * hermite_kernel(map.n, map.tau(x), map.tau(y))?)
}

/// Right side of the kernel expansion through `order` (0, 1 or 2):
/// `K_Ai - c Ai(X)Ai(Y) n^{-1/3} + (n^{-2/3}/20)[...]`.
pub fn kernel_expansion_rhs(c: f64, x: f64, y: f64, order: usize, n: usize) -> Result<f64> {
    if order > 2 {
        return Err(invalid("order", format!("{order} not in 0..=2")));
    }
    check_n(n)?;
    let e = (n as f64).powf(-1.0 / 3.0);
    let (ax, dx) = airy_pair(x);
    let (ay, dy) = airy_pair(y);
    let mut k = airy_ops::airy_kernel(x, y);
    if order >= 1 {
        k -= c * ax * ay * e;
    }
    if order >= 2 {
        let bracket = (x + y) * dx * dy - (x * x + x * y + y * y) * ax * ay
            + 0.5 * (-20.0 * c * c + 3.0) * (dx * ay + ax * dy);
        k += bracket * e * e / 20.0;
    }
    Ok(k)
}

/// Right end of the finite-n truncation window: `T` scaled units past the
/// larger of `t` and the soft edge `√(2n)`.
pub fn truncation_upper(n: usize, t: f64, t_len: f64) -> f64 {
    t.max((2.0 * n as f64).sqrt()) + t_len * edge_width(n)
}

/// Discretized `K_n` on `(t, ∞)` with the solves for `φ̃_n` and `φ̃_{n-1}`.
#[derive(Debug, Clone)]
pub struct FiniteNState {
    n: usize,
    c: f64,
    t: f64,
    nodes: Vec<HermitePoint>,
    kernel: KernelMatrix,
    resolvent: Resolvent,
    q: Vec<f64>,
    p: Vec<f64>,
    qn: f64,
    pn: f64,
    residual: f64,
}

/// State at `t = τ(s)` with the default discretization.
pub fn finite_state(n: usize, c: f64, s: f64) -> Result<FiniteNState> {
    finite_state_with(n, c, s, Discretization::default())
}

pub fn finite_state_with(n: usize, c: f64, s: f64, disc: Discretization) -> Result<FiniteNState> {
    let map = ScalingMap::new(n, c)?;
    if !(s >= FINITE_LEFT_LIMIT) {
        return Err(Error::OutOfRegime {
            what: "s",
            value: s,
            bound: format!("s >= {FINITE_LEFT_LIMIT}"),
        });
    }
    FiniteNState::at_threshold(n, c, map.tau(s), disc)
}

impl FiniteNState {
    /// State at the unscaled threshold `t`; `c` is carried only for reporting.
    pub fn at_threshold(n: usize, c: f64, t: f64, disc: Discretization) -> Result<Self> {
        check_n(n)?;
        if !t.is_finite() {
            return Err(invalid("t", "must be finite"));
        }
        let upper = truncation_upper(n, t, disc.t_len);
        let rule = truncated_halfline(t, upper - t, disc.m)?;
        let nodes: Vec<HermitePoint> = rule
            .nodes()
            .iter()
            .map(|&x| HermitePoint::new(n, x))
            .collect();
        let kernel =
            KernelMatrix::from_node_pairs(&rule, |i, j| kernel_between(n, &nodes[i], &nodes[j]))?;
        let resolvent = Resolvent::new(&kernel)?;
        let fq: Vec<f64> = nodes.iter().map(|h| h.phi).collect();
        let fp: Vec<f64> = nodes.iter().map(|h| h.psi).collect();
        let q = resolvent.solve(&fq)?;
        let p = resolvent.solve(&fp)?;
        let residual = solve_residual(&kernel, &q, &fq).max(solve_residual(&kernel, &p, &fp));
        let mut state = FiniteNState {
            n,
            c,
            t,
            nodes,
            kernel,
            resolvent,
            q,
            p,
            qn: 0.0,
            pn: 0.0,
            residual,
        };
        let (qn, pn) = state.qp_at(t);
        state.qn = qn;
        state.pn = pn;
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn rule(&self) -> &QuadRule {
        self.kernel.rule()
    }

    pub fn kernel(&self) -> &KernelMatrix {
        &self.kernel
    }

    /// `det(I - K_n)` on `(t, ∞)`.
    pub fn det(&self) -> f64 {
        self.resolvent.det()
    }

    /// `Q_n` at the nodes.
    pub fn q_nodes(&self) -> &[f64] {
        &self.q
    }

    /// `P_n` at the nodes.
    pub fn p_nodes(&self) -> &[f64] {
        &self.p
    }

    /// `q_n(t) = Q_n(t; t)`.
    pub fn qn(&self) -> f64 {
        self.qn
    }

    /// `p_n(t) = P_n(t; t)`.
    pub fn pn(&self) -> f64 {
        self.pn
    }

    /// Max-norm residual of the two discrete solves.
    pub fn solve_residual(&self) -> f64 {
        self.residual
    }

    fn row(&self, at: &HermitePoint) -> Vec<f64> {
        let w = self.rule().weights();
        self.nodes
            .iter()
            .zip(w)
            .map(|(h, w)| w * kernel_between(self.n, at, h))
            .collect()
    }

    /// `(Q_n(x; t), P_n(x; t))` at any `x` by natural extension.
    pub fn qp_at(&self, x: f64) -> (f64, f64) {
        let h = HermitePoint::new(self.n, x);
        let row = self.row(&h);
        let dq: f64 = row.iter().zip(&self.q).map(|(r, g)| r * g).sum();
        let dp: f64 = row.iter().zip(&self.p).map(|(r, g)| r * g).sum();
        (h.phi + dq, h.psi + dp)
    }

    /// `R_n(x_a, y_b; t)` for every pair from `xs` × `ys`.
    pub fn resolvent_grid(&self, xs: &[f64], ys: &[f64]) -> Result<DMatrix<f64>> {
        let hx: Vec<HermitePoint> = xs.iter().map(|&x| HermitePoint::new(self.n, x)).collect();
        let hy: Vec<HermitePoint> = ys.iter().map(|&y| HermitePoint::new(self.n, y)).collect();
        let rows: Vec<Vec<f64>> = hx.iter().map(|h| self.row(h)).collect();
        let mut out = DMatrix::zeros(xs.len(), ys.len());
        for (b, y) in hy.iter().enumerate() {
            let col: Vec<f64> = self
                .nodes
                .iter()
                .map(|h| kernel_between(self.n, h, y))
                .collect();
            let r = self.resolvent.solve(&col)?;
            for (a, x) in hx.iter().enumerate() {
                let ext: f64 = rows[a].iter().zip(&r).map(|(k, g)| k * g).sum();
                out[(a, b)] = kernel_between(self.n, x, y) + ext;
            }
        }
        Ok(out)
    }

    /// `R_n(x, y; t)`.
    pub fn resolvent_at(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.resolvent_grid(&[x], &[y])?[(0, 0)])
    }
}

fn solve_residual(kernel: &KernelMatrix, g: &[f64], f: &[f64]) -> f64 {
    let w = kernel.rule().weights();
    let m = g.len();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        let kg: f64 = (0..m).map(|j| kernel.kernel_at(i, j) * w[j] * g[j]).sum();
        worst = worst.max((g[i] - kg - f[i]).abs());
    }
    worst
}

/// `P(λ_max ≤ t) = det(I - K_n)` on `(t, ∞)`.
pub fn cdf_fredholm(n: usize, t: f64) -> Result<f64> {
    cdf_fredholm_with(n, t, Discretization::default())
}

pub fn cdf_fredholm_with(n: usize, t: f64, disc: Discretization) -> Result<f64> {
    Ok(FiniteNState::at_threshold(n, 0.0, t, disc)?.det())
}

/// `exp(-2 ∫_t^∞ (x - t) q_n(x) p_n(x) dx)` with `q_n(x) = Q_n(x; x)`, one
/// resolvent per outer node.
pub fn cdf_via_qp(n: usize, t: f64) -> Result<f64> {
    cdf_via_qp_with(
        n,
        t,
        Discretization { m: 80, t_len: 40.0 },
        DEFAULT_OUTER_NODES,
    )
}

pub fn cdf_via_qp_with(n: usize, t: f64, inner: Discretization, outer: usize) -> Result<f64> {
    check_n(n)?;
    let upper = truncation_upper(n, t, inner.t_len);
    let rule = truncated_halfline(t, upper - t, outer)?;
    let integrand: Result<Vec<f64>> = rule
        .nodes()
        .par_iter()
        .map(|&x| {
            let st = FiniteNState::at_threshold(n, 0.0, x, inner)?;
            Ok((x - t) * st.qn() * st.pn())
        })
        .collect();
    let integral: f64 = rule
        .weights()
        .iter()
        .zip(&integrand?)
        .map(|(w, v)| w * v)
        .sum();
    Ok((-2.0 * integral).exp())
}

/// Sup-norm residuals after subtracting an expansion through orders 0, 1, 2,
/// one row per `n`, with fitted log–log slopes.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExpansionReport {
    pub ns: Vec<usize>,
    pub residuals: Vec<[f64; 3]>,
    pub slopes: [Option<f64>; 3],
}

impl ExpansionReport {
    fn from_rows(ns: &[usize], residuals: Vec<[f64; 3]>) -> Self {
        let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let mut slopes = [None; 3];
        for (k, slot) in slopes.iter_mut().enumerate() {
            let y: Vec<f64> = residuals.iter().map(|r| r[k]).collect();
            *slot = loglog_slope(&x, &y).ok();
        }
        ExpansionReport {
            ns: ns.to_vec(),
            residuals,
            slopes,
        }
    }
}

fn check_ns(ns: &[usize]) -> Result<()> {
    if ns.len() < 2 {
        return Err(invalid("ns", "need at least two sizes"));
    }
    ns.iter().try_for_each(|&n| check_n(n))
}

fn sup3(acc: &mut [f64; 3], vals: [f64; 3]) {
    for k in 0..3 {
        acc[k] = acc[k].max(vals[k].abs());
    }
}

/// Residuals of `scaled_kernel` against [`kernel_expansion_rhs`] at one point.
pub fn kernel_expansion_check(ns: &[usize], c: f64, x: f64, y: f64) -> Result<ExpansionReport> {
    check_ns(ns)?;
    let rows: Result<Vec<[f64; 3]>> = ns
        .iter()
        .map(|&n| {
            let lhs = scaled_kernel(&ScalingMap::new(n, c)?, x, y)?;
            let mut r = [0.0; 3];
            for (k, v) in r.iter_mut().enumerate() {
                *v = (lhs - kernel_expansion_rhs(c, x, y, k, n)?).abs();
            }
            Ok(r)
        })
        .collect();
    Ok(ExpansionReport::from_rows(ns, rows?))
}

/// Edge expansion of `n^{-1/6} φ̃_n(τ(X))` and `n^{-1/6} φ̃_{n-1}(τ(X))`;
/// the residual is the larger of the two.
pub fn phi_expansion_check(ns: &[usize], c: f64, xs: &[f64]) -> Result<ExpansionReport> {
    check_ns(ns)?;
    let rows: Result<Vec<[f64; 3]>> = ns
        .iter()
        .map(|&n| {
            let map = ScalingMap::new(n, c)?;
            let e = (n as f64).powf(-1.0 / 3.0);
            let scale = (n as f64).powf(-1.0 / 6.0);
            let mut acc = [0.0; 3];
            for &x in xs {
                let h = HermitePoint::new(n, map.tau(x));
                let (a, d) = airy_pair(x);
                for (val, sign) in [(h.phi * scale, -1.0), (h.psi * scale, 1.0)] {
                    let o0 = a;
                    let o1 = o0 + 0.5 * (2.0 * c + sign) * d * e;
                    let o2 = o1
                        + ((10.0 * c * c + sign * 10.0 * c + 1.5) * x * a + x * x * d) * e * e
                            / 20.0;
                    sup3(&mut acc, [val - o0, val - o1, val - o2]);
                }
            }
            Ok(acc)
        })
        .collect();
    Ok(ExpansionReport::from_rows(ns, rows?))
}

/// Resolvent expansion at `t = τ(s)` over the grid `xs × xs`:
/// `2^{-1/2} n^{-1/6} R_n(τ(X), τ(Y); τ(s))` against the Airy-limit terms.
pub fn resolvent_n_check(ns: &[usize], c: f64, s: f64, xs: &[f64]) -> Result<ExpansionReport> {
    check_ns(ns)?;
    if xs.is_empty() || xs.len() > 20 {
        return Err(invalid("xs", "grid must have 1..=20 points"));
    }
    let airy = airy_ops::build_resolvent(s, Discretization::default())?;
    let u0 = airy.functionals().u[0];
    let k = xs.len();
    let lim: Vec<([f64; 3], [f64; 3])> = xs.iter().map(|&x| airy.qp_at(x)).collect();
    let mut r0 = DMatrix::zeros(k, k);
    let mut r1 = DMatrix::zeros(k, k);
    let mut r2 = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            let (qa, pa) = lim[a];
            let (qb, pb) = lim[b];
            r0[(a, b)] = airy.resolvent_at(xs[a], xs[b])?;
            r1[(a, b)] = -c * qa[0] * qb[0];
            r2[(a, b)] =
                (pa[1] * pb[0] + pa[0] * pb[1] - qa[2] * qb[0] - qa[1] * qb[1] - qa[0] * qb[2]
                    + 20.0 * c * c * u0 * qa[0] * qb[0]
                    + 0.5 * (3.0 - 20.0 * c * c) * (pa[0] * qb[0] + qa[0] * pb[0]))
                    / 20.0;
        }
    }
    let rows: Result<Vec<[f64; 3]>> = ns
        .par_iter()
        .map(|&n| {
            let map = ScalingMap::new(n, c)?;
            let st = FiniteNState::at_threshold(n, c, map.tau(s), Discretization::default())?;
            let taus: Vec<f64> = xs.iter().map(|&x| map.tau(x)).collect();
            let lhs = st.resolvent_grid(&taus, &taus)? * map.jacobian();
            let e = (n as f64).powf(-1.0 / 3.0);
            let o0 = &r0;
            let o1 = o0 + &r1 * e;
            let o2 = &o1 + &r2 * (e * e);
            Ok([(&lhs - o0).amax(), (&lhs - o1).amax(), (&lhs - o2).amax()])
        })
        .collect();
    Ok(ExpansionReport::from_rows(ns, rows?))
}

/// Airy-limit data entering the `Q_n`, `P_n` expansions at one `s`.
struct QpLimit {
    airy: AiryResolvent,
    u: [f64; 3],
    v: [f64; 3],
}

impl QpLimit {
    fn new(s: f64) -> Result<Self> {
        let airy = airy_ops::build_resolvent(s, Discretization::default())?;
        let f = airy.functionals();
        Ok(QpLimit {
            airy,
            u: f.u,
            v: f.v,
        })
    }

    /// Expansion terms of order 0, 1, 2 for `Q_n` (`sign = -1`) or `P_n`
    /// (`sign = +1`) at `X`.
    fn terms(&self, c: f64, sign: f64, x: f64) -> [f64; 3] {
        let (q, p) = self.airy.qp_at(x);
        let (u, v) = (self.u, self.v);
        let t1 = 0.5 * (2.0 * c + sign) * p[0] - c * q[0] * u[0];
        let t2 = (10.0 * c * c + sign * 10.0 * c + 1.5) * q[1]
            + p[2]
            + (-30.0 * c * c - sign * 10.0 * c + 1.5) * q[0] * v[0]
            + p[1] * v[0]
            + p[0] * v[1]
            - q[2] * u[0]
            - q[1] * u[1]
            - q[0] * u[2]
            + (-10.0 * c * c + 1.5) * p[0] * u[0]
            + 20.0 * c * c * q[0] * u[0] * u[0];
        [q[0], t1, t2 / 20.0]
    }
}

/// Expansion of `n^{-1/6} Q_n(τ(X); τ(s))` and `n^{-1/6} P_n(τ(X); τ(s))` on
/// the grid `X = s + offset`, including the endpoint values `q_n`, `p_n` when
/// an offset is zero. The residual is the sup over both functions and the grid.
pub fn qp_expansion_check(
    ns: &[usize],
    c: f64,
    ss: &[f64],
    offsets: &[f64],
) -> Result<ExpansionReport> {
    check_ns(ns)?;
    if ss.is_empty() || offsets.is_empty() {
        return Err(invalid("ss", "grid must be nonempty"));
    }
    let limits: Result<Vec<QpLimit>> = ss.par_iter().map(|&s| QpLimit::new(s)).collect();
    let limits = limits?;
    let mut expected = Vec::with_capacity(ss.len());
    for (lim, &s) in limits.iter().zip(ss) {
        let row: Vec<([f64; 3], [f64; 3])> = offsets
            .iter()
            .map(|&o| (lim.terms(c, -1.0, s + o), lim.terms(c, 1.0, s + o)))
            .collect();
        expected.push(row);
    }
    let rows: Result<Vec<[f64; 3]>> = ns
        .par_iter()
        .map(|&n| {
            let map = ScalingMap::new(n, c)?;
            let e = (n as f64).powf(-1.0 / 3.0);
            let scale = (n as f64).powf(-1.0 / 6.0);
            let mut acc = [0.0; 3];
            for (si, &s) in ss.iter().enumerate() {
                let st = FiniteNState::at_threshold(n, c, map.tau(s), Discretization::default())?;
                for (oi, &o) in offsets.iter().enumerate() {
                    let (qn, pn) = st.qp_at(map.tau(s + o));
                    for (val, terms) in [(qn, expected[si][oi].0), (pn, expected[si][oi].1)] {
                        let v = val * scale;
                        let o0 = terms[0];
                        let o1 = o0 + terms[1] * e;
                        let o2 = o1 + terms[2] * e * e;
                        sup3(&mut acc, [v - o0, v - o1, v - o2]);
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    Ok(ExpansionReport::from_rows(ns, rows?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{erf, hermite_phi};
    use approx::assert_abs_diff_eq;

    fn direct_kernel(n: usize, x: f64, y: f64) -> f64 {
        (0..n)
            .map(|k| hermite_phi(k, x).unwrap() * hermite_phi(k, y).unwrap())
            .sum()
    }

    #[test]
    fn kernel_matches_direct_sum() {
        for &n in &[1usize, 2, 7, 20, 50] {
            for &(x, y) in &[(0.0, 0.0), (1.1, -0.3), (2.5, 2.5 + 5e-7), (-1.0, 3.0)] {
                let k = hermite_kernel(n, x, y).unwrap();
                assert_abs_diff_eq!(k, direct_kernel(n, x, y), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn kernel_rejects_zero_n() {
        assert!(hermite_kernel(0, 0.0, 0.0).is_err());
        assert!(ScalingMap::new(2, -3.0).is_err());
    }

    #[test]
    fn scaling_map_round_trip() {
        let m = ScalingMap::new(50, 0.5).unwrap();
        assert_abs_diff_eq!(m.inverse(m.tau(-1.7)), -1.7, epsilon = 1e-12);
        assert!(m.tau(1.0) > m.tau(0.9));
    }

    #[test]
    fn n1_closed_form() {
        for &t in &[-1.5, -0.3, 0.0, 0.7, 2.0] {
            let f = cdf_fredholm(1, t).unwrap();
            assert_abs_diff_eq!(f, 0.5 * (1.0 + erf(t)), epsilon = 1e-10);
        }
    }

    #[test]
    fn n1_sherman_morrison() {
        let t = 0.4;
        let st = FiniteNState::at_threshold(1, 0.0, t, Discretization::default()).unwrap();
        // rank one: K_1 = φ0 ⊗ φ0, so (I - K)^{-1} f = f + φ0 (φ0, f)/(1 - (φ0, φ0))
        let g = crate::quad::gauss_legendre(200)
            .unwrap()
            .mapped(t, t + 30.0);
        let p0 = |x: f64| hermite_phi(0, x).unwrap();
        let p1 = |x: f64| hermite_phi(1, x).unwrap();
        let a00 = g.integrate(|x| p0(x) * p0(x));
        let a01 = g.integrate(|x| p0(x) * p1(x));
        let norm = 0.5f64.powf(0.25);
        for &x in &[0.4, 1.0, 2.3] {
            let expect = norm * (p1(x) + p0(x) * a01 / (1.0 - a00));
            assert_abs_diff_eq!(st.qp_at(x).0, expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn far_right_is_identity() {
        let st = finite_state(4, 0.0, 6.0).unwrap();
        let norm = 2.0f64.powf(0.25);
        assert!((st.qn() - norm * hermite_phi(4, st.t()).unwrap()).abs() < 1e-6);
        assert!(st.solve_residual() < 1e-10);
    }

    #[test]
    fn determinant_in_unit_interval_and_monotone() {
        let mut last = 0.0;
        for k in 0..8 {
            let t = -1.0 + 0.5 * k as f64;
            let f = cdf_fredholm(6, t).unwrap();
            assert!(f > 0.0 && f <= 1.0);
            assert!(f >= last);
            last = f;
        }
    }

    #[test]
    fn two_representations_agree_small_n() {
        for &n in &[1usize, 4] {
            let t = ScalingMap::new(n, 0.0).unwrap().tau(0.0);
            let a = cdf_fredholm(n, t).unwrap();
            let b = cdf_via_qp(n, t).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-7);
        }
    }

    #[test]
    fn resolvent_symmetric() {
        let st = finite_state(8, 0.0, -1.0).unwrap();
        let xs = [st.t(), st.t() + 0.3, st.t() + 1.0];
        let r = st.resolvent_grid(&xs, &xs).unwrap();
        assert!((&r - r.transpose()).amax() < 1e-12);
    }

    #[test]
    fn expansion_rhs_order_guard() {
        assert!(kernel_expansion_rhs(0.0, 0.0, 0.0, 3, 64).is_err());
        let k0 = kernel_expansion_rhs(0.0, 0.0, 0.0, 0, 64).unwrap();
        assert_abs_diff_eq!(k0, airy_ops::airy_kernel(0.0, 0.0), epsilon = 0.0);
    }
}
