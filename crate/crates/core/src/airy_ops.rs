//! Edge-scaling limit objects built on the Airy kernel.
//!
//! For a left endpoint `s`, [`build_resolvent`] discretizes
//! `K_Ai(X, Y) = (Ai(X)Ai'(Y) - Ai(Y)Ai'(X)) / (X - Y)` on `(s, s + T)` and
//! solves `(I - K_Ai) Q_i = X^i Ai`, `(I - K_Ai) P_i = X^i Ai'` for
//! `i = 0, 1, 2`. Endpoint values `q_i = Q_i(s)`, `p_i = P_i(s)` come from the
//! Nyström natural extension; the inner products `u, v, ṽ, w` from the rule.

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::painleve2;
use crate::quad::{truncated_halfline, KernelMatrix, QuadRule, Resolvent};
use crate::specfun::airy_pair;

/// Leftmost `s` accepted by [`build_resolvent`] and [`functionals`].
pub const RESOLVENT_LEFT_LIMIT: f64 = -12.0;
/// Leftmost `s` accepted by [`f2_cdf`].
pub const F2_LEFT_LIMIT: f64 = -10.0;
/// Number of moments `X^i Ai`, `X^i Ai'` carried (`i = 0, 1, 2`).
pub const MOMENTS: usize = 3;

const DIAGONAL_SEAM: f64 = 1e-6;

/// Node count and truncation length of a Nyström discretization.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Discretization {
    pub m: usize,
    pub t_len: f64,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization {
            m: 100,
            t_len: 40.0,
        }
    }
}

/// The Airy kernel.
///
/// Within `1e-6` of the diagonal the divided difference is replaced by the
/// diagonal value `Ai'(z)² - z Ai(z)²` at the midpoint `z`, which is the
/// first-order Taylor form and keeps the kernel exactly symmetric.
pub fn airy_kernel(x: f64, y: f64) -> f64 {
    if (x - y).abs() > DIAGONAL_SEAM {
        let (ax, dx) = airy_pair(x);
        let (ay, dy) = airy_pair(y);
        (ax * dy - ay * dx) / (x - y)
    } else {
        let z = 0.5 * (x + y);
        let (a, d) = airy_pair(z);
        d * d - z * a * a
    }
}

fn kernel_from_values(x: f64, ax: f64, dx: f64, y: f64, ay: f64, dy: f64) -> f64 {
    if x == y {
        dx * dx - x * ax * ax
    } else {
        (ax * dy - ay * dx) / (x - y)
    }
}

/// The six functionals `q_i, p_i, u_i, v_i, ṽ_i, w_i` at one left endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct AiryFunctionals {
    pub s: f64,
    /// `q_i = Q_i(s; s)`
    pub q: [f64; MOMENTS],
    /// `p_i = P_i(s; s)`
    pub p: [f64; MOMENTS],
    /// `u_i = (Q_i, Ai)`
    pub u: [f64; MOMENTS],
    /// `v_i = (P_i, Ai)`
    pub v: [f64; MOMENTS],
    /// `ṽ_i = (Q_i, Ai')`
    pub vt: [f64; MOMENTS],
    /// `w_i = (P_i, Ai')`
    pub w: [f64; MOMENTS],
}

/// Discretized resolvent of `K_Ai` on `(s, ∞)` with the solved `Q_i`, `P_i`.
#[derive(Debug, Clone)]
pub struct AiryResolvent {
    s: f64,
    kernel: KernelMatrix,
    resolvent: Resolvent,
    ai: Vec<f64>,
    aip: Vec<f64>,
    q: [Vec<f64>; MOMENTS],
    p: [Vec<f64>; MOMENTS],
}

/// Builds the Nyström resolvent of `K_Ai` on `(s, s + T)`.
pub fn build_resolvent(s: f64, disc: Discretization) -> Result<AiryResolvent> {
    if !(s >= RESOLVENT_LEFT_LIMIT) {
        return Err(Error::OutOfRegime {
            what: "s",
            value: s,
            bound: format!("s >= {RESOLVENT_LEFT_LIMIT}"),
        });
    }
    let rule = truncated_halfline(s, disc.t_len, disc.m)?;
    let (ai, aip): (Vec<f64>, Vec<f64>) = rule.nodes().iter().map(|&x| airy_pair(x)).unzip();
    let x = rule.nodes();
    let kernel = KernelMatrix::from_node_pairs(&rule, |i, j| {
        kernel_from_values(x[i], ai[i], aip[i], x[j], ai[j], aip[j])
    })?;
    let resolvent = Resolvent::new(&kernel)?;
    let mut q: [Vec<f64>; MOMENTS] = Default::default();
    let mut p: [Vec<f64>; MOMENTS] = Default::default();
    for i in 0..MOMENTS {
        let fq: Vec<f64> = x
            .iter()
            .zip(&ai)
            .map(|(&x, &a)| x.powi(i as i32) * a)
            .collect();
        let fp: Vec<f64> = x
            .iter()
            .zip(&aip)
            .map(|(&x, &a)| x.powi(i as i32) * a)
            .collect();
        q[i] = resolvent.solve(&fq)?;
        p[i] = resolvent.solve(&fp)?;
    }
    Ok(AiryResolvent {
        s,
        kernel,
        resolvent,
        ai,
        aip,
        q,
        p,
    })
}

fn check_moment(i: usize) -> Result<()> {
    if i >= MOMENTS {
        return Err(invalid("i", format!("moment {i} not in 0..=2")));
    }
    Ok(())
}

impl AiryResolvent {
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn rule(&self) -> &QuadRule {
        self.kernel.rule()
    }

    pub fn kernel(&self) -> &KernelMatrix {
        &self.kernel
    }

    /// `det(I - K_Ai)` on `(s, ∞)`.
    pub fn det(&self) -> f64 {
        self.resolvent.det()
    }

    pub fn ai_nodes(&self) -> &[f64] {
        &self.ai
    }

    pub fn aip_nodes(&self) -> &[f64] {
        &self.aip
    }

    /// `Q_i` at the nodes.
    pub fn q_nodes(&self, i: usize) -> Result<&[f64]> {
        check_moment(i)?;
        Ok(&self.q[i])
    }

    /// `P_i` at the nodes.
    pub fn p_nodes(&self, i: usize) -> Result<&[f64]> {
        check_moment(i)?;
        Ok(&self.p[i])
    }

    /// Solves `(I - K_Ai) g = f` for an arbitrary right-hand side at the nodes.
    pub fn solve(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.resolvent.solve(f)
    }

    fn kernel_row(&self, x: f64) -> Vec<f64> {
        let (ax, dx) = airy_pair(x);
        self.rule()
            .nodes()
            .iter()
            .enumerate()
            .map(|(j, &xj)| {
                if (x - xj).abs() > DIAGONAL_SEAM {
                    kernel_from_values(x, ax, dx, xj, self.ai[j], self.aip[j])
                } else {
                    airy_kernel(x, xj)
                }
            })
            .collect()
    }

    fn extend(&self, f_at_x: f64, row: &[f64], g: &[f64]) -> f64 {
        let w = self.rule().weights();
        f_at_x + (0..g.len()).map(|j| w[j] * row[j] * g[j]).sum::<f64>()
    }

    /// `Q_i(x; s)` at any `x` by natural extension.
    pub fn q_at(&self, i: usize, x: f64) -> Result<f64> {
        check_moment(i)?;
        let row = self.kernel_row(x);
        Ok(self.extend(x.powi(i as i32) * airy_pair(x).0, &row, &self.q[i]))
    }

    /// `P_i(x; s)` at any `x` by natural extension.
    pub fn p_at(&self, i: usize, x: f64) -> Result<f64> {
        check_moment(i)?;
        let row = self.kernel_row(x);
        Ok(self.extend(x.powi(i as i32) * airy_pair(x).1, &row, &self.p[i]))
    }

    /// All six `Q_i(x), P_i(x)` sharing one kernel row.
    pub fn qp_at(&self, x: f64) -> ([f64; MOMENTS], [f64; MOMENTS]) {
        let row = self.kernel_row(x);
        let (a, d) = airy_pair(x);
        let mut q = [0.0; MOMENTS];
        let mut p = [0.0; MOMENTS];
        for i in 0..MOMENTS {
            let xi = x.powi(i as i32);
            q[i] = self.extend(xi * a, &row, &self.q[i]);
            p[i] = self.extend(xi * d, &row, &self.p[i]);
        }
        (q, p)
    }

    /// Resolvent kernel `R(x, y; s)` of `(I - K_Ai)^{-1} K_Ai` at any pair.
    pub fn resolvent_at(&self, x: f64, y: f64) -> Result<f64> {
        let col = self.kernel_row(y);
        let r = self.resolvent.solve(&col)?;
        let row = self.kernel_row(x);
        Ok(self.extend(airy_kernel(x, y), &row, &r))
    }

    /// `R(x_i, x_j; s)` at every node pair.
    pub fn resolvent_matrix(&self) -> Result<DMatrix<f64>> {
        let mut r = self.resolvent.apply_to_matrix(&self.kernel)?;
        let w = self.rule().weights();
        let m = w.len();
        for j in 0..m {
            for i in 0..m {
                r[(i, j)] /= (w[i] * w[j]).sqrt();
            }
        }
        Ok(r)
    }

    /// The functional record at this endpoint.
    pub fn functionals(&self) -> AiryFunctionals {
        let rule = self.rule();
        let (q, p) = self.qp_at(self.s);
        let mut f = AiryFunctionals {
            s: self.s,
            q,
            p,
            ..Default::default()
        };
        for i in 0..MOMENTS {
            f.u[i] = rule.inner(&self.q[i], &self.ai);
            f.v[i] = rule.inner(&self.p[i], &self.ai);
            f.vt[i] = rule.inner(&self.q[i], &self.aip);
            f.w[i] = rule.inner(&self.p[i], &self.aip);
        }
        f
    }
}

/// Functionals at `s` with the default discretization.
pub fn functionals(s: f64) -> Result<AiryFunctionals> {
    functionals_with(s, Discretization::default())
}

pub fn functionals_with(s: f64, disc: Discretization) -> Result<AiryFunctionals> {
    Ok(build_resolvent(s, disc)?.functionals())
}

/// Route used by [`f2_cdf`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum F2Method {
    /// `det(I - K_Ai)` on `(s, ∞)`.
    Determinant,
    /// `exp(-∫_s^∞ (x - s) q(x)² dx)` with `q` the Hastings–McLeod solution.
    QIntegral,
}

/// Tracy–Widom distribution `F_2(s)`.
pub fn f2_cdf(s: f64, method: F2Method) -> Result<f64> {
    f2_cdf_with(s, method, Discretization::default())
}

pub fn f2_cdf_with(s: f64, method: F2Method, disc: Discretization) -> Result<f64> {
    if !(s >= F2_LEFT_LIMIT) {
        return Err(Error::OutOfRegime {
            what: "s",
            value: s,
            bound: format!("s >= {F2_LEFT_LIMIT}"),
        });
    }
    match method {
        F2Method::Determinant => {
            let rule = truncated_halfline(s, disc.t_len, disc.m)?;
            let (ai, aip): (Vec<f64>, Vec<f64>) =
                rule.nodes().iter().map(|&x| airy_pair(x)).unzip();
            let x = rule.nodes();
            let kernel = KernelMatrix::from_node_pairs(&rule, |i, j| {
                kernel_from_values(x[i], ai[i], aip[i], x[j], ai[j], aip[j])
            })?;
            Ok(Resolvent::new(&kernel)?.det())
        }
        F2Method::QIntegral => painleve2::f2_from_q(painleve2::hastings_mcleod(), s),
    }
}

/// `∫_s^∞ f(x) dx` for a functional sampled through `functionals(x)`, using a
/// Gauss rule of `outer` nodes on `(s, s + t_len)`. Evaluations run in parallel.
pub fn integrate_functionals(
    s: f64,
    outer: usize,
    t_len: f64,
    disc: Discretization,
    f: impl Fn(&AiryFunctionals) -> f64 + Sync,
) -> Result<f64> {
    use rayon::prelude::*;
    let rule = truncated_halfline(s, t_len, outer)?;
    let vals: Result<Vec<f64>> = rule
        .nodes()
        .par_iter()
        .map(|&x| functionals_with(x, disc).map(|fx| f(&fx)))
        .collect();
    let vals = vals?;
    Ok(rule.weights().iter().zip(&vals).map(|(w, v)| w * v).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_legendre;
    use crate::specfun::{airy_ai, airy_ai_prime, AIP_ZERO};
    use approx::assert_abs_diff_eq;

    #[test]
    fn kernel_diagonal_and_symmetry() {
        assert_abs_diff_eq!(airy_kernel(0.0, 0.0), AIP_ZERO * AIP_ZERO, epsilon = 1e-15);
        assert_eq!(airy_kernel(1.3, -0.4), airy_kernel(-0.4, 1.3));
        // both branches agree across the seam, up to cancellation in the quotient
        let x = 0.7;
        let a = airy_kernel(x, x + 1.01e-6);
        let b = airy_kernel(x, x + 0.99e-6);
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
    }

    #[test]
    fn kernel_integral_representation() {
        // K(x, y) = ∫_0^∞ Ai(x+z) Ai(y+z) dz, oracle by an independent rule
        let g = gauss_legendre(200).unwrap().mapped(0.0, 30.0);
        let oracle = g.integrate(|z| airy_ai(0.5 + z) * airy_ai(1.0 + z));
        assert_abs_diff_eq!(airy_kernel(0.5, 1.0), oracle, epsilon = 1e-9);
    }

    #[test]
    fn kernel_trace_matches_diagonal_quadrature() {
        let s = -1.5;
        let r = build_resolvent(s, Discretization::default()).unwrap();
        let trace = r.kernel().matrix().trace();
        let g = gauss_legendre(300).unwrap().mapped(s, s + 40.0);
        let oracle = g.integrate(|x| airy_ai_prime(x).powi(2) - x * airy_ai(x).powi(2));
        assert_abs_diff_eq!(trace, oracle, epsilon = 1e-12);
    }

    #[test]
    fn far_right_resolvent_is_identity() {
        let r = build_resolvent(10.0, Discretization::default()).unwrap();
        let q0 = r.q_nodes(0).unwrap();
        for (q, a) in q0.iter().zip(r.ai_nodes()) {
            assert!((q - a).abs() < 1e-10);
        }
    }

    #[test]
    fn defining_equation_residual() {
        let r = build_resolvent(0.0, Discretization::default()).unwrap();
        let x = r.rule().nodes();
        let w = r.rule().weights();
        let q0 = r.q_nodes(0).unwrap();
        for i in 0..x.len() {
            let kq: f64 = (0..x.len())
                .map(|j| airy_kernel(x[i], x[j]) * w[j] * q0[j])
                .sum();
            assert!((q0[i] - kq - r.ai_nodes()[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn resolvent_positive_and_converged_at_minus_two() {
        let coarse = build_resolvent(-2.0, Discretization::default()).unwrap();
        let fine = build_resolvent(
            -2.0,
            Discretization {
                m: 200,
                t_len: 40.0,
            },
        )
        .unwrap();
        let rm = coarse.resolvent_matrix().unwrap();
        for (i, &x) in coarse.rule().nodes().iter().enumerate() {
            let r = rm[(i, i)];
            assert!(r > 0.0);
            assert_abs_diff_eq!(r, fine.resolvent_at(x, x).unwrap(), epsilon = 1e-9);
        }
        // symmetry
        let asym = (&rm - rm.transpose()).abs().max();
        assert!(asym < 1e-12 * rm.abs().max().max(1.0));
    }

    #[test]
    fn moment_index_is_bounded() {
        let r = build_resolvent(0.0, Discretization::default()).unwrap();
        assert!(r.q_at(3, 0.0).is_err());
        assert!(r.p_nodes(3).is_err());
    }

    #[test]
    fn regime_limits() {
        assert!(build_resolvent(-12.5, Discretization::default()).is_err());
        assert!(f2_cdf(-10.5, F2Method::Determinant).is_err());
    }
}
