//! Hastings–McLeod solution of `q'' = x q + 2 q³`.
//!
//! Chebyshev collocation on `[s_min, s_max]` with a dense Newton iteration.
//! Boundary values are pinned to the two asymptotic forms,
//! `q(s_max) = Ai(s_max)` and `q(s_min) = √(-s_min/2) (1 + 1/(8 s_min³))`.
//! Integrals of `q²` use the Chebyshev antiderivative.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::specfun::{airy_ai, airy_pair};

pub const DEFAULT_S_MIN: f64 = -12.0;
pub const DEFAULT_S_MAX: f64 = 8.0;
pub const DEFAULT_POINTS: usize = 600;
/// Stopping threshold on the max-norm Newton update.
pub const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 40;

/// Chebyshev series `Σ c_k T_k(t)` on `[a, b]`, `t = (2x - a - b)/(b - a)`.
#[derive(Debug, Clone)]
struct ChebSeries {
    a: f64,
    b: f64,
    c: Vec<f64>,
}

impl ChebSeries {
    /// From values at the Chebyshev points listed in ascending `x`.
    fn from_ascending(a: f64, b: f64, vals: &[f64]) -> Self {
        let n = vals.len() - 1;
        // ascending index j sits at t = cos(π (n - j) / n)
        let table: Vec<f64> = (0..2 * n)
            .map(|k| (PI * k as f64 / n as f64).cos())
            .collect();
        let mut c = vec![0.0; n + 1];
        for (k, ck) in c.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, v) in vals.iter().enumerate() {
                let jj = n - j;
                let term = v * table[(jj * k) % (2 * n)];
                acc += if jj == 0 || jj == n { 0.5 * term } else { term };
            }
            *ck = 2.0 * acc / n as f64;
        }
        c[0] *= 0.5;
        c[n] *= 0.5;
        ChebSeries { a, b, c }
    }

    fn to_t(&self, x: f64) -> f64 {
        (2.0 * x - self.a - self.b) / (self.b - self.a)
    }

    fn eval_t(c: &[f64], t: f64) -> f64 {
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in c.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        c[0] + t * b1 - b2
    }

    /// Antiderivative vanishing at `b`, so that `eval(x) = -∫_x^b f`.
    fn antiderivative(&self) -> ChebSeries {
        let n = self.c.len();
        let get = |k: usize| if k < n { self.c[k] } else { 0.0 };
        let half = 0.5 * (self.b - self.a);
        let mut out = vec![0.0; n + 1];
        out[1] = half * (get(0) - 0.5 * get(2));
        for (k, o) in out.iter_mut().enumerate().skip(2) {
            *o = half * (get(k - 1) - get(k + 1)) / (2.0 * k as f64);
        }
        let at_b: f64 = out.iter().sum();
        out[0] = -at_b;
        ChebSeries {
            a: self.a,
            b: self.b,
            c: out,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        Self::eval_t(&self.c, self.to_t(x))
    }
}

/// Converged collocation solution.
#[derive(Debug, Clone)]
pub struct HmGrid {
    s_min: f64,
    s_max: f64,
    x: Vec<f64>,
    q: Vec<f64>,
    qp: Vec<f64>,
    bary: Vec<f64>,
    g1: ChebSeries,
    g2: ChebSeries,
    iterations: usize,
    last_update: f64,
}

fn check_window(s_min: f64, s_max: f64, npts: usize) -> Result<()> {
    if !(s_min >= DEFAULT_S_MIN) || !s_min.is_finite() {
        return Err(invalid(
            "s_min",
            format!("{s_min} must be >= {DEFAULT_S_MIN}"),
        ));
    }
    if !(s_max >= 6.0) || !s_max.is_finite() {
        return Err(invalid("s_max", format!("{s_max} must be >= 6")));
    }
    if s_min >= 0.0 {
        return Err(invalid("s_min", "window must reach negative x"));
    }
    if !(16..=2000).contains(&npts) {
        return Err(invalid("npts", format!("{npts} not in 16..=2000")));
    }
    Ok(())
}

/// Left boundary value from the two-term algebraic asymptotic.
pub fn left_asymptotic(x: f64) -> f64 {
    (-x / 2.0).sqrt() * (1.0 + 1.0 / (8.0 * x * x * x))
}

/// Solves on `[s_min, s_max]` with `npts` collocation intervals.
pub fn hm_solve(s_min: f64, s_max: f64, npts: usize) -> Result<HmGrid> {
    check_window(s_min, s_max, npts)?;
    let n = npts;
    let half = 0.5 * (s_max - s_min);
    let t: Vec<f64> = (0..=n).map(|j| -(PI * j as f64 / n as f64).cos()).collect();
    let x: Vec<f64> = t.iter().map(|t| s_min + half * (t + 1.0)).collect();
    let bary: Vec<f64> = (0..=n)
        .map(|j| {
            let sgn = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                0.5 * sgn
            } else {
                sgn
            }
        })
        .collect();

    let mut d = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut diag = 0.0;
        for j in 0..=n {
            if i != j {
                let v = bary[j] / bary[i] / (x[i] - x[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    let d2 = &d * &d;

    let mut q = DVector::from_iterator(
        n + 1,
        x.iter()
            .map(|&xi| airy_ai(xi).max((xi.min(0.0) / -2.0).sqrt())),
    );
    q[0] = left_asymptotic(s_min);
    q[n] = airy_ai(s_max);

    let mut last = f64::INFINITY;
    let mut iterations = 0;
    while iterations < NEWTON_MAX_ITER {
        iterations += 1;
        let mut jac = d2.clone();
        let mut f = &d2 * &q;
        for i in 0..=n {
            let qi = q[i];
            f[i] -= x[i] * qi + 2.0 * qi * qi * qi;
            jac[(i, i)] -= x[i] + 6.0 * qi * qi;
        }
        for &row in &[0, n] {
            jac.row_mut(row).fill(0.0);
            jac[(row, row)] = 1.0;
            f[row] = 0.0;
        }
        let delta = jac.lu().solve(&f).ok_or(Error::Singular { det: 0.0 })?;
        q -= &delta;
        last = delta.amax();
        if !last.is_finite() {
            return Err(Error::NonFinite("Newton update"));
        }
        if last < 1e-13 {
            break;
        }
    }
    if !(last < NEWTON_TOL) {
        return Err(Error::NonConvergence {
            solver: "Painlevé II Newton",
            iterations,
            residual: last,
        });
    }

    let qp = &d * &q;
    let q: Vec<f64> = q.iter().copied().collect();
    let q2: Vec<f64> = q.iter().map(|v| v * v).collect();
    let xq2: Vec<f64> = q2.iter().zip(&x).map(|(v, x)| v * x).collect();
    let g1 = ChebSeries::from_ascending(s_min, s_max, &q2).antiderivative();
    let g2 = ChebSeries::from_ascending(s_min, s_max, &xq2).antiderivative();
    log::debug!("Painlevé II converged in {iterations} Newton steps, last update {last:e}");
    Ok(HmGrid {
        s_min,
        s_max,
        x,
        q,
        qp: qp.iter().copied().collect(),
        bary,
        g1,
        g2,
        iterations,
        last_update: last,
    })
}

/// The default solve on `[-12, 8]` with 600 intervals, computed once.
pub fn hastings_mcleod() -> &'static HmGrid {
    static GRID: OnceLock<HmGrid> = OnceLock::new();
    GRID.get_or_init(|| {
        hm_solve(DEFAULT_S_MIN, DEFAULT_S_MAX, DEFAULT_POINTS)
            .expect("default Hastings–McLeod solve converges")
    })
}

impl HmGrid {
    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// Collocation abscissae, ascending.
    pub fn abscissae(&self) -> &[f64] {
        &self.x
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q
    }

    pub fn qprime_values(&self) -> &[f64] {
        &self.qp
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Max-norm of the final Newton update.
    pub fn last_update(&self) -> f64 {
        self.last_update
    }

    fn check_inside(&self, x: f64) -> Result<()> {
        if !(x >= self.s_min && x <= self.s_max) {
            return Err(Error::OutOfRegime {
                what: "x",
                value: x,
                bound: format!("[{}, {}]", self.s_min, self.s_max),
            });
        }
        Ok(())
    }

    fn interpolate(&self, vals: &[f64], x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, (&xj, &v)) in self.x.iter().zip(vals).enumerate() {
            let dx = x - xj;
            if dx == 0.0 {
                return v;
            }
            let c = self.bary[j] / dx;
            num += c * v;
            den += c;
        }
        num / den
    }

    /// `q(x)` by barycentric interpolation.
    pub fn q_at(&self, x: f64) -> Result<f64> {
        self.check_inside(x)?;
        Ok(self.interpolate(&self.q, x))
    }

    /// `q'(x)` by barycentric interpolation of the collocation derivative.
    pub fn qprime_at(&self, x: f64) -> Result<f64> {
        self.check_inside(x)?;
        Ok(self.interpolate(&self.qp, x))
    }

    /// `u(x) = ∫_x^{s_max} q²`.
    pub fn u_at(&self, x: f64) -> Result<f64> {
        self.check_inside(x)?;
        Ok(-self.g1.eval(x))
    }

    /// Residual of the ODE at `x`, with `q''` from a 5-point stencil
    /// (`h = 0.01`) on the interpolant.
    pub fn residual_at(&self, x: f64) -> Result<f64> {
        let h = 0.01;
        self.check_inside(x - 2.0 * h)?;
        self.check_inside(x + 2.0 * h)?;
        let f = |z: f64| self.interpolate(&self.q, z);
        let q = f(x);
        let d2 = (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * q + 16.0 * f(x - h) - f(x - 2.0 * h))
            / (12.0 * h * h);
        Ok(d2 - x * q - 2.0 * q * q * q)
    }
}

/// Auxiliary functions on the grid: `u = ∫_x q²`, `p = q' + u q`,
/// `v = (u² - q²)/2`.
#[derive(Debug, Clone)]
pub struct HmAux {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
}

pub fn derive_aux(g: &HmGrid) -> HmAux {
    let u: Vec<f64> = g.x.iter().map(|&x| -g.g1.eval(x)).collect();
    let p =
        g.qp.iter()
            .zip(&u)
            .zip(&g.q)
            .map(|((qp, u), q)| qp + u * q)
            .collect();
    let v = u
        .iter()
        .zip(&g.q)
        .map(|(u, q)| 0.5 * (u * u - q * q))
        .collect();
    HmAux {
        x: g.x.clone(),
        u,
        v,
        p,
    }
}

/// `∫_s^∞ K_Ai(x, x) dx = (2s² Ai² - 2s Ai'² - Ai Ai') / 3`.
pub fn airy_trace_tail(s: f64) -> f64 {
    let (a, d) = airy_pair(s);
    (2.0 * s * s * a * a - 2.0 * s * d * d - a * d) / 3.0
}

/// `F_2(s) = exp(-∫_s^∞ (x - s) q(x)² dx)`.
///
/// Right of the grid `q` is replaced by `Ai`, whose relative error there is
/// below `Ai²`.
pub fn f2_from_q(g: &HmGrid, s: f64) -> Result<f64> {
    if s > g.s_max {
        return Ok((-airy_trace_tail(s)).exp());
    }
    g.check_inside(s)?;
    let g1 = -g.g1.eval(s);
    let g2 = -g.g2.eval(s);
    Ok((-(g2 - s * g1)).exp())
}
