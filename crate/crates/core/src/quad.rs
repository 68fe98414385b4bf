//! Quadrature rules and the Nyström operator engine shared by every kernel
//! in the crate.
//!
//! An integral operator `K` on `(a, ∞)` is realized on a Gauss–Legendre rule
//! over the truncated interval `[a, a + T]`, in the weight-symmetrized form
//! `A_ij = √w_i K(x_i, x_j) √w_j`. Then `det(I - A)` approximates the Fredholm
//! determinant and `(I - A)` solves resolvent equations in the scaled
//! coordinates `√w g`.

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{invalid, Error, Result};

/// Largest node count accepted by [`gauss_legendre`].
pub const MAX_GAUSS_NODES: usize = 2000;

/// Nodes and positive weights of a quadrature on `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    lower: f64,
    upper: f64,
}

impl QuadRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(x_i)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// `Σ w_i f_i g_i` for values already sampled at the nodes.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// Affine image onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadRule {
        let scale = (b - a) / (self.upper - self.lower);
        let nodes = self
            .nodes
            .iter()
            .map(|&x| a + (x - self.lower) * scale)
            .collect();
        let weights = self.weights.iter().map(|&w| w * scale).collect();
        QuadRule {
            nodes,
            weights,
            lower: a,
            upper: b,
        }
    }
}

/// Gauss–Legendre rule with `m` nodes on `[-1, 1]`, nodes ascending.
///
/// Nodes come from Newton iteration on the three-term Legendre recurrence,
/// started from Tricomi's approximation; the rule is made exactly symmetric.
pub fn gauss_legendre(m: usize) -> Result<QuadRule> {
    if m == 0 || m > MAX_GAUSS_NODES {
        return Err(invalid(
            "m",
            format!("node count {m} outside 1..={MAX_GAUSS_NODES}"),
        ));
    }
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        // i-th largest root
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5);
        let mut x = (1.0 - (mf - 1.0) / (8.0 * mf * mf * mf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[m - 1 - i] = x;
        nodes[i] = -x;
        weights[m - 1 - i] = w;
        weights[i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok(QuadRule {
        nodes,
        weights,
        lower: -1.0,
        upper: 1.0,
    })
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if m == 1 {
        return (x, 1.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Realizes `(a, ∞)` as `[a, a + t_len]` with an `m`-point Gauss–Legendre rule.
pub fn truncated_halfline(a: f64, t_len: f64, m: usize) -> Result<QuadRule> {
    if !(t_len > 0.0) || !t_len.is_finite() {
        return Err(invalid(
            "T",
            format!("truncation length {t_len} must be > 0"),
        ));
    }
    if !a.is_finite() {
        return Err(invalid("a", "must be finite"));
    }
    Ok(gauss_legendre(m)?.mapped(a, a + t_len))
}

/// Weight-symmetrized Nyström matrix of a symmetric kernel.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    matrix: DMatrix<f64>,
    rule: QuadRule,
}

impl KernelMatrix {
    /// Builds `A_ij = √w_i k(i, j) √w_j` where `k(i, j)` is the kernel at the
    /// node pair; only `i ≤ j` is evaluated and the result is mirrored.
    pub fn from_node_pairs(rule: &QuadRule, k: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let m = rule.len();
        let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
        let mut matrix = DMatrix::zeros(m, m);
        for j in 0..m {
            for i in 0..=j {
                let v = sw[i] * k(i, j) * sw[j];
                if !v.is_finite() {
                    return Err(Error::NonFinite("kernel"));
                }
                matrix[(i, j)] = v;
                matrix[(j, i)] = v;
            }
        }
        Ok(KernelMatrix {
            matrix,
            rule: rule.clone(),
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rule(&self) -> &QuadRule {
        &self.rule
    }

    pub fn dim(&self) -> usize {
        self.rule.len()
    }

    /// Kernel value at a node pair, undoing the weight symmetrization.
    pub fn kernel_at(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)] / (self.rule.weights[i] * self.rule.weights[j]).sqrt()
    }
}

/// Nyström discretization `A_ij = √w_i K(x_i, x_j) √w_j`.
pub fn discretize(kernel: impl Fn(f64, f64) -> f64, rule: &QuadRule) -> Result<KernelMatrix> {
    let x = rule.nodes();
    KernelMatrix::from_node_pairs(rule, |i, j| kernel(x[i], x[j]))
}

/// LU factorization of `I - A`, reused for the determinant and every
/// resolvent solve on the same discretization.
#[derive(Debug, Clone)]
pub struct Resolvent {
    lu: LU<f64, Dyn, Dyn>,
    sqrt_w: Vec<f64>,
    det: f64,
}

impl Resolvent {
    pub fn new(a: &KernelMatrix) -> Result<Self> {
        let m = a.dim();
        let lu = (DMatrix::identity(m, m) - &a.matrix).lu();
        let det = lu.determinant();
        if !det.is_finite() {
            return Err(Error::NonFinite("determinant"));
        }
        if det <= 0.0 || !lu.is_invertible() {
            return Err(Error::Singular { det });
        }
        Ok(Resolvent {
            lu,
            sqrt_w: a.rule.weights.iter().map(|w| w.sqrt()).collect(),
            det,
        })
    }

    /// `det(I - A)`.
    pub fn det(&self) -> f64 {
        self.det
    }

    /// Solves `g - ∫ K(·, y) g(y) dy = f` on the nodes; `f` and `g` are
    /// plain function values (not weight-scaled).
    pub fn solve(&self, f: &[f64]) -> Result<Vec<f64>> {
        let rhs = DVector::from_iterator(f.len(), f.iter().zip(&self.sqrt_w).map(|(v, s)| v * s));
        let sol = self
            .lu
            .solve(&rhs)
            .ok_or(Error::Singular { det: self.det })?;
        let g: Vec<f64> = sol.iter().zip(&self.sqrt_w).map(|(v, s)| v / s).collect();
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("resolvent solve"));
        }
        Ok(g)
    }

    /// `(I - A)^{-1} A` in the symmetrized coordinates.
    pub fn apply_to_matrix(&self, a: &KernelMatrix) -> Result<DMatrix<f64>> {
        self.lu
            .solve(&a.matrix)
            .ok_or(Error::Singular { det: self.det })
    }
}

/// `det(I - A)` by pivoted LU.
pub fn fredholm_det(a: &KernelMatrix) -> Result<f64> {
    Ok(Resolvent::new(a)?.det())
}

/// Solves `(I - K) g = f` on the nodes of `a`.
pub fn resolvent_apply(a: &KernelMatrix, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != a.dim() {
        return Err(invalid(
            "f",
            format!("length {} does not match {} nodes", f.len(), a.dim()),
        ));
    }
    Resolvent::new(a)?.solve(f)
}

/// Nyström natural extension: `g(x) = f(x) + Σ_j w_j K(x, x_j) g_j`.
pub fn natural_extension(
    rule: &QuadRule,
    f_at_x: f64,
    kernel_row: impl Fn(f64) -> f64,
    g: &[f64],
) -> f64 {
    f_at_x
        + rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .zip(g)
            .map(|((&xj, &wj), &gj)| wj * kernel_row(xj) * gj)
            .sum::<f64>()
}
