//! Edgeworth-type expansion of the finite-n largest-eigenvalue law:
//!
//! `F_{n,2}(τ(s)) = F_2(s) {1 + c u_0(s) n^{-1/3} - E_{c,2}(s) n^{-2/3} / 20} + O(n^{-1})`.
//!
//! The second-order coefficient is available in closed form ([`ec2`]) and as
//! an integral over the Airy functionals ([`bracket_integral`]); the two agree
//! only for one reading of the `v_1` term, which [`adjudicate`] settles
//! numerically.

use rayon::prelude::*;

use crate::airy_ops::{self, AiryFunctionals, Discretization};
use crate::error::{invalid, Result};
use crate::fit::loglog_slope;
use crate::hermite_n::{cdf_fredholm, ScalingMap};

/// Outer Gauss nodes and window length for [`bracket_integral`].
pub const BRACKET_NODES: usize = 200;
pub const BRACKET_WINDOW: f64 = 40.0;
/// Residuals below this are treated as indistinguishable from discretization noise.
pub const NOISE_FLOOR: f64 = 1e-7;

/// Which `v_1` enters `E_{c,2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Ec2Variant {
    /// `... + u_1 v_0 - u_0 v_1 + ...` as printed in the closed form.
    Printed,
    /// The same with `ṽ_1 = (Q_1, Ai')` in place of `v_1`.
    TildeV1,
}

/// `E_{c,2} = 2w_1 - 3u_2 + (-20c² + 3)v_0 + u_1 v_0 - u_0 v_1 + u_0 v_0² - u_0² w_0`.
pub fn ec2_from(f: &AiryFunctionals, c: f64, variant: Ec2Variant) -> f64 {
    let (u, v, w) = (f.u, f.v, f.w);
    let v1 = match variant {
        Ec2Variant::Printed => v[1],
        Ec2Variant::TildeV1 => f.vt[1],
    };
    2.0 * w[1] - 3.0 * u[2] + (-20.0 * c * c + 3.0) * v[0] + u[1] * v[0] - u[0] * v1
        + u[0] * v[0] * v[0]
        - u[0] * u[0] * w[0]
}

/// `E_{c,2}(s)` with the printed reading.
pub fn ec2(s: f64, c: f64) -> Result<f64> {
    Ok(ec2_from(&airy_ops::functionals(s)?, c, Ec2Variant::Printed))
}

/// Integrand of the second-order bracket:
/// `-6u_1 - 2v_2 - 2v_1 v_0 + 2u_2 u_0 + u_1² + 2w_0`.
pub fn bracket_integrand(f: &AiryFunctionals) -> f64 {
    let (u, v, w) = (f.u, f.v, f.w);
    -6.0 * u[1] - 2.0 * v[2] - 2.0 * v[1] * v[0] + 2.0 * u[2] * u[0] + u[1] * u[1] + 2.0 * w[0]
}

/// `(20c² - 3) v_0(s) + ∫_s^∞ bracket_integrand`, on a 200-node rule over `(s, s + 40)`.
pub fn bracket_integral(s: f64, c: f64) -> Result<f64> {
    let v0 = airy_ops::functionals(s)?.v[0];
    Ok((20.0 * c * c - 3.0) * v0 + bracket_tail(s)?)
}

/// The `c`-independent integral part of [`bracket_integral`].
pub fn bracket_tail(s: f64) -> Result<f64> {
    airy_ops::integrate_functionals(
        s,
        BRACKET_NODES,
        BRACKET_WINDOW,
        Discretization::default(),
        bracket_integrand,
    )
}

/// All pieces of the expansion at one `(s, c)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EdgeworthTerms {
    pub s: f64,
    pub c: f64,
    pub f2: f64,
    pub u0: f64,
    /// `c u_0(s)`
    pub term1: f64,
    /// `-E_{c,2}(s) / 20`
    pub term2_closed: f64,
    /// `bracket / 20`, present when the integral form was requested.
    pub term2_integral: Option<f64>,
}

impl EdgeworthTerms {
    /// Closed-form terms only.
    pub fn new(s: f64, c: f64) -> Result<Self> {
        let r = airy_ops::build_resolvent(s, Discretization::default())?;
        let f = r.functionals();
        Ok(EdgeworthTerms {
            s,
            c,
            f2: r.det(),
            u0: f.u[0],
            term1: c * f.u[0],
            term2_closed: -ec2_from(&f, c, Ec2Variant::Printed) / 20.0,
            term2_integral: None,
        })
    }

    /// Adds the integral form of the second-order term.
    pub fn with_integral(mut self) -> Result<Self> {
        self.term2_integral = Some(bracket_integral(self.s, self.c)? / 20.0);
        Ok(self)
    }

    /// `F_2 {1 + term1 n^{-1/3} + term2 n^{-2/3}}` truncated at `order`.
    pub fn assembled(&self, n: usize, order: usize) -> Result<f64> {
        self.assemble(n, order, self.term2_closed)
    }

    /// As [`Self::assembled`] at order 2 with the integral form of the second term.
    pub fn assembled_integral(&self, n: usize) -> Result<f64> {
        let t2 = self
            .term2_integral
            .ok_or_else(|| invalid("term2_integral", "not computed; call with_integral"))?;
        self.assemble(n, 2, t2)
    }

    fn assemble(&self, n: usize, order: usize, t2: f64) -> Result<f64> {
        if n < 1 {
            return Err(invalid("n", "must be at least 1"));
        }
        if order > 2 {
            return Err(invalid("order", format!("{order} not in 0..=2")));
        }
        let e = (n as f64).powf(-1.0 / 3.0);
        let mut factor = 1.0;
        if order >= 1 {
            factor += self.term1 * e;
        }
        if order >= 2 {
            factor += t2 * e * e;
        }
        Ok(self.f2 * factor)
    }
}

/// The expansion through `order` at `(n, c, s)`.
pub fn edgeworth_cdf(n: usize, c: f64, s: f64, order: usize) -> Result<f64> {
    EdgeworthTerms::new(s, c)?.assembled(n, order)
}

/// Residuals `|F_{n,2}(τ(s)) - approximation|` over `ns` for orders 0, 1, 2.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OrderEstimate {
    pub c: f64,
    pub s: f64,
    pub ns: Vec<usize>,
    pub exact: Vec<f64>,
    pub approx: Vec<[f64; 3]>,
    pub residuals: Vec<[f64; 3]>,
    pub slopes: [Option<f64>; 3],
    /// Some residual of that order fell below [`NOISE_FLOOR`].
    pub floor_hit: [bool; 3],
}

pub fn order_estimate(c: f64, s: f64, ns: &[usize]) -> Result<OrderEstimate> {
    if ns.len() < 4 {
        return Err(invalid("ns", "need at least four sizes"));
    }
    if ns.iter().any(|&n| !(16..=1024).contains(&n)) {
        return Err(invalid("ns", "sizes must lie in 16..=1024"));
    }
    let terms = EdgeworthTerms::new(s, c)?;
    let exact: Result<Vec<f64>> = ns
        .par_iter()
        .map(|&n| cdf_fredholm(n, ScalingMap::new(n, c)?.tau(s)))
        .collect();
    let exact = exact?;
    let mut approx = Vec::with_capacity(ns.len());
    let mut residuals = Vec::with_capacity(ns.len());
    for (&n, &fe) in ns.iter().zip(&exact) {
        let mut a = [0.0; 3];
        let mut r = [0.0; 3];
        for k in 0..3 {
            a[k] = terms.assembled(n, k)?;
            r[k] = (fe - a[k]).abs();
        }
        approx.push(a);
        residuals.push(r);
    }
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let mut slopes = [None; 3];
    let mut floor_hit = [false; 3];
    for k in 0..3 {
        let y: Vec<f64> = residuals.iter().map(|r| r[k]).collect();
        floor_hit[k] = y.iter().any(|v| *v < NOISE_FLOOR);
        slopes[k] = loglog_slope(&x, &y).ok();
    }
    Ok(OrderEstimate {
        c,
        s,
        ns: ns.to_vec(),
        exact,
        approx,
        residuals,
        slopes,
        floor_hit,
    })
}

/// Outcome of comparing `bracket_integral` with `-E_{c,2}` for both readings.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Adjudication {
    pub c: f64,
    pub tolerance: f64,
    pub s: Vec<f64>,
    pub bracket: Vec<f64>,
    pub neg_ec2_printed: Vec<f64>,
    pub neg_ec2_tilde: Vec<f64>,
    pub printed_passes: bool,
    pub tilde_passes: bool,
}

impl Adjudication {
    /// The single reading that passes at every `s`, if exactly one does.
    pub fn verdict(&self) -> Option<Ec2Variant> {
        match (self.printed_passes, self.tilde_passes) {
            (true, false) => Some(Ec2Variant::Printed),
            (false, true) => Some(Ec2Variant::TildeV1),
            _ => None,
        }
    }

    pub fn worst(&self, variant: Ec2Variant) -> f64 {
        let other = match variant {
            Ec2Variant::Printed => &self.neg_ec2_printed,
            Ec2Variant::TildeV1 => &self.neg_ec2_tilde,
        };
        self.bracket
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A reading passes when `|bracket + E_{c,2}| < tolerance` at every `s`.
pub fn adjudicate(ss: &[f64], c: f64, tolerance: f64) -> Result<Adjudication> {
    if ss.is_empty() {
        return Err(invalid("ss", "need at least one s"));
    }
    let rows: Result<Vec<(f64, f64, f64)>> = ss
        .iter()
        .map(|&s| {
            let f = airy_ops::functionals(s)?;
            let b = (20.0 * c * c - 3.0) * f.v[0] + bracket_tail(s)?;
            Ok((
                b,
                -ec2_from(&f, c, Ec2Variant::Printed),
                -ec2_from(&f, c, Ec2Variant::TildeV1),
            ))
        })
        .collect();
    let rows = rows?;
    let mut adj = Adjudication {
        c,
        tolerance,
        s: ss.to_vec(),
        bracket: rows.iter().map(|r| r.0).collect(),
        neg_ec2_printed: rows.iter().map(|r| r.1).collect(),
        neg_ec2_tilde: rows.iter().map(|r| r.2).collect(),
        printed_passes: false,
        tilde_passes: false,
    };
    adj.printed_passes = adj.worst(Ec2Variant::Printed) < tolerance;
    adj.tilde_passes = adj.worst(Ec2Variant::TildeV1) < tolerance;
    Ok(adj)
}
