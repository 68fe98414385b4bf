//! Scalar special functions: Airy `Ai`/`Ai'`, the harmonic-oscillator
//! functions `φ_k`, and the error function.
//!
//! The Airy pair is evaluated piecewise:
//!
//! * `x > 1`: the modified-Bessel integral `K_ν(ζ) = ∫₀^∞ e^{-ζ cosh t} cosh(νt) dt`
//!   with `ζ = (2/3) x^{3/2}`, summed by the trapezoid rule. The integrand is
//!   entire and doubly-exponentially decaying, so a fixed step of 0.2 is
//!   accurate to full relative precision and `Ai` underflows to 0 cleanly.
//! * `-12.25 ≤ x ≤ 1`: Taylor expansion of the Airy ODE `y'' = x y` about the
//!   nearest node of a table spaced 0.5 apart on `[-12.5, 0]`. The table is
//!   generated once by stepping from the exact values at 0; in the oscillatory
//!   region forward stepping is stable.
//! * `x < -12.25`: the oscillatory asymptotic expansion with modulus/phase
//!   series (`ζ ≥ 28`, so 20 terms reach double precision).

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use crate::error::{invalid, Result};

/// `Ai(0) = 3^{-2/3} / Γ(2/3)`.
pub const AI_ZERO: f64 = 0.355_028_053_887_817_2;
/// `Ai'(0) = -3^{-1/3} / Γ(1/3)`.
pub const AIP_ZERO: f64 = -0.258_819_403_792_806_8;

/// Largest Hermite degree accepted by [`hermite_phi`].
pub const MAX_HERMITE_DEGREE: usize = 1_000_000;

const TABLE_STEP: f64 = 0.5;
const TABLE_LEN: usize = 26;
const ASYMPTOTIC_LEFT: f64 = -12.25;

/// Airy function of the first kind.
pub fn airy_ai(x: f64) -> f64 {
    airy_pair(x).0
}

/// Derivative of the Airy function of the first kind.
pub fn airy_ai_prime(x: f64) -> f64 {
    airy_pair(x).1
}

/// `(Ai(x), Ai'(x))` evaluated together.
pub fn airy_pair(x: f64) -> (f64, f64) {
    if x > 1.0 {
        airy_bessel_integral(x)
    } else if x >= ASYMPTOTIC_LEFT {
        let table = anchor_table();
        let j = ((-x / TABLE_STEP).round().max(0.0) as usize).min(TABLE_LEN - 1);
        let x0 = -(j as f64) * TABLE_STEP;
        let (y0, d0) = table[j];
        taylor_step(x0, y0, d0, x - x0)
    } else {
        airy_oscillatory(-x)
    }
}

fn anchor_table() -> &'static [(f64, f64); TABLE_LEN] {
    static TABLE: OnceLock<[(f64, f64); TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [(0.0, 0.0); TABLE_LEN];
        table[0] = (AI_ZERO, AIP_ZERO);
        for j in 1..TABLE_LEN {
            let x0 = -((j - 1) as f64) * TABLE_STEP;
            let (y, d) = table[j - 1];
            // two half steps keep |h| inside the fast-convergence range
            let (ym, dm) = taylor_step(x0, y, d, -0.5 * TABLE_STEP);
            table[j] = taylor_step(x0 - 0.5 * TABLE_STEP, ym, dm, -0.5 * TABLE_STEP);
        }
        table
    })
}

/// Advances the solution of `y'' = x y` from `x0` by `h` using its Taylor series.
fn taylor_step(x0: f64, y0: f64, d0: f64, h: f64) -> (f64, f64) {
    // a_{k+2} (k+2)(k+1) = x0 a_k + a_{k-1}
    let mut a_km1 = d0; // a_1
    let mut a_km2 = y0; // a_0
    let mut a_km3 = 0.0;
    let mut y = y0 + d0 * h;
    let mut dy = d0;
    let mut hp = h; // h^{k-1}
    let scale = y0.abs() + d0.abs() + f64::MIN_POSITIVE;
    let mut small = 0;
    for k in 2..120usize {
        let a_k = (x0 * a_km2 + a_km3) / ((k * (k - 1)) as f64);
        let dterm = (k as f64) * a_k * hp;
        hp *= h;
        let term = a_k * hp;
        y += term;
        dy += dterm;
        if term.abs() < 1e-18 * scale && dterm.abs() < 1e-18 * scale {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
        a_km3 = a_km2;
        a_km2 = a_km1;
        a_km1 = a_k;
    }
    (y, dy)
}

fn airy_bessel_integral(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let decay = (-zeta).exp();
    if decay == 0.0 {
        return (0.0, 0.0);
    }
    // e^{ζ} K_ν(ζ) = ∫₀^∞ exp(-ζ (cosh t - 1)) cosh(ν t) dt
    let h = 0.2;
    let mut k13 = 0.5;
    let mut k23 = 0.5;
    for i in 1..400 {
        let t = i as f64 * h;
        let e = (-zeta * (t.cosh() - 1.0)).exp();
        let a = e * (t / 3.0).cosh();
        let b = e * (2.0 * t / 3.0).cosh();
        k13 += a;
        k23 += b;
        if b < 1e-18 * k23 {
            break;
        }
    }
    k13 *= h;
    k23 *= h;
    let ai = (x / 3.0).sqrt() / PI * k13 * decay;
    let aip = -x / (PI * 3f64.sqrt()) * k23 * decay;
    (ai, aip)
}

/// `(Ai(-z), Ai'(-z))` for large positive `z`.
fn airy_oscillatory(z: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let mut u = 1.0;
    let (mut su_even, mut su_odd) = (1.0, 0.0);
    let (mut sv_even, mut sv_odd) = (1.0, 0.0);
    let mut zpow = 1.0;
    for k in 1..40usize {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        zpow *= zeta;
        let tu = u / zpow;
        let tv = v / zpow;
        // (-1)^j with j = k / 2 (rounded down)
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            su_even += sign * tu;
            sv_even += sign * tv;
        } else {
            su_odd += sign * tu;
            sv_odd += sign * tv;
        }
        if tu.abs() < 1e-17 && tv.abs() < 1e-17 {
            break;
        }
    }
    let (s, c) = (zeta - FRAC_PI_4).sin_cos();
    let root_pi = PI.sqrt();
    let q = z.sqrt().sqrt();
    let ai = (c * su_even + s * su_odd) / (root_pi * q);
    let aip = q / root_pi * (s * sv_even - c * sv_odd);
    (ai, aip)
}

/// Orthonormal Hermite function `φ_k(x) = H_k(x) e^{-x²/2} / (2^k k! √π)^{1/2}`.
pub fn hermite_phi(k: usize, x: f64) -> Result<f64> {
    if k > MAX_HERMITE_DEGREE {
        return Err(invalid(
            "k",
            format!("degree {k} exceeds {MAX_HERMITE_DEGREE}"),
        ));
    }
    if !x.is_finite() {
        return Err(invalid("x", "must be finite"));
    }
    Ok(hermite_phi_triple(k, x)[2])
}

/// `[φ_{n-2}(x), φ_{n-1}(x), φ_n(x)]`, with zeros for negative indices.
///
/// Runs the orthonormal three-term recurrence on `φ_k e^{x²/2} π^{1/4}` and
/// keeps a separate log-scale so nothing overflows for `x` far past the
/// turning point `√(2n)`.
pub fn hermite_phi_triple(n: usize, x: f64) -> [f64; 3] {
    let mut pm2 = 0.0;
    let mut pm1 = 0.0;
    let mut p = 1.0;
    let mut log_scale = 0.0;
    for k in 0..n {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * p - (kf / (kf + 1.0)).sqrt() * pm1;
        pm2 = pm1;
        pm1 = p;
        p = next;
        let mag = p.abs().max(pm1.abs());
        if mag > 1e150 {
            pm2 /= mag;
            pm1 /= mag;
            p /= mag;
            log_scale += mag.ln();
        }
    }
    let factor = (log_scale - 0.5 * x * x).exp() * PI.powf(-0.25);
    [pm2 * factor, pm1 * factor, p * factor]
}

/// `φ_k'(x) = -x φ_k(x) + √(2k) φ_{k-1}(x)` from a triple ending at `k = n`.
pub fn hermite_phi_prime(n: usize, x: f64, triple: &[f64; 3]) -> (f64, f64) {
    let dn = -x * triple[2] + (2.0 * n as f64).sqrt() * triple[1];
    let dnm1 = if n == 0 {
        0.0
    } else {
        -x * triple[1] + (2.0 * (n - 1) as f64).sqrt() * triple[0]
    };
    (dnm1, dn)
}

/// The error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn airy_at_origin() {
        assert_abs_diff_eq!(airy_ai(0.0), 0.355028053887817, epsilon = 1e-15);
        assert_abs_diff_eq!(airy_ai_prime(0.0), -0.258819403792807, epsilon = 1e-15);
    }

    #[test]
    fn branches_agree_at_switch_points() {
        // x = 1: Taylor about 0 vs Bessel integral
        let (a, b) = taylor_step(0.0, AI_ZERO, AIP_ZERO, 1.0);
        let (c, d) = airy_bessel_integral(1.0);
        assert_abs_diff_eq!(a, c, epsilon = 1e-15);
        assert_abs_diff_eq!(b, d, epsilon = 1e-15);
        // x = -12.25: table vs asymptotic
        let table = anchor_table();
        let (y0, d0) = table[24];
        let (a, b) = taylor_step(-12.0, y0, d0, -0.25);
        let (c, d) = airy_oscillatory(12.25);
        assert_abs_diff_eq!(a, c, epsilon = 1e-14);
        assert_abs_diff_eq!(b, d, epsilon = 1e-13);
    }

    #[test]
    fn airy_underflows_to_zero() {
        assert_eq!(airy_ai(200.0), 0.0);
        assert_eq!(airy_ai_prime(200.0), 0.0);
        assert!(airy_ai(100.0) >= 0.0);
    }

    #[test]
    fn hermite_low_order() {
        assert_abs_diff_eq!(
            hermite_phi(0, 0.0).unwrap(),
            0.751125544464943,
            epsilon = 1e-15
        );
        assert_eq!(hermite_phi(1, 0.0).unwrap(), 0.0);
        // φ_1(x) = √2 x φ_0(x)
        let x = 0.7;
        assert_abs_diff_eq!(
            hermite_phi(1, x).unwrap(),
            2f64.sqrt() * x * hermite_phi(0, x).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn hermite_rejects_huge_degree() {
        assert!(hermite_phi(MAX_HERMITE_DEGREE + 1, 0.0).is_err());
        assert!(hermite_phi(3, f64::NAN).is_err());
    }

    #[test]
    fn hermite_far_past_turning_point_is_finite() {
        let n = 5000;
        let x = (2.0 * n as f64).sqrt() + 10.0;
        let t = hermite_phi_triple(n, x);
        assert!(t.iter().all(|v| v.is_finite()));
        assert!(t[2] > 0.0 && t[2] < 1e-10);
    }

    #[test]
    fn erf_values() {
        assert_eq!(erf(0.0), 0.0);
        assert_abs_diff_eq!(erf(40.0), 1.0, epsilon = 1e-16);
    }
}
