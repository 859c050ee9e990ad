//! Gaussian integrals of `exp(-V2)`: pair factors, `Z2`, `Lambda_2(q)`,
//! `eps_int2`, and the free particle-particle bubble.
//!
//! For a pair `{q, -q}` the quadratic form is `(a - i g)|phi_q|^2 + (a + i g)|phi_{-q}|^2
//! + b |e^{-i theta} phi_q + e^{i theta} conj(phi_{-q})|^2` with `a = alpha_eff + shift`,
//! whose determinant is `a^2 + g^2 + 2ab`. Measures are `d^2 phi / pi` per mode.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::{GaussHermite, GaussLegendre};
use num_complex::Complex64;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::expansion::QuadraticForm;
use crate::model::{Flavor, Lattice, Momentum};

/// Stiffness `a` multiplying `|phi_q|^2` in the pair form.
pub fn stiffness(qf: &QuadraticForm, q: usize) -> f64 {
    qf.alpha_eff(q) + qf.shift
}

/// `1 / (a^2 + gamma^2 + 2 a beta)`, the normalized pair integral.
pub fn pair_factor_coeffs(a: f64, beta: f64, gamma: f64) -> Result<f64> {
    let den = a * a + gamma * gamma + 2.0 * a * beta;
    if !(den > 0.0) || !den.is_finite() {
        return Err(Error::FlatMode(format!("pair determinant {den:e}")));
    }
    Ok(1.0 / den)
}

pub fn pair_factor(qf: &QuadraticForm, q: usize) -> Result<f64> {
    pair_factor_coeffs(stiffness(qf, q), qf.beta_coef[q], qf.gamma[q])
}

/// One representative per `{q, -q}`: `q0 > 0`, or `q0 = 0` and first nonzero spatial component `> 0`.
pub fn is_representative(q: &Momentum) -> bool {
    debug_assert_eq!(q.flavor, Flavor::Bosonic);
    if q.n0 != 0 {
        return q.n0 > 0;
    }
    q.m.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

pub fn representatives(lat: &Lattice) -> Vec<usize> {
    (0..lat.q.len()).filter(|&i| is_representative(&lat.q.q[i])).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairQuadrature {
    /// `int exp(-form) d^2phi_q d^2phi_{-q} / pi^2`
    pub value: Complex64,
    /// Normalized `<|phi_q|^2>`.
    pub moment: Complex64,
    pub order: usize,
}

/// Tensor Gauss-Hermite integral of `exp(-[(a + i g)|phi_q|^2 + (a - i g)|phi_{-q}|^2
/// + b|e^{-i theta} phi_q + e^{i theta} conj(phi_{-q})|^2])`.
///
/// Nodes are placed in `s = (w + y)/sqrt 2`, `d = (w - y)/sqrt 2` with
/// `w = e^{-i theta} phi_q`, `y = e^{i theta} conj(phi_{-q})`, where the real part
/// is `(a + 2b)|s|^2 + a|d|^2`; the exponent itself is evaluated in the original variables.
pub fn pair_quadrature(a: f64, b: f64, g: f64, theta: f64, tol: f64) -> Result<PairQuadrature> {
    if !(a > 0.0 && a + 2.0 * b > 0.0) {
        return Err(Error::FlatMode(format!("real part not positive definite (a={a:e}, b={b:e})")));
    }
    let form = |pq: Complex64, pm: Complex64| {
        let w = Complex64::from_polar(1.0, -theta) * pq + Complex64::from_polar(1.0, theta) * pm.conj();
        Complex64::new(a, g) * pq.norm_sqr() + Complex64::new(a, -g) * pm.norm_sqr() + b * w.norm_sqr()
    };
    let (ss, sd) = ((a + 2.0 * b).sqrt(), a.sqrt());
    let rot = Complex64::from_polar(1.0, theta);
    let eval = |n: usize| {
        let rule = GaussHermite::new(NonZeroUsize::new(n).unwrap());
        let nw = rule.as_node_weight_pairs();
        let (mut z, mut m) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &(x1, w1) in nw {
            for &(x2, w2) in nw {
                let s = Complex64::new(x1, x2) / ss;
                for &(x3, w3) in nw {
                    for &(x4, w4) in nw {
                        let d = Complex64::new(x3, x4) / sd;
                        let w = (s + d) / std::f64::consts::SQRT_2;
                        let y = (s - d) / std::f64::consts::SQRT_2;
                        let pq = rot * w;
                        let pm = (y * rot.conj()).conj();
                        let gauss = x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4;
                        let f = (gauss - form(pq, pm)).exp() * (w1 * w2 * w3 * w4);
                        z += f;
                        m += f * pq.norm_sqr();
                    }
                }
            }
        }
        let z = z / (PI * PI * a * (a + 2.0 * b));
        let m = m / (PI * PI * a * (a + 2.0 * b));
        (z, m / z)
    };
    let mut n = 16;
    let mut prev = eval(n);
    loop {
        let next_n = (2 * n).min(96);
        let cur = eval(next_n);
        let dz = (cur.0 - prev.0).norm() / cur.0.norm();
        let dm = (cur.1 - prev.1).norm() / cur.1.norm();
        if dz < tol && dm < tol {
            return Ok(PairQuadrature { value: cur.0, moment: cur.1, order: next_n });
        }
        if next_n == 96 {
            return Err(Error::NoConvergence {
                iterations: next_n,
                detail: format!("pair quadrature relative change {:e}", dz.max(dm)),
            });
        }
        n = next_n;
        prev = cur;
    }
}

/// `int_0^inf exp(-s (rho - c)^2) 2 rho d rho = e^{-s c^2}/s + c sqrt(pi/s) erfc(-c sqrt s)`
pub fn radial_integral(s: f64, c: f64) -> f64 {
    (-s * c * c).exp() / s + c * (PI / s).sqrt() * erfc(-c * s.sqrt())
}

fn log_radial(s: f64, c: f64) -> f64 {
    radial_integral(s, c).ln()
}

/// How the `q = 0` mode enters `eps_int2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroModeHandling {
    Included,
    Excluded,
}

/// Normalized zero-mode integral and its `<|phi_0|^2>`.
fn zero_mode(qf: &QuadraticForm, kappa: f64, beta0_exponent: f64) -> Result<(f64, f64)> {
    if qf.external.is_some() {
        // exp(-(soft) u0^2 - (2 beta0 + soft)(v0 - sqrt(kappa) y0)^2)
        let soft = qf.edge_zero() + qf.shift;
        let hard = beta0_exponent + soft;
        if !(soft > 0.0 && hard > 0.0) {
            return Err(Error::FlatMode(format!("zero mode under external field (soft={soft:e})")));
        }
        let y0 = qf.y0.unwrap_or(-qf.r0);
        let m = kappa * y0 * y0 + 0.5 / soft + 0.5 / hard;
        return Ok((-(0.5 * (soft * hard).ln()), m));
    }
    if beta0_exponent > 0.0 {
        let c = kappa.sqrt() * qf.r0;
        return Ok((log_radial(beta0_exponent, c), f64::NAN));
    }
    let b0 = qf.edge_zero();
    if !(b0 > 0.0) {
        return Err(Error::FlatMode(format!("zero mode curvature {b0:e}")));
    }
    Ok((-b0.ln(), 1.0 / b0))
}

fn legendre(order: usize, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    GaussLegendre::new(NonZeroUsize::new(order).unwrap()).integrate(lo, hi, f)
}

/// Moments `(int rho e^{-s(rho-c)^2} 2 d rho, int rho^3 e^{-s(rho-c)^2} 2 d rho)` by Gauss-Legendre.
pub fn radial_moments(s: f64, c: f64, tol: f64) -> Result<(f64, f64)> {
    let w = 12.0 / s.sqrt();
    let (lo, hi) = ((c - w).max(0.0), c + w);
    let f0 = |r: f64| 2.0 * r * (-s * (r - c).powi(2)).exp();
    let f2 = |r: f64| 2.0 * r * r * r * (-s * (r - c).powi(2)).exp();
    let mut n = 32;
    let mut prev = (legendre(n, lo, hi, f0), legendre(n, lo, hi, f2));
    while n < 1024 {
        n *= 2;
        let cur = (legendre(n, lo, hi, f0), legendre(n, lo, hi, f2));
        if (cur.0 - prev.0).abs() <= tol * cur.0.abs() && (cur.1 - prev.1).abs() <= tol * cur.1.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NoConvergence { iterations: n, detail: "radial quadrature".into() })
}

/// `(<|phi_0|^2> - 1)/lambda` under the zero-mode weight of `V2`.
pub fn lambda2_zero(lat: &Lattice, qf: &QuadraticForm) -> Result<f64> {
    let lam = lat.spec.lambda;
    if lam == 0.0 {
        return Err(Error::Invalid("lambda = 0: use free_bubble".into()));
    }
    let m = if qf.external.is_none() && qf.beta0 > 0.0 && qf.r0 > 0.0 {
        let (z, m2) = radial_moments(2.0 * qf.beta0, lat.kappa().sqrt() * qf.r0, 1e-12)?;
        m2 / z
    } else {
        zero_mode(qf, lat.kappa(), 2.0 * qf.beta0)?.1
    };
    Ok((m - 1.0) / lam)
}

/// `(1/lambda)[(a + i gamma_q + beta_q)/(a^2 + gamma_q^2 + 2 a beta_q) - 1]`
pub fn lambda2(lat: &Lattice, qf: &QuadraticForm, q: usize) -> Result<Complex64> {
    if q == lat.q.zero {
        return Err(Error::Invalid("q = 0: use lambda2_zero".into()));
    }
    let lam = lat.spec.lambda;
    if lam == 0.0 {
        return Err(Error::Invalid("lambda = 0: use free_bubble".into()));
    }
    let a = stiffness(qf, q);
    let pf = pair_factor(qf, q)?;
    Ok((Complex64::new(a + qf.beta_coef[q], qf.gamma[q]) * pf - 1.0) / lam)
}

/// `(1/kappa) sum_{k in M, q-k in M} C_k C_{q-k}`
pub fn free_bubble(lat: &Lattice, q: usize) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..lat.n() {
        // q - k = -(k - q)
        if let Some(j) = lat.shifted(k, q) {
            let qk = lat.m.momenta[j].neg();
            if let Some(&i) = lat.m.index.get(&qk) {
                s += 1.0 / (lat.m.a[k] * lat.m.a[i]);
            }
        }
    }
    s / lat.kappa()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsInt2 {
    pub value: f64,
    /// `(1/kappa) |Im sum_q Lambda_2(q)|`, zero up to rounding.
    pub imag_residue: f64,
    pub handling: ZeroModeHandling,
}

/// `(1/kappa)[sum_{q != 0} Re Lambda_2(q) + lambda2_zero if included]`
pub fn eps_int2(lat: &Lattice, qf: &QuadraticForm, include_zero_mode: bool) -> Result<EpsInt2> {
    let mut s = Complex64::new(0.0, 0.0);
    for q in 0..lat.q.len() {
        if q != lat.q.zero {
            s += lambda2(lat, qf, q)?;
        }
    }
    let mut value = s.re;
    if include_zero_mode {
        value += lambda2_zero(lat, qf)?;
    }
    let k = lat.kappa();
    Ok(EpsInt2 {
        value: value / k,
        imag_residue: s.im.abs() / k,
        handling: if include_zero_mode { ZeroModeHandling::Included } else { ZeroModeHandling::Excluded },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Z2 {
    pub z2: f64,
    pub log_z2: f64,
    /// Same with the radial exponent `2 beta0^2`.
    pub log_z2_beta0_sq: f64,
    pub log_zero_mode: f64,
    pub log_pairs: f64,
}

/// `e^{-V_min} x (zero-mode integral) x prod over representatives of pair_factor`, in log space.
pub fn z2(lat: &Lattice, qf: &QuadraticForm) -> Result<Z2> {
    let mut log_pairs = 0.0;
    for q in representatives(lat) {
        log_pairs += pair_factor(qf, q)?.ln();
    }
    let k = lat.kappa();
    let log_zero_mode = zero_mode(qf, k, 2.0 * qf.beta0)?.0;
    let alt = zero_mode(qf, k, 2.0 * qf.beta0 * qf.beta0)?.0;
    let log_z2 = -qf.v_min + log_zero_mode + log_pairs;
    Ok(Z2 { z2: log_z2.exp(), log_z2, log_z2_beta0_sq: -qf.v_min + alt + log_pairs, log_zero_mode, log_pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianReport {
    pub z2: f64,
    pub log_z2: f64,
    pub log_z2_beta0_sq: f64,
    pub lambda2: Vec<(Momentum, Complex64)>,
    pub lambda2_zero: Option<f64>,
    pub eps_int2: f64,
    pub eps_int2_imag_residue: f64,
    pub pair_factors: Vec<(Momentum, f64)>,
    pub q0_zero_handling: ZeroModeHandling,
}

pub fn report(lat: &Lattice, qf: &QuadraticForm, include_zero_mode: bool) -> Result<GaussianReport> {
    let z = z2(lat, qf)?;
    let eps = eps_int2(lat, qf, include_zero_mode)?;
    let mut l2 = Vec::with_capacity(lat.q.len());
    for q in 0..lat.q.len() {
        if q != lat.q.zero {
            l2.push((lat.q.q[q], lambda2(lat, qf, q)?));
        }
    }
    let mut pf = Vec::new();
    for q in representatives(lat) {
        pf.push((lat.q.q[q], pair_factor(qf, q)?));
    }
    Ok(GaussianReport {
        z2: z.z2,
        log_z2: z.log_z2,
        log_z2_beta0_sq: z.log_z2_beta0_sq,
        lambda2: l2,
        lambda2_zero: if include_zero_mode { Some(lambda2_zero(lat, qf)?) } else { None },
        eps_int2: eps.value,
        eps_int2_imag_residue: eps.imag_residue,
        pair_factors: pf,
        q0_zero_handling: eps.handling,
    })
}
