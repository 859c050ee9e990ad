//! Second-order expansion of `V` around the BCS minimum and of `U_r` around
//! the external-field minimum, plus finite-difference oracles.
//!
//! With k-sums restricted to `k, k-q in M`, the coefficient of `|phi_q|^2` is
//! `alpha_q + edge_q - i gamma_q`, where
//! `edge_q = 1 - (lambda/2kappa) sum_k (1/E_k^2 + 1/E_{k-q}^2)` is the part of
//! the gap equation that does not cancel on a finite cutoff set. Real
//! coordinates are `x[2i] = Re phi_{q_i}`, `x[2i+1] = Im phi_{q_i}`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gap::{vbcs_r, GapSolution};
use crate::model::{bcs_config, FieldConfig, Lattice};
use crate::potential::{potential_external, potential_full, vbcs_sum, ExternalField};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticForm {
    pub alpha: Vec<f64>,
    pub beta_coef: Vec<f64>,
    pub gamma: Vec<f64>,
    pub edge: Vec<f64>,
    pub beta0: f64,
    pub r0: f64,
    /// Condensate phase at `r = 0`; the field phase `alpha` under an external field.
    pub theta0: f64,
    pub v_min: f64,
    /// `E_k^2 = k0^2 + e_k^2 + lambda r0^2`, indexed like `M`.
    pub e_sq: Vec<f64>,
    /// `|r|/(g|y0|)`, zero without a field.
    pub shift: f64,
    pub external: Option<ExternalField>,
    pub y0: Option<f64>,
    /// Index of `q = 0` in `Q`.
    pub zero: usize,
}

impl QuadraticForm {
    pub fn alpha_eff(&self, q: usize) -> f64 {
        self.alpha[q] + self.edge[q]
    }

    pub fn edge_zero(&self) -> f64 {
        self.edge[self.zero]
    }

    /// Phase `theta` in the pair term `|e^{-i theta} phi_q + e^{i theta} conj(phi_{-q})|^2`.
    pub fn pair_phase(&self) -> f64 {
        match self.external {
            Some(r) => r.phase - FRAC_PI_2,
            None => self.theta0,
        }
    }

    /// Direction of `phi_0` at the minimum, before any tilt.
    pub fn condensate_angle(&self) -> f64 {
        match self.external {
            Some(_) => -FRAC_PI_2,
            None => self.theta0,
        }
    }

    /// Field at the expansion point.
    pub fn minimum(&self, lat: &Lattice) -> FieldConfig {
        match self.y0 {
            Some(y0) => {
                let mut phi = FieldConfig::zeros(lat);
                phi.amps[lat.q.zero] = Complex64::new(0.0, lat.kappa().sqrt() * y0);
                phi
            }
            None => bcs_config(lat, self.r0, self.theta0),
        }
    }
}

struct Sums {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: Vec<f64>,
    b: Vec<f64>,
    e_sq: Vec<f64>,
}

fn sums(lat: &Lattice, amp: f64) -> Sums {
    let lam = lat.spec.lambda;
    let f = lam / lat.kappa();
    let d2 = lam * amp * amp;
    let e_sq: Vec<f64> = (0..lat.n()).map(|k| lat.m.abs_a_sq(k) + d2).collect();
    let nq = lat.q.len();
    let (mut alpha, mut beta, mut gamma, mut b) = (vec![0.0; nq], vec![0.0; nq], vec![0.0; nq], vec![1.0; nq]);
    for qi in 0..nq {
        let q0 = lat.q.q[qi].k0(lat.spec.beta);
        let (mut sa, mut sb, mut sg, mut se) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..lat.n() {
            let Some(j) = lat.shifted(k, qi) else { continue };
            let den = e_sq[k] * e_sq[j];
            let (ek, ej) = (lat.m.e[k], lat.m.e[j]);
            let (k0, j0) = (lat.m.k0[k], lat.m.k0[j]);
            sa += (q0 * q0 + (ek - ej).powi(2)) / den;
            sb += d2 / den;
            sg += (k0 * ej - j0 * ek) / den;
            se += 1.0 / e_sq[k] + 1.0 / e_sq[j];
        }
        alpha[qi] = 0.5 * f * sa;
        beta[qi] = f * sb;
        gamma[qi] = -f * sg;
        b[qi] = 1.0 - 0.5 * f * se;
    }
    Sums { alpha, beta, gamma, b, e_sq }
}

/// Coefficients of the expansion at `phi_q = delta_{q,0} sqrt(kappa) r0 e^{i theta0}`.
pub fn coefficients(lat: &Lattice, r0: f64, theta0: f64) -> QuadraticForm {
    let s = sums(lat, r0);
    let beta0 = s.beta[lat.q.zero];
    QuadraticForm {
        alpha: s.alpha,
        beta_coef: s.beta,
        gamma: s.gamma,
        edge: s.b,
        beta0,
        r0,
        theta0,
        v_min: vbcs_sum(lat, r0),
        e_sq: s.e_sq,
        shift: 0.0,
        external: None,
        y0: None,
        zero: lat.q.zero,
    }
}

/// Coefficients at the external-field minimum `phi_0 = i sqrt(kappa) y0`.
pub fn coefficients_external(lat: &Lattice, y0: f64, r: &ExternalField) -> Result<QuadraticForm> {
    if y0 == 0.0 {
        return Err(Error::Invalid("y0 = 0: shift |r|/(g|y0|) undefined".into()));
    }
    let shift = r.magnitude / (lat.spec.g() * y0.abs());
    let s = sums(lat, y0);
    let beta0 = s.beta[lat.q.zero];
    Ok(QuadraticForm {
        alpha: s.alpha,
        beta_coef: s.beta,
        gamma: s.gamma,
        edge: s.b.iter().map(|b| b - shift).collect(),
        beta0,
        r0: y0.abs(),
        theta0: r.phase,
        v_min: vbcs_r(lat, y0, r),
        e_sq: s.e_sq,
        shift,
        external: Some(*r),
        y0: Some(y0),
        zero: lat.q.zero,
    })
}

pub fn from_solution(lat: &Lattice, sol: &GapSolution, theta0: f64, r: &ExternalField) -> Result<QuadraticForm> {
    match sol.y0 {
        Some(y0) => coefficients_external(lat, y0, r),
        None => Ok(coefficients(lat, sol.r0, theta0)),
    }
}

/// `1 - (lambda/kappa) sum_k abar_k a_{k-q} / (E_k^2 E_{k-q}^2)`
pub fn identity_lhs(lat: &Lattice, qf: &QuadraticForm, q: usize) -> Complex64 {
    let f = lat.spec.lambda / lat.kappa();
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..lat.n() {
        if let Some(j) = lat.shifted(k, q) {
            s += lat.m.a[k].conj() * lat.m.a[j] / (qf.e_sq[k] * qf.e_sq[j]);
        }
    }
    Complex64::new(1.0, 0.0) - f * s
}

/// `alpha_q + edge_q + shift + i gamma_q + beta_q`
pub fn identity_rhs(qf: &QuadraticForm, q: usize) -> Complex64 {
    Complex64::new(qf.alpha_eff(q) + qf.shift + qf.beta_coef[q], qf.gamma[q])
}

pub fn identity_residual(lat: &Lattice, qf: &QuadraticForm, q: usize) -> f64 {
    let l = identity_lhs(lat, qf, q);
    (l - identity_rhs(qf, q)).norm() / l.norm().max(1.0)
}

fn pair_terms(lat: &Lattice, qf: &QuadraticForm, phi: &FieldConfig) -> Complex64 {
    let th = qf.pair_phase();
    let (wm, wp) = (Complex64::from_polar(1.0, -th), Complex64::from_polar(1.0, th));
    let mut v = Complex64::new(0.0, 0.0);
    for q in 0..lat.q.len() {
        if q == lat.q.zero {
            continue;
        }
        let p = phi.amps[q];
        let pm = phi.amps[lat.q.neg[q]];
        let rho2 = p.norm_sqr();
        v += Complex64::new(qf.alpha_eff(q) + qf.shift, -qf.gamma[q]) * rho2;
        v += 0.5 * qf.beta_coef[q] * (wm * p + wp * pm.conj()).norm_sqr();
    }
    v
}

/// Quadratic approximation at `r = 0`:
/// `V_min + 2 beta0 (rho_0 - sqrt(kappa) r0)^2 + edge_0 |xi_0|^2
///  + sum_{q != 0} (alpha_q + edge_q - i gamma_q) |phi_q|^2
///  + (1/2) sum_{q != 0} beta_q |e^{-i theta0} phi_q + e^{i theta0} conj(phi_{-q})|^2`.
pub fn v2(lat: &Lattice, qf: &QuadraticForm, phi: &FieldConfig) -> Complex64 {
    let z = lat.q.zero;
    let c = lat.kappa().sqrt() * qf.r0;
    let xi0 = phi.amps[z] - Complex64::from_polar(c, qf.theta0);
    let radial = phi.amps[z].norm() - c;
    let zero = 2.0 * qf.beta0 * radial * radial + qf.edge[z] * xi0.norm_sqr();
    Complex64::new(qf.v_min + zero, 0.0) + pair_terms(lat, qf, phi)
}

/// Quadratic approximation of `U_r` at `phi_0 = i sqrt(kappa) y0`; `shift`
/// enters every mode, which removes the flat phase direction.
pub fn u2_external(lat: &Lattice, qf: &QuadraticForm, phi: &FieldConfig) -> Complex64 {
    let z = lat.q.zero;
    let y0 = qf.y0.unwrap_or(-qf.r0);
    let p0 = phi.amps[z];
    let dv = p0.im - lat.kappa().sqrt() * y0;
    let xi2 = p0.re * p0.re + dv * dv;
    let zero = 2.0 * qf.beta0 * dv * dv + (qf.edge[z] + qf.shift) * xi2;
    Complex64::new(qf.v_min + zero, 0.0) + pair_terms(lat, qf, phi)
}

/// Quadratic model matching `qf`: [`v2`] or [`u2_external`].
pub fn quadratic(lat: &Lattice, qf: &QuadraticForm, phi: &FieldConfig) -> Complex64 {
    match qf.external {
        Some(_) => u2_external(lat, qf, phi),
        None => v2(lat, qf, phi),
    }
}

/// Potential matching `qf`: `V` or `U_r`.
pub fn exact(lat: &Lattice, qf: &QuadraticForm, phi: &FieldConfig) -> Result<Complex64> {
    match &qf.external {
        Some(r) => Ok(potential_external(lat, phi, r)?.total),
        None => Ok(potential_full(lat, phi)?.total),
    }
}

/// Hessian restricted to a coordinate subset; `re` and `im` are row-major `k x k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hessian {
    pub coords: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl Hessian {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let k = self.dim();
        Complex64::new(self.re[i * k + j], self.im[i * k + j])
    }

    pub fn position(&self, coord: usize) -> Option<usize> {
        self.coords.iter().position(|&c| c == coord)
    }
}

/// Second derivative of the quadratic model in real coordinates `a`, `b`.
pub fn analytic_entry(lat: &Lattice, qf: &QuadraticForm, a: usize, b: usize) -> Complex64 {
    let (qa, ca) = (a / 2, a % 2);
    let (qb, cb) = (b / 2, b % 2);
    let z = lat.q.zero;
    if qa == z && qb == z {
        let th = qf.condensate_angle();
        let r = [th.cos(), th.sin()];
        let t = [-th.sin(), th.cos()];
        let soft = qf.edge[z] + qf.shift;
        let v = 2.0 * (2.0 * qf.beta0 + soft) * r[ca] * r[cb] + 2.0 * soft * t[ca] * t[cb];
        return Complex64::new(v, 0.0);
    }
    if qa == z || qb == z {
        return Complex64::new(0.0, 0.0);
    }
    if qa == qb {
        if ca != cb {
            return Complex64::new(0.0, 0.0);
        }
        return Complex64::new(2.0 * (qf.alpha_eff(qa) + qf.shift + qf.beta_coef[qa]), -2.0 * qf.gamma[qa]);
    }
    if lat.q.neg[qa] == qb {
        let th = qf.pair_phase();
        let (c2, s2) = ((2.0 * th).cos(), (2.0 * th).sin());
        let b2 = 2.0 * qf.beta_coef[qa];
        let v = match (ca, cb) {
            (0, 0) => b2 * c2,
            (1, 1) => -b2 * c2,
            _ => b2 * s2,
        };
        return Complex64::new(v, 0.0);
    }
    Complex64::new(0.0, 0.0)
}

pub fn analytic_hessian(lat: &Lattice, qf: &QuadraticForm, coords: &[usize]) -> Hessian {
    let k = coords.len();
    let (mut re, mut im) = (vec![0.0; k * k], vec![0.0; k * k]);
    for (i, &a) in coords.iter().enumerate() {
        for (j, &b) in coords.iter().enumerate() {
            let v = analytic_entry(lat, qf, a, b);
            re[i * k + j] = v.re;
            im[i * k + j] = v.im;
        }
    }
    Hessian { coords: coords.to_vec(), re, im }
}

fn bump(phi: &FieldConfig, coord: usize, h: f64) -> FieldConfig {
    let mut p = phi.clone();
    let d = if coord % 2 == 0 { Complex64::new(h, 0.0) } else { Complex64::new(0.0, h) };
    p.amps[coord / 2] += d;
    p
}

/// Central second differences of `f` at `base` in the given real coordinates.
pub fn fd_hessian_fn<F>(f: F, base: &FieldConfig, h: f64, coords: &[usize]) -> Result<Hessian>
where
    F: Fn(&FieldConfig) -> Result<Complex64>,
{
    if !(h > 0.0) {
        return Err(Error::Invalid("step must be positive".into()));
    }
    let k = coords.len();
    let (mut re, mut im) = (vec![0.0; k * k], vec![0.0; k * k]);
    let f0 = f(base)?;
    for (i, &a) in coords.iter().enumerate() {
        let d = (f(&bump(base, a, h))? + f(&bump(base, a, -h))? - 2.0 * f0) / (h * h);
        re[i * k + i] = d.re;
        im[i * k + i] = d.im;
        for (j, &b) in coords.iter().enumerate().take(i) {
            let pa = bump(base, a, h);
            let ma = bump(base, a, -h);
            let v = (f(&bump(&pa, b, h))? - f(&bump(&pa, b, -h))? - f(&bump(&ma, b, h))? + f(&bump(&ma, b, -h))?)
                / (4.0 * h * h);
            re[i * k + j] = v.re;
            re[j * k + i] = v.re;
            im[i * k + j] = v.im;
            im[j * k + i] = v.im;
        }
    }
    Ok(Hessian { coords: coords.to_vec(), re, im })
}

/// Finite-difference Hessian of `V` (or `U_r` when `r != 0`).
pub fn fd_hessian(lat: &Lattice, base: &FieldConfig, h: f64, r: &ExternalField, coords: &[usize]) -> Result<Hessian> {
    if r.is_zero() {
        fd_hessian_fn(|p| Ok(potential_full(lat, p)?.total), base, h, coords)
    } else {
        fd_hessian_fn(|p| Ok(potential_external(lat, p, r)?.total), base, h, coords)
    }
}

/// `(4 H(h/2) - H(h)) / 3`
pub fn richardson(coarse: &Hessian, fine: &Hessian) -> Hessian {
    let comb = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(c, f)| (4.0 * f - c) / 3.0).collect();
    Hessian { coords: coarse.coords.clone(), re: comb(&coarse.re, &fine.re), im: comb(&coarse.im, &fine.im) }
}

pub fn default_step(lat: &Lattice, qf: &QuadraticForm) -> f64 {
    1e-3 * lat.kappa().sqrt() * qf.r0.max(1.0)
}

/// `q = 0`, the `n_small` smallest nonzero transfers, `n_random` seeded others,
/// each with its negative, both real coordinates.
pub fn select_coords(lat: &Lattice, n_small: usize, n_random: usize, seed: u64) -> Vec<usize> {
    let (b, l) = (lat.spec.beta, lat.spec.l);
    let mut order: Vec<usize> = (0..lat.q.len()).filter(|&i| i != lat.q.zero).collect();
    order.sort_by(|&i, &j| {
        let (x, y) = (lat.q.q[i].norm_sq(b, l), lat.q.q[j].norm_sq(b, l));
        x.partial_cmp(&y).unwrap().then(lat.q.q[i].cmp(&lat.q.q[j]))
    });
    let mut modes = vec![lat.q.zero];
    let push = |m: usize, modes: &mut Vec<usize>| {
        for x in [m, lat.q.neg[m]] {
            if !modes.contains(&x) {
                modes.push(x);
            }
        }
    };
    for &m in order.iter().take(2 * n_small) {
        if modes.len() >= 1 + 2 * n_small {
            break;
        }
        push(m, &mut modes);
    }
    let mut rest: Vec<usize> = order.into_iter().filter(|m| !modes.contains(m)).collect();
    rest.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let target = modes.len() + 2 * n_random;
    for m in rest {
        if modes.len() >= target {
            break;
        }
        push(m, &mut modes);
    }
    modes.sort();
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HessianCheck {
    pub coords: usize,
    pub step: f64,
    /// `max|Re(H_fd - H)| / max|H|`, `|H|` the complex modulus.
    pub rel_err_re: f64,
    /// Same on the imaginary part.
    pub rel_err_im: f64,
    /// `t^T H_fd t` along the tangential condensate direction.
    pub tangential: f64,
    /// `|t^T H_fd t| / max|H|`.
    pub zero_mode: f64,
    /// `(1/2) t^T H_fd t`; equals `shift` under an external field.
    pub lift: f64,
    pub shift: f64,
}

/// Richardson-extrapolated finite differences against the analytic Hessian.
pub fn hessian_check(lat: &Lattice, qf: &QuadraticForm, coords: &[usize], h: f64) -> Result<HessianCheck> {
    let r = qf.external.unwrap_or_default();
    let base = qf.minimum(lat);
    let coarse = fd_hessian(lat, &base, h, &r, coords)?;
    let fine = fd_hessian(lat, &base, 0.5 * h, &r, coords)?;
    let fd = richardson(&coarse, &fine);
    let an = analytic_hessian(lat, qf, coords);
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    // both parts relative to the max-norm of the complex Hessian
    let scale = an.re.iter().zip(&an.im).fold(0.0f64, |m, (x, y)| m.max(x.hypot(*y)));
    let z = lat.q.zero;
    let th = qf.condensate_angle();
    let t = [-th.sin(), th.cos()];
    let (iu, iv) = (fd.position(2 * z), fd.position(2 * z + 1));
    let tangential = match (iu, iv) {
        (Some(u), Some(v)) => {
            let idx = [u, v];
            let mut s = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    s += t[a] * t[b] * fd.re[idx[a] * fd.dim() + idx[b]];
                }
            }
            s
        }
        _ => f64::NAN,
    };
    Ok(HessianCheck {
        coords: coords.len(),
        step: h,
        rel_err_re: diff(&fd.re, &an.re) / scale,
        rel_err_im: diff(&fd.im, &an.im) / scale,
        tangential,
        zero_mode: tangential.abs() / scale,
        lift: 0.5 * tangential,
        shift: qf.shift,
    })
}

/// `|V(phi_min + t xi) - V2(phi_min + t xi)|`
pub fn remainder(lat: &Lattice, qf: &QuadraticForm, xi: &FieldConfig, t: f64) -> Result<f64> {
    let phi = qf.minimum(lat).axpy(t, xi);
    Ok((exact(lat, qf, &phi)? - quadratic(lat, qf, &phi)).norm())
}
