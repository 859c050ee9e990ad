//! Effective potential `V(phi) = sum_q |phi_q|^2 - log det[...]`, its reduced
//! form, the BCS restriction in both summed and closed form, the external-field
//! potential `U_r`, and the propagator entries.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Lu};
use crate::model::{FieldConfig, Lattice};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialValue {
    pub total: Complex64,
    pub sum_term: f64,
    pub logdet_term: Complex64,
    /// Imaginary part of `logdet_term` is the principal-branch pivot sum, defined mod 2 pi.
    pub principal_branch: bool,
}

impl PotentialValue {
    fn new(sum_term: f64, logdet_term: Complex64) -> Self {
        Self { total: Complex64::new(sum_term, 0.0) - logdet_term, sum_term, logdet_term, principal_branch: true }
    }
}

/// `r = |r| e^{i alpha}`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct ExternalField {
    pub magnitude: f64,
    pub phase: f64,
}

impl ExternalField {
    pub fn new(magnitude: f64, phase: f64) -> Result<Self> {
        if !(magnitude >= 0.0 && magnitude.is_finite() && phase.is_finite()) {
            return Err(Error::Invalid("external field magnitude must be finite and >= 0".into()));
        }
        Ok(Self { magnitude, phase })
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }

    pub fn is_zero(&self) -> bool {
        self.magnitude == 0.0
    }
}

fn c(lat: &Lattice) -> Vec<Complex64> {
    lat.m.a.iter().map(|a| ONE / a).collect()
}

/// `[[1, C((ig/sqrt k) phi^* - rbar)], [Cbar((ig/sqrt k) phi + r), 1]]` with
/// `(phi)_{kp} = phi_{k-p}` and `(phi^*)_{kp} = conj(phi_{p-k})`.
pub fn assemble_block(lat: &Lattice, phi: &FieldConfig, r: &ExternalField) -> CMatrix {
    let n = lat.n();
    let cc = c(lat);
    let s = I * lat.spec.g() / lat.kappa().sqrt();
    let rv = r.value();
    let mut b = CMatrix::identity(2 * n);
    for k in 0..n {
        for p in 0..n {
            let mut upper = s * phi.amps[lat.diff(p, k)].conj();
            let mut lower = s * phi.amps[lat.diff(k, p)];
            if k == p {
                upper -= rv.conj();
                lower += rv;
            }
            b[(k, n + p)] = cc[k] * upper;
            b[(n + k, p)] = cc[k].conj() * lower;
        }
    }
    b
}

/// `1 + (lambda/kappa) Cbar phi C phi^*`
pub fn reduced_matrix(lat: &Lattice, phi: &FieldConfig) -> CMatrix {
    let n = lat.n();
    let cc = c(lat);
    let a = CMatrix::from_fn(n, |k, s| cc[k].conj() * phi.amps[lat.diff(k, s)]);
    let b = CMatrix::from_fn(n, |s, p| cc[s] * phi.amps[lat.diff(p, s)].conj());
    let mut m = a.matmul(&b);
    let f = lat.spec.lambda / lat.kappa();
    for k in 0..n {
        for p in 0..n {
            m[(k, p)] *= f;
        }
        m[(k, k)] += ONE;
    }
    m
}

pub fn potential_full(lat: &Lattice, phi: &FieldConfig) -> Result<PotentialValue> {
    let ld = Lu::new(assemble_block(lat, phi, &ExternalField::none()))?.logdet();
    Ok(PotentialValue::new(phi.sum_sq(), ld))
}

pub fn potential_reduced(lat: &Lattice, phi: &FieldConfig) -> Result<PotentialValue> {
    let ld = Lu::new(reduced_matrix(lat, phi))?.logdet();
    Ok(PotentialValue::new(phi.sum_sq(), ld))
}

/// `Re V = sum |phi_q|^2 - log|det|`; `+inf` when the determinant vanishes.
pub fn potential_real(lat: &Lattice, phi: &FieldConfig) -> f64 {
    match potential_reduced(lat, phi) {
        Ok(v) => v.total.re,
        Err(_) => f64::INFINITY,
    }
}

/// `kappa rho^2 - sum_{k in M} log(1 + lambda rho^2 / (k0^2 + e_k^2))`
pub fn vbcs_sum(lat: &Lattice, rho: f64) -> f64 {
    let x = lat.spec.lambda * rho * rho;
    let mut s = 0.0;
    for i in 0..lat.n() {
        s += (x / lat.m.abs_a_sq(i)).ln_1p();
    }
    lat.kappa() * rho * rho - s
}

fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Spatial momenta present in `M`, one dispersion value each.
pub fn spatial_energies(lat: &Lattice) -> Vec<f64> {
    let mut seen = std::collections::BTreeMap::new();
    for (k, &e) in lat.m.momenta.iter().zip(&lat.m.e) {
        seen.entry(k.m).or_insert(e);
    }
    seen.into_values().collect()
}

/// Untruncated Matsubara sum in closed form:
/// `kappa rho^2 - 2 sum_k log[cosh(beta/2 sqrt(e_k^2 + lambda rho^2)) / cosh(beta/2 e_k)]`,
/// the factor 2 counting both signs of `k0`.
pub fn vbcs_cosh(lat: &Lattice, rho: f64) -> f64 {
    let h = 0.5 * lat.spec.beta;
    let x = lat.spec.lambda * rho * rho;
    let s: f64 = spatial_energies(lat)
        .iter()
        .map(|&e| log_cosh(h * (e * e + x).sqrt()) - log_cosh(h * e))
        .sum();
    lat.kappa() * rho * rho - 2.0 * s
}

/// `phi_0 -> e^{i alpha} phi_0`, other modes unchanged.
pub fn tilted(lat: &Lattice, phi: &FieldConfig, r: &ExternalField) -> FieldConfig {
    let mut t = phi.clone();
    t.amps[lat.q.zero] *= Complex64::from_polar(1.0, r.phase);
    t
}

/// `U_r = u0^2 + (v0 + sqrt(kappa)|r|/g)^2 + sum_{q != 0} |phi_q|^2 - log det[block(phi~)]`.
pub fn potential_external(lat: &Lattice, phi: &FieldConfig, r: &ExternalField) -> Result<PotentialValue> {
    if r.is_zero() {
        return potential_full(lat, phi);
    }
    let g = lat.spec.g();
    if g == 0.0 {
        return Err(Error::Invalid("external field needs lambda > 0".into()));
    }
    let z = lat.q.zero;
    let p0 = phi.amps[z];
    let shifted = p0.im + lat.kappa().sqrt() * r.magnitude / g;
    let rest: f64 = phi.amps.iter().enumerate().filter(|(i, _)| *i != z).map(|(_, a)| a.norm_sqr()).sum();
    let sum_term = p0.re * p0.re + shifted * shifted + rest;
    let ld = Lu::new(reduced_matrix(lat, &tilted(lat, phi, r)))?.logdet();
    Ok(PotentialValue::new(sum_term, ld))
}

/// `V_r(phi) = sum_q |phi_q|^2 - log det[block(phi, r)]`, the untransformed external potential.
pub fn potential_external_unshifted(lat: &Lattice, phi: &FieldConfig, r: &ExternalField) -> Result<PotentialValue> {
    let ld = Lu::new(assemble_block(lat, phi, r))?.logdet();
    Ok(PotentialValue::new(phi.sum_sq(), ld))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Propagator {
    pub f: Complex64,
    pub g: Complex64,
}

/// Entries `(k up, k up)` and `(k down, k up)` of the inverse of
/// `diag(A, Abar) * block`, one factorization for all `k`.
pub fn propagators(lat: &Lattice, phi: &FieldConfig, r: &ExternalField) -> Result<Vec<Propagator>> {
    let n = lat.n();
    let mut m = assemble_block(lat, phi, r);
    for k in 0..n {
        let (a, ab) = (lat.m.a[k], lat.m.a[k].conj());
        for j in 0..2 * n {
            m[(k, j)] *= a;
            m[(n + k, j)] *= ab;
        }
    }
    let lu = Lu::new(m)?;
    Ok((0..n)
        .map(|k| {
            let col = lu.inverse_column(k);
            Propagator { f: col[k], g: col[n + k] }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bcs_config, random_config, ModelSpec};

    fn small(lambda: f64) -> Lattice {
        let spec = ModelSpec { l: 8.0, beta: 2.0, nu: 5.0, mu: 0.2, lambda, ..ModelSpec::default() };
        Lattice::new(&spec).unwrap()
    }

    #[test]
    fn zero_field_gives_identity_and_zero_potential() {
        let lat = small(3.0);
        let phi = FieldConfig::zeros(&lat);
        assert_eq!(assemble_block(&lat, &phi, &ExternalField::none()), CMatrix::identity(2 * lat.n()));
        assert_eq!(potential_full(&lat, &phi).unwrap().total, Complex64::new(0.0, 0.0));
        assert_eq!(potential_reduced(&lat, &phi).unwrap().total, Complex64::new(0.0, 0.0));
        assert_eq!(potential_real(&lat, &phi), 0.0);
    }

    #[test]
    fn zero_coupling_is_pure_quadratic() {
        let lat = small(0.0);
        for seed in 0..5 {
            let phi = random_config(&lat, 1.0, seed);
            let v = potential_full(&lat, &phi).unwrap();
            assert_eq!(v.total, Complex64::new(phi.sum_sq(), 0.0));
        }
    }

    #[test]
    fn block_entries_match_formula() {
        let lat = small(2.5);
        let phi = random_config(&lat, 0.7, 5);
        let b = assemble_block(&lat, &phi, &ExternalField::new(0.3, 1.1).unwrap());
        let n = lat.n();
        let g = 2.5f64.sqrt();
        let kap = lat.kappa();
        let r = Complex64::from_polar(0.3, 1.1);
        for (i, k) in lat.m.momenta.iter().enumerate() {
            for (j, p) in lat.m.momenta.iter().enumerate() {
                let ck = 1.0 / Complex64::new(-lat.m.e[i], lat.m.k0[i]);
                let q_kp = lat.q.index[&k.sub(p)];
                let q_pk = lat.q.index[&p.sub(k)];
                let d = if i == j { 1.0 } else { 0.0 };
                let up = ck * (Complex64::new(0.0, g / kap.sqrt()) * phi.amps[q_pk].conj() - r.conj() * d);
                let lo = ck.conj() * (Complex64::new(0.0, g / kap.sqrt()) * phi.amps[q_kp] + r * d);
                assert!((b[(i, n + j)] - up).norm() < 1e-14);
                assert!((b[(n + i, j)] - lo).norm() < 1e-14);
                assert_eq!(b[(i, j)], Complex64::new(d, 0.0));
            }
        }
    }

    #[test]
    fn bcs_block_is_two_by_two_per_momentum() {
        let lat = small(2.0);
        let phi = bcs_config(&lat, 0.4, 0.3);
        let b = assemble_block(&lat, &phi, &ExternalField::none());
        let n = lat.n();
        for k in 0..n {
            for p in 0..n {
                if k != p {
                    assert_eq!(b[(k, n + p)], Complex64::new(0.0, 0.0));
                    assert_eq!(b[(n + k, p)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn routes_agree_and_match_vbcs() {
        let lat = small(4.0);
        for seed in 0..6 {
            let phi = random_config(&lat, 0.8, seed);
            let f = potential_full(&lat, &phi).unwrap();
            let r = potential_reduced(&lat, &phi).unwrap();
            assert!((f.total.re - r.total.re).abs() < 1e-10 * (1.0 + f.total.re.abs()));
            assert_eq!(potential_real(&lat, &phi), r.total.re);
        }
        for th in [0.0, 0.9, 2.2, -1.4] {
            let phi = bcs_config(&lat, 0.35, th);
            let v = potential_full(&lat, &phi).unwrap().total.re;
            let w = vbcs_sum(&lat, 0.35);
            assert!((v - w).abs() < 1e-10 * w.abs());
            let rv = potential_reduced(&lat, &phi).unwrap().total.re;
            assert!((rv - w).abs() < 1e-10 * w.abs());
        }
    }

    #[test]
    fn global_phase_invariance() {
        let lat = small(3.0);
        let phi = random_config(&lat, 0.5, 9);
        let v = potential_full(&lat, &phi).unwrap().total;
        for th in [0.3, 1.7, 3.0] {
            let w = potential_full(&lat, &phi.rotated(th)).unwrap().total;
            assert!((v - w).norm() < 1e-12 * (1.0 + v.norm()));
            assert!((potential_real(&lat, &phi) - potential_real(&lat, &phi.rotated(th))).abs() < 1e-12 * v.norm());
        }
    }

    #[test]
    fn vbcs_forms() {
        let lat = small(3.0);
        assert_eq!(vbcs_sum(&lat, 0.0), 0.0);
        assert_eq!(vbcs_cosh(&lat, 0.0), 0.0);
        let free = small(0.0);
        assert_eq!(vbcs_sum(&free, 0.6), free.kappa() * 0.36);
        assert!((vbcs_cosh(&free, 0.6) - free.kappa() * 0.36).abs() < 1e-12);
        let mut s = 0.0;
        for i in 0..lat.n() {
            let (k0, e) = (lat.m.k0[i], lat.m.e[i]);
            s += (1.0 + 3.0 * 0.09 / (k0 * k0 + e * e)).ln();
        }
        assert!((vbcs_sum(&lat, 0.3) - (lat.kappa() * 0.09 - s)).abs() < 1e-12);
    }

    #[test]
    fn log_cosh_is_stable() {
        assert!((log_cosh(0.7) - 0.7f64.cosh().ln()).abs() < 1e-15);
        assert!((log_cosh(-3.0) - 3.0f64.cosh().ln()).abs() < 1e-14);
        assert!((log_cosh(2000.0) - (2000.0 - std::f64::consts::LN_2)).abs() < 1e-9);
    }

    #[test]
    fn external_potential_cases() {
        let lat = small(2.0);
        let phi = random_config(&lat, 0.6, 2);
        let v = potential_full(&lat, &phi).unwrap();
        assert_eq!(potential_external(&lat, &phi, &ExternalField::new(0.0, 0.8).unwrap()).unwrap(), v);
        let r = ExternalField::new(0.05, 0.8).unwrap();
        let u = potential_external(&lat, &FieldConfig::zeros(&lat), &r).unwrap();
        let expect = lat.kappa() * 0.05 * 0.05 / 2.0;
        assert!((u.total.re - expect).abs() < 1e-12 * expect);
        assert!(u.total.im.abs() < 1e-15);
        assert!(potential_external(&small(0.0), &phi, &r).is_err());
    }

    #[test]
    fn external_potential_is_shifted_block_form() {
        let lat = small(2.0);
        let g = 2f64.sqrt();
        for (seed, (mag, ph)) in [(0.05, 0.8), (0.2, -2.0), (0.01, 3.0)].into_iter().enumerate() {
            let r = ExternalField::new(mag, ph).unwrap();
            let phi = random_config(&lat, 0.4, seed as u64);
            let u = potential_external(&lat, &phi, &r).unwrap().total;
            let mut shifted = phi.clone();
            let z = lat.q.zero;
            shifted.amps[z] = Complex64::from_polar(1.0, ph)
                * (phi.amps[z] + Complex64::new(0.0, lat.kappa().sqrt() * mag / g));
            let w = potential_external_unshifted(&lat, &shifted, &r).unwrap().total;
            assert!((u.re - w.re).abs() < 1e-10 * (1.0 + u.re.abs()), "{u} {w}");
            assert!(crate::linalg::wrap_angle(u.im - w.im).abs() < 1e-10);
        }
    }

    #[test]
    fn propagators_free_and_bcs() {
        let lat = small(2.0);
        let free = propagators(&lat, &FieldConfig::zeros(&lat), &ExternalField::none()).unwrap();
        for (k, p) in free.iter().enumerate() {
            assert!((p.f - 1.0 / lat.m.a[k]).norm() < 1e-14);
            assert_eq!(p.g, Complex64::new(0.0, 0.0));
        }
        let (r0, th) = (0.45, 0.7);
        let g = 2f64.sqrt();
        let prop = propagators(&lat, &bcs_config(&lat, r0, th), &ExternalField::none()).unwrap();
        for (k, p) in prop.iter().enumerate() {
            let e2 = lat.m.abs_a_sq(k) + 2.0 * r0 * r0;
            assert!((p.f - lat.m.a[k].conj() / e2).norm() < 1e-13);
            let gexp = -I * g * r0 * Complex64::from_polar(1.0, th) / e2;
            assert!((p.g - gexp).norm() < 1e-13);
        }
    }

    #[test]
    fn propagators_match_dense_inverse() {
        let lat = small(2.0);
        let n = lat.n();
        let phi = random_config(&lat, 0.5, 4);
        let r = ExternalField::new(0.1, 0.4).unwrap();
        let prop = propagators(&lat, &phi, &r).unwrap();
        let mut m = assemble_block(&lat, &phi, &r);
        for k in 0..n {
            for j in 0..2 * n {
                m[(k, j)] *= lat.m.a[k];
                m[(n + k, j)] *= lat.m.a[k].conj();
            }
        }
        let inv = gauss_jordan(&m);
        for k in 0..n {
            assert!((prop[k].f - inv[(k, k)]).norm() < 1e-11);
            assert!((prop[k].g - inv[(n + k, k)]).norm() < 1e-11);
        }
    }

    fn gauss_jordan(a: &CMatrix) -> CMatrix {
        let n = a.dim();
        let mut m = a.clone();
        let mut inv = CMatrix::identity(n);
        for col in 0..n {
            let p = (col..n).max_by(|&x, &y| m[(x, col)].norm().partial_cmp(&m[(y, col)].norm()).unwrap()).unwrap();
            for j in 0..n {
                let (t, u) = (m[(col, j)], inv[(col, j)]);
                m[(col, j)] = m[(p, j)];
                inv[(col, j)] = inv[(p, j)];
                m[(p, j)] = t;
                inv[(p, j)] = u;
            }
            let d = m[(col, col)];
            for j in 0..n {
                m[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for r in 0..n {
                if r != col {
                    let f = m[(r, col)];
                    for j in 0..n {
                        let (x, y) = (m[(col, j)], inv[(col, j)]);
                        m[(r, j)] -= f * x;
                        inv[(r, j)] -= f * y;
                    }
                }
            }
        }
        inv
    }
}
