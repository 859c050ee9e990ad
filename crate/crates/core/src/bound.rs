//! Hadamard lower bound on `Re V` from Gram-column overlaps.
//!
//! Columns of the determinant matrix, rescaled by `a_k`, are
//! `b_k = (a_k e_k, (ig/sqrt kappa) phi_{. - k})` and
//! `b'_k = ((ig/sqrt kappa) conj(phi_{k - .}), abar_k e_k)`, with squared norms at
//! most `|a_k|^2 + lambda ||phi||^2`. Removing from `b_k` its component along
//! a reference column `b_t` sharpens Hadamard's inequality by the overlap
//! factors computed here.

use num_complex::Complex64;
use serde::Serialize;

use crate::linalg::CMatrix;
use crate::model::{field_norm, FieldConfig, Lattice, Momentum};
use crate::potential::{potential_real, vbcs_sum};

pub const CLAMP: f64 = 1e-300;

fn denominators(lat: &Lattice, phi: &FieldConfig) -> Vec<f64> {
    let ln = lat.spec.lambda * field_norm(phi);
    (0..lat.n()).map(|k| lat.m.abs_a_sq(k) + ln).collect()
}

/// `sum_{p in M} phi_{p-k} conj(phi_{p-t})`
fn column_product(lat: &Lattice, phi: &FieldConfig, k: usize, t: usize) -> Complex64 {
    (0..lat.n()).map(|p| phi.amps[lat.diff(p, k)] * phi.amps[lat.diff(p, t)].conj()).sum()
}

/// `|(lambda/kappa) sum_p phi_{p-k} conj(phi_{p-t})|^2 / ((|a_k|^2 + lambda||phi||^2)(|a_t|^2 + lambda||phi||^2))`
pub fn overlap_sq(lat: &Lattice, phi: &FieldConfig, k: usize, t: usize) -> f64 {
    let den = denominators(lat, phi);
    let x = lat.spec.lambda / lat.kappa() * column_product(lat, phi, k, t);
    x.norm_sqr() / (den[k] * den[t])
}

/// `(lambda/kappa) |phi_{k-t}|^2 |a_t - a_k|^2 / ((|a_k|^2 + lambda||phi||^2)(|a_t|^2 + lambda||phi||^2))`
pub fn overlap_prime_sq(lat: &Lattice, phi: &FieldConfig, k: usize, t: usize) -> f64 {
    let den = denominators(lat, phi);
    prime(lat, phi, &den, k, t)
}

fn prime(lat: &Lattice, phi: &FieldConfig, den: &[f64], k: usize, t: usize) -> f64 {
    let da = (lat.m.a[t] - lat.m.a[k]).norm_sqr();
    lat.spec.lambda / lat.kappa() * phi.amps[lat.diff(k, t)].norm_sqr() * da / (den[k] * den[t])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HadamardRhs {
    pub rhs: f64,
    pub vbcs_at_norm: f64,
    /// Reference column giving the largest bound.
    pub t: usize,
    /// Some `1 - overlap` fell below [`CLAMP`].
    pub clamped: bool,
}

/// `V_BCS(||phi||) - min_t sum_{k != t} (1/2)[log(1 - o(k,t)) + log(1 - o'(k,t))]`.
pub fn hadamard_rhs(lat: &Lattice, phi: &FieldConfig) -> HadamardRhs {
    let n = lat.n();
    let den = denominators(lat, phi);
    let vb = vbcs_sum(lat, field_norm(phi).sqrt());
    // G[k, t] = sum_p phi_{p-k} conj(phi_{p-t}) = (P^T conj P)[k, t], P[p, k] = phi_{p-k}
    let pt = CMatrix::from_fn(n, |k, p| phi.amps[lat.diff(p, k)]);
    let pc = CMatrix::from_fn(n, |p, t| phi.amps[lat.diff(p, t)].conj());
    let gram = pt.matmul(&pc);
    let f = lat.spec.lambda / lat.kappa();
    let mut clamped = false;
    let mut best = (f64::INFINITY, 0);
    for t in 0..n {
        let mut s = 0.0;
        for k in 0..n {
            if k == t {
                continue;
            }
            let o1 = (f * gram[(k, t)]).norm_sqr() / (den[k] * den[t]);
            let o2 = prime(lat, phi, &den, k, t);
            let (x1, x2) = (1.0 - o1, 1.0 - o2);
            clamped |= x1 < CLAMP || x2 < CLAMP;
            s += 0.5 * (x1.max(CLAMP).ln() + x2.max(CLAMP).ln());
        }
        if s < best.0 {
            best = (s, t);
        }
    }
    HadamardRhs { rhs: vb - best.0, vbcs_at_norm: vb, t: best.1, clamped }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub re_v: f64,
    pub rhs26: f64,
    pub vbcs_at_norm: f64,
    pub argmax_t: Momentum,
    pub chain_ok: bool,
    pub clamped: bool,
    pub slack: f64,
}

/// `Re V >= rhs >= V_BCS(||phi||)`, each up to `slack`.
pub fn bound_report(lat: &Lattice, phi: &FieldConfig, slack: f64) -> BoundReport {
    let re_v = potential_real(lat, phi);
    let h = hadamard_rhs(lat, phi);
    BoundReport {
        re_v,
        rhs26: h.rhs,
        vbcs_at_norm: h.vbcs_at_norm,
        argmax_t: lat.m.momenta[h.t],
        chain_ok: re_v >= h.rhs - slack && h.rhs >= h.vbcs_at_norm - slack,
        clamped: h.clamped,
        slack,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gap::{solve_gap, with_coupling_ratio};
    use crate::linalg::logdet;
    use crate::model::{bcs_config, random_config, ModelSpec};
    use crate::potential::{assemble_block, ExternalField};

    fn lat() -> Lattice {
        let base = ModelSpec { l: 8.0, beta: 2.0, nu: 5.0, mu: 0.2, ..ModelSpec::default() };
        Lattice::new(&with_coupling_ratio(&base, 2.0).unwrap()).unwrap()
    }

    /// `[[1, (ig/sqrt k) phi^* Cbar], [(ig/sqrt k) phi C, 1]]`
    fn gram_block(lat: &Lattice, phi: &FieldConfig) -> CMatrix {
        let n = lat.n();
        let s = Complex64::new(0.0, lat.spec.g() / lat.kappa().sqrt());
        let mut b = CMatrix::identity(2 * n);
        for i in 0..n {
            for j in 0..n {
                let cj = 1.0 / lat.m.a[j];
                b[(i, n + j)] = s * phi.amps[lat.diff(j, i)].conj() * cj.conj();
                b[(n + i, j)] = s * phi.amps[lat.diff(i, j)] * cj;
            }
        }
        b
    }

    fn column(b: &CMatrix, j: usize, scale: Complex64) -> Vec<Complex64> {
        (0..b.dim()).map(|i| b[(i, j)] * scale).collect()
    }

    fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
        x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
    }

    #[test]
    fn gram_block_has_the_same_determinant() {
        let lat = lat();
        let phi = random_config(&lat, 0.6, 1);
        let a = logdet(&gram_block(&lat, &phi)).unwrap();
        let b = logdet(&assemble_block(&lat, &phi, &ExternalField::none())).unwrap();
        assert!((a.re - b.re).abs() < 1e-10);
    }

    #[test]
    fn overlaps_match_explicit_columns() {
        let lat = lat();
        let n = lat.n();
        for seed in 0..3 {
            let phi = random_config(&lat, 0.8, seed);
            let b = gram_block(&lat, &phi);
            let ln = lat.spec.lambda * field_norm(&phi);
            for k in 0..n {
                for t in 0..n {
                    if k == t {
                        continue;
                    }
                    let den = (lat.m.abs_a_sq(k) + ln) * (lat.m.abs_a_sq(t) + ln);
                    let bk = column(&b, k, lat.m.a[k]);
                    let bt = column(&b, t, lat.m.a[t]);
                    let bpk = column(&b, n + k, lat.m.a[k].conj());
                    let o1 = inner(&bk, &bt).norm_sqr() / den;
                    let o2 = inner(&bpk, &bt).norm_sqr() / den;
                    assert!((overlap_sq(&lat, &phi, k, t) - o1).abs() < 1e-12);
                    assert!((overlap_prime_sq(&lat, &phi, k, t) - o2).abs() < 1e-12);
                    let nk = inner(&bk, &bk).re;
                    assert!(nk <= lat.m.abs_a_sq(k) + ln + 1e-12);
                }
            }
        }
    }

    #[test]
    fn overlap_special_cases() {
        let lat = lat();
        let phi = bcs_config(&lat, 0.5, 0.4);
        let ln = lat.spec.lambda * 0.25;
        for t in 0..lat.n() {
            let d = lat.m.abs_a_sq(t) + ln;
            assert!((overlap_sq(&lat, &phi, t, t) - (ln / d).powi(2)).abs() < 1e-14);
            assert_eq!(overlap_prime_sq(&lat, &phi, t, t), 0.0);
            for k in 0..lat.n() {
                if k != t {
                    assert_eq!(overlap_sq(&lat, &phi, k, t), 0.0);
                    assert_eq!(overlap_prime_sq(&lat, &phi, k, t), 0.0);
                }
            }
        }
    }

    #[test]
    fn overlaps_lie_in_unit_interval() {
        let lat = lat();
        for (seed, scale) in [(0, 0.1), (1, 1.0), (2, 5.0), (3, 30.0)] {
            let phi = random_config(&lat, scale, seed);
            for k in 0..lat.n() {
                for t in 0..lat.n() {
                    let (a, b) = (overlap_sq(&lat, &phi, k, t), overlap_prime_sq(&lat, &phi, k, t));
                    assert!((-1e-12..=1.0 + 1e-12).contains(&a));
                    assert!((-1e-12..=1.0 + 1e-12).contains(&b));
                }
            }
        }
    }

    #[test]
    fn bcs_and_zero_fields_are_tight() {
        let lat = lat();
        let sol = solve_gap(&lat, 1e-12).unwrap();
        let rep = bound_report(&lat, &bcs_config(&lat, sol.r0, 1.2), 1e-9 * lat.kappa());
        assert!(rep.chain_ok);
        assert_eq!(rep.rhs26, rep.vbcs_at_norm);
        assert!((rep.re_v - sol.v_min_sum).abs() < 1e-10 * sol.v_min_sum.abs());
        assert!((rep.rhs26 - sol.v_min_sum).abs() < 1e-10 * sol.v_min_sum.abs());
        let z = bound_report(&lat, &FieldConfig::zeros(&lat), 0.0);
        assert_eq!((z.re_v, z.rhs26, z.vbcs_at_norm), (0.0, 0.0, 0.0));
        assert!(z.chain_ok);
        let mut phi = FieldConfig::zeros(&lat);
        phi.amps[lat.q.zero] = Complex64::new(0.3, -1.1);
        let h = hadamard_rhs(&lat, &phi);
        assert_eq!(h.rhs, vbcs_sum(&lat, phi.amps[lat.q.zero].norm() / lat.kappa().sqrt()));
    }

    #[test]
    fn random_fields_satisfy_the_chain() {
        let lat = lat();
        let slack = 1e-9 * lat.kappa();
        for seed in 0..40 {
            let scale = [0.05, 0.3, 1.0, 3.0][seed as usize % 4];
            let rep = bound_report(&lat, &random_config(&lat, scale, seed), slack);
            assert!(rep.chain_ok, "{rep:?}");
            assert!(rep.rhs26 >= rep.vbcs_at_norm);
        }
    }
}
