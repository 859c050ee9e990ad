//! Gap equation `(lambda/kappa) sum_k 1/(k0^2 + e_k^2 + Delta^2) = 1` and its
//! external-field variant.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Lattice, ModelSpec};
use crate::potential::{vbcs_cosh, vbcs_sum, ExternalField};

const MAX_ITER: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSolution {
    /// `r0 >= 0`; in the external-field case `|y0|`.
    pub r0: f64,
    /// Signed external-field amplitude `y0 < 0`, when solved with a field.
    pub y0: Option<f64>,
    /// `lambda r0^2`
    pub delta_sq: f64,
    pub residual: f64,
    pub v_min_sum: f64,
    pub v_min_cosh: f64,
    pub iterations: usize,
    pub trivial: bool,
}

/// `(lambda/kappa) sum_k 1/(k0^2 + e_k^2 + Delta^2)`
pub fn gap_lhs(lat: &Lattice, delta_sq: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..lat.n() {
        s += 1.0 / (lat.m.abs_a_sq(i) + delta_sq);
    }
    lat.spec.lambda / lat.kappa() * s
}

/// `lambda_c = kappa / sum_k 1/(k0^2 + e_k^2)`
pub fn critical_coupling(lat: &Lattice) -> f64 {
    let s: f64 = (0..lat.n()).map(|i| 1.0 / lat.m.abs_a_sq(i)).sum();
    lat.kappa() / s
}

/// Copy of `spec` with `lambda = ratio * lambda_c`.
pub fn with_coupling_ratio(spec: &ModelSpec, ratio: f64) -> Result<ModelSpec> {
    let lat = Lattice::new(&spec.with_lambda(0.0))?;
    Ok(spec.with_lambda(ratio * critical_coupling(&lat)))
}

/// Bisection on `Delta^2`; upper end doubled until the left side drops below 1.
pub fn solve_gap(lat: &Lattice, tol: f64) -> Result<GapSolution> {
    if !(tol > 0.0) {
        return Err(Error::Invalid("tolerance must be positive".into()));
    }
    let lambda = lat.spec.lambda;
    let f = |d2: f64| gap_lhs(lat, d2) - 1.0;
    let f0 = f(0.0);
    if f0 <= tol {
        return Ok(GapSolution {
            r0: 0.0,
            y0: None,
            delta_sq: 0.0,
            residual: f0.abs(),
            v_min_sum: 0.0,
            v_min_cosh: 0.0,
            iterations: 0,
            trivial: true,
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut it = 0;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        it += 1;
        if it > 2000 {
            return Err(Error::NoConvergence { iterations: it, detail: "no upper bracket".into() });
        }
    }
    let (mut best, mut best_res) = (lo, f(lo).abs());
    while it < MAX_ITER {
        it += 1;
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < best_res {
            best = mid;
            best_res = fm.abs();
        }
        if best_res <= tol || mid <= lo || mid >= hi {
            break;
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best_res > tol {
        return Err(Error::NoConvergence {
            iterations: it,
            detail: format!("gap residual {best_res:e} above tolerance {tol:e} at Delta^2 = {best:e}"),
        });
    }
    let r0 = (best / lambda).sqrt();
    Ok(GapSolution {
        r0,
        y0: None,
        delta_sq: lambda * r0 * r0,
        residual: best_res,
        v_min_sum: vbcs_sum(lat, r0),
        v_min_cosh: vbcs_cosh(lat, r0),
        iterations: it,
        trivial: false,
    })
}

/// `kappa (y + |r|/g)^2 - sum_k log(1 + lambda y^2/(k0^2 + e_k^2))`
pub fn vbcs_r(lat: &Lattice, y: f64, r: &ExternalField) -> f64 {
    let kap = lat.kappa();
    let shift = if r.is_zero() { 0.0 } else { r.magnitude / lat.spec.g() };
    vbcs_sum(lat, y.abs()) - kap * y * y + kap * (y + shift).powi(2)
}

/// Closed-form counterpart of [`vbcs_r`].
pub fn vbcs_r_cosh(lat: &Lattice, y: f64, r: &ExternalField) -> f64 {
    let kap = lat.kappa();
    let shift = if r.is_zero() { 0.0 } else { r.magnitude / lat.spec.g() };
    vbcs_cosh(lat, y.abs()) - kap * y * y + kap * (y + shift).powi(2)
}

/// Stationarity residual `1 - gap_lhs(lambda y^2) - |r|/(g|y|)`.
pub fn external_residual(lat: &Lattice, y: f64, r: &ExternalField) -> f64 {
    let s = y.abs();
    1.0 - gap_lhs(lat, lat.spec.lambda * s * s) - r.magnitude / (lat.spec.g() * s)
}

/// Unique minimizer `y0 < 0` of [`vbcs_r`]. The residual is increasing in
/// `|y|`, so a doubling bracket and bisection find its root.
pub fn solve_gap_external(lat: &Lattice, r: &ExternalField, tol: f64) -> Result<GapSolution> {
    if !(tol > 0.0) {
        return Err(Error::Invalid("tolerance must be positive".into()));
    }
    if r.is_zero() {
        return Err(Error::Invalid("external field magnitude must be > 0; use solve_gap".into()));
    }
    if lat.spec.lambda == 0.0 {
        return Err(Error::Invalid("external-field gap needs lambda > 0".into()));
    }
    let f = |s: f64| external_residual(lat, s, r);
    let mut it = 0;
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        it += 1;
        if it > 2000 {
            return Err(Error::NoConvergence { iterations: it, detail: "no upper bracket".into() });
        }
    }
    let mut lo = hi;
    while f(lo) >= 0.0 {
        lo *= 0.5;
        it += 1;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::NoConvergence { iterations: it, detail: "no lower bracket".into() });
        }
    }
    let (mut best, mut best_res) = (hi, f(hi).abs());
    while it < MAX_ITER {
        it += 1;
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < best_res {
            best = mid;
            best_res = fm.abs();
        }
        if best_res <= tol || mid <= lo || mid >= hi {
            break;
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best_res > tol {
        return Err(Error::NoConvergence {
            iterations: it,
            detail: format!("external gap residual {best_res:e} above tolerance {tol:e}"),
        });
    }
    let y0 = -best;
    Ok(GapSolution {
        r0: best,
        y0: Some(y0),
        delta_sq: lat.spec.lambda * best * best,
        residual: best_res,
        v_min_sum: vbcs_r(lat, y0, r),
        v_min_cosh: vbcs_r_cosh(lat, y0, r),
        iterations: it,
        trivial: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_momentum_set, Lattice};

    fn desk(ratio: f64) -> Lattice {
        let base = ModelSpec { l: 32.0, beta: 2.0, nu: 5.0, mu: 0.2, ..ModelSpec::default() };
        Lattice::new(&with_coupling_ratio(&base, ratio).unwrap()).unwrap()
    }

    #[test]
    fn gap_lhs_limits_and_oracle() {
        let lat = desk(2.0);
        assert!(gap_lhs(&lat, 1e12) < 1e-9);
        assert_eq!(gap_lhs(&lat.with_lambda(0.0), 0.3), 0.0);
        let m = build_momentum_set(&lat.spec).unwrap();
        let mut s = 0.0;
        for (k0, e) in m.k0.iter().zip(&m.e) {
            s += lat.spec.lambda / (k0 * k0 + e * e);
        }
        assert!((gap_lhs(&lat, 0.0) - s / lat.kappa()).abs() < 1e-13);
    }

    #[test]
    fn critical_coupling_closure() {
        let lat = desk(1.0);
        assert!((gap_lhs(&lat, 0.0) - 1.0).abs() < 1e-12);
        let lat2 = desk(2.0);
        assert!((gap_lhs(&lat2, 0.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_momentum_critical_coupling() {
        // k0 = pi/beta with beta = pi, e = 0: k0^2 + e^2 = 1, kappa = beta L = 1 for L = 1/pi
        let spec = ModelSpec {
            l: 1.0 / std::f64::consts::PI,
            beta: std::f64::consts::PI,
            nu: 1.5,
            mu: -2.0,
            energy_window: 1e-9,
            lambda: 1.0,
            ..ModelSpec::default()
        };
        let lat = Lattice::new(&spec).unwrap();
        assert_eq!(lat.n(), 2);
        assert!((lat.kappa() - 1.0).abs() < 1e-15);
        // two momenta (k0 = +-1), so lambda_c = kappa / 2
        assert!((critical_coupling(&lat) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn below_critical_is_trivial() {
        for ratio in [0.3, 0.99, 1.0] {
            let sol = solve_gap(&desk(ratio), 1e-12).unwrap();
            assert!(sol.trivial);
            assert_eq!(sol.r0, 0.0);
        }
    }

    #[test]
    fn nontrivial_solution_is_the_argmin() {
        let lat = desk(2.0);
        let sol = solve_gap(&lat, 1e-12).unwrap();
        assert!(!sol.trivial);
        assert!(sol.residual <= 1e-12);
        assert_eq!(sol.delta_sq, lat.spec.lambda * sol.r0 * sol.r0);
        assert!(sol.v_min_sum < 0.0);
        assert!(vbcs_sum(&lat, 10.0 * sol.r0 + 5.0) > 0.0);
        for i in 0..=2000 {
            let rho = 3.0 * sol.r0 * i as f64 / 2000.0;
            assert!(sol.v_min_sum <= vbcs_sum(&lat, rho) + 1e-12 * sol.v_min_sum.abs());
        }
        let h = 1e-5 * sol.r0;
        let d = (vbcs_sum(&lat, sol.r0 + h) - vbcs_sum(&lat, sol.r0 - h)) / (2.0 * h);
        assert!(d.abs() <= 1e-6 * lat.kappa());
    }

    #[test]
    fn vbcs_r_cases() {
        let lat = desk(2.0);
        for y in [-0.7, -0.2, 0.3] {
            assert!((vbcs_r(&lat, y, &ExternalField::none()) - vbcs_sum(&lat, y.abs())).abs() < 1e-12);
        }
        let r = ExternalField::new(0.01, 0.4).unwrap();
        let expect = lat.kappa() * 1e-4 / lat.spec.lambda;
        assert!((vbcs_r(&lat, 0.0, &r) - expect).abs() < 1e-14 * expect.max(1.0));
    }

    #[test]
    fn external_solution_is_negative_grid_minimum() {
        let lat = desk(2.0);
        for mag in [1e-1, 1e-2, 1e-3] {
            let r = ExternalField::new(mag, 0.3).unwrap();
            let sol = solve_gap_external(&lat, &r, 1e-13).unwrap();
            let y0 = sol.y0.unwrap();
            assert!(y0 < 0.0);
            assert!(sol.residual <= 1e-13);
            for i in 0..=4000 {
                let y = -2.0 + 3.0 * i as f64 / 4000.0;
                assert!(sol.v_min_sum <= vbcs_r(&lat, y, &r) + 1e-12 * sol.v_min_sum.abs());
            }
        }
    }

    #[test]
    fn external_small_field_limit() {
        let lat = desk(2.0);
        let r0 = solve_gap(&lat, 1e-13).unwrap().r0;
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&m| {
                let y0 = solve_gap_external(&lat, &ExternalField::new(m, 0.0).unwrap(), 1e-14).unwrap().y0.unwrap();
                (lat.spec.lambda * (y0 * y0 - r0 * r0)).abs()
            })
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1]);
    }

    #[test]
    fn external_weak_coupling_completes_the_square() {
        let base = desk(1.0);
        let lc = critical_coupling(&base);
        for frac in [1e-3, 1e-5] {
            let lat = base.with_lambda(frac * lc);
            let r = ExternalField::new(1e-3, 0.0).unwrap();
            let y0 = solve_gap_external(&lat, &r, 1e-14).unwrap().y0.unwrap();
            let g = lat.spec.g();
            let pred = -(1e-3 / g) / (1.0 - frac);
            assert!((y0 / pred - 1.0).abs() < 1e-6, "{y0} {pred}");
        }
        let r = ExternalField::new(1e-3, 0.0).unwrap();
        assert!(solve_gap_external(&base.with_lambda(0.0), &r, 1e-12).is_err());
        assert!(solve_gap_external(&base, &ExternalField::none(), 1e-12).is_err());
    }
}
