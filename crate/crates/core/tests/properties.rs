use bcs_landscape::bound::bound_report;
use bcs_landscape::gap::{gap_lhs, with_coupling_ratio};
use bcs_landscape::linalg::{logdet, wrap_angle, CMatrix};
use bcs_landscape::model::{random_config, Lattice, ModelSpec};
use bcs_landscape::potential::{potential_full, potential_reduced};
use num_complex::Complex64;
use proptest::prelude::*;

fn small(ratio: f64) -> Lattice {
    let base = ModelSpec { l: 8.0, beta: 2.0, nu: 5.0, mu: 0.2, ..ModelSpec::default() };
    Lattice::new(&with_coupling_ratio(&base, ratio).unwrap()).unwrap()
}

fn matrix(n: usize, v: &[f64]) -> CMatrix {
    CMatrix::from_fn(n, |i, j| Complex64::new(v[2 * (i * n + j)], v[2 * (i * n + j) + 1]) + if i == j { 2.0 } else { 0.0 })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn logdet_is_multiplicative(n in 1usize..7, a in prop::collection::vec(-1.0f64..1.0, 72), b in prop::collection::vec(-1.0f64..1.0, 72)) {
        let (x, y) = (matrix(n, &a), matrix(n, &b));
        let lhs = logdet(&x.matmul(&y)).unwrap();
        let rhs = logdet(&x).unwrap() + logdet(&y).unwrap();
        prop_assert!((lhs.re - rhs.re).abs() < 1e-10 * (1.0 + lhs.re.abs()));
        prop_assert!(wrap_angle(lhs.im - rhs.im).abs() < 1e-9);
    }

    #[test]
    fn logdet_of_adjoint_is_conjugate(n in 1usize..7, a in prop::collection::vec(-1.0f64..1.0, 72)) {
        let x = matrix(n, &a);
        let l = logdet(&x).unwrap();
        let la = logdet(&x.adjoint()).unwrap();
        prop_assert!((l.re - la.re).abs() < 1e-12 * (1.0 + l.re.abs()));
        prop_assert!(wrap_angle(l.im + la.im).abs() < 1e-10);
    }

    #[test]
    fn global_phase_and_routes(seed in 0u64..10_000, scale in 0.01f64..4.0, theta in -3.1f64..3.1) {
        let lat = small(2.0);
        let phi = random_config(&lat, scale, seed);
        let v = potential_full(&lat, &phi).unwrap().total;
        let vr = potential_full(&lat, &phi.rotated(theta)).unwrap().total;
        let red = potential_reduced(&lat, &phi).unwrap().total;
        prop_assert!((v.re - vr.re).abs() < 1e-10 * (1.0 + v.re.abs()));
        prop_assert!(wrap_angle(v.im - vr.im).abs() < 1e-9);
        prop_assert!((v.re - red.re).abs() < 1e-10 * (1.0 + v.re.abs()));
    }

    #[test]
    fn bound_chain_holds(seed in 0u64..10_000, scale in 0.01f64..6.0, ratio in 0.3f64..4.0) {
        let lat = small(ratio);
        let rep = bound_report(&lat, &random_config(&lat, scale, seed), 1e-9 * lat.kappa());
        prop_assert!(rep.chain_ok, "{:?}", rep);
    }

    #[test]
    fn gap_lhs_decreasing(d1 in 0.0f64..50.0, step in 1e-6f64..10.0) {
        let lat = small(2.0);
        prop_assert!(gap_lhs(&lat, d1 + step) < gap_lhs(&lat, d1));
    }
}
