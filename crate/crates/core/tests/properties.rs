//! Property tests for the algebraic invariants of the core operations.

use entpump::channel::{bell_zz_pump, pump_map, FlipAxis};
use entpump::linalg::{dagger, hermitize, kron, max_abs_diff, CMatrix, DensityMatrix, PureState, C64};
use entpump::noise::{build_confusion, mitigate, NoiseModel};
use entpump::pauli::Sign;
use proptest::prelude::*;

fn complex_entry() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im))
}

fn matrix(dim: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec(complex_entry(), dim * dim)
        .prop_map(move |v| CMatrix::from_shape_vec((dim, dim), v).unwrap())
}

/// Random density matrix via `A A^dag / tr`.
fn density(n_qubits: usize) -> impl Strategy<Value = DensityMatrix> {
    let dim = 1usize << n_qubits;
    matrix(dim).prop_filter_map("degenerate draw", |a| {
        let h = hermitize(&a.dot(&dagger(&a)));
        let tr: f64 = h.diag().iter().map(|z| z.re).sum();
        if tr < 1e-6 {
            return None;
        }
        DensityMatrix::from_matrix(h.mapv(|z| z / tr)).ok()
    })
}

fn pure_state(n_qubits: usize) -> impl Strategy<Value = PureState> {
    let dim = 1usize << n_qubits;
    proptest::collection::vec(complex_entry(), dim).prop_filter_map("zero vector", |v| {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            return None;
        }
        PureState::new(ndarray::Array1::from(v).mapv(|z| z / norm)).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_is_associative(a in matrix(2), b in matrix(2), c in matrix(2)) {
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(max_abs_diff(&left, &right) < 1e-14);
    }

    #[test]
    fn partial_trace_preserves_trace(rho in density(3), q in 0usize..3) {
        let keep: Vec<usize> = (0..3).filter(|&x| x != q).collect();
        let reduced = rho.partial_trace(&keep).unwrap();
        prop_assert!((reduced.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn population_stays_in_unit_interval(rho in density(2), psi in pure_state(2)) {
        let p = rho.population(&psi).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn conjugation_preserves_hermiticity(rho in density(2), m in matrix(4)) {
        let out = m.dot(rho.matrix()).dot(&dagger(&m));
        prop_assert!(max_abs_diff(&out, &dagger(&out)) < 1e-12);
    }

    #[test]
    fn pump_is_monotone_in_target_population(rho in density(2), p in 0.0..=1.0f64) {
        let map = bell_zz_pump(p, Sign::Plus);
        let before = rho.population(&PureState::phi_plus()).unwrap()
            + rho.population(&PureState::phi_minus()).unwrap();
        let out = map.apply(&rho).unwrap();
        let after = out.population(&PureState::phi_plus()).unwrap()
            + out.population(&PureState::phi_minus()).unwrap();
        prop_assert!(after >= before - 1e-12);
    }

    #[test]
    fn pump_maps_are_cptp(p in 0.0..=1.0f64, sign_bit in 0u8..2) {
        let map = pump_map(
            &"XX".parse().unwrap(),
            0,
            FlipAxis::Z,
            p,
            Sign::from_bit(sign_bit),
        ).unwrap();
        prop_assert!(map.is_cptp(1e-12));
    }

    #[test]
    fn mitigation_round_trips(
        weights in proptest::collection::vec(0.01..1.0f64, 4),
        e in 0.0..0.2f64,
    ) {
        let total: f64 = weights.iter().sum();
        let q: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut noise = NoiseModel::ideal();
        noise.readout_flip = vec![(e, e); 8];
        let m = build_confusion(&noise, 2).unwrap();
        let recovered = mitigate(&m.apply(&q).unwrap(), &m).unwrap();
        for (a, b) in recovered.distribution.iter().zip(q.iter()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
