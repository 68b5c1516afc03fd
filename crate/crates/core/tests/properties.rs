//! Property tests for the structural invariants the rest of the tests rely
//! on: unit-norm states, 2-pi periodicity of the objective, objective values
//! inside the spectral range, and the angle-wrapping convention.

use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;

use rotolab::qsim::{self, Axis, Gate, Observable, ParamCircuit, PauliString};
use rotolab::trig::wrap_angle;

fn build_circuit(seed: u64, qubits: usize, d: usize) -> (ParamCircuit, Observable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::new();
    for p in 0..d {
        let axis = match rng.gen_range(0..3) {
            0 => Axis::X,
            1 => Axis::Y,
            _ => Axis::Z,
        };
        gates.push(Gate::Rotation { axis, qubit: rng.gen_range(0..qubits), param: p });
        if qubits > 1 && rng.gen_bool(0.5) {
            let c = rng.gen_range(0..qubits);
            let t = (c + 1 + rng.gen_range(0..qubits - 1)) % qubits;
            gates.push(Gate::Cnot { control: c, target: t });
        }
    }
    let circuit = ParamCircuit::new(qubits, gates).unwrap();
    let paulis = ['I', 'X', 'Y', 'Z'];
    let s: String = (0..qubits).map(|_| paulis[rng.gen_range(0..4)]).collect();
    let obs =
        Observable::from_terms(qubits, vec![(rng.gen_range(0.1..2.0), PauliString::parse(&s).unwrap())])
            .unwrap();
    (circuit, obs)
}

proptest! {
    #[test]
    fn state_norm_is_preserved(
        seed in 0u64..1000,
        qubits in 1usize..5,
        d in 1usize..8,
        theta_seed in 0u64..1000,
    ) {
        let (circuit, _) = build_circuit(seed, qubits, d);
        let mut rng = ChaCha8Rng::seed_from_u64(theta_seed);
        let theta: Vec<f64> = (0..d).map(|_| rng.gen_range(-PI..PI)).collect();
        let state = qsim::apply_circuit(&circuit, &theta).unwrap();
        prop_assert!((state.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn objective_is_two_pi_periodic(
        seed in 0u64..1000,
        qubits in 1usize..4,
        d in 1usize..6,
        j_pick in 0usize..6,
        turns in -2i64..3,
    ) {
        let (circuit, obs) = build_circuit(seed, qubits, d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let theta: Vec<f64> = (0..d).map(|_| rng.gen_range(-PI..PI)).collect();
        let mut shifted = theta.clone();
        let j = j_pick % d;
        shifted[j] += turns as f64 * TAU;
        let a = qsim::objective(&circuit, &obs, &theta).unwrap();
        let b = qsim::objective(&circuit, &obs, &shifted).unwrap();
        prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn objective_stays_in_spectral_range(
        seed in 0u64..1000,
        qubits in 1usize..4,
        d in 1usize..6,
    ) {
        let (circuit, obs) = build_circuit(seed, qubits, d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xab);
        let theta: Vec<f64> = (0..d).map(|_| rng.gen_range(-PI..PI)).collect();
        let f = qsim::objective(&circuit, &obs, &theta).unwrap();
        let (lo, hi) = obs.spectral_bounds();
        prop_assert!(f >= -lo - 1e-9 && f <= hi + 1e-9);
    }

    #[test]
    fn wrapped_angles_land_in_half_open_interval(x in -1e6f64..1e6) {
        let w = wrap_angle(x);
        prop_assert!(w > -PI && w <= PI);
        // wrapping preserves the point on the circle
        prop_assert!(((x - w) / TAU).rem_euclid(1.0) < 1e-6 || ((x - w) / TAU).rem_euclid(1.0) > 1.0 - 1e-6);
    }
}
