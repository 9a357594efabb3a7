//! Fixed inputs shared by the benchmarks.

use jointmeas_core::random::{random_observable, random_qubit_dichotomic, seeded};
use jointmeas_core::Observable;

/// Unbiased pair with Bloch vectors `t x` and `t y`.
pub fn pauli_pair(t: f64) -> [Observable; 2] {
    [[t, 0.0, 0.0], [0.0, t, 0.0]].map(|a| {
        jointmeas_core::QubitDichotomic::from_parts(0.0, a)
            .expect("t at most one")
            .observable()
    })
}

pub fn pauli_triplet(t: f64) -> [Observable; 3] {
    [[t, 0.0, 0.0], [0.0, t, 0.0], [0.0, 0.0, t]].map(|a| {
        jointmeas_core::QubitDichotomic::from_parts(0.0, a)
            .expect("t at most one")
            .observable()
    })
}

pub fn qubit_pairs(seed: u64, n: usize) -> Vec<[Observable; 2]> {
    let mut rng = seeded(seed);
    (0..n)
        .map(|_| [random_qubit_dichotomic(&mut rng).observable(), random_qubit_dichotomic(&mut rng).observable()])
        .collect()
}

pub fn general_pair(seed: u64, dim: usize, outcomes: (usize, usize)) -> [Observable; 2] {
    let mut rng = seeded(seed);
    [
        random_observable(&mut rng, dim, outcomes.0).expect("valid sizes"),
        random_observable(&mut rng, dim, outcomes.1).expect("valid sizes"),
    ]
}
