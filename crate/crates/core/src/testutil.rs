use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::ansatz::AnsatzCircuit;
use crate::excitations::{build_uccsd_pool, generator, hartree_fock_state, ExcitationKind};
use crate::fixture::Fixture;
use crate::hamiltonian::Hamiltonian;
use crate::noise::NoiseModel;
use crate::optimizers::EnergyEvaluator;
use crate::pauli::{Pauli, PauliWord};
use crate::state::StateVector;

pub fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
    let amps = (0..1 << n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let mut s = StateVector::from_amplitudes(n, amps).unwrap();
    s.normalize();
    s
}

pub fn random_word(n: usize, rng: &mut impl Rng) -> PauliWord {
    let factors: Vec<(usize, Pauli)> = (0..n)
        .filter_map(|q| match rng.gen_range(0..4) {
            0 => None,
            1 => Some((q, Pauli::X)),
            2 => Some((q, Pauli::Y)),
            _ => Some((q, Pauli::Z)),
        })
        .collect();
    PauliWord::new(n, &factors).unwrap()
}

pub fn random_hamiltonian(n: usize, terms: usize, rng: &mut impl Rng) -> Hamiltonian {
    let terms = (0..terms)
        .map(|_| (rng.gen_range(-1.0..1.0), random_word(n, rng)))
        .collect();
    Hamiltonian::new(n, terms).unwrap()
}

pub fn uccsd_evaluator(name: &str) -> (Fixture, EnergyEvaluator) {
    let fx = Fixture::load(name).unwrap();
    let pool = build_uccsd_pool(fx.n_qubits, fx.n_electrons, ExcitationKind::Fermionic).unwrap();
    let gens = pool.iter().map(|s| Arc::new(generator(s, fx.n_qubits).unwrap()));
    let ansatz = AnsatzCircuit::from_generators(fx.n_qubits, gens).unwrap();
    let hf = hartree_fock_state(fx.n_qubits, fx.n_electrons).unwrap();
    let ev = EnergyEvaluator::new(Arc::new(fx.hamiltonian.clone()), hf, ansatz, NoiseModel::Off).unwrap();
    (fx, ev)
}
