//! Metered energy function `f(theta) = <psi0| U(theta)^dag H U(theta) |psi0>`.

use std::sync::Arc;

use crate::ansatz::AnsatzCircuit;
use crate::error::{Error, Result};
use crate::excitations::ExcitationGenerator;
use crate::hamiltonian::Hamiltonian;
use crate::noise::{NoiseModel, NoiseSource};
use crate::state::{expectation, inner, StateVector};

use super::trace::{EventKind, OptimizerTrace};

/// Prefix states `U_{k-1} ... U_0 |psi0>` for the most recently prepared angles.
/// `states[0..=valid]` are current; later entries are stale.
#[derive(Debug, Clone)]
struct PrefixCache {
    angles: Vec<f64>,
    states: Vec<Option<StateVector>>,
    valid: usize,
}

/// Owns the ansatz, the energy counter and the trace; every optimiser goes through it.
#[derive(Debug, Clone)]
pub struct EnergyEvaluator {
    hamiltonian: Arc<Hamiltonian>,
    reference: StateVector,
    ansatz: AnsatzCircuit,
    noise: NoiseSource,
    counter: u64,
    trace: OptimizerTrace,
    cache: PrefixCache,
}

impl EnergyEvaluator {
    pub fn new(hamiltonian: Arc<Hamiltonian>, reference: StateVector, ansatz: AnsatzCircuit, noise: NoiseModel) -> Result<Self> {
        let n = hamiltonian.n_qubits();
        if reference.n_qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, found: reference.n_qubits() });
        }
        if ansatz.n_qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, found: ansatz.n_qubits() });
        }
        let dev = (reference.norm_sqr() - 1.0).abs();
        if dev > 1e-8 {
            return Err(Error::NotNormalized { deviation: dev });
        }
        let len = ansatz.len();
        let mut states = vec![None; len + 1];
        states[0] = Some(reference.clone());
        Ok(Self {
            hamiltonian,
            reference,
            ansatz,
            noise: NoiseSource::new(noise)?,
            counter: 0,
            trace: OptimizerTrace::new(),
            cache: PrefixCache { angles: vec![0.0; len], states, valid: 0 },
        })
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn reference(&self) -> &StateVector {
        &self.reference
    }

    pub fn ansatz(&self) -> &AnsatzCircuit {
        &self.ansatz
    }

    pub fn n_parameters(&self) -> usize {
        self.ansatz.n_parameters()
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise.model()
    }

    /// Energy evaluations charged so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn trace(&self) -> &OptimizerTrace {
        &self.trace
    }

    pub fn trace_mut(&mut self) -> &mut OptimizerTrace {
        &mut self.trace
    }

    pub fn take_trace(&mut self) -> OptimizerTrace {
        std::mem::take(&mut self.trace)
    }

    /// Adds a non-evaluation event stamped with the current counter.
    pub fn record(&mut self, kind: EventKind, param: Option<usize>, theta: Option<f64>, energy: Option<f64>) {
        self.trace.record(self.counter, kind, param, theta, energy);
    }

    /// Appends `g` with a fresh parameter and returns its index.
    pub fn push_operator(&mut self, g: Arc<ExcitationGenerator>) -> Result<usize> {
        let p = self.ansatz.push_new(g)?;
        self.cache.angles.push(0.0);
        self.cache.states.push(None);
        Ok(p)
    }

    /// `U(theta)|psi0>`; not an energy evaluation.
    pub fn prepare(&mut self, theta: &[f64]) -> Result<StateVector> {
        self.ansatz.check_parameters(theta)?;
        let slots = self.ansatz.slots();
        let angles: Vec<f64> = slots.iter().map(|s| s.scale * theta[s.param]).collect();
        let cache = &mut self.cache;
        let same = angles.iter().zip(&cache.angles).take_while(|(a, b)| a == b).count();
        let start = same.min(cache.valid);
        let mut s = cache.states[start].clone().expect("valid prefix state");
        for (i, slot) in slots.iter().enumerate().skip(start) {
            slot.generator.apply_unitary_raw(s.amplitudes_mut(), angles[i]);
            if i == start {
                cache.states[i + 1] = Some(s.clone());
            }
        }
        cache.valid = (start + 1).min(slots.len());
        cache.angles = angles;
        Ok(s)
    }

    /// Noise-free, unmetered energy; for reporting and oracles.
    pub fn exact_energy(&mut self, theta: &[f64]) -> Result<f64> {
        let s = self.prepare(theta)?;
        expectation(&self.hamiltonian, &s)
    }

    /// Unmetered exact gradient by reverse-mode differentiation through the slots.
    pub(crate) fn exact_gradient(&mut self, theta: &[f64]) -> Result<Vec<f64>> {
        let psi = self.prepare(theta)?;
        let mut lambda = self.hamiltonian.compiled().apply(psi.amplitudes());
        let mut phi = psi.into_amplitudes();
        let mut grad = vec![0.0; self.ansatz.n_parameters()];
        for slot in self.ansatz.slots().iter().rev() {
            let g_phi = slot.generator.apply_raw(&phi);
            grad[slot.param] += slot.scale * 2.0 * inner(&lambda, &g_phi).im;
            let back = -slot.scale * theta[slot.param];
            slot.generator.apply_unitary_raw(&mut phi, back);
            slot.generator.apply_unitary_raw(&mut lambda, back);
        }
        Ok(grad)
    }

    /// One metered evaluation.
    pub fn energy(&mut self, theta: &[f64]) -> Result<f64> {
        self.energy_focus(theta, None)
    }

    /// One metered evaluation, logged against parameter `focus` when given.
    pub fn energy_focus(&mut self, theta: &[f64], focus: Option<usize>) -> Result<f64> {
        let s = self.prepare(theta)?;
        self.measure(&s, focus, focus.map(|j| theta[j]))
    }

    /// Charges one evaluation for a measured quantity other than the energy itself;
    /// the event carries no energy.
    pub fn charge(&mut self, param: Option<usize>, theta: Option<f64>) {
        self.counter += 1;
        self.trace.record(self.counter, EventKind::EnergyEval, param, theta, None);
    }

    /// Charges one evaluation for an already prepared state (used when scoring
    /// operators that are not yet part of the ansatz).
    pub fn measure(&mut self, state: &StateVector, param: Option<usize>, theta: Option<f64>) -> Result<f64> {
        let exact = expectation(&self.hamiltonian, state)?;
        let e = self.noise.noisy_energy(exact, &self.hamiltonian, state)?;
        self.counter += 1;
        self.trace.record(self.counter, EventKind::EnergyEval, param, theta, Some(e));
        Ok(e)
    }
}
