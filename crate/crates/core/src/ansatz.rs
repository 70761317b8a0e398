//! Ordered products of parameterised generators with a parameter-tying map.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::excitations::ExcitationGenerator;
use crate::state::StateVector;

/// One factor `exp(-i scale * theta[param] * G)` of the circuit.
#[derive(Debug, Clone)]
pub struct Slot {
    pub generator: Arc<ExcitationGenerator>,
    pub param: usize,
    pub scale: f64,
}

/// `U(theta) = U_last ... U_first`; slot 0 acts on the reference first.
#[derive(Debug, Clone)]
pub struct AnsatzCircuit {
    n_qubits: usize,
    slots: Vec<Slot>,
    n_parameters: usize,
}

impl AnsatzCircuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, slots: Vec::new(), n_parameters: 0 }
    }

    /// One fresh parameter per generator, in order.
    pub fn from_generators(n_qubits: usize, generators: impl IntoIterator<Item = Arc<ExcitationGenerator>>) -> Result<Self> {
        let mut c = Self::new(n_qubits);
        for g in generators {
            c.push_new(g)?;
        }
        Ok(c)
    }

    /// Appends `g` with a new parameter and returns its index.
    pub fn push_new(&mut self, g: Arc<ExcitationGenerator>) -> Result<usize> {
        let p = self.n_parameters;
        self.push(g, p, 1.0)?;
        Ok(p)
    }

    /// Appends `g` tied to parameter `param`; indices may extend the parameter count by at most one.
    pub fn push(&mut self, g: Arc<ExcitationGenerator>, param: usize, scale: f64) -> Result<()> {
        if g.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: g.n_qubits() });
        }
        if param > self.n_parameters {
            return Err(Error::ParameterOutOfRange { index: param, n_parameters: self.n_parameters });
        }
        if !scale.is_finite() || scale == 0.0 {
            return Err(Error::Config(format!("invalid angle scale {scale}")));
        }
        self.n_parameters = self.n_parameters.max(param + 1);
        self.slots.push(Slot { generator: g, param, scale });
        Ok(())
    }

    /// Appends a rotation `exp(-i theta P / 2)` for a self-inverse generator.
    pub fn push_rotation(&mut self, g: Arc<ExcitationGenerator>, param: usize) -> Result<()> {
        self.push(g, param, 0.5)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_parameters(&self) -> usize {
        self.n_parameters
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Number of slots driven by `param`.
    pub fn occurrences(&self, param: usize) -> usize {
        self.slots.iter().filter(|s| s.param == param).count()
    }

    pub fn first_slot_of(&self, param: usize) -> Option<usize> {
        self.slots.iter().position(|s| s.param == param)
    }

    pub fn check_parameters(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_parameters {
            return Err(Error::ParameterCount { expected: self.n_parameters, found: theta.len() });
        }
        Ok(())
    }

    /// `U(theta)|reference>`.
    pub fn prepare(&self, reference: &StateVector, theta: &[f64]) -> Result<StateVector> {
        self.check_parameters(theta)?;
        if reference.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: reference.n_qubits() });
        }
        let mut s = reference.clone();
        for slot in &self.slots {
            slot.generator.apply_unitary_raw(s.amplitudes_mut(), slot.scale * theta[slot.param]);
        }
        Ok(s)
    }
}
