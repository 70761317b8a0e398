//! Dense statevectors and the matrix-free kernels acting on them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::{PauliWord, MAX_QUBITS};

const NORM_TOLERANCE: f64 = 1e-8;

/// Occupation-number bit string; bit `k` is the occupancy of qubit `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisState {
    bits: Vec<bool>,
}

impl BasisState {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_index(n_qubits: usize, index: usize) -> Self {
        Self { bits: (0..n_qubits).map(|k| index >> k & 1 == 1).collect() }
    }

    pub fn n_qubits(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Amplitude index with qubit 0 as the least-significant bit.
    pub fn index(&self) -> usize {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &b)| if b { acc | 1 << k } else { acc })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis(&BasisState::from_index(n_qubits, 0))
    }

    pub fn basis(state: &BasisState) -> Self {
        let n = state.n_qubits();
        assert!(n <= MAX_QUBITS, "{n} qubits exceeds the supported register size");
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[state.index()] = Complex64::new(1.0, 0.0);
        Self { n_qubits: n, amps }
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n_qubits > MAX_QUBITS || amps.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: n_qubits,
                found: amps.len().trailing_zeros() as usize,
            });
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.amps, &other.amps)
    }

    pub fn apply_pauli_word_in_place(&mut self, word: &PauliWord) -> Result<()> {
        check_dims(word.n_qubits(), self.n_qubits)?;
        let x = word.x_mask() as usize;
        let z = word.z_mask();
        let phase = word.phase();
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (b, &a) in self.amps.iter().enumerate() {
            let s = if (b as u64 & z).count_ones() & 1 == 1 { -phase } else { phase };
            out[b ^ x] = s * a;
        }
        self.amps = out;
        Ok(())
    }

    /// Expectation of the particle-number operator `sum_k n_k`.
    pub fn particle_number(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(b, a)| a.norm_sqr() * b.count_ones() as f64)
            .sum()
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn check_norm(state: &StateVector) -> Result<()> {
    let deviation = (state.norm_sqr() - 1.0).abs();
    if deviation > NORM_TOLERANCE {
        return Err(Error::NotNormalized { deviation });
    }
    Ok(())
}

/// `P|psi>`.
pub fn apply_pauli_word(state: &StateVector, word: &PauliWord) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_pauli_word_in_place(word)?;
    Ok(out)
}

/// `<psi|H|psi>` for a normalised state.
pub fn expectation(h: &Hamiltonian, state: &StateVector) -> Result<f64> {
    check_dims(h.n_qubits(), state.n_qubits())?;
    check_norm(state)?;
    let e = h.compiled().expectation(state.amplitudes());
    let scale = h.one_norm().max(1.0);
    debug_assert!(
        e.im.abs() < 1e-10 * scale,
        "imaginary residue {} in expectation value",
        e.im
    );
    Ok(e.re)
}

/// `H|psi>` as a raw amplitude array.
pub fn apply_hamiltonian(h: &Hamiltonian, state: &StateVector) -> Result<Vec<Complex64>> {
    check_dims(h.n_qubits(), state.n_qubits())?;
    Ok(h.compiled().apply(state.amplitudes()))
}

/// `<H^2> - <H>^2`, using `<H^2> = ||H psi||^2`.
pub fn observable_variance(h: &Hamiltonian, state: &StateVector) -> Result<f64> {
    let e = expectation(h, state)?;
    let hpsi = apply_hamiltonian(h, state)?;
    let h2: f64 = hpsi.iter().map(|a| a.norm_sqr()).sum();
    let var = h2 - e * e;
    debug_assert!(var > -1e-10 * h.one_norm().powi(2).max(1.0), "negative variance {var}");
    Ok(var.max(0.0))
}
