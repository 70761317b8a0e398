//! Fermionic and qubit excitation generators, their closed-form unitaries,
//! UCCSD pools and Hartree-Fock references.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dense;
use crate::error::{Error, Result};
use crate::hamiltonian::CompiledOperator;
use crate::pauli::{Pauli, PauliSum, PauliWord, MAX_QUBITS};
use crate::state::{BasisState, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExcitationKind {
    Fermionic,
    Qubit,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct ExcitationSpec {
    pub kind: ExcitationKind,
    pub occupied: Vec<usize>,
    #[serde(rename = "virtual")]
    pub virtual_: Vec<usize>,
}

impl ExcitationSpec {
    pub fn new(kind: ExcitationKind, occupied: Vec<usize>, virtual_: Vec<usize>) -> Self {
        Self { kind, occupied, virtual_ }
    }

    pub fn fermionic(occupied: &[usize], virtual_: &[usize]) -> Self {
        Self::new(ExcitationKind::Fermionic, occupied.to_vec(), virtual_.to_vec())
    }

    pub fn qubit(occupied: &[usize], virtual_: &[usize]) -> Self {
        Self::new(ExcitationKind::Qubit, occupied.to_vec(), virtual_.to_vec())
    }

    pub fn order(&self) -> usize {
        self.occupied.len()
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let m = self.occupied.len();
        if m == 0 || self.virtual_.len() != m {
            return Err(Error::InvalidExcitation(format!(
                "occupied and virtual lists must have equal nonzero length ({} vs {})",
                m,
                self.virtual_.len()
            )));
        }
        for list in [&self.occupied, &self.virtual_] {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidExcitation(format!("indices {list:?} not strictly increasing")));
            }
            if let Some(&q) = list.iter().find(|&&q| q >= n_qubits) {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
        }
        if let Some(q) = self.occupied.iter().find(|q| self.virtual_.contains(q)) {
            return Err(Error::InvalidExcitation(format!("orbital {q} is both occupied and virtual")));
        }
        Ok(())
    }
}

impl fmt::Display for ExcitationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",");
        let tag = match self.kind {
            ExcitationKind::Fermionic => "f",
            ExcitationKind::Qubit => "q",
        };
        write!(f, "{tag}({})->({})", join(&self.occupied), join(&self.virtual_))
    }
}

/// Hermitian generator `G` of `exp(-i theta G)`, stored as a real-weighted Pauli sum.
#[derive(Debug, Clone)]
pub struct ExcitationGenerator {
    spec: Option<ExcitationSpec>,
    n_qubits: usize,
    terms: Vec<(f64, PauliWord)>,
    compiled: CompiledOperator,
}

impl ExcitationGenerator {
    /// Wraps an arbitrary Hermitian Pauli sum. No algebraic property is checked here.
    pub fn from_pauli_sum(sum: &PauliSum, spec: Option<ExcitationSpec>) -> Result<Self> {
        let terms = sum
            .simplify(1e-14)
            .real_terms(1e-12)
            .ok_or_else(|| Error::InvalidExcitation("generator must have real Pauli coefficients".into()))?;
        if terms.is_empty() {
            return Err(Error::InvalidExcitation("generator has no terms".into()));
        }
        let n_qubits = sum.n_qubits();
        let compiled = CompiledOperator::new(n_qubits, terms.iter().map(|&(c, w)| (Complex64::new(c, 0.0), w)));
        Ok(Self { spec, n_qubits, terms, compiled })
    }

    /// A single Pauli word, as used by rotation gates `exp(-i theta P / 2)`.
    pub fn pauli_rotation(word: PauliWord) -> Self {
        Self::from_pauli_sum(&PauliSum::from_word(Complex64::new(1.0, 0.0), word), None)
            .expect("a single Pauli word is a valid generator")
    }

    pub fn spec(&self) -> Option<&ExcitationSpec> {
        self.spec.as_ref()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliWord)] {
        &self.terms
    }

    pub fn to_pauli_sum(&self) -> PauliSum {
        let mut s = PauliSum::zero(self.n_qubits);
        for &(c, w) in &self.terms {
            s.add_term(Complex64::new(c, 0.0), w);
        }
        s
    }

    /// Checks `G^2 = I` symbolically.
    pub fn is_self_inverse(&self) -> bool {
        let g = self.to_pauli_sum();
        let diff = g.mul(&g).add_scaled(&PauliSum::identity(self.n_qubits), Complex64::new(-1.0, 0.0));
        diff.simplify(1e-12).is_empty()
    }

    /// Checks `G^3 = G` symbolically.
    pub fn is_cube_idempotent(&self) -> bool {
        let g = self.to_pauli_sum();
        let diff = g.mul(&g).mul(&g).add_scaled(&g, Complex64::new(-1.0, 0.0));
        diff.simplify(1e-12).is_empty()
    }

    pub fn dense_matrix(&self) -> Result<DMatrix<Complex64>> {
        dense::pauli_sum_matrix(&self.to_pauli_sum())
    }

    pub(crate) fn apply_raw(&self, psi: &[Complex64]) -> Vec<Complex64> {
        self.compiled.apply(psi)
    }

    /// `exp(-i theta G)` applied in place through `I + (cos theta - 1) G^2 - i sin theta G`.
    pub(crate) fn apply_unitary_raw(&self, amps: &mut [Complex64], theta: f64) {
        if theta == 0.0 || self.compiled.rotate_in_place(amps, theta) {
            return;
        }
        let g1 = self.compiled.apply(amps);
        let g2 = self.compiled.apply(&g1);
        let (s, c) = theta.sin_cos();
        let a = c - 1.0;
        let b = Complex64::new(0.0, -s);
        for ((x, y1), y2) in amps.iter_mut().zip(&g1).zip(&g2) {
            *x += a * y2 + b * y1;
        }
    }
}

impl fmt::Display for ExcitationGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.spec {
            Some(s) => write!(f, "{s}"),
            None => {
                let parts: Vec<String> = self.terms.iter().map(|(c, w)| format!("{c}*[{w}]")).collect();
                write!(f, "{}", parts.join(" + "))
            }
        }
    }
}

fn ladder(n_qubits: usize, p: usize, create: bool, z_string: bool) -> PauliSum {
    let mut factors: Vec<(usize, Pauli)> = if z_string { (0..p).map(|q| (q, Pauli::Z)).collect() } else { Vec::new() };
    factors.push((p, Pauli::X));
    let x = PauliWord::new(n_qubits, &factors).expect("valid ladder word");
    factors.pop();
    factors.push((p, Pauli::Y));
    let y = PauliWord::new(n_qubits, &factors).expect("valid ladder word");
    // creation (X - iY)/2 maps |0> to |1>
    let sy = if create { -0.5 } else { 0.5 };
    let mut s = PauliSum::zero(n_qubits);
    s.add_term(Complex64::new(0.5, 0.0), x);
    s.add_term(Complex64::new(0.0, sy), y);
    s
}

fn build_generator(spec: &ExcitationSpec, n_qubits: usize, z_string: bool) -> Result<ExcitationGenerator> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Config(format!("unsupported qubit count {n_qubits}")));
    }
    spec.validate(n_qubits)?;
    // a+_{v1} ... a+_{vm} a_{om} ... a_{o1}
    let mut t = PauliSum::identity(n_qubits);
    for &v in &spec.virtual_ {
        t = t.mul(&ladder(n_qubits, v, true, z_string));
    }
    for &o in spec.occupied.iter().rev() {
        t = t.mul(&ladder(n_qubits, o, false, z_string));
    }
    let t = t.simplify(1e-15);
    let adjoint = {
        let mut a = PauliSum::zero(n_qubits);
        for (w, c) in t.iter() {
            a.add_term(c.conj(), w);
        }
        a
    };
    let tau = t.add_scaled(&adjoint, Complex64::new(-1.0, 0.0));
    let g = tau.scale(Complex64::new(0.0, 1.0)).simplify(1e-15);
    ExcitationGenerator::from_pauli_sum(&g, Some(spec.clone()))
}

/// `G = i tau` for the fermionic excitation `tau = a+_v... a_o... - h.c.` under Jordan-Wigner.
pub fn jw_generator(spec: &ExcitationSpec, n_qubits: usize) -> Result<ExcitationGenerator> {
    if spec.kind != ExcitationKind::Fermionic {
        return Err(Error::InvalidExcitation("jw_generator requires a fermionic spec".into()));
    }
    build_generator(spec, n_qubits, true)
}

/// Same construction with bare qubit raising/lowering operators (no parity strings).
pub fn qubit_generator(spec: &ExcitationSpec, n_qubits: usize) -> Result<ExcitationGenerator> {
    if spec.kind != ExcitationKind::Qubit {
        return Err(Error::InvalidExcitation("qubit_generator requires a qubit spec".into()));
    }
    build_generator(spec, n_qubits, false)
}

/// Dispatches on `spec.kind`.
pub fn generator(spec: &ExcitationSpec, n_qubits: usize) -> Result<ExcitationGenerator> {
    match spec.kind {
        ExcitationKind::Fermionic => jw_generator(spec, n_qubits),
        ExcitationKind::Qubit => qubit_generator(spec, n_qubits),
    }
}

/// `exp(-i theta G)|psi>` using exactly two applications of `G`.
pub fn apply_excitation(state: &StateVector, g: &ExcitationGenerator, theta: f64) -> Result<StateVector> {
    if g.n_qubits() != state.n_qubits() {
        return Err(Error::DimensionMismatch { expected: g.n_qubits(), found: state.n_qubits() });
    }
    let mut out = state.clone();
    g.apply_unitary_raw(out.amplitudes_mut(), theta);
    Ok(out)
}

/// `(G+, G-)` with `G+- = G +- (G^2 - I)`.
pub fn decompose_self_inverse(g: &ExcitationGenerator) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let n = g.n_qubits();
    if n > dense::DENSE_LIMIT {
        return Err(Error::TooLargeForDense(n, dense::DENSE_LIMIT));
    }
    let m = g.dense_matrix()?;
    let id = dense::identity(n);
    let sq_minus_id = &m * &m - &id;
    if dense::max_abs(&sq_minus_id) < 1e-12 {
        return Err(Error::SelfInverseGenerator);
    }
    Ok((&m + &sq_minus_id, &m - &sq_minus_id))
}

/// Order in which the two excitation ranks appear in a pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PoolOrder {
    #[default]
    DoublesFirst,
    SinglesFirst,
}

/// Spin-conserving singles and S_z-conserving doubles from the lowest
/// `n_electrons` spin orbitals into the rest. Even qubits are spin-up.
pub fn build_uccsd_pool(n_qubits: usize, n_electrons: usize, kind: ExcitationKind) -> Result<Vec<ExcitationSpec>> {
    build_uccsd_pool_ordered(n_qubits, n_electrons, kind, PoolOrder::DoublesFirst)
}

pub fn build_uccsd_pool_ordered(
    n_qubits: usize,
    n_electrons: usize,
    kind: ExcitationKind,
    order: PoolOrder,
) -> Result<Vec<ExcitationSpec>> {
    if n_electrons == 0 || n_electrons >= n_qubits || n_qubits % 2 != 0 {
        return Err(Error::InvalidElectronCount { n_qubits, n_electrons });
    }
    let (mut singles, mut doubles) = enumerate(n_qubits, n_electrons, kind, true);
    if singles.is_empty() && doubles.is_empty() {
        // A lone spatial orbital admits no spin-conserving move; fall back to the unrestricted set.
        (singles, doubles) = enumerate(n_qubits, n_electrons, kind, false);
    }
    let key = |s: &ExcitationSpec| (s.occupied.clone(), s.virtual_.clone());
    singles.sort_by_key(key);
    doubles.sort_by_key(key);
    Ok(match order {
        PoolOrder::DoublesFirst => doubles.into_iter().chain(singles).collect(),
        PoolOrder::SinglesFirst => singles.into_iter().chain(doubles).collect(),
    })
}

fn enumerate(
    n_qubits: usize,
    n_electrons: usize,
    kind: ExcitationKind,
    spin_rules: bool,
) -> (Vec<ExcitationSpec>, Vec<ExcitationSpec>) {
    let allowed = |from: usize, to: usize| !spin_rules || from == to;
    let occ: Vec<usize> = (0..n_electrons).collect();
    let virt: Vec<usize> = (n_electrons..n_qubits).collect();
    let mut singles = Vec::new();
    for &o in &occ {
        for &v in &virt {
            if allowed(o % 2, v % 2) {
                singles.push(ExcitationSpec::new(kind, vec![o], vec![v]));
            }
        }
    }
    let mut doubles = Vec::new();
    for (i, &o1) in occ.iter().enumerate() {
        for &o2 in &occ[i + 1..] {
            for (k, &v1) in virt.iter().enumerate() {
                for &v2 in &virt[k + 1..] {
                    if allowed(o1 % 2 + o2 % 2, v1 % 2 + v2 % 2) {
                        doubles.push(ExcitationSpec::new(kind, vec![o1, o2], vec![v1, v2]));
                    }
                }
            }
        }
    }
    (singles, doubles)
}

/// Basis state with the lowest `n_electrons` spin orbitals occupied.
pub fn hartree_fock_state(n_qubits: usize, n_electrons: usize) -> Result<StateVector> {
    if n_electrons > n_qubits || n_qubits > MAX_QUBITS {
        return Err(Error::InvalidElectronCount { n_qubits, n_electrons });
    }
    Ok(StateVector::basis(&BasisState::new((0..n_qubits).map(|k| k < n_electrons).collect())))
}
