//! Real-weighted Pauli-sum observables and their text format.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{parse_word, PauliSum, PauliWord, MAX_QUBITS};

/// Upper bound on the number of precomputed diagonal-phase entries kept per operator.
const TABLE_BUDGET: usize = 1 << 23;

/// Terms sharing one flip mask `x`. Each term contributes
/// `coeff * (-1)^{|b & z|}` to the transition `b -> b ^ x`, where the `i^{#Y}`
/// phase is already folded into `coeff`.
#[derive(Debug, Clone)]
struct FlipGroup {
    x: u64,
    terms: Vec<(Complex64, u64)>,
    table: Option<Vec<Complex64>>,
    /// Nonzero `(b, weight)` pairs, kept when the group acts on a small part of the space.
    sparse: Option<Vec<(usize, Complex64)>>,
}

impl FlipGroup {
    #[inline]
    fn weight(&self, b: usize) -> Complex64 {
        match &self.table {
            Some(t) => t[b],
            None => {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(c, z) in &self.terms {
                    if (b as u64 & z).count_ones() & 1 == 1 {
                        acc -= c;
                    } else {
                        acc += c;
                    }
                }
                acc
            }
        }
    }
}

/// Matrix-free operator compiled from a Pauli sum, grouped by flip mask.
#[derive(Debug, Clone)]
pub(crate) struct CompiledOperator {
    n_qubits: usize,
    groups: Vec<FlipGroup>,
}

impl CompiledOperator {
    pub(crate) fn new(n_qubits: usize, terms: impl IntoIterator<Item = (Complex64, PauliWord)>) -> Self {
        let mut groups: Vec<FlipGroup> = Vec::new();
        for (c, w) in terms {
            let coeff = c * w.phase();
            match groups.iter_mut().find(|g| g.x == w.x_mask()) {
                Some(g) => g.terms.push((coeff, w.z_mask())),
                None => groups.push(FlipGroup {
                    x: w.x_mask(),
                    terms: vec![(coeff, w.z_mask())],
                    table: None,
                    sparse: None,
                }),
            }
        }
        groups.sort_by_key(|g| g.x);
        let dim = 1usize << n_qubits;
        if groups.len().saturating_mul(dim) <= TABLE_BUDGET {
            for g in &mut groups {
                let mut t = vec![Complex64::new(0.0, 0.0); dim];
                for (b, slot) in t.iter_mut().enumerate() {
                    *slot = g.weight(b);
                }
                let nnz: Vec<(usize, Complex64)> = t
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| **w != Complex64::new(0.0, 0.0))
                    .map(|(b, &w)| (b, w))
                    .collect();
                if nnz.len() * 4 <= dim {
                    g.sparse = Some(nnz);
                }
                g.table = Some(t);
            }
        }
        Self { n_qubits, groups }
    }

    /// `out += scale * A psi`.
    pub(crate) fn apply_add(&self, psi: &[Complex64], out: &mut [Complex64], scale: Complex64) {
        for g in &self.groups {
            let x = g.x as usize;
            if let Some(nz) = &g.sparse {
                for &(b, w) in nz {
                    out[b ^ x] += scale * w * psi[b];
                }
                continue;
            }
            match &g.table {
                Some(t) => {
                    for (b, (&a, &w)) in psi.iter().zip(t.iter()).enumerate() {
                        out[b ^ x] += scale * w * a;
                    }
                }
                None => {
                    for (b, &a) in psi.iter().enumerate() {
                        out[b ^ x] += scale * g.weight(b) * a;
                    }
                }
            }
        }
    }

    /// Visits every nonzero matrix element as `(row, col, value)`.
    pub(crate) fn for_each_entry(&self, mut f: impl FnMut(usize, usize, Complex64)) {
        for g in &self.groups {
            let x = g.x as usize;
            for b in 0..1usize << self.n_qubits {
                let w = g.weight(b);
                if w != Complex64::new(0.0, 0.0) {
                    f(b ^ x, b, w);
                }
            }
        }
    }

    /// `psi <- psi + (cos t - 1) A^2 psi - i sin t A psi` in place, when `A` moves
    /// each basis state to exactly one partner (a single nonzero flip mask).
    /// Returns `false` without touching `psi` if the operator has another shape.
    pub(crate) fn rotate_in_place(&self, psi: &mut [Complex64], theta: f64) -> bool {
        let [g] = self.groups.as_slice() else { return false };
        let (Some(t), true) = (&g.table, g.x != 0) else { return false };
        let x = g.x as usize;
        let (s, c) = theta.sin_cos();
        let a = c - 1.0;
        let dim = psi.len();
        let mut pair = |b: usize| {
            let r = b ^ x;
            let (w1, w2) = (t[b], t[r]);
            let (pb, pr) = (psi[b], psi[r]);
            let d = a * w1 * w2;
            psi[b] = pb + d * pb - Complex64::new(0.0, s) * w2 * pr;
            psi[r] = pr + d * pr - Complex64::new(0.0, s) * w1 * pb;
        };
        match &g.sparse {
            Some(nz) => nz.iter().filter(|(b, _)| *b < *b ^ x).for_each(|&(b, _)| pair(b)),
            None => (0..dim).filter(|&b| b < b ^ x).for_each(pair),
        }
        true
    }

    pub(crate) fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply_add(psi, &mut out, Complex64::new(1.0, 0.0));
        out
    }

    /// `<psi|A|psi>` without normalisation.
    pub(crate) fn expectation(&self, psi: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for g in &self.groups {
            let x = g.x as usize;
            let mut part = Complex64::new(0.0, 0.0);
            if let Some(nz) = &g.sparse {
                for &(b, w) in nz {
                    part += psi[b ^ x].conj() * w * psi[b];
                }
                acc += part;
                continue;
            }
            match &g.table {
                Some(t) => {
                    for (b, (&a, &w)) in psi.iter().zip(t.iter()).enumerate() {
                        part += psi[b ^ x].conj() * w * a;
                    }
                }
                None => {
                    for (b, &a) in psi.iter().enumerate() {
                        part += psi[b ^ x].conj() * g.weight(b) * a;
                    }
                }
            }
            acc += part;
        }
        acc
    }
}

/// Observable `H = sum_k c_k P_k` with real coefficients.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    n_qubits: usize,
    terms: Vec<(f64, PauliWord)>,
    compiled: CompiledOperator,
}

/// Header fields carried by the text format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HamiltonianHeader {
    pub n_qubits: usize,
    pub n_electrons: usize,
}

impl PartialEq for Hamiltonian {
    fn eq(&self, other: &Self) -> bool {
        self.n_qubits == other.n_qubits && self.terms == other.terms
    }
}

impl Hamiltonian {
    pub fn new(n_qubits: usize, terms: Vec<(f64, PauliWord)>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!("unsupported qubit count {n_qubits}")));
        }
        for (c, w) in &terms {
            if w.n_qubits() != n_qubits {
                return Err(Error::DimensionMismatch { expected: n_qubits, found: w.n_qubits() });
            }
            if !c.is_finite() {
                return Err(Error::Config(format!("non-finite coefficient on {w}")));
            }
        }
        let compiled = CompiledOperator::new(
            n_qubits,
            terms.iter().map(|&(c, w)| (Complex64::new(c, 0.0), w)),
        );
        Ok(Self { n_qubits, terms, compiled })
    }

    /// `c * I` on `n_qubits`.
    pub fn constant(n_qubits: usize, c: f64) -> Result<Self> {
        Self::new(n_qubits, vec![(c, PauliWord::identity(n_qubits))])
    }

    /// Hermitian part of a Pauli sum; fails if any coefficient has an imaginary part above `1e-12`.
    pub fn from_pauli_sum(sum: &PauliSum) -> Result<Self> {
        let terms = sum
            .real_terms(1e-12)
            .ok_or_else(|| Error::Config("Pauli sum has complex coefficients".into()))?;
        Self::new(sum.n_qubits(), terms)
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

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &Hamiltonian, b: f64) -> Result<Self> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: other.n_qubits });
        }
        let terms = self
            .terms
            .iter()
            .map(|&(c, w)| (a * c, w))
            .chain(other.terms.iter().map(|&(c, w)| (b * c, w)))
            .collect();
        Self::new(self.n_qubits, terms)
    }

    /// Sum of absolute coefficients, an upper bound on the spectral radius.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    pub(crate) fn compiled(&self) -> &CompiledOperator {
        &self.compiled
    }

    pub fn parse(text: &str) -> Result<(Self, HamiltonianHeader)> {
        let mut n_qubits = None;
        let mut n_electrons = None;
        let mut raw: Vec<(usize, f64, &str)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((key, value)) = comment.split_once('=') {
                    let key = key.trim();
                    let parse_count = |v: &str| {
                        v.trim().parse::<usize>().map_err(|_| Error::Parse {
                            line: lineno,
                            message: format!("invalid value for `{key}`"),
                        })
                    };
                    match key {
                        "n_qubits" => n_qubits = Some(parse_count(value)?),
                        "n_electrons" => n_electrons = Some(parse_count(value)?),
                        _ => {}
                    }
                }
                continue;
            }
            let (coeff, word) = line.split_once(char::is_whitespace).ok_or_else(|| Error::Parse {
                line: lineno,
                message: "expected `<coefficient> <word>`".into(),
            })?;
            let c: f64 = coeff.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid coefficient `{coeff}`"),
            })?;
            if !c.is_finite() {
                return Err(Error::Parse { line: lineno, message: "non-finite coefficient".into() });
            }
            raw.push((lineno, c, word));
        }
        let n_qubits = n_qubits.ok_or(Error::MissingHeader("n_qubits"))?;
        let n_electrons = n_electrons.ok_or(Error::MissingHeader("n_electrons"))?;
        if raw.is_empty() {
            return Err(Error::NoTerms);
        }
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!("unsupported qubit count {n_qubits}")));
        }
        if n_electrons > n_qubits {
            return Err(Error::InvalidElectronCount { n_qubits, n_electrons });
        }
        let mut terms = Vec::with_capacity(raw.len());
        for (lineno, c, word) in raw {
            let w = parse_word(word, n_qubits).map_err(|message| Error::Parse { line: lineno, message })?;
            terms.push((c, w));
        }
        Ok((Self::new(n_qubits, terms)?, HamiltonianHeader { n_qubits, n_electrons }))
    }

    pub fn from_file(path: &Path) -> Result<(Self, HamiltonianHeader)> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Text form accepted by [`Hamiltonian::parse`]. Coefficients use the shortest
    /// representation that round-trips exactly.
    pub fn serialize(&self, n_electrons: usize) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# n_qubits = {}", self.n_qubits);
        let _ = writeln!(out, "# n_electrons = {n_electrons}");
        for (c, w) in &self.terms {
            let _ = writeln!(out, "{c:?} {w}");
        }
        out
    }
}
