//! Pauli words and sparse Pauli sums.
//!
//! A word is stored as a pair of bit masks: `x` marks qubits carrying X or Y,
//! `z` marks qubits carrying Z or Y. Qubit 0 is the least-significant bit of
//! the amplitude index.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the bit-mask representation supports.
pub const MAX_QUBITS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn letter(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliWord {
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliWord {
    pub fn identity(n_qubits: usize) -> Self {
        Self { n_qubits, x: 0, z: 0 }
    }

    /// Builds a word from `(qubit, factor)` pairs; absent qubits are identity.
    pub fn new(n_qubits: usize, factors: &[(usize, Pauli)]) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooLargeForDense(n_qubits, MAX_QUBITS));
        }
        let mut word = Self::identity(n_qubits);
        for &(q, p) in factors {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
            let bit = 1u64 << q;
            if (word.x | word.z) & bit != 0 {
                return Err(Error::DuplicateQubit(q));
            }
            match p {
                Pauli::X => word.x |= bit,
                Pauli::Y => {
                    word.x |= bit;
                    word.z |= bit;
                }
                Pauli::Z => word.z |= bit,
            }
        }
        Ok(word)
    }

    pub(crate) fn from_masks(n_qubits: usize, x: u64, z: u64) -> Self {
        Self { n_qubits, x, z }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Qubits flipped by the word (X or Y factors).
    pub fn x_mask(&self) -> u64 {
        self.x
    }

    /// Qubits contributing a sign (Y or Z factors).
    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn factor(&self, qubit: usize) -> Option<Pauli> {
        let bit = 1u64 << qubit;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => None,
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
        }
    }

    pub fn factors(&self) -> Vec<(usize, Pauli)> {
        (0..self.n_qubits)
            .filter_map(|q| self.factor(q).map(|p| (q, p)))
            .collect()
    }

    /// `i^{#Y}`: the constant phase of the word acting on a basis state.
    pub fn phase(&self) -> Complex64 {
        match self.y_count() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Product `self * other` as `(phase, word)`.
    pub fn mul(&self, other: &PauliWord) -> (Complex64, PauliWord) {
        // Each word is i^{y} X^x Z^z; moving Z^{z1} past X^{x2} costs (-1)^{|z1 & x2|}.
        let sign = if (self.z & other.x).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let y_in = self.y_count() + other.y_count();
        let y_out = (x & z).count_ones();
        // i^{y_in} X^x Z^z = i^{y_in - y_out} (i^{y_out} X^x Z^z)
        let k = (4 + (y_in % 4) as i32 - (y_out % 4) as i32) % 4;
        let phase = match k {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        };
        (phase, PauliWord::from_masks(self.n_qubits, x, z))
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for (q, p) in self.factors() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{}{}", p.letter(), q)?;
            first = false;
        }
        Ok(())
    }
}

/// Parses `I` or a space-separated sequence of `X<k>`/`Y<k>`/`Z<k>` tokens with
/// strictly increasing qubit indices.
pub fn parse_word(text: &str, n_qubits: usize) -> std::result::Result<PauliWord, String> {
    let text = text.trim();
    if text == "I" {
        return Ok(PauliWord::identity(n_qubits));
    }
    let mut factors = Vec::new();
    let mut last: Option<usize> = None;
    for tok in text.split_whitespace() {
        let mut chars = tok.chars();
        let p = match chars.next() {
            Some('X') => Pauli::X,
            Some('Y') => Pauli::Y,
            Some('Z') => Pauli::Z,
            _ => return Err(format!("invalid Pauli token `{tok}`")),
        };
        let q: usize = chars
            .as_str()
            .parse()
            .map_err(|_| format!("invalid qubit index in `{tok}`"))?;
        if let Some(prev) = last {
            if q == prev {
                return Err(format!("duplicate qubit {q} in word"));
            }
            if q < prev {
                return Err(format!("qubit indices not strictly increasing at `{tok}`"));
            }
        }
        last = Some(q);
        factors.push((q, p));
    }
    if factors.is_empty() {
        return Err("empty Pauli word".into());
    }
    PauliWord::new(n_qubits, &factors).map_err(|e| e.to_string())
}

/// Complex-weighted sum of Pauli words, kept in canonical (sorted, merged) form.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<(u64, u64), Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_term(Complex64::new(1.0, 0.0), PauliWord::identity(n_qubits));
        s
    }

    pub fn from_word(coeff: Complex64, word: PauliWord) -> Self {
        let mut s = Self::zero(word.n_qubits());
        s.add_term(coeff, word);
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn add_term(&mut self, coeff: Complex64, word: PauliWord) {
        let e = self
            .terms
            .entry((word.x_mask(), word.z_mask()))
            .or_insert(Complex64::new(0.0, 0.0));
        *e += coeff;
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        self.add_scaled(other, Complex64::new(1.0, 0.0))
    }

    pub fn add_scaled(&self, other: &PauliSum, scale: Complex64) -> PauliSum {
        let mut out = self.clone();
        for (w, c) in other.iter() {
            out.add_term(c * scale, w);
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= factor;
        }
        out
    }

    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        let mut out = PauliSum::zero(self.n_qubits);
        for (w1, c1) in self.iter() {
            for (w2, c2) in other.iter() {
                let (phase, w) = w1.mul(&w2);
                out.add_term(c1 * c2 * phase, w);
            }
        }
        out
    }

    /// Drops terms with modulus at or below `tol`.
    pub fn simplify(&self, tol: f64) -> PauliSum {
        let mut out = self.clone();
        out.terms.retain(|_, c| c.norm() > tol);
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (PauliWord, Complex64)> + '_ {
        self.terms
            .iter()
            .map(|(&(x, z), &c)| (PauliWord::from_masks(self.n_qubits, x, z), c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Real coefficients, if every imaginary part is below `tol`.
    pub fn real_terms(&self, tol: f64) -> Option<Vec<(f64, PauliWord)>> {
        self.iter()
            .map(|(w, c)| (c.im.abs() <= tol).then_some((c.re, w)))
            .collect()
    }
}
