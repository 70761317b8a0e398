//! Explicit matrices for small registers, built from Kronecker products.
//! Used as diagnostics and as reference oracles; never on the optimisation path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::{Pauli, PauliSum, PauliWord};

/// Largest register for which dense diagnostics are built.
pub const DENSE_LIMIT: usize = 8;

fn single(p: Option<Pauli>) -> DMatrix<Complex64> {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let data = match p {
        None => [l, o, o, l],
        Some(Pauli::X) => [o, l, l, o],
        Some(Pauli::Y) => [o, i, -i, o],
        Some(Pauli::Z) => [l, o, o, -l],
    };
    // column-major: Y = [[0, -i], [i, 0]]
    DMatrix::from_column_slice(2, 2, &data)
}

/// `P_{n-1} (x) ... (x) P_0`, so that qubit 0 is the least-significant index bit.
pub fn word_matrix(word: &PauliWord) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for q in (0..word.n_qubits()).rev() {
        m = m.kronecker(&single(word.factor(q)));
    }
    m
}

pub fn pauli_sum_matrix(sum: &PauliSum) -> Result<DMatrix<Complex64>> {
    let n = sum.n_qubits();
    if n > DENSE_LIMIT {
        return Err(Error::TooLargeForDense(n, DENSE_LIMIT));
    }
    let dim = 1 << n;
    let mut m = DMatrix::zeros(dim, dim);
    for (w, c) in sum.iter() {
        m += word_matrix(&w) * c;
    }
    Ok(m)
}

pub fn hamiltonian_matrix(h: &Hamiltonian) -> Result<DMatrix<Complex64>> {
    pauli_sum_matrix(&h.to_pauli_sum())
}

pub fn column(amps: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(amps)
}

pub fn identity(n_qubits: usize) -> DMatrix<Complex64> {
    DMatrix::identity(1 << n_qubits, 1 << n_qubits)
}

/// Largest entry modulus.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Connected components of the nonzero pattern of a square matrix.
fn blocks(m: &DMatrix<Complex64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for c in 0..n {
        for r in 0..c {
            if m[(r, c)] != Complex64::new(0.0, 0.0) || m[(c, r)] != Complex64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for i in 0..n {
        groups.entry(find(&mut parent, i)).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Eigenpairs of a Hermitian matrix, one connected block at a time.
fn eigh(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = m.nrows();
    let mut values = vec![0.0; n];
    let mut vectors = DMatrix::zeros(n, n);
    for idx in blocks(m) {
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
        let eig = sub.symmetric_eigen();
        for (k, &col) in idx.iter().enumerate() {
            values[col] = eig.eigenvalues[k];
            for (r, &row) in idx.iter().enumerate() {
                vectors[(row, col)] = eig.eigenvectors[(r, k)];
            }
        }
    }
    (values, vectors)
}

/// `exp(-i theta G)` for Hermitian `G` via its eigendecomposition.
pub fn expm_hermitian(g: &DMatrix<Complex64>, theta: f64) -> DMatrix<Complex64> {
    let (values, v) = eigh(g);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&l| Complex64::from_polar(1.0, -theta * l)),
    ));
    &v * d * v.adjoint()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev = eigh(m).0;
    ev.sort_by(f64::total_cmp);
    ev
}
