//! Exact ground-state energies used as the reference for every error metric.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixture::Fixture;
use crate::hamiltonian::Hamiltonian;
use crate::state::{apply_hamiltonian, inner, StateVector};

/// Register size limit for [`ground_energy_dense`].
pub const DENSE_QUBIT_LIMIT: usize = 12;
const KRYLOV_CAP: usize = 300;
const MAX_RESTARTS: usize = 50;
const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Dense,
    Iterative,
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub energy: f64,
    pub state: Option<StateVector>,
    pub solver: Solver,
    pub residual: f64,
}

fn residual_norm(h: &Hamiltonian, state: &StateVector, e: f64) -> Result<f64> {
    let hv = apply_hamiltonian(h, state)?;
    Ok(hv
        .iter()
        .zip(state.amplitudes())
        .map(|(a, b)| (a - b * e).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Smallest eigenvalue of the explicit matrix, optionally restricted to the
/// basis states with `sector` set bits (the compression `P H P`).
///
/// The matrix is assembled in its connected blocks (basis states linked by a
/// nonzero element), each diagonalised exactly; the spectrum of the whole
/// matrix is the union of the block spectra.
pub fn ground_energy_dense_sector(h: &Hamiltonian, sector: Option<usize>) -> Result<SpectrumResult> {
    let n = h.n_qubits();
    if n > DENSE_QUBIT_LIMIT {
        return Err(Error::TooLargeForDense(n, DENSE_QUBIT_LIMIT));
    }
    let dim = 1usize << n;
    let mut parent: Vec<usize> = (0..dim).collect();
    let mut entries = Vec::new();
    let keep = |b: usize| sector.map_or(true, |s| b.count_ones() as usize == s);
    h.compiled().for_each_entry(|r, c, w| {
        if w == Complex64::new(0.0, 0.0) || !keep(r) || !keep(c) {
            return;
        }
        entries.push((r, c, w));
        let (a, b) = (find(&mut parent, r), find(&mut parent, c));
        if a != b {
            parent[a] = b;
        }
    });
    let mut blocks: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for b in 0..dim {
        if keep(b) {
            let root = find(&mut parent, b);
            blocks.entry(root).or_default().push(b);
        }
    }
    if blocks.is_empty() {
        return Err(Error::Config(format!("sector {sector:?} is empty for {n} qubits")));
    }
    let mut local = vec![usize::MAX; dim];
    for members in blocks.values() {
        for (i, &b) in members.iter().enumerate() {
            local[b] = i;
        }
    }
    let mut best: Option<(f64, usize, DVector<Complex64>)> = None;
    let mut by_root: std::collections::BTreeMap<usize, Vec<(usize, usize, Complex64)>> = Default::default();
    for (r, c, w) in entries {
        {
            by_root.entry(find(&mut parent, c)).or_default().push((local[r], local[c], w));
        }
    }
    for (root, members) in &blocks {
        let m = members.len();
        let mut mat = DMatrix::<Complex64>::zeros(m, m);
        for &(r, c, w) in by_root.get(root).map(Vec::as_slice).unwrap_or(&[]) {
            mat[(r, c)] += w;
        }
        let eig = mat.symmetric_eigen();
        let (k, &e) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty block");
        if best.as_ref().map_or(true, |b| e < b.0) {
            best = Some((e, *root, eig.eigenvectors.column(k).into_owned()));
        }
    }
    let (energy, root, vec) = best.expect("at least one block");
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for (i, &b) in blocks[&root].iter().enumerate() {
        amps[b] = vec[i];
    }
    let mut state = StateVector::from_amplitudes(n, amps)?;
    state.normalize();
    let residual = residual_norm(h, &state, energy)?;
    Ok(SpectrumResult { energy, state: Some(state), solver: Solver::Dense, residual })
}

/// Smallest eigenvalue over the full space.
pub fn ground_energy_dense(h: &Hamiltonian) -> Result<SpectrumResult> {
    ground_energy_dense_sector(h, None)
}

fn project(v: &mut [Complex64], sector: Option<usize>) {
    if let Some(s) = sector {
        for (b, a) in v.iter_mut().enumerate() {
            if b.count_ones() as usize != s {
                *a = Complex64::new(0.0, 0.0);
            }
        }
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(v: &mut [Complex64], s: f64) {
    for a in v {
        *a *= s;
    }
}

/// Removes the components along `basis` (two passes for stability).
fn orthogonalize(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = inner(q, v);
            for (a, b) in v.iter_mut().zip(q) {
                *a -= c * b;
            }
        }
    }
}

/// Lanczos with full reorthogonalisation and explicit restarts from the Ritz vector.
/// `sector` restricts the search to basis states with that many set bits.
pub fn ground_energy_iterative(h: &Hamiltonian, sector: Option<usize>) -> Result<SpectrumResult> {
    let n = h.n_qubits();
    let dim = 1usize << n;
    let sector_dim = match sector {
        Some(s) => (0..dim).filter(|b| b.count_ones() as usize == s).count(),
        None => dim,
    };
    if sector_dim == 0 {
        return Err(Error::Config(format!("sector {sector:?} is empty for {n} qubits")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut start: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    project(&mut start, sector);
    let mut best_residual = f64::INFINITY;
    let mut iterations = 0;
    let cap = KRYLOV_CAP.min(sector_dim);
    for _ in 0..MAX_RESTARTS {
        let nv = norm(&start);
        scale(&mut start, 1.0 / nv);
        let mut basis: Vec<Vec<Complex64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut ritz: Option<(f64, DVector<f64>)> = None;
        for j in 0..cap {
            iterations += 1;
            let mut w = h.compiled().apply(&basis[j]);
            project(&mut w, sector);
            let a = inner(&basis[j], &w).re;
            alpha.push(a);
            orthogonalize(&mut w, &basis);
            let b = norm(&w);
            let m = alpha.len();
            let check = b < 1e-12 || j + 1 == cap || m % 10 == 0;
            if check {
                let mut t = DMatrix::<f64>::zeros(m, m);
                for i in 0..m {
                    t[(i, i)] = alpha[i];
                    if i + 1 < m {
                        t[(i, i + 1)] = beta[i];
                        t[(i + 1, i)] = beta[i];
                    }
                }
                let eig = t.symmetric_eigen();
                let (k, &e) = eig
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .min_by(|x, y| x.1.total_cmp(y.1))
                    .expect("nonempty tridiagonal");
                let y = eig.eigenvectors.column(k).into_owned();
                let estimate = b * y[m - 1].abs();
                ritz = Some((e, y));
                if estimate < 0.1 * RESIDUAL_TOL || b < 1e-12 {
                    break;
                }
            }
            if b < 1e-12 {
                break;
            }
            beta.push(b);
            scale(&mut w, 1.0 / b);
            basis.push(w);
        }
        let (e, y) = ritz.expect("at least one Ritz pair");
        let mut x = vec![Complex64::new(0.0, 0.0); dim];
        for (coef, q) in y.iter().zip(&basis) {
            for (a, b) in x.iter_mut().zip(q) {
                *a += b * *coef;
            }
        }
        let nx = norm(&x);
        scale(&mut x, 1.0 / nx);
        let state = StateVector::from_amplitudes(n, x.clone())?;
        let mut hx = h.compiled().apply(&x);
        project(&mut hx, sector);
        let rq = inner(&x, &hx).re;
        let residual = hx.iter().zip(&x).map(|(a, b)| (a - b * rq).norm_sqr()).sum::<f64>().sqrt();
        best_residual = best_residual.min(residual);
        if residual < RESIDUAL_TOL {
            return Ok(SpectrumResult { energy: rq, state: Some(state), solver: Solver::Iterative, residual });
        }
        let _ = e;
        start = x;
    }
    Err(Error::LanczosNotConverged { iterations, residual: best_residual })
}

/// `|E - E_FCI|` against the fixture's recorded reference.
pub fn fci_error(energy: f64, fixture: &Fixture) -> Result<f64> {
    Ok((energy - fixture.fci()?).abs())
}
