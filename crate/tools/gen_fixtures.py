#!/usr/bin/env python3
"""Generate the molecular Hamiltonian fixtures shipped in fixtures/.

Requires pyscf. Each fixture is an STO-3G restricted Hartree-Fock molecular
orbital basis mapped to qubits with the Jordan-Wigner encoding, using the
interleaved spin-orbital convention (qubit 2k = spatial orbital k spin-up,
2k+1 = spin-down). No frozen core and no qubit tapering.

Outputs per fixture:
  <name>.ham   Pauli-sum text file (see README for the format)
  <name>.json  metadata: name, n_qubits, n_electrons, hf_energy, fci_energy,
               sector, geometry

hf_energy and fci_energy come from pyscf (RHF and FCI in the S_z = 0 sector).
The Rust test-suite re-derives both from the qubit Hamiltonian.

Usage: python3 tools/gen_fixtures.py [outdir]
"""

import json
import math
import os
import sys

import numpy as np
from pyscf import ao2mo, fci, gto, scf

ANGSTROM = 1.0


def h2(r):
    return f"H 0 0 0; H 0 0 {r}", 0


def h3p(r):
    # equilateral triangle with side r
    h = r * math.sqrt(3) / 2
    return f"H 0 0 0; H {r} 0 0; H {r / 2} {h} 0", 1


def lih(r):
    return f"Li 0 0 0; H 0 0 {r}", 0


def h2o(r, angle=104.5):
    a = math.radians(angle / 2)
    return (
        f"O 0 0 0; H {r * math.sin(a)} {r * math.cos(a)} 0; "
        f"H {-r * math.sin(a)} {r * math.cos(a)} 0",
        0,
    )


# (name, builder, bond length in angstrom)
FIXTURES = [
    ("h2", h2, 0.742),
    ("h3p", h3p, 0.874),
    ("lih", lih, 1.57),
    ("h2o", h2o, 0.958),
]
for r in (0.5, 1.0, 1.5, 2.0, 2.5):
    FIXTURES.append((f"h2_d{r:.2f}", h2, r))
for r in (0.7, 1.2, 1.6):
    FIXTURES.append((f"h3p_d{r:.2f}", h3p, r))
for r in (1.2, 2.2, 3.0):
    FIXTURES.append((f"lih_d{r:.2f}", lih, r))
for r in (1.4,):
    FIXTURES.append((f"h2o_d{r:.2f}", h2o, r))


# --- minimal Pauli algebra: operator = {(xmask, zmask): coeff} over X^x Z^z


def mul(a, b):
    out = {}
    for (x1, z1), c1 in a.items():
        for (x2, z2), c2 in b.items():
            sign = -1.0 if bin(z1 & x2).count("1") % 2 else 1.0
            key = (x1 ^ x2, z1 ^ z2)
            out[key] = out.get(key, 0.0) + sign * c1 * c2
    return out


def add_into(acc, op, scale):
    for k, v in op.items():
        acc[k] = acc.get(k, 0.0) + scale * v


def ladder(p, create):
    zstr = (1 << p) - 1
    # a^dag = (X + XZ)/2, a = (X - XZ)/2 on qubit p, with Z on all q < p
    s = 1.0 if create else -1.0
    return {(1 << p, zstr): 0.5, (1 << p, zstr | (1 << p)): 0.5 * s}


def to_words(op, n, tol=1e-12):
    words = []
    for (x, z), c in op.items():
        # X^x Z^z -> Pauli word; each XZ on a qubit equals -iY
        ny = bin(x & z).count("1")
        c = c * ((-1j) ** ny)
        if abs(c) < tol:
            continue
        if abs(c.imag) > 1e-10:
            raise RuntimeError(f"non-real coefficient {c}")
        toks = []
        for q in range(n):
            xb, zb = (x >> q) & 1, (z >> q) & 1
            if xb and zb:
                toks.append(f"Y{q}")
            elif xb:
                toks.append(f"X{q}")
            elif zb:
                toks.append(f"Z{q}")
        words.append((c.real, toks))
    words.sort(key=lambda w: (len(w[1]), w[1]))
    return words


def qubit_hamiltonian(mf):
    mol = mf.mol
    c = mf.mo_coeff
    norb = c.shape[1]
    h1 = c.T @ mf.get_hcore() @ c
    eri = ao2mo.restore(1, ao2mo.kernel(mol, c), norb)  # chemist (pq|rs)
    n = 2 * norb
    cre = [ladder(p, True) for p in range(n)]
    ann = [ladder(p, False) for p in range(n)]
    op = {(0, 0): complex(mol.energy_nuc())}
    for P in range(n):
        for Q in range(n):
            if P % 2 != Q % 2:
                continue
            v = h1[P // 2, Q // 2]
            if abs(v) > 1e-14:
                add_into(op, mul(cre[P], ann[Q]), v)
    # 1/2 sum (pr|qs) a+_p a+_q a_s a_r
    pair = {}
    for P in range(n):
        for Q in range(n):
            pair[(P, Q)] = mul(cre[P], cre[Q])
    pair_ann = {}
    for S in range(n):
        for R in range(n):
            pair_ann[(S, R)] = mul(ann[S], ann[R])
    for P in range(n):
        for Q in range(n):
            if P == Q:
                continue
            for R in range(n):
                if R % 2 != P % 2:
                    continue
                for S in range(n):
                    if S % 2 != Q % 2 or R == S:
                        continue
                    v = eri[P // 2, R // 2, Q // 2, S // 2]
                    if abs(v) < 1e-14:
                        continue
                    add_into(op, mul(pair[(P, Q)], pair_ann[(S, R)]), 0.5 * v)
    return to_words(op, n), n


def write_fixture(outdir, name, builder, r):
    atom, charge = builder(r)
    mol = gto.M(atom=atom, basis="sto-3g", charge=charge, unit="Angstrom", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    if not mf.converged:
        raise RuntimeError(f"{name}: RHF did not converge")
    norb = mf.mo_coeff.shape[1]
    ne = mol.nelectron
    cis = fci.FCI(mf)
    cis.conv_tol = 1e-12
    e_fci = cis.kernel()[0]
    words, n = qubit_hamiltonian(mf)
    with open(os.path.join(outdir, f"{name}.ham"), "w") as f:
        f.write(f"# {name}: STO-3G, Jordan-Wigner, interleaved spin orbitals\n")
        f.write(f"# geometry = {r:.4f} angstrom\n")
        f.write(f"# n_qubits = {n}\n")
        f.write(f"# n_electrons = {ne}\n")
        for coeff, toks in words:
            f.write(f"{float(coeff)!r} {' '.join(toks) if toks else 'I'}\n")
    meta = {
        "name": name,
        "n_qubits": n,
        "n_electrons": ne,
        "hf_energy": float(mf.e_tot),
        "fci_energy": float(e_fci),
        "sector": ne,
        "geometry": f"{r:.4f}",
    }
    with open(os.path.join(outdir, f"{name}.json"), "w") as f:
        json.dump(meta, f, indent=2)
        f.write("\n")
    print(f"{name}: {n} qubits, {len(words)} terms, HF {mf.e_tot:.10f}, FCI {e_fci:.10f}")


def main():
    outdir = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "fixtures"
    )
    os.makedirs(outdir, exist_ok=True)
    for name, builder, r in FIXTURES:
        write_fixture(outdir, name, builder, r)


if __name__ == "__main__":
    main()
