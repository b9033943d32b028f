"""Brute-force oracles and random-model builders shared by the test suite.

Everything here is deliberately independent of the library internals: the
master-equation right-hand side is evaluated with direct matrix products and
densified column by column through matrix units (no tensor-product
shortcuts), so agreement with the library is a genuine cross-check rather
than a reimplementation identity.
"""

from __future__ import annotations

import numpy as np

from sectorjump import LindbladRep, SymmetrySpec

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
# lowering operator |0><1| in the convention where index 0 is the sigma_z=+1
# eigenstate and index 1 is the excited state of amplitude damping
SM = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SP = SM.conj().T.copy()
I2 = np.eye(2, dtype=complex)
Z2_DIAG = np.diag([1.0, -1.0]).astype(complex)


# ---- brute-force master-equation oracle -------------------------------------

def master_rhs(ham, jumps, rho):
    """d(rho)/dt evaluated directly: -i[H, rho] + sum_j D_j(rho)."""
    ham = np.asarray(ham, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    out = -1j * (ham @ rho - rho @ ham)
    for j in jumps:
        j = np.asarray(j, dtype=complex)
        jdj = j.conj().T @ j
        out = out + j @ rho @ j.conj().T - 0.5 * (jdj @ rho + rho @ jdj)
    return out


def dense_from_rhs(ham, jumps):
    """Dense generator assembled column by column from matrix units, using
    the global row-major flat index k*dim + l."""
    dim = np.asarray(ham).shape[0]
    out = np.empty((dim * dim, dim * dim), dtype=complex)
    for k in range(dim):
        for l in range(dim):
            unit = np.zeros((dim, dim), dtype=complex)
            unit[k, l] = 1.0
            out[:, k * dim + l] = master_rhs(ham, jumps, unit).reshape(-1)
    return out


def trace_distance(a, b) -> float:
    w = np.linalg.eigvalsh(np.asarray(a) - np.asarray(b))
    return 0.5 * float(np.sum(np.abs(w)))


# ---- random instances --------------------------------------------------------

def random_unitary(rng, n: int) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))[None, :]


def random_hermitian(rng, n: int, scale: float = 1.0) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (z + z.conj().T)


def random_rep(rng, dim: int, n_jumps: int = 2) -> LindbladRep:
    jumps = tuple(
        (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
        / dim
        for _ in range(n_jumps)
    )
    return LindbladRep(hamiltonian=random_hermitian(rng, dim), jumps=jumps)


def _partition(rng, total: int, parts: int) -> list:
    sizes = [1] * parts
    for _ in range(total - parts):
        sizes[int(rng.integers(parts))] += 1
    return sizes


def random_weak_model(rng, kind: str, dim: int, n_jumps: int = 3):
    """Random weakly symmetric model whose jumps straddle shift classes.

    Sector-exact data is laid out in a Haar-random eigenbasis: a
    block-diagonal Hermitian Hamiltonian and one tagged cross-sector jump per
    requested jump, two of which share an exact rate so the degenerate-rate
    paths get exercised.  The tagged jumps are then recombined by a random
    unitary across shift classes; unitary mixing leaves the dissipator
    invariant, so the model stays weakly symmetric while no single jump is an
    eigenmatrix any more.  Returns (rep, spec).
    """
    if kind == "z2":
        labels, sym_kind = [1.0 + 0.0j, -1.0 + 0.0j], "unitary"
    elif kind == "z4":
        labels, sym_kind = [1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j], "unitary"
    elif kind == "u1":
        labels, sym_kind = [0.0, 1.0, 2.0, 3.0], "generator"
    else:
        raise ValueError(f"unknown symmetry kind {kind!r}")
    parts = min(len(labels), dim)
    labels = labels[:parts]
    sizes = _partition(rng, dim, parts)
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    vmat = random_unitary(rng, dim)

    diag = np.concatenate(
        [np.full(s, lab, dtype=complex) for s, lab in zip(sizes, labels)]
    )
    op = (vmat * diag[None, :]) @ vmat.conj().T
    if sym_kind == "generator":
        op = 0.5 * (op + op.conj().T)
    spec = SymmetrySpec(kind=sym_kind, op=op)

    hblk = np.zeros((dim, dim), dtype=complex)
    for k in range(parts):
        sl = slice(offs[k], offs[k + 1])
        hblk[sl, sl] = random_hermitian(rng, sizes[k])
    ham = vmat @ hblk @ vmat.conj().T
    ham = 0.5 * (ham + ham.conj().T)

    # tagged jumps: entries inside one (k, l) sector block each; the first two
    # get the same norm (an exact Gram degeneracy), the rest a separated ladder
    tagged = []
    for idx in range(n_jumps):
        k = int(rng.integers(parts))
        l = int(rng.integers(parts))
        block = rng.standard_normal((sizes[k], sizes[l])) + 1j * rng.standard_normal(
            (sizes[k], sizes[l])
        )
        jop = vmat[:, offs[k]: offs[k + 1]] @ block @ vmat[:, offs[l]: offs[l + 1]].conj().T
        weight = 1.0 if idx < 2 else 1.0 + 0.4 * idx
        tagged.append(weight * jop / np.linalg.norm(jop))
    wmix = random_unitary(rng, n_jumps)
    mixed = []
    for a in range(n_jumps):
        acc = np.zeros((dim, dim), dtype=complex)
        for b in range(n_jumps):
            acc = acc + wmix[a, b] * tagged[b]
        mixed.append(acc)
    return LindbladRep(hamiltonian=ham, jumps=tuple(mixed)), spec


# ---- sector bookkeeping for support checks -----------------------------------

def pair_flat_indices(dec, k: int, l: int) -> np.ndarray:
    """Flat Liouville indices of the (row sector k, column sector l) block in
    the symmetry eigenbasis, recomputed from scratch."""
    dim = dec.dim
    offs = dec.offsets
    dims = [s.dim for s in dec.sectors]
    rows = np.arange(offs[k], offs[k] + dims[k])
    cols = np.arange(offs[l], offs[l] + dims[l])
    return (rows[:, None] * dim + cols[None, :]).reshape(-1)


def shift_class_mask(dec) -> np.ndarray:
    """Boolean mask over the rotated dense generator marking entries that
    connect Liouville coordinates of the same SuperShift class."""
    n2 = dec.dim * dec.dim
    mask = np.zeros((n2, n2), dtype=bool)
    for shift in dec.super_shifts:
        idx = np.concatenate([pair_flat_indices(dec, k, l) for k, l in shift.pairs])
        mask[np.ix_(idx, idx)] = True
    return mask


def rotate_dense(lmat, dec) -> np.ndarray:
    """Express a dense generator in the symmetry eigenbasis."""
    wmat = np.kron(dec.change_of_basis, dec.change_of_basis.conj())
    return wmat.conj().T @ np.asarray(lmat, dtype=complex) @ wmat
