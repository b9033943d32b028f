"""Vectorized generators: dense form, block form, propagation, steady state.

Density matrices are vectorized row-major: entry (k, l) of rho sits at flat
index k*dim + l, so vec(A rho B) = (A kron B^T) vec(rho).  In that convention
the master equation

    d rho / dt = -i[H, rho] + sum_j ( J rho J^dag - {J^dag J, rho}/2 )

vectorizes to

    Lbar = -i H kron 1 + i 1 kron H* + sum_j [ J kron J*
            - (J^dag J kron 1)/2 - (1 kron J^T J*)/2 ].

For a weakly symmetric representation the generator never couples sector
pairs with different shift values, so in the symmetry eigenbasis Lbar is
block diagonal with one block per SuperShift.  build_blocks assembles those
blocks directly from the sector-restricted pieces of the representation and
never touches matrix elements between different SuperShifts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateSteadyState,
    DimensionMismatch,
    NegativeTime,
    NotCertified,
)
from .opcore import as_operator
from .symmetry import (
    GENERATOR,
    UNITARY,
    SectorDecomposition,
    label_distance,
    ratio_value,
)

__all__ = [
    "vectorize",
    "devectorize",
    "build_dense",
    "symmetry_superoperator_matrix",
    "BlockLiouvillian",
    "build_blocks",
    "assemble_dense",
    "propagate",
    "steady_state",
    "SteadyStateReport",
    "rep_ops",
]

# side length above which propagation switches from full expm to fixed-step
# RK4 with ||L|| h <= 0.1
_EXPM_SIDE_LIMIT = 4096


def rep_ops(rep):
    """Hamiltonian and jump list of any representation-like object."""
    if hasattr(rep, "hamiltonian"):
        return as_operator(rep.hamiltonian), [as_operator(j) for j in rep.jumps]
    ham, jumps = rep
    return as_operator(ham), [as_operator(j) for j in jumps]


def vectorize(rho) -> np.ndarray:
    rho = as_operator(rho)
    return rho.reshape(-1).copy()


def devectorize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    d = math.isqrt(v.size)
    if d * d != v.size:
        raise DimensionMismatch(f"length {v.size} is not a perfect square")
    return v.reshape(d, d).copy()


def build_dense(rep) -> np.ndarray:
    """Dense vectorized generator of a representation."""
    ham, jumps = rep_ops(rep)
    d = ham.shape[0]
    eye = np.eye(d, dtype=complex)
    lmat = -1j * np.kron(ham, eye) + 1j * np.kron(eye, ham.conj())
    for jop in jumps:
        if jop.shape != ham.shape:
            raise DimensionMismatch("jump and Hamiltonian dimensions differ")
        jdj = jop.conj().T @ jop
        lmat += np.kron(jop, jop.conj())
        lmat -= 0.5 * np.kron(jdj, eye)
        lmat -= 0.5 * np.kron(eye, jdj.conj())
    return lmat


def symmetry_superoperator_matrix(spec) -> np.ndarray:
    """Vectorized symmetry action: U kron U* or S kron 1 - 1 kron S*."""
    op = spec.op
    eye = np.eye(op.shape[0], dtype=complex)
    if spec.kind == UNITARY:
        return np.kron(op, op.conj())
    return np.kron(op, eye) - np.kron(eye, op.conj())


# ---- block form --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BlockLiouvillian:
    """Generator stored as one dense block per SuperShift.

    flat_indices[s] lists the flat Liouville indices (in the symmetry
    eigenbasis) of block s's coordinates, in block-internal order; pair
    blocks follow the SuperShift's pair list, row-major inside each pair.
    """

    decomposition: SectorDecomposition
    blocks: tuple
    flat_indices: tuple
    pair_offsets: tuple

    @property
    def dim(self) -> int:
        return self.decomposition.dim

    @cached_property
    def total_norm(self) -> float:
        return float(
            np.sqrt(sum(np.linalg.norm(b) ** 2 for b in self.blocks))
        )


def _pair_flat(dec, k, l):
    """Flat eigenbasis Liouville indices of the (k, l) pair subspace."""
    dim = dec.dim
    off = dec.offsets
    dk = dec.sectors[k].dim
    dl = dec.sectors[l].dim
    rows = off[k] + np.arange(dk)
    cols = off[l] + np.arange(dl)
    return (rows[:, None] * dim + cols[None, :]).reshape(-1)


def build_blocks(wrep, dec: SectorDecomposition, tol: float = 1e-8) -> BlockLiouvillian:
    """Assemble the SuperShift blocks of a weakly symmetric representation.

    The representation must carry shift tags that match the decomposition's
    SuperShift values, its Hamiltonian must be sector diagonal and each jump
    supported only on the sector pairs of its shift; violations raise
    NotCertified since block assembly would silently drop matrix elements
    otherwise.
    """
    ham, jumps = rep_ops(wrep)
    shifts = tuple(wrep.shifts)
    if len(shifts) != len(jumps):
        raise DimensionMismatch("each jump needs exactly one shift tag")
    if ham.shape[0] != dec.dim:
        raise DimensionMismatch("representation and decomposition dimensions differ")

    vmat = dec.change_of_basis
    ham_rot = vmat.conj().T @ ham @ vmat
    jrots = [vmat.conj().T @ j @ vmat for j in jumps]
    off = dec.offsets
    dims = [s.dim for s in dec.sectors]
    m = dec.n_sectors

    def sblock(mat, k, l):
        return mat[off[k]: off[k] + dims[k], off[l]: off[l] + dims[l]]

    # certification-lite: sector-diagonal Hamiltonian, tagged support
    hscale = max(np.linalg.norm(ham_rot), 1.0)
    for k in range(m):
        for l in range(m):
            if k != l and np.linalg.norm(sblock(ham_rot, k, l)) > tol * hscale:
                raise NotCertified("Hamiltonian couples different sectors")
    tagged_pairs = []
    for j, (jrot, tag) in enumerate(zip(jrots, shifts)):
        sidx = dec.shift_index_of(tag)
        if sidx is None:
            raise NotCertified(f"jump {j} shift tag matches no SuperShift")
        allowed = set(dec.super_shifts[sidx].pairs)
        jscale = max(np.linalg.norm(jrot), 1.0)
        bad = 0.0
        for k in range(m):
            for l in range(m):
                if (k, l) not in allowed:
                    bad += np.linalg.norm(sblock(jrot, k, l)) ** 2
        if np.sqrt(bad) > tol * jscale:
            raise NotCertified(
                f"jump {j} has support outside its shift's sector pairs"
            )
        tagged_pairs.append(sidx)

    heff_rot = ham_rot - 0.5j * sum(
        (jr.conj().T @ jr for jr in jrots), np.zeros_like(ham_rot)
    )

    kinds = dec.kinds
    labels = [s.label for s in dec.sectors]
    blocks = []
    flat_lists = []
    offsets_per_shift = []
    for shift in dec.super_shifts:
        pairs = shift.pairs
        pair_off = {}
        pos = 0
        for (k, l) in pairs:
            pair_off[(k, l)] = pos
            pos += dims[k] * dims[l]
        bmat = np.zeros((pos, pos), dtype=complex)
        for (k2, l2) in pairs:
            r2 = pair_off[(k2, l2)]
            for (k, l) in pairs:
                c = pair_off[(k, l)]
                ratio = ratio_value(labels[k2], labels[k], kinds)
                piece = np.zeros((dims[k2] * dims[l2], dims[k] * dims[l]), dtype=complex)
                for j, jrot in enumerate(jrots):
                    if label_distance(shifts[j], ratio, kinds) <= dec.tol:
                        piece += np.kron(
                            sblock(jrot, k2, k), sblock(jrot, l2, l).conj()
                        )
                if (k2, l2) == (k, l):
                    piece += -1j * np.kron(
                        sblock(heff_rot, k, k), np.eye(dims[l], dtype=complex)
                    )
                    piece += 1j * np.kron(
                        np.eye(dims[k], dtype=complex), sblock(heff_rot, l, l).conj()
                    )
                bmat[r2: r2 + dims[k2] * dims[l2], c: c + dims[k] * dims[l]] = piece
        blocks.append(bmat)
        flat_lists.append(np.concatenate([_pair_flat(dec, k, l) for (k, l) in pairs]))
        offsets_per_shift.append(pair_off)

    return BlockLiouvillian(
        decomposition=dec,
        blocks=tuple(blocks),
        flat_indices=tuple(flat_lists),
        pair_offsets=tuple(offsets_per_shift),
    )


def assemble_dense(bl: BlockLiouvillian) -> np.ndarray:
    """Scatter the blocks back into the full dense generator (original basis)."""
    dim = bl.dim
    l_eig = np.zeros((dim * dim, dim * dim), dtype=complex)
    for bmat, flat in zip(bl.blocks, bl.flat_indices):
        l_eig[np.ix_(flat, flat)] = bmat
    vmat = bl.decomposition.change_of_basis
    wmat = np.kron(vmat, vmat.conj())
    return wmat @ l_eig @ wmat.conj().T


# ---- propagation ---------------------------------------------------------------

def _propagate_vector(mat, vec, t):
    """exp(t*mat) @ vec, by full expm for small sides and fixed-step RK4
    (||mat|| h <= 0.1) above the side limit."""
    side = mat.shape[0]
    if side <= _EXPM_SIDE_LIMIT:
        return scipy.linalg.expm(t * mat) @ vec
    scale = np.linalg.norm(mat)
    n_steps = max(1, int(math.ceil(scale * t / 0.1)))
    h = t / n_steps
    y = vec.astype(complex)
    for _ in range(n_steps):
        k1 = mat @ y
        k2 = mat @ (y + 0.5 * h * k1)
        k3 = mat @ (y + 0.5 * h * k2)
        k4 = mat @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def propagate(generator, rho0, t: float) -> np.ndarray:
    """Evolve a density matrix for time t >= 0 under a dense generator or a
    BlockLiouvillian (each block propagated independently)."""
    if t < 0.0:
        raise NegativeTime(f"propagation time {t} < 0")
    rho0 = as_operator(rho0)
    if isinstance(generator, BlockLiouvillian):
        dec = generator.decomposition
        if rho0.shape[0] != dec.dim:
            raise DimensionMismatch("state and generator dimensions differ")
        vmat = dec.change_of_basis
        vec_eig = (vmat.conj().T @ rho0 @ vmat).reshape(-1)
        out = np.zeros_like(vec_eig)
        for bmat, flat in zip(generator.blocks, generator.flat_indices):
            out[flat] = _propagate_vector(bmat, vec_eig[flat], t)
        rho_eig = out.reshape(rho0.shape)
        return vmat @ rho_eig @ vmat.conj().T
    lmat = np.asarray(generator, dtype=complex)
    if lmat.shape[0] != rho0.size:
        raise DimensionMismatch("generator side must equal dim^2")
    return devectorize(_propagate_vector(lmat, vectorize(rho0), t))


# ---- steady state ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SteadyStateReport:
    """Stationary state with its full-generator residual and the kernel
    multiplicity of the symmetric block."""

    state: np.ndarray
    residual: float
    null_multiplicity: int


def steady_state(bl: BlockLiouvillian) -> SteadyStateReport:
    """Stationary state from the symmetric SuperShift block.

    Takes the eigenvector of the symmetric block with eigenvalue nearest 0,
    normalizes its trace to 1 and reports the residual of the full generator
    on it.  More than one eigenvalue within 1e-9 * ||block|| of zero raises
    DegenerateSteadyState carrying the near-null eigenvalues.
    """
    dec = bl.decomposition
    sym = dec.symmetric_index
    bmat = bl.blocks[sym]
    evals, evecs = np.linalg.eig(bmat)
    thresh = 1e-9 * max(np.linalg.norm(bmat), 1e-300)
    null_idx = np.flatnonzero(np.abs(evals) <= thresh)
    if null_idx.size > 1:
        raise DegenerateSteadyState(
            f"symmetric block kernel has dimension {null_idx.size}",
            null_eigenvalues=[complex(evals[i]) for i in null_idx],
        )
    pick = int(np.argmin(np.abs(evals)))
    vec_eig = np.zeros(dec.dim * dec.dim, dtype=complex)
    vec_eig[bl.flat_indices[sym]] = evecs[:, pick]
    rho_eig = vec_eig.reshape(dec.dim, dec.dim)
    vmat = dec.change_of_basis
    rho = vmat @ rho_eig @ vmat.conj().T
    tr = np.trace(rho)
    if abs(tr) < 1e-12 * np.linalg.norm(rho):
        raise DegenerateSteadyState(
            "null vector is traceless; stationary state is not unique",
            null_eigenvalues=[complex(evals[pick])],
        )
    rho = rho / tr
    rho = 0.5 * (rho + rho.conj().T)
    lmat = assemble_dense(bl)
    residual = float(np.linalg.norm(lmat @ rho.reshape(-1)))
    return SteadyStateReport(
        state=rho, residual=residual, null_multiplicity=int(null_idx.size)
    )
