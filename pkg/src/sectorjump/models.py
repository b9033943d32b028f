"""Model builders: translation-invariant dissipative chains and spin models.

Chains are 1-D with periodic boundaries.  Sites are 0-indexed; the product
basis orders site 0 as the most significant digit, matching chained
np.kron.  The translation operator T cyclically shifts site contents to the
right, so conjugation by T moves a site-j operator to site j+1 and T^N = 1.

Uniform on-site dissipation makes translation a weak symmetry; the Fourier
(plane-wave) recombination of the site jumps produces one eigenmatrix of
T-conjugation per momentum, tagged with shift e^{i 2 pi k / N}.  Spin models
use S_alpha = sigma_alpha / 2 so that ladder recombinations (J_x +- i J_y)
carry total-S_z commutator shifts of exactly +-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundViolated,
    DimCapExceeded,
    DimensionMismatch,
    NonUniform,
    NotHermitian,
    SchemaError,
)
from .opcore import SIGMA_X, SIGMA_Y, SIGMA_Z, as_operator, wrap_phase
from .representation import LindbladRep, WeaklySymmetricRep
from .symmetry import GENERATOR, UNITARY, SymmetrySpec

__all__ = [
    "DIM_CAP",
    "ChainSpec",
    "SpinModelSpec",
    "MomentumBasis",
    "SparsityReport",
    "site_operator",
    "translation_operator",
    "build_chain",
    "plane_wave_jumps",
    "momentum_basis",
    "sparsity_census",
    "total_sz",
    "build_spin_model",
    "ladder_jumps",
]

DIM_CAP = 4096

SPIN_X = SIGMA_X / 2.0
SPIN_Y = SIGMA_Y / 2.0
SPIN_Z = SIGMA_Z / 2.0


# ---- specs ---------------------------------------------------------------------

@dataclass(frozen=True)
class ChainSpec:
    """Periodic chain of identical sites.

    local_hamiltonian_terms: each term is a tuple of single-site operators
    placed on consecutive sites; the full Hamiltonian sums the term over all
    N periodic placements.  local_jumps: (operator, type label, rate), one
    dissipator of that type per site.
    """

    n_sites: int
    local_dim: int
    local_hamiltonian_terms: tuple = ()
    local_jumps: tuple = ()

    def __post_init__(self):
        if self.n_sites < 1:
            raise DimensionMismatch(f"n_sites={self.n_sites} < 1")
        if self.local_dim < 1:
            raise DimensionMismatch(f"local_dim={self.local_dim} < 1")
        terms = []
        for term in self.local_hamiltonian_terms:
            ops = tuple(as_operator(op) for op in term)
            for op in ops:
                if op.shape[0] != self.local_dim:
                    raise DimensionMismatch("term operator is not site-local")
            if not ops or len(ops) > self.n_sites:
                raise DimensionMismatch("term spans more sites than the chain")
            terms.append(ops)
        jumps = []
        for op, label, rate in self.local_jumps:
            op = as_operator(op)
            if op.shape[0] != self.local_dim:
                raise DimensionMismatch("jump operator is not site-local")
            if rate < 0.0:
                raise SchemaError([f"jump '{label}' has negative rate {rate}"])
            jumps.append((op, str(label), float(rate)))
        object.__setattr__(self, "local_hamiltonian_terms", tuple(terms))
        object.__setattr__(self, "local_jumps", tuple(jumps))

    @property
    def dim(self) -> int:
        return self.local_dim ** self.n_sites


@dataclass(frozen=True)
class SpinModelSpec:
    """Spin-1/2 model with Heisenberg couplings and local depolarization.

    H = sum_{j<k} V[j,k] S_j.S_k + sum W[(j,k,l,m)] (S_j.S_k)(S_l.S_m);
    site j carries depolarizing jumps sqrt(rate_j) S_alpha for alpha=x,y,z.
    """

    n_spins: int
    couplings_v: np.ndarray = None
    couplings_w: tuple = ()
    rates: tuple = None

    def __post_init__(self):
        n = self.n_spins
        if n < 1:
            raise DimensionMismatch(f"n_spins={n} < 1")
        v = self.couplings_v
        v = np.zeros((n, n)) if v is None else np.asarray(v, dtype=float)
        if v.shape != (n, n):
            raise DimensionMismatch(f"couplings_v shape {v.shape} != ({n}, {n})")
        if np.abs(v - v.T).max() > 1e-12 * max(np.abs(v).max(), 1.0):
            raise NotHermitian("couplings_v must be symmetric")
        w_terms = []
        for j, k, l, m, w in self.couplings_w:
            for site in (j, k, l, m):
                if not (0 <= site < n):
                    raise DimensionMismatch(f"coupling site {site} out of range")
            w_terms.append((int(j), int(k), int(l), int(m), float(w)))
        rates = self.rates
        rates = tuple(1.0 for _ in range(n)) if rates is None else tuple(
            float(r) for r in rates
        )
        if len(rates) != n:
            raise DimensionMismatch("one depolarization rate per spin required")
        if any(r < 0.0 for r in rates):
            raise SchemaError(["depolarization rates must be nonnegative"])
        object.__setattr__(self, "couplings_v", v)
        object.__setattr__(self, "couplings_w", tuple(w_terms))
        object.__setattr__(self, "rates", rates)

    @property
    def dim(self) -> int:
        return 2 ** self.n_spins


@dataclass(frozen=True)
class MomentumBasis:
    """Translation-eigenstate basis from plane-wave superpositions.

    Product states fall into cycles under translation; a cycle of length
    ell (a divisor of N) whose lexicographically smallest label is the
    representative contributes ell columns with eigenphases 2 pi m / ell.
    momentum_indices holds the lifted index k = m N / ell in 0..N-1.
    """

    n_sites: int
    local_dim: int
    representatives: tuple
    cycle_lengths: tuple
    momentum_indices: tuple
    phases: tuple
    columns: np.ndarray


@dataclass(frozen=True)
class SparsityReport:
    max_nonzeros: int
    bound: int
    per_column: tuple
    threshold: float

    @property
    def ok(self) -> bool:
        return self.max_nonzeros <= self.bound


# ---- chain construction -----------------------------------------------------------

def site_operator(op, site: int, n_sites: int, local_dim: int) -> np.ndarray:
    """Embed a site-local operator at the given site of the chain."""
    op = as_operator(op)
    out = np.eye(1, dtype=complex)
    for s in range(n_sites):
        out = np.kron(out, op if s == site else np.eye(local_dim))
    return out


def _placed_term(ops, start: int, n_sites: int, local_dim: int) -> np.ndarray:
    out = np.eye(local_dim ** n_sites, dtype=complex)
    for offset, op in enumerate(ops):
        out = out @ site_operator(op, (start + offset) % n_sites, n_sites,
                                  local_dim)
    return out


def translation_operator(n_sites: int, local_dim: int) -> np.ndarray:
    """Permutation matrix cycling site contents one step to the right."""
    dim = local_dim ** n_sites
    t = np.zeros((dim, dim), dtype=complex)
    for old in range(dim):
        digits = []
        rem = old
        for _ in range(n_sites):
            digits.append(rem % local_dim)
            rem //= local_dim
        digits.reverse()  # site 0 first
        rotated = [digits[-1]] + digits[:-1]
        new = 0
        for a in rotated:
            new = new * local_dim + a
        t[new, old] = 1.0
    return t


def _check_cap(dim: int, dim_cap: int):
    if dim > dim_cap:
        raise DimCapExceeded(f"dimension {dim} exceeds cap {dim_cap}")


def build_chain(spec: ChainSpec, dim_cap: int = DIM_CAP):
    """Assemble the chain representation and its translation symmetry."""
    _check_cap(spec.dim, dim_cap)
    n, d = spec.n_sites, spec.local_dim
    ham = np.zeros((spec.dim, spec.dim), dtype=complex)
    for ops in spec.local_hamiltonian_terms:
        for j in range(n):
            ham += _placed_term(ops, j, n, d)
    ham = 0.5 * (ham + ham.conj().T)
    jumps = []
    for op, _label, rate in spec.local_jumps:
        scaled = math.sqrt(rate) * op
        for j in range(n):
            jumps.append(site_operator(scaled, j, n, d))
    rep = LindbladRep(hamiltonian=ham, jumps=tuple(jumps))
    translation = SymmetrySpec(kind=UNITARY, op=translation_operator(n, d))
    return rep, translation


def plane_wave_jumps(rep: LindbladRep, n_sites: int) -> WeaklySymmetricRep:
    """Fourier-recombine uniform site jumps into translation eigenmatrices.

    Jumps must come in groups of n_sites site translates (as produced by
    build_chain).  Group g yields jumps
    J_k = N^{-1/2} sum_j e^{-i j 2 pi k / N} J_{g,j} for k = 1..N, each
    satisfying T J_k T^dag = e^{i 2 pi k / N} J_k.
    """
    n = int(n_sites)
    if n < 1:
        raise DimensionMismatch(f"n_sites={n} < 1")
    dim = rep.hamiltonian.shape[0]
    d = round(dim ** (1.0 / n))
    if d ** n != dim:
        raise DimensionMismatch(f"dimension {dim} is not a {n}-site product")
    if len(rep.jumps) % n != 0:
        raise NonUniform("jump count is not a multiple of the site count")
    tmat = translation_operator(n, d)
    for g in range(len(rep.jumps) // n):
        group = rep.jumps[g * n: (g + 1) * n]
        scale = max(max(np.linalg.norm(j) for j in group), 1e-300)
        for j in range(1, n):
            moved = tmat @ group[j - 1] @ tmat.conj().T
            if np.linalg.norm(group[j] - moved) > 1e-10 * scale:
                raise NonUniform(
                    f"jump group {g} is not a family of site translates"
                )
    new_jumps = []
    shifts = []
    root = 2.0 * np.pi / n
    for g in range(len(rep.jumps) // n):
        group = rep.jumps[g * n: (g + 1) * n]
        for k in range(1, n + 1):
            acc = np.zeros((dim, dim), dtype=complex)
            for j, jop in enumerate(group):
                acc += np.exp(-1j * j * root * k) * jop
            new_jumps.append(acc / math.sqrt(n))
            shifts.append(np.exp(1j * root * k))
    return WeaklySymmetricRep(
        hamiltonian=rep.hamiltonian,
        jumps=tuple(new_jumps),
        shifts=tuple(shifts),
        kinds=(UNITARY,),
        provenance="model",
    )


# ---- momentum basis ------------------------------------------------------------------

def _label_of(index: int, n: int, d: int) -> tuple:
    digits = []
    rem = index
    for _ in range(n):
        digits.append(rem % d)
        rem //= d
    return tuple(reversed(digits))


def _index_of(label, d: int) -> int:
    out = 0
    for a in label:
        out = out * d + a
    return out


def _rotate(label) -> tuple:
    return (label[-1],) + tuple(label[:-1])


def momentum_basis(n_sites: int, local_dim: int,
                   dim_cap: int = DIM_CAP) -> MomentumBasis:
    """Enumerate translation cycles and emit their plane-wave columns."""
    n, d = int(n_sites), int(local_dim)
    dim = d ** n
    _check_cap(dim, dim_cap)
    seen = set()
    reps = []
    lengths = []
    momenta = []
    phases = []
    columns = []
    for index in range(dim):
        label = _label_of(index, n, d)
        if label in seen:
            continue
        cycle = [label]
        cur = _rotate(label)
        while cur != label:
            cycle.append(cur)
            cur = _rotate(cur)
        ell = len(cycle)
        representative = min(cycle)
        for member in cycle:
            seen.add(member)
        indices = [_index_of(member, d) for member in cycle]
        for m in range(ell):
            col = np.zeros(dim, dtype=complex)
            for t, idx in enumerate(indices):
                col[idx] = np.exp(-2j * np.pi * m * t / ell)
            col /= math.sqrt(ell)
            reps.append(representative)
            lengths.append(ell)
            momenta.append(m * (n // ell))
            phases.append(float(wrap_phase(2.0 * np.pi * m / ell)))
            columns.append(col)
    return MomentumBasis(
        n_sites=n,
        local_dim=d,
        representatives=tuple(reps),
        cycle_lengths=tuple(lengths),
        momentum_indices=tuple(momenta),
        phases=tuple(phases),
        columns=np.column_stack(columns),
    )


def sparsity_census(op, bound: int, threshold: float = 1e-12) -> SparsityReport:
    """Count nonzeros per column and enforce the given bound."""
    op = as_operator(op)
    per_column = tuple(
        int(c) for c in np.count_nonzero(np.abs(op) > threshold, axis=0)
    )
    worst = max(per_column) if per_column else 0
    report = SparsityReport(
        max_nonzeros=worst, bound=int(bound), per_column=per_column,
        threshold=float(threshold),
    )
    if not report.ok:
        raise BoundViolated(
            f"column sparsity {worst} exceeds the bound {bound}"
        )
    return report


# ---- spin models ----------------------------------------------------------------------

def total_sz(n_spins: int) -> np.ndarray:
    """Total S_z = sum_j sigma_z^(j) / 2."""
    return sum(
        site_operator(SPIN_Z, j, n_spins, 2) for j in range(n_spins)
    )


def _dot_product(j: int, k: int, n: int) -> np.ndarray:
    out = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for local in (SPIN_X, SPIN_Y, SPIN_Z):
        out += site_operator(local, j, n, 2) @ site_operator(local, k, n, 2)
    return out


def build_spin_model(spec: SpinModelSpec, dim_cap: int = DIM_CAP):
    """Assemble the spin representation and the total-S_z generator."""
    _check_cap(spec.dim, dim_cap)
    n = spec.n_spins
    ham = np.zeros((spec.dim, spec.dim), dtype=complex)
    for j in range(n):
        for k in range(j + 1, n):
            if spec.couplings_v[j, k] != 0.0:
                ham += spec.couplings_v[j, k] * _dot_product(j, k, n)
    for j, k, l, m, w in spec.couplings_w:
        if w != 0.0:
            ham += w * (_dot_product(j, k, n) @ _dot_product(l, m, n))
    ham = 0.5 * (ham + ham.conj().T)
    jumps = []
    for j in range(n):
        rate = spec.rates[j]
        if rate == 0.0:
            continue
        for local in (SPIN_X, SPIN_Y, SPIN_Z):
            jumps.append(math.sqrt(rate) * site_operator(local, j, n, 2))
    rep = LindbladRep(hamiltonian=ham, jumps=tuple(jumps))
    s_z = SymmetrySpec(kind=GENERATOR, op=total_sz(n))
    return rep, s_z


def ladder_jumps(rep: LindbladRep) -> WeaklySymmetricRep:
    """Recombine depolarization triples (J_x, J_y, J_z) into ladder jumps.

    Each triple becomes J_+ = (J_x + i J_y)/sqrt(2) with shift +1,
    J_- = (J_x - i J_y)/sqrt(2) with shift -1, and J_z with shift 0; the
    2x2 recombination is unitary so the generator is unchanged.
    """
    if len(rep.jumps) % 3 != 0:
        raise DimensionMismatch("jumps are not site depolarization triples")
    new_jumps = []
    shifts = []
    for g in range(len(rep.jumps) // 3):
        jx, jy, jz = rep.jumps[3 * g: 3 * g + 3]
        norms = [np.linalg.norm(j) for j in (jx, jy, jz)]
        if max(norms) - min(norms) > 1e-10 * max(max(norms), 1e-300):
            raise DimensionMismatch(
                f"triple {g} does not look like uniform depolarization"
            )
        new_jumps.append((jx + 1j * jy) / math.sqrt(2.0))
        shifts.append(1.0)
        new_jumps.append((jx - 1j * jy) / math.sqrt(2.0))
        shifts.append(-1.0)
        new_jumps.append(jz)
        shifts.append(0.0)
    return WeaklySymmetricRep(
        hamiltonian=rep.hamiltonian,
        jumps=tuple(new_jumps),
        shifts=tuple(shifts),
        kinds=(GENERATOR,),
        provenance="model",
    )
