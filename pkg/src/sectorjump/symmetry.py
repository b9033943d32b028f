"""Abelian weak symmetries: declared specs, sector decompositions, shifts.

A declared symmetry is either a unitary U (finite or compact group element)
or a Hermitian generator S of a continuous family exp(i*phi*S).  Sectors are
its eigenspaces; sector labels are unit-modulus eigenvalues e^{i*phi_k}
(unitary kind) or real eigenvalues s_k (generator kind).  The induced
superoperator on density matrices has eigenvalues indexed by ordered sector
pairs (k, l): the ratio e^{i(phi_k - phi_l)} or the gap s_k - s_l.  Distinct
pairs sharing a ratio/gap are grouped into a single SuperShift; the
SuperShift values are exactly the possible "shifts" a weakly symmetric jump
operator can carry.

Eigenvalue and ratio clustering is single-linkage with a per-spec tolerance.
A gap falling inside (tol, 10*tol) means the split is not trustworthy and
raises ClusterAmbiguity rather than guessing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    ClusterAmbiguity,
    DimensionMismatch,
    NotCommuting,
    NotHermitian,
    NotUnitary,
)
from .opcore import (
    as_operator,
    hermitian_eig,
    is_hermitian,
    is_unitary,
    phase_distance,
    unitary_eig,
    wrap_phase,
)

__all__ = [
    "SymmetrySpec",
    "AbelianGroupSpec",
    "Sector",
    "SuperShift",
    "SectorDecomposition",
    "decompose",
    "joint_decompose",
    "conjugate",
    "weak_symmetry_residual",
    "members_of",
    "label_distance",
    "ratio_value",
    "apply_shift",
    "is_symmetric_value",
]

UNITARY = "unitary"
GENERATOR = "generator"


@dataclass(frozen=True, eq=False)
class SymmetrySpec:
    """One declared symmetry: a unitary or the Hermitian generator of a
    continuous one."""

    kind: str
    op: np.ndarray
    tol_cluster: float = 1e-8

    def __post_init__(self):
        if self.kind not in (UNITARY, GENERATOR):
            raise DimensionMismatch(f"unknown symmetry kind {self.kind!r}")
        object.__setattr__(self, "op", as_operator(self.op))
        if self.tol_cluster <= 0.0:
            raise DimensionMismatch("tol_cluster must be positive")
        if self.kind == UNITARY and not is_unitary(self.op):
            raise NotUnitary("symmetry operator is not unitary to 1e-10")
        if self.kind == GENERATOR and not is_hermitian(self.op):
            raise NotHermitian("symmetry generator is not Hermitian to 1e-10")

    @property
    def dim(self) -> int:
        return self.op.shape[0]


@dataclass(frozen=True, eq=False)
class AbelianGroupSpec:
    """Several commuting symmetry specs treated jointly."""

    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise DimensionMismatch("group needs at least one member")
        dim = members[0].dim
        for m in members:
            if m.dim != dim:
                raise DimensionMismatch("group members act on different spaces")
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                comm = a.op @ b.op - b.op @ a.op
                scale = np.linalg.norm(a.op) * np.linalg.norm(b.op)
                if np.linalg.norm(comm) > 1e-10 * max(scale, 1.0):
                    raise NotCommuting(
                        "declared symmetries do not commute "
                        f"(residual {np.linalg.norm(comm) / max(scale, 1.0):.2e})"
                    )

    @property
    def dim(self) -> int:
        return self.members[0].dim


def members_of(spec_or_group):
    """Uniform view of a single spec or a group as a tuple of members."""
    if isinstance(spec_or_group, AbelianGroupSpec):
        return spec_or_group.members
    return (spec_or_group,)


# ---- label algebra ----------------------------------------------------------
#
# Labels and shift values are scalars for a single declared symmetry and
# tuples (one component per group member) for joint decompositions.  The
# helpers below always work on tuples internally.

def _as_tuple(x):
    return x if isinstance(x, tuple) else (x,)


def _from_tuple(t):
    return t[0] if len(t) == 1 else t


def _component_distance(a, b, kind) -> float:
    if kind == UNITARY:
        return phase_distance(np.angle(a), np.angle(b))
    return abs(float(np.real(a)) - float(np.real(b)))


def label_distance(a, b, kinds) -> float:
    """Max over components of the circular/linear label distance."""
    ta, tb = _as_tuple(a), _as_tuple(b)
    return max(_component_distance(x, y, k) for x, y, k in zip(ta, tb, kinds))


def ratio_value(label_k, label_l, kinds):
    """Shift value carried by an operator mapping sector l into sector k."""
    out = []
    for a, b, kind in zip(_as_tuple(label_k), _as_tuple(label_l), kinds):
        if kind == UNITARY:
            r = a * np.conj(b)
            out.append(r / abs(r))
        else:
            out.append(float(np.real(a) - np.real(b)))
    return _from_tuple(tuple(out))


def apply_shift(label, shift, kinds):
    """Label of the sector reached from `label` under a jump with `shift`."""
    out = []
    for a, s, kind in zip(_as_tuple(label), _as_tuple(shift), kinds):
        if kind == UNITARY:
            r = s * a
            out.append(r / abs(r))
        else:
            out.append(float(np.real(a) + np.real(s)))
    return _from_tuple(tuple(out))


def is_symmetric_value(value, kinds, tol=1e-8) -> bool:
    """True when the shift is the trivial one (ratio 1, gap 0)."""
    for v, kind in zip(_as_tuple(value), kinds):
        if kind == UNITARY:
            if phase_distance(np.angle(v), 0.0) > tol:
                return False
        elif abs(float(np.real(v))) > tol:
            return False
    return True


# ---- clustering -------------------------------------------------------------

def _cluster_tuples(values, kinds, tols):
    """Single-linkage clustering of label/ratio tuples.

    Two tuples link when every component distance is within the member
    tolerance.  Any pair that neither links nor is separated by at least
    10x the tolerance in some component raises ClusterAmbiguity.

    Returns a list of index lists, one per cluster (input order preserved
    within each cluster).
    """
    n = len(values)
    if n == 0:
        return []
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            dists = [
                _component_distance(a, b, k)
                for a, b, k in zip(values[i], values[j], kinds)
            ]
            close = all(d <= t for d, t in zip(dists, tols))
            far = any(d >= 10.0 * t for d, t in zip(dists, tols))
            if close:
                parent[find(i)] = find(j)
            elif not far:
                raise ClusterAmbiguity(
                    "eigenvalue gap falls in the ambiguous band "
                    f"(distances {dists}, tolerances {list(tols)})"
                )
    clusters = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(i)
    return list(clusters.values())


def _cluster_mean(values, kind):
    """Representative value of a cluster: circular mean of phases for the
    unitary kind, arithmetic mean for the generator kind."""
    if kind == UNITARY:
        z = np.sum([v / abs(v) for v in values], axis=0)
        return np.exp(1j * wrap_phase(np.angle(z)))
    return float(np.mean([np.real(v) for v in values]))


def _sort_key(label_tuple, kinds):
    key = []
    for v, kind in zip(label_tuple, kinds):
        key.append(wrap_phase(np.angle(v)) if kind == UNITARY else float(np.real(v)))
    return tuple(key)


# ---- decomposition types ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class Sector:
    """One symmetry eigenspace: label, orthonormal basis columns, index."""

    index: int
    label: object
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True, eq=False)
class SuperShift:
    """One induced superoperator eigenvalue with every ordered sector pair
    (k, l) that realizes it."""

    value: object
    pairs: tuple


@dataclass(frozen=True, eq=False)
class SectorDecomposition:
    """Full sector split of the Hilbert space under one or more commuting
    symmetries, plus the induced SuperShift structure."""

    sectors: tuple
    kinds: tuple
    tols: tuple
    change_of_basis: np.ndarray
    super_shifts: tuple

    @property
    def dim(self) -> int:
        return self.change_of_basis.shape[0]

    @property
    def n_sectors(self) -> int:
        return len(self.sectors)

    @property
    def tol(self) -> float:
        return max(self.tols)

    @cached_property
    def offsets(self):
        """Column offset of each sector inside change_of_basis."""
        dims = [s.dim for s in self.sectors]
        return tuple(int(x) for x in np.concatenate([[0], np.cumsum(dims)[:-1]]))

    def projector(self, k: int) -> np.ndarray:
        b = self.sectors[k].basis
        return b @ b.conj().T

    @cached_property
    def pair_shift_index(self):
        """Map (k, l) -> index into super_shifts."""
        out = {}
        for idx, shift in enumerate(self.super_shifts):
            for pair in shift.pairs:
                out[pair] = idx
        return out

    @cached_property
    def symmetric_index(self) -> int:
        for idx, shift in enumerate(self.super_shifts):
            if is_symmetric_value(shift.value, self.kinds, self.tol):
                return idx
        raise DimensionMismatch("no symmetric SuperShift found")

    def shift_index_of(self, value):
        """Index of the SuperShift matching `value`, or None."""
        for idx, shift in enumerate(self.super_shifts):
            if label_distance(shift.value, value, self.kinds) <= self.tol:
                return idx
        return None

    def target_sector(self, l: int, shift_value):
        """Sector reached from sector l by a jump carrying `shift_value`,
        or None when the shifted label leaves the spectrum."""
        want = apply_shift(self.sectors[l].label, shift_value, self.kinds)
        for k, sec in enumerate(self.sectors):
            if label_distance(sec.label, want, self.kinds) <= self.tol:
                return k
        return None


# ---- construction -----------------------------------------------------------

def _eig_for_kind(op, kind):
    if kind == UNITARY:
        phases, v = unitary_eig(op)
        return [np.exp(1j * p) for p in phases], v
    w, v = hermitian_eig(op)
    return [float(x) for x in w], v


def _refine(bases_labels, spec):
    """Split each (label_tuple, basis) pair by the eigenspaces of one more
    commuting spec restricted to it."""
    out = []
    op = spec.op
    for label_tuple, basis in bases_labels:
        restricted = basis.conj().T @ op @ basis
        # invariance of the subspace under the new member is what makes the
        # restriction meaningful; a failure here means the declared members
        # do not actually commute at tolerance
        inv = np.linalg.norm(op @ basis - basis @ restricted)
        if inv > 1e-8 * max(np.linalg.norm(op), 1.0):
            raise NotCommuting(
                f"sector not invariant under group member (residual {inv:.2e})"
            )
        evals, vecs = _eig_for_kind(restricted, spec.kind)
        clusters = _cluster_tuples(
            [(v,) for v in evals], (spec.kind,), (spec.tol_cluster,)
        )
        subs = []
        for idx_list in clusters:
            sub_label = _cluster_mean([evals[i] for i in idx_list], spec.kind)
            sub_basis = basis @ vecs[:, idx_list]
            subs.append((label_tuple + (sub_label,), sub_basis))
        subs.sort(key=lambda t: _sort_key(t[0][-1:], (spec.kind,)))
        out.extend(subs)
    return out


def _build_decomposition(bases_labels, kinds, tols):
    bases_labels = sorted(bases_labels, key=lambda t: _sort_key(t[0], kinds))
    sectors = tuple(
        Sector(index=i, label=_from_tuple(lbl), basis=np.ascontiguousarray(basis))
        for i, (lbl, basis) in enumerate(bases_labels)
    )
    change_of_basis = np.hstack([s.basis for s in sectors])

    # every ordered sector pair carries a ratio/gap tuple; identical values
    # merge into one SuperShift
    m = len(sectors)
    pair_list = [(k, l) for k in range(m) for l in range(m)]
    ratios = [
        _as_tuple(ratio_value(sectors[k].label, sectors[l].label, kinds))
        for (k, l) in pair_list
    ]
    clusters = _cluster_tuples(ratios, kinds, tols)
    shifts = []
    for idx_list in clusters:
        value = tuple(
            _cluster_mean([ratios[i][c] for i in idx_list], kinds[c])
            for c in range(len(kinds))
        )
        pairs = tuple(sorted(pair_list[i] for i in idx_list))
        shifts.append(SuperShift(value=_from_tuple(value), pairs=pairs))
    shifts.sort(key=lambda s: _sort_key(_as_tuple(s.value), kinds))

    return SectorDecomposition(
        sectors=sectors,
        kinds=tuple(kinds),
        tols=tuple(tols),
        change_of_basis=change_of_basis,
        super_shifts=tuple(shifts),
    )


def decompose(spec: SymmetrySpec) -> SectorDecomposition:
    """Sector decomposition of a single declared symmetry.

    Sectors are ordered by ascending eigenphase (unitary kind) or ascending
    eigenvalue (generator kind); SuperShifts by the same key on their values.
    """
    evals, vecs = _eig_for_kind(spec.op, spec.kind)
    clusters = _cluster_tuples([(v,) for v in evals], (spec.kind,), (spec.tol_cluster,))
    bases_labels = []
    for idx_list in clusters:
        label = _cluster_mean([evals[i] for i in idx_list], spec.kind)
        bases_labels.append(((label,), vecs[:, idx_list]))
    return _build_decomposition(bases_labels, (spec.kind,), (spec.tol_cluster,))


def joint_decompose(group) -> SectorDecomposition:
    """Simultaneous sector decomposition of several commuting symmetries.

    Labels become tuples with one component per member, ordered
    lexicographically; refinement diagonalizes each member restricted to the
    sectors found so far.
    """
    group = group if isinstance(group, AbelianGroupSpec) else AbelianGroupSpec(tuple(group))
    first = group.members[0]
    evals, vecs = _eig_for_kind(first.op, first.kind)
    clusters = _cluster_tuples(
        [(v,) for v in evals], (first.kind,), (first.tol_cluster,)
    )
    bases_labels = []
    for idx_list in clusters:
        label = _cluster_mean([evals[i] for i in idx_list], first.kind)
        bases_labels.append(((label,), vecs[:, idx_list]))
    for member in group.members[1:]:
        bases_labels = _refine(bases_labels, member)
    kinds = tuple(m.kind for m in group.members)
    tols = tuple(m.tol_cluster for m in group.members)
    return _build_decomposition(bases_labels, kinds, tols)


# ---- conjugation and residual ------------------------------------------------

def conjugate(spec: SymmetrySpec, a) -> np.ndarray:
    """Symmetry action on an operator: U a U^dag, or [S, a] for a generator."""
    a = as_operator(a)
    if a.shape != spec.op.shape:
        raise DimensionMismatch("operator and symmetry act on different spaces")
    if spec.kind == UNITARY:
        return spec.op @ a @ spec.op.conj().T
    return spec.op @ a - a @ spec.op


def weak_symmetry_residual(rep, spec_or_group) -> float:
    """Relative commutator norm between the vectorized generator and the
    symmetry superoperator; max over group members.  Zero generator gives 0.
    """
    from .liouville import build_dense, symmetry_superoperator_matrix

    lmat = build_dense(rep)
    den = np.linalg.norm(lmat)
    if den == 0.0:
        return 0.0
    out = 0.0
    for member in members_of(spec_or_group):
        sbar = symmetry_superoperator_matrix(member)
        if sbar.shape != lmat.shape:
            raise DimensionMismatch("symmetry and generator dimensions differ")
        out = max(out, np.linalg.norm(sbar @ lmat - lmat @ sbar) / den)
    return float(out)
