"""Lindblad representations and their weakly symmetric forms.

A LindbladRep is the raw (H, {J_j}) pair.  A WeaklySymmetricRep is an
equivalent pair generating the same master equation in which H is symmetric
and every jump is an eigenmatrix of the symmetry action, tagged with its
shift (the superoperator eigenvalue it carries).  Two constructions are
provided:

* projected_weak_rep splits each jump across the SuperShifts of a sector
  decomposition, J_{j,delta} = sum_{(k,l): ratio=delta} P_k J_j P_l, and
  projects the Hamiltonian onto its sector-diagonal part.  Jump count grows
  to at most n * (number of shifts).

* minimal_weak_rep first removes jump traces (compensating the Hamiltonian),
  orthogonalizes the traceless jumps through their Gram matrix, and then
  diagonalizes the symmetry's action matrix on the surviving jump span,
  block by block in rate-degeneracy groups.  The result has the smallest
  possible number of jumps and each carries a definite shift.

The gauge freedom connecting equivalent weakly symmetric forms (isometric
mixing within shift classes, identity offsets on symmetric jumps, global
energy shift) is exposed through apply_gauge, and certify checks any claimed
weakly symmetric form against the original representation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllRatesZero,
    DimensionMismatch,
    HermiticityViolation,
    MixesShiftClasses,
    NotCertified,
    NotHermitian,
    NotWeaklySymmetric,
    ShiftOnAsymmetricJump,
    UnitarityViolation,
)
from .liouville import build_dense
from .opcore import (
    as_operator,
    frobenius_inner,
    hermitian_eig,
    is_hermitian,
    unitary_eig,
    wrap_phase,
)
from .symmetry import (
    GENERATOR,
    UNITARY,
    AbelianGroupSpec,
    SectorDecomposition,
    SymmetrySpec,
    _as_tuple,
    _cluster_mean,
    _cluster_tuples,
    _from_tuple,
    _sort_key,
    conjugate,
    decompose,
    is_symmetric_value,
    joint_decompose,
    label_distance,
    members_of,
    weak_symmetry_residual,
)

__all__ = [
    "LindbladRep",
    "WeaklySymmetricRep",
    "GramData",
    "ActionMatrix",
    "GaugeTransform",
    "CertificateReport",
    "make_traceless",
    "gram_orthogonalize",
    "action_matrix",
    "minimal_weak_rep",
    "projected_weak_rep",
    "effective_hamiltonian",
    "apply_gauge",
    "certify",
    "specs_from_decomposition",
]


@dataclass(frozen=True, eq=False)
class LindbladRep:
    """Raw master-equation data: Hermitian H and a list of jump operators."""

    hamiltonian: np.ndarray
    jumps: tuple

    def __post_init__(self):
        ham = as_operator(self.hamiltonian)
        if not is_hermitian(ham):
            raise NotHermitian("Hamiltonian is not Hermitian to 1e-10")
        jumps = tuple(as_operator(j) for j in self.jumps)
        for j in jumps:
            if j.shape != ham.shape:
                raise DimensionMismatch("jump and Hamiltonian dimensions differ")
        object.__setattr__(self, "hamiltonian", ham)
        object.__setattr__(self, "jumps", jumps)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


_PROVENANCES = ("projected", "minimal", "gauge", "model")


@dataclass(frozen=True, eq=False)
class WeaklySymmetricRep:
    """Weakly symmetric (H, jumps) with one shift tag per jump.

    `kinds` records the declared symmetry kinds so shift values (scalars for
    one symmetry, tuples for a group) can be compared without the spec.
    """

    hamiltonian: np.ndarray
    jumps: tuple
    shifts: tuple
    kinds: tuple
    provenance: str

    def __post_init__(self):
        ham = as_operator(self.hamiltonian)
        if not is_hermitian(ham):
            raise NotHermitian("Hamiltonian is not Hermitian to 1e-10")
        jumps = tuple(as_operator(j) for j in self.jumps)
        for j in jumps:
            if j.shape != ham.shape:
                raise DimensionMismatch("jump and Hamiltonian dimensions differ")
        if len(jumps) != len(self.shifts):
            raise DimensionMismatch("need exactly one shift tag per jump")
        if self.provenance not in _PROVENANCES:
            raise DimensionMismatch(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "hamiltonian", ham)
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "shifts", tuple(self.shifts))
        object.__setattr__(self, "kinds", tuple(self.kinds))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def effective_hamiltonian(rep) -> np.ndarray:
    """Non-Hermitian H_eff = H - (i/2) sum_j J_j^dag J_j."""
    ham = as_operator(rep.hamiltonian)
    out = ham.astype(complex)
    for j in rep.jumps:
        j = as_operator(j)
        out = out - 0.5j * (j.conj().T @ j)
    return out


# ---- traceless shift ---------------------------------------------------------

def make_traceless(rep) -> LindbladRep:
    """Remove jump traces without changing the generator.

    Each jump is shifted by its normalized trace, J' = J - (Tr J / dim) 1,
    and the Hamiltonian absorbs the compensation
    H' = H + (i/2) sum_j [ tr(J_j)* J_j - tr(J_j) J_j^dag ]  with
    tr = Tr / dim; the identity offsets commute through the dissipator into
    a Hamiltonian term, so the vectorized generator is unchanged.
    """
    ham = as_operator(rep.hamiltonian).astype(complex)
    dim = ham.shape[0]
    jumps = []
    for j in rep.jumps:
        j = as_operator(j)
        tr = np.trace(j) / dim
        jumps.append(j - tr * np.eye(dim))
        ham = ham + 0.5j * (np.conj(tr) * j - tr * j.conj().T)
    return LindbladRep(hamiltonian=ham, jumps=tuple(jumps))


# ---- Gram orthogonalization ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class GramData:
    """Gram matrix of traceless jumps with its eigendecomposition.

    rates are the Gram eigenvalues in descending order; combinations the
    matching orthonormal eigenvector columns; ortho_jumps the first n_min
    recombined jumps J''_j = sum_k (c_j)_k J'_k whose rates exceed the
    cutoff, so Tr(J''_j^dag J''_k) = rates[j] delta_jk.
    """

    c_matrix: np.ndarray
    rates: np.ndarray
    combinations: np.ndarray
    n_min: int
    ortho_jumps: tuple


def gram_orthogonalize(jumps, rate_cutoff: float = 1e-12,
                       require_jumps: bool = False) -> GramData:
    """Orthogonalize jumps through their Frobenius Gram matrix.

    rate_cutoff is relative to the largest rate; eigenvalues at or below
    rate_cutoff * max(rates) are dropped.  With require_jumps=True an empty
    result raises AllRatesZero instead of returning n_min = 0 (purely
    Hamiltonian dynamics).
    """
    jumps = [as_operator(j) for j in jumps]
    n = len(jumps)
    if n == 0:
        if require_jumps:
            raise AllRatesZero("no jump operators given")
        return GramData(
            c_matrix=np.zeros((0, 0), dtype=complex),
            rates=np.zeros(0),
            combinations=np.zeros((0, 0), dtype=complex),
            n_min=0,
            ortho_jumps=(),
        )
    cmat = np.empty((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            cmat[a, b] = frobenius_inner(jumps[a], jumps[b])
    rates, combos = hermitian_eig(cmat)  # descending
    top = float(rates[0]) if n else 0.0
    if top <= 0.0:
        n_min = 0
    else:
        n_min = int(np.sum(rates > rate_cutoff * top))
    if n_min == 0 and require_jumps:
        raise AllRatesZero("all Gram eigenvalues fell below the rate cutoff")
    ortho = []
    for j in range(n_min):
        op = np.zeros_like(jumps[0])
        for k in range(n):
            op = op + combos[k, j] * jumps[k]
        ortho.append(op)
    return GramData(
        c_matrix=cmat,
        rates=np.maximum(rates, 0.0),
        combinations=combos,
        n_min=n_min,
        ortho_jumps=tuple(ortho),
    )


# ---- action matrix --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ActionMatrix:
    """Matrix of the symmetry action on the orthogonalized jump span.

    entries[j, k] = rates[j]^-1 Tr( J''_j^dag  conj(spec, J''_k) ); unitary
    for a unitary spec, Hermitian for a generator, and block diagonal in the
    rate-degeneracy groups listed in rate_groups.
    """

    kind: str
    entries: np.ndarray
    rate_groups: tuple


def _rate_groups(rates, rel_tol: float = 1e-8):
    """Contiguous groups of (near-)equal rates, descending order preserved."""
    n = len(rates)
    if n == 0:
        return ()
    tol = rel_tol * max(float(rates[0]), 1e-300)
    clusters = _cluster_tuples([(float(r),) for r in rates], (GENERATOR,), (tol,))
    groups = [tuple(sorted(c)) for c in clusters]
    groups.sort(key=lambda g: g[0])
    return tuple(groups)


def action_matrix(gram: GramData, spec: SymmetrySpec) -> ActionMatrix:
    """Symmetry action on the span of the orthogonalized jumps."""
    n = gram.n_min
    ortho = gram.ortho_jumps
    rates = gram.rates[:n]
    entries = np.empty((n, n), dtype=complex)
    for k in range(n):
        acted = conjugate(spec, ortho[k])
        for j in range(n):
            entries[j, k] = frobenius_inner(ortho[j], acted) / rates[j]
    if spec.kind == UNITARY:
        dev = np.linalg.norm(entries.conj().T @ entries - np.eye(n))
        if dev > 1e-6:
            raise UnitarityViolation(
                f"action matrix deviates from unitarity by {dev:.2e}; "
                "the generator is unlikely to be weakly symmetric"
            )
    else:
        dev = np.linalg.norm(entries - entries.conj().T)
        if dev > 1e-6:
            raise HermiticityViolation(
                f"action matrix deviates from Hermiticity by {dev:.2e}"
            )
    return ActionMatrix(
        kind=spec.kind, entries=entries, rate_groups=_rate_groups(rates)
    )


# ---- minimal construction --------------------------------------------------------

def _eig_action_block(block, kind):
    """Eigendecomposition of an action-matrix block, tolerant of the small
    non-normality left over from rate clustering."""
    if kind == UNITARY:
        phases, vecs = unitary_eig(block, tol=1e-6)
        return [np.exp(1j * p) for p in phases], vecs
    vals, vecs = hermitian_eig(block, tol=1e-6)
    return [float(v) for v in vals], vecs


def _simultaneous_diag(blocks, specs):
    """Joint eigenbasis of commuting action-matrix blocks.

    Diagonalizes the first block, then recursively diagonalizes each later
    block restricted to the degenerate eigenspaces found so far; ties are
    broken by descending eigenvalue, then input order.  Returns a list of
    (column vector, label tuple) pairs.
    """
    g = blocks[0].shape[0]
    subspaces = [(np.eye(g, dtype=complex), ())]
    for block, spec in zip(blocks, specs):
        new = []
        for basis, labels in subspaces:
            restricted = basis.conj().T @ block @ basis
            evals, vecs = _eig_action_block(restricted, spec.kind)
            clusters = _cluster_tuples(
                [(v,) for v in evals], (spec.kind,), (spec.tol_cluster,)
            )
            subs = []
            for idx in clusters:
                lbl = _cluster_mean([evals[i] for i in idx], spec.kind)
                subs.append((basis @ vecs[:, list(idx)], labels + (lbl,)))
            subs.sort(
                key=lambda t: _sort_key(t[1][-1:], (spec.kind,)), reverse=True
            )
            new.extend(subs)
        subspaces = new
    out = []
    for basis, labels in subspaces:
        for c in range(basis.shape[1]):
            out.append((basis[:, c].copy(), labels))
    return out


def minimal_weak_rep(rep, spec_or_group, rate_cutoff: float = 1e-12) -> WeaklySymmetricRep:
    """Weakly symmetric representation with the minimal number of jumps.

    Pipeline: traceless shift -> Gram orthogonalization -> one action matrix
    per symmetry member -> joint diagonalization inside each rate-degeneracy
    group.  Jump order in the result: descending rate group, ascending shift
    (phase for unitary members, gap for generators), input order on ties.
    Shift tags are snapped onto the decomposition's SuperShift values.
    """
    residual = weak_symmetry_residual(rep, spec_or_group)
    if residual > 1e-8:
        raise NotWeaklySymmetric(
            f"generator fails weak symmetry (residual {residual:.2e})"
        )
    specs = members_of(spec_or_group)
    dec = (
        joint_decompose(spec_or_group)
        if isinstance(spec_or_group, AbelianGroupSpec)
        else decompose(spec_or_group)
    )
    kinds = tuple(s.kind for s in specs)

    shifted = make_traceless(rep)
    gram = gram_orthogonalize(shifted.jumps, rate_cutoff=rate_cutoff)
    rates = gram.rates[: gram.n_min]
    mats = [action_matrix(gram, s) for s in specs]
    groups = _rate_groups(rates) if gram.n_min else ()

    jumps = []
    tags = []
    for grp in groups:
        idx = np.array(grp, dtype=int)
        blocks = [m.entries[np.ix_(idx, idx)] for m in mats]
        pieces = _simultaneous_diag(blocks, specs)
        # within a rate group: ascending shift key, stable in input order
        order = sorted(
            range(len(pieces)), key=lambda i: _sort_key(pieces[i][1], kinds)
        )
        for i in order:
            vec, labels = pieces[i]
            op = np.zeros_like(shifted.hamiltonian)
            for c, k in enumerate(idx):
                op = op + vec[c] * gram.ortho_jumps[k]
            sidx = dec.shift_index_of(_from_tuple(labels))
            if sidx is None:
                raise NotCertified(
                    f"action eigenvalue {labels} matches no SuperShift of the spectrum"
                )
            jumps.append(op)
            tags.append(dec.super_shifts[sidx].value)

    wrep = WeaklySymmetricRep(
        hamiltonian=shifted.hamiltonian,
        jumps=tuple(jumps),
        shifts=tuple(tags),
        kinds=kinds,
        provenance="minimal",
    )
    _check_hamiltonian_symmetry(wrep.hamiltonian, specs)
    return wrep


def _check_hamiltonian_symmetry(ham, specs, tol: float = 1e-8):
    scale = max(np.linalg.norm(ham), 1.0)
    for spec in specs:
        acted = conjugate(spec, ham)
        dev = (
            np.linalg.norm(acted - ham)
            if spec.kind == UNITARY
            else np.linalg.norm(acted)
        )
        if dev > tol * scale:
            raise NotCertified(
                f"shifted Hamiltonian fails symmetry (residual {dev / scale:.2e})"
            )


# ---- projected construction -------------------------------------------------------

def specs_from_decomposition(dec: SectorDecomposition):
    """Reconstruct the declared symmetry operators from sector labels."""
    vmat = dec.change_of_basis
    specs = []
    for c, kind in enumerate(dec.kinds):
        diag = np.concatenate(
            [
                np.full(s.dim, _as_tuple(s.label)[c], dtype=complex)
                for s in dec.sectors
            ]
        )
        op = (vmat * diag[None, :]) @ vmat.conj().T
        if kind == GENERATOR:
            op = 0.5 * (op + op.conj().T)
        specs.append(SymmetrySpec(kind=kind, op=op, tol_cluster=dec.tols[c]))
    return tuple(specs)


def projected_weak_rep(rep, dec: SectorDecomposition,
                       prune_norm: float = 1e-12) -> WeaklySymmetricRep:
    """Weakly symmetric representation by sector projection.

    H is replaced by its sector-diagonal part sum_k P_k H P_k and each jump
    splits into one piece per SuperShift, sum_{(k,l) in pairs} P_k J P_l,
    tagged with that shift.  Pieces with Frobenius norm <= prune_norm are
    dropped.  Equality of the generator holds exactly when the input is
    weakly symmetric, which is checked first.
    """
    specs = specs_from_decomposition(dec)
    group = AbelianGroupSpec(specs) if len(specs) > 1 else specs[0]
    residual = weak_symmetry_residual(rep, group)
    if residual > 1e-8:
        raise NotWeaklySymmetric(
            f"generator fails weak symmetry (residual {residual:.2e})"
        )
    ham, jumps = as_operator(rep.hamiltonian), [as_operator(j) for j in rep.jumps]
    projs = [dec.projector(k) for k in range(dec.n_sectors)]
    ham_proj = sum(p @ ham @ p for p in projs)
    ham_proj = 0.5 * (ham_proj + ham_proj.conj().T)

    out_jumps = []
    out_tags = []
    for j in jumps:
        for shift in dec.super_shifts:
            piece = np.zeros_like(j)
            for (k, l) in shift.pairs:
                piece = piece + projs[k] @ j @ projs[l]
            if np.linalg.norm(piece) > prune_norm:
                out_jumps.append(piece)
                out_tags.append(shift.value)
    return WeaklySymmetricRep(
        hamiltonian=ham_proj,
        jumps=tuple(out_jumps),
        shifts=tuple(out_tags),
        kinds=dec.kinds,
        provenance="projected",
    )


# ---- gauge freedom ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GaugeTransform:
    """Equivalence move between weakly symmetric forms.

    isometry V (n' x n, V^dag V = 1) mixes jumps without crossing shift
    classes; symmetric_shifts adds a_j * identity to selected post-mixing
    jumps carrying the trivial shift; energy_shift adds b * identity to H.
    """

    isometry: np.ndarray
    symmetric_shifts: dict = field(default_factory=dict)
    energy_shift: float = 0.0


def apply_gauge(wrep: WeaklySymmetricRep, gauge: GaugeTransform) -> WeaklySymmetricRep:
    """Apply a gauge transform; the generator is left exactly invariant.

    Rows of the isometry may only draw from one shift class each
    (MixesShiftClasses otherwise); identity offsets are only legal on jumps
    with the trivial shift (ShiftOnAsymmetricJump).  All-zero rows would
    produce zero jumps and are pruned.
    """
    vmat = np.asarray(gauge.isometry, dtype=complex)
    n = len(wrep.jumps)
    if vmat.ndim != 2 or vmat.shape[1] != n:
        raise DimensionMismatch(
            f"isometry must have {n} columns, got shape {vmat.shape}"
        )
    dev = np.linalg.norm(vmat.conj().T @ vmat - np.eye(n))
    if dev > 1e-10 * max(1.0, np.sqrt(n)):
        raise UnitarityViolation(f"V^dag V deviates from identity by {dev:.2e}")

    kinds = wrep.kinds
    tol = 1e-8
    new_jumps = []
    new_shifts = []
    for row in range(vmat.shape[0]):
        support = [k for k in range(n) if abs(vmat[row, k]) > 1e-14]
        if not support:
            continue
        shift0 = wrep.shifts[support[0]]
        for k in support[1:]:
            if label_distance(wrep.shifts[k], shift0, kinds) > tol:
                raise MixesShiftClasses(
                    f"isometry row {row} mixes shifts {wrep.shifts[k]} and {shift0}"
                )
        op = np.zeros_like(wrep.jumps[0])
        for k in support:
            op = op + vmat[row, k] * wrep.jumps[k]
        new_jumps.append(op)
        new_shifts.append(shift0)

    ham = wrep.hamiltonian.astype(complex)
    dim = ham.shape[0]
    ham = ham + float(gauge.energy_shift) * np.eye(dim)
    for idx, a in gauge.symmetric_shifts.items():
        if idx < 0 or idx >= len(new_jumps):
            raise DimensionMismatch(f"symmetric shift index {idx} out of range")
        if not is_symmetric_value(new_shifts[idx], kinds, tol):
            raise ShiftOnAsymmetricJump(
                f"jump {idx} carries shift {new_shifts[idx]}, not the trivial one"
            )
        a = complex(a)
        jop = new_jumps[idx]
        ham = ham - 0.5j * (np.conj(a) * jop - a * jop.conj().T)
        new_jumps[idx] = jop + a * np.eye(dim)

    return WeaklySymmetricRep(
        hamiltonian=ham,
        jumps=tuple(new_jumps),
        shifts=tuple(new_shifts),
        kinds=kinds,
        provenance="gauge",
    )


# ---- certification -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CertificateReport:
    """Residuals of a claimed weakly symmetric form.

    All residuals are relative; a form passes when every item is at or
    below `tol`.
    """

    liouvillian_residual: float
    hamiltonian_residual: float
    jump_eigen_residuals: tuple
    support_residuals: tuple
    tol: float = 1e-8

    @property
    def items(self) -> dict:
        return {
            "liouvillian": self.liouvillian_residual,
            "hamiltonian_symmetry": self.hamiltonian_residual,
            "jump_eigenmatrix": max(self.jump_eigen_residuals, default=0.0),
            "sector_support": max(self.support_residuals, default=0.0),
        }

    @property
    def ok(self) -> bool:
        return all(v <= self.tol for v in self.items.values())


def certify(wrep: WeaklySymmetricRep, rep, spec_or_group,
            tol: float = 1e-8) -> CertificateReport:
    """Check a weakly symmetric form against the original representation.

    Reports relative residuals for: equality of the vectorized generators,
    symmetry of the Hamiltonian, the per-jump eigenmatrix equations with the
    tagged shifts, and the per-jump sector-support property.
    """
    specs = members_of(spec_or_group)
    dec = (
        joint_decompose(spec_or_group)
        if isinstance(spec_or_group, AbelianGroupSpec)
        else decompose(spec_or_group)
    )

    l_ref = build_dense(rep)
    l_new = build_dense(wrep)
    den = max(np.linalg.norm(l_ref), 1e-300)
    liou = float(np.linalg.norm(l_new - l_ref) / den)

    ham = wrep.hamiltonian
    hden = max(np.linalg.norm(ham), 1e-300)
    ham_res = 0.0
    for spec in specs:
        acted = conjugate(spec, ham)
        dev = (
            np.linalg.norm(acted - ham)
            if spec.kind == UNITARY
            else np.linalg.norm(acted)
        )
        ham_res = max(ham_res, float(dev / hden))

    jump_res = []
    for jop, tag in zip(wrep.jumps, wrep.shifts):
        jden = max(np.linalg.norm(jop), 1e-300)
        worst = 0.0
        for c, spec in enumerate(specs):
            v = _as_tuple(tag)[c]
            acted = conjugate(spec, jop)
            want = v * jop if spec.kind == UNITARY else float(np.real(v)) * jop
            worst = max(worst, float(np.linalg.norm(acted - want) / jden))
        jump_res.append(worst)

    vmat = dec.change_of_basis
    off = dec.offsets
    dims = [s.dim for s in dec.sectors]
    support_res = []
    for jop, tag in zip(wrep.jumps, wrep.shifts):
        jrot = vmat.conj().T @ jop @ vmat
        jden = max(np.linalg.norm(jrot), 1e-300)
        sidx = dec.shift_index_of(tag)
        allowed = set(dec.super_shifts[sidx].pairs) if sidx is not None else set()
        bad = 0.0
        for k in range(dec.n_sectors):
            for l in range(dec.n_sectors):
                if (k, l) not in allowed:
                    blk = jrot[off[k]: off[k] + dims[k], off[l]: off[l] + dims[l]]
                    bad += np.linalg.norm(blk) ** 2
        support_res.append(float(np.sqrt(bad) / jden))

    return CertificateReport(
        liouvillian_residual=liou,
        hamiltonian_residual=ham_res,
        jump_eigen_residuals=tuple(jump_res),
        support_residuals=tuple(support_res),
        tol=tol,
    )
