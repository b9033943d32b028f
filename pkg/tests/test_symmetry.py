"""Sector decompositions, SuperShift bookkeeping, and the weak-symmetry
residual."""

import numpy as np
import pytest

from helpers import SM, SP, SX, SZ, Z2_DIAG, random_weak_model
from sectorjump import (
    AbelianGroupSpec,
    ClusterAmbiguity,
    LindbladRep,
    NotCommuting,
    NotHermitian,
    NotUnitary,
    SymmetrySpec,
    apply_shift,
    conjugate,
    decompose,
    is_symmetric_value,
    joint_decompose,
    label_distance,
    ratio_value,
    weak_symmetry_residual,
)

RNG = np.random.default_rng(40)

SWAP = np.eye(4)[[0, 2, 1, 3]].astype(complex)


def _amplitude_damping():
    return LindbladRep(hamiltonian=SZ / 2.0, jumps=(SM,))


# ---- spec validation -----------------------------------------------------------

def test_spec_rejects_nonunitary():
    with pytest.raises(NotUnitary):
        SymmetrySpec(kind="unitary", op=2.0 * np.eye(2))


def test_spec_rejects_nonhermitian_generator():
    with pytest.raises(NotHermitian):
        SymmetrySpec(kind="generator", op=SM)


def test_group_rejects_noncommuting():
    with pytest.raises(NotCommuting):
        AbelianGroupSpec(
            (
                SymmetrySpec(kind="unitary", op=SZ),
                SymmetrySpec(kind="unitary", op=SX),
            )
        )


# ---- single decompositions --------------------------------------------------------

def test_decompose_z2_diag():
    dec = decompose(SymmetrySpec(kind="unitary", op=Z2_DIAG))
    assert dec.n_sectors == 2
    # ascending eigenphase: +1 (phase 0) before -1 (phase pi)
    assert abs(dec.sectors[0].label - 1.0) < 1e-12
    assert abs(dec.sectors[1].label + 1.0) < 1e-12
    assert dec.sectors[0].dim == 1 and dec.sectors[1].dim == 1
    values = [s.value for s in dec.super_shifts]
    assert abs(values[0] - 1.0) < 1e-12 and abs(values[1] + 1.0) < 1e-12
    assert dec.super_shifts[0].pairs == ((0, 0), (1, 1))
    assert dec.super_shifts[1].pairs == ((0, 1), (1, 0))
    assert dec.symmetric_index == 0


def test_decompose_generator_gaps():
    dec = decompose(SymmetrySpec(kind="generator", op=np.diag([0.5, -0.5])))
    # ascending eigenvalue: -1/2 before +1/2
    assert dec.sectors[0].label == pytest.approx(-0.5)
    assert dec.sectors[1].label == pytest.approx(0.5)
    gaps = [s.value for s in dec.super_shifts]
    assert np.allclose(gaps, [-1.0, 0.0, 1.0])
    assert dec.symmetric_index == 1


def test_decompose_swap_sectors():
    dec = decompose(SymmetrySpec(kind="unitary", op=SWAP))
    assert [s.dim for s in dec.sectors] == [3, 1]
    assert abs(dec.sectors[0].label - 1.0) < 1e-12
    assert abs(dec.sectors[1].label + 1.0) < 1e-12
    assert len(dec.super_shifts) == 2
    # the dim-1 sector is spanned by the singlet
    singlet = (np.eye(4)[1] - np.eye(4)[2]) / np.sqrt(2.0)
    overlap = abs(np.vdot(dec.sectors[1].basis[:, 0], singlet))
    assert abs(overlap - 1.0) < 1e-10


def test_projector_completeness_and_orthogonality():
    rep, spec = random_weak_model(RNG, "z4", 9)
    del rep
    dec = decompose(spec)
    total = sum(dec.projector(k) for k in range(dec.n_sectors))
    assert np.linalg.norm(total - np.eye(dec.dim)) <= 1e-10
    for k in range(dec.n_sectors):
        for l in range(k + 1, dec.n_sectors):
            assert np.linalg.norm(dec.projector(k) @ dec.projector(l)) <= 1e-10
    # eigen-action of the declared unitary on each sector basis
    for sec in dec.sectors:
        dev = np.linalg.norm(spec.op @ sec.basis - sec.label * sec.basis)
        assert dev <= 1e-9


def test_supershift_closure():
    _, spec = random_weak_model(RNG, "u1", 8)
    dec = decompose(spec)
    seen = {}
    for shift in dec.super_shifts:
        for pair in shift.pairs:
            assert pair not in seen
            seen[pair] = shift.value
    assert len(seen) == dec.n_sectors ** 2


def test_cluster_ambiguity_band():
    # gap of 5e-8 sits inside (tol, 10 tol) for the default tol 1e-8
    u = np.diag([1.0, np.exp(5e-8j)])
    with pytest.raises(ClusterAmbiguity):
        decompose(SymmetrySpec(kind="unitary", op=u))


def test_cluster_merges_inside_tol():
    u = np.diag([1.0, np.exp(0.5e-8j)])
    dec = decompose(SymmetrySpec(kind="unitary", op=u))
    assert dec.n_sectors == 1
    assert dec.sectors[0].dim == 2


def test_cluster_splits_outside_band():
    u = np.diag([1.0, np.exp(2e-7j)])
    dec = decompose(SymmetrySpec(kind="unitary", op=u))
    assert dec.n_sectors == 2


# ---- joint decompositions ----------------------------------------------------------

def test_joint_singleton_matches_single():
    group = AbelianGroupSpec((SymmetrySpec(kind="unitary", op=Z2_DIAG),))
    dj = joint_decompose(group)
    ds = decompose(group.members[0])
    assert dj.n_sectors == ds.n_sectors
    for a, b in zip(dj.sectors, ds.sectors):
        # single-member groups keep scalar labels
        assert abs(a.label - b.label) < 1e-12
        assert a.dim == b.dim


def test_joint_swap_and_sz():
    group = AbelianGroupSpec(
        (
            SymmetrySpec(kind="unitary", op=SWAP),
            SymmetrySpec(kind="generator", op=np.diag([1.0, 0.0, 0.0, -1.0])),
        )
    )
    dec = joint_decompose(group)
    labels = [
        (round(float(np.angle(lbl[0])), 6), round(float(np.real(lbl[1])), 6))
        for lbl in (s.label for s in dec.sectors)
    ]
    # lexicographic in (phase, eigenvalue), both ascending
    assert labels == [(0.0, -1.0), (0.0, 0.0), (0.0, 1.0), (round(np.pi, 6), 0.0)]
    assert [s.dim for s in dec.sectors] == [1, 1, 1, 1]
    # the (phase 0, s=0) sector is the symmetric Bell combination
    bell = (np.eye(4)[1] + np.eye(4)[2]) / np.sqrt(2.0)
    assert abs(abs(np.vdot(dec.sectors[1].basis[:, 0], bell)) - 1.0) < 1e-10
    # refinement: every joint basis lies inside one sector of each member
    for sec in dec.sectors:
        for member in group.members:
            mdec = decompose(member)
            leaks = [
                np.linalg.norm(mdec.projector(k) @ sec.basis)
                for k in range(mdec.n_sectors)
            ]
            assert sum(1 for x in leaks if x > 1e-10) == 1


def test_joint_noncommuting_members():
    with pytest.raises(NotCommuting):
        joint_decompose(
            (
                SymmetrySpec(kind="unitary", op=SZ),
                SymmetrySpec(kind="unitary", op=SX),
            )
        )


# ---- label algebra ------------------------------------------------------------------

def test_ratio_and_apply_shift_round_trip():
    dec = decompose(SymmetrySpec(kind="unitary", op=Z2_DIAG))
    for k in range(2):
        for l in range(2):
            value = ratio_value(dec.sectors[k].label, dec.sectors[l].label, dec.kinds)
            moved = apply_shift(dec.sectors[l].label, value, dec.kinds)
            assert label_distance(moved, dec.sectors[k].label, dec.kinds) <= 1e-12
            assert dec.target_sector(l, value) == k


def test_target_sector_outside_spectrum():
    dec = decompose(SymmetrySpec(kind="generator", op=np.diag([0.5, -0.5])))
    # sectors ascend in s: 0 is s=-1/2, 1 is s=+1/2
    assert dec.target_sector(0, 1.0) == 1
    assert dec.target_sector(1, 1.0) is None
    assert dec.target_sector(0, -1.0) is None


def test_is_symmetric_value():
    assert is_symmetric_value(1.0 + 0.0j, ("unitary",))
    assert not is_symmetric_value(-1.0 + 0.0j, ("unitary",))
    assert is_symmetric_value(0.0, ("generator",))
    assert not is_symmetric_value(1.0, ("generator",))


# ---- conjugation and residual --------------------------------------------------------

def test_conjugate_unitary_and_generator():
    uspec = SymmetrySpec(kind="unitary", op=Z2_DIAG)
    assert np.allclose(conjugate(uspec, SM), -SM)
    assert np.allclose(conjugate(uspec, np.eye(2)), np.eye(2))
    # generator action is the commutator: [S, sigma^+] = -sigma^+ here
    gspec = SymmetrySpec(kind="generator", op=np.diag([0.5, -0.5]))
    assert np.allclose(conjugate(gspec, SP), -SP)
    assert np.allclose(conjugate(gspec, SM), SM)
    assert np.allclose(conjugate(gspec, np.eye(2)), np.zeros((2, 2)))


def test_weak_symmetry_residual_values():
    spec = SymmetrySpec(kind="unitary", op=Z2_DIAG)
    assert weak_symmetry_residual(_amplitude_damping(), spec) <= 1e-12
    broken = LindbladRep(hamiltonian=SX, jumps=(SM,))
    assert weak_symmetry_residual(broken, spec) > 0.1
    trivial = SymmetrySpec(kind="unitary", op=np.eye(2))
    assert weak_symmetry_residual(broken, trivial) == 0.0
