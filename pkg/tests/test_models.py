"""Translation chains, plane-wave jump recombination, the momentum basis,
sparsity checks, and spin models with total-S_z ladder jumps."""

import numpy as np
import pytest

from helpers import I2, SM, SP, SX, SY, SZ
from sectorjump import (
    BoundViolated,
    ChainSpec,
    DimCapExceeded,
    DimensionMismatch,
    LindbladRep,
    NonUniform,
    NotHermitian,
    SchemaError,
    SpinModelSpec,
    build_chain,
    build_dense,
    build_spin_model,
    ladder_jumps,
    momentum_basis,
    plane_wave_jumps,
    site_operator,
    sparsity_census,
    total_sz,
    translation_operator,
    weak_symmetry_residual,
)

RNG = np.random.default_rng(55)


# ---- translation operator ----------------------------------------------------------

def test_translation_single_site_is_identity():
    assert np.array_equal(translation_operator(1, 2), np.eye(2))


def test_translation_two_sites_is_swap():
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.array_equal(translation_operator(2, 2), swap)


def test_translation_order_divides_out():
    t = translation_operator(3, 2)
    assert np.array_equal(np.linalg.matrix_power(t, 3), np.eye(8))
    assert not np.array_equal(np.linalg.matrix_power(t, 2), np.eye(8))


def test_translation_conjugation_moves_sites():
    n = 3
    t = translation_operator(n, 2)
    op = RNG.normal(size=(2, 2)) + 1j * RNG.normal(size=(2, 2))
    for j in range(n):
        lhs = t @ site_operator(op, j, n, 2) @ t.conj().T
        rhs = site_operator(op, (j + 1) % n, n, 2)
        assert np.linalg.norm(lhs - rhs) <= 1e-12


# ---- chain assembly -------------------------------------------------------------------

def test_build_chain_places_jumps_per_site():
    spec = ChainSpec(
        n_sites=2,
        local_dim=2,
        local_hamiltonian_terms=((SZ,),),
        local_jumps=((SM, "down", 0.5),),
    )
    rep, translation = build_chain(spec)
    assert np.allclose(rep.hamiltonian, np.kron(SZ, I2) + np.kron(I2, SZ))
    assert len(rep.jumps) == 2
    root = np.sqrt(0.5)
    assert np.allclose(rep.jumps[0], root * np.kron(SM, I2))
    assert np.allclose(rep.jumps[1], root * np.kron(I2, SM))
    assert weak_symmetry_residual(rep, translation) <= 1e-12


def test_build_chain_rejects_negative_rate():
    with pytest.raises(SchemaError):
        ChainSpec(n_sites=2, local_dim=2, local_jumps=((SM, "down", -1.0),))


def test_build_chain_respects_dim_cap():
    spec = ChainSpec(n_sites=13, local_dim=2)
    with pytest.raises(DimCapExceeded):
        build_chain(spec)


# ---- plane-wave recombination ------------------------------------------------------------

def test_plane_wave_single_site():
    rep = LindbladRep(hamiltonian=np.zeros((2, 2)), jumps=(SM,))
    wrep = plane_wave_jumps(rep, 1)
    assert len(wrep.jumps) == 1
    assert np.allclose(wrep.jumps[0], SM, atol=1e-12)
    assert abs(wrep.shifts[0] - 1.0) <= 1e-12


def test_plane_wave_two_sites_frozen():
    spec = ChainSpec(n_sites=2, local_dim=2, local_jumps=((SM, "down", 1.0),))
    rep, _ = build_chain(spec)
    wrep = plane_wave_jumps(rep, 2)
    j0 = np.kron(SM, I2)
    j1 = np.kron(I2, SM)
    # k = 1: antisymmetric combination with shift e^{i pi} = -1
    assert np.allclose(wrep.jumps[0], (j0 - j1) / np.sqrt(2.0), atol=1e-12)
    assert abs(wrep.shifts[0] + 1.0) <= 1e-12
    # k = 2 = N: symmetric combination with the trivial shift
    assert np.allclose(wrep.jumps[1], (j0 + j1) / np.sqrt(2.0), atol=1e-12)
    assert abs(wrep.shifts[1] - 1.0) <= 1e-12


def test_plane_wave_jumps_are_translation_eigenmatrices():
    spec = ChainSpec(n_sites=4, local_dim=2, local_jumps=((SM, "down", 0.7),))
    rep, translation = build_chain(spec)
    wrep = plane_wave_jumps(rep, 4)
    t = translation.op
    for jop, shift in zip(wrep.jumps, wrep.shifts):
        assert np.linalg.norm(t @ jop @ t.conj().T - shift * jop) <= 1e-12
    lhs = build_dense(rep)
    assert np.linalg.norm(build_dense(wrep) - lhs) <= 1e-10 * np.linalg.norm(lhs)
    total_in = sum(np.linalg.norm(j) ** 2 for j in rep.jumps)
    total_out = sum(np.linalg.norm(j) ** 2 for j in wrep.jumps)
    assert abs(total_in - total_out) <= 1e-10 * total_in


def test_plane_wave_rejects_nonuniform_families():
    rep = LindbladRep(
        hamiltonian=np.zeros((4, 4)),
        jumps=(np.kron(SM, I2), np.kron(I2, SZ)),
    )
    with pytest.raises(NonUniform):
        plane_wave_jumps(rep, 2)
    rep3 = LindbladRep(
        hamiltonian=np.zeros((4, 4)), jumps=(np.kron(SM, I2),)
    )
    with pytest.raises(NonUniform):
        plane_wave_jumps(rep3, 2)


# ---- momentum basis -------------------------------------------------------------------

def test_momentum_basis_two_qubits_frozen():
    basis = momentum_basis(2, 2)
    root = 1.0 / np.sqrt(2.0)
    want = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, root, root, 0.0],
            [0.0, root, -root, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
        dtype=complex,
    ).T
    assert np.allclose(basis.columns, want.T, atol=1e-12)
    assert basis.representatives == ((0, 0), (0, 1), (0, 1), (1, 1))
    assert basis.cycle_lengths == (1, 2, 2, 1)
    assert basis.momentum_indices == (0, 0, 1, 0)
    assert np.allclose(basis.phases, (0.0, 0.0, np.pi, 0.0), atol=1e-12)


def test_momentum_basis_three_site_cycle_phases():
    basis = momentum_basis(3, 2)
    got = sorted(
        p for p, rep in zip(basis.phases, basis.representatives)
        if rep == (0, 0, 1)
    )
    want = sorted((0.0, 2.0 * np.pi / 3.0, -2.0 * np.pi / 3.0))
    assert np.allclose(got, want, atol=1e-12)


def test_momentum_basis_is_unitary():
    basis = momentum_basis(2, 3)
    b = basis.columns
    assert b.shape == (9, 9)
    assert np.linalg.norm(b.conj().T @ b - np.eye(9)) <= 1e-12


def test_momentum_basis_diagonalizes_translation():
    for n, d in ((3, 2), (4, 2)):
        basis = momentum_basis(n, d)
        t = translation_operator(n, d)
        for c in range(basis.columns.shape[1]):
            col = basis.columns[:, c]
            phase = np.exp(1j * basis.phases[c])
            assert np.linalg.norm(t @ col - phase * col) <= 1e-10


def test_momentum_indices_lift_subcycles():
    basis = momentum_basis(4, 2)
    # the |0101> cycle has length 2; its momenta sit on the even lattice
    got = sorted(
        m for m, rep in zip(basis.momentum_indices, basis.representatives)
        if rep == (0, 1, 0, 1)
    )
    assert got == [0, 2]


def test_momentum_basis_respects_dim_cap():
    with pytest.raises(DimCapExceeded):
        momentum_basis(13, 2)


# ---- sparsity census -----------------------------------------------------------------

def test_census_momentum_rotated_chain_jumps():
    spec = ChainSpec(n_sites=2, local_dim=2, local_jumps=((SM, "down", 1.0),))
    rep, _ = build_chain(spec)
    wrep = plane_wave_jumps(rep, 2)
    b = momentum_basis(2, 2).columns
    for jop in wrep.jumps:
        report = sparsity_census(b.conj().T @ jop @ b, bound=8)
        assert report.ok
        assert report.max_nonzeros <= 8


def test_census_counts_and_threshold():
    report = sparsity_census(np.eye(4), bound=1)
    assert report.per_column == (1, 1, 1, 1)
    dusty = np.eye(2) + 1e-13 * np.ones((2, 2))
    assert sparsity_census(dusty, bound=1).max_nonzeros == 1


def test_census_bound_violation():
    with pytest.raises(BoundViolated):
        sparsity_census(np.ones((3, 3)), bound=2)


# ---- spin models ---------------------------------------------------------------------

def test_total_sz_frozen():
    assert np.allclose(total_sz(1), np.diag([0.5, -0.5]))
    assert np.allclose(total_sz(2), np.diag([1.0, 0.0, 0.0, -1.0]))


def test_spin_model_single_site():
    rep, s_z = build_spin_model(SpinModelSpec(n_spins=1))
    assert s_z.kind == "generator"
    assert np.allclose(s_z.op, np.diag([0.5, -0.5]))
    assert len(rep.jumps) == 3
    for jop, local in zip(rep.jumps, (SX / 2, SY / 2, SZ / 2)):
        assert np.allclose(jop, local, atol=1e-14)


def test_spin_model_heisenberg_conserves_sz():
    spec = SpinModelSpec(n_spins=2, couplings_v=np.array([[0.0, 1.0], [1.0, 0.0]]))
    rep, s_z = build_spin_model(spec)
    comm = s_z.op @ rep.hamiltonian - rep.hamiltonian @ s_z.op
    assert np.linalg.norm(comm) <= 1e-12
    assert weak_symmetry_residual(rep, s_z) <= 1e-10


def test_spin_model_with_quartic_couplings():
    v = RNG.normal(size=(3, 3))
    v = v + v.T
    np.fill_diagonal(v, 0.0)
    spec = SpinModelSpec(
        n_spins=3, couplings_v=v, couplings_w=((0, 1, 1, 2, 0.7),),
        rates=(1.0, 0.5, 1.0),
    )
    rep, s_z = build_spin_model(spec)
    assert np.linalg.norm(rep.hamiltonian - rep.hamiltonian.conj().T) <= 1e-12
    assert weak_symmetry_residual(rep, s_z) <= 1e-10


def test_spin_model_input_validation():
    with pytest.raises(NotHermitian):
        SpinModelSpec(n_spins=2, couplings_v=np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(SchemaError):
        SpinModelSpec(n_spins=1, rates=(-0.5,))
    with pytest.raises(DimCapExceeded):
        build_spin_model(SpinModelSpec(n_spins=13))


# ---- ladder recombination ----------------------------------------------------------------

def test_ladder_single_site_frozen():
    rep, s_z = build_spin_model(SpinModelSpec(n_spins=1))
    wrep = ladder_jumps(rep)
    assert wrep.kinds == ("generator",)
    assert wrep.shifts == (1.0, -1.0, 0.0)
    root = np.sqrt(2.0)
    assert np.allclose(wrep.jumps[0], SM / root, atol=1e-14)
    assert np.allclose(wrep.jumps[1], SP / root, atol=1e-14)
    assert np.allclose(wrep.jumps[2], SZ / 2, atol=1e-14)
    for jop, shift in zip(wrep.jumps, wrep.shifts):
        comm = s_z.op @ jop - jop @ s_z.op
        assert np.linalg.norm(comm - shift * jop) <= 1e-12


def test_ladder_preserves_generator():
    spec = SpinModelSpec(
        n_spins=2, couplings_v=np.array([[0.0, 0.4], [0.4, 0.0]])
    )
    rep, _ = build_spin_model(spec)
    wrep = ladder_jumps(rep)
    lhs = build_dense(rep)
    assert np.linalg.norm(build_dense(wrep) - lhs) <= 1e-10 * np.linalg.norm(lhs)


def test_ladder_then_plane_waves_gives_joint_eigenmatrices():
    spec = SpinModelSpec(
        n_spins=2, couplings_v=np.array([[0.0, 1.0], [1.0, 0.0]])
    )
    rep, s_z = build_spin_model(spec)
    wrep = ladder_jumps(rep)
    # regroup the six per-site ladder jumps type-major so that each group of
    # two is a family of site translates
    order = [0, 3, 1, 4, 2, 5]
    regrouped = LindbladRep(
        hamiltonian=rep.hamiltonian,
        jumps=tuple(wrep.jumps[i] for i in order),
    )
    sz_shifts = [wrep.shifts[i] for i in order]
    joint = plane_wave_jumps(regrouped, 2)
    t = translation_operator(2, 2)
    for jop, t_shift, z_shift in zip(joint.jumps, joint.shifts, sz_shifts):
        assert np.linalg.norm(t @ jop @ t.conj().T - t_shift * jop) <= 1e-10
        comm = s_z.op @ jop - jop @ s_z.op
        assert np.linalg.norm(comm - z_shift * jop) <= 1e-10
    lhs = build_dense(rep)
    assert np.linalg.norm(build_dense(joint) - lhs) <= 1e-10 * np.linalg.norm(lhs)


def test_ladder_rejects_broken_triples():
    rep = LindbladRep(hamiltonian=np.zeros((2, 2)), jumps=(SX, SY))
    with pytest.raises(DimensionMismatch):
        ladder_jumps(rep)
    uneven = LindbladRep(
        hamiltonian=np.zeros((2, 2)), jumps=(SX, SY, 2.0 * SZ)
    )
    with pytest.raises(DimensionMismatch):
        ladder_jumps(uneven)
