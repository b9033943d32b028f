"""Quantum-jump Monte Carlo unraveling with sector confinement.

Between jumps a trajectory evolves under the non-Hermitian effective
Hamiltonian H_eff = H - (i/2) sum_j J_j^dag J_j; the squared norm of the
unnormalized state is the no-jump survival probability.  A jump time is the
solution of ||psi(t)||^2 = u for a uniform draw u in (0, 1], located by
walking fixed-step checkpoints (h = min(0.01/||H_eff||, t_max/100)) until
the survival drops below u and bisecting the bracketing step to
|delta norm^2| <= 1e-10.  Jumps are then selected with probability
proportional to <psi|J^dag J|psi> and applied.

For a weakly symmetric representation the walk never leaves sector
coordinates: a pure state in sector l needs only dim_l amplitudes, each jump
maps sector l to the unique sector whose label is shift * label_l, and a
general initial state is carried as one component per sector whose summed
norm plays the role of the survival probability.

Randomness comes from counter-based Philox streams keyed by (master seed,
trajectory index), so ensembles are reproducible bit for bit regardless of
how trajectories are distributed over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateSteadyState,
    DimensionMismatch,
    InvalidU,
    InvalidWindow,
    NegativeTime,
    NonUniqueSteadyState,
    NormIncreased,
    NotCertified,
    ShiftLeavesSpectrum,
    ZeroTotalRate,
)
from .liouville import build_blocks, steady_state
from .opcore import as_operator, as_state_vector
from .representation import effective_hamiltonian
from .symmetry import SectorDecomposition

__all__ = [
    "SectorState",
    "SectorSuperposition",
    "JumpEvent",
    "Snapshot",
    "TrajectoryRecord",
    "EnsembleEstimate",
    "SectorEngine",
    "sample_waiting_time",
    "select_jump",
    "run_trajectory",
    "run_trajectory_sectored",
    "run_trajectory_general",
    "ensemble_average",
    "time_average",
    "occupied_coherence_classes",
]

_TAYLOR_ORDER = 16
_BISECT_TOL = 1e-10
_RATE_FLOOR = 1e-14
_CHUNK = 64


# ---- record types -------------------------------------------------------------

@dataclass(frozen=True)
class SectorState:
    """Pure state confined to one sector, stored as sector amplitudes.

    global_dim records the full-space dimension the sector belongs to; 0
    means unspecified (checked against the engine when bound).
    """

    sector: int
    amplitudes: np.ndarray
    global_dim: int = 0


@dataclass(frozen=True)
class SectorSuperposition:
    """General pure state as amplitude blocks keyed by sector index."""

    components: dict


@dataclass(frozen=True)
class JumpEvent:
    """One applied jump; sector fields are None for full-space runs and
    per-component maps for superposition runs."""

    time: float
    jump_index: int
    shift: object
    sector_before: object
    sector_after: object


@dataclass(frozen=True)
class Snapshot:
    """Normalized state at a requested sample time, with the weight of each
    occupied sector (empty for full-space runs)."""

    time: float
    state: np.ndarray
    sector_weights: dict


@dataclass(frozen=True)
class TrajectoryRecord:
    events: tuple
    samples: tuple
    seed: object
    censored_at: float


@dataclass(frozen=True)
class EnsembleEstimate:
    """Trajectory-ensemble summary: mean reconstructed state and observable
    means with standard errors (sample std / sqrt(n_traj)) per sample time."""

    times: tuple
    mean_states: np.ndarray
    observable_names: tuple
    means: np.ndarray
    stderrs: np.ndarray
    n_traj: int
    records: tuple = None


def _trajectory_rng(master_seed: int, index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(seq))


def _draw_u(rng) -> float:
    # uniform on (0, 1]: random() is [0, 1)
    return 1.0 - float(rng.random())


def _select_index(rates, rng) -> int:
    total = float(np.sum(rates))
    if total <= _RATE_FLOOR:
        raise ZeroTotalRate(f"total jump rate {total:.3e} at a sampled jump time")
    x = float(rng.random()) * total
    acc = 0.0
    for i, r in enumerate(rates):
        acc += float(r)
        if x < acc:
            return i
    return len(rates) - 1


def select_jump(psi, jumps, rng) -> int:
    """Pick a jump with probability proportional to <psi|J^dag J|psi>."""
    psi = as_state_vector(psi)
    rates = [float(np.linalg.norm(as_operator(j) @ psi) ** 2) for j in jumps]
    return _select_index(rates, rng)


# ---- dynamics backends ----------------------------------------------------------
#
# A "dynamics" object hides whether the walk runs on the full space or in
# sector coordinates.  Working states are dicts {key: amplitude vector}; the
# full-space backend uses the single key None.

class _FullDynamics:
    def __init__(self, rep):
        self.heff = effective_hamiltonian(rep)
        self.jumps = [as_operator(j) for j in rep.jumps]
        self.dim = self.heff.shape[0]
        hnorm = float(np.linalg.norm(self.heff, 2)) if self.dim else 0.0
        self.h_cap = 0.01 / hnorm if hnorm > 0.0 else math.inf
        self._props = {}

    @property
    def n_jumps(self):
        return len(self.jumps)

    def heff_of(self, key):
        return self.heff

    def propagator(self, key, h):
        mat = self._props.get(h)
        if mat is None:
            mat = scipy.linalg.expm(-1j * h * self.heff)
            self._props[h] = mat
        return mat

    def jump_rates(self, comps):
        psi = comps[None]
        return [float(np.linalg.norm(j @ psi) ** 2) for j in self.jumps]

    def apply_jump(self, comps, j):
        return {None: self.jumps[j] @ comps[None]}, None, None, None

    def embed(self, comps):
        return comps[None]

    def sector_weights(self, comps):
        return {}

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_props"] = {}
        return state


class SectorEngine:
    """Precomputed sector-coordinate machinery for one certified weakly
    symmetric representation.

    Holds the sector-restricted effective Hamiltonian blocks, and for every
    jump the map from each source sector to its unique target sector with
    the corresponding matrix block.  Working states never exceed the largest
    sector dimension per component.
    """

    def __init__(self, wrep, dec: SectorDecomposition, tol: float = 1e-8):
        self.wrep = wrep
        self.dec = dec
        vmat = dec.change_of_basis
        off = dec.offsets
        dims = [s.dim for s in dec.sectors]
        self.dim = dec.dim
        self.sector_dims = tuple(dims)
        self.bases = tuple(s.basis for s in dec.sectors)

        heff = effective_hamiltonian(wrep)
        heff_rot = vmat.conj().T @ heff @ vmat
        hscale = max(np.linalg.norm(heff_rot), 1.0)
        for k in range(dec.n_sectors):
            for l in range(dec.n_sectors):
                if k == l:
                    continue
                blk = heff_rot[off[k]: off[k] + dims[k], off[l]: off[l] + dims[l]]
                if np.linalg.norm(blk) > tol * hscale:
                    raise NotCertified(
                        "effective Hamiltonian couples different sectors"
                    )
        self.heff_blocks = tuple(
            np.ascontiguousarray(
                heff_rot[off[k]: off[k] + dims[k], off[k]: off[k] + dims[k]]
            )
            for k in range(dec.n_sectors)
        )

        # per-jump sector routing: source sector -> (target sector, block)
        self.jump_targets = []
        for j, (jop, tag) in enumerate(zip(wrep.jumps, wrep.shifts)):
            jrot = vmat.conj().T @ as_operator(jop) @ vmat
            jscale = max(np.linalg.norm(jrot), 1.0)
            routing = {}
            for l in range(dec.n_sectors):
                cols = slice(off[l], off[l] + dims[l])
                target = dec.target_sector(l, tag)
                if target is None:
                    if np.linalg.norm(jrot[:, cols]) > tol * jscale:
                        raise ShiftLeavesSpectrum(
                            f"jump {j} acts on sector {l} but its shift leaves "
                            "the label spectrum"
                        )
                    continue
                rows = slice(off[target], off[target] + dims[target])
                block = jrot[rows, cols]
                # anything outside the designated target block is leakage
                rest = np.linalg.norm(jrot[:, cols]) ** 2 - np.linalg.norm(block) ** 2
                if rest > (tol * jscale) ** 2:
                    raise NotCertified(
                        f"jump {j} has support outside its shift's target sector"
                    )
                routing[l] = (target, np.ascontiguousarray(block))
            self.jump_targets.append(routing)

        norms = [float(np.linalg.norm(b, 2)) for b in self.heff_blocks if b.size]
        top = max(norms) if norms else 0.0
        self.h_cap = 0.01 / top if top > 0.0 else math.inf
        self._props = {}

    @property
    def n_jumps(self):
        return len(self.jump_targets)

    @cached_property
    def block_liouvillian(self):
        return build_blocks(self.wrep, self.dec)

    def heff_of(self, key):
        return self.heff_blocks[key]

    def propagator(self, key, h):
        mat = self._props.get((key, h))
        if mat is None:
            mat = scipy.linalg.expm(-1j * h * self.heff_blocks[key])
            self._props[(key, h)] = mat
        return mat

    def jump_rates(self, comps):
        rates = []
        for routing in self.jump_targets:
            r = 0.0
            for l, vec in comps.items():
                hit = routing.get(l)
                if hit is not None:
                    r += float(np.linalg.norm(hit[1] @ vec) ** 2)
            rates.append(r)
        return rates

    def apply_jump(self, comps, j):
        routing = self.jump_targets[j]
        out = {}
        before = {}
        after = {}
        for l, vec in comps.items():
            hit = routing.get(l)
            if hit is None:
                continue
            target, block = hit
            new = block @ vec
            if float(np.linalg.norm(new) ** 2) <= 1e-28:
                continue
            out[target] = new
            before[l] = l
            after[l] = target
        shift = self.wrep.shifts[j]
        if len(before) == 1:
            (l,) = before
            return out, shift, l, after[l]
        return out, shift, dict(sorted(before.items())), dict(sorted(after.items()))

    def embed(self, comps):
        v = np.zeros(self.dim, dtype=complex)
        for l, vec in comps.items():
            v += self.bases[l] @ vec
        return v

    def sector_weights(self, comps):
        total = sum(float(np.linalg.norm(v) ** 2) for v in comps.values())
        if total <= 0.0:
            return {}
        return {
            l: float(np.linalg.norm(v) ** 2) / total
            for l, v in sorted(comps.items())
        }

    def components_from_full(self, psi, drop: float = 1e-14) -> SectorSuperposition:
        """Split a full-space vector into sector components."""
        psi = as_state_vector(psi)
        if psi.size != self.dim:
            raise DimensionMismatch("state and engine dimensions differ")
        comps = {}
        for l, basis in enumerate(self.bases):
            amp = basis.conj().T @ psi
            if float(np.linalg.norm(amp) ** 2) > drop:
                comps[l] = amp
        return SectorSuperposition(components=comps)

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_props"] = {}
        state.pop("block_liouvillian", None)
        return state


# ---- no-jump evolution -----------------------------------------------------------

def _total_norm2(comps) -> float:
    return sum(float(np.vdot(v, v).real) for v in comps.values())


def _scaled(comps, factor):
    return {k: v * factor for k, v in comps.items()}


def _taylor_stacks(dyn, comps):
    stacks = {}
    for key, vec in comps.items():
        mat = -1j * dyn.heff_of(key)
        cs = [vec]
        for n in range(1, _TAYLOR_ORDER + 1):
            cs.append((mat @ cs[-1]) / n)
        stacks[key] = cs
    return stacks


def _taylor_eval(stacks, tau):
    out = {}
    for key, cs in stacks.items():
        acc = cs[-1]
        for c in reversed(cs[:-1]):
            acc = acc * tau + c
        out[key] = acc
    return out


def _bisect_crossing(dyn, comps_prev, u, h):
    """Locate ||psi(tau)||^2 = u inside (0, h], given a bracketing step.

    The step obeys ||H_eff|| h <= 0.01 so a fixed-order Taylor expansion of
    the propagator from the left checkpoint is exact to machine precision
    and each bisection iteration is a cheap polynomial evaluation.
    """
    stacks = _taylor_stacks(dyn, comps_prev)
    lo, hi = 0.0, h
    mid = h
    comps_mid = _taylor_eval(stacks, mid)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        comps_mid = _taylor_eval(stacks, mid)
        n2 = _total_norm2(comps_mid)
        if abs(n2 - u) <= _BISECT_TOL:
            break
        if n2 < u:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-18 * max(h, 1.0):
            break
    return mid, comps_mid


def _advance(dyn, comps, u, t0, t1, observer=None):
    """Evolve components from t0 to t1 under H_eff.

    Returns (crossed, t, comps): crossed=True with the unnormalized state at
    the jump time when the survival drops below u strictly inside the
    segment, otherwise the state at t1.
    """
    span = t1 - t0
    if span <= 0.0:
        return False, t1, comps
    h_target = min(dyn.h_cap, span / 100.0)
    n_steps = max(1, int(math.ceil(span / h_target)))
    h = span / n_steps
    props = {key: dyn.propagator(key, h) for key in comps}
    prev = comps
    t_prev = t0
    for i in range(n_steps):
        cur = {key: props[key] @ vec for key, vec in prev.items()}
        t_new = t0 + (i + 1) * h if i + 1 < n_steps else t1
        n2 = _total_norm2(cur)
        if n2 > 1.0 + 1e-8:
            raise NormIncreased(f"squared norm reached {n2}")
        if n2 < u:
            tau, comps_at = _bisect_crossing(dyn, prev, u, h)
            t_cross = t_prev + tau
            if observer is not None:
                observer(t_prev, prev, t_cross, comps_at)
            return True, t_cross, comps_at
        if observer is not None:
            observer(t_prev, prev, t_new, cur)
        prev = cur
        t_prev = t_new
    return False, t1, prev


def sample_waiting_time(h_eff, psi, u, t_max):
    """Next-jump time under one effective Hamiltonian.

    Returns (t_jump, state_at): the unnormalized state at the jump time, or
    (None, state_at_t_max) when the survival stays above u over the whole
    window (censored).  u must lie in (0, 1]; psi must be normalized.
    """
    if not (0.0 < u <= 1.0):
        raise InvalidU(f"u={u} outside (0, 1]")
    if t_max <= 0.0:
        raise NegativeTime(f"t_max={t_max} must be positive")
    h_eff = as_operator(h_eff)
    psi = as_state_vector(psi)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-8:
        raise DimensionMismatch(f"state norm {norm} != 1")
    psi = psi / norm

    class _OneOp:
        def __init__(self, mat):
            self.mat = mat
            hnorm = float(np.linalg.norm(mat, 2))
            self.h_cap = 0.01 / hnorm if hnorm > 0.0 else math.inf
            self._props = {}

        def heff_of(self, key):
            return self.mat

        def propagator(self, key, h):
            p = self._props.get(h)
            if p is None:
                p = scipy.linalg.expm(-1j * h * self.mat)
                self._props[h] = p
            return p

    dyn = _OneOp(h_eff)
    crossed, t, comps = _advance(dyn, {None: psi}, u, 0.0, float(t_max))
    if crossed:
        return float(t), comps[None]
    return None, comps[None]


# ---- trajectory walk ---------------------------------------------------------------

def _normalize_comps(comps):
    n2 = _total_norm2(comps)
    if n2 <= 0.0:
        raise DimensionMismatch("state has zero norm")
    return _scaled(comps, 1.0 / math.sqrt(n2))


def _walk(dyn, comps, t_final, rng, sample_times=(), observer=None):
    """Full quantum-jump walk on [0, t_final]; returns (events, snapshots)."""
    if t_final < 0.0:
        raise NegativeTime(f"t_final={t_final} < 0")
    times = sorted(float(x) for x in sample_times)
    if times and (times[0] < 0.0 or times[-1] > t_final + 1e-12):
        raise DimensionMismatch("sample times must lie in [0, t_final]")
    comps = _normalize_comps(comps)
    events = []
    snaps = []
    state = {"comps": comps, "u": _draw_u(rng)}
    pos = 0

    def consume_snapshots(t):
        nonlocal pos
        while pos < len(times) and times[pos] <= t + 1e-12:
            full = dyn.embed(state["comps"])
            n = np.linalg.norm(full)
            snaps.append(
                Snapshot(
                    time=times[pos],
                    state=full / n,
                    sector_weights=dyn.sector_weights(state["comps"]),
                )
            )
            pos += 1
            # renormalize the working state, rescaling the survival target
            n2 = _total_norm2(state["comps"])
            state["comps"] = _scaled(state["comps"], 1.0 / math.sqrt(n2))
            state["u"] = min(state["u"] / n2, 1.0)

    t = 0.0
    consume_snapshots(0.0)
    while t_final - t > 1e-15:
        boundary = times[pos] if pos < len(times) else t_final
        boundary = min(max(boundary, t), t_final)
        if boundary - t <= 1e-15:
            consume_snapshots(boundary)
            continue
        crossed, t_new, comps_new = _advance(
            dyn, state["comps"], state["u"], t, boundary, observer
        )
        t = t_new
        if crossed:
            normalized = _normalize_comps(comps_new)
            rates = dyn.jump_rates(normalized)
            j = _select_index(rates, rng)
            applied, shift, before, after = dyn.apply_jump(normalized, j)
            state["comps"] = _normalize_comps(applied)
            state["u"] = _draw_u(rng)
            events.append(
                JumpEvent(
                    time=t,
                    jump_index=j,
                    shift=shift,
                    sector_before=before,
                    sector_after=after,
                )
            )
        else:
            state["comps"] = comps_new
            consume_snapshots(t)
    consume_snapshots(t_final)
    return events, snaps


def _initial_comps(dyn, initial):
    if isinstance(dyn, _FullDynamics):
        psi = as_state_vector(initial)
        if psi.size != dyn.dim:
            raise DimensionMismatch("state and generator dimensions differ")
        return {None: psi}
    if isinstance(initial, SectorState):
        amps = as_state_vector(initial.amplitudes)
        if initial.sector < 0 or initial.sector >= len(dyn.sector_dims):
            raise DimensionMismatch(f"no sector {initial.sector}")
        if amps.size != dyn.sector_dims[initial.sector]:
            raise DimensionMismatch("amplitude count != sector dimension")
        if initial.global_dim and initial.global_dim != dyn.dim:
            raise DimensionMismatch("state and engine dimensions differ")
        return {int(initial.sector): amps}
    if isinstance(initial, SectorSuperposition):
        comps = {}
        for l, amp in initial.components.items():
            amp = as_state_vector(amp)
            if amp.size != dyn.sector_dims[int(l)]:
                raise DimensionMismatch("amplitude count != sector dimension")
            comps[int(l)] = amp
        if not comps:
            raise DimensionMismatch("superposition has no components")
        return comps
    # full-space vector against a sector engine
    return dict(dyn.components_from_full(initial).components)


def run_trajectory(rep, psi0, t_final, seed, sample_times=()) -> TrajectoryRecord:
    """Single full-space trajectory of a raw representation."""
    dyn = _FullDynamics(rep)
    rng = _trajectory_rng(seed, 0)
    events, snaps = _walk(dyn, _initial_comps(dyn, psi0), float(t_final), rng,
                          sample_times)
    return TrajectoryRecord(
        events=tuple(events), samples=tuple(snaps), seed=seed,
        censored_at=float(t_final),
    )


def run_trajectory_sectored(wrep, dec, start: SectorState, t_final, seed,
                            sample_times=()) -> TrajectoryRecord:
    """Single trajectory confined to sector coordinates."""
    engine = wrep if isinstance(wrep, SectorEngine) else SectorEngine(wrep, dec)
    rng = _trajectory_rng(seed, 0)
    events, snaps = _walk(engine, _initial_comps(engine, start), float(t_final),
                          rng, sample_times)
    return TrajectoryRecord(
        events=tuple(events), samples=tuple(snaps), seed=seed,
        censored_at=float(t_final),
    )


def run_trajectory_general(wrep, dec, start, t_final, seed,
                           sample_times=()) -> TrajectoryRecord:
    """Single trajectory from a cross-sector superposition (or a full-space
    vector, which is split into sector components first)."""
    engine = wrep if isinstance(wrep, SectorEngine) else SectorEngine(wrep, dec)
    rng = _trajectory_rng(seed, 0)
    events, snaps = _walk(engine, _initial_comps(engine, start), float(t_final),
                          rng, sample_times)
    return TrajectoryRecord(
        events=tuple(events), samples=tuple(snaps), seed=seed,
        censored_at=float(t_final),
    )


def occupied_coherence_classes(sector_weights, dec, tol: float = 1e-12):
    """SuperShift indices of the coherence classes a snapshot can populate."""
    occ = [l for l, w in sector_weights.items() if w > tol]
    return frozenset(dec.pair_shift_index[(k, l)] for k in occ for l in occ)


# ---- ensembles -----------------------------------------------------------------------

def _as_dynamics(model):
    if isinstance(model, (SectorEngine, _FullDynamics)):
        return model
    if isinstance(model, tuple) and len(model) == 2:
        return SectorEngine(model[0], model[1])
    if hasattr(model, "shifts"):
        raise DimensionMismatch(
            "a weakly symmetric representation needs its decomposition; "
            "pass (wrep, dec) or a SectorEngine"
        )
    return _FullDynamics(model)


def _ensemble_chunk(args):
    (dyn, comps_items, times, master_seed, start, count, obs_mats,
     keep_records) = args
    comps0 = dict(comps_items)
    n_times = len(times)
    n_obs = len(obs_mats)
    obs_vals = np.empty((count, n_times, n_obs), dtype=float)
    dim = len(dyn.embed(comps0))
    state_sum = np.zeros((n_times, dim, dim), dtype=complex)
    records = [] if keep_records else None
    for c in range(count):
        idx = start + c
        rng = _trajectory_rng(master_seed, idx)
        events, snaps = _walk(dyn, comps0, times[-1] if times else 0.0, rng,
                              times)
        for s, snap in enumerate(snaps):
            v = snap.state
            state_sum[s] += np.outer(v, v.conj())
            for o, mat in enumerate(obs_mats):
                obs_vals[c, s, o] = float(np.vdot(v, mat @ v).real)
        if keep_records:
            records.append(
                TrajectoryRecord(
                    events=tuple(events), samples=tuple(snaps),
                    seed=(master_seed, idx), censored_at=times[-1] if times else 0.0,
                )
            )
    return obs_vals, state_sum, records


def ensemble_average(model, initial, sample_times, n_traj, seed,
                     observables=None, workers: int = 1,
                     keep_records: bool = False) -> EnsembleEstimate:
    """Trajectory-ensemble estimate of the evolved state and observables.

    `model` is a raw representation (full-space unraveling), a SectorEngine,
    or a (wrep, decomposition) pair.  Trajectory i always consumes the
    Philox stream keyed by (seed, i) and partial sums are reduced in fixed
    chunk order, so the result is identical for any worker count.
    """
    times = [float(t) for t in sample_times]
    if not times or any(b <= a for a, b in zip(times, times[1:])):
        raise DimensionMismatch("sample times must be strictly increasing")
    if times[0] < 0.0:
        raise NegativeTime("sample times must be nonnegative")
    if n_traj < 1:
        raise DimensionMismatch("need at least one trajectory")
    dyn = _as_dynamics(model)
    comps0 = _normalize_comps(_initial_comps(dyn, initial))

    if observables is None:
        observables = {}
    if isinstance(observables, dict):
        obs_items = list(observables.items())
    else:
        obs_items = [(str(k), v) for k, v in observables]
    obs_names = tuple(name for name, _ in obs_items)
    obs_mats = [as_operator(m) for _, m in obs_items]

    starts = list(range(0, n_traj, _CHUNK))
    payloads = [
        (dyn, tuple(comps0.items()), tuple(times), int(seed), s,
         min(_CHUNK, n_traj - s), obs_mats, keep_records)
        for s in starts
    ]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=int(workers)) as pool:
            results = list(pool.map(_ensemble_chunk, payloads))
    else:
        results = [_ensemble_chunk(p) for p in payloads]

    n_times = len(times)
    obs_all = np.empty((n_traj, n_times, len(obs_mats)), dtype=float)
    dim = len(dyn.embed(comps0))
    state_sum = np.zeros((n_times, dim, dim), dtype=complex)
    records = [] if keep_records else None
    for (s, payload), (vals, ssum, recs) in zip(zip(starts, payloads), results):
        obs_all[s: s + payload[5]] = vals
        state_sum += ssum
        if keep_records:
            records.extend(recs)

    means = obs_all.mean(axis=0)
    if n_traj > 1:
        stderrs = obs_all.std(axis=0, ddof=1) / math.sqrt(n_traj)
    else:
        stderrs = np.zeros_like(means)
    return EnsembleEstimate(
        times=tuple(times),
        mean_states=state_sum / n_traj,
        observable_names=obs_names,
        means=means,
        stderrs=stderrs,
        n_traj=int(n_traj),
        records=tuple(records) if keep_records else None,
    )


# ---- ergodic averaging -----------------------------------------------------------------

class _TrapezoidAverager:
    """Accumulates the normalized pure-state projector along a walk."""

    def __init__(self, dyn, t_burn):
        self.dyn = dyn
        self.t_burn = float(t_burn)
        self.rho = np.zeros((dyn.dim, dyn.dim), dtype=complex)
        self.weight = 0.0

    def _projector(self, comps):
        v = self.dyn.embed(comps)
        n2 = float(np.vdot(v, v).real)
        return np.outer(v, v.conj()) / n2

    def __call__(self, t0, comps0, t1, comps1):
        if t1 <= self.t_burn or t1 <= t0:
            return
        lo = max(t0, self.t_burn)
        w = t1 - lo
        self.rho += 0.5 * w * (self._projector(comps0) + self._projector(comps1))
        self.weight += w


def time_average(model, initial, t_burn, t_total, seed) -> np.ndarray:
    """Ergodic average of the trajectory projector over [t_burn, t_total].

    Requires a unique stationary state: the symmetric-block kernel is
    checked first and NonUniqueSteadyState raised when it is degenerate.
    For a raw representation the check runs on the trivial decomposition
    (single sector), i.e. on the full generator.
    """
    if t_burn < 0.0:
        raise NegativeTime(f"t_burn={t_burn} < 0")
    if not (t_burn < t_total):
        raise InvalidWindow(f"empty window [{t_burn}, {t_total}]")
    dyn = _as_dynamics(model)
    if isinstance(dyn, SectorEngine):
        blocks = dyn.block_liouvillian
    else:
        from .representation import WeaklySymmetricRep
        from .symmetry import SymmetrySpec, decompose

        trivial = SymmetrySpec(kind="unitary", op=np.eye(dyn.dim))
        wrep = WeaklySymmetricRep(
            hamiltonian=model.hamiltonian,
            jumps=tuple(model.jumps),
            shifts=tuple(1.0 + 0.0j for _ in model.jumps),
            kinds=("unitary",),
            provenance="model",
        )
        blocks = build_blocks(wrep, decompose(trivial))
    try:
        steady_state(blocks)
    except DegenerateSteadyState as exc:
        raise NonUniqueSteadyState(str(exc)) from exc

    rng = _trajectory_rng(seed, 0)
    averager = _TrapezoidAverager(dyn, t_burn)
    comps = _normalize_comps(_initial_comps(dyn, initial))
    _walk(dyn, comps, float(t_total), rng, sample_times=(), observer=averager)
    if averager.weight <= 0.0:
        raise InvalidWindow("no weight accumulated in the averaging window")
    rho = averager.rho / averager.weight
    return 0.5 * (rho + rho.conj().T)
