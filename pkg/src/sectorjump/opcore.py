"""Dense linear-algebra substrate.

Everything downstream works with complex128 numpy arrays: operators are
square matrices, pure states are 1-d vectors, density matrices are square
Hermitian PSD matrices with unit trace.  This module owns the validated
constructors, the two eigensolvers with fixed ordering conventions, the
exponential action, and the Frobenius inner product.  Eigenphases are always
canonicalized to the half-open interval (-pi, pi], with the tie at -pi mapped
to +pi.

Backed by numpy.linalg and scipy.linalg; the wrappers pin down ordering,
phase conventions and validation so callers never touch LAPACK conventions
directly.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotHermitian, NotUnitary

__all__ = [
    "as_operator",
    "as_state_vector",
    "as_density_matrix",
    "is_hermitian",
    "is_unitary",
    "wrap_phase",
    "phase_distance",
    "hermitian_eig",
    "unitary_eig",
    "expm_apply",
    "frobenius_inner",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SIGMA_PLUS",
    "SIGMA_MINUS",
    "ID2",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
# lowering operator |0><1| in the convention where index 0 is the sigma_z=+1
# eigenstate
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T.copy()
ID2 = np.eye(2, dtype=complex)


# ---- validated constructors ------------------------------------------------

def as_operator(a) -> np.ndarray:
    """Coerce to a finite square complex matrix.

    Returns a fresh complex128 array; raises DimensionMismatch for anything
    that is not a square 2-d array with finite entries.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise DimensionMismatch("operator entries must be finite")
    return a.copy()


def as_state_vector(v, normalize: bool = False) -> np.ndarray:
    """Coerce to a finite complex vector, optionally normalized to 1."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size < 1 or not np.all(np.isfinite(v.view(float))):
        raise DimensionMismatch("state vector must be finite and non-empty")
    if normalize:
        n = np.linalg.norm(v)
        if n == 0.0:
            raise DimensionMismatch("cannot normalize a zero vector")
        v = v / n
    return v.copy()


def as_density_matrix(rho, tol: float = 1e-9) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, PSD to `tol`."""
    rho = as_operator(rho)
    if not is_hermitian(rho, tol):
        raise NotHermitian("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise DimensionMismatch(f"density matrix trace {tr} != 1")
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w.min() < -tol:
        raise DimensionMismatch(f"density matrix has negative eigenvalue {w.min()}")
    return rho


def is_hermitian(a: np.ndarray, tol: float = 1e-10) -> bool:
    scale = max(np.linalg.norm(a), 1.0)
    return np.linalg.norm(a - a.conj().T) <= tol * scale


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    d = u.shape[0]
    return np.linalg.norm(u.conj().T @ u - np.eye(d)) <= tol * max(1.0, float(d) ** 0.5)


# ---- phase conventions -----------------------------------------------------

def wrap_phase(phi):
    """Canonicalize angles to (-pi, pi]; the tie at -pi maps to +pi."""
    phi = np.asarray(phi, dtype=float)
    out = np.mod(phi + np.pi, 2.0 * np.pi) - np.pi
    out = np.where(out == -np.pi, np.pi, out)
    if out.ndim == 0:
        return float(out)
    return out


def phase_distance(a, b) -> float:
    """Distance between two angles on the circle, in [0, pi]."""
    return abs(wrap_phase(float(a) - float(b)))


# ---- eigensolvers ----------------------------------------------------------

def hermitian_eig(a, tol: float = 1e-10):
    """Eigendecomposition of a Hermitian matrix.

    Returns (w, v) with eigenvalues sorted descending and orthonormal
    eigenvector columns; raises NotHermitian when the input fails the
    Hermiticity check at `tol`.
    """
    a = as_operator(a)
    if not is_hermitian(a, tol):
        raise NotHermitian(f"matrix is not Hermitian to {tol}")
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    order = np.argsort(-w, kind="stable")
    return w[order].copy(), v[:, order].copy()


def unitary_eig(u, tol: float = 1e-10):
    """Eigendecomposition of a unitary matrix.

    Returns (phases, v): eigenphases in (-pi, pi] sorted ascending and
    orthonormal eigenvector columns.  Uses the complex Schur form, which is
    diagonal for normal matrices, so degenerate eigenspaces still come out
    orthonormal (plain nonsymmetric eig does not guarantee that).
    """
    u = as_operator(u)
    if not is_unitary(u, tol):
        raise NotUnitary(f"matrix is not unitary to {tol}")
    t, q = scipy.linalg.schur(u, output="complex")
    phases = wrap_phase(np.angle(np.diag(t)))
    order = np.argsort(phases, kind="stable")
    return phases[order].copy(), q[:, order].copy()


# ---- exponential action and inner product ----------------------------------

def expm_apply(a, v, t: float = 1.0) -> np.ndarray:
    """Apply exp(t*a) to a vector via scaling-and-squaring on the matrix."""
    a = as_operator(a)
    v = as_state_vector(v)
    if a.shape[0] != v.size:
        raise DimensionMismatch(f"operator dim {a.shape[0]} != vector dim {v.size}")
    return scipy.linalg.expm(t * a) @ v


def frobenius_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product Tr(a^dag b)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.sum(a.conj() * b))
