"""Dense complex linear algebra for small composite Hilbert spaces.

Operators and states are plain numpy arrays (complex128): kets are 1-d
vectors, operators and density matrices are 2-d square arrays.  The
composite space is SQUID1 (3 levels) x SQUID2 (3 levels) x cavity
(n_max Fock states), flattened row-major, so the basis index of
|s1, s2, n> is ((s1 * 3) + s2) * n_max + n.

Structural tolerances used throughout: 1e-12 for exact algebraic
identities (hermiticity, adjoints), 1e-9 for unitarity of computed
propagators.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-9

SQUID_LEVELS = 3


@dataclass(frozen=True)
class HilbertLayout:
    """Factor bookkeeping for the SQUID1 x SQUID2 x cavity product space."""

    n_max: int

    def __post_init__(self):
        if self.n_max < 2:
            raise ValueError(f"n_max must be >= 2, got {self.n_max}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (SQUID_LEVELS, SQUID_LEVELS, self.n_max)

    @property
    def dim(self) -> int:
        return SQUID_LEVELS * SQUID_LEVELS * self.n_max

    def index(self, s1: int, s2: int, n: int) -> int:
        """Composite basis index of |s1, s2, n>."""
        if not (0 <= s1 < 3 and 0 <= s2 < 3 and 0 <= n < self.n_max):
            raise ValueError(f"basis labels ({s1},{s2},{n}) out of range")
        return (s1 * 3 + s2) * self.n_max + n

    def unindex(self, i: int) -> tuple[int, int, int]:
        """Inverse of :meth:`index`."""
        if not 0 <= i < self.dim:
            raise ValueError(f"index {i} out of range for dim {self.dim}")
        n = i % self.n_max
        pair = i // self.n_max
        return pair // 3, pair % 3, n

    def basis_state(self, s1: int, s2: int, n: int) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(s1, s2, n)] = 1.0
        return psi


def pair_index(s1: int, s2: int) -> int:
    """Basis index of |s1, s2> in the 9-dim SQUID-pair space."""
    return 3 * s1 + s2


def pair_basis_state(s1: int, s2: int) -> np.ndarray:
    psi = np.zeros(9, dtype=complex)
    psi[pair_index(s1, s2)] = 1.0
    return psi


def kron(a: np.ndarray, b: np.ndarray, *rest: np.ndarray) -> np.ndarray:
    """Kronecker product of two or more operators (dims multiply)."""
    return reduce(np.kron, (a, b) + rest)


def embed(op: np.ndarray, slot: int, layout: HilbertLayout) -> np.ndarray:
    """Lift a single-factor operator to the composite space.

    Acts as `op` on factor `slot` (0 = SQUID1, 1 = SQUID2, 2 = cavity)
    and as the identity on the other factors.
    """
    dims = layout.dims
    if not 0 <= slot < len(dims):
        raise ValueError(f"slot must be 0..2, got {slot}")
    if op.shape != (dims[slot], dims[slot]):
        raise ValueError(
            f"operator shape {op.shape} does not match factor dim {dims[slot]}"
        )
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[slot] = op.astype(complex)
    return kron(*factors)


def annihilation(n_max: int) -> np.ndarray:
    """Truncated bosonic annihilation operator, a|n> = sqrt(n)|n-1>."""
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    a = np.zeros((n_max, n_max), dtype=complex)
    for n in range(1, n_max):
        a[n - 1, n] = np.sqrt(n)
    return a


def squid_raise() -> np.ndarray:
    """|2><0| on one SQUID: the raising operator of the 0<->2 doublet."""
    op = np.zeros((3, 3), dtype=complex)
    op[2, 0] = 1.0
    return op


def squid_lower() -> np.ndarray:
    """|0><2| on one SQUID (adjoint of :func:`squid_raise`)."""
    return squid_raise().conj().T


def level_projector(level: int) -> np.ndarray:
    """|level><level| on one SQUID."""
    if level not in (0, 1, 2):
        raise ValueError(f"level must be 0, 1 or 2, got {level}")
    op = np.zeros((3, 3), dtype=complex)
    op[level, level] = 1.0
    return op


def level_phase(phi0: float, phi1: float, phi2: float) -> np.ndarray:
    """diag(e^{i phi0}, e^{i phi1}, e^{i phi2}) on one SQUID."""
    return np.diag(np.exp(1j * np.array([phi0, phi1, phi2])))


def is_hermitian(h: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    scale = max(1.0, float(np.abs(h).max()))
    return float(np.abs(h - h.conj().T).max()) <= tol * scale


def matexp_hermitian(h: np.ndarray, t: float = 1.0, tol: float = 1e-9) -> np.ndarray:
    """exp(-i h t) for Hermitian h, via eigendecomposition.

    The eigendecomposition route keeps the result unitary to roundoff
    (every factor V diag(e^{-iwt}) V^dag is exactly unitary up to the
    accuracy of the orthonormal eigenbasis).

    Raises ValueError if h is not Hermitian within `tol` (relative to
    its largest entry).
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not is_hermitian(h, tol):
        err = float(np.abs(h - h.conj().T).max())
        raise ValueError(f"matrix is not Hermitian: max|H - H^dag| = {err:.3e}")
    h = (h + h.conj().T) / 2.0
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius norm of the commutator [a, b] = ab - ba."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"incompatible shapes {a.shape} and {b.shape}")
    return float(np.linalg.norm(a @ b - b @ a, "fro"))


def unitarity_defect(u: np.ndarray) -> float:
    """Frobenius norm of U^dag U - I."""
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]), "fro"))


def norm_deviation(psi: np.ndarray) -> float:
    """| ||psi||_2 - 1 |."""
    return abs(float(np.linalg.norm(psi)) - 1.0)


def check_normalized(psi: np.ndarray, tol: float = 1e-8) -> None:
    dev = norm_deviation(psi)
    if dev > tol:
        raise ValueError(f"state is not normalized: | ||psi|| - 1 | = {dev:.3e}")


def check_density_matrix(rho: np.ndarray, tol_trace: float = 1e-10) -> None:
    """Validate hermiticity, unit trace and near-positivity of rho."""
    rho = np.asarray(rho)
    scale = max(1.0, float(np.abs(rho).max()))
    herm = float(np.abs(rho - rho.conj().T).max())
    if herm > HERMITICITY_TOL * scale:
        raise ValueError(f"density matrix not Hermitian: max asymmetry {herm:.3e}")
    tr = float(np.real(np.trace(rho)))
    if abs(tr - 1.0) > tol_trace:
        raise ValueError(f"density matrix trace {tr} differs from 1")
    lo = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0])
    if lo < -1e-10:
        raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")
