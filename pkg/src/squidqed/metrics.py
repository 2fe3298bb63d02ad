"""State metrics: fidelity, reduced states, entanglement measures.

All functions take plain numpy arrays.  Bipartite measures on the
SQUID pair treat the 9-dim space as qutrit x qutrit with the row-major
index 3*s1 + s2.
"""

from __future__ import annotations

import numpy as np

LOG2_3 = float(np.log2(3.0))

PURITY_TOL = 1e-6


class MixedStateError(ValueError):
    """Raised when a pure-state measure is asked of a mixed state."""


def fidelity(rho: np.ndarray, psi: np.ndarray) -> float:
    """<psi| rho |psi> for a density matrix against a pure target."""
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    if rho.shape != (psi.size, psi.size):
        raise ValueError(f"dimension mismatch: rho {rho.shape}, psi {psi.shape}")
    val = float(np.real(np.vdot(psi, rho @ psi)))
    return min(1.0, max(0.0, val))


def pure_fidelity(phi: np.ndarray, psi: np.ndarray) -> float:
    """|<phi|psi>|^2 between two kets."""
    return min(1.0, abs(np.vdot(phi, psi)) ** 2)


def partial_trace(rho: np.ndarray, keep: tuple[int, ...],
                  dims: tuple[int, ...]) -> np.ndarray:
    """Reduced density matrix over the kept factors.

    `dims` are the factor dimensions in tensor order, `keep` the factor
    indices to retain (ascending).  Trace is preserved exactly.
    """
    rho = np.asarray(rho, dtype=complex)
    n = len(dims)
    keep = tuple(sorted(keep))
    if not keep or any(k < 0 or k >= n for k in keep) or len(set(keep)) != len(keep):
        raise ValueError(f"invalid factor subset {keep} for {n} factors")
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ValueError(f"rho shape {rho.shape} does not match dims {dims}")
    tensor = rho.reshape(dims + dims)
    src = list(range(2 * n))
    for i in range(n):
        if i not in keep:
            src[n + i] = src[i]  # contract bra with ket index
    out_idx = [i for i in keep] + [n + i for i in keep]
    traced = np.einsum(tensor, src, out_idx)
    d_keep = int(np.prod([dims[i] for i in keep]))
    return traced.reshape(d_keep, d_keep)


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def entanglement_entropy(rho_pair: np.ndarray) -> float:
    """Von Neumann entropy (base 2) of one SQUID's reduced state, in ebits.

    Only defined for a pure pair state; raises MixedStateError when
    tr(rho^2) < 1 - 1e-6 rather than silently reporting entanglement of
    a mixture.
    """
    rho_pair = np.asarray(rho_pair, dtype=complex)
    if rho_pair.shape != (9, 9):
        raise ValueError(f"expected a 9x9 pair density matrix, got {rho_pair.shape}")
    p = purity(rho_pair)
    if p < 1.0 - PURITY_TOL:
        raise MixedStateError(f"pair state is mixed (purity {p:.8f}); entropy undefined")
    rho_a = partial_trace(rho_pair, (0,), (3, 3))
    evals = np.linalg.eigvalsh(rho_a)
    evals = evals[evals > 1e-15]
    return float(-(evals * np.log2(evals)).sum())


def partial_transpose_pair(rho_pair: np.ndarray) -> np.ndarray:
    """Partial transpose on the second qutrit of a 9x9 pair state."""
    t = np.asarray(rho_pair, dtype=complex).reshape(3, 3, 3, 3)
    return t.transpose(0, 3, 2, 1).reshape(9, 9)


def negativity(rho_pair: np.ndarray) -> float:
    """Sum of |negative eigenvalues| of the partially transposed pair state."""
    rho_pair = np.asarray(rho_pair, dtype=complex)
    if rho_pair.shape != (9, 9):
        raise ValueError(f"expected a 9x9 pair density matrix, got {rho_pair.shape}")
    evals = np.linalg.eigvalsh(partial_transpose_pair(rho_pair))
    return float(-evals[evals < 0].sum())


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(1/2) || rho - sigma ||_1 for Hermitian inputs."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise ValueError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    evals = np.linalg.eigvalsh(rho - sigma)
    return float(0.5 * np.abs(evals).sum())


def phase_optimized_fidelity(rho_pair: np.ndarray, target: np.ndarray) -> float:
    """Fidelity to `target` maximized over diagonal local phase unitaries.

    For targets supported on the correlated levels {|jj>}, conjugating
    rho by D1 x D2 (diagonal phases per SQUID) changes only the three
    combined phases gamma_j on the |jj> amplitudes, so the maximum of
    <T| D rho D^dag |T> = (1/3) x^dag M x over unit-modulus x
    (M the 3x3 matrix of (jj),(ll) coherences) is found by the phase
    fixed-point iteration x <- phase(M x), seeded from the dominant
    eigenvector.  Deterministic.
    """
    rho_pair = np.asarray(rho_pair, dtype=complex)
    tgt = np.asarray(target, dtype=complex)
    diag_idx = np.flatnonzero(np.abs(tgt) > 1e-12)
    if not np.all(diag_idx % 4 == 0):  # indices 0, 4, 8 are the |jj> states
        raise ValueError("phase optimization requires a correlated |jj>-type target")
    m = rho_pair[np.ix_([0, 4, 8], [0, 4, 8])]
    weights = np.abs(tgt[[0, 4, 8]])

    def value(x):
        return float(np.real(np.einsum("i,ij,j->", (weights * x).conj(), m, weights * x)))

    evals, evecs = np.linalg.eigh(m)
    seeds = [evecs[:, -1], np.ones(3, dtype=complex)]
    best = 0.0
    for x in seeds:
        x = np.where(np.abs(x) > 1e-15, x / np.maximum(np.abs(x), 1e-300), 1.0)
        for _ in range(200):
            y = m @ (weights * x)
            x_new = np.where(np.abs(y) > 1e-15, y / np.maximum(np.abs(y), 1e-300), x)
            if np.abs(x_new - x).max() < 1e-15:
                x = x_new
                break
            x = x_new
        best = max(best, value(x))
    return min(1.0, max(0.0, best))
