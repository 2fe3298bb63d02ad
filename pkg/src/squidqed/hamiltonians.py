"""Hamiltonians for two SQUID qutrits coupled to a driven cavity mode.

Unit system: the SQUID-cavity coupling g defines the frequency unit
(g = 1 by default), so all frequencies are quoted in units of g and all
times in 1/g.

Two models are built here:

* the full interaction-picture Hamiltonian: an oscillating
  cavity-exchange term at the detuning delta plus an optional resonant
  classical drive on the 0<->2 transition of both SQUIDs;

* the strong-drive dispersive effective Hamiltonian on the SQUID pair
  alone, with coupling lam = g^2 / (2 delta).  It is valid when
  2*Omega >> delta, g and delta >> g/2, and commutes with the drive
  term, so the joint propagator factors into two exponentials.

Detuning sign convention: the full Hamiltonian carries phase factors
exp(+/- i s delta t) with s = `detuning_sign`.  The default s = -1
(cavity above the 0<->2 transition) is the sign for which second-order
averaging of the full model reproduces `effective_hamiltonian` with
positive lam; s = +1 flips the sign of the effective coupling.  The
flag exists so the convention itself is testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    HilbertLayout,
    annihilation,
    embed,
    kron,
    level_projector,
    squid_lower,
    squid_raise,
)

DEFAULT_DETUNING_SIGN = -1


def default_k(g: float, delta: float) -> int:
    """Smallest integer timing multiplier giving 2*Omega/delta >= 10.

    With Omega pinned to 2*k*lam by the first-window timing constraint,
    2*Omega/delta = 2*k*g^2/delta^2, so k = ceil(5 * delta^2 / g^2).
    """
    return max(1, math.ceil(5.0 * delta * delta / (g * g)))


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters in units of g.

    omega / omega_prime are the classical drive Rabi frequencies for
    the two cavity windows.  Left as None they are pinned by the
    protocol timing constraints (omega = 2*k*lam, omega_prime =
    8*k_prime*lam); an explicit value only affects standalone
    Hamiltonian construction and regime reports, never the certified
    pulse sequence.
    """

    g: float = 1.0
    delta: float = 15.0
    k: int | None = None
    k_prime: int = 1
    nbar: float = 0.0
    n_max: int = 8
    omega: float | None = None
    omega_prime: float | None = None

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError(f"g must be > 0, got {self.g}")
        if self.delta <= 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if self.k is None:
            object.__setattr__(self, "k", default_k(self.g, self.delta))
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        if int(self.k_prime) != self.k_prime or self.k_prime < 1:
            raise ValueError(f"k_prime must be a positive integer, got {self.k_prime}")
        object.__setattr__(self, "k_prime", int(self.k_prime))
        if self.nbar < 0:
            raise ValueError(f"nbar must be >= 0, got {self.nbar}")
        if self.n_max < 2:
            raise ValueError(f"n_max must be >= 2, got {self.n_max}")
        if self.omega is not None and self.omega <= 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        if self.omega_prime is not None and self.omega_prime <= 0:
            raise ValueError(f"omega_prime must be > 0, got {self.omega_prime}")

    @property
    def lam(self) -> float:
        """Dispersive coupling lam = g^2 / (2 delta)."""
        return self.g * self.g / (2.0 * self.delta)

    @property
    def drive_rabi(self) -> float:
        """Window-1 drive Rabi frequency (pinned to 2*k*lam if omega is None)."""
        return self.omega if self.omega is not None else 2.0 * self.k * self.lam

    @property
    def drive_rabi_window2(self) -> float:
        """Window-2 drive Rabi frequency (pinned to 8*k_prime*lam if unset)."""
        if self.omega_prime is not None:
            return self.omega_prime
        return 8.0 * self.k_prime * self.lam

    @property
    def layout(self) -> HilbertLayout:
        return HilbertLayout(self.n_max)


@dataclass(frozen=True)
class RegimeThresholds:
    """How large the dimensionless regime ratios must be to count as 'deep'."""

    drive: float = 10.0
    detuning: float = 10.0


@dataclass(frozen=True)
class RegimeReport:
    ratio_drive: float        # 2 Omega / delta
    ratio_detuning: float     # 2 delta / g
    thresholds: RegimeThresholds = field(default_factory=RegimeThresholds)

    @property
    def regime_ok(self) -> bool:
        return (
            self.ratio_drive >= self.thresholds.drive
            and self.ratio_detuning >= self.thresholds.detuning
        )


def check_regime(
    params: SystemParams,
    thresholds: RegimeThresholds | None = None,
    rabi: float | None = None,
) -> RegimeReport:
    """Report the strong-drive / large-detuning ratios against thresholds.

    `rabi` overrides the drive frequency used for the 2*Omega/delta
    ratio (e.g. to report on a specific protocol window).
    """
    omega = params.drive_rabi if rabi is None else rabi
    return RegimeReport(
        ratio_drive=2.0 * omega / params.delta,
        ratio_detuning=2.0 * params.delta / params.g,
        thresholds=thresholds or RegimeThresholds(),
    )


# --- operator building blocks on the composite space -----------------

def exchange_operator(layout: HilbertLayout) -> np.ndarray:
    """a^dag (S1^- + S2^-) on the composite space.

    This is the constant part of the oscillating cavity coupling; the
    full coupling at time t is g (e^{i s delta t} M + h.c.) with M the
    matrix returned here.
    """
    adag = annihilation(layout.n_max).conj().T
    sm = squid_lower()
    eye3 = np.eye(3, dtype=complex)
    return kron(sm, eye3, adag) + kron(eye3, sm, adag)


def drive_operator(layout: HilbertLayout) -> np.ndarray:
    """Sum of (S^+ + S^-) over both SQUIDs, lifted to the composite space."""
    x = squid_raise() + squid_lower()
    return embed(x, 0, layout) + embed(x, 1, layout)


def full_hamiltonian(
    params: SystemParams,
    t: float,
    drive_on: bool = True,
    detuning_sign: int = DEFAULT_DETUNING_SIGN,
) -> np.ndarray:
    """Interaction-picture Hamiltonian H(t) on the composite space.

    H(t) = g [ e^{i s delta t} a^dag (S1^- + S2^-) + h.c. ]
           + Omega (S1^+ + S1^- + S2^+ + S2^-)   (if drive_on)

    with s = detuning_sign.  Hermitian by construction.
    """
    layout = params.layout
    m = exchange_operator(layout)
    phase = np.exp(1j * detuning_sign * params.delta * t)
    h = params.g * (phase * m + np.conj(phase) * m.conj().T)
    if drive_on:
        h = h + params.drive_rabi * drive_operator(layout)
    return h


def effective_hamiltonian(params: SystemParams) -> np.ndarray:
    """Strong-drive dispersive Hamiltonian on the SQUID pair (9x9).

    H_e = lam [ (1/2) sum_i (|0>_i<0| + |2>_i<2|)
                + (S1^+ S2^+ + S1^+ S2^- + h.c.) ]

    The bracketed coupling equals X1 X2 with X = S^+ + S^-, so H_e acts
    only within the {|0>,|2>} x {|0>,|2>} doublet block plus diagonal
    single-SQUID shifts; level |1> is never coupled to anything.
    """
    eye3 = np.eye(3, dtype=complex)
    p02 = level_projector(0) + level_projector(2)
    x = squid_raise() + squid_lower()
    proj = 0.5 * (np.kron(p02, eye3) + np.kron(eye3, p02))
    return params.lam * (proj + np.kron(x, x))


def symmetric_drive(omega: float) -> np.ndarray:
    """Omega sum_i (S_i^+ + S_i^-) on the SQUID pair (9x9).

    Commutes with `effective_hamiltonian` for any (omega, lam): the
    drive and the dispersive coupling act on the same 0<->2 doublets,
    so the two-exponential factorization of the joint propagator is
    exact.
    """
    eye3 = np.eye(3, dtype=complex)
    x = squid_raise() + squid_lower()
    return omega * (np.kron(x, eye3) + np.kron(eye3, x))


_TRANSITIONS = {"01": (0, 1), "02": (0, 2)}


def single_squid_drive(omega: float, target: int, transition: str) -> np.ndarray:
    """Resonant classical drive on one SQUID, identity on the other (9x9).

    Omega (|u><v| + |v><u|) with (u, v) the levels of `transition`
    ("01" or "02"), placed on SQUID `target` (0 or 1).
    """
    if transition not in _TRANSITIONS:
        raise ValueError(f"unknown transition {transition!r}, expected '01' or '02'")
    if target not in (0, 1):
        raise ValueError(f"target must be 0 or 1, got {target}")
    u, v = _TRANSITIONS[transition]
    h3 = np.zeros((3, 3), dtype=complex)
    h3[u, v] = 1.0
    h3[v, u] = 1.0
    h3 *= omega
    eye3 = np.eye(3, dtype=complex)
    return np.kron(h3, eye3) if target == 0 else np.kron(eye3, h3)
