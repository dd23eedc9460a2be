"""Noise channels for single- and two-qubit gates.

Channels are represented either by Kraus operators (:class:`KrausChannel`) or by a
local superoperator in the column-stacking basis (:class:`SuperopChannel`). The
Lindblad generators returned here are superoperators too, so they can be summed
before exponentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import gates, linalg

MAX_DEPOL = 0.75

# per-qubit depolarizing strength for ibm_torino two-qubit gates
TORINO_P_DEPOL_2Q = 0.0019


@dataclass(frozen=True)
class KrausChannel:
    operators: tuple[np.ndarray, ...]
    arity: int = 1

    def __post_init__(self):
        dim = 2**self.arity
        for e in self.operators:
            if e.shape != (dim, dim):
                raise ValueError(f"Kraus operator of shape {e.shape} on {self.arity} qubits")

    def completeness_error(self) -> float:
        total = sum(linalg.dagger(e) @ e for e in self.operators)
        return float(np.max(np.abs(total - np.eye(2**self.arity))))

    def superop(self) -> np.ndarray:
        return linalg.kraus_superop(self.operators)

    def __call__(self, rho: np.ndarray, targets: Sequence[int] | None = None) -> np.ndarray:
        return apply_channel(rho, self, targets)


@dataclass(frozen=True)
class SuperopChannel:
    """A channel given as a superoperator on an ordered set of support qubits."""

    matrix: np.ndarray
    support: tuple[int, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def apply(self, rho: np.ndarray, n: int) -> np.ndarray:
        return linalg.apply_superop(rho, self.matrix, self.support, n)

    def adjoint_apply(self, obs: np.ndarray, n: int) -> np.ndarray:
        """Heisenberg-picture action on observables."""
        return linalg.apply_superop(obs, self.matrix.conj().T, self.support, n)


@dataclass(frozen=True)
class NoiseSpec:
    """Which noise follows each gate, and how strong it is.

    Single-qubit noise (after each parametrized rotation):
      ``p_depol``: depolarizing probability; ``mu``/``sigma``: Gaussian over-rotation
      about Z (phase damping); ``t_tilde``/``gamma``: thermal damping at generalized
      temperature ``2 k_B T / (hbar omega)`` with decay probability ``gamma``.
    Two-qubit noise (after each entangler, only when ``two_qubit`` is set):
      per-qubit depolarizing ``p_depol_2q`` plus ZZ crosstalk of angle ``alpha``.
    """

    p_depol: float = 0.0
    mu: float = 0.0
    sigma: float = 0.0
    t_tilde: float = 0.01
    gamma: float = 0.0
    two_qubit: bool = False
    p_depol_2q: float = TORINO_P_DEPOL_2Q
    alpha: float = gates.CROSSTALK_ALPHA
    phase_damping_per_factor: bool = True
    depol_per_factor: bool = False

    def __post_init__(self):
        for name in ("p_depol", "p_depol_2q"):
            p = getattr(self, name)
            if not 0.0 <= p <= MAX_DEPOL:
                raise ValueError(f"{name}={p} outside [0, 3/4]")
        if self.sigma < 0:
            raise ValueError(f"sigma={self.sigma} must be non-negative")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma={self.gamma} outside [0, 1]")
        if not self.t_tilde > 0:
            raise ValueError(f"t_tilde={self.t_tilde} must be positive")
        for name in ("mu", "alpha"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def has_phase_damping(self) -> bool:
        return self.sigma > 0 or self.mu != 0

    @property
    def has_thermal(self) -> bool:
        return self.gamma > 0

    @property
    def is_noiseless(self) -> bool:
        return not (self.p_depol or self.has_phase_damping or self.has_thermal or self.two_qubit)


def _prob(name: str, p: float, hi: float = 1.0) -> float:
    if not 0.0 <= p <= hi:
        raise ValueError(f"{name}={p} outside [0, {hi}]")
    return float(p)


def identity_channel(arity: int = 1) -> KrausChannel:
    return KrausChannel((np.eye(2**arity, dtype=complex),), arity)


def depolarizing_kraus(p: float) -> KrausChannel:
    p = _prob("p", p, MAX_DEPOL)
    return KrausChannel((
        math.sqrt(1 - p) * gates.I2,
        math.sqrt(p / 3) * gates.X,
        math.sqrt(p / 3) * gates.Y,
        math.sqrt(p / 3) * gates.Z,
    ))


def dephasing_factor(mu: float, sigma: float) -> complex:
    """Gaussian characteristic function ``E[exp(-i theta)]``, theta ~ N(mu, sigma^2)."""
    return complex(np.exp(-1j * mu - 0.5 * sigma * sigma))


def gaussian_phase_damping_superop(mu: float, sigma: float) -> np.ndarray:
    if sigma < 0:
        raise ValueError(f"sigma={sigma} must be non-negative")
    f = dephasing_factor(mu, sigma)
    # column-stacked order (rho00, rho10, rho01, rho11)
    return np.diag([1.0, np.conj(f), f, 1.0]).astype(complex)


def gaussian_phase_damping_kraus(mu: float, sigma: float) -> KrausChannel:
    """Two-element Kraus form of the same channel."""
    if sigma < 0:
        raise ValueError(f"sigma={sigma} must be non-negative")
    lam = math.exp(-0.5 * sigma * sigma)
    r = gates.rz(mu)
    return KrausChannel((math.sqrt((1 + lam) / 2) * r, math.sqrt((1 - lam) / 2) * gates.Z @ r))


def gaussian_phase_damping_apply(rho: np.ndarray, mu: float, sigma: float, target: int) -> np.ndarray:
    """Average of ``R_Z(theta) rho R_Z(theta)^dagger`` over theta ~ N(mu, sigma^2)."""
    n = linalg.num_qubits(rho.shape[-1])
    return linalg.apply_superop(rho, gaussian_phase_damping_superop(mu, sigma), [target], n)


def decay_probability(t_tilde: float) -> float:
    """Spontaneous-decay probability ``e^{1/T} / (2 cosh(1/T))``, overflow-safe."""
    if not t_tilde > 0:
        raise ValueError(f"t_tilde={t_tilde} must be positive")
    return 1.0 / (1.0 + math.exp(-2.0 / t_tilde))


def thermal_kraus(t_tilde: float, gamma: float) -> KrausChannel:
    gamma = _prob("gamma", gamma)
    pm = decay_probability(t_tilde)
    p0 = np.diag([1, 0]).astype(complex)
    p1 = np.diag([0, 1]).astype(complex)
    s = math.sqrt(1 - gamma)
    return KrausChannel((
        math.sqrt(pm) * (p0 + s * p1),
        math.sqrt(pm * gamma) * gates.SIGMA_MINUS,
        math.sqrt(1 - pm) * (s * p0 + p1),
        math.sqrt((1 - pm) * gamma) * gates.SIGMA_PLUS,
    ))


def apply_channel(rho: np.ndarray, ch: KrausChannel, targets: Sequence[int] | None = None) -> np.ndarray:
    """``sum_i E_i rho E_i^dagger`` with the Kraus operators embedded on ``targets``."""
    n = linalg.num_qubits(rho.shape[-1])
    targets = list(range(ch.arity)) if targets is None else list(targets)
    if len(targets) != ch.arity:
        raise ValueError(f"channel arity {ch.arity} does not match targets {targets}")
    return linalg.apply_superop(rho, ch.superop(), targets, n)


# --- Lindblad generators -------------------------------------------------------------

def _hamiltonian_generator(h: np.ndarray) -> np.ndarray:
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


def _dissipator(jump: np.ndarray, rate: float) -> np.ndarray:
    eye = np.eye(jump.shape[0])
    jj = linalg.dagger(jump) @ jump
    return rate * (np.kron(np.conj(jump), jump) - 0.5 * np.kron(eye, jj) - 0.5 * np.kron(jj.T, eye))


def depolarizing_rate(p: float) -> float:
    """Rate ``k`` with ``exp(L)`` equal to the Kraus depolarizing channel.

    The generator ``k sum_P (P . P - .)`` scales every non-identity Pauli by
    ``exp(-4k)``, and the channel scales them by ``1 - 4p/3``.
    """
    p = _prob("p", p, MAX_DEPOL)
    if p >= MAX_DEPOL:
        raise ValueError("the fully depolarizing point has no finite generator")
    return -math.log1p(-4.0 * p / 3.0) / 4.0


def lindblad_depolarizing(p: float, target: int = 0, n: int = 1) -> np.ndarray:
    """Depolarizing generator on qubit ``target`` of an ``n``-qubit support."""
    rate = depolarizing_rate(p)
    out = np.zeros((4**n, 4**n), dtype=complex)
    if rate == 0:
        return out
    for pauli in (gates.X, gates.Y, gates.Z):
        out += _dissipator(linalg.embed_local(pauli, [target], n), rate)
    return out


def lindblad_crosstalk(alpha: float, pair: Sequence[int] = (0, 1), n: int = 2) -> np.ndarray:
    """Generator of conjugation by ``exp(-i alpha Z Z)`` on ``pair``."""
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    zz = linalg.embed_local(np.kron(gates.Z, gates.Z), list(pair), n)
    return _hamiltonian_generator(alpha * zz)


def crosstalk_pairs(q1: int, q2: int, n: int) -> list[tuple[int, int]]:
    """Neighbour pairs ``(q1-1, q1)`` and ``(q2, q2+1)`` that exist on an open chain."""
    pairs = []
    if q1 - 1 >= 0 and q1 - 1 != q2:
        pairs.append((q1 - 1, q1))
    if q2 + 1 < n and q2 + 1 != q1:
        pairs.append((q2, q2 + 1))
    return pairs


def two_qubit_noise_channel(spec: NoiseSpec, q1: int, q2: int, n: int) -> SuperopChannel:
    """``exp`` of the summed depolarizing and crosstalk generators around gate ``(q1, q2)``."""
    if q1 == q2 or not (0 <= q1 < n and 0 <= q2 < n):
        raise ValueError(f"invalid gate qubits ({q1}, {q2}) for n={n}")
    return _two_qubit_noise(spec.p_depol_2q, spec.alpha, q1, q2, n)


@lru_cache(maxsize=256)
def _two_qubit_noise(p: float, alpha: float, q1: int, q2: int, n: int) -> SuperopChannel:
    pairs = crosstalk_pairs(q1, q2, n)
    support = sorted({q1, q2, *[q for pr in pairs for q in pr]})
    local = {q: i for i, q in enumerate(support)}
    k = len(support)
    gen = lindblad_depolarizing(p, local[q1], k) + lindblad_depolarizing(p, local[q2], k)
    if alpha:
        for a, b in pairs:
            gen = gen + lindblad_crosstalk(alpha, (local[a], local[b]), k)
    mat = linalg.matexp(gen)
    mat.setflags(write=False)
    return SuperopChannel(mat, tuple(support), {"crosstalk_pairs": pairs})


# --- single-qubit gate noise, as superoperators --------------------------------------

def _compose(*superops: np.ndarray) -> np.ndarray:
    """Superoperator of applying the arguments left to right."""
    out = np.eye(4, dtype=complex)
    for s in superops:
        out = s @ out
    return out


def factor_noise_superop(spec: NoiseSpec) -> np.ndarray:
    """Noise applied after each Euler factor of a rotation."""
    parts = []
    if spec.has_phase_damping and spec.phase_damping_per_factor:
        parts.append(gaussian_phase_damping_superop(spec.mu, spec.sigma))
    if spec.p_depol and spec.depol_per_factor:
        parts.append(depolarizing_kraus(spec.p_depol).superop())
    return _compose(*parts)


def gate_noise_superop(spec: NoiseSpec) -> np.ndarray:
    """Noise applied once after the whole rotation ``R_Z R_Y R_Z``."""
    parts = []
    if spec.has_phase_damping and not spec.phase_damping_per_factor:
        parts.append(gaussian_phase_damping_superop(spec.mu, spec.sigma))
    if spec.p_depol and not spec.depol_per_factor:
        parts.append(depolarizing_kraus(spec.p_depol).superop())
    if spec.has_thermal:
        parts.append(thermal_kraus(spec.t_tilde, spec.gamma).superop())
    return _compose(*parts)
