"""Layered variational classifier evaluated on density matrices.

Each layer applies ``R_Z(alpha) R_Y(beta) R_Z(gamma)`` (plus its noise) to every
qubit, then the entangling layer: a chain of CZ gates on ``(0,1), (1,2), ...``. In
partial-QEC mode the CZ gates are noiseless; otherwise each is followed by the
two-qubit composite noise channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import channels, gates, linalg
from .channels import NoiseSpec

SHIFT = np.pi / 2
READOUTS = ("quantum", "classical")
ENTANGLERS = ("chain", "ring", "none")


@dataclass(frozen=True)
class ModelConfig:
    n_qubits: int
    n_layers: int
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    shots: int = 0
    entangler: str = "chain"
    readout: str = "quantum"
    num_classes: int = 10

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_layers < 0:
            raise ValueError("n_qubits must be >= 1 and n_layers >= 0")
        if self.entangler not in ENTANGLERS:
            raise ValueError(f"unknown entangler {self.entangler!r}")
        if self.entangler != "none" and self.n_qubits < 2:
            raise ValueError("an entangling layer needs at least two qubits")
        if self.readout not in READOUTS:
            raise ValueError(f"unknown readout {self.readout!r}")
        if self.shots < 0:
            raise ValueError("shots must be non-negative")
        if self.num_classes < 2:
            raise ValueError("num_classes must be at least 2")
        if self.readout == "quantum" and self.num_classes > self.n_qubits:
            raise ValueError(
                f"quantum readout reads one qubit per class: {self.num_classes} classes "
                f"need a classical layer with {self.n_qubits} qubits")


@dataclass
class CircuitParams:
    """Euler angles ``thetas[l, m] = (alpha, beta, gamma)`` and optional readout layer."""

    thetas: np.ndarray
    weights: np.ndarray | None = None
    biases: np.ndarray | None = None

    def __post_init__(self):
        self.thetas = np.asarray(self.thetas, dtype=np.float64)
        if self.thetas.ndim != 3 or self.thetas.shape[2] != 3:
            raise ValueError(f"thetas must have shape (L, n, 3), got {self.thetas.shape}")
        if (self.weights is None) != (self.biases is None):
            raise ValueError("weights and biases go together")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=np.float64)
            self.biases = np.asarray(self.biases, dtype=np.float64)

    @property
    def n_quantum(self) -> int:
        return self.thetas.size

    @property
    def has_classical(self) -> bool:
        return self.weights is not None

    def to_vector(self) -> np.ndarray:
        parts = [self.thetas.ravel()]
        if self.has_classical:
            parts += [self.weights.ravel(), self.biases.ravel()]
        return np.concatenate(parts)

    def with_vector(self, v: np.ndarray) -> "CircuitParams":
        v = np.asarray(v, dtype=np.float64)
        nq = self.n_quantum
        thetas = v[:nq].reshape(self.thetas.shape)
        if not self.has_classical:
            return CircuitParams(thetas)
        nw = self.weights.size
        return CircuitParams(thetas, v[nq:nq + nw].reshape(self.weights.shape), v[nq + nw:])

    def copy(self) -> "CircuitParams":
        return self.with_vector(self.to_vector().copy())

    @classmethod
    def init(cls, cfg: ModelConfig, rng: np.random.Generator) -> "CircuitParams":
        """Angles uniform on (-pi, pi); readout layer starts as the identity map."""
        thetas = rng.uniform(-np.pi, np.pi, size=(cfg.n_layers, cfg.n_qubits, 3))
        if cfg.readout == "classical":
            return cls(thetas, np.eye(cfg.num_classes, cfg.n_qubits), np.zeros(cfg.num_classes))
        return cls(thetas)


@dataclass(frozen=True)
class Prediction:
    z_values: np.ndarray
    probs: np.ndarray
    label: int


# --- measurement ---------------------------------------------------------------------

def z_signs(n: int) -> np.ndarray:
    """``signs[j, i]`` = eigenvalue of ``Z_j`` on basis state ``i``."""
    idx = np.arange(2**n)
    bits = (idx[None, :] >> (n - 1 - np.arange(n))[:, None]) & 1
    return 1.0 - 2.0 * bits


def z_expectations(rho: np.ndarray) -> np.ndarray:
    """``tr(Z_j rho)`` for every qubit, clamped to [-1, 1]; batches allowed."""
    n = linalg.num_qubits(rho.shape[-1])
    diag = np.real(np.diagonal(rho, axis1=-2, axis2=-1))
    return np.clip(diag @ z_signs(n).T, -1.0, 1.0)


def sample_expectations(z: np.ndarray, shots: int, rng) -> np.ndarray:
    """Per-qubit binomial estimate of ``<Z>`` from ``shots`` measurements."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = np.random.default_rng(rng)
    p0 = np.clip((1.0 + np.asarray(z, dtype=np.float64)) / 2.0, 0.0, 1.0)
    return 2.0 * rng.binomial(shots, p0) / shots - 1.0


def sample_expectations_joint(rho: np.ndarray, shots: int, rng) -> np.ndarray:
    """Estimate ``<Z_j>`` from joint samples of all qubits (validation path)."""
    n = linalg.num_qubits(rho.shape[-1])
    rng = np.random.default_rng(rng)
    probs = np.clip(np.real(np.diagonal(rho)), 0.0, None)
    counts = rng.multinomial(shots, probs / probs.sum())
    return z_signs(n) @ counts / shots


def softmax(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(x - x.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def logits(z: np.ndarray, params: CircuitParams, cfg: ModelConfig) -> np.ndarray:
    z = np.clip(np.asarray(z, dtype=np.float64), -1.0, 1.0)
    if z.shape[-1] != cfg.n_qubits:
        raise ValueError(f"expected {cfg.n_qubits} expectation values, got {z.shape[-1]}")
    if cfg.readout == "classical":
        if not params.has_classical:
            raise ValueError("classical readout needs weights and biases")
        return z @ params.weights.T + params.biases
    return z[..., :cfg.num_classes]


def predict(z_est: np.ndarray, params: CircuitParams, cfg: ModelConfig) -> Prediction:
    """Softmax class probabilities; ties go to the lowest index."""
    z = np.clip(np.asarray(z_est, dtype=np.float64), -1.0, 1.0)
    probs = softmax(logits(z, params, cfg))
    return Prediction(z, probs, int(np.argmax(probs)))


# --- circuit -------------------------------------------------------------------------

def _batched_unitary_superop(u: np.ndarray) -> np.ndarray:
    s = np.conj(u)[..., :, None, :, None] * u[..., None, :, None, :]
    return s.reshape(u.shape[:-2] + (4, 4))


def _rz_batch(theta: np.ndarray) -> np.ndarray:
    out = np.zeros(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(-0.5j * theta)
    out[..., 1, 1] = np.exp(0.5j * theta)
    return out


def _ry_batch(theta: np.ndarray) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0], out[..., 0, 1], out[..., 1, 0], out[..., 1, 1] = c, -s, s, c
    return out


class Circuit:
    """Compiled form of a :class:`ModelConfig` (noise superoperators, entangler)."""

    def __init__(self, cfg: ModelConfig):
        self.cfg = cfg
        self.n = cfg.n_qubits
        self.dim = 2**self.n
        self.factor_noise = channels.factor_noise_superop(cfg.noise)
        self.gate_noise = channels.gate_noise_superop(cfg.noise)
        self.pairs = self._entangler_pairs()
        self.two_qubit = [channels.two_qubit_noise_channel(cfg.noise, a, b, self.n)
                          for a, b in self.pairs] if cfg.noise.two_qubit else []

    def _entangler_pairs(self) -> list[tuple[int, int]]:
        if self.cfg.entangler == "none":
            return []
        pairs = [(q, q + 1) for q in range(self.n - 1)]
        if self.cfg.entangler == "ring" and self.n > 2:
            pairs.append((self.n - 1, 0))
        return pairs

    @cached_property
    def _cz_phase(self) -> np.ndarray:
        """Outer product of the diagonal of the full CZ layer."""
        signs = z_signs(self.n)
        d = np.ones(self.dim)
        for a, b in self.pairs:
            d = d * np.where((signs[a] < 0) & (signs[b] < 0), -1.0, 1.0)
        return np.outer(d, d)

    @cached_property
    def _cz_single(self) -> list[np.ndarray]:
        signs = z_signs(self.n)
        out = []
        for a, b in self.pairs:
            d = np.where((signs[a] < 0) & (signs[b] < 0), -1.0, 1.0)
            out.append(np.outer(d, d))
        return out

    def block_superops(self, thetas: np.ndarray) -> np.ndarray:
        """Superoperator of one noisy rotation for every angle triple in ``thetas[..., 3]``."""
        thetas = np.asarray(thetas, dtype=np.float64)
        a_alpha = _batched_unitary_superop(_rz_batch(thetas[..., 0]))
        a_beta = _batched_unitary_superop(_ry_batch(thetas[..., 1]))
        a_gamma = _batched_unitary_superop(_rz_batch(thetas[..., 2]))
        f = self.factor_noise
        return self.gate_noise @ f @ a_alpha @ f @ a_beta @ f @ a_gamma

    def shifted_block_superops(self, thetas: np.ndarray) -> np.ndarray:
        """``out[..., k, s]`` is the block with angle ``k`` shifted by ``+pi/2`` (s=0)
        or ``-pi/2`` (s=1)."""
        thetas = np.asarray(thetas, dtype=np.float64)
        shifted = np.repeat(thetas[..., None, None, :], 3, axis=-3).repeat(2, axis=-2)
        for k in range(3):
            shifted[..., k, 0, k] += SHIFT
            shifted[..., k, 1, k] -= SHIFT
        return self.block_superops(shifted)

    def entangle(self, rho: np.ndarray) -> np.ndarray:
        if not self.pairs:
            return rho
        if not self.two_qubit:
            return rho * self._cz_phase
        for phase, ch in zip(self._cz_single, self.two_qubit):
            rho = ch.apply(rho * phase, self.n)
        return rho

    def entangle_adjoint(self, obs: np.ndarray) -> np.ndarray:
        if not self.pairs:
            return obs
        if not self.two_qubit:
            return obs * self._cz_phase
        for phase, ch in zip(reversed(self._cz_single), reversed(self.two_qubit)):
            obs = ch.adjoint_apply(obs, self.n) * phase
        return obs

    def _layer(self, rho: np.ndarray, blocks: np.ndarray) -> np.ndarray:
        for m in range(self.n):
            rho = linalg.apply_superop(rho, blocks[m], [m], self.n)
        return self.entangle(rho)

    def forward(self, rho0: np.ndarray, thetas: np.ndarray) -> np.ndarray:
        """Evolve (a batch of) input density matrices through the noisy circuit."""
        rho = np.asarray(rho0)
        if rho.shape[-2:] != (self.dim, self.dim):
            raise ValueError(f"state of shape {rho.shape} does not match {self.n} qubits")
        if thetas.shape != (self.cfg.n_layers, self.n, 3):
            raise ValueError(f"thetas shape {thetas.shape} does not match the model")
        blocks = self.block_superops(thetas)
        for l in range(self.cfg.n_layers):
            rho = self._layer(rho, blocks[l])
        return rho

    def shifted_expectations(self, rho0: np.ndarray, thetas: np.ndarray):
        """Exact ``<Z_j>`` of the circuit and of every parameter-shifted circuit.

        Returns ``(z, z_shift)`` with ``z`` of shape ``(B, n)`` and ``z_shift`` of shape
        ``(B, L, n, 3, 2, n)`` where axis -2 selects the ``+pi/2`` / ``-pi/2`` shift.

        The shifted values are obtained from one forward sweep over the states and one
        backward sweep over the Heisenberg-picture observables; each equals the output
        of running the shifted circuit itself.
        """
        rho = np.asarray(rho0)
        if rho.ndim == 2:
            rho = rho[None]
        n, layers = self.n, self.cfg.n_layers
        blocks = self.block_superops(thetas)
        shifted = self.shifted_block_superops(thetas)
        checkpoints = []
        for l in range(layers):
            checkpoints.append(rho)
            rho = self._layer(rho, blocks[l])
        z = z_expectations(rho)

        obs = np.zeros((n, self.dim, self.dim), dtype=complex)
        signs = z_signs(n)
        for j in range(n):
            obs[j][np.diag_indices(self.dim)] = signs[j]
        z_shift = np.empty((rho.shape[0], layers, n, 3, 2, n))
        for l in reversed(range(layers)):
            obs = self.entangle_adjoint(obs)
            inputs = []
            r = checkpoints[l]
            for m in range(n):
                inputs.append(r)
                r = linalg.apply_superop(r, blocks[l, m], [m], n)
            for m in reversed(range(n)):
                k = linalg.local_overlap(obs, inputs[m], [m], n)
                z_shift[:, l, m] = np.real(np.einsum("ksac,bjac->bksj", shifted[l, m], k))
                obs = linalg.apply_superop(obs, blocks[l, m].conj().T, [m], n)
        return z, np.clip(z_shift, -1.0, 1.0)


def forward(rho0: np.ndarray, params: CircuitParams, cfg: ModelConfig) -> np.ndarray:
    return Circuit(cfg).forward(rho0, params.thetas)


def encode_states(psi: np.ndarray) -> np.ndarray:
    """Density matrices of encoded pure states (batch along axis 0)."""
    return linalg.pure_density(psi)


def phase_compensated(thetas: np.ndarray, mu: float, per_factor: bool = True) -> np.ndarray:
    """Angles that undo a mean Z over-rotation ``mu`` after every rotation factor.

    ``R_Z(mu)`` commutes with dephasing, so the offsets fold into the Z angles: after
    ``R_Z(gamma)`` one offset joins ``gamma``; the ones after ``R_Y(beta)`` and
    ``R_Z(alpha)`` both join ``alpha``. With one offset per gate only ``alpha`` moves.
    """
    out = np.array(thetas, dtype=np.float64, copy=True)
    if per_factor:
        out[..., 2] -= mu
        out[..., 0] -= 2 * mu
    else:
        out[..., 0] -= mu
    return out
