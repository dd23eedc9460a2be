"""Cross-entropy training of the classifier with parameter-shift gradients and ADAM."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from . import data as datamod
from .vqc import Circuit, CircuitParams, ModelConfig, logits, sample_expectations, softmax

log = logging.getLogger(__name__)

PROB_FLOOR = 1e-12
GRAD_METHODS = ("parameter_shift", "finite_difference")
FD_STEP = 1e-4


class NumericalError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.005
    batch_size: int = 50
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_images: int = 15000
    eval_every: int = 500
    grad_method: str = "parameter_shift"
    encoding: str = "amplitude"
    seed_params: int = 0
    seed_batches: int = 0
    seed_shots: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("ADAM betas must lie in (0, 1)")
        if self.batch_size < 1 or self.max_images < 1 or self.eval_every < 1:
            raise ValueError("batch_size, max_images and eval_every must be positive")
        if self.grad_method not in GRAD_METHODS:
            raise ValueError(f"unknown grad_method {self.grad_method!r}")
        if self.encoding not in datamod.ENCODERS:
            raise ValueError(f"unknown encoding {self.encoding!r}")


@dataclass(frozen=True)
class TrainRecord:
    images_seen: int
    loss: float
    mean_sq_grad: float
    classical_mean_sq_grad: float | None
    test_success_rate: float
    wall_seconds: float


@dataclass
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(np.zeros(size), np.zeros(size), 0)


@dataclass
class TrainResult:
    records: list[TrainRecord]
    params: CircuitParams
    step_loss: list[float] = field(default_factory=list)
    step_mean_sq_grad: list[float] = field(default_factory=list)
    step_classical_mean_sq_grad: list[float] = field(default_factory=list)
    clamped_probs: int = 0

    @property
    def mean_sq_grad(self) -> float:
        """Mean squared gradient averaged over all iterations."""
        return float(np.mean(self.step_mean_sq_grad))


class LossCounter:
    """Counts probabilities clamped at the floor inside :func:`cross_entropy`."""

    clamped = 0


def cross_entropy(probs: np.ndarray, label) -> np.ndarray:
    """``-log probs[label]`` (batched over leading axes)."""
    probs = np.asarray(probs, dtype=np.float64)
    label = np.asarray(label)
    p = np.take_along_axis(probs, label[..., None], axis=-1)[..., 0]
    low = p < PROB_FLOOR
    if np.any(low):
        LossCounter.clamped += int(np.sum(low))
        p = np.maximum(p, PROB_FLOOR)
    out = -np.log(p)
    return float(out) if out.ndim == 0 else out


def adam_step(state: AdamState, params: np.ndarray, grad: np.ndarray,
              cfg: TrainConfig) -> tuple[AdamState, np.ndarray]:
    """Bias-corrected ADAM; returns new state and parameters without mutating inputs."""
    step = state.step + 1
    m = cfg.beta1 * state.first_moment + (1 - cfg.beta1) * grad
    v = cfg.beta2 * state.second_moment + (1 - cfg.beta2) * grad * grad
    m_hat = m / (1 - cfg.beta1**step)
    v_hat = v / (1 - cfg.beta2**step)
    new = params - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
    return AdamState(m, v, step), new


# --- loss and gradients --------------------------------------------------------------

def _loss_from_z(z: np.ndarray, labels: np.ndarray, params: CircuitParams, cfg: ModelConfig):
    probs = softmax(logits(z, params, cfg))
    return cross_entropy(probs, labels), probs


def batch_loss(circuit: Circuit, params: CircuitParams, rho0: np.ndarray,
               labels: np.ndarray) -> float:
    """Mean cross entropy of a batch using exact expectations."""
    z = _z_exact(circuit, rho0, params.thetas)
    return float(np.mean(_loss_from_z(z, labels, params, circuit.cfg)[0]))


def _z_exact(circuit: Circuit, rho0: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    from .vqc import z_expectations
    return z_expectations(circuit.forward(rho0, thetas))


def _sample(z: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    return z if shots == 0 else sample_expectations(z, shots, rng)


def parameter_shift_gradient(circuit: Circuit, params: CircuitParams, rho0: np.ndarray,
                             labels: np.ndarray, rng: np.random.Generator | None = None):
    """Loss and gradient of the batch-mean loss from shifted-circuit expectations.

    Every circuit (unshifted and each ``+-pi/2`` shift) gets its own shot sample. The
    chain rule combines ``dL/dz`` at the sampled unshifted expectations with the
    parameter-shift estimate of ``dz/dtheta``; readout-layer gradients are analytic.
    Returns ``(loss, grad_vector, z_sampled)``.
    """
    cfg = circuit.cfg
    shots = cfg.shots
    if shots and rng is None:
        raise ValueError("shot sampling needs an rng")
    z, z_shift = circuit.shifted_expectations(rho0, params.thetas)
    z = _sample(z, shots, rng)
    z_shift = _sample(z_shift, shots, rng)
    losses, probs = _loss_from_z(z, labels, params, cfg)
    err = probs.copy()
    err[np.arange(len(labels)), labels] -= 1.0  # dL/dlogits
    if cfg.readout == "classical":
        dz = err @ params.weights
    else:
        dz = np.zeros_like(z)
        dz[:, :cfg.num_classes] = err
    dz_dtheta = 0.5 * (z_shift[..., 0, :] - z_shift[..., 1, :])  # (B, L, n, 3, n)
    g_theta = np.einsum("blmkj,bj->lmk", dz_dtheta, dz) / len(labels)
    parts = [g_theta.ravel()]
    if cfg.readout == "classical":
        parts.append((err.T @ z).ravel() / len(labels))
        parts.append(err.mean(axis=0))
    return float(np.mean(losses)), np.concatenate(parts), z


def finite_difference_gradient(circuit: Circuit, params: CircuitParams, rho0: np.ndarray,
                               labels: np.ndarray, step: float = FD_STEP):
    """Central differences of the exact batch-mean loss (test oracle)."""
    v = params.to_vector()
    grad = np.empty_like(v)
    for i in range(v.size):
        hi, lo = v.copy(), v.copy()
        hi[i] += step
        lo[i] -= step
        grad[i] = (batch_loss(circuit, params.with_vector(hi), rho0, labels)
                   - batch_loss(circuit, params.with_vector(lo), rho0, labels)) / (2 * step)
    return batch_loss(circuit, params, rho0, labels), grad


def gradient(params: CircuitParams, rho0: np.ndarray, labels: np.ndarray, cfg: ModelConfig,
             method: str = "parameter_shift", rng=None, circuit: Circuit | None = None):
    circuit = circuit or Circuit(cfg)
    if method == "parameter_shift":
        return parameter_shift_gradient(circuit, params, rho0, labels,
                                        np.random.default_rng(rng) if cfg.shots else None)[1]
    if method == "finite_difference":
        return finite_difference_gradient(circuit, params, rho0, labels)[1]
    raise ValueError(f"unknown gradient method {method!r}")


# --- training loop -------------------------------------------------------------------

def encode(d: datamod.Dataset, idx: np.ndarray, encoding: str) -> np.ndarray:
    from .linalg import pure_density
    return pure_density(datamod.ENCODERS[encoding](d.pixels[idx]))


def check_compatible(model: ModelConfig, tcfg: TrainConfig, d: datamod.Dataset) -> None:
    pixels = d.pixels.shape[1]
    need = datamod.qubits_for(pixels, tcfg.encoding)
    if need != model.n_qubits:
        raise ValueError(f"{pixels} pixels with {tcfg.encoding} encoding need {need} qubits, "
                         f"model has {model.n_qubits}")
    if d.num_classes != model.num_classes:
        raise ValueError(f"dataset has {d.num_classes} classes, model reads out "
                         f"{model.num_classes}")


def success_rate(circuit: Circuit, params: CircuitParams, d: datamod.Dataset,
                 encoding: str, rng: np.random.Generator | None, chunk: int = 50) -> float:
    """Fraction of samples whose argmax prediction matches the label."""
    hits = 0
    for start in range(0, len(d), chunk):
        idx = np.arange(start, min(start + chunk, len(d)))
        z = _z_exact(circuit, encode(d, idx, encoding), params.thetas)
        z = _sample(z, circuit.cfg.shots, rng)
        pred = np.argmax(logits(z, params, circuit.cfg), axis=-1)
        hits += int(np.sum(pred == d.labels[idx]))
    return hits / len(d)


def _batch_stream(d: datamod.Dataset, batch_size: int, seed: int) -> Iterator[np.ndarray]:
    epoch = 0
    while True:
        yield from datamod.batches(d, batch_size, np.random.SeedSequence([seed, epoch]))
        epoch += 1


def train(model: ModelConfig, tcfg: TrainConfig, train_set: datamod.Dataset,
          test_set: datamod.Dataset, params: CircuitParams | None = None,
          on_record: Callable[[TrainRecord], None] | None = None) -> TrainResult:
    """Train on seeded batches until ``max_images`` images have been used.

    A :class:`TrainRecord` is emitted each time ``eval_every`` more images have been
    seen (and at the end). Loss and gradient statistics in a record are those of the
    most recent batch.
    """
    check_compatible(model, tcfg, train_set)
    check_compatible(model, tcfg, test_set)
    circuit = Circuit(model)
    if params is None:
        params = CircuitParams.init(model, np.random.default_rng(tcfg.seed_params))
    vec = params.to_vector()
    nq = params.n_quantum
    adam = AdamState.zeros(vec.size)
    shot_root = np.random.SeedSequence([tcfg.seed_shots, 0])
    eval_root = np.random.SeedSequence([tcfg.seed_shots, 1])
    clamped0 = LossCounter.clamped

    result = TrainResult([], params)
    seen = 0
    next_eval = tcfg.eval_every
    t0 = time.perf_counter()
    stream = _batch_stream(train_set, tcfg.batch_size, tcfg.seed_batches)
    step = 0
    while seen < tcfg.max_images:
        idx = next(stream)[: tcfg.max_images - seen]
        rho0 = encode(train_set, idx, tcfg.encoding)
        labels = train_set.labels[idx]
        current = params.with_vector(vec)
        if tcfg.grad_method == "parameter_shift":
            rng = np.random.default_rng(shot_root.spawn(1)[0]) if model.shots else None
            loss, grad, _ = parameter_shift_gradient(circuit, current, rho0, labels, rng)
        else:
            loss, grad = finite_difference_gradient(circuit, current, rho0, labels)
        if not (np.isfinite(loss) and np.all(np.isfinite(grad))):
            raise NumericalError(f"non-finite loss or gradient at step {step}")
        adam, vec = adam_step(adam, vec, grad, tcfg)
        step += 1
        seen += len(idx)
        msg = float(np.mean(grad**2))
        cmsg = float(np.mean(grad[nq:] ** 2)) if grad.size > nq else None
        result.step_loss.append(loss)
        result.step_mean_sq_grad.append(msg)
        if cmsg is not None:
            result.step_classical_mean_sq_grad.append(cmsg)
        if seen >= next_eval or seen >= tcfg.max_images:
            while next_eval <= seen:
                next_eval += tcfg.eval_every
            rng = np.random.default_rng(eval_root.spawn(1)[0]) if model.shots else None
            rate = success_rate(circuit, params.with_vector(vec), test_set, tcfg.encoding, rng)
            rec = TrainRecord(seen, loss, msg, cmsg, rate, time.perf_counter() - t0)
            result.records.append(rec)
            log.info("images=%d loss=%.4f msg=%.3e success=%.3f", seen, loss, msg, rate)
            if on_record:
                on_record(rec)
    result.params = params.with_vector(vec)
    result.clamped_probs = LossCounter.clamped - clamped0
    return result
