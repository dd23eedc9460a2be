"""Dense linear algebra for small density-matrix simulations.

Conventions used throughout the package:

* Qubit 0 is the leftmost tensor factor (most significant bit of a basis index).
* Density matrices are vectorized by column stacking, ``vec(rho)[i + D*j] = rho[i, j]``,
  so that ``vec(A @ rho @ B) = (B.T kron A) @ vec(rho)``.
* Arrays may carry leading batch axes; the last two axes are the matrix axes.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.linalg

ATOL = 1e-12


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    out = np.asarray(ops[0])
    for op in ops[1:]:
        op = np.asarray(op)
        if out.size == 0 or op.size == 0:
            raise ValueError("kron operands must be non-empty")
        out = np.kron(out, op)
    return out


def matexp(a: np.ndarray) -> np.ndarray:
    """Matrix exponential (Pade approximation with scaling and squaring)."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matexp needs a square matrix, got shape {a.shape}")
    return scipy.linalg.expm(a)


def allclose(a: np.ndarray, b: np.ndarray, atol: float) -> bool:
    """Entrywise comparison with an explicit absolute tolerance."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a.shape == b.shape and bool(np.all(np.abs(a - b) <= atol))


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization of a square matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"vectorize needs a square matrix, got shape {rho.shape}")
    return rho.reshape(-1, order="F")


def devectorize(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v).ravel()
    dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise ValueError(f"length {v.size} is not a perfect square")
    return v.reshape(dim, dim, order="F")


def unitary_superop(u: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> u rho u^dagger`` in the column-stacking basis."""
    return np.kron(np.conj(u), u)


def kraus_superop(ops: Sequence[np.ndarray]) -> np.ndarray:
    return sum(np.kron(np.conj(e), e) for e in ops)


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def _check_targets(targets: Sequence[int], n: int) -> list[int]:
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target qubits {targets}")
    if any(t < 0 or t >= n for t in targets):
        raise ValueError(f"targets {targets} out of range for {n} qubits")
    return targets


def embed_local(op: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Full ``2^n x 2^n`` operator acting as ``op`` on ``targets`` (in that order).

    ``targets[0]`` is the most significant factor of ``op``.
    """
    op = np.asarray(op)
    targets = _check_targets(targets, n)
    k = len(targets)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator shape {op.shape} does not match {k} target qubits")
    rest = [q for q in range(n) if q not in targets]
    full = np.kron(op, np.eye(2 ** len(rest)))
    # axes of `full` are ordered (targets..., rest...); permute back to (0..n-1)
    order = targets + rest
    perm = np.argsort(order)
    t = full.reshape((2,) * (2 * n))
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(2**n, 2**n)


def apply_superop(rho: np.ndarray, superop: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Apply a local superoperator to (a batch of) density matrices.

    ``superop`` acts on the column-stacked vectorization of the reduced operator on
    ``targets``. The result has the same shape as ``rho``.
    """
    targets = _check_targets(targets, n)
    k = len(targets)
    if superop.shape != (4**k, 4**k):
        raise ValueError(f"superoperator shape {superop.shape} does not match {k} qubits")
    batch = rho.shape[:-2]
    nb = len(batch)
    t = rho.reshape(batch + (2,) * (2 * n))
    src = [nb + n + q for q in targets] + [nb + q for q in targets]
    dst = list(range(nb, nb + 2 * k))
    t = np.moveaxis(t, src, dst)
    moved_shape = t.shape
    t = superop @ t.reshape(batch + (4**k, -1))
    t = np.moveaxis(t.reshape(moved_shape), dst, src)
    return t.reshape(rho.shape)


def local_overlap(o: np.ndarray, rho: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Contraction matrix ``K`` with ``tr(O S(rho)) = sum(S * K)`` for local superops ``S``.

    ``o`` has shape ``(..., m, D, D)`` (``m`` Hermitian observables) and ``rho`` has
    shape ``(..., D, D)``; leading axes broadcast. Returns ``(..., m, 4^k, 4^k)``.
    """
    targets = _check_targets(targets, n)
    k = len(targets)
    src = [n + q for q in targets] + list(targets)

    def flat(x):
        lead = x.ndim - 2
        t = x.reshape(x.shape[:lead] + (2,) * (2 * n))
        t = np.moveaxis(t, [lead + s for s in src], list(range(lead, lead + 2 * k)))
        return t.reshape(x.shape[:lead] + (4**k, -1))

    ov = flat(o)
    rv = flat(rho)
    return np.conj(ov) @ np.swapaxes(rv, -1, -2)[..., None, :, :]


def apply_unitary(rho: np.ndarray, u: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    return apply_superop(rho, unitary_superop(u), targets, n)


def pure_density(psi: np.ndarray) -> np.ndarray:
    """``|psi><psi|`` for a state vector or a batch of state vectors."""
    psi = np.asarray(psi)
    return psi[..., :, None] * np.conj(psi[..., None, :])


def maximally_mixed(n: int) -> np.ndarray:
    return np.eye(2**n, dtype=complex) / 2**n


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of ``a - b`` for Hermitian arguments."""
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def is_density_matrix(rho: np.ndarray, herm_tol: float = 1e-12, trace_tol: float = 1e-10,
                      psd_tol: float = 1e-9) -> bool:
    """Hermitian, unit-trace, numerically positive semidefinite."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if np.max(np.abs(rho - dagger(rho)), initial=0.0) > herm_tol:
        return False
    if abs(np.trace(rho) - 1) > trace_tol:
        return False
    herm = 0.5 * (rho + dagger(rho))
    return bool(np.linalg.eigvalsh(herm).min() >= -psd_tol)


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from a Ginibre ensemble."""
    dim = 2**n
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
