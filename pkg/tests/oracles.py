"""Reference implementations that share no code with the package.

State vectors and dense Kraus sums are built with plain numpy from textbook matrix
definitions, so agreement with the library is evidence rather than a tautology.
"""

from __future__ import annotations

import numpy as np

I2 = np.eye(2)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PY = np.array([[0, -1j], [1j, 0]])
PZ = np.diag([1.0, -1.0]).astype(complex)


def rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def ry(t):
    c, s = np.cos(t / 2), np.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def full_op(op, q, n):
    """Single-qubit ``op`` on qubit ``q`` (qubit 0 leftmost) via a kron chain."""
    out = np.ones((1, 1))
    for k in range(n):
        out = np.kron(out, op if k == q else I2)
    return out


def cz_diag(a, b, n):
    d = np.ones(2**n)
    for i in range(2**n):
        if (i >> (n - 1 - a)) & 1 and (i >> (n - 1 - b)) & 1:
            d[i] = -1
    return d


def chain_pairs(n, ring=False):
    pairs = [(q, q + 1) for q in range(n - 1)]
    if ring and n > 2:
        pairs.append((n - 1, 0))
    return pairs


def statevector_forward(psi, thetas, ring=False):
    psi = np.asarray(psi, dtype=complex)
    n_layers, n, _ = thetas.shape
    for l in range(n_layers):
        for m in range(n):
            a, b, g = thetas[l, m]
            psi = full_op(rz(a) @ ry(b) @ rz(g), m, n) @ psi
        for a, b in chain_pairs(n, ring):
            psi = cz_diag(a, b, n) * psi
    return psi


def z_values(rho):
    n = int(np.log2(rho.shape[0]))
    return np.array([np.real(np.trace(full_op(PZ, j, n) @ rho)) for j in range(n)])


def kraus_apply(rho, ops, q, n):
    out = np.zeros_like(rho)
    for e in ops:
        big = full_op(e, q, n)
        out = out + big @ rho @ big.conj().T
    return out


def depol_ops(p):
    return [np.sqrt(1 - p) * I2, np.sqrt(p / 3) * PX, np.sqrt(p / 3) * PY, np.sqrt(p / 3) * PZ]


def dephase_ops(mu, sigma):
    lam = np.exp(-sigma**2 / 2)
    return [np.sqrt((1 + lam) / 2) * rz(mu), np.sqrt((1 - lam) / 2) * PZ @ rz(mu)]


def thermal_ops(t_tilde, gamma):
    pm = 1 / (1 + np.exp(-2 / t_tilde))
    s = np.sqrt(1 - gamma)
    return [np.sqrt(pm) * np.diag([1, s]), np.sqrt(pm * gamma) * np.array([[0, 1], [0, 0]]),
            np.sqrt(1 - pm) * np.diag([s, 1]), np.sqrt((1 - pm) * gamma) * np.array([[0, 0], [1, 0]])]


def density_forward(rho, thetas, p=0.0, mu=0.0, sigma=0.0, t_tilde=0.01, gamma=0.0):
    """Dense noisy circuit: dephasing after each Euler factor, then depolarizing and
    thermal once per rotation, then a noiseless CZ chain."""
    n_layers, n, _ = thetas.shape
    for l in range(n_layers):
        for m in range(n):
            a, b, g = thetas[l, m]
            for u in (rz(g), ry(b), rz(a)):
                big = full_op(u, m, n)
                rho = big @ rho @ big.conj().T
                if sigma or mu:
                    rho = kraus_apply(rho, dephase_ops(mu, sigma), m, n)
            if p:
                rho = kraus_apply(rho, depol_ops(p), m, n)
            if gamma:
                rho = kraus_apply(rho, thermal_ops(t_tilde, gamma), m, n)
        for a, b in chain_pairs(n):
            d = cz_diag(a, b, n)
            rho = d[:, None] * rho * d[None, :]
    return rho


def random_pure(n, rng):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)
