"""Single-qubit rotations and the fixed two-qubit unitaries of the classifier circuit.

All rotations use the half-angle convention ``R_A(theta) = exp(-i theta A / 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
SIGMA_PLUS = SIGMA_MINUS.T.copy()

# ibm_torino ZZ crosstalk angle used for the two-qubit noise model
CROSSTALK_ALPHA = 1.16e-3


@dataclass(frozen=True)
class EulerAngles:
    """Angles of ``R_Z(alpha) R_Y(beta) R_Z(gamma)``; ``gamma`` acts first."""

    alpha: float
    beta: float
    gamma: float


@dataclass(frozen=True)
class AxisAngle:
    axis: tuple[float, float, float]
    theta: float

    def __post_init__(self):
        if abs(np.linalg.norm(self.axis) - 1.0) > 1e-12:
            raise ValueError(f"rotation axis {self.axis} is not a unit vector")


def rot_named(axis: str, theta: float) -> np.ndarray:
    """``exp(-i theta A / 2)`` for ``A`` in ``{"X", "Y", "Z"}``."""
    try:
        a = PAULIS[axis.upper()]
    except KeyError:
        raise ValueError(f"unknown rotation axis {axis!r}") from None
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * a


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rot_axis(p: AxisAngle) -> np.ndarray:
    nx, ny, nz = p.axis
    gen = nx * X + ny * Y + nz * Z
    return np.cos(p.theta / 2) * I2 - 1j * np.sin(p.theta / 2) * gen


def euler_compose(e: EulerAngles) -> np.ndarray:
    return rz(e.alpha) @ ry(e.beta) @ rz(e.gamma)


def euler_decompose(u: np.ndarray) -> EulerAngles:
    """ZYZ angles reproducing a 2x2 unitary up to global phase."""
    u = np.asarray(u, dtype=complex)
    su = u / np.sqrt(np.linalg.det(u))
    beta = 2 * np.arctan2(abs(su[1, 0]), abs(su[0, 0]))
    # su = [[e^{-i(a+g)/2} c, -e^{-i(a-g)/2} s], [e^{i(a-g)/2} s, e^{i(a+g)/2} c]]
    plus = 2 * np.angle(su[1, 1]) if abs(su[1, 1]) > 1e-12 else 0.0
    minus = 2 * np.angle(su[1, 0]) if abs(su[1, 0]) > 1e-12 else 0.0
    return EulerAngles(alpha=(plus + minus) / 2, beta=float(beta), gamma=(plus - minus) / 2)


def cz() -> np.ndarray:
    return np.diag([1, 1, 1, -1]).astype(complex)


def cnot() -> np.ndarray:
    """CNOT with qubit 0 (most significant) as control."""
    return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def crosstalk_zz(alpha: float) -> np.ndarray:
    """``exp(-i alpha Z kron Z)``."""
    a = np.exp(-1j * alpha)
    b = np.exp(1j * alpha)
    return np.diag([a, b, b, a])
