import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qvcnoise import gates
from qvcnoise.gates import H, I2, X, Y, Z, AxisAngle, EulerAngles
from qvcnoise.linalg import allclose, kron, random_unitary

angles = st.floats(-10, 10, allow_nan=False)


def _unitary(u, tol=1e-12):
    return allclose(u.conj().T @ u, np.eye(u.shape[0]), tol)


def test_rot_named_examples():
    assert allclose(gates.rot_named("Z", 0), I2, 0)
    assert allclose(gates.rot_named("Z", np.pi), -1j * Z, 1e-15)
    plus = gates.rot_named("Y", np.pi / 2) @ np.array([1, 0])
    assert allclose(plus, np.array([1, 1]) / np.sqrt(2), 1e-15)
    with pytest.raises(ValueError):
        gates.rot_named("W", 1.0)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from("XYZ"), angles, angles)
def test_rotations_compose_additively(axis, t1, t2):
    u = gates.rot_named(axis, t1) @ gates.rot_named(axis, t2)
    assert _unitary(u)
    assert allclose(u, gates.rot_named(axis, t1 + t2), 1e-12)


def test_rot_axis_examples():
    assert allclose(gates.rot_axis(AxisAngle((0, 0, 1), 0.7)), gates.rot_named("Z", 0.7), 1e-15)
    assert allclose(gates.rot_axis(AxisAngle((0.6, 0, 0.8), 0.0)), I2, 0)
    assert allclose(gates.rot_axis(AxisAngle((1, 0, 0), np.pi)), -1j * X, 1e-15)
    with pytest.raises(ValueError):
        AxisAngle((1, 1, 0), 0.3)


def test_euler_compose_examples():
    assert allclose(gates.euler_compose(EulerAngles(0, 0, 0)), I2, 0)
    assert allclose(gates.euler_compose(EulerAngles(0.4, 0, 0)), gates.rz(0.4), 1e-15)
    e = EulerAngles(0.3, 1.1, -0.7)
    expected = gates.rz(0.3) @ gates.ry(1.1) @ gates.rz(-0.7)
    assert allclose(gates.euler_compose(e), expected, 1e-15)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_euler_decomposition_reproduces_axis_angle(seed):
    rng = np.random.default_rng(seed)
    axis = rng.normal(size=3)
    g = gates.rot_axis(AxisAngle(tuple(axis / np.linalg.norm(axis)), rng.uniform(-7, 7)))
    e = gates.euler_compose(gates.euler_decompose(g))
    assert _unitary(e)
    assert abs(abs(np.trace(e.conj().T @ g)) - 2) < 1e-9


def test_euler_decomposition_of_haar_unitaries():
    rng = np.random.default_rng(11)
    for _ in range(50):
        u = random_unitary(2, rng)
        e = gates.euler_compose(gates.euler_decompose(u))
        assert abs(abs(np.trace(e.conj().T @ u)) - 2) < 1e-9


def test_two_qubit_cliffords():
    c = gates.cz()
    assert allclose(c @ c, np.eye(4), 0)
    assert np.array_equal(np.diag(c), [1, 1, 1, -1])
    # Hadamards on the target (qubit 1) turn CZ into CNOT controlled on qubit 0
    hi = kron(I2, H)
    assert allclose(hi @ c @ hi, gates.cnot(), 1e-15)
    for u in (c, gates.cnot(), gates.crosstalk_zz(0.37)):
        assert _unitary(u)


def test_crosstalk_zz():
    assert allclose(gates.crosstalk_zz(0), np.eye(4), 0)
    a = gates.CROSSTALK_ALPHA
    assert a == 1.16e-3
    u = gates.crosstalk_zz(a)
    assert allclose(np.diag(u), np.exp(-1j * a * np.array([1, -1, -1, 1])), 1e-15)
    assert allclose(u @ gates.cz(), gates.cz() @ u, 0)
    assert allclose(u, np.diag(np.diag(np.exp(-1j * a * np.kron(Z, Z)))), 1e-15)


def test_pauli_algebra():
    assert allclose(X @ Y, 1j * Z, 0)
    assert allclose(gates.SIGMA_MINUS @ np.array([0, 1]), np.array([1, 0]), 0)
