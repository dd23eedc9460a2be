"""Acceptance criteria. Each test records one PASS/FAIL line, shown in the terminal summary."""
import functools

import numpy as np
import pytest

import oracles
from conftest import ACCEPTANCE_LINES
from qvcnoise import checks, cli, linalg, training, vqc
from qvcnoise import data as datamod
from qvcnoise import estimator as est
from qvcnoise.channels import NoiseSpec
from qvcnoise.training import TrainConfig
from qvcnoise.vqc import Circuit, CircuitParams, ModelConfig


def report(number, title, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'} {title} ({detail})")
    print(ACCEPTANCE_LINES[-1])
    assert ok, detail


def rel(a, b):
    return abs(a - b) / abs(b)


# --- shared training runs on the synthetic 4-class task ------------------------------

TASK_TRAIN = TrainConfig(learning_rate=0.02, batch_size=50, max_images=2000, eval_every=500)


@functools.lru_cache(maxsize=None)
def _task():
    full = datamod.synthetic_dataset(0, 4, 64, 250)
    return datamod.split(full, 200, 1)


@functools.lru_cache(maxsize=None)
def trained(p=0.0, mu=0.0, sigma=0.0, gamma=0.0):
    noise = NoiseSpec(p_depol=p, mu=mu, sigma=sigma, t_tilde=0.01, gamma=gamma)
    model = ModelConfig(6, 12, noise, shots=10000, num_classes=4)
    train_set, test_set = _task()
    res = training.train(model, TASK_TRAIN, train_set, test_set)
    return res.mean_sq_grad, res.records[-1].test_success_rate


# --- criteria -------------------------------------------------------------------------

def test_criterion_01_gate_error_chain():
    r15 = est.rotation_error_from_t(1e-4, 1e-4, 1.5)
    r10 = est.rotation_error_from_t(1e-4, 1e-4, 1.0)
    p15, p10 = est.depol_from_gate_error(r15), est.depol_from_gate_error(r10)
    worst = max(rel(r15, 1.99e-3), rel(p15, 2.99e-3), rel(r10, 1.33e-3), rel(p10, 1.99e-3))
    report(1, "gate error conversion chain", worst <= 0.01,
           f"r={r15:.4g}/{r10:.4g}, p_depol={p15:.4g}/{p10:.4g}, worst rel {worst:.2e} <= 1e-2")


def test_criterion_02_shot_noise_bound():
    b = est.shot_noise_bound(10000, 0.5)
    report(2, "shot noise bound", abs(b - 6.0e-3) <= 1e-6, f"{b:.6g} vs 6.0e-3, tol 1e-6")


def test_criterion_03_distance_table():
    e15, e17 = est.logical_error_rate(1e-3, 15), est.logical_error_rate(1e-3, 17)
    q15, q17 = est.data_qubits(10, 15), est.data_qubits(10, 17)
    ok = rel(e15, 3.00e-10) <= 0.01 and rel(e17, 3.00e-11) <= 0.01 and (q15, q17) == (13500, 17340)
    report(3, "logical error rates and data qubits", ok,
           f"eps_L={e15:.3g}/{e17:.3g}, qubits={q15}/{q17}")


def test_criterion_04_channel_property_suite():
    results = checks.run_channel_checks(seed=0, draws=100, mc_samples=1_000_000)
    worst = ", ".join(f"{r.name}={r.max_deviation:.2e}/{r.tolerance:g}" for r in results)
    report(4, "channel property suite", all(r.passed for r in results), worst)


def test_criterion_05_parameter_shift_oracle():
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(500 + seed)
        n, layers = int(rng.integers(2, 5)), int(rng.integers(1, 4))
        noise = NoiseSpec(p_depol=rng.uniform(0, 0.1), mu=rng.uniform(-1, 1),
                          sigma=rng.uniform(0, 0.5), gamma=rng.uniform(0, 0.2))
        cfg = ModelConfig(n, layers, noise, shots=0, num_classes=2)
        circuit = Circuit(cfg)
        params = CircuitParams.init(cfg, rng)
        rho = np.stack([linalg.random_density(n, rng) for _ in range(3)])
        labels = rng.integers(0, 2, size=3)
        grad = training.parameter_shift_gradient(circuit, params, rho, labels)[1]
        v, h = params.to_vector(), 1e-4
        fd = np.empty_like(v)
        for i in range(v.size):
            hi, lo = v.copy(), v.copy()
            hi[i] += h
            lo[i] -= h
            fd[i] = (training.batch_loss(circuit, params.with_vector(hi), rho, labels)
                     - training.batch_loss(circuit, params.with_vector(lo), rho, labels)) / (2 * h)
        worst = max(worst, np.linalg.norm(grad - fd) / np.linalg.norm(fd))
    report(5, "parameter shift vs finite differences", worst <= 1e-6,
           f"worst relative error {worst:.2e} <= 1e-6 over 20 instances")


def test_criterion_06_statevector_equivalence():
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(900 + seed)
        n, layers = int(rng.integers(2, 6)), int(rng.integers(1, 5))
        cfg = ModelConfig(n, layers, num_classes=2)
        thetas = rng.uniform(-np.pi, np.pi, size=(layers, n, 3))
        psi = oracles.random_pure(n, rng)
        out = vqc.forward(np.outer(psi, psi.conj()), CircuitParams(thetas), cfg)
        ref = oracles.statevector_forward(psi, thetas, False)
        worst = max(worst, np.max(np.abs(out - np.outer(ref, ref.conj()))))
    report(6, "noise-free density matrix vs state vector", worst <= 1e-10,
           f"max abs deviation {worst:.2e} <= 1e-10")


@pytest.mark.slow
def test_criterion_07_depolarizing_flattens_gradients():
    runs = {p: trained(p=p) for p in (0.0, 2e-3, 2e-2, 2e-1)}
    msg0, acc0 = runs[0.0]
    msg2, acc2 = runs[2e-1]
    ratio = msg0 / msg2
    gap = 100 * (acc0 - acc2)
    detail = ", ".join(f"p={p:g}: msg={m:.3e} acc={a:.3f}" for p, (m, a) in runs.items())
    report(7, "depolarizing barren plateau trend", ratio >= 10 and gap >= 15,
           f"{detail}; msg ratio {ratio:.1f} >= 10, success gap {gap:.1f} >= 15 points")


@pytest.mark.slow
def test_criterion_08_phase_damping_robustness():
    _, acc_free = trained()
    _, acc_zero = trained(sigma=0.08)
    _, acc_shift = trained(mu=np.pi / 2, sigma=0.08)
    d1, d2 = 100 * abs(acc_zero - acc_free), 100 * abs(acc_shift - acc_zero)
    report(8, "phase damping robustness", d1 <= 5 and d2 <= 5,
           f"noise-free {acc_free:.3f}, mu=0 {acc_zero:.3f}, mu=pi/2 {acc_shift:.3f}; "
           f"gaps {d1:.1f} and {d2:.1f} <= 5 points")


@pytest.mark.slow
def test_criterion_09_thermal_damping_assist():
    plain, acc_plain = trained(p=5e-3)
    damped, acc_damped = trained(p=5e-3, gamma=9e-3)
    report(9, "thermal damping gradient assist", damped >= plain,
           f"msg gamma=0 {plain:.3e}, gamma=9e-3 {damped:.3e}; "
           f"success {acc_plain:.3f}/{acc_damped:.3f}")


def test_criterion_10_distillation_calculus():
    proto = est.DistillationProtocol(m_x=4, n_consume=15, k_out=1, d=5, c_const=35.0, p0=0.0)
    hot = est.DistillationProtocol(m_x=4, n_consume=15, k_out=1, d=5, c_const=35.0, p0=0.01)
    checks_ = [
        (est.distill_spatial(proto, 1), 11.5),
        (est.distill_spatial(proto, 2), 132.25),
        (est.distill_temporal(proto, 1), 11.0),
        (est.distill_temporal(hot, 1), 11 / 0.99**15),
        (est.spacetime_product(proto, 0).spacetime, 1.0),
        (est.spacetime_product(proto, 1).spacetime, 126.5),
    ]
    worst = max(abs(a - b) for a, b in checks_)
    rows = [(r.protocol, r.space_d2, r.time_d, r.p_distilled, r.code_distance)
            for r in est.protocol_catalog()]
    expected = [("(15-to-1)_(7,3,3)", 6.69, 1.65, 4.4e-8, 11),
                ("(15-to-1)_(9,3,3)", 4.51, 2.78, 1.5e-9, 13),
                ("(15-to-1)^4_(9,3,3) x (20-to-4)_(15,7,9)", 45.43, 4.75, 2.4e-15, 19),
                ("No distillation", 1.0, 1.0, None, None)]
    report(10, "distillation calculus and catalog", worst <= 1e-9 and rows == expected,
           f"worst deviation {worst:.1e} <= 1e-9, catalog rows match: {rows == expected}")


def test_criterion_11_train_rerun_is_byte_identical(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("model.n_qubits = 4\nmodel.n_layers = 3\nmodel.shots = 1000\n"
                   "noise.p_depol = 2e-3\nnoise.sigma = 0.08\ntrain.max_images = 100\n"
                   "train.eval_every = 50\ntrain.batch_size = 25\ndataset.num_classes = 4\n"
                   "dataset.target_pixels = 16\ndataset.samples_per_class = 40\n"
                   "dataset.test_size = 40\n")
    outs = []
    for name in ("first", "second"):
        assert cli.main(["train", "--config", str(cfg), "--output", str(tmp_path / name)]) == 0
        outs.append((tmp_path / name / "train_records.csv").read_bytes())
    report(11, "deterministic training output", outs[0] == outs[1],
           f"{len(outs[0])} bytes, identical: {outs[0] == outs[1]}")
