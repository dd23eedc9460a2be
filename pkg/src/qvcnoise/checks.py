"""Randomized property checks of the noise channels.

Each check returns a :class:`CheckResult` carrying the worst deviation seen over
its random draws. ``run_channel_checks`` runs the whole suite.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import channels, gates, linalg


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    max_deviation: float
    tolerance: float
    draws: int

    def as_dict(self) -> dict:
        return asdict(self)


def _result(name, devs, tol, *, upper=True) -> CheckResult:
    worst = float(np.max(devs))
    return CheckResult(name, bool(worst <= tol), worst, tol, len(devs))


def _random_channel_params(rng):
    return {
        "p": rng.uniform(0, 0.75),
        "mu": rng.uniform(-np.pi, np.pi),
        "sigma": rng.uniform(0, 2),
        "t_tilde": float(10 ** rng.uniform(-2, 2)),
        "gamma": rng.uniform(0, 1),
    }


def check_completeness(rng, draws: int) -> CheckResult:
    devs = []
    for _ in range(draws):
        q = _random_channel_params(rng)
        for ch in (channels.depolarizing_kraus(q["p"]),
                   channels.thermal_kraus(q["t_tilde"], q["gamma"]),
                   channels.gaussian_phase_damping_kraus(q["mu"], q["sigma"])):
            devs.append(ch.completeness_error())
    return _result("kraus_completeness", devs, 1e-10)


def check_trace_hermiticity(rng, draws: int) -> CheckResult:
    """Trace, Hermiticity and positivity of channel outputs on random multi-qubit states."""
    devs = []
    for _ in range(draws):
        q = _random_channel_params(rng)
        n = int(rng.integers(1, 4))
        rho = linalg.random_density(n, rng)
        t = int(rng.integers(n))
        outs = [
            channels.apply_channel(rho, channels.depolarizing_kraus(q["p"]), [t]),
            channels.apply_channel(rho, channels.thermal_kraus(q["t_tilde"], q["gamma"]), [t]),
            channels.gaussian_phase_damping_apply(rho, q["mu"], q["sigma"], t),
        ]
        if n >= 2:
            spec = channels.NoiseSpec(two_qubit=True, p_depol_2q=rng.uniform(0, 0.7),
                                      alpha=rng.uniform(-np.pi, np.pi))
            a = int(rng.integers(n - 1))
            outs.append(channels.two_qubit_noise_channel(spec, a, a + 1, n).apply(rho, n))
        for out in outs:
            herm = np.max(np.abs(out - linalg.dagger(out)))
            tr = abs(np.trace(out) - 1)
            neg = max(0.0, -np.linalg.eigvalsh(0.5 * (out + linalg.dagger(out))).min() - 1e-9)
            devs.append(max(herm, tr, neg))
    return _result("trace_hermiticity", devs, 1e-10)


def check_depol_commutation(rng, draws: int) -> CheckResult:
    devs = []
    for _ in range(draws):
        p = rng.uniform(0, 0.75)
        u = linalg.random_unitary(2, rng)
        rho = linalg.random_density(1, rng)
        ch = channels.depolarizing_kraus(p)
        a = ch(u @ rho @ linalg.dagger(u))
        b = u @ ch(rho) @ linalg.dagger(u)
        devs.append(np.max(np.abs(a - b)))
    return _result("depolarizing_unitary_commutation", devs, 1e-12)


def check_gaussian_monte_carlo(rng, draws: int, samples: int = 1_000_000,
                               dephasing_bias: float = 0.0) -> CheckResult:
    """Closed-form dephasing vs the average of ``samples`` sampled Z rotations.

    Deviation is reported in standard errors of the complex Monte Carlo mean of the
    coherence; populations are unchanged by every sampled rotation.
    ``dephasing_bias`` perturbs the closed form (negative control).
    """
    devs = []
    for _ in range(draws):
        mu = rng.uniform(-np.pi, np.pi)
        sigma = rng.uniform(0.01, 2)
        rho = linalg.random_density(1, rng)
        f = channels.dephasing_factor(mu, sigma) * (1 + dephasing_bias)
        closed = rho[0, 1] * f
        theta = rng.normal(mu, sigma, size=samples)
        # (R_Z(t) rho R_Z(t)^dagger)_01 = exp(-i t) rho_01
        vals = np.exp(-1j * theta) * rho[0, 1]
        mean = vals.mean()
        se = np.sqrt(np.mean(np.abs(vals - mean) ** 2) / samples)
        devs.append(abs(closed - mean) / se)
    return _result("gaussian_closed_form_vs_monte_carlo", devs, 3.0)


def check_mean_compensation(rng, draws: int) -> CheckResult:
    """Phase damping with mean ``mu`` after ``R_Z(-mu) U`` equals zero-mean damping after ``U``."""
    devs = []
    for _ in range(draws):
        mu = rng.uniform(-np.pi, np.pi)
        sigma = rng.uniform(0, 2)
        u = linalg.random_unitary(2, rng)
        rho = linalg.random_density(1, rng)
        shifted = gates.rz(-mu) @ u
        lhs = channels.gaussian_phase_damping_apply(
            shifted @ rho @ linalg.dagger(shifted), mu, sigma, 0)
        rhs = channels.gaussian_phase_damping_apply(u @ rho @ linalg.dagger(u), 0.0, sigma, 0)
        devs.append(np.max(np.abs(lhs - rhs)))
    return _result("nonzero_mean_compensation", devs, 1e-12)


def check_thermal_purity(gammas=(1e-3, 1e-1, 1.0), t_tilde: float = 0.01) -> CheckResult:
    """Purity gain of the maximally mixed qubit; passes when every gain is positive."""
    mixed = linalg.maximally_mixed(1)
    gains = [linalg.purity(channels.thermal_kraus(t_tilde, g)(mixed)) - linalg.purity(mixed)
             for g in gammas]
    # report the smallest gain as a negative deviation so that passing means <= 0
    worst = -min(gains)
    return CheckResult("thermal_purity_increase", bool(min(gains) > 0), float(worst), 0.0,
                       len(gammas))


def check_small_sigma(rng, draws: int) -> CheckResult:
    """Trace-norm change of zero-mean dephasing relative to ``sigma^2`` for sigma <= 0.1."""
    ratios = []
    for _ in range(draws):
        sigma = rng.uniform(1e-4, 0.1)
        rho = linalg.random_density(1, rng)
        out = channels.gaussian_phase_damping_apply(rho, 0.0, sigma, 0)
        norm1 = float(np.sum(np.abs(np.linalg.eigvalsh(out - rho))))
        ratios.append(norm1 / sigma**2)
    return _result("small_sigma_limit", ratios, 1.0)


def run_channel_checks(seed: int = 0, draws: int = 100, mc_samples: int = 1_000_000,
                       dephasing_bias: float = 0.0) -> list[CheckResult]:
    root = np.random.SeedSequence(seed)
    rngs = [np.random.default_rng(s) for s in root.spawn(6)]
    return [
        check_completeness(rngs[0], draws),
        check_trace_hermiticity(rngs[1], draws),
        check_depol_commutation(rngs[2], draws),
        check_gaussian_monte_carlo(rngs[3], draws, mc_samples, dephasing_bias),
        check_mean_compensation(rngs[4], draws),
        check_thermal_purity(),
        check_small_sigma(rngs[5], draws),
    ]
