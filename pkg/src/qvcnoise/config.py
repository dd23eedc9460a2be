"""Line-oriented ``key = value`` experiment configuration.

Format::

    # comment
    model.n_qubits = 6
    noise.p_depol = 2e-3
    sweep.noise.p_depol = 0, 2e-3, 2e-2

Keys are dotted ``section.name`` pairs taken from :data:`DEFAULTS`; unknown keys are
errors. ``sweep.<key> = v1, v2, ...`` expands into one run per value (the cartesian
product when several keys are swept). Values given on the command line override the
file, which overrides the defaults.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from pathlib import Path

from .channels import NoiseSpec
from .training import TrainConfig
from .vqc import ModelConfig

DATA_DIR_ENV = "QVCNOISE_DATA_DIR"


class ConfigError(ValueError):
    pass


DEFAULTS: dict[str, object] = {
    "model.n_qubits": 6,
    "model.n_layers": 12,
    "model.shots": 10000,
    "model.entangler": "chain",
    "model.readout": "quantum",
    "noise.p_depol": 0.0,
    "noise.mu": 0.0,
    "noise.sigma": 0.0,
    "noise.t_tilde": 0.01,
    "noise.gamma": 0.0,
    "noise.two_qubit": False,
    "noise.p_depol_2q": 0.0019,
    "noise.alpha": 1.16e-3,
    "noise.phase_damping_placement": "factor",
    "noise.depol_placement": "gate",
    "noise.compensate_mu": False,
    "train.learning_rate": 0.005,
    "train.batch_size": 50,
    "train.beta1": 0.9,
    "train.beta2": 0.999,
    "train.epsilon": 1e-8,
    "train.max_images": 2000,
    "train.eval_every": 500,
    "train.grad_method": "parameter_shift",
    "dataset.kind": "synthetic",
    "dataset.num_classes": 4,
    "dataset.target_pixels": 64,
    "dataset.samples_per_class": 250,
    "dataset.noise": 0.1,
    "dataset.test_size": 200,
    "dataset.seed": 0,
    "dataset.encoding": "amplitude",
    "dataset.images": "",
    "dataset.labels": "",
    "dataset.test_images": "",
    "dataset.test_labels": "",
    "estimator.p_phys": 1e-3,
    "estimator.epsilon": 1e-3,
    "estimator.q_alg": 10,
    "estimator.layers": 50,
    "estimator.logical_cycles": 4060,
    "estimator.p_star": 0.01,
    "estimator.coeff": 0.03,
    "estimator.eps_t": 1e-4,
    "estimator.eps_synth": 1e-4,
    "estimator.t_scaling": 1.5,
    "estimator.shots": 10000,
    "estimator.bernoulli_p": 0.5,
    "estimator.max_distill_layers": 3,
    "estimator.p0": 1e-4,
    "estimator.protocol_m_x": 4,
    "estimator.protocol_n": 15,
    "estimator.protocol_k": 1,
    "estimator.protocol_d": 5,
    "estimator.protocol_c": 35.0,
    "estimator.spatial_overhead": True,
    "check.seed": 0,
    "check.draws": 100,
    "check.mc_samples": 1000000,
    "check.dephasing_bias": 0.0,
    "output.dir": "runs",
    "output.wall_clock": False,
    "seeds.params": 0,
    "seeds.shots": 0,
    "seeds.batches": 0,
}


def _coerce(key: str, raw: str):
    default = DEFAULTS[key]
    text = raw.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(text)
        if isinstance(default, int):
            value = float(text)
            if value != int(value):
                raise ValueError(text)
            return int(value)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {type(default).__name__}") from None
    return text.strip("\"'")


def _check_key(key: str, lineno: int | None = None) -> None:
    if key not in DEFAULTS:
        where = f" (line {lineno})" if lineno else ""
        raise ConfigError(f"unknown key {key!r}{where}")


@dataclass
class ExperimentConfig:
    """Resolved settings plus any sweep axes still to be expanded."""

    values: dict = field(default_factory=lambda: dict(DEFAULTS))
    sweeps: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    def with_overrides(self, overrides: dict[str, str]) -> "ExperimentConfig":
        values = dict(self.values)
        sweeps = dict(self.sweeps)
        for key, raw in overrides.items():
            _check_key(key)
            values[key] = _coerce(key, raw)
            sweeps.pop(key, None)
        return ExperimentConfig(values, sweeps)

    def expand(self) -> list[tuple[str, "ExperimentConfig"]]:
        """One ``(run_name, config)`` per point of the sweep grid."""
        if not self.sweeps:
            return [("", ExperimentConfig(dict(self.values)))]
        keys = list(self.sweeps)
        runs = []
        for combo in itertools.product(*(self.sweeps[k] for k in keys)):
            values = dict(self.values)
            parts = []
            for key, (raw, value) in zip(keys, combo):
                values[key] = value
                parts.append(f"{key}={raw}")
            runs.append(("__".join(parts), ExperimentConfig(values)))
        return runs

    def dumps(self) -> str:
        lines = ["# resolved qvcnoise configuration"]
        for key in sorted(self.values):
            lines.append(f"{key} = {_format(self.values[key])}")
        for key in sorted(self.sweeps):
            lines.append(f"sweep.{key} = " + ", ".join(raw for raw, _ in self.sweeps[key]))
        return "\n".join(lines) + "\n"

    # -- builders ---------------------------------------------------------------------

    def noise(self) -> NoiseSpec:
        v = self.values
        placement = v["noise.phase_damping_placement"]
        depol = v["noise.depol_placement"]
        if placement not in ("factor", "gate") or depol not in ("factor", "gate"):
            raise ConfigError("noise placements must be 'factor' or 'gate'")
        try:
            return NoiseSpec(
                p_depol=v["noise.p_depol"], mu=v["noise.mu"], sigma=v["noise.sigma"],
                t_tilde=v["noise.t_tilde"], gamma=v["noise.gamma"],
                two_qubit=v["noise.two_qubit"], p_depol_2q=v["noise.p_depol_2q"],
                alpha=v["noise.alpha"], phase_damping_per_factor=placement == "factor",
                depol_per_factor=depol == "factor")
        except ValueError as exc:
            raise ConfigError(f"noise: {exc}") from None

    def model(self, num_classes: int) -> ModelConfig:
        v = self.values
        try:
            return ModelConfig(
                n_qubits=v["model.n_qubits"], n_layers=v["model.n_layers"], noise=self.noise(),
                shots=v["model.shots"], entangler=v["model.entangler"],
                readout=v["model.readout"], num_classes=num_classes)
        except ValueError as exc:
            raise ConfigError(f"model: {exc}") from None

    def train(self) -> TrainConfig:
        v = self.values
        try:
            return TrainConfig(
                learning_rate=v["train.learning_rate"], batch_size=v["train.batch_size"],
                beta1=v["train.beta1"], beta2=v["train.beta2"], epsilon=v["train.epsilon"],
                max_images=v["train.max_images"], eval_every=v["train.eval_every"],
                grad_method=v["train.grad_method"], encoding=v["dataset.encoding"],
                seed_params=v["seeds.params"], seed_batches=v["seeds.batches"],
                seed_shots=v["seeds.shots"])
        except ValueError as exc:
            raise ConfigError(f"train: {exc}") from None


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def parse(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key.startswith("sweep."):
            target = key[len("sweep."):]
            _check_key(target, lineno)
            items = [item.strip() for item in raw.split(",") if item.strip()]
            if not items:
                raise ConfigError(f"line {lineno}: empty sweep for {target}")
            cfg.sweeps[target] = [(item, _coerce(target, item)) for item in items]
        else:
            _check_key(key, lineno)
            cfg.values[key] = _coerce(key, raw)
    return cfg


def load(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse(text)


def resolve_data_path(value: str) -> Path:
    """Relative dataset paths are looked up under ``$QVCNOISE_DATA_DIR`` when set."""
    path = Path(value)
    base = os.environ.get(DATA_DIR_ENV)
    if base and not path.is_absolute():
        return Path(base) / path
    return path
