"""Command-line experiment runner.

Subcommands ``train``, ``channel-check``, ``estimate-resources`` and ``dataset`` each
write one run directory holding their artifacts, ``config.resolved`` and
``manifest.json``. Exit codes: 0 success, 1 failed property check, 2 configuration
error, 3 dataset error, 4 numerical failure.

Precedence: ``--seed-override`` and ``--output`` beat config-file keys, which beat
built-in defaults.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import hashlib
import io
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, checks, estimator
from . import data as datamod
from . import config as cfgmod
from .config import ConfigError, ExperimentConfig
from .training import NumericalError, train
from .vqc import CircuitParams, phase_compensated

log = logging.getLogger("qvcnoise")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3, 4
RECORDS_HEADER = "# qvcnoise train-records v1"
RECORD_COLUMNS = ("images_seen", "loss", "mean_sq_grad", "classical_mean_sq_grad",
                  "test_success_rate", "wall_seconds")
SEED_ALIASES = {"params": "seeds.params", "shots": "seeds.shots", "batches": "seeds.batches"}


# --- artifacts -----------------------------------------------------------------------

def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(run_dir: Path, command: str, cfg: ExperimentConfig, started: float) -> dict:
    files = {p.name: sha256(p) for p in sorted(run_dir.iterdir())
             if p.is_file() and p.name != "manifest.json"}
    manifest = {
        "tool": "qvcnoise",
        "version": __version__,
        "command": command,
        "config": "config.resolved",
        "files": files,
        "started_utc": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "wall_seconds": round(time.time() - started, 3),
    }
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def verify_manifest(run_dir) -> bool:
    run_dir = Path(run_dir)
    manifest = json.loads((run_dir / "manifest.json").read_text())
    return all(sha256(run_dir / name) == digest for name, digest in manifest["files"].items())


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def records_csv(records, wall_clock: bool) -> str:
    buf = io.StringIO()
    buf.write(RECORDS_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_COLUMNS)
    for r in records:
        w.writerow([r.images_seen, _fmt(r.loss), _fmt(r.mean_sq_grad),
                    _fmt(r.classical_mean_sq_grad), _fmt(r.test_success_rate),
                    _fmt(r.wall_seconds) if wall_clock else ""])
    return buf.getvalue()


# --- datasets ------------------------------------------------------------------------

def load_datasets(cfg: ExperimentConfig) -> tuple[datamod.Dataset, datamod.Dataset]:
    kind = cfg["dataset.kind"]
    k = cfg["dataset.num_classes"]
    pixels = cfg["dataset.target_pixels"]
    seed = cfg["dataset.seed"]
    try:
        if kind == "synthetic":
            full = datamod.synthetic_dataset(seed, k, pixels, cfg["dataset.samples_per_class"],
                                             cfg["dataset.noise"])
            return datamod.split(full, cfg["dataset.test_size"], seed)
        if kind == "idx":
            paths = [cfg[f"dataset.{key}"] for key in
                     ("images", "labels", "test_images", "test_labels")]
            if not all(paths[:2]):
                raise ConfigError("dataset.kind = idx needs dataset.images and dataset.labels")
            paths = [cfgmod.resolve_data_path(p) if p else None for p in paths]
            train_set = datamod.load_idx(paths[0], paths[1], k)
            if paths[2] and paths[3]:
                test_set = datamod.load_idx(paths[2], paths[3], k)
            else:
                train_set, test_set = datamod.split(train_set, cfg["dataset.test_size"], seed)
            return datamod.preprocess(train_set, pixels), datamod.preprocess(test_set, pixels)
    except OSError as exc:
        raise datamod.DatasetError(f"cannot read dataset: {exc}") from None
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise datamod.DatasetError(str(exc)) from None
    raise ConfigError(f"unknown dataset.kind {kind!r} (synthetic or idx)")


# --- subcommands ---------------------------------------------------------------------

def run_train(cfg: ExperimentConfig, run_dir: Path) -> int:
    train_set, test_set = load_datasets(cfg)
    model = cfg.model(train_set.num_classes)
    tcfg = cfg.train()
    params = CircuitParams.init(model, np.random.default_rng(tcfg.seed_params))
    if cfg["noise.compensate_mu"]:
        per_factor = cfg["noise.phase_damping_placement"] == "factor"
        params = CircuitParams(phase_compensated(params.thetas, cfg["noise.mu"], per_factor),
                               params.weights, params.biases)
    try:
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            result = train(model, tcfg, train_set, test_set, params=params)
    except (ValueError, datamod.DatasetError) as exc:
        if isinstance(exc, datamod.DatasetError):
            raise
        raise ConfigError(str(exc)) from None
    except FloatingPointError as exc:
        raise NumericalError(f"floating point failure: {exc}") from None
    (run_dir / "train_records.csv").write_text(
        records_csv(result.records, cfg["output.wall_clock"]))
    summary = {
        "iteration_mean_sq_grad": result.mean_sq_grad,
        "final_test_success_rate": result.records[-1].test_success_rate,
        "clamped_probabilities": result.clamped_probs,
    }
    (run_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def run_channel_check(cfg: ExperimentConfig, run_dir: Path) -> int:
    results = checks.run_channel_checks(cfg["check.seed"], cfg["check.draws"],
                                        cfg["check.mc_samples"], cfg["check.dephasing_bias"])
    failed = [r.name for r in results if not r.passed]
    report = {"passed": not failed, "failed": failed,
              "properties": {r.name: r.as_dict() for r in results}}
    (run_dir / "channel_check.json").write_text(json.dumps(report, indent=2) + "\n")
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: max deviation {r.max_deviation:.3e}"
              f" (tolerance {r.tolerance:g}, {r.draws} draws)")
    if failed:
        print(f"error: failing properties: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def estimate_report(cfg: ExperimentConfig) -> dict:
    try:
        spec = estimator.BudgetSpec(cfg["estimator.epsilon"], cfg["estimator.q_alg"],
                                    cfg["estimator.layers"], cfg["estimator.p_phys"],
                                    cfg["estimator.p_star"], cfg["estimator.coeff"])
        protocol = estimator.DistillationProtocol(
            cfg["estimator.protocol_m_x"], cfg["estimator.protocol_n"],
            cfg["estimator.protocol_k"], cfg["estimator.protocol_d"],
            cfg["estimator.protocol_c"], cfg["estimator.p0"])
    except ValueError as exc:
        raise ConfigError(f"estimator: {exc}") from None
    flags = []
    try:
        circuit = estimator.full_circuit_estimate(spec, cfg["estimator.logical_cycles"])
    except estimator.UnreachableTarget as exc:
        circuit = None
        flags.append(f"unreachable: {exc}")
    distill = []
    for layers in range(cfg["estimator.max_distill_layers"] + 1):
        try:
            rep = estimator.spacetime_product(protocol, layers,
                                              cfg["estimator.spatial_overhead"])
            distill.append({"layers": layers, "spatial_d2": rep.spatial,
                            "temporal_d": rep.temporal, "spacetime_d3": rep.spacetime,
                            "p_out": rep.p_out})
        except (estimator.NonSuppressingRegime, ValueError) as exc:
            flags.append(f"distillation L={layers}: {exc}")
            distill.append({"layers": layers, "error": str(exc)})
    r = estimator.rotation_error_from_t(cfg["estimator.eps_t"], cfg["estimator.eps_synth"],
                                        cfg["estimator.t_scaling"])
    chain = {"eps_t": cfg["estimator.eps_t"], "eps_synth": cfg["estimator.eps_synth"],
             "scaling": cfg["estimator.t_scaling"], "gate_error": r}
    try:
        chain["p_depol"] = estimator.depol_from_gate_error(r)
    except ValueError as exc:
        flags.append(f"conversion: {exc}")
        chain["p_depol"] = None
    return {
        "budget": {"epsilon": spec.epsilon, "split": list(estimator.budget_split(spec.epsilon)),
                   "q_alg": spec.q_alg, "layers": spec.layers, "p_phys": spec.p_phys},
        "distance": circuit["distance"] if circuit else None,
        "data_qubits": circuit["data_qubits"] if circuit else None,
        "circuit": circuit,
        "distillation": distill,
        "conversion_chain": chain,
        "shot_noise_bound": estimator.shot_noise_bound(cfg["estimator.shots"],
                                                       cfg["estimator.bernoulli_p"]),
        "flags": flags,
    }


def format_estimate(rep: dict) -> str:
    lines = ["Resource estimate", "================="]
    b = rep["budget"]
    lines.append(f"budget epsilon {b['epsilon']:g} split {b['split'][0]:.3e} x 3, "
                 f"Q_alg {b['q_alg']}, p_phys {b['p_phys']:g}")
    if rep["circuit"]:
        c = rep["circuit"]
        lines.append(f"code distance      {c['distance']}")
        lines.append(f"data qubits        {c['data_qubits']}")
        lines.append(f"logical error rate {c['logical_error_rate']:.3e} "
                     f"(required {c['required_rate']:.3e})")
    lines += ["", f"{'L':>3} {'space [d^2]':>14} {'time [d]':>12} {'spacetime [d^3]':>16} "
              f"{'p_out':>11}"]
    for row in rep["distillation"]:
        if "error" in row:
            lines.append(f"{row['layers']:>3}  {row['error']}")
        else:
            lines.append(f"{row['layers']:>3} {row['spatial_d2']:>14.6g} {row['temporal_d']:>12.6g}"
                         f" {row['spacetime_d3']:>16.6g} {row['p_out']:>11.3e}")
    ch = rep["conversion_chain"]
    pd = "n/a" if ch["p_depol"] is None else f"{ch['p_depol']:.3e}"
    lines += ["", f"eps_T {ch['eps_t']:g} -> r {ch['gate_error']:.3e} -> p_depol {pd}",
              f"shot-noise bound   {rep['shot_noise_bound']:.3e}"]
    lines += [f"FLAG {f}" for f in rep["flags"]]
    return "\n".join(lines) + "\n"


def run_estimate(cfg: ExperimentConfig, run_dir: Path) -> int:
    rep = estimate_report(cfg)
    (run_dir / "estimate.json").write_text(json.dumps(rep, indent=2) + "\n")
    text = format_estimate(rep)
    (run_dir / "estimate.txt").write_text(text)
    print(text, end="")
    return EXIT_OK


def run_dataset(cfg: ExperimentConfig, run_dir: Path) -> int:
    train_set, test_set = load_datasets(cfg)
    stats = {}
    for name, d in (("train", train_set), ("test", test_set)):
        datamod.write_container(run_dir / f"{name}.qvds", d)
        stats[name] = datamod.dataset_stats(d)
    (run_dir / "stats.json").write_text(json.dumps(stats, indent=2) + "\n")
    return EXIT_OK


COMMANDS = {
    "train": run_train,
    "channel-check": run_channel_check,
    "estimate-resources": run_estimate,
    "dataset": run_dataset,
}


# --- entry point ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qvcnoise", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--output", type=Path, help="run directory (overrides output.dir)")
    p.add_argument("--seed-override", action="append", default=[], metavar="K=V",
                   help="override a seed (params, shots, batches) or any dotted config key")
    p.add_argument("--threads", type=int, help="limit BLAS threads")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _overrides(items: list[str]) -> dict[str, str]:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--seed-override expects K=V, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        out[SEED_ALIASES.get(key, key)] = value
    return out


def _thread_limit(n: int | None):
    if n is None:
        return contextlib.nullcontext()
    if n < 1:
        raise ConfigError("--threads must be positive")
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def _run(args) -> int:
    cfg = cfgmod.load(args.config) if args.config else ExperimentConfig()
    overrides = _overrides(args.seed_override)
    if args.output is not None:
        overrides["output.dir"] = str(args.output)
    cfg = cfg.with_overrides(overrides)
    root = Path(cfg["output.dir"])
    code = EXIT_OK
    with _thread_limit(args.threads):
        for name, run_cfg in cfg.expand():
            run_dir = root / name if name else root
            run_dir.mkdir(parents=True, exist_ok=True)
            started = time.time()
            run_cfg.values["output.dir"] = str(run_dir)
            (run_dir / "config.resolved").write_text(run_cfg.dumps())
            code = COMMANDS[args.command](run_cfg, run_dir)
            write_manifest(run_dir, args.command, run_cfg, started)
            if code != EXIT_OK:
                break
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except datamod.DatasetError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
