"""Closed-form surface-code costs, distillation calculus, and error-rate conversions.

Spatial costs are in units of ``d^2`` physical qubits, temporal costs in units of
``d`` syndrome rounds, and spacetime costs in ``d^3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

P_STAR = 0.01
LOGICAL_COEFF = 0.03


class UnreachableTarget(ValueError):
    """No code distance (or distillation depth) meets the requested rate."""


class NonSuppressingRegime(ValueError):
    """Distillation output error reached 1; the protocol does not purify at this rate."""


@dataclass(frozen=True)
class BudgetSpec:
    epsilon: float
    q_alg: int
    layers: int
    p_phys: float
    p_star: float = P_STAR
    coeff: float = LOGICAL_COEFF

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon={self.epsilon} outside (0, 1)")
        if not 0 < self.p_phys < self.p_star:
            raise ValueError(f"p_phys={self.p_phys} must lie below the threshold {self.p_star}")


@dataclass(frozen=True)
class DistillationProtocol:
    """One distillation round consuming ``n_consume`` states to output ``k_out``.

    ``c_const`` and ``d`` enter the output error recursion ``p_next = C p^((d+1)/2)``.
    """

    m_x: int
    n_consume: int
    k_out: int
    d: int
    c_const: float
    p0: float
    name: str = ""

    def __post_init__(self):
        if self.n_consume <= self.m_x:
            raise ValueError("n_consume must exceed m_x")
        if self.k_out < 1:
            raise ValueError("k_out must be at least 1")
        if self.d < 1 or self.d % 2 == 0:
            raise ValueError(f"code distance {self.d} must be odd and positive")
        if not 0 <= self.p0 < 1:
            raise ValueError(f"p0={self.p0} outside [0, 1)")


def fifteen_to_one(p0: float, d: int = 5, c_const: float = 35.0) -> DistillationProtocol:
    """15-to-1 protocol (4 X stabilizers). ``d=5`` makes the recursion ``35 p^3``."""
    return DistillationProtocol(m_x=4, n_consume=15, k_out=1, d=d, c_const=c_const, p0=p0,
                                name="15-to-1")


@dataclass(frozen=True)
class LayerCost:
    layer: int
    p_in: float
    success_probability: float
    temporal: float


@dataclass(frozen=True)
class CostReport:
    layers: int
    spatial: float
    temporal: float
    spacetime: float
    p_out: float
    temporal_dominant: float
    per_layer: list[LayerCost] = field(default_factory=list)


# --- error budget and code distance --------------------------------------------------

def budget_split(epsilon: float) -> tuple[float, float, float]:
    """Equal split of the total budget into (logical, distillation, synthesis)."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon={epsilon} outside (0, 1)")
    part = epsilon / 3
    return part, part, part


def required_rate(eps_component: float, count: int) -> tuple[float, float]:
    """Largest per-unit rate with ``1 - (1 - r)^count <= eps``: (exact, linearized)."""
    if count < 1:
        raise ValueError("count must be at least 1")
    if not 0 <= eps_component < 1:
        raise ValueError(f"eps_component={eps_component} outside [0, 1)")
    exact = -math.expm1(math.log1p(-eps_component) / count)
    return exact, eps_component / count


def logical_error_rate(p_phys: float, d: int, p_star: float = P_STAR,
                       coeff: float = LOGICAL_COEFF) -> float:
    if d < 1 or d % 2 == 0:
        raise ValueError(f"code distance {d} must be odd and positive")
    return coeff * (p_phys / p_star) ** ((d + 1) / 2)


def choose_distance(p_phys: float, target_rate: float, p_star: float = P_STAR,
                    coeff: float = LOGICAL_COEFF, d_max: int = 201) -> int:
    """Smallest odd distance whose logical error rate does not exceed ``target_rate``.

    The comparison allows a relative slack of 1e-9 for floating-point rounding.
    """
    if not 0 < p_phys < p_star:
        raise UnreachableTarget(f"p_phys={p_phys} is not below threshold {p_star}")
    for d in range(1, d_max + 1, 2):
        if logical_error_rate(p_phys, d, p_star, coeff) <= target_rate * (1 + 1e-9):
            return d
    raise UnreachableTarget(f"no distance up to {d_max} reaches {target_rate:g}")


def patch_tiles(q_alg: int) -> int:
    return 2 * q_alg + math.ceil(math.sqrt(8 * q_alg)) + 1


def data_qubits(q_alg: int, d: int) -> int:
    """Physical data-plus-syndrome qubits: ``2 d^2`` per tile."""
    if q_alg < 1 or d < 1:
        raise ValueError("q_alg and d must be positive")
    return 2 * patch_tiles(q_alg) * d * d


# --- distillation --------------------------------------------------------------------

def distill_spatial(protocol: DistillationProtocol, layers: int, with_overhead: bool = True) -> float:
    """Patches per distilled state after ``layers`` rounds (``+4`` routing term by default)."""
    if layers < 0:
        raise ValueError("layers must be non-negative")
    extra = 4.0 if with_overhead else 0.0
    per_layer = (1.5 * (protocol.m_x + protocol.k_out) + extra) / protocol.k_out
    return per_layer**layers


def distilled_error(protocol: DistillationProtocol, layer: int) -> float:
    """Output error after ``layer`` rounds of ``p_next = C p^((d+1)/2)``."""
    if layer < 0:
        raise ValueError("layer must be non-negative")
    p = protocol.p0
    power = (protocol.d + 1) / 2
    for _ in range(layer):
        p = protocol.c_const * p**power
        if p >= 1:
            raise NonSuppressingRegime(f"error rate {p:g} >= 1; distillation does not suppress")
    return p


def distilled_error_closed_form(protocol: DistillationProtocol, layer: int) -> float:
    """The induction formula ``C^((d+1)(l-1)l/2) p0^(((d+1)/4)^l)``, for comparison only.

    It does not agree with :func:`distilled_error` (already at ``l = 1``); the
    recursion is used everywhere else.
    """
    d = protocol.d
    return protocol.c_const ** ((d + 1) * (layer - 1) * layer / 2) * protocol.p0 ** (((d + 1) / 4) ** layer)


def _layer_costs(protocol: DistillationProtocol, layers: int) -> list[LayerCost]:
    n, k = protocol.n_consume, protocol.k_out
    base = n - protocol.m_x
    out = []
    for l in range(1, layers + 1):
        p_in = distilled_error(protocol, l - 1)
        if 1 - p_in <= 0:
            raise NonSuppressingRegime(f"input error {p_in:g} at layer {l}")
        success = (1 - p_in) ** (n * (n / k) ** (layers - l))
        if success == 0:
            raise NonSuppressingRegime(f"success probability underflows at layer {l}")
        out.append(LayerCost(l, p_in, success, base / success))
    return out


def distill_temporal(protocol: DistillationProtocol, layers: int) -> float:
    """Syndrome rounds (units of ``d``) summed over layers, restarts included.

    Layer ``l`` consumes states carrying the error of layer ``l - 1``.
    """
    if layers < 1:
        raise ValueError("temporal cost is defined for at least one layer")
    return sum(c.temporal for c in _layer_costs(protocol, layers))


def distill_temporal_dominant(protocol: DistillationProtocol) -> float:
    """First-layer approximation ``(n - m_X) / (1 - p0)^n``."""
    return (protocol.n_consume - protocol.m_x) / (1 - protocol.p0) ** protocol.n_consume


def spacetime_product(protocol: DistillationProtocol, layers: int,
                      with_overhead: bool = True) -> CostReport:
    spatial = distill_spatial(protocol, layers, with_overhead)
    if layers == 0:
        return CostReport(0, 1.0, 1.0, 1.0, protocol.p0, 1.0, [])
    per_layer = _layer_costs(protocol, layers)
    temporal = sum(c.temporal for c in per_layer)
    return CostReport(
        layers=layers,
        spatial=spatial,
        temporal=temporal,
        spacetime=spatial * temporal,
        p_out=distilled_error(protocol, layers),
        temporal_dominant=distill_temporal_dominant(protocol),
        per_layer=per_layer,
    )


def p0_from_physical(p1: float, p2: float, p_init: float, p_phys_t: float | None = None) -> float:
    """Injected logical T error to first order; ``p_phys_t`` only enters at second order."""
    for name, v in (("p1", p1), ("p2", p2), ("p_init", p_init)):
        if not 0 <= v < 1:
            raise ValueError(f"{name}={v} outside [0, 1)")
    return 0.4 * p2 + (2.0 / 3.0) * p1 + 2.0 * p_init


# --- randomized benchmarking conversions ---------------------------------------------

def _depol_range(p_depol: float) -> None:
    if not 0 <= p_depol <= 0.75:
        raise ValueError(f"p_depol={p_depol} outside [0, 3/4]")


def rb_decay(p_depol: float) -> float:
    """Survival ``tr(|0><0| E(E(|0><0|)))`` for depolarizing ``E``."""
    _depol_range(p_depol)
    return (1 + (1 - 4 * p_depol / 3) ** 2) / 2


def gate_error(p_depol: float, dim: int = 2) -> float:
    p = rb_decay(p_depol)
    return 1 - p - (1 - p) / dim


def depol_from_gate_error(r: float) -> float:
    """Inverse of :func:`gate_error` for a qubit, on the branch with ``p_depol <= 3/4``."""
    if not 0 <= r <= 0.25:
        raise ValueError(f"r={r} outside [0, 1/4]")
    # r = (1 - p)/2 and 1 - p = (1 - f^2)/2 with f = 1 - 4 p_depol/3  =>  f^2 = 1 - 4r
    return 0.75 * (1 - math.sqrt(1 - 4 * r))


def rotation_error_from_t(eps_t: float, eps_synth: float, scaling: float = 1.5) -> float:
    """Error of an arbitrary rotation synthesized from ``scaling * log2(1/eps)`` T gates."""
    if not 0 <= eps_t < 1:
        raise ValueError(f"eps_t={eps_t} outside [0, 1)")
    if not 0 < eps_synth < 1:
        raise ValueError(f"eps_synth={eps_synth} outside (0, 1)")
    return -math.expm1(scaling * math.log2(1 / eps_synth) * math.log1p(-eps_t))


def shot_noise_bound(shots: int, bernoulli_p: float = 0.5, classes: int = 10) -> float:
    """Loss fluctuation from shot noise at the plateau point (all ``<Z> ~ 0``).

    The true-class term weighs ``(K-1)/K`` and the other ``K-1`` independent terms add
    in quadrature with weight ``1/K`` each.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if not 0 <= bernoulli_p <= 1:
        raise ValueError(f"bernoulli_p={bernoulli_p} outside [0, 1]")
    sd = math.sqrt(4 * bernoulli_p * (1 - bernoulli_p) / shots)
    return ((classes - 1) / classes - math.sqrt(classes - 1) / classes) * sd


# --- reference tables ----------------------------------------------------------------

@dataclass(frozen=True)
class CatalogRow:
    protocol: str
    space_d2: float
    time_d: float
    p_distilled: float | None  # None: passes the input rate through
    code_distance: int | None
    p_input: float | None


def protocol_catalog() -> list[CatalogRow]:
    """Published protocol costs at input error 1e-4 (literature values, not computed here)."""
    return [
        CatalogRow("(15-to-1)_(7,3,3)", 6.69, 1.65, 4.4e-8, 11, 1e-4),
        CatalogRow("(15-to-1)_(9,3,3)", 4.51, 2.78, 1.5e-9, 13, 1e-4),
        CatalogRow("(15-to-1)^4_(9,3,3) x (20-to-4)_(15,7,9)", 45.43, 4.75, 2.4e-15, 19, 1e-4),
        CatalogRow("No distillation", 1.0, 1.0, None, None, None),
    ]


# Full-circuit reference costs for 10 algorithmic qubits at p_phys = 1e-3 (external
# estimator output; T-factory sizes and cycle data are not derivable from the formulas).
FULL_CIRCUIT_REFERENCE = [
    {"budget": 1e-3, "layers": 50, "logical_rate": 3.00e-10, "distilled_t_rate": 2.47e-9,
     "distance": 15, "data_qubits": 13500, "t_factory_qubits": 1.746e6,
     "t_factory_no_distillation": 1.35e4, "cycle_us": 6.0, "logical_cycles": 4060, "runtime_ms": 24},
    {"budget": 1e-3, "layers": 100, "logical_rate": 3.00e-10, "distilled_t_rate": 2.47e-9,
     "distance": 15, "data_qubits": 13500, "t_factory_qubits": 1.782e6,
     "t_factory_no_distillation": 1.35e4, "cycle_us": 6.0, "logical_cycles": 8410, "runtime_ms": 50},
    {"budget": 1e-4, "layers": 50, "logical_rate": 3.00e-11, "distilled_t_rate": 5.51e-10,
     "distance": 17, "data_qubits": 17340, "t_factory_qubits": 1.746e6,
     "t_factory_no_distillation": 1.73e4, "cycle_us": 6.8, "logical_cycles": 4360, "runtime_ms": 30},
    {"budget": 1e-4, "layers": 100, "logical_rate": 3.00e-11, "distilled_t_rate": 5.51e-10,
     "distance": 17, "data_qubits": 17340, "t_factory_qubits": 1.764e6,
     "t_factory_no_distillation": 1.73e4, "cycle_us": 6.8, "logical_cycles": 8710, "runtime_ms": 59},
]


def full_circuit_estimate(spec: BudgetSpec, logical_cycles: int) -> dict:
    """Distance and data qubits from the budget, with ``N_L = tiles * logical_cycles``."""
    eps_log, _, _ = budget_split(spec.epsilon)
    patch_cycles = patch_tiles(spec.q_alg) * logical_cycles
    exact, linear = required_rate(eps_log, patch_cycles)
    d = choose_distance(spec.p_phys, exact, spec.p_star, spec.coeff)
    return {
        "eps_log": eps_log,
        "patch_cycles": patch_cycles,
        "required_rate": exact,
        "required_rate_linearized": linear,
        "distance": d,
        "logical_error_rate": logical_error_rate(spec.p_phys, d, spec.p_star, spec.coeff),
        "data_qubits": data_qubits(spec.q_alg, d),
    }
