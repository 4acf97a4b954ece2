"""Resource-coefficient optimization over the probability simplex.

Two figures of merit, both functions of the weights w_i = |c_i|^2 alone:

* ``success``: the input-independent corrected-success probability
  sum_m min(w_{m-1}, w_m), maximized by the uniform resource at n/(n+1).
* ``avg_fidelity``: teleportation fidelity averaged over Haar-random input
  qubits without any correction step, whose closed form is derived here and
  cross-checked by Monte Carlo sampling of the outcome law.

The search runs Nelder-Mead in softmax coordinates from many seeded starts
(plus an exhaustive coarse simplex grid for small n), then polishes the
incumbent.  Both objectives are concave over the simplex, so multistart local
search is globally reliable; an independent extrema certificate bounds the
success objective from above to witness optimality.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from .correction import adjacent_minima_sum, classify_sequence
from .fock import QubitAmplitudes, enumerate_basis
from .teleport import OracleMismatchError, ResourceCoefficients, run_analytic

#: Simplex grid spacing 1/GRID_RESOLUTION used to floor the search for small n.
GRID_RESOLUTION = 20
#: Largest n whose simplex grid is enumerated exhaustively.
GRID_LIMIT = 3


@dataclass(frozen=True)
class SimplexPoint:
    """Probability vector over the n+1 resource weights."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        ws = tuple(float(w) for w in self.weights)
        if len(ws) < 2:
            raise ValueError("need at least two weights (n >= 1)")
        if any(w < 0 for w in ws):
            raise ValueError("weights must be nonnegative")
        if abs(math.fsum(ws) - 1.0) > 1e-12:
            raise ValueError("weights must sum to one")
        object.__setattr__(self, "weights", ws)

    @property
    def n(self) -> int:
        return len(self.weights) - 1

    @classmethod
    def uniform(cls, n: int) -> "SimplexPoint":
        if n < 1:
            raise ValueError(f"resource size must be at least 1, got {n}")
        vals = [1.0 / (n + 1)] * (n + 1)
        vals[-1] = 1.0 - math.fsum(vals[:-1])
        return cls(tuple(vals))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "SimplexPoint":
        return cls.from_unnormalized(rng.dirichlet(np.ones(n + 1)))

    @classmethod
    def from_unnormalized(cls, values: Iterable[float]) -> "SimplexPoint":
        vals = [float(v) for v in values]
        if any(v < 0 for v in vals):
            raise ValueError("weights must be nonnegative")
        total = math.fsum(vals)
        if total <= 0:
            raise ValueError("cannot normalize a zero weight vector")
        return cls(tuple(v / total for v in vals))

    def to_coefficients(self) -> ResourceCoefficients:
        return ResourceCoefficients.from_weights(self.weights)


class FailureConvention(enum.Enum):
    """How failure outcomes (m = 0 and m = n+1) score in the average fidelity.

    COLLAPSE credits the overlap of the input with the logical state the
    failure collapses to; ZERO_FIDELITY scores failures as total loss.
    """

    COLLAPSE = "collapse"
    ZERO_FIDELITY = "zero_fidelity"


def objective_success(point: SimplexPoint) -> float:
    """Corrected-success probability: sum of adjacent weight minima."""
    return adjacent_minima_sum(point.weights)


def avg_fidelity_closed_form(
    point: SimplexPoint,
    convention: FailureConvention = FailureConvention.COLLAPSE,
) -> float:
    """Haar-averaged uncorrected teleportation fidelity.

    With g = sum_m sqrt(w_m w_{m-1}), averaging the per-outcome fidelities
    over Haar inputs gives (2 + g)/3 under COLLAPSE and
    (2 - w_0 - w_n + g)/3 under ZERO_FIDELITY.
    """
    w = point.weights
    cross = math.fsum(math.sqrt(a * b) for a, b in zip(w, w[1:]))
    if convention is FailureConvention.COLLAPSE:
        return (2.0 + cross) / 3.0
    return (2.0 - w[0] - w[-1] + cross) / 3.0


def average_fidelity_for_qubit(
    point: SimplexPoint,
    qubit: QubitAmplitudes,
    convention: FailureConvention = FailureConvention.COLLAPSE,
) -> float:
    """Expected fidelity for one fixed input, outcome by outcome.

    Literal route used to validate the vectorized sampler: runs the outcome
    law, scores successes by conditional-state overlap and failures by the
    chosen convention, and weights by outcome probabilities.
    """
    outcomes = run_analytic(point.to_coefficients(), qubit)
    n = point.n
    total = 0.0
    for outcome in outcomes:
        if outcome.probability == 0.0:
            continue
        if outcome.conditional_qubit is not None:
            overlap = outcome.conditional_qubit.fidelity_with(qubit)
            total += outcome.probability * overlap
        elif convention is FailureConvention.COLLAPSE:
            collapsed = 0 if outcome.m == 0 else 1
            weight = abs(qubit.alpha) ** 2 if collapsed == 0 else abs(qubit.beta) ** 2
            total += outcome.probability * weight
    return total


def _sample_fidelities(
    weights: Sequence[float],
    logical_zero_weight: np.ndarray,
    convention: FailureConvention,
) -> np.ndarray:
    """Vectorized per-sample fidelity, one outcome term at a time."""
    w = np.asarray(weights, dtype=float)
    a = logical_zero_weight
    b = 1.0 - a
    if convention is FailureConvention.COLLAPSE:
        result = a * (a * w[0]) + b * (b * w[-1])
    else:
        result = np.zeros_like(a)
    roots = np.sqrt(w)
    for m in range(1, len(w)):
        result += (a * roots[m] + b * roots[m - 1]) ** 2
    return result


class AvgFidelityEstimate(NamedTuple):
    estimate: float
    std_error: float
    closed_form: float
    samples: int


def objective_avg_fidelity(
    point: SimplexPoint,
    *,
    samples: int = 1_000_000,
    seed: int = 0,
    convention: FailureConvention = FailureConvention.COLLAPSE,
    chunk: int = 200_000,
) -> AvgFidelityEstimate:
    """Monte Carlo estimate of the Haar-averaged fidelity.

    Draws input qubits as four standard normals each, evaluates the
    per-sample fidelity from the outcome law, and insists the estimate agree
    with the closed form within three standard errors; disagreement raises
    OracleMismatchError, since one of the two routes must then be wrong.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    closed = avg_fidelity_closed_form(point, convention)
    rng = np.random.default_rng(seed)
    sums: list[float] = []
    square_sums: list[float] = []
    done = 0
    while done < samples:
        block = min(chunk, samples - done)
        z = rng.standard_normal((block, 4))
        zero_norm = z[:, 0] ** 2 + z[:, 1] ** 2
        one_norm = z[:, 2] ** 2 + z[:, 3] ** 2
        a = zero_norm / (zero_norm + one_norm)
        f = _sample_fidelities(point.weights, a, convention)
        sums.append(float(np.sum(f)))
        square_sums.append(float(np.sum(f * f)))
        done += block
    mean = math.fsum(sums) / samples
    second = math.fsum(square_sums) / samples
    variance = max(0.0, second - mean * mean)
    std_error = math.sqrt(variance / samples)
    if abs(mean - closed) > 3.0 * std_error + 1e-12:
        raise OracleMismatchError(
            f"sampled average fidelity {mean!r} is more than three standard errors "
            f"({std_error:.3e}) from the closed form {closed!r}"
        )
    return AvgFidelityEstimate(mean, std_error, closed, samples)


def optimal_fidelity_profile(n: int) -> SimplexPoint:
    """Weight profile maximizing the average fidelity: w_m ~ sin^2((m+1)pi/(n+2))."""
    if n < 1:
        raise ValueError(f"resource size must be at least 1, got {n}")
    raw = [math.sin((m + 1) * math.pi / (n + 2)) ** 2 for m in range(n + 1)]
    return SimplexPoint.from_unnormalized(raw)


def optimal_avg_fidelity(n: int) -> float:
    """Maximum of the closed form over the simplex: (2 + cos(pi/(n+2))) / 3."""
    if n < 1:
        raise ValueError(f"resource size must be at least 1, got {n}")
    return (2.0 + math.cos(math.pi / (n + 2))) / 3.0


@dataclass(frozen=True)
class OptimalityCertificate:
    """Numerical witness that a weight vector obeys the success-probability bound.

    For strictly varying weights the success probability telescopes to
    1 - (largest peak) - (surplus of the remaining peaks over the interior
    valleys).  The certificate checks the largest peak exceeds the uniform
    weight 1/(n+1) and the surplus is nonnegative, which together force the
    success probability below n/(n+1).  Sequences with equal adjacent weights
    are reported inapplicable rather than guessed at.
    """

    applicable: bool
    reason: str
    success_probability: float
    success_bound: float
    threshold: float
    peak_index: int | None = None
    peak_weight: float | None = None
    exceeds_threshold: bool | None = None
    surplus: float | None = None
    surplus_nonnegative: bool | None = None
    below_bound: bool | None = None
    gap: float | None = None

    def as_dict(self) -> dict:
        return {
            "applicable": self.applicable,
            "reason": self.reason,
            "success_probability": self.success_probability,
            "success_bound": self.success_bound,
            "threshold": self.threshold,
            "peak_index": self.peak_index,
            "peak_weight": self.peak_weight,
            "exceeds_threshold": self.exceeds_threshold,
            "surplus": self.surplus,
            "surplus_nonnegative": self.surplus_nonnegative,
            "below_bound": self.below_bound,
            "gap": self.gap,
        }


def certify_klm_bound(point: SimplexPoint) -> OptimalityCertificate:
    """Certify sum-of-minima < n/(n+1) for a strictly varying weight vector."""
    w = point.weights
    n = point.n
    p_success = adjacent_minima_sum(w)
    bound = n / (n + 1)
    threshold = 1.0 / (n + 1)
    classification = classify_sequence(w)
    if not classification.strict:
        return OptimalityCertificate(
            applicable=False,
            reason="adjacent weights are exactly equal; extrema are ambiguous",
            success_probability=p_success,
            success_bound=bound,
            threshold=threshold,
        )
    peak = max(classification.maxima, key=lambda i: (w[i], -i))
    surplus = math.fsum(
        w[i] for i in classification.maxima if i != peak
    ) - math.fsum(w[i] for i in classification.interior_minima)
    gap = bound - p_success
    return OptimalityCertificate(
        applicable=True,
        reason="",
        success_probability=p_success,
        success_bound=bound,
        threshold=threshold,
        peak_index=peak,
        peak_weight=w[peak],
        exceeds_threshold=w[peak] > threshold,
        surplus=surplus,
        surplus_nonnegative=surplus >= -1e-15,
        below_bound=p_success < bound,
        gap=gap,
    )


@dataclass(frozen=True)
class OptimizationReport:
    objective: str
    best_point: SimplexPoint
    best_value: float
    method: str
    evaluations: int
    restarts: int
    budget_exhausted: bool
    certificate: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "objective": self.objective,
            "n": self.best_point.n,
            "best_weights": list(self.best_point.weights),
            "best_value": self.best_value,
            "method": self.method,
            "evaluations": self.evaluations,
            "restarts": self.restarts,
            "budget_exhausted": self.budget_exhausted,
            "certificate": self.certificate,
        }


def _softmax(x: np.ndarray) -> np.ndarray:
    shifted = np.exp(x - np.max(x))
    return shifted / np.sum(shifted)


_OBJECTIVES = ("success", "avg_fidelity")


def maximize(
    objective: str,
    n: int,
    *,
    budget: int = 150_000,
    seed: int = 0,
    restarts: int = 32,
    convention: FailureConvention = FailureConvention.COLLAPSE,
    mc_samples: int = 1_000_000,
) -> OptimizationReport:
    """Maximize an objective over the weight simplex for a size-n resource.

    Deterministic for a fixed seed.  ``budget`` caps total objective
    evaluations across the grid sweep, the seeded restarts, and the polish
    rounds; exhausting it sets ``budget_exhausted`` and returns the incumbent.
    """
    if objective not in _OBJECTIVES:
        raise ValueError(f"objective must be one of {_OBJECTIVES}, got {objective!r}")
    if n < 1:
        raise ValueError(f"resource size must be at least 1, got {n}")
    if budget < 1:
        raise ValueError("evaluation budget must be positive")

    if objective == "success":
        def score(weights: Sequence[float]) -> float:
            return adjacent_minima_sum(weights)
    else:
        def score(weights: Sequence[float]) -> float:
            cross = math.fsum(
                math.sqrt(a * b) for a, b in zip(weights, weights[1:])
            )
            if convention is FailureConvention.COLLAPSE:
                return (2.0 + cross) / 3.0
            return (2.0 - weights[0] - weights[-1] + cross) / 3.0

    evaluations = 0
    budget_exhausted = False
    best_weights: tuple[float, ...] | None = None
    best_value = -math.inf

    def consider(weights: tuple[float, ...], value: float) -> None:
        nonlocal best_weights, best_value
        if value > best_value + 1e-12:
            best_weights, best_value = weights, value
        elif value >= best_value - 1e-12 and (
            best_weights is None or weights < best_weights
        ):
            best_weights, best_value = weights, value

    used_grid = False
    if n <= GRID_LIMIT:
        used_grid = True
        for cell in enumerate_basis(n + 1, GRID_RESOLUTION):
            weights = tuple(c / GRID_RESOLUTION for c in cell)
            evaluations += 1
            consider(weights, score(weights))
            if evaluations >= budget:
                budget_exhausted = True
                break

    rng = np.random.default_rng(seed)
    dim = n + 1
    per_restart = 2_000 * dim

    def negated(x: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        return -score(tuple(_softmax(x)))

    def run_stage(x0: np.ndarray) -> None:
        nonlocal evaluations, budget_exhausted
        cap = min(per_restart, budget - evaluations)
        if cap <= dim + 1:
            budget_exhausted = True
            return
        result = minimize(
            negated,
            x0,
            method="Nelder-Mead",
            options={
                "xatol": 1e-10,
                "fatol": 1e-13,
                "maxfev": cap,
                "maxiter": cap,
                "adaptive": True,
            },
        )
        weights = tuple(float(w) for w in _softmax(result.x))
        evaluations += 1
        consider(weights, score(weights))

    starts = [rng.standard_normal(dim) for _ in range(restarts)]
    for x0 in starts:
        if evaluations >= budget:
            budget_exhausted = True
            break
        run_stage(x0)

    polish_rounds = 3
    for _ in range(polish_rounds):
        if best_weights is None or evaluations >= budget:
            budget_exhausted = budget_exhausted or evaluations >= budget
            break
        anchor = np.log(np.asarray(best_weights) + 1e-12)
        run_stage(anchor)

    if best_weights is None:
        raise RuntimeError("optimization produced no candidate within the budget")

    best_point = SimplexPoint.from_unnormalized(best_weights)
    best_value = score(best_point.weights)
    evaluations += 1

    uniform = SimplexPoint.uniform(n)
    if objective == "success":
        certificate = certify_klm_bound(best_point).as_dict()
        certificate["uniform_value"] = objective_success(uniform)
        certificate["value_minus_uniform"] = best_value - certificate["uniform_value"]
        certificate["distance_to_uniform_linf"] = max(
            abs(w - u) for w, u in zip(best_point.weights, uniform.weights)
        )
        method = "nelder-mead-softmax-multistart"
    else:
        mc = objective_avg_fidelity(
            best_point,
            samples=mc_samples,
            seed=seed + 1,
            convention=convention,
        )
        certificate = {
            "convention": convention.value,
            "closed_form_at_best": best_value,
            "uniform_value": avg_fidelity_closed_form(uniform, convention),
            "analytic_optimum": optimal_avg_fidelity(n)
            if convention is FailureConvention.COLLAPSE
            else None,
            "mc_estimate": mc.estimate,
            "mc_std_error": mc.std_error,
            "mc_samples": mc.samples,
        }
        method = "nelder-mead-softmax-multistart"
    if used_grid:
        method += "+grid"

    return OptimizationReport(
        objective=objective,
        best_point=best_point,
        best_value=best_value,
        method=method,
        evaluations=evaluations,
        restarts=restarts,
        budget_exhausted=budget_exhausted,
        certificate=certificate,
    )
