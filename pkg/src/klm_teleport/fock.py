"""Sparse multimode photon-number states.

Basis states are occupation tuples, one nonnegative photon count per mode,
ordered lexicographically.  A pure state is a sparse map from occupation
tuples to complex amplitudes.  All operations are pure functions; states are
treated as immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

Occupation = tuple[int, ...]

#: Amplitudes below this magnitude are dropped when canonicalizing a state.
PRUNE_EPS = 1e-15
#: Measurement outcomes below this probability are omitted from results.
OUTCOME_EPS = 1e-15
#: Tolerance for normalization invariants.
NORM_TOL = 1e-12


@lru_cache(maxsize=None)
def _compositions(modes: int, total: int) -> tuple[Occupation, ...]:
    if modes == 1:
        return ((total,),)
    out: list[Occupation] = []
    for first in range(total + 1):
        out.extend((first,) + rest for rest in _compositions(modes - 1, total - first))
    return tuple(out)


def enumerate_basis(modes: int, total_photons: int) -> list[Occupation]:
    """All occupation tuples of ``total_photons`` photons in ``modes`` modes.

    Returned in lexicographic order; the count is the stars-and-bars binomial
    C(total_photons + modes - 1, modes - 1).
    """
    if modes < 1:
        raise ValueError(f"mode count must be positive, got {modes}")
    if total_photons < 0:
        raise ValueError(f"photon count must be nonnegative, got {total_photons}")
    return list(_compositions(modes, total_photons))


def basis_dimension(modes: int, total_photons: int) -> int:
    """Size of ``enumerate_basis(modes, total_photons)`` without enumerating it."""
    if modes < 1:
        raise ValueError(f"mode count must be positive, got {modes}")
    return math.comb(total_photons + modes - 1, modes - 1)


@dataclass(frozen=True)
class PureState:
    """Sparse multimode pure state: occupation tuple -> complex amplitude.

    Zero amplitudes are kept out of the map by the constructors below;
    ``mode_count == 0`` is allowed and describes the trivial (fully measured)
    remainder with the single key ``()``.
    """

    mode_count: int
    amplitudes: dict[Occupation, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.mode_count < 0:
            raise ValueError("mode count must be nonnegative")
        for occ in self.amplitudes:
            if len(occ) != self.mode_count:
                raise ValueError(f"occupation {occ} does not match mode count {self.mode_count}")
            if any(k < 0 for k in occ):
                raise ValueError(f"negative photon count in occupation {occ}")

    @classmethod
    def basis_state(cls, occupation: Iterable[int]) -> "PureState":
        occ = tuple(int(k) for k in occupation)
        return cls(len(occ), {occ: 1.0 + 0j})

    @classmethod
    def from_terms(cls, mode_count: int, terms: dict[Occupation, complex]) -> "PureState":
        """Build a state from a raw amplitude map, dropping negligible entries."""
        cleaned = {occ: complex(a) for occ, a in terms.items() if abs(a) > PRUNE_EPS}
        return cls(mode_count, cleaned)

    def amplitude(self, occupation: Iterable[int]) -> complex:
        return self.amplitudes.get(tuple(occupation), 0j)

    def norm(self) -> float:
        return math.sqrt(math.fsum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalized(self) -> "PureState":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero state")
        return PureState(self.mode_count, {occ: a / nrm for occ, a in self.amplitudes.items()})

    def scaled(self, factor: complex) -> "PureState":
        return PureState.from_terms(
            self.mode_count, {occ: a * factor for occ, a in self.amplitudes.items()}
        )

    def pruned(self, eps: float = PRUNE_EPS) -> "PureState":
        return PureState(
            self.mode_count, {occ: a for occ, a in self.amplitudes.items() if abs(a) > eps}
        )

    def require_normalized(self, tol: float = 1e-9) -> None:
        dev = abs(self.norm() - 1.0)
        if dev > tol:
            raise ValueError(f"state is not normalized (|norm - 1| = {dev:.3e})")

    def inner(self, other: "PureState") -> complex:
        """Hermitian inner product, self conjugated."""
        if self.mode_count != other.mode_count:
            raise ValueError("inner product needs matching mode counts")
        small, large = self.amplitudes, other.amplitudes
        if len(large) < len(small):
            return complex(
                sum(a.conjugate() * small[occ] for occ, a in large.items() if occ in small)
            ).conjugate()
        return complex(
            sum(small[occ].conjugate() * large[occ] for occ in small if occ in large)
        )

    def items_sorted(self) -> list[tuple[Occupation, complex]]:
        return sorted(self.amplitudes.items())


def tensor(left: PureState, right: PureState) -> PureState:
    """Tensor product; the right factor's modes are appended after the left's."""
    combined: dict[Occupation, complex] = {}
    for occ_l, amp_l in left.amplitudes.items():
        for occ_r, amp_r in right.amplitudes.items():
            combined[occ_l + occ_r] = amp_l * amp_r
    return PureState.from_terms(left.mode_count + right.mode_count, combined)


class MeasurementOutcome(NamedTuple):
    pattern: Occupation
    probability: float
    conditional: PureState


def measure_photon_counts(
    state: PureState,
    measured_modes: Iterable[int],
    *,
    min_probability: float = OUTCOME_EPS,
) -> list[MeasurementOutcome]:
    """Project onto photon-count patterns of a subset of modes.

    Returns (pattern, probability, conditional state on the remaining modes)
    sorted by pattern, omitting patterns with probability below
    ``min_probability``.  Conditional amplitudes keep their phases, so
    recombining sqrt(probability) * pattern x conditional reconstructs the
    input state exactly.
    """
    modes = sorted({int(i) for i in measured_modes})
    if not modes:
        raise ValueError("measured mode set must be non-empty")
    if modes[0] < 0 or modes[-1] >= state.mode_count:
        raise ValueError(f"measured modes {modes} out of range for {state.mode_count} modes")
    state.require_normalized()
    mset = set(modes)
    keep = [i for i in range(state.mode_count) if i not in mset]

    grouped: dict[Occupation, dict[Occupation, complex]] = {}
    for occ, amp in state.amplitudes.items():
        pattern = tuple(occ[i] for i in modes)
        rest = tuple(occ[i] for i in keep)
        grouped.setdefault(pattern, {})[rest] = amp

    outcomes: list[MeasurementOutcome] = []
    for pattern in sorted(grouped):
        branch = grouped[pattern]
        prob = math.fsum(abs(a) ** 2 for a in branch.values())
        if prob < min_probability:
            continue
        scale = 1.0 / math.sqrt(prob)
        conditional = PureState(len(keep), {occ: a * scale for occ, a in branch.items()})
        outcomes.append(MeasurementOutcome(pattern, prob, conditional))
    return outcomes


@dataclass(frozen=True)
class QubitAmplitudes:
    """Logical qubit amplitudes; the encoding (vacuum/photon or H/V) is contextual."""

    alpha: complex
    beta: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        dev = abs(abs(self.alpha) ** 2 + abs(self.beta) ** 2 - 1.0)
        if dev > NORM_TOL:
            raise ValueError(f"qubit amplitudes are not normalized (deviation {dev:.3e})")

    @classmethod
    def from_unnormalized(cls, alpha: complex, beta: complex) -> "QubitAmplitudes":
        nrm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
        if nrm == 0.0:
            raise ValueError("zero vector cannot define a qubit")
        return cls(alpha / nrm, beta / nrm)

    @classmethod
    def haar_random(cls, rng: np.random.Generator) -> "QubitAmplitudes":
        z = rng.normal(size=4)
        return cls.from_unnormalized(z[0] + 1j * z[1], z[2] + 1j * z[3])

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    def fidelity_with(self, other: "QubitAmplitudes") -> float:
        overlap = self.alpha.conjugate() * other.alpha + self.beta.conjugate() * other.beta
        return abs(overlap) ** 2
