"""Polarization-encoded variant of the protocol and its physical correction circuit.

Here every rail carries exactly one photon and the logic lives in its
polarization: horizontal is logical 0, vertical is logical 1.  A spatial mode
contributes two Fock slots, ``slot_index(mode, H)`` and ``slot_index(mode, V)``,
and the (n+1)-point Fourier transform acts identically on the horizontal and
vertical slot blocks of the measured modes.  Polarization-resolving counters
then report the detected vertical total m, which plays exactly the role of the
photon count in the number-encoded protocol.

The amplitude correction becomes a small optical circuit: a polarizing beam
splitter separates the two logical components, a second splitter rotated by
theta = arccos of the weaker-to-stronger coefficient ratio diverts excess
amplitude toward a detector, a phase plate removes arg(c_{m-1}) - arg(c_m),
and a polarization rotation restores the split component to the H/V basis.
No click at the detector leaves the input qubit, exactly, on two rails.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .fock import Occupation, PureState, QubitAmplitudes, measure_photon_counts, tensor
from .optics import ModeUnitary, apply, embed, fourier_unitary
from .teleport import (
    ORACLE_TOL,
    OracleMismatchError,
    PatternRecord,
    ResourceCoefficients,
    TeleportOutcome,
    run_analytic,
)

HORIZONTAL = "H"
VERTICAL = "V"

#: Largest n for which the polarization oracle runs by default.
POLARIZATION_ORACLE_LIMIT = 3


def slot_index(mode: int, polarization: str) -> int:
    """Fock slot of a (spatial mode, polarization) pair: H first, then V."""
    if polarization == HORIZONTAL:
        return 2 * mode
    if polarization == VERTICAL:
        return 2 * mode + 1
    raise ValueError(f"polarization must be {HORIZONTAL!r} or {VERTICAL!r}, got {polarization!r}")


@dataclass(frozen=True)
class PolarizedPhotonState:
    """Photon state over ``spatial_modes`` rails, two slots per rail."""

    spatial_modes: int
    state: PureState

    def __post_init__(self) -> None:
        if self.state.mode_count != 2 * self.spatial_modes:
            raise ValueError(
                f"state has {self.state.mode_count} slots; "
                f"{self.spatial_modes} spatial modes need {2 * self.spatial_modes}"
            )

    @classmethod
    def single_photon(
        cls,
        spatial_modes: int,
        amplitudes: Mapping[int, tuple[complex, complex]],
    ) -> "PolarizedPhotonState":
        """One photon spread over rails: mode -> (horizontal, vertical) amplitude."""
        slots = 2 * spatial_modes
        terms: dict[Occupation, complex] = {}
        for mode, (amp_h, amp_v) in amplitudes.items():
            if not 0 <= mode < spatial_modes:
                raise ValueError(f"mode {mode} out of range for {spatial_modes} rails")
            terms[_unit_occupation(slots, slot_index(mode, HORIZONTAL))] = amp_h
            terms[_unit_occupation(slots, slot_index(mode, VERTICAL))] = amp_v
        return cls(spatial_modes, PureState.from_terms(slots, terms))

    def single_photon_amplitude(self, mode: int, polarization: str) -> complex:
        """Amplitude of the lone photon sitting at (mode, polarization)."""
        slots = 2 * self.spatial_modes
        return self.state.amplitude(_unit_occupation(slots, slot_index(mode, polarization)))

    def mode_amplitudes(self, mode: int) -> tuple[complex, complex]:
        return (
            self.single_photon_amplitude(mode, HORIZONTAL),
            self.single_photon_amplitude(mode, VERTICAL),
        )

    def norm(self) -> float:
        return self.state.norm()


def _unit_occupation(slots: int, slot: int) -> Occupation:
    return tuple(1 if i == slot else 0 for i in range(slots))


@dataclass(frozen=True)
class RotatedPBS:
    """Polarizing beam splitter rotated by ``theta``, with named output rails.

    The splitter reflects the polarization (cos t, -sin t) and transmits the
    orthogonal (sin t, cos t); at theta = 0 it reflects H and transmits V.
    A photon at ``input_mode`` with amplitudes (h, v) leaves as

        reflect:  (cos t * h - sin t * v)  carrying (cos t, -sin t),
        transmit: (sin t * h + cos t * v)  carrying (sin t, cos t).

    ``apply`` handles arbitrary superpositions with at most one photon on the
    input rail and empty output rails, which is all the correction circuit
    ever produces.
    """

    theta: float
    input_mode: int
    reflect_mode: int
    transmit_mode: int

    def __post_init__(self) -> None:
        modes = (self.input_mode, self.reflect_mode, self.transmit_mode)
        if len(set(modes)) != 3 or any(m < 0 for m in modes):
            raise ValueError(f"splitter rails must be distinct and nonnegative, got {modes}")

    def reflected_polarization(self) -> tuple[float, float]:
        return (math.cos(self.theta), -math.sin(self.theta))

    def transmitted_polarization(self) -> tuple[float, float]:
        return (math.sin(self.theta), math.cos(self.theta))

    def apply(self, polarized: PolarizedPhotonState) -> PolarizedPhotonState:
        if max(self.input_mode, self.reflect_mode, self.transmit_mode) >= polarized.spatial_modes:
            raise ValueError("splitter rails exceed the state's spatial modes")
        slots = 2 * polarized.spatial_modes
        in_h = slot_index(self.input_mode, HORIZONTAL)
        in_v = slot_index(self.input_mode, VERTICAL)
        out = {
            (HORIZONTAL, "r"): slot_index(self.reflect_mode, HORIZONTAL),
            (VERTICAL, "r"): slot_index(self.reflect_mode, VERTICAL),
            (HORIZONTAL, "t"): slot_index(self.transmit_mode, HORIZONTAL),
            (VERTICAL, "t"): slot_index(self.transmit_mode, VERTICAL),
        }
        cos_t = math.cos(self.theta)
        sin_t = math.sin(self.theta)
        terms: dict[Occupation, complex] = {}
        for occ, amp in polarized.state.amplitudes.items():
            if any(occ[slot] for slot in out.values()):
                raise ValueError("output rails must be empty before the splitter")
            count = occ[in_h] + occ[in_v]
            if count == 0:
                terms[occ] = terms.get(occ, 0j) + amp
                continue
            if count > 1:
                raise ValueError("splitter model handles at most one photon on its input rail")
            reflected = cos_t * amp if occ[in_h] else -sin_t * amp
            transmitted = sin_t * amp if occ[in_h] else cos_t * amp
            cleared = list(occ)
            cleared[in_h] = cleared[in_v] = 0
            for branch_amp, arm, (pol_h, pol_v) in (
                (reflected, "r", self.reflected_polarization()),
                (transmitted, "t", self.transmitted_polarization()),
            ):
                for pol, weight in ((HORIZONTAL, pol_h), (VERTICAL, pol_v)):
                    value = branch_amp * weight
                    if value == 0:
                        continue
                    target = cleared.copy()
                    target[out[(pol, arm)]] = 1
                    key = tuple(target)
                    terms[key] = terms.get(key, 0j) + value
        return PolarizedPhotonState(
            polarized.spatial_modes, PureState.from_terms(slots, terms)
        )


def phase_shift(polarized: PolarizedPhotonState, mode: int, phase: complex) -> PolarizedPhotonState:
    """Multiply every photon on ``mode`` (either polarization) by ``phase``."""
    if abs(abs(phase) - 1.0) > 1e-12:
        raise ValueError("phase factor must have unit modulus")
    h_slot = slot_index(mode, HORIZONTAL)
    v_slot = slot_index(mode, VERTICAL)
    terms = {
        occ: amp * phase ** (occ[h_slot] + occ[v_slot])
        for occ, amp in polarized.state.amplitudes.items()
    }
    return PolarizedPhotonState(
        polarized.spatial_modes,
        PureState.from_terms(polarized.state.mode_count, terms),
    )


def rotate_polarization(
    polarized: PolarizedPhotonState, mode: int, theta: float
) -> PolarizedPhotonState:
    """Rotate the (H, V) amplitudes on one rail by [[cos, -sin], [sin, cos]]."""
    h_slot = slot_index(mode, HORIZONTAL)
    v_slot = slot_index(mode, VERTICAL)
    cos_t = math.cos(theta)
    sin_t = math.sin(theta)
    terms: dict[Occupation, complex] = {}
    for occ, amp in polarized.state.amplitudes.items():
        count = occ[h_slot] + occ[v_slot]
        if count == 0:
            terms[occ] = terms.get(occ, 0j) + amp
            continue
        if count > 1:
            raise ValueError("rotation model handles at most one photon on the rail")
        was_h = occ[h_slot] == 1
        cleared = list(occ)
        cleared[h_slot] = cleared[v_slot] = 0
        for slot, weight in (
            (h_slot, cos_t if was_h else -sin_t),
            (v_slot, sin_t if was_h else cos_t),
        ):
            if weight == 0:
                continue
            target = cleared.copy()
            target[slot] = 1
            key = tuple(target)
            terms[key] = terms.get(key, 0j) + amp * weight
    return PolarizedPhotonState(
        polarized.spatial_modes,
        PureState.from_terms(polarized.state.mode_count, terms),
    )


def input_qubit_state(qubit: QubitAmplitudes) -> PureState:
    """Single rail carrying alpha |H> + beta |V>, as a two-slot state."""
    return PureState.from_terms(2, {(1, 0): qubit.alpha, (0, 1): qubit.beta})


def build_polarized_resource(rc: ResourceCoefficients) -> PolarizedPhotonState:
    """Resource over 2n rails, one photon each.

    Term i polarizes the first i front rails and the last n-i back rails
    vertically, everything else horizontally, weighted by c_i.
    """
    n = rc.n
    slots = 4 * n
    terms: dict[Occupation, complex] = {}
    for i, coeff in enumerate(rc.amplitudes):
        occ = [0] * slots
        for rail in range(2 * n):
            vertical = rail < i or (n + i) <= rail
            occ[2 * rail + (1 if vertical else 0)] = 1
        terms[tuple(occ)] = coeff
    return PolarizedPhotonState(2 * n, PureState.from_terms(slots, terms))


def run_analytic_polarization(
    rc: ResourceCoefficients, qubit: QubitAmplitudes
) -> list[TeleportOutcome]:
    """Outcome law for the polarization encoding.

    Identical to the number-encoded law: the detected vertical total m has
    probability |alpha c_m|^2 + |beta c_{m-1}|^2 and leaves rail n+m carrying
    the conditional qubit with H as logical 0 and V as logical 1.
    """
    return run_analytic(rc, qubit)


def run_oracle_polarization(
    rc: ResourceCoefficients,
    qubit: QubitAmplitudes,
    *,
    limit: int = POLARIZATION_ORACLE_LIMIT,
    tol: float = ORACLE_TOL,
) -> list[TeleportOutcome]:
    """Exact slot-space simulation of the polarization protocol.

    Applies the doubled Fourier transform (same matrix on the horizontal and
    vertical slot blocks of rails 0..n), counts photons in every measured
    slot, groups patterns by their vertical total, and reconciles each pattern
    against the outcome law before aggregating.
    """
    n = rc.n
    if n > limit:
        raise ValueError(
            f"polarization oracle limited to n <= {limit} (requested n={n}); "
            "raise the limit explicitly to go bigger"
        )
    analytic = run_analytic(rc, qubit)
    state = tensor(input_qubit_state(qubit), build_polarized_resource(rc).state)
    total_slots = 2 * (2 * n + 1)
    fourier = fourier_unitary(n + 1).matrix
    doubled = np.zeros((2 * (n + 1), 2 * (n + 1)), dtype=complex)
    doubled[: n + 1, : n + 1] = fourier
    doubled[n + 1 :, n + 1 :] = fourier
    h_slots = tuple(slot_index(mode, HORIZONTAL) for mode in range(n + 1))
    v_slots = tuple(slot_index(mode, VERTICAL) for mode in range(n + 1))
    transform = embed(ModeUnitary(doubled), h_slots + v_slots, total_slots)
    evolved = apply(transform, state)
    measured = measure_photon_counts(evolved, range(2 * (n + 1)))

    per_m_patterns: dict[int, list[PatternRecord]] = {}
    per_m_prob: dict[int, list[float]] = {}
    per_m_qubit: dict[int, tuple[float, QubitAmplitudes]] = {}

    for pattern, prob, conditional in measured:
        if sum(pattern) != n + 1:
            raise OracleMismatchError(
                f"pattern {pattern} detected {sum(pattern)} photons, expected {n + 1}"
            )
        m = sum(pattern[1::2])
        pat_tol = tol if prob >= 1e-12 else 1e-6
        record, corrected = _reconcile_polarized_pattern(
            pattern, m, prob, conditional, rc, qubit, analytic[m], pat_tol
        )
        per_m_patterns.setdefault(m, []).append(record)
        per_m_prob.setdefault(m, []).append(prob)
        if corrected is not None:
            best = per_m_qubit.get(m)
            if best is None or prob > best[0]:
                per_m_qubit[m] = (prob, corrected)

    outcomes = []
    for m in range(n + 2):
        prob = math.fsum(per_m_prob.get(m, []))
        expected = analytic[m].probability
        if abs(prob - expected) > tol:
            raise OracleMismatchError(
                f"aggregated probability for vertical total m={m} is {prob!r}, "
                f"law gives {expected!r}"
            )
        success_class = 1 <= m <= n
        outcomes.append(
            TeleportOutcome(
                m=m,
                probability=prob,
                qubit_mode=n + m if success_class else None,
                conditional_qubit=per_m_qubit.get(m, (0.0, None))[1] if success_class else None,
                patterns=tuple(per_m_patterns.get(m, ())),
            )
        )
    total = math.fsum(o.probability for o in outcomes)
    if abs(total - 1.0) > 1e-12:
        raise OracleMismatchError(f"outcome probabilities sum to {total!r}")
    return outcomes


def _spectator_occupations(n: int, m: int) -> tuple[Occupation, Occupation]:
    """Expected back-rail slot patterns for the two logical branches at outcome m.

    Back rails local 0..n-1 stand for global rails n+1..2n; the qubit rides
    local rail m-1.  Rails before it are horizontal, rails after it vertical.
    """
    horizontal = (1, 0)
    vertical = (0, 1)
    prefix = horizontal * (m - 1)
    suffix = vertical * (n - m)
    return prefix + horizontal + suffix, prefix + vertical + suffix


def _reconcile_polarized_pattern(
    pattern: Occupation,
    m: int,
    prob: float,
    conditional: PureState,
    rc: ResourceCoefficients,
    qubit: QubitAmplitudes,
    analytic: TeleportOutcome,
    tol: float,
) -> tuple[PatternRecord, QubitAmplitudes | None]:
    n = rc.n
    if m > n + 1:
        raise OracleMismatchError(f"impossible vertical total {m} in pattern {pattern}")

    if m == 0 or m == n + 1:
        pol = (0, 1) if m == 0 else (1, 0)
        expected = {pol * n} if n else {()}
        if set(conditional.pruned(1e-9).amplitudes) - expected:
            raise OracleMismatchError(
                f"failure pattern {pattern} left rails {sorted(conditional.amplitudes)}"
            )
        return PatternRecord(pattern, prob, 1 + 0j, float("nan")), None

    occ_h, occ_v = _spectator_occupations(n, m)
    amp_h = conditional.amplitude(occ_h)
    amp_v = conditional.amplitude(occ_v)
    stray = max(0.0, 1.0 - abs(amp_h) ** 2 - abs(amp_v) ** 2)
    if stray > tol:
        raise OracleMismatchError(
            f"pattern {pattern} has weight {stray:.3e} outside the expected rail pattern"
        )

    p_m = analytic.probability
    expected_h = abs(qubit.alpha * rc.at(m)) / math.sqrt(p_m) if p_m > 0 else 0.0
    expected_v = abs(qubit.beta * rc.at(m - 1)) / math.sqrt(p_m) if p_m > 0 else 0.0
    if abs(abs(amp_h) - expected_h) > tol or abs(abs(amp_v) - expected_v) > tol:
        raise OracleMismatchError(
            f"pattern {pattern} magnitudes ({abs(amp_h):.12f}, {abs(amp_v):.12f}) "
            f"differ from the law ({expected_h:.12f}, {expected_v:.12f})"
        )

    target = qubit.beta * rc.at(m - 1)
    source = qubit.alpha * rc.at(m)
    if abs(amp_v) < 1e-13 or target == 0 or source == 0 or abs(amp_h) < 1e-13:
        phase = 1 + 0j
    else:
        ratio = (amp_h * target) / (amp_v * source)
        phase = ratio / abs(ratio)

    fidelity = float("nan")
    corrected = None
    if analytic.conditional_qubit is not None and (amp_h != 0 or amp_v != 0):
        corrected = QubitAmplitudes.from_unnormalized(amp_h, amp_v * phase)
        fidelity = corrected.fidelity_with(analytic.conditional_qubit)
        if fidelity < 1.0 - tol:
            raise OracleMismatchError(
                f"pattern {pattern} corrected fidelity {fidelity!r} below tolerance"
            )
    return PatternRecord(pattern, prob, phase, fidelity), corrected


def teleported_state(
    rc: ResourceCoefficients, qubit: QubitAmplitudes, m: int
) -> PolarizedPhotonState:
    """Conditional single-rail state left by success outcome m."""
    if not 1 <= m <= rc.n:
        raise ValueError(f"success outcomes are 1..{rc.n}, got m={m}")
    front = qubit.alpha * rc.at(m)
    back = qubit.beta * rc.at(m - 1)
    p_m = abs(front) ** 2 + abs(back) ** 2
    if p_m == 0.0:
        raise ValueError(f"outcome m={m} never occurs for this input")
    scale = 1.0 / math.sqrt(p_m)
    return PolarizedPhotonState.single_photon(1, {0: (front * scale, back * scale)})


class CircuitResult(NamedTuple):
    """Outcome of the optical correction circuit for one success event."""

    p_success: float
    recovered: QubitAmplitudes | None
    pre_detection: PolarizedPhotonState
    detector_amplitude: complex
    theta: float


#: Rail numbering inside the correction circuit.
CIRCUIT_RAILS = 5
_DETECTOR_RAIL = 3
_KEPT_RAIL = 4


def correction_circuit(
    m: int, rc: ResourceCoefficients, teleported: PolarizedPhotonState
) -> CircuitResult:
    """Run the post-selection circuit on a teleported single-rail qubit.

    Rail 0 is the input; the first splitter reflects H to rail 1 and transmits
    V to rail 2.  The stronger logical component then meets a splitter rotated
    by theta = arccos(weak/strong) whose discard arm feeds the detector on
    rail 3, while rail 4 keeps the attenuated remainder.  A phase plate on the
    vertical-logic arm removes the coefficient phase difference and a
    polarization rotation on rail 4 restores the H/V basis.  With no click,
    rails then carry the original qubit; the success probability is
    min(|c_{m-1}|^2, |c_m|^2) / p(m).
    """
    if teleported.spatial_modes != 1:
        raise ValueError("teleported state must live on a single rail")
    if not 1 <= m <= rc.n:
        raise ValueError(f"success outcomes are 1..{rc.n}, got m={m}")
    c_here = rc.at(m)
    c_prev = rc.at(m - 1)
    if c_here == 0 and c_prev == 0:
        raise ValueError(f"outcome m={m} never occurs; nothing to correct")

    slots = 2 * CIRCUIT_RAILS
    widened = PolarizedPhotonState(
        CIRCUIT_RAILS,
        PureState.from_terms(
            slots,
            {
                occ + (0,) * (slots - 2): amp
                for occ, amp in teleported.state.amplitudes.items()
            },
        ),
    )
    split = RotatedPBS(theta=0.0, input_mode=0, reflect_mode=1, transmit_mode=2)
    state = split.apply(widened)

    weight_here = abs(c_here) ** 2
    weight_prev = abs(c_prev) ** 2
    if weight_here <= weight_prev:
        # Horizontal logic is the weak branch; trim the vertical arm.
        theta = math.acos(min(1.0, abs(c_here) / abs(c_prev)))
        trimmer = RotatedPBS(
            theta=theta, input_mode=2, reflect_mode=_DETECTOR_RAIL, transmit_mode=_KEPT_RAIL
        )
        detector_polarization = trimmer.reflected_polarization()
        h_rail, v_rail = 1, _KEPT_RAIL
    else:
        theta = math.acos(min(1.0, abs(c_prev) / abs(c_here)))
        trimmer = RotatedPBS(
            theta=theta, input_mode=1, reflect_mode=_KEPT_RAIL, transmit_mode=_DETECTOR_RAIL
        )
        detector_polarization = trimmer.transmitted_polarization()
        h_rail, v_rail = _KEPT_RAIL, 2
    state = trimmer.apply(state)

    if c_here != 0 and c_prev != 0:
        delta = cmath.phase(c_prev) - cmath.phase(c_here)
        state = phase_shift(state, v_rail, cmath.exp(-1j * delta))
    state = rotate_polarization(state, _KEPT_RAIL, theta)

    pol_h, pol_v = detector_polarization
    detector_amplitude = (
        pol_h * state.single_photon_amplitude(_DETECTOR_RAIL, HORIZONTAL)
        + pol_v * state.single_photon_amplitude(_DETECTOR_RAIL, VERTICAL)
    )
    alpha_out = state.single_photon_amplitude(h_rail, HORIZONTAL)
    beta_out = state.single_photon_amplitude(v_rail, VERTICAL)
    p_success = abs(alpha_out) ** 2 + abs(beta_out) ** 2
    leak = 1.0 - p_success - abs(detector_amplitude) ** 2
    if abs(leak) > 1e-12:
        raise RuntimeError(f"circuit amplitude leaked outside the qubit arms ({leak:.3e})")

    recovered = None
    if p_success > 0.0:
        recovered = QubitAmplitudes.from_unnormalized(alpha_out, beta_out)
    return CircuitResult(
        p_success=p_success,
        recovered=recovered,
        pre_detection=state,
        detector_amplitude=detector_amplitude,
        theta=theta,
    )
