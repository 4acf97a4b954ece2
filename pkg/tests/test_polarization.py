"""Polarization encoding, the dual-rail optics toolbox, and the correction circuit."""

import cmath
import math

import numpy as np
import pytest

from klm_teleport import (
    HORIZONTAL,
    VERTICAL,
    CircuitResult,
    PolarizedPhotonState,
    QubitAmplitudes,
    ResourceCoefficients,
    RotatedPBS,
    build_polarized_resource,
    correction_circuit,
    kraus_for,
    oracle_deviation,
    p_success_given_m,
    phase_shift,
    rotate_polarization,
    run_analytic,
    run_analytic_polarization,
    run_oracle_polarization,
    slot_index,
    teleported_state,
)

from helpers import random_coefficients, random_qubit


WORKED = ResourceCoefficients.from_weights([0.5, 0.3, 0.2])


def balanced():
    r = 1 / math.sqrt(2)
    return QubitAmplitudes(r, r)


def test_slot_index_layout():
    assert slot_index(0, HORIZONTAL) == 0
    assert slot_index(0, VERTICAL) == 1
    assert slot_index(3, HORIZONTAL) == 6
    assert slot_index(3, VERTICAL) == 7
    with pytest.raises(ValueError):
        slot_index(0, "D")


def test_single_photon_state_accessors():
    state = PolarizedPhotonState.single_photon(2, {0: (0.6, 0.0), 1: (0.0, 0.8)})
    assert state.single_photon_amplitude(0, HORIZONTAL) == pytest.approx(0.6)
    assert state.single_photon_amplitude(1, VERTICAL) == pytest.approx(0.8)
    assert state.mode_amplitudes(0) == (0.6, 0.0)
    assert state.norm() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        PolarizedPhotonState.single_photon(2, {2: (1.0, 0.0)})


def test_polarized_state_demands_two_slots_per_rail():
    from klm_teleport import PureState

    with pytest.raises(ValueError):
        PolarizedPhotonState(2, PureState.basis_state((1, 0, 0)))


def test_pbs_at_zero_routes_h_and_v():
    pbs = RotatedPBS(theta=0.0, input_mode=0, reflect_mode=1, transmit_mode=2)
    photon = PolarizedPhotonState.single_photon(3, {0: (0.6, 0.8j)})
    out = pbs.apply(photon)
    assert out.single_photon_amplitude(1, HORIZONTAL) == pytest.approx(0.6)
    assert out.single_photon_amplitude(2, VERTICAL) == pytest.approx(0.8j)
    assert out.single_photon_amplitude(1, VERTICAL) == 0j
    assert out.single_photon_amplitude(2, HORIZONTAL) == 0j
    assert out.norm() == pytest.approx(1.0, abs=1e-12)


def test_pbs_output_polarizations_are_orthonormal():
    pbs = RotatedPBS(theta=0.3, input_mode=0, reflect_mode=1, transmit_mode=2)
    rh, rv = pbs.reflected_polarization()
    th, tv = pbs.transmitted_polarization()
    assert rh * th + rv * tv == pytest.approx(0.0, abs=1e-15)
    assert rh**2 + rv**2 == pytest.approx(1.0)
    assert th**2 + tv**2 == pytest.approx(1.0)


def test_rotated_pbs_splits_by_projection():
    theta = 0.7
    pbs = RotatedPBS(theta=theta, input_mode=0, reflect_mode=1, transmit_mode=2)
    photon = PolarizedPhotonState.single_photon(3, {0: (1.0, 0.0)})
    out = pbs.apply(photon)
    # The H photon projects onto the two output polarizations.
    assert out.mode_amplitudes(1) == pytest.approx(
        (math.cos(theta) ** 2, -math.cos(theta) * math.sin(theta))
    )
    assert out.mode_amplitudes(2) == pytest.approx(
        (math.sin(theta) ** 2, math.sin(theta) * math.cos(theta))
    )
    assert out.norm() == pytest.approx(1.0, abs=1e-12)


def test_pbs_rejects_bad_configurations():
    with pytest.raises(ValueError):
        RotatedPBS(theta=0.0, input_mode=0, reflect_mode=0, transmit_mode=1)
    with pytest.raises(ValueError):
        RotatedPBS(theta=0.0, input_mode=-1, reflect_mode=1, transmit_mode=2)

    pbs = RotatedPBS(theta=0.0, input_mode=0, reflect_mode=1, transmit_mode=2)
    too_small = PolarizedPhotonState.single_photon(2, {0: (1.0, 0.0)})
    with pytest.raises(ValueError):
        pbs.apply(too_small)

    from klm_teleport import PureState

    occupied_output = PolarizedPhotonState(3, PureState.basis_state((1, 0, 1, 0, 0, 0)))
    with pytest.raises(ValueError, match="empty"):
        pbs.apply(occupied_output)

    two_photons = PolarizedPhotonState(3, PureState.basis_state((1, 1, 0, 0, 0, 0)))
    with pytest.raises(ValueError, match="one photon"):
        pbs.apply(two_photons)


def test_phase_shift_targets_one_rail():
    state = PolarizedPhotonState.single_photon(2, {0: (0.6, 0.0), 1: (0.0, 0.8)})
    shifted = phase_shift(state, 1, 1j)
    assert shifted.single_photon_amplitude(0, HORIZONTAL) == pytest.approx(0.6)
    assert shifted.single_photon_amplitude(1, VERTICAL) == pytest.approx(0.8j)
    with pytest.raises(ValueError):
        phase_shift(state, 0, 0.5)


def test_rotate_polarization_matrix_action():
    theta = 0.4
    h_photon = PolarizedPhotonState.single_photon(1, {0: (1.0, 0.0)})
    rotated = rotate_polarization(h_photon, 0, theta)
    assert rotated.mode_amplitudes(0) == pytest.approx((math.cos(theta), math.sin(theta)))
    # The splitter's reflected polarization rotates back onto pure H.
    tilted = PolarizedPhotonState.single_photon(1, {0: (math.cos(theta), -math.sin(theta))})
    assert rotate_polarization(tilted, 0, theta).mode_amplitudes(0) == pytest.approx((1.0, 0.0))


def test_polarized_resource_structure():
    rc = ResourceCoefficients.from_weights([0.25, 0.75])
    resource = build_polarized_resource(rc)
    assert resource.spatial_modes == 2
    # Term 0: front rail H, back rail V.  Term 1: front rail V, back rail H.
    assert resource.state.amplitude((1, 0, 0, 1)) == pytest.approx(0.5)
    assert resource.state.amplitude((0, 1, 1, 0)) == pytest.approx(math.sqrt(0.75))
    assert resource.norm() == pytest.approx(1.0, abs=1e-12)

    rc2 = ResourceCoefficients.uniform(2)
    resource2 = build_polarized_resource(rc2)
    # Every term puts exactly one photon on each of the 2n rails.
    for occ in resource2.state.amplitudes:
        assert sum(occ) == 4
        for rail in range(4):
            assert occ[2 * rail] + occ[2 * rail + 1] == 1
    assert resource2.state.amplitude((0, 1, 1, 0, 1, 0, 0, 1)) == pytest.approx(
        1 / math.sqrt(3)
    )


def test_polarization_analytic_matches_number_encoding():
    outcomes = run_analytic_polarization(WORKED, balanced())
    reference = run_analytic(WORKED, balanced())
    for a, b in zip(outcomes, reference):
        assert a.m == b.m
        assert a.probability == pytest.approx(b.probability, abs=1e-15)


def test_polarization_oracle_agrees_with_law():
    rng = np.random.default_rng(53)
    for n in (1, 2):
        rc = random_coefficients(n, rng)
        q = random_qubit(rng)
        analytic = run_analytic_polarization(rc, q)
        oracle = run_oracle_polarization(rc, q)
        assert oracle_deviation(analytic, oracle) < 1e-10
        assert math.fsum(o.probability for o in oracle) == pytest.approx(1.0, abs=1e-12)
        # Every recorded detection pattern contains all n + 1 measured photons.
        for outcome in oracle:
            for record in outcome.patterns or ():
                assert sum(record.pattern) == n + 1


def test_polarization_oracle_refuses_large_n():
    with pytest.raises(ValueError, match="n <= 3"):
        run_oracle_polarization(ResourceCoefficients.uniform(4), balanced())


def test_teleported_state_frozen():
    state = teleported_state(WORKED, balanced(), 1)
    amp_h, amp_v = state.mode_amplitudes(0)
    assert abs(amp_h) ** 2 == pytest.approx(0.375)
    assert abs(amp_v) ** 2 == pytest.approx(0.625)
    with pytest.raises(ValueError):
        teleported_state(WORKED, balanced(), 0)
    with pytest.raises(ValueError):
        teleported_state(WORKED, balanced(), 3)
    dead = ResourceCoefficients.from_weights([0.0, 0.0, 1.0])
    with pytest.raises(ValueError, match="never occurs"):
        teleported_state(dead, balanced(), 1)


def test_correction_circuit_worked_example():
    result = correction_circuit(1, WORKED, teleported_state(WORKED, balanced(), 1))
    assert result.p_success == pytest.approx(0.75, abs=1e-12)
    assert result.theta == pytest.approx(math.acos(math.sqrt(0.6)))
    assert result.detector_amplitude == pytest.approx(-0.5)
    assert result.recovered is not None
    assert result.recovered.fidelity_with(balanced()) == pytest.approx(1.0, abs=1e-12)


def test_correction_circuit_mirror_branch():
    rc = ResourceCoefficients.from_weights([0.3, 0.5, 0.2])
    result = correction_circuit(1, rc, teleported_state(rc, balanced(), 1))
    # min(0.3, 0.5) / p(1) with p(1) = (0.5 + 0.3) / 2.
    assert result.p_success == pytest.approx(0.75, abs=1e-12)
    assert result.recovered.fidelity_with(balanced()) == pytest.approx(1.0, abs=1e-12)


def test_correction_circuit_balanced_weights_need_no_trimming():
    rc = ResourceCoefficients.uniform(1)
    result = correction_circuit(1, rc, teleported_state(rc, balanced(), 1))
    assert result.theta == 0.0
    assert result.p_success == pytest.approx(1.0, abs=1e-12)
    assert abs(result.detector_amplitude) == pytest.approx(0.0, abs=1e-12)


def test_correction_circuit_undoes_coefficient_phases():
    amps = (
        math.sqrt(0.5) * cmath.exp(0.7j),
        math.sqrt(0.3) * cmath.exp(-1.2j),
        math.sqrt(0.2) * cmath.exp(0.4j),
    )
    rc = ResourceCoefficients(tuple(complex(a) for a in amps))
    q = QubitAmplitudes(0.6, 0.8j)
    for m in (1, 2):
        result = correction_circuit(m, rc, teleported_state(rc, q, m))
        assert result.recovered.fidelity_with(q) == pytest.approx(1.0, abs=1e-12)


def test_correction_circuit_conserves_probability():
    rng = np.random.default_rng(59)
    for _ in range(10):
        rc = random_coefficients(3, rng)
        q = random_qubit(rng)
        for m in (1, 2, 3):
            result = correction_circuit(m, rc, teleported_state(rc, q, m))
            assert result.p_success + abs(result.detector_amplitude) ** 2 == pytest.approx(
                1.0, abs=1e-12
            )


def test_correction_circuit_validation():
    good = teleported_state(WORKED, balanced(), 1)
    with pytest.raises(ValueError):
        correction_circuit(0, WORKED, good)
    with pytest.raises(ValueError):
        correction_circuit(3, WORKED, good)
    wide = PolarizedPhotonState.single_photon(2, {0: (1.0, 0.0)})
    with pytest.raises(ValueError, match="single rail"):
        correction_circuit(1, WORKED, wide)


def test_circuit_matches_kraus_route():
    rng = np.random.default_rng(61)
    for _ in range(20):
        n = int(rng.integers(1, 4))
        rc = random_coefficients(n, rng)
        q = random_qubit(rng)
        outcomes = run_analytic(rc, q)
        m = int(rng.integers(1, n + 1))
        if outcomes[m].probability < 1e-9:
            continue
        result = correction_circuit(m, rc, teleported_state(rc, q, m))
        assert result.p_success == pytest.approx(p_success_given_m(m, rc, q), abs=1e-10)
        pair = kraus_for(m, rc)
        conditional = outcomes[m].conditional_qubit.as_array()
        survived = pair.success @ conditional
        assert np.vdot(survived, survived).real == pytest.approx(result.p_success, abs=1e-12)
        recovered = QubitAmplitudes.from_unnormalized(*survived)
        assert recovered.fidelity_with(result.recovered) == pytest.approx(1.0, abs=1e-10)


def test_circuit_result_is_named_tuple():
    result = correction_circuit(1, WORKED, teleported_state(WORKED, balanced(), 1))
    assert isinstance(result, CircuitResult)
    assert result.pre_detection.spatial_modes == 5
