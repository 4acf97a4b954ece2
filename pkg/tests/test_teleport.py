"""Protocol outcome law, resource construction, and the Fock-space oracle."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from klm_teleport import (
    QubitAmplitudes,
    ResourceCoefficients,
    build_resource_state,
    derive_phase_correction,
    load_coefficients,
    oracle_deviation,
    run_analytic,
    run_oracle,
    save_coefficients,
    tensor,
)
from klm_teleport.teleport import qubit_state

from helpers import random_coefficients, random_qubit


def balanced():
    r = 1 / math.sqrt(2)
    return QubitAmplitudes(r, r)


WORKED = ResourceCoefficients.from_weights([0.5, 0.3, 0.2])


def test_resource_coefficients_validation():
    with pytest.raises(ValueError):
        ResourceCoefficients((1.0,))
    with pytest.raises(ValueError):
        ResourceCoefficients((1.0, 1.0))
    with pytest.raises(ValueError):
        ResourceCoefficients.from_weights([0.5, -0.5, 1.0])
    with pytest.raises(ValueError):
        ResourceCoefficients.normalized([0.0, 0.0])
    with pytest.raises(ValueError):
        ResourceCoefficients.uniform(0)


def test_resource_coefficients_accessors():
    rc = ResourceCoefficients.uniform(2)
    assert rc.n == 2
    assert rc.at(-1) == 0j
    assert rc.at(3) == 0j
    assert rc.at(1) == pytest.approx(1 / math.sqrt(3))
    np.testing.assert_allclose(rc.weights(), [1 / 3] * 3, atol=1e-15)


def test_resource_state_structure():
    rc = ResourceCoefficients.uniform(1)
    state = build_resource_state(rc)
    assert state.mode_count == 2
    assert state.amplitude((0, 1)) == pytest.approx(1 / math.sqrt(2))
    assert state.amplitude((1, 0)) == pytest.approx(1 / math.sqrt(2))

    rc2 = ResourceCoefficients.from_weights([0.2, 0.3, 0.5])
    state2 = build_resource_state(rc2)
    assert state2.mode_count == 4
    assert state2.amplitude((0, 0, 1, 1)) == pytest.approx(math.sqrt(0.2))
    assert state2.amplitude((1, 0, 0, 1)) == pytest.approx(math.sqrt(0.3))
    assert state2.amplitude((1, 1, 0, 0)) == pytest.approx(math.sqrt(0.5))
    state2.require_normalized(1e-12)


def test_protocol_input_has_three_modes_and_four_terms_at_n1():
    state = tensor(qubit_state(balanced()), build_resource_state(ResourceCoefficients.uniform(1)))
    assert state.mode_count == 3
    assert len(state.amplitudes) == 4


def test_outcome_law_worked_example():
    outcomes = run_analytic(WORKED, balanced())
    assert [o.m for o in outcomes] == [0, 1, 2, 3]
    assert outcomes[1].probability == pytest.approx(0.4)
    assert outcomes[1].qubit_mode == 3
    conditional = outcomes[1].conditional_qubit
    assert abs(conditional.alpha) ** 2 == pytest.approx(0.375)
    assert abs(conditional.beta) ** 2 == pytest.approx(0.625)
    assert outcomes[0].qubit_mode is None
    assert outcomes[0].conditional_qubit is None
    assert outcomes[3].conditional_qubit is None


def test_outcome_probabilities_sum_to_one():
    rng = np.random.default_rng(17)
    for n in (1, 2, 4, 6):
        rc = random_coefficients(n, rng)
        q = random_qubit(rng)
        outcomes = run_analytic(rc, q)
        assert math.fsum(o.probability for o in outcomes) == pytest.approx(1.0, abs=1e-12)
        for outcome in outcomes:
            if outcome.conditional_qubit is not None:
                norm = (
                    abs(outcome.conditional_qubit.alpha) ** 2
                    + abs(outcome.conditional_qubit.beta) ** 2
                )
                assert norm == pytest.approx(1.0, abs=1e-12)


def test_failure_outcomes_collapse_the_qubit():
    rc = ResourceCoefficients.uniform(2)
    outcomes = run_analytic(rc, QubitAmplitudes(0.6, 0.8))
    assert outcomes[0].probability == pytest.approx(0.36 / 3)
    assert outcomes[-1].probability == pytest.approx(0.64 / 3)


def test_phase_correction_n1_uniform():
    rc = ResourceCoefficients.uniform(1)
    q = balanced()
    assert derive_phase_correction((1, 0), 1, rc, q) == pytest.approx(1.0)
    assert derive_phase_correction((0, 1), 1, rc, q) == pytest.approx(-1.0)


def test_phase_correction_is_unit_modulus():
    rng = np.random.default_rng(23)
    for n in (2, 3):
        rc = random_coefficients(n, rng)
        q = random_qubit(rng)
        outcomes = run_oracle(rc, q)
        for outcome in outcomes:
            for record in outcome.patterns or ():
                assert abs(record.corrective_phase) == pytest.approx(1.0, abs=1e-12)


def test_phase_correction_validates_patterns():
    rc = ResourceCoefficients.uniform(2)
    q = balanced()
    with pytest.raises(ValueError):
        derive_phase_correction((1, 0, 0), 0, rc, q)
    with pytest.raises(ValueError):
        derive_phase_correction((1, 1, 0), 1, rc, q)
    with pytest.raises(ValueError):
        derive_phase_correction((1, 0), 1, rc, q)


def test_phase_correction_degenerate_branch_is_one():
    rc = ResourceCoefficients.uniform(2)
    assert derive_phase_correction((0, 1, 0), 1, rc, QubitAmplitudes(1.0, 0.0)) == 1 + 0j


def test_oracle_agrees_with_law_on_random_instances():
    rng = np.random.default_rng(29)
    for n in (1, 2, 3):
        rc = random_coefficients(n, rng)
        q = random_qubit(rng)
        analytic = run_analytic(rc, q)
        oracle = run_oracle(rc, q)
        assert oracle_deviation(analytic, oracle) < 1e-10
        assert math.fsum(o.probability for o in oracle) == pytest.approx(1.0, abs=1e-12)
        for law, sim in zip(analytic, oracle):
            assert sim.qubit_mode == law.qubit_mode
            assert sim.patterns is not None


def test_oracle_handles_degenerate_inputs():
    rc = ResourceCoefficients.uniform(2)
    for q in (QubitAmplitudes(1.0, 0.0), QubitAmplitudes(0.0, 1.0)):
        analytic = run_analytic(rc, q)
        oracle = run_oracle(rc, q)
        assert oracle_deviation(analytic, oracle) < 1e-10

    sparse = ResourceCoefficients.from_weights([0.5, 0.0, 0.5])
    oracle = run_oracle(sparse, balanced())
    analytic = run_analytic(sparse, balanced())
    assert oracle_deviation(analytic, oracle) < 1e-10


def test_oracle_refuses_large_n_by_default():
    rc = ResourceCoefficients.uniform(5)
    with pytest.raises(ValueError, match="n <= 4"):
        run_oracle(rc, balanced())


def test_coefficient_file_roundtrip(tmp_path):
    rc = random_coefficients(3, np.random.default_rng(31))
    path = tmp_path / "coeffs.json"
    save_coefficients(rc, path)
    loaded = load_coefficients(path)
    assert loaded.n == rc.n
    for a, b in zip(loaded.amplitudes, rc.amplitudes):
        assert a == pytest.approx(b, abs=1e-15)


def test_coefficient_file_normalization_policy(tmp_path):
    path = tmp_path / "coeffs.json"
    # Tiny deviations are corrected silently.
    r = 1 / math.sqrt(2)
    path.write_text(json.dumps({"n": 1, "c": [[r + 1e-12, 0.0], [r, 0.0]]}))
    loaded = load_coefficients(path)
    assert math.fsum(abs(a) ** 2 for a in loaded.amplitudes) == pytest.approx(1.0, abs=1e-12)
    # Larger deviations need the explicit flag.
    path.write_text(json.dumps({"n": 1, "c": [[1.0, 0.0], [1.0, 0.0]]}))
    with pytest.raises(ValueError, match="renormalize"):
        load_coefficients(path)
    loaded = load_coefficients(path, renormalize=True)
    assert abs(loaded.amplitudes[0]) == pytest.approx(r)


@pytest.mark.parametrize(
    "payload",
    [
        {"c": [[1.0, 0.0], [0.0, 0.0]]},
        {"n": 1},
        {"n": 0, "c": [[1.0, 0.0]]},
        {"n": 1, "c": [[1.0, 0.0]]},
        {"n": 1, "c": [[1.0, 0.0], [0.0]]},
        {"n": 1, "c": [[0.0, 0.0], [0.0, 0.0]]},
        {"n": "1", "c": [[1.0, 0.0], [0.0, 0.0]]},
    ],
)
def test_coefficient_file_rejects_malformed_payloads(tmp_path, payload):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(ValueError):
        load_coefficients(path)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=1, max_value=3))
def test_oracle_probability_aggregation_property(seed, n):
    rng = np.random.default_rng(seed)
    rc = random_coefficients(n, rng)
    q = random_qubit(rng)
    oracle = run_oracle(rc, q)
    analytic = run_analytic(rc, q)
    for law, sim in zip(analytic, oracle):
        assert sim.probability == pytest.approx(law.probability, abs=1e-10)
