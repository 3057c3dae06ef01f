"""Gate kernels, measurement branching, and product-state construction."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbqc_lab import statevector as sv
from mbqc_lab.statevector import (Observable1Q, StateVector, X_OBSERVABLE,
                                  Y_OBSERVABLE, Z_OBSERVABLE,
                                  ZeroProbabilityError, new_state, shot_rng)
from mbqc_lab.paulis import PauliString


def test_new_state_plus_is_uniform():
    state = new_state(3, ["plus"] * 3)
    assert np.allclose(state.amplitudes, np.full(8, 1 / np.sqrt(8)))


def test_new_state_site_order_little_endian():
    # site 1 is the least significant bit of the amplitude index
    state = new_state(2, ["zero", "plus"])
    expected = np.zeros(4)
    expected[0b00] = expected[0b10] = 1 / np.sqrt(2)
    assert np.allclose(state.amplitudes, expected)


def test_new_state_rejects_bad_labels():
    with pytest.raises(ValueError):
        new_state(2, ["plus", "minus"])
    with pytest.raises(ValueError):
        new_state(2, ["plus"])


def test_rotation_gates_match_matrix_exponentials():
    from scipy.linalg import expm
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]])
    z = np.diag([1.0 + 0j, -1.0])
    phi = 0.83
    assert np.allclose(sv.rx(phi).matrix, expm(-0.5j * phi * x))
    assert np.allclose(sv.rz(phi).matrix, expm(-0.5j * phi * z))
    assert np.allclose(sv.ry(phi).matrix, expm(0.5j * phi * y))
    xx = np.kron(x, x)
    assert np.allclose(sv.rxx(phi).matrix, expm(-0.5j * phi * xx))


def test_cx_control_is_second_site():
    # cx(site_a, site_b): site_b controls a flip of site_a
    state = new_state(2, ["zero", "zero"])
    state.apply_1q(2, sv.X)
    state.apply_2q(1, 2, sv.cx())
    expected = np.zeros(4)
    expected[0b11] = 1.0
    assert np.allclose(state.amplitudes, expected)


def test_cz_is_symmetric():
    a = new_state(3, ["plus"] * 3)
    b = new_state(3, ["plus"] * 3)
    a.apply_2q(1, 3, sv.cz())
    b.apply_2q(3, 1, sv.cz())
    assert np.allclose(a.amplitudes, b.amplitudes)


def test_swap_exchanges_sites():
    state = new_state(2, ["zero", "plus"])
    state.apply_2q(1, 2, sv.swap())
    expected = new_state(2, ["plus", "zero"])
    assert np.allclose(state.amplitudes, expected.amplitudes)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_random_circuits_preserve_norm(seed):
    rng = np.random.default_rng(seed)
    state = new_state(4, ["plus"] * 4)
    gates = [sv.rx(rng.uniform(0, np.pi)), sv.ry(rng.uniform(0, np.pi)),
             sv.rz(rng.uniform(0, np.pi))]
    for _ in range(6):
        state.apply_1q(int(rng.integers(1, 5)), gates[int(rng.integers(0, 3))])
        pair = rng.choice(4, size=2, replace=False) + 1
        state.apply_2q(int(pair[0]), int(pair[1]), sv.cz())
    assert abs(np.vdot(state.amplitudes, state.amplitudes).real - 1.0) < 1e-10


def test_expect_pauli_on_product_state():
    state = new_state(3, ["plus", "zero", "plus"])
    assert state.expect_pauli(PauliString.from_sites(3, {1: "X"})) == pytest.approx(1.0)
    assert state.expect_pauli(PauliString.from_sites(3, {2: "Z"})) == pytest.approx(1.0)
    assert state.expect_pauli(PauliString.from_sites(3, {1: "Z"})) == pytest.approx(0.0)
    assert state.expect_pauli(
        PauliString.from_sites(3, {1: "X", 2: "Z", 3: "X"})) == pytest.approx(1.0)


def test_branch_probabilities_sum_to_one():
    state = new_state(2, ["plus", "plus"])
    state.apply_1q(1, sv.ry(0.7))
    _, _, p_plus, p_minus = state.branch_1q(1, Z_OBSERVABLE)
    assert p_plus + p_minus == pytest.approx(1.0)
    # RY(t)|+> has <Z> = sin(t)
    assert p_plus == pytest.approx((1 + np.sin(0.7)) / 2)


def test_project_measure_collapses():
    state = new_state(1, ["plus"])
    outcome, collapsed, p = state.project_measure(1, Z_OBSERVABLE, shot_rng(3, 0))
    assert outcome in (1, -1)
    assert p == pytest.approx(0.5)
    target = [1.0, 0.0] if outcome == 1 else [0.0, 1.0]
    assert np.allclose(collapsed.amplitudes, target)


def test_project_measure_zero_probability_raises():
    state = new_state(1, ["zero"])
    rng = shot_rng(0, 0)
    # the -1 eigenvector of Z never occurs for |0>; force many draws
    saw_error = False
    for _ in range(64):
        try:
            outcome, _, _ = new_state(1, ["zero"]).project_measure(1, Z_OBSERVABLE, rng)
            assert outcome == 1
        except ZeroProbabilityError:
            saw_error = True
    assert not saw_error  # probability-0 branch is never sampled


def test_observable_from_hermitian_eigensystem():
    obs = Observable1Q.from_hermitian(np.array([[0, 1], [1, 0]], dtype=complex))
    assert obs.val_plus == pytest.approx(1.0)
    assert obs.val_minus == pytest.approx(-1.0)
    assert abs(np.vdot(obs.vec_plus, X_OBSERVABLE.vec_plus)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        Observable1Q.from_hermitian(np.array([[0, 1j], [1j, 0]]))


def test_observable_axes_are_orthonormal():
    for obs in (X_OBSERVABLE, Y_OBSERVABLE, Z_OBSERVABLE):
        assert np.vdot(obs.vec_plus, obs.vec_plus) == pytest.approx(1.0)
        assert np.vdot(obs.vec_plus, obs.vec_minus) == pytest.approx(0.0)


def test_shot_rng_streams_are_reproducible_and_distinct():
    a = shot_rng(5, 1).random(4)
    b = shot_rng(5, 1).random(4)
    c = shot_rng(5, 2).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_statevector_validates_shape():
    with pytest.raises(ValueError):
        StateVector(2, np.ones(3, dtype=complex), 1.0)
