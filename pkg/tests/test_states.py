"""Resource-state builders, gadget preparation, and ground-state oracles."""

import numpy as np
import pytest

from mbqc_lab import statevector as sv
from mbqc_lab.paulis import (PauliString, stabilizer_K, symmetry_generators,
                             string_order_op, two_point_string_op)
from mbqc_lab.states import (build_cluster, build_deformed,
                             build_deformed_gadget, build_xx_rotated,
                             cluster_circuit, exact_ground_state,
                             gadget_joint_state, m_theta, perturbative_gs,
                             xx_rotated_circuit)
from mbqc_lab.statevector import shot_rng


def test_cluster_state_is_stabilized():
    n = 6
    state = build_cluster(n)
    for i in range(1, n + 1):
        assert state.expect_pauli(stabilizer_K(i, n)) == pytest.approx(1.0)


def test_cluster_needs_two_sites():
    with pytest.raises(ValueError):
        build_cluster(1)


def test_deformed_state_is_normalized_and_symmetric():
    n, theta = 7, 1.1
    state = build_deformed(n, theta)
    assert np.vdot(state.amplitudes, state.amplitudes).real == pytest.approx(1.0)
    for g in symmetry_generators(n):
        assert state.expect_pauli(g) == pytest.approx(1.0)


def test_deformed_rejects_even_n_and_bad_theta():
    with pytest.raises(ValueError):
        build_deformed(6, 0.3)
    with pytest.raises(ValueError):
        build_deformed(5, -0.1)


def test_deformed_string_order_is_cos_theta():
    # bulk-anchored string operator on the deformed state
    n, theta = 9, 0.8
    state = build_deformed(n, theta)
    op = string_order_op(3, n)
    assert state.expect_pauli(op) == pytest.approx(np.cos(theta), abs=1e-10)


def test_m_theta_interpolates_identity_to_projector():
    assert np.allclose(m_theta(0.0), np.eye(2))
    half = m_theta(np.pi)
    assert np.allclose(half, np.array([[0, 1], [1, 0]]))


def test_xx_rotated_correlators():
    n, phi = 11, 0.9
    state = build_xx_rotated(n, phi)
    # distance-2 correlator keeps one rotated leg, beyond that both legs rotate
    c2 = state.expect_pauli(two_point_string_op(3, 2, n))
    c4 = state.expect_pauli(two_point_string_op(3, 4, n))
    c6 = state.expect_pauli(two_point_string_op(3, 6, n))
    assert c2 == pytest.approx(np.cos(phi) ** 2, abs=1e-10)
    assert c4 == pytest.approx(np.cos(phi) ** 4, abs=1e-10)
    assert c6 == pytest.approx(np.cos(phi) ** 4, abs=1e-10)


def test_xx_rotated_swap_compiled_is_identical():
    n, phi = 11, 0.6
    direct = build_xx_rotated(n, phi, "direct")
    routed = build_xx_rotated(n, phi, "swap_compiled")
    assert np.allclose(direct.amplitudes, routed.amplitudes)


def test_xx_rotated_phi_zero_is_cluster():
    state = build_xx_rotated(11, 0.0)
    cluster = build_cluster(11)
    assert np.allclose(state.amplitudes, cluster.amplitudes)


def test_xx_rotated_circuit_rejects_bad_mode():
    with pytest.raises(ValueError):
        xx_rotated_circuit(11, 0.3, "optimized")


def test_gadget_joint_state_ancilla_probability():
    # all-+1 ancilla pattern has probability 2^-(n-2) regardless of theta
    n, theta = 5, np.pi / 3
    state = gadget_joint_state(n, theta)
    n_total = 2 * n - 2
    prob = 0.0
    block = state.amplitudes.reshape(-1, 2 ** n)[0]
    prob = float(np.vdot(block, block).real)
    assert prob == pytest.approx(2.0 ** -(n - 2), abs=1e-10)


def test_gadget_postselect_prepares_deformed_state():
    n, theta = 5, 0.9
    result = build_deformed_gadget(n, theta, shot_rng(2, 0), mode="postselect")
    target = build_deformed(n, theta)
    overlap = abs(np.vdot(result.state.amplitudes, target.amplitudes))
    assert overlap == pytest.approx(1.0, abs=1e-10)
    assert result.byproduct_x_sites == ()


def test_gadget_corrected_matches_up_to_recorded_byproducts():
    n, theta = 5, 0.9
    result = build_deformed_gadget(n, theta, shot_rng(7, 1), mode="corrected")
    state = result.state
    for site in result.byproduct_x_sites:
        state.apply_1q(site, sv.X)
    target = build_deformed(n, theta)
    overlap = abs(np.vdot(state.amplitudes, target.amplitudes))
    assert overlap == pytest.approx(1.0, abs=1e-10)


def test_gadget_rejects_unknown_mode():
    with pytest.raises(ValueError):
        build_deformed_gadget(5, 0.3, shot_rng(0, 0), mode="heralded")


def test_ground_state_at_alpha_zero_is_cluster():
    n = 5
    gs = exact_ground_state(0.0, n)
    assert gs.energy == pytest.approx(-n, abs=1e-10)
    cluster = build_cluster(n)
    assert abs(np.vdot(gs.state.amplitudes, cluster.amplitudes)) == pytest.approx(1.0)


def test_ground_state_sparse_path_matches_dense():
    # n=9 uses the sparse eigensolver; cross-check against the n<=8 dense path
    dense = exact_ground_state(0.4, 7)
    from mbqc_lab.dense import hamiltonian_matrix
    vals = np.linalg.eigvalsh(hamiltonian_matrix(0.4, 7))
    assert dense.energy == pytest.approx(float(vals[0]), abs=1e-10)
    sparse_gs = exact_ground_state(0.4, 9)
    vals9 = np.linalg.eigvalsh(hamiltonian_matrix(0.4, 9))
    assert sparse_gs.energy == pytest.approx(float(vals9[0]), abs=1e-8)


def test_ground_state_bounds():
    with pytest.raises(ValueError):
        exact_ground_state(0.1, 13)
    with pytest.raises(ValueError):
        exact_ground_state(2.0, 5)


def test_perturbative_state_overlap_improves_at_small_alpha():
    n = 5
    f = []
    for alpha in (0.2, 0.05):
        gs = exact_ground_state(alpha, n)
        approx = perturbative_gs(alpha, n)
        f.append(abs(np.vdot(gs.state.amplitudes, approx.amplitudes)) ** 2)
    assert f[1] > f[0]
    assert f[1] > 1.0 - 1e-5


def test_cluster_circuit_is_all_cz():
    ops = cluster_circuit(4)
    assert len(ops) == 3
    assert all(op[0] == "2q" for op in ops)
