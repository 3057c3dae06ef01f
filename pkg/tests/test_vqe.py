"""Single-parameter variational ansatz: energies, sampling, optimization."""

import numpy as np
import pytest

from mbqc_lab import vqe
from mbqc_lab.states import build_deformed, exact_ground_state
from mbqc_lab.statevector import shot_rng
from mbqc_lab.paulis import PauliString, stabilizer_K, string_order_op


def test_analytic_expectations_against_statevector():
    n, theta = 7, 0.8
    state = build_deformed(n, theta)
    xs, ks = vqe.analytic_expectations(theta, n)
    for i in range(1, n + 1):
        assert state.expect_pauli(stabilizer_K(i, n)) == pytest.approx(
            ks[i - 1], abs=1e-10)
        assert state.expect_pauli(PauliString.from_sites(n, {i: "X"})) == pytest.approx(
            xs[i - 1], abs=1e-10)


def test_analytic_energy_boundary_and_bulk_terms():
    n, theta, alpha = 9, 0.6, 0.5
    bd = vqe.analytic_energy(alpha, theta, n)
    assert bd.k_boundary == pytest.approx(np.cos(theta))
    assert bd.k_bulk == pytest.approx(np.cos(theta) ** 2)
    assert bd.x_field == pytest.approx(np.sin(theta))
    expected = (-np.cos(alpha) * (4 * np.cos(theta) + (n - 4) * np.cos(theta) ** 2)
                - np.sin(alpha) * (n - 2) * np.sin(theta))
    assert bd.total_energy == pytest.approx(expected)


def test_variational_energy_upper_bounds_exact():
    n, alpha = 5, 0.7
    opt = vqe.optimize_theta(alpha, n)
    exact = exact_ground_state(alpha, n)
    assert opt.energy_min >= exact.energy - 1e-10


def test_variational_state_string_order():
    # the ansatz string order parameter is cos(theta)
    n, theta = 9, 0.7
    state = build_deformed(n, theta)
    assert state.expect_pauli(string_order_op(3, n)) == pytest.approx(
        np.cos(theta), abs=1e-10)


def test_sampled_expectations_match_analytic():
    theta, shots = 0.9, 200000
    bd = vqe.sampled_expectations(theta, shots, shot_rng(11, 0))
    assert abs(bd.x_field - np.sin(theta)) < 5 * bd.err_x_field
    assert abs(bd.k_boundary - np.cos(theta)) < 5 * bd.err_k_boundary
    assert abs(bd.k_bulk - np.cos(theta) ** 2) < 5 * bd.err_k_bulk
    assert bd.err_k_bulk > 0


def test_sampled_expectations_validate_shots():
    with pytest.raises(ValueError):
        vqe.sampled_expectations(0.3, 0, shot_rng(0, 0))


def test_bulk_joint_distribution_normalized():
    for s0 in (0, 1):
        for si in (0, 1):
            joint = vqe._bulk_joint_distribution(0.7, s0, si)
            assert joint.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(joint >= -1e-15)


def test_optimize_theta_alpha_zero():
    opt = vqe.optimize_theta(0.0, 5)
    assert opt.theta_min == pytest.approx(0.0, abs=1e-6)
    assert opt.energy_min == pytest.approx(-5.0, abs=1e-10)


def test_optimize_theta_monotone_in_alpha():
    thetas = [vqe.optimize_theta(a, 9).theta_min
              for a in (0.2, 0.6, 1.0, 1.4)]
    assert thetas == sorted(thetas)


def test_optimize_theta_sampled_reports_uncertainty():
    opt = vqe.optimize_theta(0.5, 5, shots=2000, rng=shot_rng(4, 0))
    assert opt.theta_uncertainty > 0
    exact = vqe.optimize_theta(0.5, 5)
    assert abs(opt.theta_min - exact.theta_min) < 6 * opt.theta_uncertainty + 0.05


def test_thermo_limit_transition():
    at = np.arctan(2.0)
    assert vqe.thermo_limit_theta(at) == np.pi / 2
    assert vqe.thermo_limit_theta(np.pi / 2) == np.pi / 2
    assert vqe.thermo_limit_theta(at - 1e-5) < np.pi / 2
    assert vqe.thermo_limit_theta(0.0) == 0.0
    with pytest.raises(ValueError):
        vqe.thermo_limit_theta(-0.1)
