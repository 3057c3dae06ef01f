"""Measurement-pattern execution, byproduct bookkeeping, and channel extraction."""

import numpy as np
import pytest

from mbqc_lab import channel as ch
from mbqc_lab import engine
from mbqc_lab.states import build_cluster, build_deformed, build_xx_rotated
from mbqc_lab.statevector import shot_rng


def test_cluster_single_rotation_is_pure_rotation():
    n, beta = 5, 0.8
    pat = engine.make_pattern(n, {3: beta}, mode="adaptive")
    res = engine.run_pattern(build_cluster(n), pat, None)
    assert res.exact_expectation("X") == pytest.approx(np.cos(beta), abs=1e-12)
    assert res.exact_expectation("Y") == pytest.approx(np.sin(beta), abs=1e-12)


def test_adaptive_on_deformed_matches_channel_model():
    n, theta, beta = 5, 1.1, 0.6
    sigma = np.cos(theta)
    pat = engine.make_pattern(n, {3: beta}, mode="adaptive")
    res = engine.run_pattern(build_deformed(n, theta), pat, None)
    v = ch.v_beta(ch.ChannelParams(sigma, beta))
    out = v.mat @ np.array([0.0, 1.0, 0.0, 0.0])
    assert res.exact_expectation("X") == pytest.approx(out[1], abs=1e-12)
    assert res.exact_expectation("Y") == pytest.approx(out[2], abs=1e-12)


def test_sign_agnostic_matches_adaptive_for_single_rotation():
    # with one rotated site the conjugate-sign bookkeeping fully undoes the
    # missing feedforward; several rotations mix relative flips and only
    # flip-grouped statistics remain comparable
    n, theta = 9, 0.9
    rots = {5: 0.4}
    resource = build_deformed(n, theta)
    ad = engine.run_pattern(resource, engine.make_pattern(n, rots, mode="adaptive"), None)
    sa = engine.run_pattern(resource,
                            engine.make_pattern(n, rots, mode="sign_agnostic"), None)
    for axis in ("X", "Y"):
        assert sa.exact_expectation(axis) == pytest.approx(
            ad.exact_expectation(axis), abs=1e-12)


def test_post_selected_matches_string_oracle():
    n, phi, beta = 11, np.pi / 4, 0.9
    resource = build_xx_rotated(n, phi)
    rots = {3: beta / 2, 9: beta / 2}
    pat = engine.make_pattern(n, rots, mode="post_selected")
    res = engine.run_pattern(resource, pat, None)
    scheme = ch.PackingScheme((3, 9), (beta / 2, beta / 2))
    x, y, _ = ch.exact_logical_evolution(resource, scheme)
    assert res.exact_expectation("X") == pytest.approx(x, abs=1e-12)
    assert res.exact_expectation("Y") == pytest.approx(y, abs=1e-12)


def test_post_selected_acceptance_fraction():
    # one in 2^k branches survives k post-selected X measurements
    n = 11
    pat = engine.make_pattern(n, {s: 0.2 for s in (3, 5, 7, 9)},
                              mode="post_selected")
    res = engine.run_pattern(build_xx_rotated(n, np.pi / 4), pat, None)
    k = len(pat.post_select_sites)
    assert res.accepted_fraction() == pytest.approx(2.0 ** -k, abs=1e-10)


def test_parity_mask_x_axis_is_odd_sites():
    pat = engine.make_pattern(7, {3: 0.5}, mode="adaptive")
    mask = engine.parity_mask(pat, "X")
    odd = np.zeros(6, dtype=int)
    odd[::2] = 1  # sites 1, 3, 5
    assert np.array_equal(mask % 2, odd)


def test_pattern_validation():
    with pytest.raises(ValueError):
        engine.make_pattern(5, {1: 0.3})  # rotation on the input boundary
    with pytest.raises(ValueError):
        engine.make_pattern(5, {3: 0.3}, mode="oracle")


def test_run_pattern_needs_rng_for_shots():
    pat = engine.make_pattern(5, {3: 0.2})
    with pytest.raises(ValueError):
        engine.run_pattern(build_cluster(5), pat, 100)


def test_sampled_tomography_is_consistent_with_exact():
    n, beta = 5, 0.7
    pat = engine.make_pattern(n, {3: beta}, mode="adaptive")
    res = engine.run_pattern(build_cluster(n), pat, 20000, shot_rng(3, 0))
    tom = engine.logical_tomography(res)
    assert abs(tom.exp_x - np.cos(beta)) < 5 * tom.err_x
    assert abs(tom.exp_y - np.sin(beta)) < 5 * tom.err_y


def test_grouped_purity_loss_matches_closed_form():
    n, theta, beta, m = 9, 0.9, 0.6, 2
    sigma = np.cos(theta)
    sites = (3, 5)
    pat = engine.make_pattern(n, {s: beta / m for s in sites}, mode="sign_agnostic")
    res = engine.run_pattern(build_deformed(n, theta), pat, None)
    lp, err = engine.grouped_purity_loss(res)
    assert err == 0.0
    assert lp == pytest.approx(ch.split_purity_loss(sigma, beta, m), abs=1e-12)


def test_grouped_purity_loss_rejects_reweighting_patterns():
    pat = engine.make_pattern(5, {3: 0.4}, theta=0.7, mode="sign_agnostic")
    res = engine.run_pattern(build_cluster(5), pat, None)
    with pytest.raises(ValueError):
        engine.grouped_purity_loss(res)


def test_extract_logical_channel_rejects_reweighting_patterns():
    pat = engine.make_pattern(5, {3: 0.4}, theta=0.7)
    with pytest.raises(ValueError):
        engine.extract_logical_channel(build_cluster(5), pat)


def test_extract_logical_channel_wire_is_identity():
    pat = engine.make_pattern(5, {}, mode="adaptive")
    ptm = engine.extract_logical_channel(build_cluster(5), pat)
    assert np.allclose(ptm.mat, np.eye(4), atol=1e-12)


def test_reweighting_formulation_matches_physical():
    # deformation in the pattern (cluster resource) vs in the resource
    n, theta, beta = 7, 0.8, 0.5
    phys = engine.run_pattern(
        build_deformed(n, theta),
        engine.make_pattern(n, {3: beta}, mode="adaptive"), None)
    rw = engine.run_pattern(
        build_cluster(n),
        engine.make_pattern(n, {3: beta}, theta=theta, mode="adaptive"), None)
    for axis in ("X", "Y"):
        assert rw.exact_expectation(axis) == pytest.approx(
            phys.exact_expectation(axis), abs=1e-12)


def test_purity_loss_clips_and_warns():
    with pytest.warns(UserWarning):
        val = engine.purity_loss(1.02, 0.0)
    assert val == 0.0


def test_estimator_product_ops_reproduce_run():
    # the product-operator estimator evaluated on the raw state equals the
    # branch-enumeration expectation
    from mbqc_lab.engine import estimator_product_ops, expect_product, post_select_projector_ops
    n, phi, beta = 11, np.pi / 4, 0.7
    resource = build_xx_rotated(n, phi)
    pat = engine.make_pattern(n, {3: beta / 2, 5: beta / 2}, mode="post_selected")
    res = engine.run_pattern(resource, pat, None)
    proj = post_select_projector_ops(pat)
    den = expect_product(resource, proj)
    for axis in ("X", "Y"):
        num = expect_product(resource, estimator_product_ops(pat, axis))
        assert num / den == pytest.approx(res.exact_expectation(axis), abs=1e-10)
