"""Simulation laboratory for measurement-based computation on the 1D cluster phase."""

__version__ = "0.1.0"

from .channel import (
    ChannelParams,
    PackingScheme,
    decompose,
    epsilon,
    exact_logical_evolution,
    find_crossover,
    kappa,
    kappa_correlated,
    logical_angle,
    split_compose,
    split_purity_loss,
    v_beta,
)
from .engine import (
    MeasurementPattern,
    extract_logical_channel,
    logical_tomography,
    make_pattern,
    purity_loss,
    run_pattern,
)
from .noise import NoiseSpec, depolarize_2q, noisy_run
from .paulis import PauliString, PauliTransferMatrix, stabilizer_K, string_order_op
from .states import build_cluster, build_deformed, build_xx_rotated, exact_ground_state
from .statevector import StateVector, new_state, shot_rng
from .vqe import analytic_expectations, optimize_theta, sampled_expectations, thermo_limit_theta

__all__ = [
    "ChannelParams", "PackingScheme", "decompose", "epsilon",
    "exact_logical_evolution", "find_crossover", "kappa", "kappa_correlated",
    "logical_angle", "split_compose", "split_purity_loss", "v_beta",
    "MeasurementPattern", "extract_logical_channel", "logical_tomography",
    "make_pattern", "purity_loss", "run_pattern",
    "NoiseSpec", "depolarize_2q", "noisy_run",
    "PauliString", "PauliTransferMatrix", "stabilizer_K", "string_order_op",
    "build_cluster", "build_deformed", "build_xx_rotated", "exact_ground_state",
    "StateVector", "new_state", "shot_rng",
    "analytic_expectations", "optimize_theta", "sampled_expectations",
    "thermo_limit_theta",
]
