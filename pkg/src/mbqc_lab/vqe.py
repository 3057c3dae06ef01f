"""Variational energy evaluation for the interpolating Hamiltonian.

The ansatz applies the local deformation M(theta) to every bulk site of the
cluster state. Expectation values come either from closed forms (sin theta,
cos theta, cos^2 theta) or from simulating the compiled one- and two-qubit
measurement circuits shot by shot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import statevector as sv
from .statevector import StateVector, new_state


@dataclass
class EnergyBreakdown:
    """Per-term energy contributions of H(alpha) on the deformed ansatz."""

    alpha: float
    theta: float
    k_boundary: float
    k_bulk: float
    x_field: float
    total_energy: float
    err_k_boundary: float = 0.0
    err_k_bulk: float = 0.0
    err_x_field: float = 0.0
    err_total: float = 0.0


def _assemble(alpha: float, theta: float, n: int, kb: float, kblk: float,
              x: float, errs=(0.0, 0.0, 0.0)) -> EnergyBreakdown:
    # four boundary-class stabilizers, n-4 bulk-class, n-2 field terms
    e = -np.cos(alpha) * (4 * kb + (n - 4) * kblk) - np.sin(alpha) * (n - 2) * x
    ekb, ekblk, ex = errs
    var = (np.cos(alpha) * 4 * ekb) ** 2 + (np.cos(alpha) * (n - 4) * ekblk) ** 2 \
        + (np.sin(alpha) * (n - 2) * ex) ** 2
    return EnergyBreakdown(alpha, theta, kb, kblk, x, float(e),
                           ekb, ekblk, ex, float(np.sqrt(var)))


def analytic_expectations(theta: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-site (<X_i>, <K_i>) on the deformed ansatz, in closed form."""
    if n % 2 == 0:
        raise ValueError("ansatz requires odd n")
    x = np.zeros(n)
    x[1:n - 1] = np.sin(theta)
    k = np.full(n, np.cos(theta) ** 2)
    for i in (0, 1, n - 2, n - 1):
        k[i] = np.cos(theta)
    return x, k


def analytic_energy(alpha: float, theta: float, n: int) -> EnergyBreakdown:
    return _assemble(alpha, theta, n, float(np.cos(theta)),
                     float(np.cos(theta) ** 2), float(np.sin(theta)))


def _binary_mean(values: np.ndarray, counts: np.ndarray) -> tuple[float, float]:
    total = counts.sum()
    mean = float(np.dot(counts, values) / total)
    var = float(np.dot(counts, (values - mean) ** 2) / total)
    return mean, float(np.sqrt(var / total))


def _bulk_joint_distribution(theta: float, s0: int, si: int) -> np.ndarray:
    """Outcome distribution of the two-qubit bulk-stabilizer circuit.

    Both qubits start in |+>, a CZ entangles them, Z^{s0} and Z^{si} imprint
    the random bits, then RY(theta) acts on the first qubit and H followed by
    RY(theta) on the second before both are read out in Z. Returns the four
    probabilities indexed by (bit_1 + 2 * bit_2).
    """
    state = new_state(2, ["plus", "plus"])
    state.apply_2q(1, 2, sv.cz())
    if s0:
        state.apply_1q(1, sv.Z)
    if si:
        state.apply_1q(2, sv.Z)
    state.apply_1q(1, sv.ry(theta))
    state.apply_1q(2, sv.H)
    state.apply_1q(2, sv.ry(theta))
    return np.abs(state.amplitudes) ** 2


def sampled_expectations(theta: float, shots: int,
                         rng: np.random.Generator, alpha: float = 0.0,
                         n: int = 5) -> EnergyBreakdown:
    """Energy terms estimated by simulating the compiled circuits.

    <X> comes from RY(theta)|+> read in Z, the boundary stabilizer from
    RY(theta)|0>, and the bulk stabilizer from the joint parity
    (-1)^{s_{i-1} + s_i + s_{i+1}} of the one- and two-qubit circuits with a
    coin-flipped s0.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    pm = np.array([1.0, -1.0])
    p_x = (1.0 + np.sin(theta)) / 2.0
    counts = rng.multinomial(shots, [p_x, 1.0 - p_x])
    x_mean, x_err = _binary_mean(pm, counts)
    p_kb = (1.0 + np.cos(theta)) / 2.0
    counts = rng.multinomial(shots, [p_kb, 1.0 - p_kb])
    kb_mean, kb_err = _binary_mean(pm, counts)
    # bulk: split shots over the (s0, s_i) cells, then sample outcome pairs
    cell_p = np.empty(4)
    for s0 in (0, 1):
        for si in (0, 1):
            cell_p[2 * s0 + si] = 0.5 * (p_x if si == 0 else 1.0 - p_x)
    cell_counts = rng.multinomial(shots, cell_p)
    values, tallies = [], []
    for s0 in (0, 1):
        for si in (0, 1):
            c = cell_counts[2 * s0 + si]
            if c == 0:
                continue
            joint = _bulk_joint_distribution(theta, s0, si)
            sub = rng.multinomial(c, joint)
            for idx in range(4):
                b1, b2 = idx & 1, (idx >> 1) & 1
                values.append((-1.0) ** (b1 + si + b2))
                tallies.append(sub[idx])
    kblk_mean, kblk_err = _binary_mean(np.array(values), np.array(tallies))
    return _assemble(alpha, theta, n, kb_mean, kblk_mean, x_mean,
                     (kb_err, kblk_err, x_err))


@dataclass
class ThetaOptimum:
    theta_min: float
    energy_min: float
    theta_uncertainty: float
    flat: bool = False


def optimize_theta(alpha: float, n: int, grid_points: int = 64,
                   refine_iters: int = 60, shots: int | None = None,
                   rng: np.random.Generator | None = None) -> ThetaOptimum:
    """Minimize E(theta; alpha) over theta in [0, pi].

    Coarse grid scan, then golden-section refinement on the bracketing
    interval. With a shot count the sampled objective is used and the
    uncertainty is the theta range whose energies lie within one standard
    error of the minimum; otherwise refinement is to machine-level tolerance.
    """
    if grid_points < 16:
        raise ValueError("need at least 16 grid points")

    def objective(theta: float) -> tuple[float, float]:
        if shots is None:
            return analytic_energy(alpha, theta, n).total_energy, 0.0
        bd = sampled_expectations(theta, shots, rng, alpha, n)
        return bd.total_energy, bd.err_total

    grid = np.linspace(0.0, np.pi, grid_points)
    evals = [objective(t) for t in grid]
    energies = np.array([e for e, _ in evals])
    errs = np.array([s for _, s in evals])
    k = int(np.argmin(energies))
    flat = bool(energies.max() - energies.min() < 1e-12)
    if shots is not None:
        # theta range consistent with the minimum within one standard error
        band = energies <= energies[k] + errs[k] + errs
        lo = grid[band].min()
        hi = grid[band].max()
        return ThetaOptimum(float(grid[k]), float(energies[k]),
                            float((hi - lo) / 2.0), flat)
    if k == 0 or k == grid_points - 1 or flat:
        return ThetaOptimum(float(grid[k]), float(energies[k]),
                            float(grid[1] - grid[0]), flat or k in (0, grid_points - 1))
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = grid[k - 1], grid[k + 1]
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = objective(c)[0], objective(d)[0]
    for _ in range(refine_iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = objective(c)[0]
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = objective(d)[0]
    t = float((a + b) / 2.0)
    return ThetaOptimum(t, float(objective(t)[0]), float(b - a), False)


def thermo_limit_theta(alpha: float) -> float:
    """Thermodynamic-limit optimum: sin(theta*) = tan(alpha)/2, saturating at
    pi/2 once tan(alpha) exceeds 2."""
    if not 0 <= alpha <= np.pi / 2:
        raise ValueError(f"alpha {alpha} outside [0, pi/2]")
    t = np.tan(alpha) if alpha < np.pi / 2 else np.inf
    # tolerance absorbs the tan(arctan(2)) roundtrip error at the transition
    if t >= 2.0 * (1.0 - 1e-12):
        return float(np.pi / 2)
    return float(np.arcsin(t / 2.0))
