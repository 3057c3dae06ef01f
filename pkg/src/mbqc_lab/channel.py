"""Closed-form single-logical-qubit channel induced by symmetry-breaking measurements.

A rotated measurement at angle beta on a resource state with string order
parameter sigma acts logically as the mixture

    V_beta = (1+sigma)/2 [RZ(beta)] + (1-sigma)/2 [RZ(-beta)],

which decomposes into a reduced rotation RZ(beta_log) followed by dephasing.
This module provides that channel, its parameters (beta_log, epsilon, nu,
kappa), the splitting composition, and the exact string-operator evaluation of
the logical evolution on an explicit resource state (with packing comparison
and crossover search).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iter_product

import numpy as np

from .paulis import PauliString, PauliTransferMatrix, ptm_from_map, frobenius_error
from .statevector import StateVector

_RZ_AXIS = "Z"


@dataclass(frozen=True)
class ChannelParams:
    sigma: float
    beta: float
    axis: str = "Z"

    def __post_init__(self):
        if abs(self.sigma) > 1 + 1e-12:
            raise ValueError(f"|sigma| = {abs(self.sigma)} exceeds 1")
        if self.axis not in ("X", "Z"):
            raise ValueError("rotation axis must be X or Z")


@dataclass(frozen=True)
class PackingScheme:
    """Rotation sites and angles for a split logical rotation."""

    rotation_sites: tuple[int, ...]
    angles: tuple[float, ...]
    label: str = ""

    def __post_init__(self):
        sites = self.rotation_sites
        if len(sites) != len(self.angles):
            raise ValueError("one angle per rotation site required")
        if any(b >= a for a, b in zip(sites[1:], sites)):
            raise ValueError("rotation sites must be strictly increasing")
        if any((b - a) % 2 for a, b in zip(sites, sites[1:])):
            # odd spacing would mix byproduct types between rotations
            raise ValueError("rotation-site spacing must be even")


def v_beta(params: ChannelParams) -> PauliTransferMatrix:
    """PTM of the sigma-weighted mixture of rotations by +/-beta."""
    s, b = params.sigma, params.beta
    p = np.asarray({"X": [[0, 1], [1, 0]], "Z": [[1, 0], [0, -1]]}[params.axis],
                   dtype=complex)
    u_plus = np.cos(b / 2) * np.eye(2) - 1j * np.sin(b / 2) * p
    u_minus = u_plus.conj().T
    return ptm_from_map([((1 + s) / 2, u_plus), ((1 - s) / 2, u_minus)])


def logical_angle(sigma: float, beta: float) -> float:
    """Reduced rotation angle with tan(beta_log) = sigma tan(beta).

    The branch is chosen continuously in beta (an extra pi per half-turn), so
    sweeps across beta = pi/2 stay smooth. sigma = 0 snaps to the nearest
    multiple of pi, the limit of the branch rule.
    """
    if abs(sigma) > 1 + 1e-12:
        raise ValueError("|sigma| exceeds 1")
    k = np.round(beta / np.pi)
    if sigma == 0.0:
        return float(k * np.pi)
    return float(k * np.pi + np.arctan(sigma * np.tan(beta - k * np.pi)))


def epsilon(sigma: float, beta: float) -> float:
    """Decoherence strength 2(1 - sqrt(1 - (1 - sigma^2) sin^2 beta))."""
    return float(2.0 * (1.0 - np.sqrt(1.0 - (1.0 - sigma ** 2) * np.sin(beta) ** 2)))


def decompose(params: ChannelParams) -> tuple[float, PauliTransferMatrix]:
    """Split v_beta into (beta_log, dephasing D(eps/4)); their PTM product
    reassembles v_beta exactly."""
    b_log = logical_angle(params.sigma, params.beta)
    eps = epsilon(params.sigma, params.beta)
    dephasing_axis = params.axis  # dephasing is about the rotation axis
    return b_log, PauliTransferMatrix.dephasing(eps / 4, dephasing_axis)


def computational_order(sigma: float, beta0: float = 1e-5) -> tuple[float, float]:
    """(nu, numerical estimate) where nu = lim beta_log / beta as beta -> 0."""
    nu = float(sigma)
    nu_hat = logical_angle(sigma, beta0) / beta0
    return nu, float(nu_hat)


class UnboundedKappaError(ValueError):
    """kappa diverges: the resource has no string order (sigma = 0)."""


def kappa(sigma: float) -> float:
    if sigma == 0.0:
        raise UnboundedKappaError("sigma = 0 leaves only a wire; kappa is unbounded")
    return float((1.0 - sigma ** 2) / sigma ** 2)


def kappa_correlated(sigma_sq: float, correlator, m: int, delta: int) -> float:
    """kappa for m rotations spaced delta apart with two-point correlator
    sigma^2(l); reduces to kappa when the correlator is flat."""
    if sigma_sq == 0.0:
        raise UnboundedKappaError("sigma = 0 leaves only a wire; kappa is unbounded")
    total = 1.0 - sigma_sq
    for j in range(1, m):
        total += 2.0 * (correlator(j * delta) - sigma_sq)
    return float(total / sigma_sq)


def epsilon_m(kappa_value: float, beta: float, m: int) -> float:
    """Leading-order logical error kappa beta^2 / m after m-fold splitting."""
    if m < 1:
        raise ValueError("splitting number must be >= 1")
    return float(kappa_value * beta ** 2 / m)


def split_compose(sigma: float, beta: float, m: int,
                  axis: str = "Z") -> PauliTransferMatrix:
    """Exact m-fold composition of v_beta(sigma, beta/m)."""
    if m < 1:
        raise ValueError("splitting number must be >= 1")
    step = v_beta(ChannelParams(sigma, beta / m, axis))
    out = PauliTransferMatrix.identity()
    for _ in range(m):
        out = step @ out
    return out


def purity_loss_from_xy(exp_x: float, exp_y: float) -> float:
    return 0.5 * (1.0 - exp_x ** 2 - exp_y ** 2)


def split_purity_loss(sigma: float, beta: float, m: int) -> float:
    """Closed-form purity loss of m-fold split rotations on logical |+>."""
    per_step = 1.0 - (1.0 - sigma ** 2) * np.sin(beta / m) ** 2
    return float((1.0 - per_step ** m) / 2.0)


def string_s_op(j: int, n: int) -> PauliString:
    """String operator Z_j X_{j+1} I_{j+2} X_{j+3} ... X_{n-1} Z_n."""
    if not 1 <= j <= n - 2:
        raise ValueError(f"string operator start {j} exceeds chain of length {n}")
    sites = {j: "Z", n: "Z"}
    sites.update({k: "X" for k in range(j + 1, n, 2)})
    return PauliString.from_sites(n, sites)


def exact_logical_evolution(resource: StateVector,
                            scheme: PackingScheme) -> tuple[float, float, float]:
    """Logical (X, Y, Z) after the scheme's rotations, on logical input |+>.

    The ordered product of per-rotation 2x2 blocks (cos b_j +/- S_j sin b_j)
    is expanded over string-operator subsets; each subset's expectation is
    evaluated exactly on the resource state.
    """
    n = resource.n_qubits
    sites = scheme.rotation_sites
    if sites and sites[-1] > n - 2:
        raise ValueError("rotation string operator exceeds the chain")
    cos_b = [np.cos(b) for b in scheme.angles]
    sin_b = [np.sin(b) for b in scheme.angles]
    s_ops = [string_s_op(j, n) for j in sites]
    z = 0.0 + 0.0j
    for picks in iter_product((0, 1), repeat=len(sites)):
        coeff = 1.0 + 0.0j
        op = PauliString.identity(n)
        for idx, pick in enumerate(picks):
            if pick:
                coeff *= 1j * sin_b[idx]
                op = op * s_ops[idx]
            else:
                coeff *= cos_b[idx]
        z += coeff * resource.expect_pauli(op)
    return float(z.real), float(z.imag), 0.0


def packing_compare(resource: StateVector, beta_grid, schemes_for_beta):
    """Purity loss per scheme per total angle beta.

    schemes_for_beta: callable beta -> list of PackingScheme (so the per-site
    angles scale with beta). Returns {label: [lp for each beta]}.
    """
    results: dict[str, list[float]] = {}
    for beta in beta_grid:
        for scheme in schemes_for_beta(beta):
            x, y, _ = exact_logical_evolution(resource, scheme)
            results.setdefault(scheme.label, []).append(purity_loss_from_xy(x, y))
    return results


@dataclass
class CrossoverResult:
    found: bool
    phi_c: float | None
    detail: str = ""


def find_crossover(resource_builder, beta: float, scheme_a, scheme_b,
                   phi_grid) -> CrossoverResult:
    """Locate the phi where the purity losses of two schemes cross.

    resource_builder(phi) -> StateVector; scheme_a/b(beta) -> PackingScheme.
    Bisects the sign of LP_a - LP_b on the first bracketing interval of the
    grid; reports absence of a sign change otherwise.
    """

    def gap(phi: float) -> float:
        res = resource_builder(phi)
        xa, ya, _ = exact_logical_evolution(res, scheme_a(beta))
        xb, yb, _ = exact_logical_evolution(res, scheme_b(beta))
        return purity_loss_from_xy(xa, ya) - purity_loss_from_xy(xb, yb)

    phi_grid = list(phi_grid)
    values = [gap(phi) for phi in phi_grid]
    # zero gaps carry no sign information; a crossing needs a strict change
    prev_phi = prev_val = None
    for phi, val in zip(phi_grid, values):
        if val == 0.0:
            continue
        if prev_val is not None and prev_val * val < 0:
            lo, hi, glo = prev_phi, phi, prev_val
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                gm = gap(mid)
                if gm == 0.0:
                    return CrossoverResult(True, float(mid))
                if glo * gm < 0:
                    hi = mid
                else:
                    lo, glo = mid, gm
            return CrossoverResult(True, float(0.5 * (lo + hi)))
        prev_phi, prev_val = phi, val
    if prev_val is None:
        return CrossoverResult(False, None, "gap is identically zero on grid")
    sign = "a > b" if prev_val > 0 else "a <= b"
    return CrossoverResult(False, None, f"no sign change on grid ({sign} throughout)")


def channel_identity_errors(sigma: float, beta: float) -> dict[str, float]:
    """Self-consistency residuals of the closed-form channel at one (sigma, beta)."""
    params = ChannelParams(sigma, beta)
    v = v_beta(params)
    b_log, deph = decompose(params)
    rz = PauliTransferMatrix.rotation("Z", b_log)
    reassembled = deph @ rz
    eps = epsilon(sigma, beta)
    lp_closed = split_purity_loss(sigma, beta, 1)
    lp_from_eps = (eps / 2.0) * (1.0 - eps / 4.0)
    return {
        "reassembly": float(np.max(np.abs(reassembled.mat - v.mat))),
        "frobenius_vs_eps": abs(frobenius_error(v, rz) - eps),
        "lp_vs_eps": abs(lp_closed - lp_from_eps),
    }
