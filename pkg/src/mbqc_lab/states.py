"""Resource-state builders and ground-state oracles for the 1D cluster chain.

Builders return StateVector instances. Circuits are also exposed as explicit
gate lists so that a noise model can replay them with channels injected after
every two-qubit gate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg

from . import statevector as sv
from .dense import hamiltonian_matrix
from .paulis import PauliString, stabilizer_K
from .statevector import StateVector, new_state

# circuit ops: ("1q", site, Gate1Q) or ("2q", site_a, site_b, Gate2Q)
CircuitOp = tuple


def m_theta(theta: float) -> np.ndarray:
    """Local deformation cos(theta/2) I + sin(theta/2) X."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, s], [s, c]], dtype=complex)


def apply_ops(state, ops: list[CircuitOp], noise_hook=None):
    """Replay a gate list on a StateVector or DensityMatrix.

    noise_hook(state, site_a, site_b), if given, runs after each 2q gate.
    """
    for op in ops:
        if op[0] == "1q":
            state.apply_1q(op[1], op[2])
        elif op[0] == "2q":
            state.apply_2q(op[1], op[2], op[3])
            if noise_hook is not None:
                noise_hook(state, op[1], op[2])
        else:
            raise ValueError(f"unknown circuit op {op[0]!r}")
    return state


def cluster_circuit(n: int) -> list[CircuitOp]:
    """CZ on every nearest-neighbour pair (inputs are |+> product states)."""
    gate = sv.cz()
    return [("2q", i, i + 1, gate) for i in range(1, n)]


def xx_rotated_circuit(n: int, phi: float, compile_mode: str = "direct") -> list[CircuitOp]:
    """Gates applied on top of the cluster circuit to produce the XX-rotated state.

    RXX(phi) on the odd next-nearest-neighbour pairs (i, i+2) spanning the
    bulk rotation region (i = 3, 5, ..., n-4), then RX(phi) on the boundary
    sites {3, n-2} of that region. This reproduces the flat two-point
    correlator plateau cos^4(phi) beyond distance 2. swap_compiled routes each
    RXX through SWAPs with the intermediate site, as on nearest-neighbour
    hardware.
    """
    if compile_mode not in ("direct", "swap_compiled"):
        raise ValueError(f"unknown compile mode {compile_mode!r}")
    ops: list[CircuitOp] = []
    gate = sv.rxx(phi)
    swap = sv.swap()
    for i in range(3, n - 3, 2):
        if compile_mode == "direct":
            ops.append(("2q", i, i + 2, gate))
        else:
            ops.append(("2q", i + 1, i + 2, swap))
            ops.append(("2q", i, i + 1, gate))
            ops.append(("2q", i + 1, i + 2, swap))
    rx = sv.rx(phi)
    for i in (3, n - 2):
        ops.append(("1q", i, rx))
    return ops


def build_cluster(n: int, noise_hook=None) -> StateVector:
    if n < 2:
        raise ValueError("cluster state needs at least 2 sites")
    state = new_state(n, ["plus"] * n)
    return apply_ops(state, cluster_circuit(n), noise_hook)


def _check_symmetric_kind(n: int):
    if n % 2 == 0:
        raise ValueError("symmetry-dependent resource states require odd n")


def build_deformed(n: int, theta: float) -> StateVector:
    """Deformation M_i(theta) on every bulk site of the cluster state.

    The result stays normalized for any theta, which the norm tracking makes
    visible directly.
    """
    _check_symmetric_kind(n)
    if n < 3:
        raise ValueError("deformed state needs n >= 3")
    if not 0 <= theta <= np.pi:
        raise ValueError(f"theta {theta} outside [0, pi]")
    state = build_cluster(n)
    m = m_theta(theta)
    for i in range(2, n):
        state.apply_matrix_1q(i, m)
    return state


def build_xx_rotated(n: int, phi: float, compile_mode: str = "direct",
                     noise_hook=None) -> StateVector:
    _check_symmetric_kind(n)
    if not 0 <= phi <= np.pi / 2:
        raise ValueError(f"phi {phi} outside [0, pi/2]")
    if n < 7:
        raise ValueError("XX-rotated state needs n >= 7 for distinct boundary sites")
    if n < 11:
        warnings.warn("XX-rotated state below 11 sites is outside the validated regime",
                      stacklevel=2)
    state = new_state(n, ["plus"] * n)
    apply_ops(state, cluster_circuit(n), noise_hook)
    return apply_ops(state, xx_rotated_circuit(n, phi, compile_mode), noise_hook)


@dataclass
class GadgetResult:
    """Outcome of the ancilla-gadget preparation of the deformed state."""

    state: StateVector
    byproduct_x_sites: tuple[int, ...]
    attempts: int


def gadget_joint_state(n: int, theta: float) -> StateVector:
    """System (sites 1..n) plus one gadget ancilla per bulk site (sites n+1..2n-2),
    immediately before the ancilla measurements."""
    _check_symmetric_kind(n)
    n_total = 2 * n - 2
    state = new_state(n_total, ["plus"] * n_total)
    apply_ops(state, cluster_circuit(n))
    ry = sv.ry(theta)
    cx = sv.cx()
    for i in range(2, n):
        anc = n + i - 1
        state.apply_2q(i, anc, cx)  # control = ancilla (site_b), target = system
        state.apply_1q(anc, ry)
    return state


def _drop_collapsed_ancillas(state: StateVector, n: int,
                             anc_bits: list[int]) -> StateVector:
    """Keep the system block matching the measured ancilla bit pattern."""
    anc_index = 0
    for j, bit in enumerate(anc_bits):
        anc_index |= bit << j
    block = state.amplitudes.reshape(-1, 2 ** n)[anc_index]
    return StateVector(n, block.copy(), float(np.vdot(block, block).real)).renormalize()


def _stabilizer_tail(i: int, n: int) -> PauliString:
    """Product of K_j for j = i+1, i+3, ... up to the chain end.

    This is the cluster stabilizer string with a Z end at site i, used to fix
    the sign of a failed gadget outcome.
    """
    tail = PauliString.identity(n)
    for j in range(i + 1, n + 1, 2):
        tail = tail * stabilizer_K(j, n)
    return tail


_PAULI_GATES = {"X": sv.X, "Y": sv.Y, "Z": sv.Z}


def build_deformed_gadget(n: int, theta: float, rng: np.random.Generator,
                          mode: str = "corrected",
                          retry_cap: int = 10 ** 6) -> GadgetResult:
    """Prepare the deformed state via per-site measured ancillas.

    postselect mode retries until every ancilla returns +1 (success
    probability 2^-(n-2), independent of theta). corrected mode accepts any
    outcome: a -1 at site i is repaired by a Z at site i together with the
    stabilizer string ending there, leaving a recorded X byproduct.
    """
    if mode not in ("postselect", "corrected"):
        raise ValueError(f"unknown gadget mode {mode!r}")
    _check_symmetric_kind(n)
    attempts = 0
    while True:
        attempts += 1
        if attempts > retry_cap:
            raise RuntimeError(f"gadget post-selection exceeded {retry_cap} attempts")
        state = gadget_joint_state(n, theta)
        outcomes = []
        ok = True
        for i in range(2, n):
            anc = n + i - 1
            outcome, state, _ = state.project_measure(anc, sv.Z_OBSERVABLE, rng)
            outcomes.append(outcome)
            if outcome == -1 and mode == "postselect":
                ok = False
                break
        if mode == "postselect" and not ok:
            continue
        break
    byproducts = []
    if mode == "corrected":
        for i, outcome in zip(range(2, n), outcomes):
            if outcome == -1:
                tail = _stabilizer_tail(i, n)
                for site in tail.support():
                    if site != i:
                        state.apply_1q(site, _PAULI_GATES[tail.letter(site)])
                state.apply_1q(i, sv.Z)
                byproducts.append(i)
    anc_bits = [0 if s == 1 else 1 for s in outcomes] + [0] * (n - 2 - len(outcomes))
    system = _drop_collapsed_ancillas(state, n, anc_bits)
    return GadgetResult(system, tuple(byproducts), attempts)


@dataclass
class GroundState:
    energy: float
    state: StateVector
    gap: float
    degenerate: bool
    ground_dim: int


def exact_ground_state(alpha: float, n: int) -> GroundState:
    """Lowest eigenpair of H(alpha) by dense or sparse diagonalization."""
    if n > 12:
        raise ValueError("exact diagonalization limited to n <= 12")
    if not 0 <= alpha <= np.pi / 2:
        raise ValueError(f"alpha {alpha} outside [0, pi/2]")
    if n <= 8:
        h = hamiltonian_matrix(alpha, n)
        vals, vecs = np.linalg.eigh(h)
    else:
        h = hamiltonian_matrix(alpha, n, sparse=True)
        vals, vecs = scipy.sparse.linalg.eigsh(h, k=6, which="SA")
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    gap = float(vals[1] - vals[0])
    degenerate = gap < 1e-10
    ground_dim = int(np.sum(vals - vals[0] < 1e-10))
    state = StateVector(n, vecs[:, 0].astype(complex), 1.0)
    return GroundState(float(vals[0]), state, gap, degenerate, ground_dim)


def perturbative_gs(alpha: float, n: int) -> StateVector:
    """Normalized first-order state (1 + (alpha/4) sum over bulk of X_i)|C_n>."""
    if n > 12:
        raise ValueError("perturbative construction limited to n <= 12")
    cluster = build_cluster(n)
    amps = cluster.amplitudes.copy()
    for i in range(2, n):
        flipped = cluster.amplitudes.reshape(-1, 2, 2 ** (i - 1))[:, ::-1, :].reshape(-1)
        amps = amps + (alpha / 4) * flipped
    state = StateVector(n, amps, float(np.vdot(amps, amps).real))
    return state.renormalize()
