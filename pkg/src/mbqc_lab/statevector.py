"""Dense statevector engine for short spin chains.

Conventions (shared by the whole package):
  * sites are 1-based; bit i-1 of a basis index addresses site i
    (site 1 = least significant bit),
  * RZ(b) = exp(-i b Z / 2), RX and RXX analogous,
  * RY(t) maps |+> to a state with <Z> = sin(t), matching the compiled
    measurement circuits (equivalently RY(t) = exp(+i t Y / 2)).

The norm is tracked explicitly instead of renormalizing after non-unitary
maps, so gadget acceptance probabilities stay recoverable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .paulis import PAULI_MATRICES, PauliString

MAX_QUBITS = 24


@dataclass
class Gate1Q:
    matrix: np.ndarray
    label: str

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (2, 2):
            raise ValueError("Gate1Q requires a 2x2 matrix")
        if not np.allclose(self.matrix @ self.matrix.conj().T, np.eye(2), atol=1e-12):
            raise ValueError(f"gate {self.label} is not unitary")


@dataclass
class Gate2Q:
    matrix: np.ndarray
    label: str

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (4, 4):
            raise ValueError("Gate2Q requires a 4x4 matrix")
        if not np.allclose(self.matrix @ self.matrix.conj().T, np.eye(4), atol=1e-12):
            raise ValueError(f"gate {self.label} is not unitary")


_SQ2 = 1.0 / np.sqrt(2.0)

H = Gate1Q(np.array([[1, 1], [1, -1]]) * _SQ2, "H")
X = Gate1Q(PAULI_MATRICES["X"], "X")
Y = Gate1Q(PAULI_MATRICES["Y"], "Y")
Z = Gate1Q(PAULI_MATRICES["Z"], "Z")


def rx(phi: float) -> Gate1Q:
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    return Gate1Q(np.array([[c, -1j * s], [-1j * s, c]]), f"RX({phi})")


def ry(theta: float) -> Gate1Q:
    # Sign chosen so RY(t)|+> has <Z> = sin(t); see module docstring.
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return Gate1Q(np.array([[c, s], [-s, c]]), f"RY({theta})")


def rz(beta: float) -> Gate1Q:
    return Gate1Q(np.diag([np.exp(-1j * beta / 2), np.exp(1j * beta / 2)]), f"RZ({beta})")


def cz() -> Gate2Q:
    return Gate2Q(np.diag([1, 1, 1, -1]).astype(complex), "CZ")


def cx() -> Gate2Q:
    # Control = second site argument, target = first.
    m = np.eye(4, dtype=complex)[:, [0, 1, 3, 2]]
    return Gate2Q(m, "CX")


def swap() -> Gate2Q:
    m = np.eye(4, dtype=complex)[:, [0, 2, 1, 3]]
    return Gate2Q(m, "SWAP")


def rxx(phi: float) -> Gate2Q:
    xx = np.kron(PAULI_MATRICES["X"], PAULI_MATRICES["X"])
    m = np.cos(phi / 2) * np.eye(4) - 1j * np.sin(phi / 2) * xx
    return Gate2Q(m, f"RXX({phi})")


@dataclass
class Observable1Q:
    """Single-site +/-1-outcome observable with a fixed eigenbasis.

    ``vec_plus``/``vec_minus`` are the eigenvectors reported as outcome +1 and
    -1; ``val_plus``/``val_minus`` the corresponding eigenvalues (used as
    outcome weights in deformed measurement patterns).
    """

    vec_plus: np.ndarray
    vec_minus: np.ndarray
    val_plus: float
    val_minus: float
    degenerate: bool = False

    @classmethod
    def from_hermitian(cls, m: np.ndarray) -> "Observable1Q":
        """Eigenbasis of a Hermitian 2x2; outcome +1 is the larger eigenvalue.

        Ties are broken toward the eigenvector with larger overlap with |0>.
        """
        m = np.asarray(m, dtype=complex)
        if not np.allclose(m, m.conj().T, atol=1e-12):
            raise ValueError("observable must be Hermitian")
        vals, vecs = np.linalg.eigh(m)
        degenerate = bool(abs(vals[1] - vals[0]) < 1e-12)
        if degenerate:
            order = np.argsort([-abs(vecs[0, 0]), -abs(vecs[0, 1])])
            hi, lo = order[0], order[1]
        else:
            hi, lo = 1, 0  # eigh sorts ascending
        return cls(vecs[:, hi].copy(), vecs[:, lo].copy(), float(vals[hi]), float(vals[lo]),
                   degenerate)


X_OBSERVABLE = Observable1Q(
    np.array([_SQ2, _SQ2]), np.array([_SQ2, -_SQ2]), 1.0, -1.0)
Z_OBSERVABLE = Observable1Q(
    np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex), 1.0, -1.0)
Y_OBSERVABLE = Observable1Q(
    np.array([_SQ2, 1j * _SQ2]), np.array([_SQ2, -1j * _SQ2]), 1.0, -1.0)


@dataclass
class StateVector:
    """Dense complex amplitudes over n qubits with a tracked squared norm."""

    n_qubits: int
    amplitudes: np.ndarray
    norm_sq: float = 1.0

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"qubit count {self.n_qubits} outside 1..{MAX_QUBITS}")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2 ** self.n_qubits,):
            raise ValueError("amplitude array length must be 2^n")

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy(), self.norm_sq)

    def _check_site(self, site: int):
        if not 1 <= site <= self.n_qubits:
            raise ValueError(f"site {site} outside 1..{self.n_qubits}")

    def _view(self, site: int) -> np.ndarray:
        """Amplitudes reshaped to (high, site bit, low)."""
        low = 2 ** (site - 1)
        return self.amplitudes.reshape(-1, 2, low)

    def apply_1q(self, site: int, gate: Gate1Q) -> "StateVector":
        self._check_site(site)
        v = self._view(site)
        self.amplitudes = np.einsum("ab,xbl->xal", gate.matrix, v).reshape(-1)
        return self

    def apply_matrix_1q(self, site: int, m: np.ndarray) -> tuple["StateVector", float]:
        """Apply an arbitrary (possibly non-unitary) 2x2 map to one site.

        Returns (self, norm_factor) with norm_factor = new_norm / old_norm.
        """
        self._check_site(site)
        m = np.asarray(m, dtype=complex)
        old = self.norm_sq
        v = self._view(site)
        self.amplitudes = np.einsum("ab,xbl->xal", m, v).reshape(-1)
        self.norm_sq = float(np.vdot(self.amplitudes, self.amplitudes).real)
        factor = np.sqrt(self.norm_sq / old) if old > 0 else 0.0
        return self, float(factor)

    def apply_2q(self, site_a: int, site_b: int, gate: Gate2Q) -> "StateVector":
        self._check_site(site_a)
        self._check_site(site_b)
        if site_a == site_b:
            raise ValueError("two-qubit gate requires distinct sites")
        n = self.n_qubits
        t = self.amplitudes.reshape([2] * n)
        # numpy axis k addresses site n - k; gate matrix index order is
        # (a', b', a, b) with site_a the least significant of the pair.
        ax_a, ax_b = n - site_a, n - site_b
        g = gate.matrix.reshape(2, 2, 2, 2)  # (b', a', b, a)
        t = np.tensordot(g, t, axes=([2, 3], [ax_b, ax_a]))
        # tensordot puts the (b', a') axes in front; restore positions.
        rest = [k for k in range(n) if k not in (ax_a, ax_b)]
        order = np.argsort([ax_b, ax_a] + rest)
        self.amplitudes = np.transpose(t, order).reshape(-1)
        return self

    def norm_error(self) -> float:
        total = float(np.vdot(self.amplitudes, self.amplitudes).real)
        return abs(total / self.norm_sq - 1.0)

    def renormalize(self) -> "StateVector":
        nrm = np.linalg.norm(self.amplitudes)
        if nrm == 0:
            raise ValueError("cannot renormalize the zero vector")
        self.amplitudes = self.amplitudes / nrm
        self.norm_sq = 1.0
        return self

    def expect_pauli(self, op: PauliString) -> float:
        """<psi|P|psi> / <psi|psi> for a Pauli string of matching length."""
        if op.n != self.n_qubits:
            raise ValueError("Pauli string length does not match qubit count")
        work = self.amplitudes
        for site in range(1, self.n_qubits + 1):
            letter = op.letter(site)
            if letter == "I":
                continue
            v = work.reshape(-1, 2, 2 ** (site - 1))
            if letter == "X":
                work = v[:, ::-1, :].reshape(-1)
            elif letter == "Z":
                v = v.copy()
                v[:, 1, :] *= -1
                work = v.reshape(-1)
            else:  # Y
                v = v[:, ::-1, :] * np.array([-1j, 1j])[None, :, None]
                work = v.reshape(-1)
        val = np.vdot(self.amplitudes, work) * op.sign
        denom = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(val.imag) / max(denom, 1e-300) > 1e-10:
            raise ValueError(f"expectation of {op} has imaginary residue {val.imag}")
        return float(val.real / denom)

    def branch_1q(self, site: int, obs: Observable1Q) -> tuple["StateVector", "StateVector",
                                                              float, float]:
        """Project onto both eigenvectors of obs; returns states and probabilities.

        Branch states keep their unnormalized amplitudes (norm_sq updated);
        probabilities are relative to the current state norm.
        """
        self._check_site(site)
        denom = float(np.vdot(self.amplitudes, self.amplitudes).real)
        branches = []
        probs = []
        for vec in (obs.vec_plus, obs.vec_minus):
            proj = np.outer(vec, vec.conj())
            v = self._view(site)
            amps = np.einsum("ab,xbl->xal", proj, v).reshape(-1)
            p = float(np.vdot(amps, amps).real) / denom if denom > 0 else 0.0
            branches.append(StateVector(self.n_qubits, amps,
                                        float(np.vdot(amps, amps).real)))
            probs.append(p)
        return branches[0], branches[1], probs[0], probs[1]

    def project_measure(self, site: int, obs: Observable1Q,
                        rng: np.random.Generator) -> tuple[int, "StateVector", float]:
        """Born-rule measurement of a single-site observable.

        Returns (outcome, collapsed renormalized state, branch probability).
        A branch probability below 1e-15 for the sampled outcome signals an
        inconsistent post-selection and raises.
        """
        plus, minus, p_plus, p_minus = self.branch_1q(site, obs)
        outcome = 1 if rng.random() < p_plus else -1
        state, p = (plus, p_plus) if outcome == 1 else (minus, p_minus)
        if p < 1e-15:
            raise ZeroProbabilityError(
                f"measurement branch at site {site} has probability {p}")
        return outcome, state.renormalize(), p


class ZeroProbabilityError(RuntimeError):
    """A measurement or post-selection branch has vanishing probability."""


def new_state(n: int, site_states: list[str]) -> StateVector:
    """Product state over n qubits; each entry of site_states is 'zero' or 'plus'."""
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"qubit count {n} outside 1..{MAX_QUBITS}")
    if len(site_states) != n:
        raise ValueError("site_states must have one entry per qubit")
    single = {"zero": np.array([1.0, 0.0], dtype=complex),
              "plus": np.array([_SQ2, _SQ2], dtype=complex)}
    amps = np.array([1.0], dtype=complex)
    for s in site_states:
        if s not in single:
            raise ValueError(f"unknown site state {s!r}")
        amps = np.kron(single[s], amps)  # later sites are more significant
    return StateVector(n, amps, 1.0)


def shot_rng(seed: int, index: int) -> np.random.Generator:
    """Child RNG stream for shot/trajectory ``index`` of experiment ``seed``.

    Derived from (seed, index) so results are reproducible independent of
    scheduling order.
    """
    return np.random.default_rng(np.random.SeedSequence((seed, index)))
