"""Pauli-string algebra, stabilizers, string operators, and Pauli transfer matrices.

Sites are 1-based along the chain. Pauli strings carry only real signs:
every operator used in the protocols (stabilizers, symmetry generators,
string order operators and their products) composes with a +/-1 phase, so a
product landing on an imaginary phase indicates a bookkeeping bug and raises.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# (a, b) -> (i-power, product letter) for single-site Pauli multiplication.
_MUL = {
    ("I", "I"): (0, "I"), ("I", "X"): (0, "X"), ("I", "Y"): (0, "Y"), ("I", "Z"): (0, "Z"),
    ("X", "I"): (0, "X"), ("X", "X"): (0, "I"), ("X", "Y"): (1, "Z"), ("X", "Z"): (3, "Y"),
    ("Y", "I"): (0, "Y"), ("Y", "X"): (3, "Z"), ("Y", "Y"): (0, "I"), ("Y", "Z"): (1, "X"),
    ("Z", "I"): (0, "Z"), ("Z", "X"): (1, "Y"), ("Z", "Y"): (3, "X"), ("Z", "Z"): (0, "I"),
}


class PauliPhaseError(ValueError):
    """Raised when a product of Pauli strings picks up an imaginary phase."""


@dataclass(frozen=True)
class PauliString:
    """Signed tensor product of single-site Paulis over an n-site chain."""

    letters: tuple[str, ...]
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        bad = set(self.letters) - set("IXYZ")
        if bad:
            raise ValueError(f"invalid Pauli letters: {bad}")

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        """Parse a rendering such as '+ZXIXZ' or '-IZX'."""
        sign = 1
        if text and text[0] in "+-":
            sign = 1 if text[0] == "+" else -1
            text = text[1:]
        return cls(tuple(text), sign)

    @classmethod
    def from_sites(cls, n: int, sites: dict[int, str], sign: int = 1) -> "PauliString":
        """Build a length-n string with letters at the given 1-based sites."""
        letters = ["I"] * n
        for site, letter in sites.items():
            if not 1 <= site <= n:
                raise ValueError(f"site {site} outside chain of length {n}")
            letters[site - 1] = letter
        return cls(tuple(letters), sign)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(("I",) * n)

    @property
    def n(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("length mismatch in Pauli product")
        ipow = 0
        letters = []
        for a, b in zip(self.letters, other.letters):
            k, c = _MUL[(a, b)]
            ipow += k
            letters.append(c)
        ipow %= 4
        if ipow % 2:
            raise PauliPhaseError(f"product {self} * {other} has imaginary phase i^{ipow}")
        sign = self.sign * other.sign * (1 if ipow == 0 else -1)
        return PauliString(tuple(letters), sign)

    def letter(self, site: int) -> str:
        return self.letters[site - 1]

    def support(self) -> list[int]:
        return [i + 1 for i, c in enumerate(self.letters) if c != "I"]

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix (Kronecker order: site 1 least significant)."""
        mats = [PAULI_MATRICES[c] for c in reversed(self.letters)]
        return self.sign * reduce(np.kron, mats)

    def __str__(self) -> str:
        return ("+" if self.sign > 0 else "-") + "".join(self.letters)


def stabilizer_K(i: int, n: int) -> PauliString:
    """Cluster-state stabilizer generator centered at site i."""
    if not 1 <= i <= n:
        raise ValueError(f"site {i} outside chain of length {n}")
    if i == 1:
        return PauliString.from_sites(n, {1: "X", 2: "Z"})
    if i == n:
        return PauliString.from_sites(n, {n - 1: "Z", n: "X"})
    return PauliString.from_sites(n, {i - 1: "Z", i: "X", i + 1: "Z"})


def symmetry_generators(n: int) -> tuple[PauliString, PauliString]:
    """The two Z2 x Z2 generators: Z1 X2 I3 .. X_{n-1} Z_n and X1 I2 X3 .. X_n."""
    if n % 2 == 0:
        raise ValueError("symmetry generators are defined for odd chain lengths")
    g1 = {1: "Z", n: "Z"}
    g1.update({j: "X" for j in range(2, n, 2)})
    g2 = {j: "X" for j in range(1, n + 1, 2)}
    return (
        PauliString.from_sites(n, g1),
        PauliString.from_sites(n, g2),
    )


def string_order_op(k: int, n: int) -> PauliString:
    """String order operator anchored at site k, running to the chain end.

    For odd k the operator is Z_k X_{k+1} I_{k+2} .. X_{n-1} Z_n; for even k
    the X legs sit on odd sites and the operator ends in X_n.
    """
    if not 1 <= k <= n - 2:
        raise ValueError(f"anchor {k} leaves no room on chain of length {n}")
    sites: dict[int, str] = {k: "Z"}
    if k % 2 == 1:
        sites[n] = "Z"
        sites.update({j: "X" for j in range(k + 1, n, 2)})
    else:
        sites.update({j: "X" for j in range(k + 1, n + 1, 2)})
    return PauliString.from_sites(n, sites)


def two_point_string_op(k: int, l: int, n: int) -> PauliString:
    """Two-point string correlator operator Z_k X_{k+1} I .. X_{k+l-1} Z_{k+l}."""
    if l % 2 != 0 or l < 2:
        raise ValueError("two-point string operator requires even separation l >= 2")
    if k < 1 or k + l > n:
        raise ValueError(f"operator [{k}, {k + l}] exceeds chain of length {n}")
    sites = {k: "Z", k + l: "Z"}
    sites.update({j: "X" for j in range(k + 1, k + l, 2)})
    return PauliString.from_sites(n, sites)


_PAULI_1Q = [PAULI_MATRICES[c] for c in "IXYZ"]


class PauliTransferMatrix:
    """4x4 real Pauli-basis representation of a single-qubit channel.

    Basis order (I, X, Y, Z). Trace-preserving channels have first row
    (1, 0, 0, 0) exactly.
    """

    def __init__(self, mat: np.ndarray):
        mat = np.asarray(mat, dtype=float)
        if mat.shape != (4, 4):
            raise ValueError("PTM must be 4x4")
        self.mat = mat

    @classmethod
    def identity(cls) -> "PauliTransferMatrix":
        return cls(np.eye(4))

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "PauliTransferMatrix":
        return ptm_from_map([(1.0, np.asarray(u, dtype=complex))])

    @classmethod
    def rotation(cls, axis: str, angle: float) -> "PauliTransferMatrix":
        """PTM of exp(-i*angle/2 * P_axis)."""
        p = PAULI_MATRICES[axis]
        u = np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * p
        return cls.from_unitary(u)

    @classmethod
    def dephasing(cls, weight: float, axis: str = "Z") -> "PauliTransferMatrix":
        """Mixture (1-w)[I] + w[P_axis] applied as conjugation."""
        return ptm_from_map([(1.0 - weight, np.eye(2)), (weight, PAULI_MATRICES[axis])])

    @property
    def block(self) -> np.ndarray:
        """The 3x3 traceless (X, Y, Z) block."""
        return self.mat[1:, 1:]

    def is_trace_preserving(self, tol: float = 1e-10) -> bool:
        return bool(np.allclose(self.mat[0], [1.0, 0.0, 0.0, 0.0], atol=tol))

    def choi_min_eigenvalue(self) -> float:
        """Minimum eigenvalue of the Choi matrix; >= -1e-10 for CP channels."""
        choi = np.zeros((4, 4), dtype=complex)
        for a in range(4):
            for b in range(4):
                choi += 0.25 * self.mat[a, b] * np.kron(_PAULI_1Q[b].T, _PAULI_1Q[a])
        return float(np.linalg.eigvalsh(choi).min())

    def __matmul__(self, other: "PauliTransferMatrix") -> "PauliTransferMatrix":
        return PauliTransferMatrix(self.mat @ other.mat)

    def __repr__(self) -> str:
        return f"PauliTransferMatrix({self.mat!r})"


def ptm_from_map(kraus: list[tuple[float, np.ndarray]]) -> PauliTransferMatrix:
    """PTM of the map rho -> sum_k w_k A_k rho A_k^dag.

    Completeness sum_k w_k A_k^dag A_k = I is required to 1e-10; the resulting
    PTM is checked for complete positivity via the Choi spectrum.
    """
    comp = np.zeros((2, 2), dtype=complex)
    for w, a in kraus:
        if w < -1e-12:
            raise ValueError("negative Kraus weight")
        a = np.asarray(a, dtype=complex)
        comp += w * a.conj().T @ a
    if not np.allclose(comp, np.eye(2), atol=1e-10):
        raise ValueError("map is not trace preserving (Kraus completeness fails)")
    mat = np.zeros((4, 4))
    for b in range(4):
        out = np.zeros((2, 2), dtype=complex)
        for w, a in kraus:
            out += w * np.asarray(a, dtype=complex) @ _PAULI_1Q[b] @ np.asarray(a, dtype=complex).conj().T
        for aidx in range(4):
            val = 0.5 * np.trace(_PAULI_1Q[aidx] @ out)
            if abs(val.imag) > 1e-10:
                raise ValueError("PTM entry with imaginary part; invalid Kraus set")
            mat[aidx, b] = val.real
    ptm = PauliTransferMatrix(mat)
    if ptm.choi_min_eigenvalue() < -1e-10:
        raise ValueError("map is not completely positive")
    return ptm


def frobenius_error(v: PauliTransferMatrix, u: PauliTransferMatrix) -> float:
    """Error metric sqrt(2) * ||V - U||_F over the 3x3 traceless block.

    The trace row of a trace-preserving channel cancels in the difference, so
    the metric is computed on the traceless block only.
    """
    return float(np.sqrt(2.0) * np.linalg.norm(v.block - u.block))
