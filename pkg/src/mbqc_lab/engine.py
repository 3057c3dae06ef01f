"""Measurement-pattern execution on resource states.

The deformation M(theta) of the resource is handled measurement-side: each
site is measured in the eigenbasis of M†(theta) O M(theta) and the outcomes
are reweighted by the eigenvalues. Byproduct bookkeeping reduces to parity
masks over the outcome record:

  * a Z byproduct on the output (flipping an X or Y readout) has the parity
    of the outcomes on sites sharing the output site's parity (odd sites),
  * an X byproduct (flipping a Y readout) has the parity of the remaining
    (even) sites,
  * the rotation sign at a rotated site i is flipped by the parity of the
    outcomes at earlier sites j with j = i - 1 mod 2.

The masks are validated wholesale against the brute-force channel extractor.
Noiseless execution enumerates all outcome branches exactly and, when a shot
count is requested, draws multinomial counts over the branch table.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import statevector as sv
from .paulis import PAULI_MATRICES, PauliTransferMatrix
from .states import m_theta
from .statevector import Observable1Q, StateVector

ADAPTIVITY_MODES = ("adaptive", "sign_agnostic", "post_selected")

# Fixed by the cluster-state anchor (<X>, <Y>) = (cos b, +sin b) for a single
# rotated measurement; recorded in run metadata.
Y_SIGN_CONVENTION = 1.0


@dataclass(frozen=True)
class PatternSite:
    kind: str  # wire | rotated | output
    beta: float = 0.0


@dataclass(frozen=True)
class MeasurementPattern:
    """Per-site measurement plan for one logical-qubit chain."""

    n: int
    sites: tuple[PatternSite, ...]
    theta: float = 0.0
    mode: str = "adaptive"
    post_select_sites: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.sites) != self.n:
            raise ValueError("pattern length must equal the chain length")
        if self.mode not in ADAPTIVITY_MODES:
            raise ValueError(f"unknown adaptivity mode {self.mode!r}")
        if self.sites[-1].kind != "output":
            raise ValueError("the last site must be the output-tomography site")
        if any(s.kind == "output" for s in self.sites[:-1]):
            raise ValueError("only the last site may be the output site")
        for i, s in enumerate(self.sites[:-1], start=1):
            if s.kind == "rotated" and not 2 <= i <= self.n - 1:
                raise ValueError("rotated sites must lie in the bulk")

    @property
    def rotated_sites(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.sites, start=1) if s.kind == "rotated")


def make_pattern(n: int, rotations: dict[int, float], theta: float = 0.0,
                 mode: str = "adaptive",
                 post_select_sites: tuple[int, ...] | None = None) -> MeasurementPattern:
    """Pattern with wire measurements everywhere except the given rotated sites.

    In post_selected mode the default accepted set is every even wire site
    below the last rotated site: these are exactly the outcomes that would
    flip rotation signs (relative or global), so accepting only +1 there
    reproduces the adaptive protocol without feedforward.
    """
    entries = []
    for i in range(1, n):
        if i in rotations:
            entries.append(PatternSite("rotated", float(rotations[i])))
        else:
            entries.append(PatternSite("wire"))
    entries.append(PatternSite("output"))
    if post_select_sites is None:
        rot = sorted(rotations)
        if mode == "post_selected" and rot:
            post_select_sites = tuple(
                j for j in range(2, rot[-1]) if j % 2 == 0 and j not in rotations)
        else:
            post_select_sites = ()
    return MeasurementPattern(n, tuple(entries), float(theta), mode,
                              tuple(post_select_sites))


def deformed_observable(theta: float, base: np.ndarray) -> Observable1Q:
    """Eigen-decomposition of M†(theta) O M(theta) for a +/-1 observable O.

    The +1-labelled eigenvector is the one continuously connected to the +1
    eigenvector of O at theta = 0; for these observables it always carries the
    larger (nonnegative) eigenvalue.
    """
    base = np.asarray(base, dtype=complex)
    if not np.allclose(base, base.conj().T, atol=1e-12):
        raise ValueError("base observable must be Hermitian")
    m = m_theta(theta)
    a = m.conj().T @ base @ m
    obs = Observable1Q.from_hermitian(a)
    if obs.degenerate:
        warnings.warn("deformed observable is degenerate; outcomes carry no weight",
                      stacklevel=2)
    return obs


def rotated_base(beta: float) -> np.ndarray:
    """Measurement operator cos(beta) X - sin(beta) Y."""
    return np.cos(beta) * PAULI_MATRICES["X"] - np.sin(beta) * PAULI_MATRICES["Y"]


def _site_observable(pattern: MeasurementPattern, site: int, flip: bool) -> Observable1Q:
    entry = pattern.sites[site - 1]
    if entry.kind == "wire":
        base = PAULI_MATRICES["X"]
    else:
        beta = -entry.beta if flip else entry.beta
        base = rotated_base(beta)
    deformed = pattern.theta != 0.0 and 2 <= site <= pattern.n - 1
    if not deformed:
        if entry.kind == "wire":
            return sv.X_OBSERVABLE
        return Observable1Q.from_hermitian(base)
    return deformed_observable(pattern.theta, base)


def _flip_parity(outcomes: list[int], site: int) -> bool:
    """True when the accumulated X byproduct at `site` is odd."""
    par = 1
    for j in range(1, site):
        if (site - j) % 2 == 1:
            par *= outcomes[j - 1]
    return par == -1


@dataclass
class BranchTable:
    """Exhaustive outcome branches of a pattern on one resource state."""

    outcomes: np.ndarray  # (n_branches, n-1), entries +/-1
    prob: np.ndarray  # Born probability of each branch
    weight: np.ndarray  # product of |eigenvalue| over deformed sites
    bloch: np.ndarray  # (n_branches, 3) Bloch vector of the residual output qubit
    accepted: np.ndarray  # post-selection flag

    @property
    def n_branches(self) -> int:
        return len(self.prob)

    def parity(self, mask: np.ndarray) -> np.ndarray:
        """Byproduct sign per branch for a 0/1 exponent mask over sites 1..n-1."""
        cols = self.outcomes[:, mask.astype(bool)]
        return np.prod(cols, axis=1) if cols.shape[1] else np.ones(self.n_branches)


def parity_mask(pattern: MeasurementPattern, axis: str) -> np.ndarray:
    """Sign exponent (mod 2) per measured site for the given readout axis.

    A Z byproduct (odd-site parity) flips both readouts' sign reference; an X
    byproduct (even-site parity) additionally flips Y. Without adaptive basis
    flips, branches whose flip parity at a rotated site is odd realize the
    conjugate rotation, and their Y readout must be negated in post-processing;
    that folds into the per-site exponents as one extra unit for every earlier
    site at odd distance from each rotated site.
    """
    n = pattern.n
    if axis == "X":
        exps = [(1 if j % 2 == 1 else 0) for j in range(1, n)]
        return np.array(exps)
    exps = [1] * (n - 1)
    if pattern.mode != "adaptive":
        for i in pattern.rotated_sites:
            for j in range(1, i):
                if (i - j) % 2 == 1:
                    exps[j - 1] += 1
    return np.array(exps) % 2


def enumerate_branches(resource: StateVector, pattern: MeasurementPattern) -> BranchTable:
    if resource.n_qubits != pattern.n:
        raise ValueError("resource size does not match pattern")
    n = pattern.n
    # (state, prob, weight, outcomes) tuples; states stay unnormalized relative
    # to the resource so probabilities are read off the norm at the leaves.
    start = resource.copy()
    frontier = [(start, 1.0, [])]
    denom = float(np.vdot(resource.amplitudes, resource.amplitudes).real)
    for site in range(1, n):
        entry = pattern.sites[site - 1]
        nxt = []
        for state, weight, outcomes in frontier:
            flip = (pattern.mode == "adaptive" and entry.kind == "rotated"
                    and _flip_parity(outcomes, site))
            obs = _site_observable(pattern, site, flip)
            plus, minus, _, _ = state.branch_1q(site, obs)
            deformed = pattern.theta != 0.0 and 2 <= site <= n - 1
            for branch, outcome, val in ((plus, 1, obs.val_plus),
                                         (minus, -1, obs.val_minus)):
                if branch.norm_sq / denom < 1e-15:
                    continue
                w = weight * (abs(val) if deformed else 1.0)
                nxt.append((branch, w, outcomes + [outcome]))
        frontier = nxt
    out_rows, probs, weights, blochs, accepted = [], [], [], [], []
    ps = set(pattern.post_select_sites) if pattern.mode == "post_selected" else set()
    for state, weight, outcomes in frontier:
        p = state.norm_sq / denom
        r = state.amplitudes.reshape(2, -1)
        rho = r @ r.conj().T
        rho /= np.trace(rho).real
        bloch = [float(np.trace(PAULI_MATRICES[c] @ rho).real) for c in "XYZ"]
        ok = all(outcomes[j - 1] == 1 for j in ps)
        out_rows.append(outcomes)
        probs.append(p)
        weights.append(weight)
        blochs.append(bloch)
        accepted.append(ok)
    return BranchTable(np.array(out_rows), np.array(probs), np.array(weights),
                       np.array(blochs), np.array(accepted))


@dataclass
class ShotBatch:
    """Sampled readout of one tomography axis, stored per (branch, outcome) cell."""

    values: np.ndarray  # estimator value of each cell
    counts: np.ndarray  # multinomial counts
    accepted: np.ndarray  # post-selection flag per cell

    @property
    def shots(self) -> int:
        return int(self.counts.sum())

    def mean_stderr(self) -> tuple[float, float]:
        counts = self.counts[self.accepted]
        values = self.values[self.accepted]
        total = counts.sum()
        if total == 0:
            raise ValueError("no accepted shots")
        mean = float(np.dot(counts, values) / total)
        var = float(np.dot(counts, (values - mean) ** 2) / total)
        stderr = np.sqrt(var / total) if total > 1 else np.inf
        return mean, float(stderr)


@dataclass
class RunResult:
    pattern: MeasurementPattern
    branches: BranchTable
    batch_x: ShotBatch | None
    batch_y: ShotBatch | None
    metadata: dict = field(default_factory=dict)

    def exact_expectation(self, axis: str) -> float:
        """Shot-free estimator value: the exact average over all branches."""
        t = self.branches
        parity = t.parity(parity_mask(self.pattern, axis))
        sign = Y_SIGN_CONVENTION if axis == "Y" else 1.0
        comp = t.bloch[:, 0] if axis == "X" else t.bloch[:, 1]
        sel = t.accepted
        denom = t.prob[sel].sum()
        num = np.sum(t.prob[sel] * t.weight[sel] * parity[sel] * comp[sel])
        return float(sign * num / denom)

    def accepted_fraction(self) -> float:
        return float(self.branches.prob[self.branches.accepted].sum())


def _sample_axis(table: BranchTable, pattern: MeasurementPattern, axis: str,
                 shots: int, rng: np.random.Generator) -> ShotBatch:
    comp = table.bloch[:, 0] if axis == "X" else table.bloch[:, 1]
    comp = np.clip(comp, -1.0, 1.0)
    parity = table.parity(parity_mask(pattern, axis))
    sign = Y_SIGN_CONVENTION if axis == "Y" else 1.0
    p_cells = np.concatenate([table.prob * (1 + comp) / 2, table.prob * (1 - comp) / 2])
    values = np.concatenate([sign * table.weight * parity,
                             -sign * table.weight * parity])
    accepted = np.concatenate([table.accepted, table.accepted])
    p_cells = np.clip(p_cells, 0.0, None)
    p_cells /= p_cells.sum()
    counts = rng.multinomial(shots, p_cells)
    return ShotBatch(values, counts, accepted)


def run_pattern(resource: StateVector, pattern: MeasurementPattern,
                shots: int | None, rng: np.random.Generator | None = None) -> RunResult:
    """Execute a pattern; exact branch enumeration plus optional shot sampling.

    With shots=None only the exact expectations are available. Otherwise each
    tomography axis receives its own batch of `shots` samples, as on hardware.
    """
    table = enumerate_branches(resource, pattern)
    if not table.accepted.any():
        raise ValueError("post-selection rejected every branch")
    batch_x = batch_y = None
    if shots is not None:
        if rng is None:
            raise ValueError("shot sampling requires an RNG")
        batch_x = _sample_axis(table, pattern, "X", shots, rng)
        batch_y = _sample_axis(table, pattern, "Y", shots, rng)
    meta = {"y_sign_convention": Y_SIGN_CONVENTION, "mode": pattern.mode,
            "post_select_sites": pattern.post_select_sites}
    return RunResult(pattern, table, batch_x, batch_y, meta)


@dataclass
class Tomography:
    exp_x: float
    exp_y: float
    err_x: float
    err_y: float
    accepted_fraction: float


def logical_tomography(result: RunResult) -> Tomography:
    """Logical (<X>, <Y>) with standard errors from the sampled batches.

    Falls back to the exact branch average when the run was shot-free (errors
    are then zero).
    """
    frac = result.accepted_fraction()
    if result.batch_x is None:
        return Tomography(result.exact_expectation("X"), result.exact_expectation("Y"),
                          0.0, 0.0, frac)
    ex, sx = result.batch_x.mean_stderr()
    ey, sy = result.batch_y.mean_stderr()
    return Tomography(ex, ey, sx, sy, frac)


def purity_loss(exp_x: float, exp_y: float) -> float:
    """Logical purity loss (1 - <X>^2 - <Y>^2)/2 for an XY-plane state."""
    clipped = []
    for v in (exp_x, exp_y):
        if abs(v) > 1.0 + 1e-6:
            warnings.warn(f"expectation {v} clipped to [-1, 1]", stacklevel=2)
        clipped.append(min(1.0, max(-1.0, v)))
    ex, ey = clipped
    return 0.5 * (1.0 - ex ** 2 - ey ** 2)


def flip_group_ids(table: BranchTable, pattern: MeasurementPattern) -> np.ndarray:
    """Index of each branch's rotation-flip pattern.

    Bit r of the index is set when the flip parity at the r-th rotated site is
    odd. Branches in one group realize a common logical channel up to global
    conjugation, so purity loss may be averaged group-wise without adaptivity.
    """
    ids = np.zeros(table.n_branches, dtype=int)
    for r, i in enumerate(pattern.rotated_sites):
        js = [j for j in range(1, i) if (i - j) % 2 == 1]
        if not js:
            continue
        par = np.prod(table.outcomes[:, [j - 1 for j in js]], axis=1)
        ids |= (par == -1).astype(int) << r
    return ids


def grouped_purity_loss(result: RunResult) -> tuple[float, float]:
    """Purity loss averaged over rotation-flip groups; (value, stderr).

    Within a group the readout sign corrections are constant, and the group's
    purity loss is flip-invariant on uncorrelated resources, so this recovers
    the adaptive-protocol purity loss without adaptive measurements. Valid
    only when the deformation lives in the resource state (pattern theta = 0):
    conditional statistics do not carry over through eigenvalue reweighting.
    """
    if result.pattern.theta != 0.0:
        raise ValueError("grouped purity loss requires the deformation in the resource")
    table = result.branches
    ids = flip_group_ids(table, result.pattern)
    if result.batch_x is None:
        par_x = table.parity(parity_mask(result.pattern, "X"))
        par_y = table.parity(parity_mask(result.pattern, "Y"))
        lp_sum = w_sum = 0.0
        for g in np.unique(ids[table.accepted]):
            sel = (ids == g) & table.accepted
            pw = table.prob[sel].sum()
            ex = np.sum(table.prob[sel] * table.weight[sel] * par_x[sel]
                        * table.bloch[sel, 0]) / pw
            ey = np.sum(table.prob[sel] * table.weight[sel] * par_y[sel]
                        * table.bloch[sel, 1]) / pw
            lp_sum += pw * purity_loss(ex, ey)
            w_sum += pw
        return float(lp_sum / w_sum), 0.0
    cell_ids = np.concatenate([ids, ids])
    lp_vals, weights, lp_vars = [], [], []
    for g in np.unique(cell_ids):
        means = []
        variances = []
        total = 0
        for batch in (result.batch_x, result.batch_y):
            sel = (cell_ids == g) & batch.accepted
            counts, values = batch.counts[sel], batch.values[sel]
            tot = counts.sum()
            if tot == 0:
                means = None
                break
            mean = np.dot(counts, values) / tot
            var = np.dot(counts, (values - mean) ** 2) / tot / max(tot, 1)
            means.append(mean)
            variances.append(var)
            total += tot
        if means is None:
            continue
        ex, ey = means
        lp_vals.append(purity_loss(ex, ey))
        lp_vars.append(ex * ex * variances[0] + ey * ey * variances[1])
        weights.append(total)
    weights = np.array(weights, dtype=float)
    weights /= weights.sum()
    lp = float(np.dot(weights, lp_vals))
    err = float(np.sqrt(np.dot(weights ** 2, lp_vars)))
    return lp, err


_INPUTS = {
    "zero": np.array([1.0, 0.0], dtype=complex),
    "one": np.array([0.0, 1.0], dtype=complex),
    "plus": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0),
    "plus_i": np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2.0),
}


def extract_logical_channel(resource: StateVector,
                            pattern: MeasurementPattern) -> PauliTransferMatrix:
    """Brute-force PTM of the logical channel realized by the pattern.

    Valid for cluster-derived resources whose first site is touched only by
    diagonal gates after the |+> preparation: the logical input is then
    injected by the (commuting) diagonal map diag(sqrt2 a, sqrt2 b) on site 1.
    Outcome branches are enumerated exactly; byproducts are undone by explicit
    Pauli conjugation of the residual output qubit.

    Patterns with a nonzero deformation angle reweight outcomes with an
    input-dependent normalization, so the result would not be a channel; put
    the deformation in the resource instead and keep the pattern at theta=0.
    """
    if pattern.theta != 0.0:
        raise ValueError("channel extraction needs the deformation in the "
                         "resource (pattern theta must be 0)")
    n = resource.n_qubits
    if n > 11:
        raise ValueError("exhaustive branch extraction limited to n <= 11")
    rho_out = {}
    for name, amps in _INPUTS.items():
        injected = resource.copy()
        d = np.sqrt(2.0) * np.diag(amps)
        injected.apply_matrix_1q(1, d)
        table = enumerate_branches(injected, pattern)
        rho = np.zeros((2, 2), dtype=complex)
        x_mat, z_mat = PAULI_MATRICES["X"], PAULI_MATRICES["Z"]
        for b in range(table.n_branches):
            s = table.outcomes[b]
            zpar = int(np.prod(s[::2]))
            xpar = int(np.prod(s[1::2]))
            rb = _bloch_to_rho(table.bloch[b])
            corr = np.eye(2, dtype=complex)
            if zpar == -1:
                corr = z_mat @ corr
            if xpar == -1:
                corr = x_mat @ corr
            rb = corr @ rb @ corr.conj().T
            rho += table.prob[b] * table.weight[b] * rb
        rho_out[name] = rho
    lam = {
        "I": rho_out["zero"] + rho_out["one"],
        "Z": rho_out["zero"] - rho_out["one"],
    }
    lam["X"] = 2 * rho_out["plus"] - lam["I"]
    lam["Y"] = 2 * rho_out["plus_i"] - lam["I"]
    mat = np.zeros((4, 4))
    letters = "IXYZ"
    for a in range(4):
        for b in range(4):
            val = 0.5 * np.trace(PAULI_MATRICES[letters[a]] @ lam[letters[b]])
            mat[a, b] = val.real
    return PauliTransferMatrix(mat)


def _bloch_to_rho(bloch: np.ndarray) -> np.ndarray:
    rho = 0.5 * np.eye(2, dtype=complex)
    for c, comp in zip("XYZ", bloch):
        rho += 0.5 * comp * PAULI_MATRICES[c]
    return rho


def estimator_product_ops(pattern: MeasurementPattern, axis: str) -> dict[int, np.ndarray]:
    """Per-site operator whose product expectation equals the logical estimator.

    Mask (signed) sites carry the deformed observable itself; unmasked sites
    carry its absolute value; post-selected sites carry the +1 projector. Only
    valid without adaptive flips (sign_agnostic or post_selected modes).
    """
    if pattern.mode == "adaptive":
        raise ValueError("product-operator estimator requires a non-adaptive mode")
    n = pattern.n
    ps = set(pattern.post_select_sites) if pattern.mode == "post_selected" else set()
    mask = parity_mask(pattern, axis)
    ops: dict[int, np.ndarray] = {}
    for site in range(1, n):
        entry = pattern.sites[site - 1]
        base = PAULI_MATRICES["X"] if entry.kind == "wire" else rotated_base(entry.beta)
        deformed = pattern.theta != 0.0 and 2 <= site <= n - 1
        a = m_theta(pattern.theta).conj().T @ base @ m_theta(pattern.theta) \
            if deformed else base
        masked = bool(mask[site - 1])
        if site in ps:
            # accepted outcome is +1, so the site contributes its projector
            ops[site] = 0.5 * (np.eye(2) + base)
        elif masked:
            ops[site] = a
        else:
            if deformed:
                vals, vecs = np.linalg.eigh(a)
                ops[site] = (vecs * np.abs(vals)) @ vecs.conj().T
            else:
                continue  # identity
    sign = Y_SIGN_CONVENTION if axis == "Y" else 1.0
    ops[n] = sign * PAULI_MATRICES[axis]
    return ops


def post_select_projector_ops(pattern: MeasurementPattern) -> dict[int, np.ndarray]:
    ops = {}
    for site in pattern.post_select_sites:
        base = PAULI_MATRICES["X"]
        ops[site] = 0.5 * (np.eye(2) + base)
    return ops


def expect_product(state: StateVector, ops: dict[int, np.ndarray]) -> float:
    """<psi| prod_i O_i |psi> / <psi|psi> for a product of single-site operators."""
    work = state.amplitudes
    for site, m in ops.items():
        v = work.reshape(-1, 2, 2 ** (site - 1))
        work = np.einsum("ab,xbl->xal", np.asarray(m, dtype=complex), v).reshape(-1)
    val = np.vdot(state.amplitudes, work)
    denom = float(np.vdot(state.amplitudes, state.amplitudes).real)
    return float(val.real / denom)
