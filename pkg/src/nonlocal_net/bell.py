"""Bell tests on X-form and dense states.

Three detectors are supported:

* CHSH through the correlation-matrix criterion: a two-qubit state violates
  iff the sum M of the two largest eigenvalues of T^T T exceeds 1, where
  T_ij = Tr[rho sigma_i x sigma_j].
* The recursive two-setting multipartite inequality (quantum bound
  2^{(n-1)/2}).  Its closed operator form for the settings used throughout is
  2^{(n-1)/2} (e^{i beta_n} |0><1|^n + h.c.) with beta_n = pi / (4n - 4); on an
  X-form state the expectation is 2^{(n-1)/2} * 2 * Re(e^{-i beta_n} c).
* The continuous-settings (functional) inequality, comparing the norm of the
  quantum correlation function against the Schwartz bound on its overlap with
  any local-hidden-variable correlation.  For X-form states the correlation
  is a pure cosine of the summed setting angles, so the norm integral is
  closed form: |C|^2 = A^2 (2 pi)^n / 2 with amplitude A = 2|c|.

Localizable nonlocality averages the branch values of one detector over a
post-selected measurement ensemble; positive values certify nonlocality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .measurement import LocalSetting, OutcomeBranch
from .xstate import DenseState, XState

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

INEQUALITIES = ("chsh", "mbk", "fb")


def mbk_angle(n: int) -> float:
    """Phase beta_n = pi / (4n - 4) of the closed multipartite operator."""
    if n < 2:
        raise ValueError("the inequality needs at least two parties")
    return np.pi / (4 * n - 4)


@dataclass(frozen=True)
class ChshReport:
    M: float
    BV: float
    T: np.ndarray
    violating: bool


@dataclass(frozen=True)
class MbkReport:
    value: float
    beta: float
    violating: bool


@dataclass(frozen=True)
class FbReport:
    qm_norm: float
    lhv_bound: float
    violating: bool


def _correlation_matrix_xstate(state: XState) -> np.ndarray:
    c = state.offdiag
    d = state.diag
    tzz = float(d[0] - d[1] - d[2] + d[3])
    re, im = 2.0 * c.real, -2.0 * c.imag
    return np.array([[re, im, 0.0], [im, -re, 0.0], [0.0, 0.0, tzz]])


def _correlation_matrix_dense(state: DenseState) -> np.ndarray:
    m = state.matrix
    T = np.zeros((3, 3))
    for i, si in enumerate("xyz"):
        for j, sj in enumerate("xyz"):
            op = np.kron(PAULI[si], PAULI[sj])
            T[i, j] = float(np.trace(m @ op).real)
    return T


def chsh_report(state: XState | DenseState) -> ChshReport:
    """Correlation-matrix criterion for a two-qubit state."""
    if state.n != 2:
        raise ValueError("the two-setting bipartite test needs exactly 2 qubits")
    if isinstance(state, XState):
        # T^T T is diagonal here: eigenvalues (4|c|^2, 4|c|^2, Tzz^2) exactly.
        T = _correlation_matrix_xstate(state)
        c2 = 4.0 * abs(state.offdiag) ** 2
        t2 = T[2, 2] ** 2
        M = c2 + max(c2, t2)
    else:
        T = _correlation_matrix_dense(state)
        eigs = np.linalg.eigvalsh(T.T @ T)
        M = float(eigs[-1] + eigs[-2])
    return ChshReport(M=M, BV=M - 1.0, T=T, violating=M > 1.0)


def mbk_value(state: XState, optimal_phase: bool = False) -> MbkReport:
    """Expectation magnitude of the closed multipartite operator.

    With ``optimal_phase`` the free overall setting phase is absorbed,
    giving 2^{(n-1)/2} * 2 * |c|; otherwise the operator phase beta_n is kept,
    which is the quantity entering thresholds when no measured party can
    rotate it away.
    """
    if state.n < 2:
        raise ValueError("the inequality needs at least two parties")
    beta = mbk_angle(state.n)
    amp = 2.0 ** ((state.n - 1) / 2.0)
    c = state.offdiag
    if optimal_phase:
        value = amp * 2.0 * abs(c)
    else:
        value = amp * 2.0 * abs((np.exp(-1j * beta) * c).real)
    return MbkReport(value=value, beta=beta, violating=value > 1.0)


def mbk_operator(n: int) -> np.ndarray:
    """Closed corner form 2^{(n-1)/2} (e^{i beta_n}|0..0><1..1| + h.c.)."""
    beta = mbk_angle(n)
    dim = 2**n
    op = np.zeros((dim, dim), dtype=complex)
    amp = 2.0 ** ((n - 1) / 2.0)
    op[0, dim - 1] = amp * np.exp(1j * beta)
    op[dim - 1, 0] = amp * np.exp(-1j * beta)
    return op


def _direction_operator(v: Sequence[float]) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError("measurement directions are 3-vectors")
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ValueError(f"direction must be a unit vector, got norm {np.linalg.norm(v)}")
    return v[0] * PAULI["x"] + v[1] * PAULI["y"] + v[2] * PAULI["z"]


def mbk_recursive_operator(
    n: int, settings: Sequence[tuple[Sequence[float], Sequence[float]]]
) -> np.ndarray:
    """Build the Bell operator from its two-setting recursion.

    ``settings[k]`` holds the pair of Bloch directions of party k.  The
    recursion is B_k = (B_{k-1} (s_k + s'_k) + B'_{k-1} (s_k - s'_k)) / 2 with
    B' the all-primed twin and B_1 = s_1.
    """
    if n < 2:
        raise ValueError("the recursion needs at least two parties")
    if len(settings) != n:
        raise ValueError(f"expected {n} setting pairs, got {len(settings)}")
    a, ap = settings[0]
    b = _direction_operator(a)
    bp = _direction_operator(ap)
    for a, ap in settings[1:]:
        s = _direction_operator(a)
        sp = _direction_operator(ap)
        splus, sminus = s + sp, s - sp
        b, bp = (
            0.5 * (np.kron(b, splus) + np.kron(bp, sminus)),
            0.5 * (np.kron(bp, splus) - np.kron(b, sminus)),
        )
    return b


def mbk_phase_settings(
    n: int, corner_phase: float = 0.0
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Equatorial setting pairs whose recursion has a chosen corner phase.

    Each party measures two orthogonal equatorial directions (alpha,
    alpha + pi/2); the recursion then reaches the maximal corner magnitude
    2^{(n-1)/2} with phase -(n alpha + (n-1) pi/4), so alpha is solved to hit
    ``corner_phase``.
    """
    if n < 2:
        raise ValueError("the recursion needs at least two parties")
    alpha = -(corner_phase + (n - 1) * np.pi / 4.0) / n
    first = np.array([np.cos(alpha), np.sin(alpha), 0.0])
    second = np.array([-np.sin(alpha), np.cos(alpha), 0.0])
    return [(first, second)] * n


def mbk_canonical_settings(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Settings whose recursion reproduces :func:`mbk_operator` entrywise."""
    return mbk_phase_settings(n, mbk_angle(n))


def _live_branches(branches: Sequence[OutcomeBranch]) -> list[OutcomeBranch]:
    live = [b for b in branches if b.state is not None]
    if not live:
        raise ValueError("all branches have zero measure")
    return live


def fb_report(branches: Sequence[OutcomeBranch], collaborative: bool) -> FbReport:
    """Continuous-settings test on a branch ensemble.

    Per branch: amplitude A_i = 2|c_i| and quantum norm A_i^2 (2 pi)^n / 2.
    The hidden-variable side is bounded by (sum_i p_i A_i) * 4^n * kappa with
    kappa = sqrt(2) when collaborating parties measured (their phases enter
    the overlap bound) and kappa = 1 otherwise.
    """
    live = _live_branches(branches)
    n = live[0].state.n
    if any(b.state.n != n for b in live):
        raise ValueError("branches carry different qubit counts")
    probs = np.array([b.probability for b in live])
    amps = np.array([2.0 * abs(b.state.offdiag) for b in live])
    qm = float(np.sum(probs * amps**2) * (2.0 * np.pi) ** n / 2.0)
    kappa = np.sqrt(2.0) if collaborative else 1.0
    lhv = float(np.sum(probs * amps) * 4.0**n * kappa)
    return FbReport(qm_norm=qm, lhv_bound=lhv, violating=qm > lhv)


def lnl(
    branches: Sequence[OutcomeBranch],
    inequality: str,
    *,
    collaborative: bool | None = None,
    optimal_phase: bool = False,
) -> float:
    """Localizable nonlocality of a branch ensemble under one detector.

    chsh: sum_i p_i (M_i - 1); mbk: sum_i p_i |<B_n>_i| - 1;
    fb: qm_norm - lhv_bound.  ``collaborative`` defaults to whether any site
    was actually measured (branch sign patterns are non-empty).
    """
    ineq = inequality.lower()
    if ineq not in INEQUALITIES:
        raise ValueError(f"unknown inequality {inequality!r}")
    live = _live_branches(branches)
    if collaborative is None:
        collaborative = len(branches[0].outcome_signs) > 0
    if ineq == "chsh":
        return float(
            sum(b.probability * chsh_report(b.state).BV for b in live)
        )
    if ineq == "mbk":
        return float(
            sum(b.probability * mbk_value(b.state, optimal_phase).value for b in live)
            - 1.0
        )
    report = fb_report(branches, collaborative)
    return report.qm_norm - report.lhv_bound


def optimal_settings(inequality: str, n_out: int, m: int) -> list[LocalSetting]:
    """Equatorial settings that maximize the branch average analytically.

    theta = pi/2 everywhere; for the two-setting multipartite detector the
    summed phase must equal beta of the residual party count, carried here by
    the first measured site.
    """
    ineq = inequality.lower()
    if ineq not in INEQUALITIES:
        raise ValueError(f"unknown inequality {inequality!r}")
    if m == 0:
        return []
    phis = [0.0] * m
    if ineq == "mbk":
        phis[0] = mbk_angle(n_out)
    return [LocalSetting(np.pi / 2, phi) for phi in phis]
