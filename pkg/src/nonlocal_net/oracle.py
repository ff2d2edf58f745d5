"""Brute-force dense-matrix simulator: the ground truth for every closed form.

Everything here works on full 2^n x 2^n matrices and never takes the X-form
shortcut: noisy pairs are tensored together, node collapses are explicit
projections onto GHZ-basis vectors (with the conditional bit-flip correction
applied to the surviving qubits), local measurements are rank-1 projections,
and Bell quantities are read off the resulting matrices.

Chains are processed node by node, contracting each node's qubits right after
its collapse, which keeps the live register at (surviving sites) + a + 1
qubits instead of all 2(z(a-1)+1).
"""

from __future__ import annotations

import os
import string
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import itertools

import numpy as np

from . import bell
from .measurement import LocalSetting, ghz_ket, _parse_ghz_outcome
from .thresholds import ChainSpec
from .xstate import DenseState, werner_corner_dense, xstate_to_dense

ENV_MAX_QUBITS = "NONLOCAL_NET_MAX_QUBITS"
HARD_MAX_QUBITS = 12
ZERO_BRANCH_TOL = 1e-15

_LETTERS = string.ascii_letters


class CapacityError(RuntimeError):
    """An instance exceeds the configured dense-simulation capacity."""


@dataclass(frozen=True)
class OracleConfig:
    max_qubits: int = 10
    tolerance: float = 1e-12

    def __post_init__(self):
        if not 2 <= self.max_qubits <= HARD_MAX_QUBITS:
            raise ValueError(f"max_qubits must lie in [2, {HARD_MAX_QUBITS}]")


def default_config() -> OracleConfig:
    """Config with the cap taken from NONLOCAL_NET_MAX_QUBITS when set."""
    raw = os.environ.get(ENV_MAX_QUBITS)
    return OracleConfig(max_qubits=int(raw)) if raw else OracleConfig()


def _require_capacity(n: int, config: OracleConfig | None) -> OracleConfig:
    config = config or default_config()
    if n > config.max_qubits:
        raise CapacityError(f"{n} qubits exceed the cap of {config.max_qubits}")
    return config


def tensor(states: Sequence[DenseState], config: OracleConfig | None = None) -> DenseState:
    """Kronecker product of the given states in declared qubit order."""
    if not states:
        raise ValueError("nothing to tensor")
    total = sum(s.n for s in states)
    _require_capacity(total, config)
    matrix = reduce(np.kron, (s.matrix for s in states))
    return DenseState(total, matrix)


def project(
    state: DenseState, qubits: Sequence[int], ket: np.ndarray
) -> tuple[float, DenseState | None]:
    """Project a qubit subset onto a pure vector and contract it out.

    Returns (probability, residual state on the remaining qubits in their
    original order); (prob, None) signals a zero-measure branch.
    """
    n = state.n
    qubits = [int(q) for q in qubits]
    if len(set(qubits)) != len(qubits) or not all(0 <= q < n for q in qubits):
        raise ValueError("projection qubits must be distinct and in range")
    k = len(qubits)
    psi = np.asarray(ket, dtype=complex).reshape((2,) * k)
    if abs(np.vdot(psi, psi) - 1.0) > 1e-12:
        raise ValueError("projection vector must be normalized")
    rho = state.matrix.reshape((2,) * (2 * n))
    row = _LETTERS[:n]
    col = _LETTERS[n : 2 * n]
    bra = "".join(row[q] for q in qubits)
    ketl = "".join(col[q] for q in qubits)
    keep_r = "".join(row[q] for q in range(n) if q not in qubits)
    keep_c = "".join(col[q] for q in range(n) if q not in qubits)
    sub = np.einsum(f"{bra},{row + col},{ketl}->{keep_r}{keep_c}", psi.conj(), rho, psi)
    r = n - k
    sub = sub.reshape(2**r, 2**r) if r else sub.reshape(1, 1)
    prob = float(sub.trace().real)
    if prob < ZERO_BRANCH_TOL:
        return max(prob, 0.0), None
    return prob, DenseState(r, sub / prob) if r else None


def partial_trace(state: DenseState, qubits: Sequence[int]) -> DenseState:
    """Trace out the given qubits."""
    n = state.n
    qubits = sorted(set(int(q) for q in qubits))
    if not all(0 <= q < n for q in qubits):
        raise ValueError("qubits out of range")
    if len(qubits) >= n:
        raise ValueError("at least one qubit must remain")
    rho = state.matrix.reshape((2,) * (2 * n))
    row = list(_LETTERS[:n])
    col = list(_LETTERS[n : 2 * n])
    for q in qubits:
        col[q] = row[q]
    keep_r = "".join(row[q] for q in range(n) if q not in qubits)
    keep_c = "".join(col[q] for q in range(n) if q not in qubits)
    sub = np.einsum(f"{''.join(row + col)}->{keep_r}{keep_c}", rho)
    r = n - len(qubits)
    return DenseState(r, sub.reshape(2**r, 2**r))


def apply_bitflips(state: DenseState, qubits: Sequence[int]) -> DenseState:
    """Conjugate by sigma_x on the given qubits (a basis relabeling)."""
    qubits = sorted(set(int(q) for q in qubits))
    if not qubits:
        return state
    rho = state.matrix.reshape((2,) * (2 * state.n))
    axes = tuple(qubits) + tuple(state.n + q for q in qubits)
    flipped = np.flip(rho, axis=axes)
    return DenseState(state.n, flipped.reshape(state.matrix.shape))


def _ghz_project_with_correction(
    state: DenseState,
    node_qubits: Sequence[int],
    flip_groups: Sequence[Sequence[int]],
    outcome_index: int,
) -> tuple[float, DenseState | None]:
    """GHZ-project node qubits, then flip each group whose node bit read 1.

    ``flip_groups[t]`` lists the post-contraction indices of the qubits that
    belonged to the same input as node qubit t.
    """
    k = len(node_qubits)
    bits, _ = _parse_ghz_outcome(k, outcome_index)
    prob, post = project(state, node_qubits, ghz_ket(k, outcome_index))
    if post is None:
        return prob, None
    flips = [q for t, group in enumerate(flip_groups) if bits[t] for q in group]
    return prob, apply_bitflips(post, flips)


def star_collapse_dense(
    p: float, n_parties: int, outcome_index: int = 0, config: OracleConfig | None = None
) -> tuple[float, DenseState | None]:
    """Dense counterpart of the star node collapse, corrections included."""
    if n_parties < 2:
        raise ValueError("a joint collapse needs at least two pairs")
    pairs = [werner_corner_dense(p)] * n_parties
    rho = tensor(pairs, config)
    node = [2 * j for j in range(n_parties)]
    groups = [[j] for j in range(n_parties)]  # outer qubit of pair j after contraction
    return _ghz_project_with_correction(rho, node, groups, outcome_index)


def chain_collapse_dense(
    p: float,
    z: int,
    a: int,
    outcomes: Sequence[int] | None = None,
    config: OracleConfig | None = None,
) -> tuple[float, DenseState | None]:
    """Dense chain collapse, one node at a time (staged contraction)."""
    if z < 1 or a < 2:
        raise ValueError("need z >= 1 and a >= 2")
    if outcomes is None:
        outcomes = [0] * z
    outcomes = list(outcomes)
    if len(outcomes) != z:
        raise ValueError("need one outcome index per node")
    pair = werner_corner_dense(p)
    state: DenseState | None = None
    total_prob = 1.0
    for node in range(z):
        if z == 1:
            leaves = a
        elif node in (0, z - 1):
            leaves = a - 1
        else:
            leaves = a - 2
        fresh = leaves + (1 if node < z - 1 else 0)
        parts = ([state] if state is not None else []) + [pair] * fresh
        rho = tensor(parts, config)
        base = state.n if state is not None else 0
        # Fresh pair t occupies (base + 2t, base + 2t + 1): node half first.
        node_qubits = ([base - 1] if state is not None else []) + [
            base + 2 * t for t in range(fresh)
        ]
        # Survivor indices after contraction: prior sites, then fresh far halves.
        prior = list(range(base - 1)) if state is not None else []
        flip_groups = ([prior] if state is not None else []) + [
            [len(prior) + t] for t in range(fresh)
        ]
        prob, state = _ghz_project_with_correction(
            rho, node_qubits, flip_groups, outcomes[node]
        )
        total_prob *= prob
        if state is None:
            return 0.0, None
    return total_prob, state


def local_branches_dense(
    state: DenseState,
    sites: Sequence[int],
    settings: LocalSetting | Sequence[LocalSetting],
) -> list[tuple[tuple[int, ...], float, DenseState | None]]:
    """All 2^m sign branches of local measurements, dense projections only."""
    sites = [int(s) for s in sites]
    m = len(sites)
    if isinstance(settings, LocalSetting):
        settings = [settings] * m
    settings = list(settings)
    if len(settings) != m:
        raise ValueError(f"expected {m} settings, got {len(settings)}")
    if m == 0:
        return [((), 1.0, state)]
    order = sorted(range(m), key=lambda t: sites[t], reverse=True)
    out = []
    for pattern in itertools.product((1, -1), repeat=m):
        cur: DenseState | None = state
        prob = 1.0
        for t in order:
            step, cur = project(cur, [sites[t]], settings[t].ket(pattern[t]))
            prob *= step
            if cur is None:
                prob = 0.0
                break
        out.append((tuple(pattern), prob, cur))
    return out


def _antidiagonal(matrix: np.ndarray) -> np.ndarray:
    dim = matrix.shape[0]
    idx = np.arange(dim)
    return matrix[idx, dim - 1 - idx]


def dense_fb_quantities(state: DenseState) -> tuple[float, float]:
    """(||C_QM||^2, amplitude) of the continuous-settings correlation.

    For equatorial observables the correlation is a trigonometric polynomial
    whose squared norm integrates exactly to (2 pi)^n * sum_b |rho_{b,~b}|^2
    (Parseval); the hidden-variable bound uses the extreme-corner amplitude.
    """
    n = state.n
    anti = _antidiagonal(state.matrix)
    qm = float((2.0 * np.pi) ** n * np.sum(np.abs(anti) ** 2))
    amplitude = 2.0 * abs(state.matrix[0, -1])
    return qm, amplitude


def dense_lnl(
    branches: Sequence[tuple[tuple[int, ...], float, DenseState | None]],
    inequality: str,
    collaborative: bool | None = None,
) -> float:
    """Branch-averaged Bell value from dense states, no X-form shortcut."""
    ineq = inequality.lower()
    live = [(s, p, st) for s, p, st in branches if st is not None]
    if not live:
        raise ValueError("all branches have zero measure")
    if collaborative is None:
        collaborative = len(branches[0][0]) > 0
    if ineq == "chsh":
        return float(sum(p * bell.chsh_report(st).BV for _, p, st in live))
    if ineq == "mbk":
        n = live[0][2].n
        op = bell.mbk_recursive_operator(n, bell.mbk_canonical_settings(n))
        return float(
            sum(p * abs(np.trace(op @ st.matrix)) for _, p, st in live) - 1.0
        )
    if ineq == "fb":
        n = live[0][2].n
        qm = amp_avg = 0.0
        for _, p, st in live:
            q, amp = dense_fb_quantities(st)
            qm += p * q
            amp_avg += p * amp
        kappa = np.sqrt(2.0) if collaborative else 1.0
        return qm - kappa * 4.0**n * amp_avg
    raise ValueError(f"unknown inequality {inequality!r}")


def oracle_star_lnl(
    p: float,
    n_parties: int,
    m: int,
    inequality: str,
    settings: LocalSetting | Sequence[LocalSetting] | None = None,
    outcome_index: int = 0,
    config: OracleConfig | None = None,
) -> float:
    """Full dense star protocol: collapse, measure m sites, average the test."""
    _, state = star_collapse_dense(p, n_parties, outcome_index, config)
    if settings is None:
        settings = bell.optimal_settings(inequality, n_parties - m, m)
    branches = local_branches_dense(state, list(range(m)), settings)
    return dense_lnl(branches, inequality)


def oracle_chain_lnl(
    p: float,
    spec: ChainSpec,
    inequality: str,
    measured_sites: Sequence[int] | None = None,
    settings: LocalSetting | Sequence[LocalSetting] | None = None,
    config: OracleConfig | None = None,
) -> float:
    """Full dense chain protocol for the given chain parameters."""
    _, state = chain_collapse_dense(p, spec.z, spec.a, None, config)
    if measured_sites is None:
        r = spec.residual_parties
        kept = {0} | set(range(spec.sites - (r - 1), spec.sites))
        measured_sites = [s for s in range(spec.sites) if s not in kept]
    if len(measured_sites) != spec.m:
        raise ValueError("measured-site count does not match the chain spec")
    if settings is None:
        settings = bell.optimal_settings(inequality, spec.residual_parties, spec.m)
    branches = local_branches_dense(state, measured_sites, settings)
    return dense_lnl(branches, inequality)


def oracle_lnl(
    network,
    p: float,
    inequality: str,
    settings: LocalSetting | Sequence[LocalSetting] | None = None,
    config: OracleConfig | None = None,
) -> float:
    """Dispatch on (n, m) star tuples, ChainSpec, or RoutePlan-like objects."""
    if isinstance(network, tuple) and len(network) == 2:
        n_parties, m = network
        return oracle_star_lnl(p, n_parties, m, inequality, settings, config=config)
    if isinstance(network, ChainSpec):
        return oracle_chain_lnl(p, network, inequality, settings=settings, config=config)
    if hasattr(network, "equivalent"):
        return oracle_chain_lnl(
            p,
            network.equivalent,
            inequality,
            measured_sites=list(network.local_sites),
            settings=settings,
            config=config,
        )
    raise TypeError(f"cannot interpret network spec {network!r}")


# ---------------------------------------------------------------------------
# Cross-validation suite (backs the CLI validate command)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_deviation: float
    passed: bool


def _branch_state_deviation(
    p: float, n_parties: int, m: int, settings, corrupt: bool, config
) -> float:
    from .measurement import measure_all, star_state

    fast = star_state(p, n_parties)
    fast_branches = measure_all(fast, list(range(m)), settings)
    _, dense0 = star_collapse_dense(p, n_parties, 0, config)
    dense_branches = local_branches_dense(dense0, list(range(m)), settings)
    worst = 0.0
    for fb, (signs, prob, st) in zip(fast_branches, dense_branches):
        assert fb.outcome_signs == signs
        worst = max(worst, abs(fb.probability - prob))
        if fb.state is not None and st is not None:
            ref = st.matrix.copy()
            if corrupt:
                ref[0, -1] += 1e-6
                ref[-1, 0] += 1e-6
            worst = max(worst, float(np.abs(xstate_to_dense(fb.state).matrix - ref).max()))
    return worst


def run_validation(
    scope: str = "all",
    config: OracleConfig | None = None,
    corrupt: bool = False,
    p_grid: Sequence[float] = (0.6, 0.9),
) -> list[CheckResult]:
    """Compare the X-form pipeline against dense recomputation.

    ``corrupt`` injects a deliberate corner error into one comparison so the
    reporting path can be exercised end to end.
    """
    from .measurement import ghz_collapse, measure_all

    config = config or default_config()
    tol = 1e-9
    results: list[CheckResult] = []

    def record(name: str, dev: float, tolerance: float = tol):
        results.append(CheckResult(name, float(dev), bool(dev <= tolerance)))

    if scope not in ("star", "chain", "all"):
        raise ValueError(f"unknown scope {scope!r}")

    if scope in ("star", "all"):
        n_max = min(config.max_qubits // 2, 4)
        dev = 0.0
        for n in range(2, n_max + 1):
            for p in p_grid:
                for outcome in range(2**n):
                    prob, state = ghz_collapse(p, n, outcome)
                    dprob, dstate = star_collapse_dense(p, n, outcome, config)
                    dev = max(dev, abs(prob - dprob))
                    dev = max(
                        dev,
                        float(
                            np.abs(xstate_to_dense(state).matrix - dstate.matrix).max()
                        ),
                    )
                    dev = max(dev, abs(prob - 0.5**n))
        record("star_collapse_matches_dense", dev)

        setting = LocalSetting(np.pi / 2, 0.7)
        dev = max(
            _branch_state_deviation(p, 4, 2, setting, corrupt, config) for p in p_grid
        )
        record("star_branches_match_dense", dev)

        dev = 0.0
        for p in p_grid:
            for ineq in ("chsh", "mbk", "fb"):
                fast = measure_all(
                    ghz_collapse(p, 3, 0)[1], [0], bell.optimal_settings(ineq, 2, 1)
                )
                dev = max(
                    dev,
                    abs(
                        bell.lnl(fast, ineq)
                        - oracle_star_lnl(p, 3, 1, ineq, config=config)
                    ),
                )
        record("star_lnl_matches_dense", dev)

    if scope in ("chain", "all"):
        from .measurement import chain_collapse

        dev = 0.0
        for p in p_grid:
            prob, state = chain_collapse(p, 2, 3)
            dprob, dstate = chain_collapse_dense(p, 2, 3, config=config)
            dev = max(dev, abs(prob - dprob))
            dev = max(
                dev, float(np.abs(xstate_to_dense(state).matrix - dstate.matrix).max())
            )
        record("chain_collapse_matches_dense", dev)

        spec = ChainSpec.default(2, 3)
        dev = 0.0
        for p in p_grid:
            for ineq in ("mbk", "fb"):
                fast_state = chain_collapse(p, 2, 3)[1]
                kept = {0} | set(range(spec.sites - spec.a + 1, spec.sites))
                sites = [s for s in range(spec.sites) if s not in kept]
                fast = measure_all(
                    fast_state, sites, bell.optimal_settings(ineq, spec.a, spec.m)
                )
                dev = max(
                    dev,
                    abs(bell.lnl(fast, ineq) - oracle_chain_lnl(p, spec, ineq, config=config)),
                )
        record("chain_lnl_matches_dense", dev)

    return results
