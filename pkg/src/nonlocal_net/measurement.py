"""Measurement primitives of the network protocol.

Two operations drive everything: a joint GHZ-basis measurement that fuses
several noisy pairs meeting at a node into one X-form state, and single-site
projective measurements (with post-selection) that shrink an X-form state by
one qubit per collaborating party.  Partial-trace discards model parties that
leave without measuring.

Local measurement directions are parameterized by Bloch angles: the outcome
kets of a setting (theta, phi) are

    |+> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>
    |-> = sin(theta/2)|0> - e^{i phi} cos(theta/2)|1>

so theta = pi/2 is the equatorial measurement that preserves the corner
coherence maximally.  With this convention, measuring m sites of a collapsed
star state leaves the corner at +- p^N e^{i sum(phi)} prod(sin theta) / (2 (1 - f_i))
with branch fraction f_i = 1 - 2^m p_i.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .xstate import XState, werner_corner

ZERO_BRANCH_TOL = 1e-15

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class LocalSetting:
    """Projective measurement direction for one site (Bloch angles)."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        if not -1e-12 <= theta <= np.pi / 2 + 1e-12:
            raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
        object.__setattr__(self, "theta", min(max(theta, 0.0), np.pi / 2))
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)

    def ket(self, sign: int) -> np.ndarray:
        """Outcome ket for sign = +1 or -1."""
        half = 0.5 * self.theta
        phase = np.exp(1j * self.phi)
        if sign == +1:
            return np.array([np.cos(half), phase * np.sin(half)], dtype=complex)
        if sign == -1:
            return np.array([np.sin(half), -phase * np.cos(half)], dtype=complex)
        raise ValueError("sign must be +1 or -1")


@dataclass(frozen=True)
class OutcomeBranch:
    """One post-selected branch: sign pattern, probability, residual state.

    ``state`` is None for zero-measure branches, which callers must skip.
    """

    outcome_signs: tuple[int, ...]
    probability: float
    state: XState | None


def _parse_ghz_outcome(k: int, outcome_index: int) -> tuple[list[int], int]:
    if not 0 <= outcome_index < 2**k:
        raise ValueError(f"outcome_index must lie in [0, {2**k}), got {outcome_index}")
    sign = +1 if outcome_index < 2 ** (k - 1) else -1
    pattern = outcome_index % (2 ** (k - 1)) if k > 1 else 0
    bits = [0] + [(pattern >> (k - 2 - t)) & 1 for t in range(k - 1)]
    return bits, sign


def ghz_ket(k: int, outcome_index: int = 0) -> np.ndarray:
    """The ``outcome_index``-th GHZ-basis vector (|x> + s|~x>)/sqrt(2) on k qubits.

    Indices 0 .. 2^(k-1)-1 carry the + sign, the rest the - sign; index 0 is
    the canonical (|0...0> + |1...1>)/sqrt(2).
    """
    bits, sign = _parse_ghz_outcome(k, outcome_index)
    ix = int("".join(map(str, bits)), 2)
    v = np.zeros(2**k, dtype=complex)
    v[ix] = 1.0 / np.sqrt(2.0)
    v[2**k - 1 - ix] = sign / np.sqrt(2.0)
    return v


def ghz_fuse(
    inputs: Sequence[tuple[XState, int]], outcome_index: int = 0
) -> tuple[float, XState | None]:
    """Jointly measure one designated qubit of each input in the GHZ basis.

    ``inputs`` is a sequence of (state, node_qubit_index) pairs.  Returns the
    outcome probability and the residual X-form state on the concatenation of
    every input's remaining qubits (input order preserved).  The residual is
    expressed after the standard conditional bit-flip correction on the
    remaining qubits of inputs whose node qubit read 1, which is what keeps
    the coherence on the extreme corners for every outcome.
    """
    k = len(inputs)
    if k < 1:
        raise ValueError("ghz_fuse needs at least one input")
    bits, sign = _parse_ghz_outcome(k, outcome_index)
    p_parts: list[np.ndarray] = []
    q_parts: list[np.ndarray] = []
    corner = 0.5 * complex(sign)
    for (state, site), bit in zip(inputs, bits):
        if not 0 <= site < state.n:
            raise ValueError(f"node qubit {site} out of range for {state.n}-qubit input")
        moved = np.moveaxis(state.diag.reshape((2,) * state.n), site, 0)
        lo = moved[0].reshape(-1)
        hi = moved[1].reshape(-1)
        if bit == 0:
            p_parts.append(lo)
            q_parts.append(hi)
            corner *= state.offdiag
        else:
            # Bit-flip correction: complement reindexing is a flat reversal.
            p_parts.append(hi[::-1])
            q_parts.append(lo[::-1])
            corner *= np.conjugate(state.offdiag)
    diag = 0.5 * (reduce(np.kron, p_parts) + reduce(np.kron, q_parts))
    prob = float(diag.sum())
    if prob < ZERO_BRANCH_TOL:
        return 0.0, None
    n_out = sum(state.n - 1 for state, _ in inputs)
    return prob, XState(n_out, diag / prob, corner / prob)


def ghz_collapse(p: float, n_parties: int, outcome_index: int = 0) -> tuple[float, XState]:
    """Collapse n identical noisy pairs meeting at one node (star geometry).

    Returns (probability, state on the n outer qubits).  For the canonical
    outcome the corner magnitude is p^n / 2; every outcome has probability
    2^-n, which the implementation computes rather than assumes.
    """
    if n_parties < 2:
        raise ValueError("a joint collapse needs at least two pairs")
    pair = werner_corner(p)
    prob, state = ghz_fuse([(pair, 0)] * n_parties, outcome_index)
    assert state is not None  # pair diagonals are strictly positive for p < 1
    return prob, state


def star_state(p: float, n_parties: int, outcome_index: int = 0) -> XState:
    """Residual state of :func:`ghz_collapse`, discarding the probability."""
    return ghz_collapse(p, n_parties, outcome_index)[1]


def chain_collapse(
    p: float, z: int, a: int, outcomes: Sequence[int] | None = None
) -> tuple[float, XState | None]:
    """Run all z node collapses of a 1D chain with coordination number a.

    Node k holds one qubit of each incident pair: a-1 dangling pairs at the
    two end nodes, a-2 at interior nodes, plus connector pairs between
    consecutive nodes (z=1 degenerates to the star).  Output qubits are
    ordered node-major; the state lives on z(a-2)+2 sites and its corner is
    +- p^(z(a-1)+1) / 2 for canonical outcomes.
    """
    if z < 1:
        raise ValueError("node count must be positive")
    if a < 2:
        raise ValueError("coordination number must be at least 2")
    if outcomes is None:
        outcomes = [0] * z
    outcomes = list(outcomes)
    if len(outcomes) != z:
        raise ValueError("need one outcome index per node")
    pair = werner_corner(p)
    state: XState | None = None
    prob = 1.0
    for node in range(z):
        if z == 1:
            leaves = a
        elif node in (0, z - 1):
            leaves = a - 1
        else:
            leaves = a - 2
        inputs: list[tuple[XState, int]] = []
        if state is not None:
            inputs.append((state, state.n - 1))  # incoming connector sits last
        inputs.extend((pair, 0) for _ in range(leaves))
        if node < z - 1:
            inputs.append((pair, 0))  # connector to the next node
        step_prob, state = ghz_fuse(inputs, outcomes[node])
        prob *= step_prob
        if state is None:
            return 0.0, None
    return prob, state


def chain_state(p: float, z: int, a: int) -> XState:
    """Canonical-outcome chain state; see :func:`chain_collapse`."""
    state = chain_collapse(p, z, a)[1]
    assert state is not None
    return state


def local_measure(
    state: XState, site: int, setting: LocalSetting, sign: int
) -> tuple[float, XState | None]:
    """Project one site onto the setting's +-1 outcome and renormalize.

    Diagonal entries recombine with weights (cos^2(theta/2), sin^2(theta/2))
    (swapped for the - outcome); the corner picks up
    sign * e^{i phi} sin(theta) / 2 before renormalization.  Zero-measure
    branches return (0.0, None).
    """
    if state.n < 2:
        raise ValueError("local measurement needs at least two qubits")
    if not 0 <= site < state.n:
        raise ValueError(f"site {site} out of range for {state.n} qubits")
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    half = 0.5 * setting.theta
    c2, s2 = np.cos(half) ** 2, np.sin(half) ** 2
    w0, w1 = (c2, s2) if sign == +1 else (s2, c2)
    moved = np.moveaxis(state.diag.reshape((2,) * state.n), site, 0)
    new_diag = w0 * moved[0].reshape(-1) + w1 * moved[1].reshape(-1)
    prob = float(new_diag.sum())
    if prob < ZERO_BRANCH_TOL:
        return 0.0, None
    mult = sign * 0.5 * np.sin(setting.theta) * np.exp(1j * setting.phi)
    return prob, XState(state.n - 1, new_diag / prob, state.offdiag * mult / prob)


def _normalize_settings(
    count: int, settings: LocalSetting | Sequence[LocalSetting]
) -> list[LocalSetting]:
    if isinstance(settings, LocalSetting):
        return [settings] * count
    settings = list(settings)
    if len(settings) != count:
        raise ValueError(f"expected {count} settings, got {len(settings)}")
    return settings


def measure_all(
    state: XState,
    sites: Sequence[int],
    settings: LocalSetting | Sequence[LocalSetting],
) -> list[OutcomeBranch]:
    """Enumerate all 2^m sign branches of measuring the given sites.

    Branch probabilities sum to one; each branch state satisfies the X-form
    invariants.  Sites are removed highest-index-first internally so the
    result does not depend on the order in which sites are listed.
    """
    sites = [int(s) for s in sites]
    if len(set(sites)) != len(sites):
        raise ValueError("sites must be distinct")
    for s in sites:
        if not 0 <= s < state.n:
            raise ValueError(f"site {s} out of range for {state.n} qubits")
    m = len(sites)
    per_site = _normalize_settings(m, settings)
    if m == 0:
        return [OutcomeBranch((), 1.0, state)]
    order = sorted(range(m), key=lambda t: sites[t], reverse=True)
    branches = []
    for pattern in itertools.product((1, -1), repeat=m):
        cur: XState | None = state
        prob = 1.0
        for t in order:
            step_prob, cur = local_measure(cur, sites[t], per_site[t], pattern[t])
            prob *= step_prob
            if cur is None:
                prob = 0.0
                break
        branches.append(OutcomeBranch(tuple(pattern), prob, cur))
    return branches


def branch_fractions(branches: Sequence[OutcomeBranch]) -> np.ndarray:
    """Per-branch fraction f_i = 1 - 2^m p_i, read off the probabilities."""
    if not branches:
        raise ValueError("no branches")
    m = len(branches[0].outcome_signs)
    probs = np.array([b.probability for b in branches])
    return 1.0 - (2**m) * probs


def discard(state: XState, sites: Sequence[int]) -> XState:
    """Partial trace over the given sites (the non-collaborative move).

    Tracing out any site annihilates the corner, because the coherence pair
    connects the all-0 and all-1 strings.
    """
    site_set = sorted(set(int(s) for s in sites))
    if not site_set:
        return state
    if len(site_set) >= state.n:
        raise ValueError("at least one qubit must remain")
    for s in site_set:
        if not 0 <= s < state.n:
            raise ValueError(f"site {s} out of range for {state.n} qubits")
    reduced = state.diag.reshape((2,) * state.n).sum(axis=tuple(site_set))
    return XState(state.n - len(site_set), reduced.reshape(-1), 0.0)
