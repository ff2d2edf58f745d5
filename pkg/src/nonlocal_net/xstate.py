"""Compact X-form density matrices and the noisy-singlet (Werner) family.

Every state the swapping protocol produces carries a full computational-basis
diagonal plus a single coherence pair between |00...0> and |11...1>.  Storing
just (diag, offdiag) keeps each protocol step exact and cheap; full matrices
are only materialized for the brute-force cross checks in :mod:`.oracle`.

Conventions: qubit 0 is the most significant bit of the basis index, so
``diag.reshape((2,) * n)`` exposes one axis per qubit in order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORMALIZATION_TOL = 1e-12
HERMITICITY_TOL = 1e-12
POSITIVITY_TOL = 1e-10

INV_SQRT2 = 1.0 / np.sqrt(2.0)


def _as_mixing_weight(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing weight must lie in [0, 1], got {p}")
    return p


@dataclass(frozen=True)
class WernerParam:
    """Mixing weight of the family p|psi-><psi-| + (1-p) I/4."""

    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", _as_mixing_weight(self.p))

    @property
    def entangled(self) -> bool:
        return self.p > 1.0 / 3.0

    @property
    def chsh_violating(self) -> bool:
        return self.p > INV_SQRT2


@dataclass(frozen=True)
class XStateReport:
    """Outcome of :meth:`XState.validate`: which invariants hold and by how much."""

    ok: bool
    failures: tuple[str, ...]
    deviations: dict[str, float]


@dataclass(frozen=True, eq=False)
class XState:
    """n-qubit state with arbitrary diagonal and one extreme anti-diagonal pair.

    ``offdiag`` is <00...0| rho |11...1>; its conjugate sits at the transposed
    corner.  All other off-diagonal entries are identically zero.
    """

    n: int
    diag: np.ndarray
    offdiag: complex

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("qubit count must be positive")
        d = np.array(self.diag, dtype=float)
        if d.shape != (2**self.n,):
            raise ValueError(f"diag must have length 2^{self.n}, got shape {d.shape}")
        d.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", complex(self.offdiag))

    @property
    def dim(self) -> int:
        return 2**self.n

    def trace(self) -> float:
        return float(self.diag.sum())

    def validate(self) -> XStateReport:
        """Check normalization, diagonal positivity and the corner bound.

        Positivity of the whole matrix is equivalent to nonnegative diagonal
        entries plus |offdiag|^2 <= diag[0] * diag[-1], because the matrix is
        diagonal outside one 2x2 block.
        """
        deviations = {
            "normalization": abs(self.trace() - 1.0),
            "diag_nonnegative": max(0.0, -float(self.diag.min())),
            "corner_bound": max(
                0.0,
                abs(self.offdiag) - np.sqrt(max(self.diag[0] * self.diag[-1], 0.0)),
            ),
        }
        tols = {
            "normalization": NORMALIZATION_TOL,
            "diag_nonnegative": POSITIVITY_TOL,
            "corner_bound": POSITIVITY_TOL,
        }
        failures = tuple(k for k, v in deviations.items() if v > tols[k])
        return XStateReport(ok=not failures, failures=failures, deviations=deviations)

    def to_dense(self) -> "DenseState":
        return xstate_to_dense(self)

    def ghz_white_corner_weights(self) -> tuple[float, float]:
        """Derived (q1, q2) of the GHZ / white-noise / corner-projector mixture.

        Only defined when all interior diagonal entries are equal (true for
        the three-party collapse states); raises otherwise rather than guess.
        """
        interior = self.diag[1:-1]
        if interior.size == 0:
            raise ValueError("decomposition needs at least 2 qubits")
        if float(interior.max() - interior.min()) > 1e-12:
            raise ValueError("interior diagonal is not uniform; no exact decomposition")
        q1 = 2.0 * abs(self.offdiag)
        q2 = float(self.dim * interior[0])
        return q1, q2


@dataclass(frozen=True, eq=False)
class DenseState:
    """Full 2^n x 2^n density matrix, the oracle's working representation."""

    n: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2**self.n, 2**self.n):
            raise ValueError(f"matrix must be {2**self.n} x {2**self.n}, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def check(self) -> XStateReport:
        """Hermiticity, trace and eigenvalue positivity diagnostics."""
        m = self.matrix
        herm = float(np.abs(m - m.conj().T).max())
        tr = abs(float(m.trace().real) - 1.0) + abs(float(m.trace().imag))
        min_eig = float(np.linalg.eigvalsh((m + m.conj().T) / 2.0).min())
        deviations = {
            "hermitian": herm,
            "trace": tr,
            "eigenvalues": max(0.0, -min_eig),
        }
        tols = {
            "hermitian": HERMITICITY_TOL,
            "trace": NORMALIZATION_TOL,
            "eigenvalues": POSITIVITY_TOL,
        }
        failures = tuple(k for k, v in deviations.items() if v > tols[k])
        return XStateReport(ok=not failures, failures=failures, deviations=deviations)


def xstate_to_dense(state: XState) -> DenseState:
    """Materialize the X-form state as a full matrix."""
    dim = state.dim
    m = np.zeros((dim, dim), dtype=complex)
    m[np.arange(dim), np.arange(dim)] = state.diag
    m[0, dim - 1] = state.offdiag
    m[dim - 1, 0] = np.conjugate(state.offdiag)
    return DenseState(state.n, m)


def xstate_from_dense(state: DenseState) -> XState:
    """Read (diag, corner) back off a dense matrix; inverse of xstate_to_dense."""
    m = state.matrix
    return XState(state.n, m.diagonal().real.copy(), m[0, -1])


def werner_dense(p: float) -> DenseState:
    """Two-qubit p|psi-><psi-| + (1-p) I/4 as a dense matrix."""
    p = _as_mixing_weight(p)
    singlet = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) * INV_SQRT2
    m = p * np.outer(singlet, singlet.conj()) + (1.0 - p) * np.eye(4) / 4.0
    return DenseState(2, m)


def werner_corner(p: float) -> XState:
    """Werner pair in the protocol frame: outer qubit bit-flipped.

    The flip moves the singlet coherence from the (01, 10) pair onto the
    extreme corners, so repeated joint collapses stay inside the X family.
    Bell quantities are invariant under the local flip.
    """
    p = _as_mixing_weight(p)
    hi = (1.0 + p) / 4.0
    lo = (1.0 - p) / 4.0
    return XState(2, np.array([hi, lo, lo, hi]), -0.5 * p)


def werner_corner_dense(p: float) -> DenseState:
    """Dense form of :func:`werner_corner` for the oracle drivers."""
    return xstate_to_dense(werner_corner(p))


def ghz_xstate(n: int) -> XState:
    """Pure |GHZ_n> = (|0...0> + |1...1>)/sqrt(2) in X form."""
    if n < 1:
        raise ValueError("qubit count must be positive")
    d = np.zeros(2**n)
    d[0] = d[-1] = 0.5
    return XState(n, d, 0.5)
