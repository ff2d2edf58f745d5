"""Critical-noise formulas and searches for star and chain networks.

Each threshold is the smallest initial mixing weight p for which the
protocol's residual ensemble still violates the chosen Bell test at the
analytically optimal angles (equatorial local measurements).  A threshold
below 1/sqrt(2) certifies superadditivity: the output violates although no
input pair does.

Network bookkeeping: a chain of z nodes with coordination number a consumes
z(a-1)+1 noisy pairs, leaves z(a-2)+2 sites, and its corner coherence scales
as p^(z(a-1)+1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .bell import mbk_angle

SUPERADDITIVITY_BOUND = 1.0 / np.sqrt(2.0)
BISECTION_TOL = 1e-12
COORDINATION_CAP = 64
NODE_CAP = 10**6


class SearchExhaustedError(RuntimeError):
    """An incremental search hit its cap without finding a solution."""


@dataclass(frozen=True)
class ChainSpec:
    """Chain parameters: z nodes, coordination a, m locally measured sites."""

    z: int
    a: int
    m: int

    def __post_init__(self):
        if self.z < 1:
            raise ValueError("node count must be positive")
        if self.a < 2:
            raise ValueError("coordination number must be at least 2")
        if self.m < 0:
            raise ValueError("measurement count must be nonnegative")
        if self.residual_parties < 2:
            raise ValueError(
                f"m={self.m} leaves {self.residual_parties} parties; need at least 2"
            )

    @classmethod
    def default(cls, z: int, a: int) -> "ChainSpec":
        """Measure everything except one end site and the far node's a-1 sites."""
        return cls(z, a, (z - 1) * (a - 2))

    @property
    def sites(self) -> int:
        return self.z * (self.a - 2) + 2

    @property
    def pair_count(self) -> int:
        return self.z * (self.a - 1) + 1

    @property
    def residual_parties(self) -> int:
        return self.sites - self.m


@dataclass(frozen=True)
class ThresholdResult:
    p_cr: float
    inequality: str
    network: str
    params: Mapping[str, int]
    superadditive: bool


def _result(p_cr: float, inequality: str, network: str, **params: int) -> ThresholdResult:
    return ThresholdResult(
        p_cr=float(p_cr),
        inequality=inequality,
        network=network,
        params=dict(params),
        superadditive=bool(p_cr < SUPERADDITIVITY_BOUND),
    )


def bisect_root(
    f: Callable[[float], float], lo: float, hi: float, tol: float = BISECTION_TOL
) -> float:
    """Root of a sign-changing f on [lo, hi] by plain bisection."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise ValueError("interval does not bracket a root")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pcr_star_chsh(n_parties: int) -> ThresholdResult:
    """Root of p^4 + p^(2n) = 1: bipartite test after measuring n-2 star sites."""
    if n_parties < 2:
        raise ValueError("a star needs at least two parties")
    root = bisect_root(lambda p: p**4 + p ** (2 * n_parties) - 1.0, 0.0, 1.0)
    return _result(root, "chsh", "star", n=n_parties, m=n_parties - 2)


def pcr_star_mbk(n_parties: int, m: int = 0) -> ThresholdResult:
    """Closed form 2^{-(n-m-1)/(2n)} for the collaborative multipartite test.

    Stated with the summed measured phase absorbing the operator angle, so it
    is formal at m=0; :func:`pcr_star_mbk_noncollab` is the physical m=0 case.
    """
    if n_parties - m < 2:
        raise ValueError("need at least two residual parties")
    if m < 0:
        raise ValueError("measurement count must be nonnegative")
    p_cr = 2.0 ** (-(n_parties - m - 1) / (2.0 * n_parties))
    return _result(p_cr, "mbk", "star", n=n_parties, m=m)


def pcr_star_mbk_noncollab(n_parties: int) -> ThresholdResult:
    """Multipartite test on the full collapsed star, no local measurements.

    The operator phase beta_n cannot be rotated away, leaving
    p_cr = 2^{-(n-1)/(2n)} cos(beta_n)^{-1/n}; exactly 1 at n=2.
    """
    if n_parties < 2:
        raise ValueError("a star needs at least two parties")
    beta = mbk_angle(n_parties)
    p_cr = 2.0 ** (-(n_parties - 1) / (2.0 * n_parties)) * np.cos(beta) ** (
        -1.0 / n_parties
    )
    return _result(p_cr, "mbk", "star", n=n_parties, m=0)


def pcr_star_fb(n_parties: int, m: int = 0) -> ThresholdResult:
    """Continuous-settings threshold for a star with m measured sites.

    m = 0: p_cr = 2^{1/n} (2/pi); m >= 1: p_cr = 2^{3/(2n)} (2/pi)^{(n-m)/n}.
    First drops below 1/sqrt(2) at n = 7 for m = 0.
    """
    if n_parties < 2:
        raise ValueError("a star needs at least two parties")
    if m < 0:
        raise ValueError("measurement count must be nonnegative")
    if m == 0:
        p_cr = 2.0 ** (1.0 / n_parties) * (2.0 / np.pi)
    else:
        if n_parties - m < 2:
            raise ValueError("need at least two residual parties")
        p_cr = 2.0 ** (1.5 / n_parties) * (2.0 / np.pi) ** ((n_parties - m) / n_parties)
    return _result(p_cr, "fb", "star", n=n_parties, m=m)


def pcr_chain_chsh(z: int, a: int) -> ThresholdResult:
    """Root of p^6 + p^(2(z(a-1)+1)) = 1.

    The p^6 term is the z-correlator of two end sites hanging off adjacent
    nodes (three pairs apart); the other term is the full-chain coherence.
    """
    if z < 1 or a < 3:
        raise ValueError("need z >= 1 and a >= 3")
    exponent = 2 * (z * (a - 1) + 1)
    root = bisect_root(lambda p: p**6 + p**exponent - 1.0, 0.0, 1.0)
    return _result(root, "chsh", "chain", z=z, a=a, m=z * (a - 2))


def pcr_chain_mbk(spec: ChainSpec) -> ThresholdResult:
    """Closed form 2^{-(r-1)/(2 z(a-1)+2)} with r residual parties.

    At the default m = (z-1)(a-2) the residual is a parties and the exponent
    reduces to (1-a)/(2 z(a-1)+2).
    """
    p_cr = 2.0 ** (-(spec.residual_parties - 1) / (2.0 * spec.pair_count))
    return _result(p_cr, "mbk", "chain", z=spec.z, a=spec.a, m=spec.m)


def pcr_chain_fb(spec: ChainSpec) -> ThresholdResult:
    """Continuous-settings chain threshold.

    m >= 1: p_cr = 2^{3/(2L)} (2/pi)^{r/L} with L = z(a-1)+1 pairs and
    r = z(a-2)+2-m residual parties.  m = 0 uses the no-measurement bound
    p_cr = 2^{1/L} (2/pi)^{r/L}, the variant behind the a >= 6
    superadditivity claim.
    """
    L = spec.pair_count
    r = spec.residual_parties
    if spec.m == 0:
        p_cr = 2.0 ** (1.0 / L) * (2.0 / np.pi) ** (r / L)
    else:
        p_cr = 2.0 ** (1.5 / L) * (2.0 / np.pi) ** (r / L)
    return _result(p_cr, "fb", "chain", z=spec.z, a=spec.a, m=spec.m)


def min_coordination_superadditive(z: int, a_cap: int = COORDINATION_CAP) -> int:
    """Smallest coordination number whose unmeasured chain output is
    superadditive (threshold below 1/sqrt(2)) at the given node count.

    Evaluates the m = 0 variant of :func:`pcr_chain_fb`.  The answer is 6 for
    every z >= 2; a single node is a star, which first crosses at 7.
    """
    if z < 1:
        raise ValueError("node count must be positive")
    for a in range(3, a_cap + 1):
        if pcr_chain_fb(ChainSpec(z, a, 0)).p_cr < SUPERADDITIVITY_BOUND:
            return a
    raise SearchExhaustedError(f"no coordination number up to {a_cap} works for z={z}")


def min_nodes_superadditive(a: int, m: int, z_cap: int = NODE_CAP) -> int:
    """Smallest node count whose chain threshold is superadditive at fixed (a, m).

    Node counts too small to host the m measurements are skipped; the scan
    asserts the threshold keeps decreasing so the first crossing is the
    minimum.
    """
    if a < 6:
        raise ValueError("superadditivity needs coordination number at least 6")
    if m < 0:
        raise ValueError("measurement count must be nonnegative")
    previous = None
    for z in range(1, z_cap + 1):
        if m > z * (a - 2):
            continue
        p_cr = pcr_chain_fb(ChainSpec(z, a, m)).p_cr
        if previous is not None and p_cr > previous + 1e-15:
            raise RuntimeError(f"threshold not decreasing in z at z={z}")
        previous = p_cr
        if p_cr < SUPERADDITIVITY_BOUND:
            return z
    raise SearchExhaustedError(f"no node count up to {z_cap} works for a={a}, m={m}")
