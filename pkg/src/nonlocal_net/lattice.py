"""Network topologies: 1D chains, the square lattice with (i, j, q) site
addressing, and the triangular lattice parameterization.

A route reduces to chain parameters consumable by :mod:`.thresholds` plus a
measurement plan consumable by :mod:`.measurement`.  Chain sites are indexed
node-major: node 1 contributes its a-1 dangling sites first, interior nodes
a-2 each, the last node a-1; connector qubits are consumed by the node
collapses and never appear as sites.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .measurement import LocalSetting, OutcomeBranch, chain_state, measure_all
from .thresholds import ChainSpec


class RoutingError(ValueError):
    """The requested endpoints admit no valid L-shaped route."""


# Direction slot -> step to the node holding the site's pair partner.  The
# table is pinned by the reference endpoint pairs exercised in the tests; it
# is not a geometric compass (slots 1 and 2 share an axis, slot 4 resolves to
# the home node) and is not extrapolated beyond those cases.
SLOT_STEP = {1: (0, 1), 2: (0, 1), 3: (-1, 0), 4: (0, 0)}


@dataclass(frozen=True)
class SquareAddress:
    """Site (i, j, q): the q-th party held at square-lattice node (i, j)."""

    i: int
    j: int
    q: int

    def __post_init__(self):
        if self.q not in SLOT_STEP:
            raise ValueError(f"direction slot must be 1..4, got {self.q}")

    @property
    def node(self) -> tuple[int, int]:
        return (self.i, self.j)


def nearest_node(addr: SquareAddress) -> tuple[int, int]:
    """Node holding the partner qubit of the site's pair."""
    di, dj = SLOT_STEP[addr.q]
    return (addr.i + di, addr.j + dj)


@dataclass(frozen=True)
class RoutePlan:
    """Joint- and local-measurement plan equivalent to a chain protocol.

    ``ghz_nodes`` lists the nodes receiving joint collapses (coordinate pairs
    for square routes, 1-based integers for abstract chains).  Site indices
    refer to the node-major chain ordering.
    """

    ghz_nodes: tuple
    local_sites: tuple[int, ...]
    terminals: tuple[int, ...]
    equivalent: ChainSpec

    def __post_init__(self):
        if len(set(self.ghz_nodes)) != len(self.ghz_nodes):
            raise ValueError("a route must not revisit a node")
        if set(self.local_sites) & set(self.terminals):
            raise ValueError("terminal sites cannot be measured")
        if len(self.ghz_nodes) != self.equivalent.z:
            raise ValueError("node list does not match the chain node count")
        spec = self.equivalent
        if len(self.local_sites) != spec.m:
            raise ValueError("measured-site count does not match the chain spec")
        if len(self.terminals) + spec.m != spec.sites:
            raise ValueError("terminals and measured sites must partition the sites")

    @property
    def site_count(self) -> int:
        return self.equivalent.sites

    def site_nodes(self) -> list:
        """Owning node of each chain site, in site order."""
        spec = self.equivalent
        owners = []
        for k, node in enumerate(self.ghz_nodes):
            if spec.z == 1:
                leaves = spec.a
            elif k in (0, spec.z - 1):
                leaves = spec.a - 1
            else:
                leaves = spec.a - 2
            owners.extend([node] * leaves)
        return owners

    def to_dict(self) -> dict:
        return {
            "ghz_nodes": [list(n) if isinstance(n, tuple) else n for n in self.ghz_nodes],
            "local_sites": list(self.local_sites),
            "terminals": list(self.terminals),
            "chain": {"z": self.equivalent.z, "a": self.equivalent.a, "m": self.equivalent.m},
            "site_count": self.site_count,
        }


def _l_path(
    start: tuple[int, int], end: tuple[int, int], column_first: bool
) -> list[tuple[int, int]]:
    path = [start]
    i, j = start
    order = ("j", "i") if column_first else ("i", "j")
    for axis in order:
        if axis == "i":
            while i != end[0]:
                i += int(np.sign(end[0] - i))
                path.append((i, j))
        else:
            while j != end[1]:
                j += int(np.sign(end[1] - j))
                path.append((i, j))
    return path


def _default_terminals(spec: ChainSpec) -> tuple[int, ...]:
    r = spec.residual_parties
    return (0,) + tuple(range(spec.sites - (r - 1), spec.sites))


def route_square(
    origin: SquareAddress,
    target: SquareAddress,
    n_terminals: int | None = None,
    column_first: bool = False,
) -> RoutePlan:
    """L-shaped route between the partner nodes of two square-lattice sites.

    The path first walks the row axis then the column axis (or the other way
    around with ``column_first``); it visits |di| + |dj| + 1 nodes, each
    collapsing its four qubits.  Default terminals are the origin site plus
    the far node's three surviving sites (four residual parties).
    """
    if origin == target:
        raise RoutingError("endpoints coincide")
    n1 = nearest_node(origin)
    n2 = nearest_node(target)
    if n1 == n2:
        raise RoutingError(
            f"both endpoints attach to node {n1}; no chain can separate them"
        )

    def conflict(path: list[tuple[int, int]]) -> str | None:
        # A path node collapses all of its qubits, so neither endpoint's home
        # node may lie on the path (its site would be consumed).  Slots whose
        # partner node is the home itself are exempt.
        for addr, own_nearest in ((origin, n1), (target, n2)):
            home = addr.node
            if home != own_nearest and home in path:
                return (
                    f"slot {addr.q} of site {home} points along the route; "
                    f"path {path} would consume the site's own node"
                )
        return None

    path = _l_path(n1, n2, column_first)
    problem = conflict(path)
    if problem is not None:
        # The alternate bend of the same L family may clear the endpoint.
        alternate = _l_path(n1, n2, not column_first)
        if conflict(alternate) is None:
            path = alternate
        else:
            raise RoutingError(problem)
    z = len(path)
    a = 4
    spec = ChainSpec(z, a, (z - 1) * (a - 2))
    if n_terminals is not None:
        if not 2 <= n_terminals <= spec.sites:
            raise RoutingError(f"terminal count must lie in [2, {spec.sites}]")
        spec = ChainSpec(z, a, spec.sites - n_terminals)
    terminals = _default_terminals(spec)
    local = tuple(s for s in range(spec.sites) if s not in terminals)
    return RoutePlan(tuple(path), local, terminals, spec)


def chain_plan(z: int, a: int, terminals: Sequence[int] | None = None) -> RoutePlan:
    """Measurement plan for an abstract z-node chain.

    ``terminals`` are the chain-site indices left unmeasured; default is one
    end site plus the far node's a-1 sites.
    """
    if z < 1 or a < 3:
        raise ValueError("need z >= 1 and a >= 3")
    sites = z * (a - 2) + 2
    if terminals is None:
        spec = ChainSpec.default(z, a)
        kept = _default_terminals(spec)
    else:
        kept = tuple(sorted(set(int(t) for t in terminals)))
        if len(kept) != len(tuple(terminals)):
            raise ValueError("terminal sites must be distinct")
        if not kept or not all(0 <= t < sites for t in kept):
            raise ValueError(f"terminal sites must lie in [0, {sites})")
        spec = ChainSpec(z, a, sites - len(kept))
    local = tuple(s for s in range(sites) if s not in kept)
    return RoutePlan(tuple(range(1, z + 1)), local, kept, spec)


def triangular_plan(z: int, m: int) -> RoutePlan:
    """Chain-equivalent plan on the coordination-six triangular lattice.

    Residual parties number 4z + 2 - m; with a single local measurement the
    53-site configuration is z = 13.  Site addresses on the triangular
    lattice are not resolved; nodes are abstract indices.
    """
    spec = ChainSpec(z, 6, m)
    local = tuple(range(1, m + 1))
    kept = tuple(s for s in range(spec.sites) if s not in local)
    return RoutePlan(tuple(range(1, z + 1)), local, kept, spec)


def realize_plan(
    plan: RoutePlan,
    p: float,
    settings: LocalSetting | Sequence[LocalSetting] | None = None,
) -> list[OutcomeBranch]:
    """Execute a plan on noisy pairs: collapse the chain, measure the plan's
    local sites, and return the branch ensemble (canonical node outcomes).
    """
    state = chain_state(p, plan.equivalent.z, plan.equivalent.a)
    if settings is None:
        settings = LocalSetting(np.pi / 2, 0.0)
    return measure_all(state, plan.local_sites, settings)
