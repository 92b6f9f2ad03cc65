"""Joint candidate selection and visitation ordering.

The objective for an order ``sigma`` and candidate vector ``j`` is the sum of
local costs ``L + rho*T`` of the chosen sweeps plus the straight-line
connector lengths between consecutive exit/entry points (open tour).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidSpecError, SolverLimitError
from .geometry import Point, count_turns, dedupe, polyline_length
from .roi import CellRegion
from .sweep import SweepCandidate

DEFAULT_RHO = 0.15
DEFAULT_EXACT_LIMIT = 15
# relative slack for treating two DP values as tied
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class CostParams:
    rho: float = DEFAULT_RHO

    def __post_init__(self):
        if not self.rho >= 0:
            raise InvalidSpecError(f"rho must be non-negative, got {self.rho}")


@dataclass(frozen=True)
class GAConfig:
    seed: int
    lambda_turns: float = 0.15
    population: int = 450
    generations: int = 350
    elite_fraction: float = 0.05
    tournament_size: int = 4
    p_mut_order: float = 0.30
    p_mut_choice: float = 0.40

    def __post_init__(self):
        if self.population < 1 or self.generations < 1:
            raise InvalidSpecError("population and generations must be >= 1")
        if self.tournament_size < 1:
            raise InvalidSpecError("tournament_size must be >= 1")
        for name in ("elite_fraction", "p_mut_order", "p_mut_choice"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidSpecError(f"{name} must lie in [0, 1], got {v}")
        if self.lambda_turns < 0:
            raise InvalidSpecError("lambda_turns must be non-negative")


def local_cost(candidate: SweepCandidate, params: CostParams) -> float:
    return candidate.length + params.rho * candidate.turns


def connector_cost(exit: Point, entry: Point) -> float:
    return math.hypot(entry[0] - exit[0], entry[1] - exit[1])


@dataclass(frozen=True)
class RoutingProblem:
    """Flattened candidate table: node ``n`` is candidate ``n - offsets[i]`` of partition ``i``."""

    sizes: tuple[int, ...]
    costs: np.ndarray  # (K,)
    entries: np.ndarray  # (K, 2)
    exits: np.ndarray  # (K, 2)

    def __post_init__(self):
        if not self.sizes or min(self.sizes) < 1:
            raise InvalidSpecError("every partition needs at least one candidate")

    @classmethod
    def from_candidates(cls, candidates: Sequence[Sequence[SweepCandidate]], params: CostParams) -> "RoutingProblem":
        flat = [c for cs in candidates for c in cs]
        return cls(
            tuple(len(cs) for cs in candidates),
            np.array([local_cost(c, params) for c in flat], dtype=float),
            np.array([c.entry for c in flat], dtype=float).reshape(-1, 2),
            np.array([c.exit for c in flat], dtype=float).reshape(-1, 2),
        )

    @property
    def n(self) -> int:
        return len(self.sizes)

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.sizes)[:-1]]).astype(np.int64)

    @property
    def part_of(self) -> np.ndarray:
        return np.repeat(np.arange(self.n), self.sizes)

    def connector_matrix(self) -> np.ndarray:
        """``D[a, b]`` = distance from exit of node ``a`` to entry of node ``b``."""
        diff = self.exits[:, None, :] - self.entries[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])

    def cost(self, order: Sequence[int], choices: Sequence[int], start: Optional[Point] = None) -> float:
        """Objective value of a complete plan; ``choices`` is indexed by partition."""
        off = self.offsets
        nodes = [int(off[i] + choices[i]) for i in order]
        terms = [float(self.costs[n]) for n in nodes]
        for a, b in zip(nodes[:-1], nodes[1:]):
            terms.append(connector_cost(tuple(self.exits[a]), tuple(self.entries[b])))
        if start is not None and nodes:
            terms.append(connector_cost(start, tuple(self.entries[nodes[0]])))
        return math.fsum(terms)


def _first_min(values: np.ndarray) -> int:
    """Index of the lowest entry among those tied with the minimum."""
    best = values.min()
    tol = TIE_RTOL * max(1.0, abs(best))
    return int(np.flatnonzero(values <= best + tol)[0])


def solve_exact(problem: RoutingProblem, start: Optional[Point] = None,
                limit: int = DEFAULT_EXACT_LIMIT) -> tuple[tuple[int, ...], tuple[int, ...], dict]:
    """Subset DP over (visited set, first partition, its candidate).

    ``G[S, n]`` is the cheapest way to cover every partition in ``S`` starting
    with node ``n``; building suffixes lets the forward reconstruction pick the
    lexicographically smallest optimal ``(sigma, j)``.
    """
    N = problem.n
    if N > limit:
        raise SolverLimitError(f"{N} partitions exceed the exact-solver limit of {limit}; use the GA router")
    K = len(problem.costs)
    part = problem.part_of
    off = problem.offsets
    D = problem.connector_matrix()
    full = (1 << N) - 1
    G = np.full((1 << N, K), np.inf)
    node_sets = [np.arange(off[i], off[i] + problem.sizes[i]) for i in range(N)]
    for i in range(N):
        G[1 << i, node_sets[i]] = problem.costs[node_sets[i]]
    masks = np.arange(1 << N)
    popcount = np.zeros(1 << N, dtype=np.int64)
    for i in range(N):
        popcount += (masks >> i) & 1
    evaluated = int(K)
    for size in range(2, N + 1):
        layer = masks[popcount == size]
        for i in range(N):
            bit = 1 << i
            Ms = layer[(layer & bit) != 0]
            if not len(Ms):
                continue
            nodes = node_sets[i]
            rest = G[Ms ^ bit]  # (|Ms|, K)
            best = (rest[:, None, :] + D[nodes][None, :, :]).min(axis=2)
            G[np.ix_(Ms, nodes)] = problem.costs[nodes][None, :] + best
            evaluated += len(Ms) * len(nodes)
    final = G[full].copy()
    if start is not None:
        final = final + np.hypot(problem.entries[:, 0] - start[0], problem.entries[:, 1] - start[1])
    n = _first_min(final)
    order, choices = [], [0] * N
    S = full
    while True:
        i = int(part[n])
        order.append(i)
        choices[i] = int(n - off[i])
        S ^= 1 << i
        if not S:
            break
        n = _first_min(D[n] + G[S])
    stats = {"dp_states_allocated": int(G.size), "dp_states_evaluated": evaluated,
             "dp_state_bound": (1 << N) * N * max(problem.sizes)}
    return tuple(order), tuple(choices), stats


@dataclass(frozen=True)
class GlobalPlan:
    order: tuple[int, ...]
    choices: tuple[int, ...]
    total_cost: float
    stitched: tuple[Point, ...]
    connectors: tuple[tuple[Point, Point], ...]
    legs: tuple[SweepCandidate, ...] = ()
    solver: str = "dp"
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def length(self) -> float:
        return polyline_length(self.stitched)

    @property
    def turns(self) -> int:
        return count_turns(self.stitched)

    def to_dict(self, plan_id: str = "plan") -> dict:
        return {
            "id": plan_id,
            "solver": self.solver,
            "order": list(self.order),
            "choices": list(self.choices),
            "total_cost": self.total_cost,
            "waypoints": [list(p) for p in self.stitched],
            "connectors": [[list(a), list(b)] for a, b in self.connectors],
        }


def stitch(legs: Sequence[Sequence[Point]]) -> tuple[list[Point], list[tuple[Point, Point]]]:
    """Concatenate leg polylines with straight connectors; coincident joints add nothing."""
    pts: list[Point] = []
    connectors: list[tuple[Point, Point]] = []
    for leg in legs:
        leg = dedupe(leg)
        if not leg:
            continue
        if pts and pts[-1] != leg[0]:
            connectors.append((pts[-1], leg[0]))
        pts.extend(leg if not pts or pts[-1] != leg[0] else leg[1:])
    return pts, connectors


def _plan(problem: RoutingProblem, candidates, order, choices, solver, stats, start=None) -> GlobalPlan:
    legs = tuple(candidates[i][choices[i]] for i in order)
    pts, conns = stitch([leg.waypoints for leg in legs])
    if start is not None:
        start = (float(start[0]), float(start[1]))
        if pts and pts[0] != start:
            conns.insert(0, (start, pts[0]))
            pts.insert(0, start)
    return GlobalPlan(tuple(order), tuple(choices), problem.cost(order, choices, start),
                      tuple(pts), tuple(conns), legs, solver, stats)


def held_karp(partitions, candidates: Sequence[Sequence[SweepCandidate]], params: CostParams,
              limit: int = DEFAULT_EXACT_LIMIT, start: Optional[Point] = None) -> GlobalPlan:
    """Exact minimiser over visitation order and per-partition candidate choice.

    ``candidates[k]`` lists the sweeps of ``partitions[k]``; plan order and
    choices refer to positions in these lists.
    """
    if len(candidates) != len(partitions):
        raise ValueError("one candidate list per partition is required")
    problem = RoutingProblem.from_candidates(candidates, params)
    order, choices, stats = solve_exact(problem, start=start, limit=limit)
    return _plan(problem, candidates, order, choices, "dp", stats, start)


def ga_search(problem: RoutingProblem, config: GAConfig, start: Optional[Point] = None):
    """Elitist GA over (permutation, choice vector) chromosomes.

    Offspring are tournament-selected copies. Each order position is swapped
    with a random other position with probability ``p_mut_order`` and each
    partition's candidate is resampled with probability ``p_mut_choice``.
    Returns the best order, choices and its fitness.
    """
    rng = np.random.default_rng(config.seed)
    N = problem.n
    P = config.population
    sizes = np.array(problem.sizes)
    off = problem.offsets
    D = problem.connector_matrix()
    costs = problem.costs
    start_d = None
    if start is not None:
        start_d = np.hypot(problem.entries[:, 0] - start[0], problem.entries[:, 1] - start[1])

    def fitness(perm, choice):
        nodes = off[perm] + np.take_along_axis(choice, perm, axis=1)
        f = costs[nodes].sum(axis=1)
        if N > 1:
            f = f + D[nodes[:, :-1], nodes[:, 1:]].sum(axis=1)
        if start_d is not None:
            f = f + start_d[nodes[:, 0]]
        return f

    perm = np.argsort(rng.random((P, N)), axis=1)
    choice = (rng.random((P, N)) * sizes).astype(np.int64)
    n_elite = min(P, max(1, int(math.ceil(config.elite_fraction * P))))
    n_child = P - n_elite
    rows = np.arange(n_child)
    fit = fitness(perm, choice)
    for _ in range(config.generations):
        rank = np.argsort(fit, kind="stable")
        elite = rank[:n_elite]
        if n_child:
            contenders = rng.integers(0, P, size=(n_child, config.tournament_size))
            winners = contenders[rows, np.argmin(fit[contenders], axis=1)]
            c_perm = perm[winners].copy()
            c_choice = choice[winners].copy()
            # mutation probabilities apply per gene
            if N > 1:
                for pos in range(N):
                    sr = rows[rng.random(n_child) < config.p_mut_order]
                    other = rng.integers(0, N, size=len(sr))
                    va, vb = c_perm[sr, pos], c_perm[sr, other]
                    c_perm[sr, pos] = vb
                    c_perm[sr, other] = va
            flip = rng.random((n_child, N)) < config.p_mut_choice
            resampled = (rng.random((n_child, N)) * sizes).astype(np.int64)
            c_choice = np.where(flip, resampled, c_choice)
            perm = np.concatenate([perm[elite], c_perm])
            choice = np.concatenate([choice[elite], c_choice])
            fit = np.concatenate([fit[elite], fitness(c_perm, c_choice)])
        else:
            perm, choice, fit = perm[elite], choice[elite], fit[elite]
    best = int(np.argmin(fit))
    return tuple(int(x) for x in perm[best]), tuple(int(x) for x in choice[best]), float(fit[best])


def ga_route(partitions, candidates: Sequence[Sequence[SweepCandidate]], config: GAConfig,
             start: Optional[Point] = None) -> GlobalPlan:
    """GA router; turn weight ``config.lambda_turns`` plays the role of rho."""
    if len(candidates) != len(partitions):
        raise ValueError("one candidate list per partition is required")
    problem = RoutingProblem.from_candidates(candidates, CostParams(config.lambda_turns))
    order, choices, fit = ga_search(problem, config, start)
    return _plan(problem, candidates, order, choices, "ga",
                 {"ga_fitness": fit, "generations": config.generations, "population": config.population}, start)


def route(partitions, candidates, params: CostParams, method: str = "dp",
          ga_config: Optional[GAConfig] = None, limit: int = DEFAULT_EXACT_LIMIT,
          start: Optional[Point] = None) -> GlobalPlan:
    """Dispatch to the exact DP, falling back to the GA above ``limit`` partitions."""
    if method == "dp" and len(partitions) <= limit:
        return held_karp(partitions, candidates, params, limit=limit, start=start)
    if method not in ("dp", "ga"):
        raise ValueError(f"unknown routing method {method!r}")
    if ga_config is None:
        ga_config = GAConfig(seed=0, lambda_turns=params.rho)
    plan = ga_route(partitions, candidates, ga_config, start=start)
    if method == "dp":
        plan.stats["fallback"] = f"{len(partitions)} partitions > exact limit {limit}"
    return plan


def row_tracks(region: CellRegion) -> list[tuple[Point, Point]]:
    """Undecomposed horizontal track set: one centred segment per occupied row run."""
    g = region.grid
    w = g.cell_size
    mask, c0, r0 = region.mask()
    tracks = []
    for r in range(mask.shape[0]):
        row = np.concatenate([[False], mask[r], [False]]).astype(np.int8)
        d = np.diff(row)
        y = g.y(r0 + r + 0.5)
        for s, e in zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1)):
            tracks.append(((g.x(c0 + s), y), (g.x(c0 + e), y)))
    return tracks


def nn_baseline(region: CellRegion, params: CostParams) -> GlobalPlan:
    """Greedy nearest-endpoint chaining of the undecomposed row tracks.

    Starts at the lowest-leftmost endpoint; after each track, jumps to the
    closest endpoint of any unvisited track and sweeps it to the other end.
    ``choices[k]`` is 1 when track ``k`` was flown right to left.
    """
    tracks = row_tracks(region)
    if not tracks:
        raise ValueError("region has no cells")
    ends = np.array([[a, b] for a, b in tracks], dtype=float)  # (S, 2 endpoints, 2)
    S = len(tracks)
    flat = ends.reshape(-1, 2)
    first = min(range(2 * S), key=lambda k: (flat[k, 1], flat[k, 0], k))
    visited = np.zeros(S, dtype=bool)
    order, choices = [], [0] * S
    legs = []
    k = first
    while True:
        t, side = divmod(k, 2)
        visited[t] = True
        order.append(t)
        choices[t] = side
        a, b = tracks[t]
        legs.append([a, b] if side == 0 else [b, a])
        if visited.all():
            break
        here = legs[-1][-1]
        d = np.hypot(flat[:, 0] - here[0], flat[:, 1] - here[1])
        d[np.repeat(visited, 2)] = np.inf
        k = int(np.argmin(d))
    pts, conns = stitch(legs)
    cost = polyline_length(pts) + params.rho * count_turns(pts)
    return GlobalPlan(tuple(order), tuple(choices), cost, tuple(pts), tuple(conns), (), "nn",
                      {"tracks": S})
