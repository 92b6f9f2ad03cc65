"""Shared fixtures and independent brute-force oracles."""

import itertools
import math
from collections import deque

import numpy as np

from covplan.decompose import single_partition
from covplan.roi import CellRegion, GridSpec
from covplan.router import RoutingProblem
from covplan.sweep import SweepCandidate, candidates


def region(cells, cols=None, rows=None, w=1.0):
    cells = set(cells)
    cols = cols or max(c for c, _ in cells) + 1
    rows = rows or max(r for _, r in cells) + 1
    return CellRegion.from_cells(cells, GridSpec((0.0, 0.0), w, cols, rows))


def from_art(art: str, w=1.0):
    """ASCII picture, top line is the highest row; '#' marks a cell."""
    lines = [ln for ln in art.strip("\n").splitlines()]
    h = len(lines)
    cells = {(c, h - 1 - r) for r, ln in enumerate(lines) for c, ch in enumerate(ln) if ch == "#"}
    return region(cells, max(len(ln) for ln in lines), h, w)


def rect(cols, rows, w=1.0):
    return region({(c, r) for c in range(cols) for r in range(rows)}, cols, rows, w)


def u_shape(w=1.0):
    return region({(c, r) for c in range(3) for r in range(3)} - {(1, 1), (1, 2)}, 3, 3, w)


def ring(w=1.0):
    return region({(c, r) for c in range(3) for r in range(3)} - {(1, 1)}, 3, 3, w)


def random_cells(rng, cols=None, rows=None, density=None):
    cols = cols or int(rng.integers(1, 9))
    rows = rows or int(rng.integers(1, 9))
    density = density if density is not None else rng.uniform(0.3, 0.95)
    mask = rng.random((rows, cols)) < density
    if not mask.any():
        mask[rng.integers(rows), rng.integers(cols)] = True
    cells = {(c, r) for r in range(rows) for c in range(cols) if mask[r, c]}
    return region(cells, cols, rows)


def flood_components(cells):
    """Plain BFS 4-connected components."""
    left, out = set(cells), []
    while left:
        seed = min(left)
        comp, q = {seed}, deque([seed])
        left.discard(seed)
        while q:
            c, r = q.popleft()
            for nb in ((c + 1, r), (c - 1, r), (c, r + 1), (c, r - 1)):
                if nb in left:
                    left.discard(nb)
                    comp.add(nb)
                    q.append(nb)
        out.append(frozenset(comp))
    return out


def runs_per_line(cells, axis):
    """{line index: sorted list of (first, last) occupied runs}."""
    lines = {}
    for c, r in cells:
        key, pos = (r, c) if axis == "horizontal" else (c, r)
        lines.setdefault(key, []).append(pos)
    out = {}
    for key, ps in lines.items():
        ps = sorted(ps)
        runs, start = [], ps[0]
        for a, b in zip(ps, ps[1:]):
            if b != a + 1:
                runs.append((start, a))
                start = b
        runs.append((start, ps[-1]))
        out[key] = runs
    return out


def oracle_monotone(cells, axis):
    """Every line across the bounding box meets exactly one run (empty lines count as zero)."""
    per_line = runs_per_line(cells, axis)
    return all(len(per_line.get(k, ())) == 1 for k in range(min(per_line), max(per_line) + 1))


def oracle_gap(cells, axis, w=1.0):
    total = 0.0
    for runs in runs_per_line(cells, axis).values():
        total += sum((b[0] - a[1] - 1) * w for a, b in zip(runs, runs[1:]))
    return total


def random_problem(rng, n_max=7, m_max=4, span=100.0):
    N = int(rng.integers(1, n_max + 1))
    sizes = tuple(int(x) for x in rng.integers(1, m_max + 1, N))
    K = sum(sizes)
    return RoutingProblem(sizes, rng.uniform(5, 50, K), rng.uniform(0, span, (K, 2)),
                          rng.uniform(0, span, (K, 2)))


def problem_candidates(problem: RoutingProblem, rho=0.0):
    """SweepCandidate lists that reproduce ``problem`` exactly when rho == 0."""
    out, k = [], 0
    for i, m in enumerate(problem.sizes):
        cs = []
        for _ in range(m):
            e, x = tuple(map(float, problem.entries[k])), tuple(map(float, problem.exits[k]))
            cs.append(SweepCandidate(i, "horizontal", "BL", (e, x), float(problem.costs[k]), 0))
            k += 1
        out.append(cs)
    return out


def exhaustive(problem: RoutingProblem, start=None):
    """Enumerate every (order, choices); returns the lexicographically first optimum.

    Choices vectors are enumerated with numpy per permutation to keep N=7, M=4
    (5040 * 4^7 plans) tractable.
    """
    N = problem.n
    off = problem.offsets
    D = problem.connector_matrix()
    grids = np.array(list(itertools.product(*[range(m) for m in problem.sizes])), dtype=np.int64)
    best, arg = math.inf, None
    for perm in itertools.permutations(range(N)):
        nodes = off[list(perm)] + grids[:, list(perm)]
        f = problem.costs[nodes].sum(axis=1)
        for t in range(N - 1):
            f = f + D[nodes[:, t], nodes[:, t + 1]]
        if start is not None:
            f = f + np.hypot(problem.entries[nodes[:, 0], 0] - start[0], problem.entries[nodes[:, 0], 1] - start[1])
        k = int(np.argmin(f))
        if arg is None or f[k] < best - 1e-9 * max(1.0, best):
            best, arg = float(f[k]), (perm, tuple(int(x) for x in grids[k]))
    return best, arg


def rect_partition(c0, r0, cols, rows, grid):
    reg = CellRegion.from_cells({(c, r) for c in range(c0, c0 + cols) for r in range(r0, r0 + rows)}, grid)
    return single_partition(reg).partitions[0]


def rect_candidates(rng, n, grid=GridSpec((0.0, 0.0), 10.0, 60, 60)):
    parts, cands = [], []
    for i in range(n):
        c0, r0 = (int(x) for x in rng.integers(0, 50, 2))
        w, h = (int(x) for x in rng.integers(1, 8, 2))
        p = rect_partition(c0, r0, w, h, grid)
        parts.append(p)
        cands.append(candidates(p))
    return parts, cands
