"""Exact Wasserstein-1 solvers and curvature assembly.

Every solver here runs its combinatorial core in exact rational
arithmetic: float inputs are lifted to Fractions (floats are dyadic
rationals, so this is lossless), solved exactly, and converted back on
output. That makes the cross-solver identities equality-based.

Solvers:
  w1_lp           general transport LP as an integral min-cost flow
                  (supplies/demands scaled by p*q, successive shortest
                  augmenting paths with potentials)
  w1_tree         decomposable-cost closed form for tree graphs
  w1_assignment   exact Hungarian assignment for the p = q case
  w1_bruteforce   exhaustive permutation minimum (oracle, p <= 9)
  lp_vertex_oracle  minimum over all basic feasible solutions of the
                  transportation polytope, via spanning trees of the
                  complete bipartite support graph (oracle, p + q <= 9)
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import (
    EmptyNeighborhood,
    InfiniteCost,
    MethodMismatch,
    NonSquare,
    NotATree,
    TooLarge,
)
from .graph import Graph, LocalNeighborhood, Weight, verify_tree

CLASSICAL_METHODS = ("lp", "tree", "assignment", "brute_force")
QSIM_METHODS = ("qsim_tree", "qsim_pq")
ALL_METHODS = CLASSICAL_METHODS + QSIM_METHODS

_BRUTE_FORCE_CAP = 9
_VERTEX_ORACLE_CAP = 9


# --------------------------------------------------------------------------
# result types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TransportPlan:
    """Optimal transport plan gamma with uniform marginals 1/p and 1/q."""

    p: int
    q: int
    gamma: tuple[tuple[Fraction, ...], ...]
    cost_value: Weight

    def __post_init__(self) -> None:
        for i in range(self.p):
            if sum(self.gamma[i]) != Fraction(1, self.p):
                raise AssertionError(f"row {i} marginal violated")
        for j in range(self.q):
            if sum(row[j] for row in self.gamma) != Fraction(1, self.q):
                raise AssertionError(f"column {j} marginal violated")
        if any(x < 0 for row in self.gamma for x in row):
            raise AssertionError("negative transport mass")


@dataclass(frozen=True)
class AssignmentSolution:
    """Optimal permutation for a square instance; cost_value = min / p."""

    p: int
    pi: tuple[int, ...]
    cost_value: Weight

    def __post_init__(self) -> None:
        if sorted(self.pi) != list(range(self.p)):
            raise AssertionError("pi is not a permutation")


@dataclass(frozen=True)
class CurvatureResult:
    """Edge curvature 1 - W1/d_G(x, y) with consistent companion fields."""

    x: int | None
    y: int | None
    w1: Weight
    dxy: Weight
    curvature: Weight
    method: str
    diagnostics: object = None

    def __post_init__(self) -> None:
        if self.method not in ALL_METHODS:
            raise MethodMismatch(f"unknown method {self.method!r}")
        if not self.dxy > 0:
            raise AssertionError("dxy must be positive")
        if self.w1 < 0:
            raise AssertionError("w1 must be nonnegative")
        expected = 1 - self.w1 / self.dxy
        if isinstance(self.curvature, float) or isinstance(expected, float):
            if abs(self.curvature - expected) > 1e-12 * max(1.0, abs(float(expected))):
                raise AssertionError("curvature inconsistent with w1/dxy")
        elif self.curvature != expected:
            raise AssertionError("curvature inconsistent with w1/dxy")

    @classmethod
    def from_w1(cls, w1: Weight, dxy: Weight, method: str,
                x: int | None = None, y: int | None = None,
                diagnostics: object = None) -> "CurvatureResult":
        return cls(x=x, y=y, w1=w1, dxy=dxy, curvature=1 - w1 / dxy,
                   method=method, diagnostics=diagnostics)


# --------------------------------------------------------------------------
# numeric-mode helpers
# --------------------------------------------------------------------------

def _exact(v: Weight) -> Fraction | int:
    """Lossless lift to exact arithmetic (floats are dyadic rationals)."""
    if isinstance(v, float):
        if not math.isfinite(v):
            raise InfiniteCost(f"cost entry {v!r} is not finite")
        return Fraction(v)
    return v


def _exact_matrix(cost: Sequence[Sequence[Weight]]) -> list[list[Fraction | int]]:
    return [[_exact(x) for x in row] for row in cost]


def _all_rational(values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


def _emit(value: Fraction | int, rational: bool) -> Weight:
    return value if rational else float(value)


def _lcm_denominator(rows: list[list[Fraction | int]]) -> int:
    den = 1
    for row in rows:
        for x in row:
            if isinstance(x, Fraction):
                den = den * x.denominator // math.gcd(den, x.denominator)
    return den


# --------------------------------------------------------------------------
# min-cost flow (general LP route)
# --------------------------------------------------------------------------

class _MinCostFlow:
    """Successive shortest augmenting paths with Johnson potentials.

    Integer capacities and costs only; with nonnegative costs the
    potentials keep all reduced costs nonnegative, so plain Dijkstra
    applies and the arithmetic stays exact.
    """

    def __init__(self, n: int) -> None:
        self.n = n
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []
        self.cost: list[int] = []

    def add(self, u: int, v: int, cap: int, cost: int) -> int:
        idx = len(self.to)
        self.head[u].append(idx)
        self.to.append(v)
        self.cap.append(cap)
        self.cost.append(cost)
        self.head[v].append(idx + 1)
        self.to.append(u)
        self.cap.append(0)
        self.cost.append(-cost)
        return idx

    def run(self, s: int, t: int, target_flow: int) -> int:
        n = self.n
        potential = [0] * n
        flow = 0
        total_cost = 0
        while flow < target_flow:
            dist = [None] * n
            dist[s] = 0
            prev_arc = [-1] * n
            heap = [(0, s)]
            while heap:
                d, u = heapq.heappop(heap)
                if dist[u] is not None and d > dist[u]:
                    continue
                for idx in self.head[u]:
                    if self.cap[idx] <= 0:
                        continue
                    v = self.to[idx]
                    nd = d + self.cost[idx] + potential[u] - potential[v]
                    if dist[v] is None or nd < dist[v]:
                        dist[v] = nd
                        prev_arc[v] = idx
                        heapq.heappush(heap, (nd, v))
            if dist[t] is None:
                raise InfiniteCost("flow network disconnected")  # pragma: no cover
            for v in range(n):
                if dist[v] is not None:
                    potential[v] += dist[v]
            push = target_flow - flow
            v = t
            while v != s:
                idx = prev_arc[v]
                push = min(push, self.cap[idx])
                v = self.to[idx ^ 1]
            v = t
            while v != s:
                idx = prev_arc[v]
                self.cap[idx] -= push
                self.cap[idx ^ 1] += push
                total_cost += push * self.cost[idx]
                v = self.to[idx ^ 1]
            flow += push
        return total_cost


def w1_lp(nb: LocalNeighborhood) -> TransportPlan:
    """Globally optimal transport plan for the uniform-marginal LP.

    Supplies 1/p and demands 1/q are scaled by p*q to integers, solved as
    a min-cost flow, and divided back, so the optimum is exact.
    """
    p, q = nb.p, nb.q
    if any(x == math.inf for row in nb.cost for x in row):
        raise InfiniteCost("cost matrix contains +inf")
    exact_cost = _exact_matrix(nb.cost)
    den = _lcm_denominator(exact_cost)
    int_cost = [[int(x * den) for x in row] for row in exact_cost]

    s, t = 0, p + q + 1
    mcf = _MinCostFlow(p + q + 2)
    for i in range(p):
        mcf.add(s, 1 + i, q, 0)
    mid_arcs = [[mcf.add(1 + i, 1 + p + j, q, int_cost[i][j]) for j in range(q)]
                for i in range(p)]
    for j in range(q):
        mcf.add(1 + p + j, t, p, 0)
    total = mcf.run(s, t, p * q)

    gamma = tuple(
        tuple(Fraction(q - mcf.cap[mid_arcs[i][j]], p * q) for j in range(q))
        for i in range(p)
    )
    value = Fraction(total, den * p * q)
    return TransportPlan(p=p, q=q, gamma=gamma,
                         cost_value=_emit(value, nb.rational))


# --------------------------------------------------------------------------
# tree closed form
# --------------------------------------------------------------------------

def w1_tree(nb: LocalNeighborhood, graph: Graph | None = None) -> Weight:
    """Closed-form W1 for decomposable costs (graph is a tree).

    Returns mean(d(x_i, x)) + d(x, y) + mean(d(y, y_j)). When a graph is
    supplied it is verified to be a tree first; otherwise the caller
    asserts treeness.
    """
    if graph is not None and not verify_tree(graph):
        raise NotATree("w1_tree invoked on a graph that is not a tree")
    if nb.x_dists is None or nb.y_dists is None:
        raise NotATree("tree closed form needs center-to-neighbor distances")
    xs = [_exact(v) for v in nb.x_dists]
    ys = [_exact(v) for v in nb.y_dists]
    value = Fraction(sum(xs), nb.p) + _exact(nb.dxy) + Fraction(sum(ys), nb.q)
    return _emit(value, nb.rational)


# --------------------------------------------------------------------------
# assignment (p = q) routes
# --------------------------------------------------------------------------

def _hungarian(cost: list[list[Fraction | int]]) -> tuple[list[int], Fraction | int]:
    """Exact O(n^3) Hungarian over any ordered exact field.

    Returns (pi, total) where pi[j] is the row assigned to column j and
    total = sum_j cost[pi[j]][j] is minimal.
    """
    n = len(cost)
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    match = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv: list = [math.inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = math.inf
            j1 = -1
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    pi = [match[j + 1] - 1 for j in range(n)]
    total = sum(cost[pi[j]][j] for j in range(n))
    return pi, total


def _lexmin_optimal(cost: list[list[Fraction | int]], total) -> list[int]:
    """Lexicographically smallest permutation attaining the optimum.

    Fixes columns left to right, testing each candidate row by solving
    the remaining assignment exactly.
    """
    n = len(cost)
    remaining = list(range(n))
    pi: list[int] = []
    fixed = 0
    for col in range(n):
        rest_cols = list(range(col + 1, n))
        for r in remaining:
            need = total - fixed - cost[r][col]
            rem_rows = [x for x in remaining if x != r]
            if not rem_rows:
                ok = need == 0
            else:
                sub = [[cost[rr][cc] for cc in rest_cols] for rr in rem_rows]
                _, sub_total = _hungarian(sub)
                ok = sub_total == need
            if ok:
                pi.append(r)
                fixed += cost[r][col]
                remaining.remove(r)
                break
        else:  # pragma: no cover - optimum always completable
            raise AssertionError("no optimal completion found")
    return pi


def _square_exact(cost: Sequence[Sequence[Weight]]) -> list[list[Fraction | int]]:
    p = len(cost)
    if any(len(row) != p for row in cost):
        raise NonSquare("cost matrix must be square")
    if any(isinstance(x, float) and not math.isfinite(x) for row in cost for x in row):
        raise InfiniteCost("cost matrix contains non-finite entries")
    return _exact_matrix(cost)


def w1_assignment(cost: Sequence[Sequence[Weight]]) -> AssignmentSolution:
    """Exact linear assignment via the Hungarian algorithm (p = q route).

    Ties between optimal permutations are broken toward the
    lexicographically smallest one.
    """
    exact_cost = _square_exact(cost)
    p = len(exact_cost)
    _, total = _hungarian(exact_cost)
    pi = _lexmin_optimal(exact_cost, total)
    rational = _all_rational([x for row in cost for x in row])
    return AssignmentSolution(p=p, pi=tuple(pi),
                              cost_value=_emit(Fraction(total, p), rational))


def w1_bruteforce(cost: Sequence[Sequence[Weight]]) -> AssignmentSolution:
    """Exhaustive assignment minimum over all p! permutations (p <= 9)."""
    exact_cost = _square_exact(cost)
    p = len(exact_cost)
    if p > _BRUTE_FORCE_CAP:
        raise TooLarge(f"brute force capped at p <= {_BRUTE_FORCE_CAP}, got {p}")
    best_pi = None
    best = None
    for perm in itertools.permutations(range(p)):
        total = sum(exact_cost[perm[j]][j] for j in range(p))
        if best is None or total < best:
            best = total
            best_pi = perm
    rational = _all_rational([x for row in cost for x in row])
    return AssignmentSolution(p=p, pi=tuple(best_pi),
                              cost_value=_emit(Fraction(best, p), rational))


# --------------------------------------------------------------------------
# transportation-polytope vertex oracle
# --------------------------------------------------------------------------

class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def _tree_flows(edges: tuple[tuple[int, int], ...], p: int, q: int) -> list[tuple[int, int, int]] | None:
    """Integer basic solution on one spanning tree of K_{p,q}.

    Supplies are q per left node and demands p per right node (the LP
    scaled by p*q). Returns None when any flow would go negative.
    """
    n = p + q
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for eid, (i, j) in enumerate(edges):
        adj[i].append((p + j, eid))
        adj[p + j].append((i, eid))
    balance = [q] * p + [-p] * q
    degree = [len(a) for a in adj]
    removed = [False] * len(edges)
    flows = [0] * len(edges)
    leaves = [v for v in range(n) if degree[v] == 1]
    for _ in range(len(edges)):
        v = leaves.pop()
        u, eid = next((u, e) for u, e in adj[v] if not removed[e])
        f = balance[v] if v < p else -balance[v]
        if f < 0:
            return None
        flows[eid] = f
        balance[u] += balance[v]
        balance[v] = 0
        removed[eid] = True
        degree[u] -= 1
        degree[v] -= 1
        if degree[u] == 1:
            leaves.append(u)
    return [(edges[eid][0], edges[eid][1], flows[eid])
            for eid in range(len(edges)) if flows[eid] > 0]


@lru_cache(maxsize=None)
def _basic_solutions(p: int, q: int) -> tuple[tuple[tuple[tuple[int, int, int], ...], ...], int]:
    """All feasible basic solutions of the (p, q) transportation polytope.

    Enumerates every spanning tree of K_{p,q} (edge subsets of size
    p + q - 1 checked with union-find), solves the unique tree flows, and
    keeps the feasible ones, deduplicated. Also returns the spanning-tree
    count, which must equal p^(q-1) * q^(p-1).
    """
    all_edges = [(i, j) for i in range(p) for j in range(q)]
    solutions: set[tuple[tuple[int, int, int], ...]] = set()
    tree_count = 0
    for subset in itertools.combinations(all_edges, p + q - 1):
        uf = _UnionFind(p + q)
        if all(uf.union(i, p + j) for i, j in subset):
            tree_count += 1
            flows = _tree_flows(subset, p, q)
            if flows is not None:
                solutions.add(tuple(sorted(flows)))
    return tuple(sorted(solutions)), tree_count


def spanning_tree_count(p: int, q: int) -> int:
    """Number of spanning trees of K_{p,q} seen by the oracle enumerator."""
    return _basic_solutions(p, q)[1]


def lp_vertex_oracle(nb: LocalNeighborhood) -> Weight:
    """Minimum LP cost over all vertices of the transportation polytope.

    Independent of w1_lp: candidates come from exhaustive spanning-tree
    enumeration, not from any optimization. Guarded at p + q <= 9.
    """
    p, q = nb.p, nb.q
    if p + q > _VERTEX_ORACLE_CAP:
        raise TooLarge(f"vertex oracle capped at p + q <= {_VERTEX_ORACLE_CAP}")
    if any(x == math.inf for row in nb.cost for x in row):
        raise InfiniteCost("cost matrix contains +inf")
    exact_cost = _exact_matrix(nb.cost)
    den = _lcm_denominator(exact_cost)
    int_cost = [[int(x * den) for x in row] for row in exact_cost]
    solutions, _ = _basic_solutions(p, q)
    best = min(sum(f * int_cost[i][j] for i, j, f in sol) for sol in solutions)
    return _emit(Fraction(best, den * p * q), nb.rational)


# --------------------------------------------------------------------------
# curvature assembly
# --------------------------------------------------------------------------

def curvature(nb: LocalNeighborhood, method: str = "lp",
              graph: Graph | None = None) -> CurvatureResult:
    """Edge curvature via the chosen classical W1 route.

    method is one of "lp", "tree", "assignment", "brute_force"; shape
    compatibility (square cost for the assignment routes, tree graph for
    the closed form) is validated up front.
    """
    if method not in CLASSICAL_METHODS:
        raise MethodMismatch(
            f"method {method!r} is not a classical solver; use the qsim pipeline")
    if method == "lp":
        w1 = w1_lp(nb).cost_value
    elif method == "tree":
        w1 = w1_tree(nb, graph=graph)
    elif method in ("assignment", "brute_force"):
        if nb.p != nb.q:
            raise MethodMismatch(
                f"{method} needs p = q, got p={nb.p}, q={nb.q}")
        solver = w1_assignment if method == "assignment" else w1_bruteforce
        w1 = solver(nb.cost).cost_value
    return CurvatureResult.from_w1(w1=w1, dxy=nb.dxy, method=method,
                                   x=nb.x, y=nb.y)
