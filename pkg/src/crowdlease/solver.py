"""Service-migration solvers.

``optimal_service_migration`` walks every candidate set (one migration vector
per migratable bundle) and trims each with an exact 0-1 knapsack;
``online_service_migration`` replaces the knapsack with a greedy scan over
vectors sorted by degradation per unit of saving.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .cost import Assignment, ContractError, lease_max, make_assignment, save_min
from .graph import MigrationGraph, MigrationVector, build_migration_graph
from .model import Scenario, top_k_index, top_site

log = logging.getLogger(__name__)

DP_CELL_LIMIT = 10**7
CANDIDATE_LIMIT = 10**6


class SolverLimitError(RuntimeError):
    """The instance exceeds a configured enumeration guard."""


@dataclass(frozen=True)
class MigrationSolution:
    chosen: tuple[MigrationVector, ...]
    objective: float
    feasible: bool
    candidate_count: int = 0

    @property
    def total_save(self) -> int:
        return sum(v.save for v in self.chosen)

    @property
    def keys(self) -> list[tuple[str, str]]:
        return sorted(v.key for v in self.chosen)


def vector_value(v: MigrationVector, p: float, q: float, lmax: int) -> float:
    """Contribution of one migration to the objective (negative is good)."""
    return q * v.deg - p * v.save / lmax


def solution_objective(chosen: Iterable[MigrationVector], p: float, q: float, lmax: int) -> float:
    ordered = sorted(chosen, key=lambda v: v.key)
    return math.fsum(vector_value(v, p, q, lmax) for v in ordered)


def enumerate_candidate_sets(g: MigrationGraph) -> Iterator[tuple[MigrationVector, ...]]:
    """Every way of picking one vector for each bundle that has any.

    Bundles never receive edges and the site backbone follows a strict price
    order, so each pick is acyclic: these are the spanning structures the
    optimum must lie in.
    """
    groups = [vs for _, vs in sorted(g.vectors_by_bundle().items())]
    yield from itertools.product(*groups)


def candidate_count(g: MigrationGraph) -> int:
    return math.prod(len(vs) for vs in g.vectors_by_bundle().values())


def _knapsack_dp(weights: list[int], values: list[float], capacity: int) -> list[int]:
    n = len(weights)
    best = np.zeros(capacity + 1)
    take = np.zeros((n, capacity + 1), dtype=bool)
    for i, (w, val) in enumerate(zip(weights, values)):
        if w > capacity:
            continue
        with_item = best[:-w] + val
        improve = with_item > best[w:]
        take[i, w:] = improve
        best[w:] = np.where(improve, with_item, best[w:])
    picked = []
    c = capacity
    for i in range(n - 1, -1, -1):
        if take[i, c]:
            picked.append(i)
            c -= weights[i]
    return picked[::-1]


def _knapsack_bnb(weights: list[int], values: list[float], capacity: int) -> list[int]:
    order = sorted(range(len(weights)), key=lambda i: -values[i] / weights[i])
    w = [weights[i] for i in order]
    v = [values[i] for i in order]
    n = len(w)
    best_val = 0.0
    best_set: list[int] = []

    def bound(i: int, room: int, acc: float) -> float:
        for j in range(i, n):
            if w[j] <= room:
                room -= w[j]
                acc += v[j]
            else:
                return acc + v[j] * room / w[j]
        return acc

    def dfs(i: int, room: int, acc: float, chosen: list[int]):
        nonlocal best_val, best_set
        if acc > best_val:
            best_val, best_set = acc, list(chosen)
        if i == n or bound(i, room, acc) <= best_val:
            return
        if w[i] <= room:
            chosen.append(i)
            dfs(i + 1, room - w[i], acc + v[i], chosen)
            chosen.pop()
        dfs(i + 1, room, acc, chosen)

    dfs(0, capacity, 0.0, [])
    return sorted(order[i] for i in best_set)


def knapsack_exclude(
    items: Sequence[MigrationVector],
    capacity: int,
    p: float,
    q: float,
    lmax: int,
    cell_limit: int = DP_CELL_LIMIT,
) -> list[MigrationVector]:
    """Subset of ``items`` to drop: max total value, total saving <= capacity.

    Only items whose value is positive (they worsen the objective) are ever
    dropped.
    """
    if capacity <= 0:
        return []
    worth = [(v, vector_value(v, p, q, lmax)) for v in items]
    worth = [(v, val) for v, val in worth if val > 0]
    if not worth:
        return []
    weights = [v.save for v, _ in worth]
    if sum(weights) <= capacity:
        return [v for v, _ in worth]
    values = [val for _, val in worth]
    if len(worth) * (capacity + 1) <= cell_limit:
        picked = _knapsack_dp(weights, values, capacity)
    else:
        log.debug("knapsack table too large, using branch and bound")
        picked = _knapsack_bnb(weights, values, capacity)
    return [worth[i][0] for i in picked]


def _better(obj: float, keys: list, best: MigrationSolution | None) -> bool:
    if best is None or obj < best.objective:
        return True
    return obj == best.objective and keys < best.keys


def _check_preference_constraint(s: Scenario, cand: Sequence[MigrationVector]):
    for v in cand:
        assert v.target in top_k_index(s, v.bundle), v


def _guard(g: MigrationGraph, limit: int) -> int:
    n = candidate_count(g)
    if n > limit:
        raise SolverLimitError(f"{n} candidate sets exceed the limit of {limit}")
    return n


def optimal_service_migration(
    s: Scenario,
    g: MigrationGraph | None = None,
    candidate_limit: int = CANDIDATE_LIMIT,
    cell_limit: int = DP_CELL_LIMIT,
) -> MigrationSolution:
    if g is None:
        g = build_migration_graph(s)
    n = _guard(g, candidate_limit)
    lmax = lease_max(s)
    if lmax <= 0:
        return MigrationSolution((), math.inf, False, n)
    need = save_min(s)
    best = None
    for cand in enumerate_candidate_sets(g):
        _check_preference_constraint(s, cand)
        total = sum(v.save for v in cand)
        if total < need:
            continue
        dropped = knapsack_exclude(cand, total - need, s.p, s.q, lmax, cell_limit)
        drop_keys = {v.key for v in dropped}
        chosen = tuple(sorted((v for v in cand if v.key not in drop_keys), key=lambda v: v.key))
        obj = solution_objective(chosen, s.p, s.q, lmax)
        if _better(obj, sorted(v.key for v in chosen), best):
            best = MigrationSolution(chosen, obj, True, n)
    if best is None:
        return MigrationSolution((), math.inf, False, n)
    return best


def greedy_select(
    cand: Sequence[MigrationVector], need: int, p: float, q: float, lmax: int
) -> tuple[MigrationVector, ...]:
    """Scan by degradation per cent saved; keep a vector if it pays off or the budget still needs it."""
    ranked = sorted(cand, key=lambda v: (v.deg / v.save, v.bundle, v.target))
    picked = []
    total = 0
    for v in ranked:
        if vector_value(v, p, q, lmax) < 0 or total < need:
            picked.append(v)
            total += v.save
    return tuple(sorted(picked, key=lambda v: v.key))


def online_service_migration(
    s: Scenario,
    g: MigrationGraph | None = None,
    candidate_limit: int = CANDIDATE_LIMIT,
) -> MigrationSolution:
    if g is None:
        g = build_migration_graph(s)
    n = _guard(g, candidate_limit)
    lmax = lease_max(s)
    if lmax <= 0:
        return MigrationSolution((), math.inf, False, n)
    need = save_min(s)
    best = None
    for cand in enumerate_candidate_sets(g):
        _check_preference_constraint(s, cand)
        picked = greedy_select(cand, need, s.p, s.q, lmax)
        if sum(v.save for v in picked) < need:
            continue
        obj = solution_objective(picked, s.p, s.q, lmax)
        if _better(obj, [v.key for v in picked], best):
            best = MigrationSolution(picked, obj, True, n)
    if best is None:
        return MigrationSolution((), math.inf, False, n)
    return best


def max_saving_solution(g: MigrationGraph) -> tuple[MigrationVector, ...]:
    """Largest-saving vector for every migratable bundle.

    Used as a best-effort placement when no migration meets the budget.
    """
    return tuple(
        min(vs, key=lambda v: (-v.save, v.target))
        for _, vs in sorted(g.vectors_by_bundle().items())
    )


def served_by_after(s: Scenario, chosen: Iterable[MigrationVector]) -> dict[str, str]:
    served = {b.region: top_site(s, b.region) for b in s.active_bundles}
    for v in chosen:
        served[v.bundle] = v.target
    return served


def apply_migration(s: Scenario, sol: MigrationSolution) -> Assignment:
    if not sol.feasible:
        raise ContractError("cannot apply an infeasible migration solution")
    return make_assignment(s, served_by_after(s, sol.chosen))
