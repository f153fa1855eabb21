"""Directed Collective Influence (CI_out) ranking by iterative removal.

For a node ``i`` with out-degree ``k(i)``::

    CI(i) = (k(i) - 1) * sum_{j at out-distance exactly ell, k(j) > 0} (k(j) - 1)

and ``CI(i) = 0`` when ``k(i) = 0``. The highest-CI node (ties: larger
out-degree, then smaller user id) is removed, the CI of every node within
``ell + 1`` reverse hops of it is recomputed, and so on until the largest
weakly connected component holds at most ``stop_fraction * N`` nodes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .graph import DiffusionGraph

TIE_BREAK = "max_ci,max_kout,min_user_id"


@dataclass(frozen=True)
class CiParams:
    ell: int = 2
    stop_fraction: float = 0.01
    tie_break: str = TIE_BREAK
    # continue the ranking past the stop point, by residual out-degree,
    # until it has this many entries (None: stop at the percolation point)
    extend_to: int | None = None

    def __post_init__(self):
        if self.ell < 1:
            raise ValueError("ell must be >= 1")
        if not 0 < self.stop_fraction < 1:
            raise ValueError("stop_fraction must lie in (0, 1)")
        if self.tie_break != TIE_BREAK:
            raise ValueError(f"unsupported tie_break {self.tie_break!r}")
        if self.extend_to is not None and self.extend_to < 0:
            raise ValueError("extend_to must be non-negative")


@dataclass(frozen=True)
class RankEntry:
    user_id: int
    ci_value: int
    removal_step: int | None  # None for post-percolation entries
    post_percolation: bool = False


@dataclass(frozen=True)
class CiRanking:
    entries: list[RankEntry]
    gc_trajectory: list[int]  # largest WCC after 0, 1, ... CI removals
    params: CiParams = field(default_factory=CiParams)
    n_nodes: int = 0

    @property
    def user_ids(self) -> list[int]:
        return [e.user_id for e in self.entries]

    def top(self, n: int) -> list[int]:
        return self.user_ids[:n]

    def __len__(self) -> int:
        return len(self.entries)


def ci_out(graph: DiffusionGraph, user_id: int, ell: int = 2) -> int:
    i = graph.index_of(user_id)
    alive = np.ones(graph.n_nodes, dtype=np.uint8)
    return int(_kernels.ci_values(graph.out_ptr, graph.out_idx, graph.k_out, alive, ell, [i])[0])


def ci_all(graph: DiffusionGraph, ell: int = 2) -> np.ndarray:
    """CI_out of every node, in node-index order."""
    alive = np.ones(graph.n_nodes, dtype=np.uint8)
    nodes = np.arange(graph.n_nodes, dtype=np.int64)
    return _kernels.ci_values(graph.out_ptr, graph.out_idx, graph.k_out, alive, ell, nodes)


def rank_influencers(graph: DiffusionGraph, params: CiParams | None = None) -> CiRanking:
    params = params or CiParams()
    n = graph.n_nodes
    if n == 0:
        return CiRanking([], [0], params, 0)
    gc_limit = int(np.floor(params.stop_fraction * n))
    check_every = max(1, n // 200)
    order, values = _kernels.ci_removal(
        graph.out_ptr, graph.out_idx, graph.in_ptr, graph.in_idx, params.ell, gc_limit, check_every
    )
    traj = _kernels.gc_trajectory(graph.out_ptr, graph.out_idx, graph.in_ptr, graph.in_idx, order)
    below = np.flatnonzero(traj <= gc_limit)
    stop = int(below[0]) if below.size else len(order)
    order, values = order[:stop], values[:stop]
    ids = graph.node_ids
    entries = [
        RankEntry(int(ids[v]), int(c), step)
        for step, (v, c) in enumerate(zip(order.tolist(), values.tolist()), start=1)
    ]
    if params.extend_to is not None and len(entries) < params.extend_to:
        entries.extend(_post_percolation(graph, order, params, params.extend_to - len(entries)))
    return CiRanking(entries, traj[: stop + 1].tolist(), params, n)


def _post_percolation(graph: DiffusionGraph, removed: np.ndarray, params: CiParams, count: int) -> list[RankEntry]:
    alive = np.ones(graph.n_nodes, dtype=np.uint8)
    alive[removed] = 0
    src = np.repeat(np.arange(graph.n_nodes), graph.k_out)
    kout = np.bincount(src, weights=alive[graph.out_idx], minlength=graph.n_nodes).astype(np.int64)
    rest = np.flatnonzero(alive)
    ci = _kernels.ci_values(graph.out_ptr, graph.out_idx, kout, alive, params.ell, rest)
    keys = np.lexsort((rest, -kout[rest]))[:count]
    return [
        RankEntry(int(graph.node_ids[rest[k]]), int(ci[k]), None, True)
        for k in keys.tolist()
    ]


def affected_by_removal(graph: DiffusionGraph, user_id: int, ell: int = 2) -> set[int]:
    """Users whose CI may change when ``user_id`` is removed."""
    r = graph.index_of(user_id)
    seen = {r}
    frontier = [r]
    for _ in range(ell + 1):
        nxt = []
        for v in frontier:
            for w in graph.in_idx[graph.in_ptr[v]:graph.in_ptr[v + 1]].tolist():
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    seen.discard(r)
    return {int(graph.node_ids[v]) for v in seen}


RANKING_COLUMNS = ["rank", "user_id", "ci_value", "removal_step", "post_percolation"]


def write_ranking(ranking: CiRanking, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RANKING_COLUMNS)
        for rank, e in enumerate(ranking.entries, start=1):
            w.writerow([
                rank, e.user_id, e.ci_value,
                "" if e.removal_step is None else e.removal_step, int(e.post_percolation),
            ])


def ranking_metadata(ranking: CiRanking) -> dict:
    n_ci = sum(1 for e in ranking.entries if not e.post_percolation)
    return {
        "ell": ranking.params.ell,
        "stop_fraction": ranking.params.stop_fraction,
        "tie_break": ranking.params.tie_break,
        "n_nodes": ranking.n_nodes,
        "ci_removals": n_ci,
        "post_percolation_entries": len(ranking.entries) - n_ci,
        "final_giant_component": ranking.gc_trajectory[-1],
        "backend": _kernels.BACKEND,
    }


def read_ranking(path: str | Path) -> list[int]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [int(row["user_id"]) for row in csv.DictReader(fh)]
