"""Directed retweet networks and their structural statistics."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Collection, Iterable

import numpy as np

from . import _kernels
from .ingest import Category, MediaCatalog, TweetRecord


class GraphError(ValueError):
    pass


def _csr(n: int, src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((dst, src))
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(ptr, src + 1, 1)
    np.cumsum(ptr, out=ptr)
    return ptr, np.ascontiguousarray(dst[order], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class DiffusionGraph:
    """Simple directed graph over user ids; edge (v, u) means u retweeted v.

    Node ids are stored sorted, so node index order equals user id order.
    """

    node_ids: np.ndarray
    out_ptr: np.ndarray
    out_idx: np.ndarray
    in_ptr: np.ndarray
    in_idx: np.ndarray

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], nodes: Iterable[int] = ()) -> DiffusionGraph:
        pairs = {(int(v), int(u)) for v, u in edges if v != u}
        ids = sorted({x for e in pairs for x in e} | {int(x) for x in nodes})
        node_ids = np.array(ids, dtype=np.int64)
        if pairs:
            arr = np.array(sorted(pairs), dtype=np.int64)
            src = np.searchsorted(node_ids, arr[:, 0])
            dst = np.searchsorted(node_ids, arr[:, 1])
        else:
            src = dst = np.zeros(0, dtype=np.int64)
        n = len(ids)
        out_ptr, out_idx = _csr(n, src, dst)
        in_ptr, in_idx = _csr(n, dst, src)
        return cls(node_ids, out_ptr, out_idx, in_ptr, in_idx)

    @property
    def n_nodes(self) -> int:
        return int(self.node_ids.shape[0])

    @property
    def n_edges(self) -> int:
        return int(self.out_idx.shape[0])

    @property
    def k_out(self) -> np.ndarray:
        return np.diff(self.out_ptr)

    @property
    def k_in(self) -> np.ndarray:
        return np.diff(self.in_ptr)

    def index_of(self, user_id: int) -> int:
        i = int(np.searchsorted(self.node_ids, user_id))
        if i >= self.n_nodes or self.node_ids[i] != user_id:
            raise KeyError(user_id)
        return i

    def __contains__(self, user_id: int) -> bool:
        try:
            self.index_of(user_id)
        except KeyError:
            return False
        return True

    def edges(self) -> list[tuple[int, int]]:
        src = np.repeat(np.arange(self.n_nodes), self.k_out)
        return list(zip(self.node_ids[src].tolist(), self.node_ids[self.out_idx].tolist()))

    def successors(self, user_id: int) -> list[int]:
        i = self.index_of(user_id)
        return self.node_ids[self.out_idx[self.out_ptr[i]:self.out_ptr[i + 1]]].tolist()

    def predecessors(self, user_id: int) -> list[int]:
        i = self.index_of(user_id)
        return self.node_ids[self.in_idx[self.in_ptr[i]:self.in_ptr[i + 1]]].tolist()


def build_retweet_graph(
    records: Iterable[TweetRecord],
    category: Category | str | Collection[Category | str],
    catalog: MediaCatalog,
) -> DiffusionGraph:
    """Retweet network of one category (or a union of categories).

    A retweet contributes the edge retweeted author -> retweeter when at
    least one of its hostnames belongs to the category. Duplicate edges
    collapse and self-retweets are dropped.
    """
    if isinstance(category, (str, Category)):
        wanted = {Category(category)}
    else:
        wanted = {Category(c) for c in category}
    edges = set()
    for rec in records:
        if rec.retweeted_author_id is None or rec.retweeted_author_id == rec.author_id:
            continue
        if any(catalog.entries.get(h) in wanted for h in rec.hostnames):
            edges.add((rec.retweeted_author_id, rec.author_id))
    return DiffusionGraph.from_edges(edges)


@dataclass(frozen=True)
class DegreeStats:
    n_nodes: int
    n_edges: int
    mean_degree: float
    max_k_out: int
    max_k_in: int
    het_out: float
    het_out_se: float
    het_in: float
    het_in_se: float


def _heterogeneity(degrees: np.ndarray, mean_k: float, n_samples: int, sample_size: int, rng) -> tuple[float, float]:
    # Sampling with replacement from the empirical distribution only needs the
    # count of each distinct degree value, so draw multinomial counts.
    values, counts = np.unique(degrees, return_counts=True)
    probs = counts / counts.sum()
    draws = rng.multinomial(sample_size, probs, size=n_samples).astype(np.float64)
    v = values.astype(np.float64)
    mean = draws @ v / sample_size
    var = draws @ (v * v) / sample_size - mean * mean
    ratios = np.sqrt(np.maximum(var, 0.0)) / mean_k
    se = ratios.std(ddof=1) / np.sqrt(n_samples) if n_samples > 1 else 0.0
    return float(ratios.mean()), float(se)


def degree_stats(
    graph: DiffusionGraph, n_samples: int = 1000, sample_size: int = 200_000, seed: int = 0
) -> DegreeStats:
    """Size, mean degree, degree maxima and subsampled sigma(k)/<k>.

    The heterogeneity ratios are the mean and standard error over
    ``n_samples`` samples of ``sample_size`` degrees drawn with replacement;
    the denominator is the full-graph mean degree.
    """
    if graph.n_nodes == 0:
        raise GraphError("degree statistics of an empty graph")
    mean_k = graph.n_edges / graph.n_nodes
    if mean_k == 0:
        raise GraphError("mean degree is zero; heterogeneity undefined")
    if n_samples < 1 or sample_size < 1:
        raise GraphError("n_samples and sample_size must be positive")
    rng_out, rng_in = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    het_out, se_out = _heterogeneity(graph.k_out, mean_k, n_samples, sample_size, rng_out)
    het_in, se_in = _heterogeneity(graph.k_in, mean_k, n_samples, sample_size, rng_in)
    return DegreeStats(
        n_nodes=graph.n_nodes,
        n_edges=graph.n_edges,
        mean_degree=mean_k,
        max_k_out=int(graph.k_out.max()),
        max_k_in=int(graph.k_in.max()),
        het_out=het_out,
        het_out_se=se_out,
        het_in=het_in,
        het_in_se=se_in,
    )


@dataclass(frozen=True, eq=False)
class ComponentView:
    labels: np.ndarray  # per node index, numbered by first node
    sizes: np.ndarray  # per label

    @property
    def n_components(self) -> int:
        return int(self.sizes.shape[0])

    @property
    def giant_size(self) -> int:
        return int(self.sizes.max()) if self.sizes.size else 0


def weakly_connected_components(graph: DiffusionGraph) -> ComponentView:
    labels = _kernels.wcc_labels(graph.n_nodes, graph.out_ptr, graph.out_idx)
    sizes = np.bincount(labels, minlength=int(labels.max()) + 1 if labels.size else 0)
    return ComponentView(labels, sizes)


# -- I/O ----------------------------------------------------------------------

def write_edge_list(graph: DiffusionGraph, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src_user_id", "dst_user_id"])
        w.writerows(graph.edges())


def read_edge_list(path: str | Path) -> DiffusionGraph:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["src_user_id", "dst_user_id"]:
            raise GraphError(f"{path}: expected header src_user_id,dst_user_id")
        try:
            edges = [(int(a), int(b)) for a, b in reader]
        except ValueError as exc:
            raise GraphError(f"{path}: bad edge row ({exc})") from None
    return DiffusionGraph.from_edges(edges)


STATS_COLUMNS = [
    "group", "n_nodes", "n_edges", "mean_degree", "het_out", "het_out_se",
    "het_in", "het_in_se", "max_k_out", "max_k_in",
]


def stats_row(group: str, s: DegreeStats) -> list:
    return [
        group, s.n_nodes, s.n_edges, repr(s.mean_degree), repr(s.het_out), repr(s.het_out_se),
        repr(s.het_in), repr(s.het_in_se), s.max_k_out, s.max_k_in,
    ]


def write_stats(rows: Iterable[tuple[str, DegreeStats]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STATS_COLUMNS)
        for group, s in rows:
            w.writerow(stats_row(group, s))
