"""Author interaction network, communities, and region association.

Edges count retweet/quote interactions between authors. Communities
come from greedy modularity optimization (local moves plus graph
aggregation, repeated to a fixed point) with a deterministic sorted
visit order. The region-vs-community association is quantified with a
Pearson chi-square test and Cramér's V; the chi-square survival
function is evaluated in-house by the usual series/continued-fraction
split of the regularized incomplete gamma function (relative accuracy
better than 1e-8 over the tested range).
"""

from __future__ import annotations

import logging
import math
import re
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .ingest import PostRecord, parse_retweet_marker

log = logging.getLogger(__name__)

_MENTION_RE = re.compile(r"@([A-Za-z0-9_]{1,15})")

OTHER_COMMUNITY = "other"
DEFAULT_MIN_COMMUNITY_SIZE = 5


@dataclass
class UserNetwork:
    """Undirected weighted interaction graph among authors."""

    nodes: dict[str, Optional[str]]  # author_id -> region (may be None)
    edges: dict[tuple[str, str], float]  # (u, v) with u < v -> weight

    def degree(self, node: str) -> float:
        return sum(w for (u, v), w in self.edges.items() if node in (u, v))

    def total_weight(self) -> float:
        return sum(self.edges.values())


@dataclass(frozen=True)
class CommunityResult:
    partition: dict[str, int]
    modularity: float


@dataclass(frozen=True)
class NetworkAssociation:
    region_labels: tuple[str, ...]
    community_labels: tuple[str, ...]
    contingency: tuple[tuple[int, ...], ...]  # rows regions, columns communities
    chi_square: float
    degrees_of_freedom: int
    n: int
    p_value: float
    cramers_v: float


def _interaction_target(record: PostRecord) -> Optional[str]:
    """Handle of the author this record interacts with, if any.

    Retweets point at the marker handle (or the repair-recorded target
    once the marker is gone); quotes point at their first mention.
    """
    if record.interaction_target is not None:
        return record.interaction_target
    if record.kind == "retweet":
        parsed = parse_retweet_marker(record.text)
        return parsed[0] if parsed else None
    if record.kind == "quote":
        m = _MENTION_RE.search(record.text)
        return m.group(1) if m else None
    return None


def build_network(
    corpus: Sequence[PostRecord],
    author_regions: Optional[Mapping[str, str]] = None,
) -> UserNetwork:
    """Aggregate retweet/quote interactions into an undirected graph.

    Self-interactions are dropped; targets whose handle never authors a
    post in the corpus cannot be identified and contribute no edge.
    """
    handle_to_author: dict[str, str] = {}
    for rec in corpus:
        key = rec.author_handle.casefold()
        if key not in handle_to_author or rec.author_id < handle_to_author[key]:
            handle_to_author[key] = rec.author_id
    regions = author_regions or {}
    nodes: dict[str, Optional[str]] = {}
    edges: dict[tuple[str, str], float] = {}
    for rec in corpus:
        nodes.setdefault(rec.author_id, regions.get(rec.author_id))
        if rec.kind not in ("retweet", "quote"):
            continue
        handle = _interaction_target(rec)
        if handle is None:
            continue
        target = handle_to_author.get(handle.casefold())
        if target is None or target == rec.author_id:
            continue
        key = (rec.author_id, target) if rec.author_id < target else (target, rec.author_id)
        edges[key] = edges.get(key, 0.0) + 1.0
    return UserNetwork(nodes=nodes, edges=edges)


def majority_author_regions(
    resolved: Sequence[tuple[PostRecord, str]]
) -> dict[str, str]:
    """Each author's region: the mode of their posts' regions (ties: smallest code)."""
    tallies: dict[str, Counter[str]] = {}
    for rec, region in resolved:
        tallies.setdefault(rec.author_id, Counter())[region] += 1
    out = {}
    for author, counts in tallies.items():
        out[author] = min(counts, key=lambda r: (-counts[r], r))
    return out


def modularity(
    net: UserNetwork, partition: Mapping[str, int], resolution: float = 1.0
) -> float:
    """Newman modularity of a partition on the original graph."""
    m = net.total_weight()
    if m <= 0:
        raise ValueError("no edges")
    degrees: dict[str, float] = {node: 0.0 for node in net.nodes}
    for (u, v), w in net.edges.items():
        degrees[u] += w
        degrees[v] += w
    w_in: Counter[int] = Counter()
    k_tot: Counter[int] = Counter()
    for (u, v), w in net.edges.items():
        if partition[u] == partition[v]:
            w_in[partition[u]] += w
    for node, k in degrees.items():
        k_tot[partition[node]] += k
    q = 0.0
    for comm in k_tot:
        q += w_in.get(comm, 0.0) / m - resolution * (k_tot[comm] / (2.0 * m)) ** 2
    return q


def detect_communities(
    net: UserNetwork, resolution: float = 1.0, seed: int = 0
) -> CommunityResult:
    """Louvain-style greedy modularity optimization.

    Nodes are visited in sorted-id order at every level, which makes the
    outcome a pure function of the graph; the seed is accepted for
    interface stability and recorded by callers but does not perturb
    the deterministic ordering.
    """
    del seed
    if not net.edges:
        raise ValueError("no edges")
    names = sorted(net.nodes)
    index = {name: i for i, name in enumerate(names)}
    n = len(names)
    adj: list[dict[int, float]] = [dict() for _ in range(n)]
    for (u, v), w in net.edges.items():
        iu, iv = index[u], index[v]
        adj[iu][iv] = adj[iu].get(iv, 0.0) + w
        adj[iv][iu] = adj[iv].get(iu, 0.0) + w
    self_w = [0.0] * n
    m = net.total_weight()

    # membership of original nodes through all levels
    node_comm = list(range(n))

    while True:
        size = len(adj)
        k = [sum(adj[i].values()) + 2.0 * self_w[i] for i in range(size)]
        comm = list(range(size))
        comm_tot = k[:]
        improved = False
        while True:
            moved = False
            for i in range(size):
                c_old = comm[i]
                weights_to: dict[int, float] = {}
                for j, w in adj[i].items():
                    weights_to[comm[j]] = weights_to.get(comm[j], 0.0) + w
                comm_tot[c_old] -= k[i]
                best_c, best_gain = c_old, weights_to.get(c_old, 0.0) / m - (
                    resolution * k[i] * comm_tot[c_old] / (2.0 * m * m)
                )
                for c in sorted(weights_to):
                    gain = weights_to[c] / m - resolution * k[i] * comm_tot[c] / (2.0 * m * m)
                    if gain > best_gain + 1e-15:
                        best_c, best_gain = c, gain
                comm_tot[best_c] += k[i]
                comm[i] = best_c
                if best_c != c_old:
                    moved = True
                    improved = True
            if not moved:
                break
        if not improved:
            break
        # aggregate communities into supernodes
        present = sorted(set(comm))
        renum = {c: i for i, c in enumerate(present)}
        new_size = len(present)
        new_adj: list[dict[int, float]] = [dict() for _ in range(new_size)]
        new_self = [0.0] * new_size
        for i in range(size):
            ci = renum[comm[i]]
            new_self[ci] += self_w[i]
            for j, w in adj[i].items():
                if j < i:
                    continue
                cj = renum[comm[j]]
                if ci == cj:
                    new_self[ci] += w
                else:
                    new_adj[ci][cj] = new_adj[ci].get(cj, 0.0) + w
                    new_adj[cj][ci] = new_adj[cj].get(ci, 0.0) + w
        node_comm = [renum[comm[c]] for c in node_comm]
        adj, self_w = new_adj, new_self
        if new_size == 1:
            break

    # renumber communities by first appearance over sorted node names
    relabel: dict[int, int] = {}
    partition: dict[str, int] = {}
    for i, name in enumerate(names):
        c = node_comm[i]
        if c not in relabel:
            relabel[c] = len(relabel)
        partition[name] = relabel[c]
    return CommunityResult(partition=partition, modularity=modularity(net, partition, resolution))


# ---------------------------------------------------------------------
# Chi-square machinery
# ---------------------------------------------------------------------

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10000


def _gamma_p_series(a: float, x: float) -> float:
    """Lower regularized incomplete gamma by power series (x < a + 1)."""
    ap = a
    total = 1.0 / a
    term = total
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a: float, x: float) -> float:
    """Upper regularized incomplete gamma by continued fraction (x >= a + 1)."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def chi2_sf(x: float, df: int) -> float:
    """Survival function of the chi-square distribution."""
    if x < 0:
        raise ValueError("chi-square statistic must be non-negative")
    if df < 0:
        raise ValueError("degrees of freedom must be non-negative")
    if df == 0:
        return 1.0 if x == 0 else 0.0
    if x == 0:
        return 1.0
    a, half_x = df / 2.0, x / 2.0
    if half_x < a + 1.0:
        p = min(max(_gamma_p_series(a, half_x), 0.0), 1.0)
        return 1.0 - p
    return min(max(_gamma_q_contfrac(a, half_x), 0.0), 1.0)


def chi_square_independence(
    table: Sequence[Sequence[float]],
) -> tuple[float, int, float]:
    """Pearson chi-square test of independence on a contingency table."""
    rows = [list(map(float, row)) for row in table]
    if not rows or not rows[0]:
        raise ValueError("empty table")
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise ValueError("ragged table")
    if any(cell < 0 or not math.isfinite(cell) for row in rows for cell in row):
        raise ValueError("table entries must be finite non-negative counts")
    row_sums = [sum(row) for row in rows]
    col_sums = [sum(row[j] for row in rows) for j in range(width)]
    if any(s <= 0 for s in row_sums) or any(s <= 0 for s in col_sums):
        raise ValueError("degenerate table: zero marginal")
    n = sum(row_sums)
    chi2 = 0.0
    for i, row in enumerate(rows):
        for j, obs in enumerate(row):
            expected = row_sums[i] * col_sums[j] / n
            diff = obs - expected
            chi2 += diff * diff / expected
    df = (len(rows) - 1) * (width - 1)
    return chi2, df, chi2_sf(chi2, df)


def cramers_v(chi_square: float, n: int, r: int, c: int) -> float:
    """Effect size sqrt(chi2 / (n * min(r-1, c-1)))."""
    if chi_square < 0:
        raise ValueError("chi_square must be non-negative")
    if n <= 0:
        raise ValueError("n must be positive")
    if min(r, c) < 2:
        raise ValueError("table must have at least two rows and two columns")
    return math.sqrt(chi_square / (n * min(r - 1, c - 1)))


def association(
    net: UserNetwork,
    partition: Mapping[str, int],
    min_community_size: int = DEFAULT_MIN_COMMUNITY_SIZE,
) -> NetworkAssociation:
    """Region-by-community contingency test over region-resolved users.

    Communities with fewer than min_community_size counted users are
    pooled into an "other" column so no expected cell collapses to zero.
    """
    pairs = [
        (region, partition[node])
        for node, region in net.nodes.items()
        if region is not None and node in partition
    ]
    if not pairs:
        raise ValueError("no region-resolved users in the network")
    community_sizes = Counter(comm for _, comm in pairs)
    keep = {c for c, size in community_sizes.items() if size >= min_community_size}
    pooled = any(c not in keep for c in community_sizes)
    if not keep:
        # every community is small: pool by raw id to keep >= 1 column
        keep = set(community_sizes)
        pooled = False
    labels = [str(c) for c in sorted(keep)] + ([OTHER_COMMUNITY] if pooled else [])
    col_index = {label: j for j, label in enumerate(labels)}
    regions = sorted({region for region, _ in pairs})
    row_index = {region: i for i, region in enumerate(regions)}
    matrix = [[0] * len(labels) for _ in regions]
    for region, comm in pairs:
        label = str(comm) if comm in keep else OTHER_COMMUNITY
        matrix[row_index[region]][col_index[label]] += 1
    chi2, df, p = chi_square_independence(matrix)
    n = len(pairs)
    v = cramers_v(chi2, n, len(regions), len(labels))
    return NetworkAssociation(
        region_labels=tuple(regions),
        community_labels=tuple(labels),
        contingency=tuple(tuple(row) for row in matrix),
        chi_square=chi2,
        degrees_of_freedom=df,
        n=n,
        p_value=p,
        cramers_v=v,
    )


def export_graph(
    net: UserNetwork,
    path: str | Path,
    partition: Optional[Mapping[str, int]] = None,
) -> None:
    """Write the network as GraphML with region/community node attributes."""
    root = ET.Element("graphml", xmlns="http://graphml.graphdrawing.org/xmlns")
    ET.SubElement(
        root, "key", id="d_region", **{"for": "node", "attr.name": "region", "attr.type": "string"}
    )
    ET.SubElement(
        root, "key", id="d_comm", **{"for": "node", "attr.name": "community", "attr.type": "int"}
    )
    ET.SubElement(
        root, "key", id="d_weight", **{"for": "edge", "attr.name": "weight", "attr.type": "double"}
    )
    graph = ET.SubElement(root, "graph", id="G", edgedefault="undirected")
    for node in sorted(net.nodes):
        el = ET.SubElement(graph, "node", id=node)
        region = net.nodes[node]
        if region is not None:
            data = ET.SubElement(el, "data", key="d_region")
            data.text = region
        if partition is not None and node in partition:
            data = ET.SubElement(el, "data", key="d_comm")
            data.text = str(partition[node])
    for idx, (u, v) in enumerate(sorted(net.edges)):
        el = ET.SubElement(graph, "edge", id=f"e{idx}", source=u, target=v)
        data = ET.SubElement(el, "data", key="d_weight")
        data.text = repr(net.edges[(u, v)])
    tree = ET.ElementTree(root)
    ET.indent(tree)
    tree.write(path, encoding="utf-8", xml_declaration=True)
