"""Signed, clustered networks: loading, structural checks and block bookkeeping.

Agents are indexed from 0 inside arrays.  Clusters are named 1, 2, 3 everywhere
in the public API (labelings, row-sum keys, JSON files), and agents are 1-based
in files only.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.sparse.csgraph import connected_components

#: entries must be below ``-STRICT_TOL`` to count as strictly negative
STRICT_TOL = 1e-12

CLUSTERS = (1, 2, 3)


class NetworkFormatError(ValueError):
    """Raised when a network document cannot be turned into a SignedNetwork."""


class Labeling(NamedTuple):
    """Roles (i1, i2, i3) that the synthesis hypotheses assign to the three clusters."""

    i1: int
    i2: int
    i3: int

    @property
    def order(self) -> tuple[int, int, int]:
        """Cluster sequence used by the constructive proofs: i1, then i3, then i2."""
        return (self.i1, self.i3, self.i2)


def as_labeling(obj) -> Labeling:
    try:
        lab = Labeling(*(int(k) for k in obj))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid labeling {obj!r}") from exc
    if sorted(lab) != [1, 2, 3]:
        raise ValueError(f"invalid labeling {tuple(obj)!r}: must permute (1, 2, 3)")
    return lab


ALL_LABELINGS = tuple(Labeling(*p) for p in itertools.permutations(CLUSTERS))


@dataclass(frozen=True, eq=False)
class SignedNetwork:
    """Symmetric weight matrix plus an ordered three-way partition of the agents."""

    weights: np.ndarray
    clusters: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]

    def __post_init__(self):
        W = np.array(self.weights, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape[0] == 0:
            raise NetworkFormatError("weights must be a non-empty square matrix")
        if len(self.clusters) != 3:
            raise NetworkFormatError(f"expected 3 clusters, got {len(self.clusters)}")
        clusters = tuple(tuple(sorted(int(k) for k in c)) for c in self.clusters)
        members = [k for c in clusters for k in c]
        if any(len(c) == 0 for c in clusters):
            raise NetworkFormatError("clusters must be non-empty")
        if sorted(members) != list(range(W.shape[0])):
            raise NetworkFormatError("partition must cover every agent exactly once")
        W.setflags(write=False)
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "clusters", clusters)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def sizes(self) -> tuple[int, int, int]:
        return tuple(len(c) for c in self.clusters)

    def members(self, p: int) -> np.ndarray:
        """Agent indices of cluster ``p`` (1-based cluster id)."""
        _check_cluster(p)
        return np.array(self.clusters[p - 1], dtype=int)

    def block(self, p: int, q: int) -> np.ndarray:
        """The adjacency block A_{p,q}."""
        return self.weights[np.ix_(self.members(p), self.members(q))]

    def cluster_of(self) -> np.ndarray:
        """Cluster id (1..3) of every agent."""
        out = np.empty(self.size, dtype=int)
        for p, c in zip(CLUSTERS, self.clusters):
            out[list(c)] = p
        return out

    def relabeled(self, labeling) -> "RelabeledBlocks":
        return RelabeledBlocks.build(self, as_labeling(labeling))


def _check_cluster(p) -> None:
    if p not in CLUSTERS:
        raise ValueError(f"invalid cluster index {p!r}")


# --------------------------------------------------------------------------- io


def parse_network(doc: dict) -> SignedNetwork:
    """Build a network from the decoded JSON document (1-based indices)."""
    try:
        n = doc["n"]
        raw_clusters = doc["clusters"]
        raw_edges = doc["edges"]
    except (KeyError, TypeError) as exc:
        raise NetworkFormatError(f"malformed network document: missing {exc}") from None
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise NetworkFormatError(f"'n' must be a positive integer, got {n!r}")
    if not isinstance(raw_clusters, list) or len(raw_clusters) != 3:
        raise NetworkFormatError("'clusters' must be a list of exactly 3 index lists")

    clusters = []
    for c in raw_clusters:
        if not isinstance(c, list):
            raise NetworkFormatError("each cluster must be a list of agent indices")
        for k in c:
            _check_index(k, n)
        clusters.append([k - 1 for k in c])
    flat = sorted(k for c in clusters for k in c)
    if flat != list(range(n)):
        raise NetworkFormatError("partition does not cover [1, n] exactly once")

    W = np.zeros((n, n))
    seen: dict[tuple[int, int], float] = {}
    if not isinstance(raw_edges, list):
        raise NetworkFormatError("'edges' must be a list")
    for e in raw_edges:
        try:
            i, j, w = e["i"], e["j"], e["w"]
        except (KeyError, TypeError):
            raise NetworkFormatError(f"malformed edge {e!r}") from None
        _check_index(i, n)
        _check_index(j, n)
        if not isinstance(w, (int, float)) or isinstance(w, bool) or not np.isfinite(w):
            raise NetworkFormatError(f"edge weight must be a finite number, got {w!r}")
        w = float(w)
        if i == j:
            if w != 0.0:
                raise NetworkFormatError(f"self-loop at agent {i} with nonzero weight {w}")
            continue
        key = (min(i, j), max(i, j))
        if key in seen:
            if seen[key] != w:
                raise NetworkFormatError(
                    f"conflicting duplicate edge {key}: weights {seen[key]} and {w}")
            continue
        seen[key] = w
        W[i - 1, j - 1] = W[j - 1, i - 1] = w
    return SignedNetwork(W, tuple(tuple(c) for c in clusters))


def _check_index(k, n) -> None:
    if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= n:
        raise NetworkFormatError(f"agent index {k!r} out of range [1, {n}]")


def load_network(source) -> SignedNetwork:
    """Load a network from a path, a JSON string, or an already-decoded dict."""
    if isinstance(source, dict):
        return parse_network(source)
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise NetworkFormatError(f"cannot read network file: {exc}") from None
    else:
        text = source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"malformed JSON: {exc}") from None
    return parse_network(doc)


def network_to_dict(net: SignedNetwork) -> dict:
    W = net.weights
    edges = [{"i": i + 1, "j": j + 1, "w": float(W[i, j])}
             for i in range(net.size) for j in range(i + 1, net.size) if W[i, j] != 0]
    return {"n": net.size,
            "clusters": [[k + 1 for k in c] for c in net.clusters],
            "edges": edges}


def dump_network(net: SignedNetwork) -> str:
    return json.dumps(network_to_dict(net), indent=2)


def example_network(k: int) -> SignedNetwork:
    """The networks of the two worked examples (k = 1 or 2), as printed."""
    path = Path(__file__).with_name("data") / f"example{k}.json"
    if not path.exists():
        raise ValueError(f"no bundled example {k}")
    return load_network(path)


# ---------------------------------------------------------------- validation


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)
    admissible_tripartite: list[tuple[Labeling, int]] = field(default_factory=list)
    admissible_sign: list[Labeling] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                       for c in self.checks],
            "admissible_tripartite": [{"labeling": list(lab), "h": h}
                                      for lab, h in self.admissible_tripartite],
            "admissible_sign": [list(lab) for lab in self.admissible_sign],
        }

    def to_text(self) -> str:
        lines = [f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}" for c in self.checks]
        if self.admissible_tripartite:
            lines.append("tripartite-admissible (i1,i2,i3; h): " + ", ".join(
                f"({lab.i1},{lab.i2},{lab.i3}; {h})" for lab, h in self.admissible_tripartite))
        else:
            lines.append("tripartite-admissible: none")
        if self.admissible_sign:
            lines.append("sign-admissible (i1,i2,i3): " + ", ".join(
                f"({lab.i1},{lab.i2},{lab.i3})" for lab in self.admissible_sign))
        else:
            lines.append("sign-admissible: none")
        return "\n".join(lines)


def _support_components(mask: np.ndarray) -> np.ndarray:
    _, labels = connected_components(mask.astype(np.int8), directed=False)
    return labels


def validate_assumption1(net: SignedNetwork) -> ValidationReport:
    """Structural hypotheses on the network; failures become report entries."""
    W = net.weights
    cl = net.cluster_of()
    same = cl[:, None] == cl[None, :]
    off = ~np.eye(net.size, dtype=bool)
    checks = []

    asym = np.abs(W - W.T).max()
    checks.append(Check("symmetry", bool(asym == 0), f"max |w_ij - w_ji| = {asym:g}"))

    diag = np.abs(np.diag(W)).max()
    checks.append(Check("zero_diagonal", bool(diag == 0), f"max |w_ii| = {diag:g}"))

    bad_intra = np.argwhere(same & off & (W < 0))
    bad_inter = np.argwhere(~same & (W > 0))
    if len(bad_intra) == 0 and len(bad_inter) == 0:
        checks.append(Check("sign_pattern", True, "intra-cluster >= 0, inter-cluster <= 0"))
    else:
        i, j = (bad_intra if len(bad_intra) else bad_inter)[0]
        kind = "negative intra-cluster" if len(bad_intra) else "positive inter-cluster"
        checks.append(Check("sign_pattern", False,
                            f"{kind} weight {W[i, j]:g} on edge ({i + 1},{j + 1})"))

    ncomp = len(set(_support_components(np.abs(W) > 0)))
    checks.append(Check("connectivity", ncomp == 1, f"{ncomp} connected component(s)"))

    empty = [(p, q) for p, q in itertools.combinations(CLUSTERS, 2)
             if not np.any(net.block(p, q) != 0)]
    checks.append(Check("minimality", not empty,
                        "every inter-cluster block is nonzero" if not empty else
                        "zero blocks: " + ", ".join(f"A_{p}{q}" for p, q in empty)))
    return ValidationReport(checks)


@dataclass(frozen=True)
class BlockRowSums:
    """Row sums a_pq = A_{p,q} 1 keyed by 1-based cluster pair."""

    sums: dict

    def __getitem__(self, key) -> np.ndarray:
        return self.sums[key]

    def total(self, net: SignedNetwork) -> np.ndarray:
        """Reassemble A 1 in agent order."""
        out = np.zeros(net.size)
        for p in CLUSTERS:
            out[net.members(p)] = sum(self.sums[p, q] for q in CLUSTERS)
        return out


def block_row_sums(net: SignedNetwork) -> BlockRowSums:
    return BlockRowSums({(p, q): net.block(p, q).sum(axis=1)
                         for p in CLUSTERS for q in CLUSTERS})


def strictly_negative(x: np.ndarray, tol: float = STRICT_TOL) -> bool:
    return bool(np.all(np.asarray(x) < -tol))


@dataclass(frozen=True)
class FriendshipCheck:
    holds: bool
    witness: tuple[int, int] | None = None  # 1-based failing agent pair

    def __bool__(self) -> bool:
        return self.holds


def check_close_friendship(net: SignedNetwork, i1: int, i2: int) -> FriendshipCheck:
    """Close-friendship test for cluster ``i2`` relative to cluster ``i1``.

    Each pair in ``i2`` must be friends, or have enemies r, s in ``i1`` that are
    joined by a path of positive edges inside ``i1`` (r == s allowed).
    """
    _check_cluster(i1)
    _check_cluster(i2)
    if i1 == i2:
        raise ValueError("close friendship needs two distinct clusters")
    V1, V2 = net.members(i1), net.members(i2)
    if len(V2) == 1:
        return FriendshipCheck(True)
    W = net.weights
    comp = _support_components(W[np.ix_(V1, V1)] > STRICT_TOL)
    enemy_comps = [set(comp[W[i, V1] < -STRICT_TOL]) for i in V2]
    for a, b in itertools.combinations(range(len(V2)), 2):
        if W[V2[a], V2[b]] > STRICT_TOL:
            continue
        if enemy_comps[a] & enemy_comps[b]:
            continue
        return FriendshipCheck(False, (int(V2[a]) + 1, int(V2[b]) + 1))
    return FriendshipCheck(True)


def enumerate_admissible_labelings(net: SignedNetwork):
    """Labelings satisfying the structural hypotheses of the two synthesis routes.

    Returns ``(tripartite, sign)`` where ``tripartite`` holds ``(labeling, h)``
    pairs and ``sign`` holds labelings, both in lexicographic labeling order.
    """
    a = block_row_sums(net)
    tri, sign = [], []
    for lab in ALL_LABELINGS:
        if not check_close_friendship(net, lab.i1, lab.i2):
            continue
        if strictly_negative(a[lab.i3, lab.i2]):
            for h in sorted((lab.i2, lab.i3)):
                if strictly_negative(a[lab.i1, h]):
                    tri.append((lab, h))
        if strictly_negative(a[lab.i1, lab.i2]):
            sign.append(lab)
    return tri, sign


def validate(net: SignedNetwork) -> ValidationReport:
    """Assumption checks plus, when they pass, the admissible labelings."""
    report = validate_assumption1(net)
    if report.ok:
        report.admissible_tripartite, report.admissible_sign = enumerate_admissible_labelings(net)
    return report


# ------------------------------------------------------------ relabeled view


@dataclass(frozen=True, eq=False)
class RelabeledBlocks:
    """Network viewed in the proofs' cluster order (i1, i3, i2).

    Positions 1, 2, 3 refer to that order; ``perm[k]`` is the original agent
    index sitting at relabeled position ``k``.
    """

    labeling: Labeling
    perm: np.ndarray
    sizes: tuple[int, int, int]
    A: np.ndarray

    @classmethod
    def build(cls, net: SignedNetwork, labeling: Labeling) -> "RelabeledBlocks":
        perm = np.concatenate([net.members(p) for p in labeling.order])
        sizes = tuple(len(net.members(p)) for p in labeling.order)
        return cls(labeling, perm, sizes, net.weights[np.ix_(perm, perm)])

    def slice(self, p: int) -> slice:
        start = sum(self.sizes[:p - 1])
        return slice(start, start + self.sizes[p - 1])

    def block(self, p: int, q: int) -> np.ndarray:
        return self.A[self.slice(p), self.slice(q)]

    def rowsum(self, p: int, q: int) -> np.ndarray:
        return self.block(p, q).sum(axis=1)

    def to_original(self, x: np.ndarray) -> np.ndarray:
        """Scatter a vector given in relabeled order back to agent order."""
        out = np.empty_like(np.asarray(x, dtype=float))
        out[self.perm] = x
        return out

    def to_relabeled(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float)[self.perm]


# ------------------------------------------------------------------ sampling


def random_network(rng: np.random.Generator, sizes=(3, 3, 3), p_intra=0.7, p_inter=0.6,
                   wmax=5.0) -> SignedNetwork:
    """Random clustering-balanced network with the given cluster sizes.

    Intra-cluster edges get weights in (0, wmax], inter-cluster edges in
    [-wmax, 0).  Each agent is given at least one enemy in every other cluster,
    so the result is always connected and minimal.
    """
    N = sum(sizes)
    bounds = np.cumsum((0,) + tuple(sizes))
    cl = np.repeat(np.arange(3), sizes)
    W = np.zeros((N, N))
    for i in range(N):
        for j in range(i + 1, N):
            if cl[i] == cl[j]:
                if rng.random() < p_intra:
                    W[i, j] = rng.uniform(0.5, wmax)
            elif rng.random() < p_inter:
                W[i, j] = -rng.uniform(0.5, wmax)
    W = W + W.T
    for i in range(N):
        for q in range(3):
            if q == cl[i]:
                continue
            cols = np.arange(bounds[q], bounds[q + 1])
            if not np.any(W[i, cols] < 0):
                j = rng.choice(cols)
                W[i, j] = W[j, i] = -rng.uniform(0.5, wmax)
    clusters = tuple(tuple(range(bounds[q], bounds[q + 1])) for q in range(3))
    return SignedNetwork(W, clusters)
