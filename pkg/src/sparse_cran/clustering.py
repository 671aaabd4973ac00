"""Static BS clusters built from long-term received signal strengths.

Every function takes a strength table ``s[l, k]`` in dBm (BS ``l``, user
``k``) and returns a :class:`ClusterAssignment`. Ties in strength are
broken by ascending BS id, or ascending user id on the BS side.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

STRONGEST_S = "strongest_s"
DISJOINT_CELL = "disjoint_cell"
MAX_LOADING = "max_loading"
BIASED = "biased"
KINDS = (STRONGEST_S, DISJOINT_CELL, MAX_LOADING, BIASED)


@dataclass
class ClusterAssignment:
    """User-centric clusters: ``serving[k]`` is the BS set of user ``k``."""

    serving: list
    num_bs: int
    served: list = field(init=False)

    def __post_init__(self):
        self.serving = [frozenset(int(l) for l in s) for s in self.serving]
        self.served = [set() for _ in range(self.num_bs)]
        for k, bss in enumerate(self.serving):
            for l in bss:
                self.served[l].add(k)
        self.served = [frozenset(s) for s in self.served]

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "ClusterAssignment":
        """Build from a boolean ``(K, L)`` membership matrix."""
        mask = np.asarray(mask, dtype=bool)
        return cls([np.flatnonzero(row) for row in mask], mask.shape[1])

    @property
    def num_users(self) -> int:
        return len(self.serving)

    def serving_mask(self) -> np.ndarray:
        mask = np.zeros((self.num_users, self.num_bs), dtype=bool)
        for k, bss in enumerate(self.serving):
            mask[k, list(bss)] = True
        return mask

    def sizes(self) -> np.ndarray:
        return np.array([len(s) for s in self.serving], dtype=int)

    def unserved_users(self) -> list:
        return [k for k, s in enumerate(self.serving) if not s]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["user_id", "bs_id"])
            for k, bss in enumerate(self.serving):
                for l in sorted(bss):
                    w.writerow([k, l])

    @classmethod
    def from_csv(cls, path, num_users: int, num_bs: int) -> "ClusterAssignment":
        serving = [set() for _ in range(num_users)]
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                serving[int(row["user_id"])].add(int(row["bs_id"]))
        return cls(serving, num_bs)


@dataclass
class ClusterPolicy:
    kind: str
    S: int = 2
    eta1: float = 14.0
    eta2: float = 12.0
    k_max: np.ndarray | None = None   # per-BS quota for max_loading
    bias: np.ndarray | None = None    # per-BS dB bias for biased

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown cluster policy {self.kind!r}")
        if self.S < 1:
            raise ValueError("S must be >= 1")
        if self.eta1 < 0 or self.eta2 < 0:
            raise ValueError("eta1 and eta2 must be >= 0")
        if self.k_max is not None and np.any(np.asarray(self.k_max) < 0):
            raise ValueError("k_max must be >= 0")

    @classmethod
    def per_tier(cls, kind, is_macro, k_max=None, bias_db=None, **kw) -> "ClusterPolicy":
        """Expand ``(macro, pico)`` pairs for ``k_max``/``bias_db`` to per-BS arrays."""
        is_macro = np.asarray(is_macro, dtype=bool)
        if k_max is not None:
            kw["k_max"] = np.where(is_macro, k_max[0], k_max[1]).astype(int)
        if bias_db is not None:
            kw["bias"] = np.where(is_macro, bias_db[0], bias_db[1]).astype(float)
        return cls(kind, **kw)


def strength_order(strengths_k: np.ndarray) -> np.ndarray:
    """BS indices from strongest to weakest (stable, so ties go to lower id)."""
    return np.argsort(-np.asarray(strengths_k), kind="stable")


def candidate_cluster(strengths_k, eta1: float) -> set:
    """BSs whose strength is within ``eta1`` dB of the strongest one."""
    s = np.asarray(strengths_k, dtype=float)
    return set(np.flatnonzero(s.max() - s <= eta1).tolist())


def strongest_candidates(strengths: np.ndarray, limit: int) -> np.ndarray:
    """Boolean ``(K, L)`` mask of the ``limit`` strongest BSs of every user."""
    L, K = strengths.shape
    mask = np.zeros((K, L), dtype=bool)
    for k in range(K):
        mask[k, strength_order(strengths[:, k])[:limit]] = True
    return mask


def max_loading_clusters(strengths: np.ndarray, policy: ClusterPolicy) -> ClusterAssignment:
    """Multi-round request/accept negotiation with per-BS user quotas.

    In round ``i`` every remaining user asks the ``i``-th strongest BS of
    its candidate set. A BS with enough quota accepts all requests;
    otherwise it keeps the strongest requesters that fit and closes.
    """
    L, K = strengths.shape
    quota = np.asarray(policy.k_max if policy.k_max is not None else np.full(L, K), dtype=int)
    ranked = []
    for k in range(K):
        cand = candidate_cluster(strengths[:, k], policy.eta1)
        ranked.append([l for l in strength_order(strengths[:, k]) if l in cand])
    served = [[] for _ in range(L)]
    open_bs = set(range(L))
    users = set(range(K))
    i = 0
    while open_bs and users:
        requests = {l: [] for l in open_bs}
        for k in sorted(users):
            if i < len(ranked[k]) and ranked[k][i] in requests:
                requests[ranked[k][i]].append(k)
        for l in sorted(open_bs):
            asked = requests[l]
            room = quota[l] - len(served[l])
            if room >= len(asked):
                served[l].extend(asked)
            else:
                order = sorted(asked, key=lambda k: (-strengths[l, k], k))
                served[l].extend(order[:max(room, 0)])
                open_bs.discard(l)
        i += 1
        users = {k for k in users if i < len(ranked[k])}
    serving = [set() for _ in range(K)]
    for l, ks in enumerate(served):
        for k in ks:
            serving[k].add(l)
    return ClusterAssignment(serving, L)


def biased_clusters(strengths: np.ndarray, policy: ClusterPolicy) -> ClusterAssignment:
    """Clusters from biased strengths ``s[l, k] + bias[l]`` with gap ``eta2``."""
    L, K = strengths.shape
    bias = np.zeros(L) if policy.bias is None else np.asarray(policy.bias, dtype=float)
    biased = strengths + bias[:, None]
    mask = (biased.max(axis=0)[None, :] - biased <= policy.eta2).T
    return ClusterAssignment.from_mask(mask)


def baseline_clusters(strengths: np.ndarray, policy: ClusterPolicy,
                      bs_cells=None, user_cells=None) -> ClusterAssignment:
    """Strongest-``S`` clusters, or every BS of the user's own cell."""
    L, K = strengths.shape
    if policy.kind == STRONGEST_S:
        if policy.S > L:
            raise ValueError(f"S={policy.S} exceeds the number of BSs ({L})")
        return ClusterAssignment.from_mask(strongest_candidates(strengths, policy.S))
    if policy.kind == DISJOINT_CELL:
        if bs_cells is None or user_cells is None:
            raise ValueError("disjoint clustering needs BS and user cell indices")
        mask = np.asarray(user_cells)[:, None] == np.asarray(bs_cells)[None, :]
        return ClusterAssignment.from_mask(mask)
    raise ValueError(f"{policy.kind!r} is not a baseline policy")


def build_clusters(strengths: np.ndarray, policy: ClusterPolicy, layout=None) -> ClusterAssignment:
    if policy.kind == MAX_LOADING:
        return max_loading_clusters(strengths, policy)
    if policy.kind == BIASED:
        return biased_clusters(strengths, policy)
    cells = (layout.bs_cells, layout.user_cells) if layout is not None else (None, None)
    return baseline_clusters(strengths, policy, *cells)
