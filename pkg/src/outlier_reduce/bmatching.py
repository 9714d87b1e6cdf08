"""Exact minimum-cost bipartite b-matching.

Each right vertex j must be matched to exactly ``demands[j]`` left
vertices; each left vertex is used at most once; total edge weight is
minimized. The labelled variant additionally fixes, per right vertex,
how many of its matches carry each label: it is solved by expanding every
right vertex j into t_j unit-demand copies whose incident edges are
restricted to left vertices of the copy's label.

Both shapes run on the successive-shortest-path engine in ``flow`` and
are exact; heuristics are deliberately not offered.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections.abc import Mapping

import numpy as np

from .flow import FlowInfeasible, FlowNetwork

__all__ = ["BMatchingProblem", "BMatchingSolution", "BMatchingInfeasible",
           "solve_bmatching", "prune_left"]


class BMatchingInfeasible(Exception):
    """The demand vector cannot be met; the message names the shortfall."""


@dataclass(frozen=True)
class BMatchingProblem:
    """Weighted bipartite demand-matching problem.

    ``weights[u, j]`` is the cost of matching left vertex u to right vertex
    j. ``left`` / ``right`` carry the callers' point refs so solutions map
    back; the solver itself only uses positions. For the labelled variant,
    ``left_labels`` aligns with ``left`` and ``label_demands[j]`` maps each
    label to the exact number of label-l matches right vertex j requires
    (the per-label counts must sum to ``demands[j]``).
    """

    left: tuple[int, ...]
    right: tuple[int, ...]
    weights: np.ndarray
    demands: tuple[int, ...]
    left_labels: tuple[str, ...] | None = None
    label_demands: tuple[Mapping[str, int], ...] | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.left), len(self.right)):
            raise ValueError(f"weight matrix shape {w.shape} does not match "
                             f"{len(self.left)} x {len(self.right)}")
        if len(self.demands) != len(self.right):
            raise ValueError("demands must align with right vertices")
        if any(t < 0 for t in self.demands):
            raise ValueError("demands must be nonnegative")
        if (self.left_labels is None) != (self.label_demands is None):
            raise ValueError("left_labels and label_demands go together")
        if self.left_labels is not None:
            if len(self.left_labels) != len(self.left):
                raise ValueError("left_labels must align with left vertices")
            if len(self.label_demands) != len(self.right):
                raise ValueError("label_demands must align with right vertices")
            for j, (t, psi) in enumerate(zip(self.demands, self.label_demands)):
                if sum(psi.values()) != t:
                    raise ValueError(
                        f"label demands at right vertex {j} sum to "
                        f"{sum(psi.values())}, expected {t}")
        object.__setattr__(self, "weights", w)

    @property
    def labelled(self) -> bool:
        return self.left_labels is not None

    @property
    def total_demand(self) -> int:
        return sum(self.demands)


@dataclass(frozen=True)
class BMatchingSolution:
    edges: tuple[tuple[int, int], ...]   # (left ref, right ref) pairs
    total_weight: float
    matched_left: frozenset[int]


def _diagnose_shortfall(prob: BMatchingProblem) -> str:
    if prob.total_demand > len(prob.left):
        return (f"total demand {prob.total_demand} exceeds "
                f"{len(prob.left)} left vertices")
    if prob.labelled:
        avail: dict[str, int] = {}
        for lab in prob.left_labels:
            avail[lab] = avail.get(lab, 0) + 1
        need: dict[str, int] = {}
        for psi in prob.label_demands:
            for lab, cnt in psi.items():
                need[lab] = need.get(lab, 0) + cnt
        for lab, cnt in sorted(need.items()):
            if cnt > avail.get(lab, 0):
                return (f"label {lab!r}: demand {cnt} exceeds "
                        f"{avail.get(lab, 0)} available left vertices")
    return "demands cannot be met"


def solve_bmatching(prob: BMatchingProblem) -> BMatchingSolution:
    """Globally minimum-weight matching meeting every demand exactly."""
    nl, nr = len(prob.left), len(prob.right)
    total = prob.total_demand
    if total == 0:
        return BMatchingSolution((), 0.0, frozenset())

    if not prob.labelled:
        # source -> left (1) -> right (1, w) -> sink (t_j)
        src, snk = nl + nr, nl + nr + 1
        net = FlowNetwork(nl + nr + 2)
        for u in range(nl):
            net.add_arc(src, u, 1, 0.0)
        edge_arcs = {}
        for u in range(nl):
            for j in range(nr):
                if prob.demands[j] > 0:
                    edge_arcs[(u, j)] = net.add_arc(u, nl + j, 1,
                                                    float(prob.weights[u, j]))
        for j in range(nr):
            if prob.demands[j] > 0:
                net.add_arc(nl + j, snk, prob.demands[j], 0.0)
        try:
            net.solve(src, snk, total)
        except FlowInfeasible:
            raise BMatchingInfeasible(_diagnose_shortfall(prob)) from None
    else:
        # expand right vertex j into t_j copies; the copies for label l only
        # see left vertices of label l
        copies: list[tuple[int, str]] = []
        for j, psi in enumerate(prob.label_demands):
            for lab in sorted(psi):
                copies.extend((j, lab) for _ in range(psi[lab]))
        nc = len(copies)
        src, snk = nl + nc, nl + nc + 1
        net = FlowNetwork(nl + nc + 2)
        for u in range(nl):
            net.add_arc(src, u, 1, 0.0)
        edge_arcs = {}
        for c, (j, lab) in enumerate(copies):
            for u in range(nl):
                if prob.left_labels[u] == lab:
                    edge_arcs[(u, c)] = net.add_arc(u, nl + c, 1,
                                                    float(prob.weights[u, j]))
            net.add_arc(nl + c, snk, 1, 0.0)
        try:
            net.solve(src, snk, total)
        except FlowInfeasible:
            raise BMatchingInfeasible(_diagnose_shortfall(prob)) from None

    edges = []
    weight = 0.0
    for (u, tgt), arc in sorted(edge_arcs.items()):
        if net.flow_on(arc) > 0:
            j = tgt if not prob.labelled else copies[tgt][0]
            edges.append((prob.left[u], prob.right[j]))
            weight += float(prob.weights[u, j])
    matched = frozenset(u for u, _ in edges)
    return BMatchingSolution(tuple(edges), weight, matched)


def prune_left(prob: BMatchingProblem, m: int) -> BMatchingProblem:
    """Restrict the left side to each right vertex's nearest clients.

    Keeping the max(m, total demand) nearest left vertices per right vertex
    (per (right, label) pair in the labelled case) preserves the optimum:
    if an optimal matching used a discarded vertex, some kept-and-unmatched
    vertex at no greater weight could replace it. The pruned problem has at
    most |right| * max(m, total demand) left vertices (times the number of
    labels when labelled).
    """
    keep_count = max(m, prob.total_demand)
    nl = len(prob.left)
    if nl <= keep_count:
        return prob
    keep: set[int] = set()
    for j in range(len(prob.right)):
        col = prob.weights[:, j]
        if not prob.labelled:
            order = np.lexsort((np.arange(nl), col))  # weight, then position
            keep.update(int(u) for u in order[:keep_count])
        else:
            for lab in set(prob.left_labels):
                members = [u for u in range(nl) if prob.left_labels[u] == lab]
                members.sort(key=lambda u: (col[u], u))
                keep.update(members[:keep_count])
    kept = sorted(keep)
    return BMatchingProblem(
        left=tuple(prob.left[u] for u in kept),
        right=prob.right,
        weights=prob.weights[kept, :],
        demands=prob.demands,
        left_labels=(tuple(prob.left_labels[u] for u in kept)
                     if prob.labelled else None),
        label_demands=prob.label_demands,
    )
