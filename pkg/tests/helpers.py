"""Shared builders and independent brute-force oracles for the tests.

The enumeration oracles here intentionally share no code with the flow /
assignment engines they certify: b-matchings are enumerated
subset-by-subset, assignments point-by-point.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from outlier_reduce.instance import ClusteringInstance, instance_from_dict


def line_instance(xs, fs=None, *, k=1, m=0, z=1, constraint=None,
                  labels=None) -> ClusteringInstance:
    """1-D euclidean instance; facilities default to the client locations."""
    fs = list(xs) if fs is None else list(fs)
    data = {
        "metric": {"kind": "euclidean", "dim": 1},
        "z": z,
        "points": [[float(v)] for v in xs],
        "facilities": [[float(v)] for v in fs],
        "k": k,
        "m": m,
        "constraint": constraint if constraint is not None
        else {"kind": "unconstrained"},
    }
    if labels is not None:
        data["labels"] = list(labels)
    return instance_from_dict(data)


def ref_of(inst: ClusteringInstance, value: float) -> int:
    """Ground ref of the 1-D client at the given coordinate."""
    for x in inst.X:
        if abs(inst.space.coords[x][0] - value) < 1e-12:
            return x
    raise KeyError(value)


def fref_of(inst: ClusteringInstance, value: float) -> int:
    for f in inst.F:
        if abs(inst.space.coords[f][0] - value) < 1e-12:
            return f
    raise KeyError(value)


def random_bmatching_problem(rng, labelled=False, max_left=8, max_right=3,
                             max_labels=3):
    """Random demand-matching instance; demands total at most |left|."""
    from outlier_reduce.bmatching import BMatchingProblem

    nl = int(rng.integers(1, max_left + 1))
    nr = int(rng.integers(1, max_right + 1))
    weights = rng.uniform(0, 10, size=(nl, nr))
    demands = [0] * nr
    for _ in range(int(rng.integers(0, nl + 1))):
        demands[int(rng.integers(0, nr))] += 1
    left_labels = label_demands = None
    if labelled:
        num_labels = int(rng.integers(1, max_labels + 1))
        left_labels = tuple(f"L{int(rng.integers(0, num_labels))}"
                            for _ in range(nl))
        label_demands = []
        for t in demands:
            psi = {}
            for _ in range(t):
                lab = f"L{int(rng.integers(0, num_labels))}"
                psi[lab] = psi.get(lab, 0) + 1
            label_demands.append(psi)
        label_demands = tuple(label_demands)
    return BMatchingProblem(left=tuple(range(nl)), right=tuple(range(nr)),
                            weights=weights, demands=tuple(demands),
                            left_labels=left_labels,
                            label_demands=label_demands)


def brute_bmatching(weights, demands, left_labels=None, label_demands=None):
    """Minimum matching weight by exhaustive enumeration, or None.

    Enumerates, right vertex by right vertex, every way of granting it
    exactly its demand from the still-unmatched left vertices (respecting
    per-label counts when given).
    """
    weights = np.asarray(weights, dtype=float)
    nl, nr = weights.shape

    def options(j, available):
        t = demands[j]
        if label_demands is None:
            yield from itertools.combinations(sorted(available), t)
            return
        pools = []
        for lab in sorted(label_demands[j]):
            cnt = label_demands[j][lab]
            members = sorted(u for u in available if left_labels[u] == lab)
            if len(members) < cnt:
                return
            pools.append(list(itertools.combinations(members, cnt)))
        for combo in itertools.product(*pools):
            yield tuple(u for group in combo for u in group)

    best = [None]

    def recurse(j, available, acc):
        if best[0] is not None and acc > best[0] + 1e-12:
            return
        if j == nr:
            if best[0] is None or acc < best[0]:
                best[0] = acc
            return
        for chosen in options(j, available):
            w = acc + sum(weights[u, j] for u in chosen)
            recurse(j + 1, available - set(chosen), w)

    recurse(0, set(range(nl)), 0.0)
    return best[0]


def brute_assignment(inst: ClusteringInstance, x_prime, centers):
    """Exhaustive minimum feasible assignment cost of x_prime to centers.

    Evaluates every point->cluster map directly against the constraint
    semantics; returns the minimum cost or None. Vectorized so the
    acceptance suite can afford 500-seed sweeps.
    """
    spec = inst.constraint
    n = len(x_prime)
    k = len(centers)
    W = np.array([[inst.powered_xf(x, f) for f in centers] for x in x_prime])
    if n == 0:
        assigns = np.zeros((1, 0), dtype=int)
    else:
        assigns = np.array(list(itertools.product(range(k), repeat=n)),
                           dtype=int)
    costs = (W[np.arange(n), assigns].sum(axis=1) if n
             else np.zeros(len(assigns)))
    counts = np.stack([(assigns == i).sum(axis=1) for i in range(k)], axis=1)

    if spec.kind in ("unconstrained", "outlier_label_quota"):
        feasible = np.ones(len(assigns), dtype=bool)
        if spec.kind == "outlier_label_quota":
            removed = [x for x in inst.X if x not in set(x_prime)]
            got = {}
            for x in removed:
                got[inst.label_of[x]] = got.get(inst.label_of[x], 0) + 1
            quota_ok = all(got.get(lab, 0) == spec.quota.get(lab, 0)
                           for lab in inst.label_names)
            if not quota_ok:
                return None
    elif spec.kind == "capacitated":
        caps = np.array([inst.capacity_of[f] for f in centers])
        feasible = (counts <= caps).all(axis=1)
    elif spec.kind == "size_bounds":
        r = np.array(spec.r)
        l = np.array(spec.l)
        feasible = ((counts >= r) & (counts <= l)).all(axis=1)
    elif spec.kind == "label_bounds":
        feasible = np.ones(len(assigns), dtype=bool)
        for lab in inst.label_names:
            pts = [t for t, x in enumerate(x_prime)
                   if inst.label_of[x] == lab]
            lab_counts = np.stack(
                [(assigns[:, pts] == i).sum(axis=1) for i in range(k)], axis=1)
            if spec.fractional:
                a = (spec.alpha or {}).get(lab, Fraction(0))
                b = (spec.beta or {}).get(lab, Fraction(1))
                feasible &= (a.numerator * counts
                             <= lab_counts * a.denominator).all(axis=1)
                feasible &= (b.numerator * counts
                             >= lab_counts * b.denominator).all(axis=1)
            else:
                lo = (spec.min_per_label or {}).get(lab, 0)
                hi = (spec.max_per_label or {}).get(lab, n)
                feasible &= ((lab_counts >= lo) & (lab_counts <= hi)).all(axis=1)
    else:
        raise AssertionError(spec.kind)

    if not feasible.any():
        return None
    return float(costs[feasible].min())


def brute_outlier_opt(inst: ClusteringInstance):
    """Fully independent optimum: every outlier set, every center tuple,
    every assignment. Tiny instances only."""
    best = None
    for size in range(inst.m + 1):
        for removed in itertools.combinations(sorted(inst.X), size):
            x_prime = [x for x in inst.X if x not in set(removed)]
            ordered = inst.constraint.cluster_indexed
            tuples = (itertools.permutations(inst.F, inst.k) if ordered
                      else itertools.combinations(inst.F, inst.k))
            for centers in tuples:
                c = brute_assignment(inst, x_prime, centers)
                if c is not None and (best is None or c < best - 1e-12):
                    best = c
    return best
