"""Shared builders for the test suite.

Most tests need a graph whose relative rotations come from known absolute
rotations, sometimes with a few edges deliberately corrupted.  The builders
here keep that construction in one place.
"""

import numpy as np

from rotavg import so3
from rotavg.graph import ViewGraph, build
from rotavg.so3 import Rotation


def rotation_list(seed, n: int) -> list[Rotation]:
    """n rotations drawn from a generator seeded with `seed`."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return [Rotation(q) for q in so3.random_rotations(rng, n)]


def consistent_graph(n: int, pairs, seed=0, perturb=None, replace=None,
                     inliers=None, with_gt: bool = True):
    """Graph whose edges are derived from sampled absolute rotations.

    perturb maps an (i, j) pair to a rotation vector composed on the right of
    the exact relative rotation; replace maps a pair to an outright
    replacement rotation; inliers maps pairs to correspondence counts.
    Returns (graph, ground-truth rotation list).
    """
    gt = rotation_list(seed, n)
    perturb = perturb or {}
    replace = replace or {}
    inliers = inliers or {}
    edges = []
    for i, j in pairs:
        key = (i, j)
        if key in replace:
            rel = replace[key]
        else:
            rel = gt[i] @ gt[j].inverse()
            if key in perturb:
                rel = rel @ so3.exp(np.asarray(perturb[key], dtype=float))
        edges.append((i, j, rel, inliers.get(key)))
    g = build(n, edges, {k: gt[k] for k in range(n)} if with_gt else None)
    return g, gt


def ring_with_chords(n: int, seed=0, perturb=None):
    """Cycle 0-1-..-(n-1)-0 plus all offset-2 chords; every edge sits in
    two triangles, so support-based propagation can reach every node."""
    pairs = [(i, (i + 1) % n) for i in range(n)]
    pairs += [(i, (i + 2) % n) for i in range(n)]
    pairs = sorted({(min(a, b), max(a, b)) for a, b in pairs})
    return consistent_graph(n, pairs, seed=seed, perturb=perturb)


def align_to(reference: Rotation, target: Rotation) -> Rotation:
    """Global rotation G with reference @ G = target."""
    return reference.inverse() @ target


# 15-node toy instance for the staged initialization walkthrough.  Edge
# (0, 8) is deliberately inconsistent (its loops fail any tight threshold);
# every other edge is exact, so the expected growth order is forced.
WALKTHROUGH_N = 15
WALKTHROUGH_SEED = 42
WALKTHROUGH_BAD_EDGE = (0, 8)
WALKTHROUGH_EDGES = [
    (0, 1), (0, 2), (0, 3), (0, 5), (0, 8), (0, 11),
    (1, 2), (2, 3), (2, 8), (2, 9), (2, 10),
    (8, 10), (9, 10), (10, 11),
    (11, 12), (11, 13), (11, 14), (12, 13), (12, 14), (13, 14),
    (3, 4), (4, 5), (5, 6), (6, 7), (7, 8),
]
WALKTHROUGH_ORDER = [0, 2, 10, 1, 3, 8, 9, 11, 12, 13, 14, 4, 5, 6, 7]

# (kind, node, parent, supports, votes, s_used); None fields are skipped when
# comparing.  Vote events with several equidistant candidates leave the
# parent unpinned since float dust decides among bitwise-equal distances.
WALKTHROUGH_TRACE = [
    ("root", 0, None, None, None, None),
    ("add-support", 2, 0, 2, None, 2),
    ("add-support", 10, 2, 2, None, 2),
    ("s-decrement", None, None, None, None, None),
    ("add-support", 1, 2, 1, None, 1),
    ("add-support", 3, 2, 1, None, 1),
    ("add-support", 8, 2, 1, None, 1),
    ("add-support", 9, 2, 1, None, 1),
    ("s-decrement", None, None, None, None, None),
    ("s-decrement", None, None, None, None, None),
    ("add-vote", 11, None, None, 2, 0),
    ("add-support", 12, 11, 2, None, 2),
    ("add-support", 13, 11, 2, None, 2),
    ("add-support", 14, 11, 2, None, 2),
    ("s-decrement", None, None, None, None, None),
    ("s-decrement", None, None, None, None, None),
    ("add-vote", 4, 3, None, 1, 0),
    ("s-decrement", None, None, None, None, None),
    ("s-decrement", None, None, None, None, None),
    ("add-vote", 5, None, None, 2, 0),
    ("s-decrement", None, None, None, None, None),
    ("s-decrement", None, None, None, None, None),
    ("add-vote", 6, 5, None, 1, 0),
    ("s-decrement", None, None, None, None, None),
    ("s-decrement", None, None, None, None, None),
    ("add-vote", 7, None, None, 2, 0),
]


def build_walkthrough():
    axis = np.array([1.0, 2.0, 3.0])
    axis /= np.linalg.norm(axis)
    return consistent_graph(WALKTHROUGH_N, WALKTHROUGH_EDGES,
                            seed=WALKTHROUGH_SEED,
                            perturb={WALKTHROUGH_BAD_EDGE: 0.05 * axis})


def check_trace(events, expected) -> None:
    """Assert the trace matches the expected skeleton field by field."""
    kinds = [ev.kind for ev in events]
    assert kinds == [e[0] for e in expected], kinds
    for ev, (kind, node, parent, supports, votes, s_used) in zip(events, expected):
        for name, want in (("node", node), ("parent", parent),
                           ("supports", supports), ("votes", votes),
                           ("s_used", s_used)):
            if want is not None:
                assert getattr(ev, name) == want, (ev.format(), name, want)


# Five-node support-counting instance: family {3, 4}, base 4, every loop
# consistent.  Candidate supports are 5 -> 2, 6 -> 1, 7 -> 3.
SUPPORT_FIG_N = 8
SUPPORT_FIG_EDGES = [(3, 4), (3, 5), (3, 7), (4, 5), (4, 6), (4, 7),
                     (5, 7), (6, 7)]


def build_support_figure():
    return consistent_graph(SUPPORT_FIG_N, SUPPORT_FIG_EDGES, seed=7)


# Voting instance: family {1, 3, 5} solved, node 6 visible from all three,
# nodes 2 and 4 from one member each.
VOTE_FIG_N = 7
VOTE_FIG_EDGES = [(1, 2), (3, 4), (1, 6), (3, 6), (5, 6)]


def build_vote_figure():
    return consistent_graph(VOTE_FIG_N, VOTE_FIG_EDGES, seed=11)
