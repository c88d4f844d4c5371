"""View graphs: nodes with unknown absolute rotations, edges with measured
relative rotations.

Edges are undirected but carry an oriented measurement: the stored rotation of
edge (i, j) with i < j is R_ij, meaning R_i = R_ij @ R_j for the underlying
absolute rotations.  Queries in the opposite direction transpose on the fly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (DuplicateEdgeError, InvalidEdgeError, InvalidNodeError,
                     MissingEdgeError)
from .so3 import Rotation, quat_conj

# Up to this many nodes a dense pair->edge index matrix is kept for fast
# batched lookups; beyond it only the dict is used.
_DENSE_INDEX_LIMIT = 4096


@dataclass(frozen=True)
class RelEdge:
    """One relative-rotation measurement between nodes i < j."""

    i: int
    j: int
    rotation: Rotation
    inliers: int | None = None


class ViewGraph:
    """Immutable collection of nodes 0..n-1 and relative-rotation edges.

    Use :func:`build` (or ``rotavg.io.load_graph``) to construct one; edges are
    canonicalized to i < j and sorted, so graphs built from any input order
    compare equal structure-wise.
    """

    def __init__(self, n: int, edges: list[RelEdge],
                 ground_truth: dict[int, Rotation] | None):
        self.n = n
        self.edges = edges
        self.ground_truth = ground_truth
        e = len(edges)
        self._ei = np.fromiter((ed.i for ed in edges), dtype=np.int64, count=e)
        self._ej = np.fromiter((ed.j for ed in edges), dtype=np.int64, count=e)
        self._quats = (np.stack([ed.rotation.quat for ed in edges])
                       if e else np.empty((0, 4)))
        self._inliers = np.fromiter(
            (-1 if ed.inliers is None else ed.inliers for ed in edges),
            dtype=np.int64, count=e)
        self._eidx = {(ed.i, ed.j): k for k, ed in enumerate(edges)}
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for ed in edges:
            nbrs[ed.i].append(ed.j)
            nbrs[ed.j].append(ed.i)
        self._nbrs = [np.array(sorted(a), dtype=np.int64) for a in nbrs]
        if n <= _DENSE_INDEX_LIMIT:
            dense = np.full((n, n), -1, dtype=np.int32)
            dense[self._ei, self._ej] = np.arange(e, dtype=np.int32)
            dense[self._ej, self._ei] = np.arange(e, dtype=np.int32)
            self._dense_idx = dense
        else:
            self._dense_idx = None
        self.component_labels, self.n_components = self._label_components()

    def _label_components(self) -> tuple[np.ndarray, int]:
        labels = np.full(self.n, -1, dtype=np.int64)
        label = 0
        for start in range(self.n):
            if labels[start] >= 0:
                continue
            stack = [start]
            labels[start] = label
            while stack:
                u = stack.pop()
                for v in self._nbrs[u]:
                    if labels[v] < 0:
                        labels[v] = label
                        stack.append(int(v))
            label += 1
        return labels, label

    # -- queries ------------------------------------------------------------

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, i: int) -> np.ndarray:
        """Sorted array of nodes adjacent to i."""
        return self._nbrs[i]

    def degree(self, i: int) -> int:
        return len(self._nbrs[i])

    def has_edge(self, i: int, j: int) -> bool:
        a, b = (i, j) if i < j else (j, i)
        return (a, b) in self._eidx

    def edge_index(self, i: int, j: int) -> int:
        a, b = (i, j) if i < j else (j, i)
        try:
            return self._eidx[(a, b)]
        except KeyError:
            raise MissingEdgeError(f"no edge between {i} and {j}") from None

    def rel(self, i: int, j: int) -> Rotation:
        """Measured R_ij (R_i = R_ij @ R_j); transposed when i > j."""
        k = self.edge_index(i, j)
        r = self.edges[k].rotation
        return r if i < j else r.inverse()

    def rel_quat(self, i: int, j: int) -> np.ndarray:
        k = self.edge_index(i, j)
        q = self._quats[k]
        return q if i < j else quat_conj(q)

    def rel_quats(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Batch of measured quaternions for ordered node pairs (a[k], b[k])."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self._dense_idx is not None:
            idx = self._dense_idx[a, b]
            if np.any(idx < 0):
                bad = int(np.argmax(idx < 0))
                raise MissingEdgeError(f"no edge between {a[bad]} and {b[bad]}")
        else:
            idx = np.array([self.edge_index(int(x), int(y))
                            for x, y in zip(a, b)], dtype=np.int64)
        q = self._quats[idx]
        rev = a > b
        if np.any(rev):
            q = q.copy()
            q[rev, 1:] *= -1.0
        return q

    def inlier_count(self, i: int, j: int) -> int | None:
        c = self._inliers[self.edge_index(i, j)]
        return None if c < 0 else int(c)

    def common_neighbors(self, i: int, j: int) -> np.ndarray:
        """Sorted nodes adjacent to both i and j (excluding i and j themselves)."""
        return np.intersect1d(self._nbrs[i], self._nbrs[j], assume_unique=True)

    def component_nodes(self, label: int) -> np.ndarray:
        return np.nonzero(self.component_labels == label)[0]

    def with_edges(self, edges) -> "ViewGraph":
        """Same node set and ground truth, different edge list."""
        return build(self.n, edges, self.ground_truth)

    def masked(self, min_inliers: int) -> "ViewGraph":
        """Drop edges whose inlier count (missing treated as 0) is below the bar."""
        if min_inliers <= 0:
            return self
        kept = [e for e in self.edges
                if (e.inliers or 0) >= min_inliers]
        return build(self.n, kept, self.ground_truth)

    def __repr__(self) -> str:
        return (f"ViewGraph(n={self.n}, edges={self.n_edges}, "
                f"components={self.n_components})")


def build(n: int, edges, ground_truth: dict[int, Rotation] | None = None) -> ViewGraph:
    """Validate and canonicalize edges into a ViewGraph.

    Args:
        n: node count; ids must lie in [0, n).
        edges: iterable of RelEdge or (i, j, Rotation) / (i, j, Rotation, inliers)
            tuples.  Orientation is normalized to i < j (rotation transposed
            when flipped) and the list is sorted by (i, j).
        ground_truth: optional map of node id to absolute rotation.

    Raises:
        InvalidNodeError / InvalidEdgeError / DuplicateEdgeError on bad input.
    """
    if n < 0:
        raise InvalidNodeError(f"node count must be >= 0, got {n}")
    canon: list[RelEdge] = []
    for item in edges:
        if isinstance(item, RelEdge):
            i, j, rot, inl = item.i, item.j, item.rotation, item.inliers
        else:
            i, j, rot = item[0], item[1], item[2]
            inl = item[3] if len(item) > 3 else None
        i, j = int(i), int(j)
        if not (0 <= i < n) or not (0 <= j < n):
            raise InvalidNodeError(f"edge ({i}, {j}) references a node outside [0, {n})")
        if i == j:
            raise InvalidEdgeError(f"self loop at node {i}")
        if inl is not None and inl < 0:
            raise InvalidEdgeError(f"edge ({i}, {j}) has negative inlier count {inl}")
        if i > j:
            i, j, rot = j, i, rot.inverse()
        canon.append(RelEdge(i, j, rot, inl))
    canon.sort(key=lambda e: (e.i, e.j))
    for a, b in zip(canon, canon[1:]):
        if a.i == b.i and a.j == b.j:
            raise DuplicateEdgeError(f"edge ({a.i}, {a.j}) appears more than once")
    if ground_truth is not None:
        for node in ground_truth:
            if not (0 <= int(node) < n):
                raise InvalidNodeError(f"ground-truth node {node} outside [0, {n})")
        ground_truth = {int(k): v for k, v in sorted(ground_truth.items())}
    return ViewGraph(n, canon, ground_truth)
