"""Line-oriented text format for view graphs and rotation sets.

    # comment
    N <node-count>
    E <i> <j> <qw> <qx> <qy> <qz> [<inlier-count>]
    G <i> <qw> <qx> <qy> <qz>

Quaternions are scalar-first and written with 17 significant digits, so a
save/load cycle preserves them bit for bit.  G records carry absolute
rotations; depending on the file they are ground truth or estimates.
"""

import os

import numpy as np

from .errors import ParseError
from .graph import RelEdge, ViewGraph, build
from .so3 import Rotation


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _parse_floats(tokens: list[str], line: int) -> list[float]:
    out = []
    for t in tokens:
        try:
            out.append(float(t))
        except ValueError:
            raise ParseError(f"expected a number, got {t!r}", line) from None
    return out


def load_graph(path: str | os.PathLike) -> ViewGraph:
    """Read a view graph file; raises ParseError with the offending line number."""
    n: int | None = None
    edges: list[RelEdge] = []
    gt: dict[int, Rotation] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            kind = tokens[0]
            if kind == "N":
                if n is not None:
                    raise ParseError("repeated N record", lineno)
                if len(tokens) != 2:
                    raise ParseError("N record needs exactly one count", lineno)
                try:
                    n = int(tokens[1])
                except ValueError:
                    raise ParseError(f"bad node count {tokens[1]!r}", lineno) from None
                if n < 0:
                    raise ParseError(f"negative node count {n}", lineno)
            elif kind == "E":
                if n is None:
                    raise ParseError("E record before N record", lineno)
                if len(tokens) not in (7, 8):
                    raise ParseError(
                        "E record needs i j qw qx qy qz and an optional "
                        f"inlier count, got {len(tokens) - 1} fields", lineno)
                try:
                    i, j = int(tokens[1]), int(tokens[2])
                except ValueError:
                    raise ParseError("bad node id in E record", lineno) from None
                q = _parse_floats(tokens[3:7], lineno)
                inl: int | None = None
                if len(tokens) == 8:
                    try:
                        inl = int(tokens[7])
                    except ValueError:
                        raise ParseError(f"bad inlier count {tokens[7]!r}",
                                         lineno) from None
                try:
                    rot = Rotation.from_quat(np.array(q))
                except ValueError as exc:
                    raise ParseError(str(exc), lineno) from None
                edges.append(RelEdge(i, j, rot, inl) if i < j
                             else RelEdge(j, i, rot.inverse(), inl))
            elif kind == "G":
                if n is None:
                    raise ParseError("G record before N record", lineno)
                if len(tokens) != 6:
                    raise ParseError("G record needs i qw qx qy qz", lineno)
                try:
                    i = int(tokens[1])
                except ValueError:
                    raise ParseError("bad node id in G record", lineno) from None
                if i in gt:
                    raise ParseError(f"repeated G record for node {i}", lineno)
                q = _parse_floats(tokens[2:6], lineno)
                try:
                    gt[i] = Rotation.from_quat(np.array(q))
                except ValueError as exc:
                    raise ParseError(str(exc), lineno) from None
            else:
                raise ParseError(f"unknown record type {kind!r}", lineno)
    if n is None:
        raise ParseError("file has no N record")
    return build(n, edges, gt if gt else None)


def save_graph(g: ViewGraph, path: str | os.PathLike) -> None:
    """Write a view graph in canonical order (edges by (i, j), then G by node)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# view graph: {g.n} nodes, {g.n_edges} edges\n")
        fh.write(f"N {g.n}\n")
        for e in g.edges:
            w, x, y, z = e.rotation.quat
            line = f"E {e.i} {e.j} {_fmt(w)} {_fmt(x)} {_fmt(y)} {_fmt(z)}"
            if e.inliers is not None:
                line += f" {e.inliers}"
            fh.write(line + "\n")
        if g.ground_truth:
            for i in sorted(g.ground_truth):
                w, x, y, z = g.ground_truth[i].quat
                fh.write(f"G {i} {_fmt(w)} {_fmt(x)} {_fmt(y)} {_fmt(z)}\n")


def save_rotations(rotations: dict[int, Rotation], n: int,
                   path: str | os.PathLike) -> None:
    """Write absolute rotations as an edgeless graph file (N + G records)."""
    save_graph(build(n, [], dict(rotations)), path)


def load_rotations(path: str | os.PathLike) -> dict[int, Rotation]:
    """Read the G records of a graph file as a node -> rotation map."""
    g = load_graph(path)
    return dict(g.ground_truth) if g.ground_truth else {}


def save_labels(labels: dict[tuple[int, int], bool], path: str | os.PathLike) -> None:
    """Write the outlier sidecar: one `L i j 0|1` line per edge, sorted."""
    with open(path, "w", encoding="utf-8") as fh:
        for (i, j) in sorted(labels):
            fh.write(f"L {i} {j} {1 if labels[(i, j)] else 0}\n")


def load_labels(path: str | os.PathLike) -> dict[tuple[int, int], bool]:
    out: dict[tuple[int, int], bool] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if tokens[0] != "L" or len(tokens) != 4:
                raise ParseError("label record needs L i j 0|1", lineno)
            try:
                i, j, v = int(tokens[1]), int(tokens[2]), int(tokens[3])
            except ValueError:
                raise ParseError("bad label record", lineno) from None
            if v not in (0, 1):
                raise ParseError(f"label must be 0 or 1, got {v}", lineno)
            key = (i, j) if i < j else (j, i)
            if key in out:
                raise ParseError(f"repeated label for edge {key}", lineno)
            out[key] = bool(v)
    return out
