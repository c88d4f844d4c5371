"""Hierarchical spanning-tree initialization of absolute rotations.

A family of solved nodes grows outward from a high-degree root.  Propagation
is gated by triplet supports: a neighbor joins only when at least s triplets
through common neighbors close consistently, and every addition resets the
gate to its strictest setting.  When propagation stalls, the full variant
first relaxes the loop threshold (eps_1 -> eps_m), then lowers s; at s = 0
the family votes a candidate in and its rotation is picked robustly from the
competing propagated candidates.  With correspondence counts enabled, weak
edges are hidden until the stronger tiers are exhausted.

Two variants are implemented: a reference one (single threshold, fresh
supported-neighbor counts at every stall) and the full one (threshold ladder,
correspondence tiers, and a cached supported-neighbor table refreshed one row
at a time).  With a single threshold and no tiers they produce identical
traces; the reference variant exists precisely to pin that behavior down.
"""

from dataclasses import dataclass, field

import numpy as np

from .averaging import SraConfig, geodesic_l1_mean
from .errors import ComponentExhausted, InvalidConfigError
from .graph import ViewGraph
from .so3 import Rotation, angular_distance
from .triplets import (LoopThresholds, SnTable, count_triplet_supports,
                       update_sn_table)


@dataclass(frozen=True)
class TraceEvent:
    """One step of the initializer, with the state it left behind.

    For additions, s_used/eps_used are the thresholds the candidate was judged
    under, while s/eps_index show the post-addition state (always the reset
    values, since any addition rearms the gate).
    """

    kind: str  # root | add-support | add-vote | s-decrement | eps-advance | tier-advance
    node: int | None = None
    parent: int | None = None
    supports: int | None = None
    votes: int | None = None
    s_used: int | None = None
    eps_used: int | None = None
    s: int | None = None
    eps_index: int | None = None
    tier_index: int = 0

    def format(self) -> str:
        parts = [self.kind]
        for name in ("node", "parent", "supports", "votes", "s_used", "eps_used"):
            v = getattr(self, name)
            if v is not None:
                parts.append(f"{name}={v}")
        parts.append(f"s={self.s}")
        parts.append(f"eps={self.eps_index}")
        parts.append(f"tier={self.tier_index}")
        return " ".join(parts)


@dataclass
class InitConfig:
    """Settings of the hierarchical initializer."""

    s_init: int = 10
    eps: LoopThresholds | None = None
    use_inlier_counts: bool = False
    inlier_tiers: tuple[int, ...] = (5, 0)
    sra: SraConfig = field(default_factory=lambda: SraConfig(
        norm="l1", outlier_rejection=True))

    def __post_init__(self):
        if self.s_init < 1:
            raise InvalidConfigError(f"s_init must be >= 1, got {self.s_init}")
        tiers = tuple(self.inlier_tiers)
        if not tiers or tiers[-1] != 0:
            raise InvalidConfigError("inlier_tiers must end with 0")
        if any(t < 0 for t in tiers):
            raise InvalidConfigError("inlier_tiers must be non-negative")
        for a, b in zip(tiers, tiers[1:]):
            if b >= a:
                raise InvalidConfigError(
                    f"inlier_tiers must be strictly descending, got {tiers}")
        self.inlier_tiers = tiers


@dataclass
class InitState:
    """Mutable algorithm state; exposed for the voting/table operations."""

    family: list[int]
    new_family: list[int]
    in_family: np.ndarray
    fixed: dict[int, Rotation]
    tree_edges: list[tuple[int, int]]
    trace: list[TraceEvent]
    s: int
    eps_index: int = 1
    tier_index: int = 0


@dataclass(frozen=True)
class InitResult:
    """Initialized rotations plus the spanning forest and the event trace."""

    rotations: dict[int, Rotation]
    tree_edges: list[tuple[int, int]]
    trace: list[TraceEvent]
    roots: list[int]


def make_state(g: ViewGraph, members: dict[int, Rotation],
               s: int) -> InitState:
    """State with the given nodes already solved (unit-test entry point)."""
    in_family = np.zeros(g.n, dtype=bool)
    for node in members:
        in_family[node] = True
    return InitState(family=sorted(members), new_family=[],
                     in_family=in_family, fixed=dict(members),
                     tree_edges=[], trace=[], s=s)


def _pick_root(g_act: ViewGraph, nodes: np.ndarray) -> int:
    return int(min(nodes, key=lambda v: (-g_act.degree(int(v)), int(v))))


def _pop_base(g_act: ViewGraph, new_family: list[int]) -> int:
    base = min(new_family, key=lambda v: (-g_act.degree(v), v))
    new_family.remove(base)
    return base


def _propagate(g_act: ViewGraph, st: InitState, base: int, eps_val: float,
               s_init: int) -> int:
    """One propagation pass: add every candidate with >= s supports.

    All candidates of the pass are judged under the s the pass started with;
    additions happen in ascending node order.  Returns the number added.
    """
    added: list[tuple[int, int]] = []
    for cand in g_act.neighbors(base):
        cand = int(cand)
        if st.in_family[cand]:
            continue
        sup = count_triplet_supports(g_act, base, cand, eps_val)
        if sup >= st.s:
            added.append((cand, sup))
    for cand, sup in added:
        st.in_family[cand] = True
        st.family.append(cand)
        st.new_family.append(cand)
        st.fixed[cand] = g_act.rel(cand, base) @ st.fixed[base]
        st.tree_edges.append((base, cand))
        st.trace.append(TraceEvent(
            kind="add-support", node=cand, parent=base, supports=sup,
            s_used=st.s, eps_used=st.eps_index, s=s_init, eps_index=1,
            tier_index=st.tier_index))
    return len(added)


def add_by_vote(g_act: ViewGraph, st: InitState, cfg: InitConfig) -> TraceEvent | None:
    """Voting round: the candidate with the most family neighbors joins.

    Each family member votes for every unsolved neighbor it can see.  The
    winner's rotation is chosen among the per-voter propagated candidates:
    they are averaged robustly and the candidate closest to that average (by
    angle) wins, its edge becoming the tree edge.  Ties go to the smallest
    node id.  Returns the trace event, or None when nobody can vote.
    """
    votes: dict[int, list[int]] = {}
    for f in sorted(st.family):
        for nb in g_act.neighbors(f):
            nb = int(nb)
            if not st.in_family[nb]:
                votes.setdefault(nb, []).append(f)
    if not votes:
        return None
    winner = min(votes, key=lambda c: (-len(votes[c]), c))
    voters = votes[winner]
    candidates = [g_act.rel(winner, f) @ st.fixed[f] for f in voters]
    if len(candidates) == 1:
        k = 0
    else:
        avg = geodesic_l1_mean(candidates, cfg.sra)
        dists = [angular_distance(c, avg) for c in candidates]
        k = int(np.argmin(dists))
    parent = voters[k]
    st.in_family[winner] = True
    st.family.append(winner)
    st.new_family.append(winner)
    st.fixed[winner] = candidates[k]
    st.tree_edges.append((parent, winner))
    event = TraceEvent(kind="add-vote", node=winner, parent=parent,
                       votes=len(voters), s_used=0, eps_used=st.eps_index,
                       s=cfg.s_init, eps_index=1, tier_index=st.tier_index)
    st.trace.append(event)
    return event


def init_simplified(g: ViewGraph, cfg: InitConfig) -> InitResult:
    """Reference initializer: one loop threshold, fresh counts at every stall."""
    if cfg.eps is None or len(cfg.eps) != 1:
        raise InvalidConfigError(
            "the reference initializer needs exactly one loop threshold")
    if cfg.use_inlier_counts:
        raise InvalidConfigError(
            "correspondence tiers require the full initializer")
    eps_val = cfg.eps[0]
    st = InitState(family=[], new_family=[], in_family=np.zeros(g.n, dtype=bool),
                   fixed={}, tree_edges=[], trace=[], s=cfg.s_init)
    roots: list[int] = []
    for label in range(g.n_components):
        nodes = g.component_nodes(label)
        comp_family: list[int] = []
        st.s = cfg.s_init
        st.eps_index = 1
        root = _pick_root(g, nodes)
        roots.append(root)
        st.in_family[root] = True
        st.family.append(root)
        comp_family.append(root)
        st.new_family = [root]
        st.fixed[root] = Rotation.identity()
        st.trace.append(TraceEvent(kind="root", node=root, s=st.s,
                                   eps_index=1, tier_index=0))
        remaining = int(nodes.size) - 1
        while remaining > 0:
            while st.new_family:
                n_before = len(st.family)
                base = _pop_base(g, st.new_family)
                n_added = _propagate(g, st, base, eps_val, cfg.s_init)
                comp_family.extend(st.family[n_before:])
                remaining -= n_added
                if n_added:
                    st.s = cfg.s_init
                if remaining == 0:
                    break
            if remaining == 0:
                break
            best, best_count = -1, 0
            for x in sorted(comp_family):
                count = 0
                for cand in g.neighbors(x):
                    cand = int(cand)
                    if st.in_family[cand]:
                        continue
                    if count_triplet_supports(g, x, cand, eps_val) >= st.s:
                        count += 1
                if count > best_count:
                    best, best_count = x, count
            if best_count >= 1:
                st.new_family.append(best)
                continue
            st.s -= 1
            st.trace.append(TraceEvent(kind="s-decrement", s=st.s,
                                       eps_index=1, tier_index=0))
            if st.s == 0:
                n_before = len(st.family)
                event = add_by_vote(g, st, cfg)
                if event is None:
                    raise ComponentExhausted(
                        f"component {label} has unsolved nodes but no votes")
                comp_family.extend(st.family[n_before:])
                remaining -= 1
                st.s = cfg.s_init
    return InitResult(rotations=dict(st.fixed), tree_edges=list(st.tree_edges),
                      trace=list(st.trace), roots=roots)


def init_full(g: ViewGraph, cfg: InitConfig) -> InitResult:
    """Full initializer: threshold ladder, cached counts, correspondence tiers.

    The supported-neighbor table is refreshed only for the node that just
    propagated; at a stall the base is selected by a certify-then-use loop
    (take the table argmax, refresh that row, repeat until the winner survives
    its own refresh).  Because stored counts can only overestimate, the
    certified winner equals the one a fresh recount would give.
    """
    if cfg.eps is None:
        raise InvalidConfigError("the full initializer needs loop thresholds")
    eps = cfg.eps
    m = len(eps)
    tiers = cfg.inlier_tiers if cfg.use_inlier_counts else (0,)
    table = SnTable(g.n, m, cfg.s_init)
    st = InitState(family=[], new_family=[], in_family=np.zeros(g.n, dtype=bool),
                   fixed={}, tree_edges=[], trace=[], s=cfg.s_init)
    roots: list[int] = []
    for label in range(g.n_components):
        nodes = g.component_nodes(label)
        comp_family: list[int] = []
        st.s = cfg.s_init
        st.eps_index = 1
        st.tier_index = 0
        g_act = g.masked(tiers[0])
        root = _pick_root(g_act, nodes)
        roots.append(root)
        st.in_family[root] = True
        st.family.append(root)
        comp_family.append(root)
        st.new_family = [root]
        st.fixed[root] = Rotation.identity()
        st.trace.append(TraceEvent(kind="root", node=root, s=st.s,
                                   eps_index=1, tier_index=0))
        remaining = int(nodes.size) - 1
        while remaining > 0:
            while st.new_family:
                n_before = len(st.family)
                base = _pop_base(g_act, st.new_family)
                n_added = _propagate(g_act, st, base, eps[st.eps_index - 1],
                                     cfg.s_init)
                update_sn_table(table, g_act, base, st.in_family, eps)
                comp_family.extend(st.family[n_before:])
                remaining -= n_added
                if n_added:
                    st.s = cfg.s_init
                    st.eps_index = 1
                if remaining == 0:
                    break
            if remaining == 0:
                break
            # Stalled: pick the family member with the most supported
            # candidates, certifying table rows lazily.
            refreshed: set[int] = set()
            selected = -1
            while True:
                best, best_count = -1, 0
                for x in sorted(comp_family):
                    count = int(table.counts[x, st.eps_index - 1, st.s - 1])
                    if count > best_count:
                        best, best_count = x, count
                if best_count == 0:
                    break
                if best in refreshed:
                    selected = best
                    break
                update_sn_table(table, g_act, best, st.in_family, eps)
                refreshed.add(best)
            if selected >= 0:
                st.new_family.append(selected)
                continue
            if st.eps_index < m:
                st.eps_index += 1
                st.trace.append(TraceEvent(kind="eps-advance", s=st.s,
                                           eps_index=st.eps_index,
                                           tier_index=st.tier_index))
                continue
            st.s -= 1
            st.eps_index = 1
            st.trace.append(TraceEvent(kind="s-decrement", s=st.s,
                                       eps_index=1, tier_index=st.tier_index))
            if st.s == 0:
                n_before = len(st.family)
                event = add_by_vote(g_act, st, cfg)
                if event is not None:
                    comp_family.extend(st.family[n_before:])
                    remaining -= 1
                    st.s = cfg.s_init
                    st.eps_index = 1
                elif st.tier_index < len(tiers) - 1:
                    st.tier_index += 1
                    st.s = cfg.s_init
                    st.eps_index = 1
                    st.trace.append(TraceEvent(kind="tier-advance", s=st.s,
                                               eps_index=1,
                                               tier_index=st.tier_index))
                    g_act = g.masked(tiers[st.tier_index])
                    # The mask changed, so every cached row is suspect; rebuild
                    # them all to restore one-sided staleness.
                    table.reset()
                    for x in comp_family:
                        update_sn_table(table, g_act, x, st.in_family, eps)
                else:
                    raise ComponentExhausted(
                        f"component {label} has unsolved nodes but no votes")
    return InitResult(rotations=dict(st.fixed), tree_edges=list(st.tree_edges),
                      trace=list(st.trace), roots=roots)


def initialize(g: ViewGraph, cfg: InitConfig, full: bool = True) -> InitResult:
    """Dispatch to the full or reference initializer."""
    return init_full(g, cfg) if full else init_simplified(g, cfg)
