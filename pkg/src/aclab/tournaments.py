"""Planted tournament model and the deterministic three-phase recovery.

Phase 1 peels off one planted class per round in O(n^2) time.  The
vertex u* with the most extreme out/in imbalance anchors a triangle
statistic X(v) whose mean is (n - s)/4 inside u*'s class and (n - 2)/4
outside; class members form a narrow band while outsiders spread widely
across it, so no cut on X alone can isolate the class.  Instead, an
exactly-maximum transitive chain is extracted from the vertices nearest
the band median (almost surely all classmates), and the class is exactly
the set of vertices that slot into that chain's order: an outsider fits
a long random chain with probability about (len + 1) / 2^len.  Phase 2
enumerates small transitive bottom sets for the mid-size classes phase 1
cannot see, and phase 3 finishes the tail either exactly (backtracking)
or greedily.

All randomness flows from explicit seeds through the library generator;
identical (tournament, config) inputs give identical reports.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .graphs import Coloring, InvariantError, Tournament, is_transitive, is_valid_acyclic_coloring
from .oracle import (
    OracleBudget,
    decide_acyclic_colorable,
    max_transitive_masks,
    max_transitive_subtournament,
)
from .rng import Rng

APPROX_TAIL_FACTOR = 24 * math.log(2)


# --- generation -----------------------------------------------------------


@dataclass(frozen=True)
class PlantedSpec:
    """Hidden class sizes (nonincreasing) and the generator seed."""

    sizes: tuple[int, ...]
    seed: int

    def __post_init__(self):
        if not self.sizes:
            raise InvariantError("need at least one class")
        if any(s < 1 for s in self.sizes):
            raise InvariantError("class sizes must be positive")
        if list(self.sizes) != sorted(self.sizes, reverse=True):
            raise InvariantError("class sizes must be nonincreasing")

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def r(self) -> int:
        return len(self.sizes)


def _trusted_tournament(matrix: np.ndarray) -> Tournament:
    """Build a Tournament from a 0/1 beats-matrix without re-validation.

    The matrix is produced by our own generators (exactly one of M[i,j],
    M[j,i] set, zero diagonal); tests cross-check this path against the
    validating constructor on small instances.
    """
    n = matrix.shape[0]
    t = Tournament.__new__(Tournament)
    t.n = n
    pairs = np.argwhere(matrix)
    t.arcs = tuple(map(tuple, pairs.tolist()))
    out_adj = []
    in_adj = []
    for i in range(n):
        out_adj.append(int.from_bytes(
            np.packbits(matrix[i], bitorder="little").tobytes(), "little"))
        in_adj.append(int.from_bytes(
            np.packbits(matrix[:, i], bitorder="little").tobytes(), "little"))
    t.out_adj = tuple(out_adj)
    t.in_adj = tuple(in_adj)
    return t


def _pair_bit_matrix(n: int, rng: Rng) -> np.ndarray:
    """Upper-triangular random bits, consumed in lexicographic pair order."""
    bits = rng.bit_array(n * (n - 1) // 2)
    upper = np.zeros((n, n), dtype=np.uint8)
    pos = 0
    for i in range(n):
        row_len = n - 1 - i
        upper[i, i + 1:] = bits[pos:pos + row_len]
        pos += row_len
    return upper


def generate_planted(spec: PlantedSpec) -> tuple[Tournament, tuple[tuple[int, ...], ...]]:
    """Seed-deterministic planted instance plus its hidden partition.

    Class layout lives in position space (classes are contiguous position
    ranges, transitive in position order); a seeded shuffle maps positions
    to vertex labels first, so membership is not positional.  One
    orientation bit is consumed per vertex pair in fixed order; bits for
    same-class pairs are discarded in favor of the transitive order.
    """
    n = spec.n
    rng = Rng(spec.seed)
    labels = list(range(n))
    rng.shuffle(labels)
    upper = _pair_bit_matrix(n, rng)

    class_of = np.repeat(np.arange(spec.r), np.array(spec.sizes))
    pos = np.arange(n)
    same = class_of[:, None] == class_of[None, :]
    tri = pos[:, None] < pos[None, :]
    # position i beats position j (i<j) iff same class (transitive order)
    # or the pair's random bit is set
    oriented = np.where(same, 1, upper).astype(np.uint8)
    beats = np.where(tri, oriented, 0) + np.where(tri.T, 1 - oriented.T, 0)
    beats = beats.astype(np.uint8)
    np.fill_diagonal(beats, 0)

    perm = np.array(labels)
    matrix = np.zeros((n, n), dtype=np.uint8)
    matrix[np.ix_(perm, perm)] = beats

    hidden = []
    cursor = 0
    for s in spec.sizes:
        hidden.append(tuple(labels[cursor + i] for i in range(s)))
        cursor += s
    return _trusted_tournament(matrix), tuple(hidden)


def generate_uniform(n: int, seed: int) -> Tournament:
    """Every pair oriented independently and equiprobably."""
    if n < 1:
        raise InvariantError("need n >= 1")
    rng = Rng(seed)
    upper = _pair_bit_matrix(n, rng)
    tri = np.arange(n)[:, None] < np.arange(n)[None, :]
    matrix = (np.where(tri, upper, 0) + np.where(tri.T, 1 - upper.T, 0)).astype(np.uint8)
    np.fill_diagonal(matrix, 0)
    return _trusted_tournament(matrix)


# --- greedy bounds --------------------------------------------------------


def _greedy_transitive_mask(t: Tournament, alive: int) -> list[int]:
    chain: list[int] = []
    while alive:
        best_v, best_d = -1, -1
        m = alive
        while m:
            low = m & -m
            v = low.bit_length() - 1
            m ^= low
            d = (t.out_adj[v] & alive).bit_count()
            if d > best_d:
                best_v, best_d = v, d
        chain.append(best_v)
        alive &= t.out_adj[best_v]
    return chain


def greedy_transitive(t: Tournament) -> list[int]:
    """Greedy chain: repeatedly take a max out-degree vertex, keep its out-set.

    Every selected vertex beats everything selected later, so the result
    is a transitive order; halving guarantees at least ceil(log2(n + 1))
    vertices.  Ties break toward the lowest id.
    """
    if t.n == 0:
        return []
    return _greedy_transitive_mask(t, (1 << t.n) - 1)


def greedy_acyclic_coloring(t: Tournament, eps: float) -> Coloring:
    """Extract greedy transitive classes until at most n^(1-eps) remain.

    Leftover vertices become singleton classes, giving roughly
    n / log2(n) + n^(1-eps) colors in total.
    """
    if not (0 < eps < 1):
        raise ValueError("need 0 < eps < 1")
    n = t.n
    threshold = n ** (1 - eps)
    alive = (1 << n) - 1
    classes: list[list[int]] = []
    remaining = n
    while remaining > threshold:
        chain = _greedy_transitive_mask(t, alive)
        classes.append(chain)
        for v in chain:
            alive &= ~(1 << v)
        remaining -= len(chain)
    colors = [-1] * n
    for i, cls in enumerate(classes):
        for v in cls:
            colors[v] = i
    nxt = len(classes)
    for v in range(n):
        if colors[v] < 0:
            colors[v] = nxt
            nxt += 1
    coloring = Coloring(tuple(colors), max(nxt, 1))
    assert is_valid_acyclic_coloring(t, coloring)
    return coloring


# --- recovery -------------------------------------------------------------


@dataclass(frozen=True)
class RecoveryConfig:
    """Tuning knobs; defaults follow the desk-scale calibration.

    d_j = c * sqrt(n_j) * ln(n_j) is the noise radius used by the phase-1
    stop rule.  k0 and u_size default per-residual to ceil(24 ln n') and
    min(3, ceil(c ln n')).
    """

    c: float = 0.5
    k0: int | None = None
    u_size: int | None = None
    phase2_cap: int = 10_000_000
    tail_mode: str = "exact"  # "exact" | "approximate"
    exact_tail_limit: int = 25
    max_phase1_rounds: int | None = None
    anchor_size: int = 32
    phase2_candidate_limit: int = 64
    phase2_search_nodes: int = 500_000

    def __post_init__(self):
        if self.c <= 0 or self.phase2_cap <= 0:
            raise ValueError("parameters must be positive")
        if self.tail_mode not in ("exact", "approximate"):
            raise ValueError("tail_mode must be 'exact' or 'approximate'")


DEFAULT_CONFIG = RecoveryConfig()


@dataclass(frozen=True)
class RoundStats:
    n_j: int
    d_j: float
    u_star: int
    threshold: float
    class_size: int | None
    stop_reason: str | None


@dataclass(frozen=True)
class Phase2Stats:
    examined: int
    capped: bool
    classes_found: int


@dataclass
class RecoveryReport:
    n: int
    classes: list[tuple[int, ...]]
    class_phase: list[int]
    rounds: list[RoundStats]
    phase2: Phase2Stats | None
    tail_mode_used: str | None
    approx_factor: float | None
    phase_wall_ms: dict[int, float]
    exact_match: bool | None = None

    @property
    def r_found(self) -> int:
        return len(self.classes)

    def coloring(self) -> Coloring:
        colors = [-1] * self.n
        for i, cls in enumerate(self.classes):
            for v in cls:
                colors[v] = i
        return Coloring(tuple(colors), max(1, len(self.classes)))

    def to_json_dict(self, include_timings: bool = False) -> dict:
        out = {
            "n": self.n,
            "r_found": self.r_found,
            "classes": [list(c) for c in self.classes],
            "class_phase": list(self.class_phase),
            "rounds": [
                {
                    "n_j": rs.n_j,
                    "d_j": rs.d_j,
                    "u_star": rs.u_star,
                    "threshold": rs.threshold,
                    "class_size": rs.class_size,
                    "stop_reason": rs.stop_reason,
                }
                for rs in self.rounds
            ],
            "phase2": (
                None
                if self.phase2 is None
                else {
                    "examined": self.phase2.examined,
                    "capped": self.phase2.capped,
                    "classes_found": self.phase2.classes_found,
                }
            ),
            "tail_mode_used": self.tail_mode_used,
            "approx_factor": self.approx_factor,
            "exact_match": self.exact_match,
        }
        if include_timings:
            out["phase_wall_ms"] = {str(k): v for k, v in self.phase_wall_ms.items()}
        return out


def _matrix_of(t: Tournament) -> np.ndarray:
    n = t.n
    nbytes = (n + 7) // 8
    rows = np.frombuffer(
        b"".join(r.to_bytes(nbytes, "little") for r in t.out_adj), dtype=np.uint8
    ).reshape(n, nbytes)
    return np.unpackbits(rows, axis=1, bitorder="little")[:, :n]


@dataclass(frozen=True)
class RoundOutcome:
    found: bool
    class_vertices: tuple[int, ...]  # transitive order, original ids
    stats: RoundStats


def _transitive_order(sub: np.ndarray) -> np.ndarray | None:
    """Order by inner out-degree; valid iff degrees are a permutation of 0..m-1."""
    degs = sub.sum(axis=1).astype(np.int64)
    order = np.argsort(-degs, kind="stable")
    m = sub.shape[0]
    if not np.array_equal(degs[order], np.arange(m - 1, -1, -1)):
        return None
    return order


def _phase1_round_matrix(
    a: np.ndarray, ids: np.ndarray, cfg: RecoveryConfig
) -> RoundOutcome:
    m = a.shape[0]
    d_j = cfg.c * math.sqrt(m) * math.log(m)
    if m == 1:
        return RoundOutcome(
            True, (int(ids[0]),), RoundStats(1, d_j, int(ids[0]), 0.0, 1, None)
        )
    out_deg = a.sum(axis=1, dtype=np.int64)
    in_deg = a.sum(axis=0, dtype=np.int64)
    ddiff = out_deg - in_deg
    u = int(np.argmax(np.abs(ddiff)))

    # triangle statistic against u*: X(v) counts w with v->w->u* when
    # u*->v, or u*->w->v when v->u*.  Members of u*'s class cluster in a
    # narrow band; other vertices spread widely around it, so a fixed
    # cut cannot isolate the class.  Instead: anchor on the vertices
    # nearest the band median, extract an exactly-transitive chain from
    # them, and admit exactly the vertices that slot into that chain.
    to_u = (a & a[:, u][None, :]).sum(axis=1, dtype=np.int64)
    from_u = (a[u][:, None] & a).sum(axis=0, dtype=np.int64)
    x = np.where(a[u] == 1, to_u, from_u).astype(np.float64)
    x[u] = np.inf

    # u* sits at an end of its class order, so the class lies on one side
    side = a[u] == 1 if ddiff[u] >= 0 else a[:, u] == 1
    side[u] = False
    pool = np.flatnonzero(side)
    med = float(np.median(x[pool]))

    def stop(reason: str, size: int | None) -> RoundOutcome:
        return RoundOutcome(
            False, (), RoundStats(m, d_j, int(ids[u]), med, size, reason)
        )

    take = min(cfg.anchor_size, pool.size)
    nearest = pool[np.lexsort((pool, np.abs(x[pool] - med)))][:take]
    anchors = np.concatenate([[u], nearest])

    chain = _exact_chain(a, anchors)
    if chain.size < 1:
        return stop("no transitive anchor chain", 0)

    in_chain = np.zeros(m, dtype=bool)
    in_chain[chain] = True
    others = np.flatnonzero(~in_chain)
    rows = a[np.ix_(others, chain)].astype(np.int8)
    fits = np.all(np.diff(rows, axis=1) >= 0, axis=1)
    members = np.concatenate([chain, others[fits]])

    sub = a[np.ix_(members, members)]
    order = _transitive_order(sub)
    if order is None:
        return stop("refined class is not transitive", int(members.size))
    size = int(members.size)
    if size < m and size <= 2 * d_j + 2:
        return stop("class size within noise floor", size)
    ordered = members[order]
    return RoundOutcome(
        True,
        tuple(int(ids[v]) for v in ordered),
        RoundStats(m, d_j, int(ids[u]), med, size, None),
    )


def _exact_chain(a: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """Maximum transitive subset of the anchor vertices, in chain order."""
    sub = a[np.ix_(anchors, anchors)]
    packed = np.packbits(sub, axis=1, bitorder="little")
    masks = [int.from_bytes(row.tobytes(), "little") for row in packed]
    res = max_transitive_masks(masks, OracleBudget(2_000_000, 30.0))
    picked = np.array(sorted(res.vertices), dtype=int)
    order = _transitive_order(sub[np.ix_(picked, picked)])
    assert order is not None
    return anchors[picked[order]]


def phase1_round(t: Tournament, cfg: RecoveryConfig = DEFAULT_CONFIG) -> RoundOutcome:
    """One peeling round applied to a full tournament."""
    if t.n < 1:
        raise ValueError("empty tournament")
    return _phase1_round_matrix(_matrix_of(t), np.arange(t.n), cfg)


def _phase2_defaults(cfg: RecoveryConfig, n_resid: int) -> tuple[int, int]:
    u_size = cfg.u_size
    if u_size is None:
        u_size = max(1, min(3, math.ceil(cfg.c * math.log(max(n_resid, 2)))))
    k0 = cfg.k0
    if k0 is None:
        k0 = math.ceil(24 * math.log(max(n_resid, 2)))
    return u_size, max(1, k0)


def phase2_enumerate(
    t: Tournament,
    residual: list[int],
    cfg: RecoveryConfig = DEFAULT_CONFIG,
) -> tuple[list[tuple[int, ...]], Phase2Stats]:
    """Enumerate transitive bottom sets and grow them into candidate classes.

    For each transitive U of the configured size, V is U plus every
    vertex dominating all of U; the candidate Z is a maximum transitive
    subset of V.  Candidates of size at least k0 are accepted greedily in
    nonincreasing size, discarding any that intersect an accepted one.
    The examined-U count is capped, with an explicit overflow flag.
    """
    n_resid = len(residual)
    if n_resid == 0:
        return [], Phase2Stats(0, False, 0)
    u_size, k0 = _phase2_defaults(cfg, n_resid)
    u_size = min(u_size, n_resid)
    resid_mask = 0
    for v in residual:
        resid_mask |= 1 << v

    examined = 0
    capped = False
    candidates: set[tuple[int, ...]] = set()
    residual_sorted = sorted(residual)
    for combo in combinations(residual_sorted, u_size):
        if examined >= cfg.phase2_cap:
            capped = True
            break
        examined += 1
        if not is_transitive(t, combo):
            continue
        dominators = resid_mask
        for x in combo:
            dominators &= t.in_adj[x]
        v_mask = dominators
        for x in combo:
            v_mask |= 1 << x
        v_count = v_mask.bit_count()
        if v_count < k0:
            continue
        if v_count > cfg.phase2_candidate_limit:
            capped = True
            continue
        members = [v for v in residual_sorted if (v_mask >> v) & 1]
        induced, local_ids = t.induced(members)
        res = max_transitive_subtournament(
            induced, OracleBudget(cfg.phase2_search_nodes, 60.0)
        )
        if not res.exact:
            capped = True
        z = tuple(sorted(local_ids[i] for i in res.vertices))
        if len(z) < k0:
            continue
        closed = _chain_closure(t, z, residual_sorted)
        if closed is not None:
            candidates.add(closed)

    chosen: list[tuple[int, ...]] = []
    used: set[int] = set()
    for z in sorted(candidates, key=lambda z: (-len(z), z)):
        if used.intersection(z):
            continue
        chosen.append(z)
        used.update(z)

    ordered_classes = []
    for z in chosen:
        induced, local_ids = t.induced(z)
        sub = _matrix_of(induced)
        order = _transitive_order(sub)
        assert order is not None
        ordered_classes.append(tuple(local_ids[i] for i in order))
    return ordered_classes, Phase2Stats(examined, capped, len(chosen))


def _chain_closure(
    t: Tournament, z: tuple[int, ...], residual: list[int]
) -> tuple[int, ...] | None:
    """Close a transitive candidate over everything in the residual that
    slots into its order; None when the closure is not transitive.

    True classes close to themselves (plus any genuinely order-compatible
    vertex), while chains mixing two classes almost never close cleanly,
    so this acts as a precision filter on phase-2 candidates.
    """
    chain_mask = 0
    for v in z:
        chain_mask |= 1 << v
    order = sorted(z, key=lambda v: -(t.out_adj[v] & chain_mask).bit_count())
    members = list(z)
    for v in residual:
        if (chain_mask >> v) & 1:
            continue
        pattern = [(t.out_adj[v] >> w) & 1 for w in order]
        if all(pattern[i] <= pattern[i + 1] for i in range(len(pattern) - 1)):
            members.append(v)
    if not is_transitive(t, members):
        return None
    return tuple(sorted(members))


class TailSizeError(RuntimeError):
    """Exact tail partitioning refused; the residual is too large."""


def phase3_tail(
    t: Tournament,
    residual: list[int],
    cfg: RecoveryConfig = DEFAULT_CONFIG,
) -> list[tuple[int, ...]]:
    """Partition the leftover vertices into transitive classes.

    Exact mode finds a minimum partition by backtracking and refuses
    residuals larger than the configured limit; approximate mode extracts
    greedy transitive chains (factor about 24 ln 2 in class count).
    """
    if not residual:
        return []
    induced, ids = t.induced(residual)
    if cfg.tail_mode == "exact":
        if induced.n > cfg.exact_tail_limit:
            raise TailSizeError(
                f"residual of {induced.n} vertices exceeds the exact limit "
                f"{cfg.exact_tail_limit}; use tail_mode='approximate'"
            )
        r = 1
        while True:
            res = decide_acyclic_colorable(induced, r)
            if res.verdict == "yes":
                classes = []
                for c in range(r):
                    members = res.witness.class_members(c)
                    if not members:
                        continue
                    sub = _matrix_of(induced)[np.ix_(members, members)]
                    order = _transitive_order(sub)
                    assert order is not None
                    classes.append(tuple(ids[members[i]] for i in order))
                return classes
            r += 1
    alive = (1 << induced.n) - 1
    classes = []
    while alive:
        chain = _greedy_transitive_mask(induced, alive)
        classes.append(tuple(ids[v] for v in chain))
        for v in chain:
            alive &= ~(1 << v)
    return classes


def recover(
    t: Tournament,
    cfg: RecoveryConfig = DEFAULT_CONFIG,
    truth: tuple[tuple[int, ...], ...] | None = None,
) -> RecoveryReport:
    """Run the three phases and return the validated partition.

    Phase 1 repeats until it stops, phase 2 harvests mid-size classes,
    phase 3 partitions whatever remains.  The final partition always
    passes the acyclic-coloring validity check; with ground truth given,
    the exact-match flag compares unordered class sets.
    """
    n = t.n
    wall: dict[int, float] = {}
    rounds: list[RoundStats] = []
    classes: list[tuple[int, ...]] = []
    phases: list[int] = []

    t0 = time.perf_counter()
    matrix = _matrix_of(t)
    ids = np.arange(n)
    while ids.size > 0:
        if cfg.max_phase1_rounds is not None and len(rounds) >= cfg.max_phase1_rounds:
            break
        outcome = _phase1_round_matrix(matrix, ids, cfg)
        rounds.append(outcome.stats)
        if not outcome.found:
            break
        classes.append(outcome.class_vertices)
        phases.append(1)
        keep_mask = np.ones(ids.size, dtype=bool)
        id_pos = {int(v): i for i, v in enumerate(ids)}
        for v in outcome.class_vertices:
            keep_mask[id_pos[v]] = False
        matrix = matrix[np.ix_(keep_mask, keep_mask)]
        ids = ids[keep_mask]
    wall[1] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    residual = [int(v) for v in ids]
    phase2_stats: Phase2Stats | None = None
    if residual:
        found, phase2_stats = phase2_enumerate(t, residual, cfg)
        for cls in found:
            classes.append(cls)
            phases.append(2)
            for v in cls:
                residual.remove(v)
    wall[2] = (time.perf_counter() - t0) * 1000

    t0 = time.perf_counter()
    tail_mode_used = None
    approx_factor = None
    if residual:
        mode = cfg.tail_mode
        if mode == "exact" and len(residual) > cfg.exact_tail_limit:
            mode = "approximate"
            tail_mode_used = "approximate (residual above exact limit)"
        else:
            tail_mode_used = mode
        tail_cfg = RecoveryConfig(
            c=cfg.c,
            k0=cfg.k0,
            u_size=cfg.u_size,
            phase2_cap=cfg.phase2_cap,
            tail_mode=mode,
            exact_tail_limit=cfg.exact_tail_limit,
        )
        for cls in phase3_tail(t, residual, tail_cfg):
            classes.append(cls)
            phases.append(3)
        if mode == "approximate":
            approx_factor = APPROX_TAIL_FACTOR
    wall[3] = (time.perf_counter() - t0) * 1000

    report = RecoveryReport(
        n=n,
        classes=classes,
        class_phase=phases,
        rounds=rounds,
        phase2=phase2_stats,
        tail_mode_used=tail_mode_used,
        approx_factor=approx_factor,
        phase_wall_ms=wall,
    )
    coloring = report.coloring()
    assert is_valid_acyclic_coloring(t, coloring)
    for cls in classes:
        assert is_transitive(t, cls)
    if truth is not None:
        report.exact_match = {frozenset(c) for c in classes} == {
            frozenset(c) for c in truth
        }
    return report
