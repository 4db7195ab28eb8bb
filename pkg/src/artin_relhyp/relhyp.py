"""From an X-geodesic to a strongly Artin-reduced Γ-path, and thin-bigon scans.

A geodesic ``α`` of the coned-off graph splits into maximal Γ-blocks and
cone-blocks (two cone edges through one cone vertex).  Replacing every
cone-block by a syllable-minimal word of its parabolic gives the path ``β``
with label ``v``; condensing matching boundary syllables of consecutive
cone-block labels gives ``γ`` with label ``u``.  ``verify_pipeline`` checks
every property the construction is supposed to have.
"""

from __future__ import annotations

import logging
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .artin import equal_in_G, is_strongly_artin_reduced, two_generator_runs
from .coned import ConedBall, OutsideBallError, XPath, all_geodesics, hausdorff_points, stable_pairs
from .dihedral import DihedralPair, min_syllable_rep
from .words import Word, concat, format_word, from_syllables

logger = logging.getLogger(__name__)

PIPELINE_CLOSE = 8    # 4-close, doubled
BETA_CLOSE = 4        # 2-close, doubled
BIGON_BOUND = 28      # 14-close, doubled


class MalformedPathError(ValueError):
    pass


@dataclass(frozen=True)
class GammaBlock:
    nodes: tuple        # group vertices along the block
    label: Word

    kind = "gamma"


@dataclass(frozen=True)
class ConeBlock:
    start: int
    cone: int
    end: int
    pair: DihedralPair
    element: Word       # g_k, as read off the coset spanning tree
    label: Word         # v_k, syllable-minimal
    exhaustive: bool

    kind = "cone"


@dataclass(frozen=True)
class BlockPath:
    blocks: tuple
    source: int
    target: int
    path: XPath

    def labels(self) -> list[Word]:
        return [b.label for b in self.blocks]


@dataclass(frozen=True)
class CondensedPath:
    parts: tuple
    word: Word
    origin: BlockPath


def decompose_blocks(ball: ConedBall, p: XPath) -> BlockPath:
    nodes = p.nodes
    if not nodes or not ball.is_group(nodes[0]) or not ball.is_group(nodes[-1]):
        raise MalformedPathError("path must start and end at group vertices")
    blocks = []
    run = [nodes[0]]
    t = 0
    while t < len(nodes) - 1:
        a, b = nodes[t], nodes[t + 1]
        if ball.is_group(b):
            ball.edge_label(a, b)  # raises if not adjacent
            run.append(b)
            t += 1
            continue
        if t + 2 >= len(nodes) or not ball.is_group(nodes[t + 2]):
            raise MalformedPathError(f"cone vertex {b} not followed by a group vertex")
        c = nodes[t + 2]
        cone = ball.cone(b)
        if a not in cone.members or c not in cone.members:
            raise MalformedPathError(f"cone vertex {b} not adjacent to {a} and {c}")
        if len(run) > 1:
            blocks.append(_gamma_block(ball, run))
        g = cone.element_between(a, c)
        if not g:
            raise MalformedPathError("cone-block with trivial element")
        rep = min_syllable_rep(g, cone.pair)
        blocks.append(ConeBlock(a, b, c, cone.pair, g, rep.word, rep.exhaustive))
        run = [c]
        t += 2
    if len(run) > 1:
        blocks.append(_gamma_block(ball, run))
    if not blocks:
        raise MalformedPathError("empty path")
    return BlockPath(tuple(blocks), nodes[0], nodes[-1], p)


def _gamma_block(ball: ConedBall, run: list) -> GammaBlock:
    letters = [ball.edge_label(a, b) for a, b in zip(run, run[1:])]
    label = from_syllables([(abs(x), 1 if x > 0 else -1) for x in letters])
    return GammaBlock(tuple(run), label)


@dataclass(frozen=True)
class Beta:
    parts: tuple        # v_1 ... v_t
    word: Word          # freely reduced product
    letters: tuple      # unreduced letter sequence, as read along β


def build_beta(bp: BlockPath) -> Beta:
    parts = tuple(bp.labels())
    letters = tuple(x for v in parts for x in v.letters())
    return Beta(parts, concat(*parts), letters)


def condense(bp: BlockPath, beta: Beta | None = None) -> CondensedPath:
    """Left-to-right condensation of boundary syllables of cone-block labels."""
    v = list((beta or build_beta(bp)).parts)
    blocks = bp.blocks
    u = [v[0]]
    for k in range(len(blocks) - 1):
        if blocks[k].kind == "cone" and blocks[k + 1].kind == "cone" and v[k] and v[k + 1] \
                and v[k].syllables[-1][0] == v[k + 1].syllables[0][0]:
            s_next = from_syllables([v[k + 1].syllables[0]])
            u[k] = concat(u[k], s_next)
            u.append(Word._trusted(v[k + 1].syllables[1:]))
        else:
            u.append(v[k + 1])
    return CondensedPath(tuple(u), concat(*u), bp)


def _walk_letters(ball: ConedBall, start: int, letters) -> list[int]:
    out = [start]
    cur = start
    for x in letters:
        nxt = ball.nbr[cur].get(x)
        if nxt is None:
            raise OutsideBallError("Γ-path leaves the ball")
        cur = nxt
        out.append(cur)
    return out


def _gamma_points(ball: ConedBall, verts: list[int]) -> list[int]:
    pts = [verts[0]]
    for a, b in zip(verts, verts[1:]):
        pts += [ball.midpoint(a, b), b]
    return pts


def _transport(small: ConedBall, large: ConedBall, node: int) -> int:
    if small is large:
        return node
    if small.is_group(node):
        return large.locate(small.words[node])
    if small.is_cone(node):
        cone = small.cone(node)
        return large.cone_for(large.locate(small.words[cone.root]), cone.pair)
    raise ValueError("only vertices can be transported")


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class PipelineReport:
    source: int
    target: int
    alpha: XPath
    blocks: BlockPath
    v: Word
    u: Word
    checks: list = field(default_factory=list)
    haus_alpha_beta: int | None = None
    haus_beta_gamma: int | None = None
    haus_alpha_gamma: int | None = None

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def record(self) -> str:
        shape = "".join("C" if b.kind == "cone" else "G" for b in self.blocks.blocks)
        return (f"pipeline source={self.source} target={self.target} length={self.alpha.length} "
                f"blocks={shape} v={_tok(self.v)} u={_tok(self.u)} "
                f"h_ab={self.haus_alpha_beta} h_bg={self.haus_beta_gamma} h_ag={self.haus_alpha_gamma} "
                f"ok={int(self.ok)} failed={','.join(c.name for c in self.failures()) or '-'}")


def _tok(w: Word) -> str:
    return format_word(w).replace(" ", ".")


def _first_gen(w: Word):
    return w.syllables[0][0] if w else None


def _last_gen(w: Word):
    return w.syllables[-1][0] if w else None


def verify_pipeline(ball: ConedBall, alpha: XPath, metric_ball: ConedBall | None = None,
                    allow_non_theorem_scope: bool = False) -> PipelineReport:
    """Run α → β → γ and check each stated property.

    ``metric_ball`` (default ``ball``) is used for Hausdorff distances; pass a
    larger ball when β or γ may leave ``ball``.
    """
    spec = ball.spec
    if not spec.is_theorem_scope:
        if not allow_non_theorem_scope:
            raise ValueError("pipeline requires all m_ij >= 7 (theorem scope)")
        warnings.warn("pipeline on a spec outside theorem scope; bounds are not guaranteed", stacklevel=2)
    bp = decompose_blocks(ball, alpha)
    beta = build_beta(bp)
    cp = condense(bp, beta)
    blocks = bp.blocks
    v, u = beta.parts, cp.parts
    rep = PipelineReport(alpha.nodes[0], alpha.nodes[-1], alpha, bp, beta.word, cp.word)
    add = rep.checks.append
    finite = set(spec.finite_pairs())

    def in_pair(g, pair):
        return g is not None and g in (pair.i, pair.j)

    # block shape: Γ-blocks geodesic, cone-blocks well formed
    bad = []
    for k, b in enumerate(blocks):
        if b.kind == "gamma":
            if ball.gamma_distance(b.nodes[0], b.nodes[-1]) != b.label.letter_length:
                bad.append(k)
    add(Check("gamma_geodesic", not bad, f"blocks {bad}" if bad else ""))

    bad = []
    for k, b in enumerate(blocks):
        if b.kind != "gamma":
            continue
        lt = b.label.letters()
        for x, y in zip(lt, lt[1:]):
            gx, gy = abs(x), abs(y)
            if gx == gy or (min(gx, gy), max(gx, gy)) in finite:
                bad.append(k)
                break
    add(Check("gamma_no_parabolic_pair", not bad, f"blocks {bad}" if bad else ""))

    bad = []
    for k in range(len(blocks) - 1):
        a, b = blocks[k], blocks[k + 1]
        if a.kind == "cone" and b.kind == "gamma" and in_pair(_first_gen(b.label), a.pair):
            bad.append(k)
        if a.kind == "gamma" and b.kind == "cone" and in_pair(_last_gen(a.label), b.pair):
            bad.append(k)
    add(Check("boundary_syllables", not bad, f"junctions {bad}" if bad else ""))

    bad = [k for k in range(len(blocks) - 1)
           if blocks[k].kind == "cone" and blocks[k + 1].kind == "cone" and blocks[k].pair == blocks[k + 1].pair]
    add(Check("consecutive_cones_differ", not bad, f"junctions {bad}" if bad else ""))

    # a middle cone-block bridging two neighbours has >= 3 syllables
    bad = []
    for k in range(1, len(blocks) - 1):
        prev, mid, nxt = blocks[k - 1], blocks[k], blocks[k + 1]
        if prev.kind == mid.kind == nxt.kind == "cone":
            j, s = _first_gen(v[k]), _last_gen(v[k])
            if j != s and in_pair(j, prev.pair) and in_pair(s, nxt.pair) and len(v[k]) < 3:
                bad.append(k)
    add(Check("cone_triple", not bad, f"blocks {bad}" if bad else ""))

    # the condensed word u: freely reduced, parts near-minimal and additive
    letters = [x for part in u for x in part.letters()]
    add(Check("u_freely_reduced", all(x != -y for x, y in zip(letters, letters[1:]))))

    bad = []
    for k, b in enumerate(blocks):
        if b.kind == "cone" and u[k]:
            best = min_syllable_rep(u[k], b.pair)
            if len(u[k]) > len(best.word) + 1:
                bad.append(k)
    add(Check("u_parts_near_minimal", not bad, f"blocks {bad}" if bad else ""))

    bad = [k for k in range(len(u) - 1)
           if u[k] and u[k + 1] and _last_gen(u[k]) == _first_gen(u[k + 1])]
    add(Check("u_parts_additive", not bad, f"junctions {bad}" if bad else ""))

    bad = [k for k, b in enumerate(blocks) if b.kind == "gamma" and u[k] != v[k]]
    add(Check("gamma_parts_kept", not bad, f"blocks {bad}" if bad else ""))

    add(Check("condense_preserves_element", equal_in_G(beta.word, cp.word, spec)))

    # cores of long two-generator subwords sit inside one cone part
    add(_core_check(cp, spec))

    # the end product: u strongly Artin-reduced, paths close in X
    add(Check("u_strongly_artin_reduced", is_strongly_artin_reduced(cp.word, spec, allow_non_extra_large=True)))

    mb = metric_ball or ball
    try:
        src = _transport(ball, mb, alpha.nodes[0])
        a_pts = []
        for x, y in zip(alpha.nodes, alpha.nodes[1:]):
            tx, ty = _transport(ball, mb, x), _transport(ball, mb, y)
            a_pts.append(tx)
            if mb.is_group(tx) and mb.is_group(ty):
                a_pts.append(mb.midpoint(tx, ty))
        a_pts.append(_transport(ball, mb, alpha.nodes[-1]))
        b_pts = _gamma_points(mb, _walk_letters(mb, src, beta.letters))
        g_pts = _gamma_points(mb, _walk_letters(mb, src, letters))
    except (OutsideBallError, KeyError) as exc:
        add(Check("paths_in_ball", False, str(exc)))
        return rep
    rep.haus_alpha_beta = hausdorff_points(mb, a_pts, b_pts)
    rep.haus_beta_gamma = hausdorff_points(mb, b_pts, g_pts)
    rep.haus_alpha_gamma = hausdorff_points(mb, a_pts, g_pts)
    add(Check("alpha_beta_close", rep.haus_alpha_beta <= BETA_CLOSE, str(rep.haus_alpha_beta)))
    add(Check("beta_gamma_close", rep.haus_beta_gamma <= BETA_CLOSE, str(rep.haus_beta_gamma)))
    add(Check("alpha_gamma_close", rep.haus_alpha_gamma <= PIPELINE_CLOSE, str(rep.haus_alpha_gamma)))
    if not rep.ok:
        logger.warning("pipeline failure: %s", rep.record())
    return rep


def _core_check(cp: CondensedPath, spec) -> Check:
    # syllable index ranges of the parts inside u
    spans, pos = [], 0
    for part in cp.parts:
        spans.append((pos, pos + len(part)))
        pos += len(part)
    u = cp.word
    blocks = cp.origin.blocks
    bad = []
    for p in spec.finite_pairs():
        pair = DihedralPair(p[0], p[1], spec.labels[p])
        for lo, hi in two_generator_runs(u, pair):
            if hi - lo + 1 < 4:
                continue
            core = (lo + 1, hi)  # syllables lo+1 .. hi-1, half-open
            inside = any(blocks[k].kind == "cone" and a <= core[0] and core[1] <= b
                         for k, (a, b) in enumerate(spans))
            if not inside:
                bad.append((lo, hi))
    return Check("long_cores_in_cone_parts", not bad, f"runs {bad}" if bad else "")


# ---------------------------------------------------------------------------
# Thin bigons
# ---------------------------------------------------------------------------

@dataclass
class ScanReport:
    mode: str
    max_delta: int = 0
    witness: tuple | None = None
    histogram: Counter = field(default_factory=Counter)
    pairs: int = 0
    comparisons: int = 0
    capped: int = 0

    def merge(self, other: "ScanReport") -> "ScanReport":
        out = ScanReport(self.mode, self.max_delta, self.witness, self.histogram + other.histogram,
                         self.pairs + other.pairs, self.comparisons + other.comparisons,
                         self.capped + other.capped)
        if other.max_delta > out.max_delta:
            out.max_delta, out.witness = other.max_delta, other.witness
        return out

    def _see(self, delta: int, witness) -> None:
        self.histogram[delta] += 1
        if self.witness is None or delta > self.max_delta:
            self.max_delta, self.witness = delta, witness

    def records(self) -> list[str]:
        out = [f"scan mode={self.mode} max_delta={self.max_delta} pairs={self.pairs} "
               f"comparisons={self.comparisons} capped={self.capped}"]
        for d in sorted(self.histogram):
            out.append(f"hist mode={self.mode} delta={d} count={self.histogram[d]}")
        if self.witness is not None:
            out.append(f"witness mode={self.mode} " + " ".join(f"{k}={val}" for k, val in self.witness))
        return out


def _pts_array(ball: ConedBall, path: XPath) -> np.ndarray:
    return np.array(ball.path_points(path), dtype=np.int64)


def _hausdorff_matrix(dist: np.ndarray, first: list, second: list) -> np.ndarray:
    """``H[a, b]`` = Hausdorff distance between point sets ``first[a]`` and ``second[b]``."""
    # distance from every node to each path
    near1 = np.stack([dist[p].min(axis=0) for p in first])
    near2 = np.stack([dist[q].min(axis=0) for q in second])
    # farthest point of first[a] from second[b], and vice versa
    out12 = np.stack([near2[:, p].max(axis=1) for p in first])
    out21 = np.stack([near1[:, q].max(axis=1) for q in second]).T
    return np.maximum(out12, out21)


def _max_pairwise(dist: np.ndarray, first: list, second: list | None = None) -> tuple[int, int, int]:
    """Largest Hausdorff distance among geodesic pairs; returns (value, i, j)."""
    h = _hausdorff_matrix(dist, first, first if second is None else second)
    i, j = np.unravel_index(int(np.argmax(h)), h.shape)
    return int(h[i, j]), int(i), int(j)


def _full_distances(ball: ConedBall) -> np.ndarray:
    return ball.rows(range(ball.n_nodes))


def _path_tok(ball: ConedBall, path: XPath) -> str:
    return ".".join(str(n) for n in path.nodes)


def bigon_scan(ball: ConedBall, large: ConedBall, mode: str = "vertex", cap: int = 64, seed: int = 0,
               max_quadrilaterals: int = 2000) -> ScanReport:
    """Max Hausdorff distance between geodesics with shared (or nearby) endpoints.

    ``large`` is the enlarged ball used to keep only distance-stable pairs.
    """
    rng = np.random.default_rng(seed)
    pairs = stable_pairs(ball, large)
    dist = _full_distances(ball)
    if mode == "vertex":
        return _vertex_scan(ball, pairs, dist, cap, rng)
    if mode == "claim":
        return _claim_scan(ball, pairs, dist, cap, rng, max_quadrilaterals)
    raise ValueError(f"unknown scan mode {mode!r}")


def _vertex_scan(ball, pairs, dist, cap, rng) -> ScanReport:
    rep = ScanReport("vertex")
    for u, v in pairs:
        gs = all_geodesics(ball, u, v, cap, rng)
        rep.pairs += 1
        rep.capped += int(gs.capped)
        if len(gs.paths) < 2:
            rep._see(0, (("source", u), ("target", v), ("geodesics", gs.count)))
            continue
        pts = [_pts_array(ball, p) for p in gs.paths]
        rep.comparisons += len(pts) * (len(pts) - 1) // 2
        d, i, j = _max_pairwise(dist, pts)
        rep._see(d, (("source", u), ("target", v), ("geodesics", gs.count),
                     ("p", _path_tok(ball, gs.paths[i])), ("q", _path_tok(ball, gs.paths[j]))))
    return rep


def _near(ball: ConedBall, h: int) -> list[int]:
    """Vertices within Γ-distance 1 of ``h`` or in a common finite coset."""
    out = {h}
    out.update(ball.nbr[h].values())
    for (i, j) in ball.spec.finite_pairs():
        out.update(ball.cones[ball.cone_of[(h, i, j)] - ball.n_group].members)
    return sorted(out)


def _claim_scan(ball, pairs, dist, cap, rng, max_quads) -> ScanReport:
    rep = ScanReport("claim")
    stable = set(pairs)
    near: dict = {}

    def around(h):
        if h not in near:
            near[h] = _near(ball, h)
        return near[h]

    oriented = sorted(pairs + [(v, u) for u, v in pairs])
    total = sum(len(around(h)) * len(around(g)) for h, g in oriented)
    quads = []
    if total <= 4 * max_quads:
        for h1, g1 in oriented:
            for h2 in around(h1):
                for g2 in around(g1):
                    if (h2, g2) != (h1, g1) and (min(h2, g2), max(h2, g2)) in stable:
                        quads.append((h1, g1, h2, g2))
        if len(quads) > max_quads:
            pick = np.sort(rng.choice(len(quads), size=max_quads, replace=False))
            quads = [quads[t] for t in pick]
            rep.capped += 1
    else:
        rep.capped += 1
        seen = set()
        tries = 0
        while len(quads) < max_quads and tries < 50 * max_quads:
            tries += 1
            h1, g1 = oriented[int(rng.integers(len(oriented)))]
            hs, gs_ = around(h1), around(g1)
            h2, g2 = hs[int(rng.integers(len(hs)))], gs_[int(rng.integers(len(gs_)))]
            q = (h1, g1, h2, g2)
            if (h2, g2) == (h1, g1) or q in seen or (min(h2, g2), max(h2, g2)) not in stable:
                continue
            seen.add(q)
            quads.append(q)
    cache: dict = {}

    def geos(a, b):
        if (a, b) not in cache:
            gs = all_geodesics(ball, a, b, cap, rng)
            cache[(a, b)] = (gs, [_pts_array(ball, p) for p in gs.paths])
        return cache[(a, b)]

    for h1, g1, h2, g2 in quads:
        gs1, p1 = geos(h1, g1)
        gs2, p2 = geos(h2, g2)
        rep.pairs += 1
        rep.comparisons += len(p1) * len(p2)
        d, i, j = _max_pairwise(dist, p1, p2)
        rep._see(d, (("h1", h1), ("g1", g1), ("h2", h2), ("g2", g2),
                     ("p", _path_tok(ball, gs1.paths[i])), ("q", _path_tok(ball, gs2.paths[j]))))
    return rep


@dataclass
class DeltaRow:
    name: str
    vertex: ScanReport
    claim: ScanReport | None


@dataclass
class DeltaSummary:
    rows: list
    bound: int = BIGON_BOUND

    @property
    def common(self) -> int:
        vals = [r.vertex.max_delta for r in self.rows] + [r.claim.max_delta for r in self.rows if r.claim]
        return max(vals) if vals else 0

    @property
    def ok(self) -> bool:
        return self.common <= self.bound

    def records(self) -> list[str]:
        out = []
        for r in self.rows:
            claim = r.claim.max_delta if r.claim else "-"
            out.append(f"delta spec={r.name} vertex_max={r.vertex.max_delta} claim_max={claim} "
                       f"vertex_pairs={r.vertex.pairs} claim_quads={r.claim.pairs if r.claim else 0}")
        out.append(f"delta_summary specs={len(self.rows)} common={self.common} bound={self.bound} ok={int(self.ok)}")
        return out


def delta_report(rows: list[DeltaRow]) -> DeltaSummary:
    return DeltaSummary(list(rows))


def sample_pipeline_paths(ball: ConedBall, large: ConedBall, count: int, seed: int = 0) -> list[XPath]:
    """Random geodesics between distance-stable pairs (reproducible by seed)."""
    from .coned import sample_geodesic
    rng = np.random.default_rng(seed)
    pairs = stable_pairs(ball, large)
    if not pairs:
        return []
    pick = rng.choice(len(pairs), size=count, replace=len(pairs) < count)
    out = []
    for t in pick:
        u, v = pairs[int(t)]
        if rng.random() < 0.5:
            u, v = v, u
        out.append(sample_geodesic(ball, u, v, rng))
    return out
