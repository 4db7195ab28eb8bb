"""Finite balls of the Cayley graph and of the coned-off Cayley graph.

All lengths are doubled so that cone edges (length 1/2) become 1 and every
Cayley edge becomes 2.  Internally the graph is barycentrically subdivided:
each Cayley edge gets a midpoint node, after which every edge has unit
length and plain BFS gives exact doubled distances.

Node ids: group vertices ``0..N-1``, cone vertices ``N..N+C-1``, edge
midpoints ``N+C..N+C+E-1``.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .artin import abelian_image, check_extra_large, equal_in_G
from .dihedral import DihedralPair
from .words import EMPTY, INF, GroupSpec, Word, concat, format_word, invert, letter_word

DEFAULT_VERTEX_CAP = 250_000
VERTEX_CAP_ENV = "ARTIN_RELHYP_VERTEX_CAP"


class ResourceCapError(RuntimeError):
    pass


class OutsideBallError(LookupError):
    pass


def vertex_cap() -> int:
    value = os.environ.get(VERTEX_CAP_ENV)
    return int(value) if value else DEFAULT_VERTEX_CAP


@dataclass(frozen=True)
class ConeVertex:
    pair: DihedralPair
    members: frozenset
    root: int
    # member id -> word in a_i, a_j leading from the root to the member
    paths: dict = field(compare=False, hash=False, repr=False)

    def element_between(self, h: int, h2: int) -> Word:
        """Two-generator word for ``h^-1 h2`` read off the coset spanning tree."""
        return concat(invert(self.paths[h]), self.paths[h2])


@dataclass(frozen=True)
class XPath:
    """Vertex sequence of a path in X (group and cone node ids)."""

    nodes: tuple
    length: int  # doubled


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


class _CayleyBall:
    """Γ-ball of a given radius, vertices certified distinct by ``equal_in_G``."""

    def __init__(self, spec: GroupSpec, radius: int, cap: int):
        self.spec = spec
        self.radius = radius
        self.words: list[Word] = [EMPTY]
        self.depth: list[int] = [0]
        self.index: dict = {EMPTY: 0}
        self.nbr: list[dict] = [{}]
        self.comparisons = 0
        m_min = spec.min_label()
        # distinct reduced words can only coincide when their quotient holds a
        # relator piece of >= 2m - 3 syllables
        self._threshold = None if m_min is INF else 2 * m_min - 3
        self._pairs = [(p, 2 * spec.labels[p] - 3) for p in spec.finite_pairs()]
        self._suffix: dict = {p: {} for p, _ in self._pairs}
        self._long: list[int] = []
        self._buckets: dict = {}
        self._abel: list = []
        self._add_bucket(0)
        letters = []
        for g in range(1, spec.n + 1):
            letters += [g, -g]
        self.letters = letters
        frontier = [0]
        for d in range(radius + 1):
            nxt = []
            for v in frontier:
                for x in letters:
                    if x in self.nbr[v]:
                        continue
                    target = self._resolve(v, x, create=d < radius, cap=cap)
                    if target is None:
                        continue
                    self.nbr[v][x] = target
                    self.nbr[target][-x] = v
                    if target == len(self.words) - 1 and self.depth[target] == d + 1 and target not in nxt:
                        nxt.append(target)
            frontier = nxt

    def _runs(self, w: Word) -> tuple[dict, bool]:
        """Syllable length of the maximal suffix in each finite pair, and whether
        some two-generator run is already long enough to hold a relator piece."""
        suffix, long_run = {}, False
        sylls = w.syllables
        for p, need in self._pairs:
            best = cur = 0
            for g, _ in sylls:
                cur = cur + 1 if g in p else 0
                best = max(best, cur)
            suffix[p] = cur
            long_run = long_run or best >= need
        return suffix, long_run

    def _add_bucket(self, vid: int) -> None:
        w = self.words[vid]
        key = abelian_image(w, self.spec)
        self._abel.append(key)
        self._buckets.setdefault(key, []).append(vid)
        suffix, long_run = self._runs(w)
        for p, a in suffix.items():
            self._suffix[p].setdefault(a, []).append(vid)
        if long_run:
            self._long.append(vid)

    def _suspects(self, cand: Word) -> list[int]:
        # w1 w2^-1 = 1 forces a relator piece of >= 2m - 3 syllables inside one
        # two-generator run of the reduced quotient: either already inside one
        # word, or made of the two maximal suffixes in that pair
        suffix, long_run = self._runs(cand)
        if long_run:
            return self._buckets.get(abelian_image(cand, self.spec), [])
        found = set(self._long)
        for p, need in self._pairs:
            a = suffix[p]
            for b, vids in self._suffix[p].items():
                if a + b >= need:
                    found.update(vids)
        if not found:
            return []
        key = abelian_image(cand, self.spec)
        return sorted(u for u in found if self._abel[u] == key)

    def _resolve(self, v: int, x: int, create: bool, cap: int) -> int | None:
        cand = concat(self.words[v], letter_word(x))
        hit = self.index.get(cand)
        if hit is not None:
            return hit
        d = self.depth[v]
        if self._threshold is not None and cand.letter_length + d + 1 >= self._threshold:
            for u in self._suspects(cand):
                if abs(self.depth[u] - d) > 1:
                    continue
                self.comparisons += 1
                if equal_in_G(cand, self.words[u], self.spec):
                    self.index[cand] = u
                    return u
        if not create:
            return None
        if len(self.words) >= cap:
            raise ResourceCapError(f"ball exceeds vertex cap {cap} (set {VERTEX_CAP_ENV} to raise)")
        vid = len(self.words)
        self.words.append(cand)
        self.depth.append(d + 1)
        self.index[cand] = vid
        self.nbr.append({})
        self._add_bucket(vid)
        return vid


def _coset_components(big: _CayleyBall, pair: DihedralPair, max_depth: int) -> _UnionFind:
    uf = _UnionFind(len(big.words))
    gens = {pair.i, pair.j}
    for v, nb in enumerate(big.nbr):
        if big.depth[v] > max_depth:
            continue
        for x, u in nb.items():
            if abs(x) in gens and big.depth[u] <= max_depth:
                uf.union(v, u)
    return uf


def _restricted_partition(big: _CayleyBall, uf: _UnionFind, radius: int) -> frozenset:
    groups: dict = {}
    for v in range(len(big.words)):
        if big.depth[v] <= radius:
            groups.setdefault(uf.find(v), set()).add(v)
    return frozenset(frozenset(g) for g in groups.values())


class ConedBall:
    """Ball of radius ``R`` in X, cosets resolved inside radius ``R + S``."""

    def __init__(self, spec: GroupSpec, radius: int, slack: int = 0, cap: int | None = None,
                 allow_non_extra_large: bool = False):
        if radius < 0 or slack < 0:
            raise ValueError("radius and slack must be >= 0")
        check_extra_large(spec, allow_non_extra_large)
        self.spec = spec
        self.radius = radius
        self.slack = slack
        cap = cap if cap is not None else vertex_cap()
        big = _CayleyBall(spec, radius + slack, cap)
        self.comparisons = big.comparisons

        keep = [v for v in range(len(big.words)) if big.depth[v] <= radius]
        remap = {v: t for t, v in enumerate(keep)}
        self.words: list[Word] = [big.words[v] for v in keep]
        self.depth: list[int] = [big.depth[v] for v in keep]
        self.index: dict = {w: remap[v] for w, v in big.index.items() if v in remap}
        self.nbr: list[dict] = [
            {x: remap[u] for x, u in big.nbr[v].items() if u in remap} for v in keep]
        self.n_group = len(keep)

        self.gamma_edges: list[tuple[int, int, int]] = []  # (u, v, gen) with v = u a_gen
        for v in range(self.n_group):
            for x, u in self.nbr[v].items():
                if x > 0:
                    self.gamma_edges.append((v, u, x))
        self.gamma_edges.sort()

        self.cones: list[ConeVertex] = []
        self.cone_of: dict = {}
        stable = []
        for p in spec.finite_pairs():
            pair = DihedralPair(p[0], p[1], spec.labels[p])
            uf = _coset_components(big, pair, radius + slack)
            groups: dict = {}
            for v in keep:
                groups.setdefault(uf.find(v), []).append(v)
            for root_big, members_big in sorted(groups.items(), key=lambda kv: min(kv[1])):
                paths_big = self._component_paths(big, pair, min(members_big), radius + slack)
                members = frozenset(remap[v] for v in members_big)
                paths = {remap[v]: paths_big[v] for v in members_big}
                cid = self.n_group + len(self.cones)
                self.cones.append(ConeVertex(pair, members, min(members), paths))
                for v in members:
                    self.cone_of[(v, pair.i, pair.j)] = cid
            if slack >= 1:
                prev = _coset_components(big, pair, radius + slack - 1)
                stable.append(_restricted_partition(big, uf, radius) == _restricted_partition(big, prev, radius))
        self.stabilized = bool(stable) and all(stable) if slack >= 1 else False
        if not spec.finite_pairs():
            self.stabilized = slack >= 1

        self.n_cone = len(self.cones)
        self.n_nodes = self.n_group + self.n_cone + len(self.gamma_edges)
        self._midpoint = {}
        for t, (u, v, _) in enumerate(self.gamma_edges):
            mid = self.n_group + self.n_cone + t
            self._midpoint[(u, v)] = mid
            self._midpoint[(v, u)] = mid
        self._build_graph()
        self._rows: dict = {}

    @staticmethod
    def _component_paths(big: _CayleyBall, pair: DihedralPair, root: int, max_depth: int) -> dict:
        gens = {pair.i, pair.j}
        paths = {root: EMPTY}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for x, u in sorted(big.nbr[v].items(), key=lambda kv: (abs(kv[0]), kv[0] < 0)):
                if abs(x) in gens and big.depth[u] <= max_depth and u not in paths:
                    paths[u] = concat(paths[v], letter_word(x))
                    queue.append(u)
        return paths

    def _build_graph(self) -> None:
        rows, cols = [], []
        for t, (u, v, _) in enumerate(self.gamma_edges):
            mid = self.n_group + self.n_cone + t
            rows += [u, mid, v, mid]
            cols += [mid, u, mid, v]
        for c, cone in enumerate(self.cones):
            cid = self.n_group + c
            for v in cone.members:
                rows += [cid, v]
                cols += [v, cid]
        data = np.ones(len(rows), dtype=np.int8)
        self.graph = csr_matrix((data, (rows, cols)), shape=(self.n_nodes, self.n_nodes))
        # adjacency in X itself (no midpoints), with doubled lengths
        self.x_adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n_group + self.n_cone)]
        for u, v, _ in self.gamma_edges:
            self.x_adj[u].append((v, 2))
            self.x_adj[v].append((u, 2))
        for c, cone in enumerate(self.cones):
            cid = self.n_group + c
            for v in sorted(cone.members):
                self.x_adj[cid].append((v, 1))
                self.x_adj[v].append((cid, 1))
        for adj in self.x_adj:
            adj.sort()

    # -- queries -----------------------------------------------------------

    def __repr__(self) -> str:
        return (f"ConedBall(R={self.radius}, S={self.slack}, group={self.n_group}, "
                f"cones={self.n_cone}, gamma_edges={len(self.gamma_edges)})")

    def is_group(self, node: int) -> bool:
        return node < self.n_group

    def is_cone(self, node: int) -> bool:
        return self.n_group <= node < self.n_group + self.n_cone

    def cone(self, node: int) -> ConeVertex:
        return self.cones[node - self.n_group]

    def cone_for(self, vertex: int, pair: DihedralPair) -> int:
        return self.cone_of[(vertex, pair.i, pair.j)]

    def midpoint(self, u: int, v: int) -> int:
        return self._midpoint[(u, v)]

    def locate(self, w: Word) -> int:
        """Group vertex reached from the identity along ``w``; raises if it leaves the ball."""
        hit = self.index.get(w)
        if hit is not None:
            return hit
        v = 0
        for x in w.letters():
            nxt = self.nbr[v].get(x)
            if nxt is None:
                raise OutsideBallError(f"path {format_word(w)} leaves the ball")
            v = nxt
        return v

    def walk(self, start: int, w: Word) -> list[int]:
        """Group vertices visited by the Γ-path from ``start`` labelled ``w``."""
        out = [start]
        v = start
        for x in w.letters():
            nxt = self.nbr[v].get(x)
            if nxt is None:
                raise OutsideBallError(f"path {format_word(w)} from vertex {start} leaves the ball")
            v = nxt
            out.append(v)
        return out

    def edge_label(self, u: int, v: int) -> int:
        for x, t in self.nbr[u].items():
            if t == v:
                return x
        raise KeyError(f"no Γ-edge between {u} and {v}")

    def rows(self, sources) -> np.ndarray:
        """Doubled distances from each source to every node (cached per source)."""
        sources = list(sources)
        missing = [s for s in dict.fromkeys(sources) if s not in self._rows]
        if missing:
            dist = shortest_path(self.graph, unweighted=True, directed=False, indices=missing)
            dist = np.where(np.isinf(dist), -1, dist).astype(np.int32)
            for s, row in zip(missing, dist):
                self._rows[s] = row
        return np.stack([self._rows[s] for s in sources]) if sources else np.zeros((0, self.n_nodes), np.int32)

    def distance(self, u: int, v: int) -> int:
        d = int(self.rows([u])[0, v])
        if d < 0:
            raise ValueError(f"nodes {u} and {v} are disconnected")
        return d

    def gamma_distance(self, u: int, v: int) -> int:
        """Cayley-graph distance inside the ball (undoubled)."""
        seen = {u: 0}
        queue = deque([u])
        while queue:
            x = queue.popleft()
            if x == v:
                return seen[x]
            for y in self.nbr[x].values():
                if y not in seen:
                    seen[y] = seen[x] + 1
                    queue.append(y)
        raise ValueError("disconnected")

    def path_points(self, path: XPath) -> list[int]:
        """Nodes of the subdivided graph lying on the path (vertices and Γ-midpoints)."""
        pts = [path.nodes[0]]
        for a, b in zip(path.nodes, path.nodes[1:]):
            if self.is_group(a) and self.is_group(b):
                pts.append(self.midpoint(a, b))
            pts.append(b)
        return pts

    def gamma_path(self, start: int, w: Word) -> XPath:
        nodes = tuple(self.walk(start, w))
        return XPath(nodes, 2 * (len(nodes) - 1))

    def path_length(self, nodes) -> int:
        total = 0
        for a, b in zip(nodes, nodes[1:]):
            total += 2 if (self.is_group(a) and self.is_group(b)) else 1
        return total

    def export_lines(self) -> Iterator[str]:
        yield (f"ball R={self.radius} S={self.slack} group={self.n_group} cone={self.n_cone} "
               f"gamma_edges={len(self.gamma_edges)} "
               f"cone_edges={sum(len(c.members) for c in self.cones)} stabilized={int(self.stabilized)}")
        for v, w in enumerate(self.words):
            yield f"vertex id={v} kind=group depth={self.depth[v]} word={format_word(w).replace(' ', '.')}"
        for c, cone in enumerate(self.cones):
            yield (f"vertex id={self.n_group + c} kind=cone pair={cone.pair.i},{cone.pair.j} "
                   f"members={len(cone.members)}")
        for u, v, g in self.gamma_edges:
            yield f"edge kind=gamma from={u} to={v} label=a{g} length=2"
        for c, cone in enumerate(self.cones):
            for v in sorted(cone.members):
                yield f"edge kind=cone from={self.n_group + c} to={v} label=- length=1"


def build_ball(spec: GroupSpec, R: int, S: int = 0, cap: int | None = None,
               allow_non_extra_large: bool = False) -> ConedBall:
    return ConedBall(spec, R, S, cap, allow_non_extra_large)


def distance_X(ball: ConedBall, u: int, v: int) -> int:
    return ball.distance(u, v)


class _GeodesicDAG:
    """Nodes on some u-v geodesic, with the number of geodesics from u to each."""

    def __init__(self, ball: ConedBall, u: int, v: int):
        n = ball.n_group + ball.n_cone
        d_u = ball.rows([u])[0][:n]
        d_v = ball.rows([v])[0][:n]
        self.total = int(d_u[v])
        on = np.nonzero((d_u >= 0) & (d_u + d_v == self.total))[0]
        on = on[np.argsort(d_u[on], kind="stable")]
        self.d_u = d_u
        self.u, self.v = u, v
        count = {u: 1}
        preds: dict = {}
        for node in on.tolist():
            if node == u:
                continue
            ps = [(p, count[p]) for p, length in ball.x_adj[node]
                  if p in count and d_u[p] + length == d_u[node]]
            preds[node] = ps
            count[node] = sum(c for _, c in ps)
        self.count = count
        self.preds = preds

    def sample(self, rng) -> XPath:
        nodes = [self.v]
        cur = self.v
        while cur != self.u:
            ps = self.preds[cur]
            weights = np.array([c for _, c in ps], dtype=float)
            cur = ps[rng.choice(len(ps), p=weights / weights.sum())][0]
            nodes.append(cur)
        return XPath(tuple(reversed(nodes)), self.total)


def geodesic_count(ball: ConedBall, u: int, v: int) -> int:
    """Exact number of X-geodesics from ``u`` to ``v`` inside the ball."""
    return _GeodesicDAG(ball, u, v).count.get(v, 0)


def iter_geodesics(ball: ConedBall, u: int, v: int) -> Iterator[XPath]:
    d_v = ball.rows([v])[0]
    total = int(d_v[u])

    def rec(node, prefix, remaining):
        if node == v:
            yield XPath(tuple(prefix), total)
            return
        for nxt, length in ball.x_adj[node]:
            if d_v[nxt] >= 0 and d_v[nxt] == remaining - length:
                prefix.append(nxt)
                yield from rec(nxt, prefix, remaining - length)
                prefix.pop()

    yield from rec(u, [u], total)


@dataclass
class GeodesicSet:
    paths: list
    count: int
    capped: bool


def all_geodesics(ball: ConedBall, u: int, v: int, cap: int = 64, rng=None) -> GeodesicSet:
    """Every geodesic when there are at most ``cap``; else a uniform sample of ``cap``."""
    dag = _GeodesicDAG(ball, u, v)
    count = dag.count.get(v, 0)
    if count <= cap:
        return GeodesicSet(list(iter_geodesics(ball, u, v)), count, False)
    if rng is None:
        raise ValueError(f"{count} geodesics exceed cap {cap}; pass rng to sample")
    return GeodesicSet([dag.sample(rng) for _ in range(cap)], count, True)


def sample_geodesic(ball: ConedBall, u: int, v: int, rng) -> XPath:
    """Uniformly random geodesic: walk backwards weighting by path counts."""
    return _GeodesicDAG(ball, u, v).sample(rng)


def hausdorff_points(ball: ConedBall, p_pts, q_pts) -> int:
    block = ball.rows(p_pts)[:, list(q_pts)]
    return int(max(block.min(axis=1).max(), block.min(axis=0).max()))


def hausdorff_X(ball: ConedBall, p: XPath, q: XPath) -> int:
    """Symmetrised Hausdorff distance (doubled) over vertices and Γ-edge midpoints."""
    return hausdorff_points(ball, ball.path_points(p), ball.path_points(q))


def stable_pairs(small: ConedBall, large: ConedBall, vertices=None) -> list[tuple[int, int]]:
    """Group-vertex pairs ``u < v`` of ``small`` whose distance agrees in ``large``."""
    vertices = list(range(small.n_group)) if vertices is None else list(vertices)
    big_ids = [large.locate(small.words[v]) for v in vertices]
    d_small = small.rows(vertices)[:, vertices]
    d_large = large.rows(big_ids)[:, big_ids]
    out = []
    for a in range(len(vertices)):
        for b in range(a + 1, len(vertices)):
            if d_small[a, b] == d_large[a, b]:
                out.append((vertices[a], vertices[b]))
    return out
