"""Word problem in extra-large Artin groups over the infinite relator family.

A violation is a subword ``v`` of ``w`` that extends to a relator ``r = v u``
of some ``R_ij`` with ``||u|| <= k``.  Words without violations for ``k = 3``
are Artin-reduced; for ``k = 4`` strongly Artin-reduced.  The Dehn-style
solver replaces violations ``v`` by ``u^-1`` until none remain.
"""

from __future__ import annotations

import functools
import logging
import warnings
from dataclasses import dataclass, field

from .dihedral import DihedralPair, garside_nf, is_trivial_in_pair, nf_key, relator_completion
from .words import (
    EMPTY,
    INF,
    GroupSpec,
    Word,
    concat,
    format_word,
    from_syllables,
    invert,
    subword,
    syllable_subword,
)

logger = logging.getLogger(__name__)


class NotExtraLargeError(ValueError):
    pass


def check_extra_large(spec: GroupSpec, allow: bool = False) -> None:
    if spec.is_extra_large:
        return
    if not allow:
        raise NotExtraLargeError(
            "presentation is not of extra-large type (some m_ij < 4); pass allow=True to override")
    warnings.warn("running Artin-reduction on a non extra-large presentation; results are unproven",
                  stacklevel=3)


@dataclass(frozen=True)
class Violation:
    start: int          # letter interval [start, stop) of the scanned word
    stop: int
    first: int          # syllable span, with kept boundary exponents
    last: int
    head: int
    tail: int
    pair: DihedralPair
    subword: Word       # v
    completion: Word    # u, with v u in R_ij

    def describe(self) -> str:
        return (f"[{self.start},{self.stop}) {self.pair} v=({format_word(self.subword)}) "
                f"u=({format_word(self.completion)})")


def _letter_offsets(w: Word) -> list[int]:
    out, pos = [], 0
    for _, e in w.syllables:
        out.append(pos)
        pos += abs(e)
    return out


def two_generator_runs(w: Word, pair: DihedralPair) -> list[tuple[int, int]]:
    """Maximal syllable intervals ``[first, last]`` using only ``a_i, a_j``."""
    runs, begin = [], None
    gens = {pair.i, pair.j}
    for t, (g, _) in enumerate(w.syllables):
        if g in gens:
            if begin is None:
                begin = t
        elif begin is not None:
            runs.append((begin, t - 1))
            begin = None
    if begin is not None:
        runs.append((begin, len(w) - 1))
    return runs


def _candidates(w: Word, spec: GroupSpec, k: int):
    """Candidate spans ordered leftmost first, then longest first."""
    sylls = w.syllables
    offsets = _letter_offsets(w)
    cands = []
    for p in spec.finite_pairs():
        pair = DihedralPair(p[0], p[1], spec.labels[p])
        need = 2 * pair.m - k  # shorter v cannot complete to a relator of length >= 2m
        for lo, hi in two_generator_runs(w, pair):
            for first in range(lo, hi + 1):
                ef = abs(sylls[first][1])
                if need <= 1:
                    # single-syllable pieces only matter for tiny labels
                    for t in range(ef, 0, -1):
                        cands.append((offsets[first], -(offsets[first] + t), first, first, t, t, pair))
                for last in range(max(first + 1, first + need - 1), hi + 1):
                    el = abs(sylls[last][1])
                    for head in range(ef, 0, -1):
                        start = offsets[first] + ef - head
                        for tail in range(el, 0, -1):
                            cands.append((start, -(offsets[last] + tail), first, last, head, tail, pair))
    cands.sort(key=lambda c: (c[0], c[1], c[6]))
    return cands


def find_violation(w: Word, spec: GroupSpec, k: int = 3, allow_non_extra_large: bool = False) -> Violation | None:
    if k not in (3, 4):
        raise ValueError("scan level k must be 3 or 4")
    check_extra_large(spec, allow_non_extra_large)
    for start, neg_stop, first, last, head, tail, pair in _candidates(w, spec, k):
        v = syllable_subword(w, first, last, head=head, tail=tail)
        u = relator_completion(v, pair, k)
        if u is not None:
            return Violation(start, -neg_stop, first, last, head, tail, pair, v, u)
    return None


def is_artin_reduced(w: Word, spec: GroupSpec, allow_non_extra_large: bool = False) -> bool:
    return find_violation(w, spec, 3, allow_non_extra_large) is None


def is_strongly_artin_reduced(w: Word, spec: GroupSpec, allow_non_extra_large: bool = False) -> bool:
    return find_violation(w, spec, 4, allow_non_extra_large) is None


@dataclass(frozen=True)
class ReductionStep:
    before: Word
    violation: Violation
    after: Word


@dataclass
class DehnResult:
    trivial: bool
    residual: Word
    trace: list = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.trace)

    def format_trace(self) -> str:
        lines = []
        for n, st in enumerate(self.trace, 1):
            lines.append(f"{n}. {format_word(st.before)}  --  {st.violation.describe()}  ->  "
                         f"{format_word(st.after)}")
        lines.append(("trivial" if self.trivial else "nontrivial")
                     + f"; residual = {format_word(self.residual)}")
        return "\n".join(lines)

    def records(self) -> list[str]:
        out = []
        for n, st in enumerate(self.trace, 1):
            v = st.violation
            out.append(
                f"step={n} before={_tok(st.before)} start={v.start} stop={v.stop} "
                f"pair={v.pair.i},{v.pair.j} v={_tok(v.subword)} u={_tok(v.completion)} "
                f"after={_tok(st.after)}")
        out.append(f"result={'trivial' if self.trivial else 'nontrivial'} steps={len(self.trace)} "
                   f"residual={_tok(self.residual)}")
        return out


def _tok(w: Word) -> str:
    return format_word(w).replace(" ", ".")


def replace_violation(w: Word, v: Violation) -> Word:
    prefix = subword(w, 0, v.start)
    suffix = subword(w, v.stop, w.letter_length)
    return concat(prefix, invert(v.completion), suffix)


def dehn_solve(w: Word, spec: GroupSpec, allow_non_extra_large: bool = False,
               max_steps: int | None = None) -> DehnResult:
    """Reduce ``w`` by replacing violations ``v`` with ``u^-1``.

    Empty result means ``w = 1``; a nonempty Artin-reduced residual means
    ``w != 1`` (extra-large type).
    """
    check_extra_large(spec, allow_non_extra_large)
    trace = []
    cur = w
    limit = max_steps if max_steps is not None else 4 * max(1, len(w)) + 8
    while cur:
        if len(trace) >= limit:
            raise RuntimeError(f"Dehn reduction exceeded {limit} steps on {format_word(w)}")
        viol = find_violation(cur, spec, 3, allow_non_extra_large=True)
        if viol is None:
            break
        nxt = replace_violation(cur, viol)
        if len(nxt) >= len(cur):
            logger.debug("non-decreasing step %s -> %s", cur, nxt)
        trace.append(ReductionStep(cur, viol, nxt))
        cur = nxt
    return DehnResult(not cur, cur, trace)


def equal_in_G(w1: Word, w2: Word, spec: GroupSpec, allow_non_extra_large: bool = False) -> bool:
    if w1 == w2:
        return True
    d = concat(w1, invert(w2))
    m_min = spec.min_label()
    if m_min is INF:
        return False  # free group
    # a trivial reduced word contains a relator piece with >= 2m - 3 syllables
    if len(d) < 2 * m_min - 3 and spec.is_extra_large:
        return False
    gens = d.generators()
    if len(gens) == 1:
        return False  # generators have infinite order
    if len(gens) == 2:
        i, j = sorted(gens)
        m = spec.m(i, j)
        if m is INF:
            return False
        # the parabolic G_ij embeds in G, so its own normal form decides
        return is_trivial_in_pair(d, DihedralPair(i, j, m))
    return dehn_solve(d, spec, allow_non_extra_large).trivial


@functools.lru_cache(maxsize=64)
def _abelian_classes(spec: GroupSpec) -> tuple:
    parent = list(range(spec.n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (i, j) in spec.finite_pairs():
        if spec.labels[(i, j)] % 2 == 1:
            parent[find(i)] = find(j)
    return tuple(find(g) for g in range(spec.n + 1))


def abelian_image(w: Word, spec: GroupSpec) -> tuple:
    """Image in the abelianisation: generators joined by odd labels are identified."""
    root = _abelian_classes(spec)
    sums: dict = {}
    for g, e in w.syllables:
        r = root[g]
        sums[r] = sums.get(r, 0) + e
    return tuple(sorted((r, s) for r, s in sums.items() if s))


def pair_elements(pair: DihedralPair, radius: int) -> dict:
    """Distinct elements of ``G_ij`` of letter length <= radius: NF key -> shortest word."""
    found = {nf_key(EMPTY, pair): EMPTY}
    frontier = [EMPTY]
    letters = [pair.i, -pair.i, pair.j, -pair.j]
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for x in letters:
                cand = concat(w, from_syllables([(abs(x), 1 if x > 0 else -1)]))
                if cand.letter_length != w.letter_length + 1:
                    continue
                key = nf_key(cand, pair)
                if key not in found:
                    found[key] = cand
                    nxt.append(cand)
        frontier = nxt
    return found


@dataclass
class IntersectionReport:
    pair1: DihedralPair
    pair2: DihedralPair
    radius: int
    size1: int
    size2: int
    comparisons: int
    common: list            # (word in G_1, word in G_2)
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def shared(self) -> set:
        return {self.pair1.i, self.pair1.j} & {self.pair2.i, self.pair2.j}


def parabolic_intersection_check(spec: GroupSpec, first: tuple, second: tuple, radius: int) -> IntersectionReport:
    """Compare all elements of two parabolics within a letter radius.

    Common elements must be powers of the shared generator (or trivial when
    the pairs are disjoint).
    """
    check_extra_large(spec)
    p1 = DihedralPair.from_spec(spec, *first)
    p2 = DihedralPair.from_spec(spec, *second)
    if p1 == p2:
        raise ValueError("need two distinct parabolic subgroups")
    e1 = list(pair_elements(p1, radius).values())
    e2 = list(pair_elements(p2, radius).values())
    buckets: dict = {}
    for y in e2:
        buckets.setdefault(abelian_image(y, spec), []).append(y)
    shared = {p1.i, p1.j} & {p2.i, p2.j}
    common, failures, comparisons = [], [], 0
    for x in e1:
        for y in buckets.get(abelian_image(x, spec), ()):
            comparisons += 1
            if equal_in_G(x, y, spec):
                common.append((x, y))
                power_ok = (not x) or (len(x) == 1 and x.syllables[0][0] in shared)
                if not power_ok:
                    failures.append((x, y))
    return IntersectionReport(p1, p2, radius, len(e1), len(e2), comparisons, common, failures)
