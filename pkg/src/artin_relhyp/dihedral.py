"""Exact computation in dihedral Artin groups ``G_ij = <a_i, a_j | u_ij = u_ji>``.

Two independent word-problem solvers live here:

* a left-greedy Garside normal form ``Delta^p s_1 ... s_l`` over the 2m simple
  elements (alternating words of length 0..m), and
* an amalgam normal form through the explicit isomorphisms onto
  ``<x> *_{x^2 = y^m} <y>`` (odd m) and ``<x> *_{x^k = z} (<z> x <y>)`` (even m = 2k).

Both are exact; tests cross-check them against each other.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterator

from .words import (
    EMPTY,
    INF,
    GroupSpec,
    Word,
    concat,
    from_syllables,
    invert,
    is_cyclically_reduced,
)


class ForeignGeneratorError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class DihedralPair:
    i: int
    j: int
    m: int

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("pair needs two distinct generators")
        if self.m is INF or not isinstance(self.m, int) or self.m < 2:
            raise ValueError(f"dihedral pair needs a finite label m >= 2, got {self.m!r}")

    @classmethod
    def from_spec(cls, spec: GroupSpec, i: int, j: int) -> "DihedralPair":
        return cls(min(i, j), max(i, j), spec.m(i, j))

    @property
    def gens(self) -> tuple[int, int]:
        return (self.i, self.j)

    def other(self, g: int) -> int:
        return self.j if g == self.i else self.i

    def contains(self, w: Word) -> bool:
        return w.generators() <= {self.i, self.j}

    def check(self, w: Word) -> None:
        extra = w.generators() - {self.i, self.j}
        if extra:
            raise ForeignGeneratorError(
                f"word uses generators {sorted(extra)} outside pair ({self.i}, {self.j})")

    def __str__(self) -> str:
        return f"G_{self.i}{self.j}(m={self.m})"


def alternating(start: int, other: int, length: int) -> Word:
    return from_syllables((start if t % 2 == 0 else other, 1) for t in range(length))


def build_relator(pair: DihedralPair) -> Word:
    """``u_ij u_ji^-1``: letter length 2m, syllable length 2m."""
    u_ij = alternating(pair.i, pair.j, pair.m)
    u_ji = alternating(pair.j, pair.i, pair.m)
    return concat(u_ij, invert(u_ji))


def delta_word(pair: DihedralPair) -> Word:
    return alternating(pair.i, pair.j, pair.m)


# ---------------------------------------------------------------------------
# Simple elements and Garside normal form
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class SimpleElement:
    """Alternating positive word of length ``length`` beginning with ``start``.

    ``length == 0`` is the identity and ``length == m`` is Delta; both are
    stored with ``start = pair.i`` so that each element has one encoding.
    """

    start: int
    length: int

    def word(self, pair: DihedralPair) -> Word:
        return alternating(self.start, pair.other(self.start), self.length)


def simples(pair: DihedralPair) -> set[SimpleElement]:
    out = {SimpleElement(pair.i, 0), SimpleElement(pair.i, pair.m)}
    for start in pair.gens:
        for length in range(1, pair.m):
            out.add(SimpleElement(start, length))
    return out


def left_complement(pair: DihedralPair, s: SimpleElement) -> SimpleElement:
    """The simple ``c`` with ``c s = Delta``."""
    m = pair.m
    if s.length == 0:
        return SimpleElement(pair.i, m)
    if s.length == m:
        return SimpleElement(pair.i, 0)
    # c ends with the letter preceding s's first letter in an alternating word
    c_len = m - s.length
    last = pair.other(s.start)
    start = last if c_len % 2 == 1 else pair.other(last)
    return SimpleElement(start, c_len)


@dataclass(frozen=True)
class GarsideNF:
    pair: DihedralPair
    inf: int
    factors: tuple  # of (start, length), 0 < length < m

    @property
    def is_trivial(self) -> bool:
        return self.inf == 0 and not self.factors

    @property
    def key(self) -> tuple:
        return (self.inf, self.factors)

    def word(self) -> Word:
        pair = self.pair
        d = delta_word(pair)
        parts = [d] * self.inf if self.inf >= 0 else [invert(d)] * (-self.inf)
        parts += [alternating(s, pair.other(s), n) for s, n in self.factors]
        return concat(*parts)

    def __str__(self) -> str:
        fs = " ".join(
            "".join(("a" + str(s if t % 2 == 0 else self.pair.other(s))) for t in range(n))
            for s, n in self.factors)
        return f"D^{self.inf}" + (f" . {fs}" if fs else "")


class _GarsideState:
    """Mutable left normal form used while multiplying letters on the right."""

    __slots__ = ("i", "j", "m", "odd", "p", "f")

    def __init__(self, pair: DihedralPair, p: int = 0, f=None):
        self.i, self.j, self.m = pair.i, pair.j, pair.m
        self.odd = pair.m % 2 == 1
        self.p = p
        self.f = [] if f is None else f

    def copy(self) -> "_GarsideState":
        st = object.__new__(_GarsideState)
        st.i, st.j, st.m, st.odd = self.i, self.j, self.m, self.odd
        st.p = self.p
        st.f = list(self.f)
        return st

    def _other(self, g):
        return self.j if g == self.i else self.i

    def _last(self, s):
        start, n = s
        return start if n % 2 == 1 else self._other(start)

    def _tau(self, factors):
        if not self.odd:
            return factors
        i, j = self.i, self.j
        return [(j if s == i else i, n) for s, n in factors]

    def _append_simple(self, s) -> None:
        """Right-multiply by a simple ``s`` (0 < length < m) and renormalise."""
        f = self.f
        f.append(s)
        m = self.m
        t = len(f) - 1
        while t >= 1:
            a, b = f[t - 1], f[t]
            la = self._last(a)
            if b[0] == la:
                break  # left-weighted pair; earlier pairs are untouched
            total = a[1] + b[1]
            if total < m:
                f[t - 1] = (a[0], total)
                del f[t]
                t -= 1
                continue
            # a.b spells an alternating word of length total >= m: split off Delta
            rest = total - m
            nxt = a[0] if m % 2 == 0 else self._other(a[0])  # letter at position m+1
            if rest:
                f[t] = (nxt, rest)
            else:
                del f[t]
            del f[t - 1]
            # Delta moves to the front, twisting everything it passes
            f[: t - 1] = self._tau(f[: t - 1])
            self.p += 1
            t -= 1
            if t >= len(f):
                t = len(f) - 1

    def mul_letter(self, g: int, sign: int) -> None:
        if sign > 0:
            self._append_simple((g, 1))
            return
        # g^-1 = Delta^-1 d with d g = Delta; Delta^-1 moves to the front via tau
        self.p -= 1
        self.f = self._tau(self.f)
        if self.m > 1:
            # d is the alternating word of length m-1 whose last letter differs from g
            n = self.m - 1
            last = self._other(g)
            start = last if n % 2 == 1 else g
            self._append_simple((start, n))

    def mul_syllable(self, g: int, e: int) -> None:
        sign = 1 if e > 0 else -1
        for _ in range(abs(e)):
            self.mul_letter(g, sign)

    def key(self) -> tuple:
        return (self.p, tuple(self.f))


@functools.lru_cache(maxsize=200_000)
def _nf_key(pair: DihedralPair, sylls: tuple) -> tuple:
    st = _GarsideState(pair)
    for g, e in sylls:
        st.mul_syllable(g, e)
    return st.key()


def garside_nf(w: Word, pair: DihedralPair) -> GarsideNF:
    pair.check(w)
    p, f = _nf_key(pair, w.syllables)
    return GarsideNF(pair, p, f)


def nf_key(w: Word, pair: DihedralPair) -> tuple:
    """Hashable Garside normal form of ``w`` (no foreign-generator check)."""
    return _nf_key(pair, w.syllables)


def equal_in_pair(w1: Word, w2: Word, pair: DihedralPair) -> bool:
    pair.check(w1)
    pair.check(w2)
    return nf_key(w1, pair) == nf_key(w2, pair)


def is_trivial_in_pair(w: Word, pair: DihedralPair) -> bool:
    pair.check(w)
    return nf_key(w, pair) == (0, ())


# ---------------------------------------------------------------------------
# Amalgam oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AmalgamNF:
    """``c^central . r_1 ... r_l`` with ``c`` the central amalgamated generator.

    Odd m = 2k+1: c = x^2 = y^m, reps alternate ``('x', 1)`` and ``('y', 1..m-1)``.
    Even m = 2k: c = x^k, reps alternate ``('x', 1..k-1)`` and ``('y', nonzero)``.
    """

    m: int
    central: int
    reps: tuple

    @property
    def is_trivial(self) -> bool:
        return self.central == 0 and not self.reps


def _amalgam_images(pair: DihedralPair) -> dict:
    """Images of a_i^{+1}, a_j^{+1} as sequences of (letter, exp)."""
    m = pair.m
    if m % 2 == 0:
        return {pair.i: (("y", 1),), pair.j: (("y", -1), ("x", 1))}
    k = (m - 1) // 2
    return {pair.i: (("y", -k), ("x", 1)), pair.j: (("x", -1), ("y", k + 1))}


class _AmalgamState:
    __slots__ = ("m", "mod", "central", "reps")

    def __init__(self, m: int):
        self.m = m
        # x-exponents reduce mod 2 (odd m) or mod k (even m); y mod m (odd) or not at all (even)
        if m % 2 == 1:
            self.mod = {"x": 2, "y": m}
        else:
            self.mod = {"x": m // 2, "y": None}
        self.central = 0
        self.reps: list = []

    def mul(self, letter: str, e: int) -> None:
        reps = self.reps
        if reps and reps[-1][0] == letter:
            e += reps.pop()[1]
        mod = self.mod[letter]
        if mod is not None:
            q, r = divmod(e, mod)
            self.central += q
            e = r
        if e:
            reps.append((letter, e))


def amalgam_nf(w: Word, pair: DihedralPair) -> AmalgamNF:
    pair.check(w)
    images = _amalgam_images(pair)
    st = _AmalgamState(pair.m)
    for g, e in w.syllables:
        img = images[g]
        if e > 0:
            seq = img * e
        else:
            seq = tuple((x, -t) for x, t in reversed(img)) * (-e)
        for letter, t in seq:
            st.mul(letter, t)
    return AmalgamNF(pair.m, st.central, tuple(st.reps))


def amalgam_to_artin(pair: DihedralPair, letters) -> Word:
    """Map a word in x, y (pairs ``(letter, exp)``) back into ``G_ij``.

    Odd m: x -> Delta word, y -> a_i a_j.  Even m: x -> a_i a_j, y -> a_i.
    """
    if pair.m % 2 == 1:
        x, y = delta_word(pair), from_syllables([(pair.i, 1), (pair.j, 1)])
    else:
        x, y = from_syllables([(pair.i, 1), (pair.j, 1)]), from_syllables([(pair.i, 1)])
    parts = []
    for letter, e in letters:
        base = x if letter == "x" else y
        parts += [base if e > 0 else invert(base)] * abs(e)
    return concat(*parts)


def amalgam_relation(pair: DihedralPair) -> list:
    """The defining relation of the amalgam side as an x/y word equal to 1."""
    m = pair.m
    if m % 2 == 1:
        return [("x", 2), ("y", -m)]
    k = m // 2
    return [("y", -1), ("x", k), ("y", 1), ("x", -k)]


# ---------------------------------------------------------------------------
# Relator family R_ij
# ---------------------------------------------------------------------------

def in_Rij(w: Word, pair: DihedralPair) -> bool:
    if not w or not pair.contains(w) or not is_cyclically_reduced(w):
        return False
    return nf_key(w, pair) == (0, ())


def _two_gen_words(pair: DihedralPair, n_syll: int, bound: int, first=None) -> Iterator[tuple]:
    """All alternating syllable tuples with ``n_syll`` syllables, ``|exp| <= bound``."""
    if n_syll == 0:
        yield ()
        return
    exps = [e for e in range(-bound, bound + 1) if e]
    starts = pair.gens if first is None else (first,)
    for start in starts:
        gens = [start if t % 2 == 0 else pair.other(start) for t in range(n_syll)]
        for combo in itertools.product(exps, repeat=n_syll):
            yield tuple(zip(gens, combo))


_TABLES: dict = {}


def _inverse_table(pair: DihedralPair, max_syll: int, bound: int) -> dict:
    """NF key of ``R^-1`` -> list of syllable tuples ``R`` with ``||R|| <= max_syll``.

    Tables are cached per pair and grown on demand; callers filter exponents
    above their own bound.
    """
    cached = _TABLES.get((pair, max_syll))
    if cached is not None and cached[0] >= bound:
        return cached[1]
    bound = _round_bound(bound)
    table: dict = {}
    for sylls, st in _dfs_products(pair, _GarsideState(pair), max_syll, bound):
        # sylls spells R^-1
        table.setdefault(st.key(), []).append(tuple((g, -e) for g, e in reversed(sylls)))
    _TABLES[(pair, max_syll)] = (bound, table)
    return table


def _round_bound(b: int) -> int:
    return max(8, -(-b // 8) * 8)


def _dfs_products(pair: DihedralPair, state: _GarsideState, depth: int, bound: int,
                  prefix: tuple = (), first_allowed=None):
    """Yield ``(sylls, state)`` for every alternating extension with ``<= depth`` syllables."""
    yield prefix, state
    if depth == 0:
        return
    last_gen = prefix[-1][0] if prefix else None
    for g in pair.gens:
        if g == last_gen:
            continue
        for sign in (1, -1):
            st = state
            for mag in range(1, bound + 1):
                # extend the exponent one letter at a time
                st = st.copy()
                st.mul_letter(g, sign)
                e = sign * mag
                if not prefix and first_allowed is not None and not first_allowed(g, e):
                    continue
                yield from _dfs_products(pair, st, depth - 1, bound, prefix + ((g, e),), None)


def _joins_cleanly(left: tuple, right: tuple) -> bool:
    """Literal concatenation has no cancellation (merging same-sign powers is fine)."""
    if not left or not right:
        return True
    (g0, e0), (g1, e1) = left[-1], right[0]
    return g0 != g1 or (e0 > 0) == (e1 > 0)


def relator_completion(v: Word, pair: DihedralPair, k: int, bound: int | None = None) -> Word | None:
    """Find ``u`` with ``||u|| <= k`` such that the literal word ``v u`` lies in R_ij.

    Exponents of ``u`` range over ``|e| <= bound`` (default
    ``letter_length(v) + m``).  Returns ``None`` when no completion exists in
    that range.
    """
    if not v or not pair.contains(v):
        return None
    # any r in R_ij has ||r|| >= 2m, and ||vu|| <= ||v|| + ||u||
    if len(v) + k < 2 * pair.m:
        return None
    if bound is None:
        bound = v.letter_length + pair.m
    return _completion(pair, v.syllables, k, bound)


@functools.lru_cache(maxsize=100_000)
def _completion(pair: DihedralPair, v: tuple, k: int, bound: int):
    vw = Word._trusted(v)
    if in_Rij(vw, pair):
        return EMPTY
    left_depth = k - 2 if k >= 3 else 0
    right_depth = min(k, 2)
    table = _inverse_table(pair, right_depth, bound)
    start = _GarsideState(pair)
    for g, e in v:
        start.mul_syllable(g, e)
    best = None
    for left, st in _dfs_products(pair, start, left_depth, bound,
                                  first_allowed=lambda g, e: _joins_cleanly(v, ((g, e),))):
        for right in table.get(st.key(), ()):
            if any(abs(e) > bound for _, e in right):
                continue
            if left and right and left[-1][0] == right[0][0]:
                continue
            u_sylls = left + right
            if not u_sylls:
                continue
            u = Word._trusted(u_sylls)
            if len(u) > k or not _joins_cleanly(v, u_sylls):
                continue
            r = concat(vw, u)
            if r.letter_length != vw.letter_length + u.letter_length:
                continue
            if not in_Rij(r, pair):
                continue
            cand = (len(u), u.letter_length, u)
            if best is None or cand[:2] < best[:2]:
                best = cand
    return None if best is None else best[2]


# ---------------------------------------------------------------------------
# Syllable-minimal representatives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchBounds:
    max_syllables: int | None = None
    max_exponent: int | None = None


@dataclass(frozen=True)
class MinSyllableResult:
    word: Word
    exhaustive: bool

    @property
    def flag(self) -> str:
        return "exhaustive" if self.exhaustive else "bounded"


def _power_candidate(pair: DihedralPair, w: Word, g: int) -> Word | None:
    """The only possible power ``a_g^e`` equal to ``w``, fixed by abelianisation."""
    if pair.m % 2 == 0:
        if w.exponent_sum(pair.other(g)) != 0:
            return None
        e = w.exponent_sum(g)
    else:
        e = w.exponent_sum()
    return from_syllables([(g, e)])


def min_syllable_rep(w: Word, pair: DihedralPair, bounds: SearchBounds | None = None) -> MinSyllableResult:
    """Word of least syllable length equal to ``w`` in ``G_ij``.

    Lengths ``s <= 1`` (and ``s = 2`` for even m) are decided exactly through
    abelianisation.  Any result of syllable length ``<= m`` is globally
    minimal: a shorter representative would give a relator of syllable
    length below 2m.  Longer results are minimal only among words whose
    exponents respect the search bound.
    """
    pair.check(w)
    bounds = bounds or SearchBounds()
    bound = bounds.max_exponent or (w.letter_length + 2 * pair.m)
    max_s = len(w) if bounds.max_syllables is None else min(bounds.max_syllables, len(w))
    return _min_syllable(pair, w.syllables, bound, max_s)


@functools.lru_cache(maxsize=50_000)
def _min_syllable(pair: DihedralPair, sylls: tuple, bound: int, max_s: int) -> MinSyllableResult:
    w = Word._trusted(sylls)
    target = _nf_key(pair, sylls)
    m = pair.m
    if target == (0, ()):
        return MinSyllableResult(EMPTY, True)
    for g in pair.gens:
        cand = _power_candidate(pair, w, g)
        if cand is not None and len(cand) == 1 and nf_key(cand, pair) == target:
            return MinSyllableResult(cand, True)
    if len(w) <= 2:
        return MinSyllableResult(w, True)
    if m % 2 == 0:
        sa, sb = w.exponent_sum(pair.i), w.exponent_sum(pair.j)
        if sa and sb:
            for cand in (from_syllables([(pair.i, sa), (pair.j, sb)]),
                         from_syllables([(pair.j, sb), (pair.i, sa)])):
                if nf_key(cand, pair) == target:
                    return MinSyllableResult(cand, True)
    if len(w) <= m:
        return MinSyllableResult(w, True)
    # shorter lengths are excluded exactly: s <= 1 (and s = 2 for even m) by
    # abelianisation, s < 2m - ||w|| because w^-1 * rep would be a short relator
    lowest = max(3 if m % 2 == 0 else 2, 2 * m - len(w))
    for s in range(lowest, min(max_s, len(w))):
        found = _search_length(pair, target, s, bound)
        if found is not None:
            return MinSyllableResult(found, s == lowest or s <= m)
    return MinSyllableResult(w, len(w) <= lowest)


def _search_length(pair: DihedralPair, target: tuple, s: int, bound: int) -> Word | None:
    """Meet in the middle: ``L R = g`` with ``||L|| = ceil(s/2)``, ``||R|| = floor(s/2)``."""
    left_n = (s + 1) // 2
    right_n = s - left_n
    p, f = target
    # state of g^-1, then multiply by L; need g^-1 L = R^-1
    g_word = GarsideNF(pair, p, f).word()
    st0 = _GarsideState(pair)
    for g, e in invert(g_word).syllables:
        st0.mul_syllable(g, e)
    table: dict = {}
    for inv_sylls, st in _dfs_products(pair, _GarsideState(pair), right_n, bound):
        if len(inv_sylls) == right_n:
            table.setdefault(st.key(), []).append(tuple((g, -e) for g, e in reversed(inv_sylls)))
    best = None
    for left, st in _dfs_products(pair, st0, left_n, bound):
        if len(left) != left_n:
            continue
        for right in table.get(st.key(), ()):
            if right and left[-1][0] == right[0][0]:
                continue
            cand = Word._trusted(left + right)
            key = (cand.letter_length, cand)
            if best is None or key < best:
                best = key
    return None if best is None else best[1]
