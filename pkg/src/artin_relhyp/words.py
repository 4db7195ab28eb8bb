"""Free-group words in syllable form and the Coxeter-style group data.

A word is stored as a tuple of syllables ``(gen, exp)`` with 1-based
generator indices and nonzero exponents; adjacent syllables never share a
generator.  The number of syllables is the syllable length ``||w||``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence


class Infinity:
    """Marker for an omitted relation, ``m(i, j) = inf``.

    Compares greater than every integer but refuses arithmetic.
    """

    _instance: "Infinity | None" = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "inf"

    __str__ = __repr__

    def __eq__(self, other) -> bool:
        return other is self

    def __hash__(self) -> int:
        return hash("Infinity")

    def __lt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return other is self

    def __gt__(self, other) -> bool:
        return other is not self

    def __ge__(self, other) -> bool:
        return True

    def __reduce__(self):
        return (Infinity, ())


INF = Infinity()


def is_finite(m) -> bool:
    return m is not INF


@dataclass(frozen=True)
class GroupSpec:
    """Presentation data: ``n`` generators and the symmetric label ``m``.

    ``labels`` maps ``(i, j)`` with ``i < j`` to an int >= 2 or :data:`INF`;
    missing pairs default to ``INF``.
    """

    n: int
    labels: dict = field(default_factory=dict, compare=False, hash=False)
    _key: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        labels = {}
        for (i, j), value in self.labels.items():
            if i == j:
                raise ValueError(f"diagonal label m({i},{i}) is not allowed")
            for g in (i, j):
                if not 1 <= g <= self.n:
                    raise ValueError(f"generator index {g} out of range 1..{self.n}")
            key = (min(i, j), max(i, j))
            if value is not INF:
                if not isinstance(value, int) or value < 2:
                    raise ValueError(f"m{key} must be an integer >= 2 or inf, got {value!r}")
            if key in labels and labels[key] != value:
                raise ValueError(f"conflicting labels for pair {key}: {labels[key]} vs {value}")
            labels[key] = value
        for key in itertools.combinations(range(1, self.n + 1), 2):
            labels.setdefault(key, INF)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_key", (self.n, tuple(sorted(labels.items(), key=lambda kv: kv[0]))))

    def __eq__(self, other):
        return isinstance(other, GroupSpec) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    @classmethod
    def uniform(cls, n: int, m) -> "GroupSpec":
        return cls(n, {key: m for key in itertools.combinations(range(1, n + 1), 2)})

    def m(self, i: int, j: int):
        if i == j:
            raise ValueError("m(i, i) is undefined")
        return self.labels[(min(i, j), max(i, j))]

    def pairs(self) -> list[tuple[int, int]]:
        return sorted(self.labels)

    def finite_pairs(self) -> list[tuple[int, int]]:
        return [p for p in self.pairs() if self.labels[p] is not INF]

    def min_label(self):
        """Smallest finite label, or ``INF`` when every relation is omitted."""
        finite = [self.labels[p] for p in self.finite_pairs()]
        return min(finite) if finite else INF

    @property
    def is_extra_large(self) -> bool:
        return all(v >= 4 for v in self.labels.values())

    @property
    def is_theorem_scope(self) -> bool:
        return all(v >= 7 for v in self.labels.values())

    @property
    def is_free(self) -> bool:
        return not self.finite_pairs()

    def pairs_containing(self, gens: Iterable[int]) -> list[tuple[int, int]]:
        """Finite pairs ``{i, j}`` whose generator set contains ``gens``."""
        gens = set(gens)
        return [p for p in self.finite_pairs() if gens <= set(p)]


Syllable = tuple  # (gen, exp)


class Word:
    """Freely reduced word in syllable normal form.  Immutable."""

    __slots__ = ("syllables", "_hash")

    def __init__(self, syllables: Iterable[Sequence[int]] = ()):
        sylls = tuple((int(g), int(e)) for g, e in syllables)
        for t, (g, e) in enumerate(sylls):
            if g < 1:
                raise ValueError(f"generator index must be >= 1, got {g}")
            if e == 0:
                raise ValueError("syllable exponent must be nonzero")
            if t and sylls[t - 1][0] == g:
                raise ValueError(f"adjacent syllables share generator a{g}; use free_reduce")
        object.__setattr__(self, "syllables", sylls)
        object.__setattr__(self, "_hash", hash(sylls))

    @classmethod
    def _trusted(cls, sylls: tuple) -> "Word":
        w = object.__new__(cls)
        object.__setattr__(w, "syllables", sylls)
        object.__setattr__(w, "_hash", hash(sylls))
        return w

    def __setattr__(self, name, value):
        raise AttributeError("Word is immutable")

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.syllables == other.syllables

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Word") -> bool:
        return shortlex_key(self) < shortlex_key(other)

    def __len__(self) -> int:
        return len(self.syllables)

    def __bool__(self) -> bool:
        return bool(self.syllables)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.syllables)

    def __getitem__(self, idx):
        return self.syllables[idx]

    def __mul__(self, other: "Word") -> "Word":
        return concat(self, other)

    def __invert__(self) -> "Word":
        return invert(self)

    def __repr__(self) -> str:
        return f"Word({format_word(self)!r})"

    def __str__(self) -> str:
        return format_word(self)

    @property
    def syllable_length(self) -> int:
        return len(self.syllables)

    @property
    def letter_length(self) -> int:
        return sum(abs(e) for _, e in self.syllables)

    def letters(self) -> list[int]:
        """Signed letters, ``+g`` for ``a_g`` and ``-g`` for its inverse."""
        out = []
        for g, e in self.syllables:
            out.extend([g if e > 0 else -g] * abs(e))
        return out

    def generators(self) -> frozenset:
        return frozenset(g for g, _ in self.syllables)

    def exponent_sum(self, gen: int | None = None) -> int:
        return sum(e for g, e in self.syllables if gen is None or g == gen)


EMPTY = Word._trusted(())


def shortlex_key(w: Word) -> tuple:
    # letter order a1 < a1^-1 < a2 < a2^-1 < ...
    return (w.letter_length, tuple(2 * abs(x) - (x > 0) for x in w.letters()))


def _push(stack: list, g: int, e: int) -> None:
    """Append syllable ``a_g^e`` onto a reduced syllable stack."""
    if e == 0:
        return
    if stack and stack[-1][0] == g:
        total = stack[-1][1] + e
        if total:
            stack[-1] = (g, total)
        else:
            stack.pop()
    else:
        stack.append((g, e))


def from_syllables(syllables: Iterable[Sequence[int]]) -> Word:
    """Freely reduce an arbitrary sequence of ``(gen, exp)`` pairs."""
    stack: list = []
    for g, e in syllables:
        if g < 1:
            raise ValueError(f"generator index must be >= 1, got {g}")
        _push(stack, g, e)
    return Word._trusted(tuple(stack))


def free_reduce(letters: Iterable[int], n: int | None = None) -> Word:
    """Freely reduce signed letters (``+g`` / ``-g``) into a :class:`Word`."""
    stack: list = []
    for x in letters:
        g = abs(x)
        if x == 0 or (n is not None and g > n):
            raise ValueError(f"generator index out of range: {x}")
        _push(stack, g, 1 if x > 0 else -1)
    return Word._trusted(tuple(stack))


def concat(*words: Word) -> Word:
    stack: list = []
    for w in words:
        for g, e in w.syllables:
            _push(stack, g, e)
    return Word._trusted(tuple(stack))


def invert(w: Word) -> Word:
    return Word._trusted(tuple((g, -e) for g, e in reversed(w.syllables)))


def power(g: int, e: int) -> Word:
    return Word._trusted(((g, e),)) if e else EMPTY


def letter_word(x: int) -> Word:
    return Word._trusted(((abs(x), 1 if x > 0 else -1),))


def is_cyclically_reduced(w: Word) -> bool:
    """No cancellation between the last and the first letter."""
    s = w.syllables
    if len(s) <= 1:
        return True
    (g0, e0), (g1, e1) = s[0], s[-1]
    return not (g0 == g1 and (e0 > 0) != (e1 > 0))


def is_syllable_cyclic(w: Word) -> bool:
    """First and last syllables lie on different generators (or ``||w|| <= 1``)."""
    s = w.syllables
    return len(s) <= 1 or s[0][0] != s[-1][0]


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Return ``(core, conjugator)`` with ``w = conjugator * core * conjugator^-1``.

    The core is cyclically reduced at the letter level: its first and last
    letters are not mutually inverse.
    """
    s = list(w.syllables)
    conj: list = []
    while len(s) >= 2 and s[0][0] == s[-1][0]:
        g, e0 = s[0]
        e1 = s[-1][1]
        if (e0 > 0) == (e1 > 0):
            break
        k = min(abs(e0), abs(e1))
        sign = 1 if e0 > 0 else -1
        _push(conj, g, sign * k)
        e0 -= sign * k
        e1 += sign * k
        if len(s) == 2:
            # a^p b... impossible here: two syllables on one generator are merged
            raise AssertionError("unreduced word")
        inner = s[1:-1]
        s = ([(g, e0)] if e0 else []) + inner + ([(g, e1)] if e1 else [])
        if e0 and e1:
            break
    core = Word._trusted(tuple(s))
    return core, Word._trusted(tuple(conj))


def subword(w: Word, start: int, stop: int) -> Word:
    """Letter interval ``[start, stop)`` of ``w`` (letters counted from 0)."""
    total = w.letter_length
    if not 0 <= start <= stop <= total:
        raise IndexError(f"interval [{start}, {stop}) out of range for letter length {total}")
    out = []
    pos = 0
    for g, e in w.syllables:
        lo, hi = pos, pos + abs(e)
        a, b = max(lo, start), min(hi, stop)
        if a < b:
            out.append((g, (b - a) if e > 0 else -(b - a)))
        pos = hi
        if pos >= stop:
            break
    return Word._trusted(tuple(out))


def syllable_subword(w: Word, first: int, last: int, head: int | None = None, tail: int | None = None) -> Word:
    """Syllables ``first..last`` (inclusive), optionally trimming boundary exponents.

    ``head`` letters are kept from the end of syllable ``first``; ``tail``
    letters from the start of syllable ``last``.
    """
    if not 0 <= first <= last < len(w):
        raise IndexError(f"syllable interval [{first}, {last}] out of range")
    sylls = list(w.syllables[first:last + 1])
    if first == last:
        g, e = sylls[0]
        keep = abs(e) if head is None else head
        if tail is not None:
            keep = min(keep, tail)
        if not 1 <= keep <= abs(e):
            raise IndexError("exponent split out of range")
        return Word._trusted(((g, keep if e > 0 else -keep),))
    if head is not None:
        g, e = sylls[0]
        if not 1 <= head <= abs(e):
            raise IndexError("exponent split out of range")
        sylls[0] = (g, head if e > 0 else -head)
    if tail is not None:
        g, e = sylls[-1]
        if not 1 <= tail <= abs(e):
            raise IndexError("exponent split out of range")
        sylls[-1] = (g, tail if e > 0 else -tail)
    return Word._trusted(tuple(sylls))


def subwords(w: Word) -> Iterator[Word]:
    """All nonempty contiguous subwords, including split boundary syllables."""
    s = w.syllables
    for first in range(len(s)):
        for last in range(first, len(s)):
            if first == last:
                g, e = s[first]
                for k in range(1, abs(e) + 1):
                    yield Word._trusted(((g, k if e > 0 else -k),))
                continue
            for head in range(1, abs(s[first][1]) + 1):
                for tail in range(1, abs(s[last][1]) + 1):
                    yield syllable_subword(w, first, last, head, tail)


_TOKEN = re.compile(r"^a(\d+)(?:\^(-?\d+))?$")


def parse_word(text: str | Sequence[str], n: int | None = None) -> Word:
    """Parse whitespace-separated tokens like ``a3``, ``a3^-2``, ``a1^5``.

    ``1`` or ``e`` alone denotes the empty word.
    """
    tokens = text.split() if isinstance(text, str) else list(text)
    sylls = []
    for tok in tokens:
        if tok in ("1", "e", "ε"):
            continue
        m = _TOKEN.match(tok)
        if not m:
            raise ValueError(f"bad word token {tok!r}")
        g = int(m.group(1))
        e = int(m.group(2)) if m.group(2) is not None else 1
        if g < 1 or (n is not None and g > n):
            raise ValueError(f"generator index out of range in token {tok!r}")
        sylls.append((g, e))
    return from_syllables(sylls)


def format_word(w: Word) -> str:
    if not w.syllables:
        return "1"
    return " ".join(f"a{g}" if e == 1 else f"a{g}^{e}" for g, e in w.syllables)
