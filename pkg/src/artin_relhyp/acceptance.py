"""Acceptance suite: eight property checks, one result line each."""

from __future__ import annotations

import functools
import time
from dataclasses import dataclass, field

import numpy as np

from .artin import (
    abelian_image,
    dehn_solve,
    is_artin_reduced,
    parabolic_intersection_check,
)
from .coned import ConedBall, build_ball, geodesic_count, stable_pairs
from .dihedral import (
    DihedralPair,
    _AmalgamState,
    _amalgam_images,
    _GarsideState,
    amalgam_nf,
    build_relator,
    garside_nf,
)
from .relhyp import (
    BIGON_BOUND,
    DeltaRow,
    bigon_scan,
    delta_report,
    sample_pipeline_paths,
    verify_pipeline,
)
from .words import GroupSpec, Word, concat, free_reduce, from_syllables, invert

E7 = GroupSpec.uniform(3, 7)
MIXED = GroupSpec(3, {(1, 2): 7, (1, 3): 8, (2, 3): 9})
E7_N4 = GroupSpec.uniform(4, 7)
FREE2 = GroupSpec(2, {})


@dataclass
class AcceptanceConfig:
    spec: GroupSpec = E7
    radius: int = 3
    slack: int = 1
    seed: int = 0
    cap_geodesics: int = 64
    max_quadrilaterals: int = 2000
    pipeline_samples: int = 200
    dehn_samples: int = 1000
    oracle_samples: int = 10_000
    exhaustive_max_m: int = 8
    intersection_radius: int = 6
    only: tuple = ()


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool | None      # None: skipped
    observed: str
    bound: str
    runtime: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def status(self) -> str:
        return "skip" if self.passed is None else ("pass" if self.passed else "fail")

    def line(self) -> str:
        return (f"criterion={self.number} name={self.name} status={self.status} "
                f"observed={self.observed} bound={self.bound} runtime={self.runtime:.1f}")


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.runtime = time.perf_counter() - t0
        return res
    return wrapper


@functools.lru_cache(maxsize=16)
def _balls(spec: GroupSpec, radius: int, slack: int) -> tuple[ConedBall, ConedBall]:
    """The scanned ball and its (R+1, S+1) enlargement used for stability."""
    return build_ball(spec, radius, slack), build_ball(spec, radius + 1, slack + 1)


# -- 1 ----------------------------------------------------------------------

EXPONENTS = (1, -1, 2, -2)


def _half_words(pair: DihedralPair, n: int, start: int, oracle: str) -> dict:
    """All words of ``n`` syllables starting with ``start``, exponents in ±1, ±2,
    bucketed by their normal form under ``oracle``."""
    out: dict = {}
    gens = [start if t % 2 == 0 else pair.other(start) for t in range(n)]
    if oracle == "garside":
        init = _GarsideState(pair)
    else:
        init = _AmalgamState(pair.m)
        images = _amalgam_images(pair)

    def push(st, g, e):
        if oracle == "garside":
            st.mul_syllable(g, e)
            return
        img = images[g]
        seq = img * e if e > 0 else tuple((x, -t) for x, t in reversed(img)) * (-e)
        for letter, t in seq:
            st.mul(letter, t)

    def copy(st):
        if oracle == "garside":
            return st.copy()
        new = _AmalgamState(st.m)
        new.central, new.reps = st.central, list(st.reps)
        return new

    def key(st):
        return st.key() if oracle == "garside" else (st.central, tuple(st.reps))

    def rec(st, depth, exps):
        if depth == n:
            out.setdefault(key(st), []).append(exps)
            return
        for e in EXPONENTS:
            nxt = copy(st)
            push(nxt, gens[depth], e)
            rec(nxt, depth + 1, exps + (e,))

    rec(init, 0, ())
    return out


def short_relator_counterexamples(m: int, oracle: str, max_syllables: int | None = None) -> tuple[list, int]:
    """Cyclically reduced words with fewer than 2m syllables, |e| <= 2, trivial in G_12.

    Meet in the middle: ``w = P Q`` is trivial iff ``P`` and ``Q^-1`` share a
    normal form.  Returns (counterexamples, number of words covered).
    ``max_syllables`` (default 2m - 1) widens the search, so real relators show up.
    """
    pair = DihedralPair(1, 2, m)
    tables: dict = {}

    def table(n, start):
        if (n, start) not in tables:
            tables[(n, start)] = _half_words(pair, n, start, oracle)
        return tables[(n, start)]

    bad, covered = [], 0
    top = 2 * m - 1 if max_syllables is None else max_syllables
    for s in range(1, top + 1):
        left_n, right_n = (s + 1) // 2, s // 2
        for x in pair.gens:
            covered += len(EXPONENTS) ** s
            gens = [x if t % 2 == 0 else pair.other(x) for t in range(s)]
            left = table(left_n, x)
            if right_n == 0:
                for exps in left.get(_identity_key(pair, oracle), ()):
                    bad.append(from_syllables(zip(gens, exps)))
                continue
            # X = Q^-1 runs the right-hand generators backwards
            right = table(right_n, gens[-1])
            for k, lefts in left.items():
                for x_exps in right.get(k, ()):
                    q_exps = tuple(-e for e in reversed(x_exps))
                    for lefts_exps in lefts:
                        exps = lefts_exps + q_exps
                        if s % 2 == 1 and (exps[0] > 0) != (exps[-1] > 0):
                            continue  # first and last letters cancel cyclically
                        bad.append(from_syllables(zip(gens, exps)))
    return bad, covered


def _identity_key(pair: DihedralPair, oracle: str):
    if oracle == "garside":
        return _GarsideState(pair).key()
    return (0, ())


@_timed
def criterion_1(cfg: AcceptanceConfig) -> CriterionResult:
    total_bad, covered = 0, 0
    notes = []
    for m in range(2, cfg.exhaustive_max_m + 1):
        for oracle in ("garside", "amalgam"):
            bad, n = short_relator_counterexamples(m, oracle)
            total_bad += len(bad)
            if bad:
                notes.append(f"m={m} oracle={oracle} first={bad[0]}")
        covered += n
    return CriterionResult(1, "short_relators", total_bad == 0,
                           f"counterexamples={total_bad};words={covered}", "0", notes=notes)


# -- 2 ----------------------------------------------------------------------

def random_two_gen_word(pair: DihedralPair, rng, max_len: int) -> Word:
    n = int(rng.integers(0, max_len + 1))
    letters = [int(x) for x in rng.choice([pair.i, -pair.i, pair.j, -pair.j], size=n)]
    return free_reduce(letters)


def random_trivial_two_gen_word(pair: DihedralPair, rng, max_len: int) -> Word:
    """Conjugate of a cyclic permutation of a relator (or its inverse), trimmed to ``max_len`` when possible."""
    r = build_relator(pair)
    letters = r.letters()
    k = int(rng.integers(0, len(letters)))
    letters = letters[k:] + letters[:k]
    if rng.random() < 0.5:
        letters = [-x for x in reversed(letters)]
    conj = random_two_gen_word(pair, rng, max(0, (max_len - len(letters)) // 2))
    return concat(conj, free_reduce(letters), invert(conj))


@_timed
def criterion_2(cfg: AcceptanceConfig) -> CriterionResult:
    rng = np.random.default_rng(cfg.seed)
    disagreements, trivial, total = 0, 0, 0
    notes = []
    for m in (2, 3, 4, 7, 8):
        pair = DihedralPair(1, 2, m)
        words = [random_two_gen_word(pair, rng, 12) for _ in range(cfg.oracle_samples)]
        # trivial words are rare among uniform samples, so add short relator conjugates
        words += [random_trivial_two_gen_word(pair, rng, 12) for _ in range(cfg.oracle_samples // 10)
                  ] if 2 * m <= 12 else []
        for w in words:
            g = garside_nf(w, pair).is_trivial
            a = amalgam_nf(w, pair).is_trivial
            total += 1
            trivial += g
            if g != a:
                disagreements += 1
                if len(notes) < 5:
                    notes.append(f"m={m} w={w}")
    agree = 100.0 * (total - disagreements) / total
    return CriterionResult(2, "oracle_equivalence", disagreements == 0,
                           f"agreement={agree:.2f}%;words={total};trivial={trivial}", "100%", notes=notes)


# -- 3 ----------------------------------------------------------------------

def _random_word(n: int, rng, max_len: int) -> Word:
    k = int(rng.integers(0, max_len + 1))
    gens = rng.integers(1, n + 1, size=k)
    signs = rng.choice([-1, 1], size=k)
    return free_reduce([int(g * s) for g, s in zip(gens, signs)])


def random_relator_product(spec: GroupSpec, rng, max_factors: int = 4, conj_len: int = 3) -> Word:
    pairs = spec.finite_pairs()
    parts = []
    for _ in range(int(rng.integers(1, max_factors + 1))):
        i, j = pairs[int(rng.integers(len(pairs)))]
        r = build_relator(DihedralPair(i, j, spec.labels[(i, j)])).letters()
        k = int(rng.integers(0, len(r)))
        r = r[k:] + r[:k]
        if rng.random() < 0.5:
            r = [-x for x in reversed(r)]
        c = _random_word(spec.n, rng, conj_len)
        parts.append(concat(c, free_reduce(r), invert(c)))
    return concat(*parts)


@_timed
def criterion_3(cfg: AcceptanceConfig) -> CriterionResult:
    spec = cfg.spec
    if not spec.finite_pairs():
        return CriterionResult(3, "dehn_completeness", None, "no-relators", "0",
                               notes=["spec has no finite labels; see criterion 8"])
    if not spec.is_extra_large:
        return CriterionResult(3, "dehn_completeness", None, "not-extra-large", "0",
                               notes=["extra-large type required"])
    rng = np.random.default_rng(cfg.seed)
    fails, notes = 0, []
    done = 0
    while done < cfg.dehn_samples:
        w = random_relator_product(spec, rng)
        if not w:
            continue
        done += 1
        if not dehn_solve(w, spec).trivial:
            fails += 1
            if len(notes) < 5:
                notes.append(f"trivial word not reduced: {w}")
    done_nt, tries, abel_nonzero = 0, 0, 0
    while done_nt < cfg.dehn_samples:
        tries += 1
        w = _random_word(spec.n, rng, 20)
        if not w or not is_artin_reduced(w, spec):
            continue
        done_nt += 1
        abel_nonzero += bool(abelian_image(w, spec))
        if dehn_solve(w, spec).trivial:
            fails += 1
            if len(notes) < 5:
                notes.append(f"reduced word reported trivial: {w}")
    return CriterionResult(3, "dehn_completeness", fails == 0,
                           f"failures={fails};trivial_samples={done};reduced_samples={done_nt}", "0",
                           notes=notes + [f"reduced words with nonzero abelian image: {abel_nonzero}"])


# -- 4 ----------------------------------------------------------------------

@_timed
def criterion_4(cfg: AcceptanceConfig) -> CriterionResult:
    spec = cfg.spec
    if not spec.is_theorem_scope:
        return CriterionResult(4, "pipeline", None, "skipped", "0",
                               notes=["theorem-scope required (all m_ij >= 7)"])
    ball, large = _balls(spec, cfg.radius, cfg.slack)
    paths = sample_pipeline_paths(ball, large, cfg.pipeline_samples, cfg.seed)
    fails, worst, notes = 0, 0, []
    for p in paths:
        rep = verify_pipeline(ball, p, large)
        if not rep.ok:
            fails += 1
            if len(notes) < 5:
                notes.append(rep.record())
        if rep.haus_alpha_gamma is not None:
            worst = max(worst, rep.haus_alpha_gamma)
    return CriterionResult(4, "pipeline", fails == 0 and len(paths) == cfg.pipeline_samples,
                           f"failures={fails};paths={len(paths)};max_haus_alpha_gamma={worst}",
                           "0;haus<=8", notes=notes)


# -- 5, 6 ------------------------------------------------------------------

def scan_spec(spec: GroupSpec, cfg: AcceptanceConfig) -> DeltaRow:
    ball, large = _balls(spec, cfg.radius, cfg.slack)
    vertex = bigon_scan(ball, large, "vertex", cfg.cap_geodesics, cfg.seed)
    claim = bigon_scan(ball, large, "claim", cfg.cap_geodesics, cfg.seed, cfg.max_quadrilaterals)
    return DeltaRow(_spec_name(spec), vertex, claim)


def _spec_name(spec: GroupSpec) -> str:
    labels = sorted({spec.labels[p] for p in spec.finite_pairs()})
    return f"n{spec.n}_m" + "-".join(str(x) for x in labels) if labels else f"n{spec.n}_free"


@functools.lru_cache(maxsize=8)
def _scan_cached(spec: GroupSpec, radius, slack, cap, seed, quads) -> DeltaRow:
    cfg = AcceptanceConfig(spec=spec, radius=radius, slack=slack, cap_geodesics=cap, seed=seed,
                           max_quadrilaterals=quads)
    return scan_spec(spec, cfg)


def _scan(spec, cfg):
    return _scan_cached(spec, cfg.radius, cfg.slack, cfg.cap_geodesics, cfg.seed, cfg.max_quadrilaterals)


@_timed
def criterion_5(cfg: AcceptanceConfig) -> CriterionResult:
    if not cfg.spec.is_extra_large:
        return CriterionResult(5, "thin_bigons", None, "skipped", str(BIGON_BOUND),
                               notes=["extra-large type required"])
    row = _scan(cfg.spec, cfg)
    ok = row.vertex.max_delta <= BIGON_BOUND and row.claim.max_delta <= BIGON_BOUND
    return CriterionResult(5, "thin_bigons", ok,
                           f"vertex_max={row.vertex.max_delta};claim_max={row.claim.max_delta};"
                           f"vertex_pairs={row.vertex.pairs};claim_quads={row.claim.pairs}",
                           f"{BIGON_BOUND}", notes=row.vertex.records()[:1] + row.claim.records()[:1])


@_timed
def criterion_6(cfg: AcceptanceConfig) -> CriterionResult:
    specs = [cfg.spec, MIXED, E7_N4] if cfg.spec.is_extra_large else [MIXED, E7_N4]
    rows = [_scan(s, cfg) for s in specs]
    summary = delta_report(rows)
    return CriterionResult(6, "uniformity", summary.ok,
                           f"common={summary.common};"
                           + ";".join(f"{r.name}={r.vertex.max_delta}/{r.claim.max_delta}" for r in rows),
                           f"{BIGON_BOUND}", notes=summary.records())


# -- 7 ----------------------------------------------------------------------

@_timed
def criterion_7(cfg: AcceptanceConfig) -> CriterionResult:
    r1 = parabolic_intersection_check(E7, (1, 2), (1, 3), cfg.intersection_radius)
    r2 = parabolic_intersection_check(E7_N4, (1, 2), (3, 4), cfg.intersection_radius)
    only_identity = all(not x for x, _ in r2.common)
    ok = r1.ok and r2.ok and only_identity
    return CriterionResult(7, "parabolic_intersections", ok,
                           f"G12^G13_common={len(r1.common)};G12^G13_bad={len(r1.failures)};"
                           f"G12^G34_common={len(r2.common)}", "powers_of_a1;identity_only")


# -- 8 ----------------------------------------------------------------------

def free_ball_size(n: int, radius: int) -> int:
    if radius == 0:
        return 1
    return 1 + 2 * n * ((2 * n - 1) ** radius - 1) // (2 * n - 2)


@_timed
def criterion_8(cfg: AcceptanceConfig) -> CriterionResult:
    notes, ok = [], True
    for n, top in ((2, 5), (3, 4)):
        spec = GroupSpec(n, {})
        for radius in range(top + 1):
            b = build_ball(spec, radius, 0)
            if b.n_group != free_ball_size(n, radius) or b.n_cone != 0:
                ok = False
                notes.append(f"n={n} R={radius} got {b.n_group}")
    ball, large = build_ball(FREE2, 3, 1), build_ball(FREE2, 4, 2)
    scan = bigon_scan(ball, large, "vertex", cfg.cap_geodesics, cfg.seed)
    unique = all(geodesic_count(ball, u, v) == 1 for u, v in stable_pairs(ball, large))
    rng = np.random.default_rng(cfg.seed)
    steps = 0
    for _ in range(200):
        w = _random_word(2, rng, 16)
        res = dehn_solve(w, FREE2)
        steps += res.steps
        if res.residual != w:
            ok = False
    ok = ok and scan.max_delta == 0 and unique and steps == 0
    return CriterionResult(8, "free_degeneracy", ok,
                           f"delta={scan.max_delta};unique_geodesics={int(unique)};dehn_steps={steps}",
                           "delta=0;steps=0;closed_form_counts", notes=notes)


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8}


def run_acceptance(cfg: AcceptanceConfig, emit=None) -> list[CriterionResult]:
    """Run the selected criteria (all by default); ``emit`` receives each result as it finishes."""
    out = []
    for k in (cfg.only or sorted(CRITERIA)):
        res = CRITERIA[k](cfg)
        out.append(res)
        if emit is not None:
            emit(res)
    return out
