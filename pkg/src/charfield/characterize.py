"""Functional-equation engine and the theorem-level verification scenarios.

Every scenario returns a :class:`Report`.  Randomised scenarios derive one
generator per trial from ``(seed, scenario, trial index)`` so results do not
depend on worker count or scheduling.
"""
from __future__ import annotations

import hashlib
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from math import lcm
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Tuple

from .algebra import (
    RingSpec,
    SubgroupSpec,
    all_subgroups,
    coset_test,
    iter_nonempty_subsets,
)
from .errors import NotASubgroup, PreconditionViolated, ZeroValue
from .measure import (
    Dist,
    HaarShift,
    Other,
    StepDensity,
    classify,
    degenerate,
    format_dist,
    haar,
    haar_density,
    is_idempotent,
    is_independent,
    push_T,
    residue_SD_test,
    shift,
    uniform,
)
from .padic import (
    PAdic,
    branch_table,
    eq12_check,
    is_square,
    lemma4_check,
    lemma5_check,
    norm,
    pmul,
    sqrt_hensel,
    sqrt_lipschitz_check,
    sqrt_series,
)

MASS_BOUND = 8  # random masses are integers in [1, MASS_BOUND] before normalising


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class Report:
    scenario: str
    params: Dict[str, Any]
    seed: Optional[int]
    passed: bool
    witnesses: List[Any] = field(default_factory=list)
    trials: int = 0
    passes: int = 0
    fails: int = 0
    details: Dict[str, Any] = field(default_factory=dict)
    runtime_ms: float = 0.0

    @property
    def counts(self) -> Dict[str, int]:
        return {"trials": self.trials, "passes": self.passes, "fails": self.fails}


def _finish(report: Report, started: float) -> Report:
    report.runtime_ms = round((time.perf_counter() - started) * 1000, 3)
    return report


def trial_rng(seed: int, scenario: str, index: int) -> random.Random:
    """Generator for one trial: sha256 of ``"seed:scenario:index"``, first 8 bytes."""
    digest = hashlib.sha256(f"{seed}:{scenario}:{index}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _map_trials(fn: Callable, n: int, workers: int) -> list:
    """``[fn(i) for i in range(n)]``, optionally across processes; order kept."""
    if workers and workers > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, range(n), chunksize=max(1, n // (4 * workers))))
    return [fn(i) for i in range(n)]


def fmt(x) -> str:
    """Exact rational as ``num/den`` text."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# random distributions
# ---------------------------------------------------------------------------

def random_dist(R: RingSpec, rng: random.Random, *, with_zero: bool = False,
                support: Optional[Iterable] = None, bound: int = MASS_BOUND) -> Dist:
    """Integer masses in ``[1, bound]`` on a random support, normalised.

    Each element of ``support`` (default: the whole carrier) is kept with
    probability 1/2, retrying until nonempty; ``with_zero`` forces 0 in.
    """
    pool = list(R.elements() if support is None else support)
    while True:
        chosen = [x for x in pool if rng.random() < 0.5]
        if with_zero and R.zero not in chosen:
            chosen.append(R.zero)
        if chosen:
            break
    weights = {x: rng.randint(1, bound) for x in sorted(chosen)}
    total = sum(weights.values())
    return Dist(R, {x: Fraction(w, total) for x, w in weights.items()})


# ---------------------------------------------------------------------------
# functional equation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeqVerdict:
    passed: bool
    witness: Optional[Tuple[Any, Any]] = None
    lhs: Optional[Fraction] = None
    rhs: Optional[Fraction] = None

    def __bool__(self) -> bool:
        return self.passed


def _as_function(f) -> Callable[[Any], Fraction]:
    if isinstance(f, Dist):
        return f
    if isinstance(f, StepDensity):
        return f.at_residue
    if isinstance(f, Mapping):
        return lambda x: Fraction(f.get(x, 0))
    return f


def feq_sides(f, R: RingSpec, u, v) -> Tuple[Fraction, Fraction]:
    """``(f(u)^2 f(v) f(-v), f(0)^2 f(u+v) f(u-v))``."""
    g = _as_function(f)
    lhs = g(u) ** 2 * g(v) * g(R.neg(v))
    rhs = g(R.zero) ** 2 * g(R.add(u, v)) * g(R.sub(u, v))
    return Fraction(lhs), Fraction(rhs)


def _support_of(f, R: RingSpec):
    if isinstance(f, Dist):
        return list(f.support)
    if isinstance(f, Mapping):
        return sorted(x for x, m in f.items() if m)
    raise TypeError("feq_check on the rationals needs a finite-support mapping")


def _candidate_pairs(R: RingSpec, support) -> List[Tuple[Any, Any]]:
    """Pairs where either side of the equation can be nonzero.

    The left side needs ``u, v`` in the support; the right side needs
    ``u + v = a`` and ``u - v = b`` with ``a, b`` in the support.
    """
    pairs = {(u, v) for u in support for v in support}
    pairs |= {(R.halve(R.add(a, b)), R.halve(R.sub(a, b))) for a in support for b in support}
    return sorted(pairs)


def feq_check(f, carrier: RingSpec) -> FeqVerdict:
    """Exact check of ``f(u)^2 f(v) f(-v) == f(0)^2 f(u+v) f(u-v)`` for all ``u, v``.

    ``f`` may be a :class:`Dist`, a mapping (missing keys are 0), a
    :class:`StepDensity` (on ``Z/p^level``) or a callable.  Finite carriers
    are checked over every pair in enumeration order; on the rationals only
    pairs where some side can be nonzero are visited.
    """
    R = carrier
    g = _as_function(f)
    if R.is_finite:
        elems = list(R.elements())
        vals = [Fraction(g(x)) for x in elems]
        # the equation is homogeneous of degree 4: clear denominators once
        den = lcm(*(v.denominator for v in vals)) if vals else 1
        iv = [int(v * den) for v in vals]
        index = {x: i for i, x in enumerate(elems)}
        neg = [index[R.neg(x)] for x in elems]
        f0sq = iv[index[R.zero]] ** 2
        for iu, u in enumerate(elems):
            fu2 = iv[iu] ** 2
            for jv, v in enumerate(elems):
                lhs = fu2 * iv[jv] * iv[neg[jv]]
                rhs = f0sq * iv[index[R.add(u, v)]] * iv[index[R.sub(u, v)]]
                if lhs != rhs:
                    l, r = feq_sides(g, R, u, v)
                    return FeqVerdict(False, (u, v), l, r)
        return FeqVerdict(True)
    for u, v in _candidate_pairs(R, _support_of(f, R)):
        lhs, rhs = feq_sides(g, R, u, v)
        if lhs != rhs:
            return FeqVerdict(False, (u, v), lhs, rhs)
    return FeqVerdict(True)


def support_subgroup(f, carrier: RingSpec) -> SubgroupSpec:
    """The support of a positive-at-0 solution of the equation, checked to be a subgroup."""
    R = carrier
    if R.p == 2:
        raise PreconditionViolated("needs unique halving (characteristic != 2)")
    g = _as_function(f)
    if not g(R.zero) > 0:
        raise PreconditionViolated("f(0) must be positive")
    if not feq_check(f, R):
        raise PreconditionViolated("f does not satisfy the functional equation")
    if R.is_finite:
        supp = frozenset(x for x in R.elements() if g(x))
    else:
        supp = frozenset(_support_of(f, R))
    for a in supp:
        if R.neg(a) not in supp:
            raise NotASubgroup(f"-{a} missing from the support")
        for b in supp:
            if R.add(a, b) not in supp:
                raise NotASubgroup(f"{a} + {b} missing from the support")
    return SubgroupSpec(R, tuple(sorted(supp)), supp)


# ---------------------------------------------------------------------------
# multiplicative finite differences
# ---------------------------------------------------------------------------

def mdiff(f, h, add: Callable = None) -> Callable:
    """``x -> f(x + h) / f(x)``, the exponential of a finite difference of ``log f``."""
    g = _as_function(f)
    plus = add or (lambda a, b: a + b)

    def quotient(x):
        base = Fraction(g(x))
        if base == 0:
            raise ZeroValue(f"f vanishes at {x!r}")
        return Fraction(g(plus(x, h))) / base

    return quotient


def mdiff_iter(f, u, m: int, add: Callable = None) -> Callable:
    g = f
    for _ in range(m):
        g = mdiff(g, u, add)
    return g


# ---------------------------------------------------------------------------
# discrete fields
# ---------------------------------------------------------------------------

def _require_odd_field(R: RingSpec) -> None:
    if not R.is_finite or not R.is_field:
        raise PreconditionViolated(f"{R} is not a finite field")
    if R.p == 2:
        raise PreconditionViolated("characteristic 2")


def lemma1_roundtrip(mu: Dist) -> Report:
    """Independence of (S, D) agrees with the functional equation for one ``mu``."""
    started = time.perf_counter()
    R = mu.carrier
    _require_odd_field(R)
    if not mu(R.zero) > 0:
        raise PreconditionViolated("mu(0) must be positive")
    ind = is_independent(push_T(mu, mu))
    feq = feq_check(mu, R)
    agree = ind.independent == feq.passed
    witnesses = [] if agree else [{"independent": ind.independent, "feq": feq.passed}]
    details = {"independent": ind.independent, "feq": feq.passed}
    if feq.witness is not None:
        details["feq_witness"] = [R.format_element(x) for x in feq.witness]
    return _finish(Report("lemma1", {"field": str(R)}, None, agree, witnesses, 1,
                          int(agree), int(not agree), details), started)


def _lemma1_trial(R: RingSpec, seed: int, i: int):
    rng = trial_rng(seed, "lemma1", i)
    if rng.random() < 0.25:
        groups = all_subgroups(R)
        mu = haar(groups[rng.randrange(len(groups))])
    else:
        mu = random_dist(R, rng, with_zero=True)
    ind = is_independent(push_T(mu, mu)).independent
    feq = feq_check(mu, R).passed
    return ind == feq, ind, mu


def lemma1_verify(R: RingSpec, trials: int = 500, seed: int = 0, workers: int = 1) -> Report:
    started = time.perf_counter()
    _require_odd_field(R)
    results = _map_trials(partial(_lemma1_trial, R, seed), trials, workers)
    witnesses = [{"trial": i, "mu": format_dist(mu)} for i, (ok, _, mu) in enumerate(results) if not ok]
    fails = len(witnesses)
    details = {"independent_cases": sum(1 for _, ind, _ in results if ind)}
    return _finish(Report("lemma1", {"field": str(R), "trials": trials}, seed, fails == 0,
                          witnesses, trials, trials - fails, fails, details), started)


def _theorem1_trial(R: RingSpec, seed: int, i: int):
    rng = trial_rng(seed, "theorem1", i)
    while True:
        mu = random_dist(R, rng)
        if isinstance(classify(mu), Other):
            break
    return not is_independent(push_T(mu, mu)).independent, mu


SWEEP_LIMIT = 16  # carriers up to this order get the all-subsets sweep


def theorem1_verify(R: RingSpec, trials: int = 1000, seed: int = 0, workers: int = 1) -> Report:
    """Independence of (S, D) holds exactly for the idempotent laws.

    (a) every shift of every subgroup Haar law is independent; (b) random
    non-idempotent laws are dependent; (c) for small carriers, a uniform law
    on a subset is independent iff the subset is a coset.
    """
    started = time.perf_counter()
    _require_odd_field(R)
    witnesses = []
    groups = all_subgroups(R)
    haar_checked = 0
    for K in groups:
        base = haar(K)
        cosets = {frozenset(R.add(k, x) for k in K.elements): x for x in R.elements()}
        for x in sorted(cosets.values()):
            haar_checked += 1
            if not is_independent(push_T(shift(base, x), shift(base, x))):
                witnesses.append({"part": "a", "subgroup": sorted(K.elements), "shift": x})
    results = _map_trials(partial(_theorem1_trial, R, seed), trials, workers)
    random_fails = [i for i, (ok, _) in enumerate(results) if not ok]
    for i in random_fails:
        witnesses.append({"part": "b", "trial": i, "mu": format_dist(results[i][1])})
    details = {"subgroups": len(groups), "haar_shifts_checked": haar_checked}
    if R.order <= SWEEP_LIMIT:
        passing = []
        n_subsets = 0
        for s in iter_nonempty_subsets(R):
            n_subsets += 1
            mu = uniform(R, sorted(s))
            ind = is_independent(push_T(mu, mu)).independent
            is_coset = coset_test(R, s) is not None
            if ind:
                passing.append(sorted(s))
            if ind != is_coset:
                witnesses.append({"part": "c", "subset": sorted(s), "independent": ind})
        details["subsets_swept"] = n_subsets
        details["independent_subsets"] = len(passing)
    else:
        details["subsets_swept"] = 0
    fails = len(witnesses)
    total = haar_checked + trials + details["subsets_swept"]
    return _finish(Report("theorem1", {"field": str(R), "trials": trials}, seed, fails == 0,
                          witnesses, total, total - fails, fails, details), started)


def rational_grid(radius: int, denom_bound: int) -> List[Fraction]:
    """``{a/d : 1 <= d <= denom_bound, |a/d| <= radius}`` in increasing order."""
    pts = {Fraction(a, d) for d in range(1, denom_bound + 1)
           for a in range(-radius * d, radius * d + 1)}
    return sorted(pts)


def _theorem2_trial(radius: int, denom_bound: int, seed: int, i: int):
    rng = trial_rng(seed, "theorem2", i)
    Q = RingSpec.rationals()
    grid = rational_grid(radius, denom_bound)
    size = rng.randint(2, min(6, len(grid)))
    pts = rng.sample(grid, size)
    weights = [rng.randint(1, MASS_BOUND) for _ in pts]
    total = sum(weights)
    mu = Dist(Q, {x: Fraction(w, total) for x, w in zip(pts, weights)})
    return not is_independent(push_T(mu, mu)).independent, mu


def theorem2_search(radius: int = 3, denom_bound: int = 2, trials: int = 500,
                    seed: int = 0, workers: int = 1) -> Report:
    """Randomised refutation search on the rationals: nondegenerate laws must be dependent.

    Supports are 2 to 6 distinct points of :func:`rational_grid`.  Zero
    counterexamples is evidence, not proof.
    """
    started = time.perf_counter()
    results = _map_trials(partial(_theorem2_trial, radius, denom_bound, seed), trials, workers)
    witnesses = [{"trial": i, "mu": format_dist(mu)} for i, (ok, mu) in enumerate(results) if not ok]
    fails = len(witnesses)
    params = {"field": "q", "radius": radius, "denom_bound": denom_bound, "trials": trials}
    return _finish(Report("theorem2", params, seed, fails == 0, witnesses, trials,
                          trials - fails, fails), started)


def _fraction_grid(denom_bound: int) -> List[Fraction]:
    return sorted({Fraction(a, d) for d in range(1, denom_bound + 1) for a in range(d + 1)})


def _remark1_trial(R: RingSpec, seed: int, i: int):
    rng = trial_rng(seed, "remark1", i)
    while True:
        mu = random_dist(R, rng)
        nu = random_dist(R, rng)
        if len(mu.pmf) > 1 or len(nu.pmf) > 1:
            break
    return not is_independent(push_T(mu, nu)).independent, mu, nu


def remark1_verify(R: RingSpec, trials: int = 200, seed: int = 0, workers: int = 1,
                   denom_bound: int = 4) -> Report:
    """Characteristic 2: (S, D) independent only when both laws are degenerate.

    On F_2 every pair of laws with masses in the denominator-``denom_bound``
    grid is checked; larger fields get all degenerate pairs plus ``trials``
    random pairs with a nondegenerate component.
    """
    started = time.perf_counter()
    if not R.is_finite or R.p != 2 or not R.is_field:
        raise PreconditionViolated(f"{R} is not a field of characteristic 2")
    witnesses = []
    checked = 0
    for x in R.elements():
        for y in R.elements():
            checked += 1
            if not is_independent(push_T(degenerate(R, x), degenerate(R, y))):
                witnesses.append({"degenerate_pair": [x, y]})
    if R.order == 2:
        laws = [Dist(R, {0: a, 1: 1 - a}) for a in _fraction_grid(denom_bound)]
        for mu in laws:
            for nu in laws:
                if len(mu.pmf) == 1 and len(nu.pmf) == 1:
                    continue
                checked += 1
                if is_independent(push_T(mu, nu)):
                    witnesses.append({"mu": format_dist(mu), "nu": format_dist(nu)})
    else:
        results = _map_trials(partial(_remark1_trial, R, seed), trials, workers)
        checked += trials
        for i, (ok, mu, nu) in enumerate(results):
            if not ok:
                witnesses.append({"trial": i, "mu": format_dist(mu), "nu": format_dist(nu)})
    fails = len(witnesses)
    params = {"field": str(R), "trials": trials if R.order > 2 else 0}
    return _finish(Report("remark1", params, seed, fails == 0, witnesses, checked,
                          checked - fails, fails), started)


def remark2_counterexample(R: RingSpec) -> Report:
    """``mu = (E_-e + E_e)/2`` against ``nu = E_0``: independent, yet ``mu`` is not idempotent."""
    started = time.perf_counter()
    _require_odd_field(R)
    e = R.one
    mu = Dist(R, {e: Fraction(1, 2), R.neg(e): Fraction(1, 2)})
    nu = degenerate(R, R.zero)
    ind = is_independent(push_T(mu, nu))
    cls = classify(mu)
    ok = ind.independent and isinstance(cls, Other)
    witnesses = [] if ok else [{"independent": ind.independent, "class": type(cls).__name__}]
    details = {"mu": format_dist(mu), "nu": format_dist(nu), "independent": ind.independent,
               "class": type(cls).__name__}
    return _finish(Report("remark2", {"field": str(R)}, None, ok, witnesses, 1, int(ok),
                          int(not ok), details), started)


# ---------------------------------------------------------------------------
# p-adic scenarios
# ---------------------------------------------------------------------------

def random_step_density(p: int, level: int, rng: random.Random, bound: int = MASS_BOUND) -> StepDensity:
    """Random nonnegative step density at ``level`` with positive value on the class of 0."""
    mod = p ** level
    w = [rng.randint(0, bound) if rng.random() < 0.7 else 0 for _ in range(mod)]
    if w[0] == 0:
        w[0] = rng.randint(1, bound)
    total = sum(w)
    return StepDensity(p, level, {r: Fraction(x * mod, total) for r, x in enumerate(w) if x})


def _theorem3_trial(p: int, level: int, seed: int, i: int):
    rng = trial_rng(seed, "theorem3", i)
    while True:
        base = rng.randint(1, level)
        rho = random_step_density(p, base, rng)
        if not is_idempotent(rho.to_dist()):
            break
    R = RingSpec.modular_ring(p, level)
    feq = feq_check(rho.refine(level), R)
    dependent_at = None
    for lv in range(base, level + 1):
        if not residue_SD_test(rho, lv).independent:
            dependent_at = lv
            break
    return (not feq.passed) and dependent_at is not None, rho, feq.passed, dependent_at


def theorem3_verify(p: int, m: int = 0, level: int = 3, trials: int = 100, seed: int = 0,
                    workers: int = 1) -> Report:
    """Residue model of the p-adic characterisation (odd ``p``, densities on ``Z_p``).

    (a) The Haar density of ``p^m Z_p`` satisfies the functional equation on
    ``Z/p^level`` and passes the residue independence test.  (b) Random
    non-idempotent step densities fail the equation and fail the residue test
    at some level up to ``level``.
    """
    started = time.perf_counter()
    if p == 2:
        raise PreconditionViolated("odd p only; see remark3_verify")
    if m < 0 or level <= m:
        raise PreconditionViolated("need 0 <= m < level")
    R = RingSpec.modular_ring(p, level)
    rho = haar_density(p, m, level)
    witnesses = []
    feq = feq_check(rho, R)
    res = residue_SD_test(rho, level)
    if not feq.passed or not res.independent:
        witnesses.append({"part": "a", "feq": feq.passed, "residue_independent": res.independent})
    results = _map_trials(partial(_theorem3_trial, p, level, seed), trials, workers)
    for i, (ok, rho_i, feq_ok, dep) in enumerate(results):
        if not ok:
            witnesses.append({"part": "b", "trial": i, "density": rho_i.to_json(),
                              "feq": feq_ok, "dependent_at": dep})
    fails = len(witnesses)
    total = 1 + trials
    details = {"haar_feq": feq.passed, "haar_residue_independent": res.independent}
    params = {"p": p, "m": m, "level": level, "trials": trials}
    return _finish(Report("theorem3", params, seed, fails == 0, witnesses, total,
                          total - fails, fails, details), started)


def remark3_verify(m: int = 0, level: int = 2) -> Report:
    """The 2-adic Haar density of ``2^m Z_2`` breaks the equation and independence.

    Exact evaluation at ``u = v = 2^(m-1)``: left side 0, right side ``2^(4m)``;
    plus the residue-level dependence witness in ``Z/2^level``.
    """
    started = time.perf_counter()
    if level <= m + 1:
        raise PreconditionViolated("need level > m + 1")
    rho = haar_density(2, m, level)
    u = v = Fraction(2) ** (m - 1)
    lhs = rho(u) ** 2 * rho(v) * rho(-v)
    rhs = rho(0) ** 2 * rho(u + v) * rho(u - v)
    exact_ok = lhs == 0 and rhs == Fraction(2) ** (4 * m)
    res = residue_SD_test(rho, level)
    ok = exact_ok and not res.independent
    witnesses = []
    if res.witness is not None:
        witnesses.append({"pair": list(res.witness), "joint": fmt(res.joint),
                          "product": fmt(res.product)})
    details = {"u": fmt(u), "v": fmt(v), "lhs": fmt(lhs), "rhs": fmt(rhs),
               "residue_independent": res.independent}
    return _finish(Report("remark3", {"m": m, "level": level}, None, ok, witnesses, 2,
                          int(exact_ok) + int(not res.independent),
                          int(not exact_ok) + int(res.independent), details), started)


def _random_square(p: int, prec: int, rng: random.Random) -> PAdic:
    mod = p ** prec
    while True:
        t = rng.randrange(1, mod)
        if t % p:
            break
    l = rng.randint(-2, 2)
    return PAdic(p, 2 * l, t * t % mod, prec)


def lemma3_verify(p: int, trials: int = 100, seed: int = 0, prec: int = 8) -> Report:
    """Canonical square root on random squares of ``Q_p``.

    Checks ``s(x)^2 = x`` to precision, the branch rule, ``s(p^2 x) = p s(x)``,
    and (odd ``p``) agreement of the Hensel and power-series algorithms.
    """
    started = time.perf_counter()
    table = branch_table(p)
    witnesses = []
    for i in range(trials):
        rng = trial_rng(seed, "lemma3", i)
        x = _random_square(p, prec, rng)
        s = sqrt_hensel(x, table)
        checks = {
            "square": pmul(s, s).matches(x),
            "valuation": s.val * 2 == x.val,
            "norm": norm(s) ** 2 == norm(x),
            "branch": table.selects(s.unit),
            "scaling": sqrt_hensel(PAdic(p, x.val + 2, x.unit, x.prec), table).matches(pmul(PAdic.from_rational(p, p, prec), s)),
        }
        if p != 2:
            checks["series"] = sqrt_series(x, table) == s
        if not all(checks.values()):
            witnesses.append({"trial": i, "x": x.to_json(),
                              "failed": sorted(k for k, v in checks.items() if not v)})
    fails = len(witnesses)
    details = {"branch_table": table.to_json()}
    return _finish(Report("lemma3", {"p": p, "trials": trials, "prec": prec}, seed, fails == 0,
                          witnesses, trials, trials - fails, fails, details), started)


def lemma4_verify(p: int, max_level: int = 5) -> Report:
    """Sweep of :func:`lemma4_check` over ``x0`` in ``[0, p)``, ``y0 = x0 + p^l c``.

    ``l`` in {0, 1}, ``k`` in {l+1, l+2}, every unit ``c`` in ``[1, p)``; the
    level is ``k + l + 2`` capped at ``max_level`` (never below ``k + l + 1``).
    """
    started = time.perf_counter()
    witnesses = []
    n = 0
    slack = 2 if p == 2 else 1
    for l in (0, 1):
        for k in (l + slack, l + slack + 1):
            lo = k + l + (2 if p == 2 else 1)
            level = max(lo, min(lo + 1, max_level))
            for x0 in range(p):
                for c in range(1, p):
                    n += 1
                    X0 = PAdic.from_rational(p, x0)
                    Y0 = PAdic.from_rational(p, x0 + p ** l * c)
                    if not lemma4_check(X0, Y0, k, level):
                        witnesses.append({"x0": x0, "y0": x0 + p ** l * c, "k": k, "level": level})
    fails = len(witnesses)
    return _finish(Report("lemma4", {"p": p, "max_level": max_level}, None, fails == 0,
                          witnesses, n, n - fails, fails), started)


def eq12_verify(p: int, level: int = 3, ms: Tuple[int, ...] = (1, 2)) -> Report:
    started = time.perf_counter()
    witnesses = []
    n = 0
    for m in ms:
        for c in range(1, p):
            n += 1
            if not eq12_check(p, c, m, level):
                witnesses.append({"c": c, "m": m})
    fails = len(witnesses)
    return _finish(Report("eq12", {"p": p, "level": level, "m": list(ms)}, None, fails == 0,
                          witnesses, n, n - fails, fails), started)


def lemma5_samples(p: int, level: int):
    """(u0, v0, k) with v0 a unit square (k = 1, 2) or p^2 times one (k = 2)."""
    unit_squares = sorted({x * x % p for x in range(1, p)})
    out = []
    for u0 in (0, 1):
        for c in unit_squares:
            for k in (1, 2):
                if level >= k + 1:
                    out.append((u0, c, k))
            if level >= 4:
                out.append((u0, p * p * c, 2))
    return out


def lemma5_verify(p: int, level: int = 4) -> Report:
    started = time.perf_counter()
    table = branch_table(p)
    witnesses = []
    samples = lemma5_samples(p, level)
    for u0, v0, k in samples:
        U0 = PAdic.from_rational(p, u0)
        V0 = PAdic.from_rational(p, v0)
        disjoint, jac = lemma5_check(U0, V0, k, level, table)
        lip = sqrt_lipschitz_check(V0, k, level, table)
        if not (disjoint and jac and lip):
            witnesses.append({"u0": u0, "v0": v0, "k": k, "disjoint": disjoint,
                              "jacobian_ok": jac, "lipschitz": lip})
    n = len(samples)
    fails = len(witnesses)
    return _finish(Report("lemma5", {"p": p, "level": level}, None, fails == 0, witnesses,
                          n, n - fails, fails), started)
