"""Exact finite-support distributions and the pushforward under T(x, y) = (x+y, (x-y)^2).

Masses are :class:`fractions.Fraction` throughout; nothing on the verdict
path touches floating point.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Callable, Dict, Iterable, Mapping, Optional, Tuple, Union

from .algebra import Element, RingSpec, SubgroupSpec, coset_test
from .errors import CharTwo, ScaleError, SpecMismatch, UnsupportedPrime
from .padic import BranchTable, PAdic, is_square, norm, sqrt_hensel, valuation


def _frac(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("masses must be exact (int, Fraction or 'num/den'), not float")
    return Fraction(x)


class Dist:
    """Probability mass function with finite support on a carrier.

    Zero masses are dropped; the total must be exactly one.
    """

    __slots__ = ("carrier", "pmf")

    def __init__(self, carrier: RingSpec, pmf: Mapping[Element, object]):
        clean = {}
        for x, m in pmf.items():
            m = _frac(m)
            if m < 0:
                raise ValueError(f"negative mass {m} at {x!r}")
            if m:
                x = carrier.coerce(x)
                clean[x] = clean.get(x, Fraction(0)) + m
        if sum(clean.values()) != 1:
            raise ValueError(f"masses sum to {sum(clean.values())}, not 1")
        self.carrier = carrier
        self.pmf = dict(sorted(clean.items()))

    def __call__(self, x) -> Fraction:
        return self.pmf.get(x, Fraction(0))

    def __eq__(self, other) -> bool:
        return isinstance(other, Dist) and self.carrier == other.carrier and self.pmf == other.pmf

    def __repr__(self) -> str:
        return f"Dist({self.carrier}, {format_dist(self)!r})"

    @property
    def support(self) -> Tuple[Element, ...]:
        return tuple(self.pmf)


class JointDist:
    """Mass function on pairs, keyed by ``(u, v)``; sorted lexicographically."""

    __slots__ = ("carrier", "pmf")

    def __init__(self, carrier: RingSpec, pmf: Mapping[Tuple[Element, Element], object]):
        clean = {k: _frac(m) for k, m in pmf.items() if m}
        if any(m < 0 for m in clean.values()):
            raise ValueError("negative mass")
        if sum(clean.values()) != 1:
            raise ValueError(f"masses sum to {sum(clean.values())}, not 1")
        self.carrier = carrier
        self.pmf = dict(sorted(clean.items()))

    def __call__(self, u, v) -> Fraction:
        return self.pmf.get((u, v), Fraction(0))

    def __eq__(self, other) -> bool:
        return isinstance(other, JointDist) and self.carrier == other.carrier and self.pmf == other.pmf

    def __repr__(self) -> str:
        return f"JointDist({self.carrier}, {self.triples()!r})"

    def triples(self):
        """``[u, v, "num/den"]`` rows in sorted order (the wire format)."""
        fmt = self.carrier.format_element
        return [[fmt(u), fmt(v), _fmt_frac(m)] for (u, v), m in self.pmf.items()]


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def degenerate(carrier: RingSpec, x) -> Dist:
    return Dist(carrier, {carrier.coerce(x): 1})


def haar(K: SubgroupSpec) -> Dist:
    m = Fraction(1, K.cardinality)
    return Dist(K.ambient, {k: m for k in K.elements})


def uniform(carrier: RingSpec, subset: Iterable[Element]) -> Dist:
    subset = list(subset)
    m = Fraction(1, len(subset))
    return Dist(carrier, {x: m for x in subset})


def shift(mu: Dist, x) -> Dist:
    R = mu.carrier
    x = R.coerce(x)
    return Dist(R, {R.add(y, x): m for y, m in mu.pmf.items()})


def product(alpha: Dist, beta: Dist) -> JointDist:
    return JointDist(alpha.carrier, {(a, b): ma * mb for a, ma in alpha.pmf.items()
                                     for b, mb in beta.pmf.items()})


# ---------------------------------------------------------------------------
# pushforward
# ---------------------------------------------------------------------------

def push_T(mu: Dist, nu: Dist) -> JointDist:
    """Law of ``(xi + eta, (xi - eta)^2)`` for independent ``xi ~ mu``, ``eta ~ nu``."""
    if mu.carrier != nu.carrier:
        raise SpecMismatch(f"{mu.carrier} vs {nu.carrier}")
    R = mu.carrier
    # integer weights over common denominators keep the double loop cheap
    da = lcm(*(m.denominator for m in mu.pmf.values()))
    db = lcm(*(m.denominator for m in nu.pmf.values()))
    wa = [(x, int(m * da)) for x, m in mu.pmf.items()]
    wb = [(y, int(m * db)) for y, m in nu.pmf.items()]
    acc: Dict[Tuple[Element, Element], int] = defaultdict(int)
    add, sub, mul = R.add, R.sub, R.mul
    for x, mx in wa:
        for y, my in wb:
            d = sub(x, y)
            acc[(add(x, y), mul(d, d))] += mx * my
    den = da * db
    return JointDist(R, {k: Fraction(w, den) for k, w in acc.items()})


def closed_form_SD(mu: Dist) -> JointDist:
    """Law of (S, D) for an iid pair from the half-sum formulas.

    ``P(u, 0) = mu(u/2)^2`` and ``P(u, t^2) = 2 mu((u+t)/2) mu((u-t)/2)`` for
    ``t != 0``; each nonzero square is visited once through a single root.
    Independent of :func:`push_T`, which sums over pairs instead.
    """
    R = mu.carrier
    if not R.is_finite:
        raise ValueError("closed_form_SD needs a finite carrier")
    if R.p == 2:
        raise CharTwo("closed form divides by 2")
    roots: Dict[Element, Element] = {}
    for t in R.elements():
        if t != R.zero:
            roots.setdefault(R.square(t), t)
    out = {}
    for u in R.elements():
        m0 = mu(R.halve(u)) ** 2
        if m0:
            out[(u, R.zero)] = m0
        for v, t in roots.items():
            m = 2 * mu(R.halve(R.add(u, t))) * mu(R.halve(R.sub(u, t)))
            if m:
                out[(u, v)] = m
    return JointDist(R, out)


def marginals(j: JointDist) -> Tuple[Dist, Dist]:
    s: Dict[Element, Fraction] = defaultdict(Fraction)
    d: Dict[Element, Fraction] = defaultdict(Fraction)
    for (u, v), m in j.pmf.items():
        s[u] += m
        d[v] += m
    return Dist(j.carrier, s), Dist(j.carrier, d)


@dataclass(frozen=True)
class Independence:
    """Outcome of an exact independence test; ``witness`` is the first failing pair."""

    independent: bool
    witness: Optional[Tuple[Element, Element]] = None
    joint: Optional[Fraction] = None
    product: Optional[Fraction] = None

    def __bool__(self) -> bool:
        return self.independent


def is_independent(j: JointDist) -> Independence:
    ms, md = marginals(j)
    for u, a in ms.pmf.items():
        for v, b in md.pmf.items():
            if j(u, v) != a * b:
                return Independence(False, (u, v), j(u, v), a * b)
    return Independence(True)


# ---------------------------------------------------------------------------
# idempotent classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Degenerate:
    point: Element


@dataclass(frozen=True)
class HaarShift:
    subgroup: SubgroupSpec
    shift: Element


@dataclass(frozen=True)
class Other:
    pass


Classification = Union[Degenerate, HaarShift, Other]


def classify(mu: Dist) -> Classification:
    if len(mu.pmf) == 1:
        return Degenerate(mu.support[0])
    found = coset_test(mu.carrier, mu.support)
    if found is None:
        return Other()
    K, x = found
    if all(m == Fraction(1, K.cardinality) for m in mu.pmf.values()):
        return HaarShift(K, x)
    return Other()


def is_idempotent(mu: Dist) -> bool:
    return not isinstance(classify(mu), Other)


# ---------------------------------------------------------------------------
# text forms
# ---------------------------------------------------------------------------

def _fmt_frac(m: Fraction) -> str:
    return f"{m.numerator}/{m.denominator}"


def format_dist(mu: Dist) -> str:
    fmt = mu.carrier.format_element
    return ",".join(f"{fmt(x)}:{_fmt_frac(m)}" for x, m in mu.pmf.items())


def parse_dist(carrier: RingSpec, text: str) -> Dist:
    """Parse ``"elem:num/den,elem:num/den,..."``.

    Rational elements contain a slash themselves, so each entry is split on
    its first colon.
    """
    pmf: Dict[Element, Fraction] = defaultdict(Fraction)
    for entry in text.split(","):
        entry = entry.strip()
        if not entry:
            continue
        elem, sep, mass = entry.partition(":")
        if not sep:
            raise ValueError(f"bad distribution entry {entry!r}")
        pmf[carrier.parse_element(elem)] += Fraction(mass)
    return Dist(carrier, pmf)


# ---------------------------------------------------------------------------
# locally constant densities on Z_p
# ---------------------------------------------------------------------------

class StepDensity:
    """Density on ``Z_p`` constant on residue classes mod ``p**level``.

    ``values[r]`` is the density on ``r + p^level Z_p``; each class has Haar
    mass ``p**-level`` so ``sum(values) == p**level``.  Support outside
    ``Z_p`` (negative exponents) is not modelled: scaling by ``p^M`` maps
    ``(S, D)`` to ``(p^M S, p^(2M) D)`` and preserves independence.
    """

    __slots__ = ("p", "level", "values")
    support_exp = 0

    def __init__(self, p: int, level: int, values: Mapping[int, object]):
        mod = p ** level
        clean = {}
        for r, val in values.items():
            val = _frac(val)
            if val < 0:
                raise ValueError("density values must be nonnegative")
            if val:
                clean[int(r) % mod] = val
        if sum(clean.values()) != mod:
            raise ValueError(f"density integrates to {sum(clean.values()) / mod}, not 1")
        self.p = p
        self.level = level
        self.values = dict(sorted(clean.items()))

    def __eq__(self, other):
        return (isinstance(other, StepDensity) and (self.p, self.level, self.values)
                == (other.p, other.level, other.values))

    def __repr__(self):
        return f"StepDensity(p={self.p}, level={self.level}, values={self.to_json()['values']})"

    def at_residue(self, r: int) -> Fraction:
        return self.values.get(r % self.p ** self.level, Fraction(0))

    def __call__(self, x) -> Fraction:
        """Density at a rational or p-adic point (zero off ``Z_p``)."""
        if isinstance(x, PAdic):
            if not x.in_Zp():
                return Fraction(0)
            return self.at_residue(x.residue(self.level))
        x = Fraction(x)
        if x != 0 and valuation(x, self.p) < 0:
            return Fraction(0)
        mod = self.p ** self.level
        return self.at_residue(x.numerator * pow(x.denominator, -1, mod))

    def refine(self, level: int) -> "StepDensity":
        if level < self.level:
            raise ValueError("cannot coarsen a step density")
        if level == self.level:
            return self
        mod = self.p ** level
        return StepDensity(self.p, level, {r: self.at_residue(r) for r in range(mod)})

    def to_dist(self, level: Optional[int] = None) -> Dist:
        """The induced law of ``x mod p**level`` on ``Z/p**level``."""
        level = self.level if level is None else level
        d = self.refine(max(level, self.level))
        R = RingSpec.modular_ring(self.p, level)
        w = Fraction(1, self.p ** d.level)
        mod = self.p ** level
        pmf: Dict[int, Fraction] = defaultdict(Fraction)
        for r, val in d.values.items():
            pmf[r % mod] += val * w
        return Dist(R, pmf)

    def to_json(self) -> dict:
        return {"p": self.p, "level": self.level,
                "values": {str(r): _fmt_frac(v) for r, v in self.values.items()}}

    @classmethod
    def from_json(cls, obj: dict) -> "StepDensity":
        return cls(int(obj["p"]), int(obj["level"]),
                   {int(r): Fraction(v) for r, v in obj["values"].items()})


def haar_density(p: int, m: int, level: int) -> StepDensity:
    """Haar density of ``p^m Z_p`` (value ``p^m`` on it) at resolution ``level >= m``."""
    if m < 0:
        raise ScaleError("support must lie in Z_p")
    if level < m:
        raise ValueError("level must be at least m")
    step = p ** m
    return StepDensity(p, level, {r: step for r in range(0, p ** level, step)})


class SDDensity:
    """Density of ``(S, D)`` under ``rho x rho``, evaluated pointwise.

    ``2 rho((u+s)/2) rho((u-s)/2) / |s|_p`` with ``s`` the canonical root of a
    nonzero square ``v``; zero when ``v`` is not a nonzero square.
    """

    def __init__(self, rho: StepDensity, table: BranchTable):
        if rho.p == 2:
            raise UnsupportedPrime("closed-form density needs odd p; use residue_SD_test for p = 2")
        if table.p != rho.p:
            raise ValueError("branch table for a different prime")
        self.rho = rho
        self.table = table

    def __call__(self, u, v) -> Fraction:
        p = self.rho.p
        u, v = Fraction(u), Fraction(v)
        if v == 0:
            return Fraction(0)
        # enough digits that (u +- s)/2 is resolved modulo p^level
        vv = valuation(v, p)
        prec = self.rho.level + abs(vv) + 2 + (abs(valuation(u, p)) if u else 0)
        pv = PAdic.from_rational(p, v, prec)
        if not is_square(pv):
            return Fraction(0)
        s = sqrt_hensel(pv, self.table)
        pu = PAdic.from_rational(p, u, prec + abs(vv))
        half = Fraction(1, 2)
        x = (pu + s) * half
        y = (pu - s) * half
        return 2 * self.rho(x) * self.rho(y) / norm(s)


def density_SD(rho: StepDensity, table: BranchTable) -> SDDensity:
    return SDDensity(rho, table)


def residue_SD_test(rho: StepDensity, level: Optional[int] = None) -> Independence:
    """Independence of ``(S mod p^level, D mod p^level)`` for an iid pair with density ``rho``.

    A failure certifies dependence of ``S`` and ``D`` over ``Q_p``.
    """
    mu = rho.to_dist(level)
    return is_independent(push_T(mu, mu))
