"""Precision-tracked p-adic numbers, square roots and residue-level ball checks.

A nonzero :class:`PAdic` stores ``p**val * unit + O(p**(val + prec))`` where
``unit`` is an integer in ``[0, p**prec)`` prime to ``p``.  A zero stores only
the absolute precision it is known to (``O(p**val)``).

Precision propagates conservatively: sums keep the smaller absolute
precision, products and quotients the smaller relative precision.  Digits
lost to cancellation are never invented.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, NamedTuple, Optional, Tuple, Union

from .algebra import is_prime
from .errors import (
    DivisionByZero,
    InsufficientPrecision,
    NotASquare,
    PrecisionExhausted,
    PreconditionViolated,
    ScaleError,
    UnsupportedPrime,
)

DEFAULT_PREC = 8

Number = Union[int, Fraction]


def valuation(x: Number, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


@dataclass(frozen=True)
class PAdic:
    p: int
    val: int
    unit: int
    prec: int

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_rational(cls, p: int, x: Number, prec: int = DEFAULT_PREC) -> "PAdic":
        """Exact rational truncated to ``prec`` relative digits.

        Zero becomes ``O(p**prec)``.
        """
        if prec < 1:
            raise ValueError("relative precision must be at least 1")
        x = Fraction(x)
        if x == 0:
            return cls.zero(p, prec)
        v = valuation(x, p)
        num = x.numerator
        den = x.denominator
        if v > 0:
            num //= p ** v
        elif v < 0:
            den //= p ** (-v)
        mod = p ** prec
        return cls(p, v, num * pow(den, -1, mod) % mod, prec)

    @classmethod
    def zero(cls, p: int, abs_prec: int) -> "PAdic":
        return cls(p, abs_prec, 0, 0)

    @classmethod
    def from_residue(cls, p: int, r: int, level: int) -> "PAdic":
        """The class of the integer ``r`` modulo ``p**level``."""
        r %= p ** level
        if r == 0:
            return cls.zero(p, level)
        v = valuation(r, p)
        return cls(p, v, r // p ** v, level - v)

    @classmethod
    def from_digits(cls, p: int, val: int, digits) -> "PAdic":
        digits = list(digits)
        if not digits or digits[0] == 0:
            raise ValueError("leading digit must be nonzero")
        if any(not 0 <= d < p for d in digits):
            raise ValueError("digits must lie in [0, p)")
        unit = sum(d * p ** i for i, d in enumerate(digits))
        return cls(p, val, unit, len(digits))

    @classmethod
    def from_json(cls, obj: dict) -> "PAdic":
        p = int(obj["p"])
        if obj.get("zero"):
            return cls.zero(p, int(obj["val"]))
        return cls.from_digits(p, int(obj["val"]), obj["digits"])

    # -- inspection -----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.unit == 0

    @property
    def abs_prec(self) -> int:
        return self.val + self.prec

    @property
    def digits(self) -> Tuple[int, ...]:
        u, p = self.unit, self.p
        out = []
        for _ in range(self.prec):
            out.append(u % p)
            u //= p
        return tuple(out)

    def residue(self, level: int) -> int:
        """Integer in ``[0, p**level)`` congruent to this element of ``Z_p``."""
        if self.is_zero:
            if self.abs_prec < level:
                raise PrecisionExhausted(f"{self} is only known modulo p^{self.abs_prec}")
            return 0
        if self.val < 0:
            raise ScaleError(f"{self} is not in Z_{self.p}")
        if self.val >= level:
            return 0
        if self.abs_prec < level:
            raise PrecisionExhausted(f"{self} is only known modulo p^{self.abs_prec}")
        return self.unit * self.p ** self.val % self.p ** level

    def in_Zp(self) -> bool:
        return self.is_zero or self.val >= 0

    def with_abs_prec(self, k: int) -> "PAdic":
        """Drop digits beyond absolute precision ``k`` (never adds digits)."""
        if k >= self.abs_prec:
            return self
        if self.is_zero or k <= self.val:
            return PAdic.zero(self.p, k)
        prec = k - self.val
        return PAdic(self.p, self.val, self.unit % self.p ** prec, prec)

    def matches(self, other: "PAdic") -> bool:
        """Equal modulo the smaller of the two absolute precisions."""
        if self.p != other.p:
            return False
        d = psub(self, other)
        return d.is_zero

    def to_rational(self) -> Fraction:
        """The truncated digit expansion as an exact rational."""
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.val

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "zero": self.is_zero,
            "val": self.val,
            "digits": list(self.digits),
            "prec": self.prec,
        }

    def __str__(self) -> str:
        p = self.p
        if self.is_zero:
            return f"O({p}^{self.val})"
        terms = []
        for i, d in enumerate(self.digits):
            if i == 0:
                terms.append(str(d))
            elif i == 1:
                terms.append(f"{d}*{p}")
            else:
                terms.append(f"{d}*{p}^{i}")
        return f"{p}^{self.val} * ({' + '.join(terms)}) + O({p}^{self.abs_prec})"

    # operators delegate to the module functions
    def __add__(self, other):
        return padd(self, _lift(self.p, other))

    __radd__ = __add__

    def __sub__(self, other):
        return psub(self, _lift(self.p, other))

    def __rsub__(self, other):
        return psub(_lift(self.p, other), self)

    def __mul__(self, other):
        return pmul(self, _lift(self.p, other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return pdiv(self, _lift(self.p, other))

    def __rtruediv__(self, other):
        return pdiv(_lift(self.p, other), self)

    def __neg__(self):
        return pneg(self)


def _lift(p: int, x) -> PAdic:
    if isinstance(x, PAdic):
        return x
    if isinstance(x, (int, Fraction)):
        # exact constants: give them plenty of digits, precision comes from the other side
        return PAdic.from_rational(p, x, prec=64)
    return NotImplemented


def _normalize(p: int, val: int, num: int, abs_prec: int) -> PAdic:
    """Canonical form of ``p**val * num + O(p**abs_prec)``."""
    if val >= abs_prec or num % p ** (abs_prec - val) == 0:
        return PAdic.zero(p, abs_prec)
    while num % p == 0:
        num //= p
        val += 1
    prec = abs_prec - val
    return PAdic(p, val, num % p ** prec, prec)


def _same_prime(a: PAdic, b: PAdic) -> int:
    if a.p != b.p:
        raise ValueError(f"mixed primes {a.p} and {b.p}")
    return a.p


# ---------------------------------------------------------------------------
# arithmetic
# ---------------------------------------------------------------------------

def padd(a: PAdic, b: PAdic) -> PAdic:
    p = _same_prime(a, b)
    A = min(a.abs_prec, b.abs_prec)
    vmin = min(a.val, b.val)
    if vmin >= A:
        return PAdic.zero(p, A)
    num = a.unit * p ** (a.val - vmin) + b.unit * p ** (b.val - vmin)
    return _normalize(p, vmin, num, A)


def pneg(a: PAdic) -> PAdic:
    if a.is_zero:
        return a
    return PAdic(a.p, a.val, (-a.unit) % a.p ** a.prec, a.prec)


def psub(a: PAdic, b: PAdic) -> PAdic:
    return padd(a, pneg(b))


def pmul(a: PAdic, b: PAdic) -> PAdic:
    p = _same_prime(a, b)
    if a.is_zero and b.is_zero:
        return PAdic.zero(p, a.val + b.val)
    if a.is_zero:
        return PAdic.zero(p, a.val + b.val)
    if b.is_zero:
        return PAdic.zero(p, a.val + b.val)
    prec = min(a.prec, b.prec)
    return PAdic(p, a.val + b.val, a.unit * b.unit % p ** prec, prec)


def pdiv(a: PAdic, b: PAdic) -> PAdic:
    p = _same_prime(a, b)
    if b.is_zero:
        raise DivisionByZero(f"division by {b}")
    if a.is_zero:
        return PAdic.zero(p, a.val - b.val)
    prec = min(a.prec, b.prec)
    mod = p ** prec
    return PAdic(p, a.val - b.val, a.unit * pow(b.unit, -1, mod) % mod, prec)


def norm(a: PAdic) -> Fraction:
    """``|a|_p``; zero for a zero."""
    if a.is_zero:
        return Fraction(0)
    return Fraction(a.p) ** (-a.val)


# ---------------------------------------------------------------------------
# squares and the canonical square root
# ---------------------------------------------------------------------------

def is_square(a: PAdic) -> bool:
    if a.is_zero:
        return True
    if a.p == 2:
        if a.prec < 3:
            raise InsufficientPrecision("need three 2-adic digits to decide squareness")
        return a.val % 2 == 0 and a.unit % 8 == 1
    return a.val % 2 == 0 and pow(a.unit % a.p, (a.p - 1) // 2, a.p) == 1


def _prime_factors(n: int):
    out, f = [], 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def primitive_root(p: int) -> int:
    """Smallest generator of the multiplicative group mod an odd prime ``p``."""
    if p == 2:
        return 1
    factors = _prime_factors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in factors):
            return g
    raise AssertionError("unreachable")  # pragma: no cover


@dataclass(frozen=True)
class BranchTable:
    """Which of the two roots of a unit square is the canonical one.

    For odd ``p`` the canonical root has leading digit in
    ``{g**k mod p : 1 <= k <= (p-1)/2}``; for ``p = 2`` its unit part is
    ``1 mod 4``.
    """

    p: int
    primitive_root: Optional[int]
    branch_residues: FrozenSet[int]

    @property
    def rule(self) -> str:
        if self.p == 2:
            return "unit = 1 (mod 4)"
        return f"leading digit in {sorted(self.branch_residues)}"

    def selects(self, unit: int) -> bool:
        if self.p == 2:
            return unit % 4 == 1
        return unit % self.p in self.branch_residues

    def exponent_of(self, residue: int) -> int:
        """k in [1, p-1] with g**k == residue (mod p)."""
        g = self.primitive_root
        x = 1
        for k in range(1, self.p):
            x = x * g % self.p
            if x == residue % self.p:
                return k
        raise ValueError(f"{residue} is not a unit mod {self.p}")

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "primitive_root": self.primitive_root,
            "branch_residues": sorted(self.branch_residues),
            "rule": self.rule,
        }


def branch_table(p: int) -> BranchTable:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p == 2:
        return BranchTable(2, None, frozenset())
    g = primitive_root(p)
    residues = frozenset(pow(g, k, p) for k in range(1, (p - 1) // 2 + 1))
    return BranchTable(p, g, residues)


def _check_table(a: PAdic, table: Optional[BranchTable]) -> BranchTable:
    if table is None:
        return branch_table(a.p)
    if table.p != a.p:
        raise ValueError(f"branch table for p={table.p} used with p={a.p}")
    return table


def _sqrt_of_zero(a: PAdic) -> PAdic:
    # x in p^k Z_p  =>  sqrt(x) in p^ceil(k/2) Z_p
    return PAdic.zero(a.p, -(-a.val // 2))


def sqrt_hensel(a: PAdic, table: Optional[BranchTable] = None) -> PAdic:
    """Canonical square root by Hensel lifting.

    Odd ``p``: Newton steps ``t <- (t + c/t)/2`` from the branch-selected
    root mod p, doubling the precision each step.  ``p = 2``: bit-by-bit
    lift from ``t = 1`` (the derivative ``2t`` costs one digit, so the
    result has one relative digit fewer than the input).
    """
    table = _check_table(a, table)
    if a.is_zero:
        return _sqrt_of_zero(a)
    if not is_square(a):
        raise NotASquare(f"{a} is not a square in Q_{a.p}")
    p, c, N = a.p, a.unit, a.prec
    half_val = a.val // 2
    if p == 2:
        t = 1
        for i in range(3, N):
            if (t * t - c) % 2 ** (i + 1):
                t += 2 ** (i - 1)
        prec = N - 1
        t %= 2 ** prec
        if not table.selects(t):
            t = (-t) % 2 ** prec
        return PAdic(2, half_val, t, prec)
    r = c % p
    t = next(x for x in range(1, p) if x * x % p == r and table.selects(x))
    j = 1
    while j < N:
        j = min(2 * j, N)
        mod = p ** j
        t = (t + c * pow(t, -1, mod)) * pow(2, -1, mod) % mod
    return PAdic(p, half_val, t % p ** N, N)


def teichmuller(g: int, p: int, level: int) -> int:
    """Teichmuller lift of ``g`` modulo ``p**level``: iterate x <- x^p to a fixed point."""
    mod = p ** level
    x = g % mod
    while True:
        y = pow(x, p, mod)
        if y == x:
            return x
        x = y


def _half_binomial(n: int) -> Fraction:
    """binom(1/2, n); n >= 2 gives (-1)^(n-1) (2n-3)!! / (2n)!!."""
    out = Fraction(1)
    for i in range(n):
        out *= (Fraction(1, 2) - i) / (i + 1)
    return out


def sqrt_series(a: PAdic, table: Optional[BranchTable] = None) -> PAdic:
    """Canonical square root from the power series centred at eps^(2k).

    ``eps`` is the Teichmuller lift of the primitive root.  For a unit
    ``c`` in the ball around ``eps^(2k)`` (1 <= k <= (p-1)/2) the root is
    ``eps^k * sum_n binom(1/2, n) z^n`` with ``z = c eps^(-2k) - 1``.
    Terms stop once their valuation reaches the working precision; the
    coefficients are p-integral for odd ``p``.
    """
    table = _check_table(a, table)
    if a.p == 2:
        raise UnsupportedPrime("the series form is only provided for odd p")
    if a.is_zero:
        return _sqrt_of_zero(a)
    if not is_square(a):
        raise NotASquare(f"{a} is not a square in Q_{a.p}")
    p, c, N = a.p, a.unit, a.prec
    mod = p ** N
    # c mod p = g^(2k) with 2k in [2, p-1]
    k = table.exponent_of(c % p) // 2
    eps = teichmuller(table.primitive_root, p, N)
    centre = pow(eps, 2 * k, mod)
    z = (c * pow(centre, -1, mod) - 1) % mod
    zval = valuation(z, p) if z else N
    total = 0
    zn = 1
    n = 0
    while n * zval < N:
        coef = _half_binomial(n)
        total += coef.numerator * pow(coef.denominator, -1, mod) * zn
        zn = zn * z % mod
        n += 1
    root = pow(eps, k, mod) * total % mod
    return PAdic(p, a.val // 2, root, N)


def sqrt(a: PAdic, table: Optional[BranchTable] = None) -> PAdic:
    """The canonical square root (Hensel route)."""
    return sqrt_hensel(a, table)


# ---------------------------------------------------------------------------
# balls and residue models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    """``center + p**radius_exp * Z_p``."""

    center: PAdic
    radius_exp: int

    @property
    def p(self) -> int:
        return self.center.p

    def contains(self, y: PAdic) -> bool:
        d = psub(y, self.center)
        if d.is_zero:
            if d.val < self.radius_exp:
                raise PrecisionExhausted("membership undecidable at this precision")
            return True
        return d.val >= self.radius_exp

    def to_json(self) -> dict:
        return {"center": self.center.to_json(), "radius_exp": self.radius_exp}


@dataclass(frozen=True)
class BallRect:
    first: Ball
    second: Ball

    def contains(self, x: PAdic, y: PAdic) -> bool:
        return self.first.contains(x) and self.second.contains(y)

    def residues(self, level: int) -> FrozenSet[Tuple[int, int]]:
        xs = ball_residues(self.first, level)
        ys = ball_residues(self.second, level)
        return frozenset((x, y) for x in xs for y in ys)


def ball_residues(b: Ball, level: int) -> FrozenSet[int]:
    """Image of a ball inside ``Z_p`` in ``Z/p**level``."""
    k = b.radius_exp
    if k < 0 or not b.center.in_Zp():
        raise ScaleError(f"ball {b.center} + p^{k} Z_p is not inside Z_{b.p}")
    if k > level:
        raise PreconditionViolated("radius exponent exceeds the residue level")
    p = b.p
    base = b.center.residue(k)
    step = p ** k
    mod = p ** level
    return frozenset((base + step * t) % mod for t in range(p ** (level - k)))


def lemma4_check(x0: PAdic, y0: PAdic, k: int, level: int) -> bool:
    """Exhaustive residue check of T(ball pair) = product ball.

    Compares ``{(x+y, (x-y)^2)}`` over ``x0 + p^k Z_p`` and ``y0 + p^k Z_p``
    with ``(x0+y0, (x0-y0)^2) + p^k Z_p x p^(k+l) Z_p`` modulo ``p**level``,
    where ``l`` is the valuation of ``x0 - y0``.  Needs ``k >= l + 1`` for odd
    ``p``; for ``p = 2`` the analogue needs ``k >= l + 2`` and the second
    radius is ``k + l + 1``.
    """
    p = _same_prime(x0, y0)
    if not (x0.in_Zp() and y0.in_Zp()):
        raise ScaleError("lemma4_check works on Z_p centres")
    d = psub(x0, y0)
    if d.is_zero:
        raise PreconditionViolated("x0 and y0 must differ")
    l = d.val
    slack = 2 if p == 2 else 1
    if k < l + slack:
        raise PreconditionViolated(f"need k >= l + {slack} (k={k}, l={l})")
    d_radius = k + l + (1 if p == 2 else 0)
    if level < d_radius + 1:
        raise PreconditionViolated(f"need level >= {d_radius + 1}")
    mod = p ** level
    xs = ball_residues(Ball(x0, k), level)
    ys = ball_residues(Ball(y0, k), level)
    image = {((x + y) % mod, (x - y) * (x - y) % mod) for x in xs for y in ys}
    s0 = PAdic.from_residue(p, x0.residue(k) + y0.residue(k), k)
    diff = x0.residue(k) - y0.residue(k)
    d0 = PAdic.from_residue(p, diff * diff, d_radius)
    target = BallRect(Ball(s0, k), Ball(d0, d_radius)).residues(level)
    return image == target


def eq12_check(p: int, c: int, m: int, level: int) -> bool:
    """Is ``t -> 2ct + p^m t^2`` onto ``Z/p**level``?"""
    if c % p == 0:
        raise PreconditionViolated(f"{c} is not a unit mod {p}")
    mod = p ** level
    pm = p ** m
    return len({(2 * c * t + pm * t * t) % mod for t in range(mod)}) == mod


def s_maps(u: PAdic, v: PAdic, table: Optional[BranchTable] = None):
    """``S_1(u,v) = ((u+s)/2, (u-s)/2)`` and ``S_2`` with the roles swapped, ``s`` the canonical root of ``v``."""
    p = _same_prime(u, v)
    if p == 2:
        raise UnsupportedPrime("halving needs odd p")
    s = sqrt_hensel(v, table)
    half = PAdic.from_rational(p, Fraction(1, 2), prec=64)
    x = pmul(padd(u, s), half)
    y = pmul(psub(u, s), half)
    return (x, y), (y, x)


class ImageCheck(NamedTuple):
    disjoint: bool
    jacobian_ok: bool


def _root_residues(v0: PAdic, k: int, level: int, table: BranchTable):
    """(l, images level, {v residue: canonical root residue}) over v0 + p^(k+l) Z_p."""
    p = v0.p
    if v0.is_zero:
        raise PreconditionViolated("v0 must be nonzero")
    if not is_square(v0):
        raise PreconditionViolated(f"{v0} is not a square")
    if v0.val < 0:
        raise ScaleError("v0 must lie in Z_p")
    l = v0.val // 2
    if k < l + 1:
        raise PreconditionViolated(f"need k >= l + 1 (k={k}, l={l})")
    if level < k + l + 1:
        raise PreconditionViolated(f"need level >= k + l + 1 = {k + l + 1}")
    out_level = level - l
    roots = {}
    for v in sorted(ball_residues(Ball(v0, k + l), level)):
        s = sqrt_hensel(PAdic.from_residue(p, v, level), table)
        roots[v] = s.residue(out_level)
    return l, out_level, roots


def lemma5_check(u0: PAdic, v0: PAdic, k: int, level: int,
                 table: Optional[BranchTable] = None) -> ImageCheck:
    """Residue model of the two inverse branches of T on ``E_k``.

    ``disjoint``: the images of ``E_k`` under ``S_1`` and ``S_2`` share no
    residue pair.  ``jacobian_ok``: for both maps, the Haar mass of the image
    (residue count / p^(2M)) equals the mass of ``E_k`` times
    ``|s(v0)|_p^(-1)``.  Inputs at ``level`` resolve the images only to
    ``M = level - l`` digits, so images are compared there.
    """
    p = _same_prime(u0, v0)
    if p == 2:
        raise UnsupportedPrime("lemma5_check needs odd p")
    if not u0.in_Zp():
        raise ScaleError("u0 must lie in Z_p")
    table = _check_table(v0, table)
    l, M, roots = _root_residues(v0, k, level, table)
    us = sorted(ball_residues(Ball(u0, k), level))
    mod = p ** M
    inv2 = pow(2, -1, mod)
    img1, img2 = set(), set()
    for v, s in roots.items():
        for u in us:
            x = (u + s) * inv2 % mod
            y = (u - s) * inv2 % mod
            img1.add((x, y))
            img2.add((y, x))
    disjoint = img1.isdisjoint(img2)
    domain_mass = Fraction(len(us) * len(roots), p ** (2 * level))
    jacobian = 1 / norm(sqrt_hensel(v0, table))
    expected = domain_mass * jacobian
    jacobian_ok = all(Fraction(len(img), mod * mod) == expected for img in (img1, img2))
    return ImageCheck(disjoint, jacobian_ok)


def sqrt_lipschitz_check(v0: PAdic, k: int, level: int,
                         table: Optional[BranchTable] = None) -> bool:
    """``|s(v) - s(v0)|_p <= p^-k`` for every v in ``v0 + p^(k+l) Z_p`` at ``level``."""
    table = _check_table(v0, table)
    if v0.p == 2:
        raise UnsupportedPrime("needs odd p")
    _, M, roots = _root_residues(v0, k, level, table)
    s0 = sqrt_hensel(v0, table).residue(k)
    return all((s - s0) % v0.p ** k == 0 for s in roots.values())
