"""Exact carriers: prime fields, extension fields, Z/p^N and the rationals.

Elements are plain canonical values owned by a :class:`RingSpec`:

* ``PrimeField(p)`` and ``ModularRing(p, N)`` -- an ``int`` in ``[0, p)`` or ``[0, p^N)``;
* ``ExtensionField(p, n)`` -- the ``int`` ``sum(a_i * p**i)`` encoding the
  coefficient vector ``(a_0, ..., a_{n-1})`` of a polynomial in ``t``;
* ``RationalField`` -- a :class:`fractions.Fraction`.

Canonical encodings make elements usable as dict keys and make equality a
plain ``==``.  Ascending integer order is the enumeration order of every
finite carrier.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Optional, Sequence, Tuple, Union

from .errors import CharTwo, EmptySet, InfiniteCarrier, NotAUnit, SpecMismatch

Element = Union[int, Fraction]

PRIME = "fp"
EXTENSION = "fpn"
MODULAR = "zmod"
RATIONAL = "q"


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


# ---------------------------------------------------------------------------
# polynomials over F_p, coefficient tuples low degree first
# ---------------------------------------------------------------------------

def _poly_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a, b, p):
    """Remainder of a modulo b over F_p (b nonzero)."""
    a = _poly_trim(a)
    b = _poly_trim(b)
    inv_lead = pow(b[-1], -1, p)
    while len(a) >= len(b):
        coef = a[-1] * inv_lead % p
        shift = len(a) - len(b)
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - coef * bc) % p
        a = _poly_trim(a)
    return a


def _is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    n = len(poly) - 1
    for d in range(1, n // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            if not _poly_mod(poly, list(low) + [1], p):
                return False
    return True


def irreducible_modulus(p: int, n: int) -> Tuple[int, ...]:
    """Smallest monic irreducible polynomial of degree ``n`` over F_p.

    Candidates are scanned in the order of their integer encoding
    ``sum(a_i p^i)`` of the non-leading coefficients, so ``(3, 2)`` gives
    ``t^2 + 1`` and ``(5, 2)`` gives ``t^2 + 2``.  The returned tuple holds
    all ``n + 1`` coefficients, low degree first.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if n < 2:
        raise ValueError("degree must be at least 2")
    for code in range(p ** n):
        low = [(code // p ** i) % p for i in range(n)]
        poly = tuple(low) + (1,)
        if _is_irreducible(poly, p):
            return poly
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


@lru_cache(maxsize=None)
def _ext_mul(p: int, modulus: Tuple[int, ...], a: int, b: int) -> int:
    n = len(modulus) - 1
    ad = [(a // p ** i) % p for i in range(n)]
    bd = [(b // p ** i) % p for i in range(n)]
    prod = [0] * (2 * n - 1)
    for i, x in enumerate(ad):
        if x:
            for j, y in enumerate(bd):
                prod[i + j] = (prod[i + j] + x * y) % p
    # reduce with t^n = -(m_0 + ... + m_{n-1} t^{n-1})
    for deg in range(2 * n - 2, n - 1, -1):
        c = prod[deg]
        if c:
            prod[deg] = 0
            for i in range(n):
                prod[deg - n + i] = (prod[deg - n + i] - c * modulus[i]) % p
    return sum(prod[i] * p ** i for i in range(n))


# ---------------------------------------------------------------------------
# carriers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RingSpec:
    """An exact carrier.  Build with the classmethods, not the constructor."""

    kind: str
    p: int = 0
    n: int = 1
    N: int = 1
    modulus: Tuple[int, ...] = field(default=(), compare=True)

    @classmethod
    def prime_field(cls, p: int) -> "RingSpec":
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        return cls(PRIME, p=p)

    @classmethod
    def extension_field(cls, p: int, n: int, modulus: Optional[Sequence[int]] = None) -> "RingSpec":
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if n < 2:
            raise ValueError("extension degree must be at least 2")
        if modulus is None:
            modulus = irreducible_modulus(p, n)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != n + 1 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree n")
        if not _is_irreducible(modulus, p):
            raise ValueError(f"modulus {modulus} is reducible over F_{p}")
        return cls(EXTENSION, p=p, n=n, modulus=modulus)

    @classmethod
    def modular_ring(cls, p: int, N: int) -> "RingSpec":
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if N < 1:
            raise ValueError("level N must be at least 1")
        return cls(MODULAR, p=p, N=N)

    @classmethod
    def rationals(cls) -> "RingSpec":
        return cls(RATIONAL)

    @classmethod
    def parse(cls, text: str) -> "RingSpec":
        """Parse ``fp:p``, ``fpn:p,n``, ``zmod:p,N`` or ``q``."""
        text = text.strip().lower()
        if text in ("q", "rationals"):
            return cls.rationals()
        kind, _, args = text.partition(":")
        try:
            nums = [int(x) for x in args.split(",")] if args else []
        except ValueError as exc:
            raise ValueError(f"bad carrier {text!r}") from exc
        if kind == PRIME and len(nums) == 1:
            return cls.prime_field(nums[0])
        if kind == EXTENSION and len(nums) == 2:
            return cls.extension_field(*nums)
        if kind == MODULAR and len(nums) == 2:
            return cls.modular_ring(*nums)
        raise ValueError(f"bad carrier {text!r}")

    # -- basic facts --------------------------------------------------------

    def __str__(self) -> str:
        if self.kind == PRIME:
            return f"fp:{self.p}"
        if self.kind == EXTENSION:
            return f"fpn:{self.p},{self.n}"
        if self.kind == MODULAR:
            return f"zmod:{self.p},{self.N}"
        return "q"

    @property
    def is_finite(self) -> bool:
        return self.kind != RATIONAL

    @property
    def is_field(self) -> bool:
        return self.kind != MODULAR or self.N == 1

    @cached_property
    def order(self) -> int:
        if self.kind == PRIME:
            return self.p
        if self.kind == EXTENSION:
            return self.p ** self.n
        if self.kind == MODULAR:
            return self.p ** self.N
        raise InfiniteCarrier("the rationals are infinite")

    def characteristic(self) -> int:
        # Z/p^N reports p: it is the residue-level stand-in for Z_p
        if self.kind == RATIONAL:
            return 0
        return self.p

    @property
    def zero(self) -> Element:
        return Fraction(0) if self.kind == RATIONAL else 0

    @property
    def one(self) -> Element:
        return Fraction(1) if self.kind == RATIONAL else 1

    def contains(self, a) -> bool:
        if self.kind == RATIONAL:
            return isinstance(a, (int, Fraction)) and not isinstance(a, bool)
        return isinstance(a, int) and not isinstance(a, bool) and 0 <= a < self.order

    def coerce(self, a) -> Element:
        """Canonical form of an encoding, an integer, a Fraction or element text.

        Integers are encodings; in an extension field they must already lie
        in ``[0, p^n)`` (use :meth:`scalar` for the image of an integer).
        """
        if isinstance(a, str):
            return self.parse_element(a)
        if self.kind == RATIONAL:
            return Fraction(a)
        if isinstance(a, Fraction):
            if a.denominator != 1:
                return self.mul(self.scalar(a.numerator), self.inv(self.scalar(a.denominator)))
            a = a.numerator
        if self.kind == EXTENSION:
            if not 0 <= a < self.order:
                raise SpecMismatch(f"{a} is not an encoding of an element of {self}")
            return a
        return a % self.order

    def check(self, *elems) -> None:
        for a in elems:
            if not self.contains(a):
                raise SpecMismatch(f"{a!r} is not a canonical element of {self}")

    # -- arithmetic ---------------------------------------------------------

    def add(self, a: Element, b: Element) -> Element:
        if self.kind == RATIONAL:
            return a + b
        if self.kind == EXTENSION:
            p = self.p
            out, scale = 0, 1
            for _ in range(self.n):
                out += ((a % p + b % p) % p) * scale
                a //= p
                b //= p
                scale *= p
            return out
        return (a + b) % self.order

    def neg(self, a: Element) -> Element:
        if self.kind == RATIONAL:
            return -a
        if self.kind == EXTENSION:
            p = self.p
            out, scale = 0, 1
            for _ in range(self.n):
                out += ((-(a % p)) % p) * scale
                a //= p
                scale *= p
            return out
        return (-a) % self.order

    def sub(self, a: Element, b: Element) -> Element:
        if self.kind == RATIONAL:
            return a - b
        if self.kind == EXTENSION:
            return self.add(a, self.neg(b))
        return (a - b) % self.order

    def mul(self, a: Element, b: Element) -> Element:
        if self.kind == RATIONAL:
            return a * b
        if self.kind == EXTENSION:
            return _ext_mul(self.p, self.modulus, a, b)
        return a * b % self.order

    def square(self, a: Element) -> Element:
        return self.mul(a, a)

    def inv(self, a: Element) -> Element:
        if self.kind == RATIONAL:
            if a == 0:
                raise NotAUnit("0 has no inverse")
            return 1 / Fraction(a)
        if a == 0:
            raise NotAUnit("0 has no inverse")
        if self.kind == EXTENSION:
            return self.pow(a, self.order - 2)
        if a % self.p == 0:
            raise NotAUnit(f"{a} is not a unit of {self}")
        return pow(a, -1, self.order)

    def pow(self, a: Element, e: int) -> Element:
        if e < 0:
            return self.pow(self.inv(a), -e)
        result = self.one
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def halve(self, a: Element) -> Element:
        """The unique ``y`` with ``y + y == a``."""
        if self.kind == RATIONAL:
            return a / 2
        if self.p == 2:
            raise CharTwo(f"no unique halving in {self}")
        if self.kind == EXTENSION:
            # scale every coefficient by 1/2 in F_p
            return self.mul(a, (self.p + 1) // 2)
        return a * pow(2, -1, self.order) % self.order

    def scalar(self, k: int) -> Element:
        """Image of the integer ``k`` in the carrier."""
        if self.kind == EXTENSION:
            return k % self.p
        return self.coerce(k)

    # -- finite structure ---------------------------------------------------

    def elements(self) -> range:
        """All elements in enumeration order."""
        if not self.is_finite:
            raise InfiniteCarrier("the rationals cannot be enumerated")
        return range(self.order)

    def coeffs(self, a: int) -> Tuple[int, ...]:
        """Coefficient vector of an extension-field element, low degree first."""
        return tuple((a // self.p ** i) % self.p for i in range(self.n))

    def from_coeffs(self, coeffs: Sequence[int]) -> int:
        if len(coeffs) > self.n:
            raise ValueError("too many coefficients")
        return sum((c % self.p) * self.p ** i for i, c in enumerate(coeffs))

    # -- text ---------------------------------------------------------------

    def format_element(self, a: Element) -> str:
        if self.kind == RATIONAL:
            a = Fraction(a)
            return f"{a.numerator}/{a.denominator}"
        return str(a)

    def parse_element(self, text: str) -> Element:
        text = text.strip().replace(" ", "")
        if self.kind == RATIONAL:
            return Fraction(text)
        if self.kind == EXTENSION and "t" in text:
            return self._parse_poly(text)
        if re.fullmatch(r"[+-]?\d+/\d+", text):
            return self.coerce(Fraction(text))
        value = int(text)
        if self.kind == EXTENSION:
            if not 0 <= value < self.order:
                raise ValueError(f"{text!r} out of range for {self}")
            return value
        return value % self.order

    def _parse_poly(self, text: str) -> int:
        coeffs = [0] * self.n
        for term in re.findall(r"[+-]?[^+-]+", text):
            sign = -1 if term.startswith("-") else 1
            term = term.lstrip("+-")
            m = re.fullmatch(r"(?:(\d+)\*?)?t(?:\^(\d+))?|(\d+)", term)
            if not m:
                raise ValueError(f"bad polynomial term {term!r}")
            if m.group(3) is not None:
                deg, c = 0, int(m.group(3))
            else:
                c = int(m.group(1)) if m.group(1) else 1
                deg = int(m.group(2)) if m.group(2) else 1
            if deg >= self.n:
                raise ValueError(f"degree {deg} too large for {self}")
            coeffs[deg] = (coeffs[deg] + sign * c) % self.p
        return self.from_coeffs(coeffs)


# ---------------------------------------------------------------------------
# additive subgroups
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubgroupSpec:
    ambient: RingSpec
    generators: Tuple[Element, ...]
    elements: frozenset

    @property
    def cardinality(self) -> int:
        return len(self.elements)

    def __contains__(self, x) -> bool:
        return x in self.elements

    def sorted_elements(self) -> list:
        return sorted(self.elements)


def characteristic(ring: RingSpec) -> int:
    return ring.characteristic()


def enumerate_carrier(ring: RingSpec) -> range:
    return ring.elements()


def additive_closure(ring: RingSpec, generators: Iterable[Element]) -> SubgroupSpec:
    """Smallest additive subgroup containing ``generators``."""
    if not ring.is_finite:
        raise InfiniteCarrier("closure needs a finite carrier")
    gens = tuple(generators)
    ring.check(*gens)
    elems = {ring.zero}
    frontier = [ring.zero]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = ring.add(x, g)
                if y not in elems:
                    elems.add(y)
                    nxt.append(y)
        frontier = nxt
    # in a finite group, closure under + already gives negatives
    return SubgroupSpec(ring, gens, frozenset(elems))


def _closed_under_addition(ring: RingSpec, s: frozenset) -> bool:
    return all(ring.add(a, b) in s for a in s for b in s)


def coset_test(ring: RingSpec, s: Iterable[Element]) -> Optional[Tuple[SubgroupSpec, Element]]:
    """Return ``(K, x)`` with ``s == x + K`` when ``s`` is a coset, else ``None``.

    ``x`` is the first element of ``s`` in enumeration order.
    """
    if not ring.is_finite:
        raise InfiniteCarrier("coset_test needs a finite carrier")
    s = frozenset(s)
    if not s:
        raise EmptySet("coset_test of the empty set")
    ring.check(*s)
    x = min(s)
    k = frozenset(ring.sub(y, x) for y in s)
    if not _closed_under_addition(ring, k):
        return None
    return SubgroupSpec(ring, tuple(sorted(k)), k), x


def squares_of_set(ring: RingSpec, a: Iterable[Element]) -> frozenset:
    return frozenset(ring.square(t) for t in a)


def all_subgroups(ring: RingSpec) -> list:
    """Every additive subgroup of a finite carrier, sorted by (size, elements)."""
    if not ring.is_finite:
        raise InfiniteCarrier("subgroup lattice needs a finite carrier")
    found = {frozenset([ring.zero]): additive_closure(ring, [])}
    frontier = list(found.values())
    while frontier:
        nxt = []
        for k in frontier:
            for x in ring.elements():
                if x in k.elements:
                    continue
                bigger = additive_closure(ring, tuple(k.generators) + (x,))
                if bigger.elements not in found:
                    found[bigger.elements] = bigger
                    nxt.append(bigger)
        frontier = nxt
    return sorted(found.values(), key=lambda k: (k.cardinality, sorted(k.elements)))


def iter_nonempty_subsets(ring: RingSpec) -> Iterator[frozenset]:
    elems = list(ring.elements())
    for r in range(1, len(elems) + 1):
        for combo in itertools.combinations(elems, r):
            yield frozenset(combo)
