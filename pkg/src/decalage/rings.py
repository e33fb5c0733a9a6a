"""Exact coefficient rings with a distinguished prime element.

Three principal ideal domains are supported, each with a chosen prime ``xi``
and exact arithmetic throughout:

* the integers with ``xi`` a prime number,
* ``F_p[t]`` with ``xi = t`` (p prime, p <= 2**16),
* ``Q[t]`` with ``xi = t`` (Fraction coefficients).

Their residue fields ``k = R/(xi)`` are exposed through the same element
protocol (a field is the degenerate case where every nonzero element is a
unit), so matrix and complex code runs unchanged over either.

Element encodings are plain immutable Python values: ``int`` for integers and
prime fields, ``Fraction`` for rationals, and ascending coefficient tuples
(no trailing zeros, ``()`` is zero) for polynomials.
"""

from __future__ import annotations

import math
from fractions import Fraction

INF = math.inf


class RingElementError(ValueError):
    """Raised when a string does not parse as a ring element."""


def _is_prime(n: int) -> bool:
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


class BaseRing:
    """Shared protocol for exact commutative domains.

    Subclasses fix the element encoding and implement arithmetic; everything
    downstream (matrices, complexes) only goes through these methods.
    """

    kind = "?"
    is_field = False

    # -- arithmetic -------------------------------------------------------

    def zero(self):
        raise NotImplementedError

    def one(self):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def is_zero(self, a) -> bool:
        return a == self.zero()

    def is_unit(self, a) -> bool:
        raise NotImplementedError

    def divrem(self, a, b):
        """Euclidean division: a = q*b + r with size(r) < size(b)."""
        raise NotImplementedError

    def size(self, a) -> int:
        """Euclidean valuation used for pivot selection; 0 only for a = 0."""
        raise NotImplementedError

    def unit_normalize(self, a):
        """Return (u, n) with a = u*n, u a unit, n the normal form.

        Normal forms: nonnegative integers, monic polynomials, field elements
        normalize to one.  unit_normalize(0) = (1, 0).
        """
        raise NotImplementedError

    def exact_div(self, a, b):
        q, r = self.divrem(a, b)
        if not self.is_zero(r):
            raise ArithmeticError(f"{self.format(b)} does not divide {self.format(a)}")
        return q

    def divides(self, a, b) -> bool:
        """True when a | b."""
        if self.is_zero(a):
            return self.is_zero(b)
        _, r = self.divrem(b, a)
        return self.is_zero(r)

    def sum(self, items):
        acc = self.zero()
        for x in items:
            acc = self.add(acc, x)
        return acc

    def pow(self, a, e: int):
        acc = self.one()
        for _ in range(e):
            acc = self.mul(acc, a)
        return acc

    def inv_unit(self, a):
        """Inverse of a unit."""
        raise NotImplementedError

    # -- xi layer ---------------------------------------------------------

    @property
    def xi(self):
        raise NotImplementedError

    def xi_valuation(self, a):
        """Largest e with xi**e | a; math.inf for a = 0."""
        raise NotImplementedError

    def xi_power(self, e: int):
        return self.pow(self.xi, e)

    def xi_divide(self, a, e: int):
        """Exact division by xi**e."""
        for _ in range(e):
            a = self.exact_div(a, self.xi)
        return a

    def residue_field(self) -> "BaseRing":
        raise NotImplementedError

    def residue(self, a):
        """Image of a in k = R/(xi)."""
        raise NotImplementedError

    def lift(self, c):
        """Canonical lift k -> R of a residue element."""
        raise NotImplementedError

    # -- strings ----------------------------------------------------------

    def format(self, a) -> str:
        raise NotImplementedError

    def parse(self, s: str):
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"<ring {self.kind}>"


# ---------------------------------------------------------------------------
# fields


class PrimeField(BaseRing):
    """F_p, elements stored as ints in [0, p)."""

    kind = "prime-field"
    is_field = True

    def __init__(self, p: int):
        if not _is_prime(p) or p > 2 ** 16:
            raise ValueError(f"field characteristic must be a prime <= 2**16, got {p}")
        self.p = p

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("Fp", self.p))

    def zero(self):
        return 0

    def one(self):
        return 1

    def add(self, a, b):
        return (a + b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def is_unit(self, a):
        return a % self.p != 0

    def inv_unit(self, a):
        return pow(a, -1, self.p)

    def divrem(self, a, b):
        return self.mul(a, self.inv_unit(b)), 0

    def size(self, a):
        return 0 if a % self.p == 0 else 1

    def unit_normalize(self, a):
        if a % self.p == 0:
            return 1, 0
        return a % self.p, 1

    def format(self, a):
        return str(a % self.p)

    def parse(self, s):
        try:
            return int(s.strip()) % self.p
        except ValueError as exc:
            raise RingElementError(f"bad F_{self.p} element: {s!r}") from exc

    def describe(self):
        return {"kind": self.kind, "p": self.p}

    def __repr__(self):
        return f"<F_{self.p}>"


class RationalField(BaseRing):
    """Q, elements stored as Fraction."""

    kind = "rationals"
    is_field = True

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("Q")

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def is_unit(self, a):
        return a != 0

    def inv_unit(self, a):
        return 1 / a

    def divrem(self, a, b):
        return a / b, Fraction(0)

    def size(self, a):
        return 0 if a == 0 else 1

    def unit_normalize(self, a):
        if a == 0:
            return Fraction(1), Fraction(0)
        return a, Fraction(1)

    def format(self, a):
        return str(a)

    def parse(self, s):
        try:
            return Fraction(s.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise RingElementError(f"bad rational: {s!r}") from exc

    def describe(self):
        return {"kind": self.kind}

    def __repr__(self):
        return "<Q>"


# ---------------------------------------------------------------------------
# the integers


class IntegerRing(BaseRing):
    """Z with a distinguished prime xi = p."""

    kind = "z"

    def __init__(self, xi: int):
        if not _is_prime(xi):
            raise ValueError(f"xi must be a prime integer, got {xi}")
        self._xi = xi
        self._k = PrimeField(xi)

    def __eq__(self, other):
        return isinstance(other, IntegerRing) and other._xi == self._xi

    def __hash__(self):
        return hash(("Z", self._xi))

    def zero(self):
        return 0

    def one(self):
        return 1

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def is_unit(self, a):
        return a in (1, -1)

    def inv_unit(self, a):
        if a not in (1, -1):
            raise ArithmeticError(f"{a} is not a unit of Z")
        return a

    def divrem(self, a, b):
        # Symmetric remainder keeps entries small during elimination.
        # Python's divmod gives r with the sign of b and |r| < |b|; when the
        # remainder is over half, r - b is the smaller representative for
        # either sign of b.
        q, r = divmod(a, b)
        if 2 * abs(r) > abs(b):
            q += 1
            r -= b
        return q, r

    def size(self, a):
        return abs(a)

    def unit_normalize(self, a):
        if a < 0:
            return -1, -a
        return 1, a

    @property
    def xi(self):
        return self._xi

    def xi_valuation(self, a):
        if a == 0:
            return INF
        e = 0
        while a % self._xi == 0:
            a //= self._xi
            e += 1
        return e

    def residue_field(self):
        return self._k

    def residue(self, a):
        return a % self._xi

    def lift(self, c):
        return int(c % self._xi)

    def format(self, a):
        return str(a)

    def parse(self, s):
        try:
            return int(s.strip())
        except ValueError as exc:
            raise RingElementError(f"bad integer: {s!r}") from exc

    def describe(self):
        return {"kind": self.kind, "xi": str(self._xi)}

    def __repr__(self):
        return f"<Z, xi={self._xi}>"


# ---------------------------------------------------------------------------
# univariate polynomials over a field, xi = t


class PolynomialRing(BaseRing):
    """F[t] for F a prime field or Q, with xi = t.

    Elements are tuples of base-field coefficients in ascending powers with
    no trailing zeros; () is zero.
    """

    def __init__(self, base: BaseRing):
        if not base.is_field:
            raise ValueError("polynomial coefficients must come from a field")
        self.base = base
        self.kind = "fp-poly" if isinstance(base, PrimeField) else "q-poly"

    def __eq__(self, other):
        return isinstance(other, PolynomialRing) and other.base == self.base

    def __hash__(self):
        return hash(("poly", self.base))

    def _trim(self, coeffs):
        n = len(coeffs)
        while n > 0 and self.base.is_zero(coeffs[n - 1]):
            n -= 1
        return tuple(coeffs[:n])

    def from_coeffs(self, coeffs) -> tuple:
        return self._trim([self.base.parse(c) if isinstance(c, str) else c for c in coeffs])

    def zero(self):
        return ()

    def one(self):
        return (self.base.one(),)

    def constant(self, c):
        return self._trim([c])

    def add(self, a, b):
        n = max(len(a), len(b))
        z = self.base.zero()
        out = [
            self.base.add(a[i] if i < len(a) else z, b[i] if i < len(b) else z)
            for i in range(n)
        ]
        return self._trim(out)

    def neg(self, a):
        return tuple(self.base.neg(c) for c in a)

    def mul(self, a, b):
        if not a or not b:
            return ()
        z = self.base.zero()
        out = [z] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if self.base.is_zero(ca):
                continue
            for j, cb in enumerate(b):
                out[i + j] = self.base.add(out[i + j], self.base.mul(ca, cb))
        return self._trim(out)

    def is_zero(self, a):
        return len(a) == 0

    def is_unit(self, a):
        return len(a) == 1

    def inv_unit(self, a):
        if len(a) != 1:
            raise ArithmeticError("not a unit polynomial")
        return (self.base.inv_unit(a[0]),)

    def divrem(self, a, b):
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(a)
        q = [self.base.zero()] * max(len(a) - len(b) + 1, 1)
        inv_lead = self.base.inv_unit(b[-1])
        while len(r) >= len(b):
            if self.base.is_zero(r[-1]):
                r.pop()
                continue
            c = self.base.mul(r[-1], inv_lead)
            d = len(r) - len(b)
            q[d] = c
            for i, cb in enumerate(b):
                r[d + i] = self.base.sub(r[d + i], self.base.mul(c, cb))
            r.pop()
        return self._trim(q), self._trim(r)

    def size(self, a):
        return len(a)

    def unit_normalize(self, a):
        if not a:
            return self.one(), ()
        lead = a[-1]
        inv = self.base.inv_unit(lead)
        return (lead,), tuple(self.base.mul(inv, c) for c in a)

    @property
    def xi(self):
        return (self.base.zero(), self.base.one())

    def xi_valuation(self, a):
        if not a:
            return INF
        for i, c in enumerate(a):
            if not self.base.is_zero(c):
                return i
        return INF

    def xi_divide(self, a, e: int):
        if not a:
            return ()
        if self.xi_valuation(a) < e:
            raise ArithmeticError("not divisible by t**e")
        return tuple(a[e:])

    def residue_field(self):
        return self.base

    def residue(self, a):
        return a[0] if a else self.base.zero()

    def lift(self, c):
        return self._trim([c])

    def format(self, a):
        if not a:
            return "0"
        parts = []
        for e in range(len(a) - 1, -1, -1):
            c = a[e]
            if self.base.is_zero(c):
                continue
            cs = self.base.format(c)
            if e == 0:
                term = cs
            elif cs == "1":
                term = "t" if e == 1 else f"t^{e}"
            elif cs == "-1":
                term = "-t" if e == 1 else f"-t^{e}"
            else:
                term = f"{cs}*t" if e == 1 else f"{cs}*t^{e}"
            parts.append(term)
        out = parts[0]
        for term in parts[1:]:
            out += term if term.startswith("-") else "+" + term
        return out

    def parse(self, s):
        text = s.strip().replace(" ", "")
        if not text:
            raise RingElementError("empty polynomial")
        if text == "0":
            return ()
        # split into signed terms
        terms = []
        buf = ""
        for i, ch in enumerate(text):
            if ch in "+-" and i > 0 and text[i - 1] not in "+-*^/":
                terms.append(buf)
                buf = ch if ch == "-" else ""
            else:
                buf += ch
        terms.append(buf)
        coeffs: dict[int, object] = {}
        for term in terms:
            if not term or term in "+-":
                raise RingElementError(f"bad polynomial: {s!r}")
            if "t" in term:
                head, _, tail = term.partition("t")
                if head.endswith("*"):
                    head = head[:-1]
                    if not head or head.endswith("*"):
                        raise RingElementError(f"bad term {term!r}")
                    c = self.base.parse(head)
                elif head in ("", "+"):
                    c = self.base.one()
                elif head == "-":
                    c = self.base.neg(self.base.one())
                else:
                    raise RingElementError(f"bad term {term!r}")
                if tail == "":
                    e = 1
                elif tail.startswith("^"):
                    try:
                        e = int(tail[1:])
                    except ValueError as exc:
                        raise RingElementError(f"bad exponent in {term!r}") from exc
                else:
                    raise RingElementError(f"bad term {term!r}")
                if e < 0:
                    raise RingElementError(f"negative exponent in {term!r}")
            else:
                c = self.base.parse(term)
                e = 0
            prev = coeffs.get(e, self.base.zero())
            coeffs[e] = self.base.add(prev, c)
        out = [self.base.zero()] * (max(coeffs) + 1)
        for e, c in coeffs.items():
            out[e] = c
        return self._trim(out)

    def describe(self):
        d = {"kind": self.kind, "xi": "t"}
        if self.kind == "fp-poly":
            d["p"] = self.base.p
        return d

    def __repr__(self):
        name = f"F_{self.base.p}" if self.kind == "fp-poly" else "Q"
        return f"<{name}[t], xi=t>"


# ---------------------------------------------------------------------------


def ring_from_description(desc: dict) -> BaseRing:
    kind = desc.get("kind")
    if kind == "z":
        return IntegerRing(int(desc["xi"]))
    if kind == "fp-poly":
        return PolynomialRing(PrimeField(int(desc["p"])))
    if kind == "q-poly":
        return PolynomialRing(RationalField())
    if kind == "prime-field":
        return PrimeField(int(desc["p"]))
    if kind == "rationals":
        return RationalField()
    raise RingElementError(f"unknown ring kind: {kind!r}")


def make_ring(name: str, xi: str | None = None, char: int = 5) -> BaseRing:
    """CLI-facing constructor: name in {z, fp-poly, q-poly}.

    For the polynomial rings xi is always t; ``char`` picks the prime field.
    """
    if name == "z":
        return IntegerRing(int(xi if xi is not None else 2))
    if name == "fp-poly":
        if xi not in (None, "t"):
            raise RingElementError("xi must be t for polynomial rings")
        return PolynomialRing(PrimeField(char))
    if name == "q-poly":
        if xi not in (None, "t"):
            raise RingElementError("xi must be t for polynomial rings")
        return PolynomialRing(RationalField())
    raise RingElementError(f"unknown ring name: {name!r}")
