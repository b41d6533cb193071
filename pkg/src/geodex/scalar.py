"""Exact real numbers of the form ``q0 + q1*sqrt(d1) + ... + qk*sqrt(dk)``.

Rotation numbers are either rational or quadratic irrationals.  Sums of them
taken across geodesics may mix several square roots, so the working type is a
rational linear combination of square roots of distinct square-free integers.
This set is a ring; it is closed under division as well (inverses are computed
by multiplying through by Galois conjugates), and the sign of any element is
decided exactly by a recursion on the primes involved.  Nothing here ever
touches floating point except :meth:`Surd.__float__`.
"""
from __future__ import annotations

import ast
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from numbers import Rational
from typing import Union

__all__ = [
    "Surd",
    "ExactScalar",
    "as_surd",
    "parse_scalar",
    "floor_mul",
    "ceil_mul",
    "varphi_mul",
    "frac",
    "squarefree_decompose",
]


@lru_cache(maxsize=4096)
def _prime_factors(n: int) -> tuple[int, ...]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return tuple(out)


@lru_cache(maxsize=4096)
def squarefree_decompose(n: int) -> tuple[int, int]:
    """Return ``(k, d)`` with ``n == k*k*d`` and ``d`` square-free."""
    if n <= 0:
        raise ValueError(f"expected a positive integer, got {n}")
    k, d = 1, 1
    m = n
    p = 2
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        k *= p ** (e // 2)
        if e % 2:
            d *= p
        p += 1 if p == 2 else 2
    d *= m
    return k, d


def _mul_roots(d1: int, d2: int) -> tuple[int, int]:
    # sqrt(d1)*sqrt(d2) = g*sqrt(d1*d2/g^2) for square-free d1, d2
    g = gcd(d1, d2)
    return g, (d1 // g) * (d2 // g)


class Surd:
    """Immutable element of the ring Q[sqrt(2), sqrt(3), sqrt(5), ...].

    Stored canonically as a mapping from square-free radicand (1 for the
    rational part) to a nonzero :class:`~fractions.Fraction`.
    """

    __slots__ = ("_t", "_hash", "_lin")

    def __init__(self, value: Union[int, Fraction, "Surd"] = 0):
        if isinstance(value, Surd):
            self._t = value._t
        else:
            v = Fraction(value)
            self._t = {1: v} if v else {}
        self._hash = None
        self._lin = None

    @classmethod
    def _from_terms(cls, terms: dict[int, Fraction]) -> "Surd":
        obj = cls.__new__(cls)
        obj._t = {d: c for d, c in terms.items() if c}
        obj._hash = None
        obj._lin = None
        return obj

    @classmethod
    def sqrt(cls, n: int) -> "Surd":
        """Exact square root of a non-negative integer."""
        if n == 0:
            return cls(0)
        k, d = squarefree_decompose(n)
        return cls._from_terms({d: Fraction(k)})

    @classmethod
    def quadratic(cls, a, b, d: int) -> "Surd":
        """``a + b*sqrt(d)`` for rationals ``a, b``."""
        return cls(a) + cls.sqrt(d) * Fraction(b)

    # -- structure -----------------------------------------------------
    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._t)

    @property
    def radicands(self) -> tuple[int, ...]:
        return tuple(sorted(d for d in self._t if d != 1))

    @property
    def rational_part(self) -> Fraction:
        return self._t.get(1, Fraction(0))

    def is_rational(self) -> bool:
        return all(d == 1 for d in self._t)

    def is_quadratic(self) -> bool:
        """True for ``a + b*sqrt(d)`` with ``b != 0`` and a single ``d``."""
        return len(self.radicands) == 1

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return self.rational_part

    def quadratic_parts(self) -> tuple[Fraction, Fraction, int]:
        """``(a, b, d)`` with ``self == a + b*sqrt(d)``."""
        rads = self.radicands
        if len(rads) != 1:
            raise ValueError(f"{self} is not a quadratic irrational")
        d = rads[0]
        return self.rational_part, self._t[d], d

    def primes(self) -> tuple[int, ...]:
        ps: set[int] = set()
        for d in self._t:
            if d != 1:
                ps.update(_prime_factors(d))
        return tuple(sorted(ps))

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        t = dict(self._t)
        for d, c in other._t.items():
            t[d] = t.get(d, 0) + c
        return Surd._from_terms(t)

    __radd__ = __add__

    def __neg__(self):
        return Surd._from_terms({d: -c for d, c in self._t.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        t: dict[int, Fraction] = {}
        for d1, c1 in self._t.items():
            for d2, c2 in other._t.items():
                k, d = _mul_roots(d1, d2)
                t[d] = t.get(d, 0) + c1 * c2 * k
        return Surd._from_terms(t)

    __rmul__ = __mul__

    def conjugate(self, p: int) -> "Surd":
        """Apply the automorphism sending sqrt(p) to -sqrt(p)."""
        return Surd._from_terms(
            {d: (-c if d % p == 0 else c) for d, c in self._t.items()}
        )

    def inverse(self) -> "Surd":
        if not self._t:
            raise ZeroDivisionError("inverse of zero")
        num = Surd(1)
        den = self
        for p in self.primes():
            c = den.conjugate(p)
            num = num * c
            den = den * c
        return num * (1 / den.to_fraction())

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other.is_rational():
            q = other.to_fraction()
            if q == 0:
                raise ZeroDivisionError("division by zero")
            return Surd._from_terms({d: c / q for d, c in self._t.items()})
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    # -- order -----------------------------------------------------------
    def sign(self) -> int:
        return _sign(self._t)

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return False
        return self._t == other._t

    def __hash__(self):
        if self._hash is None:
            if self.is_rational():
                self._hash = hash(self.rational_part)
            else:
                self._hash = hash(frozenset(self._t.items()))
        return self._hash

    def _cmp(self, other) -> int:
        other = _coerce(other)
        if other is NotImplemented:
            raise TypeError(f"cannot compare Surd with {type(other).__name__}")
        return (self - other).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return bool(self._t)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- integer parts ---------------------------------------------------
    def floor(self) -> int:
        if self.is_rational():
            q = self.rational_part
            return q.numerator // q.denominator
        if self.is_quadratic():
            return _floor_quadratic(*self.quadratic_parts())
        k = _floor_estimate(self._t)
        while (self - k).sign() < 0:
            k -= 1
        while (self - (k + 1)).sign() >= 0:
            k += 1
        return k

    def ceil(self) -> int:
        return -((-self).floor())

    def floor_times(self, m: int) -> int:
        """``[m*self]`` for an integer ``m``; cached integer form for speed."""
        lin = self._lin
        if lin is None:
            if self.is_rational():
                q = self.rational_part
                lin = (q.numerator, 0, 0, q.denominator)
            elif self.is_quadratic():
                a, b, d = self.quadratic_parts()
                D = a.denominator * b.denominator // gcd(a.denominator, b.denominator)
                lin = (a.numerator * (D // a.denominator), b.numerator * (D // b.denominator), d, D)
            else:
                D = 1
                for c in self._t.values():
                    D = D * c.denominator // gcd(D, c.denominator)
                lin = ("multi", tuple((d, c.numerator * (D // c.denominator)) for d, c in self._t.items()), D)
            self._lin = lin
        if lin[0] == "multi":
            return _floor_multi(lin[1], lin[2], m, self)
        A, B, d, D = lin
        if not B:
            return (m * A) // D
        mb = m * B
        r = isqrt(mb * mb * d)
        return (m * A + (r if mb >= 0 else -r - 1)) // D

    def ceil_times(self, m: int) -> int:
        """``E(m*self)``."""
        f = self.floor_times(m)
        lin = self._lin
        if lin[0] != "multi" and not lin[1]:
            # rational: m*self is an integer exactly when D divides m*A
            return f if (m * lin[0]) % lin[3] == 0 else f + 1
        return f + 1

    def __floor__(self):
        return self.floor()

    def __ceil__(self):
        return self.ceil()

    def frac(self) -> "Surd":
        return self - self.floor()

    def is_integer(self) -> bool:
        return self.is_rational() and self.rational_part.denominator == 1

    # -- conversion ------------------------------------------------------
    def __float__(self):
        return float(sum(float(c) * (d**0.5) for d, c in self._t.items()))

    def __repr__(self):
        return f"Surd('{self}')"

    def __str__(self):
        return format_scalar(self)


ExactScalar = Surd


def _coerce(x):
    if isinstance(x, Surd):
        return x
    if isinstance(x, (int, Fraction, Rational)):
        return Surd(Fraction(x))
    return NotImplemented


def as_surd(x) -> Surd:
    """Coerce an int, Fraction, string, or Surd to :class:`Surd`."""
    if isinstance(x, str):
        return parse_scalar(x)
    s = _coerce(x)
    if s is NotImplemented:
        raise TypeError(f"cannot interpret {x!r} as an exact scalar")
    return s


def _sign_rational(q: Fraction) -> int:
    return (q > 0) - (q < 0)


def _sign(t: dict[int, Fraction]) -> int:
    if not t:
        return 0
    if len(t) == 1:
        ((d, c),) = t.items()
        return _sign_rational(c)
    ps: set[int] = set()
    for d in t:
        if d != 1:
            ps.update(_prime_factors(d))
    if not ps:
        return _sign_rational(t.get(1, Fraction(0)))
    p = max(ps)
    # x = a + b*sqrt(p) with a, b free of p
    a = Surd._from_terms({d: c for d, c in t.items() if d % p})
    b = Surd._from_terms({d // p: c for d, c in t.items() if d % p == 0})
    sa, sb = a.sign(), b.sign()
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    return sa * (a * a - b * b * p).sign()


def _floor_quadratic(a: Fraction, b: Fraction, d: int) -> int:
    # floor((A + B*sqrt(d)) / D) = floor((A + floor(B*sqrt(d))) / D)
    D = a.denominator * b.denominator // gcd(a.denominator, b.denominator)
    A = a.numerator * (D // a.denominator)
    B = b.numerator * (D // b.denominator)
    r = isqrt(B * B * d)
    fb = r if B >= 0 else -r - 1  # B*B*d is never a perfect square here
    return (A + fb) // D


def _floor_estimate(t: dict[int, Fraction]) -> int:
    # a lower-bound-ish integer near the value, refined exactly by the caller
    bits = 64
    scale = 1 << bits
    acc = 0
    for d, c in t.items():
        root = isqrt(d * scale * scale)
        acc += Fraction(c) * root
    return int(acc // scale)


def _floor_multi(terms, D: int, m: int, x: "Surd") -> int:
    """``[m*x]`` for ``x = sum(A_d*sqrt(d))/D`` by certified integer intervals.

    ``isqrt(d << 2P)`` brackets ``sqrt(d)*2^P`` within one unit, so the value
    is enclosed in an integer interval; when both ends share a floor the
    answer is exact.  Precision doubles a few times before falling back to
    the exact sign recursion.
    """
    P = 2 * max(m.bit_length(), 1) + 64
    for _ in range(4):
        lo = hi = 0
        for d, A in terms:
            k = m * A
            if d == 1:
                lo += k << P
                hi += k << P
                continue
            r = isqrt(d << (2 * P))
            if k >= 0:
                lo += k * r
                hi += k * (r + 1)
            else:
                lo += k * (r + 1)
                hi += k * r
        scale = D << P
        f = lo // scale
        if hi // scale == f and hi % scale:
            return f
        P *= 2
    return (x * m).floor()


# -- integer parts of multiples ------------------------------------------

def floor_mul(rho, m: int) -> int:
    """``[m*rho]``, computed exactly."""
    return as_surd(rho).floor_times(m)


def ceil_mul(rho, m: int) -> int:
    """``E(m*rho)``, the least integer not below ``m*rho``."""
    return as_surd(rho).ceil_times(m)


def varphi_mul(rho, m: int) -> int:
    """0 if ``m*rho`` is an integer, else 1."""
    return 0 if (as_surd(rho) * m).is_integer() else 1


def frac(x) -> Surd:
    """Fractional part ``x - [x]``."""
    return as_surd(x).frac()


# -- text syntax -----------------------------------------------------------

def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_scalar(x: Surd) -> str:
    """Render in the model-file syntax, e.g. ``-1 + sqrt(2)`` or ``1/2*sqrt(3)``."""
    parts: list[tuple[int, str]] = []
    q0 = x.rational_part
    if q0 or not x.radicands:
        parts.append((_sign_rational(q0) or 1, _fmt_q(abs(q0))))
    for d in x.radicands:
        c = x.terms[d]
        mag = abs(c)
        body = f"sqrt({d})" if mag == 1 else f"{_fmt_q(mag)}*sqrt({d})"
        parts.append((_sign_rational(c), body))
    out = ("-" if parts[0][0] < 0 else "") + parts[0][1]
    for s, body in parts[1:]:
        out += (" - " if s < 0 else " + ") + body
    return out


_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div)


def parse_scalar(text: str) -> Surd:
    """Parse ``"p/q"``, ``"a/b + c/e*sqrt(d)"`` and similar arithmetic.

    Only integer literals, ``+ - * /``, parentheses and ``sqrt(<int>)`` are
    accepted.  Raises ``ValueError`` on anything else.
    """
    if not isinstance(text, str):
        raise ValueError(f"scalar must be a string, got {type(text).__name__}")
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"malformed scalar {text!r}") from exc

    def ev(node) -> Surd:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and type(node.value) is int:
            return Surd(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
            lhs, rhs = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return lhs + rhs
            if isinstance(node.op, ast.Sub):
                return lhs - rhs
            if isinstance(node.op, ast.Mult):
                return lhs * rhs
            if not rhs:
                raise ValueError(f"division by zero in {text!r}")
            return lhs / rhs
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id == "sqrt"
            and len(node.args) == 1
            and not node.keywords
        ):
            arg = ev(node.args[0])
            if not arg.is_integer() or arg.to_fraction() < 0:
                raise ValueError(f"sqrt needs a non-negative integer in {text!r}")
            return Surd.sqrt(int(arg.to_fraction()))
        raise ValueError(f"unsupported syntax in scalar {text!r}")

    return ev(tree)
