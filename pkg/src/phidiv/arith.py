"""Exact arithmetic substrate.

Valuations of integers, truncated integer Laurent series in q, polynomials
over F_p, and elements of totally ramified (Eisenstein) extensions of Q_p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import gmpy2
from gmpy2 import mpz
from sympy import isprime

INF = math.inf

# Below this many terms a schoolbook product beats packing into one integer.
_KRONECKER_CUTOFF = 24

Rational = Union[int, Fraction]


def _check_prime(p):
    if not isinstance(p, int) or p < 2 or not isprime(p):
        raise ValueError(f"{p!r} is not a prime")


def vp(n, p):
    """p-adic valuation of an integer (or rational); vp(0, p) is +inf."""
    _check_prime(p)
    if isinstance(n, Fraction):
        if n == 0:
            return INF
        return vp(n.numerator, p) - vp(n.denominator, p)
    if n == 0:
        return INF
    return int(gmpy2.remove(mpz(n), p)[1])


def _vp_fast(n, p):
    # no primality check; internal hot paths only
    if n == 0:
        return INF
    if isinstance(n, Fraction):
        return (int(gmpy2.remove(mpz(n.numerator), p)[1])
                - int(gmpy2.remove(mpz(n.denominator), p)[1]))
    return int(gmpy2.remove(mpz(n), p)[1])


# ---------------------------------------------------------------------------
# Integer Laurent series


def _schoolbook(a, b, n):
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x == 0:
            continue
        for k, y in enumerate(b[: n - i]):
            out[i + k] += x * y
    return out


def _kronecker(a, b, n):
    """First n coefficients of a*b via signed Kronecker substitution."""
    a = a[:n]
    b = b[:n]
    ma = max((abs(x) for x in a), default=0)
    mb = max((abs(x) for x in b), default=0)
    if ma == 0 or mb == 0:
        return [0] * n
    # two spare bits keep every partial sum of a slot strictly inside half range
    bits = int(ma).bit_length() + int(mb).bit_length() + min(len(a), len(b)).bit_length() + 2

    def pack(c, lo, hi):
        if hi - lo <= 16:
            r = mpz(0)
            for x in reversed(c[lo:hi]):
                r = (r << bits) + x
            return r
        mid = (lo + hi) // 2
        return pack(c, lo, mid) + (pack(c, mid, hi) << (bits * (mid - lo)))

    out = [0] * n

    def unpack(x, lo, hi):
        # x == sum_{lo <= k < hi} out[k] 2^(bits (k - lo)) with signed digits
        if hi - lo == 1:
            out[lo] = int(x)
            return
        mid = (lo + hi) // 2
        width = bits * (mid - lo)
        low = x & ((mpz(1) << width) - 1)
        if low >> (width - 1):
            low -= mpz(1) << width
        unpack(low, lo, mid)
        unpack((x - low) >> width, mid, hi)

    prod = pack(a, 0, len(a)) * pack(b, 0, len(b))
    width = bits * n
    prod &= (mpz(1) << width) - 1
    if prod >> (width - 1):
        prod -= mpz(1) << width
    unpack(prod, 0, n)
    return out


def _poly_mul_trunc(a, b, n):
    if n <= 0:
        return []
    if min(len(a), len(b), n) < _KRONECKER_CUTOFF:
        return _schoolbook(a, b, n)
    return _kronecker(a, b, n)


@dataclass(frozen=True)
class IntSeries:
    """sum(coeffs[k] q^(lead+k)), known for exponents < prec.

    coeffs is always dense up to prec: len(coeffs) == prec - lead.
    """

    lead: int
    coeffs: tuple
    prec: int

    def __post_init__(self):
        if len(self.coeffs) != self.prec - self.lead:
            raise ValueError("coeffs must cover exactly the range [lead, prec)")

    @classmethod
    def make(cls, lead, coeffs, prec=None):
        coeffs = [int(c) for c in coeffs]
        if prec is None:
            prec = lead + len(coeffs)
        n = prec - lead
        if n < 0:
            raise ValueError("prec below lead")
        coeffs = coeffs[:n] + [0] * (n - len(coeffs))
        return cls(lead, tuple(coeffs), prec)

    @classmethod
    def zero(cls, prec):
        return cls(prec, (), prec)

    def __getitem__(self, e):
        """Coefficient of q^e; raises if e is beyond the known range."""
        if e >= self.prec:
            raise IndexError(f"q^{e} is beyond precision {self.prec}")
        if e < self.lead:
            return 0
        return self.coeffs[e - self.lead]

    def valuation(self):
        """Exponent of the first nonzero term, or None if zero to precision."""
        for k, c in enumerate(self.coeffs):
            if c:
                return self.lead + k
        return None

    def is_zero(self):
        return not any(self.coeffs)

    def strip(self):
        """Drop leading zeros (raises lead, precision unchanged)."""
        v = self.valuation()
        if v is None:
            return IntSeries.zero(self.prec)
        return IntSeries(v, self.coeffs[v - self.lead:], self.prec)

    def truncate(self, prec):
        if prec >= self.prec:
            return self
        lead = min(self.lead, prec)
        return IntSeries(lead, self.coeffs[: prec - lead], prec)

    def _aligned(self, other):
        prec = min(self.prec, other.prec)
        lead = min(self.lead, other.lead, prec)
        return lead, prec

    def __add__(self, other):
        if isinstance(other, int):
            if self.prec <= 0:
                return self
            other = IntSeries.make(0, [other], self.prec)
        lead, prec = self._aligned(other)
        return IntSeries(lead, tuple(self[e] + other[e] for e in range(lead, prec)), prec)

    def __neg__(self):
        return IntSeries(self.lead, tuple(-c for c in self.coeffs), self.prec)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return IntSeries(self.lead, tuple(c * x for x in self.coeffs), self.prec)

    def shift(self, k):
        """Multiply by q^k."""
        return IntSeries(self.lead + k, self.coeffs, self.prec + k)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        return series_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 1:
            raise ValueError("only positive powers")
        result = None
        base = self.strip()
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def substitute_power(self, m):
        """q -> q^m for m >= 1."""
        if m < 1:
            raise ValueError("m must be positive")
        coeffs = [0] * ((self.prec - self.lead) * m)
        for k, c in enumerate(self.coeffs):
            coeffs[k * m] = c
        return IntSeries(self.lead * m, tuple(coeffs), self.prec * m)

    def dissect(self, m):
        """Keep terms q^(m*k) and map them to q^k."""
        lead = -((-self.lead) // m)
        prec = -((-self.prec) // m)
        return IntSeries(lead, tuple(self[m * k] for k in range(lead, prec)), prec)

    def __repr__(self):
        terms = [f"{c}*q^{self.lead + k}" for k, c in enumerate(self.coeffs[:6]) if c]
        return f"IntSeries({' + '.join(terms) or '0'} + O(q^{self.prec}))"


def series_mul(a: IntSeries, b: IntSeries) -> IntSeries:
    lead = a.lead + b.lead
    prec = min(a.prec + b.lead, b.prec + a.lead)
    coeffs = _poly_mul_trunc(list(a.coeffs), list(b.coeffs), prec - lead)
    return IntSeries(lead, tuple(coeffs), prec)


# ---------------------------------------------------------------------------
# Polynomials over F_p


@dataclass(frozen=True)
class FpPoly:
    p: int
    coeffs: tuple

    @classmethod
    def from_ints(cls, p, coeffs):
        c = [int(x) % p for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        return cls(p, tuple(c))

    def is_zero(self):
        return not self.coeffs

    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else -1

    def ord(self):
        """Index of the lowest nonzero coefficient (None for the zero poly)."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return None


# ---------------------------------------------------------------------------
# Eisenstein local rings


@dataclass(frozen=True)
class LocalRing:
    """Z_p[theta] with theta a root of the monic Eisenstein polynomial f.

    f is given low degree first and must be monic.
    """

    p: int
    f: tuple

    def __post_init__(self):
        _check_prime(self.p)
        f = tuple(int(c) for c in self.f)
        object.__setattr__(self, "f", f)
        if len(f) < 2 or f[-1] != 1:
            raise ValueError("f must be monic of degree >= 1")
        p = self.p
        if f[0] % p or f[0] % (p * p) == 0:
            raise ValueError("constant term of f must be exactly divisible by p")
        if any(c % p for c in f[1:-1]):
            raise ValueError("middle coefficients of f must be divisible by p")

    @property
    def e(self):
        return len(self.f) - 1

    @classmethod
    def trivial(cls, p):
        """Unramified Z_p, presented as Z_p[theta]/(theta - p)."""
        return cls(p, (-p, 1))

    def __call__(self, *coords):
        return LocalElement.of(self, coords)

    def one(self):
        return self(1)

    def zero(self):
        return self(0)

    def theta(self):
        if self.e == 1:
            return self(self.p)
        return self(0, 1)


@dataclass(frozen=True)
class LocalElement:
    ring: LocalRing
    coords: tuple

    @classmethod
    def of(cls, ring, coords):
        coords = [Fraction(c) for c in coords]
        if len(coords) > ring.e:
            raise ValueError("too many coordinates")
        coords += [Fraction(0)] * (ring.e - len(coords))
        return cls(ring, tuple(coords))

    def _coerce(self, other):
        if isinstance(other, LocalElement):
            if other.ring != self.ring:
                raise ValueError("elements of different local rings")
            return other
        if isinstance(other, (int, Fraction)):
            return LocalElement.of(self.ring, [other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return LocalElement(self.ring, tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return LocalElement(self.ring, tuple(-a for a in self.coords))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return LocalElement(self.ring, tuple(a * other for a in self.coords))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return local_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, c):
        if not isinstance(c, (int, Fraction)):
            return NotImplemented
        return LocalElement(self.ring, tuple(a / c for a in self.coords))

    def __pow__(self, k):
        result = self.ring.one()
        for _ in range(k):
            result = result * self
        return result

    def __bool__(self):
        return any(self.coords)

    def val(self):
        return local_val(self)

    def __repr__(self):
        parts = []
        for i, c in enumerate(self.coords):
            if c:
                parts.append(str(c) if i == 0 else f"{c}*t^{i}" if i > 1 else f"{c}*t")
        return "(" + (" + ".join(parts) or "0") + ")"


def local_val(x: LocalElement):
    """Valuation normalized so that v(theta) = 1 and v(p) = e."""
    e = x.ring.e
    p = x.ring.p
    best = INF
    for i, c in enumerate(x.coords):
        if c:
            best = min(best, e * _vp_fast(c, p) + i)
    return best


def local_mul(x: LocalElement, y: LocalElement) -> LocalElement:
    if x.ring != y.ring:
        raise ValueError("elements of different local rings")
    ring = x.ring
    e = ring.e
    prod = [Fraction(0)] * (2 * e - 1)
    for i, a in enumerate(x.coords):
        if a:
            for k, b in enumerate(y.coords):
                if b:
                    prod[i + k] += a * b
    f = ring.f
    # theta^e = -(f_0 + ... + f_{e-1} theta^{e-1})
    for d in range(2 * e - 2, e - 1, -1):
        c = prod[d]
        if c:
            prod[d] = Fraction(0)
            for i in range(e):
                prod[d - e + i] -= c * f[i]
    return LocalElement(ring, tuple(prod[:e]))
