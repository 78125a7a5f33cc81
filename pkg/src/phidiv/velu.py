"""Symbolic Velu data t, w and the polynomial g over an Eisenstein local ring.

g is a polynomial in (x0, x1, x2, x3, y0); its minimal coefficient valuation
n_v bounds v(j(E') - j(E)) from below for every cyclic N-isogeny E -> E'.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import NamedTuple

from .arith import INF, LocalElement, LocalRing, local_val

log = logging.getLogger(__name__)

VARS = ("x0", "x1", "x2", "x3", "y0")


class BadReductionError(ValueError):
    def __init__(self, valuation):
        super().__init__(f"v(Delta) = {valuation}, curve does not have good reduction")
        self.valuation = valuation


class VeluIdentityError(ArithmeticError):
    pass


class MultiPoly:
    """Polynomial in x0, x1, x2, x3, y0 with LocalElement coefficients."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring, terms=None):
        self.ring = ring
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def const(cls, ring, c):
        c = c if isinstance(c, LocalElement) else LocalElement.of(ring, [c])
        return cls(ring, {(0,) * 5: c})

    @classmethod
    def var(cls, ring, name):
        m = [0] * 5
        m[VARS.index(name)] = 1
        return cls(ring, {tuple(m): ring.one()})

    def _lift(self, other):
        if isinstance(other, MultiPoly):
            return other
        return MultiPoly.const(self.ring, other)

    def __add__(self, other):
        other = self._lift(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms[m] + c if m in terms else c
        return MultiPoly(self.ring, terms)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, LocalElement)):
            return MultiPoly(self.ring, {m: c * other for m, c in self.terms.items()})
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                c = c1 * c2
                terms[m] = terms[m] + c if m in terms else c
        return MultiPoly(self.ring, terms)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return MultiPoly(self.ring, {m: v / c for m, v in self.terms.items()})

    def __pow__(self, k):
        out = MultiPoly.const(self.ring, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return (self - other).terms == {}

    def degree(self):
        return max((sum(m) for m in self.terms), default=-1)

    def evaluate(self, point):
        """Substitute LocalElements (or integers) for (x0, x1, x2, x3, y0)."""
        total = self.ring.zero()
        for m, c in self.terms.items():
            term = c
            for v, k in zip(point, m):
                if k:
                    term = term * (v**k if isinstance(v, LocalElement) else v**k)
            total = total + term
        return total

    def __repr__(self):
        def mono(m):
            return "*".join(f"{v}^{k}" if k > 1 else v for v, k in zip(VARS, m) if k) or "1"

        return " + ".join(f"{c}*{mono(m)}" for m, c in sorted(self.terms.items())) or "0"


@dataclass(frozen=True)
class CurveModel:
    ring: LocalRing
    a1: LocalElement
    a2: LocalElement
    a3: LocalElement
    a4: LocalElement
    a6: LocalElement
    b2: LocalElement
    b4: LocalElement
    b6: LocalElement
    c4: LocalElement
    c6: LocalElement
    delta: LocalElement
    label: str = ""

    @property
    def a(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def j(self):
        """j(E) is c4^3 / Delta; returned as (numerator, Delta)."""
        return self.c4**3, self.delta


def weierstrass_quantities(a1, a2, a3, a4, a6):
    """(b2, b4, b6, c4, c6) from Weierstrass coefficients in any commutative ring."""
    b2 = a1 * a1 + 4 * a2
    b4 = a1 * a3 + 2 * a4
    b6 = a3 * a3 + 4 * a6
    c4 = b2 * b2 - 24 * b4
    c6 = -(b2 * b2 * b2) + 36 * b2 * b4 - 216 * b6
    return b2, b4, b6, c4, c6


def curve_derived(a1, a2, a3, a4, a6, ring: LocalRing | None = None, label="") -> CurveModel:
    coeffs = [a1, a2, a3, a4, a6]
    if ring is None:
        ring = next((c.ring for c in coeffs if isinstance(c, LocalElement)), None)
        if ring is None:
            raise ValueError("pass ring= when all coefficients are plain numbers")
    a1, a2, a3, a4, a6 = (c if isinstance(c, LocalElement) else LocalElement.of(ring, [c])
                          for c in coeffs)
    b2, b4, b6, c4, c6 = weierstrass_quantities(a1, a2, a3, a4, a6)
    delta = (c4**3 - c6**2) / 1728
    # independent route through b8
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    if delta != -(b2 * b2 * b8) - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6:
        raise ArithmeticError("discriminant identities disagree")
    v = local_val(delta)
    if v != 0:
        raise BadReductionError(v)
    return CurveModel(ring, a1, a2, a3, a4, a6, b2, b4, b6, c4, c6, delta, label)


def build_tw(curve: CurveModel, N: int):
    """The symbolic t and w for a representative N of its class."""
    ring = curve.ring
    x0, x1, x2, x3, y0 = (MultiPoly.var(ring, v) for v in VARS)
    a1, a2, a4 = curve.a1, curve.a2, curve.a4
    b2, b4, b6 = curve.b2, curve.b4, curve.b6
    if N % 2:
        k = (N - 1) // 2
        t = 6 * x2 + x1 * b2 + b4 * k
        w = 10 * x3 + x2 * (2 * b2) + x1 * (3 * b4) + b6 * k
    else:
        t = (6 * x2 + x1 * b2 + b4 * ((N - 2) // 2)
             + 3 * x0 * x0 + x0 * (2 * a2) + a4 - y0 * a1)
        w = (10 * x3 + x2 * (2 * b2) + x1 * (3 * b4) + b6 * (N // 2)
             + 7 * x0 * x0 * x0 + x0 * x0 * (b2 + 2 * a2) + x0 * (2 * b4 + a4) - x0 * y0 * a1)
    return t, w


def build_g(curve: CurveModel, N: int) -> MultiPoly:
    """[(c4 + 240t)^3 c6^2 - c4^3 (c6 + 504 b2 t + 6048 w)^2] / 1728."""
    if N < 2:
        raise ValueError("N must be > 1")
    if N % curve.ring.p == 0:
        raise ValueError(f"N={N} must be prime to p={curve.ring.p}")
    t, w = build_tw(curve, N)
    c4, c6, b2 = curve.c4, curve.c6, curve.b2
    left = (t * 240 + c4) ** 3 * (c6 * c6)
    right = (t * (504 * b2) + w * 6048 + c6) ** 2 * (c4**3)
    return (left - right) / 1728


class GValuation(NamedTuple):
    n_v: int
    n_p: Fraction
    monomial: tuple  # a monomial attaining the minimum


def g_valuation(curve: CurveModel, N: int) -> GValuation:
    g = build_g(curve, N)
    best, arg = INF, None
    for m, c in sorted(g.terms.items()):
        v = local_val(c)
        if v < best:
            best, arg = v, m
    if best == INF:
        raise ArithmeticError("g vanishes identically")
    if best < 0:
        log.warning("g is not integral for %s, N=%d: coefficient of %s has valuation %s",
                    curve.label, N, arg, best)
    return GValuation(best, Fraction(best, curve.ring.e), arg)


class VeluImage(NamedTuple):
    a1: object
    a2: object
    a3: object
    a4: object
    a6: object
    c4: object
    c6: object


def velu_image(curve: CurveModel, t, w) -> VeluImage:
    """Coefficients of the isogenous curve given Velu's t', w'.

    Works for numeric (LocalElement) or symbolic (MultiPoly) t, w. c4', c6' are
    recomputed from the new a-invariants and checked against c4 + 240t and
    c6 + 504 b2 t + 6048 w.
    """
    a1, a2, a3 = curve.a1, curve.a2, curve.a3
    a4 = -5 * t + curve.a4
    a6 = -(t * curve.b2) - 7 * w + curve.a6
    _, _, _, c4, c6 = weierstrass_quantities(a1, a2, a3, a4, a6)
    if c4 != 240 * t + curve.c4:
        raise VeluIdentityError("c4' != c4 + 240 t'")
    if c6 != t * (504 * curve.b2) + 6048 * w + curve.c6:
        raise VeluIdentityError("c6' != c6 + 504 b2 t' + 6048 w'")
    return VeluImage(a1, a2, a3, a4, a6, c4, c6)


# ---------------------------------------------------------------------------
# fixtures


@dataclass(frozen=True)
class Fixture:
    name: str
    curve: CurveModel
    note: str = ""


def parse_fixtures(text) -> dict:
    """Blocks of ``fixture NAME``, ``ring p e f_0 .. f_e``, ``curve <5 e rationals>``."""
    out = {}
    name = ring = note = None
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        key, args = parts[0], parts[1:]
        if key == "fixture":
            name, ring, note = args[0], None, ""
        elif key == "note":
            note = " ".join(args)
        elif key == "ring":
            p, e = int(args[0]), int(args[1])
            f = [int(x) for x in args[2:]]
            if len(f) != e + 1:
                raise ValueError(f"line {lineno}: ring needs e + 1 = {e + 1} coefficients")
            ring = LocalRing(p, tuple(f))
        elif key == "curve":
            if name is None or ring is None:
                raise ValueError(f"line {lineno}: curve before fixture/ring")
            e = ring.e
            vals = [Fraction(x) for x in args]
            if len(vals) != 5 * e:
                raise ValueError(f"line {lineno}: curve needs 5 x {e} coordinates")
            a = [LocalElement.of(ring, vals[k * e:(k + 1) * e]) for k in range(5)]
            out[name] = Fixture(name, curve_derived(*a, label=name), note)
        else:
            raise ValueError(f"line {lineno}: unknown keyword {key!r}")
    return out


def load_fixtures() -> dict:
    override = os.environ.get("MODPOLY_DATA_DIR")
    if override and os.path.exists(os.path.join(override, "velu_fixtures.txt")):
        with open(os.path.join(override, "velu_fixtures.txt")) as fh:
            return parse_fixtures(fh.read())
    return parse_fixtures(resources.files("phidiv").joinpath("data/velu_fixtures.txt").read_text())


def representative(p: int, r: int, modulus: int = 12) -> int:
    """Smallest N >= 2 with N = r mod `modulus` and p not dividing N."""
    for N in range(r % modulus or modulus, 2 + modulus * p + modulus, modulus):
        if N >= 2 and N % p:
            return N
    raise ValueError(f"no N = {r} mod {modulus} is prime to p={p}")


def stability_step(p: int) -> int:
    """Period in N after which v(g) repeats: 4 in general, 6 when p = 3."""
    return 6 if p == 3 else 4


def g_consistency(curve: CurveModel, N: int) -> bool:
    """Reassemble g from the symbolic Velu image and compare monomialwise."""
    t, w = build_tw(curve, N)
    img = velu_image(curve, t, w)
    g = build_g(curve, N)
    return g * 1728 + curve.c4**3 * img.c6**2 == img.c4**3 * (curve.c6 * curve.c6)
