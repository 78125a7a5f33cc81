"""Maximal quaternion orders as reduced-norm lattices, and their theta series.

Only primes with a single supersingular j-invariant are supported, so each
prime has one maximal order up to conjugacy.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from math import isqrt

from sympy import Matrix, mobius

log = logging.getLogger(__name__)

# unique supersingular j-invariant and its automorphism-group order
SUPERSINGULAR = {2: (0, 24), 3: (0, 12), 5: (0, 6), 7: (1728, 4), 13: (5, 2)}


@dataclass(frozen=True)
class QuatOrder:
    p: int
    gram: tuple  # 4x4 tuple of Fractions; nrd(x) = x^T gram x
    J: int | None = None

    @property
    def unit_count(self):
        return theta_count(self, 1)

    def norm(self, x):
        g = self.gram
        return sum(g[r][c] * x[r] * x[c] for r in range(4) for c in range(4))

    def certify(self, unit_count=None):
        """Raise ValueError unless this is positive definite with det(2Q) = p^2."""
        M = Matrix(self.gram)
        if not all(M[:k, :k].det() > 0 for k in range(1, 5)):
            raise ValueError(f"Gram matrix for p={self.p} is not positive definite")
        if (2 * M).det() != self.p**2:
            raise ValueError(f"det(2Q) = {(2 * M).det()} for p={self.p}, expected {self.p ** 2}")
        if unit_count is not None:
            if self.unit_count != unit_count:
                raise ValueError(f"p={self.p}: {self.unit_count} units, expected {unit_count}")
            # Eichler mass with one class
            if Fraction(1, unit_count) != Fraction(self.p - 1, 24):
                raise ValueError(f"p={self.p}: mass formula fails")
        return self


def parse_registry(text):
    """Blocks of a prime line followed by four rows of four rationals."""
    rows = [line.split() for line in text.splitlines()
            if line.strip() and not line.lstrip().startswith("#")]
    out = {}
    k = 0
    while k < len(rows):
        if len(rows[k]) != 1:
            raise ValueError(f"expected a prime, got {' '.join(rows[k])!r}")
        p = int(rows[k][0])
        block = rows[k + 1:k + 5]
        if len(block) != 4 or any(len(r) != 4 for r in block):
            raise ValueError(f"p={p}: need four rows of four entries")
        gram = tuple(tuple(Fraction(x) for x in r) for r in block)
        if any(gram[r][c] != gram[c][r] for r in range(4) for c in range(4)):
            raise ValueError(f"p={p}: Gram matrix not symmetric")
        out[p] = gram
        k += 5
    return out


def _registry_text():
    override = os.environ.get("MODPOLY_DATA_DIR")
    if override and os.path.exists(os.path.join(override, "quat_orders.txt")):
        with open(os.path.join(override, "quat_orders.txt")) as fh:
            return fh.read()
    return resources.files("phidiv").joinpath("data/quat_orders.txt").read_text()


@lru_cache(maxsize=None)
def order_registry(p: int) -> QuatOrder:
    if p not in SUPERSINGULAR:
        raise ValueError(f"p={p} has more than one supersingular class or is unsupported; "
                         f"supported: {sorted(SUPERSINGULAR)}")
    grams = parse_registry(_registry_text())
    if p not in grams:
        raise ValueError(f"registry file has no entry for p={p}")
    J, units = SUPERSINGULAR[p]
    return QuatOrder(p, grams[p], J).certify(units)


# ---------------------------------------------------------------------------
# enumeration


def _ldl(gram):
    """Q(x) = sum_i d[i] (x_i + sum_{j>i} u[i][j] x_j)^2, exactly."""
    n = len(gram)
    d = [Fraction(0)] * n
    u = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        d[i] = gram[i][i] - sum(u[k][i] ** 2 * d[k] for k in range(i))
        if d[i] <= 0:
            raise ValueError("form is not positive definite")
        for j in range(i + 1, n):
            u[i][j] = (gram[i][j] - sum(u[k][i] * u[k][j] * d[k] for k in range(i))) / d[i]
    return d, u


def _floor_sqrt(t: Fraction) -> int:
    # floor(sqrt(a/b)) == isqrt(a*b) // b
    return isqrt(t.numerator * t.denominator) // t.denominator


def enumerate_vectors(gram, bound):
    """Yield (x, Q(x)) for every integer vector with Q(x) <= bound."""
    d, u = _ldl(gram)
    n = len(gram)
    x = [0] * n
    bound = Fraction(bound)

    def rec(i, remaining):
        c = sum((u[i][j] * x[j] for j in range(i + 1, n)), Fraction(0))
        s = _floor_sqrt(remaining / d[i])
        lo = -c - s - 1
        hi = -c + s + 1
        for v in range(lo.__floor__(), hi.__ceil__() + 1):
            used = d[i] * (v + c) ** 2
            if used > remaining:
                continue
            x[i] = v
            if i == 0:
                yield tuple(x), bound - remaining + used
            else:
                yield from rec(i - 1, remaining - used)
        x[i] = 0

    yield from rec(n - 1, bound)


_THETA_CACHE: dict = {}


def _theta_table(order: QuatOrder, upto: int):
    cached = _THETA_CACHE.get(order)
    if cached is not None and len(cached) > upto:
        return cached
    # grow geometrically so a sweep over m costs a few enumerations, not one per m
    size = max(upto, 2 * (len(cached) - 1) if cached else upto)
    counts = [0] * (size + 1)
    for _, m in enumerate_vectors(order.gram, size):
        if m.denominator != 1:
            raise ValueError("reduced norm form is not integral")
        counts[int(m)] += 1
    _THETA_CACHE[order] = tuple(counts)
    return _THETA_CACHE[order]


def theta_series(order: QuatOrder, upto: int) -> list:
    """[#{x : nrd(x) = m} for m = 0..upto]."""
    if upto < 0:
        raise ValueError("upto must be >= 0")
    return list(_theta_table(order, upto)[: upto + 1])


def theta_count(order: QuatOrder, m: int) -> int:
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return 1
    return _theta_table(order, m)[m]


# ---------------------------------------------------------------------------
# cyclic isogeny counts


def primitive_count(order: QuatOrder, N: int) -> int:
    """sum_{d^2 | N} mu(d) theta(N / d^2): elements of norm N not divisible by any d > 1."""
    total = 0
    d = 1
    while d * d <= N:
        if N % (d * d) == 0:
            total += int(mobius(d)) * theta_count(order, N // (d * d))
        d += 1
    return total


DOUBLE = "double"  # 2 / #O*
CLASSICAL = "classical"  # 1 / #O*
CALIBRATED = "calibrated"


def c_norm_value(order: QuatOrder, c_norm=CALIBRATED) -> Fraction:
    if isinstance(c_norm, (int, Fraction)):
        return Fraction(c_norm)
    units = order.unit_count
    if c_norm == DOUBLE:
        return Fraction(2, units)
    if c_norm == CLASSICAL:
        return Fraction(1, units)
    if c_norm == CALIBRATED:
        return calibrate().factor / units
    raise ValueError(f"unknown normalization {c_norm!r}")


def cyclic_count(order: QuatOrder, N: int, c_norm=CALIBRATED) -> Fraction:
    """Cyclic N-isogenies from the supersingular curve back to itself, via theta counts."""
    if N < 1:
        raise ValueError("N must be positive")
    if N % order.p == 0:
        raise ValueError(f"N={N} is not coprime to p={order.p}")
    return c_norm_value(order, c_norm) * primitive_count(order, N)


@dataclass(frozen=True)
class CalibrationReport:
    p: int
    N: int
    theta: int
    units: int
    target: int  # C_J(N, p) from the modular polynomial
    double: Fraction  # value under 2 / #O*
    classical: Fraction  # value under 1 / #O*
    factor: Fraction  # c_norm = factor / #O*

    def lines(self):
        return [
            f"calibration instance p={self.p}, N={self.N}: theta({self.N}) = {self.theta}, "
            f"#O* = {self.units}",
            f"C_J(N,p) from Phi_{self.N} mod {self.p} = {self.target}",
            f"2/#O* gives {self.double}; 1/#O* gives {self.classical}",
            f"adopted c_norm = {self.factor}/#O*"
            + (f" (2/#O* is off by a factor {self.double / self.target})"
               if self.double != self.target else ""),
        ]


@lru_cache(maxsize=1)
def calibrate(p: int = 2, N: int = 3) -> CalibrationReport:
    """Fix the normalization constant against the mod-p order of Phi_N at one instance."""
    from .cval import c_val_modp
    from .modpoly import compute_phi

    order = order_registry(p)
    prim = primitive_count(order, N)
    units = order.unit_count
    target = c_val_modp(compute_phi(N), order.J, p)
    double = Fraction(2 * prim, units)
    classical = Fraction(prim, units)
    if classical == target:
        factor = Fraction(1)
    elif double == target:
        factor = Fraction(2)
    else:
        raise ArithmeticError(
            f"neither normalization reproduces C = {target} (2/#O* gives {double}, 1/#O* {classical})")
    report = CalibrationReport(p, N, theta_count(order, N), units, target, double, classical, factor)
    for line in report.lines():
        log.info(line)
    return report

