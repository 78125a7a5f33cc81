"""Classical modular polynomials Phi_N(X, Y).

Small prime levels are computed from q-expansions of j; any level can be
read from the usual ``[i,j] c`` coefficient files.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping

from sympy import factorint, isprime

from .arith import IntSeries, _poly_mul_trunc

log = logging.getLogger(__name__)

DEFAULT_CEILING = 13


class PrecisionError(ArithmeticError):
    """Working precision too small; retry with more terms."""


def psi(N: int) -> int:
    """Index of Gamma_0(N) in SL_2(Z): N * prod_{p | N} (1 + 1/p)."""
    if N < 1:
        raise ValueError("psi is defined for N >= 1")
    result = N
    for p in factorint(N):
        result = result // p * (p + 1)
    return result


@dataclass(frozen=True)
class BivarPoly:
    """Sparse integer polynomial sum a[i,j] X^i Y^j, zero entries never stored."""

    n: int
    entries: Mapping = field(repr=False)

    def __post_init__(self):
        clean = {(int(i), int(j)): int(c) for (i, j), c in dict(self.entries).items() if c}
        object.__setattr__(self, "entries", MappingProxyType(clean))

    @property
    def psi(self):
        return psi(self.n)

    def __getitem__(self, ij):
        return self.entries.get(ij, 0)

    def __eq__(self, other):
        if not isinstance(other, BivarPoly):
            return NotImplemented
        return self.n == other.n and dict(self.entries) == dict(other.entries)

    def __hash__(self):
        return hash((self.n, frozenset(self.entries.items())))

    def __len__(self):
        return len(self.entries)

    def degree_x(self):
        return max((i for i, _ in self.entries), default=-1)

    def degree_y(self):
        return max((j for _, j in self.entries), default=-1)

    def is_symmetric(self):
        return all(self.entries.get((j, i)) == c for (i, j), c in self.entries.items())

    def half_entries(self):
        """Entries with i >= j, sorted lexicographically."""
        return sorted((ij, c) for ij, c in self.entries.items() if ij[0] >= ij[1])

    def check(self):
        """Raise ValueError unless P looks like a modular polynomial of level n."""
        d = self.psi
        if not self.is_symmetric():
            raise ValueError("polynomial is not symmetric")
        if self[d, 0] != 1:
            raise ValueError(f"coefficient of X^{d} is {self[d, 0]}, expected 1")
        if self.degree_x() != d:
            raise ValueError(f"X-degree {self.degree_x()} differs from psi({self.n}) = {d}")
        if any(i == d and j for i, j in self.entries):
            raise ValueError("not monic in X")
        return self

    def evaluate(self, x, y):
        return sum(c * x**i * y**j for (i, j), c in self.entries.items())

    def at_y(self, y):
        """Coefficients (low degree first) of the univariate Phi(X, y)."""
        out = [0] * (self.degree_x() + 1)
        for (i, j), c in self.entries.items():
            out[i] += c * y**j
        return out


# ---------------------------------------------------------------------------
# q-expansions


def _sigma3_table(n):
    s = [0] * n
    for d in range(1, n):
        d3 = d**3
        for m in range(d, n, d):
            s[m] += d3
    return s


def _partition_numbers(n):
    # Euler's pentagonal recurrence
    p = [0] * n
    if n:
        p[0] = 1
    for m in range(1, n):
        total = 0
        k = 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > m:
                break
            sign = 1 if k & 1 else -1
            total += sign * p[m - g1]
            g2 = g1 + k
            if g2 <= m:
                total += sign * p[m - g2]
            k += 1
        p[m] = total
    return p


@lru_cache(maxsize=8)
def j_series(prec: int) -> IntSeries:
    """q-expansion of j = E_4^3 / Delta, known for exponents < prec."""
    if prec < 0:
        raise ValueError("prec must be >= 0")
    n = prec + 1  # terms of q*j
    s3 = _sigma3_table(n)
    e4 = [1] + [240 * s3[k] for k in range(1, n)]
    # q / Delta = (sum p(m) q^m)^24
    part = _partition_numbers(n)
    p2 = _poly_mul_trunc(part, part, n)
    p4 = _poly_mul_trunc(p2, p2, n)
    p8 = _poly_mul_trunc(p4, p4, n)
    p16 = _poly_mul_trunc(p8, p8, n)
    p24 = _poly_mul_trunc(p16, p8, n)
    e4cubed = _poly_mul_trunc(_poly_mul_trunc(e4, e4, n), e4, n)
    qj = _poly_mul_trunc(e4cubed, p24, n)
    return IntSeries(-1, tuple(qj), prec)


# ---------------------------------------------------------------------------
# Phi_ell from q-expansions


def _newton(power_sums, count):
    """Elementary symmetric series e_0..e_count from power sums s_1..s_count."""
    e = [None] * (count + 1)
    for k in range(1, count + 1):
        # k e_k = sum_{i=1}^{k} (-1)^(i-1) e_{k-i} s_i, with e_0 = 1
        acc = power_sums[k] if k % 2 else -power_sums[k]
        for i in range(1, k):
            term = e[k - i] * power_sums[i]
            acc = acc + term if i % 2 else acc - term
        coeffs = []
        for c in acc.coeffs:
            q, r = divmod(c, k)
            if r:
                raise ArithmeticError(f"Newton step k={k} is not integral")
            coeffs.append(q)
        e[k] = IntSeries(acc.lead, tuple(coeffs), acc.prec).strip()
    return e


def _express_in_j(series, jpowers, max_degree):
    """Write series as an integer polynomial in j by leading-term elimination."""
    rem = series
    coeffs = {}
    while True:
        v = rem.valuation()
        if v is None or v > 0:
            break
        m = -v
        if m > max_degree:
            raise PrecisionError(f"pole of order {m} exceeds degree bound {max_degree}")
        c = rem[v]
        coeffs[m] = c
        rem = rem - jpowers[m].scale(c)
    if rem.prec < 2:
        raise PrecisionError(f"remainder only known below q^{rem.prec}")
    if any(rem[e] for e in range(max(rem.lead, 0), 2)):
        raise PrecisionError("remainder does not vanish through q^1")
    return coeffs


def _phi_attempt(ell, prec):
    """One pass of the power-sum construction with power sums known below q^prec."""
    d = ell + 1
    jbig = j_series(ell * prec + ell + 1)
    # J_ell = j(q^ell) needs far fewer terms
    jl = j_series(prec // ell + ell + 2).substitute_power(ell)
    jpow = jbig
    jlpow = jl
    sums = [None]
    for k in range(1, d + 1):
        if k > 1:
            jpow = jpow * jbig
            jlpow = jlpow * jl
        dissected = jpow.dissect(ell).scale(ell).truncate(prec)
        sums.append((jlpow.truncate(prec) + dissected).strip())
    e = _newton(sums, d)

    small = j_series(d + 4)
    jpowers = {0: IntSeries.make(0, [1], d + 4)}
    for m in range(1, d + 1):
        jpowers[m] = jpowers[m - 1] * small if m > 1 else small

    entries = {(d, 0): 1}
    for k in range(1, d + 1):
        sign = -1 if k % 2 else 1
        for m, c in _express_in_j(e[k], jpowers, d).items():
            if c:
                entries[(d - k, m)] = sign * c
    return BivarPoly(ell, entries)


@lru_cache(maxsize=16)
def compute_phi(ell: int, ceiling: int = DEFAULT_CEILING, prec: int | None = None) -> BivarPoly:
    """Phi_ell for a prime ell <= ceiling."""
    if not isinstance(ell, int) or ell < 2 or not isprime(ell):
        raise ValueError(f"compute_phi needs a prime level, got {ell!r}")
    if ell > ceiling:
        raise ValueError(f"level {ell} exceeds the configured ceiling {ceiling}")
    if prec is None:
        prec = ell * (ell + 1) + 2
    for _ in range(8):
        try:
            P = _phi_attempt(ell, prec)
        except PrecisionError as exc:
            log.info("Phi_%d: precision %d insufficient (%s)", ell, prec, exc)
            prec += max(1, prec // 4)
            continue
        return P.check()
    raise PrecisionError(f"could not reach sufficient precision for Phi_{ell}")


# ---------------------------------------------------------------------------
# coefficient files

_LINE = re.compile(r"^\[\s*(\d+)\s*,\s*(\d+)\s*\]\s+([+-]?\d+)\s*$")


class ModpolyFormatError(ValueError):
    pass


def _infer_level(degree):
    cands = [N for N in range(2, degree) if psi(N) == degree]
    if len(cands) != 1:
        raise ModpolyFormatError(
            f"cannot infer the level from degree {degree} (candidates {cands}); pass it explicitly")
    return cands[0]


def parse_modpoly_file(text, n: int | None = None) -> BivarPoly:
    """Read ``[i,j] c`` lines into a symmetric, monic BivarPoly."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or not s.startswith("["):
            continue
        m = _LINE.match(s)
        if not m:
            raise ModpolyFormatError(f"line {lineno}: malformed entry {line!r}")
        i, j, c = int(m[1]), int(m[2]), int(m[3])
        if (i, j) in raw:
            raise ModpolyFormatError(f"line {lineno}: duplicate entry [{i},{j}]")
        raw[(i, j)] = (c, lineno)
    if not raw:
        raise ModpolyFormatError("no coefficient lines found")

    entries = {}
    for (i, j), (c, lineno) in raw.items():
        for key in ((i, j), (j, i)):
            if key in entries and entries[key] != c:
                raise ModpolyFormatError(
                    f"line {lineno}: [{i},{j}] = {c} conflicts with its mirror entry")
            entries[key] = c

    max_i = max(i for i, _ in entries)
    if n is not None:
        degree = psi(n)
    elif entries.get((max_i, 0)) == 1 and not any(i == max_i and j for i, j in entries):
        degree = max_i
    else:
        degree = max_i + 1
    if n is None:
        n = _infer_level(degree)
    entries.setdefault((degree, 0), 1)
    entries.setdefault((0, degree), 1)
    try:
        return BivarPoly(n, entries).check()
    except ValueError as exc:
        raise ModpolyFormatError(str(exc)) from None


def serialize_modpoly(P: BivarPoly) -> str:
    """Entries with i >= j in lexicographic order; the monic term is omitted."""
    d = P.psi
    lines = [f"[{i},{j}] {c}" for (i, j), c in P.half_entries() if (i, j) != (d, 0)]
    return "".join(line + "\n" for line in lines)
