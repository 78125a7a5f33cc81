"""Isogeny-count invariants C_J(N, p): orders of vanishing of Phi_N(X+J, J)."""

from __future__ import annotations

import math
import warnings
from typing import NamedTuple

from sympy import factorint, primerange

from .arith import FpPoly, _check_prime
from .modpoly import BivarPoly, psi


def _taylor_shift(coeffs, J, mod=None):
    """Coefficients of f(X + J) given those of f(X), optionally reduced mod `mod`."""
    c = list(coeffs)
    n = len(c)
    # repeated synthetic division; O(n^2) ring operations
    for k in range(n - 1):
        for i in range(n - 2, k - 1, -1):
            c[i] += J * c[i + 1]
            if mod:
                c[i] %= mod
    return c


def _ord(coeffs):
    for i, c in enumerate(coeffs):
        if c:
            return i
    raise ValueError("zero polynomial has no order of vanishing")


def c_val_modp(P: BivarPoly, J: int, p: int) -> int:
    """ord_X of Phi_N(X+J, J) mod p."""
    _check_prime(p)
    if P.n % p == 0:
        warnings.warn(f"p = {p} divides the level {P.n}; the valuation bounds do not cover this case",
                      stacklevel=2)
    Jp = J % p
    poly = [0] * (P.degree_x() + 1)
    for (i, j), c in P.entries.items():
        poly[i] = (poly[i] + c * pow(Jp, j, p)) % p
    shifted = FpPoly.from_ints(p, _taylor_shift(poly, Jp, p))
    return shifted.ord()


def c_val_char0(P: BivarPoly, J: int) -> int:
    """ord_X of the integer polynomial Phi_N(X+J, J)."""
    return _ord(_taylor_shift(P.at_y(J), J))


def kronecker_chi(D: int, q: int) -> int:
    """Kronecker symbol (D | q) for a discriminant D and a prime q."""
    if D % 4 not in (0, 1) or D == 0:
        raise ValueError(f"{D} is not a discriminant")
    _check_prime(q)
    if q == 2:
        if D % 2 == 0:
            return 0
        return 1 if D % 8 in (1, 7) else -1
    r = pow(D % q, (q - 1) // 2, q)
    if r == 0:
        return 0
    return 1 if r == 1 else -1


def ordinary_bound(N: int, D: int) -> int:
    """prod_{q | N} (1 + chi_D(q))^{v_q(N)}."""
    out = 1
    for q, k in factorint(N).items():
        out *= (1 + kronecker_chi(D, q)) ** k
    return out


class ScanResult(NamedTuple):
    hits: list  # [(p, C_J(N, p))] with C_J(N, p) > C_J(N, 0)
    char0: int
    bound: int  # |D| N
    violations: list  # hits with p >= |D| N


def ss_prime_scan(P: BivarPoly, J: int, D: int, pmax: int) -> ScanResult:
    """Primes p <= pmax, p not dividing N, where C_J(N, p) exceeds C_J(N, 0)."""
    N = P.n
    bound = abs(D) * N
    if pmax < bound:
        raise ValueError(f"pmax = {pmax} must be at least |D|N = {bound}")
    c0 = c_val_char0(P, J)
    hits = []
    for p in primerange(2, pmax + 1):
        if N % p == 0:
            continue
        c = c_val_modp(P, J, p)
        if c > c0:
            hits.append((int(p), c))
    return ScanResult(hits, c0, bound, [(p, c) for p, c in hits if p >= bound])


def lambda_N(N: int) -> float:
    """sum over p^n || N of (p^n - 1) / (p^(n-1) (p^2 - 1)) * log p.

    A sum, not a product: only the sum is O(log log N).
    """
    if N < 1 or N % 2 == 0:
        raise ValueError("lambda_N is used for odd N only")
    total = 0.0
    for p, n in factorint(N).items():
        total += (p**n - 1) / (p ** (n - 1) * (p * p - 1)) * math.log(p)
    return total


class AvgBound(NamedTuple):
    lhs: float | None
    rhs: float | None
    holds: bool | None
    note: str = ""


def avg_bound_check(P: BivarPoly) -> AvgBound:
    """sum_{p < 3N, p not | N} C_0(N, p) log p <= 2 psi(N) (log N - lambda_N + 8.2)."""
    N = P.n
    if N % 2 == 0:
        raise ValueError("the average bound is stated for odd N")
    if c_val_char0(P, 0) > 0:
        return AvgBound(None, None, None, f"skipped: C_0({N},0) > 0")
    lhs = 0.0
    for p in primerange(2, 3 * N):
        if N % p:
            lhs += c_val_modp(P, 0, int(p)) * math.log(p)
    rhs = 2 * psi(N) * (math.log(N) - lambda_N(N) + 8.2)
    return AvgBound(lhs, rhs, lhs <= rhs)

