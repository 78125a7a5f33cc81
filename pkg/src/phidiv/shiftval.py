"""Coefficient valuations of Phi_N(X+J, Y+J) and the bounds they satisfy.

Also home to the compressed storage format, which divides every coefficient
of Phi_N by the powers of 2, 3 and 5 that the bounds force it to contain and,
in format version 2, by the forced powers of the larger supersingular primes.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import comb

import gmpy2
from gmpy2 import mpz
from sympy import factorint, primerange

from .arith import INF, LocalElement, LocalRing, _check_prime, local_val
from .cval import c_val_char0, c_val_modp, kronecker_chi
from .modpoly import BivarPoly, psi


def _shift_univariate(coeffs, J):
    n = len(coeffs)
    out = [0] * n
    Jpow = [J**k for k in range(n)]
    for i, c in enumerate(coeffs):
        if c:
            for k in range(i + 1):
                out[k] += c * comb(i, k) * Jpow[i - k]
    return out


def shift_poly(P: BivarPoly, J: int) -> BivarPoly:
    """P(X + J, Y + J), re-expanded."""
    if J == 0:
        return P
    dx = P.degree_x() + 1
    dy = P.degree_y() + 1
    rows = {}
    for (i, j), c in P.entries.items():
        rows.setdefault(j, [0] * dx)[i] = c
    # shift X in each Y-row, then Y in each X-column
    cols = {}
    for j, row in rows.items():
        for i, c in enumerate(_shift_univariate(row, J)):
            if c:
                cols.setdefault(i, [0] * dy)[j] = c
    entries = {}
    for i, col in cols.items():
        for j, c in enumerate(_shift_univariate(col, J)):
            if c:
                entries[(i, j)] = c
    return BivarPoly(P.n, entries)


def coeff_valuations(P: BivarPoly, p: int, cap: int = 64) -> dict:
    """Exact v_p of every stored coefficient.

    Works modulo p^cap and doubles cap whenever a nonzero coefficient vanishes
    modulo p^cap, so no reported value is truncated.
    """
    _check_prime(p)
    if cap < 1:
        raise ValueError("cap must be >= 1")
    out = {}
    pending = dict(P.entries)
    while pending:
        modulus = mpz(p) ** cap
        retry = {}
        for ij, c in pending.items():
            r = mpz(c) % modulus
            if r == 0:
                retry[ij] = c
            else:
                out[ij] = int(gmpy2.remove(r, p)[1])
        pending = retry
        cap *= 2
    return out


# ---------------------------------------------------------------------------
# reports


@dataclass
class ValuationReport:
    N: int
    p: int
    n: Fraction
    C: int
    rule: str = ""
    slacks: dict = field(default_factory=dict)
    note: str = ""

    @property
    def min_slack(self):
        return min(self.slacks.values(), default=None)

    @property
    def violations(self):
        return sorted(ij for ij, s in self.slacks.items() if s < 0)

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        d = asdict(self)
        d["n"] = str(self.n)
        d["slacks"] = [[i, j, s] for (i, j), s in sorted(self.slacks.items())]
        d["min_slack"] = self.min_slack
        d["violations"] = [list(ij) for ij in self.violations]
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            N=d["N"], p=d["p"], n=Fraction(d["n"]), C=d["C"], rule=d.get("rule", ""),
            slacks={(i, j): s for i, j, s in d["slacks"]}, note=d.get("note", ""),
        )

    def summary(self):
        status = "ok" if self.ok else f"{len(self.violations)} VIOLATIONS"
        head = f"N={self.N} p={self.p} n={self.n} C={self.C} min_slack={self.min_slack} {status}"
        if self.rule:
            head += f" [{self.rule}]"
        if self.note:
            head += f" ({self.note})"
        return head


def valuation_report(P: BivarPoly, p: int, n, C: int, rule: str = "", vals=None) -> ValuationReport:
    """Slack v_p(a_ij) - ceil(n (C - i - j)) for every stored a_ij with i + j < C."""
    n = Fraction(n)
    if vals is None:
        needed = BivarPoly(P.n, {ij: c for ij, c in P.entries.items() if sum(ij) < C})
        cap = max(1, math.ceil(n * C)) + 8
        vals = coeff_valuations(needed, p, cap)
    slacks = {}
    for (i, j), v in vals.items():
        if i + j < C:
            slacks[(i, j)] = v - math.ceil(n * (C - i - j))
    return ValuationReport(P.n, p, n, C, rule, slacks)


def coefficient_bound_rules(N: int) -> list:
    """(p, n, rule) for the small-prime bounds that depend only on N."""
    rules = []
    if N % 2:
        rules.append((2, Fraction(15), "p=2, 2 does not divide N"))
    if N % 3 == 1:
        rules.append((3, Fraction(9, 2), "p=3, N = 1 mod 3"))
    elif N % 3 == 2:
        rules.append((3, Fraction(3), "p=3, N = 2 mod 3"))
    if N % 5:
        rules.append((5, Fraction(3), "p=5, 5 does not divide N"))
    return rules


def verify_coefficient_bounds(P: BivarPoly) -> list:
    """Check every coefficient bound for Phi_N at p = 2, 3, 5 and 11 <= p < 3N, p = 2 mod 3."""
    N = P.n
    d = psi(N)
    reports = [valuation_report(P, p, n, d, rule) for p, n, rule in coefficient_bound_rules(N)]
    char0 = c_val_char0(P, 0)
    for p in primerange(11, 3 * N):
        p = int(p)
        if p % 3 != 2 or N % p == 0:
            continue
        if char0 > 0:
            reports.append(ValuationReport(N, p, Fraction(3), 0, "p = 2 mod 3, p >= 11",
                                           note=f"skipped: C_0({N},0) = {char0} > 0"))
            continue
        C = c_val_modp(P, 0, p)
        reports.append(valuation_report(P, p, 3, C, "p = 2 mod 3, p >= 11"))
    return reports


# ---------------------------------------------------------------------------
# rational singular moduli


@dataclass(frozen=True)
class SingularModulusRecord:
    J: int
    D: int
    J_minus_1728: dict  # prime -> exponent, sign carried separately
    sign: int
    # (p, modulus, residues of N, n_p)
    exceptional_n: tuple = ()
    class_number: int = 1

    def n_for(self, p: int, N: int) -> Fraction:
        for q, m, residues, n in self.exceptional_n:
            if q == p and N % m in residues:
                return Fraction(n)
        return default_n(self.J, p)


def default_n(J: int, p: int) -> Fraction:
    if J % p == 0:
        return Fraction({2: 15, 3: 6}.get(p, 3))
    if p >= 5 and (J - 1728) % p == 0:
        return Fraction(2)
    return Fraction(1)


F = Fraction
SINGULAR_MODULI = (
    SingularModulusRecord(0, -3, {2: 6, 3: 3}, -1,
                          ((3, 3, {1}, F(9, 2)), (3, 3, {2}, F(3)))),
    SingularModulusRecord(2**4 * 3**3 * 5**3, -12, {2: 4, 3: 3, 11: 2}, 1,
                          ((2, 1, {0}, F(19, 2)), (3, 3, {1}, F(9, 2)), (3, 3, {2}, F(3)))),
    SingularModulusRecord(-(2**15) * 3 * 5**3, -27, {2: 6, 3: 1, 11: 2, 23: 2}, -1,
                          ((3, 6, {1, 5}, F(4, 3)), (3, 6, {2, 4}, F(1, 2)))),
    SingularModulusRecord(2**6 * 3**3, -4, {}, 0,
                          ((2, 4, {1}, F(10)), (2, 4, {3}, F(9)))),
    SingularModulusRecord(2**3 * 3**3 * 11**3, -16, {2: 3, 3: 6, 7: 2}, 1,
                          ((2, 4, {1}, F(5)), (2, 4, {3}, F(9, 2)))),
    SingularModulusRecord(-(3**3) * 5**3, -7, {3: 6, 7: 1}, -1, ((7, 1, {0}, F(1)),)),
    SingularModulusRecord(3**3 * 5**3 * 17**3, -28, {3: 8, 7: 1, 19: 2}, 1, ((7, 1, {0}, F(1)),)),
    SingularModulusRecord(2**6 * 5**3, -8, {2: 7, 7: 2}, 1, ((2, 1, {0}, F(19, 2)),)),
    SingularModulusRecord(-(2**15), -11, {2: 6, 7: 2, 11: 1}, -1, ((11, 1, {0}, F(1)),)),
    SingularModulusRecord(-(2**15) * 3**3, -19, {2: 6, 3: 6, 19: 1}, -1, ((19, 1, {0}, F(1)),)),
    SingularModulusRecord(-(2**18) * 3**3 * 5**3, -43, {2: 6, 3: 8, 7: 2, 43: 1}, -1,
                          ((43, 1, {0}, F(1)),)),
    SingularModulusRecord(-(2**15) * 3**3 * 5**3 * 11**3, -67,
                          {2: 6, 3: 6, 7: 2, 31: 2, 67: 1}, -1, ((67, 1, {0}, F(1)),)),
    SingularModulusRecord(-(2**18) * 3**3 * 5**3 * 23**3 * 29**3, -163,
                          {2: 6, 3: 6, 7: 2, 11: 2, 19: 2, 127: 2, 163: 1}, -1,
                          ((163, 1, {0}, F(1)),)),
)
del F


def singular_record(D: int) -> SingularModulusRecord:
    for rec in SINGULAR_MODULI:
        if rec.D == D:
            return rec
    raise KeyError(f"no rational singular modulus with discriminant {D}")


def check_registry():
    """Each record's J - 1728 matches its stored factorization."""
    for rec in SINGULAR_MODULI:
        value = rec.sign * math.prod(q**k for q, k in rec.J_minus_1728.items())
        if value != rec.J - 1728:
            raise ValueError(f"J - 1728 mismatch for D = {rec.D}")
        if rec.J - 1728 and factorint(abs(rec.J - 1728)) != rec.J_minus_1728:
            raise ValueError(f"J - 1728 factorization incomplete for D = {rec.D}")
    return True


def singular_primes(N: int, D: int) -> list:
    """Primes p < |D| N, p not dividing N, with (D | p) != 1."""
    return [int(p) for p in primerange(2, abs(D) * N)
            if N % p and kronecker_chi(D, int(p)) != 1]


def verify_singular(P: BivarPoly, rec: SingularModulusRecord) -> list:
    N = P.n
    shifted = shift_poly(P, rec.J)
    reports = []
    for p in singular_primes(N, rec.D):
        C = c_val_modp(P, rec.J, p)
        n = rec.n_for(p, N)
        exceptional = any(q == p and N % m in res for q, m, res, _ in rec.exceptional_n)
        rule = f"J={rec.J} D={rec.D}, " + ("exceptional n_p" if exceptional else "default n_p")
        reports.append(valuation_report(shifted, p, n, C, rule))
    return reports


# ---------------------------------------------------------------------------
# interpolation lemma


class HypothesisError(ValueError):
    """Interpolation points do not satisfy the lemma's hypotheses."""


def _coerce(x, ring):
    return x if isinstance(x, LocalElement) else LocalElement.of(ring, [x])


def interpolation_bound_check(f, points, n: int, ring: LocalRing | None = None) -> bool:
    """v(a_j) >= min_k v(f(y_k)) - n j for every coefficient a_j of f.

    f is a coefficient sequence (constant term first); points need v(y_k) = n
    and v(y_k - y_l) = n for k != l, otherwise HypothesisError.
    """
    if ring is None:
        for x in list(f) + list(points):
            if isinstance(x, LocalElement):
                ring = x.ring
                break
        else:
            raise ValueError("pass ring= when all inputs are plain numbers")
    f = [_coerce(a, ring) for a in f]
    ys = [_coerce(y, ring) for y in points]
    d = len(f) - 1
    if len(ys) < d + 1:
        raise HypothesisError(f"need {d + 1} points for degree {d}, got {len(ys)}")
    for k, y in enumerate(ys):
        if local_val(y) != n:
            raise HypothesisError(f"v(y_{k}) = {local_val(y)} != {n}")
        for l in range(k):
            if local_val(y - ys[l]) != n:
                raise HypothesisError(f"v(y_{k} - y_{l}) != {n}")

    def evaluate(y):
        acc = ring.zero()
        for a in reversed(f):
            acc = acc * y + a
        return acc

    floor = min(local_val(evaluate(y)) for y in ys)
    if floor == INF:
        return all(local_val(a) == INF for a in f)
    return all(local_val(a) >= floor - n * j for j, a in enumerate(f))


# ---------------------------------------------------------------------------
# compressed storage
#
# version 1 strips the powers of 2, 3, 5 fixed by N alone; version 2 also strips
# p^(3 (C_0(N,p) - i - j)) for 11 <= p < 3N, p = 2 mod 3, storing each C_0(N,p)
# in a LARGE header line so the file still decodes on its own.

FORMAT_VERSION = 2


class CompressionError(ArithmeticError):
    """A coefficient is not divisible by its predicted prime powers."""


def large_prime_orders(P: BivarPoly) -> dict:
    """{p: C_0(N, p)} for the large-prime bound, or {} when C_0(N, 0) > 0."""
    N = P.n
    if c_val_char0(P, 0) > 0:
        return {}
    out = {}
    for p in primerange(11, 3 * N):
        p = int(p)
        if p % 3 == 2 and N % p:
            C = c_val_modp(P, 0, p)
            if C:
                out[p] = C
    return out


def predicted_exponents(N: int, i: int, j: int, large=None) -> dict:
    """Exponents of primes that the bounds force into a_ij of Phi_N."""
    k = psi(N) - i - j
    if k <= 0:
        return {}
    out = {}
    if N % 2:
        out[2] = 15 * k
    if N % 3 == 1:
        out[3] = math.ceil(Fraction(9, 2) * k)
    elif N % 3 == 2:
        out[3] = 3 * k
    if N % 5:
        out[5] = 3 * k
    for p, C in (large or {}).items():
        if C > i + j:
            out[p] = 3 * (C - i - j)
    return out


def predicted_factor(N: int, i: int, j: int, large=None) -> int:
    return math.prod(p**e for p, e in predicted_exponents(N, i, j, large).items())


@dataclass(frozen=True)
class CompressedPoly:
    N: int
    residuals: tuple  # ((i, j, r), ...) with i >= j, lexicographic
    version: int = FORMAT_VERSION
    large: tuple = ()  # ((p, C_0(N, p)), ...), version 2 only

    def dumps(self) -> str:
        lines = [f"MODPOLYC {self.version} {self.N}"]
        lines += [f"LARGE {p} {C}" for p, C in self.large]
        lines += [f"{i} {j} {r}" for i, j, r in self.residuals if r]
        lines.append("END")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "CompressedPoly":
        lines = text.splitlines()
        if not lines:
            raise ValueError("empty compressed file")
        head = lines[0].split()
        if len(head) != 3 or head[0] != "MODPOLYC":
            raise ValueError(f"bad header {lines[0]!r}")
        version, N = int(head[1]), int(head[2])
        if version not in (1, 2):
            raise ValueError(f"unsupported format version {version}")
        residuals = []
        large = []
        for lineno, line in enumerate(lines[1:], 2):
            if line == "END":
                if any(s.strip() for s in lines[lineno:]):
                    raise ValueError("data after END")
                return cls(N, tuple(residuals), version, tuple(large))
            parts = line.split()
            if parts and parts[0] == "LARGE":
                if version < 2 or residuals or len(parts) != 3:
                    raise ValueError(f"line {lineno}: misplaced LARGE line")
                large.append((int(parts[1]), int(parts[2])))
                continue
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected '<i> <j> <residual>'")
            i, j, r = (int(x) for x in parts)
            if i < j:
                raise ValueError(f"line {lineno}: entries must have i >= j")
            residuals.append((i, j, r))
        raise ValueError("missing END line")


def compress(P: BivarPoly, version: int = FORMAT_VERSION) -> CompressedPoly:
    if version not in (1, 2):
        raise ValueError(f"unsupported format version {version}")
    N = P.n
    large = large_prime_orders(P) if version == 2 else {}
    residuals = []
    for (i, j), c in P.half_entries():
        f = predicted_factor(N, i, j, large)
        r, rem = divmod(c, f)
        if rem:
            raise CompressionError(f"a[{i},{j}] of Phi_{N} is not divisible by {f}")
        residuals.append((i, j, r))
    return CompressedPoly(N, tuple(residuals), version, tuple(sorted(large.items())))


def decompress(C: CompressedPoly) -> BivarPoly:
    large = dict(C.large)
    entries = {}
    for i, j, r in C.residuals:
        c = r * predicted_factor(C.N, i, j, large)
        entries[(i, j)] = c
        entries[(j, i)] = c
    return BivarPoly(C.N, entries)


def digit_stats(P: BivarPoly, C: CompressedPoly):
    """(naive digits, compressed digits, relative saving) over entries with i >= j.

    A digit count is the length of the signed decimal string, so each minus
    sign counts once.
    """
    naive = sum(len(str(c)) for _, c in P.half_entries())
    packed = sum(len(str(r)) for _, _, r in C.residuals if r)
    return naive, packed, (1 - packed / naive) if naive else 0.0
