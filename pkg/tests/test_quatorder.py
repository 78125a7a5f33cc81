import os
from fractions import Fraction as F
from itertools import product

import pytest
from sympy import Matrix, divisor_sigma

from phidiv.cval import c_val_modp
from phidiv.modpoly import compute_phi
from phidiv.quatorder import (CALIBRATED, CLASSICAL, DOUBLE, QuatOrder, calibrate,
                              cyclic_count, c_norm_value, enumerate_vectors, order_registry,
                              parse_registry, primitive_count, theta_count, theta_series)

# quaternion algebra (a, b): i^2 = a, j^2 = b, k = ij


def qmul(x, y, a, b):
    x0, x1, x2, x3 = x
    y0, y1, y2, y3 = y
    return (x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
            x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
            x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1)


def nrd(x, a, b):
    return x[0] ** 2 - a * x[1] ** 2 - b * x[2] ** 2 + a * b * x[3] ** 2


def order_basis(p):
    h = F(1, 2)
    if p == 2:
        return -1, -1, [(h, h, h, h), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    if p % 4 == 3:
        return -1, -p, [(h, 0, h, 0), (0, h, 0, h), (0, 0, 1, 0), (0, 0, 0, 1)]
    # p = 5 mod 8
    return -2, -p, [(h, 0, h, h), (0, F(1, 4), h, F(1, 4)), (0, 0, 1, 0), (0, 0, 0, 1)]


def gram_from_basis(p):
    a, b, basis = order_basis(p)
    g = [[None] * 4 for _ in range(4)]
    for r, c in product(range(4), repeat=2):
        s = tuple(u + v for u, v in zip(basis[r], basis[c]))
        g[r][c] = (nrd(s, a, b) - nrd(basis[r], a, b) - nrd(basis[c], a, b)) / 2
    return tuple(tuple(F(x) for x in row) for row in g)


@pytest.mark.parametrize("p", [2, 3, 5, 7, 13])
def test_registry_gram_matches_construction(p):
    assert order_registry(p).gram == gram_from_basis(p)


@pytest.mark.parametrize("p", [2, 3, 5, 7, 13])
def test_basis_is_closed_under_multiplication(p):
    a, b, basis = order_basis(p)
    M = Matrix(basis).T
    for x, y in product(basis, repeat=2):
        coords = M.solve(Matrix(qmul(x, y, a, b)))
        assert all(c.is_integer for c in coords)


@pytest.mark.parametrize("p,units", [(2, 24), (3, 12), (5, 6), (7, 4), (13, 2)])
def test_units_and_discriminant(p, units):
    O = order_registry(p)
    assert O.unit_count == units
    assert (2 * Matrix(O.gram)).det() == p * p
    assert F(1, units) == F(p - 1, 24)


def test_unsupported_prime():
    with pytest.raises(ValueError):
        order_registry(11)


def test_certify_rejects_bad_gram():
    bad = QuatOrder(2, tuple(tuple(F(int(r == c)) for c in range(4)) for r in range(4)))
    with pytest.raises(ValueError, match="det"):
        bad.certify()


def test_parse_registry_errors():
    with pytest.raises(ValueError):
        parse_registry("2\n1 0 0 0\n0 1 0 0\n0 0 1 0\n")
    with pytest.raises(ValueError, match="symmetric"):
        parse_registry("2\n1 1 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n")


def test_registry_override(tmp_path, monkeypatch):
    (tmp_path / "quat_orders.txt").write_text("2\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n")
    monkeypatch.setenv("MODPOLY_DATA_DIR", str(tmp_path))
    order_registry.cache_clear()
    try:
        with pytest.raises(ValueError):
            order_registry(2)
    finally:
        monkeypatch.delenv("MODPOLY_DATA_DIR")
        order_registry.cache_clear()
    assert os.environ.get("MODPOLY_DATA_DIR") is None


def test_enumeration_against_brute_force():
    O = order_registry(5)
    bound = 6
    # Q(x) <= B forces |x_i| <= sqrt(B (G^-1)_ii)
    inv = Matrix(O.gram).inv()
    box = [int((bound * inv[i, i]) ** 0.5) + 1 for i in range(4)]
    G2 = [[int(2 * g) for g in row] for row in O.gram]
    brute = sorted(x for x in product(*(range(-b, b + 1) for b in box))
                   if sum(G2[r][c] * x[r] * x[c] for r in range(4) for c in range(4)) <= 2 * bound)
    found = sorted(x for x, _ in enumerate_vectors(O.gram, bound))
    assert found == brute
    assert len(found) == sum(theta_series(O, bound))


def test_hurwitz_theta():
    O = order_registry(2)
    series = theta_series(O, 49)
    for m in range(1, 50, 2):
        assert series[m] == 24 * divisor_sigma(m)
    assert theta_count(O, 3) == 96


def test_theta_rejects_negative():
    with pytest.raises(ValueError):
        theta_count(order_registry(3), -1)


def test_calibration_report():
    rep = calibrate()
    assert (rep.theta, rep.units, rep.target) == (96, 24, 4)
    assert rep.double == 8 and rep.classical == 4 and rep.factor == 1
    assert "factor 2" in rep.lines()[-1]
    O = order_registry(2)
    assert c_norm_value(O, DOUBLE) == 2 * c_norm_value(O, CALIBRATED)
    assert c_norm_value(O, CLASSICAL) == c_norm_value(O, CALIBRATED)
    assert c_norm_value(O, F(1, 7)) == F(1, 7)


SUPERSINGULAR_J = {2: 0, 3: 0, 5: 0, 7: 1728, 13: 5}


@pytest.mark.parametrize("p", [2, 3, 5, 7, 13])
def test_cyclic_matches_mod_p_order(p):
    O = order_registry(p)
    for N in (2, 3, 5, 7, 11, 13):
        if N % p:
            assert cyclic_count(O, N) == c_val_modp(compute_phi(N), SUPERSINGULAR_J[p], p)


@pytest.mark.parametrize("p", [2, 3, 5, 7, 13])
def test_mobius_inversion_both_ways(p):
    O = order_registry(p)
    c = c_norm_value(O)
    for N in range(1, 40):
        if N % p == 0:
            continue
        total = sum(cyclic_count(O, N // (d * d)) for d in range(1, N + 1) if N % (d * d) == 0)
        assert theta_count(O, N) == total / c
        assert primitive_count(O, N) == cyclic_count(O, N) / c


def test_cyclic_rejects_p_dividing_level():
    with pytest.raises(ValueError):
        cyclic_count(order_registry(3), 6)
