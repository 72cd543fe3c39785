import math

import pytest

from reprise.stats import (
    betainc,
    chi2_sf,
    gammainc_upper,
    mean,
    paired_t,
    pearson_r,
    stderr,
    t_sf_two_sided,
)

# Reference values computed once with 30-digit arithmetic (mpmath).
T_TWO_SIDED_REFERENCE = [
    (2.0, 10, 0.073388034770740375),
    (1.0, 5, 0.36321746764912268),
    (3.4641016151377544, 2, 0.074179900227448549),
    (0.5, 30, 0.62072300488512787),
    (2.776, 4, 0.050022778319976408),
    (7.621, 999, 5.8355868247131127e-14),
    (1.96, 1000, 0.050273184955748938),
    (0.1, 3, 0.92665234880080681),
    (4.0, 7, 0.0051899133492968128),
]

CHI2_SF_REFERENCE = [
    (3.84, 1, 0.050043521248705103),
    (10.0, 5, 0.075235246146512179),
    (120.0, 100, 0.08440668109369183),
    (1050.0, 1039, 0.3993333115567098),
    (0.5, 2, 0.77880078307140487),
    (25.0, 10, 0.0053455054871340643),
]


def test_t_sf_against_reference():
    for t, df, expected in T_TWO_SIDED_REFERENCE:
        assert t_sf_two_sided(t, df) == pytest.approx(expected, abs=1e-8)
        assert t_sf_two_sided(-t, df) == pytest.approx(expected, abs=1e-8)


def test_chi2_sf_against_reference():
    for x, df, expected in CHI2_SF_REFERENCE:
        assert chi2_sf(x, df) == pytest.approx(expected, abs=1e-8)


def test_incomplete_functions_edges():
    assert betainc(2.0, 3.0, 0.0) == 0.0
    assert betainc(2.0, 3.0, 1.0) == 1.0
    assert gammainc_upper(1.5, 0.0) == 1.0
    # I_x(1,1) = x
    for x in (0.1, 0.5, 0.9):
        assert betainc(1.0, 1.0, x) == pytest.approx(x, abs=1e-12)


def test_pearson_examples():
    xs = [1.0, 2.0, 3.0]
    r, p = pearson_r(xs, xs)
    assert r == 1.0 and p == 0.0
    r, _ = pearson_r(xs, [-x for x in xs])
    assert r == -1.0
    r, _ = pearson_r([1, 2, 3], [1, 2, 4])
    assert r == pytest.approx(0.98198050606196572, abs=1e-12)


def test_pearson_null_behavior():
    import random

    rng = random.Random(0)
    n = 400
    xs = [rng.gauss(0, 1) for _ in range(n)]
    ys = [rng.gauss(0, 1) for _ in range(n)]
    r, _ = pearson_r(xs, ys)
    assert abs(r) < 3 / math.sqrt(n)


def test_pearson_errors():
    with pytest.raises(ValueError):
        pearson_r([1, 2], [1, 2])
    with pytest.raises(ValueError):
        pearson_r([1, 1, 1], [1, 2, 3])


def test_paired_t_examples():
    t, p = paired_t([1.0, 2.0, 3.0], [0.0, 0.0, 0.0])
    assert t == pytest.approx(2 * math.sqrt(3), abs=1e-12)
    assert 0 < p < 1
    with pytest.raises(ValueError):
        paired_t([1, 2, 3], [1, 2, 3])
    with pytest.raises(ValueError):
        paired_t([2, 3, 4], [1, 2, 3])  # constant nonzero differences


def test_mean_stderr():
    assert mean([1, 2, 3]) == 2.0
    assert stderr([2, 2, 2]) == 0.0
    assert stderr([1.0]) == 0.0
    assert stderr([0.0, 2.0]) == pytest.approx(1.0)
