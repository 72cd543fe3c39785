"""Minimal statistics toolkit: correlations, paired tests, chi-square.

p-values come from hand-rolled regularized incomplete beta/gamma
evaluations (Lentz continued fractions and series), so the package does
not pull in a statistics dependency; accuracy is around 1e-10, validated
against high-precision references in the tests.
"""

from __future__ import annotations

import math

_MAX_ITER = 500
_EPS = 3e-14
_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise RuntimeError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _gamma_series(s: float, x: float) -> float:
    """Lower regularized gamma P(s, x) by series, for x < s + 1."""
    term = 1.0 / s
    total = term
    ap = s
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + s * math.log(x) - math.lgamma(s))

def _gamma_cf(s: float, x: float) -> float:
    """Upper regularized gamma Q(s, x) by continued fraction, for x >= s + 1."""
    b = x + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + s * math.log(x) - math.lgamma(s))


def gammainc_upper(s: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(s, x)."""
    if x < 0 or s <= 0:
        raise ValueError("need x >= 0 and s > 0")
    if x == 0:
        return 1.0
    if x < s + 1.0:
        return 1.0 - _gamma_series(s, x)
    return _gamma_cf(s, x)


def t_sf_two_sided(t: float, df: int) -> float:
    """Two-sided tail probability of Student's t with df degrees of freedom."""
    if df < 1:
        raise ValueError("df must be >= 1")
    x = df / (df + t * t)
    return betainc(df / 2.0, 0.5, x)


def chi2_sf(x: float, df: int) -> float:
    """Upper tail of the chi-square distribution."""
    if df < 1:
        raise ValueError("df must be >= 1")
    return gammainc_upper(df / 2.0, x / 2.0)


def mean(xs) -> float:
    xs = list(xs)
    return sum(xs) / len(xs)


def stderr(xs) -> float:
    """Standard error of the mean (sample standard deviation / sqrt(n))."""
    xs = list(xs)
    n = len(xs)
    if n < 2:
        return 0.0
    mu = mean(xs)
    var = sum((x - mu) ** 2 for x in xs) / (n - 1)
    return math.sqrt(var / n)


def pearson_r(xs, ys) -> tuple[float, float]:
    """Sample Pearson correlation with a two-sided p-value via the t-transform."""
    xs, ys = list(xs), list(ys)
    if len(xs) != len(ys) or len(xs) < 3:
        raise ValueError("need two equal-length samples with n >= 3")
    n = len(xs)
    mx, my = mean(xs), mean(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        raise ValueError("zero variance")
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return r, t_sf_two_sided(t, n - 2)


def paired_t(xs, ys) -> tuple[float, float]:
    """Paired-sample t statistic and two-sided p-value."""
    xs, ys = list(xs), list(ys)
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("need two equal-length samples with n >= 2")
    diffs = [x - y for x, y in zip(xs, ys)]
    n = len(diffs)
    md = mean(diffs)
    var = sum((d - md) ** 2 for d in diffs) / (n - 1)
    if var == 0:
        raise ValueError("differences have zero variance")
    t = md / math.sqrt(var / n)
    return t, t_sf_two_sided(t, n - 1)
