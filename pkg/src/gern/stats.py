"""Minimal goodness-of-fit statistics: chi-square and two-sample KS.

Implemented with the standard asymptotic formulas so the library carries no
stats dependency; accuracy is plenty for the desk-scale significance checks
used by the tree-sampler validation (p thresholds around 1e-3).
"""

import math

import numpy as np


def _gamma_p_series(a, x):
    # lower regularized incomplete gamma by series expansion, x < a + 1
    term = 1.0 / a
    total = term
    n = a
    for _ in range(500):
        n += 1.0
        term *= x / n
        total += term
        if abs(term) < abs(total) * 1e-15:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a, x):
    # upper regularized incomplete gamma by Lentz continued fraction, x >= a + 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gammainc_upper(a, x):
    """Regularized upper incomplete gamma Q(a, x)."""
    if x < 0 or a <= 0:
        raise ValueError("gammainc_upper needs a > 0, x >= 0")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_contfrac(a, x)


def chi2_sf(stat, df):
    """Survival function of the chi-square distribution."""
    return gammainc_upper(df / 2.0, stat / 2.0)


def chi2_gof(observed, expected):
    """Pearson chi-square goodness of fit.

    observed: integer counts; expected: counts (same total) or probabilities.
    Returns (statistic, pvalue) with df = len(observed) - 1.
    """
    obs = np.asarray(observed, dtype=np.float64)
    exp = np.asarray(expected, dtype=np.float64)
    if obs.shape != exp.shape:
        raise ValueError("observed and expected must align")
    total = obs.sum()
    if not math.isclose(exp.sum(), total, rel_tol=1e-9):
        exp = exp / exp.sum() * total
    if (exp <= 0).any():
        raise ValueError("expected counts must be positive")
    stat = float(((obs - exp) ** 2 / exp).sum())
    df = obs.size - 1
    return stat, chi2_sf(stat, df)


def _kolmogorov_sf(t):
    # Q_KS(t) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 t^2)
    if t < 1e-8:
        return 1.0
    total = 0.0
    for j in range(1, 101):
        term = 2.0 * (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * t * t)
        total += term
        if abs(term) < 1e-12:
            break
    return min(1.0, max(0.0, total))


def ks_2samp(a, b):
    """Two-sample Kolmogorov-Smirnov test with the asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    na, nb = len(a), len(b)
    if na == 0 or nb == 0:
        raise ValueError("both samples must be non-empty")
    both = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, both, side="right") / na
    cdf_b = np.searchsorted(b, both, side="right") / nb
    stat = float(np.abs(cdf_a - cdf_b).max())
    en = na * nb / (na + nb)
    t = (math.sqrt(en) + 0.12 + 0.11 / math.sqrt(en)) * stat
    return stat, _kolmogorov_sf(t)


def mean_stderr(values):
    """Sample mean and standard error of the mean."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("need at least one value")
    if v.size == 1:
        return float(v[0]), 0.0
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))
