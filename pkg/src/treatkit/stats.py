"""Single-variable significance tests and the special functions behind them.

``f_test_sig`` scores a derived variable against a numeric outcome with the
F statistic of a one-variable least-squares fit; ``chisq_test_sig`` scores
it against a 0/1 outcome with the deviance drop of a one-variable logistic
fit.  ``extra_degrees`` widens the numerator degrees of freedom for
variables that hide a fitted sub-model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

_TINY = 1e-300
_EPS = 1e-16
_MAX_ITER = 20000


@dataclass(frozen=True)
class SigResult:
    sig: float
    extra_degrees: int = 0
    converged: bool = True


def _check_unit(name, x):
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER):
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
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def reg_incomplete_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    _check_unit("x", x)
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    # the fraction converges fast only below the mean; use symmetry above it
    if x < (a + 1.0) / (a + b + 2.0):
        return min(1.0, math.exp(log_front) * _betacf(a, b, x) / a)
    return max(0.0, 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b)


def reg_upper_gamma_q(s: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(s, x) = Γ(s, x) / Γ(s)."""
    if s <= 0:
        raise ValueError("s must be positive")
    if not x >= 0:
        raise ValueError("x must be nonnegative")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    log_front = s * math.log(x) - x - math.lgamma(s)
    if x < s + 1.0:
        # series for P(s, x)
        term = total = 1.0 / s
        ap = s
        for _ in range(_MAX_ITER):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * _EPS:
                break
        else:
            raise ArithmeticError("incomplete gamma series did not converge")
        return max(0.0, 1.0 - total * math.exp(log_front))
    # Lentz continued fraction for Q(s, x)
    b = x + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
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
            return min(1.0, math.exp(log_front) * h)
    raise ArithmeticError("incomplete gamma continued fraction did not converge")


def f_sf(f: float, df1: float, df2: float) -> float:
    """Upper tail P[F(df1, df2) >= f]."""
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return reg_incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))


def chisq_sf(stat: float, df: float) -> float:
    if stat <= 0:
        return 1.0
    return reg_upper_gamma_q(df / 2.0, stat / 2.0)


def _prep(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    return x, y


def f_test_sig(x, y, extra_degrees: int = 0) -> SigResult:
    """Significance of ``y ~ b0 + b1*x`` by F test.

    Uses ``df1 = 1 + extra_degrees`` and ``df2 = n - 2 - extra_degrees``.
    A constant ``x``, or too few rows for ``df2 > 0``, scores 1.
    """
    x, y = _prep(x, y)
    n = x.size
    df1 = 1 + extra_degrees
    df2 = n - 2 - extra_degrees
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if df2 <= 0 or sxx <= 0 or not np.any(xc):
        return SigResult(1.0, extra_degrees)
    yc = y - y.mean()
    syy = float(yc @ yc)
    sxy = float(xc @ yc)
    ssr = min(sxy * sxy / sxx, syy)
    sse = syy - ssr
    if ssr <= 0:
        return SigResult(1.0, extra_degrees)
    if sse <= syy * 1e-15:
        return SigResult(0.0, extra_degrees)
    f = (ssr / df1) / (sse / df2)
    return SigResult(f_sf(f, df1, df2), extra_degrees)


def _binomial_loglik(y, p):
    p = np.clip(p, 1e-300, 1.0)
    q = np.clip(1.0 - p, 1e-300, 1.0)
    return float(np.sum(np.where(y > 0, np.log(p), np.log(q))))


def logistic_deviance_drop(x, y, max_iter: int = 50, tol: float = 1e-10):
    """Fit ``logit P[y=1] = b0 + b1*x`` by IRLS.

    Returns ``(null_deviance - residual_deviance, converged)``.  ``x`` is
    standardized internally (the deviance is invariant to that) and a 1e-12
    ridge keeps the normal equations solvable under separation.
    """
    x, y = _prep(x, y)
    n = x.size
    p0 = y.mean()
    null_ll = _binomial_loglik(y, np.full(n, p0))
    sd = x.std()
    if sd == 0:
        return 0.0, True
    X = np.column_stack([np.ones(n), (x - x.mean()) / sd])
    beta = np.array([math.log(p0 / (1 - p0)), 0.0])
    ll = null_ll
    converged = False
    ridge = 1e-12 * np.eye(2)
    for _ in range(max_iter):
        eta = X @ beta
        mu = 0.5 * (1.0 + np.tanh(0.5 * eta))
        w = mu * (1.0 - mu)
        hess = (X.T * w) @ X + ridge
        step = np.linalg.solve(hess, X.T @ (y - mu))
        # step-halving guards against overshoot near separation
        for _ in range(30):
            cand = beta + step
            new_ll = _binomial_loglik(y, 0.5 * (1.0 + np.tanh(0.5 * (X @ cand))))
            if new_ll >= ll - 1e-12:
                break
            step = step / 2
        beta = cand
        change = new_ll - ll
        ll = new_ll
        if abs(change) < tol:
            converged = True
            break
    return max(0.0, 2.0 * (ll - null_ll)), converged


def chisq_test_sig(x, y_ind, extra_degrees: int = 0) -> SigResult:
    """Significance of a one-variable logistic regression by deviance (χ²) test.

    ``y_ind`` must be a non-constant 0/1 vector; ``df = 1 + extra_degrees``.
    """
    x, y = _prep(x, y_ind)
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("y_ind must be a 0/1 indicator")
    if y.min() == y.max():
        raise ValueError("outcome must take more than one value")
    if np.ptp(x) == 0:
        return SigResult(1.0, extra_degrees)
    stat, converged = logistic_deviance_drop(x, y)
    return SigResult(chisq_sf(stat, 1 + extra_degrees), extra_degrees, converged)


def cross_validated_sig(fitter: Callable, col, y, split_plan, extra_degrees: int = 0,
                        test: Callable = f_test_sig):
    """Score a complex variable on its out-of-sample encoding.

    ``fitter(train_col, train_y)`` returns a spec with an ``apply(col)``
    method.  Each fold's spec encodes that fold's app rows; rows covered by
    no app set are left out of the test.  Returns ``(SigResult, oos_vector)``
    where uncovered rows of the vector are NaN.
    """
    y = np.asarray(y, dtype=np.float64)
    oos = np.full(len(col), np.nan)
    for fold in split_plan.folds:
        spec = fitter(col.take(fold.train), y[fold.train])
        oos[fold.app] = spec.apply(col.take(fold.app))
    covered = ~np.isnan(oos)
    if covered.sum() < 3:
        return SigResult(1.0, extra_degrees), oos
    return test(oos[covered], y[covered], extra_degrees), oos
