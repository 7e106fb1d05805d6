"""Brute-force reference implementations for the test suite.

Nothing here imports treatkit.  Each routine follows the textbook
definition as directly as possible: normal equations for least squares,
plain Newton iterations for logistic regression, adaptive quadrature for
the beta and gamma integrals, and Python sets for split validation.
"""

import math

import numpy as np
from scipy import integrate, stats


def oracle_ols(x, y, df_extra=0):
    """Least-squares fit of y on (1, x).  Returns (slope, intercept, F, p)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    X = np.column_stack([np.ones(n), x])
    beta = np.linalg.solve(X.T @ X, X.T @ y)
    fitted = X @ beta
    sse = float(np.sum((y - fitted) ** 2))
    ssr = float(np.sum((fitted - y.mean()) ** 2))
    df1, df2 = 1 + df_extra, n - 2 - df_extra
    F = (ssr / df1) / (sse / df2)
    return float(beta[1]), float(beta[0]), F, float(stats.f.sf(F, df1, df2))


def _logistic_loglik(y, p):
    p = np.clip(p, 1e-300, 1 - 1e-16)
    return float(np.sum(y * np.log(p) + (1 - y) * np.log1p(-p)))


def oracle_logistic_fit(X, y, iters=100):
    """Newton-Raphson logistic regression on design matrix X (no intercept added)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    beta = np.zeros(X.shape[1])
    for _ in range(iters):
        eta = X @ beta
        p = 1 / (1 + np.exp(-eta))
        w = p * (1 - p)
        H = X.T @ (X * w[:, None])
        step = np.linalg.lstsq(H, X.T @ (y - p), rcond=None)[0]
        beta = beta + step
        if np.max(np.abs(step)) < 1e-12:
            break
    return beta


def oracle_logistic_wald(X, y):
    """Coefficients and two-sided Wald p-values for logit(y) ~ 1 + X."""
    X = np.column_stack([np.ones(len(y)), np.asarray(X, dtype=float)])
    beta = oracle_logistic_fit(X, y)
    p = 1 / (1 + np.exp(-(X @ beta)))
    cov = np.linalg.inv(X.T @ (X * (p * (1 - p))[:, None]))
    z = beta / np.sqrt(np.diag(cov))
    return beta, 2 * stats.norm.sf(np.abs(z))


def oracle_logistic(x, y):
    """Deviance drop of logit(y) ~ 1 + x against the intercept model, and its chi2(1) p."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    X = np.column_stack([np.ones(len(y)), x])
    beta = oracle_logistic_fit(X, y)
    p1 = 1 / (1 + np.exp(-(X @ beta)))
    p0 = np.full(len(y), y.mean())
    drop = 2 * (_logistic_loglik(y, p1) - _logistic_loglik(y, p0))
    return drop, float(stats.chi2.sf(drop, 1))


def _log_beta(a, b):
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def oracle_beta_cdf(a, b, x):
    """I_x(a, b) by integrating the beta density; the smaller tail is integrated."""
    if x <= 0:
        return 0.0
    if x >= 1:
        return 1.0
    norm = math.exp(_log_beta(a, b))
    opts = dict(epsabs=1e-15, epsrel=1e-13, limit=500)
    if x <= a / (a + b):
        # t^(a-1) carried by the algebraic weight on [0, x]
        val, _ = integrate.quad(lambda t: (1 - t) ** (b - 1), 0, x,
                                weight="alg", wvar=(a - 1, 0), **opts)
        return val / norm
    val, _ = integrate.quad(lambda t: t ** (a - 1), x, 1,
                            weight="alg", wvar=(0, b - 1), **opts)
    return 1 - val / norm


def oracle_upper_gamma_q(s, x):
    """Q(s, x) = Gamma(s, x) / Gamma(s) by quadrature."""
    if x <= 0:
        return 1.0
    opts = dict(epsabs=1e-15, epsrel=1e-13, limit=500)
    log_gamma = math.lgamma(s)
    if x < s:
        val, _ = integrate.quad(lambda t: math.exp(-t), 0, x,
                                weight="alg", wvar=(s - 1, 0), **opts)
        return 1 - val / math.exp(log_gamma)
    # rescale by the integrand at x to keep the tail integral O(1)
    log_scale = (s - 1) * math.log(x) - x

    def f(t):
        return math.exp((s - 1) * math.log(t) - t - log_scale)

    val, _ = integrate.quad(f, x, np.inf, **opts)
    return val * math.exp(log_scale - log_gamma)


def oracle_chisq_sf(df, x):
    return oracle_upper_gamma_q(df / 2, x / 2)


def oracle_split_check(folds, n_rows, partition=True, groups=None):
    """Validate folds given as (train, app) index lists.  Returns a dict of findings."""
    report = {"disjoint": True, "nonempty": True, "in_range": True,
              "partition": None, "groups_atomic": None}
    apps = []
    for train, app in folds:
        tr, ap = set(int(i) for i in train), set(int(i) for i in app)
        if tr & ap:
            report["disjoint"] = False
        if not tr or not ap:
            report["nonempty"] = False
        if any(i < 0 or i >= n_rows for i in tr | ap):
            report["in_range"] = False
        apps.append(ap)
    if partition:
        seen = []
        for ap in apps:
            seen.extend(ap)
        report["partition"] = sorted(seen) == list(range(n_rows))
    if groups is not None:
        home = {}
        ok = True
        for f, ap in enumerate(apps):
            for r in ap:
                g = groups[r]
                if home.setdefault(g, f) != f:
                    ok = False
        report["groups_atomic"] = ok
    return report
