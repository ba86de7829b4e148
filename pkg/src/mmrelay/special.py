"""Special functions for integer-shape gamma tails and erfc.

The upper incomplete gamma function is only ever needed at integer shape,
where it has the finite form

    Gamma(n+1, x) = n! e^{-x} sum_{m=0}^{n} x^m / m!

which is summed here in log space so it survives large ``x``.
"""

import math

import numpy as np
from scipy import special as _sp

__all__ = [
    "log_upper_incomplete_gamma",
    "upper_incomplete_gamma",
    "log_regularized_upper_gamma",
    "log_regularized_lower_gamma",
    "erfc",
    "log_erfc",
    "log1mexp",
    "logdiffexp",
]


def _check_shape(s):
    if isinstance(s, bool) or int(s) != s or s < 1:
        raise ValueError(f"shape must be a positive integer, got {s!r}")
    return int(s)


def _log_partial_exp_sum(n: int, x: np.ndarray) -> np.ndarray:
    """log sum_{m=0}^{n} x^m / m!, elementwise for x >= 0."""
    m = np.arange(n + 1, dtype=float)
    log_fact = _sp.gammaln(m + 1.0)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logx = np.log(x)[..., None]
        terms = m * logx - log_fact
    # x == 0: only the m == 0 term survives (0 log 0 -> 0)
    terms = np.where(np.isneginf(logx) & (m > 0), -np.inf, terms)
    terms[..., 0] = 0.0
    return _sp.logsumexp(terms, axis=-1)


def log_regularized_upper_gamma(s, x):
    """log Q(s, x) = log(Gamma(s, x) / (s-1)!) for integer ``s >= 1``."""
    s = _check_shape(s)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be non-negative")
    out = -x + _log_partial_exp_sum(s - 1, x)
    return out if out.ndim else float(out)


def log_upper_incomplete_gamma(s, x):
    """log Gamma(s, x) for integer ``s >= 1`` and ``x >= 0``."""
    s = _check_shape(s)
    return math.lgamma(s) + log_regularized_upper_gamma(s, x)


def upper_incomplete_gamma(s, x):
    """Upper incomplete gamma ``Gamma(s, x) = int_x^inf t^{s-1} e^{-t} dt``.

    Only positive integer ``s`` is supported. Underflows to 0 for very
    large ``x``; use :func:`log_upper_incomplete_gamma` there.
    """
    return np.exp(log_upper_incomplete_gamma(s, x))


def log_regularized_lower_gamma(s, x):
    """log P(s, x) = log(1 - Q(s, x)) for integer ``s >= 1``.

    For ``x`` below ``s`` the complement is tiny and is summed directly as
    ``e^{-x} sum_{m>=s} x^m/m!``; above it ``log1p(-Q)`` is accurate.
    """
    s = _check_shape(s)
    x0 = np.asarray(x, dtype=float)
    if np.any(x0 < 0):
        raise ValueError("x must be non-negative")
    x = np.atleast_1d(x0).ravel()
    out = np.empty_like(x)
    small = x < s
    if np.any(small):
        xs = x[small]
        # tail series of the exponential; terms decay at least like (x/s)^j
        n_terms = 60 + 4 * s
        m = s + np.arange(n_terms, dtype=float)
        with np.errstate(divide="ignore"):
            terms = m * np.log(xs)[:, None] - _sp.gammaln(m + 1.0)
        out[small] = -xs + _sp.logsumexp(terms, axis=-1)
    if np.any(~small):
        xl = x[~small]
        out[~small] = np.log1p(-np.exp(log_regularized_upper_gamma(s, xl)))
    return out.reshape(x0.shape) if x0.ndim else float(out[0])


def erfc(x):
    """Complementary error function (scipy backend)."""
    return _sp.erfc(x)


def log_erfc(x):
    """log erfc(x), accurate far into the tail."""
    x = np.asarray(x, dtype=float)
    return np.log(2.0) + _sp.log_ndtr(-np.sqrt(2.0) * x)


def log1mexp(a):
    """log(1 - e^a) for a <= 0, switching branches at -log 2."""
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(a > -math.log(2.0), np.log(-np.expm1(a)), np.log1p(-np.exp(a)))


def logdiffexp(la, lb):
    """log(e^la - e^lb) for la >= lb."""
    la = np.asarray(la, dtype=float)
    lb = np.asarray(lb, dtype=float)
    with np.errstate(invalid="ignore"):
        return la + log1mexp(lb - la)
