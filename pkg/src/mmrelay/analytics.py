"""Closed-form approximations for the MRC/MRT relay link.

Component moments, the Jensen rate bound, the linear-regime SINR, the
gamma-mixture law of the interference power and the outage/ABER
expressions built on it.

Tail quantities are returned with a log-domain companion, since outage
and error rates at large ``M`` underflow double precision.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence, Union

import numpy as np
from scipy import special as _sp

from .model import NetworkParams
from .special import logdiffexp

__all__ = [
    "ComponentMoments",
    "GammaMixParams",
    "CorrelatedGammaSum",
    "OutageContext",
    "TailProbability",
    "component_moments",
    "rate_lower_bound",
    "xi",
    "linear_regime_sinr",
    "gamma_mix_params",
    "interference_pdf",
    "interference_survival",
    "interference_cdf",
    "sinr_pdf",
    "outage_context",
    "outage_probability",
    "aber",
    "aber_outage_threshold",
    "correlated_gamma_sum_pdf",
    "write_curve_csv",
    "BPSK",
]

BPSK = (0.5, 1.0)

# series truncation target on the neglected mixture weight
SERIES_EPS = 1e-12
# relative cancellation beyond which a closed-form difference is abandoned
CANCEL_TOL = 1e-3
# "much greater than" in the validity conditions
MUCH_GREATER = 10.0
# linear values below this are reported through the log channel only
TINY = 1e-300

_Params = Union[NetworkParams, Mapping[str, float]]


def _fields(p: _Params):
    if isinstance(p, NetworkParams):
        return p.M, p.K, p.P, p.Q, p.P_c
    return p["M"], p["K"], p["P"], p["Q"], p["P_c"]


# -- component moments and rate bound ------------------------------------------

@dataclass(frozen=True)
class ComponentMoments:
    """Large-M means and squared coefficients of variation of the six powers."""

    mean: Dict[str, float]
    scv: Dict[str, float]

    def __getitem__(self, name):
        return self.mean[name], self.scv[name]


def component_moments(p: NetworkParams) -> ComponentMoments:
    """Dominant-order means and SCVs of ``P_se, P_ie, P_ne, P_e1, P_e2, P_e3``.

    Valid for ``M >> 1``; a warning is issued below ``M = 64``. ``K = 1``
    has no interference and is rejected.
    """
    M, K, Pc = p.M, p.K, p.P_c
    if K < 2:
        raise ValueError("interference moments need K >= 2")
    if M < 64:
        warnings.warn(f"large-M moment formulas used at M={M}", stacklevel=2)
    g = K / (M * Pc)
    mean = {
        "P_se": Pc**4,
        "P_ie": Pc**3 * (2.0 + g),
        "P_ne": Pc**3 + K / M * Pc**2,
        "P_e1": K / M * Pc**2 * (1.0 - Pc) ** 2,
        "P_e2": Pc**3 * (1.0 - Pc),
        "P_e3": Pc**3 * (1.0 - Pc),
    }
    scv_ie = ((4.0 / (K - 1) + (8.0 + 10.0 * Pc) / (Pc * M)
               + (K**2 + 18.0 * (K - 2) * Pc) / ((K - 1) * Pc**2 * M**2))
              / (4.0 + K**2 / (M**2 * Pc**2) + 4.0 * K / (M * Pc)))
    scv = {
        "P_se": 8.0 / M,
        "P_ie": scv_ie,
        "P_ne": (2.0 + 5.0 * Pc - 2.0 * Pc**2) / (M * Pc + K**2 / (M * Pc) + 2.0 * K),
        "P_e1": 3.0 / K,
        "P_e2": 1.0,
        "P_e3": 1.0,
    }
    return ComponentMoments(mean=mean, scv=scv)


def rate_lower_bound(p: NetworkParams):
    """Jensen lower bound on the per-pair rate.

    Returns
    -------
    tilde_sinr : float
        SINR obtained by replacing every component with its mean.
    c_lb : float
        ``0.5 * log2(1 + tilde_sinr)`` in bits per channel use (the 1/2
        accounts for the two-hop transmission).
    """
    M, K, P, Q, Pc = _fields(p)
    den = (2 * K / (M * Pc) + K**2 / (M**2 * Pc**2) + 1 / (M * P * Pc)
           + K / (M**2 * P * Pc**2) + K / (M * Pc * Q) + K**2 / (M**2 * Pc**2 * Q)
           + K / (M**2 * P * Pc**2 * Q))
    tilde = 1.0 / den
    return tilde, 0.5 * math.log2(1.0 + tilde)


def xi(p: _Params) -> float:
    """Deterministic part of the linear-regime SINR denominator."""
    M, K, P, Q, Pc = _fields(p)
    return ((1.0 / P + K / Q) * (1.0 / Pc + K / (M * Pc**2))
            + 2.0 * (1.0 / Pc - 1.0) + K / M * (1.0 / Pc - 1.0) ** 2)


def linear_regime_sinr(P_ie, p: _Params):
    """SINR with every component except the interference at its mean.

    ``M / (P_ie (K-1) / P_c^4 + xi)``; a zero denominator (no interference,
    infinite powers, perfect CSI) returns ``inf``. ``p`` may be a mapping
    so that infinite ``P``/``Q`` can be expressed.
    """
    M, K, P, Q, Pc = _fields(p)
    den = np.asarray(P_ie, dtype=float) * (K - 1) / Pc**4 + xi(p)
    with np.errstate(divide="ignore"):
        out = np.where(den > 0, M / np.where(den > 0, den, 1.0), np.inf)
    return float(out) if out.ndim == 0 else out


# -- gamma mixture -------------------------------------------------------------

@dataclass(frozen=True)
class GammaMixParams:
    """Parameters of the gamma-mixture law of the interference power.

    ``ratio = b_e / (b_e + c_e)`` is the geometric weight of successive
    mixture components; the component of index ``j`` is a gamma law of
    shape ``K - 1 + j`` and scale ``d_e c_e``.
    """

    rho_e: float
    b_e: float
    c_e: float
    d_e: float
    K: int
    M: int
    P_c: float
    simplified: bool = False

    @property
    def ratio(self) -> float:
        return self.b_e / (self.b_e + self.c_e)

    @property
    def scale(self) -> float:
        return self.d_e * self.c_e

    def series_length(self, eps: float = SERIES_EPS) -> int:
        """Smallest ``J`` whose neglected weight ``c/(b+c) sum_{j>J} r^j`` is < eps."""
        r = self.ratio
        if r <= 0.0:
            return 0
        # c/(b+c) * r^{J+1} / (1-r) = r^{J+1}
        return max(0, int(math.ceil(math.log(eps) / math.log(r))) - 1)

    def tail_weight(self, J: int) -> float:
        return self.ratio ** (J + 1)

    @property
    def mean(self) -> float:
        return self.d_e * (self.K - 1)


def gamma_mix_params(p: NetworkParams, simplified: bool = False) -> GammaMixParams:
    """``rho_e``, ``b_e``, ``c_e``, ``d_e`` for the interference mixture.

    With ``simplified`` the ``K/(M P_c)`` correction is dropped from both
    ``rho_e`` and ``d_e``, the high-CSI-quality form.
    """
    M, K, Pc = p.M, p.K, p.P_c
    if K < 2:
        raise ValueError("interference law needs K >= 2")
    g = 0.0 if simplified else K / (M * Pc)
    rho = math.sqrt(4.0 / Pc + 10.0) / (math.sqrt(M) * (2.0 + g))
    if not 0.0 < rho < 1.0:
        warnings.warn(f"rho_e={rho:.3g} outside (0, 1); M={M} too small", stacklevel=2)
    return GammaMixParams(rho_e=rho, b_e=(K - 1) * rho, c_e=1.0 - rho,
                          d_e=Pc**3 / (K - 1) * (2.0 + g), K=K, M=M, P_c=Pc,
                          simplified=simplified)


def _log_gamma_pdf(y, shape, scale):
    # xlogy keeps the shape-1 density finite at y = 0
    return (_sp.xlogy(shape - 1, y) - y / scale - shape * math.log(scale)
            - _sp.gammaln(shape))


def _series_logpdf(y, g: GammaMixParams, J: int):
    y = np.asarray(y, dtype=float)
    j = np.arange(J + 1, dtype=float)
    shape = g.K - 1 + j
    logw = math.log(g.c_e / (g.b_e + g.c_e)) + j * math.log(g.ratio) if g.ratio > 0 \
        else np.where(j == 0, 0.0, -np.inf)
    terms = logw + _log_gamma_pdf(y[..., None], shape, g.scale)
    if g.K == 2:
        # shape-1 component is finite at y = 0: 0 * log 0 -> 0
        terms[..., 0] = np.where(y == 0, logw[0] - math.log(g.scale), terms[..., 0])
    return _sp.logsumexp(terms, axis=-1)


def _closed_log_parts(y, g: GammaMixParams):
    """Logs of the two exponential branches of the closed-form density."""
    K, b, c, d = g.K, g.b_e, g.c_e, g.d_e
    y = np.asarray(y, dtype=float)
    log_pref = (K - 3) * math.log(b + c) - math.log(d) - (K - 2) * math.log(b)
    log_first = log_pref - y / (d * (b + c))
    if K == 2:
        return log_first, np.full_like(y, -np.inf)
    beta = b / (d * c * (b + c))
    n = np.arange(K - 2, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = n * np.log(beta * y)[..., None] - _sp.gammaln(n + 1)
    terms[..., 0] = 0.0
    log_second = log_pref - y / (d * c) + _sp.logsumexp(terms, axis=-1)
    return log_first, log_second


def interference_logpdf(y, g: GammaMixParams, form: str = "closed",
                        J: Optional[int] = None):
    """Log of :func:`interference_pdf`."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("interference power must be non-negative")
    if g.K < 2:
        raise ValueError("interference law needs K >= 2")
    if form == "series":
        return _series_logpdf(y, g, g.series_length() if J is None else J)
    if form != "closed":
        raise ValueError(f"unknown form {form!r}")
    lf, ls = _closed_log_parts(y, g)
    diff = ls - lf
    out = logdiffexp(lf, ls)
    # at small y the two branches nearly cancel; the series is safe there
    bad = diff > math.log1p(-CANCEL_TOL)
    if np.any(bad):
        out = np.where(bad, _series_logpdf(y, g, g.series_length()), out)
    return out


def interference_pdf(y, g: GammaMixParams, form: str = "closed",
                     J: Optional[int] = None):
    """Density of the normalized interference power ``P_ie``.

    Parameters
    ----------
    y : array_like
        Points ``>= 0``.
    g : GammaMixParams
    form : {"closed", "series"}
        ``"closed"`` is the finite two-branch expression, evaluated in log
        space; points where the branches cancel to within ``CANCEL_TOL``
        fall back to the series. ``"series"`` sums ``J + 1`` gamma
        components (``J`` from :meth:`GammaMixParams.series_length` unless
        given). For ``K = 2`` both reduce to the exponential law.
    """
    out = np.exp(interference_logpdf(y, g, form, J))
    return float(out) if np.ndim(out) == 0 else out


def _series_survival(y, g: GammaMixParams, J: Optional[int] = None):
    J = g.series_length() if J is None else J
    j = np.arange(J + 1, dtype=float)
    w = g.c_e / (g.b_e + g.c_e) * g.ratio ** j
    return (w * _sp.gammaincc(g.K - 1 + j, np.asarray(y, float)[..., None] / g.scale)).sum(-1)


def _log_survival(y, g: GammaMixParams):
    """log P(P_ie > y) from the incomplete-gamma closed form."""
    K, b, c, d = g.K, g.b_e, g.c_e, g.d_e
    y = np.atleast_1d(np.asarray(y, dtype=float)).ravel()
    r = g.ratio
    log_first = (2 - K) * math.log(r) - y / (d * (b + c))
    if K == 2:
        return log_first
    n = np.arange(K - 2, dtype=float)
    # Gamma(n+1, x)/n! is the regularized upper gamma Q(n+1, x)
    with np.errstate(divide="ignore"):
        logq = np.log(_sp.gammaincc(n + 1, y[:, None] / (d * c)))
    small = ~np.isfinite(logq)
    if np.any(small):
        # deep tail: Q(n+1, x) = e^{-x} sum_{m<=n} x^m/m!
        x = (y[:, None] / (d * c)) * np.ones_like(n)
        m = np.arange(K - 2, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            tm = m * np.log(x)[..., None] - _sp.gammaln(m + 1)
        tm = np.where(m <= n[:, None], tm, -np.inf)
        alt = -x + _sp.logsumexp(tm, axis=-1)
        logq = np.where(small, alt, logq)
    log_second = (math.log(c / (b + c)) + _sp.logsumexp(
        (n - K + 2) * math.log(r) + logq, axis=-1))
    out = logdiffexp(log_first, log_second)
    bad = log_second - log_first > math.log1p(-CANCEL_TOL)
    if np.any(bad):
        with np.errstate(divide="ignore"):
            out = np.where(bad, np.log(_series_survival(y, g)), out)
    return out


def interference_survival(y, g: GammaMixParams):
    """``P(P_ie > y)`` under the gamma-mixture law."""
    y0 = np.asarray(y, dtype=float)
    out = np.exp(_log_survival(y0, g))
    return out.reshape(y0.shape) if y0.ndim else float(out[0])


def interference_cdf(y, g: GammaMixParams):
    y0 = np.asarray(y, dtype=float)
    out = -np.expm1(_log_survival(y0, g))
    return out.reshape(y0.shape) if y0.ndim else float(out[0])


# -- SINR law, outage and ABER -------------------------------------------------

def sinr_pdf(r, p: NetworkParams, g: Optional[GammaMixParams] = None):
    """Density of the linear-regime SINR on ``(0, M/xi)``; zero elsewhere.

    Evaluated from its own two-branch expression in ``r`` (not through
    the interference density), with the series as fallback where the
    branches cancel.
    """
    g = gamma_mix_params(p) if g is None else g
    M, K, Pc = p.M, p.K, p.P_c
    b, c, d = g.b_e, g.c_e, g.d_e
    x = xi(p)
    r = np.asarray(r, dtype=float)
    inside = (r > 0) & (r < M / x)
    rr = np.where(inside, r, 1.0)
    t = M / rr - x                                   # M/r - xi > 0
    z = t * Pc**4 / ((K - 1) * d)
    lKd = math.log((K - 1) * d)
    log_first = ((K - 3) * math.log(b + c) + math.log(M) + 4 * math.log(Pc)
                 - 2 * np.log(rr) - lKd - (K - 2) * math.log(b) - z / (b + c))
    if K > 2:
        n = np.arange(K - 2, dtype=float)
        terms = ((K - n - 3) * math.log(b + c) + math.log(M) + (4 * n + 4) * math.log(Pc)
                 - _sp.gammaln(n + 1) - (n + 1) * lKd - n * math.log(c)
                 - (K - n - 2) * math.log(b) + n * np.log(t)[..., None])
        log_second = _sp.logsumexp(terms, axis=-1) - 2 * np.log(rr) - z / c
        logf = logdiffexp(log_first, log_second)
        bad = log_second - log_first > math.log1p(-CANCEL_TOL)
        if np.any(bad):
            y = t * Pc**4 / (K - 1)
            jac = np.log(M * Pc**4 / ((K - 1) * rr**2))
            logf = np.where(bad, _series_logpdf(y, g, g.series_length()) + jac, logf)
    else:
        logf = log_first
    out = np.where(inside, np.exp(logf), 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class OutageContext:
    """Quantities shared by the outage expressions at one threshold."""

    xi: float
    D: float
    gamma_th: float
    support: float                   # M / xi
    valid: Dict[str, bool] = field(default_factory=dict)


@dataclass(frozen=True)
class TailProbability:
    """A probability with its natural log.

    ``value`` is 0 when the probability is below 1e-300; ``log_value``
    stays exact. ``clamped`` marks approximations that exceeded 1.
    """

    value: float
    log_value: float
    form: str
    context: Optional[OutageContext] = None
    clamped: bool = False

    @property
    def underflow(self) -> bool:
        return self.value == 0.0 and self.log_value > -np.inf

    def __float__(self):
        return self.value


def _high_snr_D(p: NetworkParams, g: GammaMixParams) -> float:
    M, K, P, Q, Pc = p.M, p.K, p.P, p.Q, p.P_c
    return ((2.0 * (1.0 - Pc) + 1.0 / P + K / Q) * Pc**3
            / ((K - 1) * g.d_e * (g.b_e + g.c_e)))


def _regime_term(p: NetworkParams, g: GammaMixParams) -> float:
    K = p.K
    return (2.0 * g.d_e * g.c_e * (1.0 + g.c_e / g.b_e) * K * (K - 1)
            + 1.0 / p.P + K / p.Q)


def outage_context(gamma_th: float, p: NetworkParams,
                   g: Optional[GammaMixParams] = None) -> OutageContext:
    """``xi``, ``D`` and the validity flags of the high-SNR forms.

    Flags (``True`` = condition met with a factor of 10): ``training``
    for ``E_t >> 1`` and ``antennas`` for
    ``M >> gamma_th (2 d c (1 + c/b) K (K-1) + 1/P + K/Q)``.
    """
    if not gamma_th > 0:
        raise ValueError(f"threshold must be positive, got {gamma_th!r}")
    g = gamma_mix_params(p) if g is None else g
    x = xi(p)
    valid = {
        "training": p.E_t >= MUCH_GREATER,
        "antennas": p.M >= MUCH_GREATER * gamma_th * _regime_term(p, g),
    }
    return OutageContext(xi=x, D=_high_snr_D(p, g), gamma_th=float(gamma_th),
                         support=p.M / x, valid=valid)


def _tail(log_value: float, form: str, ctx=None) -> TailProbability:
    clamped = log_value > 0.0
    lv = min(float(log_value), 0.0)
    val = math.exp(lv)
    return TailProbability(value=val if val >= TINY else 0.0, log_value=lv,
                           form=form, context=ctx, clamped=clamped)


def outage_probability(gamma_th: float, p: NetworkParams, form: str = "exact",
                       g: Optional[GammaMixParams] = None) -> TailProbability:
    """``P(SINR < gamma_th)`` under the linear-regime SINR law.

    ``form="exact"`` integrates the gamma-mixture tail through upper
    incomplete gamma functions; ``form="high_snr"`` keeps only the
    dominant exponential. Both return 1 when ``gamma_th >= M/xi``.
    """
    g = gamma_mix_params(p) if g is None else g
    ctx = outage_context(gamma_th, p, g)
    K, M, Pc = p.K, p.M, p.P_c
    if gamma_th >= ctx.support:
        return TailProbability(1.0, 0.0, form, ctx)
    if form == "exact":
        y0 = (M / gamma_th - ctx.xi) * Pc**4 / (K - 1)
        return _tail(float(_log_survival(y0, g)[0]), form, ctx)
    if form == "high_snr":
        lv = ((2 - K) * math.log(g.ratio) + ctx.D
              - M * Pc**4 / (gamma_th * (K - 1) * g.d_e * (g.b_e + g.c_e)))
        return _tail(lv, form, ctx)
    raise ValueError(f"unknown form {form!r}")


def aber_outage_threshold(p: NetworkParams, B: float,
                          g: Optional[GammaMixParams] = None) -> float:
    """Threshold at which the ABER approximation equals ``A`` times the
    high-SNR outage approximation."""
    g = gamma_mix_params(p) if g is None else g
    return math.sqrt(p.M * p.P_c**4 / (4.0 * B * (p.K - 1) * g.d_e * (g.b_e + g.c_e)))


def aber(p: NetworkParams, A: float = 0.5, B: float = 1.0,
         g: Optional[GammaMixParams] = None) -> TailProbability:
    """High-SNR average bit error rate for ``P_b(e|r) = A erfc(sqrt(B r))``.

    The context's ``antennas`` flag is evaluated without the threshold
    factor, as the condition for this expression carries none.
    """
    if not 0.0 < A <= 1.0:
        raise ValueError(f"A must lie in (0, 1], got {A!r}")
    if not B > 0:
        raise ValueError(f"B must be positive, got {B!r}")
    g = gamma_mix_params(p) if g is None else g
    K, M, Pc = p.K, p.M, p.P_c
    ctx = OutageContext(
        xi=xi(p), D=_high_snr_D(p, g), gamma_th=aber_outage_threshold(p, B, g),
        support=M / xi(p),
        valid={"training": p.E_t >= MUCH_GREATER,
               "antennas": M >= MUCH_GREATER * _regime_term(p, g)})
    lv = (math.log(A) + (2 - K) * math.log(g.ratio) + ctx.D
          - 2.0 * Pc**2 * math.sqrt(B * M / ((K - 1) * g.d_e * (g.b_e + g.c_e))))
    return _tail(lv, "high_snr", ctx)


# -- general correlated-gamma sum ---------------------------------------------

@dataclass(frozen=True)
class CorrelatedGammaSum:
    """Sum of unit-shape gammas with a correlated covariance, by eigenvalues.

    ``sigma`` holds the eigenvalues in nondecreasing order. ``delta`` are
    the mixture weights, from the general recursion (``"recursive"``) or,
    for the equicorrelated case, the geometric closed form
    (``"geometric"``).
    """

    sigma: np.ndarray
    J: int = 200

    def __post_init__(self):
        s = np.sort(np.asarray(self.sigma, dtype=float))
        if s.size == 0 or np.any(s <= 0):
            raise ValueError("eigenvalues must be positive")
        object.__setattr__(self, "sigma", s)

    @classmethod
    def equicorrelated(cls, g: GammaMixParams, J: Optional[int] = None):
        K = g.K
        s = np.full(K - 1, g.d_e * (1.0 - g.rho_e))
        s[-1] = g.d_e * (1.0 + (K - 2) * g.rho_e)
        return cls(sigma=s, J=g.series_length() if J is None else J)

    @property
    def n(self) -> int:
        return self.sigma.size

    def delta_recursive(self, J: Optional[int] = None) -> np.ndarray:
        J = self.J if J is None else J
        x = 1.0 - self.sigma[0] / self.sigma
        m = np.arange(1, J + 1)
        gam = (x[None, :] ** m[:, None]).sum(axis=1)    # gam[m-1] = sum_n x_n^m
        delta = np.empty(J + 1)
        delta[0] = 1.0
        for j in range(J):
            delta[j + 1] = np.dot(gam[:j + 1], delta[j::-1]) / (j + 1)
        return delta

    def delta_geometric(self, J: Optional[int] = None) -> np.ndarray:
        J = self.J if J is None else J
        s = self.sigma
        if not np.allclose(s[:-1], s[0], rtol=1e-12, atol=0.0):
            raise ValueError("geometric weights need all but the largest eigenvalue equal")
        return (1.0 - s[0] / s[-1]) ** np.arange(J + 1)

    @property
    def log_prefactor(self) -> float:
        return float(np.log(self.sigma[0] / self.sigma).sum())

    def tail_weight(self, delta: np.ndarray) -> float:
        """Mixture weight not covered by the truncated ``delta``."""
        return max(0.0, 1.0 - math.exp(self.log_prefactor) * float(delta.sum()))


def correlated_gamma_sum_pdf(s: CorrelatedGammaSum, y, weights: str = "recursive"):
    """Density of the correlated sum as a gamma mixture of scale ``sigma_1``.

    Parameters
    ----------
    s : CorrelatedGammaSum
    y : array_like
        Points ``>= 0``.
    weights : {"recursive", "geometric"}
    """
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("y must be non-negative")
    if weights == "recursive":
        delta = s.delta_recursive()
    elif weights == "geometric":
        delta = s.delta_geometric()
    else:
        raise ValueError(f"unknown weights {weights!r}")
    j = np.arange(delta.size, dtype=float)
    shape = s.n + j
    with np.errstate(divide="ignore"):
        logd = np.log(delta)
    terms = logd + _log_gamma_pdf(y[..., None], shape, s.sigma[0])
    if s.n == 1:
        terms[..., 0] = np.where(y == 0, logd[0] - math.log(s.sigma[0]), terms[..., 0])
    out = np.exp(s.log_prefactor + _sp.logsumexp(terms, axis=-1))
    return float(out) if out.ndim == 0 else out


# -- export --------------------------------------------------------------------

def _flag_string(valid: Optional[Mapping[str, bool]]) -> str:
    if not valid:
        return ""
    return "|".join(f"{k}={int(bool(v))}" for k, v in sorted(valid.items()))


def write_curve_csv(fh, x: Sequence[float], values: Iterable, form: str,
                    valid: Optional[Sequence[Optional[Mapping[str, bool]]]] = None) -> None:
    """Write an analytic sweep as ``x,value,form,valid_flags`` rows.

    ``values`` may hold floats or :class:`TailProbability` objects; for
    the latter the validity flags of their context are used.
    """
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["x", "value", "form", "valid_flags"])
    values = list(values)
    for idx, (xv, v) in enumerate(zip(x, values)):
        flags = valid[idx] if valid is not None else None
        if isinstance(v, TailProbability):
            flags = flags or (v.context.valid if v.context else None)
            v = v.value
        w.writerow([f"{float(xv):.17g}", f"{float(v):.17g}", form, _flag_string(flags)])
