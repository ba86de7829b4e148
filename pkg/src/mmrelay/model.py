"""Network parameters, CSI quality and exponent-level scaling algebra.

Everything that reasons about how ``K``, ``1/P``, ``1/Q`` and ``1/P_c``
grow with the relay antenna count ``M`` lives here. Exponents are kept as
:class:`fractions.Fraction` so that boundary cases (equalities) are decided
exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Union

__all__ = [
    "NetworkParams",
    "ScalingExponents",
    "SinrScaleReport",
    "BindingTerm",
    "csi_quality",
    "training_energy",
    "scaling_exponent",
    "is_favourable",
    "is_asymptotically_deterministic",
    "linear_sinr_condition",
    "realize_parameters",
    "as_fraction",
]

Rational = Union[Fraction, int, float, str]

# tolerance for the P_c <-> (tau, P_t) round trip
_PC_RTOL = 1e-12


def as_fraction(x: Rational) -> Fraction:
    """Convert ``x`` to an exact rational.

    Floats are converted through their shortest decimal repr, so ``0.1``
    becomes ``1/10`` rather than the nearest binary fraction.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not exponents")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite exponent {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as a rational")


def training_energy(tau: int, P_t: float) -> float:
    """Total training energy ``E_t = tau * P_t``."""
    return tau * P_t


def csi_quality(tau: int, P_t: float) -> float:
    """CSI quality ``P_c = tau P_t / (tau P_t + 1)``.

    Parameters
    ----------
    tau : int
        Pilot length, at least 1.
    P_t : float
        Training power (linear), strictly positive. ``inf`` gives 1.

    Returns
    -------
    float
        Variance of one estimated channel entry. Depends on the inputs
        only through the product ``tau * P_t``.
    """
    if int(tau) != tau or tau < 1:
        raise ValueError(f"pilot length must be a positive integer, got {tau!r}")
    if not P_t > 0:
        raise ValueError(f"training power must be positive, got {P_t!r}")
    E_t = training_energy(tau, P_t)
    if math.isinf(E_t):
        return 1.0
    return E_t / (E_t + 1.0)


@dataclass(frozen=True)
class NetworkParams:
    """A concrete operating point of the relay network.

    All powers are linear scale. ``P_c`` is derived from ``(tau, P_t)``;
    use :meth:`from_csi_quality` to start from a target ``P_c`` instead.
    ``P_t = inf`` encodes perfect CSI (``P_c = 1``).
    """

    M: int
    K: int
    P: float
    Q: float
    tau: int
    P_t: float
    P_c: float = field(default=float("nan"))

    def __post_init__(self):
        for name in ("M", "K", "tau"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.K > self.M:
            raise ValueError(f"need M >= K, got M={self.M}, K={self.K}")
        if self.tau < self.K:
            raise ValueError(f"pilot length tau={self.tau} shorter than K={self.K}")
        for name in ("P", "Q", "P_t"):
            v = float(getattr(self, name))
            if not v > 0:
                raise ValueError(f"{name} must be positive, got {v!r}")
            object.__setattr__(self, name, v)
        if not math.isfinite(self.P) or not math.isfinite(self.Q):
            raise ValueError("P and Q must be finite")
        derived = csi_quality(self.tau, self.P_t)
        if math.isnan(self.P_c):
            object.__setattr__(self, "P_c", derived)
        else:
            pc = float(self.P_c)
            if abs(pc - derived) > _PC_RTOL * max(1.0, abs(pc)):
                raise ValueError(
                    f"P_c={pc!r} inconsistent with tau*P_t={self.tau * self.P_t!r}")
            object.__setattr__(self, "P_c", pc)
        if not 0.0 < self.P_c <= 1.0:
            raise ValueError(f"P_c must lie in (0, 1], got {self.P_c!r}")

    @classmethod
    def from_csi_quality(cls, M: int, K: int, P: float, Q: float, P_c: float,
                         tau: Optional[int] = None) -> "NetworkParams":
        """Build parameters from a target CSI quality.

        The training configuration is synthesised with ``tau = K`` (or the
        given ``tau``) and ``P_t`` solved from ``P_c``. The stored ``P_c``
        is exactly the requested value.
        """
        P_c = float(P_c)
        if not 0.0 < P_c <= 1.0:
            raise ValueError(f"P_c must lie in (0, 1], got {P_c!r}")
        tau = int(K) if tau is None else int(tau)
        P_t = math.inf if P_c == 1.0 else P_c / ((1.0 - P_c) * tau)
        return cls(M=M, K=K, P=P, Q=Q, tau=tau, P_t=P_t, P_c=P_c)

    @property
    def E_t(self) -> float:
        return training_energy(self.tau, self.P_t)

    def replace(self, **changes) -> "NetworkParams":
        """Copy with some fields changed; ``P_c`` may be given directly."""
        if "P_c" in changes:
            kw = dict(M=self.M, K=self.K, P=self.P, Q=self.Q, tau=self.tau)
            kw.update(changes)
            return NetworkParams.from_csi_quality(**kw)
        kw = dict(M=self.M, K=self.K, P=self.P, Q=self.Q, tau=self.tau,
                  P_t=self.P_t)
        kw.update(changes)
        return NetworkParams(**kw)

    def as_dict(self) -> dict:
        return dict(M=self.M, K=self.K, P=self.P, Q=self.Q, tau=self.tau,
                    P_t=self.P_t, P_c=self.P_c)


@dataclass(frozen=True)
class ScalingExponents:
    """Growth exponents of ``K``, ``1/P``, ``1/Q`` and ``1/P_c`` in ``M``.

    ``K = k0 M**r_k``, ``1/P = p0 M**r_p``, ``1/Q = q0 M**r_q`` and
    ``1/P_c = c0 M**r_c``. Exponents are exact rationals in ``[0, 1]``.
    """

    r_k: Fraction = Fraction(0)
    r_p: Fraction = Fraction(0)
    r_q: Fraction = Fraction(0)
    r_c: Fraction = Fraction(0)
    k0: float = 1.0
    p0: float = 1.0
    q0: float = 1.0
    c0: float = 1.0

    def __post_init__(self):
        for name in ("r_k", "r_p", "r_q", "r_c"):
            v = as_fraction(getattr(self, name))
            if not 0 <= v <= 1:
                raise ValueError(f"exponent {name}={v} outside [0, 1]")
            object.__setattr__(self, name, v)
        for name in ("k0", "p0", "q0", "c0"):
            v = float(getattr(self, name))
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"base constant {name} must be positive, got {v!r}")
            object.__setattr__(self, name, v)

    @property
    def r_s(self) -> Fraction:
        return 1 - self.r_c - max(self.r_p, self.r_k + self.r_q)


class BindingTerm(str, Enum):
    SOURCE_POWER = "source-power"
    RELAY_PER_USER_POWER = "relay-per-user-power"


@dataclass(frozen=True)
class SinrScaleReport:
    r_s: Fraction
    favourable: bool
    deterministic_sufficient: bool
    linear_regime: bool
    binding_term: BindingTerm

    def as_dict(self) -> dict:
        return dict(r_s=str(self.r_s), favourable=self.favourable,
                    deterministic_sufficient=self.deterministic_sufficient,
                    linear_regime=self.linear_regime,
                    binding_term=self.binding_term.value)


def _exponents(e) -> ScalingExponents:
    if not isinstance(e, ScalingExponents):
        raise TypeError(f"expected ScalingExponents, got {type(e).__name__}")
    return e


def scaling_exponent(e: ScalingExponents) -> SinrScaleReport:
    """SINR growth exponent ``r_s = 1 - r_c - max(r_p, r_k + r_q)``.

    Ties between the source-power and relay-per-user-power exponents are
    reported as relay-per-user-power; ``r_s`` does not depend on the label.
    """
    e = _exponents(e)
    relay = e.r_k + e.r_q
    binding = (BindingTerm.SOURCE_POWER if e.r_p > relay
               else BindingTerm.RELAY_PER_USER_POWER)
    r_s = e.r_s
    return SinrScaleReport(
        r_s=r_s,
        favourable=r_s >= 0,
        deterministic_sufficient=is_asymptotically_deterministic(e, r_s),
        linear_regime=linear_sinr_condition(e),
        binding_term=binding,
    )


def is_favourable(e: ScalingExponents) -> bool:
    """True iff ``r_c + max(r_p, r_k + r_q) <= 1`` (SINR non-decreasing in M)."""
    e = _exponents(e)
    return e.r_c + max(e.r_p, e.r_k + e.r_q) <= 1


def is_asymptotically_deterministic(e: ScalingExponents,
                                    r_s: Optional[Rational] = None) -> bool:
    """Sufficient condition for an asymptotically deterministic SINR.

    Parameters
    ----------
    e : ScalingExponents
    r_s : rational, optional
        SINR exponent to test. Defaults to the value implied by ``e``;
        a value supplied independently is checked against the first
        constraint like any other.
    """
    e = _exponents(e)
    r_s = e.r_s if r_s is None else as_fraction(r_s)
    return (r_s + e.r_c + max(e.r_p, e.r_k + e.r_q) == 1
            and 2 * r_s + 2 * e.r_c + e.r_k <= 1
            and 2 * r_s + 3 * e.r_c + 2 * e.r_p <= 2)


def linear_sinr_condition(e: ScalingExponents) -> bool:
    """Average SINR grows linearly in M iff every exponent is zero."""
    e = _exponents(e)
    return e.r_c == e.r_q == e.r_p == e.r_k == 0


def realize_parameters(e: ScalingExponents, M: int) -> NetworkParams:
    """Concrete parameters of the scaling model at antenna count ``M``.

    ``K`` is floored (minimum 1) and ``P_c`` is clamped to ``(0, 1]``. The
    training configuration uses ``tau = K``.
    """
    e = _exponents(e)
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M!r}")
    M = int(M)
    # guard the floor against 9.999999 style round-off
    K = max(1, math.floor(e.k0 * M ** float(e.r_k) + 1e-9))
    if K > M:
        raise ValueError(f"realised K={K} exceeds M={M}")
    P = 1.0 / (e.p0 * M ** float(e.r_p))
    Q = 1.0 / (e.q0 * M ** float(e.r_q))
    P_c = min(1.0, 1.0 / (e.c0 * M ** float(e.r_c)))
    return NetworkParams.from_csi_quality(M=M, K=K, P=P, Q=Q, P_c=P_c)
