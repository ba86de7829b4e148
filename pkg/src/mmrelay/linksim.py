"""One-trial physics of the MRC/MRT relay link and the Monte Carlo engine.

The six normalized powers of one trial, for probed user ``i``::

    P_se = |g^_i G^H F^H f^_i|^2 / M^4
    P_ie = sum_{k != i} |g_i G^H F^H f_k|^2 / ((K-1) M^3)
    P_ne = ||g_i G^H F^H||^2 / M^3
    P_e1 = (1-P_c)^2 ||G^H F^H||_F^2 / M^3
    P_e2 = (1-P_c) ||g^_i G^H F^H||^2 / M^3
    P_e3 = (1-P_c) ||G^H F^H f^_i||^2 / M^3

where hats mark MMSE estimates and ``G^``, ``F^`` the estimated matrices
(``G^H`` is shorthand for the Hermitian of the estimated relay-destination
matrix). The CSI-error powers are conditional means over the estimation
errors given the estimates.

User indices are 0-based throughout.
"""

from __future__ import annotations

import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special as _sp

from .channel import EstimatedChannel, trial_stream
from .model import NetworkParams

__all__ = [
    "COMPONENTS",
    "SinrComponents",
    "SampleSet",
    "Histogram",
    "EmpiricalStats",
    "amplification_factor_sq",
    "relay_noise_term",
    "empirical_amplification_factor_sq",
    "sinr_components",
    "instantaneous_sinr",
    "sinr_denominator",
    "simulate",
    "empirical_stats",
    "running_moments",
]

COMPONENTS = ("P_se", "P_ie", "P_ne", "P_e1", "P_e2", "P_e3")

# working-set target for one block of trials
_BLOCK_BYTES = 96 * 2**20


@dataclass(frozen=True)
class SinrComponents:
    """Normalized signal, interference, noise and CSI-error powers of one trial.

    ``degenerate`` is set when ``K == 1``: there is no interferer, ``P_ie``
    is reported as 0 and its weight ``K - 1`` in the SINR vanishes anyway.
    """

    P_se: float
    P_ie: float
    P_ne: float
    P_e1: float
    P_e2: float
    P_e3: float
    i: int = 0
    degenerate: bool = False

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, c) for c in COMPONENTS])


def amplification_factor_sq(p: NetworkParams) -> float:
    """Closed-form relay gain ``a_e^2`` normalizing the relay power to ``Q``.

    Lower-order terms in ``M`` are dropped, as in the usual large-array
    approximation.
    """
    M, K, P, Q, Pc = p.M, p.K, p.P, p.Q, p.P_c
    return Q / (P * K * Pc**3 * M**3 * (1.0 + K / (M * Pc) + 1.0 / (P * Pc * M)))


def relay_noise_term(p: NetworkParams, a_e_sq: Optional[float] = None) -> float:
    """Forwarded destination-noise term of the SINR denominator.

    Equals ``1 / (a_e^2 P M^3)``; with the closed-form gain this is
    ``K P_c^3 (1 + K/(M P_c) + 1/(P P_c M)) / Q``.
    """
    if a_e_sq is None:
        M, K, P, Q, Pc = p.M, p.K, p.P, p.Q, p.P_c
        return K * Pc**3 * (1.0 + K / (M * Pc) + 1.0 / (P * Pc * M)) / Q
    return 1.0 / (a_e_sq * p.P * p.M**3)


def _components_batch(F_hat: np.ndarray, F: np.ndarray, G_hat: np.ndarray,
                      g_i: np.ndarray, users: np.ndarray, P_c: float) -> np.ndarray:
    """Components for a stack of trials; returns a (T, 6) array.

    ``F_hat``, ``F`` are (T, M, K); ``G_hat`` is (T, K, M); ``g_i`` is the
    (T, M) true channel row of the probed user ``users[t]``.
    """
    T, M, K = F_hat.shape
    rows = np.arange(T)
    A = F_hat.conj().transpose(0, 2, 1) @ F_hat          # f^_n^H f^_m
    B = G_hat @ G_hat.conj().transpose(0, 2, 1)          # g^_n g^_m^H
    v = (G_hat.conj() @ g_i[..., None])[..., 0]          # g_i G^H
    x = (F_hat.conj() @ v[..., None])[..., 0]            # g_i G^H F^H
    inter = (x[:, None, :] @ F)[:, 0, :]
    inter[rows, users] = 0.0
    out = np.empty((T, 6))
    out[:, 1] = (inter.real**2 + inter.imag**2).sum(axis=1) / (max(K - 1, 1) * M**3)
    out[:, 2] = (x.real**2 + x.imag**2).sum(axis=1) / M**3
    b_i = B[rows, users, :]                              # g^_i g^_n^H
    a_i = A[rows, :, users]                              # f^_n^H f^_i
    s = (b_i * a_i).sum(axis=1)
    out[:, 0] = (s.real**2 + s.imag**2) / M**4
    out[:, 3] = (1.0 - P_c)**2 * (A * B.transpose(0, 2, 1)).sum(axis=(1, 2)).real / M**3
    Ab = (A @ b_i.conj()[..., None])[..., 0]
    out[:, 4] = (1.0 - P_c) * (b_i * Ab).sum(axis=1).real / M**3
    Ba = (B @ a_i[..., None])[..., 0]
    out[:, 5] = (1.0 - P_c) * (a_i.conj() * Ba).sum(axis=1).real / M**3
    return out


def sinr_components(est: EstimatedChannel, p: NetworkParams, i: int = 0) -> SinrComponents:
    """All six normalized powers of one realization for user ``i`` (0-based)."""
    M, K = est.M, est.K
    if (M, K) != (p.M, p.K):
        raise ValueError(f"channel is {M}x{K}, params say {p.M}x{p.K}")
    if not 0 <= i < K:
        raise IndexError(f"user index {i} outside 0..{K - 1}")
    row = _components_batch(est.F_hat[None], est.F[None], est.G_hat[None],
                            est.G[i][None], np.array([i]), est.P_c)[0]
    return SinrComponents(*map(float, row), i=i, degenerate=K == 1)


def sinr_denominator(c, p: NetworkParams, a_e_sq: Optional[float] = None):
    """Denominator of the instantaneous SINR (before the factor ``M P_se``).

    ``c`` is a :class:`SinrComponents` or an (N, 6) component array.
    """
    arr = c.as_array() if isinstance(c, SinrComponents) else np.asarray(c)
    P_se, P_ie, P_ne, e1, e2, e3 = np.moveaxis(arr, -1, 0)
    return ((p.K - 1) * P_ie + P_ne / p.P + e1 + e2 + e3
            + relay_noise_term(p, a_e_sq))


def instantaneous_sinr(c, p: NetworkParams, a_e_sq: Optional[float] = None):
    """Instantaneous SINR (linear) of one trial or an (N, 6) component array.

    The relay-noise term uses the closed-form gain unless ``a_e_sq`` is
    given (for instance an empirical normalization).
    """
    arr = c.as_array() if isinstance(c, SinrComponents) else np.asarray(c)
    sinr = p.M * arr[..., 0] / sinr_denominator(arr, p, a_e_sq)
    return float(sinr) if np.ndim(sinr) == 0 else sinr


# -- Monte Carlo engine --------------------------------------------------------

@dataclass
class SampleSet:
    """Per-trial components and SINR for one parameter point.

    Trial ``t`` is a pure function of ``(seed, t, params, users)``.
    """

    params: NetworkParams
    seed: int
    components: np.ndarray            # (N, 6) in COMPONENTS order
    sinr: np.ndarray                  # (N,)
    users: np.ndarray                 # (N,) probed user of each trial
    user_mode: str = "first"
    a_e_sq: Optional[float] = None    # None: closed-form relay gain

    @property
    def N(self) -> int:
        return self.sinr.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        if name == "sinr":
            return self.sinr
        return self.components[:, COMPONENTS.index(name)]

    def denominators(self) -> np.ndarray:
        return sinr_denominator(self.components, self.params, self.a_e_sq)

    def to_csv(self, fh=None) -> Optional[str]:
        """Write ``trial,P_se,...,P_e3,sinr`` rows (``%.17g`` floats)."""
        buf = fh if fh is not None else io.StringIO()
        buf.write("trial," + ",".join(COMPONENTS) + ",sinr\n")
        table = np.column_stack([self.components, self.sinr])
        for t, row in enumerate(table):
            buf.write(f"{t}," + ",".join(f"{v:.17g}" for v in row) + "\n")
        if fh is None:
            return buf.getvalue()
        return None


def _block_size(M: int, K: int, per_trial_draws: int) -> int:
    # fixed by (M, K) alone so block boundaries never depend on thread count
    per_trial = 16 * (per_trial_draws + 4 * M * K + 2 * K * K) + 64
    return int(max(1, min(4096, _BLOCK_BYTES // per_trial)))


def _resolve_users(users, K: int) -> Tuple[str, Optional[int]]:
    if users in ("first", None):
        return "first", 0
    if users == "random":
        return "random", None
    if users == "all":
        return "all", None
    if isinstance(users, (int, np.integer)) and not isinstance(users, bool):
        if not 0 <= users < K:
            raise IndexError(f"user index {users} outside 0..{K - 1}")
        return "fixed", int(users)
    raise ValueError(f"unknown user mode {users!r}")


def _run_block(p: NetworkParams, seed: int, start: int, stop: int, mode: str,
               fixed: Optional[int], a_e_sq) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    M, K, Pc = p.M, p.K, p.P_c
    T = stop - start
    MK = M * K
    n_err = MK if mode == "all" else M
    n_complex = 3 * MK + n_err
    buf = np.empty((T, 2 * n_complex))
    users = np.empty(T, dtype=np.int64)
    for j in range(T):
        rng = trial_stream(seed, start + j)
        users[j] = rng.integers(K) if mode == "random" else (fixed or 0)
        rng.standard_normal(out=buf[j])
    z = buf.view(np.complex128)
    F_hat = z[:, :MK].reshape(T, M, K)
    E_f = z[:, MK:2 * MK].reshape(T, M, K)
    G_hat = z[:, 2 * MK:3 * MK].reshape(T, K, M)
    err = z[:, 3 * MK:]
    F_hat *= math.sqrt(Pc / 2.0)
    G_hat *= math.sqrt(Pc / 2.0)
    E_f *= math.sqrt((1.0 - Pc) / 2.0)
    err *= math.sqrt((1.0 - Pc) / 2.0)
    F = F_hat - E_f
    if mode != "all":
        g_i = G_hat[np.arange(T), users, :] - err
        comps = _components_batch(F_hat, F, G_hat, g_i, users, Pc)
    else:
        G = G_hat - err.reshape(T, K, M)
        comps = np.zeros((T, 6))
        sinr = np.zeros(T)
        for u in range(K):
            uu = np.full(T, u)
            c = _components_batch(F_hat, F, G_hat, G[:, u, :], uu, Pc)
            comps += c
            sinr += instantaneous_sinr(c, p, a_e_sq)
        return comps / K, sinr / K, np.full(T, -1)
    return comps, instantaneous_sinr(comps, p, a_e_sq), users


def simulate(p: NetworkParams, N: int, seed: int = 0, users="first",
             threads: int = 1, a_e_sq: Optional[float] = None,
             block_size: Optional[int] = None) -> SampleSet:
    """Run ``N`` independent trials at the operating point ``p``.

    Each trial draws fresh estimates and errors by the direct route
    (``F_hat ~ CN(0, P_c)``, errors ``CN(0, 1 - P_c)``) from its own Philox
    stream keyed by ``(seed, trial)``. Only the error row of the probed user
    is drawn for ``G``, which leaves the joint law of every component intact.

    Parameters
    ----------
    p : NetworkParams
    N : int
        Number of trials, at least 1.
    seed : int
    users : {"first", "random", "all"} or int
        Probed user. ``"first"`` is user 0; ``"random"`` draws a uniform
        user per trial; ``"all"`` averages components and SINR over every
        user of a realization (same mean, lower variance, so SCVs and
        histograms then describe the user average).
    threads : int
        Worker threads. Results are bitwise identical for any value.
    a_e_sq : float, optional
        Relay gain for the SINR; the closed form is used when omitted.
    block_size : int, optional
        Trials per vectorized block; does not change results.
    """
    if N < 1:
        raise ValueError("need at least one trial")
    if threads < 1:
        raise ValueError("threads must be >= 1")
    mode, fixed = _resolve_users(users, p.K)
    n_err = p.M * p.K if mode == "all" else p.M
    bs = block_size or _block_size(p.M, p.K, 3 * p.M * p.K + n_err)
    comps = np.empty((N, 6))
    sinr = np.empty(N)
    user_idx = np.empty(N, dtype=np.int64)
    starts = list(range(0, N, bs))

    def work(start):
        stop = min(start + bs, N)
        try:
            c, s, u = _run_block(p, seed, start, stop, mode, fixed, a_e_sq)
        except MemoryError as exc:
            raise MemoryError(
                f"block of {stop - start} trials at M={p.M}, K={p.K} does not fit") from exc
        comps[start:stop] = c
        sinr[start:stop] = s
        user_idx[start:stop] = u

    if threads == 1:
        for st in starts:
            work(st)
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            # list() re-raises the first worker failure
            list(ex.map(work, starts))
    return SampleSet(params=p, seed=seed, components=comps, sinr=sinr,
                     users=user_idx, user_mode=mode, a_e_sq=a_e_sq)


def empirical_amplification_factor_sq(p: NetworkParams, N: int, seed: int = 0) -> float:
    """Monte Carlo relay gain: ``Q / E{||G^H F^H x||^2}``.

    The expectation over symbols and relay noise is taken analytically,
    ``E_s,n ||G^H F^H x||^2 = P ||G^H F^H F||_F^2 + ||G^H F^H||_F^2``, and
    the channel average by simulation.
    """
    M, K, Pc = p.M, p.K, p.P_c
    MK = M * K
    bs = max(1, min(2048, _BLOCK_BYTES // (16 * (6 * MK))))
    total = 0.0
    for start in range(0, N, bs):
        T = min(bs, N - start)
        buf = np.empty((T, 6 * MK))
        for j in range(T):
            trial_stream(seed, start + j).standard_normal(out=buf[j])
        z = buf.view(np.complex128)
        F_hat = z[:, :MK].reshape(T, M, K) * math.sqrt(Pc / 2.0)
        E_f = z[:, MK:2 * MK].reshape(T, M, K) * math.sqrt((1.0 - Pc) / 2.0)
        G_hat = z[:, 2 * MK:3 * MK].reshape(T, K, M) * math.sqrt(Pc / 2.0)
        F = F_hat - E_f
        FhH = F_hat.conj().transpose(0, 2, 1)
        A = FhH @ F_hat
        B = G_hat @ G_hat.conj().transpose(0, 2, 1)
        W = FhH @ F
        sig = (W.conj() * (B @ W)).sum(axis=(1, 2)).real
        noise = (A * B.transpose(0, 2, 1)).sum(axis=(1, 2)).real
        total += float((p.P * sig + noise).sum())
    return p.Q / (total / N)


# -- statistics ----------------------------------------------------------------

def running_moments(x: np.ndarray, chunk: int = 1 << 16) -> Tuple[int, float, float]:
    """Count, mean and (population) variance in one pass over chunks.

    Chunk moments are combined with the pairwise update of Chan et al.,
    which avoids the cancellation of the naive sum-of-squares formula.
    """
    x = np.asarray(x, dtype=float).ravel()
    n, mean, m2 = 0, 0.0, 0.0
    for start in range(0, x.size, chunk):
        c = x[start:start + chunk]
        nc = c.size
        mc = float(c.mean())
        m2c = float(((c - mc) ** 2).sum())
        tot = n + nc
        delta = mc - mean
        mean += delta * nc / tot
        m2 += m2c + delta * delta * n * nc / tot
        n = tot
    if n == 0:
        raise ValueError("empty sample")
    return n, mean, m2 / n


@dataclass
class Histogram:
    quantity: str
    edges: np.ndarray
    counts: np.ndarray

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.counts.sum() * np.diff(self.edges))


@dataclass
class EmpiricalStats:
    """Moments, histogram, outage, rate and ABER estimated from a SampleSet."""

    n: int
    mean: Dict[str, float]
    variance: Dict[str, float]
    scv: Dict[str, float]
    histogram: Histogram
    outage: Dict[float, float]
    rate: float
    rate_se: float
    aber: float
    aber_se: float
    modulation: Tuple[float, float]
    params: Dict[str, float] = field(default_factory=dict)
    seed: Optional[int] = None

    def standard_error(self, name: str) -> float:
        return math.sqrt(self.variance[name] / self.n)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "variance": self.variance,
            "scv": self.scv,
            "histogram": {
                "quantity": self.histogram.quantity,
                "edges": self.histogram.edges.tolist(),
                "counts": self.histogram.counts.tolist(),
            },
            "outage": {repr(k): v for k, v in self.outage.items()},
            "rate": self.rate,
            "rate_se": self.rate_se,
            "aber": self.aber,
            "aber_se": self.aber_se,
            "modulation": list(self.modulation),
            "params": self.params,
            "seed": self.seed,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.as_dict(), **kw)


def empirical_stats(s: SampleSet, thresholds: Sequence[float] = (),
                    modulation: Tuple[float, float] = (0.5, 1.0),
                    histogram: str = "sinr",
                    bins: Union[str, int, np.ndarray] = "fd") -> EmpiricalStats:
    """Summarize a :class:`SampleSet`.

    Outage at each threshold is the fraction of trials with SINR strictly
    below it. The ABER is the sample mean of ``A erfc(sqrt(B SINR))`` and
    the rate ``0.5 * mean(log2(1 + SINR))``.
    """
    if s.N == 0:
        raise ValueError("empty sample set")
    A, B = modulation
    mean, var, scv = {}, {}, {}
    for name in COMPONENTS + ("sinr",):
        _, m, v = running_moments(s[name])
        mean[name], var[name] = m, v
        scv[name] = v / m**2 if m > 0 else float("nan")
    x = s[histogram]
    edges = np.histogram_bin_edges(x, bins=bins) if not isinstance(bins, np.ndarray) else bins
    counts, edges = np.histogram(x, bins=edges)
    outage = {float(g): float(np.count_nonzero(s.sinr < g)) / s.N for g in thresholds}
    rate_samples = 0.5 * np.log2(1.0 + s.sinr)
    n, rate, rvar = running_moments(rate_samples)
    ber_samples = A * _sp.erfc(np.sqrt(B * s.sinr))
    _, aber, bvar = running_moments(ber_samples)
    return EmpiricalStats(
        n=s.N, mean=mean, variance=var, scv=scv,
        histogram=Histogram(histogram, edges, counts),
        outage=outage, rate=rate, rate_se=math.sqrt(rvar / n),
        aber=aber, aber_se=math.sqrt(bvar / n), modulation=(A, B),
        params=s.params.as_dict(), seed=s.seed)
