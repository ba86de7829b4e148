"""Acceptance criteria as runnable checks with machine-readable verdicts.

Each criterion produces a :class:`Verdict` built from individual
:class:`Check` results. Failures are verdicts, never exceptions.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy import integrate, stats

from .. import analytics as an
from ..linksim import empirical_stats, running_moments, simulate
from ..model import NetworkParams, realize_parameters, scaling_exponent
from .experiments import (DETERMINISTIC_SCENARIOS, SWEEP_M_GRID, SCALING_CASES, TAIL_GAMMA,
                          TAIL_M_GRID, SampleCache, figure_dataset, tail_params)

__all__ = ["Check", "Verdict", "SUITES", "run_suite", "run_all", "loglog_slope"]

Tamper = Optional[Callable[[an.GammaMixParams], an.GammaMixParams]]

SEED = 20240601


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    bound: str
    detail: str = ""


@dataclass
class Verdict:
    criterion: int
    title: str
    checks: List[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def line(self) -> str:
        bad = [c.name for c in self.checks if not c.passed]
        tail = f" (failed: {', '.join(bad)})" if bad else ""
        return (f"criterion {self.criterion} [{'PASS' if self.passed else 'FAIL'}] "
                f"{self.title}: {sum(c.passed for c in self.checks)}/{len(self.checks)} "
                f"checks, {self.seconds:.1f}s{tail}")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def _n(default: int, trials: Optional[int]) -> int:
    return default if trials is None else trials


def _mix(p: NetworkParams, tamper: Tamper) -> an.GammaMixParams:
    g = an.gamma_mix_params(p)
    return tamper(g) if tamper is not None else g


# -- criteria ------------------------------------------------------------------

def scaling(**_) -> Verdict:
    v = Verdict(1, "scaling-law table")
    t0 = time.perf_counter()
    for name, (e, expected) in SCALING_CASES.items():
        got = scaling_exponent(e).r_s
        v.checks.append(Check(name, got == expected, float(got), f"== {expected}"))
    dt = time.perf_counter() - t0
    v.checks.append(Check("runtime", dt < 1.0, dt, "< 1 s"))
    return v


def slopes(trials=None, seed=SEED, threads=1, cache=None, **_) -> Verdict:
    v = Verdict(2, "mean-SINR slopes")
    N = _n(10_000, trials)
    for name, (e, r_s) in SCALING_CASES.items():
        tol = 0.1 if name in ("case1", "case2", "case3") else 0.15
        means = [float(np.mean(cache.get(realize_parameters(e, M), N, seed, threads).sinr))
                 for M in SWEEP_M_GRID]
        sl = loglog_slope(SWEEP_M_GRID, means)
        v.checks.append(Check(name, abs(sl - float(r_s)) <= tol, sl,
                              f"{float(r_s)} +/- {tol}",
                              "means " + ", ".join(f"{m:.4g}" for m in means)))
    return v


def moments(trials=None, seed=SEED, threads=1, cache=None, **_) -> Verdict:
    v = Verdict(3, "component moments")
    N = _n(100_000, trials)
    for M in (128, 256):
        for K in (8, 16):
            for Pc in (0.5, 0.8, 0.95):
                p = NetworkParams.from_csi_quality(M, K, 10.0, 10.0, Pc)
                s = cache.get(p, N, seed, threads)
                th = an.component_moments(p)
                for c in th.mean:
                    n, m, var = running_moments(s[c])
                    z = (m - th.mean[c]) / math.sqrt(var / n)
                    v.checks.append(Check(f"mean {c} M={M} K={K} Pc={Pc}", abs(z) <= 3.0,
                                          z, "|z| <= 3", f"emp {m:.6g} vs {th.mean[c]:.6g}"))
                    scv = var / m**2
                    rel = scv / th.scv[c] - 1.0
                    v.checks.append(Check(f"scv {c} M={M} K={K} Pc={Pc}", abs(rel) <= 0.15,
                                          rel, "|rel| <= 0.15",
                                          f"emp {scv:.4g} vs {th.scv[c]:.4g}"))
    return v


def bound(trials=None, seed=SEED, threads=1, cache=None, **_) -> Verdict:
    v = Verdict(4, "rate lower bound")
    N = _n(10_000, trials)
    z99 = stats.norm.ppf(0.99)
    for M in (100, 200):
        for K in range(2, 21):
            p = NetworkParams.from_csi_quality(M, K, 1.0, 1.0, 0.5)
            st = empirical_stats(cache.get(p, N, seed, threads))
            clb = an.rate_lower_bound(p)[1]
            lo = st.rate - z99 * st.rate_se
            v.checks.append(Check(f"above M={M} K={K}", lo >= clb, lo - clb,
                                  "rate - z99*se >= C_LB"))
            if K >= 5:
                gap = st.rate - clb
                v.checks.append(Check(f"gap M={M} K={K}", gap < 0.1, gap, "< 0.1 bit"))
    return v


def pdf(trials=None, seed=SEED, threads=1, cache=None, tamper: Tamper = None, **_) -> Verdict:
    v = Verdict(5, "interference pdf")
    N = _n(100_000, trials)
    for K in (10, 20):
        p = NetworkParams.from_csi_quality(200, K, 10.0, 10.0, 0.8)
        g = _mix(p, tamper)
        s = cache.get(p, N, seed, threads)
        ks = stats.kstest(s["P_ie"], lambda y: an.interference_cdf(y, g)).statistic
        v.checks.append(Check(f"KS K={K}", ks < 0.02, ks, "< 0.02"))
        y = np.linspace(0.0, 4.0 * g.mean, 50)
        diff = np.max(np.abs(an.interference_pdf(y, g, "series", J=200)
                             - an.interference_pdf(y, g, "closed")))
        v.checks.append(Check(f"series-closed K={K}", diff < 1e-10, diff, "< 1e-10"))
        area = integrate.quad(lambda t: an.interference_pdf(t, g), 0, np.inf,
                              limit=400, epsabs=1e-13, epsrel=1e-12)[0]
        v.checks.append(Check(f"normalization K={K}", abs(area - 1) <= 1e-6, area - 1,
                              "|area - 1| <= 1e-6"))
    return v


def _tail_samples(K, M, N, seed, threads, cache):
    return cache.get(tail_params(K, M), N, seed, threads)


EXTENDED_M = (1_000, 2_000, 5_000, 10_000, 20_000, 50_000, 100_000)


def outage(trials=None, seed=SEED, threads=1, cache=None, tamper: Tamper = None, **_) -> Verdict:
    v = Verdict(6, "outage probability")
    N = _n(1_000_000, trials)
    for K, grid in TAIL_M_GRID.items():
        for M in grid:
            p = tail_params(K, M)
            g = _mix(p, tamper)
            s = _tail_samples(K, M, N, seed, threads, cache)
            emp = float(np.count_nonzero(s.sinr < TAIL_GAMMA)) / N
            if not 1e-3 <= emp <= 0.5:
                continue
            ex = an.outage_probability(TAIL_GAMMA, p, "exact", g).value
            rel = ex / emp - 1.0
            v.checks.append(Check(f"exact vs MC K={K} M={M}", abs(rel) <= 0.2, rel,
                                  "|rel| <= 0.2", f"analytic {ex:.4g} vs MC {emp:.4g}"))
        # high-SNR form against the exact form where its conditions hold
        n_valid = 0
        for M in grid + EXTENDED_M:
            p = tail_params(K, M)
            g = _mix(p, tamper)
            ex = an.outage_probability(TAIL_GAMMA, p, "exact", g)
            if not all(ex.context.valid.values()):
                continue
            n_valid += 1
            hs = an.outage_probability(TAIL_GAMMA, p, "high_snr", g)
            ratio = math.exp(hs.log_value - ex.log_value)
            v.checks.append(Check(f"high-snr/exact K={K} M={M}", 0.8 <= ratio <= 1.2,
                                  ratio, "in [0.8, 1.2]"))
        if n_valid == 0:
            v.checks.append(Check(f"high-snr regime K={K}", False, 0.0,
                                  "some valid M", "no grid point meets the conditions"))
    return v


def aber(trials=None, seed=SEED, threads=1, cache=None, tamper: Tamper = None, **_) -> Verdict:
    v = Verdict(7, "average bit error rate")
    N = _n(1_000_000, trials)
    A, B = an.BPSK
    for K, grid in TAIL_M_GRID.items():
        for M in grid:
            p = tail_params(K, M)
            g = _mix(p, tamper)
            st = empirical_stats(_tail_samples(K, M, N, seed, threads, cache), modulation=(A, B))
            if st.aber < 1e-5:
                continue
            th = an.aber(p, A, B, g).value
            rel = th / st.aber - 1.0
            v.checks.append(Check(f"closed form vs MC K={K} M={M}", abs(rel) <= 0.25, rel,
                                  "|rel| <= 0.25", f"analytic {th:.4g} vs MC {st.aber:.4g}"))
            gstar = an.aber_outage_threshold(p, B, g)
            lhs = an.aber(p, A, B, g).log_value
            rhs = math.log(A) + an.outage_probability(gstar, p, "high_snr", g).log_value
            err = abs(lhs - rhs)
            v.checks.append(Check(f"bridge K={K} M={M}", err <= 1e-12 * max(1.0, abs(lhs)),
                                  err, "|log diff| <= 1e-12 rel"))
    return v


def determinism(trials=None, seed=SEED, threads=1, cache=None, **_) -> Verdict:
    v = Verdict(8, "determinism regimes")
    N = _n(10_000, trials)
    for name, e in DETERMINISTIC_SCENARIOS.items():
        scv = []
        for M in SWEEP_M_GRID:
            d = cache.get(realize_parameters(e, M), N, seed, threads).denominators()
            _, m, var = running_moments(d)
            scv.append(var / m**2)
        sl = loglog_slope(SWEEP_M_GRID, scv)
        v.checks.append(Check(f"{name} denominator SCV slope", sl <= -0.8, sl, "<= -0.8",
                              "scv " + ", ".join(f"{x:.3g}" for x in scv)))
    e4 = SCALING_CASES["case4"][0]
    scv = []
    for M in SWEEP_M_GRID:
        s = cache.get(realize_parameters(e4, M), N, seed, threads)
        _, m, var = running_moments(s.sinr)
        scv.append(var / m**2)
    sl = loglog_slope(SWEEP_M_GRID, scv)
    v.checks.append(Check("case4 SINR SCV slope", abs(sl) <= 0.15, sl, "|slope| <= 0.15",
                          "scv " + ", ".join(f"{x:.3g}" for x in scv)))
    p = realize_parameters(e4, 200)
    s = cache.get(p, _n(100_000, trials), seed, threads)
    _, m, var = running_moments(s["P_ie"])
    rel = (var / m**2) * (p.K - 1) - 1.0
    v.checks.append(Check("case4 P_ie SCV vs 1/(K-1)", abs(rel) <= 0.15, rel, "|rel| <= 0.15",
                          f"emp {var / m**2:.4g} vs {1 / (p.K - 1):.4g}"))
    return v


def repro(trials=None, seed=SEED, threads=1, **_) -> Verdict:
    v = Verdict(9, "reproducibility")
    N = _n(2_000, trials)
    p = NetworkParams.from_csi_quality(64, 6, 10.0, 10.0, 0.9)
    outs = [simulate(p, N, seed=seed, threads=t).to_csv() for t in (1, 3, 1)]
    v.checks.append(Check("sample CSV across threads", outs[0] == outs[1], 0.0, "identical"))
    v.checks.append(Check("sample CSV rerun", outs[0] == outs[2], 0.0, "identical"))
    figs = [figure_dataset("fig2", N=max(200, N // 10), seed=seed, threads=t).to_csv()
            for t in (1, 4)]
    v.checks.append(Check("figure CSV across threads", figs[0] == figs[1], 0.0, "identical"))
    return v


SUITES: Dict[str, Callable[..., Verdict]] = {
    "scaling": scaling, "slopes": slopes, "moments": moments, "bound": bound,
    "pdf": pdf, "outage": outage, "aber": aber, "determinism": determinism,
    "repro": repro,
}


def run_suite(name: str, trials: Optional[int] = None, seed: int = SEED, threads: int = 1,
              cache: Optional[SampleCache] = None, tamper: Tamper = None) -> Verdict:
    """Run one named criterion. ``trials`` overrides every trial count
    (for quick smoke runs); by default the stated counts are used."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    cache = SampleCache() if cache is None else cache
    t0 = time.perf_counter()
    v = SUITES[name](trials=trials, seed=seed, threads=threads, cache=cache, tamper=tamper)
    v.seconds = time.perf_counter() - t0
    return v


def run_all(trials=None, seed=SEED, threads=1, tamper: Tamper = None) -> List[Verdict]:
    cache = SampleCache()
    return [run_suite(n, trials, seed, threads, cache, tamper) for n in SUITES]


def verdicts_json(verdicts: List[Verdict]) -> str:
    return json.dumps([v.as_dict() for v in verdicts], indent=2)


def scale_d_e(factor: float):
    """Tamper hook multiplying ``d_e``; a negative control for the suites."""
    return lambda g: replace(g, d_e=g.d_e * factor)
