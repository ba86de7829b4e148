"""Scenario catalogue, experiment runner and figure datasets."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .. import __version__
from .. import analytics as an
from ..linksim import SampleSet, empirical_stats, simulate
from ..model import NetworkParams, ScalingExponents, realize_parameters
from .config import ExperimentConfig, db_to_linear

__all__ = [
    "SCALING_CASES",
    "DETERMINISTIC_SCENARIOS",
    "FIGURES",
    "ResultRecord",
    "SampleCache",
    "run",
    "analyze",
    "figure_dataset",
    "write_dataset",
]

F = Fraction

# the five network settings of the mean-SINR study, with their SINR exponent
SCALING_CASES: Dict[str, Tuple[ScalingExponents, Fraction]] = {
    "case1": (ScalingExponents(r_k=1, k0=0.1, p0=0.1, q0=0.1, c0=1.25), F(0)),
    "case2": (ScalingExponents(r_c=1, c0=0.01, k0=10, p0=0.1, q0=0.1), F(0)),
    "case3": (ScalingExponents(r_k=F(1, 2), r_q=F(1, 2), k0=1, q0=1, p0=0.1, c0=1.25), F(0)),
    "case4": (ScalingExponents(k0=20, p0=1, q0=1, c0=1.25), F(1)),
    "case5": (ScalingExponents(r_c=F(1, 2), c0=0.1, k0=20, p0=0.1, q0=0.1), F(1, 2)),
}

# exponent tuples meeting the sufficient condition for a deterministic SINR
DETERMINISTIC_SCENARIOS: Dict[str, ScalingExponents] = {
    # constant K and CSI quality, source power falling as 1/sqrt(M)
    "scenario1": ScalingExponents(r_p=F(1, 2), k0=4, p0=10, q0=0.1, c0=1 / 0.95),
    # CSI quality and relay power both falling as 1/sqrt(M)
    "scenario2b": ScalingExponents(r_c=F(1, 2), r_p=F(1, 4), r_q=F(1, 2),
                                   k0=4, p0=1, q0=1, c0=0.125),
}

SWEEP_M_GRID = (64, 128, 256, 512)
TAIL_M_GRID = {8: (100, 150, 200, 250), 12: (170, 220, 270, 320)}
TAIL_POWER = db_to_linear(10.0)
TAIL_GAMMA = db_to_linear(8.0)
TAIL_PC = 0.95

DEFAULT_TRIALS = {"fig1": 10_000, "fig2": 10_000, "fig3": 100_000,
                  "fig4": 1_000_000, "fig5": 1_000_000}


class SampleCache:
    """Memoizes :func:`simulate` on ``(params, N, seed)``.

    Figures that share operating points (outage and ABER) reuse samples.
    Thread count is not part of the key since it never changes results.
    """

    def __init__(self):
        self._store: Dict[tuple, SampleSet] = {}

    def get(self, p: NetworkParams, N: int, seed: int, threads: int = 1) -> SampleSet:
        key = (tuple(sorted(p.as_dict().items())), N, seed)
        if key not in self._store:
            self._store[key] = simulate(p, N, seed=seed, threads=threads)
        return self._store[key]

    def clear(self):
        self._store.clear()


@dataclass
class ResultRecord:
    """One grid point of an experiment.

    Analytic entries are keyed ``quantity:form``, for instance
    ``outage:exact`` or ``rate:jensen_lb``.
    """

    scenario: str
    M: int
    params: Dict[str, float]
    empirical: Dict[str, object]
    analytic: Dict[str, float]
    flags: Dict[str, bool]
    wall_clock: float
    seed: int
    N: int

    def as_dict(self) -> dict:
        return asdict(self)


def _analytic_values(p: NetworkParams, gamma_th: Sequence[float],
                     modulation) -> Tuple[Dict[str, float], Dict[str, bool]]:
    vals: Dict[str, float] = {}
    flags: Dict[str, bool] = {}
    tilde, clb = an.rate_lower_bound(p)
    vals["sinr:jensen_lb"] = tilde
    vals["rate:jensen_lb"] = clb
    if p.K >= 2:
        m = an.component_moments(p) if p.M >= 64 else None
        if m is not None:
            vals["mean_P_ie:large_M"] = m.mean["P_ie"]
        mean_ie = p.P_c**3 * (2 + p.K / (p.M * p.P_c))
        vals["sinr:linear_regime_at_mean"] = an.linear_regime_sinr(mean_ie, p)
        g = an.gamma_mix_params(p)
        for gt in gamma_th:
            for form in ("exact", "high_snr"):
                o = an.outage_probability(gt, p, form, g)
                vals[f"outage:{form}@{gt:.17g}"] = o.value
                vals[f"log_outage:{form}@{gt:.17g}"] = o.log_value
            for k, v in o.context.valid.items():
                flags[f"{k}@{gt:.17g}"] = v
        A, B = modulation
        a = an.aber(p, A, B, g)
        vals["aber:high_snr"] = a.value
        vals["log_aber:high_snr"] = a.log_value
        for k, v in a.context.valid.items():
            flags[f"aber_{k}"] = v
    return vals, flags


def run(config: ExperimentConfig, threads: int = 1,
        cache: Optional[SampleCache] = None,
        on_samples: Optional[Callable[[int, SampleSet], None]] = None) -> List[ResultRecord]:
    """Simulate and evaluate the analytics at every ``M`` of the grid."""
    records = []
    for M in config.M:
        t0 = time.perf_counter()
        p = config.params_at(M)
        if cache is not None and config.users == "first":
            s = cache.get(p, config.N, config.seed, threads)
        else:
            s = simulate(p, config.N, seed=config.seed, users=config.users, threads=threads)
        st = empirical_stats(s, config.gamma_th, config.modulation)
        if on_samples is not None:
            on_samples(M, s)
        vals, flags = _analytic_values(p, config.gamma_th, config.modulation)
        emp = {
            "mean": st.mean, "scv": st.scv, "rate": st.rate, "rate_se": st.rate_se,
            "aber": st.aber, "aber_se": st.aber_se,
            "outage": {f"{k:.17g}": v for k, v in st.outage.items()},
        }
        records.append(ResultRecord(
            scenario=config.scenario, M=M, params=p.as_dict(), empirical=emp,
            analytic=vals, flags=flags, wall_clock=time.perf_counter() - t0,
            seed=config.seed, N=config.N))
    return records


def analyze(config: ExperimentConfig) -> List[ResultRecord]:
    """Analytic values only, no simulation."""
    out = []
    for M in config.M:
        p = config.params_at(M)
        vals, flags = _analytic_values(p, config.gamma_th, config.modulation)
        out.append(ResultRecord(config.scenario, M, p.as_dict(), {}, vals, flags,
                                0.0, config.seed, 0))
    return out


# -- figure datasets -----------------------------------------------------------

@dataclass
class Dataset:
    name: str
    header: List[str]
    rows: List[list]
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def column(self, name: str) -> list:
        i = self.header.index(name)
        return [r[i] for r in self.rows]


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _meta(name, N, seed, points):
    return {"figure": name, "N": N, "seed": seed, "version": __version__,
            "points": points}


def _fig1(N, seed, threads, cache):
    rows, points = [], []
    for name, (e, _) in SCALING_CASES.items():
        for M in SWEEP_M_GRID:
            p = realize_parameters(e, M)
            s = cache.get(p, N, seed, threads)
            m = float(np.mean(s.sinr))
            rows.append([name, M, m, 10.0 * math.log10(m)])
            points.append({"scenario": name, **p.as_dict()})
    return Dataset("fig1", ["scenario", "M", "mean_sinr_emp", "mean_sinr_db"], rows,
                   _meta("fig1", N, seed, points))


def _fig2(N, seed, threads, cache):
    rows, points = [], []
    for M in (100, 200):
        for K in range(2, 21):
            p = NetworkParams.from_csi_quality(M, K, 1.0, 1.0, 0.5)
            st = empirical_stats(cache.get(p, N, seed, threads))
            rows.append([K, M, st.rate, an.rate_lower_bound(p)[1]])
            points.append(p.as_dict())
    return Dataset("fig2", ["K", "M", "rate_emp", "rate_lb"], rows,
                   _meta("fig2", N, seed, points))


def _fig3(N, seed, threads, cache):
    rows, points = [], []
    for K in (10, 20):
        p = NetworkParams.from_csi_quality(200, K, 10.0, 10.0, 0.8)
        s = cache.get(p, N, seed, threads)
        st = empirical_stats(s, histogram="P_ie")
        h = st.histogram
        g = an.gamma_mix_params(p)
        # bin-averaged model density, so the overlay is exact on these edges
        cdf = an.interference_cdf(h.edges, g)
        model = np.diff(cdf) / np.diff(h.edges)
        for lo, hi, de, dm in zip(h.edges[:-1], h.edges[1:], h.density, model):
            rows.append([float(lo), float(hi), float(de), float(dm), K])
        points.append(p.as_dict())
    return Dataset("fig3", ["bin_lo", "bin_hi", "density_emp", "density_eq23", "K"],
                   rows, _meta("fig3", N, seed, points))


def tail_params(K: int, M: int) -> NetworkParams:
    return NetworkParams.from_csi_quality(M, K, TAIL_POWER, TAIL_POWER, TAIL_PC)


def _fig4(N, seed, threads, cache):
    rows, points = [], []
    for K, grid in TAIL_M_GRID.items():
        for M in grid:
            p = tail_params(K, M)
            s = cache.get(p, N, seed, threads)
            emp = float(np.count_nonzero(s.sinr < TAIL_GAMMA)) / s.N
            rows.append([M, K, emp,
                         an.outage_probability(TAIL_GAMMA, p, "exact").value,
                         an.outage_probability(TAIL_GAMMA, p, "high_snr").value])
            points.append(p.as_dict())
    meta = _meta("fig4", N, seed, points)
    meta["gamma_th"] = TAIL_GAMMA
    return Dataset("fig4", ["M", "K", "outage_emp", "outage_eq24", "outage_eq25"],
                   rows, meta)


def _fig5(N, seed, threads, cache):
    rows, points = [], []
    A, B = an.BPSK
    for K, grid in TAIL_M_GRID.items():
        for M in grid:
            p = tail_params(K, M)
            st = empirical_stats(cache.get(p, N, seed, threads), modulation=(A, B))
            rows.append([M, K, st.aber, an.aber(p, A, B).value])
            points.append(p.as_dict())
    meta = _meta("fig5", N, seed, points)
    meta["modulation"] = [A, B]
    return Dataset("fig5", ["M", "K", "aber_emp", "aber_eq27"], rows, meta)


FIGURES = {"fig1": _fig1, "fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5}


def figure_dataset(name: str, N: Optional[int] = None, seed: int = 1, threads: int = 1,
                   cache: Optional[SampleCache] = None) -> Dataset:
    """Build one figure dataset; ``N`` defaults to the figure's trial count."""
    if name not in FIGURES:
        raise KeyError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    N = DEFAULT_TRIALS[name] if N is None else N
    return FIGURES[name](N, seed, threads, cache if cache is not None else SampleCache())


def write_dataset(ds: Dataset, out_dir: str, force: bool = False) -> List[str]:
    """Write ``<name>.csv`` and ``<name>.meta.json``; refuses to overwrite
    unless ``force``."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{ds.name}.csv")
    meta_path = os.path.join(out_dir, f"{ds.name}.meta.json")
    for path in (csv_path, meta_path):
        if os.path.exists(path) and not force:
            raise FileExistsError(path)
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(ds.to_csv())
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(ds.meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return [csv_path, meta_path]
