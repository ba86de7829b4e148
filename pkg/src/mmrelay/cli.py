"""Command-line front end.

Exit codes: 0 ok, 1 usage, 2 configuration or parameter error,
3 acceptance failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from . import analytics as an
from .harness import acceptance as acc
from .harness.config import ConfigError, ExperimentConfig, load_config
from .harness.experiments import (FIGURES, SCALING_CASES, analyze, figure_dataset, run,
                                  write_dataset)
from .model import ScalingExponents, as_fraction, scaling_exponent

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_ACCEPT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _common(p, config=False, out=False):
    if config:
        p.add_argument("--config", metavar="PATH", help="key=value or JSON config")
    p.add_argument("--seed", type=_u64, help="base seed (overrides the config)")
    p.add_argument("--trials", type=_positive, help="trials per point")
    p.add_argument("--threads", type=_positive, default=1)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    if out:
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mmrelay", description="Massive-MIMO relay link toolkit")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    sp = sub.add_parser("scaling", help="SINR scaling exponent of an exponent tuple")
    for k in ("r_k", "r_p", "r_q", "r_c"):
        sp.add_argument(f"--{k.replace('_', '-')}", dest=k, default="0")
    sp.add_argument("--case", choices=sorted(SCALING_CASES), help="use a tabulated case")
    sp.add_argument("--table", action="store_true", help="report every tabulated case")
    sp.add_argument("--config", metavar="PATH",
                    help="config or the JSON written by 'scaling --json'")
    sp.add_argument("--json", action="store_true")

    sp = sub.add_parser("simulate", help="Monte Carlo run of a config")
    _common(sp, config=True, out=True)

    sp = sub.add_parser("analyze", help="closed-form values for a config")
    _common(sp, config=True, out=True)

    sp = sub.add_parser("figure", help="emit a figure dataset")
    sp.add_argument("name", choices=sorted(FIGURES))
    _common(sp, out=True)

    sp = sub.add_parser("acceptance", help="run acceptance criteria")
    sp.add_argument("suite", choices=sorted(acc.SUITES) + ["all"])
    _common(sp)
    return ap


# -- subcommands ---------------------------------------------------------------

def _scaling_payload(name: str, e: ScalingExponents) -> dict:
    return {"name": name,
            "exponents": {k: str(getattr(e, k)) for k in ("r_k", "r_p", "r_q", "r_c")},
            "report": scaling_exponent(e).as_dict()}


def _exponents_from_json(obj) -> List[tuple]:
    items = obj if isinstance(obj, list) else [obj]
    return [(it.get("name", "custom"), ScalingExponents(**{
        k: as_fraction(v) for k, v in it["exponents"].items()})) for it in items]


def cmd_scaling(a) -> int:
    if a.table:
        tuples = [(n, e) for n, (e, _) in SCALING_CASES.items()]
    elif a.case:
        tuples = [(a.case, SCALING_CASES[a.case][0])]
    elif a.config:
        with open(a.config, encoding="utf-8") as fh:
            text = fh.read()
        if text.lstrip().startswith(("{", "[")) and '"exponents"' in text:
            tuples = _exponents_from_json(json.loads(text))
        else:
            cfg = load_config(a.config)
            if cfg.exponents is None:
                raise ConfigError("config has no scaling exponents")
            tuples = [(cfg.scenario, cfg.exponents)]
    else:
        tuples = [("custom", ScalingExponents(
            **{k: as_fraction(getattr(a, k)) for k in ("r_k", "r_p", "r_q", "r_c")}))]
    payload = [_scaling_payload(n, e) for n, e in tuples]
    if a.json:
        print(json.dumps(payload if len(payload) > 1 else payload[0], indent=2))
    else:
        for item in payload:
            r = item["report"]
            ex = item["exponents"]
            print(f"{item['name']}: r_k={ex['r_k']} r_p={ex['r_p']} r_q={ex['r_q']} "
                  f"r_c={ex['r_c']} -> r_s={r['r_s']} favourable={r['favourable']} "
                  f"deterministic={r['deterministic_sufficient']} "
                  f"linear={r['linear_regime']} binding={r['binding_term']}")
    return EXIT_OK


def _config(a) -> ExperimentConfig:
    if not a.config:
        raise ConfigError("--config is required")
    cfg = load_config(a.config)
    if a.seed is not None:
        cfg.seed = a.seed
    if a.trials is not None:
        cfg.N = a.trials
        cfg.validate()
    return cfg


def _prepare_out(path: str, names: List[str], force: bool):
    os.makedirs(path, exist_ok=True)
    for n in names:
        full = os.path.join(path, n)
        if os.path.exists(full) and not force:
            raise FileExistsError(full)


def cmd_simulate(a) -> int:
    cfg = _config(a)
    out = a.out or cfg.out
    if out:
        names = [f"samples_M{M}.csv" for M in cfg.M] + [f"stats_M{M}.json" for M in cfg.M]
        _prepare_out(out, names + ["records.json"], a.force)

    def dump(M, s):
        if not out:
            return
        from .linksim import empirical_stats
        with open(os.path.join(out, f"samples_M{M}.csv"), "w", encoding="utf-8") as fh:
            s.to_csv(fh)
        with open(os.path.join(out, f"stats_M{M}.json"), "w", encoding="utf-8") as fh:
            fh.write(empirical_stats(s, cfg.gamma_th, cfg.modulation).to_json(indent=2))

    records = run(cfg, threads=a.threads, on_samples=dump)
    return _report(records, a, out)


def _report(records, a, out) -> int:
    payload = [r.as_dict() for r in records]
    if out:
        for r in payload:
            r.pop("wall_clock", None)     # keep files reproducible
        with open(os.path.join(out, "records.json"), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
    if a.json:
        print(json.dumps([r.as_dict() for r in records], indent=2, sort_keys=True))
    else:
        for r in records:
            mean = r.empirical.get("mean", {}).get("sinr")
            parts = [f"M={r.M}", f"K={r.params['K']}"]
            if mean is not None:
                parts.append(f"mean_sinr={mean:.6g}")
            parts.append(f"rate_lb={r.analytic['rate:jensen_lb']:.6g}")
            if "aber:high_snr" in r.analytic:
                parts.append(f"aber_approx={r.analytic['aber:high_snr']:.4g}")
            print(" ".join(parts))
    return EXIT_OK


def cmd_analyze(a) -> int:
    cfg = _config(a)
    out = a.out or cfg.out
    if out:
        _prepare_out(out, ["records.json", "outage_curve.csv"], a.force)
    records = analyze(cfg)
    if out and cfg.gamma_th and all(r.params["K"] >= 2 for r in records):
        with open(os.path.join(out, "outage_curve.csv"), "w", encoding="utf-8") as fh:
            pts = [(M, g) for M in cfg.M for g in cfg.gamma_th]
            vals = [an.outage_probability(g, cfg.params_at(M), "exact") for M, g in pts]
            an.write_curve_csv(fh, [M for M, _ in pts], vals, "exact")
    return _report(records, a, out)


def cmd_figure(a) -> int:
    ds = figure_dataset(a.name, N=a.trials, seed=1 if a.seed is None else a.seed,
                        threads=a.threads)
    if a.out:
        paths = write_dataset(ds, a.out, force=a.force)
        if not a.json:
            print("\n".join(paths))
    if a.json:
        print(json.dumps({"header": ds.header, "rows": ds.rows, "meta": ds.meta}))
    elif not a.out:
        sys.stdout.write(ds.to_csv())
    return EXIT_OK


def cmd_acceptance(a) -> int:
    seed = acc.SEED if a.seed is None else a.seed
    if a.suite == "all":
        verdicts = acc.run_all(trials=a.trials, seed=seed, threads=a.threads)
    else:
        verdicts = [acc.run_suite(a.suite, trials=a.trials, seed=seed, threads=a.threads)]
    if a.json:
        print(acc.verdicts_json(verdicts))
    else:
        for v in verdicts:
            print(v.line())
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_ACCEPT


COMMANDS = {"scaling": cmd_scaling, "simulate": cmd_simulate, "analyze": cmd_analyze,
            "figure": cmd_figure, "acceptance": cmd_acceptance}


def main(argv: Optional[List[str]] = None) -> int:
    a = build_parser().parse_args(argv)
    try:
        return COMMANDS[a.cmd](a)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileExistsError as exc:
        print(f"refusing to overwrite {exc} (use --force)", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ZeroDivisionError) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
