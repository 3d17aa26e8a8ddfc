"""Command-line interface: compatibility checks, falsification tests,
simulation and parameter-grid inversion for confidence regions.

Every command is deterministic given its input files, flags and seed; exit
codes are 0 (compatible / success), 1 (incompatible) and 2 (error).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import models
from .correspondence import Correspondence
from .errors import FalsiflowError
from .inference import (
    bootstrap_pvalue,
    statistic_semiparametric,
    statistic_tn_halflines,
    statistic_tv_core,
)
from .measure import FiniteDistribution, align, empirical
from .semiparametric import SemiparametricModel, maximize_dual
from .transport import compatibility_verdict

EXIT_COMPATIBLE = 0
EXIT_INCOMPATIBLE = 1
EXIT_ERROR = 2


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def load_model_spec(path: str):
    """Parse a model-spec JSON file into ("parametric", g, nu) or ("semi", model)."""
    with open(path) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FalsiflowError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    return build_model(spec, path)


def build_model(spec: dict, origin: str = "<spec>"):
    kind = spec.get("model")
    params = spec.get("params", {})
    if kind == "line_network":
        g, nu = models.line_network_game(params["masses"])
        return ("parametric", g, nu)
    if kind == "entry_game":
        g, nu = models.entry_game(
            params["delta1"], params["delta2"], resolution=params.get("resolution", 40)
        )
        return ("parametric", g, nu)
    if kind == "search":
        nu = FiniteDistribution.from_json(params["nu"])
        alpha = [(lab, val) for lab, val in params["alpha"]]
        g, nu = models.search_game(alpha, nu)
        return ("parametric", g, nu)
    if kind == "pilot":
        model = models.binary_response_pilot(
            params["eta"],
            epsilon_grid=params.get("epsilon_grid"),
        )
        return ("semi", model)
    if kind == "moment_inequality":
        model = models.moment_inequality_model(
            params["outcomes"], params["phi"], params["grid"]
        )
        return ("semi", model)
    if kind == "example4":
        model, _ = models.example4_instance(params["M"])
        return ("semi", model)
    if kind == "custom":
        g = Correspondence.from_json(params["correspondence"])
        if "moments" in params:
            return ("semi", SemiparametricModel(g, params["moments"]))
        nu = FiniteDistribution.from_json(params["nu"])
        return ("parametric", g, nu)
    raise FalsiflowError(f"{origin}: unknown model kind {kind!r}")


def load_distribution(path: str) -> FiniteDistribution:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FalsiflowError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    return FiniteDistribution.from_json(obj)


def load_data(path: str, numeric: bool = False) -> list:
    """Data CSV: header "y", one outcome label per line."""
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or lines[0] != "y":
        raise FalsiflowError(f"{path}:1: expected a single-column CSV with header 'y'")
    rows = [line for line in lines[1:] if line]
    if numeric:
        return [float(v) for v in rows]
    return rows


def write_output(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def render_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _target_distribution(args, outcome_support) -> FiniteDistribution:
    if args.dist:
        p = load_distribution(args.dist)
    elif args.data:
        p = empirical(load_data(args.data))
    else:
        raise FalsiflowError("either --dist or --data is required")
    return p


def cmd_check(args) -> int:
    loaded = load_model_spec(args.model)
    if loaded[0] == "parametric":
        _, g, nu = loaded
        p = _target_distribution(args, g.outcome_support)
        g = g.extend_outcomes(p.support)
        p = align(p, g.outcome_support)
        verdict = compatibility_verdict(p, nu, g)
        write_output(render_json(verdict.to_json()), args.out)
        return EXIT_COMPATIBLE if verdict.compatible else EXIT_INCOMPATIBLE
    _, model = loaded
    p = _target_distribution(args, model.correspondence.outcome_support)
    g = model.correspondence.extend_outcomes(p.support)
    if g is not model.correspondence:
        model = SemiparametricModel(g, model.moments, truncated=model.truncated)
    p = align(p, g.outcome_support)
    cert = maximize_dual(model, p)
    write_output(render_json(cert.to_json()), args.out)
    return EXIT_COMPATIBLE if cert.compatible else EXIT_INCOMPATIBLE


def _run_test(loaded, data, stat, B, seed):
    if stat == "semi":
        if loaded[0] != "semi":
            raise FalsiflowError("--stat semi requires a semiparametric model spec")
        model = loaded[1]
    else:
        if loaded[0] != "parametric":
            raise FalsiflowError(f"--stat {stat} requires a parametric model spec")
        model = (loaded[2], loaded[1])
    return bootstrap_pvalue(data, model, stat, B, seed)


def cmd_test(args) -> int:
    loaded = load_model_spec(args.model)
    data = load_data(args.data, numeric=args.stat == "tn-halflines")
    report = _run_test(loaded, data, args.stat, args.B, args.seed)
    if args.format == "csv":
        write_output(report.to_csv(), args.out)
    else:
        write_output(render_json(report.to_json()), args.out)
    return EXIT_COMPATIBLE


def cmd_simulate(args) -> int:
    loaded = load_model_spec(args.model)
    if loaded[0] != "parametric":
        raise FalsiflowError("simulation needs a parametric model spec (with a latent distribution)")
    _, g, nu = loaded
    rule = models.SelectionRule(args.rule)
    draws = models.simulate(g, nu, rule, args.n, args.seed)
    text = "y\n" + "".join(f"{y}\n" for y in draws)
    write_output(text, args.out)
    return EXIT_COMPATIBLE


def parse_grid(spec: str) -> list[dict]:
    """Grid spec "name=start:stop:step[,name2=...]" -> list of param dicts (product order)."""
    axes = []
    for part in spec.split(","):
        if not part:
            continue
        name, _, rng = part.partition("=")
        pieces = rng.split(":")
        if len(pieces) != 3:
            raise FalsiflowError(f"grid axis {part!r} must be name=start:stop:step")
        start, stop, step = (float(x) for x in pieces)
        if step <= 0:
            raise FalsiflowError(f"grid axis {part!r} needs a positive step")
        values = []
        k = 0
        while True:
            v = round(start + k * step, 10)
            if v > stop + 1e-12:
                break
            values.append(v)
            k += 1
        axes.append((name.strip(), values))
    points: list[dict] = [{}]
    for name, values in axes:
        points = [dict(pt, **{name: v}) for pt in points for v in values]
    return points if axes else []


def cmd_invert(args) -> int:
    with open(args.model) as fh:
        spec = json.load(fh)
    points = parse_grid(args.grid)
    numeric = args.stat == "tn-halflines"
    data = load_data(args.data, numeric=numeric)
    names = sorted({k for pt in points for k in pt})
    header = ",".join(names + ["pvalue", "accepted"])
    if not points:
        sys.stderr.write("warning: empty parameter grid, empty region\n")
        write_output(header + "\n", args.out)
        return EXIT_COMPATIBLE

    seeds = [int(s.generate_state(1)[0]) for s in __import__("numpy").random.SeedSequence(args.seed).spawn(len(points))]

    def run(idx_pt):
        idx, pt = idx_pt
        local = dict(spec, params=dict(spec.get("params", {}), **pt))
        loaded = build_model(local, args.model)
        report = _run_test(loaded, data, args.stat, args.B, seeds[idx])
        return report.pvalue

    workers = max(1, int(os.environ.get("FALSIFLOW_THREADS", "1")))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pvalues = list(pool.map(run, enumerate(points)))
    else:
        pvalues = [run(ip) for ip in enumerate(points)]

    lines = [header]
    for pt, pv in zip(points, pvalues):
        accepted = pv >= args.alpha
        lines.append(",".join([format(pt[n], ".10g") for n in names] + [repr(pv), str(accepted).lower()]))
    write_output("\n".join(lines) + "\n", args.out)
    return EXIT_COMPATIBLE


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="falsiflow",
        description="Compatibility checks and falsification tests for incompletely specified models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data_required=False):
        p.add_argument("--model", required=True, help="model-spec JSON path")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=["json", "csv"], default="json")
        if data_required:
            p.add_argument("--data", required=True, help="data CSV path (header 'y')")

    p_check = sub.add_parser("check", help="decide compatibility of a distribution with the model")
    common(p_check)
    p_check.add_argument("--dist", default=None, help="distribution JSON path")
    p_check.add_argument("--data", default=None, help="data CSV path (empirical distribution)")
    p_check.set_defaults(func=cmd_check)

    p_test = sub.add_parser("test", help="statistic plus bootstrap p-value on data")
    common(p_test, data_required=True)
    p_test.add_argument("--stat", choices=["tv-core", "tn-halflines", "semi"], default="tv-core")
    p_test.add_argument("--B", type=int, default=200)
    p_test.set_defaults(func=cmd_test)

    p_sim = sub.add_parser("simulate", help="draw outcomes from a parametric model")
    common(p_sim)
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--rule", choices=["first", "uniform-random"], default="first")
    p_sim.set_defaults(func=cmd_simulate)

    p_inv = sub.add_parser("invert", help="accepted parameter region by test inversion")
    common(p_inv, data_required=True)
    p_inv.add_argument("--stat", choices=["tv-core", "tn-halflines", "semi"], default="tv-core")
    p_inv.add_argument("--B", type=int, default=200)
    p_inv.add_argument("--alpha", type=float, default=0.05)
    p_inv.add_argument("--grid", required=True, help="name=start:stop:step[,name2=...]")
    p_inv.set_defaults(func=cmd_invert)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FalsiflowError, FileNotFoundError, KeyError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
