"""Command-line front end: eps-sweeps of the regularized EPR computations.

Every subcommand writes plot-ready CSV and/or a JSON summary, both carrying
a run manifest. Exit codes: 0 success, 1 usage or precondition error,
2 indeterminate classification, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .asymptotics import (
    DEFAULT_EPS_MAX,
    DEFAULT_EPS_MIN,
    DEFAULT_POINTS,
    Classification,
    EpsilonSweep,
    classify,
    evaluate_grid,
    geometric_grid,
)
from .epr import (
    EprConfig,
    delta_sq_box_integral,
    entangled_covariance,
    modified_limit_target,
    modified_norm,
    modified_relative_probability,
    normalized_delta_norm,
    psi_prime_independence,
    relative_probability_unmodified,
)
from .genfunc import TestFunction, delta, pair
from .mollifier import Kind, get_mollifier
from .quadrature import Gaussian, QuadratureConfig, QuadratureError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INDETERMINATE = 2
EXIT_NUMERICAL = 3

TEST_FUNCTIONS: dict[str, TestFunction] = {
    "gaussian": TestFunction(lambda x: np.exp(-np.square(x)), Gaussian(0.0, 1.0)),
    "even-zero": TestFunction(lambda x: np.square(x) * np.exp(-np.square(x)), Gaussian(0.0, 1.0)),
    "odd": TestFunction(lambda x: x * np.exp(-np.square(x)), Gaussian(0.0, 1.0)),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    version: str = __version__
    output_format: str = "json"
    timestamp: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["timestamp"] is None:
            del d["timestamp"]
        return d


@dataclass
class Outcome:
    columns: list[str]
    rows: list[list]
    summary: dict
    exit_code: int = EXIT_OK
    extra: dict = field(default_factory=dict)


# -- argument parsing ---------------------------------------------------------


def _pair_of_floats(text: str) -> tuple[float, float]:
    try:
        a, b = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from None
    return a, b


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list, got {text!r}") from None


def _add_shared(p: argparse.ArgumentParser):
    p.add_argument(
        "--mollifier", choices=[k.value for k in Kind], default="gaussian",
        help="regularizing kernel (default: %(default)s)",
    )
    p.add_argument(
        "--eps-min", type=float, default=DEFAULT_EPS_MIN,
        help="smallest eps of the grid (default: %(default)g)",
    )
    p.add_argument(
        "--eps-max", type=float, default=DEFAULT_EPS_MAX,
        help="largest eps of the grid (default: %(default)g)",
    )
    p.add_argument(
        "--points", type=int, default=DEFAULT_POINTS,
        help="number of geometric grid points (default: %(default)s)",
    )
    p.add_argument(
        "--x0", type=float, default=2.0,
        help="ridge offset x2 = x1 + x0 (default: %(default)g)",
    )
    p.add_argument(
        "--sigma", type=float, default=1.0,
        help="envelope width sigma_x (default: %(default)g)",
    )
    p.add_argument(
        "--interval", type=_pair_of_floats, default=(-2.0, 0.0), metavar="A,B",
        help="x1 interval [a, b]; inf allowed for modified (default: -2,0)",
    )
    p.add_argument(
        "--L", dest="L", type=float, default=10.0,
        help="box half-width for epr-ratio (default: %(default)g)",
    )
    p.add_argument(
        "--L-sweep", dest="L_sweep", type=_float_list, default=None, metavar="LIST",
        help="comma-separated box half-widths, overrides --L",
    )
    p.add_argument(
        "--box-denominator", action="store_true",
        help="integrate the epr-ratio denominator over [-L, L] in x2 too",
    )
    p.add_argument(
        "--abs-tol", type=float, default=1e-10,
        help="quadrature absolute tolerance (default: %(default)g)",
    )
    p.add_argument(
        "--rel-tol", type=float, default=1e-8,
        help="quadrature relative tolerance (default: %(default)g)",
    )
    p.add_argument(
        "--format", choices=["csv", "json", "both"], default="json",
        help="output format (default: %(default)s)",
    )
    p.add_argument(
        "--output", type=Path, default=None,
        help="write to this path instead of stdout",
    )
    p.add_argument(
        "--reproducible", action="store_true",
        help="omit the timestamp so output is byte-identical",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="deltareg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("delta-squared", help="divergence order of <delta_eps^2, psi>")
    _add_shared(p)
    p.add_argument(
        "--testfn", choices=[*TEST_FUNCTIONS, "box"], default="gaussian",
        help="psi: gaussian exp(-x^2), even-zero x^2 exp(-x^2), odd x exp(-x^2), "
             "or box for the 2D ridge integral over --interval",
    )
    p.set_defaults(run=cmd_delta_squared)

    p = sub.add_parser("epr-ratio", help="relative probability of the bare delta state")
    _add_shared(p)
    p.set_defaults(run=cmd_epr_ratio)

    p = sub.add_parser("modified", help="norm and probability of the Gaussian-modulated ridge")
    _add_shared(p)
    p.set_defaults(run=cmd_modified)

    p = sub.add_parser("independence", help="factorization of the delta-free state")
    _add_shared(p)
    p.set_defaults(run=cmd_independence)

    p = sub.add_parser("normalize", help="norm of delta_eps / sqrt(delta_eps(0)) per kernel")
    _add_shared(p)
    p.set_defaults(run=cmd_normalize)
    return parser


_VALUE_FLAGS = {"--interval", "--L-sweep"}


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    # "--interval -14,10" would otherwise be parsed as an unknown option.
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


# -- helpers -----------------------------------------------------------------


def _quad(args) -> QuadratureConfig:
    try:
        return QuadratureConfig(abs_tol=args.abs_tol, rel_tol=args.rel_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _grid(args) -> np.ndarray:
    if args.points < 1:
        raise UsageError("--points must be at least 1")
    if not args.eps_min > 0 or args.eps_max < args.eps_min:
        raise UsageError("need 0 < --eps-min <= --eps-max")
    if args.eps_max == args.eps_min:
        return np.array([args.eps_max])
    return geometric_grid(args.eps_max, args.eps_min, args.points)


def _config(args, **overrides) -> EprConfig:
    a, b = args.interval
    params = dict(x0=args.x0, sigma_x=args.sigma, a=a, b=b, L=args.L,
                  mollifier=get_mollifier(args.mollifier))
    params.update(overrides)
    try:
        return EprConfig(**params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _classification_dict(c: Classification) -> dict:
    d = {"kind": c.kind, "label": str(c), "order": c.order, "limit": c.limit, "reason": c.reason}
    if c.fit is not None:
        d["fit"] = {**asdict(c.fit), "constant": c.fit.constant}
    return d


def _status(*cs: Classification) -> int:
    return EXIT_INDETERMINATE if any(c.kind == "indeterminate" for c in cs) else EXIT_OK


def _run_sweep(F: Callable[[float], float], grid: np.ndarray) -> EpsilonSweep:
    return evaluate_grid(F, grid)


def _smallest_valid(s: EpsilonSweep) -> tuple[float, float]:
    eps, vals = s.valid()
    return float(eps[-1]), float(vals[-1])


# -- subcommands -------------------------------------------------------------


def cmd_delta_squared(args) -> Outcome:
    quad = _quad(args)
    grid = _grid(args)
    m = get_mollifier(args.mollifier)
    if args.testfn == "box":
        cfg = _config(args)
        F = lambda e: delta_sq_box_integral(cfg, e, quad=quad)
        psi0 = cfg.b - cfg.a
    else:
        psi = TEST_FUNCTIONS[args.testfn]
        d = delta(m)
        sq = d * d
        F = lambda e: pair(sq, psi, e, quad)
        psi0 = float(psi(np.float64(0.0)))
    s = _run_sweep(F, grid)
    c = classify(s)
    eps_min, v_min = _smallest_valid(s)
    summary = {
        "testfn": args.testfn,
        "mollifier": m.kind.value,
        "self_energy": m.self_energy,
        "classification": _classification_dict(c),
        "order": c.fit.order if c.fit else None,
        "constant": c.fit.constant if c.fit else None,
        "eps_times_value_at_min": eps_min * v_min,
        "expected_eps_times_value": m.self_energy * psi0,
        "failures": len(s.failures),
    }
    rows = [[e, v, ok] for e, v, ok in s.rows()]
    return Outcome(["epsilon", "value", "converged"], rows, summary, _status(c))


def cmd_epr_ratio(args) -> Outcome:
    quad = _quad(args)
    grid = _grid(args)
    Ls = args.L_sweep or [args.L]
    rows, per_L, statuses = [], [], []
    for L in Ls:
        cfg = _config(args, L=L)
        if not L > max(abs(cfg.a), abs(cfg.b)):
            raise UsageError(f"need L > max(|a|, |b|), got L={L}")
        reports = [
            relative_probability_unmodified(cfg, float(e), quad, args.box_denominator)
            for e in grid
        ]
        for r in reports:
            rows.append([L, r.epsilon, r.numerator, r.denominator, r.ratio])
        ratios = np.array([r.ratio for r in reports])
        num = EpsilonSweep(grid, np.array([r.numerator for r in reports]))
        den = EpsilonSweep(grid, np.array([r.denominator for r in reports]))
        c_num, c_den, c_ratio = classify(num), classify(den), classify(EpsilonSweep(grid, ratios))
        mean = float(np.mean(ratios))
        spread = float((ratios.max() - ratios.min()) / mean) if mean else float(ratios.max() - ratios.min())
        per_L.append({
            "L": L,
            "expected_ratio": (cfg.b - cfg.a) / (2 * L),
            "ratio_at_min_eps": float(ratios[-1]),
            "ratio_relative_spread": spread,
            "numerator": _classification_dict(c_num),
            "denominator": _classification_dict(c_den),
            "ratio": _classification_dict(c_ratio),
        })
        statuses.append(c_ratio)
    summary = {"box_denominator": args.box_denominator, "by_L": per_L}
    return Outcome(["L", "epsilon", "numerator", "denominator", "ratio"], rows, summary,
                   _status(*statuses))


def cmd_modified(args) -> Outcome:
    quad = _quad(args)
    grid = _grid(args)
    cfg = _config(args)
    if grid[0] > cfg.sigma_x / 10 * (1 + 1e-12):
        raise UsageError(f"--eps-max {grid[0]:g} violates eps <= sigma/10 = {cfg.sigma_x / 10:g}")
    reports = [modified_relative_probability(cfg, float(e), quad) for e in grid]
    norms = np.array([r.denominator for r in reports])
    ratios = np.array([r.ratio for r in reports])
    c_norm = classify(EpsilonSweep(grid, norms))
    c_ratio = classify(EpsilonSweep(grid, ratios))
    target = modified_limit_target(cfg)
    rows = [[float(e), n, float(e) * n, r] for e, n, r in zip(grid, norms, ratios)]
    summary = {
        "norm": _classification_dict(c_norm),
        "norm_order": c_norm.fit.order if c_norm.fit else None,
        "eps_times_norm_at_min": float(grid[-1] * norms[-1]),
        "self_energy": cfg.mollifier.self_energy,
        "limiting_ratio": float(ratios[-1]),
        "closed_form_target": target,
        "limit_error": abs(float(ratios[-1]) - target),
        "ratio": _classification_dict(c_ratio),
    }
    return Outcome(["epsilon", "norm", "eps_times_norm", "ratio"], rows, summary,
                   _status(c_norm, c_ratio))


def cmd_independence(args) -> Outcome:
    quad = _quad(args)
    cfg = _config(args)
    rep = psi_prime_independence(cfg, quad)
    contrast_eps = min(1e-2, cfg.sigma_x / 10)
    contrast = entangled_covariance(cfg, contrast_eps, quad)
    summary = {
        **rep.to_dict(),
        "entangled_contrast_covariance": contrast,
        "contrast_epsilon": contrast_eps,
        "sigma_x": cfg.sigma_x,
    }
    cols = list(summary)
    return Outcome(cols, [[summary[k] for k in cols]], summary)


def cmd_normalize(args) -> Outcome:
    quad = _quad(args)
    grid = _grid(args)
    rows, per = [], {}
    for kind in Kind:
        m = get_mollifier(kind)
        vals = [normalized_delta_norm(m, float(e), quad) for e in grid]
        rows += [[kind.value, float(e), v] for e, v in zip(grid, vals)]
        per[kind.value] = {
            "norm_value": vals[-1],
            "closed_form": m.self_energy / m.value_at_zero,
            "eps_independence_spread": max(vals) - min(vals),
        }
    ref = args.mollifier
    other = next(k.value for k in Kind if k.value != ref)
    diff = abs(per[ref]["norm_value"] - per[other]["norm_value"]) / per[ref]["norm_value"]
    summary = {"by_mollifier": per, "reference": ref,
               "cross_mollifier_relative_difference": diff}
    return Outcome(["mollifier", "epsilon", "norm"], rows, summary)


# -- output ------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def render_csv(outcome: Outcome, manifest: RunManifest) -> str:
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(manifest.to_dict(), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(outcome.columns)
    for row in outcome.rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def render_json(outcome: Outcome, manifest: RunManifest) -> str:
    payload = {
        "manifest": manifest.to_dict(),
        "summary": outcome.summary,
        "columns": outcome.columns,
        "rows": outcome.rows,
        "exit_code": outcome.exit_code,
    }
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def _write(args, outcome: Outcome, manifest: RunManifest):
    texts = {}
    if args.format in ("csv", "both"):
        texts["csv"] = render_csv(outcome, manifest)
    if args.format in ("json", "both"):
        texts["json"] = render_json(outcome, manifest)
    if args.output is None:
        sys.stdout.write("\n".join(texts.values()))
        return
    if len(texts) == 1:
        targets = {next(iter(texts)): args.output}
    else:
        targets = {k: args.output.with_suffix("." + k) for k in texts}
    for k, path in targets.items():
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(texts[k])


def _manifest(args) -> RunManifest:
    params = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in sorted(vars(args).items())
        if k not in ("run", "command", "reproducible", "format", "output")
    }
    ts = None if args.reproducible else datetime.now(timezone.utc).isoformat()
    return RunManifest(args.command, _jsonable(params), __version__, args.format, ts)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(_join_negative_values(argv))
    try:
        outcome = args.run(args)
    except (UsageError, ValueError) as exc:
        print(f"deltareg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, RuntimeError, FloatingPointError) as exc:
        print(f"deltareg {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _write(args, outcome, _manifest(args))
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
