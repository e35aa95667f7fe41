"""Command-line front end.

Every command prints ``#``-prefixed header lines (tool version, command,
seed, tolerance) followed by CSV rows, or a single JSON document with the
same header fields under ``"meta"``.  Numbers carry 12 significant digits.

Exit codes: 0 success, 1 a checked property was violated, 2 bad input.
"""
from __future__ import annotations

import argparse
import ast
import json
import math
import operator
import sys

import numpy as np

from . import __version__
from .analysis import (
    appendix_scan_rp, default_grids, lemma_scan, measure, sufficient_condition, verify_chain,
)
from .analysis.halfplane import VIOLATION_TOL
from .analysis.measure import DEFAULT_SAMPLES, QUAD_TOL
from .balancing import (
    BalancingInstance, ExtractionFailure, InstanceTooLarge, brute_force_signs, chain_extract_signs,
)
from .bodies import load_body
from .gauss import lemma_constants, radius_derived
from .transforms import circ_transform, ehrhard_E, ehrhard_E2, star_transform


class InputError(Exception):
    pass


# -- number and grid parsing ---------------------------------------------
_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": math.pi, "inf": math.inf, "e": math.e}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval(node.left), _eval(node.right))
    raise InputError("unsupported expression")


def parse_number(text: str) -> float:
    """Arithmetic on numbers and ``pi``, e.g. ``1/7`` or ``3*pi/40``."""
    try:
        return float(_eval(ast.parse(text.strip(), mode="eval")))
    except (SyntaxError, ZeroDivisionError, InputError) as exc:
        raise InputError(f"cannot parse number {text!r}") from exc


def parse_grid(text: str) -> np.ndarray:
    """``a,b,c`` (explicit values) or ``start:stop:num`` (inclusive linspace)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError(f"grid {text!r} must be start:stop:num")
        num = parse_number(parts[2])
        if num < 1 or num != int(num):
            raise InputError("grid size must be a positive integer")
        grid = np.linspace(parse_number(parts[0]), parse_number(parts[1]), int(num))
    else:
        grid = np.array([parse_number(x) for x in text.split(",") if x.strip()])
    if len(grid) == 0:
        raise InputError("empty grid")
    return grid


def parse_vector(text: str) -> np.ndarray:
    return np.array([parse_number(x) for x in text.split(",")])


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return "%.12g" % x
    return str(x)


def _jsonable(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return float("%.12g" % x)
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    return x


class Output:
    """Collects a header and rows, then renders CSV or JSON."""

    def __init__(self, args, tolerance):
        self.meta = {"tool": "gaussvb", "version": __version__, "command": args.command,
                     "seed": args.seed, "tolerance": tolerance}
        self.fmt = args.format
        self.columns = None
        self.rows = []
        self.extra = {}

    def table(self, columns, rows):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]

    def render(self) -> str:
        if self.fmt == "json":
            doc = {"meta": self.meta, **self.extra}
            if self.columns is not None:
                doc["rows"] = [dict(zip(self.columns, r)) for r in self.rows]
            return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"
        lines = [f"# tool={self.meta['tool']} version={self.meta['version']}",
                 f"# command={self.meta['command']}",
                 f"# seed={self.meta['seed']}",
                 f"# tolerance={fmt(self.meta['tolerance'])}"]
        for k, v in self.extra.items():
            if isinstance(v, (list, dict)):
                v = json.dumps(_jsonable(v), sort_keys=True)
            lines.append(f"# {k}={fmt(v)}")
        if self.columns is not None:
            lines.append(",".join(self.columns))
            lines.extend(",".join(fmt(v) for v in r) for r in self.rows)
        return "\n".join(lines) + "\n"


def _body(args):
    if not args.body:
        raise InputError("--body is required")
    try:
        return load_body(args.body)
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot load body: {exc}") from exc


def _measure(body, args, method="auto"):
    return measure(body, method=method, samples=args.samples, seed=args.seed, workers=args.workers)


# -- commands -------------------------------------------------------------
def cmd_measure(args):
    est = _measure(_body(args), args, args.method)
    out = Output(args, QUAD_TOL if est.method == "quadrature" else est.error)
    out.table(["value", "error", "method", "samples"],
              [[est.value, est.error, est.method, est.samples]])
    return out, 0


def cmd_transform(args):
    K = _body(args)
    if args.u is not None:
        u = parse_vector(args.u)
    elif args.r is not None:
        u = np.zeros(K.dim)
        u[-1] = args.r
    else:
        raise InputError("give --u or --r")
    if len(u) != K.dim:
        raise InputError("--u has the wrong dimension")
    T = circ_transform(K, u) if args.variant == "circ" else star_transform(K, u)
    before = _measure(K, args)
    after = _measure(T, args)
    out = Output(args, before.error + after.error)
    out.extra["body"] = T.describe()
    out.table(["measure_before", "measure_after", "delta", "error"],
              [[before.value, after.value, after.value - before.value, before.error + after.error]])
    return out, 0


def cmd_symmetrize(args):
    K = _body(args)
    grid = parse_grid(args.z_grid)
    if args.kind == "E":
        S = ehrhard_E(K)
        if K.dim != 2:
            raise InputError("profiles of E are printed for planar bodies only")
        vals = S.psi_at(grid.reshape(-1, 1))
        col = "psi"
    else:
        S = ehrhard_E2(K, samples=min(args.samples, 200_000), seed=args.seed)
        vals = S.theta_at(grid)
        col = "theta"
    mK, mS = _measure(K, args), _measure(S, args)
    out = Output(args, mK.error + mS.error)
    out.extra["measure_body"] = mK.value
    out.extra["measure_symmetral"] = mS.value
    out.table(["z", col], zip(grid, vals))
    return out, 0


def cmd_constants(args):
    c = lemma_constants()
    d = radius_derived(c.r0)
    out = Output(args, 1e-13)
    out.table(["lambda0", "r0", "w_r0", "residual"],
              [[c.lambda0, c.r0, d.w, d.w - c.r0 - c.lambda0]])
    return out, 0


def cmd_lemma_scan(args):
    a0, d0, r0 = default_grids()
    alphas = parse_grid(args.alpha_grid) if args.alpha_grid else a0
    ds = parse_grid(args.d_grid) if args.d_grid else d0
    rs = parse_grid(args.r_grid) if args.r_grid else r0
    if np.any(alphas < 0) or np.any(alphas > math.pi / 2 + 1e-15):
        raise InputError("angles must lie in [0, pi/2]")
    if np.any(rs < 0):
        raise InputError("radii must be nonnegative")
    rows = lemma_scan(alphas, ds, rs)
    out = Output(args, VIOLATION_TOL)
    bad = sum(r.status == "violation" for r in rows)
    out.extra["violations"] = bad
    out.table(["alpha", "d", "r", "delta", "cone_measure", "bound", "status"],
              [[r.alpha, r.d, r.r, r.delta, r.cone_measure, r.bound, r.status] for r in rows])
    suff = [sufficient_condition(float(r)) for r in rs]
    out.extra["sufficient_condition_holds"] = all(s[2] for s in suff)
    return out, 1 if bad else 0


def cmd_appendix_scan(args):
    ps = parse_grid(args.p_grid) if args.p_grid else np.array([0.25, 0.5, 0.75, 0.9, 0.99, 0.999])
    rs = parse_grid(args.r_grid) if args.r_grid else np.arange(41) * 0.05
    if np.any((ps <= 0) | (ps >= 1)):
        raise InputError("p values must lie in (0, 1)")
    alphas = parse_grid(args.alpha_grid) if args.alpha_grid else None
    rows = appendix_scan_rp(ps, rs, alpha_grid=alphas)
    out = Output(args, VIOLATION_TOL)
    out.table(["p", "r_halfplane", "r_slab", "r_ball", "threshold", "psi_inv_p", "shape_exponent"],
              [[x.p, x.r_halfplane, x.r_slab, x.r_ball, x.threshold, x.psi_inv_p, x.shape_exponent]
               for x in rows])
    return out, 0


def cmd_balance(args):
    if not args.instance:
        raise InputError("--instance is required")
    try:
        inst = BalancingInstance.load(args.instance)
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot load instance: {exc}") from exc
    out = Output(args, 0.0)
    records = []
    code = 0
    if args.method in ("brute", "both"):
        try:
            records.append(brute_force_signs(inst, workers=args.workers).to_json())
        except InstanceTooLarge as exc:
            raise InputError(str(exc)) from exc
    if args.method in ("chain", "both"):
        try:
            records.append(chain_extract_signs(inst, args.variant).to_json())
        except ExtractionFailure as exc:
            records.append({"method": f"chain_{args.variant}", "verified": False,
                            "error": str(exc)})
            code = 1
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    out.table(["method", "signs", "gauge_value", "verified"],
              [[r["method"], " ".join("%+d" % s for s in r.get("signs", [])),
                r.get("gauge_value", math.nan), r["verified"]] for r in records])
    return out, code


def cmd_verify(args):
    K = _body(args)
    if K.dim != 2:
        raise InputError("verify runs on planar bodies")
    if args.r is None:
        raise InputError("--r is required")
    r = args.r
    ch = verify_chain(K, r)
    bad = ch.violations()
    out = Output(args, 1e-9)
    out.extra["chain"] = (
        "gamma(K o re_2) - gamma(K) >= gamma(E(K) o re_2) - gamma(E(K)) "
        "= gamma(L o re_2) - gamma(L) >= gamma(H o re_2) - gamma(H) >= 0")
    out.extra["step3_case"] = ch.case
    out.table(["link", "left", "right", "relation", "gap", "allowed_error", "holds"],
              [[name, a, b, rel, a - b, err, name not in bad]
               for name, a, b, rel, err in ch.links()])
    return out, 1 if bad else 0


COMMANDS = {
    "measure": cmd_measure, "transform": cmd_transform, "symmetrize": cmd_symmetrize,
    "lemma-scan": cmd_lemma_scan, "constants": cmd_constants, "balance": cmd_balance,
    "verify": cmd_verify, "appendix-scan": cmd_appendix_scan,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", default=None, help="write to this file instead of stdout")
    common.add_argument("--format", choices=["csv", "json"], default="csv")

    p = argparse.ArgumentParser(prog="gaussvb", description="Gaussian measure transforms and "
                                "vector balancing checks")
    p.add_argument("--version", action="version", version=f"gaussvb {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("measure", parents=[common], help="Gaussian measure of a body")
    s.add_argument("--body")
    s.add_argument("--method", default="auto", choices=["auto", "exact", "quadrature", "monte_carlo"])

    s = sub.add_parser("transform", parents=[common], help="measure before and after K o u")
    s.add_argument("--body")
    s.add_argument("--u", help="comma separated vector")
    s.add_argument("--r", type=parse_number, help="shorthand for u = r e_n")
    s.add_argument("--variant", choices=["circ", "star"], default="circ")

    s = sub.add_parser("symmetrize", parents=[common], help="Ehrhard symmetrals")
    s.add_argument("--body")
    s.add_argument("--kind", choices=["E", "E2"], default="E")
    s.add_argument("--z-grid", default="-3:3:13")

    s = sub.add_parser("lemma-scan", parents=[common], help="halfplane increments on a grid")
    s.add_argument("--alpha-grid")
    s.add_argument("--d-grid")
    s.add_argument("--r-grid")

    sub.add_parser("constants", parents=[common], help="lambda0 and r0")

    s = sub.add_parser("balance", parents=[common], help="sign vectors for an instance")
    s.add_argument("--instance")
    s.add_argument("--variant", choices=["circ", "star"], default="circ")
    s.add_argument("--method", choices=["brute", "chain", "both"], default="both")

    s = sub.add_parser("verify", parents=[common], help="the reduction chain on one planar body")
    s.add_argument("--body")
    s.add_argument("--r", type=parse_number, default=1 / 7)

    s = sub.add_parser("appendix-scan", parents=[common], help="radius thresholds per measure")
    s.add_argument("--p-grid")
    s.add_argument("--r-grid")
    s.add_argument("--alpha-grid")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        out, code = COMMANDS[args.command](args)
    except InputError as exc:
        print(f"gaussvb: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"gaussvb: error: {exc}", file=sys.stderr)
        return 2
    text = out.render()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
