"""Command-line front end.

    nehari-lab solve       --p --lambda --beta [--mode global|nehari-minus|both]
    nehari-lab thresholds  --p --lambda --beta
    nehari-lab fibering    --p --lambda --beta [--seed-pair split-soliton] | --coeffs A,B,C
    nehari-lab lambda      --p --beta [--variant Lambda|LambdaBar]
    nehari-lab multibump   --p --lambda --beta --R0 --N-list 1,2,4,8
    nehari-lab verify      [--suite identities|inequalities|all]

Exit codes: 0 success, 1 internal error, 2 invalid flags, 3 solver did not converge.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import enum
import io
import json
import math
import os
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .radial import MIN_NODES, RadialFn, RadialGrid, VecPair, l2_norm_sq, make_grid

SCHEMA_VERSION = 1
KAPPA_CONVENTION = "phi = kappa * (1/|x|) * rho; kappa = 1 is the bare Coulomb kernel, 1/(4 pi) the normalized one"
EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 1, 2, 3


class UsageError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    p: float | None
    lam: float | None
    beta: float | None
    kappa: float
    n: int
    r_max: float
    scheme: str
    seed: int
    out: str | None
    jobs: int
    extra: dict


# --- serialization -----------------------------------------------------------

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = f"{x:.17g}"
    if all(ch not in text for ch in ".en"):
        text += ".0"
    return text


def _jsonable(obj):
    """Plain containers only; arrays are summarized, enums become their values."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, RadialFn):
        return {"l2_sq": l2_norm_sq(obj), "max": float(np.max(np.abs(obj.values)))}
    if isinstance(obj, VecPair):
        return {"u": _jsonable(obj.u), "v": _jsonable(obj.v)}
    if isinstance(obj, RadialGrid):
        return {"n": obj.n, "r_max": obj.r_max, "scheme": obj.scheme}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON with every float printed to 17 significant digits (byte-stable)."""

    def enc(o, indent):
        pad, inner = "  " * indent, "  " * (indent + 1)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{inner}{json.dumps(k)}: {enc(v, indent + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            return "[\n" + ",\n".join(inner + enc(v, indent + 1) for v in o) + "\n" + pad + "]"
        if isinstance(o, float):
            return _fmt_float(o)
        return json.dumps(o)

    return enc(_jsonable(obj), 0) + "\n"


def build_id() -> str:
    root = Path(__file__).resolve().parent
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=root,
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"{__version__}+unknown"


def envelope(cfg: RunConfig, body: dict) -> dict:
    head = {
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command,
        "grid": {"n": cfg.n, "r_max": cfg.r_max, "scheme": cfg.scheme},
        "kappa": cfg.kappa,
        "kappa_convention": KAPPA_CONVENTION,
        "build": build_id(),
    }
    head.update(body)
    return head


def emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


# --- argument parsing --------------------------------------------------------

def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _default_n() -> int:
    raw = os.environ.get("NEHARI_LAB_GRID_N")
    if raw is None:
        return 4096
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"NEHARI_LAB_GRID_N must be an integer, got {raw!r}") from None


def build_parser(default_n: int = 4096) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--kappa", type=float, default=1.0, help="Coulomb kernel prefactor")
    common.add_argument("--n", type=int, default=default_n, help="grid nodes (env NEHARI_LAB_GRID_N)")
    common.add_argument("--r-max", type=float, default=30.0)
    common.add_argument("--scheme", choices=("log", "uniform"), default="log")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")

    parser = argparse.ArgumentParser(prog="nehari-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="compute critical points")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--mode", choices=("global", "nehari-minus", "both"), default="both")
    s.add_argument("--max-iters", type=int, default=20000)

    t = sub.add_parser("thresholds", parents=[common], help="closed-form thresholds")
    t.add_argument("--p", type=float, required=True)
    t.add_argument("--lambda", dest="lam", type=float, required=True)
    t.add_argument("--beta", type=float, required=True)

    f = sub.add_parser("fibering", parents=[common], help="fibering map of a pair or of raw coefficients")
    f.add_argument("--p", type=float, required=True)
    f.add_argument("--lambda", dest="lam", type=float, default=1.0)
    f.add_argument("--beta", type=float, default=None)
    f.add_argument("--seed-pair", choices=("split-soliton",), default="split-soliton")
    f.add_argument("--coeffs", type=_floats, help="A,B,C directly, skipping the pair")
    f.add_argument("--csv", help="write h(t) samples (t,h,hp,hpp) to this file")
    f.add_argument("--samples", type=int, default=201)

    q = sub.add_parser("lambda", parents=[common], help="maximize the Coulomb-normalized quotient")
    q.add_argument("--p", type=float, required=True)
    q.add_argument("--beta", type=_floats, required=True, help="one value or a comma-separated sweep")
    q.add_argument("--variant", choices=("Lambda", "LambdaBar"), default="Lambda")
    q.add_argument("--n-random", type=int, default=8)

    m = sub.add_parser("multibump", parents=[common], help="energies of N-bump configurations")
    m.add_argument("--p", type=float, required=True)
    m.add_argument("--lambda", dest="lam", type=float, required=True)
    m.add_argument("--beta", type=float, required=True)
    m.add_argument("--R0", type=float, default=3.0)
    m.add_argument("--N-list", dest="n_list", type=_ints, default=[1, 2, 4, 8])

    v = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    v.add_argument("--suite", choices=("identities", "inequalities", "all"), default="all")
    return parser


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise UsageError(message)


def validate(ns: argparse.Namespace) -> RunConfig:
    _require(ns.n >= MIN_NODES, f"--n must be >= {MIN_NODES}")
    _require(ns.r_max > 0, "--r-max must be positive")
    _require(ns.kappa > 0, "--kappa must be positive")
    _require(ns.seed >= 0, "--seed must be nonnegative")
    _require(ns.jobs >= 1, "--jobs must be >= 1")
    p = getattr(ns, "p", None)
    lam = getattr(ns, "lam", None)
    beta = getattr(ns, "beta", None)
    extra = {}
    cmd = ns.command
    if p is not None:
        upper = 3.0 if cmd == "lambda" else 4.0
        _require(2.0 < p < upper, f"--p must lie in (2, {upper:g}) for {cmd}")
    if lam is not None:
        _require(lam >= 0 if cmd in ("solve", "fibering") else lam > 0, f"--lambda out of range for {cmd}")
    betas = beta if isinstance(beta, list) else [beta]
    for b in betas:
        if b is not None:
            _require(b >= 0, "--beta must be >= 0")
    if cmd == "solve":
        _require(ns.max_iters > 0, "--max-iters must be positive")
        extra = {"mode": ns.mode, "max_iters": ns.max_iters}
    elif cmd == "fibering":
        if ns.coeffs is not None:
            _require(len(ns.coeffs) == 3, "--coeffs needs exactly three numbers A,B,C")
            A, B, C = ns.coeffs
            _require(A > 0 and B >= 0, "--coeffs needs A > 0 and B >= 0")
        else:
            _require(beta is not None, "--beta is required unless --coeffs is given")
        _require(ns.samples >= 2, "--samples must be >= 2")
        extra = {"coeffs": ns.coeffs, "csv": ns.csv, "samples": ns.samples, "seed_pair": ns.seed_pair}
    elif cmd == "lambda":
        _require(len(betas) >= 1, "--beta needs at least one value")
        _require(ns.n_random >= 0, "--n-random must be >= 0")
        extra = {"variant": ns.variant, "n_random": ns.n_random, "betas": betas}
    elif cmd == "multibump":
        _require(ns.R0 > 0, "--R0 must be positive")
        _require(len(ns.n_list) >= 1 and min(ns.n_list) >= 1, "--N-list needs positive bump counts")
        _require(ns.R0 < 0.5 * ns.r_max, "--R0 must be below r_max/2")
        extra = {"R0": ns.R0, "n_list": ns.n_list}
    elif cmd == "verify":
        extra = {"suite": ns.suite}
    return RunConfig(cmd, p, lam, beta if not isinstance(beta, list) else None, ns.kappa, ns.n, ns.r_max,
                     ns.scheme, ns.seed, ns.out, ns.jobs, extra)


# --- commands ----------------------------------------------------------------

def _grid(cfg: RunConfig) -> RadialGrid:
    return make_grid(cfg.n, cfg.r_max, cfg.scheme)


def _solve_summary(report) -> dict:
    out = _jsonable(report)
    out["energy"] = report.breakdown.total
    return out


def cmd_solve(cfg: RunConfig) -> int:
    from .energy import ModelParams
    from .soliton import sobolev_constants
    from .solver import BranchLostError, SolverConfig, certify_ground_state, minimize_global, minimize_nehari_minus

    grid = _grid(cfg)
    params = ModelParams(cfg.p, cfg.lam, cfg.beta, cfg.kappa)
    config = SolverConfig(max_iters=cfg.extra["max_iters"], seed=cfg.seed)
    mode = cfg.extra["mode"]
    reports, failures = [], []
    if mode in ("global", "both"):
        reports.append(minimize_global(params, grid, config))
    if mode in ("nehari-minus", "both"):
        try:
            rep = minimize_nehari_minus(params, grid, config)
            reports.append(certify_ground_state(rep, params, sobolev_constants(cfg.p, grid)))
        except BranchLostError as exc:
            failures.append({"mode": "nehari-minus", "error": str(exc)})
    body = {"params": {"p": cfg.p, "lambda": cfg.lam, "beta": cfg.beta},
            "reports": [_solve_summary(r) for r in reports], "failures": failures}
    emit(cfg, dumps(envelope(cfg, body)))
    ok = not failures and all(r.converged for r in reports)
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def cmd_thresholds(cfg: RunConfig) -> int:
    from .soliton import sobolev_constants
    from .thresholds import compute_thresholds

    consts = sobolev_constants(cfg.p, _grid(cfg))
    report = compute_thresholds(cfg.p, cfg.lam, cfg.beta, consts, cfg.kappa)
    body = report.as_dict()
    body["constants"] = _jsonable(consts)
    emit(cfg, dumps(envelope(cfg, body)))
    return EXIT_OK


def fibering_table(coeffs, t_max: float, samples: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "h", "hp", "hpp"])
    for t in np.linspace(0.0, t_max, samples):
        writer.writerow([_fmt_float(float(x)) for x in (t, coeffs.h(t), coeffs.hp(t), coeffs.hpp(t))])
    return buf.getvalue()


def cmd_fibering(cfg: RunConfig) -> int:
    from .energy import ModelParams
    from .fibering import FiberCoeffs, fiber_coeffs, nehari_times
    from .soliton import soliton_pair

    if cfg.extra["coeffs"] is not None:
        A, B, C = cfg.extra["coeffs"]
        coeffs = FiberCoeffs(A, B, C, cfg.p, cfg.lam)
        source = "coeffs"
    else:
        params = ModelParams(cfg.p, cfg.lam, cfg.beta, cfg.kappa)
        pair, _ = soliton_pair(cfg.p, cfg.beta, _grid(cfg))
        coeffs = fiber_coeffs(pair, params)
        source = cfg.extra["seed_pair"]
    roots = nehari_times(coeffs)
    t_far = max([t for t in (roots.t_minus, roots.t_plus) if t is not None] or [1.0])
    body = {
        "source": source,
        "coeffs": {"A": coeffs.A, "B": coeffs.B, "C": coeffs.C, "p": coeffs.p, "lambda": coeffs.lam},
        "roots": _jsonable(roots),
        "energies": {"t_minus": None if roots.t_minus is None else float(coeffs.h(roots.t_minus)),
                     "t_plus": None if roots.t_plus is None else float(coeffs.h(roots.t_plus))},
        "csv": cfg.extra["csv"],
    }
    if cfg.extra["csv"]:
        Path(cfg.extra["csv"]).write_text(fibering_table(coeffs, 1.5 * t_far, cfg.extra["samples"]))
    emit(cfg, dumps(envelope(cfg, body)))
    return EXIT_OK


def _quotient_task(args):
    beta, cfg = args
    from .lambda_max import QuotientConfig, maximize_quotient

    qc = QuotientConfig(n_random=cfg.extra["n_random"], seed=cfg.seed)
    return maximize_quotient(beta, cfg.p, cfg.extra["variant"], _grid(cfg), qc, cfg.kappa)


def cmd_lambda(cfg: RunConfig) -> int:
    betas = cfg.extra["betas"]
    tasks = [(b, cfg) for b in betas]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_quotient_task, tasks))
    else:
        results = [_quotient_task(t) for t in tasks]
    if len(results) == 1:
        body = _jsonable(results[0])
    else:
        body = {"results": _jsonable(results)}
    emit(cfg, dumps(envelope(cfg, body)))
    return EXIT_OK


def cmd_multibump(cfg: RunConfig) -> int:
    from .energy import ModelParams
    from .multibump import bump_curve
    from .soliton import sobolev_constants

    grid = _grid(cfg)
    params = ModelParams(cfg.p, cfg.lam, cfg.beta, cfg.kappa)
    curve = bump_curve(params, cfg.extra["R0"], cfg.extra["n_list"], sobolev_constants(cfg.p, grid), grid)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["N", "spacing", "t2", "J", "cross_term", "bound"])
    for row in zip(curve.Ns, curve.spacings, curve.t2, curve.energies, curve.cross_terms, curve.bounds):
        writer.writerow([str(row[0])] + [_fmt_float(float(x)) for x in row[1:]])
    emit(cfg, buf.getvalue())
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from .suites import run_suite

    checks = run_suite(cfg.extra["suite"], _grid(cfg), cfg.seed)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}", file=sys.stderr)
    passed = sum(bool(c.passed) for c in checks)
    print(f"{passed}/{len(checks)} checks passed", file=sys.stderr)
    body = {"suite": cfg.extra["suite"], "all_passed": passed == len(checks),
            "checks": [{"name": c.name, "passed": bool(c.passed), "detail": c.detail} for c in checks]}
    emit(cfg, dumps(envelope(cfg, body)))
    return EXIT_OK if passed == len(checks) else EXIT_INTERNAL


COMMANDS = {
    "solve": cmd_solve,
    "thresholds": cmd_thresholds,
    "fibering": cmd_fibering,
    "lambda": cmd_lambda,
    "multibump": cmd_multibump,
    "verify": cmd_verify,
}


def dispatch(argv: list[str] | None = None) -> int:
    try:
        parser = build_parser(_default_n())
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = validate(ns)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[cfg.command](cfg)
    except ValueError as exc:
        print(f"error: precondition violated: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main(argv: list[str] | None = None) -> int:
    return dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
