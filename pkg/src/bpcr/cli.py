"""Command-line entry point: ``bpcr fit|synth|scan|check``.

Exit codes: 0 success, 1 oracle check failed, 2 bad input, 3 internal
invariant violated.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .dp import DegenerateEvidenceError, InvariantViolation, regress
from .hyperparams import evidence_scan
from .oracle import MAX_N, compare, enumerate_posterior
from .pipeline import resolve_hyper
from .segment_evidence import gaussian_moments, moment_tables
from .synthgen import PROFILES, generate

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class InputError(ValueError):
    pass


# ---------------------------------------------------------------- file formats

def read_series(path) -> np.ndarray:
    """Read a one-column CSV of decimals, with an optional ``y`` header line."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None
    values = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if lineno == 1 and line.lower() == "y":
            continue
        if "," in line:
            raise InputError(f"{path}:{lineno}: expected a single column, got {line!r}")
        try:
            v = float(line)
        except ValueError:
            raise InputError(f"{path}:{lineno}: not a number: {line!r}") from None
        if not math.isfinite(v):
            raise InputError(f"{path}:{lineno}: non-finite value {line!r}")
        values.append(v)
    if not values:
        raise InputError(f"{path}: no data rows")
    return np.array(values)


def format_float(x: float) -> str:
    r = format(float(x), ".17g")
    if r.lstrip("-").isdigit():
        r += ".0"
    return r


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Canonical JSON: sorted keys, floats with 17 significant digits,
    non-finite floats as null.  ``dumps(json.loads(dumps(x))) == dumps(x)``."""
    return _encode(obj, indent, 0) + "\n"


def write_csv(path: Path, header: list[str], columns: list) -> None:
    cols = [np.asarray(c) for c in columns]
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(str(int(v)) if np.issubdtype(type(v), np.integer) else format_float(v)
                              for v in row))
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------- commands

def _hyper(args, y):
    try:
        return resolve_hyper(y, args.noise, args.prior, args.estimator, args.nu, args.rho, args.sigma,
                             args.rho_subtract)
    except ValueError as e:
        raise InputError(str(e)) from None


def _kmax(args, n: int) -> int:
    k_max = n if args.kmax is None else args.kmax
    if not 1 <= k_max <= n:
        raise InputError(f"--kmax must lie in [1, {n}], got {k_max}")
    return k_max


def cmd_fit(args) -> int:
    y = read_series(args.input)
    hp = _hyper(args, y)
    k_max = _kmax(args, y.size)
    mt = moment_tables(y, hp, args.noise, args.prior)
    res = regress(y, mt, hp, k_max=k_max, noise=args.noise, prior=args.prior, curve=args.curve)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = res.to_dict()
    doc["estimator"] = args.estimator or ("moments" if args.noise == "gauss" else "quantile")
    (out / "result.json").write_text(dumps(doc))
    t = np.arange(1, y.size + 1)
    write_csv(out / "curve.csv", ["t", "y", "curve_mean", "curve_std"], [t, y, res.curve_mean, res.curve_std])
    write_csv(out / "breaks.csv", ["t", "b_total"], [np.arange(y.size + 1), res.b_total])
    print(f"n={y.size} k_hat={res.k_hat} t_hat={res.t_hat.tolist()} log_evidence={res.log_evidence:.6g}")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.n is not None and args.n < 4:
        raise InputError("--n must be at least 4")
    y, truth = generate(args.profile, args.seed, n=args.n or 100)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("y\n" + "".join(format_float(v) + "\n" for v in y))
    print(f"wrote {y.size} rows ({args.profile}, seed={truth.seed}) to {out}")
    return EXIT_OK


def scan_grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if not (lo > 0 and hi > 0):
        raise InputError("sigma bounds must be positive")
    if steps < 1:
        raise InputError("--steps must be >= 1")
    if steps == 1:
        return np.array([lo])
    if not lo < hi:
        raise InputError("--sigma-min must be below --sigma-max")
    return np.linspace(lo, hi, steps)


def cmd_scan(args) -> int:
    y = read_series(args.input)
    hp = _hyper(args, y)
    k_max = _kmax(args, y.size)
    grid = scan_grid(args.sigma_min, args.sigma_max, args.steps)
    sigmas = np.union1d(grid, [hp.sigma])
    rows = evidence_scan(y, hp, sigmas, args.noise, args.prior, k_max)
    lines = ["sigma,log_evidence,k_hat,is_estimate"]
    for r in rows:
        lines.append(f"{format_float(r.sigma)},{format_float(r.log_evidence)},{r.k_hat},{int(r.sigma == hp.sigma)}")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n")
    best = max(rows, key=lambda r: r.log_evidence)
    print(f"sigma_hat={hp.sigma:.6g} argmax sigma={best.sigma:.6g} over {len(rows)} points")
    return EXIT_OK


def run_check(n_max: int = 10, trials: int = 100, seed: int = 0) -> dict:
    """Compare the dynamic program against enumeration on random Gaussian series."""
    if not 1 <= n_max <= MAX_N:
        raise InputError(f"--n-max must lie in [1, {MAX_N}]")
    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}
    for _ in range(trials):
        n = int(rng.integers(min(2, n_max), n_max + 1))
        y = rng.normal(rng.normal(), rng.uniform(0.2, 3.0), size=n)
        hp = resolve_hyper(y)
        mt = gaussian_moments(y, hp)
        dev = compare(regress(y, mt, hp), enumerate_posterior(mt))
        for key, v in dev.items():
            worst[key] = max(worst.get(key, 0.0), v)
    return worst


def cmd_check(args) -> int:
    worst = run_check(args.n_max, args.trials, args.seed)
    for key, v in worst.items():
        print(f"{key:20s} {v:.3e}")
    overall = max(worst.values(), default=0.0)
    passed = overall <= args.tol
    print(f"max relative deviation {overall:.3e} ({'PASS' if passed else 'FAIL'} at tol {args.tol:g})")
    return EXIT_OK if passed else EXIT_CHECK


# ---------------------------------------------------------------- parser

def _fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True)
    p.add_argument("--noise", choices=["gauss", "cauchy"], default="gauss")
    p.add_argument("--prior", choices=["gauss", "cauchy"], default=None, help="defaults to --noise")
    p.add_argument("--kmax", type=int, default=None, help="defaults to n")
    p.add_argument("--estimator", choices=["moments", "quantile"], default=None,
                   help="defaults to moments for gauss noise, quantile otherwise")
    p.add_argument("--sigma", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--rho-subtract", action="store_true")
    p.add_argument("--curve", choices=["map-k", "mixture"], default="map-k")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bpcr", description="Bayesian piecewise constant regression")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a series and write result.json, curve.csv, breaks.csv")
    _fit_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("synth", help="write a synthetic benchmark series")
    p.add_argument("--profile", choices=sorted(PROFILES), required=True)
    p.add_argument("--seed", type=int, default=None, help="defaults to the shipped seed of the profile")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("scan", help="log evidence and k_hat over a sigma grid")
    _fit_flags(p)
    p.add_argument("--sigma-min", type=float, required=True)
    p.add_argument("--sigma-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("check", help="compare the dynamic program with brute-force enumeration")
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "prior", None) is None and hasattr(args, "noise"):
        args.prior = args.noise
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (InvariantViolation, DegenerateEvidenceError) as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
