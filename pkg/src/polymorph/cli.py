"""Command-line runner: file-driven experiments that emit byte-stable JSON reports.

Exit codes: 0 every contract holds, 1 a contract is violated, 2 invalid or
infeasible input, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from ._numeric import format_scalar, parse_scalar
from .corpus import bundled_kernels, random_kernel, random_weights
from .coupling import Infeasible, solve_coupling
from .finite_space import BELL_LIMIT
from .markov_op import (
    adjoint,
    antiisomorphism_check,
    axioms_check,
    isometric_subalgebra_scan,
    kernel_of,
    operator_of,
)
from .polymorph_core import (
    Polymorphism,
    chain_to_csv,
    conjugate,
    entropy_rate_estimate,
    is_prime,
    mixing_report,
    sample_markov_chain,
    weak_distance,
)
from .symbolic import (
    CylinderFunction,
    SymbolicSystem,
    build_perturbation,
    corollary1_table,
    cylinder_invariant_partition_scan,
    gamma_pairing,
    inner,
    intertwining_pairing_check,
    lambda_adjoint_apply,
    lambda_pairing,
    norm2,
    pi_series,
    random_cylinder,
)
from .symbolic.tail import MAX_ALPHABET, MAX_WINDOW

EXIT_OK, EXIT_CONTRACT, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3

FINITE_COMMANDS = ("axioms", "coupling", "scan-prime", "scan-isometry", "mixing", "chain")
SYMBOLIC_COMMANDS = ("limits", "intertwine", "corollary1", "mixing-scan")
COMMANDS = FINITE_COMMANDS + SYMBOLIC_COMMANDS

DEFAULTS = {
    "mode": "exact",
    "seed": 0,
    "size_limit": BELL_LIMIT,
}
COMMAND_DEFAULTS = {
    "axioms": {"kernels": "bundled", "random": 0, "n": 4},
    "coupling": {},
    "scan-prime": {"kernels": "bundled", "random": 20, "n": 6},
    "scan-isometry": {"kernels": "bundled", "random": 20, "n": 6, "adjoint_invariance": False},
    "mixing": {"kernel": "lazy_flip", "N": 60, "tol": 1e-9},
    "chain": {"kernel": "lazy_flip", "length": 10000},
}
SYMBOLIC_DEFAULTS = {
    "alphabet": 4,
    "weights": ["2/5", "3/10", "1/5", "1/10"],
    "r": 1,
    "min_block": None,
    "residual_cap": "1/64",
    "pairs": 6,
    "sweeps": {"W": 2, "N": 50},
}


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


# -- config -------------------------------------------------------------------

def _parse_vector(value) -> list:
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    return [parse_scalar(v) for v in value]


def validate(config: dict) -> tuple[dict | None, list[str]]:
    """Fill defaults and check guards; returns ``(normalized, errors)``."""
    errors: list[str] = []
    if not isinstance(config, dict):
        return None, ["config: expected a JSON object"]
    cfg = copy.deepcopy(config)
    command = cfg.get("command")
    if command not in COMMANDS:
        return None, [f"command: expected one of {', '.join(COMMANDS)}, got {command!r}"]
    for key, value in DEFAULTS.items():
        cfg.setdefault(key, value)
    for key, value in COMMAND_DEFAULTS.get(command, {}).items():
        cfg.setdefault(key, value)
    if command in SYMBOLIC_COMMANDS:
        for key, value in SYMBOLIC_DEFAULTS.items():
            cfg.setdefault(key, copy.deepcopy(value))
        sweeps = dict(SYMBOLIC_DEFAULTS["sweeps"])
        sweeps.update(cfg.get("sweeps") or {})
        cfg["sweeps"] = sweeps

    if cfg["mode"] not in ("exact", "float"):
        errors.append(f"mode: expected exact or float, got {cfg['mode']!r}")
    if not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool) or cfg["seed"] < 0:
        errors.append(f"seed: expected an unsigned integer, got {cfg['seed']!r}")
    limit = cfg["size_limit"]
    if not isinstance(limit, int) or limit < 1:
        errors.append(f"size_limit: expected a positive integer, got {limit!r}")
    elif limit > BELL_LIMIT:
        errors.append(f"size_limit: size_limit exceeded: {limit} > {BELL_LIMIT}")

    if command == "coupling":
        if "p" not in cfg:
            errors.append("p: required for coupling")
        else:
            try:
                p = [Fraction(repr(v)) if isinstance(v, float) else Fraction(v) for v in _parse_vector(cfg["p"])]
            except (TypeError, ValueError, ZeroDivisionError):
                errors.append(f"p: not a probability vector: {cfg['p']!r}")
            else:
                if len(p) < 2 or any(v < 0 for v in p) or sum(p) != 1:
                    errors.append(f"p: not a probability vector (length {len(p)}, sum {sum(p)})")
                else:
                    cfg["p"] = [format_scalar(v) for v in p]
    if command in ("axioms", "scan-prime", "scan-isometry"):
        n = cfg["n"]
        if not isinstance(n, int) or n < 1:
            errors.append(f"n: expected a positive integer, got {n!r}")
        elif command != "axioms" and isinstance(limit, int) and n > min(limit, BELL_LIMIT):
            errors.append(f"n: size_limit exceeded: {n} > {min(limit, BELL_LIMIT)}")
        if not isinstance(cfg["random"], int) or cfg["random"] < 0:
            errors.append(f"random: expected a nonnegative integer, got {cfg['random']!r}")
        if cfg["kernels"] != "bundled" and not isinstance(cfg["kernels"], list):
            errors.append("kernels: expected \"bundled\" or a list of kernel file paths")
    if command in ("mixing", "chain"):
        if not isinstance(cfg["kernel"], str):
            errors.append("kernel: expected a bundled kernel name or a file path")
    if command == "mixing" and (not isinstance(cfg["N"], int) or cfg["N"] < 1):
        errors.append(f"N: expected an integer >= 1, got {cfg['N']!r}")
    if command == "chain" and (not isinstance(cfg["length"], int) or cfg["length"] < 1):
        errors.append(f"length: expected an integer >= 1, got {cfg['length']!r}")

    if command in SYMBOLIC_COMMANDS:
        try:
            weights = _parse_vector(cfg["weights"])
        except (TypeError, ValueError, ZeroDivisionError):
            weights = None
            errors.append(f"weights: cannot parse {cfg['weights']!r}")
        a = cfg["alphabet"]
        if not isinstance(a, int) or a < 1:
            errors.append(f"alphabet: expected a positive integer, got {a!r}")
        elif a > MAX_ALPHABET:
            errors.append(f"alphabet: {a} exceeds the guard {MAX_ALPHABET}")
        elif weights is not None and len(weights) != a:
            errors.append(f"weights: expected {a} entries, got {len(weights)}")
        elif weights is not None:
            try:
                SymbolicSystem(tuple(weights))
            except ValueError as exc:
                errors.append(f"weights: {exc}")
        if weights is not None:
            cfg["weights"] = [format_scalar(v) for v in weights]
        if not isinstance(cfg["r"], int) or cfg["r"] < 1:
            errors.append(f"r: expected a positive integer, got {cfg['r']!r}")
        W = cfg["sweeps"].get("W")
        if not isinstance(W, int) or W < 0:
            errors.append(f"sweeps.W: expected a nonnegative integer, got {W!r}")
        elif W > MAX_WINDOW:
            errors.append(f"sweeps.W: window {W} exceeds the guard {MAX_WINDOW}")
        N = cfg["sweeps"].get("N")
        if not isinstance(N, int) or N < 0:
            errors.append(f"sweeps.N: expected a nonnegative integer, got {N!r}")
        if not isinstance(cfg["pairs"], int) or cfg["pairs"] < 1:
            errors.append(f"pairs: expected a positive integer, got {cfg['pairs']!r}")
        try:
            cap = Fraction(str(cfg["residual_cap"]))
            cfg["residual_cap"] = format_scalar(cap)
        except (TypeError, ValueError, ZeroDivisionError):
            errors.append(f"residual_cap: cannot parse {cfg['residual_cap']!r}")
    return (None if errors else cfg), errors


# -- reports ------------------------------------------------------------------

class Report:
    def __init__(self, config: dict):
        self.config = config
        self.checks: list[dict] = []
        self.results: dict = {}
        self.series: dict[str, str] = {}

    def check(self, name: str, residual, tol: float, ok: bool | None = None) -> bool:
        if ok is None:
            ok = residual == 0 if tol == 0 else abs(float(residual)) <= tol
        self.checks.append({"name": name, "residual": _jsonable(residual), "tolerance": tol, "ok": bool(ok)})
        return bool(ok)

    @property
    def failing(self) -> list[str]:
        return [c["name"] for c in self.checks if not c["ok"]]

    def document(self) -> dict:
        return {
            "version": __version__,
            "config": self.config,
            "results": self.results,
            "checks": self.checks,
            "failing": self.failing,
            "verdict": "ok" if not self.failing else "violated",
            "series": sorted(self.series),
        }


def _jsonable(value):
    if isinstance(value, (Fraction, float, np.floating)):
        v = format_scalar(value)
        return v if not isinstance(v, float) else float(v)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return str(value)


def dumps(doc: dict) -> str:
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"


# -- inputs -------------------------------------------------------------------

def _load_kernel(ref: str, mode: str) -> Polymorphism:
    bundled = bundled_kernels()
    if ref in bundled:
        k = bundled[ref]
    else:
        k = Polymorphism.from_json(json.loads(Path(ref).read_text()))
    return k.as_float() if mode == "float" else k


def _kernels(cfg: dict) -> list[tuple[str, Polymorphism]]:
    if cfg["kernels"] == "bundled":
        items = sorted(bundled_kernels().items())
    else:
        items = [(str(path), Polymorphism.from_json(json.loads(Path(path).read_text()))) for path in cfg["kernels"]]
    rng = np.random.default_rng(cfg["seed"])
    for i in range(cfg["random"]):
        n = int(rng.integers(1, cfg["n"] + 1))
        items.append((f"random_{i}", random_kernel(random_weights(n, rng, repeats=bool(i % 2)), rng)))
    if cfg["mode"] == "float":
        items = [(name, k.as_float()) for name, k in items]
    return items


def _tol(mode: str) -> float:
    return 0.0 if mode == "exact" else 1e-12


def _system(cfg: dict) -> SymbolicSystem:
    weights = [parse_scalar(v) for v in cfg["weights"]]
    if cfg["mode"] == "float":
        weights = [float(v) for v in weights]
    return SymbolicSystem(tuple(weights))


def _spec(cfg: dict):
    system = _system(cfg)
    return build_perturbation(
        system,
        r=cfg["r"],
        min_block=cfg["min_block"],
        residual_cap=Fraction(cfg["residual_cap"]),
        policy="grow",
    )


def _pairs(cfg: dict, system: SymbolicSystem, W: int):
    rng = np.random.default_rng(cfg["seed"])
    return [
        (random_cylinder(system, -W, W, rng), random_cylinder(system, -W, W, rng))
        for _ in range(cfg["pairs"])
    ]


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_jsonable(v) for v in row])
    return buf.getvalue()


# -- suites -------------------------------------------------------------------

def _run_axioms(cfg: dict, rep: Report) -> None:
    tol = _tol(cfg["mode"])
    items = _kernels(cfg)
    for name, k in items:
        v = operator_of(k)
        ax = axioms_check(v)
        rep.results[name] = ax.to_json()
        rep.check(f"{name}: axioms", 0 if ax.ok else 1, 0, ok=ax.ok)
        rep.check(f"{name}: kernel roundtrip", weak_distance(kernel_of(v), k), tol)
        diff = adjoint(v).op - operator_of(conjugate(k)).op
        rep.check(f"{name}: adjoint is conjugate", max((abs(x) for x in diff.ravel()), default=0), tol)
    for (na, a), (nb, b) in zip(items, items[1:]):
        if a.space == b.space:
            rep.check(f"{na}*{nb}: anti-isomorphism", antiisomorphism_check(a, b), tol)


def _run_coupling(cfg: dict, rep: Report) -> None:
    p = [Fraction(v) for v in cfg["p"]]
    c = solve_coupling(p)
    rep.results["coupling"] = c.to_json(exact=cfg["mode"] == "exact")
    rep.results["positive_off_diagonal"] = all(
        c.q[i, j] > 0 for i in range(c.size) for j in range(c.size) if i != j
    )
    bad = c.violations()
    rep.check("zero diagonal and exact marginals", len(bad), 0)


def _run_scan(cfg: dict, rep: Report, isometry_only: bool) -> None:
    for name, k in _kernels(cfg):
        if k.size > cfg["size_limit"]:
            raise ConfigError([f"kernels: {name} has {k.size} points: size_limit exceeded"])
        iso = isometric_subalgebra_scan(operator_of(k), cfg["size_limit"],
                                        require_adjoint_invariance=cfg.get("adjoint_invariance", False))
        entry = {
            "totally_nonisometric": iso.totally_nonisometric,
            "isometry_witness": iso.witness.to_json() if iso.witness else None,
        }
        if not isometry_only:
            prime = is_prime(k, cfg["size_limit"])
            entry["prime"] = prime.prime
            entry["invariant_witness"] = prime.witness.to_json() if prime.witness else None
            rep.check(f"{name}: prime iff totally nonisometric", 0 if prime.prime == iso.totally_nonisometric else 1, 0)
        rep.results[name] = entry


def _run_mixing(cfg: dict, rep: Report) -> None:
    k = _load_kernel(cfg["kernel"], cfg["mode"])
    mr = mixing_report(k, cfg["N"], cfg["tol"])
    rep.results["mixing"] = {"is_mixing": mr.is_mixing, "rate": _round(mr.rate), "tol": mr.tol}
    rep.series["mixing.csv"] = _csv(["n", "distance"], [[n + 1, d] for n, d in enumerate(mr.distances)])
    # composing with a Markov kernel never increases total variation
    worst = max((float(b) - float(a) for a, b in zip(mr.distances, mr.distances[1:])), default=0.0)
    rep.check("distance to Theta is nonincreasing", max(worst, 0.0), 1e-12)


def _round(x: float) -> float:
    return float(f"{x:.12g}") if math.isfinite(x) else x


def _run_chain(cfg: dict, rep: Report) -> None:
    k = _load_kernel(cfg["kernel"], cfg["mode"])
    states = sample_markov_chain(k, cfg["length"], cfg["seed"])
    rep.series["chain.csv"] = chain_to_csv(states)
    counts = np.bincount(states, minlength=k.size) / len(states)
    rep.results["chain"] = {
        "length": cfg["length"],
        "entropy_rate": _round(entropy_rate_estimate(states, 2)),
        "empirical_frequencies": [_round(float(v)) for v in counts],
    }


def _symbolic_header(cfg: dict, rep: Report):
    spec = _spec(cfg)
    rep.results["perturbation"] = {
        "r": spec.r,
        "blocks": [[list(w) for w in b] for b in spec.blocks],
        "residual_mass": spec.residual_mass,
        "nondegenerate": spec.is_nondegenerate(),
    }
    return spec


def _run_limits(cfg: dict, rep: Report) -> None:
    spec = _symbolic_header(cfg, rep)
    sys_ = spec.system
    W = cfg["sweeps"]["W"]
    tol = _tol(cfg["mode"])
    bound = W + spec.r + 1
    rows = []
    for i, (f, g) in enumerate(_pairs(cfg, sys_, W)):
        lam = lambda_pairing(f, g, spec, bound)
        gam = gamma_pairing(f, g, spec, bound)
        rep.check(f"pair {i}: lambda stabilizes by W+r+1", 0 if lam.stabilized_at <= bound else 1, 0)
        for n in range(bound, bound + 3):
            direct = inner(sys_, f, lambda_adjoint_apply(g, spec, n))
            rep.check(f"pair {i}: lambda n={n} equals limit", direct - lam.limit, tol)
        rep.results[f"pair_{i}"] = {
            "f": f.to_json(), "g": g.to_json(),
            "lambda": lam.to_json(), "gamma": gam.to_json(),
        }
        for n in range(bound + 1):
            rows.append([i, n, lam.values[min(n, len(lam.values) - 1)], gam.values[min(n, len(gam.values) - 1)]])
    rep.series["limits.csv"] = _csv(["pair", "n", "lambda", "gamma"], rows)


def _run_intertwine(cfg: dict, rep: Report) -> None:
    spec = _symbolic_header(cfg, rep)
    W, N = cfg["sweeps"]["W"], cfg["sweeps"]["N"]
    tol = _tol(cfg["mode"])
    zero = Fraction(0) if cfg["mode"] == "exact" else 0.0
    overall = {"lambda_side": zero, "gamma_side": zero}
    for i, (f, g) in enumerate(_pairs(cfg, spec.system, W)):
        worst = {"lambda_side": zero, "gamma_side": zero}
        for n in range(N + 1):
            res = intertwining_pairing_check(f, g, spec, n)
            for side in worst:
                val = getattr(res, side)
                if abs(val) > abs(worst[side]):
                    worst[side] = val
        rep.check(f"pair {i}: Pi Lambda_n = Lambda_(n+1) T for n <= {N}", worst["lambda_side"], tol)
        rep.check(f"pair {i}: Gamma_n Pi = T Gamma_(n+1) for n <= {N}", worst["gamma_side"], tol)
        for side in overall:
            if abs(worst[side]) > abs(overall[side]):
                overall[side] = worst[side]
    rep.results["max_residual"] = overall


def _run_corollary1(cfg: dict, rep: Report) -> None:
    spec = _symbolic_header(cfg, rep)
    W = cfg["sweeps"]["W"]
    tol = _tol(cfg["mode"])
    ks = list(range(-W - spec.r - 2, W + 3))
    rows = []
    for i, (f, g) in enumerate(_pairs(cfg, spec.system, W)):
        lo, hi = min(f.start, g.start), max(f.stop, g.stop)
        table = corollary1_table(f, g, spec, ks)
        outside = [v for k, v in table if k + spec.r - 1 < lo or k > hi]
        worst = max((abs(v) for v in outside), default=0)
        rep.check(f"pair {i}: Phi_k acts as identity off the windows", worst, tol)
        rows.extend([i, k, v] for k, v in table)
    rep.series["corollary1.csv"] = _csv(["pair", "k", "residual"], rows)


def _run_mixing_scan(cfg: dict, rep: Report) -> None:
    spec = _symbolic_header(cfg, rep)
    sys_ = spec.system
    W, N = cfg["sweeps"]["W"], cfg["sweeps"]["N"]
    rows = []
    for i, (f, g) in enumerate(_pairs(cfg, sys_, W)):
        series = pi_series(f, g, spec, N)
        mean = inner(sys_, f, _const(sys_)) * inner(sys_, g, _const(sys_))
        bound = math.sqrt(float(norm2(sys_, f)) * float(norm2(sys_, g)))
        worst = max(abs(float(v)) for v in series)
        rep.check(f"pair {i}: |<Pi^n f, g>| <= |f| |g|", max(0.0, worst - bound), 1e-12)
        rep.results[f"pair_{i}"] = {"final": series[-1], "product_of_means": mean,
                                    "decorrelated": series[-1] == mean if spec.system.exact else
                                    abs(float(series[-1] - mean)) <= 1e-12}
        rows.extend([i, n, v] for n, v in enumerate(series))
    rep.series["mixing_scan.csv"] = _csv(["pair", "n", "pairing"], rows)
    # bounded-window primality certificate on the largest window that stays enumerable
    a = sys_.alphabet
    Wc = max((w for w in range(spec.r - 1, 5) if a ** (2 * w + 1) <= BELL_LIMIT), default=None)
    if Wc is not None and spec.system.exact:
        scan = cylinder_invariant_partition_scan(spec, Wc)
        rep.results["bounded_prime"] = {"window": Wc, "prime": scan.prime,
                                        "witness": scan.witness.to_json() if scan.witness else None}


def _const(system: SymbolicSystem) -> CylinderFunction:
    return CylinderFunction.constant(1, exact=system.exact)


SUITES = {
    "axioms": _run_axioms,
    "coupling": _run_coupling,
    "scan-prime": lambda cfg, rep: _run_scan(cfg, rep, False),
    "scan-isometry": lambda cfg, rep: _run_scan(cfg, rep, True),
    "mixing": _run_mixing,
    "chain": _run_chain,
    "limits": _run_limits,
    "intertwine": _run_intertwine,
    "corollary1": _run_corollary1,
    "mixing-scan": _run_mixing_scan,
}


def run(config: dict) -> tuple[dict, int]:
    """Validate and execute one suite; returns ``(report, exit code)``."""
    cfg, errors = validate(config)
    if errors:
        return {"version": __version__, "config": config, "errors": errors, "verdict": "invalid"}, EXIT_INVALID
    rep = Report(cfg)
    try:
        SUITES[cfg["command"]](cfg, rep)
    except Infeasible as exc:
        doc = _jsonable(rep.document())
        doc.update(verdict="infeasible", error=str(exc), index=exc.index)
        return doc, EXIT_INVALID
    except ConfigError as exc:
        return {"version": __version__, "config": cfg, "errors": exc.errors, "verdict": "invalid"}, EXIT_INVALID
    doc = _jsonable(rep.document())
    doc["_series"] = rep.series
    return doc, (EXIT_CONTRACT if rep.failing else EXIT_OK)


def emit(doc: dict, out: str | None, timing: float | None = None) -> None:
    """Print the report; with ``out`` also write report.json, series CSVs and a separate timing file."""
    series = doc.pop("_series", {})
    text = dumps(doc)
    sys.stdout.write(text)
    if out:
        root = Path(out)
        root.mkdir(parents=True, exist_ok=True)
        (root / "report.json").write_text(text)
        for name, body in series.items():
            (root / name).write_text(body)
        if timing is not None:
            (root / "timing.json").write_text(json.dumps({"wall_clock_seconds": round(timing, 3)}) + "\n")


# -- argument parsing ---------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--mode", choices=("exact", "float"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="directory for report.json and CSV series")
    p.add_argument("--p", help="probability vector, e.g. 2/5,3/10,1/5,1/10")
    p.add_argument("--n", type=int, help="point count, step count (mixing, chain) or sweep length N (symbolic)")
    p.add_argument("--window", type=int, help="symbolic window half-width W")
    p.add_argument("--kernel", help="bundled kernel name or kernel JSON file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polymorph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="group", required=True)

    run_p = sub.add_parser("run", help="run one suite")
    run_p.add_argument("command", choices=COMMANDS)
    _add_common(run_p)

    coup = sub.add_parser("coupling", help="zero-diagonal couplings")
    coup_sub = coup.add_subparsers(dest="action", required=True)
    solve = coup_sub.add_parser("solve")
    solve.add_argument("--p", required=True)
    solve.add_argument("--exact", action="store_true", help="print rational entries")

    sym = sub.add_parser("symbolic", help="symbolic shift suites")
    sym.add_argument("command", choices=SYMBOLIC_COMMANDS)
    _add_common(sym)

    val = sub.add_parser("validate", help="check a config and print the normalized form")
    val.add_argument("--config", required=True)
    return parser


def _config_from_args(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
    cfg["command"] = args.command
    if args.mode:
        cfg["mode"] = args.mode
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.p:
        cfg["p"] = args.p
    if args.kernel:
        cfg["kernel"] = args.kernel
    if args.n is not None:
        if args.command in SYMBOLIC_COMMANDS:
            cfg.setdefault("sweeps", {})["N"] = args.n
        elif args.command == "mixing":
            cfg["N"] = args.n
        elif args.command == "chain":
            cfg["length"] = args.n
        else:
            cfg["n"] = args.n
    if args.window is not None:
        cfg.setdefault("sweeps", {})["W"] = args.window
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.group == "validate":
            cfg, errors = validate(json.loads(Path(args.config).read_text()))
            sys.stdout.write(dumps({"config": cfg, "errors": errors}))
            return EXIT_INVALID if errors else EXIT_OK
        if args.group == "coupling":
            cfg = {"command": "coupling", "p": args.p, "mode": "exact" if args.exact else "float"}
            doc, code = run(cfg)
            emit(doc, None)
            return code
        cfg = _config_from_args(args)
        start = time.perf_counter()
        doc, code = run(cfg)
        emit(doc, args.out, time.perf_counter() - start)
        return code
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"polymorph: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
