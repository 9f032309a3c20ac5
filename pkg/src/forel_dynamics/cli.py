"""Command-line frontend: ``forel <command> [regularizer] [options]``.

Settings come from an optional flat ``key = value`` file (``--config``)
and are overridden by flags. Artifacts go to ``--output`` (with a one-line
summary on stdout) or, without it, to stdout (summary on stderr). Failures
print a JSON error record on stderr; exit status is 0 on success, 1 on a
numerical or verification failure and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .acceptance import CRITERIA, run_suite
from .analysis import (
    critical_points,
    lmpy_certificate,
    lyapunov_exponent,
    schwarzian_scan,
    stability,
    topological_entropy_lap,
)
from .bifurcation import SweepConfig, compare_attractors, sweep
from .dynamics import GameParams, MapParams, cesaro_average, iterate, to_map_params
from .errors import (
    CertificationError,
    ConfigError,
    DomainError,
    ForelError,
    ParameterError,
    SeedCountError,
    UsageError,
)
from .regularizers import parse_regularizer, validate_regularizer

USAGE_ERRORS = (ParameterError, DomainError, ConfigError, SeedCountError, UsageError)

COMMANDS = (
    "regcheck", "orbit", "cesaro", "stability", "critical", "bifurcate",
    "chaos-cert", "entropy", "lyapunov", "schwarzian", "verify",
)
NEEDS_MAP = {"orbit", "cesaro", "stability", "critical", "chaos-cert", "entropy", "lyapunov", "schwarzian"}


# ---------------------------------------------------------------------------
# run configuration


@dataclass
class RunConfig:
    command: str = ""
    regularizer: str | None = None
    a: float | None = None
    b: float | None = None
    alpha: float | None = None
    beta: float | None = None
    N: float | None = None
    epsilon: float | None = None
    seeds: list[float] = field(default_factory=list)
    transient: int | None = None
    keep: int | None = None
    n: int | None = None
    output: str | None = None
    format: str | None = None
    a_min: float | None = None
    a_max: float | None = None
    steps: int | None = None
    workers: int | None = None
    tol: float | None = None
    separation_threshold: float | None = None
    power: int | None = None
    odd_n: int | None = None
    grid: int | None = None
    n_max: int | None = None
    compare: str | None = None
    quick: bool = False
    criteria: list[str] = field(default_factory=list)

    def to_text(self) -> str:
        """Flat ``key = value`` lines; unset fields are omitted."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None or v == [] or (f.name == "quick" and not v):
                continue
            if isinstance(v, list):
                text = ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
            elif isinstance(v, float):
                text = repr(v)
            else:
                text = str(v)
            lines.append(f"{f.name} = {text}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, eq, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not eq or not key:
                raise UsageError(f"line {lineno}: expected 'key = value'", parameter="config")
            values[key] = value
        return cls.from_mapping(values)

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        types = {f.name: f.type for f in fields(cls)}
        cfg = cls()
        for key, value in values.items():
            if key not in types:
                raise UsageError(f"unknown config key {key!r}", parameter=key)
            setattr(cfg, key, _coerce(key, types[key], value))
        return cfg


def _coerce(key, type_name, value):
    if not isinstance(value, str):
        return value
    try:
        if "list[float]" in type_name:
            return [float(v) for v in value.split(",") if v.strip()]
        if "list[str]" in type_name:
            return [v.strip() for v in value.split(",") if v.strip()]
        if "bool" in type_name:
            if value.lower() not in ("true", "false"):
                raise ValueError(value)
            return value.lower() == "true"
        if "int" in type_name:
            return int(value)
        if "float" in type_name:
            return float(value)
    except ValueError:
        raise UsageError(f"cannot parse {key} = {value!r}", parameter=key) from None
    return value


def map_params(cfg: RunConfig) -> MapParams:
    """Resolve ``(a, b)`` from exactly one of the two parameterizations."""
    direct = [cfg.a, cfg.b]
    game = [cfg.alpha, cfg.beta, cfg.N, cfg.epsilon]
    has_direct = any(v is not None for v in direct)
    has_game = any(v is not None for v in game)
    if has_direct and has_game:
        raise UsageError("give either a, b or alpha, beta, N, epsilon, not both", parameter="a")
    if has_game:
        if any(v is None for v in game):
            raise UsageError("alpha, beta, N and epsilon must all be given", parameter="alpha")
        return to_map_params(GameParams(cfg.alpha, cfg.beta, cfg.N, cfg.epsilon))
    if any(v is None for v in direct):
        raise UsageError("both a and b are required", parameter="a" if cfg.a is None else "b")
    return MapParams(cfg.a, cfg.b)


def sweep_b(cfg: RunConfig) -> float:
    if cfg.a is not None or cfg.N is not None or cfg.epsilon is not None:
        raise UsageError("bifurcate takes b (or alpha, beta) and an a-range, not a", parameter="a")
    if cfg.alpha is not None or cfg.beta is not None:
        if cfg.b is not None:
            raise UsageError("give either b or alpha, beta, not both", parameter="b")
        if cfg.alpha is None or cfg.beta is None:
            raise UsageError("alpha and beta must both be given", parameter="alpha")
        return to_map_params(GameParams(cfg.alpha, cfg.beta, 1.0, 1.0)).b
    if cfg.b is None:
        raise UsageError("b is required", parameter="b")
    return cfg.b


# ---------------------------------------------------------------------------
# output helpers


def _metadata(cfg: RunConfig, p: MapParams | None = None, **extra) -> dict:
    meta = {"command": cfg.command, "regularizer": cfg.regularizer}
    if p is not None:
        meta.update(a=p.a, b=p.b)
    meta.update(extra)
    meta["version"] = __version__
    return meta


def _json_doc(meta: dict, body: dict) -> str:
    return json.dumps({"metadata": meta, **body}, default=_json_default) + "\n"


def _json_default(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(f"not serializable: {type(v)}")


def _emit(cfg: RunConfig, artifact: str, summary: str, out, err) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(artifact)
        print(summary, file=out)
    else:
        out.write(artifact)
        print(summary, file=err)


def _seed(cfg: RunConfig, default: float | None = None) -> float:
    if not cfg.seeds:
        if default is None:
            raise UsageError("a seed is required (--x0)", parameter="x0")
        return default
    return cfg.seeds[0]


def _reg(cfg: RunConfig):
    if not cfg.regularizer:
        raise UsageError("a regularizer is required", parameter="regularizer")
    return parse_regularizer(cfg.regularizer)


# ---------------------------------------------------------------------------
# commands (each returns an exit status)


def cmd_regcheck(cfg, out, err) -> int:
    reg = _reg(cfg)
    report = validate_regularizer(reg, cfg.grid or 1001)
    verdict = "member" if report.member else "not a member"
    failed = [k for k in ("symmetric", "strictly_convex", "steep_at_zero") if not getattr(report, k)]
    summary = f"{reg.spec}: {verdict}" + (f" (fails: {', '.join(failed)})" if failed else "")
    _emit(cfg, _json_doc(_metadata(cfg), report.to_dict()), summary, out, err)
    if not report.member:
        record = {"code": "not_member", "message": summary, "parameter": "regularizer"}
        print(json.dumps(record), file=err)
        return 1
    return 0


def cmd_orbit(cfg, out, err) -> int:
    reg, p = _reg(cfg), map_params(cfg)
    x0 = _seed(cfg)
    keep = cfg.n or cfg.keep or 200
    orb = iterate(reg, p, x0, transient=cfg.transient or 0, keep=keep)
    artifact = orb.to_json() + "\n" if (cfg.format or "csv") == "json" else orb.to_csv()
    summary = f"orbit of {x0!r}: {keep} iterates, last x={float(orb.points[-1])!r}"
    _emit(cfg, artifact, summary, out, err)
    return 0


def cmd_cesaro(cfg, out, err) -> int:
    reg, p = _reg(cfg), map_params(cfg)
    x0 = _seed(cfg, 0.5 * p.b)
    n = cfg.n or 10 ** 5
    avg, bound = cesaro_average(reg, p, x0, n)
    body = {"seed": x0, "n": n, "average": avg, "deviation": abs(avg - p.b), "bound": bound}
    summary = f"average={avg!r} after n={n}, |average-b|={abs(avg - p.b):.3g} <= bound {bound:.3g}"
    _emit(cfg, _json_doc(_metadata(cfg, p), body), summary, out, err)
    return 0


def cmd_stability(cfg, out, err) -> int:
    reg, p = _reg(cfg), map_params(cfg)
    rep = stability(reg, p)
    summary = f"{rep.classification}, multiplier={rep.multiplier!r}, threshold={rep.threshold!r}"
    _emit(cfg, _json_doc(_metadata(cfg, p), rep.to_dict()), summary, out, err)
    return 0


def cmd_critical(cfg, out, err) -> int:
    reg, p = _reg(cfg), map_params(cfg)
    crit = critical_points(reg, p)
    summary = f"{len(crit)} critical point(s): " + ", ".join(repr(c) for c in crit)
    _emit(cfg, _json_doc(_metadata(cfg, p), {"critical_points": crit}), summary, out, err)
    return 0


def cmd_bifurcate(cfg, out, err) -> int:
    reg = _reg(cfg)
    b = sweep_b(cfg)
    if cfg.a_min is None or cfg.a_max is None or cfg.steps is None:
        raise UsageError("bifurcate needs --a-min, --a-max and --steps", parameter="a_min")
    sc = SweepConfig(
        cfg.a_min, cfg.a_max, cfg.steps, b, reg,
        transient=4000 if cfg.transient is None else cfg.transient,
        keep=cfg.keep or 200,
        seed_mode=cfg.seeds or "critical_points",
        workers=cfg.workers or 1,
    )
    ds = sweep(sc)
    summary = f"swept {ds.a_values.size} values of a with seeds {', '.join(ds.seed_labels)}"
    if cfg.compare:
        cmp = compare_attractors(ds, cfg.separation_threshold or 1e-3)
        with open(cfg.compare, "w", encoding="utf-8") as fh:
            fh.write(cmp.to_json() + "\n")
        spans = ", ".join(f"({lo!r}, {hi!r})" for lo, hi in cmp.windows) or "none"
        summary += f"; coexistence windows: {spans}"
    _emit(cfg, ds.to_csv(), summary, out, err)
    return 0


def cmd_chaos_cert(cfg, out, err) -> int:
    reg, p = _reg(cfg), map_params(cfg)
    power, odd_n = cfg.power or 1, cfg.odd_n or 3
    interval = tuple(cfg.seeds[:2]) if len(cfg.seeds) >= 2 else None
    cert = lmpy_certificate(reg, p, power, odd_n, cfg.grid or 1000, interval)
    if cert is None:
        raise CertificationError(
            f"no period-{odd_n * power} certificate found", parameter="power", a=p.a, b=p.b
        )
    u, v = cert.witness_interval
    summary = f"period {cert.implied_period} certified on [{u!r}, {v!r}] ({cert.orientation})"
    _emit(cfg, json.dumps({"metadata": _metadata(cfg, p), **cert.to_dict()}) + "\n", summary, out, err)
    return 0


def cmd_entropy(cfg, out, err) -> int:
    reg, p = _reg(cfg), map_params(cfg)
    est = topological_entropy_lap(reg, p, cfg.n_max or 20)
    summary = f"entropy estimate {est.final!r} at k={len(est.lap_counts)}" + (" (truncated)" if est.truncated else "")
    _emit(cfg, _json_doc(_metadata(cfg, p), est.to_dict()), summary, out, err)
    return 0


def cmd_lyapunov(cfg, out, err) -> int:
    reg, p = _reg(cfg), map_params(cfg)
    x0 = _seed(cfg, 0.3)
    n = cfg.n or 10 ** 5
    lam = lyapunov_exponent(reg, p, x0, n=n, transient=1000 if cfg.transient is None else cfg.transient)
    body = {"seed": x0, "n": n, "lyapunov_exponent": lam}
    _emit(cfg, _json_doc(_metadata(cfg, p), body), f"lyapunov exponent {lam!r} from x0={x0!r}", out, err)
    return 0


def cmd_schwarzian(cfg, out, err) -> int:
    reg, p = _reg(cfg), map_params(cfg)
    rep = schwarzian_scan(reg, p, cfg.grid or 1000)
    verdict = "negative everywhere" if rep.all_negative else "not negative everywhere"
    summary = f"Schwarzian {verdict} on {len(rep.grid)} points, max={max(rep.values)!r}"
    _emit(cfg, _json_doc(_metadata(cfg, p), rep.to_dict()), summary, out, err)
    return 0


def cmd_verify(cfg, out, err) -> int:
    names = cfg.criteria or list(CRITERIA)
    unknown = [n for n in names if n not in CRITERIA]
    if unknown:
        raise UsageError(f"unknown criterion {unknown[0]!r}; choose from {', '.join(CRITERIA)}",
                         parameter="criterion")
    results = run_suite(names, quick=cfg.quick, echo=lambda line: print(line, file=out, flush=True))
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed", file=out)
    if cfg.output:
        doc = {"metadata": _metadata(cfg, quick=cfg.quick), "results": [r.to_dict() for r in results]}
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, default=_json_default) + "\n")
    if passed != len(results):
        failed = [r.name for r in results if not r.passed]
        print(json.dumps({"code": "verification", "message": f"failed: {', '.join(failed)}",
                          "parameter": "criterion"}), file=err)
        return 1
    return 0


HANDLERS = {
    "regcheck": cmd_regcheck, "orbit": cmd_orbit, "cesaro": cmd_cesaro, "stability": cmd_stability,
    "critical": cmd_critical, "bifurcate": cmd_bifurcate, "chaos-cert": cmd_chaos_cert,
    "entropy": cmd_entropy, "lyapunov": cmd_lyapunov, "schwarzian": cmd_schwarzian, "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# (flag, RunConfig field, type)
_FLAGS = [
    ("--a", "a", float), ("--b", "b", float),
    ("--alpha", "alpha", float), ("--beta", "beta", float), ("--N", "N", float), ("--epsilon", "epsilon", float),
    ("--transient", "transient", int), ("--keep", "keep", int), ("--n", "n", int),
    ("--output", "output", str), ("--format", "format", str),
    ("--a-min", "a_min", float), ("--a-max", "a_max", float), ("--steps", "steps", int),
    ("--workers", "workers", int), ("--tol", "tol", float), ("--threshold", "separation_threshold", float),
    ("--power", "power", int), ("--odd-n", "odd_n", int), ("--grid", "grid", int), ("--n-max", "n_max", int),
    ("--compare", "compare", str),
]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="forel", description="FoReL congestion-game dynamics toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="flat key = value file; flags override it")
        if name == "verify":
            sp.add_argument("--quick", action="store_true", default=None)
            sp.add_argument("--criterion", action="append", dest="criteria", default=None,
                            choices=list(CRITERIA))
            sp.add_argument("--output", dest="output", default=None)
            continue
        sp.add_argument("regularizer", nargs="?", default=None)
        sp.add_argument("--x0", "--seed", dest="seeds", type=float, action="append", default=None)
        for flag, dest, typ in _FLAGS:
            sp.add_argument(flag, dest=dest, type=typ, default=None)
    return parser


def parse_run_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    if not args.command:
        raise UsageError("a command is required: " + ", ".join(COMMANDS), parameter="command")
    cfg = RunConfig()
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = RunConfig.from_text(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}", parameter="config") from None
    cfg.command = args.command
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        setattr(cfg, key, value)
    if cfg.format not in (None, "csv", "json"):
        raise UsageError(f"unknown format {cfg.format!r}", parameter="format")
    return cfg


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        cfg = parse_run_config(sys.argv[1:] if argv is None else argv)
        if cfg.command in NEEDS_MAP:
            map_params(cfg)  # surface parameterization errors before any work
        return HANDLERS[cfg.command](cfg, out, err)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except ForelError as exc:
        print(json.dumps(exc.to_record()), file=err)
        return 2 if isinstance(exc, USAGE_ERRORS) else 1
    except OSError as exc:
        print(json.dumps({"code": "io", "message": str(exc), "parameter": "output"}), file=err)
        return 1


if __name__ == "__main__":
    sys.exit(main())
