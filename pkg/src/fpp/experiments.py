"""Command-line experiment runner.

Every output file starts with a metadata record holding the resolved run
configuration (minus ``workers`` and ``out``, which do not affect results)
and the package version, so identical configurations give identical bytes.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

from fpp import __version__
from fpp.errors import FPPError

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

SUBCOMMANDS = ("estimate", "scan", "verify-coupling", "cs2-check", "counterexample", "footnote-demo", "oracle-check")


@dataclass
class RunConfig:
    spec: Optional[dict] = None
    d: int = 2
    n: Optional[int] = None
    n_max: Optional[int] = None
    replicates: int = 1000
    master_seed: int = 0
    mode: str = "free"
    workers: int = 1
    out: Optional[str] = None
    resamples: int = 64
    a: Optional[float] = None
    b: Optional[float] = None
    background: Optional[float] = None
    max_c: int = 12
    max_d: int = 12
    max_n: int = 30
    epsilons: list = field(default_factory=lambda: [0.001, 0.01])
    ps: list = field(default_factory=lambda: [0.01, 0.02, 0.05, 0.1, 0.2])
    height: Optional[int] = None

    def metadata(self, command: str) -> dict:
        cfg = dataclasses.asdict(self)
        cfg.pop("workers")
        cfg.pop("out")
        return {"command": command, "version": __version__, "config": cfg}

    def weight_spec(self):
        from fpp.weights import spec_from_json

        if self.spec is None:
            raise UsageError("a weight law is required (--spec or 'spec' in --config)")
        return spec_from_json(self.spec)


class UsageError(FPPError):
    pass


class PropertyViolation(FPPError):
    pass


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(stream, meta: dict, header: str, rows) -> None:
    stream.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    stream.write(header + "\n")
    for row in rows:
        stream.write(",".join(fmt(x) for x in row) + "\n")


def write_jsonl(stream, records) -> None:
    for rec in records:
        stream.write(json.dumps(rec, sort_keys=True) + "\n")


class _Output:
    """--out file if given, else stdout."""

    def __init__(self, path: Optional[str]):
        self.path = path

    def __enter__(self):
        if self.path is None:
            self.stream = sys.stdout
        else:
            self.stream = open(self.path, "w", encoding="utf-8", newline="\n")
        return self.stream

    def __exit__(self, *exc):
        if self.path is not None:
            self.stream.close()


# -- subcommands -----------------------------------------------------------------

def _require(cfg: RunConfig, name: str):
    value = getattr(cfg, name)
    if value is None:
        raise UsageError(f"--{name.replace('_', '-')} is required")
    return value


def cmd_estimate(cfg: RunConfig) -> int:
    from fpp.estimator import estimate_a

    n = _require(cfg, "n")
    est = estimate_a(cfg.weight_spec(), n, cfg.replicates, cfg.mode, cfg.master_seed, d=cfg.d, workers=cfg.workers)
    with _Output(cfg.out) as out:
        write_csv(out, cfg.metadata("estimate"), "n,a_mean,a_stderr,ci_lo,ci_hi,count",
                  [[n, est.mean, est.std_err, est.ci95[0], est.ci95[1], est.count]])
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    from fpp.estimator import ScanRow, monotonicity_scan

    n_max = _require(cfg, "n_max")
    rows = monotonicity_scan(cfg.weight_spec(), n_max, cfg.replicates, cfg.mode, cfg.master_seed,
                             d=cfg.d, workers=cfg.workers)
    with _Output(cfg.out) as out:
        write_csv(out, cfg.metadata("scan"), ScanRow.CSV_HEADER, [r.csv_fields() for r in rows])
    return EXIT_OK


def _coupling_mode(cfg: RunConfig, n: int):
    from fpp.shortest_path import FREE, Cylinder

    if cfg.mode == "free":
        return FREE
    if cfg.mode == "cylinder":
        return Cylinder(n)
    raise UsageError(f"mode must be 'free' or 'cylinder', got {cfg.mode!r}")


def cmd_verify_coupling(cfg: RunConfig) -> int:
    from fpp.coupling import verify_coupling_batch

    n = _require(cfg, "n")
    batch = verify_coupling_batch(cfg.weight_spec(), n, cfg.replicates, cfg.master_seed, d=cfg.d,
                                  mode=_coupling_mode(cfg, n), workers=cfg.workers)
    summary = batch.summary()
    with _Output(cfg.out) as out:
        write_jsonl(out, [{"meta": cfg.metadata("verify-coupling")}])
        write_jsonl(out, (batch.report(r).to_json() for r in range(batch.replicates)))
        write_jsonl(out, [{"summary": summary}])
    if cfg.out is not None:
        print(json.dumps(summary, sort_keys=True))
    if not summary["ok"]:
        raise PropertyViolation(f"coupling inequality violated beyond tolerance: {summary}")
    return EXIT_OK


def cmd_cs2_check(cfg: RunConfig) -> int:
    from fpp.coupling import verify_cs2_batch

    n = _require(cfg, "n")
    batch = verify_cs2_batch(cfg.weight_spec(), n, cfg.replicates, cfg.resamples, cfg.master_seed, d=cfg.d,
                             mode=_coupling_mode(cfg, n), workers=cfg.workers)
    summary = batch.summary()
    with _Output(cfg.out) as out:
        write_jsonl(out, [{"meta": cfg.metadata("cs2-check")}])
        write_jsonl(out, (batch.report(r).to_json() for r in range(len(batch.T))))
        write_jsonl(out, [{"summary": summary}])
    if cfg.out is not None:
        print(json.dumps(summary, sort_keys=True))
    if not summary["ok"]:
        raise PropertyViolation(f"CS2 averaged inequality violated: {summary}")
    return EXIT_OK


def cmd_counterexample(cfg: RunConfig) -> int:
    from fpp.estimator import CounterexampleResult, counterexample_sweep

    cells = counterexample_sweep(cfg.epsilons, cfg.ps, cfg.replicates, cfg.master_seed,
                                 height=cfg.height, workers=cfg.workers)
    with _Output(cfg.out) as out:
        write_csv(out, cfg.metadata("counterexample"), CounterexampleResult.CSV_HEADER,
                  [c.csv_fields() for c in cells])
    return EXIT_OK


def cmd_footnote_demo(cfg: RunConfig) -> int:
    from fpp.coupling import box_event_search

    a, b = _require(cfg, "a"), _require(cfg, "b")
    found = box_event_search(cfg.weight_spec(), a, b, max_C=cfg.max_c, max_D=cfg.max_d, max_n=cfg.max_n,
                            background=cfg.background, d=cfg.d)
    if found is None:
        raise PropertyViolation(f"no reversing box event with C, D <= {cfg.max_c}, {cfg.max_d}, n <= {cfg.max_n}")
    with _Output(cfg.out) as out:
        write_csv(out, cfg.metadata("footnote-demo"), "C,D,n,T_prev,T_n,reverified",
                  [[found.C, found.D, found.n, found.t_prev, found.t_n, found.reverified]])
    if not found.reverified:
        raise PropertyViolation("oracle re-verification of the box event failed")
    return EXIT_OK


def cmd_oracle_check(cfg: RunConfig) -> int:
    from fpp.validation import oracle_suite

    results = oracle_suite(cfg.replicates, cfg.master_seed)
    with _Output(cfg.out) as out:
        write_csv(out, cfg.metadata("oracle-check"), "check,passed,detail",
                  [[name, ok, json.dumps(detail, sort_keys=True).replace(",", ";")] for name, ok, detail in results])
    failed = [name for name, ok, _ in results if not ok]
    if failed:
        raise PropertyViolation(f"oracle checks failed: {', '.join(failed)}")
    return EXIT_OK


COMMANDS = {
    "estimate": cmd_estimate,
    "scan": cmd_scan,
    "verify-coupling": cmd_verify_coupling,
    "cs2-check": cmd_cs2_check,
    "counterexample": cmd_counterexample,
    "footnote-demo": cmd_footnote_demo,
    "oracle-check": cmd_oracle_check,
}


# -- argument handling ------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fpp", description="First-passage percolation experiments.")
    parser.add_argument("--version", action="version", version=f"fpp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with RunConfig fields")
        p.add_argument("--spec", help='weight law as JSON, e.g. {"kind":"uniform","lo":1,"hi":1.5}')
        p.add_argument("--d", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--n-max", dest="n_max", type=int)
        p.add_argument("--reps", dest="replicates", type=int)
        p.add_argument("--seed", dest="master_seed", type=int)
        p.add_argument("--mode", choices=("free", "cylinder"))
        p.add_argument("--workers", type=int)
        p.add_argument("--out")
        p.add_argument("--resamples", type=int)
        p.add_argument("--a", type=float)
        p.add_argument("--b", type=float)
        p.add_argument("--background", type=float)
        p.add_argument("--max-c", dest="max_c", type=int)
        p.add_argument("--max-d", dest="max_d", type=int)
        p.add_argument("--max-n", dest="max_n", type=int)
        p.add_argument("--epsilons", type=_floats)
        p.add_argument("--ps", type=_floats)
        p.add_argument("--height", type=int)
    return parser


def resolve_config(args: argparse.Namespace, environ=os.environ) -> RunConfig:
    """Defaults, then FPP_SEED, then the --config file, then explicit flags."""
    cfg = RunConfig()
    if environ.get("FPP_SEED"):
        try:
            cfg.master_seed = int(environ["FPP_SEED"])
        except ValueError:
            raise UsageError(f"FPP_SEED={environ['FPP_SEED']!r} is not an integer") from None
    known = {f.name for f in dataclasses.fields(RunConfig)}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        for key, value in data.items():
            setattr(cfg, key, value)
    for key in known:
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if isinstance(cfg.spec, str):
        try:
            cfg.spec = json.loads(cfg.spec)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--spec is not valid JSON: {exc}") from None
    if cfg.spec is not None:
        from fpp.weights import spec_from_json

        cfg.spec = spec_from_json(cfg.spec).to_json()
    if cfg.d < 2:
        raise UsageError(f"d={cfg.d} must be at least 2")
    if cfg.workers < 1:
        raise UsageError(f"workers={cfg.workers} must be at least 1")
    if cfg.replicates < 2:
        raise UsageError(f"replicates={cfg.replicates} must be at least 2")
    return cfg


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except PropertyViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (FPPError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
