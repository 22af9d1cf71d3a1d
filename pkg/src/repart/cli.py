"""Command line driver: ``repart run|sweep|oracle|uf-replay``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

from .adversary import gen_inverse_eps, gen_log_rounds, gen_random, random_instance, wrap_repetition
from .apps import UnionFindFacade
from .core import as_fraction, load_instance
from .distsim import DistributedRun
from .errors import BadParameters, InvalidInstance, NoBalancedAssignment, OffIsZero, WrongServerCount
from .estimators import ALGORITHMS, make_algorithm
from .oracle import competitive_ratio, off_optimal
from .partition2 import delta_two
from .partition_multi import approx_offline

SCHEMA_VERSION = 1
COLUMNS = [
    "schema_version", "n", "ell", "epsilon", "alpha", "algorithm", "sequence", "seed",
    "comm_units", "moved_vertices", "total_cost", "off_cost", "approx_cost", "ratio",
    "rebuilds", "move_msgs", "control_msgs", "stopped", "wall_ms", "error",
]
SEQUENCES = ("random", "adversary-eps", "adversary-log", "file")
TWO_SERVER_ONLY = ("mv", "combined2")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    n: int = 64
    ell: int = 2
    epsilon: str = "1/4"
    alpha: str = "2"
    algorithm: str = "combined2"
    sequence: str = "random"
    seed: int = 0
    repeat: int = 1
    distributed: bool = False
    eps_prime: str | None = None
    instance_path: str | None = None

    def validate(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.sequence not in SEQUENCES:
            raise ConfigError(f"unknown sequence source {self.sequence!r}")
        if self.repeat < 1:
            raise ConfigError("--repeat must be at least 1")
        try:
            as_fraction(self.epsilon), as_fraction(self.alpha)
            if self.eps_prime is not None:
                as_fraction(self.eps_prime)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad rational: {exc}") from exc
        if self.sequence == "file":
            if not self.instance_path:
                raise ConfigError("--sequence file needs --instance PATH")
            return
        if self.n < 1 or self.ell < 1 or self.n % self.ell:
            raise ConfigError("--servers must divide --n")
        if self.sequence.startswith("adversary") and self.ell != 2:
            raise ConfigError("adversarial sequences use two servers")
        if self.sequence == "adversary-log" and self.n & (self.n - 1):
            raise ConfigError("adversary-log needs a power-of-two n")
        if self.algorithm in TWO_SERVER_ONLY and self.ell != 2:
            raise ConfigError(f"{self.algorithm} needs exactly two servers")


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return str(x)


def build_input(cfg: RunConfig):
    """Instance and request sequence for ``cfg`` (adversaries play against the chosen algorithm)."""
    eps, alpha = as_fraction(cfg.epsilon), as_fraction(cfg.alpha)

    def factory(inst):
        return make_algorithm(cfg.algorithm, inst, cfg.eps_prime)

    if cfg.sequence == "file":
        inst, seq = load_instance(cfg.instance_path)
        if seq is None:
            raise ConfigError("instance file carries no edges")
    elif cfg.sequence == "random":
        inst = random_instance(cfg.n, cfg.ell, eps, alpha, seed=cfg.seed)
        seq = gen_random(inst, seed=cfg.seed)
    elif cfg.sequence == "adversary-eps":
        inst, seq = gen_inverse_eps(cfg.n, eps, alpha, algorithm=factory)
    else:
        inst, seq = gen_log_rounds(cfg.n, eps, algorithm=factory, alpha=alpha)
    if cfg.repeat > 1:
        seq = wrap_repetition(seq, cfg.repeat)
    return inst, seq


def execute(cfg: RunConfig) -> dict:
    """Run one configuration and return its result row (raises on errors)."""
    cfg.validate()
    t0 = time.perf_counter()
    inst, seq = build_input(cfg)
    alg = make_algorithm(cfg.algorithm, inst, cfg.eps_prime)
    row = {c: "" for c in COLUMNS}
    if cfg.distributed:
        run = DistributedRun(alg).run(seq)
        row.update(rebuilds=run.messages.rebuilds, move_msgs=run.messages.move_msgs,
                   control_msgs=run.messages.control_msgs)
    else:
        alg.run(seq)
    ledger = alg.ledger
    off = off_optimal(inst)
    _, approx_moved = approx_offline(inst)
    try:
        ratio = _fmt(float(competitive_ratio(ledger, off, inst.alpha)))
    except OffIsZero:
        ratio = "inf"
    row.update(
        schema_version=SCHEMA_VERSION, n=inst.n, ell=inst.ell, epsilon=_fmt(inst.epsilon),
        alpha=_fmt(inst.alpha), algorithm=cfg.algorithm, sequence=cfg.sequence, seed=cfg.seed,
        comm_units=ledger.comm_units, moved_vertices=ledger.moved_vertices,
        total_cost=_fmt(ledger.total(inst.alpha)), off_cost=_fmt(off.cost),
        approx_cost=_fmt(inst.alpha * approx_moved), ratio=ratio, stopped=str(alg.stopped).lower(),
        wall_ms=round((time.perf_counter() - t0) * 1000, 3),
    )
    return row


def execute_safe(cfg: RunConfig) -> dict:
    """Like :func:`execute` but records failures in the ``error`` column."""
    try:
        return execute(cfg)
    except Exception as exc:  # one bad row must not sink a sweep
        row = {c: "" for c in COLUMNS}
        row.update(schema_version=SCHEMA_VERSION, n=cfg.n, ell=cfg.ell, epsilon=cfg.epsilon,
                   alpha=cfg.alpha, algorithm=cfg.algorithm, sequence=cfg.sequence, seed=cfg.seed,
                   error=f"{type(exc).__name__}: {exc}")
        return row


def format_rows(rows, fmt: str) -> str:
    buf = io.StringIO()
    if fmt == "jsonl":
        for r in rows:
            buf.write(json.dumps({c: r.get(c, "") for c in COLUMNS}) + "\n")
    else:
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def _write(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        n=args.n, ell=args.servers, epsilon=args.epsilon, alpha=args.alpha, algorithm=args.algorithm,
        sequence=args.sequence, seed=args.seed, repeat=args.repeat, distributed=args.distributed,
        eps_prime=args.eps_prime, instance_path=args.instance,
    )


def _axis_value(axis: str, raw: str):
    if axis == "epsilon":
        return raw
    return int(raw)


def sweep(template: RunConfig, axis: str, values, workers: int = 1) -> list[dict]:
    field = {"n": "n", "ell": "ell", "epsilon": "epsilon", "seed": "seed"}[axis]
    configs = [replace(template, **{field: _axis_value(axis, str(v))}) for v in values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(execute_safe, configs))  # map keeps input order
    return [execute_safe(c) for c in configs]


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    row = execute(cfg)
    _write(format_rows([row], args.format), args.out)
    return 0


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    values = [v for v in args.values.split(",") if v]
    if not values:
        raise ConfigError("--values is empty")
    rows = sweep(cfg, args.axis, values, args.workers)
    _write(format_rows(rows, args.format), args.out)
    return 0


def cmd_oracle(args) -> int:
    if args.instance:
        inst, _ = load_instance(args.instance)
    else:
        inst = random_instance(args.n, args.servers, args.epsilon, args.alpha, seed=args.seed)
    off = off_optimal(inst)
    _, approx_moved = approx_offline(inst)
    out = {
        "n": inst.n, "ell": inst.ell, "off_cost": _fmt(off.cost), "off_moved": off.moved_vertices,
        "matching": list(off.matching), "approx_cost": _fmt(inst.alpha * approx_moved),
        "approx_moved": approx_moved,
    }
    if inst.ell == 2:
        out["delta"] = delta_two(inst)
    _write(json.dumps(out) + "\n", args.out)
    return 0


def cmd_uf_replay(args) -> int:
    if not args.script:
        raise ConfigError("uf-replay needs --script PATH")
    with open(args.script, encoding="utf-8") as fh:
        script = json.load(fh)
    if args.instance:
        inst, _ = load_instance(args.instance)
    else:
        inst = random_instance(args.n, args.servers, args.epsilon, args.alpha, seed=args.seed)
    facade = UnionFindFacade(inst, algorithm=lambda i: make_algorithm(args.algorithm, i, args.eps_prime))
    lines = []
    for step in script:
        op, params = step.get("op"), step.get("args", [])
        if op == "union":
            facade.union(*map(int, params))
        elif op == "find":
            set_id, server = facade.find(int(params[0]))
            lines.append(json.dumps({"element": int(params[0]), "set": set_id, "server": server}))
        else:
            raise ConfigError(f"unknown op {op!r}")
    ledger = facade.ledger
    lines.append(json.dumps({"comm_units": ledger.comm_units, "moved_vertices": ledger.moved_vertices}))
    _write("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    default_seed = int(os.environ.get("REPART_SEED", "0"))
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=64)
    common.add_argument("--servers", type=int, default=2)
    common.add_argument("--epsilon", default="1/4", help="NUM/DEN")
    common.add_argument("--alpha", default="2", help="NUM/DEN")
    common.add_argument("--algorithm", default=None, choices=sorted(ALGORITHMS),
                        help="default: combined2 (uf-replay: combinedL)")
    common.add_argument("--sequence", default="random", choices=SEQUENCES)
    common.add_argument("--seed", type=int, default=default_seed)
    common.add_argument("--repeat", type=int, default=1)
    common.add_argument("--distributed", action="store_true")
    common.add_argument("--eps-prime", default=None, help="NUM/DEN, load slack for slr-poly")
    common.add_argument("--instance", default=None, help="JSON instance (with edges for --sequence file)")
    common.add_argument("--out", default=None)
    common.add_argument("--format", default="csv", choices=("csv", "jsonl"))

    parser = argparse.ArgumentParser(prog="repart", description="Online repartitioning experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="one run, one result row").set_defaults(func=cmd_run)
    sp = sub.add_parser("sweep", parents=[common], help="one row per axis value")
    sp.add_argument("--axis", required=True, choices=("n", "ell", "epsilon", "seed"))
    sp.add_argument("--values", required=True, help="comma-separated")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)
    sub.add_parser("oracle", parents=[common], help="offline optimum and approximation").set_defaults(func=cmd_oracle)
    up = sub.add_parser("uf-replay", parents=[common], help="replay a union/find script")
    up.add_argument("--script", default=None)
    up.set_defaults(func=cmd_uf_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.algorithm is None:
        args.algorithm = "combinedL" if args.command == "uf-replay" else "combined2"
    try:
        return args.func(args)
    except NoBalancedAssignment as exc:
        print(f"error: model violation: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, BadParameters, InvalidInstance, WrongServerCount, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
