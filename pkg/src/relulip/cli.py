"""Command-line front end.

Example::

    relulip --network net.json --box "[[0,1],[0,1]]" --p 2 --k 1 --trace
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass
from typing import Sequence

from .bab import BabConfig, BabResult, lip_bab
from .feasibility import FeasibilityConfig
from .network import NetworkFormatError, load_network_file
from .numerics import DimensionMismatchError, Interval, NormKind
from .subproblem import Mode

EXIT_OK = 0
EXIT_INPUT = 2

REPORT_KEYS = ("network", "mode", "p", "k", "gub", "glb", "status", "iterations",
               "subproblems_created", "subproblems_remaining", "output_bounds",
               "eps_strict", "elapsed_s", "trace")

log = logging.getLogger("relulip")


@dataclass(frozen=True)
class Report:
    network: str
    mode: str
    p: str
    k: float
    gub: float
    glb: float
    status: str
    iterations: int
    subproblems_created: int
    subproblems_remaining: int
    output_bounds: list[list[float]] | None
    eps_strict: float
    elapsed_s: float
    trace: list[list[float]] | None

    @classmethod
    def from_result(cls, result: BabResult, network: str, cfg: BabConfig,
                    with_trace: bool) -> Report:
        bounds = None
        if result.output_bounds is not None:
            bounds = [[iv.lo, iv.hi] for iv in result.output_bounds]
        trace = None
        if with_trace:
            trace = [[t.iteration, t.gub, t.glb, t.queue_size] for t in result.trace]
        return cls(
            network=network, mode=cfg.mode.value, p=cfg.p.value, k=cfg.k,
            gub=result.gub, glb=result.glb, status=result.status.value,
            iterations=result.iterations, subproblems_created=result.subproblems_created,
            subproblems_remaining=result.subproblems_remaining, output_bounds=bounds,
            eps_strict=cfg.feas.eps_strict, elapsed_s=result.elapsed, trace=trace,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), allow_nan=False)

    @classmethod
    def from_dict(cls, doc: dict) -> Report:
        missing = set(REPORT_KEYS) - set(doc)
        extra = set(doc) - set(REPORT_KEYS)
        if missing or extra:
            raise ValueError(f"report keys mismatch: missing {sorted(missing)}, extra {sorted(extra)}")
        return cls(**doc)

    @classmethod
    def from_json(cls, text: str) -> Report:
        return cls.from_dict(json.loads(text))


def parse_box(text: str) -> list[Interval]:
    """Inline JSON ``[[lo, hi], ...]`` or a path to a file holding it."""
    if os.path.exists(text):
        with open(text) as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed box: {exc}") from exc
    if isinstance(doc, dict) and "box" in doc:
        doc = doc["box"]
    if not isinstance(doc, list) or not doc:
        raise ValueError("malformed box: expected a nonempty list of [lo, hi] pairs")
    box = []
    for i, pair in enumerate(doc):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)):
            raise ValueError(f"malformed box: entry {i} is not a [lo, hi] pair")
        lo, hi = float(pair[0]), float(pair[1])
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            raise ValueError(f"malformed box: entry {i} needs finite lo <= hi")
        box.append(Interval(lo, hi))
    return box


def _norm(text: str) -> NormKind:
    try:
        return NormKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _k(text: str) -> float:
    try:
        k = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid k: {text!r}") from None
    if not k >= 1:
        raise argparse.ArgumentTypeError("k must be >= 1")
    return k


def _positive(kind):
    def parse(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value: {text!r}") from None
        if not value > 0:
            raise argparse.ArgumentTypeError("must be positive")
        return value
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relulip",
        description="Certified upper bounds and exact Lipschitz constants of ReLU networks.")
    parser.add_argument("--network", required=True, help="network JSON file")
    parser.add_argument("--box", help="input box as JSON [[lo,hi],...] or a file containing it")
    parser.add_argument("--p", type=_norm, default=NormKind.TWO, help="norm: 1, 2, inf or fro")
    parser.add_argument("--k", type=_k, default=1.0, help="approximation factor, >= 1")
    parser.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.LOCAL.value)
    parser.add_argument("--max-iterations", type=_positive(int), default=1_000_000)
    parser.add_argument("--time-limit", type=_positive(float), default=300.0, help="seconds")
    parser.add_argument("--eps-strict", type=_positive(float), default=1e-7,
                        help="margin used for strict inequalities")
    parser.add_argument("--trace", action="store_true", help="include per-iteration bounds")
    parser.add_argument("--trace-csv", metavar="PATH", help="also write the trace as CSV")
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--seed", type=int, default=0, help="seed for the power-iteration start")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def write_trace_csv(path: str, result: BabResult) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "gub", "glb", "queue_size"])
        for row in result.trace:
            writer.writerow([row.iteration, repr(row.gub), repr(row.glb), row.queue_size])


def run_cli(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    def fail(message: str) -> int:
        print(f"relulip: error: {message}", file=sys.stderr)
        return EXIT_INPUT

    try:
        net = load_network_file(args.network)
    except OSError as exc:
        return fail(f"cannot read network: {exc}")
    except (NetworkFormatError, DimensionMismatchError) as exc:
        return fail(f"invalid network: {exc}")

    mode = Mode(args.mode)
    box = None
    if mode is Mode.LOCAL:
        if args.box is None:
            return fail("--box is required in local mode")
        try:
            box = parse_box(args.box)
        except (OSError, ValueError) as exc:
            return fail(str(exc))
        if len(box) != net.input_dim:
            return fail(f"box has {len(box)} intervals, network expects {net.input_dim}")

    cfg = BabConfig(p=args.p, k=args.k, mode=mode, max_iterations=args.max_iterations,
                    time_limit=args.time_limit, feas=FeasibilityConfig(eps_strict=args.eps_strict),
                    seed=args.seed)
    result = lip_bab(net, box, cfg)
    for note in result.notes:
        log.warning(note)
    report = Report.from_result(result, args.network, cfg, args.trace)
    text = report.to_json() + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.trace_csv:
        write_trace_csv(args.trace_csv, result)
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
