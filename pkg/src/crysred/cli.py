"""Command line interface: ``crysred run`` and ``crysred corpus``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .corpus import RowResult, load_corpus, run_row, select
from .engine import (
    DeterminantMismatch,
    InconsistentTable,
    InvalidInput,
    Reduction,
    ResourceLimit,
    Undetermined,
    compute_reduction,
)
from .relations import MODES

EXIT_OK = 0
EXIT_USAGE = 2  # argparse
EXIT_INVALID = 3
EXIT_RESOURCE = 4
EXIT_UNDETERMINED = 5
EXIT_MISMATCH = 6
EXIT_INTERNAL = 7


@dataclass(frozen=True)
class RunConfig:
    p: int
    k: int
    ap: str
    n_max: int = 6
    d_override: int | None = None
    mode: str = "subtree"
    output: str = "table"
    threads: int = 1
    timings: bool = True

    def validate(self) -> None:
        if self.n_max < 0:
            raise InvalidInput("n_max must be non-negative")
        if self.d_override is not None and self.d_override < 0:
            raise InvalidInput("d must be non-negative")
        if self.mode not in MODES:
            raise InvalidInput(f"mode must be one of {MODES}")
        if self.output not in ("table", "json"):
            raise InvalidInput("output must be table or json")
        if self.threads < 1:
            raise InvalidInput("threads must be positive")


def to_json(res: Reduction, timings: bool = True) -> dict:
    fld = res.value.field
    c = res.constancy
    return {
        "p": res.p,
        "k": res.k,
        "ap": res.ap,
        "field": {"e": fld.e, "eisenstein": list(fld.eis)},
        "v_ap": str(res.value.v),
        "n_used": res.n_used,
        "d_used": res.d_used,
        "delta": str(res.delta),
        "outcomes": [{"i": o.i, "a": o.a, "b": o.b, "kind": o.kind, "value": o.value}
                     for o in res.outcomes],
        "jh": [str(f) for f in res.jh.factors],
        "galois": {"kind": res.galois.kind, "params": res.galois.params,
                   "display": res.galois.display},
        "constancy": {"ap_radius": str(c.ap_radius), "weight_modulus": c.weight_modulus,
                      "reason": c.reason},
        "timings_ms": dict(res.timings_ms) if timings else {},
    }


def to_table(res: Reduction) -> str:
    c = res.constancy
    lines = [
        f"p = {res.p}, k = {res.k}, a_p = {res.ap}",
        f"v(a_p) = {res.value.v}, e = {res.value.field.e}",
        f"n = {res.n_used}, d = {res.d_used}, delta = {res.delta}",
        "steps:",
    ]
    lines += [f"  {o}" for o in res.outcomes]
    lines += [
        f"JH = {res.jh}",
        f"reduction: {res.galois.display}",
        f"a_p radius: v(a - a_p) > {c.ap_radius}",
        "weight modulus: " + (str(c.weight_modulus) if c.weight_modulus else f"n/a ({c.reason})"),
    ]
    return "\n".join(lines)


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        cfg.validate()
        res = compute_reduction(cfg.p, cfg.k, cfg.ap, n_max=cfg.n_max,
                                d_override=cfg.d_override, mode=cfg.mode)
    except InvalidInput as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except Undetermined as exc:
        print(f"undetermined: {exc}", file=sys.stderr)
        for o in exc.outcomes:
            print(f"  {o}", file=sys.stderr)
        return EXIT_UNDETERMINED
    except (InconsistentTable, DeterminantMismatch) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if cfg.output == "json":
        print(json.dumps(to_json(res, cfg.timings), sort_keys=True), file=out)
    else:
        print(to_table(res), file=out)
    return EXIT_OK


def _row_line(rr: RowResult, seconds: float) -> str:
    status = "PASS" if rr.ok else "FAIL"
    s = f"{status} {rr.row.label} ({seconds:.1f}s)"
    if rr.result is not None:
        r = rr.result
        s += f": {r.galois.display}, delta {r.delta}, n {r.n_used}"
    if rr.conjugate_used and rr.ok:
        s += " [conjugate root]"
    if rr.problems:
        s += " | " + "; ".join(rr.problems)
    if rr.error:
        s += " | " + rr.error
    return s


def _timed_row(args) -> tuple[RowResult, float]:
    row, mode, n_max = args
    t0 = time.perf_counter()
    rr = run_row(row, mode=mode, n_max=n_max)
    return rr, time.perf_counter() - t0


def corpus(which: str, mode: str = "subtree", threads: int = 1, path: str | None = None,
           n_max: int = 6, out=None) -> int:
    out = out or sys.stdout
    text = Path(path).read_text() if path else None
    rows = select(load_corpus(text), which)
    print(f"{len(rows)} rows", file=out)
    if not rows:
        return EXIT_OK
    jobs = [(r, mode, n_max) for r in rows]
    if threads > 1:
        with ProcessPoolExecutor(threads) as ex:
            results = list(ex.map(_timed_row, jobs))
    else:
        results = [_timed_row(j) for j in jobs]
    failed = 0
    for rr, secs in results:
        print(_row_line(rr, secs), file=out, flush=True)
        failed += not rr.ok
    print(f"{len(rows) - failed} passed, {failed} failed", file=out)
    return EXIT_OK if failed == 0 else EXIT_MISMATCH


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="crysred", description=(
        "Semi-simplified mod p reduction of the crystalline representation V_{k,a_p}."))
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="compute one reduction")
    r.add_argument("--p", type=int, required=True)
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--ap", required=True, help='a_p expression, e.g. "5*sqrt(11*21)+25"')
    r.add_argument("--n-max", type=int, default=6)
    r.add_argument("--d", dest="d_override", type=int, default=None,
                   help="fix the precision bound d instead of escalating")
    r.add_argument("--mode", choices=MODES, default="subtree")
    r.add_argument("--output", choices=("table", "json"), default="table")
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--no-timings", dest="timings", action="store_false",
                   help="emit an empty timings_ms object (byte-stable JSON)")
    c = sub.add_parser("corpus", help="check the reference rows")
    c.add_argument("which", nargs="?", choices=("fast", "slow", "all"), default="fast")
    c.add_argument("--mode", choices=MODES, default="subtree")
    c.add_argument("--threads", type=int, default=1)
    c.add_argument("--n-max", type=int, default=6)
    c.add_argument("--file", default=None, help="corpus file (default: bundled rows)")
    return ap


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0].startswith("--") and argv[0] not in ("--help",):
        argv.insert(0, "run")
    args = _parser().parse_args(argv)
    if args.command == "run":
        cfg = RunConfig(args.p, args.k, args.ap, args.n_max, args.d_override, args.mode,
                        args.output, args.threads, args.timings)
        return run(cfg)
    return corpus(args.which, args.mode, args.threads, args.file, args.n_max)


if __name__ == "__main__":
    sys.exit(main())
