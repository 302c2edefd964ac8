"""Command line: check, diameter, pqe, validate, gen, oracle.

Exit codes: 0 success or property holds, 1 usage or parse error, 3 a
requested cross-check failed, 10 counterexample found, 20 resource limit.
"""

from __future__ import annotations

import argparse
import os
import sys

from .cnf import format_dimacs
from .errors import PqeCheckError, ResourceLimit, UsageError
from .fc import FcConfig, fc_prove
from .gen import FAMILIES, generate
from .oracle import MAX_TABLE_VARS, check_property_bf, exact_diameter, pqe_check, reach_bfs
from .pp import PpConfig, compute_diameter, run_pp
from .pqe import parse_pqe, take_out, take_out_enum
from .system import cex_violation, format_cex, format_sts, load_sts, parse_cex

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MISMATCH = 3
EXIT_CEX = 10
EXIT_RESOURCE = 20

ORACLE_BOUND = 16  # state plus input bits for --oracle-check


def _default_seed() -> int:
    raw = os.environ.get("PQECHECK_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"PQECHECK_SEED must be an integer, got {raw!r}") from None


def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pqecheck", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def solver_opts(sp):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--max-frames", type=_positive, default=None)
        sp.add_argument("--pick", choices=("fifo", "shortest"), default="fifo")
        sp.add_argument("--sat-budget", type=_positive, default=None, help="conflicts per SAT call")
        sp.add_argument("--pqe-nodes", type=_positive, default=10**7, help="branch nodes per PQE call")
        sp.add_argument("--stats", action="store_true")
        sp.add_argument("--verbose", action="store_true")

    c = sub.add_parser("check", help="prove a property or find a counterexample")
    c.add_argument("model")
    c.add_argument("--mode", choices=("pp", "fc"), default="pp")
    c.add_argument("--engine", choices=("dseq", "enum"), default="dseq")
    c.add_argument("--validate", action="store_true", help="re-check any counterexample before printing")
    c.add_argument("--oracle-check", action="store_true", help="compare the verdict with explicit search")
    c.add_argument("--multi-state", action="store_true", help="fc: try to exclude two states per clause")
    solver_opts(c)

    d = sub.add_parser("diameter", help="reachability diameter")
    d.add_argument("model")
    d.add_argument("--oracle-check", action="store_true")
    solver_opts(d)

    q = sub.add_parser("pqe", help="take A out of the quantifiers of a .pqe problem")
    q.add_argument("problem")
    q.add_argument("--engine", choices=("dseq", "enum"), default="dseq")
    q.add_argument("--check", action="store_true", help="verify the result by enumeration")
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--pqe-nodes", type=_positive, default=10**7)
    q.add_argument("--stats", action="store_true")

    v = sub.add_parser("validate", help="check a counterexample file against a model")
    v.add_argument("model")
    v.add_argument("cex")

    g = sub.add_parser("gen", help="print a generated model")
    g.add_argument("family", choices=FAMILIES)
    g.add_argument("params", nargs="*")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("-o", "--output", default=None)

    o = sub.add_parser("oracle", help="explicit-state answers")
    o.add_argument("model")
    o.add_argument("query", choices=("reach", "diameter", "verdict"))
    o.add_argument("--dump", action="store_true", help="list states per level")
    return p


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _load(path: str):
    try:
        return load_sts(path)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _pp_config(args, io) -> PpConfig:
    seed = args.seed if args.seed is not None else _default_seed()
    log = (lambda line: print(line, file=io.err)) if args.verbose else None
    return PpConfig(
        pick_order=args.pick,
        max_frames=args.max_frames,
        seed=seed,
        sat_budget=args.sat_budget,
        pqe_max_nodes=args.pqe_nodes,
        pqe_engine=getattr(args, "engine", "dseq"),
        log=log,
    )


def _print_stats(io, stats: dict):
    print(" ".join(f"{k}={v}" for k, v in stats.items()), file=io.err)


class _Streams:
    def __init__(self, out, err):
        self.out = out
        self.err = err


def _cmd_check(args, io) -> int:
    ts = _load(args.model)
    cfg = _pp_config(args, io)
    if args.mode == "pp":
        run = run_pp(ts, cfg)
        verdict, stats = run.verdict, run.stats
    else:
        run = fc_prove(ts, FcConfig(pp=cfg, multi_state=args.multi_state))
        verdict = run.verdict
        stats = {"iterations": len(run.iterations)}
    if args.oracle_check:
        if ts.k + ts.m > ORACLE_BOUND:
            print(f"oracle=skipped bits={ts.k + ts.m}", file=io.err)
        else:
            ref = check_property_bf(ts)
            if ref.holds != verdict.holds:
                print(f"MISMATCH checker={'holds' if verdict.holds else 'cex'} oracle={'holds' if ref.holds else 'cex'}", file=io.out)
                return EXIT_MISMATCH
            if args.mode == "pp" and ref.holds and ref.diameter != verdict.diameter:
                print(f"MISMATCH diameter={verdict.diameter} oracle={ref.diameter}", file=io.out)
                return EXIT_MISMATCH
    if args.stats:
        _print_stats(io, stats)
    if verdict.holds:
        print(f"HOLDS diameter={verdict.diameter}", file=io.out)
        return EXIT_OK
    if args.validate:
        why = cex_violation(ts, verdict.trace)
        if why is not None:
            print(f"INVALID {why}", file=io.out)
            return EXIT_MISMATCH
    io.out.write(format_cex(verdict.trace))
    return EXIT_CEX


def _cmd_diameter(args, io) -> int:
    ts = _load(args.model)
    cfg = _pp_config(args, io)
    d = compute_diameter(ts, cfg)
    if args.oracle_check and ts.k + ts.m <= ORACLE_BOUND:
        ref = exact_diameter(ts)
        if ref != d:
            print(f"MISMATCH diameter={d} oracle={ref}", file=io.out)
            return EXIT_MISMATCH
    print(f"diameter={d}", file=io.out)
    return EXIT_OK


def _cmd_pqe(args, io) -> int:
    prob = parse_pqe(_read(args.problem))
    if args.engine == "enum":
        sol = take_out_enum(prob)
    else:
        seed = args.seed if args.seed is not None else _default_seed()
        sol = take_out(prob, max_nodes=args.pqe_nodes, seed=seed)
    if args.check:
        if len(prob.a.vars | prob.b.vars) > MAX_TABLE_VARS:
            raise UsageError(f"--check supports at most {MAX_TABLE_VARS} variables")
        if not pqe_check(prob.a, prob.b, prob.quantified, sol.a_star):
            print("c MISMATCH result fails the enumeration check", file=io.out)
            io.out.write(format_dimacs(sol.a_star))
            return EXIT_MISMATCH
    if args.stats:
        _print_stats(io, sol.stats.as_dict())
    io.out.write(format_dimacs(sol.a_star))
    return EXIT_OK


def _cmd_validate(args, io) -> int:
    ts = _load(args.model)
    tr = parse_cex(_read(args.cex))
    try:
        why = cex_violation(ts, tr)
    except UsageError as e:
        why = str(e)
    if why is None:
        print("VALID", file=io.out)
        return EXIT_OK
    print(f"INVALID {why}", file=io.out)
    return EXIT_MISMATCH


def _cmd_gen(args, io) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    ts = generate(args.family, *args.params, seed=seed)
    label = " ".join([args.family] + list(args.params))
    text = format_sts(ts, comments=[f"generated: {label}"])
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as e:
            raise UsageError(f"cannot write {args.output}: {e.strerror}") from None
    else:
        io.out.write(text)
    return EXIT_OK


def _cmd_oracle(args, io) -> int:
    ts = _load(args.model)
    if args.query == "reach":
        io.out.write(reach_bfs(ts).format(dump=args.dump))
        return EXIT_OK
    if args.query == "diameter":
        print(f"diameter={exact_diameter(ts)}", file=io.out)
        return EXIT_OK
    v = check_property_bf(ts)
    if v.holds:
        print(f"HOLDS diameter={v.diameter}", file=io.out)
        return EXIT_OK
    io.out.write(format_cex(v.trace))
    return EXIT_CEX


_COMMANDS = {
    "check": _cmd_check,
    "diameter": _cmd_diameter,
    "pqe": _cmd_pqe,
    "validate": _cmd_validate,
    "gen": _cmd_gen,
    "oracle": _cmd_oracle,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    io = _Streams(stdout or sys.stdout, stderr or sys.stderr)
    try:
        args = _build_parser().parse_args(argv)
        return _COMMANDS[args.cmd](args, io)
    except ResourceLimit as e:
        print(f"error: resource limit: {e}", file=io.err)
        if e.stats:
            _print_stats(io, e.stats)
        return EXIT_RESOURCE
    except (PqeCheckError, ValueError) as e:
        print(f"error: {e}", file=io.err)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return EXIT_OK if not e.code else EXIT_USAGE


def main_exit():
    sys.exit(main())
