"""Command-line entry point.

Exit status: 0 clean, 1 deadlock found (or a sweep verdict not reproduced),
2 usage or configuration error, 3 inconclusive search.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import casestudies as cs
from .config import KIND_ALIASES, ConfigError, RunConfig
from .errors import ConstructionError, DeterminismViolation, QueryTransportError
from .export import (
    TABLE1_COLUMNS, TABLE2_COLUMNS, dump_model, emit_dot, emit_promela, format_table, load_model,
    to_json, verdict_row,
)
from .learner import learn_ia
from .mcheck import DEADLOCK, INCONCLUSIVE, find_deadlock
from .middleware import NONBLOCKING_READ, STANDARD, STRICT, NONSTRICT, PortSession
from .remote import SulServer, connect
from .teacher import Teacher

log = logging.getLogger("midlearn")

EXIT_OK, EXIT_DEADLOCK, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

# learning sweep, first block: label, variant, capacity, extensions
TABLE1_TOP = [
    ("port", STANDARD, None, ()),
    ("buffered port (non-strict)", NONSTRICT, None, ()),
    ("buffered port (strict)", STRICT, 3, ()),
    ("buffered port (non-strict)*", NONSTRICT, None, (NONBLOCKING_READ,)),
    ("buffered port (strict)*", STRICT, 3, (NONBLOCKING_READ,)),
]


def _port_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=sorted(KIND_ALIASES))
    p.add_argument("--n", type=int, help="buffer capacity (strict) or burst length (case1)")
    p.add_argument("--ext", dest="extensions", action="append", choices=["nonblocking_read", "interrupt"])
    p.add_argument("--observation", choices=["delivery", "delivery-nodata", "events"])
    p.add_argument("--interrupt-mode", dest="interrupt_mode", choices=["actual", "expected"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="midlearn", argument_default=argparse.SUPPRESS)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="identify a port model", argument_default=argparse.SUPPRESS)
    p.add_argument("--config")
    _port_flags(p)
    p.add_argument("--extra-states", dest="extra_states", type=int)
    p.add_argument("--random-words", dest="random_words", type=int)
    p.add_argument("--max-word-len", dest="max_word_len", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--no-cache", dest="use_cache", action="store_false")
    p.add_argument("--remote", help="HOST:PORT of a serve-sul instance")
    p.add_argument("--out", help="write the model file here")
    p.add_argument("--dot", help="write DOT here")
    p.add_argument("--json-report", dest="json_report")

    p = sub.add_parser("verify", help="check a case study for deadlocks", argument_default=argparse.SUPPRESS)
    p.add_argument("case", nargs="?", choices=["case1", "case2"])
    p.add_argument("--config")
    p.add_argument("--port", choices=sorted(KIND_ALIASES))
    p.add_argument("--n", type=int)
    for name in ("n1", "n2", "n3", "size"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--nonblocking-first", dest="nonblocking_first", action="store_true")
    p.add_argument("--compress", action="store_true")
    p.add_argument("--order", choices=["dfs", "bfs"])
    p.add_argument("--max-states", dest="max_states", type=int)
    p.add_argument("--max-time", dest="max_time", type=float)
    p.add_argument("--witness", help="witness file (default: witness.txt on deadlock)")
    p.add_argument("--promela", help="also write the network as PROMELA here")
    p.add_argument("--json-report", dest="json_report")

    p = sub.add_parser("sweep", help="reproduce the identification and verification tables")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--table", choices=["1", "2", "all"], default="all")
    p.add_argument("--timings", action="store_true", help="include wall-clock columns")
    p.add_argument("--compress", action="store_true")

    p = sub.add_parser("serve-sul", help="serve a simulated port over TCP", argument_default=argparse.SUPPRESS)
    p.add_argument("--config")
    _port_flags(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", dest="listen_port", type=int, default=7878)
    p.add_argument("--once", action="store_true")

    p = sub.add_parser("export", help="convert a model file")
    p.add_argument("model")
    p.add_argument("--format", choices=["dot", "promela", "model"], default="dot")
    p.add_argument("--name", default="Model")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    values = dict(vars(args))
    base = RunConfig()
    path = values.pop("config", None)
    if path:
        base = RunConfig.loads(Path(path).read_text())
    data = base.to_dict()
    for key in list(values):
        if key in data:
            data[key] = values[key]
    return RunConfig.from_dict(data).validate()


def _write(path: Optional[str], text: str) -> None:
    if path:
        Path(path).write_text(text)


def cmd_learn(args) -> int:
    cfg = _config(args)
    kind = cfg.port_kind()
    remote = getattr(args, "remote", None)
    if remote:
        host, _, port = remote.rpartition(":")
        sul = connect(host or "127.0.0.1", int(port))
    else:
        sul = PortSession(kind, cfg.observation)
    try:
        ia, stats = learn_ia(Teacher(sul, cfg.eq_config(), use_cache=cfg.use_cache))
    finally:
        if remote:
            sul.close()
    label = _kind_label(kind)
    row = [label, len(ia.states), len(ia.transitions), stats.mm_queries, stats.eq_queries,
           stats.experiments, f"{stats.elapsed:.3f}"]
    sys.stdout.write(format_table(TABLE1_COLUMNS, [row]))
    _write(cfg.out, dump_model(ia))
    _write(cfg.dot, emit_dot(ia))
    _write(cfg.json_report, to_json(dict(zip(TABLE1_COLUMNS, row))))
    return EXIT_OK


def _kind_label(kind) -> str:
    label = kind.variant + (f" N={kind.capacity}" if kind.capacity else "")
    if kind.extensions:
        label += " +" + ",".join(sorted(kind.extensions))
    return label


def _case_network(cfg: RunConfig):
    if cfg.case == "case1":
        variant = KIND_ALIASES[cfg.port]
        n = cfg.n if cfg.n is not None else 6
        return f"case1 {variant} N={n}", cs.build_case1(cs.Case1Params(n=n, variant=variant))
    params = cs.Case2Params(cfg.n1, cfg.n2, cfg.n3, cfg.size, cfg.nonblocking_first)
    star = "*" if cfg.nonblocking_first else ""
    label = f"case2 {cfg.n1}{star}/{cfg.n2}/{cfg.n3} size={cfg.size}"
    if cfg.compress:
        small = cs.compress_case2(params)
        label += f" (compressed to {small.n1}/{small.n2}/{small.n3})"
    return label, cs.build_case2(params, compress=cfg.compress)


def cmd_verify(args) -> int:
    cfg = _config(args)
    label, net = _case_network(cfg)
    if getattr(args, "promela", None):
        _write(args.promela, emit_promela(net))
    v = find_deadlock(net, cfg.max_states, cfg.max_time, cfg.order)
    sys.stdout.write(format_table(TABLE2_COLUMNS, [verdict_row(label, v)]))
    _write(cfg.json_report, to_json({"model": label, **v.to_dict()}))
    if v.conclusion == DEADLOCK:
        path = cfg.witness or "witness.txt"
        lines = [f"init {net.describe(net.initial)}"]
        lines += [f"{a} -> {net.describe(s)}" for a, s in v.witness]
        Path(path).write_text("\n".join(lines) + "\n")
        print(f"deadlock witness written to {path}", file=sys.stderr)
        return EXIT_DEADLOCK
    if v.conclusion == INCONCLUSIVE:
        print("search limits reached before a verdict", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def table1_rows(timings: bool = False) -> List[list]:
    from .middleware import make_port

    def row(label, variant, cap, ext):
        ia, st = learn_ia(Teacher(make_port(variant, cap, ext)))
        t = f"{st.elapsed:.3f}" if timings else "-"
        return [label, len(ia.states), len(ia.transitions), st.mm_queries, st.eq_queries, st.experiments, t]

    top = [row(*spec) for spec in TABLE1_TOP]
    bottom = [row(str(n), STRICT, n, ()) for n in range(1, 7)]
    return [top, bottom]


def table2_rows(timings: bool = False, compress: bool = False):
    rows, ok = [], True
    for label, variant, n, expected in cs.CASE1_TABLE:
        v = find_deadlock(cs.build_case1(cs.Case1Params(n=n, variant=variant)))
        ok &= v.conclusion == expected
        rows.append(verdict_row(label, v, timings) + [expected])
    for n1, n2, n3, size, nb, expected in cs.CASE2_TABLE:
        net = cs.build_case2(cs.Case2Params(n1, n2, n3, size, nb), compress=compress)
        v = find_deadlock(net)
        ok &= v.conclusion == expected
        label = f"{n1}{'*' if nb else ''}/{n2}/{n3} size={size}"
        rows.append(verdict_row(label, v, timings) + [expected])
    return rows, ok


def cmd_sweep(args) -> int:
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    if args.table in ("1", "all"):
        top, bottom = table1_rows(args.timings)
        text = format_table(TABLE1_COLUMNS, top) + "\n" + format_table(["Size"] + TABLE1_COLUMNS[1:], bottom)
        sys.stdout.write(text + "\n")
        if out_dir:
            (out_dir / "table1.txt").write_text(text)
            (out_dir / "table1.json").write_text(to_json({
                "top": [dict(zip(TABLE1_COLUMNS, r)) for r in top],
                "bottom": [dict(zip(["Size"] + TABLE1_COLUMNS[1:], r)) for r in bottom],
            }))
    if args.table in ("2", "all"):
        rows, ok = table2_rows(args.timings, args.compress)
        cols = TABLE2_COLUMNS + ["Expected"]
        text = format_table(cols, rows)
        sys.stdout.write(text)
        if out_dir:
            (out_dir / "table2.txt").write_text(text)
            (out_dir / "table2.json").write_text(to_json([dict(zip(cols, r)) for r in rows]))
        if not ok:
            status = EXIT_DEADLOCK
    return status


def cmd_serve(args) -> int:
    cfg = _config(args)
    session = PortSession(cfg.port_kind(), cfg.observation)
    server = SulServer(session, args.host, args.listen_port)
    host, port = server.address
    print(f"serving {_kind_label(session.kind)} on {host}:{port}", file=sys.stderr, flush=True)
    try:
        server.serve(once=args.once)
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_export(args) -> int:
    ia = load_model(Path(args.model).read_text())
    if args.format == "dot":
        sys.stdout.write(emit_dot(ia))
    elif args.format == "promela":
        sys.stdout.write(emit_promela(ia, args.name))
    else:
        sys.stdout.write(dump_model(ia))
    return EXIT_OK


COMMANDS = {
    "learn": cmd_learn,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "serve-sul": cmd_serve,
    "export": cmd_export,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ConstructionError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QueryTransportError, DeterminismViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
