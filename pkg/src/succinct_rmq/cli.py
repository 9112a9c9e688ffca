"""Command-line entry point ``srmq``.

Exit codes: 0 ok, 1 usage, 2 I/O, 3 format or range, 4 integrity,
5 verifier threshold failure.
"""

import argparse
import csv
import io
import json
import os
import random
import sys
import time

from . import fileio
from .bits import DecodeError, IntegrityError

EXIT_USAGE, EXIT_IO, EXIT_FORMAT, EXIT_INTEGRITY, EXIT_THRESHOLD = 1, 2, 3, 4, 5
DEFAULT_MAX_N = 1 << 14
BENCH_FIELDS = ["kind", "n", "param", "total_bits", "redundancy_bits", "benchmark_bits",
                "mean_probes", "max_probes", "mean_ns", "seed"]


class CliError(Exception):
    def __init__(self, code, msg):
        super().__init__(msg)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (self.prog, message))
        sys.exit(EXIT_USAGE)


def _emit(obj, as_json, out=None):
    out = out or sys.stdout
    if as_json:
        out.write(json.dumps(obj, sort_keys=True) + "\n")
    else:
        for key in sorted(obj):
            out.write("%s: %s\n" % (key, obj[key]))


def _max_n(args):
    if args.max_n is not None:
        return args.max_n
    env = os.environ.get("RMQ_MAX_N")
    if env:
        try:
            return int(env)
        except ValueError:
            raise CliError(EXIT_USAGE, "RMQ_MAX_N must be an integer") from None
    return DEFAULT_MAX_N


def build_structure(A, kind, t=1):
    if len(A) < 1:
        raise CliError(EXIT_FORMAT, "array must be non-empty")
    if kind == "onebit":
        from .onebit import OneBitRMQ
        return OneBitRMQ.build(A)
    if kind == "tradeoff":
        from .tradeoff import TradeoffRMQ
        return TradeoffRMQ.build(A, t)
    from .cartesian import SparseTable
    return SparseTable(A)


def space_report(ds):
    kind = fileio.structure_kind(ds)
    if kind == "sparse":
        from .catalan import catalan_number, log2_int
        total = ds.total_bits()
        return {"n": ds.n, "kind": "sparse", "total_bits": total,
                "benchmark_bits": log2_int(catalan_number(ds.n)),
                "redundancy_bits": total - 2 * ds.n, "components": {"table_and_values": total}}
    return ds.space_report()


def _read_array(path):
    try:
        return fileio.read_array(path)
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc)) from None
    except fileio.FormatError as exc:
        raise CliError(EXIT_FORMAT, str(exc)) from None


def _load(path):
    try:
        return fileio.load_structure(path)
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc)) from None
    except IntegrityError as exc:
        raise CliError(EXIT_INTEGRITY, str(exc)) from None
    except (fileio.FormatError, DecodeError) as exc:
        raise CliError(EXIT_FORMAT, str(exc)) from None


def _write(path, data):
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc)) from None


# -- commands -----------------------------------------------------------------

def cmd_catalan(args):
    from .catalan import catalan_number, log2_int
    if args.check:
        from .verify import run
        rep = run("mfold")
        _emit(rep, args.json)
        return 0 if rep["pass"] else EXIT_THRESHOLD
    c = catalan_number(args.n)
    _emit({"n": args.n, "catalan": str(c), "log2": log2_int(c) if c else 0.0}, args.json)
    return 0


def cmd_gen(args):
    if args.n < 1:
        raise CliError(EXIT_FORMAT, "n must be positive")
    rng = random.Random(args.seed)
    hi = args.max_value if args.max_value is not None else 10 ** 9
    A = [rng.randint(0, hi) for _ in range(args.n)]
    _write(args.out, fileio.encode_array(A, args.format))
    return 0


def cmd_build(args):
    A = _read_array(args.input)
    if args.kind == "onebit" and len(A) > _max_n(args):
        raise CliError(EXIT_FORMAT, "n=%d exceeds the build limit %d (use --max-n)" % (len(A), _max_n(args)))
    ds = build_structure(A, args.kind, args.t)
    _write(args.out, fileio.encode_structure(ds))
    _emit(space_report(ds), args.json)
    return 0


def cmd_query(args):
    from .probes import ProbeCounter
    ds = _load(args.structure)
    counter = ProbeCounter()
    try:
        ans = ds.query(args.a, args.b, counter)
    except (IndexError, ValueError) as exc:
        raise CliError(EXIT_FORMAT, str(exc)) from None
    if args.json:
        out = {"a": args.a, "b": args.b, "answer": ans}
        if args.probes:
            out.update(probes=counter.total, distinct_cells=counter.distinct)
        _emit(out, True)
    else:
        sys.stdout.write("%d\n" % ans)
        if args.probes:
            sys.stdout.write("probes: %d\n" % counter.total)
    return 0


def cmd_space(args):
    _emit(space_report(_load(args.structure)), True)
    return 0


def bench_records(kinds, ns, ts, queries, seed):
    """One record per (kind, n, param); failures recorded in an ``error`` field."""
    from .probes import ProbeCounter
    records = []
    for kind in kinds:
        params = ts if kind == "tradeoff" else [0]
        for n in ns:
            for t in params:
                rng = random.Random(seed * 1000003 + n)
                rec = {"kind": kind, "n": n, "param": t, "seed": seed}
                try:
                    A = [rng.randint(0, 10 ** 9) for _ in range(n)]
                    ds = build_structure(A, kind, max(t, 1))
                    rep = space_report(ds)
                    pc = ProbeCounter()
                    tot = mx = 0
                    elapsed = 0
                    for _ in range(queries):
                        a = rng.randint(1, n)
                        b = rng.randint(a, n)
                        pc.reset()
                        t0 = time.perf_counter_ns()
                        ds.query(a, b, pc)
                        elapsed += time.perf_counter_ns() - t0
                        tot += pc.total
                        mx = max(mx, pc.total)
                    rec.update(total_bits=rep["total_bits"], redundancy_bits=rep["redundancy_bits"],
                               benchmark_bits=rep["benchmark_bits"],
                               mean_probes=tot / max(queries, 1), max_probes=mx,
                               mean_ns=elapsed / max(queries, 1))
                except Exception as exc:  # recorded, run continues
                    rec["error"] = "%s: %s" % (type(exc).__name__, exc)
                records.append(rec)
    records.sort(key=lambda r: (r["kind"], r["n"], r["param"]))
    return records


def cmd_bench(args):
    recs = bench_records(args.kind, args.n, args.t, args.queries, args.seed)
    if args.json:
        text = json.dumps(recs, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in recs:
            w.writerow(r)
        text = buf.getvalue()
    if args.out:
        _write(args.out, text.encode())
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args):
    from .verify import run
    rep = run(args.lemma, args.seed, args.trials)
    _emit(rep, args.json)
    return 0 if rep["pass"] else EXIT_THRESHOLD


def cmd_hardgen_sample(args):
    from .hardgen import sample_instance
    for name in ("B", "u", "d", "Z"):
        if getattr(args, name) < (0 if name == "u" else 1):
            raise CliError(EXIT_FORMAT, "--%s out of range" % name)
    if args.u > args.B:
        raise CliError(EXIT_FORMAT, "need u <= B")
    inst = sample_instance(args.d, args.B, args.u, args.Z, random.Random(args.seed))
    obj = inst.to_json()
    obj["seed"] = args.seed
    _write(args.out, (json.dumps(obj, sort_keys=True) + "\n").encode())
    return 0


def cmd_hardgen_reduce(args):
    from .hardgen import PredZInstance, reduce_to_array
    try:
        with open(args.sets) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc)) from None
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_FORMAT, str(exc)) from None
    try:
        inst = PredZInstance.from_json(obj)
        lay = reduce_to_array(inst, args.n, args.r)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_FORMAT, str(exc)) from None
    _write(args.out, fileio.encode_array(lay.A, args.format))
    return 0


def make_parser():
    p = _Parser(prog="srmq", description="Succinct range-minimum structures and hard-instance tools.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("catalan", help="Catalan numbers and the exact counting suite")
    c.add_argument("--n", type=int, default=0)
    c.add_argument("--check", action="store_true")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_catalan)

    g = sub.add_parser("gen", help="write a random array file")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-value", type=int)
    g.add_argument("--format", choices=["text", "bin"], default="bin")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("build", help="build a structure file from an array file")
    b.add_argument("--input", required=True)
    b.add_argument("--kind", choices=["onebit", "tradeoff", "sparse"], required=True)
    b.add_argument("--t", type=int, default=1)
    b.add_argument("--out", required=True)
    b.add_argument("--max-n", type=int)
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="answer one range-minimum query")
    q.add_argument("--structure", required=True)
    q.add_argument("--a", type=int, required=True)
    q.add_argument("--b", type=int, required=True)
    q.add_argument("--probes", action="store_true")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_query)

    s = sub.add_parser("space", help="space report of a structure file (JSON)")
    s.add_argument("--structure", required=True)
    s.set_defaults(func=cmd_space)

    be = sub.add_parser("bench", help="space and probe benchmark grid")
    be.add_argument("--kind", nargs="+", choices=["onebit", "tradeoff", "sparse"], default=["onebit"])
    be.add_argument("--n", type=int, nargs="+", default=[1024])
    be.add_argument("--t", type=int, nargs="+", default=[1, 2, 3])
    be.add_argument("--queries", type=int, default=1000)
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--out")
    be.add_argument("--json", action="store_true")
    be.set_defaults(func=cmd_bench)

    from .verify import LEMMAS
    v = sub.add_parser("verify", help="run a seeded verifier")
    v.add_argument("--lemma", choices=LEMMAS, required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int)
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    h = sub.add_parser("hardgen", help="hard-instance generation")
    hs = h.add_subparsers(dest="hcommand", parser_class=_Parser)
    hs.required = True
    a = hs.add_parser("sample")
    a.add_argument("--B", type=int, required=True)
    a.add_argument("--u", type=int, required=True)
    a.add_argument("--d", type=int, required=True)
    a.add_argument("--Z", type=int, default=1)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_hardgen_sample)
    r = hs.add_parser("reduce")
    r.add_argument("--sets", required=True)
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--r", type=int, required=True)
    r.add_argument("--format", choices=["text", "bin"], default="bin")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_hardgen_reduce)
    hv = hs.add_parser("verify")
    hv.add_argument("--lemma", choices=LEMMAS, required=True)
    hv.add_argument("--seed", type=int, default=0)
    hv.add_argument("--trials", type=int)
    hv.add_argument("--json", action="store_true")
    hv.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write("srmq: %s\n" % exc)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
