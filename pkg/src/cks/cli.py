"""Command-line front end: ``cks verify | bench | analyze``.

Exit status: 0 success, 1 verification failure, 2 usage error.
"""
import argparse
import csv
import json
import sys

from . import backend
from .bench import SUITES, cmd_bench, format_rows, load_geometries
from .geometry import ConvGeometry, GeometryError, nonzero_calc_fraction, pad_zero_fraction
from .verify import cmd_verify


class ParameterError(ValueError):
    pass


def parse_range(text):
    """``A:B`` or ``A:B:STEP``, inclusive of both ends."""
    try:
        parts = [int(p) for p in text.split(":")]
    except ValueError:
        raise ParameterError(f"bad range {text!r}; expected A:B or A:B:STEP") from None
    if len(parts) == 2:
        a, b = parts
        step = 1 if b >= a else -1
    elif len(parts) == 3:
        a, b, step = parts
        if step == 0:
            raise ParameterError("range step must be non-zero")
    else:
        raise ParameterError(f"bad range {text!r}; expected A:B or A:B:STEP")
    values = list(range(a, b + (1 if step > 0 else -1), step))
    if not values:
        raise ParameterError(f"range {text!r} is empty")
    return values


ANALYZE_DEFAULTS = {
    "pad-fraction": {"i": 32, "f": 3, "p": 1, "s": 1},
    "insert-fraction": {"i": 32, "f": 3, "p": 1, "s": 1},
}
_SWEPT = {"pad-fraction": "i", "insert-fraction": "s"}


def cmd_analyze(kind, values, fixed=None):
    """Rows ``(parameter value, fraction)`` for a sweep of one geometry parameter.

    ``pad-fraction`` sweeps the square input size ``i``; ``insert-fraction``
    sweeps the stride ``s``.  Other parameters come from ``fixed``.
    """
    if kind not in _SWEPT:
        raise ParameterError(f"unknown analysis {kind!r}")
    if not values:
        raise ParameterError("empty sweep")
    params = dict(ANALYZE_DEFAULTS[kind])
    for k, v in (fixed or {}).items():
        if k not in params:
            raise ParameterError(f"unknown fixed parameter {k!r}; choose from {sorted(params)}")
        params[k] = int(v)
    swept = _SWEPT[kind]
    fn = pad_zero_fraction if kind == "pad-fraction" else nonzero_calc_fraction
    rows = []
    for v in values:
        params[swept] = v
        try:
            g = ConvGeometry.square(1, params["i"], 1, 1, params["f"], s=params["s"], p=params["p"])
        except GeometryError as e:
            raise ParameterError(f"{swept}={v}: {e}") from None
        rows.append((v, fn(g)))
    return swept, rows


def _fixed(items):
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise ParameterError(f"--fixed expects k=v, got {item!r}")
        try:
            out[key] = int(val)
        except ValueError:
            raise ParameterError(f"--fixed {key} needs an integer") from None
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="cks", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="randomized oracle-equivalence sweep")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=500)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="write the JSON summary here instead of stdout")

    p = sub.add_parser("bench", help="timing and MAC-count tables")
    p.add_argument("--suite", choices=[*SUITES, "custom"], default="paper-3x3")
    p.add_argument("--geometry", help="JSON geometry file for --suite custom")
    p.add_argument("--op", choices=["conv", "deconv", "dilated", "all"], default="all")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--dtype", choices=["f32", "f64"], default="f32")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--backend", choices=backend.BACKENDS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("analyze", help="zero-proportion curves")
    p.add_argument("--kind", choices=list(_SWEPT), required=True)
    p.add_argument("--range", dest="range_", required=True, metavar="A:B[:STEP]")
    p.add_argument("--fixed", action="append", metavar="k=v",
                   help="hold a parameter (i, f, p, s) fixed; repeatable")
    p.add_argument("--out")
    return parser


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            if args.cases < 0:
                raise ParameterError("--cases must be >= 0")
            status, summary = cmd_verify(args.seed, args.cases, nthreads=args.threads)
            _emit(json.dumps(summary, indent=2) + "\n", args.out)
            for f in summary["failures"][:20]:
                print(f"FAIL {f['op']}: {f['reason']} at {json.dumps(f['geometry'])}", file=sys.stderr)
            return status
        if args.command == "bench":
            if args.reps < 1:
                raise ParameterError("--reps must be >= 1")
            geoms = None
            if args.suite == "custom":
                if not args.geometry:
                    raise ParameterError("--suite custom needs --geometry PATH")
                geoms = load_geometries(args.geometry)
            rows = cmd_bench(args.suite, args.op, args.reps, args.dtype, args.threads,
                             args.deterministic, geoms, args.seed, args.backend)
            _emit(format_rows(rows, args.format), args.out)
            return 0
        swept, rows = cmd_analyze(args.kind, parse_range(args.range_), _fixed(args.fixed))
        if args.out:
            fh = open(args.out, "w", newline="")
        else:
            fh = sys.stdout
        try:
            w = csv.writer(fh)
            w.writerow([swept, "fraction"])
            for v, frac in rows:
                w.writerow([v, repr(frac)])
        finally:
            if args.out:
                fh.close()
        return 0
    except (ParameterError, GeometryError) as e:
        parser.print_usage(sys.stderr)
        print(f"cks: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"cks: I/O error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
