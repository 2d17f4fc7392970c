"""Command-line entry point.

Exit codes: 0 success (or certified), 1 not certified, 2 bad input,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .catalog import FIXTURES, fixture
from .documents import as_transfer_matrix, atomic_write, parse_system, serialize_region
from .errors import SchemaError, SrgError
from .lti import TransferMatrix
from .nyquist import nyquist_trace, winding_number, write_trace_csv
from .plotting import LAYERS, PlotConfig, emit_svg
from .region import AffineGains, AlphaGrid, FrequencyGrid, build_region, stability_report
from .sampling import validate_inclusion, write_samples_csv

EXIT_OK, EXIT_NOT_CERTIFIED, EXIT_SCHEMA, EXIT_NUMERIC = 0, 1, 2, 3


def _floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise SchemaError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise SchemaError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def _complex(text: str) -> complex:
    re, im = _floats(text, 2)
    return complex(re, im)


def load_system(spec: str) -> TransferMatrix:
    """A JSON system file, or the name of a built-in example (G1..G6)."""
    if spec.upper() in FIXTURES and not Path(spec).exists():
        return fixture(spec)
    try:
        text = Path(spec).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {spec}: {exc.strerror}") from None
    return as_transfer_matrix(parse_system(text))


def _grids(args) -> tuple[AlphaGrid, FrequencyGrid]:
    agrid = AlphaGrid(lo=args.alpha_min, hi=args.alpha_max, count=args.alpha_count)
    if args.omega_decades:
        lo, hi = _floats(args.omega_decades, 2)
        wgrid = FrequencyGrid(lo=10.0 ** lo, hi=10.0 ** hi)
    else:
        wgrid = FrequencyGrid()
    return agrid, wgrid


def _window(args) -> tuple[float, ...]:
    return tuple(_floats(args.window, 4))


def _region(G: TransferMatrix, kind: str, agrid, wgrid):
    # a SISO soft region of an unstable system is the hull of its frequency response
    return build_region(G, kind, agrid, wgrid, require_stable=not G.is_siso())


def _emit_plot(path, G: TransferMatrix, kinds, args, agrid, wgrid) -> None:
    regions = {kind: _region(G, kind, agrid, wgrid) for kind in kinds}
    layers = tuple(args.layers.split(",")) if getattr(args, "layers", None) else LAYERS
    traces = [nyquist_trace(G)] if G.is_siso() and "nyquist" in layers else []
    markers = tuple(_complex(m) for m in args.marker) if getattr(args, "marker", None) else (-1 + 0j,)
    cfg = PlotConfig(_window(args), args.resolution, layers, markers)
    atomic_write(path, emit_svg(regions, traces, cfg))


def cmd_region(args) -> int:
    G = load_system(args.system)
    agrid, wgrid = _grids(args)
    region = _region(G, args.kind, agrid, wgrid)
    if args.out:
        atomic_write(args.out, serialize_region(region))
    if args.svg:
        _emit_plot(args.svg, G, [args.kind], args, agrid, wgrid)
    print(f"kind={region.kind} alphas={len(region)} range=[{region.alphas[0]:.6g}, {region.alphas[-1]:.6g}] "
          f"bounded={region.bounded}")
    return EXIT_OK


def cmd_stability(args) -> int:
    G = load_system(args.system)
    if args.k is not None:
        gains = AffineGains(0.0, args.k)
    else:
        gains = AffineGains(args.k1, args.k2)
    agrid, wgrid = _grids(args)
    region = build_region(G, "hard", agrid, wgrid)
    rep = stability_report(G, gains, region, wgrid)
    d = rep.as_dict()
    for key in ("stable_certified", "margin", "sensitivity_bound", "gain_bound"):
        print(f"{key}: {d[key]}")
    if args.json:
        atomic_write(args.json, json.dumps(d, indent=2))
    return EXIT_OK if rep.stable_certified else EXIT_NOT_CERTIFIED


def cmd_nyquist(args) -> int:
    G = load_system(args.system)
    if not G.is_siso():
        raise SchemaError("nyquist needs a SISO system")
    for z in args.z or []:
        w = winding_number(G, _complex(z))
        print(f"z={z} N={w.N} n_p={w.n_p} n_z={w.n_z}")
    if args.csv:
        write_trace_csv(nyquist_trace(G), args.csv)
    return EXIT_OK


def cmd_validate(args) -> int:
    G = load_system(args.system)
    agrid, wgrid = _grids(args)
    region = build_region(G, "hard", agrid, wgrid)
    Ts = _floats(args.horizons)
    rep = validate_inclusion(G, region, args.pairs, Ts, args.seed)
    print(f"samples: {rep.n_samples}")
    print(f"violations: {rep.n_violations}")
    print(f"worst_margin: {rep.worst_margin:.6g}")
    if args.csv:
        write_samples_csv(rep, args.csv)
    return EXIT_OK


def cmd_plot(args) -> int:
    G = load_system(args.system)
    agrid, wgrid = _grids(args)
    layers = args.layers.split(",")
    kinds = [k for k in ("hard", "soft") if k in layers]
    _emit_plot(args.out, G, kinds, args, agrid, wgrid)
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hardsrg", description="Hard SRG regions of LTI systems.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("system", help="system JSON file or example name G1..G6")
        sp.add_argument("--alpha-min", type=float)
        sp.add_argument("--alpha-max", type=float)
        sp.add_argument("--alpha-count", type=int, default=801)
        sp.add_argument("--omega-decades", help="log10 bounds of the frequency scan, e.g. -4,6")
        sp.set_defaults(func=fn)
        return sp

    def plot_flags(sp):
        sp.add_argument("--window", default="-3,3,-3,3", help="re_min,re_max,im_min,im_max")
        sp.add_argument("--resolution", type=int, default=800)
        sp.add_argument("--marker", action="append", help="re,im of a marker cross (repeatable)")

    sp = add("region", cmd_region, "compute a soft or hard region")
    sp.add_argument("--kind", choices=["hard", "soft"], default="hard")
    sp.add_argument("--out", help="region JSON output")
    sp.add_argument("--svg", help="SVG output")
    sp.add_argument("--layers", help=argparse.SUPPRESS)
    plot_flags(sp)

    sp = add("stability", cmd_stability, "certify feedback stability from the hard region")
    sp.add_argument("--k", type=float, help="feedback gain (same as --k1 0 --k2 K)")
    sp.add_argument("--k1", type=float, default=0.0)
    sp.add_argument("--k2", type=float, default=1.0)
    sp.add_argument("--json", help="report JSON output")

    sp = add("nyquist", cmd_nyquist, "winding numbers and trace export")
    sp.add_argument("--z", action="append", help="re,im query point (repeatable)")
    sp.add_argument("--csv", help="trace CSV output")

    sp = add("validate", cmd_validate, "check sampled SRG points against the hard region")
    sp.add_argument("--pairs", type=int, default=200)
    sp.add_argument("--horizons", default="5,20,100")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--csv", help="sample CSV output")

    sp = add("plot", cmd_plot, "render regions and the Nyquist trace to SVG")
    sp.add_argument("--out", required=True)
    sp.add_argument("--layers", default="hard,soft,nyquist,markers")
    plot_flags(sp)
    return p


# flags whose values routinely start with a minus sign
_SIGNED = {"--z", "--window", "--marker", "--omega-decades", "--k", "--k1", "--k2", "--alpha-min", "--alpha-max"}


def _glue_signed(argv: list[str]) -> list[str]:
    """Turn ``--z -1,0`` into ``--z=-1,0`` so argparse does not read a flag."""
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in _SIGNED and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _glue_signed(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SCHEMA if exc.code else EXIT_OK
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (ValueError, KeyError) as exc:
        print(f"error: schema_error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except SrgError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (np.linalg.LinAlgError, FloatingPointError, OverflowError) as exc:
        print(f"error: numeric_failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
