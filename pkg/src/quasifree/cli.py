"""Command-line front end.

Subcommands: ``verify``, ``apply``, ``demo``, ``sweep`` and ``oracle``.
Exit codes: 0 ok, 1 usage or parse error, 2 complete-positivity failure,
3 oracle residual above tolerance.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys

import numpy as np

from . import channel as chn
from . import charfun as cf
from . import fock_oracle as fo
from . import gaussian as ga
from . import io as qio
from . import protocols as pr
from .phasespace import PhaseMap, make_hybrid

EXIT_OK, EXIT_PARSE, EXIT_CP, EXIT_ORACLE = 0, 1, 2, 3

DEMO_FLAGS = {
    "teleport": "lambda",
    "densecode": "lambda",
    "instrument-position": "v",
    "instrument-phasespace": "beta",
    "cloner": "nout",
    "husimi": "squeeze",
}


class UsageError(Exception):
    pass


def _fmt(x):
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _cell(x):
    if isinstance(x, float) and math.isfinite(x):
        return f"{x:.10g}"
    return _fmt(x)


def _clean(x):
    if isinstance(x, float) and math.isnan(x):
        return None
    if isinstance(x, np.generic):
        return x.item()
    return x


def _emit(args, columns, rows, meta):
    """Write ``rows`` (sequence of tuples) in the requested format; ``meta`` always carries the seed."""
    fmt = args.format
    if fmt == "json":
        payload = dict(meta)
        payload["rows"] = [{c: _clean(v) for c, v in zip(columns, r)} for r in rows]
        text = json.dumps(payload, indent=2, sort_keys=False) + "\n"
    elif fmt == "csv":
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(columns) + ["seed"])
        for r in rows:
            w.writerow([_fmt(v) for v in r] + [meta["seed"]])
        text = buf.getvalue()
    else:
        cells = [[_cell(v) for v in r] for r in rows]
        widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
        lines = [f"# {k}={v}" for k, v in meta.items()]
        lines.append("  ".join(c.ljust(wd) for c, wd in zip(columns, widths)))
        lines += ["  ".join(v.ljust(wd) for v, wd in zip(row, widths)) for row in cells]
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _floats(text, flag):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--{flag} expects a comma-separated list of numbers, got {text!r}") from None


def _policy(args):
    kw = {"seed": args.seed}
    if args.tol is not None:
        kw["tol"] = args.tol
    if getattr(args, "samples", None):
        kw["n_sets"] = args.samples
    return cf.SamplingPolicy(**kw)


# ---------------------------------------------------------------------------
# verify / apply


def _report_rows(ch_or_report, status):
    rep = ch_or_report
    return [
        ("status", status),
        ("verdict", rep.verdict),
        ("exact", rep.exact),
        ("min_eigenvalue", float(rep.min_eigenvalue)),
        ("samples_used", rep.samples_used),
    ] + [(f"witness_{i}", json.dumps(np.asarray(p).tolist())) for i, p in enumerate(rep.witness_points)]


def cmd_verify(args):
    obj = qio.load_json(args.spec)
    meta = {"command": "verify", "seed": args.seed}
    try:
        ch = qio.parse_channel(obj, policy=_policy(args))
    except cf.PositivityError as exc:
        _emit(args, ("field", "value"), _report_rows(exc.report, "cp_failure"), meta)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CP
    report = ch.report
    _emit(args, ("field", "value"), _report_rows(report, ch.cp_status), meta)
    return EXIT_OK


def cmd_apply(args):
    ch = qio.parse_channel(qio.load_json(args.spec), policy=_policy(args))
    state = qio.parse_state(qio.load_json(args.state))
    if not state.space.same_as(ch.in_space):
        raise qio.SpecError("state.space", "does not match the channel input space")
    out = chn.apply(ch, state)
    meta = {"command": "apply", "seed": args.seed, "cp_status": ch.cp_status}
    if out.is_gaussian:
        rows = [("mean", i, -1, float(v)) for i, v in enumerate(out.mean)]
        rows += [("cov", i, j, float(out.cov[i, j])) for i in range(out.space.dim) for j in range(out.space.dim)]
        _emit(args, ("entry", "i", "j", "value"), rows, meta)
    else:
        pts = np.random.default_rng(args.seed).normal(size=(args.points, out.space.dim))
        vals = cf.evaluate(out, pts)
        rows = [(json.dumps(p.tolist()), float(v.real), float(v.imag)) for p, v in zip(pts, vals)]
        _emit(args, ("xi", "re", "im"), rows, meta)
    return EXIT_OK


# ---------------------------------------------------------------------------
# demo / sweep


def _run_sweep(args, protocol, grid):
    if protocol not in pr.PROTOCOLS:
        raise UsageError(f"unknown protocol {protocol!r}; valid ids: {', '.join(pr.PROTOCOLS)}")
    rows = pr.sweep(protocol, grid)
    meta = {"command": args.command, "protocol": protocol, "seed": args.seed}
    _emit(args, pr.CSV_COLUMNS, [tuple(getattr(r, c) for c in pr.CSV_COLUMNS) for r in rows], meta)
    return EXIT_OK


def cmd_demo(args):
    protocol = args.protocol
    if protocol not in DEMO_FLAGS:
        raise UsageError(f"unknown protocol {protocol!r}; valid ids: {', '.join(pr.PROTOCOLS)}")
    flag = DEMO_FLAGS[protocol]
    text = getattr(args, flag)
    grid = None if text is None else _floats(text, flag)
    return _run_sweep(args, protocol, grid)


def cmd_sweep(args):
    grid = None if args.grid is None else _floats(args.grid, "grid")
    return _run_sweep(args, args.protocol, grid)


# ---------------------------------------------------------------------------
# oracle


def _disc_points(rng, n, radius):
    """``n`` points uniformly in the disc of the given radius."""
    r = radius * np.sqrt(rng.uniform(size=n))
    th = rng.uniform(0, 2 * np.pi, size=n)
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


def _grid_disc(radius, k=13):
    g = np.linspace(-radius, radius, k)
    pts = np.array([[x, y] for x in g for y in g])
    return pts[np.sum(pts ** 2, axis=1) <= radius ** 2 + 1e-12]


def _basis(N, i, j):
    E = np.zeros((N, N), dtype=complex)
    E[i, j] = 1
    return E


def oracle_vacuum(rng, args):
    rep = fo.FockRep(args.cutoff or fo.DEFAULT_CUTOFF)
    pts = np.vstack([_grid_disc(3.0), _disc_points(rng, 32, 3.0)])
    return [("vacuum_chi", fo.vacuum_residual(rep, pts), args.tol or 1e-8)]


def oracle_weyl(rng, args):
    rep = fo.FockRep(args.cutoff or fo.HEAVY_CUTOFF)
    xs, ys = _disc_points(rng, 20, 2.0), _disc_points(rng, 20, 2.0)
    edge = 2.0 * xs / np.linalg.norm(xs, axis=1, keepdims=True)  # parallel pairs on the boundary
    pairs = list(zip(xs, ys)) + list(zip(edge, edge))
    worst = max(fo.weyl_relation_residual(rep, x, y, levels=20) for x, y in pairs)
    return [("weyl_relation", worst, args.tol or 1e-6), ("ccr", rep.ccr_residual(), 1e-10)]


def oracle_parseval(rng, args):
    N = args.cutoff or fo.DEFAULT_CUTOFF
    rep = fo.FockRep(N)
    e00, e11, e10 = _basis(N, 0, 0), _basis(N, 1, 1), _basis(N, 1, 0)
    tol = args.tol or 1e-3
    rows = []
    for name, F, G in (("vac_vac", e00, e00), ("vac_one", e00, e11), ("e10_e10", e10, e10)):
        res = fo.parseval_check(rep, F, G, tol=tol)
        rows.append((f"parseval_{name}", res.rel_error, tol))
        rows.append((f"parseval_{name}_quadrature", res.quad_error, tol))
    return rows


def oracle_translate(rng, args):
    N = args.cutoff or fo.DEFAULT_CUTOFF
    rep = fo.FockRep(N)
    e00, e11, e10 = _basis(N, 0, 0), _basis(N, 1, 1), _basis(N, 1, 0)
    G = (e10 + e10.T) / np.sqrt(2)
    rows = []
    for name, F, H, tol in (("vac_vac", e00, e00, 5e-3), ("vac_traceless", e00, G, 1e-3), ("rank2_vac", e00 + e11, e00, 5e-3)):
        tol = args.tol or tol
        res = fo.translate_average_check(rep, F, H, tol=tol)
        rows.append((f"translate_{name}", res.rel_error, tol))
    return rows


def oracle_instrument(rng, args):
    rep = fo.FockRep(args.cutoff or fo.HEAVY_CUTOFF)
    pts = np.vstack([_grid_disc(2.0), _disc_points(rng, 32, 2.0)])
    betas = [args.beta] if args.beta is not None else [0.5, 1.0, 2.0]
    rows = []
    for b in betas:
        rows.append((f"psi_shape_beta={b!r}", fo.instrument_shape_residual(rep, b, pts), args.tol or 1e-4))
        inst = pr.phasespace_instrument_gaussian(b)
        z = rng.normal(scale=0.8, size=(6, 4))
        rows.append((f"noise_trace_beta={b!r}", fo.instrument_noise_residual(rep, b, inst.channel.noise, z),
                     args.tol or 1e-8))
    return rows


def oracle_states(rng, args):
    rep = fo.FockRep(args.cutoff or fo.DEFAULT_CUTOFF)
    pts = np.vstack([_grid_disc(3.0, 7), _disc_points(rng, 8, 3.0)])
    cases = [
        ("vacuum", fo.gaussian_state_matrix(rep, "vacuum"), cf.vacuum(1)),
        ("coherent", fo.gaussian_state_matrix(rep, "coherent", alpha=0.6 + 0.3j), cf.coherent(0.6 * np.sqrt(2), 0.3 * np.sqrt(2))),
        ("thermal", fo.gaussian_state_matrix(rep, "thermal", t=0.5), cf.thermal(0.5)),
        ("squeezed", fo.gaussian_state_matrix(rep, "squeezed", r=0.5), cf.squeezed_vacuum(0.5)),
    ]
    rows = []
    for name, rho, chi in cases:
        worst = max(abs(fo.charfn_of_density(rep, rho, x) - chi(x)) for x in pts)
        rows.append((f"state_{name}", worst, args.tol or 1e-6))
    return rows


def oracle_beamsplitter(rng, args):
    N = args.cutoff or 25
    rep = fo.FockRep(N)
    rho = fo.gaussian_state_matrix(rep, "thermal", t=0.2)
    c = s = 1 / np.sqrt(2)
    S = np.array([[c, 0], [s, 0], [0, c], [0, s]])
    bs = ga.make_gaussian_channel(PhaseMap(make_hybrid(1, 0), make_hybrid(2, 0), S))
    th, vac = cf.thermal(0.2), cf.vacuum(1)
    A = np.zeros((4, 4))
    A[np.ix_([0, 2], [0, 2])] = th.cov
    A[np.ix_([1, 3], [1, 3])] = vac.cov
    both = cf.gaussian_charfn(make_hybrid(2, 0), None, A)
    out = ga.apply_gaussian(bs, both)
    pts = _disc_points(rng, 12, 2.0)
    return [("beam_splitter", fo.beam_splitter_residual(rho, lambda x: out(x), pts, N=N), args.tol or 1e-6)]


ORACLE_SUITES = {
    "vacuum": oracle_vacuum,
    "weyl": oracle_weyl,
    "parseval": oracle_parseval,
    "translate": oracle_translate,
    "instrument": oracle_instrument,
    "states": oracle_states,
    "beamsplitter": oracle_beamsplitter,
}


def cmd_oracle(args):
    names = list(ORACLE_SUITES) if args.suite == "all" else [args.suite]
    if any(n not in ORACLE_SUITES for n in names):
        raise UsageError(f"unknown oracle suite {args.suite!r}; valid: all, {', '.join(ORACLE_SUITES)}")
    rows = []
    for n in names:
        rng = np.random.default_rng(args.seed)
        for check, resid, tol in ORACLE_SUITES[n](rng, args):
            rows.append((n, check, float(resid), float(tol), bool(resid <= tol)))
    _emit(args, ("suite", "check", "residual", "tolerance", "passed"), rows, {"command": "oracle", "seed": args.seed})
    return EXIT_OK if all(r[-1] for r in rows) else EXIT_ORACLE


# ---------------------------------------------------------------------------
# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed, recorded in every output (default 0)")
    common.add_argument("--tol", type=float, default=None, help="tolerance override (default: per check)")
    common.add_argument("--format", choices=("table", "csv", "json"), default="table", help="output format")
    common.add_argument("--out", default=None, help="write output to this file instead of stdout")

    p = argparse.ArgumentParser(prog="quasifree", description="Quasifree channels on hybrid phase spaces.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="check complete positivity of a channel spec")
    v.add_argument("spec", help="channel JSON file")
    v.add_argument("--samples", type=int, default=None, help="number of sampled Gram matrices (general noise)")
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("apply", parents=[common], help="apply a channel to a state")
    a.add_argument("spec", help="channel JSON file")
    a.add_argument("state", help="state JSON file")
    a.add_argument("--points", type=int, default=8, help="evaluation points for non-Gaussian output")
    a.set_defaults(func=cmd_apply)

    d = sub.add_parser("demo", parents=[common], help="protocol demo with default or given parameters")
    d.add_argument("protocol", help=f"one of: {', '.join(pr.PROTOCOLS)}")
    d.add_argument("--lambda", dest="lambda", default=None, help="squeezing values (teleport, densecode)")
    d.add_argument("--beta", default=None, help="beta values (instrument-phasespace)")
    d.add_argument("--v", default=None, help="position variances (instrument-position)")
    d.add_argument("--nout", default=None, help="clone counts (cloner)")
    d.add_argument("--squeeze", default=None, help="noise squeezing factors (husimi)")
    d.set_defaults(func=cmd_demo)

    s = sub.add_parser("sweep", parents=[common], help="tabulate a protocol over a parameter grid")
    s.add_argument("protocol", help=f"one of: {', '.join(pr.PROTOCOLS)}")
    s.add_argument("--grid", default=None, help="comma-separated parameter values")
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", parents=[common], help="Fock-space residual suites")
    o.add_argument("suite", help=f"one of: all, {', '.join(ORACLE_SUITES)}")
    o.add_argument("--beta", type=float, default=None, help="beta for the instrument suite")
    o.add_argument("--cutoff", type=int, default=None, help="Fock cutoff (default per suite)")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    try:
        return args.func(args)
    except (qio.SpecError, UsageError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except cf.PositivityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CP


if __name__ == "__main__":
    sys.exit(main())
