"""Command-line interface.

Subcommands
-----------
verify    functional-equation, classification and invariant-measure checks
          for a map/multiplier pair
rotnum    period, flight time, multiplicity and rotation number at a seed
sweep     rotation numbers across a family of level sets -> CSV (and an
          optional PNG figure) plus a monotonicity verdict
portrait  SVG phase portrait overlaying flow curves and discrete orbits

Configuration
-------------
Flags may be preloaded from an INI-style file given by ``--config`` or by
the ``MAPFLOW_CONFIG`` environment variable.  Section ``[common]``
applies to every subcommand, a section named after the subcommand
overrides ``[common]``, and explicit command-line flags override both.
Keys are the long option names with underscores for hyphens.

Exit codes
----------
0  requested checks passed / output written
1  a verification check failed
2  configuration or usage error
3  the seed or its trajectory left the map's domain
4  no closure (orbit did not close, blew up, or the seed is near-critical)
5  the level-set component is not invariant under F^k for any k <= m-max
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
import tempfile
from typing import List, Optional, Sequence

import numpy as np

from .catalog import available_maps, builtin
from .fields import (
    build_field,
    check_condition_X,
    check_condition_mu,
    check_invariant_measure,
    classify_multiplier,
)
from .flow import (
    BlowUpError,
    DomainExitError,
    FlowError,
    IntegratorConfig,
    NearCriticalError,
    NonClosureError,
)
from .maps import OutsideDomainError, SigmaClass
from .portrait import render_portrait
from .rotation import (
    HyperbolicFixedPointError,
    NotInvariantError,
    SeedRay,
    fixed_point_rotation,
    flow_rotation_data,
    monotonicity_report,
    rotation_number_birkhoff,
    sweep,
)

ENV_CONFIG = "MAPFLOW_CONFIG"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NO_CLOSURE = 4
EXIT_NOT_INVARIANT = 5

_PARAM_NAMES = ("a", "b", "c", "d", "A", "B", "C")


class UsageError(ValueError):
    pass


def _bool(raw: str) -> bool:
    return raw.strip().lower() in ("1", "true", "yes", "on")


_OPTION_TYPES = {
    "map": str, "mu": str, "margin": float,
    "rel_tol": float, "abs_tol": float, "horizon": float, "max_returns": int,
    "method": str, "closure_tol": float, "m_max": int, "rng_seed": int,
    "samples": int, "power": int, "tol": float, "measure_samples": int,
    "skip_measure": _bool, "seed": str, "birkhoff": int,
    "count": int, "ray_base": str, "ray_dir": str, "s_min": float, "s_max": float,
    "out": str, "plot": str, "residual_tol": float, "tie_tol": float,
    "window": str, "grid": str, "markers": int, "projection": str,
    "a": float, "b": float, "c": float, "d": float,
    "A": float, "B": float, "C": float,
}

_DEFAULTS = {
    "margin": 1e-8,
    "rel_tol": 1e-12, "abs_tol": 1e-12, "horizon": 1000.0, "max_returns": 24,
    "method": "DOP853", "closure_tol": 1e-7, "m_max": 4, "rng_seed": 0,
    "samples": 400, "tol": 1e-8, "measure_samples": 200_000,
    "count": 20, "residual_tol": 1e-8, "tie_tol": 1e-9,
    "markers": 40, "grid": "6x6",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--map", help=f"map name ({', '.join(available_maps())})")
    p.add_argument("--mu", help="multiplier name (default: the map's default)")
    p.add_argument("--margin", type=float, help="domain safety margin (default 1e-8)")
    p.add_argument("--config", help="INI config file (also via MAPFLOW_CONFIG)")
    for name in _PARAM_NAMES:
        p.add_argument(f"--{name}", type=float, help=argparse.SUPPRESS)
    p.add_argument("--rel-tol", type=float, help="integrator relative tolerance")
    p.add_argument("--abs-tol", type=float, help="integrator absolute tolerance")
    p.add_argument("--horizon", type=float, help="integration time horizon")
    p.add_argument("--max-returns", type=int, help="section returns before giving up")
    p.add_argument("--method", help="DOP853 (default) or RK45")
    p.add_argument("--closure-tol", type=float, help="relative closure tolerance")
    p.add_argument("--m-max", type=int, help="largest iterate tried for invariance")
    p.add_argument("--rng-seed", type=int, help="seed for all sampling")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapflow",
        description="integrable maps via their associated vector fields",
    )
    sub = parser.add_subparsers(dest="command")

    p_verify = sub.add_parser("verify", help="functional-equation and measure checks")
    _add_common(p_verify)
    p_verify.add_argument("--samples", type=int, help="sample points (default 400)")
    p_verify.add_argument("--power", type=int,
                          help="iterate k for the checks (default: the multiplier's natural power)")
    p_verify.add_argument("--tol", type=float, help="relative residual threshold (default 1e-8)")
    p_verify.add_argument("--measure-samples", type=int,
                          help="Monte Carlo samples for the measure check (default 200000)")
    p_verify.add_argument("--skip-measure", action="store_true", default=False,
                          help="skip the invariant-measure check")
    p_verify.set_defaults(handler=cmd_verify)

    p_rot = sub.add_parser("rotnum", help="rotation number at one seed")
    _add_common(p_rot)
    p_rot.add_argument("--seed", help="seed point, comma separated (e.g. 1,1)")
    p_rot.add_argument("--birkhoff", type=int,
                       help="also cross-check with a Birkhoff average of this many iterates")
    p_rot.set_defaults(handler=cmd_rotnum)

    p_sweep = sub.add_parser("sweep", help="rotation numbers across level sets -> CSV")
    _add_common(p_sweep)
    p_sweep.add_argument("--count", type=int, help="number of levels (default 20)")
    p_sweep.add_argument("--ray-base", help="ray base point, comma separated")
    p_sweep.add_argument("--ray-dir", help="ray direction, comma separated")
    p_sweep.add_argument("--s-min", type=float, help="ray parameter start")
    p_sweep.add_argument("--s-max", type=float, help="ray parameter end")
    p_sweep.add_argument("--out", help="CSV output path (default mapflow_sweep.csv)")
    p_sweep.add_argument("--plot", help="also render a rho-vs-h figure (PNG) to this path")
    p_sweep.add_argument("--residual-tol", type=float,
                         help="flag rows whose residuals exceed this (default 1e-8)")
    p_sweep.add_argument("--tie-tol", type=float,
                         help="monotonicity tie tolerance (default 1e-9)")
    p_sweep.set_defaults(handler=cmd_sweep)

    p_port = sub.add_parser("portrait", help="SVG phase portrait")
    _add_common(p_port)
    p_port.add_argument("--window", help="x0,x1,y0,y1 (default: the map's window)")
    p_port.add_argument("--grid", help="seed grid, e.g. 6x6")
    p_port.add_argument("--markers", type=int, help="discrete iterates per seed (default 40)")
    p_port.add_argument("--projection", help="projection plane for 3-d maps: xy, xz or yz")
    p_port.add_argument("--out", help="SVG output path (default mapflow_portrait.svg)")
    p_port.set_defaults(handler=cmd_portrait)

    return parser


def _apply_config(args: argparse.Namespace) -> None:
    path = args.config or os.environ.get(ENV_CONFIG)
    if not path:
        return
    if not os.path.exists(path):
        raise UsageError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise UsageError(f"could not parse config file {path}: {exc}") from exc
    merged = {}
    if cp.has_section("common"):
        merged.update(cp.items("common"))
    if cp.has_section(args.command):
        merged.update(cp.items(args.command))
    for key, raw in merged.items():
        dest = key.replace("-", "_")
        if dest not in _OPTION_TYPES:
            raise UsageError(f"unknown config key {key!r} in {path}")
        if not hasattr(args, dest):
            continue  # option does not apply to this subcommand
        current = getattr(args, dest)
        explicit = current is not None and not (dest == "skip_measure" and current is False)
        if not explicit:
            try:
                setattr(args, dest, _OPTION_TYPES[dest](raw))
            except ValueError as exc:
                raise UsageError(f"bad config value {key} = {raw!r}: {exc}") from exc


def _apply_defaults(args: argparse.Namespace) -> None:
    for dest, default in _DEFAULTS.items():
        if hasattr(args, dest) and getattr(args, dest) is None:
            setattr(args, dest, default)


def _the_map(args: argparse.Namespace):
    if not args.map:
        raise UsageError("no map given: pass --map or set it in the config file")
    params = {k: getattr(args, k) for k in _PARAM_NAMES if getattr(args, k) is not None}
    return builtin(args.map, margin=args.margin, **params)


def _integrator(args: argparse.Namespace) -> IntegratorConfig:
    return IntegratorConfig(
        rel_tol=args.rel_tol, abs_tol=args.abs_tol, horizon=args.horizon,
        max_returns=args.max_returns, method=args.method, closure_tol=args.closure_tol,
    )


def _parse_point(text: str, n: int, what: str) -> np.ndarray:
    try:
        vals = [float(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"could not parse {what} {text!r}: {exc}") from exc
    if len(vals) != n:
        raise UsageError(f"{what} must have {n} components, got {len(vals)}")
    return np.array(vals)


def _counterexample_note(m) -> None:
    if m.diffeo_counterexample:
        print(f"note: {m.label()} is a non-diffeomorphism counterexample; "
              "the functional equations below are meaningful, but conclusions "
              "that need a diffeomorphism of an invariant set do not apply.")


# ----------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> int:
    m = _the_map(args)
    try:
        mu_spec = m.multiplier(args.mu)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    _counterexample_note(m)

    natural_power = 1 if mu_spec.claimed_class is SigmaClass.PLUS else 2
    power = args.power if args.power is not None else natural_power
    if power < 1:
        raise UsageError("--power must be a positive integer")
    X = build_field(m, mu_spec.field)
    tol = args.tol

    rng = np.random.default_rng(args.rng_seed)
    max_mu = max_X = 0.0
    for _ in range(args.samples):
        p = m.sample(rng)
        max_mu = max(max_mu, check_condition_mu(m, mu_spec.field, p, power=power).relative)
        max_X = max(max_X, check_condition_X(m, X, p, power=power).relative)

    failed = False
    ok_mu = max_mu <= tol
    ok_X = max_X <= tol
    failed |= not (ok_mu and ok_X)
    print(f"condition_mu[map={m.label()}, mu={mu_spec.name}, power={power}]: "
          f"{'PASS' if ok_mu else 'FAIL'} max_rel={max_mu:.3e} "
          f"(tol {tol:g}, {args.samples} points)")
    print(f"condition_X[map={m.label()}, mu={mu_spec.name}, power={power}]: "
          f"{'PASS' if ok_X else 'FAIL'} max_rel={max_X:.3e} "
          f"(tol {tol:g}, {args.samples} points)")

    report = classify_multiplier(m, mu_spec.field, samples=args.samples,
                                 seed=args.rng_seed, power=1, threshold=tol)
    ok_cls = report.verdict is mu_spec.claimed_class
    failed |= not ok_cls
    print(f"classification[power=1]: {'PASS' if ok_cls else 'FAIL'} "
          f"verdict={report.verdict.value} claimed={mu_spec.claimed_class.value} "
          f"(quorum {report.n_used}/{report.n_samples}, "
          f"max_plus={report.max_residual_plus:.3e}, "
          f"max_minus={report.max_residual_minus:.3e})")

    if not ok_mu and mu_spec.claimed_class is SigmaClass.MINUS and power % 2 == 1:
        print(f"hint: {mu_spec.name} is on the minus branch "
              f"(mu(F) = -det DF * mu); re-run with --power {power + 1}")

    if args.skip_measure:
        print("measure: SKIP (requested)")
    elif m.default_box is None:
        print("measure: SKIP (no default box for this map; pass one through the API)")
    else:
        try:
            cmp_ = check_invariant_measure(m, mu_spec.field, m.default_box,
                                           n_samples=args.measure_samples,
                                           seed=args.rng_seed)
            ok_meas = cmp_.agrees
            failed |= not ok_meas
            print(f"measure[power={cmp_.power}]: {'PASS' if ok_meas else 'FAIL'} "
                  f"mass_box={cmp_.mass_box:.6f} mass_preimage={cmp_.mass_preimage:.6f} "
                  f"z={cmp_.z_score:.2f} ({cmp_.n_samples} samples)")
        except ValueError as exc:
            print(f"measure: SKIP ({exc})")

    return EXIT_CHECK_FAILED if failed else EXIT_OK


def cmd_rotnum(args: argparse.Namespace) -> int:
    m = _the_map(args)
    if not args.seed:
        raise UsageError("rotnum needs --seed (comma-separated coordinates)")
    seed = _parse_point(args.seed, m.n, "--seed")
    _counterexample_note(m)
    try:
        mu_spec = m.multiplier(args.mu)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    X = build_field(m, mu_spec.field)
    cfg = _integrator(args)

    data = flow_rotation_data(X, m, seed, cfg=cfg, m_max=args.m_max)
    print(f"map:            {m.label()}  (mu={mu_spec.name})")
    print(f"seed:           {', '.join(repr(float(v)) for v in seed)}")
    print(f"period:         T = {data.period!r}")
    print(f"flight time:    tau = {data.tau!r}  (signed, |tau| <= T/2)")
    print(f"multiplicity:   m = {data.multiplicity}")
    print(f"rotation:       rho = {data.rho!r}")
    print(f"closure:        residual = {data.closure_residual:.3e}")
    if args.birkhoff:
        rb = rotation_number_birkhoff(m, seed, iterations=args.birkhoff,
                                      power=data.multiplicity)
        print(f"birkhoff:       rho = {rb!r}  ({args.birkhoff} iterates, "
              f"|diff| = {abs(rb - data.rho):.3e})")
    return EXIT_OK


def _format_csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_sweep_csv(rows, n: int, path: str) -> None:
    n_h = n - 1
    header = ([f"h{i+1}" for i in range(n_h)] + [f"seed{i+1}" for i in range(n)]
              + ["T", "tau", "rho", "m", "res_mu", "res_X", "res_V", "status"])
    lines = [",".join(header)]
    for r in rows:
        cells = [_format_csv_value(v) for v in r.h]
        cells += [_format_csv_value(float(v)) for v in r.seed]
        cells += [_format_csv_value(r.period), _format_csv_value(r.tau),
                  _format_csv_value(r.rho), _format_csv_value(r.multiplicity),
                  _format_csv_value(r.res_mu), _format_csv_value(r.res_X),
                  _format_csv_value(r.res_V), r.status]
        lines.append(",".join(cells))
    payload = "\n".join(lines) + "\n"
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(prefix=".mapflow-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _plot_sweep(rows, path: str, title: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    usable = [r for r in rows if r.rho is not None]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if usable:
        hs = [r.h[0] for r in usable]
        rhos = [r.rho for r in usable]
        ax.plot(hs, rhos, "-", color="#4878a8", lw=1.0, zorder=1)
        colors = ["#c03028" if r.status == "flagged" else "#4878a8" for r in usable]
        ax.scatter(hs, rhos, c=colors, s=18, zorder=2)
    ax.set_xlabel("h1 (first integral value)")
    ax.set_ylabel("rotation number rho")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def cmd_sweep(args: argparse.Namespace) -> int:
    m = _the_map(args)
    _counterexample_note(m)
    ray = None
    ray_flags = [args.ray_base, args.ray_dir, args.s_min, args.s_max]
    if any(v is not None for v in ray_flags):
        if any(v is None for v in ray_flags):
            raise UsageError("--ray-base, --ray-dir, --s-min and --s-max go together")
        ray = SeedRay(
            base=_parse_point(args.ray_base, m.n, "--ray-base"),
            direction=_parse_point(args.ray_dir, m.n, "--ray-dir"),
            s_min=args.s_min, s_max=args.s_max,
        )
    cfg = _integrator(args)
    out = args.out or "mapflow_sweep.csv"

    rows = sweep(m, mu=args.mu, ray=ray, count=args.count, cfg=cfg,
                 m_max=args.m_max, residual_tol=args.residual_tol)
    _write_sweep_csv(rows, m.n, out)
    usable = [r for r in rows if r.rho is not None]
    flagged = [r for r in rows if r.status == "flagged"]
    print(f"wrote {out}: {len(rows)} rows, {len(usable)} usable, "
          f"{len(flagged)} flagged, {len(rows) - len(usable)} failed")

    if args.plot:
        _plot_sweep(rows, args.plot, f"{m.label()} rotation sweep")
        print(f"wrote {args.plot}")

    if len(usable) >= 3:
        reference = None
        try:
            reference = fixed_point_rotation(m)
        except (ValueError, HyperbolicFixedPointError):
            pass
        report = monotonicity_report(rows, tie_tol=args.tie_tol,
                                     fixed_point_rho=reference)
        line = f"monotonicity: {report.verdict}"
        if report.constant:
            line += " (constant rho)"
        if report.violations:
            line += f" violations at {', '.join(report.violations)}"
        print(line)
        if report.endpoint_gap is not None:
            print(f"endpoint: rho = {report.endpoint_rho!r} vs fixed-point limit "
                  f"{report.endpoint_reference!r} (gap {report.endpoint_gap:.3e})")

    if usable:
        return EXIT_OK
    statuses = [r.status for r in rows]
    if any(s == "not_invariant" for s in statuses):
        return EXIT_NOT_INVARIANT
    if any(s in ("outside_domain", "domainexit") for s in statuses):
        return EXIT_DOMAIN
    return EXIT_NO_CLOSURE


def cmd_portrait(args: argparse.Namespace) -> int:
    m = _the_map(args)
    window = None
    if args.window:
        vals = _parse_point(args.window, 4, "--window")
        window = tuple(float(v) for v in vals)
    grid = (6, 6)
    if args.grid:
        try:
            gx, gy = args.grid.lower().split("x")
            grid = (int(gx), int(gy))
        except ValueError as exc:
            raise UsageError(f"could not parse --grid {args.grid!r} (want e.g. 6x6)") from exc
    projection = None
    if args.projection:
        axes = {"x": 0, "y": 1, "z": 2}
        name = args.projection.lower()
        if len(name) != 2 or any(cc not in axes for cc in name) or name[0] == name[1]:
            raise UsageError(f"bad --projection {args.projection!r} (want xy, xz or yz)")
        projection = (axes[name[0]], axes[name[1]])
        if max(projection) >= m.n:
            raise UsageError(f"projection {args.projection} needs {max(projection)+1} "
                             f"coordinates but {m.label()} has {m.n}")
    out = args.out or "mapflow_portrait.svg"
    summary = render_portrait(m, mu=args.mu, window=window, grid=grid,
                              markers=args.markers, out=out, projection=projection)
    print(f"wrote {summary.path}: {summary.curves} curve segments, "
          f"{summary.markers} orbit markers, {len(summary.skipped)} seeds skipped")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        _apply_config(args)
        _apply_defaults(args)
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OutsideDomainError, DomainExitError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NotInvariantError as exc:
        print(f"not invariant: {exc}", file=sys.stderr)
        return EXIT_NOT_INVARIANT
    except (NonClosureError, NearCriticalError, BlowUpError, FlowError) as exc:
        print(f"no closure: {exc}", file=sys.stderr)
        return EXIT_NO_CLOSURE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
