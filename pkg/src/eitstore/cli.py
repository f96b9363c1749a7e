"""Command-line front end.

Subcommands: ``check`` (feasibility and derived constants), ``spectrum``
(susceptibility scans to CSV), ``simulate`` (full storage/retrieval run to
CSV + JSON summary), ``revival`` (efficiency curve or surface to CSV).
Exit codes: 0 ok, 2 configuration error, 3 numerical instability.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import apply_overrides, load_config, resolve
from .dynamics import run_protocol
from .errors import ConfigurationError, InfeasibleSchemeError, \
    NumericalInstabilityError
from .output import format_float
from .polariton import (efficiency_curve, revival_surface, write_curve_csv,
                        write_surface_csv)
from .scheme import check_eit_feasibility
from .spectra import transparency_scan

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eitstore",
        description="Light storage and retrieval in a degenerate EIT medium",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=".", help="output directory")
        group = p.add_mutually_exclusive_group()
        group.add_argument("--b-gauss", type=float, default=None,
                           help="override field magnitude (gauss)")
        group.add_argument("--larmor-period-us", type=float, default=None,
                           help="override field via Larmor period (us)")
        p.add_argument("--storage-us", type=float, default=None,
                       help="override dark storage duration (us)")
        p.add_argument("--grid-nz", type=int, default=None,
                       help="override z grid points")
        p.add_argument("--grid-dt-ns", type=float, default=None,
                       help="override time step (ns)")

    p_check = sub.add_parser("check", help="validate config, print derived "
                                           "constants")
    add_common(p_check)

    p_spec = sub.add_parser("spectrum", help="susceptibility scans to CSV")
    add_common(p_spec)
    p_spec.add_argument("--omega-over-gamma", default="0,1.5",
                        help="comma list of control amplitudes in units of "
                             "Gamma_e")
    p_spec.add_argument("--delta-max-gamma", type=float, default=5.0,
                        help="scan half-width in units of Gamma_e")
    p_spec.add_argument("--points", type=int, default=801)

    p_sim = sub.add_parser("simulate", help="full storage/retrieval run")
    add_common(p_sim)

    p_rev = sub.add_parser("revival", help="retrieval-efficiency curve or "
                                           "surface")
    add_common(p_rev)
    p_rev.add_argument("--theta", default=None,
                       help="comma list of tilt angles (rad) or range "
                            "'start:stop:n'; default 33 angles over "
                            "[0, pi/2]")
    p_rev.add_argument("--t-points", type=int, default=257)
    p_rev.add_argument("--periods", type=float, default=1.0,
                       help="storage-time span in Larmor periods")
    return parser


def _load(args):
    config = load_config(args.config)
    config = apply_overrides(
        config,
        b_gauss=args.b_gauss,
        larmor_period=(args.larmor_period_us * 1e-6
                       if args.larmor_period_us is not None else None),
        storage=(args.storage_us * 1e-6
                 if args.storage_us is not None else None),
        nz=args.grid_nz,
        dt=(args.grid_dt_ns * 1e-9 if args.grid_dt_ns is not None else None),
    )
    return config


def cmd_check(args) -> int:
    config = _load(args)
    report = check_eit_feasibility(config.scheme, config.pol)
    print(f"feasibility: {report}")
    if not report.ok:
        return EXIT_CONFIG
    experiment = resolve(config)
    derived = experiment.derived()
    print(f"d_alpha: {format_float(derived['d_alpha'])}")
    print(f"n_atoms: {format_float(derived['n_atoms'])}")
    print(f"n_kappa_sq_rad2_s2: {format_float(derived['n_kappa_sq_rad2_s2'])}")
    print(f"v_g_m_s: {format_float(derived['v_g_m_s'])}")
    print(f"b_gauss: {format_float(derived['b_gauss'])}")
    tl = derived["larmor_period_s"]
    print("larmor_period_us: "
          + ("inf" if math.isinf(tl) else format_float(tl * 1e6)))
    print(f"collapse_rate: {format_float(derived['collapse_rate'])}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    config = _load(args)
    experiment = resolve(config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    omegas = [float(tok) for tok in args.omega_over_gamma.split(",") if tok]
    if not omegas:
        raise ConfigurationError("need at least one control amplitude")
    gamma = experiment.scheme.Gamma_e
    half_width = args.delta_max_gamma * gamma
    for i, rel in enumerate(omegas):
        if rel < 0:
            raise ConfigurationError("control amplitude must be nonnegative")
        result = transparency_scan(experiment.scheme, experiment.tables,
                                   experiment.d_alpha,
                                   experiment.geometry.length,
                                   rel * gamma, -half_width, half_width,
                                   args.points)
        path = out_dir / f"spectrum_{i}.csv"
        with open(path, "w", encoding="utf-8") as fh:
            result.write_csv(fh)
        print(f"spectrum_{i}.csv: omega_over_gamma={rel:g}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _load(args)
    experiment = resolve(config)
    record = run_protocol(experiment)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "timeseries.csv", "w", encoding="utf-8") as fh:
        record.time_series_csv(fh)
    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(record.summary(), fh, indent=2)
        fh.write("\n")
    print(f"E_in: {format_float(record.e_in)}")
    print(f"E_leaked: {format_float(record.e_leaked)}")
    print(f"E_retrieved: {format_float(record.e_retrieved)}")
    print(f"efficiency: {format_float(record.efficiency)}")
    return EXIT_OK


def _parse_thetas(spec: str | None) -> np.ndarray:
    if spec is None:
        return np.linspace(0.0, math.pi / 2.0, 33)
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigurationError("theta range must be 'start:stop:n'")
        start, stop, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise ConfigurationError("theta range needs at least one point")
        return np.linspace(start, stop, n)
    values = [float(tok) for tok in spec.split(",") if tok]
    if not values:
        raise ConfigurationError("no tilt angles given")
    return np.asarray(values)


def cmd_revival(args) -> int:
    config = _load(args)
    experiment = resolve(config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    thetas = _parse_thetas(args.theta)
    period = experiment.bfield.larmor_period(experiment.scheme.g_g)
    if math.isinf(period):
        raise ConfigurationError("revival needs a nonzero magnetic field")
    t_values = np.linspace(0.0, args.periods * period, args.t_points)
    if thetas.size == 1:
        from .scheme import MagneticField
        bfield = MagneticField(b_gauss=experiment.bfield.b_gauss,
                               theta=float(thetas[0]))
        curve = efficiency_curve(experiment.scheme, experiment.tables,
                                 bfield, t_values)
        path = out_dir / "revival_curve.csv"
        with open(path, "w", encoding="utf-8") as fh:
            write_curve_csv(curve, period, fh)
        print(f"revival_curve.csv: theta={thetas[0]:g}")
    else:
        surface = revival_surface(experiment.scheme, experiment.tables,
                                  experiment.bfield.b_gauss, thetas, t_values)
        path = out_dir / "revival_surface.csv"
        with open(path, "w", encoding="utf-8") as fh:
            write_surface_csv(thetas, t_values, surface, period, fh)
        print(f"revival_surface.csv: {thetas.size} angles x "
              f"{t_values.size} times")
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "spectrum": cmd_spectrum,
    "simulate": cmd_simulate,
    "revival": cmd_revival,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InfeasibleSchemeError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalInstabilityError as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
