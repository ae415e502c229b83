"""Command-line interface: single-trajectory dumps, parameter sweeps, fits.

Units at this boundary: kappa in MHz*Hz^(1/2) and errors in MHz (matching the
results CSV); every time argument in seconds.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .protocol import (FixedK, ProtocolConfig, ScanK, run_non_tracking,
                       run_tracking)
from .sensor import SensorParams
from .sweep import (SweepConfig, fit_power_law, read_results_csv, result_json,
                    run_sweep, version_string, waveform_error,
                    write_results_csv)
from .wiener import SignalModel, export_waveform_csv

KAPPA_SCALE = 1e6  # MHz*Hz^(1/2) -> Hz^(3/2)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--toh", type=float, default=0.0,
                   help="overhead per Ramsey, seconds (default 0)")
    p.add_argument("--xi0", type=float, default=1.0, help="read-out fidelity for mu=0")
    p.add_argument("--xi1", type=float, default=1.0, help="read-out fidelity for mu=1")
    p.add_argument("--t2star", type=float, default=100e-6,
                   help="dephasing time, seconds (default 100 us)")
    p.add_argument("--tau0", type=float, default=20e-9,
                   help="minimum sensing time, seconds (default 20 ns)")
    p.add_argument("--K", type=int, default=None,
                   help="fixed top sensing index (default 7 unless --K-scan)")
    p.add_argument("--K-scan", type=int, nargs=2, metavar=("MIN", "MAX"),
                   default=None, help="scan the top sensing index over [MIN, MAX]")
    p.add_argument("--G", type=int, default=5, help="repetitions at the top index")
    p.add_argument("--F", type=int, default=3, help="extra repetitions per lower index")
    p.add_argument("--alpha", type=float, default=0.15,
                   help="tracking threshold factor alpha")
    p.add_argument("--phase-increments", default="0,0", metavar="D0,D1",
                   help="extra read-out phase after outcome 0 / 1, radians "
                        "(non-tracking only)")
    p.add_argument("--estimator-xi", default=None, metavar="XI0,XI1",
                   help="read-out fidelities assumed by the estimator "
                        "(default: the sensor's true values)")
    p.add_argument("--duration", type=float, default=None,
                   help="simulated seconds per trajectory (default: policy)")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--signal-mode", choices=("auto", "grid", "event"),
                   default="auto", help="truth-path representation")
    p.add_argument("--json-out", default=None,
                   help="write resolved config & summary JSON here")


def _k_policy(args) -> FixedK | ScanK:
    if args.K is not None and args.K_scan is not None:
        raise SystemExit("use either --K or --K-scan, not both")
    if args.K_scan is not None:
        return ScanK(args.K_scan[0], args.K_scan[1])
    return FixedK(args.K if args.K is not None else 7)


def _sensor(args, k_floor: int = 0) -> SensorParams:
    policy = _k_policy(args)
    k_cap = max(policy.k if isinstance(policy, FixedK) else policy.k_max, k_floor, 7)
    return SensorParams(tau0=args.tau0, K=k_cap, t2star=args.t2star,
                        xi0=args.xi0, xi1=args.xi1, t_overhead=args.toh)


def _protocol_cfg(args, duration: float | None = None) -> ProtocolConfig:
    inc = _parse_list(args.phase_increments)
    if len(inc) != 2:
        raise SystemExit("--phase-increments needs exactly two values")
    est_xi = None
    if args.estimator_xi is not None:
        est_xi = _parse_list(args.estimator_xi)
        if len(est_xi) != 2:
            raise SystemExit("--estimator-xi needs exactly two values")
    return ProtocolConfig(G=args.G, F=args.F, alpha=args.alpha,
                          phase_increments=inc, k_policy=_k_policy(args),
                          estimator_xi=est_xi,
                          duration=duration if duration is not None else 5e-3)


def _parse_list(text: str, scale: float = 1.0) -> tuple:
    try:
        return tuple(float(v) * scale for v in text.split(","))
    except ValueError:
        raise SystemExit(f"could not parse list {text!r}; expected comma-separated numbers")


def _sweep_config(args, axis: str, values: tuple,
                  protocols: tuple) -> SweepConfig:
    return SweepConfig(
        axis=axis, values=values, protocols=protocols,
        trajectories=args.trajectories, duration=args.duration,
        base_seed=args.seed, kappa=args.kappa * KAPPA_SCALE,
        sensor=_sensor(args), protocol=_protocol_cfg(args),
        signal_mode=args.signal_mode,
        pilot_trajectories=args.pilot_trajectories,
        pilot_cycles=args.pilot_cycles)


def _add_sweep_common(p: argparse.ArgumentParser) -> None:
    _add_common(p)
    p.add_argument("--kappa", type=float, default=2.0,
                   help="fluctuation level, MHz*Hz^(1/2) (fixed axis value)")
    p.add_argument("--protocol", choices=("tracking", "non-tracking", "both"),
                   default="both")
    p.add_argument("--trajectories", type=int, default=100,
                   help="trajectories per sweep point")
    p.add_argument("--pilot-trajectories", type=int, default=16)
    p.add_argument("--pilot-cycles", type=int, default=12)
    p.add_argument("--out", required=True, help="results CSV path")


def _protocols(args) -> tuple:
    if args.protocol == "both":
        return ("non-tracking", "tracking")
    return (args.protocol,)


def _finish_sweep(args, cfg: SweepConfig) -> None:
    result = run_sweep(cfg)
    with open(args.out, "w", newline="") as f:
        write_results_csv(result, f)
    if args.json_out:
        with open(args.json_out, "w") as f:
            json.dump(result_json(result), f, indent=2, sort_keys=True)
            f.write("\n")
    for v, e in result.etas:
        print(f"eta @ {v:g}: {e:.3f}")
    for prot, fit in result.fits.items():
        print(f"fit [{prot}]: c={fit.c:.4g} exponent={fit.exponent:.4f} "
              f"(+/- {fit.exponent_stderr:.4f})")
    print(f"wrote {args.out}")


def cmd_waveform(args) -> None:
    protocol = run_tracking if args.protocol == "tracking" else run_non_tracking
    kappa = args.kappa * KAPPA_SCALE
    sensor = _sensor(args)
    f_range = 0.5 / sensor.tau0
    model = SignalModel(kappa=kappa, clamp=min(24e6, f_range), f_range=f_range)
    policy = _k_policy(args)
    if not isinstance(policy, FixedK):
        raise SystemExit("waveform runs need a fixed --K")
    duration = args.duration if args.duration is not None else 5e-3
    cfg = replace(_protocol_cfg(args, duration), k_policy=policy)
    record = protocol(model, sensor, cfg, args.seed, mode=args.signal_mode)
    with open(args.out, "w", newline="") as f:
        record.write_csv(f)
    if args.truth_out:
        class _Stored:
            def breakpoints(self_inner):
                return record.truth_times, record.truth_values
        with open(args.truth_out, "w", newline="") as f:
            export_waveform_csv(_Stored(), f)
    if args.json_out:
        doc = {"command": "waveform", "protocol": args.protocol,
               "kappa_mhz_sqrthz": args.kappa, "duration_s": duration,
               "seed": args.seed, "n_estimates": len(record),
               "n_ramsey": record.n_ramsey,
               "eps_hz": waveform_error(record) if len(record) - record.skip >= 2 else None,
               "version": version_string()}
        with open(args.json_out, "w") as f:
            json.dump(doc, f, indent=2, sort_keys=True)
            f.write("\n")
    print(f"wrote {args.out} ({len(record)} estimates, {record.n_ramsey} Ramseys)")


def cmd_sweep_kappa(args) -> None:
    values = _parse_list(args.kappa_list, KAPPA_SCALE)
    _finish_sweep(args, _sweep_config(args, "kappa", values, _protocols(args)))


def cmd_sweep_overhead(args) -> None:
    values = _parse_list(args.toh_list)
    _finish_sweep(args, _sweep_config(args, "overhead", values, _protocols(args)))


def cmd_sweep_fidelity(args) -> None:
    values = _parse_list(args.xi0_list)
    _finish_sweep(args, _sweep_config(args, "fidelity", values, _protocols(args)))


def cmd_fit(args) -> None:
    with open(args.infile) as f:
        rows = read_results_csv(f)
    rows = [r for r in rows if r["protocol"] == args.protocol]
    if not rows:
        raise SystemExit(f"no rows for protocol {args.protocol!r}")
    axis = rows[0]["axis_name"]
    pts = [(r["axis_value"], r["eps_mhz"], r["eps_stderr_mhz"]) for r in rows]
    fit = fit_power_law(pts)
    doc = {"axis": axis, "protocol": args.protocol, "c": fit.c,
           "exponent": fit.exponent, "c_stderr": fit.c_stderr,
           "exponent_stderr": fit.exponent_stderr, "n_points": len(pts),
           "version": version_string()}
    if axis == "kappa_mhz_sqrthz":
        # same law on SI axes (Hz vs Hz^{3/2})
        doc["c_si"] = fit.c * KAPPA_SCALE ** (1.0 - fit.exponent)
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.json_out:
        with open(args.json_out, "w") as f:
            f.write(text)
    sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fieldtrack",
        description="Simulate Bayesian tracking of a drifting frequency with a "
                    "single-qubit Ramsey sensor.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("waveform", help="single trajectory: truth + estimates CSV")
    _add_common(p)
    p.add_argument("--kappa", type=float, default=2.0,
                   help="fluctuation level, MHz*Hz^(1/2)")
    p.add_argument("--protocol", choices=("tracking", "non-tracking"),
                   default="tracking")
    p.add_argument("--out", required=True, help="estimate record CSV path")
    p.add_argument("--truth-out", default=None, help="dense truth CSV path")
    p.set_defaults(func=cmd_waveform)

    p = sub.add_parser("sweep-kappa", help="error vs fluctuation level")
    _add_sweep_common(p)
    p.add_argument("--kappa-list", required=True,
                   help="comma-separated kappa values, MHz*Hz^(1/2)")
    p.set_defaults(func=cmd_sweep_kappa)

    p = sub.add_parser("sweep-overhead", help="error vs per-Ramsey overhead")
    _add_sweep_common(p)
    p.add_argument("--toh-list", required=True,
                   help="comma-separated overhead values, seconds")
    p.set_defaults(func=cmd_sweep_overhead)

    p = sub.add_parser("sweep-fidelity", help="error vs read-out fidelity")
    _add_sweep_common(p)
    p.add_argument("--xi0-list", required=True,
                   help="comma-separated xi0 values in [0, 1]")
    p.set_defaults(func=cmd_sweep_fidelity)

    p = sub.add_parser("fit", help="offline power-law fit of a results CSV")
    p.add_argument("--in", dest="infile", required=True, help="results CSV path")
    p.add_argument("--protocol", choices=("tracking", "non-tracking"),
                   default="non-tracking")
    p.add_argument("--json-out", default=None)
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> None:
    args = build_parser().parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main()
