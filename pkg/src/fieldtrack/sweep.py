"""Monte Carlo sweeps: waveform errors, parameter scans, fits, CSV/JSON output."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import subprocess
import time
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import __version__
from .protocol import (FixedK, ProtocolConfig, ScanK, TrajectoryRecord, choose_k,
                       sequence_budget, PROTOCOLS)
from .sensor import SensorParams
from .wiener import SignalModel

AXES = ("kappa", "overhead", "fidelity")
_AXIS_COLUMNS = {"kappa": "kappa_mhz_sqrthz", "overhead": "toh_s", "fidelity": "xi0"}


def waveform_error(record: TrajectoryRecord) -> float:
    """Root-mean-square waveform error of the zero-order-held estimates.

    Integrates |f_true(t) - f_hat(t)|^2 over the scored span, where f_hat is
    held constant between estimate emissions and f_true is the stored
    full-resolution truth. The span runs from the first scored estimate (the
    record's warm-up rows and the initial interval before any estimate are
    excluded) to the last estimate.
    """
    if len(record.times) == 0:
        raise ValueError("empty record")
    est_t = record.times[record.skip:]
    est_f = record.f_hat[record.skip:]
    if len(est_t) < 2:
        raise ValueError("record too short to score: need >= 2 estimates after warm-up")
    t0, t1 = float(est_t[0]), float(est_t[-1])
    tt, ff = record.truth_times, record.truth_values

    # Estimate switches must land on truth breakpoints; protocol-generated
    # records guarantee it, hand-built ones get the switch times merged in.
    pos = np.searchsorted(tt, est_t)
    present = (pos < len(tt)) & (tt[np.minimum(pos, len(tt) - 1)] == est_t)
    if not present.all():
        extra = est_t[~present]
        where = np.searchsorted(tt, extra)
        left = ff[np.maximum(where - 1, 0)]
        tt = np.insert(tt, where, extra)
        ff = np.insert(ff, where, left)

    i0 = int(np.searchsorted(tt, t0, side="right")) - 1
    i1 = int(np.searchsorted(tt, t1, side="left"))
    grid = np.concatenate([[t0], tt[i0 + 1:i1], [t1]])
    truth_seg = ff[i0:i1]
    hold = np.searchsorted(est_t, grid[:-1], side="right") - 1
    err = truth_seg - est_f[hold]
    dt = np.diff(grid)
    return float(math.sqrt(float(np.dot(err * err, dt)) / (t1 - t0)))


def estimation_sigma(record: TrajectoryRecord, tau0: float) -> float:
    """Circular deviation of the estimates at their emission instants.

    The dispersion sqrt(<cos(2*pi*(f_true - f_hat)*tau0)>^-2 - 1)/(2*pi*tau0)
    over the scored rows: the circular analogue of an RMS estimation error,
    insensitive to band wrap-around and free of any hold-interval penalty.
    This is the per-sequence error figure the scaling-law fits use; the
    time-integrated waveform_error is the protocol-comparison metric.
    """
    if len(record.times) == 0:
        raise ValueError("empty record")
    err = record.f_true[record.skip:] - record.f_hat[record.skip:]
    if len(err) == 0:
        raise ValueError("record too short to score")
    mean_cos = float(np.mean(np.cos(2.0 * math.pi * tau0 * err)))
    if mean_cos <= 0:
        return math.inf
    return math.sqrt(max(mean_cos ** -2 - 1.0, 0.0)) / (2.0 * math.pi * tau0)


def eta(eps_non_tracking: float, eps_tracking: float) -> float:
    """Improvement ratio of the reset-based error over the tracking error."""
    if eps_non_tracking <= 0 or eps_tracking <= 0:
        raise ValueError("both errors must be > 0")
    return eps_non_tracking / eps_tracking


@dataclass(frozen=True)
class PowerLawFit:
    """y = c * x^exponent with standard errors from the log-log regression."""
    c: float
    exponent: float
    c_stderr: float
    exponent_stderr: float


def fit_power_law(points, fixed_exponent: float | None = None) -> PowerLawFit:
    """Weighted least squares of log y on log x.

    points is a sequence of (x, y, y_err) with x, y > 0. When every y_err is
    positive the fit is weighted by (y/y_err)^2, the log-domain inverse
    variance, and parameter covariances are taken at face value (the errors
    are real standard errors here). Without usable errors the fit is
    unweighted and covariances are scaled by the residual variance, so exact
    data reports zero standard errors.

    With fixed_exponent the slope is pinned and only the proportionality
    constant is fitted (the form used for theory-anchored scaling laws,
    where a free intercept far from the data pivot would be meaningless).
    """
    pts = [(float(x), float(y), float(e)) for x, y, e in points]
    if len(pts) < 3:
        raise ValueError(f"need >= 3 points, got {len(pts)}")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    yerr = np.array([p[2] for p in pts])
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("x and y must be positive for a log-log fit")
    if np.all(x == x[0]):
        raise ValueError("degenerate fit: all x identical")
    lx, ly = np.log(x), np.log(y)
    weighted = bool(np.all(yerr > 0))
    w = (y / yerr) ** 2 if weighted else np.ones_like(y)
    if fixed_exponent is not None:
        resid0 = ly - fixed_exponent * lx
        sw = float(np.sum(w))
        intercept = float(np.sum(w * resid0)) / sw
        resid = resid0 - intercept
        dof = len(x) - 1
        scale = 1.0 if weighted else (float(resid @ (w * resid)) / dof
                                      if dof > 0 else 0.0)
        c = math.exp(intercept)
        return PowerLawFit(c=c, exponent=float(fixed_exponent),
                           c_stderr=c * math.sqrt(max(scale / sw, 0.0)),
                           exponent_stderr=0.0)
    design = np.column_stack([np.ones_like(lx), lx])
    normal = design.T @ (design * w[:, None])
    beta = np.linalg.solve(normal, design.T @ (w * ly))
    resid = ly - design @ beta
    dof = len(x) - 2
    if weighted:
        scale = 1.0
    else:
        scale = float(resid @ (w * resid)) / dof if dof > 0 else 0.0
    cov = np.linalg.inv(normal) * scale
    c = math.exp(beta[0])
    return PowerLawFit(c=c, exponent=float(beta[1]),
                       c_stderr=c * math.sqrt(max(cov[0, 0], 0.0)),
                       exponent_stderr=math.sqrt(max(cov[1, 1], 0.0)))


@dataclass(frozen=True)
class SweepConfig:
    """One parameter sweep: an axis, its values, and everything held fixed.

    values are in SI units (kappa in Hz^{3/2}, overhead in seconds, fidelity
    dimensionless). duration None applies the default policy: 5 ms of
    simulated time when the overhead is at most 1 us, otherwise 200
    estimation cycles of the resolved sequence length.
    """

    axis: str
    values: tuple
    protocols: tuple = ("non-tracking", "tracking")
    trajectories: int = 100
    duration: float | None = None
    base_seed: int = 0
    kappa: float = 2e6
    sensor: SensorParams = SensorParams()
    protocol: ProtocolConfig = ProtocolConfig()
    clamp: float = 24e6
    f0: float | str = "random-uniform"
    signal_mode: str = "auto"
    pilot_trajectories: int = 16
    pilot_cycles: int = 12
    scan_window: int | None = None

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise ValueError("values must be non-empty")
        if self.trajectories < 1:
            raise ValueError("need at least one trajectory per point")
        for p in self.protocols:
            if p not in PROTOCOLS:
                raise ValueError(f"unknown protocol {p!r}")
        vals = np.asarray(self.values, dtype=float)
        if self.axis == "kappa" and np.any(vals <= 0):
            raise ValueError("kappa values must be > 0")
        if self.axis == "overhead" and np.any(vals < 0):
            raise ValueError("overhead values must be >= 0")
        if self.axis == "fidelity" and (np.any(vals < 0) or np.any(vals > 1)):
            raise ValueError("fidelity values must be in [0, 1]")


@dataclass
class PointResult:
    axis_value: float
    protocol: str
    eps_mean: float
    eps_stderr: float
    n_traj: int
    k_used: int
    duration: float
    eps_per_traj: np.ndarray
    sigma_per_traj: np.ndarray | None = None
    sigma_mean: float = math.nan     # pooled emission-instant circular deviation
    sigma_stderr: float = math.nan


@dataclass
class SweepResult:
    axis: str
    points: list
    etas: list
    fits: dict
    metadata: dict


def _point_setup(cfg: SweepConfig, value: float):
    sensor = cfg.sensor
    kappa = cfg.kappa
    if cfg.axis == "kappa":
        kappa = value
    elif cfg.axis == "overhead":
        sensor = replace(sensor, t_overhead=value)
    elif cfg.axis == "fidelity":
        sensor = replace(sensor, xi0=value)
    f_range = 0.5 / sensor.tau0
    model = SignalModel(kappa=kappa, clamp=min(cfg.clamp, f_range),
                        f_range=f_range, f0=cfg.f0)
    return model, sensor


def _trajectory_seed(base_seed: int, point: int, traj: int) -> np.random.SeedSequence:
    # protocol-independent, so both protocols see the same truth seed
    return np.random.SeedSequence(entropy=base_seed, spawn_key=(0, point, traj))


def _scan_seed(base_seed: int, point: int, prot: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=base_seed, spawn_key=(1, point, prot))


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Run every (point, trajectory, protocol) task and aggregate errors.

    Tasks are independently seeded from (base seed, point index, trajectory
    index), so the output is reproducible and the truth seeds are shared
    between protocols at each trajectory index.
    """
    t_wall = time.time()
    points: list[PointResult] = []
    for pi, value in enumerate(cfg.values):
        model, sensor = _point_setup(cfg, value)
        resolved: dict[str, int] = {}
        for prot_i, prot in enumerate(cfg.protocols):
            resolved[prot] = choose_k(
                model.kappa, cfg.protocol, sensor, protocol=prot, model=model,
                pilot_trajectories=cfg.pilot_trajectories,
                pilot_cycles=cfg.pilot_cycles, window=cfg.scan_window,
                seed=_scan_seed(cfg.base_seed, pi, prot_i), mode=cfg.signal_mode)
        duration = cfg.duration
        if duration is None:
            k_ref = resolved[cfg.protocols[0]]
            _, _, t_total = sequence_budget(k_ref, cfg.protocol, sensor)
            duration = 5e-3 if sensor.t_overhead <= 1e-6 else 200 * t_total
        for prot in cfg.protocols:
            k_used = resolved[prot]
            params = replace(sensor, K=max(sensor.K, k_used))
            run_cfg = replace(cfg.protocol, k_policy=FixedK(k_used),
                              duration=duration)
            run = PROTOCOLS[prot]
            eps = np.empty(cfg.trajectories)
            sig = np.empty(cfg.trajectories)
            for ti in range(cfg.trajectories):
                rec = run(model, params, run_cfg,
                          _trajectory_seed(cfg.base_seed, pi, ti),
                          mode=cfg.signal_mode)
                eps[ti] = waveform_error(rec)
                sig[ti] = estimation_sigma(rec, params.tau0)
            mean, se = aggregate_errors(eps)
            smean, sse = aggregate_sigmas(sig, params.tau0)
            points.append(PointResult(
                axis_value=float(value), protocol=prot, eps_mean=mean,
                eps_stderr=se, n_traj=cfg.trajectories, k_used=k_used,
                duration=duration, eps_per_traj=eps, sigma_per_traj=sig,
                sigma_mean=smean, sigma_stderr=sse))

    etas = []
    if "non-tracking" in cfg.protocols and "tracking" in cfg.protocols:
        by_key = {(p.axis_value, p.protocol): p for p in points}
        for value in cfg.values:
            non = by_key[(float(value), "non-tracking")]
            tr = by_key[(float(value), "tracking")]
            etas.append((float(value), eta(non.eps_mean, tr.eps_mean)))

    fits = {}
    if cfg.axis == "kappa" and len(cfg.values) >= 3:
        for prot in cfg.protocols:
            rows = [(p.axis_value, p.eps_mean, p.eps_stderr)
                    for p in points if p.protocol == prot]
            fits[prot] = fit_power_law(rows)

    meta = {
        "config": config_dict(cfg),
        "config_hash": config_hash(cfg),
        "base_seed": cfg.base_seed,
        "version": version_string(),
        "runtime_seconds": time.time() - t_wall,
    }
    return SweepResult(axis=cfg.axis, points=points, etas=etas, fits=fits,
                       metadata=meta)


def aggregate_errors(eps: np.ndarray) -> tuple[float, float]:
    """Ensemble mean and standard error of per-trajectory errors."""
    eps = np.asarray(eps, dtype=float)
    if len(eps) == 0:
        raise ValueError("no trajectories to aggregate")
    mean = float(np.mean(eps))
    se = float(np.std(eps, ddof=1) / math.sqrt(len(eps))) if len(eps) > 1 else 0.0
    return mean, se


def aggregate_sigmas(sigmas: np.ndarray, tau0: float) -> tuple[float, float]:
    """Pooled circular deviation across trajectories.

    Per-trajectory values are mapped back to mean-cosine space, averaged
    there (the circular-dispersion average belongs over the whole ensemble,
    where a single wrapped outlier row cannot dominate), and transformed
    back. The standard error follows by the delta method.
    """
    sig = np.asarray(sigmas, dtype=float)
    if len(sig) == 0:
        raise ValueError("no trajectories to aggregate")
    scale = 2.0 * math.pi * tau0
    m = 1.0 / np.sqrt(1.0 + (scale * sig) ** 2)
    m_mean = float(np.mean(m))
    if m_mean <= 0:
        return math.inf, math.inf
    pooled = math.sqrt(max(m_mean ** -2 - 1.0, 0.0)) / scale
    if len(sig) < 2 or pooled == 0.0:
        return pooled, 0.0
    se_m = float(np.std(m, ddof=1) / math.sqrt(len(m)))
    dsig_dm = m_mean ** -3 / (scale * math.sqrt(m_mean ** -2 - 1.0))
    return pooled, dsig_dm * se_m


# --------------------------------------------------------------------- output

def _axis_value_out(axis: str, value: float) -> float:
    return value / 1e6 if axis == "kappa" else value


def write_results_csv(result: SweepResult, fileobj) -> None:
    """Results table: one row per (point, protocol), errors in MHz."""
    w = csv.writer(fileobj, lineterminator="\n")
    w.writerow(["axis_name", "axis_value", "protocol", "eps_mhz",
                "eps_stderr_mhz", "n_traj", "K_used"])
    name = _AXIS_COLUMNS[result.axis]
    for p in result.points:
        w.writerow([name, repr(_axis_value_out(result.axis, p.axis_value)),
                    p.protocol, repr(p.eps_mean / 1e6), repr(p.eps_stderr / 1e6),
                    p.n_traj, p.k_used])


def read_results_csv(fileobj) -> list[dict]:
    """Parse a results table back into typed row dicts."""
    rows = []
    reader = csv.DictReader(fileobj)
    required = {"axis_name", "axis_value", "protocol", "eps_mhz",
                "eps_stderr_mhz", "n_traj", "K_used"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise ValueError(f"results CSV must have columns {sorted(required)}")
    for raw in reader:
        rows.append({
            "axis_name": raw["axis_name"],
            "axis_value": float(raw["axis_value"]),
            "protocol": raw["protocol"],
            "eps_mhz": float(raw["eps_mhz"]),
            "eps_stderr_mhz": float(raw["eps_stderr_mhz"]),
            "n_traj": int(raw["n_traj"]),
            "K_used": int(raw["K_used"]),
        })
    return rows


def config_dict(cfg: SweepConfig) -> dict:
    d = asdict(cfg)
    policy = cfg.protocol.k_policy
    d["protocol"]["k_policy"] = {"type": type(policy).__name__.lower(),
                                 **asdict(policy)}
    return d


def config_hash(cfg: SweepConfig) -> str:
    text = json.dumps(config_dict(cfg), sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def version_string() -> str:
    """Package version, extended git-describe style when run from a checkout."""
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             capture_output=True, text=True, timeout=5,
                             cwd=os.path.dirname(os.path.abspath(__file__)))
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except OSError:
        pass
    return __version__


def result_json(result: SweepResult) -> dict:
    """Machine-readable sweep summary: config echo, per-point stats, fits."""
    doc = dict(result.metadata)
    doc["axis"] = result.axis
    doc["points"] = [{
        "axis_value": p.axis_value,
        "axis_value_csv": _axis_value_out(result.axis, p.axis_value),
        "protocol": p.protocol,
        "eps_hz": p.eps_mean,
        "eps_stderr_hz": p.eps_stderr,
        "sigma_hz": p.sigma_mean,
        "sigma_stderr_hz": p.sigma_stderr,
        "n_traj": p.n_traj,
        "K_used": p.k_used,
        "duration_s": p.duration,
    } for p in result.points]
    doc["etas"] = [{"axis_value": v, "eta": e} for v, e in result.etas]
    doc["fits"] = {prot: asdict(fit) for prot, fit in result.fits.items()}
    return doc
