"""The two frequency estimators: reset-based sequences and adaptive tracking.

Both drive the same sensor and truth-path machinery but differ in how they
spend measurement time:

* run_non_tracking repeats self-contained estimation sequences. Each starts
  from a flat prior and sweeps the sensing index k = K..0 with
  M_k = G + (K-k)*F repetitions, emitting one frequency estimate per
  sequence. It uses no knowledge of the signal statistics.
* run_tracking keeps a single distribution alive for the whole run. Before
  every Ramsey it diffuses the distribution by the known signal statistics
  over the upcoming step, measures at one adaptively chosen sensing index,
  and emits an estimate per Ramsey. The index walks up when the running
  uncertainty beats alpha/(2^k*tau0) and down otherwise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .circular import CircularDistribution
from .sensor import SensorParams, simulate_ramsey
from .wiener import SignalModel, make_truth_path


@dataclass(frozen=True)
class FixedK:
    """Use exactly this top sensing index."""
    k: int


@dataclass(frozen=True)
class ScanK:
    """Pick the top sensing index by pilot runs over [k_min, k_max]."""
    k_min: int
    k_max: int

    def __post_init__(self):
        if not 0 <= self.k_min <= self.k_max:
            raise ValueError(f"need 0 <= k_min <= k_max, got {self.k_min}..{self.k_max}")


@dataclass(frozen=True)
class ProtocolConfig:
    """Settings shared by both protocols.

    G/F set the repetition schedule M_k = G + (K-k)*F; alpha scales the
    tracking threshold alpha/(2^k*tau0); phase_increments is the extra
    read-out phase added after a previous outcome mu (non-tracking only);
    duration is the simulated time per trajectory; j_max/prune_tol configure
    the distributions the protocols create.

    estimator_xi pins the read-out fidelities the estimator's likelihood
    assumes, independent of the sensor's true values. None (default) uses
    the true fidelities: honest Bayesian conditioning, whose posterior keeps
    a diffuse remainder after every mu=1 outcome when xi0 < 1. (1.0, 1.0)
    reproduces the idealized update rule instead, which keeps the
    uncertainty figure free of that fidelity floor at the price of a
    mismatched likelihood.
    """

    G: int = 5
    F: int = 3
    alpha: float = 0.15
    phase_increments: tuple[float, float] = (0.0, 0.0)
    k_policy: FixedK | ScanK = FixedK(7)
    duration: float = 5e-3
    j_max: int = 65536
    prune_tol: float = 1e-12
    estimator_xi: tuple[float, float] | None = None

    def __post_init__(self):
        if self.G < 1:
            raise ValueError(f"G must be >= 1, got {self.G}")
        if self.F < 0:
            raise ValueError(f"F must be >= 0, got {self.F}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")
        if len(self.phase_increments) != 2:
            raise ValueError("phase_increments must hold one entry per outcome")
        if self.estimator_xi is not None:
            if len(self.estimator_xi) != 2 or not all(
                    0.0 <= v <= 1.0 for v in self.estimator_xi):
                raise ValueError("estimator_xi must be two fidelities in [0, 1]")


@dataclass
class TrajectoryRecord:
    """Timestamped estimates plus the full-resolution truth that produced them.

    Row arrays are aligned: row i is the estimate emitted at times[i]. skip
    marks how many leading rows are warm-up (excluded from error scoring).
    truth_times/truth_values are the generated breakpoints of the true signal,
    kept at full resolution so waveform errors integrate the truth variation
    between estimates, not just at the emission instants.
    """

    times: np.ndarray
    f_true: np.ndarray
    f_hat: np.ndarray
    k_used: np.ndarray
    mu: np.ndarray
    theta: np.ndarray
    fom: np.ndarray
    t_end: float
    n_ramsey: int
    skip: int
    truth_times: np.ndarray
    truth_values: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def write_csv(self, fileobj) -> None:
        w = csv.writer(fileobj, lineterminator="\n")
        w.writerow(["t_s", "f_true_hz", "f_hat_hz", "k", "mu", "theta_rad", "fom_hz"])
        for i in range(len(self.times)):
            w.writerow([repr(float(self.times[i])), repr(float(self.f_true[i])),
                        repr(float(self.f_hat[i])), int(self.k_used[i]),
                        int(self.mu[i]), repr(float(self.theta[i])),
                        repr(float(self.fom[i]))])


def repetitions(k: int, K: int, cfg: ProtocolConfig) -> int:
    """Repetition count M_k = G + (K-k)*F for sensing index k."""
    if not 0 <= k <= K:
        raise ValueError(f"sensing index k={k} outside [0, {K}]")
    return cfg.G + (K - k) * cfg.F


def sequence_budget(K: int, cfg: ProtocolConfig,
                    params: SensorParams) -> tuple[float, int, float]:
    """Time budget of one full estimation sequence.

    Returns (T_sense, R_K, T_total):
      T_sense = tau0*[(2^(K+1)-1)*G + (2^(K+1)-K-2)*F]   total sensing time,
      R_K     = (K+1)*G + (K+1)*K*F/2                    number of Ramseys,
      T_total = T_sense + R_K*t_overhead                 wall-clock per sequence.
    """
    if K < 0:
        raise ValueError(f"K must be >= 0, got {K}")
    two = 1 << (K + 1)
    t_sense = params.tau0 * ((two - 1) * cfg.G + (two - K - 2) * cfg.F)
    r_k = (K + 1) * cfg.G + (K + 1) * K * cfg.F // 2
    return t_sense, r_k, t_sense + r_k * params.t_overhead


def _resolve_fixed_k(cfg: ProtocolConfig, params: SensorParams) -> int:
    if not isinstance(cfg.k_policy, FixedK):
        raise ValueError("this runner needs a fixed K; resolve scans with choose_k()")
    k = cfg.k_policy.k
    if not 0 <= k <= params.K:
        raise ValueError(f"configured K={k} outside sensor range [0, {params.K}]")
    return k


def _estimator_params(cfg: ProtocolConfig, params: SensorParams) -> SensorParams:
    """Sensor parameters as assumed by the estimator's likelihood."""
    if cfg.estimator_xi is None:
        return params
    return replace(params, xi0=cfg.estimator_xi[0], xi1=cfg.estimator_xi[1])


def _model_outcome_probability(d: CircularDistribution, mu: int, k: int,
                               theta: float, p: SensorParams) -> float:
    """Predictive probability of the outcome under the current distribution."""
    a = 0.5 * (1.0 + p.xi0 - p.xi1)
    b = 0.5 * (p.xi0 + p.xi1 - 1.0)
    tau_k = (1 << k) * p.tau0
    damp = math.exp(-((tau_k / p.t2star) ** 2))
    c = d.coefficient(-(1 << k))
    fringe = 2.0 * math.pi * (math.cos(theta) * c.real - math.sin(theta) * c.imag)
    p0 = a + b * damp * fringe
    return p0 if mu == 0 else 1.0 - p0


def _condition(d: CircularDistribution, mu: int, k: int, theta: float,
               est_params: SensorParams,
               true_params: SensorParams) -> CircularDistribution:
    """Condition on an outcome, surviving a mismatched estimator model.

    With an idealized likelihood, an outcome the current belief deems less
    likely than a plain read-out miss is better explained as that miss, so
    it is conditioned with the true read-out model (whose miss floor keeps
    the mass where the belief was); routine outcomes keep the idealized
    update. With matched models this reduces to a single ordinary update.
    A residual numerically-degenerate update (orthogonal likelihood against
    a pruned table) is dropped as uninformative.
    """
    from .circular import DegenerateLikelihoodError
    if est_params is not true_params:
        miss = 1.0 - (true_params.xi1 if mu == 0 else true_params.xi0)
        if miss > 0.0:
            plausibility = _model_outcome_probability(d, mu, k, theta, est_params)
            if plausibility < 0.5 * miss:
                try:
                    return d.bayes_update(mu, k, theta, true_params)
                except DegenerateLikelihoodError:
                    return d
    try:
        return d.bayes_update(mu, k, theta, est_params)
    except DegenerateLikelihoodError:
        if est_params is not true_params:
            try:
                return d.bayes_update(mu, k, theta, true_params)
            except DegenerateLikelihoodError:
                pass
        return d


def _spawn(seed, *key: int) -> np.random.SeedSequence:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.SeedSequence(entropy=ss.entropy,
                                  spawn_key=ss.spawn_key + tuple(key))


def _outcome_rng(ss: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(ss))


class _Rows:
    """Columnar accumulator for TrajectoryRecord rows."""

    __slots__ = ("t", "f_true", "f_hat", "k", "mu", "theta", "fom")

    def __init__(self):
        self.t, self.f_true, self.f_hat = [], [], []
        self.k, self.mu, self.theta, self.fom = [], [], [], []

    def emit(self, t, f_true, f_hat, k, mu, theta, fom):
        self.t.append(t)
        self.f_true.append(f_true)
        self.f_hat.append(f_hat)
        self.k.append(k)
        self.mu.append(mu)
        self.theta.append(theta)
        self.fom.append(fom)

    def record(self, t_end, n_ramsey, skip, path) -> TrajectoryRecord:
        tt, ff = path.breakpoints()
        return TrajectoryRecord(
            times=np.asarray(self.t), f_true=np.asarray(self.f_true),
            f_hat=np.asarray(self.f_hat), k_used=np.asarray(self.k, dtype=np.int64),
            mu=np.asarray(self.mu, dtype=np.int64), theta=np.asarray(self.theta),
            fom=np.asarray(self.fom), t_end=t_end, n_ramsey=n_ramsey, skip=skip,
            truth_times=tt.copy(), truth_values=ff.copy())


def _estimate_or_fallback(d: CircularDistribution, tau0: float,
                          previous: float) -> tuple[float, float]:
    """(f_hat, fom); falls back to the previous estimate and an infinite
    uncertainty while the first harmonic is still unpopulated."""
    if abs(d.coefficient(1)) == 0.0:
        return previous, math.inf
    return d.estimate_frequency(tau0), d.holevo_std(tau0)


def _readout_phase(d: CircularDistribution, k: int) -> float:
    """Adaptive read-out phase for a measurement at sensing index k.

    Uses the pivot coefficient one scale above the measurement,
    theta = (1/2)*arg(c_{2^(k+1)}), which aligns the fringe crest with the
    current belief at the measured scale. The measurement at k builds order
    2^k from orders 0 and 2^(k+1), so this pivot is the informative one; for
    a peaked distribution it reduces to crest-at-the-mean. Zero when the
    pivot is still unpopulated (flat prior).
    """
    c = d.coefficient(1 << (k + 1))
    if c == 0:
        return 0.0
    return 0.5 * math.atan2(c.imag, c.real)


def run_non_tracking(model: SignalModel, params: SensorParams, cfg: ProtocolConfig,
                     seed, mode: str = "auto") -> TrajectoryRecord:
    """Repeat reset-based estimation sequences back-to-back for cfg.duration.

    Each sequence restarts from the flat prior, runs k = K..0 with M_k
    repetitions, picks the read-out phase adaptively from the current
    distribution plus the configured outcome-dependent increment, and emits
    one estimate at the sequence end. Estimates are zero-order-held between
    sequence ends.
    """
    K = _resolve_fixed_k(cfg, params)
    est_params = _estimator_params(cfg, params)
    _, _, t_total = sequence_budget(K, cfg, params)
    if cfg.duration < t_total:
        raise ValueError(f"duration {cfg.duration} shorter than one sequence {t_total}")
    path = make_truth_path(model, _spawn(seed, 0), mode=mode,
                           dt=params.tau0, duration=cfg.duration)
    rng = _outcome_rng(_spawn(seed, 1))
    rows = _Rows()
    t = 0.0
    n_ramsey = 0
    f_prev = 0.0
    while t + t_total <= cfg.duration:
        d = CircularDistribution.uniform(cfg.j_max, cfg.prune_tol)
        last_mu = None
        theta = 0.0
        for k in range(K, -1, -1):
            for _ in range(repetitions(k, K, cfg)):
                theta = _readout_phase(d, k)
                if last_mu is not None:
                    theta += cfg.phase_increments[last_mu]
                mu, t = simulate_ramsey(path, t, k, theta, params, rng)
                d = _condition(d, mu, k, theta, est_params, params)
                last_mu = mu
                n_ramsey += 1
        f_hat, fom = _estimate_or_fallback(d, params.tau0, f_prev)
        f_prev = f_hat
        rows.emit(t, path.value_at(t), f_hat, K, last_mu, theta, fom)
    return rows.record(t, n_ramsey, 0, path)


def run_tracking(model: SignalModel, params: SensorParams, cfg: ProtocolConfig,
                 seed, mode: str = "auto") -> TrajectoryRecord:
    """Adaptive tracking: one persistent distribution, one estimate per Ramsey.

    Loop per Ramsey: diffuse the distribution over the upcoming step
    2^k*tau0 + t_overhead, choose the read-out phase from the pivot
    coefficient, measure, condition on the outcome, emit the estimate, then
    move the sensing index up if the uncertainty beats alpha/(2^k*tau0)
    (capped at K) and down otherwise (floored at 0).

    The first R_K rows are flagged as warm-up so scored errors start roughly
    where a reset-based sequence would have delivered its first estimate.
    """
    K = _resolve_fixed_k(cfg, params)
    est_params = _estimator_params(cfg, params)
    _, r_k, _ = sequence_budget(K, cfg, params)
    path = make_truth_path(model, _spawn(seed, 0), mode=mode,
                           dt=params.tau0, duration=cfg.duration)
    rng = _outcome_rng(_spawn(seed, 1))
    rows = _Rows()
    d = CircularDistribution.uniform(cfg.j_max, cfg.prune_tol)
    k = K
    t = 0.0
    n_ramsey = 0
    f_prev = 0.0
    while True:
        step = params.sensing_time(k) + params.t_overhead
        if t + step > cfg.duration:
            break
        d = d.convolve_wiener(model.kappa, step, params.tau0)
        theta = _readout_phase(d, k)
        mu, t = simulate_ramsey(path, t, k, theta, params, rng)
        d = _condition(d, mu, k, theta, est_params, params)
        f_hat, fom = _estimate_or_fallback(d, params.tau0, f_prev)
        f_prev = f_hat
        rows.emit(t, path.value_at(t), f_hat, k, mu, theta, fom)
        n_ramsey += 1
        if fom < cfg.alpha / params.sensing_time(k):
            k = min(k + 1, K)
        else:
            k = max(k - 1, 0)
    skip = min(r_k, max(len(rows.t) - 2, 0))
    return rows.record(t, n_ramsey, skip, path)


PROTOCOLS = {"non-tracking": run_non_tracking, "tracking": run_tracking}


def diffusion_matched_k(kappa: float, cfg: ProtocolConfig,
                        params: SensorParams) -> int:
    """Sensing-index scale where the sequence error matches the signal drift.

    Solves 2^K*tau0 = 1/([G*(G+F)]^(1/3) * kappa^(2/3)) with unit
    proportionality constant and rounds to the nearest index (floored at 0).
    Used to center pilot scans; the measured optimum usually sits below it.
    """
    if kappa <= 0:
        raise ValueError(f"kappa must be > 0, got {kappa}")
    t_opt = 1.0 / ((cfg.G * (cfg.G + cfg.F)) ** (1.0 / 3.0) * kappa ** (2.0 / 3.0))
    return max(0, round(math.log2(t_opt / params.tau0)))


def choose_k(kappa: float, cfg: ProtocolConfig, params: SensorParams, *,
             protocol: str = "non-tracking", model: SignalModel | None = None,
             pilot_trajectories: int = 16, pilot_cycles: int = 12,
             seed=0, mode: str = "auto", window: int | None = None) -> int:
    """Resolve the top sensing index K for the given fluctuation level.

    FixedK returns its argument. ScanK runs small pilot ensembles at every
    candidate K in its range and returns the K with the lowest mean waveform
    error (ties to the smaller K). Pilot durations scale with each
    candidate's own sequence time so every candidate gets a comparable number
    of estimation cycles. With `window` set, the candidates are narrowed to
    at most that many indices centered just below the diffusion-matched
    scale, which seeds the scan without paying for the full range.
    """
    from .sweep import waveform_error  # local import to avoid a cycle

    policy = cfg.k_policy
    if isinstance(policy, FixedK):
        return policy.k
    lo, hi = policy.k_min, policy.k_max
    if window is not None and kappa > 0:
        center = min(max(diffusion_matched_k(kappa, cfg, params), lo), hi)
        lo = max(lo, center - (window - 2))
        hi = min(hi, center + 1)
    if model is None:
        f_range = 0.5 / params.tau0
        model = SignalModel(kappa=kappa, clamp=min(24e6, f_range), f_range=f_range)
    else:
        model = replace(model, kappa=kappa)
    run = PROTOCOLS[protocol]
    best_k, best_eps = lo, math.inf
    for k_cand in range(lo, hi + 1):
        params_k = replace(params, K=max(params.K, k_cand))
        _, _, t_total = sequence_budget(k_cand, cfg, params_k)
        cfg_k = replace(cfg, k_policy=FixedK(k_cand),
                        duration=max(pilot_cycles, 2) * t_total)
        errs = []
        for i in range(pilot_trajectories):
            rec = run(model, params_k, cfg_k, _spawn(seed, 101, k_cand, i), mode)
            errs.append(waveform_error(rec))
        eps = float(np.mean(errs))
        if eps < best_eps:
            best_k, best_eps = k_cand, eps
    return best_k
