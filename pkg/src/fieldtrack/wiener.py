"""Ground-truth frequency trajectories: a clamped Wiener process.

The sensed frequency performs a random walk, f(t+dt) = f(t) + kappa*dW(t),
clamped into [-clamp, +clamp] at every generation step so it stays inside the
unambiguous band. Two path representations cover the two simulation regimes:

* GridTruthPath -- samples on a fixed dt lattice with an O(1) window
  integral, for runs whose total length fits in memory at the native
  resolution.
* EventTruthPath -- breakpoints only where the protocol looks: fine steps
  inside sensing windows, one statistically exact Gaussian step across each
  overhead gap. Makes second-long, large-overhead sweeps tractable.

Randomness is counter-based: every generation event draws from its own Philox
substream keyed by (path seed, event index). A path is therefore a pure
function of its seed and the sequence of windows it generated; read-only
queries can never perturb it. Grid chunks sit at fixed cell offsets, so the
lattice realization does not even depend on how requests were batched.
"""

from __future__ import annotations

import csv
import math

import numpy as np
from dataclasses import dataclass

_COUNTER_SHIFT = 192  # event index occupies the top uint64 of the Philox counter
_GRID_CHUNK = 1 << 16


@dataclass(frozen=True)
class SignalModel:
    """Wiener-process parameters for the true frequency.

    kappa is the fluctuation level in Hz^{3/2} (increment std over dt is
    kappa*sqrt(dt)); clamp bounds the walk; f_range is the representable
    half-range 1/(2*tau0) of the sensor; f0 is the start value in Hz or the
    string "random-uniform" for a uniform draw on [-clamp, clamp]; seed is
    used when a path is built without an explicit seed.
    """

    kappa: float
    clamp: float = 24e6
    f_range: float = 25e6
    f0: float | str = "random-uniform"
    seed: int = 0

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if not 0 < self.clamp <= self.f_range:
            raise ValueError(f"need 0 < clamp <= f_range, got clamp={self.clamp}, "
                             f"f_range={self.f_range}")
        if isinstance(self.f0, str) and self.f0 != "random-uniform":
            raise ValueError(f"unknown f0 policy {self.f0!r}")


class _EventStreams:
    """Philox substream per generation event, derived from one 128-bit key.

    One bit generator is reused by resetting its counter to (event << 192)
    with a drained buffer, which reproduces a freshly constructed
    Philox(counter=event << 192, key=key) stream exactly but without the
    per-event construction cost.
    """

    __slots__ = ("_gen", "_bg", "_state", "_counter")

    def __init__(self, seed_seq: np.random.SeedSequence):
        words = seed_seq.generate_state(2, np.uint64)
        key = int(words[0]) | (int(words[1]) << 64)
        self._bg = np.random.Philox(key=key)
        self._gen = np.random.Generator(self._bg)
        self._state = self._bg.state
        self._counter = self._state["state"]["counter"]

    def generator(self, event: int) -> np.random.Generator:
        self._counter[:] = 0
        self._counter[3] = event
        self._state["buffer_pos"] = 4  # no carried-over buffered words
        self._state["has_uint32"] = 0
        self._state["uinteger"] = 0
        self._bg.state = self._state
        return self._gen


def _as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _initial_value(model: SignalModel, streams: _EventStreams) -> float:
    if isinstance(model.f0, str):
        # event 0 is reserved for the starting draw
        return float(streams.generator(0).uniform(-model.clamp, model.clamp))
    f0 = float(model.f0)
    if abs(f0) > model.clamp:
        raise ValueError(f"f0={f0} outside clamp band +/-{model.clamp}")
    return f0


def _walk(f_start: float, sigmas, gauss: np.ndarray, clamp: float) -> np.ndarray:
    """Random-walk values after each step, clipped into the clamp band stepwise.

    The unclamped cumulative walk is the common case and is kept as-is when it
    never leaves the band; otherwise the walk is redone stepwise with clipping.
    """
    inc = sigmas * gauss
    vals = inc.cumsum()
    vals += f_start
    if len(vals) == 0 or (vals.max() <= clamp and vals.min() >= -clamp):
        return vals
    f = f_start
    for i in range(len(vals)):
        f += inc[i]
        if f > clamp:
            f = clamp
        elif f < -clamp:
            f = -clamp
        vals[i] = f
    return vals


class EventTruthPath:
    """Breakpoint path: piecewise-constant f with points only where requested."""

    mode = "event"

    def __init__(self, model: SignalModel, seed=None):
        self.model = model
        ss = _as_seed_sequence(model.seed if seed is None else seed)
        self._streams = _EventStreams(ss)
        self._events = 1
        self._t = np.zeros(1024)
        self._f = np.zeros(1024)
        self._n = 1
        self._f[0] = _initial_value(model, self._streams)

    @property
    def end_time(self) -> float:
        return float(self._t[self._n - 1])

    def breakpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self._t[:self._n], self._f[:self._n]

    def advance(self, to_t: float, substep: float) -> None:
        """Extend the path to to_t with Gaussian steps of at most `substep`."""
        if substep <= 0:
            raise ValueError(f"substep must be > 0, got {substep}")
        end = self.end_time
        if to_t < end:
            raise ValueError(f"cannot advance backwards: {to_t} < {end}")
        gap = to_t - end
        if gap == 0.0:
            return
        steps = max(1, int(math.ceil(gap / substep - 1e-9)))
        if steps == 1:
            times = np.array([to_t])
            sigmas = math.sqrt(gap)
        else:
            times = end + substep * np.arange(1, steps + 1)
            times[-1] = to_t
            last_dt = times[-1] - times[-2]
            if last_dt == substep:
                sigmas = math.sqrt(substep)
            else:
                dts = np.full(steps, substep)
                dts[-1] = last_dt
                sigmas = np.sqrt(dts)
        model = self.model
        if model.kappa > 0.0:
            gauss = self._streams.generator(self._events).standard_normal(steps)
            vals = _walk(self._f[self._n - 1], model.kappa * sigmas,
                         gauss, model.clamp)
        else:
            vals = np.full(steps, self._f[self._n - 1])
        self._events += 1
        self._append(times, vals)

    def _append(self, times: np.ndarray, vals: np.ndarray) -> None:
        need = self._n + len(times)
        if need > len(self._t):
            cap = len(self._t)
            while cap < need:
                cap *= 2
            t_new = np.empty(cap)
            f_new = np.empty(cap)
            t_new[:self._n] = self._t[:self._n]
            f_new[:self._n] = self._f[:self._n]
            self._t, self._f = t_new, f_new
        self._t[self._n:need] = times
        self._f[self._n:need] = vals
        self._n = need

    def value_at(self, t: float) -> float:
        """Piecewise-constant value, from the breakpoint at or left of t."""
        if t < self._t[0] or t > self.end_time:
            raise ValueError(f"t={t} outside generated range")
        i = int(np.searchsorted(self._t[:self._n], t, side="right")) - 1
        return float(self._f[i])

    def accumulated_phase(self, t0: float, tau: float) -> float:
        """2*pi times the integral of f over [t0, t0+tau] on the stored steps."""
        t1 = t0 + tau
        if t0 < self._t[0] or t1 > self.end_time:
            raise ValueError(f"window [{t0}, {t1}] not covered by path")
        t = self._t[:self._n]
        f = self._f[:self._n]
        i0 = int(np.searchsorted(t, t0, side="right")) - 1
        i1 = int(np.searchsorted(t, t1, side="left")) - 1
        if i1 < i0:
            i1 = i0
        if i0 == i1:
            integral = (t1 - t0) * f[i0]
        else:
            integral = (t[i0 + 1] - t0) * f[i0] + (t1 - t[i1]) * f[i1]
            if i1 > i0 + 1:
                integral += float(np.dot(f[i0 + 1:i1], np.diff(t[i0 + 1:i1 + 1])))
        return 2.0 * math.pi * integral


class GridTruthPath:
    """Lattice path: f sampled every dt, with a prefix integral for O(1) windows.

    Generation always proceeds in full fixed-size chunks aligned to cell
    offsets, each from its own substream, so the realization is independent of
    how advance() calls were batched.
    """

    mode = "grid"

    def __init__(self, model: SignalModel, seed=None, dt: float = 20e-9):
        if dt <= 0:
            raise ValueError(f"dt must be > 0, got {dt}")
        self.model = model
        self.dt = dt
        ss = _as_seed_sequence(model.seed if seed is None else seed)
        self._streams = _EventStreams(ss)
        self._cells = 0
        self._last_request = 0.0
        self._f = np.zeros(0)
        self._integ = np.zeros(1)  # integral of f from 0 to each cell boundary

    @property
    def end_time(self) -> float:
        return self._cells * self.dt

    def breakpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return np.arange(self._cells) * self.dt, self._f[:self._cells]

    def advance(self, to_t: float, substep: float = 0.0) -> None:
        """Extend the lattice through the cell containing to_t.

        substep is ignored: the lattice spacing is fixed at dt.
        """
        if to_t < self._last_request:
            raise ValueError(f"cannot advance backwards: {to_t} < {self._last_request}")
        self._last_request = to_t
        need = int(math.floor(to_t / self.dt + 1e-9)) + 1
        while self._cells < need:
            self._extend_chunk()

    def _extend_chunk(self) -> None:
        model = self.model
        n = _GRID_CHUNK
        event = self._cells // n + 1
        if self._cells == 0:
            f_prev = _initial_value(model, self._streams)
            first = np.array([f_prev])
            n_draw = n - 1
        else:
            f_prev = self._f[self._cells - 1]
            first = np.zeros(0)
            n_draw = n
        if model.kappa > 0.0:
            gauss = self._streams.generator(event).standard_normal(n_draw)
            vals = _walk(f_prev, model.kappa * math.sqrt(self.dt), gauss, model.clamp)
        else:
            vals = np.full(n_draw, f_prev)
        chunk = np.concatenate([first, vals]) if len(first) else vals
        self._f = np.concatenate([self._f[:self._cells], chunk])
        self._integ = np.concatenate(
            [self._integ[:self._cells + 1],
             self._integ[self._cells] + self.dt * np.cumsum(chunk)])
        self._cells += n

    def _cell(self, t: float) -> int:
        i = int(math.floor(t / self.dt + 1e-9))
        if i == self._cells:
            i -= 1  # right edge of the last generated cell
        if i < 0 or i >= self._cells:
            raise ValueError(f"t={t} outside generated range")
        return i

    def value_at(self, t: float) -> float:
        if t > self.end_time:
            raise ValueError(f"t={t} outside generated range")
        return float(self._f[self._cell(t)])

    def accumulated_phase(self, t0: float, tau: float) -> float:
        t1 = t0 + tau
        if t1 > self.end_time:
            raise ValueError(f"window [{t0}, {t1}] not covered by path")
        i0 = self._cell(t0)
        i1 = self._cell(t1)
        integral = (self._integ[i1] - self._integ[i0]
                    + (t1 - i1 * self.dt) * float(self._f[i1])
                    - (t0 - i0 * self.dt) * float(self._f[i0]))
        return 2.0 * math.pi * integral


def make_truth_path(model: SignalModel, seed=None, mode: str = "event",
                    dt: float = 20e-9, duration: float | None = None):
    """Build a truth path. mode "auto" picks the lattice when the full run fits
    at native resolution (duration/dt <= 2^22 cells) and events otherwise."""
    if mode == "auto":
        if duration is None:
            raise ValueError("mode='auto' needs a duration to decide")
        mode = "grid" if duration / dt <= (1 << 22) else "event"
    if mode == "grid":
        return GridTruthPath(model, seed, dt)
    if mode == "event":
        return EventTruthPath(model, seed)
    raise ValueError(f"unknown path mode {mode!r}")


def export_waveform_csv(path, fileobj) -> None:
    """Dump the stored breakpoints as CSV columns (t_seconds, f_hz)."""
    w = csv.writer(fileobj, lineterminator="\n")
    w.writerow(["t_seconds", "f_hz"])
    t, f = path.breakpoints()
    for ti, fi in zip(t, f):
        w.writerow([repr(float(ti)), repr(float(fi))])
