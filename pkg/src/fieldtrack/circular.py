"""Bayesian probability distribution of a periodic frequency, as Fourier coefficients.

The frequency of interest lives on one unambiguous band [-1/(2*tau0), +1/(2*tau0))
and is mapped onto the phase variable phi = 2*pi*f*tau0 in [-pi, pi). The density

    P(phi) = sum_j c_j exp(i*j*phi)

is represented by its coefficients for j >= 0 only; negative orders follow from
c_{-j} = conj(c_j) because P is real. Normalization pins c_0 = 1/(2*pi).

All operations return new instances; a distribution is never mutated in place,
so a single trajectory can thread one through its update loop and tests can
hold on to intermediate states.
"""

from __future__ import annotations

import json
import math

import numpy as np

TWO_PI = 2.0 * math.pi
UNIFORM_C0 = 1.0 / TWO_PI

DEFAULT_J_MAX = 65536
DEFAULT_PRUNE_TOL = 1e-12

# Pre-renormalization mass below this signals an outcome that is essentially
# impossible under the current distribution and fidelities.
_DEGENERATE_MASS = 1e-15


class DegenerateLikelihoodError(RuntimeError):
    """Bayes update left (almost) no probability mass to renormalize."""


class CoefficientCapError(RuntimeError):
    """An update would push the truncation order beyond the hard cap."""


class UndefinedEstimateError(RuntimeError):
    """The first-harmonic coefficient vanishes, so no point estimate exists."""


class CircularDistribution:
    """Truncated Fourier representation of a density on the phase circle."""

    __slots__ = ("_h", "j_max", "prune_tol")

    def __init__(self, half_coeffs: np.ndarray, j_max: int, prune_tol: float):
        # Internal constructor: half_coeffs[j] = c_j for j = 0..J, already
        # normalized and pruned. Use uniform() or from_coefficients() instead.
        self._h = half_coeffs
        self.j_max = j_max
        self.prune_tol = prune_tol

    # ------------------------------------------------------------------ setup

    @classmethod
    def uniform(cls, j_max: int = DEFAULT_J_MAX,
                prune_tol: float = DEFAULT_PRUNE_TOL) -> "CircularDistribution":
        """Flat prior P(phi) = 1/(2*pi): c_0 alone is nonzero."""
        if j_max < 1:
            raise ValueError(f"j_max must be >= 1, got {j_max}")
        if prune_tol < 0:
            raise ValueError(f"prune_tol must be >= 0, got {prune_tol}")
        h = np.array([UNIFORM_C0 + 0j])
        return cls(h, j_max, prune_tol)

    @classmethod
    def from_coefficients(cls, entries, j_max: int = DEFAULT_J_MAX,
                          prune_tol: float = DEFAULT_PRUNE_TOL) -> "CircularDistribution":
        """Build from (j, c_j) pairs; negative j must conjugate-match positive j.

        The result is renormalized so c_0 = 1/(2*pi). Pairs with j >= 0 define
        the distribution; pairs with j < 0 are consistency-checked only.
        """
        pos: dict[int, complex] = {}
        neg: dict[int, complex] = {}
        for j, c in entries:
            j = int(j)
            c = complex(c)
            (pos if j >= 0 else neg)[abs(j)] = c
        for j, c in neg.items():
            if j in pos and abs(c - pos[j].conjugate()) > 1e-12 * max(1.0, abs(c)):
                raise ValueError(f"coefficients at +/-{j} are not conjugate-symmetric")
            pos.setdefault(j, c.conjugate())
        order = max(pos) if pos else 0
        if order > j_max:
            raise CoefficientCapError(f"order {order} exceeds cap {order}>{j_max}")
        h = np.zeros(order + 1, dtype=np.complex128)
        for j, c in pos.items():
            h[j] = c
        c0 = h[0].real
        if c0 <= 0:
            raise ValueError("c_0 must be positive to normalize a density")
        h /= TWO_PI * c0
        h[0] = UNIFORM_C0
        return cls(_prune(h, prune_tol), j_max, prune_tol)

    # ------------------------------------------------------------ inspection

    @property
    def truncation_order(self) -> int:
        """Current highest retained order J."""
        return len(self._h) - 1

    def coefficient(self, j: int) -> complex:
        """c_j for any integer j; zero beyond the truncation order."""
        if abs(j) >= len(self._h):
            return 0j
        c = self._h[abs(j)]
        return complex(c) if j >= 0 else complex(c).conjugate()

    def coefficients(self) -> np.ndarray:
        """Read-only view of c_0..c_J."""
        v = self._h.view()
        v.flags.writeable = False
        return v

    def evaluate_pdf(self, phi: float) -> float:
        """P(phi) = c_0 + 2*Re(sum_{j>=1} c_j exp(i*j*phi)); exactly real here."""
        if not math.isfinite(phi):
            raise ValueError("phi must be finite")
        h = self._h
        if len(h) == 1:
            return float(h[0].real)
        j = np.arange(1, len(h))
        return float(h[0].real + 2.0 * np.real(h[1:] @ np.exp(1j * phi * j)))

    def pdf_grid(self, n: int) -> np.ndarray:
        """P sampled at the n uniform points phi_i = -pi + 2*pi*i/n.

        Exact (spectral) evaluation via an inverse real FFT; requires an even
        n > 2*J so no retained order aliases.
        """
        if n % 2 or n <= 2 * self.truncation_order:
            raise ValueError("n must be even and exceed twice the truncation order")
        p = np.fft.irfft(self._h, n) * n
        return np.roll(p, -(n // 2))

    # ------------------------------------------------------------- updates

    def bayes_update(self, mu: int, k: int, theta: float,
                     params) -> "CircularDistribution":
        """Condition on a Ramsey outcome mu taken with sensing index k and phase theta.

        The outcome likelihood A_mu + s*B*exp(-(tau_k/T2*)^2)*cos(2^k*phi + theta),
        with A = (1+xi0-xi1)/2, B = (xi0+xi1-1)/2, s = (-1)^mu, A_0 = A and
        A_1 = 1-A, multiplies the density, which shifts coefficients by +/-2^k:

            c'_j = A_mu c_j + s*(B/2)*e^{-(tau_k/T2*)^2} (e^{i theta} c_{j-2^k}
                                                          + e^{-i theta} c_{j+2^k})

        followed by renormalization and tail pruning. For xi0 = xi1 = 1 this is
        the ideal-readout coefficient update.
        """
        if mu not in (0, 1):
            raise ValueError(f"mu must be 0 or 1, got {mu}")
        if not 0 <= k <= params.K:
            raise ValueError(f"sensing index k={k} outside [0, {params.K}]")
        m = 1 << k
        tau_k = m * params.tau0
        a = 0.5 * (1.0 + params.xi0 - params.xi1)
        b = 0.5 * (params.xi0 + params.xi1 - 1.0)
        damp = math.exp(-((tau_k / params.t2star) ** 2))
        a_mu = a if mu == 0 else 1.0 - a
        q = 0.5 * b * damp * (1.0 if mu == 0 else -1.0)
        w = q * complex(math.cos(theta), math.sin(theta))

        h = self._h
        n = len(h)
        out = np.zeros(n + m, dtype=np.complex128)
        out[:n] = h
        out[:n] *= a_mu
        # e^{i theta} c_{j-m}: h[j-m] for j >= m, conj(h[m-j]) for j < m.
        out[m:m + n] += w * h
        lo = max(0, m - (n - 1))
        if lo < m:
            out[lo:m] += w * np.conj(h[m - lo:0:-1])
        # e^{-i theta} c_{j+m}: defined while j + m <= J.
        if n > m:
            out[:n - m] += w.conjugate() * h[m:]

        mass = out[0].real
        if mass <= _DEGENERATE_MASS:
            raise DegenerateLikelihoodError(
                f"posterior mass {mass:.3e} after outcome mu={mu}")
        out *= 1.0 / (TWO_PI * mass)
        out[0] = UNIFORM_C0
        out = _prune(out, self.prune_tol)
        if len(out) - 1 > self.j_max:
            raise CoefficientCapError(
                f"truncation order {len(out) - 1} exceeds cap {self.j_max}")
        return CircularDistribution(out, self.j_max, self.prune_tol)

    def convolve_wiener(self, kappa: float, dt: float,
                        tau0: float) -> "CircularDistribution":
        """Diffuse the density by a Wiener step of duration dt.

        A frequency drift with variance kappa^2*dt convolves the phase density
        with a wrapped Gaussian, damping each order as

            c_j <- c_j * exp(-2*(pi*j*kappa*tau0)^2 * dt).

        c_0 is untouched, so normalization is preserved exactly.
        """
        if kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {kappa}")
        if dt < 0:
            raise ValueError(f"dt must be >= 0, got {dt}")
        if kappa == 0.0 or dt == 0.0 or len(self._h) == 1:
            return self
        rate = 2.0 * (math.pi * kappa * tau0) ** 2 * dt
        out = self._h * _damping(rate, len(self._h))
        return CircularDistribution(_prune(out, self.prune_tol),
                                    self.j_max, self.prune_tol)

    def shift_phase(self, dphi: float) -> "CircularDistribution":
        """Rigidly translate the density: result(phi) = P(phi - dphi)."""
        j = np.arange(len(self._h))
        out = self._h * np.exp(-1j * dphi * j)
        out[0] = UNIFORM_C0
        return CircularDistribution(out, self.j_max, self.prune_tol)

    # ----------------------------------------------------------- estimators

    def estimate_frequency(self, tau0: float) -> float:
        """Point estimate arg(c_{-1}) / (2*pi*tau0), wrapped into [-1/(2*tau0), 1/(2*tau0))."""
        c1 = self._first_harmonic()
        if c1 == 0:
            raise UndefinedEstimateError("flat or symmetric distribution: |c_1| = 0")
        f = -math.atan2(c1.imag, c1.real) / (TWO_PI * tau0)
        half = 0.5 / tau0
        if f >= half:
            f -= 2.0 * half
        return f

    def holevo_std(self, tau0: float) -> float:
        """Circular-dispersion frequency uncertainty sqrt((2*pi*|c_1|)^-2 - 1) / (2*pi*tau0)."""
        c1 = self._first_harmonic()
        r = TWO_PI * abs(c1)
        if r == 0:
            raise UndefinedEstimateError("flat or symmetric distribution: |c_1| = 0")
        return math.sqrt(max(r ** -2 - 1.0, 0.0)) / (TWO_PI * tau0)

    def control_phase(self, k: int) -> float:
        """Read-out phase (1/2)*arg(c_{-2^k}) for the next sensing index k.

        Falls back to 0 when that coefficient vanishes (e.g. a flat prior),
        where any constant phase is equally uninformative.
        """
        if k < 0:
            raise ValueError(f"sensing index k={k} must be >= 0")
        m = 1 << k
        if m >= len(self._h):
            return 0.0
        c = self._h[m].conjugate()
        if c == 0:
            return 0.0
        return 0.5 * math.atan2(c.imag, c.real)

    def _first_harmonic(self) -> complex:
        h = self._h
        return complex(h[1]) if len(h) > 1 else 0j

    # ------------------------------------------------------------------- io

    def to_debug_json(self) -> str:
        """JSON array of [j, re, im] triples over the full range -J..J."""
        rows = []
        for j in range(-self.truncation_order, self.truncation_order + 1):
            c = self.coefficient(j)
            rows.append([j, c.real, c.imag])
        return json.dumps(rows)

    @classmethod
    def from_debug_json(cls, text: str, j_max: int = DEFAULT_J_MAX,
                        prune_tol: float = DEFAULT_PRUNE_TOL) -> "CircularDistribution":
        rows = json.loads(text)
        return cls.from_coefficients(
            ((int(j), complex(re, im)) for j, re, im in rows), j_max, prune_tol)

    def __repr__(self) -> str:
        return (f"CircularDistribution(J={self.truncation_order}, "
                f"|c_1|={abs(self._first_harmonic()):.4g})")


def _prune(h: np.ndarray, tol: float) -> np.ndarray:
    """Drop trailing coefficients with |c_j| < tol; c_0 is always kept.

    Scans backwards in blocks: the droppable run is normally short, so this
    avoids touching the whole table on every update.
    """
    if tol <= 0:
        return h
    tol2 = tol * tol
    i = len(h)
    while i > 1:
        j = max(1, i - 64)
        block = h[j:i]
        mag2 = block.real ** 2 + block.imag ** 2
        keep = np.flatnonzero(mag2 >= tol2)
        if len(keep):
            i = j + int(keep[-1]) + 1
            break
        i = j
    return h[:i] if i < len(h) else h


_DAMPING_CACHE: dict[float, np.ndarray] = {}


def _damping(rate: float, n: int) -> np.ndarray:
    """exp(-rate*j^2) for j = 0..n-1, cached per rate.

    A protocol run reuses only a handful of distinct rates (one per sensing
    index), so caching removes the exp() from the per-measurement path.
    """
    cached = _DAMPING_CACHE.get(rate)
    if cached is None or len(cached) < n:
        size = max(256, 1 << (n - 1).bit_length())
        j = np.arange(size)
        cached = np.exp(-rate * (j * j))
        if len(_DAMPING_CACHE) > 64:
            _DAMPING_CACHE.clear()
        _DAMPING_CACHE[rate] = cached
    return cached[:n]
