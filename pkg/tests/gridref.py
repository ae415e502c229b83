"""Dense-grid reference implementation used as an independent oracle.

Maintains the density on a uniform phase grid over [-pi, pi). Bayes updates
are pointwise likelihood multiplications with Riemann renormalization (exact
for band-limited densities on a uniform grid); diffusion damps the discrete
spectrum with the exact per-order Gaussian factors. Nothing here shares code
with the coefficient representation under test.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi


class GridDensity:
    def __init__(self, n: int = 1 << 14):
        self.n = n
        self.phi = -math.pi + TWO_PI * np.arange(n) / n
        self.p = np.full(n, 1.0 / TWO_PI)

    def likelihood(self, mu: int, k: int, theta: float, params) -> np.ndarray:
        a = 0.5 * (1.0 + params.xi0 - params.xi1)
        b = 0.5 * (params.xi0 + params.xi1 - 1.0)
        tau = (1 << k) * params.tau0
        damp = math.exp(-((tau / params.t2star) ** 2))
        p0 = a + b * damp * np.cos((1 << k) * self.phi + theta)
        return p0 if mu == 0 else 1.0 - p0

    def outcome_probability(self, mu: int, k: int, theta: float, params) -> float:
        """Predictive probability of outcome mu under the current density."""
        return float(np.mean(self.likelihood(mu, k, theta, params) * self.p) * TWO_PI)

    def bayes(self, mu: int, k: int, theta: float, params) -> None:
        self.p = self.p * self.likelihood(mu, k, theta, params)
        self.p /= np.mean(self.p) * TWO_PI

    def convolve(self, kappa: float, dt: float, tau0: float) -> None:
        spec = np.fft.rfft(self.p)
        j = np.arange(len(spec))
        spec *= np.exp(-2.0 * (math.pi * kappa * tau0) ** 2 * dt * j * j)
        self.p = np.fft.irfft(spec, self.n)

    def estimate_frequency(self, tau0: float) -> float:
        """Circular-mean estimate straight off the grid."""
        z = np.mean(self.p * np.exp(1j * self.phi))
        return math.atan2(z.imag, z.real) / (TWO_PI * tau0)

    def argmax_frequency(self, tau0: float) -> float:
        return self.phi[int(np.argmax(self.p))] / (TWO_PI * tau0)
