"""Convolution ladders for the normalization function Z_n(f, sqrt(u)).

The n-fold density of the summed squared velocities, h^{(*n)}, determines
Z_n through

    Z_n(f, sqrt(u)) = 2 h^{(*n)}(u) / (u^{(n-2)/2} |S^{n-1}|),

so the ladder stores discrete cell masses of h on a uniform u-grid and
builds higher levels by FFT convolution (exact for the discretized
measure).  Everything Z-shaped is exposed in the log domain; the huge
power/area prefactors are combined with log-gamma arithmetic and cancel
analytically inside ratio queries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .densities import GridDensity1D, moment
from .errors import ConfigurationError
from .sphere import log_sphere_area

LOG_FLOOR = np.log(1e-300)


def sigma_squared(f: GridDensity1D) -> float:
    """Variance of V^2 under f with unit energy: int v^4 f - 1."""
    return moment(f, 4) - 1.0


def default_u_max(n_max: int, sig2: float) -> float:
    return n_max + 10.0 * np.sqrt(max(n_max * sig2, 1.0))


class NormalizationLadder:
    """Log-domain tables of h^{(*n)} for a single generator density."""

    def __init__(self, f: GridDensity1D, n_max: int, u_max: float | None = None,
                 n_grid: int = 2**15):
        if n_max < 2:
            raise ValueError("n_max must be >= 2")
        self.generator = f
        self.sigma2 = sigma_squared(f)
        if u_max is None:
            u_max = default_u_max(n_max, self.sigma2)
        self.n_max = n_max
        self.u_max = float(u_max)
        self.n_grid = int(n_grid)
        self.du = self.u_max / self.n_grid
        self.grid = self.du * np.arange(self.n_grid)
        self._masses: dict[int, np.ndarray] = {1: self._base_masses()}
        self._log_density: dict[int, np.ndarray] = {}
        # leakage of the single-particle energy density past the grid
        if 1.0 - float(np.sum(self._masses[1])) > 1e-4:
            raise ConfigurationError(
                f"u_max={u_max:.3g} truncates the energy density "
                f"(mass {np.sum(self._masses[1]):.6f})"
            )

    # -- construction ---------------------------------------------------

    def _base_masses(self) -> np.ndarray:
        """Cell masses of h around each node, via the CDF of the generator."""
        edges = np.concatenate([[0.0], self.du * (np.arange(self.n_grid) + 0.5)])
        r = np.sqrt(edges)
        cum = np.asarray(self.generator.cumulative(r)
                         - self.generator.cumulative(-r), dtype=float)
        w = np.diff(cum)
        return np.maximum(w, 0.0)

    def _convolve(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.maximum(fftconvolve(a, b)[: self.n_grid], 0.0)

    def level(self, n: int) -> np.ndarray:
        """Cell-mass array of h^{(*n)}; built by binary decomposition."""
        if n < 1:
            raise ValueError("level must be >= 1")
        cached = self._masses.get(n)
        if cached is not None:
            return cached
        if n % 2 == 0:
            half = self.level(n // 2)
            out = self._convolve(half, half)
        else:
            out = self._convolve(self.level(n - 1), self._masses[1])
        self._masses[n] = out
        return out

    def build_all(self, n_top: int | None = None) -> None:
        """Sequentially materialize every level up to n_top."""
        n_top = self.n_max if n_top is None else n_top
        prev = self.level(1)
        for n in range(2, n_top + 1):
            if n not in self._masses:
                self._masses[n] = self._convolve(prev, self._masses[1])
            prev = self._masses[n]

    # -- queries --------------------------------------------------------

    def mass(self, n: int) -> float:
        return float(np.sum(self.level(n)))

    def mean(self, n: int) -> float:
        w = self.level(n)
        return float(np.sum(self.grid * w) / np.sum(w))

    def log_density_table(self, n: int) -> np.ndarray:
        """log h^{(*n)} at the grid nodes (clipped at the density floor)."""
        tab = self._log_density.get(n)
        if tab is None:
            dens = self.level(n) / self.du
            tab = np.log(np.maximum(dens, 1e-300))
            self._log_density[n] = tab
        return tab

    def log_density(self, n: int, u) -> np.ndarray:
        """Log-linear interpolation of log h^{(*n)} between u-nodes."""
        u = np.asarray(u, dtype=float)
        if np.any(u < 0) or np.any(u > self.u_max):
            raise ValueError("u outside the ladder grid")
        return np.interp(u, self.grid, self.log_density_table(n))

    def log_z(self, n: int, u) -> np.ndarray:
        """log Z_n(f, sqrt(u))."""
        if not 2 <= n <= max(self.n_max, max(self._masses)):
            raise ValueError(f"level n={n} outside ladder range")
        u = np.asarray(u, dtype=float)
        out = (np.log(2.0) + self.log_density(n, u)
               - 0.5 * (n - 2) * np.log(np.maximum(u, 1e-300))
               - log_sphere_area(n))
        return float(out) if out.ndim == 0 else out

    def log_z_ratio(self, n_num: int, u_num, n_den: int, u_den) -> np.ndarray:
        """log [Z_{n_num}(f, sqrt(u_num)) / Z_{n_den}(f, sqrt(u_den))].

        The area and power prefactors are combined in log space before any
        exponentiation, so the ratio is usable at any n.
        """
        u_num = np.asarray(u_num, dtype=float)
        u_den = np.asarray(u_den, dtype=float)
        return (
            self.log_density(n_num, u_num) - self.log_density(n_den, u_den)
            - 0.5 * (n_num - 2) * np.log(np.maximum(u_num, 1e-300))
            + 0.5 * (n_den - 2) * np.log(np.maximum(u_den, 1e-300))
            - log_sphere_area(n_num) + log_sphere_area(n_den)
        )

    def export_csv(self, path, levels) -> None:
        with open(path, "w") as fh:
            fh.write("n,u,log_hconv\n")
            for n in levels:
                tab = self.log_density_table(n)
                for u, lv in zip(self.grid, tab):
                    fh.write(f"{n},{u!r},{lv!r}\n")


def build_ladder(f: GridDensity1D, n_max: int, u_max: float | None = None,
                 n_grid: int = 2**15) -> NormalizationLadder:
    return NormalizationLadder(f, n_max, u_max=u_max, n_grid=n_grid)


# -- local-CLT approximation and error envelopes ------------------------


@dataclass
class CltEnvelope:
    """Per-level suprema of the local-CLT remainder lambda_n."""

    sigma2: float
    lambda_sup: dict[int, float] = field(default_factory=dict)

    def rows(self):
        return [(n, self.sigma2, s) for n, s in sorted(self.lambda_sup.items())]


def clt_leading_log(f_or_sigma2, n: int, u) -> np.ndarray:
    """log of the Gaussian leading term of Z_n(f, sqrt(u))."""
    sig2 = (sigma_squared(f_or_sigma2)
            if isinstance(f_or_sigma2, GridDensity1D) else float(f_or_sigma2))
    if sig2 <= 0:
        raise ValueError("sigma^2 must be positive")
    u = np.asarray(u, dtype=float)
    var = n * sig2
    out = (np.log(2.0) - 0.5 * np.log(n * sig2) - log_sphere_area(n)
           - 0.5 * (n - 2) * np.log(np.maximum(u, 1e-300))
           - (u - n) ** 2 / (2.0 * var) - 0.5 * np.log(2.0 * np.pi))
    return float(out) if out.ndim == 0 else out


def lambda_profile(ladder: NormalizationLadder, n: int) -> tuple[np.ndarray, np.ndarray]:
    """The remainder lambda_n(u) on the grid, restricted to u in [0, n].

    Extracted literally from the concentration display:
    lambda_n(u) = sqrt(n Sigma^2) h^{(*n)}(u) - exp(-(u-n)^2/(2 n Sigma^2))/sqrt(2 pi).
    """
    sig2 = ladder.sigma2
    mask = ladder.grid <= n
    u = ladder.grid[mask]
    dens = ladder.level(n)[mask] / ladder.du
    scale = np.sqrt(n * sig2)
    gauss = np.exp(-((u - n) ** 2) / (2.0 * n * sig2)) / np.sqrt(2.0 * np.pi)
    return u, scale * dens - gauss


def clt_envelope(ladder: NormalizationLadder, n_list) -> CltEnvelope:
    env = CltEnvelope(sigma2=ladder.sigma2)
    for n in n_list:
        _, lam = lambda_profile(ladder, n)
        env.lambda_sup[n] = float(np.max(np.abs(lam)))
    return env


def schedule_delta(beta: float, n: int) -> float:
    """The vanishing hot-component weight delta_N = N^{2 beta - 1}."""
    return float(n) ** (2.0 * beta - 1.0)


def clt_envelope_ndependent(beta: float, n_list, j: int,
                            n_grid: int = 2**15) -> list[tuple[int, float, float]]:
    """(N, Sigma^2_{delta_N}, sup|lambda_j(N-j, .)|) along the schedule.

    Valid for 0 < beta < 1/6, where delta_N = N^{2 beta - 1} satisfies both
    growth conditions of the N-dependent concentration theorem.
    """
    from .densities import mixture

    if not 0.0 < beta < 1.0 / 6.0:
        raise ValueError("beta must lie in (0, 1/6)")
    if j not in (0, 1, 2):
        raise ValueError("j must be 0, 1 or 2")
    rows = []
    for n in n_list:
        f = mixture(schedule_delta(beta, n))
        ladder = NormalizationLadder(f, n - j, n_grid=n_grid)
        _, lam = lambda_profile(ladder, n - j)
        rows.append((n, ladder.sigma2, float(np.max(np.abs(lam)))))
    return rows
