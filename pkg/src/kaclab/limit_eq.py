"""The Boltzmann-Kac limit equation in one velocity dimension.

The mean-field limit of the pair-collision process is

    d/dt f(v) = 2 integral [ (1 + v^2 + w^2)^gamma
                 ( <f(v(th)) f(w(th))>_th - f(v) f(w) ) ] dw,

where <.>_th is the uniform average over rotation angles.  The gain term
depends on (v, w) only through r = sqrt(v^2 + w^2), so one radial table
A(r) = <f(r cos) f(r sin)>_th serves every grid pair and a full operator
evaluation is two table lookups per (v, w) cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .densities import GridDensity1D, psi
from .errors import AccuracyError, ConfigurationError

_TWO_PI = 2.0 * np.pi


def _angle_average_table(f_vals: np.ndarray, v: np.ndarray, r: np.ndarray,
                         angle_nodes: int) -> np.ndarray:
    """A(r) = mean over angles of f(r cos th) f(r sin th)."""
    spline = CubicSpline(v, np.maximum(f_vals, 0.0))

    def fx(x):
        out = np.zeros_like(x)
        mask = np.abs(x) <= v[-1]
        out[mask] = np.maximum(spline(np.abs(x[mask])), 0.0)
        return out

    th = _TWO_PI * (np.arange(angle_nodes) + 0.5) / angle_nodes
    prod = fx(np.outer(r, np.cos(th))) * fx(np.outer(r, np.sin(th)))
    return prod.mean(axis=1)


def collision_operator(f_vals: np.ndarray, v: np.ndarray, gamma: float,
                       angle_nodes: int = 256) -> np.ndarray:
    """Right-hand side of the limit equation on a symmetric uniform grid.

    Assumes f is even; f_vals are values on v >= 0 half-grid extended by
    symmetry internally.
    """
    dv = v[1] - v[0]
    r_max = np.sqrt(2.0) * v[-1]
    r_grid = np.linspace(0.0, r_max, 4 * len(v))
    a_of_r = _angle_average_table(f_vals, v, r_grid, angle_nodes)
    a_interp = CubicSpline(r_grid, a_of_r)
    w = np.concatenate([-v[:0:-1], v])
    fw = np.concatenate([f_vals[:0:-1], f_vals])
    # trapezoid in w over the symmetric grid
    ww = np.full(w.shape, dv)
    ww[0] = ww[-1] = 0.5 * dv
    vv = v[:, None]
    wwg = w[None, :]
    r = np.sqrt(vv * vv + wwg * wwg)
    gain = np.maximum(a_interp(r), 0.0)
    loss = f_vals[:, None] * fw[None, :]
    rate = (1.0 + vv * vv + wwg * wwg) ** gamma
    return 2.0 * np.sum(rate * (gain - loss) * ww[None, :], axis=1)


@dataclass
class EvolutionRecord:
    """Per-step diagnostics of one PDE run."""

    times: list = field(default_factory=list)
    entropy: list = field(default_factory=list)
    production: list = field(default_factory=list)
    mass_drift: list = field(default_factory=list)
    clipped_mass: list = field(default_factory=list)


class LimitSolver:
    """RK4 integrator for the limit equation on [0, v_max]."""

    def __init__(self, f0: GridDensity1D, gamma: float, v_max: float = 8.0,
                 nodes: int = 257, angle_nodes: int = 256,
                 clip_tolerance: float = 1e-6):
        if not 0.0 <= gamma <= 1.0:
            raise ConfigurationError("gamma must lie in [0, 1]")
        self.gamma = gamma
        self.v = np.linspace(0.0, v_max, nodes)
        self.dv = self.v[1] - self.v[0]
        self.vals = np.maximum(np.asarray(f0(self.v), dtype=float), 0.0)
        self.angle_nodes = angle_nodes
        self.clip_tolerance = clip_tolerance
        self.time = 0.0
        self.record = EvolutionRecord()
        self._last_clipped = 0.0
        self._normalize()

    # full-line trapezoid weights for an even function on the half grid
    def _weights(self) -> np.ndarray:
        w = np.full(self.v.shape, 2.0 * self.dv)
        w[0] = self.dv
        w[-1] = self.dv
        return w

    def mass(self) -> float:
        return float(np.sum(self.vals * self._weights()))

    def energy(self) -> float:
        return float(np.sum(self.v**2 * self.vals * self._weights()))

    def entropy(self) -> float:
        """H(f | M) with M the unit-energy Gaussian."""
        w = self._weights()
        fv = self.vals
        log_m = -0.5 * self.v**2 - 0.5 * np.log(_TWO_PI)
        live = fv > 0
        return float(np.sum(fv[live] * (np.log(fv[live]) - log_m[live])
                            * w[live]))

    def production(self) -> float:
        """The limit production D_gamma(f) of the current profile."""
        return limit_production(self.vals, self.v, self.gamma,
                                angle_nodes=self.angle_nodes)

    def _normalize(self) -> None:
        m = self.mass()
        if m <= 0:
            raise AccuracyError("profile lost all its mass")
        self.vals /= m

    def _rhs(self, vals: np.ndarray) -> np.ndarray:
        return collision_operator(vals, self.v, self.gamma, self.angle_nodes)

    def step(self, dt: float) -> None:
        y = self.vals
        k1 = self._rhs(y)
        k2 = self._rhs(np.maximum(y + 0.5 * dt * k1, 0.0))
        k3 = self._rhs(np.maximum(y + 0.5 * dt * k2, 0.0))
        k4 = self._rhs(np.maximum(y + dt * k3, 0.0))
        new = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        clipped = float(np.sum(np.minimum(new, 0.0) * self._weights()))
        if abs(clipped) > self.clip_tolerance:
            raise AccuracyError(
                f"negative mass {clipped:.2e} exceeds the stability budget; "
                "reduce dt")
        self.vals = np.maximum(new, 0.0)
        self._last_clipped = abs(clipped)
        self.time += dt
        self._normalize()

    def evolve(self, t_final: float, dt: float,
               record_every: int = 1) -> EvolutionRecord:
        steps = int(np.ceil(t_final / dt))
        dt = t_final / steps
        for k in range(steps):
            if record_every and k % record_every == 0:
                self._record_point()
            self.step(dt)
        self._record_point()
        return self.record

    def _record_point(self) -> None:
        rec = self.record
        rec.times.append(self.time)
        rec.entropy.append(self.entropy())
        rec.production.append(self.production())
        rec.mass_drift.append(abs(self.mass() - 1.0))
        rec.clipped_mass.append(self._last_clipped)

    def density(self) -> GridDensity1D:
        """Current profile as a symmetric grid density on [-v_max, v_max]."""
        v_full = np.concatenate([-self.v[:0:-1], self.v])
        vals = np.concatenate([self.vals[:0:-1], self.vals])
        w = np.full(v_full.shape, self.dv)
        w[0] = w[-1] = 0.5 * self.dv
        return GridDensity1D(float(self.v[-1]), v_full, vals, w,
                             tag=f"limit(t={self.time:g})")


def suggested_dt(gamma: float, v_max: float) -> float:
    """Conservative explicit step bound from the dominating loss rate."""
    return 0.25 / (1.0 + 2.0 * v_max**2) ** gamma


def limit_production(f_vals: np.ndarray, v: np.ndarray, gamma: float,
                     angle_nodes: int = 256) -> float:
    """D_gamma(f) = (1/2pi) int (1+v^2+w^2)^gamma psi(ff, f(th)f(th)).

    Reduced to polar coordinates exactly like the N-particle production,
    with the conditioning weight replaced by 1.
    """
    spline = CubicSpline(v, np.maximum(f_vals, 0.0))

    def fx(x):
        out = np.zeros_like(x)
        mask = np.abs(x) <= v[-1]
        out[mask] = np.maximum(spline(np.abs(x[mask])), 0.0)
        return out

    n_s = 256
    x, ws = np.polynomial.legendre.leggauss(n_s)
    s_max = 2.0 * v[-1] ** 2
    s = 0.5 * s_max * (x + 1.0)
    ws = 0.5 * s_max * ws
    phi = _TWO_PI * (np.arange(angle_nodes) + 0.5) / angle_nodes
    dphi = _TWO_PI / angle_nodes
    r = np.sqrt(s)
    p = fx(np.outer(r, np.cos(phi))) * fx(np.outer(r, np.sin(phi)))
    with np.errstate(divide="ignore"):
        logp = np.where(p > 0, np.log(np.maximum(p, 1e-300)), 0.0)
    k = p.shape[1]
    pl = p * logp
    pair = 2.0 * (k * np.sum(pl, axis=1)
                  - np.sum(p, axis=1) * np.sum(logp * (p > 0), axis=1))
    shell = (1.0 + s) ** gamma * pair * dphi * dphi
    return float(np.sum(ws * shell) / _TWO_PI * 0.5)


def cercignani_ratio(f_vals: np.ndarray, v: np.ndarray,
                     gamma: float = 0.0) -> float:
    """D_gamma(f) / (2 H(f | M)), the limiting entropic-gap value."""
    dv = v[1] - v[0]
    w = np.full(v.shape, 2.0 * dv)
    w[0] = w[-1] = dv
    live = f_vals > 0
    log_m = -0.5 * v**2 - 0.5 * np.log(_TWO_PI)
    h = float(np.sum(f_vals[live] * (np.log(f_vals[live]) - log_m[live])
                     * w[live]))
    if h <= 1e-9:
        raise AccuracyError("entropy numerically zero; ratio undefined")
    return limit_production(f_vals, v, gamma) / (2.0 * h)
