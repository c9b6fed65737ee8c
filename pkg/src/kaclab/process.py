"""The Kac jump process and its exact small-N spectral analysis.

The master equation evolves a symmetric density on the energy sphere by
random pair rotations at rate N (1 + v_i^2 + v_j^2)^gamma per clock tick,
averaged over pairs.  Here we run the process by thinning against the
dominating rate N (1 + N)^gamma, estimate spectral-gap quotients with a
Rayleigh/Dirichlet Monte Carlo, and assemble the generator exactly on a
polynomial Galerkin basis for small N where the gap is known in closed
form: Delta_N = (N + 2) / (2 (N - 1)).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np
from scipy.special import gammaln

from .errors import ConfigurationError, DegenerateTestFunctionError
from .sphere import VelocityEnsemble, rotate_pair, uniform_sphere_batch

_TWO_PI = 2.0 * np.pi


def spectral_gap(n: int) -> float:
    """Closed-form gap of the gamma = 0 Kac walk: (N + 2) / (2 (N - 1))."""
    if n < 2:
        raise ValueError("need at least two particles")
    return (n + 2.0) / (2.0 * (n - 1.0))


# -- trajectory simulation ----------------------------------------------


@dataclass
class SimulationConfig:
    """Parameters of one thinned jump-process run."""

    n: int
    gamma: float = 0.0
    t_final: float = 1.0
    seed: int = 0
    renormalize_every: int = 1024
    record_every: int = 0  # accepted collisions between snapshots; 0 = none

    def __post_init__(self):
        if self.n < 2:
            raise ConfigurationError("need at least two particles")
        if self.t_final <= 0:
            raise ConfigurationError("t_final must be positive")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigurationError("gamma must lie in [0, 1]")


@dataclass
class TrajectoryStats:
    """Outcome of a run: final state plus acceptance bookkeeping."""

    config: SimulationConfig
    velocities: np.ndarray
    time: float
    proposed: int
    accepted: int
    snapshots: list = field(default_factory=list)

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / max(self.proposed, 1)

    def to_json(self, path) -> None:
        meta = {
            "n": self.config.n, "gamma": self.config.gamma,
            "t_final": self.config.t_final, "seed": self.config.seed,
            "proposed": self.proposed, "accepted": self.accepted,
            "time": self.time,
        }
        with open(path, "w") as fh:
            json.dump(meta, fh, indent=2)


def pair_jump_rate(n: int, gamma: float, s) -> np.ndarray:
    """Collision rate of one pair with joint energy s: N (1+s)^gamma / C(N,2)."""
    s = np.asarray(s, dtype=float)
    out = n * (1.0 + s) ** gamma / (n * (n - 1) / 2.0)
    return float(out) if out.ndim == 0 else out


def simulate(config: SimulationConfig, initial: np.ndarray | None = None,
             rng: np.random.Generator | None = None) -> TrajectoryStats:
    """Run the jump process to t_final by thinning.

    Candidate events arrive at the dominating rate N (1 + N)^gamma; a
    uniformly chosen pair is rotated by a uniform angle with probability
    ((1 + v_i^2 + v_j^2) / (1 + N))^gamma, which reproduces the
    energy-dependent collision rates exactly.
    """
    n, gamma = config.n, config.gamma
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    if initial is None:
        v = uniform_sphere_batch(n, 1, rng)[0].copy()
    else:
        v = np.array(initial, dtype=float)
        if v.shape != (n,):
            raise ConfigurationError(f"initial state must have shape ({n},)")
    lam = n * (1.0 + n) ** gamma
    t, proposed, accepted = 0.0, 0, 0
    snapshots = []
    while True:
        t += rng.exponential(1.0 / lam)
        if t >= config.t_final:
            break
        proposed += 1
        i = rng.integers(n)
        j = rng.integers(n - 1)
        if j >= i:
            j += 1
        s = v[i] * v[i] + v[j] * v[j]
        if gamma > 0 and rng.random() >= ((1.0 + s) / (1.0 + n)) ** gamma:
            continue
        theta = rng.uniform(0.0, _TWO_PI)
        v[i], v[j] = rotate_pair(v[i], v[j], theta)
        accepted += 1
        if accepted % config.renormalize_every == 0:
            v *= np.sqrt(n / np.sum(v * v))
        if config.record_every and accepted % config.record_every == 0:
            snapshots.append((t, v.copy()))
    v *= np.sqrt(n / np.sum(v * v))
    return TrajectoryStats(config, v, config.t_final, proposed, accepted,
                           snapshots)


def simulate_ensemble(config: SimulationConfig, replicas: int,
                      initial: np.ndarray | None = None,
                      seed: int | None = None) -> np.ndarray:
    """Final states of independent replicas, shape (replicas, N)."""
    base = config.seed if seed is None else seed
    out = np.empty((replicas, config.n))
    for r in range(replicas):
        rng = np.random.default_rng((base, r))
        init_r = initial[r] if (initial is not None and initial.ndim == 2) else initial
        out[r] = simulate(config, initial=init_r, rng=rng).velocities
    return out


def empirical_marginal(states: np.ndarray, bins: int = 101,
                       v_max: float | None = None):
    """Histogram density of the pooled single-particle velocities."""
    pooled = np.ravel(states)
    if v_max is None:
        v_max = float(np.max(np.abs(pooled))) * 1.01
    hist, edges = np.histogram(pooled, bins=bins, range=(-v_max, v_max),
                               density=True)
    centers = 0.5 * (edges[1:] + edges[:-1])
    return centers, hist


# -- Rayleigh quotient estimates ----------------------------------------


def dirichlet_rayleigh(phi, n: int, gamma: float, samples: int,
                       rng: np.random.Generator,
                       angle_nodes: int = 32) -> float:
    """Monte Carlo Rayleigh quotient <phi, -L phi> / Var(phi).

    The Dirichlet form of the generator is
    (N / 2) E[(1 + v_i^2 + v_j^2)^gamma (phi(V) - phi(RV))^2] with the
    expectation over a uniform sphere point, a uniform pair and a uniform
    rotation angle.  The quotient upper-bounds nothing and lower-bounds
    nothing per se, but concentrates above the true gap for any phi.
    """
    v = uniform_sphere_batch(n, samples, rng)
    base = phi(v)
    if np.std(base) < 1e-12:
        raise DegenerateTestFunctionError(
            "test function is constant on the sphere")
    idx = rng.integers(n, size=samples)
    jdx = rng.integers(n - 1, size=samples)
    jdx = np.where(jdx >= idx, jdx + 1, jdx)
    rows = np.arange(samples)
    vi, vj = v[rows, idx], v[rows, jdx]
    theta = _TWO_PI * (np.arange(angle_nodes) + 0.5) / angle_nodes
    acc = np.zeros(samples)
    s = vi * vi + vj * vj
    for th in theta:
        w = v.copy()
        wi, wj = rotate_pair(vi, vj, th)
        w[rows, idx] = wi
        w[rows, jdx] = wj
        acc += (phi(w) - base) ** 2
    dirichlet = 0.5 * n * np.mean((1.0 + s) ** gamma * acc / angle_nodes)
    return float(dirichlet / np.var(base))


# -- exact generator on a polynomial basis ------------------------------


def _half_integer_moment(p: int, q: int) -> float:
    """(1/2pi) integral of cos^p sin^q over the circle (0 unless p, q even)."""
    if p % 2 or q % 2:
        return 0.0
    return float(np.exp(gammaln((p + 1) / 2.0) + gammaln((q + 1) / 2.0)
                        - gammaln((p + q + 2) / 2.0)) / np.pi)


def _sphere_even_moment(n: int, powers: np.ndarray) -> float:
    """E[prod v_i^{2 a_i}] on the sphere of radius sqrt(N).

    Closed form from the Dirichlet distribution of v_i^2 / N.
    """
    a = np.asarray(powers, dtype=int)
    total = int(np.sum(a))
    log_val = (gammaln(n / 2.0) - gammaln(n / 2.0 + total)
               + np.sum(gammaln(a + 0.5)) - len(a) * gammaln(0.5))
    return float(n**total * np.exp(log_val))


def _monomials(n: int, degree: int):
    """Multi-indices of symmetric even monomials up to the given degree.

    Basis functions are symmetrized products prod_i v_{c_i}^{2 e_i} over
    distinct coordinates; odd monomials decouple at gamma = 0 and carry
    no lower spectrum, so the even sector suffices for the gap.
    """
    basis = [()]
    for k in range(1, degree // 2 + 1):
        for combo in combinations_with_replacement(range(1, degree // 2 + 1), k):
            if sum(combo) * 2 <= degree and k <= n:
                basis.append(tuple(sorted(combo, reverse=True)))
    return basis


def _expand_monomial(exps: tuple, n: int) -> list[tuple[np.ndarray, float]]:
    """Distinct-coordinate assignments realizing a symmetric monomial.

    Returns (power-vector, multiplicity-weight) pairs; point evaluation of
    the symmetrized basis function averages these assignments.
    """
    k = len(exps)
    if k == 0:
        return [(np.zeros(n, dtype=int), 1.0)]
    assigns = []

    def rec(pos, used, current):
        if pos == k:
            assigns.append(tuple(current))
            return
        for c in range(n):
            if c not in used:
                rec(pos + 1, used | {c}, current + [c])
    rec(0, frozenset(), [])
    table: dict[tuple, float] = {}
    for coords in assigns:
        p = np.zeros(n, dtype=int)
        for c, e in zip(coords, exps):
            p[c] += 2 * e
        key = tuple(p)
        table[key] = table.get(key, 0.0) + 1.0
    total = sum(table.values())
    return [(np.array(key), w / total) for key, w in table.items()]


def generator_matrix_smalln(n: int, gamma: float = 0.0, degree: int = 4):
    """Exact Galerkin matrices (A, G) of -L on the even polynomial sector.

    A_{ab} = <p_a, -L p_b> and G_{ab} = <p_a, p_b> under the uniform
    sphere measure; pair-rotation averages of monomials are evaluated with
    circle moments, sphere moments with Dirichlet closed forms.  Only
    gamma = 0 keeps the polynomial sector invariant.
    """
    if gamma != 0.0:
        raise ConfigurationError(
            "exact polynomial Galerkin requires gamma = 0")
    if n < 3 or n > 8:
        raise ConfigurationError("small-N analysis supports 3 <= N <= 8")
    basis = _monomials(n, degree)
    expanded = [_expand_monomial(b, n) for b in basis]

    def moment_of_powers(p: np.ndarray) -> float:
        if np.any(p % 2):
            return 0.0
        return _sphere_even_moment(n, p // 2)

    def rotated_terms(p: np.ndarray, i: int, j: int):
        """Circle-average of v_i^{p_i} v_j^{p_j} after rotating pair (i, j).

        Expands (vi c + vj s)^{p_i} (-vi s + vj c)^{p_j} binomially and
        averages the trig coefficients, yielding monomials in (vi, vj).
        """
        pi, pj = int(p[i]), int(p[j])
        out: dict[tuple, float] = {}
        from math import comb
        for a in range(pi + 1):
            for b in range(pj + 1):
                # cos exponent a + b, sin exponent (pi - a) + (pj - b)
                trig = _half_integer_moment(a + b, pi - a + pj - b)
                if trig == 0.0:
                    continue
                coef = comb(pi, a) * comb(pj, b) * (-1.0) ** (pj - b) * trig
                key = (a + pj - b, pi - a + b)  # powers of (vi, vj)
                out[key] = out.get(key, 0.0) + coef
        return out

    m = len(basis)
    gram = np.zeros((m, m))
    amat = np.zeros((m, m))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    pair_w = 1.0 / len(pairs)
    for a in range(m):
        for b in range(m):
            g = 0.0
            q_avg = 0.0
            for pa, wa in expanded[a]:
                for pb, wb in expanded[b]:
                    p_sum = pa + pb
                    g += wa * wb * moment_of_powers(p_sum)
                    # <p_a, Q p_b>: rotate p_b pairwise, multiply by p_a
                    for (i, j) in pairs:
                        if pb[i] == 0 and pb[j] == 0:
                            q_avg += wa * wb * pair_w * moment_of_powers(p_sum)
                            continue
                        for (ei, ej), coef in rotated_terms(pb, i, j).items():
                            p_rot = pa.copy().astype(int)
                            p_rot += pb
                            p_rot[i] += ei - pb[i]
                            p_rot[j] += ej - pb[j]
                            q_avg += (wa * wb * pair_w * coef
                                      * moment_of_powers(p_rot))
            gram[a, b] = g
            amat[a, b] = n * (g - q_avg)
    return amat, gram


def exact_gap_smalln(n: int, degree: int = 4) -> float:
    """Smallest nonzero eigenvalue of -L restricted to even polynomials.

    Solves the generalized problem A x = mu G x after projecting out the
    Gram null space (redundant symmetrized monomials) and the constant.
    """
    amat, gram = generator_matrix_smalln(n, 0.0, degree)
    amat = 0.5 * (amat + amat.T)
    gram = 0.5 * (gram + gram.T)
    evals, evecs = np.linalg.eigh(gram)
    keep = evals > 1e-9 * evals.max()
    basis = evecs[:, keep] / np.sqrt(evals[keep])
    small = basis.T @ amat @ basis
    mu = np.linalg.eigvalsh(0.5 * (small + small.T))
    nonzero = mu[mu > 1e-8]
    if nonzero.size == 0:
        raise DegenerateTestFunctionError("no nonzero spectrum in the basis")
    return float(np.min(nonzero))


def export_states_csv(path, states: np.ndarray) -> None:
    np.savetxt(path, states, delimiter=",")
