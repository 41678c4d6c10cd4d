"""Grand-canonical thermodynamics of the disordered interval gas.

Finite-volume quantities are exact sums over the Dirichlet levels of one
partition; thermodynamic-limit quantities are integrals against the
self-averaged density of states from :mod:`bec1d.spectrum`. The critical
density is finite, so above it the chemical potential pins to the spectral
bottom and the excess density condenses.

All improper integrals are evaluated after the substitution E = q^2, which
removes the E^(-3/2) steepness of the density of states; the integrands then
vanish with all derivatives at q = 0.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ConvergenceError, DomainError
from .poisson_geometry import IntervalPartition
from .spectrum import C, TAIL_EXPONENT, LevelTable, ModelParams, build_level_table

_QUAD_OPTS = dict(limit=400, epsabs=1e-13, epsrel=1e-12)
_MAX_BISECTIONS = 200
_MU_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ThermoPoint:
    """A grand-canonical state, fixed either by mu or by target density."""

    beta: float
    mu: float | None = None
    rho: float | None = None

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be positive, got {self.beta}")
        if (self.mu is None) == (self.rho is None):
            raise ValueError("exactly one of mu and rho must be set")
        if self.rho is not None and self.rho <= 0:
            raise ValueError(f"rho must be positive, got {self.rho}")

    @property
    def mode(self) -> str:
        return "fixed-mu" if self.mu is not None else "fixed-rho"


@dataclass(frozen=True)
class CondensateReport:
    """Critical density, condensate density and limiting chemical potential."""

    rho_c: float
    rho_0: float
    mu_limit: float


def _occupations(energies: np.ndarray, beta: float, mu: float) -> np.ndarray:
    x = beta * (energies - mu)
    with np.errstate(over="ignore"):
        return np.where(x > 745.0, 0.0, 1.0 / np.expm1(np.minimum(x, 745.0)))


def _table(partition: IntervalPartition, beta: float, extra_cutoff: float = 0.0) -> LevelTable:
    ground = (C / partition.lengths.max()) ** 2
    return build_level_table(partition, max(ground + TAIL_EXPONENT / beta, extra_cutoff))


def _require_below_ground(mu: float, ground: float):
    if not np.isfinite(mu) or mu >= ground:
        raise DomainError(f"mu must lie below the spectral bottom {ground:g}, got {mu}")


def pressure_finite(partition: IntervalPartition, beta: float, mu: float) -> float:
    """Grand-canonical pressure of one partition.

    -1/(beta L) * sum over levels of ln(1 - exp(-beta (E - mu))); the mode
    sums are truncated once beta (E - mu) exceeds TAIL_EXPONENT above the
    spectral bottom, with discarded tail below 1e-20 per level.
    """
    table = _table(partition, beta)
    _require_below_ground(mu, table.ground_energy)
    x = beta * (table.energies - mu)
    with np.errstate(divide="ignore"):
        logs = np.log(-np.expm1(-x))
    return -float(logs.sum()) / (beta * partition.total_length)


def density_finite(partition: IntervalPartition, beta: float, mu: float) -> float:
    """Grand-canonical particle density of one partition."""
    table = _table(partition, beta)
    _require_below_ground(mu, table.ground_energy)
    return float(_occupations(table.energies, beta, mu).sum()) / partition.total_length


def _bose_factor(x: float) -> float:
    """1 / (e^x - 1) for x > 0, stable against overflow and small-x cancellation."""
    if x > 745.0:
        return 0.0
    return math.exp(-x) / (-math.expm1(-x))


def _ids_weight_q(q: float, intensity: float) -> float:
    """Density-of-states measure after E = q^2: intensity^2 C w / (q^2 (1-w)^2)."""
    if q <= 0.0:
        return 0.0
    y = C * intensity / q
    if y > 745.0:
        return 0.0
    w = math.exp(-y)
    d = -math.expm1(-y)
    return intensity * intensity * C * w / (q * q * d * d)


def _q_max(beta: float, mu: float) -> float:
    top = 745.0 / beta + max(mu, 0.0)
    return math.sqrt(max(top, 1e-6))


def _interior_points(beta: float, mu: float, qmax: float) -> list[float]:
    knee = math.sqrt(max(1.0 / beta + min(mu, 0.0), 1.0 / beta * 0.01))
    return [p for p in (knee, math.sqrt(1.0 / beta)) if 0.0 < p < qmax]


def pressure_limit(params: ModelParams, beta: float, mu: float) -> float:
    """Self-averaged pressure, -(1/beta) * integral of N'(E) ln(1 - e^{-beta(E-mu)})."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    if not np.isfinite(mu) or mu >= 0:
        raise DomainError(f"the limit pressure needs mu < 0, got {mu}")
    lam = params.intensity
    qmax = _q_max(beta, mu)

    def integrand(q: float) -> float:
        w = _ids_weight_q(q, lam)
        if w == 0.0:
            return 0.0
        x = beta * (q * q - mu)
        if x > 745.0:
            return 0.0
        return w * math.log(-math.expm1(-x))

    val, _ = quad(integrand, 0.0, qmax, points=_interior_points(beta, mu, qmax), **_QUAD_OPTS)
    return -val / beta


def density_limit(params: ModelParams, beta: float, mu: float) -> float:
    """Self-averaged particle density; mu = 0 gives the critical density."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    if not np.isfinite(mu) or mu > 0:
        raise DomainError(f"the limit density needs mu <= 0, got {mu}")
    lam = params.intensity
    qmax = _q_max(beta, mu)

    def integrand(q: float) -> float:
        w = _ids_weight_q(q, lam)
        if w == 0.0:
            return 0.0
        return w * _bose_factor(beta * (q * q - mu))

    val, _ = quad(integrand, 0.0, qmax, points=_interior_points(beta, mu, qmax), **_QUAD_OPTS)
    return val


@functools.lru_cache(maxsize=1024)
def _critical_density_cached(intensity: float, beta: float) -> float:
    return density_limit(ModelParams(intensity), beta, 0.0)


def critical_density(params: ModelParams, beta: float) -> float:
    """Supremum of the limiting density over mu <= 0, attained at mu = 0 (finite)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return _critical_density_cached(params.intensity, beta)


def _bose_derivative_weight(energy: float, beta: float) -> float:
    """beta e^{beta E} / (e^{beta E} - 1)^2, written in underflow-safe form."""
    x = beta * energy
    if x > 745.0:
        return 0.0
    u = math.exp(-x)
    d = -math.expm1(-x)
    return beta * u / (d * d)


def critical_density_by_parts(params: ModelParams, beta: float) -> float:
    """Critical density via integration by parts against the integrated DOS.

    Independent route used to cross-check critical_density: the boundary terms
    vanish because the integrated density of states has a Lifshitz tail.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    lam = params.intensity

    def integrand(energy: float) -> float:
        w = _bose_derivative_weight(energy, beta)
        if w == 0.0 or energy <= 0.0:
            return 0.0
        y = C * lam / math.sqrt(energy)
        if y > 745.0:
            return 0.0
        return lam * math.exp(-y) / (-math.expm1(-y)) * w

    emax = 745.0 / beta
    pts = [p for p in (1.0 / beta,) if p < emax]
    val, _ = quad(integrand, 0.0, emax, points=pts, **_QUAD_OPTS)
    return val


def _solve_mu_on_table(table: LevelTable, beta: float, rho: float) -> float:
    ground = table.ground_energy
    volume = table.total_length

    def dens(mu: float) -> float:
        return float(_occupations(table.energies, beta, mu).sum()) / volume

    gap = max(1e-6 / (volume * beta * rho), 8.0 * np.finfo(float).eps * abs(ground))
    hi = ground - gap
    shrink = 0
    while dens(hi) < rho:
        gap *= 0.125
        hi = ground - gap
        shrink += 1
        if shrink > 60 or gap <= 2.0 * np.finfo(float).eps * abs(ground):
            raise ConvergenceError(
                "could not bracket mu below the ground energy", (ground - gap, ground)
            )
    lo = ground - 1.0 / beta
    for _ in range(_MAX_BISECTIONS):
        if dens(lo) < rho:
            break
        lo = ground - 2.0 * (ground - lo)
    else:
        raise ConvergenceError("no lower bracket for mu", (lo, hi))
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if dens(mid) < rho:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _MU_TOLERANCE * max(1.0, abs(mid)):
            return 0.5 * (lo + hi)
    raise ConvergenceError("mu bisection did not converge", (lo, hi))


def solve_mu_finite(partition: IntervalPartition, beta: float, rho: float) -> float:
    """Unique mu below the partition's spectral bottom with density_finite == rho."""
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if beta <= 0:
        raise ValueError("beta must be positive")
    return _solve_mu_on_table(_table(partition, beta), beta, rho)


def solve_mu_limit(params: ModelParams, beta: float, rho: float) -> float:
    """Limiting chemical potential: the root of density_limit below zero, or 0 if condensed."""
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    rho_c = critical_density(params, beta)
    if rho >= rho_c:
        return 0.0
    lo = -1.0 / beta
    for _ in range(_MAX_BISECTIONS):
        if density_limit(params, beta, lo) < rho:
            break
        lo *= 2.0
    else:
        raise ConvergenceError("no lower bracket for the limit mu", (lo, 0.0))
    hi = 0.0
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if density_limit(params, beta, mid) < rho:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _MU_TOLERANCE * max(1.0, abs(mid)):
            return 0.5 * (lo + hi)
    raise ConvergenceError("limit-mu bisection did not converge", (lo, hi))


def condensate_density(params: ModelParams, beta: float, rho: float) -> CondensateReport:
    """Split a target density into critical and condensed parts.

    rho exactly at the critical density counts as condensed with zero
    condensate, so mu_limit is 0 there.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    rho_c = critical_density(params, beta)
    return CondensateReport(
        rho_c=rho_c, rho_0=max(0.0, rho - rho_c), mu_limit=solve_mu_limit(params, beta, rho)
    )


def condensate_finite(
    partition: IntervalPartition, beta: float, rho: float, epsilon: float
) -> float:
    """Occupation density of all levels below the energy window `epsilon`.

    Solves for the finite-volume chemical potential at target density rho
    first. A window below the partition's ground energy is empty and yields
    exactly zero.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    table = _table(partition, beta, extra_cutoff=epsilon)
    mu = _solve_mu_on_table(table, beta, rho)
    occ = _occupations(table.energies, beta, mu)
    return float(occ[table.energies < epsilon].sum()) / partition.total_length


def critical_density_bound(params: ModelParams, beta: float, amplitude: float) -> float:
    """Upper bound on the critical density for finite impurity amplitude.

    Integrates the finite-amplitude IDS bound below (pi a / 8)^2 and the free
    IDS above it, both against the Bose derivative weight. Diverges as the
    amplitude shrinks to zero.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if amplitude <= 0:
        raise ValueError("amplitude must be positive")
    lam = params.intensity
    e_split = (math.pi * amplitude / 8.0) ** 2
    emax = 745.0 / beta

    def low(energy: float) -> float:
        w = _bose_derivative_weight(energy, beta)
        if w == 0.0 or energy <= 0.0:
            return 0.0
        exponent = lam * (C / math.sqrt(energy) - 4.0 / amplitude)
        if exponent > 745.0:
            return 0.0
        z = math.exp(-exponent)
        return lam * z / (-math.expm1(-exponent)) * w

    def high(energy: float) -> float:
        w = _bose_derivative_weight(energy, beta)
        return math.sqrt(energy) / C * w if w else 0.0

    first, _ = quad(low, 0.0, min(e_split, emax), **_QUAD_OPTS)
    second = 0.0
    if e_split < emax:
        pts = [p for p in (1.0 / beta,) if e_split < p < emax]
        second, _ = quad(high, e_split, emax, points=pts, **_QUAD_OPTS)
    return first + second
