"""Largest-interval statistics and condensate localization checks.

The largest of ~lam L Poisson intervals has typical length ln(lam L)/lam, and
the gap between the two largest ground energies shows level repulsion strong
enough to keep the condensate in a single interval. These drivers measure the
scaling law, the ground-state spacing probability (with an exact quadrature
companion), and the per-realization share of the low-energy occupation held
by the single lowest level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .poisson_geometry import IntervalPartition, poisson_lengths
from .rng import trial_rng
from .spectrum import C, C_SQUARED
from .thermodynamics import _occupations, _solve_mu_on_table, _table


@dataclass(frozen=True)
class SpacingQuery:
    """Monte Carlo setup for the ground-state spacing probability."""

    sample_size: int
    amplitude: float
    exponent: float
    intensity: float
    trials: int
    seed: int = 0

    def __post_init__(self):
        if self.sample_size < 2:
            raise ValueError(f"sample_size must be >= 2, got {self.sample_size}")
        if self.amplitude <= 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if not (0.0 < self.exponent < 1.0):
            raise ValueError(f"exponent must lie in (0, 1), got {self.exponent}")
        if self.intensity <= 0:
            raise ValueError(f"intensity must be positive, got {self.intensity}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")

    @property
    def threshold(self) -> float:
        return self.amplitude / self.sample_size ** (1.0 - self.exponent)


@dataclass(frozen=True)
class SpacingEstimate:
    """Probability estimate with its binomial standard error."""

    probability: float
    std_error: float
    trials: int


def spacing_probability_mc(query: SpacingQuery) -> SpacingEstimate:
    """Frequency of {ground-energy gap of the two largest intervals > threshold}.

    Each trial draws sample_size independent exponential lengths, orders them,
    and compares E(second largest) - E(largest) against
    amplitude / sample_size^(1 - exponent). Trials are chunked but their
    count, not the chunking, determines the estimate.
    """
    k = query.sample_size
    threshold = query.threshold
    rng = trial_rng(query.seed, 0)
    hits = 0
    done = 0
    chunk = max(1, int(5_000_000 // k))
    while done < query.trials:
        m = min(chunk, query.trials - done)
        draws = rng.exponential(1.0 / query.intensity, size=(m, k))
        top_two = np.partition(draws, k - 2, axis=1)[:, -2:]
        second, largest = top_two[:, 0], top_two[:, 1]
        gap = C_SQUARED / second**2 - C_SQUARED / largest**2
        hits += int(np.count_nonzero(gap > threshold))
        done += m
    p = hits / query.trials
    return SpacingEstimate(p, math.sqrt(max(p * (1.0 - p), 0.0) / query.trials), query.trials)


def spacing_probability_exact(
    sample_size: int, amplitude: float, exponent: float, intensity: float
) -> float:
    """Exact spacing probability by quadrature over the top-two joint density.

    Reducing the (largest, second largest) joint density over the gap event
    leaves a single integral over the second-largest length:

        k (k-1) * int_0^{C/sqrt(t)} lam e^{-lam y} (1-e^{-lam y})^{k-2}
                                     e^{-lam y / sqrt(1 - t y^2 / C^2)} dy,

    with t the energy threshold. Stable for sample sizes far beyond Monte
    Carlo reach, so it doubles as the oracle for the k -> infinity limit.
    """
    if sample_size < 2:
        raise ValueError("sample_size must be >= 2")
    if amplitude <= 0 or intensity <= 0:
        raise ValueError("amplitude and intensity must be positive")
    if not (0.0 < exponent <= 1.0):
        raise ValueError(f"exponent must lie in (0, 1], got {exponent}")
    k = sample_size
    lam = intensity
    threshold = amplitude / k ** (1.0 - exponent)
    y_max = C / math.sqrt(threshold)

    def integrand(y: float) -> float:
        if y <= 0.0:
            return 0.0
        root = 1.0 - threshold * y * y / C_SQUARED
        if root <= 0.0:
            return 0.0
        x_star = y / math.sqrt(root)
        log_term = (k - 2) * math.log1p(-math.exp(-lam * y)) if lam * y < 700 else 0.0
        return lam * math.exp(-lam * y + log_term - lam * x_star)

    # the density concentrates near ln(k)/lam; pass it as a split point
    peak = math.log(k) / lam
    pts = [p for p in (peak, 2.0 * peak) if 0.0 < p < y_max]
    val, _ = quad(integrand, 0.0, y_max, points=pts, limit=500, epsabs=1e-13, epsrel=1e-11)
    return k * (k - 1) * val


def largest_interval_scaling(
    intensity: float, total_length: float, trials: int, seed: int
) -> tuple[float, float]:
    """Mean and std of L_max / (ln(lam L)/lam) over Poisson partitions."""
    if intensity * total_length <= math.e:
        raise ValueError("need intensity * total_length > e for the logarithmic scale")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    scale = math.log(intensity * total_length) / intensity
    ratios = np.empty(trials)
    for t in range(trials):
        lengths = poisson_lengths(intensity, total_length, trial_rng(seed, t))
        ratios[t] = lengths.max() / scale
    return float(ratios.mean()), float(ratios.std())


@dataclass(frozen=True)
class GroundStateShare:
    """Share of the low-energy occupation held by the single lowest level.

    `fraction` is NaN when no level lies below the window. `tie` flags two
    largest intervals equal to within relative 1e-12, where the lowest level
    is effectively degenerate and the share saturates near 1/2.
    """

    fraction: float
    tie: bool
    window_levels: int


def ground_state_share(
    partition: IntervalPartition, beta: float, rho: float, epsilon: float
) -> GroundStateShare:
    """Occupation of the lowest level over the total occupation below epsilon."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    table = _table(partition, beta, extra_cutoff=epsilon)
    mu = _solve_mu_on_table(table, beta, rho)
    occ = _occupations(table.energies, beta, mu)
    window = table.energies < epsilon
    n_window = int(np.count_nonzero(window))
    top_two = np.partition(partition.lengths, partition.lengths.size - 2)[-2:] \
        if partition.lengths.size >= 2 else partition.lengths
    tie = top_two.size == 2 and abs(top_two[1] - top_two[0]) < 1e-12 * top_two[1]
    if n_window == 0:
        return GroundStateShare(math.nan, tie, 0)
    lowest = int(np.argmin(table.energies))
    fraction = float(occ[lowest] / occ[window].sum()) if window[lowest] else 0.0
    return GroundStateShare(fraction, tie, n_window)


def ground_state_occupation_fraction(
    intensity: float,
    beta: float,
    rho: float,
    total_length: float,
    seeds: list[int],
    epsilon: float = 0.01,
) -> list[GroundStateShare]:
    """Per-seed ground-state shares over Poisson partitions at fixed density."""
    results = []
    for seed in seeds:
        lengths = poisson_lengths(intensity, total_length, trial_rng(seed, 0))
        partition = IntervalPartition(lengths, total_length, lengths.size - 1)
        results.append(ground_state_share(partition, beta, rho, epsilon))
    return results
