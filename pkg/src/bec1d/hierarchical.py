"""Deterministic hierarchical interval families and the condensation taxonomy.

Randomness is not essential for one-dimensional condensation: a nonrandom
segment cut into one class of "large" intervals plus a bulk of near-unit
small intervals reproduces the same critical density and lets the condensate
form in controlled ways. Three layouts are provided:

* type1 -- M identical large intervals of length ln(lam L)/lam: the
  condensate settles into the M ground states (finitely many states);
* type2 -- one large interval of length sqrt(L/lam): the condensate spreads
  over infinitely many states of that single interval;
* type3 -- floor(ln(n+1)) large logarithmic intervals: the condensate
  fragments over a growing number of intervals with vanishing share each.

The classifier reads occupation profiles over an increasing ladder of box
sizes and reports which scenario the data supports, or flags the signal as
indeterminate; a type3 ladder too short for the large-interval count to grow
is genuinely indistinguishable from type1 and is classified as such.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError
from .spectrum import C, C_SQUARED, TAIL_EXPONENT

_MAX_BISECTIONS = 300
_MU_TOLERANCE = 1e-14


class LayoutKind(str, enum.Enum):
    TYPE_I = "type1"
    TYPE_II = "type2"
    TYPE_III = "type3"


class CondensateType(str, enum.Enum):
    TYPE_I = "type1"
    TYPE_II = "type2"
    TYPE_III = "type3"
    NONE = "none"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class HierarchicalLayout:
    """A deterministic two-class interval family tiling a segment."""

    kind: LayoutKind
    total_length: float
    intensity: float
    large_count: int
    large_length: float
    small_length: float
    small_count: int

    @property
    def n_intervals(self) -> int:
        return self.large_count + self.small_count

    @property
    def ground_energy(self) -> float:
        return C_SQUARED / max(self.large_length, self.small_length) ** 2


def build_layout(
    kind: LayoutKind | str,
    total_length: float,
    intensity: float,
    large_count: int = 1,
) -> HierarchicalLayout:
    """Construct a layout with n = floor(intensity * total_length) intervals.

    large_count is honoured for type1 only; type2 always has one large
    interval and type3 derives floor(ln(n+1)) internally. Raises if the box is
    too small for every derived length to be positive.
    """
    kind = LayoutKind(kind)
    if not (np.isfinite(total_length) and total_length > 0):
        raise ValueError(f"total_length must be positive, got {total_length}")
    if not (np.isfinite(intensity) and intensity > 0):
        raise ValueError(f"intensity must be positive, got {intensity}")
    if large_count < 1:
        raise ValueError(f"large_count must be >= 1, got {large_count}")
    if kind is not LayoutKind.TYPE_I and large_count != 1:
        raise ValueError(f"{kind.value} layouts derive their own large-interval count")
    n = int(math.floor(intensity * total_length))
    if kind is LayoutKind.TYPE_I:
        m = large_count
        large = math.log(intensity * total_length) / intensity
    elif kind is LayoutKind.TYPE_II:
        m = 1
        large = math.sqrt(total_length / intensity)
    else:
        m = int(math.floor(math.log(n + 1.0)))
        large = math.log(intensity * total_length) / intensity
    if large <= 0:
        raise ValueError("large_length is not positive; the box is too small")
    if n - m < 1:
        raise ValueError(f"need at least one small interval, got n={n}, large_count={m}")
    small = (total_length - m * large) / (n - m)
    if small <= 0:
        raise ValueError(
            f"small_length = (L - {m} * {large:g}) / {n - m} is not positive; enlarge the box"
        )
    return HierarchicalLayout(
        kind=kind,
        total_length=total_length,
        intensity=intensity,
        large_count=m,
        large_length=large,
        small_length=small,
        small_count=n - m,
    )


def _tower_occupations(length: float, beta: float, mu: float) -> np.ndarray:
    """Occupations of every thermally relevant mode of one interval."""
    ground = C_SQUARED / length**2
    e_max = max(ground, mu) + TAIL_EXPONENT / beta
    s_max = max(1, int(length * math.sqrt(e_max) / C) + 1)
    modes = np.arange(1, s_max + 1, dtype=float)
    x = beta * ((C * modes / length) ** 2 - mu)
    with np.errstate(over="ignore"):
        return np.where(x > 745.0, 0.0, 1.0 / np.expm1(np.minimum(x, 745.0)))


def hierarchical_density(layout: HierarchicalLayout, beta: float, mu: float) -> float:
    """Particle density of the layout: large-interval towers plus the small bulk."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    ground = layout.ground_energy
    if not np.isfinite(mu) or mu >= ground:
        raise DomainError(f"mu must lie below the ground energy {ground:g}, got {mu}")
    large = _tower_occupations(layout.large_length, beta, mu).sum() * layout.large_count
    small = _tower_occupations(layout.small_length, beta, mu).sum() * layout.small_count
    return float(large + small) / layout.total_length


def hierarchical_critical_density(intensity: float, beta: float) -> float:
    """Limiting critical density, the same for all three layout kinds.

    intensity * sum_s 1 / (exp(beta (C s / intensity)^2) - 1) with certified
    geometric truncation.
    """
    if intensity <= 0:
        raise ValueError("intensity must be positive")
    if beta <= 0:
        raise ValueError("beta must be positive")
    scale = beta * (C / intensity) ** 2
    s_max = max(4, int(math.sqrt(TAIL_EXPONENT / scale)) + 2)
    s = np.arange(1, s_max + 1, dtype=float)
    x = scale * s * s
    with np.errstate(over="ignore"):
        terms = np.where(x > 745.0, 0.0, 1.0 / np.expm1(np.minimum(x, 745.0)))
    return intensity * float(terms.sum())


def solve_mu_hierarchical(layout: HierarchicalLayout, beta: float, rho: float) -> float:
    """Chemical potential below the layout's ground energy matching density rho."""
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if beta <= 0:
        raise ValueError("beta must be positive")
    ground = layout.ground_energy

    def dens(mu: float) -> float:
        return hierarchical_density(layout, beta, mu)

    gap = max(1e-6 / (layout.total_length * beta * rho), 8.0 * np.finfo(float).eps * abs(ground))
    hi = ground - gap
    for _ in range(80):
        if dens(hi) >= rho:
            break
        gap *= 0.125
        hi = ground - gap
    else:
        raise ConvergenceError("could not bracket mu below the ground energy", (hi, ground))
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
    raise ConvergenceError("hierarchical mu bisection did not converge", (lo, hi))


def solve_type2_coefficient(intensity: float, beta: float, rho: float) -> float:
    """Finite-size chemical-potential coefficient of the type2 layout.

    The unique A > 0 with rho - rho_c = sum_s 1/(beta intensity C^2 (s^2-1) + A);
    the ground-state term is 1/A and the condensate splits over the whole
    tower. Only defined above the critical density.
    """
    rho_c = hierarchical_critical_density(intensity, beta)
    target = rho - rho_c
    if target <= 0:
        raise DomainError(f"rho must exceed the critical density {rho_c:g}, got {rho}")
    b = beta * intensity * C_SQUARED
    s = np.arange(1.0, 100001.0)
    base = b * (s * s - 1.0)
    s_tail = 100000.5

    def total(a: float) -> float:
        head = float(np.sum(1.0 / (base + a)))
        tail = 1.0 / (b * s_tail) - (a - b) / (3.0 * b * b * s_tail**3)
        return head + tail

    lo = 1e-12
    if total(lo) < target:
        raise ConvergenceError("type2 coefficient bracket failed low", (0.0, lo))
    hi = max(1.0, b)
    for _ in range(200):
        if total(hi) < target:
            break
        hi *= 2.0
    else:
        raise ConvergenceError("type2 coefficient bracket failed high", (lo, hi))
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if total(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(1.0, mid):
            return 0.5 * (lo + hi)
    raise ConvergenceError("type2 coefficient bisection did not converge", (lo, hi))


@dataclass(frozen=True)
class OccupationEntry:
    """Per-state occupation density with its class multiplicity.

    `density` is the volume-normalized occupation of one state in one
    interval; aggregate contributions are density * multiplicity. Small-bulk
    entries carry interval_index -1 and multiplicity small_count.
    """

    interval_class: str
    interval_index: int
    quantum_number: int
    density: float
    multiplicity: int


@dataclass(frozen=True)
class OccupationProfile:
    """All per-state occupation densities of a layout at a target density."""

    entries: tuple[OccupationEntry, ...]
    mu_used: float
    box_length: float
    rho: float
    rho_c: float

    def total_density(self) -> float:
        return math.fsum(e.density * e.multiplicity for e in self.entries)

    def macroscopic(self, threshold: float) -> list[OccupationEntry]:
        return [e for e in self.entries if e.density > threshold]


def occupation_profile(layout: HierarchicalLayout, beta: float, rho: float) -> OccupationProfile:
    """Solve for mu and record every state's occupation density.

    Ground states of the large intervals are listed separately per interval;
    the identical small intervals are folded into multiplicity-weighted
    entries.
    """
    mu = solve_mu_hierarchical(layout, beta, rho)
    volume = layout.total_length
    entries: list[OccupationEntry] = []
    large = _tower_occupations(layout.large_length, beta, mu) / volume
    for j in range(layout.large_count):
        entries.extend(
            OccupationEntry("large", j, s + 1, float(d), 1) for s, d in enumerate(large)
        )
    small = _tower_occupations(layout.small_length, beta, mu) / volume
    entries.extend(
        OccupationEntry("small", -1, s + 1, float(d), layout.small_count)
        for s, d in enumerate(small)
    )
    return OccupationProfile(
        entries=tuple(entries),
        mu_used=mu,
        box_length=layout.total_length,
        rho=rho,
        rho_c=hierarchical_critical_density(layout.intensity, beta),
    )


@dataclass(frozen=True)
class ClassificationResult:
    """Outcome of the condensation-type classifier."""

    label: CondensateType
    diagnostics: dict = field(default_factory=dict)


def classify_condensate(profiles: list[OccupationProfile]) -> ClassificationResult:
    """Classify the condensation type from profiles over an increasing box ladder.

    A state is macroscopic when its per-state density exceeds 1% of the
    condensate density. Low excited states of a large interval cross that bar
    transiently at the smallest boxes, so the decision reads trends:

    * the number of intervals hosting macroscopic states stays constant and
      the states-per-interval count thins to one -> type1 (the survivors must
      carry the condensate);
    * hosts constant, but one interval keeps holding several macroscopic
      states at the largest boxes -> type2;
    * hosts strictly growing with one state each at the largest box -> type3;
    * no condensate density at all -> none.

    Conflicting signals yield INDETERMINATE rather than a guess.
    """
    if len(profiles) < 3:
        raise ValueError("need at least 3 profiles over an increasing box ladder")
    lengths = [p.box_length for p in profiles]
    if any(b <= 2.0 * a for a, b in zip(lengths[:-1], lengths[1:])):
        raise ValueError("box lengths must grow at least geometrically (ratio > 2)")
    rho0s = [p.rho - p.rho_c for p in profiles]
    if max(abs(r - rho0s[0]) for r in rho0s) > 1e-8 * max(abs(rho0s[0]), 1e-300):
        raise ValueError("profiles must share the same target and critical density")
    rho0 = rho0s[-1]
    if rho0 <= 0:
        return ClassificationResult(CondensateType.NONE, {"rho0": rho0})
    threshold = 0.01 * rho0

    def census(profile: OccupationProfile):
        macro = profile.macroscopic(threshold)
        hosts: dict[tuple[str, int], int] = {}
        for entry in macro:
            hosts[(entry.interval_class, entry.interval_index)] = (
                hosts.get((entry.interval_class, entry.interval_index), 0) + 1
            )
        mass = math.fsum(e.density * e.multiplicity for e in macro)
        return {
            "count": len(macro),
            "spread": len(hosts),
            "per_interval_max": max(hosts.values(), default=0),
            "small_macro": any(e.interval_class == "small" for e in macro),
            "mass": mass,
            "max_density": max((e.density for e in macro), default=0.0),
        }

    stats = [census(p) for p in profiles]
    last, prev = stats[-1], stats[-2]
    diag = {"rho0": rho0, "threshold": threshold, "census": stats}

    if last["count"] == 0 or prev["count"] == 0:
        return ClassificationResult(CondensateType.INDETERMINATE, diag)
    if any(s["small_macro"] for s in stats):
        return ClassificationResult(CondensateType.INDETERMINATE, diag)
    spreads = [s["spread"] for s in stats]
    multiplicities = [s["per_interval_max"] for s in stats]
    if len(set(spreads)) == 1:
        thinning = all(b <= a for a, b in zip(multiplicities[:-1], multiplicities[1:]))
        if multiplicities[-1] == 1 and thinning:
            if 0.5 * rho0 <= last["mass"] <= 1.5 * rho0:
                return ClassificationResult(CondensateType.TYPE_I, diag)
            return ClassificationResult(CondensateType.INDETERMINATE, diag)
        if multiplicities[-1] >= 2 and prev["per_interval_max"] >= 2:
            return ClassificationResult(CondensateType.TYPE_II, diag)
        return ClassificationResult(CondensateType.INDETERMINATE, diag)
    if all(a < b for a, b in zip(spreads[:-1], spreads[1:])) and multiplicities[-1] == 1:
        return ClassificationResult(CondensateType.TYPE_III, diag)
    return ClassificationResult(CondensateType.INDETERMINATE, diag)
